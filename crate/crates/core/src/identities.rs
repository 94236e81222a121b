//! Convolutional Bessel sums and the two oracles used to check them.
//!
//! A pattern is a finite superposition of plane waves `F(x) = Σ_j w_j e^{i k_j·x}`
//! with unit wavevectors `k_j = (cos β_j, sin β_j)`. Jacobi–Anger turns this into
//! `F = Σ_m i^m c(m) J_m(r) e^{imθ}` with `c(m) = Σ_j w_j e^{-imβ_j}`, and the
//! conjugate into `Σ_m i^m c(m) J_{-m}(r) e^{imθ}`. Products of `d` such factors
//! therefore have angular mode `N` equal to `i^N` times the *convolutional sum*
//!
//! ```text
//! Σ_{m_1+…+m_d = N} Π_k c(m_k) J_{s_k m_k}(r)
//! ```
//!
//! and, expanding the product wave by wave, the same quantity equals
//! `Σ_tuples Π w · e^{-iNγ} J_N(|K| r)` where `K = Σ s_k k_{j_k}` has angle `γ`.
//! [`conv_sum`] evaluates the left side with truncated Bessel sequences;
//! [`hansen_oracle`] and [`wavevector_oracle`] evaluate the right side, the
//! former by plane-wave quadrature (no Bessel evaluation at all), the latter by
//! grouping resultants by magnitude.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{jn, jn_sequence, truncation_order};
use crate::error::{domain, Error, Result};

/// Pattern families supported throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Stripe,
    Hexagon,
    Rhombic,
    Quasipattern,
    /// Two hexagon lattices rotated by `±alpha`, `alpha ∈ (0, π/6)`.
    Rotated { alpha: f64 },
}

impl PatternKind {
    /// Spacing of the active angular modes.
    pub fn stride(&self) -> i64 {
        match self {
            PatternKind::Stripe | PatternKind::Rhombic => 1,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::Stripe => "stripe",
            PatternKind::Hexagon => "hexagon",
            PatternKind::Rhombic => "rhombic",
            PatternKind::Quasipattern => "quasipattern",
            PatternKind::Rotated { .. } => "rotated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PatternKind::Rotated { alpha } = *self {
            if !(alpha > 0.0 && alpha < FRAC_PI_6) {
                return domain(format!("rotation angle must lie in (0, π/6), got {alpha}"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Rotated { alpha } => write!(f, "rotated@{alpha}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    /// Accepts `stripe`, `hexagon`, `rhombic`, `quasipattern` and `rotated@<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "stripe" | "stripes" => PatternKind::Stripe,
            "hexagon" | "hexagons" => PatternKind::Hexagon,
            "rhombic" => PatternKind::Rhombic,
            "quasipattern" => PatternKind::Quasipattern,
            _ => match s.strip_prefix("rotated@") {
                Some(a) => {
                    let alpha = a.parse::<f64>().map_err(|_| Error::Domain(format!("bad rotation angle '{a}'")))?;
                    PatternKind::Rotated { alpha }
                }
                None => return domain(format!("unknown pattern '{s}'")),
            },
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Plane-wave content of a pattern: unit wavevectors with real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarWaveSet {
    pub vectors: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl PlanarWaveSet {
    fn from_angles(angles: &[f64], weights: &[f64]) -> Self {
        Self {
            vectors: angles.iter().map(|b| [b.cos(), b.sin()]).collect(),
            weights: weights.to_vec(),
        }
    }
}

/// The sequence `c(m)` multiplying `i^m J_m(r) e^{imθ}` in a pattern's
/// Fourier–Bessel expansion, indexed by Bessel order `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficientSequence {
    pub kind: PatternKind,
    pub stride: i64,
}

impl ModeCoefficientSequence {
    pub fn new(kind: PatternKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, stride: kind.stride() })
    }

    /// `c(m)`: 1 (stripe), 1 on multiples of 3 (hexagon),
    /// `a_m = (1 − 2cos(2mπ/3))/3` (rhombic), `b_k = cos(kπ/4)` (quasipattern) and
    /// `c_k = cos(3kα)` (rotated) at `m = 3k`; zero off-stride.
    pub fn coefficient(&self, m: i64) -> f64 {
        if m.rem_euclid(self.stride) != 0 {
            return 0.0;
        }
        let k = (m / self.stride) as f64;
        match self.kind {
            PatternKind::Stripe | PatternKind::Hexagon => 1.0,
            PatternKind::Rhombic => (1.0 - 2.0 * (2.0 * k * PI / 3.0).cos()) / 3.0,
            PatternKind::Quasipattern => (k * PI / 4.0).cos(),
            PatternKind::Rotated { alpha } => (3.0 * k * alpha).cos(),
        }
    }

    /// Wavevectors and weights reproducing [`coefficient`](Self::coefficient).
    pub fn wave_set(&self) -> PlanarWaveSet {
        let third = 2.0 * FRAC_PI_3;
        match self.kind {
            PatternKind::Stripe => PlanarWaveSet::from_angles(&[0.0], &[1.0]),
            PatternKind::Hexagon => PlanarWaveSet::from_angles(&[0.0, third, -third], &[1.0 / 3.0; 3]),
            PatternKind::Rhombic => {
                PlanarWaveSet::from_angles(&[0.0, third, -third], &[1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0])
            }
            PatternKind::Quasipattern => rotated_pair(PI / 12.0),
            PatternKind::Rotated { alpha } => rotated_pair(alpha),
        }
    }
}

fn rotated_pair(alpha: f64) -> PlanarWaveSet {
    let third = 2.0 * FRAC_PI_3;
    let mut angles = Vec::with_capacity(6);
    for l in [0.0, third, -third] {
        angles.push(l + alpha);
        angles.push(l - alpha);
    }
    PlanarWaveSet::from_angles(&angles, &[1.0 / 6.0; 6])
}

/// Bessel-order values of a sequence, stored with an index offset.
struct Seq {
    offset: i64,
    data: Vec<Complex64>,
}

impl Seq {
    fn at(&self, k: i64) -> Complex64 {
        let i = k + self.offset;
        if i < 0 || i as usize >= self.data.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[i as usize]
        }
    }

    fn convolve(&self, other: &Seq) -> Seq {
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len() + other.data.len() - 1];
        for (i, a) in self.data.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.data.iter().enumerate() {
                data[i + j] += a * b;
            }
        }
        Seq { offset: self.offset + other.offset, data }
    }
}

/// `J_{±m}(x)` for `m ∈ [0, M]` taken from one backward-recurrence sweep.
fn signed_orders(values: &[f64], k: i64, sign: i64) -> f64 {
    let order = sign * k;
    let v = values[order.unsigned_abs() as usize];
    if order < 0 && order % 2 != 0 {
        -v
    } else {
        v
    }
}

fn check_degree_mask(degree: usize, mask: &[i8]) -> Result<()> {
    if !(degree == 2 || degree == 3) {
        return domain(format!("degree must be 2 or 3, got {degree}"));
    }
    if mask.len() != degree || mask.iter().any(|s| *s != 1 && *s != -1) {
        return domain(format!("conjugation mask must hold {degree} entries of ±1"));
    }
    Ok(())
}

fn pattern_sum(seq: &ModeCoefficientSequence, mask: &[i8], n_stride: i64, r: f64, m: i64) -> Complex64 {
    let stride = seq.stride;
    let bessel = jn_sequence((m * stride).max(0) as usize, r);
    let factor = |sign: i64| Seq {
        offset: m,
        data: (-m..=m)
            .map(|i| {
                let order = stride * i;
                Complex64::new(seq.coefficient(order) * signed_orders(&bessel, order, sign), 0.0)
            })
            .collect(),
    };
    let mut acc = factor(mask[0] as i64);
    for s in &mask[1..] {
        acc = acc.convolve(&factor(*s as i64));
    }
    acc.at(n_stride)
}

/// Truncated convolutional sum of a pattern sequence.
///
/// `n` is the mode index in stride units (Bessel order `stride·n`); tuple indices
/// run over stride multiples with Bessel order in `[−K, K]`. Returns a
/// [`Error::Truncation`] when the outermost shell still contributes more than
/// `10⁻¹³`.
pub fn conv_sum(
    degree: usize,
    seq: &ModeCoefficientSequence,
    conjugation_mask: &[i8],
    n: i64,
    r: f64,
    k_max: i64,
) -> Result<Complex64> {
    check_degree_mask(degree, conjugation_mask)?;
    check_radius(r)?;
    if k_max < 0 {
        return domain("truncation order must be non-negative");
    }
    let m = k_max / seq.stride;
    let full = pattern_sum(seq, conjugation_mask, n, r, m);
    let inner = if m > 0 { pattern_sum(seq, conjugation_mask, n, r, m - 1) } else { Complex64::new(0.0, 0.0) };
    let shell = (full - inner).norm();
    if shell > 1e-13 {
        return Err(Error::Truncation { order: k_max, contribution: shell });
    }
    Ok(full)
}

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return domain(format!("radius must be finite and non-negative, got {r}"));
    }
    Ok(())
}

/// `Σ_{k_1+…+k_d = n} Π_i J_{k_i}(|x_i|) e^{i k_i arg x_i}` truncated at `|k_i| ≤ K`:
/// the left-hand side of the vector (Graf-type) addition theorem.
pub fn vector_conv_sum(n: i64, xs: &[[f64; 2]], k_max: i64) -> Result<Complex64> {
    if xs.is_empty() {
        return domain("vector convolution needs at least one vector");
    }
    let m = k_max.max(0);
    let mut acc: Option<Seq> = None;
    for x in xs {
        let rho = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        let bessel = jn_sequence(m as usize, rho);
        let s = Seq {
            offset: m,
            data: (-m..=m)
                .map(|k| signed_orders(&bessel, k, 1) * Complex64::from_polar(1.0, k as f64 * phi))
                .collect(),
        };
        acc = Some(match acc {
            None => s,
            Some(a) => a.convolve(&s),
        });
    }
    Ok(acc.expect("non-empty").at(n))
}

/// Trapezoid quadrature of `(1/2π) ∫ e^{inφ} e^{i y(φ)·Σx_i} dφ`, `y(φ) = (cos(φ+π/2), sin(φ+π/2))`,
/// which equals `J_n(|Σx|) e^{in arg Σx}`. Uses `4(|n| + Σ|x_i|) + 64` nodes.
pub fn hansen_oracle(n: i64, xs: &[[f64; 2]]) -> Complex64 {
    let total = xs.iter().fold([0.0, 0.0], |a, x| [a[0] + x[0], a[1] + x[1]]);
    let length: f64 = xs.iter().map(|x| x[0].hypot(x[1])).sum();
    let nodes = (4.0 * (n.unsigned_abs() as f64 + length)).ceil() as usize + 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..nodes {
        let phi = 2.0 * PI * q as f64 / nodes as f64;
        let (s, c) = (phi + FRAC_PI_2).sin_cos();
        let phase = n as f64 * phi + c * total[0] + s * total[1];
        acc += Complex64::from_polar(1.0, phase);
    }
    acc / nodes as f64
}

/// Every ordered tuple of pattern wavevectors with its weight product and
/// (conjugation-signed) resultant.
fn wave_tuples(seq: &ModeCoefficientSequence, mask: &[i8]) -> Vec<(f64, [f64; 2], Vec<[f64; 2]>)> {
    let waves = seq.wave_set();
    let count = waves.vectors.len();
    let total = count.pow(mask.len() as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut w = 1.0;
        let mut sum = [0.0, 0.0];
        let mut members = Vec::with_capacity(mask.len());
        for s in mask {
            let j = c % count;
            c /= count;
            let s = *s as f64;
            let v = [s * waves.vectors[j][0], s * waves.vectors[j][1]];
            w *= waves.weights[j];
            sum[0] += v[0];
            sum[1] += v[1];
            members.push(v);
        }
        out.push((w, sum, members));
    }
    out
}

/// Hansen-quadrature evaluation of a pattern convolutional sum: each wave tuple
/// contributes `Π w · hansen(N, r·(reflected members))`.
pub fn hansen_pattern_sum(seq: &ModeCoefficientSequence, conjugation_mask: &[i8], n: i64, r: f64) -> Result<Complex64> {
    check_degree_mask(conjugation_mask.len(), conjugation_mask)?;
    let order = seq.stride * n;
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, _, members) in wave_tuples(seq, conjugation_mask) {
        // Reflection in the x-axis turns e^{inγ} into the e^{-inγ} of the expansion.
        let xs: Vec<[f64; 2]> = members.iter().map(|v| [r * v[0], -r * v[1]]).collect();
        acc += w * hansen_oracle(order, &xs);
    }
    Ok(acc)
}

/// One resultant magnitude and its accumulated contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGroup {
    /// `|K|`, the frequency multiplying `r`.
    pub magnitude: f64,
    /// `Σ Π w · e^{-iNγ}` over the tuples in this group.
    #[serde(skip)]
    pub weight: Complex64,
    /// `weight · J_N(magnitude·r)`, with the Kronecker branch at zero magnitude.
    #[serde(skip)]
    pub value: Complex64,
    /// `Some(q)` when the magnitude equals the integer `q ∈ {0, 1, 2, 3}`.
    pub rational: Option<u8>,
}

/// Frequencies of a pattern product at one `(n, r)`, sorted by magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDecomposition {
    pub groups: Vec<FrequencyGroup>,
    pub tolerance: f64,
}

impl FrequencyDecomposition {
    pub fn total(&self) -> Complex64 {
        self.groups.iter().map(|g| g.value).sum()
    }

    pub fn irrational_total(&self) -> Complex64 {
        self.groups.iter().filter(|g| g.rational.is_none()).map(|g| g.value).sum()
    }

    pub fn group(&self, magnitude: f64) -> Option<&FrequencyGroup> {
        self.groups.iter().find(|g| (g.magnitude - magnitude).abs() <= self.tolerance)
    }
}

/// Grouping tolerance of [`wavevector_oracle`].
pub const GROUPING_TOLERANCE: f64 = 1e-9;

/// Enumerates every tuple of wavevectors, groups resultant magnitudes and sums
/// `Π w · e^{-iNγ} J_N(|K| r)` per group.
pub fn wavevector_oracle(
    seq: &ModeCoefficientSequence,
    degree: usize,
    conjugation_mask: &[i8],
    n: i64,
    r: f64,
) -> Result<FrequencyDecomposition> {
    check_degree_mask(degree, conjugation_mask)?;
    check_radius(r)?;
    let order = seq.stride * n;
    let mut terms: Vec<(f64, Complex64)> = wave_tuples(seq, conjugation_mask)
        .into_iter()
        .map(|(w, k, _)| {
            let mag = k[0].hypot(k[1]);
            let phase = if mag <= GROUPING_TOLERANCE {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -(order as f64) * k[1].atan2(k[0]))
            };
            (mag, w * phase)
        })
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<FrequencyGroup> = Vec::new();
    let mut members = 0usize;
    for (mag, w) in terms {
        match groups.last_mut() {
            Some(g) if mag - g.magnitude <= GROUPING_TOLERANCE => {
                // Running mean keeps the representative magnitude centred.
                members += 1;
                g.magnitude += (mag - g.magnitude) / members as f64;
                g.weight += w;
            }
            _ => {
                members = 1;
                groups.push(FrequencyGroup { magnitude: mag, weight: w, value: w, rational: None });
            }
        }
    }
    for g in &mut groups {
        let nearest = g.magnitude.round();
        if (g.magnitude - nearest).abs() <= GROUPING_TOLERANCE && nearest <= 3.0 {
            g.rational = Some(nearest as u8);
            g.magnitude = nearest;
        }
        let bessel = if g.rational == Some(0) {
            if order == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            jn(order, g.magnitude * r)
        };
        g.value = g.weight * bessel;
    }
    groups.retain(|g| g.weight.norm() > 1e-14);
    Ok(FrequencyDecomposition { groups, tolerance: GROUPING_TOLERANCE })
}

/// Degree and conjugation pattern of a catalogued product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductForm {
    /// `u·u`
    PlusPlus,
    /// `u·ū`
    PlusMinus,
    /// `u·u·u`
    PlusPlusPlus,
    /// `u·u·ū`
    PlusPlusMinus,
}

impl ProductForm {
    pub const ALL: [ProductForm; 4] =
        [ProductForm::PlusPlus, ProductForm::PlusMinus, ProductForm::PlusPlusPlus, ProductForm::PlusPlusMinus];

    pub fn mask(&self) -> &'static [i8] {
        match self {
            ProductForm::PlusPlus => &[1, 1],
            ProductForm::PlusMinus => &[1, -1],
            ProductForm::PlusPlusPlus => &[1, 1, 1],
            ProductForm::PlusPlusMinus => &[1, 1, -1],
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            ProductForm::PlusPlus => "pp",
            ProductForm::PlusMinus => "pm",
            ProductForm::PlusPlusPlus => "ppp",
            ProductForm::PlusPlusMinus => "ppm",
        }
    }
}

/// Identifier of a catalogued identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentityId {
    /// Quadratic/cubic products of a pattern expansion.
    Pattern { kind: PatternKind, form: ProductForm },
    /// `Σ_{i+j=n} J_i(2r) J_{∓j}(r) = J_n(r)` (minus) or `J_n(3r)` (plus).
    StripeNested { conjugate: bool },
    /// `J_n((m−2j) r)` as an m-fold sum with `j` reversed factors.
    IntegerMultiple { m: usize, j: usize },
    /// Graf's theorem for the fixed vector pair `x = r(cos 0.4, sin 0.4)`,
    /// `y = 0.7r(cos 2.2, sin 2.2)`, with `x + y` or `x − y`.
    Graf { minus: bool },
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityId::Pattern { kind, form } => write!(f, "{kind}:{}", form.tag()),
            IdentityId::StripeNested { conjugate } => {
                write!(f, "stripe:nested-{}", if *conjugate { "pm" } else { "pp" })
            }
            IdentityId::IntegerMultiple { m, j } => write!(f, "multiple:m{m}j{j}"),
            IdentityId::Graf { minus } => write!(f, "graf:{}", if *minus { "minus" } else { "plus" }),
        }
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownIdentity(s.to_string());
        let (head, tail) = s.split_once(':').ok_or_else(unknown)?;
        match head {
            "graf" => match tail {
                "plus" => Ok(IdentityId::Graf { minus: false }),
                "minus" => Ok(IdentityId::Graf { minus: true }),
                _ => Err(unknown()),
            },
            "multiple" => {
                let rest = tail.strip_prefix('m').ok_or_else(unknown)?;
                let (m, j) = rest.split_once('j').ok_or_else(unknown)?;
                let m: usize = m.parse().map_err(|_| unknown())?;
                let j: usize = j.parse().map_err(|_| unknown())?;
                if m < 2 || j < 1 || j > m {
                    return Err(unknown());
                }
                Ok(IdentityId::IntegerMultiple { m, j })
            }
            _ if tail == "nested-pp" && head == "stripe" => Ok(IdentityId::StripeNested { conjugate: false }),
            _ if tail == "nested-pm" && head == "stripe" => Ok(IdentityId::StripeNested { conjugate: true }),
            _ => {
                let kind: PatternKind = head.parse().map_err(|_| unknown())?;
                let form = ProductForm::ALL.into_iter().find(|f| f.tag() == tail).ok_or_else(unknown)?;
                Ok(IdentityId::Pattern { kind, form })
            }
        }
    }
}

/// The full catalogue; rotated variants are generated for each `alpha` given.
pub fn identity_catalogue(alphas: &[f64]) -> Vec<IdentityId> {
    let mut out = Vec::new();
    let mut kinds = vec![PatternKind::Stripe, PatternKind::Hexagon, PatternKind::Rhombic, PatternKind::Quasipattern];
    kinds.extend(alphas.iter().map(|&alpha| PatternKind::Rotated { alpha }));
    for kind in kinds {
        for form in ProductForm::ALL {
            out.push(IdentityId::Pattern { kind, form });
        }
    }
    out.push(IdentityId::StripeNested { conjugate: true });
    out.push(IdentityId::StripeNested { conjugate: false });
    for m in 2..=4 {
        for j in 1..=m {
            out.push(IdentityId::IntegerMultiple { m, j });
        }
    }
    out.push(IdentityId::Graf { minus: false });
    out.push(IdentityId::Graf { minus: true });
    out
}

/// Radii of the standard verification lattice.
pub const STANDARD_RADII: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Largest `|n|` of the standard verification lattice (stride units for patterns).
pub const STANDARD_MAX_ORDER: i64 = 6;

/// Rotation angles for the rotated-hexagon variants of the standard lattice.
pub const ROTATION_SAMPLES: [f64; 3] = [PI / 24.0, PI / 8.0, 0.45];

/// Verifies every catalogued identity for `|n| ≤ max_order` and `r ∈ radii`,
/// in catalogue order, in parallel.
pub fn verify_lattice(ids: &[IdentityId], max_order: i64, radii: &[f64]) -> Result<Vec<IdentityReport>> {
    let jobs: Vec<(IdentityId, i64, f64)> = ids
        .iter()
        .flat_map(|&id| (-max_order..=max_order).flat_map(move |n| radii.iter().map(move |&r| (id, n, r))))
        .collect();
    jobs.into_par_iter().map(|(id, n, r)| verify_identity(id, n, r, None)).collect()
}

/// Rational-frequency part of a pattern identity: `(coefficient, magnitude, order sign)`
/// meaning `coefficient · J_{sign·N}(magnitude · r)` (magnitude 0 is `δ_{N,0}`).
fn rational_terms(kind: PatternKind, form: ProductForm, n: i64) -> Vec<(f64, u8, i64)> {
    use ProductForm::*;
    let seq = ModeCoefficientSequence { kind, stride: kind.stride() };
    let cn = seq.coefficient(kind.stride() * n);
    match kind {
        PatternKind::Stripe => match form {
            PlusMinus => vec![(1.0, 0, 1)],
            PlusPlus => vec![(1.0, 2, 1)],
            PlusPlusMinus => vec![(1.0, 1, 1)],
            PlusPlusPlus => vec![(1.0, 3, 1)],
        },
        PatternKind::Hexagon => match form {
            PlusPlus => vec![(2.0 / 3.0, 1, -1), (1.0 / 3.0, 2, 1)],
            PlusMinus => vec![(1.0 / 3.0, 0, 1)],
            PlusPlusPlus => vec![(2.0 / 9.0, 0, 1), (1.0 / 9.0, 3, 1)],
            PlusPlusMinus => vec![(5.0 / 9.0, 1, 1), (2.0 / 9.0, 2, -1)],
        },
        PatternKind::Rhombic => {
            let e = 1.0 + 2.0 * (2.0 * n as f64 * PI / 3.0).cos();
            match form {
                PlusPlus => vec![(2.0 / 3.0 * cn, 1, -1), (e / 9.0, 2, 1)],
                PlusMinus => vec![(1.0 / 3.0, 0, 1)],
                PlusPlusPlus => vec![(2.0 / 9.0, 0, 1), (cn / 9.0, 3, 1)],
                PlusPlusMinus => vec![(5.0 / 9.0 * cn, 1, 1), (2.0 / 27.0 * e, 2, -1)],
            }
        }
        PatternKind::Quasipattern | PatternKind::Rotated { .. } => match form {
            PlusPlus => vec![(cn / 3.0, 1, -1), (cn / 6.0, 2, 1)],
            PlusMinus => vec![(1.0 / 6.0, 0, 1)],
            PlusPlusPlus => vec![(1.0 / 18.0, 0, 1), (cn / 36.0, 3, 1)],
            PlusPlusMinus => vec![(11.0 / 36.0 * cn, 1, 1), (cn / 18.0, 2, -1)],
        },
    }
}

/// Outcome of [`verify_identity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub n: i64,
    pub r: f64,
    pub k: i64,
    /// Truncated Bessel-series side.
    pub lhs: Complex64,
    /// Stated right-hand side (rational terms plus oracle-supplied irrational groups).
    pub rhs: Complex64,
    pub abs_error: f64,
    /// Independent plane-wave quadrature of the same quantity.
    pub hansen: Complex64,
    /// Total of the wavevector oracle (equal to `rhs` minus the stated rational terms
    /// plus the oracle's own rational groups).
    pub oracle_total: Complex64,
}

impl IdentityReport {
    /// Largest discrepancy between the series side and either oracle.
    pub fn oracle_error(&self) -> f64 {
        (self.lhs - self.hansen).norm().max((self.lhs - self.oracle_total).norm())
    }
}

/// Vectors realising the non-pattern identities at radius `r`.
fn identity_vectors(id: IdentityId, r: f64) -> Option<Vec<[f64; 2]>> {
    match id {
        IdentityId::Pattern { .. } => None,
        IdentityId::StripeNested { conjugate } => {
            let s = if conjugate { -1.0 } else { 1.0 };
            Some(vec![[2.0 * r, 0.0], [s * r, 0.0]])
        }
        IdentityId::IntegerMultiple { m, j } => {
            Some((0..m).map(|i| if i < j { [-r, 0.0] } else { [r, 0.0] }).collect())
        }
        IdentityId::Graf { minus } => {
            let s = if minus { -1.0 } else { 1.0 };
            let x = [r * 0.4_f64.cos(), r * 0.4_f64.sin()];
            let y = [s * 0.7 * r * 2.2_f64.cos(), s * 0.7 * r * 2.2_f64.sin()];
            Some(vec![x, y])
        }
    }
}

/// Default truncation for an identity at radius `r` (Bessel order units).
pub fn default_truncation(id: IdentityId, n: i64, r: f64) -> i64 {
    let reach = match id {
        IdentityId::Pattern { .. } => r,
        IdentityId::StripeNested { .. } => 2.0 * r,
        IdentityId::IntegerMultiple { .. } => r,
        IdentityId::Graf { .. } => r,
    };
    let stride = match id {
        IdentityId::Pattern { kind, .. } => kind.stride(),
        _ => 1,
    };
    (truncation_order(reach.max(1e-3), 1e-10) + (stride * n).abs()).max(1)
}

/// Evaluates one identity at `(n, r)`; `k_max = None` picks [`default_truncation`].
pub fn verify_identity(id: IdentityId, n: i64, r: f64, k_max: Option<i64>) -> Result<IdentityReport> {
    check_radius(r)?;
    let k = k_max.unwrap_or_else(|| default_truncation(id, n, r));
    match id {
        IdentityId::Pattern { kind, form } => {
            let seq = ModeCoefficientSequence::new(kind)?;
            let mask = form.mask();
            let lhs = conv_sum(mask.len(), &seq, mask, n, r, k)?;
            let oracle = wavevector_oracle(&seq, mask.len(), mask, n, r)?;
            let order = seq.stride * n;
            let rational: Complex64 = rational_terms(kind, form, n)
                .into_iter()
                .map(|(c, mag, sign)| {
                    let b = if mag == 0 {
                        if order == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        jn(sign * order, mag as f64 * r)
                    };
                    Complex64::new(c * b, 0.0)
                })
                .sum();
            let rhs = rational + oracle.irrational_total();
            Ok(IdentityReport {
                id,
                n,
                r,
                k,
                lhs,
                rhs,
                abs_error: (lhs - rhs).norm(),
                hansen: hansen_pattern_sum(&seq, mask, n, r)?,
                oracle_total: oracle.total(),
            })
        }
        _ => {
            let xs = identity_vectors(id, r).expect("vector identity");
            let lhs = vector_conv_sum(n, &xs, k)?;
            let total = xs.iter().fold([0.0, 0.0], |a, x| [a[0] + x[0], a[1] + x[1]]);
            let rhs = closed_form_plane_wave(n, total);
            Ok(IdentityReport {
                id,
                n,
                r,
                k,
                lhs,
                rhs,
                abs_error: (lhs - rhs).norm(),
                hansen: hansen_oracle(n, &xs),
                oracle_total: rhs,
            })
        }
    }
}

/// `J_n(|x|) e^{in arg x}` with the Kronecker branch at `x = 0`.
pub fn closed_form_plane_wave(n: i64, x: [f64; 2]) -> Complex64 {
    let rho = x[0].hypot(x[1]);
    if rho == 0.0 {
        return Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    jn(n, rho) * Complex64::from_polar(1.0, n as f64 * x[1].atan2(x[0]))
}

/// Graf's theorem for an arbitrary vector pair: returns `(lhs, rhs)` of
/// `Σ_{i+j=n} e^{i(i arg x + j arg y)} J_i(|x|) J_{±j}(|y|) = J_n(|x ± y|) e^{in arg(x ± y)}`.
pub fn graf_pair(x: [f64; 2], y: [f64; 2], minus: bool, n: i64) -> Result<(Complex64, Complex64)> {
    let reach = x[0].hypot(x[1]).max(y[0].hypot(y[1])).max(1e-3);
    let k = truncation_order(reach, 1e-10) + n.abs();
    let (rx, ax) = (x[0].hypot(x[1]), x[1].atan2(x[0]));
    let (ry, ay) = (y[0].hypot(y[1]), y[1].atan2(y[0]));
    let sign = if minus { -1 } else { 1 };
    let mut lhs = Complex64::new(0.0, 0.0);
    for i in -k..=k {
        let j = n - i;
        lhs += Complex64::from_polar(1.0, i as f64 * ax + j as f64 * ay) * jn(i, rx) * jn(sign * j, ry);
    }
    let s = if minus { -1.0 } else { 1.0 };
    let rhs = closed_form_plane_wave(n, [x[0] + s * y[0], x[1] + s * y[1]]);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex() -> ModeCoefficientSequence {
        ModeCoefficientSequence::new(PatternKind::Hexagon).unwrap()
    }

    fn stripe() -> ModeCoefficientSequence {
        ModeCoefficientSequence::new(PatternKind::Stripe).unwrap()
    }

    #[test]
    fn coefficients_match_wave_sets() {
        let kinds = [
            PatternKind::Stripe,
            PatternKind::Hexagon,
            PatternKind::Rhombic,
            PatternKind::Quasipattern,
            PatternKind::Rotated { alpha: 0.3 },
        ];
        for kind in kinds {
            let seq = ModeCoefficientSequence::new(kind).unwrap();
            let waves = seq.wave_set();
            for m in -40..=40_i64 {
                let c: Complex64 = waves
                    .vectors
                    .iter()
                    .zip(&waves.weights)
                    .map(|(v, w)| w * Complex64::from_polar(1.0, -(m as f64) * v[1].atan2(v[0])))
                    .sum();
                assert!((c.re - seq.coefficient(m)).abs() < 1e-14 && c.im.abs() < 1e-14, "{kind} m={m}");
            }
            for v in &waves.vectors {
                assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stride_and_validation() {
        assert_eq!(hex().stride, 3);
        assert_eq!(hex().coefficient(4), 0.0);
        assert_eq!(ModeCoefficientSequence::new(PatternKind::Rhombic).unwrap().stride, 1);
        assert!(ModeCoefficientSequence::new(PatternKind::Rotated { alpha: 0.6 }).is_err());
        assert!(ModeCoefficientSequence::new(PatternKind::Rotated { alpha: 0.0 }).is_err());
        assert_eq!("rotated@0.1309".parse::<PatternKind>().unwrap(), PatternKind::Rotated { alpha: 0.1309 });
        assert!("square".parse::<PatternKind>().is_err());
    }

    #[test]
    fn stripe_conv_sum_examples() {
        let v = conv_sum(2, &stripe(), &[1, -1], 0, 1.0, 30).unwrap();
        assert!((v.re - 1.0).abs() < 1e-14 && v.im == 0.0);
        let v = conv_sum(2, &stripe(), &[1, 1], 1, 1.0, 30).unwrap();
        assert!((v.re - jn(1, 2.0)).abs() < 1e-14);
        let v = conv_sum(3, &stripe(), &[1, 1, -1], 0, 2.0, 30).unwrap();
        assert!((v.re - jn(0, 2.0)).abs() < 1e-14);
    }

    #[test]
    fn conv_sum_flags_short_truncation_and_bad_input() {
        assert!(matches!(conv_sum(2, &stripe(), &[1, 1], 0, 10.0, 5), Err(Error::Truncation { .. })));
        assert!(conv_sum(4, &stripe(), &[1, 1, 1, 1], 0, 1.0, 10).is_err());
        assert!(conv_sum(2, &stripe(), &[1, 2], 0, 1.0, 10).is_err());
        assert!(conv_sum(2, &stripe(), &[1, 1], 0, -1.0, 10).is_err());
    }

    #[test]
    fn conv_sum_is_stable_under_doubling_k() {
        for r in [0.5, 5.0, 10.0] {
            let k = truncation_order(r, 1e-10);
            for form in ProductForm::ALL {
                let m = form.mask();
                let a = conv_sum(m.len(), &hex(), m, 2, r, k).unwrap();
                let b = conv_sum(m.len(), &hex(), m, 2, r, 2 * k).unwrap();
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn hansen_examples() {
        assert!((hansen_oracle(0, &[[0.0, 0.0]]) - 1.0).norm() < 1e-15);
        let v = hansen_oracle(2, &[[1.0, 0.0], [1.0, 0.0]]);
        assert!((v - jn(2, 2.0)).norm() < 1e-14);
        assert!(hansen_oracle(1, &[[1.0, 0.0], [-1.0, 0.0]]).norm() < 1e-15);
        let x = [3.0 * 1.1_f64.cos(), 3.0 * 1.1_f64.sin()];
        assert!((hansen_oracle(5, &[x]) - closed_form_plane_wave(5, x)).norm() < 1e-13);
    }

    #[test]
    fn oracle_groups_for_hexagon_quadratic() {
        let d = wavevector_oracle(&hex(), 2, &[1, 1], 0, 1.3).unwrap();
        let one = d.group(1.0).unwrap();
        let two = d.group(2.0).unwrap();
        assert!((one.weight.re - 2.0 / 3.0).abs() < 1e-14);
        assert!((two.weight.re - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(d.groups.len(), 2, "u·u has no irrational frequencies");
        let d = wavevector_oracle(&hex(), 2, &[1, -1], 0, 1.3).unwrap();
        assert!((d.group(0.0).unwrap().weight.re - 1.0 / 3.0).abs() < 1e-14);
        assert!(d.group(3.0_f64.sqrt()).unwrap().rational.is_none());
        assert!(d.groups.windows(2).all(|w| w[1].magnitude - w[0].magnitude > GROUPING_TOLERANCE));
    }

    #[test]
    fn oracle_groups_for_stripe_and_quasipattern() {
        let d = wavevector_oracle(&stripe(), 2, &[1, -1], 0, 2.0).unwrap();
        assert_eq!(d.groups.len(), 1);
        assert_eq!(d.groups[0].rational, Some(0));
        assert!((d.total().re - 1.0).abs() < 1e-15);
        let q = ModeCoefficientSequence::new(PatternKind::Quasipattern).unwrap();
        let d = wavevector_oracle(&q, 3, &[1, 1, -1], 0, 1.0).unwrap();
        assert!((d.group(1.0).unwrap().weight.re - 11.0 / 36.0).abs() < 1e-14);
        assert!((d.group(2.0).unwrap().weight.re - 1.0 / 18.0).abs() < 1e-14);
        assert!(d.groups.iter().any(|g| g.rational.is_none()));
    }

    #[test]
    fn catalogue_examples() {
        let cases = [
            ("stripe:pp", 3, 2.5),
            ("hexagon:ppm", 1, 4.0),
            ("rhombic:pp", 0, 1.0),
            ("quasipattern:ppp", -2, 5.0),
            ("multiple:m4j1", 3, 2.0),
            ("graf:minus", -4, 10.0),
            ("stripe:nested-pm", 2, 1.0),
        ];
        for (id, n, r) in cases {
            let rep = verify_identity(id.parse().unwrap(), n, r, None).unwrap();
            assert!(rep.abs_error <= 1e-9, "{id}: {}", rep.abs_error);
            assert!(rep.oracle_error() <= 1e-9, "{id}: {}", rep.oracle_error());
        }
    }

    #[test]
    fn identity_ids_round_trip() {
        for id in identity_catalogue(&[0.1, 0.25]) {
            let text = id.to_string();
            assert_eq!(text.parse::<IdentityId>().unwrap(), id, "{text}");
        }
        assert!(matches!("hexagon:pq".parse::<IdentityId>(), Err(Error::UnknownIdentity(_))));
        assert!(matches!("multiple:m2j3".parse::<IdentityId>(), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn graf_pairs() {
        let (l, r) = graf_pair([1.0, 2.0], [-0.5, 3.0], true, 3).unwrap();
        assert!((l - r).norm() < 1e-12);
        let (l, r) = graf_pair([4.0, -1.0], [2.0, 0.3], false, -2).unwrap();
        assert!((l - r).norm() < 1e-12);
    }
}
