//! Hexagon amplitude equations for two-component reaction–diffusion systems
//! in the stationary Taylor-truncated form
//!
//! ```text
//! 0 = Δu − M₁u − μM₂u − νQ(u,u) − C(u,u,u),     u ∈ ℝ²,
//! ```
//!
//! where `M₁ + k_c²` is a non-zero nilpotent matrix (a Jordan block at the
//! Turing point). The solvability condition on the `Û₁*` direction reads
//!
//! ```text
//! 0 = −4A'' − μ̂ (Û₁*·M₂Û₀) A − 2ν̂ (Û₁*·Q₀) Ā² − 15 (Û₁*·C₀) |A|² A.
//! ```

use serde::{Deserialize, Serialize};

use crate::amplitude::{homoclinic_solution, AmplitudeCoefficients, Provenance};
use crate::bessel::{RadialGrid, RadialProfile};
use crate::error::{domain, Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Relative thresholds for deciding the Jordan structure of `M₁`.
const RANK_TOL: f64 = 1e-8;

/// A reaction–diffusion system in the truncated form above.
///
/// Matrices are row-major. `q[i] = [Q_i11, Q_i12, Q_i22]` and
/// `c[i] = [C_i111, C_i112, C_i122, C_i222]` are the independent entries of the
/// symmetric bilinear and trilinear maps for output component `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RDSystemSpec {
    pub m1: Mat2,
    pub m2: Mat2,
    pub q: [[f64; 3]; 2],
    pub c: [[f64; 4]; 2],
    pub kc2: f64,
    pub nu: f64,
}

impl RDSystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Format(format!("reaction–diffusion spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .m1
            .iter()
            .chain(&self.m2)
            .flatten()
            .chain(self.q.iter().flatten())
            .chain(self.c.iter().flatten())
            .chain([&self.kc2, &self.nu]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return domain("reaction–diffusion spec contains non-finite entries");
        }
        if !(self.kc2 > 0.0) {
            return domain(format!("critical wavenumber squared must be positive, got {}", self.kc2));
        }
        Ok(())
    }

    /// `Q(a, b)`.
    pub fn quadratic(&self, a: Vec2, b: Vec2) -> Vec2 {
        let f = |q: &[f64; 3]| q[0] * a[0] * b[0] + q[1] * (a[0] * b[1] + a[1] * b[0]) + q[2] * a[1] * b[1];
        [f(&self.q[0]), f(&self.q[1])]
    }

    /// `C(a, b, c)`.
    pub fn cubic(&self, a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
        let f = |k: &[f64; 4]| {
            k[0] * a[0] * b[0] * c[0]
                + k[1] * (a[0] * b[0] * c[1] + a[0] * b[1] * c[0] + a[1] * b[0] * c[0])
                + k[2] * (a[0] * b[1] * c[1] + a[1] * b[0] * c[1] + a[1] * b[1] * c[0])
                + k[3] * a[1] * b[1] * c[1]
        };
        [f(&self.c[0]), f(&self.c[1])]
    }

    /// The same system in coordinates `u = S v`.
    pub fn conjugate(&self, s: Mat2) -> Result<Self> {
        let si = inverse(s)?;
        let (e1, e2) = ([s[0][0], s[1][0]], [s[0][1], s[1][1]]);
        let q = |a, b| mat_vec(si, self.quadratic(a, b));
        let c = |a, b, d| mat_vec(si, self.cubic(a, b, d));
        let (q11, q12, q22) = (q(e1, e1), q(e1, e2), q(e2, e2));
        let (c111, c112, c122, c222) = (c(e1, e1, e1), c(e1, e1, e2), c(e1, e2, e2), c(e2, e2, e2));
        Ok(Self {
            m1: mat_mul(mat_mul(si, self.m1), s),
            m2: mat_mul(mat_mul(si, self.m2), s),
            q: [0, 1].map(|i| [q11[i], q12[i], q22[i]]),
            c: [0, 1].map(|i| [c111[i], c112[i], c122[i], c222[i]]),
            kc2: self.kc2,
            nu: self.nu,
        })
    }
}

/// Jordan chain `(M₁ + k_c²)U₀ = 0`, `(M₁ + k_c²)U₁ = k_c²U₀` with duals `Uᵢ*·Uⱼ = δᵢⱼ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanBasis {
    pub u0: Vec2,
    pub u1: Vec2,
    pub u0_star: Vec2,
    pub u1_star: Vec2,
    pub kc_squared: f64,
}

fn norm_inf(m: Mat2) -> f64 {
    m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn mat_vec(m: Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn mat_mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn inverse(m: Mat2) -> Result<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() <= 1e-14 * norm_inf(m).powi(2) {
        return Err(Error::Structure("matrix is singular".into()));
    }
    Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Singular values of a 2×2 matrix, largest first.
fn singular_values(m: Mat2) -> (f64, f64) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = (a + d).hypot(c - b);
    let s2 = (a - d).hypot(c + b);
    (0.5 * (s1 + s2), 0.5 * (s1 - s2).abs())
}

/// Verifies the Jordan structure of `M₁` and builds the canonical chain.
///
/// `U₀` is a unit vector spanning `ker(M₁ + k_c²)`, and `U₁ ⊥ U₀` fixes the
/// freedom `U₁ → U₁ + tU₀`. The double eigenvalue is decided on the trace-free
/// part `N = M₁ − (tr M₁/2)I`: `N = 0` means a diagonalisable `M₁`, and
/// otherwise `N` must have rank one (`σ_min ≤ 10⁻⁸σ_max`); the sign of `det N`
/// tells complex from distinct real eigenvalues.
pub fn jordan_basis(spec: &RDSystemSpec) -> Result<JordanBasis> {
    spec.validate()?;
    let m1 = spec.m1;
    let scale = norm_inf(m1).max(spec.kc2);
    let lambda = 0.5 * (m1[0][0] + m1[1][1]);
    let n: Mat2 = [[m1[0][0] - lambda, m1[0][1]], [m1[1][0], m1[1][1] - lambda]];
    let (s_max, s_min) = singular_values(n);
    if s_max <= RANK_TOL * scale {
        return Err(Error::Structure(
            "M1 is diagonalisable (repeated eigenvalue with geometric multiplicity 2)".into(),
        ));
    }
    if s_min > RANK_TOL * s_max {
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        let what = if det > 0.0 { "a complex-conjugate pair" } else { "two distinct real values" };
        return Err(Error::Structure(format!("M1 has no repeated eigenvalue: its spectrum is {what}")));
    }
    if (lambda + spec.kc2).abs() > RANK_TOL * scale {
        return Err(Error::Structure(format!(
            "repeated eigenvalue {lambda} of M1 does not equal −kc² = {}",
            -spec.kc2
        )));
    }
    let kc2 = -lambda;
    // Columns of a rank-one nilpotent matrix span its kernel.
    let col = |j: usize| [n[0][j], n[1][j]];
    let (c0, c1) = (col(0), col(1));
    let pick = if c0[0].hypot(c0[1]) >= c1[0].hypot(c1[1]) { c0 } else { c1 };
    let len = pick[0].hypot(pick[1]);
    let u0 = [pick[0] / len, pick[1] / len];
    // N = U₀ wᵀ with w = Nᵀ U₀, so N U₁ = k_c² U₀ ⇔ w·U₁ = k_c²; w ⊥ U₀.
    let w = [n[0][0] * u0[0] + n[1][0] * u0[1], n[0][1] * u0[0] + n[1][1] * u0[1]];
    let ww = dot(w, w);
    let u1 = [kc2 * w[0] / ww, kc2 * w[1] / ww];
    let inv = inverse([[u0[0], u1[0]], [u0[1], u1[1]]])?;
    Ok(JordanBasis { u0, u1, u0_star: inv[0], u1_star: inv[1], kc_squared: kc2 })
}

/// Largest violation of the Jordan-chain and duality relations.
pub fn basis_defects(spec: &RDSystemSpec, b: &JordanBasis) -> (f64, f64, f64) {
    let n = [[spec.m1[0][0] + b.kc_squared, spec.m1[0][1]], [spec.m1[1][0], spec.m1[1][1] + b.kc_squared]];
    let r0 = mat_vec(n, b.u0);
    let r1 = mat_vec(n, b.u1);
    let kernel = r0[0].abs().max(r0[1].abs());
    let chain = (r1[0] - b.kc_squared * b.u0[0]).abs().max((r1[1] - b.kc_squared * b.u0[1]).abs());
    let duals = [
        dot(b.u0_star, b.u0) - 1.0,
        dot(b.u0_star, b.u1),
        dot(b.u1_star, b.u0),
        dot(b.u1_star, b.u1) - 1.0,
    ]
    .iter()
    .fold(0.0_f64, |m, v| m.max(v.abs()));
    (kernel, chain, duals)
}

/// Covector contractions entering the solvability condition, on the unit-`U₀` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdContractions {
    /// `Û₁*·M₂Û₀`.
    pub linear: f64,
    /// `Û₁*·Q(Û₀,Û₀)`.
    pub quadratic: f64,
    /// `Û₁*·C(Û₀,Û₀,Û₀)`.
    pub cubic: f64,
}

pub fn rd_contractions(spec: &RDSystemSpec, basis: &JordanBasis) -> RdContractions {
    let u0 = basis.u0;
    RdContractions {
        linear: dot(basis.u1_star, mat_vec(spec.m2, u0)),
        quadratic: dot(basis.u1_star, spec.quadratic(u0, u0)),
        cubic: dot(basis.u1_star, spec.cubic(u0, u0, u0)),
    }
}

/// Amplitude equation of a reaction–diffusion system in a basis-independent gauge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdAmplitude {
    pub basis: JordanBasis,
    pub contractions: RdContractions,
    /// Coefficients for the amplitude `B` of `u ≈ ε B (βÛ₀) J(k_c r) + …`.
    pub coefficients: AmplitudeCoefficients,
    /// `β = sgn(Û₁*·Q₀)/√|Û₁*·C₀|`: the rescaling of `Û₀` that makes the cubic
    /// coefficient `±15` and the quadratic one non-negative.
    pub scale: f64,
}

/// Hexagon amplitude coefficients of a reaction–diffusion system.
///
/// Multiplying the solvability condition by −1 gives `d = 4`,
/// `λ = −μ̂ (Û₁*·M₂Û₀)`, `q = 2ν̂ (Û₁*·Q₀)` and `c = 15 (Û₁*·C₀)`. The length
/// of `Û₀` is a basis choice that rescales `q` and `c`; fixing it by
/// `|Û₁*·C₀| = 1`, `Û₁*·Q₀ ≥ 0` makes the result invariant under changes of
/// coordinates.
pub fn rd_amplitude_coeffs(spec: &RDSystemSpec, mu_hat: f64, nu_hat: f64) -> Result<RdAmplitude> {
    if !(mu_hat.is_finite() && nu_hat.is_finite()) {
        return domain("μ̂ and ν̂ must be finite");
    }
    let basis = jordan_basis(spec)?;
    let k = rd_contractions(spec, &basis);
    let c_scale = spec.c.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    if k.cubic.abs() <= 1e-12 * c_scale {
        return Err(Error::Degenerate(format!(
            "Û₁*·C₀ = {:e}: the amplitude equation has no cubic saturation",
            k.cubic
        )));
    }
    let sign = if k.quadratic < 0.0 { -1.0 } else { 1.0 };
    let beta = sign / k.cubic.abs().sqrt();
    let coefficients = AmplitudeCoefficients::new(
        4.0,
        -mu_hat * k.linear,
        2.0 * nu_hat * k.quadratic * beta,
        15.0 * k.cubic * beta * beta,
        Provenance::RdSystem,
    )?;
    Ok(RdAmplitude { basis, contractions: k, coefficients, scale: beta })
}

/// Localised hexagon envelope of a reaction–diffusion system: the closed-form
/// homoclinic of its amplitude equation in normal form.
pub fn rd_localised_hexagon(spec: &RDSystemSpec, mu_hat: f64, nu_hat: f64, grid: RadialGrid) -> Result<RadialProfile> {
    let amp = rd_amplitude_coeffs(spec, mu_hat, nu_hat)?;
    let (mh, nh, a) = amp.coefficients.normal_form();
    homoclinic_solution(mh, nh, a, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::she_amplitude_coeffs;
    use crate::identities::PatternKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jordan_spec() -> RDSystemSpec {
        RDSystemSpec {
            m1: [[-1.0, 1.0], [0.0, -1.0]],
            m2: [[0.0, 0.0], [1.0, 0.0]],
            q: [[0.0; 3]; 2],
            c: [[0.0; 4], [1.0, 0.0, 0.0, 0.0]],
            kc2: 1.0,
            nu: 1.0,
        }
    }

    /// Constructed so that the amplitude equation is the Swift–Hohenberg hexagon one.
    fn she_matched() -> RDSystemSpec {
        RDSystemSpec {
            m2: [[0.0, 0.0], [-1.0, 0.0]],
            q: [[0.0; 3], [1.0, 0.0, 0.0]],
            c: [[0.0; 4], [-1.0, 0.0, 0.0, 0.0]],
            ..jordan_spec()
        }
    }

    fn random_similarity(rng: &mut ChaCha8Rng) -> Mat2 {
        loop {
            let s: Mat2 = [[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]];
            if (s[0][0] * s[1][1] - s[0][1] * s[1][0]).abs() > 0.2 {
                return s;
            }
        }
    }

    #[test]
    fn explicit_block() {
        let b = jordan_basis(&jordan_spec()).unwrap();
        assert_eq!(b.u0, [1.0, 0.0]);
        assert_eq!(b.u1, [0.0, 1.0]);
        assert_eq!(b.u0_star, [1.0, 0.0]);
        assert_eq!(b.u1_star, [0.0, 1.0]);
        let amp = rd_amplitude_coeffs(&jordan_spec(), 0.5, 2.0).unwrap();
        assert_eq!(amp.contractions, RdContractions { linear: 1.0, quadratic: 0.0, cubic: 1.0 });
        let c = amp.coefficients;
        assert_eq!((c.dispersion, c.linear, c.quadratic, c.cubic), (4.0, -0.5, 0.0, 15.0));
    }

    #[test]
    fn quadratic_contraction() {
        let spec = RDSystemSpec { q: [[0.0; 3], [1.0, 0.0, 0.0]], ..jordan_spec() };
        let amp = rd_amplitude_coeffs(&spec, 0.5, 3.0).unwrap();
        assert_eq!(amp.contractions.quadratic, 1.0);
        assert_eq!(amp.coefficients.quadratic, 6.0);
    }

    #[test]
    fn structure_errors() {
        let diag = RDSystemSpec { m1: [[-1.0, 0.0], [0.0, -1.0]], ..jordan_spec() };
        assert!(matches!(jordan_basis(&diag), Err(Error::Structure(m)) if m.contains("diagonalisable")));
        let distinct = RDSystemSpec { m1: [[-1.0, 1.0], [0.0, -2.0]], ..jordan_spec() };
        assert!(matches!(jordan_basis(&distinct), Err(Error::Structure(m)) if m.contains("distinct")));
        let complex = RDSystemSpec { m1: [[-1.0, 1.0], [-1.0, -1.0]], ..jordan_spec() };
        assert!(matches!(jordan_basis(&complex), Err(Error::Structure(m)) if m.contains("complex")));
        let wrong_kc = RDSystemSpec { kc2: 2.0, ..jordan_spec() };
        assert!(matches!(jordan_basis(&wrong_kc), Err(Error::Structure(_))));
        assert!(RDSystemSpec { kc2: 0.0, ..jordan_spec() }.validate().is_err());
    }

    #[test]
    fn degenerate_cubic() {
        let spec = RDSystemSpec { c: [[1.0, 0.0, 0.0, 0.0], [0.0; 4]], ..jordan_spec() };
        assert!(matches!(rd_amplitude_coeffs(&spec, 0.1, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn conjugates_keep_invariants_and_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = she_matched();
        let reference = rd_amplitude_coeffs(&base, 0.03, 1.0).unwrap().coefficients;
        for _ in 0..50 {
            let spec = base.conjugate(random_similarity(&mut rng)).unwrap();
            let b = jordan_basis(&spec).unwrap();
            let (k, ch, d) = basis_defects(&spec, &b);
            assert!(k <= 1e-10 && ch <= 1e-10 && d <= 1e-12, "{k:e} {ch:e} {d:e}");
            assert!((b.u0[0].hypot(b.u0[1]) - 1.0).abs() < 1e-14);
            assert!(dot(b.u0, b.u1).abs() < 1e-12);
            let c = rd_amplitude_coeffs(&spec, 0.03, 1.0).unwrap().coefficients;
            for (x, y) in [(c.linear, reference.linear), (c.quadratic, reference.quadratic), (c.cubic, reference.cubic)] {
                assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn flipping_u0_flips_the_raw_quadratic_contraction_only() {
        let spec = she_matched();
        let b = jordan_basis(&spec).unwrap();
        let flipped = JordanBasis {
            u0: [-b.u0[0], -b.u0[1]],
            u1: [-b.u1[0], -b.u1[1]],
            u0_star: [-b.u0_star[0], -b.u0_star[1]],
            u1_star: [-b.u1_star[0], -b.u1_star[1]],
            ..b
        };
        let (k, kf) = (rd_contractions(&spec, &b), rd_contractions(&spec, &flipped));
        assert_eq!(kf.quadratic, -k.quadratic);
        assert_eq!((kf.linear, kf.cubic), (k.linear, k.cubic));
    }

    #[test]
    fn reduces_to_the_swift_hohenberg_hexagon() {
        let (mu, nu) = (0.03, 1.0);
        let amp = rd_amplitude_coeffs(&she_matched(), mu, nu).unwrap();
        let she = she_amplitude_coeffs(PatternKind::Hexagon, mu, nu);
        let c = amp.coefficients;
        assert_eq!((c.dispersion, c.linear, c.quadratic, c.cubic), (she.dispersion, she.linear, she.quadratic, she.cubic));
        let g = RadialGrid::new(0.0, 100.0, 501).unwrap();
        let a = rd_localised_hexagon(&she_matched(), mu, nu, g).unwrap();
        let b = crate::amplitude::homoclinic_solution(mu, nu, 15.0, g).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn localised_hexagon_errors() {
        let g = RadialGrid::new(0.0, 10.0, 11).unwrap();
        assert!(matches!(rd_localised_hexagon(&she_matched(), 1.0, 1.0, g), Err(Error::NoSolution(_))));
        assert!(matches!(rd_localised_hexagon(&she_matched(), 0.01, 0.0, g), Err(Error::NoSolution(_))));
    }

    #[test]
    fn json_round_trip() {
        let spec = she_matched();
        assert_eq!(RDSystemSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(matches!(RDSystemSpec::from_json("{\"m1\": 3}"), Err(Error::Format(_))));
    }
}
