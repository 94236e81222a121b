//! Leading-order localised planar patterns in two representations.
//!
//! With `F(x) = Σ_j w_j e^{i k_j·x}` the plane-wave content of a pattern (see
//! [`crate::identities`]) and `S = 1/|w_j|` (1 for stripes, 3 for the hexagon
//! family, 6 for the twelve-fold families), the Cartesian field
//!
//! ```text
//! u(x) = ε S (A(ε|x|) F(x) + c.c.) = 2ε A · Σ_j sgn(w_j) cos(k_j·x)   (A real)
//! ```
//!
//! has angular modes `u_n(r) = ε S c(n) i^n (A(εr) J_n(r) + Ā(εr) J_{-n}(r))`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{jn_sequence, truncation_order, ProfileInterpolator, RadialGrid, RadialProfile};
use crate::error::{domain, Error, Result};
use crate::identities::{ModeCoefficientSequence, PatternKind};

/// Origin-centred periodic square grid: `x_i = −extent + i·h`, `h = 2·extent/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub extent: f64,
    pub points_per_side: usize,
}

impl CartesianGrid {
    pub fn new(extent: f64, points_per_side: usize) -> Result<Self> {
        if !(extent > 0.0 && extent.is_finite()) {
            return domain(format!("grid half-width must be positive, got {extent}"));
        }
        if !points_per_side.is_power_of_two() || points_per_side < 4 {
            return domain(format!("points per side must be a power of two ≥ 4, got {points_per_side}"));
        }
        let g = Self { extent, points_per_side };
        if g.spacing() > FRAC_PI_4 * (1.0 + 1e-12) {
            return domain(format!("grid spacing {} exceeds π/4", g.spacing()));
        }
        Ok(g)
    }

    /// Grid with spacing exactly `π/4` and `n` points per side.
    pub fn with_quarter_pi_spacing(n: usize) -> Result<Self> {
        Self::new(n as f64 * FRAC_PI_4 / 2.0, n)
    }

    /// Smallest power-of-two grid at spacing ≤ π/4 covering the half-width
    /// `max(56/(ε√μ̂), 50π)`, where an envelope decaying like `e^{-ε√μ̂ r/2}` has
    /// fallen below `10⁻¹²`.
    pub fn default_for(epsilon: f64, mu_hat: f64) -> Result<Self> {
        let half = (56.0 / (epsilon * mu_hat.sqrt())).max(50.0 * PI);
        let n = ((2.0 * half / FRAC_PI_4).ceil() as usize).next_power_of_two();
        Self::new(half, n)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points_per_side as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.points_per_side * self.points_per_side
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest distance of a node from the origin.
    pub fn max_radius(&self) -> f64 {
        self.extent * std::f64::consts::SQRT_2
    }
}

/// Real field on a [`CartesianGrid`], stored row-major: `values[iy * N + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianField {
    pub grid: CartesianGrid,
    pub values: Vec<f64>,
    pub epsilon: f64,
    pub pattern: PatternKind,
    pub mu: f64,
    pub nu: f64,
}

impl CartesianField {
    pub fn new(grid: CartesianGrid, values: Vec<f64>, epsilon: f64, pattern: PatternKind, mu: f64, nu: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a {}² grid", values.len(), grid.points_per_side)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("field contains non-finite values");
        }
        Ok(Self { grid, values, epsilon, pattern, mu, nu })
    }

    pub fn zeros(grid: CartesianGrid, pattern: PatternKind) -> Self {
        Self { grid, values: vec![0.0; grid.len()], epsilon: 0.0, pattern, mu: 0.0, nu: 0.0 }
    }

    /// Field from a pointwise function of `(x, y)`.
    pub fn from_fn(grid: CartesianGrid, pattern: PatternKind, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let n = grid.points_per_side;
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
            let y = grid.coord(iy);
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(grid.coord(ix), y);
            }
        });
        Self { grid, values, epsilon: 0.0, pattern, mu: 0.0, nu: 0.0 }
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.points_per_side + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|u|` on the outermost ring of grid nodes.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.points_per_side;
        let mut m = 0.0_f64;
        for i in 0..n {
            for (ix, iy) in [(i, 0), (i, n - 1), (0, i), (n - 1, i)] {
                m = m.max(self.at(ix, iy).abs());
            }
        }
        m
    }

    /// Largest `|u|` at nodes farther than `radius` from the origin.
    pub fn max_outside(&self, radius: f64) -> f64 {
        let n = self.grid.points_per_side;
        let mut m = 0.0_f64;
        for iy in 0..n {
            let y = self.grid.coord(iy);
            for ix in 0..n {
                let x = self.grid.coord(ix);
                if x.hypot(y) > radius {
                    m = m.max(self.at(ix, iy).abs());
                }
            }
        }
        m
    }

    /// Sup-norm distance to another field on the same grid.
    pub fn sup_diff(&self, other: &CartesianField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// `Σ_j sgn(w_j) cos(k_j·x)`, the lattice factor of the Cartesian closed form.
pub fn lattice_factor(kind: PatternKind, x: f64, y: f64) -> f64 {
    Lattice::new(kind).eval(x, y)
}

/// Precomputed signed wavevectors of a pattern's lattice factor.
#[derive(Debug, Clone)]
pub struct Lattice {
    waves: Vec<([f64; 2], f64)>,
}

impl Lattice {
    pub fn new(kind: PatternKind) -> Self {
        let set = ModeCoefficientSequence { kind, stride: kind.stride() }.wave_set();
        let waves = set.vectors.iter().zip(&set.weights).map(|(k, w)| (*k, w.signum())).collect();
        Self { waves }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.waves.iter().map(|(k, s)| s * (k[0] * x + k[1] * y).cos()).sum()
    }
}

/// `S = 1/|w_j|`: 1 for stripes, 3 for hexagons and rhomboids, 6 otherwise.
pub fn lattice_scale(kind: PatternKind) -> f64 {
    match kind {
        PatternKind::Stripe => 1.0,
        PatternKind::Hexagon | PatternKind::Rhombic => 3.0,
        PatternKind::Quasipattern | PatternKind::Rotated { .. } => 6.0,
    }
}

/// Pointwise closed form `2ε Re[A(εr)] Σ_j sgn(w_j) cos(k_j·x)` for a real envelope.
pub fn synth_point(kind: PatternKind, envelope: &ProfileInterpolator, epsilon: f64, x: f64, y: f64) -> f64 {
    2.0 * epsilon * envelope.eval(epsilon * x.hypot(y)).re * lattice_factor(kind, x, y)
}

/// Cartesian synthesis with an envelope given as a function of `R = εr`
/// (for instance a closed form), bypassing radial interpolation.
pub fn synth_cartesian_with(
    kind: PatternKind,
    envelope: impl Fn(f64) -> f64 + Sync,
    epsilon: f64,
    grid: CartesianGrid,
) -> Result<CartesianField> {
    kind.validate()?;
    if !(epsilon > 0.0) {
        return domain(format!("ε must be positive, got {epsilon}"));
    }
    let lattice = Lattice::new(kind);
    let mut field = CartesianField::from_fn(grid, kind, |x, y| {
        2.0 * epsilon * envelope(epsilon * x.hypot(y)) * lattice.eval(x, y)
    });
    field.epsilon = epsilon;
    Ok(field)
}

fn check_envelope_reach(envelope: &RadialProfile, epsilon: f64, r_max: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return domain(format!("ε must be positive, got {epsilon}"));
    }
    if envelope.grid.r_min > 0.0 || envelope.grid.r_max < epsilon * r_max * (1.0 - 1e-12) {
        return domain(format!(
            "envelope covers R ∈ [{}, {}] but the grid needs [0, {}]",
            envelope.grid.r_min,
            envelope.grid.r_max,
            epsilon * r_max
        ));
    }
    Ok(())
}

/// Cartesian synthesis of a localised pattern with a (real) envelope `A(R)`.
pub fn synth_cartesian(kind: PatternKind, envelope: &RadialProfile, epsilon: f64, grid: CartesianGrid) -> Result<CartesianField> {
    kind.validate()?;
    check_envelope_reach(envelope, epsilon, grid.max_radius())?;
    let spline = envelope.interpolator();
    synth_cartesian_with(kind, |r| spline.eval(r).re, epsilon, grid)
}

/// Angular modes `u_n(r)`, `|n| ≤ max_mode`, of a synthesized pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfileSet {
    pub kind: PatternKind,
    pub max_mode: i64,
    pub epsilon: f64,
    pub grid: RadialGrid,
    /// Profiles for every stride multiple `n ∈ [−max_mode, max_mode]`.
    pub profiles: BTreeMap<i64, RadialProfile>,
}

impl ModeProfileSet {
    pub fn empty(kind: PatternKind, max_mode: i64, epsilon: f64, grid: RadialGrid) -> Self {
        let mut profiles = BTreeMap::new();
        let zero = vec![Complex64::new(0.0, 0.0); grid.count];
        for n in -max_mode..=max_mode {
            if n.rem_euclid(kind.stride()) == 0 {
                profiles.insert(n, RadialProfile { grid, values: zero.clone(), label: format!("u_{n}") });
            }
        }
        Self { kind, max_mode, epsilon, grid, profiles }
    }

    /// Mode `n`; off-stride modes are identically zero.
    pub fn mode(&self, n: i64) -> RadialProfile {
        match self.profiles.get(&n) {
            Some(p) => p.clone(),
            None => RadialProfile {
                grid: self.grid,
                values: vec![Complex64::new(0.0, 0.0); self.grid.count],
                label: format!("u_{n}"),
            },
        }
    }

    /// Replaces mode `n`; a non-zero off-stride or out-of-range profile is a logic error.
    pub fn set(&mut self, n: i64, profile: RadialProfile) -> Result<()> {
        if profile.grid != self.grid {
            return Err(Error::GridMismatch("mode profile on a different grid".into()));
        }
        let nonzero = profile.values.iter().any(|v| v.norm() > 0.0);
        if (n.rem_euclid(self.kind.stride()) != 0 || n.abs() > self.max_mode) && nonzero {
            return Err(Error::Logic(format!("mode {n} is not active for a {} pattern", self.kind)));
        }
        if nonzero {
            self.profiles.insert(n, profile);
        }
        Ok(())
    }
}

/// Fourier–Bessel synthesis `u_n(r) = ε S c(n) i^n (A(εr) J_n(r) + Ā(εr) J_{-n}(r))`.
pub fn synth_fourier_bessel(
    kind: PatternKind,
    envelope: &RadialProfile,
    epsilon: f64,
    max_mode: i64,
    grid: RadialGrid,
) -> Result<ModeProfileSet> {
    let seq = ModeCoefficientSequence::new(kind)?;
    check_envelope_reach(envelope, epsilon, grid.r_max)?;
    let needed = truncation_order(grid.r_max, 1e-10);
    if max_mode < needed {
        return domain(format!("max mode {max_mode} below the truncation order {needed} for r ≤ {}", grid.r_max));
    }
    let spline = envelope.interpolator();
    let scale = epsilon * lattice_scale(kind);
    let nodes = grid.nodes();
    // Bessel rows J_0..J_max at every radius, computed once.
    let rows: Vec<(Complex64, Vec<f64>)> = nodes
        .par_iter()
        .map(|&r| (spline.eval(epsilon * r), jn_sequence(max_mode as usize, r)))
        .collect();
    let mut set = ModeProfileSet::empty(kind, max_mode, epsilon, grid);
    for (&n, profile) in set.profiles.iter_mut() {
        let c = seq.coefficient(n);
        let phase = i_pow(n) * (scale * c);
        let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        for (v, (a, bessel)) in profile.values.iter_mut().zip(&rows) {
            let j_abs = bessel[n.unsigned_abs() as usize];
            // J_n and J_{-n} from |n| with the parity sign.
            let (jp, jm) = if n >= 0 { (j_abs, parity * j_abs) } else { (parity * j_abs, j_abs) };
            *v = phase * (a * jp + a.conj() * jm);
        }
    }
    Ok(set)
}

/// `i^n` for integer `n`.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Resums `Σ_n u_n(r) e^{inθ}` at every Cartesian node, interpolating each mode
/// in `r` with a cubic spline. `theta_count` is the angular resolution the modes
/// must be representable on; it has to exceed `2·max_mode`.
pub fn resum_modes(modes: &ModeProfileSet, theta_count: usize, grid: CartesianGrid) -> Result<CartesianField> {
    if theta_count as i64 <= 2 * modes.max_mode {
        return Err(Error::Logic(format!(
            "angular resolution {theta_count} aliases modes up to {}",
            modes.max_mode
        )));
    }
    if grid.max_radius() > modes.grid.r_max * (1.0 + 1e-12) {
        return domain(format!(
            "modes cover r ≤ {} but the grid reaches {}",
            modes.grid.r_max,
            grid.max_radius()
        ));
    }
    let splines: Vec<(i64, ProfileInterpolator)> = modes
        .profiles
        .iter()
        .filter(|(n, p)| **n >= 0 && p.values.iter().any(|v| v.norm() > 0.0))
        .map(|(n, p)| (*n, p.interpolator()))
        .collect();
    let mut field = CartesianField::from_fn(grid, modes.kind, |x, y| {
        let r = x.hypot(y);
        let theta = y.atan2(x);
        let mut u = 0.0;
        for (n, s) in &splines {
            let v = s.eval(r);
            if *n == 0 {
                u += v.re;
            } else {
                // u_{-n} = conj(u_n): the pair contributes 2 Re(u_n e^{inθ}).
                u += 2.0 * (v * Complex64::from_polar(1.0, *n as f64 * theta)).re;
            }
        }
        u
    });
    field.epsilon = modes.epsilon;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::stripe_sech_solution;
    use crate::amplitude::Branch;

    fn envelope(r_max: f64) -> RadialProfile {
        let g = RadialGrid::new(0.0, r_max, 4001).unwrap();
        stripe_sech_solution(1.0, 1.0, g, Branch::Positive).unwrap()
    }

    #[test]
    fn grid_rules() {
        assert!(CartesianGrid::new(10.0, 100).is_err());
        assert!(CartesianGrid::new(100.0, 64).is_err());
        let g = CartesianGrid::with_quarter_pi_spacing(64).unwrap();
        assert!((g.spacing() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(g.coord(32), 0.0);
        let d = CartesianGrid::default_for(0.1, 1.0).unwrap();
        assert!(d.extent >= 560.0 && d.spacing() <= FRAC_PI_4);
    }

    #[test]
    fn origin_values() {
        let env = envelope(20.0);
        let a0 = env.values[0].re;
        let g = CartesianGrid::with_quarter_pi_spacing(64).unwrap();
        let eps = 0.05;
        let hex = synth_cartesian(PatternKind::Hexagon, &env, eps, g).unwrap();
        assert!((hex.at(32, 32) - 6.0 * eps * a0).abs() < 1e-14);
        let rh = synth_cartesian(PatternKind::Rhombic, &env, eps, g).unwrap();
        assert!((rh.at(32, 32) + 2.0 * eps * a0).abs() < 1e-14);
        let st = synth_cartesian(PatternKind::Stripe, &env, eps, g).unwrap();
        assert!((st.at(32, 32) - 2.0 * eps * a0).abs() < 1e-14);
    }

    #[test]
    fn stripe_depends_on_x_only_without_envelope() {
        let g = CartesianGrid::with_quarter_pi_spacing(32).unwrap();
        for iy in 0..32 {
            for ix in 0..32 {
                let (x, y) = (g.coord(ix), g.coord(iy));
                assert_eq!(lattice_factor(PatternKind::Stripe, x, y), x.cos());
            }
        }
    }

    #[test]
    fn envelope_too_short_is_rejected() {
        let env = envelope(1.0);
        let g = CartesianGrid::with_quarter_pi_spacing(64).unwrap();
        assert!(matches!(synth_cartesian(PatternKind::Hexagon, &env, 0.1, g), Err(Error::Domain(_))));
    }

    #[test]
    fn off_stride_modes_are_zero_and_guarded() {
        let env = envelope(20.0);
        let rg = RadialGrid::new(0.0, 30.0, 301).unwrap();
        let mut set = synth_fourier_bessel(PatternKind::Hexagon, &env, 0.1, 160, rg).unwrap();
        assert!(set.mode(1).values.iter().all(|v| v.norm() == 0.0));
        assert!(set.mode(3).values.iter().all(|v| v.norm() == 0.0));
        assert!(set.mode(6).values.iter().any(|v| v.norm() > 0.0));
        let bad = set.mode(6);
        assert!(matches!(set.set(1, bad), Err(Error::Logic(_))));
        assert!(synth_fourier_bessel(PatternKind::Hexagon, &env, 0.1, 10, rg).is_err());
    }

    #[test]
    fn stripe_zero_mode_and_reality() {
        let env = envelope(20.0);
        let rg = RadialGrid::new(0.0, 30.0, 301).unwrap();
        let eps = 0.1;
        let set = synth_fourier_bessel(PatternKind::Stripe, &env, eps, 160, rg).unwrap();
        let s = env.interpolator();
        let u0 = set.mode(0);
        for (i, r) in rg.nodes().into_iter().enumerate() {
            let expect = 2.0 * eps * s.eval(eps * r).re * crate::bessel::jn(0, r);
            assert!((u0.values[i].re - expect).abs() < 1e-14 && u0.values[i].im.abs() < 1e-14);
        }
        for kind in [PatternKind::Stripe, PatternKind::Rhombic] {
            let set = synth_fourier_bessel(kind, &env, eps, 160, rg).unwrap();
            for n in 1..20 {
                let (p, m) = (set.mode(n), set.mode(-n));
                for (a, b) in p.values.iter().zip(&m.values) {
                    assert!((a.conj() - b).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn resummation_matches_cartesian() {
        let env = envelope(40.0);
        let eps = 0.1;
        let g = CartesianGrid::with_quarter_pi_spacing(64).unwrap();
        let rg = RadialGrid::new(0.0, g.max_radius() + 1.0, 2401).unwrap();
        for kind in [PatternKind::Stripe, PatternKind::Hexagon, PatternKind::Rhombic, PatternKind::Quasipattern] {
            let m = truncation_order(rg.r_max, 1e-10);
            let set = synth_fourier_bessel(kind, &env, eps, m, rg).unwrap();
            let a = resum_modes(&set, 2 * m as usize + 1, g).unwrap();
            let b = synth_cartesian(kind, &env, eps, g).unwrap();
            assert!(a.sup_diff(&b).unwrap() < 1e-6 * eps, "{kind}: {}", a.sup_diff(&b).unwrap());
        }
    }

    #[test]
    fn resummation_guards() {
        let rg = RadialGrid::new(0.0, 10.0, 11).unwrap();
        let set = ModeProfileSet::empty(PatternKind::Hexagon, 30, 0.1, rg);
        let g = CartesianGrid::with_quarter_pi_spacing(8).unwrap();
        assert!(matches!(resum_modes(&set, 60, g), Err(Error::Logic(_))));
        let z = resum_modes(&set, 61, g).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn lattice_symmetries() {
        let rot = |x: f64, y: f64, a: f64| (x * a.cos() - y * a.sin(), x * a.sin() + y * a.cos());
        for i in 0..200 {
            let x = (i as f64 * 0.731).sin() * 30.0;
            let y = (i as f64 * 1.117).cos() * 30.0;
            let cases = [
                (PatternKind::Hexagon, PI / 3.0),
                (PatternKind::Rhombic, PI),
                (PatternKind::Quasipattern, PI / 6.0),
            ];
            for (kind, a) in cases {
                let (u, v) = rot(x, y, a);
                assert!((lattice_factor(kind, x, y) - lattice_factor(kind, u, v)).abs() < 1e-10, "{kind}");
            }
            assert_eq!(lattice_factor(PatternKind::Stripe, x, y), lattice_factor(PatternKind::Stripe, x, y + 7.3));
        }
    }
}
