//! Quadratic–cubic Ginzburg–Landau amplitude equations on the half-line `R ≥ 0`:
//!
//! ```text
//! ∂_T A = d ∂²_R A − λ A + q Ā² + c |A|² A,      ∂_R A(0) = 0.
//! ```
//!
//! For Swift–Hohenberg patterns `d = 4`, `λ = μ̂`, `q = 2ν̂` and `c` is the
//! (signed) cubic coefficient of the pattern family. The module provides the
//! closed-form localised solutions, Maxwell points, a Newton solver for the
//! steady boundary-value problem, semi-implicit time stepping and bifurcation
//! sweeps of the closed forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{RadialGrid, RadialProfile};
use crate::error::{domain, Error, Result};
use crate::identities::PatternKind;
use crate::linalg::{solve_tridiagonal, BandMatrix};

/// Which construction produced a set of amplitude coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Stripe,
    HexagonFamily,
    Quasipattern,
    RdSystem,
}

/// Coefficients of `∂_T A = d A'' − λ A + q Ā² + c |A|² A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCoefficients {
    /// `d`, multiplies `∂²_R A`; always positive.
    pub dispersion: f64,
    /// `λ`, enters as `−λ A` (equal to `μ̂` for Swift–Hohenberg).
    pub linear: f64,
    /// `q`, multiplies `Ā²` (equal to `2ν̂`, zero for stripes).
    pub quadratic: f64,
    /// `c`, the signed coefficient of `|A|² A`.
    pub cubic: f64,
    pub provenance: Provenance,
}

impl AmplitudeCoefficients {
    pub fn new(dispersion: f64, linear: f64, quadratic: f64, cubic: f64, provenance: Provenance) -> Result<Self> {
        let c = Self { dispersion, linear, quadratic, cubic, provenance };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.dispersion, self.linear, self.quadratic, self.cubic];
        if all.iter().any(|v| !v.is_finite()) {
            return domain("amplitude coefficients must be finite");
        }
        if self.dispersion <= 0.0 {
            return domain(format!("dispersion must be positive, got {}", self.dispersion));
        }
        let is_stripe = self.provenance == Provenance::Stripe;
        if is_stripe != (self.quadratic == 0.0) && self.provenance != Provenance::RdSystem {
            return domain("quadratic coefficient must vanish exactly for stripes");
        }
        Ok(())
    }

    /// Steady right-hand side `d A'' − λ A + q A² + c A³` for real `A`, given `A''`.
    pub fn steady_residual(&self, a: f64, a_rr: f64) -> f64 {
        self.dispersion * a_rr - self.linear * a + self.quadratic * a * a + self.cubic * a * a * a
    }

    /// Rescales to the normal form `4A'' − μ̂A + 2ν̂A² − aA³` (dividing by `d/4`)
    /// and returns `(μ̂, ν̂, a)`. `ν̂` may be negative.
    pub fn normal_form(&self) -> (f64, f64, f64) {
        let s = 4.0 / self.dispersion;
        (s * self.linear, 0.5 * s * self.quadratic, -s * self.cubic)
    }
}

/// Coefficients of the amplitude equation for a Swift–Hohenberg pattern.
///
/// `nu` is `ν` for stripes and `ν̂` for the hexagonal families. Rotated hexagon
/// pairs behave like the quasipattern: six active wavevectors give cubic `−33`.
pub fn she_amplitude_coeffs(kind: PatternKind, mu_hat: f64, nu: f64) -> AmplitudeCoefficients {
    match kind {
        PatternKind::Stripe => AmplitudeCoefficients {
            dispersion: 4.0,
            linear: mu_hat,
            quadratic: 0.0,
            cubic: 4.0 * (19.0 * nu * nu / 18.0 - 0.75),
            provenance: Provenance::Stripe,
        },
        PatternKind::Hexagon | PatternKind::Rhombic => AmplitudeCoefficients {
            dispersion: 4.0,
            linear: mu_hat,
            quadratic: 2.0 * nu,
            cubic: -15.0,
            provenance: Provenance::HexagonFamily,
        },
        PatternKind::Quasipattern | PatternKind::Rotated { .. } => AmplitudeCoefficients {
            dispersion: 4.0,
            linear: mu_hat,
            quadratic: 2.0 * nu,
            cubic: -33.0,
            provenance: Provenance::Quasipattern,
        },
    }
}

/// Smallest `ν` for which real localised stripe envelopes exist.
pub fn stripe_nu_threshold() -> f64 {
    (27.0_f64 / 38.0).sqrt()
}

/// Sign of the `±` branch of a symmetric family of solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Branch {
    #[default]
    Positive,
    Negative,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// `A(R) = ±√(18μ̂/(38ν²−27)) sech(√μ̂ R/2)`, the localised stripe envelope.
pub fn stripe_sech_solution(mu_hat: f64, nu: f64, grid: RadialGrid, branch: Branch) -> Result<RadialProfile> {
    if !(mu_hat > 0.0) {
        return domain(format!("stripe envelope needs μ̂ > 0, got {mu_hat}"));
    }
    let denom = 38.0 * nu * nu - 27.0;
    if !(nu.abs() > stripe_nu_threshold()) {
        return Err(Error::NoSolution(format!(
            "no real steady localised stripe envelope for ν = {nu} ≤ √(27/38)"
        )));
    }
    let amp = branch.sign() * (18.0 * mu_hat / denom).sqrt();
    let k = 0.5 * mu_hat.sqrt();
    RadialProfile::from_fn(grid, "stripe sech envelope", |r| amp / (k * r).cosh())
}

/// `μ̂_M = 8ν̂² / (9a)`, where the patterned plateau and the trivial state have
/// equal energy.
pub fn maxwell_point(a: f64, nu_hat: f64) -> Result<f64> {
    if !(a > 0.0) {
        return domain(format!("Maxwell point needs a > 0, got {a}"));
    }
    Ok(8.0 * nu_hat * nu_hat / (9.0 * a))
}

/// Closed-form homoclinic of `0 = 4A'' − μ̂A + 2ν̂A² − aA³`:
///
/// `A(R) = √(2/a) μ̂ / (√μ̂_M + √(μ̂_M − μ̂) cosh(√μ̂ R / 2))`.
pub fn homoclinic_solution(mu_hat: f64, nu_hat: f64, a: f64, grid: RadialGrid) -> Result<RadialProfile> {
    let f = homoclinic_fn(mu_hat, nu_hat, a)?;
    RadialProfile::from_fn(grid, "homoclinic envelope", f)
}

fn homoclinic_fn(mu_hat: f64, nu_hat: f64, a: f64) -> Result<impl Fn(f64) -> f64> {
    if !(a > 0.0) {
        return domain(format!("homoclinic needs a > 0, got {a}"));
    }
    if !(mu_hat > 0.0) {
        return domain(format!("homoclinic needs μ̂ > 0, got {mu_hat}"));
    }
    let mm = maxwell_point(a, nu_hat)?;
    if mu_hat >= mm {
        return Err(Error::NoSolution(format!(
            "no homoclinic for μ̂ = {mu_hat} ≥ μ̂_M = {mm}"
        )));
    }
    let s = nu_hat.signum();
    let pre = s * (2.0 / a).sqrt() * mu_hat;
    let (p, q, k) = (mm.sqrt(), (mm - mu_hat).sqrt(), 0.5 * mu_hat.sqrt());
    Ok(move |r: f64| pre / (p + q * (k * r).cosh()))
}

/// Closed-form localised solution for general coefficients, when one exists:
/// the sech profile for `q = 0, c > 0` and the homoclinic for `c < 0`.
pub fn closed_form_fn(coeffs: &AmplitudeCoefficients) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    coeffs.validate()?;
    let (mu_hat, nu_hat, a) = coeffs.normal_form();
    if coeffs.quadratic == 0.0 {
        if !(coeffs.cubic > 0.0) {
            return Err(Error::NoSolution("cubic saturation without quadratic term has no localised state".into()));
        }
        if !(coeffs.linear > 0.0) {
            return domain(format!("localised states need λ > 0, got {}", coeffs.linear));
        }
        let amp = (2.0 * coeffs.linear / coeffs.cubic).sqrt();
        let k = (coeffs.linear / coeffs.dispersion).sqrt();
        return Ok(Box::new(move |r: f64| amp / (k * r).cosh()));
    }
    let f = homoclinic_fn(mu_hat, nu_hat, a)?;
    Ok(Box::new(f))
}

/// Closed-form localised profile for general coefficients (see [`closed_form_fn`]).
pub fn closed_form_profile(coeffs: &AmplitudeCoefficients, grid: RadialGrid) -> Result<RadialProfile> {
    let f = closed_form_fn(coeffs)?;
    RadialProfile::from_fn(grid, "closed-form envelope", f)
}

/// First integral of the real steady equation,
/// `E = (d/2)A'² − (λ/2)A² + (q/3)A³ + (c/4)A⁴`.
pub fn phase_plane_energy(coeffs: &AmplitudeCoefficients, a: f64, a_prime: f64) -> f64 {
    0.5 * coeffs.dispersion * a_prime * a_prime - 0.5 * coeffs.linear * a * a
        + coeffs.quadratic * a * a * a / 3.0
        + 0.25 * coeffs.cubic * a.powi(4)
}

/// Maxwell point located numerically from the phase plane: the `μ̂` at which the
/// non-trivial local maximum of the potential `E(A, 0)` touches zero.
///
/// Bisection on `μ̂`, golden-section search for the maximiser in `A`; returns
/// `(μ̂_M, A*)`.
pub fn maxwell_point_numeric(a: f64, nu_hat: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return domain(format!("Maxwell point needs a > 0, got {a}"));
    }
    let nu = nu_hat.abs();
    if nu == 0.0 {
        return Ok((0.0, 0.0));
    }
    let peak = |mu: f64| -> (f64, f64) {
        let c = AmplitudeCoefficients {
            dispersion: 4.0,
            linear: mu,
            quadratic: 2.0 * nu,
            cubic: -a,
            provenance: Provenance::HexagonFamily,
        };
        let e = |x: f64| phase_plane_energy(&c, x, 0.0);
        // The outer critical point lies in [ν/a, 2ν/a] for every μ ∈ [0, ν²/a].
        let amax = golden_max(e, nu / a, 2.0 * nu / a);
        (e(amax), amax)
    };
    let (mut lo, mut hi) = (0.0, nu * nu / a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if peak(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-17 * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    Ok((mu, peak(mu).1))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Finite-difference order of the steady solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Discretisation {
    /// Three-point stencil with ghost-node Neumann ends.
    Second,
    /// Five-point stencil with even reflection at both ends.
    #[default]
    Fourth,
}

/// Starting point of the Newton iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// Use [`closed_form_profile`] for the coefficients.
    #[default]
    ClosedForm,
    /// Interpolate the given profile onto the solver grid.
    Profile(RadialProfile),
}

/// Setup of the steady half-line boundary-value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineBVPConfig {
    pub length: f64,
    pub nodes: usize,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
    pub discretisation: Discretisation,
}

impl HalfLineBVPConfig {
    pub fn new(length: f64, nodes: usize) -> Self {
        Self {
            length,
            nodes,
            newton_tol: 1e-10,
            max_iterations: 50,
            initial_guess: InitialGuess::ClosedForm,
            discretisation: Discretisation::Fourth,
        }
    }

    /// A domain long enough that the closed-form tail has decayed below
    /// `10⁻¹²` of its peak (at least `20/√(λ/d)`).
    pub fn for_coeffs(coeffs: &AmplitudeCoefficients, nodes: usize) -> Result<Self> {
        let f = closed_form_fn(coeffs)?;
        let kappa = (coeffs.linear / coeffs.dispersion).sqrt();
        let peak = f(0.0).abs();
        let mut length = 20.0 / kappa;
        while f(length).abs() > 1e-12 * peak {
            length += 1.0 / kappa;
        }
        Ok(Self::new(length, nodes))
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(0.0, self.length, self.nodes)
    }
}

/// Outcome of [`solve_steady_bvp`].
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub profile: RadialProfile,
    pub iterations: usize,
    /// Max-norm of the discrete steady residual at the returned profile.
    pub residual: f64,
    /// Max-norm residual after every Newton step.
    pub trace: Vec<f64>,
    /// The iteration collapsed onto `A ≡ 0`.
    pub trivial: bool,
}

/// Discrete second derivative of `a` with Neumann (even) ends.
fn second_derivative(a: &[f64], h: f64, disc: Discretisation) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    let h2 = h * h;
    match disc {
        Discretisation::Second => {
            for i in 0..n {
                let l = if i == 0 { a[1] } else { a[i - 1] };
                let r = if i + 1 == n { a[n - 2] } else { a[i + 1] };
                out[i] = (l - 2.0 * a[i] + r) / h2;
            }
        }
        Discretisation::Fourth => {
            let at = |j: isize| -> f64 { a[reflect(j, n)] };
            for (i, o) in out.iter_mut().enumerate() {
                let i = i as isize;
                *o = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h2);
            }
        }
    }
    out
}

/// Even reflection of an index about both ends of `0..n`.
fn reflect(j: isize, n: usize) -> usize {
    let last = n as isize - 1;
    let k = if j < 0 {
        -j
    } else if j > last {
        2 * last - j
    } else {
        j
    };
    k as usize
}

fn stencil(disc: Discretisation) -> &'static [(isize, f64)] {
    match disc {
        Discretisation::Second => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        Discretisation::Fourth => &[
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
    }
}

/// Newton iteration for the real steady equation `d A'' − λA + qA² + cA³ = 0`
/// on `[0, L]` with `A'(0) = A'(L) = 0`.
pub fn solve_steady_bvp(coeffs: &AmplitudeCoefficients, config: &HalfLineBVPConfig) -> Result<BvpSolution> {
    coeffs.validate()?;
    if config.nodes < 5 {
        return domain("the steady solver needs at least five nodes");
    }
    let grid = config.grid()?;
    let nodes = grid.nodes();
    let h = grid.spacing();
    let n = grid.count;
    let mut a: Vec<f64> = match &config.initial_guess {
        InitialGuess::ClosedForm => {
            let f = closed_form_fn(coeffs)?;
            nodes.iter().map(|&r| f(r)).collect()
        }
        InitialGuess::Profile(p) => {
            let s = p.interpolator();
            nodes.iter().map(|&r| s.eval(r).re).collect()
        }
    };
    let residual = |a: &[f64]| -> Vec<f64> {
        let arr = second_derivative(a, h, config.discretisation);
        a.iter().zip(&arr).map(|(&u, &urr)| coeffs.steady_residual(u, urr)).collect()
    };
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let half = stencil(config.discretisation).len() / 2;
    let mut trace = Vec::new();
    let mut f = residual(&a);
    let mut norm = max_abs(&f);
    let mut iterations = 0;
    while norm > config.newton_tol {
        if iterations >= config.max_iterations || !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                message: format!("steady residual {norm:e} above {:e}", config.newton_tol),
                trace,
            });
        }
        let mut jac = BandMatrix::zeros(n, 2 * half, 2 * half);
        let dh2 = coeffs.dispersion / (h * h);
        for i in 0..n {
            for &(off, w) in stencil(config.discretisation) {
                let j = reflect(i as isize + off, n);
                jac.add(i, j, dh2 * w);
            }
            let u = a[i];
            jac.add(i, i, -coeffs.linear + 2.0 * coeffs.quadratic * u + 3.0 * coeffs.cubic * u * u);
        }
        let mut step: Vec<f64> = f.iter().map(|v| -v).collect();
        jac.solve_in_place(&mut step)?;
        for (u, s) in a.iter_mut().zip(&step) {
            *u += s;
        }
        f = residual(&a);
        norm = max_abs(&f);
        trace.push(norm);
        iterations += 1;
    }
    let peak = max_abs(&a);
    let values = a.iter().map(|&u| Complex64::new(u, 0.0)).collect();
    Ok(BvpSolution {
        profile: RadialProfile::new(grid, values, "steady amplitude")?,
        iterations,
        residual: norm,
        trace,
        trivial: peak < 1e-10,
    })
}

/// Snapshots of a time integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub profiles: Vec<RadialProfile>,
}

impl Trajectory {
    pub fn last(&self) -> &RadialProfile {
        self.profiles.last().expect("trajectory holds the initial state")
    }

    /// Max-norm change per unit time between the first and the last snapshot.
    pub fn drift_rate(&self) -> f64 {
        let (a, b) = (&self.profiles[0], self.last());
        let dt = self.times.last().unwrap() - self.times[0];
        if dt == 0.0 {
            return 0.0;
        }
        let d = a.values.iter().zip(&b.values).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()));
        d / dt
    }
}

/// Semi-implicit time stepping of the complex amplitude equation: diffusion and
/// the linear term implicit (second-order differences, Neumann at both ends),
/// the quadratic and cubic terms explicit. Records `snapshots + 1` evenly spaced
/// states including the initial one.
pub fn evolve_amplitude(
    coeffs: &AmplitudeCoefficients,
    a0: &RadialProfile,
    dt: f64,
    t_end: f64,
    snapshots: usize,
) -> Result<Trajectory> {
    coeffs.validate()?;
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return domain("time stepping needs dt > 0 and t_end ≥ 0");
    }
    if dt * coeffs.linear.abs() >= 0.5 {
        return domain(format!("dt·|λ| = {} must stay below 0.5", dt * coeffs.linear.abs()));
    }
    let grid = a0.grid;
    let n = grid.count;
    let h = grid.spacing();
    let r = coeffs.dispersion * dt / (h * h);
    let diag = vec![1.0 + 2.0 * r + dt * coeffs.linear; n];
    let mut sub = vec![-r; n];
    let mut sup = vec![-r; n];
    sup[0] = -2.0 * r;
    sub[n - 1] = -2.0 * r;
    let steps = (t_end / dt).round() as usize;
    let every = (steps / snapshots.max(1)).max(1);
    let mut a = a0.values.clone();
    let mut times = vec![0.0];
    let mut profiles = vec![a0.clone()];
    for step in 1..=steps {
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        for (i, z) in a.iter().enumerate() {
            let nl = coeffs.quadratic * z.conj() * z.conj() + coeffs.cubic * z.norm_sqr() * z;
            let rhs = z + dt * nl;
            re[i] = rhs.re;
            im[i] = rhs.im;
        }
        let re = solve_tridiagonal(&sub, &diag, &sup, &re);
        let im = solve_tridiagonal(&sub, &diag, &sup, &im);
        let mut peak = 0.0_f64;
        for (i, z) in a.iter_mut().enumerate() {
            *z = Complex64::new(re[i], im[i]);
            peak = peak.max(z.norm());
        }
        let t = step as f64 * dt;
        if !(peak <= 1e6) {
            return Err(Error::BlowUp { time: t, max_abs: peak });
        }
        if step % every == 0 || step == steps {
            times.push(t);
            profiles.push(RadialProfile::new(grid, a.clone(), format!("A(T = {t})"))?);
        }
    }
    Ok(Trajectory { times, profiles })
}

/// One row of a bifurcation sweep; `None` where the closed form does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub mu_hat: f64,
    pub max_amplitude: Option<f64>,
    /// Radius out to which `A` exceeds half of the reference level: the plateau
    /// `4ν̂/(3a)` for quadratic–cubic families, the peak for stripes.
    pub width: Option<f64>,
}

/// Evaluates the closed-form family at `steps` evenly spaced `μ̂` in `[lo, hi]`.
/// `template` supplies every coefficient except `linear`.
pub fn bifurcation_sweep(template: &AmplitudeCoefficients, lo: f64, hi: f64, steps: usize) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let mu_hat = if steps == 1 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 };
        let coeffs = AmplitudeCoefficients { linear: mu_hat, ..*template };
        let row = match closed_form_fn(&coeffs) {
            Ok(f) => {
                let peak = f(0.0).abs();
                let level = if coeffs.quadratic == 0.0 {
                    0.5 * peak
                } else {
                    let (_, nu_hat, a) = coeffs.normal_form();
                    0.5 * 4.0 * nu_hat.abs() / (3.0 * a)
                };
                SweepRow { mu_hat, max_amplitude: Some(peak), width: Some(level_crossing(&*f, level, peak)) }
            }
            Err(_) => SweepRow { mu_hat, max_amplitude: None, width: None },
        };
        rows.push(row);
    }
    rows
}

/// Radius where the monotonically decaying `|f|` falls to `level` (0 if never above).
fn level_crossing(f: &dyn Fn(f64) -> f64, level: f64, peak: f64) -> f64 {
    if peak <= level {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi).abs() > level {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).abs() > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
