//! Integer-order Bessel functions of the first kind and the order-shifting
//! differential operators `D_m f = f' + (m/r) f`.
//!
//! Evaluation uses the ascending series whenever it is free of cancellation
//! (`x² ≤ 4(|n|+1)`, so successive terms shrink from the start) and Miller's
//! backward recurrence, normalised with `J_0 + 2 Σ J_2k = 1`, everywhere else.
//! Negative orders are reduced with `J_{-n}(x) = (-1)^n J_n(x)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: i64 = 1_000_000;

/// Rescaling threshold for the backward recurrence.
const BIG: f64 = 1e250;

/// `J_n(x)` for integer `n` and `x ≥ 0`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    check_args(n, x)?;
    Ok(jn(n, x))
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`.
pub fn bessel_j_prime(n: i64, x: f64) -> Result<f64> {
    check_args(n, x)?;
    Ok(jn_prime(n, x))
}

/// `[J_0(x), J_1(x), …, J_nmax(x)]` from a single backward recurrence.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_args(nmax as i64, x)?;
    Ok(jn_sequence(nmax, x))
}

fn check_args(n: i64, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return domain(format!("Bessel argument must be finite and non-negative, got {x}"));
    }
    if n.unsigned_abs() > MAX_ORDER as u64 {
        return domain(format!("Bessel order {n} exceeds {MAX_ORDER}"));
    }
    Ok(())
}

/// Unchecked evaluation; callers guarantee `x ≥ 0` finite and `|n| ≤ MAX_ORDER`.
pub(crate) fn jn(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = jn_nonneg(m, x);
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

pub(crate) fn jn_prime(n: i64, x: f64) -> f64 {
    0.5 * (jn(n - 1, x) - jn(n + 1, x))
}

fn jn_nonneg(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x * x <= 4.0 * (n as f64 + 1.0) {
        series(n, x)
    } else {
        miller(n, x)
    }
}

/// `(x/2)^n / n!`, the leading series term.
fn leading_term(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    if n <= 1000 {
        let mut t = 1.0;
        for i in 1..=n {
            t *= h / i as f64;
        }
        t
    } else {
        let log_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
        (n as f64 * h.ln() - log_fact).exp()
    }
}

fn series(n: usize, x: f64) -> f64 {
    let lead = leading_term(n, x);
    if lead == 0.0 {
        return 0.0;
    }
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let nf = n as f64;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (nf + kf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Starting order of the backward recurrence for orders up to `n` at `x`.
fn miller_start(n: usize, x: f64) -> usize {
    let top = (n as f64).max(x);
    let start = (top + (60.0 * top).sqrt() + 20.0).ceil() as usize;
    start + start % 2
}

fn miller(n: usize, x: f64) -> f64 {
    let start = miller_start(n, x);
    let two_over_x = 2.0 / x;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        // j holds J_k (unnormalised); produce J_{k-1}.
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        let km1 = k - 1;
        if km1 == n {
            result = j;
        }
        if km1 % 2 == 0 && km1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > BIG {
            j /= BIG;
            jp1 /= BIG;
            norm /= BIG;
            result /= BIG;
        }
    }
    norm += j;
    result / norm
}

pub(crate) fn jn_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x * x <= 4.0 {
        for (n, v) in out.iter_mut().enumerate() {
            *v = series(n, x);
        }
        return out;
    }
    let start = miller_start(nmax, x);
    let two_over_x = 2.0 / x;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        let km1 = k - 1;
        if km1 <= nmax {
            out[km1] = j;
        }
        if km1 % 2 == 0 && km1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > BIG {
            j /= BIG;
            jp1 /= BIG;
            norm /= BIG;
            for v in out.iter_mut().skip(km1) {
                *v /= BIG;
            }
        }
    }
    norm += j;
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// Smallest `K ≥ r_max` beyond which `|J_k(3 r_max)|` is bounded by `tol·10⁻²`.
///
/// The scan uses the bound `|J_k(x)| ≤ (x/2)^k / k!`, starting at `k = ⌈x⌉ + 10`
/// where the decay is already super-exponential.
pub fn truncation_order(r_max: f64, tol: f64) -> i64 {
    let x = 3.0 * r_max.max(0.0);
    let target = (tol * 1e-2).ln();
    let mut k = x.ceil() as i64 + 10;
    // log of (x/2)^k / k!
    let log_bound = |k: i64| -> f64 {
        let lf: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        k as f64 * (0.5 * x).max(f64::MIN_POSITIVE).ln() - lf
    };
    let mut lb = log_bound(k);
    while lb >= target {
        k += 1;
        lb += (0.5 * x).ln() - (k as f64).ln();
    }
    k.max(r_max.ceil() as i64)
}

/// Uniform radial grid `r_min = r_0 < r_1 < … < r_{count-1} = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min < 0.0 || r_max <= r_min {
            return domain(format!("radial grid needs 0 ≤ r_min < r_max, got [{r_min}, {r_max}]"));
        }
        if count < 2 {
            return domain("radial grid needs at least two nodes");
        }
        Ok(Self { r_min, r_max, count })
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.r_max
        } else {
            self.r_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }
}

/// Complex samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return domain("radial profile contains non-finite values");
        }
        Ok(Self { grid, values, label: label.into() })
    }

    /// Real-valued profile sampled from `f` at every node.
    pub fn from_fn(grid: RadialGrid, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(|r| Complex64::new(f(r), 0.0)).collect();
        Self::new(grid, values, label)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Clamped cubic spline through the samples, evaluated at `r` (real and
    /// imaginary parts independently). Outside the grid the end values are used.
    pub fn interpolator(&self) -> ProfileInterpolator {
        ProfileInterpolator::new(self)
    }
}

/// Cubic-spline evaluator built once from a [`RadialProfile`].
#[derive(Debug, Clone)]
pub struct ProfileInterpolator {
    r0: f64,
    h: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    re2: Vec<f64>,
    im2: Vec<f64>,
}

impl ProfileInterpolator {
    fn new(p: &RadialProfile) -> Self {
        let re: Vec<f64> = p.values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = p.values.iter().map(|v| v.im).collect();
        let h = p.grid.spacing();
        let re2 = spline_second_derivatives(&re, h);
        let im2 = spline_second_derivatives(&im, h);
        Self { r0: p.grid.r_min, h, re, im, re2, im2 }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        let n = self.re.len();
        let t = ((r - self.r0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let b = t - i as f64;
        let a = 1.0 - b;
        let c = (a * a * a - a) * self.h * self.h / 6.0;
        let d = (b * b * b - b) * self.h * self.h / 6.0;
        let re = a * self.re[i] + b * self.re[i + 1] + c * self.re2[i] + d * self.re2[i + 1];
        let im = a * self.im[i] + b * self.im[i + 1] + c * self.im2[i] + d * self.im2[i + 1];
        Complex64::new(re, im)
    }
}

/// Second derivatives of the clamped cubic spline on a uniform grid, with end
/// slopes from fourth-order one-sided differences (natural ends below 5 nodes).
fn spline_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut sub = vec![1.0; n];
    let mut diag = vec![4.0; n];
    let mut sup = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        rhs[i] = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
    }
    if n >= 5 {
        let d0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
        let dn = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5])
            / (12.0 * h);
        diag[0] = 2.0;
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - d0);
        diag[n - 1] = 2.0;
        rhs[n - 1] = 6.0 / h * (dn - (y[n - 1] - y[n - 2]) / h);
    } else {
        diag[0] = 1.0;
        sup[0] = 0.0;
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
    }
    crate::linalg::solve_tridiagonal(&sub, &diag, &sup, &rhs)
}

/// `D_m f = f' + (m/r) f` evaluated node by node.
///
/// `derivative` must hold `f'` on the same grid. When the grid starts at `r = 0`
/// the term `(m/r) f` is singular there and `limit_at_origin` must supply the
/// value of `D_m f` at that node (for `f = J_n`: `0` for `|n| ≥ 2`, `m/2` for
/// `n = 1`, `-m/2` for `n = -1`; see [`bessel_operator_limit`]).
pub fn apply_bessel_operator(
    m: i64,
    profile: &RadialProfile,
    derivative: &RadialProfile,
    limit_at_origin: Option<Complex64>,
) -> Result<RadialProfile> {
    if profile.grid != derivative.grid {
        return Err(Error::GridMismatch("profile and derivative use different grids".into()));
    }
    if derivative.values.len() != profile.values.len() {
        return Err(Error::GridMismatch("profile and derivative lengths differ".into()));
    }
    let mf = m as f64;
    let mut out = Vec::with_capacity(profile.values.len());
    for (i, (f, df)) in profile.values.iter().zip(&derivative.values).enumerate() {
        let r = profile.grid.node(i);
        if r == 0.0 {
            match (m, limit_at_origin) {
                (0, _) => out.push(*df),
                (_, Some(l)) => out.push(l),
                (_, None) => {
                    return Err(Error::MissingLimit(format!(
                        "D_{m} needs the value at r = 0 for profile '{}'",
                        profile.label
                    )))
                }
            }
        } else {
            out.push(df + f * (mf / r));
        }
    }
    RadialProfile::new(profile.grid, out, format!("D_{m}[{}]", profile.label))
}

/// Value of `D_m J_n` at `r = 0`, i.e. `J_n'(0) + lim (m/r) J_n(r)`.
///
/// Finite for every `n ≠ 0`; for `n = 0` the limit exists only when `m = 0`.
pub fn bessel_operator_limit(m: i64, n: i64) -> Result<f64> {
    let mf = m as f64;
    match n {
        0 if m == 0 => Ok(0.0),
        0 => domain(format!("D_{m} J_0 is singular at r = 0")),
        1 => Ok(0.5 + 0.5 * mf),
        -1 => Ok(-0.5 - 0.5 * mf),
        _ => Ok(0.0),
    }
}

/// `J_n` and its analytic derivative sampled on `grid`.
pub fn bessel_profiles(n: i64, grid: RadialGrid) -> (RadialProfile, RadialProfile) {
    let f = RadialProfile::from_fn(grid, format!("J_{n}"), |r| jn(n, r)).expect("finite samples");
    let df = RadialProfile::from_fn(grid, format!("J_{n}'"), |r| jn_prime(n, r)).expect("finite samples");
    (f, df)
}
