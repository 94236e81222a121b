//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so that the PASS/FAIL summary is always
//! printed; the process exits non-zero if any criterion fails.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radamp::amplitude::{
    closed_form_fn, closed_form_profile, maxwell_point, maxwell_point_numeric, she_amplitude_coeffs, solve_steady_bvp,
    AmplitudeCoefficients, HalfLineBVPConfig, InitialGuess,
};
use radamp::bessel::{apply_bessel_operator, bessel_j, bessel_j_sequence, bessel_profiles, truncation_order, RadialGrid, RadialProfile};
use radamp::identities::{identity_catalogue, verify_lattice, PatternKind, ROTATION_SAMPLES, STANDARD_MAX_ORDER, STANDARD_RADII};
use radamp::pattern::{resum_modes, synth_cartesian_with, synth_fourier_bessel, CartesianGrid};
use radamp::rd::{basis_defects, jordan_basis, rd_amplitude_coeffs, Mat2, RDSystemSpec};
use radamp::she::{default_r_cut, measure_dispersion, resonant_projection, residual_scaling, SHEParams, ScalingOptions};
use radamp::Result;

// Tolerances, one per criterion.
const IDENTITY_TOL: f64 = 1e-9;
const IDENTITY_BUDGET: Duration = Duration::from_secs(60);
const NORMALISATION_TOL: f64 = 1e-12;
const SHIFT_TOL: f64 = 1e-8;
const MAXWELL_TOL: f64 = 1e-10;
const BVP_TOL: f64 = 1e-6;
const BVP_NODES: usize = 4000;
const BVP_BUDGET: Duration = Duration::from_secs(10);
const RESUM_EPSILON: f64 = 0.05;
const RESUM_TOL_PER_EPS: f64 = 1e-6;
const SLOPE_WINDOW: (f64, f64) = (2.5, 3.5);
/// "Increases by ≈ 1": accepted within ±0.5.
const STRIPE_GAIN_WINDOW: (f64, f64) = (0.5, 1.5);
const SCALING_BUDGET: Duration = Duration::from_secs(600);
const SOLVABILITY_RATIO: f64 = 5.0;
const DISPERSION_REL_TOL: f64 = 0.01;
const DISPERSION_ABS_TOL: f64 = 1e-4;
const RD_INVARIANCE_TOL: f64 = 1e-9;
const RD_REDUCTION_TOL: f64 = 1e-12;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Result<Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn identities() -> Result<Outcome> {
    let start = Instant::now();
    let ids = identity_catalogue(&ROTATION_SAMPLES);
    let reports = verify_lattice(&ids, STANDARD_MAX_ORDER, &STANDARD_RADII)?;
    let elapsed = start.elapsed();
    let worst = reports.iter().map(|r| r.abs_error.max(r.oracle_error())).fold(0.0, f64::max);
    let rotated = ROTATION_SAMPLES.len();
    Ok(check(
        worst <= IDENTITY_TOL && elapsed <= IDENTITY_BUDGET && !reports.is_empty(),
        format!(
            "{} identities ({rotated} rotation angles), {} checks, worst residual {worst:.2e} ≤ {IDENTITY_TOL:e}, {:.1?} ≤ {:?}",
            ids.len(),
            reports.len(),
            elapsed,
            IDENTITY_BUDGET
        ),
    ))
}

fn normalisation() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let r = 20.0 * i as f64 / 99.0;
        let order = truncation_order(r, 1e-17) as usize + 5;
        let j = bessel_j_sequence(order, r)?;
        // Σ_{i∈ℤ} J_i² = J_0² + 2 Σ_{i≥1} J_i², summed from the small end up.
        let tail: f64 = j[1..].iter().rev().map(|v| v * v).sum();
        worst = worst.max((j[0] * j[0] + 2.0 * tail - 1.0).abs());
    }
    Ok(check(worst <= NORMALISATION_TOL, format!("max |ΣJ² − 1| = {worst:.2e} ≤ {NORMALISATION_TOL:e} on 100 points of [0, 20]")))
}

fn operator_shifts() -> Result<Outcome> {
    let grid = RadialGrid::new(0.1, 50.0, 2000)?;
    let mut worst = 0.0_f64;
    for n in 0..=30_i64 {
        let (f, df) = bessel_profiles(n, grid);
        let up = apply_bessel_operator(n, &f, &df, None)?;
        let down = apply_bessel_operator(-n, &f, &df, None)?;
        for (i, r) in grid.nodes().into_iter().enumerate() {
            worst = worst.max((up.values[i].re - bessel_j(n - 1, r)?).abs());
            worst = worst.max((down.values[i].re + bessel_j(n + 1, r)?).abs());
        }
    }
    Ok(check(worst <= SHIFT_TOL, format!("max |D₊J − J₋₁|, |D₋J + J₊₁| = {worst:.2e} ≤ {SHIFT_TOL:e}, n ∈ [0, 30], r ∈ [0.1, 50]")))
}

fn maxwell_points() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for nu_hat in [0.25, 0.5, 1.0, 2.0, 3.0] {
        for (kind, expected) in [
            (PatternKind::Hexagon, 8.0 * nu_hat * nu_hat / 135.0),
            (PatternKind::Rhombic, 8.0 * nu_hat * nu_hat / 135.0),
            (PatternKind::Quasipattern, 8.0 * nu_hat * nu_hat / 297.0),
        ] {
            let (_, nh, a) = she_amplitude_coeffs(kind, 1.0, nu_hat).normal_form();
            let formula = maxwell_point(a, nh)?;
            let (numeric, _) = maxwell_point_numeric(a, nh)?;
            worst = worst.max((formula - expected).abs()).max((numeric - expected).abs());
        }
    }
    Ok(check(worst <= MAXWELL_TOL, format!("formula and phase-plane μ̂_M within {worst:.2e} ≤ {MAXWELL_TOL:e} of 8ν̂²/135, 8ν̂²/297")))
}

fn bvp_agreement() -> Result<Outcome> {
    let cases: Vec<(&str, AmplitudeCoefficients)> = std::iter::once(("stripe ν=1", she_amplitude_coeffs(PatternKind::Stripe, 1.0, 1.0)))
        .chain([0.01, 0.03, 0.058].map(|mu| ("hexagon ν̂=1", she_amplitude_coeffs(PatternKind::Hexagon, mu, 1.0))))
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, coeffs) in cases {
        let mut cfg = HalfLineBVPConfig::for_coeffs(&coeffs, BVP_NODES)?;
        let exact = closed_form_profile(&coeffs, cfg.grid()?)?;
        // Start Newton from a perturbed guess, 5% taller and 10% wider. Near the
        // Maxwell point a 20% error already falls into the basin of A ≡ 0.
        let f = closed_form_fn(&coeffs)?;
        cfg.initial_guess = InitialGuess::Profile(RadialProfile::from_fn(cfg.grid()?, "guess", |r| 1.05 * f(0.9 * r))?);
        let start = Instant::now();
        let sol = solve_steady_bvp(&coeffs, &cfg)?;
        let elapsed = start.elapsed();
        let sup = sol.profile.values.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        ok &= sup <= BVP_TOL && elapsed <= BVP_BUDGET && !sol.trivial;
        parts.push(format!("{label} μ̂={}: {sup:.1e} after {} steps in {:.2?}", coeffs.linear, sol.iterations, elapsed));
    }
    Ok(check(ok, format!("sup-error ≤ {BVP_TOL:e} on {BVP_NODES} nodes, ≤ {BVP_BUDGET:?} each — {}", parts.join("; "))))
}

fn pattern_equivalence() -> Result<Outcome> {
    let eps = RESUM_EPSILON;
    let grid = CartesianGrid::with_quarter_pi_spacing(128)?;
    let radial = RadialGrid::new(0.0, grid.max_radius() + 1.0, 4801)?;
    let modes = truncation_order(radial.r_max, 1e-10);
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, mu_hat, nu) in [
        (PatternKind::Stripe, 9.0, 2.0),
        (PatternKind::Hexagon, 25.0, 25.0),
        (PatternKind::Rhombic, 25.0, 25.0),
        (PatternKind::Quasipattern, 25.0, 35.0),
    ] {
        let coeffs = she_amplitude_coeffs(kind, mu_hat, nu);
        let envelope = closed_form_profile(&coeffs, RadialGrid::new(0.0, eps * radial.r_max, 4001)?)?;
        let set = synth_fourier_bessel(kind, &envelope, eps, modes, radial)?;
        let resummed = resum_modes(&set, 2 * modes as usize + 1, grid)?;
        let cartesian = synth_cartesian_with(kind, closed_form_fn(&coeffs)?, eps, grid)?;
        let diff = resummed.sup_diff(&cartesian)?;
        ok &= diff <= RESUM_TOL_PER_EPS * eps;
        parts.push(format!("{kind} {diff:.1e}"));
    }
    Ok(check(ok, format!("sup |resummed − Cartesian| ≤ {:e} at ε = {eps}: {}", RESUM_TOL_PER_EPS * eps, parts.join(", "))))
}

fn residual_scaling_slopes() -> Result<Outcome> {
    let start = Instant::now();
    let eps = [0.1, 0.05, 0.025];
    let square = |n| ScalingOptions { points_per_side: Some(n), stripe_correction: false };
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, mu_hat, nu_hat) in [
        (PatternKind::Hexagon, 25.0, 25.0),
        (PatternKind::Rhombic, 25.0, 25.0),
        (PatternKind::Quasipattern, 25.0, 35.0),
    ] {
        let slope = residual_scaling(kind, mu_hat, nu_hat, &eps, square(1024))?.slope;
        ok &= (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&slope);
        parts.push(format!("{kind} {slope:.3}"));
    }
    // Stripe residuals decay only algebraically towards the box edge, so the
    // stripe study needs the larger 2048² box to stay uncontaminated.
    let leading = residual_scaling(PatternKind::Stripe, 9.0, 2.0, &eps, square(2048))?.slope;
    let corrected =
        residual_scaling(PatternKind::Stripe, 9.0, 2.0, &eps, ScalingOptions { stripe_correction: true, ..square(2048) })?.slope;
    let gain = corrected - leading;
    ok &= (STRIPE_GAIN_WINDOW.0..=STRIPE_GAIN_WINDOW.1).contains(&gain);
    let elapsed = start.elapsed();
    ok &= elapsed <= SCALING_BUDGET;
    parts.push(format!("stripe {leading:.3} → {corrected:.3} with correction (gain {gain:.2})"));
    Ok(check(
        ok,
        format!(
            "slopes in [{}, {}], stripe gain in [{}, {}], {:.1?} ≤ {:?}: {}",
            SLOPE_WINDOW.0,
            SLOPE_WINDOW.1,
            STRIPE_GAIN_WINDOW.0,
            STRIPE_GAIN_WINDOW.1,
            elapsed,
            SCALING_BUDGET,
            parts.join(", ")
        ),
    ))
}

fn solvability() -> Result<Outcome> {
    let (eps, mu_hat, nu_hat) = (0.05, 4.0, 10.0);
    let kind = PatternKind::Hexagon;
    let grid = CartesianGrid::with_quarter_pi_spacing(1024)?;
    let params = SHEParams::hexagon(eps, mu_hat, nu_hat);
    let envelope = closed_form_fn(&she_amplitude_coeffs(kind, mu_hat, nu_hat))?;
    let modes = [0, 6];
    let project = |scale: f64| -> Result<Vec<f64>> {
        let field = synth_cartesian_with(kind, |r| scale * envelope(r), eps, grid)?;
        Ok(resonant_projection(&field, &params, &modes, default_r_cut(grid))?.into_iter().map(|(_, c)| c.norm()).collect())
    };
    let correct = project(1.0)?;
    let scaled = project(1.2)?;
    let ratios: Vec<f64> = scaled.iter().zip(&correct).map(|(s, c)| s / c).collect();
    let ok = ratios.iter().all(|&q| q >= SOLVABILITY_RATIO);
    let detail = modes.iter().zip(&ratios).map(|(n, q)| format!("n = {n}: {q:.1}")).collect::<Vec<_>>().join(", ");
    Ok(check(ok, format!("hexagon ε = {eps}, scaled/correct projection ≥ {SOLVABILITY_RATIO}: {detail}")))
}

fn dispersion() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, mu) in [(1.0, 0.0), (1.0, 0.1), (SQRT_2, 0.0)] {
        let m = measure_dispersion(k, &SHEParams::new(mu, 0.0), 0.01, 2.0)?;
        let predicted = -(1.0 - k * k).powi(2) - mu;
        let err = (m.measured - predicted).abs();
        let pass = if predicted == 0.0 { err <= DISPERSION_ABS_TOL } else { err <= DISPERSION_REL_TOL * predicted.abs() };
        ok &= pass;
        parts.push(format!("σ({k:.4}, μ={mu}) = {:.6} vs {predicted:.6}", m.measured));
    }
    Ok(check(ok, format!("within {DISPERSION_REL_TOL} relative ({DISPERSION_ABS_TOL:e} absolute at the marginal point): {}", parts.join(", "))))
}

fn random_similarity(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let s: Mat2 = [[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]];
        if (s[0][0] * s[1][1] - s[0][1] * s[1][0]).abs() > 0.2 {
            return s;
        }
    }
}

fn rd_pipeline() -> Result<Outcome> {
    let jordan = RDSystemSpec {
        m1: [[-1.0, 1.0], [0.0, -1.0]],
        m2: [[0.0, 0.0], [1.0, 0.0]],
        q: [[0.0; 3]; 2],
        c: [[0.0; 4], [1.0, 0.0, 0.0, 0.0]],
        kc2: 1.0,
        nu: 1.0,
    };
    // Matched to the Swift–Hohenberg hexagon problem.
    let matched = RDSystemSpec {
        m2: [[0.0, 0.0], [-1.0, 0.0]],
        q: [[0.0; 3], [1.0, 0.0, 0.0]],
        c: [[0.0; 4], [-1.0, 0.0, 0.0, 0.0]],
        ..jordan.clone()
    };
    let (mu_hat, nu_hat) = (0.03, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0_f64;
    for spec in [&jordan, &matched] {
        let base = rd_amplitude_coeffs(spec, mu_hat, nu_hat)?.coefficients;
        for _ in 0..20 {
            let conj = spec.conjugate(random_similarity(&mut rng))?;
            let (kernel, chain, duals) = basis_defects(&conj, &jordan_basis(&conj)?);
            let c = rd_amplitude_coeffs(&conj, mu_hat, nu_hat)?.coefficients;
            worst = worst
                .max((c.linear - base.linear).abs())
                .max((c.quadratic - base.quadratic).abs())
                .max((c.cubic - base.cubic).abs())
                .max((c.dispersion - base.dispersion).abs())
                .max(kernel)
                .max(chain)
                .max(duals);
        }
    }
    let rd = rd_amplitude_coeffs(&matched, mu_hat, nu_hat)?.coefficients;
    let she = she_amplitude_coeffs(PatternKind::Hexagon, mu_hat, nu_hat);
    let reduction = [
        (rd.dispersion, she.dispersion),
        (rd.linear, she.linear),
        (rd.quadratic, she.quadratic),
        (rd.cubic, she.cubic),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
    .fold(0.0, f64::max);
    Ok(check(
        worst <= RD_INVARIANCE_TOL && reduction <= RD_REDUCTION_TOL,
        format!(
            "2 × 20 random conjugates: deviation {worst:.1e} ≤ {RD_INVARIANCE_TOL:e}; matched system vs hexagon {reduction:.1e} ≤ {RD_REDUCTION_TOL:e}"
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity suite", identities),
        ("Bessel normalisation", normalisation),
        ("operator shifts", operator_shifts),
        ("Maxwell points", maxwell_points),
        ("closed form vs BVP", bvp_agreement),
        ("pattern equivalence", pattern_equivalence),
        ("residual scaling", residual_scaling_slopes),
        ("solvability discrimination", solvability),
        ("dispersion", dispersion),
        ("reaction-diffusion pipeline", rd_pipeline),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{name}]: {status} — {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
