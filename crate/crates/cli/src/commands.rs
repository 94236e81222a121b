//! The subcommands. Each writes its artifacts into the output directory and
//! prints a short human-readable summary on stdout.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use radamp::amplitude::{
    bifurcation_sweep, closed_form_fn, maxwell_point, she_amplitude_coeffs, solve_steady_bvp, stripe_nu_threshold,
    stripe_sech_solution, AmplitudeCoefficients, Branch, HalfLineBVPConfig, Provenance,
};
use radamp::bessel::RadialProfile;
use radamp::identities::{
    identity_catalogue, verify_lattice, IdentityId, PatternKind, ProductForm, ROTATION_SAMPLES, STANDARD_MAX_ORDER,
    STANDARD_RADII,
};
use radamp::io::{fmt_num, profile_table, read_field, sweep_table, to_json_string, write_atomic, write_field, Table};
use radamp::pattern::{synth_cartesian_with, CartesianGrid};
use radamp::rd::{rd_amplitude_coeffs, rd_localised_hexagon, Mat2, RDSystemSpec};
use radamp::she::{
    dispersion_relation, measure_dispersion, residual_scaling, she_residual, simulate_she_with, ResidualReport,
    SHEParams, ScalingOptions, TimeScheme,
};

use crate::{CliError, Context};

type Outcome = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn out_path(ctx: &Context, name: &str) -> PathBuf {
    ctx.out.join(name)
}

fn write_json(ctx: &Context, name: &str, value: &serde_json::Value) -> Outcome {
    Ok(write_atomic(&out_path(ctx, name), to_json_string(value).as_bytes())?)
}

/// `stripe`, `hexagon`, `rhombic`, `quasipattern`, `rotated` (with `--alpha`) or `rotated@<alpha>`.
fn pattern_kind(name: Option<&str>, alpha: Option<f64>) -> Result<PatternKind, CliError> {
    let name = name.ok_or_else(|| usage("--pattern is required"))?;
    if name == "rotated" {
        let alpha = alpha.ok_or_else(|| usage("--pattern rotated needs --alpha"))?;
        let kind = PatternKind::Rotated { alpha };
        kind.validate()?;
        return Ok(kind);
    }
    Ok(name.parse::<PatternKind>()?)
}

/// `ν` for stripes, `ν̂` for the hexagonal families; each takes its own flag.
fn nu_param(kind: PatternKind, nu: Option<f64>, nu_hat: Option<f64>, default_hat: f64) -> Result<f64, CliError> {
    match kind {
        PatternKind::Stripe => match nu_hat {
            Some(_) => Err(usage("stripes take --nu (order-one quadratic coefficient), not --nu-hat")),
            None => Ok(nu.unwrap_or(2.0)),
        },
        _ => match nu {
            Some(_) => Err(usage(format!("{kind} patterns take --nu-hat (ν = εν̂), not --nu"))),
            None => Ok(nu_hat.unwrap_or(default_hat)),
        },
    }
}

fn default_nu_hat(kind: PatternKind) -> f64 {
    match kind {
        PatternKind::Hexagon | PatternKind::Rhombic => 25.0,
        _ => 35.0,
    }
}

fn check_stripe_threshold(kind: PatternKind, nu: f64) -> Outcome {
    if kind == PatternKind::Stripe && !(nu.abs() > stripe_nu_threshold()) {
        return Err(radamp::Error::NoSolution(format!(
            "localised stripes need |ν| > √(27/38) ≈ {:.6}, got ν = {nu}",
            stripe_nu_threshold()
        ))
        .into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct VerifyArgs {
    /// Restrict to the product identities of one pattern.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Rotation angles for rotated-hexagon variants (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Largest |n| checked (stride units for patterns); at least 1.
    #[arg(long)]
    pub max_order: Option<i64>,
    /// Radii checked (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Additional random radii in (0, 10], drawn from the seed.
    #[arg(long)]
    pub random: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn verify(a: VerifyArgs, ctx: &Context) -> Outcome {
    let max_order = a.max_order.unwrap_or(STANDARD_MAX_ORDER);
    if max_order < 1 {
        return Err(usage(format!("--max-order must be at least 1, got {max_order}")));
    }
    let tol = a.tol.unwrap_or(1e-9);
    let alphas = if a.alpha.is_empty() { ROTATION_SAMPLES.to_vec() } else { a.alpha.clone() };
    let ids: Vec<IdentityId> = match a.pattern.as_deref() {
        None => identity_catalogue(&alphas),
        Some("rotated") => {
            let mut ids = Vec::new();
            for &alpha in &alphas {
                let kind = PatternKind::Rotated { alpha };
                kind.validate()?;
                ids.extend(ProductForm::ALL.map(|form| IdentityId::Pattern { kind, form }));
            }
            ids
        }
        Some(name) => {
            let kind = pattern_kind(Some(name), None)?;
            ProductForm::ALL.map(|form| IdentityId::Pattern { kind, form }).to_vec()
        }
    };
    let mut radii = if a.radii.is_empty() { STANDARD_RADII.to_vec() } else { a.radii.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    for _ in 0..a.random.unwrap_or(0) {
        radii.push(10.0 * (1.0 - rng.gen::<f64>()));
    }
    let reports = verify_lattice(&ids, max_order, &radii)?;
    let mut table = Table::new(&[
        "identity", "n", "r", "k", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_error", "oracle_error",
    ]);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for r in &reports {
        let residual = r.abs_error.max(r.oracle_error());
        worst = worst.max(residual);
        if !(residual <= tol) {
            failures += 1;
        }
        table.push(vec![
            r.id.to_string(),
            r.n.to_string(),
            fmt_num(r.r),
            r.k.to_string(),
            fmt_num(r.lhs.re),
            fmt_num(r.lhs.im),
            fmt_num(r.rhs.re),
            fmt_num(r.rhs.im),
            fmt_num(r.abs_error),
            fmt_num(r.oracle_error()),
        ]);
    }
    table.write(&out_path(ctx, "identities.csv"))?;
    println!("{} checks over {} identities, worst residual {worst:.3e} (tolerance {tol:e})", reports.len(), ids.len());
    if failures > 0 {
        return Err(CliError::Validation(format!("{failures} identity checks exceed {tol:e}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct AmplitudeArgs {
    #[arg(long)]
    pub pattern: Option<String>,
    /// Rotation angle for `--pattern rotated`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu_hat: Option<f64>,
    /// Quadratic coefficient ν (stripes).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Scaled quadratic coefficient ν̂ (hexagonal families).
    #[arg(long)]
    pub nu_hat: Option<f64>,
    /// Closed-form bifurcation sweep `lo:hi:steps`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Radial nodes of the profile.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Also solve the steady boundary-value problem and compare.
    #[arg(long)]
    pub bvp: bool,
    /// Sign branch of the stripe envelope: positive or negative.
    #[arg(long)]
    pub branch: Option<String>,
}

fn parse_sweep(s: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || usage(format!("--sweep expects lo:hi:steps, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if steps == 0 || !(hi >= lo) {
        return Err(bad());
    }
    Ok((lo, hi, steps))
}

pub fn amplitude(a: AmplitudeArgs, ctx: &Context) -> Outcome {
    let kind = pattern_kind(a.pattern.as_deref(), a.alpha)?;
    let nu = nu_param(kind, a.nu, a.nu_hat, 1.0)?;
    check_stripe_threshold(kind, nu)?;
    if a.mu_hat.is_none() && a.sweep.is_none() {
        return Err(usage("give --mu-hat, --sweep or both"));
    }
    let branch = match a.branch.as_deref() {
        None | Some("positive") => Branch::Positive,
        Some("negative") => Branch::Negative,
        Some(b) => return Err(usage(format!("--branch must be positive or negative, got '{b}'"))),
    };
    let template = she_amplitude_coeffs(kind, a.mu_hat.unwrap_or(1.0), nu);
    let (_, nu_hat, cubic_a) = template.normal_form();
    let mu_maxwell = if kind == PatternKind::Stripe { None } else { Some(maxwell_point(cubic_a, nu_hat)?) };
    let mut summary = json!({
        "pattern": kind.to_string(),
        "nu": nu,
        "mu_maxwell": mu_maxwell,
        "nu_threshold": if kind == PatternKind::Stripe { Some(stripe_nu_threshold()) } else { None },
    });
    if let Some(mu_hat) = a.mu_hat {
        let coeffs = AmplitudeCoefficients { linear: mu_hat, ..template };
        let cfg = HalfLineBVPConfig::for_coeffs(&coeffs, a.nodes.unwrap_or(4001))?;
        let grid = cfg.grid()?;
        let profile = match kind {
            PatternKind::Stripe => stripe_sech_solution(mu_hat, nu, grid, branch)?,
            _ => {
                let f = closed_form_fn(&coeffs)?;
                RadialProfile::from_fn(grid, "homoclinic envelope", f)?
            }
        };
        profile_table(&profile).write(&out_path(ctx, "profile.csv"))?;
        let row = &bifurcation_sweep(&coeffs, mu_hat, mu_hat, 1)[0];
        summary["mu_hat"] = json!(mu_hat);
        summary["coefficients"] = serde_json::to_value(coeffs).expect("coefficients serialise");
        summary["max_amplitude"] = json!(row.max_amplitude);
        summary["width"] = json!(row.width);
        if a.bvp {
            let sol = solve_steady_bvp(&coeffs, &cfg)?;
            let sup = sol
                .profile
                .values
                .iter()
                .zip(&profile.values)
                .fold(0.0_f64, |m, (x, y)| m.max((x.re - y.re.abs()).abs()));
            profile_table(&sol.profile).write(&out_path(ctx, "bvp_profile.csv"))?;
            summary["bvp"] = json!({"iterations": sol.iterations, "residual": sol.residual, "sup_error": sup, "trivial": sol.trivial});
            println!("boundary-value solve: {} Newton steps, sup-error vs closed form {sup:.3e}", sol.iterations);
        }
        println!("{kind}: μ̂ = {mu_hat}, max A = {:?}", row.max_amplitude);
    }
    if let Some(s) = &a.sweep {
        let (lo, hi, steps) = parse_sweep(s)?;
        let rows = bifurcation_sweep(&template, lo, hi, steps);
        sweep_table(&rows).write(&out_path(ctx, "sweep.csv"))?;
        let present = rows.iter().filter(|r| r.max_amplitude.is_some()).count();
        println!("sweep: {steps} rows, {present} with a localised solution");
    }
    if let Some(m) = mu_maxwell {
        println!("Maxwell point μ̂_M = {m}");
    }
    write_json(ctx, "summary.json", &summary)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SynthArgs {
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Default 25 (9 for stripes).
    #[arg(long)]
    pub mu_hat: Option<f64>,
    /// Stripes only; default 2.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Hexagonal families only; default 25 (35 for twelve-fold patterns).
    #[arg(long)]
    pub nu_hat: Option<f64>,
    /// `off` gives off-centre hexagons (the rhombic synthesis).
    #[arg(long)]
    pub centre: Option<String>,
    /// Points per side at spacing π/4 (default: large enough for the envelope to decay).
    #[arg(long)]
    pub points: Option<usize>,
    /// Also write field.csv with columns x, y, u.
    #[arg(long)]
    pub csv: bool,
    /// Name of the binary (default field.bin); the sidecar takes the same stem.
    #[arg(long)]
    pub output: Option<String>,
}

pub fn synth(a: SynthArgs, ctx: &Context) -> Outcome {
    let mut kind = pattern_kind(a.pattern.as_deref(), a.alpha)?;
    let eps = a.epsilon.ok_or_else(|| usage("--epsilon is required"))?;
    match a.centre.as_deref() {
        None | Some("on") => {}
        Some("off") if kind == PatternKind::Hexagon => kind = PatternKind::Rhombic,
        Some("off") => return Err(usage("--centre off applies to hexagons only")),
        Some(c) => return Err(usage(format!("--centre must be on or off, got '{c}'"))),
    }
    let mu_hat = a.mu_hat.unwrap_or(if kind == PatternKind::Stripe { 9.0 } else { 25.0 });
    let nu = nu_param(kind, a.nu, a.nu_hat, default_nu_hat(kind))?;
    check_stripe_threshold(kind, nu)?;
    let grid = match a.points {
        Some(n) => CartesianGrid::with_quarter_pi_spacing(n)?,
        None => CartesianGrid::default_for(eps, mu_hat)?,
    };
    let coeffs = she_amplitude_coeffs(kind, mu_hat, nu);
    let envelope = closed_form_fn(&coeffs)?;
    let params = SHEParams::for_pattern(kind, eps, mu_hat, nu);
    let mut field = synth_cartesian_with(kind, &envelope, eps, grid)?;
    field.mu = params.mu;
    field.nu = params.nu;
    let name = a.output.unwrap_or_else(|| "field.bin".into());
    write_field(&out_path(ctx, &name), &field)?;
    if a.csv {
        radamp::io::field_table(&field).write(&out_path(ctx, "field.csv"))?;
    }
    println!(
        "{kind}: {}² grid, half-width {:.6}, max |u| = {:.6e}, boundary max = {:.3e}",
        grid.points_per_side,
        grid.extent,
        field.max_abs(),
        field.boundary_max()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ValidateArgs {
    /// Residual of a field file written by `synth` or `simulate`.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// ε-scaling study of the leading-order ansatz for this pattern.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// ε values of the scaling study (comma separated; default 0.1,0.05,0.025).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub mu_hat: Option<f64>,
    /// μ for field residuals (default: the value in the sidecar).
    #[arg(long)]
    pub mu: Option<f64>,
    /// ν for field residuals and stripe studies.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub nu_hat: Option<f64>,
    /// Fixed points per side for the scaling study.
    #[arg(long)]
    pub points: Option<usize>,
    /// Include the first-order stripe correction.
    #[arg(long)]
    pub correction: bool,
    /// Growth-rate check `k=<k>,mu=<mu>`; repeatable.
    #[arg(long)]
    pub dispersion: Vec<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

fn parse_dispersion(s: &str) -> Result<(f64, f64), CliError> {
    let (mut k, mut mu) = (None, 0.0);
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| usage(format!("bad --dispersion item '{part}'")))?;
        let v: f64 = value.trim().parse().map_err(|_| usage(format!("bad number in --dispersion: '{value}'")))?;
        match key.trim() {
            "k" => k = Some(v),
            "mu" => mu = v,
            other => return Err(usage(format!("unknown --dispersion key '{other}'"))),
        }
    }
    Ok((k.ok_or_else(|| usage("--dispersion needs k=<wavenumber>"))?, mu))
}

const RESIDUAL_HEADER: [&str; 8] = ["source", "epsilon", "mu", "nu", "l_inf", "l2", "boundary_max", "contaminated"];

/// Appends report rows to residuals.csv, keeping earlier rows with the same header.
fn append_residuals(ctx: &Context, rows: &[(String, Option<f64>, &ResidualReport)]) -> Outcome {
    let path = out_path(ctx, "residuals.csv");
    let mut text = match fs::read_to_string(&path) {
        Ok(t) if t.lines().next() == Some(RESIDUAL_HEADER.join(",").as_str()) => t,
        Ok(_) => return Err(CliError::Format(format!("{} has an unexpected header", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Table::new(&RESIDUAL_HEADER).to_csv(),
        Err(e) => return Err(CliError::Io(format!("{}: {e}", path.display()))),
    };
    for (source, eps, r) in rows {
        let cells = [
            source.clone(),
            eps.map(fmt_num).unwrap_or_default(),
            fmt_num(r.params.mu),
            fmt_num(r.params.nu),
            fmt_num(r.l_inf),
            fmt_num(r.l2),
            fmt_num(r.boundary_max),
            r.contaminated.to_string(),
        ];
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    Ok(write_atomic(&path, text.as_bytes())?)
}

pub fn validate(a: ValidateArgs, ctx: &Context) -> Outcome {
    if a.field.is_none() && a.pattern.is_none() && a.dispersion.is_empty() {
        return Err(usage("give --field, --pattern or --dispersion"));
    }
    let mut failures = Vec::new();
    if !a.dispersion.is_empty() {
        let (dt, t_end) = (a.dt.unwrap_or(0.01), a.t_end.unwrap_or(2.0));
        let mut results = Vec::new();
        for item in &a.dispersion {
            let (k, mu) = parse_dispersion(item)?;
            let m = measure_dispersion(k, &SHEParams::new(mu, 0.0), dt, t_end)?;
            let predicted = dispersion_relation(k, mu);
            let abs_err = (m.measured - predicted).abs();
            let pass = if predicted.abs() < 1e-2 { abs_err <= 1e-4 } else { abs_err <= 0.01 * predicted.abs() };
            println!("σ({k}) with μ = {mu}: measured {:.10}, predicted {predicted:.10}", m.measured);
            if !pass {
                failures.push(format!("dispersion at k = {k}, μ = {mu}"));
            }
            results.push(json!({"k": k, "mu": mu, "measured": m.measured, "predicted": predicted,
                                "abs_error": abs_err, "fit_deviation": m.fit_deviation, "pass": pass}));
        }
        write_json(ctx, "dispersion.json", &json!(results))?;
    }
    if let Some(path) = &a.field {
        let field = read_field(path)?;
        let params = SHEParams::new(a.mu.unwrap_or(field.mu), a.nu.unwrap_or(field.nu));
        let report = she_residual(&field, &params);
        if report.contaminated {
            eprintln!("radamp: warning: boundary residual {:.3e} exceeds 1e-8 of the peak; the periodic extension is contaminated", report.boundary_max);
        }
        println!("residual of {}: max {:.6e}, L2 {:.6e}", path.display(), report.l_inf, report.l2);
        let eps = (field.epsilon > 0.0).then_some(field.epsilon);
        append_residuals(ctx, &[(path.display().to_string(), eps, &report)])?;
    }
    if a.pattern.is_some() {
        let kind = pattern_kind(a.pattern.as_deref(), a.alpha)?;
        let nu = nu_param(kind, a.nu, a.nu_hat, default_nu_hat(kind))?;
        check_stripe_threshold(kind, nu)?;
        let mu_hat = a.mu_hat.unwrap_or(if kind == PatternKind::Stripe { 9.0 } else { 25.0 });
        let eps = if a.eps.is_empty() { vec![0.1, 0.05, 0.025] } else { a.eps.clone() };
        if a.correction && kind != PatternKind::Stripe {
            return Err(usage("--correction applies to stripes only"));
        }
        let opts = ScalingOptions { points_per_side: a.points, stripe_correction: a.correction };
        let fit = residual_scaling(kind, mu_hat, nu, &eps, opts)?;
        let window = if kind == PatternKind::Stripe && !a.correction { (1.5, 2.5) } else { (2.5, 3.5) };
        let pass = fit.slope >= window.0 && fit.slope <= window.1;
        let label = format!("{kind}{}", if a.correction { "+correction" } else { "" });
        let rows: Vec<_> = fit.epsilons.iter().zip(&fit.reports).map(|(e, r)| (label.clone(), Some(*e), r)).collect();
        append_residuals(ctx, &rows)?;
        write_json(
            ctx,
            "scaling.json",
            &json!({"pattern": kind.to_string(), "correction": a.correction, "mu_hat": mu_hat, "nu": nu,
                    "epsilons": fit.epsilons, "l_inf": fit.reports.iter().map(|r| r.l_inf).collect::<Vec<_>>(),
                    "slope": fit.slope, "window": [window.0, window.1], "pass": pass}),
        )?;
        println!("{label}: residual slope {:.4} (expected in [{}, {}])", fit.slope, window.0, window.1);
        if !pass {
            failures.push(format!("slope {:.4} outside [{}, {}]", fit.slope, window.0, window.1));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failures.join("; ")))
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SimulateArgs {
    /// Initial field (binary with JSON sidecar).
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Time step (default 0.05).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// μ (default: the value in the sidecar).
    #[arg(long)]
    pub mu: Option<f64>,
    /// ν (default: the value in the sidecar).
    #[arg(long)]
    pub nu: Option<f64>,
    /// imex (default) or etd1.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Name of the output binary (default simulated.bin).
    #[arg(long)]
    pub output: Option<String>,
}

pub fn simulate(a: SimulateArgs, ctx: &Context) -> Outcome {
    let path = a.field.as_deref().ok_or_else(|| usage("--field is required"))?;
    let t_end = a.t_end.ok_or_else(|| usage("--t-end is required"))?;
    let dt = a.dt.unwrap_or(0.05);
    let scheme = match a.scheme.as_deref() {
        None | Some("imex") => TimeScheme::Imex,
        Some("etd1") => TimeScheme::Etd1,
        Some(s) => return Err(usage(format!("--scheme must be imex or etd1, got '{s}'"))),
    };
    let field = read_field(path)?;
    let params = SHEParams::new(a.mu.unwrap_or(field.mu), a.nu.unwrap_or(field.nu));
    let out = simulate_she_with(&field, &params, dt, t_end, scheme)?;
    let name = a.output.unwrap_or_else(|| "simulated.bin".into());
    write_field(&out_path(ctx, &name), &out)?;
    let change = out.sup_diff(&field)?;
    let drift = if t_end > 0.0 { change / t_end } else { 0.0 };
    write_json(
        ctx,
        "simulate.json",
        &json!({"dt": dt, "t_end": t_end, "scheme": scheme, "mu": params.mu, "nu": params.nu,
                "max_abs_initial": field.max_abs(), "max_abs_final": out.max_abs(), "drift_rate": drift}),
    )?;
    println!("t = {t_end}: max |u| {:.6e} → {:.6e}, drift rate {drift:.3e}", field.max_abs(), out.max_abs());
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RdArgs {
    /// JSON system description (keys m1, m2, q, c, kc2, nu).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Default 1.
    #[arg(long)]
    pub mu_hat: Option<f64>,
    /// Default: the `nu` entry of the system description.
    #[arg(long)]
    pub nu_hat: Option<f64>,
    /// Write the localised hexagon envelope to profile.csv.
    #[arg(long)]
    pub emit_profile: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of random changes of basis to check coefficient invariance on.
    #[arg(long)]
    pub conjugates: Option<usize>,
}

fn random_similarity(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let mut s: Mat2 = [[0.0; 2]; 2];
        for v in s.iter_mut().flatten() {
            *v = rng.gen_range(-2.0..2.0);
        }
        if (s[0][0] * s[1][1] - s[0][1] * s[1][0]).abs() > 0.2 {
            return s;
        }
    }
}

fn read_spec(path: &Path) -> Result<RDSystemSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match RDSystemSpec::from_json(&text) {
        Err(radamp::Error::Format(m)) => Err(CliError::Format(format!("{}: {m}", path.display()))),
        other => Ok(other?),
    }
}

pub fn rd(a: RdArgs, ctx: &Context) -> Outcome {
    let path = a.spec.as_deref().ok_or_else(|| usage("--spec is required"))?;
    let spec = read_spec(path)?;
    let mu_hat = a.mu_hat.unwrap_or(1.0);
    let nu_hat = a.nu_hat.unwrap_or(spec.nu);
    let amp = rd_amplitude_coeffs(&spec, mu_hat, nu_hat)?;
    let (mh, nh, cubic_a) = amp.coefficients.normal_form();
    let mu_maxwell = if cubic_a > 0.0 { Some(maxwell_point(cubic_a, nh)?) } else { None };
    let mut doc = json!({
        "mu_hat": mu_hat,
        "nu_hat": nu_hat,
        "basis": amp.basis,
        "contractions": amp.contractions,
        "scale": amp.scale,
        "coefficients": amp.coefficients,
        "normal_form": {"mu_hat": mh, "nu_hat": nh, "a": cubic_a},
        "mu_maxwell": mu_maxwell,
    });
    let mut failure = None;
    if let Some(count) = a.conjugates.filter(|&c| c > 0) {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let c0 = amp.coefficients;
        let mut worst = 0.0_f64;
        for _ in 0..count {
            let c = rd_amplitude_coeffs(&spec.conjugate(random_similarity(&mut rng))?, mu_hat, nu_hat)?.coefficients;
            worst = worst.max((c.linear - c0.linear).abs()).max((c.quadratic - c0.quadratic).abs()).max((c.cubic - c0.cubic).abs());
        }
        let pass = worst <= 1e-9;
        doc["conjugate_check"] = json!({"count": count, "seed": ctx.seed, "max_deviation": worst, "pass": pass});
        println!("{count} random changes of basis: largest coefficient deviation {worst:.3e}");
        if !pass {
            failure = Some(format!("coefficients change by {worst:e} under a change of basis"));
        }
    }
    let c = amp.coefficients;
    debug_assert_eq!(c.provenance, Provenance::RdSystem);
    println!("amplitude equation: 0 = {}A'' − ({})A + ({})Ā² + ({})|A|²A", c.dispersion, c.linear, c.quadratic, c.cubic);
    write_json(ctx, "coefficients.json", &doc)?;
    if a.emit_profile {
        let cfg = HalfLineBVPConfig::for_coeffs(&c, a.nodes.unwrap_or(4001))?;
        let profile = rd_localised_hexagon(&spec, mu_hat, nu_hat, cfg.grid()?)?;
        profile_table(&profile).write(&out_path(ctx, "profile.csv"))?;
    }
    match failure {
        Some(m) => Err(CliError::Validation(m)),
        None => Ok(()),
    }
}
