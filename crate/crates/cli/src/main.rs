use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use meanfield::bubbles::{
    blowdown_series, dyadic_deltas, exp_integral, exp_integral_quadrature, gradient_energy,
    gradient_energy_quadrature,
};
use meanfield::io::{fmt_f64, Table, VERSION};
use meanfield::masses::{compute_masses, mass_table, MassReport};
use meanfield::params::{
    beta_boundary, critical_lambda, critical_lambda_discrete, gamma_threshold, DiscreteMeasure, SpeciesParams,
    EIGHT_PI,
};
use meanfield::radial::{integrate, ShootingConfig, ShootingFamily};
use meanfield::reductions::{
    default_alpha_grid, deterministic_existence_scan_with, existence_table, find_deterministic_solution_with,
    lambda_curve_with, pohozaev_residual, DetOutcome, ScanOptions,
};
use meanfield::verify::{self, Ctx, Tolerances, DEFAULT_SEED};

mod svg;

#[derive(Parser)]
#[command(name = "meanfield", version, about = "Radial shooting laboratory for two-species mean field equations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Directory for output files; without it tables go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance of the radial integrator.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Seed of the generator that draws collocation radii and random parameters.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct Species {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args, Clone)]
struct Grid {
    #[arg(long, allow_hyphen_values = true)]
    alpha_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_count: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical constant of the deterministic functional.
    MtConstant {
        #[command(flatten)]
        species: Species,
        /// File of "weight intensity" lines describing a discrete measure.
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Integrate one whole-plane profile.
    Shoot {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        gamma: Option<f64>,
        /// Solve the single-exponential problem instead of the two-term one.
        #[arg(long)]
        single_exponential: bool,
    },
    /// Masses of the profiles on an α-grid.
    Masses {
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[command(flatten)]
        grid: Grid,
    },
    /// The stochastic Λ-curve α ↦ Λ_{τ,γ}(α).
    Curve {
        #[command(flatten)]
        species: Species,
        #[command(flatten)]
        grid: Grid,
        /// Also write an SVG plot (requires --out).
        #[arg(long)]
        svg: bool,
    },
    /// Solve the deterministic problem at one λ.
    DetSolve {
        #[command(flatten)]
        species: Species,
        #[arg(long)]
        lambda: f64,
    },
    /// Existence table over a λ-grid.
    DetScan {
        #[command(flatten)]
        species: Species,
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Comma-separated multiples of the critical constant.
        #[arg(long, value_delimiter = ',')]
        lambda_ratio: Vec<f64>,
    },
    /// Bubble closed forms and the blow-down series.
    BubbleCheck {
        #[command(flatten)]
        species: Species,
        /// Defaults to 1.05 times the critical constant.
        #[arg(long)]
        lambda: Option<f64>,
        /// Comma-separated δ values; defaults to 2^-5 ... 2^-12.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
    },
    /// Run the verification suite; exit status 1 if any check fails.
    Verify {
        /// Run only checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
}

/// A command-line mistake; reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let domain = matches!(
                e.downcast_ref::<meanfield::error::Error>(),
                Some(meanfield::error::Error::InvalidParameter { .. } | meanfield::error::Error::InvalidMeasure(_))
            );
            if e.is::<Usage>() || domain {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let c = cli.common;
    if !(c.rel_tol > 0.0 && c.rel_tol < 1e-2) {
        return usage(format!("--rel-tol {} must lie in (0, 1e-2)", c.rel_tol));
    }
    match cli.command {
        Command::MtConstant { species, measure } => mt_constant(&species, measure),
        Command::Shoot { alpha, gamma, single_exponential } => shoot(&c, alpha, gamma, single_exponential),
        Command::Masses { gamma, alpha, grid } => masses(&c, gamma, alpha, &grid),
        Command::Curve { species, grid, svg } => curve(&c, &species, &grid, svg),
        Command::DetSolve { species, lambda } => det_solve(&c, &species, lambda),
        Command::DetScan { species, lambda, lambda_ratio } => det_scan(&c, &species, lambda, lambda_ratio),
        Command::BubbleCheck { species, lambda, deltas } => bubble_check(&c, &species, lambda, deltas),
        Command::Verify { filter } => run_verify(&c, filter),
    }
}

fn species_params(s: &Species) -> Result<SpeciesParams> {
    match (s.tau, s.gamma) {
        (Some(t), Some(g)) => Ok(SpeciesParams::new(t, g)?),
        (Some(t), None) if t == 1.0 => Ok(SpeciesParams::standard(0.5)?),
        _ => usage("both --tau and --gamma are required"),
    }
}

fn abs_tol(c: &Common) -> f64 {
    c.rel_tol * 1e-2
}

fn family(c: &Common, params: SpeciesParams) -> ShootingFamily {
    let template = if params.is_standard() {
        ShootingConfig::single_exponential(0.0)
    } else {
        ShootingConfig::new(0.0, params.gamma())
    };
    ShootingFamily::from_template(template.tolerances(c.rel_tol, abs_tol(c)))
}

fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    hex::encode(&digest[..8])
}

/// Adds the provenance lines every CSV carries.
fn stamp(table: &mut Table, command: &str, config: &Value, c: &Common) {
    if table.meta_value("version").is_none() {
        table.push_meta("version", VERSION);
    }
    table.push_meta("command", command);
    table.push_meta("config_hash", config_hash(config));
    table.push_meta("rel_tol", fmt_f64(c.rel_tol));
    table.push_meta("abs_tol", fmt_f64(abs_tol(c)));
}

/// Writes `contents` to `<out>/<name>`, or to stdout without `--out`.
fn emit(c: &Common, name: &str, contents: &str) -> Result<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

/// Human-readable lines go to stdout when tables go to files, else stderr.
fn say(c: &Common, line: &str) {
    if c.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return usage("--alpha-count must be positive");
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if !(lo < hi) {
        return usage(format!("--alpha-min {lo} must be below --alpha-max {hi}"));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn mt_constant(species: &Species, measure: Option<PathBuf>) -> Result<ExitCode> {
    if let Some(path) = measure {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m = DiscreteMeasure::parse(&text)?;
        let k = critical_lambda_discrete(&m)?;
        println!(
            "lambda_bar = {} ({:.12} pi), branch {}",
            fmt_f64(k.value),
            k.value / std::f64::consts::PI,
            k.branch
        );
        return Ok(ExitCode::SUCCESS);
    }
    let params = species_params(species)?;
    let k = critical_lambda(params);
    let threshold = if params.is_standard() { String::from("n/a") } else { fmt_f64(gamma_threshold(params.tau())?) };
    println!(
        "lambda_bar = {} ({:.12} pi), branch {}, gamma threshold {}",
        fmt_f64(k.value),
        k.value / std::f64::consts::PI,
        k.branch,
        threshold
    );
    Ok(ExitCode::SUCCESS)
}

fn shoot(c: &Common, alpha: f64, gamma: Option<f64>, single: bool) -> Result<ExitCode> {
    let cfg = if single {
        ShootingConfig::single_exponential(alpha)
    } else {
        match gamma {
            Some(g) => ShootingConfig::new(alpha, g),
            None => return usage("--gamma is required unless --single-exponential is given"),
        }
    }
    .tolerances(c.rel_tol, abs_tol(c));
    let profile = integrate(&cfg)?;
    let config = json!({"alpha": alpha, "gamma": cfg.gamma, "single_exponential": single, "rel_tol": c.rel_tol});
    let mut t = profile.to_table();
    stamp(&mut t, "shoot", &config, c);
    emit(c, "profile.csv", &t.render())?;
    let beta = profile.beta();
    say(
        c,
        &format!(
            "alpha = {alpha}, beta = {} (converged: {}, variation {:.2e}), {} nodes to r = {:.3e}",
            fmt_f64(beta.value),
            beta.converged,
            beta.variation,
            profile.log_nodes().len(),
            profile.r_end()
        ),
    );
    Ok(ExitCode::SUCCESS)
}

fn masses(c: &Common, gamma: f64, alpha: Option<f64>, grid: &Grid) -> Result<ExitCode> {
    let alphas = match alpha {
        Some(a) => vec![a],
        None => uniform_grid(
            grid.alpha_min.unwrap_or(-40.0),
            grid.alpha_max.unwrap_or(40.0),
            grid.alpha_count.unwrap_or(17),
        )?,
    };
    use rayon::prelude::*;
    let mut reports: Vec<MassReport> = alphas
        .par_iter()
        .map(|&a| {
            let p = integrate(&ShootingConfig::new(a, gamma).tolerances(c.rel_tol, abs_tol(c)))?;
            Ok(compute_masses(&p)?)
        })
        .collect::<Result<_>>()?;
    reports.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let config = json!({"gamma": gamma, "alphas": alphas, "rel_tol": c.rel_tol});
    let mut t = mass_table(&reports);
    stamp(&mut t, "masses", &config, c);
    emit(c, "masses.csv", &t.render())?;
    let worst_flux = reports.iter().map(|r| r.flux_residual()).fold(0.0, f64::max);
    let worst_energy = reports.iter().filter_map(|r| r.energy_residual).fold(0.0, f64::max);
    say(c, &format!("{} profiles; max flux residual {worst_flux:.2e}, max energy residual {worst_energy:.2e}", reports.len()));
    Ok(ExitCode::SUCCESS)
}

fn curve(c: &Common, species: &Species, grid: &Grid, want_svg: bool) -> Result<ExitCode> {
    let params = species_params(species)?;
    if params.is_standard() {
        return usage("the Lambda-curve needs two species (tau < 1)");
    }
    if want_svg && c.out.is_none() {
        return usage("--svg requires --out");
    }
    let beta = beta_boundary(params)?;
    let alphas = if grid.alpha_min.is_none() && grid.alpha_max.is_none() && grid.alpha_count.is_none() {
        default_alpha_grid(params)?
    } else {
        uniform_grid(
            grid.alpha_min.unwrap_or(beta + 1e-3),
            grid.alpha_max.unwrap_or(beta + 40.0),
            grid.alpha_count.unwrap_or(200),
        )?
    };
    let fam = family(c, params);
    let report = lambda_curve_with(&fam, params, &alphas)?;
    let mut points = report.points.clone();
    points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));

    let mut t = Table::new(&["tau", "gamma", "alpha", "sigma", "lambda_value"]);
    for p in &points {
        t.push_f64(&[params.tau(), params.gamma(), p.alpha, p.sigma, p.lambda_value]);
    }
    let config = json!({"tau": params.tau(), "gamma": params.gamma(), "alphas": alphas, "rel_tol": c.rel_tol});
    stamp(&mut t, "curve", &config, c);
    t.push_meta("beta_boundary", fmt_f64(beta));
    emit(c, "lambda_curve.csv", &t.render())?;

    if !report.failures.is_empty() {
        say(c, &format!("{} grid points failed:", report.failures.len()));
        for (a, e) in &report.failures {
            say(c, &format!("  alpha = {a}: {e}"));
        }
    }
    match report.sup() {
        Some(s) => say(
            c,
            &format!(
                "sup Λ = {} ({:.6} pi) at alpha = {} > 8π: {}",
                fmt_f64(s.lambda_value),
                s.lambda_value / std::f64::consts::PI,
                fmt_f64(s.alpha),
                if s.lambda_value > EIGHT_PI { "YES" } else { "NO" }
            ),
        ),
        None => bail!("no grid point produced a curve value"),
    }
    if want_svg {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.alpha, p.lambda_value)).collect();
        let title = format!("Lambda curve, tau = {}, gamma = {}", params.tau(), params.gamma());
        let plot = svg::Plot {
            title: &title,
            x_label: "alpha",
            y_label: "Lambda",
            points: &pts,
            guides: &[(EIGHT_PI, "8 pi")],
        };
        emit(c, "lambda_curve.svg", &svg::render(&plot))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn det_solve(c: &Common, species: &Species, lambda: f64) -> Result<ExitCode> {
    let params = species_params(species)?;
    let fam = family(c, params);
    let out = find_deterministic_solution_with(&fam, params, lambda, &ScanOptions::default())?;
    let lbar = critical_lambda(params).value;
    match out {
        DetOutcome::Found(s) => {
            let poh = pohozaev_residual(&s.record)?;
            let col = s.record.max_collocation_residual(200, c.seed)?;
            let mut t = s.record.to_table();
            let config = json!({"tau": params.tau(), "gamma": params.gamma(), "lambda": lambda, "rel_tol": c.rel_tol, "seed": c.seed});
            stamp(&mut t, "det-solve", &config, c);
            t.push_meta("constraint_residuals", format!("{} {}", fmt_f64(s.residuals.0), fmt_f64(s.residuals.1)));
            t.push_meta("pohozaev_residual", fmt_f64(poh));
            t.push_meta("collocation_residual", fmt_f64(col));
            t.push_meta("collocation_seed", c.seed);
            t.push_meta("sign_pattern", &s.sign_pattern);
            emit(c, "det_solution.csv", &t.render())?;
            say(
                c,
                &format!(
                    "found: alpha = {}, R = {}, lambda/lambda_bar = {:.6}; constraint residuals {:.2e} {:.2e}; Pohozaev {poh:.2e}; collocation {col:.2e}; roots {}",
                    fmt_f64(s.record.alpha),
                    fmt_f64(s.record.radius),
                    lambda / lbar,
                    s.residuals.0,
                    s.residuals.1,
                    s.roots.len()
                ),
            );
        }
        DetOutcome::NotFound(n) => {
            println!(
                "not found: {} over alpha in [{}, {}]; sign pattern of h {}; min |h| = {}",
                n.reason,
                n.alpha_range.0,
                n.alpha_range.1,
                if n.sign_pattern.is_empty() { "(not evaluated)" } else { &n.sign_pattern },
                fmt_f64(n.min_abs_h)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn det_scan(c: &Common, species: &Species, lambda: Vec<f64>, ratios: Vec<f64>) -> Result<ExitCode> {
    let params = species_params(species)?;
    let lbar = critical_lambda(params).value;
    let mut grid = lambda;
    let ratios = if grid.is_empty() && ratios.is_empty() { vec![0.5, 0.9, 0.99, 1.0, 1.05] } else { ratios };
    grid.extend(ratios.iter().map(|r| r * lbar));
    if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return usage("every lambda must be positive and finite");
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let fam = family(c, params);
    let rows = deterministic_existence_scan_with(&fam, params, &grid, &ScanOptions::default())?;
    let mut t = existence_table(&rows);
    let config = json!({"tau": params.tau(), "gamma": params.gamma(), "lambdas": grid, "rel_tol": c.rel_tol});
    stamp(&mut t, "det-scan", &config, c);
    t.push_meta("lambda_bar", fmt_f64(lbar));
    emit(c, "existence.csv", &t.render())?;

    let last_found = rows.iter().filter(|r| r.found).map(|r| r.lambda).fold(f64::NEG_INFINITY, f64::max);
    let first_missing = rows.iter().filter(|r| !r.found).map(|r| r.lambda).fold(f64::INFINITY, f64::min);
    let pattern: String = rows.iter().map(|r| if r.found { 'F' } else { 'N' }).collect();
    if last_found < first_missing {
        say(
            c,
            &format!(
                "threshold bracket ({}, {}], lambda_bar = {} ; pattern {pattern}",
                fmt_f64(last_found),
                fmt_f64(first_missing),
                fmt_f64(lbar)
            ),
        );
    } else {
        say(c, &format!("found and not-found values interleave: pattern {pattern}"));
    }
    Ok(ExitCode::SUCCESS)
}

fn bubble_check(c: &Common, species: &Species, lambda: Option<f64>, deltas: Vec<f64>) -> Result<ExitCode> {
    let params = species_params(species)?;
    if params.is_standard() {
        return usage("the blow-down needs two species (tau < 1)");
    }
    let lbar = critical_lambda(params).value;
    let lambda = lambda.unwrap_or(1.05 * lbar);
    let deltas = if deltas.is_empty() { dyadic_deltas(5, 12) } else { deltas };

    let mut worst: f64 = 0.0;
    for &d in &[1.0, 0.1, 0.01] {
        worst = worst.max((gradient_energy(d)? / gradient_energy_quadrature(d)? - 1.0).abs());
        for &a in &[0.25, 0.5, 0.75, 1.0] {
            worst = worst.max((exp_integral(d, a)? / exp_integral_quadrature(d, a)? - 1.0).abs());
        }
    }
    say(c, &format!("closed forms vs quadrature: max relative gap {worst:.2e}"));

    let series = blowdown_series(params, lambda, &deltas)?;
    let config = json!({"tau": params.tau(), "gamma": params.gamma(), "lambda": lambda, "deltas": deltas});
    let mut t = series.to_table();
    stamp(&mut t, "bubble-check", &config, c);
    t.push_meta("t_gamma", fmt_f64(series.summary.t_gamma));
    emit(c, "blowdown.csv", &t.render())?;
    let summary = serde_json::to_string_pretty(&series.summary)? + "\n";
    emit(c, "blowdown.json", &summary)?;
    say(
        c,
        &format!(
            "branch {:?}, t_gamma = {}; slope fitted {:.6} vs predicted {:.6} ({:.2e}); decreasing: {}",
            series.summary.branch,
            fmt_f64(series.summary.t_gamma),
            series.summary.fitted_slope,
            series.summary.predicted_slope,
            series.slope_error(),
            series.strictly_decreasing()
        ),
    );
    Ok(ExitCode::SUCCESS)
}

fn run_verify(c: &Common, filter: Option<String>) -> Result<ExitCode> {
    let tol = Tolerances::from_env()?;
    let ctx = Ctx { tol, seed: c.seed };
    let outcomes = verify::run(&ctx, filter.as_deref());
    if outcomes.is_empty() {
        return usage(format!("no check matches {:?}", filter.unwrap_or_default()));
    }
    let mut report = String::new();
    for o in &outcomes {
        report.push_str(&o.line());
        report.push('\n');
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    report.push_str(&format!(
        "{} of {} checks passed (seed {}){}\n",
        outcomes.len() - failed.len(),
        outcomes.len(),
        c.seed,
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    ));
    print!("{report}");
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("verify.txt"), &report)?;
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
