use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use abelprop::cubic::{self, CubicOptions, DepressedCubic};
use abelprop::model;
use abelprop::reduction::CubicData;
use abelprop::scalar::parse_decimal;
use abelprop::series::Branch;
use abelprop::solution::{self, ResidualReport, SeriesSolution, SolveOptions, ValidateOptions};
use abelprop::Scalar;
use num_rational::BigRational;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::{
    table, Command, CommonArgs, RootsArgs, EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_OK, EXIT_PIPELINE,
};

pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REFERENCE_FILE: &str = "reference.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Pipeline(#[from] abelprop::Error),
    #[error("hard residual families failed: {0}")]
    HardFailure(String),
    #[error("writing {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Output { .. } => EXIT_CONFIG,
            CliError::Pipeline(_) | CliError::HardFailure(_) => EXIT_PIPELINE,
        }
    }
}

fn output_error(path: &Path, e: impl Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::Output {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

pub fn dispatch(command: &Command, rational: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Solve(args) => cmd_solve(&load(args)?, args, rational, out),
        Command::Reference(args) => cmd_reference(&load(args)?, out),
        Command::Roots(args) => cmd_roots(args, rational, out),
        Command::Validate(args) => cmd_validate(&load(args)?, args, rational, out),
        Command::Compare(args) => cmd_compare(&load(args)?, args, rational, out),
    }
}

/// Reads the config and applies command-line overrides.
pub fn load(args: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::from_path(&args.config)?;
    if let Some(order) = args.order {
        if order == 0 {
            return Err(CliError::Usage("--order must be at least 1".into()));
        }
        cfg.order = order;
    }
    if let Some(b) = &args.branch {
        cfg.branch = Branch::from_symbol(b)
            .ok_or_else(|| CliError::Usage(format!("--branch expects + or -, got {b:?}")))?;
    }
    if let Some(dir) = &args.out {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn solve_options(cfg: &ScenarioConfig, args: &CommonArgs, rational: bool) -> SolveOptions {
    SolveOptions {
        c: cfg.c,
        order: cfg.order,
        branch: cfg.branch,
        trig_fallback: args.trig,
        exact_reversion: rational,
    }
}

fn out_path(cfg: &ScenarioConfig, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| output_error(&cfg.out_dir, e))?;
    Ok(cfg.out_dir.join(name))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    table::write(path, header, rows).map_err(|e| output_error(path, e))
}

/// The uniform sample times `t0 + i·step` covering the horizon.
pub fn sample_times(cfg: &ScenarioConfig) -> Vec<f64> {
    let n = model::step_count(cfg.t0, cfg.t0 + cfg.horizon, cfg.step);
    (0..=n).map(|i| cfg.t0 + i as f64 * cfg.step).collect()
}

fn series_rows(sol: &SeriesSolution, times: &[f64]) -> (Vec<Vec<f64>>, usize) {
    let mut outside = 0;
    let rows = times
        .iter()
        .map(|&t| {
            if !sol.inside_radius(t) {
                outside += 1;
            }
            let s = sol.state_at_series_time(t - sol.t_off());
            vec![t, s.x1, s.x2, s.x3]
        })
        .collect();
    (rows, outside)
}

fn summary(sol: &SeriesSolution, out: &mut dyn Write) -> std::io::Result<()> {
    let c = &sol.constants;
    writeln!(out, "branch     {}", sol.branch.symbol())?;
    writeln!(out, "order      {}", sol.order)?;
    writeln!(out, "C          {}", c.c)?;
    writeln!(out, "G          {}", c.g)?;
    writeln!(out, "t_off      {}", c.t_off)?;
    writeln!(out, "radius     {}", sol.radius)?;
    writeln!(out, "theta      {:?}", sol.roots.theta)?;
    writeln!(out, "rho[1..3]  {:?}", &sol.rho()[..sol.order.min(3)])
}

pub fn cmd_solve(
    cfg: &ScenarioConfig,
    args: &CommonArgs,
    rational: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let sol = solution::solve_series(
        &cfg.params,
        &cfg.initial,
        cfg.t0,
        &solve_options(cfg, args, rational),
    )?;

    let coeff_rows: Vec<Vec<f64>> = (0..=sol.order)
        .map(|n| vec![n as f64, sol.x1[n], sol.x2[n], sol.x3[n]])
        .collect();
    let coeff_path = out_path(cfg, COEFFICIENTS_FILE)?;
    write_csv(&coeff_path, &["n", "x1", "x2", "x3"], &coeff_rows)?;

    let (rows, outside) = series_rows(&sol, &sample_times(cfg));
    if outside > 0 {
        log::warn!("{outside} samples lie outside the estimated convergence radius");
    }
    let traj_path = out_path(cfg, TRAJECTORY_FILE)?;
    write_csv(&traj_path, &["t", "x1", "x2", "x3"], &rows)?;

    summary(&sol, out).map_err(stdout_error)?;
    writeln!(
        out,
        "wrote {} and {} ({} samples)",
        coeff_path.display(),
        traj_path.display(),
        rows.len()
    )
    .map_err(stdout_error)?;
    Ok(EXIT_OK)
}

pub fn cmd_reference(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let traj = model::integrate_reference(
        &cfg.params,
        cfg.initial,
        cfg.t0,
        cfg.t0 + cfg.horizon,
        cfg.step,
    )?;
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|(t, s)| vec![*t, s.x1, s.x2, s.x3, s.total() - cfg.params.n])
        .collect();
    let path = out_path(cfg, REFERENCE_FILE)?;
    write_csv(&path, &["t", "x1", "x2", "x3", "drift"], &rows)?;
    writeln!(
        out,
        "wrote {} ({} samples, {}, h = {})",
        path.display(),
        rows.len(),
        traj.integrator,
        traj.step
    )
    .map_err(stdout_error)?;
    Ok(EXIT_OK)
}

fn print_depressed<T: Scalar + Display>(
    label: &str,
    cd: &CubicData<T>,
    dc: &DepressedCubic<T>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(out, "{label}D        {}", cd.d)?;
    writeln!(out, "{label}E        {}", cd.e)?;
    writeln!(out, "{label}F        {}", cd.f)?;
    writeln!(out, "{label}G        {}", cd.g)?;
    writeln!(out, "{label}H        {}", dc.h)?;
    writeln!(out, "{label}I        {}", dc.i)?;
    writeln!(out, "{label}delta1   {}", dc.delta1)
}

fn parse_quartet(text: &str) -> Result<Vec<String>, CliError> {
    let parts: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "--cubic expects D,E,F,G, got {text:?}"
        )));
    }
    Ok(parts)
}

fn exact_cubic(
    args: &RootsArgs,
    cfg: Option<&ScenarioConfig>,
) -> Result<Option<CubicData<BigRational>>, CliError> {
    if let Some(text) = &args.cubic {
        let parts = parse_quartet(text)?;
        let vals: Option<Vec<BigRational>> = parts.iter().map(|p| parse_decimal(p)).collect();
        return Ok(vals.map(|v| {
            let [d, e, f, g]: [BigRational; 4] = v.try_into().expect("four values");
            CubicData::from_coefficients(d, e, f, g)
        }));
    }
    let Some(cfg) = cfg else { return Ok(None) };
    let (Some(p), Some(x1), Some(x2), Some(c)) = (
        cfg.exact_params(),
        cfg.exact("x1_0"),
        cfg.exact("x2_0"),
        cfg.exact_c(),
    ) else {
        return Ok(None);
    };
    Ok(Some(solution::fitted_cubic(&p, &x1, &x2, c)?.0))
}

pub fn cmd_roots(args: &RootsArgs, rational: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = match &args.config {
        Some(path) => Some(ScenarioConfig::from_path(path)?),
        None => None,
    };
    let cd: CubicData = match (&args.cubic, &cfg) {
        (Some(text), _) => {
            let vals = parse_quartet(text)?
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("--cubic: bad number {s:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            CubicData::from_coefficients(vals[0], vals[1], vals[2], vals[3])
        }
        (None, Some(cfg)) => {
            solution::fitted_cubic(&cfg.params, &cfg.initial.x1, &cfg.initial.x2, cfg.c)?.0
        }
        (None, None) => return Err(CliError::Usage("roots needs --config or --cubic".into())),
    };
    let dc = cubic::depress(&cd)?;
    print_depressed("", &cd, &dc, out).map_err(stdout_error)?;
    if rational {
        match exact_cubic(args, cfg.as_ref())? {
            Some(exact) => {
                let edc = cubic::depress(&exact)?;
                print_depressed("exact.", &exact, &edc, out).map_err(stdout_error)?;
            }
            None => writeln!(out, "exact    unavailable (inputs are not plain decimals)")
                .map_err(stdout_error)?,
        }
    }
    let (_, roots) = cubic::solve_cubic(
        &cd,
        CubicOptions {
            trig_fallback: args.trig,
        },
    )?;
    let [y1, y2, y3] = roots.y;
    writeln!(out, "delta2   {}", roots.delta2).map_err(stdout_error)?;
    writeln!(out, "method   {:?}", roots.method).map_err(stdout_error)?;
    writeln!(out, "y        {y1} {y2} {y3}").map_err(stdout_error)?;
    writeln!(
        out,
        "theta    {} {} {}",
        roots.theta[0], roots.theta[1], roots.theta[2]
    )
    .map_err(stdout_error)?;
    writeln!(out, "vieta.sum      {}", y1 + y2 + y3).map_err(stdout_error)?;
    writeln!(
        out,
        "vieta.pairs    {} (H = {})",
        y1 * y2 + y1 * y3 + y2 * y3,
        dc.h
    )
    .map_err(stdout_error)?;
    writeln!(out, "vieta.product  {} (-I = {})", y1 * y2 * y3, -dc.i).map_err(stdout_error)?;
    if roots.loose {
        writeln!(out, "note     multiple root refined to the loose tolerance")
            .map_err(stdout_error)?;
    }
    Ok(EXIT_OK)
}

fn print_report(report: &ResidualReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<24} {:<10} {:>12} {:>12} {:>10}  verdict",
        "family", "class", "max", "rms", "tol"
    )?;
    for f in &report.families {
        writeln!(
            out,
            "{:<24} {:<10} {:>12.4e} {:>12.4e} {:>10.2e}  {}",
            f.name,
            format!("{:?}", f.class).to_lowercase(),
            f.max,
            f.rms,
            f.tolerance,
            if f.pass { "pass" } else { "FAIL" }
        )?;
    }
    writeln!(
        out,
        "radius {:.6e}  t_off {:.6e}  outside-radius samples {}",
        report.radius, report.t_off, report.outside_radius
    )?;
    match report.deviation_within_tenth_radius {
        Some(d) => writeln!(out, "series vs reference within radius/10: {d:.6e}"),
        None => writeln!(out, "series vs reference within radius/10: no samples"),
    }
}

pub fn run_validation(
    cfg: &ScenarioConfig,
    args: &CommonArgs,
    rational: bool,
) -> Result<ResidualReport, CliError> {
    let sol = solution::solve_series(
        &cfg.params,
        &cfg.initial,
        cfg.t0,
        &solve_options(cfg, args, rational),
    )?;
    Ok(solution::validate(
        &sol,
        &cfg.params,
        &cfg.initial,
        cfg.horizon,
        &ValidateOptions {
            tol_hard: cfg.tol_hard,
            tol_diag: cfg.tol_diag,
            step: cfg.step,
        },
    )?)
}

pub fn cmd_validate(
    cfg: &ScenarioConfig,
    args: &CommonArgs,
    rational: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let report = run_validation(cfg, args, rational)?;
    let path = out_path(cfg, REPORT_FILE)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| output_error(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| output_error(&path, e))?;
    print_report(&report, out).map_err(stdout_error)?;
    writeln!(out, "wrote {}", path.display()).map_err(stdout_error)?;
    if !report.hard_pass {
        let failed: Vec<&str> = report
            .families
            .iter()
            .filter(|f| f.class == solution::FamilyClass::Hard && !f.pass)
            .map(|f| f.name.as_str())
            .collect();
        return Err(CliError::HardFailure(failed.join(", ")));
    }
    Ok(if report.diagnostic_pass {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTIC
    })
}

pub fn cmd_compare(
    cfg: &ScenarioConfig,
    args: &CommonArgs,
    rational: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let sol = solution::solve_series(
        &cfg.params,
        &cfg.initial,
        cfg.t0,
        &solve_options(cfg, args, rational),
    )?;
    let traj = model::integrate_reference(
        &cfg.params,
        cfg.initial,
        cfg.t0,
        cfg.t0 + cfg.horizon,
        cfg.step,
    )?;
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|(t, r)| {
            let s = sol.state_at_series_time(t - sol.t_off());
            vec![*t, s.x1, s.x2, s.x3, r.x1, r.x2, r.x3, s.max_abs_diff(r)]
        })
        .collect();
    let path = out_path(cfg, COMPARE_FILE)?;
    write_csv(
        &path,
        &[
            "t",
            "x1_series",
            "x2_series",
            "x3_series",
            "x1_ref",
            "x2_ref",
            "x3_ref",
            "max_abs_dev",
        ],
        &rows,
    )?;
    let worst = rows.iter().map(|r| r[7]).fold(0.0, f64::max);
    writeln!(
        out,
        "wrote {} ({} samples, max deviation {worst:.6e})",
        path.display(),
        rows.len()
    )
    .map_err(stdout_error)?;
    Ok(EXIT_OK)
}
