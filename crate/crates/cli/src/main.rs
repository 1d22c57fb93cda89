//! Command-line surface: reproducible runs of the table, profile,
//! shooting, analysis, and diagram machinery, emitting plot-ready CSV and
//! JSON artifacts.
//!
//! Identical invocations produce byte-identical artifacts, independent of
//! `--jobs`: the parallel fan-outs collect in input order, floats render
//! through one formatter, and nothing timestamps its output.
//!
//! Exit codes: 0 success, 1 numerical failure (a machine-readable
//! `{"error": code, "detail": text}` goes to stderr), 2 argument or
//! config errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use bubbletower::bifurcation::{
    build_singular_solution, count_lambda_crossings, kaplan_check, trace_diagram, DiagramOptions,
    SingularOptions,
};
use bubbletower::bubbles::{
    compute_phi_psi, count_intersections, detect_bubbles, oscillation_report, BubbleReport,
    OscillationRow, DEFAULT_MIN_PHI,
};
use bubbletower::csvout::{fmt_float, Table};
use bubbletower::error::{Error, ErrorCode};
use bubbletower::nonlinearity::{NonlinearitySpec, SpecParams, Variant};
use bubbletower::profiles::{Curve, Profile};
use bubbletower::recurrence::{
    compute_hat_recurrence, compute_recurrence, hat_to_csv, DEFAULT_TOL,
};
use bubbletower::solver::{shoot_first_zero, RadialSolution, SolverOptions, Termination};
use bubbletower::verify::{format_line, run_acceptance};

#[derive(Parser)]
#[command(
    name = "bubbletower",
    version,
    about = "Concentration analysis of -u'' - u'/r = lambda h(u) e^{u^p} on the unit disc",
    long_about = "Concentration analysis of the radial problem \
                  -u'' - u'/r = lambda h(u) e^{u^p}, u(0) = mu, u(1) = 0. \
                  Subcommands compute bubble recurrence tables, limit profiles, \
                  shooting trajectories, bubble/oscillation statistics, the \
                  singular comparison solution, and bifurcation diagrams, \
                  writing CSV/JSON artifacts for plotting."
)]
struct Cli {
    /// Worker threads for the diagram/verify fan-outs (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for artifacts (default: artifacts)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Which renderings to write (default: both)
    #[arg(long, global = true, value_enum)]
    format: Option<EmitFormat>,

    /// JSON config file; command-line flags take precedence over its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bubble recurrence table (delta_k, a_k, ...) for one p > 2
    Recurrence {
        /// Growth exponent p of the nonlinearity
        #[arg(long)]
        p: f64,
        /// Number of rows to compute beyond the seed
        #[arg(long)]
        k: usize,
    },
    /// Compute the p -> infinity limit table (c_hat_k, a_hat_k, ...)
    HatRecurrence {
        /// Number of rows to compute beyond the seed
        #[arg(long)]
        k: usize,
    },
    /// Dump a closed-form limit profile on the grid s = -8(1/16)8
    Profile {
        /// Which profile to dump
        #[arg(long, value_enum)]
        kind: ProfileKind,
        /// Slope exponent in (0, 2); required for --kind singular
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Scale parameter of the singular family (default: the
        /// normalization placing the profile's zero at r = a/sqrt(2))
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        /// Output path for the CSV dump; use - for stdout
        #[arg(long)]
        dump: String,
    },
    /// Shoot the scaled problem from u(0) = mu and write the trajectory
    Shoot {
        /// JSON file describing the nonlinearity
        #[arg(long)]
        spec: PathBuf,
        /// Center value u(0)
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Shoot, then detect bubbles, oscillation exponents, and optional
    /// intersection counts against comparison curves
    Analyze {
        /// JSON file describing the nonlinearity
        #[arg(long)]
        spec: PathBuf,
        /// Center value u(0)
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        /// Comma-separated comparison curves, e.g. ubeta=1.5,vl=0
        #[arg(long)]
        curves: Option<String>,
    },
    /// Build the singular comparison solution for a spec
    Singular {
        /// JSON file describing the nonlinearity
        #[arg(long)]
        spec: PathBuf,
    },
    /// Trace the bifurcation diagram mu -> lambda(mu) over a mu range
    Diagram {
        /// JSON file describing the nonlinearity
        #[arg(long)]
        spec: PathBuf,
        /// Smallest center value
        #[arg(long, allow_negative_numbers = true)]
        mu_min: f64,
        /// Largest center value
        #[arg(long, allow_negative_numbers = true)]
        mu_max: f64,
        /// Number of grid points (at least 2), uniformly spaced
        #[arg(long)]
        points: usize,
    },
    /// Run the acceptance suite twice, byte-compare the artifact trees,
    /// and print one PASS/FAIL line per criterion. The exit status says
    /// whether the suite ran to completion; the table carries the verdicts
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileKind {
    /// log(64 / (8 + r^2)^2), regular at 0, mass 4
    Z0,
    /// log(16 / (2 + r^2)^2), regular at 0, mass 4
    Tilde0,
    /// The log-singular family with slope exponent a, mass 2a
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EmitFormat {
    Csv,
    Json,
    Both,
}

impl EmitFormat {
    fn wants_csv(self) -> bool {
        matches!(self, EmitFormat::Csv | EmitFormat::Both)
    }

    fn wants_json(self) -> bool {
        matches!(self, EmitFormat::Json | EmitFormat::Both)
    }
}

/// Config file shape. Every key is optional; flags win over file values,
/// file values win over defaults. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    jobs: Option<usize>,
    out: Option<PathBuf>,
    format: Option<EmitFormat>,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    singular: SingularConfig,
    #[serde(default)]
    diagram: DiagramConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfig {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    s_start_offset: Option<f64>,
    max_steps: Option<usize>,
    dense_output: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SingularConfig {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    s_cut: Option<f64>,
    core_spacing: Option<f64>,
    max_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramConfig {
    refine_dx: Option<f64>,
    max_extra_points: Option<usize>,
    min_phi: Option<f64>,
    mu_cap_pow: Option<f64>,
    shot_budget: Option<usize>,
}

enum CliError {
    /// Malformed invocation, config, or spec file: exit 2.
    Args(String),
    /// Failure inside the numerics: exit 1 with a JSON error on stderr.
    Num(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Num(e)
    }
}

fn io_error(context: impl std::fmt::Display, e: std::io::Error) -> CliError {
    CliError::Num(Error::new(ErrorCode::Io, format!("{context}: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Args(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Num(e)) => {
            eprintln!(
                "{}",
                json!({ "error": e.code.as_str(), "detail": e.detail })
            );
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.jobs.or(file_cfg.jobs) {
        if n == 0 {
            return Err(CliError::Args("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Args(format!("worker pool: {e}")))?;
    }
    let out = cli
        .out
        .or_else(|| file_cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("artifacts"));
    let format = cli.format.or(file_cfg.format).unwrap_or(EmitFormat::Both);
    let solver_opts = solver_options(&file_cfg.solver);

    match cli.command {
        Command::Recurrence { p, k } => cmd_recurrence(&mut Emitter::new(out, format)?, p, k),
        Command::HatRecurrence { k } => cmd_hat_recurrence(&mut Emitter::new(out, format)?, k),
        Command::Profile { kind, a, b, dump } => cmd_profile(kind, a, b, &dump),
        Command::Shoot { spec, mu } => {
            cmd_shoot(&mut Emitter::new(out, format)?, &spec, mu, &solver_opts)
        }
        Command::Analyze { spec, mu, curves } => cmd_analyze(
            &mut Emitter::new(out, format)?,
            &spec,
            mu,
            curves.as_deref(),
            &solver_opts,
            file_cfg.diagram.min_phi.unwrap_or(DEFAULT_MIN_PHI),
        ),
        Command::Singular { spec } => cmd_singular(
            &mut Emitter::new(out, format)?,
            &spec,
            &singular_options(&file_cfg.singular),
        ),
        Command::Diagram {
            spec,
            mu_min,
            mu_max,
            points,
        } => cmd_diagram(
            &mut Emitter::new(out, format)?,
            &spec,
            mu_min,
            mu_max,
            points,
            diagram_options(&file_cfg, solver_opts),
            file_cfg.diagram.shot_budget.unwrap_or(20),
        ),
        Command::Verify => cmd_verify(&out),
    }
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Args(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Args(format!("config {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<NonlinearitySpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Args(format!("spec {}: {e}", path.display())))?;
    let params: SpecParams = serde_json::from_str(&text)
        .map_err(|e| CliError::Args(format!("spec {}: {e}", path.display())))?;
    NonlinearitySpec::from_params(&params).map_err(CliError::Num)
}

fn solver_options(cfg: &SolverConfig) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(v) = cfg.rel_tol {
        o.rel_tol = v;
    }
    if let Some(v) = cfg.abs_tol {
        o.abs_tol = v;
    }
    if let Some(v) = cfg.s_start_offset {
        o.s_start_offset = v;
    }
    if let Some(v) = cfg.max_steps {
        o.max_steps = v;
    }
    if let Some(v) = cfg.dense_output {
        o.dense_output = v;
    }
    o
}

fn singular_options(cfg: &SingularConfig) -> SingularOptions {
    let mut o = SingularOptions::default();
    if let Some(v) = cfg.rel_tol {
        o.rel_tol = v;
    }
    if let Some(v) = cfg.abs_tol {
        o.abs_tol = v;
    }
    if let Some(v) = cfg.s_cut {
        o.s_cut = v;
    }
    if let Some(v) = cfg.core_spacing {
        o.core_spacing = v;
    }
    if let Some(v) = cfg.max_steps {
        o.max_steps = v;
    }
    o
}

fn diagram_options(cfg: &FileConfig, solver: SolverOptions) -> DiagramOptions {
    let mut o = DiagramOptions {
        solver,
        singular: singular_options(&cfg.singular),
        ..DiagramOptions::default()
    };
    if let Some(v) = cfg.diagram.refine_dx {
        o.refine_dx = v;
    }
    if let Some(v) = cfg.diagram.max_extra_points {
        o.max_extra_points = v;
    }
    if let Some(v) = cfg.diagram.min_phi {
        o.min_phi = v;
    }
    if let Some(v) = cfg.diagram.mu_cap_pow {
        o.mu_cap_pow = v;
    }
    o
}

/// Writes artifacts into one directory, honoring the format selection and
/// remembering what it wrote for the summary line.
struct Emitter {
    dir: PathBuf,
    format: EmitFormat,
    written: Vec<String>,
}

impl Emitter {
    fn new(dir: PathBuf, format: EmitFormat) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io_error(format!("create {}", dir.display()), e))?;
        Ok(Emitter {
            dir,
            format,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| io_error(format!("write {}", path.display()), e))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    /// A tabular artifact: `name.csv` and/or `name.json`, per the format.
    fn table<C, J>(&mut self, name: &str, csv: C, rows: &J) -> Result<(), CliError>
    where
        C: FnOnce() -> String,
        J: serde::Serialize,
    {
        if self.format.wants_csv() {
            self.write(&format!("{name}.csv"), &csv())?;
        }
        if self.format.wants_json() {
            let text = to_json_pretty(rows)?;
            self.write(&format!("{name}.json"), &text)?;
        }
        Ok(())
    }

    /// A JSON-native artifact (scalar summaries, nested reports); skipped
    /// entirely under --format csv.
    fn json_report<J: serde::Serialize>(&mut self, name: &str, value: &J) -> Result<(), CliError> {
        if self.format.wants_json() {
            let text = to_json_pretty(value)?;
            self.write(&format!("{name}.json"), &text)?;
        }
        Ok(())
    }

    fn summary(&self) -> String {
        if self.written.is_empty() {
            "no artifacts (check --format)".to_string()
        } else {
            self.written.join(" ")
        }
    }
}

fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Num(Error::new(ErrorCode::Io, format!("render json: {e}"))))?;
    text.push('\n');
    Ok(text)
}

fn cmd_recurrence(emitter: &mut Emitter, p: f64, k: usize) -> Result<(), CliError> {
    let table = compute_recurrence(p, k, DEFAULT_TOL)?;
    emitter.table("recurrence", || table.to_csv(), &table.rows())?;
    let r1 = table.row(1).expect("k >= 1 is enforced by the table");
    println!(
        "recurrence: p = {p}, K = {k}, delta_1 = {}, a_1 = {}, wrote {}",
        r1.delta,
        r1.a,
        emitter.summary()
    );
    Ok(())
}

fn cmd_hat_recurrence(emitter: &mut Emitter, k: usize) -> Result<(), CliError> {
    let rows = compute_hat_recurrence(k, DEFAULT_TOL)?;
    emitter.table("hat_recurrence", || hat_to_csv(&rows), &rows)?;
    let last = rows.last().expect("table is never empty");
    println!(
        "hat-recurrence: K = {k}, a_hat_K = {}, c_hat_K = {}, wrote {}",
        last.a_hat,
        last.c_hat,
        emitter.summary()
    );
    Ok(())
}

fn cmd_profile(
    kind: ProfileKind,
    a: Option<f64>,
    b: Option<f64>,
    dump: &str,
) -> Result<(), CliError> {
    let profile = match kind {
        ProfileKind::Z0 | ProfileKind::Tilde0 => {
            if a.is_some() || b.is_some() {
                return Err(CliError::Args(
                    "--a/--b apply only to --kind singular".into(),
                ));
            }
            if matches!(kind, ProfileKind::Z0) {
                Profile::Regular0
            } else {
                Profile::Tilde0
            }
        }
        ProfileKind::Singular => {
            let a = a.ok_or_else(|| CliError::Args("--kind singular requires --a".into()))?;
            Profile::singular(a, b)?
        }
    };
    let grid: Vec<f64> = (-128..=128).map(|i| f64::from(i) / 16.0).collect();
    let csv = profile.dump_csv(&grid);
    if dump == "-" {
        print!("{csv}");
    } else {
        fs::write(dump, &csv).map_err(|e| io_error(format!("write {dump}"), e))?;
        let (r_peak, peak) = profile.phi_max();
        println!("profile: {kind:?} peak density {peak} at R = {r_peak}, wrote {dump}");
    }
    Ok(())
}

fn trajectory_json(sol: &RadialSolution, s_bar: f64) -> serde_json::Value {
    json!({
        "mu": sol.mu,
        "lambda": sol.lambda,
        "s_bar": s_bar,
        "samples": sol.len(),
        "termination": match sol.termination {
            Termination::HitZero { .. } => "hit_zero",
            Termination::ReachedBoundary => "reached_boundary",
        },
        "s": sol.s,
        "u": sol.u,
        "duds": sol.v,
        "A": sol.a,
        "M": sol.m,
        "W": sol.w,
    })
}

fn cmd_shoot(
    emitter: &mut Emitter,
    spec_path: &Path,
    mu: f64,
    opts: &SolverOptions,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let shot = shoot_first_zero(&spec, mu, opts)?;
    let sol = &shot.solution;
    emitter.table("shoot", || sol.to_csv(), &trajectory_json(sol, shot.s_bar))?;
    println!(
        "shoot: mu = {mu}, lambda(mu) = {}, s_bar = {}, {} samples, wrote {}",
        shot.lambda_of_mu,
        shot.s_bar,
        sol.len(),
        emitter.summary()
    );
    Ok(())
}

fn bubbles_csv(bubbles: &[BubbleReport]) -> String {
    let mut table = Table::new(&[
        "k",
        "s",
        "u",
        "ratio",
        "phi",
        "psi",
        "energy_pm",
        "energy_e",
        "loc_stat",
        "ratio_target",
        "phi_target",
        "energy_pm_target",
        "energy_e_target",
        "loc_target",
        "basin_lo",
        "basin_hi",
        "tower",
    ]);
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for b in bubbles {
        table.push_raw(vec![
            b.k.to_string(),
            fmt_float(b.s_k),
            fmt_float(b.u_k),
            fmt_float(b.ratio),
            fmt_float(b.phi_k),
            fmt_float(b.psi_k),
            fmt_float(b.energy_pm),
            fmt_float(b.energy_e),
            fmt_float(b.loc_stat),
            opt(b.ratio_target),
            opt(b.phi_target),
            opt(b.energy_pm_target),
            opt(b.energy_e_target),
            opt(b.loc_target),
            fmt_float(b.basin.0),
            fmt_float(b.basin.1),
            b.tower.to_string(),
        ]);
    }
    table.render()
}

fn oscillation_csv(rows: &[OscillationRow]) -> String {
    let mut table = Table::new(&[
        "k",
        "top_beta",
        "top_target",
        "valley_beta",
        "valley_target",
    ]);
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for r in rows {
        table.push_raw(vec![
            r.k.to_string(),
            fmt_float(r.top_beta),
            fmt_float(r.top_target),
            opt(r.valley_beta),
            opt(r.valley_target),
        ]);
    }
    table.render()
}

/// Parse `ubeta=<beta>` / `vl=<L>` items; the curve's p comes from the
/// spec, and V_L's power from the spec's h-family tail.
fn parse_curves(arg: &str, spec: &NonlinearitySpec) -> Result<Vec<Curve>, CliError> {
    let m = match spec.variant() {
        Variant::UnitH => 0.0,
        Variant::PowerExp { m, .. } => m,
        Variant::H4 { .. } => 1.0 - 2.0 * spec.p(),
    };
    arg.split(',')
        .map(|item| {
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| CliError::Args(format!("curve {item:?} is not name=value")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|e| CliError::Args(format!("curve {item:?}: {e}")))?;
            match key.trim() {
                "ubeta" => Curve::u_beta(val, spec.p()).map_err(CliError::Num),
                "vl" => Curve::v_l(val, spec.p(), m).map_err(CliError::Num),
                other => Err(CliError::Args(format!(
                    "unknown curve kind {other:?} (use ubeta, vl)"
                ))),
            }
        })
        .collect()
}

fn cmd_analyze(
    emitter: &mut Emitter,
    spec_path: &Path,
    mu: f64,
    curves: Option<&str>,
    opts: &SolverOptions,
    min_phi: f64,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let curves = curves.map(|arg| parse_curves(arg, &spec)).transpose()?;
    let shot = shoot_first_zero(&spec, mu, opts)?;
    let sol = shot.solution;
    let trace = compute_phi_psi(&spec, &sol)?;
    let table = if spec.p() > 2.0 {
        Some(compute_recurrence(spec.p(), 16, DEFAULT_TOL)?)
    } else {
        None
    };
    let bubbles = detect_bubbles(&spec, &sol, table.as_deref(), min_phi)?;
    let oscillation = if bubbles.is_empty() {
        Vec::new()
    } else {
        oscillation_report(&sol, &bubbles, table.as_deref())?
    };

    emitter.table(
        "phi_psi",
        || trace.to_csv(),
        &json!({ "s": trace.s, "phi": trace.phi, "psi": trace.psi }),
    )?;
    emitter.table("bubbles", || bubbles_csv(&bubbles), &bubbles)?;
    emitter.table(
        "oscillation",
        || oscillation_csv(&oscillation),
        &oscillation,
    )?;

    let mut z_note = String::new();
    if let Some(curves) = curves {
        let mut reports = Vec::with_capacity(curves.len());
        for curve in &curves {
            reports.push(count_intersections(
                &sol,
                curve,
                sol.s[0],
                *sol.s.last().unwrap(),
            )?);
        }
        z_note = format!(
            ", z = [{}]",
            reports
                .iter()
                .map(|r| r.z.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        emitter.json_report("intersections", &reports)?;
    }

    let towers = bubbles.iter().filter(|b| b.tower).count();
    println!(
        "analyze: mu = {mu}, lambda(mu) = {}, bubbles = {} ({towers} tower){z_note}, wrote {}",
        shot.lambda_of_mu,
        bubbles.len(),
        emitter.summary()
    );
    Ok(())
}

fn cmd_singular(
    emitter: &mut Emitter,
    spec_path: &Path,
    opts: &SingularOptions,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let singular = build_singular_solution(&spec, opts)?;
    if emitter.format.wants_csv() {
        emitter.write("singular.csv", &singular.to_csv())?;
    }
    emitter.json_report(
        "singular",
        &json!({
            "r_star": singular.r_star,
            "lambda_star": singular.lambda_star,
            "core_boundary": singular.core_boundary(),
            "samples": singular.s.len(),
        }),
    )?;
    println!(
        "singular: lambda_star = {}, r_star = {}, {} samples, wrote {}",
        singular.lambda_star,
        singular.r_star,
        singular.s.len(),
        emitter.summary()
    );
    Ok(())
}

fn cmd_diagram(
    emitter: &mut Emitter,
    spec_path: &Path,
    mu_min: f64,
    mu_max: f64,
    points: usize,
    opts: DiagramOptions,
    shot_budget: usize,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    if points < 2 {
        return Err(CliError::Args(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    if !(mu_min < mu_max) {
        return Err(CliError::Args(format!(
            "need --mu-min < --mu-max, got {mu_min} and {mu_max}"
        )));
    }
    let step = (mu_max - mu_min) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| mu_min + step * i as f64).collect();

    let diagram = trace_diagram(&spec, &grid, &opts)?;
    let crossings = if diagram.lambda_star.is_some() {
        Some(count_lambda_crossings(
            &spec,
            &diagram,
            &opts.solver,
            shot_budget,
        )?)
    } else {
        None
    };
    let kaplan = kaplan_check(&spec, &diagram, 1e-6)?;

    emitter.table("diagram", || diagram.to_csv(), &diagram)?;
    if let Some(crossings) = &crossings {
        emitter.json_report("crossings", crossings)?;
    }
    emitter.json_report("kaplan", &kaplan)?;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &diagram.rows {
        lo = lo.min(row.lambda);
        hi = hi.max(row.lambda);
    }
    let crossing_note = match &crossings {
        Some(c) => format!("lambda_star crossings = {}", c.count),
        None => "no singular reference for this spec".to_string(),
    };
    println!(
        "diagram: {} points ({} failed), lambda in [{lo}, {hi}], {crossing_note}, wrote {}",
        diagram.rows.len(),
        diagram.failures.len(),
        emitter.summary()
    );
    Ok(())
}

fn cmd_verify(out: &Path) -> Result<(), CliError> {
    let dir = out.join("verify");
    let results = run_acceptance(&dir)?;
    for r in &results {
        println!("{}", format_line(r));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!(
        "verify: {passed}/{} criteria passed, artifacts under {}",
        results.len(),
        dir.display()
    );
    Ok(())
}
