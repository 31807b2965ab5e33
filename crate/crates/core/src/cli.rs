//! Batch front-end: `zoo`, `scan`, `deform` and `verify`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 deformation budget exhausted, 5 verification failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::defect::DefectReport;
use crate::deformation::{
    default_schedule, global_pipeline, AuditRecord, LevelSummary, LocalParams, MetricDescriptor, PipelineConfig,
    PipelineStatus,
};
use crate::error::GeoError;
use crate::manifold::{zoo, ModelDescriptor};
use crate::scanner::{certificate_from_samples, scan, write_csv, CertificateOutcome};
use crate::verify::{run_suite, VerifyOptions, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "geodefect", version, about = "Partially geodesic plane detection and breaking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the model zoo.
    Zoo(ZooArgs),
    /// Scan sampled planes for their partial-geodesy defect.
    Scan(ScanArgs),
    /// Run the deformation pipeline until no sampled plane is partially geodesic.
    Deform(DeformArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Zoo model name.
    #[arg(long, conflicts_with = "model_file", required_unless_present = "model_file")]
    pub model: Option<String>,
    /// Model descriptor or deformed-metric JSON file.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Model parameter, value parsed as JSON when possible.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub model_seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Plane dimension.
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Grid points per chart axis.
    #[arg(long, default_value_t = 2)]
    pub grid: usize,
    #[arg(long, default_value_t = 6)]
    pub planes_per_point: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hemisphere grid density of the defect search.
    #[arg(long)]
    pub density: Option<usize>,
    /// Partially-geodesic threshold.
    #[arg(long)]
    pub tol_pg: Option<f64>,
    /// Curvature pair-symmetry tolerance.
    #[arg(long)]
    pub tol_sym: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Print the summary JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Certificate threshold; the partially-geodesic threshold by default.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "K", default_value_t = 10.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Radius of the ball where the cutoff is one.
    #[arg(long, default_value_t = 0.15)]
    pub rho: f64,
    /// Width of the cutoff transition shell.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Comma-separated amplitudes; `2^-10,…,2^-20` by default.
    #[arg(long, value_name = "S1,S2,...")]
    pub s_schedule: Option<String>,
    /// Derivative order of the distance proxy.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Budget for the distance proxy.
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    #[arg(long, default_value_t = 256)]
    pub max_steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// Negate every curvature tensor.
    FlipSign,
    /// Compare against central differences with step 0.1.
    CoarseFd,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub fd_step: f64,
    #[arg(long)]
    pub tol_pg: Option<f64>,
    #[arg(long)]
    pub tol_sym: Option<f64>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Resolved configuration written next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<MetricDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planes_per_point: Option<usize>,
    pub seed: u64,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub tol_pg: Option<f64>,
    pub tol_sym: Option<f64>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct ScanSummary {
    pub l: usize,
    pub samples: usize,
    pub tau_pg: f64,
    pub min_defect: f64,
    pub argmin: DefectReport,
    pub certificate: CertificateOutcome,
}

#[derive(Debug, Serialize)]
pub struct DeformSummary {
    pub status: PipelineStatus,
    pub steps: usize,
    pub xi: f64,
    pub cq_proxy: f64,
    pub levels: Vec<LevelSummary>,
    /// Smallest sampled defect at the requested `l`.
    pub final_min_defect: f64,
}

/// Writes a line to stdout, ignoring a closed pipe.
fn say(line: impl std::fmt::Display) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn config_error(msg: impl Into<String>) -> GeoError {
    GeoError::InvalidParameter(msg.into())
}

impl ModelArgs {
    pub fn descriptor(&self) -> Result<MetricDescriptor, GeoError> {
        if let Some(path) = &self.model_file {
            return MetricDescriptor::load(path);
        }
        let name = self.model.as_deref().ok_or_else(|| config_error("either --model or --model-file is required"))?;
        let mut desc = ModelDescriptor::new(name, self.n).with_seed(self.model_seed);
        for p in &self.params {
            let (key, raw) = p
                .split_once('=')
                .ok_or_else(|| config_error(format!("--param expects KEY=VALUE, got `{p}`")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::from(raw));
            desc = desc.with_param(key, value);
        }
        Ok(MetricDescriptor::plain(desc))
    }
}

pub fn parse_schedule(text: &str) -> Result<Vec<f64>, GeoError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| config_error(format!("bad amplitude `{t}`"))))
        .collect()
}

impl DeformArgs {
    pub fn pipeline_config(&self) -> Result<PipelineConfig, GeoError> {
        let schedule = match &self.s_schedule {
            Some(t) => parse_schedule(t)?,
            None => default_schedule(),
        };
        let local = LocalParams {
            k: self.k,
            eps: self.eps,
            rho: self.rho,
            pad: self.eta,
            schedule,
            seed: self.grid.seed,
            ..LocalParams::default()
        };
        if !(self.k > 1.0) || !(self.eps > 0.0) {
            return Err(config_error("K must exceed 1 and eps must be positive"));
        }
        Ok(PipelineConfig {
            grid_per_axis: self.grid.grid,
            planes_per_point: self.grid.planes_per_point,
            seed: self.grid.seed,
            local,
            xi: self.xi,
            q: self.q,
            max_steps: self.max_steps,
            tau_pg: self.grid.tol_pg,
            sym_tol: self.grid.tol_sym,
            density: self.grid.density,
            ..PipelineConfig::default()
        })
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), GeoError> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn prepare(out: &OutputArgs) -> Result<(), GeoError> {
    fs::create_dir_all(&out.out_dir)?;
    Ok(())
}

fn emit<T: Serialize>(out: &OutputArgs, summary: &T) -> Result<(), GeoError> {
    if out.json {
        say(serde_json::to_string_pretty(summary)?);
    }
    Ok(())
}

pub fn cmd_zoo(args: &ZooArgs) -> Result<i32, GeoError> {
    let entries = zoo();
    if args.json {
        say(serde_json::to_string_pretty(&entries)?);
        return Ok(EXIT_OK);
    }
    for e in &entries {
        say(format_args!("{}{}: {}", e.name, if e.seeded { " (seeded)" } else { "" }, e.description));
        for p in &e.params {
            say(format_args!("    {} = {}  {}", p.name, p.default, p.doc));
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_scan(args: &ScanArgs) -> Result<i32, GeoError> {
    let desc = args.model.descriptor()?;
    let field = desc.build()?;
    let config = PipelineConfig {
        grid_per_axis: args.grid.grid,
        planes_per_point: args.grid.planes_per_point,
        seed: args.grid.seed,
        tau_pg: args.grid.tol_pg,
        sym_tol: args.grid.tol_sym,
        density: args.grid.density,
        ..PipelineConfig::default()
    };
    let grid = config.grid(&field, args.grid.l)?;
    prepare(&args.output)?;
    write_json(&args.output.out_dir, "run_config.json", &RunConfig {
        command: "scan",
        model: Some(desc),
        l: Some(args.grid.l),
        grid: Some(args.grid.grid),
        planes_per_point: Some(args.grid.planes_per_point),
        seed: args.grid.seed,
        k: None,
        eps: None,
        rho: None,
        eta: None,
        s_schedule: None,
        q: None,
        xi: None,
        tol_pg: args.grid.tol_pg,
        tol_sym: args.grid.tol_sym,
        out_dir: args.output.out_dir.clone(),
    })?;
    let samples = scan(&field, &grid)?;
    let tau = config.tau(&field);
    let certificate = certificate_from_samples(&grid, &samples, args.threshold.unwrap_or(tau))?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &samples)?;
    fs::write(args.output.out_dir.join("scan.csv"), csv)?;
    let summary = ScanSummary {
        l: grid.l,
        samples: samples.len(),
        tau_pg: tau,
        min_defect: samples[0].report.defect,
        argmin: samples[0].report.clone(),
        certificate,
    };
    write_json(&args.output.out_dir, "summary.json", &summary)?;
    emit(&args.output, &summary)?;
    Ok(EXIT_OK)
}

pub fn cmd_deform(args: &DeformArgs) -> Result<i32, GeoError> {
    let desc = args.model.descriptor()?;
    let config = args.pipeline_config()?;
    config.validate()?;
    let field = desc.build()?;
    prepare(&args.output)?;
    write_json(&args.output.out_dir, "run_config.json", &RunConfig {
        command: "deform",
        model: Some(desc.clone()),
        l: Some(args.grid.l),
        grid: Some(args.grid.grid),
        planes_per_point: Some(args.grid.planes_per_point),
        seed: args.grid.seed,
        k: Some(args.k),
        eps: Some(args.eps),
        rho: Some(args.rho),
        eta: Some(args.eta),
        s_schedule: Some(config.local.schedule.clone()),
        q: Some(args.q),
        xi: Some(args.xi),
        tol_pg: args.grid.tol_pg,
        tol_sym: args.grid.tol_sym,
        out_dir: args.output.out_dir.clone(),
    })?;
    let out = global_pipeline(&field, args.grid.l, &config)?;
    let mut deformations = desc.deformations.clone();
    deformations.extend(out.deformations.iter().cloned());
    let final_metric = MetricDescriptor {
        base: desc.base.clone(),
        deformations,
    };
    let audit: &[AuditRecord] = &out.audit;
    write_json(&args.output.out_dir, "audit.json", &audit)?;
    write_json(&args.output.out_dir, "metric.json", &final_metric)?;
    let final_min_defect = out
        .levels
        .iter()
        .find(|lv| lv.l == args.grid.l)
        .map(|lv| lv.min_defect)
        .unwrap_or(f64::NAN);
    let summary = DeformSummary {
        status: out.status,
        steps: out.audit.len(),
        xi: config.xi,
        cq_proxy: out.cq_proxy,
        levels: out.levels,
        final_min_defect,
    };
    write_json(&args.output.out_dir, "summary.json", &summary)?;
    emit(&args.output, &summary)?;
    Ok(match out.status {
        PipelineStatus::Cleared => EXIT_OK,
        PipelineStatus::BudgetExhausted | PipelineStatus::StepLimit => EXIT_BUDGET,
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, GeoError> {
    let defaults = VerifyOptions::default();
    let mut opts = VerifyOptions {
        samples: args.samples,
        seed: args.seed,
        fd_step: args.fd_step,
        tol_sym: args.tol_sym.unwrap_or(defaults.tol_sym),
        tol_pg: args.tol_pg.unwrap_or(defaults.tol_pg),
        flip_curvature_sign: false,
    };
    match args.fixture {
        Some(Fixture::FlipSign) => opts.flip_curvature_sign = true,
        Some(Fixture::CoarseFd) => opts.fd_step = 0.1,
        None => {}
    }
    if !(opts.fd_step > 0.0) || opts.samples == 0 {
        return Err(config_error("--fd-step and --samples must be positive"));
    }
    prepare(&args.output)?;
    write_json(&args.output.out_dir, "run_config.json", &RunConfig {
        command: "verify",
        model: None,
        l: None,
        grid: None,
        planes_per_point: None,
        seed: opts.seed,
        k: None,
        eps: None,
        rho: None,
        eta: None,
        s_schedule: None,
        q: None,
        xi: None,
        tol_pg: args.tol_pg,
        tol_sym: args.tol_sym,
        out_dir: args.output.out_dir.clone(),
    })?;
    let report: VerifyReport = run_suite(&opts)?;
    write_json(&args.output.out_dir, "verify.json", &report)?;
    if args.output.json {
        emit(&args.output, &report)?;
    } else {
        for c in &report.checks {
            say(format_args!("{:<40} {:>12.4e}  {}", c.name, c.measured, if c.pass { "pass" } else { "FAIL" }));
        }
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

fn configure_threads() -> Result<(), GeoError> {
    if let Ok(raw) = std::env::var("GEODEFECT_THREADS") {
        let threads: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| config_error(format!("GEODEFECT_THREADS must be a positive integer, got `{raw}`")))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

pub fn exit_code(err: &GeoError) -> i32 {
    if err.is_config() || matches!(err, GeoError::Io(_)) {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Zoo(a) => cmd_zoo(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Deform(a) => cmd_deform(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}
