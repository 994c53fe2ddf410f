//! Command-line front end. Every subcommand reads an [`ExperimentConfig`]
//! (except `classify`, and `verify` where it is optional), validates it
//! before computing, and writes JSON or CSV.
//!
//! Exit codes: `0` success, `1` a failed verification or a runtime failure,
//! `2` invalid input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{ExperimentConfig, OutputConfig, OutputFormat};
use crate::data::{classify_case, make_data, CaseLabel, InitialData};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::heat::{tail_certificate, Propagator};
use crate::monitor::{monitor_bounded_quantities, Monitor, MonitorReport};
use crate::norms::{evaluate, NormConfig};
use crate::rearrangement::rearrange;
use crate::report::{envelope_json, fmt_f64};
use crate::system::{run_iteration, IterationRecord, Trajectory, Verdict};
use crate::verify::dichotomy::{run_dichotomy_scan, ScanOptions};
use crate::verify::{run_verify, Suite};

#[derive(Debug, Parser)]
#[command(name = "semilinear-lab", version, about = "Experiments for u_t = D1Δu + v^p, v_t = D2Δv + u^q")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory; overrides the config and $SEMILINEAR_LAB_OUT.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Component {
    Mu,
    Nu,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the case A–F of (N, p, q) and the quantities deciding it.
    Classify {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the config's `norms` on the data (or on a saved field).
    Norm {
        config: PathBuf,
        /// Field file (`.bin` or `.csv`) instead of the config's data.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mu")]
        component: Component,
    },
    /// Print the decreasing rearrangement as CSV `end,level`.
    Rearrange {
        config: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mu")]
        component: Component,
    },
    /// Apply the heat semigroup to the data and save snapshots.
    Evolve {
        config: PathBuf,
        /// Time (default: the schedule horizon T).
        #[arg(long)]
        t: Option<f64>,
    },
    /// Run the monotone Picard iteration.
    Iterate { config: PathBuf },
    /// Run verification suites; exits 1 if any check fails.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Suite name (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Run every suite.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Scan the amplitude c = c1 = c2 for the converge/blow-up bracket.
    Dichotomy { config: PathBuf },
}

/// Text for stdout, files written, and whether the command succeeded.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub success: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, files: Vec::new(), success: true }
    }
}

/// Exit code for an error: `2` for anything the user can fix in the input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Quadrature(_) | Error::DegenerateFit(_) | Error::MonotonicityViolation { .. } => 1,
        _ => 2,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if out.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the parsed command on a pool of `--jobs` threads.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Classify { n, p, q, json } => cmd_classify(*n, *p, *q, *json),
        Command::Norm { config, field, component } => {
            cmd_norm(&ExperimentConfig::load(config)?, field.as_deref(), *component)
        }
        Command::Rearrange { config, field, component } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            cmd_rearrange(cfg.as_ref(), field.as_deref(), *component)
        }
        Command::Evolve { config, t } => cmd_evolve(&ExperimentConfig::load(config)?, *t, out),
        Command::Iterate { config } => cmd_iterate(&ExperimentConfig::load(config)?, out),
        Command::Verify { config, suites, all, seed } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let mut selected: Vec<Suite> = if *all {
                Suite::ALL.to_vec()
            } else {
                suites.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            if selected.is_empty() {
                if let Some(c) = &cfg {
                    selected = c.run.suites.clone();
                }
            }
            let seed = seed.or(cfg.as_ref().map(|c| c.run.seed)).unwrap_or(0);
            let output = cfg.map(|c| c.output).unwrap_or_default();
            cmd_verify(&selected, seed, &output, out)
        }
        Command::Dichotomy { config } => cmd_dichotomy(&ExperimentConfig::load(config)?, out),
    }
}

fn output_dir(output: &OutputConfig, over: Option<&Path>) -> Result<PathBuf> {
    let dir = over.map(Path::to_path_buf).unwrap_or_else(|| output.resolve_dir());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(files: &mut Vec<PathBuf>, path: PathBuf, text: &str) -> Result<()> {
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

pub fn cmd_classify(n: usize, p: f64, q: f64, json: bool) -> Result<Outcome> {
    let label = classify_case(n, p, q)?;
    if json {
        return Ok(Outcome::ok(envelope_json("classify", &label)));
    }
    let CaseLabel { case, ratio, half_dim, q, fujita } = label;
    Ok(Outcome::ok(format!(
        "{case}\n(q+1)/(pq-1) = {}\nN/2 = {}\nq = {}\n1+2/N = {}\n",
        fmt_f64(ratio),
        fmt_f64(half_dim),
        fmt_f64(q),
        fmt_f64(fujita)
    )))
}

fn config_data(cfg: &ExperimentConfig) -> Result<InitialData> {
    make_data(&cfg.data, &cfg.params, &cfg.geometry.build()?)
}

fn source_field(cfg: Option<&ExperimentConfig>, field: Option<&Path>, component: Component) -> Result<(String, Field)> {
    if let Some(path) = field {
        return Ok((path.display().to_string(), Field::load(path)?));
    }
    let cfg = cfg.ok_or_else(|| Error::InvalidParameter("give a config or --field".into()))?;
    let data = config_data(cfg)?;
    Ok(match component {
        Component::Mu => ("mu".to_string(), data.mu),
        Component::Nu => ("nu".to_string(), data.nu),
    })
}

#[derive(Serialize)]
struct NormRecord<'a> {
    spec: &'a NormConfig,
    value: f64,
}

#[derive(Serialize)]
struct NormPayload<'a> {
    source: String,
    records: Vec<NormRecord<'a>>,
}

pub fn cmd_norm(cfg: &ExperimentConfig, field: Option<&Path>, component: Component) -> Result<Outcome> {
    if cfg.norms.is_empty() {
        return Err(Error::Config { path: "norms".into(), message: "no norms requested".into() });
    }
    let (source, f) = source_field(Some(cfg), field, component)?;
    let specs = cfg.norm_specs()?;
    let records = cfg
        .norms
        .iter()
        .zip(&specs)
        .map(|(spec, s)| Ok(NormRecord { spec, value: evaluate(&f, s)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::ok(envelope_json("norm", &NormPayload { source, records })))
}

pub fn cmd_rearrange(cfg: Option<&ExperimentConfig>, field: Option<&Path>, component: Component) -> Result<Outcome> {
    let (_, f) = source_field(cfg, field, component)?;
    let mut buf = Vec::new();
    rearrange(&f).write_csv(&mut buf)?;
    Ok(Outcome::ok(String::from_utf8(buf).expect("CSV is UTF-8")))
}

#[derive(Serialize)]
struct Evolved {
    component: &'static str,
    diffusivity: f64,
    max: f64,
    integral: f64,
    clamped_mass: f64,
    tail_certificate: f64,
    norms: Vec<f64>,
}

#[derive(Serialize)]
struct EvolvePayload {
    t: f64,
    heat_model: crate::heat::HeatModel,
    fields: Vec<Evolved>,
}

fn save_snapshot(files: &mut Vec<PathBuf>, dir: &Path, stem: &str, f: &Field, output: &OutputConfig) -> Result<()> {
    for (format, ext) in [(OutputFormat::Binary, "bin"), (OutputFormat::Csv, "csv")] {
        if output.wants(format) {
            let path = dir.join(format!("{stem}.{ext}"));
            f.save(&path)?;
            files.push(path);
        }
    }
    Ok(())
}

pub fn cmd_evolve(cfg: &ExperimentConfig, t: Option<f64>, out: Option<&Path>) -> Result<Outcome> {
    let t = t.unwrap_or(cfg.schedule.horizon);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time t = {t} must be finite and non-negative")));
    }
    let g = cfg.geometry.build()?;
    let data = config_data(cfg)?;
    let specs = cfg.norm_specs()?;
    let prop = Propagator::with_model(&g, cfg.run.heat_model);
    let dir = output_dir(&cfg.output, out)?;
    let mut files = Vec::new();
    let mut fields = Vec::new();
    for (name, f, d) in [("mu", &data.mu, cfg.params.d1), ("nu", &data.nu, cfg.params.d2)] {
        let (values, clamped_mass) = prop.apply(f.values(), d * t);
        let evolved = Field::new(g, values)?;
        let norms = specs.iter().map(|s| evaluate(&evolved, s)).collect::<Result<Vec<_>>>()?;
        save_snapshot(&mut files, &dir, &format!("{}_evolve_{name}", cfg.output.prefix), &evolved, &cfg.output)?;
        fields.push(Evolved {
            component: name,
            diffusivity: d,
            max: evolved.max(),
            integral: evolved.integral(),
            clamped_mass,
            tail_certificate: tail_certificate(&g, d, t),
            norms,
        });
    }
    let text = envelope_json("evolve", &EvolvePayload { t, heat_model: cfg.run.heat_model, fields });
    if cfg.output.wants(OutputFormat::Json) {
        write_file(&mut files, dir.join(format!("{}_evolve.json", cfg.output.prefix)), &text)?;
    }
    Ok(Outcome { stdout: text, files, success: true })
}

#[derive(Serialize)]
struct IteratePayload<'a> {
    case: crate::data::Case,
    verdict: Verdict,
    iterations: usize,
    blowup_threshold: f64,
    records: &'a [IterationRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    monitor: Option<MonitorReport>,
}

fn records_csv(records: &[IterationRecord]) -> String {
    let mut s = String::from("n,delta,sup_u,sup_v,max_drop,clamped_mass\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.delta),
            fmt_f64(r.sup_u),
            fmt_f64(r.sup_v),
            fmt_f64(r.max_drop),
            fmt_f64(r.clamped_mass)
        );
    }
    s
}

pub fn cmd_iterate(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome> {
    let g = cfg.geometry.build()?;
    let data = config_data(cfg)?;
    let opts = cfg.run.iteration();
    let monitor = if cfg.run.monitor {
        Some(Monitor::for_case(&cfg.params, &g, cfg.schedule.horizon, None)?.with_strides(if g.dim() == 1 { 1 } else { 2 }, 2))
    } else {
        None
    };
    let trace = match &monitor {
        Some(m) => {
            let f = |u: &Trajectory, v: &Trajectory| m.evaluate(u, v);
            run_iteration(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &opts, Some(&f))?
        }
        None => run_iteration(&data.mu, &data.nu, &cfg.params, &cfg.schedule, &opts, None)?,
    };
    let report = monitor.as_ref().map(|m| monitor_bounded_quantities(&trace, m)).transpose()?;
    let payload = IteratePayload {
        case: cfg.params.case().case,
        verdict: trace.verdict,
        iterations: trace.iterations(),
        blowup_threshold: trace.blowup_threshold,
        records: &trace.records,
        monitor: report,
    };
    let dir = output_dir(&cfg.output, out)?;
    let prefix = &cfg.output.prefix;
    let mut files = Vec::new();
    if cfg.output.wants(OutputFormat::Json) {
        write_file(&mut files, dir.join(format!("{prefix}_iterate.json")), &envelope_json("iterate", &payload))?;
    }
    if cfg.output.wants(OutputFormat::Csv) {
        write_file(&mut files, dir.join(format!("{prefix}_iterate.csv")), &records_csv(&trace.records))?;
    }
    save_snapshot(&mut files, &dir, &format!("{prefix}_u_T"), trace.u.last(), &cfg.output)?;
    save_snapshot(&mut files, &dir, &format!("{prefix}_v_T"), trace.v.last(), &cfg.output)?;
    let stdout = format!("case {}: {} after {} iterations\n", payload.case, trace.verdict, trace.iterations());
    Ok(Outcome { stdout, files, success: true })
}

pub fn cmd_verify(suites: &[Suite], seed: u64, output: &OutputConfig, out: Option<&Path>) -> Result<Outcome> {
    let report = run_verify(suites, seed)?;
    let dir = output_dir(output, out)?;
    let mut files = Vec::new();
    write_file(&mut files, dir.join(format!("{}_verify.json", output.prefix)), &envelope_json("verify", &report))?;
    let mut stdout = String::new();
    for s in &report.suites {
        let _ = writeln!(stdout, "{} {}", if s.passed { "PASS" } else { "FAIL" }, s.suite);
        for c in s.checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(stdout, "  failed {}: value {} > {}", c.name, fmt_f64(c.value), fmt_f64(c.threshold));
        }
    }
    Ok(Outcome { stdout, files, success: report.passed })
}

pub fn cmd_dichotomy(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome> {
    let g = cfg.geometry.build()?;
    let opts = ScanOptions { iteration: cfg.run.iteration(), monitor: cfg.run.monitor, ..Default::default() };
    let scan = run_dichotomy_scan(&cfg.data, &cfg.params, &g, &cfg.c_grid(), &cfg.schedule, &opts)?;
    let dir = output_dir(&cfg.output, out)?;
    let prefix = &cfg.output.prefix;
    let mut files = Vec::new();
    if cfg.output.wants(OutputFormat::Csv) {
        write_file(&mut files, dir.join(format!("{prefix}_dichotomy.csv")), &scan.to_csv())?;
    }
    if cfg.output.wants(OutputFormat::Json) {
        write_file(&mut files, dir.join(format!("{prefix}_dichotomy.json")), &envelope_json("dichotomy", &scan))?;
    }
    let mut stdout = String::new();
    for r in &scan.rows {
        let _ = writeln!(stdout, "c = {:<12.6e} {}", r.c, r.verdict);
    }
    match scan.bracket {
        Some([lo, hi]) => {
            let _ = writeln!(stdout, "bracket [{lo:.6e}, {hi:.6e}]");
        }
        None => stdout.push_str("no bracket\n"),
    }
    if let Some(flag) = &scan.flag {
        let _ = writeln!(stdout, "warning: {flag}");
    }
    Ok(Outcome { stdout, files, success: true })
}
