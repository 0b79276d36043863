//! `airy-ensemble`: simulations, verification tests and numerical tables.
//!
//! Exit codes: 0 success or test passed, 1 test failed, 2 configuration or
//! input error, 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use airy_ensemble::airy::kernel::{kernel_eval, TracyWidomTable, TW_RANGE};
use airy_ensemble::airy::{expected_count, expected_count_exact};
use airy_ensemble::bridge_rep::{boundary_from_finite_n, default_boundary_n, sample_bridge_representation, BridgeRepConfig};
use airy_ensemble::dyson::{sample_dyson_paths, sample_melon, sample_rescaled};
use airy_ensemble::io::{write_ensemble_csv, write_jam_graph};
use airy_ensemble::parallel::try_map_replicas;
use airy_ensemble::verify::{run_verify, ExperimentConfig, TestId};
use airy_ensemble::{Error, GridSpec, LineEnsemble, RngStream};

const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "airy-ensemble", version, about = "Dyson motion, melons and the Airy line ensemble")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (simulate, verify) or file (table).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default)]
struct Params {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample ensembles and write them as CSV with a JSON manifest.
    Simulate {
        kind: SimKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
    /// Run a verification test and write its JSON report.
    Verify {
        /// Test id, e.g. tw-edge, jam-scaling, bridge-rep.
        test: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
        /// Record wall-clock time in the report (makes output run-dependent).
        #[arg(long)]
        wall_clock: bool,
    },
    /// Tabulate a function on a range as CSV.
    Table {
        kind: TableKind,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SimKind {
    Dyson,
    Melon,
    AiryApprox,
    BridgeRep,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableKind {
    TwCdf,
    Kernel,
    ExpectedCount,
}

enum Failure {
    Lib(Error),
    TestFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::TestFailed) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            let (kind, code) = classify(&e);
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(code)
        }
    }
}

fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Config(_) => ("config", 2),
        Error::Precondition(_) => ("precondition", 2),
        Error::InsufficientData { .. } => ("insufficient-data", 2),
        Error::Range { .. } => ("range", 2),
        Error::Parse(_) => ("parse", 2),
        Error::Io(_) => ("io", 2),
        Error::RejectionFailure { .. } => ("rejection-failure", 3),
        Error::Numerical { .. } => ("numerical", 3),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { kind, common, params } => {
            with_threads(common.threads, || simulate(kind, &common, &params))
        }
        Command::Verify {
            test,
            common,
            params,
            wall_clock,
        } => {
            let id: TestId = test.parse()?;
            with_threads(common.threads, || verify(id, &common, &params, wall_clock))
        }
        Command::Table {
            kind,
            lo,
            hi,
            step,
            out,
        } => table(kind, lo, hi, step, out.as_deref()),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T, Failure> + Send) -> Result<T, Failure>
where
    T: Send,
{
    match threads {
        Some(0) => Err(Error::Config("--threads must be positive".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T, Failure>) -> Result<T, Failure> {
    if threads == Some(0) {
        return Err(Error::Config("--threads must be positive".into()).into());
    }
    f()
}

fn experiment_config(common: &Common, p: &Params) -> ExperimentConfig {
    ExperimentConfig {
        seed: common.seed,
        replicas: common.replicas,
        n: p.n,
        k: p.k,
        ell: p.ell,
        t: p.t,
        delta: p.delta,
        gamma: p.gamma,
        steps: p.steps,
    }
}

fn out_dir(common: &Common) -> Result<PathBuf, Failure> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(path: &FsPath, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

enum Simulated {
    Plain(LineEnsemble),
    Bridged {
        ensemble: LineEnsemble,
        graph: airy_ensemble::jam::JamGraph,
        partial: bool,
    },
}

fn simulate(kind: SimKind, common: &Common, p: &Params) -> Result<(), Failure> {
    let replicas = common.replicas.unwrap_or(1);
    if replicas == 0 {
        return Err(Error::Config("--replicas must be positive".into()).into());
    }
    let root = RngStream::new(common.seed, 0);
    let steps = p.steps.unwrap_or(100);
    let t = p.t.unwrap_or(1.0);
    let mut resolved = json!({ "steps": steps, "t": t });
    let mut bridge_cfg = None;
    match kind {
        SimKind::Dyson => {
            resolved["n"] = json!(p.n.unwrap_or(10));
        }
        SimKind::Melon => {
            resolved["k"] = json!(p.k.unwrap_or(3));
            resolved["variance"] = json!(1.0);
        }
        SimKind::AiryApprox => {
            let n = p.n.unwrap_or(200);
            resolved["n"] = json!(n);
            resolved["k"] = json!(p.k.unwrap_or(8).min(n));
        }
        SimKind::BridgeRep => {
            let k = p.k.unwrap_or(4);
            let mut cfg = BridgeRepConfig::with_defaults(k, p.t.unwrap_or(0.5), p.gamma.unwrap_or(1.0))?;
            if let Some(d) = p.delta {
                cfg.delta = d;
            }
            if let Some(l) = p.ell {
                cfg.ell = l;
            }
            if let Some(s) = p.steps {
                cfg.substeps = s;
            }
            cfg.validate()?;
            let n = p.n.unwrap_or(default_boundary_n(k));
            resolved = json!({ "n": n, "bridge_rep": &cfg });
            bridge_cfg = Some((n, cfg));
        }
    }
    // validate everything before any sampling starts
    match kind {
        SimKind::Dyson | SimKind::Melon | SimKind::AiryApprox => {
            GridSpec::new(0.0, t, steps)?;
        }
        SimKind::BridgeRep => {}
    }
    let outputs = try_map_replicas(replicas, |r| -> Result<Simulated, Error> {
        let stream = root.derive(r as u64);
        let mut rng = stream.rng();
        match kind {
            SimKind::Dyson => {
                let grid = GridSpec::new(0.0, t, steps)?;
                Ok(Simulated::Plain(sample_dyson_paths(p.n.unwrap_or(10), grid, &mut rng)?.base))
            }
            SimKind::Melon => {
                let grid = GridSpec::new(0.0, t, steps)?;
                Ok(Simulated::Plain(sample_melon(p.k.unwrap_or(3), grid, 1.0, &mut rng)?))
            }
            SimKind::AiryApprox => {
                let n = p.n.unwrap_or(200);
                Ok(Simulated::Plain(sample_rescaled(n, p.k.unwrap_or(8).min(n), 0.0, t, steps, &mut rng)?))
            }
            SimKind::BridgeRep => {
                let (n, cfg) = bridge_cfg.as_ref().expect("set above");
                let boundary = boundary_from_finite_n(*n, cfg, stream.derive(0))?;
                let s = sample_bridge_representation(&boundary, cfg, stream.derive(1))?;
                Ok(Simulated::Bridged {
                    partial: s.is_partial(),
                    ensemble: s.ensemble,
                    graph: s.graph,
                })
            }
        }
    })?;
    let dir = out_dir(common)?;
    let name = match kind {
        SimKind::Dyson => "dyson",
        SimKind::Melon => "melon",
        SimKind::AiryApprox => "airy-approx",
        SimKind::BridgeRep => "bridge-rep",
    };
    let mut files = Vec::new();
    let mut partial = Vec::new();
    for (r, out) in outputs.iter().enumerate() {
        let csv_name = format!("{name}_{r:04}.csv");
        let mut buf = Vec::new();
        let ensemble = match out {
            Simulated::Plain(e) => e,
            Simulated::Bridged {
                ensemble,
                graph,
                partial: is_partial,
            } => {
                let g_name = format!("{name}_{r:04}_graph.json");
                let mut g = Vec::new();
                write_jam_graph(graph, &mut g)?;
                write_file(&dir.join(&g_name), &g)?;
                files.push(g_name);
                if *is_partial {
                    partial.push(r);
                }
                ensemble
            }
        };
        write_ensemble_csv(ensemble, &mut buf)?;
        write_file(&dir.join(&csv_name), &buf)?;
        files.push(csv_name);
    }
    let manifest = json!({
        "format_version": MANIFEST_FORMAT_VERSION,
        "command": "simulate",
        "kind": kind,
        "seed": common.seed,
        "replicas": replicas,
        "config": resolved,
        "partial_replicas": partial,
        "files": files,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&dir.join("manifest.json"), text.as_bytes())?;
    Ok(())
}

fn verify(id: TestId, common: &Common, p: &Params, wall_clock: bool) -> Result<(), Failure> {
    let config = experiment_config(common, p);
    let start = Instant::now();
    let mut report = run_verify(id, &config)?;
    if wall_clock {
        report.wall_clock_secs = Some(start.elapsed().as_secs_f64());
    }
    let text = report.to_json() + "\n";
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join(format!("{id}.json")), text.as_bytes())?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::TestFailed)
    }
}

fn table(kind: TableKind, lo: Option<f64>, hi: Option<f64>, step: Option<f64>, out: Option<&FsPath>) -> Result<(), Failure> {
    let (dlo, dhi, dstep, header) = match kind {
        TableKind::TwCdf => (TW_RANGE.0, TW_RANGE.1, 0.1, "s,cdf"),
        TableKind::Kernel => (-10.0, 2.0, 0.1, "x,kernel_diagonal"),
        TableKind::ExpectedCount => (0.0, 10.0, 1.0, "a,expected_count,kernel_integral"),
    };
    let (lo, hi, step) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi), step.unwrap_or(dstep));
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("need step > 0 and lo <= hi, got lo={lo}, hi={hi}, step={step}")).into());
    }
    let rows = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let mut text = String::from(header);
    text.push('\n');
    let tw = matches!(kind, TableKind::TwCdf).then(TracyWidomTable::standard);
    for i in 0..rows {
        let x = lo + i as f64 * step;
        let line = match kind {
            TableKind::TwCdf => {
                if !(x >= TW_RANGE.0 - 1e-12 && x <= TW_RANGE.1 + 1e-12) {
                    return Err(Error::Range {
                        value: x,
                        range: format!("[{}, {}]", TW_RANGE.0, TW_RANGE.1),
                    }
                    .into());
                }
                format!("{x:.16e},{:.16e}", tw.expect("set").cdf(x))
            }
            TableKind::Kernel => format!("{x:.16e},{:.16e}", kernel_eval(x, x)?),
            TableKind::ExpectedCount => {
                format!("{x:.16e},{:.16e},{:.16e}", expected_count(x), expected_count_exact(x, 16.0)?)
            }
        };
        text.push_str(&line);
        text.push('\n');
    }
    match out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
