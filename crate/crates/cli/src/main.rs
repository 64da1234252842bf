use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pumpsim::diagnostics::fixture::{clogging_fixture, degradation_fixture, healthy_fixture, FixtureNoise, FixtureSample};
use pumpsim::diagnostics::{metrics_csv, verdicts_csv};
use pumpsim::ingestion::{validation_csv, validation_report};
use pumpsim::scenario::{bundled, dump_config, parse_config};
use pumpsim::telemetry::{aggregate_daily, from_csv, segment_cycles, to_csv, DEFAULT_F_BAND, DEFAULT_MIN_CYCLE_SAMPLES};
use pumpsim::{diagnose, DiagnosisConfig, DiagnosticsError, IngestionError, Method, ScenarioConfig, TimeSeries};

const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Parser)]
#[command(name = "pumpsim", version, about = "Wastewater pump station simulator and fault diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write timeseries.csv.
    Simulate {
        /// Scenario file, or `builtin:<name>` for a bundled one.
        #[arg(long)]
        config: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long, env = "PUMPSIM_SEED")]
        seed: Option<u64>,
        /// Disables sensor noise.
        #[arg(long)]
        noiseless: bool,
    },
    /// Classify operating cycles of a recorded series; writes verdicts.csv and metrics.csv.
    Diagnose {
        /// timeseries.csv produced by `simulate` (or the same schema).
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Bootstrap seed.
        #[arg(long, env = "PUMPSIM_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Compare a simulated series against a reference; writes validation.csv.
    Validate {
        reference: PathBuf,
        simulated: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write the inflow series of a scenario as inflow.csv.
    GenInflow {
        #[arg(long)]
        config: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, env = "PUMPSIM_SEED")]
        seed: Option<u64>,
    },
    /// Write a 50-step synthetic operating-point trajectory as fixture.csv.
    GenFixture {
        #[arg(long, value_enum, default_value_t = FixtureKind::Degradation)]
        kind: FixtureKind,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, env = "PUMPSIM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        noiseless: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ftest,
    Tangent,
    Both,
}

impl MethodArg {
    fn includes(self, m: Method) -> bool {
        matches!((self, m), (MethodArg::Both, _) | (MethodArg::Ftest, Method::FTest) | (MethodArg::Tangent, Method::Tangent))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    Degradation,
    Clogging,
    Healthy,
}

enum Failure {
    /// Bad configuration or input data.
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn input(e: impl fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn load_config(spec: &str, seed: Option<u64>, noiseless: bool) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match spec.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => bundled(name).ok_or_else(|| Failure::Input(format!("no bundled scenario named {name:?}")))?,
        None => parse_config(&read(Path::new(spec))?).map_err(|e| Failure::Input(format!("{spec}: {e}")))?,
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.noiseless |= noiseless;
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn load_series(path: &Path) -> Result<TimeSeries, Failure> {
    from_csv(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn simulate(config: &str, out: &Path, seed: Option<u64>, noiseless: bool) -> Result<(), Failure> {
    let cfg = load_config(config, seed, noiseless)?;
    let (_, run) = cfg.run().map_err(input)?;
    let ts = &run.sensed;
    let path = write(out, "timeseries.csv", &to_csv(ts))?;
    write(out, "scenario.cfg", &dump_config(&cfg))?;

    let f_nominal = cfg.station.pump_curve.f_nominal;
    let daily = aggregate_daily(ts);
    println!("wrote {} ({} records, seed {})", path.display(), ts.len(), cfg.seed);
    println!("pump  cycles  starts  runtime_h  energy_kwh");
    for j in 0..ts.n_pumps {
        let cycles = segment_cycles(ts, j + 1, f_nominal, DEFAULT_F_BAND, DEFAULT_MIN_CYCLE_SAMPLES).len();
        let starts: u32 = daily.iter().map(|d| d.pumps[j].starts).sum();
        let runtime: f64 = daily.iter().map(|d| d.pumps[j].runtime_h).sum();
        let energy: f64 = daily.iter().map(|d| d.pumps[j].energy_kwh).sum();
        println!("{:>4}  {cycles:>6}  {starts:>6}  {runtime:>9.3}  {energy:>10.2}", j + 1);
    }
    println!("final level {:.3} m", run.final_level);
    Ok(())
}

fn diagnose_cmd(input_path: &Path, method: MethodArg, out: &Path, seed: u64) -> Result<(), Failure> {
    let ts = load_series(input_path)?;
    let cfg = DiagnosisConfig { seed, ..DiagnosisConfig::default() };
    let mut report = match diagnose(&ts, &cfg) {
        Ok(r) => r,
        Err(DiagnosticsError::NoNominalData) => {
            eprintln!("warning: no near-nominal learning-phase samples; no verdicts produced");
            write(out, "verdicts.csv", &verdicts_csv(&[]))?;
            return Ok(());
        }
        Err(e) => return Err(input(e)),
    };
    report.verdicts.retain(|v| method.includes(v.method));
    if !method.includes(Method::FTest) {
        report.ftest_metrics = None;
    }
    if !method.includes(Method::Tangent) {
        report.tangent_metrics = None;
    }
    write(out, "verdicts.csv", &verdicts_csv(&report.verdicts))?;
    println!("{} cycles, {} verdicts", report.n_cycles, report.verdicts.len());
    if report.ftest_metrics.is_none() && report.tangent_metrics.is_none() {
        println!("input is unlabeled; metrics skipped");
        return Ok(());
    }
    write(out, "metrics.csv", &metrics_csv(&report))?;
    for m in [Method::FTest, Method::Tangent] {
        match report.metrics(m) {
            Some(cm) if cm.total() == 0 => println!("{:<8} no labeled windows after the learning phase", m.as_str()),
            Some(cm) => println!("{:<8} macro F1 {:.3} over {} windows", m.as_str(), cm.macro_f1(), cm.total()),
            None => {}
        }
    }
    Ok(())
}

fn validate_cmd(reference: &Path, simulated: &Path, out: &Path) -> Result<(), Failure> {
    let r = load_series(reference)?;
    let s = load_series(simulated)?;
    let report = validation_report(&r, &s).map_err(|e| match e {
        IngestionError::DisjointRanges => Failure::Input("time ranges of the two series do not overlap".into()),
        other => input(other),
    })?;
    write(out, "validation.csv", &validation_csv(&report))?;
    let flagged = report.daily.iter().filter(|d| d.start_flag || d.runtime_flag).count();
    println!("level NMAE {:.4} over [{}, {}] s, {flagged} flagged pump-days", report.level_nmae, report.overlap.0, report.overlap.1);
    Ok(())
}

fn gen_inflow(config: &str, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let cfg = load_config(config, seed, false)?;
    let spec = cfg.inflow_spec().map_err(input)?;
    let q = pumpsim::inflow::generate_inflow(&spec).map_err(input)?;
    let mut text = String::from("t_s,q_in_m3h\n");
    for (i, v) in q.iter().enumerate() {
        text.push_str(&format!("{},{v}\n", i as f64 * cfg.station.dt));
    }
    let path = write(out, "inflow.csv", &text)?;
    let mean = q.iter().sum::<f64>() / q.len().max(1) as f64;
    println!("wrote {} ({} samples, mean {mean:.2} m3/h)", path.display(), q.len());
    Ok(())
}

fn gen_fixture(kind: FixtureKind, out: &Path, seed: u64, noiseless: bool) -> Result<(), Failure> {
    let noise = if noiseless { FixtureNoise::NONE } else { FixtureNoise::default() };
    let samples: Vec<FixtureSample> = match kind {
        FixtureKind::Degradation => degradation_fixture(seed, noise),
        FixtureKind::Clogging => clogging_fixture(seed, noise),
        FixtureKind::Healthy => healthy_fixture(seed, noise),
    };
    let mut text = String::from("t,q_m3h,head_m,freq_hz\n");
    for s in &samples {
        text.push_str(&format!("{},{},{},{}\n", s.t, s.q, s.h, s.f));
    }
    let path = write(out, "fixture.csv", &text)?;
    println!("wrote {} ({} samples)", path.display(), samples.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, seed, noiseless } => simulate(config, out, *seed, *noiseless),
        Command::Diagnose { input, method, out, seed } => diagnose_cmd(input, *method, out, *seed),
        Command::Validate { reference, simulated, out } => validate_cmd(reference, simulated, out),
        Command::GenInflow { config, out, seed } => gen_inflow(config, out, *seed),
        Command::GenFixture { kind, out, seed, noiseless } => gen_fixture(*kind, out, *seed, *noiseless),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
