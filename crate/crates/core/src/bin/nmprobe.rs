use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nmprobe::checks;
use nmprobe::config::ExperimentConfig;
use nmprobe::experiment::{self, RunOptions};
use nmprobe::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Parser, Debug)]
#[command(name = "nmprobe", version, about = "Snapshot probing of non-Markovian polarization dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed, overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exact probabilities instead of sampled counts
    #[arg(long, global = true)]
    noiseless: bool,
    /// Reject unknown config keys and fail on numeric warnings
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounds and verdicts versus plate thickness
    Sweep,
    /// Time-interval classification from the sweep's tightest bounds
    Intervals,
    /// Table of the critical amplitude, numeric and fitted
    Acrit {
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 20.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Run the inequality and consistency property suites
    Check,
    /// Render SVG from an existing sweep CSV
    Report {
        /// Sweep CSV produced by `sweep`
        csv: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> nmprobe::Result<ExperimentConfig> {
    match &cli.config {
        Some(p) => ExperimentConfig::load(p, cli.strict),
        None => Ok(ExperimentConfig::default()),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> nmprobe::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn wants_csv(f: Format) -> bool {
    f != Format::Svg
}

fn wants_svg(f: Format) -> bool {
    f != Format::Csv
}

fn run(cli: &Cli) -> nmprobe::Result<ExitCode> {
    let opts = RunOptions {
        seed: cli.seed,
        noiseless: cli.noiseless,
        strict: cli.strict,
        serial: false,
    };
    match &cli.command {
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let rep = experiment::run_sweep(&cfg, opts)?;
            write(&cli.out, "sweep.json", &rep.metadata_json()?)?;
            if wants_csv(cli.format) {
                write(&cli.out, "sweep.csv", &rep.to_csv_string()?)?;
            }
            if wants_svg(cli.format) {
                write(&cli.out, "sweep.svg", &report::sweep_svg(&rep.rows, "bounds on A"))?;
            }
            for r in &rep.rows {
                println!("{:>6} mm  tau {:.4}  {}", r.thickness_mm, r.tau, r.verdict);
            }
        }
        Command::Intervals => {
            let cfg = load_config(cli)?;
            let rep = experiment::run_sweep(&cfg, opts)?;
            let iv = experiment::intervals_from_sweep(&cfg, &rep)?;
            if wants_csv(cli.format) {
                let mut buf = Vec::new();
                iv.write_csv(&mut buf)?;
                write(&cli.out, "intervals.csv", &String::from_utf8_lossy(&buf))?;
            }
            if wants_svg(cli.format) {
                write(&cli.out, "intervals.svg", &report::intervals_svg(&iv, "interval classification"))?;
            }
            for i in &iv.intervals {
                println!("[{:.3}, {:.3}] {}", i.start, i.end, i.label);
            }
        }
        Command::Acrit { from, to, step } => {
            let cfg = load_config(cli)?;
            let n = ((to - from) / step).floor().max(0.0) as usize;
            let etas: Vec<f64> = (0..=n).map(|k| from + step * k as f64).collect();
            let rows = experiment::acrit_table(&etas, cfg.tau_max)?;
            let mut buf = Vec::new();
            experiment::write_acrit_table(&rows, &mut buf)?;
            write(&cli.out, "acrit.csv", &String::from_utf8_lossy(&buf))?;
            for r in &rows {
                let num = r.numeric.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into());
                println!("{:>6.2}  {num:>8}  {:.5}", r.delta_eta, r.fit);
            }
        }
        Command::Check => {
            let seed = cli.seed.unwrap_or(0);
            let results = checks::run_all(seed)?;
            let mut ok = true;
            for r in &results {
                println!("{r}");
                ok &= r.passed;
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { csv } => {
            let rows = experiment::read_rows(fs::File::open(csv)?)?;
            let bad = rows.iter().filter(|r| !experiment::audit_row(r)).count();
            if bad > 0 {
                eprintln!("{bad} rows fail the verdict audit");
            }
            write(&cli.out, "sweep.svg", &report::sweep_svg(&rows, "bounds on A"))?;
            if bad > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
