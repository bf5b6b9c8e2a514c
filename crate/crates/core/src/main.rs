use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use nmr_lrhv::cli::{run_experiment, ComparisonReport, EngineSelection, ExperimentConfig};
use nmr_lrhv::{Error, Result};

/// Compares exact density-operator, quasidistribution and local
/// hidden-variable simulations of an NMR experiment.
#[derive(Debug, Parser)]
#[command(name = "nmr-lrhv", version)]
struct Args {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Engines to run: oracle, quasi, lrhv or all.
    #[arg(long, value_parser = parse_engine)]
    engine: Option<EngineSelection>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    molecules: Option<usize>,

    #[arg(long)]
    out_csv: Option<PathBuf>,

    #[arg(long)]
    out_json: Option<PathBuf>,

    /// Worker threads; affects speed only.
    #[arg(long, env = "NMR_LRHV_THREADS")]
    threads: Option<usize>,
}

fn parse_engine(s: &str) -> std::result::Result<EngineSelection, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn run(args: Args) -> Result<ComparisonReport> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(e) = args.engine {
        cfg.engines = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.molecules {
        cfg.molecules = m;
    }
    if args.out_csv.is_some() {
        cfg.csv = args.out_csv;
    }
    if args.out_json.is_some() {
        cfg.json = args.out_json;
    }
    cfg.validate()?;

    let report = run_experiment(&cfg)?;
    report.write_table(io::stdout().lock())?;
    if let Some(p) = &cfg.csv {
        let mut w = create(p)?;
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &cfg.json {
        let mut w = create(p)?;
        report.write_json(&mut w)?;
        w.flush()?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(args) {
        Ok(report) => ExitCode::from(report.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
