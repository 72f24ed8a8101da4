use clap::{Args, Parser, Subcommand};
use fasotfs::config::{ExperimentConfig, Overrides};
use fasotfs::dump::write_dump;
use fasotfs::fitcheck::{fit_check, write_fit_check};
use fasotfs::report::evaluate_files;
use fasotfs::sweep::{run_sweep, write_sweep};
use fasotfs::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fasotfs", version, about = "Outage and capacity sweeps for fluid-antenna OTFS links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every method of a config over its grid and write <name>.csv.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Also write the Monte-Carlo samples of each geometry as FASOTFS1 dumps.
        #[arg(long)]
        dump: bool,
    },
    /// Compare Gamma and Gaussian fits with simulated samples; writes
    /// <name>_ks.csv and <name>_cdf.csv.
    FitCheck {
        config: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Check CSVs against the acceptance thresholds; exits 1 on any failure.
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunFlags {
    fn load(&self, path: &Path) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(path)?;
        cfg.apply(Overrides { seed: self.seed, trials: self.trials, eta: self.eta });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep { config, run, dump } => {
            let cfg = run.load(&config)?;
            let result = run_sweep(&cfg, run.threads)?;
            let path = write_sweep(&result, &cfg, &run.out_dir)?;
            for (row, secs) in result.table.rows.iter().zip(&result.wall_times) {
                log::debug!("{}={} {}: {:e} ({secs:.3} s)", row.param_name, row.param_value, row.method, row.value);
            }
            if dump {
                let digest = cfg.digest();
                for (label, r) in &result.runs {
                    let p = run.out_dir.join(format!("{}_{label}.bin", cfg.name));
                    write_dump(&p, r, &digest)?;
                    println!("{}", p.display());
                }
            }
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::FitCheck { config, run } => {
            let cfg = run.load(&config)?;
            let result = fit_check(&cfg, run.threads)?;
            for p in &result.points {
                println!(
                    "{}={}: KS gamma {:.4} corrected {:.4} uncapped {:.4} gaussian {:.4}",
                    cfg.sweep_param.name(),
                    p.value,
                    p.ks_uncorrelated,
                    p.ks_corrected,
                    p.ks_uncapped,
                    p.ks_gaussian
                );
            }
            let (ks, cdf) = write_fit_check(&result, &cfg, &run.out_dir)?;
            println!("{}\n{}", ks.display(), cdf.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { csv } => {
            let report = evaluate_files(&csv)?;
            print!("{}", report.render());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
