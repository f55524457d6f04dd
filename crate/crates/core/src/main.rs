use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracsiv::scenario::{self, key_help, Metric, Mode, RunManifest, Scenario};
use fracsiv::{Compartment, Error};

#[derive(Parser)]
#[command(
    name = "fracsiv",
    version,
    about = "Fractional SIV epidemic simulator (Crank-Nicolson ADI)"
)]
struct Cli {
    /// Worker threads for line solves.
    #[arg(long, global = true, env = "FRACSIV_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots plus a manifest.
    #[command(after_help = key_help())]
    Run {
        scenario: PathBuf,
        /// Output directory, overriding `output_dir` in the scenario.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Force integer-order diffusion along both axes.
        #[arg(long)]
        classical: bool,
    },
    /// Tabulate one metric from two completed runs.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// front_radius, total_mass or max.
        #[arg(long, default_value = "front_radius")]
        metric: String,
        /// S, I or V.
        #[arg(long, default_value = "I")]
        compartment: String,
    },
    /// Run the scenario with both ADI and the dense unsplit scheme and report the gap.
    Oracle {
        scenario: PathBuf,
        #[arg(long)]
        classical: bool,
    },
}

fn load(path: &PathBuf, classical: bool) -> Result<Scenario, Error> {
    let mut sc = Scenario::from_file(path)?;
    if classical {
        sc.mode = Mode::Classical;
    }
    Ok(sc)
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            scenario: path,
            out,
            classical,
        } => {
            let sc = load(&path, classical)?;
            let dir = out.unwrap_or_else(|| sc.output_dir.clone());
            let records = scenario::run(&sc, &dir)?;
            println!(
                "{:>10}  {:>2}  {:>14}  {:>14}  {:>12}",
                "time", "c", "total_mass", "max", "front_radius"
            );
            for r in &records {
                println!(
                    "{:>10.4}  {:>2}  {:>14.6e}  {:>14.6e}  {:>12.6}",
                    r.snapshot.time,
                    r.snapshot.compartment.label(),
                    r.metrics.total_mass,
                    r.metrics.max,
                    r.metrics.front_radius
                );
            }
            println!("wrote {} snapshots to {}", records.len(), dir.display());
        }
        Command::Compare {
            run_a,
            run_b,
            metric,
            compartment,
        } => {
            let metric = Metric::from_name(&metric).ok_or_else(|| Error::Config {
                path: "--metric".into(),
                line: 0,
                message: format!("unknown metric `{metric}`"),
            })?;
            let c = Compartment::from_label(&compartment).ok_or_else(|| Error::Config {
                path: "--compartment".into(),
                line: 0,
                message: format!("unknown compartment `{compartment}`"),
            })?;
            let a = RunManifest::load(&run_a)?;
            let b = RunManifest::load(&run_b)?;
            let rows = scenario::compare(&a, &b, c, metric)?;
            print!(
                "{}",
                scenario::format_comparison(
                    &rows,
                    metric,
                    &run_a.display().to_string(),
                    &run_b.display().to_string()
                )
            );
        }
        Command::Oracle {
            scenario: path,
            classical,
        } => {
            let sc = load(&path, classical)?;
            let gaps = scenario::run_oracle(&sc)?;
            println!(
                "{:>10}  {:>2}  {:>14}  {:>14}  {:>14}",
                "time", "c", "max_abs_gap", "adi_mass", "unsplit_mass"
            );
            for g in &gaps {
                println!(
                    "{:>10.4}  {:>2}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
                    g.time,
                    g.compartment.label(),
                    g.max_abs_gap,
                    g.adi.total_mass,
                    g.unsplit.total_mass
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_solver_failure() { 2 } else { 1 })
        }
    }
}
