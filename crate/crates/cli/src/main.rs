use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swae::ot::DEFAULT_EXACT_CAP;
use swae::{PriorKind, PriorSpec};
use swae_cli::commands::{self, DistanceArgs, DivergenceArgs};
use swae_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(
    name = "swae",
    version,
    about = "Sliced-Wasserstein autoencoder experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sliced (and optionally exact) Wasserstein distance between two CSV clouds.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 50)]
        projections: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also solve the exact assignment problem.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        cap: usize,
        /// Write the result as a one-row CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train an autoencoder with a sliced-Wasserstein latent penalty.
    Train {
        /// Flat key=value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a configuration key; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// W1 and JS between a uniform law and its shifts.
    DivergenceCurve {
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        tau_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        tau_max: f64,
        #[arg(long, default_value_t = 121)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        bins: usize,
        #[arg(long, default_value_t = 1000)]
        quantiles: usize,
        #[arg(long, default_value = "divergence_curve")]
        output_dir: PathBuf,
    },
    /// Sample a prior and plot it.
    PriorPreview {
        #[arg(long, default_value = "uniform_box")]
        kind: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.5)]
        r_inner: f64,
        #[arg(long, default_value_t = 1.0)]
        r_outer: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.02)]
        sigma: f64,
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        #[arg(short, default_value_t = 2000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "prior_preview")]
        output_dir: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Distance {
            a,
            b,
            p,
            projections,
            seed,
            exact,
            cap,
            output,
        } => {
            let report = commands::distance(&DistanceArgs {
                a,
                b,
                p,
                projections,
                seed,
                exact,
                cap,
                output,
            })?;
            print!("{report}");
        }
        Command::Train {
            config,
            overrides,
            output_dir,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            for o in &overrides {
                cfg.apply_override(o)?;
            }
            if let Some(dir) = output_dir {
                let dir = dir
                    .to_str()
                    .ok_or_else(|| CliError::Usage("output directory is not valid UTF-8".into()))?;
                cfg.set("output_dir", dir)?;
            }
            let outcome = commands::train(&cfg)?;
            let rec = &outcome.record;
            println!(
                "{} steps{}",
                rec.losses.len(),
                if rec.stopped_early {
                    " (stopped early)"
                } else {
                    ""
                }
            );
            for (label, eval) in [
                ("initial", outcome.first_eval()),
                ("final", outcome.last_eval()),
            ] {
                if let Some(e) = eval {
                    let m = e.metrics;
                    print!(
                        "{label} (step {}): sw_latent {:.4e}, recon_cost {:.4e}",
                        e.step, m.sw_latent, m.recon_cost
                    );
                    if let Some(g) = m.grid_occupancy {
                        print!(", grid_occupancy {g:.3}");
                    }
                    println!();
                }
            }
            println!("artifacts written to {}", outcome.output_dir.display());
        }
        Command::DivergenceCurve {
            tau_min,
            tau_max,
            steps,
            bins,
            quantiles,
            output_dir,
        } => {
            let rows = commands::divergence_curve(&DivergenceArgs {
                tau_min,
                tau_max,
                steps,
                bins,
                quantiles,
            })?;
            commands::write_divergence_curve(&rows, &output_dir)?;
            println!("{} rows written to {}", rows.len(), output_dir.display());
        }
        Command::PriorPreview {
            kind,
            dim,
            half_width,
            r_inner,
            r_outer,
            radius,
            sigma,
            exponent,
            m,
            seed,
            output_dir,
        } => {
            let kind = match kind.as_str() {
                "uniform_box" => PriorKind::UniformBox { half_width },
                "ring" => PriorKind::Ring {
                    inner: r_inner,
                    outer: r_outer,
                },
                "circle" => PriorKind::Circle { radius, sigma },
                "bowl" => PriorKind::Bowl { exponent },
                other => return Err(CliError::Usage(format!("unknown prior kind {other:?}"))),
            };
            let cloud = commands::prior_preview(&PriorSpec { kind, dim }, m, seed, &output_dir)?;
            println!("{} samples written to {}", cloud.n(), output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
