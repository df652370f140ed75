//! Subcommand implementations, callable without going through the binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use swae::cloud::format_sig17;
use swae::nn::checkpoint;
use swae::ot::{
    exact_wasserstein_small_with_cap, js_divergence_1d, quantile_wasserstein_1d,
    sliced_wasserstein_estimate, Grid,
};
use swae::sampling::{sample_prior, sample_swiss_roll, sample_unit_sphere};
use swae::train::{
    latent_grid_decode, streams, train_with_holdout, EvalRecord, SwaeModel, TrainEvent,
};
use swae::{CostExponent, PointCloud64, PriorSpec, RngSeed, TrainRecord64};

use crate::config::{Dataset, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::svg::{quantize, Figure, Range};

const COLOR_BINS: usize = 8;

fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create directory {}: {e}", dir.display())))
}

fn load_cloud(path: &Path) -> CliResult<PointCloud64> {
    PointCloud64::load_csv(path)
        .map_err(|e| CliError::Usage(format!("cannot load {}: {e}", path.display())))
}

// ---------------------------------------------------------------- distance

#[derive(Debug, Clone)]
pub struct DistanceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    pub p: u32,
    pub projections: usize,
    pub seed: u64,
    pub exact: bool,
    pub cap: usize,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub p: u32,
    pub sliced: f64,
    pub std_error: f64,
    pub projections: usize,
    pub seed: u64,
    pub exact: Option<f64>,
}

impl DistanceReport {
    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["p", "sliced", "std_error", "projections", "seed"];
        if self.exact.is_some() {
            h.push("exact");
        }
        h
    }

    pub fn values(&self) -> Vec<String> {
        let mut v = vec![
            self.p.to_string(),
            format_sig17(self.sliced),
            format_sig17(self.std_error),
            self.projections.to_string(),
            self.seed.to_string(),
        ];
        if let Some(e) = self.exact {
            v.push(format_sig17(e));
        }
        v
    }
}

impl std::fmt::Display for DistanceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "sliced W_{p}^{p} = {:.10e} (std error {:.3e}, L = {}, seed = {})",
            self.sliced,
            self.std_error,
            self.projections,
            self.seed,
            p = self.p
        )?;
        if let Some(e) = self.exact {
            writeln!(f, "exact  W_{p}^{p} = {e:.10e}", p = self.p)?;
        }
        Ok(())
    }
}

pub fn distance(args: &DistanceArgs) -> CliResult<DistanceReport> {
    let p = CostExponent::from_int(args.p).map_err(|e| CliError::Usage(e.to_string()))?;
    if args.projections == 0 {
        return Err(CliError::Usage("--projections must be at least 1".into()));
    }
    let a = load_cloud(&args.a)?;
    let b = load_cloud(&args.b)?;
    let mut rng = RngSeed(args.seed).stream(streams::PROJECTIONS);
    let thetas = sample_unit_sphere(args.projections, a.d(), &mut rng)?;
    let est = sliced_wasserstein_estimate(&a, &b, &thetas, p)?;
    let exact = if args.exact {
        Some(exact_wasserstein_small_with_cap(&a, &b, p, args.cap)?)
    } else {
        None
    };
    let report = DistanceReport {
        p: args.p,
        sliced: est.value,
        std_error: est.std_error,
        projections: args.projections,
        seed: args.seed,
        exact,
    };
    if let Some(path) = &args.output {
        let text = format!(
            "{}\n{}\n",
            report.header().join(","),
            report.values().join(",")
        );
        write_text(path, &text)?;
    }
    Ok(report)
}

// ------------------------------------------------------------------- train

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub output_dir: PathBuf,
    pub record: TrainRecord64,
}

impl TrainOutcome {
    pub fn first_eval(&self) -> Option<&EvalRecord> {
        self.record.evals.first()
    }

    pub fn last_eval(&self) -> Option<&EvalRecord> {
        self.record.evals.last()
    }
}

struct TrainData {
    train: PointCloud64,
    heldout: PointCloud64,
    /// Per-point value used to color latent scatter plots.
    color: Vec<f64>,
}

fn load_dataset(dataset: &Dataset, seed: RngSeed) -> CliResult<TrainData> {
    match dataset {
        Dataset::SwissRoll { n, noise, heldout } => {
            let roll = sample_swiss_roll::<f64, _>(*n, *noise, &mut seed.stream(streams::DATA))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let held = if *heldout > 0 {
                sample_swiss_roll::<f64, _>(*heldout, *noise, &mut seed.stream(streams::HELDOUT))
                    .map_err(|e| CliError::Usage(e.to_string()))?
                    .cloud
            } else {
                roll.cloud.clone()
            };
            Ok(TrainData {
                train: roll.cloud,
                heldout: held,
                color: roll.params,
            })
        }
        Dataset::Csv(path) => {
            let cloud = load_cloud(path)?;
            let color = (0..cloud.n()).map(|i| cloud.point(i)[0]).collect();
            Ok(TrainData {
                heldout: cloud.clone(),
                train: cloud,
                color,
            })
        }
    }
}

fn latent_figure(title: &str, latent: &PointCloud64, color: &[f64], prior: &PriorSpec) -> String {
    let classes = quantize(color, COLOR_BINS);
    let pts: Vec<(f64, f64, usize)> = (0..latent.n())
        .map(|i| {
            let z = latent.point(i);
            (z[0], z.get(1).copied().unwrap_or(0.0), classes[i])
        })
        .collect();
    let (lo, hi) = prior.bounding_box();
    let span = |k: usize| {
        let r = Range::covering(
            (0..latent.n()).map(|i| latent.point(i).get(k).copied().unwrap_or(0.0)),
        );
        Range::new(r.lo.min(lo), r.hi.max(hi))
    };
    let y_label = if latent.d() > 1 { "z1" } else { "" };
    Figure::new(title, "z0", y_label, span(0), span(1)).scatter(&pts)
}

/// Runs a full training experiment and writes its artifacts to the
/// configured output directory.
pub fn train(cfg: &ExperimentConfig) -> CliResult<TrainOutcome> {
    let tc = cfg.train_config()?;
    let dataset = cfg.dataset()?;
    let grid_side = cfg.grid_side()?;
    let out = cfg.output_dir();
    let data = load_dataset(&dataset, tc.seed)?;
    if tc.batch_size > data.train.n() {
        return Err(CliError::Usage(format!(
            "batch_size {} exceeds the {} training points",
            tc.batch_size,
            data.train.n()
        )));
    }

    create_dir(&out)?;
    write_text(&out.join("resolved_config.txt"), &cfg.render())?;

    let initial = SwaeModel::<f64>::init(&tc, data.train.d())?;
    let before = PointCloud64::new(initial.encoder.predict(data.train.points())?)?;
    write_text(
        &out.join("latent_before.svg"),
        &latent_figure(
            "latent codes before training",
            &before,
            &data.color,
            &tc.prior,
        ),
    )?;

    let mut loss_log = create_file(&out.join("loss_log.csv"))?;
    let mut timing = create_file(&out.join("timing.csv"))?;
    let mut eval_log = create_file(&out.join("eval_log.csv"))?;
    let with_grid = tc.latent_dim == 2;
    let mut io_error: Option<std::io::Error> = None;
    {
        let mut header = || -> std::io::Result<()> {
            writeln!(loss_log, "step,recon,sw,total")?;
            writeln!(timing, "step,wall_ms")?;
            if with_grid {
                writeln!(eval_log, "step,sw_latent,recon_cost,grid_occupancy")
            } else {
                writeln!(eval_log, "step,sw_latent,recon_cost")
            }
        };
        header()?;
    }
    let observer = |event: TrainEvent<'_>| {
        if io_error.is_some() {
            return;
        }
        let res = match event {
            TrainEvent::Step { report, millis } => writeln!(
                loss_log,
                "{},{},{},{}",
                report.step,
                format_sig17(report.recon),
                format_sig17(report.sw),
                format_sig17(report.total)
            )
            .and_then(|_| writeln!(timing, "{},{millis}", report.step)),
            TrainEvent::Eval(rec) => {
                let m = &rec.metrics;
                let mut line = format!(
                    "{},{},{}",
                    rec.step,
                    format_sig17(m.sw_latent),
                    format_sig17(m.recon_cost)
                );
                if let Some(g) = m.grid_occupancy {
                    line.push(',');
                    line.push_str(&format_sig17(g));
                }
                writeln!(eval_log, "{line}")
            }
        };
        if let Err(e) = res {
            io_error = Some(e);
        }
    };
    let record = train_with_holdout(&data.train, &data.heldout, &tc, observer)?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    loss_log.flush()?;
    timing.flush()?;
    eval_log.flush()?;

    checkpoint::save(&record.encoder, out.join("encoder.ckpt"))?;
    checkpoint::save(&record.decoder, out.join("decoder.ckpt"))?;
    let after = PointCloud64::new(record.encoder.predict(data.train.points())?)?;
    write_text(
        &out.join("latent_after.svg"),
        &latent_figure(
            "latent codes after training",
            &after,
            &data.color,
            &tc.prior,
        ),
    )?;
    if with_grid {
        let (lo, hi) = tc.prior.bounding_box();
        let decoded = latent_grid_decode(&record.decoder, grid_side, lo, hi)?;
        let names: Vec<String> = (0..decoded.d()).map(|k| format!("x{k}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        decoded.save_csv(out.join("grid_decoded.csv"), Some(&names))?;
    }
    Ok(TrainOutcome {
        output_dir: out,
        record,
    })
}

// -------------------------------------------------------- divergence curve

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceArgs {
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
    pub bins: usize,
    pub quantiles: usize,
}

impl Default for DivergenceArgs {
    fn default() -> Self {
        Self {
            tau_min: -3.0,
            tau_max: 3.0,
            steps: 121,
            bins: 10_000,
            quantiles: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRow {
    pub tau: f64,
    pub w1: f64,
    pub js: f64,
}

fn unit_box_pdf(x: f64) -> f64 {
    if (-0.5..0.5).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// W1 and JS between `U[-1/2, 1/2]` and its shift by `tau`, for each `tau` on
/// an even grid over `[tau_min, tau_max]`.
pub fn divergence_curve(args: &DivergenceArgs) -> CliResult<Vec<DivergenceRow>> {
    let DivergenceArgs {
        tau_min,
        tau_max,
        steps,
        bins,
        quantiles,
    } = *args;
    if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < tau_max) {
        return Err(CliError::Usage(format!(
            "need tau-min < tau-max, got {tau_min} and {tau_max}"
        )));
    }
    if steps < 2 || bins < 2 || quantiles == 0 {
        return Err(CliError::Usage(
            "steps and bins must be at least 2, quantiles at least 1".into(),
        ));
    }
    (0..steps)
        .map(|i| {
            let tau = tau_min + (tau_max - tau_min) * i as f64 / (steps - 1) as f64;
            let w1 = quantile_wasserstein_1d(
                |u: f64| u - 0.5,
                |u: f64| u - 0.5 + tau,
                quantiles,
                CostExponent::One,
            )?;
            let grid = Grid::new((-0.5f64).min(tau - 0.5), 0.5f64.max(tau + 0.5), bins)?;
            let js = js_divergence_1d(unit_box_pdf, |x| unit_box_pdf(x - tau), grid)?;
            Ok(DivergenceRow { tau, w1, js })
        })
        .collect()
}

/// Writes `divergence_curve.csv` and `divergence_curve.svg` into `dir`.
pub fn write_divergence_curve(rows: &[DivergenceRow], dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    let mut csv = String::from("tau,w1,js\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            format_sig17(r.tau),
            format_sig17(r.w1),
            format_sig17(r.js)
        ));
    }
    write_text(&dir.join("divergence_curve.csv"), &csv)?;
    let w1: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.w1)).collect();
    let js: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.js)).collect();
    let x = Range::covering(rows.iter().map(|r| r.tau));
    let y = Range::covering(rows.iter().flat_map(|r| [r.w1, r.js, 0.0]));
    let svg = Figure::new("shifted uniform: W1 and JS", "tau", "value", x, y)
        .lines(&[("W1", &w1), ("JS", &js)]);
    write_text(&dir.join("divergence_curve.svg"), &svg)
}

// ----------------------------------------------------------- prior preview

/// Draws `m` prior samples and writes `prior_samples.csv` and
/// `prior_samples.svg` into `dir`.
pub fn prior_preview(spec: &PriorSpec, m: usize, seed: u64, dir: &Path) -> CliResult<PointCloud64> {
    spec.validate()?;
    if m == 0 {
        return Err(CliError::Usage("-m must be at least 1".into()));
    }
    let cloud: PointCloud64 = sample_prior(spec, m, &mut RngSeed(seed).stream(streams::PRIOR))?;
    create_dir(dir)?;
    let names: Vec<String> = (0..cloud.d()).map(|k| format!("z{k}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    cloud.save_csv(dir.join("prior_samples.csv"), Some(&names))?;
    let (lo, hi) = spec.bounding_box();
    let pad = 0.05 * (hi - lo);
    let r = Range::new(lo - pad, hi + pad);
    let pts: Vec<(f64, f64, usize)> = (0..cloud.n())
        .map(|i| {
            let z = cloud.point(i);
            (z[0], z.get(1).copied().unwrap_or(0.0), 0)
        })
        .collect();
    let y_label = if cloud.d() > 1 { "z1" } else { "" };
    let title = format!("{} prior, {m} samples", spec.name());
    write_text(
        &dir.join("prior_samples.svg"),
        &Figure::new(&title, "z0", y_label, r, r).scatter(&pts),
    )?;
    Ok(cloud)
}
