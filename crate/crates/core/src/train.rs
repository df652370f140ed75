//! Sliced-Wasserstein autoencoder training.
//!
//! Each step draws a minibatch `x`, a prior sample `z~` of the same size and
//! `L` fresh directions `theta_l`, then descends
//!
//! ```text
//! (1/M) sum_m c(x_m, dec(enc(x_m)))
//!   + lambda/(L M) sum_l sum_m (theta_l . z~_(m) - theta_l . enc(x)_(m))^2
//! ```
//!
//! where `(m)` denotes rank order along `theta_l`. The sort pairing is held
//! constant while differentiating, and encoder and decoder are updated
//! together from one backward pass.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use crate::cloud::{PointCloud, ProjectionSet};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::nn::{
    init_network, recon_loss_and_grad, Activation, DenseNetwork, GradientSet, OptimizerKind,
    OptimizerState, ReconLoss,
};
use crate::ot::{
    reconstruction_cost, sliced_wasserstein, sliced_wasserstein_gradient, CostExponent,
};
use crate::sampling::{sample_prior, sample_unit_sphere, Minibatcher, PriorSpec, RngSeed};
use crate::scalar::Scalar;

/// Stream ids derived from [`TrainConfig::seed`]. Each consumer owns its
/// stream, so skipping one (for example prior sampling in a plain
/// autoencoder run) leaves the others untouched.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const PRIOR: u64 = 3;
    pub const PROJECTIONS: u64 = 4;
    pub const EVAL: u64 = 5;
    /// Free for callers generating training data.
    pub const DATA: u64 = 10;
    /// Free for callers generating held-out data.
    pub const HELDOUT: u64 = 11;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the latent sliced-Wasserstein term.
    pub lambda: f64,
    pub num_projections: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub latent_dim: usize,
    pub prior: PriorSpec,
    pub recon_loss: ReconLoss,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub seed: RngSeed,
    /// Held-out evaluation every this many updates (and before the first / after the last).
    pub eval_interval: usize,
    pub eval_projections: usize,
    /// Stop once this many consecutive evaluations fail to improve the best
    /// held-out `sw_latent`. Zero disables early stopping.
    pub patience: usize,
    /// Hidden widths of the encoder; the decoder mirrors them.
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub encoder_output: Activation,
    pub decoder_output: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            num_projections: 50,
            batch_size: 500,
            epochs: 200,
            latent_dim: 2,
            prior: PriorSpec::uniform_box(2, 1.0),
            recon_loss: ReconLoss::Squared,
            optimizer: OptimizerKind::rmsprop(),
            learning_rate: 1e-3,
            seed: RngSeed(0),
            eval_interval: 100,
            eval_projections: 200,
            patience: 0,
            hidden: vec![64, 64],
            hidden_activation: Activation::LeakyRelu(0.2),
            encoder_output: Activation::Identity,
            decoder_output: Activation::Identity,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return invalid(format!("lambda must be >= 0, got {}", self.lambda));
        }
        for (name, v) in [
            ("num_projections", self.num_projections),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("latent_dim", self.latent_dim),
            ("eval_interval", self.eval_interval),
            ("eval_projections", self.eval_projections),
        ] {
            if v == 0 {
                return invalid(format!("{name} must be at least 1"));
            }
        }
        if self.hidden.contains(&0) {
            return invalid("hidden layer widths must be positive");
        }
        self.prior.validate()?;
        if self.prior.dim != self.latent_dim {
            return Err(Error::DimensionMismatch {
                context: "prior dimension vs latent_dim",
                expected: self.latent_dim,
                actual: self.prior.dim,
            });
        }
        if self.recon_loss.needs_unit_interval() && self.decoder_output != Activation::Sigmoid {
            return invalid(format!(
                "{} reconstruction needs a sigmoid decoder output",
                self.recon_loss
            ));
        }
        for a in [
            self.hidden_activation,
            self.encoder_output,
            self.decoder_output,
        ] {
            a.validate()?;
        }
        OptimizerState::<f64>::new(self.optimizer, self.learning_rate)?;
        Ok(())
    }

    pub fn encoder_sizes(&self, data_dim: usize) -> Vec<usize> {
        let mut s = vec![data_dim];
        s.extend(&self.hidden);
        s.push(self.latent_dim);
        s
    }

    pub fn decoder_sizes(&self, data_dim: usize) -> Vec<usize> {
        let mut s = vec![self.latent_dim];
        s.extend(self.hidden.iter().rev());
        s.push(data_dim);
        s
    }
}

/// Terms of the objective for one step, evaluated before the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub step: usize,
    pub recon: f64,
    /// Latent sliced-Wasserstein term, before weighting by lambda.
    pub sw: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub sw_latent: f64,
    pub recon_cost: f64,
    /// Fraction of an 8x8 partition of the prior's bounding box hit by at
    /// least one encoded point; only defined for 2D latents.
    pub grid_occupancy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    /// Number of parameter updates applied before this evaluation.
    pub step: usize,
    pub metrics: EvalMetrics,
}

#[derive(Debug, Clone)]
pub struct TrainRecord<T> {
    pub losses: Vec<LossReport>,
    pub evals: Vec<EvalRecord>,
    /// Wall-clock duration of each step in milliseconds.
    pub step_millis: Vec<u64>,
    pub encoder: DenseNetwork<T>,
    pub decoder: DenseNetwork<T>,
    pub stopped_early: bool,
}

/// Progress notifications emitted while training.
#[derive(Debug, Clone, Copy)]
pub enum TrainEvent<'a> {
    Step { report: &'a LossReport, millis: u64 },
    Eval(&'a EvalRecord),
}

/// Encoder, decoder and their optimizer states.
#[derive(Debug, Clone)]
pub struct SwaeModel<T> {
    pub encoder: DenseNetwork<T>,
    pub decoder: DenseNetwork<T>,
    pub encoder_opt: OptimizerState<T>,
    pub decoder_opt: OptimizerState<T>,
}

impl<T: Scalar> SwaeModel<T> {
    /// Freshly initialized networks for data of dimension `data_dim`.
    pub fn init(config: &TrainConfig, data_dim: usize) -> Result<Self> {
        config.validate()?;
        let mut rng = config.seed.stream(streams::INIT);
        let enc_sizes = config.encoder_sizes(data_dim);
        let mut enc_acts = vec![config.hidden_activation; config.hidden.len()];
        enc_acts.push(config.encoder_output);
        let dec_sizes = config.decoder_sizes(data_dim);
        let mut dec_acts = vec![config.hidden_activation; config.hidden.len()];
        dec_acts.push(config.decoder_output);
        let encoder = init_network(&enc_sizes, &enc_acts, &mut rng)?;
        let decoder = init_network(&dec_sizes, &dec_acts, &mut rng)?;
        Self::from_networks(encoder, decoder, config)
    }

    pub fn from_networks(
        encoder: DenseNetwork<T>,
        decoder: DenseNetwork<T>,
        config: &TrainConfig,
    ) -> Result<Self> {
        if encoder.out_dim() != decoder.in_dim() {
            return Err(Error::DimensionMismatch {
                context: "encoder output vs decoder input",
                expected: encoder.out_dim(),
                actual: decoder.in_dim(),
            });
        }
        if encoder.in_dim() != decoder.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "decoder output vs data dimension",
                expected: encoder.in_dim(),
                actual: decoder.out_dim(),
            });
        }
        Ok(Self {
            encoder,
            decoder,
            encoder_opt: OptimizerState::new(config.optimizer, config.learning_rate)?,
            decoder_opt: OptimizerState::new(config.optimizer, config.learning_rate)?,
        })
    }
}

/// Generators consumed by [`train_step`].
#[derive(Debug, Clone)]
pub struct StepRngs {
    pub prior: ChaCha8Rng,
    pub projections: ChaCha8Rng,
}

impl StepRngs {
    pub fn from_seed(seed: RngSeed) -> Self {
        Self {
            prior: seed.stream(streams::PRIOR),
            projections: seed.stream(streams::PROJECTIONS),
        }
    }
}

/// Prior sample and projection directions used by one step.
#[derive(Debug, Clone)]
pub struct StepSamples<T> {
    pub prior: PointCloud<T>,
    pub thetas: ProjectionSet<T>,
}

/// Draws `m` prior points and `L` directions, in that order, from `rngs`.
pub fn draw_step_samples<T: Scalar>(
    config: &TrainConfig,
    m: usize,
    rngs: &mut StepRngs,
) -> Result<StepSamples<T>> {
    Ok(StepSamples {
        prior: sample_prior(&config.prior, m, &mut rngs.prior)?,
        thetas: sample_unit_sphere(
            config.num_projections,
            config.latent_dim,
            &mut rngs.projections,
        )?,
    })
}

/// Objective value and parameter gradients for fixed step samples.
#[derive(Debug, Clone)]
pub struct ObjectiveEval<T> {
    pub recon: T,
    pub sw: T,
    pub total: T,
    pub encoder_grads: GradientSet<T>,
    pub decoder_grads: GradientSet<T>,
}

/// Evaluates the objective and its gradient on one batch.
///
/// With `samples = None` only the reconstruction term is formed (plain
/// autoencoder). With `lambda = 0` the latent term is reported but adds
/// nothing to the gradient.
pub fn swae_objective<T: Scalar>(
    encoder: &DenseNetwork<T>,
    decoder: &DenseNetwork<T>,
    batch: &PointCloud<T>,
    samples: Option<&StepSamples<T>>,
    lambda: f64,
    recon_loss: ReconLoss,
) -> Result<ObjectiveEval<T>> {
    if batch.d() != encoder.in_dim() {
        return Err(Error::DimensionMismatch {
            context: "batch width vs encoder input",
            expected: encoder.in_dim(),
            actual: batch.d(),
        });
    }
    let (latent, enc_cache) = encoder.forward(batch.points())?;
    let (recon_out, dec_cache) = decoder.forward(&latent)?;
    let (recon, d_recon) = recon_loss_and_grad(batch.points(), &recon_out, recon_loss)?;
    let (decoder_grads, mut d_latent) = decoder.backward(&dec_cache, &d_recon)?;

    let lambda_t = T::of(lambda);
    let mut sw = T::zero();
    if let Some(s) = samples {
        let z = PointCloud::new(latent)?;
        sw = sliced_wasserstein(&z, &s.prior, &s.thetas, CostExponent::Two)?;
        if lambda != 0.0 {
            let g = sliced_wasserstein_gradient(&z, &s.prior, &s.thetas, CostExponent::Two)?;
            d_latent.axpy(lambda_t, &g);
        }
    }
    let (encoder_grads, _) = encoder.backward(&enc_cache, &d_latent)?;
    Ok(ObjectiveEval {
        recon,
        sw,
        total: recon + lambda_t * sw,
        encoder_grads,
        decoder_grads,
    })
}

/// One update of both networks. Returns the objective terms evaluated before
/// the update.
pub fn train_step<T: Scalar>(
    model: &mut SwaeModel<T>,
    batch: &PointCloud<T>,
    config: &TrainConfig,
    rngs: &mut StepRngs,
    step: usize,
) -> Result<LossReport> {
    let wrap = |e: Error| Error::Step {
        step,
        source: Box::new(e),
    };
    if batch.n() != config.batch_size {
        return Err(wrap(Error::CountMismatch {
            context: "batch size",
            left: batch.n(),
            right: config.batch_size,
        }));
    }
    if model.encoder.out_dim() != config.latent_dim {
        return Err(wrap(Error::DimensionMismatch {
            context: "encoder output vs latent_dim",
            expected: config.latent_dim,
            actual: model.encoder.out_dim(),
        }));
    }
    let samples = draw_step_samples(config, batch.n(), rngs).map_err(wrap)?;
    apply_objective(model, batch, Some(&samples), config, step).map_err(wrap)
}

fn apply_objective<T: Scalar>(
    model: &mut SwaeModel<T>,
    batch: &PointCloud<T>,
    samples: Option<&StepSamples<T>>,
    config: &TrainConfig,
    step: usize,
) -> Result<LossReport> {
    let eval = swae_objective(
        &model.encoder,
        &model.decoder,
        batch,
        samples,
        config.lambda,
        config.recon_loss,
    )?;
    if !eval.total.is_finite() {
        return Err(Error::NonFinite(format!(
            "loss (recon = {}, sw = {})",
            eval.recon, eval.sw
        )));
    }
    model
        .encoder_opt
        .step(&mut model.encoder, &eval.encoder_grads)?;
    model
        .decoder_opt
        .step(&mut model.decoder, &eval.decoder_grads)?;
    Ok(LossReport {
        step,
        recon: eval.recon.as_f64(),
        sw: eval.sw.as_f64(),
        total: eval.total.as_f64(),
    })
}

/// Held-out diagnostics: latent sliced-Wasserstein distance to a fresh prior
/// sample of equal size, paired squared reconstruction cost, and (for 2D
/// latents) 8x8 grid occupancy of the prior's bounding box.
pub fn evaluate<T: Scalar, R: rand::Rng + ?Sized>(
    encoder: &DenseNetwork<T>,
    decoder: &DenseNetwork<T>,
    data: &PointCloud<T>,
    prior: &PriorSpec,
    l_eval: usize,
    rng: &mut R,
) -> Result<EvalMetrics> {
    if prior.dim != encoder.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "prior dimension vs encoder output",
            expected: encoder.out_dim(),
            actual: prior.dim,
        });
    }
    let latent = PointCloud::new(encoder.predict(data.points())?)?;
    let recon = PointCloud::new(decoder.predict(latent.points())?)?;
    let reference = sample_prior(prior, data.n(), rng)?;
    let thetas = sample_unit_sphere(l_eval, prior.dim, rng)?;
    let sw_latent = sliced_wasserstein(&latent, &reference, &thetas, CostExponent::Two)?;
    let recon_cost = reconstruction_cost(data, &recon, CostExponent::Two)?;
    let grid_occupancy = (prior.dim == 2).then(|| {
        let (lo, hi) = prior.bounding_box();
        grid_occupancy(&latent, lo, hi, 8)
    });
    Ok(EvalMetrics {
        sw_latent: sw_latent.as_f64(),
        recon_cost: recon_cost.as_f64(),
        grid_occupancy,
    })
}

/// Fraction of the `cells x cells` partition of `[lo, hi]^2` containing at
/// least one point. Points outside the box are ignored.
pub fn grid_occupancy<T: Scalar>(cloud: &PointCloud<T>, lo: f64, hi: f64, cells: usize) -> f64 {
    let mut hit = vec![false; cells * cells];
    let width = (hi - lo) / cells as f64;
    let cell = |v: f64| -> Option<usize> {
        if !(lo..=hi).contains(&v) {
            return None;
        }
        Some((((v - lo) / width) as usize).min(cells - 1))
    };
    for i in 0..cloud.n() {
        let p = cloud.point(i);
        if let (Some(cx), Some(cy)) = (cell(p[0].as_f64()), cell(p[1].as_f64())) {
            hit[cy * cells + cx] = true;
        }
    }
    hit.iter().filter(|&&h| h).count() as f64 / hit.len() as f64
}

/// Decodes the regular `n x n` lattice over `[lo, hi]^2`. Rows are ordered
/// with the second latent coordinate outermost: row `i * n + j` decodes
/// `(c_j, c_i)`. A single-point lattice sits at the box center.
pub fn latent_grid_decode<T: Scalar>(
    decoder: &DenseNetwork<T>,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<PointCloud<T>> {
    if decoder.in_dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "latent grid decoding needs a 2D latent",
            expected: 2,
            actual: decoder.in_dim(),
        });
    }
    if n == 0 {
        return Err(Error::Empty("latent grid"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return invalid(format!("grid box must satisfy lo < hi, got [{lo}, {hi}]"));
    }
    let coord = |k: usize| -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut grid = Matrix::zeros(n * n, 2);
    for i in 0..n {
        for j in 0..n {
            let r = grid.row_mut(i * n + j);
            r[0] = T::of(coord(j));
            r[1] = T::of(coord(i));
        }
    }
    PointCloud::new(decoder.predict(&grid)?)
}

/// Which objective the loop optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Swae,
    /// Reconstruction only; never touches the prior or projection streams.
    PlainAutoencoder,
}

/// Trains on `data`, evaluating on `data` itself.
pub fn train<T: Scalar>(data: &PointCloud<T>, config: &TrainConfig) -> Result<TrainRecord<T>> {
    train_with_holdout(data, data, config, |_| {})
}

/// Trains on `data` and evaluates on `heldout`, reporting progress to `observer`.
pub fn train_with_holdout<T: Scalar>(
    data: &PointCloud<T>,
    heldout: &PointCloud<T>,
    config: &TrainConfig,
    observer: impl FnMut(TrainEvent<'_>),
) -> Result<TrainRecord<T>> {
    run(data, heldout, config, Mode::Swae, observer)
}

/// Same loop with the latent term removed entirely: a plain autoencoder
/// sharing the initialization and batch order of [`train_with_holdout`].
pub fn train_plain_autoencoder<T: Scalar>(
    data: &PointCloud<T>,
    heldout: &PointCloud<T>,
    config: &TrainConfig,
    observer: impl FnMut(TrainEvent<'_>),
) -> Result<TrainRecord<T>> {
    run(data, heldout, config, Mode::PlainAutoencoder, observer)
}

fn run<T: Scalar>(
    data: &PointCloud<T>,
    heldout: &PointCloud<T>,
    config: &TrainConfig,
    mode: Mode,
    mut observer: impl FnMut(TrainEvent<'_>),
) -> Result<TrainRecord<T>> {
    config.validate()?;
    if heldout.d() != data.d() {
        return Err(Error::DimensionMismatch {
            context: "held-out data width",
            expected: data.d(),
            actual: heldout.d(),
        });
    }
    let batcher = Minibatcher::new(data.n(), config.batch_size)?;
    let mut model = SwaeModel::init(config, data.d())?;
    let mut shuffle = config.seed.stream(streams::SHUFFLE);
    let mut step_rngs = StepRngs::from_seed(config.seed);
    let mut eval_rng = config.seed.stream(streams::EVAL);

    let mut losses = Vec::new();
    let mut evals: Vec<EvalRecord> = Vec::new();
    let mut step_millis = Vec::new();
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    let mut stopped_early = false;

    let mut do_eval = |model: &SwaeModel<T>,
                       step: usize,
                       evals: &mut Vec<EvalRecord>,
                       observer: &mut dyn FnMut(TrainEvent<'_>)|
     -> Result<f64> {
        let metrics = evaluate(
            &model.encoder,
            &model.decoder,
            heldout,
            &config.prior,
            config.eval_projections,
            &mut eval_rng,
        )?;
        let record = EvalRecord { step, metrics };
        observer(TrainEvent::Eval(&record));
        evals.push(record);
        Ok(metrics.sw_latent)
    };

    do_eval(&model, 0, &mut evals, &mut observer)?;
    let mut step = 0usize;
    'epochs: for _ in 0..config.epochs {
        for indices in batcher.epoch(&mut shuffle) {
            let started = Instant::now();
            let batch = data.select(&indices)?;
            let report = match mode {
                Mode::Swae => train_step(&mut model, &batch, config, &mut step_rngs, step)?,
                Mode::PlainAutoencoder => apply_objective(&mut model, &batch, None, config, step)
                    .map_err(|e| Error::Step {
                    step,
                    source: Box::new(e),
                })?,
            };
            let millis = started.elapsed().as_millis() as u64;
            observer(TrainEvent::Step {
                report: &report,
                millis,
            });
            losses.push(report);
            step_millis.push(millis);
            step += 1;

            if step.is_multiple_of(config.eval_interval) {
                let sw = do_eval(&model, step, &mut evals, &mut observer)?;
                if config.patience > 0 {
                    if sw < best {
                        best = sw;
                        since_best = 0;
                    } else {
                        since_best += 1;
                        if since_best >= config.patience {
                            stopped_early = true;
                            break 'epochs;
                        }
                    }
                }
            }
        }
    }
    if evals.last().map(|e| e.step) != Some(step) {
        do_eval(&model, step, &mut evals, &mut observer)?;
    }
    Ok(TrainRecord {
        losses,
        evals,
        step_millis,
        encoder: model.encoder,
        decoder: model.decoder,
        stopped_early,
    })
}
