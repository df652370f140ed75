use rand::Rng;
use swae::nn::{Activation, DenseLayer, DenseNetwork, OptimizerKind};
use swae::ot::{sliced_wasserstein, CostExponent};
use swae::sampling::{sample_prior, sample_swiss_roll, sample_unit_sphere};
use swae::train::{
    draw_step_samples, evaluate, latent_grid_decode, streams, swae_objective, train,
    train_plain_autoencoder, train_step, train_with_holdout, StepRngs, SwaeModel,
};
use swae::{Error, Matrix, PointCloud, PriorSpec, RngSeed, TrainConfig};

fn identity_net(d: usize) -> DenseNetwork<f64> {
    DenseNetwork::new(vec![DenseLayer {
        weights: Matrix::identity(d),
        bias: vec![0.0; d],
        activation: Activation::Identity,
    }])
    .unwrap()
}

fn tiny_config() -> TrainConfig {
    TrainConfig {
        batch_size: 4,
        num_projections: 3,
        hidden: vec![5],
        epochs: 2,
        eval_interval: 1,
        eval_projections: 20,
        ..TrainConfig::default()
    }
}

fn tiny_data(seed: u64, n: usize) -> PointCloud<f64> {
    sample_swiss_roll(n, 0.0, &mut RngSeed(seed).stream(streams::DATA))
        .unwrap()
        .cloud
}

/// Straight-line evaluation of the objective: plain loops over the raw
/// parameters, with each slice sorted by value.
fn straight_line_objective(
    enc: &DenseNetwork<f64>,
    dec: &DenseNetwork<f64>,
    x: &PointCloud<f64>,
    prior: &PointCloud<f64>,
    thetas: &[Vec<f64>],
    lambda: f64,
) -> (f64, f64, f64) {
    fn run(net: &DenseNetwork<f64>, input: &[f64]) -> Vec<f64> {
        let mut v = input.to_vec();
        for layer in net.layers() {
            let mut out = vec![0.0; layer.out_dim()];
            for (o, slot) in out.iter_mut().enumerate() {
                let mut s = layer.bias[o];
                for (i, vi) in v.iter().enumerate() {
                    s += layer.weights[(o, i)] * vi;
                }
                *slot = match layer.activation {
                    Activation::Identity => s,
                    Activation::Relu => s.max(0.0),
                    Activation::LeakyRelu(a) => {
                        if s >= 0.0 {
                            s
                        } else {
                            a * s
                        }
                    }
                    Activation::Sigmoid => 1.0 / (1.0 + (-s).exp()),
                };
            }
            v = out;
        }
        v
    }
    let m = x.n();
    let mut recon = 0.0;
    let mut latent = Vec::new();
    for i in 0..m {
        let z = run(enc, x.point(i));
        let y = run(dec, &z);
        recon += x
            .point(i)
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        latent.push(z);
    }
    recon /= m as f64;
    let mut sw = 0.0;
    for theta in thetas {
        let dotp = |p: &[f64]| p.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
        let mut pz: Vec<f64> = latent.iter().map(|z| dotp(z)).collect();
        let mut pq: Vec<f64> = (0..m).map(|i| dotp(prior.point(i))).collect();
        pz.sort_by(f64::total_cmp);
        pq.sort_by(f64::total_cmp);
        sw += pz
            .iter()
            .zip(&pq)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    sw /= (thetas.len() * m) as f64;
    (recon, sw, recon + lambda * sw)
}

#[test]
fn report_matches_straight_line_recomputation() {
    let config = tiny_config();
    let data = tiny_data(1, 4);
    for seed in 0..10u64 {
        let cfg = TrainConfig {
            seed: RngSeed(seed),
            ..config.clone()
        };
        let mut model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
        let before = model.clone();
        let mut rngs = StepRngs::from_seed(cfg.seed);
        let samples = draw_step_samples::<f64>(&cfg, 4, &mut rngs.clone()).unwrap();
        let report = train_step(&mut model, &data, &cfg, &mut rngs, 0).unwrap();
        let thetas: Vec<Vec<f64>> = samples.thetas.iter().map(<[f64]>::to_vec).collect();
        let (recon, sw, total) = straight_line_objective(
            &before.encoder,
            &before.decoder,
            &data,
            &samples.prior,
            &thetas,
            cfg.lambda,
        );
        assert!((report.recon - recon).abs() < 1e-12);
        assert!((report.sw - sw).abs() < 1e-12);
        assert!((report.total - total).abs() < 1e-12);
        assert_eq!(report.total, report.recon + cfg.lambda * report.sw);
        assert_ne!(model.encoder, before.encoder);
    }
}

#[test]
fn lambda_zero_total_is_reconstruction() {
    let cfg = TrainConfig {
        lambda: 0.0,
        ..tiny_config()
    };
    let data = tiny_data(2, 4);
    let mut model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
    let report = train_step(
        &mut model,
        &data,
        &cfg,
        &mut StepRngs::from_seed(cfg.seed),
        0,
    )
    .unwrap();
    assert_eq!(report.total, report.recon);
    assert!(report.sw > 0.0);
}

#[test]
fn identity_autoencoder_has_zero_reconstruction() {
    let cfg = TrainConfig {
        batch_size: 6,
        ..TrainConfig::default()
    };
    let data: PointCloud<f64> = sample_prior(&cfg.prior, 6, &mut RngSeed(3).stream(0)).unwrap();
    let mut model = SwaeModel::from_networks(identity_net(2), identity_net(2), &cfg).unwrap();
    let report = train_step(
        &mut model,
        &data,
        &cfg,
        &mut StepRngs::from_seed(cfg.seed),
        0,
    )
    .unwrap();
    assert_eq!(report.recon, 0.0);
}

#[test]
fn full_objective_gradient_matches_finite_differences() {
    let eps = 1e-5;
    let mut rng = RngSeed(300).stream(0);
    let mut checked = 0;
    let mut attempt = 0u64;
    while checked < 20 {
        attempt += 1;
        let cfg = TrainConfig {
            seed: RngSeed(attempt),
            lambda: rng.random_range(0.5..20.0),
            ..tiny_config()
        };
        let model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
        let data = tiny_data(attempt, 4);
        let samples =
            draw_step_samples::<f64>(&cfg, 4, &mut StepRngs::from_seed(cfg.seed)).unwrap();
        let latent = PointCloud::new(model.encoder.predict(data.points()).unwrap()).unwrap();
        let mut gap = f64::INFINITY;
        for theta in samples.thetas.iter() {
            let mut p = swae::ot::project(&latent, theta).unwrap();
            p.sort_by(f64::total_cmp);
            p.windows(2).for_each(|w| gap = gap.min(w[1] - w[0]));
        }
        if gap < 1e-3 {
            continue;
        }
        let eval = swae_objective(
            &model.encoder,
            &model.decoder,
            &data,
            Some(&samples),
            cfg.lambda,
            cfg.recon_loss,
        )
        .unwrap();
        let loss = |enc: &DenseNetwork<f64>, dec: &DenseNetwork<f64>| {
            swae_objective(enc, dec, &data, Some(&samples), cfg.lambda, cfg.recon_loss)
                .unwrap()
                .total
        };
        let mut analytic = eval.encoder_grads.flat();
        analytic.extend(eval.decoder_grads.flat());
        let mut fd = Vec::new();
        for which in 0..2 {
            let net = if which == 0 {
                &model.encoder
            } else {
                &model.decoder
            };
            for k in 0..net.layers().len() {
                let nw = net.layers()[k].weights.as_slice().len();
                for idx in 0..nw + net.layers()[k].bias.len() {
                    let f = |delta: f64| {
                        let mut n2 = net.clone();
                        let l = &mut n2.layers_mut()[k];
                        if idx < nw {
                            l.weights.as_mut_slice()[idx] += delta;
                        } else {
                            l.bias[idx - nw] += delta;
                        }
                        if which == 0 {
                            loss(&n2, &model.decoder)
                        } else {
                            loss(&model.encoder, &n2)
                        }
                    };
                    fd.push((f(eps) - f(-eps)) / (2.0 * eps));
                }
            }
        }
        let err: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / scale < 1e-3, "relative error {}", err / scale);
        checked += 1;
    }
}

#[test]
fn sw_term_decomposes_over_directions() {
    let cfg = tiny_config();
    let model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
    let data = tiny_data(4, 4);
    let samples = draw_step_samples::<f64>(&cfg, 4, &mut StepRngs::from_seed(cfg.seed)).unwrap();
    let full = swae_objective(
        &model.encoder,
        &model.decoder,
        &data,
        Some(&samples),
        1.0,
        cfg.recon_loss,
    )
    .unwrap();
    let latent = PointCloud::new(model.encoder.predict(data.points()).unwrap()).unwrap();
    let per: f64 = samples
        .thetas
        .iter()
        .map(|t| {
            let one = swae::ProjectionSet::from_rows(&[t.to_vec()]).unwrap();
            sliced_wasserstein(&latent, &samples.prior, &one, CostExponent::Two).unwrap()
        })
        .sum::<f64>()
        / samples.thetas.len() as f64;
    assert!((full.sw - per).abs() < 1e-12);
}

#[test]
fn training_is_deterministic() {
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 10,
        hidden: vec![8],
        ..tiny_config()
    };
    let data = tiny_data(5, 40);
    let a = train(&data, &cfg).unwrap();
    let b = train(&data, &cfg).unwrap();
    assert_eq!(a.losses, b.losses);
    assert_eq!(a.evals, b.evals);
    assert_eq!(a.encoder, b.encoder);
    assert_eq!(a.decoder, b.decoder);
    assert_eq!(a.losses.len(), 12);
    assert!(a.losses.windows(2).all(|w| w[1].step == w[0].step + 1));
}

#[test]
fn single_epoch_full_batch_is_one_step() {
    let cfg = TrainConfig {
        epochs: 1,
        batch_size: 16,
        eval_interval: 100,
        ..tiny_config()
    };
    let data = tiny_data(6, 16);
    let rec = train(&data, &cfg).unwrap();
    assert_eq!(rec.losses.len(), 1);
    // evaluated before the first and after the last step
    assert_eq!(
        rec.evals.iter().map(|e| e.step).collect::<Vec<_>>(),
        vec![0, 1]
    );
}

#[test]
fn lambda_zero_matches_plain_autoencoder_bitwise() {
    let cfg = TrainConfig {
        lambda: 0.0,
        epochs: 3,
        batch_size: 10,
        hidden: vec![8],
        ..tiny_config()
    };
    let data = tiny_data(7, 50);
    let swae = train_with_holdout(&data, &data, &cfg, |_| {}).unwrap();
    let plain = train_plain_autoencoder(&data, &data, &cfg, |_| {}).unwrap();
    assert_eq!(swae.encoder, plain.encoder);
    assert_eq!(swae.decoder, plain.decoder);
    for (a, b) in swae.losses.iter().zip(&plain.losses) {
        assert_eq!(a.recon.to_bits(), b.recon.to_bits());
    }
    // and a nonzero lambda does move the trajectory
    let cfg1 = TrainConfig { lambda: 1.0, ..cfg };
    let moved = train_with_holdout(&data, &data, &cfg1, |_| {}).unwrap();
    assert_ne!(moved.encoder, plain.encoder);
}

#[test]
fn early_stopping_respects_patience() {
    let cfg = TrainConfig {
        epochs: 50,
        batch_size: 10,
        hidden: vec![4],
        learning_rate: 1e-9,
        optimizer: OptimizerKind::Sgd,
        patience: 2,
        ..tiny_config()
    };
    let data = tiny_data(8, 20);
    let rec = train(&data, &cfg).unwrap();
    assert!(rec.stopped_early);
    assert!(rec.losses.len() < 100);
}

#[test]
fn latent_grid_decoding() {
    let dec: DenseNetwork<f64> = identity_net(2);
    let grid = latent_grid_decode(&dec, 25, -1.0, 1.0).unwrap();
    assert_eq!(grid.n(), 625);
    assert_eq!(grid.point(0), &[-1.0, -1.0]);
    assert_eq!(grid.point(1), &[-1.0 + 2.0 / 24.0, -1.0]);
    assert_eq!(grid.point(624), &[1.0, 1.0]);
    let center = latent_grid_decode(&dec, 1, -1.0, 1.0).unwrap();
    assert_eq!(center.point(0), &[0.0, 0.0]);

    let constant = DenseNetwork::new(vec![DenseLayer {
        weights: Matrix::zeros(3, 2),
        bias: vec![0.5, -1.0, 2.0],
        activation: Activation::Identity,
    }])
    .unwrap();
    let out = latent_grid_decode(&constant, 5, -1.0, 1.0).unwrap();
    assert!((0..out.n()).all(|i| out.point(i) == [0.5, -1.0, 2.0]));
    assert!(latent_grid_decode(&identity_net(3), 5, -1.0, 1.0).is_err());
}

#[test]
fn evaluation_diagnostics() {
    let prior = PriorSpec::uniform_box(2, 1.0);
    let data: PointCloud<f64> = sample_prior(&prior, 2000, &mut RngSeed(9).stream(0)).unwrap();
    let id = identity_net(2);
    let m = evaluate(&id, &id, &data, &prior, 100, &mut RngSeed(9).stream(1)).unwrap();
    assert_eq!(m.recon_cost, 0.0);
    assert_eq!(m.grid_occupancy, Some(1.0));

    // noise floor: SW between two independent prior samples of the same size
    let mut rng = RngSeed(9).stream(2);
    let mut floor = 0.0;
    for _ in 0..5 {
        let a: PointCloud<f64> = sample_prior(&prior, 2000, &mut rng).unwrap();
        let b: PointCloud<f64> = sample_prior(&prior, 2000, &mut rng).unwrap();
        let t = sample_unit_sphere(100, 2, &mut rng).unwrap();
        floor += sliced_wasserstein(&a, &b, &t, CostExponent::Two).unwrap() / 5.0;
    }
    assert!(
        m.sw_latent < 5.0 * floor,
        "{} vs floor {floor}",
        m.sw_latent
    );

    // an untrained encoder squeezes the data into a small blob
    let cfg = TrainConfig::default();
    let model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
    let roll = tiny_data(10, 2000);
    let m = evaluate(&model.encoder, &model.decoder, &roll, &prior, 100, &mut rng).unwrap();
    assert!(m.grid_occupancy.unwrap() < 0.5);
    assert!(m.sw_latent > 20.0 * floor);
}

#[test]
fn errors_carry_step_context() {
    let cfg = tiny_config();
    let data = tiny_data(11, 4);
    let mut model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
    for layer in model.decoder.layers_mut() {
        layer
            .weights
            .as_mut_slice()
            .iter_mut()
            .for_each(|w| *w = 1e200);
    }
    let err = train_step(
        &mut model,
        &data,
        &cfg,
        &mut StepRngs::from_seed(cfg.seed),
        7,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Step { step: 7, .. }), "{err}");

    let wrong = tiny_data(11, 5);
    let mut model: SwaeModel<f64> = SwaeModel::init(&cfg, 3).unwrap();
    assert!(train_step(
        &mut model,
        &wrong,
        &cfg,
        &mut StepRngs::from_seed(cfg.seed),
        0
    )
    .is_err());
}

#[test]
fn config_validation() {
    let ok = TrainConfig::default();
    assert!(ok.validate().is_ok());
    let bad = [
        TrainConfig {
            lambda: -1.0,
            ..ok.clone()
        },
        TrainConfig {
            num_projections: 0,
            ..ok.clone()
        },
        TrainConfig {
            latent_dim: 3,
            ..ok.clone()
        },
        TrainConfig {
            recon_loss: swae::nn::ReconLoss::Bce,
            ..ok.clone()
        },
        TrainConfig {
            learning_rate: 0.0,
            ..ok.clone()
        },
        TrainConfig {
            hidden: vec![0],
            ..ok.clone()
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
    let data = tiny_data(12, 10);
    assert!(train(
        &data,
        &TrainConfig {
            batch_size: 11,
            ..tiny_config()
        }
    )
    .is_err());
}

#[test]
fn f32_training_runs() {
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 10,
        hidden: vec![8],
        ..tiny_config()
    };
    let data = tiny_data(13, 30).cast::<f32>();
    let rec = train(&data, &cfg).unwrap();
    assert_eq!(rec.losses.len(), 6);
    assert!(rec.losses.iter().all(|l| l.total.is_finite()));
}
