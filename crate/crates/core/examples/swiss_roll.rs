//! Trains the reference swiss-roll configuration and prints held-out metrics.
//!
//! `cargo run --release -p swae --example swiss_roll -- [epochs] [seed]`

use swae::sampling::sample_swiss_roll;
use swae::train::{streams, train_with_holdout, TrainEvent};
use swae::{RngSeed, TrainConfig};

fn main() -> swae::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let seed = RngSeed(args.next().and_then(|a| a.parse().ok()).unwrap_or(0));
    let config = TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    };
    let data = sample_swiss_roll::<f64, _>(5000, 0.0, &mut seed.stream(streams::DATA))?.cloud;
    let heldout = sample_swiss_roll::<f64, _>(2000, 0.0, &mut seed.stream(streams::HELDOUT))?.cloud;
    let started = std::time::Instant::now();
    let record = train_with_holdout(&data, &heldout, &config, |ev| {
        if let TrainEvent::Eval(e) = ev {
            println!(
                "step {:>5}  sw_latent {:.5}  recon {:.5}  occupancy {:?}",
                e.step, e.metrics.sw_latent, e.metrics.recon_cost, e.metrics.grid_occupancy
            );
        }
    })?;
    println!("{} steps in {:.1?}", record.losses.len(), started.elapsed());
    Ok(())
}
