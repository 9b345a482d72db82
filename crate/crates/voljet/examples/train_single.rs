//! Trains a small quadratic-ReLU network on a reduced grid and prints the
//! loss trajectory, showing arbitrage losses being driven to zero.
//!
//! Run with: `cargo run --release --example train_single`

use voljet::market::dataset::{generate_dataset, GridSpec};
use voljet::market::lb::LbTermStructure;
use voljet::neural::{ActivationKind, VolNetwork};
use voljet::training::{full_evaluation, to_bps, train, TrainConfig};

fn main() -> voljet::Result<()> {
    let ts = LbTermStructure::reference();
    let grid = GridSpec {
        tau_min: 0.2,
        tau_max: 2.0,
        tau_step: 0.2,
        kappa_min: -1.0,
        kappa_max: 1.0,
        kappa_step: 0.02,
    };
    let dataset = generate_dataset(&grid, &ts)?;
    println!("training on {} quotes", dataset.len());

    let config = TrainConfig {
        epochs: 200,
        master_seed: 7,
        snapshot_every: 50,
        ..TrainConfig::default()
    };
    let net = VolNetwork::he_uniform(ActivationKind::Relu2, &[64], config.master_seed)?;
    let (net, history) = train(net, &config, &dataset, &ts)?;

    println!("epoch-wise losses (bps):");
    for rec in history.epochs.iter().filter(|r| r.epoch % 25 == 0) {
        let b = rec.batch_avg;
        println!(
            "  epoch {:>4}: total {:>9.2}  price {:>9.2}  C {:>7.3}  V {:>7.3}  B {:>7.3}",
            rec.epoch,
            to_bps(b.total()),
            to_bps(b.price),
            to_bps(b.calendar),
            to_bps(b.vertical),
            to_bps(b.butterfly)
        );
    }
    match history.arbitrage_zero_epoch() {
        Some(e) => println!("arbitrage losses zero from epoch {e} onward"),
        None => println!("arbitrage losses never settled at zero"),
    }

    let eval = full_evaluation(&net, &dataset, &ts, config.vega_mode, config.vega_floor)?;
    println!(
        "full-dataset: price {:.2} bps, density {:.2} bps",
        to_bps(eval.price),
        to_bps(eval.density.unwrap())
    );
    Ok(())
}
