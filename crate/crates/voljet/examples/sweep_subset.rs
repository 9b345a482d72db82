//! Runs a three-model subset of the activation/width/depth sweep with a
//! shortened schedule and prints the comparison table.
//!
//! Run with: `cargo run --release --example sweep_subset`

use voljet::market::dataset::{generate_dataset, GridSpec};
use voljet::market::lb::LbTermStructure;
use voljet::sweep::{run_sweep, SweepSpec};
use voljet::training::TrainConfig;

fn main() -> voljet::Result<()> {
    let ts = LbTermStructure::reference();
    let train_grid = GridSpec {
        tau_min: 0.25,
        tau_max: 2.0,
        tau_step: 0.25,
        kappa_min: -1.0,
        kappa_max: 1.0,
        kappa_step: 0.04,
    };
    let valid_grid = GridSpec {
        tau_min: 0.25,
        tau_max: 2.0,
        tau_step: 0.125,
        kappa_min: -1.0,
        kappa_max: 1.0,
        kappa_step: 0.02,
    };
    let train_set = generate_dataset(&train_grid, &ts)?;
    let valid_set = generate_dataset(&valid_grid, &ts)?;

    let config = TrainConfig {
        epochs: 400,
        master_seed: 42,
        ..TrainConfig::default()
    };
    let spec = SweepSpec::full(config);
    let subset = vec![
        "relu2-128x1".to_string(),
        "relu-64x3".to_string(),
        "tanh-64x2".to_string(),
    ];
    let out = std::env::temp_dir().join("voljet-sweep-subset");
    let report = run_sweep(&spec, Some(&subset), &train_set, &valid_set, &ts, &out)?;

    println!("{:<14} {:>12} {:>12} {:>12} {:>12} {:>10}", "model", "P train bps", "P valid bps", "D train bps", "D valid bps", "converged");
    for m in &report.models {
        println!(
            "{:<14} {:>12.2} {:>12.2} {:>12.2} {:>12.2} {:>10}",
            m.name, m.train_price_bps, m.valid_price_bps, m.train_density_bps, m.valid_density_bps, m.converged
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
