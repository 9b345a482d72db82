//! Recovers the implied risk-neutral density from a fitted volatility
//! network via the corrector formulas and compares it to the analytic
//! market density at one tenor.
//!
//! Run with: `cargo run --release --example density_recovery`

use voljet::market::dataset::{generate_dataset, GridSpec};
use voljet::market::lb::{lb_pdf, term_structure_eval, LbTermStructure};
use voljet::neural::{ActivationKind, VolNetwork};
use voljet::parity::{correctors, implied_pdf, SurfaceJet};
use voljet::training::{train, TrainConfig};

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

    let config = TrainConfig {
        epochs: 300,
        master_seed: 3,
        ..TrainConfig::default()
    };
    let net = VolNetwork::he_uniform(ActivationKind::Relu2, &[128], config.master_seed)?;
    let (net, _) = train(net, &config, &dataset, &ts)?;

    let tau = 1.0;
    let marginal = term_structure_eval(tau, &ts)?;
    println!("{:>6} {:>12} {:>12} {:>10} {:>10}", "kappa", "psi_hat", "psi_market", "zeta", "xi");
    let mut mass = 0.0;
    for i in 0..=40 {
        let kappa = -1.0 + i as f64 * 0.05;
        let j = net.forward_jet(tau, kappa)?;
        let jet = SurfaceJet::new(tau, kappa, j.omega, j.d_tau, j.d_kappa, j.d_kappa2)?;
        let psi_hat = implied_pdf(&jet);
        let c = correctors(&jet);
        mass += psi_hat * 0.05;
        if i % 4 == 0 {
            println!(
                "{kappa:>+6.2} {psi_hat:>12.6} {:>12.6} {:>+10.4} {:>10.4}",
                lb_pdf(kappa, &marginal),
                c.zeta,
                c.xi
            );
        }
    }
    println!("trapezoid mass of psi_hat on [-1, 1]: {mass:.4}");
    Ok(())
}
