//! End-to-end acceptance suite. Each test prints one PASS/FAIL line for its
//! criterion; run with `cargo test --test acceptance -- --nocapture`.

use std::time::Instant;

use voljet::market::dataset::{generate_dataset, GridSpec};
use voljet::market::lb::{lb_moments, lb_pdf, term_structure_eval, LbTermStructure};
use voljet::neural::{ActivationKind, VolNetwork, HIDDEN_KINDS};
use voljet::parity::{arbitrage_errors, correctors, implied_pdf, parity_audit, SurfaceJet};
use voljet::quad::adaptive_quad;
use voljet::seed::SplitMix64Rng;
use voljet::sweep::run_model;
use voljet::training::{
    batch_loss_and_grad, evaluate_losses, full_evaluation, to_bps, TrainConfig, VegaWeightMode,
};

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_parity_audit() {
    let start = Instant::now();
    let ts = LbTermStructure::reference();
    let report = parity_audit(&ts, &[0.5, 1.0, 2.0], -0.8, 0.8, 0.01, 1e-4).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = report.skipped.is_empty()
        && report.max_err_pdf() <= 1e-3
        && report.max_err_cdf() <= 1e-3
        && report.max_err_calendar() <= 1e-3
        && report.err_total_vega <= 1e-7
        && report.err_pivot_identity <= 1e-7
        && elapsed <= 60.0;
    verdict(
        "1 (parity audit)",
        pass,
        &format!(
            "pdf {:.2e}, cdf {:.2e}, calendar {:.2e}, vega {:.2e}, pivot {:.2e}, {elapsed:.1}s",
            report.max_err_pdf(),
            report.max_err_cdf(),
            report.max_err_calendar(),
            report.err_total_vega,
            report.err_pivot_identity
        ),
    );
}

#[test]
fn criterion_2_martingality_and_moments() {
    let ts = LbTermStructure::reference();
    let mut worst: f64 = 0.0;
    for tau in [0.1, 0.5, 1.0, 2.0] {
        let m = term_structure_eval(tau, &ts).unwrap();
        let total = adaptive_quad(&|x: f64| lb_pdf(x, &m), -40.0, 40.0, 1e-10);
        let martingale = adaptive_quad(&|x: f64| x.exp() * lb_pdf(x, &m), -40.0, 40.0, 1e-10);
        worst = worst.max((total - 1.0).abs()).max((martingale - 1.0).abs());

        let (mean, var, skew, kurt) = lb_moments(&m);
        let q_mean = adaptive_quad(&|x: f64| x * lb_pdf(x, &m), -40.0, 40.0, 1e-10);
        let q_var = adaptive_quad(&|x: f64| (x - q_mean).powi(2) * lb_pdf(x, &m), -40.0, 40.0, 1e-10);
        let q_m3 = adaptive_quad(&|x: f64| (x - q_mean).powi(3) * lb_pdf(x, &m), -40.0, 40.0, 1e-11);
        let q_m4 = adaptive_quad(&|x: f64| (x - q_mean).powi(4) * lb_pdf(x, &m), -40.0, 40.0, 1e-11);
        worst = worst
            .max((mean - q_mean).abs())
            .max((var - q_var).abs())
            .max((skew - q_m3 / q_var.powf(1.5)).abs())
            .max((kurt - (q_m4 / (q_var * q_var) - 3.0)).abs());
    }
    verdict(
        "2 (martingality and moments)",
        worst <= 1e-6,
        &format!("max deviation from quadrature {worst:.2e}"),
    );
}

#[test]
fn criterion_3_derivative_correctness() {
    let start = Instant::now();
    let mut worst_jet: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;

    // input-derivative check over all 45 configurations
    for kind in HIDDEN_KINDS {
        for width in [32usize, 64, 128] {
            for depth in [1usize, 2, 3] {
                let seed = (width * 10 + depth) as u64;
                let net = VolNetwork::he_uniform(kind, &vec![width; depth], seed).unwrap();
                let mut rng = SplitMix64Rng::new(seed ^ 0x5bd1e995);
                let mut checked = 0;
                while checked < 5 {
                    let tau = 0.2 + rng.next_below(1500) as f64 / 1000.0;
                    let kappa = -0.9 + rng.next_below(1800) as f64 / 1000.0;
                    let jet = net.forward_jet(tau, kappa).unwrap();
                    // kink exclusion for the ReLU family: derivatives of the
                    // sampled point must be stable under a tiny shift
                    if matches!(
                        kind,
                        ActivationKind::Relu | ActivationKind::Relu2 | ActivationKind::Relu3
                    ) {
                        let shifted = net.forward_jet(tau, kappa + 2e-4).unwrap();
                        if (shifted.d_kappa2 - jet.d_kappa2).abs()
                            > 1e-2 * jet.d_kappa2.abs().max(1.0)
                        {
                            continue;
                        }
                    }
                    let f = |t: f64, k: f64| net.forward(t, k).unwrap();
                    let h = 1e-5;
                    let fd_t = (f(tau + h, kappa) - f(tau - h, kappa)) / (2.0 * h);
                    let fd_k = (f(tau, kappa + h) - f(tau, kappa - h)) / (2.0 * h);
                    let h2 = 1e-4;
                    let fd_kk =
                        (f(tau, kappa + h2) - 2.0 * f(tau, kappa) + f(tau, kappa - h2)) / (h2 * h2);
                    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-2);
                    worst_jet = worst_jet
                        .max(rel(jet.d_tau, fd_t))
                        .max(rel(jet.d_kappa, fd_k))
                        .max(rel(jet.d_kappa2, fd_kk));
                    checked += 1;
                }
            }
        }
    }

    // full-loss parameter gradient on a 10-point toy set
    let ts = LbTermStructure::reference();
    let grid = GridSpec {
        tau_min: 0.4,
        tau_max: 2.0,
        tau_step: 0.8,
        kappa_min: -0.6,
        kappa_max: 0.6,
        kappa_step: 0.4,
    };
    let quotes: Vec<_> = generate_dataset(&grid, &ts).unwrap().iter().collect();
    assert!(quotes.len() >= 10);
    for kind in HIDDEN_KINDS {
        let net = VolNetwork::he_uniform(kind, &[8], 31).unwrap();
        let (_, grads) =
            batch_loss_and_grad(&net, &quotes, VegaWeightMode::Linear, 1e-8).unwrap();
        let flat: Vec<f64> = grads.iter().copied().collect();
        let loss_of = |n: &VolNetwork| {
            evaluate_losses(n, &quotes, VegaWeightMode::Linear, 1e-8)
                .unwrap()
                .total()
        };
        let h = 1e-6;
        for i in 0..net.param_count() {
            let base = net.get_param(i);
            let mut plus = net.clone();
            plus.set_param(i, base + h);
            let mut minus = net.clone();
            minus.set_param(i, base - h);
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            worst_grad = worst_grad.max((flat[i] - fd).abs() / fd.abs().max(1e-2));
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_jet <= 1e-5 && worst_grad <= 1e-4 && elapsed <= 120.0;
    verdict(
        "3 (derivative correctness)",
        pass,
        &format!("jet rel err {worst_jet:.2e}, param grad rel err {worst_grad:.2e}, {elapsed:.1}s"),
    );
}

fn reference_datasets() -> (voljet::market::dataset::ChainDataset, voljet::market::dataset::ChainDataset)
{
    let ts = LbTermStructure::reference();
    (
        generate_dataset(&GridSpec::training(), &ts).unwrap(),
        generate_dataset(&GridSpec::validation(), &ts).unwrap(),
    )
}

#[test]
fn criterion_4_arbitrage_elimination() {
    let start = Instant::now();
    let ts = LbTermStructure::reference();
    let (train_set, valid_set) = reference_datasets();
    let config = TrainConfig {
        epochs: 300,
        master_seed: 1,
        ..TrainConfig::default()
    };
    let (net, history, _) = run_model("relu2-128x1", &config, &train_set, &train_set, &ts).unwrap();
    let zero_epoch = history.arbitrage_zero_epoch();
    let valid_eval =
        full_evaluation(&net, &valid_set, &ts, config.vega_mode, config.vega_floor).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = zero_epoch.is_some_and(|e| e <= 300)
        && valid_eval.calendar == 0.0
        && valid_eval.vertical == 0.0
        && valid_eval.butterfly == 0.0
        && elapsed <= 1800.0;
    verdict(
        "4 (arbitrage elimination)",
        pass,
        &format!(
            "epoch-wise arb zero from {zero_epoch:?}, validation arb ({:.1e}, {:.1e}, {:.1e}), {elapsed:.0}s",
            valid_eval.calendar, valid_eval.vertical, valid_eval.butterfly
        ),
    );
}

#[test]
fn criterion_5_top_performer() {
    let ts = LbTermStructure::reference();
    let (train_set, _) = reference_datasets();
    let mut passes = 0;
    let mut details = Vec::new();
    for seed in [1u64, 2, 3] {
        let config = TrainConfig {
            master_seed: seed,
            ..TrainConfig::default()
        };
        let (net, _, _) = run_model("relu2-128x1", &config, &train_set, &train_set, &ts).unwrap();
        let eval =
            full_evaluation(&net, &train_set, &ts, config.vega_mode, config.vega_floor).unwrap();
        let p = to_bps(eval.price);
        let d = to_bps(eval.density.unwrap());
        if p <= 15.0 && d <= 400.0 {
            passes += 1;
        }
        details.push(format!("seed {seed}: P {p:.1} bps, D {d:.1} bps"));
    }
    verdict(
        "5 (top-performer reproduction)",
        passes >= 2,
        &format!("{passes}/3 seeds within gates ({})", details.join("; ")),
    );
}

#[test]
fn criterion_6_relu_density_pathology() {
    let ts = LbTermStructure::reference();
    let (train_set, valid_set) = reference_datasets();
    let config = TrainConfig {
        master_seed: 2,
        ..TrainConfig::default()
    };
    let (net, _, _) = run_model("relu-64x3", &config, &train_set, &valid_set, &ts).unwrap();
    let train_eval =
        full_evaluation(&net, &train_set, &ts, config.vega_mode, config.vega_floor).unwrap();
    let valid_eval =
        full_evaluation(&net, &valid_set, &ts, config.vega_mode, config.vega_floor).unwrap();
    let p_train = to_bps(train_eval.price);
    let p_valid = to_bps(valid_eval.price);
    let d_train = to_bps(train_eval.density.unwrap());
    let ratio = p_valid / p_train;
    let pass = p_train <= 20.0 && d_train >= 500.0 && ratio >= 1.5;
    verdict(
        "6 (ReLU density pathology)",
        pass,
        &format!("P train {p_train:.1} bps, P valid {p_valid:.1} bps (ratio {ratio:.2}), D train {d_train:.0} bps"),
    );
}

#[test]
fn criterion_7_trivial_corrector_exactness() {
    // constant-in-κ, nondecreasing-in-τ surface: bitwise recovery of the
    // Black-Scholes quasi-density with zero arbitrage errors
    let omega_of = |tau: f64| 0.25 * tau.sqrt();
    let mut pass = true;
    for tau in [0.1, 0.5, 1.0, 2.0] {
        for kappa in [-0.8, -0.2, 0.0, 0.3, 0.9] {
            let h = 1e-5;
            let d_tau = (omega_of(tau + h) - omega_of(tau - h)) / (2.0 * h);
            let jet = SurfaceJet::new(tau, kappa, omega_of(tau), d_tau, 0.0, 0.0).unwrap();
            let c = correctors(&jet);
            let eps = arbitrage_errors(&jet);
            pass &= c.zeta == 0.0
                && c.xi == 1.0
                && implied_pdf(&jet) == c.quasi_pdf
                && eps.calendar == 0.0
                && eps.vertical == 0.0
                && eps.butterfly == 0.0;
        }
    }
    verdict("7 (trivial-corrector exactness)", pass, "bitwise identities hold");
}

#[test]
fn criterion_8_dataset_counts() {
    let (train_set, valid_set) = reference_datasets();
    let kappas = valid_set.kappas().len();
    let pass = train_set.len() == 4020 && valid_set.len() == 191 * kappas && kappas == 2001;
    verdict(
        "8 (dataset counts)",
        pass,
        &format!(
            "train {} rows; valid {} rows = 191 x {kappas} (vs originally reported 383910 = 191 x 2010)",
            train_set.len(),
            valid_set.len()
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    // two identical-seed cmd_train invocations must produce byte-identical
    // history CSVs and checkpoints
    let bin = env!("CARGO_BIN_EXE_voljet");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let status = std::process::Command::new(bin)
        .args(["generate", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([
                "train", "--activation", "relu2", "--width", "32", "--depth", "1", "--epochs",
                "12", "--seed", "7",
            ])
            .arg("--train")
            .arg(data.join("train.csv"))
            .arg("--valid")
            .arg(data.join("valid.csv"))
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    let same_hist = std::fs::read(a.join("history.csv")).unwrap()
        == std::fs::read(b.join("history.csv")).unwrap();
    let same_ckpt =
        std::fs::read(a.join("net.ckpt")).unwrap() == std::fs::read(b.join("net.ckpt")).unwrap();
    verdict(
        "9 (determinism)",
        same_hist && same_ckpt,
        &format!("history identical: {same_hist}, checkpoint identical: {same_ckpt}"),
    );
}
