//! Experiment sweep over the activation × width × depth grid.

use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Result, VoljetError};
use crate::market::dataset::{fmt_g17, ChainDataset};
use crate::market::lb::LbTermStructure;
use crate::neural::{ActivationKind, VolNetwork, HIDDEN_KINDS};
use crate::seed::model_seed;
use crate::training::{full_evaluation, to_bps, train, TrainConfig, TrainHistory};

/// A model's epoch-wise total loss above this many bps at the end of
/// training marks it as not converged.
pub const CONVERGENCE_BPS: f64 = 1000.0;

/// Cross product of activations, widths, and depths, trained with a shared
/// config; per-model seeds are derived from the master seed and the model
/// name so the set can change without perturbing other runs.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub activations: Vec<ActivationKind>,
    pub widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub config: TrainConfig,
}

impl SweepSpec {
    /// The full 5 × 3 × 3 = 45-model grid.
    pub fn full(config: TrainConfig) -> Self {
        SweepSpec {
            activations: HIDDEN_KINDS.to_vec(),
            widths: vec![32, 64, 128],
            depths: vec![1, 2, 3],
            config,
        }
    }

    /// Model identifiers in grid order, e.g. `relu2-128x1`.
    pub fn model_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for &a in &self.activations {
            for &w in &self.widths {
                for &d in &self.depths {
                    names.push(model_name(a, w, d));
                }
            }
        }
        names
    }
}

pub fn model_name(activation: ActivationKind, width: usize, depth: usize) -> String {
    format!("{}-{}x{}", activation.name(), width, depth)
}

/// Inverse of [`model_name`].
pub fn parse_model_name(name: &str) -> Result<(ActivationKind, usize, usize)> {
    let err = || VoljetError::ModelInvalid(format!("bad model name `{name}` (want act-WxD)"));
    let (act, rest) = name.rsplit_once('-').ok_or_else(err)?;
    let (w, d) = rest.split_once('x').ok_or_else(err)?;
    let activation = ActivationKind::parse(act)?;
    let width: usize = w.parse().map_err(|_| err())?;
    let depth: usize = d.parse().map_err(|_| err())?;
    if width == 0 || depth == 0 {
        return Err(err());
    }
    Ok((activation, width, depth))
}

/// One sweep row; losses in bps, `None` epoch means arbitrage never zeroed.
#[derive(Clone, Debug)]
pub struct ModelResult {
    pub name: String,
    pub train_price_bps: f64,
    pub valid_price_bps: f64,
    pub train_density_bps: f64,
    pub valid_density_bps: f64,
    pub arb_zero_epoch: Option<usize>,
    pub converged: bool,
    pub seconds: f64,
    pub error: Option<String>,
}

impl ModelResult {
    fn failed(name: &str, error: String) -> Self {
        ModelResult {
            name: name.to_string(),
            train_price_bps: f64::NAN,
            valid_price_bps: f64::NAN,
            train_density_bps: f64::NAN,
            valid_density_bps: f64::NAN,
            arb_zero_epoch: None,
            converged: false,
            seconds: 0.0,
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub models: Vec<ModelResult>,
}

impl SweepReport {
    pub fn get(&self, name: &str) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(
            b"name,loss_P_train_bps,loss_P_valid_bps,loss_D_train_bps,loss_D_valid_bps,arb_zero_epoch,converged,seconds,error\n",
        )?;
        for m in &self.models {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:.3},{}",
                m.name,
                fmt_g17(m.train_price_bps),
                fmt_g17(m.valid_price_bps),
                fmt_g17(m.train_density_bps),
                fmt_g17(m.valid_density_bps),
                m.arb_zero_epoch.map(|e| e.to_string()).unwrap_or_default(),
                m.converged,
                m.seconds,
                m.error.as_deref().unwrap_or_default()
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains one named model with its derived seed and evaluates it on both
/// datasets. Returns the trained network and history alongside the row.
pub fn run_model(
    name: &str,
    config: &TrainConfig,
    train_set: &ChainDataset,
    valid_set: &ChainDataset,
    market: &LbTermStructure,
) -> Result<(VolNetwork, TrainHistory, ModelResult)> {
    let (activation, width, depth) = parse_model_name(name)?;
    let mut config = *config;
    config.master_seed = model_seed(config.master_seed, name);
    let net = VolNetwork::he_uniform(activation, &vec![width; depth], config.master_seed)?;
    let start = Instant::now();
    let (net, history) = train(net, &config, train_set, market)?;
    let train_eval = full_evaluation(&net, train_set, market, config.vega_mode, config.vega_floor)?;
    let valid_eval = full_evaluation(&net, valid_set, market, config.vega_mode, config.vega_floor)?;
    let final_total_bps = history
        .final_batch_avg()
        .map(|b| to_bps(b.total()))
        .unwrap_or(0.0);
    let result = ModelResult {
        name: name.to_string(),
        train_price_bps: to_bps(train_eval.price),
        valid_price_bps: to_bps(valid_eval.price),
        train_density_bps: to_bps(train_eval.density.unwrap_or(f64::NAN)),
        valid_density_bps: to_bps(valid_eval.density.unwrap_or(f64::NAN)),
        arb_zero_epoch: history.arbitrage_zero_epoch(),
        converged: final_total_bps.is_finite() && final_total_bps <= CONVERGENCE_BPS,
        seconds: if config.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        },
        error: None,
    };
    Ok((net, history, result))
}

/// Runs the sweep, optionally restricted to `subset` names, writing one
/// artifact directory per model (`<out>/<name>/net.ckpt`, `history.csv`).
/// Individual model failures (including numeric aborts) are recorded in the
/// report and do not stop the sweep.
pub fn run_sweep(
    spec: &SweepSpec,
    subset: Option<&[String]>,
    train_set: &ChainDataset,
    valid_set: &ChainDataset,
    market: &LbTermStructure,
    out_dir: &Path,
) -> Result<SweepReport> {
    let all = spec.model_names();
    let names: Vec<String> = match subset {
        Some(filter) => {
            for name in filter {
                parse_model_name(name)?;
            }
            all.into_iter().filter(|n| filter.contains(n)).collect()
        }
        None => all,
    };
    std::fs::create_dir_all(out_dir)?;
    let models: Vec<ModelResult> = names
        .par_iter()
        .map(|name| {
            match run_model(name, &spec.config, train_set, valid_set, market) {
                Ok((net, history, result)) => {
                    let dir = out_dir.join(name);
                    let io = std::fs::create_dir_all(&dir)
                        .map_err(VoljetError::from)
                        .and_then(|()| net.write_checkpoint(&dir.join("net.ckpt")))
                        .and_then(|()| history.write_csv(&dir.join("history.csv")));
                    match io {
                        Ok(()) => result,
                        Err(e) => ModelResult::failed(name, e.to_string()),
                    }
                }
                Err(e) => ModelResult::failed(name, e.to_string()),
            }
        })
        .collect();
    let report = SweepReport { models };
    report.write_csv(&out_dir.join("sweep.csv"))?;
    Ok(report)
}
