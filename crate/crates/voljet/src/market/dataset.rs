//! Option-chain datasets on Cartesian (tenor, moneyness) grids.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Result, VoljetError};
use crate::market::lb::{lb_price, LbTermStructure};

const GRID_UNIFORMITY_TOL: f64 = 1e-12;

/// One quote: tenor, moneyness, and the relative OTM price.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeQuote {
    pub tau: f64,
    pub kappa: f64,
    pub price: f64,
}

impl RelativeQuote {
    pub fn new(tau: f64, kappa: f64, price: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(VoljetError::Domain(format!("tenor must be > 0, got {tau}")));
        }
        // OTM bounds: p ≤ e^κ ≤ 1 on the put side, c ≤ 1 on the call side.
        let upper = if kappa <= 0.0 { kappa.exp() } else { 1.0 };
        if !(0.0..=1.0).contains(&price) || price > upper + 1e-12 {
            return Err(VoljetError::Domain(format!(
                "price {price} outside [0, {upper}] at (tau={tau}, kappa={kappa})"
            )));
        }
        Ok(RelativeQuote { tau, kappa, price })
    }
}

/// Inclusive uniform grid specification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_step: f64,
}

impl GridSpec {
    /// Training grid: 20 tenors {0.1, …, 2} × 201 moneynesses {−1, …, 1}.
    pub fn training() -> Self {
        GridSpec {
            tau_min: 0.1,
            tau_max: 2.0,
            tau_step: 0.1,
            kappa_min: -1.0,
            kappa_max: 1.0,
            kappa_step: 0.01,
        }
    }

    /// Validation grid: 191 tenors step 0.01 × 2001 moneynesses step 0.001.
    pub fn validation() -> Self {
        GridSpec {
            tau_min: 0.1,
            tau_max: 2.0,
            tau_step: 0.01,
            kappa_min: -1.0,
            kappa_max: 1.0,
            kappa_step: 0.001,
        }
    }

    fn axis(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || max < min {
            return Err(VoljetError::Domain(format!(
                "invalid axis ({min}, {max}, {step})"
            )));
        }
        let n = ((max - min) / step).round() as usize + 1;
        Ok((0..n).map(|i| min + i as f64 * step).collect())
    }

    pub fn taus(&self) -> Result<Vec<f64>> {
        Self::axis(self.tau_min, self.tau_max, self.tau_step)
    }

    pub fn kappas(&self) -> Result<Vec<f64>> {
        Self::axis(self.kappa_min, self.kappa_max, self.kappa_step)
    }
}

/// A dense |𝔗|×|𝔎| matrix of OTM quotes, row-major by tenor then moneyness.
#[derive(Clone, Debug)]
pub struct ChainDataset {
    taus: Vec<f64>,
    kappas: Vec<f64>,
    prices: Vec<f64>,
}

impl ChainDataset {
    pub fn new(taus: Vec<f64>, kappas: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if prices.len() != taus.len() * kappas.len() {
            return Err(VoljetError::Contract(format!(
                "expected {} prices, got {}",
                taus.len() * kappas.len(),
                prices.len()
            )));
        }
        check_uniform("tenor", &taus)?;
        check_uniform("moneyness", &kappas)?;
        Ok(ChainDataset {
            taus,
            kappas,
            prices,
        })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// Uniform moneyness step Δκ.
    pub fn delta_kappa(&self) -> Result<f64> {
        if self.kappas.len() < 2 {
            return Err(VoljetError::Contract(
                "delta_kappa needs at least two moneynesses".into(),
            ));
        }
        Ok(self.kappas[1] - self.kappas[0])
    }

    /// Quote at flat index `i` (row-major by tenor).
    pub fn quote(&self, i: usize) -> RelativeQuote {
        let m = self.kappas.len();
        RelativeQuote {
            tau: self.taus[i / m],
            kappa: self.kappas[i % m],
            price: self.prices[i],
        }
    }

    pub fn price_at(&self, tau_idx: usize, kappa_idx: usize) -> f64 {
        self.prices[tau_idx * self.kappas.len() + kappa_idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = RelativeQuote> + '_ {
        (0..self.len()).map(|i| self.quote(i))
    }

    /// Writes the dataset CSV: header `tenor,moneyness,otm_price`, one row per
    /// point, 17 significant digits, LF line endings.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(b"tenor,moneyness,otm_price\n")?;
        for q in self.iter() {
            writeln!(w, "{},{},{}", fmt_g17(q.tau), fmt_g17(q.kappa), fmt_g17(q.price))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "tenor,moneyness,otm_price" => {}
            other => {
                return Err(VoljetError::Parse(format!(
                    "bad dataset header in {}: {other:?}",
                    path.display()
                )))
            }
        }
        let mut taus = Vec::new();
        let mut kappas = Vec::new();
        let mut prices = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| {
                    VoljetError::Parse(format!("short row {} in {}", lineno + 2, path.display()))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| VoljetError::Parse(format!("row {}: {e}", lineno + 2)))
            };
            let tau = parse(fields.next())?;
            let kappa = parse(fields.next())?;
            let price = parse(fields.next())?;
            if taus.last() != Some(&tau) {
                taus.push(tau);
            }
            if taus.len() == 1 {
                kappas.push(kappa);
            }
            prices.push(price);
        }
        ChainDataset::new(taus, kappas, prices)
    }
}

fn check_uniform(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(VoljetError::Contract(format!("{name} axis is empty")));
    }
    if axis.len() == 1 {
        return Ok(());
    }
    let step = axis[1] - axis[0];
    if !(step > 0.0) {
        return Err(VoljetError::Contract(format!("{name} axis not increasing")));
    }
    for w in axis.windows(2) {
        if ((w[1] - w[0]) - step).abs() > GRID_UNIFORMITY_TOL {
            return Err(VoljetError::Contract(format!(
                "{name} axis not uniform: step {} vs {}",
                w[1] - w[0],
                step
            )));
        }
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any f64.
pub(crate) fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Generates OTM relative prices from the synthetic market on a grid.
/// Parallel over tenor rows; output is independent of worker count.
pub fn generate_dataset(spec: &GridSpec, ts: &LbTermStructure) -> Result<ChainDataset> {
    let taus = spec.taus()?;
    let kappas = spec.kappas()?;
    let rows: Result<Vec<Vec<f64>>> = taus
        .par_iter()
        .map(|&tau| {
            kappas
                .iter()
                .map(|&kappa| lb_price(tau, kappa, ts).map(|(_, _, otm)| otm))
                .collect()
        })
        .collect();
    let prices = rows?.into_iter().flatten().collect();
    ChainDataset::new(taus, kappas, prices)
}
