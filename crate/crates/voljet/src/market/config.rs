//! Flat key–value config for the synthetic market term structure.
//!
//! Format: one `key = value` pair per line, `#` comments, blank lines
//! ignored. Keys are exactly `sigma0, h0, alpha0, alpha1, beta0, beta1`.

use crate::error::{Result, VoljetError};
use crate::market::lb::LbTermStructure;

const KEYS: [&str; 6] = ["sigma0", "h0", "alpha0", "alpha1", "beta0", "beta1"];

/// Parses a term-structure config block.
pub fn parse_term_structure(text: &str) -> Result<LbTermStructure> {
    let mut values = [None::<f64>; 6];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            VoljetError::Parse(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let idx = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| VoljetError::Parse(format!("line {}: unknown key `{key}`", lineno + 1)))?;
        let parsed = value.trim().parse::<f64>().map_err(|e| {
            VoljetError::Parse(format!("line {}: bad value for `{key}`: {e}", lineno + 1))
        })?;
        if values[idx].replace(parsed).is_some() {
            return Err(VoljetError::Parse(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    let get = |i: usize| {
        values[i].ok_or_else(|| VoljetError::Parse(format!("missing key `{}`", KEYS[i])))
    };
    Ok(LbTermStructure {
        sigma0: get(0)?,
        h0: get(1)?,
        alpha0: get(2)?,
        alpha1: get(3)?,
        beta0: get(4)?,
        beta1: get(5)?,
    })
}

/// Serializes a term structure back into the config format.
pub fn term_structure_to_config(ts: &LbTermStructure) -> String {
    format!(
        "sigma0 = {}\nh0 = {}\nalpha0 = {}\nalpha1 = {}\nbeta0 = {}\nbeta1 = {}\n",
        ts.sigma0, ts.h0, ts.alpha0, ts.alpha1, ts.beta0, ts.beta1
    )
}
