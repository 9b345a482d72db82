//! Figure-data emission: learning curves, loss scatters, and surface grids
//! derived from completed run artifacts. Rendering is left to external
//! tools; this module only writes CSVs.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Result, VoljetError};
use crate::market::bs::implied_total_vol;
use crate::market::dataset::{fmt_g17, GridSpec};
use crate::market::lb::{lb_pdf, lb_price, term_structure_eval, LbTermStructure};
use crate::neural::VolNetwork;
use crate::parity::{implied_pdf, SurfaceJet};

/// Network and analytic surfaces side by side on a grid:
/// `tau,kappa,omega_hat,omega_market,psi_hat,psi_market`.
pub fn surface_csv(
    net: &VolNetwork,
    grid: &GridSpec,
    market: &LbTermStructure,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(b"tau,kappa,omega_hat,omega_market,psi_hat,psi_market\n")?;
    for &tau in &grid.taus()? {
        let marginal = term_structure_eval(tau, market)?;
        for &kappa in &grid.kappas()? {
            let j = net.forward_jet(tau, kappa)?;
            let jet = SurfaceJet::new(tau, kappa, j.omega, j.d_tau, j.d_kappa, j.d_kappa2)?;
            let psi_hat = implied_pdf(&jet);
            let (_, _, otm) = lb_price(tau, kappa, market)?;
            let omega_market = implied_total_vol(tau, kappa, otm)?;
            let psi_market = lb_pdf(kappa, &marginal);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_g17(tau),
                fmt_g17(kappa),
                fmt_g17(j.omega),
                fmt_g17(omega_market),
                fmt_g17(psi_hat),
                fmt_g17(psi_market)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Extracts `epoch,loss_total_bps` from a history CSV into a curve CSV.
pub fn learning_curve_csv(history_path: &Path, out_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(history_path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if !header.starts_with("epoch,loss_total_bps") {
        return Err(VoljetError::Parse(format!(
            "not a history CSV: {}",
            history_path.display()
        )));
    }
    let mut w = BufWriter::new(std::fs::File::create(out_path)?);
    w.write_all(b"epoch,loss_total_bps\n")?;
    for line in lines {
        let mut fields = line.split(',');
        let epoch = fields
            .next()
            .ok_or_else(|| VoljetError::Parse("short history row".into()))?;
        let total = fields
            .next()
            .ok_or_else(|| VoljetError::Parse("short history row".into()))?;
        writeln!(w, "{epoch},{total}")?;
    }
    w.flush()?;
    Ok(())
}

/// Projects a sweep CSV onto the scatter columns
/// `name,loss_P_train_bps,loss_D_train_bps,loss_P_valid_bps,loss_D_valid_bps`.
pub fn scatter_csv(sweep_path: &Path, out_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(sweep_path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if !header.starts_with("name,loss_P_train_bps") {
        return Err(VoljetError::Parse(format!(
            "not a sweep CSV: {}",
            sweep_path.display()
        )));
    }
    let mut w = BufWriter::new(std::fs::File::create(out_path)?);
    w.write_all(b"name,loss_P_train_bps,loss_D_train_bps,loss_P_valid_bps,loss_D_valid_bps\n")?;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 5 {
            return Err(VoljetError::Parse(format!("short sweep row `{line}`")));
        }
        // sweep columns: name, P_train, P_valid, D_train, D_valid, …
        writeln!(w, "{},{},{},{},{}", f[0], f[1], f[3], f[2], f[4])?;
    }
    w.flush()?;
    Ok(())
}

/// Walks a run directory (as laid out by the sweep or a single training run)
/// and emits all three CSV families into `out_dir`:
/// `curve_<model>.csv`, `scatter.csv` (when a sweep.csv is present), and
/// `surface_<model>.csv` for every checkpoint found.
pub fn emit_report(
    run_dir: &Path,
    out_dir: &Path,
    market: &LbTermStructure,
    surface_grid: &GridSpec,
) -> Result<usize> {
    if !run_dir.is_dir() {
        return Err(VoljetError::Parse(format!(
            "run directory {} does not exist",
            run_dir.display()
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut emitted = 0usize;

    let mut entries: Vec<_> = std::fs::read_dir(run_dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    entries.sort();

    // a single-run directory holds history.csv/net.ckpt at top level
    let mut model_dirs: Vec<std::path::PathBuf> =
        entries.iter().filter(|p| p.is_dir()).cloned().collect();
    if run_dir.join("history.csv").exists() || run_dir.join("net.ckpt").exists() {
        model_dirs.push(run_dir.to_path_buf());
    }

    for dir in &model_dirs {
        let name = if dir == run_dir {
            "run".to_string()
        } else {
            dir.file_name().unwrap().to_string_lossy().into_owned()
        };
        let history = dir.join("history.csv");
        if history.exists() {
            learning_curve_csv(&history, &out_dir.join(format!("curve_{name}.csv")))?;
            emitted += 1;
        }
        let ckpt = dir.join("net.ckpt");
        if ckpt.exists() {
            let net = VolNetwork::read_checkpoint(&ckpt)?;
            surface_csv(&net, surface_grid, market, &out_dir.join(format!("surface_{name}.csv")))?;
            emitted += 1;
        }
    }
    let sweep = run_dir.join("sweep.csv");
    if sweep.exists() {
        scatter_csv(&sweep, &out_dir.join("scatter.csv"))?;
        emitted += 1;
    }
    if emitted == 0 {
        return Err(VoljetError::Parse(format!(
            "no run artifacts (history.csv, net.ckpt, sweep.csv) under {}",
            run_dir.display()
        )));
    }
    Ok(emitted)
}
