//! Shallow feedforward volatility network `ω̂(τ, κ)` with exact analytic
//! input derivatives and a hand-derived reverse pass.
//!
//! Forward recursions, per layer `l` with pre-activation `y = W x + b`:
//!
//! ```text
//! x_l   = A(y)
//! ∂·x_l = A′(y) ⊙ (W ∂·x_{l−1})        seeded (1,0) for τ, (0,1) for κ
//! ∂κκx_l = A″(y) ⊙ (W ∂κx_{l−1})⊙² + A′(y) ⊙ (W ∂κκx_{l−1})   seeded 0
//! ```
//!
//! The reverse pass propagates adjoints of the full quadruple
//! `(ω̂, ∂τω̂, ∂κω̂, ∂κκω̂)` and therefore needs `A` through `A‴`. The graph
//! is static and at most four layers deep, so a closed-form pass is used
//! instead of a general tape.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VoljetError};
use crate::market::dataset::fmt_g17;
use crate::neural::activation::ActivationKind;

/// Feedforward network mapping `(τ, κ)` to a positive total volatility.
/// Hidden layers share one activation; the output activation is Softplus.
#[derive(Clone, Debug, PartialEq)]
pub struct VolNetwork {
    activation: ActivationKind,
    /// `[2, n₁, …, n_L, 1]`
    dims: Vec<usize>,
    /// Row-major `n_l × n_{l−1}` per affine layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl VolNetwork {
    /// All-zero network with the given hidden widths.
    pub fn zeros(activation: ActivationKind, hidden_widths: &[usize]) -> Result<Self> {
        if activation == ActivationKind::Softplus {
            return Err(VoljetError::ModelInvalid(
                "softplus is reserved for the output layer".into(),
            ));
        }
        if hidden_widths.is_empty() || hidden_widths.iter().any(|&n| n == 0) {
            return Err(VoljetError::ModelInvalid(format!(
                "hidden widths must be nonempty and positive, got {hidden_widths:?}"
            )));
        }
        let mut dims = Vec::with_capacity(hidden_widths.len() + 2);
        dims.push(2);
        dims.extend_from_slice(hidden_widths);
        dims.push(1);
        let weights = (1..dims.len()).map(|l| vec![0.0; dims[l] * dims[l - 1]]).collect();
        let biases = (1..dims.len()).map(|l| vec![0.0; dims[l]]).collect();
        Ok(VolNetwork {
            activation,
            dims,
            weights,
            biases,
        })
    }

    /// He-uniform initialization: every entry of `W_l` and `b_l` i.i.d.
    /// uniform on `[−n_{l−1}^{−1/2}, n_{l−1}^{−1/2}]`. Identical seed ⇒
    /// bit-identical network.
    pub fn he_uniform(activation: ActivationKind, hidden_widths: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(activation, hidden_widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..net.weights.len() {
            let bound = 1.0 / (net.dims[l] as f64).sqrt();
            for w in net.weights[l].iter_mut() {
                *w = rng.gen_range(-bound..bound);
            }
            for b in net.biases[l].iter_mut() {
                *b = rng.gen_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    /// Hidden widths `n₁..n_L`.
    pub fn hidden_widths(&self) -> &[usize] {
        &self.dims[1..self.dims.len() - 1]
    }

    /// Number of affine layers `L + 1`.
    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    fn layer_activation(&self, l: usize) -> ActivationKind {
        if l + 1 == self.num_layers() {
            ActivationKind::Softplus
        } else {
            self.activation
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat parameter accessor, layer-major: `W_l` row-major then `b_l`.
    pub fn get_param(&self, mut i: usize) -> f64 {
        for l in 0..self.num_layers() {
            if i < self.weights[l].len() {
                return self.weights[l][i];
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                return self.biases[l][i];
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut i: usize, value: f64) {
        for l in 0..self.num_layers() {
            if i < self.weights[l].len() {
                self.weights[l][i] = value;
                return;
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                self.biases[l][i] = value;
                return;
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Mutable view over all parameters in flat order (for the optimizer).
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }

    /// `ω̂(τ, κ)`.
    pub fn forward(&self, tau: f64, kappa: f64) -> Result<f64> {
        let mut x = vec![tau, kappa];
        for l in 0..self.num_layers() {
            let y = affine(&self.weights[l], &self.biases[l], &x, self.dims[l + 1]);
            let act = self.layer_activation(l);
            x = y.iter().map(|&v| act.eval(v).a).collect();
            if x.iter().any(|v| !v.is_finite()) {
                return Err(VoljetError::Numeric(format!(
                    "non-finite activation in layer {} at (tau={tau}, kappa={kappa})",
                    l + 1
                )));
            }
        }
        Ok(x[0])
    }

    /// Evaluates the full jet `(ω̂, ∂τω̂, ∂κω̂, ∂κκω̂)` and caches every
    /// per-layer state the reverse pass needs.
    pub fn forward_jet(&self, tau: f64, kappa: f64) -> Result<NetworkJet> {
        let mut x = vec![tau, kappa];
        let mut t = vec![1.0, 0.0];
        let mut s = vec![0.0, 1.0];
        let mut q = vec![0.0, 0.0];
        let mut layers = Vec::with_capacity(self.num_layers());
        for l in 0..self.num_layers() {
            let n = self.dims[l + 1];
            let w = &self.weights[l];
            let y = affine(w, &self.biases[l], &x, n);
            let wt = matvec(w, &t, n);
            let ws = matvec(w, &s, n);
            let wq = matvec(w, &q, n);
            let act = self.layer_activation(l);
            let mut nx = vec![0.0; n];
            let mut nt = vec![0.0; n];
            let mut ns = vec![0.0; n];
            let mut nq = vec![0.0; n];
            for i in 0..n {
                let a = act.eval(y[i]);
                nx[i] = a.a;
                nt[i] = a.d1 * wt[i];
                ns[i] = a.d1 * ws[i];
                nq[i] = a.d2 * ws[i] * ws[i] + a.d1 * wq[i];
            }
            if nx.iter().any(|v| !v.is_finite()) || nq.iter().any(|v| !v.is_finite()) {
                return Err(VoljetError::Numeric(format!(
                    "non-finite jet in layer {} at (tau={tau}, kappa={kappa})",
                    l + 1
                )));
            }
            layers.push(LayerCache {
                x_in: x,
                t_in: t,
                s_in: s,
                q_in: q,
                y,
                wt,
                ws,
                wq,
            });
            x = nx;
            t = nt;
            s = ns;
            q = nq;
        }
        Ok(NetworkJet {
            omega: x[0],
            d_tau: t[0],
            d_kappa: s[0],
            d_kappa2: q[0],
            layers,
        })
    }

    /// Reverse pass: exact parameter gradients of
    /// `ḡ_ω ω̂ + ḡ_τ ∂τω̂ + ḡ_κ ∂κω̂ + ḡ_κκ ∂κκω̂`
    /// accumulated into `grads`. `jet` must come from [`forward_jet`] on this
    /// network at the same point.
    pub fn backward(&self, jet: &NetworkJet, adjoints: [f64; 4], grads: &mut ParamGrads) {
        debug_assert_eq!(jet.layers.len(), self.num_layers());
        let [g_omega, g_tau, g_kappa, g_kappa2] = adjoints;
        let mut xb = vec![g_omega];
        let mut tb = vec![g_tau];
        let mut sb = vec![g_kappa];
        let mut qb = vec![g_kappa2];
        for l in (0..self.num_layers()).rev() {
            let cache = &jet.layers[l];
            let n = self.dims[l + 1];
            let m = self.dims[l];
            let act = self.layer_activation(l);
            let w = &self.weights[l];
            let dw = &mut grads.weights[l];
            let db = &mut grads.biases[l];
            let mut nxb = vec![0.0; m];
            let mut ntb = vec![0.0; m];
            let mut nsb = vec![0.0; m];
            let mut nqb = vec![0.0; m];
            for i in 0..n {
                let a = act.eval(cache.y[i]);
                let (wt, ws, wq) = (cache.wt[i], cache.ws[i], cache.wq[i]);
                let yb = xb[i] * a.d1
                    + tb[i] * a.d2 * wt
                    + sb[i] * a.d2 * ws
                    + qb[i] * (a.d3 * ws * ws + a.d2 * wq);
                let wt_adj = tb[i] * a.d1;
                let ws_adj = sb[i] * a.d1 + qb[i] * 2.0 * a.d2 * ws;
                let wq_adj = qb[i] * a.d1;
                let row = &w[i * m..(i + 1) * m];
                let drow = &mut dw[i * m..(i + 1) * m];
                for j in 0..m {
                    drow[j] += yb * cache.x_in[j]
                        + wt_adj * cache.t_in[j]
                        + ws_adj * cache.s_in[j]
                        + wq_adj * cache.q_in[j];
                    nxb[j] += row[j] * yb;
                    ntb[j] += row[j] * wt_adj;
                    nsb[j] += row[j] * ws_adj;
                    nqb[j] += row[j] * wq_adj;
                }
                db[i] += yb;
            }
            xb = nxb;
            tb = ntb;
            sb = nsb;
            qb = nqb;
        }
    }

    /// Writes the checkpoint: a versioned text layout with the config line
    /// followed by `W_l` (row-major, one row per line) and `b_l` per layer.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "voljet-checkpoint v1")?;
        writeln!(out, "activation {}", self.activation.name())?;
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        writeln!(out, "dims {}", dims.join(" "))?;
        for l in 0..self.num_layers() {
            writeln!(out, "W {}", l + 1)?;
            let m = self.dims[l];
            for row in self.weights[l].chunks(m) {
                let cells: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
                writeln!(out, "{}", cells.join(" "))?;
            }
            writeln!(out, "b {}", l + 1)?;
            let cells: Vec<String> = self.biases[l].iter().map(|&v| fmt_g17(v)).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| VoljetError::Parse(format!("truncated checkpoint {}", path.display())))?
                .map_err(VoljetError::from)
        };
        if next()?.trim() != "voljet-checkpoint v1" {
            return Err(VoljetError::Parse(format!(
                "unrecognized checkpoint header in {}",
                path.display()
            )));
        }
        let act_line = next()?;
        let activation = ActivationKind::parse(
            act_line
                .strip_prefix("activation ")
                .ok_or_else(|| VoljetError::Parse("expected `activation` line".into()))?
                .trim(),
        )?;
        let dims_line = next()?;
        let dims: Vec<usize> = dims_line
            .strip_prefix("dims ")
            .ok_or_else(|| VoljetError::Parse("expected `dims` line".into()))?
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|e| VoljetError::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        if dims.len() < 3 || dims[0] != 2 || *dims.last().unwrap() != 1 {
            return Err(VoljetError::Parse(format!("bad dims {dims:?}")));
        }
        let mut net = Self::zeros(activation, &dims[1..dims.len() - 1])?;
        let parse_row = |line: &str, want: usize| -> Result<Vec<f64>> {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| VoljetError::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if row.len() != want {
                return Err(VoljetError::Parse(format!(
                    "expected {want} values per row, got {}",
                    row.len()
                )));
            }
            Ok(row)
        };
        for l in 0..net.num_layers() {
            if next()?.trim() != format!("W {}", l + 1) {
                return Err(VoljetError::Parse(format!("expected `W {}` marker", l + 1)));
            }
            let m = net.dims[l];
            let mut w = Vec::with_capacity(net.dims[l + 1] * m);
            for _ in 0..net.dims[l + 1] {
                w.extend(parse_row(&next()?, m)?);
            }
            net.weights[l] = w;
            if next()?.trim() != format!("b {}", l + 1) {
                return Err(VoljetError::Parse(format!("expected `b {}` marker", l + 1)));
            }
            net.biases[l] = parse_row(&next()?, net.dims[l + 1])?;
        }
        Ok(net)
    }
}

fn affine(w: &[f64], b: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    let m = x.len();
    (0..n)
        .map(|i| {
            let row = &w[i * m..(i + 1) * m];
            row.iter().zip(x).fold(b[i], |acc, (&wij, &xj)| acc + wij * xj)
        })
        .collect()
}

fn matvec(w: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    let m = x.len();
    (0..n)
        .map(|i| {
            let row = &w[i * m..(i + 1) * m];
            row.iter().zip(x).fold(0.0, |acc, (&wij, &xj)| acc + wij * xj)
        })
        .collect()
}

/// Jet of the network output at one point plus the reverse-pass cache.
#[derive(Clone, Debug)]
pub struct NetworkJet {
    pub omega: f64,
    pub d_tau: f64,
    pub d_kappa: f64,
    pub d_kappa2: f64,
    layers: Vec<LayerCache>,
}

#[derive(Clone, Debug)]
struct LayerCache {
    x_in: Vec<f64>,
    t_in: Vec<f64>,
    s_in: Vec<f64>,
    q_in: Vec<f64>,
    y: Vec<f64>,
    wt: Vec<f64>,
    ws: Vec<f64>,
    wq: Vec<f64>,
}

/// Parameter-shaped gradient accumulator (same layout as the network).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl ParamGrads {
    pub fn zeros_like(net: &VolNetwork) -> Self {
        ParamGrads {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.iter_mut() {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += *b;
        }
    }

    /// Flat iteration in the network's parameter order.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .zip(self.biases.iter())
            .flat_map(|(w, b)| w.iter().chain(b.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SplitMix64Rng;

    #[test]
    fn zero_network_is_constant_ln2() {
        let net = VolNetwork::zeros(ActivationKind::Tanh, &[8, 8]).unwrap();
        for (tau, kappa) in [(0.1, -1.0), (1.0, 0.0), (2.0, 0.7)] {
            assert_eq!(net.forward(tau, kappa).unwrap(), std::f64::consts::LN_2);
            let jet = net.forward_jet(tau, kappa).unwrap();
            assert_eq!(jet.omega, std::f64::consts::LN_2);
            assert_eq!((jet.d_tau, jet.d_kappa, jet.d_kappa2), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn one_neuron_closed_form() {
        // 2 → 1 → 1 Tanh net with hand-set parameters:
        // ω̂ = Softplus(w2·tanh(a·τ + b·κ + c) + d)
        let mut net = VolNetwork::zeros(ActivationKind::Tanh, &[1]).unwrap();
        let (a, b, c, w2, d) = (0.3, -0.8, 0.1, 1.4, -0.2);
        net.weights[0] = vec![a, b];
        net.biases[0] = vec![c];
        net.weights[1] = vec![w2];
        net.biases[1] = vec![d];
        let (tau, kappa) = (1.3, 0.4);
        let inner = (a * tau + b * kappa + c).tanh();
        let expected = ActivationKind::Softplus.eval(w2 * inner + d).a;
        assert!((net.forward(tau, kappa).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn he_uniform_bounds_and_determinism() {
        let net = VolNetwork::he_uniform(ActivationKind::Relu, &[32], 42).unwrap();
        let bound0 = 1.0 / (2f64).sqrt();
        assert!(net.weights[0].iter().chain(&net.biases[0]).all(|w| w.abs() < bound0));
        let bound1 = 1.0 / (32f64).sqrt();
        assert!(net.weights[1].iter().chain(&net.biases[1]).all(|w| w.abs() < bound1));
        let again = VolNetwork::he_uniform(ActivationKind::Relu, &[32], 42).unwrap();
        assert_eq!(net, again);
        let other = VolNetwork::he_uniform(ActivationKind::Relu, &[32], 43).unwrap();
        assert_ne!(net, other);
    }

    #[test]
    fn he_uniform_empirical_mean() {
        // 10⁵ draws: |mean| within 3 standard errors of 0 for Unif[−b, b]
        let net = VolNetwork::he_uniform(ActivationKind::Tanh, &[128, 128, 128], 7).unwrap();
        let draws: Vec<f64> = net.weights[1].iter().chain(&net.weights[2]).copied().collect();
        let b = 1.0 / (128f64).sqrt();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = b / (3f64.sqrt() * (draws.len() as f64).sqrt());
        assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3se {}", 3.0 * se);
    }

    #[test]
    fn output_positive_over_random_nets() {
        for seed in 0..20 {
            let net = VolNetwork::he_uniform(ActivationKind::Elu, &[32, 32], seed).unwrap();
            assert!(net.forward(1.0, 0.3).unwrap() > 0.0);
        }
    }

    #[test]
    fn forward_and_jet_agree() {
        for kind in crate::neural::activation::HIDDEN_KINDS {
            let net = VolNetwork::he_uniform(kind, &[64, 32], 11).unwrap();
            for (tau, kappa) in [(0.4, -0.3), (1.0, 0.0), (1.8, 0.9)] {
                let jet = net.forward_jet(tau, kappa).unwrap();
                assert_eq!(jet.omega, net.forward(tau, kappa).unwrap());
            }
        }
    }

    fn jet_vs_finite_difference(kind: ActivationKind, widths: &[usize], seed: u64) {
        let net = VolNetwork::he_uniform(kind, widths, seed).unwrap();
        let mut rng = SplitMix64Rng::new(seed ^ 0xabcdef);
        for _ in 0..10 {
            let tau = 0.2 + rng.next_below(1500) as f64 / 1000.0;
            let kappa = -0.9 + rng.next_below(1800) as f64 / 1000.0;
            let jet = net.forward_jet(tau, kappa).unwrap();
            let f = |t: f64, k: f64| net.forward(t, k).unwrap();
            let h1 = 1e-5;
            let h2 = 1e-4;
            let fd_t = (f(tau + h1, kappa) - f(tau - h1, kappa)) / (2.0 * h1);
            let fd_k = (f(tau, kappa + h1) - f(tau, kappa - h1)) / (2.0 * h1);
            let fd_kk =
                (f(tau, kappa + h2) - 2.0 * f(tau, kappa) + f(tau, kappa - h2)) / (h2 * h2);
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-3);
            assert!(rel(jet.d_tau, fd_t) < 1e-6, "{kind:?} dτ at ({tau},{kappa})");
            assert!(rel(jet.d_kappa, fd_k) < 1e-6, "{kind:?} dκ at ({tau},{kappa})");
            assert!(rel(jet.d_kappa2, fd_kk) < 1e-5, "{kind:?} dκκ at ({tau},{kappa})");
        }
    }

    #[test]
    fn jet_matches_finite_differences_smooth_kinds() {
        jet_vs_finite_difference(ActivationKind::Tanh, &[8], 1);
        jet_vs_finite_difference(ActivationKind::Elu, &[16, 8], 2);
        jet_vs_finite_difference(ActivationKind::Relu2, &[32], 3);
    }

    #[test]
    fn relu_curvature_comes_only_from_the_output_layer() {
        // A″_ReLU = 0, so the hidden recursion contributes no curvature: the
        // network is piecewise affine before the Softplus, and
        // ∂κκω̂ = Softplus″(y)·(∂κy)² exactly.
        let net = VolNetwork::he_uniform(ActivationKind::Relu, &[32, 32], 5).unwrap();
        let jet = net.forward_jet(1.0, 0.3).unwrap();
        let y_last = &jet.layers.last().unwrap();
        let sp = ActivationKind::Softplus.eval(y_last.y[0]);
        let expected = sp.d2 * y_last.ws[0] * y_last.ws[0];
        assert!((jet.d_kappa2 - expected).abs() < 1e-15);
    }

    #[test]
    fn backward_zero_network_output_bias() {
        // adjoints (1,0,0,0) on the all-zero net: only ∂ω̂/∂b_{L+1} = ½ and
        // the hidden biases feed through zero weights
        let net = VolNetwork::zeros(ActivationKind::Tanh, &[8]).unwrap();
        let jet = net.forward_jet(1.0, 0.2).unwrap();
        let mut grads = ParamGrads::zeros_like(&net);
        net.backward(&jet, [1.0, 0.0, 0.0, 0.0], &mut grads);
        assert_eq!(grads.biases[1][0], 0.5);
        assert!(grads.biases[0].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_matches_finite_differences() {
        // scalar G = 1·ω̂ + 0.7·∂τω̂ − 1.3·∂κω̂ + 0.4·∂κκω̂ on a 2×8×1 Tanh net
        let adjoints = [1.0, 0.7, -1.3, 0.4];
        let net = VolNetwork::he_uniform(ActivationKind::Tanh, &[8], 99).unwrap();
        let (tau, kappa) = (0.9, -0.2);
        let jet = net.forward_jet(tau, kappa).unwrap();
        let mut grads = ParamGrads::zeros_like(&net);
        net.backward(&jet, adjoints, &mut grads);
        let scalar = |n: &VolNetwork| {
            let j = n.forward_jet(tau, kappa).unwrap();
            adjoints[0] * j.omega
                + adjoints[1] * j.d_tau
                + adjoints[2] * j.d_kappa
                + adjoints[3] * j.d_kappa2
        };
        let flat: Vec<f64> = grads.iter().copied().collect();
        let h = 1e-6;
        for i in 0..net.param_count() {
            let base = net.get_param(i);
            let mut plus = net.clone();
            plus.set_param(i, base + h);
            let mut minus = net.clone();
            minus.set_param(i, base - h);
            let fd = (scalar(&plus) - scalar(&minus)) / (2.0 * h);
            assert!(
                (flat[i] - fd).abs() / fd.abs().max(1e-4) < 1e-5,
                "param {i}: analytic {} vs fd {fd}",
                flat[i]
            );
        }
    }

    #[test]
    fn backward_is_linear_in_adjoints() {
        let net = VolNetwork::he_uniform(ActivationKind::Elu, &[16], 3).unwrap();
        let jet = net.forward_jet(1.1, 0.4).unwrap();
        let run = |adj: [f64; 4]| {
            let mut g = ParamGrads::zeros_like(&net);
            net.backward(&jet, adj, &mut g);
            g
        };
        let a = [0.3, -0.2, 0.9, 0.1];
        let b = [-0.5, 0.4, 0.0, 1.2];
        let sum = run([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        let (ga, gb) = (run(a), run(b));
        for ((s, x), y) in sum.iter().zip(ga.iter()).zip(gb.iter()) {
            assert!((s - (x + y)).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_param_accessors_cover_every_parameter() {
        let mut net = VolNetwork::he_uniform(ActivationKind::Relu2, &[4, 3], 8).unwrap();
        let n = net.param_count();
        assert_eq!(n, (4 * 2 + 4) + (3 * 4 + 3) + (1 * 3 + 1));
        let before: Vec<f64> = (0..n).map(|i| net.get_param(i)).collect();
        for i in 0..n {
            net.set_param(i, i as f64);
        }
        let after: Vec<f64> = net.params_mut().map(|p| *p).collect();
        assert_eq!(after, (0..n).map(|i| i as f64).collect::<Vec<_>>());
        assert_ne!(before, after);
    }

    #[test]
    fn checkpoint_round_trip_bit_identical() {
        let net = VolNetwork::he_uniform(ActivationKind::Relu3, &[32, 16], 123).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        net.write_checkpoint(&path).unwrap();
        let back = VolNetwork::read_checkpoint(&path).unwrap();
        assert_eq!(net, back);
        // corrupt header rejected
        std::fs::write(&path, "something else\n").unwrap();
        assert!(VolNetwork::read_checkpoint(&path).is_err());
    }
}
