//! Bias-corrected Adam over the network's parameter layout.

use crate::neural::{ParamGrads, VolNetwork};

/// First/second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: ParamGrads,
    v: ParamGrads,
    t: u64,
}

impl AdamState {
    pub fn new(net: &VolNetwork) -> Self {
        AdamState {
            m: ParamGrads::zeros_like(net),
            v: ParamGrads::zeros_like(net),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update in place. ε is added to `√v̂_t` (outside the square
/// root), the common convention.
pub fn adam_step(
    net: &mut VolNetwork,
    grads: &ParamGrads,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    for (((p, g), m), v) in net
        .params_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}
