use serde::Serialize;

use crate::error::{ensure, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(len: usize, hyper: AdamHyper) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], step: 0, hyper }
    }
}

/// One bias-corrected Adam update at learning rate `state.hyper.lr`.
pub fn adam_step(theta: &mut [f64], grad: &[f64], state: &mut AdamState) -> Result<()> {
    ensure!(
        theta.len() == grad.len() && grad.len() == state.m.len() && state.m.len() == state.v.len(),
        "adam_step shape mismatch: theta {}, grad {}, state {}",
        theta.len(),
        grad.len(),
        state.m.len()
    );
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient component {i} ({}) at step {}",
            grad[i], state.step
        )));
    }
    let AdamHyper { lr, beta1, beta2, eps } = state.hyper;
    state.step += 1;
    let c1 = 1.0 - beta1.powf(state.step as f64);
    let c2 = 1.0 - beta2.powf(state.step as f64);
    for (((p, &g), m), v) in theta.iter_mut().zip(grad).zip(&mut state.m).zip(&mut state.v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let mh = *m / c1;
        let vh = *v / c2;
        *p -= lr * mh / (vh.sqrt() + eps);
    }
    Ok(())
}

/// Cosine decay from `lr0` at step 0 to `lr_min` at `step == total`.
pub fn cosine_lr(lr0: f64, lr_min: f64, step: u64, total: u64) -> f64 {
    if total == 0 {
        return lr0;
    }
    let frac = (step.min(total) as f64) / total as f64;
    lr_min + 0.5 * (lr0 - lr_min) * (1.0 + (std::f64::consts::PI * frac).cos())
}
