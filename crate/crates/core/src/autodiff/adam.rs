use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::params::ParamSet;
use super::tensor::Tensor;
use crate::{math, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self::with_lr(1e-3)
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> = params.entries().iter().map(|e| vec![0.0; e.tensor.len()]).collect();
        Self { step: 0, m: zeros.clone(), v: zeros }
    }
}

/// One bias-corrected Adam update of every parameter.
pub fn adam_step(params: &mut ParamSet, grads: &[Tensor], state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::Contract(format!(
            "adam: {} parameters, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - math::powf(cfg.beta1, t);
    let bc2 = 1.0 - math::powf(cfg.beta2, t);
    for (i, g) in grads.iter().enumerate() {
        let p = params.tensor_mut(i);
        if g.shape() != p.shape() {
            return Err(Error::Contract(format!(
                "adam: gradient shape {:?} for parameter {:?}",
                g.shape(),
                p.shape()
            )));
        }
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for (((w, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *w -= cfg.lr * m_hat / (math::sqrt(v_hat) + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(x: f64) -> ParamSet {
        let mut p = ParamSet::new();
        p.push("x", Tensor::scalar(x));
        p
    }

    #[test]
    fn first_step_moves_by_lr() {
        for g in [3.0, -0.02, 1e4] {
            let mut p = single(1.0);
            let mut st = AdamState::new(&p);
            adam_step(&mut p, &[Tensor::scalar(g)], &mut st, &AdamConfig::default()).unwrap();
            // m̂/√v̂ = g/|g| at step 1
            let moved = p.tensor(0).item() - 1.0;
            let sign = if g > 0.0 { 1.0 } else { -1.0 };
            assert!(math::abs(moved + 1e-3 * sign) < 1e-9, "g={g} moved={moved}");
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = single(0.7);
        let mut st = AdamState::new(&p);
        for _ in 0..5 {
            adam_step(&mut p, &[Tensor::scalar(0.0)], &mut st, &AdamConfig::default()).unwrap();
        }
        assert_eq!(p.tensor(0).item(), 0.7);
    }

    #[test]
    fn constant_gradient_moves_monotonically() {
        let mut p = single(0.0);
        let mut st = AdamState::new(&p);
        let mut prev = 0.0;
        for _ in 0..2 {
            adam_step(&mut p, &[Tensor::scalar(0.5)], &mut st, &AdamConfig::default()).unwrap();
            let now = p.tensor(0).item();
            assert!(now < prev);
            prev = now;
        }
        // with constant g both bias-corrected moments equal g and g², so each step is lr
        assert!(math::abs(prev + 2e-3) < 1e-9);
    }

    #[test]
    fn mismatched_gradients_are_rejected() {
        let mut p = single(0.0);
        let mut st = AdamState::new(&p);
        assert!(adam_step(&mut p, &[], &mut st, &AdamConfig::default()).is_err());
        assert!(adam_step(&mut p, &[Tensor::zeros(2, 1)], &mut st, &AdamConfig::default()).is_err());
    }
}
