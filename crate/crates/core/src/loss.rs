//! Classification and cross-view contrastive objectives.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::{Error, Result};

/// Which pair of embeddings the contrastive term aligns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastOn {
    /// Raw structural and topological embeddings `z`, `u`.
    #[default]
    Zu,
    /// Both views passed through the projection head first.
    Proj,
}

impl ContrastOn {
    pub fn name(self) -> &'static str {
        match self {
            ContrastOn::Zu => "zu",
            ContrastOn::Proj => "proj",
        }
    }
}

impl fmt::Display for ContrastOn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContrastOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zu" => Ok(ContrastOn::Zu),
            "proj" => Ok(ContrastOn::Proj),
            _ => Err(Error::Config(format!("unknown contrast target '{s}' (valid: zu, proj)"))),
        }
    }
}

/// Symmetric InfoNCE between row-aligned views. Rows are L2-normalized,
/// `S = Ẑ Ûᵀ / τ`, and the loss averages the two directional cross-entropies
/// whose positives sit on the diagonal of `S`.
pub fn info_nce(tape: &mut Tape, z: Var, u: Var, tau: f64) -> Result<Var> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Config(format!("temperature must be positive, got {tau}")));
    }
    if tape.shape(z) != tape.shape(u) {
        return Err(Error::Contract(format!(
            "contrastive views differ in shape: {:?} vs {:?}",
            tape.shape(z),
            tape.shape(u)
        )));
    }
    let b = tape.shape(z)[0];
    if b == 0 {
        return Err(Error::Contract("contrastive loss on an empty batch".into()));
    }
    let zn = tape.l2_normalize(z);
    let un = tape.l2_normalize(u);
    let ut = tape.transpose(un);
    let sim = tape.matmul(zn, ut)?;
    let sim = tape.scalar_mul(sim, 1.0 / tau);
    let diagonal: Vec<usize> = (0..b).collect();
    let positives = tape.select_per_row(sim, &diagonal)?;
    let positives = tape.sum(positives);
    let lse_rows = tape.logsumexp_rows(sim)?;
    let lse_rows = tape.sum(lse_rows);
    let sim_t = tape.transpose(sim);
    let lse_cols = tape.logsumexp_rows(sim_t)?;
    let lse_cols = tape.sum(lse_cols);
    let normalizers = tape.add(lse_rows, lse_cols)?;
    let twice_pos = tape.scalar_mul(positives, 2.0);
    let total = tape.sub(normalizers, twice_pos)?;
    Ok(tape.scalar_mul(total, 1.0 / (2 * b) as f64))
}

/// Mean softmax cross-entropy of `logits` (`B × C`) against integer labels.
pub fn cross_entropy(tape: &mut Tape, logits: Var, labels: &[usize]) -> Result<Var> {
    let [b, c] = tape.shape(logits);
    if labels.len() != b || b == 0 {
        return Err(Error::Contract(format!("{} labels for {b} rows of logits", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::Contract(format!("label {bad} out of range for {c} classes")));
    }
    let lse = tape.logsumexp_rows(logits)?;
    let picked = tape.select_per_row(logits, labels)?;
    let nll = tape.sub(lse, picked)?;
    Ok(tape.mean(nll))
}

/// `CE + α · L_con`. The contrastive term is always evaluated, so `α = 0`
/// reproduces the classification-only objective value exactly.
pub fn joint_loss(tape: &mut Tape, logits: Var, labels: &[usize], z: Var, u: Var, alpha: f64, tau: f64) -> Result<Var> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("contrastive weight must be non-negative, got {alpha}")));
    }
    let ce = cross_entropy(tape, logits, labels)?;
    let con = info_nce(tape, z, u, tau)?;
    let weighted = tape.scalar_mul(con, alpha);
    tape.add(ce, weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{grad_check, ParamSet, Tensor};
    use crate::math;
    use alloc::vec;

    fn nce_value(z: Tensor, u: Tensor, tau: f64) -> f64 {
        let mut tape = Tape::new();
        let z = tape.param(z);
        let u = tape.param(u);
        let l = info_nce(&mut tape, z, u, tau).unwrap();
        tape.value(l).item()
    }

    #[test]
    fn single_pair_is_zero() {
        let v = nce_value(Tensor::from_vec(1, 2, vec![1.0, 2.0]).unwrap(), Tensor::from_vec(1, 2, vec![-3.0, 0.5]).unwrap(), 0.5);
        assert!(math::abs(v) < 1e-12);
    }

    #[test]
    fn identical_rows_give_log_batch() {
        let z = Tensor::filled(4, 3, 1.0);
        let v = nce_value(z.clone(), z, 0.5);
        assert!(math::abs(v - math::ln(4.0)) < 1e-12);
    }

    #[test]
    fn orthonormal_pair() {
        let e = Tensor::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = nce_value(e.clone(), e, 1.0);
        assert!(math::abs(v - 0.313_261_687_518_222_8) < 1e-12);
    }

    #[test]
    fn rejects_bad_temperature() {
        let mut tape = Tape::new();
        let z = tape.param(Tensor::filled(2, 2, 1.0));
        for tau in [0.0, -1.0, f64::NAN] {
            assert!(matches!(info_nce(&mut tape, z, z, tau), Err(Error::Config(_))));
        }
    }

    #[test]
    fn uniform_logits_cross_entropy() {
        let mut tape = Tape::new();
        let logits = tape.param(Tensor::zeros(3, 5));
        let l = cross_entropy(&mut tape, logits, &[0, 4, 2]).unwrap();
        assert!(math::abs(tape.value(l).item() - math::ln(5.0)) < 1e-12);
        assert!(cross_entropy(&mut tape, logits, &[0, 5, 1]).is_err());
    }

    #[test]
    fn zero_weight_matches_classification_only() {
        let mut tape = Tape::new();
        let logits = tape.param(Tensor::from_vec(2, 2, vec![0.3, -1.0, 2.0, 0.1]).unwrap());
        let z = tape.param(Tensor::from_vec(2, 2, vec![1.0, 0.5, -0.2, 0.9]).unwrap());
        let u = tape.param(Tensor::from_vec(2, 2, vec![0.4, 0.4, 1.0, -1.0]).unwrap());
        let ce = cross_entropy(&mut tape, logits, &[1, 0]).unwrap();
        let joint = joint_loss(&mut tape, logits, &[1, 0], z, u, 0.0, 0.5).unwrap();
        assert_eq!(tape.value(ce).item(), tape.value(joint).item());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut params = ParamSet::new();
        params.push("z", Tensor::from_vec(3, 2, vec![0.3, -1.2, 0.8, 0.5, -0.4, 0.9]).unwrap());
        params.push("u", Tensor::from_vec(3, 2, vec![1.1, 0.2, -0.7, 0.6, 0.25, -0.35]).unwrap());
        params.push("logits", Tensor::from_vec(3, 2, vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6]).unwrap());
        let f = |t: &mut Tape, v: &[Var]| joint_loss(t, v[2], &[0, 1, 1], v[0], v[1], 0.7, 0.5);
        let report = grad_check(f, &params, 1e-6, 1e-5);
        assert!(report.passed, "{report:?}");
    }
}
