use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::params::ParamSet;
use super::tape::{Tape, Var};
use crate::{math, Result};

/// Lower bound of the relative-error denominator, so coordinates whose true
/// gradient is ~0 are compared in absolute terms.
pub const REL_ERR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Worst relative error over every checked coordinate.
    pub max_rel_err: f64,
    /// Worst relative error per named parameter tensor.
    pub per_param: Vec<(String, f64)>,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when evaluation failed (non-finite loss, builder error).
    pub failure: Option<String>,
}

fn evaluate<F>(f: &F, params: &ParamSet) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars = params.register(&mut tape);
    let out = f(&mut tape, &vars)?;
    Ok(tape.value(out).item())
}

fn failed(params: &ParamSet, tol: f64, reason: String) -> GradCheckReport {
    GradCheckReport {
        max_rel_err: f64::INFINITY,
        per_param: params.entries().iter().map(|e| (e.name.clone(), f64::INFINITY)).collect(),
        checked: 0,
        tolerance: tol,
        passed: false,
        failure: Some(reason),
    }
}

/// Compares the tape's gradient of the scalar built by `f` with central
/// differences `(f(θ + h e_k) − f(θ − h e_k)) / 2h`, coordinate by coordinate.
/// Relative error is `|a − n| / max(|a|, |n|, REL_ERR_FLOOR)`; the check passes
/// when the worst one is at most `tol`.
pub fn grad_check<F>(f: F, params: &ParamSet, h: f64, tol: f64) -> GradCheckReport
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars = params.register(&mut tape);
    let out = match f(&mut tape, &vars) {
        Ok(out) => out,
        Err(e) => return failed(params, tol, format!("{e}")),
    };
    let loss = tape.value(out).item();
    if !loss.is_finite() {
        return failed(params, tol, format!("non-finite loss {loss}"));
    }
    let grads = match tape.backward(out) {
        Ok(g) => g,
        Err(e) => return failed(params, tol, format!("{e}")),
    };

    let mut probe = params.clone();
    let mut per_param = Vec::with_capacity(params.len());
    let mut checked = 0;
    let mut worst_overall: f64 = 0.0;
    for (i, (entry, &var)) in params.entries().iter().zip(&vars).enumerate() {
        let analytic = grads.get_or_zeros(var, entry.tensor.shape());
        let mut worst: f64 = 0.0;
        for k in 0..entry.tensor.len() {
            let orig = entry.tensor.data()[k];
            probe.tensor_mut(i).data_mut()[k] = orig + h;
            let plus = evaluate(&f, &probe);
            probe.tensor_mut(i).data_mut()[k] = orig - h;
            let minus = evaluate(&f, &probe);
            probe.tensor_mut(i).data_mut()[k] = orig;
            let (plus, minus) = match (plus, minus) {
                (Ok(p), Ok(m)) if p.is_finite() && m.is_finite() => (p, m),
                _ => return failed(params, tol, format!("non-finite loss probing {}[{k}]", entry.name)),
            };
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic.data()[k];
            let denom = math::abs(a).max(math::abs(numeric)).max(REL_ERR_FLOOR);
            worst = worst.max(math::abs(a - numeric) / denom);
            checked += 1;
        }
        worst_overall = worst_overall.max(worst);
        per_param.push((entry.name.clone(), worst));
    }
    GradCheckReport {
        max_rel_err: worst_overall,
        per_param,
        checked,
        tolerance: tol,
        passed: worst_overall <= tol,
        failure: None,
    }
}
