//! Reverse-mode differentiation over dense 2-D tensors.
//!
//! A [`Tape`] records primitive operations during a forward pass; a single
//! [`Tape::backward`] call then replays them in reverse and returns
//! [`Gradients`] for every variable that needs one.

mod adam;
mod gradcheck;
mod params;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{grad_check, GradCheckReport, REL_ERR_FLOOR};
pub use params::{NamedTensor, ParamSet};
pub use tape::{Adjacency, Gradients, Tape, Var, L2_EPS};
pub use tensor::Tensor;
