//! Std companion of `topoclasp-core`: TU dataset IO, config resolution,
//! reports, checkpoints, experiment drivers and the CLI plumbing.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod experiment;
pub mod features;
pub mod gradcheck;
pub mod report;
pub mod tu;

pub use error::{AppError, Result};

// Training allocates and frees many short-lived buffers above glibc's mmap
// threshold; mimalloc keeps them out of the kernel.
#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;
pub use topoclasp_core as core;
