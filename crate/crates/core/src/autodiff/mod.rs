//! Reverse-mode automatic differentiation over a scalar graph.
//!
//! A [`TapeBuilder`] records a static graph once; the resulting [`Tape`] is
//! immutable and is re-evaluated for every input vector with its own
//! [`Evaluation`] buffers.

mod check;
mod eval;
mod tape;

pub use check::{finite_difference, grad_check, max_relative_error, GradCheck};
pub use eval::Evaluation;
pub(crate) use tape::sigmoid;
pub use tape::{Kind, Node, Tape, TapeBuilder, Var};
