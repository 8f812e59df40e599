//! Minimal evolutionary machinery for running mpEAd systems.
//!
//! Populations are black boxes to the notation; this crate supplies one small
//! configurable generational GA, a registry that resolves the function,
//! selector and algorithm names written in diagrams, and a library of
//! built-in objectives.

pub mod builtins;
pub mod ea;
pub mod genome;
pub mod registry;
pub mod rng;
pub mod select;

use thiserror::Error;

pub use builtins::BuiltinParams;
pub use ea::{ea_step, AlgoConfig};
pub use genome::{diversity, Genome, Individual, Value};
pub use registry::{FunctionHandle, Port, Procedure, RegisteredFunction, Registry, Selector, Signature};
pub use rng::{stream, StreamRng};
pub use select::DEFAULT_SELECTOR;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("function `{0}` is already registered")]
    DuplicateFunction(String),
    #[error("individual {index} has no fitness value")]
    MissingFitness { index: usize },
}

/// Failure inside a function call.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FnError {
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("expected {expected} results, got {got}")]
    Outputs { expected: usize, got: usize },
    #[error("argument {position}: expected {expected}, got {got}")]
    ArgType { position: usize, expected: &'static str, got: &'static str },
    #[error("vectors of length {left} and {right} cannot be compared")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0}")]
    Other(String),
}
