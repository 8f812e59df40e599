//! Diagram model, textual language, validation and expansion for mpEAd
//! multi-population evolutionary-algorithm diagrams.

pub mod diag;
pub mod expand;
pub mod ir;
pub mod syntax;
pub mod validate;

pub use diag::{Diagnostic, Severity, SourceSpan};
pub use expand::{expand, stats, ExpandError, Stats};
pub use ir::*;
pub use syntax::{format, parse, parse_file, parse_with_diagnostics, serialize};
pub use validate::validate;
