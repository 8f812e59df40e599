//! Concrete syntax: the `.mpead` text format.

mod lexer;
mod parser;
mod printer;

pub use parser::{parse, parse_file, parse_with_diagnostics, ADJACENCY_RULES};
pub use printer::{format, serialize};
