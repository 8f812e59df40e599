use mpead_kernel::{FnError, KernelError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("computation `{node}` refers to unknown function `{name}`")]
    UnresolvedFunction { node: String, name: String },
    #[error("edge `{edge}` uses unknown selector `{name}`")]
    UnresolvedSelector { edge: String, name: String },
    #[error("population `{population}` uses unknown algorithm `{name}`")]
    UnresolvedAlgo { population: String, name: String },
    #[error("population `{population}` has no {attribute}")]
    MissingAttribute { population: String, attribute: &'static str },
    #[error("computation `{node}` iterates in lockstep over populations of different sizes: {}", list(.sizes))]
    SizeMismatch { node: String, sizes: Vec<(String, usize)> },
    #[error("computations form a cycle: {}", .nodes.join(" -> "))]
    CyclicComputation { nodes: Vec<String> },
    #[error("function `{function}` of `{node}` takes {expected} inputs, diagram supplies {got}")]
    ArityMismatch { node: String, function: String, expected: usize, got: usize },
    #[error("edge `{edge}`: {detail}")]
    KindMismatch { edge: String, detail: String },
    #[error("edge `{edge}` writes at index `{letter}`, which no input of its source binds")]
    UnboundIndex { edge: String, letter: char },
    #[error("edge `{edge}` asks for {count} individuals from a population of {size}")]
    CountExceedsPopulation { edge: String, count: usize, size: usize },
    #[error("edge `{edge}`: {detail} is not supported by the engine")]
    Unsupported { edge: String, detail: String },
    #[error("computation `{node}` failed: {source}")]
    Function { node: String, source: FnError },
    #[error("edge `{edge}` carried an unusable value: {detail}")]
    InvalidValue { edge: String, detail: String },
    #[error("individual {index} of `{population}` has no fitness value")]
    MissingFitness { population: String, index: usize },
    #[error("{0}")]
    Kernel(#[from] KernelError),
}

fn list(sizes: &[(String, usize)]) -> String {
    sizes.iter().map(|(p, n)| format!("{p} ({n})")).collect::<Vec<_>>().join(", ")
}

/// What an error is about, for locating it in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject<'a> {
    Node(&'a str),
    Edge(&'a str),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::InvalidConfig(_) => "R001",
            EngineError::UnresolvedFunction { .. } => "R002",
            EngineError::UnresolvedSelector { .. } => "R003",
            EngineError::UnresolvedAlgo { .. } => "R004",
            EngineError::MissingAttribute { .. } => "R005",
            EngineError::SizeMismatch { .. } => "R006",
            EngineError::CyclicComputation { .. } => "R007",
            EngineError::ArityMismatch { .. } => "R008",
            EngineError::KindMismatch { .. } => "R009",
            EngineError::UnboundIndex { .. } => "R010",
            EngineError::CountExceedsPopulation { .. } => "R011",
            EngineError::Unsupported { .. } => "R012",
            EngineError::Function { .. } => "R013",
            EngineError::InvalidValue { .. } => "R014",
            EngineError::MissingFitness { .. } => "R015",
            EngineError::Kernel(_) => "R016",
        }
    }

    pub fn subject(&self) -> Option<Subject<'_>> {
        use EngineError::*;
        match self {
            UnresolvedFunction { node, .. } | SizeMismatch { node, .. } | ArityMismatch { node, .. } | Function { node, .. } => {
                Some(Subject::Node(node))
            }
            UnresolvedAlgo { population, .. } | MissingAttribute { population, .. } | MissingFitness { population, .. } => {
                Some(Subject::Node(population))
            }
            CyclicComputation { nodes } => nodes.first().map(|n| Subject::Node(n)),
            UnresolvedSelector { edge, .. }
            | KindMismatch { edge, .. }
            | UnboundIndex { edge, .. }
            | CountExceedsPopulation { edge, .. }
            | Unsupported { edge, .. }
            | InvalidValue { edge, .. } => Some(Subject::Edge(edge)),
            InvalidConfig(_) | Kernel(_) => None,
        }
    }
}
