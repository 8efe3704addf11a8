use thiserror::Error;

/// Errors produced by graph validation, lattice computations, branching-system
/// construction and the induced-representation operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` has an empty range")]
    EmptyRange(String),
    #[error("edge `{0}` has tail vertex `{1}` as source; tail vertices are sinks")]
    TailSource(String, String),
    #[error("no tail is declared but `{0}` refers to one")]
    NoTailDeclared(String),
    #[error("tail index {index} is below the declared start {start}")]
    TailIndexBelowStart { index: u32, start: u32 },
    #[error("vertex `{0}` collides with the tail naming scheme")]
    TailNameCollision(String),
    #[error("closure would have {size} elements, over the cap of {cap}")]
    ClosureTooLarge { size: u128, cap: u128 },
    #[error("path enumeration exceeded the cap of {cap}")]
    PathCapExceeded { cap: usize },
    #[error("edge sequence is not composable at position {0}")]
    NotComposable(usize),
    #[error("edge sequence does not close into a cycle")]
    NotACycle,
    #[error("cycle has an exit")]
    CycleHasExit,
    #[error("{0} requires a graph without a tail")]
    TailUnsupported(&'static str),
    #[error("hereditary-saturated operations require finite data ({0})")]
    TailClosure(String),
    #[error("finite discrete synthesis requires an acyclic composability graph")]
    CyclicGraph,
    #[error("the peeling condition fails; no discrete system is synthesized")]
    NotPermutative,
    #[error("support is not covered by the edge ranges near {0}")]
    SupportNotCovered(String),
    #[error("result has infinitely many pieces near the accumulation point of edge `{0}`")]
    InfinitePieces(String),
    #[error("truncation {given} is smaller than the largest used index {needed}")]
    TruncationTooSmall { given: u64, needed: u64 },
    #[error("peel trace does not match the graph")]
    TraceMismatch,
    #[error("malformed interval: {0}")]
    BadInterval(String),
    #[error("malformed map: {0}")]
    BadMap(String),
    #[error("malformed step function: {0}")]
    BadStepFunction(String),
    #[error("malformed document: {0}")]
    BadDocument(String),
    #[error("malformed rational `{0}`")]
    BadRational(String),
    #[error("malformed vertex set literal `{0}`")]
    BadSetLiteral(String),
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
