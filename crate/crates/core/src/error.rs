//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide `Result` alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building inputs or running a computation.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A transition row has a negative entry or does not sum to one.
    #[error("transition matrix is not stochastic: {0}")]
    NonStochastic(String),
    /// The channel or code has no symbols.
    #[error("empty alphabet")]
    EmptyAlphabet,
    /// A matrix or vector has the wrong shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A weight vector is not a point of the probability simplex.
    #[error("not a probability vector: {0}")]
    NotSimplex(String),
    /// The tuple has no output symbol that every input can produce.
    #[error("empty common output support for input tuple {0:?}")]
    EmptySupport(Vec<usize>),
    /// A list of message indices is out of range or repeats an index.
    #[error("bad message subset: {0}")]
    BadSubset(String),
    /// An input or output symbol is outside its alphabet.
    #[error("symbol out of range: {0}")]
    SymbolOutOfRange(String),
    /// An output sequence has the wrong blocklength.
    #[error("output sequence has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    /// An output symbol falls outside the common support of its region.
    #[error("output symbol {symbol} at position {position} is outside the support of its region")]
    OutOfSupport { position: usize, symbol: usize },
    /// An enumeration would exceed the configured size guard.
    #[error("{what}: {size} exceeds size guard {limit}")]
    SizeGuardExceeded { what: String, size: f64, limit: f64 },
    /// The simplex optimizer did not certify its gap in time.
    #[error("optimizer stopped after {iterations} iterations with gap {gap:e}")]
    NonConvergence { iterations: usize, gap: f64 },
    /// The list-L zero-error capacity is positive, so the exponent is infinite.
    #[error("list zero-error capacity is positive for list size {list_size}")]
    ZeroErrorPositive { list_size: usize },
    /// Fewer codewords than the bound needs.
    #[error("need more than {list_size} codewords, got {got}")]
    TooFewCodewords { list_size: usize, got: usize },
    /// Exact search found no monochromatic set of the requested size.
    #[error("no monochromatic subset of size {target} (best {best})")]
    NoSubsetOfTargetSize { target: usize, best: usize },
    /// The subcode is too small to trim.
    #[error("subcode of size {got} is too small, need at least {needed}")]
    TooSmall { needed: usize, got: usize },
    /// The hypothesis of an averaging lemma does not hold.
    #[error("hypothesis fails for pair ({0}, {1})")]
    HypothesisFails(usize, usize),
    /// Variable indices are not an increasing in-range pair.
    #[error("bad variable indices ({0}, {1})")]
    BadIndices(usize, usize),
    /// The chosen index set is not monochromatic.
    #[error("index set is not monochromatic: {0}")]
    NotMonochromatic(String),
    /// The sign function disagrees with the skew signs of a pair.
    #[error("sign function disagrees with skews of pair ({0}, {1})")]
    SignMismatch(usize, usize),
    /// Halving needs an even number of variables.
    #[error("halving needs an even number of variables, got {0}")]
    OddCount(usize),
    /// A checked inequality or identity failed.
    #[error("bound violated: {0}")]
    BoundViolation(String),
    /// A channel or code file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Filesystem error.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn guard(what: &str, size: f64, limit: f64) -> Result<()> {
    if size > limit {
        Err(Error::SizeGuardExceeded {
            what: what.to_string(),
            size,
            limit,
        })
    } else {
        Ok(())
    }
}
