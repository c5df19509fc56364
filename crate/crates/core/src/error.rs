use core::fmt;

/// Errors produced by the geometry, network and routing layers.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Binary vector operation on operands of different lengths.
    DimensionMismatch { left: usize, right: usize },
    /// Vector too short to normalize (norm at or below the near-zero threshold).
    DegenerateVector { norm: f64 },
    /// A NaN or infinite value was supplied or produced.
    NonFinite,
    /// An anchor set needs at least three anchors.
    TooFewAnchors { count: usize },
    /// Two anchors share a position.
    DuplicateAnchor { first: usize, second: usize },
    /// The evaluation point coincides with an anchor, where f is not differentiable.
    Singularity { anchor: usize },
    /// The Gram-Schmidt residual of the second neighbor direction vanished.
    DegenerateBasis { residual: f64 },
    /// Fewer than two neighbors were available for basis construction.
    InsufficientNeighbors { count: usize },
    /// No anchor satisfied the subset-selection radius.
    EmptySubset,
    /// Two points that must differ are the same.
    CoincidentPoints,
    /// The Jacobian has numerical rank 1.
    RankDeficient { sigma_min: f64 },
    /// Rejection sampling gave up before placing every node.
    InfeasibleDensity { attempts: usize },
    /// Configuration value out of range.
    InvalidConfig(&'static str),
    /// Argument outside an operation's precondition.
    InvalidArgument(&'static str),
    /// Node index out of range.
    IndexOutOfRange { index: usize, len: usize },
    /// The node has no neighbors at all.
    NoNeighbors { node: usize },
    /// Route and curve do not share endpoints.
    EndpointMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Self::DegenerateVector { norm } => {
                write!(f, "cannot normalize vector of norm {norm:e}")
            }
            Self::NonFinite => f.write_str("non-finite value"),
            Self::TooFewAnchors { count } => {
                write!(f, "need at least 3 anchors, got {count}")
            }
            Self::DuplicateAnchor { first, second } => {
                write!(f, "anchors {first} and {second} share a position")
            }
            Self::Singularity { anchor } => {
                write!(f, "point coincides with anchor {anchor}")
            }
            Self::DegenerateBasis { residual } => {
                write!(f, "degenerate neighbor pair (residual {residual:e})")
            }
            Self::InsufficientNeighbors { count } => {
                write!(f, "need at least 2 neighbors, got {count}")
            }
            Self::EmptySubset => f.write_str("anchor subset selection is empty"),
            Self::CoincidentPoints => f.write_str("points must be distinct"),
            Self::RankDeficient { sigma_min } => {
                write!(f, "jacobian is rank deficient (sigma_min {sigma_min:e})")
            }
            Self::InfeasibleDensity { attempts } => {
                write!(f, "node placement failed after {attempts} attempts")
            }
            Self::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Self::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Self::IndexOutOfRange { index, len } => {
                write!(f, "node index {index} out of range (len {len})")
            }
            Self::NoNeighbors { node } => write!(f, "node {node} has no neighbors"),
            Self::EndpointMismatch => f.write_str("route and curve endpoints differ"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
