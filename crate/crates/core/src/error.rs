use thiserror::Error;

/// Errors shared across the crate. Variants mirror the failure modes of the
/// individual subsystems so callers can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown lattice code `{0}`")]
    UnknownLattice(String),
    #[error("degenerate size: extents {0}x{1} produce no bounded face")]
    DegenerateSize(usize, usize),
    #[error("face tracing violates the Euler relation (V={v}, E={e}, F={f})")]
    NonPlanarEmbedding { v: usize, e: usize, f: usize },
    #[error("vertex {0} is not covered by the edge subset")]
    UncoveredVertex(usize),
    #[error("vertex {0} is covered by more than one edge")]
    DoublyCoveredVertex(usize),
    #[error("matching enumeration exceeded the cap of {cap} (at least {seen} exist)")]
    CapExceeded { cap: usize, seen: usize },
    #[error("the section admits no perfect matching")]
    NoPerfectMatching,
    #[error("matchings live on different sections")]
    SectionMismatch,
    #[error("placement is not flippable in this matching")]
    NotFlippable,
    #[error("cycle encloses another non-trivial cycle")]
    CycleNotInnermost,
    #[error("no catalog template applies; catalog is incomplete for this lattice")]
    NoApplicableTemplate,
    #[error("local environment extends past the section boundary")]
    NeighborhoodTruncated,
    #[error("fixture `{0}` is missing")]
    FixtureMissing(String),
    #[error("fixture cannot be instantiated: {0}")]
    FixtureUninstantiable(String),
    #[error("deformation weights violate the consistency constraints")]
    InadmissibleDeformation,
    #[error("deformation weight must be nonzero")]
    ZeroWeight,
    #[error("operation requires lattice `{expected}`, section is `{found}`")]
    WrongLattice { expected: String, found: String },
    #[error("section carries no coordinates")]
    MissingCoordinates,
    #[error("step cap exceeded while transforming matchings; this is a defect")]
    StepCapExceeded,
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// CLI exit code taxonomy: 2 for input errors, 3 for cap overruns.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
