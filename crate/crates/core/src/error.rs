//! Error surface shared by the geometry modules.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Tension directions do not positively span space, so the half-space
    /// intersection is unbounded.
    UnboundedShape,
    /// The half-space intersection has empty interior.
    EmptyShape,
    /// Normalized body is too eccentric: circumradius / inradius above n.
    GaugeRatioExceeded { ratio: f64, limit: f64 },
    /// Set operation across polygon and voxel representations.
    MixedRepresentation,
    /// Density limit did not stabilize at the requested resolution ladder.
    ResolutionTooCoarse,
    /// Whitney decomposition of a domain with no interior points.
    EmptyInterior,
    /// Requested dyadic refinement depth above the supported cap.
    MaxLevelExceeded { requested: u32, cap: u32 },
    /// John center lies outside the domain.
    CenterOutside,
    /// Some boundary cube cannot be joined to the center cube.
    DisconnectedDomain,
    /// Set fails the required (1 - d)K subset E subset (1 + d)K inclusion.
    SandwichViolated { detail: String },
    /// Query point lies outside the set it should belong to.
    PointOutside,
    /// A cube holds fewer field samples than the resolution contract allows.
    UndersampledCube { level: u32, index: [i64; 3], samples: usize },
    /// No admissible cube chain reaches the requested boundary point.
    Unreachable,
    /// Asymmetry too close to zero for a stable quotient.
    DegenerateAsymmetry { value: f64, floor: f64 },
    /// Verification suite name not recognised.
    UnknownSuite(String),
    /// Input deserialization or schema failure.
    BadInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnboundedShape => write!(f, "tension directions do not positively span space"),
            Error::EmptyShape => write!(f, "half-space intersection has empty interior"),
            Error::GaugeRatioExceeded { ratio, limit } => {
                write!(f, "gauge ratio {ratio:.6} exceeds limit {limit:.6}")
            }
            Error::MixedRepresentation => {
                write!(f, "operation needs both sets in the same representation")
            }
            Error::ResolutionTooCoarse => {
                write!(f, "density limit did not stabilize; refine the radius ladder")
            }
            Error::EmptyInterior => write!(f, "domain has empty interior"),
            Error::MaxLevelExceeded { requested, cap } => {
                write!(f, "max_level {requested} above supported cap {cap}")
            }
            Error::CenterOutside => write!(f, "center point lies outside the domain"),
            Error::DisconnectedDomain => {
                write!(f, "cube graph does not connect the boundary layer to the center")
            }
            Error::SandwichViolated { detail } => write!(f, "sandwich inclusion fails: {detail}"),
            Error::PointOutside => write!(f, "point lies outside the set"),
            Error::UndersampledCube { level, index, samples } => write!(
                f,
                "cube level {level} index {index:?} has {samples} samples, below the contract"
            ),
            Error::Unreachable => write!(f, "no cube chain reaches the boundary point"),
            Error::DegenerateAsymmetry { value, floor } => {
                write!(f, "asymmetry {value:.3e} below stability floor {floor:.3e}")
            }
            Error::UnknownSuite(name) => write!(f, "unknown verification suite '{name}'"),
            Error::BadInput(msg) => write!(f, "bad input: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
