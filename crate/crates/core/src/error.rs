use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the module that raises them; the CLI maps the
/// variant name onto the `kind` field of its JSON error document.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // beliefs
    #[error("belief has a negative weight {value} at state {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("belief weights sum to {sum}, not 1")]
    SumNotOne { sum: f64 },
    #[error("belief has the wrong length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("posterior barycenter misses the prior by {residual}")]
    BarycenterMismatch { residual: f64 },
    #[error("posterior probabilities are invalid: {0}")]
    BadWeights(String),
    #[error("domain is empty")]
    EmptyDomain,
    #[error("bad index partition: {0}")]
    BadIndices(String),
    #[error("grid resolution {0} is too small (need at least 2)")]
    ResolutionTooSmall(usize),
    #[error("point lies outside the domain")]
    OutsideDomain,

    // menus
    #[error("menu is empty")]
    EmptyMenu,
    #[error("mixing weight {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("act has {got} utilities but the state space has {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    // costs
    #[error("cost specification is not convex: {0}")]
    NonConvexSpec(String),
    #[error("measure of uncertainty is not convex: {0}")]
    NonConvexInput(String),
    #[error("prior lies on the boundary of the cost domain")]
    PriorOnDomainBoundary,
    #[error("prior lies outside the cost domain")]
    PriorOutsideDomain,
    #[error("posterior distribution was built for a different prior (residual {residual})")]
    PriorMismatch { residual: f64 },
    #[error("subdifferential is empty at this point")]
    EmptySubdifferential,
    #[error("invalid cost specification: {0}")]
    InvalidSpec(String),

    // solver
    #[error("no grid point lies in the domain")]
    InfeasibleGrid,
    #[error("objective is unbounded")]
    UnboundedObjective,
    #[error("operation needs a two-state problem, got {0} states")]
    NotTwoStates(usize),
    #[error("operation does not support this cost family: {0}")]
    UnsupportedCostFamily(String),
    #[error("linear program failed: {0}")]
    LinearProgram(String),

    // diagnostics
    #[error("prior is not in the convex hull of the candidate points")]
    PriorNotInHull,
    #[error("certificate failed validation: {0}")]
    CertificateInvalid(String),
    #[error("no admissible perturbation size was found")]
    EpsilonSearchFailed,
    #[error("supporting hyperplane is not unique (width {width})")]
    NonUniqueHyperplane { width: f64 },
    #[error("set is unbounded")]
    Unbounded,
    #[error("construction did not verify: {0}")]
    Postcondition(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::SumNotOne { .. } => "SumNotOne",
            Error::WrongLength { .. } => "WrongLength",
            Error::BarycenterMismatch { .. } => "BarycenterMismatch",
            Error::BadWeights(_) => "BadWeights",
            Error::EmptyDomain => "EmptyDomain",
            Error::BadIndices(_) => "BadIndices",
            Error::ResolutionTooSmall(_) => "ResolutionTooSmall",
            Error::OutsideDomain => "OutsideDomain",
            Error::EmptyMenu => "EmptyMenu",
            Error::AlphaOutOfRange(_) => "AlphaOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonConvexSpec(_) => "NonConvexSpec",
            Error::NonConvexInput(_) => "NonConvexInput",
            Error::PriorOnDomainBoundary => "PriorOnDomainBoundary",
            Error::PriorOutsideDomain => "PriorOutsideDomain",
            Error::PriorMismatch { .. } => "PriorMismatch",
            Error::EmptySubdifferential => "EmptySubdifferential",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InfeasibleGrid => "InfeasibleGrid",
            Error::UnboundedObjective => "UnboundedObjective",
            Error::NotTwoStates(_) => "NotTwoStates",
            Error::UnsupportedCostFamily(_) => "UnsupportedCostFamily",
            Error::LinearProgram(_) => "LinearProgram",
            Error::PriorNotInHull => "PriorNotInHull",
            Error::CertificateInvalid(_) => "CertificateInvalid",
            Error::EpsilonSearchFailed => "EpsilonSearchFailed",
            Error::NonUniqueHyperplane { .. } => "NonUniqueHyperplane",
            Error::Unbounded => "Unbounded",
            Error::Postcondition(_) => "Postcondition",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
