use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// The variants are coarse on purpose: callers (notably the CLI) map them to
/// exit codes, and the message carries the detail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("epsilon too large: {0}")]
    EpsTooLarge(String),

    #[error("no interior minimum below the x -> 0 limit for t1 = {t1}")]
    NoInteriorMinimum { t1: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("capacity exceeded: n = {n} exceeds the limit {max} for {what}")]
    Capacity { n: usize, max: usize, what: &'static str },

    #[error("constraint ({edges} edges, {triangles} triangles) is not graphical for n = {n}")]
    NonGraphical { n: usize, edges: u64, triangles: u64 },

    #[error("constraint ({edges} edges, {triangles} triangles) lies on the boundary of the mean region for n = {n}; multipliers diverge")]
    BoundaryConstraint { n: usize, edges: u64, triangles: u64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
