//! Numerical verification: angle chart, constrained critical search,
//! inertia, derivative checks and continuation in one edge length.

mod chart;
mod continuation;
mod fd;
mod search;

pub use chart::{AngleChart, ChartObjective, Problem};
pub use continuation::{
    continue_family, BranchDiagram, BranchKind, BranchPoint, ContinuationSettings, DiagramColumn, Event,
    EventKind,
};
pub use fd::{check_with_gradient, fd_check, FdMismatch, FdReport};
pub use search::{
    constrained_inertia, find_critical_numeric, inertia_at, jacobian_conditioning, lagrangian_hessian,
    multipliers, newton_critical, objective_at, project_to_manifold, projected_gradient, random_start,
    tangent_basis, InertiaTriple, NumericCritical, SearchSettings,
};

use thiserror::Error;

use crate::geom::GeomError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("projection onto the constraint set did not converge")]
    NoConvergence,
    #[error("constraint Jacobian is rank deficient")]
    Singular,
    #[error("configuration is not critical (tangent gradient {gradient:e})")]
    NotCritical { gradient: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("finite difference check failed on {} entries", .0.len())]
    CheckFailed(Vec<FdMismatch>),
    #[error("branch lost near parameter {parameter}")]
    BranchLost { parameter: f64 },
    #[error("invalid continuation request: {0}")]
    BadRange(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
