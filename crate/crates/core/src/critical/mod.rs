//! Symbolic critical points of the oriented area for polygons with
//! non-crossing diagonal chains, and three-chains as a special case.

mod classify;
mod matching;
mod pnd;
mod pitchfork;

pub use classify::{classify_configuration, CellVerdict, ChainVerdict, Classification};
pub use matching::{match_numeric, rigid_vertices, IndexMismatch, MatchReport};
pub use pitchfork::{concyclic_diagonal, hessian_zero_parameters_222, ConcyclicShape};
pub use pnd::{enumerate_critical_pnd, enumerate_critical_three_chain, Chain, PolygonWithDiagonals};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Configuration, CyclicPolygon, GeomError, ReachInterval};
use crate::graph::GraphError;
use crate::morse::{IndexReport, MorseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticalError {
    #[error("linkage is outside the supported class: {0}")]
    NotInClass(String),
    #[error("non-generic lengths: {0}")]
    NonGeneric(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl From<MorseError> for CriticalError {
    fn from(e: MorseError) -> Self {
        CriticalError::NonGeneric(e.to_string())
    }
}

/// State of one attached chain at a critical configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ChainStatus {
    /// Straight, edge `i` pointing along the diagonal iff `signs[i] > 0`.
    Aligned { signs: Vec<i8>, f: usize, w: f64 },
    /// Moving freely with its endpoints at `distance`.
    Free { distance: f64, reach: ReachInterval },
}

impl ChainStatus {
    pub fn key(&self) -> String {
        match self {
            ChainStatus::Aligned { signs, .. } => {
                let s: String = signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
                format!("A{s}")
            }
            ChainStatus::Free { .. } => "F".into(),
        }
    }

    pub fn is_aligned(&self) -> bool {
        matches!(self, ChainStatus::Aligned { .. })
    }
}

/// Reduced configuration space of a free chain closed up by its diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldFactor {
    pub chain: usize,
    /// Chain lengths followed by the endpoint distance.
    pub polygon_lengths: Vec<f64>,
    pub dim: usize,
    /// `+1` or `-1` for the two mirror placements of a two-edge chain, which
    /// are separate records.
    pub elbow: Option<i8>,
}

impl ManifoldFactor {
    /// Euler characteristic when known: a point, or a union of circles.
    pub fn euler(&self) -> Option<i64> {
        match self.dim {
            0 => Some(1),
            1 => Some(0),
            _ => None,
        }
    }
}

/// One critical point or critical manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub kind: Vec<ChainStatus>,
    /// Elementary cycles in the frame of the representative.
    pub cells: Vec<CyclicPolygon>,
    pub cell_vertices: Vec<Vec<String>>,
    pub representative: Configuration,
    pub area: f64,
    pub index: IndexReport,
    pub manifold_dim: usize,
    pub manifold_factors: Vec<ManifoldFactor>,
}

impl CriticalRecord {
    pub fn kind_key(&self) -> String {
        self.kind.iter().map(ChainStatus::key).collect::<Vec<_>>().join(",")
    }

    pub fn is_isolated(&self) -> bool {
        self.manifold_dim == 0
    }

    /// Circular type for three-chains: the whole cycle is one cell.
    pub fn is_circular(&self) -> bool {
        self.kind.iter().all(|k| !k.is_aligned())
    }
}

/// Sorts by `(index, kind key, area)`.
pub fn sort_records(records: &mut [CriticalRecord]) {
    records.sort_by(|a, b| {
        a.index
            .index
            .cmp(&b.index.index)
            .then_with(|| a.kind_key().cmp(&b.kind_key()))
            .then_with(|| a.area.partial_cmp(&b.area).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("Euler characteristic unknown for {} critical components", .unknown.len())]
pub struct UnknownTopology {
    /// Records whose component has a factor of unknown Euler characteristic.
    pub unknown: Vec<usize>,
}

/// `sum (-1)^index chi(C)` over the records.
pub fn euler_sum(records: &[CriticalRecord]) -> Result<i64, UnknownTopology> {
    let mut total = 0;
    let mut unknown = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let chis: Vec<Option<i64>> = r.manifold_factors.iter().map(ManifoldFactor::euler).collect();
        let chi = if chis.contains(&Some(0)) {
            0
        } else if chis.iter().any(Option::is_none) {
            unknown.push(i);
            continue;
        } else {
            chis.iter().map(|c| c.unwrap()).product()
        };
        total += if r.index.index % 2 == 0 { chi } else { -chi };
    }
    if unknown.is_empty() {
        Ok(total)
    } else {
        Err(UnknownTopology { unknown })
    }
}
