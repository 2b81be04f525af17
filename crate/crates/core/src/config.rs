use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the geometry, classification and oracle
/// layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Edge length realization, relative to the edge length.
    pub length: f64,
    /// Collinearity, absolute per unit diameter of the tested point set.
    pub collinear: f64,
    /// Concyclicity, relative to the circumradius.
    pub concyclic: f64,
    /// Tangent-projected gradient, relative to the squared total edge length.
    pub gradient: f64,
    /// Eigenvalues within this fraction of the Lagrangian Hessian norm count
    /// as zero.
    pub eigen_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            length: 1e-9,
            collinear: 1e-8,
            concyclic: 1e-8,
            gradient: 1e-10,
            eigen_zero: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("length", self.length),
            ("collinear", self.collinear),
            ("concyclic", self.concyclic),
            ("gradient", self.gradient),
            ("eigen_zero", self.eigen_zero),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}
