use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::ads::AdsSchwarzschild;
use super::grid::Dim;

/// Einstein reference metrics with `R = -n(n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceMetric {
    Hyperbolic(Dim),
    AdsSchwarzschild(AdsSchwarzschild),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Hyperbolic,
    AdsSchwarzschild,
}

impl ReferenceMetric {
    pub fn dim(&self) -> Dim {
        match self {
            ReferenceMetric::Hyperbolic(d) => *d,
            ReferenceMetric::AdsSchwarzschild(s) => s.dim(),
        }
    }

    /// Hawking mass of the reference (constant in t).
    pub fn mass(&self) -> f64 {
        match self {
            ReferenceMetric::Hyperbolic(_) => 0.0,
            ReferenceMetric::AdsSchwarzschild(s) => s.mass(),
        }
    }

    pub fn log_a_at(&self, t: f64) -> Result<f64> {
        match self {
            ReferenceMetric::Hyperbolic(_) => Ok(0.0),
            ReferenceMetric::AdsSchwarzschild(s) => s.point_at(t, false).map(|(_, la)| la),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ReferenceMetric::Hyperbolic(d) => format!("hyperbolic n={}", d.get()),
            ReferenceMetric::AdsSchwarzschild(s) => {
                format!("ads-schwarzschild n={} m={}", s.dim().get(), s.mass())
            }
        }
    }
}
