use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DiffOp;

/// Spatial dimension of the manifold, restricted to 3..=7.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if (3..=7).contains(&n) {
            Ok(Dim(n))
        } else {
            Err(Error::Dimension(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn f(self) -> f64 {
        self.0 as f64
    }

    /// -n(n-1), the scalar curvature of hyperbolic space.
    #[inline]
    pub fn hyperbolic_curvature(self) -> f64 {
        -self.f() * (self.f() - 1.0)
    }

    /// Area of the round unit (n-1)-sphere, 2 π^(n/2) / Γ(n/2).
    pub fn sphere_area(self) -> f64 {
        use std::f64::consts::PI;
        match self.0 {
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            5 => 8.0 * PI * PI / 3.0,
            6 => PI.powi(3),
            7 => 16.0 * PI.powi(3) / 15.0,
            _ => unreachable!("Dim is validated"),
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Dim::new(n)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.0
    }
}

/// Radial nodes in (0, T_max], uniform in x = ln t.
///
/// A geometric mesh puts node spacing proportional to t, which resolves the
/// O(t^n) boundary behaviour that carries the mass. Successive refinement
/// levels double the interval count, so every coarse node is also a fine node.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    log_nodes: Vec<f64>,
    h: f64,
    level: u32,
}

impl RadialGrid {
    pub fn geometric(t_min: f64, t_max: f64, intervals: usize) -> Result<Self> {
        Self::geometric_level(t_min, t_max, intervals, 0)
    }

    /// Grid at refinement `level`: `base_intervals * 2^level` intervals.
    pub fn geometric_level(t_min: f64, t_max: f64, base_intervals: usize, level: u32) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        let intervals = base_intervals
            .checked_mul(1usize << level)
            .ok_or_else(|| Error::InvalidGrid("refinement overflow".into()))?;
        if intervals < 5 {
            return Err(Error::GridTooCoarse { needed: 6, got: intervals + 1 });
        }
        let x0 = t_min.ln();
        let h = (t_max.ln() - x0) / intervals as f64;
        let mut log_nodes: Vec<f64> = (0..=intervals).map(|i| x0 + i as f64 * h).collect();
        log_nodes[intervals] = t_max.ln();
        let mut nodes: Vec<f64> = log_nodes.iter().map(|x| x.exp()).collect();
        nodes[0] = t_min;
        nodes[intervals] = t_max;
        Ok(RadialGrid { nodes, log_nodes, h, level })
    }

    /// Rebuilds a grid from explicit nodes, which must be geometric.
    pub fn from_nodes(nodes: &[f64], level: u32) -> Result<Self> {
        if nodes.len() < 6 {
            return Err(Error::GridTooCoarse { needed: 6, got: nodes.len() });
        }
        if nodes.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidGrid("nodes must be finite and positive".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let n = nodes.len();
        let grid = Self::geometric_level(nodes[0], nodes[n - 1], n - 1, 0)?;
        for (a, b) in grid.nodes.iter().zip(nodes) {
            if ((a - b) / b).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!("node {b} breaks the geometric spacing")));
            }
        }
        Ok(RadialGrid { nodes: nodes.to_vec(), level, ..grid })
    }

    /// Same mesh tagged with a different refinement level.
    pub fn with_level(self, level: u32) -> Self {
        RadialGrid { level, ..self }
    }

    /// The next refinement level of this grid (half the spacing in ln t).
    pub fn refine(&self) -> Self {
        let n = self.len();
        Self::geometric_level(self.nodes[0], self.nodes[n - 1], n - 1, 1)
            .map(|g| RadialGrid { level: self.level + 1, ..g })
            .expect("refining a valid grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_nodes(&self) -> &[f64] {
        &self.log_nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spacing in x = ln t.
    pub fn log_step(&self) -> f64 {
        self.h
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn diff_op(&self) -> DiffOp {
        DiffOp::uniform(self.len(), self.h)
    }

    /// Derivatives with respect to t of sampled `f`, returned as (f_t, f_tt).
    pub fn derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let op = self.diff_op();
        let fx = op.d1(f);
        let fxx = op.d2(f);
        let ft = fx.iter().zip(&self.nodes).map(|(d, t)| d / t).collect();
        let ftt = fxx
            .iter()
            .zip(&fx)
            .zip(&self.nodes)
            .map(|((dd, d), t)| (dd - d) / (t * t))
            .collect();
        (ft, ftt)
    }

    /// Same mesh (bitwise equal nodes).
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.nodes == other.nodes
    }

    /// Index range of nodes inside the closed interval [a, b].
    pub fn index_range(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.nodes.partition_point(|&t| t < a);
        let hi = self.nodes.partition_point(|&t| t <= b);
        lo..hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_bounds() {
        assert!(Dim::new(2).is_err());
        assert!(Dim::new(8).is_err());
        assert_eq!(Dim::new(4).unwrap().hyperbolic_curvature(), -12.0);
    }

    #[test]
    fn sphere_areas_match_gamma_formula() {
        // |S^2| = 4π, |S^4| = 8π²/3
        assert!((Dim::new(3).unwrap().sphere_area() - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        let s4 = Dim::new(5).unwrap().sphere_area();
        assert!((s4 - 26.318945069571622).abs() < 1e-12);
    }

    #[test]
    fn refinement_nests() {
        let g = RadialGrid::geometric(1e-3, 2.0, 40).unwrap();
        let f = g.refine();
        assert_eq!(f.len(), 81);
        assert_eq!(f.level(), 1);
        for i in 0..g.len() {
            assert!((g.nodes()[i] - f.nodes()[2 * i]).abs() <= 1e-15 * g.nodes()[i]);
        }
    }

    #[test]
    fn rejects_non_geometric_nodes() {
        let nodes = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        assert!(matches!(RadialGrid::from_nodes(&nodes, 0), Err(Error::InvalidGrid(_))));
        assert!(RadialGrid::from_nodes(&[1.0, 0.5, 2.0, 3.0, 4.0, 5.0], 0).is_err());
    }
}
