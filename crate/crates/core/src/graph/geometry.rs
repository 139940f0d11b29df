//! Optical distance, diameter, centre and boundary eccentricity.

use super::{GraphError, GraphPoint, MetricTree};
use crate::scalar::Real;

/// Optical diameter and the boundary pair (vertex ids) attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diameter<T> {
    pub value: T,
    pub pair: (usize, usize),
}

/// Optical centre of the tree and its largest distance to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center<T> {
    pub point: GraphPoint<T>,
    pub eccentricity: T,
}

impl<T: Real> MetricTree<T> {
    /// `σ(a, b) = ∫ √ρ |dx|` along the unique path between two points.
    pub fn optical_distance(&self, a: GraphPoint<T>, b: GraphPoint<T>) -> Result<T, GraphError> {
        let ka = self.check_point(a)?;
        let kb = self.check_point(b)?;
        if ka == kb {
            let (lo, hi) = if a.x <= b.x { (a.x, b.x) } else { (b.x, a.x) };
            return Ok(self.edges[ka].density.optical(lo, hi));
        }
        let ea = &self.edges[ka];
        let eb = &self.edges[kb];
        let exits = |e: &super::Edge<T>, x: T| {
            [(e.tail, e.density.optical(T::zero(), x)), (e.head, e.density.optical(x, e.length))]
        };
        let mut best: Option<T> = None;
        for (va, da) in exits(ea, a.x) {
            for (vb, db) in exits(eb, b.x) {
                let d = da + self.vertex_distance(va, vb) + db;
                best = Some(match best {
                    Some(cur) if cur <= d => cur,
                    _ => d,
                });
            }
        }
        Ok(best.unwrap())
    }

    /// Optical distance between two vertices given by id.
    pub fn vertex_optical_distance(&self, a: usize, b: usize) -> Option<T> {
        Some(self.vertex_distance(self.vertex_index(a)?, self.vertex_index(b)?))
    }

    /// `d(Ω) = max_{a,b∈Γ} σ(a,b)` by exhaustive scan; ties keep the first
    /// pair in boundary order.
    pub fn optical_diameter(&self) -> Diameter<T> {
        let b = self.boundary_indices();
        let mut best = Diameter { value: T::zero(), pair: (self.vertex_id(b[0]), self.vertex_id(b[1])) };
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let d = self.vertex_distance(b[i], b[j]);
                if d > best.value {
                    best = Diameter { value: d, pair: (self.vertex_id(b[i]), self.vertex_id(b[j])) };
                }
            }
        }
        best
    }

    /// `d_1(γ1, Ω) = max_{γ∈Γ\{γ1}} σ(γ1, γ)`.
    pub fn eccentricity(&self, gamma1: usize) -> Result<T, GraphError> {
        let v = self.vertex_index(gamma1).ok_or(GraphError::NotBoundary(gamma1))?;
        if !self.boundary_indices().contains(&v) {
            return Err(GraphError::NotBoundary(gamma1));
        }
        Ok(self
            .boundary_indices()
            .iter()
            .filter(|&&g| g != v)
            .map(|&g| self.vertex_distance(v, g))
            .fold(T::zero(), |a, b| a.max(b)))
    }

    /// Largest optical distance from a point to the boundary.
    pub fn boundary_eccentricity(&self, p: GraphPoint<T>) -> Result<T, GraphError> {
        let mut best = T::zero();
        for &g in self.boundary_indices() {
            let gp = self.vertex_point(self.vertex_id(g)).unwrap();
            best = best.max(self.optical_distance(p, gp)?);
        }
        Ok(best)
    }

    /// The unique point minimizing the largest optical distance to `Γ`.
    ///
    /// On a tree it is the midpoint of any diametral path, so only the edges
    /// of that path are scanned.
    pub fn optical_center(&self) -> Center<T> {
        let diam = self.optical_diameter();
        let half = diam.value * T::lit(0.5);
        let tol = T::lit(1e-10) * diam.value.max(T::one());
        let from = self.vertex_index(diam.pair.0).unwrap();
        let to = self.vertex_index(diam.pair.1).unwrap();
        let path = self.vertex_path(from, to);
        let mut walked = T::zero();
        let mut point = None;
        for w in path.windows(2) {
            let k = self.edge_between(w[0], w[1]).unwrap();
            let e = &self.edges[k];
            if (half - walked).abs() <= tol {
                point = Some(self.vertex_point(self.vertex_id(w[0])).unwrap());
                break;
            }
            if half < walked + e.optical_length - tol {
                let s = half - walked;
                let from_tail = if e.tail == w[0] { s } else { e.optical_length - s };
                point = Some(GraphPoint { edge: e.id, x: e.density.invert_optical(from_tail) });
                break;
            }
            walked += e.optical_length;
        }
        let point = point.unwrap_or_else(|| self.vertex_point(self.vertex_id(*path.last().unwrap())).unwrap());
        let point = self.canonical(point).unwrap();
        let eccentricity = self.boundary_eccentricity(point).unwrap();
        Center { point, eccentricity }
    }
}
