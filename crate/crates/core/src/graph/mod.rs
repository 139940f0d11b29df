//! Metric trees with per-edge densities and their optical geometry.
//!
//! A [`MetricTree`] is built from a [`GraphSpec`] by [`build_tree`], which
//! validates that the graph is a tree with positive lengths and densities.
//! The boundary `Γ` (degree-one vertices) is ordered by ascending vertex id;
//! that ordering is used for every vector-valued boundary quantity in the
//! crate (trace vectors, control channels).

mod density;
mod geometry;

pub use density::{DensityProfile, EdgeDensity, MonotoneCubic};
pub use geometry::{Center, Diameter};

use crate::scalar::Real;
use std::collections::BTreeMap;
use thiserror::Error;

#[allow(unused_imports)]
pub(crate) use density::adaptive_simpson;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph contains a cycle (edge {edge} closes it)")]
    CycleDetected { edge: usize },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("edge {edge}: density must be positive (minimum {min})")]
    NonpositiveDensity { edge: usize, min: f64 },
    #[error("edge {edge}: length must be positive (got {length})")]
    NonpositiveLength { edge: usize, length: f64 },
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: usize, vertex: usize },
    #[error("duplicate {what} id {id}")]
    DuplicateId { what: &'static str, id: usize },
    #[error("graph has no edges")]
    Empty,
    #[error("vertex {0} is not a boundary vertex")]
    NotBoundary(usize),
    #[error("invalid point on edge {edge}: x = {x}")]
    InvalidPoint { edge: usize, x: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec<T> {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: T,
    pub density: DensityProfile<T>,
}

/// Raw, unvalidated description of a metric graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec<T> {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeSpec<T>>,
}

impl<T: Real> GraphSpec<T> {
    /// Same graph with every density multiplied by `s`.
    pub fn with_scaled_density(&self, s: T) -> Self {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.density = e.density.scaled(s);
        }
        out
    }

    /// Star with a centre vertex `0` and leaves `1..=n`; edge `j` runs from
    /// the centre (tail) to leaf `j + 1` (head).
    pub fn star(lengths: &[T], densities: &[T]) -> Self {
        assert_eq!(lengths.len(), densities.len());
        let vertices = (0..=lengths.len()).collect();
        let edges = lengths
            .iter()
            .zip(densities)
            .enumerate()
            .map(|(j, (&length, &rho))| EdgeSpec {
                id: j,
                tail: 0,
                head: j + 1,
                length,
                density: DensityProfile::Constant(rho),
            })
            .collect();
        Self { vertices, edges }
    }

    /// Single edge from vertex `0` to vertex `1`.
    pub fn interval(length: T, density: DensityProfile<T>) -> Self {
        Self {
            vertices: vec![0, 1],
            edges: vec![EdgeSpec { id: 0, tail: 0, head: 1, length, density }],
        }
    }
}

/// Which end of an edge a vertex sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Tail,
    Head,
}

#[derive(Debug, Clone)]
pub(crate) struct Edge<T> {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: T,
    pub density: EdgeDensity<T>,
    pub optical_length: T,
}

/// A point of the tree: an edge id and a local coordinate from the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint<T> {
    pub edge: usize,
    pub x: T,
}

/// Validated, immutable metric tree.
#[derive(Debug, Clone)]
pub struct MetricTree<T> {
    spec: GraphSpec<T>,
    vertex_ids: Vec<usize>,
    vertex_index: BTreeMap<usize, usize>,
    edges: Vec<Edge<T>>,
    edge_index: BTreeMap<usize, usize>,
    incident: Vec<Vec<(usize, End)>>,
    boundary: Vec<usize>,
    vertex_distance: Vec<Vec<T>>,
}

/// Validates a graph description and builds the tree.
pub fn build_tree<T: Real>(spec: GraphSpec<T>) -> Result<MetricTree<T>, GraphError> {
    if spec.edges.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut vertex_index = BTreeMap::new();
    for (i, &v) in spec.vertices.iter().enumerate() {
        if vertex_index.insert(v, i).is_some() {
            return Err(GraphError::DuplicateId { what: "vertex", id: v });
        }
    }
    // Internal vertex order follows ascending id so that boundary order is too.
    let vertex_ids: Vec<usize> = vertex_index.keys().copied().collect();
    let vertex_index: BTreeMap<usize, usize> = vertex_ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nv = vertex_ids.len();

    let mut edge_index = BTreeMap::new();
    let mut edges = Vec::with_capacity(spec.edges.len());
    let mut uf = UnionFind::new(nv);
    for es in &spec.edges {
        if edge_index.insert(es.id, edges.len()).is_some() {
            return Err(GraphError::DuplicateId { what: "edge", id: es.id });
        }
        let lookup = |v: usize| vertex_index.get(&v).copied().ok_or(GraphError::UnknownVertex { edge: es.id, vertex: v });
        let (tail, head) = (lookup(es.tail)?, lookup(es.head)?);
        if !(es.length > T::zero()) || !es.length.is_finite() {
            return Err(GraphError::NonpositiveLength { edge: es.id, length: es.length.to_f64_lossy() });
        }
        if let DensityProfile::Sampled(v) = &es.density {
            if v.len() < 2 {
                return Err(GraphError::NonpositiveDensity { edge: es.id, min: f64::NAN });
            }
        }
        let min = es.density.min_on(es.length);
        if !(min > T::zero()) || !es.density.max_on(es.length).is_finite() {
            return Err(GraphError::NonpositiveDensity { edge: es.id, min: min.to_f64_lossy() });
        }
        if !uf.union(tail, head) {
            return Err(GraphError::CycleDetected { edge: es.id });
        }
        let density = es.density.on_edge(es.length);
        let optical_length = density.optical(T::zero(), es.length);
        edges.push(Edge { id: es.id, tail, head, length: es.length, density, optical_length });
    }
    let components = uf.components();
    if components != 1 {
        return Err(GraphError::Disconnected { components });
    }

    let mut incident = vec![Vec::new(); nv];
    for (k, e) in edges.iter().enumerate() {
        incident[e.tail].push((k, End::Tail));
        incident[e.head].push((k, End::Head));
    }
    let boundary: Vec<usize> = (0..nv).filter(|&v| incident[v].len() == 1).collect();

    let mut tree = MetricTree {
        spec,
        vertex_ids,
        vertex_index,
        edges,
        edge_index,
        incident,
        boundary,
        vertex_distance: Vec::new(),
    };
    let mut dist: Vec<Vec<T>> = (0..nv).map(|v| tree.distances_from_vertex(v)).collect();
    // Sums along a path depend on the direction; keep the table exactly symmetric.
    for a in 0..nv {
        for b in 0..a {
            dist[a][b] = dist[b][a];
        }
    }
    tree.vertex_distance = dist;
    Ok(tree)
}

impl<T: Real> MetricTree<T> {
    pub fn spec(&self) -> &GraphSpec<T> {
        &self.spec
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex id of internal vertex index `v`.
    pub fn vertex_id(&self, v: usize) -> usize {
        self.vertex_ids[v]
    }

    pub fn vertex_index(&self, id: usize) -> Option<usize> {
        self.vertex_index.get(&id).copied()
    }

    /// Boundary vertex ids in the canonical (ascending) order.
    pub fn boundary_ids(&self) -> Vec<usize> {
        self.boundary.iter().map(|&v| self.vertex_ids[v]).collect()
    }

    /// Number of boundary vertices `m`.
    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Position of a vertex id in the boundary ordering.
    pub fn boundary_position(&self, id: usize) -> Option<usize> {
        let v = self.vertex_index(id)?;
        self.boundary.iter().position(|&b| b == v)
    }

    pub(crate) fn boundary_indices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_vertex_ids(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|v| self.incident[*v].len() > 1)
            .map(|v| self.vertex_ids[v])
            .collect()
    }

    pub(crate) fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub(crate) fn incident(&self, v: usize) -> &[(usize, End)] {
        &self.incident[v]
    }

    pub fn edge_length(&self, edge_id: usize) -> Option<T> {
        self.edge_index.get(&edge_id).map(|&k| self.edges[k].length)
    }

    pub fn edge_optical_length(&self, edge_id: usize) -> Option<T> {
        self.edge_index.get(&edge_id).map(|&k| self.edges[k].optical_length)
    }

    /// Total optical length `Σ_j ∫_{e_j} √ρ`.
    pub fn total_optical_length(&self) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| acc + e.optical_length)
    }

    /// Density at a point.
    pub fn density_at(&self, p: GraphPoint<T>) -> Result<T, GraphError> {
        let k = self.check_point(p)?;
        Ok(self.edges[k].density.eval(p.x))
    }

    /// Canonical point for a vertex: the lowest-id incident edge.
    pub fn vertex_point(&self, id: usize) -> Option<GraphPoint<T>> {
        let v = self.vertex_index(id)?;
        let &(k, end) = self.incident[v].iter().min_by_key(|(k, _)| self.edges[*k].id)?;
        let e = &self.edges[k];
        Some(GraphPoint { edge: e.id, x: if end == End::Tail { T::zero() } else { e.length } })
    }

    /// Normalizes points that coincide with a vertex to the canonical form.
    pub fn canonical(&self, p: GraphPoint<T>) -> Result<GraphPoint<T>, GraphError> {
        let k = self.check_point(p)?;
        let e = &self.edges[k];
        if p.x == T::zero() {
            return Ok(self.vertex_point(self.vertex_ids[e.tail]).unwrap());
        }
        if p.x == e.length {
            return Ok(self.vertex_point(self.vertex_ids[e.head]).unwrap());
        }
        Ok(p)
    }

    pub(crate) fn check_point(&self, p: GraphPoint<T>) -> Result<usize, GraphError> {
        let k = *self
            .edge_index
            .get(&p.edge)
            .ok_or(GraphError::InvalidPoint { edge: p.edge, x: p.x.to_f64_lossy() })?;
        if !(p.x >= T::zero() && p.x <= self.edges[k].length) {
            return Err(GraphError::InvalidPoint { edge: p.edge, x: p.x.to_f64_lossy() });
        }
        Ok(k)
    }

    /// Optical distance between two vertices (by internal index).
    pub(crate) fn vertex_distance(&self, a: usize, b: usize) -> T {
        self.vertex_distance[a][b]
    }

    fn distances_from_vertex(&self, source: usize) -> Vec<T> {
        let mut dist = vec![T::zero(); self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(v) = stack.pop() {
            for &(k, end) in &self.incident[v] {
                let e = &self.edges[k];
                let w = if end == End::Tail { e.head } else { e.tail };
                if !seen[w] {
                    seen[w] = true;
                    dist[w] = dist[v] + e.optical_length;
                    stack.push(w);
                }
            }
        }
        dist
    }

    /// Vertex path (internal indices) between two vertices.
    pub(crate) fn vertex_path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.vertex_count()];
        prev[from] = from;
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                break;
            }
            for &(k, end) in &self.incident[v] {
                let e = &self.edges[k];
                let w = if end == End::Tail { e.head } else { e.tail };
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    stack.push(w);
                }
            }
        }
        let mut path = vec![to];
        let mut v = to;
        while v != from {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        path
    }

    pub(crate) fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.incident[a].iter().map(|&(k, _)| k).find(|&k| {
            let e = &self.edges[k];
            (e.tail == a && e.head == b) || (e.tail == b && e.head == a)
        })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }

    fn components(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&i| self.find(i) == i).count()
    }
}
