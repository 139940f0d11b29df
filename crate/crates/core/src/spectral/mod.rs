//! Dirichlet spectral problem on a metric tree.
//!
//! `-(1/ρ) w'' = λ w` on every edge, continuity and the Kirchhoff balance at
//! interior vertices, `w = 0` on the boundary. Discretized with P1 elements;
//! eigenvalues are Richardson-extrapolated from two nested meshes.

mod eigen;
mod mesh;
mod modal;

#[allow(unused_imports)]
pub(crate) use mesh::gauss4;
pub use mesh::{Assembly, MeshLayout, TreeLdl, TreeSymMatrix};
pub use modal::{complex_norm, modal_norm, sequence_norm, wave_norm, ModalState};

use crate::graph::{End, MetricTree};
use crate::scalar::Real;
use nalgebra::DMatrix;
use std::ops::Range;
use thiserror::Error;

/// Relative gap below which eigenvalues are treated as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Minimum elements per wavelength of the highest requested mode.
pub const ELEMENTS_PER_WAVELENGTH: f64 = 20.0;
const EIGEN_SEED: u64 = 0x0005_eed5_bec7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("mesh too coarse: {reason}")]
    MeshTooCoarse { reason: String },
    #[error("eigen solver failure: {reason}")]
    EigenSolverFailure { reason: String },
    #[error("mass matrix is not positive definite")]
    DegenerateMassMatrix,
}

/// How many elements each edge gets.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementRule<T> {
    /// Same count on every edge.
    Uniform(usize),
    /// One count per edge, in graph-spec edge order.
    PerEdge(Vec<usize>),
    /// `ceil(density · optical length)` per edge, at least 2.
    PerOpticalLength(T),
}

/// Mesh settings for [`solve_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig<T> {
    pub elements: ElementRule<T>,
    /// The fine mesh refines the base mesh by this factor; 1 disables
    /// extrapolation.
    pub refinement: usize,
}

impl<T: Real> MeshConfig<T> {
    pub fn uniform(n: usize) -> Self {
        Self { elements: ElementRule::Uniform(n), refinement: 2 }
    }

    pub fn per_optical_length(density: T) -> Self {
        Self { elements: ElementRule::PerOpticalLength(density), refinement: 2 }
    }

    pub fn with_refinement(mut self, r: usize) -> Self {
        self.refinement = r;
        self
    }

    /// Base element counts per edge.
    pub fn elements(&self, tree: &MetricTree<T>) -> Result<Vec<usize>, SpectralError> {
        let counts = match &self.elements {
            ElementRule::Uniform(n) => vec![*n; tree.edge_count()],
            ElementRule::PerEdge(v) => {
                if v.len() != tree.edge_count() {
                    return Err(SpectralError::MeshTooCoarse {
                        reason: format!("{} element counts for {} edges", v.len(), tree.edge_count()),
                    });
                }
                v.clone()
            }
            ElementRule::PerOpticalLength(d) => tree
                .edges()
                .iter()
                .map(|e| (*d * e.optical_length).ceil().to_f64_lossy().max(2.0) as usize)
                .collect(),
        };
        if self.refinement == 0 {
            return Err(SpectralError::MeshTooCoarse { reason: "refinement factor must be at least 1".into() });
        }
        for (e, &n) in tree.edges().iter().zip(&counts) {
            if n < 2 {
                return Err(SpectralError::MeshTooCoarse { reason: format!("edge {} has {n} elements, need at least 2", e.id) });
            }
        }
        Ok(counts)
    }
}

/// Assembles the P1 stiffness and ρ-mass on the base mesh of `mesh`.
pub fn assemble<T: Real>(tree: &MetricTree<T>, mesh: &MeshConfig<T>) -> Result<(MeshLayout<T>, Assembly<T>), SpectralError> {
    let counts = mesh.elements(tree)?;
    let layout = MeshLayout::new(tree, &counts);
    let asm = Assembly::new(tree, &layout);
    if asm.free.is_empty() {
        return Err(SpectralError::MeshTooCoarse { reason: "no free degrees of freedom".into() });
    }
    Ok((layout, asm))
}

/// Eigenvalues, ρ-orthonormal eigenfunctions and boundary traces.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    eigenvalues: Vec<T>,
    fine_eigenvalues: Vec<T>,
    coarse_eigenvalues: Option<Vec<T>>,
    /// Nodal values, node id × mode.
    modes: DMatrix<T>,
    kappa: DMatrix<T>,
    alpha: DMatrix<T>,
    boundary_ids: Vec<usize>,
    layout: MeshLayout<T>,
    assembly: Assembly<T>,
    base_elements: Vec<usize>,
    refinement: usize,
    clusters: Vec<Range<usize>>,
}

fn solve_level<T: Real>(
    tree: &MetricTree<T>,
    elements: &[usize],
    k: usize,
) -> Result<(MeshLayout<T>, Assembly<T>, Vec<T>, DMatrix<T>), SpectralError> {
    let layout = MeshLayout::new(tree, elements);
    let asm = Assembly::new(tree, &layout);
    let (kr, mr) = asm.reduced();
    let pairs = eigen::lowest_eigenpairs(&kr, &mr, k, EIGEN_SEED)?;
    let mut modes = DMatrix::zeros(layout.node_count(), k);
    for (i, &p) in asm.free.iter().enumerate() {
        let node = layout.order[p];
        for j in 0..k {
            modes[(node, j)] = pairs.vectors[(i, j)];
        }
    }
    Ok((layout, asm, pairs.values, modes))
}

/// Computes the first `k` Dirichlet eigenpairs.
pub fn solve_spectrum<T: Real>(tree: &MetricTree<T>, mesh: &MeshConfig<T>, k: usize) -> Result<SpectralData<T>, SpectralError> {
    if k == 0 {
        return Err(SpectralError::MeshTooCoarse { reason: "at least one mode is required".into() });
    }
    let base = mesh.elements(tree)?;
    let r = mesh.refinement;
    let (coarse, fine_elements) = if r > 1 {
        let (_, _, values, _) = solve_level(tree, &base, k)?;
        (Some(values), base.iter().map(|n| n * r).collect::<Vec<_>>())
    } else {
        (None, base.clone())
    };
    let (layout, assembly, fine, modes) = solve_level(tree, &fine_elements, k)?;
    let eigenvalues: Vec<T> = match &coarse {
        Some(c) => {
            let r2 = T::from_count(r * r);
            fine.iter().zip(c).map(|(&f, &c)| (r2 * f - c) / (r2 - T::one())).collect()
        }
        None => fine.clone(),
    };

    // Resolution rule on the base mesh, using the computed top eigenvalue.
    let top = eigenvalues[k - 1].max(T::zero()).sqrt();
    for (e, &n) in tree.edges().iter().zip(&base) {
        let needed = T::lit(ELEMENTS_PER_WAVELENGTH) * e.optical_length * top / T::two_pi();
        if T::from_count(n) < needed {
            return Err(SpectralError::MeshTooCoarse {
                reason: format!("edge {} has {n} elements, mode {k} needs {:.0}", e.id, needed.ceil()),
            });
        }
    }

    let mut data = SpectralData {
        eigenvalues,
        fine_eigenvalues: fine,
        coarse_eigenvalues: coarse,
        modes,
        kappa: DMatrix::zeros(k, tree.boundary_len()),
        alpha: DMatrix::zeros(k, tree.boundary_len()),
        boundary_ids: tree.boundary_ids(),
        layout,
        assembly,
        base_elements: base,
        refinement: r,
        clusters: Vec::new(),
    };
    data.clusters = find_clusters(&data.eigenvalues);
    data.compute_traces(tree);
    data.canonicalize();
    Ok(data)
}

fn find_clusters<T: Real>(values: &[T]) -> Vec<Range<usize>> {
    let tol = T::lit(CLUSTER_TOLERANCE);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[i - 1]).abs() > tol * values[i].abs() {
            out.push(start..i);
            start = i;
        }
    }
    out
}

impl<T: Real> SpectralData<T> {
    fn compute_traces(&mut self, tree: &MetricTree<T>) {
        let k = self.mode_count();
        for (g, &b) in tree.boundary_indices().iter().enumerate() {
            let (edge, end) = tree.incident(b)[0];
            for j in 0..k {
                let col = self.modes.column(j);
                let d = self.layout.toward_vertex_derivative(col.as_slice(), edge, end);
                self.kappa[(j, g)] = d;
                self.alpha[(j, g)] = d / self.eigenvalues[j].sqrt();
            }
        }
    }

    /// Fixes the basis inside degenerate clusters (α block made upper
    /// triangular by an orthogonal rotation) and the sign of every mode
    /// (first significant α component positive).
    fn canonicalize(&mut self) {
        let m = self.alpha.ncols();
        for range in self.clusters.clone() {
            let c = range.len();
            if c > 1 && c <= m {
                let block = self.alpha.rows(range.start, c).into_owned();
                let q = block.qr().q();
                self.rotate(range.clone(), &q);
            }
        }
        for j in 0..self.mode_count() {
            let row = self.alpha.row(j);
            let scale = row.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
            let first = row.iter().copied().find(|v| v.abs() > T::lit(1e-8) * scale);
            if matches!(first, Some(v) if v < T::zero()) {
                self.modes.column_mut(j).neg_mut();
                self.kappa.row_mut(j).neg_mut();
                self.alpha.row_mut(j).neg_mut();
            }
        }
    }

    /// Replaces the modes of `range` by `Φ_range · q` (q orthogonal).
    fn rotate(&mut self, range: Range<usize>, q: &DMatrix<T>) {
        let c = range.len();
        let modes = self.modes.columns(range.start, c) * q;
        self.modes.columns_mut(range.start, c).copy_from(&modes);
        let qt = q.transpose();
        let kappa = &qt * self.kappa.rows(range.start, c);
        self.kappa.rows_mut(range.start, c).copy_from(&kappa);
        let alpha = &qt * self.alpha.rows(range.start, c);
        self.alpha.rows_mut(range.start, c).copy_from(&alpha);
    }

    /// Copy with the eigenfunctions of one cluster re-mixed by an orthogonal
    /// matrix. Downstream results must not depend on this choice.
    pub fn remixed(&self, cluster: Range<usize>, q: &DMatrix<T>) -> Self {
        assert_eq!(q.nrows(), cluster.len());
        let mut out = self.clone();
        out.rotate(cluster, q);
        out
    }

    /// First `k` modes only.
    pub fn truncated(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.mode_count());
        let mut out = self.clone();
        out.eigenvalues.truncate(k);
        out.fine_eigenvalues.truncate(k);
        if let Some(c) = out.coarse_eigenvalues.as_mut() {
            c.truncate(k);
        }
        out.modes = self.modes.columns(0, k).into_owned();
        out.kappa = self.kappa.rows(0, k).into_owned();
        out.alpha = self.alpha.rows(0, k).into_owned();
        out.clusters = find_clusters(&out.eigenvalues);
        out
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Extrapolated eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenvalues of the fine discrete problem (no extrapolation).
    pub fn discrete_eigenvalues(&self) -> &[T] {
        &self.fine_eigenvalues
    }

    pub fn coarse_eigenvalues(&self) -> Option<&[T]> {
        self.coarse_eigenvalues.as_deref()
    }

    /// `√λ_k`.
    pub fn frequencies(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|l| l.sqrt()).collect()
    }

    /// `κ_k(γ)`, modes × boundary vertices.
    pub fn kappa(&self) -> &DMatrix<T> {
        &self.kappa
    }

    /// `α_k(γ) = κ_k(γ)/√λ_k`, modes × boundary vertices.
    pub fn alpha(&self) -> &DMatrix<T> {
        &self.alpha
    }

    /// Boundary vertex ids in column order of `kappa` and `alpha`.
    pub fn boundary_ids(&self) -> &[usize] {
        &self.boundary_ids
    }

    /// Nodal values of mode `k`, indexed by mesh node id.
    pub fn mode(&self, k: usize) -> &[T] {
        let n = self.modes.nrows();
        &self.modes.as_slice()[k * n..(k + 1) * n]
    }

    /// Nodal values of mode `k` along an edge (graph-spec edge order), tail to head.
    pub fn mode_on_edge(&self, k: usize, edge: usize) -> Vec<T> {
        let m = self.mode(k);
        self.layout.edge_nodes(edge).iter().map(|&n| m[n]).collect()
    }

    pub fn layout(&self) -> &MeshLayout<T> {
        &self.layout
    }

    pub fn assembly(&self) -> &Assembly<T> {
        &self.assembly
    }

    /// Base mesh element counts per edge.
    pub fn base_elements(&self) -> &[usize] {
        &self.base_elements
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// Index ranges of numerically degenerate eigenvalues.
    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    /// `max |∫ φ_i φ_j ρ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> T {
        let k = self.mode_count();
        let mut worst = T::zero();
        for i in 0..k {
            for j in i..k {
                let g = self.assembly.mass_inner(&self.layout, self.mode(i), self.mode(j));
                let d = if i == j { g - T::one() } else { g };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Per mode: the largest Kirchhoff imbalance over interior vertices,
    /// relative to the largest element slope of that mode.
    pub fn kirchhoff_residuals(&self, tree: &MetricTree<T>) -> Vec<T> {
        let interior: Vec<usize> = (0..tree.vertex_count()).filter(|&v| tree.incident(v).len() > 1).collect();
        (0..self.mode_count())
            .map(|j| {
                let phi = self.mode(j);
                let mut slope = T::zero();
                for (e, nodes) in self.layout.edge_nodes.iter().enumerate() {
                    let h = self.layout.edge_h[e];
                    for w in nodes.windows(2) {
                        slope = slope.max(((phi[w[1]] - phi[w[0]]) / h).abs());
                    }
                }
                let mut worst = T::zero();
                for &v in &interior {
                    let sum = tree
                        .incident(v)
                        .iter()
                        .fold(T::zero(), |acc, &(e, end)| acc + self.layout.toward_vertex_derivative(phi, e, end));
                    worst = worst.max(sum.abs());
                }
                if slope > T::zero() {
                    worst / slope
                } else {
                    worst
                }
            })
            .collect()
    }

    /// `N(μ) = #{k : λ_k ≤ μ}` over the computed modes.
    pub fn counting(&self, mu: T) -> usize {
        self.eigenvalues.iter().filter(|&&l| l <= mu).count()
    }
}

/// Counting function against the leading Weyl term `L_opt √μ / π`.
#[derive(Debug, Clone)]
pub struct WeylReport<T> {
    pub total_optical_length: T,
    /// `(μ, N(μ), L_opt √μ / π)` at every eigenvalue and between neighbours.
    pub samples: Vec<(T, usize, T)>,
    pub max_deviation: T,
    pub nondecreasing: bool,
}

impl<T: Real> WeylReport<T> {
    pub fn predicted(&self, mu: T) -> T {
        self.total_optical_length * mu.max(T::zero()).sqrt() / T::pi()
    }
}

pub fn weyl_check<T: Real>(spectral: &SpectralData<T>, tree: &MetricTree<T>) -> WeylReport<T> {
    let l = tree.total_optical_length();
    let lam = spectral.eigenvalues();
    let mut mus = Vec::with_capacity(2 * lam.len());
    for (i, &x) in lam.iter().enumerate() {
        if i > 0 {
            mus.push((lam[i - 1] + x) * T::lit(0.5));
        }
        mus.push(x);
    }
    let mut report = WeylReport { total_optical_length: l, samples: Vec::new(), max_deviation: T::zero(), nondecreasing: true };
    let mut last = 0;
    for mu in mus {
        let n = spectral.counting(mu);
        let p = report.predicted(mu);
        report.nondecreasing &= n >= last;
        last = n;
        report.max_deviation = report.max_deviation.max((T::from_count(n) - p).abs());
        report.samples.push((mu, n, p));
    }
    report
}

/// Which end of `edge` touches boundary vertex with internal index `b`.
#[allow(dead_code)]
pub(crate) fn boundary_end<T: Real>(tree: &MetricTree<T>, b: usize) -> (usize, End) {
    tree.incident(b)[0]
}
