//! P1 finite element mesh on a metric tree and tree-structured matrices.
//!
//! Mesh nodes are the graph vertices (node `v` is vertex `v`) followed by the
//! interior nodes of every edge. Because the graph is a tree, the mesh is a
//! tree too, so every assembled matrix has tree sparsity. Nodes are stored in
//! a postorder of that tree, which makes `LDLᵀ` fill-free.

use crate::graph::{End, MetricTree};
use crate::scalar::Real;

const GAUSS4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GAUSS4_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// 4-point Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub(crate) fn gauss4<T: Real>(a: T, b: T) -> [(T, T); 4] {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    std::array::from_fn(|i| (mid + half * T::lit(GAUSS4_X[i]), half * T::lit(GAUSS4_W[i])))
}

/// Node layout of a P1 mesh.
#[derive(Debug, Clone)]
pub struct MeshLayout<T> {
    /// Per edge (internal order): node ids from tail to head, endpoints included.
    pub(crate) edge_nodes: Vec<Vec<usize>>,
    /// Per edge element size.
    pub(crate) edge_h: Vec<T>,
    pub(crate) is_boundary: Vec<bool>,
    /// Node id at each postorder position.
    pub(crate) order: Vec<usize>,
    /// Postorder position of each node id.
    pub(crate) position: Vec<usize>,
    /// Parent position of each position (`usize::MAX` at the root).
    pub(crate) parent: Vec<usize>,
}

impl<T: Real> MeshLayout<T> {
    pub fn new(tree: &MetricTree<T>, elements: &[usize]) -> Self {
        let nv = tree.vertex_count();
        let mut next = nv;
        let mut edge_nodes = Vec::with_capacity(tree.edge_count());
        let mut edge_h = Vec::with_capacity(tree.edge_count());
        for (e, &n) in tree.edges().iter().zip(elements) {
            let mut nodes = Vec::with_capacity(n + 1);
            nodes.push(e.tail);
            for _ in 1..n {
                nodes.push(next);
                next += 1;
            }
            nodes.push(e.head);
            edge_nodes.push(nodes);
            edge_h.push(e.length / T::from_count(n));
        }
        let count = next;
        let mut is_boundary = vec![false; count];
        for &b in tree.boundary_indices() {
            is_boundary[b] = true;
        }

        let mut adjacency = vec![Vec::new(); count];
        for nodes in &edge_nodes {
            for w in nodes.windows(2) {
                adjacency[w[0]].push(w[1]);
                adjacency[w[1]].push(w[0]);
            }
        }
        let root = (0..nv)
            .find(|&v| tree.incident(v).len() > 1)
            .unwrap_or_else(|| edge_nodes[0][edge_nodes[0].len() / 2]);

        // Iterative DFS postorder.
        let mut parent_node = vec![usize::MAX; count];
        let mut order = Vec::with_capacity(count);
        let mut visited = vec![false; count];
        let mut stack = vec![(root, 0usize)];
        visited[root] = true;
        while let Some((node, child)) = stack.pop() {
            if child < adjacency[node].len() {
                stack.push((node, child + 1));
                let next = adjacency[node][child];
                if !visited[next] {
                    visited[next] = true;
                    parent_node[next] = node;
                    stack.push((next, 0));
                }
            } else {
                order.push(node);
            }
        }
        let mut position = vec![0; count];
        for (i, &n) in order.iter().enumerate() {
            position[n] = i;
        }
        let parent = order
            .iter()
            .map(|&n| if parent_node[n] == usize::MAX { usize::MAX } else { position[parent_node[n]] })
            .collect();
        Self { edge_nodes, edge_h, is_boundary, order, position, parent }
    }

    pub fn node_count(&self) -> usize {
        self.order.len()
    }

    /// Elements on each edge (internal edge order).
    pub fn elements_per_edge(&self) -> Vec<usize> {
        self.edge_nodes.iter().map(|n| n.len() - 1).collect()
    }

    /// Node ids of an edge from tail to head.
    pub fn edge_nodes(&self, edge: usize) -> &[usize] {
        &self.edge_nodes[edge]
    }

    pub fn edge_step(&self, edge: usize) -> T {
        self.edge_h[edge]
    }

    /// The three nodes nearest to an edge end, ordered away from it.
    pub(crate) fn stencil_from(&self, edge: usize, end: End) -> [usize; 3] {
        let nodes = &self.edge_nodes[edge];
        match end {
            End::Tail => [nodes[0], nodes[1], nodes[2]],
            End::Head => {
                let n = nodes.len();
                [nodes[n - 1], nodes[n - 2], nodes[n - 3]]
            }
        }
    }

    /// Derivative at an edge end taken toward the vertex (second-order
    /// one-sided difference).
    pub(crate) fn toward_vertex_derivative(&self, values: &[T], edge: usize, end: End) -> T {
        let [a, b, c] = self.stencil_from(edge, end);
        (T::lit(3.0) * values[a] - T::lit(4.0) * values[b] + values[c]) / (T::lit(2.0) * self.edge_h[edge])
    }
}

/// Symmetric matrix whose sparsity graph is a tree, stored by postorder
/// position: `diag[i]` and the coupling `off[i]` between `i` and `parent[i]`.
#[derive(Debug, Clone)]
pub struct TreeSymMatrix<T> {
    pub(crate) diag: Vec<T>,
    pub(crate) off: Vec<T>,
    pub(crate) parent: Vec<usize>,
}

impl<T: Real> TreeSymMatrix<T> {
    fn zeros(parent: Vec<usize>) -> Self {
        let n = parent.len();
        Self { diag: vec![T::zero(); n], off: vec![T::zero(); n], parent }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for i in 0..self.dim() {
            let p = self.parent[i];
            if p != usize::MAX {
                y[i] += self.off[i] * x[p];
                y[p] += self.off[i] * x[i];
            }
        }
        y
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else if self.parent[i] == j {
            self.off[i]
        } else if self.parent[j] == i {
            self.off[j]
        } else {
            T::zero()
        }
    }

    /// Fill-free `LDLᵀ`; `None` if a pivot is not positive.
    pub fn ldl(&self) -> Option<TreeLdl<T>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut l = vec![T::zero(); n];
        for i in 0..n {
            if !(d[i] > T::zero()) {
                return None;
            }
            let p = self.parent[i];
            if p != usize::MAX {
                l[i] = self.off[i] / d[i];
                d[p] -= l[i] * self.off[i];
            }
        }
        Some(TreeLdl { d, l, parent: self.parent.clone() })
    }

    /// Principal submatrix on the kept positions; they must be closed under
    /// `parent` apart from removed leaves.
    fn restrict(&self, keep: &[usize]) -> Self {
        let mut new_pos = vec![usize::MAX; self.dim()];
        for (i, &k) in keep.iter().enumerate() {
            new_pos[k] = i;
        }
        let parent = keep
            .iter()
            .map(|&k| if self.parent[k] == usize::MAX { usize::MAX } else { new_pos[self.parent[k]] })
            .collect();
        Self {
            diag: keep.iter().map(|&k| self.diag[k]).collect(),
            off: keep.iter().map(|&k| self.off[k]).collect(),
            parent,
        }
    }
}

/// Factorization produced by [`TreeSymMatrix::ldl`].
#[derive(Debug, Clone)]
pub struct TreeLdl<T> {
    d: Vec<T>,
    l: Vec<T>,
    parent: Vec<usize>,
}

impl<T: Real> TreeLdl<T> {
    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.d.len();
        for i in 0..n {
            let p = self.parent[i];
            if p != usize::MAX {
                let v = self.l[i] * x[i];
                x[p] -= v;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let p = self.parent[i];
            if p != usize::MAX {
                let v = self.l[i] * x[p];
                x[i] -= v;
            }
        }
    }
}

/// Assembled stiffness, consistent ρ-mass and lumped mass on all mesh nodes.
#[derive(Debug, Clone)]
pub struct Assembly<T> {
    pub stiffness: TreeSymMatrix<T>,
    pub mass: TreeSymMatrix<T>,
    /// `∫ ρ N_i` per postorder position.
    pub lumped_mass: Vec<T>,
    /// Postorder positions of the free (non-boundary) nodes.
    pub free: Vec<usize>,
}

impl<T: Real> Assembly<T> {
    pub fn new(tree: &MetricTree<T>, layout: &MeshLayout<T>) -> Self {
        let n = layout.node_count();
        let mut stiffness = TreeSymMatrix::zeros(layout.parent.clone());
        let mut mass = TreeSymMatrix::zeros(layout.parent.clone());
        let mut lumped = vec![T::zero(); n];
        for (k, e) in tree.edges().iter().enumerate() {
            let h = layout.edge_h[k];
            let nodes = &layout.edge_nodes[k];
            for (i, w) in nodes.windows(2).enumerate() {
                let x0 = h * T::from_count(i);
                let x1 = if i + 2 == nodes.len() { e.length } else { x0 + h };
                let he = x1 - x0;
                let (mut m00, mut m01, mut m11) = (T::zero(), T::zero(), T::zero());
                for (x, wq) in gauss4(x0, x1) {
                    let r = e.density.eval(x) * wq;
                    let s = (x - x0) / he;
                    let (n0, n1) = (T::one() - s, s);
                    m00 += r * n0 * n0;
                    m01 += r * n0 * n1;
                    m11 += r * n1 * n1;
                }
                let (pa, pb) = (layout.position[w[0]], layout.position[w[1]]);
                let kk = T::one() / he;
                stiffness.diag[pa] += kk;
                stiffness.diag[pb] += kk;
                mass.diag[pa] += m00;
                mass.diag[pb] += m11;
                let child = if layout.parent[pa] == pb { pa } else { pb };
                debug_assert!(layout.parent[child] == if child == pa { pb } else { pa });
                stiffness.off[child] -= kk;
                mass.off[child] += m01;
                lumped[pa] += m00 + m01;
                lumped[pb] += m01 + m11;
            }
        }
        let free = (0..n).filter(|&p| !layout.is_boundary[layout.order[p]]).collect();
        Self { stiffness, mass, lumped_mass: lumped, free }
    }

    /// Dirichlet-reduced (stiffness, mass) on the free nodes.
    pub fn reduced(&self) -> (TreeSymMatrix<T>, TreeSymMatrix<T>) {
        (self.stiffness.restrict(&self.free), self.mass.restrict(&self.free))
    }

    /// `∫ u v ρ` for nodal vectors indexed by node id.
    pub fn mass_inner(&self, layout: &MeshLayout<T>, u: &[T], v: &[T]) -> T {
        let up: Vec<T> = layout.order.iter().map(|&n| u[n]).collect();
        let vp: Vec<T> = layout.order.iter().map(|&n| v[n]).collect();
        self.mass.mul_vec(&up).iter().zip(&vp).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_tree, DensityProfile, GraphSpec};

    #[test]
    fn single_edge_two_elements() {
        let tree = build_tree(GraphSpec::interval(1.0_f64, DensityProfile::Constant(3.0))).unwrap();
        let layout = MeshLayout::new(&tree, &[2]);
        let asm = Assembly::new(&tree, &layout);
        let (k, m) = asm.reduced();
        assert_eq!(k.dim(), 1);
        let h = 0.5;
        assert!((k.diag[0] - 2.0 / h).abs() < 1e-13);
        assert!((m.diag[0] - 3.0 * 2.0 * h / 3.0).abs() < 1e-13);
    }

    #[test]
    fn star_dof_count() {
        let tree = build_tree(GraphSpec::star(&[1.0_f64, 1.0, 1.0], &[1.0, 1.0, 1.0])).unwrap();
        let n = 7;
        let layout = MeshLayout::new(&tree, &[n, n, n]);
        let (k, _) = Assembly::new(&tree, &layout).reduced();
        assert_eq!(k.dim(), 3 * (n - 1) + 1);
        for i in 0..k.dim() {
            assert!(k.parent[i] == usize::MAX || k.parent[i] > i);
        }
    }

    #[test]
    fn linear_density_mass_is_exact() {
        let tree = build_tree(GraphSpec::interval(2.0_f64, DensityProfile::Linear { p: 1.0, q: 0.5 })).unwrap();
        let layout = MeshLayout::new(&tree, &[3]);
        let asm = Assembly::new(&tree, &layout);
        let total: f64 = asm.lumped_mass.iter().sum();
        // ∫_0^2 (1 + x/2) dx = 3
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ldl_solves_tree_system() {
        let tree = build_tree(GraphSpec::star(&[1.0_f64, 2.0, 0.5], &[1.0, 2.0, 3.0])).unwrap();
        let layout = MeshLayout::new(&tree, &[5, 9, 4]);
        let (k, m) = Assembly::new(&tree, &layout).reduced();
        let x: Vec<f64> = (0..k.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = k.mul_vec(&x);
        let mut y = b.clone();
        k.ldl().unwrap().solve_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-11);
        }
        // symmetry of the stored coupling
        let mx = m.mul_vec(&x);
        let ones = vec![1.0; m.dim()];
        let lhs: f64 = mx.iter().sum();
        let rhs: f64 = m.mul_vec(&ones).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
