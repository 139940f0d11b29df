//! JSON exports of spectral data and of the per-command reports.

use crate::families::GrowthFit;
use crate::graph::{GraphPoint, MetricTree};
use crate::spectral::{SpectralData, WeylReport};
use crate::synthesis::SynthesisReport;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Serializable view of [`SpectralData`]: eigenvalues, boundary traces and
/// the mesh used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralExport {
    pub eigenvalues: Vec<f64>,
    pub discrete_eigenvalues: Vec<f64>,
    pub coarse_eigenvalues: Option<Vec<f64>>,
    pub boundary_ids: Vec<usize>,
    /// Row `k` holds `α_k(γ)` in boundary order.
    pub alpha: Vec<Vec<f64>>,
    pub kappa: Vec<Vec<f64>>,
    pub clusters: Vec<(usize, usize)>,
    pub base_elements: Vec<usize>,
    pub refinement: usize,
    pub node_count: usize,
}

impl SpectralExport {
    pub fn new(s: &SpectralData<f64>) -> Self {
        let rows = |m: &nalgebra::DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self {
            eigenvalues: s.eigenvalues().to_vec(),
            discrete_eigenvalues: s.discrete_eigenvalues().to_vec(),
            coarse_eigenvalues: s.coarse_eigenvalues().map(<[f64]>::to_vec),
            boundary_ids: s.boundary_ids().to_vec(),
            alpha: rows(s.alpha()),
            kappa: rows(s.kappa()),
            clusters: s.clusters().iter().map(|r| (r.start, r.end)).collect(),
            base_elements: s.base_elements().to_vec(),
            refinement: s.refinement(),
            node_count: s.layout().node_count(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectral export serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Optical geometry summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub vertex_ids: Vec<usize>,
    /// Optical distance between every pair of vertices, in `vertex_ids` order.
    pub sigma: Vec<Vec<f64>>,
    pub boundary_ids: Vec<usize>,
    pub diameter: f64,
    pub diameter_pair: (usize, usize),
    pub center_edge: usize,
    pub center_x: f64,
    pub center_eccentricity: f64,
    /// `(γ, d_1(γ, Ω))` per boundary vertex.
    pub eccentricities: Vec<(usize, f64)>,
    pub total_optical_length: f64,
}

pub fn geometry_report(tree: &MetricTree<f64>) -> GeometryReport {
    let ids: Vec<usize> = (0..tree.vertex_count()).map(|v| tree.vertex_id(v)).collect();
    let sigma = ids
        .iter()
        .map(|&a| ids.iter().map(|&b| tree.vertex_optical_distance(a, b).unwrap_or(f64::NAN)).collect())
        .collect();
    let d = tree.optical_diameter();
    let GraphPoint { edge, x } = tree.optical_center().point;
    let boundary_ids = tree.boundary_ids();
    let eccentricities = boundary_ids.iter().map(|&g| (g, tree.eccentricity(g).unwrap_or(f64::NAN))).collect();
    GeometryReport {
        vertex_ids: ids,
        sigma,
        boundary_ids,
        diameter: d.value,
        diameter_pair: d.pair,
        center_edge: edge,
        center_x: x,
        center_eccentricity: tree.optical_center().eccentricity,
        eccentricities,
        total_optical_length: tree.total_optical_length(),
    }
}

pub fn weyl_report(w: &WeylReport<f64>) -> Value {
    let samples: Vec<Value> = w.samples.iter().map(|&(mu, n, p)| json!({"mu": mu, "count": n, "weyl": p})).collect();
    json!({
        "total_optical_length": w.total_optical_length,
        "max_deviation": w.max_deviation,
        "nondecreasing": w.nondecreasing,
        "samples": samples,
    })
}

pub fn synthesis_report(r: &SynthesisReport<f64>) -> Value {
    json!({
        "equation": r.equation.name(),
        "modes": r.modes,
        "horizon": r.horizon,
        "channel_ids": r.channel_ids,
        "residuals": r.residuals,
        "max_residual": r.max_residual(),
        "relative_residual": r.relative_residual(),
        "target_scale": r.target_scale,
        "gram_sigma_min": r.gram_sigma_min,
        "gram_condition": r.gram_condition,
        "rank": r.rank,
        "cutoff_warning": r.cutoff_warning,
        "control_l2": r.control_l2,
        "tail_alpha_bound": r.tail_alpha_bound,
    })
}

pub fn growth_report(g: &GrowthFit<f64>) -> Value {
    json!({
        "beta": g.beta,
        "log_c": g.log_c,
        "rms_residual": g.rms_residual,
        "frequencies": g.frequencies,
        "log_norms": g.log_norms,
        "curvature": g.curvature,
        "single_exponential": g.single_exponential,
        "hyperbolic_norms": g.hyperbolic_norms,
        "ratios": g.ratios,
        "biorthogonal_defect": g.biorthogonal_defect,
        "singular": g.singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_tree, GraphSpec};
    use crate::spectral::{solve_spectrum, MeshConfig};

    #[test]
    fn spectral_export_round_trips_bitwise() {
        let tree = build_tree(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0])).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::per_optical_length(40.0), 6).unwrap();
        let e = SpectralExport::new(&s);
        let back = SpectralExport::from_json(&e.to_json()).unwrap();
        assert_eq!(back, e);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.eigenvalues), bits(&e.eigenvalues));
    }

    #[test]
    fn geometry_of_weighted_star() {
        let tree = build_tree(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0])).unwrap();
        let g = geometry_report(&tree);
        assert!((g.diameter - 5.0).abs() < 1e-12);
        assert_eq!(g.eccentricities.len(), 3);
    }
}
