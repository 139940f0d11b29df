//! Named test graphs and target states.

use crate::control::Equation;
use crate::graph::{DensityProfile, GraphSpec, MetricTree};
use crate::io::IoError;
use crate::spectral::{MeshConfig, ModalState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::f64::consts::PI;

pub const GRAPH_PRESETS: [&str; 3] = ["interval", "star", "weighted-star"];
pub const TARGET_PRESETS: [&str; 4] = ["mode1", "modes12", "random", "zero"];

/// `interval`: `ℓ = π`, `ρ ≡ 1`. `star`: three unit edges, `ρ ≡ 1`.
/// `weighted-star`: `ℓ = (1, 2, 3)`, `ρ = (1, 2.25, 4)`.
pub fn graph_preset(name: &str) -> Option<GraphSpec<f64>> {
    match name {
        "interval" => Some(GraphSpec::interval(PI, DensityProfile::Constant(1.0))),
        "star" => Some(GraphSpec::star(&[1.0; 3], &[1.0; 3])),
        "weighted-star" => Some(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0])),
        _ => None,
    }
}

/// Mesh used when none is given: at least 200 elements per unit of optical
/// length, and enough for `k` modes by the Weyl estimate.
pub fn default_mesh(tree: &MetricTree<f64>, k: usize) -> MeshConfig<f64> {
    let l = tree.total_optical_length();
    MeshConfig::per_optical_length(200f64.max(40.0 * k as f64 / l))
}

#[derive(Deserialize)]
struct CoefficientFile {
    a: Vec<f64>,
    #[serde(default)]
    b: Option<Vec<f64>>,
}

/// Target (wave) or initial (heat, Schrödinger) state with `k` modes.
///
/// `source` is a preset name or the path of a JSON file
/// `{"a": [...], "b": [...]}`; `b` is used by the wave equation only and
/// shorter vectors are padded with zeros.
pub fn target_state(source: &str, equation: Equation, k: usize, seed: u64) -> Result<ModalState<f64>, IoError> {
    let wave = equation == Equation::Wave;
    let (mut a, mut b) = (vec![0.0; k], vec![0.0; k]);
    match source {
        "zero" => {}
        "mode1" => a[0] = 1.0,
        "modes12" => {
            a[0] = 1.0;
            if k > 1 {
                a[1] = 1.0;
            }
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            a.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
            if wave {
                b.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
            }
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| IoError::Read { path: path.into(), message: e.to_string() })?;
            let f: CoefficientFile = serde_json::from_str(&text).map_err(|e| IoError::Parse {
                path: path.into(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            let fb = f.b.unwrap_or_default();
            if f.a.len() > k || fb.len() > k {
                return Err(IoError::Schema { path: path.into(), context: "coefficients".into(), message: format!("more than {k} modes") });
            }
            a[..f.a.len()].copy_from_slice(&f.a);
            b[..fb.len()].copy_from_slice(&fb);
        }
    }
    Ok(if wave { ModalState::with_velocity(a, b) } else { ModalState::new(a) })
}
