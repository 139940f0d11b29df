//! Boundary controllability of the wave, heat and Schrödinger equations on
//! metric trees.
//!
//! The pipeline runs graph → spectrum → exponential families → control
//! synthesis → forward simulation. Everything numerical is generic over
//! [`scalar::Real`] (`f32` or `f64`); the [`io`] layer and the aliases below
//! fix `f64`.

pub mod control;
pub mod evolution;
pub mod families;
pub mod graph;
pub mod io;
pub mod presets;
pub mod scalar;
pub mod spectral;
pub mod synthesis;

pub use control::{ControlError, Equation};
pub use evolution::EvolutionError;
pub use families::{ChannelSet, FamilyError, FamilyKind};
pub use graph::{build_tree, GraphError};
pub use io::IoError;
pub use scalar::Real;
pub use spectral::{solve_spectrum, MeshConfig, ModalState, SpectralError};
pub use synthesis::SynthesisError;

pub type GraphSpec = graph::GraphSpec<f64>;
pub type MetricTree = graph::MetricTree<f64>;
pub type SpectralData = spectral::SpectralData<f64>;
pub type FamilySpec = families::FamilySpec<f64>;
pub type BoundaryControl = control::BoundaryControl<f64>;
pub type SynthesisReport = synthesis::SynthesisReport<f64>;
pub type Trajectory = evolution::Trajectory<f64>;
pub type GridState = evolution::GridState<f64>;
