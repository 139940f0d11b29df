//! Command implementations and error-to-exit-code mapping.

use crate::{Common, Simulate};
use graphctl::control::ControlRepr;
use graphctl::evolution::{fdtd_time_step, fdtd_wave, heat_forward, project, schrodinger_forward, uniform_grid, wave_forward};
use graphctl::families::{biorth_growth_fit, gram, FamilySpec};
use graphctl::io::{self, SpectralExport};
use graphctl::presets;
use graphctl::scalar::Cplx;
use graphctl::spectral::{complex_norm, wave_norm, weyl_check};
use graphctl::synthesis::{default_wave_horizon, heat_null_control, schrodinger_control, wave_control, ControlProblem};
use graphctl::{
    build_tree, BoundaryControl, ChannelSet, ControlError, Equation, EvolutionError, FamilyError, FamilyKind, GraphError, IoError,
    MeshConfig, MetricTree, ModalState, SpectralData, SpectralError, SynthesisError, SynthesisReport,
};
use serde_json::{json, Value};
use std::path::Path;

/// Samples per shortest period in exported controls.
const SAMPLES_PER_PERIOD: f64 = 40.0;
const WAVE_TOL: f64 = 1e-6;
const FDTD_TOL: f64 = 5e-3;
const PARABOLIC_TOL_FULL: f64 = 1e-4;
const PARABOLIC_TOL_PARTIAL: f64 = 1e-3;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl ToString) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::new(2, e)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::new(2, e)
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::MeshTooCoarse { .. } => Self::new(4, e),
            _ => Self::new(5, e),
        }
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::UnderresolvedQuadrature { .. } => Self::new(4, e),
            ControlError::InconsistentChannels(_) => Self::new(2, e),
            ControlError::Invalid(_) => Self::new(5, e),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::InconsistentChannels(_) | FamilyError::IndexOutOfRange { .. } => Self::new(2, e),
            _ => Self::new(5, e),
        }
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::NumericallySingular { .. } => Self::new(3, e),
            SynthesisError::InconsistentChannels(_) | SynthesisError::InvalidHorizon | SynthesisError::ModeCount { .. } => Self::new(2, e),
            SynthesisError::Family(f) => f.into(),
            SynthesisError::Control(c) => c.into(),
        }
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::CFLViolation { .. } => Self::new(4, e),
            EvolutionError::Control(c) => c.into(),
            EvolutionError::InvalidGrid | EvolutionError::ModeCount { .. } => Self::new(2, e),
            EvolutionError::IncompatibleMesh => Self::new(5, e),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load_tree(c: &Common) -> Result<MetricTree> {
    let spec = match presets::graph_preset(&c.graph) {
        Some(s) => s,
        None => io::parse_graph_file(&c.graph)?,
    };
    Ok(build_tree(spec)?)
}

fn channels(c: &Common, tree: &MetricTree) -> Result<ChannelSet> {
    match c.exclude_vertex {
        None => Ok(ChannelSet::Full),
        Some(v) if tree.boundary_ids().contains(&v) && tree.boundary_len() > 1 => Ok(ChannelSet::AllBut(v)),
        Some(v) => Err(CliError::new(2, format!("--exclude-vertex {v}: not a boundary vertex, or the only one"))),
    }
}

fn validate(c: &Common) -> Result<()> {
    if c.modes == 0 {
        return Err(CliError::new(2, "--modes must be positive"));
    }
    if c.mesh == Some(0) {
        return Err(CliError::new(2, "--mesh must be positive"));
    }
    if let Some(h) = c.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::new(2, "--horizon must be positive"));
        }
    }
    Ok(())
}

fn mesh(c: &Common, tree: &MetricTree) -> MeshConfig<f64> {
    match c.mesh {
        Some(n) => MeshConfig::uniform(n),
        None => presets::default_mesh(tree, c.modes),
    }
}

fn horizon(c: &Common, tree: &MetricTree, ch: ChannelSet) -> Result<f64> {
    if let Some(h) = c.horizon {
        return Ok(h);
    }
    Ok(match c.equation {
        Equation::Wave => default_wave_horizon(tree, ch)?,
        Equation::Heat => 0.5,
        Equation::Schrodinger => 0.1,
    })
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new(5, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::new(5, format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    write(dir, name, &(serde_json::to_string_pretty(v).expect("report serializes") + "\n"))
}

fn family_kind(eq: Equation) -> FamilyKind {
    match eq {
        Equation::Wave => FamilyKind::SinCos,
        Equation::Heat => FamilyKind::Parabolic,
        Equation::Schrodinger => FamilyKind::Schrodinger,
    }
}

/// Largest rate a control has to resolve for the first `k` modes.
fn max_rate(eq: Equation, s: &SpectralData, k: usize) -> f64 {
    let lam = s.eigenvalues()[k - 1];
    match eq {
        Equation::Wave => lam.sqrt(),
        _ => lam,
    }
}

fn sample_count(eq: Equation, s: &SpectralData, k: usize, horizon: f64) -> usize {
    let period = std::f64::consts::TAU / max_rate(eq, s, k);
    ((SAMPLES_PER_PERIOD * horizon / period).ceil() as usize).max(1)
}

pub fn geometry(c: &Common) -> Result<()> {
    let tree = load_tree(c)?;
    let g = io::geometry_report(&tree);
    println!("optical diameter d = {} between vertices {} and {}", g.diameter, g.diameter_pair.0, g.diameter_pair.1);
    println!("optical centre: edge {} at x = {} (eccentricity {})", g.center_edge, g.center_x, g.center_eccentricity);
    for (v, d) in &g.eccentricities {
        println!("d_1({v}) = {d}");
    }
    write_json(&c.out, "geometry.json", &serde_json::to_value(&g).expect("geometry serializes"))
}

pub fn spectrum(c: &Common) -> Result<()> {
    validate(c)?;
    let tree = load_tree(c)?;
    let s = graphctl::solve_spectrum(&tree, &mesh(c, &tree), c.modes)?;
    for (k, l) in s.eigenvalues().iter().enumerate() {
        println!("lambda_{} = {l:.12e}", k + 1);
    }
    let w = weyl_check(&s, &tree);
    println!("Weyl: max |N(mu) - L sqrt(mu)/pi| = {:.3}, nondecreasing {}", w.max_deviation, w.nondecreasing);
    write(&c.out, "spectrum.json", &(SpectralExport::new(&s).to_json() + "\n"))?;
    write_json(&c.out, "weyl.json", &io::weyl_report(&w))
}

pub fn basis_report(c: &Common) -> Result<()> {
    validate(c)?;
    let tree = load_tree(c)?;
    let ch = channels(c, &tree)?;
    let t0 = horizon(c, &tree, ch)?;
    let s = graphctl::solve_spectrum(&tree, &mesh(c, &tree), c.modes)?;
    let kind = family_kind(c.equation);
    let mut horizon_sweep = Vec::new();
    for f in [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0] {
        let g = gram(&FamilySpec::from_spectral(kind, &s, ch, c.modes, f * t0)?);
        println!("T = {:.6}: sigma_min {:.3e}, condition {:.3e}", f * t0, g.sigma_min(), g.condition());
        horizon_sweep.push(json!({"horizon": f * t0, "sigma_min": g.sigma_min(), "condition": g.condition(), "singular": g.is_singular()}));
    }
    let mut mode_sweep = Vec::new();
    for k in 1..=c.modes {
        let g = gram(&FamilySpec::from_spectral(kind, &s, ch, k, t0)?);
        mode_sweep.push(json!({"modes": k, "sigma_min": g.sigma_min(), "condition": g.condition(), "singular": g.is_singular()}));
    }
    let tau = if c.equation == Equation::Heat { t0 } else { 1.0 };
    let fit = biorth_growth_fit(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ch, c.modes, tau)?, None)?;
    println!("biorthogonal growth on [0, {tau}]: beta = {:.4}, fit rms {:.3e}", fit.beta, fit.rms_residual);
    let report = json!({
        "equation": c.equation.name(),
        "family": format!("{kind:?}"),
        "channel_ids": FamilySpec::from_spectral(kind, &s, ch, 1, t0)?.channel_ids(),
        "horizon": t0,
        "horizon_sweep": horizon_sweep,
        "mode_sweep": mode_sweep,
        "growth_horizon": tau,
        "growth_fit": io::growth_report(&fit),
    });
    write_json(&c.out, "basis_report.json", &report)
}

struct Synthesized {
    tree: MetricTree,
    spectral: SpectralData,
    horizon: f64,
    state: ModalState<f64>,
    control: BoundaryControl,
    report: SynthesisReport,
}

fn run_synthesis(c: &Common, extra_modes: usize) -> Result<Synthesized> {
    validate(c)?;
    let tree = load_tree(c)?;
    let ch = channels(c, &tree)?;
    let t = horizon(c, &tree, ch)?;
    let spectral = graphctl::solve_spectrum(&tree, &mesh(c, &tree), c.modes + extra_modes)?;
    let state = presets::target_state(&c.target, c.equation, c.modes, c.seed)?;
    let p = ControlProblem::new(c.equation, &spectral, ch, t, state.clone());
    let (control, report) = match c.equation {
        Equation::Wave => wave_control(&p)?,
        Equation::Heat => heat_null_control(&p)?,
        Equation::Schrodinger => schrodinger_control(&p)?,
    };
    Ok(Synthesized { tree, spectral, horizon: t, state, control, report })
}

pub fn synthesize(c: &Common) -> Result<()> {
    let s = run_synthesis(c, 0)?;
    let n = sample_count(c.equation, &s.spectral, c.modes, s.horizon);
    println!(
        "{} control on channels {:?}, T = {}: relative moment residual {:.3e}, Gram condition {:.3e}, L2 norm {:.6e}",
        c.equation.name(),
        s.report.channel_ids,
        s.horizon,
        s.report.relative_residual(),
        s.report.gram_condition,
        s.report.control_l2
    );
    write(&c.out, "control.csv", &io::write_control_csv(&s.control, n)?)?;
    write_json(&c.out, "synthesis.json", &io::synthesis_report(&s.report))
}

pub fn simulate(a: &Simulate) -> Result<()> {
    let c = &a.common;
    validate(c)?;
    let tree = load_tree(c)?;
    let spectral = graphctl::solve_spectrum(&tree, &mesh(c, &tree), c.modes)?;
    let control = io::read_control_csv(&a.control, spectral.boundary_ids())?;
    let grid = uniform_grid(control.horizon(), a.steps);
    let k = c.modes;
    let tr = match c.equation {
        Equation::Wave => wave_forward(&spectral, &control, k, &grid)?,
        Equation::Heat => {
            let init = presets::target_state(&c.target, c.equation, k, c.seed)?;
            heat_forward(&spectral, &init, &control, k, &grid)?
        }
        Equation::Schrodinger => {
            let init = presets::target_state(&c.target, c.equation, k, c.seed)?;
            schrodinger_forward(&spectral, &init, &control, k, &grid)?
        }
    };
    println!("simulated {} steps to t = {}", a.steps, control.horizon());
    write(&c.out, "trajectory.csv", &io::trajectory_csv(&tr)?)
}

fn rel(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn verify(c: &Common) -> Result<()> {
    let extra = if c.equation == Equation::Wave { 0 } else { c.modes };
    let s = run_synthesis(c, extra)?;
    let k = c.modes;
    let lam = s.spectral.eigenvalues();
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    let mut extra_report = serde_json::Map::new();
    match c.equation {
        Equation::Wave => {
            let tr = wave_forward(&s.spectral, &s.control, k, &[0.0, s.horizon])?;
            let fin = tr.final_state();
            let (a, b) = (&s.state.a, s.state.velocity());
            let scale = wave_norm(a, &b, lam);
            let err = |x: &ModalState<f64>| {
                let da: Vec<f64> = x.a.iter().zip(a).map(|(p, q)| p - q).collect();
                let db: Vec<f64> = x.velocity().iter().zip(&b).map(|(p, q)| p - q).collect();
                rel(wave_norm(&da, &db, lam), scale)
            };
            checks.push(("spectral final error".into(), err(&fin), WAVE_TOL));
            let dt = fdtd_time_step(&s.tree, s.spectral.layout(), s.horizon);
            let grid = fdtd_wave(&s.tree, &s.control, s.horizon, s.spectral.layout(), dt)?;
            checks.push(("fdtd final error".into(), err(&project(&grid, &s.spectral, k)?), FDTD_TOL));
        }
        eq => {
            let n = s.spectral.mode_count();
            let tr = match eq {
                Equation::Heat => heat_forward(&s.spectral, &s.state, &s.control, n, &[0.0, s.horizon])?,
                _ => schrodinger_forward(&s.spectral, &s.state, &s.control, n, &[0.0, s.horizon])?,
            };
            let init: Vec<Cplx<f64>> = s.state.a.iter().map(|&x| Cplx::new(x, 0.0)).collect();
            let scale = complex_norm(&init, lam, -1);
            let fin = tr.final_values();
            let tol = if c.exclude_vertex.is_some() { PARABOLIC_TOL_PARTIAL } else { PARABOLIC_TOL_FULL };
            checks.push(("final H_-1 norm (first K modes)".into(), rel(complex_norm(&fin[..k], lam, -1), scale), tol));
            extra_report.insert("spillover_modes".into(), json!(n));
            extra_report.insert("final_norm_with_spillover".into(), json!(rel(complex_norm(fin, lam, -1), scale)));
        }
    }
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, value, tol) in &checks {
        let pass = *value <= *tol;
        ok &= pass;
        println!("{} {name}: {value:.3e} (tolerance {tol:.0e})", if pass { "PASS" } else { "FAIL" });
        rows.push(json!({"check": name, "value": value, "tolerance": tol, "pass": pass}));
    }
    if let ControlRepr::Atoms(_) = s.control.repr() {
        let n = sample_count(c.equation, &s.spectral, k, s.horizon);
        write(&c.out, "control.csv", &io::write_control_csv(&s.control, n)?)?;
    }
    let mut report = serde_json::Map::new();
    report.insert("pass".into(), json!(ok));
    report.insert("checks".into(), Value::Array(rows));
    report.insert("synthesis".into(), io::synthesis_report(&s.report));
    report.extend(extra_report);
    write_json(&c.out, "verify.json", &Value::Object(report))?;
    if ok {
        Ok(())
    } else {
        Err(CliError::new(1, "verification failed"))
    }
}
