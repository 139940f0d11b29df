//! Graph description files.
//!
//! ```json
//! {
//!   "vertices": [0, 1, 2],
//!   "edges": [
//!     {"id": 0, "tail": 0, "head": 1, "length": 1.0,
//!      "density": {"type": "constant", "params": [1.0]}}
//!   ]
//! }
//! ```
//!
//! `vertices` may also hold objects with an `id` key. A missing `density`
//! means `ρ ≡ 1`. Density types: `constant [c]`, `linear [p, q]` for
//! `p + q x`, `sampled [v_0, …, v_n]` (equally spaced, monotone cubic).

use super::IoError;
use crate::graph::{DensityProfile, EdgeSpec, GraphSpec};
use serde_json::{json, Map, Value};
use std::path::Path;

pub fn parse_graph_file(path: impl AsRef<Path>) -> Result<GraphSpec<f64>, IoError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read { path: name.clone(), message: e.to_string() })?;
    parse_named(&text, &name)
}

pub fn parse_graph_str(text: &str) -> Result<GraphSpec<f64>, IoError> {
    parse_named(text, "<input>")
}

fn parse_named(text: &str, path: &str) -> Result<GraphSpec<f64>, IoError> {
    let root: Value = serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let schema = |context: &str, message: &str| IoError::Schema { path: path.into(), context: context.into(), message: message.into() };
    let obj = root.as_object().ok_or_else(|| schema("top level", "expected an object"))?;

    let vertices = obj
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("top level", "missing array `vertices`"))?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let id = match v {
                Value::Object(m) => m.get("id"),
                other => Some(other),
            };
            id.and_then(as_id).ok_or_else(|| schema(&format!("vertices[{i}]"), "expected a nonnegative integer id"))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let edges = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("top level", "missing array `edges`"))?;
    let mut out = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let m = e.as_object().ok_or_else(|| schema(&format!("edges[{i}]"), "expected an object"))?;
        let id = m.get("id").and_then(as_id).ok_or_else(|| schema(&format!("edges[{i}]"), "missing integer `id`"))?;
        let ctx = format!("edge {id}");
        let field_id = |k: &str| m.get(k).and_then(as_id).ok_or_else(|| schema(&ctx, &format!("missing integer `{k}`")));
        let tail = field_id("tail")?;
        let head = field_id("head")?;
        let length = m.get("length").and_then(Value::as_f64).ok_or_else(|| schema(&ctx, "missing number `length`"))?;
        let density = match m.get("density") {
            None => DensityProfile::Constant(1.0),
            Some(d) => parse_density(d).map_err(|msg| schema(&ctx, &msg))?,
        };
        out.push(EdgeSpec { id, tail, head, length, density });
    }
    Ok(GraphSpec { vertices, edges: out })
}

fn as_id(v: &Value) -> Option<usize> {
    v.as_u64().map(|x| x as usize)
}

fn parse_density(d: &Value) -> Result<DensityProfile<f64>, String> {
    let m = d.as_object().ok_or("`density` must be an object")?;
    let kind = m.get("type").and_then(Value::as_str).ok_or("density needs a string `type`")?;
    let params = m
        .get("params")
        .and_then(Value::as_array)
        .ok_or("density needs an array `params`")?
        .iter()
        .map(Value::as_f64)
        .collect::<Option<Vec<_>>>()
        .ok_or("density params must be numbers")?;
    match (kind, params.len()) {
        ("constant", 1) => Ok(DensityProfile::Constant(params[0])),
        ("linear", 2) => Ok(DensityProfile::Linear { p: params[0], q: params[1] }),
        ("sampled", n) if n >= 2 => Ok(DensityProfile::Sampled(params)),
        ("constant" | "linear" | "sampled", n) => Err(format!("density `{kind}` cannot take {n} params")),
        _ => Err(format!("unknown density type `{kind}`")),
    }
}

/// Inverse of [`parse_graph_str`].
pub fn graph_to_json(spec: &GraphSpec<f64>) -> String {
    let edges: Vec<Value> = spec
        .edges
        .iter()
        .map(|e| {
            let (kind, params) = match &e.density {
                DensityProfile::Constant(c) => ("constant", vec![*c]),
                DensityProfile::Linear { p, q } => ("linear", vec![*p, *q]),
                DensityProfile::Sampled(v) => ("sampled", v.clone()),
            };
            let mut m = Map::new();
            m.insert("id".into(), json!(e.id));
            m.insert("tail".into(), json!(e.tail));
            m.insert("head".into(), json!(e.head));
            m.insert("length".into(), json!(e.length));
            m.insert("density".into(), json!({"type": kind, "params": params}));
            Value::Object(m)
        })
        .collect();
    let v = json!({"vertices": spec.vertices, "edges": edges});
    serde_json::to_string_pretty(&v).expect("graph serializes")
}
