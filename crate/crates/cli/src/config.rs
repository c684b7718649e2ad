//! Turning command-line strings into graphs, states and detection periods.

use std::path::Path;

use qdetect::state::StateFile;
use qdetect::{build_named, load_graph, QuantumState, WeightedGraph};

use crate::CliError;

/// A file path if one exists, otherwise a generator such as `ring:6`.
pub fn graph(source: &str) -> Result<WeightedGraph, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(source, e))?;
        Ok(load_graph(&bytes)?)
    } else {
        Ok(build_named(source)?)
    }
}

pub fn gamma(g: f64) -> Result<f64, CliError> {
    if g.is_finite() {
        Ok(g)
    } else {
        Err(CliError::Config(format!("gamma must be finite, got {g}")))
    }
}

/// A node id or a state file.
pub fn state(source: &str, dim: usize) -> Result<QuantumState, CliError> {
    if let Ok(node) = source.parse::<usize>() {
        return Ok(QuantumState::localized(dim, node)?);
    }
    let bytes = std::fs::read(source).map_err(|e| CliError::io(source, e))?;
    let s = StateFile::parse(&bytes)?;
    if s.dim() != dim {
        return Err(CliError::Config(format!(
            "state in {source} has {} amplitudes, graph has {dim} nodes",
            s.dim()
        )));
    }
    Ok(s)
}

pub enum InitSpec {
    All,
    One(String),
}

pub fn init(source: &str) -> InitSpec {
    if source == "all" {
        InitSpec::All
    } else {
        InitSpec::One(source.to_string())
    }
}

/// `1.3` or `scan:min:max:steps` (inclusive, evenly spaced).
#[derive(Clone, Debug, PartialEq)]
pub enum TauSpec {
    Single(f64),
    Scan { min: f64, max: f64, steps: usize },
}

impl TauSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "cannot parse tau `{s}`; use a number or scan:min:max:steps"
            ))
        };
        let spec = match s.strip_prefix("scan:") {
            Some(rest) => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [min, max, steps] = parts[..] else {
                    return Err(bad());
                };
                let min: f64 = min.parse().map_err(|_| bad())?;
                let max: f64 = max.parse().map_err(|_| bad())?;
                let steps: usize = steps.parse().map_err(|_| bad())?;
                if !(min.is_finite() && max.is_finite() && min <= max && steps >= 1 && min >= 0.0) {
                    return Err(bad());
                }
                TauSpec::Scan { min, max, steps }
            }
            None => TauSpec::Single(s.parse().map_err(|_| bad())?),
        };
        Ok(spec)
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            TauSpec::Single(t) => vec![t],
            TauSpec::Scan { min, steps: 1, .. } => vec![min],
            TauSpec::Scan { min, max, steps } => (0..steps)
                .map(|k| min + (max - min) * k as f64 / (steps - 1) as f64)
                .collect(),
        }
    }

    pub fn single(&self) -> Result<f64, CliError> {
        match self {
            TauSpec::Single(t) => Ok(*t),
            TauSpec::Scan { .. } => Err(CliError::Config("this command needs a single tau".into())),
        }
    }

    /// Range for the resonance listing; a single value means `(0, value]`.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            TauSpec::Single(t) => (0.0, t),
            TauSpec::Scan { min, max, .. } => (min, max),
        }
    }
}
