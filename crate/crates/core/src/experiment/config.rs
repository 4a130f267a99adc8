use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::drift::{DriftRegime, DriftSpec, ObservationNoise};
use crate::error::{Error, Result};
use crate::linops::Matrix;
use crate::model::SystemModel;
use crate::riccati::DEFAULT_TOL;

/// Where the system of an experiment comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Inline(SystemModel),
    Seeded { n: usize, p: usize, system_seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemSource,
    pub drift: DriftSpec,
    pub t_rounds: usize,
    pub output_path: Option<PathBuf>,
    pub tol_dare: f64,
    pub emit_every: usize,
}

impl ExperimentConfig {
    pub fn seeded(n: usize, p: usize, system_seed: u64, drift: DriftSpec, t_rounds: usize) -> Self {
        Self {
            system: SystemSource::Seeded { n, p, system_seed },
            drift,
            t_rounds,
            output_path: None,
            tol_dare: DEFAULT_TOL,
            emit_every: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.t_rounds == 0 {
            return Err(Error::config("run.t_rounds", "must be at least 1"));
        }
        if self.emit_every == 0 {
            return Err(Error::config("run.emit_every", "must be at least 1"));
        }
        if !(self.tol_dare > 0.0 && self.tol_dare.is_finite()) {
            return Err(Error::config("run.tol_dare", "must be a positive finite number"));
        }
        if let SystemSource::Seeded { n, p, .. } = self.system {
            if n == 0 {
                return Err(Error::config("system.n", "must be at least 1"));
            }
            if p == 0 {
                return Err(Error::config("system.p", "must be at least 1"));
            }
        }
        self.drift.check().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("drift.{field}"), reason),
            other => other,
        })
    }

    /// Serializes back to the text format read by [`load_config`].
    pub fn to_config_text(&self) -> String {
        let mut out = match &self.system {
            SystemSource::Inline(m) => m.to_config_text(),
            SystemSource::Seeded { n, p, system_seed } => {
                format!("[system]\nn = {n}\np = {p}\nsystem_seed = {system_seed}\n")
            }
        };
        let regime = match self.drift.regime {
            DriftRegime::Linear => "linear",
            DriftRegime::Sublinear => "sublinear",
        };
        let noise = match self.drift.noise_v {
            ObservationNoise::UnitGaussian => "unit_gaussian",
            ObservationNoise::None => "none",
        };
        out.push_str(&format!(
            "\n[drift]\nregime = \"{regime}\"\ndelta = {:?}\nbeta = {:?}\nnoise_v = \"{noise}\"\nseed = {}\n",
            self.drift.delta, self.drift.beta, self.drift.seed
        ));
        out.push_str(&format!("\n[run]\nt_rounds = {}\n", self.t_rounds));
        if let Some(p) = &self.output_path {
            out.push_str(&format!("output_path = {:?}\n", p.display().to_string()));
        }
        out.push_str(&format!("tol_dare = {:e}\nemit_every = {}\n", self.tol_dare, self.emit_every));
        out
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    for key in root.keys() {
        if !matches!(key.as_str(), "system" | "drift" | "run") {
            return Err(Error::config(key, "unknown section"));
        }
    }
    let system = section(&root, "system")?;
    let drift = section(&root, "drift")?;
    let run = section(&root, "run")?;

    let config = ExperimentConfig {
        system: parse_system(system)?,
        drift: parse_drift(drift)?,
        t_rounds: req_count(run, "run", "t_rounds")?,
        output_path: opt(run, "run", "output_path", |v| v.as_str().map(PathBuf::from))?,
        tol_dare: opt(run, "run", "tol_dare", as_f64)?.unwrap_or(DEFAULT_TOL),
        emit_every: opt_count(run, "run", "emit_every")?.unwrap_or(1),
    };
    config.check()?;
    Ok(config)
}

/// Reads a model file as written by `SystemModel::to_config_text`.
pub fn parse_system_file(text: &str) -> Result<SystemModel> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    match parse_system(section(&root, "system")?)? {
        SystemSource::Inline(m) => Ok(m),
        SystemSource::Seeded { .. } => Err(Error::config("system.a", "model file must list matrices")),
    }
}

fn section<'t>(root: &'t Table, name: &str) -> Result<&'t Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(Error::config(name, "must be a section")),
        None => Err(Error::config(name, "missing section")),
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn opt<T>(t: &Table, sec: &str, key: &str, get: impl Fn(&Value) -> Option<T>) -> Result<Option<T>> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => get(v)
            .map(Some)
            .ok_or_else(|| Error::config(format!("{sec}.{key}"), format!("unexpected value {v}"))),
    }
}

fn opt_count(t: &Table, sec: &str, key: &str) -> Result<Option<usize>> {
    opt(t, sec, key, |v| v.as_integer().and_then(|i| usize::try_from(i).ok()))
}

fn req_count(t: &Table, sec: &str, key: &str) -> Result<usize> {
    opt_count(t, sec, key)?.ok_or_else(|| Error::config(format!("{sec}.{key}"), "missing"))
}

fn matrix(t: &Table, key: &str, rows: usize, cols: usize) -> Result<Option<Matrix>> {
    let field = format!("system.{key}");
    let Some(values) = opt(t, "system", key, |v| v.as_array().cloned())? else {
        return Ok(None);
    };
    let entries = values
        .iter()
        .map(|v| as_f64(v).ok_or_else(|| Error::config(&field, "entries must be numbers")))
        .collect::<Result<Vec<_>>>()?;
    if entries.len() != rows * cols {
        return Err(Error::config(
            &field,
            format!("expected {} row-major entries, got {}", rows * cols, entries.len()),
        ));
    }
    Ok(Some(Matrix::from_row_slice(rows, cols, &entries)))
}

fn parse_system(t: &Table) -> Result<SystemSource> {
    for key in t.keys() {
        if !matches!(key.as_str(), "n" | "p" | "system_seed" | "a" | "c" | "q" | "v") {
            return Err(Error::config(format!("system.{key}"), "unknown key"));
        }
    }
    let n = req_count(t, "system", "n")?;
    let p = req_count(t, "system", "p")?;
    if n == 0 {
        return Err(Error::config("system.n", "must be at least 1"));
    }
    if p == 0 {
        return Err(Error::config("system.p", "must be at least 1"));
    }
    let seed = opt(t, "system", "system_seed", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))?;
    let a = matrix(t, "a", n, n)?;
    match (seed, a) {
        (Some(_), Some(_)) => Err(Error::config("system.system_seed", "give either a seed or inline matrices, not both")),
        (Some(system_seed), None) => Ok(SystemSource::Seeded { n, p, system_seed }),
        (None, None) => Err(Error::config("system.system_seed", "missing (or give inline matrices)")),
        (None, Some(a)) => {
            let c = matrix(t, "c", p, n)?.ok_or_else(|| Error::config("system.c", "missing"))?;
            let q = matrix(t, "q", n, n)?.unwrap_or_else(|| Matrix::identity(n, n) * 0.5);
            let v = matrix(t, "v", p, p)?.unwrap_or_else(|| Matrix::identity(p, p));
            Ok(SystemSource::Inline(SystemModel::new(a, c, q, v)?))
        }
    }
}

fn parse_drift(t: &Table) -> Result<DriftSpec> {
    for key in t.keys() {
        if !matches!(key.as_str(), "regime" | "delta" | "beta" | "noise_v" | "seed") {
            return Err(Error::config(format!("drift.{key}"), "unknown key"));
        }
    }
    let regime = match opt(t, "drift", "regime", |v| v.as_str().map(str::to_owned))?.as_deref() {
        Some("linear") => DriftRegime::Linear,
        Some("sublinear") => DriftRegime::Sublinear,
        Some(other) => return Err(Error::config("drift.regime", format!("unknown regime `{other}`"))),
        None => return Err(Error::config("drift.regime", "missing")),
    };
    let noise_v = match opt(t, "drift", "noise_v", |v| v.as_str().map(str::to_owned))?.as_deref() {
        None | Some("unit_gaussian") => ObservationNoise::UnitGaussian,
        Some("none") => ObservationNoise::None,
        Some(other) => return Err(Error::config("drift.noise_v", format!("unknown noise `{other}`"))),
    };
    let defaults = DriftSpec::linear(1.0, 0);
    Ok(DriftSpec {
        regime,
        delta: opt(t, "drift", "delta", as_f64)?.unwrap_or(defaults.delta),
        beta: opt(t, "drift", "beta", as_f64)?.unwrap_or(defaults.beta),
        noise_v,
        seed: opt(t, "drift", "seed", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))?.unwrap_or(0),
    })
}
