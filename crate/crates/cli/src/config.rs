//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use sphere_approx::sampling::{haar_rotation, random_alpha, substream, Stream};
use sphere_approx::{embed_k, make_g_t, make_u_y, Dim, DirectionSet, Group, LatticeDescriptor};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.into(), msg: msg.into() }
}

const KEYS: &[&str] = &[
    "n", "c", "T", "seed", "alpha", "lattice", "directions", "kappa", "out", "threads", "timing", "r", "regions",
    "mc_samples", "monte_carlo", "samples",
];

/// Raw key/value pairs; later insertions win.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { path: path.into(), line: i + 1 })?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.into()));
        }
        self.entries.insert(key.into(), value.into());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaMode {
    Random { count: usize },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dim: Dim,
    pub c_list: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub alpha_mode: AlphaMode,
    pub lattice_spec: String,
    pub lattice: LatticeDescriptor,
    pub directions: Vec<DirectionSet>,
    pub kappa: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
    pub timing: bool,
    pub r: f64,
    pub regions: Vec<String>,
    pub mc_samples: u64,
    pub monte_carlo: bool,
    pub samples: usize,
    canonical: String,
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(key, format!("`{s}`: {e}"))))
        .collect()
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e| bad(key, format!("`{v}`: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(bad(key, format!("`{other}` is not a boolean"))),
    }
}

/// `random:COUNT` or explicit vectors separated by `;`, coordinates by `,`.
fn parse_alpha(dim: Dim, v: &str) -> Result<AlphaMode, ConfigError> {
    if let Some(count) = v.strip_prefix("random:") {
        let count: usize = parse("alpha", count)?;
        if count == 0 {
            return Err(bad("alpha", "random mode needs a count >= 1"));
        }
        return Ok(AlphaMode::Random { count });
    }
    let mut out = Vec::new();
    for part in v.split(';').filter(|p| !p.trim().is_empty()) {
        let vec = parse_list("alpha", part)?;
        if vec.len() != dim.sphere_ambient() {
            return Err(bad("alpha", format!("vector `{part}` needs {} coordinates", dim.sphere_ambient())));
        }
        let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(bad("alpha", format!("vector `{part}` is not a unit vector")));
        }
        out.push(vec);
    }
    if out.is_empty() {
        return Err(bad("alpha", "no target vectors given"));
    }
    Ok(AlphaMode::Explicit(out))
}

/// `identity`, `gt:t`, `uy:y_1,...,y_n`, `random-k`, or a `*`-separated product.
fn parse_lattice(dim: Dim, spec: &str, seed: u64) -> Result<LatticeDescriptor, ConfigError> {
    let mut g = Group::identity(dim);
    for factor in spec.split('*') {
        let factor = factor.trim();
        let h = if factor == "identity" {
            Group::identity(dim)
        } else if factor == "random-k" {
            let mut rng = substream(seed, Stream::Lattices, 0);
            embed_k(dim, &haar_rotation(&mut rng, dim.sphere_ambient())).map_err(|e| bad("lattice", e.to_string()))?
        } else if let Some(t) = factor.strip_prefix("gt:") {
            make_g_t(dim, parse::<f64>("lattice", t)?)
        } else if let Some(y) = factor.strip_prefix("uy:") {
            make_u_y(dim, &parse_list("lattice", y)?).map_err(|e| bad("lattice", e.to_string()))?
        } else {
            return Err(bad("lattice", format!("unknown factor `{factor}`")));
        };
        g = g.compose(&h);
    }
    LatticeDescriptor::new(g).map_err(|e| bad("lattice", e.to_string()))
}

/// `full`, `cells`, `hemisphere:v`, `not-hemisphere:v`, `cap:v:radius`,
/// `orthant:+-`, separated by `;`.
fn parse_directions(dim: Dim, v: &str) -> Result<Vec<DirectionSet>, ConfigError> {
    let err = |e: sphere_approx::Error| bad("directions", e.to_string());
    let mut out = Vec::new();
    for item in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "full" {
            out.push(DirectionSet::full(dim));
        } else if item == "cells" {
            out.extend(DirectionSet::orthant_cells(dim));
        } else if let Some(axis) = item.strip_prefix("hemisphere:") {
            out.push(DirectionSet::hemisphere(dim, &parse_list("directions", axis)?).map_err(err)?);
        } else if let Some(axis) = item.strip_prefix("not-hemisphere:") {
            let h = DirectionSet::hemisphere(dim, &parse_list("directions", axis)?).map_err(err)?;
            out.push(DirectionSet::complement(h));
        } else if let Some(rest) = item.strip_prefix("cap:") {
            let (center, radius) =
                rest.rsplit_once(':').ok_or_else(|| bad("directions", "cap needs `cap:center:radius`"))?;
            out.push(
                DirectionSet::cap(dim, &parse_list("directions", center)?, parse("directions", radius)?).map_err(err)?,
            );
        } else if let Some(signs) = item.strip_prefix("orthant:") {
            let s: Vec<i8> = signs
                .chars()
                .map(|ch| match ch {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    _ => Err(bad("directions", format!("orthant sign `{ch}`"))),
                })
                .collect::<Result<_, _>>()?;
            out.push(DirectionSet::orthant(dim, &s).map_err(err)?);
        } else {
            return Err(bad("directions", format!("unknown set `{item}`")));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let n: usize = raw.get("n").map_or(Ok(1), |v| parse("n", v))?;
        let dim = Dim::new(n).map_err(|e| bad("n", e.to_string()))?;
        let c_list = parse_list("c", raw.get("c").unwrap_or("1"))?;
        if c_list.is_empty() || c_list.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(bad("c", "need a nonempty list of positive values"));
        }
        let t_grid = parse_list("T", raw.get("T").unwrap_or("5"))?;
        if t_grid.iter().any(|&t| !(t > 0.0 && t <= 700.0)) || t_grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(bad("T", "grid must be increasing values in (0, 700]"));
        }
        let seed: u64 = raw.get("seed").map_or(Ok(0), |v| parse("seed", v))?;
        let alpha_mode = parse_alpha(dim, raw.get("alpha").unwrap_or("random:1"))?;
        let lattice_spec = raw.get("lattice").unwrap_or("identity").to_string();
        if lattice_spec.contains(',') && !lattice_spec.contains("uy:") {
            return Err(bad("lattice", "unexpected comma"));
        }
        let lattice = parse_lattice(dim, &lattice_spec, seed)?;
        let directions = match raw.get("directions") {
            Some(v) => parse_directions(dim, v)?,
            None => Vec::new(),
        };
        let kappa = raw.get("kappa").map(|v| parse::<f64>("kappa", v)).transpose()?;
        if kappa.is_some_and(|k| !(k > 0.0 && k.is_finite())) {
            return Err(bad("kappa", "must be positive"));
        }
        let threads = raw.get("threads").map(|v| parse::<usize>("threads", v)).transpose()?;
        if threads == Some(0) {
            return Err(bad("threads", "must be at least 1"));
        }
        let r: f64 = raw.get("r").map_or(Ok(1.0), |v| parse("r", v))?;
        let regions: Vec<String> =
            raw.get("regions").unwrap_or("E,F").split(',').map(|s| s.trim().to_string()).collect();
        if regions.iter().any(|s| s != "E" && s != "F") {
            return Err(bad("regions", "expected a list of E and F"));
        }
        let mc_samples: u64 = raw.get("mc_samples").map_or(Ok(1_000_000), |v| parse("mc_samples", v))?;
        let samples: usize = raw.get("samples").map_or(Ok(10), |v| parse("samples", v))?;
        Ok(ExperimentConfig {
            dim,
            c_list,
            t_grid,
            seed,
            alpha_mode,
            lattice_spec,
            lattice,
            directions,
            kappa,
            output_path: raw.get("out").map(PathBuf::from),
            threads,
            timing: raw.get("timing").map_or(Ok(false), |v| parse_bool("timing", v))?,
            r,
            regions,
            mc_samples,
            monte_carlo: raw.get("monte_carlo").map_or(Ok(false), |v| parse_bool("monte_carlo", v))?,
            samples,
            canonical: raw.entries.iter().fold(String::new(), |mut s, (k, v)| {
                let _ = writeln!(s, "{k}={v}");
                s
            }),
        })
    }

    /// SHA-256 of the effective key/value pairs, sorted by key.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Targets in config order; random ones come from the seed's target stream.
    pub fn targets(&self) -> Vec<Vec<f64>> {
        match &self.alpha_mode {
            AlphaMode::Explicit(v) => v.clone(),
            AlphaMode::Random { count } => {
                let mut rng = substream(self.seed, Stream::Targets, 0);
                (0..*count).map(|_| random_alpha(&mut rng, self.dim)).collect()
            }
        }
    }

    /// Direction sets, or `[None]` (all of `S^{n-1}`) when none are configured.
    pub fn direction_options(&self) -> Vec<Option<&DirectionSet>> {
        if self.directions.is_empty() {
            vec![None]
        } else {
            self.directions.iter().map(Some).collect()
        }
    }
}
