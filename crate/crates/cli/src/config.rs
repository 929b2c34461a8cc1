//! Flag/config merging, validation and failure reporting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use graphcert::certify::{NoiseModel, ParameterGrid, Shots};
use graphcert::{Graph, NoiseSpec, Target};
use serde::Deserialize;

use crate::CommonArgs;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or config values; nothing was computed.
    Usage(String),
    /// The library rejected valid-looking input.
    Domain(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) | Failure::Io(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Domain(_) => "domain",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Domain(e) | Failure::Io(e) => format!("{e:#}"),
        }
    }

    pub fn report(&self) {
        let line = serde_json::json!({ "error": self.kind(), "message": self.message() });
        eprintln!("{line}");
    }
}

impl<E> From<E> for Failure
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn from(e: E) -> Self {
        Failure::Domain(e.into())
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Defaults loaded from `--config`; every field mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub family: Option<String>,
    pub n: Option<usize>,
    pub graph: Option<PathBuf>,
    pub noise: Option<String>,
    #[serde(default)]
    pub exact: bool,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub grid: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    #[serde(default)]
    pub brute_force: bool,
    #[serde(default)]
    pub decomposition: bool,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Io)?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Picks the output format, checking it against what the command supports.
pub fn resolve_format(
    common: &CommonArgs,
    file: &ConfigFile,
    allowed: &[Format],
) -> Result<Format, Failure> {
    let Some(name) = common.format.as_deref().or(file.format.as_deref()) else {
        return Ok(allowed[0]);
    };
    let f = match name {
        "json" => Format::Json,
        "csv" => Format::Csv,
        "text" => Format::Text,
        other => return Err(usage(format!("unknown format {other:?}"))),
    };
    if !allowed.contains(&f) {
        return Err(usage(format!("format {name:?} is not available here")));
    }
    Ok(f)
}

fn family_range(family: &str) -> Option<(usize, usize)> {
    match family {
        "ghz" => Some((2, 16)),
        "ring" => Some((3, 16)),
        "cluster" | "linear-cluster" => Some((3, 4)),
        _ => None,
    }
}

/// Resolves `--family/--n` or `--graph`. Explicit flags replace the
/// config's target entirely so the two sources never mix.
pub fn resolve_target(common: &CommonArgs, file: &ConfigFile) -> Result<Target, Failure> {
    let from_flags = common.family.is_some() || common.n.is_some() || common.graph.is_some();
    let (family, n, graph) = if from_flags {
        (common.family.clone(), common.n, common.graph.clone())
    } else {
        (file.family.clone(), file.n, file.graph.clone())
    };
    match (family, graph) {
        (Some(_), Some(_)) => Err(usage("--family and --graph are mutually exclusive")),
        (None, None) => Err(usage("one of --family or --graph is required")),
        (None, Some(path)) => {
            if n.is_some() {
                return Err(usage("--n applies only to --family"));
            }
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading graph {}", path.display()))
                .map_err(Failure::Io)?;
            Ok(Target::Graph(Graph::parse(&text)?))
        }
        (Some(name), None) => {
            let name = name.to_ascii_lowercase();
            let (lo, hi) =
                family_range(&name).ok_or_else(|| usage(format!("unknown family {name:?}")))?;
            let n = n.ok_or_else(|| usage("--n is required with --family"))?;
            if !(lo..=hi).contains(&n) {
                return Err(usage(format!(
                    "--n for {name} must be in {lo}..={hi}, got {n}"
                )));
            }
            let family = name.parse().map_err(|e| usage(format!("{e}")))?;
            Ok(Target::Family(family, n))
        }
    }
}

pub fn resolve_noise(flag: Option<&str>, file: &ConfigFile) -> Result<NoiseSpec, Failure> {
    match flag.or(file.noise.as_deref()) {
        None => Ok(NoiseSpec::None),
        Some(s) => s.parse().map_err(|e| usage(format!("{e}"))),
    }
}

pub fn resolve_model(flag: Option<&str>, file: &ConfigFile) -> Result<NoiseModel, Failure> {
    let name = flag
        .or(file.noise.as_deref())
        .ok_or_else(|| usage("--noise is required for a sweep"))?;
    match name.parse() {
        Ok(NoiseModel::None) | Err(_) => Err(usage(format!(
            "sweep noise must be white or depol, got {name:?}"
        ))),
        Ok(m) => Ok(m),
    }
}

/// Exact mode unless shots are given; sampled runs need an explicit seed.
pub fn resolve_shots(
    exact: bool,
    shots: Option<u64>,
    seed: Option<u64>,
    file: &ConfigFile,
) -> Result<(Shots, u64), Failure> {
    let exact = exact || (shots.is_none() && file.exact);
    let shots = if exact && shots.is_none() {
        None
    } else {
        shots.or(file.shots)
    };
    let seed = seed.or(file.seed);
    match (exact, shots) {
        (true, Some(_)) => Err(usage("--exact and --shots are mutually exclusive")),
        (_, Some(0)) => Err(usage("--shots must be positive")),
        (_, Some(s)) => {
            let seed = seed.ok_or_else(|| usage("--seed is required with --shots"))?;
            Ok((Shots::PerSetting(s), seed))
        }
        (_, None) => Ok((Shots::Exact, 0)),
    }
}

pub fn resolve_grid(flag: Option<&str>, file: &ConfigFile) -> Result<ParameterGrid, Failure> {
    let text = flag
        .or(file.grid.as_deref())
        .ok_or_else(|| usage("--grid is required for a sweep"))?;
    text.parse().map_err(|e| usage(format!("{e}")))
}

/// Writes `text` to `--output` (or the config's output) or stdout.
/// Returns whether a file was written.
pub fn emit(common: &CommonArgs, file: &ConfigFile, text: &str) -> Result<bool, Failure> {
    match common.output.as_ref().or(file.output.as_ref()) {
        Some(path) => {
            fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Io)?;
            Ok(true)
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .context("writing stdout")
                .map_err(Failure::Io)?;
            Ok(false)
        }
    }
}
