//! Experiment configuration: the JSON schema, defaults and resolution into
//! library objects.

use std::sync::Arc;

use contracta::library::{self, Instance};
use contracta::{
    BanachCertificate, Certificate, Interval, MeirKeelerModulus, MetricKind, MetricSpace, Point, SelfMap,
    SimulationFunction, StoppingRule, Strictness, VerificationConfig, WeaklyTypeTriple,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default)]
    pub certificates: Vec<CertificateSpec>,
    #[serde(default)]
    pub verification: VerificationSpec,
    #[serde(default)]
    pub picard: PicardSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<InstancesSpec>,
    #[serde(default)]
    pub metric_check: MetricCheckSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Euclidean,
    Chebyshev,
    Manhattan,
    Discrete,
}

impl From<MetricName> for MetricKind {
    fn from(m: MetricName) -> MetricKind {
        match m {
            MetricName::Euclidean => MetricKind::Euclidean,
            MetricName::Chebyshev => MetricKind::Chebyshev,
            MetricName::Manhattan => MetricKind::Manhattan,
            MetricName::Discrete => MetricKind::Discrete,
        }
    }
}

fn default_space_name() -> String {
    "X".into()
}

fn default_metric() -> MetricName {
    MetricName::Euclidean
}

/// `bounds` holds one `[lower, upper]` per coordinate, or a single pair that
/// is repeated `dimension` times. `null` stands for an infinite bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default = "default_space_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<Vec<(f64, f64)>>,
    #[serde(default = "default_metric")]
    pub metric: MetricName,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<MetricSpace, CliError> {
        let dim = self.dimension.unwrap_or(self.bounds.len());
        if dim == 0 {
            return Err(CliError::config("space.dimension must be positive"));
        }
        let expand = |n: usize, what: &str| -> Result<Vec<usize>, CliError> {
            match n {
                1 => Ok(vec![0; dim]),
                n if n == dim => Ok((0..dim).collect()),
                n => Err(CliError::config(format!(
                    "space.{what} has {n} entries, expected 1 or {dim}"
                ))),
            }
        };
        let domain = expand(self.bounds.len(), "bounds")?
            .into_iter()
            .map(|i| {
                let (lo, hi) = self.bounds[i];
                Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
            })
            .collect();
        let sampling = match &self.sampling_box {
            Some(b) => Some(
                expand(b.len(), "sampling_box")?
                    .into_iter()
                    .map(|i| Interval::new(b[i].0, b[i].1))
                    .collect(),
            ),
            None => None,
        };
        Ok(MetricSpace::new(&self.name, domain, sampling, self.metric.into())?)
    }
}

/// Exactly one of `builtin` or `exprs` (one expression in x1..xd per
/// output coordinate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exprs: Option<Vec<String>>,
}

impl MapSpec {
    pub fn build(&self, space: Arc<MetricSpace>) -> Result<SelfMap, CliError> {
        match (&self.builtin, &self.exprs) {
            (Some(b), None) => Ok(library::builtin_map(b, space)?),
            (None, Some(e)) => {
                let name = self.name.clone().unwrap_or_else(|| e.join(", "));
                Ok(SelfMap::parse(name, space, e)?)
            }
            _ => Err(CliError::config("map needs exactly one of `builtin` or `exprs`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrictnessName {
    Strict,
    Relaxed,
}

fn default_strictness() -> StrictnessName {
    StrictnessName::Strict
}

/// A certificate. A `zeta` or `weakly_type` entry that gives only a `name`
/// refers to the builtin library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateSpec {
    Banach {
        lambda: f64,
    },
    Zeta {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta: Option<String>,
    },
    MeirKeeler {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<(f64, f64)>>,
    },
    WeaklyType {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psi: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<String>,
        #[serde(default = "default_strictness")]
        strictness: StrictnessName,
    },
}

impl CertificateSpec {
    pub fn build(&self) -> Result<Certificate, CliError> {
        Ok(match self {
            CertificateSpec::Banach { lambda } => Certificate::Banach(BanachCertificate::new(*lambda)?),
            CertificateSpec::Zeta { name, zeta } => match (name, zeta) {
                (name, Some(src)) => Certificate::Zeta(SimulationFunction::parse(
                    name.clone().unwrap_or_else(|| src.clone()),
                    src,
                )?),
                (Some(name), None) => Certificate::Zeta(
                    library::zeta_library()
                        .into_iter()
                        .find(|z| z.name() == name)
                        .ok_or_else(|| CliError::config(format!("no library simulation function `{name}`")))?,
                ),
                (None, None) => return Err(CliError::config("zeta certificate needs `zeta` or `name`")),
            },
            CertificateSpec::MeirKeeler { delta, table } => match (delta, table) {
                (Some(src), None) => Certificate::MeirKeeler(MeirKeelerModulus::parse(src)?),
                (None, Some(t)) => Certificate::MeirKeeler(MeirKeelerModulus::tabulated(t.clone())?),
                _ => {
                    return Err(CliError::config(
                        "meir_keeler certificate needs exactly one of `delta` or `table`",
                    ))
                }
            },
            CertificateSpec::WeaklyType {
                name,
                psi,
                alpha,
                beta,
                strictness,
            } => match (psi, alpha, beta) {
                (Some(p), Some(a), Some(b)) => {
                    let s = match strictness {
                        StrictnessName::Strict => Strictness::Strict,
                        StrictnessName::Relaxed => Strictness::Relaxed,
                    };
                    Certificate::WeaklyType(WeaklyTypeTriple::parse(p, a, b, s)?)
                }
                (None, None, None) => {
                    let name = name
                        .as_ref()
                        .ok_or_else(|| CliError::config("weakly_type certificate needs psi/alpha/beta or `name`"))?;
                    Certificate::WeaklyType(
                        library::triple_library()
                            .into_iter()
                            .find(|(n, _)| n == name)
                            .map(|(_, w)| w)
                            .ok_or_else(|| CliError::config(format!("no library triple `{name}`")))?,
                    )
                }
                _ => return Err(CliError::config("weakly_type certificate needs all of psi, alpha, beta")),
            },
        })
    }

    /// Display name used in reports.
    pub fn display_name(&self) -> Option<&str> {
        match self {
            CertificateSpec::Zeta { name, .. } | CertificateSpec::WeaklyType { name, .. } => name.as_deref(),
            _ => None,
        }
    }
}

fn default_seed() -> u64 {
    0
}
fn default_n_pairs() -> u64 {
    100_000
}
fn default_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}
fn default_shrink_levels() -> u32 {
    8
}
fn default_width_factor() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: u64,
    #[serde(default)]
    pub slack: f64,
    #[serde(default = "default_grid")]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_shrink_levels")]
    pub shrink_levels: u32,
    #[serde(default = "default_width_factor")]
    pub width_factor: f64,
}

impl Default for VerificationSpec {
    fn default() -> Self {
        VerificationSpec {
            seed: default_seed(),
            n_pairs: default_n_pairs(),
            slack: 0.0,
            epsilon_grid: default_grid(),
            shrink_levels: default_shrink_levels(),
            width_factor: default_width_factor(),
        }
    }
}

impl VerificationSpec {
    pub fn build(&self) -> Result<VerificationConfig, CliError> {
        let cfg = VerificationConfig {
            n_pairs: self.n_pairs,
            seed: self.seed,
            slack: self.slack,
            epsilon_grid: self.epsilon_grid.clone(),
            shrink_levels: self.shrink_levels,
            width_factor: self.width_factor,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> u64 {
    100_000
}
fn default_trace_cap() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    /// Defaults to 10⁶ × the sampled diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_radius: Option<f64>,
    /// When set, `iterate` also runs the multi-start uniqueness probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_starts: Option<usize>,
    /// Iterates kept in reports; step distances are always kept.
    #[serde(default = "default_trace_cap")]
    pub max_reported_iterates: usize,
}

impl Default for PicardSpec {
    fn default() -> Self {
        PicardSpec {
            x0: None,
            tol: default_tol(),
            max_iter: default_max_iter(),
            divergence_radius: None,
            n_starts: None,
            max_reported_iterates: default_trace_cap(),
        }
    }
}

impl PicardSpec {
    pub fn stopping_rule(&self, map: &SelfMap) -> Result<StoppingRule, CliError> {
        Ok(match self.divergence_radius {
            Some(r) => StoppingRule::new(self.tol, self.max_iter, r)?,
            None => StoppingRule::for_map(map, self.tol, self.max_iter)?,
        })
    }

    pub fn start(&self) -> Result<Point, CliError> {
        let x0 = self
            .x0
            .as_ref()
            .ok_or_else(|| CliError::config("picard.x0 is required for iterate"))?;
        Ok(Point::new(x0.clone())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LibrarySelection {
    All,
    Z,
    WeaklyType,
    None,
}

fn default_library() -> LibrarySelection {
    LibrarySelection::All
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    /// Defaults to the top-level space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    pub map: MapSpec,
    pub certificate: CertificateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstancesSpec {
    #[serde(default = "default_library")]
    pub library: LibrarySelection,
    /// Add the identity map on [0, 2] under one Z and one weakly-type
    /// certificate; both must be skipped.
    #[serde(default)]
    pub include_identity: bool,
    #[serde(default)]
    pub extra: Vec<InstanceSpec>,
}

impl Default for InstancesSpec {
    fn default() -> Self {
        InstancesSpec {
            library: default_library(),
            include_identity: false,
            extra: Vec::new(),
        }
    }
}

fn default_triples() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricCheckSpec {
    #[serde(default = "default_triples")]
    pub n_triples: u64,
}

impl Default for MetricCheckSpec {
    fn default() -> Self {
        MetricCheckSpec {
            n_triples: default_triples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

fn default_format() -> Format {
    Format::Json
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            format: default_format(),
            path: None,
        }
    }
}

impl ExperimentConfig {
    /// Parse and check the schema version. Errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn build_space(&self) -> Result<Arc<MetricSpace>, CliError> {
        let spec = self.space.as_ref().ok_or_else(|| CliError::config("missing `space`"))?;
        Ok(Arc::new(spec.build()?))
    }

    pub fn build_map(&self) -> Result<SelfMap, CliError> {
        let spec = self.map.as_ref().ok_or_else(|| CliError::config("missing `map`"))?;
        spec.build(self.build_space()?)
    }

    pub fn build_instances(&self) -> Result<Vec<Instance>, CliError> {
        let spec = self.instances.clone().unwrap_or_default();
        let mut out = match spec.library {
            LibrarySelection::All => library::all_instances(),
            LibrarySelection::Z => library::z_instances(),
            LibrarySelection::WeaklyType => library::weakly_type_instances(),
            LibrarySelection::None => Vec::new(),
        };
        if spec.include_identity {
            out.push(library::identity_z_instance());
            out.push(library::identity_weakly_type_instance());
        }
        for extra in &spec.extra {
            let space = match &extra.space {
                Some(s) => Arc::new(s.build()?),
                None => self.build_space()?,
            };
            out.push(Instance {
                name: extra.name.clone(),
                map: extra.map.build(space)?,
                certificate: extra.certificate.build()?,
            });
        }
        if out.is_empty() {
            return Err(CliError::config("no instances selected"));
        }
        Ok(out)
    }
}
