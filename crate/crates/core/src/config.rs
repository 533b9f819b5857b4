//! JSON run configurations and experiment specifications.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    corollary1_schedule, theorem1_beta, Algorithm, Problem, RunSettings, Schedule,
};
use crate::dataio::{self, Format};
use crate::error::{Error, Result};
use crate::oracle::LocalModel;
use crate::topology::{Family, Topology};

/// Regularization coefficient used when a config does not set `reg`.
pub const DEFAULT_REG: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Builtin(Family),
    Custom(PathBuf),
}

impl TopologySpec {
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        match s.strip_prefix("custom:") {
            Some(path) => Ok(TopologySpec::Custom(base.join(path))),
            None => s
                .parse::<Family>()
                .ok()
                .filter(|f| *f != Family::Custom)
                .map(TopologySpec::Builtin)
                .ok_or_else(|| Error::config("topology", format!("unknown topology `{s}`"))),
        }
    }

    pub fn build(&self, n: usize) -> Result<Topology> {
        let topology = match self {
            TopologySpec::Builtin(f) => Topology::build(*f, n)?,
            TopologySpec::Custom(path) => Topology::from_file(path)?,
        };
        if topology.n() != n {
            return Err(Error::config(
                "n",
                format!("config says {n} nodes, weight matrix has {}", topology.n()),
            ));
        }
        Ok(topology)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// A libsvm or csv file, normalized and split uniformly over the nodes.
    LogisticFile(PathBuf),
    /// Two-cloud synthetic logistic data.
    SyntheticLogistic {
        m_per_node: usize,
        p: usize,
        separation: f64,
        seed: u64,
    },
    /// Random heterogeneous quadratics with Gaussian oracle noise.
    Quadratic {
        p: usize,
        noise_std: f64,
        eig_min: f64,
        eig_max: f64,
        seed: u64,
    },
}

/// Parses `k=v,k=v` into a lookup closure over allowed keys.
fn key_values<'a>(spec: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::config("model", format!("expected key=value, found `{part}`")))?;
        if !allowed.contains(&k.trim()) {
            return Err(Error::config("model", format!("unknown model parameter `{k}`")));
        }
        out.push((k.trim(), v.trim()));
    }
    Ok(out)
}

fn kv_get<T: std::str::FromStr>(kv: &[(&str, &str)], key: &str, default: T) -> Result<T> {
    match kv.iter().find(|(k, _)| *k == key) {
        Some((_, v)) => v
            .parse()
            .map_err(|_| Error::config("model", format!("bad value `{v}` for `{key}`"))),
        None => Ok(default),
    }
}

impl ModelSpec {
    /// `logistic:<path>`, `synthetic:m=..,p=..,sep=..,seed=..` or
    /// `quadratic:p=..,sigma=..,eig_min=..,eig_max=..,seed=..`.
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .map_or((s, ""), |(k, r)| (k, r));
        match kind {
            "logistic" if !rest.is_empty() => Ok(ModelSpec::LogisticFile(base.join(rest))),
            "synthetic" => {
                let kv = key_values(rest, &["m", "p", "sep", "seed"])?;
                Ok(ModelSpec::SyntheticLogistic {
                    m_per_node: kv_get(&kv, "m", 200)?,
                    p: kv_get(&kv, "p", 20)?,
                    separation: kv_get(&kv, "sep", 2.0)?,
                    seed: kv_get(&kv, "seed", 0)?,
                })
            }
            "quadratic" => {
                let kv = key_values(rest, &["p", "sigma", "eig_min", "eig_max", "seed"])?;
                Ok(ModelSpec::Quadratic {
                    p: kv_get(&kv, "p", 10)?,
                    noise_std: kv_get(&kv, "sigma", 0.1)?,
                    eig_min: kv_get(&kv, "eig_min", 0.5)?,
                    eig_max: kv_get(&kv, "eig_max", 1.0)?,
                    seed: kv_get(&kv, "seed", 0)?,
                })
            }
            _ => Err(Error::config("model", format!("unknown model `{s}`"))),
        }
    }

    pub fn build(&self, n: usize, reg: f64, data_seed: u64) -> Result<Vec<LocalModel>> {
        match self {
            ModelSpec::LogisticFile(path) => {
                let raw = dataio::load_dataset(path, Format::from_path(path))?;
                let data = dataio::normalize_rows(&raw)?;
                Ok(dataio::partition_uniform(&data, n, data_seed, reg)?
                    .into_iter()
                    .map(LocalModel::from)
                    .collect())
            }
            ModelSpec::SyntheticLogistic {
                m_per_node,
                p,
                separation,
                seed,
            } => Ok(dataio::synthesize_logistic(n, *m_per_node, *p, *separation, *seed, reg)?
                .into_iter()
                .map(LocalModel::from)
                .collect()),
            ModelSpec::Quadratic {
                p,
                noise_std,
                eig_min,
                eig_max,
                seed,
            } => Ok(dataio::synthesize_quadratic(n, *p, *noise_std, *eig_min, *eig_max, *seed)?
                .into_iter()
                .map(LocalModel::from)
                .collect()),
        }
    }
}

/// A parameter given either as a number or by a named rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param<T> {
    Value(T),
    Corollary1,
    /// Only meaningful for β: `48 L² α² / n`.
    Theorem1,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum RawParam {
    Number(f64),
    Rule(String),
}

impl RawParam {
    fn into_f64(self, field: &str) -> Result<Param<f64>> {
        match self {
            RawParam::Number(v) => Ok(Param::Value(v)),
            RawParam::Rule(r) if r == "corollary1" => Ok(Param::Corollary1),
            RawParam::Rule(r) if r == "theorem1" && field == "beta" => Ok(Param::Theorem1),
            RawParam::Rule(r) => Err(Error::config(field, format!("unknown rule `{r}`"))),
        }
    }

    fn into_usize(self, field: &str) -> Result<Param<usize>> {
        match self.into_f64(field)? {
            Param::Value(v) if v >= 1.0 && v.fract() == 0.0 => Ok(Param::Value(v as usize)),
            Param::Value(v) => Err(Error::config(field, format!("must be a positive integer, got {v}"))),
            Param::Corollary1 => Ok(Param::Corollary1),
            Param::Theorem1 => Err(Error::config(field, "theorem1 applies to beta only")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    name: Option<String>,
    algorithm: String,
    topology: String,
    n: usize,
    model: String,
    alpha: RawParam,
    beta: Option<RawParam>,
    b0: Option<RawParam>,
    #[serde(rename = "T")]
    horizon: usize,
    seed: u64,
    output_seed: Option<u64>,
    record_every: Option<usize>,
    batch: Option<usize>,
    reg: Option<f64>,
    epoch_size: Option<f64>,
    check_invariants: Option<bool>,
    x0: Option<Vec<f64>>,
    data_seed: Option<u64>,
}

/// A fully described single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub algorithm: Algorithm,
    pub topology: TopologySpec,
    pub n: usize,
    pub model: ModelSpec,
    pub alpha: Param<f64>,
    pub beta: Param<f64>,
    pub b0: Param<usize>,
    pub horizon: usize,
    pub seed: u64,
    pub output_seed: u64,
    pub record_every: usize,
    pub batch: usize,
    pub reg: f64,
    pub epoch_size: Option<f64>,
    pub check_invariants: bool,
    pub x0: Option<Vec<f64>>,
    pub data_seed: u64,
}

impl RunConfig {
    /// Parses one JSON object; relative paths resolve against `base`.
    pub fn from_json_value(value: serde_json::Value, base: &Path) -> Result<Self> {
        let raw: RawRunConfig = serde_json::from_value(value).map_err(schema_error)?;
        Self::from_raw(raw, base)
    }

    pub fn from_json_str(text: &str, base: &Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(schema_error)?;
        Self::from_json_value(value, base)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))?;
        if cfg.name.is_empty() {
            cfg.name = path
                .file_stem()
                .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    fn from_raw(raw: RawRunConfig, base: &Path) -> Result<Self> {
        let algorithm: Algorithm = raw.algorithm.parse()?;
        let alpha = raw.alpha.into_f64("alpha")?;
        if let Param::Value(a) = alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::config("alpha", format!("must be positive, got {a}")));
            }
        }
        let from_corollary = alpha == Param::Corollary1;
        let beta = match raw.beta {
            Some(b) => b.into_f64("beta")?,
            None if from_corollary => Param::Corollary1,
            None if algorithm == Algorithm::GtHsgd => Param::Theorem1,
            None => Param::Value(1.0),
        };
        let b0 = match raw.b0 {
            Some(b) => b.into_usize("b0")?,
            None if from_corollary => Param::Corollary1,
            None => Param::Value(1),
        };
        if raw.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if raw.horizon < 2 {
            return Err(Error::config("T", "must be at least 2"));
        }
        let record_every = raw.record_every.unwrap_or(1);
        if record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        let batch = raw.batch.unwrap_or(1);
        if batch == 0 {
            return Err(Error::config("batch", "must be at least 1"));
        }
        let reg = raw.reg.unwrap_or(DEFAULT_REG);
        if !(reg >= 0.0) {
            return Err(Error::config("reg", "must be nonnegative"));
        }
        if let Some(e) = raw.epoch_size {
            if !(e > 0.0) {
                return Err(Error::config("epoch_size", "must be positive"));
            }
        }
        Ok(Self {
            name: raw.name.unwrap_or_default(),
            algorithm,
            topology: TopologySpec::parse(&raw.topology, base)?,
            n: raw.n,
            model: ModelSpec::parse(&raw.model, base)?,
            alpha,
            beta,
            b0,
            horizon: raw.horizon,
            seed: raw.seed,
            output_seed: raw.output_seed.unwrap_or(raw.seed),
            record_every,
            batch,
            reg,
            epoch_size: raw.epoch_size,
            check_invariants: raw.check_invariants.unwrap_or(true),
            x0: raw.x0,
            data_seed: raw.data_seed.unwrap_or(0),
        })
    }

    /// Builds the topology and local models and resolves the schedule rules.
    pub fn prepare(&self, threads: usize) -> Result<(Problem, RunSettings)> {
        let topology = self.topology.build(self.n)?;
        let models = self.model.build(self.n, self.reg, self.data_seed)?;
        let mut problem = Problem::new(topology, models)?;
        if let Some(e) = self.epoch_size {
            problem = problem.with_epoch_size(e);
        }
        let smoothness = problem.smoothness();
        let corollary = corollary1_schedule(self.n, self.horizon, smoothness)?;
        let alpha = match self.alpha {
            Param::Value(a) => a,
            _ => corollary.alpha,
        };
        let beta = match self.beta {
            Param::Value(b) => b,
            Param::Corollary1 => corollary.beta,
            Param::Theorem1 => theorem1_beta(alpha, smoothness, self.n).min(1.0),
        };
        let b0 = match self.b0 {
            Param::Value(b) => b,
            _ => corollary.b0,
        };
        let schedule = Schedule::new(alpha, beta, b0, self.horizon)?;
        let mut settings = RunSettings::new(self.algorithm, schedule);
        settings.batch = self.batch;
        settings.x0 = self.x0.clone();
        settings.seed = self.seed;
        settings.output_seed = self.output_seed;
        settings.record_every = self.record_every;
        settings.check_invariants = self.check_invariants;
        settings.threads = threads;
        Ok((problem, settings))
    }

    /// Copy with both seeds shifted by `k`, for seed replication.
    pub fn replicate(&self, k: u64) -> Self {
        let mut c = self.clone();
        c.seed = self.seed.wrapping_add(k);
        c.output_seed = self.output_seed.wrapping_add(k);
        c
    }
}

/// Which trace column a comparison plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlotMetric {
    #[default]
    Loss,
    StatGap,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperimentSpec {
    runs: Vec<serde_json::Value>,
    repeat: Option<usize>,
    output_dir: Option<PathBuf>,
    plot: Option<bool>,
    metric: Option<PlotMetric>,
    log_y: Option<bool>,
}

/// A sweep: several runs, each replicated over `repeat` seeds.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub runs: Vec<RunConfig>,
    pub repeat: usize,
    pub output_dir: PathBuf,
    pub plot: bool,
    pub metric: PlotMetric,
    pub log_y: bool,
}

impl ExperimentSpec {
    pub fn from_json_str(text: &str, base: &Path) -> Result<Self> {
        let raw: RawExperimentSpec = serde_json::from_str(text).map_err(schema_error)?;
        let runs = raw
            .runs
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                RunConfig::from_json_value(v, base).map_err(|e| match e {
                    Error::Config { field, message } => Error::Config {
                        field: format!("runs[{k}].{field}"),
                        message,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if runs.is_empty() {
            return Err(Error::config("runs", "at least one run is required"));
        }
        let mut seen = HashSet::new();
        for (k, r) in runs.iter().enumerate() {
            if r.name.is_empty() {
                return Err(Error::config(format!("runs[{k}].name"), "every run needs a name"));
            }
            if !seen.insert(r.name.clone()) {
                return Err(Error::config(format!("runs[{k}].name"), format!("duplicate name `{}`", r.name)));
            }
        }
        let repeat = raw.repeat.unwrap_or(1);
        if repeat == 0 {
            return Err(Error::config("repeat", "must be at least 1"));
        }
        let metric = raw.metric.unwrap_or_default();
        Ok(Self {
            runs,
            repeat,
            output_dir: base.join(raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))),
            plot: raw.plot.unwrap_or(true),
            metric,
            log_y: raw.log_y.unwrap_or(metric == PlotMetric::StatGap),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Maps serde's messages (which name the offending field) onto config errors.
fn schema_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or("<json>")
        .to_string();
    Error::Config { field, message: msg }
}
