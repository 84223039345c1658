//! Experiment configuration: a flat `key = value` file whose keys can each
//! be overridden by a command-line flag of the same name.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use pdls_core::bench::{Task, DEFAULT_BANDWIDTH, DEFAULT_SIGMA_Y, TOY_OBSERVATION_NOISE};
use pdls_core::degrade::OperatorSpec;
use pdls_core::{Condition, Label, PdlsConfig};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Every configuration key, in hashing order.
pub const KEYS: [&str; 16] = [
    "task",
    "dataset",
    "operator",
    "sigma_y",
    "bandwidth",
    "prompt",
    "gamma",
    "eta_max",
    "n_steps",
    "init",
    "base",
    "schedule",
    "suppress_base",
    "time_eps",
    "seed",
    "max_inputs",
];

/// Command-line overrides; one flag per configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// toy2d | gblur | mblur | sr8 | inpaint
    #[arg(long)]
    pub task: Option<String>,
    /// `demo`, a mixture file (toy2d) or a directory of class subdirectories with PGM images.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Operator descriptor, e.g. `gblur:size=7,sigma=1.5`; defaults to the task preset.
    #[arg(long)]
    pub operator: Option<String>,
    #[arg(long = "sigma_y", alias = "sigma-y")]
    pub sigma_y: Option<String>,
    /// Exemplar bandwidth (component variance) for image datasets.
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// `true` (ground-truth label), `null`, or labels joined by `+`.
    #[arg(long)]
    pub prompt: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long = "eta_max", alias = "eta-max")]
    pub eta_max: Option<String>,
    #[arg(long = "n_steps", alias = "n-steps")]
    pub n_steps: Option<String>,
    /// structural | semantic | mixed
    #[arg(long)]
    pub init: Option<String>,
    /// prompt | null
    #[arg(long)]
    pub base: Option<String>,
    /// cosine | constant
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long = "suppress_base", alias = "suppress-base")]
    pub suppress_base: Option<String>,
    #[arg(long = "time_eps", alias = "time-eps")]
    pub time_eps: Option<String>,
    /// Seed list: `7`, `1,4,9` or a half-open range `0..50`.
    #[arg(long)]
    pub seed: Option<String>,
    /// Evenly spaced subset of the dataset images; 0 keeps all.
    #[arg(long = "max_inputs", alias = "max-inputs")]
    pub max_inputs: Option<String>,
}

impl ConfigArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields = [
            ("task", &self.task),
            ("dataset", &self.dataset),
            ("operator", &self.operator),
            ("sigma_y", &self.sigma_y),
            ("bandwidth", &self.bandwidth),
            ("prompt", &self.prompt),
            ("gamma", &self.gamma),
            ("eta_max", &self.eta_max),
            ("n_steps", &self.n_steps),
            ("init", &self.init),
            ("base", &self.base),
            ("schedule", &self.schedule),
            ("suppress_base", &self.suppress_base),
            ("time_eps", &self.time_eps),
            ("seed", &self.seed),
            ("max_inputs", &self.max_inputs),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    /// File values first, then flags.
    pub fn resolve(&self) -> Result<ExperimentSpec> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in self.overrides() {
            pairs.insert(k.to_string(), v.clone());
        }
        ExperimentSpec::from_pairs(&pairs)
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut pairs = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(format!("line {}: unknown key `{k}`", n + 1));
        }
        if pairs.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{k}`", n + 1));
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Demo,
    Path(PathBuf),
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Demo => f.write_str("demo"),
            DatasetSource::Path(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prompt {
    /// Each input's own class label.
    TrueLabel,
    Null,
    Labels(Vec<Label>),
}

impl Prompt {
    pub fn condition(&self, true_label: &Label) -> Condition {
        match self {
            Prompt::TrueLabel => Condition::labels([true_label.clone()]),
            Prompt::Null => Condition::Null,
            Prompt::Labels(l) => Condition::labels(l.iter().cloned()),
        }
    }
}

impl fmt::Display for Prompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prompt::TrueLabel => f.write_str("true"),
            Prompt::Null => f.write_str("null"),
            Prompt::Labels(l) => {
                let names: Vec<&str> = l.iter().map(Label::as_str).collect();
                f.write_str(&names.join("+"))
            }
        }
    }
}

impl FromStr for Prompt {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "true" => Ok(Prompt::TrueLabel),
            "null" => Ok(Prompt::Null),
            _ => {
                let mut labels: Vec<Label> = s.split('+').map(|l| Label::new(l.trim())).collect();
                if labels.iter().any(|l| l.as_str().is_empty()) {
                    return Err(format!("empty label in prompt `{s}`"));
                }
                labels.sort();
                labels.dedup();
                Ok(Prompt::Labels(labels))
            }
        }
    }
}

/// Parses `7`, `1,4,9` or the half-open range `0..50`.
pub fn parse_seeds(s: &str) -> std::result::Result<Vec<u64>, String> {
    let bad = || format!("bad seed list `{s}`");
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<std::result::Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("seed list `{s}` is empty"));
    }
    Ok(seeds)
}

pub fn format_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds.windows(2).all(|w| w[1] == w[0] + 1);
    match seeds {
        [a, .., b] if contiguous => format!("{a}..{}", b + 1),
        _ => seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    /// Whether `task` was given explicitly rather than defaulted.
    pub task_explicit: bool,
    pub dataset: DatasetSource,
    /// `None` for the task preset; always `None` for toy2d.
    pub operator: Option<OperatorSpec>,
    pub sigma_y: f64,
    pub bandwidth: f64,
    pub prompt: Prompt,
    pub pdls: PdlsConfig,
    pub seeds: Vec<u64>,
    pub max_inputs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::from_pairs(&BTreeMap::new()).expect("defaults are valid")
    }
}

fn cfg_err(key: &str, reason: impl fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

fn value<T: FromStr>(pairs: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    pairs
        .get(key)
        .map(|v| v.parse::<T>().map_err(|e| cfg_err(key, format!("`{v}`: {e}"))))
        .transpose()
}

impl ExperimentSpec {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        let task: Task = value(pairs, "task")?.unwrap_or(Task::Toy2d);
        let dataset = match pairs.get("dataset").map(String::as_str) {
            None | Some("demo") => DatasetSource::Demo,
            Some(p) => DatasetSource::Path(PathBuf::from(p)),
        };
        let operator = match pairs.get("operator").map(String::as_str) {
            None | Some("preset" | "none") => None,
            Some(d) => Some(d.parse::<OperatorSpec>().map_err(|e| cfg_err("operator", e))?),
        };
        let defaults = PdlsConfig::default();
        let pdls = PdlsConfig {
            gamma: value(pairs, "gamma")?.unwrap_or(defaults.gamma),
            eta_max: value(pairs, "eta_max")?.unwrap_or(defaults.eta_max),
            n_steps: value(pairs, "n_steps")?.unwrap_or(defaults.n_steps),
            init_mode: value(pairs, "init")?.unwrap_or(defaults.init_mode),
            base_condition: value(pairs, "base")?.unwrap_or(defaults.base_condition),
            schedule: value(pairs, "schedule")?.unwrap_or(defaults.schedule),
            suppress_base: value(pairs, "suppress_base")?.unwrap_or(defaults.suppress_base),
            time_eps: value(pairs, "time_eps")?.unwrap_or(defaults.time_eps),
        };
        let default_sigma = if task.is_image() { DEFAULT_SIGMA_Y } else { TOY_OBSERVATION_NOISE };
        let spec = Self {
            task,
            task_explicit: pairs.contains_key("task"),
            dataset,
            operator,
            sigma_y: value(pairs, "sigma_y")?.unwrap_or(default_sigma),
            bandwidth: value(pairs, "bandwidth")?.unwrap_or(DEFAULT_BANDWIDTH),
            prompt: value(pairs, "prompt")?.unwrap_or(Prompt::TrueLabel),
            pdls,
            seeds: match pairs.get("seed") {
                Some(s) => parse_seeds(s).map_err(|e| cfg_err("seed", e))?,
                None => vec![0],
            },
            max_inputs: value(pairs, "max_inputs")?.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the knobs that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        self.pdls.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.sigma_y >= 0.0 && self.sigma_y.is_finite()) {
            return Err(cfg_err("sigma_y", "must be finite and non-negative"));
        }
        if !(self.bandwidth >= 0.0 && self.bandwidth.is_finite()) {
            return Err(cfg_err("bandwidth", "must be finite and non-negative"));
        }
        let compatible = match (self.task, &self.operator) {
            (_, None) => true,
            (Task::Toy2d, Some(_)) => false,
            (Task::GaussianBlur, Some(op)) => matches!(op, OperatorSpec::GaussianBlur { .. }),
            (Task::MotionBlur, Some(op)) => matches!(op, OperatorSpec::MotionBlur { .. }),
            (Task::Sr8, Some(op)) => matches!(op, OperatorSpec::Downsample { factor: 8 }),
            (Task::Inpaint, Some(op)) => matches!(op, OperatorSpec::Inpaint { .. }),
        };
        if !compatible {
            return Err(CliError::Config(format!(
                "operator `{}` does not match task {}",
                self.operator.as_ref().map(ToString::to_string).unwrap_or_default(),
                self.task
            )));
        }
        Ok(())
    }

    /// The operator descriptor in effect; `None` for toy2d.
    pub fn operator_spec(&self) -> Option<OperatorSpec> {
        self.operator.clone().or_else(|| self.task.operator_spec())
    }

    /// Resolved value of every key, in [`KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.pdls;
        let values = [
            self.task.to_string(),
            self.dataset.to_string(),
            self.operator_spec().map(|o| o.to_string()).unwrap_or_else(|| "none".into()),
            self.sigma_y.to_string(),
            self.bandwidth.to_string(),
            self.prompt.to_string(),
            p.gamma.to_string(),
            p.eta_max.to_string(),
            p.n_steps.to_string(),
            p.init_mode.to_string(),
            p.base_condition.to_string(),
            p.schedule.to_string(),
            p.suppress_base.to_string(),
            p.time_eps.to_string(),
            format_seeds(&self.seeds),
            self.max_inputs.to_string(),
        ];
        KEYS.into_iter().zip(values).collect()
    }

    /// Canonical `key=value` lines; this is what [`Self::config_hash`] digests.
    pub fn hash_input(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::hash_input`].
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.hash_input().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Row label: `pdls`, or `baseline` when steering is off, followed by
    /// every ablation knob that differs from its default.
    pub fn method_label(&self) -> String {
        let d = PdlsConfig::default();
        let p = &self.pdls;
        let mut label = String::from(if p.eta_max == 0.0 { "baseline" } else { "pdls" });
        if p.init_mode != d.init_mode {
            label.push_str(&format!("+init={}", p.init_mode));
        }
        if p.base_condition != d.base_condition {
            label.push_str(&format!("+base={}", p.base_condition));
        }
        if p.schedule != d.schedule && p.eta_max != 0.0 {
            label.push_str(&format!("+schedule={}", p.schedule));
        }
        if p.suppress_base {
            label.push_str("+suppress_base");
        }
        if self.prompt == Prompt::Null {
            label.push_str("+prompt=null");
        }
        label
    }

    pub fn write_run_file(&self, path: &Path, extra: &[(&str, String)]) -> Result<()> {
        let mut text = self.hash_input();
        text.push_str(&format!("config_hash={}\n", self.config_hash()));
        for (k, v) in extra {
            text.push_str(&format!("{k}={v}\n"));
        }
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
