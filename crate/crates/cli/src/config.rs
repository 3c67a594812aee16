//! Experiment configuration: per-experiment defaults, overridden by a
//! `key = value` file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use spectrwm::{InitialCondition, Nonlinearity, Variant};

use crate::error::{CliError, CliResult};

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "SPECTRWM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    HeatAccuracy,
    HeatCnCompare,
    LangevinErgodic,
    Burgers,
    Kpz,
    HoldingScaling,
    Consistency,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::HeatAccuracy,
        Experiment::HeatCnCompare,
        Experiment::LangevinErgodic,
        Experiment::Burgers,
        Experiment::Kpz,
        Experiment::HoldingScaling,
        Experiment::Consistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HeatAccuracy => "heat-accuracy",
            Experiment::HeatCnCompare => "heat-cn-compare",
            Experiment::LangevinErgodic => "langevin-ergodic",
            Experiment::Burgers => "burgers",
            Experiment::Kpz => "kpz",
            Experiment::HoldingScaling => "holding-scaling",
            Experiment::Consistency => "consistency",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                CliError::Config(format!(
                    "unknown experiment `{s}` (valid: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Every recognised key.
pub const KEYS: &[&str] = &[
    "experiment",
    "out",
    "seed",
    "n",
    "sigma",
    "lambda",
    "nu",
    "t",
    "h",
    "h-list",
    "n-list",
    "variant",
    "nonlinearity",
    "half-factor",
    "ic",
    "replicas",
    "samples",
    "runs",
    "threshold",
    "budget",
    "rho",
    "pcn-steps",
    "burn-in",
    "batches",
    "cn-n",
    "dt",
    "tests",
    "states",
    "surrogate-h",
    "surrogate-t",
];

fn canonical_key(k: &str) -> String {
    k.trim().replace('_', "-")
}

/// Command line. Flags mirror the configuration keys.
#[derive(Debug, Default, Parser)]
#[command(name = "spectrwm", version, about = "Run jump-process experiments for stochastic PDEs")]
pub struct Cli {
    /// heat-accuracy, heat-cn-compare, langevin-ergodic, burgers, kpz, holding-scaling or consistency
    pub experiment_name: Option<String>,
    #[arg(long)]
    pub experiment: Option<String>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Grid points.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    /// Heat damping or KPZ coupling.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Burgers viscosity.
    #[arg(long)]
    pub nu: Option<String>,
    /// Time horizon.
    #[arg(long)]
    pub t: Option<String>,
    /// Jump size.
    #[arg(long)]
    pub h: Option<String>,
    /// Comma-separated jump sizes.
    #[arg(long = "h-list", alias = "h_list")]
    pub h_list: Option<String>,
    /// Comma-separated grid sizes.
    #[arg(long = "n-list", alias = "n_list")]
    pub n_list: Option<String>,
    /// academic, fast or detailed-balance
    #[arg(long)]
    pub variant: Option<String>,
    /// central or one-sided
    #[arg(long)]
    pub nonlinearity: Option<String>,
    #[arg(long = "half-factor", alias = "half_factor")]
    pub half_factor: Option<String>,
    /// Initial condition name.
    #[arg(long)]
    pub ic: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    /// Independent seeded runs (burgers, kpz).
    #[arg(long)]
    pub runs: Option<String>,
    /// Divergence threshold on max|u| and |mean u|.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Event budget per run.
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long = "pcn-steps", alias = "pcn_steps")]
    pub pcn_steps: Option<String>,
    /// Burn-in fraction.
    #[arg(long = "burn-in", alias = "burn_in")]
    pub burn_in: Option<String>,
    #[arg(long)]
    pub batches: Option<String>,
    /// Crank–Nicolson grid size.
    #[arg(long = "cn-n", alias = "cn_n")]
    pub cn_n: Option<String>,
    /// Crank–Nicolson time step.
    #[arg(long)]
    pub dt: Option<String>,
    /// Random test functions (consistency).
    #[arg(long)]
    pub tests: Option<String>,
    /// Random states per test function (consistency).
    #[arg(long)]
    pub states: Option<String>,
    #[arg(long = "surrogate-h", alias = "surrogate_h")]
    pub surrogate_h: Option<String>,
    #[arg(long = "surrogate-t", alias = "surrogate_t")]
    pub surrogate_t: Option<String>,
}

impl Cli {
    fn flag_values(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("out", &self.out),
            ("seed", &self.seed),
            ("n", &self.n),
            ("sigma", &self.sigma),
            ("lambda", &self.lambda),
            ("nu", &self.nu),
            ("t", &self.t),
            ("h", &self.h),
            ("h-list", &self.h_list),
            ("n-list", &self.n_list),
            ("variant", &self.variant),
            ("nonlinearity", &self.nonlinearity),
            ("half-factor", &self.half_factor),
            ("ic", &self.ic),
            ("replicas", &self.replicas),
            ("samples", &self.samples),
            ("runs", &self.runs),
            ("threshold", &self.threshold),
            ("budget", &self.budget),
            ("rho", &self.rho),
            ("pcn-steps", &self.pcn_steps),
            ("burn-in", &self.burn_in),
            ("batches", &self.batches),
            ("cn-n", &self.cn_n),
            ("dt", &self.dt),
            ("tests", &self.tests),
            ("states", &self.states),
            ("surrogate-h", &self.surrogate_h),
            ("surrogate-t", &self.surrogate_t),
        ]
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub seed: u64,
    pub n: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub nu: f64,
    pub t: f64,
    pub h: f64,
    pub h_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub variant: Variant,
    pub nonlinearity: Nonlinearity,
    pub half_factor: bool,
    pub ic: InitialCondition,
    pub replicas: usize,
    pub samples: usize,
    pub runs: usize,
    pub threshold: f64,
    pub budget: u64,
    pub rho: f64,
    pub pcn_steps: u64,
    pub burn_in: f64,
    pub batches: usize,
    pub cn_n: usize,
    pub dt: f64,
    pub tests: usize,
    pub states: usize,
    pub surrogate_h: f64,
    pub surrogate_t: f64,
    /// The resolved `key → value` text, as written to `meta.txt`.
    pub values: BTreeMap<String, String>,
}

/// Documented defaults for `experiment`.
pub fn defaults(experiment: Experiment) -> BTreeMap<String, String> {
    let mut m: BTreeMap<String, String> = [
        ("out", format!("results/{experiment}")),
        ("seed", "0".into()),
        ("n", "16".into()),
        ("sigma", "1".into()),
        ("lambda", "0".into()),
        ("nu", "1".into()),
        ("t", "1".into()),
        ("h", "0.1".into()),
        ("h-list", "0.2,0.1,0.05,0.025".into()),
        ("n-list", "8,16,32".into()),
        ("variant", "fast".into()),
        ("nonlinearity", "central".into()),
        ("half-factor", "false".into()),
        ("ic", "trivial".into()),
        ("replicas", "10000".into()),
        ("samples", "100000".into()),
        ("runs", "10".into()),
        ("threshold", "1000".into()),
        ("budget", "10000000".into()),
        ("rho", "0.9".into()),
        ("pcn-steps", "1000000".into()),
        ("burn-in", "0.2".into()),
        ("batches", "50".into()),
        ("cn-n", "101".into()),
        ("dt", fmt_f64(std::f64::consts::TAU / 101.0)),
        ("tests", "5".into()),
        ("states", "5".into()),
        ("surrogate-h", "0.05".into()),
        ("surrogate-t", "20000".into()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut set = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    set("experiment", experiment.name().into());
    match experiment {
        Experiment::HeatAccuracy => {
            set("lambda", "1".into());
        }
        Experiment::HeatCnCompare => {
            set("n", "11".into());
            set("ic", "high-frequency".into());
            set("replicas", "1000".into());
        }
        Experiment::LangevinErgodic => {
            set("n", "20".into());
            set("h", fmt_f64((std::f64::consts::TAU / 20.0).sqrt()));
            set("variant", "detailed-balance".into());
            set("replicas", "20".into());
            set("t", "4000".into());
            set("budget", "100000000".into());
        }
        Experiment::Burgers => {
            set("n", "32".into());
            set("sigma", "5".into());
            set("ic", "bump".into());
        }
        Experiment::Kpz => {
            set("n", "32".into());
            set("sigma", "5".into());
            set("lambda", "1".into());
            set("ic", "sinusoid".into());
        }
        Experiment::HoldingScaling => {
            set("h-list", "0.1,0.05".into());
        }
        Experiment::Consistency => {
            set("n", "8".into());
            set("lambda", "1".into());
            set("variant", "academic".into());
        }
    }
    m
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config_text(text: &str, origin: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "{}:{}: expected `key = value`, got `{}`",
                origin.display(),
                i + 1,
                raw.trim()
            ))
        })?;
        let key = canonical_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key `{}`",
                origin.display(),
                i + 1,
                k.trim()
            )));
        }
        m.insert(key, v.trim().to_string());
    }
    Ok(m)
}

fn parse<T: FromStr>(values: &BTreeMap<String, String>, key: &str) -> CliResult<T> {
    let raw = &values[key];
    raw.parse()
        .map_err(|_| CliError::Config(format!("cannot parse `{raw}` for `{key}`")))
}

fn parse_list<T: FromStr>(values: &BTreeMap<String, String>, key: &str) -> CliResult<Vec<T>> {
    let raw = &values[key];
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("cannot parse `{}` in `{key}`", s.trim())))
        })
        .collect()
}

fn parse_bool(values: &BTreeMap<String, String>, key: &str) -> CliResult<bool> {
    match values[key].to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(CliError::Config(format!("cannot parse `{other}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Resolve a configuration: defaults ← file ← flags. `env_seed` is used
    /// when neither the file nor the flags set a seed.
    pub fn resolve(cli: &Cli, env_seed: Option<String>) -> CliResult<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                parse_config_text(&text, path)?
            }
            None => BTreeMap::new(),
        };
        let name = cli
            .experiment
            .clone()
            .or_else(|| cli.experiment_name.clone())
            .or_else(|| file.get("experiment").cloned())
            .ok_or_else(|| {
                CliError::Config(
                    "missing experiment name (give it as the first argument or --experiment)".into(),
                )
            })?;
        let experiment: Experiment = name.parse()?;
        let mut values = defaults(experiment);
        if let Some(seed) = env_seed {
            values.insert("seed".into(), seed);
        }
        for (k, v) in file {
            values.insert(k, v);
        }
        for (k, v) in cli.flag_values() {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        values.insert("experiment".into(), experiment.name().into());
        Self::from_values(values)
    }

    /// Typed view of a complete `key → value` map.
    pub fn from_values(values: BTreeMap<String, String>) -> CliResult<Self> {
        for k in values.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
        }
        let experiment: Experiment = values["experiment"].parse()?;
        let variant: Variant = values["variant"]
            .parse()
            .map_err(|e: spectrwm::Error| CliError::Config(e.to_string()))?;
        let ic: InitialCondition = values["ic"]
            .parse()
            .map_err(|e: spectrwm::Error| CliError::Config(e.to_string()))?;
        let nonlinearity: Nonlinearity = values["nonlinearity"]
            .parse()
            .map_err(|e: spectrwm::Error| CliError::Config(format!("nonlinearity: {e}")))?;
        let cfg = Self {
            experiment,
            out: PathBuf::from(&values["out"]),
            seed: parse(&values, "seed")?,
            n: parse(&values, "n")?,
            sigma: parse(&values, "sigma")?,
            lambda: parse(&values, "lambda")?,
            nu: parse(&values, "nu")?,
            t: parse(&values, "t")?,
            h: parse(&values, "h")?,
            h_list: parse_list(&values, "h-list")?,
            n_list: parse_list(&values, "n-list")?,
            variant,
            nonlinearity,
            half_factor: parse_bool(&values, "half-factor")?,
            ic,
            replicas: parse(&values, "replicas")?,
            samples: parse(&values, "samples")?,
            runs: parse(&values, "runs")?,
            threshold: parse(&values, "threshold")?,
            budget: parse(&values, "budget")?,
            rho: parse(&values, "rho")?,
            pcn_steps: parse(&values, "pcn-steps")?,
            burn_in: parse(&values, "burn-in")?,
            batches: parse(&values, "batches")?,
            cn_n: parse(&values, "cn-n")?,
            dt: parse(&values, "dt")?,
            tests: parse(&values, "tests")?,
            states: parse(&values, "states")?,
            surrogate_h: parse(&values, "surrogate-h")?,
            surrogate_t: parse(&values, "surrogate-t")?,
            values,
        };
        if !(0.0..1.0).contains(&cfg.burn_in) {
            return Err(CliError::Config(format!(
                "burn-in must lie in [0, 1), got {}",
                cfg.burn_in
            )));
        }
        Ok(cfg)
    }

    /// Defaults for `experiment` with a few overrides, for programmatic use.
    pub fn with_overrides(experiment: Experiment, overrides: &[(&str, &str)]) -> CliResult<Self> {
        let mut values = defaults(experiment);
        for (k, v) in overrides {
            let key = canonical_key(k);
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
            values.insert(key, v.to_string());
        }
        Self::from_values(values)
    }

    /// `key = value` lines of the resolved configuration.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}
