//! Experiment configs: JSON parsing with line-precise errors, semantic
//! validation, and default resolution. A resolved config has every default
//! materialised, so serialising it into a manifest captures the full
//! experiment and re-parses to an identical resolved config.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qcbm::fdiv::{Divergence, RatioClampPolicy};
use qcbm::train::TrainedRatioConfig;

use crate::{CliError, CliResult};

/// Experiment kinds accepted in the `kind` field.
pub const KINDS: [&str; 4] = ["f_switch", "f_local", "single_divergence", "ft_estimate"];

/// Divergences with a query-counted estimator behind `ft_estimate`.
pub const FT_DIVERGENCES: [&str; 3] = ["pearson_fwd", "tv", "kl_i_fwd"];

/// Seed list used when a training config omits `seeds`.
pub fn default_seeds() -> Vec<u64> {
    (1..=9).collect()
}

/// Target distribution spec: a Born distribution of a seeded random
/// circuit (`qcbm_random`) or a discretised Gaussian (`gaussian`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(rename = "type")]
    pub kind: String,
    /// Circuit depth of a `qcbm_random` target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Seed for the `qcbm_random` parameter draw (default 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Gaussian mean in outcome units (default (2^n − 1)/2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    /// Gaussian standard deviation (default 2^n/4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

/// Training hyper-parameters shared by all training kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Shots per gradient expectation; omitted means exact expectations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    /// Density-ratio source: "exact" tables or "trained" classifiers.
    pub classifier: String,
    /// Classifier refresh hyper-parameters; only with `classifier =
    /// "trained"`, defaults filled when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier_config: Option<TrainedRatioConfig>,
    /// Saturation bounds for density ratios (default 1e-8..1e8).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_clamp: Option<RatioClampPolicy>,
    pub record_parameters: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            learning_rate: 0.05,
            epochs: 500,
            shots: None,
            classifier: "exact".to_string(),
            classifier_config: None,
            ratio_clamp: None,
            record_parameters: false,
        }
    }
}

/// A multi-seed training experiment (`f_switch`, `f_local`, or
/// `single_divergence`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub kind: String,
    pub n_qubits: usize,
    pub target: TargetSpec,
    /// Model circuit depth D_q.
    pub model_depth: usize,
    /// Fixed generator for `f_local` and `single_divergence`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<String>,
    /// Window width for `f_local`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Candidate generators for `f_switch` (default: the full registry).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub train: TrainSettings,
    /// One training run per seed (default 1..=9).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Output directory; required here or via `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Worker threads for the seed sweep (default: machine parallelism).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// A query-counted estimator experiment over explicit mass tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtConfig {
    pub kind: String,
    /// One of [`FT_DIVERGENCES`].
    pub divergence: String,
    /// Mass tables; power-of-two length so the exact reference divergence
    /// is defined.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Certified ratio bound (q/p for pearson_fwd, p/q for kl_i_fwd);
    /// omitted means the exact maximum ratio, unused for tv.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Additive accuracy ε of each estimate.
    pub accuracy: f64,
    /// Independent estimator trials (default 1).
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_trials() -> usize {
    1
}

/// A validated experiment with all defaults materialised.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Experiment {
    Training(TrainingConfig),
    Ft(FtConfig),
}

impl Experiment {
    pub fn output(&self) -> &str {
        match self {
            Experiment::Training(cfg) => cfg.output.as_deref().expect("resolved"),
            Experiment::Ft(cfg) => cfg.output.as_deref().expect("resolved"),
        }
    }
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Replace the seed list with 1..=N.
    pub seed_count: Option<usize>,
    /// Replace the output directory.
    pub out: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads and resolves a config file; accepts either a bare config or a
/// manifest written by an earlier run (the embedded config is re-used).
pub fn load_experiment(path: &Path, overrides: &Overrides) -> CliResult<Experiment> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    parse_experiment(&text, overrides)
}

/// Parses, validates, and resolves a config from JSON text.
pub fn parse_experiment(text: &str, overrides: &Overrides) -> CliResult<Experiment> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| config_error(format!("invalid JSON: {e}")))?;
    let raw = if value.get("config").is_some() && value.get("version").is_some() {
        let inner = value.get("config").expect("probed").clone();
        raw_from_value(inner)?
    } else {
        raw_from_text(text, &value)?
    };
    resolve(raw, overrides)
}

enum RawExperiment {
    Training(TrainingConfig),
    Ft(FtConfig),
}

fn kind_of(value: &Value) -> CliResult<String> {
    value
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            config_error(format!(
                "missing or non-string `kind` field (expected one of: {})",
                KINDS.join(", ")
            ))
        })
}

fn unknown_kind(kind: &str) -> CliError {
    config_error(format!(
        "unknown experiment kind `{kind}` (expected one of: {})",
        KINDS.join(", ")
    ))
}

/// Typed parse straight from the file text, so serde errors carry the
/// original line and column.
fn raw_from_text(text: &str, value: &Value) -> CliResult<RawExperiment> {
    match kind_of(value)?.as_str() {
        "ft_estimate" => serde_json::from_str(text)
            .map(RawExperiment::Ft)
            .map_err(|e| config_error(e.to_string())),
        "f_switch" | "f_local" | "single_divergence" => serde_json::from_str(text)
            .map(RawExperiment::Training)
            .map_err(|e| config_error(e.to_string())),
        other => Err(unknown_kind(other)),
    }
}

/// Typed parse of a manifest's embedded config (machine-written, so no
/// line positions to preserve).
fn raw_from_value(value: Value) -> CliResult<RawExperiment> {
    match kind_of(&value)?.as_str() {
        "ft_estimate" => serde_json::from_value(value)
            .map(RawExperiment::Ft)
            .map_err(|e| config_error(format!("embedded manifest config: {e}"))),
        "f_switch" | "f_local" | "single_divergence" => serde_json::from_value(value)
            .map(RawExperiment::Training)
            .map_err(|e| config_error(format!("embedded manifest config: {e}"))),
        other => Err(unknown_kind(other)),
    }
}

fn resolve(raw: RawExperiment, overrides: &Overrides) -> CliResult<Experiment> {
    match raw {
        RawExperiment::Training(mut cfg) => {
            if let Some(count) = overrides.seed_count {
                if count == 0 {
                    return Err(config_error("--seed-count must be at least 1"));
                }
                cfg.seeds = Some((1..=count as u64).collect());
            }
            if let Some(out) = &overrides.out {
                cfg.output = Some(out.display().to_string());
            }
            validate_training(&mut cfg)?;
            Ok(Experiment::Training(cfg))
        }
        RawExperiment::Ft(mut cfg) => {
            if overrides.seed_count.is_some() {
                return Err(config_error(
                    "--seed-count only applies to training experiments; ft_estimate uses `trials`",
                ));
            }
            if let Some(out) = &overrides.out {
                cfg.output = Some(out.display().to_string());
            }
            validate_ft(&mut cfg)?;
            Ok(Experiment::Ft(cfg))
        }
    }
}

fn check_divergence_name(name: &str) -> CliResult<Divergence> {
    Divergence::from_name(name).map_err(|_| {
        config_error(format!(
            "unknown divergence `{name}` (run `list-divergences` for the valid identifiers)"
        ))
    })
}

fn validate_training(cfg: &mut TrainingConfig) -> CliResult<()> {
    if cfg.n_qubits == 0 {
        return Err(config_error("`n_qubits` must be at least 1"));
    }
    resolve_target(&mut cfg.target, cfg.n_qubits)?;
    match cfg.kind.as_str() {
        "f_switch" => {
            if cfg.divergence.is_some() {
                return Err(config_error(
                    "`divergence` does not apply to f_switch; use `generators` to restrict the candidate set",
                ));
            }
            if cfg.k.is_some() {
                return Err(config_error("`k` only applies to f_local"));
            }
            let names = cfg.generators.get_or_insert_with(|| {
                Divergence::ALL.iter().map(|d| d.name().to_string()).collect()
            });
            if names.is_empty() {
                return Err(config_error("`generators` must not be empty"));
            }
            for name in names.iter() {
                check_divergence_name(name)?;
            }
        }
        "f_local" => {
            if cfg.generators.is_some() {
                return Err(config_error("`generators` only applies to f_switch"));
            }
            let k = cfg
                .k
                .ok_or_else(|| config_error("f_local requires `k` (window width)"))?;
            if k == 0 || k > cfg.n_qubits {
                return Err(config_error(format!(
                    "`k` must be in 1..={}, got {k}",
                    cfg.n_qubits
                )));
            }
            let name = cfg
                .divergence
                .as_deref()
                .ok_or_else(|| config_error("f_local requires `divergence`"))?;
            check_divergence_name(name)?;
        }
        "single_divergence" => {
            if cfg.generators.is_some() {
                return Err(config_error("`generators` only applies to f_switch"));
            }
            if cfg.k.is_some() {
                return Err(config_error("`k` only applies to f_local"));
            }
            let name = cfg
                .divergence
                .as_deref()
                .ok_or_else(|| config_error("single_divergence requires `divergence`"))?;
            check_divergence_name(name)?;
        }
        other => return Err(unknown_kind(other)),
    }
    validate_train_settings(&mut cfg.train)?;
    let seeds = cfg.seeds.get_or_insert_with(default_seeds);
    if seeds.is_empty() {
        return Err(config_error("`seeds` must not be empty"));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(config_error(
            "`seeds` must be distinct (per-seed CSV files are named after them)",
        ));
    }
    if cfg.workers == Some(0) {
        return Err(config_error("`workers` must be at least 1 when set"));
    }
    require_output(&cfg.output)
}

fn validate_train_settings(train: &mut TrainSettings) -> CliResult<()> {
    if !(train.learning_rate.is_finite() && train.learning_rate > 0.0) {
        return Err(config_error(format!(
            "`train.learning_rate` must be positive and finite, got {}",
            train.learning_rate
        )));
    }
    if train.epochs == 0 {
        return Err(config_error("`train.epochs` must be at least 1"));
    }
    if train.shots == Some(0) {
        return Err(config_error("`train.shots` must be at least 1 when set"));
    }
    match train.classifier.as_str() {
        "exact" => {
            if train.classifier_config.is_some() {
                return Err(config_error(
                    "`train.classifier_config` requires `train.classifier` = \"trained\"",
                ));
            }
        }
        "trained" => {
            let cc = train
                .classifier_config
                .get_or_insert_with(TrainedRatioConfig::default);
            if cc.hidden_per_bit == 0
                || cc.epochs_per_refresh == 0
                || cc.batch_size == 0
                || cc.samples_per_refresh == 0
            {
                return Err(config_error(
                    "`train.classifier_config` counts must all be at least 1",
                ));
            }
            if !(cc.learning_rate.is_finite() && cc.learning_rate > 0.0) {
                return Err(config_error(
                    "`train.classifier_config.learning_rate` must be positive and finite",
                ));
            }
        }
        other => {
            return Err(config_error(format!(
                "unknown classifier `{other}` (expected \"exact\" or \"trained\")"
            )))
        }
    }
    match &train.ratio_clamp {
        Some(clamp) => {
            RatioClampPolicy::new(clamp.r_min, clamp.r_max).map_err(|e| {
                config_error(format!("`train.ratio_clamp`: {e}"))
            })?;
        }
        None => train.ratio_clamp = Some(RatioClampPolicy::default()),
    }
    Ok(())
}

fn resolve_target(target: &mut TargetSpec, n_qubits: usize) -> CliResult<()> {
    match target.kind.as_str() {
        "qcbm_random" => {
            if target.depth.is_none() {
                return Err(config_error(
                    "target type qcbm_random requires `depth` (target circuit depth)",
                ));
            }
            if target.mean.is_some() || target.std.is_some() {
                return Err(config_error(
                    "`mean`/`std` only apply to gaussian targets",
                ));
            }
            target.seed.get_or_insert(0);
        }
        "gaussian" => {
            if target.depth.is_some() || target.seed.is_some() {
                return Err(config_error(
                    "`depth`/`seed` only apply to qcbm_random targets",
                ));
            }
            let outcomes = (1usize << n_qubits) as f64;
            let mean = *target.mean.get_or_insert((outcomes - 1.0) / 2.0);
            if !mean.is_finite() {
                return Err(config_error("`target.mean` must be finite"));
            }
            let std = *target.std.get_or_insert(outcomes / 4.0);
            if !(std.is_finite() && std > 0.0) {
                return Err(config_error(format!(
                    "`target.std` must be positive and finite, got {std}"
                )));
            }
        }
        other => {
            return Err(config_error(format!(
                "unknown target type `{other}` (expected qcbm_random or gaussian)"
            )))
        }
    }
    Ok(())
}

fn check_masses(label: &str, masses: &[f64]) -> CliResult<()> {
    let mut sum = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        if !(m.is_finite() && m >= 0.0) {
            return Err(config_error(format!(
                "`{label}[{i}]` must be a probability, got {m}"
            )));
        }
        sum += m;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(config_error(format!("`{label}` must sum to 1, got {sum}")));
    }
    Ok(())
}

/// Exact maximum of num[i]/den[i]; fails where a positive numerator sits
/// on a zero denominator.
fn max_ratio(num: &[f64], den: &[f64], num_label: &str, den_label: &str) -> CliResult<f64> {
    let mut max = 1.0_f64;
    for (i, (&n, &d)) in num.iter().zip(den).enumerate() {
        if n == 0.0 {
            continue;
        }
        if d == 0.0 {
            return Err(config_error(format!(
                "`{num_label}[{i}]` is positive where `{den_label}[{i}]` is zero, so the ratio {num_label}/{den_label} is unbounded"
            )));
        }
        max = max.max(n / d);
    }
    Ok(max)
}

fn validate_ft(cfg: &mut FtConfig) -> CliResult<()> {
    if cfg.kind != "ft_estimate" {
        return Err(unknown_kind(&cfg.kind));
    }
    if !FT_DIVERGENCES.contains(&cfg.divergence.as_str()) {
        return Err(config_error(format!(
            "ft_estimate supports divergences {}; got `{}`",
            FT_DIVERGENCES.join(", "),
            cfg.divergence
        )));
    }
    if cfg.p.len() != cfg.q.len() {
        return Err(config_error(format!(
            "`p` and `q` must have the same length, got {} and {}",
            cfg.p.len(),
            cfg.q.len()
        )));
    }
    if cfg.p.len() < 2 || !cfg.p.len().is_power_of_two() {
        return Err(config_error(
            "`p` must list a power-of-two number of masses (at least 2) so the exact reference divergence is defined",
        ));
    }
    check_masses("p", &cfg.p)?;
    check_masses("q", &cfg.q)?;
    if !(cfg.accuracy.is_finite() && cfg.accuracy > 0.0 && cfg.accuracy < 1.0) {
        return Err(config_error(format!(
            "`accuracy` must lie in (0, 1), got {}",
            cfg.accuracy
        )));
    }
    if cfg.trials == 0 {
        return Err(config_error("`trials` must be at least 1"));
    }
    let ratio = match cfg.divergence.as_str() {
        "pearson_fwd" => Some(max_ratio(&cfg.q, &cfg.p, "q", "p")?),
        "kl_i_fwd" => Some(max_ratio(&cfg.p, &cfg.q, "p", "q")?),
        "tv" => {
            if cfg.bound.is_some() {
                return Err(config_error("`bound` does not apply to tv"));
            }
            None
        }
        _ => unreachable!("divergence checked above"),
    };
    if let Some(actual) = ratio {
        match cfg.bound {
            Some(bound) => {
                if !(bound.is_finite() && bound >= 1.0) {
                    return Err(config_error(format!(
                        "`bound` must be finite and at least 1, got {bound}"
                    )));
                }
                if actual > bound * (1.0 + 1e-12) {
                    return Err(config_error(format!(
                        "`bound` = {bound} is below the actual maximum ratio {actual}"
                    )));
                }
            }
            // Materialise the exact bound so the manifest pins the query
            // budget the run used.
            None => cfg.bound = Some(actual),
        }
    }
    require_output(&cfg.output)
}

fn require_output(output: &Option<String>) -> CliResult<()> {
    match output {
        Some(path) if !path.is_empty() => Ok(()),
        _ => Err(config_error(
            "no output directory: set `output` in the config or pass --out",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_overrides() -> Overrides {
        Overrides::default()
    }

    fn minimal_training(kind: &str) -> String {
        format!(
            r#"{{
  "kind": "{kind}",
  "n_qubits": 3,
  "target": {{ "type": "qcbm_random", "depth": 1 }},
  "model_depth": 4,
  "output": "out"
}}"#
        )
    }

    #[test]
    fn f_switch_defaults_are_materialised() {
        let exp = parse_experiment(&minimal_training("f_switch"), &no_overrides()).unwrap();
        let Experiment::Training(cfg) = exp else {
            panic!("expected a training experiment");
        };
        assert_eq!(cfg.seeds.as_deref(), Some(default_seeds().as_slice()));
        assert_eq!(
            cfg.generators.as_ref().map(Vec::len),
            Some(Divergence::ALL.len())
        );
        assert_eq!(cfg.target.seed, Some(0));
        assert_eq!(cfg.train.epochs, 500);
        assert_eq!(cfg.train.ratio_clamp, Some(RatioClampPolicy::default()));
    }

    #[test]
    fn resolved_configs_reparse_identically() {
        let exp = parse_experiment(&minimal_training("f_switch"), &no_overrides()).unwrap();
        let round = parse_experiment(&serde_json::to_string(&exp).unwrap(), &no_overrides())
            .unwrap();
        assert_eq!(exp, round);
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let text = r#"{
  "kind": "f_switch",
  "n_qubits": 3,
  "target": { "type": "qcbm_random", "depth": 1 },
  "model_depth": 4,
  "learning_rate": 0.05,
  "output": "out"
}"#;
        let err = parse_experiment(text, &no_overrides()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("learning_rate"), "{msg}");
        assert!(msg.contains("line 6"), "{msg}");
    }

    #[test]
    fn kind_field_mixups_are_named() {
        let err = parse_experiment(&minimal_training("f_local"), &no_overrides()).unwrap_err();
        assert!(err.to_string().contains("requires `k`"), "{err}");
        let text = minimal_training("f_switch").replace("\"kind\": \"f_switch\"", "\"kind\": \"nope\"");
        let err = parse_experiment(&text, &no_overrides()).unwrap_err();
        assert!(err.to_string().contains("unknown experiment kind `nope`"), "{err}");
    }

    #[test]
    fn gaussian_defaults_follow_the_register_size() {
        let text = r#"{
  "kind": "f_local",
  "n_qubits": 4,
  "target": { "type": "gaussian" },
  "model_depth": 4,
  "divergence": "kl_i_rev",
  "k": 2,
  "output": "out"
}"#;
        let Experiment::Training(cfg) = parse_experiment(text, &no_overrides()).unwrap() else {
            panic!("expected a training experiment");
        };
        assert_eq!(cfg.target.mean, Some(7.5));
        assert_eq!(cfg.target.std, Some(4.0));
    }

    #[test]
    fn overrides_replace_seeds_and_output() {
        let overrides = Overrides {
            seed_count: Some(3),
            out: Some(PathBuf::from("elsewhere")),
        };
        let Experiment::Training(cfg) =
            parse_experiment(&minimal_training("f_switch"), &overrides).unwrap()
        else {
            panic!("expected a training experiment");
        };
        assert_eq!(cfg.seeds, Some(vec![1, 2, 3]));
        assert_eq!(cfg.output.as_deref(), Some("elsewhere"));
    }

    #[test]
    fn ft_bound_is_materialised_to_the_exact_ratio() {
        let text = r#"{
  "kind": "ft_estimate",
  "divergence": "pearson_fwd",
  "p": [0.4, 0.3, 0.2, 0.1],
  "q": [0.25, 0.25, 0.25, 0.25],
  "accuracy": 0.1,
  "output": "out"
}"#;
        let Experiment::Ft(cfg) = parse_experiment(text, &no_overrides()).unwrap() else {
            panic!("expected an ft experiment");
        };
        assert_eq!(cfg.bound, Some(2.5));
        assert_eq!(cfg.trials, 1);
    }

    #[test]
    fn ft_rejects_unbounded_ratios_and_bad_shapes() {
        let unbounded = r#"{
  "kind": "ft_estimate",
  "divergence": "pearson_fwd",
  "p": [0.0, 0.5, 0.25, 0.25],
  "q": [0.25, 0.25, 0.25, 0.25],
  "accuracy": 0.1,
  "output": "out"
}"#;
        let err = parse_experiment(unbounded, &no_overrides()).unwrap_err();
        assert!(err.to_string().contains("unbounded"), "{err}");

        let ragged = unbounded.replace("[0.0, 0.5, 0.25, 0.25]", "[0.5, 0.5, 0.0]");
        let err = parse_experiment(&ragged, &no_overrides()).unwrap_err();
        assert!(err.to_string().contains("same length"), "{err}");
    }

    #[test]
    fn manifest_inputs_reuse_the_embedded_config() {
        let exp = parse_experiment(&minimal_training("f_switch"), &no_overrides()).unwrap();
        let manifest = serde_json::json!({
            "config": exp,
            "version": "qcbm-cli test",
            "regime": null,
            "wall_time_seconds": 0.0,
        });
        let reparsed = parse_experiment(&manifest.to_string(), &no_overrides()).unwrap();
        assert_eq!(exp, reparsed);
    }
}
