//! Experiment execution: target construction, the multi-seed worker pool,
//! and emission of per-seed CSVs, bootstrap summaries, charts, and the
//! run manifest.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qcbm::dist::DiscreteDistribution;
use qcbm::fdiv::{exact_divergence_definition, Divergence};
use qcbm::ftq::{
    estimate_kl, estimate_pearson, estimate_tv, BoundedRatioPair, FtEstimate, RatioOrientation,
};
use qcbm::sim::{born_probabilities, AnsatzSpec};
use qcbm::train::{
    bootstrap_summary, run_training, BootstrapSummary, Expectation, Heuristic, Metric, RatioMode,
    TrainConfig, TrainRecord,
};

use crate::config::{Experiment, FtConfig, TrainingConfig};
use crate::{charts, CliError, CliResult};

/// Resamples drawn per epoch when bootstrapping summary bands.
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;
/// Seed of the bootstrap resampling stream (fixed: summaries are part of
/// the reproducible output).
pub const BOOTSTRAP_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Validate and write the manifest without running.
    pub dry_run: bool,
    /// Also emit SVG convergence charts from the summary.
    pub charts: bool,
}

fn runtime_error(msg: impl ToString) -> CliError {
    CliError::Runtime(msg.to_string())
}

/// All floats in CSV output: 17 significant digits, enough to reproduce
/// the f64 bit pattern on re-parse.
fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Everything needed to reproduce a run: the resolved config, the build
/// identity, and the regime label of circuit-vs-circuit experiments.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub config: &'a Experiment,
    pub version: String,
    /// Over/under-parameterisation label, e.g. "OO(12,30)"; null for
    /// gaussian targets and estimator runs.
    pub regime: Option<String>,
    pub wall_time_seconds: f64,
}

/// Depth-difference regime of a circuit target vs the model, labelled with
/// both parameter counts: 3 or more extra model layers is over-over (OO),
/// 1–2 is over (O), equal depths is exact (E), and the mirrored deficits
/// are under (U) and under-under (UU).
pub fn regime_label(cfg: &TrainingConfig) -> Option<String> {
    let target_depth = cfg.target.depth?;
    let params_at = |depth: usize| cfg.n_qubits * (2 * depth + 2);
    let delta = cfg.model_depth as i64 - target_depth as i64;
    let name = match delta {
        d if d >= 3 => "OO",
        1..=2 => "O",
        0 => "E",
        -2..=-1 => "U",
        _ => "UU",
    };
    Some(format!(
        "{name}({},{})",
        params_at(target_depth),
        params_at(cfg.model_depth)
    ))
}

/// Builds the target distribution: a Born distribution of the ansatz at
/// seeded uniform parameters, or a discretised Gaussian.
pub fn make_target(cfg: &TrainingConfig) -> qcbm::Result<DiscreteDistribution> {
    let target = &cfg.target;
    match target.kind.as_str() {
        "qcbm_random" => {
            let ansatz = AnsatzSpec::new(cfg.n_qubits, target.depth.expect("resolved"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(target.seed.expect("resolved"));
            let params: Vec<f64> = (0..ansatz.param_count())
                .map(|_| rng.gen_range(-PI..PI))
                .collect();
            born_probabilities(&ansatz, &params)
        }
        "gaussian" => DiscreteDistribution::target_gaussian(
            cfg.n_qubits,
            target.mean.expect("resolved"),
            target.std.expect("resolved"),
        ),
        other => unreachable!("target type `{other}` rejected during validation"),
    }
}

/// Maps a resolved config and one seed onto the library's training config.
pub fn to_train_config(cfg: &TrainingConfig, seed: u64) -> TrainConfig {
    let generators = match cfg.kind.as_str() {
        "f_switch" => cfg
            .generators
            .as_ref()
            .expect("resolved")
            .iter()
            .map(|name| Divergence::from_name(name).expect("validated"))
            .collect(),
        _ => vec![Divergence::from_name(cfg.divergence.as_deref().expect("validated"))
            .expect("validated")],
    };
    let heuristic = match cfg.kind.as_str() {
        "f_switch" => Heuristic::FSwitch,
        "f_local" => Heuristic::KLocal {
            k: cfg.k.expect("validated"),
        },
        _ => Heuristic::Single,
    };
    let train = &cfg.train;
    TrainConfig {
        generators,
        heuristic,
        learning_rate: train.learning_rate,
        epochs: train.epochs,
        expectation: match train.shots {
            None => Expectation::Exact,
            Some(shots) => Expectation::Sampled { shots },
        },
        ratio_mode: match train.classifier.as_str() {
            "exact" => RatioMode::Exact,
            _ => RatioMode::Trained(train.classifier_config.expect("resolved")),
        },
        clamp: train.ratio_clamp.expect("resolved"),
        seed,
        record_parameters: train.record_parameters,
    }
}

pub fn run_experiment(experiment: &Experiment, options: &RunOptions) -> CliResult<()> {
    match experiment {
        Experiment::Training(cfg) => run_training_experiment(experiment, cfg, options),
        Experiment::Ft(cfg) => run_ft_experiment(experiment, cfg, options),
    }
}

fn run_training_experiment(
    experiment: &Experiment,
    cfg: &TrainingConfig,
    options: &RunOptions,
) -> CliResult<()> {
    let start = Instant::now();
    let out = PathBuf::from(experiment.output());
    fs::create_dir_all(&out).map_err(runtime_error)?;
    let regime = regime_label(cfg);

    let target = make_target(cfg).map_err(runtime_error)?;
    let ansatz = AnsatzSpec::new(cfg.n_qubits, cfg.model_depth).map_err(runtime_error)?;
    let seeds = cfg.seeds.as_deref().expect("resolved");
    to_train_config(cfg, seeds[0])
        .validate(&ansatz)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if options.dry_run {
        write_manifest(&out, experiment, regime, start)?;
        println!("dry run: validated config, wrote {}", out.join("manifest.json").display());
        return Ok(());
    }

    let sweep = || -> qcbm::Result<Vec<TrainRecord>> {
        seeds
            .par_iter()
            .map(|&seed| run_training(&to_train_config(cfg, seed), &target, &ansatz))
            .collect()
    };
    let records = match cfg.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(runtime_error)?
            .install(sweep),
        None => sweep(),
    }
    .map_err(runtime_error)?;

    for record in &records {
        write_seed_csv(&out, record)?;
    }
    let summary = if records.len() >= 2 {
        let tv = bootstrap_summary(&records, Metric::ExactTv, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED)
            .map_err(runtime_error)?;
        let kl = bootstrap_summary(&records, Metric::ExactKl, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED)
            .map_err(runtime_error)?;
        write_summary_csv(&out, &tv, &kl)?;
        Some((tv, kl))
    } else {
        None
    };
    if options.charts {
        match &summary {
            Some((tv, kl)) => {
                charts::line_chart(&out.join("tv.svg"), "exact total variation", tv)
                    .map_err(runtime_error)?;
                charts::line_chart(&out.join("kl.svg"), "exact KL(model - target)", kl)
                    .map_err(runtime_error)?;
            }
            None => println!("charts skipped: summaries need at least two seeds"),
        }
    }
    write_manifest(&out, experiment, regime, start)?;
    println!(
        "wrote {} ({} seeds x {} epochs)",
        out.display(),
        seeds.len(),
        cfg.train.epochs
    );
    Ok(())
}

fn run_ft_experiment(
    experiment: &Experiment,
    cfg: &FtConfig,
    options: &RunOptions,
) -> CliResult<()> {
    let start = Instant::now();
    let out = PathBuf::from(experiment.output());
    fs::create_dir_all(&out).map_err(runtime_error)?;
    if options.charts {
        println!("charts skipped: they apply to training summaries");
    }
    if options.dry_run {
        write_manifest(&out, experiment, None, start)?;
        println!("dry run: validated config, wrote {}", out.join("manifest.json").display());
        return Ok(());
    }

    let n_bits = cfg.p.len().trailing_zeros() as usize;
    let target_p = DiscreteDistribution::new(n_bits, cfg.p.clone()).map_err(runtime_error)?;
    let target_q = DiscreteDistribution::new(n_bits, cfg.q.clone()).map_err(runtime_error)?;
    let reference = match cfg.divergence.as_str() {
        "pearson_fwd" => Divergence::PearsonFwd,
        "tv" => Divergence::Tv,
        _ => Divergence::KlIFwd,
    };
    let truth = exact_divergence_definition(reference, &target_p, &target_q)
        .map_err(runtime_error)?;

    // Pre-drawn per-trial seeds keep trials independent of scheduling.
    let mut parent = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trial_seeds: Vec<u64> = (0..cfg.trials).map(|_| parent.gen()).collect();
    let estimates: Vec<FtEstimate> = trial_seeds
        .par_iter()
        .map(|&trial_seed| -> qcbm::Result<FtEstimate> {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            match cfg.divergence.as_str() {
                "pearson_fwd" => {
                    let pair = BoundedRatioPair::with_bound(
                        cfg.p.clone(),
                        cfg.q.clone(),
                        RatioOrientation::QOverP,
                        cfg.bound.expect("resolved"),
                    )?;
                    estimate_pearson(&pair, cfg.accuracy, &mut rng)
                }
                "kl_i_fwd" => {
                    let pair = BoundedRatioPair::with_bound(
                        cfg.p.clone(),
                        cfg.q.clone(),
                        RatioOrientation::POverQ,
                        cfg.bound.expect("resolved"),
                    )?;
                    estimate_kl(&pair, cfg.accuracy, &mut rng)
                }
                _ => estimate_tv(&cfg.p, &cfg.q, cfg.accuracy, &mut rng),
            }
        })
        .collect::<qcbm::Result<_>>()
        .map_err(runtime_error)?;

    write_trials_csv(&out, truth, cfg.accuracy, &estimates)?;
    write_manifest(&out, experiment, None, start)?;
    println!("wrote {} ({} trials)", out.display(), cfg.trials);
    Ok(())
}

fn create_file(path: &Path) -> CliResult<fs::File> {
    fs::File::create(path)
        .map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))
}

fn finish_file(path: &Path, file: fs::File) -> CliResult<()> {
    file.sync_all()
        .map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))
}

fn write_seed_csv(out: &Path, record: &TrainRecord) -> CliResult<()> {
    let path = out.join(format!("seed_{}.csv", record.seed));
    let mut file = create_file(&path)?;
    let chosen_columns = record
        .epochs
        .first()
        .and_then(|e| e.chosen.as_ref())
        .map_or(0, Vec::len);
    let mut header = String::from("epoch,exact_tv,exact_kl");
    for index in 0..chosen_columns {
        header.push_str(&format!(",chosen_{index}"));
    }
    let write = |file: &mut fs::File| -> std::io::Result<()> {
        writeln!(file, "{header}")?;
        for epoch in &record.epochs {
            write!(
                file,
                "{},{},{}",
                epoch.epoch,
                fmt_f64(epoch.exact_tv),
                fmt_f64(epoch.exact_kl)
            )?;
            if let Some(chosen) = &epoch.chosen {
                for divergence in chosen {
                    write!(file, ",{}", divergence.name())?;
                }
            }
            writeln!(file)?;
        }
        Ok(())
    };
    write(&mut file).map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))?;
    finish_file(&path, file)
}

fn write_summary_csv(
    out: &Path,
    tv: &BootstrapSummary,
    kl: &BootstrapSummary,
) -> CliResult<()> {
    let path = out.join("summary.csv");
    let mut file = create_file(&path)?;
    let write = |file: &mut fs::File| -> std::io::Result<()> {
        writeln!(file, "epoch,tv_median,tv_p5,tv_p95,kl_median,kl_p5,kl_p95")?;
        for epoch in 0..tv.median.len() {
            writeln!(
                file,
                "{},{},{},{},{},{},{}",
                epoch + 1,
                fmt_f64(tv.median[epoch]),
                fmt_f64(tv.lower[epoch]),
                fmt_f64(tv.upper[epoch]),
                fmt_f64(kl.median[epoch]),
                fmt_f64(kl.lower[epoch]),
                fmt_f64(kl.upper[epoch])
            )?;
        }
        Ok(())
    };
    write(&mut file).map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))?;
    finish_file(&path, file)
}

fn write_trials_csv(
    out: &Path,
    truth: f64,
    accuracy: f64,
    estimates: &[FtEstimate],
) -> CliResult<()> {
    let path = out.join("trials.csv");
    let mut file = create_file(&path)?;
    let write = |file: &mut fs::File| -> std::io::Result<()> {
        writeln!(
            file,
            "trial,estimate,truth,within_accuracy,queries_to_p,queries_to_q,executions"
        )?;
        for (index, estimate) in estimates.iter().enumerate() {
            let within = usize::from((estimate.value - truth).abs() <= accuracy);
            writeln!(
                file,
                "{},{},{},{},{},{},{}",
                index + 1,
                fmt_f64(estimate.value),
                fmt_f64(truth),
                within,
                estimate.ledger.queries_to_p,
                estimate.ledger.queries_to_q,
                estimate.ledger.executions
            )?;
        }
        Ok(())
    };
    write(&mut file).map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))?;
    finish_file(&path, file)
}

fn write_manifest(
    out: &Path,
    experiment: &Experiment,
    regime: Option<String>,
    start: Instant,
) -> CliResult<()> {
    let manifest = Manifest {
        config: experiment,
        version: crate::version(),
        regime,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| runtime_error(format!("cannot serialise manifest: {e}")))?;
    fs::write(&path, text + "\n")
        .map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))
}
