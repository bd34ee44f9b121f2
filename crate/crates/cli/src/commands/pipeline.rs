use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use altqa_judge::Gateway;
use altqa_pipeline::synth::mock_judges;
use altqa_pipeline::{
    ingest_with_manifest, render_dataset, run_pipeline_with_cancel, Flag, Judges, PipelineRun, PipelineStats,
    VerificationPolicy,
};
use anyhow::{bail, Context, Result};

use crate::config::RunConfig;
use crate::io::{write_json, write_text};
use crate::Failure;

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const CANDIDATES_FILE: &str = "candidates.jsonl";

pub struct PipelineInputs {
    pub manifest: PathBuf,
    pub trajectories: PathBuf,
    pub output_dir: PathBuf,
}

pub fn build_judges(cfg: &RunConfig) -> Result<Judges> {
    let v = &cfg.verification;
    match v.mock {
        Some(true) => Ok(mock_judges(v.k, v.demotion_rate)),
        Some(false) => {
            let (eq, verifiers, grouping) = cfg.live_judges()?;
            let http = |c| Gateway::http(c).context(Failure::Config);
            Ok(Judges {
                equivalence: http(eq)?,
                verifiers: verifiers.into_iter().map(http).collect::<Result<_>>()?,
                grouping: http(grouping)?,
            })
        }
        None => Err(anyhow::anyhow!(
            "verification.mock is unset; set it to true for offline judges or false to use [judges] endpoints"
        ))
        .context(Failure::Config),
    }
}

/// Share of candidates with at least one failed judge call.
pub fn judge_failure_fraction(run: &PipelineRun) -> f64 {
    let (failed, total) = run.candidates().fold((0usize, 0usize), |(f, n), c| {
        (f + c.flags.contains(&Flag::JudgeError) as usize, n + 1)
    });
    if total == 0 {
        0.0
    } else {
        failed as f64 / total as f64
    }
}

/// Write the dataset, stats and candidate ledger under `dir`.
pub fn write_outputs(run: &PipelineRun, dir: &Path) -> Result<PipelineStats> {
    let stats = run.stats();
    write_text(&dir.join(DATASET_FILE), &render_dataset(&run.mined())?)?;
    write_json(&dir.join(STATS_FILE), &stats)?;
    let mut ledger = String::new();
    for c in run.candidates() {
        ledger.push_str(&serde_json::to_string(c)?);
        ledger.push('\n');
    }
    write_text(&dir.join(CANDIDATES_FILE), &ledger)?;
    Ok(stats)
}

pub fn run(cfg: &RunConfig, inputs: &PipelineInputs, cancel: &AtomicBool) -> Result<PipelineStats> {
    let judges = build_judges(cfg)?;
    let policy = VerificationPolicy::new(cfg.verification.eta, cfg.verification.k).context(Failure::Config)?;
    let t1 = ingest_with_manifest(&inputs.manifest, &inputs.trajectories).context(Failure::Ingest)?;
    let run = run_pipeline_with_cancel(&t1, &judges, &policy, None, cancel)?;
    let stats = write_outputs(&run, &inputs.output_dir)?;

    println!("{}", inputs.output_dir.join(DATASET_FILE).display());
    println!("{}", stats.retention_report());
    println!(
        "{} questions, ambiguity ratio {:.3}",
        stats.questions, stats.overall_ambiguity_ratio
    );
    if run.interrupted {
        return Err(anyhow::anyhow!(
            "stopped early; {} of {} questions written",
            run.questions.len(),
            t1.len()
        ))
        .context(Failure::Interrupted);
    }
    let fraction = judge_failure_fraction(&run);
    if fraction > cfg.verification.max_judge_failure_fraction {
        let err = anyhow::anyhow!(
            "{:.1}% of candidates lost a judge call (limit {:.1}%)",
            100.0 * fraction,
            100.0 * cfg.verification.max_judge_failure_fraction
        );
        return Err(err).context(Failure::JudgeExhausted);
    }
    if stats.judge.transport_failures > 0 {
        log::warn!("{} judge calls failed after retries", stats.judge.transport_failures);
    }
    Ok(stats)
}

/// Refuse to write into a path that exists and is not a directory.
pub fn check_output_dir(dir: &Path) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        bail!("{} exists and is not a directory", dir.display());
    }
    Ok(())
}
