//! The metrics trail a run leaves behind: a plain-text file of per-interval
//! records, plus pointwise aggregation of several such files across seeds.

use crate::error::{Error, Result};
use crate::harness::population_stats;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// One evaluation-interval snapshot of a training run.
///
/// `wall_time` is measured, not computed, so it stays in memory only: the
/// persisted file must be a pure function of config and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub env_step: u64,
    /// Return of the most recently completed training episode; NaN before the
    /// first one finishes.
    pub return_train: f64,
    /// Mean deterministic-policy return over the evaluation episodes.
    pub return_eval: f64,
    /// Critic loss of the latest update; NaN while updates have not started.
    pub q_loss: f64,
    pub policy_loss: f64,
    /// Lowest and highest episodic returns currently retained by the expert
    /// buffer; NaN for agents without one or while it is empty.
    pub expert_min: f64,
    pub expert_max: f64,
    /// Seconds since the run started. Not persisted.
    pub wall_time: f64,
}

/// A parsed metrics file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFile {
    pub digest: u64,
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
}

const HEADER_PREFIX: &str = "# silcr-metrics v1 digest=";
const COLUMNS_LINE: &str =
    "# env_step return_train return_eval q_loss policy_loss expert_min expert_max";

fn header_lines(digest: u64, seed: u64) -> String {
    format!("{HEADER_PREFIX}{digest:016x} seed={seed}\n{COLUMNS_LINE}\n")
}

fn record_line(r: &MetricsRecord) -> String {
    format!(
        "{} {} {} {} {} {} {}",
        r.env_step, r.return_train, r.return_eval, r.q_loss, r.policy_loss, r.expert_min,
        r.expert_max
    )
}

pub fn write_metrics(
    path: impl AsRef<Path>,
    digest: u64,
    seed: u64,
    records: &[MetricsRecord],
) -> Result<()> {
    let path = path.as_ref();
    let mut text = header_lines(digest, seed);
    for r in records {
        let _ = writeln!(text, "{}", record_line(r));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Streams records to disk as a run produces them, so a long training leaves
/// a readable trail before it finishes. The final file is byte-identical to
/// a one-shot [`write_metrics`] of the same records.
pub(crate) struct MetricsWriter {
    writer: std::io::BufWriter<fs::File>,
    path: PathBuf,
}

impl MetricsWriter {
    pub(crate) fn create(path: PathBuf, digest: u64, seed: u64) -> Result<Self> {
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = std::io::BufWriter::new(file);
        std::io::Write::write_all(&mut writer, header_lines(digest, seed).as_bytes())
            .and_then(|()| std::io::Write::flush(&mut writer))
            .map_err(|e| Error::io(&path, e))?;
        Ok(MetricsWriter { writer, path })
    }

    pub(crate) fn append(&mut self, record: &MetricsRecord) -> Result<()> {
        let line = record_line(record);
        std::io::Write::write_all(&mut self.writer, line.as_bytes())
            .and_then(|()| std::io::Write::write_all(&mut self.writer, b"\n"))
            .and_then(|()| std::io::Write::flush(&mut self.writer))
            .map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<MetricsFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text).map_err(|reason| Error::format(path, reason))
}

fn parse_metrics(text: &str) -> std::result::Result<MetricsFile, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("file is empty")?;
    let rest = header
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| format!("unrecognized header {header:?}"))?;
    let (digest_hex, seed_text) = rest
        .split_once(" seed=")
        .ok_or_else(|| format!("header is missing the seed: {header:?}"))?;
    let digest = u64::from_str_radix(digest_hex, 16)
        .map_err(|_| format!("bad config digest {digest_hex:?}"))?;
    let seed = seed_text
        .parse::<u64>()
        .map_err(|_| format!("bad seed {seed_text:?}"))?;
    let columns = lines.next().ok_or("missing column header")?;
    if columns != COLUMNS_LINE {
        return Err(format!("unexpected column header {columns:?}"));
    }

    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(format!(
                "record {} has {} fields, expected 7",
                k + 1,
                fields.len()
            ));
        }
        let env_step = fields[0]
            .parse::<u64>()
            .map_err(|_| format!("bad env_step {:?} in record {}", fields[0], k + 1))?;
        let float = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|_| format!("bad value {:?} in record {}", fields[i], k + 1))
        };
        if let Some(previous) = records.last().map(|r: &MetricsRecord| r.env_step) {
            if previous >= env_step {
                return Err(format!("env_step does not increase at record {}", k + 1));
            }
        }
        records.push(MetricsRecord {
            env_step,
            return_train: float(1)?,
            return_eval: float(2)?,
            q_loss: float(3)?,
            policy_loss: float(4)?,
            expert_min: float(5)?,
            expert_max: float(6)?,
            wall_time: 0.0,
        });
    }
    Ok(MetricsFile {
        digest,
        seed,
        records,
    })
}

/// Pointwise mean and population standard deviation of every metric across a
/// set of runs, one entry per evaluation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRecord {
    pub env_step: u64,
    pub return_train_mean: f64,
    pub return_train_std: f64,
    pub return_eval_mean: f64,
    pub return_eval_std: f64,
    pub q_loss_mean: f64,
    pub q_loss_std: f64,
    pub policy_loss_mean: f64,
    pub policy_loss_std: f64,
    pub expert_min_mean: f64,
    pub expert_min_std: f64,
    pub expert_max_mean: f64,
    pub expert_max_std: f64,
}

/// Combines per-seed metrics files into a mean ± std curve. The files must
/// come from the same configuration (equal digests) and share the evaluation
/// grid; seeds are free to repeat.
pub fn aggregate_seeds(paths: &[PathBuf]) -> Result<Vec<AggregateRecord>> {
    if paths.len() < 2 {
        return Err(Error::Config(format!(
            "aggregation needs at least two metrics files, got {}",
            paths.len()
        )));
    }
    let files: Vec<MetricsFile> = paths.iter().map(read_metrics).collect::<Result<_>>()?;

    let digest = files[0].digest;
    if let Some(foreign) = files.iter().position(|f| f.digest != digest) {
        return Err(Error::Input(format!(
            "metrics files mix different configurations: {} has digest {:016x}, {} has {:016x}",
            paths[0].display(),
            digest,
            paths[foreign].display(),
            files[foreign].digest
        )));
    }
    let len = files[0].records.len();
    if let Some(odd) = files.iter().position(|f| f.records.len() != len) {
        return Err(Error::Input(format!(
            "{} has {} records where {} has {}",
            paths[odd].display(),
            files[odd].records.len(),
            paths[0].display(),
            len
        )));
    }

    let mut curve = Vec::with_capacity(len);
    for k in 0..len {
        let env_step = files[0].records[k].env_step;
        if let Some(odd) = files
            .iter()
            .position(|f| f.records[k].env_step != env_step)
        {
            return Err(Error::Input(format!(
                "env_step grids disagree at record {}: {} in {} vs {} in {}",
                k + 1,
                env_step,
                paths[0].display(),
                files[odd].records[k].env_step,
                paths[odd].display()
            )));
        }
        let column = |get: fn(&MetricsRecord) -> f64| {
            let values: Vec<f64> = files.iter().map(|f| get(&f.records[k])).collect();
            population_stats(&values)
        };
        let (return_train_mean, return_train_std) = column(|r| r.return_train);
        let (return_eval_mean, return_eval_std) = column(|r| r.return_eval);
        let (q_loss_mean, q_loss_std) = column(|r| r.q_loss);
        let (policy_loss_mean, policy_loss_std) = column(|r| r.policy_loss);
        let (expert_min_mean, expert_min_std) = column(|r| r.expert_min);
        let (expert_max_mean, expert_max_std) = column(|r| r.expert_max);
        curve.push(AggregateRecord {
            env_step,
            return_train_mean,
            return_train_std,
            return_eval_mean,
            return_eval_std,
            q_loss_mean,
            q_loss_std,
            policy_loss_mean,
            policy_loss_std,
            expert_min_mean,
            expert_min_std,
            expert_max_mean,
            expert_max_std,
        });
    }
    Ok(curve)
}

/// Renders an aggregated curve in the same comment-header style as the
/// per-run metrics files.
pub fn render_aggregate(digest: u64, runs: usize, curve: &[AggregateRecord]) -> String {
    let mut text = format!("# silcr-aggregate v1 digest={digest:016x} runs={runs}\n");
    text.push_str(
        "# env_step return_train_mean return_train_std return_eval_mean return_eval_std \
         q_loss_mean q_loss_std policy_loss_mean policy_loss_std expert_min_mean \
         expert_min_std expert_max_mean expert_max_std\n",
    );
    for r in curve {
        let _ = writeln!(
            text,
            "{} {} {} {} {} {} {} {} {} {} {} {} {}",
            r.env_step,
            r.return_train_mean,
            r.return_train_std,
            r.return_eval_mean,
            r.return_eval_std,
            r.q_loss_mean,
            r.q_loss_std,
            r.policy_loss_mean,
            r.policy_loss_std,
            r.expert_min_mean,
            r.expert_min_std,
            r.expert_max_mean,
            r.expert_max_std
        );
    }
    text
}
