//! Merging the three configuration layers: command-line flags override config
//! file entries, which override the built-in defaults.
//!
//! The config file is a flat `key = value` format whose keys mirror the long
//! flag names (`total-steps = 150000`). Blank lines and `#` comments are
//! allowed; unknown or repeated keys are not.

use anyhow::{anyhow, bail, Context};
use silcr_core::agents::AgentKind;
use silcr_core::harness::RunConfig;
use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::TrainArgs;

/// Every key the config file accepts, mirroring the train flags.
const KNOWN_KEYS: &[&str] = &[
    "agent",
    "env",
    "episodic",
    "total-steps",
    "seed",
    "batch-size",
    "gamma",
    "tau",
    "alpha",
    "lr-actor",
    "lr-critic",
    "online-capacity",
    "expert-capacity",
    "hidden-dims",
    "warmup-steps",
    "eval-interval",
    "eval-episodes",
    "q-count",
    "demos",
    "out",
];

#[derive(Debug, Default)]
pub struct FileSettings {
    entries: HashMap<String, String>,
}

impl FileSettings {
    pub fn load(path: &PathBuf) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    fn parse(text: &str) -> anyhow::Result<Self> {
        let mut entries = HashMap::new();
        for (index, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {} is not `key = value`: {line:?}", index + 1))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("unknown config key {key:?} on line {}", index + 1);
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                bail!("config key {key:?} appears twice");
            }
        }
        Ok(FileSettings { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Flag value if present, else the parsed file entry, else `None`.
fn pick<T>(flag: Option<T>, file: &FileSettings, key: &str) -> anyhow::Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|e| anyhow!("config key {key}: {e} (value {raw:?})")),
        None => Ok(None),
    }
}

fn parse_dims(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad layer width {part:?} in {text:?}"))
        })
        .collect()
}

pub fn parse_capacities(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad capacity {part:?} in {text:?}"))
        })
        .collect()
}

/// Builds the full run configuration from flags, optional config file, and
/// defaults, in that order of precedence.
pub fn build_run_config(args: &TrainArgs) -> anyhow::Result<RunConfig> {
    let file = match &args.config {
        Some(path) => FileSettings::load(path)?,
        None => FileSettings::default(),
    };

    let agent: AgentKind = pick(args.agent.clone(), &file, "agent")?
        .ok_or_else(|| anyhow!("an agent is required: pass --agent silcr|sac|sqil"))?
        .parse()?;
    let env = pick(args.env.clone(), &file, "env")?
        .ok_or_else(|| anyhow!("an environment is required: pass --env <NAME>"))?;

    let mut config = RunConfig::new(agent, env);
    if let Some(value) = pick(args.episodic, &file, "episodic")? {
        config.episodic = value;
    }
    if let Some(value) = pick(args.total_steps, &file, "total-steps")? {
        config.total_steps = value;
    }
    if let Some(value) = pick(args.seed, &file, "seed")? {
        config.seed = value;
    }
    if let Some(value) = pick(args.batch_size, &file, "batch-size")? {
        config.batch_size = value;
    }
    if let Some(value) = pick(args.gamma, &file, "gamma")? {
        config.gamma = value;
    }
    if let Some(value) = pick(args.tau, &file, "tau")? {
        config.tau = value;
    }
    if let Some(value) = pick(args.alpha, &file, "alpha")? {
        config.alpha = value;
    }
    if let Some(value) = pick(args.lr_actor, &file, "lr-actor")? {
        config.lr_actor = value;
    }
    if let Some(value) = pick(args.lr_critic, &file, "lr-critic")? {
        config.lr_critic = value;
    }
    if let Some(value) = pick(args.online_capacity, &file, "online-capacity")? {
        config.online_capacity = value;
    }
    if let Some(value) = pick(args.expert_capacity, &file, "expert-capacity")? {
        config.expert_capacity = value;
    }
    if let Some(text) = pick(args.hidden_dims.clone(), &file, "hidden-dims")? {
        config.hidden_dims = parse_dims(&text)?;
    }
    if let Some(value) = pick(args.warmup_steps, &file, "warmup-steps")? {
        config.warmup_steps = value;
    }
    if let Some(value) = pick(args.eval_interval, &file, "eval-interval")? {
        config.eval_interval = value;
    }
    if let Some(value) = pick(args.eval_episodes, &file, "eval-episodes")? {
        config.eval_episodes = value;
    }
    if let Some(value) = pick(args.q_count, &file, "q-count")? {
        config.q_count = value;
    }
    config.demo_path = pick(args.demos.clone(), &file, "demos")?;
    if config.agent == AgentKind::Sqil && config.demo_path.is_none() {
        bail!("sqil trains from recorded demonstrations: pass --demos <FILE>");
    }

    // Runs always leave a metrics trail; the default directory is named after
    // what ran so ablation arms and seed sweeps never collide.
    let out = pick(args.out.clone(), &file, "out")?;
    config.out_dir = Some(out.unwrap_or_else(|| default_out_dir(&config)));
    Ok(config)
}

fn default_out_dir(config: &RunConfig) -> PathBuf {
    let mode = if config.episodic { "-episodic" } else { "" };
    PathBuf::from("runs").join(format!(
        "{}-{}{}-seed{}",
        config.agent, config.env, mode, config.seed
    ))
}
