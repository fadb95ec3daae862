//! Plain-text demo files: newline-delimited transitions grouped per trajectory.
//!
//! Layout:
//! ```text
//! demos v1 <trajectory count>
//! traj <transition count> <episodic return>
//! <state> | <action> | <reward_env> | <next_state> | <terminated> | <truncated>
//! ...
//! ```
//! Vectors are space-separated, flags are 0/1, and floats print in Rust's
//! shortest round-trip form, so render(parse(render(x))) == render(x) byte for
//! byte. The stored episodic return must equal the recomputed transition sum
//! bit for bit or the file is rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::replay::{Trajectory, Transition};

pub fn render_demos(trajectories: &[Trajectory]) -> String {
    let mut out = String::new();
    writeln!(out, "demos v1 {}", trajectories.len()).unwrap();
    for traj in trajectories {
        writeln!(out, "traj {} {}", traj.len(), traj.episodic_return()).unwrap();
        for t in traj.transitions() {
            writeln!(
                out,
                "{} | {} | {} | {} | {} | {}",
                join(&t.state),
                join(&t.action),
                t.reward_env,
                join(&t.next_state),
                u8::from(t.terminated),
                u8::from(t.truncated),
            )
            .unwrap();
        }
    }
    out
}

pub fn parse_demos(text: &str) -> std::result::Result<Vec<Trajectory>, String> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err("empty file".into());
    };
    let count = parse_header(header)?;

    let mut trajectories = Vec::with_capacity(count);
    for _ in 0..count {
        let Some((line_no, traj_line)) = lines.next() else {
            return Err(format!("expected {count} trajectories, file ended early"));
        };
        let (len, stored_return) = parse_traj_line(traj_line)
            .map_err(|e| format!("line {}: {e}", line_no + 1))?;
        let mut transitions = Vec::with_capacity(len);
        for _ in 0..len {
            let Some((line_no, t_line)) = lines.next() else {
                return Err("transition lines ended early".into());
            };
            transitions
                .push(parse_transition(t_line).map_err(|e| format!("line {}: {e}", line_no + 1))?);
        }
        let traj = Trajectory::new(transitions).map_err(|e| e.to_string())?;
        if traj.episodic_return().to_bits() != stored_return.to_bits() {
            return Err(format!(
                "stored return {} disagrees with transition sum {}",
                stored_return,
                traj.episodic_return()
            ));
        }
        trajectories.push(traj);
    }
    if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(format!("line {}: trailing content {extra:?}", line_no + 1));
    }
    Ok(trajectories)
}

pub fn write_demos(path: impl AsRef<Path>, trajectories: &[Trajectory]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_demos(trajectories)).map_err(|e| Error::io(path, e))
}

pub fn read_demos(path: impl AsRef<Path>) -> Result<Vec<Trajectory>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_demos(&text).map_err(|reason| Error::format(path, reason))
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_header(line: &str) -> std::result::Result<usize, String> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("demos") {
        return Err("not a demo file (missing 'demos' header)".into());
    }
    if parts.next() != Some("v1") {
        return Err("unsupported demo file version".into());
    }
    let count = parts
        .next()
        .ok_or("header missing trajectory count")?
        .parse::<usize>()
        .map_err(|e| format!("bad trajectory count: {e}"))?;
    if parts.next().is_some() {
        return Err("unexpected extra header fields".into());
    }
    Ok(count)
}

fn parse_traj_line(line: &str) -> std::result::Result<(usize, f64), String> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("traj") {
        return Err(format!("expected trajectory header, got {line:?}"));
    }
    let len = parts
        .next()
        .ok_or("trajectory header missing length")?
        .parse::<usize>()
        .map_err(|e| format!("bad trajectory length: {e}"))?;
    if len == 0 {
        return Err("trajectory length must be positive".into());
    }
    let ret = parts
        .next()
        .ok_or("trajectory header missing return")?
        .parse::<f64>()
        .map_err(|e| format!("bad episodic return: {e}"))?;
    if parts.next().is_some() {
        return Err("unexpected extra trajectory header fields".into());
    }
    Ok((len, ret))
}

fn parse_transition(line: &str) -> std::result::Result<Transition, String> {
    let groups: Vec<&str> = line.split('|').map(str::trim).collect();
    if groups.len() != 6 {
        return Err(format!("expected 6 '|'-separated fields, got {}", groups.len()));
    }
    let state = parse_vector(groups[0])?;
    let action = parse_vector(groups[1])?;
    let reward_env = groups[2]
        .parse::<f64>()
        .map_err(|e| format!("bad reward: {e}"))?;
    let next_state = parse_vector(groups[3])?;
    let terminated = parse_flag(groups[4])?;
    let truncated = parse_flag(groups[5])?;
    Ok(Transition {
        state,
        action,
        reward_env,
        next_state,
        terminated,
        truncated,
    })
}

fn parse_vector(field: &str) -> std::result::Result<Vec<f64>, String> {
    if field.is_empty() {
        return Err("empty vector field".into());
    }
    field
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|e| format!("bad float {tok:?}: {e}")))
        .collect()
}

fn parse_flag(field: &str) -> std::result::Result<bool, String> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("flag must be 0 or 1, got {other:?}")),
    }
}
