//! One-file training checkpoint: the full actor-critic state plus the rng
//! positions of a run, written bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{SacCore, SacCoreConfig};
use crate::error::{Error, Result};
use crate::nn::{AdamState, GradientBundle, MlpParameters};
use crate::rng::RngSnapshot;
use crate::wire;

const CHECKPOINT_MAGIC: &[u8; 4] = b"ACK1";
const CHECKPOINT_VERSION: u32 = 1;
const MAX_HIDDEN_LAYERS: u32 = 62;

/// Everything needed to continue or inspect a run: networks, optimizer
/// moments, the step counter, and each rng stream's position.
#[derive(Debug, Clone)]
pub struct TrainCheckpoint {
    pub core: SacCore,
    pub env_step: u64,
    pub env_rng: RngSnapshot,
    pub policy_rng: RngSnapshot,
    pub buffer_rng: RngSnapshot,
    pub eval_rng: RngSnapshot,
}

fn write_adam(w: &mut impl Write, state: &AdamState) -> std::io::Result<()> {
    wire::write_u64(w, state.step_count)?;
    for bundle in [&state.first, &state.second] {
        for i in 0..bundle.param_count() {
            wire::write_f64(w, bundle.flat_get(i))?;
        }
    }
    Ok(())
}

fn read_adam(r: &mut impl Read, like: &MlpParameters) -> std::io::Result<AdamState> {
    let step_count = wire::read_u64(r)?;
    let mut first = GradientBundle::zeros_like(like);
    let mut second = GradientBundle::zeros_like(like);
    for bundle in [&mut first, &mut second] {
        for i in 0..like.param_count() {
            bundle.flat_set(i, wire::read_f64(r)?);
        }
    }
    Ok(AdamState {
        first,
        second,
        step_count,
    })
}

fn write_snapshot(w: &mut impl Write, snap: &RngSnapshot) -> std::io::Result<()> {
    w.write_all(&snap.seed)?;
    wire::write_u64(w, snap.stream)?;
    wire::write_u128(w, snap.word_pos)
}

fn read_snapshot(r: &mut impl Read) -> std::io::Result<RngSnapshot> {
    let mut seed = [0u8; 32];
    r.read_exact(&mut seed)?;
    let stream = wire::read_u64(r)?;
    let word_pos = wire::read_u128(r)?;
    Ok(RngSnapshot {
        seed,
        stream,
        word_pos,
    })
}

impl TrainCheckpoint {
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        wire::write_u32(w, CHECKPOINT_VERSION)?;

        let cfg = &self.core.config;
        wire::write_u64(w, cfg.state_dim as u64)?;
        wire::write_u64(w, cfg.action_dim as u64)?;
        wire::write_u32(w, cfg.hidden_dims.len() as u32)?;
        for &d in &cfg.hidden_dims {
            wire::write_u64(w, d as u64)?;
        }
        for v in [cfg.alpha, cfg.gamma, cfg.tau, cfg.lr_actor, cfg.lr_critic] {
            wire::write_f64(w, v)?;
        }
        wire::write_u32(w, cfg.q_count as u32)?;
        wire::write_u64(w, cfg.init_seed)?;
        wire::write_u64(w, self.env_step)?;

        for net in [
            &self.core.policy,
            &self.core.q1,
            &self.core.q2,
            &self.core.q1_target,
            &self.core.q2_target,
        ] {
            net.write_to(w)?;
        }
        for opt in [&self.core.policy_opt, &self.core.q1_opt, &self.core.q2_opt] {
            write_adam(w, opt)?;
        }
        for snap in [&self.env_rng, &self.policy_rng, &self.buffer_rng, &self.eval_rng] {
            write_snapshot(w, snap)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> std::result::Result<Self, String> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| e.to_string())?;
        if &magic != CHECKPOINT_MAGIC {
            return Err("bad magic, not a training checkpoint".into());
        }
        let version = wire::read_u32(r).map_err(|e| e.to_string())?;
        if version != CHECKPOINT_VERSION {
            return Err(format!("unsupported checkpoint version {version}"));
        }

        let state_dim = wire::read_u64(r).map_err(|e| e.to_string())? as usize;
        let action_dim = wire::read_u64(r).map_err(|e| e.to_string())? as usize;
        let n_hidden = wire::read_u32(r).map_err(|e| e.to_string())?;
        if n_hidden > MAX_HIDDEN_LAYERS {
            return Err(format!("implausible hidden layer count {n_hidden}"));
        }
        let mut hidden_dims = Vec::with_capacity(n_hidden as usize);
        for _ in 0..n_hidden {
            hidden_dims.push(wire::read_u64(r).map_err(|e| e.to_string())? as usize);
        }
        let mut scalars = [0.0; 5];
        for v in &mut scalars {
            *v = wire::read_f64(r).map_err(|e| e.to_string())?;
        }
        let q_count = wire::read_u32(r).map_err(|e| e.to_string())? as usize;
        let init_seed = wire::read_u64(r).map_err(|e| e.to_string())?;
        let env_step = wire::read_u64(r).map_err(|e| e.to_string())?;

        let config = SacCoreConfig {
            state_dim,
            action_dim,
            hidden_dims,
            alpha: scalars[0],
            gamma: scalars[1],
            tau: scalars[2],
            lr_actor: scalars[3],
            lr_critic: scalars[4],
            q_count,
            init_seed,
        };
        let mut core = SacCore::new(config).map_err(|e| e.to_string())?;

        for slot in [
            &mut core.policy,
            &mut core.q1,
            &mut core.q2,
            &mut core.q1_target,
            &mut core.q2_target,
        ] {
            let net = MlpParameters::read_from(r)?;
            if net.layer_dims() != slot.layer_dims() {
                return Err(format!(
                    "network shape {:?} does not match the declared config {:?}",
                    net.layer_dims(),
                    slot.layer_dims()
                ));
            }
            *slot = net;
        }
        core.policy_opt = read_adam(r, &core.policy).map_err(|e| e.to_string())?;
        core.q1_opt = read_adam(r, &core.q1).map_err(|e| e.to_string())?;
        core.q2_opt = read_adam(r, &core.q2).map_err(|e| e.to_string())?;

        let env_rng = read_snapshot(r).map_err(|e| e.to_string())?;
        let policy_rng = read_snapshot(r).map_err(|e| e.to_string())?;
        let buffer_rng = read_snapshot(r).map_err(|e| e.to_string())?;
        let eval_rng = read_snapshot(r).map_err(|e| e.to_string())?;

        Ok(TrainCheckpoint {
            core,
            env_step,
            env_rng,
            policy_rng,
            buffer_rng,
            eval_rng,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let checkpoint = Self::read_from(&mut r).map_err(|reason| Error::format(path, reason))?;
        let mut probe = [0u8; 1];
        match r.read(&mut probe) {
            Ok(0) => Ok(checkpoint),
            Ok(_) => Err(Error::format(path, "trailing bytes after checkpoint")),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}
