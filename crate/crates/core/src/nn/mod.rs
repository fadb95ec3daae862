//! Minimal dense-network engine: weights, forward/backward passes, Adam, and
//! polyak averaging, all in f64.
//!
//! Layers are fully connected with relu on every hidden layer and a linear
//! output. Weights are stored row-major per layer, shape (out_dim, in_dim),
//! and the flat parameter order (layer 0 weights, layer 0 biases, layer 1
//! weights, ...) is part of the public contract: gradient bundles, Adam
//! moments, and checkpoints all follow it.

mod adam;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::wire;

const PARAMS_MAGIC: &[u8; 4] = b"MLP0";
const PARAMS_VERSION: u32 = 1;
/// Upper bound on a single layer width accepted when reading checkpoints;
/// guards against allocating garbage sizes from corrupt files.
const MAX_LAYER_DIM: u64 = 1 << 24;

/// Fully-connected network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    layer_dims: Vec<usize>,
    /// Row-major (out_dim x in_dim), one flat vector per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Intermediate values captured by a forward pass, needed for backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    /// Pre-activation z per layer.
    pre: Vec<Vec<f64>>,
    /// Post-activation per layer (relu(z) on hidden layers, z on the output).
    act: Vec<Vec<f64>>,
}

impl ForwardCache {
    /// Pre-activation values per layer, outermost first. Diagnostics such as
    /// finite-difference probes use these to stay clear of the relu kinks.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

/// Parameter-shaped gradients (same layout as [`MlpParameters`]).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
}

impl MlpParameters {
    /// Uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with zero
    /// biases, deterministic for a fixed seed.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Config(format!(
                "a network needs at least input and output dims, got {layer_dims:?}"
            )));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!(
                "layer dims must be positive, got {layer_dims:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for win in layer_dims.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpParameters {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    fn layer_count(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn weight(&self, layer: usize, row: usize, col: usize) -> f64 {
        self.weights[layer][row * self.layer_dims[layer] + col]
    }

    pub fn bias(&self, layer: usize, row: usize) -> f64 {
        self.biases[layer][row]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Reads the parameter at `idx` in flat order. Intended for tests and
    /// finite-difference probes, not hot paths.
    pub fn flat_get(&self, idx: usize) -> f64 {
        let (layer, in_weights, offset) = self.locate(idx);
        if in_weights {
            self.weights[layer][offset]
        } else {
            self.biases[layer][offset]
        }
    }

    pub fn flat_set(&mut self, idx: usize, value: f64) {
        let (layer, in_weights, offset) = self.locate(idx);
        if in_weights {
            self.weights[layer][offset] = value;
        } else {
            self.biases[layer][offset] = value;
        }
    }

    fn locate(&self, mut idx: usize) -> (usize, bool, usize) {
        for layer in 0..self.layer_count() {
            if idx < self.weights[layer].len() {
                return (layer, true, idx);
            }
            idx -= self.weights[layer].len();
            if idx < self.biases[layer].len() {
                return (layer, false, idx);
            }
            idx -= self.biases[layer].len();
        }
        panic!("flat parameter index out of range");
    }

    /// Forward pass. Returns the output and the cache required by
    /// [`MlpParameters::backward`].
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "forward input has {} values, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let layers = self.layer_count();
        let mut pre = Vec::with_capacity(layers);
        let mut act = Vec::with_capacity(layers);
        let mut current: &[f64] = input;
        for layer in 0..layers {
            let out_dim = self.layer_dims[layer + 1];
            let in_dim = self.layer_dims[layer];
            let mut z = vec![0.0; out_dim];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.weights[layer][o * in_dim..(o + 1) * in_dim];
                *zo = dot(row, current) + self.biases[layer][o];
            }
            let a = if layer + 1 == layers {
                z.clone()
            } else {
                z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
            };
            pre.push(z);
            act.push(a);
            current = act.last().unwrap();
        }
        let output = act.last().unwrap().clone();
        Ok((
            output,
            ForwardCache {
                input: input.to_vec(),
                pre,
                act,
            },
        ))
    }

    /// Backprop of `d(dot(output, output_grad))/d(params)`. Returns the
    /// gradients and the gradient with respect to the input vector.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
    ) -> Result<(GradientBundle, Vec<f64>)> {
        let mut grads = GradientBundle::zeros_like(self);
        let input_grad = self.backward_accumulate(cache, output_grad, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Like [`MlpParameters::backward`] but adds into an existing bundle,
    /// which avoids one allocation per batch element in the training loops.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        grads: &mut GradientBundle,
    ) -> Result<Vec<f64>> {
        self.check_cache(cache)?;
        if output_grad.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "output grad has {} values, network produces {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        if !grads.matches(self) {
            return Err(Error::Shape(
                "gradient bundle does not match network shape".into(),
            ));
        }

        let layers = self.layer_count();
        // Gradient with respect to the current layer's pre-activation.
        let mut dz = output_grad.to_vec();
        for layer in (0..layers).rev() {
            let in_dim = self.layer_dims[layer];
            let a_prev: &[f64] = if layer == 0 {
                &cache.input
            } else {
                &cache.act[layer - 1]
            };
            let dw = &mut grads.weights[layer];
            for (o, &dzo) in dz.iter().enumerate() {
                let row = &mut dw[o * in_dim..(o + 1) * in_dim];
                for (r, &a) in row.iter_mut().zip(a_prev) {
                    *r += dzo * a;
                }
                grads.biases[layer][o] += dzo;
            }
            let mut d_prev = vec![0.0; in_dim];
            for (o, &dzo) in dz.iter().enumerate() {
                let row = &self.weights[layer][o * in_dim..(o + 1) * in_dim];
                for (d, &w) in d_prev.iter_mut().zip(row) {
                    *d += dzo * w;
                }
            }
            if layer > 0 {
                // Relu gate: pass gradient only where the pre-activation was positive.
                for (d, &z) in d_prev.iter_mut().zip(&cache.pre[layer - 1]) {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            dz = d_prev;
        }
        Ok(dz)
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        let ok = cache.input.len() == self.input_dim()
            && cache.pre.len() == self.layer_count()
            && cache.act.len() == self.layer_count()
            && cache
                .pre
                .iter()
                .zip(self.layer_dims.iter().skip(1))
                .all(|(z, &d)| z.len() == d)
            && cache
                .act
                .iter()
                .zip(self.layer_dims.iter().skip(1))
                .all(|(a, &d)| a.len() == d);
        if ok {
            Ok(())
        } else {
            Err(Error::Input(
                "forward cache does not match this network".into(),
            ))
        }
    }

    /// Serializes magic, version, dims, then per-layer weights and biases.
    /// f64 bits are written verbatim, so the round-trip is exact.
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(PARAMS_MAGIC)?;
        wire::write_u32(w, PARAMS_VERSION)?;
        wire::write_u32(w, self.layer_dims.len() as u32)?;
        for &d in &self.layer_dims {
            wire::write_u64(w, d as u64)?;
        }
        for layer in 0..self.layer_count() {
            wire::write_f64_slice(w, &self.weights[layer])?;
            wire::write_f64_slice(w, &self.biases[layer])?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> std::result::Result<Self, String> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| e.to_string())?;
        if &magic != PARAMS_MAGIC {
            return Err("bad magic, not a network parameter block".into());
        }
        let version = wire::read_u32(r).map_err(|e| e.to_string())?;
        if version != PARAMS_VERSION {
            return Err(format!("unsupported parameter version {version}"));
        }
        let n_dims = wire::read_u32(r).map_err(|e| e.to_string())? as usize;
        if !(2..=64).contains(&n_dims) {
            return Err(format!("implausible layer count {n_dims}"));
        }
        let mut layer_dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            let d = wire::read_u64(r).map_err(|e| e.to_string())?;
            if d == 0 || d > MAX_LAYER_DIM {
                return Err(format!("implausible layer dim {d}"));
            }
            layer_dims.push(d as usize);
        }
        let mut weights = Vec::with_capacity(n_dims - 1);
        let mut biases = Vec::with_capacity(n_dims - 1);
        for win in layer_dims.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            weights.push(wire::read_f64_vec(r, fan_in * fan_out).map_err(|e| e.to_string())?);
            biases.push(wire::read_f64_vec(r, fan_out).map_err(|e| e.to_string())?);
        }
        Ok(MlpParameters {
            layer_dims,
            weights,
            biases,
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
        let params = Self::read_from(&mut r).map_err(|reason| Error::format(path, reason))?;
        let mut probe = [0u8; 1];
        match r.read(&mut probe) {
            Ok(0) => Ok(params),
            Ok(_) => Err(Error::format(path, "trailing bytes after parameter block")),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

impl GradientBundle {
    pub fn zeros_like(params: &MlpParameters) -> Self {
        GradientBundle {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub(crate) fn matches(&self, params: &MlpParameters) -> bool {
        self.weights.len() == params.weights.len()
            && self.biases.len() == params.biases.len()
            && self
                .weights
                .iter()
                .zip(&params.weights)
                .all(|(a, b)| a.len() == b.len())
            && self
                .biases
                .iter()
                .zip(&params.biases)
                .all(|(a, b)| a.len() == b.len())
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn flat_get(&self, mut idx: usize) -> f64 {
        for layer in 0..self.weights.len() {
            if idx < self.weights[layer].len() {
                return self.weights[layer][idx];
            }
            idx -= self.weights[layer].len();
            if idx < self.biases[layer].len() {
                return self.biases[layer][idx];
            }
            idx -= self.biases[layer].len();
        }
        panic!("flat gradient index out of range");
    }

    pub fn flat_set(&mut self, mut idx: usize, value: f64) {
        for layer in 0..self.weights.len() {
            if idx < self.weights[layer].len() {
                self.weights[layer][idx] = value;
                return;
            }
            idx -= self.weights[layer].len();
            if idx < self.biases[layer].len() {
                self.biases[layer][idx] = value;
                return;
            }
            idx -= self.biases[layer].len();
        }
        panic!("flat gradient index out of range");
    }

    /// Multiplies every entry, used to turn batch sums into means.
    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= factor;
            }
        }
    }

    pub(crate) fn all_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// target <- (1 - tau) * target + tau * online, elementwise.
pub fn polyak_update(target: &mut MlpParameters, online: &MlpParameters, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
    }
    if target.layer_dims != online.layer_dims {
        return Err(Error::Shape(format!(
            "polyak shapes differ: {:?} vs {:?}",
            target.layer_dims, online.layer_dims
        )));
    }
    for (tw, ow) in target.weights.iter_mut().zip(&online.weights) {
        for (t, &o) in tw.iter_mut().zip(ow) {
            *t = (1.0 - tau) * *t + tau * o;
        }
    }
    for (tb, ob) in target.biases.iter_mut().zip(&online.biases) {
        for (t, &o) in tb.iter_mut().zip(ob) {
            *t = (1.0 - tau) * *t + tau * o;
        }
    }
    Ok(())
}

/// Dot product with four independent accumulators; keeps the fp order fixed
/// while giving the cpu enough parallelism to stay busy.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n4 = a.len() & !3;
    let mut acc0 = 0.0;
    let mut acc1 = 0.0;
    let mut acc2 = 0.0;
    let mut acc3 = 0.0;
    for (ca, cb) in a[..n4].chunks_exact(4).zip(b[..n4].chunks_exact(4)) {
        acc0 += ca[0] * cb[0];
        acc1 += ca[1] * cb[1];
        acc2 += ca[2] * cb[2];
        acc3 += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a[n4..].iter().zip(&b[n4..]) {
        tail += x * y;
    }
    (acc0 + acc1) + (acc2 + acc3) + tail
}
