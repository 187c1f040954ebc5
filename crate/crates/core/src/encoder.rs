//! The fixed random encoder.
//!
//! Two branches read the same input `v ∈ ℝ^{mn}`:
//!
//! * the sparse gating branch sums `fan_in` randomly chosen inputs per hidden
//!   unit, subtracts `C` times the mean over all units (global inhibition) and
//!   rectifies;
//! * the Fourier branch computes `√(2/B)·cos(Rᵀv + b)` with `R ~ γ·N(0,1)` and
//!   `b ~ U[0, 2π)`, whose inner products approximate `exp(-γ²‖x−y‖²/2)`.
//!
//! The concatenation is squashed with `tanh`. Nothing here is trainable.
//!
//! The gate sum is used as is; it is not divided by `fan_in` before centering.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};
use crate::numerics::{
    sample_normal_matrix, sample_sparse_binary, sample_uniform_vector, Matrix, RngState, PRNG_ID,
};

/// Which hidden representations feed the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branches {
    #[default]
    Both,
    AlMbOnly,
    FourierOnly,
}

impl Branches {
    pub fn label(self) -> &'static str {
        match self {
            Branches::Both => "full",
            Branches::AlMbOnly => "al-mb",
            Branches::FourierOnly => "rff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub fan_in: usize,
    pub inhibition_strength: f64,
    pub kernel_scale: f64,
    pub seed: u64,
    #[serde(default)]
    pub branches: Branches,
}

impl EncoderConfig {
    pub const DEFAULT_FAN_IN: usize = 7;

    /// Defaults: fan-in 7 (lowered to `input_dim − 1` for tiny inputs),
    /// inhibition strength 1, kernel scale 1, both branches.
    pub fn new(input_dim: usize, hidden_width: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_width,
            fan_in: Self::DEFAULT_FAN_IN.min(input_dim.saturating_sub(1)).max(1),
            inhibition_strength: 1.0,
            kernel_scale: 1.0,
            seed,
            branches: Branches::Both,
        }
    }

    pub fn with_branches(mut self, branches: Branches) -> Self {
        self.branches = branches;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.fan_in == 0 || self.fan_in >= self.input_dim {
            return bad(format!(
                "fan_in must satisfy 1 <= fan_in < input_dim ({} vs {})",
                self.fan_in, self.input_dim
            ));
        }
        if self.hidden_width == 0 {
            return bad("hidden_width must be at least 1".into());
        }
        if !(self.inhibition_strength > 0.0 && self.inhibition_strength.is_finite()) {
            return bad(format!("inhibition_strength must be > 0, got {}", self.inhibition_strength));
        }
        if !(self.kernel_scale > 0.0 && self.kernel_scale.is_finite()) {
            return bad(format!("kernel_scale must be > 0, got {}", self.kernel_scale));
        }
        Ok(())
    }

    /// Length of the representation handed to the decoder.
    pub fn output_dim(&self) -> usize {
        match self.branches {
            Branches::Both => 2 * self.hidden_width,
            Branches::AlMbOnly | Branches::FourierOnly => self.hidden_width,
        }
    }
}

/// Seed-only serialized form. Reconstruction re-samples and checks the gate digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderDescriptor {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub fan_in: usize,
    pub inhibition_strength: f64,
    pub kernel_scale: f64,
    pub seed: u64,
    pub prng_id: String,
    #[serde(default)]
    pub branches: Branches,
    pub gate_checksum: String,
}

/// Partial pre-activations of one input block; blocks of a concatenated input add up.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub gated: Vec<f64>,
    pub fourier: Vec<f64>,
}

impl Projection {
    pub fn zeros(width: usize) -> Self {
        Self {
            gated: vec![0.0; width],
            fourier: vec![0.0; width],
        }
    }

    pub fn accumulate(&mut self, other: &Projection) {
        for (a, b) in self.gated.iter_mut().zip(&other.gated) {
            *a += b;
        }
        for (a, b) in self.fourier.iter_mut().zip(&other.fourier) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwfnEncoder {
    config: EncoderConfig,
    gate: Matrix,
    /// Row indices of the ones in each gate column.
    gate_rows: Vec<Vec<usize>>,
    fourier: Matrix,
    phase: Vec<f64>,
}

/// Draws gate, Fourier matrix and phase, in that order, from one stream seeded by `config.seed`.
pub fn build_encoder(config: EncoderConfig) -> Result<RwfnEncoder> {
    config.validate()?;
    let mut rng = RngState::new(config.seed);
    let gate = sample_sparse_binary(config.input_dim, config.hidden_width, config.fan_in, &mut rng)?;
    let mut fourier = sample_normal_matrix(config.input_dim, config.hidden_width, &mut rng);
    if config.kernel_scale != 1.0 {
        for w in fourier.as_mut_slice() {
            *w *= config.kernel_scale;
        }
    }
    let phase = sample_uniform_vector(config.hidden_width, 0.0, 2.0 * PI, &mut rng)?;
    RwfnEncoder::from_parts(config, gate, fourier, phase)
}

impl RwfnEncoder {
    /// Assembles an encoder from explicit blocks. The gate must be 0/1 with
    /// `fan_in` ones per column; the phase must lie in `[0, 2π)`.
    pub fn from_parts(config: EncoderConfig, gate: Matrix, fourier: Matrix, phase: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let (n, b) = (config.input_dim, config.hidden_width);
        for m in [&gate, &fourier] {
            if m.rows() != n || m.cols() != b {
                return Err(Error::InvalidArgument(format!(
                    "encoder block is {}x{}, expected {n}x{b}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        check_len(b, phase.len())?;
        if phase.iter().any(|p| !(0.0..2.0 * PI).contains(p)) {
            return Err(Error::InvalidArgument("phase entries must lie in [0, 2π)".into()));
        }
        let mut gate_rows = vec![Vec::with_capacity(config.fan_in); b];
        for r in 0..n {
            for (c, &w) in gate.row(r).iter().enumerate() {
                if w == 1.0 {
                    gate_rows[c].push(r);
                } else if w != 0.0 {
                    return Err(Error::InvalidArgument("gate entries must be 0 or 1".into()));
                }
            }
        }
        if gate_rows.iter().any(|rows| rows.len() != config.fan_in) {
            return Err(Error::InvalidArgument(format!(
                "every gate column must hold exactly {} ones",
                config.fan_in
            )));
        }
        Ok(Self {
            config,
            gate,
            gate_rows,
            fourier,
            phase,
        })
    }

    pub fn from_descriptor(desc: &EncoderDescriptor) -> Result<Self> {
        if desc.prng_id != PRNG_ID {
            return Err(Error::Model(format!(
                "encoder was sampled with `{}`, this build uses `{PRNG_ID}`",
                desc.prng_id
            )));
        }
        let enc = build_encoder(EncoderConfig {
            input_dim: desc.input_dim,
            hidden_width: desc.hidden_width,
            fan_in: desc.fan_in,
            inhibition_strength: desc.inhibition_strength,
            kernel_scale: desc.kernel_scale,
            seed: desc.seed,
            branches: desc.branches,
        })?;
        let checksum = enc.gate_checksum();
        if checksum != desc.gate_checksum {
            return Err(Error::Model(format!(
                "gate checksum mismatch: file has {}, rebuilt encoder has {checksum}",
                desc.gate_checksum
            )));
        }
        Ok(enc)
    }

    pub fn descriptor(&self) -> EncoderDescriptor {
        let c = &self.config;
        EncoderDescriptor {
            input_dim: c.input_dim,
            hidden_width: c.hidden_width,
            fan_in: c.fan_in,
            inhibition_strength: c.inhibition_strength,
            kernel_scale: c.kernel_scale,
            seed: c.seed,
            prng_id: PRNG_ID.to_string(),
            branches: c.branches,
            gate_checksum: self.gate_checksum(),
        }
    }

    /// SHA-256 over the gate entries as little-endian f64, row-major.
    pub fn gate_checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for w in self.gate.as_slice() {
            hasher.update(w.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn hidden_width(&self) -> usize {
        self.config.hidden_width
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim()
    }

    pub fn gate(&self) -> &Matrix {
        &self.gate
    }

    pub fn fourier(&self) -> &Matrix {
        &self.fourier
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Floats held by the encoder blocks the configured branches use.
    pub fn stored_floats(&self) -> usize {
        let (n, b) = (self.config.input_dim, self.config.hidden_width);
        match self.config.branches {
            Branches::Both => 2 * n * b + b,
            Branches::AlMbOnly => n * b,
            Branches::FourierOnly => n * b + b,
        }
    }

    /// Pre-activations contributed by `block`, which occupies inputs
    /// `offset..offset + block.len()` of the full input.
    pub fn project(&self, block: &[f64], offset: usize) -> Result<Projection> {
        if offset + block.len() > self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                got: offset + block.len(),
            });
        }
        let end = offset + block.len();
        let gated = self
            .gate_rows
            .iter()
            .map(|rows| {
                rows.iter()
                    .filter(|&&r| r >= offset && r < end)
                    .map(|&r| block[r - offset])
                    .sum()
            })
            .collect();
        let mut fourier = vec![0.0; self.config.hidden_width];
        for (i, &x) in block.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (acc, &w) in fourier.iter_mut().zip(self.fourier.row(offset + i)) {
                *acc += w * x;
            }
        }
        Ok(Projection { gated, fourier })
    }

    fn gated_from_sums(&self, sums: &[f64]) -> Vec<f64> {
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        let c = self.config.inhibition_strength;
        sums.iter().map(|&s| (s - c * mean).max(0.0)).collect()
    }

    fn fourier_from_sums(&self, sums: &[f64]) -> Vec<f64> {
        let scale = (2.0 / self.config.hidden_width as f64).sqrt();
        sums.iter()
            .zip(&self.phase)
            .map(|(&s, &p)| scale * (s + p).cos())
            .collect()
    }

    /// Finishes a full-input projection into the decoder representation.
    pub fn finish(&self, proj: &Projection) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.output_dim());
        if self.config.branches != Branches::FourierOnly {
            h.extend(self.gated_from_sums(&proj.gated));
        }
        if self.config.branches != Branches::AlMbOnly {
            h.extend(self.fourier_from_sums(&proj.fourier));
        }
        for x in &mut h {
            *x = x.tanh();
        }
        h
    }

    /// Gated sums `gateᵀ v` before inhibition.
    pub fn gate_sums(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.config.input_dim, v.len())?;
        Ok(self.project(v, 0)?.gated)
    }

    /// Sparse branch `h₁`: rectified, globally inhibited gate sums.
    pub fn albm_features(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.gated_from_sums(&self.gate_sums(v)?))
    }

    /// Fourier branch `h₂ = √(2/B)·cos(Rᵀv + b)`.
    pub fn fourier_features(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.config.input_dim, v.len())?;
        let sums = self.fourier.matvec_transposed(v)?;
        Ok(self.fourier_from_sums(&sums))
    }

    /// `tanh` of the concatenated branch outputs.
    pub fn encode(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.config.input_dim, v.len())?;
        Ok(self.finish(&self.project(v, 0)?))
    }

    /// `z(x)ᵀ z(y)`, the random-feature estimate of the Gaussian kernel.
    pub fn kernel_estimate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let zx = self.fourier_features(x)?;
        let zy = self.fourier_features(y)?;
        Ok(crate::numerics::dot(&zx, &zy))
    }
}

/// True when every coordinate lies in `[0, 1]`, the range the unit-bandwidth kernel expects.
pub fn in_unit_range(v: &[f64]) -> bool {
    v.iter().all(|x| (0.0..=1.0).contains(x))
}
