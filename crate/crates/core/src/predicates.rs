//! Predicate groundings `ℝ^{mn} → (0, 1)`.
//!
//! [`RwfnPredicate`] puts a linear decoder `β` on top of a frozen
//! [`RwfnEncoder`]; [`NtnPredicate`] is the bilinear tensor model
//! `σ(uᵀ tanh(vᵀW^{[1:k]}v + Vv + b))` with every parameter trainable.
//!
//! Both models can be evaluated either on a raw input vector or on a
//! *prepared* input ([`PredicateModel::prepare`]): the encoded representation
//! for RWFN, the raw vector for NTN. The trainer prepares every atom once.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderDescriptor, RwfnEncoder};
use crate::error::{check_len, Error, Result};
use crate::numerics::{dot, sigmoid, Matrix, RngState};
use crate::training::SharedEncoderRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub total: usize,
    pub learnable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwfnPredicate {
    encoder: Arc<RwfnEncoder>,
    beta: Vec<f64>,
}

impl RwfnPredicate {
    /// Decoder initialized to zero, so the fresh predicate outputs 0.5 everywhere.
    pub fn new(encoder: Arc<RwfnEncoder>) -> Self {
        let beta = vec![0.0; encoder.output_dim()];
        Self { encoder, beta }
    }

    pub fn with_beta(encoder: Arc<RwfnEncoder>, beta: Vec<f64>) -> Result<Self> {
        check_len(encoder.output_dim(), beta.len())?;
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite decoder weight".into()));
        }
        Ok(Self { encoder, beta })
    }

    pub fn encoder(&self) -> &Arc<RwfnEncoder> {
        &self.encoder
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_mut(&mut self) -> &mut [f64] {
        &mut self.beta
    }

    /// `σ(βᵀ h)` for an already encoded `h`.
    pub fn forward_encoded(&self, h: &[f64]) -> f64 {
        sigmoid(dot(&self.beta, h))
    }

    pub fn forward(&self, v: &[f64]) -> Result<f64> {
        Ok(self.forward_encoded(&self.encoder.encode(v)?))
    }

    /// `upstream · σ'(βᵀh) · h`; the encoder gets nothing.
    pub fn gradient(&self, v: &[f64], upstream: f64) -> Result<Vec<f64>> {
        let h = self.encoder.encode(v)?;
        let mut grad = vec![0.0; h.len()];
        self.accumulate_gradient_encoded(&h, upstream, &mut grad);
        Ok(grad)
    }

    pub fn accumulate_gradient_encoded(&self, h: &[f64], upstream: f64, grad: &mut [f64]) {
        let s = self.forward_encoded(h);
        let scale = upstream * s * (1.0 - s);
        if scale == 0.0 {
            return;
        }
        for (g, &x) in grad.iter_mut().zip(h) {
            *g += scale * x;
        }
    }

    pub fn count_params(&self) -> ParamCount {
        ParamCount {
            total: self.encoder.stored_floats() + self.beta.len(),
            learnable: self.beta.len(),
        }
    }
}

/// Gradient of an [`NtnPredicate`], laid out like its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NtnGradient {
    pub u: Vec<f64>,
    /// `k` slices of `in_dim × in_dim`, row-major, concatenated.
    pub w: Vec<f64>,
    /// `k × in_dim`, row-major.
    pub v: Vec<f64>,
    pub b: Vec<f64>,
}

impl NtnGradient {
    pub fn zeros(slices: usize, in_dim: usize) -> Self {
        Self {
            u: vec![0.0; slices],
            w: vec![0.0; slices * in_dim * in_dim],
            v: vec![0.0; slices * in_dim],
            b: vec![0.0; slices],
        }
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        vec![self.u, self.w, self.v, self.b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NtnPredicate {
    slices: usize,
    in_dim: usize,
    u: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    b: Vec<f64>,
}

/// Every parameter drawn from `N(0, 1/√in_dim)` in the order u, W, V, b.
pub fn init_ntn(slices: usize, in_dim: usize, rng: &mut RngState) -> Result<NtnPredicate> {
    if slices == 0 || in_dim == 0 {
        return Err(Error::InvalidArgument("NTN needs k >= 1 and in_dim >= 1".into()));
    }
    let std = 1.0 / (in_dim as f64).sqrt();
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| std * rng.normal()).collect() };
    let u = draw(slices);
    let w = draw(slices * in_dim * in_dim);
    let v = draw(slices * in_dim);
    let b = draw(slices);
    Ok(NtnPredicate {
        slices,
        in_dim,
        u,
        w,
        v,
        b,
    })
}

impl NtnPredicate {
    pub fn zeros(slices: usize, in_dim: usize) -> Self {
        let g = NtnGradient::zeros(slices, in_dim);
        Self {
            slices,
            in_dim,
            u: g.u,
            w: g.w,
            v: g.v,
            b: g.b,
        }
    }

    /// Builds a model from explicit parameters: `w` holds one matrix per slice.
    pub fn from_parts(u: Vec<f64>, w: &[Matrix], v: &Matrix, b: Vec<f64>) -> Result<Self> {
        let slices = u.len();
        let in_dim = v.cols();
        if slices == 0 || in_dim == 0 {
            return Err(Error::InvalidArgument("NTN needs k >= 1 and in_dim >= 1".into()));
        }
        check_len(slices, w.len())?;
        check_len(slices, v.rows())?;
        check_len(slices, b.len())?;
        let mut flat = Vec::with_capacity(slices * in_dim * in_dim);
        for m in w {
            if m.rows() != in_dim || m.cols() != in_dim {
                return Err(Error::DimensionMismatch {
                    expected: in_dim,
                    got: m.rows().max(m.cols()),
                });
            }
            flat.extend_from_slice(m.as_slice());
        }
        let all = u.iter().chain(&flat).chain(v.as_slice()).chain(&b);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite NTN parameter".into()));
        }
        Ok(Self {
            slices,
            in_dim,
            u,
            w: flat,
            v: v.as_slice().to_vec(),
            b,
        })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn w_slice(&self, i: usize) -> &[f64] {
        let nn = self.in_dim * self.in_dim;
        &self.w[i * nn..(i + 1) * nn]
    }

    pub fn v_matrix(&self) -> Matrix {
        Matrix::new(self.slices, self.in_dim, self.v.clone()).expect("shape checked at construction")
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub(crate) fn blocks(&self) -> [&[f64]; 4] {
        [&self.u, &self.w, &self.v, &self.b]
    }

    pub(crate) fn blocks_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.u, &mut self.w, &mut self.v, &mut self.b]
    }

    /// Slice pre-activations `s_i = vᵀW_i v + (Vv)_i + b_i`.
    fn preactivations(&self, x: &[f64]) -> Vec<f64> {
        let n = self.in_dim;
        (0..self.slices)
            .map(|i| {
                let w = self.w_slice(i);
                let quad: f64 = (0..n)
                    .filter(|&r| x[r] != 0.0)
                    .map(|r| x[r] * dot(&w[r * n..(r + 1) * n], x))
                    .sum();
                quad + dot(&self.v[i * n..(i + 1) * n], x) + self.b[i]
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_len(self.in_dim, x.len())?;
        Ok(self.forward_unchecked(x))
    }

    fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let z: f64 = self
            .preactivations(x)
            .iter()
            .zip(&self.u)
            .map(|(s, u)| u * s.tanh())
            .sum();
        sigmoid(z)
    }

    pub fn gradient(&self, x: &[f64], upstream: f64) -> Result<NtnGradient> {
        check_len(self.in_dim, x.len())?;
        let mut g = NtnGradient::zeros(self.slices, self.in_dim);
        self.accumulate_gradient(x, upstream, &mut g);
        Ok(g)
    }

    /// Adds `upstream · ∂σ(·)/∂θ` at input `x` into `g`.
    pub fn accumulate_gradient(&self, x: &[f64], upstream: f64, g: &mut NtnGradient) {
        self.accumulate_into(x, upstream, [&mut g.u, &mut g.w, &mut g.v, &mut g.b]);
    }

    fn accumulate_into(&self, x: &[f64], upstream: f64, g: [&mut [f64]; 4]) {
        let [gu, gw_all, gv_all, gb] = g;
        let n = self.in_dim;
        let t: Vec<f64> = self.preactivations(x).iter().map(|s| s.tanh()).collect();
        let out = sigmoid(dot(&self.u, &t));
        let dz = upstream * out * (1.0 - out);
        if dz == 0.0 {
            return;
        }
        for i in 0..self.slices {
            gu[i] += dz * t[i];
            let ds = dz * self.u[i] * (1.0 - t[i] * t[i]);
            gb[i] += ds;
            if ds == 0.0 {
                continue;
            }
            for (gv, &xc) in gv_all[i * n..(i + 1) * n].iter_mut().zip(x) {
                *gv += ds * xc;
            }
            let gw = &mut gw_all[i * n * n..(i + 1) * n * n];
            for (r, &xr) in x.iter().enumerate() {
                let coeff = ds * xr;
                if coeff == 0.0 {
                    continue;
                }
                for (gwc, &xc) in gw[r * n..(r + 1) * n].iter_mut().zip(x) {
                    *gwc += coeff * xc;
                }
            }
        }
    }

    pub fn count_params(&self) -> ParamCount {
        let n = self.in_dim;
        let count = (n * n + n + 2) * self.slices;
        ParamCount {
            total: count,
            learnable: count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredicateModel {
    Rwfn(RwfnPredicate),
    Ntn(NtnPredicate),
}

impl PredicateModel {
    pub fn input_dim(&self) -> usize {
        match self {
            PredicateModel::Rwfn(p) => p.encoder.input_dim(),
            PredicateModel::Ntn(p) => p.in_dim,
        }
    }

    pub fn forward(&self, v: &[f64]) -> Result<f64> {
        match self {
            PredicateModel::Rwfn(p) => p.forward(v),
            PredicateModel::Ntn(p) => p.forward(v),
        }
    }

    pub fn count_params(&self) -> ParamCount {
        match self {
            PredicateModel::Rwfn(p) => p.count_params(),
            PredicateModel::Ntn(p) => p.count_params(),
        }
    }

    /// The RWFN encoder, if any.
    pub fn encoder(&self) -> Option<&Arc<RwfnEncoder>> {
        match self {
            PredicateModel::Rwfn(p) => Some(&p.encoder),
            PredicateModel::Ntn(_) => None,
        }
    }

    /// Input as consumed by [`Self::forward_prepared`]: the encoding for RWFN,
    /// the vector itself for NTN.
    pub fn prepare(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            PredicateModel::Rwfn(p) => p.encoder.encode(v),
            PredicateModel::Ntn(p) => {
                check_len(p.in_dim, v.len())?;
                Ok(v.to_vec())
            }
        }
    }

    pub fn forward_prepared(&self, x: &[f64]) -> f64 {
        match self {
            PredicateModel::Rwfn(p) => p.forward_encoded(x),
            PredicateModel::Ntn(p) => p.forward_unchecked(x),
        }
    }

    /// Adds `upstream · ∂out/∂θ` at prepared input `x` into blocks shaped
    /// like [`Self::zero_gradient`].
    pub fn accumulate_gradient_prepared(&self, x: &[f64], upstream: f64, grad: &mut [Vec<f64>]) {
        match self {
            PredicateModel::Rwfn(p) => p.accumulate_gradient_encoded(x, upstream, &mut grad[0]),
            PredicateModel::Ntn(p) => {
                let [u, w, v, b] = grad else {
                    panic!("NTN gradient needs four blocks");
                };
                p.accumulate_into(x, upstream, [u, w, v, b]);
            }
        }
    }

    pub fn zero_gradient(&self) -> Vec<Vec<f64>> {
        match self {
            PredicateModel::Rwfn(p) => vec![vec![0.0; p.beta.len()]],
            PredicateModel::Ntn(p) => NtnGradient::zeros(p.slices, p.in_dim).into_blocks(),
        }
    }

    /// Learnable parameter blocks, in the same order as [`Self::zero_gradient`].
    pub fn param_blocks(&self) -> Vec<&[f64]> {
        match self {
            PredicateModel::Rwfn(p) => vec![&p.beta],
            PredicateModel::Ntn(p) => p.blocks().to_vec(),
        }
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            PredicateModel::Rwfn(p) => vec![&mut p.beta],
            PredicateModel::Ntn(p) => p.blocks_mut().into_iter().collect(),
        }
    }

    pub fn to_spec(&self) -> PredicateSpec {
        match self {
            PredicateModel::Rwfn(p) => PredicateSpec::Rwfn {
                encoder: p.encoder.descriptor(),
                beta: p.beta.clone(),
            },
            PredicateModel::Ntn(p) => PredicateSpec::Ntn {
                slices: p.slices,
                in_dim: p.in_dim,
                u: p.u.clone(),
                w: (0..p.slices)
                    .map(|i| Matrix::new(p.in_dim, p.in_dim, p.w_slice(i).to_vec()).expect("shape"))
                    .collect(),
                v: p.v_matrix(),
                b: p.b.clone(),
            },
        }
    }

    /// Rebuilds a model; RWFN encoders come from `registry`, so predicates that
    /// were saved with one shared encoder share it again.
    pub fn from_spec(spec: &PredicateSpec, registry: &mut SharedEncoderRegistry) -> Result<Self> {
        match spec {
            PredicateSpec::Rwfn { encoder, beta } => {
                let enc = registry.get_or_load(encoder)?;
                Ok(PredicateModel::Rwfn(RwfnPredicate::with_beta(enc, beta.clone())?))
            }
            PredicateSpec::Ntn {
                slices,
                in_dim,
                u,
                w,
                v,
                b,
            } => {
                let p = NtnPredicate::from_parts(u.clone(), w, v, b.clone())?;
                if p.slices != *slices || p.in_dim != *in_dim {
                    return Err(Error::Model("NTN dims disagree with parameter arrays".into()));
                }
                Ok(PredicateModel::Ntn(p))
            }
        }
    }
}

/// Serialized predicate grounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PredicateSpec {
    Rwfn {
        encoder: EncoderDescriptor,
        beta: Vec<f64>,
    },
    Ntn {
        slices: usize,
        in_dim: usize,
        u: Vec<f64>,
        w: Vec<Matrix>,
        v: Matrix,
        b: Vec<f64>,
    },
}

/// Learnable-parameter count of an NTN grounding without building one.
pub fn ntn_param_count(in_dim: usize, slices: usize) -> ParamCount {
    let c = (in_dim * in_dim + in_dim + 2) * slices;
    ParamCount {
        total: c,
        learnable: c,
    }
}

/// Parameter count of a full two-branch RWFN grounding.
pub fn rwfn_param_count(in_dim: usize, hidden_width: usize) -> ParamCount {
    ParamCount {
        total: (2 * in_dim + 3) * hidden_width,
        learnable: 2 * hidden_width,
    }
}

/// Floats stored by `classifiers` RWFN groundings over one input size, with
/// one shared encoder or one encoder each.
pub fn rwfn_storage_floats(in_dim: usize, hidden_width: usize, classifiers: usize, shared: bool) -> usize {
    let (n, b, i) = (in_dim, hidden_width, classifiers);
    if shared {
        2 * n * b + b + 2 * b * i
    } else {
        (2 * n + 3) * b * i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_encoder, EncoderConfig};

    fn rwfn(input_dim: usize, width: usize, seed: u64) -> RwfnPredicate {
        RwfnPredicate::new(Arc::new(build_encoder(EncoderConfig::new(input_dim, width, seed)).unwrap()))
    }

    fn point(rng: &mut RngState, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform()).collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn zero_decoder_outputs_one_half() {
        let p = rwfn(8, 16, 1);
        let mut rng = RngState::new(2);
        for _ in 0..5 {
            assert_eq!(p.forward(&point(&mut rng, 8)).unwrap(), 0.5);
        }
    }

    #[test]
    fn large_aligned_decoder_saturates_towards_one() {
        let mut p = rwfn(8, 16, 1);
        let v = vec![0.4; 8];
        let h = p.encoder().encode(&v).unwrap();
        let beta: Vec<f64> = h.iter().map(|x| x * 1e6).collect();
        p.beta_mut().copy_from_slice(&beta);
        let out = p.forward(&v).unwrap();
        assert!(out > 1.0 - 1e-9 && out <= 1.0);
    }

    #[test]
    fn rwfn_gradient_special_cases() {
        let p = rwfn(8, 16, 3);
        let v = vec![0.2; 8];
        let h = p.encoder().encode(&v).unwrap();
        let g = p.gradient(&v, 1.0).unwrap();
        for (gi, hi) in g.iter().zip(&h) {
            assert_eq!(*gi, 0.25 * hi);
        }
        assert!(p.gradient(&v, 0.0).unwrap().iter().all(|&x| x == 0.0));
        assert!(p.forward(&[0.0; 7]).is_err());
        assert!(p.gradient(&[0.0; 9], 1.0).is_err());
    }

    #[test]
    fn rwfn_gradient_matches_finite_differences() {
        let mut rng = RngState::new(17);
        let step = 1e-5;
        for trial in 0..20 {
            let mut p = rwfn(8, 12, trial);
            let beta: Vec<f64> = (0..24).map(|_| rng.normal()).collect();
            p.beta_mut().copy_from_slice(&beta);
            let v = point(&mut rng, 8);
            let g = p.gradient(&v, 1.0).unwrap();
            for j in 0..24 {
                let mut plus = p.clone();
                plus.beta_mut()[j] += step;
                let mut minus = p.clone();
                minus.beta_mut()[j] -= step;
                let fd = (plus.forward(&v).unwrap() - minus.forward(&v).unwrap()) / (2.0 * step);
                assert!(rel_err(g[j], fd) < 1e-4, "trial {trial} coord {j}: {} vs {fd}", g[j]);
            }
        }
    }

    #[test]
    fn ntn_forward_examples() {
        let zero = NtnPredicate::zeros(3, 4);
        assert_eq!(zero.forward(&[0.3, 0.1, 0.9, 0.5]).unwrap(), 0.5);

        let mut rng = RngState::new(0);
        let mut p = init_ntn(3, 4, &mut rng).unwrap();
        p.u = vec![0.0; 3];
        assert_eq!(p.forward(&[0.3, 0.1, 0.9, 0.5]).unwrap(), 0.5);

        let v = Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let p = NtnPredicate::from_parts(vec![1.0], &[Matrix::zeros(3, 3)], &v, vec![0.0]).unwrap();
        let expected = 1.0 / (1.0 + (-(1.0f64).tanh()).exp());
        let got = p.forward(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(got, expected);
        assert!((got - 0.681_699_742).abs() < 1e-9);
        assert!(p.forward(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn ntn_gradient_matches_finite_differences() {
        let mut rng = RngState::new(99);
        let step = 1e-5;
        for trial in 0..20 {
            let mut p = init_ntn(3, 8, &mut rng).unwrap();
            // scale up so slices leave the linear regime of tanh
            for block in p.blocks_mut() {
                for x in block.iter_mut() {
                    *x *= 2.0;
                }
            }
            let x = point(&mut rng, 8);
            let g = p.gradient(&x, 1.0).unwrap().into_blocks();
            for (bi, block) in g.iter().enumerate() {
                for j in 0..block.len() {
                    let mut plus = p.clone();
                    plus.blocks_mut()[bi][j] += step;
                    let mut minus = p.clone();
                    minus.blocks_mut()[bi][j] -= step;
                    let fd = (plus.forward(&x).unwrap() - minus.forward(&x).unwrap()) / (2.0 * step);
                    let abs_ok = (block[j] - fd).abs() < 1e-10;
                    assert!(
                        abs_ok || rel_err(block[j], fd) < 1e-4,
                        "trial {trial} block {bi} idx {j}: {} vs {fd}",
                        block[j]
                    );
                }
            }
        }
    }

    #[test]
    fn ntn_gradient_special_cases() {
        let mut rng = RngState::new(5);
        let p = init_ntn(3, 8, &mut rng).unwrap();
        let x = point(&mut rng, 8);
        let g = p.gradient(&x, 0.0).unwrap();
        assert!(g.into_blocks().iter().flatten().all(|&v| v == 0.0));
        let g0 = p.gradient(&[0.0; 8], 1.0).unwrap();
        assert!(g0.w.iter().chain(&g0.v).all(|&v| v == 0.0));
        assert!(g0.b.iter().any(|&v| v != 0.0));
        assert!(g0.u.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn init_ntn_is_deterministic_with_expected_scale() {
        let a = init_ntn(6, 64, &mut RngState::new(8)).unwrap();
        let b = init_ntn(6, 64, &mut RngState::new(8)).unwrap();
        assert_eq!(a, b);
        let n = a.w.len() as f64;
        let mean = a.w.iter().sum::<f64>() / n;
        let std = (a.w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(std > 0.1 && std < 0.15, "std {std}");
        assert!(init_ntn(0, 4, &mut RngState::new(0)).is_err());
    }

    #[test]
    fn fresh_ntn_does_not_saturate() {
        for seed in 0..100 {
            let mut rng = RngState::new(seed);
            let p = init_ntn(6, 64, &mut rng).unwrap();
            let x = point(&mut rng, 64);
            let out = p.forward(&x).unwrap();
            assert!(out > 0.01 && out < 0.99, "seed {seed}: {out}");
        }
    }

    #[test]
    fn parameter_counts() {
        let ntn = NtnPredicate::zeros(6, 64);
        assert_eq!(ntn.count_params(), ParamCount { total: 24972, learnable: 24972 });
        assert_eq!(ntn_param_count(64, 6), ntn.count_params());
        let r = rwfn(64, 200, 0);
        assert_eq!(r.count_params(), ParamCount { total: 26200, learnable: 400 });
        assert_eq!(rwfn(128, 400, 0).count_params(), ParamCount { total: 103600, learnable: 800 });
        assert_eq!(rwfn_param_count(128, 400), ParamCount { total: 103600, learnable: 800 });
    }

    #[test]
    fn shared_and_private_encoders_agree_bitwise() {
        let shared = Arc::new(build_encoder(EncoderConfig::new(10, 20, 4)).unwrap());
        let mut rng = RngState::new(6);
        let beta: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
        let a = RwfnPredicate::with_beta(shared.clone(), beta.clone()).unwrap();
        let b = RwfnPredicate::with_beta(shared, beta.clone()).unwrap();
        let private = RwfnPredicate::with_beta(
            Arc::new(build_encoder(EncoderConfig::new(10, 20, 4)).unwrap()),
            beta,
        )
        .unwrap();
        let v = point(&mut rng, 10);
        let out = a.forward(&v).unwrap();
        assert_eq!(out.to_bits(), b.forward(&v).unwrap().to_bits());
        assert_eq!(out.to_bits(), private.forward(&v).unwrap().to_bits());
    }

    #[test]
    fn spec_round_trip_preserves_models() {
        let mut registry = SharedEncoderRegistry::default();
        let mut rng = RngState::new(3);
        let ntn = PredicateModel::Ntn(init_ntn(2, 5, &mut rng).unwrap());
        let json = serde_json::to_string(&ntn.to_spec()).unwrap();
        let back = PredicateModel::from_spec(&serde_json::from_str(&json).unwrap(), &mut registry).unwrap();
        assert_eq!(back, ntn);

        let mut r = rwfn(6, 8, 12);
        r.beta_mut()[3] = 0.75;
        let model = PredicateModel::Rwfn(r);
        let json = serde_json::to_string(&model.to_spec()).unwrap();
        let back = PredicateModel::from_spec(&serde_json::from_str(&json).unwrap(), &mut registry).unwrap();
        assert_eq!(back, model);
    }
}
