//! Dense matrices, small vector helpers and the deterministic random source.
//!
//! Every random quantity in the crate comes from [`RngState`]: ChaCha20 keyed
//! by a splitmix64 expansion of a 64-bit seed, with independent child streams
//! selected through ChaCha's 64-bit stream id. Normal variates use the polar-free
//! Box–Muller transform on two uniforms, both outputs consumed in order. The
//! combination is identified by [`PRNG_ID`] in every serialized artifact.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Identifier of the generator + normal transform, stored in model files.
pub const PRNG_ID: &str = "chacha20-splitmix64/box-muller/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, values.len())?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(cols, row.len())?;
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// `m · v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, v.len())?;
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `mᵀ · v`, accumulated row by row.
    pub fn matvec_transposed(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += w * x;
            }
        }
        Ok(out)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, &w) in sums.iter_mut().zip(self.row(r)) {
                *s += w;
            }
        }
        sums
    }
}

/// Convenience free function mirroring [`Matrix::matvec`].
pub fn matvec(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    m.matvec(v)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random source. Cloning copies the full generator position.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut sm = seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut sm).to_le_bytes());
        }
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream identified by `label`. Pure in `(seed, stream, label)`;
    /// it does not advance `self`.
    pub fn child(&self, label: u64) -> Self {
        let mut sm = self.stream ^ label.rotate_left(32);
        let stream = splitmix64(&mut sm) ^ label;
        Self::with_stream(self.seed, stream)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` (Lemire's multiply-and-reject).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            let low = m as u64;
            if low < n {
                let threshold = n.wrapping_neg() % n;
                if low < threshold {
                    continue;
                }
            }
            return (m >> 64) as usize;
        }
    }

    /// Standard normal via Box–Muller; the sine output is kept for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in draw order (partial Fisher–Yates).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n} without replacement");
        let mut idx: Vec<usize> = (0..n).collect();
        for t in 0..k {
            let j = t + self.below(n - t);
            idx.swap(t, j);
        }
        idx.truncate(k);
        idx
    }
}

/// `rows × cols` matrix of i.i.d. standard normals, filled row-major.
pub fn sample_normal_matrix(rows: usize, cols: usize, rng: &mut RngState) -> Matrix {
    let values = (0..rows * cols).map(|_| rng.normal()).collect();
    Matrix { rows, cols, values }
}

/// `n` i.i.d. uniforms in `[lo, hi)`.
pub fn sample_uniform_vector(n: usize, lo: f64, hi: f64, rng: &mut RngState) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "uniform range requires lo < hi, got [{lo}, {hi})"
        )));
    }
    let width = hi - lo;
    Ok((0..n)
        .map(|_| {
            let x = lo + width * rng.uniform();
            // rounding can land exactly on `hi`
            if x >= hi {
                hi.next_down()
            } else {
                x
            }
        })
        .collect())
}

/// `in_dim × width` 0/1 matrix whose columns each hold exactly `fan_in` ones,
/// drawn column by column without replacement.
pub fn sample_sparse_binary(
    in_dim: usize,
    width: usize,
    fan_in: usize,
    rng: &mut RngState,
) -> Result<Matrix> {
    if fan_in == 0 || fan_in >= in_dim {
        return Err(Error::InvalidArgument(format!(
            "fan-in must satisfy 1 <= fan_in < in_dim, got fan_in={fan_in}, in_dim={in_dim}"
        )));
    }
    if width == 0 {
        return Err(Error::InvalidArgument("width must be at least 1".into()));
    }
    let mut m = Matrix::zeros(in_dim, width);
    for col in 0..width {
        for row in rng.sample_indices(in_dim, fan_in) {
            m.values[row * width + col] = 1.0;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matvec_examples() {
        let v = [3.0, 4.0];
        assert_eq!(matvec(&Matrix::identity(2), &v).unwrap(), vec![3.0, 4.0]);
        assert_eq!(matvec(&Matrix::zeros(2, 2), &v).unwrap(), vec![0.0, 0.0]);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(m.matvec_transposed(&[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let m = Matrix::identity(2);
        assert!(matches!(
            m.matvec(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn normal_matrix_is_deterministic_and_seed_sensitive() {
        let a = sample_normal_matrix(20, 30, &mut RngState::new(5));
        let b = sample_normal_matrix(20, 30, &mut RngState::new(5));
        let c = sample_normal_matrix(20, 30, &mut RngState::new(6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn normal_matrix_mean_is_near_zero() {
        // std of the mean is 1e-3, so (-0.01, 0.01) is a 10-sigma band.
        let m = sample_normal_matrix(1000, 1000, &mut RngState::new(2024));
        let mean = m.as_slice().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.01, "mean {mean}");
        let var = m.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1e6;
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn uniform_vector_range_and_mean() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = sample_uniform_vector(10_000, 0.0, two_pi, &mut RngState::new(1)).unwrap();
        assert!(v.iter().all(|&x| (0.0..two_pi).contains(&x)));
        let w = sample_uniform_vector(10_000, 0.0, two_pi, &mut RngState::new(1)).unwrap();
        assert_eq!(v, w);

        let u = sample_uniform_vector(100_000, 0.0, 1.0, &mut RngState::new(77)).unwrap();
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        assert!(mean > 0.49 && mean < 0.51, "mean {mean}");
    }

    #[test]
    fn uniform_vector_rejects_empty_range() {
        assert!(sample_uniform_vector(3, 1.0, 1.0, &mut RngState::new(0)).is_err());
        assert!(sample_uniform_vector(3, 2.0, 1.0, &mut RngState::new(0)).is_err());
    }

    #[test]
    fn sparse_binary_columns_sum_to_fan_in() {
        let m = sample_sparse_binary(64, 200, 7, &mut RngState::new(3)).unwrap();
        assert!(m.column_sums().iter().all(|&s| s == 7.0));
        assert!(m.as_slice().iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn sparse_binary_fan_in_one_gives_basis_columns() {
        let m = sample_sparse_binary(2, 50, 1, &mut RngState::new(3)).unwrap();
        for col in 0..50 {
            let column = [m.get(0, col), m.get(1, col)];
            assert!(column == [1.0, 0.0] || column == [0.0, 1.0]);
        }
    }

    #[test]
    fn sparse_binary_rejects_full_fan_in() {
        assert!(sample_sparse_binary(64, 10, 64, &mut RngState::new(0)).is_err());
        assert!(sample_sparse_binary(64, 10, 0, &mut RngState::new(0)).is_err());
    }

    #[test]
    fn child_streams_are_pure_and_distinct() {
        let root = RngState::new(9);
        let mut a = root.child(1);
        let mut b = root.child(1);
        let mut c = root.child(2);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        let mut r = RngState::new(9);
        let xr: Vec<u64> = (0..8).map(|_| r.next_u64()).collect();
        assert_ne!(xa, xr);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = RngState::new(4);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            counts[rng.below(3)] += 1;
        }
        assert!(counts.iter().all(|&c| c > 900), "{counts:?}");
    }

    proptest! {
        #[test]
        fn matvec_is_linear(
            entries in proptest::collection::vec(-10.0f64..10.0, 12),
            x in proptest::collection::vec(-10.0f64..10.0, 4),
            y in proptest::collection::vec(-10.0f64..10.0, 4),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let m = Matrix::new(3, 4, entries).unwrap();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = m.matvec(&combo).unwrap();
            let mx = m.matvec(&x).unwrap();
            let my = m.matvec(&y).unwrap();
            for i in 0..3 {
                let rhs = a * mx[i] + b * my[i];
                let scale = 1.0 + lhs[i].abs().max(rhs.abs()) + (a * mx[i]).abs() + (b * my[i]).abs();
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * scale);
            }
        }
    }
}
