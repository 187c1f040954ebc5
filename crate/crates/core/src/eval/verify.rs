//! Self-checks bundled by the `verify` command: kernel approximation,
//! finite-difference gradients and parameter counts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::encoder::{build_encoder, EncoderConfig};
use crate::error::{Error, Result};
use crate::numerics::RngState;
use crate::predicates::{init_ntn, ntn_param_count, rwfn_param_count, ParamCount, PredicateModel, RwfnPredicate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub width: usize,
    pub mean_error: f64,
}

/// Mean `|z(x)ᵀz(y) − exp(−‖x−y‖²/2)|` over `pairs` fixed random pairs in
/// `[0,1]^dim` and `seeds` encoder seeds, for each width.
pub fn kernel_study(widths: &[usize], pairs: usize, seeds: u64, dim: usize, seed: u64) -> Result<Vec<KernelPoint>> {
    if pairs == 0 || seeds == 0 || dim < 2 {
        return Err(Error::InvalidArgument("kernel study needs pairs, seeds and dim >= 2".into()));
    }
    let mut rng = RngState::new(seed);
    let mut point = || (0..dim).map(|_| rng.uniform()).collect::<Vec<f64>>();
    let data: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..pairs)
        .map(|_| {
            let (x, y) = (point(), point());
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            (x, y, (-d2 / 2.0).exp())
        })
        .collect();
    widths
        .iter()
        .map(|&width| {
            let mut total = 0.0;
            for s in 0..seeds {
                let enc = build_encoder(EncoderConfig::new(dim, width, seed.wrapping_add(s)))?;
                for (x, y, exact) in &data {
                    total += (enc.kernel_estimate(x, y)? - exact).abs();
                }
            }
            Ok(KernelPoint {
                width,
                mean_error: total / (pairs as f64 * seeds as f64),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub trials: usize,
    pub step: f64,
    pub rwfn_max_rel_error: f64,
    pub ntn_max_rel_error: f64,
}

/// Relative error with a `1e-6` floor on the magnitude, so coordinates whose
/// true derivative vanishes are judged on absolute error.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn max_error(model: &PredicateModel, x: &[f64], step: f64) -> Result<f64> {
    let prepared = model.prepare(x)?;
    let mut grad = model.zero_gradient();
    model.accumulate_gradient_prepared(&prepared, 1.0, &mut grad);
    let mut worst: f64 = 0.0;
    for (bi, block) in grad.iter().enumerate() {
        for (j, &g) in block.iter().enumerate() {
            let mut plus = model.clone();
            plus.param_blocks_mut()[bi][j] += step;
            let mut minus = model.clone();
            minus.param_blocks_mut()[bi][j] -= step;
            let fd = (plus.forward(x)? - minus.forward(x)?) / (2.0 * step);
            worst = worst.max(relative_error(g, fd));
        }
    }
    Ok(worst)
}

/// Central differences with step `1e-5` against the analytic gradients of an
/// RWFN decoder (input 8, B = 16) and an NTN (k = 3, input 8), on `trials`
/// random instances each.
pub fn gradcheck(trials: usize, seed: u64) -> Result<GradcheckReport> {
    let step = 1e-5;
    let mut rng = RngState::new(seed);
    let (mut rwfn_err, mut ntn_err): (f64, f64) = (0.0, 0.0);
    for t in 0..trials {
        let enc = Arc::new(build_encoder(EncoderConfig::new(8, 16, seed.wrapping_add(t as u64)))?);
        let beta = (0..32).map(|_| rng.normal()).collect();
        let rwfn = PredicateModel::Rwfn(RwfnPredicate::with_beta(enc, beta)?);
        let x: Vec<f64> = (0..8).map(|_| rng.uniform()).collect();
        rwfn_err = rwfn_err.max(max_error(&rwfn, &x, step)?);

        let mut ntn = PredicateModel::Ntn(init_ntn(3, 8, &mut rng)?);
        for block in ntn.param_blocks_mut() {
            for p in block.iter_mut() {
                *p = 0.5 * rng.normal();
            }
        }
        ntn_err = ntn_err.max(max_error(&ntn, &x, step)?);
    }
    Ok(GradcheckReport {
        trials,
        step,
        rwfn_max_rel_error: rwfn_err,
        ntn_max_rel_error: ntn_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamCheck {
    pub n: usize,
    pub hidden_width: usize,
    pub slices: usize,
    pub rwfn: ParamCount,
    pub ntn: ParamCount,
}

/// Counts taken from freshly built models, not from the closed forms.
pub fn param_check(n: usize, hidden_width: usize, slices: usize, seed: u64) -> Result<ParamCheck> {
    let enc = Arc::new(build_encoder(EncoderConfig::new(n, hidden_width, seed))?);
    let rwfn = RwfnPredicate::new(enc).count_params();
    let ntn = init_ntn(slices, n, &mut RngState::new(seed))?.count_params();
    if rwfn != rwfn_param_count(n, hidden_width) || ntn != ntn_param_count(n, slices) {
        return Err(Error::Model("built models disagree with closed-form counts".into()));
    }
    Ok(ParamCheck {
        n,
        hidden_width,
        slices,
        rwfn,
        ntn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kernel: Vec<KernelPoint>,
    pub gradcheck: GradcheckReport,
    pub params: ParamCheck,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub kernel_widths: Vec<usize>,
    pub gradcheck_trials: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            kernel_widths: vec![100, 1000, 10000],
            gradcheck_trials: 20,
            seed: 0,
        }
    }
}

/// Runs every check. Thresholds: kernel error non-increasing in width and at
/// most 0.05 at width 1000 when that width is studied; gradient relative
/// error below `1e-4`; counts 400/26200 (RWFN) and 24972 (NTN) at n = 64,
/// B = 200, k = 6.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut widths = opts.kernel_widths.clone();
    widths.sort_unstable();
    widths.dedup();
    if widths.is_empty() || widths[0] == 0 {
        return Err(Error::InvalidArgument("kernel widths must be positive".into()));
    }
    let kernel = kernel_study(&widths, 100, 10, 8, opts.seed)?;
    let gc = gradcheck(opts.gradcheck_trials, opts.seed)?;
    let params = param_check(64, 200, 6, opts.seed)?;

    let mut checks = Vec::new();
    let errors: Vec<String> = kernel.iter().map(|k| format!("B={}: {:.4}", k.width, k.mean_error)).collect();
    let monotone = kernel.windows(2).all(|w| w[1].mean_error <= w[0].mean_error);
    checks.push(Check {
        name: "kernel-monotone".into(),
        passed: monotone,
        detail: errors.join(", "),
    });
    if let Some(k) = kernel.iter().find(|k| k.width == 1000) {
        checks.push(Check {
            name: "kernel-b1000".into(),
            passed: k.mean_error <= 0.05,
            detail: format!("{:.4} <= 0.05", k.mean_error),
        });
    }
    for (name, err) in [("gradcheck-rwfn", gc.rwfn_max_rel_error), ("gradcheck-ntn", gc.ntn_max_rel_error)] {
        checks.push(Check {
            name: name.into(),
            passed: err < 1e-4,
            detail: format!("max relative error {err:.2e} over {} trials", gc.trials),
        });
    }
    let params_ok = params.rwfn.learnable == 400 && params.rwfn.total == 26200 && params.ntn.learnable == 24972;
    checks.push(Check {
        name: "params".into(),
        passed: params_ok,
        detail: format!("{}/{}", params.rwfn.learnable, params.ntn.learnable),
    });
    Ok(VerifyReport {
        kernel,
        gradcheck: gc,
        params,
        checks,
    })
}
