//! Łukasiewicz connectives and quantifier aggregators.
//!
//! Derivatives are one-sided at the kinks: the right-hand derivative in each
//! argument, so training is deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset inside harmonic-mean reciprocals.
pub const HARMONIC_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    Not,
    And,
    Or,
    Implies,
}

fn check_truth(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::TruthOutOfRange(x))
    }
}

/// Applies `op`; `b` is ignored for `Not`.
pub fn eval_connectives(a: f64, b: f64, op: Connective) -> Result<f64> {
    check_truth(a)?;
    if op != Connective::Not {
        check_truth(b)?;
    }
    Ok(match op {
        Connective::Not => not(a),
        Connective::And => and(a, b),
        Connective::Or => or(a, b),
        Connective::Implies => implies(a, b),
    })
}

pub fn not(a: f64) -> f64 {
    1.0 - a
}

pub fn and(a: f64, b: f64) -> f64 {
    (a + b - 1.0).max(0.0)
}

pub fn or(a: f64, b: f64) -> f64 {
    (a + b).min(1.0)
}

pub fn implies(a: f64, b: f64) -> f64 {
    (1.0 - a + b).min(1.0)
}

/// `(∂/∂a, ∂/∂b)` of `and`.
pub fn and_grad(a: f64, b: f64) -> (f64, f64) {
    if a + b - 1.0 >= 0.0 {
        (1.0, 1.0)
    } else {
        (0.0, 0.0)
    }
}

pub fn or_grad(a: f64, b: f64) -> (f64, f64) {
    if a + b < 1.0 {
        (1.0, 1.0)
    } else {
        (0.0, 0.0)
    }
}

/// Right-hand in `a` means active iff `b ≤ a`, right-hand in `b` iff `b < a`.
pub fn implies_grad(a: f64, b: f64) -> (f64, f64) {
    (if b <= a { -1.0 } else { 0.0 }, if b < a { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    #[default]
    HarmonicMean,
    ArithmeticMean,
    Min,
}

impl Aggregator {
    /// Aggregates `xs`; an empty set aggregates to 1 (vacuous truth). The
    /// harmonic mean is clipped to 1, which the `ε` offset can overshoot.
    pub fn aggregate(self, xs: &[f64]) -> f64 {
        if xs.is_empty() {
            return 1.0;
        }
        let n = xs.len() as f64;
        match self {
            Aggregator::HarmonicMean => harmonic_mean(xs).min(1.0),
            Aggregator::ArithmeticMean => xs.iter().sum::<f64>() / n,
            Aggregator::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// `∂agg/∂x_i` given the aggregated `value`. Ties under `Min` all get 0,
    /// the right-hand derivative.
    pub fn aggregate_grad(self, xs: &[f64], value: f64) -> Vec<f64> {
        let n = xs.len() as f64;
        match self {
            Aggregator::HarmonicMean => xs
                .iter()
                .map(|&x| value * value / (n * (x + HARMONIC_EPS) * (x + HARMONIC_EPS)))
                .collect(),
            Aggregator::ArithmeticMean => vec![1.0 / n; xs.len()],
            Aggregator::Min => {
                let ties = xs.iter().filter(|&&x| x == value).count();
                xs.iter()
                    .map(|&x| if x == value && ties == 1 { 1.0 } else { 0.0 })
                    .collect()
            }
        }
    }
}

/// `N / Σ 1/(x_i + ε)`.
pub fn harmonic_mean(xs: &[f64]) -> f64 {
    xs.len() as f64 / xs.iter().map(|&x| 1.0 / (x + HARMONIC_EPS)).sum::<f64>()
}

/// Grounding of `exists`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExistsMode {
    #[default]
    Max,
    /// `1 − HM(1 − x)`, the dual of the harmonic-mean `forall`.
    DualHarmonic,
}

impl ExistsMode {
    pub fn aggregate(self, xs: &[f64]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        match self {
            ExistsMode::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ExistsMode::DualHarmonic => {
                let comp: Vec<f64> = xs.iter().map(|x| 1.0 - x).collect();
                (1.0 - harmonic_mean(&comp)).max(0.0)
            }
        }
    }

    /// Ties under `Max` all get 1, the right-hand derivative.
    pub fn aggregate_grad(self, xs: &[f64], value: f64) -> Vec<f64> {
        match self {
            ExistsMode::Max => xs.iter().map(|&x| if x == value { 1.0 } else { 0.0 }).collect(),
            ExistsMode::DualHarmonic => {
                let n = xs.len() as f64;
                let hm = 1.0 - value;
                xs.iter()
                    .map(|&x| {
                        let c = 1.0 - x + HARMONIC_EPS;
                        hm * hm / (n * c * c)
                    })
                    .collect()
            }
        }
    }
}

/// Semantics knobs of a grounded theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicConfig {
    pub forall: Aggregator,
    pub exists: ExistsMode,
    /// Aggregates formula truth values into one satisfiability level.
    pub formulas: Aggregator,
    /// Maximum instantiation tuples per quantifier node.
    pub instantiation_budget: usize,
}

impl Default for LogicConfig {
    fn default() -> Self {
        Self {
            forall: Aggregator::HarmonicMean,
            exists: ExistsMode::Max,
            formulas: Aggregator::HarmonicMean,
            instantiation_budget: 10_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn connective_examples() {
        assert!(close(eval_connectives(0.8, 0.7, Connective::And).unwrap(), 0.5));
        assert!(close(eval_connectives(0.9, 0.2, Connective::Implies).unwrap(), 0.3));
        assert_eq!(eval_connectives(0.0, 0.0, Connective::Not).unwrap(), 1.0);
        assert_eq!(eval_connectives(1.0, 1.0, Connective::And).unwrap(), 1.0);
        assert_eq!(eval_connectives(0.0, 0.0, Connective::Or).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(matches!(
            eval_connectives(1.2, 0.5, Connective::And),
            Err(Error::TruthOutOfRange(_))
        ));
        assert!(eval_connectives(0.5, -0.1, Connective::Or).is_err());
        assert!(eval_connectives(f64::NAN, 0.5, Connective::Or).is_err());
        assert!(eval_connectives(0.5, 7.0, Connective::Not).is_ok());
    }

    #[test]
    fn harmonic_mean_examples() {
        assert!((harmonic_mean(&[0.5, 1.0]) - 2.0 / 3.0).abs() < 1e-11);
        assert!((harmonic_mean(&[1.0; 5]) - 1.0).abs() < 1e-11);
        assert_eq!(Aggregator::HarmonicMean.aggregate(&[]), 1.0);
        assert!(harmonic_mean(&[0.0, 1.0]) < 1e-11);
    }

    #[test]
    fn kink_derivatives_are_right_hand() {
        assert_eq!(and_grad(0.5, 0.5), (1.0, 1.0));
        assert_eq!(and_grad(0.2, 0.3), (0.0, 0.0));
        assert_eq!(or_grad(0.5, 0.5), (0.0, 0.0));
        assert_eq!(or_grad(0.2, 0.3), (1.0, 1.0));
        assert_eq!(implies_grad(0.4, 0.4), (-1.0, 0.0));
        assert_eq!(implies_grad(0.6, 0.4), (-1.0, 1.0));
        assert_eq!(implies_grad(0.3, 0.4), (0.0, 0.0));
        assert_eq!(ExistsMode::Max.aggregate_grad(&[0.3, 0.7, 0.7], 0.7), vec![0.0, 1.0, 1.0]);
        assert_eq!(Aggregator::Min.aggregate_grad(&[0.3, 0.3, 0.7], 0.3), vec![0.0, 0.0, 0.0]);
        assert_eq!(Aggregator::Min.aggregate_grad(&[0.2, 0.3], 0.2), vec![1.0, 0.0]);
    }

    #[test]
    fn exists_modes() {
        assert_eq!(ExistsMode::Max.aggregate(&[0.1, 0.9, 0.4]), 0.9);
        let d = ExistsMode::DualHarmonic.aggregate(&[0.5, 0.0]);
        assert!((d - (1.0 - 2.0 / 3.0)).abs() < 1e-11);
        assert_eq!(ExistsMode::Max.aggregate(&[]), 0.0);
    }

    fn central_diff(f: impl Fn(&[f64]) -> f64, xs: &[f64], i: usize) -> f64 {
        let h = 1e-6;
        let mut up = xs.to_vec();
        let mut down = xs.to_vec();
        up[i] += h;
        down[i] -= h;
        (f(&up) - f(&down)) / (2.0 * h)
    }

    #[test]
    fn aggregator_gradients_match_finite_differences() {
        let xs = [0.3, 0.55, 0.8, 0.62];
        for agg in [Aggregator::HarmonicMean, Aggregator::ArithmeticMean, Aggregator::Min] {
            let g = agg.aggregate_grad(&xs, agg.aggregate(&xs));
            for i in 0..xs.len() {
                let fd = central_diff(|v| agg.aggregate(v), &xs, i);
                assert!((g[i] - fd).abs() < 1e-6, "{agg:?} {i}: {} vs {fd}", g[i]);
            }
        }
        for mode in [ExistsMode::Max, ExistsMode::DualHarmonic] {
            let g = mode.aggregate_grad(&xs, mode.aggregate(&xs));
            for i in 0..xs.len() {
                let fd = central_diff(|v| mode.aggregate(v), &xs, i);
                assert!((g[i] - fd).abs() < 1e-6, "{mode:?} {i}: {} vs {fd}", g[i]);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn lukasiewicz_algebra(a in 0.0..=1.0f64, b in 0.0..=1.0f64, c in 0.0..=1.0f64, d in 0.0..=1.0f64) {
            prop_assert!(close(and(a, b), and(b, a)));
            prop_assert!(close(and(and(a, b), c), and(a, and(b, c))));
            prop_assert!(close(or(a, b), or(b, a)));
            prop_assert!(close(and(a, 1.0), a));
            prop_assert!(close(or(a, 0.0), a));
            prop_assert!(close(not(not(a)), a));
            prop_assert_eq!(implies(a, b), or(not(a), b));
            let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
            prop_assert!(and(a, lo) <= and(a, hi) + 1e-12);
            prop_assert!(and(lo, a) <= and(hi, a) + 1e-12);
            prop_assert!(or(a, lo) <= or(a, hi) + 1e-12);
            for v in [not(a), and(a, b), or(a, b), implies(a, b)] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn harmonic_not_above_arithmetic(xs in prop::collection::vec(1e-6..=1.0f64, 1..20)) {
            let hm = Aggregator::HarmonicMean.aggregate(&xs);
            let am = Aggregator::ArithmeticMean.aggregate(&xs);
            prop_assert!(hm <= am + 2.0 * HARMONIC_EPS);
            prop_assert!((0.0..=1.0).contains(&hm));
        }
    }
}
