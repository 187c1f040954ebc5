use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decision threshold used for classification and the inclusion-ratio baseline.
pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Precision–recall points, one per distinct score, by decreasing threshold.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Sweeps the threshold over every distinct score from high to low; a sample
/// is predicted positive when its score is at least the threshold, so tied
/// scores always enter together.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Evaluation("non-finite score".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Evaluation("labels must contain both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold: t,
            recall: tp as f64 / positives as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    Ok(PrCurve { points })
}

/// Trapezoidal area under the curve over recall, starting from
/// `(0, p₀)` where `p₀` is the precision at the highest threshold.
pub fn auc(curve: &PrCurve) -> Result<f64> {
    let first = curve
        .points
        .first()
        .ok_or_else(|| Error::Evaluation("empty precision-recall curve".into()))?;
    let (mut r0, mut p0) = (0.0, first.precision);
    let mut area = 0.0;
    for pt in &curve.points {
        area += (pt.recall - r0) * (pt.precision + p0) / 2.0;
        r0 = pt.recall;
        p0 = pt.precision;
    }
    Ok(area)
}

/// `score > th`, strictly.
pub fn classify(score: f64, th: f64) -> bool {
    score > th
}

/// Precision and recall of thresholded predictions; precision is 0 when
/// nothing is predicted positive.
pub fn threshold_metrics(scores: &[f64], labels: &[bool], th: f64) -> (f64, f64) {
    let (mut tp, mut fp, mut pos) = (0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        pos += l as usize;
        if classify(s, th) {
            if l {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if pos == 0 { 0.0 } else { tp as f64 / pos as f64 };
    (precision, recall)
}

/// Sample mean and (n − 1)-denominator standard deviation; the deviation of a
/// single value is 0.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
