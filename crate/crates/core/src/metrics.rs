//! Decoding network outputs into class labels, and simple scores.

use crate::linalg::Matrix;

/// Row-wise argmax; ties go to the lowest column index.
///
/// A single-column output is treated as a binary score and thresholded at 0.5
/// (values `>= 0.5` decode to class 1).
pub fn classify(outputs: &Matrix) -> Vec<usize> {
    if outputs.cols() == 1 {
        return outputs.iter().map(|v| usize::from(v >= 0.5)).collect();
    }
    (0..outputs.rows())
        .map(|r| {
            let row = outputs.row(r);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn error_count(predicted: &[usize], truth: &[usize]) -> usize {
    assert_eq!(predicted.len(), truth.len(), "label vectors differ in length");
    predicted.iter().zip(truth).filter(|(p, t)| p != t).count()
}

/// Fraction of mismatched labels, in `[0, 1]`.
pub fn error_rate(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    error_count(predicted, truth) as f64 / truth.len() as f64
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    1.0 - error_rate(predicted, truth)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
