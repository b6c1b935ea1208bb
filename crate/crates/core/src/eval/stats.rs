//! Error summaries and least-squares fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute relative error summary of predictions against a reference.
/// Rows whose reference is exactly zero are excluded and counted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats<T> {
    pub mean: T,
    pub max: T,
    pub std: T,
    /// Rows skipped because the reference was zero.
    pub excluded: usize,
    pub count: usize,
}

impl<T: Scalar> ErrorStats<T> {
    /// Relative errors `|pred - reference| / |reference|`.
    pub fn relative(pred: &[T], reference: &[T]) -> Result<ErrorStats<T>> {
        Self::referenced(pred, reference, reference)
    }

    /// Errors `|pred - truth| / |reference|` with a denominator series
    /// distinct from the truth, e.g. slack errors over the clock period or
    /// wire-delay errors over the stage delay.
    pub fn referenced(pred: &[T], truth: &[T], reference: &[T]) -> Result<ErrorStats<T>> {
        assert_eq!(pred.len(), truth.len());
        assert_eq!(pred.len(), reference.len());
        let mut errs = Vec::with_capacity(pred.len());
        let mut excluded = 0usize;
        for ((&p, &t), &r) in pred.iter().zip(truth).zip(reference) {
            if r == T::zero() {
                excluded += 1;
            } else {
                errs.push((p - t).abs() / r.abs());
            }
        }
        if errs.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "no usable rows: all {excluded} references are zero"
            )));
        }
        let n = T::c(errs.len() as f64);
        let mean = errs.iter().copied().sum::<T>() / n;
        let var = errs.iter().map(|&e| (e - mean) * (e - mean)).sum::<T>() / n;
        let max = errs.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
        Ok(ErrorStats { mean, max, std: var.sqrt(), excluded, count: errs.len() })
    }

    /// Mean absolute error in label units, no reference filtering.
    pub fn absolute(pred: &[T], reference: &[T]) -> Result<ErrorStats<T>> {
        assert_eq!(pred.len(), reference.len());
        if pred.is_empty() {
            return Err(Error::EmptyDataset("no rows".into()));
        }
        let errs: Vec<T> = pred.iter().zip(reference).map(|(&p, &r)| (p - r).abs()).collect();
        let n = T::c(errs.len() as f64);
        let mean = errs.iter().copied().sum::<T>() / n;
        let var = errs.iter().map(|&e| (e - mean) * (e - mean)).sum::<T>() / n;
        let max = errs.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
        Ok(ErrorStats { mean, max, std: var.sqrt(), excluded: 0, count: errs.len() })
    }
}

/// Ordinary least squares `y = intercept + slope * x`, with the Pearson
/// correlation of the two series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r: T,
}

impl<T: Scalar> LinearFit<T> {
    pub fn fit(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
        assert_eq!(x.len(), y.len());
        if x.len() < 2 {
            return Err(Error::EmptyDataset("line fit needs at least two points".into()));
        }
        let n = T::c(x.len() as f64);
        let mx = x.iter().copied().sum::<T>() / n;
        let my = y.iter().copied().sum::<T>() / n;
        let sxx = x.iter().map(|&v| (v - mx) * (v - mx)).sum::<T>();
        let syy = y.iter().map(|&v| (v - my) * (v - my)).sum::<T>();
        let sxy = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum::<T>();
        if sxx == T::zero() {
            return Err(Error::EmptyDataset("x is constant; slope undefined".into()));
        }
        let slope = sxy / sxx;
        let r = if syy == T::zero() { T::zero() } else { sxy / (sxx * syy).sqrt() };
        Ok(LinearFit { slope, intercept: my - slope * mx, r })
    }

    pub fn at(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_percent_error_on_every_row() {
        let reference = vec![1.0f64, 2.0, -4.0];
        let pred: Vec<f64> = reference.iter().map(|r| r * 1.05).collect();
        let s = ErrorStats::relative(&pred, &reference).unwrap();
        assert!((s.mean - 0.05).abs() < 1e-12);
        assert!((s.max - 0.05).abs() < 1e-12);
        assert!(s.std.abs() < 1e-12);
        assert_eq!((s.excluded, s.count), (0, 3));
    }

    #[test]
    fn exact_predictions_have_zero_error() {
        let truth = vec![0.4f64, 1.5, 2.25];
        let reference = vec![2.0f64, 3.0, 4.5];
        let s = ErrorStats::referenced(&truth.clone(), &truth, &reference).unwrap();
        assert_eq!((s.mean, s.max, s.std), (0.0, 0.0, 0.0));
        assert_eq!((s.excluded, s.count), (0, 3));
    }

    #[test]
    fn explicit_reference_scales_the_error() {
        // |1.1 - 1.0| / 2.0 = 5%.
        let s = ErrorStats::referenced(&[1.1f64], &[1.0], &[2.0]).unwrap();
        assert!((s.mean - 0.05).abs() < 1e-12);
        assert!((s.max - 0.05).abs() < 1e-12);
        assert!(s.std.abs() < 1e-12);
    }

    #[test]
    fn zero_references_are_excluded_not_infinite() {
        let reference = vec![0.0f64, 2.0];
        let pred = vec![1.0, 2.2];
        let s = ErrorStats::relative(&pred, &reference).unwrap();
        assert_eq!(s.excluded, 1);
        assert_eq!(s.count, 1);
        assert!((s.mean - 0.1).abs() < 1e-12);
        assert!(ErrorStats::relative(&pred[..1], &reference[..1]).is_err());
    }

    #[test]
    fn exact_line_recovers_slope_intercept_and_unit_correlation() {
        let x = vec![0.0f64, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = LinearFit::fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r - 1.0).abs() < 1e-12);
        assert!((f.at(10.0) - 29.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_are_orthogonal_to_inputs() {
        // Normal equations property checked on an arbitrary non-degenerate set.
        let x = vec![0.1f64, 0.7, 1.3, 2.9, 3.4, 5.0];
        let y = vec![1.0f64, 0.4, 2.2, 1.8, 3.9, 3.1];
        let f = LinearFit::fit(&x, &y).unwrap();
        let res: Vec<f64> = x.iter().zip(&y).map(|(&a, &b)| b - f.at(a)).collect();
        let dot_1: f64 = res.iter().sum();
        let dot_x: f64 = res.iter().zip(&x).map(|(r, v)| r * v).sum();
        assert!(dot_1.abs() < 1e-9, "residual sum {dot_1}");
        assert!(dot_x.abs() < 1e-9, "residual-x dot {dot_x}");
    }

    #[test]
    fn f32_width_works_for_both_stats() {
        let reference = vec![1.0f32, 2.0];
        let pred = vec![1.1f32, 1.9];
        let s = ErrorStats::relative(&pred, &reference).unwrap();
        assert!((s.mean - 0.075).abs() < 1e-6);
        let f = LinearFit::fit(&[0.0f32, 1.0], &[1.0, 2.0]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-6);
    }
}
