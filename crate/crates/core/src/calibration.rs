//! Deriving the walking-speed threshold from speed samples recorded while
//! people were asked to walk in place: Tukey boxplot fences, then the upper
//! fence rounded up onto a grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedSampleSet {
    pub samples: Vec<f64>,
    #[serde(default)]
    pub source: String,
}

impl SpeedSampleSet {
    pub fn new(samples: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidSample { index, value });
        }
        Ok(Self {
            samples,
            source: source.into(),
        })
    }

    /// One value per line; a non-numeric first line is taken as a header.
    /// Blank lines are skipped.
    pub fn from_csv(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => samples.push(v),
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("`{field}`: {e}"),
                    })
                }
            }
        }
        Self::new(samples, source)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Fraction of all samples at or below the upper fence.
    pub cumulative_fraction_at_upper: f64,
}

/// Linear-interpolation quantile at position `p·(n−1)` of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn boxplot_fences(set: &SpeedSampleSet) -> Result<Fences> {
    let n = set.samples.len();
    if n < 4 {
        return Err(Error::TooFewSamples(n));
    }
    let mut sorted = set.samples.clone();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let upper_fence = q3 + 1.5 * iqr;
    let within = sorted.partition_point(|&v| v <= upper_fence);
    Ok(Fences {
        q1,
        median,
        q3,
        iqr,
        lower_fence: q1 - 1.5 * iqr,
        upper_fence,
        cumulative_fraction_at_upper: within as f64 / n as f64,
    })
}

/// Smallest multiple of `step` that is not below `value`. Values already on
/// the grid (to 1e−9 of a step) stay put.
pub fn round_up_to_grid(value: f64, step: f64) -> f64 {
    let k = (value / step - 1e-9).ceil();
    (k * step).max(value)
}

/// Upper fence rounded up to the `rounding` grid (m/s).
pub fn calibrate_threshold(set: &SpeedSampleSet, rounding: f64) -> Result<f64> {
    if !(rounding > 0.0 && rounding.is_finite()) {
        return Err(Error::Config(format!(
            "rounding step must be positive, got {rounding}"
        )));
    }
    let fences = boxplot_fences(set)?;
    Ok(round_up_to_grid(fences.upper_fence, rounding))
}

pub const DEFAULT_ROUNDING: f64 = 0.05;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn set(v: &[f64]) -> SpeedSampleSet {
        SpeedSampleSet::new(v.to_vec(), "test").unwrap()
    }

    #[test]
    fn one_to_five() {
        let f = boxplot_fences(&set(&[5.0, 3.0, 1.0, 4.0, 2.0])).unwrap();
        assert_eq!((f.q1, f.median, f.q3), (2.0, 3.0, 4.0));
        assert_eq!(f.iqr, 2.0);
        assert_eq!(f.upper_fence, 7.0);
        assert_eq!(f.lower_fence, -1.0);
        assert_eq!(f.cumulative_fraction_at_upper, 1.0);
    }

    #[test]
    fn constant_samples() {
        let f = boxplot_fences(&set(&[0.4; 9])).unwrap();
        assert_eq!(f.iqr, 0.0);
        assert_eq!(f.lower_fence, 0.4);
        assert_eq!(f.upper_fence, 0.4);
        assert_eq!(f.cumulative_fraction_at_upper, 1.0);
    }

    #[test]
    fn far_outlier_is_beyond_upper_fence() {
        let f = boxplot_fences(&set(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 5.0])).unwrap();
        // q1 at 1.75 -> 0.275, q3 at 5.25 -> 0.625, upper = 0.625 + 0.525
        assert_abs_diff_eq!(f.q1, 0.275, epsilon = 1e-12);
        assert_abs_diff_eq!(f.q3, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(f.upper_fence, 1.15, epsilon = 1e-12);
        assert!(5.0 > f.upper_fence);
        assert_eq!(f.cumulative_fraction_at_upper, 7.0 / 8.0);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            boxplot_fences(&set(&[1.0, 2.0, 3.0])),
            Err(Error::TooFewSamples(3))
        ));
        assert!(calibrate_threshold(&set(&[]), 0.05).is_err());
    }

    #[test]
    fn invalid_samples_rejected() {
        assert!(SpeedSampleSet::new(vec![0.1, -0.2], "x").is_err());
        assert!(SpeedSampleSet::new(vec![0.1, f64::NAN], "x").is_err());
    }

    #[test]
    fn grid_rounding() {
        assert_abs_diff_eq!(round_up_to_grid(0.78, 0.05), 0.80, epsilon = 1e-12);
        assert_abs_diff_eq!(round_up_to_grid(0.75, 0.05), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(round_up_to_grid(0.7501, 0.05), 0.80, epsilon = 1e-12);
    }

    #[test]
    fn threshold_from_samples_with_fence_at_078() {
        // q1 = 0.3, q3 = 0.492 -> upper = 0.492 + 1.5 * 0.192 = 0.78
        let s = set(&[0.1, 0.3, 0.4, 0.492, 0.6]);
        let f = boxplot_fences(&s).unwrap();
        assert_abs_diff_eq!(f.upper_fence, 0.78, epsilon = 1e-12);
        assert_abs_diff_eq!(
            calibrate_threshold(&s, 0.05).unwrap(),
            0.80,
            epsilon = 1e-12
        );
    }

    #[test]
    fn csv_parsing() {
        let s = SpeedSampleSet::from_csv("speed\n0.1\n0.2\n\n0.3\n", "f").unwrap();
        assert_eq!(s.samples, vec![0.1, 0.2, 0.3]);
        let s = SpeedSampleSet::from_csv("0.5\n0.6", "f").unwrap();
        assert_eq!(s.samples, vec![0.5, 0.6]);
        let err = SpeedSampleSet::from_csv("0.5\nabc\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    proptest! {
        #[test]
        fn threshold_bounds(samples in proptest::collection::vec(0.0..3.0f64, 4..60), step in 0.01..0.5f64) {
            let s = set(&samples);
            let upper = boxplot_fences(&s).unwrap().upper_fence;
            let vt = calibrate_threshold(&s, step).unwrap();
            prop_assert!(vt >= upper);
            prop_assert!(vt - upper < step);
        }

        #[test]
        fn fences_scale_linearly(samples in proptest::collection::vec(0.0..3.0f64, 4..60), k in 0.01..100.0f64) {
            let a = boxplot_fences(&set(&samples)).unwrap();
            let scaled: Vec<f64> = samples.iter().map(|v| v * k).collect();
            let b = boxplot_fences(&set(&scaled)).unwrap();
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
            prop_assert!(close(a.q1 * k, b.q1));
            prop_assert!(close(a.median * k, b.median));
            prop_assert!(close(a.q3 * k, b.q3));
            prop_assert!(close(a.upper_fence * k, b.upper_fence));
            prop_assert!(close(a.lower_fence * k, b.lower_fence));
        }
    }
}
