//! Order statistics used for quality and error summaries.

/// Median, quartiles and range of a sample.
///
/// Quartiles use linear interpolation between order statistics (the
/// "type 7" rule), so the median of an even-sized sample is the mean of
/// the two central values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Summary {
    /// Returns `None` for an empty sample. NaN values are rejected by
    /// callers; here they sort last.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut sorted: Vec<f64> = values.into_iter().collect();
        if sorted.is_empty() {
            return None;
        }
        sorted.sort_by(|a, b| a.total_cmp(b));
        Some(Summary {
            median: quantile_sorted(&sorted, 0.5),
            q1: quantile_sorted(&sorted, 0.25),
            q3: quantile_sorted(&sorted, 0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            count: sorted.len(),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Quantile of an already sorted, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    Summary::from_values(values).map(|s| s.median)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Naive oracle: the k-th order statistic by repeated minimum
    /// extraction, then the same interpolation written out by hand.
    fn naive_quantile(values: &[i64], num: usize, den: usize) -> f64 {
        let mut pool = values.to_vec();
        let mut ordered = Vec::new();
        while !pool.is_empty() {
            let (idx, _) = pool.iter().enumerate().min_by_key(|(_, v)| **v).unwrap();
            ordered.push(pool.remove(idx));
        }
        let n = ordered.len() - 1;
        // position = num/den * n, kept rational to avoid float drift
        let lo = num * n / den;
        let rem = num * n % den;
        if rem == 0 {
            ordered[lo] as f64
        } else {
            ordered[lo] as f64 + (ordered[lo + 1] - ordered[lo]) as f64 * rem as f64 / den as f64
        }
    }

    #[test]
    fn two_point_median() {
        let s = Summary::from_values([0.4, 0.8]).unwrap();
        assert!((s.median - 0.6).abs() < 1e-15);
        assert_eq!(s.min, 0.4);
        assert_eq!(s.max, 0.8);
    }

    #[test]
    fn constant_sample_has_zero_iqr() {
        let s = Summary::from_values(vec![1.0; 17]).unwrap();
        assert_eq!(s.median, 1.0);
        assert_eq!(s.iqr(), 0.0);
    }

    #[test]
    fn empty_sample() {
        assert!(Summary::from_values(Vec::<f64>::new()).is_none());
    }

    proptest! {
        #[test]
        fn matches_naive_oracle(values in prop::collection::vec(-1000i64..1000, 1..60)) {
            let s = Summary::from_values(values.iter().map(|&v| v as f64)).unwrap();
            prop_assert_eq!(s.median, naive_quantile(&values, 1, 2));
            prop_assert_eq!(s.q1, naive_quantile(&values, 1, 4));
            prop_assert_eq!(s.q3, naive_quantile(&values, 3, 4));
            prop_assert_eq!(s.min, *values.iter().min().unwrap() as f64);
            prop_assert_eq!(s.max, *values.iter().max().unwrap() as f64);
        }
    }
}
