//! Small numeric helpers shared across modules.

use alloc::vec::Vec;

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by `n`). Works on values shifted by
/// the first element so a constant series gives exactly zero.
pub(crate) fn pop_std(xs: &[f64]) -> f64 {
    let Some(&origin) = xs.first() else { return f64::NAN };
    let m = xs.iter().map(|x| x - origin).sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - origin - m) * (x - origin - m)).sum();
    libm::sqrt(ss / xs.len() as f64)
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub(crate) fn diffs(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}
