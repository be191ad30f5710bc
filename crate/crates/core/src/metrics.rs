//! Partition agreement and run-time summaries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pipeline::TimestepReport;

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with arithmetic-mean normalization,
/// `I(A;B) / ((H(A) + H(B)) / 2)`. Two single-cluster labelings score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut count_a: HashMap<usize, usize> = HashMap::new();
    let mut count_b: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *count_a.entry(x).or_default() += 1;
        *count_b.entry(y).or_default() += 1;
    }
    let h_a = entropy(count_a.values().copied(), n);
    let h_b = entropy(count_b.values().copied(), n);
    if h_a + h_b == 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            let px = count_a[&x] as f64 / n;
            let py = count_b[&y] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    Ok((mi / ((h_a + h_b) / 2.0)).clamp(0.0, 1.0))
}

pub fn total_ms(reports: &[TimestepReport]) -> f64 {
    reports.iter().map(|r| r.total_ms).sum()
}

/// Mean modularity over all steps.
pub fn average_modularity(reports: &[TimestepReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().map(|r| r.q).sum::<f64>() / reports.len() as f64
}

/// `100 * (1 - total_delta / total_base)` for one pair of runs.
pub fn percent_saving(total_delta: f64, total_base: f64) -> f64 {
    if total_base == total_delta {
        0.0
    } else {
        100.0 * (1.0 - total_delta / total_base)
    }
}

/// Percentage of total time saved by each delta run relative to the baseline
/// run at the same resolution, in input order.
pub fn percent_time_saving(
    delta: &[Vec<TimestepReport>],
    base: &[Vec<TimestepReport>],
) -> Result<Vec<f64>> {
    if delta.len() != base.len() {
        return Err(Error::SizeMismatch(delta.len(), base.len()));
    }
    delta
        .iter()
        .zip(base)
        .map(|(d, b)| {
            if d.len() != b.len() {
                return Err(Error::SizeMismatch(d.len(), b.len()));
            }
            Ok(percent_saving(total_ms(d), total_ms(b)))
        })
        .collect()
}
