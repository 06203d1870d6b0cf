//! Multi-trial reward statistics over a fixed episode window.

use crate::error::{Error, Result};

/// Summary of a trial-averaged reward sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    /// Maximum of the trial-averaged sequence over all episodes.
    pub r_best: f64,
    /// Mean over the window.
    pub r_av: f64,
    /// Population standard deviation over the window.
    pub std_dev_r: f64,
    /// Improvement rate 1 - r_av / baseline_r_av.
    pub ir: f64,
}

/// Averages the per-trial sequences pointwise, then summarizes over the
/// 1-based inclusive episode window. `baseline_r_av` is the comparison
/// algorithm's windowed mean.
pub fn stats(
    sequences: &[Vec<f64>],
    window: (usize, usize),
    baseline_r_av: f64,
) -> Result<TrialStats> {
    if sequences.is_empty() {
        return Err(Error::Usage("stats needs at least one reward sequence".into()));
    }
    let len = sequences[0].len();
    if sequences.iter().any(|s| s.len() != len) {
        return Err(Error::Usage(
            "all reward sequences must have the same length".into(),
        ));
    }
    let (start, end) = window;
    if start == 0 || start > end {
        return Err(Error::Usage(format!(
            "invalid window [{start}, {end}] (1-based inclusive)"
        )));
    }
    if end > len {
        return Err(Error::Usage(format!(
            "window [{start}, {end}] exceeds sequence length {len}"
        )));
    }
    let averaged: Vec<f64> = (0..len)
        .map(|i| sequences.iter().map(|s| s[i]).sum::<f64>() / sequences.len() as f64)
        .collect();
    let r_best = averaged.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slice = &averaged[start - 1..end];
    let n = slice.len() as f64;
    let r_av = slice.iter().sum::<f64>() / n;
    let var = slice.iter().map(|r| (r - r_av) * (r - r_av)).sum::<f64>() / n;
    Ok(TrialStats {
        r_best,
        r_av,
        std_dev_r: var.sqrt(),
        ir: 1.0 - r_av / baseline_r_av,
    })
}
