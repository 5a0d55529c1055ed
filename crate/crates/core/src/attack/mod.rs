//! Correlation power analysis against the first-round S-box byte.
//!
//! Correlations use one-pass sums shifted by the first trace's values, so a
//! constant column gives exactly zero variance. Sums run in ascending trace
//! order; the fast path and [`cpa_oracle`] evaluate the same expression tree
//! and agree bit for bit.

mod metrics;

pub use metrics::{
    grid_maps, inverse_mtd, linear_checkpoints, mtd, mtd_from, snr, spearman, GridMaps, MtdResult, SnrReport,
    DEFAULT_WINDOW,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};
use crate::tracegen::{hamming_weight, sbox_intermediate, TraceSet};

pub const N_GUESSES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Highest |r| over every sample; no knowledge of the leaking sample.
    #[default]
    MaxOverSamples,
    /// |r| at the trace set's point of interest only.
    PoiOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub checkpoints: Vec<usize>,
    pub score_mode: ScoreMode,
    /// `corr[guess][k]`: score of `guess` using the first `checkpoints[k]` traces.
    pub corr: Vec<Vec<f64>>,
    /// Guesses by final score, descending; ties by ascending guess.
    pub ranking: Vec<u8>,
    pub recovered_key: u8,
    pub true_key: u8,
    pub success: bool,
    /// 1-based rank of the true key at each checkpoint.
    pub true_key_rank: Vec<usize>,
}

impl AttackResult {
    pub fn final_scores(&self) -> Vec<f64> {
        self.corr.iter().map(|c| *c.last().expect("at least one checkpoint")).collect()
    }

    /// CSV `n_traces,guess,abs_r`, checkpoint-major.
    pub fn write_curves_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n_traces,guess,abs_r")?;
        for (k, n) in self.checkpoints.iter().enumerate() {
            for (g, row) in self.corr.iter().enumerate() {
                writeln!(w, "{n},{g},{:.17e}", row[k])?;
            }
        }
        Ok(())
    }
}

/// Hamming weight of the predicted S-box output for every (guess, plaintext).
fn model_table() -> Vec<[f64; 256]> {
    (0..N_GUESSES)
        .map(|g| {
            let mut row = [0.0; 256];
            for (pt, v) in row.iter_mut().enumerate() {
                *v = hamming_weight(sbox_intermediate(pt as u8, g as u8)) as f64;
            }
            row
        })
        .collect()
}

/// Pearson r from sums of shifted values; 0 when either side has no variance.
#[inline]
pub(crate) fn correlation_from_sums(n: f64, sa: f64, sb: f64, saa: f64, sbb: f64, sab: f64) -> f64 {
    let va = saa - sa * sa / n;
    let vb = sbb - sb * sb / n;
    if !(va > 0.0 && vb > 0.0) {
        return 0.0;
    }
    let r = (sab - sa * sb / n) / (va * vb).sqrt();
    r.clamp(-1.0, 1.0)
}

fn check_checkpoints(checkpoints: &[usize], n_traces: usize) -> std::result::Result<(), ValidationError> {
    let mut errs = Vec::new();
    if checkpoints.is_empty() {
        errs.push("checkpoint list is empty".to_string());
    }
    if checkpoints.first().is_some_and(|&c| c < 2) {
        errs.push("checkpoints must use at least 2 traces".to_string());
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        errs.push("checkpoints must be strictly increasing".to_string());
    }
    if let Some(&last) = checkpoints.last() {
        if last > n_traces {
            errs.push(format!("checkpoint {last} exceeds the {n_traces} available traces"));
        }
    }
    ValidationError::from_messages(errs)
}

fn score_columns(ts: &TraceSet, mode: ScoreMode) -> Result<Vec<usize>> {
    let m = ts.n_samples();
    if m == 0 || ts.traces.iter().any(|t| t.samples.len() != m) {
        return Err(Error::validation("traces must share a positive sample count"));
    }
    Ok(match mode {
        ScoreMode::MaxOverSamples => (0..m).collect(),
        ScoreMode::PoiOnly => {
            if ts.poi() >= m {
                return Err(Error::validation(format!("poi {} outside {m} samples", ts.poi())));
            }
            vec![ts.poi()]
        }
    })
}

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.map(f64::abs).fold(0.0, f64::max)
}

/// Ranking and per-checkpoint true-key ranks from a score matrix.
fn assemble(checkpoints: &[usize], mode: ScoreMode, corr: Vec<Vec<f64>>, true_key: u8) -> AttackResult {
    let last = checkpoints.len() - 1;
    let mut ranking: Vec<u8> = (0..N_GUESSES as u16).map(|g| g as u8).collect();
    ranking.sort_by(|&a, &b| corr[b as usize][last].total_cmp(&corr[a as usize][last]).then(a.cmp(&b)));
    let t = true_key as usize;
    let true_key_rank = (0..checkpoints.len())
        .map(|k| {
            let s = corr[t][k];
            1 + (0..N_GUESSES)
                .filter(|&g| corr[g][k] > s || (corr[g][k] == s && g < t))
                .count()
        })
        .collect();
    let recovered_key = ranking[0];
    AttackResult {
        checkpoints: checkpoints.to_vec(),
        score_mode: mode,
        corr,
        ranking,
        recovered_key,
        true_key,
        success: recovered_key == true_key,
        true_key_rank,
    }
}

/// CPA on the first `n_used` traces, scoring by max |r| over samples.
pub fn cpa(ts: &TraceSet, n_used: usize) -> Result<AttackResult> {
    cpa_with(ts, &[n_used], ScoreMode::MaxOverSamples)
}

/// CPA evaluated at every checkpoint in a single pass over the traces.
pub fn cpa_with(ts: &TraceSet, checkpoints: &[usize], mode: ScoreMode) -> Result<AttackResult> {
    check_checkpoints(checkpoints, ts.len())?;
    let cols = score_columns(ts, mode)?;
    let n_max = *checkpoints.last().unwrap();
    let traces = &ts.traces[..n_max];
    let shift: Vec<f64> = cols.iter().map(|&j| traces[0].samples[j]).collect();

    // guess-independent column sums at each checkpoint
    let mut col_sums: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(checkpoints.len());
    {
        let mut sa = vec![0.0; cols.len()];
        let mut saa = vec![0.0; cols.len()];
        let mut next = 0;
        for (i, t) in traces.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                let a = t.samples[j] - shift[c];
                sa[c] += a;
                saa[c] += a * a;
            }
            if i + 1 == checkpoints[next] {
                col_sums.push((sa.clone(), saa.clone()));
                next += 1;
            }
        }
    }

    let models = model_table();
    let corr: Vec<Vec<f64>> = (0..N_GUESSES)
        .into_par_iter()
        .map(|g| {
            let model = &models[g];
            let b0 = model[traces[0].plaintext as usize];
            let (mut sb, mut sbb) = (0.0, 0.0);
            let mut sab = vec![0.0; cols.len()];
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for (i, t) in traces.iter().enumerate() {
                let b = model[t.plaintext as usize] - b0;
                sb += b;
                sbb += b * b;
                for (c, &j) in cols.iter().enumerate() {
                    sab[c] += (t.samples[j] - shift[c]) * b;
                }
                if i + 1 == checkpoints[next] {
                    let n = (i + 1) as f64;
                    let (sa, saa) = &col_sums[next];
                    out.push(max_abs(
                        (0..cols.len()).map(|c| correlation_from_sums(n, sa[c], sb, saa[c], sbb, sab[c])),
                    ));
                    next += 1;
                }
            }
            out
        })
        .collect();

    Ok(assemble(checkpoints, mode, corr, ts.true_key))
}

/// Direct recomputation of every (guess, checkpoint, sample) correlation from
/// scratch. Quadratic in checkpoints; meant for cross-checking [`cpa_with`].
pub fn cpa_oracle(ts: &TraceSet, checkpoints: &[usize], mode: ScoreMode) -> Result<AttackResult> {
    check_checkpoints(checkpoints, ts.len())?;
    let cols = score_columns(ts, mode)?;
    let traces = &ts.traces;
    let corr: Vec<Vec<f64>> = (0..N_GUESSES)
        .map(|g| {
            let hw = |i: usize| hamming_weight(sbox_intermediate(traces[i].plaintext, g as u8)) as f64;
            checkpoints
                .iter()
                .map(|&n| {
                    let mut best = 0.0f64;
                    for &j in &cols {
                        let (a0, b0) = (traces[0].samples[j], hw(0));
                        let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                        for i in 0..n {
                            let a = traces[i].samples[j] - a0;
                            let b = hw(i) - b0;
                            sa += a;
                            saa += a * a;
                            sb += b;
                            sbb += b * b;
                            sab += a * b;
                        }
                        best = best.max(correlation_from_sums(n as f64, sa, sb, saa, sbb, sab).abs());
                    }
                    best
                })
                .collect()
        })
        .collect();
    Ok(assemble(checkpoints, mode, corr, ts.true_key))
}

/// Textbook two-pass Pearson correlation; 0 when either input is constant.
pub fn pearson_two_pass(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// One-pass shifted Pearson correlation, as used by [`cpa_with`].
pub fn pearson_streaming(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.is_empty() {
        return 0.0;
    }
    let (a0, b0) = (x[0], y[0]);
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (a, b) = (a - a0, b - b0);
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    correlation_from_sums(x.len() as f64, sa, sb, saa, sbb, sab)
}
