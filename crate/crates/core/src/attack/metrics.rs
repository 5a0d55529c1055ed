use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use super::{cpa_with, AttackResult, ScoreMode};
use crate::error::{Error, Result, ValidationError};
use crate::tracegen::{GridTraces, TraceSet};

pub const DEFAULT_WINDOW: usize = 5;

/// Writes `None` as null and infinities as the string `"inf"`.
fn ser_snr<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
    }
}

fn ser_snr_vec<S: Serializer>(v: &[Option<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Cell<'a>(&'a Option<f64>);
    impl Serialize for Cell<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            ser_snr(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&Cell(x))?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrReport {
    /// Per sample; `None` where signal and noise variance are both zero.
    #[serde(serialize_with = "ser_snr_vec")]
    pub per_sample: Vec<Option<f64>>,
    pub poi: usize,
    #[serde(serialize_with = "ser_snr")]
    pub poi_snr: Option<f64>,
    /// Trace count per Hamming-weight class of the true-key intermediate.
    pub class_counts: [usize; 9],
}

#[derive(Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }
}

/// Variance of Hamming-weight class means over the mean within-class
/// variance, both weighted by class size.
pub fn snr(ts: &TraceSet) -> Result<SnrReport> {
    let m = ts.n_samples();
    let mut classes = vec![[Welford::default(); 9]; m];
    let mut class_counts = [0usize; 9];
    for (i, t) in ts.traces.iter().enumerate() {
        let h = ts.true_intermediate_hw(i) as usize;
        class_counts[h] += 1;
        for (j, &x) in t.samples.iter().enumerate() {
            classes[j][h].push(x);
        }
    }
    if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::InsufficientData(
            "SNR needs at least two populated Hamming-weight classes".into(),
        ));
    }
    let n = ts.len() as f64;
    let per_sample: Vec<Option<f64>> = classes
        .iter()
        .map(|cls| {
            let mean = cls.iter().map(|c| c.n as f64 * c.mean).sum::<f64>() / n;
            let signal = cls.iter().map(|c| c.n as f64 * (c.mean - mean).powi(2)).sum::<f64>() / n;
            let noise = cls.iter().map(|c| c.m2).sum::<f64>() / n;
            if noise > 0.0 {
                Some(signal / noise)
            } else if signal > 0.0 {
                Some(f64::INFINITY)
            } else {
                None
            }
        })
        .collect();
    let poi = ts.poi();
    Ok(SnrReport {
        poi_snr: per_sample.get(poi).copied().flatten(),
        per_sample,
        poi,
        class_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtdResult {
    /// `None`: not disclosed within the checkpoints.
    pub mtd: Option<usize>,
    pub checkpoints: Vec<usize>,
    pub stability_window: usize,
    pub true_key_rank: Vec<usize>,
}

/// First checkpoint from which the true key ranks first at `window`
/// consecutive checkpoints. The window must fit inside the checkpoint list.
pub fn mtd_from(attack: &AttackResult, window: usize) -> Result<MtdResult> {
    if window == 0 {
        return Err(Error::validation("stability window must be at least 1"));
    }
    let ranks = &attack.true_key_rank;
    let mtd = (0..ranks.len())
        .find(|&k| k + window <= ranks.len() && ranks[k..k + window].iter().all(|&r| r == 1))
        .map(|k| attack.checkpoints[k]);
    Ok(MtdResult {
        mtd,
        checkpoints: attack.checkpoints.clone(),
        stability_window: window,
        true_key_rank: ranks.clone(),
    })
}

pub fn mtd(ts: &TraceSet, checkpoints: &[usize], window: usize, mode: ScoreMode) -> Result<MtdResult> {
    if window == 0 {
        return Err(Error::validation("stability window must be at least 1"));
    }
    mtd_from(&cpa_with(ts, checkpoints, mode)?, window)
}

/// `step, 2 step, ...` up to and including `max`.
pub fn linear_checkpoints(step: usize, max: usize) -> Result<Vec<usize>> {
    if step == 0 || max < step.max(2) {
        return Err(ValidationError::new(format!("no checkpoints with step {step} up to {max}")).into());
    }
    Ok((1..=max / step).map(|k| k * step).filter(|&c| c >= 2).collect())
}

/// Row-major maps; `None` marks a cell whose value is undefined or failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMaps {
    pub rows: usize,
    pub cols: usize,
    pub amplitude: Vec<Option<f64>>,
    #[serde(serialize_with = "ser_snr_vec")]
    pub snr: Vec<Option<f64>>,
    pub mtd: Vec<Option<usize>>,
    pub errors: Vec<Option<String>>,
}

pub fn grid_maps(grid: &GridTraces, checkpoints: &[usize], window: usize, mode: ScoreMode) -> GridMaps {
    let cells: Vec<(Option<f64>, Option<f64>, Option<usize>, Option<String>)> = grid
        .cells
        .par_iter()
        .map(|ts| {
            let poi = ts.poi();
            let amplitude = (!ts.is_empty() && poi < ts.n_samples())
                .then(|| ts.traces.iter().map(|t| t.samples[poi].abs()).sum::<f64>() / ts.len() as f64);
            let mut errs = Vec::new();
            let snr = snr(ts).map_err(|e| errs.push(e.to_string())).ok().and_then(|r| r.poi_snr);
            let mtd = mtd(ts, checkpoints, window, mode)
                .map_err(|e| errs.push(e.to_string()))
                .ok()
                .and_then(|r| r.mtd);
            (amplitude, snr, mtd, (!errs.is_empty()).then(|| errs.join("; ")))
        })
        .collect();
    let mut maps = GridMaps {
        rows: grid.rows,
        cols: grid.cols,
        amplitude: Vec::with_capacity(cells.len()),
        snr: Vec::with_capacity(cells.len()),
        mtd: Vec::with_capacity(cells.len()),
        errors: Vec::with_capacity(cells.len()),
    };
    for (a, s, m, e) in cells {
        maps.amplitude.push(a);
        maps.snr.push(s);
        maps.mtd.push(m);
        maps.errors.push(e);
    }
    maps
}

/// `1 / MTD`, with undisclosed cells at 0.
pub fn inverse_mtd(mtd: &[Option<usize>]) -> Vec<f64> {
    mtd.iter().map(|m| m.map_or(0.0, |n| 1.0 / n as f64)).collect()
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "spearman needs two equal-length series of at least 2 (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::validation("spearman input contains NaN"));
    }
    Ok(super::pearson_two_pass(&average_ranks(x), &average_ranks(y)))
}
