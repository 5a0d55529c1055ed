//! Synthetic EM traces of a first-round AES S-box lookup.
//!
//! Each set bit of the S-box output is one load-capacitor charging event,
//! so the leaking sample carries `alpha * HW(SBox(pt ^ key))` times a pulse
//! shaped like the `|di/dt|` of a reference series RC step transition.
//! Adiabatic charging over `T` attenuates `alpha` by `(T_ref / T)^2`.

mod format;
pub mod rng;

pub use format::{read_traceset, write_traces_csv, write_traceset, MAGIC, VERSION};
pub use rng::TraceRng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::energy::RadiationLaw;
use crate::error::{Error, Result, ValidationError};
use crate::transient::{AnalyticSolution, DriveMode};

/// AES S-box.
pub const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

#[inline]
pub fn sbox_intermediate(pt: u8, key: u8) -> u8 {
    SBOX[(pt ^ key) as usize]
}

#[inline]
pub fn hamming_weight(byte: u8) -> u32 {
    byte.count_ones()
}

/// The reference transition whose `|di/dt|` shapes every leakage pulse:
/// series RC, 90 + 10 ohm, 10 fF, 1 V, so `tau = 1 ps`.
pub fn reference_spec() -> CircuitSpec {
    CircuitSpec::series_rc(90.0, 10.0, 10e-15, 1.0)
}

/// Pulse of `|di/dt|` of a step transition of `spec`, sampled every `dt_s`:
/// `pre` zero samples before the step, the peak, then `post` decaying samples.
/// Normalized to a peak of exactly 1.
pub fn step_pulse(spec: &CircuitSpec, dt_s: f64, pre: usize, post: usize) -> Result<Vec<f64>> {
    let sol = AnalyticSolution::new(spec, DriveMode::StepCharge)?;
    let tail: Vec<f64> = (0..=post).map(|k| sol.sample(k as f64 * dt_s).di_dt.abs()).collect();
    let peak = tail.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::validation("reference transition has no current slope"));
    }
    let mut pulse = vec![0.0; pre];
    pulse.extend(tail.iter().map(|x| x / peak));
    Ok(pulse)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageParams {
    /// Volts per switched bit.
    pub alpha: f64,
    /// Constant baseline, volts.
    pub beta: f64,
    /// Additive Gaussian noise standard deviation, volts.
    pub sigma: f64,
    /// Unit-peak pulse; its peak lands on `poi`.
    pub pulse: Vec<f64>,
    pub n_samples: usize,
    pub poi: usize,
    /// Adiabatic ramp time replacing the reference step transition.
    pub countermeasure_t_s: Option<f64>,
    /// Effective transition time of the reference step.
    pub t_ref_s: f64,
    pub attenuation_law: RadiationLaw,
}

impl LeakageParams {
    /// Reference leakage: 24 samples, poi 8, 7-sample pulse of the reference
    /// step sampled at its time constant, unit alpha and sigma.
    pub fn reference() -> Self {
        let spec = reference_spec();
        let tau = spec.total_resistance() * spec.c_farad;
        Self {
            alpha: 1.0,
            beta: 0.0,
            sigma: 1.0,
            pulse: step_pulse(&spec, tau, 3, 3).expect("reference spec is valid"),
            n_samples: 24,
            poi: 8,
            countermeasure_t_s: None,
            t_ref_s: tau,
            attenuation_law: RadiationLaw::Acceleration,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        let mut errs = Vec::new();
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            errs.push(format!("alpha must be non-negative (got {})", self.alpha));
        }
        if !self.beta.is_finite() {
            errs.push(format!("beta must be finite (got {})", self.beta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            errs.push(format!("sigma must be non-negative (got {})", self.sigma));
        }
        if self.pulse.is_empty() || self.pulse.iter().any(|p| !p.is_finite()) {
            errs.push("pulse must be non-empty and finite".into());
        } else if self.pulse.iter().cloned().fold(f64::MIN, f64::max) != 1.0 {
            errs.push("pulse peak must be exactly 1".into());
        }
        if self.n_samples == 0 {
            errs.push("n_samples must be positive".into());
        }
        if self.poi >= self.n_samples {
            errs.push(format!("poi {} outside trace of {} samples", self.poi, self.n_samples));
        }
        if !(self.t_ref_s > 0.0 && self.t_ref_s.is_finite()) {
            errs.push(format!("t_ref_s must be positive (got {})", self.t_ref_s));
        }
        if let Some(t) = self.countermeasure_t_s {
            if !(t > 0.0 && t.is_finite()) {
                errs.push(format!("countermeasure_t_s must be positive (got {t})"));
            }
        }
        ValidationError::from_messages(errs)
    }

    pub fn attenuation_exponent(&self) -> i32 {
        match self.attenuation_law {
            RadiationLaw::Acceleration => 2,
            RadiationLaw::Resistance => 1,
        }
    }

    /// `(T_ref / T)^2` under the acceleration law, `T_ref / T` under the
    /// resistance law, 1 without a countermeasure.
    pub fn attenuation(&self) -> f64 {
        match self.countermeasure_t_s {
            None => 1.0,
            Some(t) => (self.t_ref_s / t).powi(self.attenuation_exponent()),
        }
    }

    pub fn effective_alpha(&self) -> f64 {
        self.alpha * self.attenuation()
    }

    fn peak_index(&self) -> usize {
        self.pulse
            .iter()
            .position(|&p| p == 1.0)
            .unwrap_or(self.pulse.len() / 2)
    }

    /// Pulse value at trace sample `j`, zero outside the pulse.
    fn pulse_at(&self, j: usize) -> f64 {
        let offset = j as isize - self.poi as isize + self.peak_index() as isize;
        if offset >= 0 && (offset as usize) < self.pulse.len() {
            self.pulse[offset as usize]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<f64>,
    pub plaintext: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub traces: Vec<Trace>,
    pub true_key: u8,
    pub leakage: LeakageParams,
    pub seed: u64,
    pub signal_gain: f64,
    pub interference_gain: f64,
}

impl TraceSet {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.traces.first().map_or(self.leakage.n_samples, |t| t.samples.len())
    }

    pub fn poi(&self) -> usize {
        self.leakage.poi
    }

    /// Leakage-model value of trace `i` under the true key.
    pub fn true_intermediate_hw(&self, i: usize) -> u32 {
        hamming_weight(sbox_intermediate(self.traces[i].plaintext, self.true_key))
    }

    /// First `n` traces.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            traces: self.traces[..n.min(self.len())].to_vec(),
            ..self.clone()
        }
    }
}

/// Gains of one spatial cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGains {
    pub signal: f64,
    pub interference: f64,
    pub sigma: f64,
}

/// Synthesizes one cell. Per trace `i` the stream `(seed, cell, i)` is consumed as:
/// plaintext byte (random mode only), interference byte, then one Gaussian per sample.
fn synth_cell(n: usize, key: u8, params: &LeakageParams, seed: u64, cell: u64, gains: CellGains) -> Result<TraceSet> {
    if n == 0 {
        return Err(Error::validation("trace count must be at least 1"));
    }
    params.validate()?;
    if !(gains.signal >= 0.0 && gains.interference >= 0.0 && gains.sigma >= 0.0) {
        return Err(Error::validation("cell gains and noise must be non-negative"));
    }
    let exhaustive = n.is_multiple_of(256);
    let alpha_eff = params.effective_alpha();
    let pulse: Vec<f64> = (0..params.n_samples).map(|j| params.pulse_at(j)).collect();

    let traces: Vec<Trace> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = TraceRng::for_stream(seed, cell, i as u64);
            let plaintext = if exhaustive { (i % 256) as u8 } else { rng.byte() };
            let other = rng.byte();
            let h = hamming_weight(sbox_intermediate(plaintext, key)) as f64;
            let h_other = hamming_weight(other) as f64;
            let samples = pulse
                .iter()
                .map(|&p| {
                    let crypto = params.beta + alpha_eff * h * p;
                    let interference = params.alpha * h_other * p;
                    gains.signal * crypto + gains.interference * interference + gains.sigma * rng.gaussian()
                })
                .collect();
            Trace { samples, plaintext }
        })
        .collect();

    Ok(TraceSet {
        traces,
        true_key: key,
        leakage: LeakageParams {
            sigma: gains.sigma,
            ..params.clone()
        },
        seed,
        signal_gain: gains.signal,
        interference_gain: gains.interference,
    })
}

/// `n` traces of `beta + alpha_eff * HW(SBox(pt ^ key)) * pulse + N(0, sigma^2)`.
///
/// Plaintexts cycle through `0..=255` when `n` is a multiple of 256 and are
/// uniform random otherwise.
pub fn synth_traceset(n: usize, key: u8, params: &LeakageParams, seed: u64) -> Result<TraceSet> {
    synth_cell(
        n,
        key,
        params,
        seed,
        0,
        CellGains {
            signal: 1.0,
            interference: 0.0,
            sigma: params.sigma,
        },
    )
}

/// Row-major grid of probe positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub signal_gain: Vec<f64>,
    pub interference_gain: Vec<f64>,
    pub noise_sigma: Vec<f64>,
}

impl GridSpec {
    pub fn uniform(rows: usize, cols: usize, signal: f64, interference: f64, sigma: f64) -> Self {
        let n = rows * cols;
        Self {
            rows,
            cols,
            signal_gain: vec![signal; n],
            interference_gain: vec![interference; n],
            noise_sigma: vec![sigma; n],
        }
    }

    /// Synthetic 10x10 scan: the crypto block sits near row 2, column 7; a
    /// larger, busier non-crypto block near row 7, column 2 dominates raw
    /// amplitude without carrying key-dependent signal.
    pub fn fig2_demo() -> Self {
        let (rows, cols) = (10, 10);
        let mut g = Self::uniform(rows, cols, 0.0, 0.0, 1.0);
        for r in 0..rows {
            for c in 0..cols {
                let d_crypto = ((r as f64 - 2.0).powi(2) + (c as f64 - 7.0).powi(2)) / (2.0 * 2.2f64.powi(2));
                let d_busy = ((r as f64 - 7.0).powi(2) + (c as f64 - 2.0).powi(2)) / (2.0 * 3.0f64.powi(2));
                g.signal_gain[r * cols + c] = 0.05 + 0.95 * (-d_crypto).exp();
                g.interference_gain[r * cols + c] = 3.0 * (-d_busy).exp();
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        let mut errs = Vec::new();
        let n = self.len();
        if n == 0 {
            errs.push("grid needs at least one cell".into());
        }
        for (name, v) in [
            ("signal_gain", &self.signal_gain),
            ("interference_gain", &self.interference_gain),
            ("noise_sigma", &self.noise_sigma),
        ] {
            if v.len() != n {
                errs.push(format!("{name} has {} entries, expected {n}", v.len()));
            }
            if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                errs.push(format!("{name} entries must be non-negative"));
            }
        }
        ValidationError::from_messages(errs)
    }

    pub fn cell(&self, index: usize) -> CellGains {
        CellGains {
            signal: self.signal_gain[index],
            interference: self.interference_gain[index],
            sigma: self.noise_sigma[index],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTraces {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<TraceSet>,
}

/// One trace set per grid cell; cell `r * cols + c` uses RNG cell index `r * cols + c`.
pub fn grid_traceset(grid: &GridSpec, base: &LeakageParams, n: usize, key: u8, seed: u64) -> Result<GridTraces> {
    grid.validate()?;
    let cells: Vec<Result<TraceSet>> = (0..grid.len())
        .into_par_iter()
        .map(|k| synth_cell(n, key, base, seed, k as u64, grid.cell(k)))
        .collect();
    Ok(GridTraces {
        rows: grid.rows,
        cols: grid.cols,
        cells: cells.into_iter().collect::<Result<_>>()?,
    })
}
