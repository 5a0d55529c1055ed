//! Where the switched energy goes: Joule heat in `R` versus radiation.
//!
//! Partitions are computed either by integrating a sampled [`Waveform`]
//! with the trapezoidal rule or from closed forms. Sweeps over the
//! conductive resistance and over the adiabatic ramp time build the
//! heat/radiation curves.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, Topology};
use crate::error::{Error, Result};
use crate::transient::{default_grid, solve_numeric_with, AnalyticSolution, DriveMode, Sample, Waveform};

/// Largest fraction of `E0` allowed to remain in the circuit at the end of a waveform.
pub const RESIDUAL_ENERGY_BOUND: f64 = 1e-12;

/// Energies in joules. Fractions are taken over the total loss `E_heat + E_rad`
/// and are both zero when nothing was lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPartition {
    pub e_supplied_j: f64,
    pub e_stored_j: f64,
    pub e_heat_j: f64,
    pub e_rad_j: f64,
    pub e0_j: f64,
    pub heat_frac: f64,
    pub rad_frac: f64,
}

impl EnergyPartition {
    pub fn new(e_supplied_j: f64, e_stored_j: f64, e_heat_j: f64, e_rad_j: f64, e0_j: f64) -> Self {
        let total = e_heat_j + e_rad_j;
        let (heat_frac, rad_frac) = if total > 0.0 {
            (e_heat_j / total, e_rad_j / total)
        } else {
            (0.0, 0.0)
        };
        Self {
            e_supplied_j,
            e_stored_j,
            e_heat_j,
            e_rad_j,
            e0_j,
            heat_frac,
            rad_frac,
        }
    }

    pub fn total_loss_j(&self) -> f64 {
        self.e_heat_j + self.e_rad_j
    }

    /// Same partition with every energy expressed as a fraction of `E0`.
    pub fn relative_to_e0(&self) -> Self {
        let s = 1.0 / self.e0_j;
        Self {
            e_supplied_j: self.e_supplied_j * s,
            e_stored_j: self.e_stored_j * s,
            e_heat_j: self.e_heat_j * s,
            e_rad_j: self.e_rad_j * s,
            e0_j: 1.0,
            ..*self
        }
    }
}

/// How radiated power is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiationLaw {
    /// `P_rad = R_rad i^2`
    Resistance,
    /// `P_rad = k_rad (di/dt)^2`
    Acceleration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticModel {
    pub radiation_law: RadiationLaw,
    /// Ohm s^2. `None` calibrates against the spec's own step response.
    pub k_rad: Option<f64>,
}

impl AdiabaticModel {
    pub fn resistance() -> Self {
        Self {
            radiation_law: RadiationLaw::Resistance,
            k_rad: None,
        }
    }

    pub fn acceleration(k_rad: Option<f64>) -> Self {
        Self {
            radiation_law: RadiationLaw::Acceleration,
            k_rad,
        }
    }

    /// Coefficient of the acceleration law.
    ///
    /// The calibrated default `R_rad tau^2` makes `k_rad ∫(di/dt)^2` of the
    /// series RC step response equal `E0 R_rad / (R + R_rad)`, its
    /// resistance-law radiation.
    pub fn resolve_k_rad(&self, reference: &CircuitSpec) -> Result<f64> {
        let k = match self.k_rad {
            Some(k) => k,
            None => {
                let tau = reference.total_resistance() * reference.c_farad;
                reference.r_rad_ohm * tau * tau
            }
        };
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::validation(format!(
                "acceleration law needs k_rad > 0 (got {k}; calibration uses r_rad_ohm, which must be positive)"
            )));
        }
        Ok(k)
    }
}

/// Running trapezoidal integral on a uniform grid.
#[derive(Debug, Clone, Copy, Default)]
struct Trapezoid {
    sum: f64,
    first: f64,
    last: f64,
    n: usize,
}

impl Trapezoid {
    #[inline]
    fn push(&mut self, y: f64) {
        if self.n == 0 {
            self.first = y;
        }
        self.last = y;
        self.sum += y;
        self.n += 1;
    }

    fn integral(&self, dt: f64) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        dt * (self.sum - 0.5 * (self.first + self.last))
    }
}

/// Integrals needed for a partition, accumulated sample by sample.
#[derive(Debug, Clone, Copy, Default)]
struct PowerIntegrals {
    i_sq: Trapezoid,
    i_r_sq: Trapezoid,
    i_rad_sq: Trapezoid,
    di_dt_sq: Trapezoid,
    supplied: Trapezoid,
    last: Sample,
}

impl PowerIntegrals {
    #[inline]
    fn push(&mut self, s: Sample) {
        self.i_sq.push(s.i_total * s.i_total);
        self.i_r_sq.push(s.i_r * s.i_r);
        self.i_rad_sq.push(s.i_rad * s.i_rad);
        self.di_dt_sq.push(s.di_dt * s.di_dt);
        self.supplied.push(s.v_source * s.i_total);
        self.last = s;
    }

    fn partition(&self, spec: &CircuitSpec, mode: DriveMode, dt: f64, k_rad: Option<f64>) -> Result<EnergyPartition> {
        let e0 = spec.e0_j();
        let end = self.last;
        let settle_v = if mode.is_charge() {
            spec.v0_volt - end.v_cap
        } else {
            end.v_cap
        };
        let remaining = 0.5 * spec.c_farad * settle_v * settle_v + 0.5 * spec.inductance() * end.i_total * end.i_total;
        let residual = remaining / e0;
        if !(residual <= RESIDUAL_ENERGY_BOUND) {
            return Err(Error::Accuracy {
                residual,
                bound: RESIDUAL_ENERGY_BOUND,
            });
        }

        let (heat, rad_resistive) = match spec.topology {
            Topology::ParallelRc => (
                spec.r_ohm * self.i_r_sq.integral(dt),
                spec.r_rad_ohm * self.i_rad_sq.integral(dt),
            ),
            _ => {
                let i_sq = self.i_sq.integral(dt);
                (spec.r_ohm * i_sq, spec.r_rad_ohm * i_sq)
            }
        };
        let rad = match k_rad {
            Some(k) => k * self.di_dt_sq.integral(dt),
            None => rad_resistive,
        };
        let supplied = if mode.is_charge() {
            self.supplied.integral(dt)
        } else {
            0.0
        };
        let stored = 0.5 * spec.c_farad * end.v_cap * end.v_cap;
        Ok(EnergyPartition::new(supplied, stored, heat, rad, e0))
    }
}

/// Trapezoidal heat/radiation integrals of a waveform under the resistance law.
///
/// Fails with [`Error::Accuracy`] when more than [`RESIDUAL_ENERGY_BOUND`]
/// of `E0` is still stored in `C` and `L` at the last sample.
pub fn integrate_power(w: &Waveform, spec: &CircuitSpec) -> Result<EnergyPartition> {
    integrate_power_with(w, spec, &AdiabaticModel::resistance())
}

pub fn integrate_power_with(w: &Waveform, spec: &CircuitSpec, model: &AdiabaticModel) -> Result<EnergyPartition> {
    spec.validate()?;
    if w.len() < 2 {
        return Err(Error::InsufficientData("waveform needs at least two samples".into()));
    }
    let k_rad = match model.radiation_law {
        RadiationLaw::Resistance => None,
        RadiationLaw::Acceleration => Some(model.resolve_k_rad(spec)?),
    };
    let mut acc = PowerIntegrals::default();
    for k in 0..w.len() {
        acc.push(w.sample(k));
    }
    acc.partition(spec, w.mode, w.grid.dt_s, k_rad)
}

/// Same result as [`integrate_power`] on the default-grid numeric waveform,
/// without storing the waveform.
pub fn numeric_partition(spec: &CircuitSpec, mode: DriveMode) -> Result<EnergyPartition> {
    let grid = default_grid(spec, mode)?;
    let mut acc = PowerIntegrals::default();
    solve_numeric_with(spec, mode, grid, |s| acc.push(s))?;
    acc.partition(spec, mode, grid.dt_s, None)
}

/// Discharge partition from the closed forms.
///
/// Series topologies share one loop current, so `E_heat : E_rad = R : R_rad`.
/// The parallel branches share one voltage, which swaps the ratio.
pub fn closed_form_partition(spec: &CircuitSpec) -> Result<EnergyPartition> {
    spec.validate()?;
    let e0 = spec.e0_j();
    let (r, r_rad) = (spec.r_ohm, spec.r_rad_ohm);
    let total = r + r_rad;
    let (heat, rad) = match spec.topology {
        Topology::SeriesRc | Topology::SeriesRlc => (e0 * r / total, e0 * r_rad / total),
        Topology::ParallelRc => (e0 * r_rad / total, e0 * r / total),
    };
    Ok(EnergyPartition::new(0.0, 0.0, heat, rad, e0))
}

/// Partition of a series RC charged by a linear ramp of duration `ramp_t_s`.
///
/// The exact piecewise waveform is sampled on the default grid and streamed
/// through the trapezoidal integrals without being stored.
pub fn adiabatic_partition(spec: &CircuitSpec, ramp_t_s: f64, model: &AdiabaticModel) -> Result<EnergyPartition> {
    spec.validate()?;
    if spec.topology != Topology::SeriesRc {
        return Err(Error::Unsupported(format!(
            "adiabatic charging is modelled for series_rc only, not {}",
            spec.topology
        )));
    }
    let mode = DriveMode::RampCharge { ramp_t_s };
    mode.validate()?;
    let grid = default_grid(spec, mode)?;
    if ramp_t_s < 10.0 * grid.dt_s {
        return Err(Error::validation(format!(
            "ramp time {ramp_t_s:e} s is below 10 dt ({:e} s); use step charging instead",
            10.0 * grid.dt_s
        )));
    }
    let k_rad = match model.radiation_law {
        RadiationLaw::Resistance => None,
        RadiationLaw::Acceleration => Some(model.resolve_k_rad(spec)?),
    };
    let sol = AnalyticSolution::new(spec, mode)?;
    let mut acc = PowerIntegrals::default();
    for k in 0..grid.n_samples {
        acc.push(sol.sample(grid.time(k)));
    }
    acc.partition(spec, mode, grid.dt_s, k_rad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Conductive resistance `R`, ohms.
    Resistance,
    /// Ramp duration `T`, seconds.
    RampTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Absolute,
    FractionOfE0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub partitions: Vec<EnergyPartition>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyField {
    Heat,
    Rad,
}

impl SweepResult {
    pub fn field(&self, field: EnergyField) -> Vec<f64> {
        self.partitions
            .iter()
            .map(|p| match field {
                EnergyField::Heat => p.e_heat_j,
                EnergyField::Rad => p.e_rad_j,
            })
            .collect()
    }

    pub fn to_fractions_of_e0(&self) -> Self {
        Self {
            partitions: self.partitions.iter().map(EnergyPartition::relative_to_e0).collect(),
            normalization: Normalization::FractionOfE0,
            ..self.clone()
        }
    }

    /// `field` divided by its value at the first (smallest) axis point.
    pub fn normalized_to_first(&self, field: EnergyField) -> Vec<f64> {
        let v = self.field(field);
        let first = v.first().copied().unwrap_or(1.0);
        v.iter().map(|x| x / first).collect()
    }

    /// `axis,e_heat_j,e_rad_j,e_stored_j,e_supplied_j,heat_frac,rad_frac`
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "axis,e_heat_j,e_rad_j,e_stored_j,e_supplied_j,heat_frac,rad_frac")?;
        for (x, p) in self.values.iter().zip(&self.partitions) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                x, p.e_heat_j, p.e_rad_j, p.e_stored_j, p.e_supplied_j, p.heat_frac, p.rad_frac
            )?;
        }
        Ok(())
    }
}

fn check_axis(values: &[f64], allow_zero: bool, name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::validation(format!("{name} sweep needs at least one point")));
    }
    for &v in values {
        let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !ok {
            return Err(Error::validation(format!("{name} sweep value {v} out of range")));
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!("{name} sweep values must be strictly increasing")));
    }
    Ok(())
}

/// Evaluates `f` at every point in parallel; the first failing point in axis order wins.
fn par_points<F>(values: &[f64], f: F) -> Result<Vec<EnergyPartition>>
where
    F: Fn(f64) -> Result<EnergyPartition> + Sync,
{
    let results: Vec<Result<EnergyPartition>> = values.par_iter().map(|&x| f(x)).collect();
    results.into_iter().collect()
}

pub fn sweep_resistance(template: &CircuitSpec, r_values: &[f64], method: SweepMethod) -> Result<SweepResult> {
    check_axis(r_values, true, "resistance")?;
    let partitions = par_points(r_values, |r| {
        let spec = template.with_r(r);
        let point = match method {
            SweepMethod::ClosedForm => closed_form_partition(&spec),
            SweepMethod::Numeric => numeric_partition(&spec, DriveMode::Discharge),
        };
        point.map_err(|e| Error::SweepPoint {
            r_ohm: r,
            source: Box::new(e),
        })
    })?;
    Ok(SweepResult {
        axis: SweepAxis::Resistance,
        values: r_values.to_vec(),
        partitions,
        normalization: Normalization::Absolute,
    })
}

pub fn sweep_ramp_time(spec: &CircuitSpec, t_values: &[f64], model: &AdiabaticModel) -> Result<SweepResult> {
    check_axis(t_values, false, "ramp time")?;
    // calibrate once against the unswept spec so every point shares k_rad
    let model = match model.radiation_law {
        RadiationLaw::Acceleration => AdiabaticModel::acceleration(Some(model.resolve_k_rad(spec)?)),
        RadiationLaw::Resistance => *model,
    };
    let partitions = par_points(t_values, |t| {
        adiabatic_partition(spec, t, &model).map_err(|e| Error::RampPoint {
            t_s: t,
            source: Box::new(e),
        })
    })?;
    Ok(SweepResult {
        axis: SweepAxis::RampTime,
        values: t_values.to_vec(),
        partitions,
        normalization: Normalization::Absolute,
    })
}

/// Least-squares slope of `ln(field)` against `ln(axis)` over axis points in `[lo, hi]`.
pub fn loglog_slope(sweep: &SweepResult, field: EnergyField, range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = range;
    let ys = sweep.field(field);
    let pts: Vec<(f64, f64)> = sweep
        .values
        .iter()
        .zip(&ys)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs at least 3 points in [{lo:e}, {hi:e}], found {}",
            pts.len()
        )));
    }
    if let Some((x, y)) = pts.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::validation(format!(
            "log-log fit needs positive values (axis {x:e}, value {y:e})"
        )));
    }
    Ok(least_squares_slope(pts.iter().map(|(x, y)| (x.ln(), y.ln()))))
}

fn least_squares_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| match k {
                    0 => lo,
                    k if k == n - 1 => hi,
                    k => 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}
