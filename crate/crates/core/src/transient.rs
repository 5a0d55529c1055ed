//! Voltage and current waveforms of the supported circuits.
//!
//! Two independent routes produce a [`Waveform`]: closed-form solutions
//! ([`solve_analytic`]) and classical fixed-step RK4 integration of the
//! state equations ([`solve_numeric`]). Currents are reported positive in
//! the direction of energy flow: out of the capacitor when discharging,
//! into it when charging.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::circuit::{derive_params, CircuitSpec, Damping, Topology};
use crate::error::{Error, Result};

/// Largest grid a solver will materialise.
pub const MAX_SAMPLES: usize = 25_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt_s: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(dt_s: f64, n_samples: usize) -> Result<Self> {
        let g = Self { dt_s, n_samples };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(Error::validation(format!("dt_s must be positive (got {})", self.dt_s)));
        }
        if self.n_samples < 2 {
            return Err(Error::validation(format!(
                "n_samples must be at least 2 (got {})",
                self.n_samples
            )));
        }
        Ok(())
    }

    pub fn t_end_s(&self) -> f64 {
        self.time(self.n_samples - 1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveMode {
    /// Capacitor starts at `V0`, no source.
    Discharge,
    /// Ideal step to `V_DD` at `t = 0`.
    StepCharge,
    /// Linear ramp `0 -> V_DD` over `ramp_t_s`, then held.
    RampCharge { ramp_t_s: f64 },
}

impl DriveMode {
    pub fn validate(&self) -> Result<()> {
        if let DriveMode::RampCharge { ramp_t_s } = *self {
            if !(ramp_t_s > 0.0 && ramp_t_s.is_finite()) {
                return Err(Error::validation(format!("ramp_t_s must be positive (got {ramp_t_s})")));
            }
        }
        Ok(())
    }

    pub fn is_charge(&self) -> bool {
        !matches!(self, DriveMode::Discharge)
    }

    fn ramp_time(&self) -> Option<f64> {
        match *self {
            DriveMode::RampCharge { ramp_t_s } => Some(ramp_t_s),
            _ => None,
        }
    }
}

/// One time point of a solution.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sample {
    pub v_cap: f64,
    pub i_total: f64,
    /// Branch currents; only meaningful for parallel RC.
    pub i_r: f64,
    pub i_rad: f64,
    pub di_dt: f64,
    pub v_source: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub grid: TimeGrid,
    pub mode: DriveMode,
    pub v_cap: Vec<f64>,
    pub i_total: Vec<f64>,
    pub i_branch_r: Option<Vec<f64>>,
    pub i_branch_rad: Option<Vec<f64>>,
    pub di_dt: Vec<f64>,
    /// Source voltage in the charging modes.
    pub v_source: Option<Vec<f64>>,
}

impl Waveform {
    fn with_capacity(grid: TimeGrid, mode: DriveMode, topology: Topology) -> Self {
        let n = grid.n_samples;
        let branches = topology == Topology::ParallelRc;
        Self {
            grid,
            mode,
            v_cap: Vec::with_capacity(n),
            i_total: Vec::with_capacity(n),
            i_branch_r: branches.then(|| Vec::with_capacity(n)),
            i_branch_rad: branches.then(|| Vec::with_capacity(n)),
            di_dt: Vec::with_capacity(n),
            v_source: mode.is_charge().then(|| Vec::with_capacity(n)),
        }
    }

    fn push(&mut self, s: Sample) {
        self.v_cap.push(s.v_cap);
        self.i_total.push(s.i_total);
        self.di_dt.push(s.di_dt);
        if let Some(v) = &mut self.i_branch_r {
            v.push(s.i_r);
        }
        if let Some(v) = &mut self.i_branch_rad {
            v.push(s.i_rad);
        }
        if let Some(v) = &mut self.v_source {
            v.push(s.v_source);
        }
    }

    pub fn len(&self) -> usize {
        self.v_cap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_cap.is_empty()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            v_cap: self.v_cap[i],
            i_total: self.i_total[i],
            i_r: self.i_branch_r.as_ref().map_or(0.0, |v| v[i]),
            i_rad: self.i_branch_rad.as_ref().map_or(0.0, |v| v[i]),
            di_dt: self.di_dt[i],
            v_source: self.v_source.as_ref().map_or(0.0, |v| v[i]),
        }
    }

    /// Writes `t_s,v_cap_V,i_total_A[,i_r_A,i_rad_A],di_dt_A_per_s` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let branches = self.i_branch_r.is_some();
        if branches {
            writeln!(w, "t_s,v_cap_V,i_total_A,i_r_A,i_rad_A,di_dt_A_per_s")?;
        } else {
            writeln!(w, "t_s,v_cap_V,i_total_A,di_dt_A_per_s")?;
        }
        for i in 0..self.len() {
            let s = self.sample(i);
            write!(w, "{:.16e},{:.16e},{:.16e}", self.grid.time(i), s.v_cap, s.i_total)?;
            if branches {
                write!(w, ",{:.16e},{:.16e}", s.i_r, s.i_rad)?;
            }
            writeln!(w, ",{:.16e}", s.di_dt)?;
        }
        Ok(())
    }
}

/// Time derivative by central differences, one-sided at the ends.
pub fn central_difference(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| match i {
                0 => (values[1] - values[0]) / dt,
                i if i == n - 1 => (values[n - 1] - values[n - 2]) / dt,
                i => (values[i + 1] - values[i - 1]) / (2.0 * dt),
            })
            .collect(),
    }
}

/// Characteristic times of a circuit's natural response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeScales {
    pub fastest_s: f64,
    pub slowest_s: f64,
    /// Damped oscillation period (underdamped RLC only).
    pub period_s: Option<f64>,
    /// Time by which the natural response has decayed below `1e-9` of its start.
    pub settle_s: f64,
}

pub fn time_scales(spec: &CircuitSpec) -> Result<TimeScales> {
    let p = derive_params(spec)?;
    if let Some(tau) = p.tau_s {
        return Ok(TimeScales {
            fastest_s: tau,
            slowest_s: tau,
            period_s: None,
            settle_s: 20.0 * tau,
        });
    }
    let osc = Oscillator::new(spec);
    Ok(match osc.damping {
        Damping::Underdamped | Damping::Critical => {
            let period = (osc.damping == Damping::Underdamped).then(|| 2.0 * PI / osc.omega_d);
            // e^{-x}(1 + x) bounds the envelope near critical damping; x = 25 puts it below 4e-10
            TimeScales {
                fastest_s: 1.0 / osc.omega0,
                slowest_s: 1.0 / osc.alpha,
                period_s: period,
                settle_s: (25.0 / osc.alpha).max(20.0 * period.unwrap_or(0.0)),
            }
        }
        Damping::Overdamped => {
            let slow = -osc.s1;
            let k = (osc.alpha + osc.beta) / (2.0 * osc.beta);
            TimeScales {
                fastest_s: -1.0 / osc.s2,
                slowest_s: 1.0 / slow,
                period_s: None,
                settle_s: (k.ln() + 21.0).max(20.0) / slow,
            }
        }
    })
}

/// Grid with horizon covering the settling of the natural response (after
/// the ramp, in ramp mode) and `dt` of a thousandth of the fastest time scale.
pub fn default_grid(spec: &CircuitSpec, mode: DriveMode) -> Result<TimeGrid> {
    mode.validate()?;
    let ts = time_scales(spec)?;
    let dt = ts.fastest_s / 1000.0;
    let horizon = ts.settle_s + mode.ramp_time().unwrap_or(0.0);
    let n = (horizon / dt).ceil() as usize + 1;
    TimeGrid::new(dt, n.max(2))
}

/// Second-order homogeneous response `x'' + 2 alpha x' + omega0^2 x = 0`.
#[derive(Debug, Clone, Copy)]
struct Oscillator {
    damping: Damping,
    alpha: f64,
    omega0: f64,
    omega_d: f64,
    beta: f64,
    s1: f64,
    s2: f64,
}

impl Oscillator {
    fn new(spec: &CircuitSpec) -> Self {
        let l = spec.inductance();
        let alpha = spec.total_resistance() / (2.0 * l);
        let omega0 = 1.0 / (l * spec.c_farad).sqrt();
        let zeta = alpha / omega0;
        let damping = Damping::classify(zeta);
        let (mut omega_d, mut beta, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0);
        match damping {
            Damping::Underdamped => omega_d = omega0 * (1.0 - zeta * zeta).sqrt(),
            Damping::Critical => {}
            Damping::Overdamped => {
                beta = omega0 * (zeta * zeta - 1.0).sqrt();
                s2 = -(alpha + beta);
                // product of roots is omega0^2; avoids cancellation in -alpha + beta
                s1 = omega0 * omega0 / s2;
            }
        }
        Self {
            damping,
            alpha,
            omega0,
            omega_d,
            beta,
            s1,
            s2,
        }
    }

    /// `(x, x', x'')` at `t` for `x(0) = x0`, `x'(0) = v0`.
    fn eval(&self, t: f64, x0: f64, v0: f64) -> (f64, f64, f64) {
        let a = self.alpha;
        match self.damping {
            Damping::Underdamped => {
                let wd = self.omega_d;
                let e = (-a * t).exp();
                let (s, c) = (wd * t).sin_cos();
                let b = (v0 + a * x0) / wd;
                let p = x0 * c + b * s;
                let dp = wd * (b * c - x0 * s);
                let x = e * p;
                let dx = e * (dp - a * p);
                let ddx = e * ((a * a - wd * wd) * p - 2.0 * a * dp);
                (x, dx, ddx)
            }
            Damping::Critical => {
                let e = (-a * t).exp();
                let b = v0 + a * x0;
                let p = x0 + b * t;
                (e * p, e * (b - a * p), e * (a * a * p - 2.0 * a * b))
            }
            Damping::Overdamped => {
                let (s1, s2) = (self.s1, self.s2);
                let d = s1 - s2;
                let c1 = (v0 - s2 * x0) / d;
                let c2 = (s1 * x0 - v0) / d;
                let (e1, e2) = ((s1 * t).exp(), (s2 * t).exp());
                (
                    c1 * e1 + c2 * e2,
                    c1 * s1 * e1 + c2 * s2 * e2,
                    c1 * s1 * s1 * e1 + c2 * s2 * s2 * e2,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Solution {
    RcDischarge { v0: f64, tau: f64, rt: f64 },
    RcStep { v: f64, tau: f64, rt: f64 },
    RcRamp { v: f64, tau: f64, rt: f64, c: f64, ramp: f64, i_ramp_end: f64 },
    ParallelDischarge { v0: f64, tau: f64, r: f64, r_rad: f64 },
    Rlc { osc: Oscillator, c: f64, v: f64, drive: RlcDrive },
}

#[derive(Debug, Clone, Copy)]
enum RlcDrive {
    Discharge,
    Step,
    /// Charge ramps as `a t + b` plus the homogeneous part; `(q_end, i_end)` is the state at `ramp`.
    Ramp { ramp: f64, a: f64, b: f64, q_end: f64, i_end: f64 },
}

/// Closed-form solution of one (spec, mode) pair, evaluable at any time.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSolution {
    inner: Solution,
}

impl AnalyticSolution {
    pub fn new(spec: &CircuitSpec, mode: DriveMode) -> Result<Self> {
        spec.validate()?;
        mode.validate()?;
        let rt = spec.total_resistance();
        let c = spec.c_farad;
        let v = spec.v0_volt;
        let inner = match (spec.topology, mode) {
            (Topology::SeriesRc, DriveMode::Discharge) => Solution::RcDischarge { v0: v, tau: rt * c, rt },
            (Topology::SeriesRc, DriveMode::StepCharge) => Solution::RcStep { v, tau: rt * c, rt },
            (Topology::SeriesRc, DriveMode::RampCharge { ramp_t_s }) => {
                let tau = rt * c;
                Solution::RcRamp {
                    v,
                    tau,
                    rt,
                    c,
                    ramp: ramp_t_s,
                    i_ramp_end: c * v / ramp_t_s * -(-ramp_t_s / tau).exp_m1(),
                }
            }
            (Topology::ParallelRc, DriveMode::Discharge) => {
                let rp = 1.0 / (1.0 / spec.r_ohm + 1.0 / spec.r_rad_ohm);
                Solution::ParallelDischarge {
                    v0: v,
                    tau: rp * c,
                    r: spec.r_ohm,
                    r_rad: spec.r_rad_ohm,
                }
            }
            (Topology::ParallelRc, _) => return Err(parallel_unsupported(mode)),
            (Topology::SeriesRlc, mode) => {
                let osc = Oscillator::new(spec);
                let drive = match mode {
                    DriveMode::Discharge => RlcDrive::Discharge,
                    DriveMode::StepCharge => RlcDrive::Step,
                    DriveMode::RampCharge { ramp_t_s } => {
                        let a = c * v / ramp_t_s;
                        let b = -rt * c * a;
                        let (h, dh, _) = osc.eval(ramp_t_s, -b, -a);
                        RlcDrive::Ramp {
                            ramp: ramp_t_s,
                            a,
                            b,
                            q_end: a * ramp_t_s + b + h,
                            i_end: a + dh,
                        }
                    }
                };
                Solution::Rlc { osc, c, v, drive }
            }
        };
        Ok(Self { inner })
    }

    pub fn sample(&self, t: f64) -> Sample {
        match self.inner {
            Solution::RcDischarge { v0, tau, rt } => {
                let e = (-t / tau).exp();
                let i = v0 / rt * e;
                Sample {
                    v_cap: v0 * e,
                    i_total: i,
                    di_dt: -i / tau,
                    ..Sample::default()
                }
            }
            Solution::RcStep { v, tau, rt } => {
                let e = (-t / tau).exp();
                let i = v / rt * e;
                Sample {
                    v_cap: -v * (-t / tau).exp_m1(),
                    i_total: i,
                    di_dt: -i / tau,
                    v_source: v,
                    ..Sample::default()
                }
            }
            Solution::RcRamp { v, tau, rt, c, ramp, i_ramp_end } => {
                if t < ramp {
                    let one_minus_e = -(-t / tau).exp_m1();
                    let i_full = c * v / ramp;
                    Sample {
                        v_cap: v / ramp * (t - tau * one_minus_e),
                        i_total: i_full * one_minus_e,
                        di_dt: i_full / tau * (-t / tau).exp(),
                        v_source: v * t / ramp,
                        ..Sample::default()
                    }
                } else {
                    let i = i_ramp_end * (-(t - ramp) / tau).exp();
                    Sample {
                        v_cap: v - i * rt,
                        i_total: i,
                        di_dt: -i / tau,
                        v_source: v,
                        ..Sample::default()
                    }
                }
            }
            Solution::ParallelDischarge { v0, tau, r, r_rad } => {
                let vc = v0 * (-t / tau).exp();
                let (i_r, i_rad) = (vc / r, vc / r_rad);
                let i = i_r + i_rad;
                Sample {
                    v_cap: vc,
                    i_total: i,
                    i_r,
                    i_rad,
                    di_dt: -i / tau,
                    v_source: 0.0,
                }
            }
            Solution::Rlc { osc, c, v, drive } => match drive {
                RlcDrive::Discharge => {
                    let (q, dq, ddq) = osc.eval(t, c * v, 0.0);
                    Sample {
                        v_cap: q / c,
                        i_total: -dq,
                        di_dt: -ddq,
                        ..Sample::default()
                    }
                }
                RlcDrive::Step => {
                    let (h, dh, ddh) = osc.eval(t, -c * v, 0.0);
                    Sample {
                        v_cap: (c * v + h) / c,
                        i_total: dh,
                        di_dt: ddh,
                        v_source: v,
                        ..Sample::default()
                    }
                }
                RlcDrive::Ramp { ramp, a, b, q_end, i_end } => {
                    if t < ramp {
                        let (h, dh, ddh) = osc.eval(t, -b, -a);
                        Sample {
                            v_cap: (a * t + b + h) / c,
                            i_total: a + dh,
                            di_dt: ddh,
                            v_source: v * t / ramp,
                            ..Sample::default()
                        }
                    } else {
                        let (k, dk, ddk) = osc.eval(t - ramp, q_end - c * v, i_end);
                        Sample {
                            v_cap: (c * v + k) / c,
                            i_total: dk,
                            di_dt: ddk,
                            v_source: v,
                            ..Sample::default()
                        }
                    }
                }
            },
        }
    }
}

fn parallel_unsupported(mode: DriveMode) -> Error {
    Error::Unsupported(format!("parallel_rc supports discharge only, not {mode:?}"))
}

fn check_grid_size(grid: &TimeGrid) -> Result<()> {
    grid.validate()?;
    if grid.n_samples > MAX_SAMPLES {
        return Err(Error::validation(format!(
            "grid of {} samples exceeds the {} sample limit",
            grid.n_samples, MAX_SAMPLES
        )));
    }
    Ok(())
}

pub fn solve_analytic(spec: &CircuitSpec, mode: DriveMode, grid: TimeGrid) -> Result<Waveform> {
    check_grid_size(&grid)?;
    let sol = AnalyticSolution::new(spec, mode)?;
    let mut w = Waveform::with_capacity(grid, mode, spec.topology);
    for k in 0..grid.n_samples {
        w.push(sol.sample(grid.time(k)));
    }
    Ok(w)
}

/// Source voltage and its time derivative; right-continuous at the ramp end.
#[derive(Debug, Clone, Copy)]
struct Source {
    v: f64,
    ramp: Option<f64>,
    on: bool,
}

impl Source {
    fn new(spec: &CircuitSpec, mode: DriveMode) -> Self {
        Self {
            v: spec.v0_volt,
            ramp: mode.ramp_time(),
            on: mode.is_charge(),
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> (f64, f64) {
        match (self.on, self.ramp) {
            (false, _) => (0.0, 0.0),
            (true, Some(ramp)) if t < ramp => (self.v * t / ramp, self.v / ramp),
            (true, _) => (self.v, 0.0),
        }
    }
}

#[inline]
fn rk4_step<F: Fn(f64, [f64; 2]) -> [f64; 2]>(f: &F, t: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Fixed-step RK4 over the grid; steps that straddle a breakpoint are split
/// there so the right-hand side is smooth within every sub-step.
fn integrate<F, E>(f: F, y0: [f64; 2], grid: &TimeGrid, breakpoint: Option<f64>, mut emit: E)
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
    E: FnMut(f64, [f64; 2]),
{
    let mut y = y0;
    emit(0.0, y);
    for k in 1..grid.n_samples {
        let (t0, t1) = (grid.time(k - 1), grid.time(k));
        y = match breakpoint {
            Some(b) if t0 < b && b < t1 => {
                let mid = rk4_step(&f, t0, y, b - t0);
                rk4_step(&f, b, mid, t1 - b)
            }
            _ => rk4_step(&f, t0, y, t1 - t0),
        };
        // a long horizon can decay the state into subnormals, where rounding
        // stalls it and every step runs on the slow path
        y = y.map(|v| if v.abs() < f64::MIN_POSITIVE { 0.0 } else { v });
        emit(t1, y);
    }
}

pub fn solve_numeric(spec: &CircuitSpec, mode: DriveMode, grid: TimeGrid) -> Result<Waveform> {
    let mut w = Waveform::with_capacity(grid, mode, spec.topology);
    solve_numeric_with(spec, mode, grid, |s| w.push(s))?;
    Ok(w)
}

/// RK4 solution handed to `sink` one sample at a time, in grid order.
pub fn solve_numeric_with<S: FnMut(Sample)>(spec: &CircuitSpec, mode: DriveMode, grid: TimeGrid, mut sink: S) -> Result<()> {
    spec.validate()?;
    mode.validate()?;
    check_grid_size(&grid)?;
    if spec.topology == Topology::ParallelRc && mode.is_charge() {
        return Err(parallel_unsupported(mode));
    }
    let ts = time_scales(spec)?;
    let limit = ts.fastest_s / 10.0;
    if grid.dt_s > limit {
        return Err(Error::Stability {
            dt_s: grid.dt_s,
            limit_s: limit,
        });
    }

    let src = Source::new(spec, mode);
    let discharge = !mode.is_charge();
    let rt = spec.total_resistance();
    let c = spec.c_farad;
    let v0 = spec.v0_volt;
    let bp = mode.ramp_time();

    match spec.topology {
        Topology::SeriesRc => {
            let tau = rt * c;
            let rhs = move |t: f64, y: [f64; 2]| [(src.eval(t).0 - y[0]) / tau, 0.0];
            let y0 = [if discharge { v0 } else { 0.0 }, 0.0];
            integrate(rhs, y0, &grid, bp, |t, y| {
                let (vs, dvs) = src.eval(t);
                let dv = (vs - y[0]) / tau;
                // loop current into the capacitor; a discharge reports its negation
                let i = (vs - y[0]) / rt;
                let di = (dvs - dv) / rt;
                let sign = if discharge { -1.0 } else { 1.0 };
                sink(Sample {
                    v_cap: y[0],
                    i_total: sign * i,
                    di_dt: sign * di,
                    v_source: vs,
                    ..Sample::default()
                });
            });
        }
        Topology::ParallelRc => {
            let (r, r_rad) = (spec.r_ohm, spec.r_rad_ohm);
            let rp = 1.0 / (1.0 / r + 1.0 / r_rad);
            let tau = rp * c;
            let rhs = move |_t: f64, y: [f64; 2]| [-y[0] / tau, 0.0];
            integrate(rhs, [v0, 0.0], &grid, None, |_t, y| {
                let (i_r, i_rad) = (y[0] / r, y[0] / r_rad);
                sink(Sample {
                    v_cap: y[0],
                    i_total: i_r + i_rad,
                    i_r,
                    i_rad,
                    di_dt: -y[0] / tau / rp,
                    v_source: 0.0,
                });
            });
        }
        Topology::SeriesRlc => {
            let l = spec.inductance();
            // state (q, i) with i = dq/dt
            let rhs = move |t: f64, y: [f64; 2]| [y[1], (src.eval(t).0 - rt * y[1] - y[0] / c) / l];
            let y0 = [if discharge { c * v0 } else { 0.0 }, 0.0];
            integrate(rhs, y0, &grid, bp, |t, y| {
                let vs = src.eval(t).0;
                let di = (vs - rt * y[1] - y[0] / c) / l;
                let sign = if discharge { -1.0 } else { 1.0 };
                sink(Sample {
                    v_cap: y[0] / c,
                    i_total: sign * y[1],
                    di_dt: sign * di,
                    v_source: vs,
                    ..Sample::default()
                });
            });
        }
    }
    Ok(())
}
