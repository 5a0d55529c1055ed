use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde_json::json;

use emleak_core::circuit::{derive_params, parse_kv, CircuitSpec, Resolved, SpecConfig, Topology};
use emleak_core::energy::{
    logspace, loglog_slope, sweep_ramp_time, sweep_resistance, AdiabaticModel, EnergyField, RadiationLaw, SweepMethod,
    SweepResult,
};
use emleak_core::transient::{default_grid, solve_analytic, solve_numeric, DriveMode, TimeGrid, Waveform};
use emleak_core::Error;

use crate::output::Outputs;
use crate::svg::{self, LinePlot, Series};
use crate::{Ctx, Format};

const SVG_MAX_POINTS: usize = 2000;

/// Reads a circuit spec: `key = value` text, or JSON with the same keys.
pub fn load_config(path: &Path) -> anyhow::Result<SpecConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    if is_json {
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())).into())
    } else {
        Ok(parse_kv(&text).with_context(|| format!("in {}", path.display()))?)
    }
}

fn resolve(cfg: &SpecConfig) -> anyhow::Result<Resolved> {
    let r = cfg.resolve()?;
    for w in &r.warnings {
        eprintln!("emleak: warning: {w}");
    }
    Ok(r)
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Discharge,
    Step,
    Ramp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Solver {
    Numeric,
    Analytic,
}

#[derive(Args)]
pub struct TransientArgs {
    /// Circuit spec file (key = value, or JSON)
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Discharge)]
    mode: Mode,
    /// Ramp duration in seconds (ramp mode)
    #[arg(long)]
    ramp_t: Option<f64>,
    #[arg(long, value_enum, default_value_t = Solver::Numeric)]
    solver: Solver,
    /// Time step in seconds (default: fastest time scale / 1000)
    #[arg(long)]
    dt: Option<f64>,
    /// End time in seconds (default: settled horizon)
    #[arg(long)]
    t_end: Option<f64>,
}

fn drive_mode(mode: Mode, ramp_t: Option<f64>) -> anyhow::Result<DriveMode> {
    Ok(match mode {
        Mode::Discharge => DriveMode::Discharge,
        Mode::Step => DriveMode::StepCharge,
        Mode::Ramp => DriveMode::RampCharge {
            ramp_t_s: ramp_t.ok_or_else(|| Error::validation("--mode ramp needs --ramp-t"))?,
        },
    })
}

fn downsample(t: impl Fn(usize) -> f64, y: &[f64], scale: f64) -> Vec<(f64, f64)> {
    let stride = y.len().div_ceil(SVG_MAX_POINTS).max(1);
    (0..y.len()).step_by(stride).map(|i| (t(i), y[i] / scale)).collect()
}

fn waveform_svg(w: &Waveform, spec: &CircuitSpec, stamp: Option<&str>) -> String {
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let t = |i: usize| w.grid.time(i);
    let plot = LinePlot {
        title: format!("{} transient", spec.topology),
        x_label: "t (s)".into(),
        y_label: "normalized".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series::new("v_cap / V0", svg::RADIATION, downsample(t, &w.v_cap, spec.v0_volt)),
            Series::new("i_total / peak", svg::HEAT, downsample(t, &w.i_total, peak(&w.i_total))),
        ],
        notes: vec![format!("peak i = {:.4e} A", peak(&w.i_total))],
    };
    svg::line_plot(&plot, stamp)
}

pub fn transient(ctx: &Ctx, a: &TransientArgs) -> anyhow::Result<Outputs> {
    let resolved = resolve(&load_config(&a.spec)?)?;
    let spec = resolved.spec;
    let mode = drive_mode(a.mode, a.ramp_t)?;
    let default = default_grid(&spec, mode)?;
    let grid = match (a.dt, a.t_end) {
        (None, None) => default,
        (dt, t_end) => {
            let dt = dt.unwrap_or(default.dt_s);
            let t_end = t_end.unwrap_or(default.t_end_s());
            if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
                return Err(Error::validation("--dt and --t-end must be positive").into());
            }
            let n = (t_end / dt).ceil();
            if n > emleak_core::transient::MAX_SAMPLES as f64 {
                return Err(Error::validation(format!("{n} samples exceed the limit")).into());
            }
            TimeGrid::new(dt, n as usize + 1)?
        }
    };
    let w = match a.solver {
        Solver::Numeric => solve_numeric(&spec, mode, grid)?,
        Solver::Analytic => solve_analytic(&spec, mode, grid)?,
    };

    const DEFAULTS: &[Format] = &[Format::Csv];
    let mut out = Outputs::default();
    if ctx.wants(Format::Csv, DEFAULTS) {
        let mut buf = Vec::new();
        w.write_csv(&mut buf)?;
        out.add("waveform.csv", buf);
    }
    if ctx.wants(Format::Json, DEFAULTS) {
        out.add_json(
            "waveform.json",
            &json!({
                "meta": ctx.meta("transient"),
                "spec": spec,
                "geometry": resolved.geometry,
                "warnings": resolved.warnings,
                "derived": derive_params(&spec)?,
                "mode": mode,
                "grid": grid,
                "solver": format!("{:?}", a.solver).to_lowercase(),
                "columns": "waveform.csv",
            }),
        )?;
    }
    if ctx.wants(Format::Svg, DEFAULTS) {
        out.add_text("waveform.svg", waveform_svg(&w, &spec, ctx.stamp.as_deref()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Args)]
pub struct Fig3Args {
    /// Circuit spec template; its r_ohm is replaced by the sweep
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's topology (l_henry is dropped for RC topologies)
    #[arg(long, value_parser = parse_topology)]
    topology: Option<Topology>,
    /// Lowest R in ohms (default: r_rad / 1000)
    #[arg(long)]
    r_min: Option<f64>,
    /// Highest R in ohms (default: r_rad * 1000)
    #[arg(long)]
    r_max: Option<f64>,
    /// Log-spaced sweep points
    #[arg(long, default_value_t = 61)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Method::ClosedForm)]
    method: Method,
}

/// Resistance where heat and radiation curves cross, interpolated in log R.
pub fn crossing(sweep: &SweepResult) -> Option<f64> {
    let d: Vec<f64> = sweep.partitions.iter().map(|p| p.e_heat_j - p.e_rad_j).collect();
    (0..d.len().saturating_sub(1)).find_map(|k| {
        let (x0, x1) = (sweep.values[k], sweep.values[k + 1]);
        if d[k] == 0.0 {
            Some(x0)
        } else if d[k].signum() != d[k + 1].signum() && x0 > 0.0 {
            let f = d[k] / (d[k] - d[k + 1]);
            Some((x0.ln() + f * (x1.ln() - x0.ln())).exp())
        } else {
            None
        }
    })
}

pub fn fig3(ctx: &Ctx, a: &Fig3Args) -> anyhow::Result<Outputs> {
    let mut cfg = load_config(&a.spec)?;
    if let Some(t) = a.topology {
        cfg.topology = Some(t);
        if t != Topology::SeriesRlc {
            cfg.l_henry = None;
        }
    }
    let spec = resolve(&cfg)?.spec;
    let r_min = a.r_min.unwrap_or(spec.r_rad_ohm * 1e-3);
    let r_max = a.r_max.unwrap_or(spec.r_rad_ohm * 1e3);
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || a.points < 2 {
        return Err(Error::validation(format!(
            "need 0 < r_min < r_max and at least 2 points (got {r_min}..{r_max}, {} points)",
            a.points
        ))
        .into());
    }
    let method = match a.method {
        Method::ClosedForm => SweepMethod::ClosedForm,
        Method::Numeric => SweepMethod::Numeric,
    };
    let sweep = sweep_resistance(&spec, &logspace(r_min, r_max, a.points), method)?;
    let cross = crossing(&sweep);

    const DEFAULTS: &[Format] = &[Format::Csv, Format::Json, Format::Svg];
    let mut out = Outputs::default();
    if ctx.wants(Format::Csv, DEFAULTS) {
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf)?;
        out.add("fig3.csv", buf);
    }
    if ctx.wants(Format::Json, DEFAULTS) {
        out.add_json(
            "fig3.json",
            &json!({
                "meta": ctx.meta("fig3"),
                "spec": spec,
                "method": method,
                "r_range_ohm": [r_min, r_max],
                "crossing_r_ohm": cross,
                "sweep": sweep,
            }),
        )?;
    }
    if ctx.wants(Format::Svg, DEFAULTS) {
        let frac = |f: EnergyField| -> Vec<(f64, f64)> {
            sweep
                .values
                .iter()
                .zip(sweep.field(f))
                .zip(&sweep.partitions)
                .map(|((&r, e), p)| (r, e / p.e0_j))
                .collect()
        };
        let mut notes = vec![format!("R_rad = {:.4e} ohm", spec.r_rad_ohm)];
        if let Some(c) = cross {
            notes.push(format!("crossing R = {c:.4e} ohm"));
        }
        let plot = LinePlot {
            title: format!("Energy lost vs R ({})", spec.topology),
            x_label: "R (ohm)".into(),
            y_label: "energy / E0".into(),
            log_x: true,
            log_y: false,
            series: vec![
                Series::new("E_heat", svg::HEAT, frac(EnergyField::Heat)),
                Series::new("E_rad", svg::RADIATION, frac(EnergyField::Rad)),
            ],
            notes,
        };
        out.add_text("fig3.svg", svg::line_plot(&plot, ctx.stamp.as_deref()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Law {
    Acceleration,
    Resistance,
}

impl From<Law> for RadiationLaw {
    fn from(l: Law) -> Self {
        match l {
            Law::Acceleration => RadiationLaw::Acceleration,
            Law::Resistance => RadiationLaw::Resistance,
        }
    }
}

#[derive(Args)]
pub struct Fig4Args {
    /// Series RC circuit spec
    #[arg(long)]
    spec: PathBuf,
    /// Shortest ramp time in units of tau = (R + R_rad) C
    #[arg(long, default_value_t = 1.0)]
    t_min_tau: f64,
    /// Longest ramp time in units of tau
    #[arg(long, default_value_t = 1e4)]
    t_max_tau: f64,
    /// Log-spaced sweep points
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Radiated power model
    #[arg(long, value_enum, default_value_t = Law::Acceleration)]
    law: Law,
    /// Acceleration-law coefficient in ohm s^2 (default: R_rad tau^2)
    #[arg(long)]
    k_rad: Option<f64>,
}

pub fn fig4(ctx: &Ctx, a: &Fig4Args) -> anyhow::Result<Outputs> {
    let spec = resolve(&load_config(&a.spec)?)?.spec;
    if spec.topology != Topology::SeriesRc {
        return Err(Error::Unsupported(format!("ramp-time sweep needs series_rc, not {}", spec.topology)).into());
    }
    if !(a.t_min_tau > 0.0 && a.t_max_tau > a.t_min_tau && a.t_max_tau.is_finite()) || a.points < 2 {
        return Err(Error::validation("need 0 < t_min_tau < t_max_tau and at least 2 points").into());
    }
    let tau = spec.total_resistance() * spec.c_farad;
    let model = match a.law {
        Law::Acceleration => AdiabaticModel::acceleration(a.k_rad),
        Law::Resistance => AdiabaticModel::resistance(),
    };
    let k_rad = match a.law {
        Law::Acceleration => Some(model.resolve_k_rad(&spec)?),
        Law::Resistance => None,
    };
    let sweep = sweep_ramp_time(&spec, &logspace(a.t_min_tau * tau, a.t_max_tau * tau, a.points), &model)?;
    let fit = (1e2 * tau * (1.0 - 1e-9), 1e4 * tau * (1.0 + 1e-9));
    let heat_slope = loglog_slope(&sweep, EnergyField::Heat, fit).ok();
    let rad_slope = loglog_slope(&sweep, EnergyField::Rad, fit).ok();
    let rad_norm = sweep.normalized_to_first(EnergyField::Rad);

    const DEFAULTS: &[Format] = &[Format::Csv, Format::Json, Format::Svg];
    let mut out = Outputs::default();
    if ctx.wants(Format::Csv, DEFAULTS) {
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf)?;
        out.add("fig4.csv", buf);
    }
    if ctx.wants(Format::Json, DEFAULTS) {
        out.add_json(
            "fig4.json",
            &json!({
                "meta": ctx.meta("fig4"),
                "spec": spec,
                "tau_s": tau,
                "radiation_law": RadiationLaw::from(a.law),
                "k_rad_ohm_s2": k_rad,
                "normalization": {
                    "csv": "absolute joules",
                    "plot_heat": "fraction of E0",
                    "plot_rad": "relative to the shortest ramp time",
                },
                "slope_fit_range_s": [1e2 * tau, 1e4 * tau],
                "heat_loglog_slope": heat_slope,
                "rad_loglog_slope": rad_slope,
                "rad_normalized": rad_norm,
                "sweep": sweep,
            }),
        )?;
    }
    if ctx.wants(Format::Svg, DEFAULTS) {
        let heat: Vec<(f64, f64)> = sweep
            .values
            .iter()
            .zip(&sweep.partitions)
            .map(|(&t, p)| (t, p.e_heat_j / p.e0_j))
            .collect();
        let rad: Vec<(f64, f64)> = sweep.values.iter().copied().zip(rad_norm.iter().copied()).collect();
        let mut notes = Vec::new();
        if let Some(s) = heat_slope {
            notes.push(format!("heat slope {s:.2}"));
        }
        if let Some(s) = rad_slope {
            notes.push(format!("rad slope {s:.2}"));
        }
        notes.push(format!("tau = {tau:.3e} s"));
        let plot = LinePlot {
            title: "Adiabatic charging: energy vs ramp time".into(),
            x_label: "T (s)".into(),
            y_label: "E_heat / E0, E_rad / E_rad(T_min)".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series::new("E_heat", svg::HEAT, heat),
                Series::new("E_rad (norm.)", svg::RADIATION, rad),
            ],
            notes,
        };
        out.add_text("fig4.svg", svg::line_plot(&plot, ctx.stamp.as_deref()));
    }
    Ok(out)
}
