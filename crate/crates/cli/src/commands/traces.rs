use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use emleak_core::attack::{
    cpa_oracle, cpa_with, grid_maps, inverse_mtd, linear_checkpoints, mtd_from, snr, spearman, GridMaps, ScoreMode,
    DEFAULT_WINDOW,
};
use emleak_core::tracegen::{
    grid_traceset, read_traceset, synth_traceset, write_traces_csv, write_traceset, GridSpec, LeakageParams, TraceSet,
};
use emleak_core::Error;

use super::circuit::Law;
use crate::output::Outputs;
use crate::svg::{self, LinePlot, Series};
use crate::{Ctx, Format, Mismatch};

const ALL: &[Format] = &[Format::Csv, Format::Json, Format::Svg];

fn parse_byte(s: &str) -> Result<u8, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u8::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}` is not a byte: {e}"))
}

/// JSON number, `"inf"` for infinity, null when absent.
fn snr_value(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_infinite() => json!("inf"),
        Some(x) => json!(x),
        None => Value::Null,
    }
}

#[derive(Args, Clone)]
pub struct LeakArgs {
    /// Number of traces
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Secret key byte, decimal or 0x-prefixed hex
    #[arg(long, default_value = "0x2b", value_parser = parse_byte)]
    key: u8,
    /// Volts per switched bit
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Baseline offset, volts
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Gaussian noise standard deviation, volts
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Samples per trace
    #[arg(long, default_value_t = 24)]
    samples: usize,
    /// Index of the leaking sample
    #[arg(long, default_value_t = 8)]
    poi: usize,
    /// Adiabatic countermeasure ramp time as a multiple of the reference transition time
    #[arg(long)]
    countermeasure_ratio: Option<f64>,
    /// Attenuation law of the countermeasure
    #[arg(long, value_enum, default_value_t = Law::Acceleration)]
    law: Law,
}

impl LeakArgs {
    fn params(&self) -> LeakageParams {
        let base = LeakageParams::reference();
        LeakageParams {
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            n_samples: self.samples,
            poi: self.poi,
            countermeasure_t_s: self.countermeasure_ratio.map(|k| k * base.t_ref_s),
            attenuation_law: self.law.into(),
            ..base
        }
    }
}

#[derive(Args)]
pub struct SynthArgs {
    #[command(flatten)]
    leak: LeakArgs,
}

fn class_mean_svg(ts: &TraceSet, stamp: Option<&str>) -> String {
    let m = ts.n_samples();
    let mut sums = vec![vec![0.0; m]; 9];
    let mut counts = [0usize; 9];
    for (i, t) in ts.traces.iter().enumerate() {
        let h = ts.true_intermediate_hw(i) as usize;
        counts[h] += 1;
        for (s, x) in sums[h].iter_mut().zip(&t.samples) {
            *s += x;
        }
    }
    let series = (0..9)
        .filter(|&h| counts[h] > 0)
        .map(|h| {
            let shade = 40 + 20 * h as u8;
            let pts = sums[h].iter().enumerate().map(|(j, s)| (j as f64, s / counts[h] as f64)).collect();
            Series {
                name: format!("HW {h}"),
                color: format!("#{shade:02x}{:02x}{:02x}", 60, 255 - shade),
                width: 1.5,
                points: pts,
            }
        })
        .collect();
    let plot = LinePlot {
        title: format!("Mean trace per Hamming-weight class ({} traces)", ts.len()),
        x_label: "sample".into(),
        y_label: "V".into(),
        log_x: false,
        log_y: false,
        series,
        notes: vec![format!("poi = {}", ts.poi())],
    };
    svg::line_plot(&plot, stamp)
}

pub fn synth(ctx: &Ctx, a: &SynthArgs) -> anyhow::Result<Outputs> {
    let params = a.leak.params();
    let ts = synth_traceset(a.leak.n, a.leak.key, &params, ctx.seed)?;
    let mut out = Outputs::default();
    let mut bin = Vec::new();
    write_traceset(&mut bin, &ts)?;
    out.add("traces.emlk", bin);
    if ctx.wants(Format::Csv, ALL) {
        let mut buf = Vec::new();
        write_traces_csv(&mut buf, &ts)?;
        out.add("traces.csv", buf);
    }
    if ctx.wants(Format::Json, ALL) {
        out.add_json(
            "traces.json",
            &json!({
                "meta": ctx.meta("synth"),
                "n_traces": ts.len(),
                "key": ts.true_key,
                "leakage": params,
                "attenuation": params.attenuation(),
                "plaintexts": if ts.len() % 256 == 0 { "exhaustive" } else { "random" },
                "file": "traces.emlk",
            }),
        )?;
    }
    if ctx.wants(Format::Svg, ALL) {
        out.add_text("traces.svg", class_mean_svg(&ts, ctx.stamp.as_deref()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Score {
    /// Highest |r| over all samples
    Max,
    /// |r| at the point of interest
    Poi,
}

impl From<Score> for ScoreMode {
    fn from(s: Score) -> Self {
        match s {
            Score::Max => ScoreMode::MaxOverSamples,
            Score::Poi => ScoreMode::PoiOnly,
        }
    }
}

#[derive(Args)]
pub struct AttackArgs {
    /// Trace file from `emleak synth`; without it traces are synthesized from the leakage flags
    #[arg(long)]
    traces: Option<PathBuf>,
    #[command(flatten)]
    leak: LeakArgs,
    /// Explicit comma-separated checkpoints (trace counts)
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    /// Checkpoint spacing when no explicit list is given
    #[arg(long, default_value_t = 10)]
    step: usize,
    /// Consecutive rank-1 checkpoints required for disclosure
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value_t = Score::Max)]
    score: Score,
    /// Recompute every correlation by brute force and require an exact match
    #[arg(long)]
    oracle: bool,
}

fn curves_svg(res: &emleak_core::attack::AttackResult, stamp: Option<&str>) -> String {
    let curve = |g: usize| -> Vec<(f64, f64)> {
        res.checkpoints.iter().zip(&res.corr[g]).map(|(&n, &r)| (n as f64, r)).collect()
    };
    let mut series: Vec<Series> = (0..256)
        .filter(|&g| g != res.true_key as usize)
        .map(|g| Series {
            name: String::new(),
            color: svg::GREY.into(),
            width: 0.6,
            points: curve(g),
        })
        .collect();
    series.push(Series::new(format!("key 0x{:02x}", res.true_key), svg::HEAT, curve(res.true_key as usize)));
    series.push(Series {
        name: "other guesses".into(),
        color: svg::GREY.into(),
        width: 0.6,
        points: Vec::new(),
    });
    let plot = LinePlot {
        title: "CPA: |r| vs number of traces".into(),
        x_label: "traces".into(),
        y_label: "|r|".into(),
        log_x: false,
        log_y: false,
        series,
        notes: vec![format!("recovered 0x{:02x}", res.recovered_key)],
    };
    svg::line_plot(&plot, stamp)
}

fn checkpoints_for(explicit: &Option<Vec<usize>>, step: usize, n: usize) -> anyhow::Result<Vec<usize>> {
    Ok(match explicit {
        Some(list) => list.clone(),
        None => linear_checkpoints(step, n)?,
    })
}

pub fn attack(ctx: &Ctx, a: &AttackArgs) -> anyhow::Result<Outputs> {
    let (ts, source) = match &a.traces {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let ts = read_traceset(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
            (ts, json!({ "file": path.display().to_string() }))
        }
        None => {
            let params = a.leak.params();
            let ts = synth_traceset(a.leak.n, a.leak.key, &params, ctx.seed)?;
            (ts, json!({ "synthesized": params }))
        }
    };
    let cps = checkpoints_for(&a.checkpoints, a.step, ts.len())?;
    let mode = ScoreMode::from(a.score);
    let res = cpa_with(&ts, &cps, mode)?;
    let mtd = mtd_from(&res, a.window)?;
    let snr = snr(&ts)?;
    let oracle = if a.oracle {
        if cpa_oracle(&ts, &cps, mode)? != res {
            return Err(Mismatch("fast CPA differs from the brute-force oracle".into()).into());
        }
        "match"
    } else {
        "not_run"
    };

    let mut out = Outputs::default();
    if ctx.wants(Format::Json, ALL) {
        out.add_json(
            "attack.json",
            &json!({
                "schema": 1,
                "meta": ctx.meta("attack"),
                "source": source,
                "n_traces": ts.len(),
                "attack": res,
                "mtd": mtd,
                "snr": snr,
                "oracle": oracle,
            }),
        )?;
    }
    if ctx.wants(Format::Csv, ALL) {
        let mut buf = Vec::new();
        res.write_curves_csv(&mut buf)?;
        out.add("curves.csv", buf);
    }
    if ctx.wants(Format::Svg, ALL) {
        out.add_text("curves.svg", curves_svg(&res, ctx.stamp.as_deref()));
    }
    Ok(out)
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    leak: LeakArgs,
    /// Countermeasure ramp times as multiples of the reference transition time
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10")]
    t_ratios: Vec<f64>,
    /// Traces used for the SNR estimate
    #[arg(long, default_value_t = 10_000)]
    n_snr: usize,
    /// Checkpoint spacing for MTD
    #[arg(long, default_value_t = 10)]
    step: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Paired seeds (seed, seed + 1, ...) per row; MTD is their median
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, value_enum, default_value_t = Score::Max)]
    score: Score,
}

/// Median with undisclosed runs counted as infinite.
pub fn median_mtd(values: &[Option<usize>]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|m| m.map_or(f64::INFINITY, |n| n as f64)).collect();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

struct Row {
    ratio: Option<f64>,
    t_s: Option<f64>,
    attenuation: f64,
    poi_snr: Option<f64>,
    mtds: Vec<Option<usize>>,
}

pub fn evaluate(ctx: &Ctx, a: &EvaluateArgs) -> anyhow::Result<Outputs> {
    if a.t_ratios.is_empty() || a.t_ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::validation("--t-ratios needs at least one positive value").into());
    }
    if a.repeats == 0 {
        return Err(Error::validation("--repeats must be at least 1").into());
    }
    let base = a.leak.params();
    let cps = linear_checkpoints(a.step, a.leak.n)?;
    let mode = ScoreMode::from(a.score);
    let rows: Vec<Row> = std::iter::once(None)
        .chain(a.t_ratios.iter().map(|&r| Some(r)))
        .map(|ratio| -> anyhow::Result<Row> {
            let params = LeakageParams {
                countermeasure_t_s: ratio.map(|k| k * base.t_ref_s),
                ..base.clone()
            };
            let mtds = (0..a.repeats as u64)
                .map(|k| -> anyhow::Result<Option<usize>> {
                    let ts = synth_traceset(a.leak.n, a.leak.key, &params, ctx.seed.wrapping_add(k))?;
                    Ok(mtd_from(&cpa_with(&ts, &cps, mode)?, a.window)?.mtd)
                })
                .collect::<anyhow::Result<_>>()?;
            let ts = synth_traceset(a.n_snr, a.leak.key, &params, ctx.seed)?;
            Ok(Row {
                ratio,
                t_s: params.countermeasure_t_s,
                attenuation: params.attenuation(),
                poi_snr: snr(&ts)?.poi_snr,
                mtds,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let base_snr = rows[0].poi_snr;
    let snr_ratio = |r: &Row| match (r.poi_snr, base_snr) {
        (Some(s), Some(b)) if b.is_finite() && b > 0.0 => Some(s / b),
        _ => None,
    };
    let fmt_opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.17e}"));
    let fmt_mtd = |m: f64| {
        if m.is_finite() {
            format!("{m}")
        } else {
            "not_disclosed".to_string()
        }
    };

    let mut out = Outputs::default();
    if ctx.wants(Format::Csv, ALL) {
        let mut s = String::from(
            "t_over_t_ref,t_s,attenuation,poi_snr,snr_ratio,expected_snr_ratio,mtd_median,disclosed_runs,runs\n",
        );
        for r in &rows {
            s.push_str(&format!(
                "{},{},{:.17e},{},{},{:.17e},{},{},{}\n",
                r.ratio.map_or("baseline".to_string(), |x| format!("{x}")),
                fmt_opt(r.t_s),
                r.attenuation,
                match r.poi_snr {
                    Some(x) if x.is_infinite() => "inf".to_string(),
                    v => fmt_opt(v),
                },
                fmt_opt(snr_ratio(r)),
                r.attenuation * r.attenuation,
                fmt_mtd(median_mtd(&r.mtds)),
                r.mtds.iter().filter(|m| m.is_some()).count(),
                r.mtds.len(),
            ));
        }
        out.add_text("evaluate.csv", s);
    }
    if ctx.wants(Format::Json, ALL) {
        let table: Vec<Value> = rows
            .iter()
            .map(|r| {
                let med = median_mtd(&r.mtds);
                json!({
                    "t_over_t_ref": r.ratio,
                    "t_s": r.t_s,
                    "attenuation": r.attenuation,
                    "poi_snr": snr_value(r.poi_snr),
                    "snr_ratio": snr_ratio(r),
                    "expected_snr_ratio": r.attenuation * r.attenuation,
                    "mtd_median": if med.is_finite() { json!(med) } else { json!("not_disclosed") },
                    "mtd_runs": r.mtds,
                })
            })
            .collect();
        out.add_json(
            "evaluate.json",
            &json!({
                "schema": 1,
                "meta": ctx.meta("evaluate"),
                "leakage": base,
                "n_traces": a.leak.n,
                "n_snr": a.n_snr,
                "checkpoints": cps,
                "window": a.window,
                "repeats": a.repeats,
                "rows": table,
            }),
        )?;
    }
    if ctx.wants(Format::Svg, ALL) {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.ratio?, median_mtd(&r.mtds))))
            .filter(|(_, m)| m.is_finite())
            .collect();
        let mut notes = vec![format!("baseline MTD {}", fmt_mtd(median_mtd(&rows[0].mtds)))];
        let undisclosed: Vec<String> = rows
            .iter()
            .filter(|r| !median_mtd(&r.mtds).is_finite())
            .filter_map(|r| r.ratio.map(|x| format!("{x}")))
            .collect();
        if !undisclosed.is_empty() {
            notes.push(format!("not disclosed at T/T_ref = {}", undisclosed.join(", ")));
        }
        let plot = LinePlot {
            title: "MTD vs adiabatic ramp time".into(),
            x_label: "T / T_ref".into(),
            y_label: "median MTD (traces)".into(),
            log_x: true,
            log_y: true,
            series: vec![Series::new("MTD", svg::HEAT, pts)],
            notes,
        };
        out.add_text("evaluate.svg", svg::line_plot(&plot, ctx.stamp.as_deref()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Fig2Demo,
    Uniform,
}

#[derive(Args)]
pub struct GridArgs {
    /// Built-in gain layout
    #[arg(long, value_enum, default_value_t = Preset::Fig2Demo, conflicts_with = "grid_file")]
    preset: Preset,
    /// JSON grid: rows, cols and row-major signal_gain, interference_gain, noise_sigma
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Traces per cell
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value = "0x2b", value_parser = parse_byte)]
    key: u8,
    /// Volts per switched bit
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Checkpoint spacing for MTD
    #[arg(long, default_value_t = 20)]
    step: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value_t = Score::Max)]
    score: Score,
}

/// Spearman over cells where both values are present.
pub fn paired_spearman(x: &[Option<f64>], y: &[Option<f64>]) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter_map(|(p, q)| Some(((*p)?, (*q)?))).unzip();
    spearman(&a, &b).ok()
}

pub fn grid_stats(maps: &GridMaps) -> (Option<f64>, Option<f64>) {
    let inv: Vec<Option<f64>> = inverse_mtd(&maps.mtd).into_iter().map(Some).collect();
    (paired_spearman(&maps.amplitude, &maps.snr), paired_spearman(&maps.snr, &inv))
}

pub fn grid(ctx: &Ctx, a: &GridArgs) -> anyhow::Result<Outputs> {
    let spec = match &a.grid_file {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            serde_json::from_reader::<_, GridSpec>(BufReader::new(f))
                .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?
        }
        None => match a.preset {
            Preset::Fig2Demo => GridSpec::fig2_demo(),
            Preset::Uniform => GridSpec::uniform(10, 10, 1.0, 0.0, 1.0),
        },
    };
    let base = LeakageParams {
        alpha: a.alpha,
        ..LeakageParams::reference()
    };
    let cps = linear_checkpoints(a.step, a.n)?;
    let traces = grid_traceset(&spec, &base, a.n, a.key, ctx.seed)?;
    let maps = grid_maps(&traces, &cps, a.window, a.score.into());
    let (s_amp_snr, s_snr_mtd) = grid_stats(&maps);

    let mut out = Outputs::default();
    if ctx.wants(Format::Csv, ALL) {
        let mut s = String::from("row,col,signal_gain,interference_gain,noise_sigma,amplitude,poi_snr,mtd\n");
        for k in 0..spec.len() {
            s.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{},{},{}\n",
                k / spec.cols,
                k % spec.cols,
                spec.signal_gain[k],
                spec.interference_gain[k],
                spec.noise_sigma[k],
                maps.amplitude[k].map_or("none".into(), |v| format!("{v:.17e}")),
                match maps.snr[k] {
                    Some(v) if v.is_infinite() => "inf".into(),
                    Some(v) => format!("{v:.17e}"),
                    None => "none".into(),
                },
                maps.mtd[k].map_or("not_disclosed".into(), |v| v.to_string()),
            ));
        }
        out.add_text("grid.csv", s);
    }
    if ctx.wants(Format::Json, ALL) {
        out.add_json(
            "grid.json",
            &json!({
                "schema": 1,
                "meta": ctx.meta("grid"),
                "grid": spec,
                "leakage": base,
                "n_traces": a.n,
                "checkpoints": cps,
                "window": a.window,
                "maps": maps,
                "spearman_amplitude_snr": s_amp_snr,
                "spearman_snr_inverse_mtd": s_snr_mtd,
            }),
        )?;
    }
    if ctx.wants(Format::Svg, ALL) {
        let stamp = ctx.stamp.as_deref();
        let (r, c) = (spec.rows, spec.cols);
        out.add_text(
            "grid_amplitude.svg",
            svg::heatmap("Signal amplitude (mean |poi|)", r, c, &maps.amplitude, false, "undefined", stamp),
        );
        out.add_text(
            "grid_snr.svg",
            svg::heatmap("SNR at poi (log)", r, c, &maps.snr, true, "undefined", stamp),
        );
        let mtd: Vec<Option<f64>> = maps.mtd.iter().map(|m| m.map(|n| n as f64)).collect();
        out.add_text(
            "grid_mtd.svg",
            svg::heatmap("Minimum traces to disclosure (log)", r, c, &mtd, true, "not disclosed", stamp),
        );
    }
    Ok(out)
}
