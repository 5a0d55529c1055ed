//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test -p emleak-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use emleak_core::attack::{
    cpa, cpa_oracle, cpa_with, grid_maps, inverse_mtd, linear_checkpoints, mtd, snr, spearman, ScoreMode,
    DEFAULT_WINDOW,
};
use emleak_core::circuit::{CircuitSpec, Topology};
use emleak_core::energy::{
    adiabatic_partition, closed_form_partition, numeric_partition, logspace, loglog_slope, sweep_ramp_time,
    AdiabaticModel, EnergyField, EnergyPartition,
};
use emleak_core::tracegen::{grid_traceset, read_traceset, synth_traceset, GridSpec, LeakageParams, TraceRng};
use emleak_core::transient::DriveMode;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut TraceRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.uniform() * (hi.ln() - lo.ln())).exp()
}

/// Random spec with R / R_rad log-uniform over [1e-3, 1e3]. Series RLC
/// cycles through underdamped (zeta in [0.02, 0.1)), near-critical
/// (|zeta - 1| < 0.01) and overdamped (zeta in (10, 11]) draws.
fn random_spec(topology: Topology, k: u64) -> CircuitSpec {
    let mut rng = TraceRng::for_stream(2024, topology as u64, k);
    let r_rad = log_uniform(&mut rng, 1.0, 100.0);
    let r = r_rad * log_uniform(&mut rng, 1e-3, 1e3);
    let c = log_uniform(&mut rng, 1e-15, 1e-12);
    let v0 = 0.5 + 2.8 * rng.uniform();
    match topology {
        Topology::SeriesRc => CircuitSpec::series_rc(r, r_rad, c, v0),
        Topology::ParallelRc => CircuitSpec::parallel_rc(r, r_rad, c, v0),
        Topology::SeriesRlc => {
            let u = rng.uniform();
            let zeta = match k % 3 {
                0 => 0.02 + 0.08 * u,
                1 => 1.0 + 0.0198 * (u - 0.5),
                _ => 10.0 + (1.0 - u),
            };
            let rt = r + r_rad;
            CircuitSpec::series_rlc(r, r_rad, c * rt * rt / (4.0 * zeta * zeta), c, v0)
        }
    }
}

struct BatchPoint {
    spec: CircuitSpec,
    numeric: EnergyPartition,
    closed: EnergyPartition,
}

struct Batch {
    points: Vec<BatchPoint>,
    elapsed: Duration,
}

const PER_TOPOLOGY: u64 = 100;

fn batch() -> Batch {
    let start = Instant::now();
    let mut points = Vec::new();
    for topology in Topology::ALL {
        for k in 0..PER_TOPOLOGY {
            let spec = random_spec(topology, k);
            points.push(BatchPoint {
                numeric: numeric_partition(&spec, DriveMode::Discharge).expect("numeric"),
                closed: closed_form_partition(&spec).expect("closed form"),
                spec,
            });
        }
    }
    Batch {
        points,
        elapsed: start.elapsed(),
    }
}

fn c1_conservation(b: &Batch) -> Outcome {
    let worst = |f: fn(&BatchPoint) -> &EnergyPartition| {
        b.points
            .iter()
            .map(|p| {
                let e = f(p);
                rel(e.e_heat_j + e.e_rad_j, p.spec.e0_j())
            })
            .fold(0.0, f64::max)
    };
    let (num, closed) = (worst(|p| &p.numeric), worst(|p| &p.closed));
    let secs = b.elapsed.as_secs_f64();
    check(
        num <= 1e-6 && closed <= 1e-12 && secs <= 30.0,
        format!(
            "{} specs: numeric max rel {num:.2e} (<= 1e-6), closed form {closed:.2e} (<= 1e-12), {secs:.1} s (<= 30 s)",
            b.points.len()
        ),
    )
}

fn c2_oracle(b: &Batch) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in &b.points {
        worst = worst
            .max(rel(p.numeric.e_heat_j, p.closed.e_heat_j))
            .max(rel(p.numeric.e_rad_j, p.closed.e_rad_j));
    }
    let secs = b.elapsed.as_secs_f64() + start.elapsed().as_secs_f64();
    check(
        worst <= 1e-5 && secs <= 60.0,
        format!("max rel deviation of heat and radiation {worst:.2e} (<= 1e-5) over R/R_rad in [1e-3, 1e3], {secs:.1} s (<= 60 s)"),
    )
}

fn c3_ratio(b: &Batch) -> Outcome {
    let mut worst = 0.0f64;
    for p in b.points.iter().filter(|p| p.spec.topology.is_series()) {
        worst = worst.max(rel(p.numeric.e_heat_j / p.numeric.e_rad_j, p.spec.r_ohm / p.spec.r_rad_ohm));
    }
    // radiative limit, closed form and numeric
    let mut rad_frac_small_r = f64::INFINITY;
    for spec in [
        CircuitSpec::series_rc(0.0, 10.0, 1e-14, 1.0),
        CircuitSpec::series_rlc(0.0, 10.0, 1e-9, 1e-14, 1.0),
        CircuitSpec::series_rc(1e-6, 10.0, 1e-14, 1.0),
    ] {
        let n = numeric_partition(&spec, DriveMode::Discharge).unwrap();
        let c = closed_form_partition(&spec).unwrap();
        rad_frac_small_r = rad_frac_small_r.min(n.rad_frac).min(c.rad_frac);
    }
    let n_series = b.points.iter().filter(|p| p.spec.topology.is_series()).count();
    check(
        worst <= 1e-6 && rad_frac_small_r >= 1.0 - 1e-6,
        format!(
            "{n_series} series RC/RLC specs: max rel |E_heat/E_rad - R/R_rad| {worst:.2e} (<= 1e-6); rad_frac at R -> 0 is {rad_frac_small_r:.9}"
        ),
    )
}

fn c4_crossing(bin: &Path) -> Outcome {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let out = tempfile::tempdir().unwrap();
    for t in Topology::ALL {
        let spec = match t {
            Topology::SeriesRc => CircuitSpec::series_rc(10.0, 10.0, 1e-14, 1.0),
            Topology::ParallelRc => CircuitSpec::parallel_rc(10.0, 10.0, 1e-14, 1.0),
            Topology::SeriesRlc => CircuitSpec::series_rlc(10.0, 10.0, 1e-9, 1e-14, 1.0),
        };
        let p = closed_form_partition(&spec).unwrap();
        let half = 0.5 * spec.e0_j();
        worst = worst.max(rel(p.e_heat_j, half)).max(rel(p.e_rad_j, half));

        let dir = out.path().join(t.token());
        let status = Command::new(bin)
            .args(["fig3", "--spec", data("rlc.spec").to_str().unwrap(), "--topology", t.token()])
            .args(["--format", "json", "--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.join("fig3.json")).unwrap()).unwrap();
        let cross = json["crossing_r_ohm"].as_f64().unwrap_or(f64::NAN);
        let err = rel(cross, json["spec"]["r_rad_ohm"].as_f64().unwrap());
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        notes.push(format!("{}: crossing {cross:.6}", t.token()));
    }
    check(
        worst <= 1e-6,
        format!("heat = rad = E0/2 at R = R_rad, max rel {worst:.2e} (<= 1e-6); {}", notes.join(", ")),
    )
}

fn ramp_spec() -> CircuitSpec {
    CircuitSpec::series_rc(90.0, 10.0, 1e-14, 1.0)
}

fn c5_adiabatic() -> Outcome {
    let spec = ramp_spec();
    let tau = spec.total_resistance() * spec.c_farad;
    let t = 100.0 * tau;
    let heat = adiabatic_partition(&spec, t, &AdiabaticModel::resistance()).unwrap().e_heat_j;
    let limit = spec.c_farad.powi(2) * spec.v0_volt.powi(2) * spec.r_ohm / t;
    let err = rel(heat, limit);
    let sweep = sweep_ramp_time(&spec, &logspace(1e2 * tau, 1e4 * tau, 9), &AdiabaticModel::resistance()).unwrap();
    let slope = loglog_slope(&sweep, EnergyField::Heat, (0.0, f64::INFINITY)).unwrap();
    check(
        err <= 0.02 && (slope + 1.0).abs() <= 0.05,
        format!("E_heat(100 tau) within {:.3}% of C^2V^2R/T (<= 2%); slope {slope:.4} (-1.00 +/- 0.05)", 100.0 * err),
    )
}

fn c6_inverse_square() -> Outcome {
    let spec = ramp_spec();
    let tau = spec.total_resistance() * spec.c_farad;
    let model = AdiabaticModel::acceleration(None);
    let sweep = sweep_ramp_time(&spec, &logspace(1e2 * tau, 1e4 * tau, 9), &model).unwrap();
    let slope = loglog_slope(&sweep, EnergyField::Rad, (0.0, f64::INFINITY)).unwrap();
    let pair = sweep_ramp_time(&spec, &[1e3 * tau, 2e3 * tau], &model).unwrap();
    let ratio = pair.partitions[1].e_rad_j / pair.partitions[0].e_rad_j;
    check(
        (slope + 2.0).abs() <= 0.05 && (ratio - 0.25).abs() <= 0.01,
        format!("radiation slope {slope:.4} (-2.00 +/- 0.05); E_rad(2T)/E_rad(T) at T = 1000 tau = {ratio:.5} (0.25 +/- 0.01)"),
    )
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn c7_cpa() -> Outcome {
    let start = Instant::now();
    let clean = LeakageParams {
        sigma: 0.0,
        ..LeakageParams::reference()
    };
    let ts = synth_traceset(256, 0x2b, &clean, 1).unwrap();
    let r = cpa_with(&ts, &[256], ScoreMode::PoiOnly).unwrap();
    let noiseless_ok = r.success && r.true_key_rank == [1] && (r.corr[0x2b][0] - 1.0).abs() < 1e-12;

    let noisy = read_traceset(std::fs::File::open(data("noisy.emlk")).unwrap()).unwrap();
    let cps = [500, 1000, 2000];
    let fast = cpa_with(&noisy, &cps, ScoreMode::MaxOverSamples).unwrap();
    let oracle = cpa_oracle(&noisy, &cps, ScoreMode::MaxOverSamples).unwrap();
    let bit_exact = fast
        .corr
        .iter()
        .flatten()
        .zip(oracle.corr.iter().flatten())
        .all(|(a, b)| a.to_bits() == b.to_bits())
        && fast == oracle;
    let secs = start.elapsed().as_secs_f64();
    check(
        noiseless_ok && fast.success && bit_exact && secs <= 10.0,
        format!(
            "noiseless |r| = {:.15}, rank {}; noisy fixture (sigma 0.5, n {}) recovered 0x{:02x}, oracle bit-exact: {bit_exact}; {secs:.1} s (<= 10 s)",
            r.corr[0x2b][0],
            r.true_key_rank[0],
            noisy.len(),
            fast.recovered_key
        ),
    )
}

fn ln_binom_pmf(n: u64, k: u64, p: f64) -> f64 {
    let ln_fact = |m: u64| (1..=m).map(|x| (x as f64).ln()).sum::<f64>();
    ln_fact(n) - ln_fact(k) - ln_fact(n - k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()
}

/// Central 99% interval of Binomial(n, p): 0.5% in each tail.
fn binomial_99(n: u64, p: f64) -> (u64, u64) {
    let pmf: Vec<f64> = (0..=n).map(|k| ln_binom_pmf(n, k, p).exp()).collect();
    let mut acc = 0.0;
    let mut lo = 0;
    for (k, q) in pmf.iter().enumerate() {
        if acc + q > 0.005 {
            lo = k as u64;
            break;
        }
        acc += q;
    }
    let mut acc = 0.0;
    let mut hi = n;
    for (k, q) in pmf.iter().enumerate().rev() {
        if acc + q > 0.005 {
            hi = k as u64;
            break;
        }
        acc += q;
    }
    (lo, hi)
}

fn c8_null() -> Outcome {
    let start = Instant::now();
    let params = LeakageParams {
        alpha: 0.0,
        ..LeakageParams::reference()
    };
    let seeds = 512u64;
    let successes = (0..seeds)
        .filter(|&s| cpa(&synth_traceset(256, 0x2b, &params, 10_000 + s).unwrap(), 256).unwrap().success)
        .count() as u64;
    let (lo, hi) = binomial_99(seeds, 1.0 / 256.0);
    let secs = start.elapsed().as_secs_f64();
    check(
        (lo..=hi).contains(&successes) && secs <= 300.0,
        format!("{successes}/{seeds} successes with alpha = 0, 99% bounds [{lo}, {hi}]; {secs:.1} s (<= 300 s)"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn c9_countermeasure() -> Outcome {
    let base = LeakageParams {
        sigma: 0.05,
        ..LeakageParams::reference()
    };
    let cm = LeakageParams {
        countermeasure_t_s: Some(10.0 * base.t_ref_s),
        ..base.clone()
    };
    let cps = linear_checkpoints(10, 2000).unwrap();
    let run = |p: &LeakageParams, seed: u64| {
        let ts = synth_traceset(2000, 0x2b, p, seed).unwrap();
        mtd(&ts, &cps, DEFAULT_WINDOW, ScoreMode::MaxOverSamples)
            .unwrap()
            .mtd
            .map_or(f64::INFINITY, |n| n as f64)
    };
    let seeds: Vec<u64> = (0..30).map(|k| 500 + k).collect();
    let m_base = median(seeds.iter().map(|&s| run(&base, s)).collect());
    let m_cm = median(seeds.iter().map(|&s| run(&cm, s)).collect());
    let poi_snr = |p: &LeakageParams| snr(&synth_traceset(10_000, 0x2b, p, 77).unwrap()).unwrap().poi_snr.unwrap();
    let ratio = poi_snr(&cm) / poi_snr(&base);
    let want = (base.t_ref_s / cm.countermeasure_t_s.unwrap()).powi(4);
    check(
        m_cm > m_base && rel(ratio, want) <= 0.2,
        format!(
            "median MTD {m_base} -> {m_cm} at T = 10 T_ref over 30 paired seeds; SNR ratio {ratio:.3e} vs (T_ref/T)^4 = {want:.1e} (rel {:.3}, <= 0.2)",
            rel(ratio, want)
        ),
    )
}

fn c10_grid() -> Outcome {
    let grid = GridSpec::fig2_demo();
    let traces = grid_traceset(&grid, &LeakageParams::reference(), 1000, 0x2b, 1).unwrap();
    let maps = grid_maps(&traces, &linear_checkpoints(20, 1000).unwrap(), DEFAULT_WINDOW, ScoreMode::MaxOverSamples);
    let amp: Vec<f64> = maps.amplitude.iter().map(|v| v.unwrap()).collect();
    let snr: Vec<f64> = maps.snr.iter().map(|v| v.unwrap()).collect();
    let a = spearman(&amp, &snr).unwrap();
    let b = spearman(&snr, &inverse_mtd(&maps.mtd)).unwrap();
    check(
        a <= 0.5 && b >= 0.8,
        format!("fig2-demo: Spearman(amplitude, SNR) = {a:.3} (<= 0.5), Spearman(SNR, 1/MTD) = {b:.3} (>= 0.8)"),
    )
}

fn run_cli(bin: &Path, args: &[&str], threads: usize, out: &Path) -> Vec<(String, Vec<u8>)> {
    let res = Command::new(bin)
        .args(args)
        .args(["--seed", "42", "--no-timestamp", "--threads", &threads.to_string()])
        .args(["--format", "csv", "--format", "json", "--format", "svg", "--out"])
        .arg(out)
        .env_remove("EMLEAK_OUT")
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c11_determinism(bin: &Path) -> Outcome {
    let rc = data("rc.spec");
    let rlc = data("rlc.spec");
    let low = data("low_noise.emlk");
    let (rc, rlc, low) = (rc.to_str().unwrap(), rlc.to_str().unwrap(), low.to_str().unwrap());
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("transient", vec!["transient", "--spec", rlc, "--mode", "step"]),
        ("fig3", vec!["fig3", "--spec", rlc, "--method", "numeric", "--points", "13"]),
        ("fig4", vec!["fig4", "--spec", rc, "--points", "9", "--t-max-tau", "1e3"]),
        ("synth", vec!["synth", "--n", "700"]),
        ("attack", vec!["attack", "--traces", low, "--oracle"]),
        ("attack-synth", vec!["attack", "--n", "800", "--sigma", "1.5"]),
        ("evaluate", vec!["evaluate", "--n", "600", "--n-snr", "3000", "--sigma", "0.1", "--repeats", "3"]),
        ("grid", vec!["grid", "--n", "400"]),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut files = 0;
    for (name, args) in &commands {
        let mut runs = Vec::new();
        for threads in [1, 4] {
            for rep in 0..2 {
                let dir = tmp.path().join(format!("{name}-{threads}-{rep}"));
                runs.push(run_cli(bin, args, threads, &dir));
            }
        }
        files += runs[0].len();
        if runs.iter().any(|r| r != &runs[0]) || runs[0].is_empty() {
            failures.push(*name);
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} invocations x 2 runs x threads {{1, 4}}, {files} files byte-identical; differing: {failures:?}",
            commands.len()
        ),
    )
}

fn main() {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_emleak"));
    let b = batch();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("energy conservation", Box::new(|| c1_conservation(&b))),
        ("closed form vs numeric", Box::new(|| c2_oracle(&b))),
        ("series ratio identity", Box::new(|| c3_ratio(&b))),
        ("Fig. 3 crossing", Box::new(|| c4_crossing(&bin))),
        ("adiabatic asymptote", Box::new(c5_adiabatic)),
        ("radiation inverse square", Box::new(c6_inverse_square)),
        ("CPA correctness", Box::new(c7_cpa)),
        ("null model", Box::new(c8_null)),
        ("countermeasure efficacy", Box::new(c9_countermeasure)),
        ("Fig. 2 rank correlations", Box::new(c10_grid)),
        ("CLI determinism", Box::new(|| c11_determinism(&bin))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(e) => check(
                false,
                format!(
                    "panicked: {}",
                    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
                ),
            ),
        };
        failed += usize::from(!o.pass);
        println!(
            "{} [{:>2}] {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
