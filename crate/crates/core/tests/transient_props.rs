use emleak_core::circuit::{CircuitSpec, Topology};
use emleak_core::transient::{default_grid, solve_analytic, solve_numeric, DriveMode};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = CircuitSpec> {
    (0usize..3, 1.0f64..100.0, -2.0f64..2.0, -15.0f64..-12.0, 0.5f64..3.3, 0.2f64..5.0).prop_map(
        |(t, r_rad, log_ratio, log_c, v0, zeta)| {
            let r = r_rad * 10f64.powf(log_ratio);
            let c = 10f64.powf(log_c);
            match t {
                0 => CircuitSpec::series_rc(r, r_rad, c, v0),
                1 => CircuitSpec::parallel_rc(r, r_rad, c, v0),
                _ => {
                    let rt = r + r_rad;
                    CircuitSpec::series_rlc(r, r_rad, c * rt * rt / (4.0 * zeta * zeta), c, v0)
                }
            }
        },
    )
}

fn modes(spec: &CircuitSpec, ramp_over_tau: f64) -> Vec<DriveMode> {
    if spec.topology == Topology::ParallelRc {
        return vec![DriveMode::Discharge];
    }
    let rt = spec.total_resistance();
    let tau = match spec.topology {
        Topology::SeriesRlc => (spec.inductance() * spec.c_farad).sqrt().max(rt * spec.c_farad),
        _ => rt * spec.c_farad,
    };
    vec![
        DriveMode::Discharge,
        DriveMode::StepCharge,
        DriveMode::RampCharge {
            ramp_t_s: ramp_over_tau * tau,
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn numeric_tracks_analytic(spec in spec_strategy(), ramp in 0.5f64..20.0) {
        for mode in modes(&spec, ramp) {
            let g = default_grid(&spec, mode).unwrap();
            let a = solve_analytic(&spec, mode, g).unwrap();
            let n = solve_numeric(&spec, mode, g).unwrap();
            let worst = a.v_cap.iter().zip(&n.v_cap).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(worst <= 1e-7 * spec.v0_volt, "{:?} {:?}: {:e}", spec, mode, worst);
        }
    }

    #[test]
    fn discharge_horizon_is_complete(spec in spec_strategy()) {
        let g = default_grid(&spec, DriveMode::Discharge).unwrap();
        let w = solve_numeric(&spec, DriveMode::Discharge, g).unwrap();
        let end = *w.v_cap.last().unwrap();
        prop_assert!(end.abs() <= 2.1e-9 * spec.v0_volt, "{:?}: {:e}", spec, end);
    }

    #[test]
    fn parallel_branches_sum_exactly(r in 1.0f64..1e3, r_rad in 1.0f64..1e2, v0 in 0.5f64..3.3) {
        let spec = CircuitSpec::parallel_rc(r, r_rad, 1e-13, v0);
        let g = default_grid(&spec, DriveMode::Discharge).unwrap();
        for w in [solve_numeric(&spec, DriveMode::Discharge, g).unwrap(), solve_analytic(&spec, DriveMode::Discharge, g).unwrap()] {
            let (br, brad) = (w.i_branch_r.as_ref().unwrap(), w.i_branch_rad.as_ref().unwrap());
            for k in 0..w.len() {
                let sum = br[k] + brad[k];
                prop_assert!((w.i_total[k] - sum).abs() <= 2.0 * f64::EPSILON * w.i_total[k].abs());
            }
        }
    }
}

#[test]
fn rlc_starts_with_all_energy_on_the_capacitor() {
    for zeta in [0.05, 1.0, 12.0] {
        let c = 1e-13;
        let rt = 50.0;
        let spec = CircuitSpec::series_rlc(40.0, 10.0, c * rt * rt / (4.0 * zeta * zeta), c, 1.8);
        let g = default_grid(&spec, DriveMode::Discharge).unwrap();
        for w in [solve_numeric(&spec, DriveMode::Discharge, g).unwrap(), solve_analytic(&spec, DriveMode::Discharge, g).unwrap()] {
            assert_eq!(w.v_cap[0], 1.8);
            assert_eq!(w.i_total[0], 0.0);
            assert!((0.5 * c * w.v_cap[0] * w.v_cap[0] / spec.e0_j() - 1.0).abs() < 1e-15);
        }
    }
}
