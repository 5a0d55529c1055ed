use emleak_core::circuit::CircuitSpec;
use emleak_core::energy::{adiabatic_partition, closed_form_partition, numeric_partition, AdiabaticModel};
use emleak_core::transient::DriveMode;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn closed_form_conserves_energy(
        t in 0usize..3,
        r in 0.0f64..1e4,
        r_rad in 0.01f64..1e3,
        c in 1e-15f64..1e-9,
        v0 in 0.1f64..5.0,
    ) {
        let spec = match t {
            0 => CircuitSpec::series_rc(r, r_rad, c, v0),
            1 => CircuitSpec::parallel_rc(r.max(1e-3), r_rad, c, v0),
            _ => CircuitSpec::series_rlc(r, r_rad, 1e-9, c, v0),
        };
        let p = closed_form_partition(&spec).unwrap();
        prop_assert!((p.total_loss_j() - 0.5 * c * v0 * v0).abs() <= 1e-12 * p.e0_j);
        prop_assert!((p.heat_frac + p.rad_frac - 1.0).abs() < 1e-15);
    }

    #[test]
    fn series_heat_over_radiation_is_resistance_ratio(r in 1e-3f64..1e4, r_rad in 0.01f64..1e3) {
        for spec in [CircuitSpec::series_rc(r, r_rad, 1e-12, 1.0), CircuitSpec::series_rlc(r, r_rad, 1e-9, 1e-12, 1.0)] {
            let p = closed_form_partition(&spec).unwrap();
            prop_assert!(rel(p.e_heat_j / p.e_rad_j, r / r_rad) <= 1e-12);
        }
    }
}

#[test]
fn numeric_ratio_identity() {
    for (r, r_rad) in [(1.0, 50.0), (30.0, 30.0), (900.0, 2.0)] {
        for spec in [CircuitSpec::series_rc(r, r_rad, 1e-13, 1.2), CircuitSpec::series_rlc(r, r_rad, 1e-10, 1e-13, 1.2)] {
            let p = numeric_partition(&spec, DriveMode::Discharge).unwrap();
            assert!(rel(p.e_heat_j / p.e_rad_j, r / r_rad) <= 1e-6);
        }
    }
}

#[test]
fn step_charge_loses_what_discharge_loses() {
    for spec in [
        CircuitSpec::series_rc(120.0, 15.0, 2e-13, 1.1),
        CircuitSpec::series_rlc(120.0, 15.0, 1e-10, 2e-13, 1.1),
        CircuitSpec::series_rlc(5.0, 15.0, 1e-8, 2e-13, 1.1),
    ] {
        let down = numeric_partition(&spec, DriveMode::Discharge).unwrap();
        let up = numeric_partition(&spec, DriveMode::StepCharge).unwrap();
        assert!(rel(up.total_loss_j(), down.total_loss_j()) <= 1e-6, "{spec:?}");
        // the source supplies C V^2: half is lost, half stays on C
        assert!(rel(up.e_supplied_j, 2.0 * spec.e0_j()) <= 1e-6);
        assert!(rel(up.e_stored_j, spec.e0_j()) <= 1e-6);
    }
}

#[test]
fn adiabatic_heat_approaches_limit_from_below() {
    let (r, r_rad, c, v) = (80.0, 20.0, 1e-12, 1.0);
    let spec = CircuitSpec::series_rc(r, r_rad, c, v);
    let tau = (r + r_rad) * c;
    let mut previous = 0.0;
    for ratio in [0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 300.0] {
        let t = ratio * tau;
        let p = adiabatic_partition(&spec, t, &AdiabaticModel::resistance()).unwrap();
        let normalized = p.e_heat_j * t / (c * c * v * v * r);
        // integral of the ramp current squared, including the relaxation after the ramp
        let oracle = 1.0 - (1.0 - (-ratio).exp()) / ratio;
        assert!(rel(normalized, oracle) < 1e-6, "T = {ratio} tau: {normalized} vs {oracle}");
        assert!(normalized < 1.0 && normalized > previous);
        if ratio == 100.0 {
            assert!(1.0 - normalized <= 0.02);
        }
        previous = normalized;
    }
}
