use emleak_core::circuit::{derive_params, radiation_resistance, CircuitSpec, Damping, RadiationGeometry};
use proptest::prelude::*;

fn r_rad(l: f64, f: f64) -> f64 {
    radiation_resistance(&RadiationGeometry::new(l, f).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn radiation_resistance_is_quadratic_in_length(l in 1e-6f64..1e-2, f in 1e6f64..1e10) {
        let one = r_rad(l, f);
        let two = r_rad(2.0 * l, f);
        prop_assert!((two / one - 4.0).abs() < 1e-12);
        prop_assert!(r_rad(l * 1.01, f) > one);
        prop_assert!(r_rad(l, f * 1.01) > one);
    }

    #[test]
    fn damping_class_follows_critical_resistance(
        r in 0.0f64..1e3,
        r_rad in 0.1f64..1e2,
        l in 1e-12f64..1e-6,
        c in 1e-15f64..1e-9,
    ) {
        let spec = CircuitSpec::series_rlc(r, r_rad, l, c, 1.0);
        let zeta = spec.zeta().unwrap();
        prop_assume!((zeta - 1.0).abs() > 1e-6);
        let critical = 2.0 * (l / c).sqrt();
        prop_assert_eq!(spec.damping() == Some(Damping::Underdamped), r + r_rad < critical);
    }

    #[test]
    fn zeta_scales_as_k_over_sqrt_k2(
        r in 1.0f64..1e3,
        r_rad in 1.0f64..1e2,
        l in 1e-12f64..1e-6,
        c in 1e-15f64..1e-9,
        k in 0.1f64..10.0,
    ) {
        // zeta(kR, k^2 L, C) = zeta(R, L, C); omega0 picks up 1/k
        let base = derive_params(&CircuitSpec::series_rlc(r, r_rad, l, c, 1.0)).unwrap();
        let scaled = derive_params(&CircuitSpec::series_rlc(k * r, k * r_rad, k * k * l, c, 1.0)).unwrap();
        let direct = 0.5 * (r + r_rad) * (c / l).sqrt();
        prop_assert!((base.zeta.unwrap() / direct - 1.0).abs() < 1e-12);
        prop_assert!((scaled.zeta.unwrap() / base.zeta.unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((scaled.omega0_rad_s.unwrap() * k / base.omega0_rad_s.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rc_time_constant_is_ohm_farad(r in 1.0f64..1e4, r_rad in 1.0f64..1e2, c in 1e-15f64..1e-9) {
        let series = derive_params(&CircuitSpec::series_rc(r, r_rad, c, 1.0)).unwrap();
        prop_assert!((series.tau_s.unwrap() / ((r + r_rad) * c) - 1.0).abs() < 1e-12);
        let parallel = derive_params(&CircuitSpec::parallel_rc(r, r_rad, c, 1.0)).unwrap();
        let rp = r * r_rad / (r + r_rad);
        prop_assert!((parallel.tau_s.unwrap() / (rp * c) - 1.0).abs() < 1e-12);
        prop_assert!((parallel.r_parallel_ohm.unwrap() / rp - 1.0).abs() < 1e-12);
    }
}
