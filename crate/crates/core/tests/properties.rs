mod common;

use common::*;
use proptest::prelude::*;
use qheat_core::evolution::time_grid;
use qheat_core::output::format_float;
use qheat_core::Propagator;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn expectation_is_linear(m in 1usize..6, seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let o1 = random_nambu(m, true, false, seed);
        let o2 = random_nambu(m, true, true, seed ^ 0x55);
        let chi = thermal_correlation(&random_nambu(m, true, false, seed ^ 0xaa), 0.5);
        let combo = o1.linear_combination(a, &o2, b).unwrap();
        let lhs = combo.expectation(&chi).unwrap();
        let rhs = a * o1.expectation(&chi).unwrap() + b * o2.expectation(&chi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn quasiparticle_energies_pair_up(m in 1usize..8, seed in any::<u64>(), real in any::<bool>()) {
        let h = random_nambu(m, true, real, seed);
        let qp = h.diagonalize().unwrap();
        prop_assert!(qp.pairing_residual() < 1e-10);
        prop_assert!(qp.transform().orthonormality_residual() < 1e-10);
        prop_assert!(max_diff(&qp.reconstruct(), &h.data().to_owned()) < 1e-10);
        prop_assert!(h.particle_hole_residual() < 1e-12);
    }

    #[test]
    fn energy_rate_vanishes(m in 1usize..7, seed in any::<u64>(), t in 0.0f64..30.0) {
        let h = random_nambu(m, true, false, seed);
        let chi0 = thermal_correlation(&random_nambu(m, true, false, seed.wrapping_add(1)), 0.3);
        let chi = Propagator::new(&h, &chi0).unwrap().evolve(t);
        prop_assert!(h.observable_rate(&h, &chi).unwrap().abs() < 1e-10);
    }

    #[test]
    fn forward_then_backward_is_identity(m in 1usize..7, seed in any::<u64>(), t in 0.0f64..50.0) {
        let h = random_nambu(m, true, false, seed);
        let chi0 = thermal_correlation(&random_nambu(m, true, false, seed.wrapping_add(7)), 0.8);
        let forward = Propagator::new(&h, &chi0).unwrap().evolve(t);
        let back = Propagator::new(&h, &forward).unwrap().evolve(-t);
        prop_assert!(max_diff(&back.into_data(), &chi0.data().to_owned()) < 1e-10);
    }

    #[test]
    fn floats_survive_csv(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert!(back == x);
    }

    #[test]
    fn time_grid_is_increasing(start in 0.0f64..10.0, len in 1.0f64..40.0, dt in 0.01f64..1.0) {
        let g = time_grid(start, start + len, dt);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*g.last().unwrap() <= start + len + 1e-9);
    }
}
