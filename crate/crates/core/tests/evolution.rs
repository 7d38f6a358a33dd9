mod common;

use common::*;
use faer::Mat;
use num_complex::Complex64 as c64;
use qheat_core::evolution::{steady_state_estimate, time_grid};
use qheat_core::{CorrelationMatrix, CurrentMethod, Error, Execution, Propagator, PropagatorOptions};

fn full_only() -> PropagatorOptions {
    PropagatorOptions {
        reduce_particle_conserving: false,
    }
}

#[test]
fn matches_matrix_exponential() {
    for (seed, real) in [(1, false), (2, true)] {
        let h = random_nambu(5, true, real, seed);
        let chi0 = thermal_correlation(&random_nambu(5, true, false, seed + 100), 0.7);
        let prop = Propagator::new(&h, &chi0).unwrap();
        for t in [0.0, 0.3, 1.7, 12.5, -4.0] {
            let n = h.dim();
            let gen = Mat::from_fn(n, n, |i, j| h.data()[(i, j)] * c64::new(0.0, -t));
            let w = expm(&gen);
            let wd = w.adjoint().to_owned();
            let expected = &(&w * chi0.data()) * &wd;
            let got = prop.evolve(t);
            assert!(max_diff(&got.into_data(), &expected) < 1e-10, "t = {t}");
        }
    }
}

#[test]
fn spectrum_and_structure_preserved() {
    let h = random_nambu(20, true, false, 7);
    let chi0 = thermal_correlation(&random_nambu(20, true, false, 8), 0.4);
    let mut before = chi0.spectrum().unwrap();
    before.sort_by(f64::total_cmp);
    let prop = Propagator::new(&h, &chi0).unwrap();
    for t in [0.5, 5.0, 50.0] {
        let chi = prop.evolve(t);
        let mut after = chi.spectrum().unwrap();
        after.sort_by(f64::total_cmp);
        let drift = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "spectrum drift {drift}");
        assert!(chi.hermitian_residual() < 1e-10);
        assert!(chi.particle_hole_residual() < 1e-10);
        assert!(chi.trace_residual() < 1e-10);
        chi.check_spectrum(1e-10).unwrap();
    }
}

#[test]
fn energy_is_conserved() {
    let h = random_nambu(12, true, false, 11);
    let chi0 = thermal_correlation(&random_nambu(12, true, false, 12), 0.5);
    let prop = Propagator::new(&h, &chi0).unwrap();
    let e0 = h.expectation(&chi0).unwrap();
    for t in [1.0, 10.0, 100.0] {
        let e = h.expectation(&prop.evolve(t)).unwrap();
        assert!((e - e0).abs() < 1e-10 * e0.abs().max(1.0));
    }
}

#[test]
fn current_is_derivative_of_bath_energy() {
    let m = 6;
    let h = random_nambu(m, true, false, 21);
    let bath = number_weighted(m, &[(0, 0.3), (1, 1.1), (2, 1.9)]);
    let chi0 = thermal_correlation(&random_nambu(m, true, false, 22), 0.6);
    let prop = Propagator::new(&h, &chi0).unwrap();
    let times = [0.4, 2.0, 7.3];
    let trace = prop.heat_current(&h, &bath, &times).unwrap();
    for dt in [1e-4, 1e-5] {
        for (i, &t) in times.iter().enumerate() {
            let up = bath.expectation(&prop.evolve(t + dt)).unwrap();
            let down = bath.expectation(&prop.evolve(t - dt)).unwrap();
            let fd = (up - down) / (2.0 * dt);
            assert!((fd - trace.total[i]).abs() < 1e-6, "t = {t}, dt = {dt}: {fd} vs {}", trace.total[i]);
        }
    }
}

#[test]
fn current_matches_observable_rate() {
    let m = 7;
    let h = random_nambu(m, true, true, 31);
    let bath = number_weighted(m, &[(4, 0.7), (5, 1.3), (6, 0.2)]);
    let occ = [0.9, 0.1, 0.5, 0.0, 0.3, 0.8, 0.6];
    let chi0 = CorrelationMatrix::from_occupations(&occ).unwrap();
    let prop = Propagator::new(&h, &chi0).unwrap();
    let times = time_grid(0.0, 20.0, 0.5);
    let trace = prop.heat_current(&h, &bath, &times).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let rate = bath.observable_rate(&h, &prop.evolve(t)).unwrap();
        assert!((rate - trace.total[i]).abs() < 1e-10);
        assert!((trace.normal[i] + trace.anomalous[i] - trace.total[i]).abs() < 1e-15);
    }
}

#[test]
fn split_matches_separate_commutators() {
    let m = 6;
    let h = random_nambu(m, true, false, 41);
    let bath = number_weighted(m, &[(0, 0.5), (1, 1.5)]);
    let chi0 = thermal_correlation(&random_nambu(m, false, false, 42), 0.3);
    let prop = Propagator::new(&h, &chi0).unwrap();
    let times = [0.0, 1.0, 3.0];
    let trace = prop.heat_current(&h, &bath, &times).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let chi = prop.evolve(t);
        let n = bath.observable_rate(&h.normal_part(), &chi).unwrap();
        let a = bath.observable_rate(&h.anomalous_part(), &chi).unwrap();
        assert!((n - trace.normal[i]).abs() < 1e-10);
        assert!((a - trace.anomalous[i]).abs() < 1e-10);
    }
}

#[test]
fn routes_agree() {
    let m = 9;
    let times = time_grid(0.0, 40.0, 0.7);
    let occ: Vec<f64> = (0..m).map(|k| (k as f64 * 0.37).fract()).collect();
    let diagonal = CorrelationMatrix::from_occupations(&occ).unwrap();
    let correlated = thermal_correlation(&random_nambu(m, true, false, 51), 0.5);
    // a star around site 4 gives a single hub; a random matrix needs many
    let mut star = Mat::<c64>::zeros(m, m);
    for k in 0..m {
        star[(k, k)] = c64::new(0.2 * k as f64, 0.0);
        if k != 4 {
            star[(k, 4)] = c64::new(0.1 + 0.01 * k as f64, 0.02);
            star[(4, k)] = star[(k, 4)].conj();
        }
    }
    let star_pair = Mat::from_fn(m, m, |i, j| {
        if i == 4 && j != 4 {
            c64::new(0.05, 0.0)
        } else if j == 4 && i != 4 {
            c64::new(-0.05, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let star = qheat_core::NambuMatrix::build(star.as_ref(), star_pair.as_ref()).unwrap();
    let hamiltonians = [star, random_nambu(m, true, false, 52), random_nambu(m, false, true, 53)];
    let bath = number_weighted(m, &[(0, 0.3), (1, 0.9), (2, 1.4), (3, 1.8)]);
    let mut offdiag = Mat::<c64>::zeros(m, m);
    offdiag[(0, 1)] = c64::new(0.2, 0.1);
    offdiag[(1, 0)] = c64::new(0.2, -0.1);
    offdiag[(2, 2)] = c64::new(1.0, 0.0);
    let offdiag = qheat_core::NambuMatrix::build(offdiag.as_ref(), Mat::<c64>::zeros(m, m).as_ref()).unwrap();
    for h in &hamiltonians {
        for chi0 in [&diagonal, &correlated] {
            for o in [&bath, &offdiag] {
                for opts in [PropagatorOptions::default(), full_only()] {
                    let prop = Propagator::with_options(h, chi0, opts).unwrap();
                    let fast = prop
                        .heat_current_with(h, o, &times, CurrentMethod::Auto, Execution::Parallel)
                        .unwrap();
                    let dense = prop
                        .heat_current_with(h, o, &times, CurrentMethod::Dense, Execution::Sequential)
                        .unwrap();
                    for i in 0..times.len() {
                        assert!((fast.normal[i] - dense.normal[i]).abs() < 1e-11);
                        assert!((fast.anomalous[i] - dense.anomalous[i]).abs() < 1e-11);
                    }
                }
            }
        }
    }
}

#[test]
fn reduced_sector_matches_full() {
    let m = 15;
    let h = random_nambu(m, false, false, 61);
    let bath = number_weighted(m, &[(0, 0.4), (1, 1.2), (2, 1.6)]);
    let occ: Vec<f64> = (0..m).map(|k| 1.0 / (1.0 + (k as f64 - 7.0).exp())).collect();
    let reduced = Propagator::from_occupations(&h, &occ, PropagatorOptions::default()).unwrap();
    let full = Propagator::from_occupations(&h, &occ, full_only()).unwrap();
    assert!(reduced.is_reduced());
    assert!(!full.is_reduced());
    let times = time_grid(0.0, 30.0, 0.5);
    let a = reduced.heat_current(&h, &bath, &times).unwrap();
    let b = full.heat_current(&h, &bath, &times).unwrap();
    for i in 0..times.len() {
        assert!((a.total[i] - b.total[i]).abs() < 1e-10);
        assert_eq!(a.anomalous[i], 0.0);
        assert!(b.anomalous[i].abs() < 1e-12);
    }
    for t in [0.0, 3.3, 29.0] {
        let d = max_diff(&reduced.evolve(t).into_data(), &full.evolve(t).into_data());
        assert!(d < 1e-10);
    }
}

#[test]
fn particle_number_conserved_without_pairing() {
    let m = 10;
    let h = random_nambu(m, false, false, 71);
    let chi0 = thermal_correlation(&random_nambu(m, false, false, 72), 0.4);
    let n0 = chi0.total_occupation();
    let prop = Propagator::with_options(&h, &chi0, full_only()).unwrap();
    for t in [1.0, 20.0] {
        assert!((prop.evolve(t).total_occupation() - n0).abs() < 1e-10);
    }
}

#[test]
fn rejects_observable_with_pairing() {
    let h = random_nambu(4, true, false, 81);
    let o = random_nambu(4, true, false, 82);
    let chi0 = CorrelationMatrix::from_occupations(&[0.0, 1.0, 0.5, 0.2]).unwrap();
    let prop = Propagator::new(&h, &chi0).unwrap();
    assert!(matches!(prop.heat_current(&h, &o, &[0.0]), Err(Error::NotBathSupported(_))));
    let wrong = random_nambu(3, false, false, 83);
    assert!(matches!(
        prop.heat_current(&wrong, &wrong, &[0.0]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn steady_window_needs_samples() {
    let h = random_nambu(3, false, false, 91);
    let bath = number_weighted(3, &[(0, 1.0)]);
    let chi0 = CorrelationMatrix::from_occupations(&[1.0, 0.0, 0.0]).unwrap();
    let prop = Propagator::new(&h, &chi0).unwrap();
    let trace = prop.heat_current(&h, &bath, &time_grid(0.0, 10.0, 0.1)).unwrap();
    assert!(matches!(
        steady_state_estimate(&trace, 20.0, 50.0),
        Err(Error::InsufficientSamples { .. })
    ));
}
