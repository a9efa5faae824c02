use std::sync::Arc;

use proptest::prelude::*;

use wave_inverse::conjugate_system::{assemble_system, ConjugateOperator, SystemOptions};
use wave_inverse::field::SpaceTimeField;
use wave_inverse::grid_weights::{CarlemanWeight, CutoffFamily, SpaceTimeGrid};
use wave_inverse::inversion::{relative_change, truncate_tm, update_potential};
use wave_inverse::measurement::{assemble_target, gaussian_regularize, KernelUnit, Measurement, NoiseSpec, Provenance};
use wave_inverse::wave_fd::{constant_fn, resample, solve_wave, FluxSeries, PotentialField, WaveData};

fn small_grid() -> SpaceTimeGrid {
    SpaceTimeGrid::with_cfl(1.0, 1.3, 0.05, 1.0).unwrap()
}

fn series_from(values: Vec<f64>, step: f64) -> FluxSeries {
    let times = (0..values.len()).map(|n| n as f64 * step).collect();
    FluxSeries::new(times, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_partition_the_master_cutoff(s in 1.0f64..200.0, tau in -0.2f64..2.0) {
        let w = CarlemanWeight::new(-0.3, 0.99, s, 1.0).unwrap();
        let cut = CutoffFamily::new(&w).unwrap();
        prop_assert!((cut.partition_sum(tau) - cut.eta(tau)).abs() <= 1e-12);
        let eta = cut.eta(tau);
        prop_assert!((0.0..=1.0).contains(&eta));
    }

    #[test]
    fn cutoff_is_monotone(s in 1.0f64..200.0, a in -0.1f64..1.8, d in 0.0f64..0.1) {
        let w = CarlemanWeight::new(-0.3, 0.99, s, 1.0).unwrap();
        let cut = CutoffFamily::new(&w).unwrap();
        prop_assert!(cut.eta(a) <= cut.eta(a + d) + 1e-15);
    }

    #[test]
    fn block_targets_sum_to_cut_source(values in prop::collection::vec(-5.0f64..5.0, 27), s in 5.0f64..150.0) {
        let grid = small_grid();
        let w = CarlemanWeight::new(-0.3, 0.99, s, 1.0).unwrap();
        let cut = CutoffFamily::new(&w).unwrap();
        let mu = series_from(values, grid.tau());
        let targets = assemble_target(&mu, &w, &cut, &grid).unwrap();
        for (n, total) in targets.sum().iter().enumerate() {
            let expect = cut.eta(w.phi(grid.t(n), 1.0)) * mu.values[n];
            prop_assert!((total - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn quadratic_form_without_penalty_is_nonnegative(seed in any::<u64>(), s in 0.5f64..50.0) {
        let grid = SpaceTimeGrid::new(1.0, 1.3, 9, 0.1).unwrap();
        let w = CarlemanWeight::new(-0.3, 0.99, s, 1.0).unwrap();
        let op = ConjugateOperator::new(w, grid, vec![-0.7; 9]).unwrap();
        let sys = assemble_system(&op, SystemOptions { penalty: false, ..Default::default() }).unwrap();
        let mut state = seed;
        let y: Vec<f64> = (0..sys.space.dim())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        prop_assert!(sys.matrix.quadratic_form(&y) >= 0.0);
    }

    #[test]
    fn wave_solution_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.0f64..1.0) {
        let grid = small_grid();
        let q = PotentialField::sample(&grid, 3.0, |x| x - 0.5);
        let one = WaveData {
            source: Arc::new(|t, x| t * x),
            left: Arc::new(|t, _| t * t),
            right: constant_fn(0.0),
            w0: Arc::new(|_, x| x * (1.0 - x)),
            w1: Arc::new(|_, x| (3.0 * x).sin()),
        };
        let two = WaveData {
            source: constant_fn(1.0),
            left: constant_fn(0.0),
            right: Arc::new(|t, _| t),
            w0: Arc::new(|_, x| x * x * (1.0 - x)),
            w1: constant_fn(0.0),
        };
        let mix = |f1: &wave_inverse::wave_fd::ScalarFn, f2: &wave_inverse::wave_fd::ScalarFn| -> wave_inverse::wave_fd::ScalarFn {
            let (f1, f2) = (f1.clone(), f2.clone());
            Arc::new(move |t, x| a * f1(t, x) + b * f2(t, x))
        };
        let both = WaveData {
            source: mix(&one.source, &two.source),
            left: mix(&one.left, &two.left),
            right: mix(&one.right, &two.right),
            w0: mix(&one.w0, &two.w0),
            w1: mix(&one.w1, &two.w1),
        };
        let theta = c.abs() * 0.5;
        let u1 = solve_wave(&one, &q, &grid, theta).unwrap();
        let u2 = solve_wave(&two, &q, &grid, theta).unwrap();
        let u = solve_wave(&both, &q, &grid, theta).unwrap();
        for (i, v) in u.values.as_slice().iter().enumerate() {
            let expect = a * u1.values.as_slice()[i] + b * u2.values.as_slice()[i];
            prop_assert!((v - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn regularization_contracts_sup_norm(values in prop::collection::vec(-10.0f64..10.0, 5..200), passes in 0usize..6) {
        let series = series_from(values, 0.01);
        for unit in [KernelUnit::Sample, KernelUnit::Time] {
            let out = gaussian_regularize(&series, passes, unit);
            prop_assert!(out.sup_norm() <= series.sup_norm() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn noise_respects_its_amplitude(alpha in 0.0f64..0.2, seed in any::<u64>()) {
        let series = series_from((0..300).map(|n| (n as f64 * 0.05).sin() + 0.2).collect(), 0.01);
        let m = Measurement::from_series(series.clone(), Provenance::Imported { path: "memory".into() }).unwrap();
        let noisy = m.add_noise(NoiseSpec::new(alpha, seed).unwrap());
        let bound = alpha * series.sup_norm();
        for (a, b) in noisy.flux.values.iter().zip(&series.values) {
            prop_assert!((a - b).abs() <= bound * (1.0 + 1e-12));
        }
        prop_assert_eq!(&noisy, &m.add_noise(NoiseSpec::new(alpha, seed).unwrap()));
    }

    #[test]
    fn resampling_reproduces_affine_series(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let fine = series_from((0..400).map(|n| a + b * n as f64 * 0.00333).collect(), 0.00333);
        let grid = small_grid();
        let coarse = resample(&fine, &grid.times()).unwrap();
        for (t, v) in coarse.times.iter().zip(&coarse.values) {
            prop_assert!((v - (a + b * t)).abs() <= 1e-12 * (1.0 + (a + b * t).abs()));
        }
    }

    #[test]
    fn truncation_is_idempotent_and_bounded(values in prop::collection::vec(-10.0f64..10.0, 1..50), m in 0.1f64..5.0) {
        let q = PotentialField::new(values, m);
        let once = truncate_tm(&q, m);
        prop_assert!(once.within_bound());
        prop_assert_eq!(truncate_tm(&once, m), once);
    }

    #[test]
    fn zero_rate_leaves_admissible_potential_fixed(values in prop::collection::vec(-3.0f64..3.0, 1..50)) {
        let q = PotentialField::new(values, 3.0);
        let w0 = vec![2.0; q.len()];
        let next = update_potential(&q, &vec![0.0; q.len()], &w0, 0.0).unwrap();
        prop_assert_eq!(relative_change(&next, &q), 0.0);
    }

    #[test]
    fn trial_space_round_trip(seed in any::<u32>()) {
        let grid = SpaceTimeGrid::new(1.0, 1.0, 7, 0.125).unwrap();
        let w = CarlemanWeight::new(-0.3, 0.99, 3.0, 1.0).unwrap();
        let op = ConjugateOperator::new(w, grid, vec![0.0; 7]).unwrap();
        let sys = assemble_system(&op, SystemOptions::default()).unwrap();
        let v: Vec<f64> = (0..sys.space.dim()).map(|i| ((i as u32).wrapping_mul(seed) % 97) as f64).collect();
        let field: SpaceTimeField = sys.space.to_field(&v);
        prop_assert_eq!(sys.space.from_field(&field), v);
    }
}
