use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhdbl_core::config::RunConfig;
use mhdbl_core::grid::{d2dy, weighted_l2, Bc, Field, GridSpec, PhysicalField};
use mhdbl_core::lp::{besov_norm, lp_project, DyadicPartition};
use mhdbl_core::run::build_simulation;
use mhdbl_core::solver::checkpoint::{decode, encode};
use mhdbl_core::verify::{
    fit_power_law, multiplier_convexity_check, poincare_check, random_nonnegative_profile, Mixture,
};

fn random_field(grid: GridSpec, seed: u64, kmax: i64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 1..grid.ny - 1 {
        for j in 1..=kmax {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            coeffs[i * grid.nx + grid.slot_of(j)] = z;
            coeffs[i * grid.nx + grid.slot_of(-j)] = z.conj();
        }
    }
    Field::from_coeffs(grid, Bc::Dirichlet, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(seed in 0u64..10_000, lx in 1.0f64..20.0, log_nx in 3u32..7) {
        let grid = GridSpec::new(lx, 1 << log_nx, 7.0, 41).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phys = PhysicalField::new(grid, values).unwrap();
        let w = grid.trapezoid_weights();
        let dx = lx / grid.nx as f64;
        let direct: f64 = (0..grid.ny)
            .map(|i| w[i] * (0..grid.nx).map(|m| phys.at(i, m).powi(2)).sum::<f64>() * dx)
            .sum();
        let spectral = weighted_l2(&phys.forward(Bc::Untagged), 0.0, 0.0).unwrap().powi(2);
        prop_assert!((spectral - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn partition_of_unity(lx in 0.5f64..50.0, log_nx in 3u32..10) {
        let grid = GridSpec::new(lx, 1 << log_nx, 5.0, 17).unwrap();
        prop_assert!(DyadicPartition::build(&grid).unity_defect() < 1e-12);
    }

    #[test]
    fn distant_shells_are_orthogonal(seed in 0u64..10_000) {
        let grid = GridSpec::new(2.0 * PI, 128, 5.0, 17).unwrap();
        let p = DyadicPartition::build(&grid);
        let f = random_field(grid, seed, 42);
        let shells = p.shells().to_vec();
        for &j in &shells {
            let fj = lp_project(&p, &f, j);
            for &k in shells.iter().filter(|&&k| (k - j).abs() >= 2) {
                prop_assert_eq!(lp_project(&p, &fj, k).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn besov_norm_is_homogeneous(seed in 0u64..10_000, c in -50.0f64..50.0, t in 0.0f64..5.0) {
        let grid = GridSpec::new(2.0 * PI, 32, 10.0, 41).unwrap();
        let p = DyadicPartition::build(&grid);
        let f = random_field(grid, seed, 10);
        let n = besov_norm(&p, &f, 0.5, 1.0, t).unwrap();
        let nc = besov_norm(&p, &f.scale(c), 0.5, 1.0, t).unwrap();
        prop_assert!((nc - c.abs() * n).abs() <= 1e-12 * c.abs() * n + 1e-300);
    }

    #[test]
    fn weighted_poincare_holds(seed in 0u64..10_000, t in 0.0f64..20.0, kappa in 0.5f64..3.0) {
        let m = Mixture::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = poincare_check(|y| m.value(y), |y| m.derivative(y), t, kappa).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn multiplier_is_convex_on_translated_nonnegative_spectra(seed in 0u64..10_000, r in 0.0f64..0.5) {
        let grid = GridSpec::new(2.0 * PI, 64, 5.0, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = rng.random_range(0.0..grid.lx);
        let f = random_nonnegative_profile(&grid, &mut rng, 15, shift);
        let g = random_nonnegative_profile(&grid, &mut rng, 15, shift);
        prop_assert!(multiplier_convexity_check(&f, &g, r).unwrap().pass);
    }

    #[test]
    fn exact_power_laws_are_recovered(p in -3.0f64..0.5, c in 1e-6f64..1e3) {
        let times: Vec<f64> = (0..=90).map(|i| 10.0 + i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| c * (1.0 + t).powf(p)).collect();
        let fit = fit_power_law(&times, &values, (10.0, 100.0)).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-10);
        prop_assert!(fit.stderr < 1e-10);
    }

    #[test]
    fn config_text_round_trips(
        kappa in 0.1f64..5.0,
        eps in 0.0f64..1e-2,
        nx in 4usize..128,
        ny in 9usize..2000,
        t_final in 0.1f64..500.0,
        audit in 0u64..100,
    ) {
        let cfg = RunConfig {
            kappa,
            epsilon: eps,
            nx,
            ny,
            t_final,
            audit_every: audit,
            scenario: mhdbl_core::scenario::ScenarioKind::Heat,
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn checkpoints_round_trip_at_any_time(t in 0.0f64..0.6, eps in 1e-4f64..2e-3) {
        let text = format!("grid.nx = 8\ngrid.ny = 65\ngrid.ymax = 20\nparams.epsilon = {eps}\nrun.audit_every = 3\nrun.sample_interval = 0.1\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let mut sim = build_simulation(&cfg).unwrap();
        sim.run_until(t.max(1e-3)).unwrap();
        let bytes = encode(&sim, &text);
        let (copy, back) = decode(&bytes).unwrap();
        prop_assert_eq!(back, text);
        prop_assert_eq!(encode(&copy, &cfg.to_text()), encode(&sim, &cfg.to_text()));
    }

    #[test]
    fn band_shrinks_monotonically(eps in 1e-4f64..3e-3) {
        let text = format!("grid.nx = 16\ngrid.ny = 129\ngrid.ymax = 20\nparams.epsilon = {eps}\nrun.sample_interval = 0.05\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let mut sim = build_simulation(&cfg).unwrap();
        sim.run_until(1.0).unwrap();
        for w in sim.series.samples.windows(2) {
            prop_assert!(w[1].theta >= w[0].theta);
            prop_assert!(w[1].radius <= w[0].radius);
        }
    }
}

#[test]
fn second_derivative_converges_at_second_order() {
    let err = |ny: usize| {
        let grid = GridSpec::new(2.0 * PI, 8, 10.0, ny).unwrap();
        let f = Field::from_fn(grid, Bc::Dirichlet, |x, y| x.cos() * y * (-y * y / 2.0).exp());
        let exact = Field::from_fn(grid, Bc::Untagged, |x, y| x.cos() * (y.powi(3) - 3.0 * y) * (-y * y / 2.0).exp());
        let d = d2dy(&f).unwrap();
        (1..ny - 1)
            .flat_map(|i| (0..grid.nx).map(move |s| (i, s)))
            .map(|(i, s)| (d.at(i, s) - exact.at(i, s)).norm())
            .fold(0.0, f64::max)
    };
    let ratio = err(101) / err(201);
    assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
}
