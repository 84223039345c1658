use pdls_core::control::ScheduleKind;
use pdls_core::degrade::{apply, gaussian_kernel, motion_kernel, DegradationOperator, ImageGrid, NoiseModel};
use pdls_core::flowfield::{endpoint_conditional_velocity, Component, Endpoint, LatentState};
use pdls_core::integrate::{integrate, TimeGrid, Trajectory};
use pdls_core::metrics::{psnr, ssim, PEAK};
use pdls_core::pdls::{dual_invert, restore, steered_generate, PdlsConfig};
use pdls_core::{Condition, FlowField, GaussianMixture};
use proptest::prelude::*;

fn mixture_strategy(dim: usize) -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec(
        (0.05f64..1.0, prop::collection::vec(-3.0f64..3.0, dim), prop_oneof![Just(0.0), 0.001f64..1.0]),
        1..5,
    )
    .prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let n = parts.len();
        let mut acc = 0.0;
        let comps = parts
            .into_iter()
            .enumerate()
            .map(|(i, (w, mean, var))| {
                // last weight absorbs rounding so the sum is exactly 1
                let w = if i + 1 == n { 1.0 - acc } else { w / total };
                acc += w;
                Component::new(w, mean, var, Some(format!("c{i}").as_str().into()))
            })
            .collect();
        GaussianMixture::new(comps).unwrap()
    })
}

fn image(w: usize, h: usize) -> impl Strategy<Value = ImageGrid> {
    prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |p| ImageGrid::new(w, h, p).unwrap())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn toy() -> GaussianMixture {
    GaussianMixture::uniform(vec![vec![2.0, 0.0], vec![-2.0, 0.0]], 0.05, vec!["A".into(), "B".into()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn responsibilities_are_normalised(
        m in mixture_strategy(2),
        x in prop::collection::vec(-6.0f64..6.0, 2),
        t in 0.0f64..0.999,
    ) {
        let p = FlowField::new(&m).responsibilities(&x, t, &Condition::Null).unwrap();
        let sum: f64 = p.probabilities.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {}", sum);
        prop_assert!(p.probabilities.iter().all(|q| (0.0..=1.0).contains(q)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn single_dirac_label_matches_endpoint_field(
        means in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 2..4),
        x in prop::collection::vec(-4.0f64..4.0, 2),
        t in 0.0f64..0.99,
    ) {
        let labels = (0..means.len()).map(|i| format!("k{i}").as_str().into()).collect();
        let m = GaussianMixture::uniform(means.clone(), 0.0, labels).unwrap();
        let f = FlowField::new(&m);
        let v = f.marginal_velocity(&x, t, &Condition::labels(["k1"])).unwrap();
        let u = endpoint_conditional_velocity(LatentState::new(&x, t), &means[1], Endpoint::Data, 1e-3).unwrap();
        prop_assert!(dist(&v, &u) <= 1e-9 * (1.0 + u.iter().map(|a| a.abs()).sum::<f64>()));
    }

    #[test]
    fn integration_is_deterministic(x0 in prop::collection::vec(-3.0f64..3.0, 2), n in 1usize..60) {
        let m = toy();
        let f = FlowField::new(&m);
        let grid = TimeGrid::uniform(n, 0.0, 1.0).unwrap();
        let run = || integrate(&x0, &grid, |s, _| f.clamped_velocity(s.x, s.t, &Condition::Null)).unwrap();
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn reversal_round_trip_is_first_order(x0 in prop::collection::vec(-2.0f64..2.0, 3)) {
        // smooth drift f(x, t) = -x + sin(t)
        let drift = |x: &[f64], t: f64| x.iter().map(|v| -v + t.sin()).collect::<Vec<f64>>();
        let err = |n: usize| {
            let grid = TimeGrid::uniform(n, 0.0, 1.0).unwrap();
            let fwd = integrate(&x0, &grid, |s, _| Ok(drift(s.x, s.t))).unwrap();
            let back = integrate(fwd.terminal(), &grid.reversed(), |s, _| Ok(drift(s.x, s.t))).unwrap();
            dist(back.terminal(), &x0)
        };
        let (e1, e2) = (err(100), err(200));
        prop_assert!(e2 < e1);
        prop_assert!((1.6..=2.4).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }

    #[test]
    fn pure_control_distance_record_never_increases(
        observed in prop::collection::vec(-3.0f64..3.0, 2),
        seed in 0u64..1000,
        n in 2usize..40,
        eta_max in 0.0f64..=1.0,
        constant in any::<bool>(),
    ) {
        let m = toy();
        let config = PdlsConfig {
            n_steps: n,
            eta_max,
            schedule: if constant { ScheduleKind::Constant } else { ScheduleKind::CosineDecay },
            suppress_base: true,
            ..PdlsConfig::default()
        };
        let r = restore(&observed, &m, &Condition::labels(["A"]), &config, seed).unwrap();
        for s in &r.report.steps {
            let dt = 1.0 / n as f64;
            let factor = 1.0 - s.eta * dt / (1.0 - s.t);
            prop_assert!((0.0..=1.0).contains(&factor));
            prop_assert!(s.dist_after <= s.dist_to_target * (1.0 + 1e-12) + 1e-12);
            prop_assert!((s.dist_after - factor * s.dist_to_target).abs() <= 1e-12 * (1.0 + s.dist_to_target));
        }
    }

    #[test]
    fn restore_is_pure_in_seed(observed in prop::collection::vec(-3.0f64..3.0, 2), seed in 0u64..10_000) {
        let m = toy();
        let c = PdlsConfig::default();
        let a = restore(&observed, &m, &Condition::labels(["B"]), &c, seed).unwrap();
        let b = restore(&observed, &m, &Condition::labels(["B"]), &c, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn kernels_are_normalised(half in 0usize..20, sigma in 0.2f64..6.0, intensity in 0.0f64..=1.0, angle in -180.0f64..180.0) {
        let size = 2 * half + 1;
        prop_assert!((gaussian_kernel(size, sigma).unwrap().sum() - 1.0).abs() <= 1e-12);
        prop_assert!((motion_kernel(size, intensity, angle).unwrap().sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn blurring_a_constant_image_returns_it(c in 0.0f64..=1.0, angle in 0.0f64..180.0) {
        let img = ImageGrid::filled(16, 16, c).unwrap();
        for op in [
            DegradationOperator::GaussianBlur { size: 7, sigma: 1.5 },
            DegradationOperator::MotionBlur { size: 9, intensity: 0.7, angle },
        ] {
            let out = apply(&op, &img, &NoiseModel::none()).unwrap();
            prop_assert!(out.pixels().iter().all(|p| (p - c).abs() <= 1e-12));
        }
    }

    #[test]
    fn operators_are_linear(x1 in image(16, 16), x2 in image(16, 16), a in 0.0f64..=1.0) {
        let mix = ImageGrid::new(
            16,
            16,
            x1.pixels().iter().zip(x2.pixels()).map(|(p, q)| a * p + (1.0 - a) * q).collect(),
        ).unwrap();
        for op in [
            DegradationOperator::GaussianBlur { size: 5, sigma: 1.0 },
            DegradationOperator::MotionBlur { size: 7, intensity: 0.5, angle: 30.0 },
            DegradationOperator::Downsample { factor: 4 },
        ] {
            let f1 = apply(&op, &x1, &NoiseModel::none()).unwrap();
            let f2 = apply(&op, &x2, &NoiseModel::none()).unwrap();
            let fm = apply(&op, &mix, &NoiseModel::none()).unwrap();
            for ((m, p), q) in fm.pixels().iter().zip(f1.pixels()).zip(f2.pixels()) {
                prop_assert!((m - (a * p + (1.0 - a) * q)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn metric_symmetry(a in image(12, 12), b in image(12, 12)) {
        prop_assert_eq!(psnr(&a, &b, PEAK).unwrap(), psnr(&b, &a, PEAK).unwrap());
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn generation_only_reads_stored_nodes() {
    let m = toy();
    let config = PdlsConfig::default();
    let paths = dual_invert(&[1.0, 0.5], &m, &Condition::labels(["A"]), &config, 3).unwrap();
    let n = config.n_steps;
    assert!(steered_generate(&paths, &m, &config).is_ok());

    // semantic path stored on a slightly different grid
    let mut skewed = paths.clone();
    skewed.semantic = Trajectory::new(
        TimeGrid::uniform(n, 1.0, 1e-9).unwrap(),
        paths.semantic.states().to_vec(),
    )
    .unwrap();
    assert!(steered_generate(&skewed, &m, &config).is_err());

    // paths from a different step count
    let other = PdlsConfig { n_steps: n + 1, ..config.clone() };
    assert!(steered_generate(&paths, &m, &other).is_err());
}
