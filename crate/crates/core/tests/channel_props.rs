mod common;

use mra_opt::channel::{array_manifold, build_channel, build_channel_matrix, element_gain, AntennaLayout, PathComponent, Scenario};
use mra_opt::zf::zf_sum_rate;
use mra_opt::C64;
use proptest::prelude::*;

const LAMBDA: f64 = 0.1;

fn path() -> impl Strategy<Value = PathComponent> {
    (-2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(re, im, theta, phi)| PathComponent::new(C64::new(re, im), theta, phi))
}

fn layout(n: usize) -> impl Strategy<Value = AntennaLayout> {
    (
        prop::collection::vec(-0.5..0.5f64, n),
        prop::collection::vec(-0.5..0.5f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
    )
        .prop_map(|(x, z, pt, pp)| AntennaLayout::new(x, z, pt, pp).unwrap())
}

proptest! {
    #[test]
    fn manifold_has_unit_modulus(l in layout(5), theta in -1.0..1.0f64, phi in -1.0..1.0f64) {
        let a = array_manifold(&l, theta, phi, LAMBDA).unwrap();
        for v in a.iter() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pattern_is_bounded(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = element_gain(a, b);
        prop_assert!((0.0..=1.0).contains(&g));
        if a != 0.0 || b != 0.0 {
            prop_assert!(g < 1.0);
        }
    }

    #[test]
    fn channel_is_linear_in_gains(paths in prop::collection::vec(path(), 1..5), l in layout(3), cre in -2.0..2.0f64, cim in -2.0..2.0f64) {
        let c = C64::new(cre, cim);
        let scaled: Vec<_> = paths.iter().map(|p| PathComponent { beta: p.beta * c, ..*p }).collect();
        let h = build_channel(&paths, &l, LAMBDA).unwrap();
        let hs = build_channel(&scaled, &l, LAMBDA).unwrap();
        for (a, b) in h.iter().zip(hs.iter()) {
            prop_assert!((a * c - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn channel_matches_naive_loop(paths in prop::collection::vec(path(), 1..5), l in layout(4)) {
        let h = build_channel(&paths, &l, LAMBDA).unwrap();
        let oracle = common::naive_channel(&paths, &l, LAMBDA);
        for (a, b) in h.iter().zip(&oracle) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_leaves_single_path_rate_unchanged(
        users in prop::collection::vec(path(), 2),
        dx in -0.3..0.3f64,
        dz in -0.3..0.3f64,
    ) {
        let scenario = Scenario::new(users.into_iter().map(|p| vec![p]).collect(), LAMBDA, 3.0, 1.0).unwrap();
        let base = AntennaLayout::new(vec![-0.03, 0.04, 0.01], vec![0.0, 0.02, -0.05], vec![0.1, -0.2, 0.0], vec![0.0, 0.3, -0.1]).unwrap();
        let mut moved = base.clone();
        moved.x.iter_mut().for_each(|x| *x += dx);
        moved.z.iter_mut().for_each(|z| *z += dz);
        let r0 = build_channel_matrix(&scenario, &base).and_then(|h| zf_sum_rate(&h, 3.0, 1.0));
        let r1 = build_channel_matrix(&scenario, &moved).and_then(|h| zf_sum_rate(&h, 3.0, 1.0));
        if let (Ok(a), Ok(b)) = (r0, r1) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
