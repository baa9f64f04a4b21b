mod common;

use common::{c, cubic, henon, henon_family};
use hsmaps_core::green::{
    green_plus, invariance_residuals, k_membership, raster_slice, sample_ball, FloatMap,
    GreenOptions, Membership, SliceSpec,
};
use proptest::prelude::*;

fn opts(max_iter: u32) -> GreenOptions {
    GreenOptions {
        radius: 1e4,
        max_iter,
    }
}

fn slice() -> SliceSpec {
    SliceSpec {
        base: vec![c(0.0, 0.0), c(0.0, 0.3)],
        dir_u: vec![c(1.0, 0.0), c(0.0, 0.0)],
        dir_v: vec![c(0.0, 0.0), c(1.0, 0.0)],
        window: (-2.5, 2.5, -2.5, 2.5),
        width: 40,
        height: 30,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_are_non_negative(f in henon_family(2), seed in any::<u64>()) {
        let fm = FloatMap::from_polymap(&f);
        for z in sample_ball(2, 3.0, 50, seed) {
            let g = green_plus(&fm, fm.degree(), &z, &opts(60)).unwrap();
            prop_assert!(g.value >= 0.0);
            prop_assert!(g.error_bound >= 0.0);
            if !g.escaped {
                prop_assert_eq!(g.value, 0.0);
            }
        }
    }

    #[test]
    fn functional_equation_within_bounds(f in henon_family(2), seed in any::<u64>()) {
        let fm = FloatMap::from_polymap(&f);
        let samples = sample_ball(2, 3.0, 50, seed);
        let r = invariance_residuals(&fm, fm.degree(), &samples, &opts(60)).unwrap();
        prop_assert!(r.iter().all(|&x| x == 0.0), "{r:?}");
    }

    #[test]
    fn larger_budgets_only_add_escapes(
        f in henon_family(2),
        seed in any::<u64>(),
        n1 in 1u32..20,
        extra in 1u32..40,
    ) {
        let fm = FloatMap::from_polymap(&f);
        let d = fm.degree();
        for z in sample_ball(2, 3.0, 30, seed) {
            let a = green_plus(&fm, d, &z, &opts(n1)).unwrap();
            let b = green_plus(&fm, d, &z, &opts(n1 + extra)).unwrap();
            if a.escaped {
                prop_assert!(b.escaped);
                prop_assert_eq!(a.value, b.value);
                prop_assert_eq!(a.iterations_used, b.iterations_used);
            }
            let ma = k_membership(&fm, &opts(n1), &z).unwrap();
            if let Membership::Escaped(n) = ma {
                prop_assert_eq!(k_membership(&fm, &opts(n1 + extra), &z).unwrap(), Membership::Escaped(n));
            }
        }
    }
}

#[test]
fn raster_is_independent_of_thread_count() {
    let fm = FloatMap::from_polymap(&henon());
    let spec = slice();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| raster_slice(&fm, 2, &spec, &opts(80)).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one, many);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_pgm(1.0, &mut a).unwrap();
    many.write_pgm(1.0, &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn doubling_the_budget_never_loses_escapes() {
    let fm = FloatMap::from_polymap(&henon());
    let spec = slice();
    let small = raster_slice(&fm, 2, &spec, &opts(10)).unwrap();
    let large = raster_slice(&fm, 2, &spec, &opts(20)).unwrap();
    let count = |g: &hsmaps_core::green::Grid| g.cells.iter().filter(|e| e.escaped).count();
    assert!(count(&large) >= count(&small));
    for (s, l) in small.cells.iter().zip(&large.cells) {
        assert!(!s.escaped || l.escaped);
    }
}

#[test]
fn cubic_estimates_are_finite_on_a_ball() {
    let f = cubic();
    let fm = FloatMap::from_polymap(&f);
    for z in sample_ball(3, 3.0, 200, 7) {
        let g = green_plus(&fm, 2, &z, &opts(200)).unwrap();
        assert!(g.value.is_finite() && g.value >= 0.0);
    }
}
