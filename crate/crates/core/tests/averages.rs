mod common;

use powerfree_core::density::{bb_constant, density, estermann_constant, legendre, twin_constant, DensityResult};
use powerfree_core::dynamics::{iterated_orbit_table, orbit_table, Observable, Point, System, TrigTerm, GOLDEN, MAX_J};
use powerfree_core::ergodic::{direct_sum, ergodic_average, omega_histogram, ArgumentMap, Beatty};
use powerfree_core::kfree::{kfree_mask, KfreeConfig};
use powerfree_core::BitSet;
use proptest::prelude::*;

fn nested(make: impl Fn(u64) -> DensityResult) {
    let bounds = [100u64, 1000, 10_000, 100_000];
    let rs: Vec<DensityResult> = bounds.iter().map(|&p| make(p)).collect();
    for (i, a) in rs.iter().enumerate() {
        assert!(a.lower <= a.value && a.value <= a.upper);
        for b in &rs[i + 1..] {
            assert!(a.lower <= b.lower && b.upper <= a.upper, "{a:?} vs {b:?}");
            assert!(a.contains(b.value));
            assert!(b.width() <= a.width());
        }
    }
}

#[test]
fn density_intervals_nest() {
    nested(|p| twin_constant(p).unwrap());
    nested(|p| estermann_constant(p).unwrap());
    nested(|p| bb_constant(p).unwrap());
    let f = common::poly(&[5, 0, 0, 1]);
    nested(|p| density(&f, 2, p).unwrap());
}

#[test]
fn product_density_matches_legendre_product() {
    let f = common::poly(&[1, 0, 1]).mul(&common::poly(&[2, 0, 1]));
    let g = density(&f, 2, 100_000).unwrap();
    let b = bb_constant(100_000).unwrap();
    assert!((g.value - b.value).abs() <= 1e-10 * b.value);
}

#[test]
fn orbit_closed_form_matches_iteration() {
    let sys = System::CyclicRotation(5);
    let obs = Observable::Cyclic(vec![0.5, -1.0, 2.0, 0.0, 3.25]);
    for x in 0..5 {
        let a = orbit_table(&sys, &obs, Point::Index(x), MAX_J).unwrap();
        let b = iterated_orbit_table(&sys, &obs, Point::Index(x), MAX_J).unwrap();
        assert_eq!(a, b);
        let rotated: Vec<f64> = (0..5).map(|i| obs.eval(sys.step(Point::Index(i)))).collect();
        assert_eq!(Observable::Cyclic(rotated).mean(), obs.mean());
    }
}

#[test]
fn two_point_table_reproduces_liouville() {
    let t = orbit_table(&System::TwoPoint, &Observable::TwoPoint(1.0, -1.0), Point::Index(0), 20).unwrap();
    for n in 1..=10_000u64 {
        let lambda = if common::big_omega(n) % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(t.values[common::big_omega(n) as usize], lambda);
    }
}

#[test]
fn two_point_average_is_liouville_mean_on_a_condition() {
    let f = common::poly(&[1, 0, 1]);
    let mask = kfree_mask(&f, 2, 5000, &KfreeConfig::default()).unwrap().into_bits();
    let h = omega_histogram(5000, Some(&mask), &ArgumentMap::Identity).unwrap();
    let t = orbit_table(&System::TwoPoint, &Observable::TwoPoint(1.0, -1.0), Point::Index(0), 16).unwrap();
    let direct: i64 = mask.iter_ones().map(|i| if common::big_omega(i as u64 + 1) % 2 == 0 { 1 } else { -1 }).sum();
    assert_eq!(ergodic_average(&h, &t).unwrap(), direct as f64 / 5000.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn histogram_faithful(seed in any::<u64>(), kind in 0u8..3, map in 0u8..3, x in 0.0f64..1.0) {
        let n = 10_000u64;
        let mut s = seed;
        let mask = BitSet::from_fn(n as usize, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            s >> 62 != 0
        });
        let argmap = match map {
            0 => ArgumentMap::Identity,
            1 => ArgumentMap::Progression { m: 3, r: 2 },
            _ => ArgumentMap::Beatty(Beatty::Real { alpha: 1.0 + GOLDEN, beta: 0.25 }),
        };
        let (sys, obs, pt) = match kind {
            0 => (System::TwoPoint, Observable::TwoPoint(0.75, -1.5), Point::Index(1)),
            1 => (System::CyclicRotation(4), Observable::Cyclic(vec![1.0, 0.5, -0.25, 2.0]), Point::Index(3)),
            _ => (
                System::CircleRotation(GOLDEN),
                Observable::Circle { constant: 1.0, terms: vec![TrigTerm { h: 2, a: 0.5, b: -1.0 }] },
                Point::Real(x),
            ),
        };
        let table = orbit_table(&sys, &obs, pt, 40).unwrap();
        let h = omega_histogram(n, Some(&mask), &argmap).unwrap();
        let avg = ergodic_average(&h, &table).unwrap();
        let direct = direct_sum(n, Some(&mask), &argmap, &table).unwrap() / n as f64;
        if kind < 2 {
            prop_assert_eq!(avg, direct);
        } else {
            prop_assert!((avg - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_laws(a in -10_000i64..10_000, b in -10_000i64..10_000, pi in 1usize..160) {
        let p = common::small_primes(1000)[pi];
        let la = legendre(a, p).unwrap();
        let lb = legendre(b, p).unwrap();
        prop_assert_eq!(legendre(a * b, p).unwrap(), la * lb);
        if a.rem_euclid(p as i64) != 0 {
            prop_assert_eq!(la * la, 1);
        }
    }
}
