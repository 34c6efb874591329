mod common;

use common::{big_omega, brute_kfree, poly};
use powerfree_core::arith::{build_tables, SieveConfig};
use powerfree_core::kfree::{kfree_mask, KfreeConfig, KfreePlan};
use proptest::prelude::*;

#[test]
fn mobius_divisor_sums() {
    let t = build_tables(1, 5001, &SieveConfig::default()).unwrap();
    for n in 1..=5000u64 {
        let s: i32 = (1..=n).filter(|d| n % d == 0).map(|d| t.mobius(d).unwrap() as i32).sum();
        assert_eq!(s, (n == 1) as i32, "n = {n}");
    }
}

#[test]
fn liouville_completely_multiplicative() {
    let t = build_tables(1, 10_001, &SieveConfig::default()).unwrap();
    for a in 1..=100u64 {
        for b in 1..=100u64 {
            assert_eq!(t.liouville(a * b).unwrap(), t.liouville(a).unwrap() * t.liouville(b).unwrap());
        }
    }
    for n in 1..=10_000u64 {
        assert_eq!(t.omega(n).unwrap() as u32, big_omega(n));
    }
}

#[test]
fn segment_size_does_not_matter() {
    let whole = build_tables(1, 20_000, &SieveConfig::default()).unwrap();
    for seg in [1usize, 7, 1000, 4096] {
        let cfg = SieveConfig { segment: seg, ..SieveConfig::default() };
        assert_eq!(build_tables(1, 20_000, &cfg).unwrap(), whole);
    }
    let f = poly(&[2, 0, 0, 1]);
    let base = kfree_mask(&f, 2, 5000, &KfreeConfig::default()).unwrap();
    for seg in [1usize, 64, 999] {
        let cfg = KfreeConfig { segment: seg, ..KfreeConfig::default() };
        assert_eq!(kfree_mask(&f, 2, 5000, &cfg).unwrap(), base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kfree_matches_factoring(c in proptest::collection::vec(-40i64..40, 1..4), lead in 1i64..4, k in 2u32..4) {
        let mut c = c;
        c.push(lead);
        let f = poly(&c);
        let Ok(plan) = KfreePlan::new(&f, k, 600, &KfreeConfig::default()) else {
            return Ok(());
        };
        let mask = plan.run(&KfreeConfig { segment: 97, ..KfreeConfig::default() });
        for n in 1..=600u64 {
            prop_assert_eq!(mask.is_kfree(n).unwrap(), brute_kfree(&f, k, n), "f = {}, n = {}", f, n);
        }
    }

    #[test]
    fn offset_segments_agree(lo in 1u64..100_000, len in 1u64..3000) {
        let t = build_tables(lo, lo + len, &SieveConfig { segment: 257, ..SieveConfig::default() }).unwrap();
        for n in lo..lo + len {
            prop_assert_eq!(t.omega(n).unwrap() as u32, big_omega(n));
        }
    }
}
