//! Invariants of the public API, checked on random inputs.

use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use signspan::estimate::wilson_interval;
use signspan::events::{kso_check, kso_holds, witness_support_census, EventKind, EventSpec};
use signspan::signspace::{SignMatrix, SignVector};
use signspan::Error;

fn matrix(max_p: usize, max_n: usize) -> impl Strategy<Value = SignMatrix> {
    (1..=max_p, 1..=max_n).prop_flat_map(|(p, n)| {
        prop::collection::vec(0u64..1 << n, p)
            .prop_map(move |rows| SignMatrix::new(rows.into_iter().map(|b| SignVector::new(n, b).unwrap()).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn witness_is_certified(m in matrix(6, 9)) {
        match kso_check(&m) {
            None => prop_assert!(!kso_holds(&m)),
            Some(r) => {
                prop_assert!(kso_holds(&m));
                let w = r.witness;
                prop_assert!(m.rows().iter().all(|&row| row != w && row != w.neg()));
                // coefficients reproduce the witness
                for j in 0..m.n() {
                    let s = m
                        .rows()
                        .iter()
                        .zip(&r.coefficients)
                        .fold(BigRational::zero(), |a, (row, c)| a + c * BigRational::from_integer(row.get(j).into()));
                    prop_assert_eq!(s, BigRational::from_integer(w.get(j).into()));
                }
                prop_assert_eq!(r.support, r.coefficients.iter().filter(|c| !c.is_zero()).count());
            }
        }
    }

    #[test]
    fn census_has_no_support_two(m in matrix(5, 10)) {
        match witness_support_census(&m) {
            Ok(c) => {
                prop_assert_eq!(c.get(&2).copied().unwrap_or(0), 0);
                prop_assert_eq!(c.get(&1).copied().unwrap_or(0), m.p() as u64);
                let beyond_rows: u64 = c.iter().filter(|(&k, _)| k >= 3).map(|(_, v)| v).sum();
                prop_assert_eq!(beyond_rows > 0, kso_holds(&m));
            }
            Err(Error::DependentRows) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn kso_is_invariant_under_sign_flips(m in matrix(5, 8), flips in any::<u64>(), cols in any::<u64>()) {
        let n = m.n();
        let mask = if n == 64 { u64::MAX } else { (1 << n) - 1 };
        let rows = m
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let b = r.bits() ^ (cols & mask) ^ if flips >> i & 1 == 1 { mask } else { 0 };
                SignVector::new(n, b).unwrap()
            })
            .collect();
        let flipped = SignMatrix::new(rows).unwrap();
        prop_assert_eq!(kso_holds(&m), kso_holds(&flipped));
    }

    #[test]
    fn text_round_trip(m in matrix(6, 20)) {
        prop_assert_eq!(SignMatrix::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn wilson_contains_point_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0, conf in 0.5f64..0.999) {
        let hits = (frac * trials as f64) as u64;
        let (lo, hi) = wilson_interval(hits, trials, conf).unwrap();
        let p = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        let (lo2, hi2) = wilson_interval(hits, trials, (conf + 1.0) / 2.0).unwrap();
        prop_assert!(lo2 <= lo && hi <= hi2);
    }

    #[test]
    fn event_names_round_trip(m in 1usize..6) {
        for kind in [EventKind::Kso, EventKind::Support { m }, EventKind::IndependentSupport { m }, EventKind::RankDeficient] {
            prop_assert_eq!(EventKind::parse(kind.name(), kind.m()).unwrap(), kind);
            let spec = EventSpec::new(kind, 6, 7).unwrap();
            prop_assert!(!spec.to_string().is_empty());
        }
    }
}
