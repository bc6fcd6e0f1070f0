//! Span events of sign matrices: the KSO condition, support-m combinations,
//! rank deficiency and singularity, decided exactly.

mod exact;
mod scan;

pub use exact::{
    count_kso_independent_tuples, delta, exact_event_probability, exact_profile, ExactCount,
    ExactOptions, ExactProfile,
    MAX_DELTA_N, MAX_EXHAUSTIVE_BITS, MAX_EXHAUSTIVE_BITS_SYMMETRIC, MAX_TUPLE_N,
};

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{build_row_basis, express_in_span, int_rank, ExactScalar};
use crate::signspace::{canonical_projective, enumerate_sign_vectors, SignMatrix, SignVector, MAX_LEN};
use scan::SpanScanner;

/// A ±1 vector in the row span together with a coefficient certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub witness: SignVector,
    /// Coefficients over the original rows; unique when the rows are independent.
    pub coefficients: Vec<ExactScalar>,
    pub support: usize,
}

/// Decides the KSO condition: the row span contains a ±1 vector other than
/// `±row_i`. Returns the first such witness in scan order (canonical sign).
pub fn kso_check(m: &SignMatrix) -> Option<WitnessReport> {
    let witness = kso_witness(m)?;
    let basis = build_row_basis(&m.to_exact());
    let coefficients = express_in_span(&basis, &witness.to_exact())
        .expect("lengths agree")
        .expect("witness lies in the span");
    let support = coefficients.iter().filter(|c| !c.is_zero()).count();
    Some(WitnessReport {
        witness,
        coefficients,
        support,
    })
}

/// The KSO decision without the coefficient certificate.
pub fn kso_holds(m: &SignMatrix) -> bool {
    kso_witness(m).is_some()
}

fn kso_witness(m: &SignMatrix) -> Option<SignVector> {
    let rows: HashSet<SignVector> = m.rows().iter().map(|&r| canonical_projective(r)).collect();
    let scanner = SpanScanner::new(m, false);
    if scanner.rank() < 3 {
        // spans of dimension <= 2 hold no ±1 vectors beyond ±rows
        return None;
    }
    let mut found = None;
    let _ = scanner.for_each(|w, _| {
        if rows.contains(&w) {
            ControlFlow::Continue(())
        } else {
            found = Some(w);
            ControlFlow::Break(())
        }
    });
    found
}

fn check_coefficient_width(m: &SignMatrix) -> Result<()> {
    if m.p() > MAX_LEN {
        return Err(Error::OutOfRange {
            what: "p",
            value: m.p(),
            allowed: "1..=64 for coefficient tracking",
        });
    }
    Ok(())
}

/// Number of projective witness classes per coefficient support size, for
/// matrices with independent rows.
pub fn witness_support_census(m: &SignMatrix) -> Result<BTreeMap<usize, u64>> {
    check_coefficient_width(m)?;
    let scanner = SpanScanner::new(m, true);
    if scanner.rank() < m.p() {
        return Err(Error::DependentRows);
    }
    let mut census = BTreeMap::new();
    let _ = scanner.for_each(|_, support| {
        *census.entry(support.count_ones() as usize).or_insert(0u64) += 1;
        ControlFlow::Continue(())
    });
    if census.get(&2).copied().unwrap_or(0) != 0 {
        return Err(Error::InvariantViolation(format!(
            "support-2 witness for independent rows of {m:?}"
        )));
    }
    if census.get(&1).copied().unwrap_or(0) != m.p() as u64 {
        return Err(Error::InvariantViolation(format!(
            "support-1 classes differ from the row count for {m:?}"
        )));
    }
    Ok(census)
}

/// Does some combination of *all* rows of `sub`, every coefficient nonzero,
/// land in {±1}^n?
fn has_full_support_combination(sub: &SignMatrix) -> bool {
    let scanner = SpanScanner::new(sub, true);
    let rigid = scanner.rigid_mask();
    scanner
        .for_each(|_, support| {
            if rigid & !support == 0 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
}

/// Bitmask over `m` of the support-m events: bit `m` is set iff some `m`
/// rows have a combination with all coefficients nonzero lying in {±1}^n.
pub fn support_events(m: &SignMatrix) -> Result<u64> {
    check_coefficient_width(m)?;
    let p = m.p();
    let scanner = SpanScanner::new(m, true);
    if scanner.rank() == p {
        let mut mask = 0u64;
        let _ = scanner.for_each(|_, support| {
            mask |= 1 << support.count_ones();
            ControlFlow::Continue(())
        });
        return Ok(mask);
    }
    let mut mask = 0u64;
    for size in 1..=p {
        let found = (0..p).combinations(size)
            .any(|subset| has_full_support_combination(&m.select(&subset)));
        if found {
            mask |= 1 << size;
        }
    }
    Ok(mask)
}

/// Subset-by-subset evaluation of the support-`size` event, valid for any rows.
pub fn support_event_by_subsets(m: &SignMatrix, size: usize) -> bool {
    (0..m.p()).combinations(size)
        .any(|subset| has_full_support_combination(&m.select(&subset)))
}

/// Largest `n` for [`count_pattern_triples`].
pub const MAX_TRIPLE_N: usize = 8;

/// Number of triples `(v1, v2, v3)` in ({±1}^n)^3 with
/// `s1 v1 + s2 v2 + s3 v3` in {±1}^n, for signs `pattern = (s1, s2, s3)`.
pub fn count_pattern_triples(n: usize, pattern: [i64; 3]) -> Result<u64> {
    if n == 0 || n > MAX_TRIPLE_N {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            allowed: "1..=8",
        });
    }
    if pattern.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidArgument(format!("pattern {pattern:?} is not a sign triple")));
    }
    let vs: Vec<Vec<i64>> = enumerate_sign_vectors(n)?.map(|v| v.to_signs()).collect();
    let mut count = 0;
    for a in &vs {
        for b in &vs {
            for c in &vs {
                let ok = (0..n).all(|j| (pattern[0] * a[j] + pattern[1] * b[j] + pattern[2] * c[j]).abs() == 1);
                count += ok as u64;
            }
        }
    }
    Ok(count)
}

pub fn is_rank_deficient(m: &SignMatrix) -> bool {
    int_rank(&m.to_int_rows()) < m.p()
}

/// Event kinds over random sign matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    /// Span holds a ±1 vector other than ±rows.
    Kso,
    /// Some `m` rows combine, all coefficients nonzero, into a ±1 vector.
    Support { m: usize },
    /// Rows are independent and some `m` of them combine as in `Support`.
    IndependentSupport { m: usize },
    /// Rank below `p`.
    RankDeficient,
    /// Square ±1 matrix is singular.
    SingularPm1,
    /// Square 0/1 matrix is singular.
    Singular01,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Kso => "kso",
            EventKind::Support { .. } => "support",
            EventKind::IndependentSupport { .. } => "rm",
            EventKind::RankDeficient => "rank-deficient",
            EventKind::SingularPm1 => "singular",
            EventKind::Singular01 => "singular01",
        }
    }

    pub fn m(&self) -> Option<usize> {
        match self {
            EventKind::Support { m } | EventKind::IndependentSupport { m } => Some(*m),
            _ => None,
        }
    }

    /// Inverse of [`EventKind::name`]; `m` is required for the support kinds.
    pub fn parse(name: &str, m: Option<usize>) -> Result<Self> {
        let need_m = || m.ok_or_else(|| Error::InvalidEvent(format!("event {name} needs m")));
        Ok(match name {
            "kso" => EventKind::Kso,
            "support" => EventKind::Support { m: need_m()? },
            "rm" => EventKind::IndependentSupport { m: need_m()? },
            "rank-deficient" => EventKind::RankDeficient,
            "singular" => EventKind::SingularPm1,
            "singular01" => EventKind::Singular01,
            other => return Err(Error::InvalidEvent(format!("unknown event {other:?}"))),
        })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, m)) => {
                let m = m
                    .parse()
                    .map_err(|_| Error::InvalidEvent(format!("bad m in {s:?}")))?;
                EventKind::parse(name, Some(m))
            }
            None => EventKind::parse(s, None),
        }
    }
}

/// An event together with the matrix shape it is posed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub p: usize,
    pub n: usize,
}

impl EventSpec {
    pub fn new(kind: EventKind, p: usize, n: usize) -> Result<Self> {
        let spec = EventSpec { kind, p, n };
        spec.validate()?;
        Ok(spec)
    }

    /// Square events take their size from `n`.
    pub fn square(kind: EventKind, n: usize) -> Result<Self> {
        Self::new(kind, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidEvent("p must be at least 1".into()));
        }
        if self.n == 0 || self.n > MAX_LEN {
            return Err(Error::InvalidEvent(format!("n = {} outside 1..=64", self.n)));
        }
        match self.kind {
            EventKind::Support { m } | EventKind::IndependentSupport { m } => {
                if m == 0 || m > self.p {
                    return Err(Error::InvalidEvent(format!(
                        "m = {m} outside 1..=p = {}",
                        self.p
                    )));
                }
                if self.p > MAX_LEN {
                    return Err(Error::InvalidEvent("support events need p <= 64".into()));
                }
            }
            EventKind::SingularPm1 | EventKind::Singular01 if self.p != self.n => {
                return Err(Error::InvalidEvent(format!(
                    "singularity needs a square matrix, got {}x{}",
                    self.p, self.n
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether the event holds for `m` (a ±1 matrix; for `Singular01` the
    /// bits are read as 0/1 entries).
    pub fn occurs(&self, m: &SignMatrix) -> bool {
        debug_assert_eq!((m.p(), m.n()), (self.p, self.n));
        match self.kind {
            EventKind::Kso => kso_holds(m),
            EventKind::Support { m: size } => {
                support_events(m).expect("validated p") >> size & 1 == 1
            }
            EventKind::IndependentSupport { m: size } => {
                let scanner = SpanScanner::new(m, true);
                scanner.rank() == m.p()
                    && scanner
                        .for_each(|_, support| {
                            if support.count_ones() as usize == size {
                                ControlFlow::Break(())
                            } else {
                                ControlFlow::Continue(())
                            }
                        })
                        .is_break()
            }
            EventKind::RankDeficient | EventKind::SingularPm1 => is_rank_deficient(m),
            EventKind::Singular01 => int_rank(&m.to_zero_one_rows()) < m.p(),
        }
    }

    /// Whether negating a column preserves the event (true for every ±1 event).
    pub fn column_sign_symmetric(&self) -> bool {
        !matches!(self.kind, EventKind::Singular01)
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.m() {
            Some(m) => write!(f, "{}(m={m}, p={}, n={})", self.kind, self.p, self.n),
            None => write!(f, "{}(p={}, n={})", self.kind, self.p, self.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, rank, ExactMatrix};
    use crate::signspace::random_sign_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&[i64]]) -> SignMatrix {
        SignMatrix::new(rows.iter().map(|r| SignVector::from_signs(r).unwrap()).collect()).unwrap()
    }

    /// Quadratic oracle: test every canonical w by an exact rank computation.
    fn naive_kso(m: &SignMatrix) -> bool {
        let base = m.to_int_rows();
        let r = rank(&m.to_exact());
        let rows: HashSet<SignVector> = m.rows().iter().map(|&v| canonical_projective(v)).collect();
        enumerate_sign_vectors(m.n())
            .unwrap()
            .filter(|w| w.is_canonical() && !rows.contains(w))
            .any(|w| {
                let mut stacked = base.clone();
                stacked.push(w.to_signs());
                rank(&ExactMatrix::from_int_rows(&stacked).unwrap()) == r
            })
    }

    #[test]
    fn kso_example_with_support_three() {
        let m = mat(&[&[1, 1, 1], &[1, -1, 1], &[1, -1, -1]]);
        let w = kso_check(&m).unwrap();
        assert_eq!(w.witness.to_signs(), vec![1, 1, -1]);
        assert_eq!(w.coefficients, vec![int(1), int(-1), int(1)]);
        assert_eq!(w.support, 3);
    }

    #[test]
    fn single_row_never_kso() {
        for v in enumerate_sign_vectors(5).unwrap() {
            assert!(kso_check(&SignMatrix::new(vec![v]).unwrap()).is_none());
        }
    }

    #[test]
    fn pairs_in_three_dims_never_kso() {
        let all: Vec<_> = enumerate_sign_vectors(3).unwrap().collect();
        for &a in &all {
            for &b in &all {
                assert!(kso_check(&SignMatrix::new(vec![a, b]).unwrap()).is_none());
                assert!(!naive_kso(&SignMatrix::new(vec![a, b]).unwrap()));
            }
        }
    }

    #[test]
    fn census_examples() {
        let m = mat(&[&[1, 1, 1], &[1, -1, 1], &[1, -1, -1]]);
        let c = witness_support_census(&m).unwrap();
        assert_eq!(c, BTreeMap::from([(1, 3), (3, 1)]));

        let one = mat(&[&[1, -1, 1]]);
        assert_eq!(witness_support_census(&one).unwrap(), BTreeMap::from([(1, 1)]));

        let h = mat(&[&[1, 1, 1, 1], &[1, 1, -1, -1], &[1, -1, 1, -1], &[1, -1, -1, 1]]);
        let c = witness_support_census(&h).unwrap();
        assert_eq!(c.values().sum::<u64>(), 8);

        let dep = mat(&[&[1, 1, 1], &[-1, -1, -1]]);
        assert!(matches!(witness_support_census(&dep), Err(Error::DependentRows)));
    }

    #[test]
    fn kso_agrees_with_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in 0..1000 {
            let p = 1 + t % 5;
            let n = 1 + (t / 5) % 8;
            let m = random_sign_matrix(p, n, &mut rng).unwrap();
            assert_eq!(kso_check(&m).is_some(), naive_kso(&m), "{m:?}");
            if let Some(w) = kso_check(&m) {
                let recon = m.to_exact().left_mul_vec(&w.coefficients).unwrap();
                assert_eq!(recon, w.witness.to_exact());
                assert!(w.support >= 1);
            }
        }
    }

    #[test]
    fn support_two_impossible_for_independent_pairs() {
        for n in 1..=5 {
            let all: Vec<_> = enumerate_sign_vectors(n).unwrap().collect();
            for &a in &all {
                for &b in &all {
                    let m = SignMatrix::new(vec![a, b]).unwrap();
                    if let Ok(c) = witness_support_census(&m) {
                        assert_eq!(c.get(&2), None);
                        assert_eq!(c[&1], 2);
                    }
                }
            }
        }
    }

    #[test]
    fn subset_route_matches_census_on_independent_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for t in 0..300 {
            let p = 1 + t % 5;
            let n = p + (t / 5) % 4;
            let m = random_sign_matrix(p, n, &mut rng).unwrap();
            let mask = support_events(&m).unwrap();
            for size in 1..=p {
                assert_eq!(mask >> size & 1 == 1, support_event_by_subsets(&m, size), "{m:?} m={size}");
            }
        }
    }

    #[test]
    fn repeated_row_gives_dependent_support_two() {
        // 2*v - v = v: literal reading counts this combination
        let m = mat(&[&[1, -1, 1, 1], &[1, -1, 1, 1]]);
        assert!(support_event_by_subsets(&m, 2));
        assert_eq!(support_events(&m).unwrap() & 0b110, 0b110);
    }

    #[test]
    fn event_parsing_and_validation() {
        assert_eq!("kso".parse::<EventKind>().unwrap(), EventKind::Kso);
        assert_eq!("rm:3".parse::<EventKind>().unwrap(), EventKind::IndependentSupport { m: 3 });
        assert!("support".parse::<EventKind>().is_err());
        assert!(EventSpec::new(EventKind::Support { m: 4 }, 3, 5).is_err());
        assert!(EventSpec::new(EventKind::SingularPm1, 3, 4).is_err());
        assert!(EventSpec::square(EventKind::Singular01, 3).is_ok());
    }

    #[test]
    fn triple_patterns_small() {
        // per coordinate, 6 of the 8 sign triples give an odd sum of ±1
        for n in 1..=3 {
            assert_eq!(count_pattern_triples(n, [1, 1, 1]).unwrap(), 6u64.pow(n as u32));
            assert_eq!(count_pattern_triples(n, [1, 1, -1]).unwrap(), 6u64.pow(n as u32));
        }
        assert!(count_pattern_triples(2, [1, 2, 1]).is_err());
    }

    #[test]
    fn singular_two_by_two() {
        let singular = mat(&[&[1, -1], &[-1, 1]]);
        let regular = mat(&[&[1, 1], &[1, -1]]);
        let e = EventSpec::square(EventKind::SingularPm1, 2).unwrap();
        assert!(e.occurs(&singular));
        assert!(!e.occurs(&regular));
    }
}
