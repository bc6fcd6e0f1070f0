//! Exhaustive counting over all sign matrices of a shape.

use std::ops::ControlFlow;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::scan::SpanScanner;
use super::{kso_holds, support_events, EventSpec};
use crate::error::{Error, Result};
use crate::linalg::{format_scalar, int_rank, ExactScalar};
use crate::signspace::{en_points, SignMatrix};

/// Largest `p*n` counted without the row-fixing symmetry.
pub const MAX_EXHAUSTIVE_BITS: usize = 26;
/// Largest `p*n` counted with the first row fixed to all-ones.
pub const MAX_EXHAUSTIVE_BITS_SYMMETRIC: usize = 32;
/// Largest `n` for [`count_kso_independent_tuples`].
pub const MAX_TUPLE_N: usize = 5;
/// Largest `n` for [`delta`].
pub const MAX_DELTA_N: usize = 4;

const CHUNKS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    /// Fix row 0 to all-ones and scale by `2^n` (column sign symmetry).
    /// Ignored for events without that symmetry.
    pub symmetry: bool,
    /// Skip the size guards.
    pub force: bool,
    pub workers: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            symmetry: true,
            force: false,
            workers: 1,
        }
    }
}

/// Exact count of an event over every matrix of its shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCount {
    pub spec: EventSpec,
    pub count: u128,
    pub total: u128,
}

impl ExactCount {
    pub fn probability(&self) -> ExactScalar {
        BigRational::new(BigInt::from(self.count), BigInt::from(self.total))
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "event": self.spec.kind.name(),
            "p": self.spec.p,
            "n": self.spec.n,
            "count": self.count.to_string(),
            "total": self.total.to_string(),
            "probability": format_scalar(&self.probability()),
        });
        if let Some(m) = self.spec.kind.m() {
            v["m"] = json!(m);
        }
        v
    }
}

/// Counts of every event over one shape, from a single pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProfile {
    pub p: usize,
    pub n: usize,
    pub total: u128,
    pub kso: u128,
    pub rank_deficient: u128,
    /// Indexed by `m` (entry 0 unused).
    pub support: Vec<u128>,
    /// Indexed by `m` (entry 0 unused); independent rows only.
    pub independent_support: Vec<u128>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Applies `tally` to every `p x n` matrix (or every matrix with row 0 fixed
/// to all-ones when `reduce`), summing `width` counters. Reduced counts are
/// scaled back by `2^n`.
fn exhaust<F>(p: usize, n: usize, reduce: bool, opts: &ExactOptions, width: usize, tally: F) -> Result<Vec<u128>>
where
    F: Fn(&SignMatrix, &mut [u64]) + Sync,
{
    let bits = p * n;
    let limit = if reduce {
        MAX_EXHAUSTIVE_BITS_SYMMETRIC
    } else {
        MAX_EXHAUSTIVE_BITS
    };
    if bits > limit && !opts.force {
        return Err(Error::GuardExceeded(format!(
            "p*n = {bits} exceeds {limit}; pass force to override"
        )));
    }
    let free = if reduce { bits - n } else { bits };
    if free > 62 || bits > 64 {
        return Err(Error::GuardExceeded(format!("p*n = {bits} is beyond enumeration")));
    }
    let range = 1u64 << free;
    let chunks = range.min(CHUNKS);
    let per_chunk = range / chunks;
    let shift = if reduce { n } else { 0 };
    let counts = pool(opts.workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut local = vec![0u64; width];
                for idx in c * per_chunk..(c + 1) * per_chunk {
                    tally(&SignMatrix::from_index(p, n, idx << shift), &mut local);
                }
                local
            })
            .reduce(
                || vec![0u64; width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    let scale = if reduce { 1u128 << n } else { 1 };
    Ok(counts.into_iter().map(|c| c as u128 * scale).collect())
}

/// Exact probability of `spec` over all `2^{pn}` equiprobable sign matrices.
pub fn exact_event_probability(spec: &EventSpec, opts: &ExactOptions) -> Result<ExactCount> {
    spec.validate()?;
    let reduce = opts.symmetry && spec.column_sign_symmetric();
    let counts = exhaust(spec.p, spec.n, reduce, opts, 1, |m, acc| {
        if spec.occurs(m) {
            acc[0] += 1;
        }
    })?;
    Ok(ExactCount {
        spec: *spec,
        count: counts[0],
        total: 1u128 << (spec.p * spec.n),
    })
}

/// Counts KSO, rank deficiency and both support events for every `m` in one
/// pass over all `p x n` sign matrices.
pub fn exact_profile(p: usize, n: usize, opts: &ExactOptions) -> Result<ExactProfile> {
    if p == 0 || n == 0 || p > 64 {
        return Err(Error::InvalidArgument(format!("shape {p}x{n}")));
    }
    // layout: kso, rank-deficient, support[1..=p], independent support[1..=p]
    let width = 2 + 2 * p;
    let counts = exhaust(p, n, opts.symmetry, opts, width, |m, acc| {
        let scanner = SpanScanner::new(m, true);
        let mask = if scanner.rank() == p {
            let mut mask = 0u64;
            let _ = scanner.for_each(|_, support| {
                mask |= 1 << support.count_ones();
                ControlFlow::Continue(())
            });
            if mask & !0b11 != 0 {
                acc[0] += 1;
            }
            for k in 1..=p {
                acc[1 + p + k] += mask >> k & 1;
            }
            mask
        } else {
            acc[1] += 1;
            if kso_holds(m) {
                acc[0] += 1;
            }
            support_events(m).expect("p <= 64")
        };
        for k in 1..=p {
            acc[1 + k] += mask >> k & 1;
        }
    })?;
    Ok(ExactProfile {
        p,
        n,
        total: 1u128 << (p * n),
        kso: counts[0],
        rank_deficient: counts[1],
        support: std::iter::once(0).chain(counts[2..2 + p].iter().copied()).collect(),
        independent_support: std::iter::once(0).chain(counts[2 + p..].iter().copied()).collect(),
    })
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Ordered `n`-tuples of distinct, independent E_n points (in dimension
/// `n+1`) whose span holds a ±1 vector beyond the ± tuple members.
pub fn count_kso_independent_tuples(n: usize) -> Result<u64> {
    if n == 0 || n > MAX_TUPLE_N {
        return Err(Error::GuardExceeded(format!(
            "tuple count needs 1 <= n <= {MAX_TUPLE_N}, got {n}"
        )));
    }
    let points: Vec<_> = en_points(n)?.into_iter().map(|e| e.vector()).collect();
    let sets = points
        .iter()
        .copied()
        .combinations(n)
        .filter(|rows| {
            let m = SignMatrix::new(rows.clone()).expect("nonempty");
            int_rank(&m.to_int_rows()) == n && kso_holds(&m)
        })
        .count() as u64;
    // the condition ignores order
    Ok(sets * factorial(n))
}

/// Fraction of ordered `k`-tuples of distinct E_n points that are linearly
/// dependent.
pub fn delta(n: usize, k: usize) -> Result<ExactScalar> {
    if n == 0 || n > MAX_DELTA_N {
        return Err(Error::GuardExceeded(format!(
            "delta needs 1 <= n <= {MAX_DELTA_N}, got {n}"
        )));
    }
    if k == 0 || k > n + 1 {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            allowed: "1..=n+1",
        });
    }
    let points: Vec<_> = en_points(n)?.into_iter().map(|e| e.vector().to_signs()).collect();
    let dependent = points
        .iter()
        .cloned()
        .combinations(k)
        .filter(|rows| int_rank(rows) < k)
        .count();
    let total = binomial(BigInt::from(points.len()), BigInt::from(k));
    Ok(BigRational::new(BigInt::from(dependent), total))
}
