use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::PointConfig;
use crate::error::{Error, Result};
use crate::linalg::{int_rank, ExactScalar};

/// Largest point count for the flag-sum enumeration.
pub const MAX_FLAG_POINTS: usize = 16;
/// Largest projective dimension for the flag-sum enumeration.
pub const MAX_FLAG_N: usize = 4;

/// Combinatorial flag of an independent tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagValue {
    /// `(q_n, ..., q_1)`: `q_l` counts the points in the span of the last `l` entries.
    pub q: Vec<usize>,
    pub product: BigInt,
    /// One minus the weight of the points in the span of the whole tuple.
    pub top_weight: ExactScalar,
}

fn in_span(basis: &[Vec<i64>], v: &[i64]) -> bool {
    let mut rows = basis.to_vec();
    rows.push(v.to_vec());
    int_rank(&rows) == basis.len()
}

/// Flag of the tuple `w` (indices into `h`, length `n`).
pub fn flag_of(w: &[usize], h: &PointConfig) -> Result<FlagValue> {
    let n = h.n();
    if w.len() != n {
        return Err(Error::InvalidTuple(format!("length {} != n = {n}", w.len())));
    }
    if let Some(&bad) = w.iter().find(|&&i| i >= h.len()) {
        return Err(Error::InvalidTuple(format!("index {bad} out of range")));
    }
    for (a, &i) in w.iter().enumerate() {
        if w[a + 1..].contains(&i) {
            return Err(Error::InvalidTuple(format!("index {i} repeated")));
        }
    }
    let rows: Vec<Vec<i64>> = w.iter().map(|&i| h.points()[i].clone()).collect();
    if int_rank(&rows) < n {
        return Err(Error::InvalidTuple("entries are linearly dependent".into()));
    }
    let mut q = Vec::with_capacity(n);
    let mut top_members = Vec::new();
    for l in (1..=n).rev() {
        let suffix = &rows[n - l..];
        let inside: Vec<usize> = (0..h.len()).filter(|&j| in_span(suffix, &h.points()[j])).collect();
        if l == n {
            top_members = inside.clone();
        }
        q.push(inside.len());
    }
    let product = q.iter().fold(BigInt::one(), |a, &x| a * x);
    let covered = top_members
        .iter()
        .fold(ExactScalar::zero(), |a, &j| a + &h.weights()[j]);
    Ok(FlagValue {
        q,
        product,
        top_weight: ExactScalar::one() - covered,
    })
}

/// Weight-free summary of every flag: for each (points in the top span,
/// product) the number of ordered tuples producing it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlagTally {
    counts: BTreeMap<(u32, u64), u64>,
}

impl FlagTally {
    /// Number of ordered independent tuples.
    pub fn tuples(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `Σ top_weight / product` under `weights`.
    pub fn evaluate(&self, weights: &[ExactScalar]) -> ExactScalar {
        self.evaluate_signed(weights, false)
    }

    /// Used by the verification battery to check that a corrupted sum is caught.
    #[doc(hidden)]
    pub fn evaluate_signed(&self, weights: &[ExactScalar], flip_top_weight: bool) -> ExactScalar {
        let mut total = ExactScalar::zero();
        for (&(mask, product), &count) in &self.counts {
            let covered = (0..weights.len())
                .filter(|i| mask >> i & 1 == 1)
                .fold(ExactScalar::zero(), |a, i| a + &weights[i]);
            let mut top = ExactScalar::one() - covered;
            if flip_top_weight {
                top = -top;
            }
            total += top * BigRational::new(BigInt::from(count), BigInt::from(product));
        }
        total
    }
}

/// Integer vectors orthogonal to the current span; a point lies in the
/// span iff every normal annihilates it.
#[derive(Clone)]
struct Complement {
    normals: Vec<Vec<i128>>,
}

fn dot(a: &[i128], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, &y)| x * y as i128).sum()
}

impl Complement {
    fn full(d: usize) -> Self {
        Complement {
            normals: (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect(),
        }
    }

    fn contains(&self, v: &[i64]) -> bool {
        self.normals.iter().all(|u| dot(u, v) == 0)
    }

    /// Complement of `span + v`, for `v` outside the span.
    fn extend(&self, v: &[i64]) -> Self {
        let k = self
            .normals
            .iter()
            .position(|u| dot(u, v) != 0)
            .expect("v outside the span");
        let u = &self.normals[k];
        let uv = dot(u, v);
        let normals = self
            .normals
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, w)| {
                let wv = dot(w, v);
                let mut r: Vec<i128> = w.iter().zip(u).map(|(a, b)| uv * a - wv * b).collect();
                let g = r.iter().fold(0i128, |g, x| g.gcd(x));
                if g > 1 {
                    r.iter_mut().for_each(|x| *x /= g);
                }
                r
            })
            .collect();
        Complement { normals }
    }
}

fn check_guard(h: &PointConfig) -> Result<()> {
    if h.len() > MAX_FLAG_POINTS || h.n() > MAX_FLAG_N {
        return Err(Error::GuardExceeded(format!(
            "flag sum needs T <= {MAX_FLAG_POINTS} and n <= {MAX_FLAG_N}, got T = {} and n = {}",
            h.len(),
            h.n()
        )));
    }
    Ok(())
}

/// Enumerates the independent `n`-tuples from the last position backwards,
/// growing the span one point at a time.
pub fn flag_tally(h: &PointConfig) -> Result<FlagTally> {
    check_guard(h)?;
    let n = h.n();
    let t = h.len();
    let pts = h.points();

    fn descend(
        pts: &[Vec<i64>],
        n: usize,
        depth: usize,
        comp: &Complement,
        product: u64,
        tally: &mut BTreeMap<(u32, u64), u64>,
    ) {
        let inside = (0..pts.len())
            .filter(|&j| comp.contains(&pts[j]))
            .fold(0u32, |m, j| m | 1 << j);
        let product = product * inside.count_ones() as u64;
        if depth == n {
            *tally.entry((inside, product)).or_insert(0) += 1;
            return;
        }
        for j in 0..pts.len() {
            if inside >> j & 1 == 0 {
                descend(pts, n, depth + 1, &comp.extend(&pts[j]), product, tally);
            }
        }
    }

    let parts: Vec<BTreeMap<(u32, u64), u64>> = (0..t)
        .into_par_iter()
        .map(|last| {
            let mut local = BTreeMap::new();
            let comp = Complement::full(h.ambient()).extend(&pts[last]);
            descend(pts, n, 1, &comp, 1, &mut local);
            local
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    Ok(FlagTally { counts })
}

/// `Σ_W top_weight(W) / W[H]` over ordered independent `n`-tuples; zero
/// when the points do not span.
pub fn eta_star_flagsum(h: &PointConfig) -> Result<ExactScalar> {
    check_guard(h)?;
    if !h.spans() {
        return Ok(ExactScalar::zero());
    }
    Ok(flag_tally(h)?.evaluate(h.weights()))
}
