//! Enumeration of span ∩ {±1}^n by a Gray-code walk over the pivot signs.
//!
//! A vector of the row space is fixed by its pivot coordinates, so a member
//! of {±1}^n in the span is `Σ s_j B_j` for signs `s_j` on the pivots, where
//! `B` is the reduced basis. With `D*B` held as integers, the walk keeps
//! `x = Σ s_j D B_j` on the free columns and accepts when every entry is `±D`.
//! One sign flip moves `x` by `±2 D B_j`. The first pivot sign is fixed to
//! `+1`, which visits each projective class once.

use std::ops::ControlFlow;

use num_bigint::BigInt;

use crate::linalg::{Echelon, IntEchelon, Ring};
use crate::signspace::{canonical_projective, SignMatrix, SignVector};

struct Walk<T> {
    n: usize,
    rank: usize,
    det: T,
    neg_det: T,
    pivots: Vec<usize>,
    free_cols: Vec<usize>,
    start: Vec<T>,
    step: Vec<Vec<T>>,
    coef_start: Vec<T>,
    coef_step: Vec<Vec<T>>,
}

impl<T: Ring> Walk<T> {
    /// `None` if some running sum could leave the range of `T`.
    fn new(e: &Echelon<T>, n: usize, track: bool) -> Option<Self> {
        let rank = e.rank;
        let free_cols: Vec<usize> = (0..n).filter(|c| !e.pivots.contains(c)).collect();
        let basis = &e.rows[..rank];
        let mut start = Vec::with_capacity(free_cols.len());
        let mut step: Vec<Vec<T>> = vec![Vec::with_capacity(free_cols.len()); rank];
        for &c in &free_cols {
            let mut sum = T::zero();
            let mut bound = T::zero();
            for (j, row) in basis.iter().enumerate() {
                sum = sum.checked_add(&row[c])?;
                bound = bound.checked_add(&row[c].abs())?;
                step[j].push(row[c].checked_add(&row[c])?);
            }
            bound.checked_add(&bound)?;
            start.push(sum);
        }
        let (coef_start, coef_step) = if track {
            let g = e.aug.first().map_or(0, Vec::len);
            let mut cs = Vec::with_capacity(g);
            let mut st: Vec<Vec<T>> = vec![Vec::with_capacity(g); rank];
            for i in 0..g {
                let mut sum = T::zero();
                let mut bound = T::zero();
                for (j, row) in e.aug[..rank].iter().enumerate() {
                    sum = sum.checked_add(&row[i])?;
                    bound = bound.checked_add(&row[i].abs())?;
                    st[j].push(row[i].checked_add(&row[i])?);
                }
                bound.checked_add(&bound)?;
                cs.push(sum);
            }
            (cs, st)
        } else {
            (Vec::new(), Vec::new())
        };
        Some(Walk {
            n,
            rank,
            neg_det: e.det.negated(),
            det: e.det.clone(),
            pivots: e.pivots.clone(),
            free_cols,
            start,
            step,
            coef_start,
            coef_step,
        })
    }

    fn run<F>(&self, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(SignVector, u64) -> ControlFlow<()>,
    {
        if self.rank == 0 {
            return ControlFlow::Continue(());
        }
        let mut x = self.start.clone();
        let mut y = self.coef_start.clone();
        let mut negative = vec![false; self.rank];
        let mut pivot_bits = 0u64;
        let total: u64 = 1u64 << (self.rank - 1);
        for i in 0..total {
            if i > 0 {
                let j = i.trailing_zeros() as usize + 1;
                negative[j] = !negative[j];
                pivot_bits ^= 1 << self.pivots[j];
                if negative[j] {
                    for (a, d) in x.iter_mut().zip(&self.step[j]) {
                        *a -= d;
                    }
                    if let Some(st) = self.coef_step.get(j) {
                        for (a, d) in y.iter_mut().zip(st) {
                            *a -= d;
                        }
                    }
                } else {
                    for (a, d) in x.iter_mut().zip(&self.step[j]) {
                        *a += d;
                    }
                    if let Some(st) = self.coef_step.get(j) {
                        for (a, d) in y.iter_mut().zip(st) {
                            *a += d;
                        }
                    }
                }
            }
            if !x.iter().all(|v| *v == self.det || *v == self.neg_det) {
                continue;
            }
            let mut bits = pivot_bits;
            for (v, &c) in x.iter().zip(&self.free_cols) {
                if *v == self.neg_det {
                    bits |= 1 << c;
                }
            }
            let support = y
                .iter()
                .enumerate()
                .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
                .fold(0u64, |m, (k, _)| m | 1 << k);
            let w = canonical_projective(SignVector::from_raw(self.n, bits));
            visit(w, support)?;
        }
        ControlFlow::Continue(())
    }
}

enum WalkKind {
    Small(Walk<i128>),
    Big(Walk<BigInt>),
}

/// Row-space scanner for a sign matrix.
pub(crate) struct SpanScanner {
    walk: WalkKind,
    rank: usize,
    /// Generator positions on which every left-kernel vector vanishes.
    rigid: u64,
}

impl SpanScanner {
    /// With `track_coefficients`, visits also receive the bitmask of
    /// generators with a nonzero coefficient in the particular solution.
    pub fn new(m: &SignMatrix, track_coefficients: bool) -> Self {
        let rows = m.to_int_rows();
        let e = IntEchelon::from_i64_rows(&rows, m.n(), track_coefficients);
        let rank = e.rank();
        let rigid = if track_coefficients {
            rigid_mask(&e, m.p())
        } else {
            0
        };
        let walk = match e {
            IntEchelon::Small(small) => match Walk::new(&small, m.n(), track_coefficients) {
                Some(w) => WalkKind::Small(w),
                None => WalkKind::Big(
                    Walk::new(&small.map_to_bigint(), m.n(), track_coefficients)
                        .expect("bigint never overflows"),
                ),
            },
            IntEchelon::Big(big) => WalkKind::Big(
                Walk::new(&big, m.n(), track_coefficients).expect("bigint never overflows"),
            ),
        };
        SpanScanner { walk, rank, rigid }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rigid_mask(&self) -> u64 {
        self.rigid
    }

    /// Visits every canonical member of span ∩ {±1}^n once.
    pub fn for_each<F>(&self, visit: F) -> ControlFlow<()>
    where
        F: FnMut(SignVector, u64) -> ControlFlow<()>,
    {
        match &self.walk {
            WalkKind::Small(w) => w.run(visit),
            WalkKind::Big(w) => w.run(visit),
        }
    }
}

fn rigid_mask(e: &IntEchelon, p: usize) -> u64 {
    fn mask<T: Ring>(e: &Echelon<T>, p: usize) -> u64 {
        (0..p)
            .filter(|&i| e.aug[e.rank..].iter().all(|row| row[i].is_zero()))
            .fold(0u64, |m, i| m | 1 << i)
    }
    match e {
        IntEchelon::Small(s) => mask(s, p),
        IntEchelon::Big(b) => mask(b, p),
    }
}
