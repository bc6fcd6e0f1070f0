use std::collections::HashMap;

use itertools::Itertools;

use super::PointConfig;
use crate::error::{Error, Result};
use crate::linalg::{int_rank, sparse_rank, PrimeField, Rationals, SparseColumn};

/// Largest point count for the skeleton.
pub const MAX_SKELETON_POINTS: usize = 20;
/// Largest ambient dimension for the skeleton.
pub const MAX_SKELETON_AMBIENT: usize = 7;

/// Coefficient field for the homology rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomologyField {
    Rationals,
    Prime(u64),
}

/// Simplices of K^H in the three sizes `n-1`, `n`, `n+1` (dimensions
/// `n-2..=n`). Subsets are bitmasks over the points; size 0 is the empty
/// simplex, which makes the chain complex augmented.
#[derive(Clone, Debug)]
pub struct SkeletonSlice {
    n: usize,
    /// `layers[i]` holds the simplices with `n - 1 + i` vertices, ascending.
    layers: [Vec<u32>; 3],
}

impl SkeletonSlice {
    /// Simplices with `k + 1` vertices, for `k` in `n-2..=n`.
    pub fn simplices(&self, k: isize) -> &[u32] {
        let i = k - (self.n as isize - 2);
        assert!((0..3).contains(&i), "dimension {k} not stored");
        &self.layers[i as usize]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn check_guard(h: &PointConfig) -> Result<()> {
    if h.len() > MAX_SKELETON_POINTS || h.ambient() > MAX_SKELETON_AMBIENT {
        return Err(Error::GuardExceeded(format!(
            "skeleton needs T <= {MAX_SKELETON_POINTS} and ambient <= {MAX_SKELETON_AMBIENT}, got T = {} and ambient = {}",
            h.len(),
            h.ambient()
        )));
    }
    Ok(())
}

/// Subsets spanning a proper subspace, with `n-1`, `n` and `n+1` points.
pub fn build_skeleton(h: &PointConfig) -> Result<SkeletonSlice> {
    check_guard(h)?;
    let n = h.n();
    let t = h.len();
    let subsets = |size: usize| -> Vec<u32> {
        let mut v: Vec<u32> = (0..t)
            .combinations(size)
            .map(|s| s.iter().fold(0u32, |m, &i| m | 1 << i))
            .collect();
        v.sort_unstable();
        v
    };
    // fewer than n+1 points never span the ambient space
    let top: Vec<u32> = subsets(n + 1)
        .into_iter()
        .filter(|&mask| {
            let rows: Vec<Vec<i64>> = members(mask).map(|i| h.points()[i].clone()).collect();
            int_rank(&rows) < h.ambient()
        })
        .collect();
    Ok(SkeletonSlice {
        n,
        layers: [subsets(n - 1), subsets(n), top],
    })
}

/// Boundary map from `upper` simplices to `lower` ones, as sparse columns.
fn boundary(upper: &[u32], lower: &[u32]) -> Vec<SparseColumn> {
    let index: HashMap<u32, usize> = lower.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    upper
        .iter()
        .map(|&s| {
            members(s)
                .enumerate()
                .map(|(pos, v)| {
                    let sign = if pos % 2 == 0 { 1 } else { -1 };
                    (index[&(s & !(1 << v))], sign)
                })
                .collect()
        })
        .collect()
}

fn field_rank(field: HomologyField, cols: &[SparseColumn]) -> Result<usize> {
    Ok(match field {
        HomologyField::Rationals => sparse_rank(&Rationals, cols),
        HomologyField::Prime(p) => sparse_rank(&PrimeField::new(p)?, cols),
    })
}

/// Rank of the reduced homology of K^H in degree `n-1`; zero when the
/// points do not span.
pub fn eta_star_homology(h: &PointConfig, field: HomologyField) -> Result<usize> {
    check_guard(h)?;
    if !h.spans() {
        return Ok(0);
    }
    let sk = build_skeleton(h)?;
    let [low, mid, top] = &sk.layers;
    let r_low = field_rank(field, &boundary(mid, low))?;
    let r_top = field_rank(field, &boundary(top, mid))?;
    Ok(mid.len() - r_low - r_top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_rank, Rationals};

    /// Dense oracle: full reduced chain complex and the Euler-style rank formula.
    fn dense_oracle(h: &PointConfig) -> usize {
        if !h.spans() {
            return 0;
        }
        let n = h.n();
        let t = h.len();
        let proper = |s: &Vec<usize>| {
            let rows: Vec<Vec<i64>> = s.iter().map(|&i| h.points()[i].clone()).collect();
            s.len() <= n || int_rank(&rows) < n + 1
        };
        let chains = |size: usize| -> Vec<Vec<usize>> {
            (0..t).combinations(size).filter(|s| proper(s)).collect()
        };
        let matrix = |upper: &[Vec<usize>], lower: &[Vec<usize>]| -> Vec<Vec<i64>> {
            lower
                .iter()
                .map(|l| {
                    upper
                        .iter()
                        .map(|u| {
                            match (0..u.len()).find(|&k| {
                                let mut f = u.clone();
                                f.remove(k);
                                &f == l
                            }) {
                                Some(k) if k % 2 == 0 => 1,
                                Some(_) => -1,
                                None => 0,
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let low = chains(n - 1);
        let mid = chains(n);
        let top = chains(n + 1);
        let r1 = dense_rank(&Rationals, &matrix(&mid, &low));
        let r2 = dense_rank(&Rationals, &matrix(&top, &mid));
        mid.len() - r1 - r2
    }

    #[test]
    fn triangle_boundary() {
        let h = PointConfig::basis(2).unwrap();
        let sk = build_skeleton(&h).unwrap();
        assert_eq!(sk.simplices(0).len(), 3);
        assert_eq!(sk.simplices(1).len(), 3);
        assert!(sk.simplices(2).is_empty());
        assert_eq!(eta_star_homology(&h, HomologyField::Rationals).unwrap(), 1);
    }

    #[test]
    fn closed_forms() {
        for n in 1..=4 {
            let basis = PointConfig::basis(n).unwrap();
            let generic = PointConfig::generic(n).unwrap();
            for f in [HomologyField::Rationals, HomologyField::Prime(2), HomologyField::Prime(3)] {
                assert_eq!(eta_star_homology(&basis, f).unwrap(), 1);
                assert_eq!(eta_star_homology(&generic, f).unwrap(), n + 1);
            }
        }
    }

    #[test]
    fn e2_is_three() {
        let h = PointConfig::e_n(2).unwrap();
        assert_eq!(eta_star_homology(&h, HomologyField::Rationals).unwrap(), 3);
        assert_eq!(dense_oracle(&h), 3);
    }

    #[test]
    fn matches_dense_oracle() {
        let configs = [
            PointConfig::e_n(3).unwrap(),
            PointConfig::new(3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1], vec![1, 2, 3]], None)
                .unwrap(),
            PointConfig::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]], None).unwrap(),
            PointConfig::new(3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]], None).unwrap(),
        ];
        for h in &configs {
            assert_eq!(eta_star_homology(h, HomologyField::Rationals).unwrap(), dense_oracle(h), "{h:?}");
        }
    }

    #[test]
    fn non_spanning_is_zero() {
        let h = PointConfig::new(3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]], None).unwrap();
        assert_eq!(eta_star_homology(&h, HomologyField::Rationals).unwrap(), 0);
    }

    #[test]
    fn guard_and_field_checks() {
        let h = PointConfig::basis(7).unwrap();
        assert!(matches!(eta_star_homology(&h, HomologyField::Rationals), Err(Error::GuardExceeded(_))));
        let b = PointConfig::basis(2).unwrap();
        assert!(matches!(eta_star_homology(&b, HomologyField::Prime(4)), Err(Error::NotPrime(4))));
    }
}
