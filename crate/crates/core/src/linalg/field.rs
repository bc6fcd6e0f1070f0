//! Prime fields, primality, and rank over a field for dense and sparse input.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use std::collections::HashMap;

/// A large prime used for fast full-rank certificates (2^61 - 1).
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Arithmetic context for a coefficient field.
pub trait FieldOps {
    type Elem: Clone;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// `a - f * b`
    fn sub_mul(&self, a: &Self::Elem, f: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// The rationals.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl FieldOps for Rationals {
    type Elem = BigRational;
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn sub_mul(&self, a: &BigRational, f: &BigRational, b: &BigRational) -> BigRational {
        a - f * b
    }
    fn div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
}

/// GF(p) for a prime `p < 2^63`.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> crate::error::Result<Self> {
        if !is_prime(p) || p >= 1 << 63 {
            return Err(crate::error::Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    /// Caller guarantees primality; see [`crate::linalg::rank_mod_p`] for the checked entry.
    pub(crate) fn new_unchecked(p: u64) -> Self {
        PrimeField { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }
}

impl FieldOps for PrimeField {
    type Elem = u64;
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn sub_mul(&self, a: &u64, f: &u64, b: &u64) -> u64 {
        let fb = mul_mod(*f, *b, self.p);
        if *a >= fb {
            a - fb
        } else {
            self.p - (fb - a)
        }
    }
    fn div(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, self.inv(*b), self.p)
    }
}

/// Rank of a dense integer matrix over the field `f` (plain Gaussian elimination).
pub fn dense_rank<F: FieldOps>(f: &F, rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<F::Elem>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        if rank == a.len() {
            break;
        }
        let Some(found) = (rank..a.len()).find(|&i| !f.is_zero(&a[i][col])) else {
            continue;
        };
        a.swap(found, rank);
        let (top, bottom) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom.iter_mut() {
            if f.is_zero(&row[col]) {
                continue;
            }
            let factor = f.div(&row[col], &pivot_row[col]);
            for j in col..cols {
                row[j] = f.sub_mul(&row[j], &factor, &pivot_row[j]);
            }
        }
        rank += 1;
    }
    rank
}

/// Sparse column, sorted by row index.
pub type SparseColumn = Vec<(usize, i64)>;

/// Rank of a sparse matrix given by columns, via column reduction on the
/// largest row index (the standard persistence reduction).
pub fn sparse_rank<F: FieldOps>(f: &F, columns: &[SparseColumn]) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, F::Elem)>> = HashMap::new();
    for column in columns {
        let mut col: Vec<(usize, F::Elem)> = column
            .iter()
            .filter_map(|&(i, v)| {
                let e = f.from_i64(v);
                (!f.is_zero(&e)).then_some((i, e))
            })
            .collect();
        col.sort_by_key(|e| e.0);
        while let Some((low, low_val)) = col.last().cloned() {
            match pivots.get(&low) {
                Some(p) => {
                    let factor = f.div(&low_val, &p.last().expect("nonempty pivot").1);
                    col = axpy(f, &col, &factor, p);
                }
                None => {
                    pivots.insert(low, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// `a - factor * b` on sorted sparse vectors.
fn axpy<F: FieldOps>(
    f: &F,
    a: &[(usize, F::Elem)],
    factor: &F::Elem,
    b: &[(usize, F::Elem)],
) -> Vec<(usize, F::Elem)> {
    let zero = f.from_i64(0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (idx, val) = if take_a {
            i += 1;
            (a[i - 1].0, a[i - 1].1.clone())
        } else if take_b {
            j += 1;
            (b[j - 1].0, f.sub_mul(&zero, factor, &b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, f.sub_mul(&a[i - 1].1, factor, &b[j - 1].1))
        };
        if !f.is_zero(&val) {
            out.push((idx, val));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 7, 97, 7919, MERSENNE_61, 1_000_000_007];
        let composites = [0u64, 1, 4, 9, 91, 561, 1_000_000_008, 3_215_031_751];
        assert!(primes.iter().all(|&p| is_prime(p)));
        assert!(composites.iter().all(|&c| !is_prime(c)));
    }

    #[test]
    fn sparse_matches_dense() {
        // boundary of a triangle: 3 edges -> 3 vertices
        let cols: Vec<SparseColumn> = vec![
            vec![(0, -1), (1, 1)],
            vec![(0, -1), (2, 1)],
            vec![(1, -1), (2, 1)],
        ];
        let dense = vec![vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]];
        assert_eq!(sparse_rank(&Rationals, &cols), 2);
        assert_eq!(dense_rank(&Rationals, &dense), 2);
        assert_eq!(sparse_rank(&PrimeField::new_unchecked(2), &cols), 2);
    }
}
