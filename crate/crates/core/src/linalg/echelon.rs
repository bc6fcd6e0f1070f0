//! Fraction-free (integer-preserving) Gauss-Jordan elimination.
//!
//! Every intermediate entry is a minor of the input augmented with the
//! identity, so divisions by the previous pivot are exact. After the last
//! step the first `rank` rows hold `D * RREF` where `D` is the determinant
//! of the pivot minor, and the augmented block holds `D * transform`.

use std::fmt::Debug;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

/// Integer ring used by the elimination kernels. `i128` reports overflow
/// through `None`; `BigInt` never overflows.
pub(crate) trait Ring:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Signed
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    fn negated(&self) -> Self;
    fn checked_add(&self, other: &Self) -> Option<Self>;
    /// `(a*b - c*d) / e`, where the division is known to be exact.
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn from_bigint(v: &BigInt) -> Option<Self>;
}

impl Ring for i128 {
    fn negated(&self) -> Self {
        -*self
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        i128::checked_add(*self, *other)
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        let ab = i128::checked_mul(*a, *b)?;
        if *c == 0 || *d == 0 {
            return Some(if *e == 1 { ab } else { ab / e });
        }
        let cd = i128::checked_mul(*c, *d)?;
        let num = i128::checked_sub(ab, cd)?;
        Some(if *e == 1 { num } else { num / e })
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
}

impl Ring for BigInt {
    fn negated(&self) -> Self {
        -self
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        let num = a * b - c * d;
        Some(if e.is_one() { num } else { num / e })
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
}

/// Result of a fraction-free Gauss-Jordan pass.
#[derive(Clone, Debug)]
pub(crate) struct Echelon<T> {
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// Common pivot value, always positive (1 when rank is 0).
    pub det: T,
    /// All rows after elimination; rows `rank..` are zero.
    pub rows: Vec<Vec<T>>,
    /// `aug[i] * input = rows[i]`. Empty unless a transform was requested.
    /// Rows `rank..` span the left kernel of the input.
    pub aug: Vec<Vec<T>>,
}

impl<T: Ring> Echelon<T> {
    /// Runs elimination on `input` (`cols` wide). Returns `None` on overflow.
    pub fn compute(input: &[Vec<T>], cols: usize, with_transform: bool) -> Option<Self> {
        let r = input.len();
        let width = if with_transform { cols + r } else { cols };
        let mut a: Vec<Vec<T>> = input
            .iter()
            .enumerate()
            .map(|(i, row)| {
                debug_assert_eq!(row.len(), cols);
                let mut v = Vec::with_capacity(width);
                v.extend(row.iter().cloned());
                if with_transform {
                    v.extend((0..r).map(|j| if i == j { T::one() } else { T::zero() }));
                }
                v
            })
            .collect();

        let mut prev = T::one();
        let mut pivots = Vec::new();
        let mut k = 0;
        for col in 0..cols {
            if k == r {
                break;
            }
            let Some(found) = (k..r).find(|&i| !num_traits::Zero::is_zero(&a[i][col])) else {
                continue;
            };
            a.swap(found, k);
            let pivot = a[k][col].clone();
            let (before, rest) = a.split_at_mut(k);
            let (pivot_row, after) = rest.split_first_mut().expect("pivot row");
            for row in before.iter_mut().chain(after.iter_mut()) {
                let factor = row[col].clone();
                for j in 0..width {
                    row[j] = T::cross_div(&pivot, &row[j], &factor, &pivot_row[j], &prev)?;
                }
            }
            prev = pivot;
            pivots.push(col);
            k += 1;
        }

        if Signed::is_negative(&prev) {
            for row in a.iter_mut() {
                for x in row.iter_mut() {
                    *x = x.negated();
                }
            }
            prev = prev.negated();
        }

        let (rows, aug) = if with_transform {
            a.into_iter()
                .map(|mut row| {
                    let tail = row.split_off(cols);
                    (row, tail)
                })
                .unzip()
        } else {
            (a, Vec::new())
        };
        Some(Echelon {
            rank: k,
            pivots,
            det: prev,
            rows,
            aug,
        })
    }

    pub fn map_to_bigint(&self) -> Echelon<BigInt> {
        let conv = |m: &Vec<Vec<T>>| -> Vec<Vec<BigInt>> {
            m.iter()
                .map(|r| r.iter().map(Ring::to_bigint).collect())
                .collect()
        };
        Echelon {
            rank: self.rank,
            pivots: self.pivots.clone(),
            det: self.det.to_bigint(),
            rows: conv(&self.rows),
            aug: conv(&self.aug),
        }
    }
}

/// Either a machine-word or a big-integer elimination result.
#[derive(Clone, Debug)]
pub(crate) enum IntEchelon {
    Small(Echelon<i128>),
    Big(Echelon<BigInt>),
}

impl IntEchelon {
    /// Eliminates small-integer rows, retrying with big integers on overflow.
    pub fn from_i64_rows(rows: &[Vec<i64>], cols: usize, with_transform: bool) -> Self {
        let small: Vec<Vec<i128>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        match Echelon::compute(&small, cols, with_transform) {
            Some(e) => IntEchelon::Small(e),
            None => {
                let big: Vec<Vec<BigInt>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                IntEchelon::Big(
                    Echelon::compute(&big, cols, with_transform).expect("bigint never overflows"),
                )
            }
        }
    }

    /// Same as [`Self::from_i64_rows`] for big-integer input.
    pub fn from_bigint_rows(rows: &[Vec<BigInt>], cols: usize, with_transform: bool) -> Self {
        let small: Option<Vec<Vec<i128>>> = rows
            .iter()
            .map(|r| r.iter().map(i128::from_bigint).collect())
            .collect();
        if let Some(small) = small {
            if let Some(e) = Echelon::compute(&small, cols, with_transform) {
                return IntEchelon::Small(e);
            }
        }
        IntEchelon::Big(Echelon::compute(rows, cols, with_transform).expect("bigint never overflows"))
    }

    pub fn rank(&self) -> usize {
        match self {
            IntEchelon::Small(e) => e.rank,
            IntEchelon::Big(e) => e.rank,
        }
    }

    pub fn into_big(self) -> Echelon<BigInt> {
        match self {
            IntEchelon::Small(e) => e.map_to_bigint(),
            IntEchelon::Big(e) => e,
        }
    }
}
