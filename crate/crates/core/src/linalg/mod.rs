//! Exact rational linear algebra: ranks, row-space bases with a transform back
//! to the generators, span membership, and ranks over prime fields.

mod echelon;
mod field;

pub(crate) use echelon::{Echelon, IntEchelon, Ring};
pub use field::{dense_rank, is_prime, sparse_rank, FieldOps, PrimeField, Rationals, SparseColumn, MERSENNE_61};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; always kept in lowest terms with a positive denominator.
pub type ExactScalar = BigRational;

/// Shorthand for an integer-valued [`ExactScalar`].
pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_scalar(s: &str) -> Result<ExactScalar> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Formats as `"num/den"` (also for integers, so the form is uniform).
pub fn format_scalar(x: &ExactScalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ExactScalar>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<ExactScalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(ExactMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            entries: vec![ExactScalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = ExactScalar::one();
        }
        m
    }

    /// Builds from rows of equal length. An empty list gives a 0x0 matrix.
    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().cloned());
        }
        Ok(ExactMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactScalar {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[ExactScalar]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = ExactMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[ExactScalar]) -> Result<Vec<ExactScalar>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![ExactScalar::zero(); self.cols];
        for (coef, row) in v.iter().zip(self.row_iter()) {
            if coef.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(row) {
                *o += coef * x;
            }
        }
        Ok(out)
    }

    /// Rows scaled to integers, and the per-row scale factors used.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        self.row_iter()
            .map(|row| {
                let scale = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                let ints = row
                    .iter()
                    .map(|x| x.numer() * (&scale / x.denom()))
                    .collect();
                (ints, scale)
            })
            .unzip()
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.row_iter() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Reduced row-echelon basis of a row space, with the transform expressing
/// each basis row in terms of the original generator rows.
#[derive(Clone, Debug)]
pub struct RowBasis {
    ambient: usize,
    basis: ExactMatrix,
    pivots: Vec<usize>,
    transform: ExactMatrix,
    relations: ExactMatrix,
}

impl RowBasis {
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `transform * generators = basis`.
    pub fn transform(&self) -> &ExactMatrix {
        &self.transform
    }

    /// Basis of the left kernel of the generators (linear relations among them).
    pub fn relations(&self) -> &ExactMatrix {
        &self.relations
    }

    pub fn generator_count(&self) -> usize {
        self.transform.cols
    }
}

/// Dimension of the row space of `m`.
pub fn rank(m: &ExactMatrix) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    let (ints, _) = m.integer_rows();
    IntEchelon::from_bigint_rows(&ints, m.cols, false).rank()
}

/// Exact rank of an integer matrix; certifies full rank modulo a large prime
/// first and only falls back to exact elimination when that fails.
pub fn int_rank(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    let full = rows.len().min(cols);
    if dense_rank(&PrimeField::new_unchecked(MERSENNE_61), rows) == full {
        return full;
    }
    IntEchelon::from_i64_rows(rows, cols, false).rank()
}

/// Reduced row-echelon basis of the rows of `generators`.
pub fn build_row_basis(generators: &ExactMatrix) -> RowBasis {
    let r = generators.rows;
    let cols = generators.cols;
    let (ints, scales) = generators.integer_rows();
    let e = if r == 0 || cols == 0 {
        Echelon {
            rank: 0,
            pivots: Vec::new(),
            det: BigInt::one(),
            rows: vec![vec![BigInt::zero(); cols]; r],
            aug: (0..r)
                .map(|i| (0..r).map(|j| BigInt::from((i == j) as i64)).collect())
                .collect(),
        }
    } else {
        IntEchelon::from_bigint_rows(&ints, cols, true).into_big()
    };
    let det = BigRational::from_integer(e.det.clone());
    let to_exact = |x: &BigInt| BigRational::from_integer(x.clone()) / &det;

    let mut basis = Vec::with_capacity(e.rank * cols);
    let mut transform = Vec::with_capacity(e.rank * r);
    for i in 0..e.rank {
        basis.extend(e.rows[i].iter().map(to_exact));
        transform.extend(
            e.aug[i]
                .iter()
                .zip(&scales)
                .map(|(a, s)| to_exact(&(a * s))),
        );
    }
    let mut relations = Vec::with_capacity((r - e.rank) * r);
    for i in e.rank..r {
        let row: Vec<BigInt> = e.aug[i].iter().zip(&scales).map(|(a, s)| a * s).collect();
        let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        relations.extend(row.iter().map(|x| {
            BigRational::from_integer(if g.is_zero() { x.clone() } else { x / &g })
        }));
    }
    RowBasis {
        ambient: cols,
        basis: ExactMatrix {
            rows: e.rank,
            cols,
            entries: basis,
        },
        pivots: e.pivots,
        transform: ExactMatrix {
            rows: e.rank,
            cols: r,
            entries: transform,
        },
        relations: ExactMatrix {
            rows: r - e.rank,
            cols: r,
            entries: relations,
        },
    }
}

/// Coefficients over the original generators expressing `w`, if `w` lies in
/// the row space. Unique when the generators are independent.
pub fn express_in_span(b: &RowBasis, w: &[ExactScalar]) -> Result<Option<Vec<ExactScalar>>> {
    if w.len() != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: b.ambient,
            found: w.len(),
        });
    }
    let coords: Vec<ExactScalar> = b.pivots.iter().map(|&c| w[c].clone()).collect();
    let recon = b.basis.left_mul_vec(&coords)?;
    if recon.as_slice() != w {
        return Ok(None);
    }
    Ok(Some(b.transform.left_mul_vec(&coords)?))
}

/// Integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: Vec<Vec<i64>>,
    cols: usize,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(IntMatrix { rows, cols })
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn to_exact(&self) -> ExactMatrix {
        ExactMatrix::from_int_rows(&self.rows).expect("rectangular by construction")
    }
}

/// Rank over GF(`prime`).
pub fn rank_mod_p(m: &IntMatrix, prime: u64) -> Result<usize> {
    Ok(dense_rank(&PrimeField::new(prime)?, &m.rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_int_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Independent oracle: plain rational Gaussian elimination.
    fn oracle_rank(a: &ExactMatrix) -> usize {
        let mut rows: Vec<Vec<ExactScalar>> = a.row_iter().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for col in 0..a.cols() {
            if let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) {
                rows.swap(p, rank);
                for i in 0..rows.len() {
                    if i != rank && !rows[i][col].is_zero() {
                        let f = &rows[i][col] / &rows[rank][col];
                        let pivot = rows[rank].clone();
                        for (x, y) in rows[i].iter_mut().zip(&pivot) {
                            *x -= &f * y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&ExactMatrix::identity(4)), 4);
        assert_eq!(rank(&ExactMatrix::zeros(3, 5)), 0);
        let hadamard = m(&[&[1, 1, 1, 1], &[1, 1, -1, -1], &[1, -1, 1, -1], &[1, -1, -1, 1]]);
        assert_eq!(rank(&hadamard), 4);
        assert_eq!(rank(&ExactMatrix::zeros(0, 0)), 0);
    }

    #[test]
    fn basis_examples() {
        let b = build_row_basis(&m(&[&[2, 4]]));
        assert_eq!(b.basis().row(0), &[int(1), int(2)]);
        assert_eq!(b.transform().row(0), &[ratio(1, 2)]);

        let b = build_row_basis(&m(&[&[1, 1], &[1, -1]]));
        assert_eq!(b.basis(), &ExactMatrix::identity(2));

        let b = build_row_basis(&m(&[&[1, 1], &[2, 2]]));
        assert_eq!(b.rank(), 1);
        assert_eq!(b.relations().rows(), 1);
    }

    #[test]
    fn express_examples() {
        let g = m(&[&[1, 1, 1], &[1, -1, 1]]);
        let b = build_row_basis(&g);
        assert_eq!(b.rank(), 2);
        let c = express_in_span(&b, &[int(1), int(0), int(1)]).unwrap();
        assert_eq!(c, Some(vec![ratio(1, 2), ratio(1, 2)]));

        let w = vec![int(0), int(0), int(1)];
        let mut stacked: Vec<Vec<ExactScalar>> = g.row_iter().map(|r| r.to_vec()).collect();
        stacked.push(w.clone());
        assert_eq!(oracle_rank(&ExactMatrix::from_rows(stacked).unwrap()), 3);
        assert_eq!(express_in_span(&b, &w).unwrap(), None);

        let v = m(&[&[1, -1, 1, 1]]);
        let b = build_row_basis(&v);
        let neg: Vec<ExactScalar> = v.row(0).iter().map(|x| -x).collect();
        assert_eq!(express_in_span(&b, &neg).unwrap(), Some(vec![int(-1)]));

        assert!(express_in_span(&b, &[int(1)]).is_err());
    }

    #[test]
    fn empty_basis_spans_zero_only() {
        let b = build_row_basis(&ExactMatrix::zeros(0, 3));
        assert_eq!(b.rank(), 0);
        assert_eq!(express_in_span(&b, &[int(0), int(0), int(0)]).unwrap(), Some(vec![]));
        assert_eq!(express_in_span(&b, &[int(0), int(1), int(0)]).unwrap(), None);
    }

    #[test]
    fn rank_mod_p_examples() {
        let id = IntMatrix::from_rows(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(rank_mod_p(&id, 2).unwrap(), 3);
        let even = IntMatrix::from_rows(vec![vec![2, 4]]).unwrap();
        assert_eq!(rank_mod_p(&even, 2).unwrap(), 0);
        let pm = IntMatrix::from_rows(vec![vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(rank_mod_p(&pm, 2).unwrap(), 1);
        assert_eq!(rank(&pm.to_exact()), 2);
        assert!(matches!(rank_mod_p(&pm, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn scalar_text_round_trip() {
        let x = ratio(-6, 4);
        assert_eq!(format_scalar(&x), "-3/2");
        assert_eq!(parse_scalar("-3/2").unwrap(), x);
        assert_eq!(parse_scalar("5").unwrap(), int(5));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
    }

    fn small_int_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..=3, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(rows in small_int_matrix()) {
            let a = ExactMatrix::from_int_rows(&rows).unwrap();
            prop_assert_eq!(rank(&a), rank(&a.transpose()));
            prop_assert_eq!(rank(&a), oracle_rank(&a));
            prop_assert_eq!(int_rank(&rows), rank(&a));
        }

        #[test]
        fn transform_reproduces_basis(rows in small_int_matrix(), den in 1i64..5) {
            let a = ExactMatrix::from_rows(
                rows.iter().map(|r| r.iter().map(|&x| ratio(x, den)).collect()).collect()
            ).unwrap();
            let b = build_row_basis(&a);
            prop_assert_eq!(&b.transform().mul(&a).unwrap(), b.basis());
            for (i, &p) in b.pivots().iter().enumerate() {
                prop_assert!(b.basis().get(i, p).is_one());
                if i > 0 { prop_assert!(b.pivots()[i - 1] < p); }
            }
            let rel = b.relations().mul(&a).unwrap();
            prop_assert!(rel.row_iter().all(|r| r.iter().all(Zero::is_zero)));
            prop_assert_eq!(b.rank() + b.relations().rows(), a.rows());
        }

        #[test]
        fn expressed_coefficients_reconstruct(rows in small_int_matrix(), mix in proptest::collection::vec(-2i64..=2, 6)) {
            let a = ExactMatrix::from_int_rows(&rows).unwrap();
            let b = build_row_basis(&a);
            let coeffs: Vec<ExactScalar> = mix.iter().take(a.rows()).map(|&x| int(x)).collect();
            let w = a.left_mul_vec(&coeffs).unwrap();
            let c = express_in_span(&b, &w).unwrap().expect("w is in the span by construction");
            prop_assert_eq!(a.left_mul_vec(&c).unwrap(), w);
        }

        #[test]
        fn rational_rank_dominates_modular(rows in small_int_matrix()) {
            let im = IntMatrix::from_rows(rows).unwrap();
            let q = rank(&im.to_exact());
            for p in [2u64, 3, 5, 7] {
                prop_assert!(q >= rank_mod_p(&im, p).unwrap());
            }
        }
    }
}
