//! Bit-packed {±1}^n vectors and matrices.
//!
//! Bit `j` of a [`SignVector`] encodes coordinate `j` as `(-1)^bit`, so the
//! all-ones vector is the zero word and a vector is projectively canonical
//! exactly when bit 0 is clear.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{int, ExactMatrix};

/// Largest supported vector length (one machine word).
pub const MAX_LEN: usize = 64;

/// Largest length accepted by [`enumerate_sign_vectors`].
pub const MAX_ENUM_LEN: usize = 30;

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    n: u8,
    bits: u64,
}

impl SignVector {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_LEN {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                allowed: "1..=64",
            });
        }
        if bits & !mask(n) != 0 {
            return Err(Error::InvalidArgument(format!(
                "bits {bits:#x} exceed length {n}"
            )));
        }
        Ok(SignVector { n: n as u8, bits })
    }

    /// All-ones vector of length `n`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// From a slice of `+1`/`-1` values.
    pub fn from_signs(signs: &[i64]) -> Result<Self> {
        let mut bits = 0u64;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << j,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "entry {s} at position {j} is not ±1"
                    )))
                }
            }
        }
        Self::new(signs.len(), bits)
    }

    pub(crate) fn from_raw(n: usize, bits: u64) -> Self {
        debug_assert!(n >= 1 && n <= MAX_LEN && bits & !mask(n) == 0);
        SignVector { n: n as u8, bits }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Coordinate `j` as `+1` or `-1`.
    pub fn get(&self, j: usize) -> i64 {
        if self.bits >> j & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn to_signs(&self) -> Vec<i64> {
        (0..self.len()).map(|j| self.get(j)).collect()
    }

    pub fn neg(&self) -> Self {
        SignVector {
            n: self.n,
            bits: !self.bits & mask(self.len()),
        }
    }

    /// `n - 2 * popcount(u xor v)`.
    pub fn dot(&self, other: &SignVector) -> Result<i64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self.len() as i64 - 2 * (self.bits ^ other.bits).count_ones() as i64)
    }

    pub fn is_canonical(&self) -> bool {
        self.bits & 1 == 0
    }

    pub fn to_exact(&self) -> Vec<crate::linalg::ExactScalar> {
        (0..self.len()).map(|j| int(self.get(j))).collect()
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            f.write_str(if self.get(j) == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Representative of `±v` whose first coordinate is `+1`.
pub fn canonical_projective(v: SignVector) -> SignVector {
    if v.is_canonical() {
        v
    } else {
        v.neg()
    }
}

/// All of {±1}^n in increasing bit-pattern order.
pub fn enumerate_sign_vectors(n: usize) -> Result<impl Iterator<Item = SignVector>> {
    if n == 0 || n > MAX_ENUM_LEN {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            allowed: "1..=30",
        });
    }
    Ok((0..1u64 << n).map(move |bits| SignVector::from_raw(n, bits)))
}

/// A point `(1, b_1, ..., b_n)` of E_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENPoint(SignVector);

impl ENPoint {
    pub fn vector(&self) -> SignVector {
        self.0
    }

    /// The trailing `n` coordinates.
    pub fn tail(&self) -> SignVector {
        SignVector::from_raw(self.0.len() - 1, self.0.bits >> 1)
    }
}

/// `b ↦ (1, b)`.
pub fn embed_en(b: SignVector) -> Result<ENPoint> {
    if b.len() + 1 > MAX_LEN {
        return Err(Error::OutOfRange {
            what: "n",
            value: b.len(),
            allowed: "1..=63",
        });
    }
    Ok(ENPoint(SignVector::from_raw(b.len() + 1, b.bits << 1)))
}

/// All 2^n points of E_n, in the order of their tails.
pub fn en_points(n: usize) -> Result<Vec<ENPoint>> {
    enumerate_sign_vectors(n)?.map(embed_en).collect()
}

/// A `p x n` matrix with ±1 entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    rows: Vec<SignVector>,
}

impl SignMatrix {
    pub fn new(rows: Vec<SignVector>) -> Result<Self> {
        let first = rows.first().ok_or(Error::OutOfRange {
            what: "p",
            value: 0,
            allowed: ">= 1",
        })?;
        let n = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(SignMatrix { n, rows })
    }

    /// Unpacks `p*n` bits of `index` row by row (row `i` takes bits `i*n..(i+1)*n`).
    pub fn from_index(p: usize, n: usize, index: u64) -> Self {
        debug_assert!(p * n <= 64);
        let m = mask(n);
        let rows = (0..p)
            .map(|i| SignVector::from_raw(n, if i * n >= 64 { 0 } else { index >> (i * n) & m }))
            .collect();
        SignMatrix { n, rows }
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> SignVector {
        self.rows[i]
    }

    pub fn rows(&self) -> &[SignVector] {
        &self.rows
    }

    pub fn to_int_rows(&self) -> Vec<Vec<i64>> {
        self.rows.iter().map(SignVector::to_signs).collect()
    }

    /// Rows read as 0/1 matrices: a set bit is entry 1.
    pub fn to_zero_one_rows(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| (0..self.n).map(|j| (r.bits >> j & 1) as i64).collect())
            .collect()
    }

    pub fn to_exact(&self) -> ExactMatrix {
        ExactMatrix::from_int_rows(&self.to_int_rows()).expect("rectangular")
    }

    /// Sub-matrix of the given rows.
    pub fn select(&self, indices: &[usize]) -> SignMatrix {
        SignMatrix {
            n: self.n,
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    /// Parses the `+`/`-` text format: one row per line, `#` comments and
    /// blank lines ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let signs = line
                .chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("unexpected character {other:?}"),
                    }),
                })
                .collect::<Result<Vec<i64>>>()?;
            let v = SignVector::from_signs(&signs).map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            if let Some(first) = rows.first().map(SignVector::len) {
                if first != v.len() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("row length {} differs from {first}", v.len()),
                    });
                }
            }
            rows.push(v);
        }
        Self::new(rows).map_err(|_| Error::Parse {
            line: 0,
            msg: "no rows".into(),
        })
    }

    pub fn to_text(&self) -> String {
        self.rows.iter().map(|r| format!("{r}\n")).collect()
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(ToString::to_string).collect();
        write!(f, "SignMatrix[{}]", rows.join(" "))
    }
}

/// A `p x n` matrix of independent fair signs drawn from `rng`.
pub fn random_sign_matrix<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<SignMatrix> {
    if p == 0 {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            allowed: ">= 1",
        });
    }
    if n == 0 || n > MAX_LEN {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            allowed: "1..=64",
        });
    }
    let m = mask(n);
    let rows = (0..p)
        .map(|_| SignVector::from_raw(n, rng.random::<u64>() & m))
        .collect();
    Ok(SignMatrix { n, rows })
}
