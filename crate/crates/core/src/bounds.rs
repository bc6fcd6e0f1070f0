//! Closed-form evaluators for the bounds and leading terms around the KSO
//! probability: exact rationals where possible, 192-bit floats otherwise.

use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{format_scalar, int, ratio, ExactScalar};

/// Mantissa bits for the real-valued evaluators.
pub const PRECISION: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;

/// Default `c` of the case split, 7.36.
pub fn default_c() -> ExactScalar {
    ratio(736, 100)
}

/// Default `ε`, 1/128.
pub fn default_epsilon() -> ExactScalar {
    ratio(1, 128)
}

fn binom(n: u64, k: u64) -> BigInt {
    binomial(BigInt::from(n), BigInt::from(k))
}

fn pow_ratio(base: &ExactScalar, e: usize) -> ExactScalar {
    Pow::pow(base, e)
}

/// `4 C(p,3) (3/4)^n`. A main term, not a probability: it exceeds 1 at small `n`.
pub fn p3_main_term(p: usize, n: usize) -> Result<ExactScalar> {
    if p < 3 {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            allowed: ">= 3",
        });
    }
    Ok(BigRational::from_integer(binom(p as u64, 3) * 4) * pow_ratio(&ratio(3, 4), n))
}

/// `2^{-m} C(m, floor(m/2))`, the largest atom of a ±1 sum of `m` terms.
fn central_atom(m: usize) -> ExactScalar {
    BigRational::new(binom(m as u64, m as u64 / 2), BigInt::one() << m)
}

/// `2 * 2^{-m} C(m, floor(m/2))`.
pub fn elo_column_bound(m: usize) -> Result<ExactScalar> {
    if m == 0 {
        return Err(Error::OutOfRange {
            what: "m",
            value: m,
            allowed: ">= 1",
        });
    }
    Ok(central_atom(m) * int(2))
}

/// Largest length for [`elo_hits`].
pub const MAX_ELO_M: usize = 24;

/// Number of `x` in {±1}^m with `alpha . x` in {-1, +1}.
pub fn elo_hits(alpha: &[ExactScalar]) -> Result<u64> {
    let m = alpha.len();
    if m == 0 || m > MAX_ELO_M {
        return Err(Error::OutOfRange {
            what: "m",
            value: m,
            allowed: "1..=24",
        });
    }
    // clear denominators: alpha = a / l with integer a
    let l = alpha.iter().fold(BigInt::one(), |l, x| num_integer::Integer::lcm(&l, x.denom()));
    let a: Vec<BigInt> = alpha.iter().map(|x| (x * &l).to_integer()).collect();
    let mut hits = 0;
    for bits in 0u64..1 << m {
        let s: BigInt = a
            .iter()
            .enumerate()
            .map(|(j, v)| if bits >> j & 1 == 1 { -v } else { v.clone() })
            .sum();
        hits += (s.abs() == l) as u64;
    }
    Ok(hits)
}

/// `2^n C(p,m) C(n,m) [2^{-m} C(m, floor(m/2))]^{n-m}`.
pub fn rm_case1_bound(m: usize, p: usize, n: usize) -> Result<ExactScalar> {
    if m == 0 || m > p || p > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= m <= p <= n, got m = {m}, p = {p}, n = {n}"
        )));
    }
    let lead = (BigInt::one() << n) * binom(p as u64, m as u64) * binom(n as u64, m as u64);
    Ok(BigRational::from_integer(lead) * pow_ratio(&central_atom(m), n - m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// `m` in {3, 4}, bounded directly.
    Direct,
    Case1,
    Case2,
    Case3,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::Direct => "direct",
            CaseLabel::Case1 => "case 1",
            CaseLabel::Case2 => "case 2",
            CaseLabel::Case3 => "case 3",
        })
    }
}

fn check_eps_c(epsilon: &ExactScalar, c: &ExactScalar) -> Result<()> {
    if !epsilon.is_positive() || *epsilon >= ratio(1, 100) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {} outside (0, 1/100)",
            format_scalar(epsilon)
        )));
    }
    if *c < default_c() {
        return Err(Error::InvalidArgument(format!("c = {} below 7.36", format_scalar(c))));
    }
    Ok(())
}

/// Real arithmetic context.
pub struct Real {
    cc: Consts,
    p: usize,
}

impl Real {
    pub fn new(precision: usize) -> Self {
        Real {
            cc: Consts::new().expect("constant cache"),
            p: precision,
        }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn int(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.p)
    }

    pub fn big(&mut self, v: &BigInt) -> BigFloat {
        BigFloat::parse(&v.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    pub fn rational(&mut self, v: &ExactScalar) -> BigFloat {
        let num = self.big(v.numer());
        let den = self.big(v.denom());
        num.div(&den, self.p, RM)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }

    pub fn log2(&mut self, x: &BigFloat) -> BigFloat {
        x.log2(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.p, RM, &mut self.cc)
    }

    pub fn pow(&mut self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.pow(y, self.p, RM, &mut self.cc)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn e(&mut self) -> BigFloat {
        self.cc.e(self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }
}

/// Nearest `f64` (through the decimal rendering).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse().expect("decimal rendering parses")
}

/// Decimal rendering truncated to `digits` significant digits.
pub fn to_decimal(x: &BigFloat, digits: usize) -> String {
    let s = x.to_string();
    let Some((mantissa, exp)) = s.split_once('e') else {
        return s;
    };
    let sign = usize::from(mantissa.starts_with('-'));
    let keep = (sign + digits + 1).min(mantissa.len());
    format!("{}e{exp}", mantissa[..keep].trim_end_matches('.'))
}

/// `|a - b| / |b|` as an `f64` (0 when both vanish).
pub fn relative_difference(a: &BigFloat, b: &BigFloat) -> f64 {
    if b.is_zero() {
        return if a.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let p = a.precision().unwrap_or(PRECISION).max(b.precision().unwrap_or(PRECISION));
    to_f64(&a.sub(b, p, RM).div(b, p, RM).abs())
}

fn log2_n(r: &mut Real, n: usize) -> BigFloat {
    let n = r.int(n as i64);
    r.log2(&n)
}

/// Case of the proof split for `m`, with `a(ε) = 1/ε²`.
pub fn case_partition(m: usize, n: usize, epsilon: &ExactScalar, c: &ExactScalar) -> Result<CaseLabel> {
    check_eps_c(epsilon, c)?;
    if m < 3 || m + 1 > n {
        return Err(Error::InvalidArgument(format!("need 3 <= m <= n - 1, got m = {m}, n = {n}")));
    }
    if m <= 4 {
        return Ok(CaseLabel::Direct);
    }
    if int(m as i64) <= epsilon * epsilon * int(n as i64) {
        return Ok(CaseLabel::Case1);
    }
    // m <= n - cn/log2 n  <=>  (n - m) log2 n >= c n
    let mut r = Real::new(PRECISION);
    let lhs = {
        let l = log2_n(&mut r, n);
        r.mul(&r.int((n - m) as i64), &l)
    };
    let rhs = {
        let c = r.rational(c);
        r.mul(&c, &r.int(n as i64))
    };
    Ok(if lhs >= rhs { CaseLabel::Case2 } else { CaseLabel::Case3 })
}

/// The three lemma bounds at one `n`.
#[derive(Clone, Debug)]
pub struct LemmaBounds {
    /// `(5/8)^n (1+ε)^n`, exact.
    pub b1: ExactScalar,
    /// `2^{3n - cn/2} (2/(π ε²))^{cn/(2 log2 n)}`.
    pub b2: BigFloat,
    /// `(e log2 n / c)^{2cn/log2 n} n² / 2^{n - cn/log2 n}`.
    pub b3: BigFloat,
}

pub fn lemma_b1(n: usize, epsilon: &ExactScalar) -> ExactScalar {
    pow_ratio(&(ratio(5, 8) * (int(1) + epsilon)), n)
}

fn check_lemma_args(n: usize, epsilon: &ExactScalar, c: &ExactScalar) -> Result<()> {
    check_eps_c(epsilon, c)?;
    if n < 4 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            allowed: ">= 4",
        });
    }
    Ok(())
}

pub fn lemma_bounds(n: usize, epsilon: &ExactScalar, c: &ExactScalar) -> Result<LemmaBounds> {
    check_lemma_args(n, epsilon, c)?;
    let mut r = Real::new(PRECISION);
    let nf = r.int(n as i64);
    let cf = r.rational(c);
    let ef = r.rational(epsilon);
    let two = r.int(2);
    let l = log2_n(&mut r, n);
    let cn = r.mul(&cf, &nf);

    let b2 = {
        let exp1 = r.sub(&r.mul(&r.int(3), &nf), &r.div(&cn, &two));
        let pi = r.pi();
        let base2 = r.div(&two, &r.mul(&pi, &r.mul(&ef, &ef)));
        let exp2 = r.div(&cn, &r.mul(&two, &l));
        let a = r.pow(&two, &exp1);
        let b = r.pow(&base2, &exp2);
        r.mul(&a, &b)
    };
    let b3 = {
        let e = r.e();
        let base = r.div(&r.mul(&e, &l), &cf);
        let exp = r.div(&r.mul(&two, &cn), &l);
        let a = r.pow(&base, &exp);
        let n2 = r.mul(&nf, &nf);
        let tail = r.sub(&nf, &r.div(&cn, &l));
        let d = r.pow(&two, &tail);
        r.div(&r.mul(&a, &n2), &d)
    };
    Ok(LemmaBounds {
        b1: lemma_b1(n, epsilon),
        b2,
        b3,
    })
}

/// Exact leading terms at one `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Asymptotes {
    /// `2 C(2^n - 1, n)`.
    pub threshold_leading: BigInt,
    /// `(n-1)² 2^{1-n}`.
    pub singular_leading: ExactScalar,
    /// `2 Σ_{i<=n} C(2^n - 1, i)`.
    pub schlafli: BigInt,
    /// `n² / 2^{n-1}`.
    pub tuple_ratio: ExactScalar,
    /// `(p-1)² / 2^{n-1}` at `p = n`.
    pub rank_deficient_leading: ExactScalar,
}

pub fn misc_asymptotes(n: usize) -> Result<Asymptotes> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            allowed: ">= 2",
        });
    }
    let big_n: BigInt = (BigInt::one() << n) - 1;
    let c = |i: usize| binomial(big_n.clone(), BigInt::from(i));
    let half_pow = BigRational::new(BigInt::one(), BigInt::one() << (n - 1));
    let sq = |k: usize| BigRational::from_integer(BigInt::from(k) * k);
    Ok(Asymptotes {
        threshold_leading: c(n) * 2,
        singular_leading: sq(n - 1) * &half_pow,
        schlafli: (0..=n).map(c).fold(BigInt::zero(), |a, b| a + b) * 2,
        tuple_ratio: sq(n) * &half_pow,
        rank_deficient_leading: sq(n - 1) * half_pow,
    })
}

/// One line of a bound table.
#[derive(Clone, Debug)]
pub struct BoundRow {
    pub name: &'static str,
    pub n: usize,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub epsilon: Option<ExactScalar>,
    pub c: Option<ExactScalar>,
    pub exact: Option<ExactScalar>,
    pub real: BigFloat,
}

pub const CSV_HEADER: &str = "name,n,p,m,epsilon,c,value_exact,value_real";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl BoundRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.name,
            self.n,
            opt(&self.p),
            opt(&self.m),
            self.epsilon.as_ref().map(format_scalar).unwrap_or_default(),
            self.c.as_ref().map(format_scalar).unwrap_or_default(),
            self.exact.as_ref().map(format_scalar).unwrap_or_default(),
            to_decimal(&self.real, 17)
        )
    }
}

/// Every evaluator at `n`: exact rows carry their real value too; lemma
/// rows (and the decay ratio `b2 / (5/8)^n`) appear for `n >= 4`.
pub fn bound_table(n: usize, epsilon: &ExactScalar, c: &ExactScalar) -> Result<Vec<BoundRow>> {
    let mut r = Real::new(PRECISION);
    let mut rows = Vec::new();
    let exact_row = |r: &mut Real, name, p, m, eps: Option<&ExactScalar>, value: ExactScalar| BoundRow {
        name,
        n,
        p,
        m,
        epsilon: eps.cloned(),
        c: None,
        real: r.rational(&value),
        exact: Some(value),
    };
    let a = misc_asymptotes(n)?;
    rows.push(exact_row(&mut r, "threshold_leading", None, None, None, a.threshold_leading.into()));
    rows.push(exact_row(&mut r, "singular_leading", None, None, None, a.singular_leading));
    rows.push(exact_row(&mut r, "schlafli", None, None, None, a.schlafli.into()));
    rows.push(exact_row(&mut r, "tuple_ratio", None, None, None, a.tuple_ratio));
    rows.push(exact_row(&mut r, "rank_deficient_leading", Some(n), None, None, a.rank_deficient_leading));
    rows.push(exact_row(&mut r, "p3_main_term", Some(n.max(3)), None, None, p3_main_term(n.max(3), n)?));
    rows.push(exact_row(&mut r, "elo_column_bound", None, Some(n), None, elo_column_bound(n)?));
    let m = n.min(5);
    rows.push(exact_row(&mut r, "rm_case1_bound", Some(m), Some(m), None, rm_case1_bound(m, m, n)?));
    if n >= 4 {
        let lb = lemma_bounds(n, epsilon, c)?;
        rows.push(exact_row(&mut r, "lemma_b1", None, None, Some(epsilon), lb.b1));
        let decay = r.rational(&pow_ratio(&ratio(5, 8), n));
        let ratio_row = r.div(&lb.b2, &decay);
        for (name, value) in [("lemma_b2", lb.b2), ("lemma_b3", lb.b3), ("lemma_b2_over_5_8_pow", ratio_row)] {
            rows.push(BoundRow {
                name,
                n,
                p: None,
                m: None,
                epsilon: Some(epsilon.clone()),
                c: Some(c.clone()),
                exact: None,
                real: value,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn main_term_examples() {
        assert_eq!(p3_main_term(3, 4).unwrap(), ratio(81, 64));
        assert_eq!(p3_main_term(3, 0).unwrap(), int(4));
        assert_eq!(p3_main_term(4, 10).unwrap(), ratio(16 * 59049, 1048576));
        assert!(p3_main_term(2, 4).is_err());
    }

    #[test]
    fn elo_examples() {
        assert_eq!(elo_column_bound(2).unwrap(), int(1));
        assert_eq!(elo_column_bound(3).unwrap(), ratio(3, 4));
        assert_eq!(elo_column_bound(4).unwrap(), ratio(3, 4));
    }

    #[test]
    fn elo_hits_examples() {
        // x1 + x2 + x3 is odd, so always ±1 or ±3; ±1 in 6 of 8 cases
        assert_eq!(elo_hits(&[int(1), int(1), int(1)]).unwrap(), 6);
        // (x1 + x2)/2 is ±1 only when the signs agree
        assert_eq!(elo_hits(&[ratio(1, 2), ratio(1, 2)]).unwrap(), 2);
        assert_eq!(elo_hits(&[int(2), int(3)]).unwrap(), 2);
        assert!(elo_hits(&[]).is_err());
    }

    #[test]
    fn rm_case1_examples() {
        for n in 1..=10 {
            assert_eq!(rm_case1_bound(n, n, n).unwrap(), BigRational::from_integer(BigInt::one() << n));
        }
        // 2^10 * 1 * 252 * (10/32)^5
        let direct = int(1024) * int(252) * pow_ratio(&ratio(10, 32), 5);
        assert_eq!(rm_case1_bound(5, 5, 10).unwrap(), direct);
        let a = rm_case1_bound(5, 5, 20).unwrap();
        let b = rm_case1_bound(5, 5, 15).unwrap() * int(32);
        assert!(a < b);
        assert!(rm_case1_bound(4, 3, 5).is_err());
    }

    #[test]
    fn case_examples() {
        let eps = ratio(1, 200);
        let c = default_c();
        assert_eq!(case_partition(5, 1_000_000, &eps, &c).unwrap(), CaseLabel::Case1);
        for n in [10, 100, 1024] {
            assert_eq!(case_partition(n - 1, n, &eps, &c).unwrap(), CaseLabel::Case3);
        }
        // n - cn/log2 n = 1024 - 753.664 = 270.3, so m = 512 lies above it
        assert_eq!(case_partition(512, 1024, &eps, &c).unwrap(), CaseLabel::Case3);
        assert_eq!(case_partition(200, 1024, &eps, &c).unwrap(), CaseLabel::Case2);
        assert_eq!(case_partition(270, 1024, &eps, &c).unwrap(), CaseLabel::Case2);
        assert_eq!(case_partition(271, 1024, &eps, &c).unwrap(), CaseLabel::Case3);
        assert_eq!(case_partition(3, 10, &eps, &c).unwrap(), CaseLabel::Direct);
        assert!(case_partition(5, 10, &ratio(1, 50), &c).is_err());
        assert!(case_partition(5, 10, &eps, &int(7)).is_err());
    }

    #[test]
    fn b1_examples() {
        assert_eq!(lemma_b1(8, &ratio(1, 100)), pow_ratio(&ratio(5, 8), 8) * pow_ratio(&ratio(101, 100), 8));
        assert_eq!(lemma_b1(8, &int(0)), pow_ratio(&ratio(5, 8), 8));
    }

    #[test]
    fn asymptote_examples() {
        let a = misc_asymptotes(2).unwrap();
        assert_eq!(a.schlafli, BigInt::from(14));
        assert_eq!(a.threshold_leading, BigInt::from(6));
        assert_eq!(misc_asymptotes(5).unwrap().tuple_ratio, ratio(25, 16));
        assert_eq!(misc_asymptotes(10).unwrap().singular_leading, ratio(81, 512));
        for n in 2..=20 {
            let a = misc_asymptotes(n).unwrap();
            assert!(a.schlafli >= a.threshold_leading);
        }
    }

    #[test]
    fn exact_and_real_forms_agree() {
        for n in [4, 10, 33, 64] {
            let mut hi = Real::new(320);
            for row in bound_table(n, &default_epsilon(), &default_c()).unwrap() {
                assert!(!row.real.is_inf() && !row.real.is_nan() && !row.real.is_negative(), "{} at {n}", row.name);
                if let Some(e) = &row.exact {
                    let x = hi.rational(e);
                    assert!(relative_difference(&row.real, &x) < 1e-12, "{} at {n}", row.name);
                    if let Some(f) = e.to_f64().filter(|f| f.is_finite() && *f > 1e-300) {
                        assert!((to_f64(&row.real) - f).abs() / f < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lemma_bounds_need_n_four() {
        assert!(lemma_bounds(3, &default_epsilon(), &default_c()).is_err());
        let lb = lemma_bounds(64, &default_epsilon(), &default_c()).unwrap();
        assert!(to_f64(&lb.b2) > 0.0 && to_f64(&lb.b3) > 0.0);
    }

    #[test]
    fn decimal_rendering() {
        let mut r = Real::new(PRECISION);
        let x = r.rational(&ratio(-2, 3));
        assert_eq!(to_decimal(&x, 5), "-6.6666e-1");
        assert_eq!(to_decimal(&r.int(7), 5), "7e+0");
        let big = r.big(&(BigInt::one() << 4000));
        assert!(to_decimal(&big, 5).starts_with("1.3182e+1204"));
    }

    #[test]
    fn csv_row_layout() {
        let rows = bound_table(6, &default_epsilon(), &default_c()).unwrap();
        for row in &rows {
            assert_eq!(row.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        }
        assert!(bound_table(3, &default_epsilon(), &default_c()).unwrap().iter().all(|r| !r.name.starts_with("lemma")));
    }
}
