use std::collections::HashSet;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{format_scalar, int, int_rank, parse_scalar, ExactScalar};
use crate::signspace::en_points;

/// Finite set of projective points with weights summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    ambient: usize,
    points: Vec<Vec<i64>>,
    weights: Vec<ExactScalar>,
}

/// Divides by the gcd and makes the first nonzero coordinate positive.
pub fn canonical_point(v: &[i64]) -> Option<Vec<i64>> {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return None;
    }
    let lead = v.iter().find(|&&x| x != 0).copied()?;
    let g = if lead < 0 { -g } else { g };
    Some(v.iter().map(|&x| x / g).collect())
}

fn default_weights(t: usize) -> Vec<ExactScalar> {
    (0..t).map(|i| int((i == 0) as i64)).collect()
}

impl PointConfig {
    /// Canonicalizes `points`; `weights` default to `(1, 0, ..., 0)`.
    pub fn new(ambient: usize, points: Vec<Vec<i64>>, weights: Option<Vec<ExactScalar>>) -> Result<Self> {
        if ambient < 2 {
            return Err(Error::InvalidConfig(format!("ambient dimension {ambient} < 2")));
        }
        if points.is_empty() {
            return Err(Error::InvalidConfig("no points".into()));
        }
        let mut seen = HashSet::new();
        let mut canon = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: p.len(),
                });
            }
            let c = canonical_point(p)
                .ok_or_else(|| Error::InvalidConfig(format!("point {i} is zero")))?;
            if !seen.insert(c.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "point {i} repeats a projective point"
                )));
            }
            canon.push(c);
        }
        let weights = weights.unwrap_or_else(|| default_weights(canon.len()));
        check_weights(canon.len(), &weights)?;
        Ok(PointConfig {
            ambient,
            points: canon,
            weights,
        })
    }

    /// Same points, new weights.
    pub fn with_weights(&self, weights: Vec<ExactScalar>) -> Result<Self> {
        check_weights(self.points.len(), &weights)?;
        Ok(PointConfig {
            weights,
            ..self.clone()
        })
    }

    /// The `n+1` standard basis vectors of dimension `n+1`.
    pub fn basis(n: usize) -> Result<Self> {
        let d = n + 1;
        let pts = (0..d)
            .map(|i| (0..d).map(|j| (i == j) as i64).collect())
            .collect();
        Self::new(d, pts, None)
    }

    /// `n+2` points in general position: the basis and the all-ones vector.
    pub fn generic(n: usize) -> Result<Self> {
        let d = n + 1;
        let mut pts: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| (i == j) as i64).collect())
            .collect();
        pts.push(vec![1; d]);
        Self::new(d, pts, None)
    }

    /// The 2^n points `(1, ±1, ..., ±1)` in dimension `n+1`.
    pub fn e_n(n: usize) -> Result<Self> {
        let pts = en_points(n)?
            .into_iter()
            .map(|e| e.vector().to_signs())
            .collect();
        Self::new(n + 1, pts, None)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Projective dimension `n = ambient - 1`.
    pub fn n(&self) -> usize {
        self.ambient - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn weights(&self) -> &[ExactScalar] {
        &self.weights
    }

    pub fn spans(&self) -> bool {
        int_rank(&self.points) == self.ambient
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ambient": self.ambient,
            "points": self.points,
            "weights": self.weights.iter().map(format_scalar).collect::<Vec<_>>(),
        })
    }
}

/// Random configuration in dimension `ambient` with up to `max_points`
/// points and coordinates in `-2..=2`. With `spanning`, retries until the
/// points span; otherwise every point lies in a random proper subspace.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R, ambient: usize, max_points: usize, spanning: bool) -> PointConfig {
    let min_points = if spanning { ambient } else { 1 };
    assert!(ambient >= 2 && max_points >= min_points, "no configuration fits");
    loop {
        let t = rng.random_range(min_points..=max_points);
        let raw: Vec<Vec<i64>> = if spanning {
            (0..t)
                .map(|_| (0..ambient).map(|_| rng.random_range(-2..=2)).collect())
                .collect()
        } else {
            let dim = rng.random_range(1..ambient);
            let gens: Vec<Vec<i64>> = (0..dim)
                .map(|_| (0..ambient).map(|_| rng.random_range(-2..=2)).collect())
                .collect();
            (0..t)
                .map(|_| {
                    let coef: Vec<i64> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
                    (0..ambient)
                        .map(|j| gens.iter().zip(&coef).map(|(g, c)| g[j] * c).sum())
                        .collect()
                })
                .collect()
        };
        let mut seen = HashSet::new();
        let points: Vec<Vec<i64>> = raw
            .iter()
            .filter_map(|p| canonical_point(p))
            .filter(|p| seen.insert(p.clone()))
            .collect();
        if points.is_empty() {
            continue;
        }
        let config = PointConfig::new(ambient, points, None).expect("canonical distinct points");
        if config.spans() == spanning {
            return config;
        }
    }
}

/// Weight sets used for cross-checks: `(1, 0, ...)`, uniform, and (for
/// two or more points) a random set whose first entry is negative.
pub fn sample_weight_sets<R: Rng + ?Sized>(rng: &mut R, t: usize) -> Vec<Vec<ExactScalar>> {
    let uniform = vec![ExactScalar::new(1.into(), (t as i64).into()); t];
    let mut sets = vec![default_weights(t), uniform];
    if t >= 2 {
        let mut skew = vec![-int(rng.random_range(1..=3))];
        for _ in 1..t - 1 {
            skew.push(ExactScalar::new(
                rng.random_range(-4i64..=4).into(),
                rng.random_range(1i64..=3).into(),
            ));
        }
        let partial = skew.iter().fold(ExactScalar::zero(), |a, b| a + b);
        skew.push(int(1) - partial);
        sets.push(skew);
    }
    sets
}

fn check_weights(t: usize, weights: &[ExactScalar]) -> Result<()> {
    if weights.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            found: weights.len(),
        });
    }
    let sum: ExactScalar = weights.iter().fold(ExactScalar::zero(), |a, b| a + b);
    if !sum.is_one() {
        return Err(Error::WeightSum(format_scalar(&sum)));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightText {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightField {
    One(Vec<WeightText>),
    Many(Vec<Vec<WeightText>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    ambient: usize,
    points: Vec<Vec<i64>>,
    weights: Option<WeightField>,
}

fn weight_vector(ws: Vec<WeightText>) -> Result<Vec<ExactScalar>> {
    ws.into_iter()
        .map(|w| match w {
            WeightText::Int(v) => Ok(int(v)),
            WeightText::Text(s) => parse_scalar(&s),
        })
        .collect()
}

/// Parses `{"ambient", "points", "weights"?}`. `weights` may be one list or
/// a list of lists; the config carries the first set and every set is returned.
pub fn parse_config_json(text: &str) -> Result<(PointConfig, Vec<Vec<ExactScalar>>)> {
    let file: ConfigFile = serde_json::from_str(text)?;
    let sets = match file.weights {
        None => vec![default_weights(file.points.len())],
        Some(WeightField::One(ws)) => vec![weight_vector(ws)?],
        Some(WeightField::Many(sets)) => sets
            .into_iter()
            .map(weight_vector)
            .collect::<Result<Vec<_>>>()?,
    };
    let first = sets
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("empty weight list".into()))?;
    let config = PointConfig::new(file.ambient, file.points, Some(first))?;
    for set in &sets[1..] {
        check_weights(config.len(), set)?;
    }
    Ok((config, sets))
}
