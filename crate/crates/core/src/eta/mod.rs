//! The η* invariant of a projective point configuration, computed as a
//! homology rank and as a weighted sum over combinatorial flags.

mod config;
mod flags;
mod homology;

pub use config::{canonical_point, parse_config_json, random_config, sample_weight_sets, PointConfig};
pub use flags::{eta_star_flagsum, flag_of, flag_tally, FlagTally, FlagValue, MAX_FLAG_N, MAX_FLAG_POINTS};
pub use homology::{
    build_skeleton, eta_star_homology, HomologyField, SkeletonSlice, MAX_SKELETON_AMBIENT,
    MAX_SKELETON_POINTS,
};

use num_traits::Signed;
use serde_json::{json, Value};

use crate::linalg::{format_scalar, ExactScalar};

/// Outcome of comparing the homology rank with flag sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem3Report {
    pub homology: Option<usize>,
    /// One entry per weight set; `None` when that set could not be evaluated.
    pub flagsums: Vec<Option<ExactScalar>>,
    pub problems: Vec<String>,
    pub pass: bool,
}

impl Theorem3Report {
    pub fn to_json(&self) -> Value {
        json!({
            "homology": self.homology,
            "flagsums": self
                .flagsums
                .iter()
                .map(|v| v.as_ref().map(format_scalar))
                .collect::<Vec<_>>(),
            "problems": self.problems,
            "pass": self.pass,
        })
    }
}

/// Computes the homology rank once and the flag sum for each weight set.
/// Passes iff every flag sum is an integer equal to the rank.
pub fn verify_theorem3(h: &PointConfig, weight_sets: &[Vec<ExactScalar>]) -> Theorem3Report {
    verify_with(h, weight_sets, false)
}

#[doc(hidden)]
pub fn verify_with(h: &PointConfig, weight_sets: &[Vec<ExactScalar>], corrupt: bool) -> Theorem3Report {
    let mut problems = Vec::new();
    let homology = match eta_star_homology(h, HomologyField::Rationals) {
        Ok(v) => Some(v),
        Err(e) => {
            problems.push(format!("homology: {e}"));
            None
        }
    };
    let tally = if h.spans() {
        match flag_tally(h) {
            Ok(t) => Some(t),
            Err(e) => {
                problems.push(format!("flag sum: {e}"));
                None
            }
        }
    } else {
        Some(FlagTally::default())
    };
    let mut flagsums = Vec::with_capacity(weight_sets.len());
    for (i, ws) in weight_sets.iter().enumerate() {
        let value = match (&tally, h.with_weights(ws.clone())) {
            (_, Err(e)) => {
                problems.push(format!("weight set {i}: {e}"));
                None
            }
            (None, _) => None,
            (Some(t), Ok(_)) => Some(t.evaluate_signed(ws, corrupt)),
        };
        if let (Some(v), Some(r)) = (&value, homology) {
            if !v.is_integer() || v.is_negative() || *v != ExactScalar::from_integer(r.into()) {
                problems.push(format!(
                    "weight set {i}: flag sum {} differs from homology rank {r}",
                    format_scalar(v)
                ));
            }
        }
        flagsums.push(value);
    }
    let pass = problems.is_empty() && homology.is_some() && flagsums.iter().all(Option::is_some);
    Theorem3Report {
        homology,
        flagsums,
        problems,
        pass,
    }
}
