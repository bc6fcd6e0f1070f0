//! Desk-scale verification battery: cross-checks between independent
//! computations and exact-count inequalities.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, bound_table, elo_column_bound, elo_hits, Real};
use crate::error::{Error, Result};
use crate::eta::{
    eta_star_flagsum, eta_star_homology, random_config, sample_weight_sets, verify_with, HomologyField,
    PointConfig,
};
use crate::events::{
    count_kso_independent_tuples, count_pattern_triples, exact_event_probability, exact_profile,
    witness_support_census, EventKind, EventSpec, ExactOptions,
};
use crate::linalg::{format_scalar, int, ratio, ExactScalar};
use crate::signspace::{enumerate_sign_vectors, random_sign_matrix, SignMatrix};

/// Check names in run order.
pub const CHECKS: &[&str] = &[
    "theorem3",
    "closed-forms",
    "degenerate",
    "symmetry",
    "vanishing",
    "triples",
    "support2",
    "singular",
    "tuples",
    "decomposition",
    "elo",
    "bounds",
];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Subset of [`CHECKS`]; empty runs everything.
    pub only: Vec<String>,
    /// Random configurations for `theorem3`.
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Corrupts the flag sum so that `theorem3` must fail.
    #[doc(hidden)]
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: Vec::new(),
            samples: 100,
            seed: 1,
            workers: 1,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn result(name: &str, problems: Vec<String>, summary: String) -> CheckResult {
    let pass = problems.is_empty();
    let detail = if pass { summary } else { problems.join("; ") };
    CheckResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Runs the selected checks in order.
pub fn run_battery(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    if let Some(bad) = opts.only.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "unknown check {bad:?}; known: {}",
            CHECKS.join(", ")
        )));
    }
    let selected: Vec<&str> = CHECKS
        .iter()
        .copied()
        .filter(|c| opts.only.is_empty() || opts.only.iter().any(|o| o == c))
        .collect();
    selected.into_iter().map(|c| run_check(c, opts)).collect()
}

fn run_check(name: &str, opts: &VerifyOptions) -> Result<CheckResult> {
    let exact = ExactOptions {
        workers: opts.workers,
        ..Default::default()
    };
    match name {
        "theorem3" => theorem3(opts),
        "closed-forms" => closed_forms(),
        "degenerate" => degenerate(opts.seed),
        "symmetry" => symmetry(opts.seed, &exact),
        "vanishing" => vanishing(&exact),
        "triples" => triples(),
        "support2" => support2(opts.seed),
        "singular" => singular(&exact),
        "tuples" => tuples(&exact),
        "decomposition" => decomposition(&exact),
        "elo" => elo(opts.seed),
        "bounds" => bounds_check(),
        _ => unreachable!("filtered above"),
    }
}

fn theorem3(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut configs = vec![PointConfig::e_n(2)?, PointConfig::e_n(3)?];
    for _ in 0..opts.samples {
        let ambient = rng.random_range(2..=5);
        configs.push(random_config(&mut rng, ambient, 8, true));
    }
    let mut problems = Vec::new();
    for (i, h) in configs.iter().enumerate() {
        let sets = sample_weight_sets(&mut rng, h.len());
        let report = verify_with(h, &sets, opts.inject_fault);
        if !report.pass {
            problems.push(format!("config {i}: {}", report.problems.join(", ")));
        }
    }
    Ok(result(
        "theorem3",
        problems,
        format!("{} configurations, homology rank equals every flag sum", configs.len()),
    ))
}

fn closed_forms() -> Result<CheckResult> {
    let mut problems = Vec::new();
    for n in 2..=4 {
        let cases = [(PointConfig::basis(n)?, 1), (PointConfig::generic(n)?, n + 1)];
        for (h, want) in cases {
            let hom = eta_star_homology(&h, HomologyField::Rationals)?;
            let flag = eta_star_flagsum(&h)?;
            if hom != want || flag != int(want as i64) {
                problems.push(format!("n = {n}, {} points: {hom} / {}", h.len(), format_scalar(&flag)));
            }
        }
    }
    Ok(result("closed-forms", problems, "basis gives 1, n+2 generic points give n+1".into()))
}

fn degenerate(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut problems = Vec::new();
    for i in 0..20 {
        let ambient = rng.random_range(2..=5);
        let h = random_config(&mut rng, ambient, 8, false);
        let hom = eta_star_homology(&h, HomologyField::Rationals)?;
        let flag = eta_star_flagsum(&h)?;
        if hom != 0 || !flag.is_zero() {
            problems.push(format!("config {i}: {hom} / {}", format_scalar(&flag)));
        }
    }
    Ok(result("degenerate", problems, "20 non-spanning configurations give 0".into()))
}

fn symmetry(seed: u64, exact: &ExactOptions) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let kinds = [
        EventKind::Kso,
        EventKind::RankDeficient,
        EventKind::Support { m: 3 },
        EventKind::IndependentSupport { m: 3 },
    ];
    for kind in kinds {
        for (p, n) in [(3, 3), (3, 4), (3, 5), (4, 4)] {
            let spec = EventSpec::new(kind, p, n)?;
            let reduced = exact_event_probability(&spec, exact)?;
            let full = exact_event_probability(
                &spec,
                &ExactOptions {
                    symmetry: false,
                    ..*exact
                },
            )?;
            if reduced.count != full.count {
                problems.push(format!("{spec}: {} vs {}", reduced.count, full.count));
            }
        }
    }
    // the events themselves under row/column negation and column swaps
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    for _ in 0..200 {
        let (p, n) = (rng.random_range(1..=4), rng.random_range(2..=6));
        let m = random_sign_matrix(p, n, &mut rng)?;
        let mut rows = m.to_int_rows();
        let i = rng.random_range(0..p);
        rows[i].iter_mut().for_each(|x| *x = -*x);
        let j = rng.random_range(0..n);
        let k = rng.random_range(0..n);
        for r in rows.iter_mut() {
            r[j] = -r[j];
            r.swap(j, k);
        }
        let moved = SignMatrix::new(
            rows.iter()
                .map(|r| crate::signspace::SignVector::from_signs(r))
                .collect::<Result<Vec<_>>>()?,
        )?;
        for kind in [EventKind::Kso, EventKind::RankDeficient, EventKind::Support { m: p.min(3) }] {
            let spec = EventSpec::new(kind, p, n)?;
            if spec.occurs(&m) != spec.occurs(&moved) {
                problems.push(format!("{spec} changes under a symmetry of {m:?}"));
            }
        }
    }
    Ok(result("symmetry", problems, "reduced and full counts agree; events invariant".into()))
}

fn vanishing(exact: &ExactOptions) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let shapes = (1..=6).map(|n| (1, n)).chain((1..=4).map(|n| (2, n)));
    for (p, n) in shapes {
        let c = exact_event_probability(&EventSpec::new(EventKind::Kso, p, n)?, exact)?;
        if c.count != 0 {
            problems.push(format!("KSO at p = {p}, n = {n}: {}", c.count));
        }
    }
    Ok(result("vanishing", problems, "no KSO matrices for p = 1, n <= 6 and p = 2, n <= 4".into()))
}

fn triples() -> Result<CheckResult> {
    let mut problems = Vec::new();
    for pattern in [[1, 1, 1], [1, 1, -1]] {
        for n in 1..=6 {
            let got = count_pattern_triples(n, pattern)?;
            if got != 6u64.pow(n as u32) {
                problems.push(format!("{pattern:?} at n = {n}: {got}"));
            }
        }
    }
    Ok(result("triples", problems, "both sign patterns give 6^n for n <= 6".into()))
}

fn support2(seed: u64) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let mut pairs = 0u64;
    for n in 1..=5 {
        let all: Vec<_> = enumerate_sign_vectors(n)?.collect();
        for &a in &all {
            for &b in &all {
                let m = SignMatrix::new(vec![a, b])?;
                match witness_support_census(&m) {
                    Ok(_) => pairs += 1,
                    Err(Error::DependentRows) => {}
                    Err(e) => problems.push(e.to_string()),
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2);
    for _ in 0..1000 {
        let n = rng.random_range(2..=16);
        let m = random_sign_matrix(2, n, &mut rng)?;
        match witness_support_census(&m) {
            Ok(_) => pairs += 1,
            Err(Error::DependentRows) => {}
            Err(e) => problems.push(e.to_string()),
        }
    }
    Ok(result("support2", problems, format!("{pairs} independent pairs, no support-2 witness")))
}

fn singular(exact: &ExactOptions) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let two = exact_event_probability(&EventSpec::square(EventKind::SingularPm1, 2)?, exact)?;
    if two.probability() != ratio(1, 2) {
        problems.push(format!("P_2 = {}", format_scalar(&two.probability())));
    }
    let mut values = Vec::new();
    for n in 3..=4 {
        let c = exact_event_probability(&EventSpec::square(EventKind::SingularPm1, n)?, exact)?;
        let unreduced = exact_event_probability(
            &EventSpec::square(EventKind::SingularPm1, n)?,
            &ExactOptions {
                symmetry: false,
                ..*exact
            },
        )?;
        if c != unreduced {
            problems.push(format!("n = {n}: reduction changes the count"));
        }
        values.push(format!("P_{n} = {}", format_scalar(&c.probability())));
    }
    Ok(result("singular", problems, format!("P_2 = 1/2, {}", values.join(", "))))
}

fn tuples(exact: &ExactOptions) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for n in 2..=4 {
        let count = count_kso_independent_tuples(n)?;
        // 2^{n²} P(n, n+1) = (KSO matrices of shape n x (n+1)) / 2^n
        let kso = exact_profile(n, n + 1, exact)?.kso;
        let scaled = BigRational::new(BigInt::from(kso), BigInt::from(1u64 << n));
        let lhs = int(count as i64);
        if lhs > scaled {
            problems.push(format!("n = {n}: {count} > {}", format_scalar(&scaled)));
        }
        let leading = bounds::misc_asymptotes(n)?.tuple_ratio;
        let total = binomial(BigInt::from(1u64 << n), BigInt::from(n))
            * (1..=n).fold(BigInt::from(1), |a, k| a * k);
        let frac = BigRational::new(BigInt::from(count), total);
        notes.push(format!(
            "n = {n}: count {count} {} {}, tuple fraction / n²2^(1-n) = {:.4}",
            if lhs < scaled { "<" } else { "=" },
            format_scalar(&scaled),
            (frac / leading).to_f64().unwrap_or(f64::NAN)
        ));
    }
    Ok(result("tuples", problems, notes.join("; ")))
}

fn decomposition(exact: &ExactOptions) -> Result<CheckResult> {
    let mut problems = Vec::new();
    let mut cases = 0;
    for n in 1..=5 {
        let profiles = (1..=4)
            .map(|p| exact_profile(p, n, exact))
            .collect::<Result<Vec<_>>>()?;
        for (pi, prof) in profiles.iter().enumerate() {
            let p = pi + 1;
            for m in 1..=p {
                cases += 1;
                let bound = binomial(p as u128, m as u128)
                    * profiles[m - 1].independent_support[m]
                    * (1u128 << ((p - m) * n));
                if prof.independent_support[m] > bound {
                    problems.push(format!("R_m inequality at m = {m}, p = {p}, n = {n}"));
                }
                if prof.support[m] > prof.independent_support[m] + prof.rank_deficient {
                    problems.push(format!("P_m inequality at m = {m}, p = {p}, n = {n}"));
                }
            }
            let sum: u128 = (3..=p).map(|m| prof.independent_support[m]).sum();
            if prof.kso > sum + prof.rank_deficient {
                problems.push(format!("KSO decomposition at p = {p}, n = {n}"));
            }
        }
    }
    Ok(result("decomposition", problems, format!("{cases} (m, p, n) cases with p <= 4, n <= 5")))
}

fn elo(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe10);
    let mut problems = Vec::new();
    for _ in 0..200 {
        let m = rng.random_range(1..=12);
        let alpha: Vec<ExactScalar> = (0..m)
            .map(|_| {
                let mut num = rng.random_range(-6i64..=6);
                if num == 0 {
                    num = 1;
                }
                ratio(num, rng.random_range(1..=4))
            })
            .collect();
        let hits = elo_hits(&alpha)?;
        let bound = elo_column_bound(m)? * BigRational::from_integer(BigInt::from(1u64 << m));
        if int(hits as i64) > bound {
            problems.push(format!("{:?}: {hits} hits", alpha.iter().map(format_scalar).collect::<Vec<_>>()));
        }
    }
    Ok(result("elo", problems, "200 coefficient vectors within the column bound".into()))
}

fn bounds_check() -> Result<CheckResult> {
    let mut problems = Vec::new();
    let mut hi = Real::new(320);
    for n in 2..=64 {
        for row in bound_table(n, &bounds::default_epsilon(), &bounds::default_c())? {
            if row.real.is_nan() || row.real.is_inf() || row.real.is_negative() {
                problems.push(format!("{} at n = {n} is not finite and non-negative", row.name));
            }
            if let Some(e) = &row.exact {
                let x = hi.rational(e);
                if bounds::relative_difference(&row.real, &x) >= 1e-12 {
                    problems.push(format!("{} at n = {n}: real and exact forms differ", row.name));
                }
            }
        }
    }
    Ok(result("bounds", problems, "n = 2..64 finite; exact and real forms agree".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_pass() {
        let opts = VerifyOptions {
            only: ["closed-forms", "triples", "vanishing", "tuples"].map(String::from).to_vec(),
            samples: 5,
            ..Default::default()
        };
        for r in run_battery(&opts).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn injected_fault_fails_theorem3() {
        let opts = VerifyOptions {
            only: vec!["theorem3".into()],
            samples: 3,
            inject_fault: true,
            ..Default::default()
        };
        assert!(!run_battery(&opts).unwrap()[0].pass);
    }

    #[test]
    fn unknown_check_is_rejected() {
        let opts = VerifyOptions {
            only: vec!["nope".into()],
            ..Default::default()
        };
        assert!(run_battery(&opts).is_err());
    }
}
