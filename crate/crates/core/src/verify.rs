//! Batch runner over the invariants of every module, one worker per check.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{nu_estimate_with, NuOptions};
use crate::catalog::{self, density, family_bound, family_routes, family_stream, Family, FamilySpec, MorphicWord};
use crate::cfcore::{self, CoefficientStream, ConvergentState};
use crate::constructions::{
    approximation_audit, expand_block, prescribed_stream, quotient_bounds, verify_tower_identity, Exponent,
};
use crate::error::{CfError, Result};
use crate::interval::Precision;
use crate::numeric::{ln_rational, parse_rational, rational_to_f64};
use crate::transforms::{equivalence, EquivalenceScaling, RationalStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Enclosures,
    Densities,
    Families,
    Constructions,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = [
        "identities",
        "enclosures",
        "densities",
        "families",
        "constructions",
        "all",
    ];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Identities,
                Suite::Enclosures,
                Suite::Densities,
                Suite::Families,
                Suite::Constructions,
            ],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Identities => "identities",
            Suite::Enclosures => "enclosures",
            Suite::Densities => "densities",
            Suite::Families => "families",
            Suite::Constructions => "constructions",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = CfError;

    fn from_str(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "identities" => Ok(Suite::Identities),
            "enclosures" => Ok(Suite::Enclosures),
            "densities" => Ok(Suite::Densities),
            "families" => Ok(Suite::Families),
            "constructions" => Ok(Suite::Constructions),
            "all" => Ok(Suite::All),
            other => Err(CfError::Parse(format!(
                "unknown suite {other:?}; expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub millis: f64,
}

type Check = (Suite, &'static str, fn() -> Result<String>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CfError::ConditionViolated(msg.into()))
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_stream(rng: &mut ChaCha8Rng, max: u64) -> Vec<(BigUint, BigUint)> {
    (0..1001)
        .map(|_| {
            (
                BigUint::from(rng.gen_range(1..=max)),
                BigUint::from(rng.gen_range(1..=max)),
            )
        })
        .collect()
}

fn check_determinant() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let terms = random_stream(&mut rng, 1_000_000);
        let mut s = ConvergentState::initial(BigUint::zero());
        for (a, b) in terms.iter().take(300) {
            s = s.advance(a, b)?;
            ensure(
                s.determinant() == s.expected_determinant(),
                format!("determinant fails at n={}", s.n),
            )?;
        }
    }
    Ok("20 random streams, n <= 300".into())
}

fn check_tower_identity() -> Result<String> {
    let xs = [q(0, 1), q(1, 1), q(7, 3)];
    for c in 1..=100u32 {
        for x in &xs {
            let r = verify_tower_identity(&BigUint::from(c), x)?;
            ensure(r.holds(), format!("nine-level identity fails at c={c}, x={x}"))?;
        }
    }
    Ok("c in 1..=100, x in {0, 1, 7/3}".into())
}

fn check_blocks() -> Result<String> {
    for k in 0..=8 {
        let b = expand_block(k);
        for x in [q(0, 1), q(1, 1)] {
            ensure(
                b.as_mobius().apply(&x)? == b.simple_mobius().apply(&x)?,
                format!("block identity fails at k={k}"),
            )?;
        }
    }
    Ok("k in 0..=8".into())
}

fn check_equivalence() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let terms: Vec<(BigRational, BigRational)> = (0..60)
            .map(|_| {
                (
                    q(rng.gen_range(1..50), rng.gen_range(1..50)),
                    q(rng.gen_range(1..50), rng.gen_range(1..50)),
                )
            })
            .collect();
        let scale: Vec<BigRational> = (0..61)
            .map(|_| {
                let v = q(rng.gen_range(1..30), rng.gen_range(1..30));
                if rng.gen_bool(0.3) {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let terms = std::sync::Arc::new(terms);
        let s = RationalStream::new(BigRational::zero(), move |n| Ok(terms[n - 1].clone()));
        let t = equivalence(&s, &EquivalenceScaling::new(move |n| scale[n].clone()));
        ensure(s.convergents(59)? == t.convergents(59)?, "scaled convergents differ")?;
    }
    Ok("10 random rational streams, n <= 59".into())
}

fn check_nesting() -> Result<String> {
    let s = catalog::family_stream(&FamilySpec::new(Family::ExpPoint))?.stream;
    let mut prev = cfcore::enclosure(&s, 1)?;
    for n in 2..40 {
        let e = cfcore::enclosure(&s, n)?;
        ensure(prev.contains_enclosure(&e), format!("enclosure {n} escapes {}", n - 1))?;
        prev = e;
    }
    Ok("exp_point tail, n < 40".into())
}

fn check_sandwich() -> Result<String> {
    let s = CoefficientStream::from_fn(|n| ((n % 3 + 1) as u32, (n % 4 + 2) as u32));
    let reference = cfcore::evaluate(
        &s,
        &(q(1, 1) / BigRational::from_integer(BigInt::from(10).pow(60))),
        10_000,
    )?;
    for n in 1..20 {
        let r = cfcore::residual_sandwich(&s, n, &reference)?;
        ensure(r.holds(), format!("residual sandwich not certified at n={n}"))?;
    }
    Ok("periodic stream, n < 20".into())
}

fn check_rational_limit() -> Result<String> {
    let s = family_stream(&FamilySpec::new(Family::Rational197))?.stream;
    let target = q(19, 7);
    let mut last: Option<BigRational> = None;
    for n in 2..=50 {
        let err = (cfcore::convergent(&s, n)?.to_rational() - &target).abs_value();
        if let Some(prev) = &last {
            ensure(err < *prev, format!("distance to 19/7 not decreasing at n={n}"))?;
        }
        last = Some(err);
    }
    let err = last.unwrap_or_default();
    ensure(err < q(1, 1_000_000_000_000), "distance above 1e-12 at n=50")?;
    Ok(format!(
        "log10 |A_50/B_50 - 19/7| = {:.1}",
        ln_rational(&err) / std::f64::consts::LN_10
    ))
}

trait AbsValue {
    fn abs_value(self) -> Self;
}

impl AbsValue for BigRational {
    fn abs_value(self) -> Self {
        num_traits::Signed::abs(&self)
    }
}

/// `Σ 1/k!` with remainder bound `2/(K+1)!`.
fn e_series(width: &BigRational) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut k = 0u64;
    loop {
        sum += &term;
        k += 1;
        term /= BigRational::from_integer(k.into());
        if &term * BigRational::from_integer(2.into()) <= *width {
            return (sum.clone(), sum + term * BigRational::from_integer(2.into()));
        }
    }
}

fn check_exp_point() -> Result<String> {
    let width = parse_rational("1e-40")?;
    let fs = family_stream(&FamilySpec::new(Family::ExpPoint))?;
    let e = fs.evaluate(&width, 100_000)?;
    let (lo, hi) = e_series(&width);
    ensure(e.width <= width, "framed enclosure too wide")?;
    ensure(e.lo <= hi && lo <= e.hi, "framed enclosure misses the series enclosure")?;
    Ok(format!("n_used = {}", e.n_used))
}

fn check_thue_morse_density() -> Result<String> {
    let w = MorphicWord::thue_morse();
    for k in 1..=20u32 {
        ensure(
            w.count_ones(1 << k) == 1 << (k - 1),
            format!("prefix 2^{k} is unbalanced"),
        )?;
    }
    Ok("prefixes 2^k, k <= 20".into())
}

fn check_fibonacci_density() -> Result<String> {
    let w = MorphicWord::fibonacci();
    let mut fib = vec![0usize, 1, 1];
    while fib.len() <= 30 {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    for k in 3..=30 {
        ensure(w.count_ones(fib[k]) == fib[k - 2], format!("count at F_{k} is off"))?;
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let d = rational_to_f64(&density(w, 100_000)?);
    ensure(
        (d - 1.0 / (phi * phi)).abs() < 1e-4,
        format!("density {d} far from 1/phi^2"),
    )?;
    Ok(format!("density at 1e5 = {d:.7}"))
}

fn check_integer_forms() -> Result<String> {
    let cases: [(&str, &[&str]); 5] = [
        ("rogers_ramanujan", &["a=1", "b=2"]),
        ("m_of_q", &["a=2", "b=5"]),
        ("tasoev1", &["u=3/2", "v=2/5", "a=7/2"]),
        ("tasoev2", &["a=5/2", "b=7/3"]),
        ("bundschuh", &["m=2", "s=2", "t=1,3", "u=2,1", "v=5,1", "w=1,3"]),
    ];
    for (name, pairs) in cases {
        let fs = family_stream(&FamilySpec::parse(name, pairs.iter().copied())?)?;
        let rational = fs.rational.as_ref().expect("rational original");
        let exact = rational.convergents(100)?;
        let mut state = ConvergentState::initial(fs.stream.b0().clone());
        for (n, expected) in exact.iter().enumerate().skip(1) {
            let (a, b) = fs.stream.term(n)?;
            state = state.advance(&a, &b)?;
            ensure(
                &state.convergent().to_rational() == expected,
                format!("{name} differs at n={n}"),
            )?;
        }
    }
    Ok("five rational families, n <= 100".into())
}

fn check_family_bounds() -> Result<String> {
    let mu = |name: &str, pairs: &[&str]| -> Result<Option<f64>> {
        Ok(family_bound(&FamilySpec::parse(name, pairs.iter().copied())?)?.mu_upper)
    };
    let near = |v: Option<f64>, t: f64| v.is_some_and(|v| (v - t).abs() < 1e-3);
    ensure(near(mu("thue_morse_cf", &[])?, 5.682), "thue_morse bound")?;
    ensure(near(mu("fibonacci_cf", &[])?, 2.312), "fibonacci bound")?;
    ensure(mu("ft_mixed_cf", &[])?.is_none(), "ft bounded route should fail")?;
    ensure(mu("rogers_ramanujan", &["a=1", "b=3"])? == Some(2.0), "RR a=1")?;
    ensure(mu("tasoev2", &["a=3", "b=3"])? == Some(2.0), "tasoev2 unit case")?;
    ensure(mu("exp_point", &[])? == Some(2.0), "exp_point")?;
    ensure(mu("rational_19_7", &[])?.is_none(), "rational_19_7 should fail")?;
    let tm = family_routes(&FamilySpec::new(Family::ThueMorseCf))?;
    ensure(tm.iter().any(|r| near(r.mu_upper, 2.414)), "thue_morse density route")?;
    Ok("per-family routes".into())
}

fn check_nu_overlap() -> Result<String> {
    let mut worst = 0f64;
    for info in catalog::registry() {
        let (n_max, exact_until) = match info.family {
            Family::TribonacciCf => (100, 80),
            _ => (600, 500),
        };
        let fs = family_stream(&FamilySpec::new(info.family))?;
        let t = nu_estimate_with(
            &fs.stream,
            NuOptions {
                n_max,
                exact_until,
                ..NuOptions::default()
            },
        )?;
        let err = t.overlap_max_rel_err.unwrap_or(0.0);
        ensure(err < 1e-9, format!("{}: overlap error {err:e}", info.name))?;
        worst = worst.max(err);
    }
    Ok(format!("worst overlap relative error {worst:.2e}"))
}

fn check_dual_evaluation() -> Result<String> {
    let width = parse_rational("1e-30")?;
    for s in ["2", "5/2", "3", "4"] {
        // unit quotients at s = 2 contract slowly
        let blocks = match s {
            "2" => 40,
            "4" => 4,
            _ => 6,
        };
        let plan = prescribed_stream(&s.parse()?, blocks)?;
        let g = cfcore::evaluate(&plan.gcf_stream(), &width, plan.word_len as usize)?;
        let c = cfcore::evaluate(&plan.simple_stream(), &width, plan.quotients.len())?;
        ensure(g.intersects(&c), format!("s={s}: representations disagree"))?;
        let whole_g = cfcore::convergent(&plan.gcf_stream(), plan.word_len as usize)?.to_rational();
        let whole_c = cfcore::convergent(&plan.simple_stream(), plan.quotients.len())?.to_rational();
        ensure(whole_g == whole_c, format!("s={s}: truncations differ"))?;
    }
    Ok("s in {2, 5/2, 3, 4}".into())
}

fn check_audits() -> Result<String> {
    let plan = prescribed_stream(&Exponent::integer(3)?, 6)?;
    for n in [1, 5, 9] {
        let r = approximation_audit(&plan, n)?;
        ensure(r.upper_holds, format!("s=3 upper inequality fails at n={n}"))?;
    }
    let inf = prescribed_stream(&Exponent::Infinity, 3)?;
    ensure(
        approximation_audit(&inf, 5)?.upper_holds,
        "Liouville inequality fails at n=5",
    )?;
    let qb = quotient_bounds(&plan, Precision::default())?;
    ensure(qb.blocks.iter().all(|b| b.lower_ok), "c_n below B^(s-2)")?;
    Ok(format!("upper c_n bound holds from n = {:?}", qb.upper_from))
}

const CHECKS: &[Check] = &[
    (Suite::Identities, "determinant", check_determinant),
    (Suite::Identities, "nine-level identity", check_tower_identity),
    (Suite::Identities, "block identity", check_blocks),
    (Suite::Identities, "equivalence", check_equivalence),
    (Suite::Enclosures, "nesting", check_nesting),
    (Suite::Enclosures, "residual sandwich", check_sandwich),
    (Suite::Enclosures, "rational limit", check_rational_limit),
    (Suite::Enclosures, "exp_point series", check_exp_point),
    (Suite::Densities, "thue_morse", check_thue_morse_density),
    (Suite::Densities, "fibonacci", check_fibonacci_density),
    (Suite::Families, "integer forms", check_integer_forms),
    (Suite::Families, "bounds", check_family_bounds),
    (Suite::Families, "nu overlap", check_nu_overlap),
    (Suite::Constructions, "dual evaluation", check_dual_evaluation),
    (Suite::Constructions, "audits", check_audits),
];

pub fn run_suite(suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let parts = suite.parts();
    let selected: Vec<&Check> = CHECKS.iter().filter(|c| parts.contains(&c.0)).collect();
    let checks: Vec<CheckResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&&(s, name, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let outcome = std::panic::catch_unwind(f);
                    let (passed, detail) = match outcome {
                        Ok(Ok(detail)) => (true, detail),
                        Ok(Err(e)) => (false, e.to_string()),
                        Err(_) => (false, "panicked".to_string()),
                    };
                    CheckResult {
                        suite: s,
                        name: name.to_string(),
                        passed,
                        detail,
                        millis: t.elapsed().as_secs_f64() * 1e3,
                    }
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().ok()).collect()
    });
    SuiteReport {
        suite,
        passed: checks.len() == selected.len() && checks.iter().all(|c| c.passed),
        checks,
        millis: start.elapsed().as_secs_f64() * 1e3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn identities_pass() {
        let r = run_suite(Suite::Identities);
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn series_oracle_brackets_e() {
        let (lo, hi) = e_series(&q(1, 1_000_000));
        assert!(rational_to_f64(&lo) <= std::f64::consts::E);
        assert!(rational_to_f64(&hi) >= std::f64::consts::E);
    }
}
