//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always shown.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcfx::bounds::{bounded_bound, lemma_bound, nu_estimate, GrowthSpec};
use gcfx::catalog::{density, family_bound, family_growth, family_stream, Family, FamilySpec, MorphicWord};
use gcfx::cfcore::{self, ConvergentState};
use gcfx::constructions::{approximation_audit, expand_block, prescribed_stream, verify_tower_identity, Exponent};
use gcfx::numeric::parse_rational;
use gcfx::{CfError, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn determinant_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    for _ in 0..100 {
        let mut s = ConvergentState::initial(BigUint::from(rng.gen_range(0..=1_000_000u32)));
        // Π tracked here, apart from the state
        let mut pi = BigInt::one();
        for n in 0..1000usize {
            let a = BigUint::from(rng.gen_range(1..=1_000_000u32));
            let b = BigUint::from(rng.gen_range(1..=1_000_000u32));
            let next = s.advance(&a, &b)?;
            pi *= BigInt::from(a);
            let (c, d) = (s.convergent(), next.convergent());
            let lhs = BigInt::from(&c.num * &d.den) - BigInt::from(&c.den * &d.num);
            let rhs = if n % 2 == 0 { -pi.clone() } else { pi.clone() };
            if lhs != rhs {
                failures += 1;
            }
            s = next;
        }
    }
    outcome(
        failures == 0,
        format!("A_n B_(n+1) - B_n A_(n+1) = (-1)^(n+1) Pi_(n+1): 100 streams x 1000 terms, {failures} failures"),
    )
}

fn rational_limit() -> Result<Outcome> {
    let s = family_stream(&FamilySpec::new(Family::Rational197))?.stream;
    let err = (cfcore::convergent(&s, 50)?.to_rational() - q(19, 7)).abs();
    let tol = q(1, 1_000_000_000_000);
    outcome(err < tol, format!("|A_50/B_50 - 19/7| < 1e-12: {}", err < tol))
}

/// `Σ_{k ≤ K} 1/k!` and the same plus `2/(K+1)!`, an enclosure of e.
fn e_oracle(width: &BigRational) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut k = 0u64;
    loop {
        sum += &term;
        k += 1;
        term /= BigRational::from_integer(BigInt::from(k));
        let tail = &term * BigRational::from_integer(2.into());
        if tail <= *width {
            return (sum.clone(), sum + tail);
        }
    }
}

fn exp_point() -> Result<Outcome> {
    let width = parse_rational("1e-40")?;
    let spec = FamilySpec::parse("exp_point", ["x=1", "y=1"])?;
    let e = family_stream(&spec)?.evaluate(&width, 100_000)?;
    let (lo, hi) = e_oracle(&(&width / BigRational::from_integer(1000.into())));
    let matches = e.width <= width && e.lo <= hi && lo <= e.hi;
    let shape = match family_growth(&spec)? {
        GrowthSpec::Polynomial { l, k1, k2, .. } => l.is_zero() && k1.is_one() && k2.is_one(),
        _ => false,
    };
    let mu = family_bound(&spec)?.mu_upper;
    outcome(
        matches && shape && mu == Some(2.0),
        format!("width ok and oracle overlap: {matches}; l=0, k1=k2=1: {shape}; mu = {mu:?}"),
    )
}

fn bounded_route() -> Result<Outcome> {
    let main = bounded_bound(&GrowthSpec::bounded(1, 2, 2, 2))?.mu_upper;
    let truncated = main.map(|m| (m * 1000.0).floor() / 1000.0);
    let unit = bounded_bound(&GrowthSpec::bounded(1, 1, 2, 2))?.mu_upper;
    let violated = bounded_bound(&GrowthSpec::bounded(1, 2, 1, 1))?;
    let ok = truncated == Some(5.682) && unit == Some(2.0) && !violated.condition_ok() && violated.mu_upper.is_none();
    outcome(
        ok,
        format!(
            "(1,2,2,2) -> {main:?}; alpha2=1 -> {unit:?}; (1,2,1,1) violated: {}",
            !violated.condition_ok()
        ),
    )
}

fn empirical_nu() -> Result<Outcome> {
    let ln2 = 2f64.ln();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let nu_t = ln2 / (5.0 + 4.0 * 2f64.sqrt()).ln();
    let trace = |f: Family| -> Result<(f64, f64)> {
        let s = family_stream(&FamilySpec::new(f))?.stream;
        let nu = nu_estimate(&s, 10_000, 500)?.empirical_nu;
        Ok((nu, lemma_bound(nu)?))
    };
    let (t_nu, t_mu) = trace(Family::ThueMorseCf)?;
    let (_, f_mu) = trace(Family::FibonacciCf)?;
    let (_, ft_mu) = trace(Family::FtMixedCf)?;
    let mu_f = 2.0 + {
        let nu = ln2 / (phi * (1.0 + 2f64.sqrt()).ln() + (3.0 + 2f64.sqrt()).ln());
        nu / (1.0 - nu)
    };
    let mu_ft = 2.0 + {
        let nu = 4f64.ln() / (phi * phi * ((3.0 + 6f64.sqrt()).ln() - ln2));
        nu / (1.0 - nu)
    };
    let t_ok = (t_nu - nu_t).abs() < 0.01 && (t_mu - 2.414).abs() < 0.05;
    let f_ok = (f_mu - 2.312).abs() < 0.05 && (mu_f - 2.312).abs() < 1e-3;
    let ft_ok = (ft_mu - 3.119).abs() < 0.1 && (mu_ft - 3.119).abs() < 1e-3;
    outcome(
        t_ok && f_ok && ft_ok,
        format!(
            "thue_morse nu {t_nu:.5} mu {t_mu:.4} [{}]; fibonacci mu {f_mu:.4} [{}]; ft mu {ft_mu:.4} vs 3.119 [{}]",
            ok_word(t_ok),
            ok_word(f_ok),
            ok_word(ft_ok)
        ),
    )
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn densities() -> Result<Outcome> {
    let tm = MorphicWord::thue_morse().count_ones(1 << 20);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let d = density(MorphicWord::fibonacci(), 100_000)?;
    let target = gcfx::numeric::f64_to_rational(1.0 / (phi * phi))?;
    let gap = gcfx::numeric::rational_to_f64(&(d - target).abs());
    outcome(
        tm == 1 << 19 && gap < 1e-4,
        format!("thue_morse ones in 2^20: {tm}; fibonacci density gap {gap:.2e}"),
    )
}

fn construction() -> Result<Outcome> {
    let mut identities = true;
    for c in 1..=100u32 {
        for x in [q(0, 1), q(1, 1), q(7, 3)] {
            identities &= verify_tower_identity(&BigUint::from(c), &x)?.holds();
        }
    }
    for k in 0..=8 {
        let b = expand_block(k);
        identities &= b.as_mobius().projectively_equal(&b.simple_mobius());
    }

    let plan = prescribed_stream(&Exponent::integer(3)?, 6)?;
    let width = parse_rational("1e-30")?;
    let g = cfcore::evaluate(&plan.gcf_stream(), &width, plan.word_len as usize)?;
    let c = cfcore::evaluate(&plan.simple_stream(), &width, plan.quotients.len())?;
    let dual = g.intersects(&c);

    let mut audited = Vec::new();
    let mut n = 1;
    while audited.len() < 2 && n + 2 <= plan.quotients.len() {
        match approximation_audit(&plan, n) {
            Ok(r) => audited.push((n, r.upper_holds)),
            Err(CfError::NeedsMorePrecision { .. }) => {}
            Err(e) => return Err(e),
        }
        n += 4;
    }
    let audits = audited.len() == 2 && audited.iter().all(|a| a.1);
    let inf = prescribed_stream(&Exponent::Infinity, 3)?;
    let liouville = approximation_audit(&inf, 5)?;
    let liouville_ok = liouville.upper_holds && liouville.upper_exponent == "5";
    outcome(
        identities && dual && audits && liouville_ok,
        format!("identities {identities}; dual at 1e-30 {dual}; audits {audited:?}; infinity n=5 {liouville_ok}"),
    )
}

fn integerization() -> Result<Outcome> {
    let spec = FamilySpec::parse("rogers_ramanujan", ["a=1", "b=2", "r=1", "s=1"])?;
    let fs = family_stream(&spec)?;
    let rational = fs
        .rational
        .as_ref()
        .ok_or_else(|| CfError::InvalidValue("no rational form".into()))?;
    let exact = rational.convergents(100)?;
    let mut state = ConvergentState::initial(fs.stream.b0().clone());
    let mut same = true;
    for (n, expected) in exact.iter().enumerate().skip(1) {
        let (a, b) = fs.stream.term(n)?;
        state = state.advance(&a, &b)?;
        same &= state.convergent().to_rational() == *expected;
    }
    let rr = family_bound(&spec)?.mu_upper;
    let tasoev = family_bound(&FamilySpec::parse("tasoev2", ["a=3", "b=3"])?)?.mu_upper;
    outcome(
        same && rr == Some(2.0) && tasoev == Some(2.0),
        format!("convergents equal to n=100: {same}; rr mu {rr:?}; tasoev2 mu {tasoev:?}"),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

const CRITERIA: &[Criterion] = &[
    (1, "determinant identity", Duration::from_secs(30), determinant_identity),
    (2, "rational limit 19/7", Duration::from_secs(5), rational_limit),
    (3, "exp_point enclosure and bound", Duration::from_secs(5), exp_point),
    (4, "bounded route", Duration::from_secs(1), bounded_route),
    (5, "empirical nu", Duration::from_secs(60), empirical_nu),
    (6, "densities", Duration::from_secs(10), densities),
    (7, "prescribed exponent s=3", Duration::from_secs(60), construction),
    (
        8,
        "integer forms and unit bounds",
        Duration::from_secs(10),
        integerization,
    ),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for &(id, name, limit, check) in CRITERIA {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {id} {:<31} {} {:>8.2}s (limit {}s)  {detail}",
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
