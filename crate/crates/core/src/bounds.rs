//! Upper bounds on the asymptotic irrationality exponent from growth
//! properties of the partial coefficients, and an empirical estimator for the
//! ratio `log Π_n / log B_n`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cfcore::{CoefficientStream, ConvergentState};
use crate::error::{CfError, Result};
use crate::numeric::{ln_biguint, ln_rational, parse_rational, rational_to_f64};

/// `2 + ν/(1 − ν)`.
pub fn lemma_bound(nu: f64) -> Result<f64> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(CfError::InvalidValue(format!(
            "nu = {nu} must be a finite non-negative number"
        )));
    }
    if nu >= 1.0 {
        return Err(CfError::ConditionViolated(format!("nu = {nu} is not below 1")));
    }
    Ok(2.0 + nu / (1.0 - nu))
}

/// Positive real `radicand^(1/index)`, enough to carry `√b` style growth rates exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    pub radicand: BigRational,
    pub index: u32,
}

impl Root {
    pub fn new(radicand: BigRational, index: u32) -> Result<Self> {
        if !radicand.is_positive() || index == 0 {
            return Err(CfError::InvalidValue(format!(
                "root({radicand}, {index}) needs a positive radicand and index"
            )));
        }
        Ok(Root { radicand, index })
    }

    pub fn rational(x: BigRational) -> Result<Self> {
        Self::new(x, 1)
    }

    pub fn integer(x: u64) -> Self {
        Root {
            radicand: BigRational::from_integer(x.into()),
            index: 1,
        }
    }

    pub fn sqrt(x: BigRational) -> Result<Self> {
        Self::new(x, 2)
    }

    /// Accepts `x`, `p/q`, `sqrt(x)` and `root(x, k)`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let inner = |prefix: &str| t.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        if let Some(arg) = inner("sqrt(") {
            return Self::sqrt(parse_rational(arg)?);
        }
        if let Some(args) = inner("root(") {
            let (x, k) = args
                .split_once(',')
                .ok_or_else(|| CfError::Parse(format!("expected root(x, k) in {t:?}")))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| CfError::Parse(format!("bad root index in {t:?}")))?;
            return Self::new(parse_rational(x)?, k);
        }
        Self::rational(parse_rational(t)?)
    }

    pub fn ln(&self) -> f64 {
        ln_rational(&self.radicand) / f64::from(self.index)
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    fn pow_rational(x: &BigRational, e: u32) -> BigRational {
        num_traits::pow(x.clone(), e as usize)
    }

    /// Exact comparison of two roots.
    pub fn cmp_exact(&self, other: &Root) -> Ordering {
        // x^(1/i) <=> y^(1/j)  iff  x^j <=> y^i
        let lhs = Self::pow_rational(&self.radicand, other.index);
        let rhs = Self::pow_rational(&other.radicand, self.index);
        lhs.cmp(&rhs)
    }

    pub fn cmp_one(&self) -> Ordering {
        self.radicand.cmp(&BigRational::one())
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            1 => write!(f, "{}", self.radicand),
            2 => write!(f, "sqrt({})", self.radicand),
            k => write!(f, "root({}, {k})", self.radicand),
        }
    }
}

/// Declared growth of the partial coefficients.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum GrowthSpec {
    /// `α₁ ≤ a_n ≤ α₂`, `β₁ ≤ b_n ≤ β₂`.
    Bounded {
        alpha1: BigUint,
        alpha2: BigUint,
        beta1: BigUint,
        beta2: BigUint,
    },
    /// `a_n ≤ α n^l`, `β₁ n^k₁ ≤ b_n ≤ β₂ n^k₂`.
    Polynomial {
        alpha: BigRational,
        l: BigRational,
        beta1: BigRational,
        k1: BigRational,
        beta2: BigRational,
        k2: BigRational,
    },
    /// `a_n ≤ r α^(n^l)`, `s₁ β₁^(n^k₁) ≤ b_n ≤ s₂ β₂^(n^k₂)`.
    Exponential {
        r: BigRational,
        alpha: Root,
        l: BigRational,
        s1: BigRational,
        beta1: Root,
        k1: BigRational,
        s2: BigRational,
        beta2: Root,
        k2: BigRational,
    },
}

impl GrowthSpec {
    pub fn bounded(alpha1: u64, alpha2: u64, beta1: u64, beta2: u64) -> Self {
        GrowthSpec::Bounded {
            alpha1: alpha1.into(),
            alpha2: alpha2.into(),
            beta1: beta1.into(),
            beta2: beta2.into(),
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            GrowthSpec::Bounded { .. } => "bounded",
            GrowthSpec::Polynomial { .. } => "polynomial",
            GrowthSpec::Exponential { .. } => "exponential",
        }
    }

    /// Dispatches to the calculator for the growth class.
    pub fn bound(&self) -> Result<BoundReport> {
        match self {
            GrowthSpec::Bounded { .. } => bounded_bound(self),
            GrowthSpec::Polynomial { .. } => poly_bound(self),
            GrowthSpec::Exponential { .. } => exp_bound(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Certified,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Condition {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Condition {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: String,
    pub conditions: Vec<Condition>,
    /// Absent when some condition fails.
    pub mu_upper: Option<f64>,
    pub nu_limit: Option<f64>,
    pub mode: Mode,
}

impl BoundReport {
    pub fn condition_ok(&self) -> bool {
        self.conditions.iter().all(|c| c.ok)
    }

    fn finish(
        theorem: &str,
        conditions: Vec<Condition>,
        mu: impl FnOnce() -> f64,
        nu: Option<f64>,
        mode: Mode,
    ) -> Self {
        let ok = conditions.iter().all(|c| c.ok);
        BoundReport {
            theorem: theorem.into(),
            mu_upper: ok.then(mu),
            nu_limit: nu,
            conditions,
            mode,
        }
    }

    /// Converts a failed report into a condition-violated error.
    pub fn into_result(self) -> Result<BoundReport> {
        if self.condition_ok() {
            return Ok(self);
        }
        let failed: Vec<String> = self
            .conditions
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        Err(CfError::ConditionViolated(format!(
            "{}: {}",
            self.theorem,
            failed.join("; ")
        )))
    }

    /// Bound from an estimated ν, labelled empirical.
    pub fn from_nu(nu: f64, growth: Option<f64>) -> BoundReport {
        let mut conditions = vec![Condition::new("nu<1", nu < 1.0, format!("nu = {nu:.6}"))];
        if let Some(g) = growth {
            conditions.push(Condition::new(
                "log B_(n+1)/log B_n -> 1",
                g.is_finite(),
                format!("trailing max {g:.6}"),
            ));
        }
        Self::finish("lemma", conditions, || 2.0 + nu / (1.0 - nu), Some(nu), Mode::Empirical)
    }
}

pub const THEOREM_BOUNDED: &str = "bounded";
pub const THEOREM_POLY: &str = "polynomial";
pub const THEOREM_EXP: &str = "exponential";

fn ln_u(x: &BigUint) -> f64 {
    ln_biguint(x)
}

/// Bounded partial coefficients.
///
/// `γ₁ = (β₁ + √(β₁² + 4α₁))/2 > α₂` is decided exactly: it holds when
/// `2α₂ ≤ β₁`, and otherwise iff `β₁² + 4α₁ > (2α₂ − β₁)²`.
pub fn bounded_bound(spec: &GrowthSpec) -> Result<BoundReport> {
    let GrowthSpec::Bounded {
        alpha1,
        alpha2,
        beta1,
        beta2,
    } = spec
    else {
        return Err(CfError::InvalidValue(
            "bounded_bound needs a bounded growth spec".into(),
        ));
    };
    if alpha1.is_zero() || beta1.is_zero() {
        return Err(CfError::InvalidValue("alpha1 and beta1 must be positive".into()));
    }
    if alpha1 > alpha2 || beta1 > beta2 {
        return Err(CfError::InvalidValue(format!(
            "need alpha1 <= alpha2 and beta1 <= beta2, got ({alpha1}, {alpha2}, {beta1}, {beta2})"
        )));
    }
    let twice_alpha2 = alpha2 * 2u32;
    let holds = if &twice_alpha2 <= beta1 {
        true
    } else {
        let d = &twice_alpha2 - beta1;
        beta1 * beta1 + alpha1 * 4u32 > &d * &d
    };
    let a1 = alpha1.to_f64().unwrap_or(f64::INFINITY);
    let b1 = beta1.to_f64().unwrap_or(f64::INFINITY);
    let disc = (b1 * b1 + 4.0 * a1).sqrt();
    let gamma1 = (b1 + disc) / 2.0;
    let gamma2 = (b1 - disc) / 2.0;
    let ln_g1 = gamma1.ln();
    let ln_a2 = ln_u(alpha2);
    let conditions = vec![Condition::new(
        "gamma1>alpha2",
        holds,
        format!("gamma1 = {gamma1:.12}, gamma2 = {gamma2:.12}, alpha2 = {alpha2}"),
    )];
    let nu = holds.then(|| ln_a2 / ln_g1);
    Ok(BoundReport::finish(
        THEOREM_BOUNDED,
        conditions,
        || 2.0 + ln_a2 / (ln_g1 - ln_a2),
        nu,
        Mode::Certified,
    ))
}

/// Polynomially growing partial coefficients: `l < k₁ ≤ k₂` gives `2 + l/(k₁ − l)`.
pub fn poly_bound(spec: &GrowthSpec) -> Result<BoundReport> {
    let GrowthSpec::Polynomial {
        alpha,
        l,
        beta1,
        k1,
        beta2,
        k2,
    } = spec
    else {
        return Err(CfError::InvalidValue(
            "poly_bound needs a polynomial growth spec".into(),
        ));
    };
    for (name, v) in [
        ("alpha", alpha),
        ("beta1", beta1),
        ("k1", k1),
        ("beta2", beta2),
        ("k2", k2),
    ] {
        if !v.is_positive() {
            return Err(CfError::InvalidValue(format!("{name} = {v} must be positive")));
        }
    }
    if l.is_negative() {
        return Err(CfError::InvalidValue(format!("l = {l} must be non-negative")));
    }
    let conditions = vec![
        Condition::new("l<k1", l < k1, format!("l = {l}, k1 = {k1}")),
        Condition::new("k1<=k2", k1 <= k2, format!("k1 = {k1}, k2 = {k2}")),
    ];
    let (lf, k1f) = (rational_to_f64(l), rational_to_f64(k1));
    let nu = (l < k1).then(|| lf / k1f);
    let mu = {
        let (l, k1) = (l.clone(), k1.clone());
        move || rational_to_f64(&(BigRational::from_integer(2.into()) + &l / (&k1 - &l)))
    };
    Ok(BoundReport::finish(THEOREM_POLY, conditions, mu, nu, Mode::Certified))
}

/// Exponentially growing partial coefficients with `k₁ + 1 > k₂ ≥ k₁`.
///
/// `l < k₁` gives 2; `l = k₁` with `α < β₁` gives
/// `2 + log α/(log β₁ − log α)`, floored at 2.
pub fn exp_bound(spec: &GrowthSpec) -> Result<BoundReport> {
    let GrowthSpec::Exponential {
        r,
        alpha,
        l,
        s1,
        beta1,
        k1,
        s2,
        beta2: _,
        k2,
    } = spec
    else {
        return Err(CfError::InvalidValue(
            "exp_bound needs an exponential growth spec".into(),
        ));
    };
    for (name, v) in [("r", r), ("s1", s1), ("s2", s2), ("k1", k1), ("k2", k2)] {
        if !v.is_positive() {
            return Err(CfError::InvalidValue(format!("{name} = {v} must be positive")));
        }
    }
    if l.is_negative() {
        return Err(CfError::InvalidValue(format!("l = {l} must be non-negative")));
    }
    let window = k1 <= k2 && *k2 < k1 + BigRational::one();
    let mut conditions = vec![Condition::new("k1+1>k2>=k1", window, format!("k1 = {k1}, k2 = {k2}"))];
    let ln_alpha = alpha.ln();
    let ln_beta = beta1.ln();
    let (mu, nu): (f64, Option<f64>) = match l.cmp(k1) {
        Ordering::Less => {
            conditions.push(Condition::new("l<k1", true, format!("l = {l}, k1 = {k1}")));
            (2.0, Some(0.0))
        }
        Ordering::Equal => {
            let below = alpha.cmp_exact(beta1) == Ordering::Less;
            conditions.push(Condition::new("l=k1", true, format!("l = k1 = {l}")));
            conditions.push(Condition::new(
                "alpha<beta1",
                below,
                format!("alpha = {alpha}, beta1 = {beta1}"),
            ));
            // alpha <= 1 cannot exceed the Dirichlet floor
            let mu = if alpha.cmp_one() == Ordering::Greater {
                2.0 + ln_alpha / (ln_beta - ln_alpha)
            } else {
                2.0
            };
            (mu, below.then(|| (ln_alpha / ln_beta).max(0.0)))
        }
        Ordering::Greater => {
            conditions.push(Condition::new("l<=k1", false, format!("l = {l} exceeds k1 = {k1}")));
            (f64::NAN, None)
        }
    };
    Ok(BoundReport::finish(THEOREM_EXP, conditions, || mu, nu, Mode::Certified))
}

/// One sample of the ν estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuSample {
    pub n: usize,
    /// `log Π_n / log B_n`.
    pub nu: f64,
    /// `log B_(n+1) / log B_n`.
    pub growth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuOptions {
    pub n_max: usize,
    pub exact_until: usize,
    /// Fraction of the trailing samples used for the empirical limsup.
    pub window: f64,
    /// Length of the range checked against the exact recurrence.
    pub overlap: usize,
}

impl NuOptions {
    pub fn new(n_max: usize) -> Self {
        NuOptions {
            n_max,
            ..Self::default()
        }
    }
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            n_max: 10_000,
            exact_until: 500,
            window: 0.2,
            overlap: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuTrace {
    pub samples: Vec<NuSample>,
    pub log_b_final: f64,
    pub log_pi_final: f64,
    /// Maximum of `log Π_n / log B_n` over the trailing window.
    pub empirical_nu: f64,
    /// Maximum of `log B_(n+1) / log B_n` over the trailing window.
    pub growth_max: f64,
    pub window_start: usize,
    pub exact_until: usize,
    /// Largest relative error of the log-domain `log B_n` against the exact
    /// value on the overlap range, when the range is non-empty.
    pub overlap_max_rel_err: Option<f64>,
    pub mode: Mode,
}

impl NuTrace {
    pub fn lemma_report(&self) -> BoundReport {
        BoundReport::from_nu(self.empirical_nu, Some(self.growth_max))
    }
}

pub fn nu_estimate(stream: &CoefficientStream, n_max: usize, exact_until: usize) -> Result<NuTrace> {
    nu_estimate_with(
        stream,
        NuOptions {
            n_max,
            exact_until,
            ..NuOptions::default()
        },
    )
}

/// Log-domain tracker of `log B_n` and `log(B_(n-1)/B_n)`.
#[derive(Debug, Clone, Copy)]
struct LogTracker {
    log_b: f64,
    log_ratio: f64,
}

impl LogTracker {
    fn step(&mut self, ln_a: f64, ln_b: f64) {
        let x = (ln_a + self.log_ratio - ln_b).exp();
        let l1p = x.ln_1p();
        self.log_b += ln_b + l1p;
        self.log_ratio = -(ln_b + l1p);
    }
}

/// Runs the recurrence to `n_max + 1`, exactly up to `exact_until` and in the
/// log domain afterwards.
pub fn nu_estimate_with(stream: &CoefficientStream, opts: NuOptions) -> Result<NuTrace> {
    if opts.n_max < 3 {
        return Err(CfError::InvalidValue(format!("N = {} must be at least 3", opts.n_max)));
    }
    let exact_until = opts.exact_until.min(opts.n_max + 1);
    let seed_at = exact_until.saturating_sub(opts.overlap).max(1);

    // log B_n for n = 0..=n_max+1, log Π_n likewise
    let mut log_b = Vec::with_capacity(opts.n_max + 2);
    let mut log_pi = Vec::with_capacity(opts.n_max + 2);
    log_b.push(0.0);
    log_pi.push(0.0);

    let mut state = ConvergentState::initial(stream.b0().clone());
    let mut tracker: Option<LogTracker> = None;
    let mut overlap_err: Option<f64> = None;
    let mut sum_ln_a = 0.0;

    for n in 1..=opts.n_max + 1 {
        let (a, b) = stream.term(n)?;
        let (ln_a, ln_b) = (ln_biguint(&a), ln_biguint(&b));
        sum_ln_a += ln_a;
        if n <= exact_until {
            state = state.advance(&a, &b)?;
            let exact = ln_biguint(&state.b_cur);
            if let Some(t) = tracker.as_mut() {
                t.step(ln_a, ln_b);
                if exact > 0.0 {
                    let err = ((t.log_b - exact) / exact).abs();
                    overlap_err = Some(overlap_err.map_or(err, |e: f64| e.max(err)));
                }
            } else if n == seed_at {
                tracker = Some(LogTracker {
                    log_b: exact,
                    log_ratio: ln_biguint(&state.b_prev) - exact,
                });
            }
            log_b.push(exact);
            log_pi.push(ln_biguint(&state.pi));
        } else {
            let t = tracker.get_or_insert_with(|| LogTracker {
                log_b: ln_biguint(&state.b_cur),
                log_ratio: ln_biguint(&state.b_prev) - ln_biguint(&state.b_cur),
            });
            t.step(ln_a, ln_b);
            log_b.push(t.log_b);
            log_pi.push(sum_ln_a);
        }
    }

    let mut samples = Vec::with_capacity(opts.n_max);
    for n in 2..=opts.n_max {
        if log_b[n] <= 0.0 {
            continue;
        }
        samples.push(NuSample {
            n,
            nu: log_pi[n] / log_b[n],
            growth: log_b[n + 1] / log_b[n],
        });
    }
    let window_start = ((opts.n_max as f64) * (1.0 - opts.window.clamp(0.0, 1.0))).floor() as usize;
    let tail: Vec<&NuSample> = samples.iter().filter(|s| s.n >= window_start).collect();
    let tail: Vec<&NuSample> = if tail.is_empty() {
        samples.iter().collect()
    } else {
        tail
    };
    let empirical_nu = tail.iter().map(|s| s.nu).fold(f64::NEG_INFINITY, f64::max);
    let growth_max = tail.iter().map(|s| s.growth).fold(f64::NEG_INFINITY, f64::max);

    Ok(NuTrace {
        log_b_final: log_b[opts.n_max],
        log_pi_final: log_pi[opts.n_max],
        samples,
        empirical_nu,
        growth_max,
        window_start,
        exact_until,
        overlap_max_rel_err: overlap_err,
        mode: Mode::Empirical,
    })
}
