//! Convergent recurrences and guaranteed enclosures.
//!
//! For `τ = b0 + K a_n/b_n` the convergents `A_n/B_n` obey
//!
//! ```text
//! A_{n+1} = b_{n+1} A_n + a_{n+1} A_{n-1},   A_{-1} = 1, A_0 = b0
//! B_{n+1} = b_{n+1} B_n + a_{n+1} B_{n-1},   B_{-1} = 0, B_0 = 1
//! ```
//!
//! and `A_{n-1} B_n - A_n B_{n-1} = (-1)^n Π_n` with `Π_n = a_1 ⋯ a_n`.
//! With positive coefficients consecutive convergents bracket the limit, so
//! every [`Enclosure`] is a certified interval.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CfError, Result};
use crate::numeric::serde_big;

/// Default cap on the bit length of `B_n`.
pub const DEFAULT_BITLEN_CAP: u64 = 1 << 24;

pub type TermFn = dyn Fn(usize) -> Result<(BigUint, BigUint)> + Send + Sync;

/// Lazily generated partial coefficients `(a_n, b_n)`, `n >= 1`, plus `b0`.
///
/// The generator must be pure. Zero coefficients are rejected when a term is
/// requested.
#[derive(Clone)]
pub struct CoefficientStream {
    b0: BigUint,
    generator: Arc<TermFn>,
    label: Option<String>,
    bitlen_cap: u64,
}

impl fmt::Debug for CoefficientStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientStream")
            .field("b0", &self.b0)
            .field("label", &self.label)
            .field("bitlen_cap", &self.bitlen_cap)
            .finish_non_exhaustive()
    }
}

impl CoefficientStream {
    pub fn new<F>(b0: BigUint, generator: F) -> Self
    where
        F: Fn(usize) -> Result<(BigUint, BigUint)> + Send + Sync + 'static,
    {
        CoefficientStream {
            b0,
            generator: Arc::new(generator),
            label: None,
            bitlen_cap: DEFAULT_BITLEN_CAP,
        }
    }

    /// Infallible generator; `b0 = 0`.
    pub fn from_fn<F, A, B>(generator: F) -> Self
    where
        F: Fn(usize) -> (A, B) + Send + Sync + 'static,
        A: Into<BigUint>,
        B: Into<BigUint>,
    {
        Self::new(BigUint::zero(), move |n| {
            let (a, b) = generator(n);
            Ok((a.into(), b.into()))
        })
    }

    /// Coefficients repeating with the given periods (`a` and `b` may differ).
    pub fn periodic(b0: BigUint, a: Vec<BigUint>, b: Vec<BigUint>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(CfError::InvalidValue("periodic stream needs at least one term".into()));
        }
        Ok(Self::new(b0, move |n| {
            Ok((a[(n - 1) % a.len()].clone(), b[(n - 1) % b.len()].clone()))
        }))
    }

    /// A stream with finitely many terms; requesting more is an error.
    pub fn finite(b0: BigUint, terms: Vec<(BigUint, BigUint)>) -> Self {
        Self::new(b0, move |n| {
            terms.get(n - 1).cloned().ok_or(CfError::StreamExhausted { index: n })
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_bitlen_cap(mut self, cap: u64) -> Self {
        self.bitlen_cap = cap;
        self
    }

    pub fn with_b0(mut self, b0: BigUint) -> Self {
        self.b0 = b0;
        self
    }

    pub fn b0(&self) -> &BigUint {
        &self.b0
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn bitlen_cap(&self) -> u64 {
        self.bitlen_cap
    }

    /// The pair `(a_n, b_n)`, validated positive.
    pub fn term(&self, n: usize) -> Result<(BigUint, BigUint)> {
        if n == 0 {
            return Err(CfError::InvalidValue("terms are indexed from 1".into()));
        }
        let (a, b) = (self.generator)(n)?;
        if a.is_zero() || b.is_zero() {
            return Err(CfError::InvalidCoefficient {
                index: n,
                detail: format!("a_{n}={a}, b_{n}={b}; both must be positive"),
            });
        }
        Ok((a, b))
    }

    /// The tail `K_{k > offset} a_k/b_k` with `b0 = 0`.
    pub fn tail(&self, offset: usize) -> CoefficientStream {
        let inner = self.generator.clone();
        CoefficientStream {
            b0: BigUint::zero(),
            generator: Arc::new(move |n| inner(n + offset)),
            label: self.label.as_ref().map(|l| format!("{l} (tail after {offset})")),
            bitlen_cap: self.bitlen_cap,
        }
    }

    pub fn convergents(&self) -> Convergents<'_> {
        Convergents {
            stream: self,
            state: Some(ConvergentState::initial(self.b0.clone())),
            pending: None,
        }
    }
}

/// Recurrence state at index `n`: `A_{n-1}, A_n, B_{n-1}, B_n, Π_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentState {
    pub n: usize,
    #[serde(with = "serde_big::biguint")]
    pub a_prev: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub a_cur: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub b_prev: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub b_cur: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub pi: BigUint,
}

impl ConvergentState {
    /// State at `n = 0`: `A_0 = b0`, `B_0 = 1`, with `A_{-1} = 1`, `B_{-1} = 0`.
    pub fn initial(b0: BigUint) -> Self {
        ConvergentState {
            n: 0,
            a_prev: BigUint::one(),
            a_cur: b0,
            b_prev: BigUint::zero(),
            b_cur: BigUint::one(),
            pi: BigUint::one(),
        }
    }

    /// One recurrence step with the next partial coefficients.
    pub fn advance(&self, a: &BigUint, b: &BigUint) -> Result<ConvergentState> {
        if a.is_zero() || b.is_zero() {
            return Err(CfError::InvalidCoefficient {
                index: self.n + 1,
                detail: format!("a={a}, b={b}; both must be positive"),
            });
        }
        Ok(ConvergentState {
            n: self.n + 1,
            a_prev: self.a_cur.clone(),
            a_cur: b * &self.a_cur + a * &self.a_prev,
            b_prev: self.b_cur.clone(),
            b_cur: b * &self.b_cur + a * &self.b_prev,
            pi: &self.pi * a,
        })
    }

    /// `A_{n-1} B_n - A_n B_{n-1}`.
    pub fn determinant(&self) -> BigInt {
        BigInt::from(&self.a_prev * &self.b_cur) - BigInt::from(&self.a_cur * &self.b_prev)
    }

    /// `(-1)^n Π_n`, the value [`determinant`](Self::determinant) must take.
    pub fn expected_determinant(&self) -> BigInt {
        let pi = BigInt::from(self.pi.clone());
        if self.n.is_multiple_of(2) {
            pi
        } else {
            -pi
        }
    }

    pub fn convergent(&self) -> Convergent {
        Convergent {
            num: self.a_cur.clone(),
            den: self.b_cur.clone(),
        }
    }
}

/// Free-function form of [`ConvergentState::advance`].
pub fn advance(state: &ConvergentState, a: &BigUint, b: &BigUint) -> Result<ConvergentState> {
    state.advance(a, b)
}

/// Free-function form of [`ConvergentState::determinant`].
pub fn determinant(state: &ConvergentState) -> BigInt {
    state.determinant()
}

/// Iterator over recurrence states `n = 0, 1, 2, ...`.
///
/// A failing term (invalid coefficient, exhausted stream, bit-length cap) is
/// yielded once as an error after the last good state.
pub struct Convergents<'a> {
    stream: &'a CoefficientStream,
    state: Option<ConvergentState>,
    pending: Option<CfError>,
}

impl Iterator for Convergents<'_> {
    type Item = Result<ConvergentState>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(err) = self.pending.take() {
            return Some(Err(err));
        }
        let current = self.state.take()?;
        let next = self
            .stream
            .term(current.n + 1)
            .and_then(|(a, b)| current.advance(&a, &b))
            .and_then(|s| check_cap(self.stream, s));
        match next {
            Ok(s) => self.state = Some(s),
            Err(e) => self.pending = Some(e),
        }
        Some(Ok(current))
    }
}

fn check_cap(stream: &CoefficientStream, s: ConvergentState) -> Result<ConvergentState> {
    let bits = s.b_cur.bits();
    if bits > stream.bitlen_cap {
        Err(CfError::ResourceExhausted {
            bits,
            cap: stream.bitlen_cap,
        })
    } else {
        Ok(s)
    }
}

/// Unreduced convergent `A_n / B_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    #[serde(with = "serde_big::biguint")]
    pub num: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub den: BigUint,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone().into(), self.den.clone().into())
    }
}

fn state_at(stream: &CoefficientStream, n: usize) -> Result<ConvergentState> {
    let mut state = ConvergentState::initial(stream.b0.clone());
    while state.n < n {
        let (a, b) = stream.term(state.n + 1)?;
        state = check_cap(stream, state.advance(&a, &b)?)?;
    }
    Ok(state)
}

/// Recurrence state at index `n`.
pub fn state(stream: &CoefficientStream, n: usize) -> Result<ConvergentState> {
    state_at(stream, n)
}

/// The unreduced convergent `A_n / B_n`.
pub fn convergent(stream: &CoefficientStream, n: usize) -> Result<Convergent> {
    Ok(state_at(stream, n)?.convergent())
}

/// Rational interval spanned by two consecutive convergents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    #[serde(with = "serde_big::rational")]
    pub lo: BigRational,
    #[serde(with = "serde_big::rational")]
    pub hi: BigRational,
    /// Index `n` of the lower-indexed convergent `A_n/B_n`.
    pub n_used: usize,
    #[serde(with = "serde_big::rational")]
    pub width: BigRational,
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] (n={})", self.lo, self.hi, self.n_used)
    }
}

impl Enclosure {
    /// Interval between the convergents of `s` and its successor `t`.
    pub fn between(s: &ConvergentState, t: &ConvergentState) -> Enclosure {
        let x = s.convergent().to_rational();
        let y = t.convergent().to_rational();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let width = &hi - &lo;
        Enclosure {
            lo,
            hi,
            n_used: s.n,
            width,
        }
    }

    pub fn from_bounds(lo: BigRational, hi: BigRational, n_used: usize) -> Enclosure {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let width = &hi - &lo;
        Enclosure { lo, hi, n_used, width }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_enclosure(&self, inner: &Enclosure) -> bool {
        self.lo <= inner.lo && inner.hi <= self.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }
}

/// Enclosure spanned by `A_n/B_n` and `A_{n+1}/B_{n+1}`, `n >= 1`.
pub fn enclosure(stream: &CoefficientStream, n: usize) -> Result<Enclosure> {
    if n == 0 {
        return Err(CfError::InvalidValue("enclosure index must be at least 1".into()));
    }
    let s = state_at(stream, n)?;
    let (a, b) = stream.term(n + 1)?;
    let t = s.advance(&a, &b)?;
    Ok(Enclosure::between(&s, &t))
}

/// Advances until two consecutive convergents are within `target_width`.
///
/// Returns the smallest such enclosure. The width test uses
/// `Π_{n+1} / (B_n B_{n+1})` so no rational subtraction happens per step.
/// Fails with [`CfError::NonConvergence`] once `max_terms` coefficients have
/// been consumed.
pub fn evaluate(stream: &CoefficientStream, target_width: &BigRational, max_terms: usize) -> Result<Enclosure> {
    if !target_width.is_positive() {
        return Err(CfError::InvalidValue("target width must be positive".into()));
    }
    if max_terms == 0 {
        return Err(CfError::InvalidValue("max_terms must be at least 1".into()));
    }
    let num = target_width.numer().magnitude();
    let den = target_width.denom().magnitude();
    let mut before = ConvergentState::initial(stream.b0.clone());
    let mut prev = state_at(stream, 1)?;
    loop {
        if prev.n + 1 > max_terms {
            // the last interval that was fully formed
            return Err(CfError::NonConvergence {
                max_terms,
                last: Box::new(Enclosure::between(&before, &prev)),
            });
        }
        let (a, b) = stream.term(prev.n + 1)?;
        let cur = check_cap(stream, prev.advance(&a, &b)?)?;
        if &cur.pi * den <= num * &prev.b_cur * &cur.b_cur {
            return Ok(Enclosure::between(&prev, &cur));
        }
        before = std::mem::replace(&mut prev, cur);
    }
}

/// Outcome of checking `b_{n+2} Π_{n+1} / B_{n+2} < R_n < Π_{n+1} / B_{n+1}`
/// with `R_n = |B_n τ - A_n|` bounded through a reference enclosure of `τ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualSandwich {
    pub n: usize,
    #[serde(with = "serde_big::rational")]
    pub lower_bound: BigRational,
    #[serde(with = "serde_big::rational")]
    pub upper_bound: BigRational,
    #[serde(with = "serde_big::rational")]
    pub residual_min: BigRational,
    #[serde(with = "serde_big::rational")]
    pub residual_max: BigRational,
    pub lower_certified: bool,
    pub upper_certified: bool,
}

impl ResidualSandwich {
    pub fn holds(&self) -> bool {
        self.lower_certified && self.upper_certified
    }
}

pub fn residual_sandwich(stream: &CoefficientStream, n: usize, reference: &Enclosure) -> Result<ResidualSandwich> {
    let s = state_at(stream, n)?;
    let (a1, b1) = stream.term(n + 1)?;
    let s1 = s.advance(&a1, &b1)?;
    let (a2, b2) = stream.term(n + 2)?;
    let s2 = s1.advance(&a2, &b2)?;

    let big = |x: &BigUint| BigRational::from_integer(BigInt::from(x.clone()));
    let lower_bound = BigRational::new(BigInt::from(&b2 * &s1.pi), BigInt::from(s2.b_cur.clone()));
    let upper_bound = BigRational::new(BigInt::from(s1.pi.clone()), BigInt::from(s1.b_cur.clone()));

    let bn = big(&s.b_cur);
    let an = big(&s.a_cur);
    let r_lo = (&bn * &reference.lo - &an).abs();
    let r_hi = (&bn * &reference.hi - &an).abs();
    let inside = reference.contains(&s.convergent().to_rational());
    let (residual_min, residual_max) = if inside {
        (BigRational::zero(), r_lo.max(r_hi))
    } else if r_lo <= r_hi {
        (r_lo, r_hi)
    } else {
        (r_hi, r_lo)
    };
    Ok(ResidualSandwich {
        n,
        lower_certified: lower_bound < residual_min,
        upper_certified: residual_max < upper_bound,
        lower_bound,
        upper_bound,
        residual_min,
        residual_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn golden_tail() -> CoefficientStream {
        CoefficientStream::from_fn(|_| (1u32, 1u32))
    }

    #[test]
    fn first_step_from_initial_values() {
        let s0 = ConvergentState::initial(u(0));
        let s1 = advance(&s0, &u(1), &u(1)).unwrap();
        assert_eq!((s1.a_cur.clone(), s1.b_cur.clone()), (u(1), u(1)));
        // A_1 = b0 b1 + a1 with b0 = 3, a1 = 2, b1 = 5
        let s1 = ConvergentState::initial(u(3)).advance(&u(2), &u(5)).unwrap();
        assert_eq!(s1.a_cur, u(17));
        assert_eq!(s1.b_cur, u(5));
    }

    #[test]
    fn two_hand_steps_for_constant_two_over_one() {
        let stream = CoefficientStream::from_fn(|_| (2u32, 1u32));
        let c1 = convergent(&stream, 1).unwrap();
        assert_eq!((c1.num, c1.den), (u(2), u(1)));
        let c2 = convergent(&stream, 2).unwrap();
        assert_eq!((c2.num.clone(), c2.den.clone()), (u(2), u(3)));
        assert_eq!(c2.to_rational(), q(2, 3));
    }

    #[test]
    fn unit_coefficients_give_fibonacci_growth() {
        let states: Vec<_> = golden_tail().convergents().take(12).map(|s| s.unwrap()).collect();
        for w in states.windows(3) {
            assert_eq!(w[2].a_cur, &w[1].a_cur + &w[0].a_cur);
            assert_eq!(w[2].b_cur, &w[1].b_cur + &w[0].b_cur);
        }
    }

    #[test]
    fn advance_rejects_zero() {
        let s0 = ConvergentState::initial(u(0));
        assert!(matches!(
            s0.advance(&u(0), &u(1)),
            Err(CfError::InvalidCoefficient { .. })
        ));
        assert!(matches!(
            s0.advance(&u(1), &u(0)),
            Err(CfError::InvalidCoefficient { .. })
        ));
        let bad = CoefficientStream::from_fn(|n| (n as u32 % 3, 1u32));
        assert!(matches!(bad.term(3), Err(CfError::InvalidCoefficient { index: 3, .. })));
    }

    #[test]
    fn advance_leaves_input_untouched() {
        let s0 = ConvergentState::initial(u(4));
        let copy = s0.clone();
        let _ = s0.advance(&u(3), &u(2)).unwrap();
        assert_eq!(s0, copy);
    }

    #[test]
    fn determinant_small_cases() {
        let stream = golden_tail();
        let s1 = state(&stream, 1).unwrap();
        assert_eq!(determinant(&s1), BigInt::from(-1));
        let twos = CoefficientStream::from_fn(|_| (2u32, 1u32));
        let s3 = state(&twos, 3).unwrap();
        assert_eq!(s3.pi, u(8));
        assert_eq!(determinant(&s3), BigInt::from(-8));
        assert_eq!(s3.determinant(), s3.expected_determinant());
    }

    #[test]
    fn golden_enclosure_at_two() {
        let e = enclosure(&golden_tail(), 2).unwrap();
        assert_eq!(e.lo, q(1, 2));
        assert_eq!(e.hi, q(2, 3));
        assert_eq!(e.width, q(1, 6));
        // (sqrt5 - 1)/2 = 0.618...; 0.618 in [1/2, 2/3]
        assert!(e.contains(&q(618, 1000)));
        assert!(enclosure(&golden_tail(), 0).is_err());
    }

    #[test]
    fn enclosures_nest_and_convergents_alternate() {
        let stream = CoefficientStream::from_fn(|n| ((n % 5 + 1) as u32, (n % 3 + 1) as u32));
        let states: Vec<_> = stream.convergents().take(40).map(|s| s.unwrap()).collect();
        let encl: Vec<_> = states
            .windows(2)
            .skip(1)
            .map(|w| Enclosure::between(&w[0], &w[1]))
            .collect();
        for w in encl.windows(2) {
            assert!(w[0].contains_enclosure(&w[1]), "{} vs {}", w[0], w[1]);
        }
        for w in states.windows(3).skip(1) {
            assert!(w[1].b_cur > w[0].b_cur);
            let (x, z) = (w[0].convergent().to_rational(), w[2].convergent().to_rational());
            if w[0].n % 2 == 0 {
                assert!(z > x);
            } else {
                assert!(z < x);
            }
        }
    }

    #[test]
    fn e_tail_width_at_twenty() {
        let stream = CoefficientStream::from_fn(|n| (1u32, (4 * n + 2) as u32));
        let e = enclosure(&stream, 20).unwrap();
        assert!(e.width < q(1, 1) / BigRational::from_integer(num_traits::pow(BigInt::from(10), 20)));
    }

    #[test]
    fn evaluate_constant_two_over_one() {
        let stream = CoefficientStream::from_fn(|_| (2u32, 1u32));
        let target = crate::numeric::parse_rational("1e-30").unwrap();
        let e = evaluate(&stream, &target, 10_000).unwrap();
        assert!(e.width <= target);
        assert!(e.contains(&q(1, 1)));
        // smallest n: the previous enclosure must be too wide
        let before = enclosure(&stream, e.n_used - 1).unwrap();
        assert!(before.width > target);
    }

    #[test]
    fn evaluate_reports_non_convergence() {
        // a_n = 4^n, b_n = 1: Π_{n+1}/(B_n B_{n+1}) does not shrink
        let stream = CoefficientStream::from_fn(|n| (BigUint::from(4u32).pow(n as u32), 1u32));
        let target = q(1, 1_000_000);
        match evaluate(&stream, &target, 60) {
            Err(CfError::NonConvergence { max_terms, last }) => {
                assert_eq!(max_terms, 60);
                assert!(last.width > target);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(evaluate(&stream, &q(0, 1), 10).is_err());
    }

    #[test]
    fn bitlen_cap_is_enforced() {
        let stream = CoefficientStream::from_fn(|_| (1u32, 1_000_000u32)).with_bitlen_cap(64);
        let err = stream.convergents().map(|s| s.map(|_| ())).find(|r| r.is_err());
        assert!(matches!(err, Some(Err(CfError::ResourceExhausted { cap: 64, .. }))));
        assert!(matches!(
            convergent(&stream, 10),
            Err(CfError::ResourceExhausted { .. })
        ));
    }

    #[test]
    fn finite_streams_run_out() {
        let s = CoefficientStream::finite(u(0), vec![(u(1), u(2)), (u(1), u(2))]);
        assert!(convergent(&s, 2).is_ok());
        assert!(matches!(convergent(&s, 3), Err(CfError::StreamExhausted { index: 3 })));
    }

    #[test]
    fn residual_sandwich_on_golden_tail() {
        let stream = golden_tail();
        let reference = enclosure(&stream, 80).unwrap();
        for n in 1..30 {
            let check = residual_sandwich(&stream, n, &reference).unwrap();
            assert!(check.holds(), "n={n}: {check:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = state(&golden_tail(), 30).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"b_cur\":\"1346269\""));
        let back: ConvergentState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let e = enclosure(&golden_tail(), 10).unwrap();
        let back: Enclosure = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
