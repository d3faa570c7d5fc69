//! Equivalence transformations, integerization of rational coefficients,
//! linear fractional maps and transport of irrationality measures.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cfcore::{CoefficientStream, Enclosure};
use crate::error::{CfError, Result};
use crate::numeric::{serde_big, to_biguint};

pub type RationalTermFn = dyn Fn(usize) -> Result<(BigRational, BigRational)> + Send + Sync;

/// Partial coefficients that are arbitrary rationals.
#[derive(Clone)]
pub struct RationalStream {
    b0: BigRational,
    generator: Arc<RationalTermFn>,
    label: Option<String>,
}

impl fmt::Debug for RationalStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RationalStream")
            .field("b0", &self.b0)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl RationalStream {
    pub fn new<F>(b0: BigRational, generator: F) -> Self
    where
        F: Fn(usize) -> Result<(BigRational, BigRational)> + Send + Sync + 'static,
    {
        RationalStream {
            b0,
            generator: Arc::new(generator),
            label: None,
        }
    }

    pub fn from_integer(stream: &CoefficientStream) -> Self {
        let inner = stream.clone();
        let b0 = BigRational::from_integer(BigInt::from(stream.b0().clone()));
        RationalStream::new(b0, move |n| {
            let (a, b) = inner.term(n)?;
            Ok((BigRational::from_integer(a.into()), BigRational::from_integer(b.into())))
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn b0(&self) -> &BigRational {
        &self.b0
    }

    pub fn term(&self, n: usize) -> Result<(BigRational, BigRational)> {
        if n == 0 {
            return Err(CfError::InvalidValue("terms are indexed from 1".into()));
        }
        (self.generator)(n)
    }

    /// Term `n`, required to be a pair of positive rationals.
    pub fn positive_term(&self, n: usize) -> Result<(BigRational, BigRational)> {
        let (a, b) = self.term(n)?;
        if !a.is_positive() || !b.is_positive() {
            return Err(CfError::InvalidCoefficient {
                index: n,
                detail: format!("a_{n}={a}, b_{n}={b}; both must be positive"),
            });
        }
        Ok((a, b))
    }

    /// Convergents `0..=n` as exact rationals.
    pub fn convergents(&self, n: usize) -> Result<Vec<BigRational>> {
        let mut out = Vec::with_capacity(n + 1);
        let (mut a_prev, mut a_cur) = (BigRational::one(), self.b0.clone());
        let (mut b_prev, mut b_cur) = (BigRational::zero(), BigRational::one());
        out.push(self.b0.clone());
        for k in 1..=n {
            let (a, b) = self.term(k)?;
            let a_next = &b * &a_cur + &a * &a_prev;
            let b_next = &b * &b_cur + &a * &b_prev;
            a_prev = std::mem::replace(&mut a_cur, a_next);
            b_prev = std::mem::replace(&mut b_cur, b_next);
            if b_cur.is_zero() {
                return Err(CfError::Domain(format!("B_{k} vanishes")));
            }
            out.push(&a_cur / &b_cur);
        }
        Ok(out)
    }

    pub fn convergent(&self, n: usize) -> Result<BigRational> {
        Ok(self.convergents(n)?.pop().unwrap_or_else(|| self.b0.clone()))
    }
}

/// Scaling factors `e_n` (`n >= 1`) of an equivalence transformation.
#[derive(Clone)]
pub struct EquivalenceScaling {
    factor: Arc<dyn Fn(usize) -> BigRational + Send + Sync>,
}

impl fmt::Debug for EquivalenceScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EquivalenceScaling(..)")
    }
}

impl EquivalenceScaling {
    pub fn new<F>(factor: F) -> Self
    where
        F: Fn(usize) -> BigRational + Send + Sync + 'static,
    {
        EquivalenceScaling {
            factor: Arc::new(factor),
        }
    }

    pub fn identity() -> Self {
        Self::new(|_| BigRational::one())
    }

    /// `e_n`, with `e_0 = 1`. Zero factors are rejected.
    pub fn factor(&self, n: usize) -> Result<BigRational> {
        if n == 0 {
            return Ok(BigRational::one());
        }
        let e = (self.factor)(n);
        if e.is_zero() {
            return Err(CfError::InvalidScaling { index: n });
        }
        Ok(e)
    }

    /// Pointwise product `e_n e'_n`.
    pub fn product(&self, other: &EquivalenceScaling) -> EquivalenceScaling {
        let (f, g) = (self.factor.clone(), other.factor.clone());
        Self::new(move |n| f(n) * g(n))
    }
}

/// `a'_1 = e_1 a_1`, `a'_n = e_{n-1} e_n a_n`, `b'_n = e_n b_n`; `b0` unchanged.
///
/// Every convergent keeps its value, since `A'_n = (e_1⋯e_n) A_n` and likewise
/// for `B'_n`.
pub fn equivalence(stream: &RationalStream, scaling: &EquivalenceScaling) -> RationalStream {
    let inner = stream.clone();
    let scaling = scaling.clone();
    let mut out = RationalStream::new(stream.b0.clone(), move |n| {
        let (a, b) = inner.term(n)?;
        let e_prev = scaling.factor(n - 1)?;
        let e = scaling.factor(n)?;
        Ok((&e_prev * &e * a, e * b))
    });
    out.label = stream.label.clone();
    out
}

/// Converts positive rational coefficients into positive integers.
///
/// `e_n` is the least positive integer making both `e_{n-1} e_n a_n` and
/// `e_n b_n` integral, chosen sequentially from `e_0 = 1`. The factors are
/// memoized; the returned scaling reports the same values.
pub fn integerize(stream: &RationalStream) -> Result<(CoefficientStream, EquivalenceScaling)> {
    if !stream.b0.is_integer() || stream.b0.is_negative() {
        return Err(CfError::InvalidValue(format!(
            "b0 = {} must be a non-negative integer",
            stream.b0
        )));
    }
    let memo = Arc::new(Mutex::new(vec![BigInt::one()]));
    let inner = stream.clone();

    let factors = {
        let memo = memo.clone();
        let inner = inner.clone();
        move |n: usize| -> Result<(BigInt, BigInt)> {
            let mut es = memo.lock().unwrap_or_else(|p| p.into_inner());
            while es.len() <= n {
                let k = es.len();
                let (a, b) = inner.positive_term(k)?;
                let partial = BigRational::from_integer(es[k - 1].clone()) * &a;
                let e = partial.denom().lcm(b.denom());
                es.push(e);
            }
            Ok((es[n - 1].clone(), es[n].clone()))
        }
    };
    let factors = Arc::new(factors);

    let gen_factors = factors.clone();
    let integer = CoefficientStream::new(to_biguint(&stream.b0.to_integer()).unwrap_or_default(), move |n| {
        let (a, b) = inner.positive_term(n)?;
        let (e_prev, e) = gen_factors(n)?;
        let a = BigRational::from_integer(e_prev * &e) * a;
        let b = BigRational::from_integer(e) * b;
        debug_assert!(a.is_integer() && b.is_integer());
        let a = to_biguint(&a.to_integer()).unwrap_or_default();
        let b = to_biguint(&b.to_integer()).unwrap_or_default();
        Ok((a, b))
    });
    let integer = match stream.label() {
        Some(l) => integer.with_label(l),
        None => integer,
    };

    let scaling = EquivalenceScaling::new(move |n| {
        factors(n)
            .map(|(_, e)| BigRational::from_integer(e))
            // factor() rejects zero, which surfaces a failed generation
            .unwrap_or_else(|_| BigRational::zero())
    });
    Ok((integer, scaling))
}

/// Linear fractional map `x ↦ (a x + b) / (c x + d)` with integer entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mobius {
    #[serde(with = "serde_big::bigint")]
    pub a: BigInt,
    #[serde(with = "serde_big::bigint")]
    pub b: BigInt,
    #[serde(with = "serde_big::bigint")]
    pub c: BigInt,
    #[serde(with = "serde_big::bigint")]
    pub d: BigInt,
}

impl Mobius {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        let m = Mobius {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        if m.determinant().is_zero() {
            return Err(CfError::InvalidMap("singular map (ad - bc = 0)".into()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Mobius {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    /// The map `x ↦ p / (q + x)` of one continued fraction level.
    pub fn term(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Mobius {
            a: BigInt::zero(),
            b: p.into(),
            c: BigInt::one(),
            d: q.into(),
        }
    }

    /// Composition of the level maps of a finite list of `(a_k, b_k)`.
    pub fn from_terms<I, P, Q>(terms: I) -> Self
    where
        I: IntoIterator<Item = (P, Q)>,
        P: Into<BigInt>,
        Q: Into<BigInt>,
    {
        terms
            .into_iter()
            .fold(Mobius::identity(), |acc, (p, q)| acc.compose(&Mobius::term(p, q)))
    }

    pub fn determinant(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: &self.a * &inner.a + &self.b * &inner.c,
            b: &self.a * &inner.b + &self.b * &inner.d,
            c: &self.c * &inner.a + &self.d * &inner.c,
            d: &self.c * &inner.b + &self.d * &inner.d,
        }
    }

    pub fn apply(&self, x: &BigRational) -> Result<BigRational> {
        let num = BigRational::from_integer(self.a.clone()) * x + BigRational::from_integer(self.b.clone());
        let den = BigRational::from_integer(self.c.clone()) * x + BigRational::from_integer(self.d.clone());
        if den.is_zero() {
            return Err(CfError::Domain(format!("pole of the map at {x}")));
        }
        Ok(num / den)
    }

    /// Same map up to a nonzero common factor.
    pub fn projectively_equal(&self, other: &Mobius) -> bool {
        let m = [&self.a, &self.b, &self.c, &self.d];
        let n = [&other.a, &other.b, &other.c, &other.d];
        (0..4).all(|i| (0..4).all(|j| m[i] * n[j] == m[j] * n[i]))
    }

    /// Image of an enclosure; fails if the pole lies inside it.
    pub fn image(&self, e: &Enclosure) -> Result<Enclosure> {
        let c = BigRational::from_integer(self.c.clone());
        let d = BigRational::from_integer(self.d.clone());
        let at_lo = &c * &e.lo + &d;
        let at_hi = &c * &e.hi + &d;
        if at_lo.is_zero() || at_hi.is_zero() || at_lo.is_positive() != at_hi.is_positive() {
            return Err(CfError::Domain("map has a pole inside the enclosure".into()));
        }
        Ok(Enclosure::from_bounds(self.apply(&e.lo)?, self.apply(&e.hi)?, e.n_used))
    }
}

/// Constants `(ω, c, H)` of a measure `|Nτ - M| >= c / N^ω` for `N >= H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrationalityMeasure {
    pub omega: f64,
    pub c: f64,
    pub h: f64,
}

impl IrrationalityMeasure {
    pub fn new(omega: f64, c: f64, h: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("c", c), ("H", h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CfError::InvalidValue(format!("{name} = {v} must be positive")));
            }
        }
        Ok(IrrationalityMeasure { omega, c, h })
    }
}

/// Measure for `(q/t) τ + r/t`: `c₂ = c₁/(|t||q|^ω)`, `H₂ = H₁/|q|`.
pub fn transport_linear(m: &IrrationalityMeasure, q: i64, t: i64, _r: i64) -> Result<IrrationalityMeasure> {
    if q == 0 || t == 0 {
        return Err(CfError::InvalidMap(format!("q = {q}, t = {t}; both must be nonzero")));
    }
    let (q, t) = ((q as f64).abs(), (t as f64).abs());
    Ok(IrrationalityMeasure {
        omega: m.omega,
        c: m.c / (t * q.powf(m.omega)),
        h: m.h / q,
    })
}

/// Measure for `1/τ`: `c₃ = c₁/(|τ|(1/|τ| + 1)^ω)`, `H₃ = |τ|(H₁ + 1)`.
pub fn transport_reciprocal(m: &IrrationalityMeasure, tau_abs: f64) -> Result<IrrationalityMeasure> {
    if !(tau_abs.is_finite() && tau_abs > 0.0) {
        return Err(CfError::InvalidValue(format!("|tau| = {tau_abs} must be positive")));
    }
    Ok(IrrationalityMeasure {
        omega: m.omega,
        c: m.c / (tau_abs * (1.0 / tau_abs + 1.0).powf(m.omega)),
        h: tau_abs * (m.h + 1.0),
    })
}

/// Integer form of a stream under an explicit scaling, failing if some
/// coefficient is not a positive integer.
pub fn to_integer_stream(stream: &RationalStream, scaling: &EquivalenceScaling) -> Result<CoefficientStream> {
    let b0 = stream.b0();
    if !b0.is_integer() || b0.is_negative() {
        return Err(CfError::InvalidValue(format!(
            "b0 = {b0} must be a non-negative integer"
        )));
    }
    let b0 = to_biguint(&b0.to_integer()).unwrap_or_default();
    let scaled = equivalence(stream, scaling);
    Ok(CoefficientStream::new(b0, move |n| {
        let (a, b) = scaled.positive_term(n)?;
        if !a.is_integer() || !b.is_integer() {
            return Err(CfError::InvalidCoefficient {
                index: n,
                detail: format!("scaled coefficients {a}, {b} are not integers"),
            });
        }
        Ok((
            to_biguint(&a.to_integer()).unwrap_or_default(),
            to_biguint(&b.to_integer()).unwrap_or_default(),
        ))
    }))
}
