//! Generalized continued fractions with partial numerators in `{1, 2}` and
//! unit denominators that realize a prescribed irrationality exponent.
//!
//! The value is built as a simple continued fraction `[0; c_1, c_2, ...]`
//! with `c_n = 1` off `n ≡ 2 (mod 4)` and `c_n = (7·4^f − 4)/3` on it, where
//! `f` is the least exponent with `c_n ≥ B_(n-1)^(s-2)`. Each group of four
//! simple quotients is re-expressed as the word `2^(2f) 1111 2^(2f)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cfcore::{CoefficientStream, Enclosure};
use crate::error::{CfError, Result};
use crate::interval::{compare_power, Precision};
use crate::numeric::{ln_biguint, parse_rational, serde_big};
use crate::transforms::Mobius;

/// Target exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exponent {
    One,
    /// Rational `s ≥ 2`.
    Finite(BigRational),
    Infinity,
}

impl Exponent {
    pub fn finite(s: BigRational) -> Result<Self> {
        if s.is_one() {
            return Ok(Exponent::One);
        }
        if s < BigRational::from_integer(2.into()) {
            return Err(CfError::Domain(format!("exponent {s} is not in {{1}} ∪ [2, ∞]")));
        }
        Ok(Exponent::Finite(s))
    }

    pub fn integer(s: u32) -> Result<Self> {
        Self::finite(BigRational::from_integer(s.into()))
    }

    /// Power of `B_(n-1)` that `c_n` must reach: `s − 2`, or `n − 2` for infinity.
    pub fn shift_at(&self, n: usize) -> Result<BigRational> {
        match self {
            Exponent::One => Err(CfError::Domain("exponent 1 has no simple expansion".into())),
            Exponent::Finite(s) => Ok(s - BigRational::from_integer(2.into())),
            Exponent::Infinity => Ok(BigRational::from_integer(BigInt::from(n) - 2)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::One => f.write_str("1"),
            Exponent::Finite(s) => write!(f, "{s}"),
            Exponent::Infinity => f.write_str("INFINITY"),
        }
    }
}

impl FromStr for Exponent {
    type Err = CfError;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "one" => Ok(Exponent::One),
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            _ => Self::finite(parse_rational(t)?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Both sides of the nine-level identity for one `(c, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerCheck {
    /// `2/1, 2/1, 1/1, 1/c, 1/1, 1/1, 2/1, 2/1, x/1` evaluated exactly.
    pub tower: BigRational,
    /// `((4c+5)x + 8c+9) / ((4c+6)x + 8c+11)`.
    pub closed: BigRational,
    /// `1/1, 1/(4c+4), 1/1, 1/1, x/1` evaluated exactly.
    pub simple: BigRational,
}

impl TowerCheck {
    pub fn holds(&self) -> bool {
        self.tower == self.closed && self.closed == self.simple
    }
}

pub fn nine_term_tower(c: &BigUint) -> Mobius {
    let c = BigInt::from(c.clone());
    Mobius::from_terms([
        (2.into(), BigInt::one()),
        (2.into(), BigInt::one()),
        (1.into(), BigInt::one()),
        (1.into(), c),
        (1.into(), BigInt::one()),
        (1.into(), BigInt::one()),
        (2.into(), BigInt::one()),
        (BigInt::from(2), BigInt::one()),
    ])
}

pub fn verify_tower_identity(c: &BigUint, x: &BigRational) -> Result<TowerCheck> {
    if c.is_zero() {
        return Err(CfError::InvalidValue("c must be a positive integer".into()));
    }
    if x.is_negative() {
        return Err(CfError::Domain(format!("x = {x} must be non-negative")));
    }
    let tower = nine_term_tower(c).apply(x)?;
    let ci = BigRational::from_integer(BigInt::from(c.clone()));
    let k = |m: i64, a: i64| BigRational::from_integer(m.into()) * &ci + BigRational::from_integer(a.into());
    let closed = (k(4, 5) * x + k(8, 9)) / (k(4, 6) * x + k(8, 11));
    let four_c4 = BigInt::from(c.clone()) * 4 + 4;
    let simple = Mobius::from_terms([
        (BigInt::one(), BigInt::one()),
        (BigInt::one(), four_c4),
        (BigInt::one(), BigInt::one()),
        (BigInt::one(), BigInt::one()),
    ])
    .apply(x)?;
    Ok(TowerCheck { tower, closed, simple })
}

/// `(7·4^k − 4)/3`; always an integer.
pub fn block_quotient(k: u64) -> BigUint {
    ((BigUint::from(7u32) << (2 * k)) - 4u32) / 3u32
}

/// Word `2^(2k) 1 1 1 1 2^(2k)` of partial numerators over unit denominators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockWord {
    pub k: u64,
    pub word: Vec<u8>,
}

impl BlockWord {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn quotient(&self) -> BigUint {
        block_quotient(self.k)
    }

    /// The word as a map of the tail value `x`.
    pub fn as_mobius(&self) -> Mobius {
        Mobius::from_terms(self.word.iter().map(|&a| (BigInt::from(a), BigInt::one())))
    }

    /// `1/1, 1/c, 1/1, 1/1` with `c` the block quotient, as a map of the tail.
    pub fn simple_mobius(&self) -> Mobius {
        Mobius::from_terms([
            (BigInt::one(), BigInt::one()),
            (BigInt::one(), BigInt::from(self.quotient())),
            (BigInt::one(), BigInt::one()),
            (BigInt::one(), BigInt::one()),
        ])
    }
}

pub fn expand_block(k: u64) -> BlockWord {
    let run = usize::try_from(2 * k).expect("block exponent too large");
    let mut word = Vec::with_capacity(2 * run + 4);
    word.extend(std::iter::repeat_n(2u8, run));
    word.extend([1u8; 4]);
    word.extend(std::iter::repeat_n(2u8, run));
    BlockWord { k, word }
}

/// Least `k ≥ 0` with `(7·4^k − 4)/3 ≥ B_prev^e`, where `e` is the shift of
/// `s` at index `n`.
pub fn f_of_n(n: usize, s: &Exponent, b_prev: &BigUint, precision: Precision) -> Result<u64> {
    if n % 4 != 2 {
        return Err(CfError::InvalidValue(format!(
            "f(n) is defined for n ≡ 2 mod 4, got n = {n}"
        )));
    }
    if b_prev.is_zero() {
        return Err(CfError::InvalidValue("B_(n-1) must be positive".into()));
    }
    let e = s.shift_at(n)?;
    if e.is_zero() || b_prev.is_one() {
        return Ok(0);
    }
    let reaches = |k: u64| -> Result<bool> {
        let c = BigRational::from_integer(block_quotient(k).into());
        compare_power(&c, b_prev, &e, precision)
            .map(|ord| ord != Ordering::Less)
            .map_err(|bits| CfError::TieUnresolved {
                n,
                precision_bits: bits,
            })
    };
    let ef = e.to_f64().unwrap_or(f64::INFINITY);
    let estimate = (ef * ln_biguint(b_prev) + 3f64.ln() - 7f64.ln()) / 4f64.ln();
    let mut k = if estimate.is_finite() {
        (estimate.floor() as i64 - 1).max(0) as u64
    } else {
        0
    };
    if reaches(k)? {
        while k > 0 && reaches(k - 1)? {
            k -= 1;
        }
    } else {
        k += 1;
        while !reaches(k)? {
            k += 1;
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Index of the large simple quotient (`n ≡ 2 mod 4`).
    pub n: usize,
    pub f: u64,
    #[serde(with = "serde_big::biguint")]
    pub c: BigUint,
}

/// Run of equal letters in the emitted word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub letter: u8,
    pub count: u64,
}

/// Both representations of a truncated construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescribedPlan {
    pub s: Exponent,
    pub blocks: Vec<Block>,
    /// Simple quotients `c_1, c_2, ...`.
    #[serde(with = "serde_big::biguint_vec")]
    pub quotients: Vec<BigUint>,
    /// Simple denominators `B_0, B_1, ...`.
    #[serde(rename = "B_simple", with = "serde_big::biguint_vec")]
    pub b_simple: Vec<BigUint>,
    pub word_rle: Vec<Run>,
    pub word_len: u64,
}

impl PrescribedPlan {
    /// The emitted word, letter by letter.
    pub fn word(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(usize::try_from(self.word_len).unwrap_or(0));
        for r in &self.word_rle {
            out.extend(std::iter::repeat_n(r.letter, r.count as usize));
        }
        out
    }

    /// `K a_n/1` over the emitted word; exhausted past its end.
    pub fn gcf_stream(&self) -> CoefficientStream {
        let word = Arc::new(self.word());
        CoefficientStream::new(BigUint::zero(), move |n| match word.get(n - 1) {
            Some(&a) => Ok((BigUint::from(a), BigUint::one())),
            None => Err(CfError::StreamExhausted { index: n }),
        })
        .with_label(format!("prescribed(s={})", self.s))
    }

    /// `[0; c_1, c_2, ...]`; exhausted past the last quotient.
    pub fn simple_stream(&self) -> CoefficientStream {
        let cs = Arc::new(self.quotients.clone());
        CoefficientStream::new(BigUint::zero(), move |n| match cs.get(n - 1) {
            Some(c) => Ok((BigUint::one(), c.clone())),
            None => Err(CfError::StreamExhausted { index: n }),
        })
        .with_label(format!("prescribed-simple(s={})", self.s))
    }

    /// Simple numerators `A_0, A_1, ...`.
    pub fn a_simple(&self) -> Vec<BigUint> {
        let mut a = vec![BigUint::zero()];
        let mut prev = BigUint::one();
        for c in &self.quotients {
            let next = c * a.last().unwrap_or(&BigUint::zero()) + &prev;
            prev = a.last().cloned().unwrap_or_default();
            a.push(next);
        }
        a
    }

    /// Enclosure of the infinite construction from the two deepest simple
    /// convergents.
    pub fn value_enclosure(&self) -> Result<Enclosure> {
        let d = self.quotients.len();
        if d < 2 {
            return Err(CfError::InvalidValue("plan has fewer than two simple quotients".into()));
        }
        let a = self.a_simple();
        let q = |i: usize| BigRational::new(a[i].clone().into(), self.b_simple[i].clone().into());
        Ok(Enclosure::from_bounds(q(d - 1), q(d), d))
    }
}

fn push_run(runs: &mut Vec<Run>, letter: u8, count: u64) {
    if count == 0 {
        return;
    }
    match runs.last_mut() {
        Some(r) if r.letter == letter => r.count += count,
        _ => runs.push(Run { letter, count }),
    }
}

pub fn prescribed_stream(s: &Exponent, n_blocks: usize) -> Result<PrescribedPlan> {
    prescribed_stream_with(s, n_blocks, Precision::from_env())
}

pub fn prescribed_stream_with(s: &Exponent, n_blocks: usize, precision: Precision) -> Result<PrescribedPlan> {
    if n_blocks == 0 {
        return Err(CfError::InvalidValue("n_blocks must be at least 1".into()));
    }
    if *s == Exponent::One {
        let len = 4 * n_blocks as u64;
        return Ok(PrescribedPlan {
            s: s.clone(),
            blocks: Vec::new(),
            quotients: Vec::new(),
            b_simple: Vec::new(),
            word_rle: vec![Run { letter: 2, count: len }],
            word_len: len,
        });
    }
    let mut quotients = Vec::with_capacity(4 * n_blocks);
    let mut b_simple = vec![BigUint::one()];
    let mut b_prev = BigUint::zero();
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut runs = Vec::new();
    let mut word_len = 0u64;
    for n in 1..=4 * n_blocks {
        let c = if n % 4 == 2 {
            let last = b_simple.last().cloned().unwrap_or_default();
            let f = f_of_n(n, s, &last, precision)?;
            let c = block_quotient(f);
            blocks.push(Block { n, f, c: c.clone() });
            push_run(&mut runs, 2, 2 * f);
            push_run(&mut runs, 1, 4);
            push_run(&mut runs, 2, 2 * f);
            word_len += 4 * f + 4;
            c
        } else {
            BigUint::one()
        };
        let b_cur = b_simple.last().cloned().unwrap_or_default();
        let next = &c * &b_cur + &b_prev;
        b_prev = b_cur;
        b_simple.push(next);
        quotients.push(c);
    }
    Ok(PrescribedPlan {
        s: s.clone(),
        blocks,
        quotients,
        b_simple,
        word_rle: runs,
        word_len,
    })
}

/// Quality of the simple convergent `A_n/B_n` at `n ≡ 1 mod 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub n: usize,
    pub s: Exponent,
    #[serde(with = "serde_big::biguint")]
    pub b_n: BigUint,
    /// Exponent of `B_n` in the upper bound: `s`, or `n` for infinity.
    pub upper_exponent: String,
    /// `|τ − A_n/B_n| < B_n^(−upper_exponent)`.
    pub upper_holds: bool,
    /// `|τ − A_n/B_n| > B_n^(−s)/5`; reported only for finite `s > 2`.
    pub lower_holds: Option<bool>,
    pub log10_distance: f64,
    pub log10_bound: f64,
}

fn decide(
    n: usize,
    lo: &BigRational,
    hi: &BigRational,
    base: &BigUint,
    exp: &BigRational,
    precision: Precision,
    what: &str,
) -> Result<Ordering> {
    let cmp = |x: &BigRational| -> Result<Option<Ordering>> {
        if !x.is_positive() {
            return Ok(Some(Ordering::Less));
        }
        Ok(compare_power(x, base, exp, precision).ok())
    };
    match (cmp(lo)?, cmp(hi)?) {
        (Some(a), Some(b)) if a == b => Ok(a),
        (Some(Ordering::Less), Some(Ordering::Equal)) => Ok(Ordering::Less),
        (Some(Ordering::Equal), Some(Ordering::Greater)) => Ok(Ordering::Greater),
        _ => Err(CfError::NeedsMorePrecision {
            n,
            detail: format!("{what}: enclosure of the distance straddles the bound; deepen the plan"),
        }),
    }
}

pub fn approximation_audit(plan: &PrescribedPlan, n: usize) -> Result<AuditRecord> {
    approximation_audit_with(plan, n, Precision::from_env())
}

pub fn approximation_audit_with(plan: &PrescribedPlan, n: usize, precision: Precision) -> Result<AuditRecord> {
    if plan.s == Exponent::One {
        return Err(CfError::Domain("exponent 1 has no simple convergents to audit".into()));
    }
    if n % 4 != 1 {
        return Err(CfError::InvalidValue(format!("audit index must be ≡ 1 mod 4, got {n}")));
    }
    if plan.quotients.len() < n + 2 {
        return Err(CfError::NeedsMorePrecision {
            n,
            detail: format!("plan depth {} must exceed n + 1", plan.quotients.len()),
        });
    }
    let tau = plan.value_enclosure()?;
    let a = plan.a_simple();
    let b_n = plan.b_simple[n].clone();
    let p = BigRational::new(a[n].clone().into(), b_n.clone().into());
    let (d_lo, d_hi) = if p < tau.lo {
        (&tau.lo - &p, &tau.hi - &p)
    } else if p > tau.hi {
        (&p - &tau.hi, &p - &tau.lo)
    } else {
        (BigRational::zero(), (&tau.hi - &p).max(&p - &tau.lo))
    };

    let (upper_exp, upper_label) = match &plan.s {
        Exponent::Finite(s) => (s.clone(), s.to_string()),
        Exponent::Infinity => (BigRational::from_integer(n.into()), n.to_string()),
        Exponent::One => unreachable!(),
    };
    let neg_upper = -upper_exp.clone();
    let upper = decide(n, &d_lo, &d_hi, &b_n, &neg_upper, precision, "upper inequality")?;
    let upper_holds = upper == Ordering::Less;

    let lower_holds = match &plan.s {
        Exponent::Finite(s) if *s > BigRational::from_integer(2.into()) => {
            let five = BigRational::from_integer(5.into());
            let ord = decide(
                n,
                &(&d_lo * &five),
                &(&d_hi * &five),
                &b_n,
                &neg_upper,
                precision,
                "lower inequality",
            )?;
            Some(ord == Ordering::Greater)
        }
        _ => None,
    };

    let ln10 = std::f64::consts::LN_10;
    let mid = (&d_lo + &d_hi) / BigRational::from_integer(2.into());
    let log10_distance = if mid.is_positive() {
        crate::numeric::ln_rational(&mid) / ln10
    } else {
        f64::NEG_INFINITY
    };
    let log10_bound = -upper_exp.to_f64().unwrap_or(f64::INFINITY) * ln_biguint(&b_n) / ln10;
    Ok(AuditRecord {
        n,
        s: plan.s.clone(),
        b_n,
        upper_exponent: upper_label,
        upper_holds,
        lower_holds,
        log10_distance,
        log10_bound,
    })
}

/// Per-block check of `B^(s-2) ≤ c_n` and `c_n < 5B^(s-2) − 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientBound {
    pub n: usize,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientBounds {
    pub blocks: Vec<QuotientBound>,
    /// First index from which the upper bound holds for every later block.
    pub upper_from: Option<usize>,
}

pub fn quotient_bounds(plan: &PrescribedPlan, precision: Precision) -> Result<QuotientBounds> {
    let mut out = Vec::with_capacity(plan.blocks.len());
    for block in &plan.blocks {
        let e = plan.s.shift_at(block.n)?;
        let base = &plan.b_simple[block.n - 1];
        let tie = |bits| CfError::TieUnresolved {
            n: block.n,
            precision_bits: bits,
        };
        let c = BigRational::from_integer(block.c.clone().into());
        let lower_ok = compare_power(&c, base, &e, precision).map_err(tie)? != Ordering::Less;
        let scaled = (&c + BigRational::from_integer(2.into())) / BigRational::from_integer(5.into());
        let upper_ok = compare_power(&scaled, base, &e, precision).map_err(tie)? == Ordering::Less;
        out.push(QuotientBound {
            n: block.n,
            lower_ok,
            upper_ok,
        });
    }
    let upper_from = out
        .iter()
        .rposition(|b| !b.upper_ok)
        .map_or(out.first().map(|b| b.n), |i| out.get(i + 1).map(|b| b.n));
    Ok(QuotientBounds {
        blocks: out,
        upper_from,
    })
}
