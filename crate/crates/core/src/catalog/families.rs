//! Named continued fraction families with their declared growth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::morphic::MorphicWord;
use crate::bounds::{bounded_bound, exp_bound, poly_bound, BoundReport, Condition, GrowthSpec, Mode, Root};
use crate::cfcore::{self, CoefficientStream, Enclosure, DEFAULT_BITLEN_CAP};
use crate::error::{CfError, Result};
use crate::numeric::{parse_rational, to_biguint};
use crate::transforms::{integerize, to_integer_stream, EquivalenceScaling, Mobius, RationalStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ThueMorseCf,
    FibonacciCf,
    FtMixedCf,
    ExpPoint,
    RogersRamanujan,
    MOfQ,
    Tasoev1,
    Tasoev2,
    Bundschuh,
    TribonacciCf,
    Rational197,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FamilyInfo {
    pub family: Family,
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamInfo],
    pub route: &'static str,
}

const fn p(name: &'static str, default: &'static str, doc: &'static str) -> ParamInfo {
    ParamInfo { name, default, doc }
}

const REGISTRY: &[FamilyInfo] = &[
    FamilyInfo {
        family: Family::ThueMorseCf,
        name: "thue_morse_cf",
        summary: "K 2^t_n / 2^(t_n+1) over the Thue-Morse word",
        params: &[],
        route: "bounded (1,2,2,4); lemma with density nu",
    },
    FamilyInfo {
        family: Family::FibonacciCf,
        name: "fibonacci_cf",
        summary: "K 2^f_n / 2^(f_n+1) over the Fibonacci word",
        params: &[],
        route: "lemma with density nu; bounded (1,2,2,4)",
    },
    FamilyInfo {
        family: Family::FtMixedCf,
        name: "ft_mixed_cf",
        summary: "K 2^f_n / 2^t_n, Fibonacci numerators over Thue-Morse denominators",
        params: &[],
        route: "bounded (1,2,1,2) fails; lemma with density nu",
    },
    FamilyInfo {
        family: Family::ExpPoint,
        name: "exp_point",
        summary: "e^(x/y) = (tau + 2y + x)/(tau + 2y - x) with tail tau = K x^2/((4n+2)y)",
        params: &[
            p("x", "1", "nonzero integer with 2y - x > 0"),
            p("y", "1", "positive integer"),
        ],
        route: "polynomial l=0, k1=k2=1",
    },
    FamilyInfo {
        family: Family::RogersRamanujan,
        name: "rogers_ramanujan",
        summary: "K q^n t / 1 with q = a/b, t = r/s, scaled to integers",
        params: &[
            p("a", "1", "positive integer"),
            p("b", "2", "positive integer"),
            p("r", "1", "positive integer"),
            p("s", "1", "positive integer"),
        ],
        route: "exponential alpha=a, beta1=sqrt(b), l=k1=k2=1",
    },
    FamilyInfo {
        family: Family::MOfQ,
        name: "m_of_q",
        summary: "K q^(2n) / (1 + q^n) with q = a/b, greedy integer scaling",
        params: &[p("a", "1", "positive integer"), p("b", "2", "positive integer")],
        route: "exponential alpha=a^2, beta1=b, l=k1=k2=1",
    },
    FamilyInfo {
        family: Family::Tasoev1,
        name: "tasoev1",
        summary: "K 1/(u a^n) alternating with 1/(v a^n), a = x/y, greedy integer scaling",
        params: &[
            p("u", "1", "positive rational"),
            p("v", "1", "positive rational"),
            p("a", "2", "positive rational x/y"),
        ],
        route: "exponential alpha=y^2, beta1=x, l=k1=k2=1",
    },
    FamilyInfo {
        family: Family::Tasoev2,
        name: "tasoev2",
        summary: "K 1/(u a^j), 1/(v b^j) interleaved, a = x/y, b = s/t, greedy integer scaling",
        params: &[
            p("u", "1", "positive rational"),
            p("v", "1", "positive rational"),
            p("a", "3", "positive rational x/y"),
            p("b", "3", "positive rational s/t"),
        ],
        route: "exponential alpha=sqrt(yt), beta1=sqrt(min(x,s)), l=k1=k2=1",
    },
    FamilyInfo {
        family: Family::Bundschuh,
        name: "bundschuh",
        summary: "K 1/(c_n + d_n ceil(n/s)^m) with periodic c = t/u, d = v/w",
        params: &[
            p("m", "1", "positive integer exponent"),
            p("s", "1", "positive integer period"),
            p("t", "1", "comma list of s positive integers"),
            p("u", "1", "comma list of s positive integers"),
            p("v", "1", "comma list of s positive integers"),
            p("w", "1", "comma list of s positive integers"),
        ],
        route: "polynomial l=0, k1=k2=m",
    },
    FamilyInfo {
        family: Family::TribonacciCf,
        name: "tribonacci_cf",
        summary: "K T_(n^l) / T_(n^k) from n = 2 on (n = 1 gives 0/0)",
        params: &[p("l", "1", "positive integer, l < k"), p("k", "2", "positive integer")],
        route: "exponential l < k1",
    },
    FamilyInfo {
        family: Family::Rational197,
        name: "rational_19_7",
        summary: "K (6n^7+6n^6+2n^5+3n+2)/(6n^7-6n^6+2n^5+3n-5) from n = 2 on, value 19/7",
        params: &[],
        route: "polynomial l=k1=k2=7 fails",
    },
];

pub fn registry() -> &'static [FamilyInfo] {
    REGISTRY
}

impl Family {
    pub fn info(self) -> &'static FamilyInfo {
        REGISTRY
            .iter()
            .find(|i| i.family == self)
            .expect("every family is registered")
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CfError;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match t.as_str() {
            "thue_morse" | "tm" => "thue_morse_cf",
            "fibonacci" | "fib" => "fibonacci_cf",
            "ft" | "ft_mixed" => "ft_mixed_cf",
            "rr" => "rogers_ramanujan",
            "mq" => "m_of_q",
            "tribonacci" => "tribonacci_cf",
            "19_7" | "rational" => "rational_19_7",
            other => other,
        };
        REGISTRY
            .iter()
            .find(|i| i.name == alias)
            .map(|i| i.family)
            .ok_or_else(|| CfError::FamilyParam(format!("unknown family {text:?}")))
    }
}

/// A family with its parameters as given (`name=value` pairs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub params: BTreeMap<String, String>,
    pub bitlen_cap: u64,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        FamilySpec {
            family,
            params: BTreeMap::new(),
            bitlen_cap: DEFAULT_BITLEN_CAP,
        }
    }

    /// Parses a family name and `name=value` items.
    pub fn parse<I, S>(name: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut spec = FamilySpec::new(name.parse()?);
        for pair in pairs {
            let pair = pair.as_ref();
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CfError::FamilyParam(format!("expected name=value, got {pair:?}")))?;
            spec = spec.with(k.trim(), v.trim())?;
        }
        Ok(spec)
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Result<Self> {
        if !self.family.info().params.iter().any(|p| p.name == key) {
            return Err(CfError::FamilyParam(format!(
                "{} has no parameter {key:?}",
                self.family
            )));
        }
        self.params.insert(key.to_string(), value.into());
        Ok(self)
    }

    pub fn with_bitlen_cap(mut self, cap: u64) -> Self {
        self.bitlen_cap = cap;
        self
    }

    fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or_else(|| {
            self.family
                .info()
                .params
                .iter()
                .find(|p| p.name == key)
                .map_or("", |p| p.default)
        })
    }

    fn rational(&self, key: &str) -> Result<BigRational> {
        parse_rational(self.raw(key)).map_err(|e| CfError::FamilyParam(format!("{key}: {e}")))
    }

    fn positive(&self, key: &str) -> Result<BigRational> {
        let v = self.rational(key)?;
        if !v.is_positive() {
            return Err(CfError::FamilyParam(format!("{key} = {v} must be positive")));
        }
        Ok(v)
    }

    fn integer(&self, key: &str) -> Result<BigInt> {
        let v = self.rational(key)?;
        if !v.is_integer() {
            return Err(CfError::FamilyParam(format!("{key} = {v} must be an integer")));
        }
        Ok(v.to_integer())
    }

    fn positive_integer(&self, key: &str) -> Result<BigUint> {
        let v = self.integer(key)?;
        if !v.is_positive() {
            return Err(CfError::FamilyParam(format!("{key} = {v} must be a positive integer")));
        }
        Ok(to_biguint(&v).unwrap_or_default())
    }

    fn small(&self, key: &str) -> Result<u32> {
        self.positive_integer(key)?
            .to_u32()
            .ok_or_else(|| CfError::FamilyParam(format!("{key} is too large")))
    }

    fn list(&self, key: &str, len: usize) -> Result<Vec<BigUint>> {
        let raw = self.raw(key);
        let items: Vec<&str> = raw.split([',', ':']).map(str::trim).collect();
        let items = if items.len() == 1 { vec![items[0]; len] } else { items };
        if items.len() != len {
            return Err(CfError::FamilyParam(format!(
                "{key} needs {len} entries (one per period position), got {}",
                items.len()
            )));
        }
        items
            .into_iter()
            .map(|t| {
                let v: BigInt = t
                    .parse()
                    .map_err(|_| CfError::FamilyParam(format!("{key}: not an integer: {t:?}")))?;
                to_biguint(&v)
                    .filter(|v| !v.is_zero())
                    .ok_or_else(|| CfError::FamilyParam(format!("{key} entries must be positive")))
            })
            .collect()
    }
}

/// The value is `map(tail)`, with the tail starting at original index `offset + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Framing {
    pub map: Mobius,
    pub offset: usize,
}

/// Integer stream of a family, with its rational original and outer map when present.
#[derive(Debug, Clone)]
pub struct FamilyStream {
    pub spec: FamilySpec,
    pub stream: CoefficientStream,
    pub framing: Option<Framing>,
    pub rational: Option<RationalStream>,
    pub scaling: Option<EquivalenceScaling>,
}

impl FamilyStream {
    fn plain(spec: &FamilySpec, stream: CoefficientStream) -> Self {
        FamilyStream {
            spec: spec.clone(),
            stream: stream.with_label(spec.family.name()).with_bitlen_cap(spec.bitlen_cap),
            framing: None,
            rational: None,
            scaling: None,
        }
    }

    /// Enclosure of the family's value, through the outer map when framed.
    pub fn evaluate(&self, target_width: &BigRational, max_terms: usize) -> Result<Enclosure> {
        let Some(framing) = &self.framing else {
            return cfcore::evaluate(&self.stream, target_width, max_terms);
        };
        let mut tail_width = target_width.clone();
        for _ in 0..64 {
            let tail = cfcore::evaluate(&self.stream, &tail_width, max_terms)?;
            let image = framing.map.image(&tail)?;
            if image.width <= *target_width {
                return Ok(image);
            }
            // the map is Lipschitz on the tail's range, so this settles quickly
            tail_width = &tail_width * target_width / &image.width / BigRational::from_integer(2.into());
        }
        Err(CfError::InvalidValue(
            "outer map did not contract to the requested width".into(),
        ))
    }
}

fn pow_rat(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

fn bit(letter: u8) -> BigUint {
    BigUint::one() << letter
}

/// `T_m` with `T_0 = T_1 = 0`, `T_2 = 1`.
pub fn tribonacci(m: u64, bitlen_cap: u64) -> Result<BigUint> {
    // log2 of the tribonacci constant is below 0.88
    let estimate = (m as f64 * 0.88) as u64;
    if estimate > bitlen_cap {
        return Err(CfError::ResourceExhausted {
            bits: estimate,
            cap: bitlen_cap,
        });
    }
    type M = [[BigUint; 3]; 3];
    fn mul(x: &M, y: &M) -> M {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| &x[i][k] * &y[k][j]).sum()))
    }
    let one = BigUint::one;
    let zero = BigUint::zero;
    let mut result: M = [
        [one(), zero(), zero()],
        [zero(), one(), zero()],
        [zero(), zero(), one()],
    ];
    let mut base: M = [[one(), one(), one()], [one(), zero(), zero()], [zero(), one(), zero()]];
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    // (T_(m+2), T_(m+1), T_m) = M^m (T_2, T_1, T_0)
    Ok(result[2][0].clone())
}

fn poly7(n: &BigInt, coeffs: [i64; 8]) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &c| acc * n + BigInt::from(c))
}

/// `6n^7 + 6n^6 + 2n^5 + 3n + 2` and `6n^7 − 6n^6 + 2n^5 + 3n − 5`.
pub fn rational_19_7_terms(n: u64) -> (BigInt, BigInt) {
    let n = BigInt::from(n);
    let a = poly7(&n, [2, 3, 0, 0, 0, 2, 6, 6]);
    let b = poly7(&n, [-5, 3, 0, 0, 0, 2, -6, 6]);
    (a, b)
}

pub fn family_stream(spec: &FamilySpec) -> Result<FamilyStream> {
    let cap = spec.bitlen_cap;
    match spec.family {
        Family::ThueMorseCf | Family::FibonacciCf | Family::FtMixedCf => {
            let (num_word, den_word, den_shift) = match spec.family {
                Family::ThueMorseCf => (MorphicWord::thue_morse(), MorphicWord::thue_morse(), 1),
                Family::FibonacciCf => (MorphicWord::fibonacci(), MorphicWord::fibonacci(), 1),
                _ => (MorphicWord::fibonacci(), MorphicWord::thue_morse(), 0),
            };
            let stream =
                CoefficientStream::from_fn(move |n| (bit(num_word.letter(n)), bit(den_word.letter(n) + den_shift)));
            Ok(FamilyStream::plain(spec, stream))
        }
        Family::ExpPoint => {
            let x = spec.integer("x")?;
            let y = spec.positive_integer("y")?;
            let y = BigInt::from(y);
            if x.is_zero() {
                return Err(CfError::FamilyParam("x must be nonzero".into()));
            }
            if (BigInt::from(2) * &y - &x).is_negative() || BigInt::from(2) * &y == x {
                return Err(CfError::FamilyParam("need 2y - x > 0".into()));
            }
            let x2 = to_biguint(&(&x * &x)).unwrap_or_default();
            let yu = to_biguint(&y).unwrap_or_default();
            let stream = CoefficientStream::from_fn(move |n| (x2.clone(), &yu * (4 * n as u64 + 2)));
            let two_y = BigInt::from(2) * &y;
            let map = Mobius::new(1, &two_y + &x, 1, &two_y - &x)?;
            Ok(FamilyStream {
                framing: Some(Framing { map, offset: 1 }),
                ..FamilyStream::plain(spec, stream)
            })
        }
        Family::RogersRamanujan => {
            let (a, b) = (spec.positive_integer("a")?, spec.positive_integer("b")?);
            let (r, s) = (spec.positive_integer("r")?, spec.positive_integer("s")?);
            let big = |v: &BigUint| BigRational::from_integer(BigInt::from(v.clone()));
            let q = big(&a) / big(&b);
            let t = big(&r) / big(&s);
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                Ok((pow_rat(&q, n) * &t, BigRational::one()))
            })
            .with_label("rogers_ramanujan");
            let (bb, ss) = (big(&b), big(&s));
            let scaling = EquivalenceScaling::new(move |n| {
                if n % 2 == 1 {
                    pow_rat(&bb, n.div_ceil(2)) * &ss
                } else {
                    pow_rat(&bb, n / 2)
                }
            });
            let stream = to_integer_stream(&rational, &scaling)?;
            Ok(FamilyStream {
                rational: Some(rational),
                scaling: Some(scaling),
                ..FamilyStream::plain(spec, stream)
            })
        }
        Family::MOfQ => {
            let q = spec.positive("a")? / spec.positive("b")?;
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                let qn = pow_rat(&q, n);
                Ok((&qn * &qn, BigRational::one() + qn))
            })
            .with_label("m_of_q");
            greedy(spec, rational)
        }
        Family::Tasoev1 => {
            let (u, v, a) = (spec.positive("u")?, spec.positive("v")?, spec.positive("a")?);
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                let lead = if n % 2 == 1 { &u } else { &v };
                Ok((BigRational::one(), lead * pow_rat(&a, n)))
            })
            .with_label("tasoev1");
            greedy(spec, rational)
        }
        Family::Tasoev2 => {
            let (u, v) = (spec.positive("u")?, spec.positive("v")?);
            let (a, b) = (spec.positive("a")?, spec.positive("b")?);
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                let j = n.div_ceil(2);
                let den = if n % 2 == 1 {
                    &u * pow_rat(&a, j)
                } else {
                    &v * pow_rat(&b, j)
                };
                Ok((BigRational::one(), den))
            })
            .with_label("tasoev2");
            greedy(spec, rational)
        }
        Family::Bundschuh => {
            let m = spec.small("m")?;
            let s = spec.small("s")? as usize;
            let [t, u, v, w] = ["t", "u", "v", "w"].map(|k| spec.list(k, s));
            let (t, u, v, w) = (t?, u?, v?, w?);
            let big = |x: &BigUint| BigRational::from_integer(BigInt::from(x.clone()));
            let c: Vec<BigRational> = (0..s).map(|i| big(&t[i]) / big(&u[i])).collect();
            let d: Vec<BigRational> = (0..s).map(|i| big(&v[i]) / big(&w[i])).collect();
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                let i = (n - 1) % s;
                let block = BigRational::from_integer(BigInt::from(n.div_ceil(s)));
                Ok((BigRational::one(), &c[i] + &d[i] * pow_rat(&block, m as usize)))
            })
            .with_label("bundschuh");
            let uw: Vec<BigRational> = (0..s).map(|i| big(&(&u[i] * &w[i]))).collect();
            let scaling = EquivalenceScaling::new(move |n| uw[(n - 1) % s].clone());
            let stream = to_integer_stream(&rational, &scaling)?;
            Ok(FamilyStream {
                rational: Some(rational),
                scaling: Some(scaling),
                ..FamilyStream::plain(spec, stream)
            })
        }
        Family::TribonacciCf => {
            let (l, k) = (spec.small("l")?, spec.small("k")?);
            if l >= k {
                return Err(CfError::FamilyParam(format!("need l < k, got l = {l}, k = {k}")));
            }
            let stream = CoefficientStream::new(BigUint::zero(), move |n| {
                let idx = |e: u32| {
                    (n as u64 + 1)
                        .checked_pow(e)
                        .ok_or(CfError::ResourceExhausted { bits: u64::MAX, cap })
                };
                Ok((tribonacci(idx(l)?, cap)?, tribonacci(idx(k)?, cap)?))
            });
            Ok(FamilyStream::plain(spec, stream))
        }
        Family::Rational197 => {
            let stream = CoefficientStream::new(BigUint::zero(), |n| {
                let (a, b) = rational_19_7_terms(n as u64 + 1);
                Ok((to_biguint(&a).unwrap_or_default(), to_biguint(&b).unwrap_or_default()))
            });
            Ok(FamilyStream::plain(spec, stream))
        }
    }
}

fn greedy(spec: &FamilySpec, rational: RationalStream) -> Result<FamilyStream> {
    let (stream, scaling) = integerize(&rational)?;
    Ok(FamilyStream {
        rational: Some(rational),
        scaling: Some(scaling),
        ..FamilyStream::plain(spec, stream)
    })
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// `ν` from letter densities for the three automatic families.
pub fn density_nu(family: Family) -> Option<f64> {
    let ln2 = 2f64.ln();
    let phi = golden();
    match family {
        Family::ThueMorseCf => Some(ln2 / (5.0 + 4.0 * 2f64.sqrt()).ln()),
        Family::FibonacciCf => Some(ln2 / (phi * (1.0 + 2f64.sqrt()).ln() + (3.0 + 2f64.sqrt()).ln())),
        Family::FtMixedCf => Some(4f64.ln() / (phi * phi * ((3.0 + 6f64.sqrt()).ln() - ln2))),
        _ => None,
    }
}

fn density_report(family: Family) -> Option<BoundReport> {
    let nu = density_nu(family)?;
    let ok = nu < 1.0;
    Some(BoundReport {
        theorem: "lemma".into(),
        conditions: vec![Condition {
            name: "nu<1".into(),
            ok,
            detail: format!("nu = {nu:.12} from asymptotic letter densities"),
        }],
        mu_upper: ok.then(|| 2.0 + nu / (1.0 - nu)),
        nu_limit: Some(nu),
        mode: Mode::Certified,
    })
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn to_root(x: &BigUint, index: u32) -> Result<Root> {
    Root::new(BigRational::from_integer(x.clone().into()), index)
}

/// Declared growth of the family's integer stream, when it has one.
pub fn family_growth(spec: &FamilySpec) -> Result<GrowthSpec> {
    match spec.family {
        Family::ThueMorseCf | Family::FibonacciCf => Ok(GrowthSpec::bounded(1, 2, 2, 4)),
        Family::FtMixedCf => Ok(GrowthSpec::bounded(1, 2, 1, 2)),
        Family::ExpPoint => {
            let x = spec.integer("x")?;
            let y = BigRational::from_integer(spec.positive_integer("y")?.into());
            Ok(GrowthSpec::Polynomial {
                alpha: BigRational::from_integer(&x * &x),
                l: rat(0),
                beta1: &y * rat(4),
                k1: rat(1),
                beta2: &y * rat(6),
                k2: rat(1),
            })
        }
        Family::RogersRamanujan => {
            let (a, b) = (spec.positive_integer("a")?, spec.positive_integer("b")?);
            let (r, s) = (spec.positive_integer("r")?, spec.positive_integer("s")?);
            let sqrt_b = to_root(&b, 2)?;
            Ok(GrowthSpec::Exponential {
                r: BigRational::from_integer(r.into()),
                alpha: to_root(&a, 1)?,
                l: rat(1),
                s1: rat(1),
                beta1: sqrt_b.clone(),
                k1: rat(1),
                // b_n <= s sqrt(b) sqrt(b)^n <= s b sqrt(b)^n
                s2: BigRational::from_integer((&s * &b).into()),
                beta2: sqrt_b,
                k2: rat(1),
            })
        }
        Family::MOfQ => {
            let (a, b) = (spec.positive("a")?, spec.positive("b")?);
            let unit = |a: &BigRational, what: &str| -> Result<BigUint> {
                a.is_integer()
                    .then(|| to_biguint(&a.to_integer()).unwrap_or_default())
                    .ok_or_else(|| CfError::FamilyParam(format!("{what} must be a positive integer")))
            };
            let (a, b) = (unit(&a, "a")?, unit(&b, "b")?);
            Ok(exp_unit(to_root(&(&a * &a), 1)?, to_root(&b, 1)?))
        }
        Family::Tasoev1 => {
            let a = spec.positive("a")?;
            let (x, y) = (a.numer().magnitude().clone(), a.denom().magnitude().clone());
            Ok(exp_unit(to_root(&(&y * &y), 1)?, to_root(&x, 1)?))
        }
        Family::Tasoev2 => {
            let (a, b) = (spec.positive("a")?, spec.positive("b")?);
            let (x, y) = (a.numer().magnitude().clone(), a.denom().magnitude().clone());
            let (s, t) = (b.numer().magnitude().clone(), b.denom().magnitude().clone());
            let low = x.clone().min(s);
            Ok(exp_unit(to_root(&(&y * &t), 2)?, to_root(&low, 2)?))
        }
        Family::Bundschuh => {
            let m = spec.small("m")?;
            let s = spec.small("s")? as usize;
            let [t, u, v, w] = ["t", "u", "v", "w"].map(|k| spec.list(k, s));
            let (t, u, v, w) = (t?, u?, v?, w?);
            let uw: Vec<BigUint> = (0..s).map(|i| &u[i] * &w[i]).collect();
            let alpha = (0..s)
                .map(|i| &uw[i] * &uw[(i + 1) % s])
                .chain(std::iter::once(uw[0].clone()))
                .max()
                .unwrap_or_default();
            let top = (0..s).map(|i| &t[i] * &w[i] + &v[i] * &u[i]).max().unwrap_or_default();
            let sm = BigRational::from_integer(BigInt::from(s).pow(m));
            let s1m = BigRational::from_integer(BigInt::from(s + 1).pow(m));
            Ok(GrowthSpec::Polynomial {
                alpha: BigRational::from_integer(alpha.into()),
                l: rat(0),
                beta1: BigRational::one() / &sm,
                k1: rat(u64::from(m)),
                beta2: BigRational::from_integer(top.into()) * s1m / sm,
                k2: rat(u64::from(m)),
            })
        }
        Family::TribonacciCf => {
            let (l, k) = (spec.small("l")?, spec.small("k")?);
            // (3/2)^(m-3) <= T_m <= 2^m and (n+1)^e <= 2^e n^e
            let double_exp = |e: u32| BigRational::from_integer(BigInt::one() << (1usize << e));
            Ok(GrowthSpec::Exponential {
                r: rat(1),
                alpha: Root::rational(double_exp(l))?,
                l: rat(u64::from(l)),
                s1: BigRational::new(8.into(), 27.into()),
                beta1: Root::rational(BigRational::new(3.into(), 2.into()))?,
                k1: rat(u64::from(k)),
                s2: rat(1),
                beta2: Root::rational(double_exp(k))?,
                k2: rat(u64::from(k)),
            })
        }
        Family::Rational197 => Ok(GrowthSpec::Polynomial {
            alpha: rat(19),
            l: rat(7),
            beta1: rat(1),
            k1: rat(7),
            beta2: rat(6),
            k2: rat(7),
        }),
    }
}

fn exp_unit(alpha: Root, beta1: Root) -> GrowthSpec {
    GrowthSpec::Exponential {
        r: rat(1),
        alpha,
        l: rat(1),
        s1: rat(1),
        beta1: beta1.clone(),
        k1: rat(1),
        s2: rat(1),
        beta2: beta1,
        k2: rat(1),
    }
}

/// Certified bound along the family's primary route.
pub fn family_bound(spec: &FamilySpec) -> Result<BoundReport> {
    if spec.family == Family::FibonacciCf {
        return density_report(spec.family).ok_or_else(|| CfError::FamilyParam("no density data".into()));
    }
    bound_for(&family_growth(spec)?)
}

fn bound_for(growth: &GrowthSpec) -> Result<BoundReport> {
    match growth {
        GrowthSpec::Bounded { .. } => bounded_bound(growth),
        GrowthSpec::Polynomial { .. } => poly_bound(growth),
        GrowthSpec::Exponential { .. } => exp_bound(growth),
    }
}

/// Every certified route that applies, primary first.
pub fn family_routes(spec: &FamilySpec) -> Result<Vec<BoundReport>> {
    let primary = family_bound(spec)?;
    let mut out = vec![primary.clone()];
    if let Some(d) = density_report(spec.family) {
        if d != primary {
            out.push(d);
        }
    }
    let growth = bound_for(&family_growth(spec)?)?;
    if !out.contains(&growth) {
        out.push(growth);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn spec(name: &str, pairs: &[&str]) -> FamilySpec {
        FamilySpec::parse(name, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn registry_round_trip() {
        for info in registry() {
            assert_eq!(info.name.parse::<Family>().unwrap(), info.family);
            assert!(family_stream(&FamilySpec::new(info.family)).is_ok(), "{}", info.name);
            assert!(family_bound(&FamilySpec::new(info.family)).is_ok(), "{}", info.name);
        }
        assert!("nope".parse::<Family>().is_err());
        assert!(FamilySpec::parse("exp_point", ["z=1"]).is_err());
        assert!(FamilySpec::parse("exp_point", ["x"]).is_err());
    }

    #[test]
    fn thue_morse_terms() {
        let s = family_stream(&spec("thue_morse_cf", &[])).unwrap().stream;
        let word = [0u8, 1, 1, 0, 1, 0, 0, 1];
        for (i, &t) in word.iter().enumerate() {
            let (a, b) = s.term(i + 1).unwrap();
            assert_eq!(a, BigUint::from(1u32 << t));
            assert_eq!(b, BigUint::from(2u32 << t));
        }
    }

    #[test]
    fn exp_point_tail() {
        let fs = family_stream(&spec("exp_point", &["x=1", "y=1"])).unwrap();
        for n in 1..5usize {
            assert_eq!(fs.stream.term(n).unwrap(), (BigUint::one(), BigUint::from(4 * n + 2)));
        }
        assert!(family_stream(&spec("exp_point", &["x=2", "y=1"])).is_err());
        assert!(family_stream(&spec("exp_point", &["x=0"])).is_err());
        assert!(family_stream(&spec("exp_point", &["x=-3", "y=1"])).is_ok());
    }

    #[test]
    fn exp_point_framed_value_brackets_e() {
        let fs = family_stream(&spec("exp_point", &[])).unwrap();
        let e = fs.evaluate(&q(1, 1_000_000_000), 1000).unwrap();
        let lo = crate::numeric::rational_to_f64(&e.lo);
        assert!((lo - std::f64::consts::E).abs() < 1e-8);
        assert!(e.width <= q(1, 1_000_000_000));
    }

    #[test]
    fn rogers_ramanujan_integer_form() {
        let fs = family_stream(&spec("rogers_ramanujan", &["a=1", "b=2", "r=1", "s=1"])).unwrap();
        for n in 1..15usize {
            let (a, b) = fs.stream.term(n).unwrap();
            assert_eq!(a, BigUint::one());
            assert_eq!(b, BigUint::from(2u32).pow(n.div_ceil(2) as u32));
        }
    }

    #[test]
    fn tribonacci_values() {
        let t: Vec<u64> = (0..12)
            .map(|m| tribonacci(m, 1 << 20).unwrap().to_u64().unwrap())
            .collect();
        assert_eq!(t, vec![0, 0, 1, 1, 2, 4, 7, 13, 24, 44, 81, 149]);
        assert!(tribonacci(1 << 30, 1000).is_err());
        let fs = family_stream(&spec("tribonacci_cf", &["l=1", "k=2"])).unwrap();
        assert_eq!(fs.stream.term(1).unwrap(), (BigUint::from(1u32), BigUint::from(2u32)));
        assert_eq!(fs.stream.term(2).unwrap(), (BigUint::from(1u32), BigUint::from(44u32)));
        assert!(family_stream(&spec("tribonacci_cf", &["l=2", "k=2"])).is_err());
    }

    #[test]
    fn rational_19_7_tail() {
        let (a, b) = rational_19_7_terms(1);
        assert_eq!((a, b), (BigInt::from(19), BigInt::zero()));
        let fs = family_stream(&spec("rational_19_7", &[])).unwrap();
        let c = cfcore::convergent(&fs.stream, 50).unwrap().to_rational();
        let err = crate::numeric::rational_to_f64(&(c - q(19, 7))).abs();
        assert!(err < 1e-12);
    }

    #[test]
    fn integer_forms_preserve_values() {
        let cases: &[(&str, &[&str])] = &[
            ("rogers_ramanujan", &["a=2", "b=7", "r=3", "s=5"]),
            ("m_of_q", &["a=2", "b=5"]),
            ("tasoev1", &["u=3/2", "v=2/5", "a=7/2"]),
            ("tasoev2", &["u=1/3", "v=2", "a=5/2", "b=7/3"]),
            ("bundschuh", &["m=2", "s=2", "t=1,3", "u=2,1", "v=5,1", "w=1,3"]),
        ];
        for (name, pairs) in cases {
            let fs = family_stream(&spec(name, pairs)).unwrap();
            let rational = fs.rational.as_ref().unwrap();
            let exact = rational.convergents(60).unwrap();
            for n in [1usize, 2, 3, 17, 60] {
                let c = cfcore::convergent(&fs.stream, n).unwrap().to_rational();
                assert_eq!(c, exact[n], "{name} n={n}");
            }
        }
    }

    #[test]
    fn bundschuh_unit_case() {
        let fs = family_stream(&spec("bundschuh", &["m=1", "s=1"])).unwrap();
        for n in 1..10usize {
            assert_eq!(fs.stream.term(n).unwrap(), (BigUint::one(), BigUint::from(n + 1)));
        }
        assert!(family_stream(&spec("bundschuh", &["s=2", "t=1,2,3"])).is_err());
    }

    #[test]
    fn bounds_by_family() {
        let tm = family_bound(&spec("thue_morse_cf", &[])).unwrap();
        assert!((tm.mu_upper.unwrap() - 5.682).abs() < 1e-3);
        let fib = family_bound(&spec("fibonacci_cf", &[])).unwrap();
        assert!((fib.mu_upper.unwrap() - 2.312).abs() < 1e-3);
        let ft = family_bound(&spec("ft_mixed_cf", &[])).unwrap();
        assert!(!ft.condition_ok());
        let routes = family_routes(&spec("ft_mixed_cf", &[])).unwrap();
        assert!(routes
            .iter()
            .any(|r| r.mu_upper.is_some_and(|m| (m - 3.119).abs() < 1e-3)));
        let tm_routes = family_routes(&spec("thue_morse_cf", &[])).unwrap();
        assert!(tm_routes
            .iter()
            .any(|r| r.mu_upper.is_some_and(|m| (m - 2.414).abs() < 1e-3)));

        assert_eq!(family_bound(&spec("exp_point", &[])).unwrap().mu_upper, Some(2.0));
        assert_eq!(
            family_bound(&spec("rogers_ramanujan", &["a=1", "b=3"]))
                .unwrap()
                .mu_upper,
            Some(2.0)
        );
        let rr = family_bound(&spec("rogers_ramanujan", &["a=2", "b=5"])).unwrap();
        assert!((rr.mu_upper.unwrap() - 8.21).abs() < 0.01);
        assert!(!family_bound(&spec("rogers_ramanujan", &["a=2", "b=4"]))
            .unwrap()
            .condition_ok());
        let t1 = family_bound(&spec("tasoev1", &["a=7/2"])).unwrap().mu_upper.unwrap();
        let expected = 2.0 + 2.0 * 2f64.ln() / (7f64.ln() - 2.0 * 2f64.ln());
        assert!((t1 - expected).abs() < 1e-12);
        let t2 = family_bound(&spec("tasoev2", &["a=3", "b=3"])).unwrap();
        assert_eq!(t2.mu_upper, Some(2.0));
        assert_eq!(
            family_bound(&spec("bundschuh", &["m=3", "s=2"])).unwrap().mu_upper,
            Some(2.0)
        );
        assert_eq!(family_bound(&spec("tribonacci_cf", &[])).unwrap().mu_upper, Some(2.0));
        assert!(!family_bound(&spec("rational_19_7", &[])).unwrap().condition_ok());
        let mq = family_bound(&spec("m_of_q", &["a=2", "b=5"]))
            .unwrap()
            .mu_upper
            .unwrap();
        assert!((mq - rr.mu_upper.unwrap()).abs() < 1e-12);
    }
}
