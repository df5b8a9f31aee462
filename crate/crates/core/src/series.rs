//! Exact truncated Laurent series over arbitrary-precision integers.
//!
//! A series stores its `order` (the exponent of the first nonzero term) and an
//! exclusive `precision` bound: every coefficient at an exponent below
//! `precision` is known exactly, and reading a coefficient at or beyond it is
//! a contract violation that panics rather than silently returning zero.
//! Arithmetic never fabricates trailing knowledge — each operation computes
//! the tightest output precision its inputs guarantee.
//!
//! Coefficients are signed big integers; nothing in this module rounds.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision signed integer carrying every coefficient value.
pub type Integer = BigInt;

/// Precision bound for series whose coefficients are known at every exponent
/// (polynomials, constants). Precision arithmetic saturates at this value.
pub const EXACT: i64 = i64::MAX;

fn zero_int() -> &'static Integer {
    static ZERO: OnceLock<Integer> = OnceLock::new();
    ZERO.get_or_init(Integer::zero)
}

/// Ceiling division for i64 with positive divisor, saturating at [`EXACT`].
pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    if a == EXACT {
        return EXACT;
    }
    (a + b - 1).div_euclid(b)
}

static CONV_THRESHOLD: AtomicUsize = AtomicUsize::new(512);

/// Term count above which multiplication switches from schoolbook convolution
/// to the divide-and-conquer path. The fast path is oracle-tested against
/// schoolbook; see the unit and property tests.
pub fn convolution_threshold() -> usize {
    CONV_THRESHOLD.load(AtomicOrdering::Relaxed)
}

pub fn set_convolution_threshold(n: usize) {
    CONV_THRESHOLD.store(n.max(1), AtomicOrdering::Relaxed);
}

/// A truncated Laurent series with exact integer coefficients.
///
/// Canonical form: `coeffs` has nonzero first and last entries and
/// `coeffs[k]` is the coefficient of `q^(order + k)`. The zero series stores
/// no coefficients and sets `order = precision` so the order is never read
/// from it.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    order: i64,
    precision: i64,
    coeffs: Vec<Integer>,
}

impl LaurentSeries {
    /// Builds a series from the coefficient of `q^order` onward, dropping
    /// terms at or beyond `precision` and trimming zero ends.
    pub fn new(order: i64, precision: i64, mut coeffs: Vec<Integer>) -> Self {
        if precision < EXACT {
            let keep = (precision - order).max(0) as usize;
            coeffs.truncate(keep.min(coeffs.len()));
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Self {
                order: precision,
                precision,
                coeffs: Vec::new(),
            },
            Some(i) => {
                let last = coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
                coeffs.truncate(last + 1);
                if i > 0 {
                    coeffs.drain(..i);
                }
                Self {
                    order: order + i as i64,
                    precision,
                    coeffs,
                }
            }
        }
    }

    pub fn zero(precision: i64) -> Self {
        Self {
            order: precision,
            precision,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::polynomial(&[(0, 1)])
    }

    /// Exactly-known polynomial from (exponent, coefficient) pairs.
    pub fn polynomial(terms: &[(i64, i64)]) -> Self {
        if terms.is_empty() {
            return Self::zero(EXACT);
        }
        let order = terms.iter().map(|&(e, _)| e).min().unwrap();
        let top = terms.iter().map(|&(e, _)| e).max().unwrap();
        let mut coeffs = vec![Integer::zero(); (top - order + 1) as usize];
        for &(e, c) in terms {
            coeffs[(e - order) as usize] += c;
        }
        Self::new(order, EXACT, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the first nonzero term; `None` for the zero series.
    pub fn order(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.order)
        }
    }

    /// Exclusive exponent bound below which all coefficients are known.
    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// First possibly-unknown exponent: the order for nonzero series and the
    /// precision bound for the zero series. Drives precision contracts.
    fn effective_order(&self) -> i64 {
        self.order
    }

    /// The coefficient of `q^e`.
    ///
    /// Panics if `e >= precision`: such a request asks for a value the series
    /// does not carry, which is a bug at the call site, not a zero.
    pub fn coeff(&self, e: i64) -> &Integer {
        assert!(
            e < self.precision,
            "coefficient of q^{e} requested beyond series precision {}",
            self.precision
        );
        if self.is_zero() || e < self.order {
            return zero_int();
        }
        let idx = e - self.order;
        self.coeffs.get(idx as usize).unwrap_or_else(|| zero_int())
    }

    /// Stored nonzero terms as (exponent, coefficient) pairs, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Integer)> {
        let order = self.order;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (order + k as i64, c))
    }

    pub fn truncated(&self, precision: i64) -> Self {
        if precision >= self.precision {
            return self.clone();
        }
        Self::new(self.order, precision, self.coeffs.clone())
    }

    /// True when the two series agree on every exponent both know about.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let prec = self.precision.min(other.precision);
        self.truncated(prec) == other.truncated(prec)
    }

    /// Coefficientwise sum; precision is the minimum of the inputs'.
    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        if self.is_zero() {
            return other.truncated(precision);
        }
        if other.is_zero() {
            return self.truncated(precision);
        }
        let order = self.order.min(other.order);
        let top = (self.order + self.coeffs.len() as i64)
            .max(other.order + other.coeffs.len() as i64)
            .min(precision);
        if top <= order {
            return Self::zero(precision);
        }
        let mut coeffs = vec![Integer::zero(); (top - order) as usize];
        for (e, c) in self.terms().chain(other.terms()) {
            if e < precision {
                coeffs[(e - order) as usize] += c;
            }
        }
        Self::new(order, precision, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self {
            order: self.order,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Integer) -> Self {
        if c.is_zero() {
            return Self::zero(self.precision);
        }
        Self {
            order: self.order,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Divides every coefficient by `d`, failing on the first remainder.
    pub fn div_exact(&self, d: &Integer) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            if (c % d).is_zero() {
                coeffs.push(c / d);
            } else {
                return Err(Error::NonDivisibleCoefficient {
                    exponent: self.order + k as i64,
                    divisor: d.clone(),
                });
            }
        }
        Ok(Self {
            order: self.order,
            precision: self.precision,
            coeffs,
        })
    }

    /// Multiplies by `q^d`.
    pub fn shift(&self, d: i64) -> Self {
        let precision = if self.precision == EXACT {
            EXACT
        } else {
            self.precision.saturating_add(d)
        };
        Self {
            order: self.order.saturating_add(d),
            precision,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Cauchy product. Output precision is
    /// `min(prec(a) + ord(b), prec(b) + ord(a))`, the tightest bound the
    /// unknown tails allow.
    pub fn mul(&self, other: &Self) -> Self {
        let precision = if self.precision == EXACT && other.precision == EXACT {
            EXACT
        } else {
            self.precision
                .saturating_add(other.effective_order())
                .min(other.precision.saturating_add(self.effective_order()))
        };
        if self.is_zero() || other.is_zero() {
            return Self::zero(precision);
        }
        let order = self.order + other.order;
        let out_len = if precision == EXACT {
            self.coeffs.len() + other.coeffs.len() - 1
        } else {
            let by_precision = (precision - order).max(0) as usize;
            by_precision.min(self.coeffs.len() + other.coeffs.len() - 1)
        };
        if out_len == 0 {
            return Self::zero(precision);
        }
        let coeffs = convolve(&self.coeffs, &other.coeffs, out_len);
        Self::new(order, precision, coeffs)
    }

    /// `self^m` by repeated squaring; `m = 0` yields the exact constant 1.
    pub fn pow(&self, m: u64) -> Self {
        if m == 0 {
            return Self::one();
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = m;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        result.unwrap()
    }

    /// Multiplicative inverse through `target_precision`.
    ///
    /// The leading coefficient must be ±1 — that is exactly the condition for
    /// the inverse to stay integral. Needs input precision at least
    /// `target_precision + 2·order`.
    pub fn invert(&self, target_precision: i64) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvertZeroSeries);
        }
        let lead = &self.coeffs[0];
        if !num_traits::One::is_one(lead.magnitude()) {
            return Err(Error::NonUnitLeadingCoefficient { lead: lead.clone() });
        }
        let needed = target_precision.saturating_add(2 * self.order);
        if self.precision < needed {
            return Err(Error::InsufficientPrecision {
                context: "series inversion",
                needed,
                available: self.precision,
            });
        }
        let out_order = -self.order;
        let n_terms = target_precision.saturating_sub(out_order);
        if n_terms <= 0 {
            return Ok(Self::zero(target_precision));
        }
        let lead_is_one = lead.is_positive();
        let mut out: Vec<Integer> = Vec::with_capacity(n_terms as usize);
        out.push(lead.clone());
        for k in 1..n_terms as usize {
            let mut s = Integer::zero();
            let imax = k.min(self.coeffs.len() - 1);
            for i in 1..=imax {
                if !self.coeffs[i].is_zero() {
                    s += &self.coeffs[i] * &out[k - i];
                }
            }
            out.push(if lead_is_one { -s } else { s });
        }
        Ok(Self::new(out_order, target_precision, out))
    }

    /// The `U_p` coefficient extraction: output coefficient at `n` is the
    /// input coefficient at `p·n`. Order and precision divide by `p`,
    /// rounding up — exactly the `n` with `p·n < precision` survive.
    pub fn u_p(&self, p: u64) -> Self {
        debug_assert!(p >= 2, "U_p needs a prime p >= 2");
        let p = p as i64;
        let precision = ceil_div(self.precision, p);
        if self.is_zero() {
            return Self::zero(precision);
        }
        let order = ceil_div(self.order, p);
        let top = ceil_div(self.order + self.coeffs.len() as i64, p);
        if top <= order {
            return Self::zero(precision);
        }
        let mut coeffs = vec![Integer::zero(); (top - order) as usize];
        for (e, c) in self.terms() {
            if e.rem_euclid(p) == 0 {
                coeffs[(e / p - order) as usize] = c.clone();
            }
        }
        Self::new(order, precision, coeffs)
    }

    /// Substitutes the series variable by its negative: the coefficient at
    /// exponent `e` picks up a factor `(-1)^e`.
    pub fn substitute_neg(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if (self.order + k as i64).rem_euclid(2) == 1 {
                    -c
                } else {
                    c.clone()
                }
            })
            .collect();
        Self {
            order: self.order,
            precision: self.precision,
            coeffs,
        }
    }

    /// Substitutes `q -> q^k`, stretching every exponent by `k`. All
    /// exponents that are not multiples of `k` are known to be zero, so the
    /// precision bound scales to `k·precision`.
    pub fn dilate(&self, k: i64) -> Self {
        assert!(k >= 1);
        let precision = self.precision.saturating_mul(k);
        if self.is_zero() {
            return Self::zero(precision);
        }
        let mut coeffs = vec![Integer::zero(); (self.coeffs.len() - 1) * k as usize + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[i * k as usize] = c.clone();
            }
        }
        Self {
            order: self.order * k,
            precision,
            coeffs,
        }
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (shown, (e, c)) in self.terms().enumerate() {
            if shown == 8 {
                write!(f, " + ...")?;
                break;
            }
            any = true;
            let mag = if shown == 0 {
                c.to_string()
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
                c.magnitude().to_string()
            };
            match e {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}*q")?,
                _ => write!(f, "{mag}*q^{e}")?,
            }
        }
        if !any {
            write!(f, "0")?;
        }
        if self.precision != EXACT {
            write!(f, " + O(q^{})", self.precision)?;
        }
        Ok(())
    }
}

fn serde_err<E: serde::de::Error>(msg: String) -> E {
    E::custom(msg)
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: i64,
    precision: i64,
    coeffs: Vec<String>,
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            order: self.order,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        let mut coeffs = Vec::with_capacity(repr.coeffs.len());
        for s in &repr.coeffs {
            coeffs.push(
                s.parse::<Integer>()
                    .map_err(|e| serde_err(format!("bad coefficient {s:?}: {e}")))?,
            );
        }
        Ok(LaurentSeries::new(repr.order, repr.precision, coeffs))
    }
}

/// Truncated product of two coefficient slices, `out_len` terms.
///
/// Below the threshold this is schoolbook convolution. Above it, inputs with
/// any negative coefficient go through Karatsuba on the coefficient slices;
/// all-nonnegative inputs (the φ-power ladder, overwhelmingly the hot case)
/// are packed into two big naturals and multiplied once, delegating the
/// divide-and-conquer to the big-integer kernel. Every path is exact and
/// oracle-tested against schoolbook.
fn convolve(a: &[Integer], b: &[Integer], out_len: usize) -> Vec<Integer> {
    // terms at index >= out_len cannot reach any retained output index
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    let threshold = convolution_threshold();
    if a.len().min(b.len()) <= threshold {
        return schoolbook(a, b, out_len);
    }
    if a.iter().all(|c| !c.is_negative()) && b.iter().all(|c| !c.is_negative()) {
        return kronecker_nonneg(a, b, out_len);
    }
    let mut full = karatsuba(a, b, threshold);
    full.truncate(out_len);
    full
}

/// Packed-evaluation product of slices with nonnegative coefficients:
/// evaluate both at 2^(8·digit_bytes), multiply, and read the convolution
/// back off the byte string. The digit width bounds every output coefficient,
/// so digits never carry into each other.
fn kronecker_nonneg(a: &[Integer], b: &[Integer], out_len: usize) -> Vec<Integer> {
    let max_bits = |s: &[Integer]| s.iter().map(|c| c.bits()).max().unwrap_or(0);
    let count = a.len().min(b.len()) as u64;
    let digit_bits = max_bits(a) + max_bits(b) + (64 - count.leading_zeros() as u64) + 1;
    let digit_bytes = digit_bits.div_ceil(8) as usize;

    let pack = |s: &[Integer]| -> num_bigint::BigUint {
        let mut buf = vec![0u8; s.len() * digit_bytes];
        for (i, c) in s.iter().enumerate() {
            if !c.is_zero() {
                let bytes = c.magnitude().to_bytes_le();
                buf[i * digit_bytes..i * digit_bytes + bytes.len()].copy_from_slice(&bytes);
            }
        }
        num_bigint::BigUint::from_bytes_le(&buf)
    };

    let product = pack(a) * pack(b);
    let bytes = product.to_bytes_le();
    let out_len = out_len.min(a.len() + b.len() - 1);
    (0..out_len)
        .map(|i| {
            let start = i * digit_bytes;
            if start >= bytes.len() {
                Integer::zero()
            } else {
                let end = (start + digit_bytes).min(bytes.len());
                Integer::from(num_bigint::BigUint::from_bytes_le(&bytes[start..end]))
            }
        })
        .collect()
}

fn schoolbook(a: &[Integer], b: &[Integer], out_len: usize) -> Vec<Integer> {
    let out_len = out_len.min(a.len() + b.len() - 1);
    let mut out = vec![Integer::zero(); out_len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() || i >= out_len {
            continue;
        }
        for (j, bj) in b.iter().take(out_len - i).enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn add_halves(lo: &[Integer], hi: &[Integer]) -> Vec<Integer> {
    let mut out = Vec::with_capacity(lo.len().max(hi.len()));
    for k in 0..lo.len().max(hi.len()) {
        let mut c = Integer::zero();
        if k < lo.len() {
            c += &lo[k];
        }
        if k < hi.len() {
            c += &hi[k];
        }
        out.push(c);
    }
    out
}

fn accumulate(out: &mut [Integer], offset: usize, part: Vec<Integer>) {
    for (k, c) in part.into_iter().enumerate() {
        if !c.is_zero() {
            out[offset + k] += c;
        }
    }
}

fn sub_in_place(target: &mut Vec<Integer>, other: &[Integer]) {
    if target.len() < other.len() {
        target.resize(other.len(), Integer::zero());
    }
    for (t, o) in target.iter_mut().zip(other) {
        *t -= o;
    }
}

/// Full Karatsuba product (length `a.len() + b.len() - 1`). Large splits run
/// their halves on rayon; the result is bit-identical either way since all
/// arithmetic is exact.
fn karatsuba(a: &[Integer], b: &[Integer], threshold: usize) -> Vec<Integer> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= threshold {
        return schoolbook(a, b, usize::MAX);
    }
    let m = a.len().max(b.len()) / 2;
    let (a0, a1) = a.split_at(m.min(a.len()));
    let (b0, b1) = b.split_at(m.min(b.len()));
    let parallel = a.len().max(b.len()) >= 2048;
    let (z0, z2) = if parallel {
        rayon::join(
            || karatsuba(a0, b0, threshold),
            || karatsuba(a1, b1, threshold),
        )
    } else {
        (karatsuba(a0, b0, threshold), karatsuba(a1, b1, threshold))
    };
    let sa = add_halves(a0, a1);
    let sb = add_halves(b0, b1);
    let mut z1 = karatsuba(&sa, &sb, threshold);
    sub_in_place(&mut z1, &z0);
    sub_in_place(&mut z1, &z2);
    let mut out = vec![Integer::zero(); a.len() + b.len() - 1];
    accumulate(&mut out, 0, z0);
    accumulate(&mut out, m, z1);
    if !z2.is_empty() {
        accumulate(&mut out, 2 * m, z2);
    }
    out
}

/// 2-adic valuation of an integer: the largest `k` with `2^k` dividing it.
/// By convention `nu_2(0)` is infinite, which satisfies every bound.
pub fn two_adic_valuation(x: &Integer) -> Valuation {
    match x.trailing_zeros() {
        None => Valuation::Infinite,
        Some(k) => Valuation::Finite(k),
    }
}

/// A 2-adic valuation: a nonnegative integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    /// Whether the valuation meets a (possibly negative) lower bound.
    pub fn satisfies(self, bound: i64) -> bool {
        match self {
            Valuation::Infinite => true,
            Valuation::Finite(v) => i64::try_from(v).map_or(true, |v| v >= bound),
        }
    }

    /// Whether the bound is attained exactly (never true for infinity).
    pub fn equals(self, bound: i64) -> bool {
        matches!(self, Valuation::Finite(v) if i64::try_from(v) == Ok(bound))
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => serializer.serialize_u64(*v),
            Valuation::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Valuation::Finite(v)),
            Repr::Text(s) if s == "inf" => Ok(Valuation::Infinite),
            Repr::Text(s) => Err(serde_err(format!("bad valuation {s:?}"))),
        }
    }
}
