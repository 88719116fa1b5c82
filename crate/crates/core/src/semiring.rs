//! Scalars of the extended tropical semiring `R ∪ {ε, ε′}`.
//!
//! `ε = -∞` is the zero of max-plus arithmetic and `ε′ = +∞` the zero of
//! min-plus arithmetic. Both are kept as symbolic variants of [`ExtScalar`];
//! no finite sentinel ever stands in for them.
//!
//! | op | meaning | `ε` vs `ε′` |
//! |----|---------|-------------|
//! | [`ExtScalar::oplus`] | max | `ε′` |
//! | [`ExtScalar::oplus_dual`] | min | `ε` |
//! | [`ExtScalar::otimes`] | + | `ε` |
//! | [`ExtScalar::otimes_dual`] | + | `ε′` |
//!
//! A finite value plus an infinity is that infinity under both products.
//!
//! The finite part is any [`Number`]. Arbitrary-size integers ([`Int`]) are
//! the default; [`Rational`] keeps decimal input exact, `i64` is available
//! with checked overflow, and [`Approx`] is a tolerance-compared float that
//! never certifies anything.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Result, TropError};

pub type Int = BigInt;
pub type Rational = BigRational;

/// Default comparison tolerance for [`Approx`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The finite part of an [`ExtScalar`].
pub trait Number:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static
{
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn checked_add(&self, rhs: &Self) -> Option<Self>;
    fn checked_neg(&self) -> Option<Self>;

    fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        self.checked_add(&rhs.checked_neg()?)
    }

    /// Parses a finite literal (no infinities).
    fn parse_literal(token: &str) -> Option<Self>;

    fn is_integer(&self) -> bool;

    /// Approximate value, used only for sizing iteration caps.
    fn to_f64(&self) -> f64;

    /// Smallest positive multiplier making this value an integer, saturated
    /// to `u64`. Used only for sizing iteration caps.
    fn integer_scale(&self) -> u64 {
        1
    }

    /// Replaces the comparison tolerance; exact types ignore it.
    fn with_tolerance(self, _tol: f64) -> Self {
        self
    }

    /// `false` for number types whose comparisons are not exact.
    const CERTIFYING: bool = true;

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Number for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn parse_literal(token: &str) -> Option<Self> {
        is_int_literal(token)
            .then(|| BigInt::from_str(token.strip_prefix('+').unwrap_or(token)).ok())
            .flatten()
    }
    fn is_integer(&self) -> bool {
        true
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::MAX)
    }
}

impl Number for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn parse_literal(token: &str) -> Option<Self> {
        parse_rational(token)
    }
    fn is_integer(&self) -> bool {
        self.is_integer()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::MAX)
    }
    fn integer_scale(&self) -> u64 {
        self.denom().to_u64().unwrap_or(u64::MAX)
    }
}

/// Optional sign followed by at least one ASCII digit.
fn is_int_literal(token: &str) -> bool {
    let digits = token
        .strip_prefix('-')
        .or_else(|| token.strip_prefix('+'))
        .unwrap_or(token);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn parse_rational(token: &str) -> Option<BigRational> {
    let t = token.strip_prefix('+').unwrap_or(token);
    if let Some((num, den)) = t.split_once('/') {
        let num = <BigInt as Number>::parse_literal(num)?;
        if !den.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let den = BigInt::from_str(den).ok()?;
        if den.is_zero() || den.is_negative() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (negative, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let mantissa = BigInt::from_str(format!("{int_part}{frac_part}").trim_start_matches('0'))
        .unwrap_or_else(|_| <BigInt as num_traits::Zero>::zero());
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(mantissa, denom);
    Some(if negative { -value } else { value })
}

impl Number for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        i64::checked_add(*self, *rhs)
    }
    fn checked_neg(&self) -> Option<Self> {
        i64::checked_neg(*self)
    }
    fn parse_literal(token: &str) -> Option<Self> {
        is_int_literal(token)
            .then(|| token.strip_prefix('+').unwrap_or(token).parse().ok())
            .flatten()
    }
    fn is_integer(&self) -> bool {
        true
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

/// Float with tolerance-based comparison. Two values compare equal when they
/// differ by at most the larger of their tolerances.
///
/// Results computed with `Approx` are not certificates: equality is not
/// transitive and rounding accumulates.
#[derive(Debug, Clone, Copy)]
pub struct Approx {
    pub value: f64,
    pub tol: f64,
}

impl Approx {
    pub fn new(value: f64) -> Self {
        Approx {
            value,
            tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(value: f64, tol: f64) -> Self {
        Approx { value, tol }
    }
}

impl PartialEq for Approx {
    fn eq(&self, other: &Self) -> bool {
        (self.value - other.value).abs() <= self.tol.max(other.tol)
    }
}

impl PartialOrd for Approx {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else {
            self.value.partial_cmp(&other.value)
        }
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Number for Approx {
    const CERTIFYING: bool = false;

    fn zero() -> Self {
        Approx::new(0.0)
    }
    fn from_i64(v: i64) -> Self {
        Approx::new(v as f64)
    }
    fn checked_add(&self, rhs: &Self) -> Option<Self> {
        let v = self.value + rhs.value;
        v.is_finite()
            .then(|| Approx::with_tolerance(v, self.tol.max(rhs.tol)))
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(Approx::with_tolerance(-self.value, self.tol))
    }
    fn parse_literal(token: &str) -> Option<Self> {
        let lower = token.to_ascii_lowercase();
        if lower.contains("inf") || lower.contains("nan") {
            return None;
        }
        let v: f64 = token.parse().ok()?;
        v.is_finite().then(|| Approx::new(v))
    }
    fn is_integer(&self) -> bool {
        self.value.fract() == 0.0
    }
    fn to_f64(&self) -> f64 {
        self.value
    }
    fn with_tolerance(self, tol: f64) -> Self {
        Approx::with_tolerance(self.value, tol)
    }
}

/// Element of `R ∪ {ε, ε′}` ordered as `ε < finite < ε′`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtScalar<N = Int> {
    /// `ε = -∞`
    NegInf,
    Finite(N),
    /// `ε′ = +∞`
    PosInf,
}

impl<N: Number> ExtScalar<N> {
    pub fn finite(v: N) -> Self {
        ExtScalar::Finite(v)
    }

    pub fn int(v: i64) -> Self {
        ExtScalar::Finite(N::from_i64(v))
    }

    /// The multiplicative unit `e = 0`.
    pub fn unit() -> Self {
        ExtScalar::Finite(N::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&N> {
        match self {
            ExtScalar::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ExtScalar::NegInf => 0,
            ExtScalar::Finite(_) => 1,
            ExtScalar::PosInf => 2,
        }
    }

    /// Total comparison; incomparable finite values (never produced by the
    /// shipped number types) count as equal.
    pub fn ext_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    /// `a ⊕ b = max(a, b)`
    pub fn oplus(&self, other: &Self) -> Self {
        if self.ext_cmp(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// `a ⊕′ b = min(a, b)`
    pub fn oplus_dual(&self, other: &Self) -> Self {
        if self.ext_cmp(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// `a ⊗ b = a + b` with `ε ⊗ ε′ = ε`.
    pub fn otimes(&self, other: &Self) -> Result<Self> {
        use ExtScalar::*;
        Ok(match (self, other) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(
                a.checked_add(b)
                    .ok_or(TropError::Overflow { op: "otimes" })?,
            ),
        })
    }

    /// `a ⊗′ b = a + b` with `ε ⊗′ ε′ = ε′`.
    pub fn otimes_dual(&self, other: &Self) -> Result<Self> {
        use ExtScalar::*;
        Ok(match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => Finite(
                a.checked_add(b)
                    .ok_or(TropError::Overflow { op: "otimes_dual" })?,
            ),
        })
    }

    /// Negation; swaps `ε` and `ε′`.
    pub fn neg(&self) -> Result<Self> {
        use ExtScalar::*;
        Ok(match self {
            NegInf => PosInf,
            PosInf => NegInf,
            Finite(a) => Finite(a.checked_neg().ok_or(TropError::Overflow { op: "neg" })?),
        })
    }

    /// Parses `-inf`, `inf`, `+inf` or a finite literal.
    pub fn parse_token(token: &str) -> Option<Self> {
        match token.to_ascii_lowercase().as_str() {
            "-inf" => Some(ExtScalar::NegInf),
            "inf" | "+inf" => Some(ExtScalar::PosInf),
            _ => N::parse_literal(token).map(ExtScalar::Finite),
        }
    }
}

impl<N: Number> PartialOrd for ExtScalar<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.partial_cmp(b),
            _ => Some(self.rank().cmp(&other.rank())),
        }
    }
}

impl<N: Number + Eq> Eq for ExtScalar<N> {}

impl<N: Number + Ord> Ord for ExtScalar<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ext_cmp(other)
    }
}

impl<N: Number> From<N> for ExtScalar<N> {
    fn from(v: N) -> Self {
        ExtScalar::Finite(v)
    }
}

impl<N: Number> fmt::Display for ExtScalar<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::NegInf => f.write_str("-inf"),
            ExtScalar::PosInf => f.write_str("inf"),
            ExtScalar::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl<N: Number> FromStr for ExtScalar<N> {
    type Err = TropError;

    fn from_str(s: &str) -> Result<Self> {
        ExtScalar::parse_token(s).ok_or_else(|| TropError::Token {
            line: 1,
            column: 1,
            token: s.to_string(),
        })
    }
}

impl<N: Number> Serialize for ExtScalar<N> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Least common multiple of the integer scales of `values`, saturated.
pub(crate) fn common_scale<'a, N: Number>(values: impl IntoIterator<Item = &'a N>) -> u64 {
    values.into_iter().fold(1u64, |acc, v| {
        let s = v.integer_scale().max(1);
        let l = acc.lcm(&s);
        if l < acc {
            u64::MAX
        } else {
            l
        }
    })
}
