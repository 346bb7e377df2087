//! Exact rational scalars and closed rational intervals.
//!
//! Every point, weight, gap and quotient in the crate is a [`Rational`]. There is
//! no floating point anywhere in the core; [`Rational::to_f64`] exists only for
//! display-side emitters such as SVG plots.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {input:?} as a rational: {reason}")]
    Parse { input: String, reason: &'static str },
    #[error("empty interval: lower end {lo} exceeds upper end {hi}")]
    InvertedInterval { lo: Rational, hi: Rational },
}

/// Exact arbitrary-precision rational in canonical form (reduced, positive denominator).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den` in lowest terms.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, NumericsError> {
        let den = den.into();
        if den.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Literal helper for small constants. Panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("literal rational with zero denominator")
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn ceil(&self) -> BigInt {
        -((-self.0.numer()).div_floor(self.0.denom()))
    }

    /// `x - floor(x)`, always in `[0, 1)`.
    pub fn fract(&self) -> Self {
        self - &Rational::from_integer(self.floor())
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self, NumericsError> {
        if other.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    /// Integer power; negative exponents invert (panics on `0^-k`).
    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn midpoint(&self, other: &Rational) -> Self {
        (self + other) / Rational::from_integer(2)
    }

    /// Lossy conversion for display emitters only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Decimal rendering with `digits` significant digits, for plots and logs.
    pub fn to_sig_digits(&self, digits: usize) -> String {
        let v = self.to_f64();
        if v == 0.0 {
            return "0".to_string();
        }
        let s = format!("{:.*e}", digits.saturating_sub(1), v);
        // Re-render through f64 parsing so that small exponents print positionally.
        let parsed: f64 = s.parse().unwrap_or(v);
        let out = format!("{}", parsed);
        out
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_error(input: &str, reason: &'static str) -> NumericsError {
    NumericsError::Parse {
        input: input.to_string(),
        reason,
    }
}

fn parse_bigint(s: &str, input: &str) -> Result<BigInt, NumericsError> {
    if s.is_empty() {
        return Err(parse_error(input, "missing digits"));
    }
    BigInt::from_str(s).map_err(|_| parse_error(input, "invalid integer"))
}

impl FromStr for Rational {
    type Err = NumericsError;

    /// Accepts `p`, `p/q`, decimals such as `-0.125`, and scientific forms such as `1e-6`.
    /// The Unicode minus sign is accepted as well.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let cleaned = input.trim().replace('\u{2212}', "-");
        let s = cleaned.as_str();
        if s.is_empty() {
            return Err(parse_error(input, "empty string"));
        }
        if let Some((p, q)) = s.split_once('/') {
            let num = parse_bigint(p.trim(), input)?;
            let den = parse_bigint(q.trim(), input)?;
            return Rational::new(num, den);
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = s[pos + 1..]
                    .parse()
                    .map_err(|_| parse_error(input, "invalid exponent"))?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (negative, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(parse_error(input, "missing digits"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(parse_error(input, "invalid decimal"));
        }
        let digits = format!("{}{}", int_part, frac_part);
        let num = parse_bigint(&digits, input)?;
        let scale = exponent - frac_part.len() as i32;
        let ten = Rational::from_integer(10);
        let mut value = Rational::from_integer(num) * ten.pow(scale);
        if negative {
            value = -value;
        }
        Ok(value)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Closed interval `[lo, hi]` with exact rational ends.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatInterval {
    lo: Rational,
    hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumericsError> {
        if lo > hi {
            return Err(NumericsError::InvertedInterval { lo, hi });
        }
        Ok(RatInterval { lo, hi })
    }

    /// The interval spanned by two values in either order.
    pub fn spanning(a: Rational, b: Rational) -> Self {
        if a <= b {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    /// `center ± radius` (radius taken in absolute value).
    pub fn around(center: &Rational, radius: &Rational) -> Self {
        let r = radius.abs();
        RatInterval {
            lo: center - &r,
            hi: center + &r,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `-[a, b] = [-b, -a]`.
    pub fn neg(&self) -> Self {
        RatInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn translate(&self, c: &Rational) -> Self {
        RatInterval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    /// Intersection; `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &RatInterval) -> Option<Self> {
        let lo = std::cmp::max(&self.lo, &other.lo).clone();
        let hi = std::cmp::min(&self.hi, &other.hi).clone();
        if lo <= hi {
            Some(RatInterval { lo, hi })
        } else {
            None
        }
    }

    pub fn hull(&self, other: &RatInterval) -> Self {
        RatInterval {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
        }
    }

    pub fn add(&self, other: &RatInterval) -> Self {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &RatInterval) -> Self {
        RatInterval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::spanning(&self.lo * c, &self.hi * c)
    }

    /// Distance from `x` to the interval (zero when contained).
    pub fn distance_to(&self, x: &Rational) -> Rational {
        if x < &self.lo {
            &self.lo - x
        } else if x > &self.hi {
            x - &self.hi
        } else {
            Rational::zero()
        }
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rational extended by ±∞, used for liminf/limsup of divergent partial sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Extended {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Extended::NegInf => Extended::PosInf,
            Extended::PosInf => Extended::NegInf,
            Extended::Finite(v) => Extended::Finite(-v),
        }
    }

    pub fn add_finite(&self, c: &Rational) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(v + c),
            other => other.clone(),
        }
    }

    /// Sign of the value: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self {
            Extended::NegInf => -1,
            Extended::PosInf => 1,
            Extended::Finite(v) => v.signum(),
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        use Extended::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => write!(f, "-inf"),
            Extended::PosInf => write!(f, "+inf"),
            Extended::Finite(v) => write!(f, "{}", v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(Rational::new(2, 4).unwrap().to_string(), "1/2");
        assert_eq!(Rational::new(3, -6).unwrap().to_string(), "-1/2");
        let z = Rational::new(0, 5).unwrap();
        assert_eq!(z.to_string(), "0");
        assert_eq!(z.denom(), &BigInt::from(1));
        assert_eq!(Rational::new(1, 0), Err(NumericsError::ZeroDenominator));
        assert_eq!(Rational::from_integer(3).to_string(), "3");
    }

    #[test]
    fn parsing() {
        assert_eq!(q("-1/2"), Rational::ratio(-1, 2));
        assert_eq!(q("\u{2212}1/2"), Rational::ratio(-1, 2));
        assert_eq!(q("0.125"), Rational::ratio(1, 8));
        assert_eq!(q("-1.5"), Rational::ratio(-3, 2));
        assert_eq!(q("1e-6"), Rational::ratio(1, 1_000_000));
        assert_eq!(q("2.5E2"), Rational::from_integer(250));
        assert_eq!(q(".5"), Rational::ratio(1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
    }

    #[test]
    fn floor_ceil_fract() {
        assert_eq!(q("7/3").floor(), BigInt::from(2));
        assert_eq!(q("-7/3").floor(), BigInt::from(-3));
        assert_eq!(q("-7/3").ceil(), BigInt::from(-2));
        assert_eq!(q("-7/3").fract(), q("2/3"));
        assert_eq!(q("5").fract(), Rational::zero());
    }

    #[test]
    fn interval_operations() {
        let i = RatInterval::new(q("-2"), q("-1")).unwrap();
        assert_eq!(i.neg(), RatInterval::new(q("1"), q("2")).unwrap());
        let a = RatInterval::new(q("0"), q("1")).unwrap();
        let b = RatInterval::new(q("1"), q("2")).unwrap();
        assert_eq!(a.intersect(&b), Some(RatInterval::point(q("1"))));
        let c = RatInterval::new(q("3"), q("4")).unwrap();
        assert_eq!(a.intersect(&c), None);
        assert_eq!(RatInterval::new(q("1/3"), q("2/3")).unwrap().width(), q("1/3"));
        assert!(RatInterval::new(q("1"), q("0")).is_err());
        assert!(a.contains_interval(&RatInterval::point(q("1/2"))));
        assert_eq!(a.translate(&q("1")), b);
        assert_eq!(a.scale(&q("-2")), RatInterval::new(q("-2"), q("0")).unwrap());
    }

    #[test]
    fn extended_order() {
        let a = Extended::Finite(q("3"));
        assert!(Extended::NegInf < a);
        assert!(a < Extended::PosInf);
        assert_eq!(Extended::PosInf.neg(), Extended::NegInf);
        assert_eq!(a.add_finite(&q("-5")), Extended::Finite(q("-2")));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| Rational::ratio(n, d))
    }

    fn arb_interval() -> impl Strategy<Value = RatInterval> {
        (arb_rational(), arb_rational()).prop_map(|(a, b)| RatInterval::spanning(a, b))
    }

    proptest! {
        #[test]
        fn field_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        }

        #[test]
        fn double_negation(i in arb_interval()) {
            prop_assert_eq!(i.neg().neg(), i);
        }

        #[test]
        fn display_parse_round_trip(a in arb_rational()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }
    }
}
