//! Eventually periodic binary expansions and the Takagi superdifferential formula.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::DerivativeError;
use crate::numerics::{RatInterval, Rational};

/// `x = Σ ε_n 2^{-n}` written as a finite prefix followed by a repeating block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryExpansion {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl BinaryExpansion {
    pub fn new(prefix: Vec<u8>, period: Vec<u8>) -> Result<Self, DerivativeError> {
        if period.is_empty() {
            return Err(DerivativeError::BadExpansion("the repeating block is empty".into()));
        }
        if prefix.iter().chain(&period).any(|&d| d > 1) {
            return Err(DerivativeError::BadExpansion("digits must be 0 or 1".into()));
        }
        Ok(BinaryExpansion { prefix, period })
    }

    /// Expansion of a rational in `[0, 1)`; dyadic values end in a repeating `0`.
    pub fn of(x: &Rational) -> Result<Self, DerivativeError> {
        if x.is_negative() || x >= &Rational::one() {
            return Err(DerivativeError::BadExpansion(format!("{x} is outside [0, 1)")));
        }
        let den = x.denom().clone();
        let mut rem = x.numer().clone();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        while !seen.contains_key(&rem) {
            seen.insert(rem.clone(), digits.len());
            rem *= 2;
            if rem >= den {
                digits.push(1);
                rem -= &den;
            } else {
                digits.push(0);
            }
        }
        let start = seen[&rem];
        let period = digits.split_off(start);
        BinaryExpansion::new(digits, period)
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// `ε_n`, indexed from 1.
    pub fn digit(&self, n: usize) -> u8 {
        assert!(n >= 1, "digits are indexed from 1");
        let i = n - 1;
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn value(&self) -> Rational {
        let half = Rational::ratio(1, 2);
        let mut head = Rational::zero();
        for (i, &d) in self.prefix.iter().enumerate() {
            if d == 1 {
                head += half.pow(i as i32 + 1);
            }
        }
        let len = self.period.len() as i32;
        let mut block = Rational::zero();
        for (i, &d) in self.period.iter().enumerate() {
            if d == 1 {
                block += half.pow(i as i32 + 1);
            }
        }
        let repeat = block / (Rational::one() - half.pow(len));
        head + repeat * half.pow(self.prefix.len() as i32)
    }

    /// Whether the digits eventually alternate `1010…`.
    pub fn has_alternating_tail(&self) -> bool {
        let p = &self.period;
        p.len().is_multiple_of(2) && (0..p.len()).all(|i| p[i] != p[(i + 1) % p.len()])
    }

    /// Least `m ≥ 1` with `ε_n + ε_{n+1} = 1` for every `n > m`.
    pub fn alternation_start(&self) -> Option<usize> {
        if !self.has_alternating_tail() {
            return None;
        }
        let horizon = self.prefix.len() + self.period.len() + 1;
        let last_bad = (1..=horizon).filter(|&n| self.digit(n) + self.digit(n + 1) != 1).max();
        Some(last_bad.unwrap_or(1).max(1))
    }
}

impl fmt::Display for BinaryExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prefix {
            write!(f, "{d}")?;
        }
        write!(f, "(")?;
        for d in &self.period {
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Accepts `11010(10)`, `0.11010(10)` or `(01)`.
impl FromStr for BinaryExpansion {
    type Err = DerivativeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let s = s.strip_prefix("0.").unwrap_or(s);
        let bad = || DerivativeError::BadExpansion(format!("expected digits followed by a (block), got {s:?}"));
        let open = s.find('(').ok_or_else(bad)?;
        let body = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let digits = |t: &str| -> Result<Vec<u8>, DerivativeError> {
            t.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(bad()),
                })
                .collect()
        };
        BinaryExpansion::new(digits(&s[..open])?, digits(body)?)
    }
}

/// `m - 2Σ_{k≤m} ε_k + [-1, 0]` if `ε_{m+1} = 1`, else `+ [0, 1]`, with the least `m`.
///
/// ```
/// use takagi_lab::derivatives::{takagi_superdiff_formula, BinaryExpansion};
///
/// let e: BinaryExpansion = "11010(10)".parse().unwrap();
/// let i = takagi_superdiff_formula(&e).unwrap();
/// assert_eq!((i.lo().to_string(), i.hi().to_string()), ("-2".to_string(), "-1".to_string()));
/// ```
pub fn takagi_superdiff_formula(e: &BinaryExpansion) -> Result<RatInterval, DerivativeError> {
    let m = e
        .alternation_start()
        .ok_or_else(|| DerivativeError::FormulaInapplicable(format!("{e} does not end in an alternating block")))?;
    takagi_superdiff_formula_at(e, m)
}

/// The same formula evaluated at a chosen `m` past the alternation start.
pub fn takagi_superdiff_formula_at(e: &BinaryExpansion, m: usize) -> Result<RatInterval, DerivativeError> {
    let start = e
        .alternation_start()
        .ok_or_else(|| DerivativeError::FormulaInapplicable(format!("{e} does not end in an alternating block")))?;
    if m < start {
        return Err(DerivativeError::FormulaInapplicable(format!(
            "m = {m} is below the alternation start {start}"
        )));
    }
    let ones: i64 = (1..=m).map(|k| e.digit(k) as i64).sum();
    let base = Rational::from(m.to_i64().expect("m fits") - 2 * ones);
    let offset = if e.digit(m + 1) == 1 {
        RatInterval::new(Rational::from(-1), Rational::zero()).expect("ordered")
    } else {
        RatInterval::new(Rational::zero(), Rational::one()).expect("ordered")
    };
    Ok(offset.translate(&base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn is_dyadic(x: &Rational) -> bool {
        let mut d = x.denom().clone();
        while (&d % 2u32).is_zero() {
            d /= 2;
        }
        d.is_one()
    }

    #[test]
    fn values_and_parsing() {
        let e: BinaryExpansion = "11010(10)".parse().unwrap();
        assert_eq!(e.value(), q("5/6"));
        assert_eq!("(01)".parse::<BinaryExpansion>().unwrap().value(), q("1/3"));
        assert_eq!("0.(10)".parse::<BinaryExpansion>().unwrap().value(), q("2/3"));
        assert_eq!("1(0)".parse::<BinaryExpansion>().unwrap().value(), q("1/2"));
        assert!("12(0)".parse::<BinaryExpansion>().is_err());
        assert!("101".parse::<BinaryExpansion>().is_err());
        assert_eq!(e.to_string(), "11010(10)");
    }

    #[test]
    fn expansion_of_rationals_round_trips() {
        for s in ["5/6", "1/3", "2/3", "1/7", "3/8", "0", "11/12", "1/10"] {
            let x = q(s);
            assert_eq!(BinaryExpansion::of(&x).unwrap().value(), x, "{s}");
        }
        assert!(BinaryExpansion::of(&q("1")).is_err());
        assert!(is_dyadic(&q("3/8")) && !is_dyadic(&q("1/3")));
    }

    #[test]
    fn alternation_start_is_minimal() {
        let cases = [
            ("11010(10)", 1),
            ("(01)", 1),
            ("(10)", 1),
            ("0011(01)", 3),
            ("111(10)", 3),
        ];
        for (s, m) in cases {
            let e: BinaryExpansion = s.parse().unwrap();
            assert_eq!(e.alternation_start(), Some(m), "{s}");
        }
        assert_eq!("(011)".parse::<BinaryExpansion>().unwrap().alternation_start(), None);
        assert_eq!("1(0)".parse::<BinaryExpansion>().unwrap().alternation_start(), None);
    }

    #[test]
    fn formula_values() {
        let f = |s: &str| takagi_superdiff_formula(&s.parse().unwrap()).unwrap();
        assert_eq!(f("11010(10)"), RatInterval::new(q("-2"), q("-1")).unwrap());
        assert_eq!(f("(01)"), RatInterval::new(q("0"), q("1")).unwrap());
        assert_eq!(f("(10)"), RatInterval::new(q("-1"), q("0")).unwrap());
        assert!(matches!(
            takagi_superdiff_formula(&"1(0)".parse().unwrap()),
            Err(DerivativeError::FormulaInapplicable(_))
        ));
    }

    #[test]
    fn formula_is_invariant_in_m_and_has_unit_width() {
        for s in ["11010(10)", "(01)", "0011(01)", "111(10)", "10(0101)"] {
            let e: BinaryExpansion = s.parse().unwrap();
            let base = takagi_superdiff_formula(&e).unwrap();
            assert_eq!(base.width(), Rational::one());
            assert!(base.lo().is_integer());
            for m in e.alternation_start().unwrap()..20 {
                assert_eq!(takagi_superdiff_formula_at(&e, m).unwrap(), base, "{s} m={m}");
            }
        }
    }
}
