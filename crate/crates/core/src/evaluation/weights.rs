use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{Extended, Rational};

/// Closed-form weight rules.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    Constant(Rational),
    /// `w_{2n} = a`, `w_{2n+1} = -a`.
    Alternating(Rational),
    /// `w_n = c·qⁿ`.
    Geometric {
        c: Rational,
        q: Rational,
    },
    /// `w_0 = 0`, `w_{3k-2} = 1`, `w_{3k-1} = -1`, `w_3 = -1/2`, `w_{3k} = 2^{-k}` for `k > 1`.
    TriplePattern,
    /// Listed values for `n < prefix.len()`, then `then(n)` (absolute index).
    Prefix {
        prefix: Vec<Rational>,
        then: Box<WeightRule>,
    },
    Scaled {
        factor: Rational,
        rule: Box<WeightRule>,
    },
    /// `w_n = rule(n + offset)`; only evaluated where `n + offset ≥ 0`.
    Shifted {
        offset: isize,
        rule: Box<WeightRule>,
    },
}

/// `|w_k| ≤ c·q^{k - from}` for every `k ≥ from`.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub from: usize,
    pub c: Rational,
    pub q: Rational,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("weight rule, column {column}: {message}")]
pub struct WeightParseError {
    pub column: usize,
    pub message: String,
}

/// A weight sequence `w = (w_n)` given by a rule.
///
/// ```
/// use takagi_lab::evaluation::WeightSequence;
/// use takagi_lab::Rational;
///
/// let w: WeightSequence = "prefix [0] then alt 1".parse().unwrap();
/// assert_eq!(w.weight(0), Rational::zero());
/// assert_eq!(w.weight(3), Rational::from(-1));
/// assert!(!w.in_c0());
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    rule: WeightRule,
}

impl WeightSequence {
    pub fn new(rule: WeightRule) -> Self {
        WeightSequence { rule }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(WeightRule::Constant(c))
    }

    pub fn alternating(a: Rational) -> Self {
        Self::new(WeightRule::Alternating(a))
    }

    pub fn geometric(c: Rational, q: Rational) -> Self {
        Self::new(WeightRule::Geometric { c, q })
    }

    pub fn triple_pattern() -> Self {
        Self::new(WeightRule::TriplePattern)
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn prefixed(prefix: Vec<Rational>, then: WeightSequence) -> Self {
        Self::new(WeightRule::Prefix {
            prefix,
            then: Box::new(then.rule),
        })
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn weight(&self, n: usize) -> Rational {
        rule_weight(&self.rule, n as isize)
    }

    /// `Σ_{k=from}^{to} w_k`, zero when `from > to`.
    pub fn sum(&self, from: usize, to: usize) -> Rational {
        (from..=to).map(|k| self.weight(k)).sum()
    }

    pub fn negated(&self) -> Self {
        Self::new(WeightRule::Scaled {
            factor: Rational::from(-1),
            rule: Box::new(self.rule.clone()),
        })
    }

    /// `w'_0 = 0`, `w'_j = w_{j + offset}` for `j ≥ 1`.
    pub fn reindexed(&self, offset: isize) -> Self {
        let shifted = if offset == 0 {
            self.rule.clone()
        } else {
            WeightRule::Shifted {
                offset,
                rule: Box::new(self.rule.clone()),
            }
        };
        Self::new(WeightRule::Prefix {
            prefix: vec![Rational::zero()],
            then: Box::new(shifted),
        })
    }

    pub fn in_c0(&self) -> bool {
        rule_decays(&self.rule)
    }

    pub fn in_l1(&self) -> bool {
        rule_decays(&self.rule)
    }

    pub fn is_zero(&self) -> bool {
        rule_is_zero(&self.rule)
    }

    /// Every weight is `≥ 0`. Conservative: `false` means not certified.
    pub fn is_nonnegative(&self) -> bool {
        rule_nonnegative(&self.rule)
    }

    /// First index with a negative weight among `0..limit`.
    pub fn first_negative(&self, limit: usize) -> Option<usize> {
        (0..limit).find(|&k| self.weight(k).is_negative())
    }

    pub fn majorant(&self) -> Majorant {
        rule_majorant(&self.rule)
    }

    /// Closed-form `liminf` and `limsup` of `Σ_{k=1}^{n} w_k`.
    pub fn partial_sum_limits(&self) -> (Extended, Extended) {
        rule_limits(&self.rule)
    }
}

fn rule_weight(rule: &WeightRule, n: isize) -> Rational {
    assert!(n >= 0, "weight index {n} is negative");
    let n_us = n as usize;
    match rule {
        WeightRule::Constant(c) => c.clone(),
        WeightRule::Alternating(a) => {
            if n % 2 == 0 {
                a.clone()
            } else {
                -a
            }
        }
        WeightRule::Geometric { c, q } => c * &q.pow(n as i32),
        WeightRule::TriplePattern => match (n_us % 3, n_us.div_ceil(3)) {
            _ if n_us == 0 => Rational::zero(),
            (1, _) => Rational::one(),
            (2, _) => Rational::from(-1),
            (_, 1) => Rational::ratio(-1, 2),
            (_, k) => Rational::ratio(1, 2).pow(k as i32),
        },
        WeightRule::Prefix { prefix, then } => match prefix.get(n_us) {
            Some(w) => w.clone(),
            None => rule_weight(then, n),
        },
        WeightRule::Scaled { factor, rule } => factor * &rule_weight(rule, n),
        WeightRule::Shifted { offset, rule } => rule_weight(rule, n + offset),
    }
}

fn rule_decays(rule: &WeightRule) -> bool {
    match rule {
        WeightRule::Constant(c) | WeightRule::Alternating(c) => c.is_zero(),
        WeightRule::Geometric { c, q } => c.is_zero() || q.abs() < Rational::one(),
        WeightRule::TriplePattern => false,
        WeightRule::Prefix { then, .. } => rule_decays(then),
        WeightRule::Scaled { factor, rule } => factor.is_zero() || rule_decays(rule),
        WeightRule::Shifted { rule, .. } => rule_decays(rule),
    }
}

fn rule_is_zero(rule: &WeightRule) -> bool {
    match rule {
        WeightRule::Constant(c) | WeightRule::Alternating(c) => c.is_zero(),
        WeightRule::Geometric { c, .. } => c.is_zero(),
        WeightRule::TriplePattern => false,
        WeightRule::Prefix { prefix, then } => prefix.iter().all(Rational::is_zero) && rule_is_zero(then),
        WeightRule::Scaled { factor, rule } => factor.is_zero() || rule_is_zero(rule),
        WeightRule::Shifted { rule, .. } => rule_is_zero(rule),
    }
}

fn rule_nonnegative(rule: &WeightRule) -> bool {
    match rule {
        WeightRule::Constant(c) => !c.is_negative(),
        WeightRule::Alternating(a) => a.is_zero(),
        WeightRule::Geometric { c, q } => c.is_zero() || (c.is_positive() && !q.is_negative()),
        WeightRule::TriplePattern => false,
        WeightRule::Prefix { prefix, then } => prefix.iter().all(|w| !w.is_negative()) && rule_nonnegative(then),
        WeightRule::Scaled { factor, rule } => {
            factor.is_zero() || rule_is_zero(rule) || (factor.is_positive() && rule_nonnegative(rule))
        }
        WeightRule::Shifted { rule, .. } => rule_nonnegative(rule),
    }
}

fn rule_majorant(rule: &WeightRule) -> Majorant {
    let one = Rational::one();
    match rule {
        WeightRule::Constant(c) | WeightRule::Alternating(c) => Majorant {
            from: 0,
            c: c.abs(),
            q: one,
        },
        WeightRule::Geometric { c, q } => {
            if q.is_zero() {
                // Only w_0 can be non-zero.
                Majorant {
                    from: 0,
                    c: c.abs(),
                    q: Rational::ratio(1, 2),
                }
            } else {
                Majorant {
                    from: 0,
                    c: c.abs(),
                    q: q.abs(),
                }
            }
        }
        WeightRule::TriplePattern => Majorant {
            from: 0,
            c: one.clone(),
            q: one,
        },
        WeightRule::Prefix { prefix, then } => {
            let inner = rule_majorant(then);
            advance(inner, prefix.len())
        }
        WeightRule::Scaled { factor, rule } => {
            let inner = rule_majorant(rule);
            Majorant {
                c: inner.c * factor.abs(),
                ..inner
            }
        }
        WeightRule::Shifted { offset, rule } => {
            let inner = rule_majorant(rule);
            // |w'_n| = |w_{n+o}| ≤ c q^{n+o-f} for n + o ≥ f.
            let from = (inner.from as isize - offset).max(0).max(-offset) as usize;
            let lag = from as isize + offset - inner.from as isize;
            Majorant {
                from,
                c: inner.c * inner.q.pow(lag as i32),
                q: inner.q,
            }
        }
    }
}

fn advance(m: Majorant, from: usize) -> Majorant {
    if from <= m.from {
        return m;
    }
    let c = &m.c * &m.q.pow((from - m.from) as i32);
    Majorant { from, c, q: m.q }
}

/// liminf/limsup of `P(n) = Σ_{k=1}^{n} w_k`.
fn rule_limits(rule: &WeightRule) -> (Extended, Extended) {
    let fin = Extended::Finite;
    let signed_infinity = |c: &Rational| match c.signum() {
        1 => (Extended::PosInf, Extended::PosInf),
        -1 => (Extended::NegInf, Extended::NegInf),
        _ => (fin(Rational::zero()), fin(Rational::zero())),
    };
    match rule {
        WeightRule::Constant(c) => signed_infinity(c),
        WeightRule::Alternating(a) => {
            // P alternates -a, 0.
            let (x, y) = (-a, Rational::zero());
            (fin(std::cmp::min(x.clone(), y.clone())), fin(std::cmp::max(x, y)))
        }
        WeightRule::Geometric { c, q } => {
            let one = Rational::one();
            if c.is_zero() {
                return signed_infinity(c);
            }
            if q.abs() < one {
                let limit = c * q / (&one - q);
                (fin(limit.clone()), fin(limit))
            } else if q == &one {
                signed_infinity(c)
            } else if q == &-one.clone() {
                let (x, y) = (-c, Rational::zero());
                (fin(std::cmp::min(x.clone(), y.clone())), fin(std::cmp::max(x, y)))
            } else if q.is_positive() {
                signed_infinity(c)
            } else {
                (Extended::NegInf, Extended::PosInf)
            }
        }
        // P(3k) = P(3k+2) = -2^{-k}, P(3k+1) = 1 - 2^{-k}.
        WeightRule::TriplePattern => (fin(Rational::zero()), fin(Rational::one())),
        WeightRule::Prefix { prefix, then } => {
            let (lo, hi) = rule_limits(then);
            let adjust: Rational = (1..prefix.len())
                .map(|k| &prefix[k] - &rule_weight(then, k as isize))
                .sum();
            (lo.add_finite(&adjust), hi.add_finite(&adjust))
        }
        WeightRule::Scaled { factor, rule } => {
            let (lo, hi) = rule_limits(rule);
            let scale = |e: &Extended| match e {
                Extended::Finite(v) => fin(v * factor),
                inf if factor.is_positive() => inf.clone(),
                inf => inf.neg(),
            };
            match factor.signum() {
                0 => (fin(Rational::zero()), fin(Rational::zero())),
                1 => (scale(&lo), scale(&hi)),
                _ => (scale(&hi), scale(&lo)),
            }
        }
        WeightRule::Shifted { offset, rule } => {
            let (lo, hi) = rule_limits(rule);
            // Σ_{k=1}^{n} w_{k+o} = P(n+o) - P(o), with P(-1) = -w_0.
            let p_offset: Rational = if *offset >= 0 {
                (1..=*offset).map(|k| rule_weight(rule, k)).sum()
            } else {
                (*offset + 1..=0).map(|k| -rule_weight(rule, k)).sum()
            };
            let shift = -p_offset;
            (lo.add_finite(&shift), hi.add_finite(&shift))
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(&self.rule, f)
    }
}

fn write_rule(rule: &WeightRule, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match rule {
        WeightRule::Constant(c) => write!(f, "const {c}"),
        WeightRule::Alternating(a) => write!(f, "alt {a}"),
        WeightRule::Geometric { c, q } => write!(f, "geom {c} {q}"),
        WeightRule::TriplePattern => f.write_str("triple"),
        WeightRule::Prefix { prefix, then } => {
            let items: Vec<String> = prefix.iter().map(|w| w.to_string()).collect();
            write!(f, "prefix [{}] then ", items.join(", "))?;
            write_rule(then, f)
        }
        WeightRule::Scaled { factor, rule } => {
            write!(f, "scale {factor} ")?;
            write_rule(rule, f)
        }
        WeightRule::Shifted { offset, rule } => {
            write!(f, "shift {offset} ")?;
            write_rule(rule, f)
        }
    }
}

struct RuleParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> RuleParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn error(&self, message: impl Into<String>) -> WeightParseError {
        WeightParseError {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, WeightParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '[' || c == ']' || c == ',')
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error(format!("expected {what}")));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn rational(&mut self, what: &str) -> Result<Rational, WeightParseError> {
        self.skip_ws();
        let start = self.pos;
        let tok = self.word(what)?;
        tok.parse().map_err(|e| WeightParseError {
            column: start + 1,
            message: format!("bad {what} `{tok}`: {e}"),
        })
    }

    fn punct(&mut self, c: char) -> Result<(), WeightParseError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn peek_punct(&mut self, c: char) -> bool {
        self.skip_ws();
        self.text[self.pos..].starts_with(c)
    }

    fn rule(&mut self) -> Result<WeightRule, WeightParseError> {
        self.skip_ws();
        let start = self.pos;
        let head = self.word("weight rule")?;
        Ok(match head {
            "const" => WeightRule::Constant(self.rational("constant")?),
            "alt" => WeightRule::Alternating(self.rational("amplitude")?),
            "geom" => {
                let c = self.rational("coefficient")?;
                let q = self.rational("ratio")?;
                WeightRule::Geometric { c, q }
            }
            "triple" => WeightRule::TriplePattern,
            "prefix" => {
                self.punct('[')?;
                let mut prefix = Vec::new();
                if !self.peek_punct(']') {
                    loop {
                        prefix.push(self.rational("prefix weight")?);
                        if self.peek_punct(',') {
                            self.punct(',')?;
                        } else {
                            break;
                        }
                    }
                }
                self.punct(']')?;
                let kw_at = self.pos;
                if self.word("`then`")? != "then" {
                    self.pos = kw_at;
                    self.skip_ws();
                    return Err(self.error("expected `then`"));
                }
                WeightRule::Prefix {
                    prefix,
                    then: Box::new(self.rule()?),
                }
            }
            "scale" => {
                let factor = self.rational("factor")?;
                WeightRule::Scaled {
                    factor,
                    rule: Box::new(self.rule()?),
                }
            }
            "shift" => {
                self.skip_ws();
                let at = self.pos;
                let tok = self.word("offset")?;
                let offset: isize = tok.parse().map_err(|_| WeightParseError {
                    column: at + 1,
                    message: format!("bad offset `{tok}`"),
                })?;
                if offset < -1 {
                    return Err(WeightParseError {
                        column: at + 1,
                        message: "offset must be at least -1".into(),
                    });
                }
                WeightRule::Shifted {
                    offset,
                    rule: Box::new(self.rule()?),
                }
            }
            other => {
                return Err(WeightParseError {
                    column: start + 1,
                    message: format!("unknown weight rule `{other}`"),
                })
            }
        })
    }
}

impl FromStr for WeightSequence {
    type Err = WeightParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = RuleParser { text: s, pos: 0 };
        let rule = p.rule()?;
        p.skip_ws();
        if p.pos < s.len() {
            return Err(p.error("trailing input"));
        }
        let w = WeightSequence { rule };
        if let WeightRule::Shifted { offset: -1, .. } = &w.rule {
            return Err(WeightParseError {
                column: 1,
                message: "shift -1 needs an outer prefix covering index 0".into(),
            });
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn w(s: &str) -> WeightSequence {
        s.parse().unwrap()
    }

    #[test]
    fn triple_values() {
        let t = WeightSequence::triple_pattern();
        let got: Vec<Rational> = (0..10).map(|n| t.weight(n)).collect();
        let want: Vec<Rational> = ["0", "1", "-1", "-1/2", "1", "-1", "1/4", "1", "-1", "1/8"]
            .iter()
            .map(|s| q(s))
            .collect();
        assert_eq!(got, want);
        assert!(!t.in_c0());
    }

    #[test]
    fn partial_sums_of_triple_pattern() {
        let t = WeightSequence::triple_pattern();
        for k in 1..8usize {
            let two = Rational::ratio(1, 2).pow(k as i32);
            assert_eq!(t.sum(1, 3 * k), -two.clone());
            assert_eq!(t.sum(1, 3 * k + 1), Rational::one() - &two);
            assert_eq!(t.sum(1, 3 * k + 2), -two);
        }
    }

    #[test]
    fn flags() {
        assert!(!w("const 1").in_c0());
        assert!(w("const 0").in_c0());
        assert!(w("geom 1 1/2").in_l1());
        assert!(!w("geom 1 2").in_c0());
        assert!(!w("alt 1").in_c0());
        assert!(w("prefix [5, 7] then geom 1 1/3").in_l1());
        assert!(w("const 1").is_nonnegative());
        assert!(!w("alt 1").is_nonnegative());
        assert!(!w("const 1").negated().is_nonnegative());
        assert!(w("scale 0 alt 1").is_zero());
    }

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "const 1",
            "alt -1/2",
            "geom 3 1/2",
            "triple",
            "prefix [0, 1/2] then const 1",
            "scale -1 shift 2 alt 1",
        ] {
            let parsed = w(s);
            assert_eq!(parsed.to_string(), s);
            assert_eq!(w(&parsed.to_string()), parsed);
        }
        assert_eq!(w("prefix [] then triple").weight(3), q("-1/2"));
        let err = "geom 1".parse::<WeightSequence>().unwrap_err();
        assert_eq!(err.column, 7);
        let err = "prefix [1 then const 1".parse::<WeightSequence>().unwrap_err();
        assert_eq!(err.column, 11);
        assert!("wobble 3".parse::<WeightSequence>().is_err());
        assert!("const 1 2".parse::<WeightSequence>().is_err());
    }

    #[test]
    fn majorants_dominate() {
        for s in [
            "const -2",
            "alt 3",
            "geom 5 -1/3",
            "geom 2 0",
            "triple",
            "prefix [9, -9, 4] then geom 1 1/2",
            "scale -3 shift 4 geom 1 1/2",
        ] {
            let seq = w(s);
            let m = seq.majorant();
            for k in m.from..m.from + 30 {
                assert!(
                    seq.weight(k).abs() <= &m.c * &m.q.pow((k - m.from) as i32),
                    "{s} at {k}"
                );
            }
        }
        let re = w("geom 1 1/2").reindexed(-1);
        let m = re.majorant();
        for k in m.from..m.from + 20 {
            assert!(re.weight(k).abs() <= &m.c * &m.q.pow((k - m.from) as i32));
        }
    }

    #[test]
    fn limits_match_brute_force() {
        let fin = |s: &str| Extended::Finite(q(s));
        assert_eq!(w("alt 1").partial_sum_limits(), (fin("-1"), fin("0")));
        assert_eq!(w("triple").partial_sum_limits(), (fin("0"), fin("1")));
        assert_eq!(w("const 0").partial_sum_limits(), (fin("0"), fin("0")));
        assert_eq!(w("const 1").partial_sum_limits(), (Extended::PosInf, Extended::PosInf));
        assert_eq!(w("geom 1 1/2").partial_sum_limits(), (fin("1"), fin("1")));
        assert_eq!(w("scale -1 alt 1").partial_sum_limits(), (fin("0"), fin("1")));
        assert_eq!(w("prefix [0, 5] then alt 1").partial_sum_limits(), (fin("5"), fin("6")));
        // w'_n = w_{n+2} for alt 1: starts at index 1 with w_3 = -1.
        let shifted = WeightSequence::new(WeightRule::Shifted {
            offset: 2,
            rule: Box::new(WeightRule::Alternating(q("1"))),
        });
        assert_eq!(shifted.partial_sum_limits(), (fin("-1"), fin("0")));
        let tail: Vec<Rational> = (1..=40).map(|n| shifted.sum(1, n)).collect();
        assert!(tail.iter().all(|v| v == &q("-1") || v == &q("0")));
    }

    #[test]
    fn reindexing() {
        let base = w("triple");
        let r = base.reindexed(2);
        assert_eq!(r.weight(0), Rational::zero());
        for j in 1..12 {
            assert_eq!(r.weight(j), base.weight(j + 2));
        }
        let up = base.reindexed(-1);
        for j in 1..12 {
            assert_eq!(up.weight(j), base.weight(j - 1));
        }
    }
}
