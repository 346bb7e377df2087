//! Plain-text decomposition files.
//!
//! ```text
//! # comment
//! interval -1 1
//! rho 1/2
//! alpha-decay 1/2 period 2
//! level 0 alpha 2 : -1 1
//! level 1 : -1 -2/3 2/3 1
//! ```
//!
//! or a single generator line such as `radix 2 depth 3`, `chain 1,2,6,12 depth 3`,
//! `counterexample depth 6 with-zero`, `skewed depth 5` or `triples depth 9`,
//! optionally followed by `shift s`.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use thiserror::Error;

use super::{
    build_cancelling_triples, build_counterexample, build_divisor_chain, build_radix, build_skewed, AlphaTail,
    Decomposition, DecompositionError, Origin,
};
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Tokens<'a> {
    line: usize,
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut start = None;
        for (i, ch) in text.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    items.push((s, &text[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            items.push((s, &text[s..]));
        }
        Tokens { line, items, pos: 0 }
    }

    fn error_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: column + 1,
            message: message.into(),
        }
    }

    fn end_column(&self) -> usize {
        self.items.last().map_or(0, |(c, t)| c + t.len())
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        let item = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.error_at(self.end_column(), format!("expected {what}")))?;
        self.pos += 1;
        Ok(item)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|(_, t)| *t)
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        let (col, tok) = self.next(&format!("`{word}`"))?;
        if tok == word {
            Ok(())
        } else {
            Err(self.error_at(col, format!("expected `{word}`, found `{tok}`")))
        }
    }

    fn rational(&mut self, what: &str) -> Result<Rational, ParseError> {
        let (col, tok) = self.next(what)?;
        tok.parse()
            .map_err(|e| self.error_at(col, format!("bad {what} `{tok}`: {e}")))
    }

    fn integer<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let (col, tok) = self.next(what)?;
        tok.parse()
            .map_err(|_| self.error_at(col, format!("bad {what} `{tok}`")))
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.items.get(self.pos) {
            Some((col, tok)) => Err(self.error_at(*col, format!("unexpected `{tok}`"))),
            None => Ok(()),
        }
    }
}

fn generator(tokens: &mut Tokens<'_>, head: &str) -> Result<Result<Decomposition, DecompositionError>, ParseError> {
    let built = match head {
        "radix" => {
            let r: u64 = tokens.integer("radix")?;
            tokens.keyword("depth")?;
            let depth: usize = tokens.integer("depth")?;
            build_radix(r, depth)
        }
        "chain" => {
            let (col, list) = tokens.next("divisor list")?;
            let r_seq = list
                .split(',')
                .map(|s| s.trim().parse::<BigInt>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| tokens.error_at(col, format!("bad divisor list `{list}`")))?;
            tokens.keyword("depth")?;
            let depth: usize = tokens.integer("depth")?;
            build_divisor_chain(&r_seq, depth)
        }
        "counterexample" => {
            tokens.keyword("depth")?;
            let depth: usize = tokens.integer("depth")?;
            let with_zero = tokens.peek() == Some("with-zero");
            if with_zero {
                tokens.next("with-zero")?;
            }
            build_counterexample(depth, with_zero)
        }
        "skewed" => {
            tokens.keyword("depth")?;
            build_skewed(tokens.integer("depth")?)
        }
        "triples" => {
            tokens.keyword("depth")?;
            build_cancelling_triples(tokens.integer("depth")?)
        }
        _ => unreachable!("caller dispatches known heads"),
    };
    tokens.finish()?;
    Ok(built)
}

impl Decomposition {
    /// Parses the textual format.
    pub fn parse(text: &str) -> Result<Self, DecompositionError> {
        let mut interval: Option<(Rational, Rational)> = None;
        let mut rho: Option<Rational> = None;
        let mut decay: Option<(Rational, usize)> = None;
        let mut levels: Vec<Vec<Rational>> = Vec::new();
        let mut alphas: Vec<Option<Rational>> = Vec::new();
        let mut built: Option<Decomposition> = None;
        for (idx, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            let mut t = Tokens::new(idx + 1, content);
            let Some((col, head)) = t.items.first().copied() else {
                continue;
            };
            t.pos = 1;
            let explicit_started = interval.is_some() || !levels.is_empty();
            match head {
                "radix" | "chain" | "counterexample" | "skewed" | "triples" => {
                    if built.is_some() || explicit_started {
                        return Err(t.error_at(col, "generator line must be the only definition").into());
                    }
                    built = Some(generator(&mut t, head)??);
                }
                "shift" => {
                    let s: isize = t.integer("shift")?;
                    t.finish()?;
                    let base = built
                        .take()
                        .ok_or_else(|| t.error_at(col, "`shift` must follow a generator line"))?;
                    built = Some(base.shifted(s)?);
                }
                "interval" => {
                    let lo = t.rational("lower end")?;
                    let hi = t.rational("upper end")?;
                    t.finish()?;
                    interval = Some((lo, hi));
                }
                "rho" => {
                    rho = Some(t.rational("rho")?);
                    t.finish()?;
                }
                "alpha-decay" => {
                    let ratio = t.rational("decay ratio")?;
                    let period = if t.peek() == Some("period") {
                        t.next("period")?;
                        t.integer("period")?
                    } else {
                        1
                    };
                    t.finish()?;
                    if period == 0 {
                        return Err(t.error_at(col, "period must be positive").into());
                    }
                    decay = Some((ratio, period));
                }
                "level" => {
                    let (ncol, _) = t.items.get(1).copied().unwrap_or((t.end_column(), ""));
                    let n: usize = t.integer("level index")?;
                    if n != levels.len() {
                        return Err(t
                            .error_at(ncol, format!("expected level {}, found level {n}", levels.len()))
                            .into());
                    }
                    let alpha = if t.peek() == Some("alpha") {
                        t.next("alpha")?;
                        Some(t.rational("alpha")?)
                    } else {
                        None
                    };
                    t.keyword(":")?;
                    let mut pts = Vec::new();
                    while t.peek().is_some() {
                        pts.push(t.rational("point")?);
                    }
                    levels.push(pts);
                    alphas.push(alpha);
                }
                other => return Err(t.error_at(col, format!("unknown directive `{other}`")).into()),
            }
        }
        if let Some(d) = built {
            if interval.is_some() || !levels.is_empty() {
                return Err(ParseError {
                    line: 1,
                    column: 1,
                    message: "generator line must be the only definition".into(),
                }
                .into());
            }
            return Ok(d);
        }
        let (lo, hi) = interval.ok_or_else(|| ParseError {
            line: 1,
            column: 1,
            message: "missing `interval` line".into(),
        })?;
        if levels.is_empty() {
            return Err(ParseError {
                line: 1,
                column: 1,
                message: "no levels".into(),
            }
            .into());
        }
        let mut d = Decomposition::from_levels(lo, hi, levels, alphas, rho)?;
        if let Some((ratio, period)) = decay {
            let base = d.alpha(d.depth());
            d = d.with_alpha_tail(AlphaTail { base, ratio, period });
        }
        Ok(d)
    }

    /// Serializes using the generator shorthand when one is recorded.
    pub fn to_text(&self) -> String {
        match shorthand(&self.origin, self.depth()) {
            Some(s) => s,
            None => self
                .to_explicit_text(usize::MAX)
                .expect("explicit levels are already listed"),
        }
    }

    /// Serializes every level extensionally; fails for levels larger than `limit`.
    pub fn to_explicit_text(&self, limit: usize) -> Result<String, DecompositionError> {
        let mut out = String::new();
        writeln!(out, "interval {} {}", self.lo, self.hi).expect("string write");
        if let Some(r) = &self.rho {
            writeln!(out, "rho {r}").expect("string write");
        }
        if let Some(tail) = &self.alpha_tail {
            if tail.base == self.alpha(self.depth()) {
                writeln!(out, "alpha-decay {} period {}", tail.ratio, tail.period).expect("string write");
            }
        }
        for n in 0..self.num_levels() {
            let pts = self.level(n).enumerate(limit)?;
            write!(out, "level {n}").expect("string write");
            if let Some(a) = &self.alpha_declared[n] {
                write!(out, " alpha {a}").expect("string write");
            }
            out.push_str(" :");
            for p in pts {
                write!(out, " {p}").expect("string write");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DecompositionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DecompositionError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DecompositionError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| DecompositionError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

fn shorthand(origin: &Origin, depth: usize) -> Option<String> {
    Some(match origin {
        Origin::Radix { r } => format!("radix {r} depth {depth}\n"),
        Origin::Chain { r_seq } => {
            let list: Vec<String> = r_seq.iter().map(|r| r.to_string()).collect();
            format!("chain {} depth {depth}\n", list.join(","))
        }
        Origin::Counterexample { with_zero: false } => format!("counterexample depth {depth}\n"),
        Origin::Counterexample { with_zero: true } => format!("counterexample depth {depth} with-zero\n"),
        Origin::Skewed => format!("skewed depth {depth}\n"),
        Origin::CancellingTriples => format!("triples depth {depth}\n"),
        Origin::Shifted { base, offset } => {
            let base_depth = usize::try_from(depth as isize + offset).ok()?;
            format!("{}shift {offset}\n", shorthand(base, base_depth)?)
        }
        Origin::Explicit => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for d in [
            build_radix(2, 3).unwrap(),
            build_counterexample(5, true).unwrap(),
            build_radix(3, 4).unwrap().shifted(1).unwrap(),
            build_skewed(3).unwrap(),
        ] {
            let back = Decomposition::parse(&d.to_text()).unwrap();
            assert_eq!(back, d);
            let explicit = Decomposition::parse(&d.to_explicit_text(10_000).unwrap()).unwrap();
            for n in 0..d.num_levels() {
                assert_eq!(
                    explicit.level(n).enumerate(10_000).unwrap(),
                    d.level(n).enumerate(10_000).unwrap()
                );
                assert_eq!(explicit.alpha(n), d.alpha(n));
            }
        }
    }

    #[test]
    fn rejects_non_nested() {
        let err = Decomposition::parse("interval 0 1\nlevel 0 : 0 1\nlevel 1 : 0 1/2\n").unwrap_err();
        assert!(matches!(err, DecompositionError::NotNested { .. }));
    }

    #[test]
    fn rejects_rho_violation_with_gap() {
        let err = Decomposition::parse("interval 0 1\nrho 1/2\nlevel 0 : 0 1\nlevel 1 : 0 1/8 1\n").unwrap_err();
        match err {
            DecompositionError::Axiom4 { level, a, b, .. } => {
                assert_eq!(level, 1);
                assert_eq!((a, b), (Rational::zero(), Rational::ratio(1, 8)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Decomposition::parse("interval 0 1\nlevel 0 : 0 x\n").unwrap_err();
        match err {
            DecompositionError::Parse(p) => assert_eq!((p.line, p.column), (2, 13)),
            other => panic!("unexpected {other:?}"),
        }
        let err = Decomposition::parse("radix 2 depth\n").unwrap_err();
        assert!(matches!(err, DecompositionError::Parse(ParseError { line: 1, .. })));
        let err = Decomposition::parse("bogus 1\n").unwrap_err();
        assert!(matches!(
            err,
            DecompositionError::Parse(ParseError { line: 1, column: 1, .. })
        ));
    }

    #[test]
    fn comments_and_alpha() {
        let d = Decomposition::parse(
            "# halves\ninterval 0 1  # carrier\nalpha-decay 1/2\nlevel 0 alpha 1 : 0 1\nlevel 1 alpha 3/4 : 0 1/2 1\n",
        )
        .unwrap();
        assert_eq!(d.alpha(1), Rational::ratio(3, 4));
        assert_eq!(d.alpha_tail().unwrap().base, Rational::ratio(3, 4));
    }
}
