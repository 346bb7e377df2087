//! Distance functions `g_n`, partial sums and certified enclosures of `T_w = Σ w_n g_n`.

mod tail;
mod weights;

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::decomposition::{Decomposition, DecompositionError, Origin};
use crate::numerics::{RatInterval, Rational};

pub use tail::{Blocks, TailCertificate};
pub use weights::{Majorant, WeightParseError, WeightRule, WeightSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("tail is not certified: {0}")]
    Uncertified(String),
    #[error("level {level} requested but only levels 0..={depth} are stored")]
    DepthExceeded { level: usize, depth: usize },
    #[error("stored depth reaches a tail bound of {achievable}, above the requested {requested}")]
    InsufficientDepth { requested: Rational, achievable: Rational },
    #[error("eps must be positive, got {0}")]
    NonPositiveEps(Rational),
    #[error("{0}")]
    WrongInstance(String),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// Which one-sided limit to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> i32 {
        match self {
            Side::Left => -1,
            Side::Right => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Distance from `x` to the nearest integer.
///
/// ```
/// use takagi_lab::evaluation::phi;
/// use takagi_lab::Rational;
///
/// assert_eq!(phi(&Rational::ratio(7, 3)), Rational::ratio(1, 3));
/// assert_eq!(phi(&Rational::ratio(1, 2)), Rational::ratio(1, 2));
/// ```
pub fn phi(x: &Rational) -> Rational {
    let f = x.fract();
    std::cmp::min(f.clone(), Rational::one() - f)
}

/// `g_n(x) = dist(x, D_n)`.
pub fn g(d: &Decomposition, n: usize, x: &Rational) -> Result<Rational, EvaluationError> {
    d.check_in_carrier(x)?;
    Ok(d.try_level(n)?.distance(x))
}

/// One-sided slope of `g_n` at `x`: `±1` everywhere, `+1` to the right of a level point,
/// and `-1`/`+1` to the right/left of a component midpoint.
pub fn g_slope(d: &Decomposition, n: usize, x: &Rational, side: Side) -> Result<i32, EvaluationError> {
    d.check_in_carrier(x)?;
    let level = d.try_level(n)?;
    if level.contains(x) {
        return Ok(side.sign());
    }
    let a = level.below(x).expect("carrier endpoints are level points");
    let b = level.above(x).expect("carrier endpoints are level points");
    let m = a.midpoint(&b);
    Ok(match x.cmp(&m) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Greater => -1,
        std::cmp::Ordering::Equal => -side.sign(),
    })
}

/// A value enclosure `S_N(x) ± tail(N)` (a single point when exact).
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub interval: RatInterval,
    pub level: usize,
    pub tail: Rational,
    pub exact: bool,
}

impl Enclosure {
    pub fn width(&self) -> Rational {
        self.interval.width()
    }

    pub fn midpoint(&self) -> Rational {
        self.interval.midpoint()
    }
}

/// `T_w` for a decomposition and a weight rule, with a certified tail.
///
/// ```
/// use takagi_lab::decomposition::build_radix;
/// use takagi_lab::evaluation::{GeneralizedTakagi, WeightSequence};
/// use takagi_lab::Rational;
///
/// let t = GeneralizedTakagi::new(build_radix(2, 20).unwrap(), WeightSequence::constant(Rational::one())).unwrap();
/// let e = t.evaluate(&Rational::ratio(1, 3), &Rational::ratio(1, 1000)).unwrap();
/// assert!(e.interval.contains(&Rational::ratio(2, 3)));
/// assert_eq!(t.tail_bound(10), Rational::ratio(1, 1024));
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedTakagi {
    decomposition: Decomposition,
    weights: WeightSequence,
    certificate: TailCertificate,
}

impl GeneralizedTakagi {
    pub fn new(decomposition: Decomposition, weights: WeightSequence) -> Result<Self, EvaluationError> {
        let certificate =
            TailCertificate::for_instance(&decomposition, &weights).map_err(EvaluationError::Uncertified)?;
        Ok(GeneralizedTakagi {
            decomposition,
            weights,
            certificate,
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn certificate(&self) -> &TailCertificate {
        &self.certificate
    }

    pub fn depth(&self) -> usize {
        self.decomposition.depth()
    }

    pub fn weight(&self, n: usize) -> Rational {
        self.weights.weight(n)
    }

    /// Same decomposition with weights `-w`.
    pub fn negated(&self) -> Self {
        GeneralizedTakagi::new(self.decomposition.clone(), self.weights.negated())
            .expect("negation keeps the certificate")
    }

    /// Same weights on a different decomposition depth (generator-backed only).
    pub fn with_depth(&self, depth: usize) -> Result<Self, EvaluationError> {
        GeneralizedTakagi::new(self.decomposition.with_depth(depth)?, self.weights.clone())
    }

    fn check_level(&self, n: usize) -> Result<(), EvaluationError> {
        if n > self.depth() {
            Err(EvaluationError::DepthExceeded {
                level: n,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    pub fn g(&self, n: usize, x: &Rational) -> Result<Rational, EvaluationError> {
        g(&self.decomposition, n, x)
    }

    /// `Σ_{k=0}^{N} w_k g_k(x)`.
    pub fn partial_sum(&self, n: usize, x: &Rational) -> Result<Rational, EvaluationError> {
        self.check_level(n)?;
        self.decomposition.check_in_carrier(x)?;
        let mut total = Rational::zero();
        for k in 0..=n {
            let w = self.weight(k);
            if w.is_zero() {
                continue;
            }
            let dist = self.decomposition.level(k).distance(x);
            if dist.is_zero() {
                // Nested levels: every deeper term vanishes too.
                break;
            }
            total += w * dist;
        }
        Ok(total)
    }

    /// One-sided slope `Σ_{k=0}^{N} w_k g'_k(x)` of the partial sum.
    pub fn partial_sum_slope(&self, n: usize, x: &Rational, side: Side) -> Result<Rational, EvaluationError> {
        self.check_level(n)?;
        let mut total = Rational::zero();
        for k in 0..=n {
            let w = self.weight(k);
            if !w.is_zero() {
                total += w * Rational::from(g_slope(&self.decomposition, k, x, side)? as i64);
            }
        }
        Ok(total)
    }

    /// Certified bound for `|T_w(x) - S_N(x)|` over all `x`.
    pub fn tail_bound(&self, n: usize) -> Rational {
        self.certificate.bound(&self.decomposition, &self.weights, n)
    }

    /// Exact `T_w(x)` when `x` lies in a stored level.
    pub fn exact_value(&self, x: &Rational) -> Result<Option<Rational>, EvaluationError> {
        self.decomposition.check_in_carrier(x)?;
        match self.decomposition.first_level_containing(x) {
            Some(0) => Ok(Some(Rational::zero())),
            Some(m) => Ok(Some(self.partial_sum(m - 1, x)?)),
            None => Ok(None),
        }
    }

    /// `S_N(x) ± tail(N)`, exact when `x ∈ D_{N+1}` or deeper.
    pub fn enclosure(&self, n: usize, x: &Rational) -> Result<Enclosure, EvaluationError> {
        self.check_level(n)?;
        if let Some(v) = self.exact_value(x)? {
            return Ok(Enclosure {
                interval: RatInterval::point(v),
                level: n,
                tail: Rational::zero(),
                exact: true,
            });
        }
        let s = self.partial_sum(n, x)?;
        let tail = self.tail_bound(n);
        Ok(Enclosure {
            interval: RatInterval::around(&s, &tail),
            level: n,
            tail,
            exact: false,
        })
    }

    /// Enclosure of width `≤ 2·eps` at the least level whose tail bound is `≤ eps`,
    /// intersected with every shallower enclosure so smaller `eps` always nests.
    pub fn evaluate(&self, x: &Rational, eps: &Rational) -> Result<Enclosure, EvaluationError> {
        if !eps.is_positive() {
            return Err(EvaluationError::NonPositiveEps(eps.clone()));
        }
        if let Some(v) = self.exact_value(x)? {
            return Ok(Enclosure {
                interval: RatInterval::point(v),
                level: 0,
                tail: Rational::zero(),
                exact: true,
            });
        }
        let mut sum = Rational::zero();
        let mut acc: Option<RatInterval> = None;
        for n in 0..=self.depth() {
            sum += self.weight(n) * self.decomposition.level(n).distance(x);
            let tail = self.tail_bound(n);
            let here = RatInterval::around(&sum, &tail);
            let merged = match acc {
                None => here,
                Some(prev) => prev.intersect(&here).expect("enclosures of one value intersect"),
            };
            if &tail <= eps {
                return Ok(Enclosure {
                    interval: merged,
                    level: n,
                    tail,
                    exact: false,
                });
            }
            acc = Some(merged);
        }
        Err(EvaluationError::InsufficientDepth {
            requested: eps.clone(),
            achievable: self.tail_bound(self.depth()),
        })
    }

    /// Kinks of `S_M` in `[a, b]`: points of `D_M` and midpoints of `D_k`, `k ≤ M`.
    pub fn kink_points(&self, m: usize, a: &Rational, b: &Rational) -> Result<Vec<Rational>, EvaluationError> {
        self.check_level(m)?;
        let mut pts = self.decomposition.level(m).points_between(a, b);
        for k in 0..=m {
            if !self.weight(k).is_zero() {
                pts.extend(self.decomposition.level(k).midpoints_between(a, b));
            }
        }
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// Upper estimate of the number of kinks `kink_points` would list.
    pub fn kink_count_estimate(&self, m: usize, a: &Rational, b: &Rational) -> BigInt {
        let mut total = BigInt::zero();
        for k in 0..=m.min(self.depth()) {
            total += self.decomposition.level(k).count_between(a, b) + 1;
        }
        total + self.decomposition.level(m.min(self.depth())).count_between(a, b)
    }

    /// `H_n(x) = w_{2n} g_{2n}(x) + w_{2n+1} g_{2n+1}(x)` on the counterexample instance.
    pub fn pair_sum_h(&self, n: usize, x: &Rational) -> Result<Rational, EvaluationError> {
        if !matches!(self.certificate, TailCertificate::Pairs) {
            return Err(EvaluationError::WrongInstance(
                "pair sums are defined for the counterexample decomposition with alternating unit weights".into(),
            ));
        }
        self.check_level(2 * n + 1)?;
        Ok(self.weight(2 * n) * self.g(2 * n, x)? + self.weight(2 * n + 1) * self.g(2 * n + 1, x)?)
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self.decomposition.origin(), Origin::Counterexample { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build_counterexample, build_radix};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn takagi(depth: usize) -> GeneralizedTakagi {
        GeneralizedTakagi::new(
            build_radix(2, depth).unwrap(),
            WeightSequence::constant(Rational::one()),
        )
        .unwrap()
    }

    #[test]
    fn phi_basics() {
        assert_eq!(phi(&q("5")), q("0"));
        assert_eq!(phi(&q("-1/3")), q("1/3"));
        assert_eq!(phi(&q("13/4")), q("1/4"));
    }

    #[test]
    fn g_matches_phi_on_radix() {
        for r in [2u64, 3, 5] {
            let d = build_radix(r, 5).unwrap();
            for num in 0..=60 {
                let x = Rational::ratio(num, 60);
                for n in 0..=5 {
                    let scale = Rational::from(r as i64).pow(n as i32);
                    assert_eq!(g(&d, n, &x).unwrap(), phi(&(&x * &scale)) / scale);
                }
            }
        }
        assert_eq!(g(&build_radix(2, 1).unwrap(), 1, &q("3/8")).unwrap(), q("1/8"));
        assert!(g(&build_radix(2, 1).unwrap(), 1, &q("3/2")).is_err());
    }

    #[test]
    fn slopes() {
        let d = build_radix(2, 3).unwrap();
        assert_eq!(g_slope(&d, 1, &q("1/2"), Side::Right).unwrap(), 1);
        assert_eq!(g_slope(&d, 1, &q("1/2"), Side::Left).unwrap(), -1);
        assert_eq!(g_slope(&d, 0, &q("1/4"), Side::Right).unwrap(), 1);
        assert_eq!(g_slope(&d, 0, &q("1/2"), Side::Right).unwrap(), -1);
        assert_eq!(g_slope(&d, 0, &q("1/2"), Side::Left).unwrap(), 1);
        assert_eq!(g_slope(&d, 1, &q("1/3"), Side::Left).unwrap(), -1);
    }

    #[test]
    fn takagi_partial_sums() {
        let t = takagi(12);
        assert_eq!(t.partial_sum(0, &q("1/2")).unwrap(), q("1/2"));
        for n in 1..=12 {
            assert_eq!(t.partial_sum(n, &q("1/4")).unwrap(), q("1/2"));
            let expected = q("2/3") * (Rational::one() - Rational::ratio(1, 2).pow(n as i32 + 1));
            assert_eq!(t.partial_sum(n, &q("1/3")).unwrap(), expected);
        }
    }

    #[test]
    fn tail_is_exact_geometric_for_takagi() {
        let t = takagi(8);
        for n in 0..=20 {
            assert_eq!(t.tail_bound(n), Rational::ratio(1, 2).pow(n as i32));
        }
    }

    #[test]
    fn radix_tail_dominates_series() {
        for r in [3i64, 10] {
            let t = GeneralizedTakagi::new(
                build_radix(r as u64, 6).unwrap(),
                WeightSequence::constant(Rational::one()),
            )
            .unwrap();
            for n in 0..10 {
                let series = Rational::from(r).pow(-(n as i32)) / Rational::from(r - 1);
                assert!(t.tail_bound(n) >= series);
            }
        }
    }

    #[test]
    fn evaluation_is_exact_on_levels() {
        let t = takagi(10);
        let e = t.evaluate(&q("1/2"), &q("1/100")).unwrap();
        assert!(e.exact);
        assert_eq!(e.interval, RatInterval::point(q("1/2")));
        let zero = GeneralizedTakagi::new(build_radix(2, 4).unwrap(), WeightSequence::zero()).unwrap();
        assert_eq!(
            zero.evaluate(&q("1/3"), &q("1/10")).unwrap().interval,
            RatInterval::point(q("0"))
        );
    }

    #[test]
    fn evaluation_nests_and_converges() {
        let t = takagi(40);
        let x = q("1/3");
        let mut prev: Option<RatInterval> = None;
        for k in 1..12 {
            let eps = Rational::ratio(1, 10).pow(k);
            let e = t.evaluate(&x, &eps).unwrap();
            assert!(e.interval.contains(&q("2/3")));
            assert!(e.width() <= &eps * &Rational::from(2));
            if let Some(p) = &prev {
                assert!(p.contains_interval(&e.interval));
            }
            prev = Some(e.interval);
        }
        let err = t.evaluate(&x, &Rational::ratio(1, 2).pow(60)).unwrap_err();
        assert!(matches!(err, EvaluationError::InsufficientDepth { .. }));
    }

    #[test]
    fn uncertified_is_reported() {
        let d = crate::decomposition::Decomposition::parse("interval 0 1\nlevel 0 : 0 1\nlevel 1 : 0 1/2 1\n").unwrap();
        let err = GeneralizedTakagi::new(d.clone(), WeightSequence::constant(Rational::one())).unwrap_err();
        assert!(matches!(err, EvaluationError::Uncertified(_)));
        assert!(GeneralizedTakagi::new(d, "prefix [1, 2] then const 0".parse().unwrap()).is_ok());
        let grow = GeneralizedTakagi::new(build_radix(2, 3).unwrap(), WeightSequence::geometric(q("1"), q("2")));
        assert!(matches!(grow, Err(EvaluationError::Uncertified(_))));
    }

    #[test]
    fn pair_sums_respect_bound_and_plateau() {
        for with_zero in [false, true] {
            let t = GeneralizedTakagi::new(
                build_counterexample(9, with_zero).unwrap(),
                WeightSequence::alternating(q("1")),
            )
            .unwrap();
            for n in 0..4usize {
                let bound = Rational::ratio(1, 3).pow(n as i32 + 1);
                let edge = Rational::ratio(1, 2).pow(n as i32) - &bound;
                for num in -48..=48 {
                    let x = Rational::ratio(num, 48);
                    let h = t.pair_sum_h(n, &x).unwrap();
                    assert!(!h.is_negative() && h <= bound, "n={n} x={x}");
                    if !with_zero && x.abs() <= edge {
                        assert_eq!(h, bound, "plateau n={n} x={x}");
                    }
                }
            }
            if !with_zero {
                assert_eq!(t.pair_sum_h(2, &q("0")).unwrap(), Rational::ratio(1, 27));
            }
            let wrong = takagi(4);
            assert!(wrong.pair_sum_h(0, &q("0")).is_err());
        }
    }

    #[test]
    fn counterexample_tail_covers_remainder() {
        let deep = GeneralizedTakagi::new(
            build_counterexample(14, false).unwrap(),
            WeightSequence::alternating(q("1")),
        )
        .unwrap();
        let shallow = GeneralizedTakagi::new(
            build_counterexample(8, false).unwrap(),
            WeightSequence::alternating(q("1")),
        )
        .unwrap();
        for num in [-37i64, -5, 1, 7, 29, 41] {
            let x = Rational::ratio(num, 43);
            let reference = deep.partial_sum(14, &x).unwrap();
            for n in 0..=8 {
                let s = shallow.partial_sum(n, &x).unwrap();
                let gap = (&reference - &s).abs();
                assert!(gap <= shallow.tail_bound(n) + deep.tail_bound(14), "n={n} x={x}");
            }
        }
    }
}
