//! Nested decompositions `D_0 ⊆ D_1 ⊆ …` of a carrier interval.
//!
//! A level is either an arithmetic grid `{k/q} ∩ [lo, hi]` (answered in closed form,
//! so radix-10 levels at depth 20 cost nothing) or an explicit sorted point list.
//! Every constructor checks nestedness, the mesh bound `α_n` and, when declared,
//! the uniformity constant `ρ`.

mod generators;
mod text;
mod validate;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numerics::Rational;

pub use generators::{build_cancelling_triples, build_counterexample, build_divisor_chain, build_radix, build_skewed};
pub use text::ParseError;
pub use validate::{validate, validate_with_rho, Flag, HypothesisReport, LevelReport, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("radix must be at least 2, got {0}")]
    BadRadix(u64),
    #[error("divisor chain must start at 1, got {0}")]
    ChainStart(BigInt),
    #[error("divisor chain is not strictly increasing at index {index}: {prev} then {next}")]
    ChainNotIncreasing { index: usize, prev: BigInt, next: BigInt },
    #[error("divisor chain breaks at index {index}: {prev} does not divide {next}")]
    ChainDivisibility { index: usize, prev: BigInt, next: BigInt },
    #[error("requested depth {depth} exceeds the {available} levels the chain defines")]
    ChainTooShort { depth: usize, available: usize },
    #[error("carrier interval is empty: [{lo}, {hi}]")]
    EmptyCarrier { lo: Rational, hi: Rational },
    #[error("level {level} has no points")]
    EmptyLevel { level: usize },
    #[error("level {level} is not strictly increasing at {point}")]
    Unsorted { level: usize, point: Rational },
    #[error("level {level} point {point} lies outside the carrier interval")]
    OutsideCarrier { level: usize, point: Rational },
    #[error("carrier endpoint {point} missing from level 0")]
    MissingEndpoint { point: Rational },
    #[error("levels are not nested: {point} is in level {level} but not in level {next}", next = .level + 1)]
    NotNested { level: usize, point: Rational },
    #[error("declared alpha {alpha} at level {level} is smaller than the gap ({a}, {b})")]
    Axiom3 {
        level: usize,
        alpha: Rational,
        a: Rational,
        b: Rational,
    },
    #[error("gap ({a}, {b}) at level {level} is shorter than rho*alpha = {bound}")]
    Axiom4 {
        level: usize,
        a: Rational,
        b: Rational,
        bound: Rational,
    },
    #[error("rho must lie in (0, 1], got {0}")]
    BadRho(Rational),
    #[error("level {level} requested but only levels 0..={depth} are stored")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("point {x} lies outside the carrier [{lo}, {hi}]")]
    PointOutside { x: Rational, lo: Rational, hi: Rational },
    #[error("cannot shift by {0}: shifts below -1 are not meaningful")]
    BadShift(isize),
    #[error("this decomposition has no generator rule to extend")]
    NotExtensible,
    #[error("level {level} is too large to enumerate ({count} points)")]
    TooLarge { level: usize, count: BigInt },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Closed-form description of how a decomposition was produced; used to save the
/// shorthand form and to extend levels on demand.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Radix { r: u64 },
    Chain { r_seq: Vec<BigInt> },
    Counterexample { with_zero: bool },
    CancellingTriples,
    Skewed,
    Explicit,
    Shifted { base: Box<Origin>, offset: isize },
}

/// `α_{D+j} ≤ base · ratio^⌊j/period⌋` for every `j ≥ 0`, where `D` is the deepest
/// stored level. This is what lets tails beyond the stored levels be certified.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTail {
    pub base: Rational,
    pub ratio: Rational,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LevelStore {
    /// Level `n` is `{k / denominators[n]} ∩ [lo, hi]`.
    Grid(Vec<BigInt>),
    Explicit(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub min: Rational,
    pub max: Rational,
    /// Leftmost gap achieving the minimum.
    pub min_at: (Rational, Rational),
    /// Leftmost gap achieving the maximum.
    pub max_at: (Rational, Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    lo: Rational,
    hi: Rational,
    store: LevelStore,
    gaps: Vec<GapStats>,
    alpha_declared: Vec<Option<Rational>>,
    rho: Option<Rational>,
    origin: Origin,
    alpha_tail: Option<AlphaTail>,
}

/// Connected components of `[lo, hi] ∖ D_n` and their midpoints `D̃_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGeometry {
    pub components: Vec<(Rational, Rational)>,
    pub midpoints: Vec<Rational>,
}

impl Decomposition {
    pub(crate) fn from_parts(
        lo: Rational,
        hi: Rational,
        store: LevelStore,
        alpha_declared: Vec<Option<Rational>>,
        rho: Option<Rational>,
        origin: Origin,
        alpha_tail: Option<AlphaTail>,
    ) -> Result<Self, DecompositionError> {
        if lo >= hi {
            return Err(DecompositionError::EmptyCarrier { lo, hi });
        }
        let count = match &store {
            LevelStore::Grid(d) => d.len(),
            LevelStore::Explicit(p) => p.len(),
        };
        if count == 0 {
            return Err(DecompositionError::EmptyLevel { level: 0 });
        }
        match &store {
            LevelStore::Grid(dens) => check_grid(&lo, &hi, dens)?,
            LevelStore::Explicit(points) => check_explicit(&lo, &hi, points)?,
        }
        let gaps = (0..count)
            .map(|n| compute_gaps(&lo, &hi, &store, n))
            .collect::<Vec<_>>();
        let mut alpha_declared = alpha_declared;
        alpha_declared.resize(count, None);
        for (n, declared) in alpha_declared.iter().enumerate() {
            if let Some(a) = declared {
                if a < &gaps[n].max {
                    let (ga, gb) = gaps[n].max_at.clone();
                    return Err(DecompositionError::Axiom3 {
                        level: n,
                        alpha: a.clone(),
                        a: ga,
                        b: gb,
                    });
                }
            }
        }
        if let Some(r) = &rho {
            if !r.is_positive() || r > &Rational::one() {
                return Err(DecompositionError::BadRho(r.clone()));
            }
        }
        let d = Decomposition {
            lo,
            hi,
            store,
            gaps,
            alpha_declared,
            rho,
            origin,
            alpha_tail,
        };
        if let Some(r) = &d.rho {
            for n in 0..count {
                let bound = r * &d.alpha(n);
                if d.gaps[n].min < bound {
                    let (a, b) = d.gaps[n].min_at.clone();
                    return Err(DecompositionError::Axiom4 { level: n, a, b, bound });
                }
            }
        }
        Ok(d)
    }

    /// Builds a decomposition from explicit point lists (sorted, nested, containing the
    /// carrier endpoints in level 0).
    pub fn from_levels(
        lo: Rational,
        hi: Rational,
        levels: Vec<Vec<Rational>>,
        alpha: Vec<Option<Rational>>,
        rho: Option<Rational>,
    ) -> Result<Self, DecompositionError> {
        Self::from_parts(lo, hi, LevelStore::Explicit(levels), alpha, rho, Origin::Explicit, None)
    }

    /// Attaches a certificate for the mesh decay beyond the stored levels.
    pub fn with_alpha_tail(mut self, tail: AlphaTail) -> Self {
        self.alpha_tail = Some(tail);
        self
    }

    /// Returns a copy with `ρ` declared, rejecting it if some stored gap violates it.
    pub fn with_rho(self, rho: Rational) -> Result<Self, DecompositionError> {
        Self::from_parts(
            self.lo,
            self.hi,
            self.store,
            self.alpha_declared,
            Some(rho),
            self.origin,
            self.alpha_tail,
        )
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    /// Index of the deepest stored level.
    pub fn depth(&self) -> usize {
        self.num_levels() - 1
    }

    pub fn num_levels(&self) -> usize {
        self.gaps.len()
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn rho_declared(&self) -> Option<&Rational> {
        self.rho.as_ref()
    }

    pub fn alpha_tail(&self) -> Option<&AlphaTail> {
        self.alpha_tail.as_ref()
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.store, LevelStore::Grid(_))
    }

    /// Effective `α_n`: the declared value when present, else the largest gap.
    pub fn alpha(&self, n: usize) -> Rational {
        self.alpha_declared[n]
            .clone()
            .unwrap_or_else(|| self.gaps[n].max.clone())
    }

    pub fn alpha_declared(&self, n: usize) -> Option<&Rational> {
        self.alpha_declared[n].as_ref()
    }

    pub fn alphas(&self) -> Vec<Rational> {
        (0..self.num_levels()).map(|n| self.alpha(n)).collect()
    }

    pub fn gap_stats(&self, n: usize) -> &GapStats {
        &self.gaps[n]
    }

    /// Measured `ρ_n = min gap / α_n`.
    pub fn rho_at(&self, n: usize) -> Rational {
        &self.gaps[n].min / &self.alpha(n)
    }

    /// Infimum of the measured `ρ_n` over stored levels.
    pub fn rho_inf(&self) -> Rational {
        (0..self.num_levels())
            .map(|n| self.rho_at(n))
            .min()
            .expect("at least one level")
    }

    /// Declared `ρ` when present, otherwise the measured infimum.
    pub fn effective_rho(&self) -> Rational {
        self.rho.clone().unwrap_or_else(|| self.rho_inf())
    }

    pub fn level(&self, n: usize) -> Level<'_> {
        assert!(
            n < self.num_levels(),
            "level {} out of range (depth {})",
            n,
            self.depth()
        );
        Level { d: self, n }
    }

    pub fn try_level(&self, n: usize) -> Result<Level<'_>, DecompositionError> {
        if n < self.num_levels() {
            Ok(Level { d: self, n })
        } else {
            Err(DecompositionError::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            })
        }
    }

    pub fn contains_carrier(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn check_in_carrier(&self, x: &Rational) -> Result<(), DecompositionError> {
        if self.contains_carrier(x) {
            Ok(())
        } else {
            Err(DecompositionError::PointOutside {
                x: x.clone(),
                lo: self.lo.clone(),
                hi: self.hi.clone(),
            })
        }
    }

    /// Least stored `n` with `x ∈ D_n`.
    pub fn first_level_containing(&self, x: &Rational) -> Option<usize> {
        // Levels are nested, so membership is monotone in n.
        if !self.level(self.depth()).contains(x) {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.depth());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.level(mid).contains(x) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// Components and midpoints of level `n`. Errors for levels too large to list.
    pub fn geometry(&self, n: usize) -> Result<LevelGeometry, DecompositionError> {
        let level = self.try_level(n)?;
        let points = level.enumerate(1 << 22)?;
        let components: Vec<_> = points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        let midpoints = components.iter().map(|(a, b)| a.midpoint(b)).collect();
        Ok(LevelGeometry { components, midpoints })
    }

    /// Re-indexes so that new level `j` is old level `j + offset`; levels with a negative
    /// old index repeat level 0. `offset = n_0 - 1` turns a point first seen at level `n_0`
    /// into a point of the new level 1 that is absent from the new level 0.
    pub fn shifted(&self, offset: isize) -> Result<Self, DecompositionError> {
        if offset < -1 {
            return Err(DecompositionError::BadShift(offset));
        }
        let count = self.num_levels() as isize;
        if offset >= count {
            return Err(DecompositionError::LevelOutOfRange {
                level: offset as usize,
                depth: self.depth(),
            });
        }
        let index = |j: isize| -> usize { (j + offset).max(0) as usize };
        let new_count = (count - offset) as usize;
        let store = match &self.store {
            LevelStore::Grid(d) => LevelStore::Grid((0..new_count as isize).map(|j| d[index(j)].clone()).collect()),
            LevelStore::Explicit(p) => {
                LevelStore::Explicit((0..new_count as isize).map(|j| p[index(j)].clone()).collect())
            }
        };
        let alpha = (0..new_count as isize)
            .map(|j| self.alpha_declared[index(j)].clone())
            .collect();
        let origin = match &self.origin {
            Origin::Shifted { base, offset: o } => Origin::Shifted {
                base: base.clone(),
                offset: o + offset,
            },
            other => Origin::Shifted {
                base: Box::new(other.clone()),
                offset,
            },
        };
        Self::from_parts(
            self.lo.clone(),
            self.hi.clone(),
            store,
            alpha,
            self.rho.clone(),
            origin,
            self.alpha_tail.clone(),
        )
    }

    /// Rebuilds a generator-backed decomposition at a different depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self, DecompositionError> {
        match &self.origin {
            Origin::Radix { r } => build_radix(*r, depth),
            Origin::Chain { r_seq } => build_divisor_chain(r_seq, depth),
            Origin::Counterexample { with_zero } => build_counterexample(depth, *with_zero),
            Origin::CancellingTriples => build_cancelling_triples(depth),
            Origin::Skewed => build_skewed(depth),
            Origin::Shifted { base, offset } => {
                let target = depth as isize + offset;
                if target < 0 {
                    return Err(DecompositionError::BadShift(*offset));
                }
                let rebuilt = Decomposition {
                    origin: (**base).clone(),
                    ..self.clone()
                }
                .with_depth(target as usize)?;
                rebuilt.shifted(*offset)
            }
            Origin::Explicit => Err(DecompositionError::NotExtensible),
        }
    }

    /// Copy with every grid level expanded into an explicit point list (for cross-checks).
    pub fn materialized(&self, limit: usize) -> Result<Self, DecompositionError> {
        let levels = (0..self.num_levels())
            .map(|n| self.level(n).enumerate(limit))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parts(
            self.lo.clone(),
            self.hi.clone(),
            LevelStore::Explicit(levels),
            self.alpha_declared.clone(),
            self.rho.clone(),
            self.origin.clone(),
            self.alpha_tail.clone(),
        )
    }
}

fn check_grid(lo: &Rational, hi: &Rational, dens: &[BigInt]) -> Result<(), DecompositionError> {
    for (n, den) in dens.iter().enumerate() {
        let q = Rational::from_integer(den.clone());
        for end in [lo, hi] {
            if !(end * &q).is_integer() {
                return Err(if n == 0 {
                    DecompositionError::MissingEndpoint { point: end.clone() }
                } else {
                    DecompositionError::NotNested {
                        level: n - 1,
                        point: end.clone(),
                    }
                });
            }
        }
        if n + 1 < dens.len() && !(&dens[n + 1] % den).is_zero() {
            // k/den is in level n but not in level n+1 for k = 1 relative to lo.
            let point = lo + &Rational::new(1, den.clone()).expect("positive denominator");
            return Err(DecompositionError::NotNested { level: n, point });
        }
    }
    Ok(())
}

fn check_explicit(lo: &Rational, hi: &Rational, levels: &[Vec<Rational>]) -> Result<(), DecompositionError> {
    for (n, pts) in levels.iter().enumerate() {
        if pts.is_empty() {
            return Err(DecompositionError::EmptyLevel { level: n });
        }
        for w in pts.windows(2) {
            if w[0] >= w[1] {
                return Err(DecompositionError::Unsorted {
                    level: n,
                    point: w[1].clone(),
                });
            }
        }
        for p in [&pts[0], &pts[pts.len() - 1]] {
            if p < lo || p > hi {
                return Err(DecompositionError::OutsideCarrier {
                    level: n,
                    point: p.clone(),
                });
            }
        }
    }
    for end in [lo, hi] {
        if levels[0].binary_search(end).is_err() {
            return Err(DecompositionError::MissingEndpoint { point: end.clone() });
        }
    }
    for n in 0..levels.len().saturating_sub(1) {
        for p in &levels[n] {
            if levels[n + 1].binary_search(p).is_err() {
                return Err(DecompositionError::NotNested {
                    level: n,
                    point: p.clone(),
                });
            }
        }
    }
    Ok(())
}

fn compute_gaps(lo: &Rational, hi: &Rational, store: &LevelStore, n: usize) -> GapStats {
    match store {
        LevelStore::Grid(dens) => {
            let step = Rational::new(1, dens[n].clone()).expect("positive denominator");
            let first = (lo.clone(), lo + &step);
            GapStats {
                min: step.clone(),
                max: step,
                min_at: first.clone(),
                max_at: first,
            }
        }
        LevelStore::Explicit(levels) => {
            let pts = &levels[n];
            if pts.len() < 2 {
                // A single point cannot contain both endpoints of a non-empty carrier.
                let g = (lo.clone(), hi.clone());
                return GapStats {
                    min: hi - lo,
                    max: hi - lo,
                    min_at: g.clone(),
                    max_at: g,
                };
            }
            let mut min: Option<(Rational, usize)> = None;
            let mut max: Option<(Rational, usize)> = None;
            for (i, w) in pts.windows(2).enumerate() {
                let g = &w[1] - &w[0];
                if min.as_ref().is_none_or(|(m, _)| &g < m) {
                    min = Some((g.clone(), i));
                }
                if max.as_ref().is_none_or(|(m, _)| &g > m) {
                    max = Some((g, i));
                }
            }
            let (min, i) = min.expect("non-empty");
            let (max, j) = max.expect("non-empty");
            GapStats {
                min,
                max,
                min_at: (pts[i].clone(), pts[i + 1].clone()),
                max_at: (pts[j].clone(), pts[j + 1].clone()),
            }
        }
    }
}

/// Read-only view of one level `D_n`.
#[derive(Clone, Copy)]
pub struct Level<'a> {
    d: &'a Decomposition,
    n: usize,
}

impl<'a> Level<'a> {
    pub fn index(&self) -> usize {
        self.n
    }

    pub fn decomposition(&self) -> &'a Decomposition {
        self.d
    }

    fn grid_den(&self) -> Option<&'a BigInt> {
        match &self.d.store {
            LevelStore::Grid(dens) => Some(&dens[self.n]),
            LevelStore::Explicit(_) => None,
        }
    }

    fn explicit(&self) -> Option<&'a [Rational]> {
        match &self.d.store {
            LevelStore::Explicit(levels) => Some(&levels[self.n]),
            LevelStore::Grid(_) => None,
        }
    }

    fn grid_point(den: &BigInt, k: BigInt) -> Rational {
        Rational::new(k, den.clone()).expect("positive denominator")
    }

    /// Number of points in the level.
    pub fn len(&self) -> BigInt {
        match self.grid_den() {
            Some(den) => {
                let span = (&self.d.hi - &self.d.lo) * Rational::from_integer(den.clone());
                span.floor() + BigInt::one()
            }
            None => BigInt::from(self.explicit().expect("explicit").len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if !self.d.contains_carrier(x) {
            return false;
        }
        match self.grid_den() {
            Some(den) => (x * &Rational::from_integer(den.clone())).is_integer(),
            None => self.explicit().expect("explicit").binary_search(x).is_ok(),
        }
    }

    /// Largest point `≤ x`.
    pub fn floor_point(&self, x: &Rational) -> Option<Rational> {
        if x < &self.d.lo {
            return None;
        }
        if x >= &self.d.hi {
            return Some(self.d.hi.clone());
        }
        match self.grid_den() {
            Some(den) => Some(Self::grid_point(
                den,
                (x * &Rational::from_integer(den.clone())).floor(),
            )),
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p <= x);
                (i > 0).then(|| pts[i - 1].clone())
            }
        }
    }

    /// Smallest point `≥ x`.
    pub fn ceil_point(&self, x: &Rational) -> Option<Rational> {
        if x > &self.d.hi {
            return None;
        }
        if x <= &self.d.lo {
            return Some(self.d.lo.clone());
        }
        match self.grid_den() {
            Some(den) => Some(Self::grid_point(den, (x * &Rational::from_integer(den.clone())).ceil())),
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p < x);
                pts.get(i).cloned()
            }
        }
    }

    /// Largest point strictly below `x`.
    pub fn below(&self, x: &Rational) -> Option<Rational> {
        if x <= &self.d.lo {
            return None;
        }
        if x > &self.d.hi {
            return Some(self.d.hi.clone());
        }
        match self.grid_den() {
            Some(den) => {
                let k = (x * &Rational::from_integer(den.clone())).ceil() - BigInt::one();
                Some(Self::grid_point(den, k))
            }
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p < x);
                (i > 0).then(|| pts[i - 1].clone())
            }
        }
    }

    /// Smallest point strictly above `x`.
    pub fn above(&self, x: &Rational) -> Option<Rational> {
        if x >= &self.d.hi {
            return None;
        }
        if x < &self.d.lo {
            return Some(self.d.lo.clone());
        }
        match self.grid_den() {
            Some(den) => {
                let k = (x * &Rational::from_integer(den.clone())).floor() + BigInt::one();
                Some(Self::grid_point(den, k))
            }
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p <= x);
                pts.get(i).cloned()
            }
        }
    }

    /// Points of the level in `[a, b]`, sorted.
    pub fn points_between(&self, a: &Rational, b: &Rational) -> Vec<Rational> {
        if a > b {
            return Vec::new();
        }
        match self.grid_den() {
            Some(den) => {
                let q = Rational::from_integer(den.clone());
                let lo = std::cmp::max(a, &self.d.lo);
                let hi = std::cmp::min(b, &self.d.hi);
                if lo > hi {
                    return Vec::new();
                }
                let k0 = (lo * &q).ceil();
                let k1 = (hi * &q).floor();
                let mut out = Vec::new();
                let mut k = k0;
                while k <= k1 {
                    out.push(Self::grid_point(den, k.clone()));
                    k += 1;
                }
                out
            }
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p < a);
                let j = pts.partition_point(|p| p <= b);
                pts[i..j.max(i)].to_vec()
            }
        }
    }

    /// Number of points in `[a, b]` without listing them.
    pub fn count_between(&self, a: &Rational, b: &Rational) -> BigInt {
        if a > b {
            return BigInt::zero();
        }
        match self.grid_den() {
            Some(den) => {
                let q = Rational::from_integer(den.clone());
                let lo = std::cmp::max(a, &self.d.lo);
                let hi = std::cmp::min(b, &self.d.hi);
                if lo > hi {
                    return BigInt::zero();
                }
                let c = (hi * &q).floor() - (lo * &q).ceil() + BigInt::one();
                if c < BigInt::zero() {
                    BigInt::zero()
                } else {
                    c
                }
            }
            None => {
                let pts = self.explicit().expect("explicit");
                let i = pts.partition_point(|p| p < a);
                let j = pts.partition_point(|p| p <= b);
                BigInt::from(j.saturating_sub(i))
            }
        }
    }

    /// Midpoints of components of `[lo, hi] ∖ D_n` that lie in `[a, b]`.
    pub fn midpoints_between(&self, a: &Rational, b: &Rational) -> Vec<Rational> {
        let left = self.floor_point(a).unwrap_or_else(|| self.d.lo.clone());
        let right = self.ceil_point(b).unwrap_or_else(|| self.d.hi.clone());
        let pts = self.points_between(&left, &right);
        pts.windows(2)
            .map(|w| w[0].midpoint(&w[1]))
            .filter(|m| a <= m && m <= b)
            .collect()
    }

    /// `x ∈ D̃_n`: `x` is not a level point and is the midpoint of its component.
    pub fn is_midpoint(&self, x: &Rational) -> bool {
        if self.contains(x) || !self.d.contains_carrier(x) {
            return false;
        }
        match (self.below(x), self.above(x)) {
            (Some(a), Some(b)) => &a.midpoint(&b) == x,
            _ => false,
        }
    }

    /// Every point of the level; fails if there are more than `limit`.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Rational>, DecompositionError> {
        let count = self.len();
        if count > BigInt::from(limit) {
            return Err(DecompositionError::TooLarge { level: self.n, count });
        }
        Ok(match self.explicit() {
            Some(pts) => pts.to_vec(),
            None => self.points_between(&self.d.lo, &self.d.hi),
        })
    }

    /// Distance from `x` to the level.
    pub fn distance(&self, x: &Rational) -> Rational {
        let below = self.floor_point(x);
        let above = self.ceil_point(x);
        match (below, above) {
            (Some(a), Some(b)) => std::cmp::min(x - &a, &b - x),
            (Some(a), None) => x - &a,
            (None, Some(b)) => &b - x,
            (None, None) => unreachable!("levels are non-empty"),
        }
    }
}

impl fmt::Debug for Level<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level({})", self.n)
    }
}
