//! Dini derivatives, sub/superdifferential verdicts, local-minimum witnesses and the
//! closed-form Takagi superdifferential.
//!
//! Nothing here claims a limit. Verdicts are either exact statements about finitely
//! many scales or finite-horizon evidence, and every bound is a rigorous enclosure.
//!
//! One-sided quotients are bounded on annuli `[b_{n+1}, b_n]` (and `[a_n, a_{n+1}]`)
//! by sampling the kink grid of a deeper partial sum `S_m`: the bounds
//! `(S_m(v) ± tail - T(x)) / (v - x)` are monotone on each linear piece, so their
//! extrema over the annulus sit on the grid.

mod binary;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

pub use binary::{takagi_superdiff_formula, takagi_superdiff_formula_at, BinaryExpansion};

use crate::decomposition::{validate, Decomposition, DecompositionError};
use crate::evaluation::{EvaluationError, GeneralizedTakagi, Side, WeightSequence};
use crate::numerics::{Extended, RatInterval, Rational};
use crate::sequences::{neighbors, QuotientTrace, SequenceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivativeError {
    #[error("weight w_{index} is negative")]
    NegativeWeight { index: usize },
    #[error("the weights are summable; the local-minimum construction needs w outside l1")]
    SummableWeights,
    #[error("point {x} is not in any stored level")]
    NotInD { x: Rational },
    #[error("no stored level up to {available} reaches the required threshold")]
    ThresholdNotReached { available: usize },
    #[error("depth {available} is too shallow; at least {needed} levels are needed")]
    TooShallow { needed: usize, available: usize },
    #[error("precondition failed: {0}")]
    Premise(String),
    #[error("chord ratio grows without bound over the trace (max {0}); check inapplicable")]
    RatioUnbounded(Rational),
    #[error("formula inapplicable: {0}")]
    FormulaInapplicable(String),
    #[error("bad binary expansion: {0}")]
    BadExpansion(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// `{0, ±1, ±10}`.
pub fn default_zetas() -> Vec<Rational> {
    [0, 1, -1, 10, -10].iter().map(|&z| Rational::from(z as i64)).collect()
}

/// `10^{-6}`.
pub fn default_cauchy_tolerance() -> Rational {
    Rational::ratio(1, 1_000_000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    InD,
    InDTilde,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointClass {
    pub kind: PointKind,
    /// Least `n_0` with `x ∈ D_{n_0}`.
    pub first_level: Option<usize>,
    /// Levels `k` (below `n_0` when `x ∈ D`) with `x ∈ D̃_k`.
    pub midpoint_levels: Vec<usize>,
    pub depth: usize,
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PointKind::InD => write!(f, "in_D({})", self.first_level.expect("set for in_D")),
            PointKind::InDTilde => {
                let levels = &self.midpoint_levels;
                let contiguous = levels.windows(2).all(|w| w[1] == w[0] + 1);
                if contiguous && levels.len() > 2 {
                    write!(f, "in_D_tilde({}..={})", levels[0], levels[levels.len() - 1])
                } else {
                    let s: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
                    write!(f, "in_D_tilde({})", s.join(" "))
                }
            }
            PointKind::Generic => write!(f, "generic"),
        }
    }
}

/// Exact membership of `x` in `D_n` and `D̃_n` for every stored level.
///
/// ```
/// use takagi_lab::decomposition::build_radix;
/// use takagi_lab::derivatives::{classify, PointKind};
/// use takagi_lab::Rational;
///
/// let c = classify(&build_radix(2, 8).unwrap(), &Rational::ratio(3, 8)).unwrap();
/// assert_eq!((c.kind, c.first_level), (PointKind::InD, Some(3)));
/// ```
pub fn classify(d: &Decomposition, x: &Rational) -> Result<PointClass, DerivativeError> {
    d.check_in_carrier(x)?;
    let first_level = d.first_level_containing(x);
    let upto = first_level.unwrap_or(d.depth() + 1);
    let midpoint_levels: Vec<usize> = (0..upto.min(d.depth() + 1))
        .filter(|&k| d.level(k).is_midpoint(x))
        .collect();
    let kind = if first_level.is_some() {
        PointKind::InD
    } else if !midpoint_levels.is_empty() {
        PointKind::InDTilde
    } else {
        PointKind::Generic
    };
    Ok(PointClass {
        kind,
        first_level,
        midpoint_levels,
        depth: d.depth(),
    })
}

/// Sampling controls for the annulus bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiniOptions {
    /// Extra levels of refinement past the annulus level.
    pub refine: usize,
    /// Kink-point budget per annulus.
    pub budget: usize,
}

impl Default for DiniOptions {
    fn default() -> Self {
        DiniOptions {
            refine: 6,
            budget: 4096,
        }
    }
}

/// Enclosures of the infimum and supremum of one-sided quotients over one annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SideBounds {
    pub inf: RatInterval,
    pub sup: RatInterval,
    pub level: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleBounds {
    pub n: usize,
    pub right: Option<SideBounds>,
    pub left: Option<SideBounds>,
}

impl ScaleBounds {
    /// `sup(left) - inf(right)` when it is certainly positive: no `ζ` satisfies the
    /// subgradient inequality across this scale pair.
    pub fn empty_certificate(&self) -> Option<Rational> {
        let (r, l) = (self.right.as_ref()?, self.left.as_ref()?);
        let gap = l.sup.lo() - r.inf.hi();
        gap.is_positive().then_some(gap)
    }

    /// Hull of every one-sided bound at this scale.
    pub fn spread(&self) -> Option<RatInterval> {
        let mut parts = self
            .right
            .iter()
            .chain(self.left.iter())
            .flat_map(|s| [s.inf.clone(), s.sup.clone()]);
        let first = parts.next()?;
        Some(parts.fold(first, |acc, p| acc.hull(&p)))
    }
}

/// Finite-horizon enclosures of `d₊f(x)` and `D⁻f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiniEstimate {
    /// `min` over the window `[⌈h/2⌉, h)` of the right-annulus infima.
    pub d_plus: RatInterval,
    /// `max` over the window of the left-annulus suprema.
    pub d_minus: RatInterval,
    pub horizon: usize,
    pub samples: usize,
    pub value_at_x: RatInterval,
    pub scales: Vec<ScaleBounds>,
}

impl DiniEstimate {
    pub fn window(&self) -> &[ScaleBounds] {
        let start = self.horizon.div_ceil(2).min(self.scales.len().saturating_sub(1));
        &self.scales[start..]
    }
}

pub fn dini(t: &GeneralizedTakagi, x: &Rational, horizon: usize) -> Result<DiniEstimate, DerivativeError> {
    dini_with(t, x, horizon, &DiniOptions::default())
}

/// Annulus bounds for scales `0..h` with `h = min(horizon, depth - 1)`.
pub fn dini_with(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
    opts: &DiniOptions,
) -> Result<DiniEstimate, DerivativeError> {
    let depth = t.depth();
    if depth < 2 {
        return Err(DerivativeError::TooShallow {
            needed: 2,
            available: depth,
        });
    }
    let h = horizon.clamp(1, depth - 1);
    let d = t.decomposition();
    let seq = neighbors(d, x, depth)?;
    let tx = t.enclosure(depth, x)?.interval;
    // A stalled neighbour (b_{n+1} = b_n) widens the annulus to the next distinct point.
    let inner = |n: usize, side: Side| {
        (n + 1..=depth)
            .map(|j| seq.toward(j, side))
            .find(|p| *p != seq.toward(n, side))
    };
    let scales = (0..h)
        .into_par_iter()
        .map(|n| {
            let mut bounds = [None, None];
            for (slot, side) in bounds.iter_mut().zip([Side::Right, Side::Left]) {
                if let Some(near) = inner(n, side) {
                    *slot = side_bounds(t, x, &tx, near, seq.toward(n, side), n, opts)?;
                }
            }
            let [right, left] = bounds;
            Ok(ScaleBounds { n, right, left })
        })
        .collect::<Result<Vec<_>, DerivativeError>>()?;
    let samples = scales
        .iter()
        .flat_map(|s| s.right.iter().chain(s.left.iter()))
        .map(|b| b.samples)
        .sum();
    let mut est = DiniEstimate {
        d_plus: RatInterval::point(Rational::zero()),
        d_minus: RatInterval::point(Rational::zero()),
        horizon: h,
        samples,
        value_at_x: tx,
        scales,
    };
    let pick = |use_window: bool, f: &dyn Fn(&ScaleBounds) -> Option<RatInterval>| -> Vec<RatInterval> {
        let src = if use_window { est.window() } else { &est.scales[..] };
        src.iter().filter_map(f).collect()
    };
    let mut rights = pick(true, &|s| s.right.as_ref().map(|b| b.inf.clone()));
    if rights.is_empty() {
        rights = pick(false, &|s| s.right.as_ref().map(|b| b.inf.clone()));
    }
    let mut lefts = pick(true, &|s| s.left.as_ref().map(|b| b.sup.clone()));
    if lefts.is_empty() {
        lefts = pick(false, &|s| s.left.as_ref().map(|b| b.sup.clone()));
    }
    if rights.is_empty() || lefts.is_empty() {
        return Err(DerivativeError::Premise(format!(
            "no annulus around {x} has interior points at this depth"
        )));
    }
    let lo = |v: &[RatInterval]| v.iter().map(|i| i.lo().clone()).min().expect("nonempty");
    let hi = |v: &[RatInterval]| v.iter().map(|i| i.hi().clone()).min().expect("nonempty");
    est.d_plus = RatInterval::new(lo(&rights), hi(&rights)).expect("min preserves order");
    let lo_max = lefts.iter().map(|i| i.lo().clone()).max().expect("nonempty");
    let hi_max = lefts.iter().map(|i| i.hi().clone()).max().expect("nonempty");
    est.d_minus = RatInterval::new(lo_max, hi_max).expect("max preserves order");
    Ok(est)
}

fn side_bounds(
    t: &GeneralizedTakagi,
    x: &Rational,
    tx: &RatInterval,
    near: &Rational,
    far: &Rational,
    n: usize,
    opts: &DiniOptions,
) -> Result<Option<SideBounds>, DerivativeError> {
    if near == far {
        return Ok(None);
    }
    let (a, b) = if near < far { (near, far) } else { (far, near) };
    let d = t.decomposition();
    let depth = t.depth();
    let budget = num_bigint::BigInt::from(opts.budget);
    let mut m = (n + 1).min(depth);
    for cand in n + 2..=(n + 1 + opts.refine).min(depth) {
        if t.kink_count_estimate(cand, a, b) > budget {
            break;
        }
        m = cand;
    }
    let mut pts = t.kink_points(m, a, b)?;
    pts.push(a.clone());
    pts.push(b.clone());
    pts.sort();
    pts.dedup();
    let tau = t.tail_bound(m);
    let mut inf_lo: Option<Rational> = None;
    let mut inf_hi: Option<Rational> = None;
    let mut sup_lo: Option<Rational> = None;
    let mut sup_hi: Option<Rational> = None;
    for v in &pts {
        let s = t.partial_sum(m, v)?;
        let exact = d.first_level_containing(v).is_some_and(|j| j <= m + 1);
        let inv = (v - x).recip().expect("annulus excludes x");
        let loose = RatInterval::new(&s - &tau - tx.hi(), &s + &tau - tx.lo())
            .expect("ordered")
            .scale(&inv);
        let tight = if exact {
            RatInterval::new(&s - tx.hi(), &s - tx.lo())
                .expect("ordered")
                .scale(&inv)
        } else {
            loose.clone()
        };
        let upd_min = |slot: &mut Option<Rational>, v: &Rational| {
            if slot.as_ref().is_none_or(|c| v < c) {
                *slot = Some(v.clone());
            }
        };
        let upd_max = |slot: &mut Option<Rational>, v: &Rational| {
            if slot.as_ref().is_none_or(|c| v > c) {
                *slot = Some(v.clone());
            }
        };
        upd_min(&mut inf_lo, loose.lo());
        upd_min(&mut inf_hi, tight.hi());
        upd_max(&mut sup_lo, tight.lo());
        upd_max(&mut sup_hi, loose.hi());
    }
    let inf = RatInterval::new(inf_lo.expect("sampled"), inf_hi.expect("sampled")).expect("bounds ordered");
    let sup = RatInterval::new(sup_lo.expect("sampled"), sup_hi.expect("sampled")).expect("bounds ordered");
    Ok(Some(SideBounds {
        inf,
        sup,
        level: m,
        samples: pts.len(),
    }))
}

/// Outcome of local-minimum search for `T(x + h) - T(x) - ζh ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinWitness {
    pub zeta: Rational,
    pub first_level: usize,
    /// Least `n` with `Σ_{k=n_0}^{n} w_k > Σ_{k<n_0} w_k + |ζ|`.
    pub threshold_level: usize,
    /// `ρα_n / 3`.
    pub radius: Rational,
    pub checked_level: usize,
    pub points: usize,
    /// Minimum of `S_N(x + h) - S_N(x) - ζh` over the grid.
    pub min_excess: Rational,
    pub passed: bool,
}

pub fn local_min_witness(
    t: &GeneralizedTakagi,
    x: &Rational,
    zeta: &Rational,
) -> Result<LocalMinWitness, DerivativeError> {
    local_min_witness_with(t, x, zeta, DiniOptions::default().budget)
}

/// Grid check of the local-minimum inequality on `(x - ρα_n/3, x + ρα_n/3)`.
///
/// The terms past the checked level are nonnegative and vanish at `x`, so a pass on the
/// kinks of `S_N` is a pass for `T_w`.
pub fn local_min_witness_with(
    t: &GeneralizedTakagi,
    x: &Rational,
    zeta: &Rational,
    budget: usize,
) -> Result<LocalMinWitness, DerivativeError> {
    let w = t.weights();
    let d = t.decomposition();
    if !w.is_nonnegative() {
        let index = w.first_negative(t.depth().max(64)).unwrap_or(0);
        return Err(DerivativeError::NegativeWeight { index });
    }
    if w.in_l1() {
        return Err(DerivativeError::SummableWeights);
    }
    let n0 = d
        .first_level_containing(x)
        .ok_or_else(|| DerivativeError::NotInD { x: x.clone() })?;
    let head = if n0 == 0 { Rational::zero() } else { w.sum(0, n0 - 1) };
    let target = head + zeta.abs();
    let n = (n0..=t.depth())
        .find(|&n| w.sum(n0, n) > target)
        .ok_or(DerivativeError::ThresholdNotReached { available: t.depth() })?;
    let radius = d.effective_rho() * d.alpha(n) / Rational::from(3);
    let lo = std::cmp::max(x - &radius, d.lo().clone());
    let hi = std::cmp::min(x + &radius, d.hi().clone());
    let cap = num_bigint::BigInt::from(budget);
    let mut level = n;
    for cand in n + 1..=t.depth() {
        if t.kink_count_estimate(cand, &lo, &hi) > cap {
            break;
        }
        level = cand;
    }
    let mut pts = t.kink_points(level, &lo, &hi)?;
    pts.push(lo.clone());
    pts.push(hi.clone());
    pts.sort();
    pts.dedup();
    let at_x = t.partial_sum(level, x)?;
    let min_excess = pts
        .iter()
        .map(|v| t.partial_sum(level, v).map(|s| s - &at_x - zeta * &(v - x)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .expect("grid is nonempty");
    Ok(LocalMinWitness {
        zeta: zeta.clone(),
        first_level: n0,
        threshold_level: n,
        radius,
        checked_level: level,
        points: pts.len(),
        passed: !min_excess.is_negative(),
        min_excess,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Certificates at every scale of the window with a gap that does not collapse.
    EmptyCertified { depths: Vec<usize> },
    /// The local-minimum witness passed for every tested `ζ`.
    AllReals { zetas: Vec<Rational> },
    /// One-sided bounds contract onto a single value.
    DerivativeCandidate { value: RatInterval },
    /// Enclosures of the lower and upper endpoints.
    CandidateInterval { lower: RatInterval, upper: RatInterval },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::EmptyCertified { .. } => "empty-certified",
            Verdict::AllReals { .. } => "all-R-evidence",
            Verdict::DerivativeCandidate { .. } => "derivative-candidate",
            Verdict::CandidateInterval { .. } => "candidate-interval",
        }
    }

    fn negated(&self) -> Self {
        match self {
            Verdict::DerivativeCandidate { value } => Verdict::DerivativeCandidate { value: value.neg() },
            Verdict::CandidateInterval { lower, upper } => Verdict::CandidateInterval {
                lower: upper.neg(),
                upper: lower.neg(),
            },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffOptions {
    pub zetas: Vec<Rational>,
    pub dini: DiniOptions,
}

impl Default for SubdiffOptions {
    fn default() -> Self {
        SubdiffOptions {
            zetas: default_zetas(),
            dini: DiniOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffEstimate {
    pub point: Rational,
    pub class: PointClass,
    pub horizon: usize,
    pub verdict: Verdict,
    /// Dini bounds of the function the verdict was computed for (the negation, for
    /// superdifferentials).
    pub dini: Option<DiniEstimate>,
    pub witnesses: Vec<LocalMinWitness>,
}

impl SubdiffEstimate {
    pub fn is_empty_certified(&self) -> bool {
        matches!(self.verdict, Verdict::EmptyCertified { .. })
    }

    /// Outer candidate interval, when the verdict names one.
    pub fn interval(&self) -> Option<RatInterval> {
        match &self.verdict {
            Verdict::DerivativeCandidate { value } => Some(value.clone()),
            Verdict::CandidateInterval { lower, upper } => {
                RatInterval::new(lower.lo().clone(), upper.hi().clone()).ok()
            }
            _ => None,
        }
    }

    pub fn negated(&self) -> Self {
        SubdiffEstimate {
            verdict: self.verdict.negated(),
            ..self.clone()
        }
    }

    pub const CSV_HEADER: &'static str =
        "point,classification,horizon,d_plus_lo,d_plus_hi,D_minus_lo,D_minus_hi,verdict";

    pub fn csv_row(&self) -> String {
        let (dp, dm) = match &self.dini {
            Some(e) => (
                [e.d_plus.lo().to_string(), e.d_plus.hi().to_string()],
                [e.d_minus.lo().to_string(), e.d_minus.hi().to_string()],
            ),
            None => Default::default(),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.point,
            self.class,
            self.horizon,
            dp[0],
            dp[1],
            dm[0],
            dm[1],
            self.verdict.label()
        )
    }
}

pub fn subdifferential_estimate(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
) -> Result<SubdiffEstimate, DerivativeError> {
    subdifferential_estimate_with(t, x, horizon, &SubdiffOptions::default())
}

/// Finite-horizon verdict on `∂T_w(x) = [D⁻, d₊] ∩ ℝ`.
pub fn subdifferential_estimate_with(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
    opts: &SubdiffOptions,
) -> Result<SubdiffEstimate, DerivativeError> {
    let class = classify(t.decomposition(), x)?;
    let mut witnesses = Vec::new();
    let w = t.weights();
    if class.kind == PointKind::InD && w.is_nonnegative() && !w.in_l1() {
        let mut all = true;
        for z in &opts.zetas {
            match local_min_witness_with(t, x, z, opts.dini.budget) {
                Ok(wit) => {
                    all &= wit.passed;
                    witnesses.push(wit);
                }
                Err(DerivativeError::ThresholdNotReached { .. }) => all = false,
                Err(e) => return Err(e),
            }
        }
        if all {
            return Ok(SubdiffEstimate {
                point: x.clone(),
                class,
                horizon,
                verdict: Verdict::AllReals {
                    zetas: opts.zetas.clone(),
                },
                dini: None,
                witnesses,
            });
        }
    }
    let est = dini_with(t, x, horizon, &opts.dini)?;
    let depths: Vec<usize> = est
        .scales
        .iter()
        .filter(|s| s.empty_certificate().is_some())
        .map(|s| s.n)
        .collect();
    let window: Vec<&ScaleBounds> = est
        .window()
        .iter()
        .filter(|s| s.right.is_some() && s.left.is_some())
        .collect();
    let gaps: Vec<Option<Rational>> = window.iter().map(|s| s.empty_certificate()).collect();
    let persistent = match (gaps.first(), gaps.last()) {
        (Some(Some(first)), Some(Some(last))) => {
            gaps.iter().all(|g| g.is_some()) && last * &Rational::from(2) >= *first
        }
        _ => false,
    };
    let contracting = match (
        window.first().and_then(|s| s.spread()),
        window.last().and_then(|s| s.spread()),
    ) {
        (Some(first), Some(last)) => last.width().is_zero() || last.width() * Rational::from(2) <= first.width(),
        _ => false,
    };
    let verdict = if persistent {
        Verdict::EmptyCertified { depths }
    } else if contracting {
        Verdict::DerivativeCandidate {
            value: est.d_minus.hull(&est.d_plus),
        }
    } else {
        Verdict::CandidateInterval {
            lower: est.d_minus.clone(),
            upper: est.d_plus.clone(),
        }
    };
    Ok(SubdiffEstimate {
        point: x.clone(),
        class,
        horizon: est.horizon,
        verdict,
        dini: Some(est),
        witnesses,
    })
}

/// `∂⁺T(x) = -∂(-T)(x)`.
pub fn superdifferential_estimate(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
) -> Result<SubdiffEstimate, DerivativeError> {
    superdifferential_estimate_with(t, x, horizon, &SubdiffOptions::default())
}

pub fn superdifferential_estimate_with(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
    opts: &SubdiffOptions,
) -> Result<SubdiffEstimate, DerivativeError> {
    Ok(subdifferential_estimate_with(&t.negated(), x, horizon, opts)?.negated())
}

/// Window proxies and closed forms for `liminf` / `limsup` of `Σ_{k=1}^n w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumLimits {
    pub horizon: usize,
    /// Minima over `[⌈h/2⌉, h]` and `[⌈3h/4⌉, h]`.
    pub liminf_est: RatInterval,
    pub limsup_est: RatInterval,
    pub liminf: Extended,
    pub limsup: Extended,
}

pub fn partial_sum_liminf_limsup(w: &WeightSequence, horizon: usize) -> PartialSumLimits {
    let h = horizon.max(1);
    let sums: Vec<Rational> = (0..=h)
        .scan(Rational::zero(), |acc, n| {
            if n >= 1 {
                *acc += w.weight(n);
            }
            Some(acc.clone())
        })
        .collect();
    let window = |start: usize| &sums[start.max(1)..=h];
    let (wide, narrow) = (window(h.div_ceil(2)), window((3 * h).div_ceil(4)));
    let min = |s: &[Rational]| s.iter().min().expect("nonempty").clone();
    let max = |s: &[Rational]| s.iter().max().expect("nonempty").clone();
    let (liminf, limsup) = w.partial_sum_limits();
    PartialSumLimits {
        horizon: h,
        liminf_est: RatInterval::spanning(min(wide), min(narrow)),
        limsup_est: RatInterval::spanning(max(wide), max(narrow)),
        liminf,
        limsup,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSumReport {
    pub first_level: usize,
    /// `min_{n in window} Σ_{k=n_0}^n w_k - Σ_{k<n_0} w_k`.
    pub window_min: Rational,
    /// `liminf_n Σ_{k=n_0}^n w_k - Σ_{k<n_0} w_k`.
    pub shifted_liminf: Extended,
    pub verdict: Verdict,
    /// Negative shifted liminf exactly when the subdifferential came out empty.
    pub consistent: bool,
}

/// Sign of the shifted liminf next to the subdifferential verdict at `x ∈ D_{n_0}`
/// with `x ∈ D̃_k` for all `k < n_0`.
pub fn shifted_sum_test(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
) -> Result<ShiftedSumReport, DerivativeError> {
    let d = t.decomposition();
    let class = classify(d, x)?;
    let n0 = match class.first_level {
        Some(n0) if class.midpoint_levels == (0..n0).collect::<Vec<_>>() => n0,
        _ => {
            return Err(DerivativeError::Premise(format!(
                "{x} must lie in some D_n0 and be a midpoint of every earlier level (class {class})"
            )))
        }
    };
    let report = validate(d);
    if !report.all(|l| l.alpha_le_half_rho.clone()) {
        return Err(DerivativeError::Premise("alpha_(n+1) <= rho*alpha_n/2 fails".into()));
    }
    let w = t.weights();
    let head = if n0 == 0 { Rational::zero() } else { w.sum(0, n0 - 1) };
    let h = horizon.max(n0 + 1);
    let window_min = (h.div_ceil(2).max(n0)..=h)
        .map(|n| w.sum(n0, n) - &head)
        .min()
        .expect("nonempty window");
    let before = if n0 <= 1 { Rational::zero() } else { w.sum(1, n0 - 1) };
    let (liminf, _) = w.partial_sum_limits();
    let shifted_liminf = liminf.add_finite(&(-(before + &head)));
    let est = subdifferential_estimate(t, x, horizon)?;
    let negative = shifted_liminf.signum() < 0;
    let consistent = negative == est.is_empty_certified();
    Ok(ShiftedSumReport {
        first_level: n0,
        window_min,
        shifted_liminf,
        verdict: est.verdict,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChordMode {
    Straddle,
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChordCheck {
    pub cauchy: bool,
    /// `max - min` of the quotients over the second half of the trace.
    pub oscillation: Rational,
    /// Largest chord ratio in the trace (one-sided modes only).
    pub ratio_bound: Option<Rational>,
    pub rows: usize,
}

/// Whether a chord-quotient trace settles within `tol`.
pub fn chord_limit_check(
    trace: &QuotientTrace,
    mode: ChordMode,
    tol: &Rational,
) -> Result<ChordCheck, DerivativeError> {
    let rows = &trace.rows;
    if rows.len() < 2 {
        return Err(DerivativeError::Premise(
            "a chord check needs at least two quotients".into(),
        ));
    }
    let half = rows.len() / 2;
    let ratio_bound = match mode {
        ChordMode::Straddle => None,
        ChordMode::Right | ChordMode::Left => {
            let ratios: Vec<Rational> = rows
                .iter()
                .map(|r| {
                    r.ratio
                        .clone()
                        .ok_or_else(|| DerivativeError::Premise(format!("row {} has no chord ratio", r.n)))
                })
                .collect::<Result<_, _>>()?;
            let early = ratios[..half].iter().max().cloned().unwrap_or_else(Rational::zero);
            let late = ratios[half..].iter().max().cloned().expect("nonempty");
            if late > Rational::from(2) * early + Rational::one() {
                return Err(DerivativeError::RatioUnbounded(late));
            }
            ratios.into_iter().max()
        }
    };
    let tail = &rows[half..];
    let max = tail.iter().map(|r| &r.quotient).max().expect("nonempty");
    let min = tail.iter().map(|r| &r.quotient).min().expect("nonempty");
    let oscillation = max - min;
    Ok(ChordCheck {
        cauchy: &oscillation <= tol,
        oscillation,
        ratio_bound,
        rows: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build_counterexample, build_radix};
    use crate::sequences::{parity_trace, straddle_trace};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn inst(d: Decomposition, w: &str) -> GeneralizedTakagi {
        GeneralizedTakagi::new(d, w.parse().unwrap()).unwrap()
    }

    #[test]
    fn classification() {
        let r2 = build_radix(2, 12).unwrap();
        assert_eq!(classify(&r2, &q("3/8")).unwrap().to_string(), "in_D(3)");
        assert_eq!(classify(&r2, &q("1/3")).unwrap().kind, PointKind::Generic);
        let r3 = build_radix(3, 12).unwrap();
        let c = classify(&r3, &q("1/2")).unwrap();
        assert_eq!(c.kind, PointKind::InDTilde);
        assert_eq!(c.midpoint_levels, (0..=12).collect::<Vec<_>>());
        assert_eq!(c.to_string(), "in_D_tilde(0..=12)");
        let mid = classify(&build_radix(4, 6).unwrap(), &q("1/2")).unwrap();
        assert_eq!((mid.first_level, mid.midpoint_levels.clone()), (Some(1), vec![0]));
        assert!(classify(&r2, &q("2")).is_err());
    }

    #[test]
    fn zero_weights_pin_zero() {
        let t = inst(build_radix(2, 10).unwrap(), "const 0");
        let e = dini(&t, &q("1/3"), 8).unwrap();
        assert_eq!(e.d_plus, RatInterval::point(q("0")));
        assert_eq!(e.d_minus, RatInterval::point(q("0")));
        let s = subdifferential_estimate(&t, &q("1/3"), 8).unwrap();
        assert_eq!(
            s.verdict,
            Verdict::DerivativeCandidate {
                value: RatInterval::point(q("0"))
            }
        );
        let sup = superdifferential_estimate(&t, &q("1/4"), 8).unwrap();
        assert_eq!(sup.interval(), Some(RatInterval::point(q("0"))));
    }

    #[test]
    fn takagi_one_third_is_empty_at_every_scale() {
        let t = inst(build_radix(2, 28).unwrap(), "const 1");
        let s = subdifferential_estimate(&t, &q("1/3"), 20).unwrap();
        match &s.verdict {
            Verdict::EmptyCertified { depths } => assert!(depths.len() >= 10),
            v => panic!("unexpected {v:?}"),
        }
        let e = s.dini.unwrap();
        assert!(e.d_plus.contains(&q("-1")));
        assert!(e.d_minus.contains(&q("2")));
    }

    #[test]
    fn superdifferential_of_takagi_at_five_sixths() {
        let t = inst(build_radix(2, 28).unwrap(), "const 1");
        let x = q("5/6");
        let neg = subdifferential_estimate(&t.negated(), &x, 20).unwrap();
        let e = neg.dini.as_ref().unwrap();
        assert!(e.d_minus.contains(&q("1")), "{}", e.d_minus);
        assert!(e.d_plus.contains(&q("2")), "{}", e.d_plus);
        assert!(e.d_minus.width() <= q("1/4") && e.d_plus.width() <= q("1/4"));
        let sup = superdifferential_estimate(&t, &x, 20).unwrap();
        assert_eq!(sup, neg.negated());
        let i = sup.interval().unwrap();
        assert!(i.contains(&q("-2")) && i.contains(&q("-1")));
    }

    #[test]
    fn superdifferential_at_one_third_matches_formula() {
        let t = inst(build_radix(2, 28).unwrap(), "const 1");
        let formula = takagi_superdiff_formula(&"(01)".parse().unwrap()).unwrap();
        let neg = subdifferential_estimate(&t.negated(), &q("1/3"), 20).unwrap();
        let e = neg.dini.unwrap();
        assert!(e.d_minus.contains(&-formula.hi().clone()), "{}", e.d_minus);
        assert!(e.d_plus.contains(&-formula.lo().clone()), "{}", e.d_plus);
        let formula = takagi_superdiff_formula(&"(10)".parse().unwrap()).unwrap();
        let e = dini(&t.negated(), &q("2/3"), 20).unwrap();
        assert!(e.d_minus.contains(&-formula.hi().clone()) && e.d_plus.contains(&-formula.lo().clone()));
    }

    #[test]
    fn local_minimum_at_dyadics() {
        let t = inst(build_radix(2, 20).unwrap(), "const 1");
        let w = local_min_witness(&t, &q("1/2"), &q("3")).unwrap();
        assert_eq!((w.first_level, w.threshold_level), (1, 5));
        assert!(w.passed);
        for x in ["1/2", "1/4", "3/4"] {
            for z in default_zetas() {
                assert!(local_min_witness(&t, &q(x), &z).unwrap().passed, "{x} {z}");
            }
        }
        let s = subdifferential_estimate(&t, &q("1/4"), 15).unwrap();
        assert_eq!(s.verdict.label(), "all-R-evidence");
        let neg = inst(build_radix(2, 10).unwrap(), "alt 1");
        assert!(matches!(
            local_min_witness(&neg, &q("1/2"), &q("0")),
            Err(DerivativeError::NegativeWeight { index: 1 })
        ));
        let summable = inst(build_radix(2, 10).unwrap(), "geom 1 1/2");
        assert!(matches!(
            local_min_witness(&summable, &q("1/2"), &q("0")),
            Err(DerivativeError::SummableWeights)
        ));
        assert!(matches!(
            local_min_witness(&inst(build_radix(2, 6).unwrap(), "const 1"), &q("1/2"), &q("100")),
            Err(DerivativeError::ThresholdNotReached { .. })
        ));
    }

    #[test]
    fn partial_sum_limits() {
        let alt = partial_sum_liminf_limsup(&"alt 1".parse().unwrap(), 40);
        assert_eq!(
            (alt.liminf.clone(), alt.limsup.clone()),
            (Extended::Finite(q("-1")), Extended::Finite(q("0")))
        );
        assert_eq!(alt.liminf_est, RatInterval::point(q("-1")));
        let zero = partial_sum_liminf_limsup(&WeightSequence::zero(), 10);
        assert_eq!(zero.limsup_est, RatInterval::point(q("0")));
        let triples = partial_sum_liminf_limsup(&WeightSequence::triple_pattern(), 60);
        assert_eq!(
            (triples.liminf, triples.limsup),
            (Extended::Finite(q("0")), Extended::Finite(q("1")))
        );
        assert!(triples.liminf_est.hi() < &q("0"));
    }

    #[test]
    fn shifted_sums_agree_with_verdicts() {
        let d = build_radix(4, 14).unwrap();
        let ones = shifted_sum_test(&inst(d.clone(), "const 1"), &q("1/2"), 12).unwrap();
        assert_eq!(ones.shifted_liminf, Extended::PosInf);
        assert!(ones.consistent);
        let alt = shifted_sum_test(&inst(d, "alt 1"), &q("1/2"), 12).unwrap();
        assert_eq!(alt.shifted_liminf, Extended::Finite(q("-2")));
        assert!(alt.consistent, "{:?}", alt.verdict);
        let skewed = crate::decomposition::build_skewed(8).unwrap();
        assert!(matches!(
            shifted_sum_test(&inst(skewed, "const 1"), &q("7/12"), 6),
            Err(DerivativeError::Premise(_))
        ));
        let r2 = build_radix(2, 10).unwrap();
        assert!(matches!(
            shifted_sum_test(&inst(r2, "const 1"), &q("1/4"), 8),
            Err(DerivativeError::Premise(_))
        ));
    }

    #[test]
    fn chord_checks() {
        let t = inst(build_radix(2, 24).unwrap(), "const 1");
        let tr = straddle_trace(&t, &q("1/3"), 24).unwrap();
        let c = chord_limit_check(&tr, ChordMode::Straddle, &default_cauchy_tolerance()).unwrap();
        assert!(!c.cauchy);
        assert_eq!(c.oscillation, q("1"));
        let mut flat = straddle_trace(&inst(build_radix(2, 12).unwrap(), "const 0"), &q("1/3"), 12).unwrap();
        for r in &mut flat.rows {
            r.quotient += q("7/3");
        }
        assert!(
            chord_limit_check(&flat, ChordMode::Straddle, &default_cauchy_tolerance())
                .unwrap()
                .cauchy
        );
        let mid = parity_trace(&inst(build_radix(3, 12).unwrap(), "const 1"), &q("1/2"), 12).unwrap();
        let c = chord_limit_check(&mid, ChordMode::Right, &default_cauchy_tolerance()).unwrap();
        assert!(c.ratio_bound.unwrap() <= q("1"));
        assert!(!c.cauchy);
    }

    #[test]
    fn counterexample_dini_at_zero_contracts() {
        // Annulus n lies in |h| <= 2^{-⌊n/2⌋}, where quotients are at most 2(2/3)^{⌊n/2⌋-1}.
        for with_zero in [false, true] {
            let t = GeneralizedTakagi::new(
                build_counterexample(20, with_zero).unwrap(),
                WeightSequence::alternating(Rational::one()),
            )
            .unwrap();
            let e = dini(&t, &q("0"), 13).unwrap();
            for s in e.scales.iter().filter(|s| s.n >= 2) {
                let bound = Rational::from(2) * Rational::ratio(2, 3).pow((s.n / 2) as i32 - 1);
                let spread = s.spread().unwrap();
                assert!(
                    spread.lo().abs() <= bound && spread.hi().abs() <= bound,
                    "scale {} {}",
                    s.n,
                    spread
                );
            }
            let far = Rational::from(2) * Rational::ratio(2, 3).pow(2);
            assert!(e.d_plus.lo().abs() <= far && e.d_minus.hi().abs() <= far);
        }
    }
}
