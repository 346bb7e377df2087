//! Canonical point sequences toward a base point and the difference-quotient traces
//! built from them.
//!
//! Left-side traces use the reflected orientation: a left quotient is reported as
//! `(T(y) - T(x)) / (x - y)`, which is what the right-side identities become after
//! reflecting the decomposition.

use std::fmt::Write as _;

use thiserror::Error;

use crate::decomposition::{validate, Decomposition, DecompositionError};
use crate::evaluation::{EvaluationError, GeneralizedTakagi, Side};
use crate::numerics::{RatInterval, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("point {x} must lie strictly inside the carrier [{lo}, {hi}]")]
    NotInterior { x: Rational, lo: Rational, hi: Rational },
    #[error("point {x} is not in D_1")]
    NotInFirstLevel { x: Rational },
    #[error("point {x} is not in any stored level")]
    NotInD { x: Rational },
    #[error("point {x} lies in D_{level}; straddling neighbours need x outside D")]
    InD { x: Rational, level: usize },
    #[error("w_0 = {0} must be 0; reduce the instance first")]
    NonzeroFirstWeight(Rational),
    #[error("neighbour sequence is not strictly monotone at level {level}")]
    NotMonotone { level: usize },
    #[error("the impossible configuration g_(n-2)(y_n) = y_(n-2) - y_n occurred at level {level}")]
    ImpossibleNeighbour { level: usize },
    #[error("secant endpoints coincide at {0}")]
    DegenerateSecant(Rational),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// Neighbours of `x` at one level: `a_n < x < b_n` adjacent in `D_n`, and the midpoint
/// `c_n` when `x ∉ D_n`. For `x ∈ D_n` the neighbours are the adjacent points `y_n` on
/// each side.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborLevel {
    pub n: usize,
    pub below: Rational,
    pub above: Rational,
    pub midpoint: Option<Rational>,
    pub x_in_level: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSeq {
    pub base: Rational,
    pub levels: Vec<NeighborLevel>,
}

impl NeighborSeq {
    pub fn at(&self, n: usize) -> &NeighborLevel {
        &self.levels[n]
    }

    /// The adjacent point on `side` at level `n` (`b_n` or `a_n`, `y_n` for `x ∈ D_n`).
    pub fn toward(&self, n: usize, side: Side) -> &Rational {
        match side {
            Side::Right => &self.levels[n].above,
            Side::Left => &self.levels[n].below,
        }
    }

    /// First level `≥ from` at which the side sequence fails to move strictly toward `x`.
    pub fn first_stall(&self, side: Side, from: usize) -> Option<usize> {
        (from + 1..self.levels.len()).find(|&n| self.toward(n, side) == self.toward(n - 1, side))
    }
}

/// Neighbour points of `x` for levels `0..=depth`.
///
/// ```
/// use takagi_lab::decomposition::build_radix;
/// use takagi_lab::sequences::neighbors;
/// use takagi_lab::Rational;
///
/// let s = neighbors(&build_radix(2, 4).unwrap(), &Rational::ratio(1, 3), 2).unwrap();
/// assert_eq!((s.at(2).below.clone(), s.at(2).above.clone()), (Rational::ratio(1, 4), Rational::ratio(1, 2)));
/// ```
pub fn neighbors(d: &Decomposition, x: &Rational, depth: usize) -> Result<NeighborSeq, SequenceError> {
    if !(d.lo() < x && x < d.hi()) {
        return Err(SequenceError::NotInterior {
            x: x.clone(),
            lo: d.lo().clone(),
            hi: d.hi().clone(),
        });
    }
    let depth = depth.min(d.depth());
    let levels = (0..=depth)
        .map(|n| {
            let level = d.level(n);
            let below = level.below(x).expect("interior point has a lower neighbour");
            let above = level.above(x).expect("interior point has an upper neighbour");
            let x_in_level = level.contains(x);
            let midpoint = (!x_in_level).then(|| below.midpoint(&above));
            NeighborLevel {
                n,
                below,
                above,
                midpoint,
                x_in_level,
            }
        })
        .collect();
    Ok(NeighborSeq {
        base: x.clone(),
        levels,
    })
}

/// Enclosure of `(T(v) - T(u)) / (v - u)`; each endpoint is evaluated to `eps / 2`.
pub fn secant(t: &GeneralizedTakagi, u: &Rational, v: &Rational, eps: &Rational) -> Result<RatInterval, SequenceError> {
    if u == v {
        return Err(SequenceError::DegenerateSecant(u.clone()));
    }
    let half = eps * &Rational::ratio(1, 2);
    let tu = t.evaluate(u, &half)?;
    let tv = t.evaluate(v, &half)?;
    let diff = tv.interval.sub(&tu.interval);
    let span = v - u;
    Ok(diff.scale(&span.recip().expect("u != v")))
}

/// Exact `(T(v) - T(u)) / (v - u)` when both points lie in stored levels.
pub fn exact_secant(t: &GeneralizedTakagi, u: &Rational, v: &Rational) -> Result<Option<Rational>, SequenceError> {
    if u == v {
        return Err(SequenceError::DegenerateSecant(u.clone()));
    }
    Ok(match (t.exact_value(u)?, t.exact_value(v)?) {
        (Some(a), Some(b)) => Some((b - a) / (v - u)),
        _ => None,
    })
}

/// Which identity a trace row exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Δ_n` along the adjacent points `y_n` of `x ∈ D_1`.
    Adjacent,
    /// `x` is a midpoint at every level: chord `(b_{n+1}, b_n)`.
    Midpoint,
    /// Chord `(a_n, b_n)` straddling `x`.
    Straddle,
    /// Chord `(b_n, b_{n-1})` right of `x`.
    RightChord,
    /// Chord `(a_{n-1}, a_n)` left of `x`.
    LeftChord,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Adjacent => "adjacent",
            Branch::Midpoint => "midpoint",
            Branch::Straddle => "straddle",
            Branch::RightChord => "right-chord",
            Branch::LeftChord => "left-chord",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub branch: Branch,
    /// `[y_n]` for adjacent rows, the chord endpoints otherwise.
    pub points: Vec<Rational>,
    /// `Δ_n` or the chord quotient.
    pub quotient: Rational,
    /// Closed form the quotient should equal, when the branch predicts one.
    pub expected: Option<Rational>,
    pub gamma: Option<Rational>,
    /// Closed-form expansion of `Γ_n`, when `δ_{n-1} < 1` and `δ_n < 1`.
    pub gamma_expected: Option<Rational>,
    /// `δ_n` read off `Δ_{n+1}` (undefined when `w_n = 0`).
    pub delta: Option<Rational>,
    /// `δ_n` from the point geometry.
    pub delta_geometric: Option<Rational>,
    pub eta: Option<Rational>,
    pub lambda: Option<Rational>,
    /// Chord ratio `|u - x| / |v - u|` and the bound it must respect.
    pub ratio: Option<Rational>,
    pub ratio_bound: Option<Rational>,
    /// `g_k(y_n) = |y_n - x|` for every `k ≤ n - 2`.
    pub guard_ok: Option<bool>,
    pub level: usize,
    pub enclosure_width: Rational,
}

impl TraceRow {
    fn new(n: usize, branch: Branch, points: Vec<Rational>, quotient: Rational, level: usize) -> Self {
        TraceRow {
            n,
            branch,
            points,
            quotient,
            expected: None,
            gamma: None,
            gamma_expected: None,
            delta: None,
            delta_geometric: None,
            eta: None,
            lambda: None,
            ratio: None,
            ratio_bound: None,
            guard_ok: None,
            level,
            enclosure_width: Rational::zero(),
        }
    }

    pub fn matches_expected(&self) -> Option<bool> {
        self.expected.as_ref().map(|e| e == &self.quotient)
    }

    pub fn gamma_matches(&self) -> Option<bool> {
        match (&self.gamma, &self.gamma_expected) {
            (Some(g), Some(e)) => Some(g == e),
            _ => None,
        }
    }

    pub fn ratio_ok(&self) -> Option<bool> {
        match (&self.ratio, &self.ratio_bound) {
            (Some(r), Some(b)) => Some(r <= b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientTrace {
    pub base: Rational,
    pub side: Option<Side>,
    pub rho: Rational,
    /// Whether `α_{n+1} ≤ (ρ/(1-ρ))·α_n` held at every decided level.
    pub spacing_hypothesis: bool,
    pub rows: Vec<TraceRow>,
}

impl QuotientTrace {
    pub fn row(&self, n: usize) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn quotients(&self) -> Vec<Rational> {
        self.rows.iter().map(|r| r.quotient.clone()).collect()
    }

    /// `δ_n ∈ [ρ, 1]` for each row with a geometric `δ_n`.
    pub fn delta_in_range(&self) -> Vec<(usize, bool)> {
        self.rows
            .iter()
            .filter_map(|r| {
                r.delta_geometric
                    .as_ref()
                    .map(|d| (r.n, d >= &self.rho && d <= &Rational::one()))
            })
            .collect()
    }

    /// CSV with exact `p/q` values; empty cells mark undefined entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,branch,points,Delta_n,Gamma_n,delta_n,eta_n,lambda_n,expected,ratio,partial_sum_level,enclosure_width\n",
        );
        let cell = |v: &Option<Rational>| v.as_ref().map(|r| r.to_string()).unwrap_or_default();
        for r in &self.rows {
            let pts: Vec<String> = r.points.iter().map(|p| p.to_string()).collect();
            let delta = r.delta.clone().or_else(|| r.delta_geometric.clone());
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.branch.label(),
                pts.join(" "),
                r.quotient,
                cell(&r.gamma),
                cell(&delta),
                cell(&r.eta),
                cell(&r.lambda),
                cell(&r.expected),
                cell(&r.ratio),
                r.level,
                r.enclosure_width
            )
            .expect("string write");
        }
        out
    }
}

/// Result of moving the base point to level 1 with `w_0 = 0`.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// Least `n` with `x ∈ D_n`.
    pub first_level: usize,
    /// Shift applied to the level index (`n_0 - 1`).
    pub offset: isize,
    /// One-sided derivatives of `G = Σ_{k<n_0} w_k g_k` at `x`.
    pub left_slope: Rational,
    pub right_slope: Rational,
    /// `Σ_{k≥n_0} w_k g_k`, re-indexed so that `x ∈ D_1` and `w_0 = 0`.
    pub residual: GeneralizedTakagi,
}

/// Splits off the finitely many terms below the first level containing `x`.
pub fn reduce_to_d1(t: &GeneralizedTakagi, x: &Rational) -> Result<Reduction, SequenceError> {
    let d = t.decomposition();
    d.check_in_carrier(x)?;
    let n0 = d
        .first_level_containing(x)
        .ok_or_else(|| SequenceError::NotInD { x: x.clone() })?;
    let (left_slope, right_slope) = if n0 == 0 {
        (Rational::zero(), Rational::zero())
    } else {
        (
            t.partial_sum_slope(n0 - 1, x, Side::Left)?,
            t.partial_sum_slope(n0 - 1, x, Side::Right)?,
        )
    };
    let offset = n0 as isize - 1;
    let residual = GeneralizedTakagi::new(d.shifted(offset)?, t.weights().reindexed(offset))?;
    Ok(Reduction {
        first_level: n0,
        offset,
        left_slope,
        right_slope,
        residual,
    })
}

fn spacing_hypothesis(d: &Decomposition) -> (Rational, bool) {
    let report = validate(d);
    let rho = d.effective_rho();
    let ok = report.all(|l| l.alpha_le_rho_over_1mrho.clone());
    let ok = ok && report.rho.is_some();
    (rho, ok)
}

/// `T(y)` for `y ∈ D_n`, summing only `k = 1..n-1` (`w_0 = 0`, higher terms vanish).
fn value_on_level(t: &GeneralizedTakagi, y: &Rational, n: usize) -> Result<Rational, SequenceError> {
    let d = t.decomposition();
    debug_assert!(d.level(n).contains(y));
    let mut total = Rational::zero();
    for k in 1..n {
        total += t.weight(k) * d.level(k).distance(y);
    }
    Ok(total)
}

/// `Δ_n`, `Γ_n`, `δ_n`, `η_n`, `λ_n` along the adjacent points `y_n` of `x ∈ D_1`.
pub fn delta_trace(
    t: &GeneralizedTakagi,
    x: &Rational,
    side: Side,
    depth: usize,
) -> Result<QuotientTrace, SequenceError> {
    let d = t.decomposition();
    if !t.weight(0).is_zero() {
        return Err(SequenceError::NonzeroFirstWeight(t.weight(0)));
    }
    if d.depth() < 1 || !d.level(1).contains(x) {
        return Err(SequenceError::NotInFirstLevel { x: x.clone() });
    }
    let depth = depth.min(d.depth());
    let seq = neighbors(d, x, depth)?;
    let s = Rational::from(side.sign() as i64);
    let y = |n: usize| seq.toward(n, side).clone();
    for n in 1..depth {
        if (&s * &(y(n) - y(n + 1))).is_negative() || y(n) == y(n + 1) {
            return Err(SequenceError::NotMonotone { level: n + 1 });
        }
    }
    let (rho, hypothesis) = spacing_hypothesis(d);
    let dist = |n: usize| &s * &(y(n) - x);
    let values: Vec<Rational> = (0..=depth)
        .map(|n| {
            if n == 0 {
                Ok(Rational::zero())
            } else {
                value_on_level(t, &y(n), n)
            }
        })
        .collect::<Result<_, _>>()?;
    // Geometric δ_n for n ≥ 1: 1 when x is nearer to y_{n+1} than y_n is.
    let delta_geom = |n: usize| -> Option<Rational> {
        if n == 0 || n >= depth {
            return None;
        }
        let to_x = dist(n + 1);
        let to_prev = &s * &(y(n) - y(n + 1));
        Some(if to_x <= to_prev {
            Rational::one()
        } else {
            to_prev / to_x
        })
    };
    let mut rows = Vec::with_capacity(depth);
    for n in 1..=depth {
        let dn = dist(n);
        let quotient = &values[n] / &dn;
        let mut row = TraceRow::new(n, Branch::Adjacent, vec![y(n)], quotient, n.saturating_sub(1));
        let guard = (1..n.saturating_sub(1)).all(|k| d.level(k).distance(&y(n)) == dn);
        row.guard_ok = Some(guard);
        if hypothesis && !guard {
            return Err(SequenceError::ImpossibleNeighbour { level: n });
        }
        if n >= 2 {
            if let Some(dg) = delta_geom(n - 1) {
                row.expected = Some(t.weights().sum(1, n - 2) + dg * t.weight(n - 1));
            }
        } else {
            row.expected = Some(Rational::zero());
        }
        row.delta_geometric = delta_geom(n);
        if n < depth {
            let w_n = t.weight(n);
            if !w_n.is_zero() {
                let next = &values[n + 1] / &dist(n + 1);
                row.delta = Some((next - t.weights().sum(1, n - 1)) / w_n);
            }
            let step = &s * &(y(n) - y(n + 1));
            let gamma = (&values[n] - &values[n + 1]) / &step;
            if n >= 2 {
                if let (Some(prev), Some(cur)) = (delta_geom(n - 1), delta_geom(n)) {
                    if prev < Rational::one() && cur < Rational::one() {
                        let coeff = (&s * &(y(n - 1) - y(n)) - dist(n + 1)) / &step;
                        row.gamma_expected = Some(t.weights().sum(1, n - 2) + coeff * t.weight(n - 1) - t.weight(n));
                    }
                    row.eta = Some(&cur * &t.weight(n) + (Rational::one() - prev) * t.weight(n - 1));
                }
            }
            row.lambda = Some(&row.quotient - &gamma);
            row.gamma = Some(gamma);
        }
        rows.push(row);
    }
    Ok(QuotientTrace {
        base: x.clone(),
        side: Some(side),
        rho,
        spacing_hypothesis: hypothesis,
        rows,
    })
}

/// Alias of [`delta_trace`]: the rows carry `Γ_n` and its expansion alongside `Δ_n`.
pub fn gamma_trace(
    t: &GeneralizedTakagi,
    x: &Rational,
    side: Side,
    depth: usize,
) -> Result<QuotientTrace, SequenceError> {
    delta_trace(t, x, side, depth)
}

fn check_outside_d(d: &Decomposition, x: &Rational, depth: usize) -> Result<(), SequenceError> {
    match d.first_level_containing(x) {
        Some(level) if level <= depth => Err(SequenceError::InD { x: x.clone(), level }),
        _ => Ok(()),
    }
}

/// Exact value at a point of `D_n`, summing `k < n`.
fn level_value(t: &GeneralizedTakagi, y: &Rational, n: usize) -> Result<Rational, SequenceError> {
    if n == 0 {
        return Ok(Rational::zero());
    }
    Ok(t.partial_sum(n - 1, y)?)
}

/// Straddling quotients `(T(b_n) - T(a_n)) / (b_n - a_n)` for `x ∉ D`.
pub fn straddle_trace(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> Result<QuotientTrace, SequenceError> {
    let d = t.decomposition();
    let depth = depth.min(d.depth());
    check_outside_d(d, x, depth)?;
    let seq = neighbors(d, x, depth)?;
    let mut rows = Vec::new();
    for n in 0..=depth {
        let (a, b) = (&seq.at(n).below, &seq.at(n).above);
        let q = (level_value(t, b, n)? - level_value(t, a, n)?) / (b - a);
        let mut row = TraceRow::new(n, Branch::Straddle, vec![a.clone(), b.clone()], q, n.saturating_sub(1));
        row.ratio = Some((x - a) / (b - a));
        rows.push(row);
    }
    Ok(QuotientTrace {
        base: x.clone(),
        side: None,
        rho: d.effective_rho(),
        spacing_hypothesis: false,
        rows,
    })
}

/// One-sided chords `(b_n, b_{n-1})` (right) or `(a_{n-1}, a_n)` (left) with their distance ratio.
pub fn chord_trace(
    t: &GeneralizedTakagi,
    x: &Rational,
    side: Side,
    depth: usize,
) -> Result<QuotientTrace, SequenceError> {
    let d = t.decomposition();
    let depth = depth.min(d.depth());
    let seq = neighbors(d, x, depth)?;
    let mut rows = Vec::new();
    for n in 1..=depth {
        let near = seq.toward(n, side);
        let far = seq.toward(n - 1, side);
        if near == far {
            continue;
        }
        let q = (level_value(t, far, n - 1)? - level_value(t, near, n)?) / (far - near);
        let branch = if side == Side::Right {
            Branch::RightChord
        } else {
            Branch::LeftChord
        };
        let mut row = TraceRow::new(n, branch, vec![near.clone(), far.clone()], q, n.saturating_sub(1));
        row.ratio = Some((near - x).abs() / (far - near).abs());
        rows.push(row);
    }
    Ok(QuotientTrace {
        base: x.clone(),
        side: Some(side),
        rho: d.effective_rho(),
        spacing_hypothesis: false,
        rows,
    })
}

/// Quotients used to show non-differentiability off `D` under the parity conditions.
///
/// If `x` is a midpoint at every stored level the rows are chords `(b_{n+1}, b_n)`
/// with expected value `-Σ_{k=0}^{n} w_k`. Otherwise each row picks the straddle
/// chord when no earlier midpoint `c_k` falls in `(a_n, b_n)`, else a one-sided chord
/// on the far side of `c_n`; all predict `Σ_{k=0}^{n-1} w_k g'_k(x)`.
pub fn parity_trace(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> Result<QuotientTrace, SequenceError> {
    let d = t.decomposition();
    let depth = depth.min(d.depth());
    check_outside_d(d, x, depth)?;
    let seq = neighbors(d, x, depth)?;
    let rho = d.effective_rho();
    let inv_rho = rho.recip().expect("rho is positive");
    let perpetual = (0..=depth).all(|n| d.level(n).is_midpoint(x));
    let mut rows = Vec::new();
    if perpetual {
        for n in 0..depth {
            let (b_next, b) = (&seq.at(n + 1).above, &seq.at(n).above);
            if b_next == b {
                return Err(SequenceError::NotMonotone { level: n + 1 });
            }
            let q = (level_value(t, b_next, n + 1)? - level_value(t, b, n)?) / (b_next - b);
            let mut row = TraceRow::new(n, Branch::Midpoint, vec![b_next.clone(), b.clone()], q, n);
            row.expected = Some(-t.weights().sum(0, n));
            row.ratio = Some((b_next - x) / (b - b_next));
            row.ratio_bound = Some(inv_rho.clone());
            rows.push(row);
        }
    } else {
        for n in 1..=depth {
            let here = seq.at(n);
            let (a, b) = (&here.below, &here.above);
            let c_n = here.midpoint.clone().expect("x is outside D");
            let inside = (0..n).any(|k| {
                let c_k = seq.at(k).midpoint.as_ref().expect("x is outside D");
                a < c_k && c_k < b
            });
            let expected = t.partial_sum_slope(n - 1, x, Side::Right)?;
            let mut row = if !inside {
                let q = (level_value(t, b, n)? - level_value(t, a, n)?) / (b - a);
                TraceRow::new(n, Branch::Straddle, vec![a.clone(), b.clone()], q, n - 1)
            } else if &c_n < x {
                let prev = &seq.at(n - 1).above;
                let q = (level_value(t, b, n)? - level_value(t, prev, n - 1)?) / (b - prev);
                let mut r = TraceRow::new(n, Branch::RightChord, vec![b.clone(), prev.clone()], q, n - 1);
                r.ratio = Some((b - x) / (prev - b));
                r.ratio_bound = Some(inv_rho.clone());
                r
            } else if x < &c_n {
                let prev = &seq.at(n - 1).below;
                let q = (level_value(t, a, n)? - level_value(t, prev, n - 1)?) / (a - prev);
                let mut r = TraceRow::new(n, Branch::LeftChord, vec![prev.clone(), a.clone()], q, n - 1);
                r.ratio = Some((x - prev) / (a - prev));
                r.ratio_bound = Some(&inv_rho + &Rational::one());
                r
            } else {
                // x = c_n: a midpoint from here on; not a generic-branch row.
                continue;
            };
            row.expected = Some(expected);
            rows.push(row);
        }
    }
    Ok(QuotientTrace {
        base: x.clone(),
        side: None,
        rho,
        spacing_hypothesis: false,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build_divisor_chain, build_radix, build_skewed};
    use num_bigint::BigInt;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn inst(d: Decomposition, w: &str) -> GeneralizedTakagi {
        GeneralizedTakagi::new(d, w.parse().unwrap()).unwrap()
    }

    #[test]
    fn neighbours_in_radix() {
        let s = neighbors(&build_radix(2, 6).unwrap(), &q("1/3"), 6).unwrap();
        assert_eq!((s.at(1).below.clone(), s.at(1).above.clone()), (q("0"), q("1/2")));
        let m = neighbors(&build_radix(3, 8).unwrap(), &q("1/2"), 8).unwrap();
        assert!(m.levels.iter().all(|l| l.midpoint == Some(q("1/2"))));
        let y = neighbors(&build_radix(2, 8).unwrap(), &q("1/4"), 8).unwrap();
        for n in 2..=8 {
            assert_eq!(
                y.toward(n, Side::Right),
                &(q("1/4") + Rational::ratio(1, 2).pow(n as i32))
            );
        }
        for n in 1..=8 {
            let l = &m.levels[n];
            let prev = &m.levels[n - 1];
            assert!(prev.below <= l.below && l.above <= prev.above);
        }
        assert!(neighbors(&build_radix(2, 2).unwrap(), &q("1"), 2).is_err());
    }

    #[test]
    fn secants_of_takagi() {
        let t = inst(build_radix(2, 20).unwrap(), "const 1");
        let s = secant(&t, &q("0"), &q("1/2"), &q("1/1000")).unwrap();
        assert!(s.contains(&q("1")));
        let s = secant(&t, &q("1/4"), &q("1/2"), &q("1/1000")).unwrap();
        assert!(s.contains(&q("0")));
        let z = inst(build_radix(2, 6).unwrap(), "const 0");
        assert_eq!(
            secant(&z, &q("1/3"), &q("1/5"), &q("1/10")).unwrap(),
            RatInterval::point(q("0"))
        );
        let wide = secant(&t, &q("1/3"), &q("2/5"), &q("1/1000")).unwrap();
        assert!(wide.width() <= q("2/1000") / q("1/15"));
    }

    #[test]
    fn even_radix_deltas_are_partial_sums() {
        for w in [
            "prefix [0] then const 1",
            "prefix [0] then alt 1",
            "prefix [0] then geom 3 -1/2",
        ] {
            let t = inst(build_radix(2, 14).unwrap(), w);
            for side in [Side::Right, Side::Left] {
                let tr = delta_trace(&t, &q("1/2"), side, 14).unwrap();
                for r in &tr.rows {
                    assert_eq!(r.quotient, t.weights().sum(1, r.n - 1), "{w} {side} n={}", r.n);
                    if let Some(dg) = &r.delta_geometric {
                        assert_eq!(dg, &Rational::one());
                    }
                    assert_eq!(r.matches_expected(), Some(true));
                }
            }
        }
    }

    #[test]
    fn deltas_match_secant_oracle() {
        let chain: Vec<BigInt> = [1u64, 2, 6, 12, 24, 48, 144, 288, 576]
            .iter()
            .map(|&v| v.into())
            .collect();
        let cases = vec![
            (build_divisor_chain(&chain, 8).unwrap(), q("1/2")),
            (build_skewed(9).unwrap(), q("7/12")),
            (build_radix(3, 8).unwrap().shifted(0).unwrap(), q("1/3")),
        ];
        for (d, x) in cases {
            let t = inst(d, "prefix [0] then alt 3/2");
            for side in [Side::Right, Side::Left] {
                let tr = delta_trace(&t, &x, side, 20).unwrap();
                for r in &tr.rows {
                    let y = &r.points[0];
                    let oracle = exact_secant(&t, &x, y).unwrap().unwrap();
                    let oriented = if side == Side::Right { oracle } else { -oracle };
                    assert_eq!(r.quotient, oriented);
                    if let Some(g) = &r.gamma {
                        let next = tr.row(r.n + 1).unwrap().points[0].clone();
                        let og = exact_secant(&t, &next, y).unwrap().unwrap();
                        let og = if side == Side::Right { og } else { -og };
                        assert_eq!(g, &og);
                    }
                }
            }
        }
    }

    #[test]
    fn skewed_decomposition_exercises_gamma_expansion() {
        let t = inst(build_skewed(10).unwrap(), "prefix [0] then alt 1");
        let tr = delta_trace(&t, &q("7/12"), Side::Right, 10).unwrap();
        assert!(tr.spacing_hypothesis);
        let applicable: Vec<_> = tr.rows.iter().filter_map(|r| r.gamma_matches()).collect();
        assert!(!applicable.is_empty());
        assert!(applicable.iter().all(|&ok| ok));
        assert!(tr.delta_in_range().iter().all(|&(_, ok)| ok));
        for r in &tr.rows {
            if let (Some(a), Some(b)) = (&r.delta, &r.delta_geometric) {
                assert_eq!(a, b);
            }
        }
        for pair in tr.rows.windows(2) {
            if let Some(eta) = &pair[0].eta {
                assert_eq!(&(&pair[1].quotient - &pair[0].quotient), eta);
            }
        }
    }

    #[test]
    fn delta_trace_preconditions() {
        let t = inst(build_radix(2, 6).unwrap(), "const 1");
        assert!(matches!(
            delta_trace(&t, &q("1/2"), Side::Right, 6),
            Err(SequenceError::NonzeroFirstWeight(_))
        ));
        let t0 = inst(build_radix(2, 6).unwrap(), "prefix [0] then const 1");
        assert!(matches!(
            delta_trace(&t0, &q("1/4"), Side::Right, 6),
            Err(SequenceError::NotInFirstLevel { .. })
        ));
        let z = inst(build_radix(2, 6).unwrap(), "const 0");
        assert!(delta_trace(&z, &q("1/2"), Side::Right, 6)
            .unwrap()
            .rows
            .iter()
            .all(|r| r.quotient.is_zero()));
    }

    #[test]
    fn reduction_slopes_match_finite_differences() {
        let t = inst(build_radix(2, 10).unwrap(), "const 1");
        let x = q("1/4");
        let red = reduce_to_d1(&t, &x).unwrap();
        assert_eq!(red.first_level, 2);
        assert_eq!((red.left_slope.clone(), red.right_slope.clone()), (q("2"), q("0")));
        let h = Rational::ratio(1, 1 << 12);
        let fd = (t.partial_sum(1, &(&x + &h)).unwrap() - t.partial_sum(1, &x).unwrap()) / &h;
        assert_eq!(fd, red.right_slope);
        let fd_left = (t.partial_sum(1, &x).unwrap() - t.partial_sum(1, &(&x - &h)).unwrap()) / &h;
        assert_eq!(fd_left, red.left_slope);
        assert!(red.residual.decomposition().level(1).contains(&x));
        assert!(!red.residual.decomposition().level(0).contains(&x));
        assert!(red.residual.weight(0).is_zero());
        for probe in ["1/3", "3/8", "5/16", "1/7"] {
            let p = q(probe);
            let whole = t.partial_sum(10, &p).unwrap();
            let head = t.partial_sum(1, &p).unwrap();
            let rest = red.residual.partial_sum(9, &p).unwrap();
            assert_eq!(whole, head + rest);
        }
        let z = reduce_to_d1(&t, &q("0")).unwrap();
        assert_eq!((z.first_level, z.left_slope, z.right_slope), (0, q("0"), q("0")));
        assert!(reduce_to_d1(&t, &q("1/3")).is_err());
    }

    #[test]
    fn midpoint_branch_for_odd_radix() {
        let t = inst(build_radix(3, 12).unwrap(), "prefix [0] then const 1");
        let tr = parity_trace(&t, &q("1/2"), 12).unwrap();
        for r in &tr.rows {
            assert_eq!(r.branch, Branch::Midpoint);
            assert_eq!(r.quotient, -Rational::from(r.n as i64));
            assert_eq!(r.ratio_ok(), Some(true));
        }
    }

    #[test]
    fn generic_branch_at_one_third() {
        let t = inst(build_radix(2, 16).unwrap(), "const 1");
        let tr = parity_trace(&t, &q("1/3"), 16).unwrap();
        assert!(!tr.rows.is_empty());
        for r in &tr.rows {
            assert_eq!(r.branch, Branch::Straddle);
            assert_eq!(r.matches_expected(), Some(true));
            // Slopes of g_k at 1/3 alternate +1, -1.
            let expect = if r.n % 2 == 1 { q("1") } else { q("0") };
            assert_eq!(r.quotient, expect);
        }
        assert!(matches!(
            parity_trace(&t, &q("1/4"), 16),
            Err(SequenceError::InD { .. })
        ));
    }

    #[test]
    fn mixed_chain_uses_one_sided_chords() {
        let chain: Vec<BigInt> = [1u64, 3, 6, 18, 36, 108, 216].iter().map(|&v| v.into()).collect();
        let t = inst(build_divisor_chain(&chain, 6).unwrap(), "alt 1");
        for x in ["1/5", "2/7", "5/11", "13/17"] {
            let tr = parity_trace(&t, &q(x), 6).unwrap();
            for r in &tr.rows {
                assert_eq!(r.matches_expected(), Some(true), "x={x} n={}", r.n);
                assert_ne!(r.ratio_ok(), Some(false));
            }
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = inst(build_radix(2, 5).unwrap(), "prefix [0] then const 1");
        let csv = delta_trace(&t, &q("1/2"), Side::Right, 5).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("n,branch,points,Delta_n"));
        assert!(lines[3].starts_with("3,adjacent,5/8,2,"));
    }

    #[test]
    fn straddle_and_chords_are_exact() {
        let t = inst(build_radix(2, 10).unwrap(), "const 1");
        let x = q("1/3");
        let s = straddle_trace(&t, &x, 10).unwrap();
        for r in &s.rows {
            let oracle = exact_secant(&t, &r.points[0], &r.points[1]).unwrap().unwrap();
            assert_eq!(r.quotient, oracle);
        }
        let c = chord_trace(&t, &x, Side::Right, 10).unwrap();
        for r in &c.rows {
            let oracle = exact_secant(&t, &r.points[0], &r.points[1]).unwrap().unwrap();
            assert_eq!(r.quotient, oracle);
        }
    }
}
