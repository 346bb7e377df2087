//! One named check per identity or inequality, and a suite runner over a fixed set of
//! instances.
//!
//! A check passes only after asserting at least one index; with nothing applicable it
//! reports `Inapplicable` and names the failed precondition. A failure carries the first
//! counterexample as exact values.

mod suite;

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use suite::{cycling_chain, run_suite, suite_entries, SuiteConfig, SuiteEntry, SuiteSummary};

use crate::decomposition::{build_cancelling_triples, build_counterexample, build_radix, validate, Origin};
use crate::derivatives::{
    dini, local_min_witness, shifted_sum_test, subdifferential_estimate, takagi_superdiff_formula, BinaryExpansion,
    Verdict,
};
use crate::evaluation::{GeneralizedTakagi, Side, WeightSequence};
use crate::numerics::{RatInterval, Rational};
use crate::sequences::{delta_trace, exact_secant, parity_trace, reduce_to_d1, QuotientTrace, SequenceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inapplicable => "inapplicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub instance: String,
    pub depth: usize,
    pub status: Status,
    /// `name=value` pairs with exact values.
    pub witnesses: Vec<String>,
    /// Counterexample for failures, violated precondition for inapplicable results.
    pub reason: Option<String>,
    pub asserted: usize,
    pub seed: Option<u64>,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub const CSV_HEADER: &'static str = "id,instance,depth,status,asserted,seed,elapsed_ms,reason,witnesses";

    pub fn csv_row(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&self.id),
            csv_field(&self.instance),
            self.depth,
            self.status,
            self.asserted,
            seed,
            self.elapsed.as_millis(),
            csv_field(self.reason.as_deref().unwrap_or("")),
            csv_field(&self.witnesses.join("; "))
        )
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<12} {} [{}] depth {} ({} asserted, {} ms)",
            self.status.to_string().to_uppercase(),
            self.id,
            self.instance,
            self.depth,
            self.asserted,
            self.elapsed.as_millis()
        )?;
        if let Some(r) = &self.reason {
            write!(f, "\n    {r}")?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Collects assertions for one check.
struct Recorder {
    id: String,
    instance: String,
    depth: usize,
    seed: Option<u64>,
    start: Instant,
    asserted: usize,
    failure: Option<String>,
    witnesses: Vec<String>,
}

impl Recorder {
    fn new(id: &str, instance: impl Into<String>, depth: usize) -> Self {
        Recorder {
            id: id.to_string(),
            instance: instance.into(),
            depth,
            seed: None,
            start: Instant::now(),
            asserted: 0,
            failure: None,
            witnesses: Vec::new(),
        }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.asserted += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(witness());
        }
    }

    fn note(&mut self, w: impl Into<String>) {
        self.witnesses.push(w.into());
    }

    fn result(self, status: Status, reason: Option<String>) -> CheckResult {
        CheckResult {
            id: self.id,
            instance: self.instance,
            depth: self.depth,
            status,
            witnesses: self.witnesses,
            reason,
            asserted: self.asserted,
            seed: self.seed,
            elapsed: self.start.elapsed(),
        }
    }

    fn inapplicable(self, why: impl Into<String>) -> CheckResult {
        self.result(Status::Inapplicable, Some(why.into()))
    }

    fn error(self, e: impl fmt::Display) -> CheckResult {
        let msg = format!("error: {e}");
        self.result(Status::Fail, Some(msg))
    }

    fn finish(self) -> CheckResult {
        if let Some(f) = self.failure.clone() {
            self.result(Status::Fail, Some(f))
        } else if self.asserted == 0 {
            self.inapplicable("no applicable index")
        } else {
            self.result(Status::Pass, None)
        }
    }
}

macro_rules! attempt {
    ($rec:ident, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return $rec.error(err),
        }
    };
}

fn origin_label(o: &Origin) -> String {
    match o {
        Origin::Radix { r } => format!("radix {r}"),
        Origin::Chain { r_seq } => {
            let head: Vec<String> = r_seq.iter().take(6).map(|r| r.to_string()).collect();
            format!("chain {}", head.join(" "))
        }
        Origin::Counterexample { with_zero: false } => "counterexample".into(),
        Origin::Counterexample { with_zero: true } => "counterexample with 0".into(),
        Origin::CancellingTriples => "triples".into(),
        Origin::Skewed => "skewed".into(),
        Origin::Explicit => "explicit".into(),
        Origin::Shifted { base, offset } => format!("{} shifted {offset}", origin_label(base)),
    }
}

fn describe(t: &GeneralizedTakagi) -> String {
    format!("{} | w = {}", origin_label(t.decomposition().origin()), t.weights())
}

fn main_condition_gate(t: &GeneralizedTakagi) -> Option<String> {
    let report = validate(t.decomposition());
    report
        .first_failure(|l| l.main_condition())
        .map(|(n, flag)| format!("cond1 and cond2 both fail at level {n}: {flag}"))
}

fn spacing_gate(t: &GeneralizedTakagi) -> Option<String> {
    let report = validate(t.decomposition());
    if report.rho.is_none() {
        return Some("no declared rho; the alpha-ratio flags are unknown".into());
    }
    report
        .first_failure(|l| l.alpha_le_rho_over_1mrho.clone())
        .map(|(n, flag)| format!("alpha_(n+1) <= rho/(1-rho)*alpha_n fails at level {n}: {flag}"))
}

/// Oscillation of the quotients over the second half of the trace against the smallest
/// `|w_k|` feeding them.
fn window_oscillation(trace: &QuotientTrace, w: &WeightSequence) -> Option<(Rational, Rational)> {
    let rows = &trace.rows;
    if rows.len() < 4 {
        return None;
    }
    let tail = &rows[rows.len() / 2..];
    let max = tail.iter().map(|r| &r.quotient).max()?;
    let min = tail.iter().map(|r| &r.quotient).min()?;
    let min_w = tail
        .iter()
        .map(|r| w.weight(r.n.saturating_sub(1).max(1)).abs())
        .min()?;
    Some((max - min, min_w))
}

fn oriented(v: Rational, side: Side) -> Rational {
    if side == Side::Right {
        v
    } else {
        -v
    }
}

/// `Δ_n = Σ_{k=1}^{n-1} w_k` along both adjacent sequences of `x ∈ D_1`.
pub fn check_adjacent_sums(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> CheckResult {
    let mut rec = Recorder::new("adjacent-sums", format!("{} | x = {x}", describe(t)), depth);
    if let Some(why) = main_condition_gate(t) {
        return rec.inapplicable(why);
    }
    let d = t.decomposition();
    if d.depth() < 1 || !d.level(1).contains(x) {
        return rec.inapplicable(format!("{x} is not in D_1"));
    }
    let red = attempt!(rec, reduce_to_d1(t, x));
    let r = &red.residual;
    let rho_one = d.effective_rho() == Rational::one();
    for side in [Side::Right, Side::Left] {
        let trace = attempt!(rec, delta_trace(r, x, side, depth));
        for row in &trace.rows {
            let expected = r.weights().sum(1, row.n.saturating_sub(1));
            rec.check(row.quotient == expected, || {
                format!("{side} n={} Delta_n={} expected {}", row.n, row.quotient, expected)
            });
        }
        if !r.weights().in_c0() && rho_one {
            if let Some((osc, min_w)) = window_oscillation(&trace, r.weights()) {
                rec.check(osc >= min_w, || {
                    format!("{side} oscillation {osc} below min |w| {min_w}")
                });
                rec.note(format!("{side}.oscillation={osc}"));
            }
        }
        if let Some(last) = trace.rows.last() {
            rec.note(format!("{side}.Delta_{}={}", last.n, last.quotient));
        }
    }
    rec.finish()
}

/// `δ_n ∈ [ρ, 1]`, the `Δ_n` and `Γ_n` expansions, and agreement with exact secants.
pub fn check_quotient_bookkeeping(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> CheckResult {
    let mut rec = Recorder::new("bookkeeping", format!("{} | x = {x}", describe(t)), depth);
    if let Some(why) = spacing_gate(t) {
        return rec.inapplicable(why);
    }
    let red = match reduce_to_d1(t, x) {
        Ok(r) => r,
        Err(SequenceError::NotInD { .. }) => return rec.inapplicable(format!("{x} is not in D")),
        Err(e) => return rec.error(e),
    };
    let r = &red.residual;
    let mut gamma_rows = 0;
    for side in [Side::Right, Side::Left] {
        let trace = match delta_trace(r, x, side, depth) {
            Ok(tr) => tr,
            Err(e @ SequenceError::ImpossibleNeighbour { .. }) => {
                rec.check(false, || e.to_string());
                continue;
            }
            Err(e) => return rec.error(e),
        };
        let one = Rational::one();
        for row in &trace.rows {
            let y = &row.points[0];
            if let Some(ok) = row.matches_expected() {
                rec.check(ok, || {
                    format!(
                        "{side} n={} Delta_n={} expansion {:?}",
                        row.n, row.quotient, row.expected
                    )
                });
            }
            if let Some(dg) = &row.delta_geometric {
                rec.check(dg >= &trace.rho && dg <= &one, || {
                    format!("{side} delta_{}={dg} outside [{}, 1]", row.n, trace.rho)
                });
                if let Some(ext) = &row.delta {
                    rec.check(ext == dg, || {
                        format!("{side} delta_{} extracted {ext} vs geometric {dg}", row.n)
                    });
                }
            }
            if let Some(ok) = row.gamma_matches() {
                gamma_rows += 1;
                rec.check(ok, || {
                    format!(
                        "{side} Gamma_{}={:?} expansion {:?}",
                        row.n, row.gamma, row.gamma_expected
                    )
                });
            }
            match exact_secant(r, x, y) {
                Ok(Some(s)) => {
                    let s = oriented(s, side);
                    rec.check(s == row.quotient, || {
                        format!("{side} n={} Delta_n={} secant {s}", row.n, row.quotient)
                    });
                }
                other => rec.check(false, || format!("{side} n={} secant unavailable: {other:?}", row.n)),
            }
            if let (Some(g), Some(next)) = (&row.gamma, trace.row(row.n + 1)) {
                match exact_secant(r, &next.points[0], y) {
                    Ok(Some(s)) => {
                        let s = oriented(s, side);
                        rec.check(&s == g, || format!("{side} n={} Gamma_n={g} secant {s}", row.n));
                    }
                    other => rec.check(false, || format!("{side} n={} secant unavailable: {other:?}", row.n)),
                }
            }
        }
    }
    rec.note(format!("gamma_expansion_rows={gamma_rows}"));
    rec.finish()
}

/// The per-index inequality `|w_n| ≤ …` in whichever case of the proof applies, and
/// non-Cauchy `Δ_n` for weights outside `c_0` at `ρ = 1`.
pub fn check_weight_bounds(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> CheckResult {
    let mut rec = Recorder::new("weight-bounds", format!("{} | x = {x}", describe(t)), depth);
    if let Some(why) = spacing_gate(t) {
        return rec.inapplicable(why);
    }
    let red = match reduce_to_d1(t, x) {
        Ok(r) => r,
        Err(SequenceError::NotInD { .. }) => return rec.inapplicable(format!("{x} is not in D")),
        Err(e) => return rec.error(e),
    };
    let r = &red.residual;
    let one = Rational::one();
    let half = Rational::ratio(1, 2);
    let mut cases = [0usize; 4];
    for side in [Side::Right, Side::Left] {
        let trace = attempt!(rec, delta_trace(r, x, side, depth));
        let rho = trace.rho.clone();
        let inv_rho = rho.recip().expect("rho > 0");
        for row in &trace.rows {
            let n = row.n;
            let (Some(eta), Some(lambda), Some(dn)) = (&row.eta, &row.lambda, &row.delta_geometric) else {
                continue;
            };
            let Some(dprev) = trace.row(n - 1).and_then(|p| p.delta_geometric.clone()) else {
                continue;
            };
            let w_n = r.weight(n).abs();
            let w_prev = r.weight(n - 1).abs();
            let (case, bound) = if dprev == one {
                (0, eta.abs() * &inv_rho)
            } else if dn == &one {
                (1, eta.abs() + (&one - &rho) * &w_prev)
            } else if dprev >= &one - &rho * &half {
                (2, lambda.abs() + &half * &w_prev)
            } else {
                (3, lambda.abs() + (&one - &rho * &half) * &w_prev)
            };
            cases[case] += 1;
            rec.check(w_n <= bound, || {
                format!("{side} n={n} case {case}: |w_n|={w_n} > {bound}")
            });
            if rho > half {
                let alt = eta.abs() * &inv_rho + (&one - &rho) * &inv_rho * &w_prev;
                rec.check(w_n <= alt, || {
                    format!("{side} n={n} rho>1/2 bound: |w_n|={w_n} > {alt}")
                });
            }
        }
        if !r.weights().in_c0() && rho == one {
            if let Some((osc, min_w)) = window_oscillation(&trace, r.weights()) {
                rec.check(osc >= min_w, || {
                    format!("{side} Delta oscillation {osc} below min |w| {min_w}")
                });
            }
        }
    }
    rec.note(format!("cases={cases:?}"));
    rec.finish()
}

/// The level-triple counterexample: cancellation, the rewritten series and the lateral
/// derivative partial values at `x = 1/2`.
pub fn check_c0_counterexample(k_terms: usize, seed: u64) -> CheckResult {
    let depth = 3 * k_terms + 3;
    let mut rec = Recorder::new(
        "c0-counterexample",
        "dyadic triples: denominators 1, 2, 2, 4, 4, 4, 8, ... (den_n = 2^(floor(n/3)+1)) | w = triples",
        depth,
    )
    .seeded(seed);
    let d = attempt!(rec, build_cancelling_triples(depth));
    let t = attempt!(rec, GeneralizedTakagi::new(d, WeightSequence::triple_pattern()));
    let d = t.decomposition();
    let limit = 1 << 15;
    for k in 1..=(depth / 3).min(9) {
        let a = attempt!(rec, d.level(3 * k - 2).enumerate(limit));
        let b = attempt!(rec, d.level(3 * k - 1).enumerate(limit));
        rec.check(a == b, || format!("D_{} != D_{}", 3 * k - 2, 3 * k - 1));
        let mut with_mid = b.clone();
        with_mid.extend(b.windows(2).map(|p| p[0].midpoint(&p[1])));
        with_mid.sort();
        let c = attempt!(rec, d.level(3 * k).enumerate(limit));
        rec.check(c == with_mid, || {
            format!("D_{} is not D_{} plus midpoints", 3 * k, 3 * k - 1)
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<Rational> = attempt!(rec, d.level(12).enumerate(limit));
    for _ in 0..32 {
        let den: i64 = rng.gen_range(2..=3i64.pow(10));
        probes.push(Rational::ratio(rng.gen_range(0..=den), den));
    }
    for z in &probes {
        for k in 1..=depth / 3 {
            let pair = t.weight(3 * k - 2) * d.level(3 * k - 2).distance(z)
                + t.weight(3 * k - 1) * d.level(3 * k - 1).distance(z);
            rec.check(pair.is_zero(), || format!("z={z} k={k}: w g + w g = {pair}"));
        }
    }
    for z in probes.iter().filter(|z| d.level(12).contains(z)) {
        let exact = attempt!(rec, t.exact_value(z)).expect("grid point");
        let mut rewritten = -(d.level(3).distance(z)) * Rational::ratio(1, 2);
        for k in 2..=depth / 3 {
            rewritten += Rational::ratio(1, 2).pow(k as i32) * d.level(3 * k).distance(z);
        }
        rec.check(exact == rewritten, || format!("z={z}: T={exact} rewritten {rewritten}"));
    }
    let x = Rational::ratio(1, 2);
    let closed: Rational = Rational::ratio(-1, 2)
        + (2..=k_terms)
            .map(|k| Rational::ratio(1, 2).pow(k as i32))
            .sum::<Rational>();
    let right = attempt!(rec, t.partial_sum_slope(3 * k_terms, &x, Side::Right));
    let left = attempt!(rec, t.partial_sum_slope(3 * k_terms, &x, Side::Left));
    let tol = Rational::ratio(1, 2).pow(k_terms as i32);
    rec.check(right == closed, || {
        format!("right slope {right} vs -1/2 + sum 2^-k = {closed}")
    });
    rec.check(left == -closed.clone(), || {
        format!("left slope {left} vs {}", -closed.clone())
    });
    rec.check(right.abs() <= tol && left.abs() <= tol, || {
        format!("partial values {right}, {left} exceed 2^-K = {tol}")
    });
    rec.note(format!("right_partial={right}"));
    rec.note(format!("left_partial={left}"));
    // The same function written on radix-2 levels, with the cancelling pairs removed.
    let dyadic = attempt!(rec, build_radix(2, 3 * k_terms + 8));
    let folded = attempt!(
        rec,
        GeneralizedTakagi::new(
            dyadic,
            attempt!(rec, "prefix [0, 0, -1/2] then geom 2 1/2".parse::<WeightSequence>())
        )
    );
    for z in probes.iter().filter(|z| d.level(12).contains(z)) {
        let a = attempt!(rec, t.exact_value(z));
        let b = attempt!(rec, folded.exact_value(z));
        rec.check(a == b, || format!("z={z}: T={a:?} but the radix-2 form gives {b:?}"));
    }
    let est = attempt!(rec, dini(&folded, &x, 3 * k_terms));
    let spreads: Vec<(usize, Rational)> = est
        .scales
        .iter()
        .filter_map(|s| s.spread().map(|sp| (s.n, std::cmp::max(sp.lo().abs(), sp.hi().abs()))))
        .collect();
    match (spreads.get(spreads.len() / 4), spreads.last()) {
        (Some((n0, first)), Some((n1, last))) if n1 > n0 => {
            rec.check(last < first, || {
                format!("dini spread {last} at scale {n1} is not below {first} at scale {n0}")
            });
            rec.note(format!("dini_spread_{n1}={}", last.to_sig_digits(6)));
        }
        _ => rec.check(false, || "dini produced fewer than two two-sided scales".into()),
    }
    let zero = Rational::zero();
    rec.check(
        est.d_plus.distance_to(&zero) <= tol && est.d_minus.distance_to(&zero) <= tol,
        || {
            format!(
                "dini enclosures {} and {} are farther than {tol} from 0",
                est.d_plus, est.d_minus
            )
        },
    );
    rec.finish()
}

/// Exact midpoint and chord identities at a point outside `D`.
pub fn check_parity_chords(t: &GeneralizedTakagi, x: &Rational, depth: usize) -> CheckResult {
    let mut rec = Recorder::new("parity-chords", format!("{} | x = {x}", describe(t)), depth);
    if let Some(why) = main_condition_gate(t) {
        return rec.inapplicable(why);
    }
    let trace = match parity_trace(t, x, depth) {
        Ok(tr) => tr,
        Err(e @ SequenceError::InD { .. }) => return rec.inapplicable(e.to_string()),
        Err(e) => return rec.error(e),
    };
    let mut branches = std::collections::BTreeMap::new();
    for row in &trace.rows {
        *branches.entry(row.branch.label()).or_insert(0usize) += 1;
        if let Some(ok) = row.matches_expected() {
            rec.check(ok, || {
                format!(
                    "n={} {} quotient {} expected {:?}",
                    row.n,
                    row.branch.label(),
                    row.quotient,
                    row.expected
                )
            });
        }
        if let Some(ok) = row.ratio_ok() {
            rec.check(ok, || {
                format!("n={} ratio {:?} exceeds {:?}", row.n, row.ratio, row.ratio_bound)
            });
        }
    }
    rec.note(format!("branches={branches:?}"));
    if let Some(last) = trace.rows.last() {
        rec.note(format!("quotient_{}={}", last.n, last.quotient));
    }
    rec.finish()
}

/// `|T(h) - T(0)| / |h| ≤ 2(2/3)^n` for `2^{-(n+1)} ≤ |h| < 2^{-n}`, from exact pair sums.
pub fn check_counterexample_derivative(depth: usize, with_zero: bool, seed: u64) -> CheckResult {
    let levels = 2 * depth + 3;
    let variant = if with_zero { "with 0 in D_0" } else { "original" };
    let mut rec = Recorder::new(
        "counterexample-derivative",
        format!("counterexample ({variant}) | w = alt 1"),
        depth,
    )
    .seeded(seed);
    let d = attempt!(rec, build_counterexample(levels, with_zero));
    let t = attempt!(
        rec,
        GeneralizedTakagi::new(d, WeightSequence::alternating(Rational::one()))
    );
    let pairs = (levels - 1) / 2 + 1;
    let zero = Rational::zero();
    let h0: Vec<Rational> = attempt!(
        rec,
        (0..pairs)
            .map(|k| t.pair_sum_h(k, &zero))
            .collect::<Result<Vec<_>, _>>()
    );
    let tail = Rational::ratio(1, 3).pow(pairs as i32) * Rational::ratio(1, 2);
    let min_rho = (0..=8).map(|n| t.decomposition().rho_at(n)).min().expect("levels");
    if !with_zero {
        rec.check(min_rho < Rational::ratio(1, 10), || {
            format!("min rho_n over n <= 8 is {min_rho}")
        });
    }
    rec.note(format!("min_rho_upto_8={min_rho}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Rational::zero();
    for n in 1..=depth {
        let lo = Rational::ratio(1, 2).pow(n as i32 + 1);
        let hi = Rational::ratio(1, 2).pow(n as i32);
        let den: i64 = rng.gen_range(2..=3i64.pow(depth.min(12) as u32));
        let random = &lo + &(&lo * &Rational::ratio(rng.gen_range(0..den), den));
        let near_top = &hi - &(&lo * &Rational::ratio(1, 3).pow(n as i32 + 2));
        let mags = [lo.clone(), &lo * &Rational::ratio(3, 2), near_top, random];
        let bound = Rational::from(2) * Rational::ratio(2, 3).pow(n as i32);
        for m in &mags {
            for h in [m.clone(), -m.clone()] {
                let mut diff = Rational::zero();
                for (k, at_zero) in h0.iter().enumerate() {
                    let hk = attempt!(rec, t.pair_sum_h(k, &h));
                    if k < n && !with_zero {
                        rec.check(&hk == at_zero, || {
                            format!("h={h} k={k}: H_k(h)={hk} != H_k(0)={at_zero}")
                        });
                    }
                    diff += hk - at_zero;
                }
                let q = (diff.abs() + &tail) / h.abs();
                let ratio = &q / &bound;
                if ratio > worst {
                    worst = ratio.clone();
                }
                rec.check(q <= bound, || {
                    format!("n={n} h={h}: |quotient| <= {q} exceeds 2(2/3)^n = {bound}")
                });
            }
        }
    }
    rec.note(format!("worst_ratio_to_bound={}", worst.to_sig_digits(6)));
    rec.finish()
}

/// The binary-expansion formula at `11010(10)` and Dini bounds of `-T` at `5/6`.
pub fn check_superdiff_example(horizon: usize) -> CheckResult {
    let mut rec = Recorder::new(
        "superdiff-example",
        "radix 2 | w = const 1 | x = 11010(10) = 5/6",
        horizon,
    );
    let e: BinaryExpansion = attempt!(rec, "11010(10)".parse());
    let formula = attempt!(rec, takagi_superdiff_formula(&e));
    let target = RatInterval::new(Rational::from(-2), Rational::from(-1)).expect("ordered");
    rec.check(formula == target, || format!("formula gives {formula}"));
    let negated = formula.neg();
    rec.check(negated == target.neg(), || format!("negation gives {negated}"));
    let x = e.value();
    rec.check(x == Rational::ratio(5, 6), || format!("expansion value {x}"));
    let t = attempt!(
        rec,
        GeneralizedTakagi::new(
            attempt!(rec, build_radix(2, horizon + 8)),
            WeightSequence::constant(Rational::one())
        )
    );
    let est = attempt!(rec, dini(&t.negated(), &x, horizon));
    let quarter = Rational::ratio(1, 4);
    for (name, enc, v) in [
        ("D_minus", &est.d_minus, negated.lo()),
        ("d_plus", &est.d_plus, negated.hi()),
    ] {
        rec.check(enc.width() <= quarter, || {
            format!("{name} enclosure {enc} wider than 1/4")
        });
        rec.check(enc.distance_to(v) <= enc.width(), || {
            format!("{name} enclosure {enc} misses {v}")
        });
        rec.note(format!("{name}={enc}"));
    }
    rec.finish()
}

/// Local-minimum witnesses for every `ζ` at a point of `D` with nonnegative weights.
pub fn check_local_min(t: &GeneralizedTakagi, x: &Rational, zetas: &[Rational]) -> CheckResult {
    let mut rec = Recorder::new("local-min", format!("{} | x = {x}", describe(t)), t.depth());
    for z in zetas {
        let w = attempt!(rec, local_min_witness(t, x, z));
        rec.check(w.passed, || {
            format!(
                "zeta={z}: min excess {} on the level-{} grid",
                w.min_excess, w.checked_level
            )
        });
        rec.note(format!("zeta={z}:n={}", w.threshold_level));
    }
    rec.finish()
}

/// An empty-subdifferential certificate at `min_depths` or more scales.
pub fn check_empty_subdifferential(
    t: &GeneralizedTakagi,
    x: &Rational,
    horizon: usize,
    min_depths: usize,
) -> CheckResult {
    let mut rec = Recorder::new("empty-subdiff", format!("{} | x = {x}", describe(t)), horizon);
    let est = attempt!(rec, subdifferential_estimate(t, x, horizon));
    match &est.verdict {
        Verdict::EmptyCertified { depths } => {
            rec.check(depths.len() >= min_depths, || {
                format!("certificates at {} scales, wanted {min_depths}", depths.len())
            });
            rec.note(format!("certified_scales={}", depths.len()));
        }
        other => rec.check(false, || format!("verdict {} ({other:?})", other.label())),
    }
    rec.finish()
}

/// Sign of the shifted liminf agrees with the subdifferential verdict.
pub fn check_shifted_sum(t: &GeneralizedTakagi, x: &Rational, horizon: usize) -> CheckResult {
    let mut rec = Recorder::new("shifted-sum", format!("{} | x = {x}", describe(t)), horizon);
    let report = match shifted_sum_test(t, x, horizon) {
        Ok(r) => r,
        Err(e @ crate::derivatives::DerivativeError::Premise(_)) => return rec.inapplicable(e.to_string()),
        Err(e) => return rec.error(e),
    };
    rec.check(report.consistent, || {
        format!(
            "shifted liminf {:?} with verdict {}",
            report.shifted_liminf,
            report.verdict.label()
        )
    });
    rec.note(format!("shifted_liminf={:?}", report.shifted_liminf));
    rec.note(format!("verdict={}", report.verdict.label()));
    rec.finish()
}
