//! Certified bounds for `Σ_{k>N} |w_k| α_k`.

use super::weights::{Majorant, WeightRule, WeightSequence};
use crate::decomposition::{Decomposition, Origin};
use crate::numerics::Rational;

/// How the tail beyond the stored levels is controlled.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum TailCertificate {
    /// `Σ|w_k|α_k` with a geometric weight majorant and the decomposition's α decay.
    Geometric { majorant: Majorant, blocks: Option<Blocks> },
    /// Counterexample on `[-1, 1]` with `w = alt 1`: pairs `H_k = g_{2k} - g_{2k+1}`
    /// satisfy `0 ≤ H_k ≤ 3^{-(k+1)}`.
    Pairs,
}

/// `α_{D+j} ≤ base·ratio^⌊j/period⌋` beyond the deepest stored level `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub depth: usize,
    pub base: Rational,
    pub ratio: Rational,
    pub period: usize,
}

impl TailCertificate {
    /// Chooses a certificate or explains why none applies.
    pub fn for_instance(d: &Decomposition, w: &WeightSequence) -> Result<Self, String> {
        if matches!(d.origin(), Origin::Counterexample { .. }) && is_unit_alternating(w) {
            return Ok(TailCertificate::Pairs);
        }
        let majorant = w.majorant();
        if majorant.c.is_zero() {
            return Ok(TailCertificate::Geometric { majorant, blocks: None });
        }
        let Some(tail) = d.alpha_tail() else {
            return Err("the decomposition carries no alpha-decay certificate beyond its stored levels".into());
        };
        if tail.ratio > Rational::one() || tail.ratio.is_negative() {
            return Err(format!("alpha decay ratio {} is not in [0, 1]", tail.ratio));
        }
        let rate = &tail.ratio * &majorant.q.pow(tail.period as i32);
        if rate >= Rational::one() {
            return Err(format!(
                "weights grow like {}^k against alpha decay {} per {} levels; no geometric majorant",
                majorant.q, tail.ratio, tail.period
            ));
        }
        Ok(TailCertificate::Geometric {
            majorant,
            blocks: Some(Blocks {
                depth: d.depth(),
                base: tail.base.clone(),
                ratio: tail.ratio.clone(),
                period: tail.period,
            }),
        })
    }

    /// Upper bound for `|T_w(x) - Σ_{k≤N} w_k g_k(x)|` valid for every `x`.
    pub fn bound(&self, d: &Decomposition, w: &WeightSequence, n: usize) -> Rational {
        match self {
            TailCertificate::Pairs => pair_bound(d, n),
            TailCertificate::Geometric { majorant, blocks } => geometric_bound(d, w, majorant, blocks.as_ref(), n),
        }
    }
}

fn is_unit_alternating(w: &WeightSequence) -> bool {
    matches!(w.rule(), WeightRule::Alternating(a) if a == &Rational::one())
}

fn alpha_bound(d: &Decomposition, blocks: Option<&Blocks>, k: usize) -> Rational {
    if k <= d.depth() {
        return d.alpha(k);
    }
    let b = blocks.expect("levels beyond the stored depth need an alpha certificate");
    &b.base * &b.ratio.pow(((k - b.depth) / b.period) as i32)
}

fn geometric_bound(d: &Decomposition, w: &WeightSequence, m: &Majorant, blocks: Option<&Blocks>, n: usize) -> Rational {
    if m.c.is_zero() {
        // w_k = 0 for k ≥ from; the remaining terms are finite.
        let end = m.from.saturating_sub(1);
        return (n + 1..=end)
            .map(|k| w.weight(k).abs() * alpha_bound(d, blocks, k))
            .sum();
    }
    let b = blocks.expect("certified at construction");
    let end = n.max(b.depth).max(m.from.saturating_sub(1));
    let exact: Rational = (n + 1..=end)
        .map(|k| w.weight(k).abs() * alpha_bound(d, blocks, k))
        .sum();
    // Remainder Σ_{k>end} c q^{k-from} base ratio^⌊(k-D)/p⌋ with ⌊(j0+i)/p⌋ ≥ ⌊j0/p⌋ + ⌊i/p⌋.
    let j0 = end + 1 - b.depth;
    let lead = &m.c * &m.q.pow((end + 1 - m.from) as i32) * &b.base * b.ratio.pow((j0 / b.period) as i32);
    let block_sum: Rational = (0..b.period).map(|r| m.q.pow(r as i32)).sum();
    let denom = Rational::one() - &b.ratio * &m.q.pow(b.period as i32);
    exact + lead * block_sum / denom
}

fn pair_bound(d: &Decomposition, n: usize) -> Rational {
    let third = Rational::ratio(1, 3);
    let half = Rational::ratio(1, 2);
    // Σ_{k≥j} 3^{-(k+1)} = 3^{-j}/2.
    let pairs_from = |j: usize| &third.pow(j as i32) * &half;
    if n % 2 == 1 {
        pairs_from(n.div_ceil(2))
    } else {
        // One unpaired term -g_{n+1} ∈ [-α_{n+1}/2, 0] remains before the pairs.
        let alpha = if n < d.depth() {
            d.alpha(n + 1)
        } else {
            let m = n.div_ceil(2);
            Rational::from(2) * Rational::ratio(1, 2).pow(m as i32)
        };
        std::cmp::max(&alpha * &half, pairs_from(n / 2 + 1))
    }
}
