use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;

use super::{Decomposition, LevelStore};
use crate::numerics::Rational;

/// Exact evidence attached to a failing flag.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A point that should belong to a set but does not.
    Point(Rational),
    /// A gap `(a, b)` between consecutive level points.
    Gap(Rational, Rational),
    /// A component of the complement containing no point of the next level.
    Component(Rational, Rational),
    /// `α_{n+1}` exceeded the stated bound.
    Alpha { next: Rational, bound: Rational },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Point(p) => write!(f, "point {p}"),
            Witness::Gap(a, b) => write!(f, "gap ({a}, {b})"),
            Witness::Component(a, b) => write!(f, "component ({a}, {b})"),
            Witness::Alpha { next, bound } => write!(f, "alpha {next} > {bound}"),
        }
    }
}

/// Tri-state verdict; `Unknown` marks forward-looking flags at the deepest stored level
/// and axiom 4 when no `ρ` is available.
#[derive(Debug, Clone, PartialEq)]
pub enum Flag {
    Holds,
    Fails(Witness),
    Unknown,
}

impl Flag {
    pub fn holds(&self) -> bool {
        matches!(self, Flag::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Flag::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Flag::Unknown)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Flag::Fails(w) => Some(w),
            _ => None,
        }
    }

    fn check(ok: bool, witness: impl FnOnce() -> Witness) -> Flag {
        if ok {
            Flag::Holds
        } else {
            Flag::Fails(witness())
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::Holds => f.write_str("true"),
            Flag::Fails(w) => write!(f, "false ({w})"),
            Flag::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub n: usize,
    pub point_count: BigInt,
    pub alpha: Rational,
    pub min_gap: Rational,
    pub max_gap: Rational,
    pub rho_n: Rational,
    pub axiom3: Flag,
    pub axiom4: Flag,
    /// `D̃_n ⊆ D_{n+1}`.
    pub cond1: Flag,
    /// Every component of level `n` meets `D_{n+1}`.
    pub cond2a: Flag,
    /// `D̃_n ⊆ D̃_{n+1}`.
    pub cond2b: Flag,
    pub alpha_le_rho: Flag,
    pub alpha_le_half_rho: Flag,
    pub alpha_le_rho_over_1mrho: Flag,
}

impl LevelReport {
    /// Condition (1) or condition (2) of the nowhere-differentiability criterion at this level.
    pub fn main_condition(&self) -> Flag {
        if self.cond1.holds() || (self.cond2a.holds() && self.cond2b.holds()) {
            Flag::Holds
        } else if self.cond1.is_unknown() {
            Flag::Unknown
        } else {
            self.cond1.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub levels: Vec<LevelReport>,
    /// `ρ` used for axiom 4 and the α-ratio flags, if any.
    pub rho: Option<Rational>,
    pub rho_inf: Rational,
    pub rho_gt_half: Flag,
}

impl HypothesisReport {
    /// Levels whose forward-looking flags are decided (all but the deepest).
    pub fn decided(&self) -> &[LevelReport] {
        &self.levels[..self.levels.len().saturating_sub(1)]
    }

    /// First decided level at which `pick` does not hold, if any.
    pub fn first_failure(&self, pick: impl Fn(&LevelReport) -> Flag) -> Option<(usize, Flag)> {
        self.decided().iter().map(|l| (l.n, pick(l))).find(|(_, f)| !f.holds())
    }

    /// True when `pick` holds at every decided level.
    pub fn all(&self, pick: impl Fn(&LevelReport) -> Flag) -> bool {
        self.first_failure(pick).is_none()
    }

    pub fn axioms_hold(&self) -> bool {
        self.levels.iter().all(|l| l.axiom3.holds() && !l.axiom4.fails())
    }
}

/// Exact hypothesis flags for the declared `ρ` (or none).
pub fn validate(d: &Decomposition) -> HypothesisReport {
    validate_with_rho(d, d.rho_declared().cloned())
}

/// Hypothesis flags against a candidate `ρ`; `None` leaves axiom 4 and the ratio flags unknown.
pub fn validate_with_rho(d: &Decomposition, rho: Option<Rational>) -> HypothesisReport {
    let depth = d.depth();
    let mut levels = Vec::with_capacity(d.num_levels());
    for n in 0..=depth {
        let stats = d.gap_stats(n);
        let alpha = d.alpha(n);
        let axiom3 = Flag::check(stats.max <= alpha, || {
            Witness::Gap(stats.max_at.0.clone(), stats.max_at.1.clone())
        });
        let axiom4 = match &rho {
            Some(r) => Flag::check(stats.min >= r * &alpha, || {
                Witness::Gap(stats.min_at.0.clone(), stats.min_at.1.clone())
            }),
            None => Flag::Unknown,
        };
        let (cond1, cond2a, cond2b) = if n < depth {
            structural(d, n)
        } else {
            (Flag::Unknown, Flag::Unknown, Flag::Unknown)
        };
        let (le_rho, le_half, le_frac) = match (&rho, n < depth) {
            (Some(r), true) => ratio_flags(&d.alpha(n + 1), &alpha, r),
            _ => (Flag::Unknown, Flag::Unknown, Flag::Unknown),
        };
        levels.push(LevelReport {
            n,
            point_count: d.level(n).len(),
            rho_n: d.rho_at(n),
            alpha,
            min_gap: stats.min.clone(),
            max_gap: stats.max.clone(),
            axiom3,
            axiom4,
            cond1,
            cond2a,
            cond2b,
            alpha_le_rho: le_rho,
            alpha_le_half_rho: le_half,
            alpha_le_rho_over_1mrho: le_frac,
        });
    }
    let rho_gt_half = match &rho {
        Some(r) => {
            let half = Rational::ratio(1, 2);
            Flag::check(r > &half, || Witness::Alpha {
                next: r.clone(),
                bound: half,
            })
        }
        None => Flag::Unknown,
    };
    HypothesisReport {
        levels,
        rho,
        rho_inf: d.rho_inf(),
        rho_gt_half,
    }
}

fn ratio_flags(next: &Rational, alpha: &Rational, rho: &Rational) -> (Flag, Flag, Flag) {
    let bound = rho * alpha;
    let le_rho = Flag::check(next <= &bound, || Witness::Alpha {
        next: next.clone(),
        bound: bound.clone(),
    });
    let half = &bound * &Rational::ratio(1, 2);
    let le_half = Flag::check(next <= &half, || Witness::Alpha {
        next: next.clone(),
        bound: half.clone(),
    });
    // At ρ = 1 the bound ρ/(1-ρ)·α_n is +∞.
    let one_minus = Rational::one() - rho;
    let le_frac = if one_minus.is_zero() {
        Flag::Holds
    } else {
        let frac = &bound / &one_minus;
        Flag::check(next <= &frac, || Witness::Alpha {
            next: next.clone(),
            bound: frac.clone(),
        })
    };
    (le_rho, le_half, le_frac)
}

fn structural(d: &Decomposition, n: usize) -> (Flag, Flag, Flag) {
    match &d.store {
        LevelStore::Grid(dens) => {
            let (den, next) = (&dens[n], &dens[n + 1]);
            let beta = next / den;
            let step = Rational::new(1, den.clone()).expect("positive");
            let first_mid = d.lo() + &(&step * &Rational::ratio(1, 2));
            let first_comp = Witness::Component(d.lo().clone(), d.lo() + &step);
            // Midpoint (2k+1)/(2q) equals (2k+1)β/(2q'): a next-level point iff β is even,
            // a next-level midpoint iff β is odd.
            let cond1 = Flag::check(beta.is_even(), || Witness::Point(first_mid.clone()));
            let cond2a = Flag::check(beta >= BigInt::from(2), || first_comp);
            let cond2b = Flag::check(beta.is_odd(), || Witness::Point(first_mid));
            (cond1, cond2a, cond2b)
        }
        LevelStore::Explicit(levels) => {
            let (cur, next) = (&levels[n], &levels[n + 1]);
            let after = d.level(n + 1);
            let mut cond1 = Flag::Holds;
            let mut cond2a = Flag::Holds;
            let mut cond2b = Flag::Holds;
            for w in cur.windows(2) {
                let m = w[0].midpoint(&w[1]);
                if cond1.holds() && next.binary_search(&m).is_err() {
                    cond1 = Flag::Fails(Witness::Point(m.clone()));
                }
                if cond2a.holds() && after.above(&w[0]).is_none_or(|p| p >= w[1]) {
                    cond2a = Flag::Fails(Witness::Component(w[0].clone(), w[1].clone()));
                }
                if cond2b.holds() && !after.is_midpoint(&m) {
                    cond2b = Flag::Fails(Witness::Point(m));
                }
            }
            (cond1, cond2a, cond2b)
        }
    }
}
