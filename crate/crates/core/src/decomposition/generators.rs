use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow};

use super::{AlphaTail, Decomposition, DecompositionError, LevelStore, Origin};
use crate::numerics::Rational;

/// The `r`-adic grids `{k / r^n} ∩ [0, 1]` with `α_n = r^{-n}` and `ρ = 1`.
///
/// ```
/// use takagi_lab::decomposition::build_radix;
/// use takagi_lab::Rational;
///
/// let d = build_radix(3, 2).unwrap();
/// assert_eq!(d.alphas(), vec![Rational::one(), Rational::ratio(1, 3), Rational::ratio(1, 9)]);
/// assert_eq!(d.level(1).len(), 4.into());
/// ```
pub fn build_radix(r: u64, depth: usize) -> Result<Decomposition, DecompositionError> {
    if r < 2 {
        return Err(DecompositionError::BadRadix(r));
    }
    let r_big = BigInt::from(r);
    let dens: Vec<BigInt> = (0..=depth).map(|n| Pow::pow(&r_big, n as u32)).collect();
    let tail = AlphaTail {
        base: Rational::new(1, dens[depth].clone()).expect("positive"),
        ratio: Rational::new(1, r_big).expect("positive"),
        period: 1,
    };
    grid(dens, Origin::Radix { r }, tail)
}

/// Levels `{k / r_n} ∩ [0, 1]` for a divisor chain `1 = r_0 | r_1 | r_2 | …`.
///
/// Level `n` uses `r_seq[n]`, so `depth` must be smaller than `r_seq.len()`.
pub fn build_divisor_chain(r_seq: &[BigInt], depth: usize) -> Result<Decomposition, DecompositionError> {
    if depth >= r_seq.len() {
        return Err(DecompositionError::ChainTooShort {
            depth,
            available: r_seq.len(),
        });
    }
    if !r_seq[0].is_one() {
        return Err(DecompositionError::ChainStart(r_seq[0].clone()));
    }
    for (i, w) in r_seq.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(DecompositionError::ChainNotIncreasing {
                index: i + 1,
                prev: w[0].clone(),
                next: w[1].clone(),
            });
        }
        if !w[1].is_multiple_of(&w[0]) {
            return Err(DecompositionError::ChainDivisibility {
                index: i + 1,
                prev: w[0].clone(),
                next: w[1].clone(),
            });
        }
    }
    let dens = r_seq[..=depth].to_vec();
    // Each step at least doubles the denominator.
    let tail = AlphaTail {
        base: Rational::new(1, dens[depth].clone()).expect("positive"),
        ratio: Rational::ratio(1, 2),
        period: 1,
    };
    grid(dens, Origin::Chain { r_seq: r_seq.to_vec() }, tail)
}

/// Dyadic grids with level pairs `D_{3k-2} = D_{3k-1}` and `D_{3k}` adding the
/// midpoints of `D_{3k-1}`: denominators `1, 2, 2, 4, 4, 4, 8, 8, 8, …`.
pub fn build_cancelling_triples(depth: usize) -> Result<Decomposition, DecompositionError> {
    let dens: Vec<BigInt> = (0..=depth)
        .map(|n| {
            if n == 0 {
                BigInt::one()
            } else {
                BigInt::one() << (n / 3 + 1)
            }
        })
        .collect();
    let tail = AlphaTail {
        base: Rational::new(1, dens[depth].clone()).expect("positive"),
        ratio: Rational::ratio(1, 2),
        period: 3,
    };
    grid(dens, Origin::CancellingTriples, tail)
}

fn grid(dens: Vec<BigInt>, origin: Origin, tail: AlphaTail) -> Result<Decomposition, DecompositionError> {
    let alpha = dens
        .iter()
        .map(|d| Some(Rational::new(1, d.clone()).expect("positive")))
        .collect();
    Decomposition::from_parts(
        Rational::zero(),
        Rational::one(),
        LevelStore::Grid(dens),
        alpha,
        Some(Rational::one()),
        origin,
        Some(tail),
    )
}

/// Positive half of the counterexample levels on `[-1, 1]`:
/// `D⁺_{2n} = {k/2ⁿ} ∩ (0,1] ∪ D⁺_{2n-1}` and `D⁺_{2n+1} = {k/2ⁿ - 3^{-(n+1)}} ∩ (0,1] ∪ D⁺_{2n}`.
fn counterexample_positive(depth: usize, with_zero: bool) -> Vec<Vec<Rational>> {
    let mut levels: Vec<Vec<Rational>> = Vec::with_capacity(depth + 1);
    let mut current: Vec<Rational> = if with_zero { vec![Rational::zero()] } else { Vec::new() };
    for level in 0..=depth {
        let n = (level / 2) as u32;
        let scale = BigInt::one() << n;
        let shift = if level % 2 == 0 {
            Rational::zero()
        } else {
            Rational::new(1, Pow::pow(&BigInt::from(3), n + 1)).expect("positive")
        };
        let count: u64 = 1 << n;
        let mut fresh = Vec::new();
        for k in 0..=count {
            let p = Rational::new(BigInt::from(k), scale.clone()).expect("positive") - &shift;
            if p.is_positive() && p <= Rational::one() {
                fresh.push(p);
            }
        }
        current.extend(fresh);
        current.sort();
        current.dedup();
        levels.push(current.clone());
    }
    levels
}

/// The two-sided decomposition on `[-1, 1]` that admits no uniform `ρ`; `with_zero`
/// adds `0` to every level.
///
/// ```
/// use takagi_lab::decomposition::build_counterexample;
/// use takagi_lab::Rational;
///
/// let d = build_counterexample(3, false).unwrap();
/// assert!(d.level(1).contains(&Rational::ratio(2, 3)));
/// assert!(d.level(3).contains(&Rational::ratio(7, 18)));
/// assert!(!d.level(3).contains(&Rational::zero()));
/// ```
pub fn build_counterexample(depth: usize, with_zero: bool) -> Result<Decomposition, DecompositionError> {
    let positive = counterexample_positive(depth, with_zero);
    let levels: Vec<Vec<Rational>> = positive
        .into_iter()
        .map(|pos| {
            let mut all: Vec<Rational> = pos.iter().filter(|p| p.is_positive()).map(|p| -p).collect();
            all.extend(pos);
            all.sort();
            all
        })
        .collect();
    let tail = AlphaTail {
        base: Rational::from(2) * Rational::ratio(1, 2).pow((depth / 2) as i32),
        ratio: Rational::ratio(1, 2),
        period: 2,
    };
    Decomposition::from_parts(
        Rational::from(-1),
        Rational::one(),
        LevelStore::Explicit(levels),
        Vec::new(),
        None,
        Origin::Counterexample { with_zero },
        Some(tail),
    )
}

/// A non-uniform dyadic-rate decomposition of `[0, 1]` with `α_n = (4/3)·2^{-n}` and
/// `ρ = 1/2`. Each gap of relative length `u` splits into a left piece of relative
/// length `min((1+u)/2, 2u - 1/2)` and the remainder, so gap ratios stay in `[1/2, 1]`
/// while neighbouring gaps keep different lengths.
pub fn build_skewed(depth: usize) -> Result<Decomposition, DecompositionError> {
    let half = Rational::ratio(1, 2);
    let mut alpha = Rational::ratio(4, 3);
    let mut points = vec![Rational::zero(), Rational::one()];
    let mut levels = vec![points.clone()];
    let mut alphas = vec![Some(alpha.clone())];
    for _ in 0..depth {
        let next_alpha = &alpha * &half;
        let mut next = Vec::with_capacity(points.len() * 2);
        for w in points.windows(2) {
            let u = (&w[1] - &w[0]) / &alpha;
            let v1 = std::cmp::min((Rational::one() + &u) * &half, Rational::from(2) * &u - &half);
            next.push(w[0].clone());
            next.push(&w[0] + &(v1 * &next_alpha));
        }
        next.push(points.last().expect("non-empty").clone());
        points = next;
        alpha = next_alpha;
        levels.push(points.clone());
        alphas.push(Some(alpha.clone()));
    }
    let tail = AlphaTail {
        base: alpha,
        ratio: half.clone(),
        period: 1,
    };
    Decomposition::from_parts(
        Rational::zero(),
        Rational::one(),
        LevelStore::Explicit(levels),
        alphas,
        Some(half),
        Origin::Skewed,
        Some(tail),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn radix_levels() {
        let d = build_radix(2, 1).unwrap();
        assert_eq!(d.level(1).enumerate(10).unwrap(), vec![q("0"), q("1/2"), q("1")]);
        assert_eq!(build_radix(10, 1).unwrap().level(1).len(), BigInt::from(11));
        assert!(build_radix(1, 3).is_err());
        let deep = build_radix(10, 20).unwrap();
        assert_eq!(
            deep.alpha(20),
            Rational::new(1, Pow::pow(&BigInt::from(10), 20u32)).unwrap()
        );
    }

    #[test]
    fn chain_equals_radix() {
        let c = build_divisor_chain(&big(&[1, 2, 4, 8]), 3).unwrap();
        let r = build_radix(2, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(c.level(n).enumerate(100).unwrap(), r.level(n).enumerate(100).unwrap());
            assert_eq!(c.alpha(n), r.alpha(n));
        }
    }

    #[test]
    fn chain_rejections() {
        let err = build_divisor_chain(&big(&[1, 3, 5, 15]), 3).unwrap_err();
        assert_eq!(
            err,
            DecompositionError::ChainDivisibility {
                index: 2,
                prev: BigInt::from(3),
                next: BigInt::from(5)
            }
        );
        assert!(matches!(
            build_divisor_chain(&big(&[2, 4]), 1),
            Err(DecompositionError::ChainStart(_))
        ));
        assert!(matches!(
            build_divisor_chain(&big(&[1, 2, 2]), 2),
            Err(DecompositionError::ChainNotIncreasing { .. })
        ));
        assert!(matches!(
            build_divisor_chain(&big(&[1, 2]), 4),
            Err(DecompositionError::ChainTooShort { .. })
        ));
    }

    #[test]
    fn counterexample_levels() {
        let d = build_counterexample(4, false).unwrap();
        let pos = |n: usize| -> Vec<Rational> {
            d.level(n)
                .enumerate(1000)
                .unwrap()
                .into_iter()
                .filter(|p| p.is_positive())
                .collect()
        };
        assert_eq!(pos(0), vec![q("1")]);
        assert_eq!(pos(1), vec![q("2/3"), q("1")]);
        assert_eq!(pos(2), vec![q("1/2"), q("2/3"), q("1")]);
        assert_eq!(pos(3), vec![q("7/18"), q("1/2"), q("2/3"), q("8/9"), q("1")]);
        for n in 0..=4 {
            let all = d.level(n).enumerate(1000).unwrap();
            let neg: Vec<_> = all.iter().filter(|p| p.is_negative()).map(|p| -p).rev().collect();
            assert_eq!(neg, pos(n));
        }
        let g = d.geometry(1).unwrap();
        assert!(g.components.contains(&(q("2/3"), q("1"))));
        let z = build_counterexample(2, true).unwrap();
        assert!(z.level(0).contains(&q("0")));
        assert_eq!(z.alpha(0), q("1"));
        assert_eq!(d.alpha(0), q("2"));
    }

    #[test]
    fn counterexample_alpha_majorant() {
        let d = build_counterexample(12, false).unwrap();
        for k in 0..=12 {
            let bound = Rational::from(2) * Rational::ratio(1, 2).pow((k / 2) as i32);
            assert!(d.alpha(k) <= bound, "level {k}");
        }
        let tail = d.alpha_tail().unwrap();
        assert_eq!(tail.base, Rational::from(2) * Rational::ratio(1, 2).pow(6));
    }

    #[test]
    fn skewed_is_valid_with_half_rho() {
        let d = build_skewed(8).unwrap();
        assert_eq!(d.level(1).enumerate(10).unwrap(), vec![q("0"), q("7/12"), q("1")]);
        for n in 0..=8 {
            assert!(d.rho_at(n) >= q("1/2"));
            assert_eq!(d.level(n).len(), BigInt::from((1u64 << n) + 1));
        }
    }

    #[test]
    fn triples_levels() {
        let d = build_cancelling_triples(7).unwrap();
        let lens: Vec<_> = (0..=7).map(|n| d.level(n).len()).collect();
        assert_eq!(lens, big(&[2, 3, 3, 5, 5, 5, 9, 9]));
    }
}
