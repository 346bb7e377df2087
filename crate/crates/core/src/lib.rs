//! Exact-arithmetic laboratory for generalized Takagi functions
//! `T_w(x) = Σ w_n dist(x, D_n)` over nested finite point sets `D_n`.
//!
//! Values are rational enclosures with certified tails, difference quotients are exact,
//! and every derivative statement carries the finite horizon it was checked at.
//!
//! ```
//! use takagi_lab::decomposition::build_radix;
//! use takagi_lab::evaluation::GeneralizedTakagi;
//! use takagi_lab::Rational;
//!
//! let t = GeneralizedTakagi::new(build_radix(2, 30).unwrap(), "const 1".parse().unwrap()).unwrap();
//! let e = t.evaluate(&Rational::ratio(1, 3), &Rational::ratio(1, 1_000_000)).unwrap();
//! assert!(e.interval.contains(&Rational::ratio(2, 3)));
//! ```
//!
//! The guide in `book/` walks through each module; its code blocks run as doc-tests.

#![allow(clippy::result_large_err)]

pub mod decomposition;
pub mod derivatives;
pub mod evaluation;
pub mod harness;
pub mod numerics;
pub mod sequences;

pub use evaluation::{GeneralizedTakagi, WeightSequence};
pub use numerics::{RatInterval, Rational};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/decompositions.md")]
    mod decompositions {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/quotients.md")]
    mod quotients {}
    #[doc = include_str!("../../../book/src/derivatives.md")]
    mod derivatives {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
