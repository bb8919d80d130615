//! The chapters of the guide in `book/`, compiled so their examples run as
//! doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grid.md")]
pub mod chapter1 {}

#[doc = include_str!("../../../book/src/symbols.md")]
pub mod chapter2 {}

#[doc = include_str!("../../../book/src/littlewood_paley.md")]
pub mod chapter3 {}

#[doc = include_str!("../../../book/src/resonance.md")]
pub mod chapter4 {}

#[doc = include_str!("../../../book/src/multipliers.md")]
pub mod chapter5 {}

#[doc = include_str!("../../../book/src/energies.md")]
pub mod chapter6 {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod chapter7 {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod chapter8 {}
