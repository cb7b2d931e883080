//! Exact homological algebra for finitely presented dg multicategories.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is exact: integers,
//! rationals, prime fields and truncated Novikov rings. Constructions are
//! truncated at explicit bounds (arity, simplicial level, sequence length) and
//! every "for all" axiom is checked exhaustively below those bounds.
//!
//! Module map:
//!
//! * [`coeff`]: coefficient rings and elements.
//! * [`linalg`]: sparse exact matrices, echelon forms, Smith invariants.
//! * [`complex`]: based chain complexes, chain maps, homology.
//! * [`symgrp`]: permutations, group actions, coinvariants, freeness.
//! * [`cubical`]: symmetric cubical sets and their normalized chains.
//! * [`trees`]: pre-stable, weighted and leveled trees.
//! * [`multicat`]: dg multicategories, algebras, the PROP construction.
//! * [`bar`]: bar constructions, Kan extensions and comparison maps.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bar;
pub mod coeff;
pub mod complex;
pub mod cubical;
mod error;
pub mod label;
pub mod linalg;
pub mod multicat;
pub mod symgrp;
pub mod trees;

pub use error::{Error, Result};
