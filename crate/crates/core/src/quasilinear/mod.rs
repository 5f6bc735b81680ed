//! Closed-loop 2×2 diagonal quasilinear systems.
//!
//! `u` travels right with speed `λ(u,v) > 0` and `v` left with `μ(u,v) < 0`.
//! The right end of `v` always carries the signed-power feedback; the left
//! end of `u` carries either the same feedback or a boundary map `h`.
//! Solutions are obtained by Picard iteration: freeze the speeds at the
//! previous iterate, solve two linear transport problems, repeat.

mod boundary;
mod extinction;
mod ledger;
mod picard;
mod system;

pub use boundary::BoundaryMap;
pub use extinction::{fields_extinction, permanent_entry, verify_extinction, ExtinctionReport};
pub use ledger::{
    box_extrema, build_ledger, check_one_control, check_two_control, ConditionCheck, ConstantsLedger, LedgerMode,
};
pub use picard::{
    picard_one_control, picard_two_control, ClosedLoopProblem, ClosedLoopSolution, InitialGuess, IterateStats,
    LeftClosure, PicardOptions,
};
pub use system::{DiagonalSystem, Speed2};

pub(crate) use boundary::measure_partials;
