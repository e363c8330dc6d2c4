//! Exact algebra for lattice Boltzmann schemes viewed as matrices over the
//! ring of finite difference (shift) operators, together with the
//! multi-step finite difference schemes they induce on conserved moments.

pub mod derive;
pub mod equiv;
pub mod error;
pub mod lattice;
pub mod opmatrix;
pub mod rational;
pub mod scheme;
pub mod shiftring;
pub mod wire;

pub use derive::{
    fds_apply, fds_close, fds_equal, fds_from_lbs, fds_from_matrices, ClosedFds, Fds, FdsComparison, FdsComponent,
    Splitting,
};
pub use equiv::{
    check_closed, check_direct, check_nontrivial, check_trivial, d1q2_family, similarity_witness, symbol_cross_check,
    EquivReport, FamilyParams,
};
pub use error::{Error, Result};
pub use lattice::{check_recurrence, compare_conserved, run_from_state, run_lbs, run_operators, Trajectory};
pub use opmatrix::{CharPoly, OpMatrix};
pub use rational::{QMatrix, Rational};
pub use scheme::{LbsOperators, LbsSpec, MomentState};
pub use shiftring::{PeriodicGrid, ShiftPoly};
pub use wire::{FdsDocument, SchemeFile};
