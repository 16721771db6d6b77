//! Operation-based source-level energy modeling for the MJ mini-language.
//!
//! The pipeline, end to end:
//!
//! 1. [`minilang`] parses and type-checks MJ source and can format it back out.
//! 2. [`ops`] maps typed constructs to energy operations and library-function
//!    ids, and classifies them into the eight reporting classes.
//! 3. [`cfg`] builds per-method basic blocks with hierarchical names
//!    (`Class.method().if_4.for_1`) and their static per-execution counts.
//! 4. [`profiler`] executes programs under execution cases (input sequence +
//!    ablated block set), producing per-block and aggregate operation counts.
//! 5. [`powersim`] synthesizes or ingests 30 Hz power traces and integrates
//!    them to energy.
//! 6. [`fitter`] recovers per-operation costs from counts and energies by
//!    least squares, with collinearity diagnostics and nonnegativity.
//! 7. [`accounting`] renders operation rankings, block totals, normalized
//!    costs and per-class shares.
//! 8. [`advisor`] detects energy refactorings, applies them as
//!    source-to-source transforms, predicts deltas and verifies equivalence.

pub mod accounting;
pub mod advisor;
pub mod cfg;
pub mod config;
pub mod demo;
pub mod fitter;
pub mod linalg;
pub mod minilang;
pub mod ops;
pub mod powersim;
pub mod profiler;

/// Scalar type used by the numeric pipeline. The linear-algebra kernel in
/// [`linalg`] is generic over `num_traits::Float`; everything downstream
/// instantiates it with this alias.
pub type Scalar = f64;

/// Microjoules per joule; cost vectors are stored in µJ, case energies in J.
pub const UJ_PER_J: Scalar = 1.0e6;

/// Convert a cost in microjoules to joules.
pub fn uj_to_j(uj: Scalar) -> Scalar {
    uj / UJ_PER_J
}

/// Convert an energy in joules to microjoules.
pub fn j_to_uj(j: Scalar) -> Scalar {
    j * UJ_PER_J
}
