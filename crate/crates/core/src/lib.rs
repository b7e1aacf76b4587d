//! Numerical laboratory for identification over classical-quantum channels.
//!
//! A cq-channel maps classical input letters to quantum output states.
//! This crate constructs and exactly evaluates identification codes over
//! such channels (plain, compound, wiretap, arbitrarily varying), computes
//! the capacity quantities they are governed by (Holevo capacity, compound
//! max-min capacity, AVC random-coding capacity, single-letter secrecy
//! lower bounds), and probes the dichotomy / symmetrizability /
//! super-activation conditions on concrete desk-scale instances.
//!
//! Modules:
//! - [`linalg`]: tolerance-aware complex linear algebra for states, POVMs
//!   and the entropy functionals everything else consumes.
//! - [`channel`]: channel data structures, memoryless extensions and
//!   channel distance metrics.
//! - [`document`]: the JSON interchange format for channels and code
//!   bundles.
//! - [`info`]: Holevo information and all capacity solvers.
//! - [`id`]: identification-code construction and exact error evaluation.
//! - [`secrecy`]: wiretap-side analysis, dichotomy evaluators, the
//!   concatenated wiretap ID construction, continuity and
//!   super-activation probes.
//! - [`sampling`]: seeded random states, channels and distributions used
//!   by constructors and tests.

// Dense tableau and matrix kernels index several parallel arrays at once;
// explicit index loops read better there than zipped iterators.
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod document;
pub mod id;
pub mod info;
pub mod linalg;
pub mod sampling;
pub mod secrecy;

mod opt;

pub use linalg::{Complex64, Tolerances};

/// Resource guards shared by block-length dependent operations.
///
/// Exact evaluation is the point of this crate, so operations refuse
/// silently infeasible instances instead of approximating them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// Maximum total output dimension d^n an operation may materialize.
    pub dim_guard: usize,
    /// Maximum number of adversarial state sequences |Theta|^n that the
    /// exact AVC evaluation path may enumerate.
    pub enumeration_guard: u64,
    /// Worker threads for the embarrassingly parallel evaluation loops.
    /// Results are merged in a fixed order, so the value does not affect
    /// any output.
    pub threads: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            dim_guard: 4096,
            enumeration_guard: 1_000_000,
            threads: 1,
        }
    }
}
