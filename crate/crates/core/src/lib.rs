//! Majorization order on grid densities on `[0, 1]`, monotone convex
//! functionals, and certification of majorization-ordered chains along
//! Fokker-Planck, non-Hermitian quantum and interval-map trajectories.

pub mod chain;
pub mod convex;
pub mod density;
pub mod error;
pub mod fpe;
pub mod io;
pub mod majorization;
pub mod mixing;
pub mod quantum;
pub mod registry;
pub mod trajectory;

pub use chain::{verify_chain, verify_lemma1_equivalence, verify_msl, verify_sandwich, verify_trajectory, ChainOptions, ChainReport};
pub use convex::{lambda, Battery, ConvexFn};
pub use density::{Density, Grid};
pub use error::{Error, Result};
pub use majorization::{compare_continuous, compare_discrete, compare_weak, Relation, Verdict};
pub use trajectory::{Snapshot, Source, Trajectory};
