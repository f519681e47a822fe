//! Numerical tools for edge-triangle constrained random graphs near the
//! Erdős–Rényi line `t2 = t1³`.
//!
//! * [`entropy`]: the Bernoulli entropy `I`, its derivatives and the
//!   quotient functions whose minima set the scaling constants.
//! * [`graphon`]: step graphons, their densities and entropy, and the
//!   explicit optimisers.
//! * [`perturb`]: the two-step variational problem and its solver.
//! * [`scaling`]: scaling laws, the equivalence classifier and curves.
//! * [`ensembles`]: exact small-`n` ensembles and the Metropolis sampler.

pub mod ensembles;
pub mod entropy;
pub mod error;
pub mod graphon;
mod optim;
pub mod perturb;
pub mod scaling;

pub use error::{Error, Result};
pub use graphon::{DensityPair, StepGraphon};
pub use perturb::{PerturbationAnsatz, SolveMode, SolveReport};
pub use scaling::{ConstraintPair, MultiplierPair, Side, Verdict};
