//! Finite-`n` ensembles: exact enumeration for small graphs and Metropolis
//! sampling for larger ones.

mod census;
mod exact;
mod graph;
mod mcmc;

pub use census::{all_graphs, census, count_constrained, Census, COUNT_CAPACITY, WEIGHTED_CAPACITY};
pub use exact::{
    calibrate_theta_exact, calibrate_theta_exact_report, densities_of_counts, hamiltonian, partition_exact,
    relative_entropy_exact, CanonicalMoments, EnsembleSolution, ExactCalibration,
};
pub use graph::{density_from_count, hom_density, subgraph_counts, DenseGraph, Motif, SubgraphCounts};
pub use mcmc::{
    mcmc_calibrate, mcmc_calibrate_with, mcmc_sample, EdgeFlipChain, McmcCalibration, McmcConfig, McmcSummary,
    RobbinsMonro,
};
