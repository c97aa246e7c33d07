//! Synthetic data: clean input processes, sparse corruption and ground-truth outputs.

mod corruption;
mod dataset;
mod generators;
mod polynomial;
pub mod rng;

pub use corruption::{inject_corruption, Corruption, CorruptionSpec, CorruptionTarget};
pub use dataset::Dataset;
pub use generators::{
    gen_alpha_mixing, gen_iid, gen_markov_chain, stationary_distribution, Generator, MarkovChain,
};
pub use polynomial::{add_model_mismatch, evaluate_polynomial, GroundTruthPolynomial, Term};
pub use rng::{child_seed, rng_from_seed, SimRng};
