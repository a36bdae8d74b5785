//! Assigning one motion node to every phrase.

mod problem;
mod synthesis;
mod weights;

pub use problem::{PathProblem, BRUTE_FORCE_LIMIT};
pub use synthesis::{
    brute_force_path, candidate_nodes, phrase_cost, recompute_total, synthesize_path, Candidates, PhraseCost,
    SynthesisPath, SynthesisProblem,
};
pub use weights::CostWeights;
