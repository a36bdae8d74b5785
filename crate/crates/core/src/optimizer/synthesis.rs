use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MotionGraph;
use crate::optimizer::{CostWeights, PathProblem};
use crate::segmentation::MotionSegment;
use crate::speech::{rhythm_cost, Phrase, RhythmCurve};

/// Candidate node positions for one phrase, and whether the semantic
/// fallback fired.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub positions: Vec<usize>,
    pub fallback: bool,
}

fn candidates(graph: &MotionGraph, phrase: &Phrase) -> Result<Candidates> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let non_semantic = || -> Vec<usize> {
        graph
            .nodes()
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.is_semantic())
            .map(|(i, _)| i)
            .collect()
    };
    Ok(match &phrase.semantic_tag {
        Some(tag) => {
            let matching: Vec<usize> = graph
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.semantic_tag.as_deref() == Some(tag.as_str()))
                .map(|(i, _)| i)
                .collect();
            if matching.is_empty() {
                Candidates {
                    positions: non_semantic(),
                    fallback: true,
                }
            } else {
                Candidates {
                    positions: matching,
                    fallback: false,
                }
            }
        }
        None => Candidates {
            positions: non_semantic(),
            fallback: false,
        },
    })
}

/// Segment ids a phrase may be assigned, in id order.
pub fn candidate_nodes(graph: &MotionGraph, phrase: &Phrase) -> Result<Vec<String>> {
    Ok(candidates(graph, phrase)?
        .positions
        .into_iter()
        .map(|i| graph.nodes()[i].segment_id.clone())
        .collect())
}

/// `C_p`: semantic phrases cost `lambda_s * M` on a tag mismatch and 0 on a
/// match; other phrases cost `lambda_r` times the rhythm cost.
pub fn phrase_cost(node: &MotionSegment, phrase: &Phrase, phrase_rhythm: &RhythmCurve, weights: &CostWeights) -> f64 {
    match &phrase.semantic_tag {
        Some(tag) if node.semantic_tag.as_deref() == Some(tag.as_str()) => 0.0,
        Some(_) => weights.lambda_s * weights.semantic_mismatch_penalty,
        None => weights.lambda_r * rhythm_cost(&node.strength, phrase_rhythm),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseCost {
    /// Transition cost from the previous phrase's node (0 for the first).
    pub transition: f64,
    /// Weighted `C_p`.
    pub semantic_or_rhythm: f64,
    /// The transition had no graph edge and was recomputed with the penalty.
    #[serde(default)]
    pub missing_edge: bool,
    /// The phrase's tag had no matching node.
    #[serde(default)]
    pub semantic_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPath {
    pub assignments: Vec<String>,
    pub total_cost: f64,
    pub per_phrase_costs: Vec<PhraseCost>,
}

impl SynthesisPath {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }
}

/// Cost tables of one synthesis problem over a graph.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    pub problem: PathProblem,
    candidates: Vec<Candidates>,
    missing: Vec<Vec<Vec<bool>>>,
}

impl SynthesisProblem {
    pub fn new(
        graph: &MotionGraph,
        phrases: &[Phrase],
        rhythms: &[RhythmCurve],
        weights: &CostWeights,
    ) -> Result<Self> {
        if phrases.is_empty() {
            return Err(Error::Value("no phrases to synthesize".into()));
        }
        if rhythms.len() != phrases.len() {
            return Err(Error::LengthMismatch(format!(
                "{} rhythm curves for {} phrases",
                rhythms.len(),
                phrases.len()
            )));
        }
        weights.validate(phrases.len(), graph.sigma())?;
        let cands = phrases
            .iter()
            .map(|p| candidates(graph, p))
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = cands.iter().position(|c| c.positions.is_empty()) {
            return Err(Error::EmptyCandidate(i));
        }

        let nodes = graph.nodes();
        let phrase_costs = cands
            .iter()
            .zip(phrases.iter().zip(rhythms))
            .map(|(c, (p, r))| {
                c.positions
                    .iter()
                    .map(|&n| phrase_cost(&nodes[n], p, r, weights))
                    .collect()
            })
            .collect();

        let penalty = weights.missing_edge_penalty(graph.sigma());
        let states = graph.transition_states();
        let mut transition_costs = Vec::with_capacity(cands.len().saturating_sub(1));
        let mut missing = Vec::with_capacity(cands.len().saturating_sub(1));
        for w in cands.windows(2) {
            let mut table = Vec::with_capacity(w[0].positions.len());
            let mut flags = Vec::with_capacity(w[0].positions.len());
            for &a in &w[0].positions {
                let mut row = Vec::with_capacity(w[1].positions.len());
                let mut frow = Vec::with_capacity(w[1].positions.len());
                for &b in &w[1].positions {
                    match graph.edge_cost_at(a, b) {
                        Some(c) => {
                            row.push(c);
                            frow.push(false);
                        }
                        None => {
                            row.push(states.cost(a, b) + penalty);
                            frow.push(true);
                        }
                    }
                }
                table.push(row);
                flags.push(frow);
            }
            transition_costs.push(table);
            missing.push(flags);
        }

        Ok(SynthesisProblem {
            problem: PathProblem {
                phrase_costs,
                transition_costs,
                lambda_t: weights.lambda_t,
            },
            candidates: cands,
            missing,
        })
    }

    /// Turns candidate indices into a path with its cost breakdown.
    pub fn path(&self, graph: &MotionGraph, choice: &[usize]) -> SynthesisPath {
        let p = &self.problem;
        let per_phrase_costs = choice
            .iter()
            .enumerate()
            .map(|(i, &a)| PhraseCost {
                transition: if i == 0 {
                    0.0
                } else {
                    p.transition_costs[i - 1][choice[i - 1]][a]
                },
                semantic_or_rhythm: p.phrase_costs[i][a],
                missing_edge: i > 0 && self.missing[i - 1][choice[i - 1]][a],
                semantic_fallback: self.candidates[i].fallback,
            })
            .collect();
        SynthesisPath {
            assignments: choice
                .iter()
                .enumerate()
                .map(|(i, &a)| graph.nodes()[self.candidates[i].positions[a]].segment_id.clone())
                .collect(),
            total_cost: p.total(choice),
            per_phrase_costs,
        }
    }
}

/// Exact minimizer of the path cost by dynamic programming.
pub fn synthesize_path(
    graph: &MotionGraph,
    phrases: &[Phrase],
    rhythms: &[RhythmCurve],
    weights: &CostWeights,
) -> Result<SynthesisPath> {
    let sp = SynthesisProblem::new(graph, phrases, rhythms, weights)?;
    let choice = sp.problem.solve()?;
    Ok(sp.path(graph, &choice))
}

/// Exhaustive search over all assignments; the reference for
/// [`synthesize_path`].
pub fn brute_force_path(
    graph: &MotionGraph,
    phrases: &[Phrase],
    rhythms: &[RhythmCurve],
    weights: &CostWeights,
) -> Result<SynthesisPath> {
    let sp = SynthesisProblem::new(graph, phrases, rhythms, weights)?;
    let choice = sp.problem.solve_brute_force()?;
    Ok(sp.path(graph, &choice))
}

/// Recomputes the path cost from its breakdown: `lambda_t` times the
/// transition sum plus the phrase-cost sum.
pub fn recompute_total(path: &SynthesisPath, lambda_t: f64) -> f64 {
    let t: f64 = path.per_phrase_costs.iter().skip(1).map(|c| c.transition).sum();
    let p: f64 = path.per_phrase_costs.iter().map(|c| c.semantic_or_rhythm).sum();
    lambda_t * t + p
}
