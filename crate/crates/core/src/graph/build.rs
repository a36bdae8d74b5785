use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::transition::{check_same_skeleton, TransitionStates};
use crate::graph::TransitionParams;
use crate::segmentation::MotionSegment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub cost: f64,
    /// Zero-cost edge between temporally consecutive segments of one clip.
    #[serde(default)]
    pub natural: bool,
}

/// How the edge threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    Fixed(f64),
    /// A percentile (0–100) of all candidate pairwise costs.
    Percentile(f64),
}

impl SigmaPolicy {
    pub const AUTO: SigmaPolicy = SigmaPolicy::Percentile(20.0);

    /// Parses `"auto"` or a non-negative number.
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::AUTO);
        }
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Value(format!("sigma must be a number or \"auto\", got {s:?}")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Value(format!("sigma must be non-negative, got {v}")));
        }
        Ok(SigmaPolicy::Fixed(v))
    }
}

/// Directed motion graph over segments.
#[derive(Debug, Clone)]
pub struct MotionGraph {
    nodes: Vec<MotionSegment>,
    edges: Vec<Edge>,
    sigma: f64,
    params: TransitionParams,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl PartialEq for MotionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.sigma == other.sigma
            && self.params == other.params
    }
}

fn is_continuation(a: &MotionSegment, b: &MotionSegment) -> bool {
    a.source_id == b.source_id && a.source_range.end == b.source_range.start
}

/// Linear-interpolated percentile of unsorted values.
fn percentile(values: &[f64], pct: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

impl MotionGraph {
    /// Assembles a graph from parts, checking every structural invariant.
    pub fn from_parts(
        mut nodes: Vec<MotionSegment>,
        edges: Vec<Edge>,
        sigma: f64,
        params: TransitionParams,
    ) -> Result<Self> {
        params.validate()?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Value(format!("sigma must be non-negative, got {sigma}")));
        }
        nodes.sort_by(|a, b| a.segment_id.cmp(&b.segment_id));
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.segment_id.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate segment id {:?}", n.segment_id)));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            let (Some(&a), Some(&b)) = (node_index.get(&e.from), node_index.get(&e.to)) else {
                return Err(Error::Schema(format!(
                    "edge {} -> {} has a missing endpoint",
                    e.from, e.to
                )));
            };
            if !(e.cost.is_finite() && e.cost >= 0.0) {
                return Err(Error::Schema(format!("edge {} -> {} has invalid cost", e.from, e.to)));
            }
            if e.natural {
                if e.cost != 0.0 || !is_continuation(&nodes[a], &nodes[b]) {
                    return Err(Error::Schema(format!(
                        "edge {} -> {} is not a valid continuation",
                        e.from, e.to
                    )));
                }
            } else if e.cost >= sigma {
                return Err(Error::Schema(format!(
                    "edge {} -> {} cost {} is not below sigma {sigma}",
                    e.from, e.to, e.cost
                )));
            }
            if a == b && nodes[a].len() < 2 * params.boundary_window {
                return Err(Error::Schema(format!("self loop on short segment {}", e.from)));
            }
            if edge_index.insert((a, b), k).is_some() {
                return Err(Error::Schema(format!("duplicate edge {} -> {}", e.from, e.to)));
            }
        }
        Ok(MotionGraph {
            nodes,
            edges,
            sigma,
            params,
            node_index,
            edge_index,
        })
    }

    pub fn nodes(&self) -> &[MotionSegment] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn params(&self) -> &TransitionParams {
        &self.params
    }

    pub fn node(&self, id: &str) -> Option<&MotionSegment> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn node_position(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        let a = self.node_index.get(from)?;
        let b = self.node_index.get(to)?;
        self.edge_index.get(&(*a, *b)).map(|&k| &self.edges[k])
    }

    /// Edge cost between node positions, if the edge exists.
    pub fn edge_cost_at(&self, from: usize, to: usize) -> Option<f64> {
        self.edge_index.get(&(from, to)).map(|&k| self.edges[k].cost)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn transition_states(&self) -> TransitionStates {
        TransitionStates::new(&self.nodes, &self.params)
    }

    /// Nodes that no other node reaches and that reach no node; handy when
    /// tuning sigma.
    pub fn isolated_nodes(&self) -> Vec<&str> {
        let mut touched = BTreeSet::new();
        for e in &self.edges {
            if e.from != e.to {
                touched.insert(e.from.as_str());
                touched.insert(e.to.as_str());
            }
        }
        self.nodes
            .iter()
            .map(|n| n.segment_id.as_str())
            .filter(|id| !touched.contains(id))
            .collect()
    }
}

/// All candidate ordered pairs (including eligible self pairs) with their
/// transition costs, in node order.
fn pairwise(nodes: &[MotionSegment], params: &TransitionParams) -> Result<Vec<(usize, usize, f64)>> {
    for n in nodes.iter().skip(1) {
        check_same_skeleton(&nodes[0], n)?;
    }
    let states = TransitionStates::new(nodes, params);
    let mut out = Vec::with_capacity(nodes.len() * nodes.len());
    for (i, a) in nodes.iter().enumerate() {
        for j in 0..nodes.len() {
            if i == j && a.len() < 2 * params.boundary_window {
                continue;
            }
            out.push((i, j, states.cost(i, j)));
        }
    }
    Ok(out)
}

/// Builds the graph: an edge for every ordered pair whose transition cost is
/// strictly below sigma, plus zero-cost edges between consecutive segments
/// of the same source clip.
pub fn build_graph(segments: Vec<MotionSegment>, sigma: SigmaPolicy, params: TransitionParams) -> Result<MotionGraph> {
    if segments.is_empty() {
        return Err(Error::EmptyGraph);
    }
    params.validate()?;
    let mut nodes = segments;
    nodes.sort_by(|a, b| a.segment_id.cmp(&b.segment_id));
    let pairs = pairwise(&nodes, &params)?;

    let sigma = match sigma {
        SigmaPolicy::Fixed(s) => s,
        SigmaPolicy::Percentile(p) => {
            let costs: Vec<f64> = pairs
                .iter()
                .filter(|(i, j, _)| !is_continuation(&nodes[*i], &nodes[*j]))
                .map(|(_, _, c)| *c)
                .collect();
            percentile(&costs, p)
        }
    };

    let mut edges = Vec::new();
    for (i, j, cost) in pairs {
        let (a, b) = (&nodes[i], &nodes[j]);
        if is_continuation(a, b) {
            edges.push(Edge {
                from: a.segment_id.clone(),
                to: b.segment_id.clone(),
                cost: 0.0,
                natural: true,
            });
        } else if cost < sigma {
            edges.push(Edge {
                from: a.segment_id.clone(),
                to: b.segment_id.clone(),
                cost,
                natural: false,
            });
        }
    }
    MotionGraph::from_parts(nodes, edges, sigma, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0, 5.0], 20.0), 1.8);
        assert_eq!(percentile(&[2.0], 20.0), 2.0);
        assert_eq!(percentile(&[], 20.0), 0.0);
    }

    #[test]
    fn sigma_parsing() {
        assert_eq!(SigmaPolicy::parse("auto").unwrap(), SigmaPolicy::AUTO);
        assert_eq!(SigmaPolicy::parse("0.25").unwrap(), SigmaPolicy::Fixed(0.25));
        assert!(SigmaPolicy::parse("-1").is_err());
        assert!(SigmaPolicy::parse("lots").is_err());
    }
}
