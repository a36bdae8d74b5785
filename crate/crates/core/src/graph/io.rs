use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MotionGraph, TransitionParams};
use crate::motion::{clip_from_record, clip_to_record, ClipRecord, Normalization, StrengthCurve};
use crate::segmentation::MotionSegment;

pub const GRAPH_FORMAT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    version: String,
    sigma: f64,
    params: TransitionParams,
    nodes: Vec<NodeRecord>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    segment_id: String,
    source_id: String,
    source_range: [usize; 2],
    #[serde(default)]
    semantic_tag: Option<String>,
    strength: Vec<f64>,
    clip: ClipRecord,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<serde_json::Value>,
}

fn node_to_record(n: &MotionSegment) -> NodeRecord {
    NodeRecord {
        segment_id: n.segment_id.clone(),
        source_id: n.source_id.clone(),
        source_range: [n.source_range.start, n.source_range.end],
        semantic_tag: n.semantic_tag.clone(),
        strength: n.strength.values.clone(),
        clip: clip_to_record(&n.clip),
    }
}

fn node_from_record(r: NodeRecord) -> Result<MotionSegment> {
    let clip = clip_from_record(r.clip)?;
    let [start, end] = r.source_range;
    if end <= start || end - start != clip.frame_count() {
        return Err(Error::Schema(format!(
            "node {}: range [{start}, {end}) does not match {} frames",
            r.segment_id,
            clip.frame_count()
        )));
    }
    if r.strength.len() != clip.frame_count() || r.strength.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Schema(format!("node {}: bad strength curve", r.segment_id)));
    }
    let strength = StrengthCurve {
        values: r.strength,
        fps: clip.fps(),
        normalization: Normalization::UnitMax,
    };
    if !strength.is_unit_max() {
        return Err(Error::Schema(format!(
            "node {}: strength is not unit-max",
            r.segment_id
        )));
    }
    Ok(MotionSegment {
        segment_id: r.segment_id,
        source_id: r.source_id,
        source_range: start..end,
        clip,
        strength,
        semantic_tag: r.semantic_tag,
    })
}

pub fn graph_to_json(graph: &MotionGraph) -> String {
    let rec = GraphRecord {
        version: GRAPH_FORMAT_VERSION.to_string(),
        sigma: graph.sigma(),
        params: *graph.params(),
        nodes: graph.nodes().iter().map(node_to_record).collect(),
        edges: graph.edges().to_vec(),
    };
    serde_json::to_string(&rec).expect("graph records serialize")
}

pub fn parse_graph_json(text: &str) -> Result<MotionGraph> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match probe.version {
        Some(serde_json::Value::String(v)) if v == GRAPH_FORMAT_VERSION => {}
        Some(other) => {
            let found = other.as_str().map(str::to_string).unwrap_or_else(|| other.to_string());
            return Err(Error::Version {
                found,
                expected: GRAPH_FORMAT_VERSION.into(),
            });
        }
        None => return Err(Error::Schema("graph file has no version".into())),
    }
    let rec: GraphRecord = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let nodes = rec
        .nodes
        .into_iter()
        .map(node_from_record)
        .collect::<Result<Vec<_>>>()?;
    MotionGraph::from_parts(nodes, rec.edges, rec.sigma, rec.params).map_err(|e| match e {
        Error::Value(m) => Error::Schema(m),
        other => other,
    })
}

pub fn save_graph(graph: &MotionGraph, path: &Path) -> Result<()> {
    fs::write(path, graph_to_json(graph)).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: &Path) -> Result<MotionGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph_json(&text)
}
