mod common;

use common::*;
use talkmotion::graph::{
    build_graph, graph_to_json, load_graph, parse_graph_json, save_graph, transition_cost, Edge, MotionGraph,
    SigmaPolicy, TransitionParams,
};
use talkmotion::motion::Vec3;
use talkmotion::Error;

fn positional() -> TransitionParams {
    TransitionParams {
        velocity_weight: 0.0,
        ..TransitionParams::default()
    }
}

#[test]
fn threshold_keeps_only_the_cheap_direction() {
    let a = whole(&lift_clip("a", 4, 0.0, 1.0));
    let b = whole(&lift_clip("b", 4, 1.05, 0.5));
    let p = positional();
    assert!((transition_cost(&a, &b, &p).unwrap() - 0.05).abs() < 1e-12);
    assert!((transition_cost(&b, &a, &p).unwrap() - 0.5).abs() < 1e-12);

    let g = build_graph(vec![b, a], SigmaPolicy::Fixed(0.1), p).unwrap();
    assert_eq!(g.nodes()[0].segment_id, "a#0");
    assert_eq!(g.edges().len(), 1);
    let e = &g.edges()[0];
    assert_eq!((e.from.as_str(), e.to.as_str(), e.natural), ("a#0", "b#0", false));
    assert!((e.cost - 0.05).abs() < 1e-12);
}

#[test]
fn consecutive_segments_get_natural_edges() {
    let long = lift_clip("c", 30, 0.0, 3.0);
    let segs = split(&long, &[10, 20]);
    let g = build_graph(segs, SigmaPolicy::Fixed(0.01), positional()).unwrap();
    let natural: Vec<(&str, &str)> = g
        .edges()
        .iter()
        .filter(|e| e.natural)
        .map(|e| (e.from.as_str(), e.to.as_str()))
        .collect();
    assert_eq!(natural, vec![("c#0", "c#10"), ("c#10", "c#20")]);
    assert!(g.edges().iter().filter(|e| e.natural).all(|e| e.cost == 0.0));
    assert!(g.edges().iter().filter(|e| !e.natural).all(|e| e.cost < g.sigma()));
}

#[test]
fn sigma_zero_leaves_only_natural_edges() {
    let long = lift_clip("c", 30, 0.0, 3.0);
    let mut segs = split(&long, &[15]);
    segs.push(whole(&static_clip(&root_skeleton(), "s", 8, Vec3::zeros())));
    let g = build_graph(segs, SigmaPolicy::Fixed(0.0), positional()).unwrap();
    assert_eq!(g.edges().len(), 1);
    assert!(g.edges()[0].natural);
}

#[test]
fn static_segment_loops_onto_itself() {
    let s = whole(&static_clip(&arm_skeleton(), "rest", 8, Vec3::new(0.0, 0.0, 0.0)));
    let g = build_graph(vec![s.clone()], SigmaPolicy::Fixed(0.1), TransitionParams::default()).unwrap();
    assert_eq!(g.edges().len(), 1);
    assert_eq!(
        (g.edges()[0].from.as_str(), g.edges()[0].to.as_str()),
        ("rest#0", "rest#0")
    );
    assert_eq!(g.edges()[0].cost, 0.0);

    let short = whole(&static_clip(&arm_skeleton(), "blip", 5, Vec3::zeros()));
    let g = build_graph(vec![short], SigmaPolicy::Fixed(0.1), TransitionParams::default()).unwrap();
    assert!(g.edges().is_empty());
}

#[test]
fn auto_sigma_is_a_pair_cost_percentile() {
    // Every transition out of k{i} costs 0.1 (i + 1): the lift's end height.
    let segs: Vec<_> = (0..5)
        .map(|i| whole(&lift_clip(&format!("k{i}"), 8, 0.0, 0.1 * (i + 1) as f64)))
        .collect();
    let g = build_graph(segs, SigmaPolicy::AUTO, positional()).unwrap();
    // 25 ordered pairs; rank 0.2 * 24 = 4.8 sits between 0.1 and 0.2.
    assert!((g.sigma() - 0.18).abs() < 1e-12, "{}", g.sigma());
    assert_eq!(g.edges().len(), 5);
    assert!(g.edges().iter().all(|e| e.from == "k0#0"));
}

#[test]
fn empty_input_is_rejected() {
    assert!(matches!(
        build_graph(Vec::new(), SigmaPolicy::AUTO, TransitionParams::default()),
        Err(Error::EmptyGraph)
    ));
}

fn sample_graph() -> MotionGraph {
    let long = lift_clip("c", 30, 0.0, 0.3);
    let mut segs = split(&long, &[12]);
    segs.push(whole(&lift_clip("d", 9, 0.31, 0.0)));
    build_graph(segs, SigmaPolicy::Fixed(0.2), TransitionParams::default()).unwrap()
}

#[test]
fn save_load_is_field_exact() {
    let g = sample_graph();
    assert!(!g.edges().is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    save_graph(&g, &path).unwrap();
    let back = load_graph(&path).unwrap();
    assert_eq!(back, g);
    assert_eq!(graph_to_json(&back), graph_to_json(&g));
}

#[test]
fn edgeless_graph_round_trips() {
    let s = whole(&lift_clip("a", 4, 0.0, 1.0));
    let g = build_graph(vec![s], SigmaPolicy::Fixed(0.1), positional()).unwrap();
    assert!(g.edges().is_empty());
    let back = parse_graph_json(&graph_to_json(&g)).unwrap();
    assert_eq!(back.edges().len(), 0);
    assert_eq!(back, g);
}

#[test]
fn format_errors() {
    let text = graph_to_json(&sample_graph());
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["version"] = "9".into();
    assert!(matches!(parse_graph_json(&v.to_string()), Err(Error::Version { .. })));
    v.as_object_mut().unwrap().remove("version");
    assert!(matches!(parse_graph_json(&v.to_string()), Err(Error::Schema(_))));
    assert!(matches!(parse_graph_json("{"), Err(Error::Parse(_))));
}

#[test]
fn hand_built_graphs_are_validated() {
    let g = sample_graph();
    let nodes = g.nodes().to_vec();
    let edge = |from: &str, to: &str, cost: f64| Edge {
        from: from.into(),
        to: to.into(),
        cost,
        natural: false,
    };
    let p = *g.params();
    assert!(MotionGraph::from_parts(nodes.clone(), vec![edge("c#0", "d#0", 0.3)], 0.2, p).is_err());
    assert!(MotionGraph::from_parts(nodes.clone(), vec![edge("c#0", "zz", 0.1)], 0.2, p).is_err());
    assert!(MotionGraph::from_parts(nodes.clone(), vec![edge("d#0", "c#0", -0.1)], 0.2, p).is_err());
    let ok = MotionGraph::from_parts(nodes, vec![edge("d#0", "c#0", 0.1)], 0.2, p).unwrap();
    assert_eq!(ok.edge("d#0", "c#0").map(|e| e.cost), Some(0.1));
}
