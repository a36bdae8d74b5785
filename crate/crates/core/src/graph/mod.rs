//! Directed motion graph: segments as nodes, low-cost transitions as edges.

mod build;
mod io;
mod transition;

pub use build::{build_graph, Edge, MotionGraph, SigmaPolicy};
pub use io::{graph_to_json, load_graph, parse_graph_json, save_graph, GRAPH_FORMAT_VERSION};
pub use transition::{transition_cost, yaw_of, RootAlignment, TransitionParams};
