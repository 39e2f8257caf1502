//! Dynamic topological graphs: nodes, directed edges with occupancy-dependent
//! costs, overwatch opportunities, and the team's start and goal demands.

mod cost;
mod file;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cost::{edge_cost, overwatch_cost, CostError};
pub(crate) use cost::{edge_cost_unchecked, overwatch_cost_unchecked};
pub use file::{load_scenario, CountEntry, EdgeEntry, LocRef, NodeEntry, OverwatchEntry, ScenarioError, ScenarioFile};
pub use validate::{validate, ValidationReport, Violation};

/// Index of a node in [`Scenario::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// Index of a directed edge in [`Scenario::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

/// A place a robot can occupy during one time step: a node (its implicit
/// self-loop) or a directed edge.
///
/// Locations are densely numbered nodes first, then edges, so the derived
/// ordering matches [`Scenario::loc_index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocationId {
    Node(NodeId),
    Edge(EdgeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Identifier used in scenario files and reports.
    pub key: i64,
    pub label: Option<String>,
}

/// Traversal parameters of one directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeParams {
    pub from: NodeId,
    pub to: NodeId,
    /// Base cost for a team of exactly `a` robots.
    pub w: f64,
    /// Desired team size.
    pub a: u32,
    /// Penalty per robot short of `a`.
    pub m: f64,
    /// Reward per robot beyond `a`.
    pub r: f64,
}

impl EdgeParams {
    /// Slope used for the shortfall side of the traversal envelope.
    ///
    /// With `a == 1` the shortfall branch is only ever evaluated at one robot,
    /// where it equals `w` whatever `m` is, so `m` is lifted to `r` to keep the
    /// envelope convex.
    pub fn shortfall_slope(&self) -> f64 {
        if self.a <= 1 {
            self.m.max(self.r)
        } else {
            self.m
        }
    }
}

/// Robots at `watcher` reduce the cost of traffic on `watched`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverwatchOpportunity {
    pub watcher: NodeId,
    pub watched: EdgeId,
    /// Reward at full overwatch.
    pub omega: f64,
    /// Robots needed for full overwatch.
    pub alpha: u32,
    /// Reward per watcher beyond `alpha`.
    pub gamma: f64,
}

/// One planning instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub edges: Vec<EdgeParams>,
    pub overwatch: Vec<OverwatchOpportunity>,
    pub n_agents: u32,
    pub n_timesteps: u32,
    pub starts: Vec<(LocationId, u32)>,
    pub goals: Vec<(LocationId, u32)>,
    /// Weight on the time cost.
    pub time_weight: f64,
}

/// Which cost constructs to switch off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ablation {
    pub no_overwatch: bool,
    pub no_vulnerability: bool,
    pub no_teaming: bool,
}

impl Ablation {
    pub fn all() -> Self {
        Ablation {
            no_overwatch: true,
            no_vulnerability: true,
            no_teaming: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        !(self.no_overwatch || self.no_vulnerability || self.no_teaming)
    }
}

impl Scenario {
    pub fn new(n_agents: u32, n_timesteps: u32) -> Self {
        Scenario {
            nodes: Vec::new(),
            edges: Vec::new(),
            overwatch: Vec::new(),
            n_agents,
            n_timesteps,
            starts: Vec::new(),
            goals: Vec::new(),
            time_weight: 1.0,
        }
    }

    pub fn with_time_weight(mut self, time_weight: f64) -> Self {
        self.time_weight = time_weight;
        self
    }

    pub fn add_node(&mut self, key: i64) -> NodeId {
        self.nodes.push(Node { key, label: None });
        NodeId(self.nodes.len() - 1)
    }

    /// Adds nodes with keys `1..=count`.
    pub fn add_nodes(&mut self, count: usize) -> Vec<NodeId> {
        (1..=count as i64).map(|k| self.add_node(k)).collect()
    }

    pub fn add_edge(&mut self, edge: EdgeParams) -> EdgeId {
        self.edges.push(edge);
        EdgeId(self.edges.len() - 1)
    }

    /// Adds a plain edge (`a = 1`, `m = 0`) with teaming reward `r`.
    pub fn add_plain_edge(&mut self, from: NodeId, to: NodeId, w: f64, r: f64) -> EdgeId {
        self.add_edge(EdgeParams {
            from,
            to,
            w,
            a: 1,
            m: 0.0,
            r,
        })
    }

    /// Adds both directions of an edge with identical parameters.
    pub fn add_undirected(&mut self, edge: EdgeParams) -> (EdgeId, EdgeId) {
        let reverse = EdgeParams {
            from: edge.to,
            to: edge.from,
            ..edge.clone()
        };
        (self.add_edge(edge), self.add_edge(reverse))
    }

    pub fn add_overwatch(&mut self, opp: OverwatchOpportunity) -> usize {
        self.overwatch.push(opp);
        self.overwatch.len() - 1
    }

    pub fn add_start(&mut self, loc: LocationId, count: u32) {
        self.starts.push((loc, count));
    }

    pub fn add_goal(&mut self, loc: LocationId, count: u32) {
        self.goals.push((loc, count));
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_locations(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn n_opportunities(&self) -> usize {
        self.overwatch.len()
    }

    pub fn loc_index(&self, loc: LocationId) -> usize {
        match loc {
            LocationId::Node(v) => v.0,
            LocationId::Edge(e) => self.nodes.len() + e.0,
        }
    }

    pub fn location(&self, index: usize) -> LocationId {
        if index < self.nodes.len() {
            LocationId::Node(NodeId(index))
        } else {
            LocationId::Edge(EdgeId(index - self.nodes.len()))
        }
    }

    pub fn locations(&self) -> impl Iterator<Item = LocationId> + '_ {
        (0..self.n_locations()).map(move |i| self.location(i))
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeParams {
        &self.edges[e.0]
    }

    pub fn node_by_key(&self, key: i64) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.key == key).map(NodeId)
    }

    pub fn find_edge(&self, from: NodeId, to: NodeId) -> Option<EdgeId> {
        self.edges
            .iter()
            .position(|e| e.from == from && e.to == to)
            .map(EdgeId)
    }

    /// Edges leaving `v`, in id order.
    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == v)
            .map(|(i, _)| EdgeId(i))
    }

    /// Edges entering `v`, in id order.
    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.to == v)
            .map(|(i, _)| EdgeId(i))
    }

    pub fn node_key(&self, v: NodeId) -> i64 {
        self.nodes[v.0].key
    }

    pub fn edge_label(&self, e: EdgeId) -> String {
        let edge = &self.edges[e.0];
        format!("({},{})", self.node_key(edge.from), self.node_key(edge.to))
    }

    pub fn loc_label(&self, loc: LocationId) -> String {
        match loc {
            LocationId::Node(v) => self.node_key(v).to_string(),
            LocationId::Edge(e) => self.edge_label(e),
        }
    }

    /// Copy with the selected constructs neutralised. Topology is untouched.
    pub fn masked(&self, ablation: &Ablation) -> Scenario {
        let mut out = self.clone();
        if ablation.no_overwatch {
            out.overwatch.clear();
        }
        for e in &mut out.edges {
            if ablation.no_vulnerability {
                e.a = 1;
                e.m = 0.0;
            }
            if ablation.no_teaming {
                e.r = 0.0;
            }
        }
        out
    }
}

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationId::Node(v) => write!(f, "node#{}", v.0),
            LocationId::Edge(e) => write!(f, "edge#{}", e.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn location_space_is_disjoint_union() {
        let mut s = Scenario::new(1, 1);
        let v = s.add_nodes(3);
        s.add_undirected(EdgeParams {
            from: v[0],
            to: v[1],
            w: 1.0,
            a: 1,
            m: 0.0,
            r: 0.0,
        });
        s.add_plain_edge(v[1], v[2], 2.0, 0.0);
        assert_eq!(s.n_locations(), 6);
        let all: Vec<_> = s.locations().collect();
        for (i, loc) in all.iter().enumerate() {
            assert_eq!(s.loc_index(*loc), i);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.location(3), LocationId::Edge(EdgeId(0)));
    }

    #[test]
    fn undirected_expands_to_two_directed_edges() {
        let mut s = Scenario::new(2, 2);
        let v = s.add_nodes(2);
        let (fwd, back) = s.add_undirected(EdgeParams {
            from: v[0],
            to: v[1],
            w: 7.0,
            a: 2,
            m: 3.0,
            r: 1.0,
        });
        assert_ne!(fwd, back);
        assert_eq!(s.edge(back).from, v[1]);
        assert_eq!(s.edge(back).w, 7.0);
        assert_eq!(s.edge_label(back), "(2,1)");
    }

    #[test]
    fn masking_keeps_topology() {
        let mut s = Scenario::new(3, 3);
        let v = s.add_nodes(2);
        let e = s.add_edge(EdgeParams {
            from: v[0],
            to: v[1],
            w: 9.0,
            a: 3,
            m: 4.0,
            r: 1.0,
        });
        s.add_overwatch(OverwatchOpportunity {
            watcher: v[0],
            watched: e,
            omega: 2.0,
            alpha: 1,
            gamma: 0.0,
        });
        let m = s.masked(&Ablation::all());
        assert_eq!(m.n_locations(), s.n_locations());
        assert!(m.overwatch.is_empty());
        assert_eq!((m.edges[0].a, m.edges[0].m, m.edges[0].r), (1, 0.0, 0.0));
        assert_eq!(m.edges[0].w, 9.0);
    }
}
