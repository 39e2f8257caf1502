//! Cutset rows for the goal requirement.
//!
//! In the time-expanded graph (one copy of every location per step, arcs
//! along the one-step successor relation) some robot walks from a start at
//! step 1 to each goal at the last step. Every edge visit on that walk has
//! its support flag set, so any set of edge visits separating the starts
//! from a goal carries flag mass at least one. Separation is a max flow with
//! capacity `phi` on edge visits and no limit elsewhere.

use std::collections::VecDeque;

use crate::model::{flow_graph, MipModel, Relation, Row, RowTag};

/// Flow values below this count as a violated cut.
const MIN_VIOLATION: f64 = 1e-3;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
    /// Edge visit column guarded by this arc, if any.
    phi: Option<usize>,
}

pub(crate) struct Separator {
    n_locations: usize,
    n_timesteps: usize,
    n_nodes: usize,
    succ: Vec<Vec<usize>>,
    starts: Vec<usize>,
    goals: Vec<usize>,
    phi_col: Vec<Vec<usize>>,
}

/// Dinic's max flow on a small dense-ish graph.
struct FlowNet {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

const INF: f64 = 1e18;

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64, phi: Option<usize>) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, phi });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0.0, phi: None });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &a in &self.adj[v] {
                let arc = &self.arcs[a];
                if arc.cap > 1e-12 && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[v] + 1;
                    q.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.next[v] < self.adj[v].len() {
            let a = self.adj[v][self.next[v]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > 1e-12 && self.level[to] == self.level[v] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > 0.0 {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            self.next[v] += 1;
        }
        0.0
    }

    /// Max flow, stopping once it reaches `enough`.
    fn max_flow(&mut self, s: usize, t: usize, enough: f64) -> f64 {
        let mut flow = 0.0;
        while flow < enough && self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, INF);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }

    /// Vertices reachable from `s` in the residual graph.
    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &a in &self.adj[v] {
                let arc = &self.arcs[a];
                if arc.cap > 1e-12 && !seen[arc.to] {
                    seen[arc.to] = true;
                    q.push_back(arc.to);
                }
            }
        }
        seen
    }

    /// Vertices that reach `t` in the residual graph.
    fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut q = VecDeque::from([t]);
        while let Some(v) = q.pop_front() {
            for &a in &self.adj[v] {
                // reverse arc a^1 goes from adj target back to v
                let back = &self.arcs[a ^ 1];
                let from = self.arcs[a].to;
                if back.cap > 1e-12 && !seen[from] {
                    seen[from] = true;
                    q.push_back(from);
                }
            }
        }
        seen
    }
}

impl Separator {
    pub fn new(model: &MipModel) -> Option<Self> {
        let g = flow_graph(model);
        let layout = &model.layout;
        if g.goals.is_empty() || g.starts.is_empty() || layout.n_timesteps < 2 {
            return None;
        }
        let phi_col = (0..layout.n_edges)
            .map(|e| (1..=layout.n_timesteps).map(|t| layout.phi(e, t)).collect())
            .collect();
        Some(Separator {
            n_locations: layout.n_locations,
            n_timesteps: layout.n_timesteps as usize,
            n_nodes: g.n_nodes,
            succ: g.succ,
            starts: g.starts,
            goals: g.goals,
            phi_col,
        })
    }

    fn vin(&self, loc: usize, t: usize) -> usize {
        2 * ((t - 1) * self.n_locations + loc)
    }

    fn build(&self, x: &[f64], goal: usize) -> (FlowNet, usize, usize) {
        let n_v = 2 * self.n_locations * self.n_timesteps + 2;
        let (s, sink) = (n_v - 2, n_v - 1);
        let mut net = FlowNet::new(n_v);
        for t in 1..=self.n_timesteps {
            for loc in 0..self.n_locations {
                let (vi, vo) = (self.vin(loc, t), self.vin(loc, t) + 1);
                if loc >= self.n_nodes && t >= 2 {
                    let col = self.phi_col[loc - self.n_nodes][t - 1];
                    net.add(vi, vo, x[col].max(0.0), Some(col));
                } else {
                    net.add(vi, vo, INF, None);
                }
                if t < self.n_timesteps {
                    for &k in &self.succ[loc] {
                        net.add(vo, self.vin(k, t + 1), INF, None);
                    }
                }
            }
        }
        for &st in &self.starts {
            net.add(s, self.vin(st, 1), INF, None);
        }
        net.add(self.vin(goal, self.n_timesteps) + 1, sink, INF, None);
        (net, s, sink)
    }

    /// Violated cutset rows at `x`: for each goal, the source-side and the
    /// sink-side minimum cut when the max flow is below one.
    pub fn separate(&self, x: &[f64]) -> Vec<Row> {
        let mut out: Vec<Row> = Vec::new();
        for &goal in &self.goals {
            let (mut net, s, sink) = self.build(x, goal);
            let flow = net.max_flow(s, sink, 1.0);
            if flow >= 1.0 - MIN_VIOLATION {
                continue;
            }
            let sides = [net.source_side(s), net.sink_side(sink).iter().map(|b| !b).collect()];
            for side in sides {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                let mut unguarded = false;
                for (v, adj) in net.adj.iter().enumerate() {
                    if !side[v] {
                        continue;
                    }
                    for &a in adj {
                        let arc = &net.arcs[a];
                        if a % 2 == 0 && !side[arc.to] {
                            match arc.phi {
                                Some(col) => coeffs.push((col, 1.0)),
                                None => unguarded = true,
                            }
                        }
                    }
                }
                if unguarded || coeffs.is_empty() {
                    continue;
                }
                coeffs.sort_by_key(|c| c.0);
                if out.iter().any(|r| r.coeffs == coeffs) {
                    continue;
                }
                out.push(Row {
                    tag: RowTag::GoalCut { goal },
                    coeffs,
                    relation: Relation::Ge,
                    rhs: 1.0,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::scenario::{EdgeParams, LocationId, Scenario};

    fn path(n_t: u32) -> MipModel {
        let mut s = Scenario::new(2, n_t);
        let v = s.add_nodes(3);
        for (a, b) in [(0, 1), (1, 2)] {
            s.add_undirected(EdgeParams { from: v[a], to: v[b], w: 5.0, a: 1, m: 0.0, r: 1.0 });
        }
        s.add_start(LocationId::Node(v[0]), 2);
        s.add_goal(LocationId::Node(v[2]), 1);
        build_model(&s).unwrap()
    }

    #[test]
    fn integer_walk_violates_nothing() {
        let model = path(5);
        let sep = Separator::new(&model).unwrap();
        let mut x = vec![0.0; model.n_columns()];
        // edge 0 is 0->1 and edge 2 is 1->2; visit them at steps 2 and 3
        x[model.layout.phi(0, 2)] = 1.0;
        x[model.layout.phi(2, 3)] = 1.0;
        assert!(sep.separate(&x).is_empty());
    }

    #[test]
    fn thin_flags_are_cut() {
        let model = path(5);
        let sep = Separator::new(&model).unwrap();
        let mut x = vec![0.0; model.n_columns()];
        x[model.layout.phi(0, 2)] = 1.0;
        x[model.layout.phi(2, 3)] = 0.5;
        let cuts = sep.separate(&x);
        assert!(!cuts.is_empty());
        for cut in &cuts {
            assert!(cut.activity(&x) < 1.0);
            // every integer walk 0 -> 1 -> 2 arriving by step 5 survives
            for ta in 2..=3 {
                for tb in ta + 1..=4 {
                    let mut walk = vec![0.0; model.n_columns()];
                    walk[model.layout.phi(0, ta)] = 1.0;
                    walk[model.layout.phi(2, tb)] = 1.0;
                    assert!(cut.activity(&walk) >= 1.0, "{:?} cuts walk {ta},{tb}", cut.coeffs);
                }
            }
        }
    }
}
