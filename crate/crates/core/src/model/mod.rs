//! Compilation of a scenario into the mixed-integer program.
//!
//! Columns are laid out time-major. Within one time step the order is every
//! location occupancy `P`, every edge-used flag `Phi`, the moving flag `Psi`,
//! every traversal cost `Cw`, then every overwatch cost `Comega`, each group in
//! ascending id order. A block therefore holds `1 + n_L + 2 n_E + n_O` columns.

mod lp_format;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{validate, LocationId, NodeId, Scenario, ValidationReport};

pub use lp_format::write_lp;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("scenario failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("node #{0} does not exist")]
    UnknownNode(usize),
}

/// What a column stands for. Indices are dense scenario indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// Robots at a location.
    P { loc: usize },
    /// Whether any robot is on an edge.
    Phi { edge: usize },
    /// Whether any robot is on any edge.
    Psi,
    /// Traversal cost of an edge.
    Cw { edge: usize },
    /// Overwatch reward of an opportunity.
    Comega { opp: usize },
}

/// A column identity: its kind and its time step (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarRef {
    pub kind: VarKind,
    pub t: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrality {
    Continuous,
    Integer,
    Binary,
}

impl Integrality {
    pub fn is_integer(self) -> bool {
        !matches!(self, Integrality::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    #[serde(with = "ext_f64")]
    pub lower: f64,
    #[serde(with = "ext_f64")]
    pub upper: f64,
    pub integrality: Integrality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Which family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowTag {
    TraversalShortfall { edge: usize, t: u32 },
    TraversalTeaming { edge: usize, t: u32 },
    OverwatchRamp { opp: usize, t: u32 },
    OverwatchSurplus { opp: usize, t: u32 },
    OverwatchGate { opp: usize, t: u32 },
    /// Implied rows from [`implied_rows`], not part of the base model.
    OverwatchCap { opp: usize, t: u32 },
    ReachSteps,
    ReachLayer { k: usize },
    EdgeTraffic { edge: usize, t: u32 },
    StepTraffic { t: u32 },
    StepUsed { edge: usize, t: u32 },
    /// Cutset row separated during the search.
    GoalCut { goal: usize },
    EdgeUsed { edge: usize, t: u32 },
    Moving { t: u32 },
    Start { loc: usize },
    Goal { loc: usize },
    TeamSize { t: u32 },
    Flow { node: usize, t: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub tag: RowTag,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row, zero if satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Deterministic bijection between [`VarRef`]s and column indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarLayout {
    pub n_locations: usize,
    pub n_edges: usize,
    pub n_opportunities: usize,
    pub n_timesteps: u32,
}

impl VarLayout {
    pub fn block_len(&self) -> usize {
        1 + self.n_locations + 2 * self.n_edges + self.n_opportunities
    }

    pub fn n_columns(&self) -> usize {
        self.block_len() * self.n_timesteps as usize
    }

    pub fn index(&self, var: VarRef) -> usize {
        debug_assert!(var.t >= 1 && var.t <= self.n_timesteps);
        let base = (var.t as usize - 1) * self.block_len();
        let offset = match var.kind {
            VarKind::P { loc } => loc,
            VarKind::Phi { edge } => self.n_locations + edge,
            VarKind::Psi => self.n_locations + self.n_edges,
            VarKind::Cw { edge } => self.n_locations + self.n_edges + 1 + edge,
            VarKind::Comega { opp } => self.n_locations + 2 * self.n_edges + 1 + opp,
        };
        base + offset
    }

    pub fn var(&self, column: usize) -> VarRef {
        let block = self.block_len();
        let t = (column / block) as u32 + 1;
        let mut k = column % block;
        let kind = if k < self.n_locations {
            VarKind::P { loc: k }
        } else {
            k -= self.n_locations;
            if k < self.n_edges {
                VarKind::Phi { edge: k }
            } else if k == self.n_edges {
                VarKind::Psi
            } else {
                k -= self.n_edges + 1;
                if k < self.n_edges {
                    VarKind::Cw { edge: k }
                } else {
                    VarKind::Comega { opp: k - self.n_edges }
                }
            }
        };
        VarRef { kind, t }
    }

    pub fn p(&self, loc: usize, t: u32) -> usize {
        self.index(VarRef {
            kind: VarKind::P { loc },
            t,
        })
    }

    pub fn phi(&self, edge: usize, t: u32) -> usize {
        self.index(VarRef {
            kind: VarKind::Phi { edge },
            t,
        })
    }

    pub fn psi(&self, t: u32) -> usize {
        self.index(VarRef { kind: VarKind::Psi, t })
    }

    pub fn cw(&self, edge: usize, t: u32) -> usize {
        self.index(VarRef {
            kind: VarKind::Cw { edge },
            t,
        })
    }

    pub fn comega(&self, opp: usize, t: u32) -> usize {
        self.index(VarRef {
            kind: VarKind::Comega { opp },
            t,
        })
    }
}

/// A minimisation MILP: column bounds and integrality, linear rows, and a
/// linear objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub objective: Vec<f64>,
    pub layout: VarLayout,
}

/// Column totals split by integrality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCounts {
    pub total: usize,
    pub binary: usize,
    pub integer: usize,
    pub continuous: usize,
}

impl MipModel {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_counts(&self) -> ColumnCounts {
        let mut counts = ColumnCounts {
            total: self.columns.len(),
            binary: 0,
            integer: 0,
            continuous: 0,
        };
        for c in &self.columns {
            match c.integrality {
                Integrality::Binary => counts.binary += 1,
                Integrality::Integer => counts.integer += 1,
                Integrality::Continuous => counts.continuous += 1,
            }
        }
        counts
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row violation at `x`.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Expected column counts for a problem of the given size, straight from the
/// size formula rather than a built model.
pub fn expected_column_counts(n_locations: usize, n_edges: usize, n_opportunities: usize, n_timesteps: usize) -> ColumnCounts {
    ColumnCounts {
        total: n_timesteps * (1 + n_locations + 2 * n_edges + n_opportunities),
        binary: n_timesteps * (1 + n_edges),
        integer: n_timesteps * n_locations,
        continuous: n_timesteps * (n_edges + n_opportunities),
    }
}

/// Locations whose robots feed node `v` (its self-loop and entering edges),
/// and locations fed by `v` one step later (its self-loop and leaving edges).
pub fn flow_stencil(scn: &Scenario, v: NodeId) -> Result<(Vec<LocationId>, Vec<LocationId>), ModelError> {
    if v.0 >= scn.n_nodes() {
        return Err(ModelError::UnknownNode(v.0));
    }
    let incoming = std::iter::once(LocationId::Node(v))
        .chain(scn.in_edges(v).map(LocationId::Edge))
        .collect();
    let outgoing = std::iter::once(LocationId::Node(v))
        .chain(scn.out_edges(v).map(LocationId::Edge))
        .collect();
    Ok((incoming, outgoing))
}

/// Builds the complete MILP for a validated scenario.
pub fn build_model(scn: &Scenario) -> Result<MipModel, ModelError> {
    let report = validate(scn);
    if !report.is_ok() {
        return Err(ModelError::Invalid(report));
    }
    let layout = VarLayout {
        n_locations: scn.n_locations(),
        n_edges: scn.n_edges(),
        n_opportunities: scn.n_opportunities(),
        n_timesteps: scn.n_timesteps,
    };
    let n_cols = layout.n_columns();
    let n_agents = f64::from(scn.n_agents);
    let n_nodes = scn.n_nodes();

    let mut columns = Vec::with_capacity(n_cols);
    let mut objective = vec![0.0; n_cols];
    for j in 0..n_cols {
        let var = layout.var(j);
        let column = match var.kind {
            VarKind::P { .. } => Column {
                lower: 0.0,
                upper: n_agents,
                integrality: Integrality::Integer,
            },
            VarKind::Phi { .. } | VarKind::Psi => Column {
                lower: 0.0,
                upper: 1.0,
                integrality: Integrality::Binary,
            },
            VarKind::Cw { .. } => Column {
                lower: 0.0,
                upper: f64::INFINITY,
                integrality: Integrality::Continuous,
            },
            VarKind::Comega { .. } => Column {
                lower: f64::NEG_INFINITY,
                upper: 0.0,
                integrality: Integrality::Continuous,
            },
        };
        objective[j] = match var.kind {
            VarKind::Psi => scn.time_weight * f64::from(var.t),
            VarKind::Cw { .. } | VarKind::Comega { .. } => 1.0,
            _ => 0.0,
        };
        columns.push(column);
    }

    let mut rows = Vec::new();
    let push = |rows: &mut Vec<Row>, tag, coeffs: Vec<(usize, f64)>, relation, rhs| {
        let coeffs = coeffs.into_iter().filter(|&(_, a)| a != 0.0).collect();
        rows.push(Row {
            tag,
            coeffs,
            relation,
            rhs,
        });
    };

    let stencils: Vec<_> = (0..n_nodes)
        .map(|v| flow_stencil(scn, NodeId(v)).expect("node in range"))
        .collect();

    for t in 1..=scn.n_timesteps {
        for (e, edge) in scn.edges.iter().enumerate() {
            let p = layout.p(n_nodes + e, t);
            let phi = layout.phi(e, t);
            let cw = layout.cw(e, t);
            let a = f64::from(edge.a);
            let m = edge.shortfall_slope();
            push(
                &mut rows,
                RowTag::TraversalShortfall { edge: e, t },
                vec![(cw, 1.0), (p, m), (phi, -(edge.w + m * a))],
                Relation::Ge,
                0.0,
            );
            push(
                &mut rows,
                RowTag::TraversalTeaming { edge: e, t },
                vec![(cw, 1.0), (p, edge.r), (phi, -(edge.w + edge.r * a))],
                Relation::Ge,
                0.0,
            );
        }
        for (o, opp) in scn.overwatch.iter().enumerate() {
            let c = layout.comega(o, t);
            let p_node = layout.p(opp.watcher.0, t);
            let p_edge = layout.p(n_nodes + opp.watched.0, t);
            let ramp = opp.omega / f64::from(opp.alpha);
            push(
                &mut rows,
                RowTag::OverwatchRamp { opp: o, t },
                vec![(c, 1.0), (p_node, ramp)],
                Relation::Ge,
                0.0,
            );
            push(
                &mut rows,
                RowTag::OverwatchSurplus { opp: o, t },
                vec![(c, 1.0), (p_node, opp.gamma)],
                Relation::Ge,
                opp.gamma * f64::from(opp.alpha) - opp.omega,
            );
            push(
                &mut rows,
                RowTag::OverwatchGate { opp: o, t },
                vec![(c, 1.0), (p_edge, ramp * n_agents)],
                Relation::Ge,
                0.0,
            );
        }
        for e in 0..scn.n_edges() {
            push(
                &mut rows,
                RowTag::EdgeUsed { edge: e, t },
                vec![(layout.phi(e, t), n_agents), (layout.p(n_nodes + e, t), -1.0)],
                Relation::Ge,
                0.0,
            );
        }
        let mut moving = vec![(layout.psi(t), n_agents)];
        moving.extend((0..scn.n_edges()).map(|e| (layout.p(n_nodes + e, t), -1.0)));
        push(&mut rows, RowTag::Moving { t }, moving, Relation::Ge, 0.0);
        push(
            &mut rows,
            RowTag::TeamSize { t },
            (0..layout.n_locations).map(|l| (layout.p(l, t), 1.0)).collect(),
            Relation::Eq,
            n_agents,
        );
        if t >= 2 {
            for (v, (incoming, outgoing)) in stencils.iter().enumerate() {
                let mut coeffs: Vec<(usize, f64)> = incoming
                    .iter()
                    .map(|&l| (layout.p(scn.loc_index(l), t - 1), 1.0))
                    .collect();
                coeffs.extend(outgoing.iter().map(|&l| (layout.p(scn.loc_index(l), t), -1.0)));
                push(&mut rows, RowTag::Flow { node: v, t }, coeffs, Relation::Eq, 0.0);
            }
        }
    }
    for &(loc, count) in &scn.starts {
        let l = scn.loc_index(loc);
        push(
            &mut rows,
            RowTag::Start { loc: l },
            vec![(layout.p(l, 1), 1.0)],
            Relation::Eq,
            f64::from(count),
        );
    }
    for &(loc, count) in &scn.goals {
        let l = scn.loc_index(loc);
        push(
            &mut rows,
            RowTag::Goal { loc: l },
            vec![(layout.p(l, scn.n_timesteps), 1.0)],
            Relation::Ge,
            f64::from(count),
        );
    }

    Ok(MipModel {
        columns,
        rows,
        objective,
        layout,
    })
}

/// Rows every integer-feasible point of `model` already satisfies but its
/// relaxation does not.
///
/// - `Comega + D phi_e >= 0` per overwatch row set, with `D` the discount
///   when all robots watch. The gate row lets a fraction of a robot on the
///   watched edge unlock the full discount.
/// - If every start is at least `d` edge visits away from some goal, some
///   robot spends `d` distinct steps on edges, so `sum psi >= d` over the
///   steps where that can happen. Its path also meets every distance layer:
///   for each `k` in `1..=d` it visits an edge whose distance from the starts
///   is exactly `k`, inside that edge's feasible time window. Without these
///   the relaxation ships a tenth of the team to the goal and pays a tenth
///   of the cost.
///
/// Further rows cut off only dominated points, so the optimum survives:
/// `phi <= p_e` and `psi <= sum p_e` (a flag without traffic only adds
/// cost), and with those `phi <= psi`.
pub fn implied_rows(model: &MipModel) -> Vec<Row> {
    let layout = &model.layout;
    let n_nodes = layout.n_locations - layout.n_edges;
    let n_agents = model
        .rows
        .iter()
        .find_map(|r| matches!(r.tag, RowTag::TeamSize { .. }).then_some(r.rhs))
        .unwrap_or(0.0);
    let mut ramp = vec![0.0; layout.n_opportunities];
    let mut surplus = vec![(0.0, 0.0); layout.n_opportunities];
    let mut out = Vec::new();
    for row in &model.rows {
        let node_coeff = |row: &Row| {
            row.coeffs
                .iter()
                .find(|(j, _)| !matches!(layout.var(*j).kind, VarKind::Comega { .. }))
                .map_or(0.0, |c| c.1)
        };
        match row.tag {
            RowTag::OverwatchRamp { opp, .. } => ramp[opp] = node_coeff(row),
            RowTag::OverwatchSurplus { opp, .. } => surplus[opp] = (node_coeff(row), row.rhs),
            RowTag::OverwatchGate { opp, t } => {
                let (gamma, rhs) = surplus[opp];
                let discount = (ramp[opp] * n_agents).min(gamma * n_agents - rhs);
                let edge_col = row
                    .coeffs
                    .iter()
                    .find(|(j, _)| matches!(layout.var(*j).kind, VarKind::P { .. }));
                let Some(&(p_edge, _)) = edge_col else { continue };
                let VarKind::P { loc } = layout.var(p_edge).kind else { unreachable!() };
                out.push(Row {
                    tag: RowTag::OverwatchCap { opp, t },
                    coeffs: vec![(layout.comega(opp, t), 1.0), (layout.phi(loc - n_nodes, t), discount)],
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
            }
            RowTag::EdgeUsed { edge, t } => {
                let (phi, p) = (layout.phi(edge, t), layout.p(n_nodes + edge, t));
                out.push(Row {
                    tag: RowTag::EdgeTraffic { edge, t },
                    coeffs: vec![(p, 1.0), (phi, -1.0)],
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
                out.push(Row {
                    tag: RowTag::StepUsed { edge, t },
                    coeffs: vec![(layout.psi(t), 1.0), (phi, -1.0)],
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
            }
            RowTag::Moving { t } => {
                let coeffs = row
                    .coeffs
                    .iter()
                    .map(|&(j, a)| if j == layout.psi(t) { (j, -1.0) } else { (j, -a.signum()) })
                    .collect();
                out.push(Row { tag: RowTag::StepTraffic { t }, coeffs, relation: Relation::Ge, rhs: 0.0 });
            }
            _ => {}
        }
    }
    out.extend(reach_rows(model));
    out
}

/// Edge visits after step 1 along the one-step successor relation read off
/// the step-2 flow rows; 0-1 BFS where entering an edge location costs one.
fn visit_distances(succ: &[Vec<usize>], sources: &[usize], n_nodes: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; succ.len()];
    let mut deque = std::collections::VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        deque.push_back(s);
    }
    while let Some(l) = deque.pop_front() {
        for &k in &succ[l] {
            let step = usize::from(k >= n_nodes);
            if dist[l] + step < dist[k] {
                dist[k] = dist[l] + step;
                if step == 0 {
                    deque.push_front(k);
                } else {
                    deque.push_back(k);
                }
            }
        }
    }
    dist
}

/// One-step successor relation between locations, read off the step-2 flow
/// rows, with the start and goal locations that need robots.
pub(crate) struct FlowGraph {
    pub n_nodes: usize,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
    pub starts: Vec<usize>,
    pub goals: Vec<usize>,
}

pub(crate) fn flow_graph(model: &MipModel) -> FlowGraph {
    let layout = &model.layout;
    let n_nodes = layout.n_locations - layout.n_edges;
    let loc_of = |j: usize| match layout.var(j).kind {
        VarKind::P { loc } => loc,
        _ => unreachable!("flow rows hold occupancy columns only"),
    };
    let mut g = FlowGraph {
        n_nodes,
        succ: vec![Vec::new(); layout.n_locations],
        pred: vec![Vec::new(); layout.n_locations],
        starts: Vec::new(),
        goals: Vec::new(),
    };
    for row in &model.rows {
        match row.tag {
            RowTag::Flow { t: 2, .. } => {
                let ins: Vec<usize> = row.coeffs.iter().filter(|c| c.1 > 0.0).map(|c| loc_of(c.0)).collect();
                let outs: Vec<usize> = row.coeffs.iter().filter(|c| c.1 < 0.0).map(|c| loc_of(c.0)).collect();
                for &i in &ins {
                    g.succ[i].extend(&outs);
                }
                for &o in &outs {
                    g.pred[o].extend(&ins);
                }
            }
            RowTag::Start { loc } if row.rhs > 0.0 => g.starts.push(loc),
            RowTag::Goal { loc } if row.rhs > 0.0 => g.goals.push(loc),
            _ => {}
        }
    }
    g
}

fn reach_rows(model: &MipModel) -> Vec<Row> {
    let layout = &model.layout;
    let n_t = layout.n_timesteps;
    if n_t < 2 {
        return Vec::new();
    }
    let FlowGraph { n_nodes, succ, pred, starts, goals } = flow_graph(model);
    let from_start = visit_distances(&succ, &starts, n_nodes);
    let Some((d, goal)) = goals
        .iter()
        .filter(|&&g| from_start[g] != usize::MAX)
        .map(|&g| (from_start[g], g))
        .max()
    else {
        return Vec::new();
    };
    if d == 0 {
        return Vec::new();
    }
    // reverse distances count the edge itself but not an edge goal
    let to_goal = visit_distances(&pred, &[goal], n_nodes);
    let after = |e: usize| -> usize {
        match (goal >= n_nodes, e == goal) {
            (true, true) => 0,
            (true, false) => to_goal[e],
            (false, _) => to_goal[e] - 1,
        }
    };
    // a node goal is reached by step n_T, so its last edge visit is earlier
    let last = if goal >= n_nodes { n_t } else { n_t - 1 };
    let mut rows = vec![Row {
        tag: RowTag::ReachSteps,
        coeffs: (2..=last).map(|t| (layout.psi(t), 1.0)).collect(),
        relation: Relation::Ge,
        rhs: d as f64,
    }];
    for k in 1..=d {
        let mut coeffs = Vec::new();
        for e in 0..layout.n_edges {
            let loc = n_nodes + e;
            if from_start[loc] != k || to_goal[loc] == usize::MAX {
                continue;
            }
            let after = after(loc) as u32;
            let first = k as u32 + 1;
            if last < after {
                continue;
            }
            for t in first..=(last - after) {
                coeffs.push((layout.phi(e, t), 1.0));
            }
        }
        rows.push(Row { tag: RowTag::ReachLayer { k }, coeffs, relation: Relation::Ge, rhs: 1.0 });
    }
    rows
}

/// Serde adapter for bounds that may be infinite.
mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Named(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Finite(*v).serialize(s)
        } else if *v > 0.0 {
            Repr::Named("inf".into()).serialize(s)
        } else {
            Repr::Named("-inf".into()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(v) => Ok(v),
            Repr::Named(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Named(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Named(s) => Err(serde::de::Error::custom(format!("bad bound {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EdgeId, EdgeParams, OverwatchOpportunity};

    fn triangle() -> Scenario {
        let mut s = Scenario::new(2, 3);
        let v = s.add_nodes(3);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            s.add_undirected(EdgeParams {
                from: v[a],
                to: v[b],
                w: 10.0,
                a: 1,
                m: 0.0,
                r: 1.0,
            });
        }
        s.add_overwatch(OverwatchOpportunity {
            watcher: v[2],
            watched: EdgeId(0),
            omega: 4.0,
            alpha: 1,
            gamma: 1.0,
        });
        s.add_start(LocationId::Node(v[0]), 2);
        s.add_goal(LocationId::Node(v[1]), 1);
        s
    }

    #[test]
    fn layout_is_a_bijection() {
        let model = build_model(&triangle()).unwrap();
        let layout = model.layout;
        for j in 0..model.n_columns() {
            assert_eq!(layout.index(layout.var(j)), j);
        }
        assert_eq!(layout.var(0), VarRef { kind: VarKind::P { loc: 0 }, t: 1 });
        assert_eq!(layout.var(layout.block_len()).t, 2);
    }

    #[test]
    fn column_counts_match_size_formula() {
        let s = triangle();
        let model = build_model(&s).unwrap();
        assert_eq!(model.column_counts(), expected_column_counts(9, 6, 1, 3));
        assert_eq!(model.n_columns(), 3 * (1 + 9 + 12 + 1));
    }

    #[test]
    fn objective_weights() {
        let s = triangle().with_time_weight(10.0);
        let model = build_model(&s).unwrap();
        let l = model.layout;
        assert_eq!(model.objective[l.psi(3)], 30.0);
        assert_eq!(model.objective[l.cw(5, 2)], 1.0);
        assert_eq!(model.objective[l.comega(0, 1)], 1.0);
        assert_eq!(model.objective[l.p(4, 1)], 0.0);
        assert_eq!(model.objective[l.phi(4, 1)], 0.0);
    }

    #[test]
    fn degenerate_single_node() {
        let mut s = Scenario::new(1, 1);
        let v = s.add_node(1);
        s.add_start(LocationId::Node(v), 1);
        s.add_goal(LocationId::Node(v), 1);
        let model = build_model(&s).unwrap();
        assert_eq!(model.n_columns(), 2);
        assert!(model.rows.iter().all(|r| !matches!(
            r.tag,
            RowTag::TraversalShortfall { .. } | RowTag::EdgeUsed { .. } | RowTag::Flow { .. }
        )));
    }

    #[test]
    fn stencils() {
        let s = triangle();
        let (inc, out) = flow_stencil(&s, NodeId(0)).unwrap();
        assert_eq!(inc.len(), 3);
        assert_eq!(out[0], LocationId::Node(NodeId(0)));
        assert_eq!(out[1..], [LocationId::Edge(EdgeId(0)), LocationId::Edge(EdgeId(2))]);

        let mut iso = Scenario::new(1, 1);
        let v = iso.add_node(1);
        assert_eq!(
            flow_stencil(&iso, v).unwrap(),
            (vec![LocationId::Node(v)], vec![LocationId::Node(v)])
        );
        assert!(flow_stencil(&iso, NodeId(3)).is_err());
    }

    #[test]
    fn directed_edge_in_one_stencil_each() {
        let mut s = Scenario::new(1, 1);
        let v = s.add_nodes(2);
        let e = s.add_plain_edge(v[0], v[1], 1.0, 0.0);
        let (in0, out0) = flow_stencil(&s, v[0]).unwrap();
        let (in1, out1) = flow_stencil(&s, v[1]).unwrap();
        assert!(out0.contains(&LocationId::Edge(e)) && !in0.contains(&LocationId::Edge(e)));
        assert!(in1.contains(&LocationId::Edge(e)) && !out1.contains(&LocationId::Edge(e)));
    }

    #[test]
    fn invalid_scenario_refused() {
        let mut s = triangle();
        s.edges[0].w = -1.0;
        assert!(matches!(build_model(&s), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn json_round_trip() {
        let model = build_model(&triangle()).unwrap();
        let back = MipModel::from_json(&model.to_json()).unwrap();
        assert_eq!(model, back);
    }
}
