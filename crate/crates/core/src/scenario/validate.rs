use std::collections::HashSet;
use std::fmt;

use super::{edge_cost_unchecked, overwatch_cost_unchecked, LocationId, Scenario};

/// One reason a scenario cannot be handed to the model builder.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAgents,
    NoTimesteps,
    BadTimeWeight(f64),
    DuplicateNodeKey(i64),
    UnknownNode { context: String, key: i64 },
    UnknownEdge { context: String, from: i64, to: i64 },
    DanglingEdgeEndpoint { edge: usize },
    SelfLoopEdge { edge: String },
    DuplicateEdge { edge: String },
    NonPositiveWeight { edge: String, w: f64 },
    TeamSizeOutOfRange { edge: String, a: u32, n_agents: u32 },
    NegativeCoefficient { edge: String, name: &'static str, value: f64 },
    ShortfallBelowTeaming { edge: String, m: f64, r: f64 },
    NonPositiveEffectiveWeight { edge: String, min_weight: f64 },
    DanglingOpportunity { index: usize },
    NonPositiveOmega { index: usize, omega: f64 },
    ZeroAlpha { index: usize },
    NegativeGamma { index: usize, gamma: f64 },
    OverwatchNotConvex { index: usize, ratio: f64, gamma: f64 },
    UnknownLocation { role: &'static str, loc: String },
    DuplicateLocation { role: &'static str, loc: String },
    ZeroCount { role: &'static str, loc: String },
    StartMass { total: u64, n_agents: u32 },
    GoalCountOutOfRange { loc: String, count: u32, n_agents: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoAgents => write!(f, "n_agents must be at least 1"),
            NoTimesteps => write!(f, "n_timesteps must be at least 1"),
            BadTimeWeight(v) => write!(f, "time_weight {v} must be finite and nonnegative"),
            DuplicateNodeKey(k) => write!(f, "node id {k} declared twice"),
            UnknownNode { context, key } => write!(f, "{context}: unknown node {key}"),
            UnknownEdge { context, from, to } => {
                write!(f, "{context}: no directed edge ({from},{to})")
            }
            DanglingEdgeEndpoint { edge } => write!(f, "edge #{edge} references a missing node"),
            SelfLoopEdge { edge } => write!(f, "edge {edge} is a self-loop (nodes carry one implicitly)"),
            DuplicateEdge { edge } => write!(f, "edge {edge} declared twice"),
            NonPositiveWeight { edge, w } => write!(f, "edge {edge}: w = {w} must be positive"),
            TeamSizeOutOfRange { edge, a, n_agents } => {
                write!(f, "edge {edge}: a = {a} outside [1, {n_agents}]")
            }
            NegativeCoefficient { edge, name, value } => {
                write!(f, "edge {edge}: {name} = {value} must be nonnegative")
            }
            ShortfallBelowTeaming { edge, m, r } => {
                write!(f, "edge {edge}: m = {m} < r = {r} makes the traversal cost non-convex")
            }
            NonPositiveEffectiveWeight { edge, min_weight } => write!(
                f,
                "edge {edge}: effective weight can drop to {min_weight} with full teaming and overwatch"
            ),
            DanglingOpportunity { index } => {
                write!(f, "overwatch #{index} references a missing node or edge")
            }
            NonPositiveOmega { index, omega } => {
                write!(f, "overwatch #{index}: omega = {omega} must be positive")
            }
            ZeroAlpha { index } => write!(f, "overwatch #{index}: alpha must be at least 1"),
            NegativeGamma { index, gamma } => {
                write!(f, "overwatch #{index}: gamma = {gamma} must be nonnegative")
            }
            OverwatchNotConvex { index, ratio, gamma } => write!(
                f,
                "overwatch #{index}: omega/alpha = {ratio} < gamma = {gamma} makes the reward non-convex"
            ),
            UnknownLocation { role, loc } => write!(f, "{role} location {loc} does not exist"),
            DuplicateLocation { role, loc } => write!(f, "{role} location {loc} listed twice"),
            ZeroCount { role, loc } => write!(f, "{role} location {loc} has count 0"),
            StartMass { total, n_agents } => {
                write!(f, "start counts sum to {total}, expected n_agents = {n_agents}")
            }
            GoalCountOutOfRange {
                loc,
                count,
                n_agents,
            } => write!(f, "goal {loc}: count {count} outside [1, {n_agents}]"),
        }
    }
}

/// Outcome of [`validate`]; empty means the scenario is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural and numerical precondition of the model builder.
///
/// Beyond well-formedness this enforces the envelope convexity conditions
/// (`m >= r` on vulnerable edges, `omega/alpha >= gamma`) and that no edge can
/// become free or profitable to sit on once teaming and every overwatch reward
/// aimed at it are applied.
pub fn validate(scn: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n_agents = scn.n_agents;
    if n_agents == 0 {
        report.push(Violation::NoAgents);
    }
    if scn.n_timesteps == 0 {
        report.push(Violation::NoTimesteps);
    }
    if !(scn.time_weight.is_finite() && scn.time_weight >= 0.0) {
        report.push(Violation::BadTimeWeight(scn.time_weight));
    }

    let mut keys = HashSet::new();
    for n in &scn.nodes {
        if !keys.insert(n.key) {
            report.push(Violation::DuplicateNodeKey(n.key));
        }
    }

    let n_nodes = scn.n_nodes();
    let mut edge_ok = vec![true; scn.n_edges()];
    let mut seen_pairs = HashSet::new();
    for (i, e) in scn.edges.iter().enumerate() {
        if e.from.0 >= n_nodes || e.to.0 >= n_nodes {
            report.push(Violation::DanglingEdgeEndpoint { edge: i });
            edge_ok[i] = false;
            continue;
        }
        let label = scn.edge_label(super::EdgeId(i));
        if e.from == e.to {
            report.push(Violation::SelfLoopEdge { edge: label.clone() });
        }
        if !seen_pairs.insert((e.from, e.to)) {
            report.push(Violation::DuplicateEdge { edge: label.clone() });
        }
        if !(e.w > 0.0 && e.w.is_finite()) {
            report.push(Violation::NonPositiveWeight { edge: label.clone(), w: e.w });
            edge_ok[i] = false;
        }
        if e.a == 0 || e.a > n_agents.max(1) {
            report.push(Violation::TeamSizeOutOfRange {
                edge: label.clone(),
                a: e.a,
                n_agents,
            });
            edge_ok[i] = false;
        }
        for (name, value) in [("m", e.m), ("r", e.r)] {
            if !(value >= 0.0 && value.is_finite()) {
                report.push(Violation::NegativeCoefficient {
                    edge: label.clone(),
                    name,
                    value,
                });
                edge_ok[i] = false;
            }
        }
        if e.a > 1 && e.m < e.r {
            report.push(Violation::ShortfallBelowTeaming {
                edge: label,
                m: e.m,
                r: e.r,
            });
        }
    }

    let mut best_reward = vec![0.0f64; scn.n_edges()];
    for (i, o) in scn.overwatch.iter().enumerate() {
        if o.watcher.0 >= n_nodes || o.watched.0 >= scn.n_edges() {
            report.push(Violation::DanglingOpportunity { index: i });
            continue;
        }
        let mut ok = true;
        if !(o.omega > 0.0 && o.omega.is_finite()) {
            report.push(Violation::NonPositiveOmega { index: i, omega: o.omega });
            ok = false;
        }
        if o.alpha == 0 {
            report.push(Violation::ZeroAlpha { index: i });
            ok = false;
        }
        if !(o.gamma >= 0.0 && o.gamma.is_finite()) {
            report.push(Violation::NegativeGamma { index: i, gamma: o.gamma });
            ok = false;
        }
        if ok && o.omega / f64::from(o.alpha) < o.gamma {
            report.push(Violation::OverwatchNotConvex {
                index: i,
                ratio: o.omega / f64::from(o.alpha),
                gamma: o.gamma,
            });
        }
        if ok {
            // the reward is non-increasing in watchers, so all robots watching is the extreme
            best_reward[o.watched.0] -= overwatch_cost_unchecked(o, n_agents, true);
        }
    }

    for (i, e) in scn.edges.iter().enumerate() {
        if !edge_ok[i] || n_agents == 0 {
            continue;
        }
        let cheapest = (1..=n_agents)
            .map(|p| edge_cost_unchecked(e, p))
            .fold(f64::INFINITY, f64::min);
        let min_weight = cheapest - best_reward[i];
        if min_weight <= 0.0 {
            report.push(Violation::NonPositiveEffectiveWeight {
                edge: scn.edge_label(super::EdgeId(i)),
                min_weight,
            });
        }
    }

    check_demands(scn, &mut report);
    report
}

fn loc_exists(scn: &Scenario, loc: LocationId) -> bool {
    match loc {
        LocationId::Node(v) => v.0 < scn.n_nodes(),
        LocationId::Edge(e) => e.0 < scn.n_edges(),
    }
}

fn describe(scn: &Scenario, loc: LocationId) -> String {
    let n_nodes = scn.n_nodes();
    match loc {
        LocationId::Node(v) if v.0 < n_nodes => scn.loc_label(loc),
        LocationId::Edge(e)
            if e.0 < scn.n_edges() && scn.edges[e.0].from.0 < n_nodes && scn.edges[e.0].to.0 < n_nodes =>
        {
            scn.loc_label(loc)
        }
        _ => loc.to_string(),
    }
}

fn check_demands(scn: &Scenario, report: &mut ValidationReport) {
    let mut total: u64 = 0;
    let mut seen = HashSet::new();
    for &(loc, count) in &scn.starts {
        let label = describe(scn, loc);
        if !loc_exists(scn, loc) {
            report.push(Violation::UnknownLocation { role: "start", loc: label });
            continue;
        }
        if !seen.insert(loc) {
            report.push(Violation::DuplicateLocation { role: "start", loc: label.clone() });
        }
        if count == 0 {
            report.push(Violation::ZeroCount { role: "start", loc: label });
        }
        total += u64::from(count);
    }
    if total != u64::from(scn.n_agents) {
        report.push(Violation::StartMass {
            total,
            n_agents: scn.n_agents,
        });
    }

    let mut seen = HashSet::new();
    for &(loc, count) in &scn.goals {
        let label = describe(scn, loc);
        if !loc_exists(scn, loc) {
            report.push(Violation::UnknownLocation { role: "goal", loc: label });
            continue;
        }
        if !seen.insert(loc) {
            report.push(Violation::DuplicateLocation { role: "goal", loc: label.clone() });
        }
        if count == 0 || count > scn.n_agents {
            report.push(Violation::GoalCountOutOfRange {
                loc: label,
                count,
                n_agents: scn.n_agents,
            });
        }
    }
}
