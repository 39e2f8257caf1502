//! Graphviz DOT rendering of scenarios and plans.
//!
//! Graph nodes are named `v<key>`. Each overwatch opportunity is drawn as a
//! dashed arrow from its watcher to an auxiliary point `x<index>` labelled
//! with the watched edge, since DOT cannot aim an arrow at an edge.

use std::fmt::Write;

use crate::bnb::OccupancyPlan;
use crate::scenario::{edge_cost_unchecked, overwatch_cost_unchecked};
use crate::scenario::{EdgeId, NodeId, Scenario};

fn fmt_cost(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

fn node_name(scn: &Scenario, v: NodeId) -> String {
    format!("v{}", scn.node_key(v))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(out: &mut String) {
    out.push_str("digraph scenario {\n");
    out.push_str("  node [shape=circle];\n");
}

fn overwatch_arrows(scn: &Scenario, out: &mut String, active: impl Fn(usize) -> bool) {
    for (i, o) in scn.overwatch.iter().enumerate() {
        let label = format!("{} w={} a={}", scn.edge_label(o.watched), fmt_cost(o.omega), o.alpha);
        writeln!(out, "  x{i} [shape=point, xlabel={}];", quote(&label)).unwrap();
        let pen = if active(i) { ", penwidth=2.5" } else { "" };
        writeln!(
            out,
            "  {} -> x{i} [style=dashed, color=hotpink, arrowhead=vee{pen}];",
            node_name(scn, o.watcher)
        )
        .unwrap();
    }
}

/// Static picture: base weights, desired team sizes, overwatch arrows.
pub fn scenario_dot(scn: &Scenario) -> String {
    let mut out = String::new();
    header(&mut out);
    for (i, n) in scn.nodes.iter().enumerate() {
        let label = match &n.label {
            Some(l) => format!("{}\n{}", n.key, l),
            None => n.key.to_string(),
        };
        writeln!(out, "  {} [label={}];", node_name(scn, NodeId(i)), quote(&label)).unwrap();
    }
    for e in &scn.edges {
        let mut label = fmt_cost(e.w);
        if e.a > 1 {
            write!(label, " [{}]", e.a).unwrap();
        }
        writeln!(
            out,
            "  {} -> {} [label={}];",
            node_name(scn, e.from),
            node_name(scn, e.to),
            quote(&label)
        )
        .unwrap();
    }
    overwatch_arrows(scn, &mut out, |_| false);
    out.push_str("}\n");
    out
}

/// Cost a robot on `e` would see given the counts of step `counts`:
/// the traversal cost at the current load (or alone, if the edge is empty)
/// plus the overwatch rewards of the current watchers.
fn dynamic_cost(scn: &Scenario, counts: &[u32], e: EdgeId) -> f64 {
    let n_nodes = scn.n_nodes();
    let p = counts[n_nodes + e.0].max(1);
    let mut c = edge_cost_unchecked(&scn.edges[e.0], p);
    for o in scn.overwatch.iter().filter(|o| o.watched == e) {
        c += overwatch_cost_unchecked(o, counts[o.watcher.0], true);
    }
    c
}

/// One step of a plan: occupancy on every node and edge, edge labels at
/// the costs in force during that step.
pub fn step_dot(scn: &Scenario, plan: &OccupancyPlan, t: u32) -> String {
    let counts = &plan.occupancy[t as usize - 1];
    let n_nodes = scn.n_nodes();
    let mut out = String::new();
    header(&mut out);
    for (i, n) in scn.nodes.iter().enumerate() {
        let c = counts[i];
        let style = if c > 0 { ", style=filled, fillcolor=lightblue" } else { "" };
        let label = format!("{}\n({c})", n.key);
        writeln!(out, "  {} [label={}{style}];", node_name(scn, NodeId(i)), quote(&label)).unwrap();
    }
    for (e, edge) in scn.edges.iter().enumerate() {
        let p = counts[n_nodes + e];
        let mut label = fmt_cost(dynamic_cost(scn, counts, EdgeId(e)));
        let mut style = String::new();
        if p > 0 {
            write!(label, " ({p})").unwrap();
            style.push_str(", penwidth=3, color=darkorange");
        }
        writeln!(
            out,
            "  {} -> {} [label={}{style}];",
            node_name(scn, edge.from),
            node_name(scn, edge.to),
            quote(&label)
        )
        .unwrap();
    }
    overwatch_arrows(scn, &mut out, |i| {
        let o = &scn.overwatch[i];
        counts[o.watcher.0] > 0 && counts[n_nodes + o.watched.0] > 0
    });
    out.push_str("}\n");
    out
}

/// Every step of a plan, in order.
pub fn plan_dots(scn: &Scenario, plan: &OccupancyPlan) -> Vec<String> {
    (1..=plan.n_timesteps() as u32).map(|t| step_dot(scn, plan, t)).collect()
}

/// Where each robot is at each step, one line per robot.
pub fn itinerary_table(scn: &Scenario, robots: &[crate::assign::RobotItinerary]) -> String {
    let mut out = String::new();
    for r in robots {
        let locs: Vec<String> = r.locations.iter().map(|&l| scn.loc_label(l)).collect();
        writeln!(out, "robot {}: {}", r.robot, locs.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EdgeParams, LocationId, OverwatchOpportunity};

    fn watched_pair() -> Scenario {
        let mut s = Scenario::new(3, 2);
        let v = s.add_nodes(3);
        let (e, _) = s.add_undirected(EdgeParams { from: v[0], to: v[1], w: 50.0, a: 2, m: 5.0, r: 1.0 });
        s.add_overwatch(OverwatchOpportunity { watcher: v[2], watched: e, omega: 20.0, alpha: 2, gamma: 2.0 });
        s.add_start(LocationId::Node(v[0]), 3);
        s
    }

    #[test]
    fn static_export_lists_everything_once() {
        let dot = scenario_dot(&watched_pair());
        assert_eq!(dot.lines().filter(|l| l.starts_with("  v") && !l.contains("->")).count(), 3);
        assert_eq!(dot.lines().filter(|l| l.contains("-> v")).count(), 2);
        assert_eq!(dot.lines().filter(|l| l.contains("-> x")).count(), 1);
        assert!(dot.contains("label=\"50 [2]\""));
    }

    #[test]
    fn step_labels_use_current_costs() {
        let s = watched_pair();
        // 2 robots on 1 -> 2, one watcher at node 3
        let plan = OccupancyPlan::from_counts(&s, vec![vec![3, 0, 0, 0, 0], vec![0, 0, 1, 2, 0]]).unwrap();
        let dot = step_dot(&s, &plan, 2);
        // 50 at full team, minus 20 / 2 for one watcher
        assert!(dot.contains("label=\"40 (2)\""), "{dot}");
        // reverse edge, empty: one robot alone pays 50 + 5
        assert!(dot.contains("label=\"55\""), "{dot}");
    }
}
