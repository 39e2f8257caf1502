//! JSON scenario files.
//!
//! Nodes are referred to by the integer `id` given in the file; locations are
//! either a node id or a `[from, to]` pair naming a directed edge. Undirected
//! edges expand to both directions, and an explicit directed entry for one of
//! those directions overrides its parameters.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate, EdgeId, EdgeParams, LocationId, Node, NodeId, OverwatchOpportunity, Scenario,
    ValidationReport, Violation,
};

fn default_time_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_agents: u32,
    pub n_timesteps: u32,
    #[serde(default = "default_time_weight")]
    pub time_weight: f64,
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub overwatch: Vec<OverwatchEntry>,
    pub starts: Vec<CountEntry>,
    pub goals: Vec<CountEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: i64,
    pub to: i64,
    pub w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undirected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverwatchEntry {
    pub watcher: i64,
    pub watched_from: i64,
    pub watched_to: i64,
    pub omega: f64,
    pub alpha: u32,
    pub gamma: f64,
}

/// A node id or a `[from, to]` directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LocRef {
    Node(i64),
    Edge([i64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountEntry {
    pub loc: LocRef,
    pub count: u32,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario:\n{0}")]
    Invalid(ValidationReport),
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    /// Resolves node ids and edge references into a [`Scenario`].
    ///
    /// Only reference errors are reported here; numerical checks are left to
    /// [`validate`].
    pub fn resolve(&self) -> Result<Scenario, ValidationReport> {
        let mut report = ValidationReport::default();
        let mut scn = Scenario::new(self.n_agents, self.n_timesteps).with_time_weight(self.time_weight);
        let mut by_key = HashMap::new();
        for n in &self.nodes {
            if by_key.insert(n.id, NodeId(scn.nodes.len())).is_some() {
                report.push(Violation::DuplicateNodeKey(n.id));
                continue;
            }
            scn.nodes.push(Node {
                key: n.id,
                label: n.label.clone(),
            });
        }
        let node = |key: i64, context: &str, report: &mut ValidationReport| {
            let id = by_key.get(&key).copied();
            if id.is_none() {
                report.push(Violation::UnknownNode {
                    context: context.to_string(),
                    key,
                });
            }
            id
        };

        // undirected expansions first so explicit directed entries can override them
        let mut edge_at: HashMap<(NodeId, NodeId), EdgeId> = HashMap::new();
        let mut explicit: HashMap<(NodeId, NodeId), bool> = HashMap::new();
        let ordered = self
            .edges
            .iter()
            .filter(|e| e.undirected.unwrap_or(false))
            .chain(self.edges.iter().filter(|e| !e.undirected.unwrap_or(false)));
        for entry in ordered {
            let context = format!("edge ({},{})", entry.from, entry.to);
            let (Some(from), Some(to)) = (
                node(entry.from, &context, &mut report),
                node(entry.to, &context, &mut report),
            ) else {
                continue;
            };
            let params = EdgeParams {
                from,
                to,
                w: entry.w,
                a: entry.a.unwrap_or(1),
                m: entry.m.unwrap_or(0.0),
                r: entry.r.unwrap_or(0.0),
            };
            let undirected = entry.undirected.unwrap_or(false);
            let mut directions = vec![params.clone()];
            if undirected {
                directions.push(EdgeParams {
                    from: to,
                    to: from,
                    ..params
                });
            }
            for dir in directions {
                let pair = (dir.from, dir.to);
                match edge_at.get(&pair) {
                    Some(&id) => {
                        let prior_explicit = explicit.get(&pair).copied().unwrap_or(false);
                        if prior_explicit || undirected {
                            report.push(Violation::DuplicateEdge {
                                edge: format!("({},{})", scn.node_key(dir.from), scn.node_key(dir.to)),
                            });
                        } else {
                            scn.edges[id.0] = dir;
                            explicit.insert(pair, true);
                        }
                    }
                    None => {
                        let id = scn.add_edge(dir);
                        edge_at.insert(pair, id);
                        explicit.insert(pair, !undirected);
                    }
                }
            }
        }

        for (i, o) in self.overwatch.iter().enumerate() {
            let context = format!("overwatch #{i}");
            let watcher = node(o.watcher, &context, &mut report);
            let from = node(o.watched_from, &context, &mut report);
            let to = node(o.watched_to, &context, &mut report);
            let (Some(watcher), Some(from), Some(to)) = (watcher, from, to) else {
                continue;
            };
            let Some(&watched) = edge_at.get(&(from, to)) else {
                report.push(Violation::UnknownEdge {
                    context,
                    from: o.watched_from,
                    to: o.watched_to,
                });
                continue;
            };
            scn.add_overwatch(OverwatchOpportunity {
                watcher,
                watched,
                omega: o.omega,
                alpha: o.alpha,
                gamma: o.gamma,
            });
        }

        let resolve_loc = |loc: LocRef, context: String, report: &mut ValidationReport| match loc {
            LocRef::Node(k) => node(k, &context, report).map(LocationId::Node),
            LocRef::Edge([f, t]) => {
                let (Some(from), Some(to)) = (node(f, &context, report), node(t, &context, report)) else {
                    return None;
                };
                match edge_at.get(&(from, to)) {
                    Some(&e) => Some(LocationId::Edge(e)),
                    None => {
                        report.push(Violation::UnknownEdge { context, from: f, to: t });
                        None
                    }
                }
            }
        };
        for s in &self.starts {
            if let Some(loc) = resolve_loc(s.loc, "start".into(), &mut report) {
                scn.add_start(loc, s.count);
            }
        }
        for g in &self.goals {
            if let Some(loc) = resolve_loc(g.loc, "goal".into(), &mut report) {
                scn.add_goal(loc, g.count);
            }
        }

        if report.is_ok() {
            Ok(scn)
        } else {
            Err(report)
        }
    }

    /// Writes `scn` with every directed edge as its own entry.
    pub fn from_scenario(scn: &Scenario) -> Self {
        let loc_ref = |loc: LocationId| match loc {
            LocationId::Node(v) => LocRef::Node(scn.node_key(v)),
            LocationId::Edge(e) => {
                let edge = scn.edge(e);
                LocRef::Edge([scn.node_key(edge.from), scn.node_key(edge.to)])
            }
        };
        ScenarioFile {
            n_agents: scn.n_agents,
            n_timesteps: scn.n_timesteps,
            time_weight: scn.time_weight,
            nodes: scn
                .nodes
                .iter()
                .map(|n| NodeEntry {
                    id: n.key,
                    label: n.label.clone(),
                })
                .collect(),
            edges: scn
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    from: scn.node_key(e.from),
                    to: scn.node_key(e.to),
                    w: e.w,
                    a: Some(e.a),
                    m: Some(e.m),
                    r: Some(e.r),
                    undirected: None,
                })
                .collect(),
            overwatch: scn
                .overwatch
                .iter()
                .map(|o| {
                    let e = scn.edge(o.watched);
                    OverwatchEntry {
                        watcher: scn.node_key(o.watcher),
                        watched_from: scn.node_key(e.from),
                        watched_to: scn.node_key(e.to),
                        omega: o.omega,
                        alpha: o.alpha,
                        gamma: o.gamma,
                    }
                })
                .collect(),
            starts: scn
                .starts
                .iter()
                .map(|&(loc, count)| CountEntry {
                    loc: loc_ref(loc),
                    count,
                })
                .collect(),
            goals: scn
                .goals
                .iter()
                .map(|&(loc, count)| CountEntry {
                    loc: loc_ref(loc),
                    count,
                })
                .collect(),
        }
    }
}

/// Reads, resolves and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = ScenarioFile::from_json(&text)?;
    let scn = file.resolve().map_err(ScenarioError::Invalid)?;
    let report = validate(&scn);
    if report.is_ok() {
        Ok(scn)
    } else {
        Err(ScenarioError::Invalid(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "n_agents": 2, "n_timesteps": 4,
        "nodes": [{"id": 1}, {"id": 2, "label": "ridge"}, {"id": 3}],
        "edges": [
            {"from": 1, "to": 2, "w": 10, "r": 1, "undirected": true},
            {"from": 2, "to": 1, "w": 12, "r": 1},
            {"from": 2, "to": 3, "w": 40, "a": 2, "m": 5, "r": 1}
        ],
        "overwatch": [{"watcher": 1, "watched_from": 2, "watched_to": 3, "omega": 10, "alpha": 1, "gamma": 1}],
        "starts": [{"loc": 1, "count": 2}],
        "goals": [{"loc": 3, "count": 1}, {"loc": [1, 2], "count": 1}]
    }"#;

    #[test]
    fn resolves_ids_and_overrides() {
        let scn = ScenarioFile::from_json(SMALL).unwrap().resolve().unwrap();
        assert_eq!(scn.n_edges(), 3);
        assert_eq!(scn.time_weight, 1.0);
        let back = scn.find_edge(NodeId(1), NodeId(0)).unwrap();
        assert_eq!(scn.edge(back).w, 12.0);
        assert_eq!(scn.edge(EdgeId(0)).w, 10.0);
        assert_eq!(scn.nodes[1].label.as_deref(), Some("ridge"));
        assert_eq!(scn.overwatch[0].watched, EdgeId(2));
        assert_eq!(scn.goals[1], (LocationId::Edge(EdgeId(0)), 1));
        assert!(validate(&scn).is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = SMALL.replace("\"n_timesteps\"", "\"horizon\": 3, \"n_timesteps\"");
        assert!(matches!(ScenarioFile::from_json(&text), Err(ScenarioError::Parse(_))));
        let text = SMALL.replace("\"w\": 40", "\"w\": 40, \"cost\": 1");
        assert!(ScenarioFile::from_json(&text).is_err());
    }

    #[test]
    fn dangling_ids_reported() {
        let text = SMALL.replace("\"watcher\": 1", "\"watcher\": 9");
        let err = ScenarioFile::from_json(&text).unwrap().resolve().unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::UnknownNode {
                context: "overwatch #0".into(),
                key: 9
            }]
        );
        let text = SMALL.replace("[1, 2]", "[1, 3]");
        let err = ScenarioFile::from_json(&text).unwrap().resolve().unwrap_err();
        assert!(matches!(err.violations[0], Violation::UnknownEdge { .. }));
    }

    #[test]
    fn duplicate_directed_entries_rejected() {
        let text = SMALL.replace(
            "{\"from\": 2, \"to\": 1, \"w\": 12, \"r\": 1}",
            "{\"from\": 2, \"to\": 3, \"w\": 12}",
        );
        let err = ScenarioFile::from_json(&text).unwrap().resolve().unwrap_err();
        assert!(matches!(err.violations[0], Violation::DuplicateEdge { .. }));
    }

    #[test]
    fn round_trip_through_file_form() {
        let scn = ScenarioFile::from_json(SMALL).unwrap().resolve().unwrap();
        let text = ScenarioFile::from_scenario(&scn).to_json_pretty();
        let again = ScenarioFile::from_json(&text).unwrap().resolve().unwrap();
        assert_eq!(scn, again);
    }
}
