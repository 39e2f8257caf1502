#![allow(dead_code)]

use std::path::PathBuf;

use teamplan::model::{build_model, MipModel, Relation};
use teamplan::scenario::{
    load_scenario, EdgeParams, LocationId, OverwatchOpportunity, Scenario,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> Scenario {
    load_scenario(fixture(name)).unwrap()
}

/// Every valid fixture, by file name.
pub fn fixtures() -> Vec<(String, Scenario)> {
    let mut out: Vec<_> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), load_scenario(&p).unwrap()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Smallest value column `col` can take given every other column fixed at
/// `x`, from the rows and the column's own lower bound.
pub fn tightest_lower(model: &MipModel, col: usize, x: &[f64]) -> f64 {
    let mut best = model.columns[col].lower;
    for row in &model.rows {
        let Some(&(_, c)) = row.coeffs.iter().find(|&&(j, _)| j == col) else {
            continue;
        };
        let rest: f64 = row.coeffs.iter().filter(|&&(j, _)| j != col).map(|&(j, a)| a * x[j]).sum();
        let bound = (row.rhs - rest) / c;
        let lower = match row.relation {
            Relation::Eq => true,
            Relation::Ge => c > 0.0,
            Relation::Le => c < 0.0,
        };
        if lower {
            best = best.max(bound);
        }
    }
    best
}

/// One directed edge 1 -> 2 and a watcher node 3.
pub fn envelope_model(edge: &EdgeParams, opp: Option<OverwatchOpportunity>, n_agents: u32) -> (Scenario, MipModel) {
    let mut s = Scenario::new(n_agents, 1);
    let v = s.add_nodes(3);
    let e = s.add_edge(EdgeParams { from: v[0], to: v[1], ..edge.clone() });
    if let Some(o) = opp {
        s.add_overwatch(OverwatchOpportunity { watcher: v[2], watched: e, ..o });
    }
    s.add_start(LocationId::Node(v[0]), n_agents);
    let model = build_model(&s).unwrap();
    (s, model)
}

/// Traversal cost the model charges for `p` robots on edge 0 at step 1.
pub fn model_edge_cost(model: &MipModel, p: u32) -> f64 {
    let l = &model.layout;
    let mut x = vec![0.0; model.n_columns()];
    x[l.p(3, 1)] = f64::from(p);
    x[l.phi(0, 1)] = if p > 0 { 1.0 } else { 0.0 };
    tightest_lower(model, l.cw(0, 1), &x)
}

/// Overwatch term the model charges with `rho` watchers at node 3.
pub fn model_overwatch_cost(model: &MipModel, rho: u32, occupied: bool) -> f64 {
    let l = &model.layout;
    let mut x = vec![0.0; model.n_columns()];
    x[l.p(2, 1)] = f64::from(rho);
    if occupied {
        x[l.p(3, 1)] = 1.0;
        x[l.phi(0, 1)] = 1.0;
    }
    tightest_lower(model, l.comega(0, 1), &x)
}
