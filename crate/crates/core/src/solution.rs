//! Solution files written by both solvers.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::assign::{assign_paths, AssignError, RobotItinerary};
use crate::bnb::{extract_plan, MilpSolution, MilpStatus, OccupancyPlan, PlanError, StepCost};
use crate::model::{ColumnCounts, MipModel};
use crate::oracle::OracleSolution;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Milp,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub columns: ColumnCounts,
    pub rows: usize,
    pub nodes: u64,
    pub lp_iterations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_lp_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states_evaluated: Option<u64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub solver: Solver,
    pub status: MilpStatus,
    /// Cost of the reported plan; absent without one.
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    /// Label of every dense location index.
    pub locations: Vec<String>,
    /// `occupancy[t - 1][loc]`.
    pub occupancy: Vec<Vec<u32>>,
    pub breakdown: Vec<StepCost>,
    pub cumulative_cost: Vec<f64>,
    /// Dense location index of each robot at every step.
    pub robots: Vec<Vec<usize>>,
    pub stats: SolveStats,
}

#[derive(Debug, thiserror::Error)]
pub enum SolutionError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed solution: {0}")]
    Parse(#[from] serde_json::Error),
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl SolutionFile {
    fn empty(scn: &Scenario, model: &MipModel, solver: Solver, status: MilpStatus) -> Self {
        SolutionFile {
            solver,
            status,
            objective: None,
            bound: None,
            gap: None,
            locations: scn.locations().map(|l| scn.loc_label(l)).collect(),
            occupancy: Vec::new(),
            breakdown: Vec::new(),
            cumulative_cost: Vec::new(),
            robots: Vec::new(),
            stats: SolveStats {
                columns: model.column_counts(),
                rows: model.n_rows(),
                nodes: 0,
                lp_iterations: 0,
                root_lp_objective: None,
                states_evaluated: None,
                wall_time_s: 0.0,
            },
        }
    }

    fn set_plan(&mut self, scn: &Scenario, plan: OccupancyPlan) -> Result<(), SolutionError> {
        let robots = assign_paths(&plan, scn)?;
        self.robots = robots
            .iter()
            .map(|r| r.locations.iter().map(|&l| scn.loc_index(l)).collect())
            .collect();
        self.objective = Some(plan.total_cost());
        self.cumulative_cost = plan.cumulative_costs();
        self.occupancy = plan.occupancy;
        self.breakdown = plan.breakdown;
        Ok(())
    }

    pub fn from_milp(scn: &Scenario, model: &MipModel, sol: &MilpSolution) -> Result<Self, SolutionError> {
        let mut out = SolutionFile::empty(scn, model, Solver::Milp, sol.status);
        if sol.incumbent.is_some() {
            out.set_plan(scn, extract_plan(sol, model, scn)?)?;
            out.gap = finite(sol.gap);
        }
        out.bound = finite(sol.bound);
        out.stats.nodes = sol.nodes;
        out.stats.lp_iterations = sol.lp_iterations;
        out.stats.root_lp_objective = finite(sol.root_lp_objective);
        out.stats.wall_time_s = sol.wall_time.as_secs_f64();
        Ok(out)
    }

    pub fn from_oracle(
        scn: &Scenario,
        model: &MipModel,
        sol: &OracleSolution,
        wall_time: Duration,
    ) -> Result<Self, SolutionError> {
        let mut out = SolutionFile::empty(scn, model, Solver::Oracle, MilpStatus::Optimal);
        out.set_plan(scn, sol.plan.clone())?;
        out.bound = out.objective;
        out.gap = Some(0.0);
        out.stats.states_evaluated = Some(sol.states_evaluated);
        out.stats.wall_time_s = wall_time.as_secs_f64();
        Ok(out)
    }

    pub fn infeasible(scn: &Scenario, model: &MipModel, solver: Solver, wall_time: Duration) -> Self {
        let mut out = SolutionFile::empty(scn, model, solver, MilpStatus::Infeasible);
        out.stats.wall_time_s = wall_time.as_secs_f64();
        out
    }

    /// The occupancy plan, re-costed against `scn`.
    pub fn plan(&self, scn: &Scenario) -> Result<Option<OccupancyPlan>, SolutionError> {
        if self.occupancy.is_empty() {
            return Ok(None);
        }
        Ok(Some(OccupancyPlan::from_counts(scn, self.occupancy.clone())?))
    }

    pub fn itineraries(&self, scn: &Scenario) -> Vec<RobotItinerary> {
        self.robots
            .iter()
            .enumerate()
            .map(|(r, locs)| RobotItinerary {
                robot: r as u32,
                locations: locs.iter().map(|&l| scn.location(l)).collect(),
            })
            .collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SolutionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SolutionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{solve_milp, SolveParams};
    use crate::model::build_model;
    use crate::oracle::oracle_solve;
    use crate::scenario::{EdgeParams, LocationId};

    fn small() -> Scenario {
        let mut s = Scenario::new(2, 4).with_time_weight(1.0);
        let v = s.add_nodes(3);
        s.add_undirected(EdgeParams { from: v[0], to: v[1], w: 6.0, a: 2, m: 3.0, r: 1.0 });
        s.add_undirected(EdgeParams { from: v[1], to: v[2], w: 4.0, a: 1, m: 0.0, r: 1.0 });
        s.add_start(LocationId::Node(v[0]), 2);
        s.add_goal(LocationId::Node(v[2]), 1);
        s
    }

    #[test]
    fn milp_and_oracle_files_agree() {
        let scn = small();
        let model = build_model(&scn).unwrap();
        let milp = SolutionFile::from_milp(&scn, &model, &solve_milp(&model, &SolveParams::default()).unwrap()).unwrap();
        let oracle = SolutionFile::from_oracle(&scn, &model, &oracle_solve(&scn).unwrap(), Duration::ZERO).unwrap();
        assert_eq!(milp.objective, oracle.objective);
        assert_eq!(milp.stats.columns.total, model.n_columns());
        assert_eq!(milp.robots.len(), 2);
        assert_eq!(milp.locations[3], "(1,2)");
    }

    #[test]
    fn json_round_trip() {
        let scn = small();
        let model = build_model(&scn).unwrap();
        let file = SolutionFile::from_oracle(&scn, &model, &oracle_solve(&scn).unwrap(), Duration::ZERO).unwrap();
        let back = SolutionFile::from_json(&file.to_json_pretty()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.plan(&scn).unwrap().unwrap().total_cost(), file.objective.unwrap());
    }
}
