//! Reading an occupancy plan back out of a MILP solution.

use serde::{Deserialize, Serialize};

use super::{MilpSolution, MilpStatus, INT_TOL};
use crate::model::MipModel;
use crate::scenario::{edge_cost_unchecked, overwatch_cost_unchecked};
use crate::scenario::{LocationId, Scenario};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepCost {
    pub traversal: f64,
    pub overwatch: f64,
    pub time: f64,
}

impl StepCost {
    pub fn total(&self) -> f64 {
        self.traversal + self.overwatch + self.time
    }
}

/// Robot counts per location per time step, with the cost of each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyPlan {
    /// `occupancy[t - 1][loc]` for dense location index `loc`.
    pub occupancy: Vec<Vec<u32>>,
    pub breakdown: Vec<StepCost>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("solution has no incumbent")]
    NoIncumbent,
    #[error("occupancy column {column} = {value} is not integral")]
    Residual { column: usize, value: f64 },
    #[error("plan cost {plan} disagrees with solver objective {objective}")]
    BreakdownMismatch { plan: f64, objective: f64 },
    #[error("occupancy grid does not match the scenario shape")]
    Shape,
}

/// Cost of one step given the occupancy at that step.
pub fn step_breakdown(scn: &Scenario, counts: &[u32], t: u32) -> StepCost {
    let n_nodes = scn.n_nodes();
    let mut c = StepCost::default();
    let mut moving = false;
    for (e, edge) in scn.edges.iter().enumerate() {
        let p = counts[n_nodes + e];
        moving |= p > 0;
        c.traversal += edge_cost_unchecked(edge, p);
    }
    for o in &scn.overwatch {
        let watchers = counts[o.watcher.0];
        let occupied = counts[n_nodes + o.watched.0] > 0;
        c.overwatch += overwatch_cost_unchecked(o, watchers, occupied);
    }
    if moving {
        c.time = scn.time_weight * f64::from(t);
    }
    c
}

impl OccupancyPlan {
    /// Builds a plan from raw counts, evaluating every step's cost.
    pub fn from_counts(scn: &Scenario, occupancy: Vec<Vec<u32>>) -> Result<Self, PlanError> {
        if occupancy.len() != scn.n_timesteps as usize || occupancy.iter().any(|r| r.len() != scn.n_locations()) {
            return Err(PlanError::Shape);
        }
        let breakdown = occupancy
            .iter()
            .enumerate()
            .map(|(i, counts)| step_breakdown(scn, counts, i as u32 + 1))
            .collect();
        Ok(OccupancyPlan { occupancy, breakdown })
    }

    pub fn n_timesteps(&self) -> usize {
        self.occupancy.len()
    }

    /// Robots at `loc` during step `t` (1-based).
    pub fn count(&self, scn: &Scenario, loc: LocationId, t: u32) -> u32 {
        self.occupancy[t as usize - 1][scn.loc_index(loc)]
    }

    pub fn total_cost(&self) -> f64 {
        self.breakdown.iter().map(StepCost::total).sum()
    }

    /// Running total after each step.
    pub fn cumulative_costs(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.breakdown
            .iter()
            .map(|c| {
                acc += c.total();
                acc
            })
            .collect()
    }

    pub fn goals_met(&self, scn: &Scenario) -> bool {
        let last = scn.n_timesteps;
        scn.goals.iter().all(|&(loc, n)| self.count(scn, loc, last) >= n)
    }
}

pub fn extract_plan(sol: &MilpSolution, model: &MipModel, scn: &Scenario) -> Result<OccupancyPlan, PlanError> {
    let x = sol.incumbent.as_ref().ok_or(PlanError::NoIncumbent)?;
    let layout = &model.layout;
    if layout.n_locations != scn.n_locations() || layout.n_timesteps != scn.n_timesteps {
        return Err(PlanError::Shape);
    }
    let mut occupancy = Vec::with_capacity(layout.n_timesteps as usize);
    for t in 1..=layout.n_timesteps {
        let mut row = Vec::with_capacity(layout.n_locations);
        for loc in 0..layout.n_locations {
            let column = layout.p(loc, t);
            let value = x[column];
            if (value - value.round()).abs() > INT_TOL || value < -INT_TOL {
                return Err(PlanError::Residual { column, value });
            }
            row.push(value.round() as u32);
        }
        occupancy.push(row);
    }
    let plan = OccupancyPlan::from_counts(scn, occupancy)?;
    let total = plan.total_cost();
    let tol = 1e-6 * sol.objective.abs().max(1.0);
    let consistent = if sol.status == MilpStatus::Optimal {
        (total - sol.objective).abs() <= tol
    } else {
        total <= sol.objective + tol
    };
    if !consistent {
        return Err(PlanError::BreakdownMismatch {
            plan: total,
            objective: sol.objective,
        });
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{solve_milp, SolveParams};
    use crate::model::build_model;

    #[test]
    fn parked_team_costs_nothing() {
        let mut s = Scenario::new(4, 1);
        let v = s.add_nodes(1);
        s.add_start(LocationId::Node(v[0]), 4);
        s.add_goal(LocationId::Node(v[0]), 4);
        let model = build_model(&s).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        let plan = extract_plan(&sol, &model, &s).unwrap();
        assert_eq!(plan.occupancy, vec![vec![4]]);
        assert_eq!(plan.total_cost(), 0.0);
        assert!(plan.goals_met(&s));
    }

    #[test]
    fn missing_incumbent_is_an_error() {
        let mut s = Scenario::new(1, 1);
        let v = s.add_nodes(2);
        s.add_start(LocationId::Node(v[0]), 1);
        s.add_goal(LocationId::Node(v[1]), 1);
        let model = build_model(&s).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!(extract_plan(&sol, &model, &s), Err(PlanError::NoIncumbent));
    }
}
