//! Direct evaluation of the piecewise-linear traversal and overwatch costs.
//!
//! These are the exact integer-occupancy cost functions. The MILP encodes the
//! same functions through their convex envelopes; the oracle and the plan
//! extraction evaluate them here, never through the linearization.

use thiserror::Error;

use super::{EdgeParams, OverwatchOpportunity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("occupancy {count} outside [0, {n_agents}]")]
    OccupancyOutOfRange { count: u32, n_agents: u32 },
}

fn check_range(count: u32, n_agents: u32) -> Result<(), CostError> {
    if count > n_agents {
        Err(CostError::OccupancyOutOfRange { count, n_agents })
    } else {
        Ok(())
    }
}

/// Cost of `robots` robots traversing `edge` during one time step.
///
/// Zero for an empty edge; below the desired team size `a` every missing
/// robot adds the shortfall penalty `m`, above it every extra robot removes
/// the teaming reward `r`. Both branches give `w` at `robots == a`.
pub fn edge_cost(edge: &EdgeParams, robots: u32, n_agents: u32) -> Result<f64, CostError> {
    check_range(robots, n_agents)?;
    Ok(edge_cost_unchecked(edge, robots))
}

pub(crate) fn edge_cost_unchecked(edge: &EdgeParams, robots: u32) -> f64 {
    if robots == 0 {
        return 0.0;
    }
    let a = f64::from(edge.a);
    let p = f64::from(robots);
    if robots <= edge.a {
        edge.w + edge.m * (a - p)
    } else {
        edge.w - edge.r * (p - a)
    }
}

/// "Cost" (a reward, never positive) of overwatch opportunity `opp` when
/// `watchers` robots sit at its watcher node.
///
/// The reward only applies while the watched edge carries traffic.
pub fn overwatch_cost(
    opp: &OverwatchOpportunity,
    watchers: u32,
    edge_occupied: bool,
    n_agents: u32,
) -> Result<f64, CostError> {
    check_range(watchers, n_agents)?;
    Ok(overwatch_cost_unchecked(opp, watchers, edge_occupied))
}

pub(crate) fn overwatch_cost_unchecked(
    opp: &OverwatchOpportunity,
    watchers: u32,
    edge_occupied: bool,
) -> f64 {
    if !edge_occupied || watchers == 0 {
        return 0.0;
    }
    let alpha = f64::from(opp.alpha);
    let rho = f64::from(watchers);
    if watchers <= opp.alpha {
        -(opp.omega / alpha) * rho
    } else {
        -opp.omega - opp.gamma * (rho - alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EdgeId, NodeId};

    fn edge(w: f64, a: u32, m: f64, r: f64) -> EdgeParams {
        EdgeParams {
            from: NodeId(0),
            to: NodeId(1),
            w,
            a,
            m,
            r,
        }
    }

    fn opp(omega: f64, alpha: u32, gamma: f64) -> OverwatchOpportunity {
        OverwatchOpportunity {
            watcher: NodeId(0),
            watched: EdgeId(0),
            omega,
            alpha,
            gamma,
        }
    }

    #[test]
    fn empty_edge_is_free() {
        assert_eq!(edge_cost(&edge(50.0, 4, 10.0, 1.0), 0, 10).unwrap(), 0.0);
    }

    #[test]
    fn full_team_on_plain_edge() {
        // every robot past the first takes 1 off a base of 10
        assert_eq!(edge_cost(&edge(10.0, 1, 10.0, 1.0), 10, 10).unwrap(), 1.0);
    }

    #[test]
    fn vulnerable_edge_branches() {
        let e = edge(50.0, 4, 10.0, 1.0);
        assert_eq!(edge_cost(&e, 1, 10).unwrap(), 80.0);
        assert_eq!(edge_cost(&e, 4, 10).unwrap(), 50.0);
        assert_eq!(edge_cost(&e, 6, 10).unwrap(), 48.0);
    }

    #[test]
    fn occupancy_out_of_range() {
        assert!(edge_cost(&edge(1.0, 1, 0.0, 0.0), 11, 10).is_err());
        assert!(overwatch_cost(&opp(1.0, 1, 0.0), 4, true, 3).is_err());
    }

    #[test]
    fn overwatch_values() {
        let o = opp(60.0, 2, 2.0);
        assert_eq!(overwatch_cost(&o, 0, true, 10).unwrap(), 0.0);
        assert_eq!(overwatch_cost(&o, 2, true, 10).unwrap(), -60.0);
        assert_eq!(overwatch_cost(&o, 3, true, 10).unwrap(), -62.0);
        assert_eq!(overwatch_cost(&o, 5, false, 10).unwrap(), 0.0);
        assert_eq!(overwatch_cost(&o, 1, true, 10).unwrap(), -30.0);
    }
}
