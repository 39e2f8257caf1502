//! Per-robot itineraries from an aggregate occupancy plan.
//!
//! Robots leaving node `v` (waiting at `v` or arriving over an edge into `v`)
//! all face the same choices at the next step: stay at `v` or enter one of
//! its out-edges. Matching is done within each such group. Robots already
//! waiting at `v` keep waiting while there is room; everyone else is matched
//! in id order to the next locations in `LocationId` order.

use crate::bnb::OccupancyPlan;
use crate::scenario::{LocationId, Scenario};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotItinerary {
    pub robot: u32,
    /// Location at steps `1..=n_T`.
    pub locations: Vec<LocationId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignError {
    #[error("plan shape does not match the scenario")]
    Shape,
    #[error("step 1 holds {found} robots, expected {expected}")]
    Headcount { found: u32, expected: u32 },
    #[error("flow through node {node} is not conserved between steps {t} and {next}", next = t + 1)]
    Conservation { t: u32, node: i64 },
}

pub fn assign_paths(plan: &OccupancyPlan, scn: &Scenario) -> Result<Vec<RobotItinerary>, AssignError> {
    let n_t = scn.n_timesteps as usize;
    let n_loc = scn.n_locations();
    let n_nodes = scn.n_nodes();
    if plan.occupancy.len() != n_t || plan.occupancy.iter().any(|r| r.len() != n_loc) {
        return Err(AssignError::Shape);
    }
    let found: u32 = plan.occupancy[0].iter().sum();
    if found != scn.n_agents {
        return Err(AssignError::Headcount { found, expected: scn.n_agents });
    }

    // at[r]: dense location of robot r at the current step
    let mut at: Vec<usize> = Vec::with_capacity(scn.n_agents as usize);
    for (l, &c) in plan.occupancy[0].iter().enumerate() {
        at.extend(std::iter::repeat_n(l, c as usize));
    }
    let mut paths: Vec<Vec<usize>> = at.iter().map(|&l| vec![l]).collect();

    let head = |l: usize| if l < n_nodes { l } else { scn.edges[l - n_nodes].to.0 };
    let out_slots: Vec<Vec<usize>> = (0..n_nodes)
        .map(|v| {
            let mut s = vec![v];
            s.extend(scn.out_edges(crate::scenario::NodeId(v)).map(|e| n_nodes + e.0));
            s.sort_unstable();
            s
        })
        .collect();

    for t in 1..n_t {
        let demand = &plan.occupancy[t];
        let mut next = vec![usize::MAX; at.len()];
        for v in 0..n_nodes {
            // robot ids are visited in increasing order
            let group: Vec<usize> = (0..at.len()).filter(|&r| head(at[r]) == v).collect();
            let supply = group.len() as u32;
            let wanted: u32 = out_slots[v].iter().map(|&l| demand[l]).sum();
            if supply != wanted {
                return Err(AssignError::Conservation {
                    t: t as u32,
                    node: scn.nodes[v].key,
                });
            }
            let mut left: Vec<u32> = out_slots[v].iter().map(|&l| demand[l]).collect();
            // sticky: waiting robots keep waiting while the plan allows it
            for &r in &group {
                if at[r] == v && left[0] > 0 {
                    left[0] -= 1;
                    next[r] = v;
                }
            }
            let mut slot = 0;
            for &r in &group {
                if next[r] != usize::MAX {
                    continue;
                }
                while left[slot] == 0 {
                    slot += 1;
                }
                left[slot] -= 1;
                next[r] = out_slots[v][slot];
            }
        }
        for (r, &l) in next.iter().enumerate() {
            paths[r].push(l);
        }
        at = next;
    }

    Ok(paths
        .into_iter()
        .enumerate()
        .map(|(r, p)| RobotItinerary {
            robot: r as u32,
            locations: p.into_iter().map(|l| scn.location(l)).collect(),
        })
        .collect())
}

/// Robot counts per location and step implied by a set of itineraries.
pub fn stack(itineraries: &[RobotItinerary], scn: &Scenario) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; scn.n_locations()]; scn.n_timesteps as usize];
    for it in itineraries {
        for (t, &loc) in it.locations.iter().enumerate() {
            out[t][scn.loc_index(loc)] += 1;
        }
    }
    out
}

/// Whether a robot at `from` may be at `to` one step later.
pub fn is_move(scn: &Scenario, from: LocationId, to: LocationId) -> bool {
    let v = match from {
        LocationId::Node(v) => v,
        LocationId::Edge(e) => scn.edges[e.0].to,
    };
    match to {
        LocationId::Node(u) => u == v,
        LocationId::Edge(e) => scn.edges[e.0].from == v,
    }
}
