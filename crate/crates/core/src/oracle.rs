//! Exhaustive dynamic program over aggregate team states.
//!
//! Robots are interchangeable, so a team state is the vector of robot counts
//! per location. Every location has exactly one "out group" (the node it
//! leaves from: a node itself, or the tail of an edge) and one "in group"
//! (the node it leads to: a node itself, or the head of an edge). A state
//! `next` follows `prev` exactly when the in-group totals of `prev` equal the
//! out-group totals of `next`. The value function therefore only depends on
//! the per-node group totals, and each layer of the recursion visits every
//! team state once.

use std::fmt;

use crate::bnb::{step_breakdown, OccupancyPlan};
use crate::scenario::Scenario;

/// Default ceiling on `n_T * C(n_A + n_L - 1, n_A)`.
pub const DEFAULT_CAP: u64 = 5_000_000;

/// Robot counts per dense location index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamState {
    pub counts: Vec<u32>,
}

impl TeamState {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// The state at step 1 described by the scenario's start demands.
    pub fn start(scn: &Scenario) -> Self {
        let mut counts = vec![0; scn.n_locations()];
        for &(loc, n) in &scn.starts {
            counts[scn.loc_index(loc)] += n;
        }
        TeamState { counts }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("state space estimate {estimate} exceeds the cap {cap}")]
    CapExceeded { estimate: u64, cap: u64 },
    #[error("no occupancy sequence meets the goals")]
    Infeasible,
    #[error("state at step {t} is not reachable from the previous one")]
    InvalidTransition { t: u32 },
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub cap: u64,
    /// Worker threads per layer; the result does not depend on it.
    pub threads: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { cap: DEFAULT_CAP, threads: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub objective: f64,
    pub plan: OccupancyPlan,
    /// Team states evaluated across all layers.
    pub states_evaluated: u64,
}

/// Number of compositions of `n` into `k` parts, saturating.
pub fn compositions(n: u32, k: usize) -> u64 {
    if k == 0 {
        return u64::from(n == 0);
    }
    // C(n + k - 1, k - 1), built incrementally so every prefix is integral
    let mut c: u128 = 1;
    for i in 1..k as u128 {
        c = c * (u128::from(n) + i) / i;
        if c > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    c as u64
}

/// `n_T * C(n_A + n_L - 1, n_A)`: team states times steps.
pub fn state_space_estimate(scn: &Scenario) -> u64 {
    compositions(scn.n_agents, scn.n_locations()).saturating_mul(u64::from(scn.n_timesteps))
}

/// Location grouping shared by every operation here.
struct Groups {
    /// Dense indices leaving each node: the node itself, then its out-edges.
    out_slots: Vec<Vec<usize>>,
    /// Node each location leads to.
    head: Vec<usize>,
    /// Node each location leaves from.
    tail: Vec<usize>,
    /// `table[m][j]`: compositions of `m` into `j` parts.
    table: Vec<Vec<u64>>,
    n_agents: u32,
}

impl Groups {
    fn new(scn: &Scenario) -> Self {
        let n_nodes = scn.n_nodes();
        let mut out_slots: Vec<Vec<usize>> = (0..n_nodes).map(|v| vec![v]).collect();
        let mut head: Vec<usize> = (0..n_nodes).collect();
        let mut tail = head.clone();
        for (e, edge) in scn.edges.iter().enumerate() {
            out_slots[edge.from.0].push(n_nodes + e);
            head.push(edge.to.0);
            tail.push(edge.from.0);
        }
        let table = (0..=scn.n_agents)
            .map(|m| (0..=n_nodes).map(|j| compositions(m, j)).collect())
            .collect();
        Groups {
            out_slots,
            head,
            tail,
            table,
            n_agents: scn.n_agents,
        }
    }

    fn n_nodes(&self) -> usize {
        self.out_slots.len()
    }

    fn n_groups(&self) -> usize {
        self.table[self.n_agents as usize][self.n_nodes()] as usize
    }

    /// Per-node totals of the locations leading into each node.
    fn in_totals(&self, counts: &[u32], out: &mut [u32]) {
        out.iter_mut().for_each(|x| *x = 0);
        for (l, &c) in counts.iter().enumerate() {
            out[self.head[l]] += c;
        }
    }

    fn out_totals(&self, counts: &[u32], out: &mut [u32]) {
        out.iter_mut().for_each(|x| *x = 0);
        for (l, &c) in counts.iter().enumerate() {
            out[self.tail[l]] += c;
        }
    }

    /// Position of a group vector in lexicographic order.
    fn rank(&self, c: &[u32]) -> usize {
        let k = c.len();
        let mut rem = self.n_agents as usize;
        let mut r = 0u64;
        for (i, &x) in c.iter().enumerate().take(k.saturating_sub(1)) {
            for y in 0..x as usize {
                r += self.table[rem - y][k - i - 1];
            }
            rem -= x as usize;
        }
        r as usize
    }

    /// Every group vector, in lexicographic order.
    fn all_groups(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.n_groups());
        let mut c = first_composition(self.n_agents, self.n_nodes());
        loop {
            out.push(c.clone());
            if !next_composition(&mut c) {
                return out;
            }
        }
    }

    /// Calls `f` on every team state whose out-group totals equal `c`.
    fn for_each_state(&self, c: &[u32], counts: &mut [u32], mut f: impl FnMut(&[u32])) {
        let n = self.n_nodes();
        let mut parts: Vec<Vec<u32>> = (0..n).map(|v| first_composition(c[v], self.out_slots[v].len())).collect();
        counts.iter_mut().for_each(|x| *x = 0);
        for v in 0..n {
            self.write(v, &parts[v], counts);
        }
        loop {
            f(counts);
            let mut v = n;
            loop {
                if v == 0 {
                    return;
                }
                v -= 1;
                let more = next_composition(&mut parts[v]);
                if !more {
                    parts[v] = first_composition(c[v], parts[v].len());
                }
                self.write(v, &parts[v], counts);
                if more {
                    break;
                }
            }
        }
    }

    fn write(&self, v: usize, part: &[u32], counts: &mut [u32]) {
        for (&slot, &x) in self.out_slots[v].iter().zip(part) {
            counts[slot] = x;
        }
    }
}

/// Lexicographically smallest composition: everything in the last part.
fn first_composition(n: u32, k: usize) -> Vec<u32> {
    let mut c = vec![0; k];
    if let Some(last) = c.last_mut() {
        *last = n;
    }
    c
}

/// Advances to the next composition in lexicographic order.
fn next_composition(c: &mut [u32]) -> bool {
    let k = c.len();
    if k < 2 {
        return false;
    }
    let mut suffix = c[k - 1];
    let mut i = k - 2;
    loop {
        if suffix > 0 {
            c[i] += 1;
            for x in &mut c[i + 1..] {
                *x = 0;
            }
            c[k - 1] = suffix - 1;
            return true;
        }
        if i == 0 {
            return false;
        }
        suffix += c[i];
        i -= 1;
    }
}

/// Every state reachable from `state` in one step, sorted.
pub fn successors(state: &TeamState, scn: &Scenario) -> Vec<TeamState> {
    let groups = Groups::new(scn);
    let mut c = vec![0; groups.n_nodes()];
    groups.in_totals(&state.counts, &mut c);
    let mut counts = vec![0; scn.n_locations()];
    let mut out = Vec::new();
    groups.for_each_state(&c, &mut counts, |s| out.push(TeamState { counts: s.to_vec() }));
    out.sort();
    out
}

/// Whether `next` can follow `prev`.
pub fn is_successor(prev: &TeamState, next: &TeamState, scn: &Scenario) -> bool {
    if prev.counts.len() != scn.n_locations() || next.counts.len() != scn.n_locations() {
        return false;
    }
    let groups = Groups::new(scn);
    let mut a = vec![0; groups.n_nodes()];
    let mut b = vec![0; groups.n_nodes()];
    groups.in_totals(&prev.counts, &mut a);
    groups.out_totals(&next.counts, &mut b);
    a == b
}

/// Cost charged for occupying `next` during step `t`, having been in `prev`.
pub fn step_cost(prev: &TeamState, next: &TeamState, t: u32, scn: &Scenario) -> Result<f64, OracleError> {
    if !is_successor(prev, next, scn) {
        return Err(OracleError::InvalidTransition { t });
    }
    Ok(step_breakdown(scn, &next.counts, t).total())
}

fn goals_met(scn: &Scenario, counts: &[u32]) -> bool {
    scn.goals.iter().all(|&(loc, n)| counts[scn.loc_index(loc)] >= n)
}

fn tie(a: f64, b: f64) -> bool {
    a.is_finite() && (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn oracle_solve(scn: &Scenario) -> Result<OracleSolution, OracleError> {
    oracle_solve_with(scn, &OracleParams::default())
}

pub fn oracle_solve_with(scn: &Scenario, params: &OracleParams) -> Result<OracleSolution, OracleError> {
    let estimate = state_space_estimate(scn);
    if estimate > params.cap {
        return Err(OracleError::CapExceeded { estimate, cap: params.cap });
    }
    let groups = Groups::new(scn);
    let all = groups.all_groups();
    let n_t = scn.n_timesteps;
    let n_loc = scn.n_locations();
    let start = TeamState::start(scn);
    if start.total() != scn.n_agents {
        return Err(OracleError::Infeasible);
    }

    // value[t - 2][rank(c)]: best cost of steps t..n_T entered with totals c
    let mut value: Vec<Vec<f64>> = Vec::new();
    let mut evaluated = 0u64;
    for t in (2..=n_t).rev() {
        let later = value.last().map(|v: &Vec<f64>| v.as_slice());
        let layer = layer_values(scn, &groups, &all, t, later, params.threads.max(1));
        evaluated += compositions(scn.n_agents, n_loc);
        value.push(layer);
    }
    value.reverse();

    let mut c = vec![0; groups.n_nodes()];
    let mut states = vec![start.counts.clone()];
    if n_t == 1 {
        if !goals_met(scn, &start.counts) {
            return Err(OracleError::Infeasible);
        }
    } else {
        groups.in_totals(&start.counts, &mut c);
        if !value[0][groups.rank(&c)].is_finite() {
            return Err(OracleError::Infeasible);
        }
        let mut counts = vec![0; n_loc];
        let mut next_c = vec![0; groups.n_nodes()];
        for t in 2..=n_t {
            groups.in_totals(states.last().unwrap(), &mut c);
            let target = value[(t - 2) as usize][groups.rank(&c)];
            let mut best: Option<Vec<u32>> = None;
            groups.for_each_state(&c, &mut counts, |s| {
                let v = if t == n_t {
                    if !goals_met(scn, s) {
                        return;
                    }
                    step_breakdown(scn, s, t).total()
                } else {
                    groups.in_totals(s, &mut next_c);
                    step_breakdown(scn, s, t).total() + value[(t - 1) as usize][groups.rank(&next_c)]
                };
                if tie(v, target) && best.as_deref().is_none_or(|b| s < b) {
                    best = Some(s.to_vec());
                }
            });
            states.push(best.expect("value function has a witness"));
        }
    }
    let plan = OccupancyPlan::from_counts(scn, states).expect("shape matches the scenario");
    Ok(OracleSolution {
        objective: plan.total_cost(),
        plan,
        states_evaluated: evaluated,
    })
}

/// Values of one layer, split across threads by group vector.
fn layer_values(
    scn: &Scenario,
    groups: &Groups,
    all: &[Vec<u32>],
    t: u32,
    later: Option<&[f64]>,
    threads: usize,
) -> Vec<f64> {
    let eval = |c: &Vec<u32>| -> f64 {
        let mut counts = vec![0; scn.n_locations()];
        let mut next_c = vec![0; groups.n_nodes()];
        let mut best = f64::INFINITY;
        groups.for_each_state(c, &mut counts, |s| {
            let tail = match later {
                Some(v) => {
                    groups.in_totals(s, &mut next_c);
                    v[groups.rank(&next_c)]
                }
                None if goals_met(scn, s) => 0.0,
                None => f64::INFINITY,
            };
            if tail.is_finite() {
                best = best.min(step_breakdown(scn, s, t).total() + tail);
            }
        });
        best
    };
    if threads == 1 || all.len() < 2 * threads {
        return all.iter().map(eval).collect();
    }
    let chunk = all.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(eval).collect::<Vec<f64>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("oracle worker panicked")).collect()
    })
}

impl fmt::Display for TeamState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EdgeId, EdgeParams, LocationId, NodeId, OverwatchOpportunity};

    fn line(w: f64, n_t: u32) -> Scenario {
        let mut s = Scenario::new(1, n_t).with_time_weight(1.0);
        let v = s.add_nodes(2);
        s.add_edge(EdgeParams { from: v[0], to: v[1], w, a: 1, m: 0.0, r: 0.0 });
        s.add_start(LocationId::Node(v[0]), 1);
        s.add_goal(LocationId::Node(v[1]), 1);
        s
    }

    fn triangle(n_agents: u32) -> Scenario {
        let mut s = Scenario::new(n_agents, 3);
        let v = s.add_nodes(3);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            s.add_undirected(EdgeParams { from: v[a], to: v[b], w: 4.0, a: 1, m: 0.0, r: 1.0 });
        }
        s.add_start(LocationId::Node(v[0]), n_agents);
        s
    }

    #[test]
    fn composition_ranks_follow_enumeration() {
        let mut s = Scenario::new(4, 1);
        s.add_nodes(4);
        let g = Groups::new(&s);
        let all = g.all_groups();
        assert_eq!(all.len() as u64, compositions(4, 4));
        for (i, c) in all.iter().enumerate() {
            assert_eq!(g.rank(c), i);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn isolated_node_has_itself_as_only_successor() {
        let mut s = Scenario::new(3, 2);
        let v = s.add_node(1);
        s.add_start(LocationId::Node(v), 3);
        let st = TeamState::start(&s);
        assert_eq!(successors(&st, &s), vec![st]);
    }

    #[test]
    fn dead_end_edge_forces_arrival() {
        let mut s = Scenario::new(1, 2);
        let v = s.add_nodes(2);
        s.add_plain_edge(v[0], v[1], 1.0, 0.0);
        let st = TeamState { counts: vec![0, 0, 1] };
        assert_eq!(successors(&st, &s), vec![TeamState { counts: vec![0, 1, 0] }]);
    }

    #[test]
    fn triangle_split_counts_stars_and_bars() {
        let s = triangle(2);
        let next = successors(&TeamState::start(&s), &s);
        assert_eq!(next.len(), 6);
        assert!(next.iter().all(|n| n.total() == 2));
    }

    #[test]
    fn edges_chain_without_stopping() {
        let s = triangle(1);
        // one robot on edge 0 -> 1 may continue straight onto 1 -> 2
        let on_01 = s.loc_index(LocationId::Edge(EdgeId(0)));
        let mut counts = vec![0; s.n_locations()];
        counts[on_01] = 1;
        let next = successors(&TeamState { counts }, &s);
        let onto_12 = s.loc_index(LocationId::Edge(s.find_edge(NodeId(1), NodeId(2)).unwrap()));
        assert!(next.iter().any(|n| n.counts[onto_12] == 1));
        assert!(next.iter().all(|n| n.counts[on_01] == 0));
        // node 1, edges 1->0 and 1->2
        assert_eq!(next.len(), 3);
    }

    #[test]
    fn idle_step_is_free() {
        let s = triangle(2);
        let st = TeamState::start(&s);
        assert_eq!(step_cost(&st, &st, 3, &s).unwrap(), 0.0);
    }

    #[test]
    fn vulnerable_edge_with_full_team() {
        let mut s = Scenario::new(4, 2).with_time_weight(1.0);
        let v = s.add_nodes(2);
        s.add_edge(EdgeParams { from: v[0], to: v[1], w: 50.0, a: 4, m: 10.0, r: 1.0 });
        s.add_start(LocationId::Node(v[0]), 4);
        let prev = TeamState::start(&s);
        let next = TeamState { counts: vec![0, 0, 4] };
        assert_eq!(step_cost(&prev, &next, 2, &s).unwrap(), 52.0);
    }

    #[test]
    fn watched_edge_hand_evaluation() {
        let mut s = Scenario::new(4, 2).with_time_weight(10.0);
        let v = s.add_nodes(3);
        let e = s.add_edge(EdgeParams { from: v[0], to: v[1], w: 10.0, a: 1, m: 0.0, r: 1.0 });
        s.add_overwatch(OverwatchOpportunity { watcher: v[2], watched: e, omega: 20.0, alpha: 2, gamma: 2.0 });
        s.add_start(LocationId::Node(v[0]), 2);
        s.add_start(LocationId::Node(v[2]), 2);
        let prev = TeamState::start(&s);
        let next = TeamState { counts: vec![0, 0, 2, 2] };
        // (10 - 1) - 20 + 10 * 1
        assert_eq!(step_cost(&prev, &next, 1, &s).unwrap(), -1.0);
        assert!(!crate::scenario::validate(&s).is_ok());
    }

    #[test]
    fn teleporting_is_rejected() {
        let s = line(5.0, 3);
        let prev = TeamState { counts: vec![1, 0, 0] };
        let next = TeamState { counts: vec![0, 1, 0] };
        assert_eq!(step_cost(&prev, &next, 2, &s), Err(OracleError::InvalidTransition { t: 2 }));
    }

    #[test]
    fn single_edge_traversal() {
        // the start occupies step 1, so the edge is crossed at step 2
        let sol = oracle_solve(&line(5.0, 3)).unwrap();
        assert_eq!(sol.objective, 5.0 + 2.0);
        assert_eq!(sol.plan.occupancy, vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]);
        assert_eq!(oracle_solve(&line(5.0, 2)).unwrap_err(), OracleError::Infeasible);
    }

    #[test]
    fn goal_at_start_costs_nothing() {
        let mut s = line(5.0, 2);
        s.goals = vec![(LocationId::Node(NodeId(0)), 1)];
        let sol = oracle_solve(&s).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.plan.occupancy.iter().all(|r| r == &vec![1, 0, 0]));
    }

    #[test]
    fn cap_is_enforced() {
        let s = triangle(3);
        let estimate = state_space_estimate(&s);
        assert_eq!(estimate, compositions(3, 9) * 3);
        let err = oracle_solve_with(&s, &OracleParams { cap: estimate - 1, threads: 1 }).unwrap_err();
        assert!(matches!(err, OracleError::CapExceeded { .. }));
    }

    #[test]
    fn threads_do_not_change_the_answer() {
        let mut s = triangle(3);
        s.n_timesteps = 4;
        s.add_goal(LocationId::Node(NodeId(2)), 2);
        let a = oracle_solve(&s).unwrap();
        let b = oracle_solve_with(&s, &OracleParams { threads: 3, ..Default::default() }).unwrap();
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.plan, b.plan);
    }

    #[test]
    fn plan_is_walkable_and_sums_to_objective() {
        let mut s = triangle(3);
        s.n_timesteps = 4;
        s.add_goal(LocationId::Node(NodeId(2)), 2);
        let sol = oracle_solve(&s).unwrap();
        let states: Vec<TeamState> = sol.plan.occupancy.iter().map(|c| TeamState { counts: c.clone() }).collect();
        let mut total = step_breakdown(&s, &states[0].counts, 1).total();
        for (i, w) in states.windows(2).enumerate() {
            total += step_cost(&w[0], &w[1], i as u32 + 2, &s).unwrap();
        }
        assert_eq!(total, sol.objective);
        assert!(sol.plan.goals_met(&s));
    }
}
