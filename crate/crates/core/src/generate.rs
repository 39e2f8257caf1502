//! Seeded random scenarios: geometric graphs with integer costs that pass
//! [`validate`](crate::scenario::validate).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{edge_cost, overwatch_cost, validate, EdgeParams, LocationId, NodeId, OverwatchOpportunity, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_nodes: usize,
    /// Each undirected edge becomes two directed edges.
    pub n_undirected_edges: usize,
    pub n_opportunities: usize,
    pub n_timesteps: u32,
    pub n_agents: u32,
    /// Share of undirected edges made vulnerable (a = min(4, n_A), m = 10).
    pub vulnerable_fraction: f64,
    pub time_weight: f64,
    /// Smallest base weight; weights grow with edge length.
    pub min_weight: u32,
}

/// Sizes of the four benchmark maps: nodes, directed edges, opportunities, steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizePreset {
    pub name: &'static str,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_opportunities: usize,
    pub n_timesteps: u32,
}

impl SizePreset {
    pub fn n_locations(&self) -> usize {
        self.n_nodes + self.n_edges
    }

    pub fn config(&self, n_agents: u32) -> GeneratorConfig {
        GeneratorConfig {
            n_nodes: self.n_nodes,
            n_undirected_edges: self.n_edges / 2,
            n_opportunities: self.n_opportunities,
            n_timesteps: self.n_timesteps,
            n_agents,
            vulnerable_fraction: 0.3,
            time_weight: 10.0,
            min_weight: 10 + 2 * n_agents,
        }
    }
}

pub const BENCH_SIZES: [SizePreset; 4] = [
    SizePreset { name: "illustrative", n_nodes: 5, n_edges: 12, n_opportunities: 4, n_timesteps: 10 },
    SizePreset { name: "bounding", n_nodes: 11, n_edges: 32, n_opportunities: 8, n_timesteps: 10 },
    SizePreset { name: "map1", n_nodes: 8, n_edges: 24, n_opportunities: 18, n_timesteps: 10 },
    SizePreset { name: "map2", n_nodes: 15, n_edges: 36, n_opportunities: 32, n_timesteps: 12 },
];

pub fn preset(name: &str) -> Option<SizePreset> {
    BENCH_SIZES.iter().copied().find(|p| p.name == name)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Hop distances from `src` over directed edges.
fn hops_from(scn: &Scenario, src: NodeId) -> Vec<Option<usize>> {
    let mut d = vec![None; scn.n_nodes()];
    d[src.0] = Some(0);
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for e in scn.out_edges(v) {
            let to = scn.edge(e).to;
            if d[to.0].is_none() {
                d[to.0] = Some(d[v.0].unwrap() + 1);
                queue.push_back(to);
            }
        }
    }
    d
}

/// Builds a connected random scenario. Robots start at node 0; one robot
/// must reach the farthest node reachable within the horizon.
pub fn random_scenario(cfg: &GeneratorConfig, seed: u64) -> Scenario {
    assert!(cfg.n_nodes >= 1 && cfg.n_agents >= 1 && cfg.n_timesteps >= 1);
    let max_edges = cfg.n_nodes * (cfg.n_nodes - 1) / 2;
    assert!(cfg.n_undirected_edges >= cfg.n_nodes - 1 && cfg.n_undirected_edges <= max_edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<(f64, f64)> = (0..cfg.n_nodes).map(|_| (rng.gen(), rng.gen())).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..cfg.n_nodes {
        let j = (0..i)
            .min_by(|&a, &b| dist(pos[i], pos[a]).total_cmp(&dist(pos[i], pos[b])))
            .unwrap();
        pairs.push((j, i));
    }
    let mut rest: Vec<(usize, usize)> = (0..cfg.n_nodes)
        .flat_map(|i| (i + 1..cfg.n_nodes).map(move |j| (i, j)))
        .filter(|p| !pairs.contains(p))
        .collect();
    rest.sort_by(|a, b| dist(pos[a.0], pos[a.1]).total_cmp(&dist(pos[b.0], pos[b.1])));
    pairs.extend(rest.into_iter().take(cfg.n_undirected_edges - pairs.len()));

    let mut vulnerable = vec![false; pairs.len()];
    let n_vulnerable = (cfg.vulnerable_fraction * pairs.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(n_vulnerable) {
        vulnerable[k] = true;
    }

    let mut extra = 0u32;
    loop {
        let mut scn = Scenario::new(cfg.n_agents, cfg.n_timesteps).with_time_weight(cfg.time_weight);
        let nodes = scn.add_nodes(cfg.n_nodes);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let w = f64::from(cfg.min_weight + extra) + (40.0 * dist(pos[i], pos[j])).round();
            let a = if vulnerable[k] { cfg.n_agents.min(4) } else { 1 };
            let m = if a > 1 { 10.0 } else { 0.0 };
            scn.add_undirected(EdgeParams { from: nodes[i], to: nodes[j], w, a, m, r: 1.0 });
        }
        add_opportunities(&mut scn, cfg, &pos, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));

        scn.add_start(LocationId::Node(nodes[0]), cfg.n_agents);
        let hops = hops_from(&scn, nodes[0]);
        let horizon = (cfg.n_timesteps as usize).saturating_sub(2);
        let goal = (0..cfg.n_nodes)
            .filter(|&v| hops[v].is_some_and(|h| h <= horizon))
            .max_by(|&a, &b| {
                hops[a]
                    .cmp(&hops[b])
                    .then(dist(pos[0], pos[a]).total_cmp(&dist(pos[0], pos[b])))
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        scn.add_goal(LocationId::Node(nodes[goal]), 1);
        let report = validate(&scn);
        if report.is_ok() {
            return scn;
        }
        assert!(extra < 1000, "generator cannot repair: {report}");
        extra += 10;
    }
}

fn add_opportunities(scn: &mut Scenario, cfg: &GeneratorConfig, pos: &[(f64, f64)], rng: &mut ChaCha8Rng) {
    let n_edges = scn.n_edges();
    let mut taken = std::collections::BTreeSet::new();
    let mut attempts = 0;
    while scn.overwatch.len() < cfg.n_opportunities && attempts < 100 * (cfg.n_opportunities + 1) {
        attempts += 1;
        let e = rng.gen_range(0..n_edges);
        let edge = scn.edges[e].clone();
        let mid = {
            let (a, b) = (pos[edge.from.0], pos[edge.to.0]);
            ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
        };
        let mut near: Vec<usize> = (0..scn.n_nodes()).filter(|&v| v != edge.from.0 && v != edge.to.0).collect();
        if near.is_empty() {
            near = vec![edge.from.0];
        }
        near.sort_by(|&a, &b| dist(pos[a], mid).total_cmp(&dist(pos[b], mid)));
        near.truncate(3);
        let watcher = *near.choose(rng).unwrap();
        if !taken.insert((watcher, e)) {
            continue;
        }
        let alpha = rng.gen_range(1..=3u32);
        let gamma = f64::from(rng.gen_range(0..=1u32));
        let omega = f64::from(alpha * rng.gen_range(2..=6u32));
        scn.add_overwatch(OverwatchOpportunity {
            watcher: NodeId(watcher),
            watched: crate::scenario::EdgeId(e),
            omega,
            alpha,
            gamma,
        });
    }
    shrink_overwatch(scn);
}

/// Scales down opportunities on edges whose full-team discount would reach
/// the cheapest traversal cost.
fn shrink_overwatch(scn: &mut Scenario) {
    let n_a = scn.n_agents;
    for e in 0..scn.n_edges() {
        let edge = &scn.edges[e];
        let min_cost = (1..=n_a)
            .map(|p| edge_cost(edge, p, n_a).unwrap())
            .fold(f64::INFINITY, f64::min);
        let ids: Vec<usize> = (0..scn.overwatch.len()).filter(|&k| scn.overwatch[k].watched.0 == e).collect();
        let discount: f64 = ids.iter().map(|&k| -overwatch_cost(&scn.overwatch[k], n_a, true, n_a).unwrap()).sum();
        if ids.is_empty() || discount < min_cost {
            continue;
        }
        let share = ((min_cost - 1.0) / ids.len() as f64).floor().max(1.0);
        for &k in &ids {
            let o = &mut scn.overwatch[k];
            o.gamma = 0.0;
            o.alpha = o.alpha.min(share as u32).max(1);
            o.omega = f64::from(o.alpha) * (share / f64::from(o.alpha)).floor().max(1.0);
        }
    }
}

/// Small instance for oracle cross-checks: up to 4 nodes, 3 robots, 4 steps,
/// integer costs.
pub fn small_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_nodes = rng.gen_range(2..=4usize);
    let max_edges = n_nodes * (n_nodes - 1) / 2;
    let cfg = GeneratorConfig {
        n_nodes,
        n_undirected_edges: rng.gen_range(n_nodes - 1..=max_edges),
        n_opportunities: rng.gen_range(0..=2),
        n_timesteps: rng.gen_range(2..=4),
        n_agents: rng.gen_range(1..=3),
        vulnerable_fraction: rng.gen_range(0.0..0.6),
        time_weight: f64::from(rng.gen_range(0..=3u32)),
        min_weight: rng.gen_range(4..=8),
    };
    let mut scn = random_scenario(&cfg, rng.gen());
    if cfg.n_agents > 1 && rng.gen_bool(0.5) {
        let goal = scn.goals[0].0;
        scn.goals[0].1 = rng.gen_range(1..=cfg.n_agents);
        if !validate(&scn).is_ok() {
            scn.goals = vec![(goal, 1)];
        }
    }
    scn
}
