//! Branch-and-bound over the LP relaxation.
//!
//! Nodes are explored best-bound first (ties: deeper, then older). A node
//! branches on the integer column whose fractional part is closest to 0.5,
//! lowest index on ties, adding a floor child and then a ceil child. Each
//! worker keeps one [`LpSolver`] and re-solves nodes from its last basis.
//!
//! When an LP solution has integral occupancy columns, the support and cost
//! columns are recomputed from it to give a feasible incumbent even if the
//! binaries are still fractional.

mod cuts;
mod plan;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::lp::{BoundOverride, LpError, LpSolution, LpSolver, LpStatus};
use crate::model::{implied_rows, Integrality, MipModel, Relation, Row, VarKind};
use cuts::Separator;

pub use plan::{extract_plan, step_breakdown, OccupancyPlan, PlanError, StepCost};

/// Integrality residual below which a value counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Absolute pruning tolerance on node bounds.
pub const PRUNE_TOL: f64 = 1e-9;
const ROOT_CUT_ROUNDS: usize = 200;
const NODE_CUT_ROUNDS: usize = 3;
const DIVE_DEPTH: usize = 1000;
/// Observations per direction before a pseudocost is trusted.
const RELIABLE: u32 = 1;
const STRONG_CANDIDATES: usize = 10;
const STRONG_LOOKAHEAD: usize = 4;
const STRONG_ITERS: usize = 100;
/// Nodes between dives while there is no incumbent.
const DIVE_EVERY: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    GapLimit,
    NodeLimit,
    TimeLimit,
}

impl MilpStatus {
    pub fn is_limit(self) -> bool {
        matches!(self, MilpStatus::GapLimit | MilpStatus::NodeLimit | MilpStatus::TimeLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branching {
    /// Largest product of estimated child gains, from pseudocosts learned
    /// over the search and seeded by short strong-branching solves.
    Pseudocost,
    /// Fractional part closest to 0.5.
    MostFractional,
    /// First fractional column by index.
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSelection {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Relative gap at which the search may stop.
    pub gap_tolerance: f64,
    pub node_limit: u64,
    pub time_limit: Duration,
    pub branching: Branching,
    pub node_selection: NodeSelection,
    /// Nodes solved concurrently per batch; 1 is the sequential search.
    pub threads: usize,
    /// Add [`implied_rows`] to every node relaxation and separate cutset
    /// rows for the goals during the search.
    pub implied_rows: bool,
    /// Seed for the simplex perturbation; runs with equal seeds are
    /// identical when `threads` is 1.
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            gap_tolerance: 1e-9,
            node_limit: u64::MAX,
            time_limit: Duration::from_secs(60),
            branching: Branching::Pseudocost,
            node_selection: NodeSelection::BestBound,
            threads: 1,
            implied_rows: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integer-feasible point found, one value per column.
    pub incumbent: Option<Vec<f64>>,
    /// Incumbent objective, `+inf` without one.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_time: Duration,
    pub root_lp_objective: f64,
    pub lp_iterations: u64,
}

/// Snapshot handed to a progress observer after each processed node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub nodes: u64,
    pub bound: f64,
    pub incumbent: f64,
    pub root_lp_objective: f64,
}

pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    if !objective.is_finite() {
        return f64::INFINITY;
    }
    ((objective - bound) / objective.abs().max(1.0)).max(0.0)
}

#[derive(Debug)]
struct Change {
    column: usize,
    lower: f64,
    upper: f64,
    parent: Option<Arc<Change>>,
}

/// How a node came from its parent, for pseudocost updates.
#[derive(Debug, Clone, Copy)]
struct Origin {
    column: usize,
    up: bool,
    /// Distance the branch moved the column.
    frac: f64,
    parent_obj: f64,
}

#[derive(Debug, Clone)]
struct Node {
    bound: f64,
    depth: u32,
    id: u64,
    changes: Option<Arc<Change>>,
    origin: Option<Origin>,
}

/// Mean objective gain per unit change, down and up.
#[derive(Debug, Clone, Copy, Default)]
struct Pseudocost {
    sum: [f64; 2],
    count: [u32; 2],
}

impl Node {
    fn overrides(&self) -> Vec<BoundOverride> {
        let mut out = Vec::with_capacity(self.depth as usize);
        let mut cur = self.changes.as_deref();
        while let Some(c) = cur {
            out.push(BoundOverride::new(c.column, c.lower, c.upper));
            cur = c.parent.as_deref();
        }
        out.reverse();
        out
    }
}

struct Queued {
    node: Node,
    depth_first: bool,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap pops the greatest: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.node, &other.node);
        let by_bound = b.bound.total_cmp(&a.bound);
        let by_depth = a.depth.cmp(&b.depth);
        let by_age = b.id.cmp(&a.id);
        if self.depth_first {
            by_depth.then(by_bound).then(by_age)
        } else {
            by_bound.then(by_depth).then(by_age)
        }
    }
}

pub fn solve_milp(model: &MipModel, params: &SolveParams) -> Result<MilpSolution, LpError> {
    solve_milp_observed(model, params, &mut |_| {})
}

/// Like [`solve_milp`], reporting progress after every processed node.
pub fn solve_milp_observed(
    model: &MipModel,
    params: &SolveParams,
    observer: &mut dyn FnMut(&Progress),
) -> Result<MilpSolution, LpError> {
    let strengthened;
    let lp_model = if params.implied_rows {
        let mut m = model.clone();
        m.rows.extend(implied_rows(model));
        strengthened = m;
        &strengthened
    } else {
        model
    };
    Search::new(model, params).run(lp_model, observer)
}

struct Search<'a> {
    model: &'a MipModel,
    params: &'a SolveParams,
    start: Instant,
    integer_cols: Vec<usize>,
    occupancy_cols: Vec<usize>,
    support_cols: Vec<usize>,
    /// For each continuous cost column, the rows bounding it from below.
    cost_rows: Vec<(usize, Vec<usize>)>,
    heap: BinaryHeap<Queued>,
    next_id: u64,
    incumbent: Option<Vec<f64>>,
    incumbent_obj: f64,
    nodes: u64,
    lp_iterations: u64,
    root_lp: f64,
    gap_pruned: bool,
    integral_objective: bool,
    pseudo: Vec<Pseudocost>,
}

enum NodeResult {
    Pruned,
    Solved(LpSolution),
}

impl<'a> Search<'a> {
    fn new(model: &'a MipModel, params: &'a SolveParams) -> Self {
        let integer_cols = (0..model.n_columns())
            .filter(|&j| model.columns[j].integrality.is_integer())
            .collect();
        let occupancy_cols = (0..model.n_columns())
            .filter(|&j| matches!(model.layout.var(j).kind, VarKind::P { .. }))
            .collect();
        let support_cols = (0..model.n_columns())
            .filter(|&j| matches!(model.layout.var(j).kind, VarKind::Phi { .. }))
            .collect();
        let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); model.n_columns()];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if model.columns[j].integrality == Integrality::Continuous && a > 0.0 && row.relation == Relation::Ge {
                    rows_of[j].push(i);
                }
            }
        }
        let cost_rows = rows_of
            .into_iter()
            .enumerate()
            .filter(|(j, _)| model.columns[*j].integrality == Integrality::Continuous)
            .collect();
        Search {
            model,
            params,
            start: Instant::now(),
            integer_cols,
            occupancy_cols,
            support_cols,
            cost_rows,
            heap: BinaryHeap::new(),
            next_id: 0,
            incumbent: None,
            incumbent_obj: f64::INFINITY,
            nodes: 0,
            lp_iterations: 0,
            root_lp: f64::NEG_INFINITY,
            gap_pruned: false,
            integral_objective: integral_objective(model),
            pseudo: vec![Pseudocost::default(); model.n_columns()],
        }
    }

    fn push(&mut self, bound: f64, depth: u32, changes: Option<Arc<Change>>, origin: Option<Origin>) {
        let node = Node {
            bound: self.lift(bound),
            depth,
            id: self.next_id,
            changes,
            origin,
        };
        self.next_id += 1;
        self.heap.push(Queued {
            node,
            depth_first: self.params.node_selection == NodeSelection::DepthFirst,
        });
    }

    fn cutoff(&self) -> f64 {
        if !self.incumbent_obj.is_finite() {
            return f64::INFINITY;
        }
        let rel = self.params.gap_tolerance * self.incumbent_obj.abs().max(1.0);
        self.incumbent_obj - PRUNE_TOL.max(rel)
    }

    /// Lifts an LP bound to the next integer when every feasible objective
    /// value is an integer.
    fn lift(&self, bound: f64) -> f64 {
        if self.integral_objective && bound.is_finite() {
            (bound - 1e-6).ceil().max(bound)
        } else {
            bound
        }
    }

    fn prunable(&mut self, bound: f64) -> bool {
        if !self.incumbent_obj.is_finite() {
            return false;
        }
        let bound = self.lift(bound);
        if bound >= self.incumbent_obj - PRUNE_TOL {
            return true;
        }
        if bound >= self.cutoff() {
            self.gap_pruned = true;
            return true;
        }
        false
    }

    fn open_bound(&self) -> f64 {
        let open = self
            .heap
            .iter()
            .map(|q| q.node.bound)
            .fold(f64::INFINITY, f64::min);
        open.min(self.incumbent_obj)
    }

    fn run(mut self, lp_model: &MipModel, observer: &mut dyn FnMut(&Progress)) -> Result<MilpSolution, LpError> {
        let threads = self.params.threads.max(1);
        let mut solvers: Vec<LpSolver> = (0..threads).map(|_| LpSolver::new(lp_model).with_seed(self.params.seed)).collect();

        let separator = if self.params.implied_rows { Separator::new(lp_model) } else { None };
        let sep = separator.as_ref();

        let mut root = solvers[0].solve(&[])?;
        self.lp_iterations += root.iterations as u64;
        self.nodes = 1;
        match root.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(self.finish(MilpStatus::Infeasible)),
            LpStatus::Unbounded | LpStatus::IterLimit => return Err(LpError::Singular),
        }
        self.root_lp = root.objective;
        if let Some(sep) = sep {
            for _ in 0..ROOT_CUT_ROUNDS {
                if self.start.elapsed() >= self.params.time_limit {
                    break;
                }
                let cuts = sep.separate(&root.primal);
                if cuts.is_empty() {
                    break;
                }
                for solver in solvers.iter_mut() {
                    solver.add_rows(&cuts);
                }
                root = solvers[0].solve(&[])?;
                self.lp_iterations += root.iterations as u64;
                match root.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => return Ok(self.finish(MilpStatus::Infeasible)),
                    LpStatus::Unbounded | LpStatus::IterLimit => return Err(LpError::Singular),
                }
            }
        }
        let root_node = Node { bound: root.objective, depth: 0, id: 0, changes: None, origin: None };
        self.dive(&mut solvers[0], &root_node, &root)?;
        let mut next_dive = DIVE_EVERY;
        self.process(root_node, root, &mut solvers[0])?;
        self.next_id = self.next_id.max(1);
        self.report(observer);

        let mut limit: Option<MilpStatus> = None;
        while !self.heap.is_empty() {
            if self.start.elapsed() >= self.params.time_limit {
                limit = Some(MilpStatus::TimeLimit);
                break;
            }
            let mut batch = Vec::with_capacity(threads);
            while batch.len() < threads {
                let Some(q) = self.heap.pop() else { break };
                if self.prunable(q.node.bound) {
                    continue;
                }
                if self.nodes + batch.len() as u64 >= self.params.node_limit {
                    self.heap.push(q);
                    break;
                }
                batch.push(q.node);
            }
            if batch.is_empty() {
                if !self.heap.is_empty() {
                    limit = Some(MilpStatus::NodeLimit);
                    break;
                }
                continue;
            }
            let results = if batch.len() == 1 {
                vec![solve_node(&mut solvers[0], &batch[0], sep)]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = solvers
                        .iter_mut()
                        .zip(&batch)
                        .map(|(solver, node)| s.spawn(move || solve_node(solver, node, sep)))
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("node worker panicked")).collect::<Vec<_>>()
                })
            };
            let mut solved = Vec::with_capacity(results.len());
            for (w, result) in results.into_iter().enumerate() {
                let (sol, cuts) = result?;
                if !cuts.is_empty() {
                    for (k, solver) in solvers.iter_mut().enumerate() {
                        if k != w {
                            solver.add_rows(&cuts);
                        }
                    }
                }
                solved.push(sol);
            }
            if self.incumbent.is_none() && self.nodes >= next_dive {
                next_dive = self.nodes + DIVE_EVERY;
                if let Some((node, sol)) = batch.iter().zip(&solved).find(|(_, s)| s.status == LpStatus::Optimal) {
                    self.dive(&mut solvers[0], node, sol)?;
                }
            }
            for (node, sol) in batch.into_iter().zip(solved) {
                self.nodes += 1;
                self.lp_iterations += sol.iterations as u64;
                match sol.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => continue,
                    LpStatus::Unbounded | LpStatus::IterLimit => return Err(LpError::Singular),
                }
                if let Some(o) = node.origin {
                    self.record(o.column, o.up, o.frac, sol.objective - o.parent_obj);
                }
                if let NodeResult::Solved(sol) = self.screen(sol) {
                    self.process(node, sol, &mut solvers[0])?;
                }
            }
            self.report(observer);
        }

        let status = match limit {
            Some(l) => l,
            None if self.incumbent.is_none() => MilpStatus::Infeasible,
            None if self.gap_pruned => MilpStatus::GapLimit,
            None => MilpStatus::Optimal,
        };
        Ok(self.finish(status))
    }

    fn screen(&mut self, sol: LpSolution) -> NodeResult {
        if self.prunable(sol.objective) {
            NodeResult::Pruned
        } else {
            NodeResult::Solved(sol)
        }
    }

    fn report(&self, observer: &mut dyn FnMut(&Progress)) {
        observer(&Progress {
            nodes: self.nodes,
            bound: self.open_bound(),
            incumbent: self.incumbent_obj,
            root_lp_objective: self.root_lp,
        });
    }

    /// Completes `x` into an incumbent when its occupancy is integral.
    fn try_incumbent(&mut self, x: &[f64]) -> bool {
        if !self.occupancy_cols.iter().all(|&j| residual(x[j]) <= INT_TOL) {
            return false;
        }
        let completed = self.complete(x);
        let obj = self.model.objective_value(&completed);
        if obj < self.incumbent_obj - PRUNE_TOL {
            self.incumbent_obj = obj;
            self.incumbent = Some(completed);
        }
        true
    }

    /// Heads for an integer point below `node`: raises the largest fractional
    /// edge flag to one (or drops it to zero if that fails), then rounds
    /// occupancy columns, re-solving after each fix until the occupancy is
    /// integral.
    fn dive(&mut self, solver: &mut LpSolver, node: &Node, sol: &LpSolution) -> Result<(), LpError> {
        let mut overrides = node.overrides();
        let mut x = sol.primal.clone();
        for _ in 0..DIVE_DEPTH {
            if self.try_incumbent(&x) || self.start.elapsed() >= self.params.time_limit {
                break;
            }
            // open the most used edge visit first; round occupancy after
            let flag = self
                .support_cols
                .iter()
                .copied()
                .filter(|&j| residual(x[j]) > INT_TOL)
                .max_by(|&a, &b| x[a].total_cmp(&x[b]).then(b.cmp(&a)));
            let pick = flag.or_else(|| {
                self.occupancy_cols
                    .iter()
                    .copied()
                    .filter(|&j| residual(x[j]) > INT_TOL)
                    .min_by(|&a, &b| residual(x[a]).total_cmp(&residual(x[b])).then(a.cmp(&b)))
            });
            let Some(j) = pick else { break };
            let near = if flag.is_some() { 1.0 } else { x[j].round() };
            let other = if near > x[j] { near - 1.0 } else { near + 1.0 };
            let mut moved = false;
            for v in [near, other] {
                overrides.push(BoundOverride::new(j, v, v));
                let s = solver.solve(&overrides)?;
                self.lp_iterations += s.iterations as u64;
                if s.status == LpStatus::Optimal && s.objective < self.cutoff() {
                    x = s.primal;
                    moved = true;
                    break;
                }
                overrides.pop();
            }
            if !moved {
                break;
            }
        }
        Ok(())
    }

    fn process(&mut self, node: Node, sol: LpSolution, solver: &mut LpSolver) -> Result<(), LpError> {
        self.try_incumbent(&sol.primal);
        if self.prunable(sol.objective) {
            return Ok(());
        }
        let Some(j) = self.choose(solver, &node, &sol)? else {
            return Ok(());
        };
        let x = &sol.primal;
        let v = x[j];
        let depth = node.depth + 1;
        let col = &self.model.columns[j];
        let down = Arc::new(Change {
            column: j,
            lower: col.lower,
            upper: v.floor(),
            parent: node.changes.clone(),
        });
        let up = Arc::new(Change {
            column: j,
            lower: v.ceil(),
            upper: col.upper,
            parent: node.changes,
        });
        let origin = |up: bool, frac: f64| Some(Origin { column: j, up, frac, parent_obj: sol.objective });
        self.push(sol.objective, depth, Some(down), origin(false, v - v.floor()));
        self.push(sol.objective, depth, Some(up), origin(true, v.ceil() - v));
        Ok(())
    }

    fn record(&mut self, column: usize, up: bool, frac: f64, gain: f64) {
        if frac <= INT_TOL || !gain.is_finite() {
            return;
        }
        let p = &mut self.pseudo[column];
        p.sum[usize::from(up)] += gain.max(0.0) / frac;
        p.count[usize::from(up)] += 1;
    }

    /// Estimated gain per unit in one direction; unseen columns take the
    /// mean over seen ones.
    fn unit_gain(&self, column: usize, up: bool) -> f64 {
        let d = usize::from(up);
        let p = &self.pseudo[column];
        if p.count[d] > 0 {
            return p.sum[d] / f64::from(p.count[d]);
        }
        let (sum, n) = self
            .pseudo
            .iter()
            .filter(|p| p.count[d] > 0)
            .fold((0.0, 0u32), |(s, n), p| (s + p.sum[d] / f64::from(p.count[d]), n + 1));
        if n == 0 {
            1.0
        } else {
            sum / f64::from(n)
        }
    }

    /// Branching column for a solved node, or `None` when nothing is
    /// fractional or both children of some column are infeasible.
    fn choose(&mut self, solver: &mut LpSolver, node: &Node, sol: &LpSolution) -> Result<Option<usize>, LpError> {
        let x = &sol.primal;
        if self.params.branching != Branching::Pseudocost {
            return Ok(self.branch_column(x));
        }
        let candidates: Vec<usize> = self.integer_cols.iter().copied().filter(|&j| residual(x[j]) > INT_TOL).collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        let score = |down: f64, up: f64| down.max(1e-6) * up.max(1e-6);
        let mut best: Option<(usize, f64)> = None;
        let mut strong: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&j| self.pseudo[j].count.iter().any(|&c| c < RELIABLE))
            .collect();
        strong.sort_by(|&a, &b| {
            let fa = (x[a] - x[a].floor() - 0.5).abs();
            let fb = (x[b] - x[b].floor() - 0.5).abs();
            fa.total_cmp(&fb).then(a.cmp(&b))
        });
        strong.truncate(STRONG_CANDIDATES);
        let base = node.overrides();
        let mut since_best = 0;
        for &j in &strong {
            let col = &self.model.columns[j];
            let f = x[j] - x[j].floor();
            let mut gains = [0.0; 2];
            for (k, up) in [false, true].into_iter().enumerate() {
                let mut ov = base.clone();
                ov.push(if up {
                    BoundOverride::new(j, x[j].ceil(), col.upper)
                } else {
                    BoundOverride::new(j, col.lower, x[j].floor())
                });
                let s = solver.solve_capped(&ov, STRONG_ITERS)?;
                self.lp_iterations += s.iterations as u64;
                gains[k] = match s.status {
                    LpStatus::Infeasible => f64::INFINITY,
                    LpStatus::Optimal | LpStatus::IterLimit => (s.objective - sol.objective).max(0.0),
                    LpStatus::Unbounded => 0.0,
                };
                self.record(j, up, if up { 1.0 - f } else { f }, gains[k]);
            }
            if gains.iter().all(|g| g.is_infinite()) {
                return Ok(None);
            }
            let sc = score(gains[0].min(1e12), gains[1].min(1e12));
            if best.is_none_or(|(_, b)| sc > b) {
                best = Some((j, sc));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= STRONG_LOOKAHEAD {
                    break;
                }
            }
        }
        for &j in &candidates {
            if strong.contains(&j) {
                continue;
            }
            let f = x[j] - x[j].floor();
            let sc = score(f * self.unit_gain(j, false), (1.0 - f) * self.unit_gain(j, true));
            if best.is_none_or(|(_, b)| sc > b) {
                best = Some((j, sc));
            }
        }
        Ok(best.map(|b| b.0))
    }

    fn branch_column(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.integer_cols {
            let r = residual(x[j]);
            if r <= INT_TOL {
                continue;
            }
            match self.params.branching {
                Branching::LowestIndex => return Some(j),
                Branching::MostFractional | Branching::Pseudocost => {
                    let score = (x[j] - x[j].floor() - 0.5).abs();
                    if best.is_none_or(|(_, s)| score < s) {
                        best = Some((j, score));
                    }
                }
            }
        }
        best.map(|b| b.0)
    }

    /// Cheapest completion of the integer occupancy in `x`: binaries set to
    /// their indicator values, cost columns lowered onto their tightest rows.
    fn complete(&self, x: &[f64]) -> Vec<f64> {
        let layout = &self.model.layout;
        let mut out = x.to_vec();
        for &j in &self.occupancy_cols {
            out[j] = out[j].round();
        }
        for t in 1..=layout.n_timesteps {
            let mut moving = false;
            for e in 0..layout.n_edges {
                let p = out[layout.p(layout.n_locations - layout.n_edges + e, t)];
                let used = p > 0.0;
                moving |= used;
                out[layout.phi(e, t)] = if used { 1.0 } else { 0.0 };
            }
            out[layout.psi(t)] = if moving { 1.0 } else { 0.0 };
        }
        for (j, rows) in &self.cost_rows {
            let mut need = self.model.columns[*j].lower;
            for &i in rows {
                let row = &self.model.rows[i];
                let mut rest = 0.0;
                let mut own = 0.0;
                for &(k, a) in &row.coeffs {
                    if k == *j {
                        own = a;
                    } else {
                        rest += a * out[k];
                    }
                }
                need = need.max((row.rhs - rest) / own);
            }
            out[*j] = need;
        }
        out
    }

    fn finish(self, status: MilpStatus) -> MilpSolution {
        let bound = match status {
            MilpStatus::Optimal => self.incumbent_obj,
            MilpStatus::Infeasible => f64::INFINITY,
            _ => self.open_bound().max(self.root_lp),
        };
        let bound = bound.min(self.incumbent_obj);
        MilpSolution {
            status,
            gap: relative_gap(self.incumbent_obj, bound),
            incumbent: self.incumbent,
            objective: self.incumbent_obj,
            bound,
            nodes: self.nodes,
            wall_time: self.start.elapsed(),
            root_lp_objective: self.root_lp,
            lp_iterations: self.lp_iterations,
        }
    }
}

fn is_int(v: f64) -> bool {
    v.is_finite() && v == v.round()
}

/// True when every integer-feasible point, with its cost columns lowered
/// onto their rows, has an integer objective: integer costs on integer
/// columns, and each costed continuous column bounded below only by rows
/// `x_j + (integer terms) >= integer`.
fn integral_objective(model: &MipModel) -> bool {
    let n = model.n_columns();
    let continuous = |j: usize| model.columns[j].integrality == Integrality::Continuous;
    for j in 0..n {
        let c = model.objective[j];
        if !is_int(c) || (continuous(j) && c < 0.0) {
            return false;
        }
        if continuous(j) && c > 0.0 && !(model.columns[j].lower == f64::NEG_INFINITY || is_int(model.columns[j].lower)) {
            return false;
        }
    }
    for row in &model.rows {
        let mut cont = row.coeffs.iter().filter(|c| continuous(c.0));
        match (cont.next(), cont.next()) {
            (None, _) => continue,
            (Some(&(j, a)), None) => {
                let others_int = row.coeffs.iter().all(|&(k, b)| k == j || is_int(b));
                if model.objective[j] == 0.0 || a != 1.0 || row.relation != Relation::Ge || !is_int(row.rhs) || !others_int {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

fn residual(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Solves a node, adding violated cutset rows to `solver` for a few rounds.
/// Returns the rows added so other workers can take them too.
fn solve_node(solver: &mut LpSolver, node: &Node, sep: Option<&Separator>) -> Result<(LpSolution, Vec<Row>), LpError> {
    let overrides = node.overrides();
    let mut sol = solver.solve(&overrides)?;
    let mut added = Vec::new();
    let Some(sep) = sep else {
        return Ok((sol, added));
    };
    for _ in 0..NODE_CUT_ROUNDS {
        if sol.status != LpStatus::Optimal {
            break;
        }
        let cuts = sep.separate(&sol.primal);
        if cuts.is_empty() {
            break;
        }
        solver.add_rows(&cuts);
        added.extend(cuts);
        let iterations = sol.iterations;
        sol = solver.solve(&overrides)?;
        sol.iterations += iterations;
    }
    Ok((sol, added))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::scenario::{EdgeParams, LocationId, Scenario};

    fn path3() -> Scenario {
        let mut s = Scenario::new(2, 4).with_time_weight(1.0);
        let v = s.add_nodes(3);
        s.add_undirected(EdgeParams { from: v[0], to: v[1], w: 5.0, a: 2, m: 3.0, r: 1.0 });
        s.add_undirected(EdgeParams { from: v[1], to: v[2], w: 4.0, a: 1, m: 0.0, r: 1.0 });
        s.add_start(LocationId::Node(v[0]), 2);
        s.add_goal(LocationId::Node(v[2]), 1);
        s
    }

    #[test]
    fn path_graph_optimum_by_hand() {
        // Both robots cross (0,1) together at t=2 (5, no shortfall) and
        // (1,2) at t=3 (4 - 1 = 3), time terms 2 + 3. Sending one robot
        // costs 8 + 4 on the edges instead.
        let model = build_model(&path3()).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 13.0).abs() < 1e-9, "{}", sol.objective);
        assert!(sol.root_lp_objective <= sol.bound + 1e-7);
        assert!(sol.bound <= sol.objective + 1e-7);
    }

    #[test]
    fn disconnected_goal_is_infeasible() {
        let mut s = Scenario::new(1, 1);
        let v = s.add_nodes(2);
        s.add_start(LocationId::Node(v[0]), 1);
        s.add_goal(LocationId::Node(v[1]), 1);
        let model = build_model(&s).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
        assert!(sol.incumbent.is_none());
    }

    #[test]
    fn repeated_runs_are_identical() {
        let model = build_model(&path3()).unwrap();
        let a = solve_milp(&model, &SolveParams::default()).unwrap();
        let b = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!(a.incumbent, b.incumbent);
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn node_limit_stops_early() {
        let model = build_model(&path3()).unwrap();
        let params = SolveParams { node_limit: 1, ..SolveParams::default() };
        let sol = solve_milp(&model, &params).unwrap();
        assert!(sol.nodes <= 1);
        assert!(matches!(sol.status, MilpStatus::NodeLimit | MilpStatus::Optimal));
    }

    #[test]
    fn implied_rows_keep_the_optimum() {
        let model = build_model(&path3()).unwrap();
        let with = solve_milp(&model, &SolveParams::default()).unwrap();
        let without = solve_milp(&model, &SolveParams { implied_rows: false, ..SolveParams::default() }).unwrap();
        assert_eq!(with.status, without.status);
        assert!((with.objective - without.objective).abs() < 1e-9);
    }

    #[test]
    fn threads_preserve_objective() {
        let model = build_model(&path3()).unwrap();
        let seq = solve_milp(&model, &SolveParams::default()).unwrap();
        let par = solve_milp(&model, &SolveParams { threads: 3, ..SolveParams::default() }).unwrap();
        assert_eq!(par.status, MilpStatus::Optimal);
        assert!((seq.objective - par.objective).abs() < 1e-9);
    }
}
