//! One line per acceptance criterion. Exits non-zero if any fails.
//!
//! cargo test --test acceptance

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teamplan::assign::{assign_paths, is_move, stack};
use teamplan::bnb::{extract_plan, solve_milp, MilpStatus, SolveParams};
use teamplan::generate::{preset, random_scenario, small_scenario};
use teamplan::lp::{solve_lp, LpStatus};
use teamplan::model::build_model;
use teamplan::oracle::{oracle_solve, oracle_solve_with, OracleParams};
use teamplan::scenario::{
    edge_cost, overwatch_cost, Ablation, EdgeId, EdgeParams, LocationId, NodeId, OverwatchOpportunity, Scenario,
};
use teamplan::solution::SolutionFile;

const ENVELOPE_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-7;
const ILLUSTRATIVE_ORACLE_CAP: u64 = 100_000_000;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed <= budget, format!("{what} took {elapsed:.2?}, budget {budget:?}"))
}

fn optimal(scn: &Scenario) -> Result<(f64, teamplan::bnb::OccupancyPlan), String> {
    let model = build_model(scn).map_err(|e| e.to_string())?;
    let sol = solve_milp(&model, &SolveParams::default()).map_err(|e| e.to_string())?;
    ensure(sol.status == MilpStatus::Optimal, format!("status {:?}", sol.status))?;
    let plan = extract_plan(&sol, &model, scn).map_err(|e| e.to_string())?;
    Ok((sol.objective, plan))
}

fn column_counts() -> Check {
    let t0 = Instant::now();
    let cases = [("illustrative", 460), ("bounding", 1160), ("map1", 990), ("map2", 1872)];
    let mut seen = Vec::new();
    for (name, total) in cases {
        let p = preset(name).unwrap();
        let c = build_model(&random_scenario(&p.config(10), 1)).unwrap().column_counts();
        let (n_l, n_e, n_o, n_t) = (p.n_locations(), p.n_edges, p.n_opportunities, p.n_timesteps as usize);
        ensure(c.total == total, format!("{name}: {} columns, want {total}", c.total))?;
        ensure(c.binary == n_t * (1 + n_e), format!("{name}: binary {}", c.binary))?;
        ensure(c.integer == n_t * n_l, format!("{name}: integer {}", c.integer))?;
        ensure(c.continuous == n_t * (n_e + n_o), format!("{name}: continuous {}", c.continuous))?;
        seen.push(format!("{total}"));
    }
    let fixture = build_model(&common::load("illustrative.json")).unwrap().n_columns();
    ensure(fixture == 460, format!("illustrative fixture has {fixture} columns"))?;
    within(t0.elapsed(), Duration::from_secs(1), "building")?;
    Ok(format!("columns {} exact, split exact", seen.join("/")))
}

fn oracle_equivalence() -> Check {
    let t0 = Instant::now();
    let mut compared = 0;
    for seed in 0..64 {
        let scn = small_scenario(seed);
        ensure(scn.n_nodes() <= 4 && scn.n_agents <= 3 && scn.n_timesteps <= 4, format!("seed {seed} too large"))?;
        let exact = oracle_solve(&scn).map_err(|e| format!("seed {seed}: oracle {e}"))?;
        let (objective, plan) = optimal(&scn).map_err(|e| format!("seed {seed}: milp {e}"))?;
        ensure(
            plan.total_cost() == exact.objective && (objective - exact.objective).abs() <= 1e-9,
            format!("seed {seed}: milp {objective} oracle {}", exact.objective),
        )?;
        compared += 1;
    }
    within(t0.elapsed(), Duration::from_secs(60), "cross-check")?;
    Ok(format!("{compared} instances equal, {:.2?}", t0.elapsed()))
}

fn envelopes() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let draws = 1000;
    let mut worst = 0.0f64;
    for i in 0..draws {
        let n_agents = rng.gen_range(1..=12u32);
        let a = rng.gen_range(1..=n_agents);
        let r = f64::from(rng.gen_range(0..=20u32)) / 4.0;
        let m = if rng.gen_bool(0.3) { r } else { r + f64::from(rng.gen_range(0..=40u32)) / 4.0 };
        let alpha = rng.gen_range(1..=n_agents);
        let gamma = f64::from(rng.gen_range(0..=12u32)) / 4.0;
        let omega = f64::from(alpha) * (gamma + f64::from(rng.gen_range(1..=40u32)) / 4.0);
        let reward = omega + gamma * f64::from(n_agents - alpha);
        let w = r * f64::from(n_agents - a) + reward + 1.0 + f64::from(rng.gen_range(0..=100u32));
        let edge = EdgeParams { from: NodeId(0), to: NodeId(1), w, a, m, r };
        let opp = OverwatchOpportunity { watcher: NodeId(2), watched: EdgeId(0), omega, alpha, gamma };
        let (_, model) = common::envelope_model(&edge, Some(opp.clone()), n_agents);
        for p in 0..=n_agents {
            let want = edge_cost(&edge, p, n_agents).unwrap();
            let got = common::model_edge_cost(&model, p);
            worst = worst.max((want - got).abs());
            ensure((want - got).abs() <= ENVELOPE_TOL, format!("draw {i}: edge p={p} model {got} exact {want}"))?;
            for occupied in [false, true] {
                let want = overwatch_cost(&opp, p, occupied, n_agents).unwrap();
                let got = common::model_overwatch_cost(&model, p, occupied);
                worst = worst.max((want - got).abs());
                ensure(
                    (want - got).abs() <= ENVELOPE_TOL,
                    format!("draw {i}: overwatch rho={p} busy={occupied} model {got} exact {want}"),
                )?;
            }
        }
    }
    within(t0.elapsed(), Duration::from_secs(5), "envelope suite")?;
    Ok(format!("{draws} draws, max deviation {worst:e} <= {ENVELOPE_TOL:e}, {:.2?}", t0.elapsed()))
}

fn illustrative() -> Check {
    let scn = common::load("illustrative.json");
    let (objective, plan) = optimal(&scn)?;
    let params = OracleParams { cap: ILLUSTRATIVE_ORACLE_CAP, threads: 1 };
    let exact = oracle_solve_with(&scn, &params).map_err(|e| e.to_string())?;
    ensure(objective == exact.objective, format!("milp {objective} oracle {}", exact.objective))?;
    let target = LocationId::Node(scn.node_by_key(5).unwrap());
    ensure(plan.count(&scn, target, scn.n_timesteps) >= 1, "nobody at node 5 at the last step")?;
    let n_nodes = scn.n_nodes();
    let cumulative = plan.cumulative_costs();
    let last_traffic = plan
        .occupancy
        .iter()
        .rposition(|c| c[n_nodes..].iter().any(|&p| p > 0))
        .unwrap_or(0);
    ensure(
        cumulative[last_traffic..].iter().all(|&c| c == cumulative[last_traffic]),
        format!("cumulative cost moves after step {}: {cumulative:?}", last_traffic + 1),
    )?;
    Ok(format!(
        "milp = oracle = {objective}, goal met, flat after step {} of {}",
        last_traffic + 1,
        scn.n_timesteps
    ))
}

fn lp_bounds() -> Check {
    let mut lines = Vec::new();
    for (name, scn) in common::fixtures() {
        let model = build_model(&scn).unwrap();
        let lp = solve_lp(&model, &[]).map_err(|e| e.to_string())?;
        let sol = solve_milp(&model, &SolveParams::default()).map_err(|e| e.to_string())?;
        if sol.status == MilpStatus::Infeasible {
            ensure(
                lp.status == LpStatus::Infeasible || sol.incumbent.is_none(),
                format!("{name}: infeasible with an incumbent"),
            )?;
            lines.push(format!("{name} infeasible"));
            continue;
        }
        ensure(lp.status == LpStatus::Optimal, format!("{name}: lp {:?}", lp.status))?;
        ensure(lp.objective <= sol.bound + BOUND_TOL, format!("{name}: lp {} > bound {}", lp.objective, sol.bound))?;
        ensure(
            sol.root_lp_objective <= sol.bound + BOUND_TOL,
            format!("{name}: root {} > bound {}", sol.root_lp_objective, sol.bound),
        )?;
        ensure(
            sol.bound <= sol.objective + BOUND_TOL,
            format!("{name}: bound {} > incumbent {}", sol.bound, sol.objective),
        )?;
        lines.push(format!("{name} {:.3}<={}<={}", lp.objective, sol.bound, sol.objective));
    }
    Ok(lines.join(", "))
}

fn desk_scale() -> Check {
    let p = preset("map2").unwrap();
    let scn = random_scenario(&p.config(10), 1);
    let model = build_model(&scn).unwrap();
    ensure(model.n_columns() == 1872, format!("{} columns", model.n_columns()))?;
    let params = SolveParams { threads: 1, ..SolveParams::default() };
    let sol = solve_milp(&model, &params).map_err(|e| e.to_string())?;
    ensure(sol.status == MilpStatus::Optimal, format!("status {:?} after {:.2?}", sol.status, sol.wall_time))?;
    within(sol.wall_time, Duration::from_secs(60), "map2 solve")?;
    let twenty = build_model(&random_scenario(&p.config(20), 1)).unwrap();
    ensure(twenty.column_counts() == model.column_counts(), "column count depends on n_A")?;
    Ok(format!(
        "map2 seed 1 optimal {} in {:.2?} ({} nodes), n_A=20 same {} columns",
        sol.objective,
        sol.wall_time,
        sol.nodes,
        twenty.n_columns()
    ))
}

fn assignment() -> Check {
    let mut solved = 0;
    for (name, scn) in common::fixtures() {
        let model = build_model(&scn).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        if sol.incumbent.is_none() {
            continue;
        }
        let plan = extract_plan(&sol, &model, &scn).map_err(|e| format!("{name}: {e}"))?;
        let robots = assign_paths(&plan, &scn).map_err(|e| format!("{name}: {e}"))?;
        ensure(robots.len() == scn.n_agents as usize, format!("{name}: {} itineraries", robots.len()))?;
        ensure(stack(&robots, &scn) == plan.occupancy, format!("{name}: itineraries do not stack to the plan"))?;
        ensure(
            robots.iter().all(|r| r.locations.windows(2).all(|w| is_move(&scn, w[0], w[1]))),
            format!("{name}: illegal move"),
        )?;
        let first = SolutionFile::from_milp(&scn, &model, &sol).unwrap();
        let again = SolutionFile::from_milp(&scn, &model, &solve_milp(&model, &SolveParams::default()).unwrap()).unwrap();
        let strip = |f: &SolutionFile| {
            let mut f = f.clone();
            f.stats.wall_time_s = 0.0;
            f.to_json_pretty()
        };
        ensure(strip(&first) == strip(&again), format!("{name}: repeated runs differ"))?;
        solved += 1;
    }
    Ok(format!("{solved} solved fixtures reconstruct exactly, stencil-valid, repeatable"))
}

fn ablation() -> Check {
    let scn = common::load("illustrative.json");
    let solve = |a: Ablation| optimal(&scn.masked(&a)).map(|(o, _)| o);
    let mut pairs = Vec::new();
    for no_vulnerability in [false, true] {
        for other in [false, true] {
            let base = Ablation { no_overwatch: true, no_vulnerability, no_teaming: other };
            let with = Ablation { no_overwatch: false, ..base };
            let (off, on) = (solve(base)?, solve(with)?);
            ensure(on <= off, format!("overwatch raises {off} -> {on} ({base:?})"))?;
            pairs.push(format!("{off}->{on}"));
            let base = Ablation { no_teaming: true, no_vulnerability, no_overwatch: other };
            let with = Ablation { no_teaming: false, ..base };
            let (off, on) = (solve(base)?, solve(with)?);
            ensure(on <= off, format!("teaming raises {off} -> {on} ({base:?})"))?;
            pairs.push(format!("{off}->{on}"));
        }
    }
    let bare = scn.masked(&Ablation::all());
    let team = solve(Ablation::all())?;
    let mut single = bare.clone();
    single.n_agents = 1;
    single.starts = vec![(bare.starts[0].0, 1)];
    single.goals = vec![(bare.goals[0].0, 1)];
    let lone = oracle_solve(&single).map_err(|e| e.to_string())?.objective;
    ensure(team == lone, format!("masked optimum {team}, single-robot shortest path {lone}"))?;
    Ok(format!("pairs {}; all masked {team} = single robot {lone}", pairs.join(" ")))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 variable counts", column_counts),
        ("2 oracle equivalence", oracle_equivalence),
        ("3 cost envelopes", envelopes),
        ("4 illustrative scenario", illustrative),
        ("5 lp bound ordering", lp_bounds),
        ("6 desk-scale performance", desk_scale),
        ("7 assignment soundness", assignment),
        ("8 ablation monotonicity", ablation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
