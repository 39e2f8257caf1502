//! Solve a random instance of one benchmark size with progress output.
//!
//! cargo run --release --example benchmark -- [size] [seed] [robots]
//! sizes: illustrative, bounding, map1, map2

use std::time::Instant;

use teamplan::bnb::{solve_milp_observed, SolveParams};
use teamplan::generate::{preset, random_scenario};
use teamplan::model::build_model;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map_or("map2", String::as_str);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let robots = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10);
    let size = preset(name).expect("unknown size");
    let scn = random_scenario(&size.config(robots), seed);
    let model = build_model(&scn).unwrap();
    println!("{name} seed {seed}: {} columns, {} rows", model.n_columns(), model.n_rows());
    let mut last = Instant::now();
    let sol = solve_milp_observed(&model, &SolveParams::default(), &mut |p| {
        if last.elapsed().as_secs_f64() >= 1.0 {
            println!("  nodes {:>6}  bound {:>10.3}  incumbent {:>10.3}", p.nodes, p.bound, p.incumbent);
            last = Instant::now();
        }
    })
    .unwrap();
    println!(
        "{:?}: objective {} bound {} root lp {:.3} nodes {} lp iterations {} in {:.2?}",
        sol.status, sol.objective, sol.bound, sol.root_lp_objective, sol.nodes, sol.lp_iterations, sol.wall_time
    );
}
