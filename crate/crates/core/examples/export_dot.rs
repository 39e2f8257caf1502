//! Write the illustrative scenario and each step of its optimal plan as
//! Graphviz files. Render with `dot -Tpng step_04.dot -o step_04.png`.
//!
//! cargo run --release --example export_dot [-- out_dir]

use std::path::PathBuf;

use teamplan::bnb::{extract_plan, solve_milp, SolveParams};
use teamplan::export::{plan_dots, scenario_dot};
use teamplan::model::build_model;
use teamplan::scenario::load_scenario;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dot_out".into()));
    let scn = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/illustrative.json")).unwrap();
    let model = build_model(&scn).unwrap();
    let plan = extract_plan(&solve_milp(&model, &SolveParams::default()).unwrap(), &model, &scn).unwrap();
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("scenario.dot"), scenario_dot(&scn)).unwrap();
    for (i, dot) in plan_dots(&scn, &plan).iter().enumerate() {
        std::fs::write(dir.join(format!("step_{:02}.dot", i + 1)), dot).unwrap();
    }
    println!("wrote {} files to {}", plan.n_timesteps() + 1, dir.display());
}
