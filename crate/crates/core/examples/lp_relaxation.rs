//! The plain linear relaxation, the relaxation after implied rows, and the
//! integer optimum on the shipped fixtures.
//!
//! cargo run --release --example lp_relaxation

use teamplan::bnb::{solve_milp, SolveParams};
use teamplan::lp::solve_lp;
use teamplan::model::{build_model, implied_rows};
use teamplan::scenario::load_scenario;

fn main() {
    for name in ["small", "relay", "illustrative"] {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let scn = load_scenario(&path).unwrap();
        let model = build_model(&scn).unwrap();
        let plain = solve_lp(&model, &[]).unwrap();
        let mut tight = model.clone();
        tight.rows.extend(implied_rows(&model));
        let strengthened = solve_lp(&tight, &[]).unwrap();
        let milp = solve_milp(&model, &SolveParams::default()).unwrap();
        println!(
            "{name:<13} lp {:>9.3}  with implied rows {:>9.3}  optimum {:>6}",
            plain.objective, strengthened.objective, milp.objective
        );
    }
}
