//! Switch overwatch, vulnerability and teaming on and off on the
//! illustrative scenario and compare the optimal plans.
//!
//! cargo run --release --example ablation

use teamplan::bnb::{extract_plan, solve_milp, SolveParams};
use teamplan::model::build_model;
use teamplan::scenario::{load_scenario, Ablation};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/illustrative.json");
    let scn = load_scenario(path).unwrap();
    let cases = [
        ("none", Ablation::all()),
        ("overwatch", Ablation { no_overwatch: false, ..Ablation::all() }),
        ("overwatch+vulnerability", Ablation { no_teaming: true, ..Ablation::default() }),
        ("all three", Ablation::default()),
    ];
    for (name, ablation) in cases {
        let masked = scn.masked(&ablation);
        let model = build_model(&masked).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        let plan = extract_plan(&sol, &model, &masked).unwrap();
        let moving: Vec<u32> = plan
            .occupancy
            .iter()
            .map(|c| c[masked.n_nodes()..].iter().sum())
            .collect();
        println!("{name:<24} objective {:>6}  robots moving per step {:?}", sol.objective, moving);
    }
}
