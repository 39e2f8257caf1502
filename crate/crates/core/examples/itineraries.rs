//! Split an aggregate plan into one route per robot and check that the
//! routes add back up to the plan.
//!
//! cargo run --release --example itineraries

use teamplan::assign::{assign_paths, is_move, stack};
use teamplan::bnb::{extract_plan, solve_milp, SolveParams};
use teamplan::export::itinerary_table;
use teamplan::model::build_model;
use teamplan::scenario::load_scenario;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/illustrative.json");
    let scn = load_scenario(path).unwrap();
    let model = build_model(&scn).unwrap();
    let sol = solve_milp(&model, &SolveParams::default()).unwrap();
    let plan = extract_plan(&sol, &model, &scn).unwrap();
    let robots = assign_paths(&plan, &scn).unwrap();
    print!("{}", itinerary_table(&scn, &robots));
    assert_eq!(stack(&robots, &scn), plan.occupancy);
    assert!(robots
        .iter()
        .all(|r| r.locations.windows(2).all(|w| is_move(&scn, w[0], w[1]))));
    println!("cumulative cost {:?}", plan.cumulative_costs());
}
