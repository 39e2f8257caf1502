//! Build a small scenario in code, solve it, and print each robot's route.
//!
//! cargo run --example quickstart

use teamplan::assign::assign_paths;
use teamplan::bnb::{extract_plan, solve_milp, SolveParams};
use teamplan::model::build_model;
use teamplan::scenario::{EdgeParams, LocationId, OverwatchOpportunity, Scenario};

fn main() {
    // three robots, six steps, one unit of cost per step any robot is moving
    let mut scn = Scenario::new(3, 6).with_time_weight(1.0);
    let v = scn.add_nodes(4);
    let plain = |from, to, w| EdgeParams { from, to, w, a: 1, m: 0.0, r: 1.0 };
    scn.add_undirected(plain(v[0], v[1], 8.0));
    scn.add_undirected(plain(v[0], v[2], 5.0));
    // the road into node 4 is exposed: travel in pairs or pay 12 per missing robot
    let (exposed, _) = scn.add_undirected(EdgeParams { from: v[1], to: v[3], w: 30.0, a: 2, m: 12.0, r: 1.0 });
    scn.add_undirected(plain(v[2], v[1], 4.0));
    // node 3 overlooks that road
    scn.add_overwatch(OverwatchOpportunity { watcher: v[2], watched: exposed, omega: 10.0, alpha: 1, gamma: 1.0 });
    scn.add_start(LocationId::Node(v[0]), 3);
    scn.add_goal(LocationId::Node(v[3]), 2);

    let model = build_model(&scn).expect("scenario is valid");
    let sol = solve_milp(&model, &SolveParams::default()).expect("lp solver");
    println!("{:?}: objective {} after {} nodes", sol.status, sol.objective, sol.nodes);

    let plan = extract_plan(&sol, &model, &scn).expect("integral plan");
    for (t, c) in plan.breakdown.iter().enumerate() {
        println!(
            "step {}: traversal {:>5} overwatch {:>5} time {:>3}",
            t + 1,
            c.traversal,
            c.overwatch,
            c.time
        );
    }
    for robot in assign_paths(&plan, &scn).expect("plan conserves robots") {
        let route: Vec<String> = robot.locations.iter().map(|&l| scn.loc_label(l)).collect();
        println!("robot {}: {}", robot.robot, route.join(" -> "));
    }
}
