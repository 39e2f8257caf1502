//! Exhaustive search over team states against branch and bound on random
//! small instances.
//!
//! cargo run --release --example oracle_crosscheck [-- count]

use teamplan::bnb::{solve_milp, MilpStatus, SolveParams};
use teamplan::generate::small_scenario;
use teamplan::model::build_model;
use teamplan::oracle::{oracle_solve, state_space_estimate};

fn main() {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut agree = 0;
    for seed in 0..count {
        let scn = small_scenario(seed);
        let exact = oracle_solve(&scn).map(|s| s.objective).ok();
        let sol = solve_milp(&build_model(&scn).unwrap(), &SolveParams::default()).unwrap();
        let milp = (sol.status == MilpStatus::Optimal).then_some(sol.objective);
        let same = match (exact, milp) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-6,
            (None, None) => true,
            _ => false,
        };
        agree += u64::from(same);
        println!(
            "seed {seed:>3}: nodes {} robots {} steps {} states {:>6}  oracle {:>6}  milp {:>6}{}",
            scn.n_nodes(),
            scn.n_agents,
            scn.n_timesteps,
            state_space_estimate(&scn),
            exact.map_or("-".into(), |v| v.to_string()),
            milp.map_or("-".into(), |v| v.to_string()),
            if same { "" } else { "  MISMATCH" }
        );
    }
    println!("{agree}/{count} agree");
}
