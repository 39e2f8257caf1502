//! Load every scenario under `fixtures/` and report what validation thinks.
//!
//! cargo run --example validate_files

use std::path::Path;

use teamplan::scenario::{load_scenario, ScenarioError};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut paths: Vec<_> = ["", "invalid"]
        .iter()
        .flat_map(|sub| std::fs::read_dir(root.join(sub)).unwrap())
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let name = path.strip_prefix(&root).unwrap().display();
        match load_scenario(&path) {
            Ok(scn) => println!(
                "{name}: ok ({} locations, {} robots, {} steps)",
                scn.n_locations(),
                scn.n_agents,
                scn.n_timesteps
            ),
            Err(ScenarioError::Invalid(report)) => {
                println!("{name}: rejected");
                for v in report.violations {
                    println!("    {v}");
                }
            }
            Err(e) => println!("{name}: unreadable: {e}"),
        }
    }
}
