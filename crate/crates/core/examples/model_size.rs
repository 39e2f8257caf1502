//! Column counts of the program for the four benchmark graph sizes, and
//! the fact that they do not depend on the number of robots.
//!
//! cargo run --example model_size [-- out.lp]

use teamplan::generate::{random_scenario, BENCH_SIZES};
use teamplan::model::{build_model, write_lp};

fn main() {
    println!("{:<13} {:>4} {:>4} {:>4} {:>8} {:>7} {:>8} {:>11} {:>5}", "size", "n_L", "n_O", "n_T", "columns", "binary", "integer", "continuous", "rows");
    for preset in BENCH_SIZES {
        let small = build_model(&random_scenario(&preset.config(10), 1)).unwrap();
        let large = build_model(&random_scenario(&preset.config(40), 1)).unwrap();
        assert_eq!(small.column_counts(), large.column_counts());
        let c = small.column_counts();
        println!(
            "{:<13} {:>4} {:>4} {:>4} {:>8} {:>7} {:>8} {:>11} {:>5}",
            preset.name,
            preset.n_locations(),
            preset.n_opportunities,
            preset.n_timesteps,
            c.total,
            c.binary,
            c.integer,
            c.continuous,
            small.n_rows()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let model = build_model(&random_scenario(&BENCH_SIZES[0].config(10), 1)).unwrap();
        std::fs::write(&path, write_lp(&model)).unwrap();
        println!("wrote {path}");
    }
}
