use proptest::prelude::*;
use teamplan::bnb::{solve_milp, MilpStatus, SolveParams};
use teamplan::generate::small_scenario;
use teamplan::lp::{solve_lp, BoundOverride, LpSolver, LpStatus};
use teamplan::model::{build_model, implied_rows, Integrality};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn relaxation_is_a_feasible_lower_bound(seed in 0..100_000u64) {
        let scn = small_scenario(seed);
        let model = build_model(&scn).unwrap();
        let lp = solve_lp(&model, &[]).unwrap();
        prop_assert_eq!(lp.status, LpStatus::Optimal);
        for row in &model.rows {
            prop_assert!(row.violation(&lp.primal) <= 1e-6, "{:?}", row.tag);
        }
        for (j, c) in model.columns.iter().enumerate() {
            prop_assert!(lp.primal[j] >= c.lower - 1e-6 && lp.primal[j] <= c.upper + 1e-6);
        }
        let milp = solve_milp(&model, &SolveParams::default()).unwrap();
        prop_assert_eq!(milp.status, MilpStatus::Optimal);
        prop_assert!(lp.objective <= milp.objective + 1e-7);
    }

    #[test]
    fn implied_rows_keep_the_optimum(seed in 0..100_000u64) {
        let scn = small_scenario(seed);
        let model = build_model(&scn).unwrap();
        let milp = solve_milp(&model, &SolveParams::default()).unwrap();
        let x = milp.incumbent.unwrap();
        for row in implied_rows(&model) {
            prop_assert!(row.violation(&x) <= 1e-6, "{:?}", row.tag);
        }
        let plain = SolveParams { implied_rows: false, ..SolveParams::default() };
        let other = solve_milp(&model, &plain).unwrap();
        prop_assert!((other.objective - milp.objective).abs() <= 1e-7);
    }

    #[test]
    fn warm_resolve_matches_cold(seed in 0..100_000u64, pick in any::<prop::sample::Index>(), up in any::<bool>()) {
        let scn = small_scenario(seed);
        let model = build_model(&scn).unwrap();
        let ints: Vec<usize> = (0..model.n_columns())
            .filter(|&j| model.columns[j].integrality != Integrality::Continuous)
            .collect();
        let j = ints[pick.index(ints.len())];
        let c = &model.columns[j];
        let v = if up { c.upper.min(1.0) } else { c.lower };
        let fix = [BoundOverride::new(j, v, v)];
        let mut warm = LpSolver::new(&model);
        warm.solve(&[]).unwrap();
        let a = warm.solve(&fix).unwrap();
        let b = solve_lp(&model, &fix).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-6 * b.objective.abs().max(1.0));
        }
    }
}
