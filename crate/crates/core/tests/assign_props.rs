use proptest::prelude::*;
use teamplan::assign::{assign_paths, is_move, stack, RobotItinerary};
use teamplan::generate::small_scenario;
use teamplan::oracle::oracle_solve;
use teamplan::scenario::Scenario;

fn sound(robots: &[RobotItinerary], scn: &Scenario, occupancy: &[Vec<u32>]) -> bool {
    stack(robots, scn) == occupancy
        && robots.iter().all(|r| {
            r.locations.len() == scn.n_timesteps as usize
                && r.locations.windows(2).all(|w| is_move(scn, w[0], w[1]))
                && scn.starts.iter().any(|&(l, _)| l == r.locations[0])
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn itineraries_rebuild_the_plan(seed in 0..100_000u64) {
        let scn = small_scenario(seed);
        let plan = oracle_solve(&scn).unwrap().plan;
        let robots = assign_paths(&plan, &scn).unwrap();
        prop_assert_eq!(robots.len(), scn.n_agents as usize);
        prop_assert!(sound(&robots, &scn, &plan.occupancy));
        prop_assert_eq!(assign_paths(&plan, &scn).unwrap(), robots);
    }

    #[test]
    fn any_relabelling_of_robots_is_sound(seed in 0..100_000u64, order in any::<u64>()) {
        let scn = small_scenario(seed);
        let plan = oracle_solve(&scn).unwrap().plan;
        let mut robots = assign_paths(&plan, &scn).unwrap();
        let mut ids: Vec<u32> = (0..robots.len() as u32).collect();
        let mut k = order;
        for i in (1..ids.len()).rev() {
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1);
            ids.swap(i, (k >> 33) as usize % (i + 1));
        }
        for (r, id) in robots.iter_mut().zip(ids) {
            r.robot = id;
        }
        robots.sort_by_key(|r| r.robot);
        prop_assert!(sound(&robots, &scn, &plan.occupancy));
    }
}
