//! Cross-validation of the two bound solvers with each other, with the
//! explicit-state oracle, and with widening/narrowing.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use workbench_core::bounds::{
    extract_upper_bounds, reachable_values, solve_exhaustive, solve_policy_iteration, split_count, OracleError,
    OracleOptions, DEFAULT_SPLIT_CAP,
};
use workbench_core::intervals::{analyze, AbstractEnv, Interval, IterationOptions};
use workbench_core::ir::{build_cfg, parse_program};
use workbench_core::random::{bound_system, fragment_program};

#[test]
fn solvers_agree_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 2000 {
        let sys = bound_system(&mut rng, 4, 3);
        if split_count(&sys) > 14 {
            continue;
        }
        let a = solve_exhaustive(&sys, DEFAULT_SPLIT_CAP).unwrap();
        let b = solve_policy_iteration(&sys).solution;
        assert_eq!(a, b, "\n{sys}");
        assert!(sys.is_fixpoint(&a), "\n{sys}");
        checked += 1;
    }
}

#[derive(Default, Debug)]
struct Tally {
    convex: usize,
    non_convex: usize,
    unbounded: usize,
    over_cap: usize,
}

#[test]
fn solvers_match_oracle_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = OracleOptions { range: (-40, 40), budget: 200_000 };
    let mut tally = Tally::default();
    while tally.convex < 300 {
        let src = fragment_program(&mut rng, 2);
        let g = build_cfg(&parse_program(&src).unwrap());
        let (entry_range, entry) = (BTreeMap::from([("i".to_string(), (-2, 3))]), Interval::finite(-2, 3));
        let values = match reachable_values(&g, "i", &entry_range, opts) {
            Ok(v) => v,
            Err(OracleError::RangeExceeded { .. }) => {
                tally.unbounded += 1;
                continue;
            }
            Err(e) => panic!("{e}\n{src}"),
        };
        let ex = extract_upper_bounds(&g, "i", entry).unwrap();
        let Ok(x) = solve_exhaustive(&ex.system, DEFAULT_SPLIT_CAP) else {
            tally.over_cap += 1;
            continue;
        };
        assert_eq!(x, solve_policy_iteration(&ex.system).solution, "\n{src}");
        let solved = ex.intervals(&x);
        let hulls: Vec<Interval> = values
            .iter()
            .map(|s| match (s.first(), s.last()) {
                (Some(&a), Some(&b)) => Interval::finite(a, b),
                _ => Interval::Bottom,
            })
            .collect();
        let convex = values.iter().all(|s| s.is_empty() || (s.last().unwrap() - s.first().unwrap()) as usize + 1 == s.len());
        if convex {
            tally.convex += 1;
            assert_eq!(solved, hulls, "\n{src}");
        } else {
            tally.non_convex += 1;
            for (s, h) in solved.iter().zip(&hulls) {
                assert!(h.leq(s), "\n{src}");
            }
        }
        let env = AbstractEnv::Env(BTreeMap::new()).with("i", entry);
        let widened = analyze(&g, &env, IterationOptions::default());
        for (l, s) in solved.iter().enumerate() {
            assert!(s.leq(&widened.envs[l].get("i")), "\n{src}");
        }
    }
    println!("{tally:?}");
}
