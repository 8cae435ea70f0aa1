//! The exact focused analysis against the explicit-state oracle, and the
//! must/may prefilter's soundness, on random control-flow graphs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use workbench_core::cache::{
    analyze_approx, classify_approx, classify_exact, classify_oracle, classify_pipeline, ApproxClass, Classification,
    InitialCachePolicy, DEFAULT_STATE_BUDGET,
};
use workbench_core::random::access_cfg;

const POLICIES: [InitialCachePolicy; 2] = [InitialCachePolicy::Empty, InitialCachePolicy::Unknown];

#[test]
fn exact_equals_oracle_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut sites = 0;
    for _ in 0..400 {
        let g = access_cfg(&mut rng, 12, 6);
        for assoc in [1, 2, 4] {
            for policy in POLICIES {
                let oracle = classify_oracle(&g, assoc, policy, DEFAULT_STATE_BUDGET).unwrap();
                let exact = classify_exact(&g, assoc, policy);
                assert_eq!(exact, oracle, "N={assoc} {policy:?}\n{}", workbench_core::ir::render_access_graph(&g));
                sites += oracle.len();
            }
        }
    }
    assert!(sites > 1000);
}

#[test]
fn prefilter_is_sound_and_pipeline_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa99);
    for _ in 0..300 {
        let g = access_cfg(&mut rng, 10, 5);
        for assoc in 1..=4 {
            for policy in POLICIES {
                let oracle = classify_oracle(&g, assoc, policy, DEFAULT_STATE_BUDGET).unwrap();
                let bounds = analyze_approx(&g, assoc, policy);
                for s in g.access_sites() {
                    match classify_approx(bounds[s.src.0].as_ref(), s.block) {
                        ApproxClass::AlwaysHit => assert_eq!(oracle[&s.site], Classification::AlwaysHit),
                        ApproxClass::AlwaysMiss => assert_eq!(oracle[&s.site], Classification::AlwaysMiss),
                        ApproxClass::Unknown => {}
                    }
                }
                let pipeline = classify_pipeline(&g, assoc, policy);
                let classes: std::collections::BTreeMap<_, _> =
                    pipeline.sites.iter().map(|(&k, &(c, _))| (k, c)).collect();
                assert_eq!(classes, oracle);
            }
        }
    }
}
