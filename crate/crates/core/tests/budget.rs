use codepix_core::{plan_compression, visual_token_count, BudgetError, PatchSpec};
use proptest::prelude::*;

/// Smallest |w*h - target| over every grid with w/h in [0.5, 2], by brute force.
fn oracle_best_distance(target: f64, limit: u64) -> f64 {
    let mut best = f64::INFINITY;
    for w in 1..=limit {
        for h in 1..=limit {
            if 2 * h >= w && h <= 2 * w {
                best = best.min(((w * h) as f64 - target).abs());
            }
        }
    }
    best
}

#[test]
fn base_resolution_tokens() {
    assert_eq!(visual_token_count(2240, 2240, PatchSpec::P14).unwrap(), 25_600);
    assert_eq!(visual_token_count(2240, 2240, PatchSpec::P16).unwrap(), 19_600);
    assert!(matches!(
        visual_token_count(2241, 2240, PatchSpec::P14),
        Err(BudgetError::NotDivisible { .. })
    ));
}

#[test]
fn worked_examples() {
    let p = plan_compression(440, 4.0, PatchSpec::P16, 1, 1.0).unwrap();
    assert_eq!(p.targets, vec![[160, 176]]);
    assert_eq!(p.achieved_visual_tokens, 110);
    let p = plan_compression(25_600, 1.0, PatchSpec::P14, 1, 1.0).unwrap();
    assert_eq!(p.targets, vec![[2240, 2240]]);
    assert_eq!(p.achieved_visual_tokens, 25_600);
}

#[test]
fn budget_grid_matches_exhaustive_oracle() {
    for t in [110u64, 440, 6400, 25_600] {
        for k in [1.0, 2.0, 4.0, 8.0] {
            for p in [PatchSpec::P14, PatchSpec::P16] {
                let plan = plan_compression(t, k, p, 1, 1.0).unwrap();
                let target = t as f64 / k;
                let (w, h) = plan.grid();
                let got = (plan.achieved_visual_tokens as f64 - target).abs();
                let limit = (2.0 * target).sqrt().ceil() as u64 * 2 + 2;
                assert_eq!(got, oracle_best_distance(target, limit), "T={t} k={k}");
                assert!(got <= w.max(h) as f64, "T={t} k={k} grid {w}x{h}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn planned_sizes_are_patch_multiples(t in 1u64..200_000, k in 1.0f64..16.0, p14 in any::<bool>(), pages in 1u32..4) {
        let patch = if p14 { PatchSpec::P14 } else { PatchSpec::P16 };
        match plan_compression(t, k, patch, pages, 1.0) {
            Ok(plan) => {
                prop_assert_eq!(plan.targets.len(), pages as usize);
                let mut sum = 0;
                for [w, h] in &plan.targets {
                    prop_assert_eq!(w % patch.patch_size, 0);
                    prop_assert_eq!(h % patch.patch_size, 0);
                    sum += visual_token_count(*w, *h, patch).unwrap();
                }
                prop_assert_eq!(sum, plan.achieved_visual_tokens);
            }
            Err(BudgetError::Infeasible { .. }) => prop_assert!((t as f64 / k) < pages as f64),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn single_page_is_optimal(t in 1u64..3_000, k in 1.0f64..8.0) {
        let target = t as f64 / k;
        prop_assume!(target >= 1.0);
        let plan = plan_compression(t, k, PatchSpec::P14, 1, 1.0).unwrap();
        let got = (plan.achieved_visual_tokens as f64 - target).abs();
        let limit = (2.0 * target).sqrt().ceil() as u64 * 2 + 2;
        prop_assert_eq!(got, oracle_best_distance(target, limit));
    }

    #[test]
    fn more_compression_never_costs_more(t in 64u64..50_000, k in 1u32..16) {
        let a = plan_compression(t, k as f64, PatchSpec::P16, 1, 1.0).unwrap();
        let b = plan_compression(t, (2 * k) as f64, PatchSpec::P16, 1, 1.0).unwrap();
        prop_assert!(b.achieved_visual_tokens <= a.achieved_visual_tokens);
    }
}
