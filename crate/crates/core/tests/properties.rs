use kgsem::eval::{hits_at_k, mean_rank, mrr, rank_scores};
use kgsem::{Side, Triple};
use proptest::prelude::*;

fn query(n: usize) -> impl Strategy<Value = (Vec<f64>, usize, Vec<usize>)> {
    (prop::collection::vec(-5i32..5, n), 0..n, prop::collection::btree_set(0..n, 0..n / 2)).prop_map(
        |(scores, gt, filter)| {
            let filter = filter.into_iter().filter(|&e| e != gt).collect();
            (scores.into_iter().map(f64::from).collect(), gt, filter)
        },
    )
}

proptest! {
    #[test]
    fn hits_grow_with_k(ranks in prop::collection::vec(1u32..40, 1..30)) {
        let ranks: Vec<f64> = ranks.into_iter().map(|r| f64::from(r) / 2.0 + 0.5).collect();
        let mut prev = 0.0;
        for k in 1..45 {
            let h = hits_at_k(&ranks, k).unwrap();
            prop_assert!(h >= prev && (0.0..=1.0).contains(&h));
            prev = h;
        }
        prop_assert_eq!(prev, 1.0);
        prop_assert!(mrr(&ranks).unwrap() >= 1.0 / mean_rank(&ranks).unwrap() - 1e-12);
    }

    #[test]
    fn increasing_transforms_do_not_change_rankings((scores, gt, filter) in query(30), k in 1usize..10) {
        let q = Triple::new(gt, 0, 0);
        let survivors = 30 - filter.len();
        prop_assume!(survivors >= k);
        let a = rank_scores(&scores, &q, Side::Head, &filter, k).unwrap();
        let moved: Vec<f64> = scores.iter().map(|s| 3.0 * s + 7.0).collect();
        let b = rank_scores(&moved, &q, Side::Head, &filter, k).unwrap();
        prop_assert_eq!(a.rank, b.rank);
        prop_assert_eq!(&a.top_k, &b.top_k);
        prop_assert!(a.rank >= 1.0 && a.rank <= survivors as f64);
    }

    #[test]
    fn distinct_scores_give_the_optimistic_rank(perm in Just((0..25).collect::<Vec<usize>>()).prop_shuffle(), gt in 0usize..25) {
        let scores: Vec<f64> = perm.iter().map(|&p| p as f64).collect();
        let q = Triple::new(0, 0, gt);
        let r = rank_scores(&scores, &q, Side::Tail, &[], 5).unwrap();
        let better = scores.iter().filter(|&&s| s > scores[gt]).count();
        prop_assert_eq!(r.rank, 1.0 + better as f64);
        let mut order: Vec<usize> = (0..25).collect();
        order.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]));
        prop_assert_eq!(&r.top_k[..], &order[..5]);
    }
}
