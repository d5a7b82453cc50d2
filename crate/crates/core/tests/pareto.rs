mod common;

use common::{fronts_oracle, random_points};
use proptest::prelude::*;
use smartfog::pareto::{non_dominated_sort, non_dominated_sort_with, pareto_front, ObjectiveVector, Sense};
use smartfog::Execution;

const MIXED: [Sense; 3] = [Sense::Maximize, Sense::Minimize, Sense::Maximize];

#[test]
fn two_hundred_points_match_peeling_oracle() {
    for seed in 0..10 {
        // coarse values force duplicates and partial ties
        let points = random_points(seed, 200, &MIXED, Some(12));
        let fronts = non_dominated_sort(&points).unwrap().fronts;
        assert_eq!(fronts, fronts_oracle(&points));
        assert_eq!(pareto_front(&points).unwrap(), fronts[0]);
    }
}

#[test]
fn execution_strategies_agree() {
    let points = random_points(3, 300, &MIXED, None);
    assert_eq!(
        non_dominated_sort_with(&points, Execution::Sequential).unwrap(),
        non_dominated_sort_with(&points, Execution::Parallel).unwrap()
    );
}

fn mixed_points() -> impl Strategy<Value = Vec<Vec<i32>>> {
    prop::collection::vec(prop::collection::vec(-20i32..20, 3), 1..40)
}

fn to_points(raw: &[Vec<i32>], senses: &[Sense]) -> Vec<ObjectiveVector> {
    raw.iter()
        .map(|r| ObjectiveVector::new(r.iter().map(|&v| v as f64).collect(), senses.to_vec()).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_oracle(raw in mixed_points()) {
        let points = to_points(&raw, &MIXED);
        prop_assert_eq!(non_dominated_sort(&points).unwrap().fronts, fronts_oracle(&points));
    }

    #[test]
    fn strictly_increasing_transform_keeps_fronts(raw in mixed_points()) {
        let points = to_points(&raw, &MIXED);
        let transformed: Vec<ObjectiveVector> = raw
            .iter()
            .map(|r| {
                let v = vec![(r[0] as f64).powi(3), (r[1] as f64 / 7.0).exp(), r[2] as f64 * 3.0 + 11.0];
                ObjectiveVector::new(v, MIXED.to_vec()).unwrap()
            })
            .collect();
        prop_assert_eq!(non_dominated_sort(&points).unwrap(), non_dominated_sort(&transformed).unwrap());
    }

    #[test]
    fn sense_flip_duality(raw in mixed_points(), column in 0usize..3) {
        let points = to_points(&raw, &MIXED);
        let mut senses = MIXED.to_vec();
        senses[column] = match senses[column] {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        };
        let flipped: Vec<ObjectiveVector> = raw
            .iter()
            .map(|r| {
                let mut v: Vec<f64> = r.iter().map(|&x| x as f64).collect();
                v[column] = -v[column];
                ObjectiveVector::new(v, senses.clone()).unwrap()
            })
            .collect();
        prop_assert_eq!(non_dominated_sort(&points).unwrap(), non_dominated_sort(&flipped).unwrap());
    }

    #[test]
    fn permutation_equivariance(raw in mixed_points(), rotate in 0usize..40) {
        let n = raw.len();
        let shift = rotate % n;
        let points = to_points(&raw, &MIXED);
        let permuted: Vec<ObjectiveVector> = (0..n).map(|i| points[(i + shift) % n].clone()).collect();
        let ranks = non_dominated_sort(&points).unwrap().ranks();
        let permuted_ranks = non_dominated_sort(&permuted).unwrap().ranks();
        for i in 0..n {
            prop_assert_eq!(permuted_ranks[i], ranks[(i + shift) % n]);
        }
    }
}
