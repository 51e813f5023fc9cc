use std::collections::BTreeSet;

use proptest::prelude::*;

use fairlens::global_explain::{coverage, submodular_pick_values};
use fairlens::lime::{fit_surrogate, rank_contributions, weight_for_disagreements, Contribution};
use fairlens::limeout::dropout_sets;
use fairlens::metrics::{GroupConfusion, Metric, MetricVector, PeMode};

fn confusion() -> impl Strategy<Value = GroupConfusion> {
    prop::collection::vec((0u8..2, 0u8..2, any::<bool>()), 0..40).prop_map(|rows| {
        let labels: Vec<u8> = rows.iter().map(|r| r.0).collect();
        let preds: Vec<u8> = rows.iter().map(|r| r.1).collect();
        let mask: Vec<bool> = rows.iter().map(|r| r.2).collect();
        GroupConfusion::from_predictions(&labels, &preds, &mask).unwrap()
    })
}

proptest! {
    #[test]
    fn metrics_are_bounded_and_antisymmetric(c in confusion(), conventional in any::<bool>()) {
        let mode = if conventional { PeMode::Conventional } else { PeMode::Paper };
        let v = MetricVector::compute("f", &c, mode);
        let w = MetricVector::compute("f", &c.swapped(), mode);
        for m in [Metric::Eo, Metric::Dp, Metric::Ea, Metric::Pe] {
            if let Some(x) = v.get(m) {
                prop_assert!((-1.0..=1.0).contains(&x));
                prop_assert_eq!(w.get(m), Some(-x));
            } else {
                prop_assert!(v.flags.iter().any(|f| f.starts_with(m.name())));
            }
        }
        if let Some(di) = v.di {
            prop_assert!(di >= 0.0);
        }
    }

    #[test]
    fn pick_respects_budget_and_never_loses_coverage(
        values in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 1..12),
        budget in 1usize..6,
    ) {
        let budget = budget.min(values.len());
        let picked = submodular_pick_values(&values, budget).unwrap();
        prop_assert_eq!(picked.len(), budget);
        let unique: BTreeSet<usize> = picked.iter().copied().collect();
        prop_assert_eq!(unique.len(), budget);
        for t in 1..picked.len() {
            prop_assert!(coverage(&values, &picked[..t]) <= coverage(&values, &picked[..=t]));
        }
    }

    #[test]
    fn ranking_is_by_magnitude(values in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        let cs: Vec<Contribution> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Contribution { feature: format!("f{i}"), value: v })
            .collect();
        let ranked = rank_contributions(cs);
        prop_assert!(ranked.windows(2).all(|w| w[0].value.abs() >= w[1].value.abs()));
    }

    #[test]
    fn kernel_decreases_with_disagreements(h in 0usize..30, sigma in 0.5f64..10.0) {
        let a = weight_for_disagreements(h, sigma);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(weight_for_disagreements(h + 1, sigma) < a);
    }

    #[test]
    fn dropout_sets_have_singletons_then_union(n in 0usize..6) {
        let flagged: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let sets = dropout_sets(&flagged);
        let expected = if n <= 1 { 1 } else { n + 1 };
        prop_assert_eq!(sets.len(), expected);
        prop_assert_eq!(sets.last().unwrap().len(), n);
    }

    #[test]
    fn surrogate_intercept_recovers_constant(c in -2.0f64..2.0, n in 5usize..40) {
        let design: Vec<Vec<f64>> = (0..n).map(|i| vec![(i % 2) as f64, ((i / 2) % 2) as f64]).collect();
        let s = fit_surrogate(&design, &vec![c; n], &vec![1.0; n], 1.0).unwrap();
        prop_assert!((s.intercept - c).abs() < 1e-9);
        prop_assert!(s.coefficients.iter().all(|a| a.abs() < 1e-9));
    }
}
