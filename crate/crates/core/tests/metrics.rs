use cogscreen_core::clsmetrics::{confusion_f1, cumulative_gains, pr_curve, roc_auc, ScoredPrediction};
use cogscreen_core::corpus::Label;
use num_rational::Ratio;
use proptest::prelude::*;

/// Scores on a grid of eleven values so ties are common.
fn instance() -> impl Strategy<Value = Vec<ScoredPrediction>> {
    prop::collection::vec((any::<bool>(), 0u32..=10), 2..=30)
        .prop_filter("needs both classes", |v| v.iter().any(|x| x.0) && v.iter().any(|x| !x.0))
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (case, s))| {
                    let label = if case { Label::Case } else { Label::Control };
                    ScoredPrediction::new(format!("x{i:02}"), label, s as f64 / 10.0)
                })
                .collect()
        })
}

/// Mann-Whitney pair statistic in exact rational arithmetic.
fn pair_auc(preds: &[ScoredPrediction]) -> Ratio<u64> {
    let (mut num, mut pairs) = (Ratio::from_integer(0u64), 0u64);
    for p in preds.iter().filter(|p| p.true_label == Label::Case) {
        for n in preds.iter().filter(|p| p.true_label == Label::Control) {
            pairs += 1;
            if p.p_case > n.p_case {
                num += 1;
            } else if p.p_case == n.p_case {
                num += Ratio::new(1, 2);
            }
        }
    }
    num / pairs
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn auc_equals_pair_statistic(preds in instance()) {
        let auc = roc_auc(&preds).unwrap().summary.unwrap();
        prop_assert_eq!(auc, ratio_f64(pair_auc(&preds)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn strictly_monotone_transform_keeps_auc(preds in instance(), power in 0.2f64..5.0) {
        let moved: Vec<ScoredPrediction> = preds
            .iter()
            .map(|p| ScoredPrediction::new(p.id.clone(), p.true_label, p.p_case.powf(power)))
            .collect();
        let a = roc_auc(&preds).unwrap();
        let b = roc_auc(&moved).unwrap();
        prop_assert_eq!(a.summary, b.summary);
        prop_assert_eq!(a.points, b.points);
    }

    #[test]
    fn label_flip_duality(preds in instance()) {
        let flipped: Vec<ScoredPrediction> = preds
            .iter()
            .map(|p| {
                let l = if p.true_label == Label::Case { Label::Control } else { Label::Case };
                ScoredPrediction::new(p.id.clone(), l, 1.0 - p.p_case)
            })
            .collect();
        let a = roc_auc(&preds).unwrap().summary.unwrap();
        let b = roc_auc(&flipped).unwrap().summary.unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn roc_and_gains_endpoints(preds in instance()) {
        let roc = roc_auc(&preds).unwrap();
        prop_assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        prop_assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
        prop_assert!(roc.points.windows(2).all(|w| w[0].0 <= w[1].0));
        let g = cumulative_gains(&preds).unwrap();
        prop_assert_eq!(g.points.last(), Some(&(1.0, 1.0)));
        let pr = pr_curve(&preds).unwrap();
        prop_assert_eq!(pr.points.last().unwrap().0, 1.0);
    }
}

#[test]
fn f1_hand_oracle() {
    // 3 Case at 0.9 0.8 0.3, 2 Control at 0.6 0.1; threshold 0.5:
    // tp 2, fn 1, fp 1, tn 1 -> P = R = F1 = 2/3.
    let preds = [
        ScoredPrediction::new("a", Label::Case, 0.9),
        ScoredPrediction::new("b", Label::Case, 0.8),
        ScoredPrediction::new("c", Label::Case, 0.3),
        ScoredPrediction::new("d", Label::Control, 0.6),
        ScoredPrediction::new("e", Label::Control, 0.1),
    ];
    let c = confusion_f1(&preds, 0.5).unwrap();
    assert_eq!((c.tp, c.fp, c.tn, c.fn_), (2, 1, 1, 1));
    assert!((c.f1 - 2.0 / 3.0).abs() < 1e-15);
    // pairs: a,b beat both controls (4); c beats e only (1) -> 5/6.
    assert_eq!(roc_auc(&preds).unwrap().summary, Some(5.0 / 6.0));
}
