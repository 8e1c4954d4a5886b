//! Binary classification metrics with Case as the positive class.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("no predictions")]
    Empty,
    #[error("only one class present; ROC needs both")]
    SingleClass,
    #[error("no positive (case) examples")]
    NoPositives,
    #[error("p_case {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("seed {seed} reports metrics {found:?}, expected {expected:?}")]
    InconsistentKeys { seed: usize, expected: Vec<String>, found: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub id: String,
    pub true_label: Label,
    pub p_case: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ScoredPrediction {
    pub fn new(id: impl Into<String>, true_label: Label, p_case: f64) -> Self {
        Self { id: id.into(), true_label, p_case, seed: None }
    }

    fn positive(&self) -> bool {
        self.true_label == Label::Case
    }
}

fn check(preds: &[ScoredPrediction]) -> Result<(), MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    match preds.iter().find(|p| !(0.0..=1.0).contains(&p.p_case)) {
        Some(p) => Err(MetricsError::OutOfRange(p.p_case)),
        None => Ok(()),
    }
}

/// a / b, or 0 when b = 0.
fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Confusion {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = safe_div(tp as f64, (tp + fp) as f64);
        let recall = safe_div(tp as f64, (tp + fn_) as f64);
        let f1 = safe_div(2.0 * precision * recall, precision + recall);
        Self { tp, fp, tn, fn_, precision, recall, f1 }
    }

    pub fn accuracy(&self) -> f64 {
        safe_div((self.tp + self.tn) as f64, (self.tp + self.fp + self.tn + self.fn_) as f64)
    }
}

/// Confusion counts from hard labels (predicted, true).
pub fn confusion_from_labels(pairs: impl IntoIterator<Item = (Label, Label)>) -> Confusion {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (pred, truth) in pairs {
        match (pred, truth) {
            (Label::Case, Label::Case) => tp += 1,
            (Label::Case, Label::Control) => fp += 1,
            (Label::Control, Label::Control) => tn += 1,
            (Label::Control, Label::Case) => fn_ += 1,
        }
    }
    Confusion::from_counts(tp, fp, tn, fn_)
}

/// `p_case >= threshold` predicts Case.
pub fn confusion_f1(preds: &[ScoredPrediction], threshold: f64) -> Result<Confusion, MetricsError> {
    check(preds)?;
    Ok(confusion_from_labels(preds.iter().map(|p| (if p.p_case >= threshold { Label::Case } else { Label::Control }, p.true_label))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    Pr,
    Gains,
    PpvProfile,
    SensitivityProfile,
    Density,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
            CurveKind::Gains => "gains",
            CurveKind::PpvProfile => "ppv_profile",
            CurveKind::SensitivityProfile => "sensitivity_profile",
            CurveKind::Density => "density",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub kind: CurveKind,
    /// Free-form series name, e.g. the class of a density histogram.
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Area under the curve where one is defined (ROC AUC, average precision).
    pub summary: Option<f64>,
    /// Set when the series has no data (for instance an absent class).
    #[serde(default)]
    pub empty: bool,
}

impl CurveSeries {
    fn new(kind: CurveKind, label: &str, points: Vec<(f64, f64)>, summary: Option<f64>) -> Self {
        Self { kind, label: label.to_string(), points, summary, empty: false }
    }
}

/// Distinct scores, descending, with positive and negative counts at each.
fn score_groups(preds: &[ScoredPrediction]) -> Vec<(f64, u64, u64)> {
    let mut sorted: Vec<&ScoredPrediction> = preds.iter().collect();
    sorted.sort_by(|a, b| b.p_case.total_cmp(&a.p_case));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for p in sorted {
        let (pos, neg) = if p.positive() { (1, 0) } else { (0, 1) };
        match groups.last_mut() {
            Some(g) if g.0 == p.p_case => {
                g.1 += pos;
                g.2 += neg;
            }
            _ => groups.push((p.p_case, pos, neg)),
        }
    }
    groups
}

/// ROC curve from (0,0) to (1,1) over thresholds at each distinct score,
/// with trapezoidal AUC. Ties between a positive and a negative score
/// contribute half a concordant pair.
pub fn roc_auc(preds: &[ScoredPrediction]) -> Result<CurveSeries, MetricsError> {
    check(preds)?;
    let p = preds.iter().filter(|x| x.positive()).count() as u64;
    let n = preds.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area, in units of 1/(P N): sum of (fp1 - fp0) (tp1 + tp0)
    let mut twice_area: u128 = 0;
    for (_, gp, gn) in score_groups(preds) {
        let (tp0, fp0) = (tp, fp);
        tp += gp;
        fp += gn;
        twice_area += (fp - fp0) as u128 * (tp + tp0) as u128;
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    let auc = twice_area as f64 / (2 * p as u128 * n as u128) as f64;
    Ok(CurveSeries::new(CurveKind::Roc, "roc", points, Some(auc)))
}

/// Precision/recall at each distinct-score threshold in descending score
/// order, ending at recall 1. Summary is average precision.
pub fn pr_curve(preds: &[ScoredPrediction]) -> Result<CurveSeries, MetricsError> {
    check(preds)?;
    let p = preds.iter().filter(|x| x.positive()).count();
    if p == 0 {
        return Err(MetricsError::NoPositives);
    }
    let (mut tp, mut taken) = (0u64, 0u64);
    let mut points = Vec::new();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (_, gp, gn) in score_groups(preds) {
        tp += gp;
        taken += gp + gn;
        let recall = tp as f64 / p as f64;
        let precision = tp as f64 / taken as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push((recall, precision));
        if tp as usize == p {
            break;
        }
    }
    Ok(CurveSeries::new(CurveKind::Pr, "pr", points, Some(ap)))
}

/// Cumulative gains: samples taken one at a time in descending p_case (ties
/// by ascending id); starts at (0,0).
pub fn cumulative_gains(preds: &[ScoredPrediction]) -> Result<CurveSeries, MetricsError> {
    check(preds)?;
    let p = preds.iter().filter(|x| x.positive()).count();
    if p == 0 {
        return Err(MetricsError::NoPositives);
    }
    let mut sorted: Vec<&ScoredPrediction> = preds.iter().collect();
    sorted.sort_by(|a, b| b.p_case.total_cmp(&a.p_case).then_with(|| a.id.cmp(&b.id)));
    let total = sorted.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    let mut hit = 0usize;
    for (i, s) in sorted.iter().enumerate() {
        if s.positive() {
            hit += 1;
        }
        points.push(((i + 1) as f64 / total, hit as f64 / p as f64));
    }
    Ok(CurveSeries::new(CurveKind::Gains, "gains", points, None))
}

/// Default percentile grid 0, 5, ..., 100.
pub fn default_percentiles() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 5.0).collect()
}

/// PPV and sensitivity when predicting Case for `p_case >= t`, where `t` is
/// the given percentile of the score distribution (linear interpolation).
pub fn score_profiles(preds: &[ScoredPrediction], percentiles: &[f64]) -> Result<(CurveSeries, CurveSeries), MetricsError> {
    check(preds)?;
    let mut scores: Vec<f64> = preds.iter().map(|p| p.p_case).collect();
    scores.sort_by(f64::total_cmp);
    let thresholds: Vec<(f64, f64)> =
        percentiles.iter().map(|&q| (q, crate::stats::quantile_sorted(&scores, (q / 100.0).clamp(0.0, 1.0)))).collect();
    let (ppv, sens) = profiles_at(preds, &thresholds);
    Ok((
        CurveSeries::new(CurveKind::PpvProfile, "ppv", ppv, None),
        CurveSeries::new(CurveKind::SensitivityProfile, "sensitivity", sens, None),
    ))
}

/// PPV and sensitivity at explicit score thresholds; x is the threshold.
pub fn threshold_profiles(preds: &[ScoredPrediction], thresholds: &[f64]) -> Result<(CurveSeries, CurveSeries), MetricsError> {
    check(preds)?;
    let pairs: Vec<(f64, f64)> = thresholds.iter().map(|&t| (t, t)).collect();
    let (ppv, sens) = profiles_at(preds, &pairs);
    Ok((
        CurveSeries::new(CurveKind::PpvProfile, "ppv", ppv, None),
        CurveSeries::new(CurveKind::SensitivityProfile, "sensitivity", sens, None),
    ))
}

type Points = Vec<(f64, f64)>;

fn profiles_at(preds: &[ScoredPrediction], xs_thresholds: &[(f64, f64)]) -> (Points, Points) {
    let mut ppv = Vec::new();
    let mut sens = Vec::new();
    for &(x, t) in xs_thresholds {
        let c = confusion_from_labels(preds.iter().map(|p| (if p.p_case >= t { Label::Case } else { Label::Control }, p.true_label)));
        ppv.push((x, c.precision));
        sens.push((x, c.recall));
    }
    (ppv, sens)
}

/// Per-class normalized histograms of p_case over [0,1]. The last bin is
/// closed on the right. Points are (bin center, mass).
pub fn density(preds: &[ScoredPrediction], bins: usize) -> Vec<CurveSeries> {
    let bins = bins.max(1);
    Label::ALL
        .iter()
        .map(|&label| {
            let mut counts = vec![0usize; bins];
            let mut n = 0usize;
            for p in preds.iter().filter(|p| p.true_label == label) {
                let b = ((p.p_case * bins as f64).floor() as usize).min(bins - 1);
                counts[b] += 1;
                n += 1;
            }
            let points = counts.iter().enumerate().map(|(i, &c)| ((i as f64 + 0.5) / bins as f64, safe_div(c as f64, n as f64))).collect();
            let mut s = CurveSeries::new(CurveKind::Density, label.as_str(), points, None);
            s.empty = n == 0;
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample std (n-1; 0 for one seed) of each metric across seeds.
/// All seeds must report the same metric names.
pub fn aggregate_seeds(per_seed: &[BTreeMap<String, f64>]) -> Result<BTreeMap<String, MeanStd>, MetricsError> {
    let first = per_seed.first().ok_or(MetricsError::Empty)?;
    let keys: Vec<String> = first.keys().cloned().collect();
    for (i, m) in per_seed.iter().enumerate() {
        let found: Vec<String> = m.keys().cloned().collect();
        if found != keys {
            return Err(MetricsError::InconsistentKeys { seed: i, expected: keys, found });
        }
    }
    Ok(keys
        .into_iter()
        .map(|k| {
            let xs: Vec<f64> = per_seed.iter().map(|m| m[&k]).collect();
            (k, MeanStd { mean: crate::stats::mean(&xs), std: crate::stats::sample_std(&xs) })
        })
        .collect())
}

/// One seed's test metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
    pub metrics: BTreeMap<String, f64>,
}

/// Evaluation of one model configuration on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_kind: String,
    pub dataset: String,
    pub per_seed: Vec<SeedEntry>,
    pub aggregate: BTreeMap<String, MeanStd>,
    pub curves: Vec<CurveSeries>,
    /// Scores the curves were drawn from (averaged over seeds when several).
    pub predictions: Vec<ScoredPrediction>,
    /// Scalar side information such as an unparseable-response rate.
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

impl EvalReport {
    pub fn curve(&self, kind: CurveKind, label: &str) -> Option<&CurveSeries> {
        self.curves.iter().find(|c| c.kind == kind && c.label == label)
    }
}

/// f1, precision, recall, accuracy and (when both classes are present) auc.
pub fn metric_set(preds: &[ScoredPrediction]) -> Result<BTreeMap<String, f64>, MetricsError> {
    let c = confusion_f1(preds, 0.5)?;
    let mut m = BTreeMap::from([
        ("f1".to_string(), c.f1),
        ("precision".to_string(), c.precision),
        ("recall".to_string(), c.recall),
        ("accuracy".to_string(), c.accuracy()),
    ]);
    if let Ok(roc) = roc_auc(preds) {
        m.insert("auc".to_string(), roc.summary.unwrap_or(0.0));
    }
    Ok(m)
}

/// All curve families that are defined for `preds`: ROC and the score
/// profiles need both classes, PR and gains need a positive.
pub fn evaluation_curves(preds: &[ScoredPrediction]) -> Vec<CurveSeries> {
    let mut out = Vec::new();
    if let Ok(c) = roc_auc(preds) {
        out.push(c);
    }
    if let Ok(c) = pr_curve(preds) {
        out.push(c);
    }
    if let Ok(c) = cumulative_gains(preds) {
        out.push(c);
    }
    let both = Label::ALL.iter().all(|l| preds.iter().any(|p| p.true_label == *l));
    if both {
        if let Ok((ppv, sens)) = score_profiles(preds, &default_percentiles()) {
            out.push(ppv);
            out.push(sens);
        }
    }
    out.extend(density(preds, 20));
    out
}

/// Mean p_case per id across seeds, in the id order of the first seed.
pub fn average_over_seeds(per_seed: &[Vec<ScoredPrediction>]) -> Vec<ScoredPrediction> {
    let Some(first) = per_seed.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let xs: Vec<f64> = per_seed.iter().map(|s| s[i].p_case).collect();
            ScoredPrediction { id: p.id.clone(), true_label: p.true_label, p_case: crate::stats::mean(&xs), seed: None }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preds(items: &[(Label, f64)]) -> Vec<ScoredPrediction> {
        items.iter().enumerate().map(|(i, (l, p))| ScoredPrediction::new(format!("s{i:02}"), *l, *p)).collect()
    }

    use Label::{Case as C, Control as H};

    #[test]
    fn f1_hand_counts() {
        let c = Confusion::from_counts(3, 1, 0, 2);
        assert_eq!(c.precision, 0.75);
        assert_eq!(c.recall, 0.6);
        assert!((c.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f1_all_correct_and_all_control() {
        let p = preds(&[(C, 0.9), (H, 0.1)]);
        assert_eq!(confusion_f1(&p, 0.5).unwrap().f1, 1.0);
        let p = preds(&[(C, 0.1), (H, 0.1)]);
        let c = confusion_f1(&p, 0.5).unwrap();
        assert_eq!((c.recall, c.f1, c.precision), (0.0, 0.0, 0.0));
    }

    #[test]
    fn threshold_is_inclusive() {
        let c = confusion_f1(&preds(&[(C, 0.5)]), 0.5).unwrap();
        assert_eq!(c.tp, 1);
    }

    #[test]
    fn auc_hand_cases() {
        let p = preds(&[(C, 0.9), (C, 0.4), (H, 0.6), (H, 0.1)]);
        assert_eq!(roc_auc(&p).unwrap().summary, Some(0.75));
        let p = preds(&[(C, 0.3), (C, 0.3), (H, 0.3)]);
        assert_eq!(roc_auc(&p).unwrap().summary, Some(0.5));
        let p = preds(&[(C, 0.8), (H, 0.2)]);
        let r = roc_auc(&p).unwrap();
        assert_eq!(r.summary, Some(1.0));
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(roc_auc(&preds(&[(C, 0.8)])).unwrap_err(), MetricsError::SingleClass);
    }

    #[test]
    fn pr_hand_cases() {
        let p = preds(&[(C, 0.9), (C, 0.8), (H, 0.1)]);
        assert!(pr_curve(&p).unwrap().points.iter().all(|&(_, pr)| pr == 1.0));
        let p = preds(&[(H, 0.9), (H, 0.8), (H, 0.7), (C, 0.1)]);
        assert_eq!(pr_curve(&p).unwrap().points.last(), Some(&(1.0, 0.25)));
        assert_eq!(pr_curve(&preds(&[(H, 0.1)])).unwrap_err(), MetricsError::NoPositives);
    }

    #[test]
    fn gains_hand_cases() {
        let p = preds(&[(C, 0.9), (C, 0.8), (H, 0.2), (H, 0.1)]);
        let g = cumulative_gains(&p).unwrap();
        assert_eq!(g.points[2], (0.5, 1.0));
        // equal scores: id order s00..s03 = C, H, C, H
        let p = preds(&[(C, 0.5), (H, 0.5), (C, 0.5), (H, 0.5)]);
        let ys: Vec<f64> = cumulative_gains(&p).unwrap().points.iter().map(|p| p.1).collect();
        assert_eq!(ys, vec![0.0, 0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn profiles_hand_grid() {
        let p = preds(&[(C, 0.9), (C, 0.7), (H, 0.5), (C, 0.3), (H, 0.1)]);
        let (ppv, sens) = score_profiles(&p, &[0.0, 50.0, 100.0]).unwrap();
        // thresholds: 0.1, 0.5, 0.9
        assert_eq!(sens.points, vec![(0.0, 1.0), (50.0, 2.0 / 3.0), (100.0, 1.0 / 3.0)]);
        assert_eq!(ppv.points, vec![(0.0, 0.6), (50.0, 2.0 / 3.0), (100.0, 1.0)]);
        let (ppv, _) = threshold_profiles(&p, &[0.95]).unwrap();
        assert_eq!(ppv.points, vec![(0.95, 0.0)]);
    }

    #[test]
    fn density_cases() {
        let d = density(&preds(&[(C, 0.5), (C, 0.5)]), 20);
        assert_eq!(d[0].points.iter().filter(|p| p.1 > 0.0).count(), 1);
        assert_eq!(d[0].points[10].1, 1.0);
        assert!(d[1].empty);
        let grid: Vec<(Label, f64)> = (0..20).map(|i| (H, (i as f64 + 0.5) / 20.0)).collect();
        let d = density(&preds(&grid), 20);
        assert!(d[1].points.iter().all(|p| p.1 == 0.05));
        let d = density(&preds(&[(C, 1.0)]), 20);
        assert_eq!(d[0].points[19].1, 1.0);
    }

    #[test]
    fn aggregate_hand() {
        let m = |v: f64| BTreeMap::from([("f1".to_string(), v)]);
        let a = aggregate_seeds(&[m(80.0), m(90.0)]).unwrap();
        assert_eq!(a["f1"].mean, 85.0);
        assert!((a["f1"].std - 7.0710678118654755).abs() < 1e-12);
        assert_eq!(aggregate_seeds(&[m(80.0)]).unwrap()["f1"].std, 0.0);
        let other = BTreeMap::from([("auc".to_string(), 1.0)]);
        assert!(aggregate_seeds(&[m(1.0), other]).is_err());
    }
}
