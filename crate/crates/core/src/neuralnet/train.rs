use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::mlp::{cross_entropy, dlogits, p_case};
use super::{class_index, Model, ModelInput, ModelKind, NetError, TrainConfig};
use crate::clsmetrics::{
    aggregate_seeds, average_over_seeds, confusion_f1, evaluation_curves, metric_set, EvalReport, ScoredPrediction, SeedEntry,
};
use crate::corpus::{split_view, Corpus, Label, Split};
use crate::embeddings::{content_key, EmbeddingStore};
use crate::lingfeat::{FeatureTable, Standardizer};

/// One split's examples. `emb` and `ling` rows align with `ids`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitData {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub emb: Option<Vec<Vec<f64>>>,
    /// Raw (unstandardized) linguistic features.
    pub ling: Option<Vec<Vec<f64>>>,
}

impl SplitData {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn input(&self, i: usize) -> ModelInput<'_> {
        ModelInput { emb: self.emb.as_ref().map(|e| e[i].as_slice()), ling: self.ling.as_ref().map(|l| l[i].as_slice()) }
    }

    fn check(&self, kind: ModelKind, name: &'static str) -> Result<(), NetError> {
        if self.is_empty() {
            return Err(NetError::EmptySplit(name));
        }
        let n = self.len();
        if self.labels.len() != n {
            return Err(NetError::Shape(format!("{name}: {} labels for {n} ids", self.labels.len())));
        }
        let parts = [(kind.uses_embeddings(), &self.emb, "embedding"), (kind.uses_features(), &self.ling, "feature")];
        for (needed, rows, what) in parts {
            match rows {
                Some(r) if r.len() != n => return Err(NetError::Shape(format!("{name}: {} {what} rows for {n} ids", r.len()))),
                None if needed => return Err(NetError::Shape(format!("{name}: {what} inputs required"))),
                _ => {}
            }
        }
        Ok(())
    }

    fn dim(rows: &Option<Vec<Vec<f64>>>) -> usize {
        rows.as_ref().and_then(|r| r.first()).map(Vec::len).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainData {
    pub train: SplitData,
    pub validation: SplitData,
    pub test: SplitData,
    /// Dataset name recorded in the report.
    pub name: String,
    /// Embedding provider recorded in checkpoints.
    pub emb_provider: Option<String>,
}

impl TrainData {
    /// Splits of `corpus` (id order) with feature rows from `features` and
    /// sentence vectors from `store` under `provider`. Embeddings are looked
    /// up by transcript id, then by content key.
    pub fn assemble(
        corpus: &Corpus,
        features: Option<&FeatureTable>,
        embeddings: Option<(&EmbeddingStore, &str)>,
        name: &str,
    ) -> Result<Self, NetError> {
        let split = |s: Split| -> Result<SplitData, NetError> {
            let items = split_view(corpus, s);
            let mut out = SplitData {
                ids: items.iter().map(|t| t.id.clone()).collect(),
                labels: items.iter().map(|t| t.label).collect(),
                ..SplitData::default()
            };
            if let Some(table) = features {
                out.ling = Some(
                    items
                        .iter()
                        .map(|t| {
                            table.row(&t.id).map(<[f64]>::to_vec).ok_or_else(|| NetError::Shape(format!("no feature row for {}", t.id)))
                        })
                        .collect::<Result<_, _>>()?,
                );
            }
            if let Some((store, provider)) = embeddings {
                out.emb = Some(
                    items
                        .iter()
                        .map(|t| {
                            store
                                .get_sentence(provider, &t.id)
                                .or_else(|_| store.get_sentence(provider, &content_key(&t.text)))
                                .map(<[f64]>::to_vec)
                                .map_err(|e| NetError::Shape(format!("{}: {e}", t.id)))
                        })
                        .collect::<Result<_, _>>()?,
                );
            }
            Ok(out)
        };
        Ok(TrainData {
            train: split(Split::Train)?,
            validation: split(Split::Validation)?,
            test: split(Split::Test)?,
            name: name.to_string(),
            emb_provider: embeddings.map(|(_, p)| p.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// One per successful seed, in seed-list order.
    pub checkpoints: Vec<Checkpoint>,
    pub histories: Vec<(u64, Vec<EpochLog>)>,
    pub failures: Vec<SeedFailure>,
    pub report: EvalReport,
}

struct SeedRun {
    checkpoint: Checkpoint,
    history: Vec<EpochLog>,
}

fn standardize(split: &SplitData, s: Option<&Standardizer>) -> SplitData {
    let mut out = split.clone();
    if let (Some(s), Some(rows)) = (s, &split.ling) {
        out.ling = Some(s.transform_all(rows));
    }
    out
}

fn predictions(model: &Model, data: &SplitData) -> Result<Vec<ScoredPrediction>, NetError> {
    (0..data.len()).map(|i| Ok(ScoredPrediction::new(data.ids[i].clone(), data.labels[i], p_case(model.logits(data.input(i))?)))).collect()
}

/// Trains one seed. RNG streams: 0 = init, 1 = shuffling, 2 = dropout.
fn train_seed(
    kind: ModelKind,
    cfg: &TrainConfig,
    train: &SplitData,
    val: &SplitData,
    seed: u64,
    stdz: Option<&Standardizer>,
    emb_provider: Option<&str>,
) -> Result<SeedRun, NetError> {
    let stream = |s: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(s);
        r
    };
    let (mut init_rng, mut shuffle_rng, mut dropout_rng) = (stream(0), stream(1), stream(2));
    let mut model = Model::init(kind, cfg, SplitData::dim(&train.emb), SplitData::dim(&train.ling), &mut init_rng);
    let mut params = model.to_flat();
    let mut opt = super::AdamW::new(super::AdamWHyper::new(cfg.lr, cfg.weight_decay), params.len());
    let mut grad = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let cache = model.forward(train.input(i), Some(&mut dropout_rng))?;
                let target = class_index(train.labels[i]);
                batch_loss += cross_entropy(cache.logits(), target);
                let mut d = dlogits(cache.logits(), target);
                d.iter_mut().for_each(|v| *v *= scale);
                model.accumulate_grad(&cache, d, &mut grad);
            }
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                let pnorm = params.iter().map(|p| p * p).sum::<f64>().sqrt();
                let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                return Err(NetError::NonFiniteLoss {
                    seed,
                    epoch,
                    batch: b,
                    detail: format!("loss {batch_loss}, |params| {pnorm:.4e}, |grad| {gnorm:.4e}"),
                });
            }
            loss_sum += batch_loss;
            opt.step(&mut params, &grad);
            model.set_flat(&params);
        }
        let val_f1 = confusion_f1(&predictions(&model, val)?, 0.5)?.f1;
        history.push(EpochLog { epoch, train_loss: loss_sum / train.len() as f64, val_f1 });
        if best.as_ref().is_none_or(|(f, _, _)| val_f1 > *f) {
            best = Some((val_f1, epoch, params.clone()));
        }
    }
    let (val_f1, best_epoch, best_params) = best.expect("at least one epoch");
    model.set_flat(&best_params);
    let checkpoint = Checkpoint::from_model(&model, cfg, seed, best_epoch, val_f1, stdz.cloned(), emb_provider);
    Ok(SeedRun { checkpoint, history })
}

/// Runs the multi-seed protocol: per seed, 50 (configurable) epochs of
/// AdamW on shuffled mini-batches, checkpoint at the epoch with the highest
/// validation F1 (earliest on ties), then test evaluation from the
/// checkpoint. Seeds run in parallel; a seed whose loss turns non-finite is
/// reported as a failure while the others continue.
pub fn train(kind: ModelKind, data: &TrainData, cfg: &TrainConfig) -> Result<TrainOutcome, NetError> {
    cfg.validate()?;
    data.train.check(kind, "train")?;
    data.validation.check(kind, "validation")?;
    data.test.check(kind, "test")?;
    let stdz = match (&data.train.ling, kind.uses_features()) {
        (Some(rows), true) => Some(Standardizer::fit(rows).map_err(|e| NetError::Config(e.to_string()))?),
        _ => None,
    };
    let train = standardize(&data.train, stdz.as_ref());
    let val = standardize(&data.validation, stdz.as_ref());

    let runs: Vec<(u64, Result<SeedRun, NetError>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| (seed, train_seed(kind, cfg, &train, &val, seed, stdz.as_ref(), data.emb_provider.as_deref())))
        .collect();

    let mut checkpoints = Vec::new();
    let mut histories = Vec::new();
    let mut failures = Vec::new();
    for (seed, run) in runs {
        match run {
            Ok(r) => {
                checkpoints.push(r.checkpoint);
                histories.push((seed, r.history));
            }
            Err(e) => {
                tracing::error!(seed, error = %e, "seed aborted");
                failures.push(SeedFailure { seed, message: e.to_string() });
            }
        }
    }
    if checkpoints.is_empty() {
        let msgs: Vec<String> = failures.iter().map(|f| f.message.clone()).collect();
        return Err(NetError::AllSeedsFailed(msgs.join("; ")));
    }
    let report = evaluate(&checkpoints, &data.test, kind.as_str(), &data.name)?;
    Ok(TrainOutcome { checkpoints, histories, failures, report })
}

/// Test-set report from checkpoints: per-seed metrics, mean and sample std,
/// and curves drawn from the seed-averaged Case probabilities.
pub fn evaluate(checkpoints: &[Checkpoint], test: &SplitData, model_kind: &str, dataset: &str) -> Result<EvalReport, NetError> {
    let mut per_seed = Vec::new();
    let mut all_preds = Vec::new();
    for ck in checkpoints {
        let predictor = ck.predictor()?;
        let preds: Vec<ScoredPrediction> = (0..test.len())
            .map(|i| {
                let p = predictor.predict_proba(test.input(i))?;
                Ok(ScoredPrediction { seed: Some(ck.seed), ..ScoredPrediction::new(test.ids[i].clone(), test.labels[i], p) })
            })
            .collect::<Result<_, NetError>>()?;
        let mut metrics = metric_set(&preds)?;
        metrics.insert("val_f1".into(), ck.val_f1);
        per_seed.push(SeedEntry { seed: ck.seed, best_epoch: Some(ck.best_epoch), metrics });
        all_preds.push(preds);
    }
    let maps: Vec<BTreeMap<String, f64>> = per_seed.iter().map(|s| s.metrics.clone()).collect();
    let aggregate = aggregate_seeds(&maps)?;
    let predictions = average_over_seeds(&all_preds);
    let curves = evaluation_curves(&predictions);
    Ok(EvalReport {
        model_kind: model_kind.to_string(),
        dataset: dataset.to_string(),
        per_seed,
        aggregate,
        curves,
        predictions,
        extra: BTreeMap::new(),
    })
}
