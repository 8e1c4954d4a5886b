//! One function per subcommand. Each reads the manifest (and whatever
//! earlier stages wrote under the output directory) and records its outputs
//! in the context.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cogscreen_core::augment::{
    augment_training_set, export_finetune_dataset, generate_synthetic, GenerationOptions, HttpChatClient, SampleBounds, SyntheticCorpus,
};
use cogscreen_core::clsmetrics::EvalReport;
use cogscreen_core::corpus::{corpus_stats, split_view, Corpus, Label, Split};
use cogscreen_core::embeddings::{content_key, fetch_remote, load_store, write_store, EmbeddingStore, Granularity, PseudoEmbedder};
use cogscreen_core::lingfeat::{write_feature_csv, FeatureTable};
use cogscreen_core::llmjudge::{evaluate_judge, JudgeConfig, JudgeItem};
use cogscreen_core::net::HttpClient;
use cogscreen_core::neuralnet::{train, ModelKind, TrainData, TrainOutcome};
use cogscreen_core::textsim::{
    bertscore_multi, bleu, overlap_report, reference_sets, tsne, BertScoreReport, BleuReport, PointGroup, TsneConfig,
};
use cogscreen_core::toy::{toy_corpus, ToyShape};
use serde::Serialize;
use serde_json::json;

use crate::config::EmbeddingSource;
use crate::context::Ctx;
use crate::error::CliError;

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| CliError::stage("runtime", e))
}

fn csv_bytes(rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| CliError::stage("csv", e))?;
    }
    w.into_inner().map_err(|e| CliError::stage("csv", e))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn ingest(ctx: &mut Ctx) -> Result<serde_json::Value, CliError> {
    let corpus = ctx.corpus()?;
    ctx.write_json("corpus.json", &corpus)?;
    let mut rows = vec![["split", "label", "n", "mean", "std", "min", "max", "q1", "median", "q3"].map(String::from).to_vec()];
    for s in corpus_stats(&corpus) {
        rows.push(vec![
            s.split.to_string(),
            s.label.to_string(),
            s.n.to_string(),
            num(s.mean),
            num(s.std),
            s.min.to_string(),
            s.max.to_string(),
            num(s.q1),
            num(s.median),
            num(s.q3),
        ]);
    }
    ctx.write("corpus_stats.csv", &csv_bytes(&rows)?)?;
    let counts: BTreeMap<String, usize> = corpus.split_counts().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok(json!({ "transcripts": corpus.len(), "splits": counts }))
}

fn feature_table(ctx: &Ctx, corpus: &Corpus) -> Result<FeatureTable, CliError> {
    let fx = ctx.extractor()?;
    let items: Vec<(&str, &str)> = corpus.transcripts.iter().map(|t| (t.id.as_str(), t.text.as_str())).collect();
    fx.table(&items).map_err(|e| CliError::stage("features", e))
}

pub fn features(ctx: &mut Ctx) -> Result<serde_json::Value, CliError> {
    let corpus = ctx.corpus()?;
    let table = feature_table(ctx, &corpus)?;
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &table).map_err(|e| CliError::stage("features", e))?;
    ctx.write("features.csv", &buf)?;
    Ok(json!({ "rows": table.len(), "columns": cogscreen_core::lingfeat::FEATURE_COUNT }))
}

/// Sentence (and token) vectors for every transcript of `corpus`, keyed by
/// id for pseudo-embeddings; the persistent store otherwise.
fn embeddings(ctx: &Ctx, corpus: &Corpus) -> Result<(EmbeddingStore, String), CliError> {
    match &ctx.cfg.embedding {
        EmbeddingSource::Pseudo { dim } => {
            let emb = PseudoEmbedder::new(*dim);
            let mut store = EmbeddingStore::new();
            for t in &corpus.transcripts {
                store.insert(emb.embed(&t.id, &t.text)).map_err(|e| CliError::stage("embed", e))?;
            }
            Ok((store, emb.provider))
        }
        EmbeddingSource::Store { provider, .. } => {
            let path = ctx.cfg.embeddings_path();
            let store = load_store(&path).map_err(|e| CliError::stage("embed", format!("{e} (run embed-fetch first)")))?;
            Ok((store, provider.clone()))
        }
    }
}

fn synthetic_path(ctx: &Ctx, generator: &str) -> PathBuf {
    ctx.path(format!("synthetic/{generator}.jsonl"))
}

fn load_synthetic(ctx: &Ctx, generator: &str) -> Result<SyntheticCorpus, CliError> {
    let path = synthetic_path(ctx, generator);
    SyntheticCorpus::load(&path).map_err(|e| CliError::stage("augment", format!("{e} (run augment-generate first)")))
}

/// Generators whose synthetic corpus exists, in config order.
fn available_generators(ctx: &Ctx) -> Vec<String> {
    ctx.cfg.augment.generators.iter().map(|g| g.name.clone()).filter(|g| synthetic_path(ctx, g).exists()).collect()
}

pub fn embed_fetch(ctx: &mut Ctx, tokens: bool) -> Result<serde_json::Value, CliError> {
    let (provider, remote) = match &ctx.cfg.embedding {
        EmbeddingSource::Store { provider, remote: Some(r) } => (provider.clone(), r.clone()),
        _ => return Err(CliError::Config("embed-fetch needs embedding.source = \"store\" with an [embedding.remote] table".into())),
    };
    let path = ctx.cfg.embeddings_path();
    let mut store = if path.exists() { load_store(&path).map_err(|e| CliError::stage("embed", e))? } else { EmbeddingStore::new() };
    let mut texts: Vec<String> = ctx.corpus()?.transcripts.into_iter().map(|t| t.text).collect();
    for g in available_generators(ctx) {
        texts.extend(load_synthetic(ctx, &g)?.samples.into_iter().map(|s| s.text));
    }
    let mut seen = std::collections::HashSet::new();
    texts.retain(|t| {
        let key = content_key(t);
        let have = store.get(&provider, &key).is_ok_and(|r| !tokens || r.tokens.is_some());
        !have && seen.insert(key)
    });
    let fetched = if texts.is_empty() {
        Vec::new()
    } else {
        let settings = ctx.cfg.providers.first().map(|p| p.http.clone()).unwrap_or_default();
        let client = Arc::new(HttpClient::new(&settings, ctx.network).map_err(|e| CliError::stage("embed-fetch", e))?);
        let granularity = if tokens { Granularity::Tokens } else { Granularity::Sentence };
        let mut remote = remote;
        remote.provider = provider.clone();
        runtime()?.block_on(fetch_remote(client, &remote, &texts, granularity)).map_err(|e| CliError::stage("embed-fetch", e))?
    };
    let n = fetched.len();
    let mut fresh = EmbeddingStore::new();
    for r in store.records().filter(|r| !(r.provider == provider && fetched.iter().any(|f| f.key == r.key))) {
        fresh.insert(r.clone()).map_err(|e| CliError::stage("embed-fetch", e))?;
    }
    for r in fetched {
        fresh.insert(r).map_err(|e| CliError::stage("embed-fetch", e))?;
    }
    store = fresh;
    write_store(&store, &path).map_err(|e| CliError::stage("embed-fetch", e))?;
    if path.starts_with(&ctx.out) {
        ctx.record(path.clone());
    }
    Ok(json!({ "fetched": n, "stored": store.len(), "store": path }))
}

fn assemble(ctx: &Ctx, corpus: &Corpus, kind: ModelKind, name: &str) -> Result<TrainData, CliError> {
    let table = if kind.uses_features() { Some(feature_table(ctx, corpus)?) } else { None };
    let store = if kind.uses_embeddings() { Some(embeddings(ctx, corpus)?) } else { None };
    TrainData::assemble(corpus, table.as_ref(), store.as_ref().map(|(s, p)| (s, p.as_str())), name).map_err(|e| CliError::stage("train", e))
}

fn history_csv(out: &TrainOutcome) -> Result<Vec<u8>, CliError> {
    let mut rows = vec![vec!["seed".to_string(), "epoch".into(), "train_loss".into(), "val_f1".into()]];
    for (seed, h) in &out.histories {
        for e in h {
            rows.push(vec![seed.to_string(), e.epoch.to_string(), num(e.train_loss), num(e.val_f1)]);
        }
    }
    csv_bytes(&rows)
}

pub fn train_model(ctx: &mut Ctx, kind: ModelKind) -> Result<serde_json::Value, CliError> {
    let corpus = ctx.corpus()?;
    let data = assemble(ctx, &corpus, kind, "main")?;
    let cfg = ctx.cfg.train_config(kind);
    let out = train(kind, &data, &cfg).map_err(|e| CliError::stage("train", e))?;
    let name = kind.as_str();
    for ck in &out.checkpoints {
        let path = ctx.path(format!("models/{name}/seed-{}.json", ck.seed));
        std::fs::create_dir_all(path.parent().expect("has parent")).map_err(|e| CliError::io(&path, e))?;
        ck.save(&path).map_err(|e| CliError::stage("train", e))?;
        ctx.record(path);
    }
    ctx.write_json(format!("reports/{name}.json"), &out.report)?;
    ctx.write(format!("logs/{name}-history.csv"), &history_csv(&out)?)?;
    if !out.failures.is_empty() {
        ctx.write_json(format!("logs/{name}-failures.json"), &out.failures)?;
    }
    Ok(summary(&out.report))
}

fn summary(r: &EvalReport) -> serde_json::Value {
    let agg: BTreeMap<&str, [f64; 2]> = r.aggregate.iter().map(|(k, v)| (k.as_str(), [v.mean, v.std])).collect();
    json!({ "model": r.model_kind, "dataset": r.dataset, "seeds": r.per_seed.len(), "aggregate": agg })
}

pub fn augment_export(ctx: &mut Ctx) -> Result<serde_json::Value, CliError> {
    let corpus = ctx.corpus()?;
    let path = ctx.path("finetune/finetune.jsonl");
    std::fs::create_dir_all(path.parent().expect("has parent")).map_err(|e| CliError::io(&path, e))?;
    let n = export_finetune_dataset(&corpus, &path).map_err(|e| CliError::stage("augment-export", e))?;
    ctx.record(path);
    let mut configs = BTreeMap::new();
    for g in &ctx.cfg.augment.generators {
        configs.insert(g.name.clone(), ctx.cfg.generator(&g.name)?);
    }
    ctx.write_json("finetune/generators.json", &configs)?;
    Ok(json!({ "records": n }))
}

fn case_fraction(ctx: &Ctx, corpus: &Corpus) -> f64 {
    ctx.cfg.augment.case_fraction.unwrap_or_else(|| {
        let train = split_view(corpus, Split::Train);
        train.iter().filter(|t| t.label == Label::Case).count() as f64 / train.len().max(1) as f64
    })
}

pub fn augment_generate(ctx: &mut Ctx, generator: &str, multiplier: usize) -> Result<serde_json::Value, CliError> {
    if !(1..=5).contains(&multiplier) {
        return Err(CliError::Usage(format!("--multiplier must be in 1..=5, got {multiplier}")));
    }
    let gen = ctx.cfg.generator(generator)?;
    let provider = ctx.cfg.provider(&gen.provider)?.clone();
    let corpus = ctx.corpus()?;
    let n_train = split_view(&corpus, Split::Train).len();
    if n_train == 0 {
        return Err(CliError::stage("augment-generate", "train split is empty"));
    }
    let n = multiplier * n_train;
    let plan = &ctx.cfg.augment;
    let opts = GenerationOptions {
        bounds: SampleBounds { min_words: plan.min_words, max_words: plan.max_words, near_duplicate: plan.near_duplicate },
        attempts_per_slot: plan.attempts_per_slot,
        seed: ctx.cfg.seeds[0],
        deterministic_time: true,
    };
    let client = Arc::new(HttpChatClient::new(provider, ctx.network).map_err(|e| CliError::stage("augment-generate", e))?);
    let frac = case_fraction(ctx, &corpus);
    let synth =
        runtime()?.block_on(generate_synthetic(client, &gen, n, frac, &opts)).map_err(|e| CliError::stage("augment-generate", e))?;
    let mut buf = Vec::new();
    synth.write_jsonl(&mut buf).map_err(|e| CliError::stage("augment-generate", e))?;
    ctx.write(format!("synthetic/{generator}.jsonl"), &buf)?;
    let mut rej = Vec::new();
    for s in &synth.rejected {
        serde_json::to_writer(&mut rej, s).map_err(|e| CliError::stage("augment-generate", e))?;
        rej.push(b'\n');
    }
    ctx.write(format!("synthetic/{generator}.rejected.jsonl"), &rej)?;
    let counts: BTreeMap<String, usize> = synth.label_counts().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok(json!({
        "generator": generator,
        "model": gen.model,
        "requested": n,
        "accepted": synth.samples.len(),
        "rejected": synth.rejected.len(),
        "labels": counts,
    }))
}

/// Parses `1..5`, `2..=4` or `1,3,5`.
pub fn parse_multipliers(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse multipliers {s:?} (use 1..5 or 1,2,3)"));
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if v.is_empty() || v.iter().any(|m| !(1..=5).contains(m)) {
        return Err(CliError::Usage(format!("multipliers must be non-empty and within 1..=5, got {s:?}")));
    }
    Ok(v)
}

pub fn augment_sweep(ctx: &mut Ctx, generator: &str, multipliers: &[usize]) -> Result<serde_json::Value, CliError> {
    let real = ctx.corpus()?;
    let synth = load_synthetic(ctx, generator)?;
    let kind = ctx.cfg.augment.model;
    let cfg = ctx.cfg.train_config(kind);
    let mut rows = vec![["generator", "multiplier", "train_size", "f1_mean", "f1_std", "auc_mean", "auc_std"].map(String::from).to_vec()];
    let mut results = Vec::new();
    for &k in multipliers {
        let merged = augment_training_set(&real, &synth, k).map_err(|e| CliError::stage("augment-sweep", e))?;
        let data = assemble(ctx, &merged, kind, &format!("{generator}-x{k}"))?;
        let out = train(kind, &data, &cfg).map_err(|e| CliError::stage("augment-sweep", e))?;
        ctx.write_json(format!("reports/sweep/{generator}/x{k}.json"), &out.report)?;
        let get = |m: &str| out.report.aggregate.get(m).map(|v| (v.mean, v.std)).unwrap_or((f64::NAN, f64::NAN));
        let (f1, auc) = (get("f1"), get("auc"));
        rows.push(vec![generator.to_string(), k.to_string(), data.train.len().to_string(), num(f1.0), num(f1.1), num(auc.0), num(auc.1)]);
        results.push(json!({ "multiplier": k, "train_size": data.train.len(), "f1": f1.0 }));
    }
    ctx.write(format!("reports/sweep/{generator}/summary.csv"), &csv_bytes(&rows)?)?;
    Ok(json!({ "generator": generator, "model": kind.as_str(), "runs": results }))
}

#[derive(Serialize)]
struct QualityEntry<T> {
    generator: String,
    candidates: usize,
    #[serde(flatten)]
    value: T,
}

fn quality_generators(ctx: &Ctx, requested: &[String]) -> Result<Vec<String>, CliError> {
    let gens = if requested.is_empty() { available_generators(ctx) } else { requested.to_vec() };
    if gens.is_empty() {
        return Err(CliError::stage("quality", "no synthetic corpora found (run augment-generate first)"));
    }
    Ok(gens)
}

fn limited(mut s: SyntheticCorpus, limit: Option<usize>) -> SyntheticCorpus {
    if let Some(n) = limit {
        s.samples.truncate(n);
    }
    s
}

pub fn quality(ctx: &mut Ctx, metric: &str, requested: &[String], limit: Option<usize>) -> Result<serde_json::Value, CliError> {
    let gens = quality_generators(ctx, requested)?;
    let corpus = ctx.corpus()?;
    let real: Vec<_> = split_view(&corpus, Split::Train).into_iter().cloned().collect();
    let q = ctx.cfg.quality.clone();
    match metric {
        "bleu" => {
            let mut entries: Vec<QualityEntry<BleuReport>> = Vec::new();
            let refs: Vec<(Label, &str)> = real.iter().map(|t| (t.label, t.text.as_str())).collect();
            for g in &gens {
                let s = limited(load_synthetic(ctx, g)?, limit);
                let cands: Vec<(Label, &str)> = s.samples.iter().map(|x| (x.label, x.text.as_str())).collect();
                let (c, r) = reference_sets(&cands, &refs, q.reference_policy).map_err(|e| CliError::stage("quality", e))?;
                let report = bleu(&c, &r, q.max_n).map_err(|e| CliError::stage("quality", e))?;
                entries.push(QualityEntry { generator: g.clone(), candidates: c.len(), value: report });
            }
            ctx.write_json("quality/bleu.json", &entries)?;
            Ok(json!({ "metric": "bleu", "generators": gens }))
        }
        "bertscore" => {
            let mut entries: Vec<QualityEntry<BertScoreReport>> = Vec::new();
            let tokens_of = |store: &EmbeddingStore, provider: &str, key: &str, text: &str| -> Result<Vec<Vec<f64>>, CliError> {
                let rec = store
                    .get(provider, key)
                    .or_else(|_| store.get(provider, &content_key(text)))
                    .map_err(|e| CliError::stage("quality", e))?;
                rec.tokens
                    .clone()
                    .ok_or_else(|| CliError::stage("quality", format!("{key}: no token vectors stored (run embed-fetch --tokens)")))
            };
            for g in &gens {
                let s = limited(load_synthetic(ctx, g)?, limit);
                let mut both = Corpus::default();
                both.transcripts = real.clone();
                for x in &s.samples {
                    both.transcripts.push(cogscreen_core::corpus::Transcript::new(x.id.clone(), x.label, Split::Train, x.text.clone()));
                }
                let (store, provider) = embeddings(ctx, &both)?;
                let ref_tokens: Vec<(Label, Vec<Vec<f64>>)> =
                    real.iter().map(|t| Ok((t.label, tokens_of(&store, &provider, &t.id, &t.text)?))).collect::<Result<_, CliError>>()?;
                let mut sums = [0.0; 3];
                for x in &s.samples {
                    let cand = tokens_of(&store, &provider, &x.id, &x.text)?;
                    let pool: Vec<&[Vec<f64>]> = ref_tokens.iter().filter(|(l, _)| *l == x.label).map(|(_, r)| r.as_slice()).collect();
                    let r = bertscore_multi(&cand, &pool).map_err(|e| CliError::stage("quality", e))?;
                    sums[0] += r.precision;
                    sums[1] += r.recall;
                    sums[2] += r.f1;
                }
                let n = s.samples.len().max(1) as f64;
                let value = BertScoreReport { precision: sums[0] / n, recall: sums[1] / n, f1: sums[2] / n };
                entries.push(QualityEntry { generator: g.clone(), candidates: s.samples.len(), value });
            }
            ctx.write_json("quality/bertscore.json", &entries)?;
            Ok(json!({ "metric": "bertscore", "generators": gens }))
        }
        "tsne" => {
            let mut groups: Vec<(String, Vec<(String, Label, String)>)> = Vec::new();
            for label in Label::ALL {
                let items = real.iter().filter(|t| t.label == label).map(|t| (t.id.clone(), t.label, t.text.clone())).collect();
                groups.push((format!("real-{label}"), items));
            }
            for g in &gens {
                let s = limited(load_synthetic(ctx, g)?, limit);
                groups.push((g.clone(), s.samples.into_iter().map(|x| (x.id, x.label, x.text)).collect()));
            }
            let mut all = Corpus::default();
            for (_, items) in &groups {
                for (id, label, text) in items {
                    all.transcripts.push(cogscreen_core::corpus::Transcript::new(id.clone(), *label, Split::Train, text.clone()));
                }
            }
            let (store, provider) = embeddings(ctx, &all)?;
            let x: Vec<Vec<f64>> = all
                .transcripts
                .iter()
                .map(|t| {
                    store
                        .get_sentence(&provider, &t.id)
                        .or_else(|_| store.get_sentence(&provider, &content_key(&t.text)))
                        .map(<[f64]>::to_vec)
                        .map_err(|e| CliError::stage("quality", e))
                })
                .collect::<Result<_, _>>()?;
            let n = x.len();
            let perplexity = q.perplexity.min((n as f64 - 1.0) / 3.0).max(1.0);
            let cfg = TsneConfig { perplexity, iterations: q.tsne_iterations, seed: ctx.cfg.seeds[0], ..TsneConfig::default() };
            let res = tsne(&x, &cfg).map_err(|e| CliError::stage("quality", e))?;
            let mut rows = vec![["group", "id", "label", "x", "y"].map(String::from).to_vec()];
            let mut point_groups = Vec::new();
            let mut i = 0;
            for (name, items) in &groups {
                let mut pts = Vec::new();
                for (id, label, _) in items {
                    let c = res.coords[i];
                    rows.push(vec![name.clone(), id.clone(), label.to_string(), num(c[0]), num(c[1])]);
                    pts.push(c);
                    i += 1;
                }
                point_groups.push(PointGroup { name: name.clone(), points: pts });
            }
            point_groups.retain(|g| !g.points.is_empty());
            let overlap = overlap_report(&point_groups, q.neighbours).map_err(|e| CliError::stage("quality", e))?;
            ctx.write("quality/tsne.csv", &csv_bytes(&rows)?)?;
            ctx.write_json(
                "quality/tsne.json",
                &json!({ "n": n, "perplexity": perplexity, "kl": res.kl, "kl_trace": res.kl_trace, "overlap": overlap }),
            )?;
            Ok(json!({ "metric": "tsne", "points": n, "kl": res.kl }))
        }
        other => Err(CliError::Usage(format!("unknown quality metric {other:?} (bleu, bertscore, tsne)"))),
    }
}

pub fn judge(ctx: &mut Ctx, split: Split) -> Result<serde_json::Value, CliError> {
    let section = ctx.cfg.judge.clone().ok_or_else(|| CliError::Config("judge needs a [judge] section".into()))?;
    let provider = ctx.cfg.provider(&section.provider)?.clone();
    let mut jcfg = JudgeConfig::for_model(&section.model);
    if let Some(t) = section.temperature {
        jcfg.temperature = t;
    }
    if let Some(r) = section.max_retries {
        jcfg.max_retries = r;
    }
    let corpus = ctx.corpus()?;
    let items: Vec<JudgeItem> =
        split_view(&corpus, split).into_iter().map(|t| JudgeItem { id: t.id.clone(), label: t.label, text: t.text.clone() }).collect();
    let client = Arc::new(HttpChatClient::new(provider, ctx.network).map_err(|e| CliError::stage("judge", e))?);
    let out = runtime()?.block_on(evaluate_judge(client, &jcfg, &items, &split.to_string())).map_err(|e| CliError::stage("judge", e))?;
    let slug: String = section.model.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect();
    ctx.write_json(format!("reports/judge-{slug}.json"), &out.report)?;
    let mut buf = String::new();
    let mut latency = Vec::new();
    for v in &out.verdicts {
        let mut row = serde_json::to_value(v).map_err(|e| CliError::stage("judge", e))?;
        if let Some(ms) = row.as_object_mut().and_then(|o| o.remove("latency_ms")) {
            latency.push(json!({ "id": v.id, "latency_ms": ms }));
        }
        writeln!(buf, "{row}").expect("string write");
    }
    ctx.provenance.insert("latency".into(), json!(latency));
    ctx.write(format!("judge/{slug}-verdicts.jsonl"), buf.as_bytes())?;
    Ok(summary(&out.report))
}

/// Writes a self-contained toy dataset: transcripts, manifest and config.
pub fn make_toy(dest: &Path, full_shape: bool, seed: u64) -> Result<serde_json::Value, CliError> {
    let shape = if full_shape { ToyShape::FULL } else { ToyShape::DEFAULT };
    let corpus = toy_corpus(shape, seed);
    let tdir = dest.join("transcripts");
    std::fs::create_dir_all(&tdir).map_err(|e| CliError::io(&tdir, e))?;
    let mut rows = vec![["id", "label", "split", "transcript_path"].map(String::from).to_vec()];
    for t in &corpus.transcripts {
        let rel = format!("transcripts/{}.txt", t.id);
        let p = dest.join(&rel);
        std::fs::write(&p, format!("{}\n", t.text)).map_err(|e| CliError::io(&p, e))?;
        rows.push(vec![t.id.clone(), t.label.to_string(), t.split.to_string(), rel]);
    }
    let manifest = dest.join("manifest.csv");
    std::fs::write(&manifest, csv_bytes(&rows)?).map_err(|e| CliError::io(&manifest, e))?;
    let config = dest.join("config.toml");
    if !config.exists() {
        std::fs::write(&config, TOY_CONFIG).map_err(|e| CliError::io(&config, e))?;
    }
    Ok(json!({ "transcripts": corpus.len(), "dest": dest, "config": config }))
}

const TOY_CONFIG: &str = r#"# Toy pipeline: offline pseudo-embeddings, bundled lexicon and tagger.
seeds = [0, 1, 2, 3, 4]

[paths]
manifest = "manifest.csv"
out = "out"

[embedding]
source = "pseudo"
dim = 384
"#;
