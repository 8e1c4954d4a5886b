//! `report`: figures and tables from the JSON written by earlier stages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cogscreen_core::clsmetrics::{CurveKind, EvalReport};
use serde_json::json;

use crate::context::Ctx;
use crate::error::CliError;
use crate::svg::{range, Bar, Body, Line, Panel, Sheet};

/// Curve series every evaluation report is expected to carry.
const EXPECTED: [(CurveKind, &str); 7] = [
    (CurveKind::Roc, "roc"),
    (CurveKind::Pr, "pr"),
    (CurveKind::Gains, "gains"),
    (CurveKind::PpvProfile, "ppv"),
    (CurveKind::SensitivityProfile, "sensitivity"),
    (CurveKind::Density, "case"),
    (CurveKind::Density, "control"),
];

pub struct Named {
    pub name: String,
    pub rel: PathBuf,
    pub report: EvalReport,
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    for e in entries {
        let p = e.map_err(|e| CliError::io(dir, e))?.path();
        if p.is_dir() {
            walk(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    Ok(())
}

/// Every evaluation report under `dir`, sorted by relative path. Files that
/// are not evaluation reports are skipped.
pub fn collect(dir: &Path) -> Result<Vec<Named>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::stage("report", format!("{} is not a directory", dir.display())));
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| CliError::io(&f, e))?;
        let Ok(report) = serde_json::from_str::<EvalReport>(&text) else {
            tracing::debug!(path = %f.display(), "not an evaluation report");
            continue;
        };
        let rel = f.strip_prefix(dir).unwrap_or(&f).with_extension("");
        let name = rel.to_string_lossy().replace(['/', '\\'], "-");
        out.push(Named { name, rel, report });
    }
    if out.is_empty() {
        return Err(CliError::stage("report", format!("no evaluation reports found in {}", dir.display())));
    }
    Ok(out)
}

/// `"<report>: <kind>/<label>"` for every expected series that is absent
/// or has no data.
pub fn missing_series(reports: &[Named]) -> Vec<String> {
    let mut missing = Vec::new();
    for r in reports {
        for (kind, label) in EXPECTED {
            match r.report.curve(kind, label) {
                Some(c) if !c.empty && !c.points.is_empty() => {}
                _ => missing.push(format!("{}: {}/{label}", r.name, kind.as_str())),
            }
        }
    }
    missing
}

fn curve_lines(reports: &[&Named], kind: CurveKind, label: &str) -> Vec<Line> {
    reports
        .iter()
        .filter_map(|r| {
            r.report.curve(kind, label).filter(|c| !c.empty).map(|c| Line { name: r.name.clone(), points: c.points.clone(), dashed: false })
        })
        .collect()
}

fn unit_panel(title: &str, x: &str, y: &str, lines: Vec<Line>) -> Panel {
    Panel { title: title.into(), x_label: x.into(), y_label: y.into(), x: (0.0, 1.0), y: (0.0, 1.0), body: Body::Lines(lines) }
}

fn diagonal() -> Line {
    Line { name: "chance".into(), points: vec![(0.0, 0.0), (1.0, 1.0)], dashed: true }
}

pub fn roc_svg(r: &Named) -> Option<String> {
    let mut lines = curve_lines(&[r], CurveKind::Roc, "roc");
    if lines.is_empty() {
        return None;
    }
    lines.push(diagonal());
    let auc = r.report.curve(CurveKind::Roc, "roc").and_then(|c| c.summary).unwrap_or(f64::NAN);
    Some(
        Sheet::single(unit_panel(&format!("ROC {} (AUC {:.3})", r.name, auc), "false positive rate", "true positive rate", lines)).render(),
    )
}

/// Six panels, one per curve family, overlaying the given reports.
pub fn sheet_svg(reports: &[&Named]) -> String {
    let mut roc = curve_lines(reports, CurveKind::Roc, "roc");
    roc.push(diagonal());
    let mut gains = curve_lines(reports, CurveKind::Gains, "gains");
    gains.push(diagonal());
    let mut density = Vec::new();
    for r in reports {
        for label in ["case", "control"] {
            if let Some(c) = r.report.curve(CurveKind::Density, label).filter(|c| !c.empty) {
                density.push(Line { name: format!("{} {label}", r.name), points: c.points.clone(), dashed: false });
            }
        }
    }
    let dmax = density.iter().flat_map(|l| l.points.iter().map(|p| p.1)).fold(0.0f64, f64::max).max(0.1);
    let pct = |kind, label, title: &str, y: &str| Panel {
        title: title.into(),
        x_label: "score percentile".into(),
        y_label: y.into(),
        x: (0.0, 100.0),
        y: (0.0, 1.0),
        body: Body::Lines(curve_lines(reports, kind, label)),
    };
    let panels = vec![
        unit_panel("ROC", "false positive rate", "true positive rate", roc),
        unit_panel("Precision-recall", "recall", "precision", curve_lines(reports, CurveKind::Pr, "pr")),
        unit_panel("Cumulative gains", "fraction screened", "fraction of cases found", gains),
        pct(CurveKind::PpvProfile, "ppv", "PPV by threshold percentile", "PPV"),
        pct(CurveKind::SensitivityProfile, "sensitivity", "Sensitivity by threshold percentile", "sensitivity"),
        Panel {
            title: "Score density".into(),
            x_label: "p(case)".into(),
            y_label: "fraction".into(),
            x: (0.0, 1.0),
            y: (0.0, dmax * 1.05),
            body: Body::Lines(density),
        },
    ];
    Sheet { cols: 3, cell: (420.0, 360.0), panels }.render()
}

fn metric(r: &EvalReport, m: &str) -> (f64, f64) {
    r.aggregate.get(m).map(|v| (v.mean, v.std)).unwrap_or((f64::NAN, f64::NAN))
}

/// Grouped bars of F1 per generator, one bar per multiplier.
pub fn sweep_svg(sweeps: &[&Named]) -> String {
    let mut bars = Vec::new();
    for r in sweeps {
        let mut parts = r.rel.iter().map(|p| p.to_string_lossy().into_owned()).skip(1);
        let (Some(generator), Some(k)) = (parts.next(), parts.next()) else { continue };
        let (mean, std) = metric(&r.report, "f1");
        bars.push(Bar { group: generator, series: k, value: mean, err: Some(std) });
    }
    bars.sort_by(|a, b| (&a.group, &a.series).cmp(&(&b.group, &b.series)));
    Sheet {
        cols: 1,
        cell: (720.0, 400.0),
        panels: vec![Panel {
            title: "F1 by generator and augmentation multiplier".into(),
            x_label: "generator".into(),
            y_label: "F1".into(),
            x: (0.0, 1.0),
            y: (0.0, 1.0),
            body: Body::Bars(bars),
        }],
    }
    .render()
}

fn read_json(path: &Path) -> Result<Option<serde_json::Value>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map(Some).map_err(|e| CliError::stage("report", format!("{}: {e}", path.display())))
}

/// BLEU-1..4 and BERTScore bars per generator, from whichever quality files exist.
pub fn quality_svg(bleu: Option<&serde_json::Value>, bert: Option<&serde_json::Value>) -> Option<String> {
    let mut panels = Vec::new();
    if let Some(entries) = bleu.and_then(|v| v.as_array()) {
        let mut bars = Vec::new();
        for e in entries {
            let g = e["generator"].as_str().unwrap_or("?").to_string();
            for (i, s) in e["scores"].as_array().into_iter().flatten().enumerate() {
                bars.push(Bar { group: g.clone(), series: format!("BLEU-{}", i + 1), value: s.as_f64().unwrap_or(f64::NAN), err: None });
            }
        }
        panels.push(Panel {
            title: "BLEU against real transcripts".into(),
            x_label: "generator".into(),
            y_label: "score".into(),
            x: (0.0, 1.0),
            y: (0.0, 1.0),
            body: Body::Bars(bars),
        });
    }
    if let Some(entries) = bert.and_then(|v| v.as_array()) {
        let mut bars = Vec::new();
        for e in entries {
            let g = e["generator"].as_str().unwrap_or("?").to_string();
            for m in ["precision", "recall", "f1"] {
                bars.push(Bar { group: g.clone(), series: m.into(), value: e[m].as_f64().unwrap_or(f64::NAN), err: None });
            }
        }
        panels.push(Panel {
            title: "BERTScore against real transcripts".into(),
            x_label: "generator".into(),
            y_label: "score".into(),
            x: (0.0, 1.0),
            y: (0.0, 1.0),
            body: Body::Bars(bars),
        });
    }
    (!panels.is_empty()).then(|| Sheet { cols: panels.len(), cell: (520.0, 400.0), panels }.render())
}

pub fn tsne_svg(csv_path: &Path) -> Result<Option<String>, CliError> {
    if !csv_path.exists() {
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let mut groups: Vec<(String, Vec<[f64; 2]>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::io(csv_path, e))?;
        let parse = |i: usize| rec.get(i).and_then(|v| v.parse::<f64>().ok());
        let (Some(g), Some(x), Some(y)) = (rec.get(0), parse(3), parse(4)) else {
            return Err(CliError::stage("report", format!("{}: malformed row {:?}", csv_path.display(), rec)));
        };
        match groups.iter_mut().find(|(n, _)| n == g) {
            Some((_, pts)) => pts.push([x, y]),
            None => groups.push((g.to_string(), vec![[x, y]])),
        }
    }
    let xs = range(groups.iter().flat_map(|(_, p)| p.iter().map(|v| v[0])));
    let ys = range(groups.iter().flat_map(|(_, p)| p.iter().map(|v| v[1])));
    let panel = Panel {
        title: "t-SNE of sentence embeddings".into(),
        x_label: "dim 1".into(),
        y_label: "dim 2".into(),
        x: xs,
        y: ys,
        body: Body::Scatter(groups),
    };
    Ok(Some(Sheet { cols: 1, cell: (560.0, 520.0), panels: vec![panel] }.render()))
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::stage("report", e))?;
    }
    w.into_inner().map_err(|e| CliError::stage("report", e))
}

pub fn render_report(ctx: &mut Ctx, dir: Option<PathBuf>) -> Result<serde_json::Value, CliError> {
    let dir = dir.unwrap_or_else(|| ctx.path("reports"));
    let reports = collect(&dir)?;
    let mut figures = Vec::new();

    let mut summary = vec![["report", "model", "dataset", "metric", "mean", "std"].map(String::from).to_vec()];
    let mut curves = vec![["report", "kind", "label", "x", "y"].map(String::from).to_vec()];
    for r in &reports {
        for (m, v) in &r.report.aggregate {
            summary.push(vec![
                r.name.clone(),
                r.report.model_kind.clone(),
                r.report.dataset.clone(),
                m.clone(),
                format!("{:?}", v.mean),
                format!("{:?}", v.std),
            ]);
        }
        for (m, v) in &r.report.extra {
            summary.push(vec![
                r.name.clone(),
                r.report.model_kind.clone(),
                r.report.dataset.clone(),
                m.clone(),
                format!("{v:?}"),
                String::new(),
            ]);
        }
        for c in &r.report.curves {
            for (x, y) in &c.points {
                curves.push(vec![r.name.clone(), c.kind.as_str().into(), c.label.clone(), format!("{x:?}"), format!("{y:?}")]);
            }
        }
        if let Some(svg) = roc_svg(r) {
            figures.push(ctx.write(format!("figures/roc/{}.svg", r.name), svg.as_bytes())?);
        }
    }
    ctx.write("figures/summary.csv", &csv_bytes(summary)?)?;
    ctx.write("figures/curves.csv", &csv_bytes(curves)?)?;

    let top: Vec<&Named> = reports.iter().filter(|r| r.rel.components().count() == 1).collect();
    let sheet_set = if top.is_empty() { reports.iter().collect() } else { top };
    figures.push(ctx.write("figures/sheet.svg", sheet_svg(&sheet_set).as_bytes())?);

    let sweeps: Vec<&Named> = reports.iter().filter(|r| r.rel.starts_with("sweep") && r.rel.components().count() == 3).collect();
    if !sweeps.is_empty() {
        figures.push(ctx.write("figures/sweep-f1.svg", sweep_svg(&sweeps).as_bytes())?);
    }
    let bleu = read_json(&ctx.path("quality/bleu.json"))?;
    let bert = read_json(&ctx.path("quality/bertscore.json"))?;
    if let Some(svg) = quality_svg(bleu.as_ref(), bert.as_ref()) {
        figures.push(ctx.write("figures/quality.svg", svg.as_bytes())?);
    }
    if let Some(svg) = tsne_svg(&ctx.path("quality/tsne.csv"))? {
        figures.push(ctx.write("figures/tsne.svg", svg.as_bytes())?);
    }

    let missing = missing_series(&reports);
    for m in &missing {
        tracing::warn!("missing curve series {m}");
    }
    let rel = |p: &PathBuf| p.strip_prefix(&ctx.out).unwrap_or(p).to_string_lossy().replace('\\', "/");
    let figure_names: Vec<String> = figures.iter().map(rel).collect();
    let reports_seen: BTreeMap<&str, &str> = reports.iter().map(|r| (r.name.as_str(), r.report.model_kind.as_str())).collect();
    let index = json!({ "reports": reports_seen, "figures": figure_names, "missing_series": missing });
    ctx.write_json("figures/index.json", &index)?;
    Ok(index)
}
