use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointGroup {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidDistance {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// Neighbourhood size actually used.
    pub k: usize,
    pub centroid_distances: Vec<CentroidDistance>,
    /// Per group: mean fraction of each point's k nearest neighbours that
    /// belong to another group.
    pub mixing: Vec<(String, f64)>,
    pub overall_mixing: f64,
}

fn centroid(p: &[[f64; 2]]) -> [f64; 2] {
    let n = p.len() as f64;
    [p.iter().map(|v| v[0]).sum::<f64>() / n, p.iter().map(|v| v[1]).sum::<f64>() / n]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Centroid distances between every pair of groups and a k-NN mixing score.
/// `k` is clamped to the number of other points; distance ties are broken by
/// input order (groups in order, then points).
pub fn overlap_report(groups: &[PointGroup], k: usize) -> Result<OverlapReport, SimError> {
    if groups.len() < 2 {
        return Err(SimError::Invalid(format!("need at least 2 groups, got {}", groups.len())));
    }
    if let Some(g) = groups.iter().find(|g| g.points.is_empty()) {
        return Err(SimError::Invalid(format!("group {} is empty", g.name)));
    }
    let all: Vec<([f64; 2], usize)> = groups.iter().enumerate().flat_map(|(gi, g)| g.points.iter().map(move |&p| (p, gi))).collect();
    let requested = k;
    let k = k.clamp(1, all.len() - 1);
    if k != requested {
        tracing::warn!(requested, k, "k clamped to available neighbours");
    }
    let mut centroid_distances = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (a, b) = (centroid(&groups[i].points), centroid(&groups[j].points));
            centroid_distances.push(CentroidDistance {
                a: groups[i].name.clone(),
                b: groups[j].name.clone(),
                distance: dist2(a, b).sqrt(),
            });
        }
    }
    let mut per_group = vec![(0.0, 0usize); groups.len()];
    let mut total = 0.0;
    for (i, &(p, gi)) in all.iter().enumerate() {
        let mut order: Vec<(f64, usize)> = all.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, &(q, _))| (dist2(p, q), j)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let foreign = order[..k].iter().filter(|&&(_, j)| all[j].1 != gi).count();
        let frac = foreign as f64 / k as f64;
        per_group[gi].0 += frac;
        per_group[gi].1 += 1;
        total += frac;
    }
    Ok(OverlapReport {
        k,
        centroid_distances,
        mixing: groups.iter().zip(&per_group).map(|(g, &(s, c))| (g.name.clone(), s / c as f64)).collect(),
        overall_mixing: total / all.len() as f64,
    })
}

/// Mean silhouette coefficient of a labelled clustering under Euclidean
/// distance. Points in singleton clusters score 0.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Result<f64, SimError> {
    if points.len() != labels.len() || points.is_empty() {
        return Err(SimError::Invalid("points and labels must be non-empty and aligned".into()));
    }
    let n_clusters = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    if labels.iter().collect::<std::collections::HashSet<_>>().len() < 2 {
        return Err(SimError::Invalid("silhouette needs at least two clusters".into()));
    }
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums = vec![0.0; n_clusters];
        let mut counts = vec![0usize; n_clusters];
        for j in 0..points.len() {
            if i != j {
                sums[labels[j]] += dist(&points[i], &points[j]);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..n_clusters).filter(|&c| c != own && counts[c] > 0).map(|c| sums[c] / counts[c] as f64).fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / points.len() as f64)
}
