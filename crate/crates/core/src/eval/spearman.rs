use serde::{Deserialize, Serialize};

use super::study::SweepResult;
use crate::dataset::Modality;

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
/// `None` when the lengths differ, fewer than two points are given, or
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Rank correlation between units per finger and accuracy for one choice
/// of scheme per resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionTrend {
    pub modality: Modality,
    pub schemes: Vec<String>,
    pub rho: Option<f64>,
}

/// One trend per way of picking a single scheme at every resolution of a
/// modality (e.g. T8v or T8h), in sweep order of the alternatives.
pub fn resolution_trends(sweep: &SweepResult) -> Vec<ResolutionTrend> {
    let mut out = Vec::new();
    for modality in [Modality::Tactile, Modality::Pressure] {
        let mut levels: Vec<(usize, Vec<usize>)> = Vec::new();
        for (i, r) in sweep.rows.iter().enumerate() {
            if r.modality != modality {
                continue;
            }
            match levels.iter_mut().find(|(u, _)| *u == r.units_per_finger) {
                Some((_, members)) => members.push(i),
                None => levels.push((r.units_per_finger, vec![i])),
            }
        }
        if levels.is_empty() {
            continue;
        }
        levels.sort_by_key(|(u, _)| *u);
        let mut picks: Vec<Vec<usize>> = vec![Vec::new()];
        for (_, members) in &levels {
            picks = picks
                .iter()
                .flat_map(|p| {
                    members.iter().map(move |&m| {
                        let mut q = p.clone();
                        q.push(m);
                        q
                    })
                })
                .collect();
        }
        for pick in picks {
            let rows: Vec<_> = pick.iter().map(|&i| &sweep.rows[i]).collect();
            let units: Vec<f64> = rows.iter().map(|r| r.units_per_finger as f64).collect();
            let acc: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
            out.push(ResolutionTrend {
                modality,
                schemes: rows.iter().map(|r| r.scheme.clone()).collect(),
                rho: spearman(&units, &acc),
            });
        }
    }
    out
}
