//! Betweenness centrality of every fog device.
//!
//! `g(n)` is the sum over unordered pairs `{s, d}` with `s != n != d` of the
//! fraction of shortest `s`-`d` paths that pass through `n`. Scores are not
//! normalised.
//!
//! Computed with shortest-path counting and dependency accumulation over
//! the shortest-path DAG of each source (Brandes): breadth-first search in
//! unweighted mode, a label-setting priority-queue search when links are
//! weighted by latency. Each source is independent; per-source dependency
//! vectors are summed in source order so sequential and parallel runs agree
//! bit for bit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::overlay::{DeviceId, FogOverlay};
use crate::{Error, Execution, Result};

/// Two weighted path lengths closer than this are treated as equal.
pub const PATH_LENGTH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMode {
    /// Hop count shortest paths.
    Unweighted,
    /// Shortest paths by summed link latency.
    #[default]
    WeightedByLatency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub mode: CentralityMode,
    pub scores: BTreeMap<DeviceId, f64>,
}

impl CentralityScores {
    pub fn get(&self, id: DeviceId) -> Option<f64> {
        self.scores.get(&id).copied()
    }
}

pub fn betweenness(overlay: &FogOverlay, mode: CentralityMode) -> Result<CentralityScores> {
    betweenness_with(overlay, mode, Execution::default())
}

pub fn betweenness_with(
    overlay: &FogOverlay,
    mode: CentralityMode,
    exec: Execution,
) -> Result<CentralityScores> {
    if !overlay.is_connected() {
        return Err(Error::Topology("betweenness requires a connected overlay".into()));
    }
    let raw = betweenness_by_index(overlay, mode, exec);
    let scores = raw
        .into_iter()
        .enumerate()
        .map(|(i, g)| (overlay.id_at(i), g))
        .collect();
    Ok(CentralityScores { mode, scores })
}

/// Scores by device index.
pub(crate) fn betweenness_by_index(overlay: &FogOverlay, mode: CentralityMode, exec: Execution) -> Vec<f64> {
    let n = overlay.len();
    let sources: Vec<usize> = (0..n).collect();
    let per_source = exec.map(&sources, |&s| match mode {
        CentralityMode::Unweighted => dependencies_unweighted(overlay, s),
        CentralityMode::WeightedByLatency => dependencies_weighted(overlay, s),
    });
    let mut total = vec![0.0; n];
    for delta in per_source {
        for (t, d) in total.iter_mut().zip(delta) {
            *t += d;
        }
    }
    // each unordered pair was counted from both endpoints
    for t in &mut total {
        *t /= 2.0;
    }
    total
}

/// Back-propagates pair dependencies from `order` (nodes in non-decreasing
/// distance from `source`).
fn accumulate(source: usize, order: &[usize], preds: &[Vec<usize>], sigma: &[f64]) -> Vec<f64> {
    let mut delta = vec![0.0; sigma.len()];
    for &w in order.iter().rev() {
        let coeff = (1.0 + delta[w]) / sigma[w];
        for &v in &preds[w] {
            delta[v] += sigma[v] * coeff;
        }
    }
    delta[source] = 0.0;
    delta
}

fn dependencies_unweighted(overlay: &FogOverlay, source: usize) -> Vec<f64> {
    let n = overlay.len();
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    dist[source] = 0;
    sigma[source] = 1.0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in overlay.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    accumulate(source, &order, &preds, &sigma)
}

#[derive(PartialEq)]
struct Label {
    dist: f64,
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dependencies_weighted(overlay: &FogOverlay, source: usize) -> Vec<f64> {
    let n = overlay.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    dist[source] = 0.0;
    sigma[source] = 1.0;
    let mut heap = BinaryHeap::from([Label { dist: 0.0, node: source }]);
    while let Some(Label { node: v, .. }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, weight) in overlay.neighbors(v) {
            if settled[w] {
                continue;
            }
            let alt = dist[v] + weight;
            if alt < dist[w] - PATH_LENGTH_TOLERANCE {
                dist[w] = alt;
                sigma[w] = sigma[v];
                preds[w].clear();
                preds[w].push(v);
                heap.push(Label { dist: alt, node: w });
            } else if (alt - dist[w]).abs() <= PATH_LENGTH_TOLERANCE {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    accumulate(source, &order, &preds, &sigma)
}
