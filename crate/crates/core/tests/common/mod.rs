//! Independent brute-force reference implementations used by the
//! integration tests. Nothing here calls the library's algorithms; only its
//! data types are shared.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smartfog::decision::{AreaType, DeviceEvaluation};
use smartfog::overlay::{Arch, DeviceId, FogDevice, FogOverlay};
use smartfog::pareto::{ObjectiveVector, Sense};

pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn device(id: u32, mips: f64, memory_gb: f64) -> FogDevice {
    FogDevice { id: DeviceId(id), mips, memory_gb, storage_gb: 16.0, arch: Arch::Arm }
}

/// How link weights of a random test graph are drawn.
#[derive(Debug, Clone, Copy)]
pub enum Weights {
    /// Integers in {1, 2, 3}: many equal-length shortest paths.
    SmallIntegers,
    /// Continuous uniform in [1, 10].
    Continuous,
}

/// Random connected graph: random spanning tree (each vertex joins an
/// earlier one) plus `extra` random chords. Every device is Cloud-attached.
pub fn random_connected(seed: u64, n: usize, extra: usize, weights: Weights) -> FogOverlay {
    let mut r = rng(seed);
    let draw = |r: &mut ChaCha8Rng| match weights {
        Weights::SmallIntegers => r.random_range(1..=3) as f64,
        Weights::Continuous => r.random_range(1.0..10.0),
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        edges.push((r.random_range(0..v), v));
    }
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    all.shuffle(&mut r);
    for (a, b) in all {
        if edges.len() >= n - 1 + extra {
            break;
        }
        if !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == (a, b)) {
            edges.push((a, b));
        }
    }
    let links: Vec<(DeviceId, DeviceId, f64)> =
        edges.iter().map(|&(a, b)| (DeviceId(a as u32), DeviceId(b as u32), draw(&mut r))).collect();
    let devices = (0..n).map(|i| device(i as u32, r.random_range(800.0..1200.0), r.random_range(1..=4) as f64)).collect();
    let cloud: Vec<(DeviceId, f64)> = (0..n).map(|i| (DeviceId(i as u32), r.random_range(50.0..100.0))).collect();
    FogOverlay::new(devices, links, cloud).unwrap()
}

/// Dense weight matrix (`INFINITY` where there is no link). Index order is
/// the overlay's ascending id order.
pub fn weight_matrix(overlay: &FogOverlay, unit: bool) -> Vec<Vec<f64>> {
    let n = overlay.len();
    let mut w = vec![vec![f64::INFINITY; n]; n];
    for (a, b, latency) in overlay.links() {
        let (i, j) = (overlay.index_of(a).unwrap(), overlay.index_of(b).unwrap());
        let v = if unit { 1.0 } else { latency };
        w[i][j] = v;
        w[j][i] = v;
    }
    w
}

/// Floyd-Warshall all-pairs distances.
pub fn floyd_warshall(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut d = w.to_vec();
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exact non-negative fraction.
#[derive(Debug, Clone, Copy)]
struct Ratio(i128, i128);

impl Ratio {
    fn add(self, other: Ratio) -> Ratio {
        let num = self.0 * other.1 + other.0 * self.1;
        let den = self.1 * other.1;
        let g = gcd(num, den).max(1);
        Ratio(num / g, den / g)
    }
}

/// Betweenness by enumerating every shortest simple path of every
/// unordered pair, accumulated in exact rational arithmetic. Partial paths
/// longer than the distance to their end vertex are cut, which loses no
/// shortest path since every prefix of a shortest path is itself shortest.
pub fn betweenness_oracle(overlay: &FogOverlay, unweighted: bool) -> Vec<f64> {
    let w = weight_matrix(overlay, unweighted);
    let dist = floyd_warshall(&w);
    let n = w.len();
    let mut score = vec![Ratio(0, 1); n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![s];
            let mut on_path = vec![false; n];
            on_path[s] = true;
            enumerate(&w, &dist[s], t, 0.0, &mut stack, &mut on_path, &mut paths);
            let total = paths.len() as i128;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    score[v] = score[v].add(Ratio(1, total));
                }
            }
        }
    }
    score.into_iter().map(|r| r.0 as f64 / r.1 as f64).collect()
}

/// Equal up to floating-point summation order.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn enumerate(
    w: &[Vec<f64>],
    dist_from_source: &[f64],
    target: usize,
    length: f64,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let u = *stack.last().unwrap();
    if u == target {
        if (length - dist_from_source[target]).abs() <= TIE_TOLERANCE {
            out.push(stack.clone());
        }
        return;
    }
    for v in 0..w.len() {
        if on_path[v] || !w[u][v].is_finite() {
            continue;
        }
        let next = length + w[u][v];
        if next > dist_from_source[v] + TIE_TOLERANCE {
            continue;
        }
        on_path[v] = true;
        stack.push(v);
        enumerate(w, dist_from_source, target, next, stack, on_path, out);
        stack.pop();
        on_path[v] = false;
    }
}

/// Minimum latency to the Cloud over every simple path to every
/// Cloud-attached device, without pruning.
pub fn latency_to_cloud_oracle(overlay: &FogOverlay, id: DeviceId) -> f64 {
    let w = weight_matrix(overlay, false);
    let n = w.len();
    let cloud: Vec<Option<f64>> = (0..n).map(|i| overlay.cloud_latency(overlay.id_at(i))).collect();
    let mut best = f64::INFINITY;
    let mut on_path = vec![false; n];
    fn walk(u: usize, length: f64, w: &[Vec<f64>], cloud: &[Option<f64>], on_path: &mut [bool], best: &mut f64) {
        if let Some(c) = cloud[u] {
            *best = best.min(length + c);
        }
        on_path[u] = true;
        for v in 0..w.len() {
            if !on_path[v] && w[u][v].is_finite() {
                walk(v, length + w[u][v], w, cloud, on_path, best);
            }
        }
        on_path[u] = false;
    }
    walk(overlay.index_of(id).unwrap(), 0.0, &w, &cloud, &mut on_path, &mut best);
    best
}

/// Plain dominance written out per objective.
pub fn dominates_oracle(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let mut better = false;
    for k in 0..a.len() {
        let (x, y) = (a.values()[k], b.values()[k]);
        let (x, y) = match a.senses()[k] {
            Sense::Minimize => (x, y),
            Sense::Maximize => (-x, -y),
        };
        if x > y {
            return false;
        }
        if x < y {
            better = true;
        }
    }
    better
}

/// Peels fronts by rescanning all remaining pairs each layer.
pub fn fronts_oracle(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominates_oracle(&points[j], &points[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn random_points(seed: u64, n: usize, senses: &[Sense], distinct_values: Option<u32>) -> Vec<ObjectiveVector> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let values = senses
                .iter()
                .map(|_| match distinct_values {
                    Some(m) => r.random_range(0..m) as f64,
                    None => r.random_range(-100.0..100.0),
                })
                .collect();
            ObjectiveVector::new(values, senses.to_vec()).unwrap()
        })
        .collect()
}

/// Gateway selection replay: exact fronts, then every area (in order)
/// claims the best unclaimed device of the shallowest non-exhausted front
/// under its priority key, breaking ties by lower latency, higher
/// betweenness, lower id.
pub fn selection_oracle(evaluations: &[DeviceEvaluation], areas: &[AreaType]) -> Vec<DeviceId> {
    let points: Vec<ObjectiveVector> = evaluations.iter().map(|e| e.objectives.clone()).collect();
    let fronts = fronts_oracle(&points);
    let mut claimed: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for &area in areas {
        let front = fronts
            .iter()
            .find(|f| f.iter().any(|i| !claimed.contains(i)))
            .expect("enough devices");
        let mut open: Vec<usize> = front.iter().copied().filter(|i| !claimed.contains(i)).collect();
        open.sort_by(|&a, &b| {
            let (ea, eb) = (&evaluations[a], &evaluations[b]);
            let key = |e: &DeviceEvaluation| match area {
                AreaType::ComputeOptimized => e.objectives.values()[1],
                AreaType::MemoryOptimized => e.memory_gb,
            };
            key(eb)
                .partial_cmp(&key(ea))
                .unwrap()
                .then(ea.objectives.values()[2].partial_cmp(&eb.objectives.values()[2]).unwrap())
                .then(eb.objectives.values()[0].partial_cmp(&ea.objectives.values()[0]).unwrap())
                .then(ea.device.cmp(&eb.device))
        });
        claimed.push(open[0]);
        chosen.push(evaluations[open[0]].device);
    }
    chosen
}

/// Lowest within-cluster sum of squares over every split into two
/// non-empty groups.
pub fn best_two_partition_cost(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let sse = |members: &[usize]| {
        let mut centre = vec![0.0; dim];
        for &i in members {
            for d in 0..dim {
                centre[d] += points[i][d];
            }
        }
        centre.iter_mut().for_each(|c| *c /= members.len() as f64);
        members
            .iter()
            .map(|&i| (0..dim).map(|d| (points[i][d] - centre[d]).powi(2)).sum::<f64>())
            .sum::<f64>()
    };
    let mut best = f64::INFINITY;
    // point 0 always in group A; masks over the remaining points
    for mask in 0..(1u32 << (n - 1)) {
        let mut a = vec![0];
        let mut b = Vec::new();
        for i in 1..n {
            if mask & (1 << (i - 1)) != 0 {
                b.push(i);
            } else {
                a.push(i);
            }
        }
        if !b.is_empty() {
            best = best.min(sse(&a) + sse(&b));
        }
    }
    best
}

/// Two device populations, compute-heavy (1200 MIPS, 1 GB) and
/// memory-heavy (800 MIPS, 4 GB), each feature perturbed by up to ±`noise`
/// relative. Devices are shuffled and joined in a random tree.
pub fn planted_overlay(seed: u64, n: usize, noise: f64) -> (FogOverlay, Vec<usize>) {
    let mut r = rng(seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    labels.shuffle(&mut r);
    let devices: Vec<FogDevice> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let (mips, mem) = if l == 0 { (1200.0, 1.0) } else { (800.0, 4.0) };
            let jitter = |r: &mut ChaCha8Rng| 1.0 + r.random_range(-noise..=noise);
            device(i as u32, mips * jitter(&mut r), mem * jitter(&mut r))
        })
        .collect();
    let links: Vec<(DeviceId, DeviceId, f64)> = (1..n)
        .map(|v| (DeviceId(r.random_range(0..v) as u32), DeviceId(v as u32), r.random_range(1.0..10.0)))
        .collect();
    let cloud = vec![(DeviceId(0), 50.0)];
    (FogOverlay::new(devices, links, cloud).unwrap(), labels)
}

/// Rand-index based agreement written from the pair-counting definition.
pub fn adjusted_rand_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut same_both, mut same_a, mut same_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            same_a += sa as u8 as f64;
            same_b += sb as u8 as f64;
            same_both += (sa && sb) as u8 as f64;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = same_a * same_b / pairs;
    let max = (same_a + same_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (same_both - expected) / (max - expected)
}

/// Eigenvalues of a small symmetric matrix by bisection on the inertia
/// count: the number of eigenvalues below `x` equals the number of negative
/// pivots of `A - xI` (Sylvester). Independent of any rotation method.
pub fn eigenvalues_by_bisection(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let bound = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let below = |x: f64| -> usize {
        let mut m: Vec<Vec<f64>> = a.to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= x;
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut pivot = m[k][k];
            if pivot == 0.0 {
                pivot = -1e-300;
            }
            if pivot < 0.0 {
                negatives += 1;
            }
            let (upper, lower) = m.split_at_mut(k + 1);
            let pivot_row = &upper[k];
            for row in lower.iter_mut() {
                let f = row[k] / pivot;
                for (x, p) in row[k..n].iter_mut().zip(&pivot_row[k..n]) {
                    *x -= f * p;
                }
            }
        }
        negatives
    };
    (0..n)
        .map(|k| {
            // smallest x with at least k + 1 eigenvalues below it
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
