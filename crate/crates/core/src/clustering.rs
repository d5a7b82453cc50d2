//! Spectral clustering of fog devices into functional areas.
//!
//! Each gateway clusters the non-gateway devices by (MIPS, memory):
//! standardized features, a Gaussian similarity matrix, the symmetric
//! normalized Laplacian `I - D^-1/2 S D^-1/2`, its `k` lowest eigenvectors
//! with rows scaled to unit length, and finally k-means on those rows. The
//! gateway keeps the cluster whose mean resources best match its area type.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decision::{AreaType, GatewayAssignment};
use crate::eigen::{symmetric_eigen, DenseMatrix};
use crate::overlay::{DeviceId, FogOverlay};
use crate::rng::{self, SimRng};
use crate::{stats, Error, Execution, Result};

/// Standardized (mips, memory_gb) features, one row per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub devices: Vec<DeviceId>,
    pub rows: Vec<[f64; 2]>,
}

impl FeatureMatrix {
    /// Standardizes each column to zero mean and unit (population)
    /// variance. A constant column becomes all zeros.
    pub fn standardized(devices: Vec<DeviceId>, raw: &[[f64; 2]]) -> Result<Self> {
        if devices.len() != raw.len() {
            return Err(Error::contract("one feature row per device is required"));
        }
        if raw.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::contract("features must be finite"));
        }
        let n = raw.len() as f64;
        let mut rows = raw.to_vec();
        for col in 0..2 {
            let mean = raw.iter().map(|r| r[col]).sum::<f64>() / n;
            let var = raw.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            for r in &mut rows {
                r[col] = if sd > 0.0 { (r[col] - mean) / sd } else { 0.0 };
            }
        }
        Ok(FeatureMatrix { devices, rows })
    }

    pub fn from_overlay(overlay: &FogOverlay, devices: &[DeviceId]) -> Result<Self> {
        let raw = devices
            .iter()
            .map(|&id| overlay.device(id).map(|d| [d.mips, d.memory_gb]))
            .collect::<Result<Vec<_>>>()?;
        Self::standardized(devices.to_vec(), &raw)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn sq_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.rows[i], self.rows[j]);
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
    }
}

/// Median pairwise Euclidean distance; falls back to the mean positive
/// distance, then to 1, when the median is zero.
pub fn default_bandwidth(features: &FeatureMatrix) -> f64 {
    let n = features.len();
    let distances: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| features.sq_distance(i, j).sqrt())
        .collect();
    let median = stats::median(&distances);
    if median > 0.0 {
        return median;
    }
    let positive: Vec<f64> = distances.into_iter().filter(|&d| d > 0.0).collect();
    if positive.is_empty() {
        1.0
    } else {
        stats::mean(&positive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub matrix: DenseMatrix,
    /// Gaussian bandwidth; `None` for matrices supplied directly.
    pub bandwidth: Option<f64>,
}

impl SimilarityMatrix {
    /// Wraps a precomputed affinity matrix (for example a thresholded one
    /// with exact zeros). Must be symmetric with unit diagonal and entries
    /// in [0, 1].
    pub fn from_affinity(matrix: DenseMatrix) -> Result<Self> {
        let n = matrix.rows();
        if n < 1 || !matrix.is_symmetric(0.0) {
            return Err(Error::contract("affinity must be square and symmetric"));
        }
        for i in 0..n {
            if matrix[(i, i)] != 1.0 {
                return Err(Error::contract("affinity diagonal must be 1"));
            }
            if matrix.row(i).iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::contract("affinity entries must lie in [0, 1]"));
            }
        }
        Ok(SimilarityMatrix { matrix, bandwidth: None })
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }
}

/// `S_ij = exp(-‖x_i - x_j‖² / (2 G²))`, floored at the smallest positive
/// normal so every entry stays in (0, 1].
pub fn similarity_matrix(features: &FeatureMatrix, bandwidth: f64) -> Result<SimilarityMatrix> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::config("bandwidth", format!("must be finite and > 0, got {bandwidth}")));
    }
    let n = features.len();
    if n < 2 {
        return Err(Error::contract("similarity needs at least two devices"));
    }
    let denom = 2.0 * bandwidth * bandwidth;
    let mut matrix = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            let s = (-features.sq_distance(i, j) / denom).exp().max(f64::MIN_POSITIVE);
            matrix[(i, j)] = s;
            matrix[(j, i)] = s;
        }
    }
    Ok(SimilarityMatrix { matrix, bandwidth: Some(bandwidth) })
}

/// Symmetric normalized Laplacian `I - D^-1/2 S D^-1/2`.
pub fn normalized_laplacian(similarity: &SimilarityMatrix) -> DenseMatrix {
    let s = &similarity.matrix;
    let n = s.rows();
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / s.row(i).iter().sum::<f64>().sqrt()).collect();
    DenseMatrix::from_fn(n, n, |i, j| {
        let off = s[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    pub laplacian: DenseMatrix,
    /// The `k` smallest Laplacian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching unit eigenvectors as columns (n × k).
    pub eigenvectors: DenseMatrix,
    /// `eigenvectors` with every row scaled to unit length (zero rows kept).
    pub rows: DenseMatrix,
}

pub fn spectral_embed(similarity: &SimilarityMatrix, k: usize) -> Result<SpectralEmbedding> {
    let n = similarity.len();
    if k == 0 || k > n {
        return Err(Error::contract(format!("embedding dimension {k} outside [1, {n}]")));
    }
    let laplacian = normalized_laplacian(similarity);
    let eigen = symmetric_eigen(&laplacian)?;
    let eigenvectors = DenseMatrix::from_fn(n, k, |i, j| eigen.vectors[(i, j)]);
    let mut rows = eigenvectors.clone();
    for i in 0..n {
        let row = rows.row_mut(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(SpectralEmbedding { laplacian, eigenvalues: eigen.values[..k].to_vec(), eigenvectors, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Independent seeded starts; the lowest-cost run wins.
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { max_iterations: 300, restarts: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    /// Sum of squared distances to the assigned centroids.
    pub cost: f64,
}

pub fn k_means(points: &DenseMatrix, k: usize, seed: u64) -> Result<KMeans> {
    k_means_with(points, k, seed, &KMeansConfig::default())
}

pub fn k_means_with(points: &DenseMatrix, k: usize, seed: u64, config: &KMeansConfig) -> Result<KMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::contract(format!("k = {k} must lie in [1, {n}]")));
    }
    if config.restarts == 0 || config.max_iterations == 0 {
        return Err(Error::config("k_means", "restarts and max_iterations must be >= 1"));
    }
    let mut best: Option<KMeans> = None;
    for restart in 0..config.restarts {
        let mut rng = rng::stream(seed, rng::STREAM_KMEANS + 16 * restart as u64);
        let run = lloyd(points, k, config.max_iterations, &mut rng);
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Distance-weighted seeding: the first centre is uniform, each further
/// centre is drawn with probability proportional to the squared distance
/// to the nearest centre already chosen.
fn seed_centroids(points: &DenseMatrix, k: usize, rng: &mut SimRng) -> Vec<usize> {
    let n = points.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.unwrap()
        } else {
            // every point coincides with a centre: take an unused index
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    chosen
}

fn nearest_centroid(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    (0..centroids.rows())
        .map(|c| (c, sq_dist(point, centroids.row(c))))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn centroids_of(points: &DenseMatrix, labels: &[usize], k: usize) -> DenseMatrix {
    let mut centroids = DenseMatrix::zeros(k, points.cols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (c, x) in centroids.row_mut(l).iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    for (l, &count) in counts.iter().enumerate() {
        if count > 0 {
            centroids.row_mut(l).iter_mut().for_each(|c| *c /= count as f64);
        }
    }
    centroids
}

fn lloyd(points: &DenseMatrix, k: usize, max_iterations: usize, rng: &mut SimRng) -> KMeans {
    let n = points.rows();
    let seeds = seed_centroids(points, k, rng);
    let mut centroids = DenseMatrix::from_fn(k, points.cols(), |c, j| points[(seeds[c], j)]);
    let mut labels: Vec<usize> = Vec::new();
    for _ in 0..max_iterations {
        let mut next: Vec<usize> = (0..n).map(|i| nearest_centroid(points.row(i), &centroids).0).collect();
        reseed_empty(points, &centroids, &mut next, k);
        if next == labels {
            break;
        }
        labels = next;
        centroids = centroids_of(points, &labels, k);
    }
    let cost = (0..n).map(|i| sq_dist(points.row(i), centroids.row(labels[i]))).sum();
    KMeans { labels, centroids, cost }
}

/// Moves the point farthest from its centroid (taken from a cluster with
/// more than one member) into each empty cluster.
fn reseed_empty(points: &DenseMatrix, centroids: &DenseMatrix, labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let far = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .map(|i| (i, sq_dist(points.row(i), centroids.row(labels[i]))))
            .fold(None::<(usize, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .expect("k <= n leaves a donor cluster")
            .0;
        counts[labels[far]] -= 1;
        labels[far] = empty;
        counts[empty] = 1;
    }
}

/// Spectral clustering of an arbitrary device subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceClustering {
    pub devices: Vec<DeviceId>,
    pub labels: Vec<usize>,
    pub bandwidth: Option<f64>,
}

/// Clusters `devices` of `overlay` into `k` groups. `bandwidth = None`
/// uses [`default_bandwidth`].
pub fn cluster_devices(
    overlay: &FogOverlay,
    devices: &[DeviceId],
    k: usize,
    bandwidth: Option<f64>,
    seed: u64,
) -> Result<DeviceClustering> {
    if k == 0 {
        return Err(Error::config("k", "must be >= 1"));
    }
    if devices.len() < k {
        return Err(Error::Capacity { requested: k, available: devices.len() });
    }
    let features = FeatureMatrix::from_overlay(overlay, devices)?;
    if devices.len() == 1 {
        return Ok(DeviceClustering { devices: devices.to_vec(), labels: vec![0], bandwidth });
    }
    let g = match bandwidth {
        Some(g) => g,
        None => default_bandwidth(&features),
    };
    let similarity = similarity_matrix(&features, g)?;
    let embedding = spectral_embed(&similarity, k)?;
    let km = k_means(&embedding.rows, k, seed)?;
    Ok(DeviceClustering { devices: devices.to_vec(), labels: km.labels, bandwidth: Some(g) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalArea {
    pub owner_gateway: DeviceId,
    pub area_type: AreaType,
    /// Ascending ids.
    pub members: Vec<DeviceId>,
    pub cluster_label: usize,
}

pub fn cluster_functional_areas(
    overlay: &FogOverlay,
    assignment: &GatewayAssignment,
    k: usize,
    bandwidth: Option<f64>,
    seed: u64,
) -> Result<Vec<FunctionalArea>> {
    cluster_functional_areas_with(overlay, assignment, k, bandwidth, seed, Execution::default())
}

/// Runs one independent clustering per gateway; gateway `i` seeds its
/// k-means with `seed ^ i`.
pub fn cluster_functional_areas_with(
    overlay: &FogOverlay,
    assignment: &GatewayAssignment,
    k: usize,
    bandwidth: Option<f64>,
    seed: u64,
    exec: Execution,
) -> Result<Vec<FunctionalArea>> {
    if k == 0 {
        return Err(Error::config("k", "must be >= 1"));
    }
    for id in assignment.devices() {
        overlay.index_of(id)?;
    }
    let candidates: Vec<DeviceId> = overlay
        .devices()
        .iter()
        .map(|d| d.id)
        .filter(|&id| !assignment.contains(id))
        .collect();
    if candidates.len() < k {
        return Err(Error::Capacity { requested: k, available: candidates.len() });
    }
    let jobs: Vec<(usize, crate::decision::Gateway)> = assignment.gateways.iter().copied().enumerate().collect();
    exec.map(&jobs, |&(i, gateway)| {
        let clustering = cluster_devices(overlay, &candidates, k, bandwidth, seed ^ i as u64)?;
        pick_area(overlay, &clustering, k, gateway.device, gateway.area_type)
    })
    .into_iter()
    .collect()
}

fn pick_area(
    overlay: &FogOverlay,
    clustering: &DeviceClustering,
    k: usize,
    owner: DeviceId,
    area_type: AreaType,
) -> Result<FunctionalArea> {
    let mut sums = vec![[0.0f64; 2]; k];
    let mut counts = vec![0usize; k];
    for (&id, &label) in clustering.devices.iter().zip(&clustering.labels) {
        let d = overlay.device(id)?;
        sums[label][0] += d.mips;
        sums[label][1] += d.memory_gb;
        counts[label] += 1;
    }
    let (primary, secondary) = match area_type {
        AreaType::ComputeOptimized => (0, 1),
        AreaType::MemoryOptimized => (1, 0),
    };
    let mean = |label: usize, col: usize| sums[label][col] / counts[label] as f64;
    let best = (0..k)
        .filter(|&l| counts[l] > 0)
        .max_by(|&a, &b| {
            mean(a, primary)
                .total_cmp(&mean(b, primary))
                .then(mean(a, secondary).total_cmp(&mean(b, secondary)))
                .then(b.cmp(&a))
        })
        .ok_or_else(|| Error::contract("clustering produced no non-empty cluster"))?;
    let members = clustering
        .devices
        .iter()
        .zip(&clustering.labels)
        .filter(|&(_, &l)| l == best)
        .map(|(&id, _)| id)
        .collect();
    Ok(FunctionalArea { owner_gateway: owner, area_type, members, cluster_label: best })
}

/// Functional-area export: a JSON array of
/// `{owner_gateway, area_type, members, cluster_label}` records.
pub fn areas_to_json(areas: &[FunctionalArea]) -> Result<String> {
    Ok(serde_json::to_string_pretty(areas)?)
}

/// Chance-corrected agreement between two labelings of the same items.
/// Returns 1 when both labelings are a single identical partition.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::contract("labelings differ in length"));
    }
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let rows: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| pairs(table.iter().map(|r| r[j]).sum())).sum();
    let total = pairs(n as u64);
    let expected = rows * cols / total;
    let max = (rows + cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
