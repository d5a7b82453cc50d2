//! Fog overlay: devices, latency-weighted links, Cloud attachment and churn.
//!
//! A [`FogOverlay`] is an immutable value. Every constructor and every churn
//! event validates the invariants (unique ids, positive latencies, no
//! self-loops, a single connected component, at least one Cloud-attached
//! device), so any overlay that exists is well formed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, SimRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arch {
    #[serde(rename = "ARM")]
    Arm,
    #[serde(rename = "X86")]
    X86,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogDevice {
    pub id: DeviceId,
    /// Million instructions per second.
    pub mips: f64,
    pub memory_gb: f64,
    pub storage_gb: f64,
    pub arch: Arch,
}

impl FogDevice {
    fn validate(&self) -> Result<()> {
        if !(self.mips.is_finite() && self.mips > 0.0) {
            return Err(Error::contract(format!("device {}: mips must be > 0", self.id)));
        }
        if !(self.memory_gb.is_finite() && self.memory_gb > 0.0) {
            return Err(Error::contract(format!("device {}: memory_gb must be > 0", self.id)));
        }
        if !(self.storage_gb.is_finite() && self.storage_gb >= 0.0) {
            return Err(Error::contract(format!("device {}: storage_gb must be >= 0", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub a: DeviceId,
    pub b: DeviceId,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRecord {
    pub id: DeviceId,
    pub latency_ms: f64,
}

/// Serialized form of an overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayDoc {
    pub devices: Vec<FogDevice>,
    pub links: Vec<LinkRecord>,
    pub cloud: Vec<CloudRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OverlayDoc", into = "OverlayDoc")]
pub struct FogOverlay {
    /// Sorted by id.
    devices: Vec<FogDevice>,
    /// Keyed by (smaller id, larger id).
    links: BTreeMap<(DeviceId, DeviceId), f64>,
    cloud: BTreeMap<DeviceId, f64>,
    /// Index-based adjacency derived from `links`; neighbours sorted by index.
    adjacency: Vec<Vec<(usize, f64)>>,
}

fn positive_latency(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::contract(format!("{what}: latency must be finite and > 0, got {value}")))
    }
}

impl FogOverlay {
    /// Builds an overlay from its parts, validating every invariant.
    pub fn new(
        mut devices: Vec<FogDevice>,
        links: impl IntoIterator<Item = (DeviceId, DeviceId, f64)>,
        cloud: impl IntoIterator<Item = (DeviceId, f64)>,
    ) -> Result<Self> {
        if devices.is_empty() {
            return Err(Error::Topology("overlay has no devices".into()));
        }
        devices.sort_by_key(|d| d.id);
        for pair in devices.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Conflict(pair[0].id));
            }
        }
        for d in &devices {
            d.validate()?;
        }
        let contains = |id: DeviceId| devices.binary_search_by_key(&id, |d| d.id).is_ok();

        let mut link_map = BTreeMap::new();
        for (a, b, w) in links {
            if a == b {
                return Err(Error::Topology(format!("self-loop on device {a}")));
            }
            for id in [a, b] {
                if !contains(id) {
                    return Err(Error::UnknownDevice(id));
                }
            }
            positive_latency(w, &format!("link {a}-{b}"))?;
            let key = if a < b { (a, b) } else { (b, a) };
            if link_map.insert(key, w).is_some() {
                return Err(Error::Topology(format!("duplicate link {a}-{b}")));
            }
        }

        let mut cloud_map = BTreeMap::new();
        for (id, w) in cloud {
            if !contains(id) {
                return Err(Error::UnknownDevice(id));
            }
            positive_latency(w, &format!("cloud link of {id}"))?;
            if cloud_map.insert(id, w).is_some() {
                return Err(Error::Topology(format!("duplicate cloud entry for {id}")));
            }
        }
        if cloud_map.is_empty() {
            return Err(Error::Topology("no device is attached to the Cloud".into()));
        }

        let index = |id: DeviceId| devices.binary_search_by_key(&id, |d| d.id).unwrap();
        let mut adjacency = vec![Vec::new(); devices.len()];
        for (&(a, b), &w) in &link_map {
            let (ia, ib) = (index(a), index(b));
            adjacency[ia].push((ib, w));
            adjacency[ib].push((ia, w));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(j, _)| j);
        }

        let overlay = FogOverlay { devices, links: link_map, cloud: cloud_map, adjacency };
        if !overlay.is_connected() {
            return Err(Error::Topology("overlay is not connected".into()));
        }
        Ok(overlay)
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    /// Devices sorted by id. Positions in this slice are the "device index"
    /// used by the index-based APIs.
    pub fn devices(&self) -> &[FogDevice] {
        &self.devices
    }

    pub fn device(&self, id: DeviceId) -> Result<&FogDevice> {
        self.index_of(id).map(|i| &self.devices[i])
    }

    pub fn index_of(&self, id: DeviceId) -> Result<usize> {
        self.devices
            .binary_search_by_key(&id, |d| d.id)
            .map_err(|_| Error::UnknownDevice(id))
    }

    pub fn id_at(&self, index: usize) -> DeviceId {
        self.devices[index].id
    }

    pub fn contains(&self, id: DeviceId) -> bool {
        self.index_of(id).is_ok()
    }

    /// Links as `(a, b, latency_ms)` with `a < b`, in ascending order.
    pub fn links(&self) -> impl Iterator<Item = (DeviceId, DeviceId, f64)> + '_ {
        self.links.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn link_latency(&self, a: DeviceId, b: DeviceId) -> Option<f64> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.links.get(&key).copied()
    }

    pub fn cloud_latency(&self, id: DeviceId) -> Option<f64> {
        self.cloud.get(&id).copied()
    }

    pub fn cloud_attached(&self) -> impl Iterator<Item = (DeviceId, f64)> + '_ {
        self.cloud.iter().map(|(&id, &w)| (id, w))
    }

    /// Neighbours of the device at `index` as `(index, latency_ms)`.
    pub fn neighbors(&self, index: usize) -> &[(usize, f64)] {
        &self.adjacency[index]
    }

    pub fn degree(&self, id: DeviceId) -> Result<usize> {
        Ok(self.adjacency[self.index_of(id)?].len())
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_count(None) == self.devices.len()
    }

    /// Number of devices reachable from the first device not equal to
    /// `skip`, ignoring `skip` entirely.
    fn reachable_count(&self, skip: Option<usize>) -> usize {
        let n = self.devices.len();
        let Some(start) = (0..n).find(|&i| Some(i) != skip) else {
            return 0;
        };
        let mut seen = vec![false; n];
        if let Some(s) = skip {
            seen[s] = true;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count
    }

    /// Whether removing the device at `index` keeps the rest connected and
    /// leaves at least one Cloud-attached device.
    fn can_remove(&self, index: usize) -> bool {
        let n = self.devices.len();
        if n <= 1 {
            return false;
        }
        let id = self.devices[index].id;
        if self.cloud.len() == 1 && self.cloud.contains_key(&id) {
            return false;
        }
        self.reachable_count(Some(index)) == n - 1
    }

    /// Single-source shortest paths by latency, ties broken by hop count.
    pub fn shortest_paths(&self, source: usize) -> ShortestPaths {
        dijkstra(&self.adjacency, &[(source, 0.0)])
    }

    /// Latency to the Cloud: minimum over Cloud-attached devices `g` of the
    /// shortest-path latency to `g` plus `g`'s Cloud link.
    pub fn latency_to_cloud(&self, id: DeviceId) -> Result<f64> {
        let paths = self.shortest_paths(self.index_of(id)?);
        let best = self
            .cloud
            .iter()
            .map(|(&g, &w)| paths.latency[self.index_of(g).unwrap()] + w)
            .fold(f64::INFINITY, f64::min);
        Ok(best)
    }

    /// Latency to the Cloud of every device (by index), computed in one
    /// multi-source search seeded with the Cloud link latencies.
    pub fn latencies_to_cloud(&self) -> Vec<f64> {
        let seeds: Vec<(usize, f64)> = self
            .cloud
            .iter()
            .map(|(&g, &w)| (self.index_of(g).unwrap(), w))
            .collect();
        dijkstra(&self.adjacency, &seeds).latency
    }

    /// Returns a new overlay with `event` applied. `self` is left untouched.
    pub fn apply_churn(&self, event: &ChurnEvent) -> Result<FogOverlay> {
        match &event.kind {
            ChurnKind::Join { device, links, cloud_latency_ms } => {
                if self.contains(device.id) {
                    return Err(Error::Conflict(device.id));
                }
                if links.is_empty() {
                    return Err(Error::ChurnRejected(format!(
                        "joining device {} brings no links and would be isolated",
                        device.id
                    )));
                }
                let mut devices = self.devices.clone();
                devices.push(device.clone());
                let new_links = links.iter().map(|&(peer, w)| (device.id, peer, w));
                let cloud = self.cloud_attached().chain(cloud_latency_ms.map(|w| (device.id, w)));
                FogOverlay::new(devices, self.links().chain(new_links), cloud)
            }
            ChurnKind::Leave { device } => {
                let index = self.index_of(*device)?;
                if !self.can_remove(index) {
                    return Err(Error::ChurnRejected(format!(
                        "removing device {device} would disconnect the overlay or cut it off from the Cloud"
                    )));
                }
                let devices = self.devices.iter().filter(|d| d.id != *device).cloned().collect();
                let links = self.links().filter(|&(a, b, _)| a != *device && b != *device);
                let cloud = self.cloud_attached().filter(|&(g, _)| g != *device);
                FogOverlay::new(devices, links, cloud)
            }
        }
    }

    pub fn to_doc(&self) -> OverlayDoc {
        OverlayDoc {
            devices: self.devices.clone(),
            links: self.links().map(|(a, b, latency_ms)| LinkRecord { a, b, latency_ms }).collect(),
            cloud: self.cloud_attached().map(|(id, latency_ms)| CloudRecord { id, latency_ms }).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl TryFrom<OverlayDoc> for FogOverlay {
    type Error = Error;

    fn try_from(doc: OverlayDoc) -> Result<Self> {
        FogOverlay::new(
            doc.devices,
            doc.links.into_iter().map(|l| (l.a, l.b, l.latency_ms)),
            doc.cloud.into_iter().map(|c| (c.id, c.latency_ms)),
        )
    }
}

impl From<FogOverlay> for OverlayDoc {
    fn from(overlay: FogOverlay) -> Self {
        overlay.to_doc()
    }
}

/// Result of a shortest-path search, indexed by device index.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub latency: Vec<f64>,
    pub hops: Vec<u32>,
}

#[derive(PartialEq)]
struct Frontier {
    latency: f64,
    hops: u32,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .latency
            .total_cmp(&self.latency)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra ordered by (latency, hops). Unreachable nodes keep
/// infinite latency and `u32::MAX` hops.
fn dijkstra(adjacency: &[Vec<(usize, f64)>], sources: &[(usize, f64)]) -> ShortestPaths {
    let n = adjacency.len();
    let mut latency = vec![f64::INFINITY; n];
    let mut hops = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    for &(s, offset) in sources {
        if offset < latency[s] {
            latency[s] = offset;
            hops[s] = 0;
            heap.push(Frontier { latency: offset, hops: 0, node: s });
        }
    }
    let mut done = vec![false; n];
    while let Some(Frontier { latency: d, hops: h, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, weight) in &adjacency[v] {
            let (alt, alt_hops) = (d + weight, h + 1);
            if alt < latency[w] || (alt == latency[w] && alt_hops < hops[w]) {
                latency[w] = alt;
                hops[w] = alt_hops;
                heap.push(Frontier { latency: alt, hops: alt_hops, node: w });
            }
        }
    }
    ShortestPaths { latency, hops }
}

/// All-pairs shortest paths, by device index.
#[derive(Debug, Clone)]
pub struct PathTable {
    rows: Vec<ShortestPaths>,
}

impl PathTable {
    pub fn new(overlay: &FogOverlay) -> Self {
        PathTable { rows: (0..overlay.len()).map(|i| overlay.shortest_paths(i)).collect() }
    }

    pub fn latency(&self, from: usize, to: usize) -> f64 {
        self.rows[from].latency[to]
    }

    pub fn hops(&self, from: usize, to: usize) -> u32 {
        self.rows[from].hops[to]
    }
}

/// Generator parameters. Defaults follow the evaluated fog testbed:
/// 800-1200 MIPS, 1-4 GB memory, 16 GB storage, mean degree 3, link
/// latencies 1-10 ms, Cloud links 50-100 ms on every device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverlayParams {
    pub mips_min: f64,
    pub mips_max: f64,
    /// Memory is drawn as a whole number of gigabytes in this range.
    pub memory_min_gb: u32,
    pub memory_max_gb: u32,
    pub storage_gb: f64,
    pub mean_degree: f64,
    pub link_latency_min_ms: f64,
    pub link_latency_max_ms: f64,
    pub cloud_latency_min_ms: f64,
    pub cloud_latency_max_ms: f64,
    /// Fraction of devices given a direct Cloud link (at least one always is).
    pub cloud_attach_fraction: f64,
}

impl Default for OverlayParams {
    fn default() -> Self {
        OverlayParams {
            mips_min: 800.0,
            mips_max: 1200.0,
            memory_min_gb: 1,
            memory_max_gb: 4,
            storage_gb: 16.0,
            mean_degree: 3.0,
            link_latency_min_ms: 1.0,
            link_latency_max_ms: 10.0,
            cloud_latency_min_ms: 50.0,
            cloud_latency_max_ms: 100.0,
            cloud_attach_fraction: 1.0,
        }
    }
}

fn check_range(field: &str, min: f64, max: f64, strictly_positive: bool) -> Result<()> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::config(field, "bounds must be finite"));
    }
    if strictly_positive && min <= 0.0 {
        return Err(Error::config(field, format!("lower bound must be > 0, got {min}")));
    }
    if min > max {
        return Err(Error::config(field, format!("empty range [{min}, {max}]")));
    }
    Ok(())
}

impl OverlayParams {
    pub fn validate(&self) -> Result<()> {
        check_range("mips", self.mips_min, self.mips_max, true)?;
        if self.memory_min_gb == 0 || self.memory_min_gb > self.memory_max_gb {
            return Err(Error::config(
                "memory_gb",
                format!("invalid range [{}, {}]", self.memory_min_gb, self.memory_max_gb),
            ));
        }
        if !(self.storage_gb.is_finite() && self.storage_gb >= 0.0) {
            return Err(Error::config("storage_gb", "must be finite and >= 0"));
        }
        if !(self.mean_degree.is_finite() && self.mean_degree >= 0.0) {
            return Err(Error::config("mean_degree", "must be finite and >= 0"));
        }
        check_range("link_latency_ms", self.link_latency_min_ms, self.link_latency_max_ms, true)?;
        check_range("cloud_latency_ms", self.cloud_latency_min_ms, self.cloud_latency_max_ms, true)?;
        if !(self.cloud_attach_fraction > 0.0 && self.cloud_attach_fraction <= 1.0) {
            return Err(Error::config("cloud_attach_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }

    fn random_device(&self, id: DeviceId, rng: &mut SimRng) -> FogDevice {
        FogDevice {
            id,
            mips: rng.random_range(self.mips_min..=self.mips_max),
            memory_gb: rng.random_range(self.memory_min_gb..=self.memory_max_gb) as f64,
            storage_gb: self.storage_gb,
            arch: if rng.random_bool(0.5) { Arch::Arm } else { Arch::X86 },
        }
    }

    fn link_latency(&self, rng: &mut SimRng) -> f64 {
        rng.random_range(self.link_latency_min_ms..=self.link_latency_max_ms)
    }

    fn cloud_latency(&self, rng: &mut SimRng) -> f64 {
        rng.random_range(self.cloud_latency_min_ms..=self.cloud_latency_max_ms)
    }
}

/// Uniformly random labelled tree on `n` nodes via a random Prüfer sequence.
fn random_tree(n: usize, rng: &mut SimRng) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Generates a random connected mesh: a uniform spanning tree plus random
/// chords until the mean degree target is met. Deterministic per seed.
pub fn build_overlay(n_devices: usize, seed: u64, params: &OverlayParams) -> Result<FogOverlay> {
    if n_devices < 2 {
        return Err(Error::config("n_devices", format!("need at least 2 devices, got {n_devices}")));
    }
    if n_devices > u32::MAX as usize {
        return Err(Error::config("n_devices", "too many devices"));
    }
    params.validate()?;
    let mut rng = rng::stream(seed, rng::STREAM_TOPOLOGY);

    let devices: Vec<FogDevice> = (0..n_devices)
        .map(|i| params.random_device(DeviceId(i as u32), &mut rng))
        .collect();

    let tree = random_tree(n_devices, &mut rng);
    let max_edges = n_devices * (n_devices - 1) / 2;
    let target = ((params.mean_degree * n_devices as f64 / 2.0).round() as usize)
        .clamp(n_devices - 1, max_edges);

    let in_tree: BTreeSet<(usize, usize)> = tree.iter().copied().collect();
    let mut candidates: Vec<(usize, usize)> = (0..n_devices)
        .flat_map(|a| (a + 1..n_devices).map(move |b| (a, b)))
        .filter(|e| !in_tree.contains(e))
        .collect();
    candidates.shuffle(&mut rng);

    let mut edges = tree;
    edges.extend(candidates.into_iter().take(target - (n_devices - 1)));
    let links: Vec<(DeviceId, DeviceId, f64)> = edges
        .into_iter()
        .map(|(a, b)| (DeviceId(a as u32), DeviceId(b as u32), params.link_latency(&mut rng)))
        .collect();

    let attached = ((params.cloud_attach_fraction * n_devices as f64).round() as usize).clamp(1, n_devices);
    let mut order: Vec<usize> = (0..n_devices).collect();
    if attached < n_devices {
        order.shuffle(&mut rng);
        order.truncate(attached);
        order.sort_unstable();
    }
    let cloud: Vec<(DeviceId, f64)> = order
        .into_iter()
        .map(|i| (DeviceId(i as u32), params.cloud_latency(&mut rng)))
        .collect();

    FogOverlay::new(devices, links, cloud)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChurnKind {
    Join {
        device: FogDevice,
        /// Attachment links `(existing device, latency_ms)`.
        links: Vec<(DeviceId, f64)>,
        cloud_latency_ms: Option<f64>,
    },
    Leave {
        device: DeviceId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChurnEvent {
    pub time_ms: f64,
    pub kind: ChurnKind,
}

/// Parameters of the random join/leave process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChurnParams {
    /// Mean of the exponential inter-event time.
    pub mean_interval_ms: f64,
    pub join_probability: f64,
    /// Number of attachment links a joining device brings.
    pub join_links: usize,
}

impl Default for ChurnParams {
    fn default() -> Self {
        ChurnParams { mean_interval_ms: 10_000.0, join_probability: 0.5, join_links: 2 }
    }
}

/// Generates a churn trace over `[0, horizon_ms)` starting from `overlay`.
///
/// Leaves are drawn only among devices whose removal keeps the overlay
/// connected, so every emitted event is accepted by [`FogOverlay::apply_churn`]
/// when replayed in order. Returns the events and the final overlay.
pub fn generate_churn(
    overlay: &FogOverlay,
    churn: &ChurnParams,
    params: &OverlayParams,
    seed: u64,
    horizon_ms: f64,
) -> Result<(Vec<ChurnEvent>, FogOverlay)> {
    if !(churn.mean_interval_ms.is_finite() && churn.mean_interval_ms > 0.0) {
        return Err(Error::config("mean_interval_ms", "must be > 0"));
    }
    if !(0.0..=1.0).contains(&churn.join_probability) {
        return Err(Error::config("join_probability", "must lie in [0, 1]"));
    }
    if churn.join_links == 0 {
        return Err(Error::config("join_links", "must be >= 1"));
    }
    params.validate()?;
    let mut rng = rng::stream(seed, rng::STREAM_CHURN);
    let mut current = overlay.clone();
    let mut next_id = current.devices.iter().map(|d| d.id.0).max().unwrap() + 1;
    let mut events = Vec::new();
    let mut time = 0.0;
    loop {
        let u: f64 = rng.random();
        time += -(1.0 - u).ln() * churn.mean_interval_ms;
        if time >= horizon_ms {
            break;
        }
        let removable: Vec<usize> = (0..current.len()).filter(|&i| current.can_remove(i)).collect();
        let join = removable.is_empty() || rng.random_bool(churn.join_probability);
        let kind = if join {
            let device = params.random_device(DeviceId(next_id), &mut rng);
            next_id += 1;
            let mut peers: Vec<usize> = (0..current.len()).collect();
            peers.shuffle(&mut rng);
            peers.truncate(churn.join_links.min(current.len()));
            peers.sort_unstable();
            let links = peers
                .into_iter()
                .map(|i| (current.id_at(i), params.link_latency(&mut rng)))
                .collect();
            let cloud_latency_ms = rng
                .random_bool(params.cloud_attach_fraction)
                .then(|| params.cloud_latency(&mut rng));
            ChurnKind::Join { device, links, cloud_latency_ms }
        } else {
            let pick = removable[rng.random_range(0..removable.len())];
            ChurnKind::Leave { device: current.id_at(pick) }
        };
        let event = ChurnEvent { time_ms: time, kind };
        current = current.apply_churn(&event)?;
        events.push(event);
    }
    Ok((events, current))
}
