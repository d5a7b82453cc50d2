//! Discrete-event simulation of the sense-process-actuate model.
//!
//! Sensors (each paired with an actuator) reach the fog layer through an
//! edge access link attached to a home device. Two loops are measured:
//!
//! * SPA: sensor → processing device (access link plus overlay path),
//!   FIFO queueing and processing at the device, response back to the
//!   actuator along the same route.
//! * PC: tuples travel from the sensor to an aggregating device; the loop
//!   runs from that device through a forwarding device (the owning gateway
//!   under SmartFog) to the Cloud, FIFO processing on the Cloud host, and
//!   back to the device.
//!
//! Network load counts every payload once per traversed link (bytes × hops).
//! Events are ordered by `(time, sequence)` so runs are deterministic.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::FunctionalArea;
use crate::decision::{AreaType, GatewayAssignment};
use crate::overlay::{DeviceId, FogOverlay, PathTable};
use crate::rng::{self, SimRng};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    SmartFog,
    UnoptimizedFog,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SmartFog => "SmartFog",
            Mode::UnoptimizedFog => "UnoptimizedFog",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smartfog" | "smart" => Ok(Mode::SmartFog),
            "unoptimizedfog" | "unoptimized" | "baseline" => Ok(Mode::UnoptimizedFog),
            other => Err(Error::config("modes", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TupleKind {
    Spa,
    Pc,
}

/// Workload and environment of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadSpec {
    /// Number of sensor/actuator pairs; `None` places one per device.
    pub sensors: Option<usize>,
    /// Mean SPA emission interval per sensor; `None` disables SPA tuples.
    pub spa_period_ms: Option<f64>,
    /// Mean PC emission interval per sensor; `None` disables PC tuples.
    pub pc_period_ms: Option<f64>,
    /// Relative uniform jitter on every emission interval.
    pub jitter: f64,
    /// Work per SPA tuple, in million instructions.
    pub spa_mips_min: f64,
    pub spa_mips_max: f64,
    pub pc_mips_min: f64,
    pub pc_mips_max: f64,
    pub tuple_bytes: u64,
    pub access_latency_min_ms: f64,
    pub access_latency_max_ms: f64,
    /// Links between a sensor and its home fog device (sensor → edge
    /// gateway → fog device).
    pub access_hops: u32,
    pub cloud_mips: f64,
    pub horizon_ms: f64,
    /// Loops started before this time are excluded from delay statistics.
    pub warmup_ms: f64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            sensors: None,
            spa_period_ms: Some(60_000.0),
            pc_period_ms: Some(60_000.0),
            jitter: 0.2,
            spa_mips_min: 1000.0,
            spa_mips_max: 8000.0,
            pc_mips_min: 40_000.0,
            pc_mips_max: 40_000.0,
            tuple_bytes: 100,
            access_latency_min_ms: 1.0,
            access_latency_max_ms: 5.0,
            access_hops: 2,
            cloud_mips: 44_800.0,
            horizon_ms: 300_000.0,
            warmup_ms: 10_000.0,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite and > 0, got {v}")))
    }
}

fn range(field: &str, min: f64, max: f64) -> Result<()> {
    positive(field, min)?;
    positive(field, max)?;
    if min > max {
        return Err(Error::config(field, format!("empty range [{min}, {max}]")));
    }
    Ok(())
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.spa_period_ms {
            positive("spa_period_ms", p)?;
        }
        if let Some(p) = self.pc_period_ms {
            positive("pc_period_ms", p)?;
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::config("jitter", "must lie in [0, 1)"));
        }
        range("spa_mips", self.spa_mips_min, self.spa_mips_max)?;
        range("pc_mips", self.pc_mips_min, self.pc_mips_max)?;
        if self.tuple_bytes == 0 {
            return Err(Error::config("tuple_bytes", "must be >= 1"));
        }
        range("access_latency_ms", self.access_latency_min_ms, self.access_latency_max_ms)?;
        if self.access_hops == 0 {
            return Err(Error::config("access_hops", "must be >= 1"));
        }
        positive("cloud_mips", self.cloud_mips)?;
        positive("horizon_ms", self.horizon_ms)?;
        if !(self.warmup_ms.is_finite() && self.warmup_ms >= 0.0) {
            return Err(Error::config("warmup_ms", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: SensorId,
    /// Fog device the sensor's edge gateway connects to.
    pub home: DeviceId,
    pub access_latency_ms: f64,
}

/// Sensors spread round-robin over the devices in id order.
pub fn generate_sensors(overlay: &FogOverlay, workload: &WorkloadSpec, seed: u64) -> Result<Vec<Sensor>> {
    workload.validate()?;
    let mut rng = rng::stream(seed, rng::STREAM_SENSORS);
    let count = workload.sensors.unwrap_or(overlay.len());
    Ok((0..count)
        .map(|i| Sensor {
            id: SensorId(i as u32),
            home: overlay.id_at(i % overlay.len()),
            access_latency_ms: rng.random_range(workload.access_latency_min_ms..=workload.access_latency_max_ms),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// Device running each sensor's SPA module.
    pub edge_modules: BTreeMap<SensorId, DeviceId>,
    /// Device aggregating each sensor's PC tuples before Cloud forwarding.
    pub pc_modules: BTreeMap<SensorId, DeviceId>,
    /// Forwarding device used by each PC device for Cloud traffic.
    pub cloud_route: BTreeMap<DeviceId, DeviceId>,
}

impl Placement {
    /// Every tuple of every sensor handled by one device, which also
    /// forwards to the Cloud through `forwarder`.
    pub fn uniform(sensors: &[Sensor], device: DeviceId, forwarder: DeviceId) -> Self {
        Placement {
            edge_modules: sensors.iter().map(|s| (s.id, device)).collect(),
            pc_modules: sensors.iter().map(|s| (s.id, device)).collect(),
            cloud_route: BTreeMap::from([(device, forwarder)]),
        }
    }
}

/// What the simulated fog layer knows.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    SmartFog { assignment: &'a GatewayAssignment, areas: &'a [FunctionalArea] },
    Unoptimized,
}

impl Strategy<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            Strategy::SmartFog { .. } => Mode::SmartFog,
            Strategy::Unoptimized => Mode::UnoptimizedFog,
        }
    }
}

/// Best Cloud exit of every device: `(latency, hops)` through the cheapest
/// Cloud-attached device, including the Cloud link itself.
fn cloud_exits(overlay: &FogOverlay, paths: &PathTable) -> Vec<(f64, u32)> {
    let attached: Vec<(usize, f64)> = overlay
        .cloud_attached()
        .map(|(id, w)| (overlay.index_of(id).unwrap(), w))
        .collect();
    (0..overlay.len())
        .map(|d| {
            attached
                .iter()
                .map(|&(e, w)| (paths.latency(d, e) + w, paths.hops(d, e).saturating_add(1)))
                .fold((f64::INFINITY, u32::MAX), |best, cur| {
                    if cur.0 < best.0 || (cur.0 == best.0 && cur.1 < best.1) {
                        cur
                    } else {
                        best
                    }
                })
        })
        .collect()
}

/// Candidate devices of one area type mapped to their owning gateways.
/// Falls back to the members of every area, then to the gateways.
fn area_pool(
    overlay: &FogOverlay,
    assignment: &GatewayAssignment,
    areas: &[FunctionalArea],
    area_type: AreaType,
) -> Result<BTreeMap<DeviceId, Vec<DeviceId>>> {
    let matching: Vec<&FunctionalArea> = areas.iter().filter(|a| a.area_type == area_type).collect();
    let chosen: Vec<&FunctionalArea> =
        if matching.iter().any(|a| !a.members.is_empty()) { matching } else { areas.iter().collect() };
    let mut pool: BTreeMap<DeviceId, Vec<DeviceId>> = BTreeMap::new();
    for area in chosen {
        overlay.index_of(area.owner_gateway)?;
        for &m in &area.members {
            overlay.index_of(m)?;
            pool.entry(m).or_default().push(area.owner_gateway);
        }
    }
    if pool.is_empty() {
        for g in assignment.devices() {
            overlay.index_of(g)?;
            pool.insert(g, vec![g]);
        }
    }
    Ok(pool)
}

/// Lowest-latency pool member from `home` (lower id on ties).
fn nearest<'p>(
    overlay: &FogOverlay,
    paths: &PathTable,
    pool: &'p BTreeMap<DeviceId, Vec<DeviceId>>,
    home: usize,
) -> (DeviceId, &'p [DeviceId]) {
    let latency = |id: DeviceId| paths.latency(home, overlay.index_of(id).unwrap());
    let (&device, owners) = pool
        .iter()
        .min_by(|a, b| latency(*a.0).total_cmp(&latency(*b.0)).then(a.0.cmp(b.0)))
        .expect("pool is never empty");
    (device, owners)
}

/// Edge-ward placement.
///
/// SmartFog attaches each sensor's SPA module to the lowest-latency member
/// of the compute-optimised areas and its PC module to the lowest-latency
/// member of the memory-optimised areas (any area when no area of that type
/// exists, the gateways when all areas are empty). PC devices forward
/// through the owning gateway with the cheapest Cloud route.
/// Unoptimized draws both modules uniformly at random over all devices and
/// forwards through a uniformly random Cloud-attached device.
pub fn place_edge_ward(
    overlay: &FogOverlay,
    sensors: &[Sensor],
    strategy: &Strategy<'_>,
    seed: u64,
) -> Result<Placement> {
    if sensors.is_empty() {
        return Err(Error::contract("placement needs at least one sensor"));
    }
    for s in sensors {
        overlay.index_of(s.home)?;
    }
    let mut edge_modules = BTreeMap::new();
    let mut pc_modules = BTreeMap::new();
    let mut cloud_route = BTreeMap::new();
    match strategy {
        Strategy::SmartFog { assignment, areas } => {
            if assignment.is_empty() {
                return Err(Error::contract("SmartFog placement requires a gateway assignment"));
            }
            let paths = PathTable::new(overlay);
            let exits = cloud_exits(overlay, &paths);
            let compute = area_pool(overlay, assignment, areas, AreaType::ComputeOptimized)?;
            let memory = area_pool(overlay, assignment, areas, AreaType::MemoryOptimized)?;
            for s in sensors {
                let home = overlay.index_of(s.home).unwrap();
                edge_modules.insert(s.id, nearest(overlay, &paths, &compute, home).0);
                let (device, owners) = nearest(overlay, &paths, &memory, home);
                pc_modules.insert(s.id, device);
                let d = overlay.index_of(device).unwrap();
                let cost = |g: DeviceId| {
                    let gi = overlay.index_of(g).unwrap();
                    paths.latency(d, gi) + exits[gi].0
                };
                let owner = owners.iter().copied().min_by(|&a, &b| cost(a).total_cmp(&cost(b))).unwrap();
                cloud_route.entry(device).or_insert(owner);
            }
        }
        Strategy::Unoptimized => {
            let mut rng = rng::stream(seed, rng::STREAM_PLACEMENT);
            let attached: Vec<DeviceId> = overlay.cloud_attached().map(|(id, _)| id).collect();
            for s in sensors {
                edge_modules.insert(s.id, overlay.id_at(rng.random_range(0..overlay.len())));
                let device = overlay.id_at(rng.random_range(0..overlay.len()));
                pc_modules.insert(s.id, device);
                if let Entry::Vacant(slot) = cloud_route.entry(device) {
                    slot.insert(attached[rng.random_range(0..attached.len())]);
                }
            }
        }
    }
    Ok(Placement { edge_modules, pc_modules, cloud_route })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KindCounts {
    pub emitted: u64,
    pub completed: u64,
    pub dropped: u64,
    pub in_flight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: Mode,
    pub n_devices: usize,
    pub seed: u64,
    pub spa_delays_ms: Vec<f64>,
    pub pc_delays_ms: Vec<f64>,
    pub network_load_bytes: u64,
    pub spa: KindCounts,
    pub pc: KindCounts,
    pub workload: WorkloadSpec,
}

/// One CSV row per simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub mode: Mode,
    pub n_devices: usize,
    pub seed: u64,
    pub spa_median_ms: f64,
    pub spa_stddev: f64,
    pub pc_median_ms: f64,
    pub pc_stddev: f64,
    pub network_load_bytes: u64,
    pub completed: u64,
    pub dropped: u64,
}

impl SimulationReport {
    pub fn completed(&self) -> u64 {
        self.spa.completed + self.pc.completed
    }

    pub fn dropped(&self) -> u64 {
        self.spa.dropped + self.pc.dropped
    }

    pub fn row(&self) -> ResultRow {
        ResultRow {
            mode: self.mode,
            n_devices: self.n_devices,
            seed: self.seed,
            spa_median_ms: stats::median(&self.spa_delays_ms),
            spa_stddev: stats::stddev(&self.spa_delays_ms),
            pc_median_ms: stats::median(&self.pc_delays_ms),
            pc_stddev: stats::stddev(&self.pc_delays_ms),
            network_load_bytes: self.network_load_bytes,
            completed: self.completed(),
            dropped: self.dropped(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Route {
    latency_ms: f64,
    hops: u32,
}

/// Sensor to the device hosting one of its modules.
#[derive(Debug, Clone, Copy)]
struct Leg {
    device: usize,
    access: Route,
}

#[derive(Debug, Clone)]
struct SensorRoute {
    spa: Option<Leg>,
    /// PC access leg and the device-to-Cloud route.
    pc: Option<(Leg, Route)>,
}

#[derive(Debug, Clone)]
struct Tuple {
    sensor: usize,
    kind: TupleKind,
    mips_required: f64,
    emit_time: f64,
    loop_start: f64,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Emit { sensor: usize, kind: TupleKind },
    ArriveDevice { tuple: usize },
    DeviceDone { device: usize },
    ArriveCloud { tuple: usize },
    CloudDone,
    Complete { tuple: usize },
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Default)]
struct Server {
    queue: VecDeque<usize>,
    busy: bool,
}

/// Event-driven engine for one run. Emissions are either generated from the
/// workload ([`Simulator::schedule_emissions`]) or injected one by one.
pub struct Simulator {
    mode: Mode,
    seed: u64,
    n_devices: usize,
    workload: WorkloadSpec,
    device_mips: Vec<f64>,
    routes: Vec<SensorRoute>,
    emission_rng: SimRng,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    tuples: Vec<Tuple>,
    devices: Vec<Server>,
    cloud: Server,
    spa_delays: Vec<f64>,
    pc_delays: Vec<f64>,
    load: u64,
    spa: KindCounts,
    pc: KindCounts,
}

impl Simulator {
    pub fn new(
        overlay: &FogOverlay,
        sensors: &[Sensor],
        placement: &Placement,
        workload: &WorkloadSpec,
        mode: Mode,
        seed: u64,
    ) -> Result<Self> {
        workload.validate()?;
        let paths = PathTable::new(overlay);
        let exits = cloud_exits(overlay, &paths);
        let mut routes = Vec::with_capacity(sensors.len());
        for s in sensors {
            let home = overlay.index_of(s.home)?;
            let leg = |modules: &BTreeMap<SensorId, DeviceId>| {
                let device = overlay.index_of(*modules.get(&s.id)?).ok()?;
                let latency = paths.latency(home, device);
                latency.is_finite().then(|| Leg {
                    device,
                    access: Route {
                        latency_ms: s.access_latency_ms + latency,
                        hops: workload.access_hops + paths.hops(home, device),
                    },
                })
            };
            let spa = leg(&placement.edge_modules);
            let pc = leg(&placement.pc_modules).and_then(|leg| {
                let forwarder = placement.cloud_route.get(&overlay.id_at(leg.device))?;
                let f = overlay.index_of(*forwarder).ok()?;
                let (exit_latency, exit_hops) = exits[f];
                let latency_ms = paths.latency(leg.device, f) + exit_latency;
                latency_ms
                    .is_finite()
                    .then(|| (leg, Route { latency_ms, hops: paths.hops(leg.device, f) + exit_hops }))
            });
            routes.push(SensorRoute { spa, pc });
        }
        Ok(Simulator {
            mode,
            seed,
            n_devices: overlay.len(),
            workload: workload.clone(),
            device_mips: overlay.devices().iter().map(|d| d.mips).collect(),
            routes,
            emission_rng: rng::stream(seed, rng::STREAM_EMISSION),
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            tuples: Vec::new(),
            devices: (0..overlay.len()).map(|_| Server::default()).collect(),
            cloud: Server::default(),
            spa_delays: Vec::new(),
            pc_delays: Vec::new(),
            load: 0,
            spa: KindCounts::default(),
            pc: KindCounts::default(),
        })
    }

    fn push(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Scheduled { time, seq: self.seq, event });
    }

    fn counts(&mut self, kind: TupleKind) -> &mut KindCounts {
        match kind {
            TupleKind::Spa => &mut self.spa,
            TupleKind::Pc => &mut self.pc,
        }
    }

    fn period(&self, kind: TupleKind) -> Option<f64> {
        match kind {
            TupleKind::Spa => self.workload.spa_period_ms,
            TupleKind::Pc => self.workload.pc_period_ms,
        }
    }

    fn jittered(&mut self, period: f64) -> f64 {
        let j = self.workload.jitter;
        if j == 0.0 {
            period
        } else {
            period * self.emission_rng.random_range(1.0 - j..=1.0 + j)
        }
    }

    /// Schedules the periodic emissions of every sensor; the first emission
    /// of each stream falls uniformly within its first period.
    pub fn schedule_emissions(&mut self) {
        for sensor in 0..self.routes.len() {
            for kind in [TupleKind::Spa, TupleKind::Pc] {
                if let Some(period) = self.period(kind) {
                    let first = self.emission_rng.random_range(0.0..period);
                    if first < self.workload.horizon_ms {
                        self.push(first, Event::Emit { sensor, kind });
                    }
                }
            }
        }
    }

    /// Injects a single tuple emitted by `sensor` at `time` with the given
    /// work. Does not trigger periodic follow-ups.
    pub fn inject(&mut self, sensor: usize, kind: TupleKind, mips_required: f64, time: f64) -> Result<()> {
        if sensor >= self.routes.len() {
            return Err(Error::contract(format!("no sensor at index {sensor}")));
        }
        positive("mips_required", mips_required)?;
        self.emit(sensor, kind, mips_required, time);
        Ok(())
    }

    fn emit(&mut self, sensor: usize, kind: TupleKind, mips_required: f64, time: f64) {
        self.counts(kind).emitted += 1;
        let route = &self.routes[sensor];
        let access = match kind {
            TupleKind::Spa => route.spa.map(|leg| leg.access),
            TupleKind::Pc => route.pc.map(|(leg, _)| leg.access),
        };
        let Some(access) = access else {
            self.counts(kind).dropped += 1;
            return;
        };
        let tuple = self.tuples.len();
        self.tuples.push(Tuple { sensor, kind, mips_required, emit_time: time, loop_start: f64::NAN });
        self.load += self.workload.tuple_bytes * access.hops as u64;
        self.push(time + access.latency_ms, Event::ArriveDevice { tuple });
    }

    fn draw_mips(&mut self, kind: TupleKind) -> f64 {
        let (lo, hi) = match kind {
            TupleKind::Spa => (self.workload.spa_mips_min, self.workload.spa_mips_max),
            TupleKind::Pc => (self.workload.pc_mips_min, self.workload.pc_mips_max),
        };
        self.emission_rng.random_range(lo..=hi)
    }

    fn start_device(&mut self, device: usize) {
        let server = &mut self.devices[device];
        if server.busy {
            return;
        }
        if let Some(&tuple) = server.queue.front() {
            server.busy = true;
            let service = self.tuples[tuple].mips_required / self.device_mips[device] * 1000.0;
            self.push(self.now + service, Event::DeviceDone { device });
        }
    }

    fn start_cloud(&mut self) {
        if self.cloud.busy {
            return;
        }
        if let Some(&tuple) = self.cloud.queue.front() {
            self.cloud.busy = true;
            let service = self.tuples[tuple].mips_required / self.workload.cloud_mips * 1000.0;
            self.push(self.now + service, Event::CloudDone);
        }
    }

    fn handle(&mut self, event: Event) {
        let bytes = self.workload.tuple_bytes;
        match event {
            Event::Emit { sensor, kind } => {
                let mips = self.draw_mips(kind);
                self.emit(sensor, kind, mips, self.now);
                let period = self.period(kind).expect("emission stream enabled");
                let next = self.now + self.jittered(period);
                if next < self.workload.horizon_ms {
                    self.push(next, Event::Emit { sensor, kind });
                }
            }
            Event::ArriveDevice { tuple } => {
                let t = &mut self.tuples[tuple];
                let route = &self.routes[t.sensor];
                match t.kind {
                    TupleKind::Spa => {
                        let device = route.spa.unwrap().device;
                        self.devices[device].queue.push_back(tuple);
                        self.start_device(device);
                    }
                    TupleKind::Pc => {
                        t.loop_start = self.now;
                        let cloud = route.pc.unwrap().1;
                        self.load += bytes * cloud.hops as u64;
                        self.push(self.now + cloud.latency_ms, Event::ArriveCloud { tuple });
                    }
                }
            }
            Event::DeviceDone { device } => {
                let tuple = self.devices[device].queue.pop_front().unwrap();
                self.devices[device].busy = false;
                let access = self.routes[self.tuples[tuple].sensor].spa.unwrap().access;
                self.load += bytes * access.hops as u64;
                self.push(self.now + access.latency_ms, Event::Complete { tuple });
                self.start_device(device);
            }
            Event::ArriveCloud { tuple } => {
                self.cloud.queue.push_back(tuple);
                self.start_cloud();
            }
            Event::CloudDone => {
                let tuple = self.cloud.queue.pop_front().unwrap();
                self.cloud.busy = false;
                let cloud = self.routes[self.tuples[tuple].sensor].pc.unwrap().1;
                self.load += bytes * cloud.hops as u64;
                self.push(self.now + cloud.latency_ms, Event::Complete { tuple });
                self.start_cloud();
            }
            Event::Complete { tuple } => {
                let t = &self.tuples[tuple];
                let (kind, start) = match t.kind {
                    TupleKind::Spa => (TupleKind::Spa, t.emit_time),
                    TupleKind::Pc => (TupleKind::Pc, t.loop_start),
                };
                let delay = self.now - start;
                if start >= self.workload.warmup_ms {
                    match kind {
                        TupleKind::Spa => self.spa_delays.push(delay),
                        TupleKind::Pc => self.pc_delays.push(delay),
                    }
                }
                self.counts(kind).completed += 1;
            }
        }
    }

    /// Processes every event up to the horizon and reports.
    pub fn run(mut self) -> SimulationReport {
        while let Some(next) = self.heap.peek() {
            if next.time > self.workload.horizon_ms {
                break;
            }
            let Scheduled { time, event, .. } = self.heap.pop().unwrap();
            self.now = time;
            self.handle(event);
        }
        for c in [&mut self.spa, &mut self.pc] {
            c.in_flight = c.emitted - c.completed - c.dropped;
        }
        SimulationReport {
            mode: self.mode,
            n_devices: self.n_devices,
            seed: self.seed,
            spa_delays_ms: self.spa_delays,
            pc_delays_ms: self.pc_delays,
            network_load_bytes: self.load,
            spa: self.spa,
            pc: self.pc,
            workload: self.workload,
        }
    }
}

/// Full run: sensors, edge-ward placement and seeded emissions.
pub fn run(overlay: &FogOverlay, strategy: &Strategy<'_>, workload: &WorkloadSpec, seed: u64) -> Result<SimulationReport> {
    let sensors = generate_sensors(overlay, workload, seed)?;
    let placement = if sensors.is_empty() {
        Placement { edge_modules: BTreeMap::new(), pc_modules: BTreeMap::new(), cloud_route: BTreeMap::new() }
    } else {
        place_edge_ward(overlay, &sensors, strategy, seed)?
    };
    let mut sim = Simulator::new(overlay, &sensors, &placement, workload, strategy.mode(), seed)?;
    sim.schedule_emissions();
    Ok(sim.run())
}
