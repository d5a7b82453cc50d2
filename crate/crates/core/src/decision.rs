//! Communication gateway selection.
//!
//! Every device is scored on three criteria (betweenness centrality and
//! MIPS, both maximised; latency to the Cloud, minimised), the scores are
//! sorted into Pareto fronts, and an a-priori decision step picks one
//! gateway per requested functional area. Each area type ranks the current
//! front by its own priority key; when a front runs out of unclaimed
//! devices the next front is opened.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::centrality::CentralityScores;
use crate::overlay::{DeviceId, FogOverlay};
use crate::pareto::{non_dominated_sort, ObjectiveVector, Sense};
use crate::{Error, Result};

/// Senses of (betweenness, mips, cloud latency).
pub const OBJECTIVE_SENSES: [Sense; 3] = [Sense::Maximize, Sense::Maximize, Sense::Minimize];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaType {
    ComputeOptimized,
    MemoryOptimized,
}

impl std::str::FromStr for AreaType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compute" | "compute_optimized" => Ok(AreaType::ComputeOptimized),
            "memory" | "memory_optimized" => Ok(AreaType::MemoryOptimized),
            other => Err(Error::config("areas", format!("unknown area type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceEvaluation {
    pub device: DeviceId,
    pub objectives: ObjectiveVector,
    /// Carried for the memory-optimised priority; not a sorting objective.
    pub memory_gb: f64,
}

impl DeviceEvaluation {
    pub fn new(device: DeviceId, betweenness: f64, mips: f64, cloud_latency_ms: f64, memory_gb: f64) -> Result<Self> {
        let objectives = ObjectiveVector::new(vec![betweenness, mips, cloud_latency_ms], OBJECTIVE_SENSES.to_vec())?;
        Ok(DeviceEvaluation { device, objectives, memory_gb })
    }

    pub fn betweenness(&self) -> f64 {
        self.objectives.values()[0]
    }

    pub fn mips(&self) -> f64 {
        self.objectives.values()[1]
    }

    pub fn cloud_latency_ms(&self) -> f64 {
        self.objectives.values()[2]
    }

    fn priority_key(&self, priority: AreaType) -> f64 {
        match priority {
            AreaType::ComputeOptimized => self.mips(),
            AreaType::MemoryOptimized => self.memory_gb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gateway {
    pub device: DeviceId,
    pub area_type: AreaType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayAssignment {
    /// One entry per requested area, in request order.
    pub gateways: Vec<Gateway>,
}

impl GatewayAssignment {
    pub fn contains(&self, id: DeviceId) -> bool {
        self.gateways.iter().any(|g| g.device == id)
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.gateways.iter().map(|g| g.device)
    }

    pub fn len(&self) -> usize {
        self.gateways.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gateways.is_empty()
    }
}

/// Evaluates every device of `overlay`, in device order.
pub fn evaluate_devices(overlay: &FogOverlay, centrality: &CentralityScores) -> Result<Vec<DeviceEvaluation>> {
    let latencies = overlay.latencies_to_cloud();
    overlay
        .devices()
        .iter()
        .zip(latencies)
        .map(|(d, latency)| {
            let g = centrality
                .get(d.id)
                .ok_or_else(|| Error::contract(format!("no centrality score for device {}", d.id)))?;
            DeviceEvaluation::new(d.id, g, d.mips, latency, d.memory_gb)
        })
        .collect()
}

/// Total order used inside a front: priority key descending, then lower
/// Cloud latency, then higher betweenness, then lower device id.
pub fn priority_order(a: &DeviceEvaluation, b: &DeviceEvaluation, priority: AreaType) -> Ordering {
    b.priority_key(priority)
        .total_cmp(&a.priority_key(priority))
        .then(a.cloud_latency_ms().total_cmp(&b.cloud_latency_ms()))
        .then(b.betweenness().total_cmp(&a.betweenness()))
        .then(a.device.cmp(&b.device))
}

/// Orders a front for one area type; the first entry is that area's pick.
pub fn partition_front(front: &[DeviceEvaluation], priority: AreaType) -> Result<Vec<DeviceEvaluation>> {
    if front.is_empty() {
        return Err(Error::contract("cannot partition an empty front"));
    }
    let mut ordered = front.to_vec();
    ordered.sort_by(|a, b| priority_order(a, b, priority));
    Ok(ordered)
}

pub fn select_gateways(
    overlay: &FogOverlay,
    areas: &[AreaType],
    centrality: &CentralityScores,
) -> Result<GatewayAssignment> {
    check_request(areas, overlay.len())?;
    let evaluations = evaluate_devices(overlay, centrality)?;
    select_from_evaluations(&evaluations, areas)
}

fn check_request(areas: &[AreaType], available: usize) -> Result<()> {
    if areas.is_empty() {
        return Err(Error::contract("at least one functional area must be requested"));
    }
    if areas.len() > available {
        return Err(Error::Capacity { requested: areas.len(), available });
    }
    Ok(())
}

/// Decision step on precomputed evaluations.
pub fn select_from_evaluations(evaluations: &[DeviceEvaluation], areas: &[AreaType]) -> Result<GatewayAssignment> {
    check_request(areas, evaluations.len())?;
    let objectives: Vec<ObjectiveVector> = evaluations.iter().map(|e| e.objectives.clone()).collect();
    let fronts = non_dominated_sort(&objectives)?.fronts;

    let mut front_iter = fronts.into_iter();
    let mut candidates: Vec<usize> = Vec::new();
    let mut gateways = Vec::with_capacity(areas.len());
    for &area in areas {
        while candidates.is_empty() {
            // check_request guarantees enough devices overall
            candidates = front_iter.next().expect("fronts exhausted");
        }
        let (pos, _) = candidates
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| priority_order(&evaluations[a], &evaluations[b], area))
            .unwrap();
        let chosen = candidates.remove(pos);
        gateways.push(Gateway { device: evaluations[chosen].device, area_type: area });
    }
    Ok(GatewayAssignment { gateways })
}
