//! Pareto dominance and fast non-dominated sorting.
//!
//! Objectives carry their own sense, so a vector may mix minimised and
//! maximised criteria. Dominance is purely order based: `a` dominates `b`
//! when it is no worse in every objective and strictly better in one.
//! Identical vectors never dominate each other and share a front.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// `Less` when `a` is better than `b` under this sense.
    fn compare(self, a: f64, b: f64) -> Ordering {
        match self {
            // values are finite, and -0.0 must compare equal to 0.0
            Sense::Minimize => a.partial_cmp(&b).unwrap(),
            Sense::Maximize => b.partial_cmp(&a).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    values: Vec<f64>,
    senses: Vec<Sense>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>, senses: Vec<Sense>) -> Result<Self> {
        if values.len() != senses.len() {
            return Err(Error::contract(format!(
                "{} values but {} senses",
                values.len(),
                senses.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::contract("at least two objectives are required"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::contract(format!("objective value {v} is not finite")));
        }
        Ok(ObjectiveVector { values, senses })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_compatible(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<()> {
    if a.senses != b.senses {
        return Err(Error::contract("objective vectors differ in arity or senses"));
    }
    Ok(())
}

/// Unchecked dominance; callers guarantee matching senses.
fn dominates_unchecked(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let mut strictly_better = false;
    for ((&x, &y), &sense) in a.values.iter().zip(&b.values).zip(&a.senses) {
        match sense.compare(x, y) {
            Ordering::Greater => return false,
            Ordering::Less => strictly_better = true,
            Ordering::Equal => {}
        }
    }
    strictly_better
}

pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    check_compatible(a, b)?;
    Ok(dominates_unchecked(a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoFronts {
    /// Front 0 is the non-dominated set. Indices within a front ascend.
    pub fronts: Vec<Vec<usize>>,
}

impl ParetoFronts {
    /// Front number of every input index.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.fronts.iter().map(Vec::len).sum();
        let mut rank = vec![0; n];
        for (k, front) in self.fronts.iter().enumerate() {
            for &i in front {
                rank[i] = k;
            }
        }
        rank
    }
}

fn check_points(points: &[ObjectiveVector]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::contract("cannot sort an empty set of points"));
    };
    for p in &points[1..] {
        check_compatible(first, p)?;
    }
    Ok(())
}

pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Result<ParetoFronts> {
    non_dominated_sort_with(points, Execution::default())
}

/// Fast non-dominated sorting: domination counts and dominated sets from
/// one all-pairs pass, then fronts are peeled by decrementing counts.
pub fn non_dominated_sort_with(points: &[ObjectiveVector], exec: Execution) -> Result<ParetoFronts> {
    check_points(points)?;
    let n = points.len();
    let indices: Vec<usize> = (0..n).collect();
    // row i: (points dominated by i, number of points dominating i)
    let rows: Vec<(Vec<usize>, usize)> = exec.map(&indices, |&i| {
        let mut dominated = Vec::new();
        let mut count = 0;
        for j in 0..n {
            if i == j {
                continue;
            }
            if dominates_unchecked(&points[i], &points[j]) {
                dominated.push(j);
            } else if dominates_unchecked(&points[j], &points[i]) {
                count += 1;
            }
        }
        (dominated, count)
    });

    let mut counts: Vec<usize> = rows.iter().map(|r| r.1).collect();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    let mut fronts = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &rows[p].0 {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    Ok(ParetoFronts { fronts })
}

/// Non-dominated set built incrementally: an archive starts with the first
/// point; every further point evicts the archive members it dominates and
/// joins the archive unless some member dominates it.
///
/// Returns ascending indices; equal to front 0 of [`non_dominated_sort`].
pub fn pareto_front(points: &[ObjectiveVector]) -> Result<Vec<usize>> {
    check_points(points)?;
    let mut archive: Vec<usize> = vec![0];
    for (f, candidate) in points.iter().enumerate().skip(1) {
        let mut dominated = false;
        archive.retain(|&q| {
            if dominated {
                return true;
            }
            if dominates_unchecked(&points[q], candidate) {
                dominated = true;
                return true;
            }
            !dominates_unchecked(candidate, &points[q])
        });
        if !dominated {
            archive.push(f);
        }
    }
    archive.sort_unstable();
    Ok(archive)
}
