//! Loop erasure and the decomposition of a walk along the time reversal
//! of its loop erasure.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPair, GridDomain};
use crate::error::{Error, Result};
use crate::lattice::{LatticeWalkSpec, Vertex};
use crate::stats::Verdict;
use crate::walk::{IndexedWalker, KilledWalk, WalkPath, EXIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Runs from the walk's start to its exit.
    FromStart,
    /// Runs from the exit back to the walk's start.
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopErasedPath {
    pub orientation: Orientation,
    pub vertices: Vec<Vertex>,
    pub source_walk_length: usize,
}

/// Chronological loop erasure: `b_0 = s_0`, `b_{k+1} = s_{j+1}` where `j`
/// is the last visit to `b_k`.
pub fn loop_erase_seq<T: Copy + Eq + Hash>(seq: &[T]) -> Vec<T> {
    let mut last = HashMap::with_capacity(seq.len());
    for (i, &s) in seq.iter().enumerate() {
        last.insert(s, i);
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        out.push(seq[i]);
        i = last[&seq[i]] + 1;
    }
    out
}

/// Same as [`loop_erase_seq`] for indices below `last.len()`, using a
/// caller-provided scratch table.
pub(crate) fn loop_erase_dense(seq: &[u32], last: &mut [u32], out: &mut Vec<u32>) {
    for (i, &s) in seq.iter().enumerate() {
        last[s as usize] = i as u32;
    }
    out.clear();
    let mut i = 0;
    while i < seq.len() {
        out.push(seq[i]);
        i = last[seq[i] as usize] as usize + 1;
    }
}

pub fn loop_erase(walk: &WalkPath) -> LoopErasedPath {
    LoopErasedPath {
        orientation: Orientation::FromStart,
        vertices: loop_erase_seq(&walk.vertices),
        source_walk_length: walk.vertices.len(),
    }
}

/// A walk `G` from the origin to its exit together with `g`, the loop
/// erasure of its time reversal, and the first hitting times `n_j` of
/// `g_j` by `G`.
///
/// The piece `G[n_j, n_{j-1}]` is the `j`-th loop segment; the segments
/// concatenate back to `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkDecomposition {
    pub walk: WalkPath,
    pub gamma: LoopErasedPath,
    pub hit_times: Vec<usize>,
}

impl WalkDecomposition {
    pub fn from_walk(walk: WalkPath) -> Result<Self> {
        if walk.vertices.is_empty() {
            return Err(Error::InvalidInput("empty walk".into()));
        }
        let rev: Vec<Vertex> = walk.vertices.iter().rev().copied().collect();
        let gamma = loop_erase_seq(&rev);
        let mut first = HashMap::new();
        for (i, &v) in walk.vertices.iter().enumerate() {
            first.entry(v).or_insert(i);
        }
        let hit_times: Vec<usize> = gamma.iter().map(|v| first[v]).collect();
        let n = walk.vertices.len();
        Ok(WalkDecomposition {
            gamma: LoopErasedPath { orientation: Orientation::Reversed, vertices: gamma, source_walk_length: n },
            walk,
            hit_times,
        })
    }

    /// Number of steps of `g`.
    pub fn len(&self) -> usize {
        self.gamma.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `G[n_j, n_{j-1}]` for `1 <= j <= len()`.
    pub fn segment(&self, j: usize) -> &[Vertex] {
        &self.walk.vertices[self.hit_times[j]..=self.hit_times[j - 1]]
    }

    pub fn reassemble(&self) -> Vec<Vertex> {
        let mut out = vec![self.walk.vertices[0]];
        for j in (1..=self.len()).rev() {
            out.extend_from_slice(&self.segment(j)[1..]);
        }
        out
    }
}

/// Samples loop-erased walks in a fixed domain, reusing buffers.
pub struct LerwSampler<'a> {
    walker: IndexedWalker<'a>,
    start: u32,
    path: Vec<u32>,
    last: Vec<u32>,
    erased: Vec<u32>,
}

impl<'a> LerwSampler<'a> {
    pub fn new(domain: &'a GridDomain, spec: &LatticeWalkSpec) -> Result<Self> {
        let start = domain
            .index_of(Vertex::ORIGIN)
            .ok_or_else(|| Error::InvalidInput("domain does not contain the origin".into()))? as u32;
        Ok(LerwSampler {
            walker: IndexedWalker::new(domain, spec)?,
            start,
            path: Vec::new(),
            last: vec![0; domain.len() + 1],
            erased: Vec::new(),
        })
    }

    /// Samples a walk from the origin and returns the loop erasure of its
    /// reversal, from the exit vertex to the origin.
    pub fn sample_reversed<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vertex>> {
        let exit = self.walker.run_recorded(self.start, rng, &mut self.path)?;
        let outside = self.walker.domain().len() as u32;
        self.path.push(outside);
        self.path.reverse();
        loop_erase_dense(&self.path, &mut self.last, &mut self.erased);
        let interior = self.walker.domain().interior();
        Ok(self
            .erased
            .iter()
            .map(|&i| if i == outside { exit.outer } else { interior[i as usize] })
            .collect())
    }

    /// Samples a walk and returns its full decomposition.
    pub fn sample_decomposition<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<WalkDecomposition> {
        let exit = self.walker.run_recorded(self.start, rng, &mut self.path)?;
        let interior = self.walker.domain().interior();
        let mut vertices: Vec<Vertex> = self.path.iter().map(|&i| interior[i as usize]).collect();
        vertices.push(exit.outer);
        WalkDecomposition::from_walk(WalkPath { vertices, exit_pair: Some(exit) })
    }
}

pub fn sample_lerw_reversed<R: Rng + ?Sized>(
    domain: &GridDomain,
    spec: &LatticeWalkSpec,
    rng: &mut R,
) -> Result<WalkDecomposition> {
    LerwSampler::new(domain, spec)?.sample_decomposition(rng)
}

/// Walk from the origin conditioned to leave through a given boundary
/// pair, sampled exactly as the Doob transform by the exit probability.
pub struct ConditionedSampler<'a> {
    domain: &'a GridDomain,
    exit: BoundaryPair,
    offsets: Vec<Vertex>,
    targets: Vec<u32>,
    cumulative: Vec<f64>,
    m: usize,
    pub step_cap: u64,
}

impl<'a> ConditionedSampler<'a> {
    pub fn new(domain: &'a GridDomain, spec: &LatticeWalkSpec, exit: BoundaryPair) -> Result<Self> {
        let kw = KilledWalk::new(domain, spec)?;
        let h = kw.hitting_table(exit)?;
        let origin = domain
            .index_of(Vertex::ORIGIN)
            .ok_or_else(|| Error::InvalidInput("domain does not contain the origin".into()))?;
        if !(h.values[origin] > 0.0) {
            return Err(Error::InvalidInput("exit pair is unreachable from the origin".into()));
        }
        let offsets: Vec<Vertex> = spec.steps().map(|s| s.0).collect();
        let probs: Vec<f64> = spec.steps().map(|s| s.1).collect();
        let m = offsets.len();
        let mut targets = Vec::with_capacity(domain.len() * m);
        let mut cumulative = Vec::with_capacity(domain.len() * m);
        for (i, &v) in domain.interior().iter().enumerate() {
            let mut acc = 0.0;
            let mut row = Vec::with_capacity(m);
            for (k, &o) in offsets.iter().enumerate() {
                let w = v + o;
                let (t, hw) = match domain.index_of(w) {
                    Some(j) => (j as u32, h.values[j]),
                    None if BoundaryPair::new(v, w) == exit => (EXIT, 1.0),
                    None => (EXIT, 0.0),
                };
                acc += probs[k] * hw;
                targets.push(t);
                row.push(acc);
            }
            let total = if h.values[i] > 0.0 { acc } else { 1.0 };
            cumulative.extend(row.iter().map(|c| c / total));
        }
        Ok(ConditionedSampler { domain, exit, offsets, targets, cumulative, m, step_cap: crate::walk::STEP_CAP })
    }

    pub fn sample_walk<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WalkPath> {
        let mut i = self.domain.index_of(Vertex::ORIGIN).unwrap();
        let mut vertices = Vec::new();
        loop {
            vertices.push(self.domain.interior()[i]);
            if vertices.len() as u64 > self.step_cap {
                return Err(Error::StepCapExceeded { cap: self.step_cap });
            }
            let u: f64 = rng.random();
            let row = &self.cumulative[i * self.m..(i + 1) * self.m];
            let k = row.iter().position(|&c| u < c).unwrap_or_else(|| {
                // Guard against rounding in the last cumulative entry.
                row.iter().rposition(|&c| c > 0.0).unwrap_or(self.m - 1)
            });
            let t = self.targets[i * self.m + k];
            if t == EXIT {
                let v = self.domain.interior()[i];
                let w = v + self.offsets[k];
                debug_assert_eq!(BoundaryPair::new(v, w), self.exit);
                vertices.push(w);
                return Ok(WalkPath { vertices, exit_pair: Some(BoundaryPair::new(v, w)) });
            }
            i = t as usize;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WalkDecomposition> {
        WalkDecomposition::from_walk(self.sample_walk(rng)?)
    }
}

pub fn sample_lerw_conditioned<R: Rng + ?Sized>(
    domain: &GridDomain,
    spec: &LatticeWalkSpec,
    exit: BoundaryPair,
    rng: &mut R,
) -> Result<WalkDecomposition> {
    ConditionedSampler::new(domain, spec, exit)?.sample(rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitReport {
    pub exact: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub accepted: u64,
    pub attempts: u64,
    pub verdict: Verdict,
}

/// Compares `E[visits to v by the first loop segment | g_0 = u0, g_1 = u1]`
/// with `G(u1, v) H(v, u1)`, where `H(v, u1) = G(v, u1) / G(u1, u1)` is the
/// probability of reaching `u1` before leaving. The conditioning event is
/// the exit pair `(u1, u0)` and is realised by rejection.
pub fn expected_visits_check<R: Rng + ?Sized>(
    domain: &GridDomain,
    spec: &LatticeWalkSpec,
    u0: Vertex,
    u1: Vertex,
    v: Vertex,
    attempts: u64,
    rng: &mut R,
) -> Result<VisitReport> {
    let exit = BoundaryPair::new(u1, u0);
    if domain.pair_index(exit).is_none() {
        return Err(Error::InvalidInput("(u1, u0) is not a boundary pair".into()));
    }
    let iv = domain.index_of(v).ok_or_else(|| Error::InvalidInput("v is not interior".into()))?;
    let iu = domain.index_of(u1).unwrap();
    let kw = KilledWalk::new(domain, spec)?;
    let g_to_v = kw.green_column(v)?;
    let g_to_u = kw.green_column(u1)?;
    let exact = g_to_v[iu] * g_to_u[iv] / g_to_u[iu];

    let walker = IndexedWalker::new(domain, spec)?;
    let start = domain
        .index_of(Vertex::ORIGIN)
        .ok_or_else(|| Error::InvalidInput("domain does not contain the origin".into()))? as u32;
    let (mut sum, mut sum2, mut accepted) = (0.0, 0.0, 0u64);
    let mut path = Vec::new();
    for _ in 0..attempts {
        let e = walker.run_recorded(start, rng, &mut path)?;
        if e != exit {
            continue;
        }
        accepted += 1;
        let first = path.iter().position(|&i| i as usize == iu).unwrap();
        let visits = path[first..].iter().filter(|&&i| i as usize == iv).count() as f64;
        sum += visits;
        sum2 += visits * visits;
    }
    if accepted < 30 {
        return Ok(VisitReport {
            exact,
            estimate: f64::NAN,
            stderr: f64::NAN,
            accepted,
            attempts,
            verdict: Verdict::Inconclusive,
        });
    }
    let n = accepted as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean) * n / (n - 1.0);
    let stderr = (var / n).sqrt();
    let verdict = if (mean - exact).abs() <= 4.0 * stderr.max(1e-12) { Verdict::Pass } else { Verdict::Fail };
    Ok(VisitReport { exact, estimate: mean, stderr, accepted, attempts, verdict })
}
