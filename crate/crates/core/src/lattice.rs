//! Lattices, lattice points and step distributions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};

/// A lattice point in basis coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vertex {
    type Output = Vertex;
    fn add(self, o: Vertex) -> Vertex {
        Vertex::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vertex {
    type Output = Vertex;
    fn sub(self, o: Vertex) -> Vertex {
        Vertex::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<i32> for Vertex {
    type Output = Vertex;
    fn mul(self, k: i32) -> Vertex {
        Vertex::new(self.x * k, self.y * k)
    }
}

impl Neg for Vertex {
    type Output = Vertex;
    fn neg(self) -> Vertex {
        Vertex::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    Square,
    /// Basis `b1 = 1`, `b2 = e^{i pi/3}`.
    Triangular,
}

const SQUARE_NEIGHBORS: [Vertex; 4] =
    [Vertex::new(1, 0), Vertex::new(0, 1), Vertex::new(-1, 0), Vertex::new(0, -1)];

// Counter-clockwise around the origin.
const TRIANGULAR_NEIGHBORS: [Vertex; 6] = [
    Vertex::new(1, 0),
    Vertex::new(0, 1),
    Vertex::new(-1, 1),
    Vertex::new(-1, 0),
    Vertex::new(0, -1),
    Vertex::new(1, -1),
];

impl Lattice {
    pub fn embed(self, v: Vertex) -> Complex64 {
        match self {
            Lattice::Square => Complex64::new(v.x as f64, v.y as f64),
            Lattice::Triangular => {
                Complex64::new(v.x as f64 + 0.5 * v.y as f64, 0.75f64.sqrt() * v.y as f64)
            }
        }
    }

    /// Graph neighbours of the origin in counter-clockwise order.
    pub fn neighbors(self) -> &'static [Vertex] {
        match self {
            Lattice::Square => &SQUARE_NEIGHBORS,
            Lattice::Triangular => &TRIANGULAR_NEIGHBORS,
        }
    }

    pub fn is_neighbor_offset(self, o: Vertex) -> bool {
        self.neighbors().contains(&o)
    }

    /// Vertex sets of the faces with a corner at `v`. Each face of the
    /// lattice is listed by exactly one corner.
    pub fn faces_at(self, v: Vertex) -> Vec<Vec<Vertex>> {
        match self {
            Lattice::Square => vec![vec![
                v,
                v + Vertex::new(1, 0),
                v + Vertex::new(1, 1),
                v + Vertex::new(0, 1),
            ]],
            Lattice::Triangular => vec![
                vec![v, v + Vertex::new(1, 0), v + Vertex::new(0, 1)],
                vec![v + Vertex::new(1, 0), v + Vertex::new(1, 1), v + Vertex::new(0, 1)],
            ],
        }
    }
}

/// Step distribution of a random walk on a lattice.
///
/// `covariance_is_identity` records whether the step covariance equals the
/// identity matrix. The simple walks on the square and triangular lattices
/// have covariance `I/2`, so the flag is false for them; [`isotropic`]
/// reports the weaker property that the covariance is a multiple of `I`.
///
/// [`isotropic`]: LatticeWalkSpec::isotropic
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeWalkSpec {
    pub lattice: Lattice,
    pub neighbor_offsets: Vec<Vertex>,
    pub step_probs: Vec<f64>,
    pub covariance_is_identity: bool,
}

impl LatticeWalkSpec {
    pub fn new(lattice: Lattice, neighbor_offsets: Vec<Vertex>, step_probs: Vec<f64>) -> Result<Self> {
        let mut spec = LatticeWalkSpec { lattice, neighbor_offsets, step_probs, covariance_is_identity: false };
        spec.validate()?;
        let c = spec.covariance();
        spec.covariance_is_identity =
            (c[0][0] - 1.0).abs() < 1e-9 && (c[1][1] - 1.0).abs() < 1e-9 && c[0][1].abs() < 1e-9;
        Ok(spec)
    }

    pub fn simple_square() -> Self {
        Self::new(Lattice::Square, SQUARE_NEIGHBORS.to_vec(), vec![0.25; 4]).unwrap()
    }

    pub fn simple_triangular() -> Self {
        Self::new(Lattice::Triangular, TRIANGULAR_NEIGHBORS.to_vec(), vec![1.0 / 6.0; 6]).unwrap()
    }

    /// Three steps `exp(2 pi i j / 3)`, `j = 0, 1, 2`, each with probability
    /// 1/3. Drift free but not reversible.
    pub fn triangular_three_step() -> Self {
        Self::new(
            Lattice::Triangular,
            vec![Vertex::new(1, 0), Vertex::new(-1, 1), Vertex::new(0, -1)],
            vec![1.0 / 3.0; 3],
        )
        .unwrap()
    }

    /// Simple square walk that stays put with probability `hold`.
    pub fn lazy_square(hold: f64) -> Result<Self> {
        let q = (1.0 - hold) / 4.0;
        let mut offs = vec![Vertex::ORIGIN];
        offs.extend_from_slice(&SQUARE_NEIGHBORS);
        Self::new(Lattice::Square, offs, vec![hold, q, q, q, q])
    }

    fn validate(&self) -> Result<()> {
        if self.neighbor_offsets.len() != self.step_probs.len() || self.step_probs.is_empty() {
            return invalid("offsets and probabilities must have equal, nonzero length");
        }
        let mut seen = std::collections::HashSet::new();
        for &o in &self.neighbor_offsets {
            if o != Vertex::ORIGIN && !self.lattice.is_neighbor_offset(o) {
                return invalid(format!("offset {o} is not a lattice neighbour"));
            }
            if !seen.insert(o) {
                return invalid(format!("offset {o} repeated"));
            }
        }
        if self.step_probs.iter().any(|&p| !(p >= 0.0)) {
            return invalid("step probabilities must be nonnegative");
        }
        let total: f64 = self.step_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("step probabilities sum to {total}"));
        }
        let m = self.mean();
        if m.norm() > 1e-12 {
            return invalid(format!("step distribution has drift {m}"));
        }
        Ok(())
    }

    pub fn mean(&self) -> Complex64 {
        self.steps().map(|(o, p)| self.lattice.embed(o) * p).sum()
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let mut c = [[0.0; 2]; 2];
        for (o, p) in self.steps() {
            let z = self.lattice.embed(o);
            c[0][0] += p * z.re * z.re;
            c[0][1] += p * z.re * z.im;
            c[1][1] += p * z.im * z.im;
        }
        c[1][0] = c[0][1];
        c
    }

    /// Covariance is `s I` for some `s > 0`.
    pub fn isotropic(&self) -> bool {
        let c = self.covariance();
        (c[0][0] - c[1][1]).abs() < 1e-9 && c[0][1].abs() < 1e-9 && c[0][0] > 0.0
    }

    /// `X` and `-X` have the same law.
    pub fn is_symmetric(&self) -> bool {
        self.steps().all(|(o, p)| (self.prob(-o) - p).abs() < 1e-15)
    }

    pub fn prob(&self, o: Vertex) -> f64 {
        self.neighbor_offsets
            .iter()
            .position(|&x| x == o)
            .map_or(0.0, |i| self.step_probs[i])
    }

    /// Offsets with positive probability, including the zero offset if lazy.
    pub fn steps(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.neighbor_offsets
            .iter()
            .zip(&self.step_probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&o, &p)| (o, p))
    }

    /// Nonzero offsets with positive probability.
    pub fn moves(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.steps().filter(|(o, _)| *o != Vertex::ORIGIN)
    }

    pub fn hold_prob(&self) -> f64 {
        self.prob(Vertex::ORIGIN)
    }

    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        short_hash(&json)
    }

    pub fn sampler(&self) -> StepSampler {
        StepSampler::new(self)
    }
}

pub(crate) fn short_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Draws steps from a [`LatticeWalkSpec`].
#[derive(Clone, Debug)]
pub struct StepSampler {
    offsets: Vec<Vertex>,
    cumulative: Vec<f64>,
    uniform: bool,
}

impl StepSampler {
    pub fn new(spec: &LatticeWalkSpec) -> Self {
        let steps: Vec<(Vertex, f64)> = spec.steps().collect();
        let uniform = steps.iter().all(|&(_, p)| p == steps[0].1);
        let mut acc = 0.0;
        let cumulative = steps
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        StepSampler { offsets: steps.iter().map(|s| s.0).collect(), cumulative, uniform }
    }

    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.uniform {
            rng.random_range(0..self.offsets.len())
        } else {
            let u: f64 = rng.random();
            self.cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.offsets.len() - 1)
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vertex {
        self.offsets[self.sample_index(rng)]
    }

    pub fn offsets(&self) -> &[Vertex] {
        &self.offsets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs_are_valid() {
        for s in [
            LatticeWalkSpec::simple_square(),
            LatticeWalkSpec::simple_triangular(),
            LatticeWalkSpec::triangular_three_step(),
        ] {
            assert!(s.mean().norm() < 1e-12);
            assert!(s.isotropic());
            assert!(!s.covariance_is_identity);
        }
        let c = LatticeWalkSpec::simple_square().covariance();
        assert!((c[0][0] - 0.5).abs() < 1e-15);
        let c = LatticeWalkSpec::triangular_three_step().covariance();
        assert!((c[0][0] - 0.5).abs() < 1e-12 && (c[1][1] - 0.5).abs() < 1e-12);
        assert!(!LatticeWalkSpec::triangular_three_step().is_symmetric());
        assert!(LatticeWalkSpec::simple_triangular().is_symmetric());
    }

    #[test]
    fn rejects_bad_specs() {
        let sq = Lattice::Square;
        assert!(LatticeWalkSpec::new(sq, vec![Vertex::new(1, 0), Vertex::new(-1, 0)], vec![0.5, 0.4]).is_err());
        assert!(LatticeWalkSpec::new(sq, vec![Vertex::new(1, 0), Vertex::new(0, 1)], vec![0.5, 0.5]).is_err());
        assert!(LatticeWalkSpec::new(sq, vec![Vertex::new(2, 0), Vertex::new(-2, 0)], vec![0.5, 0.5]).is_err());
        assert!(LatticeWalkSpec::new(sq, vec![Vertex::new(1, 0), Vertex::new(-1, 0)], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn unit_covariance_flag() {
        // Covariance of the lazy walk is (1 - h) I / 2.
        let s = LatticeWalkSpec::lazy_square(0.5).unwrap();
        assert!(!s.covariance_is_identity);
        assert!((s.covariance()[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sampler_frequencies() {
        use crate::rng::RngKey;
        let spec = LatticeWalkSpec::lazy_square(0.2).unwrap();
        let s = spec.sampler();
        let mut rng = RngKey::new(3).rng();
        let mut counts = [0u32; 5];
        let n = 200_000;
        for _ in 0..n {
            counts[s.sample_index(&mut rng)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = spec.step_probs[i];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 5.0 * se);
        }
    }
}
