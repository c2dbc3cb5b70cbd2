//! Random walks killed on leaving a grid domain: sampling, exact exit
//! laws and Green's functions, and the potential kernel.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPair, GridDomain};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeWalkSpec, StepSampler, Vertex};
use crate::linalg::{CsrMatrix, LinearSystem};

pub const STEP_CAP: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    /// Visited vertices; the last one is the outer endpoint of `exit_pair`.
    pub vertices: Vec<Vertex>,
    pub exit_pair: Option<BoundaryPair>,
}

/// Walk sampler working on domain indices with a precomputed transition
/// table.
#[derive(Clone, Debug)]
pub struct IndexedWalker<'a> {
    domain: &'a GridDomain,
    sampler: StepSampler,
    next: Vec<u32>,
    m: usize,
    pub step_cap: u64,
}

pub const EXIT: u32 = u32::MAX;

impl<'a> IndexedWalker<'a> {
    pub fn new(domain: &'a GridDomain, spec: &LatticeWalkSpec) -> Result<Self> {
        if domain.lattice() != spec.lattice {
            return Err(Error::InvalidInput("walk spec and domain use different lattices".into()));
        }
        let sampler = spec.sampler();
        let m = sampler.offsets().len();
        let mut next = Vec::with_capacity(domain.len() * m);
        for &v in domain.interior() {
            for &o in sampler.offsets() {
                next.push(domain.index_of(v + o).map_or(EXIT, |i| i as u32));
            }
        }
        Ok(IndexedWalker { domain, sampler, next, m, step_cap: STEP_CAP })
    }

    pub fn domain(&self) -> &'a GridDomain {
        self.domain
    }

    /// Runs the walk from interior index `start`, calling `visit` on every
    /// interior index visited (including the start). Returns the exit pair.
    #[inline]
    pub fn run<R: Rng + ?Sized, F: FnMut(u32)>(&self, start: u32, rng: &mut R, mut visit: F) -> Result<BoundaryPair> {
        let mut i = start;
        let mut steps = 0u64;
        loop {
            visit(i);
            let j = self.sampler.sample_index(rng);
            let t = self.next[i as usize * self.m + j];
            if t == EXIT {
                let v = self.domain.interior()[i as usize];
                return Ok(BoundaryPair::new(v, v + self.sampler.offsets()[j]));
            }
            i = t;
            steps += 1;
            if steps >= self.step_cap {
                return Err(Error::StepCapExceeded { cap: self.step_cap });
            }
        }
    }

    /// Records the interior indices visited into `path`.
    pub fn run_recorded<R: Rng + ?Sized>(&self, start: u32, rng: &mut R, path: &mut Vec<u32>) -> Result<BoundaryPair> {
        path.clear();
        self.run(start, rng, |i| path.push(i))
    }
}

pub fn sample_walk<R: Rng + ?Sized>(
    domain: &GridDomain,
    start: Vertex,
    spec: &LatticeWalkSpec,
    rng: &mut R,
) -> Result<WalkPath> {
    let s = domain
        .index_of(start)
        .ok_or_else(|| Error::InvalidInput(format!("start {start} is not in the domain")))?;
    let walker = IndexedWalker::new(domain, spec)?;
    let mut idx = Vec::new();
    let exit = walker.run_recorded(s as u32, rng, &mut idx)?;
    let mut vertices: Vec<Vertex> = idx.iter().map(|&i| domain.interior()[i as usize]).collect();
    vertices.push(exit.outer);
    Ok(WalkPath { vertices, exit_pair: Some(exit) })
}

/// The operator `I - P` of the killed walk together with the exit weights.
#[derive(Clone, Debug)]
pub struct KilledWalk<'a> {
    domain: &'a GridDomain,
    spec: LatticeWalkSpec,
    system: LinearSystem,
    /// `p(outer - inner)` for every boundary pair.
    exit_weight: Vec<f64>,
}

impl<'a> KilledWalk<'a> {
    pub fn new(domain: &'a GridDomain, spec: &LatticeWalkSpec) -> Result<Self> {
        if domain.lattice() != spec.lattice {
            return Err(Error::InvalidInput("walk spec and domain use different lattices".into()));
        }
        let n = domain.len();
        let mut t = Vec::with_capacity(n * 5);
        for (i, &v) in domain.interior().iter().enumerate() {
            t.push((i, i, 1.0));
            for (o, p) in spec.steps() {
                if let Some(j) = domain.index_of(v + o) {
                    t.push((i, j, -p));
                }
            }
        }
        let system = LinearSystem::new(CsrMatrix::from_triplets(n, t))?;
        let exit_weight = domain.boundary_pairs().iter().map(|bp| spec.prob(bp.outer - bp.inner)).collect();
        Ok(KilledWalk { domain, spec: spec.clone(), system, exit_weight })
    }

    pub fn domain(&self) -> &'a GridDomain {
        self.domain
    }

    pub fn spec(&self) -> &LatticeWalkSpec {
        &self.spec
    }

    fn index(&self, v: Vertex) -> Result<usize> {
        self.domain
            .index_of(v)
            .ok_or_else(|| Error::InvalidInput(format!("{v} is not in the domain")))
    }

    /// `G(s, .)` over the interior.
    pub fn green_row(&mut self, s: Vertex) -> Result<Vec<f64>> {
        let mut b = vec![0.0; self.domain.len()];
        b[self.index(s)?] = 1.0;
        self.system.solve_transpose(&b)
    }

    /// `G(., v)` over the interior.
    pub fn green_column(&self, v: Vertex) -> Result<Vec<f64>> {
        let mut b = vec![0.0; self.domain.len()];
        b[self.index(v)?] = 1.0;
        self.system.solve(&b)
    }

    /// Exit law from `s`, aligned with `domain.boundary_pairs()`.
    pub fn exit_distribution(&mut self, s: Vertex) -> Result<Vec<f64>> {
        let g = self.green_row(s)?;
        Ok(self.exits_from_green_row(&g))
    }

    pub fn exits_from_green_row(&self, g: &[f64]) -> Vec<f64> {
        self.domain
            .boundary_pairs()
            .iter()
            .zip(&self.exit_weight)
            .map(|(bp, &w)| if w > 0.0 { g[self.domain.index_of(bp.inner).unwrap()] * w } else { 0.0 })
            .collect()
    }

    /// `x -> P^x[walk exits through pair]`.
    pub fn hitting_table(&self, pair: BoundaryPair) -> Result<HarmonicTable> {
        let k = self
            .domain
            .pair_index(pair)
            .ok_or_else(|| Error::InvalidInput("not a boundary pair of this domain".into()))?;
        let mut b = vec![0.0; self.domain.len()];
        b[self.index(pair.inner)?] = self.exit_weight[k];
        let values = self.system.solve(&b)?;
        let mut boundary = vec![0.0; self.domain.boundary_pairs().len()];
        boundary[k] = 1.0;
        Ok(HarmonicTable { values, boundary })
    }

    /// Probability of exiting through any pair whose outer endpoint is `u`,
    /// as a function of the starting point.
    pub fn exit_vertex_table(&self, u: Vertex) -> Result<HarmonicTable> {
        let mut b = vec![0.0; self.domain.len()];
        let mut boundary = vec![0.0; self.domain.boundary_pairs().len()];
        for (k, bp) in self.domain.boundary_pairs().iter().enumerate() {
            if bp.outer == u {
                b[self.index(bp.inner)?] += self.exit_weight[k];
                boundary[k] = 1.0;
            }
        }
        let values = self.system.solve(&b)?;
        Ok(HarmonicTable { values, boundary })
    }

    pub fn exit_weight(&self, k: usize) -> f64 {
        self.exit_weight[k]
    }
}

/// Exact exit distribution from `start`, aligned with the domain's
/// boundary pairs.
pub fn exact_hitting(domain: &GridDomain, start: Vertex, spec: &LatticeWalkSpec) -> Result<Vec<f64>> {
    KilledWalk::new(domain, spec)?.exit_distribution(start)
}

/// Expected number of visits to `v` by the walk from `u` before exit.
pub fn exact_green(domain: &GridDomain, u: Vertex, v: Vertex, spec: &LatticeWalkSpec) -> Result<f64> {
    let kw = KilledWalk::new(domain, spec)?;
    let col = kw.green_column(v)?;
    Ok(col[kw.index(u)?])
}

/// A function on the interior of a domain together with values on its
/// boundary pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTable {
    pub values: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl HarmonicTable {
    pub fn at(&self, domain: &GridDomain, v: Vertex) -> Option<f64> {
        domain.index_of(v).map(|i| self.values[i])
    }

    /// Largest `|h(x) - E h(x + X)|` over interior `x`, where the value
    /// across a boundary pair is the pair's boundary value.
    pub fn mean_value_residual(&self, domain: &GridDomain, spec: &LatticeWalkSpec) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &v) in domain.interior().iter().enumerate() {
            let mut mean = 0.0;
            for (o, p) in spec.steps() {
                let w = v + o;
                let val = match domain.index_of(w) {
                    Some(j) => self.values[j],
                    None => self.boundary[domain.pair_index(BoundaryPair::new(v, w)).unwrap()],
                };
                mean += p * val;
            }
            worst = worst.max((self.values[i] - mean).abs());
        }
        worst
    }
}

/// Header written as the first line of every CSV table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvHeader {
    pub seed: Option<u64>,
    pub spec_hash: String,
    pub domain_hash: String,
}

impl CsvHeader {
    pub fn new(seed: Option<u64>, spec: &LatticeWalkSpec, domain: &GridDomain) -> Self {
        CsvHeader { seed, spec_hash: spec.hash_hex(), domain_hash: domain.hash_hex() }
    }

    pub fn line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# seed={seed} spec={} domain={}", self.spec_hash, self.domain_hash)
    }
}

pub fn write_exit_csv<W: Write>(
    mut out: W,
    header: &CsvHeader,
    domain: &GridDomain,
    probs: &[f64],
) -> std::io::Result<()> {
    writeln!(out, "{}", header.line())?;
    writeln!(out, "inner_x,inner_y,outer_x,outer_y,probability")?;
    for (bp, p) in domain.boundary_pairs().iter().zip(probs) {
        writeln!(out, "{},{},{},{},{:e}", bp.inner.x, bp.inner.y, bp.outer.x, bp.outer.y, p)?;
    }
    Ok(())
}

pub fn write_table_csv<W: Write>(
    mut out: W,
    header: &CsvHeader,
    domain: &GridDomain,
    table: &HarmonicTable,
) -> std::io::Result<()> {
    writeln!(out, "{}", header.line())?;
    writeln!(out, "x,y,value")?;
    for (v, h) in domain.interior().iter().zip(&table.values) {
        writeln!(out, "{},{},{:e}", v.x, v.y, h)?;
    }
    Ok(())
}

/// Potential kernel `a` of a walk, tabulated on a box.
///
/// Solves `E a(z + X) - a(z) = delta_0(z)` on the box `max(|x|,|y|) < B`
/// with boundary values `c1 log|z|`, then shifts so that `a(0) = 0`. The
/// coefficient `c1` is fitted from a first solve with zero boundary data.
/// Values are accurate away from the box boundary, with error of order
/// `|z| / B`.
#[derive(Clone, Debug)]
pub struct PotentialKernel {
    lattice: Lattice,
    box_radius: i32,
    values: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
}

impl PotentialKernel {
    pub fn solve(spec: &LatticeWalkSpec, box_radius: i32) -> Result<Self> {
        if box_radius < 8 {
            return Err(Error::DomainTooSmall(format!("box radius {box_radius}")));
        }
        let b = box_radius;
        let lat = spec.lattice;
        let pts: Vec<Vertex> = (-b + 1..b).flat_map(|y| (-b + 1..b).map(move |x| Vertex::new(x, y))).collect();
        let domain = GridDomain::from_vertices(lat, pts)?;
        let n = domain.len();
        let mut t = Vec::with_capacity(n * 5);
        for (i, &v) in domain.interior().iter().enumerate() {
            t.push((i, i, 1.0));
            for (o, p) in spec.steps() {
                if let Some(j) = domain.index_of(v + o) {
                    t.push((i, j, -p));
                }
            }
        }
        let system = LinearSystem::new(CsrMatrix::from_triplets(n, t))?;
        let origin = domain.index_of(Vertex::ORIGIN).unwrap();

        let rhs = |c1: f64| {
            let mut r = vec![0.0; n];
            r[origin] = -1.0;
            for (i, &v) in domain.interior().iter().enumerate() {
                for (o, p) in spec.steps() {
                    let w = v + o;
                    if domain.index_of(w).is_none() {
                        r[i] += p * c1 * lat.embed(w).norm().ln();
                    }
                }
            }
            r
        };
        let mut kernel = PotentialKernel { lattice: lat, box_radius: b, values: Vec::new(), c1: 0.0, c2: 0.0 };
        let mut w = system.solve(&rhs(0.0))?;
        let fit_lo = (b as f64 / 20.0).max(2.0);
        let fit_hi = b as f64 / 5.0;
        for _ in 0..2 {
            let w0 = w[origin];
            kernel.values = w.iter().map(|x| x - w0).collect();
            let (c1, _) = kernel.fit_log(fit_lo, fit_hi);
            w = system.solve_from(&rhs(c1), Some(&w))?;
            kernel.c1 = c1;
        }
        let w0 = w[origin];
        kernel.values = w.iter().map(|x| x - w0).collect();
        let (c1, c2) = kernel.fit_log(fit_lo, fit_hi);
        kernel.c1 = c1;
        kernel.c2 = c2;
        Ok(kernel)
    }

    pub fn box_radius(&self) -> i32 {
        self.box_radius
    }

    /// `a(z)`, if `z` lies strictly inside the box.
    pub fn value(&self, z: Vertex) -> Option<f64> {
        let b = self.box_radius;
        if z.x.abs() >= b || z.y.abs() >= b {
            return None;
        }
        let w = (2 * b - 1) as usize;
        Some(self.values[(z.y + b - 1) as usize * w + (z.x + b - 1) as usize])
    }

    /// Least-squares fit `a(z) ~ c1 log|z| + c2` over `r_lo <= |z| <= r_hi`.
    pub fn fit_log(&self, r_lo: f64, r_hi: f64) -> (f64, f64) {
        let b = self.box_radius;
        let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for y in -b + 1..b {
            for x in -b + 1..b {
                let z = Vertex::new(x, y);
                let r = self.lattice.embed(z).norm();
                if r < r_lo || r > r_hi {
                    continue;
                }
                let l = r.ln();
                let a = self.value(z).unwrap();
                sx += l;
                sy += a;
                sxx += l * l;
                sxy += l * a;
                n += 1.0;
            }
        }
        let c1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        (c1, (sy - c1 * sx) / n)
    }
}

/// `a(z)` for the walk `spec`, computed on a box of the given radius.
pub fn potential_kernel(spec: &LatticeWalkSpec, z: Vertex, box_radius: i32) -> Result<f64> {
    let need = 4.0 * spec.lattice.embed(z).norm() + 16.0;
    if (box_radius as f64) < need {
        return Err(Error::InvalidInput(format!("box radius {box_radius} < 4|z| + 16 = {need}")));
    }
    let k = PotentialKernel::solve(spec, box_radius)?;
    Ok(k.value(z).unwrap())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgIdentity {
    pub potential: f64,
    pub green: f64,
    pub exit_average: f64,
    pub residual: f64,
}

/// Compares `a(z - w) + G_r(z, w)` with `E^z[a(S_tau - w)]` for the walk
/// killed on leaving the disk of radius `r`.
pub fn check_ag_identity(
    spec: &LatticeWalkSpec,
    r: f64,
    z: Vertex,
    w: Vertex,
    kernel: &PotentialKernel,
) -> Result<AgIdentity> {
    let domain = crate::domain::build_disk_domain(r, spec.lattice)?;
    if !domain.contains(z) || !domain.contains(w) {
        return Err(Error::InvalidInput("z and w must lie in the disk".into()));
    }
    let far = domain
        .boundary_pairs()
        .iter()
        .map(|bp| spec.lattice.embed(bp.outer - w).norm())
        .fold(0.0, f64::max);
    if (kernel.box_radius() as f64) < 4.0 * far + 16.0 {
        return Err(Error::InvalidInput("potential kernel box too small for this disk".into()));
    }
    let mut kw = KilledWalk::new(&domain, spec)?;
    let exits = kw.exit_distribution(z)?;
    let green = kw.green_column(w)?[domain.index_of(z).unwrap()];
    let exit_average: f64 = domain
        .boundary_pairs()
        .iter()
        .zip(&exits)
        .map(|(bp, p)| p * kernel.value(bp.outer - w).unwrap())
        .sum();
    let potential = kernel.value(z - w).unwrap();
    Ok(AgIdentity { potential, green, exit_average, residual: (potential + green - exit_average).abs() })
}

/// `max_y max_e r |H(e, y) - H(0, y)| / H(0, y)` over boundary pairs `y`
/// and unit steps `e`, for the disk of radius `r`.
pub fn relative_derivative_at_origin(spec: &LatticeWalkSpec, r: f64) -> Result<f64> {
    let domain = crate::domain::build_disk_domain(r, spec.lattice)?;
    let mut kw = KilledWalk::new(&domain, spec)?;
    let h0 = kw.exit_distribution(Vertex::ORIGIN)?;
    let mut worst: f64 = 0.0;
    for &e in spec.lattice.neighbors() {
        let he = kw.exit_distribution(e)?;
        for (a, b) in h0.iter().zip(&he) {
            if *a > 0.0 {
                worst = worst.max(r * (b - a).abs() / a);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_disk_domain, build_square_domain, domain_from_vertices};
    use crate::rng::RngKey;

    #[test]
    fn walk_ends_on_a_boundary_pair() {
        let d = build_disk_domain(6.0, Lattice::Square).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let mut rng = RngKey::new(1).rng();
        for _ in 0..50 {
            let w = sample_walk(&d, Vertex::ORIGIN, &spec, &mut rng).unwrap();
            let n = w.vertices.len();
            assert!(w.vertices[..n - 1].iter().all(|&v| d.contains(v)));
            assert!(!d.contains(w.vertices[n - 1]));
            let ep = w.exit_pair.unwrap();
            assert_eq!(ep.outer, w.vertices[n - 1]);
            assert_eq!(ep.inner, w.vertices[n - 2]);
            assert!(d.pair_index(ep).is_some());
        }
    }

    #[test]
    fn start_outside_is_rejected() {
        let d = build_disk_domain(3.0, Lattice::Square).unwrap();
        let mut rng = RngKey::new(1).rng();
        assert!(sample_walk(&d, Vertex::new(10, 0), &LatticeWalkSpec::simple_square(), &mut rng).is_err());
    }

    #[test]
    fn single_vertex_exit_and_green() {
        let d = domain_from_vertices(Lattice::Square, [Vertex::ORIGIN]).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let h = exact_hitting(&d, Vertex::ORIGIN, &spec).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!((exact_green(&d, Vertex::ORIGIN, Vertex::ORIGIN, &spec).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_cross_green() {
        // Origin plus its four neighbours: G(0,0) = 1 / (1 - 4 * 1/4 * 1/4).
        let pts = [Vertex::ORIGIN, Vertex::new(1, 0), Vertex::new(-1, 0), Vertex::new(0, 1), Vertex::new(0, -1)];
        let d = domain_from_vertices(Lattice::Square, pts).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let g = exact_green(&d, Vertex::ORIGIN, Vertex::ORIGIN, &spec).unwrap();
        assert!((g - 4.0 / 3.0).abs() < 1e-12);
        let g = exact_green(&d, Vertex::new(1, 0), Vertex::ORIGIN, &spec).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exit_rows_sum_to_one_and_green_is_symmetric() {
        let d = build_disk_domain(12.0, Lattice::Square).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let mut kw = KilledWalk::new(&d, &spec).unwrap();
        for s in [Vertex::ORIGIN, Vertex::new(5, -3), Vertex::new(-11, 0)] {
            let h = kw.exit_distribution(s).unwrap();
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let u = Vertex::new(3, 4);
        let v = Vertex::new(-6, 1);
        let guv = kw.green_column(v).unwrap()[d.index_of(u).unwrap()];
        let gvu = kw.green_column(u).unwrap()[d.index_of(v).unwrap()];
        assert!((guv - gvu).abs() < 1e-9);
    }

    #[test]
    fn triangular_three_step_rows_sum_to_one() {
        let d = build_disk_domain(5.0, Lattice::Triangular).unwrap();
        let spec = LatticeWalkSpec::triangular_three_step();
        let mut kw = KilledWalk::new(&d, &spec).unwrap();
        let h = kw.exit_distribution(Vertex::ORIGIN).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // Only pairs along the three allowed directions can carry mass.
        for (bp, p) in d.boundary_pairs().iter().zip(&h) {
            if spec.prob(bp.outer - bp.inner) == 0.0 {
                assert_eq!(*p, 0.0);
            }
        }
    }

    #[test]
    fn hitting_table_is_harmonic() {
        let d = build_disk_domain(9.0, Lattice::Square).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let kw = KilledWalk::new(&d, &spec).unwrap();
        let pair = d.boundary_pairs()[7];
        let t = kw.hitting_table(pair).unwrap();
        assert!(t.mean_value_residual(&d, &spec) < 1e-10);
        let lazy = LatticeWalkSpec::lazy_square(0.3).unwrap();
        let kw = KilledWalk::new(&d, &lazy).unwrap();
        let t = kw.hitting_table(pair).unwrap();
        assert!(t.mean_value_residual(&d, &lazy) < 1e-10);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let d = build_square_domain(10).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let kw = KilledWalk::new(&d, &spec).unwrap();
        assert!(kw.system.is_direct());
        let it = LinearSystem::iterative(kw.system.matrix().clone());
        let mut b = vec![0.0; d.len()];
        b[17] = 1.0;
        let x = kw.system.solve(&b).unwrap();
        let y = it.solve(&b).unwrap();
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn potential_kernel_near_origin() {
        // a(1, 0) = 1 for the simple walk on Z^2.
        let spec = LatticeWalkSpec::simple_square();
        let k = PotentialKernel::solve(&spec, 80).unwrap();
        assert_eq!(k.value(Vertex::ORIGIN), Some(0.0));
        assert!((k.value(Vertex::new(1, 0)).unwrap() - 1.0).abs() < 0.01);
        assert!((k.value(Vertex::new(0, -1)).unwrap() - 1.0).abs() < 0.01);
        // a(1,1) = 4/pi.
        assert!((k.value(Vertex::new(1, 1)).unwrap() - 4.0 / std::f64::consts::PI).abs() < 0.01);
        assert!(potential_kernel(&spec, Vertex::new(30, 0), 80).is_err());
    }

    #[test]
    fn ag_identity_on_small_disk() {
        let spec = LatticeWalkSpec::simple_square();
        let k = PotentialKernel::solve(&spec, 80).unwrap();
        for (z, w) in [(Vertex::new(2, 1), Vertex::new(-3, 0)), (Vertex::ORIGIN, Vertex::ORIGIN)] {
            let r = check_ag_identity(&spec, 8.0, z, w, &k).unwrap();
            assert!(r.residual < 0.02, "{r:?}");
        }
    }
}
