//! Mixed Dirichlet-Neumann problems on square-lattice domains, their
//! discrete harmonic conjugates, and the continuum comparison functions.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPair, GridDomain};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Lattice, LatticeWalkSpec, Vertex};
use crate::linalg::{CsrMatrix, LinearSystem};
use crate::walk::KilledWalk;

/// Boundary condition attached to a boundary pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Dirichlet value 0.
    Zero,
    /// Dirichlet value 1.
    One,
    /// Reflecting.
    Neumann,
}

/// `H` with boundary pairs split into `E0` (value 0), `E1` (value 1) and
/// `E2` (reflecting). Pairs in none of the sets are also reflecting.
#[derive(Clone, Debug)]
pub struct MixedBoundaryProblem {
    domain: GridDomain,
    class: Vec<Option<EdgeClass>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedJson {
    pub interior: Vec<[i32; 2]>,
    #[serde(rename = "E0")]
    pub e0: Vec<[i32; 4]>,
    #[serde(rename = "E1")]
    pub e1: Vec<[i32; 4]>,
    #[serde(rename = "E2")]
    pub e2: Vec<[i32; 4]>,
}

impl MixedBoundaryProblem {
    pub fn new(
        vertices: impl IntoIterator<Item = Vertex>,
        e0: &[BoundaryPair],
        e1: &[BoundaryPair],
        e2: &[BoundaryPair],
    ) -> Result<Self> {
        let domain = GridDomain::from_vertices(Lattice::Square, vertices)?;
        let mut class = vec![None; domain.boundary_pairs().len()];
        for (set, c) in [(e0, EdgeClass::Zero), (e1, EdgeClass::One), (e2, EdgeClass::Neumann)] {
            for &bp in set {
                let k = domain
                    .pair_index(bp)
                    .ok_or_else(|| Error::InvalidInput(format!("{} -> {} is not a boundary pair", bp.inner, bp.outer)))?;
                if class[k].replace(c).is_some() {
                    return invalid(format!("pair {} -> {} listed twice", bp.inner, bp.outer));
                }
            }
        }
        if e0.is_empty() && e1.is_empty() {
            return invalid("E0 and E1 are both empty");
        }
        Ok(MixedBoundaryProblem { domain, class })
    }

    /// Classifies every boundary pair of `domain` with `f`.
    pub fn classify(domain: &GridDomain, f: impl Fn(BoundaryPair) -> EdgeClass) -> Result<Self> {
        let mut sets: [Vec<BoundaryPair>; 3] = Default::default();
        for &bp in domain.boundary_pairs() {
            let i = match f(bp) {
                EdgeClass::Zero => 0,
                EdgeClass::One => 1,
                EdgeClass::Neumann => 2,
            };
            sets[i].push(bp);
        }
        Self::new(domain.interior().iter().copied(), &sets[0], &sets[1], &sets[2])
    }

    /// `m x n` block of vertices (`m` columns) with value 0 on the left,
    /// 1 on the right and reflecting top and bottom.
    pub fn rectangle(m: i32, n: i32) -> Result<Self> {
        if m < 1 || n < 1 {
            return invalid("empty rectangle");
        }
        let d = GridDomain::from_vertices(Lattice::Square, (0..n).flat_map(|y| (0..m).map(move |x| Vertex::new(x, y))))?;
        Self::classify(&d, |bp| match bp.outer.x {
            x if x < 0 => EdgeClass::Zero,
            x if x >= m => EdgeClass::One,
            _ => EdgeClass::Neumann,
        })
    }

    /// Disk of radius `r` whose boundary pairs are split by the angle of
    /// the edge midpoint into three arcs: value 0 on `[0, t1)`, value 1 on
    /// `[t1, t2)`, reflecting on `[t2, 2pi)`.
    pub fn three_arc_disk(r: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(0.0 < t1 && t1 < t2 && t2 < 2.0 * PI) {
            return invalid("arc endpoints must satisfy 0 < t1 < t2 < 2pi");
        }
        let d = crate::domain::build_disk_domain(r, Lattice::Square)?;
        Self::classify(&d, |bp| match pair_angle(bp) {
            a if a < t1 => EdgeClass::Zero,
            a if a < t2 => EdgeClass::One,
            _ => EdgeClass::Neumann,
        })
    }

    /// Continuum counterpart of [`Self::three_arc_disk`] at the centre.
    pub fn three_arc_continuum(t1: f64, t2: f64) -> Result<f64> {
        let e = |t: f64| Complex64::from_polar(1.0, t);
        three_arc_value(e(0.0), e(t1), e(t2), Complex64::new(0.0, 0.0))
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn class_of(&self, bp: BoundaryPair) -> Option<EdgeClass> {
        self.domain.pair_index(bp).and_then(|k| self.class[k])
    }

    pub fn to_json(&self) -> MixedJson {
        let mut j = MixedJson {
            interior: self.domain.interior().iter().map(|v| [v.x, v.y]).collect(),
            e0: vec![],
            e1: vec![],
            e2: vec![],
        };
        for (bp, c) in self.domain.boundary_pairs().iter().zip(&self.class) {
            let row = [bp.inner.x, bp.inner.y, bp.outer.x, bp.outer.y];
            match c {
                Some(EdgeClass::Zero) => j.e0.push(row),
                Some(EdgeClass::One) => j.e1.push(row),
                Some(EdgeClass::Neumann) => j.e2.push(row),
                None => {}
            }
        }
        j
    }

    pub fn from_json(j: &MixedJson) -> Result<Self> {
        let pairs = |rows: &[[i32; 4]]| -> Vec<BoundaryPair> {
            rows.iter()
                .map(|r| BoundaryPair::new(Vertex::new(r[0], r[1]), Vertex::new(r[2], r[3])))
                .collect()
        };
        Self::new(
            j.interior.iter().map(|v| Vertex::new(v[0], v[1])),
            &pairs(&j.e0),
            &pairs(&j.e1),
            &pairs(&j.e2),
        )
    }
}

/// Angle in `[0, 2pi)` of the midpoint of a boundary pair.
pub fn pair_angle(bp: BoundaryPair) -> f64 {
    let m = pair_midpoint(bp);
    m.im.atan2(m.re).rem_euclid(2.0 * PI)
}

pub fn pair_midpoint(bp: BoundaryPair) -> Complex64 {
    Complex64::new(bp.inner.x as f64 + bp.outer.x as f64, bp.inner.y as f64 + bp.outer.y as f64) / 2.0
}

/// Solution of a mixed problem: the probability that the walk on
/// `H + E0 + E1` uses an `E1` edge before an `E0` edge.
#[derive(Clone, Debug)]
pub struct MixedSolution {
    pub values: Vec<f64>,
}

impl MixedSolution {
    pub fn at(&self, p: &MixedBoundaryProblem, v: Vertex) -> Option<f64> {
        p.domain.index_of(v).map(|i| self.values[i])
    }
}

pub fn solve_mixed(p: &MixedBoundaryProblem) -> Result<MixedSolution> {
    let d = &p.domain;
    let n = d.len();
    let mut t = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    let mut deg = vec![0.0; n];
    for (i, &v) in d.interior().iter().enumerate() {
        for &o in Lattice::Square.neighbors() {
            if let Some(j) = d.index_of(v + o) {
                deg[i] += 1.0;
                t.push((i, j, -1.0));
            }
        }
    }
    for (bp, c) in d.boundary_pairs().iter().zip(&p.class) {
        let i = d.index_of(bp.inner).unwrap();
        match c {
            Some(EdgeClass::Zero) => deg[i] += 1.0,
            Some(EdgeClass::One) => {
                deg[i] += 1.0;
                rhs[i] += 1.0;
            }
            _ => {}
        }
    }
    t.extend(deg.iter().enumerate().map(|(i, &g)| (i, i, g)));
    // Every component must reach a Dirichlet edge for the system to be
    // nonsingular.
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut grounded = false;
        while let Some(i) = stack.pop() {
            let v = d.interior()[i];
            for &o in Lattice::Square.neighbors() {
                match d.index_of(v + o) {
                    Some(j) if !seen[j] => {
                        seen[j] = true;
                        stack.push(j);
                    }
                    Some(_) => {}
                    None => {
                        let k = d.pair_index(BoundaryPair::new(v, v + o)).unwrap();
                        grounded |= matches!(p.class[k], Some(EdgeClass::Zero | EdgeClass::One));
                    }
                }
            }
        }
        if !grounded {
            return invalid("a component of H has no Dirichlet edge");
        }
    }
    let values = LinearSystem::new(CsrMatrix::from_triplets(n, t))?.solve(&rhs)?;
    Ok(MixedSolution { values })
}

/// A face of the graph `H` with the Dirichlet edges wired to two extra
/// vertices: either a unit square of the lattice (by its lower-left
/// corner) or a sector of the exterior between consecutive Dirichlet edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DualFace {
    Square(Vertex),
    Sector(usize),
}

#[derive(Clone, Debug)]
pub struct ConjugatePair {
    pub h_hat: Vec<f64>,
    pub k_hat: HashMap<DualFace, f64>,
    /// Face across the wired edge on the `E0` side, where `k = 0`.
    pub v0_dual: DualFace,
    pub v1_dual: DualFace,
    /// `k` at `v1_dual`, equal to the total current from `E1` to `E0`.
    pub l: f64,
    /// Largest violation of the Cauchy-Riemann relation over all edges.
    pub residual: f64,
}

pub const CR_TOLERANCE: f64 = 1e-9;

const DIRS: [Vertex; 4] = [Vertex::new(1, 0), Vertex::new(0, 1), Vertex::new(-1, 0), Vertex::new(0, -1)];

/// Lower-left corner of the unit square to the left of `u -> u + DIRS[d]`.
fn left_square(u: Vertex, d: usize) -> Vertex {
    let w = u + DIRS[d];
    let l = DIRS[(d + 1) % 4];
    let (a, b) = (u + l, w + l);
    Vertex::new(u.x.min(w.x).min(a.x).min(b.x), u.y.min(w.y).min(a.y).min(b.y))
}

/// Discrete harmonic conjugate of the solution of `p`. Requires every
/// boundary pair to be classified, `H` simply connected, and `E0`, `E1`
/// each contiguous in the cyclic order of Dirichlet edges.
///
/// The relation enforced on every edge `u -> w`, boundary edges included,
/// is `k(left face) - k(right face) = h(w) - h(u)`.
pub fn harmonic_conjugate(p: &MixedBoundaryProblem, sol: &MixedSolution) -> Result<ConjugatePair> {
    let d = &p.domain;
    if p.class.iter().any(|c| c.is_none()) {
        return invalid("every boundary pair needs a class");
    }
    let inside = |v: Vertex| d.contains(v);
    let h = |v: Vertex| sol.values[d.index_of(v).unwrap()];
    let class = |u: Vertex, dir: usize| p.class[d.pair_index(BoundaryPair::new(u, u + DIRS[dir])).unwrap()].unwrap();
    let is_full = |s: Vertex| {
        [s, s + DIRS[0], s + DIRS[0] + DIRS[1], s + DIRS[1]].iter().all(|&c| inside(c))
    };

    // Outer boundary walk, keeping the exterior on the left: at each vertex
    // leave by the clockwise-next direction after the arrival direction.
    let start = *d.interior().iter().min_by_key(|v| (v.y, v.x)).unwrap();
    let mut sector_of: HashMap<(Vertex, usize), usize> = HashMap::new();
    // (class, sector before, inner vertex) per Dirichlet stub.
    let mut stubs: Vec<(EdgeClass, usize, Vertex)> = Vec::new();
    let (mut u, mut dir) = (start, 3usize);
    let mut sector = 0usize;
    let limit = 8 * d.len() + 8;
    for step in 0.. {
        if step > limit {
            return Err(Error::Solver("outer boundary walk does not close".into()));
        }
        let w = u + DIRS[dir];
        let arrive_from;
        if inside(w) {
            sector_of.insert((u, dir), sector);
            arrive_from = (dir + 2) % 4;
            u = w;
        } else {
            let c = class(u, dir);
            if c != EdgeClass::Neumann {
                stubs.push((c, sector, u));
                sector += 1;
            }
            arrive_from = dir;
        }
        dir = (arrive_from + 3) % 4;
        if u == start && dir == 3 {
            break;
        }
    }
    let m = sector;
    if m < 2 {
        return invalid("need at least one edge in each of E0 and E1");
    }
    let changes: Vec<usize> = (0..m).filter(|&i| stubs[i].0 != stubs[(i + 1) % m].0).collect();
    if changes.len() != 2 {
        return invalid("E0 and E1 must each be contiguous along the boundary");
    }
    // The sector right after the last stub of the E1 block faces v0.
    let (mut v0s, mut v1s) = (0, 0);
    for &i in &changes {
        match stubs[i].0 {
            EdgeClass::One => v0s = (i + 1) % m,
            _ => v1s = (i + 1) % m,
        }
    }

    let face_left = |u: Vertex, dir: usize| -> Result<DualFace> {
        let s = left_square(u, dir);
        if is_full(s) {
            return Ok(DualFace::Square(s));
        }
        sector_of
            .get(&(u, dir))
            .map(|&k| DualFace::Sector(k))
            .ok_or_else(|| Error::Solver(format!("edge {u} dir {dir} has no face; is H simply connected?")))
    };
    let mut constraints: Vec<(DualFace, DualFace, f64)> = Vec::new();
    for &v in d.interior() {
        for dir in [0usize, 1] {
            let w = v + DIRS[dir];
            if inside(w) {
                constraints.push((face_left(v, dir)?, face_left(w, dir + 2)?, h(w) - h(v)));
            }
        }
    }
    for (i, &(c, before, v)) in stubs.iter().enumerate() {
        let target = if c == EdgeClass::One { 1.0 } else { 0.0 };
        constraints.push((DualFace::Sector(before), DualFace::Sector((i + 1) % m), target - h(v)));
        debug_assert_eq!(before, i);
    }

    let mut adj: HashMap<DualFace, Vec<(DualFace, f64)>> = HashMap::new();
    for &(l, r, inc) in &constraints {
        adj.entry(l).or_default().push((r, -inc));
        adj.entry(r).or_default().push((l, inc));
    }
    let v0_dual = DualFace::Sector(v0s);
    let v1_dual = DualFace::Sector(v1s);
    let mut k_hat: HashMap<DualFace, f64> = HashMap::with_capacity(adj.len());
    k_hat.insert(v0_dual, 0.0);
    let mut queue = VecDeque::from([v0_dual]);
    while let Some(f) = queue.pop_front() {
        let kf = k_hat[&f];
        for &(g, inc) in &adj[&f] {
            // Spanning-tree integration; the wired edge between the two
            // special faces is not part of the dual graph.
            k_hat.entry(g).or_insert_with(|| {
                queue.push_back(g);
                kf + inc
            });
        }
    }
    if k_hat.len() != adj.len() {
        return Err(Error::Solver("dual graph is disconnected".into()));
    }
    let residual = constraints
        .iter()
        .map(|&(l, r, inc)| (k_hat[&l] - k_hat[&r] - inc).abs())
        .fold(0.0, f64::max);
    if residual > CR_TOLERANCE {
        return Err(Error::Solver(format!("Cauchy-Riemann residual {residual:e}")));
    }
    let l = k_hat[&v1_dual];
    Ok(ConjugatePair { h_hat: sol.values.clone(), k_hat, v0_dual, v1_dual, l, residual })
}

/// Poisson-kernel ratio `(1 - |w|^2) / |w - u|^2` for `w` in the unit disk
/// and `u` on the unit circle.
pub fn lambda_kernel(psi_w: Complex64, psi_u: Complex64) -> Result<f64> {
    if !(psi_w.norm() < 1.0) {
        return invalid(format!("|psi(w)| = {} is not below 1", psi_w.norm()));
    }
    if (psi_u.norm() - 1.0).abs() > 1e-9 {
        return invalid(format!("|psi(u)| = {} is not on the unit circle", psi_u.norm()));
    }
    Ok((1.0 - psi_w.norm_sqr()) / (psi_w - psi_u).norm_sqr())
}

/// The same kernel in the form `Re((u + w) / (u - w))`.
pub fn lambda_kernel_re(psi_w: Complex64, psi_u: Complex64) -> f64 {
    ((psi_u + psi_w) / (psi_u - psi_w)).re
}

/// Harmonic function on the upper half-plane with boundary values 0 on
/// `(0, 1)`, 1 on `(1, inf)` and zero normal derivative on `(-inf, 0)`.
/// With `z = r e^{i theta}` this is `acot((1 - r) / (2 sqrt(r) sin(theta/2))) / pi`
/// with `acot` valued in `(0, pi)`.
pub fn continuum_mixed(z: Complex64) -> Result<f64> {
    if z.im < 0.0 {
        return invalid("z must lie in the closed upper half-plane");
    }
    if z == Complex64::new(0.0, 0.0) || z == Complex64::new(1.0, 0.0) {
        return invalid("z is a singular boundary point");
    }
    // Principal sqrt; on the negative axis take the upper-half-plane limit.
    let s = if z.im == 0.0 && z.re < 0.0 { Complex64::new(0.0, (-z.re).sqrt()) } else { z.sqrt() };
    Ok((2.0 * s.im).atan2(1.0 - z.norm()) / PI)
}

/// Continuum value at 0 for the unit disk with value 0 on the arc from `z1`
/// counter-clockwise to `z2`, value 1 from `z2` to `z3`, and reflecting
/// from `z3` back to `z1`.
pub fn three_arc_value(z1: Complex64, z2: Complex64, z3: Complex64, w: Complex64) -> Result<f64> {
    let mobius = (w - z1) * (z2 - z3) / ((w - z3) * (z2 - z1));
    continuum_mixed(mobius)
}

/// `|H(w,u)/H(0,u) - lambda(w/R, u_hat)|` for one starting point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaDeviation {
    pub w: Vertex,
    pub pair: BoundaryPair,
    pub ratio: f64,
    pub lambda: f64,
    pub deviation: f64,
}

/// Compares exact hitting ratios on a disk domain of radius `r` with the
/// Poisson-kernel ratio, for every `w` in `points` and the boundary pair
/// `u`. One linear solve serves all points.
pub fn hitting_vs_lambda(
    domain: &GridDomain,
    r: f64,
    spec: &LatticeWalkSpec,
    points: &[Vertex],
    u: BoundaryPair,
) -> Result<Vec<LambdaDeviation>> {
    let kw = KilledWalk::new(domain, spec)?;
    let table = kw.hitting_table(u)?;
    let h0 = table
        .at(domain, Vertex::ORIGIN)
        .ok_or_else(|| Error::InvalidInput("origin is not in the domain".into()))?;
    if h0 <= 0.0 {
        return invalid("H(0, u) = 0");
    }
    let m = pair_midpoint(u);
    let psi_u = m / m.norm();
    points
        .iter()
        .map(|&w| {
            let hw = table.at(domain, w).ok_or_else(|| Error::InvalidInput(format!("{w} is not in the domain")))?;
            let psi_w = domain.lattice().embed(w) / r;
            if psi_w.norm() > 0.5 {
                return invalid(format!("|w| = {} exceeds R/2", psi_w.norm() * r));
            }
            let lambda = lambda_kernel(psi_w, psi_u)?;
            let ratio = hw / h0;
            Ok(LambdaDeviation { w, pair: u, ratio, lambda, deviation: (ratio - lambda).abs() })
        })
        .collect()
}

/// Boundary pair of `domain` whose midpoint angle is closest to `theta`.
pub fn pair_near_angle(domain: &GridDomain, theta: f64) -> BoundaryPair {
    *domain
        .boundary_pairs()
        .iter()
        .min_by(|a, b| {
            let da = (pair_angle(**a) - theta).rem_euclid(2.0 * PI);
            let db = (pair_angle(**b) - theta).rem_euclid(2.0 * PI);
            da.min(2.0 * PI - da).total_cmp(&db.min(2.0 * PI - db))
        })
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub(dir: usize) -> BoundaryPair {
        BoundaryPair::new(Vertex::ORIGIN, DIRS[dir])
    }

    #[test]
    fn single_vertex() {
        let p = MixedBoundaryProblem::new([Vertex::ORIGIN], &[stub(2)], &[stub(0)], &[stub(1), stub(3)]).unwrap();
        let s = solve_mixed(&p).unwrap();
        assert!((s.values[0] - 0.5).abs() < 1e-14);
        let c = harmonic_conjugate(&p, &s).unwrap();
        let mut vals: Vec<f64> = c.k_hat.values().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        assert_eq!(vals.len(), 2);
        assert!((vals[1] - vals[0] - 0.5).abs() < 1e-14);
        assert!((c.l - 0.5).abs() < 1e-14);

        let p = MixedBoundaryProblem::new([Vertex::ORIGIN], &[stub(2)], &[stub(0), stub(1)], &[stub(3)]).unwrap();
        assert!((solve_mixed(&p).unwrap().values[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_no_dirichlet() {
        let e = MixedBoundaryProblem::new([Vertex::ORIGIN], &[], &[], &[stub(0)]);
        assert!(e.is_err());
    }

    #[test]
    fn path_is_linear() {
        let n = 7;
        let p = MixedBoundaryProblem::rectangle(n, 1).unwrap();
        let s = solve_mixed(&p).unwrap();
        for x in 0..n {
            let want = (x + 1) as f64 / (n + 1) as f64;
            assert!((s.at(&p, Vertex::new(x, 0)).unwrap() - want).abs() < 1e-12);
        }
        let c = harmonic_conjugate(&p, &s).unwrap();
        assert!((c.l - 1.0 / (n + 1) as f64).abs() < 1e-12);
    }

    #[test]
    fn rectangle_extremal_length() {
        for (m, n) in [(20, 20), (30, 20), (20, 40)] {
            let p = MixedBoundaryProblem::rectangle(m, n).unwrap();
            let s = solve_mixed(&p).unwrap();
            let c = harmonic_conjugate(&p, &s).unwrap();
            let aspect = n as f64 / m as f64;
            assert!(c.l >= 0.0);
            assert!((c.l / aspect - 1.0).abs() < 0.1, "{m}x{n}: L = {}", c.l);
            assert!(c.residual < CR_TOLERANCE);
        }
    }

    #[test]
    fn lambda_examples() {
        let z = Complex64::new(0.0, 0.0);
        for t in [0.0, 1.0, 2.5] {
            assert_eq!(lambda_kernel(z, Complex64::from_polar(1.0, t)).unwrap(), 1.0);
        }
        let half = Complex64::new(0.5, 0.0);
        assert!((lambda_kernel(half, Complex64::new(1.0, 0.0)).unwrap() - 3.0).abs() < 1e-15);
        assert!((lambda_kernel(half, Complex64::new(-1.0, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(lambda_kernel(half, Complex64::new(1.1, 0.0)).is_err());
        let w = Complex64::new(0.3, -0.4);
        let u = Complex64::from_polar(1.0, 2.0);
        assert!((lambda_kernel(w, u).unwrap() - lambda_kernel_re(w, u)).abs() < 1e-12);
    }

    #[test]
    fn continuum_examples() {
        for t in [0.1, 1.0, 3.0] {
            assert!((continuum_mixed(Complex64::from_polar(1.0, t)).unwrap() - 0.5).abs() < 1e-15);
        }
        assert_eq!(continuum_mixed(Complex64::new(0.3, 0.0)).unwrap(), 0.0);
        assert_eq!(continuum_mixed(Complex64::new(3.0, 0.0)).unwrap(), 1.0);
        assert!(continuum_mixed(Complex64::new(1.0, 0.0)).is_err());
        assert!(continuum_mixed(Complex64::new(0.0, 0.0)).is_err());
        assert!(continuum_mixed(Complex64::new(0.5, -0.1)).is_err());
    }

    #[test]
    fn continuum_is_harmonic_with_neumann_axis() {
        let f = |x: f64, y: f64| continuum_mixed(Complex64::new(x, y)).unwrap();
        let e = 1e-3;
        for (x, y) in [(0.3, 0.7), (-1.0, 0.5), (2.0, 2.0)] {
            let lap = f(x + e, y) + f(x - e, y) + f(x, y + e) + f(x, y - e) - 4.0 * f(x, y);
            assert!(lap.abs() < 1e-7, "{lap}");
        }
        // Normal derivative on the negative axis.
        for x in [-0.5, -2.0] {
            assert!(((f(x, 2e-4) - f(x, 1e-4)) / 1e-4).abs() < 1e-3);
        }
    }

    #[test]
    fn lambda_mean_value() {
        let w = Complex64::new(0.4, 0.3);
        let n = 4096;
        let mean: f64 = (0..n)
            .map(|k| lambda_kernel(w, Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn json_roundtrip() {
        let p = MixedBoundaryProblem::rectangle(3, 2).unwrap();
        let j = serde_json::to_string(&p.to_json()).unwrap();
        let q = MixedBoundaryProblem::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(q.to_json(), p.to_json());
    }
}
