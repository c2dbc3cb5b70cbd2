//! Spanning-tree / Peano-curve configurations on the square lattice.
//!
//! Points are stored in coordinates scaled by 4: primal vertices have both
//! coordinates `= 0 mod 4`, dual vertices `= 2 mod 4`, and the vertices of
//! the Peano (medial) grid are the points with both coordinates odd. The
//! midpoint of a primal edge coincides with the midpoint of the dual edge
//! crossing it, so edge sets are stored as masks over midpoints.
//!
//! Peano edges follow a Manhattan orientation: a horizontal edge at height
//! `y` runs towards `+x` if `y = 1 mod 4` and towards `-x` otherwise; a
//! vertical edge at abscissa `x` runs towards `-y` if `x = 1 mod 4` and
//! towards `+y` otherwise.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Vertex;
use crate::ust::{wilson_ust, WeightedGraph};

const INSIDE: u8 = 1;
const ALPHA_V: u8 = 2;
const ALPHA_E: u8 = 4;
const BETA_V: u8 = 8;
const BETA_E: u8 = 16;
const ENDPOINT: u8 = 32;

pub const SCALE: i32 = 4;

fn v(x: i32, y: i32) -> Vertex {
    Vertex::new(x, y)
}

fn is_primal(p: Vertex) -> bool {
    p.x.rem_euclid(4) == 0 && p.y.rem_euclid(4) == 0
}

fn is_dual(p: Vertex) -> bool {
    p.x.rem_euclid(4) == 2 && p.y.rem_euclid(4) == 2
}

fn is_peano(p: Vertex) -> bool {
    p.x.rem_euclid(2) == 1 && p.y.rem_euclid(2) == 1
}

fn mid(p: Vertex, q: Vertex) -> Vertex {
    v((p.x + q.x) / 2, (p.y + q.y) / 2)
}

/// Flags over the bounding box of a configuration.
#[derive(Clone, Debug)]
struct ScaledGrid {
    min_x: i32,
    min_y: i32,
    w: usize,
    h: usize,
    flags: Vec<u8>,
}

impl ScaledGrid {
    #[inline]
    fn slot(&self, p: Vertex) -> Option<usize> {
        let dx = p.x.wrapping_sub(self.min_x) as u32 as usize;
        let dy = p.y.wrapping_sub(self.min_y) as u32 as usize;
        (dx < self.w && dy < self.h).then(|| dy * self.w + dx)
    }

    #[inline]
    fn get(&self, p: Vertex) -> u8 {
        self.slot(p).map_or(0, |i| self.flags[i])
    }

    fn set(&mut self, p: Vertex, f: u8) {
        let i = self.slot(p).expect("point inside grid");
        self.flags[i] |= f;
    }
}

/// Which lattice a tree or path lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Primal,
    Dual,
}

/// A set of lattice edges in scaled coordinates, each stored with its
/// endpoints in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridTree {
    pub kind: GridKind,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl GridTree {
    fn from_midpoints(kind: GridKind, mids: impl IntoIterator<Item = Vertex>) -> Self {
        let mut edges: Vec<(Vertex, Vertex)> = mids
            .into_iter()
            .map(|m| {
                let horizontal = match kind {
                    GridKind::Primal => m.y.rem_euclid(4) == 0,
                    GridKind::Dual => m.y.rem_euclid(4) == 2,
                };
                if horizontal {
                    (v(m.x - 2, m.y), v(m.x + 2, m.y))
                } else {
                    (v(m.x, m.y - 2), v(m.x, m.y + 2))
                }
            })
            .collect();
        edges.sort();
        GridTree { kind, edges }
    }

    pub fn midpoints(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.edges.iter().map(|&(p, q)| mid(p, q))
    }

    pub fn vertex_set(&self) -> HashSet<Vertex> {
        self.edges.iter().flat_map(|&(p, q)| [p, q]).collect()
    }

    /// True if the edges form a tree spanning exactly `vertices`.
    pub fn spans(&self, vertices: &HashSet<Vertex>) -> bool {
        if self.edges.len() + 1 != vertices.len() {
            return false;
        }
        let idx: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut uf = crate::ust::UnionFind::new(vertices.len());
        self.edges.iter().all(|(p, q)| match (idx.get(p), idx.get(q)) {
            (Some(&i), Some(&j)) => uf.union(i, j),
            _ => false,
        })
    }
}

/// Sequence of Peano vertices in scaled coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeanoPath {
    pub vertices: Vec<Vertex>,
}

impl PeanoPath {
    /// Points in lattice units.
    pub fn points(&self) -> Vec<Complex64> {
        self.vertices.iter().map(|p| to_plane(*p)).collect()
    }
}

pub fn to_plane(p: Vertex) -> Complex64 {
    Complex64::new(p.x as f64 / SCALE as f64, p.y as f64 / SCALE as f64)
}

/// Serialized form of a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub scale: i32,
    pub alpha: Vec<[i32; 2]>,
    pub beta: Vec<[i32; 2]>,
    pub a: [i32; 2],
    pub b: [i32; 2],
    pub reflect_about_end: bool,
}

/// A domain `D` bounded by a primal path `alpha`, a dual path `beta` and
/// the two half-diagonals joining their ends through the Peano vertices
/// `a` and `b`. `alpha` runs from the end next to `a` to the end next to
/// `b`; `beta` likewise. `D` lies to the left of the boundary traversed as
/// `alpha`, then `beta` backwards.
#[derive(Clone, Debug)]
pub struct PeanoConfig {
    alpha: Vec<Vertex>,
    beta: Vec<Vertex>,
    a: Vertex,
    b: Vertex,
    /// Which marked point [`reverse_peano`] reflects through.
    reflect_about_end: bool,
    grid: ScaledGrid,
    peano_count: usize,
    interior_primal: Vec<Vertex>,
    interior_dual: Vec<Vertex>,
    inside_edges: Vec<Vertex>,
}

fn check_path(path: &[Vertex], pred: fn(Vertex) -> bool, name: &str) -> Result<()> {
    if path.is_empty() {
        return Err(Error::InvalidInput(format!("{name} is empty")));
    }
    if let Some(p) = path.iter().find(|&&p| !pred(p)) {
        return Err(Error::InvalidInput(format!("{name} vertex {p} has the wrong parity")));
    }
    for w in path.windows(2) {
        let d = w[1] - w[0];
        if d.x.abs() + d.y.abs() != 4 || (d.x != 0 && d.y != 0) {
            return Err(Error::InvalidInput(format!("{name} is not a lattice path at {}", w[0])));
        }
    }
    let set: HashSet<Vertex> = path.iter().copied().collect();
    if set.len() != path.len() {
        return Err(Error::InvalidInput(format!("{name} is not simple")));
    }
    Ok(())
}

impl PeanoConfig {
    /// Validates and builds a configuration from scaled coordinates.
    pub fn new(alpha: Vec<Vertex>, beta: Vec<Vertex>, a: Vertex, b: Vertex) -> Result<Self> {
        Self::build(alpha, beta, a, b, false)
    }

    fn build(alpha: Vec<Vertex>, beta: Vec<Vertex>, a: Vertex, b: Vertex, reflect_about_end: bool) -> Result<Self> {
        check_path(&alpha, is_primal, "alpha")?;
        check_path(&beta, is_dual, "beta")?;
        let (aa, ab) = (alpha[0], *alpha.last().unwrap());
        let (ba, bb) = (beta[0], *beta.last().unwrap());
        let diag = |p: Vertex, q: Vertex| {
            let d = q - p;
            d.x.abs() == 2 && d.y.abs() == 2
        };
        if !diag(aa, ba) || mid(aa, ba) != a {
            return Err(Error::InvalidInput("a must be the midpoint of the alpha and beta ends".into()));
        }
        if !diag(ab, bb) || mid(ab, bb) != b {
            return Err(Error::InvalidInput("b must be the midpoint of the alpha and beta ends".into()));
        }
        if a == b {
            return Err(Error::InvalidInput("a and b coincide".into()));
        }
        let alpha_mids: HashSet<Vertex> = alpha.windows(2).map(|w| mid(w[0], w[1])).collect();
        if beta.windows(2).any(|w| alpha_mids.contains(&mid(w[0], w[1]))) {
            return Err(Error::InvalidInput("alpha and beta cross".into()));
        }

        // Closed boundary polygon.
        let mut poly: Vec<Vertex> = alpha.clone();
        poly.extend(beta.iter().rev());
        let area2: i64 = (0..poly.len())
            .map(|i| {
                let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                p.x as i64 * q.y as i64 - q.x as i64 * p.y as i64
            })
            .sum();
        if area2 <= 0 {
            return Err(Error::InvalidInput("domain must lie to the right of [alpha_a, beta_a]".into()));
        }

        let min_x = poly.iter().map(|p| p.x).min().unwrap() - 4;
        let max_x = poly.iter().map(|p| p.x).max().unwrap() + 4;
        let min_y = poly.iter().map(|p| p.y).min().unwrap() - 4;
        let max_y = poly.iter().map(|p| p.y).max().unwrap() + 4;
        let (w, h) = ((max_x - min_x + 1) as usize, (max_y - min_y + 1) as usize);
        let mut grid = ScaledGrid { min_x, min_y, w, h, flags: vec![0; w * h] };

        let mut xs = Vec::new();
        for y in min_y..=max_y {
            xs.clear();
            for i in 0..poly.len() {
                let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                if (p.y > y) != (q.y > y) {
                    xs.push(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
                }
            }
            xs.sort_unstable();
            for pair in xs.chunks(2) {
                for x in pair[0] + 1..pair[1] {
                    grid.set(v(x, y), INSIDE);
                }
            }
        }
        for &p in &alpha {
            grid.set(p, ALPHA_V);
        }
        for &m in &alpha_mids {
            grid.set(m, ALPHA_E);
        }
        for &p in &beta {
            grid.set(p, BETA_V);
        }
        for w in beta.windows(2) {
            grid.set(mid(w[0], w[1]), BETA_E);
        }
        grid.set(a, ENDPOINT);
        grid.set(b, ENDPOINT);
        // Clear interior marks on boundary points.
        for i in 0..grid.flags.len() {
            if grid.flags[i] & (ALPHA_V | ALPHA_E | BETA_V | BETA_E | ENDPOINT) != 0 {
                grid.flags[i] &= !INSIDE;
            }
        }

        let mut peano_count = 2;
        let mut interior_primal = Vec::new();
        let mut interior_dual = Vec::new();
        let mut inside_edges = Vec::new();
        for y in min_y..=max_y {
            for x in min_x..=max_x {
                let p = v(x, y);
                if grid.get(p) & INSIDE == 0 {
                    continue;
                }
                match (x.rem_euclid(4), y.rem_euclid(4)) {
                    (0, 0) => interior_primal.push(p),
                    (2, 2) => interior_dual.push(p),
                    (2, 0) | (0, 2) => inside_edges.push(p),
                    (xr, yr) if xr % 2 == 1 && yr % 2 == 1 => peano_count += 1,
                    _ => {}
                }
            }
        }
        Ok(PeanoConfig {
            alpha,
            beta,
            a,
            b,
            reflect_about_end,
            grid,
            peano_count,
            interior_primal,
            interior_dual,
            inside_edges,
        })
    }

    /// Smallest configuration: `alpha` a single edge, `beta` a single dual
    /// vertex, and no Peano vertices besides `a` and `b`.
    pub fn minimal() -> Self {
        Self::new(vec![v(0, 0), v(4, 0)], vec![v(2, 2)], v(1, 1), v(3, 1)).unwrap()
    }

    /// Configuration built from a union of unit squares (given by their
    /// lower-left corners, in lattice units). `alpha` is the boundary arc
    /// from `a_end` counter-clockwise to `b_end`; `beta` runs through the
    /// squares just outside the complementary arc.
    pub fn from_squares(squares: &HashSet<Vertex>, a_end: Vertex, b_end: Vertex) -> Result<Self> {
        let cycle = boundary_cycle(squares)?;
        let pos = |p: Vertex| cycle.iter().position(|&q| q == p);
        let ia = pos(a_end).ok_or_else(|| Error::InvalidInput(format!("{a_end} is not on the boundary")))?;
        let ib = pos(b_end).ok_or_else(|| Error::InvalidInput(format!("{b_end} is not on the boundary")))?;
        if ia == ib {
            return Err(Error::InvalidInput("split points coincide".into()));
        }
        let n = cycle.len();
        let alpha: Vec<Vertex> = (0..=(ib + n - ia) % n).map(|k| cycle[(ia + k) % n]).collect();
        let free: Vec<Vertex> = (0..=(ia + n - ib) % n).map(|k| cycle[(ib + k) % n]).collect();
        if alpha.len() < 2 || free.len() < 3 {
            return Err(Error::InvalidInput("boundary arcs are too short".into()));
        }
        // Outside squares along the free arc, from the b end to the a end.
        let rot_right = |d: Vertex| v(d.y, -d.x);
        let mut beta: Vec<Vertex> = Vec::new();
        let push = |c: Vertex, beta: &mut Vec<Vertex>| {
            if beta.last() != Some(&c) {
                beta.push(c);
            }
        };
        for k in 0..free.len() - 1 {
            let (p, q) = (free[k] * SCALE, free[k + 1] * SCALE);
            let d = v((q.x - p.x) / 4, (q.y - p.y) / 4);
            let nrm = rot_right(d);
            push(mid(p, q) + nrm * 2, &mut beta);
            if k + 2 < free.len() {
                let r = free[k + 2] * SCALE;
                let d2 = v((r.x - q.x) / 4, (r.y - q.y) / 4);
                // Left turn: go round the convex corner.
                if d2 == v(-d.y, d.x) {
                    push(q + d * 2 + nrm * 2, &mut beta);
                }
            }
        }
        beta.reverse();
        let alpha: Vec<Vertex> = alpha.iter().map(|&p| p * SCALE).collect();
        let a = mid(alpha[0], beta[0]);
        let b = mid(*alpha.last().unwrap(), *beta.last().unwrap());
        Self::new(alpha, beta, a, b)
    }

    /// `width x height` rectangle with the marked points at the midpoints
    /// of the left and right sides.
    pub fn rectangle(width: i32, height: i32) -> Result<Self> {
        if width < 1 || height < 2 {
            return Err(Error::InvalidInput("rectangle is too small".into()));
        }
        let squares = (0..height).flat_map(|y| (0..width).map(move |x| v(x, y))).collect();
        Self::from_squares(&squares, v(0, height / 2), v(width, height / 2))
    }

    /// Digitised disk of the given radius centred at the origin, with marked
    /// points nearest to `radius * e^{i theta_a}` and `radius * e^{i theta_b}`.
    /// Every point of the closed domain lies strictly inside the disk.
    pub fn disk(radius: f64, theta_a: f64, theta_b: f64) -> Result<Self> {
        if !(radius >= 8.0) {
            return Err(Error::DomainTooSmall(format!("radius {radius} < 8")));
        }
        let r = radius - 2.0;
        let k = radius.ceil() as i32;
        let squares: HashSet<Vertex> = (-k..k)
            .flat_map(|y| (-k..k).map(move |x| v(x, y)))
            .filter(|c| (c.x as f64 + 0.5).hypot(c.y as f64 + 0.5) < r)
            .collect();
        let cycle = boundary_cycle(&squares)?;
        let nearest = |t: f64| {
            let target = Complex64::from_polar(radius, t);
            *cycle
                .iter()
                .min_by(|p, q| {
                    let dp = (Complex64::new(p.x as f64, p.y as f64) - target).norm();
                    let dq = (Complex64::new(q.x as f64, q.y as f64) - target).norm();
                    dp.total_cmp(&dq)
                })
                .unwrap()
        };
        Self::from_squares(&squares, nearest(theta_a), nearest(theta_b))
    }

    pub fn alpha(&self) -> &[Vertex] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Vertex] {
        &self.beta
    }

    pub fn a(&self) -> Vertex {
        self.a
    }

    pub fn b(&self) -> Vertex {
        self.b
    }

    /// Number of Peano vertices strictly inside `D`, i.e. excluding `a`, `b`.
    pub fn peano_len(&self) -> usize {
        self.peano_count - 2
    }

    pub fn interior_primal(&self) -> &[Vertex] {
        &self.interior_primal
    }

    pub fn interior_dual(&self) -> &[Vertex] {
        &self.interior_dual
    }

    pub fn is_peano_vertex(&self, p: Vertex) -> bool {
        p == self.a || p == self.b || (is_peano(p) && self.grid.get(p) & INSIDE != 0)
    }

    /// Primal vertices of the graph `H`: `alpha` followed by the interior.
    pub fn primal_vertices(&self) -> Vec<Vertex> {
        self.alpha.iter().chain(&self.interior_primal).copied().collect()
    }

    /// Vertices a dual spanning tree must cover: `beta` and the interior
    /// dual vertices.
    pub fn dual_vertices(&self) -> Vec<Vertex> {
        self.beta.iter().chain(&self.interior_dual).copied().collect()
    }

    pub fn alpha_tree(&self) -> GridTree {
        GridTree::from_midpoints(GridKind::Primal, self.alpha.windows(2).map(|w| mid(w[0], w[1])))
    }

    /// `H` with `alpha` contracted to vertex 0. Edge `k` corresponds to the
    /// primal edge with midpoint `mids[k]`.
    pub fn wired_graph(&self) -> (WeightedGraph, Vec<Vertex>) {
        let mut index: HashMap<Vertex, usize> = self.alpha.iter().map(|&p| (p, 0)).collect();
        for (i, &p) in self.interior_primal.iter().enumerate() {
            index.insert(p, i + 1);
        }
        let mut edges = Vec::new();
        let mut mids = Vec::new();
        for &m in &self.inside_edges {
            let (p, q) = if m.y.rem_euclid(4) == 0 {
                (v(m.x - 2, m.y), v(m.x + 2, m.y))
            } else {
                (v(m.x, m.y - 2), v(m.x, m.y + 2))
            };
            let (i, j) = (index[&p], index[&q]);
            if i != j {
                edges.push((i, j, 1.0));
                mids.push(m);
            }
        }
        let g = WeightedGraph::new(self.interior_primal.len() + 1, edges).expect("wired graph is well formed");
        (g, mids)
    }

    /// Uniform spanning tree of `H` containing `alpha`.
    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GridTree> {
        let (g, mids) = self.wired_graph();
        let t = wilson_ust(&g, 0, None, rng)?;
        let alpha_mids = self.alpha.windows(2).map(|w| mid(w[0], w[1]));
        Ok(GridTree::from_midpoints(GridKind::Primal, alpha_mids.chain(t.edges.iter().map(|&k| mids[k]))))
    }

    /// All spanning trees of `H` containing `alpha`, if there are at most
    /// `limit`.
    pub fn enumerate_trees(&self, limit: u64) -> Result<Vec<GridTree>> {
        let (g, mids) = self.wired_graph();
        let trees = crate::ust::enumerate_spanning_trees(&g, limit)?;
        let alpha_mids: Vec<Vertex> = self.alpha.windows(2).map(|w| mid(w[0], w[1])).collect();
        Ok(trees
            .into_iter()
            .map(|t| {
                GridTree::from_midpoints(
                    GridKind::Primal,
                    alpha_mids.iter().copied().chain(t.edges.iter().map(|&k| mids[k])),
                )
            })
            .collect())
    }

    fn mask(&self, tree: &GridTree) -> Result<Vec<bool>> {
        if tree.kind != GridKind::Primal {
            return Err(Error::InvalidTree("expected a primal tree".into()));
        }
        let mut m = vec![false; self.grid.flags.len()];
        for p in tree.midpoints() {
            let f = self.grid.get(p);
            if f & (INSIDE | ALPHA_E) == 0 {
                return Err(Error::InvalidTree(format!("edge at {p} is not an edge of H")));
            }
            m[self.grid.slot(p).unwrap()] = true;
        }
        for w in self.alpha.windows(2) {
            if !m[self.grid.slot(mid(w[0], w[1])).unwrap()] {
                return Err(Error::InvalidTree("tree does not contain alpha".into()));
            }
        }
        Ok(m)
    }

    #[inline]
    fn dual_blocked(&self, m: Vertex, mask: &[bool]) -> bool {
        match self.grid.slot(m) {
            None => false,
            Some(i) => {
                let f = self.grid.flags[i];
                f & BETA_E != 0 || (f & INSIDE != 0 && !mask[i])
            }
        }
    }

    /// `beta` together with every dual edge inside `D` whose primal
    /// partner is not in `tree`.
    pub fn dual_tree(&self, tree: &GridTree) -> Result<GridTree> {
        let mask = self.mask(tree)?;
        let beta_mids = self.beta.windows(2).map(|w| mid(w[0], w[1]));
        let inside = self.inside_edges.iter().copied().filter(|&m| !mask[self.grid.slot(m).unwrap()]);
        Ok(GridTree::from_midpoints(GridKind::Dual, beta_mids.chain(inside)))
    }

    /// Iterates over the Peano path of `tree` from `a` to `b`.
    pub fn walker<'a>(&'a self, tree: &GridTree) -> Result<PeanoWalker<'a>> {
        Ok(PeanoWalker { cfg: self, mask: self.mask(tree)?, cur: None, done: false, count: 0 })
    }

    pub fn peano_curve(&self, tree: &GridTree) -> Result<PeanoPath> {
        let vertices = self.walker(tree)?.collect::<Result<Vec<_>>>()?;
        Ok(PeanoPath { vertices })
    }

    /// The two outgoing Peano edges at `p`: target, crossed midpoint, and
    /// whether the crossed edge is dual.
    fn out_edges(p: Vertex) -> [(Vertex, Vertex, bool); 2] {
        let dx = if p.y.rem_euclid(4) == 1 { 2 } else { -2 };
        let cx = p.x + dx / 2;
        let my = if (p.y - 1 - cx - 2).rem_euclid(4) == 0 { p.y - 1 } else { p.y + 1 };
        let dy = if p.x.rem_euclid(4) == 1 { -2 } else { 2 };
        let cy = p.y + dy / 2;
        let mx = if (p.x - 1 - cy - 2).rem_euclid(4) == 0 { p.x - 1 } else { p.x + 1 };
        [
            (v(p.x + dx, p.y), v(cx, my), cx.rem_euclid(4) == 2),
            (v(p.x, p.y + dy), v(mx, cy), cy.rem_euclid(4) == 2),
        ]
    }

    /// Primal vertex adjacent to a Peano vertex.
    pub fn primal_neighbor(p: Vertex) -> Vertex {
        let f = |c: i32| if c.rem_euclid(4) == 1 { c - 1 } else { c + 1 };
        v(f(p.x), f(p.y))
    }

    /// Recovers the tree `alpha + {[v_k, v_{k+1}]}` from a Peano path, where
    /// `v_k` is the primal vertex next to the `k`-th path vertex.
    pub fn tree_from_peano(&self, path: &PeanoPath) -> Result<GridTree> {
        let p = &path.vertices;
        if p.first() != Some(&self.a) || p.last() != Some(&self.b) {
            return Err(Error::InvalidPath("path must run from a to b".into()));
        }
        if p.len() != self.peano_count {
            return Err(Error::InvalidPath(format!("path has {} vertices, expected {}", p.len(), self.peano_count)));
        }
        let mut seen = HashSet::with_capacity(p.len());
        for (k, &q) in p.iter().enumerate() {
            if !self.is_peano_vertex(q) || !seen.insert(q) {
                return Err(Error::InvalidPath(format!("bad vertex {q} at position {k}")));
            }
            if k + 1 < p.len() && !Self::out_edges(q).iter().any(|e| e.0 == p[k + 1]) {
                return Err(Error::InvalidPath(format!("step {k} does not follow the orientation")));
            }
        }
        let mut mids: Vec<Vertex> = self.alpha.windows(2).map(|w| mid(w[0], w[1])).collect();
        for w in p.windows(2) {
            let (u, x) = (Self::primal_neighbor(w[0]), Self::primal_neighbor(w[1]));
            if u != x {
                mids.push(mid(u, x));
            }
        }
        mids.sort();
        mids.dedup();
        let t = GridTree::from_midpoints(GridKind::Primal, mids);
        self.mask(&t).map_err(|e| Error::InvalidPath(e.to_string()))?;
        Ok(t)
    }

    pub fn to_json(&self) -> ConfigJson {
        let c = |p: &Vertex| [p.x, p.y];
        ConfigJson {
            scale: SCALE,
            alpha: self.alpha.iter().map(c).collect(),
            beta: self.beta.iter().map(c).collect(),
            a: c(&self.a),
            b: c(&self.b),
            reflect_about_end: self.reflect_about_end,
        }
    }

    pub fn from_json(j: &ConfigJson) -> Result<Self> {
        if j.scale != SCALE {
            return Err(Error::InvalidInput(format!("unsupported scale {}", j.scale)));
        }
        let c = |a: &[i32; 2]| v(a[0], a[1]);
        Self::build(
            j.alpha.iter().map(c).collect(),
            j.beta.iter().map(c).collect(),
            c(&j.a),
            c(&j.b),
            j.reflect_about_end,
        )
    }

    /// Discrete Frechet distances (lattice units) between `alpha`, `beta`
    /// and the counter-clockwise circle arcs they approximate.
    pub fn arc_distances(&self, radius: f64, theta_a: f64, theta_b: f64) -> (f64, f64) {
        let arc = |t0: f64, t1: f64| {
            let span = (t1 - t0).rem_euclid(std::f64::consts::TAU);
            let n = (radius * span).ceil().max(8.0) as usize * 4;
            (0..=n)
                .map(|k| Complex64::from_polar(radius, t0 + span * k as f64 / n as f64))
                .collect::<Vec<_>>()
        };
        let pts = |p: &[Vertex]| p.iter().map(|&q| to_plane(q)).collect::<Vec<_>>();
        let mut beta_rev = pts(&self.beta);
        beta_rev.reverse();
        (
            discrete_frechet(&pts(&self.alpha), &arc(theta_a, theta_b)),
            discrete_frechet(&beta_rev, &arc(theta_b, theta_a)),
        )
    }
}

/// Discrete Frechet distance between two polylines.
pub fn discrete_frechet(p: &[Complex64], q: &[Complex64]) -> f64 {
    let (n, m) = (p.len(), q.len());
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for i in 0..n {
        for j in 0..m {
            let d = (p[i] - q[j]).norm();
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Counter-clockwise boundary cycle of a union of unit squares, with the
/// squares on the left. Fails unless the union is a closed topological disk.
fn boundary_cycle(squares: &HashSet<Vertex>) -> Result<Vec<Vertex>> {
    if squares.is_empty() {
        return Err(Error::InvalidInput("no squares".into()));
    }
    let mut next: HashMap<Vertex, Vertex> = HashMap::new();
    let mut add = |p: Vertex, q: Vertex| -> Result<()> {
        if next.insert(p, q).is_some() {
            return Err(Error::InvalidInput(format!("boundary pinches at {p}")));
        }
        Ok(())
    };
    let mut sorted: Vec<&Vertex> = squares.iter().collect();
    sorted.sort();
    for &&c in &sorted {
        if !squares.contains(&v(c.x, c.y - 1)) {
            add(c, v(c.x + 1, c.y))?;
        }
        if !squares.contains(&v(c.x + 1, c.y)) {
            add(v(c.x + 1, c.y), v(c.x + 1, c.y + 1))?;
        }
        if !squares.contains(&v(c.x, c.y + 1)) {
            add(v(c.x + 1, c.y + 1), v(c.x, c.y + 1))?;
        }
        if !squares.contains(&v(c.x - 1, c.y)) {
            add(v(c.x, c.y + 1), c)?;
        }
    }
    let start = *next.keys().min().unwrap();
    let mut cycle = vec![start];
    let mut p = next[&start];
    while p != start {
        cycle.push(p);
        p = next[&p];
        if cycle.len() > next.len() {
            return Err(Error::InvalidInput("boundary is not a single cycle".into()));
        }
    }
    if cycle.len() != next.len() {
        return Err(Error::InvalidInput("squares do not form a simply connected region".into()));
    }
    Ok(cycle)
}

/// Peano path of a tree, produced one vertex at a time.
pub struct PeanoWalker<'a> {
    cfg: &'a PeanoConfig,
    mask: Vec<bool>,
    cur: Option<Vertex>,
    done: bool,
    count: usize,
}

impl Iterator for PeanoWalker<'_> {
    type Item = Result<Vertex>;

    fn next(&mut self) -> Option<Result<Vertex>> {
        if self.done {
            return None;
        }
        let cfg = self.cfg;
        let p = match self.cur {
            None => cfg.a,
            Some(p) if p == cfg.b => {
                self.done = true;
                if self.count != cfg.peano_count {
                    return Some(Err(Error::InvalidTree(format!(
                        "path visits {} of {} Peano vertices",
                        self.count, cfg.peano_count
                    ))));
                }
                return None;
            }
            Some(p) => {
                let mut step = None;
                for (t, m, dual) in PeanoConfig::out_edges(p) {
                    if !cfg.is_peano_vertex(t) {
                        continue;
                    }
                    let blocked = if dual {
                        cfg.dual_blocked(m, &self.mask)
                    } else {
                        cfg.grid.slot(m).is_some_and(|i| self.mask[i])
                    };
                    if !blocked {
                        if step.is_some() {
                            self.done = true;
                            return Some(Err(Error::InvalidTree(format!("two free exits at {p}"))));
                        }
                        step = Some(t);
                    }
                }
                match step {
                    Some(t) => t,
                    None => {
                        self.done = true;
                        return Some(Err(Error::InvalidTree(format!("no free exit at {p}"))));
                    }
                }
            }
        };
        self.count += 1;
        if self.count > cfg.peano_count {
            self.done = true;
            return Some(Err(Error::InvalidTree("path does not terminate".into())));
        }
        self.cur = Some(p);
        Some(Ok(p))
    }
}

/// Time reversal of a Peano path. The configuration is mirrored by the
/// point reflection through `a` (through `b` for a configuration that is
/// itself the result of a reversal), which exchanges the primal and dual
/// lattices; `alpha` and `beta` trade roles. Applying this twice returns
/// the original path and configuration.
pub fn reverse_peano(cfg: &PeanoConfig, path: &PeanoPath) -> Result<(PeanoPath, PeanoConfig)> {
    let c = if cfg.reflect_about_end { cfg.b } else { cfg.a };
    let r = |p: Vertex| v(2 * c.x - p.x, 2 * c.y - p.y);
    let alpha: Vec<Vertex> = cfg.beta.iter().rev().map(|&p| r(p)).collect();
    let beta: Vec<Vertex> = cfg.alpha.iter().rev().map(|&p| r(p)).collect();
    let new = PeanoConfig::build(alpha, beta, r(cfg.b), r(cfg.a), !cfg.reflect_about_end)?;
    let vertices = path.vertices.iter().rev().map(|&p| r(p)).collect();
    Ok((PeanoPath { vertices }, new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;

    #[test]
    fn minimal_config() {
        let c = PeanoConfig::minimal();
        assert_eq!(c.peano_len(), 0);
        let t = c.alpha_tree();
        let path = c.peano_curve(&t).unwrap();
        assert_eq!(path.vertices, vec![v(1, 1), v(3, 1)]);
        let d = c.dual_tree(&t).unwrap();
        assert!(d.edges.is_empty());
        assert_eq!(c.tree_from_peano(&path).unwrap(), t);
    }

    #[test]
    fn out_edges_cross_one_primal_and_one_dual_edge() {
        for x in (-7..8).step_by(2) {
            for y in (-7..8).step_by(2) {
                let e = PeanoConfig::out_edges(v(x, y));
                assert_ne!(e[0].2, e[1].2, "at ({x},{y})");
                for (t, m, _) in e {
                    assert_eq!((t - v(x, y)).x.abs() + (t - v(x, y)).y.abs(), 2);
                    assert_eq!(m.x.rem_euclid(2), 0);
                    assert_eq!(m.y.rem_euclid(2), 0);
                    // The crossed midpoint is at distance 1 from both ends.
                    let mm = mid(v(x, y), t);
                    assert_eq!((m - mm).x.abs() + (m - mm).y.abs(), 1);
                }
            }
        }
    }

    #[test]
    fn rectangle_layout() {
        let c = PeanoConfig::rectangle(20, 10).unwrap();
        assert_eq!(c.alpha()[0], v(0, 20));
        assert_eq!(*c.alpha().last().unwrap(), v(80, 20));
        // alpha: 5 down, 20 across, 5 up.
        assert_eq!(c.alpha().len(), 31);
        assert_eq!(c.a(), v(-1, 21));
        assert_eq!(c.b(), v(81, 21));
        assert!(c.beta().iter().all(|p| p.y >= 22));
        let mut rng = RngKey::new(1).rng();
        let t = c.sample_tree(&mut rng).unwrap();
        let prim: HashSet<Vertex> = c.primal_vertices().into_iter().collect();
        assert!(t.spans(&prim));
        let d = c.dual_tree(&t).unwrap();
        let dual: HashSet<Vertex> = c.dual_vertices().into_iter().collect();
        assert!(d.spans(&dual));
        let path = c.peano_curve(&t).unwrap();
        assert_eq!(path.vertices.len(), c.peano_len() + 2);
        assert_eq!(c.tree_from_peano(&path).unwrap(), t);
    }

    #[test]
    fn disk_arcs_are_close() {
        let c = PeanoConfig::disk(30.0, std::f64::consts::PI, 0.0).unwrap();
        let (da, db) = c.arc_distances(30.0, std::f64::consts::PI, 0.0);
        assert!(da <= 10.0 && db <= 10.0, "{da} {db}");
        let max = c.primal_vertices().iter().chain(c.beta()).map(|&p| to_plane(p).norm()).fold(0.0, f64::max);
        assert!(max < 30.0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PeanoConfig::new(vec![v(0, 0), v(4, 0)], vec![v(2, 2)], v(1, 1), v(1, 1)).is_err());
        assert!(PeanoConfig::new(vec![v(0, 0), v(4, 4)], vec![v(2, 2)], v(1, 1), v(3, 1)).is_err());
        // Reversed orientation puts the domain on the wrong side.
        assert!(PeanoConfig::new(vec![v(4, 0), v(0, 0)], vec![v(2, 2)], v(3, 1), v(1, 1)).is_err());
        assert!(PeanoConfig::disk(5.0, 0.0, 1.0).is_err());
        assert!(PeanoConfig::disk(20.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn reversal_is_an_involution() {
        let c = PeanoConfig::rectangle(6, 4).unwrap();
        let mut rng = RngKey::new(3).rng();
        let t = c.sample_tree(&mut rng).unwrap();
        let path = c.peano_curve(&t).unwrap();
        let (rp, rc) = reverse_peano(&c, &path).unwrap();
        assert_eq!(rc.peano_len(), c.peano_len());
        let rt = rc.tree_from_peano(&rp).unwrap();
        assert_eq!(rc.peano_curve(&rt).unwrap(), rp);
        let (pp, cc) = reverse_peano(&rc, &rp).unwrap();
        assert_eq!(pp, path);
        assert_eq!(cc.to_json(), c.to_json());
    }

    #[test]
    fn json_roundtrip() {
        let c = PeanoConfig::rectangle(5, 3).unwrap();
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back = PeanoConfig::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back.to_json(), c.to_json());
        assert_eq!(back.peano_len(), c.peano_len());
    }
}
