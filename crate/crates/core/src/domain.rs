//! Grid domains stored by vertices: an interior vertex set and the edges
//! that leave it.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{short_hash, Lattice, Vertex};

/// A vertex inside the domain together with the edge through which a walk
/// leaves it. The edge is identified by its outer endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub inner: Vertex,
    pub outer: Vertex,
}

impl BoundaryPair {
    pub fn new(inner: Vertex, outer: Vertex) -> Self {
        BoundaryPair { inner, outer }
    }
}

/// Dense lookup from lattice points to indices over a bounding box.
#[derive(Clone, Debug)]
pub(crate) struct DenseIndex {
    min_x: i32,
    min_y: i32,
    width: usize,
    height: usize,
    slots: Vec<u32>,
}

impl DenseIndex {
    const EMPTY: u32 = u32::MAX;

    pub(crate) fn new(points: &[Vertex]) -> Self {
        let min_x = points.iter().map(|v| v.x).min().unwrap_or(0);
        let max_x = points.iter().map(|v| v.x).max().unwrap_or(0);
        let min_y = points.iter().map(|v| v.y).min().unwrap_or(0);
        let max_y = points.iter().map(|v| v.y).max().unwrap_or(0);
        let width = (max_x - min_x + 1) as usize;
        let height = (max_y - min_y + 1) as usize;
        let mut slots = vec![Self::EMPTY; width * height];
        for (i, v) in points.iter().enumerate() {
            slots[(v.y - min_y) as usize * width + (v.x - min_x) as usize] = i as u32;
        }
        DenseIndex { min_x, min_y, width, height, slots }
    }

    #[inline]
    pub(crate) fn get(&self, v: Vertex) -> Option<usize> {
        let dx = v.x.wrapping_sub(self.min_x) as u32 as usize;
        let dy = v.y.wrapping_sub(self.min_y) as u32 as usize;
        if dx >= self.width || dy >= self.height {
            return None;
        }
        match self.slots[dy * self.width + dx] {
            Self::EMPTY => None,
            i => Some(i as usize),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridDomain {
    lattice: Lattice,
    interior: Vec<Vertex>,
    boundary_pairs: Vec<BoundaryPair>,
    inradius_origin: f64,
    index: DenseIndex,
}

impl GridDomain {
    /// Builds a domain from an arbitrary vertex set. No validity checks are
    /// made beyond nonemptiness; see [`validate_domain`].
    pub fn from_vertices(lattice: Lattice, vertices: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut interior: Vec<Vertex> = vertices.into_iter().collect::<HashSet<_>>().into_iter().collect();
        if interior.is_empty() {
            return Err(Error::DomainTooSmall("empty vertex set".into()));
        }
        interior.sort_by_key(|v| (v.y, v.x));
        let index = DenseIndex::new(&interior);
        let mut boundary_pairs = Vec::new();
        for &v in &interior {
            for &o in lattice.neighbors() {
                if index.get(v + o).is_none() {
                    boundary_pairs.push(BoundaryPair::new(v, v + o));
                }
            }
        }
        boundary_pairs.sort();
        let inradius_origin = if index.get(Vertex::ORIGIN).is_some() {
            boundary_pairs
                .iter()
                .map(|p| lattice.embed(p.outer).norm())
                .fold(f64::INFINITY, f64::min)
        } else {
            0.0
        };
        Ok(GridDomain { lattice, interior, boundary_pairs, inradius_origin, index })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Interior vertices sorted by `(y, x)`.
    pub fn interior(&self) -> &[Vertex] {
        &self.interior
    }

    /// Boundary pairs in sorted order.
    pub fn boundary_pairs(&self) -> &[BoundaryPair] {
        &self.boundary_pairs
    }

    pub fn inradius_origin(&self) -> f64 {
        self.inradius_origin
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    #[inline]
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.index.get(v)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.index.get(v).is_some()
    }

    pub fn pair_index(&self, pair: BoundaryPair) -> Option<usize> {
        self.boundary_pairs.binary_search(&pair).ok()
    }

    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(&self.to_json()).expect("domain serializes");
        short_hash(&json)
    }

    pub fn to_json(&self) -> DomainJson {
        DomainJson {
            lattice: self.lattice,
            interior: self.interior.iter().map(|v| [v.x, v.y]).collect(),
            boundary_pairs: self
                .boundary_pairs
                .iter()
                .map(|p| [p.inner.x, p.inner.y, p.outer.x, p.outer.y])
                .collect(),
        }
    }

    pub fn from_json(j: &DomainJson) -> Result<Self> {
        let d = Self::from_vertices(j.lattice, j.interior.iter().map(|a| Vertex::new(a[0], a[1])))?;
        let pairs: Vec<BoundaryPair> = j
            .boundary_pairs
            .iter()
            .map(|a| BoundaryPair::new(Vertex::new(a[0], a[1]), Vertex::new(a[2], a[3])))
            .collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        if sorted != d.boundary_pairs {
            return Err(Error::InvalidInput("boundary pairs do not match the interior set".into()));
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainJson {
    pub lattice: Lattice,
    pub interior: Vec<[i32; 2]>,
    pub boundary_pairs: Vec<[i32; 4]>,
}

/// The component of the origin among lattice vertices with `|v| < radius`.
pub fn build_disk_domain(radius: f64, lattice: Lattice) -> Result<GridDomain> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(Error::DomainTooSmall(format!("radius {radius} leaves no room around the origin")));
    }
    let inside = |v: Vertex| lattice.embed(v).norm() < radius;
    let mut seen = HashSet::from([Vertex::ORIGIN]);
    let mut queue = VecDeque::from([Vertex::ORIGIN]);
    while let Some(v) = queue.pop_front() {
        for &o in lattice.neighbors() {
            let w = v + o;
            if inside(w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    GridDomain::from_vertices(lattice, seen)
}

pub fn domain_from_vertices(lattice: Lattice, vertices: impl IntoIterator<Item = Vertex>) -> Result<GridDomain> {
    GridDomain::from_vertices(lattice, vertices)
}

/// The lattice points of the square `[-r, r]^2`.
pub fn build_square_domain(r: i32) -> Result<GridDomain> {
    let pts = (-r..=r).flat_map(|y| (-r..=r).map(move |x| Vertex::new(x, y)));
    domain_from_vertices(Lattice::Square, pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.pass)
    }
}

pub fn validate_domain(d: &GridDomain) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(Check { name: name.into(), pass, detail })
    };

    push("origin", d.contains(Vertex::ORIGIN), String::new());

    let components = component_count(d);
    push("connected", components == 1, format!("{components} components"));

    let bad_pairs = d
        .boundary_pairs
        .iter()
        .filter(|p| {
            !(d.contains(p.inner) && !d.contains(p.outer) && d.lattice.is_neighbor_offset(p.outer - p.inner))
        })
        .count();
    push("boundary_pairs", bad_pairs == 0, format!("{bad_pairs} malformed pairs"));

    let inr = d.inradius_origin;
    push("inradius", inr > 0.0 && inr.is_finite(), format!("{inr}"));

    let holes = complement_components(d) - 1;
    push("simply_connected", holes == 0, format!("{holes} holes"));

    ValidationReport { checks }
}

fn component_count(d: &GridDomain) -> usize {
    let mut seen = vec![false; d.len()];
    let mut count = 0;
    for start in 0..d.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &o in d.lattice.neighbors() {
                if let Some(j) = d.index_of(d.interior[i] + o) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    count
}

/// Connected components of the complement of the 2-complex made of the
/// domain vertices, the edges between them and the faces all of whose
/// corners lie in the domain. A connected complex is simply connected iff
/// this count is one.
fn complement_components(d: &GridDomain) -> usize {
    let lat = d.lattice;
    let min_x = d.interior.iter().map(|v| v.x).min().unwrap() - 2;
    let max_x = d.interior.iter().map(|v| v.x).max().unwrap() + 1;
    let min_y = d.interior.iter().map(|v| v.y).min().unwrap() - 2;
    let max_y = d.interior.iter().map(|v| v.y).max().unwrap() + 1;

    // Unfilled faces inside the window, keyed by their sorted corner set.
    let mut faces: Vec<Vec<Vertex>> = Vec::new();
    let mut on_rim: Vec<bool> = Vec::new();
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            let v = Vertex::new(x, y);
            for mut f in lat.faces_at(v) {
                if f.iter().all(|&w| d.contains(w)) {
                    continue;
                }
                on_rim.push(x == min_x || x == max_x || y == min_y || y == max_y);
                f.sort();
                faces.push(f);
            }
        }
    }
    // Faces sharing a non-domain edge are adjacent.
    let mut by_edge: HashMap<(Vertex, Vertex), Vec<usize>> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for a in 0..f.len() {
            for b in a + 1..f.len() {
                let (p, q) = (f[a], f[b]);
                if !lat.is_neighbor_offset(q - p) {
                    continue;
                }
                if d.contains(p) && d.contains(q) {
                    continue;
                }
                by_edge.entry((p, q)).or_default().push(i);
            }
        }
    }
    let n = faces.len() + 1;
    let outer = faces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for (i, &rim) in on_rim.iter().enumerate() {
        if rim {
            union(&mut parent, i, outer);
        }
    }
    for ids in by_edge.values() {
        for w in ids.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}
