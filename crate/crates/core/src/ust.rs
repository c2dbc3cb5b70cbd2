//! Wilson's algorithm for weighted spanning trees and rooted
//! arborescences, with exhaustive enumeration for small graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph with positive edge weights. Parallel edges are allowed,
/// self-loops are not.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, usize)>>,
    cumulative: Vec<Vec<f64>>,
    uniform: bool,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (k, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge {k} has an endpoint out of range")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("edge {k} is a self-loop")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("edge {k} has weight {w}")));
            }
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        let uniform = edges.iter().all(|e| e.2 == edges[0].2);
        let cumulative = if uniform {
            Vec::new()
        } else {
            adj.iter()
                .map(|nb| {
                    let mut acc = 0.0;
                    nb.iter()
                        .map(|&(_, k)| {
                            acc += edges[k].2;
                            acc
                        })
                        .collect()
                })
                .collect()
        };
        Ok(WeightedGraph { n, edges, adj, cumulative, uniform })
    }

    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(u, v)| (u, v, 1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> (usize, usize) {
        let nb = &self.adj[u];
        if self.uniform {
            nb[rng.random_range(0..nb.len())]
        } else {
            let c = &self.cumulative[u];
            let x = rng.random::<f64>() * c[c.len() - 1];
            nb[c.iter().position(|&t| x < t).unwrap_or(nb.len() - 1)]
        }
    }

    fn reaches_all_from(&self, root: usize) -> Option<usize> {
        let mut seen = vec![false; self.n];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Sum over spanning trees of the product of edge weights, by the
    /// matrix-tree theorem.
    pub fn tree_weight_total(&self) -> f64 {
        let m = self.n.saturating_sub(1);
        let mut a = vec![vec![0.0; m]; m];
        for &(u, v, w) in &self.edges {
            for (x, y) in [(u, v), (v, u)] {
                if x < m {
                    a[x][x] += w;
                    if y < m {
                        a[x][y] -= w;
                    }
                }
            }
        }
        determinant(a)
    }
}

pub(crate) fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let m = a.len();
    let mut det = 1.0;
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            for j in k..m {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Spanning tree given by edge indices into its graph, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
    pub root: Option<usize>,
}

impl SpanningTree {
    pub fn weight(&self, g: &WeightedGraph) -> f64 {
        self.edges.iter().map(|&k| g.edges[k].2).product()
    }

    pub fn is_spanning_tree_of(&self, g: &WeightedGraph) -> bool {
        if self.edges.len() + 1 != g.n {
            return false;
        }
        let mut uf = UnionFind::new(g.n);
        self.edges.iter().all(|&k| uf.union(g.edges[k].0, g.edges[k].1))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Samples a spanning tree with probability proportional to the product of
/// its edge weights. Vertices are processed in `order` (all vertices if
/// `None`); the law does not depend on the order.
pub fn wilson_ust<R: Rng + ?Sized>(
    g: &WeightedGraph,
    root: usize,
    order: Option<&[usize]>,
    rng: &mut R,
) -> Result<SpanningTree> {
    if root >= g.n {
        return Err(Error::InvalidInput("root out of range".into()));
    }
    if let Some(v) = g.reaches_all_from(root) {
        return Err(Error::UnreachableRoot(v));
    }
    let default: Vec<usize>;
    let order = match order {
        Some(o) => o,
        None => {
            default = (0..g.n).collect();
            &default
        }
    };
    let mut in_tree = vec![false; g.n];
    in_tree[root] = true;
    let mut next = vec![(usize::MAX, usize::MAX); g.n];
    let mut edges = Vec::with_capacity(g.n.saturating_sub(1));
    for &start in order {
        let mut u = start;
        while !in_tree[u] {
            let s = g.step(u, rng);
            next[u] = s;
            u = s.0;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            edges.push(next[u].1);
            u = next[u].0;
        }
    }
    if let Some(v) = in_tree.iter().position(|t| !t) {
        return Err(Error::InvalidInput(format!("order does not cover vertex {v}")));
    }
    edges.sort_unstable();
    Ok(SpanningTree { edges, root: Some(root) })
}

/// All spanning trees, after checking via the matrix-tree theorem that
/// there are at most `limit` of them.
pub fn enumerate_spanning_trees(g: &WeightedGraph, limit: u64) -> Result<Vec<SpanningTree>> {
    let unit = WeightedGraph::new(g.n, g.edges.iter().map(|&(u, v, _)| (u, v, 1.0)).collect())?;
    let count = unit.tree_weight_total().round();
    if count > limit as f64 {
        return Err(Error::EnumerationLimit(limit));
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(g: &WeightedGraph, k: usize, uf: &UnionFind, chosen: &mut Vec<usize>, out: &mut Vec<SpanningTree>) {
        let need = g.n - 1;
        if chosen.len() == need {
            out.push(SpanningTree { edges: chosen.clone(), root: None });
            return;
        }
        if k == g.edges.len() || chosen.len() + (g.edges.len() - k) < need {
            return;
        }
        let (a, b, _) = g.edges[k];
        let mut with = uf.clone();
        if with.union(a, b) {
            chosen.push(k);
            rec(g, k + 1, &with, chosen, out);
            chosen.pop();
        }
        rec(g, k + 1, uf, chosen, out);
    }
    if g.n > 0 {
        rec(g, 0, &UnionFind::new(g.n), &mut chosen, &mut out);
    }
    debug_assert_eq!(out.len() as f64, count);
    Ok(out)
}

/// Finite Markov chain given by sparse transition rows.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    rows: Vec<Vec<(usize, f64)>>,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.iter().any(|&(j, p)| j >= n || !(p >= 0.0)) {
                return Err(Error::InvalidInput(format!("row {i} is malformed")));
            }
            let s: f64 = r.iter().map(|e| e.1).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
            }
        }
        Ok(MarkovChain { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|e| e.0 == j).map(|e| e.1).sum()
    }

    fn step<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(j, p) in &self.rows[i] {
            acc += p;
            if u < acc {
                return j;
            }
        }
        self.rows[i].iter().rev().find(|e| e.1 > 0.0).unwrap().0
    }
}

/// Spanning tree oriented towards `root`: every other vertex has a parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arborescence {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
}

impl Arborescence {
    pub fn weight(&self, chain: &MarkovChain) -> f64 {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|j| chain.prob(i, j)))
            .product()
    }
}

/// Samples an arborescence rooted at `root` with probability proportional
/// to the product of the transition probabilities of its edges.
pub fn wilson_arborescence<R: Rng + ?Sized>(chain: &MarkovChain, root: usize, rng: &mut R) -> Result<Arborescence> {
    let n = chain.n();
    if root >= n {
        return Err(Error::InvalidInput("root out of range".into()));
    }
    let mut reach = vec![false; n];
    reach[root] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if !reach[i] && chain.rows[i].iter().any(|&(j, p)| p > 0.0 && reach[j]) {
                reach[i] = true;
                changed = true;
            }
        }
    }
    if let Some(v) = reach.iter().position(|r| !r) {
        return Err(Error::UnreachableRoot(v));
    }
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut next = vec![usize::MAX; n];
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            next[u] = chain.step(u, rng);
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    let parent = (0..n).map(|i| if i == root { None } else { Some(next[i]) }).collect();
    Ok(Arborescence { root, parent })
}

/// All arborescences rooted at `root` using edges of positive probability
/// (self-loops excluded). Exponential; for tiny chains only.
pub fn enumerate_arborescences(chain: &MarkovChain, root: usize) -> Vec<Arborescence> {
    let n = chain.n();
    let choices: Vec<Vec<usize>> = (0..n)
        .map(|i| chain.rows[i].iter().filter(|e| e.1 > 0.0 && e.0 != i).map(|e| e.0).collect())
        .collect();
    let mut out = Vec::new();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    fn rec(i: usize, root: usize, choices: &[Vec<usize>], parent: &mut Vec<Option<usize>>, out: &mut Vec<Arborescence>) {
        let n = choices.len();
        if i == n {
            let ok = (0..n).all(|mut v| {
                for _ in 0..n {
                    match parent[v] {
                        None => return v == root,
                        Some(p) => v = p,
                    }
                }
                false
            });
            if ok {
                out.push(Arborescence { root, parent: parent.clone() });
            }
            return;
        }
        if i == root {
            return rec(i + 1, root, choices, parent, out);
        }
        for &j in &choices[i] {
            parent[i] = Some(j);
            rec(i + 1, root, choices, parent, out);
        }
        parent[i] = None;
    }
    rec(0, root, &choices, &mut parent, &mut out);
    out
}
