//! Driving-function observables of LERW and UST Peano curves: the
//! key-estimate moments, increment statistics, and the harmonic-measure
//! martingale.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{build_disk_domain, GridDomain};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Lattice, LatticeWalkSpec, Vertex};
use crate::lerw::LerwSampler;
use crate::linalg::{CsrMatrix, LinearSystem};
use crate::loewner::{brownian_record, DrivingRecord, Mode, Zipper, ZipperOptions};
use crate::peano::{to_plane, GridTree, PeanoConfig};
use crate::rng::{streams, RngKey};
use crate::stats::{ks_normal, pearson, Summary, Verdict};

/// Capacity resolution of the zipper relative to the horizon.
pub const MAX_DT_FRACTION: f64 = 1e-3;
/// Spacing, in lattice units, between Peano vertices fed to the zipper.
pub const PEANO_SPACING: f64 = 2.0;
pub const LEVEL: f64 = 0.001;

/// One line of a machine-readable report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub test: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub n: u64,
    pub p_value: Option<f64>,
    /// Acceptance threshold or band as text.
    pub criterion: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub entries: Vec<ReportEntry>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), ..Default::default() }
    }

    pub fn push(&mut self, e: ReportEntry) {
        self.entries.push(e);
    }

    pub fn verdict(&self) -> Verdict {
        self.entries.iter().fold(Verdict::Pass, |v, e| v.and(e.verdict))
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
        self.notes.extend(other.notes);
    }
}

/// Möbius map from the disk of radius `rho` onto the upper half-plane
/// sending the boundary points in the directions of `a` and `b` to 0 and
/// infinity, and the counter-clockwise arc from `a` to `b` onto the
/// positive axis. Antipodal points give the Cayley map `i(1+z)/(1-z)`
/// up to rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskToHalfPlane {
    pub rho: f64,
    a_hat: Complex64,
    b_hat: Complex64,
    lambda: Complex64,
}

impl DiskToHalfPlane {
    pub fn new(a: Complex64, b: Complex64, rho: f64) -> Result<Self> {
        let (a_hat, b_hat) = (a / a.norm(), b / b.norm());
        if (a_hat - b_hat).norm() < 1e-9 || !(rho > 0.0) {
            return invalid("marked points coincide");
        }
        let ta = a_hat.im.atan2(a_hat.re);
        let tb = b_hat.im.atan2(b_hat.re);
        let mid = Complex64::from_polar(1.0, ta + 0.5 * (tb - ta).rem_euclid(2.0 * PI));
        let raw = (mid - a_hat) / (mid - b_hat);
        let lambda = raw.conj() / raw.norm() * (0.5 * (a_hat - b_hat).norm());
        let m = DiskToHalfPlane { rho, a_hat, b_hat, lambda };
        debug_assert!(m.map(Complex64::new(0.0, 0.0)).im > 0.0);
        Ok(m)
    }

    pub fn for_config(cfg: &PeanoConfig) -> Result<Self> {
        let a = to_plane(cfg.a());
        Self::new(a, to_plane(cfg.b()), a.norm())
    }

    #[inline]
    pub fn map(&self, z: Complex64) -> Complex64 {
        let u = z / self.rho;
        self.lambda * (u - self.a_hat) / (u - self.b_hat)
    }
}

/// Radial driving function of a reversed LERW `path` (outer vertex first,
/// ending at the origin) in the disk of radius `r`, using `z -> z/r`. The
/// curve starts at the exit edge midpoint projected to the circle.
pub fn lerw_driving(path: &[Vertex], r: f64, opts: ZipperOptions) -> Result<Zipper> {
    if path.len() < 2 {
        return invalid("path too short");
    }
    let p = |v: Vertex| Complex64::new(v.x as f64, v.y as f64);
    let m = 0.5 * (p(path[0]) + p(path[1]));
    let mut z = Zipper::new(Mode::Radial, m / m.norm(), opts)?;
    for &v in &path[1..] {
        if z.done() {
            break;
        }
        z.push(p(v) / r)?;
    }
    Ok(z)
}

/// Chordal driving function of the Peano curve of `tree`. Vertices are fed
/// once they are at least `spacing` lattice units from the previous one
/// fed; the skipped vertices are used to refine rejected steps.
pub fn peano_driving(
    cfg: &PeanoConfig,
    map: &DiskToHalfPlane,
    tree: &GridTree,
    spacing: f64,
    opts: ZipperOptions,
) -> Result<Zipper> {
    let mut z = Zipper::new(Mode::Chordal, Complex64::new(0.0, 0.0), opts)?;
    let mut buf: Vec<Complex64> = Vec::new();
    let mut last = to_plane(cfg.a());
    for p in cfg.walker(tree)?.skip(1) {
        let p = to_plane(p?);
        buf.push(map.map(p));
        if (p - last).norm() >= spacing {
            z.push_run(&buf)?;
            buf.clear();
            last = p;
            if z.done() {
                break;
            }
        }
    }
    Ok(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimateSample {
    pub delta: f64,
    pub m_stop: usize,
    /// `theta_m - theta_0` (radial) or `W_m - W_0` (chordal).
    pub displacement: f64,
    pub t_m: f64,
}

/// First step `m >= 1` with `t_m >= delta^2` or `|W_m - W_0| >= delta`.
pub fn stopping_sample(record: &DrivingRecord, delta: f64) -> Option<KeyEstimateSample> {
    let w0 = record.values[0];
    (1..record.times.len())
        .find(|&j| record.times[j] >= delta * delta || (record.values[j] - w0).abs() >= delta)
        .map(|m| KeyEstimateSample { delta, m_stop: m, displacement: record.values[m] - w0, t_m: record.times[m] })
}

/// Moments at the stopping step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub truncated: usize,
    pub kappa: f64,
    pub delta: f64,
    pub mean_displacement: Summary,
    /// Samples of `displacement^2 - kappa t_m`.
    pub second_moment_gap: Summary,
    pub threshold_floor: f64,
    pub samples: Vec<KeyEstimateSample>,
}

impl MomentReport {
    fn from_samples(samples: Vec<KeyEstimateSample>, truncated: usize, kappa: f64, delta: f64) -> Self {
        let d: Vec<f64> = samples.iter().map(|s| s.displacement).collect();
        let g: Vec<f64> = samples.iter().map(|s| s.displacement * s.displacement - kappa * s.t_m).collect();
        MomentReport {
            n: samples.len(),
            truncated,
            kappa,
            delta,
            mean_displacement: Summary::of(&d),
            second_moment_gap: Summary::of(&g),
            threshold_floor: 20.0 * delta.powi(3),
            samples,
        }
    }

    /// `|estimate| < max(3 SE, 20 delta^3)` for both moments; inconclusive
    /// when more than 1% of replicas were truncated.
    pub fn report(&self, name: &str) -> Report {
        let mut r = Report::new(name);
        let budget = self.n + self.truncated;
        let trunc_ok = (self.truncated as f64) <= 0.01 * budget as f64;
        for (test, s) in [("mean displacement", self.mean_displacement), ("second moment gap", self.second_moment_gap)] {
            let thr = (3.0 * s.stderr).max(self.threshold_floor);
            let v = if !trunc_ok { Verdict::Inconclusive } else { Verdict::from_bool(s.mean.abs() < thr) };
            r.push(ReportEntry {
                test: test.into(),
                estimate: s.mean,
                stderr: Some(s.stderr),
                n: s.n,
                p_value: None,
                criterion: format!("|x| < {thr:.4}"),
                verdict: v,
            });
        }
        r.notes.push(format!("truncated {} of {}", self.truncated, budget));
        r
    }
}

fn lerw_zipper_opts(t_max: f64) -> ZipperOptions {
    ZipperOptions { max_dt: MAX_DT_FRACTION * t_max, t_max, ..Default::default() }
}

/// Samples reversed LERWs in the disk of radius `r` and collects the
/// radial driving records up to capacity `t_max`, one per replica.
/// Replicas whose record ends before `t_max` are returned as `None`.
pub fn lerw_records(r: f64, t_max: f64, n: usize, key: RngKey) -> Result<Vec<Option<DrivingRecord>>> {
    let domain = build_disk_domain(r, Lattice::Square)?;
    let spec = LatticeWalkSpec::simple_square();
    let opts = lerw_zipper_opts(t_max);
    (0..n)
        .into_par_iter()
        .map_init(
            || LerwSampler::new(&domain, &spec),
            |sampler, i| {
                let sampler = sampler.as_mut().map_err(|e| Error::InvalidInput(e.to_string()))?;
                let mut rng = key.with_stream(streams::LERW).with_replica(i as u64).rng();
                let path = sampler.sample_reversed(&mut rng)?;
                let z = lerw_driving(&path, r, opts)?;
                Ok((z.capacity() >= t_max).then(|| z.into_parts().0))
            },
        )
        .collect()
}

/// Samples Peano curves of uniform spanning trees on the disk
/// configuration of radius `radius` with antipodal marked points.
pub fn peano_records(radius: f64, t_max: f64, n: usize, key: RngKey) -> Result<Vec<Option<DrivingRecord>>> {
    let cfg = PeanoConfig::disk(radius, PI, 0.0)?;
    let map = DiskToHalfPlane::for_config(&cfg)?;
    let opts = lerw_zipper_opts(t_max);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.with_stream(streams::PEANO).with_replica(i as u64).rng();
            let tree = cfg.sample_tree(&mut rng)?;
            let z = peano_driving(&cfg, &map, &tree, PEANO_SPACING, opts)?;
            Ok((z.capacity() >= t_max).then(|| z.into_parts().0))
        })
        .collect()
}

/// Driving records of SLE traces reconstructed by the zipper from their
/// own tips.
pub fn sle_records(kappa: f64, mode: Mode, t_max: f64, steps: usize, n: usize, key: RngKey) -> Result<Vec<Option<DrivingRecord>>> {
    let dt = t_max / steps as f64;
    let opts = ZipperOptions { max_dt: f64::INFINITY, t_max: t_max * (1.0 - 1e-9), ..Default::default() };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.with_stream(streams::SLE).with_replica(i as u64).rng();
            let rec = brownian_record(kappa, mode, t_max, dt, &mut rng)?;
            let tips = rec.chain()?.tips();
            let start = match mode {
                Mode::Chordal => Complex64::new(0.0, 0.0),
                Mode::Radial => Complex64::new(1.0, 0.0),
            };
            let mut z = Zipper::new(mode, start, opts)?;
            for p in tips {
                z.push(p)?;
            }
            Ok((z.capacity() >= opts.t_max).then(|| z.into_parts().0))
        })
        .collect()
}

fn key_estimate(records: Vec<Option<DrivingRecord>>, kappa: f64, delta: f64) -> MomentReport {
    let mut truncated = 0;
    let mut samples = Vec::new();
    for r in records {
        match r.as_ref().and_then(|r| stopping_sample(r, delta)) {
            Some(s) => samples.push(s),
            None => truncated += 1,
        }
    }
    MomentReport::from_samples(samples, truncated, kappa, delta)
}

/// Moments of the radial driving function of reversed LERW at the first
/// step where `t >= delta^2` or `|theta - theta_0| >= delta`.
pub fn lerw_key_estimate(r: f64, delta: f64, n: usize, key: RngKey) -> Result<MomentReport> {
    if r < 50.0 / delta {
        return invalid(format!("R = {r} is below 50/delta"));
    }
    Ok(key_estimate(lerw_records(r, delta * delta, n, key)?, 2.0, delta))
}

/// Chordal analogue for the UST Peano curve.
pub fn peano_key_estimate(radius: f64, delta: f64, n: usize, key: RngKey) -> Result<MomentReport> {
    if radius < 50.0 / delta {
        return invalid(format!("radius {radius} is below 50/delta"));
    }
    Ok(key_estimate(peano_records(radius, delta * delta, n, key)?, 8.0, delta))
}

/// Driving displacements `W(t_j) - W(0)` on a shared grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementDataset {
    pub mode: Mode,
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub replicas: Vec<Vec<f64>>,
    pub truncated: usize,
}

impl IncrementDataset {
    /// `points` equally spaced grid times ending at `horizon`.
    pub fn from_records(mode: Mode, horizon: f64, points: usize, records: &[Option<DrivingRecord>]) -> Self {
        let grid: Vec<f64> = (1..=points).map(|j| horizon * j as f64 / points as f64).collect();
        let mut replicas = Vec::new();
        let mut truncated = 0;
        for r in records {
            match r.as_ref().and_then(|r| r.displacements(&grid)) {
                Some(d) => replicas.push(d),
                None => truncated += 1,
            }
        }
        IncrementDataset { mode, horizon, grid, replicas, truncated }
    }

    /// Increments over the grid cells for replica `i`.
    pub fn increments(&self, i: usize) -> Vec<f64> {
        let d = &self.replicas[i];
        (0..d.len()).map(|j| d[j] - if j == 0 { 0.0 } else { d[j - 1] }).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        write!(out, "replica")?;
        for t in &self.grid {
            write!(out, ",{t}")?;
        }
        writeln!(out)?;
        for (i, d) in self.replicas.iter().enumerate() {
            write!(out, "{i}")?;
            for x in d {
                write!(out, ",{x:.17e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Brownian-motion tests of a driving dataset: zero-mean increments,
/// `Var W(t) / t` within `band` at every grid time, normal increments at
/// level `LEVEL` (Bonferroni over cells), and disjoint-increment
/// correlations below `3/sqrt(N)`.
pub fn driving_convergence(data: &IncrementDataset, band: (f64, f64)) -> Report {
    let mut r = Report::new(format!("{:?} driving convergence", data.mode).to_lowercase());
    let n = data.replicas.len();
    let budget = n + data.truncated;
    let inconclusive = (data.truncated as f64) > 0.01 * budget as f64 || n < 200;
    let wrap = |ok: bool| if inconclusive { Verdict::Inconclusive } else { Verdict::from_bool(ok) };
    let cells = data.grid.len();
    let incs: Vec<Vec<f64>> = (0..n).map(|i| data.increments(i)).collect();
    let column = |j: usize| -> Vec<f64> { incs.iter().map(|v| v[j]).collect() };
    for (j, &t) in data.grid.iter().enumerate() {
        let disp: Vec<f64> = data.replicas.iter().map(|d| d[j]).collect();
        let s = Summary::of(&disp);
        let ratio = s.variance / t;
        r.push(ReportEntry {
            test: format!("Var W(t)/t at t={t:.4}"),
            estimate: ratio,
            stderr: Some(ratio * (2.0 / (n as f64 - 1.0)).sqrt()),
            n: n as u64,
            p_value: None,
            criterion: format!("in [{}, {}]", band.0, band.1),
            verdict: wrap(ratio >= band.0 && ratio <= band.1),
        });
        let inc = column(j);
        let si = Summary::of(&inc);
        r.push(ReportEntry {
            test: format!("mean increment on cell {}", j + 1),
            estimate: si.mean,
            stderr: Some(si.stderr),
            n: n as u64,
            p_value: None,
            criterion: "|mean| < 3 SE".into(),
            verdict: wrap(si.mean.abs() < 3.0 * si.stderr),
        });
        let ks = ks_normal(&inc, si.mean, si.variance.sqrt());
        let level = LEVEL / cells as f64;
        r.push(ReportEntry {
            test: format!("normality of cell {} increments (KS)", j + 1),
            estimate: ks.statistic,
            stderr: None,
            n: n as u64,
            p_value: Some(ks.p_value),
            criterion: format!("p > {level:.1e}"),
            verdict: wrap(ks.p_value > level),
        });
    }
    let bound = 3.0 / (n as f64).sqrt();
    for i in 0..cells {
        for j in i + 1..cells {
            let rho = pearson(&column(i), &column(j));
            r.push(ReportEntry {
                test: format!("correlation of cells {} and {}", i + 1, j + 1),
                estimate: rho,
                stderr: None,
                n: n as u64,
                p_value: None,
                criterion: format!("|rho| < {bound:.4}"),
                verdict: wrap(rho.abs() < bound),
            });
        }
    }
    r.notes.push(format!("truncated {} of {}", data.truncated, budget));
    r
}

/// Pooled quadratic variation `sum (dW)^2 / sum dt` over all records.
pub fn pooled_kappa(records: &[Option<DrivingRecord>]) -> f64 {
    let (mut q, mut t) = (0.0, 0.0);
    for r in records.iter().flatten() {
        for k in 1..r.times.len() {
            let dw = r.values[k] - r.values[k - 1];
            q += dw * dw;
            t += r.times[k] - r.times[k - 1];
        }
    }
    q / t
}

/// Drift of `M_n = H_n(v, g_n) / H_n(0, g_n)` along reversed LERW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub r: f64,
    pub sigma: usize,
    pub v: Vertex,
    pub drift: Summary,
    pub hits: usize,
    pub verdict: Verdict,
}

/// Harmonic measures seen from `0` and `v` in `D` minus a growing path.
/// Uses `H_n(x, g_n) = sum_s G(x, s) [G_SS^{-1}]_{s, g_n}` over the removed
/// vertices `S = {g_1..g_n}`.
pub struct PathHarmonic<'a> {
    domain: &'a GridDomain,
    system: LinearSystem,
    rows: [Vec<f64>; 2],
    reach: i32,
    local: HashMap<Vertex, Vec<f64>>,
}

impl<'a> PathHarmonic<'a> {
    /// `reach` bounds the distance between removed vertices whose mutual
    /// Green's function is needed.
    pub fn new(domain: &'a GridDomain, v: Vertex, reach: i32) -> Result<Self> {
        let n = domain.len();
        let mut t = Vec::with_capacity(5 * n);
        for (i, &x) in domain.interior().iter().enumerate() {
            t.push((i, i, 1.0));
            for &o in Lattice::Square.neighbors() {
                if let Some(j) = domain.index_of(x + o) {
                    t.push((i, j, -0.25));
                }
            }
        }
        let system = LinearSystem::new(CsrMatrix::from_triplets(n, t))?;
        let unit = |p: Vertex| -> Result<Vec<f64>> {
            let mut b = vec![0.0; n];
            b[domain.index_of(p).ok_or_else(|| Error::InvalidInput(format!("{p} not in domain")))?] = 1.0;
            system.solve(&b)
        };
        let rows = [unit(Vertex::ORIGIN)?, unit(v)?];
        Ok(PathHarmonic { domain, system, rows, reach, local: HashMap::new() })
    }

    fn green_local(&mut self, s: Vertex, s2: Vertex) -> Result<f64> {
        let w = 2 * self.reach + 1;
        let d = s2 - s;
        if d.x.abs() > self.reach || d.y.abs() > self.reach {
            return invalid("path vertices farther apart than the cached reach");
        }
        if !self.local.contains_key(&s) {
            let n = self.domain.len();
            let mut b = vec![0.0; n];
            b[self.domain.index_of(s).unwrap()] = 1.0;
            let col = self.system.solve(&b)?;
            let mut box_vals = vec![0.0; (w * w) as usize];
            for dy in -self.reach..=self.reach {
                for dx in -self.reach..=self.reach {
                    if let Some(j) = self.domain.index_of(s + Vertex::new(dx, dy)) {
                        box_vals[((dy + self.reach) * w + dx + self.reach) as usize] = col[j];
                    }
                }
            }
            self.local.insert(s, box_vals);
        }
        Ok(self.local[&s][((d.y + self.reach) * w + d.x + self.reach) as usize])
    }

    /// `(H_n(0, g_n), H_n(v, g_n))` for `path = [g_0, ..., g_n]`, where
    /// `g_0` lies outside the domain and the rest inside.
    pub fn harmonic_pair(&mut self, path: &[Vertex]) -> Result<(f64, f64)> {
        let d = self.domain;
        if path.len() == 1 {
            let u = path[0];
            let mut h = [0.0; 2];
            for &o in Lattice::Square.neighbors() {
                if let Some(j) = d.index_of(u + o) {
                    for (k, row) in self.rows.iter().enumerate() {
                        h[k] += 0.25 * row[j];
                    }
                }
            }
            return Ok((h[0], h[1]));
        }
        let s = &path[1..];
        let m = s.len();
        let mut g = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                g[i][j] = self.green_local(s[i], s[j])?;
            }
        }
        let mut out = [0.0; 2];
        for (k, row) in self.rows.iter().enumerate() {
            let rhs: Vec<f64> = s.iter().map(|&x| row[d.index_of(x).unwrap()]).collect();
            let sol = dense_solve(g.clone(), rhs)?;
            out[k] = sol[m - 1];
        }
        Ok((out[0], out[1]))
    }
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[p][k].abs() < 1e-300 {
            return Err(Error::Solver("singular Green matrix".into()));
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

/// Estimates `E[M_sigma - M_0]` over `n` reversed LERWs in the disk of
/// radius `r`, with `v` on the positive axis at distance `r/10`.
pub fn lambda_martingale_check(r: f64, sigma: usize, n: usize, key: RngKey) -> Result<MartingaleReport> {
    let domain = build_disk_domain(r, Lattice::Square)?;
    let spec = LatticeWalkSpec::simple_square();
    let v = Vertex::new((r / 10.0).round() as i32, 0);
    let mut ph = PathHarmonic::new(&domain, v, sigma as i32 + 1)?;
    let mut sampler = LerwSampler::new(&domain, &spec)?;
    let mut diffs = Vec::with_capacity(n);
    let mut hits = 0;
    for i in 0..n {
        let mut rng = key.with_stream(streams::MARTINGALE).with_replica(i as u64).rng();
        let path = sampler.sample_reversed(&mut rng)?;
        let k = sigma.min(path.len() - 1);
        if path[1..=k].contains(&v) || path[1..=k].contains(&Vertex::ORIGIN) {
            hits += 1;
            continue;
        }
        let (a0, b0) = ph.harmonic_pair(&path[..1])?;
        let (a1, b1) = ph.harmonic_pair(&path[..=k])?;
        diffs.push(b1 / a1 - b0 / a0);
    }
    let drift = Summary::of(&diffs);
    let verdict = if hits as f64 > 0.001 * n as f64 {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(drift.mean.abs() < 3.0 * drift.stderr)
    };
    Ok(MartingaleReport { r, sigma, v, drift, hits, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_normalisation() {
        let m = DiskToHalfPlane::new(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), 1.0).unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.2), Complex64::new(-0.5, 0.5)] {
            let cayley = Complex64::new(0.0, 1.0) * (1.0 + z) / (1.0 - z);
            assert!((m.map(z) - cayley).norm() < 1e-12);
        }
        // Lower semicircle (counter-clockwise from -1 to 1) lands on R+.
        let w = m.map(Complex64::from_polar(1.0, 1.4 * PI));
        assert!(w.re > 0.0 && w.im.abs() < 1e-12);
        let m2 = DiskToHalfPlane::new(Complex64::new(0.0, 5.0), Complex64::new(3.0, -4.0), 5.0).unwrap();
        assert!(m2.map(Complex64::new(0.0, 0.0)).im > 0.0);
        assert!(m2.map(Complex64::new(0.0, 5.0)).norm() < 1e-12);
        let on = m2.map(Complex64::from_polar(5.0, 2.5));
        assert!(on.im.abs() < 1e-12 && on.re > 0.0);
    }

    #[test]
    fn stopping_rule() {
        let rec = DrivingRecord {
            mode: Mode::Chordal,
            times: vec![0.0, 0.01, 0.02, 0.05, 0.1],
            values: vec![0.0, 0.1, -0.2, 0.35, 0.0],
        };
        let s = stopping_sample(&rec, 0.3).unwrap();
        assert_eq!(s.m_stop, 3);
        assert_eq!(s.displacement, 0.35);
        let s = stopping_sample(&rec, 0.2).unwrap();
        assert_eq!(s.m_stop, 2);
        let s = stopping_sample(&rec, 0.31).unwrap();
        assert_eq!((s.m_stop, s.t_m), (3, 0.05));
        assert!(stopping_sample(&rec, 0.9).is_none());
    }

    #[test]
    fn mirrored_lerw_negates_displacement() {
        let domain = build_disk_domain(60.0, Lattice::Square).unwrap();
        let mut s = LerwSampler::new(&domain, &LatticeWalkSpec::simple_square()).unwrap();
        let mut rng = RngKey::new(4).rng();
        for _ in 0..5 {
            let path = s.sample_reversed(&mut rng).unwrap();
            let mirror: Vec<Vertex> = path.iter().map(|v| Vertex::new(v.x, -v.y)).collect();
            let opts = lerw_zipper_opts(0.09);
            let a = lerw_driving(&path, 60.0, opts).unwrap().into_parts().0;
            let b = lerw_driving(&mirror, 60.0, opts).unwrap().into_parts().0;
            let (sa, sb) = (stopping_sample(&a, 0.3), stopping_sample(&b, 0.3));
            if let (Some(sa), Some(sb)) = (sa, sb) {
                assert_eq!(sa.m_stop, sb.m_stop);
                assert!((sa.displacement + sb.displacement).abs() < 1e-9);
                assert!((sa.t_m - sb.t_m).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn martingale_one_step_exact() {
        // On the 3x3 square, E[M_1 | g_0] = M_0 for every boundary vertex
        // g_0, with H_1 computed by direct solves on the slit domains.
        let domain = GridDomain::from_vertices(Lattice::Square, (-1..=1).flat_map(|y| (-1..=1).map(move |x| Vertex::new(x, y)))).unwrap();
        let spec = LatticeWalkSpec::simple_square();
        let v = Vertex::new(1, 1);
        let kw = crate::walk::KilledWalk::new(&domain, &spec).unwrap();
        let g0 = kw.green_column(Vertex::ORIGIN).unwrap();
        let hit = |y: Vertex, x: Vertex| -> f64 {
            // P^x[hit y before leaving], by solving on D minus y.
            if x == y {
                return 1.0;
            }
            let rest: Vec<Vertex> = domain.interior().iter().copied().filter(|&w| w != y).collect();
            let d2 = GridDomain::from_vertices(Lattice::Square, rest).unwrap();
            let kw2 = crate::walk::KilledWalk::new(&d2, &spec).unwrap();
            kw2.exit_vertex_table(y).unwrap().at(&d2, x).unwrap()
        };
        let mut ph = PathHarmonic::new(&domain, v, 3).unwrap();
        let outers: std::collections::BTreeSet<Vertex> = domain.boundary_pairs().iter().map(|p| p.outer).collect();
        for &u in &outers {
            let (h0, hv) = ph.harmonic_pair(&[u]).unwrap();
            let m0 = hv / h0;
            let mut e = 0.0;
            let mut total = 0.0;
            for bp in domain.boundary_pairs().iter().filter(|p| p.outer == u) {
                let y = bp.inner;
                let p = g0[domain.index_of(y).unwrap()] * 0.25 / h0;
                total += p;
                e += p * hit(y, v) / hit(y, Vertex::ORIGIN);
                let (a1, b1) = ph.harmonic_pair(&[u, y]).unwrap();
                assert!((a1 - hit(y, Vertex::ORIGIN)).abs() < 1e-12);
                assert!((b1 - hit(y, v)).abs() < 1e-12);
            }
            assert!((total - 1.0).abs() < 1e-12);
            assert!((e - m0).abs() < 1e-12, "{u}: {e} vs {m0}");
        }
    }

    #[test]
    fn sle_pipeline_recovers_kappa() {
        let recs = sle_records(2.0, Mode::Chordal, 1.0, 100, 40, RngKey::new(2)).unwrap();
        let k = pooled_kappa(&recs);
        assert!((k - 2.0).abs() < 0.2, "{k}");
    }
}
