//! Loewner chains built from elementary slit maps: forward growth from a
//! driving function, SLE sampling, and the zipper that recovers the driving
//! function of a discrete curve.
//!
//! Chordal chains live in the upper half-plane with `g(z) = z + 2t/z + ...`;
//! radial chains live in the unit disk with `g(0) = 0`, `g'(0) = e^t`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Radial,
    Chordal,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radial" => Ok(Mode::Radial),
            "chordal" => Ok(Mode::Chordal),
            _ => invalid(format!("unknown mode {s:?}")),
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Principal square root (`Re >= 0`), without the trigonometric round trip
/// of `Complex64::sqrt`.
#[inline]
pub fn csqrt(z: Complex64) -> Complex64 {
    let r = (z.re * z.re + z.im * z.im).sqrt();
    if r == 0.0 {
        return ZERO;
    }
    let a = ((r + z.re.abs()) * 0.5).sqrt();
    if z.re >= 0.0 {
        Complex64::new(a, z.im / (2.0 * a))
    } else {
        Complex64::new(z.im.abs() / (2.0 * a), a.copysign(z.im))
    }
}

/// Side of a slit, used where a boundary point has two preimages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `z / (1 + z)^2`, mapping the disk onto the plane minus `[1/4, inf)`.
#[inline]
fn koebe(z: Complex64) -> Complex64 {
    let d = 1.0 + z;
    z / (d * d)
}

/// Inverse of [`koebe`] into the closed disk. `side` picks the root when `w`
/// lies on the cut.
#[inline]
fn koebe_inv(w: Complex64, side: Side) -> Complex64 {
    let q = 1.0 - 4.0 * w;
    let s = if q.im == 0.0 && q.re < 0.0 {
        let a = (-q.re).sqrt();
        Complex64::new(0.0, if side == Side::Left { -a } else { a })
    } else {
        csqrt(q)
    };
    2.0 * w / (1.0 - 2.0 * w + s)
}

/// Solution of the Loewner equation over `dt` with constant driving: a
/// vertical slit (chordal) or a radial slit (radial).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitMap {
    pub mode: Mode,
    /// `W` (chordal) or the angle `theta` of the driving point (radial).
    pub drive: f64,
    pub dt: f64,
}

/// `z -> W + sqrt((z - W)^2 + 4 dt)`.
pub fn chordal_slit_step(w: f64, dt: f64) -> Result<SlitMap> {
    if !(dt > 0.0) || !w.is_finite() {
        return invalid("chordal step needs dt > 0 and finite W");
    }
    Ok(SlitMap { mode: Mode::Chordal, drive: w, dt })
}

/// Radial map removing the slit from `e^{i theta}` toward 0, normalised so
/// that `g'(0) = e^dt`.
pub fn radial_slit_step(theta: f64, dt: f64) -> Result<SlitMap> {
    if !(dt > 0.0) || !theta.is_finite() {
        return invalid("radial step needs dt > 0 and finite theta");
    }
    Ok(SlitMap { mode: Mode::Radial, drive: theta, dt })
}

impl SlitMap {
    /// Image of `z`. Points on the slit itself are sent to the `Left` side.
    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.apply_side(z, Side::Left)
    }

    pub fn apply_side(&self, z: Complex64, side: Side) -> Complex64 {
        match self.mode {
            Mode::Chordal => {
                let zeta = z - self.drive;
                let n2 = zeta.norm_sqr();
                let mut s = if n2 > 16.0 * self.dt {
                    zeta * csqrt(1.0 + 4.0 * self.dt / (zeta * zeta))
                } else {
                    csqrt(zeta * zeta + 4.0 * self.dt)
                };
                if s.im < 0.0 || (s.im == 0.0 && (s.re < 0.0) != (zeta.re < 0.0 || (zeta.re == 0.0 && side == Side::Left))) {
                    s = -s;
                }
                self.drive + s
            }
            Mode::Radial => {
                let rot = Complex64::from_polar(1.0, self.drive);
                let c = self.dt.exp();
                rot * koebe_inv(c * koebe(z / rot), side)
            }
        }
    }

    /// Preimage of `w`; boundary points on the slit base go to the side of
    /// the slit they lie on.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        match self.mode {
            Mode::Chordal => {
                let zeta = w - self.drive;
                let mut s = csqrt(zeta * zeta - 4.0 * self.dt);
                if s.im < 0.0 || (s.im == 0.0 && (s.re < 0.0) != (zeta.re < 0.0)) {
                    s = -s;
                }
                self.drive + s
            }
            Mode::Radial => {
                let rot = Complex64::from_polar(1.0, self.drive);
                let zeta = w / rot;
                let side = if zeta.im >= 0.0 { Side::Left } else { Side::Right };
                rot * koebe_inv(koebe(zeta) / self.dt.exp(), side)
            }
        }
    }

    /// Tip of the removed slit.
    pub fn tip(&self) -> Complex64 {
        match self.mode {
            Mode::Chordal => Complex64::new(self.drive, 2.0 * self.dt.sqrt()),
            Mode::Radial => {
                let c = self.dt.exp();
                let x = 2.0 * c - 1.0 - 2.0 * (c * c - c).sqrt();
                Complex64::from_polar(x, self.drive)
            }
        }
    }

    pub fn driving_point(&self) -> Complex64 {
        match self.mode {
            Mode::Chordal => Complex64::new(self.drive, 0.0),
            Mode::Radial => Complex64::from_polar(1.0, self.drive),
        }
    }
}

/// Radial Loewner flow with constant driving, integrated by RK4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialFlow {
    pub theta: f64,
    pub dt: f64,
    pub substeps: usize,
}

/// Raised when a point reaches the driving singularity before time `dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Absorbed {
    pub time: f64,
}

pub fn radial_step(theta: f64, dt: f64, substeps: usize) -> Result<RadialFlow> {
    if !(dt > 0.0) || substeps == 0 {
        return invalid("radial flow needs dt > 0 and at least one substep");
    }
    Ok(RadialFlow { theta, dt, substeps })
}

impl RadialFlow {
    fn field(&self, g: Complex64) -> Complex64 {
        let e = Complex64::from_polar(1.0, self.theta);
        g * (e + g) / (e - g)
    }

    pub fn apply(&self, z: Complex64) -> std::result::Result<Complex64, Absorbed> {
        let e = Complex64::from_polar(1.0, self.theta);
        let h = self.dt / self.substeps as f64;
        let mut g = z;
        for k in 0..self.substeps {
            if (e - g).norm() < 1e-9 {
                return Err(Absorbed { time: k as f64 * h });
            }
            let k1 = self.field(g);
            let k2 = self.field(g + 0.5 * h * k1);
            let k3 = self.field(g + 0.5 * h * k2);
            let k4 = self.field(g + h * k3);
            g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !g.is_finite() {
                return Err(Absorbed { time: (k + 1) as f64 * h });
            }
        }
        Ok(g)
    }

    /// `g'(0)`, integrated alongside the flow.
    pub fn derivative_at_origin(&self) -> f64 {
        // d/dt g'(0) = g'(0) since the field has derivative 1 at g = 0.
        let h = self.dt / self.substeps as f64;
        let mut d = 1.0;
        for _ in 0..self.substeps {
            let k1 = d;
            let k2 = d + 0.5 * h * k1;
            let k3 = d + 0.5 * h * k2;
            let k4 = d + h * k3;
            d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        d
    }

    pub fn velocity(&self, z: Complex64) -> Complex64 {
        self.field(z)
    }
}

/// Composition `g = phi_n o ... o phi_1` of slit maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalChain {
    pub mode: Mode,
    pub steps: Vec<SlitMap>,
}

impl ConformalChain {
    pub fn new(mode: Mode) -> Self {
        ConformalChain { mode, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: SlitMap) -> Result<()> {
        if step.mode != self.mode {
            return invalid("step mode does not match the chain");
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn capacity(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    #[inline]
    pub fn forward(&self, z: Complex64) -> Complex64 {
        self.steps.iter().fold(z, |z, s| s.apply(z))
    }

    /// `phi_1^{-1} o ... o phi_k^{-1}`.
    pub fn inverse_upto(&self, k: usize, w: Complex64) -> Complex64 {
        self.steps[..k].iter().rev().fold(w, |w, s| s.inverse(w))
    }

    pub fn inverse(&self, w: Complex64) -> Complex64 {
        self.inverse_upto(self.steps.len(), w)
    }

    /// Curve point at the end of step `k` (0-based).
    pub fn tip(&self, k: usize) -> Complex64 {
        self.inverse_upto(k, self.steps[k].tip())
    }

    pub fn tips(&self) -> Vec<Complex64> {
        (0..self.steps.len()).map(|k| self.tip(k)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |t, s| {
                *t += s.dt;
                Some(*t)
            })
            .collect()
    }
}

/// Samples of a driving function at increasing capacities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingRecord {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DrivingRecord {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() || self.times.is_empty() || self.times[0] != 0.0 {
            return invalid("record must start at t = 0 with one value per time");
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("times are not strictly increasing");
        }
        if self.mode == Mode::Radial && self.values.windows(2).any(|w| (w[1] - w[0]).abs() > PI) {
            return invalid("radial values are not a continuous lift");
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Value of the piecewise-constant driving on the step containing `t`.
    /// Times within a relative `1e-9` of `t` count as reaching it, so that
    /// rounding in the accumulated capacity does not cut off a record.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let k = self.times.partition_point(|&s| s < t * (1.0 - 1e-9));
        self.values.get(k).copied()
    }

    /// `W(t) - W(0)` on a grid; `None` if the record ends first.
    pub fn displacements(&self, grid: &[f64]) -> Option<Vec<f64>> {
        grid.iter().map(|&t| self.value_at(t).map(|v| v - self.values[0])).collect()
    }

    pub fn chain(&self) -> Result<ConformalChain> {
        self.validate()?;
        let mut chain = ConformalChain::new(self.mode);
        for k in 1..self.times.len() {
            let dt = self.times[k] - self.times[k - 1];
            chain.push(match self.mode {
                Mode::Chordal => chordal_slit_step(self.values[k], dt)?,
                Mode::Radial => radial_slit_step(self.values[k], dt)?,
            })?;
        }
        Ok(chain)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}

pub fn write_curve_csv<W: Write>(out: &mut W, times: &[f64], points: &[Complex64]) -> Result<()> {
    writeln!(out, "t,re,im")?;
    for (t, z) in times.iter().zip(points) {
        writeln!(out, "{t:.17e},{:.17e},{:.17e}", z.re, z.im)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZipperOptions {
    /// Largest capacity increment of a single step; longer steps are
    /// subdivided.
    pub max_dt: f64,
    /// Stop once the capacity reaches this value.
    pub t_max: f64,
    pub max_depth: u32,
}

impl Default for ZipperOptions {
    fn default() -> Self {
        ZipperOptions { max_dt: f64::INFINITY, t_max: f64::INFINITY, max_depth: 24 }
    }
}

enum Fit {
    Ok(SlitMap),
    TooBig,
    Leak,
    /// Radial curve reached the centre.
    Hit,
}

/// Incremental driving-function extraction. Curve points are fed in
/// order; each is mapped down by the chain so far and the slit step whose
/// tip hits the image is appended.
#[derive(Clone, Debug)]
pub struct Zipper {
    chain: ConformalChain,
    record: DrivingRecord,
    opts: ZipperOptions,
    last: Complex64,
    t: f64,
    rejected: usize,
    reached_centre: bool,
}

impl Zipper {
    /// `start` must be on the real line (chordal) or the unit circle
    /// (radial) within `1e-9`.
    pub fn new(mode: Mode, start: Complex64, opts: ZipperOptions) -> Result<Self> {
        let w0 = match mode {
            Mode::Chordal if start.im.abs() <= 1e-9 => start.re,
            Mode::Radial if (start.norm() - 1.0).abs() <= 1e-9 => start.im.atan2(start.re),
            _ => return invalid(format!("curve does not start on the boundary: {start}")),
        };
        Ok(Zipper {
            chain: ConformalChain::new(mode),
            record: DrivingRecord { mode, times: vec![0.0], values: vec![w0] },
            opts,
            last: start,
            t: 0.0,
            rejected: 0,
            reached_centre: false,
        })
    }

    pub fn capacity(&self) -> f64 {
        self.t
    }

    pub fn done(&self) -> bool {
        self.t >= self.opts.t_max || self.reached_centre
    }

    /// Points dropped because they mapped outside the domain.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn record(&self) -> &DrivingRecord {
        &self.record
    }

    pub fn chain(&self) -> &ConformalChain {
        &self.chain
    }

    pub fn into_parts(self) -> (DrivingRecord, ConformalChain) {
        (self.record, self.chain)
    }

    fn fit(&self, z: Complex64) -> Fit {
        let w = self.chain.forward(z);
        if !w.is_finite() {
            return Fit::Leak;
        }
        match self.chain.mode {
            Mode::Chordal => {
                if !(w.im > 0.0) {
                    return Fit::Leak;
                }
                let dt = 0.25 * w.im * w.im;
                if dt > self.opts.max_dt {
                    return Fit::TooBig;
                }
                Fit::Ok(SlitMap { mode: Mode::Chordal, drive: w.re, dt })
            }
            Mode::Radial => {
                let r = w.norm();
                if !(r < 1.0) {
                    return Fit::Leak;
                }
                if r == 0.0 {
                    return Fit::Hit;
                }
                let dt = ((1.0 - r) * (1.0 - r) / (4.0 * r)).ln_1p();
                if dt > self.opts.max_dt {
                    return Fit::TooBig;
                }
                if !(dt > 0.0) {
                    return Fit::Leak;
                }
                let prev = *self.record.values.last().unwrap();
                let theta = prev + (w.im.atan2(w.re) - prev + PI).rem_euclid(2.0 * PI) - PI;
                Fit::Ok(SlitMap { mode: Mode::Radial, drive: theta, dt })
            }
        }
    }

    fn accept(&mut self, z: Complex64, step: SlitMap) {
        self.t += step.dt;
        self.record.times.push(self.t);
        self.record.values.push(step.drive);
        self.chain.steps.push(step);
        self.last = z;
    }

    /// Feeds one curve point, subdividing the segment from the previous
    /// point if the step would be too large.
    pub fn push(&mut self, z: Complex64) -> Result<()> {
        self.push_linear(z, 0)
    }

    fn push_linear(&mut self, z: Complex64, depth: u32) -> Result<()> {
        if self.done() {
            return Ok(());
        }
        match self.fit(z) {
            Fit::Ok(step) => self.accept(z, step),
            Fit::TooBig if depth < self.opts.max_depth => {
                let m = 0.5 * (self.last + z);
                self.push_linear(m, depth + 1)?;
                self.push_linear(z, depth + 1)?;
            }
            Fit::TooBig => {
                return Err(Error::Leakage { index: self.chain.len() });
            }
            Fit::Leak => self.rejected += 1,
            Fit::Hit => self.reached_centre = true,
        }
        Ok(())
    }

    /// Feeds the last point of `pts`; the earlier points are the curve
    /// between the previous accepted point and it, used for refinement
    /// before falling back to linear subdivision.
    pub fn push_run(&mut self, pts: &[Complex64]) -> Result<()> {
        let Some(&z) = pts.last() else { return Ok(()) };
        if self.done() {
            return Ok(());
        }
        if pts.len() == 1 {
            return self.push_linear(z, 0);
        }
        match self.fit(z) {
            Fit::Ok(step) => {
                self.accept(z, step);
                Ok(())
            }
            Fit::Hit => {
                self.reached_centre = true;
                Ok(())
            }
            Fit::TooBig | Fit::Leak => {
                let mid = (pts.len() - 1) / 2;
                self.push_run(&pts[..=mid])?;
                self.push_run(&pts[mid + 1..])
            }
        }
    }
}

/// Runs the zipper over a whole curve.
pub fn extract_driving(curve: &[Complex64], mode: Mode, opts: ZipperOptions) -> Result<(DrivingRecord, ConformalChain)> {
    let (&start, rest) = curve.split_first().ok_or_else(|| Error::InvalidInput("empty curve".into()))?;
    let mut z = Zipper::new(mode, start, opts)?;
    for &p in rest {
        if z.done() {
            break;
        }
        z.push(p)?;
    }
    Ok(z.into_parts())
}

/// A sampled SLE trace: driving record and the tips `gamma(t_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SleTrace {
    pub kappa: f64,
    pub record: DrivingRecord,
    pub points: Vec<Complex64>,
}

impl SleTrace {
    /// Curve including its starting point on the boundary.
    pub fn curve(&self) -> Vec<Complex64> {
        let start = match self.record.mode {
            Mode::Chordal => Complex64::new(self.record.values[0], 0.0),
            Mode::Radial => Complex64::from_polar(1.0, self.record.values[0]),
        };
        std::iter::once(start).chain(self.points.iter().copied()).collect()
    }
}

/// Driving record of Brownian motion at speed `kappa`, piecewise constant
/// on steps of length `dt`, starting at 0.
pub fn brownian_record<R: Rng + ?Sized>(kappa: f64, mode: Mode, t_max: f64, dt: f64, rng: &mut R) -> Result<DrivingRecord> {
    if !(dt > 0.0) || !(t_max >= dt) || !(kappa >= 0.0) {
        return invalid("need dt > 0, T >= dt and kappa >= 0");
    }
    let n = (t_max / dt).round() as usize;
    let sd = (kappa * dt).sqrt();
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(0.0);
    values.push(0.0);
    let mut w = 0.0;
    for k in 1..=n {
        let g: f64 = rng.sample(StandardNormal);
        w += sd * g;
        times.push(k as f64 * dt);
        values.push(w);
    }
    Ok(DrivingRecord { mode, times, values })
}

/// SLE(kappa) trace with piecewise-constant Brownian driving.
pub fn sle_trace<R: Rng + ?Sized>(kappa: f64, mode: Mode, t_max: f64, dt: f64, rng: &mut R) -> Result<SleTrace> {
    let record = brownian_record(kappa, mode, t_max, dt, rng)?;
    let points = record.chain()?.tips();
    Ok(SleTrace { kappa, record, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamRatio {
    pub t: f64,
    pub diam: f64,
    pub k: f64,
    pub ratio: f64,
}

/// Hull diameter against `k(t) = sqrt(t) + max |W(s) - W(0)|` at every
/// step of the record. The hull diameter is estimated from the tips and
/// the starting point.
pub fn diam_vs_k_check(record: &DrivingRecord) -> Result<Vec<DiamRatio>> {
    let chain = record.chain()?;
    let tips = chain.tips();
    let start = match record.mode {
        Mode::Chordal => Complex64::new(record.values[0], 0.0),
        Mode::Radial => Complex64::from_polar(1.0, record.values[0]),
    };
    let mut pts = vec![start];
    let mut out = Vec::with_capacity(tips.len());
    let mut diam: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for (k, &p) in tips.iter().enumerate() {
        diam = pts.iter().map(|q| (p - q).norm()).fold(diam, f64::max);
        pts.push(p);
        dev = dev.max((record.values[k + 1] - record.values[0]).abs());
        let t = record.times[k + 1];
        let kk = t.sqrt() + dev;
        out.push(DiamRatio { t, diam, k: kk, ratio: diam / kk });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn csqrt_matches_principal() {
        for &(re, im) in &[(1.0, 0.0), (-1.0, 1e-300), (-4.0, -0.0), (3.0, -4.0), (-2.0, 5.0), (0.0, 2.0)] {
            let z = c(re, im);
            assert!((csqrt(z) - z.sqrt()).norm() < 1e-14, "{z}");
        }
    }

    #[test]
    fn chordal_examples() {
        let s = chordal_slit_step(0.0, 1.0).unwrap();
        assert!(s.apply(c(0.0, 2.0)).norm() < 1e-15);
        let z = c(30.0, 40.0);
        let laurent = z + 2.0 / z - 2.0 / (z * z * z);
        assert!((s.apply(z) - laurent).norm() < 5.0 / z.norm().powi(5));
        assert!(chordal_slit_step(0.0, 0.0).is_err());
        // Real points outside the slit base stay on their side.
        assert!((s.apply(c(3.0, 0.0)) - c(13f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((s.apply(c(-3.0, 0.0)) + c(13f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn slit_capacity() {
        let h = 0.7;
        let s = chordal_slit_step(0.0, h * h / 4.0).unwrap();
        assert!((s.tip() - c(0.0, h)).norm() < 1e-15);
        assert!(s.apply(c(0.0, h)).norm() < 1e-7);
    }

    #[test]
    fn radial_closed_form_matches_flow() {
        for &(theta, dt) in &[(0.0, 0.1), (1.3, 0.02), (-2.0, 0.5)] {
            let s = radial_slit_step(theta, dt).unwrap();
            let f = radial_step(theta, dt, 4000).unwrap();
            for z in [c(0.0, 0.0), c(0.3, 0.1), c(-0.5, -0.4), c(0.1, 0.8)] {
                let a = s.apply(z);
                let b = f.apply(z).unwrap();
                assert!((a - b).norm() < 1e-9, "{theta} {dt} {z}: {a} vs {b}");
                assert!((s.inverse(a) - z).norm() < 1e-9);
            }
            let e = 1e-6;
            let deriv = (s.apply(c(e, 0.0)) - s.apply(c(-e, 0.0))) / (2.0 * e);
            assert!((deriv - Complex64::from_polar(dt.exp(), 0.0)).norm() < 1e-8);
            assert!((s.apply(s.tip()) - s.driving_point()).norm() < 1e-6);
        }
    }

    #[test]
    fn radial_flow_examples() {
        let f = radial_step(0.4, 0.1, 100).unwrap();
        assert!((f.derivative_at_origin() - 0.1f64.exp()).abs() < 1e-8);
        assert_eq!(f.apply(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let tiny = radial_step(0.4, 1e-6, 1).unwrap();
        let z = c(0.2, -0.3);
        assert!((tiny.apply(z).unwrap() - z).norm() < 1e-5);
        // A point on the far side of the diameter moves away from W.
        let e = Complex64::from_polar(1.0, 0.4);
        let v = f.velocity(-0.5 * e);
        assert!((v / -e).im.abs() < 1e-12 && (v / -e).re > 0.0);
        assert!(radial_step(0.0, 0.1, 0).is_err());
        let hit = radial_step(0.0, 1.0, 1000).unwrap().apply(c(0.999_999_999_9, 0.0));
        assert!(hit.is_err());
    }

    #[test]
    fn vertical_slit_extraction() {
        let ts: Vec<f64> = (0..=200).map(|k| k as f64 * 0.005).collect();
        let curve: Vec<Complex64> = ts.iter().map(|&t| c(0.0, 2.0 * t.sqrt())).collect();
        let (rec, chain) = extract_driving(&curve, Mode::Chordal, ZipperOptions::default()).unwrap();
        rec.validate().unwrap();
        for (k, (&t, &w)) in rec.times.iter().zip(&rec.values).enumerate() {
            assert!(w.abs() < 1e-6);
            assert!((t - ts[k]).abs() < 1e-6);
        }
        assert!((chain.capacity() - 1.0).abs() < 1e-9);
        let big = c(0.0, 1e6);
        let g = chain.forward(big);
        let want = big + 2.0 / big;
        assert!((g - want).norm() / want.norm() < 1e-9);
        // Scaling covariance.
        let scaled: Vec<Complex64> = curve.iter().map(|z| z * 3.0).collect();
        let (rs, _) = extract_driving(&scaled, Mode::Chordal, ZipperOptions::default()).unwrap();
        for (a, b) in rs.times.iter().zip(&rec.times) {
            assert!((a - 9.0 * b).abs() < 1e-6);
        }
    }

    #[test]
    fn chordal_roundtrip() {
        let mut rng = RngKey::new(11).rng();
        let rec = brownian_record(3.0, Mode::Chordal, 1.0, 0.01, &mut rng).unwrap();
        assert_eq!(rec.times.len(), 101);
        let tips = rec.chain().unwrap().tips();
        let curve: Vec<Complex64> = std::iter::once(c(0.0, 0.0)).chain(tips).collect();
        let (back, _) = extract_driving(&curve, Mode::Chordal, ZipperOptions::default()).unwrap();
        assert_eq!(back.times.len(), rec.times.len());
        for k in 0..rec.times.len() {
            assert!((back.values[k] - rec.values[k]).abs() < 1e-6);
            assert!((back.times[k] - rec.times[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn radial_roundtrip_and_straight_segment() {
        let mut rng = RngKey::new(5).rng();
        let rec = brownian_record(2.0, Mode::Radial, 0.5, 0.01, &mut rng).unwrap();
        let tips = rec.chain().unwrap().tips();
        let curve: Vec<Complex64> = std::iter::once(c(1.0, 0.0)).chain(tips).collect();
        let (back, _) = extract_driving(&curve, Mode::Radial, ZipperOptions::default()).unwrap();
        for k in 0..rec.times.len() {
            assert!((back.values[k] - rec.values[k]).abs() < 1e-6, "{k}");
            assert!((back.times[k] - rec.times[k]).abs() < 1e-6);
        }
        let theta = 2.5;
        let seg: Vec<Complex64> = (0..50).map(|k| Complex64::from_polar(1.0 - k as f64 * 0.01, theta)).collect();
        let (r, chain) = extract_driving(&seg, Mode::Radial, ZipperOptions::default()).unwrap();
        assert!(r.values.iter().all(|v| (v - theta).abs() < 1e-4));
        let e = 1e-6;
        let d = (chain.forward(c(e, 0.0)) - chain.forward(c(-e, 0.0))).norm() / (2.0 * e);
        assert!((d.ln() - chain.capacity()).abs() < 1e-7);
    }

    #[test]
    fn subdivision_caps_steps() {
        let curve = vec![c(0.0, 0.0), c(0.0, 1.0), c(0.5, 1.5)];
        let opts = ZipperOptions { max_dt: 0.01, ..Default::default() };
        let (rec, _) = extract_driving(&curve, Mode::Chordal, opts).unwrap();
        assert!(rec.times.windows(2).all(|w| w[1] - w[0] <= 0.01 + 1e-15));
        assert!(rec.times.len() > 25);
    }

    #[test]
    fn kappa_zero_trace() {
        let mut rng = RngKey::new(1).rng();
        let tr = sle_trace(0.0, Mode::Chordal, 1.0, 0.01, &mut rng).unwrap();
        for (t, z) in tr.record.times[1..].iter().zip(&tr.points) {
            assert!((z - c(0.0, 2.0 * t.sqrt())).norm() < 1e-6);
        }
    }

    #[test]
    fn diameter_ratios() {
        let rec = DrivingRecord {
            mode: Mode::Chordal,
            times: (0..=100).map(|k| k as f64 * 0.01).collect(),
            values: vec![0.0; 101],
        };
        for r in diam_vs_k_check(&rec).unwrap() {
            assert!((r.ratio - 2.0).abs() < 1e-6);
        }
        for cc in [1.0, 5.0] {
            let rec = DrivingRecord {
                mode: Mode::Chordal,
                times: (0..=100).map(|k| k as f64 * 0.01).collect(),
                values: (0..=100).map(|k| cc * k as f64 * 0.01).collect(),
            };
            for r in diam_vs_k_check(&rec).unwrap() {
                assert!(r.ratio > 1.0 / 20.0 && r.ratio < 20.0);
            }
        }
        let rec = DrivingRecord { mode: Mode::Radial, times: vec![0.0, 1e-4], values: vec![0.0, 0.0] };
        let r = diam_vs_k_check(&rec).unwrap();
        assert!(r[0].ratio > 0.0 && r[0].ratio.is_finite());
    }
}
