//! Summary statistics and the goodness-of-fit tests used by the
//! verification suites.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Streaming mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn summary(&self) -> Summary {
        Summary { n: self.n, mean: self.mean, variance: self.variance(), stderr: self.stderr() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let mut a = Accumulator::default();
        xs.iter().for_each(|&x| a.push(x));
        a.summary()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi_square_p(stat: f64, dof: f64) -> f64 {
    if dof < 1.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Pearson chi-square test of observed counts against cell probabilities.
/// Cells with expected count below 5 are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> TestStatistic {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut po, mut pe) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e >= 5.0 {
            cells.push((o as f64, e));
        } else {
            po += o as f64;
            pe += e;
        }
    }
    if pe > 0.0 || po > 0.0 {
        if pe >= 5.0 || cells.is_empty() {
            cells.push((po, pe));
        } else {
            let k = (0..cells.len()).min_by(|&a, &b| cells[a].1.total_cmp(&cells[b].1)).unwrap();
            cells[k].0 += po;
            cells[k].1 += pe;
        }
    }
    let stat: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len() as f64 - 1.0;
    TestStatistic { statistic: stat, dof, p_value: chi_square_p(stat, dof) }
}

/// Chi-square test of independence for a contingency table given as rows
/// of counts. Columns with small totals are pooled so that the smallest
/// expected count is at least 5 where possible.
pub fn chi_square_independence(table: &[Vec<u64>]) -> TestStatistic {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    if rows.len() < 2 {
        return TestStatistic { statistic: 0.0, dof: 0.0, p_value: 1.0 };
    }
    let ncol = rows[0].len();
    let total: f64 = rows.iter().flat_map(|r| r.iter()).sum::<u64>() as f64;
    let row_tot: Vec<f64> = rows.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let min_row = row_tot.iter().cloned().fold(f64::INFINITY, f64::min);
    // Group columns so that min_row * col_total / total >= 5.
    let col_tot: Vec<f64> = (0..ncol).map(|j| rows.iter().map(|r| r[j] as f64).sum()).collect();
    let mut order: Vec<usize> = (0..ncol).filter(|&j| col_tot[j] > 0.0).collect();
    order.sort_by(|&a, &b| col_tot[b].total_cmp(&col_tot[a]));
    let need = 5.0 * total / min_row;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut pending_tot = 0.0;
    for j in order {
        if col_tot[j] >= need {
            groups.push(vec![j]);
        } else {
            pending.push(j);
            pending_tot += col_tot[j];
            if pending_tot >= need {
                groups.push(std::mem::take(&mut pending));
                pending_tot = 0.0;
            }
        }
    }
    if !pending.is_empty() {
        match groups.last_mut() {
            Some(g) => g.extend(pending),
            None => groups.push(pending),
        }
    }
    if groups.len() < 2 {
        return TestStatistic { statistic: 0.0, dof: 0.0, p_value: 1.0 };
    }
    let mut stat = 0.0;
    for (ri, r) in rows.iter().enumerate() {
        for g in &groups {
            let o: f64 = g.iter().map(|&j| r[j] as f64).sum();
            let ct: f64 = g.iter().map(|&j| col_tot[j]).sum();
            let e = row_tot[ri] * ct / total;
            stat += (o - e) * (o - e) / e;
        }
    }
    let dof = ((rows.len() - 1) * (groups.len() - 1)) as f64;
    TestStatistic { statistic: stat, dof, p_value: chi_square_p(stat, dof) }
}

/// Asymptotic Kolmogorov tail `P[K > x]`.
pub fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `N(mean, sd^2)`.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> TestStatistic {
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut d: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let f = norm.cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    let p = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
    TestStatistic { statistic: d, dof: n, p_value: p }
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided normal p-value for a z-score.
pub fn normal_two_sided(z: f64) -> f64 {
    2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn accumulator_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let s = Summary::of(&xs);
        let m = xs.iter().sum::<f64>() / 5.0;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0;
        assert!((s.mean - m).abs() < 1e-14);
        assert!((s.variance - v).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Standard table values.
        assert!((kolmogorov_tail(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_tail(1.63) - 0.0098).abs() < 1e-3);
        assert_eq!(kolmogorov_tail(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_normal_and_rejects_uniform() {
        let mut rng = RngKey::new(8).rng();
        let xs: Vec<f64> = (0..2000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(ks_normal(&xs, 0.0, 1.0).p_value > 0.001);
        let us: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 3.4 - 1.7).collect();
        assert!(ks_normal(&us, 0.0, 1.0).p_value < 0.001);
    }

    #[test]
    fn chi_square_gof_detects_bias() {
        let t = chi_square_gof(&[250, 250, 250, 250], &[0.25; 4]);
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_gof(&[400, 200, 200, 200], &[0.25; 4]);
        assert!(t.p_value < 1e-10);
        // 3 dof, statistic 7.815 is the 95% point.
        let t = chi_square_gof(&[100 + 28, 100 - 28, 100, 100], &[0.25; 4]);
        assert!((t.statistic - 15.68).abs() < 1e-9 && t.p_value < 0.05);
    }

    #[test]
    fn independence_test() {
        let t = chi_square_independence(&[vec![100, 200, 300], vec![50, 100, 150]]);
        assert!(t.statistic.abs() < 1e-12 && t.dof == 2.0);
        let t = chi_square_independence(&[vec![300, 100], vec![100, 300]]);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Pass.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fail), Fail);
        assert_eq!(Pass.and(Pass), Pass);
    }
}
