//! Sorted-sample empirical distributions and their summaries.

use serde::Serialize;

use crate::error::{invalid, Result};

pub const RNG_ID: &str = "ChaCha8";

/// Empirical SINR distribution (linear scale), samples kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    #[serde(skip)]
    pub samples: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub rng: &'static str,
    pub scenario_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub p: f64,
    /// Binomial standard error √(p(1−p)/n).
    pub std_err: f64,
}

/// Density histogram in dB with the out-of-range mass kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges_db: Vec<f64>,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    /// (bin center dB, density per dB).
    pub fn density(&self) -> Vec<(f64, f64)> {
        let n = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (a, b) = (self.edges_db[i], self.edges_db[i + 1]);
                (0.5 * (a + b), c as f64 / (n * (b - a)))
            })
            .collect()
    }
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>, seed: u64, chunk_size: usize, scenario_hash: String) -> Self {
        samples.sort_by(f64::total_cmp);
        EmpiricalDistribution {
            n_samples: samples.len(),
            samples,
            seed,
            chunk_size,
            rng: RNG_ID,
            scenario_hash,
        }
    }

    /// Fraction of samples ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.n_samples as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n_samples as f64
    }

    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        ks_statistic(&self.samples, cdf)
    }

    /// KS distance against a smooth CDF evaluated only at `knots` points
    /// log-spaced over the sample range and interpolated linearly in log x
    /// in between. Suited to CDFs that are costly to evaluate.
    pub fn ks_distance_smooth(&self, cdf: impl Fn(f64) -> f64, knots: usize) -> f64 {
        let positive = &self.samples[self.samples.partition_point(|&s| s <= 0.0)..];
        let (Some(&lo), Some(&hi)) = (positive.first(), positive.last()) else {
            return self.ks_distance(cdf);
        };
        let knots = knots.max(2);
        let (a, b) = (lo.ln(), hi.ln().max(lo.ln() + 1e-12));
        let h = (b - a) / (knots - 1) as f64;
        let table: Vec<f64> = (0..knots).map(|i| cdf((a + h * i as f64).exp())).collect();
        let below = self.samples.len() - positive.len();
        let interp = |x: f64| -> f64 {
            if x <= 0.0 {
                return cdf(x);
            }
            let u = ((x.ln() - a) / h).clamp(0.0, (knots - 1) as f64);
            let i = (u.floor() as usize).min(knots - 2);
            let w = u - i as f64;
            table[i] * (1.0 - w) + table[i + 1] * w
        };
        if below == 0 {
            ks_statistic(&self.samples, interp)
        } else {
            ks_statistic(&self.samples, |x| if x <= 0.0 { cdf(x) } else { interp(x) })
        }
    }

    /// ECDF evaluated at dB abscissae.
    pub fn ecdf_db(&self, grid_db: &[f64]) -> Vec<f64> {
        grid_db
            .iter()
            .map(|&g| self.cdf(10f64.powf(g / 10.0)))
            .collect()
    }

    pub fn histogram_db(&self, edges_db: &[f64]) -> Result<Histogram> {
        if edges_db.len() < 2 || edges_db.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid(
                "histogram edges must be strictly increasing with at least two entries",
            );
        }
        let lin: Vec<f64> = edges_db.iter().map(|e| 10f64.powf(e / 10.0)).collect();
        let below = self.samples.partition_point(|&s| s < lin[0]);
        let mut counts = Vec::with_capacity(lin.len() - 1);
        let mut prev = below;
        for &edge in &lin[1..] {
            let idx = self.samples.partition_point(|&s| s < edge);
            counts.push((idx - prev) as u64);
            prev = idx;
        }
        Ok(Histogram {
            edges_db: edges_db.to_vec(),
            counts,
            below: below as u64,
            above: (self.n_samples - prev) as u64,
        })
    }
}

/// P(SINR ≤ γ₀) with its binomial standard error.
pub fn empirical_outage(dist: &EmpiricalDistribution, gamma0: f64) -> Result<OutageEstimate> {
    if !(gamma0 > 0.0) {
        return invalid(format!("outage threshold must be positive, got {gamma0}"));
    }
    let p = dist.cdf(gamma0);
    let n = dist.n_samples.max(1) as f64;
    Ok(OutageEstimate {
        p,
        std_err: (p * (1.0 - p) / n).sqrt(),
    })
}

/// Two-sided Kolmogorov-Smirnov statistic of sorted samples against a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic on sorted inputs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
