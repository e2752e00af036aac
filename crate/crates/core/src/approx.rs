//! The approximation chain for one OSTBC projection term S_m.
//!
//! S_m = |c_mᴴ g|²/‖H₀‖² factors into an exponential part |c_mᴴ g|²/‖c_m‖²
//! (rate n_L) and a beta part ‖c_m‖²/‖H₀‖² ~ Beta(n_R, n_R(n_T−1)). The
//! chain compares (a) the simulated term, (b) the product law assuming the
//! two parts independent and (c) the mean-matched exponential with rate
//! n_T·n_L.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::montecarlo::{
    ks_statistic, linalg::inner, random_precoder, run_chunks, ChannelDraw, DEFAULT_CHUNK, RNG_ID,
};
use crate::quad::{integrate, integrate_to_infinity};
use crate::special::ln_gamma_int;

const INNER_ABS: f64 = 1e-13;
const INNER_REL: f64 = 1e-12;

pub const DEFAULT_GRID_MAX: f64 = 3.0;
pub const DEFAULT_GRID_POINTS: usize = 300;

/// Exponential(rate n_L) times Beta(α, β).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProductDistribution {
    pub n_l: u32,
    pub alpha: u32,
    /// Zero when n_T = 1; the beta factor is then the point mass at one.
    pub beta: u32,
}

impl ProductDistribution {
    pub fn new(n_r: usize, n_t: usize, n_l: usize) -> Result<Self> {
        if n_r == 0 || n_t == 0 || n_l == 0 {
            return invalid("n_r, n_t and n_l must be at least 1");
        }
        Ok(ProductDistribution {
            n_l: n_l as u32,
            alpha: n_r as u32,
            beta: (n_r * (n_t - 1)) as u32,
        })
    }

    pub fn n_t(&self) -> u32 {
        1 + self.beta / self.alpha
    }

    fn ln_beta_norm(&self) -> f64 {
        ln_gamma_int(self.alpha + self.beta) - ln_gamma_int(self.alpha) - ln_gamma_int(self.beta)
    }

    fn beta_pdf(&self, t: f64, ln_norm: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        (ln_norm + (self.alpha - 1) as f64 * t.ln() + (self.beta - 1) as f64 * (1.0 - t).ln()).exp()
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        product_pdf(x, self)
    }

    /// P(E·B ≤ x) = ∫ (1 − e^{−n_L x/t}) f_B(t) dt.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let nl = self.n_l as f64;
        if self.beta == 0 {
            return Ok(-(-nl * x).exp_m1());
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let ln_norm = self.ln_beta_norm();
        let q = integrate(
            |t| -(-nl * x / t).exp_m1() * self.beta_pdf(t, ln_norm),
            0.0,
            1.0,
            INNER_ABS,
            INNER_REL,
        )?;
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// ∫ x f(x) dx by nested quadrature.
    pub fn mean(&self) -> Result<f64> {
        nested(|x| Ok(x * self.pdf(x)?))
    }

    /// ∫ f(x) dx by nested quadrature.
    pub fn total_mass(&self) -> Result<f64> {
        nested(|x| self.pdf(x))
    }
}

fn nested(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    let q = integrate_to_infinity(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        0.0,
        1e-13,
        1e-12,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return invalid(format!("x must be finite and nonnegative, got {x}"));
    }
    Ok(())
}

/// Density of the exponential-beta product at x via the mixing integral.
/// Returns +∞ at x = 0 when α = 1 and n_T > 1.
pub fn product_pdf(x: f64, pd: &ProductDistribution) -> Result<f64> {
    check_x(x)?;
    let nl = pd.n_l as f64;
    if pd.beta == 0 {
        return Ok(nl * (-nl * x).exp());
    }
    if x == 0.0 {
        // n_L · E[1/B]
        if pd.alpha == 1 {
            return Ok(f64::INFINITY);
        }
        return Ok(nl * (pd.alpha + pd.beta - 1) as f64 / (pd.alpha - 1) as f64);
    }
    let ln_norm = pd.ln_beta_norm();
    let q = integrate(
        |t| {
            if t <= 0.0 {
                0.0
            } else {
                nl * (-nl * x / t).exp() * pd.beta_pdf(t, ln_norm) / t
            }
        },
        0.0,
        1.0,
        1e-12,
        INNER_REL,
    )?;
    Ok(q.value)
}

/// n_T n_L e^{−n_T n_L x}.
pub fn exp_approx_pdf(x: f64, n_t: usize, n_l: usize) -> f64 {
    let r = (n_t * n_l) as f64;
    r * (-r * x).exp()
}

pub fn exp_approx_cdf(x: f64, n_t: usize, n_l: usize) -> f64 {
    -(-((n_t * n_l) as f64) * x).exp_m1()
}

/// ∫₀^∞ |f_product − f_exp| dx.
pub fn l1_product_vs_exp(pd: &ProductDistribution) -> Result<f64> {
    let (n_t, n_l) = (pd.n_t() as usize, pd.n_l as usize);
    nested(|x| Ok((product_pdf(x, pd)? - exp_approx_pdf(x, n_t, n_l)).abs()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainPoint {
    pub x: f64,
    pub exact: f64,
    pub meijer_equivalent: f64,
    pub exp_approx: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDistances {
    pub ks_exact_product: f64,
    pub ks_exact_exp: f64,
    pub ks_product_exp: f64,
    pub l1_exact_product: f64,
    pub l1_exact_exp: f64,
    pub l1_product_exp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub n_r: usize,
    pub n_t: usize,
    pub n_l: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub mean_exact: f64,
    pub mean_exact_std_err: f64,
    pub mean_product: f64,
    pub mean_exp: f64,
    /// Sample correlation between the exponential and beta factors.
    pub factor_correlation: f64,
    pub distances: ChainDistances,
    #[serde(skip)]
    pub curves: Vec<ChainPoint>,
}

/// Simulated (S_m, exponential factor, beta factor) for column m = 1.
pub fn simulate_projection_terms(
    n_r: usize,
    n_t: usize,
    n_l: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    if n_l > n_t {
        return invalid(format!("n_l = {n_l} exceeds n_t = {n_t}"));
    }
    ProductDistribution::new(n_r, n_t, n_l)?;
    if n_samples == 0 {
        return invalid("sample count must be positive");
    }
    run_chunks(n_samples, seed, DEFAULT_CHUNK, |rng| {
        let ch = ChannelDraw::draw(n_r, n_t, 1, rng);
        let c = ch.h0.col(0);
        let v = random_precoder(n_t, n_l, rng);
        let g = ch.interferers[0].mul_vec(&v.col(0));
        let col: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let proj = inner(&c, &g).norm_sqr();
        let frob = ch.h0.frob_norm_sqr();
        Ok((proj / frob, proj / col, col / frob))
    })
}

/// Evenly spaced grid of `points` abscissae on [0, x_max].
pub fn chain_grid(x_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(x_max > 0.0 && x_max.is_finite()) || points < 2 {
        return invalid("grid needs a positive upper end and at least two points");
    }
    Ok((0..points)
        .map(|i| x_max * i as f64 / (points - 1) as f64)
        .collect())
}

fn count_between(sorted: &[f64], a: f64, b: f64) -> usize {
    sorted.partition_point(|&s| s < b) - sorted.partition_point(|&s| s < a)
}

/// Runs all three stages on a shared grid and reports their distances.
///
/// Distances involving the simulated stage are taken over the grid range:
/// KS as the largest ECDF gap at grid points and L1 by the midpoint rule
/// on the grid cells. The product-vs-exponential L1 covers [0, ∞).
pub fn compare_chain(
    n_r: usize,
    n_t: usize,
    n_l: usize,
    n_samples: usize,
    seed: u64,
    grid: &[f64],
) -> Result<ChainReport> {
    let pd = ProductDistribution::new(n_r, n_t, n_l)?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return invalid("grid must be increasing, nonnegative and have at least two points");
    }
    let draws = simulate_projection_terms(n_r, n_t, n_l, n_samples, seed)?;
    let n = draws.len() as f64;
    let mut s: Vec<f64> = draws.iter().map(|d| d.0).collect();
    s.sort_by(f64::total_cmp);

    let mean_exact = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|x| (x - mean_exact).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let (me, mb) = (
        draws.iter().map(|d| d.1).sum::<f64>() / n,
        draws.iter().map(|d| d.2).sum::<f64>() / n,
    );
    let (mut cov, mut ve, mut vb) = (0.0, 0.0, 0.0);
    for d in &draws {
        cov += (d.1 - me) * (d.2 - mb);
        ve += (d.1 - me).powi(2);
        vb += (d.2 - mb).powi(2);
    }
    let factor_correlation = if ve > 0.0 && vb > 0.0 {
        cov / (ve * vb).sqrt()
    } else {
        0.0
    };

    let step = |i: usize| {
        if i + 1 < grid.len() {
            grid[i + 1] - grid[i]
        } else {
            grid[i] - grid[i - 1]
        }
    };
    let mut curves = Vec::with_capacity(grid.len());
    for (i, &x) in grid.iter().enumerate() {
        let lo = if i == 0 {
            x
        } else {
            x - 0.5 * (x - grid[i - 1])
        };
        let hi = x + 0.5 * step(i);
        curves.push(ChainPoint {
            x,
            exact: count_between(&s, lo, hi) as f64 / (n * (hi - lo)),
            meijer_equivalent: product_pdf(x, &pd)?,
            exp_approx: exp_approx_pdf(x, n_t, n_l),
        });
    }

    let (mut ks_ab, mut ks_bc) = (0.0f64, 0.0f64);
    for &x in grid {
        let e = s.partition_point(|&v| v <= x) as f64 / n;
        let fb = pd.cdf(x)?;
        ks_ab = ks_ab.max((e - fb).abs());
        ks_bc = ks_bc.max((fb - exp_approx_cdf(x, n_t, n_l)).abs());
    }
    let (mut l1_ab, mut l1_ac) = (0.0, 0.0);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = count_between(&s, a, b) as f64 / (n * (b - a));
        let mid = 0.5 * (a + b);
        l1_ab += (h - product_pdf(mid, &pd)?).abs() * (b - a);
        l1_ac += (h - exp_approx_pdf(mid, n_t, n_l)).abs() * (b - a);
    }

    Ok(ChainReport {
        n_r,
        n_t,
        n_l,
        n_samples,
        seed,
        rng: RNG_ID,
        mean_exact,
        mean_exact_std_err: (var / n).sqrt(),
        mean_product: pd.mean()?,
        mean_exp: 1.0 / (n_t * n_l) as f64,
        factor_correlation,
        distances: ChainDistances {
            ks_exact_product: ks_ab,
            ks_exact_exp: ks_statistic(&s, |x| exp_approx_cdf(x, n_t, n_l)),
            ks_product_exp: ks_bc,
            l1_exact_product: l1_ab,
            l1_exact_exp: l1_ac,
            l1_product_exp: l1_product_vs_exp(&pd)?,
        },
        curves,
    })
}
