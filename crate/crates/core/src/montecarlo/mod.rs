//! Monte Carlo simulation of the full link model.
//!
//! Every draw builds fresh Rayleigh channels, random interferer precoders and
//! symbols, applies the receiver and records the post-processing SINR.
//! Samples are produced in fixed-size chunks; chunk `c` uses a ChaCha8
//! stream seeded from `seed` with stream id `c`, so the result does not
//! depend on the number of worker threads.

pub mod empirical;
pub mod linalg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scenario::{OwnMode, ScenarioConfig, Technique};

pub use empirical::{
    empirical_outage, ks_statistic, ks_two_sample, EmpiricalDistribution, Histogram,
    OutageEstimate, RNG_ID,
};
use linalg::{complex_normal, inner, norm_sqr};
pub use linalg::{dominant_eigvec, haar_columns, CMat, C64};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_CHUNK: usize = 1 << 14;
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolModel {
    /// QPSK points on the unit circle.
    #[default]
    UnitModulus,
    /// CN(0, 1) symbols.
    Gaussian,
}

/// Receiver simulation for own OSTBC transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OstbcPath {
    /// Explicit Alamouti blocks and linear receive filter (n_T = 2 only).
    Alamouti,
    /// Projection terms onto the combining directions, any n_T.
    Component,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub chunk_size: usize,
    pub symbols: SymbolModel,
    /// `None` picks Alamouti for n_T = 2 and the component path otherwise.
    pub ostbc_path: Option<OstbcPath>,
    pub eig_tol: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            chunk_size: DEFAULT_CHUNK,
            symbols: SymbolModel::default(),
            ostbc_path: None,
            eig_tol: DEFAULT_EIG_TOL,
        }
    }
}

/// One realization of the own channel and all interferer channels.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    pub h0: CMat,
    pub interferers: Vec<CMat>,
}

impl ChannelDraw {
    pub fn draw<R: Rng + ?Sized>(
        n_r: usize,
        n_t: usize,
        n_interferers: usize,
        rng: &mut R,
    ) -> Self {
        let h0 = CMat::gaussian(n_r, n_t, rng);
        let interferers = (0..n_interferers)
            .map(|_| CMat::gaussian(n_r, n_t, rng))
            .collect();
        ChannelDraw { h0, interferers }
    }
}

fn symbol<R: Rng + ?Sized>(model: SymbolModel, rng: &mut R) -> C64 {
    match model {
        SymbolModel::UnitModulus => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            C64::new(
                if rng.random::<bool>() { h } else { -h },
                if rng.random::<bool>() { h } else { -h },
            )
        }
        SymbolModel::Gaussian => complex_normal(rng),
    }
}

/// Unit-Frobenius isotropic precoder: Haar columns scaled by 1/√n_L.
pub fn random_precoder<R: Rng + ?Sized>(n_t: usize, n_l: usize, rng: &mut R) -> CMat {
    let mut v = haar_columns(n_t, n_l, rng);
    v.scale(1.0 / (n_l as f64).sqrt());
    v
}

/// Columns of the per-layer equivalent channels g = H v_l.
fn layer_channels<R: Rng + ?Sized>(h: &CMat, n_l: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let v = random_precoder(h.cols, n_l, rng);
    (0..n_l).map(|l| h.mul_vec(&v.col(l))).collect()
}

struct Link<'a> {
    cfg: &'a ScenarioConfig,
    p0: f64,
    powers: Vec<f64>,
    sigma2: f64,
    opts: McOptions,
}

impl<'a> Link<'a> {
    fn new(cfg: &'a ScenarioConfig, opts: &McOptions) -> Result<Self> {
        cfg.validate()?;
        if opts.chunk_size == 0 {
            return invalid("chunk size must be positive");
        }
        Ok(Link {
            cfg,
            p0: cfg.own_power(),
            powers: cfg.interferer_powers(),
            sigma2: cfg.noise_power,
            opts: *opts,
        })
    }

    /// P₀λ² / (Σ P_i Σ_l |uᴴg_l|² + λσ²) with u = H₀w₀.
    fn bf_sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (n_r, n_t) = (self.cfg.n_r, self.cfg.n_t);
        let ch = ChannelDraw::draw(n_r, n_t, self.cfg.interferers.len(), rng);
        let (w0, _) = dominant_eigvec(&ch.h0.gram(), self.opts.eig_tol, rng)?;
        let u = ch.h0.mul_vec(&w0);
        let lambda = norm_sqr(&u);
        let mut interference = 0.0;
        for ((spec, h), p) in self
            .cfg
            .interferers
            .iter()
            .zip(&ch.interferers)
            .zip(&self.powers)
        {
            let term: f64 = match spec.technique {
                Technique::Beamforming | Technique::SpatialMultiplexing => {
                    layer_channels(h, spec.layers, rng)
                        .iter()
                        .map(|g| inner(&u, g).norm_sqr())
                        .sum()
                }
                Technique::Ostbc => {
                    // Unit-energy symbol vector d spread over n_T antennas, g = H d/√n_T.
                    let scale = 1.0 / n_t as f64;
                    let d: Vec<C64> = (0..n_t)
                        .map(|_| symbol(self.opts.symbols, rng) * scale)
                        .collect();
                    inner(&u, &h.mul_vec(&d)).norm_sqr()
                }
            };
            interference += p * term;
        }
        Ok(self.p0 * lambda * lambda / (interference + lambda * self.sigma2))
    }

    /// Symbol-1 SINR of an Alamouti link after the linear filter F = A₀ᴴ,
    /// with the filtered noise counted n_T times.
    fn alamouti_sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let n_r = self.cfg.n_r;
        let n_t = 2.0;
        let ch = ChannelDraw::draw(n_r, 2, self.cfg.interferers.len(), rng);
        let stack = |top: &[C64], bottom: &[C64]| -> Vec<C64> {
            top.iter().chain(bottom).copied().collect()
        };
        let conj = |v: &[C64]| -> Vec<C64> { v.iter().map(|z| z.conj()).collect() };
        let (h1, h2) = (ch.h0.col(0), ch.h0.col(1));
        // Effective channel of x₁ in [r⁽¹⁾; conj(r⁽²⁾)].
        let a0 = stack(&h1, &conj(&h2));
        let gain = norm_sqr(&a0);
        let zero = vec![C64::new(0.0, 0.0); n_r];
        let mut interference = 0.0;
        for ((spec, h), p) in self
            .cfg
            .interferers
            .iter()
            .zip(&ch.interferers)
            .zip(&self.powers)
        {
            match spec.technique {
                Technique::Beamforming | Technique::SpatialMultiplexing => {
                    for g in layer_channels(h, spec.layers, rng) {
                        let slot1 = stack(&g, &zero);
                        let slot2 = stack(&zero, &conj(&g));
                        interference +=
                            p * (inner(&a0, &slot1).norm_sqr() + inner(&a0, &slot2).norm_sqr());
                    }
                }
                Technique::Ostbc => {
                    let (c1, c2) = (h.col(0), h.col(1));
                    let z1 = stack(&c1, &conj(&c2));
                    let z2: Vec<C64> =
                        stack(&c2, &conj(&c1).iter().map(|z| -z).collect::<Vec<_>>());
                    interference +=
                        p / n_t * (inner(&a0, &z1).norm_sqr() + inner(&a0, &z2).norm_sqr());
                }
            }
        }
        let signal = self.p0 / n_t * gain * gain;
        Ok(signal / (interference + n_t * self.sigma2 * gain))
    }

    /// X/(Y+1) with X = P₀‖H₀‖²/(n_T²σ²) and Y built from the exact
    /// projections of each interferer onto the combining directions.
    fn component_sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (n_r, n_t) = (self.cfg.n_r, self.cfg.n_t);
        let ch = ChannelDraw::draw(n_r, n_t, self.cfg.interferers.len(), rng);
        let frob = ch.h0.frob_norm_sqr();
        let nt = n_t as f64;
        let x = self.p0 * frob / (nt * nt * self.sigma2);
        let cols: Vec<Vec<C64>> = (0..n_t).map(|m| ch.h0.col(m)).collect();
        let mut y = 0.0;
        for ((spec, h), p) in self
            .cfg
            .interferers
            .iter()
            .zip(&ch.interferers)
            .zip(&self.powers)
        {
            let term: f64 = match spec.technique {
                Technique::Beamforming | Technique::SpatialMultiplexing => {
                    layer_channels(h, spec.layers, rng)
                        .iter()
                        .map(|g| cols.iter().map(|c| inner(c, g).norm_sqr()).sum::<f64>())
                        .sum()
                }
                Technique::Ostbc => {
                    // One independent CN(0, ‖H₀‖²) term per code symbol.
                    let first = inner(&ch.h0.data, &h.data).norm_sqr();
                    let rest: f64 = (1..n_t)
                        .map(|_| inner(&ch.h0.data, &CMat::gaussian(n_r, n_t, rng).data).norm_sqr())
                        .sum();
                    (first + rest) / nt
                }
            };
            y += p / (nt * self.sigma2) * term / frob;
        }
        Ok(x / (y + 1.0))
    }
}

pub(crate) fn run_chunks<T: Send>(
    n_samples: usize,
    seed: u64,
    chunk_size: usize,
    draw: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let n_chunks = n_samples.div_ceil(chunk_size);
    let chunks: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = chunk_size.min(n_samples - c * chunk_size);
            (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return invalid("sample count must be positive");
    }
    Ok(())
}

/// Beamforming-receiver SINR samples.
pub fn simulate_bf_sinr(
    cfg: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    simulate_bf_sinr_with(cfg, n_samples, seed, &McOptions::default())
}

pub fn simulate_bf_sinr_with(
    cfg: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<EmpiricalDistribution> {
    let link = Link::new(cfg, opts)?;
    if cfg.own_mode != OwnMode::Beamforming {
        return invalid("beamforming simulation requires own_mode = bf");
    }
    check_samples(n_samples)?;
    let samples = run_chunks(n_samples, seed, opts.chunk_size, |rng| link.bf_sinr(rng))?;
    Ok(EmpiricalDistribution::new(
        samples,
        seed,
        opts.chunk_size,
        cfg.hash(),
    ))
}

/// OSTBC-receiver SINR samples.
pub fn simulate_ostbc_sinr(
    cfg: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    simulate_ostbc_sinr_with(cfg, n_samples, seed, &McOptions::default())
}

pub fn simulate_ostbc_sinr_with(
    cfg: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<EmpiricalDistribution> {
    let link = Link::new(cfg, opts)?;
    if cfg.own_mode != OwnMode::Ostbc {
        return invalid("OSTBC simulation requires own_mode = ostbc");
    }
    check_samples(n_samples)?;
    let path = opts.ostbc_path.unwrap_or(if cfg.n_t == 2 {
        OstbcPath::Alamouti
    } else {
        OstbcPath::Component
    });
    let samples = match path {
        OstbcPath::Alamouti => {
            if cfg.n_t != 2 {
                return invalid(format!("the Alamouti path needs n_t = 2, got {}", cfg.n_t));
            }
            run_chunks(n_samples, seed, opts.chunk_size, |rng| {
                link.alamouti_sinr(rng)
            })?
        }
        OstbcPath::Component => run_chunks(n_samples, seed, opts.chunk_size, |rng| {
            link.component_sinr(rng)
        })?,
    };
    Ok(EmpiricalDistribution::new(
        samples,
        seed,
        opts.chunk_size,
        cfg.hash(),
    ))
}

/// Dispatches on the configured own transmission mode.
pub fn simulate(
    cfg: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<EmpiricalDistribution> {
    match cfg.own_mode {
        OwnMode::Beamforming => simulate_bf_sinr_with(cfg, n_samples, seed, opts),
        OwnMode::Ostbc => simulate_ostbc_sinr_with(cfg, n_samples, seed, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_thread_independent() {
        let cfg = ScenarioConfig::reference(OwnMode::Beamforming);
        let opts = McOptions {
            chunk_size: 1000,
            ..Default::default()
        };
        let a = simulate_bf_sinr_with(&cfg, 5000, 3, &opts).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_bf_sinr_with(&cfg, 5000, 3, &opts).unwrap());
        assert_eq!(a, b);
        let c = simulate_bf_sinr_with(&cfg, 5000, 4, &opts).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn mode_mismatch_and_empty() {
        let bf = ScenarioConfig::reference(OwnMode::Beamforming);
        assert!(simulate_ostbc_sinr(&bf, 10, 0).is_err());
        assert!(simulate_bf_sinr(&bf, 0, 0).is_err());
        let st = ScenarioConfig::new(2, 4, 10.0, OwnMode::Ostbc);
        let opts = McOptions {
            ostbc_path: Some(OstbcPath::Alamouti),
            ..Default::default()
        };
        assert!(simulate_ostbc_sinr_with(&st, 10, 0, &opts).is_err());
    }

    #[test]
    fn alamouti_and_component_agree_per_draw_without_ostbc_interferers() {
        // Same random stream, same channels: the two receivers must coincide.
        let cfg = ScenarioConfig::new(2, 2, 12.0, OwnMode::Ostbc)
            .with_interferer(crate::scenario::InterfererSpec::spatial_multiplexing(
                2, 5.0,
            ))
            .with_interferer(crate::scenario::InterfererSpec::beamforming(3.0));
        let link = Link::new(&cfg, &McOptions::default()).unwrap();
        for s in 0..200 {
            let a = link
                .alamouti_sinr(&mut ChaCha8Rng::seed_from_u64(s))
                .unwrap();
            let b = link
                .component_sinr(&mut ChaCha8Rng::seed_from_u64(s))
                .unwrap();
            assert!((a - b).abs() < 1e-12 * a, "{a} vs {b}");
        }
    }
}
