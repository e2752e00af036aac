//! Interference-rank gains and the parameter sweeps built on them.
//!
//! The γ₀ gain at target outage p★ is 10·log10(γ₀(rank r)/γ₀(rank 1)): the
//! horizontal distance in dB between the two outage-vs-threshold curves.

use serde::{Deserialize, Serialize};

use crate::closed_form::{analytic_model, threshold_at_outage};
use crate::error::{invalid, Result};
use crate::scenario::{linear_to_db, InterfererSpec, ScenarioConfig, Technique};

pub const DEFAULT_TARGET_OUTAGE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Threshold,
    Snr,
    Inr,
    NumInterferers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGrid {
    Db { start: f64, stop: f64, step: f64 },
    Counts(Vec<usize>),
}

impl SweepGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            SweepGrid::Db { start, stop, step } => {
                crate::closed_form::db_grid(*start, *stop, *step)
            }
            SweepGrid::Counts(c) => {
                if c.is_empty() || c.contains(&0) || c.windows(2).any(|w| w[1] <= w[0]) {
                    return invalid("interferer counts must be positive and strictly increasing");
                }
                Ok(c.iter().map(|&k| k as f64).collect())
            }
        }
    }
}

/// A sweep over one parameter with everything else held at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: SweepGrid,
    pub base: ScenarioConfig,
    /// Interference rank compared against rank 1.
    pub rank: usize,
    pub target_outage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainPoint {
    pub x: f64,
    pub gamma0_rank1_db: f64,
    pub gamma0_rank_db: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub gamma0_db: f64,
    pub outage_rank1: f64,
    pub outage_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepOutput {
    Threshold(Vec<ThresholdPoint>),
    Gain(Vec<GainPoint>),
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check_target(self.target_outage)?;
        let points = self.grid.points()?;
        if points.is_empty() {
            return invalid("sweep grid is empty");
        }
        match (self.kind, &self.grid) {
            (SweepKind::NumInterferers, SweepGrid::Db { .. }) => {
                invalid("interferer-count sweeps take a list of counts")
            }
            (SweepKind::NumInterferers, _) => Ok(()),
            (_, SweepGrid::Counts(_)) => invalid("this sweep takes a dB grid"),
            _ => with_interference_rank(&self.base, self.rank).map(|_| ()),
        }
    }

    pub fn run(&self) -> Result<SweepOutput> {
        self.validate()?;
        let xs = self.grid.points()?;
        let (base, rank, p) = (&self.base, self.rank, self.target_outage);
        Ok(match self.kind {
            SweepKind::Threshold => SweepOutput::Threshold(threshold_sweep(base, rank, &xs)?),
            SweepKind::Snr => SweepOutput::Gain(sweep_snr(base, rank, p, &xs)?),
            SweepKind::Inr => SweepOutput::Gain(sweep_inr(base, rank, p, &xs)?),
            SweepKind::NumInterferers => {
                let counts: Vec<usize> = xs.iter().map(|&k| k as usize).collect();
                let total = total_inr_db(base)?;
                SweepOutput::Gain(sweep_num_interferers(base, rank, p, total, &counts)?)
            }
        })
    }
}

fn check_target(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("target outage must lie in (0, 1), got {p}"));
    }
    Ok(())
}

/// Total interference power of `cfg` in dB relative to the noise.
pub fn total_inr_db(cfg: &ScenarioConfig) -> Result<f64> {
    if cfg.interferers.is_empty() {
        return invalid("scenario has no interferers");
    }
    let total: f64 = cfg.interferer_powers().iter().sum::<f64>() / cfg.noise_power;
    linear_to_db(total)
}

/// Every interferer retuned to rank `rank`: beamforming for rank 1,
/// spatial multiplexing with `rank` layers otherwise. Powers are kept.
pub fn with_interference_rank(cfg: &ScenarioConfig, rank: usize) -> Result<ScenarioConfig> {
    if cfg.interferers.is_empty() {
        return invalid("rank comparison needs at least one interferer");
    }
    let mut out = cfg.clone();
    for itf in &mut out.interferers {
        *itf = if rank == 1 {
            InterfererSpec::beamforming(itf.inr_db)
        } else {
            InterfererSpec {
                technique: Technique::SpatialMultiplexing,
                layers: rank,
                inr_db: itf.inr_db,
            }
        };
    }
    out.validate()?;
    Ok(out)
}

/// γ₀ at outage `p` for rank 1 and rank `rank` interference, and their gap.
pub fn rank_gain(cfg: &ScenarioConfig, rank: usize, p: f64, x: f64) -> Result<GainPoint> {
    check_target(p)?;
    let low = threshold_at_outage(
        analytic_model(&with_interference_rank(cfg, 1)?)?.as_ref(),
        p,
    )?;
    let high = threshold_at_outage(
        analytic_model(&with_interference_rank(cfg, rank)?)?.as_ref(),
        p,
    )?;
    let (a, b) = (linear_to_db(low)?, linear_to_db(high)?);
    Ok(GainPoint {
        x,
        gamma0_rank1_db: a,
        gamma0_rank_db: b,
        gain_db: b - a,
    })
}

pub fn sweep_snr(
    base: &ScenarioConfig,
    rank: usize,
    p: f64,
    snrs_db: &[f64],
) -> Result<Vec<GainPoint>> {
    snrs_db
        .iter()
        .map(|&snr| {
            let mut cfg = base.clone();
            cfg.snr_db = snr;
            rank_gain(&cfg, rank, p, snr)
        })
        .collect()
}

/// Sets every interferer to the same INR; meant for single-interferer scenarios.
pub fn sweep_inr(
    base: &ScenarioConfig,
    rank: usize,
    p: f64,
    inrs_db: &[f64],
) -> Result<Vec<GainPoint>> {
    inrs_db
        .iter()
        .map(|&inr| {
            let mut cfg = base.clone();
            cfg.interferers.iter_mut().for_each(|i| i.inr_db = inr);
            rank_gain(&cfg, rank, p, inr)
        })
        .collect()
}

/// k equal-power interferers sharing a fixed total INR.
pub fn split_interference(
    base: &ScenarioConfig,
    total_inr_db: f64,
    k: usize,
) -> Result<ScenarioConfig> {
    if k == 0 {
        return invalid("interferer count must be positive");
    }
    let template = base
        .interferers
        .first()
        .cloned()
        .unwrap_or_else(|| InterfererSpec::beamforming(0.0));
    let each = total_inr_db - linear_to_db(k as f64)?;
    let mut cfg = base.clone();
    cfg.interferers = vec![
        InterfererSpec {
            inr_db: each,
            ..template
        };
        k
    ];
    Ok(cfg)
}

pub fn sweep_num_interferers(
    base: &ScenarioConfig,
    rank: usize,
    p: f64,
    total_inr_db: f64,
    counts: &[usize],
) -> Result<Vec<GainPoint>> {
    counts
        .iter()
        .map(|&k| {
            rank_gain(
                &split_interference(base, total_inr_db, k)?,
                rank,
                p,
                k as f64,
            )
        })
        .collect()
}

/// Outage of the rank-1 and rank-`rank` variants on a γ₀ grid (dB).
pub fn threshold_sweep(
    base: &ScenarioConfig,
    rank: usize,
    gamma0_db: &[f64],
) -> Result<Vec<ThresholdPoint>> {
    let m1 = analytic_model(&with_interference_rank(base, 1)?)?;
    let mr = analytic_model(&with_interference_rank(base, rank)?)?;
    gamma0_db
        .iter()
        .map(|&g| {
            let lin = 10f64.powf(g / 10.0);
            Ok(ThresholdPoint {
                gamma0_db: g,
                outage_rank1: m1.outage(lin)?,
                outage_rank: mr.outage(lin)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub gamma0_db: f64,
    pub outage: f64,
}

/// Outage differences at or below this size carry no reliable sign.
const CROSSING_RESOLUTION: f64 = 1e-9;

/// First threshold in [lo_db, hi_db] where the rank-1 and rank-`rank` outage
/// curves meet, located by a 0.25 dB scan and bisection. Stretches where the
/// curves agree to within round-off are skipped.
pub fn outage_crossing(
    cfg: &ScenarioConfig,
    rank: usize,
    lo_db: f64,
    hi_db: f64,
) -> Result<Option<Crossing>> {
    let m1 = analytic_model(&with_interference_rank(cfg, 1)?)?;
    let mr = analytic_model(&with_interference_rank(cfg, rank)?)?;
    let diff = |db: f64| -> Result<f64> {
        let g = 10f64.powf(db / 10.0);
        Ok(mr.outage(g)? - m1.outage(g)?)
    };
    let grid = crate::closed_form::db_grid(lo_db, hi_db, 0.25)?;
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let d = diff(x)?;
        if d.abs() <= CROSSING_RESOLUTION {
            continue;
        }
        let Some(prev) = prev.replace((x, d)) else {
            continue;
        };
        if (prev.1 < 0.0) != (d < 0.0) {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if (diff(mid)? < 0.0) == (fa < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let at = 0.5 * (a + b);
            let outage = m1.outage(10f64.powf(at / 10.0))?;
            return Ok(Some(Crossing {
                gamma0_db: at,
                outage,
            }));
        }
    }
    Ok(None)
}
