//! Closed-form SINR densities and outage probabilities.

pub mod bf;
mod kernel;
pub mod ostbc;

pub use bf::BfAnalytic;
pub use ostbc::{OstbcAnalytic, WhiteInterferenceOstbc};

use crate::error::{invalid, Error, Result};
use crate::scenario::{OwnMode, ScenarioConfig, Warning};
use crate::special::NeumaierSum;

/// Round-off below this magnitude is clamped into [0, 1]; anything larger is an error.
pub const ROUND_OFF: f64 = 1e-12;

/// A receiver model with an analytic SINR distribution.
pub trait SinrModel: Sync {
    /// Density of the post-processing SINR at γ (linear).
    fn sinr_pdf(&self, gamma: f64) -> Result<f64>;

    /// P(SINR ≤ γ₀).
    fn outage(&self, gamma0: f64) -> Result<f64>;

    fn warnings(&self) -> Vec<Warning> {
        Vec::new()
    }
}

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if !(p >= -ROUND_OFF && p <= 1.0 + ROUND_OFF) {
        return Err(Error::NumericInstability(format!(
            "closed-form outage evaluated to {p:e}; the coefficient expansion is ill-conditioned"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Accumulates Σ w·P(lower) and Σ w·P(upper) over signed weights and
/// reports whichever side was summed without cancellation against one.
#[derive(Default)]
pub(crate) struct TailSum {
    lower: NeumaierSum,
    upper: NeumaierSum,
}

impl TailSum {
    pub(crate) fn add(&mut self, weight: f64, (lower, upper): (f64, f64)) {
        self.lower.add(weight * lower);
        self.upper.add(weight * upper);
    }

    pub(crate) fn outage(&self) -> Result<f64> {
        let lo = self.lower.value();
        check_probability(if lo <= 0.5 {
            lo
        } else {
            1.0 - self.upper.value()
        })
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return invalid(format!(
            "SINR argument must be finite and nonnegative, got {gamma}"
        ));
    }
    Ok(())
}

pub(crate) fn check_threshold(gamma0: f64) -> Result<()> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return invalid(format!("outage threshold must be positive, got {gamma0}"));
    }
    Ok(())
}

/// Relative bisection precision in γ₀.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;

/// Inverts a monotone outage curve: the γ₀ with outage(γ₀) = p_target.
pub fn threshold_at_outage<M: SinrModel + ?Sized>(model: &M, p_target: f64) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return invalid(format!("target outage must lie in (0, 1), got {p_target}"));
    }
    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while model.outage(lo)? >= p_target {
        lo /= 8.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::NumericInstability(format!(
                "cannot bracket outage {p_target} from below"
            )));
        }
    }
    while model.outage(hi)? < p_target {
        hi *= 8.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::NumericInstability(format!(
                "cannot bracket outage {p_target} from above"
            )));
        }
    }
    // Invariant: outage(lo) < p ≤ outage(hi).
    while (hi - lo) > THRESHOLD_REL_TOL * hi {
        let mid = (lo * hi).sqrt();
        let mid = if mid > lo && mid < hi {
            mid
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if model.outage(mid)? < p_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the analytic model matching the configured receiver.
pub fn analytic_model(cfg: &ScenarioConfig) -> Result<Box<dyn SinrModel>> {
    Ok(match cfg.own_mode {
        OwnMode::Beamforming => Box::new(BfAnalytic::from_config(cfg)?),
        OwnMode::Ostbc => Box::new(OstbcAnalytic::from_config(cfg)?),
    })
}

/// Points γ (dB) from `start` to `stop` inclusive with the given step.
pub fn db_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
        return invalid(format!("invalid grid {start}:{stop}:{step}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Default abscissa step for curve output, in dB.
pub const DEFAULT_GRID_STEP_DB: f64 = 0.1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid() {
        assert_eq!(db_grid(-5.0, 20.0, 0.5).unwrap().len(), 51);
        let g = db_grid(0.0, 1.0, DEFAULT_GRID_STEP_DB).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
        assert!(db_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn probability_guard() {
        assert_eq!(check_probability(-1e-13).unwrap(), 0.0);
        assert_eq!(check_probability(1.0 + 1e-13).unwrap(), 1.0);
        assert!(matches!(
            check_probability(-1e-6),
            Err(Error::NumericInstability(_))
        ));
        assert!(check_probability(f64::NAN).is_err());
    }
}
