//! OSTBC receiver under the exponential approximation of the per-slot
//! interference projections.
//!
//! X = P₀‖H₀‖²_F/(n_T²σ²) is Γ(n_R n_T, ρ̄) exactly; Y is approximated by
//! n_T·n_L exponential terms per interferer. Multi-group sums use the
//! per-group scale ρ_i in the interference factor.

use crate::error::{invalid, Result};
use crate::mixture::MixtureSpec;
use crate::scenario::{
    build_rate_set, db_to_linear, own_numerator_scale, OwnMode, ScenarioConfig, Warning,
};
use crate::special::{gamma_p_int, gamma_pdf, NeumaierSum};

use super::kernel::{pdf_scale_form, tails_scale_form};
use super::{check_gamma, check_threshold, SinrModel, TailSum};

#[derive(Debug, Clone)]
pub struct OstbcAnalytic {
    /// Numerator gamma shape n_R·n_T.
    pub shape: u32,
    /// Numerator scale P₀/(n_T²σ²).
    pub rho_bar: f64,
    pub mixture: Option<MixtureSpec>,
    pub warnings: Vec<Warning>,
}

impl OstbcAnalytic {
    pub fn new(shape: u32, rho_bar: f64, mixture: Option<MixtureSpec>) -> Result<Self> {
        if shape < 1 {
            return invalid("numerator shape must be at least 1");
        }
        if !(rho_bar > 0.0 && rho_bar.is_finite()) {
            return invalid(format!("numerator scale must be positive, got {rho_bar}"));
        }
        let warnings = mixture.as_ref().map(|m| m.warnings()).unwrap_or_default();
        Ok(OstbcAnalytic {
            shape,
            rho_bar,
            mixture,
            warnings,
        })
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.own_mode != OwnMode::Ostbc {
            return invalid("OSTBC analysis requires own_mode = ostbc");
        }
        let rates = build_rate_set(cfg)?;
        let mixture = if rates.is_empty() {
            None
        } else {
            Some(MixtureSpec::from_rates(&rates)?)
        };
        let mut model = Self::new(
            (cfg.n_r * cfg.n_t) as u32,
            own_numerator_scale(cfg)?,
            mixture,
        )?;
        model.warnings.extend(cfg.warnings());
        Ok(model)
    }
}

impl SinrModel for OstbcAnalytic {
    fn sinr_pdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        let Some(mix) = &self.mixture else {
            return Ok(gamma_pdf(gamma, self.shape, self.rho_bar));
        };
        if let [g] = mix.groups.as_slice() {
            return Ok(pdf_scale_form(
                gamma,
                self.shape,
                self.rho_bar,
                g.multiplicity,
                g.rate,
            ));
        }
        let s: NeumaierSum = mix
            .coefficients()
            .map(|(i, j, xi)| {
                xi * pdf_scale_form(gamma, self.shape, self.rho_bar, j, mix.groups[i - 1].rate)
            })
            .collect();
        Ok(s.value().max(0.0))
    }

    fn outage(&self, gamma0: f64) -> Result<f64> {
        check_threshold(gamma0)?;
        let Some(mix) = &self.mixture else {
            return Ok(gamma_p_int(self.shape, gamma0 / self.rho_bar));
        };
        let mut sum = TailSum::default();
        if let [g] = mix.groups.as_slice() {
            sum.add(
                1.0,
                tails_scale_form(gamma0, self.shape, self.rho_bar, g.multiplicity, g.rate),
            );
        } else {
            for (i, j, xi) in mix.coefficients() {
                sum.add(
                    xi,
                    tails_scale_form(gamma0, self.shape, self.rho_bar, j, mix.groups[i - 1].rate),
                );
            }
        }
        sum.outage()
    }

    fn warnings(&self) -> Vec<Warning> {
        self.warnings.clone()
    }
}

/// OSTBC reception when the interference power is spread as white noise.
#[derive(Debug, Clone, Copy)]
pub struct WhiteInterferenceOstbc {
    pub shape: u32,
    pub scale: f64,
}

impl WhiteInterferenceOstbc {
    /// Numerator Γ(n_R n_T, P₀/(n_T²σ²(1 + INR))) with the total INR in dB.
    pub fn new(n_r: usize, n_t: usize, snr_db: f64, inr_db: f64) -> Result<Self> {
        if n_r == 0 || n_t == 0 {
            return invalid("antenna counts must be at least 1");
        }
        let scale = db_to_linear(snr_db)? / ((n_t * n_t) as f64 * (1.0 + db_to_linear(inr_db)?));
        Ok(WhiteInterferenceOstbc {
            shape: (n_r * n_t) as u32,
            scale,
        })
    }
}

impl SinrModel for WhiteInterferenceOstbc {
    fn sinr_pdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        Ok(gamma_pdf(gamma, self.shape, self.scale))
    }

    fn outage(&self, gamma0: f64) -> Result<f64> {
        check_threshold(gamma0)?;
        Ok(gamma_p_int(self.shape, gamma0 / self.scale))
    }
}

pub fn sinr_pdf_ostbc(gamma: f64, model: &OstbcAnalytic) -> Result<f64> {
    model.sinr_pdf(gamma)
}

pub fn outage_ostbc(gamma0: f64, model: &OstbcAnalytic) -> Result<f64> {
    model.outage(gamma0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{threshold_at_outage, BfAnalytic};
    use crate::mixture::{xi_coefficients, RateGroup, RateGroups};
    use crate::quad::{integrate, integrate_to_infinity};
    use crate::scenario::InterfererSpec;
    use crate::special::gamma_pdf;

    fn reference() -> OstbcAnalytic {
        OstbcAnalytic::from_config(&ScenarioConfig::reference(OwnMode::Ostbc)).unwrap()
    }

    #[test]
    fn noise_only_single_antenna() {
        let m =
            OstbcAnalytic::from_config(&ScenarioConfig::new(1, 1, 0.0, OwnMode::Ostbc)).unwrap();
        for &g in &[0.0, 0.5, 2.0] {
            assert!((m.sinr_pdf(g).unwrap() - (-g as f64).exp()).abs() < 1e-15);
        }
        let p = 0.3;
        let t = threshold_at_outage(&m, p).unwrap();
        assert!((t + (1.0 - p as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn limits_and_normalization() {
        let m = reference();
        assert!(m.outage(1e-9).unwrap() < 1e-12);
        assert!(m.outage(1e9).unwrap() > 1.0 - 1e-9);
        let q = integrate_to_infinity(|g| m.sinr_pdf(g).unwrap(), 0.0, 1e-12, 1e-10).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn outage_is_integrated_density() {
        let m = reference();
        for db in [-3.0, 0.0, 5.0, 10.0] {
            let g0 = 10f64.powf(db / 10.0);
            let q = integrate(|g| m.sinr_pdf(g).unwrap(), 0.0, g0, 1e-13, 1e-12).unwrap();
            assert!((q.value - m.outage(g0).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn density_matches_convolution_oracle() {
        // Direct quadrature of the ratio density against the mixture pdf of Y. The
        // variant that keeps ρ_1 in every group term is checked to disagree.
        let m = reference();
        let mix = m.mixture.as_ref().unwrap();
        assert!(mix.num_groups() > 1);
        let rho1 = mix.groups[0].rate;
        for &g in &[0.3, 2.0, 8.0] {
            let oracle = integrate_to_infinity(
                |y| (y + 1.0) * gamma_pdf((y + 1.0) * g, m.shape, m.rho_bar) * mix.pdf(y).unwrap(),
                0.0,
                1e-14,
                1e-11,
            )
            .unwrap()
            .value;
            let got = m.sinr_pdf(g).unwrap();
            assert!(
                (got - oracle).abs() < 1e-8 * oracle.max(1e-3),
                "{got} vs {oracle}"
            );
            let literal: f64 = mix
                .coefficients()
                .map(|(_, j, xi)| xi * super::pdf_scale_form(g, m.shape, m.rho_bar, j, rho1))
                .sum();
            assert!(
                (literal - oracle).abs() > 1e-3 * oracle,
                "{literal} vs {oracle}"
            );
        }
    }

    #[test]
    fn epsilon_split_matches_single_group() {
        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Ostbc)
            .with_interferer(InterfererSpec::beamforming(10.0));
        let single = OstbcAnalytic::from_config(&cfg).unwrap();
        let g = single.mixture.as_ref().unwrap().groups[0];
        assert_eq!(g.multiplicity, 2);
        let eps = 1e-6;
        let split = xi_coefficients(&RateGroups {
            groups: vec![
                RateGroup {
                    rate: g.rate * (1.0 + eps),
                    multiplicity: 1,
                },
                RateGroup {
                    rate: g.rate * (1.0 - eps),
                    multiplicity: 1,
                },
            ],
        })
        .unwrap();
        let general = OstbcAnalytic::new(single.shape, single.rho_bar, Some(split)).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=300 {
            let gamma = 10f64.powf((-10.0 + 0.1 * i as f64) / 10.0);
            worst = worst
                .max((single.sinr_pdf(gamma).unwrap() - general.sinr_pdf(gamma).unwrap()).abs());
            worst =
                worst.max((single.outage(gamma).unwrap() - general.outage(gamma).unwrap()).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn ostbc_never_beats_beamforming() {
        let bf = BfAnalytic::from_config(&ScenarioConfig::reference(OwnMode::Beamforming)).unwrap();
        let st = reference();
        for i in 0..=50 {
            let g0 = 10f64.powf((-5.0 + 0.5 * i as f64) / 10.0);
            assert!(st.outage(g0).unwrap() >= bf.outage(g0).unwrap() - 1e-12);
        }
    }

    #[test]
    fn white_interference() {
        let w = WhiteInterferenceOstbc::new(4, 4, 15.0, 10.0).unwrap();
        assert_eq!(w.shape, 16);
        assert!((w.scale - db_to_linear(15.0).unwrap() / (16.0 * 11.0)).abs() < 1e-12);
        let t = threshold_at_outage(&w, 0.01).unwrap();
        assert!((w.outage(t).unwrap() - 0.01).abs() < 1e-9);
    }
}
