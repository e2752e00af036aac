//! Beamforming receiver: dominant-eigenvector precoding with MRC.
//!
//! X = ρ̄ λ_max follows the Wishart weight expansion, Y the interference
//! mixture; both are mixtures of gamma densities so the SINR density and
//! the outage probability are finite sums.

use crate::error::{invalid, Result};
use crate::mixture::MixtureSpec;
use crate::scenario::{build_rate_set, own_numerator_scale, OwnMode, ScenarioConfig, Warning};
use crate::special::NeumaierSum;
use crate::wishart::{compute_weights, EigenWeightTable};

use super::kernel::{
    pdf_kappa_form, pdf_scale_form, tails_kappa_form, tails_noise_only, tails_scale_form,
};
use super::{check_gamma, check_threshold, SinrModel, TailSum};

#[derive(Debug, Clone)]
pub struct BfAnalytic {
    pub table: EigenWeightTable,
    /// `None` when there is no interference.
    pub mixture: Option<MixtureSpec>,
    /// Long-term SNR P₀/σ².
    pub rho_bar: f64,
    /// κ_i = ρ̄/ρ_i per interference group.
    pub kappa: Vec<f64>,
}

impl BfAnalytic {
    pub fn new(
        table: EigenWeightTable,
        mixture: Option<MixtureSpec>,
        rho_bar: f64,
    ) -> Result<Self> {
        if !(rho_bar > 0.0 && rho_bar.is_finite()) {
            return invalid(format!("long-term SNR must be positive, got {rho_bar}"));
        }
        let kappa = mixture
            .as_ref()
            .map(|m| m.groups.iter().map(|g| rho_bar / g.rate).collect())
            .unwrap_or_default();
        Ok(BfAnalytic {
            table,
            mixture,
            rho_bar,
            kappa,
        })
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.own_mode != OwnMode::Beamforming {
            return invalid("beamforming analysis requires own_mode = bf");
        }
        let table = compute_weights(cfg.n_r, cfg.n_t)?;
        let rates = build_rate_set(cfg)?;
        let mixture = if rates.is_empty() {
            None
        } else {
            Some(MixtureSpec::from_rates(&rates)?)
        };
        Self::new(table, mixture, own_numerator_scale(cfg)?)
    }

    /// Density via the general (κ-form) expansion regardless of the group count.
    pub fn sinr_pdf_general_form(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        let Some(mix) = &self.mixture else {
            return self.table.pdf(gamma, self.rho_bar);
        };
        let mut sum = NeumaierSum::default();
        for (i, j, xi) in mix.coefficients() {
            if xi == 0.0 {
                continue;
            }
            let rho_i = mix.groups[i - 1].rate;
            for w in &self.table.weights {
                sum.add(xi * w.psi * pdf_kappa_form(gamma, w.k, w.l, self.rho_bar, j, rho_i));
            }
        }
        Ok(sum.value().max(0.0))
    }

    /// Outage via the general (κ-form) expansion regardless of the group count.
    pub fn outage_general_form(&self, gamma0: f64) -> Result<f64> {
        check_threshold(gamma0)?;
        let Some(mix) = &self.mixture else {
            return self.outage_noise_only(gamma0);
        };
        let mut sum = TailSum::default();
        for (i, j, xi) in mix.coefficients() {
            if xi == 0.0 {
                continue;
            }
            let rho_i = mix.groups[i - 1].rate;
            for w in &self.table.weights {
                sum.add(
                    xi * w.psi,
                    tails_kappa_form(gamma0, w.k, w.l, self.rho_bar, j, rho_i),
                );
            }
        }
        sum.outage()
    }

    fn outage_noise_only(&self, gamma0: f64) -> Result<f64> {
        let mut sum = TailSum::default();
        for w in &self.table.weights {
            sum.add(
                w.psi,
                tails_noise_only(gamma0, w.l + 1, self.rho_bar / w.k as f64),
            );
        }
        sum.outage()
    }
}

impl SinrModel for BfAnalytic {
    fn sinr_pdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        match &self.mixture {
            Some(mix) if mix.num_groups() == 1 => {
                let g = mix.groups[0];
                let s: NeumaierSum = self
                    .table
                    .weights
                    .iter()
                    .map(|w| {
                        w.psi
                            * pdf_scale_form(
                                gamma,
                                w.l + 1,
                                self.rho_bar / w.k as f64,
                                g.multiplicity,
                                g.rate,
                            )
                    })
                    .collect();
                Ok(s.value().max(0.0))
            }
            _ => self.sinr_pdf_general_form(gamma),
        }
    }

    fn outage(&self, gamma0: f64) -> Result<f64> {
        check_threshold(gamma0)?;
        match &self.mixture {
            Some(mix) if mix.num_groups() == 1 => {
                let g = mix.groups[0];
                let mut sum = TailSum::default();
                for w in &self.table.weights {
                    let tails = tails_scale_form(
                        gamma0,
                        w.l + 1,
                        self.rho_bar / w.k as f64,
                        g.multiplicity,
                        g.rate,
                    );
                    sum.add(w.psi, tails);
                }
                sum.outage()
            }
            _ => self.outage_general_form(gamma0),
        }
    }

    fn warnings(&self) -> Vec<Warning> {
        self.mixture
            .as_ref()
            .map(|m| m.warnings())
            .unwrap_or_default()
    }
}

/// Density of the beamforming SINR.
pub fn sinr_pdf_bf(gamma: f64, model: &BfAnalytic) -> Result<f64> {
    model.sinr_pdf(gamma)
}

/// Outage probability of the beamforming receiver.
pub fn outage_bf(gamma0: f64, model: &BfAnalytic) -> Result<f64> {
    model.outage(gamma0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::threshold_at_outage;
    use crate::quad::{integrate, integrate_to_infinity};
    use crate::scenario::InterfererSpec;

    fn reference() -> BfAnalytic {
        BfAnalytic::from_config(&ScenarioConfig::reference(OwnMode::Beamforming)).unwrap()
    }

    #[test]
    fn rayleigh_snr_without_interference() {
        let m =
            BfAnalytic::from_config(&ScenarioConfig::new(1, 1, 0.0, OwnMode::Beamforming)).unwrap();
        for &g in &[0.0, 0.3, 1.0, 4.0] {
            assert!((m.sinr_pdf(g).unwrap() - (-g as f64).exp()).abs() < 1e-15);
        }
        let t = threshold_at_outage(&m, 1.0 - (-1f64).exp()).unwrap();
        assert!((t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn outage_limits() {
        let m = reference();
        assert!(m.outage(1e-9).unwrap() < 1e-12);
        assert!(m.outage(1e9).unwrap() > 1.0 - 1e-6);
        assert!(m.outage(0.0).is_err());
        assert!(m.sinr_pdf(-1.0).is_err());
    }

    #[test]
    fn outage_is_integrated_density() {
        let m = reference();
        for db in [0.0, 5.0, 10.0] {
            let g0 = 10f64.powf(db / 10.0);
            let q = integrate(|g| m.sinr_pdf(g).unwrap(), 0.0, g0, 1e-13, 1e-12).unwrap();
            assert!((q.value - m.outage(g0).unwrap()).abs() < 1e-6, "{db} dB");
        }
    }

    #[test]
    fn density_normalized() {
        let cases = [
            ScenarioConfig::reference(OwnMode::Beamforming),
            ScenarioConfig::new(4, 4, 15.0, OwnMode::Beamforming)
                .with_interferer(InterfererSpec::spatial_multiplexing(4, 10.0)),
            ScenarioConfig::new(3, 2, 5.0, OwnMode::Beamforming)
                .with_interferer(InterfererSpec::beamforming(3.0))
                .with_interferer(InterfererSpec::ostbc(12.0)),
        ];
        for cfg in cases {
            let m = BfAnalytic::from_config(&cfg).unwrap();
            let q = integrate_to_infinity(|g| m.sinr_pdf(g).unwrap(), 0.0, 1e-12, 1e-12).unwrap();
            assert!((q.value - 1.0).abs() < 1e-6, "{cfg:?}: {}", q.value);
        }
    }

    #[test]
    fn single_group_matches_general_form() {
        let cfg = ScenarioConfig::new(4, 4, 15.0, OwnMode::Beamforming)
            .with_interferer(InterfererSpec::spatial_multiplexing(4, 10.0));
        let m = BfAnalytic::from_config(&cfg).unwrap();
        assert_eq!(m.mixture.as_ref().unwrap().num_groups(), 1);
        for db in [-10.0, -3.0, 0.0, 4.0, 12.0, 25.0] {
            let g = 10f64.powf(db / 10.0);
            let a = m.outage(g).unwrap();
            let b = m.outage_general_form(g).unwrap();
            assert!((a - b).abs() < 1e-12, "{db}: {a} vs {b}");
            let a = m.sinr_pdf(g).unwrap();
            let b = m.sinr_pdf_general_form(g).unwrap();
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn threshold_round_trip() {
        let m = reference();
        let t1 = threshold_at_outage(&m, 0.01).unwrap();
        assert!((m.outage(t1).unwrap() - 0.01).abs() < 1e-9);
        let t10 = threshold_at_outage(&m, 0.1).unwrap();
        assert!(t1 < t10);
        assert!(threshold_at_outage(&m, 0.0).is_err());
        assert!(threshold_at_outage(&m, 1.0).is_err());
    }
}
