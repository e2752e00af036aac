//! Scenario inputs: antenna dimensions, long-term powers and interferers.
//!
//! Powers are stored in dB relative to the noise floor and converted to
//! linear values on demand. Only ratios to the noise power ever enter the
//! analysis.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// Multi-antenna technique of an interfering base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technique {
    #[serde(rename = "bf")]
    Beamforming,
    #[serde(rename = "sm")]
    SpatialMultiplexing,
    #[serde(rename = "ostbc")]
    Ostbc,
}

/// Transmission mode of the serving base station, which fixes the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OwnMode {
    #[serde(rename = "bf")]
    Beamforming,
    #[serde(rename = "ostbc")]
    Ostbc,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererSpec {
    pub technique: Technique,
    #[serde(default = "one")]
    pub layers: usize,
    pub inr_db: f64,
}

impl InterfererSpec {
    pub fn beamforming(inr_db: f64) -> Self {
        InterfererSpec {
            technique: Technique::Beamforming,
            layers: 1,
            inr_db,
        }
    }

    pub fn spatial_multiplexing(layers: usize, inr_db: f64) -> Self {
        InterfererSpec {
            technique: Technique::SpatialMultiplexing,
            layers,
            inr_db,
        }
    }

    pub fn ostbc(inr_db: f64) -> Self {
        InterfererSpec {
            technique: Technique::Ostbc,
            layers: 1,
            inr_db,
        }
    }

    /// Rank of the interfering transmission.
    pub fn rank(&self) -> usize {
        self.layers
    }
}

/// Full description of a link-level scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_r: usize,
    pub n_t: usize,
    pub noise_power: f64,
    pub snr_db: f64,
    pub own_mode: OwnMode,
    #[serde(default)]
    pub interferers: Vec<InterfererSpec>,
}

/// Non-fatal conditions attached to analysis results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Warning {
    /// OSTBC with more than two transmit antennas has no full-rate code; results are an extrapolation.
    NoFullRateOstbc { n_t: usize },
    /// Two interference groups have nearly equal rates; the Ξ coefficients are badly conditioned.
    IllConditionedMixture { min_separation: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::NoFullRateOstbc { n_t } => {
                write!(
                    f,
                    "no full-rate OSTBC exists for n_t = {n_t}; results are extrapolated"
                )
            }
            Warning::IllConditionedMixture { min_separation } => {
                write!(
                    f,
                    "interference groups separated by only {min_separation:.3e} (relative)"
                )
            }
        }
    }
}

/// Multiset of exponential scales, one per interference layer contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    pub rates: Vec<f64>,
}

impl RateSet {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Mean of the total interference, Σρ.
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return invalid(format!("dB value must be finite, got {x_db}"));
    }
    Ok(10f64.powf(x_db / 10.0))
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return invalid(format!("linear value must be positive and finite, got {x}"));
    }
    Ok(10.0 * x.log10())
}

impl ScenarioConfig {
    pub fn new(n_r: usize, n_t: usize, snr_db: f64, own_mode: OwnMode) -> Self {
        ScenarioConfig {
            n_r,
            n_t,
            noise_power: 1.0,
            snr_db,
            own_mode,
            interferers: Vec::new(),
        }
    }

    pub fn with_interferer(mut self, spec: InterfererSpec) -> Self {
        self.interferers.push(spec);
        self
    }

    /// The validation scenario: 2×2, SNR 15 dB, OSTBC/BF/SM interferers at 6/8/10 dB INR.
    pub fn reference(own_mode: OwnMode) -> Self {
        ScenarioConfig::new(2, 2, 15.0, own_mode)
            .with_interferer(InterfererSpec::ostbc(6.0))
            .with_interferer(InterfererSpec::beamforming(8.0))
            .with_interferer(InterfererSpec::spatial_multiplexing(2, 10.0))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Error::Config(e.inner().to_string())
            } else {
                Error::Config(format!("{path}: {}", e.inner()))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_t == 0 {
            return invalid("n_r and n_t must be at least 1");
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return invalid(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            ));
        }
        if !self.snr_db.is_finite() {
            return invalid("snr_db must be finite");
        }
        let max_layers = self.n_r.min(self.n_t);
        for (i, itf) in self.interferers.iter().enumerate() {
            if !itf.inr_db.is_finite() {
                return invalid(format!("interferer {i}: inr_db must be finite"));
            }
            match itf.technique {
                Technique::SpatialMultiplexing => {
                    if itf.layers < 1 || itf.layers > max_layers {
                        return invalid(format!(
                            "interferer {i}: layers = {} outside [1, {max_layers}]",
                            itf.layers
                        ));
                    }
                }
                Technique::Beamforming | Technique::Ostbc => {
                    if itf.layers != 1 {
                        return invalid(format!(
                            "interferer {i}: {:?} transmits exactly one layer",
                            itf.technique
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = Vec::new();
        if self.own_mode == OwnMode::Ostbc && self.n_t > 2 {
            w.push(Warning::NoFullRateOstbc { n_t: self.n_t });
        }
        w
    }

    /// Long-term received own power P₀ (linear).
    pub fn own_power(&self) -> f64 {
        self.noise_power * 10f64.powf(self.snr_db / 10.0)
    }

    /// Long-term received power P_i of each interferer (linear).
    pub fn interferer_powers(&self) -> Vec<f64> {
        self.interferers
            .iter()
            .map(|i| self.noise_power * 10f64.powf(i.inr_db / 10.0))
            .collect()
    }

    /// Long-term SNR P₀/σ².
    pub fn own_snr(&self) -> f64 {
        self.own_power() / self.noise_power
    }
}

/// Per-layer exponential scales of the normalized interference power.
pub fn build_rate_set(cfg: &ScenarioConfig) -> Result<RateSet> {
    cfg.validate()?;
    let sigma2 = cfg.noise_power;
    let n_t = cfg.n_t as f64;
    let mut rates = Vec::new();
    for (itf, p) in cfg.interferers.iter().zip(cfg.interferer_powers()) {
        let n_l = itf.layers as f64;
        match cfg.own_mode {
            OwnMode::Beamforming => match itf.technique {
                Technique::Beamforming | Technique::SpatialMultiplexing => {
                    rates.extend(std::iter::repeat_n(p / (n_l * sigma2), itf.layers));
                }
                Technique::Ostbc => rates.push(p / (n_t * sigma2)),
            },
            OwnMode::Ostbc => {
                let rho = p / (n_t * n_t * n_l * sigma2);
                rates.extend(std::iter::repeat_n(rho, cfg.n_t * itf.layers));
            }
        }
    }
    Ok(RateSet { rates })
}

/// Scale of the normalized own-signal power: P₀/σ² (BF) or P₀/(n_T²σ²) (OSTBC).
pub fn own_numerator_scale(cfg: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let snr = cfg.own_snr();
    Ok(match cfg.own_mode {
        OwnMode::Beamforming => snr,
        OwnMode::Ostbc => snr / (cfg.n_t * cfg.n_t) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn db_conversions() {
        assert!((db_to_linear(15.0).unwrap() - 31.62).abs() < 0.01);
        assert_eq!(db_to_linear(0.0).unwrap(), 1.0);
        let lin: Vec<f64> = [6.0, 8.0, 10.0]
            .iter()
            .map(|&x| db_to_linear(x).unwrap())
            .collect();
        assert!((lin[0] - 3.98).abs() < 0.005);
        assert!((lin[1] - 6.31).abs() < 0.005);
        assert!((lin[2] - 10.0).abs() < 1e-12);
        assert!(db_to_linear(f64::NAN).is_err());
        assert!(db_to_linear(f64::INFINITY).is_err());
        assert!(linear_to_db(0.0).is_err());
    }

    #[test]
    fn rate_sets() {
        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Beamforming)
            .with_interferer(InterfererSpec::spatial_multiplexing(2, 10.0));
        assert_eq!(build_rate_set(&cfg).unwrap().rates, vec![5.0, 5.0]);

        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Beamforming)
            .with_interferer(InterfererSpec::beamforming(10.0));
        assert_eq!(build_rate_set(&cfg).unwrap().rates, vec![10.0]);

        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Ostbc)
            .with_interferer(InterfererSpec::beamforming(10.0));
        assert_eq!(build_rate_set(&cfg).unwrap().rates, vec![2.5; 2]);

        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Beamforming)
            .with_interferer(InterfererSpec::ostbc(10.0));
        assert_eq!(build_rate_set(&cfg).unwrap().rates, vec![5.0]);
    }

    #[test]
    fn layer_range_is_checked() {
        let cfg = ScenarioConfig::new(2, 4, 15.0, OwnMode::Beamforming)
            .with_interferer(InterfererSpec::spatial_multiplexing(3, 10.0));
        assert!(matches!(
            build_rate_set(&cfg),
            Err(Error::InvalidArgument(_))
        ));
        let mut bad = InterfererSpec::beamforming(3.0);
        bad.layers = 2;
        let cfg = ScenarioConfig::new(2, 2, 15.0, OwnMode::Beamforming).with_interferer(bad);
        assert!(build_rate_set(&cfg).is_err());
    }

    #[test]
    fn numerator_scale() {
        let bf = ScenarioConfig::new(2, 2, 15.0, OwnMode::Beamforming);
        assert!((own_numerator_scale(&bf).unwrap() - 31.62).abs() < 0.01);
        let st = ScenarioConfig::new(2, 2, 15.0, OwnMode::Ostbc);
        assert!((own_numerator_scale(&st).unwrap() - 7.905).abs() < 0.003);
        let st1 = ScenarioConfig::new(2, 1, 15.0, OwnMode::Ostbc);
        let bf1 = ScenarioConfig::new(2, 1, 15.0, OwnMode::Beamforming);
        assert_eq!(
            own_numerator_scale(&st1).unwrap(),
            own_numerator_scale(&bf1).unwrap()
        );
    }

    #[test]
    fn json_schema() {
        let text = r#"{"n_r": 2, "n_t": 2, "noise_power": 1.0, "snr_db": 15, "own_mode": "bf",
            "interferers": [{"technique": "ostbc", "layers": 1, "inr_db": 6},
                            {"technique": "bf", "layers": 1, "inr_db": 8},
                            {"technique": "sm", "layers": 2, "inr_db": 10}]}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg, ScenarioConfig::reference(OwnMode::Beamforming));
        let round = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(round.hash(), cfg.hash());

        let unknown = r#"{"n_r": 2, "n_t": 2, "noise_power": 1.0, "snr_db": 15, "own_mode": "bf", "bogus": 1}"#;
        let err = ScenarioConfig::from_json(unknown).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let wrong_type = r#"{"n_r": 2, "n_t": 2, "noise_power": 1.0, "snr_db": 15, "own_mode": "bf",
            "interferers": [{"technique": "bf", "inr_db": "high"}]}"#;
        let err = ScenarioConfig::from_json(wrong_type).unwrap_err();
        assert!(err.to_string().contains("interferers[0].inr_db"), "{err}");
    }

    #[test]
    fn ostbc_extrapolation_warning() {
        assert!(ScenarioConfig::new(4, 4, 15.0, OwnMode::Ostbc)
            .warnings()
            .contains(&Warning::NoFullRateOstbc { n_t: 4 }));
        assert!(ScenarioConfig::new(4, 2, 15.0, OwnMode::Ostbc)
            .warnings()
            .is_empty());
    }

    fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
        (
            1usize..=4,
            1usize..=4,
            -10.0f64..30.0,
            any::<bool>(),
            proptest::collection::vec((0u8..3, 1usize..=4, -10.0f64..20.0), 0..5),
        )
            .prop_map(|(n_r, n_t, snr_db, bf, itfs)| {
                let own = if bf {
                    OwnMode::Beamforming
                } else {
                    OwnMode::Ostbc
                };
                let mut cfg = ScenarioConfig::new(n_r, n_t, snr_db, own);
                for (kind, layers, inr) in itfs {
                    cfg.interferers.push(match kind {
                        0 => InterfererSpec::beamforming(inr),
                        1 => InterfererSpec::spatial_multiplexing(layers.min(n_r.min(n_t)), inr),
                        _ => InterfererSpec::ostbc(inr),
                    });
                }
                cfg
            })
    }

    proptest! {
        #[test]
        fn db_round_trip(x in -100.0f64..100.0) {
            let back = linear_to_db(db_to_linear(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn rate_set_cardinality(cfg in arb_config()) {
            let layers: usize = cfg.interferers.iter().map(|i| i.layers).sum();
            let rs = build_rate_set(&cfg).unwrap();
            let expected = match cfg.own_mode {
                OwnMode::Beamforming => layers,
                OwnMode::Ostbc => cfg.n_t * layers,
            };
            prop_assert_eq!(rs.len(), expected);
        }

        #[test]
        fn common_power_scaling_is_invisible(cfg in arb_config(), shift_db in -20.0f64..20.0) {
            // Scaling σ², P₀ and every P_i by one factor keeps all dB ratios fixed.
            let mut scaled = cfg.clone();
            scaled.noise_power *= 10f64.powf(shift_db / 10.0);
            let a = build_rate_set(&cfg).unwrap();
            let b = build_rate_set(&scaled).unwrap();
            for (x, y) in a.rates.iter().zip(&b.rates) {
                prop_assert!((x - y).abs() <= 1e-12 * x);
            }
            let sa = own_numerator_scale(&cfg).unwrap();
            let sb = own_numerator_scale(&scaled).unwrap();
            prop_assert!((sa - sb).abs() <= 1e-12 * sa);
        }
    }
}
