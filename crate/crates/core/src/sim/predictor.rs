use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::correction::DualHeadOutput;
use crate::error::{Error, Result};
use crate::steering_space::SteeringSpace;

use super::expert::expert_steering;
use super::route::Route;
use super::vehicle::{VehicleParams, VehicleState};

/// Synthetic stand-in for a trained dual-head network.
///
/// The regression head reports the expert's steering with Gaussian noise
/// and occasional gross faults. The classification head is a softmax over
/// negative squared distance from each bin center to the expert's steering,
/// occasionally perceived one bin off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorStubConfig {
    pub reg_noise_std: f64,
    /// Per-step probability of a gross regression error.
    pub fault_rate: f64,
    /// Size of a gross regression error; its sign is random.
    pub fault_magnitude: f64,
    pub softmax_temperature: f64,
    /// Per-step probability that the classifier's perceived steering is off by one bin.
    pub confusion_rate: f64,
    pub rng_seed: u64,
}

impl Default for PredictorStubConfig {
    fn default() -> Self {
        PredictorStubConfig {
            reg_noise_std: 0.05,
            fault_rate: 0.05,
            fault_magnitude: 0.8,
            softmax_temperature: 0.002,
            confusion_rate: 0.02,
            rng_seed: 0,
        }
    }
}

impl PredictorStubConfig {
    /// Perfect predictor: no noise, no faults, near one-hot classification.
    pub fn noiseless() -> Self {
        PredictorStubConfig {
            reg_noise_std: 0.0,
            fault_rate: 0.0,
            fault_magnitude: 0.0,
            softmax_temperature: 1e-9,
            confusion_rate: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("fault_rate", self.fault_rate),
            ("confusion_rate", self.confusion_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1], got {rate}"
                )));
            }
        }
        if !(self.softmax_temperature > 0.0 && self.softmax_temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "softmax_temperature must be positive, got {}",
                self.softmax_temperature
            )));
        }
        for (name, v) in [
            ("reg_noise_std", self.reg_noise_std),
            ("fault_magnitude", self.fault_magnitude),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Dual-head output for a known expert steering value.
///
/// Every call consumes the same sequence of random draws whatever the
/// configuration, so two rollouts sharing a seed see the same noise and
/// fault schedule.
pub fn predict_from_expert<R: Rng + ?Sized>(
    expert: f64,
    cfg: &PredictorStubConfig,
    space: &SteeringSpace,
    rng: &mut R,
) -> Result<DualHeadOutput> {
    cfg.validate()?;
    let z: f64 = StandardNormal.sample(rng);
    let fault_draw: f64 = rng.random();
    let fault_up: bool = rng.random();
    let confusion_draw: f64 = rng.random();
    let shift_up: bool = rng.random();

    let mut y_cont = expert;
    if cfg.reg_noise_std > 0.0 {
        y_cont += cfg.reg_noise_std * z;
    }
    if fault_draw < cfg.fault_rate {
        y_cont += if fault_up {
            cfg.fault_magnitude
        } else {
            -cfg.fault_magnitude
        };
    }

    let mut perceived = expert;
    if confusion_draw < cfg.confusion_rate {
        perceived += if shift_up {
            space.width()
        } else {
            -space.width()
        };
    }
    let perceived = perceived.clamp(-1.0, 1.0);

    let logits: Vec<f64> = space
        .centers()
        .iter()
        .map(|c| -(c - perceived).powi(2) / cfg.softmax_temperature)
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.into_iter().map(|w| w / total).collect();

    DualHeadOutput::new(y_cont, probs)
}

/// Dual-head output for the vehicle's current state on `route`.
pub fn predict<R: Rng + ?Sized>(
    state: &VehicleState,
    route: &Route,
    vehicle: &VehicleParams,
    lookahead: f64,
    cfg: &PredictorStubConfig,
    space: &SteeringSpace,
    rng: &mut R,
) -> Result<DualHeadOutput> {
    let expert = expert_steering(state, route, vehicle, lookahead)?;
    predict_from_expert(expert, cfg, space, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::{correct, entropy, CorrectionCase, CorrectionConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_is_exact_and_one_hot() {
        let space = SteeringSpace::default();
        let cfg = PredictorStubConfig::noiseless();
        let corr = CorrectionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut crng = corr.rng();
        for i in 0..1000 {
            let expert = -0.95 + 1.9 * i as f64 / 999.0;
            let out = predict_from_expert(expert, &cfg, &space, &mut rng).unwrap();
            assert_eq!(out.y_cont(), expert);
            assert!(out.probs().iter().any(|&p| p > 0.999));
            let r = correct(&out, &space, &corr, &mut crng).unwrap();
            assert_eq!(r.case_id, CorrectionCase::Case1);
            assert_eq!(r.y_final, expert);
        }
    }

    fn case_counts(cfg: &PredictorStubConfig, steps: usize) -> [usize; 4] {
        let space = SteeringSpace::default();
        let corr = CorrectionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let mut crng = corr.rng();
        let mut counts = [0; 4];
        for i in 0..steps {
            let expert = 0.6 * ((i as f64) * 0.01).sin();
            let out = predict_from_expert(expert, cfg, &space, &mut rng).unwrap();
            counts[correct(&out, &space, &corr, &mut crng)
                .unwrap()
                .case_id
                .index()] += 1;
        }
        counts
    }

    #[test]
    fn faults_with_sharp_classifier_trigger_case2() {
        let cfg = PredictorStubConfig {
            rng_seed: 4,
            ..Default::default()
        };
        let counts = case_counts(&cfg, 1000);
        // 5% faults, most of them seen by a confident classifier
        assert!(counts[1] >= 20 && counts[1] <= 80, "{counts:?}");
        assert!(counts[0] > 600, "{counts:?}");
    }

    #[test]
    fn hot_softmax_triggers_case3() {
        let space = SteeringSpace::default();
        let cfg = PredictorStubConfig {
            softmax_temperature: 5.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = predict_from_expert(0.1, &cfg, &space, &mut rng).unwrap();
        assert!(entropy(out.probs(), 1e-12).unwrap() > 1.5);
        let counts = case_counts(&cfg, 1000);
        assert_eq!(counts[2], 1000, "{counts:?}");
    }

    #[test]
    fn draws_are_schedule_aligned() {
        let space = SteeringSpace::default();
        let a_cfg = PredictorStubConfig::default();
        let b_cfg = PredictorStubConfig {
            fault_rate: 0.0,
            reg_noise_std: 0.0,
            ..a_cfg.clone()
        };
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            predict_from_expert(0.2, &a_cfg, &space, &mut a).unwrap();
            predict_from_expert(-0.7, &b_cfg, &space, &mut b).unwrap();
        }
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn validation() {
        let ok = PredictorStubConfig::default();
        assert!(PredictorStubConfig {
            fault_rate: 1.5,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(PredictorStubConfig {
            softmax_temperature: 0.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(PredictorStubConfig {
            reg_noise_std: -1.0,
            ..ok
        }
        .validate()
        .is_err());
    }
}
