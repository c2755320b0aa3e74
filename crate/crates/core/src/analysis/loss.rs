//! Upper bound on the mean motional energy from the observed ion-loss
//! statistics of repeated exchange sequences.

use serde::{Deserialize, Serialize};

use crate::constants::{joules_to_mev, mev_to_joules};
use crate::error::{Error, Result};
use crate::numeric::bisect;

/// What counts as one independent loss trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialUnit {
    /// The energy is re-drawn from the thermal distribution once per
    /// sequence.
    PerSequence,
    /// The energy is re-drawn before every exchange.
    PerExchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossExperiment {
    pub exchanges_per_sequence: u64,
    /// Sequences completed before the first loss.
    pub sequences_observed: u64,
    /// Energy needed to leave the trap, J.
    pub trap_depth: f64,
    pub confidence: f64,
    pub trial_unit: TrialUnit,
}

impl LossExperiment {
    /// 200 exchanges per sequence, 149 sequences, 1 eV depth, 99 %.
    pub fn reference() -> Self {
        Self {
            exchanges_per_sequence: 200,
            sequences_observed: 149,
            trap_depth: mev_to_joules(1000.0),
            confidence: 0.99,
            trial_unit: TrialUnit::PerExchange,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exchanges_per_sequence < 1 || self.sequences_observed < 1 {
            return Err(Error::InvalidInput(
                "exchange and sequence counts must be at least 1".into(),
            ));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidInput(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if !(self.trap_depth > 0.0 && self.trap_depth.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "trap depth must be positive, got {}",
                self.trap_depth
            )));
        }
        Ok(())
    }

    pub fn trials(&self) -> f64 {
        match self.trial_unit {
            TrialUnit::PerSequence => self.sequences_observed as f64,
            TrialUnit::PerExchange => (self.sequences_observed * self.exchanges_per_sequence) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBound {
    /// Largest mean energy `3/2 k_B T` compatible with the survival record, J.
    pub mean_energy_bound: f64,
    /// The bound divided by the exchanges in one sequence, J.
    pub per_exchange_rate: f64,
    /// Largest per-trial escape probability not rejected.
    pub max_escape_probability: f64,
}

impl LossBound {
    pub fn mean_energy_mev(&self) -> f64 {
        joules_to_mev(self.mean_energy_bound)
    }

    pub fn per_exchange_mev(&self) -> f64 {
        joules_to_mev(self.per_exchange_rate)
    }
}

/// Probability that a 3D Maxwell-Boltzmann energy exceeds `x k_B T`:
/// the regularized upper incomplete gamma function `Q(3/2, x)`.
pub fn thermal_escape_probability(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc(x.sqrt()) + 2.0 * (x / std::f64::consts::PI).sqrt() * (-x).exp()
}

pub fn loss_energy_bound(exp: &LossExperiment) -> Result<LossBound> {
    exp.validate()?;
    // Largest p with (1 - p)^N >= 1 - confidence.
    let p_max = -f64::exp_m1(f64::ln_1p(-exp.confidence) / exp.trials());
    // Q(3/2, x) decreases in x = depth / (k_B T).
    let (lo, hi) = (1e-6, 700.0);
    if !(thermal_escape_probability(hi) < p_max && thermal_escape_probability(lo) > p_max) {
        return Err(Error::NoRoot(format!(
            "escape probability {p_max:e} outside the thermal model range"
        )));
    }
    let x = bisect(|x| thermal_escape_probability(x) - p_max, lo, hi, 1e-13)?;
    let mean = 1.5 * exp.trap_depth / x;
    Ok(LossBound {
        mean_energy_bound: mean,
        per_exchange_rate: mean / exp.exchanges_per_sequence as f64,
        max_escape_probability: p_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(2/sqrt(pi)) int_x^inf sqrt(u) e^-u du` by composite Simpson.
    fn tail_quadrature(x: f64) -> f64 {
        let (a, b, n) = (x, x + 60.0, 200_000);
        let h = (b - a) / n as f64;
        let f = |u: f64| u.sqrt() * (-u).exp();
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn escape_probability_matches_quadrature() {
        for x in [0.1, 1.0, 3.0, 10.0, 20.0] {
            let a = thermal_escape_probability(x);
            let b = tail_quadrature(x);
            assert!((a / b - 1.0).abs() < 1e-8, "x={x}: {a} vs {b}");
        }
        assert_eq!(thermal_escape_probability(0.0), 1.0);
    }

    #[test]
    fn reference_inputs_within_band() {
        let b = loss_energy_bound(&LossExperiment::reference()).unwrap();
        assert!((75.0..=300.0).contains(&b.mean_energy_mev()), "{}", b.mean_energy_mev());
        assert!((0.4..=1.6).contains(&b.per_exchange_mev()), "{}", b.per_exchange_mev());
        // The escape probability at the bound equals the rejection threshold.
        let x = 1.5 * LossExperiment::reference().trap_depth / b.mean_energy_bound;
        let survive = (1.0 - thermal_escape_probability(x)).powf(29800.0);
        assert!((survive - 0.01).abs() < 1e-9);
    }

    #[test]
    fn per_sequence_trials_are_looser() {
        let mut e = LossExperiment::reference();
        e.trial_unit = TrialUnit::PerSequence;
        let loose = loss_energy_bound(&e).unwrap();
        let tight = loss_energy_bound(&LossExperiment::reference()).unwrap();
        assert!(loose.mean_energy_bound > 2.0 * tight.mean_energy_bound);
    }

    #[test]
    fn monotonicity() {
        let base = LossExperiment::reference();
        let b0 = loss_energy_bound(&base).unwrap().mean_energy_bound;
        let deeper = LossExperiment {
            trap_depth: 2.0 * base.trap_depth,
            ..base
        };
        assert!(loss_energy_bound(&deeper).unwrap().mean_energy_bound > b0);
        let surer = LossExperiment {
            confidence: 0.999,
            ..base
        };
        assert!(loss_energy_bound(&surer).unwrap().mean_energy_bound > b0);
        let longer = LossExperiment {
            sequences_observed: 298,
            ..base
        };
        assert!(loss_energy_bound(&longer).unwrap().mean_energy_bound < b0);
        let huge = LossExperiment {
            trap_depth: 1e6 * base.trap_depth,
            ..base
        };
        assert!(loss_energy_bound(&huge).unwrap().mean_energy_bound > 1e5 * b0);
    }

    #[test]
    fn invalid_experiments() {
        let base = LossExperiment::reference();
        assert!(loss_energy_bound(&LossExperiment {
            confidence: 1.0,
            ..base
        })
        .is_err());
        assert!(loss_energy_bound(&LossExperiment {
            trap_depth: 0.0,
            ..base
        })
        .is_err());
        assert!(loss_energy_bound(&LossExperiment {
            sequences_observed: 0,
            ..base
        })
        .is_err());
    }
}
