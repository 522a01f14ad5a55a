use crate::error::{DmgError, Result};
use crate::numcore::Rng;

/// Probability of feeding ground truth at a given epoch:
/// `p = mu / (mu + exp(epoch / mu))`. Strictly decreasing in epoch.
pub fn sampling_probability(mu: f64, epoch: usize) -> Result<f64> {
    if mu <= 0.0 {
        return Err(DmgError::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(mu / (mu + (epoch as f64 / mu).exp()))
}

/// Current epoch and its teacher-forcing probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    pub epoch: usize,
    pub p: f64,
}

impl ScheduleState {
    pub fn at(mu: f64, epoch: usize) -> Result<ScheduleState> {
        Ok(ScheduleState {
            epoch,
            p: sampling_probability(mu, epoch)?,
        })
    }
}

/// Ground truth with probability `p`, otherwise the model's prediction.
/// Consumes exactly one draw.
pub fn choose_input_token(y_truth: usize, y_pred: usize, p: f64, rng: &mut Rng) -> usize {
    if rng.next_f64() < p {
        y_truth
    } else {
        y_pred
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_evaluation() {
        // mu=12, epoch=0: 12/13
        assert!((sampling_probability(12.0, 0).unwrap() - 12.0 / 13.0).abs() < 1e-12);
        // mu=12, epoch=12: 12/(12+e)
        let expect = 12.0 / (12.0 + std::f64::consts::E);
        assert!((sampling_probability(12.0, 12).unwrap() - expect).abs() < 1e-12);
        assert!((sampling_probability(12.0, 0).unwrap() - 0.92308).abs() < 1e-5);
        assert!((sampling_probability(12.0, 12).unwrap() - 0.81531).abs() < 1e-5);
    }

    #[test]
    fn strictly_decreasing_for_any_mu() {
        // small mu underflows exp(epoch/mu) past ~350 epochs; stay in the
        // numerically meaningful range for it
        for (mu, max_epoch) in [(0.5, 170), (2.0, 1000), (12.0, 1000), (100.0, 1000)] {
            let mut prev = f64::INFINITY;
            for epoch in 0..=max_epoch {
                let p = sampling_probability(mu, epoch).unwrap();
                assert!(p < prev, "mu={mu} epoch={epoch}");
                assert!(p > 0.0 && p <= 1.0);
                prev = p;
            }
        }
    }

    #[test]
    fn non_positive_mu_is_error() {
        assert!(sampling_probability(0.0, 1).is_err());
        assert!(sampling_probability(-1.0, 1).is_err());
    }

    #[test]
    fn extreme_probabilities_are_deterministic() {
        let mut rng = Rng::new(1);
        for _ in 0..100 {
            assert_eq!(choose_input_token(7, 3, 1.0, &mut rng), 7);
            assert_eq!(choose_input_token(7, 3, 0.0, &mut rng), 3);
        }
    }

    #[test]
    fn selection_rate_concentrates_near_p() {
        let mut rng = Rng::new(123);
        let n = 10_000;
        let truth = (0..n)
            .filter(|_| choose_input_token(1, 0, 0.9, &mut rng) == 1)
            .count();
        let frac = truth as f64 / n as f64;
        assert!((0.88..=0.92).contains(&frac), "got {frac}");
    }
}
