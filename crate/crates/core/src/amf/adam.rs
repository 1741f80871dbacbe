use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators, one slot per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            first: vec![0.0; len],
            second: vec![0.0; len],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// One bias-corrected Adam update of `params` along `grads`.
    ///
    /// Every parameter is updated, including ones with a zero gradient in this
    /// step, whose moments keep decaying.
    pub fn update(&mut self, cfg: &AdamConfig, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.first.len(), "parameter count changed");
        assert_eq!(grads.len(), self.first.len(), "gradient count mismatch");
        self.step += 1;
        let t = self.step as i32;
        let correct1 = 1.0 - libm::pow(cfg.beta1, f64::from(t));
        let correct2 = 1.0 - libm::pow(cfg.beta2, f64::from(t));
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / correct1;
            let v_hat = *v / correct2;
            *p -= cfg.learning_rate * m_hat / (math::sqrt(v_hat) + cfg.epsilon);
        }
    }
}
