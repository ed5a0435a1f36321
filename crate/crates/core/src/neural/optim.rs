//! Adam-family optimizers.
//!
//! Nadam follows the Keras 2 formulation. With `mu_t = b1 (1 - 0.5 * 0.96^(0.004 t))`
//! and `S_t = mu_1 ... mu_t`, one step is
//!
//! ```text
//! m   = b1 m + (1 - b1) g            v  = b2 v + (1 - b2) g^2
//! g^  = g / (1 - S_t)                m^ = m / (1 - S_t mu_{t+1})
//! v^  = v / (1 - b2^t)
//! m_  = (1 - mu_t) g^ + mu_{t+1} m^
//! p  -= lr m_ / (sqrt(v^) + eps)
//! ```
//!
//! Adam is the usual `p -= lr m/(1 - b1^t) / (sqrt(v/(1 - b2^t)) + eps)`.

use serde::{Deserialize, Serialize};

use super::config::{OptimizerKind, TrainConfig};
use super::mlp::ParamBlock;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SCHEDULE_DECAY: f64 = 0.004;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NadamState {
    pub kind: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Steps taken so far.
    pub t: u64,
    /// Product of the momentum schedule up to step `t`.
    pub m_schedule: f64,
    /// First and second moments per parameter block, in block order.
    pub moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl NadamState {
    pub fn new(kind: OptimizerKind, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            kind,
            beta1,
            beta2,
            epsilon,
            t: 0,
            m_schedule: 1.0,
            moments: vec![],
        }
    }

    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self::new(cfg.optimizer, cfg.beta1, cfg.beta2, cfg.epsilon)
    }

    fn momentum(&self, t: u64) -> f64 {
        self.beta1 * (1.0 - 0.5 * 0.96f64.powf(t as f64 * SCHEDULE_DECAY))
    }

    /// Applies one update to every block. Nothing changes if any gradient
    /// is non-finite.
    pub fn step<T: Scalar>(&mut self, blocks: &mut [ParamBlock<'_, T>], lr: f64) -> Result<()> {
        if let Some(b) = blocks
            .iter()
            .find(|b| b.grad.iter().any(|g| !g.is_finite()))
        {
            return Err(Error::NonFiniteGradient(b.name.clone()));
        }
        if self.moments.is_empty() {
            self.moments = blocks
                .iter()
                .map(|b| (vec![0.0; b.value.len()], vec![0.0; b.value.len()]))
                .collect();
        }
        if self.moments.len() != blocks.len()
            || self
                .moments
                .iter()
                .zip(blocks.iter())
                .any(|(m, b)| m.0.len() != b.value.len() || b.grad.len() != b.value.len())
        {
            return Err(Error::Shape(
                "optimizer state does not match the parameters".into(),
            ));
        }
        self.t += 1;
        let t = self.t;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let v_corr = 1.0 - b2.powi(t as i32);
        match self.kind {
            OptimizerKind::Nadam => {
                let mu_t = self.momentum(t);
                let mu_next = self.momentum(t + 1);
                self.m_schedule *= mu_t;
                let s_t = self.m_schedule;
                let s_next = s_t * mu_next;
                for (b, (m, v)) in blocks.iter_mut().zip(&mut self.moments) {
                    for i in 0..m.len() {
                        let g = b.grad[i].to_f64_lossy();
                        m[i] = b1 * m[i] + (1.0 - b1) * g;
                        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                        let g_hat = g / (1.0 - s_t);
                        let m_hat = m[i] / (1.0 - s_next);
                        let v_hat = v[i] / v_corr;
                        let m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
                        b.value[i] -= T::of(lr * m_bar / (v_hat.sqrt() + eps));
                    }
                }
            }
            OptimizerKind::Adam => {
                let m_corr = 1.0 - b1.powi(t as i32);
                for (b, (m, v)) in blocks.iter_mut().zip(&mut self.moments) {
                    for i in 0..m.len() {
                        let g = b.grad[i].to_f64_lossy();
                        m[i] = b1 * m[i] + (1.0 - b1) * g;
                        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                        let step = lr * (m[i] / m_corr) / ((v[i] / v_corr).sqrt() + eps);
                        b.value[i] -= T::of(step);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(kind: OptimizerKind, w: &mut [f64], g: &[f64], steps: usize) -> NadamState {
        let mut s = NadamState::new(kind, 0.9, 0.999, 1e-8);
        for _ in 0..steps {
            let mut blocks = [ParamBlock {
                name: "w".into(),
                value: &mut *w,
                grad: g,
            }];
            s.step(&mut blocks, 0.002).unwrap();
        }
        s
    }

    #[test]
    fn first_nadam_step_by_hand() {
        // mu_1 = 0.9 (1 - 0.5 * 0.96^0.004), mu_2 = 0.9 (1 - 0.5 * 0.96^0.008)
        // m_ = (1 - mu_1) / (1 - mu_1) + mu_2 * 0.1 / (1 - mu_1 mu_2), v^ = 1
        let mut w = [0.0];
        run(OptimizerKind::Nadam, &mut w, &[1.0], 1);
        assert!(
            (w[0] - -0.002_112_903_535_581_741).abs() < 1e-15,
            "{}",
            w[0]
        );
    }

    #[test]
    fn first_adam_step_is_lr() {
        let mut w = [0.0];
        run(OptimizerKind::Adam, &mut w, &[1.0], 1);
        assert!((w[0] + 0.002).abs() < 1e-10);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut w = [0.25, -3.0];
        let s = run(OptimizerKind::Nadam, &mut w, &[0.0, 0.0], 3);
        assert_eq!(w, [0.25, -3.0]);
        assert_eq!(s.t, 3);
    }

    #[test]
    fn identical_runs_agree() {
        let (mut a, mut b) = ([0.5, 1.0], [0.5, 1.0]);
        let sa = run(OptimizerKind::Nadam, &mut a, &[0.3, -0.7], 5);
        let sb = run(OptimizerKind::Nadam, &mut b, &[0.3, -0.7], 5);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn non_finite_gradient_names_the_block() {
        let mut w = [1.0];
        let mut s = NadamState::new(OptimizerKind::Nadam, 0.9, 0.999, 1e-8);
        let mut blocks = [ParamBlock {
            name: "dense0.bias".into(),
            value: &mut w,
            grad: &[f64::NAN],
        }];
        match s.step(&mut blocks, 0.1) {
            Err(Error::NonFiniteGradient(name)) => assert_eq!(name, "dense0.bias"),
            other => panic!("{other:?}"),
        }
        assert_eq!(w, [1.0]);
    }
}
