use super::network::NetworkState;

/// Adam hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of `state` using `grad`.
    pub fn step(&self, state: &mut NetworkState, grad: &[f64]) {
        debug_assert_eq!(grad.len(), state.params.len());
        state.step += 1;
        let t = state.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let step = self.lr / c1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        for (((p, m), v), &g) in state
            .params
            .iter_mut()
            .zip(state.first_moment.iter_mut())
            .zip(state.second_moment.iter_mut())
            .zip(grad)
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= step * *m / ((*v / c2).sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inr::network::NetworkConfig;

    #[test]
    fn first_step_moves_each_param_by_lr() {
        let cfg = NetworkConfig {
            hidden_layers: 1,
            width: 3,
            in_dim: 1,
            out_dim: 1,
            ..Default::default()
        };
        let mut state = NetworkState::init(&cfg).unwrap();
        let before = state.params().to_vec();
        let grad: Vec<f64> = (0..before.len()).map(|i| if i % 2 == 0 { 0.5 } else { -2.0 }).collect();
        Adam::new(1e-3).step(&mut state, &grad);
        for ((b, a), g) in before.iter().zip(state.params()).zip(&grad) {
            let moved = b - a;
            assert!((moved - 1e-3 * g.signum()).abs() < 1e-9, "{moved}");
        }
        assert_eq!(state.step(), 1);
    }
}
