use ndarray::{Array2, Zip};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Moment accumulators for one weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Array2<f64>,
    pub v: Array2<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(shape: (usize, usize)) -> Self {
        AdamState {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            step: 0,
            beta1: BETA1,
            beta2: BETA2,
            eps: ADAM_EPS,
        }
    }

    /// One bias-corrected Adam update of `w` in place.
    pub fn update(&mut self, w: &mut Array2<f64>, grad: &Array2<f64>, lr: f64) {
        assert_eq!(w.dim(), grad.dim(), "weight and gradient shapes differ");
        assert_eq!(w.dim(), self.m.dim(), "optimizer state shape differs");
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        Zip::from(w)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(grad)
            .for_each(|w, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            });
    }
}

pub fn adam_step(state: &mut AdamState, w: &mut Array2<f64>, grad: &Array2<f64>, lr: f64) {
    state.update(w, grad, lr);
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_leaves_weights() {
        let mut w = array![[0.3, -0.2], [1.0, 4.0]];
        let before = w.clone();
        let mut st = AdamState::new(w.dim());
        adam_step(&mut st, &mut w, &Array2::zeros((2, 2)), 0.1);
        assert_eq!(w, before);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut w = array![[2.0]];
        let mut st = AdamState::new((1, 1));
        adam_step(&mut st, &mut w, &array![[1.0]], 0.1);
        let expected = 2.0 - 0.1 / (1.0 + 1e-8);
        assert!((w[[0, 0]] - expected).abs() < 1e-15);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut w = array![[0.5, -0.5, 0.1]];
            let mut st = AdamState::new(w.dim());
            for i in 0..20 {
                let g = w.mapv(|x| 2.0 * x + i as f64 * 0.01);
                st.update(&mut w, &g, 0.05);
            }
            w
        };
        assert_eq!(run(), run());
    }
}
