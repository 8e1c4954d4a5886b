use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl AdamWHyper {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay }
    }
}

/// AdamW with decoupled weight decay:
/// p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub hyper: AdamWHyper,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamW {
    pub fn new(hyper: AdamWHyper, n_params: usize) -> Self {
        Self { hyper, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient shape mismatch");
        self.t += 1;
        let AdamWHyper { lr, beta1, beta2, eps, weight_decay } = self.hyper;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * (m_hat / (v_hat.sqrt() + eps) + weight_decay * params[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_closed_form() {
        let mut opt = AdamW::new(AdamWHyper::new(0.1, 0.0), 1);
        let mut w = [1.0];
        opt.step(&mut w, &[2.0]);
        // m_hat = 2, v_hat = 4: update = 0.1 * 2 / (2 + 1e-8)
        assert_eq!(w[0], 1.0 - 0.1 * 2.0 / (2.0 + 1e-8));
        assert!((w[0] - 0.9).abs() < 1e-8);
        assert_eq!(opt.t, 1);
    }

    #[test]
    fn zero_grad_and_zero_lr_leave_params() {
        let mut w = [0.3, -1.2];
        AdamW::new(AdamWHyper::new(0.1, 0.0), 2).step(&mut w, &[0.0, 0.0]);
        assert_eq!(w, [0.3, -1.2]);
        AdamW::new(AdamWHyper::new(0.0, 0.5), 2).step(&mut w, &[5.0, -7.0]);
        assert_eq!(w, [0.3, -1.2]);
    }

    #[test]
    fn decoupled_decay_differs_from_l2_penalty() {
        // f(w) = (w - 3)^2 / 2
        let (lambda, lr) = (0.1, 0.05);
        let mut a = [0.0];
        let mut b = [0.0];
        let mut oa = AdamW::new(AdamWHyper::new(lr, lambda), 1);
        let mut ob = AdamW::new(AdamWHyper::new(lr, 0.0), 1);
        for _ in 0..2000 {
            let ga = a[0] - 3.0;
            let gb = b[0] - 3.0 + lambda * b[0];
            oa.step(&mut a, &[ga]);
            ob.step(&mut b, &[gb]);
        }
        // L2 penalty converges to 3 / (1 + lambda); decoupled decay to the
        // point where the normalized step balances lr * lambda * w
        assert!((b[0] - 3.0 / 1.1).abs() < 1e-2);
        assert!((a[0] - b[0]).abs() > 0.1, "a={} b={}", a[0], b[0]);
    }
}
