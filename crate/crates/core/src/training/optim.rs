//! First-order optimizers over a flat parameter vector.

use serde::{Deserialize, Serialize};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    Adam,
    AdamW,
    RAdam,
    /// Plain gradient descent.
    Sgd,
}

impl OptimizerKind {
    pub fn label(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamW => "adamw",
            OptimizerKind::RAdam => "radam",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, weight_decay: f64, len: usize) -> Self {
        let moments = if kind == OptimizerKind::Sgd { 0 } else { len };
        Self {
            kind,
            weight_decay,
            m: vec![0.0; moments],
            v: vec![0.0; moments],
            step: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// One update with learning rate `lr`. `grad` may be modified in place.
    pub fn step(&mut self, params: &mut [f64], grad: &mut [f64], lr: f64) {
        self.step += 1;
        let wd = self.weight_decay;
        match self.kind {
            OptimizerKind::AdamW => {
                if wd != 0.0 {
                    let shrink = 1.0 - lr * wd;
                    params.iter_mut().for_each(|p| *p *= shrink);
                }
            }
            _ => {
                if wd != 0.0 {
                    for (g, p) in grad.iter_mut().zip(params.iter()) {
                        *g += wd * p;
                    }
                }
            }
        }

        if self.kind == OptimizerKind::Sgd {
            for (p, g) in params.iter_mut().zip(grad.iter()) {
                *p -= lr * g;
            }
            return;
        }

        self.beta1_pow *= BETA1;
        self.beta2_pow *= BETA2;
        for ((m, v), g) in self.m.iter_mut().zip(self.v.iter_mut()).zip(grad.iter()) {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        }
        let bc1 = 1.0 - self.beta1_pow;
        let bc2 = 1.0 - self.beta2_pow;

        match self.kind {
            OptimizerKind::Adam | OptimizerKind::AdamW => {
                let step_size = lr / bc1;
                let bc2_sqrt = bc2.sqrt();
                for ((p, m), v) in params.iter_mut().zip(&self.m).zip(&self.v) {
                    *p -= step_size * m / (v.sqrt() / bc2_sqrt + EPS);
                }
            }
            OptimizerKind::RAdam => {
                let rho_inf = 2.0 / (1.0 - BETA2) - 1.0;
                let t = self.step as f64;
                let rho_t = rho_inf - 2.0 * t * self.beta2_pow / bc2;
                if rho_t > 5.0 {
                    let r = ((rho_t - 4.0) * (rho_t - 2.0) * rho_inf
                        / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t))
                        .sqrt();
                    let bc2_sqrt = bc2.sqrt();
                    for ((p, m), v) in params.iter_mut().zip(&self.m).zip(&self.v) {
                        let m_hat = m / bc1;
                        *p -= lr * r * m_hat * bc2_sqrt / (v.sqrt() + EPS);
                    }
                } else {
                    for (p, m) in params.iter_mut().zip(&self.m) {
                        *p -= lr * m / bc1;
                    }
                }
            }
            OptimizerKind::Sgd => unreachable!(),
        }
    }
}
