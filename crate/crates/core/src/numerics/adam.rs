//! Adaptive moment optimizer with bias correction.

use crate::error::{Error, Result};
use crate::numerics::mlp::{Gradients, Mlp};
use ndarray::{Array1, Array2, Zip};

/// Per-network optimizer state: first/second moment accumulators shaped
/// like the parameters, plus the step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_w: Vec<Array2<f32>>,
    v_w: Vec<Array2<f32>>,
    m_b: Vec<Array1<f32>>,
    v_b: Vec<Array1<f32>>,
    step: u64,
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
}

impl AdamState {
    pub fn new(net: &Mlp, lr: f32) -> Self {
        AdamState {
            m_w: net.layers().iter().map(|l| Array2::zeros(l.w.dim())).collect(),
            v_w: net.layers().iter().map(|l| Array2::zeros(l.w.dim())).collect(),
            m_b: net.layers().iter().map(|l| Array1::zeros(l.b.len())).collect(),
            v_b: net.layers().iter().map(|l| Array1::zeros(l.b.len())).collect(),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One optimizer step. Rejects non-finite gradients without touching the
/// network, so a diverging loss surfaces instead of silently corrupting
/// parameters.
pub fn opt_step(net: &mut Mlp, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.w.len() != net.layers().len() || grads.b.len() != net.layers().len() {
        return Err(Error::ArchitectureMismatch("gradient layer count".into()));
    }
    for (li, layer) in net.layers().iter().enumerate() {
        if grads.w[li].dim() != layer.w.dim() || grads.b[li].len() != layer.b.len() {
            return Err(Error::ArchitectureMismatch(format!("gradient shape at layer {li}")));
        }
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradients"));
    }

    state.step += 1;
    let t = state.step as f32;
    let bc1 = 1.0 - state.beta1.powf(t);
    let bc2 = 1.0 - state.beta2.powf(t);
    let (lr, b1, b2, eps) = (state.lr, state.beta1, state.beta2, state.eps);

    let rule = move |p: &mut f32, g: &f32, m: &mut f32, v: &mut f32| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for (li, layer) in net.layers_mut().iter_mut().enumerate() {
        Zip::from(&mut layer.w)
            .and(&grads.w[li])
            .and(&mut state.m_w[li])
            .and(&mut state.v_w[li])
            .for_each(rule);
        Zip::from(&mut layer.b)
            .and(&grads.b[li])
            .and(&mut state.m_b[li])
            .and(&mut state.v_b[li])
            .for_each(rule);
    }
    Ok(())
}
