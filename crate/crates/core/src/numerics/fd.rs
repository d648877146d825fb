//! Central finite-difference verification of the analytic gradients.
//!
//! The reference path re-evaluates the network entirely in f64 so the
//! difference quotient is not drowned by single-precision rounding. Against
//! a probe functional phi = u . f(x), every parameter and input coordinate
//! is perturbed by +-h and compared with the backprop result.

use crate::error::Result;
use crate::numerics::mlp::{Mlp, OutputActivation};

const FD_STEP: f64 = 1e-5;
/// Coordinates with |analytic| below this are compared absolutely.
const ABS_FLOOR: f64 = 1e-8;

/// Where the worst disagreement lives.
#[derive(Debug, Clone, PartialEq)]
pub enum Coordinate {
    Weight { layer: usize, index: usize },
    Bias { layer: usize, index: usize },
    Input { index: usize },
}

#[derive(Debug, Clone)]
pub struct FdReport {
    pub max_param_err: f64,
    pub worst_param: Coordinate,
    pub max_input_err: f64,
    pub worst_input: Coordinate,
    pub tolerance: f64,
    pub pass: bool,
}

impl std::fmt::Display for FdReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "params: max err {:.3e} at {:?}; input: max err {:.3e} at {:?}; tol {:.1e} -> {}",
            self.max_param_err,
            self.worst_param,
            self.max_input_err,
            self.worst_input,
            self.tolerance,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// f64 mirror of the network parameters.
struct Net64 {
    w: Vec<Vec<f64>>, // row-major (fan_in x fan_out)
    b: Vec<Vec<f64>>,
    sizes: Vec<usize>,
    activation: OutputActivation,
}

impl Net64 {
    fn from_mlp(net: &Mlp) -> Self {
        Net64 {
            w: net
                .layers()
                .iter()
                .map(|l| l.w.iter().map(|&v| v as f64).collect())
                .collect(),
            b: net
                .layers()
                .iter()
                .map(|l| l.b.iter().map(|&v| v as f64).collect())
                .collect(),
            sizes: net.layer_sizes().to_vec(),
            activation: net.output_activation(),
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n_layers = self.w.len();
        let mut a = x.to_vec();
        for li in 0..n_layers {
            let (fan_in, fan_out) = (self.sizes[li], self.sizes[li + 1]);
            let mut z = self.b[li].clone();
            for i in 0..fan_in {
                let ai = a[i];
                let row = &self.w[li][i * fan_out..(i + 1) * fan_out];
                for (j, &wij) in row.iter().enumerate() {
                    z[j] += ai * wij;
                }
            }
            if li + 1 < n_layers {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            } else {
                match self.activation {
                    OutputActivation::Identity => {}
                    OutputActivation::Softplus => {
                        for v in z.iter_mut() {
                            *v = v.max(0.0) + (-v.abs()).exp().ln_1p();
                        }
                    }
                    OutputActivation::Tanh => {
                        for v in z.iter_mut() {
                            *v = v.tanh();
                        }
                    }
                }
            }
            a = z;
        }
        a
    }
}

fn probe(y: &[f64], u: &[f64]) -> f64 {
    y.iter().zip(u).map(|(a, b)| a * b).sum()
}

fn coord_error(analytic: f64, fd: f64) -> f64 {
    if analytic.abs() < ABS_FLOOR {
        (analytic - fd).abs()
    } else {
        (analytic - fd).abs() / analytic.abs()
    }
}

/// Fixed, deterministic probe vector: distinct nonzero weights per output.
fn probe_vector(len: usize) -> Vec<f32> {
    (0..len)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + 0.37 * j as f32)
        })
        .collect()
}

/// Compare backprop gradients (parameters and input) against central finite
/// differences of the f64 reference forward pass.
pub fn finite_diff_check(net: &Mlp, x: &[f32], tolerance: f64) -> Result<FdReport> {
    let u32v = probe_vector(net.output_dim());
    let u64v: Vec<f64> = u32v.iter().map(|&v| v as f64).collect();
    let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();

    let analytic_p = net.grad_params(x, &u32v)?;
    let analytic_x = net.grad_input(x, &u32v)?;

    let mut ref64 = Net64::from_mlp(net);

    let mut max_param_err = 0.0f64;
    let mut worst_param = Coordinate::Weight { layer: 0, index: 0 };
    for li in 0..ref64.w.len() {
        // row-major logical order matches the f64 mirror's flat layout
        let analytic_w: Vec<f32> = analytic_p.w[li].iter().copied().collect();
        for idx in 0..ref64.w[li].len() {
            let orig = ref64.w[li][idx];
            ref64.w[li][idx] = orig + FD_STEP;
            let plus = probe(&ref64.forward(&x64), &u64v);
            ref64.w[li][idx] = orig - FD_STEP;
            let minus = probe(&ref64.forward(&x64), &u64v);
            ref64.w[li][idx] = orig;
            let fd = (plus - minus) / (2.0 * FD_STEP);
            let err = coord_error(analytic_w[idx] as f64, fd);
            if err > max_param_err {
                max_param_err = err;
                worst_param = Coordinate::Weight { layer: li, index: idx };
            }
        }
        for idx in 0..ref64.b[li].len() {
            let orig = ref64.b[li][idx];
            ref64.b[li][idx] = orig + FD_STEP;
            let plus = probe(&ref64.forward(&x64), &u64v);
            ref64.b[li][idx] = orig - FD_STEP;
            let minus = probe(&ref64.forward(&x64), &u64v);
            ref64.b[li][idx] = orig;
            let fd = (plus - minus) / (2.0 * FD_STEP);
            let err = coord_error(analytic_p.b[li][idx] as f64, fd);
            if err > max_param_err {
                max_param_err = err;
                worst_param = Coordinate::Bias { layer: li, index: idx };
            }
        }
    }

    let mut max_input_err = 0.0f64;
    let mut worst_input = Coordinate::Input { index: 0 };
    let mut xp = x64.clone();
    for idx in 0..xp.len() {
        let orig = xp[idx];
        xp[idx] = orig + FD_STEP;
        let plus = probe(&ref64.forward(&xp), &u64v);
        xp[idx] = orig - FD_STEP;
        let minus = probe(&ref64.forward(&xp), &u64v);
        xp[idx] = orig;
        let fd = (plus - minus) / (2.0 * FD_STEP);
        let err = coord_error(analytic_x[idx] as f64, fd);
        if err > max_input_err {
            max_input_err = err;
            worst_input = Coordinate::Input { index: idx };
        }
    }

    Ok(FdReport {
        max_param_err,
        worst_param,
        max_input_err,
        worst_input,
        tolerance,
        pass: max_param_err <= tolerance && max_input_err <= tolerance,
    })
}
