//! Differentiable-approximator engine: small MLPs, gradients with respect
//! to parameters and inputs, Adam, soft target blending, checkpoints, and
//! a finite-difference checker.

mod adam;
mod checkpoint;
mod fd;
mod mlp;

pub use adam::{opt_step, AdamState};
pub use checkpoint::{load_mlp, read_mlp, save_mlp, write_mlp};
pub use fd::{finite_diff_check, Coordinate, FdReport};
pub use mlp::{concat, euclid, euclid_view, fill_row, soft_update, ForwardCache, Gradients, Layer, Mlp, OutputActivation};

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn zero_net(sizes: &[usize], act: OutputActivation, bias_last: f32) -> Mlp {
        let mut layers = Vec::new();
        for win in sizes.windows(2) {
            layers.push(Layer {
                w: Array2::zeros((win[0], win[1])),
                b: Array1::zeros(win[1]),
            });
        }
        let last = layers.len() - 1;
        layers[last].b.fill(bias_last);
        Mlp::from_layers(layers, act).unwrap()
    }

    #[test]
    fn forward_zero_weights_gives_activated_bias() {
        let net = zero_net(&[3, 4, 2], OutputActivation::Softplus, 1.5);
        let y = net.forward(&[0.3, -0.7, 2.0]).unwrap();
        let expect = (1.5f32.exp() + 1.0).ln(); // softplus(1.5)
        for v in y {
            assert!((v - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn forward_identity_layer_passes_through() {
        let layers = vec![Layer {
            w: Array2::eye(2),
            b: Array1::zeros(2),
        }];
        let net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    /// Independent straight-line oracle: f64 matrix chain written separately
    /// from the library forward pass.
    fn oracle_forward(net: &Mlp, x: &[f32]) -> Vec<f64> {
        let n = net.layers().len();
        let mut a: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        for (li, layer) in net.layers().iter().enumerate() {
            let (fan_in, fan_out) = (layer.w.nrows(), layer.w.ncols());
            let mut z = vec![0.0f64; fan_out];
            for j in 0..fan_out {
                let mut s = layer.b[j] as f64;
                for i in 0..fan_in {
                    s += a[i] * layer.w[[i, j]] as f64;
                }
                z[j] = s;
            }
            if li + 1 < n {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            a = z;
        }
        a
    }

    #[test]
    fn forward_matches_independent_chain() {
        let mut r = rng(7);
        let net = Mlp::new(&[2, 8, 1], OutputActivation::Identity, &mut r).unwrap();
        let x = [0.42f32, -1.3];
        let y = net.forward(&x).unwrap();
        let oracle = oracle_forward(&net, &x);
        assert!((y[0] as f64 - oracle[0]).abs() < 1e-5, "{} vs {}", y[0], oracle[0]);
    }

    #[test]
    fn forward_is_deterministic_bitwise() {
        let mut r = rng(3);
        let net = Mlp::new(&[4, 16, 3], OutputActivation::Tanh, &mut r).unwrap();
        let x = [0.1, -0.2, 0.33, 0.9];
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batched_forward_matches_per_sample() {
        let mut r = rng(11);
        let net = Mlp::new(&[3, 10, 2], OutputActivation::Softplus, &mut r).unwrap();
        let rows = [[0.5f32, -0.1, 0.8], [1.0, 2.0, -0.4]];
        let x = Array2::from_shape_fn((2, 3), |(i, j)| rows[i][j]);
        let batch = net.forward_batch(&x).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let single = net.forward(row).unwrap();
            for j in 0..2 {
                assert!((batch[[i, j]] - single[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let mut r = rng(1);
        let net = Mlp::new(&[3, 4, 1], OutputActivation::Identity, &mut r).unwrap();
        assert!(net.forward(&[1.0, 2.0]).is_err());
        assert!(net.grad_params(&[1.0, 2.0, 3.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut r = rng(5);
        let net = Mlp::new(&[3, 5, 2], OutputActivation::Identity, &mut r).unwrap();
        let g = net.grad_params(&[0.2, 0.4, -0.6], &[0.0, 0.0]).unwrap();
        assert!(g.max_abs() == 0.0);
        let gi = net.grad_input(&[0.2, 0.4, -0.6], &[0.0, 0.0]).unwrap();
        assert!(gi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_neuron_gradients_match_calculus() {
        // y = w x + b with w = 0.5, b = 0.1, x = 3: d/dw = 3, d/db = 1
        let layers = vec![Layer {
            w: Array2::from_elem((1, 1), 0.5),
            b: Array1::from_elem(1, 0.1),
        }];
        let net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        let g = net.grad_params(&[3.0], &[1.0]).unwrap();
        assert!((g.w[0][[0, 0]] - 3.0).abs() < 1e-7);
        assert!((g.b[0][0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn linear_scaling_input_gradient() {
        // y = 2x: input gradient for unit upstream is 2
        let layers = vec![Layer {
            w: Array2::from_elem((1, 1), 2.0),
            b: Array1::zeros(1),
        }];
        let net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        let gi = net.grad_input(&[1.7], &[1.0]).unwrap();
        assert!((gi[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn zero_weight_net_has_zero_input_gradient() {
        let net = zero_net(&[2, 3, 1], OutputActivation::Identity, 0.7);
        let gi = net.grad_input(&[1.0, -1.0], &[1.0]).unwrap();
        assert!(gi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn finite_difference_check_random_nets() {
        for (seed, sizes, act) in [
            (21u64, vec![3usize, 5, 2], OutputActivation::Identity),
            (22, vec![4, 8, 8, 1], OutputActivation::Softplus),
            (23, vec![2, 6, 3], OutputActivation::Tanh),
        ] {
            let mut r = rng(seed);
            let net = Mlp::new(&sizes, act, &mut r).unwrap();
            let x: Vec<f32> = (0..sizes[0]).map(|i| 0.3 + 0.17 * i as f32).collect();
            let report = finite_diff_check(&net, &x, 1e-4).unwrap();
            assert!(report.pass, "{report}");
        }
    }

    #[test]
    fn opt_step_zero_gradients_leave_params() {
        let mut r = rng(9);
        let mut net = Mlp::new(&[2, 4, 1], OutputActivation::Identity, &mut r).unwrap();
        let before = net.clone();
        let mut st = AdamState::new(&net, 1e-3);
        let g = Gradients::zeros_like(&net);
        opt_step(&mut net, &g, &mut st).unwrap();
        assert_eq!(st.step_count(), 1);
        for (a, b) in net.layers().iter().zip(before.layers().iter()) {
            assert_eq!(a.w, b.w);
            assert_eq!(a.b, b.b);
        }
    }

    #[test]
    fn opt_step_constant_gradient_moves_monotonically() {
        let layers = vec![Layer {
            w: Array2::from_elem((1, 1), 0.0),
            b: Array1::zeros(1),
        }];
        let mut net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        let mut st = AdamState::new(&net, 1e-2);
        let mut g = Gradients::zeros_like(&net);
        g.w[0][[0, 0]] = 0.5; // positive gradient: parameter must decrease
        let mut prev = net.layers()[0].w[[0, 0]];
        for _ in 0..50 {
            opt_step(&mut net, &g, &mut st).unwrap();
            let cur = net.layers()[0].w[[0, 0]];
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn opt_step_minimizes_quadratic_bowl() {
        // f(w) = (w - 3)^2, gradient 2(w - 3)
        let layers = vec![Layer {
            w: Array2::from_elem((1, 1), -1.0),
            b: Array1::zeros(1),
        }];
        let mut net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
        let mut st = AdamState::new(&net, 1e-2);
        for _ in 0..5000 {
            let w = net.layers()[0].w[[0, 0]];
            let mut g = Gradients::zeros_like(&net);
            g.w[0][[0, 0]] = 2.0 * (w - 3.0);
            opt_step(&mut net, &g, &mut st).unwrap();
        }
        let w = net.layers()[0].w[[0, 0]];
        assert!((w - 3.0).abs() < 1e-2, "w = {w}");
    }

    #[test]
    fn opt_step_rejects_non_finite_gradients() {
        let mut r = rng(2);
        let mut net = Mlp::new(&[1, 1], OutputActivation::Identity, &mut r).unwrap();
        let before = net.clone();
        let mut st = AdamState::new(&net, 1e-3);
        let mut g = Gradients::zeros_like(&net);
        g.w[0][[0, 0]] = f32::NAN;
        assert!(opt_step(&mut net, &g, &mut st).is_err());
        assert_eq!(st.step_count(), 0);
        assert_eq!(net.layers()[0].w, before.layers()[0].w);
    }

    #[test]
    fn soft_update_blends() {
        let mk = |v: f32| {
            Mlp::from_layers(
                vec![Layer {
                    w: Array2::from_elem((1, 1), v),
                    b: Array1::from_elem(1, v),
                }],
                OutputActivation::Identity,
            )
            .unwrap()
        };
        // tau = 1: exact copy
        let mut target = mk(0.0);
        soft_update(&mut target, &mk(1.0), 1.0).unwrap();
        assert_eq!(target.layers()[0].w[[0, 0]], 1.0);
        // tau = 0: unchanged
        let mut target = mk(0.25);
        soft_update(&mut target, &mk(1.0), 0.0).unwrap();
        assert_eq!(target.layers()[0].w[[0, 0]], 0.25);
        // tau = 0.05 blends
        let mut target = mk(0.0);
        soft_update(&mut target, &mk(1.0), 0.05).unwrap();
        assert!((target.layers()[0].w[[0, 0]] - 0.05).abs() < 1e-7);
    }

    #[test]
    fn soft_update_tau_one_matches_online_outputs() {
        let mut r = rng(31);
        let online = Mlp::new(&[3, 6, 2], OutputActivation::Tanh, &mut r).unwrap();
        let mut target = Mlp::new(&[3, 6, 2], OutputActivation::Tanh, &mut r).unwrap();
        soft_update(&mut target, &online, 1.0).unwrap();
        let x = [0.4, -0.9, 0.05];
        assert_eq!(online.forward(&x).unwrap(), target.forward(&x).unwrap());
    }

    #[test]
    fn soft_update_rejects_architecture_mismatch() {
        let mut r = rng(4);
        let online = Mlp::new(&[2, 4, 1], OutputActivation::Identity, &mut r).unwrap();
        let mut target = Mlp::new(&[2, 5, 1], OutputActivation::Identity, &mut r).unwrap();
        assert!(soft_update(&mut target, &online, 0.5).is_err());
    }

    #[test]
    fn checkpoint_roundtrip_preserves_outputs_bitwise() {
        let mut r = rng(42);
        let net = Mlp::new(&[4, 12, 12, 2], OutputActivation::Softplus, &mut r).unwrap();
        let mut buf = Vec::new();
        write_mlp(&mut buf, &net).unwrap();
        let restored = read_mlp(buf.as_slice()).unwrap();
        let x = [0.77, -0.3, 1.9, 0.0];
        assert_eq!(net.forward(&x).unwrap(), restored.forward(&x).unwrap());
        assert_eq!(net.layer_sizes(), restored.layer_sizes());
    }

    proptest::proptest! {
        #[test]
        fn checkpoint_roundtrips_arbitrary_finite_bits(vals in proptest::collection::vec(-1e30f32..1e30, 6)) {
            let layers = vec![Layer {
                w: Array2::from_shape_vec((2, 2), vals[0..4].to_vec()).unwrap(),
                b: Array1::from_vec(vals[4..6].to_vec()),
            }];
            let net = Mlp::from_layers(layers, OutputActivation::Identity).unwrap();
            let mut buf = Vec::new();
            write_mlp(&mut buf, &net).unwrap();
            let back = read_mlp(buf.as_slice()).unwrap();
            for (a, b) in net.layers().iter().zip(back.layers().iter()) {
                for (x, y) in a.w.iter().zip(b.w.iter()) {
                    proptest::prop_assert_eq!(x.to_bits(), y.to_bits());
                }
                for (x, y) in a.b.iter().zip(b.b.iter()) {
                    proptest::prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
