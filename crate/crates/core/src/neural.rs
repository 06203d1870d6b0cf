//! From-scratch fully connected networks: forward pass, reverse-mode
//! gradients for parameters and inputs, and Adam with optional L2 decay.
//!
//! Everything is 64-bit and deterministic given a seeded rng. Critic
//! networks keep the action out of the first hidden layer: the last
//! `inject_width` components of the input vector are concatenated onto the
//! first hidden layer's output before the second hidden layer.

use crate::error::{Error, Result};
use rand::Rng;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn code(&self) -> u32 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Tanh),
            2 => Ok(Activation::Linear),
            other => Err(Error::Checkpoint(format!(
                "unknown activation code {other}"
            ))),
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative in terms of the pre-activation z. ReLU subgradient at 0 is 0.
    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

/// One affine layer; weights are row-major `[output_width][input_width]`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Gradients shaped like a network's parameters.
#[derive(Debug, Clone)]
pub struct NetGradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl NetGradients {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &NetGradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for x in a.iter_mut() {
                *x *= s;
            }
        }
    }
}

/// Cached activations from one forward pass, consumed by the backward passes.
pub struct ForwardCache {
    /// Per-layer input vectors (after any injection concat).
    layer_inputs: Vec<Vec<f64>>,
    /// Per-layer pre-activations.
    pre_activations: Vec<Vec<f64>>,
}

/// A fully connected network with per-parameter Adam state.
#[derive(Debug, Clone)]
pub struct MlpNetwork {
    layers: Vec<Layer>,
    /// Width of the input slice consumed by the first layer.
    primary_input: usize,
    /// Width of the input tail injected before layer 1, if any.
    inject_width: usize,
    pub learning_rate: f64,
    /// L2 weight-decay coefficient; applied to weights only.
    pub l2: f64,
    moment1_w: Vec<Vec<f64>>,
    moment2_w: Vec<Vec<f64>>,
    moment1_b: Vec<Vec<f64>>,
    moment2_b: Vec<Vec<f64>>,
    adam_step_count: u64,
}

impl MlpNetwork {
    /// Initializes a plain chain of layers: the final layer from
    /// U[-3e-3, 3e-3], all others from U[-1/sqrt(f), 1/sqrt(f)] with f the
    /// layer fan-in. Adam moments start at zero.
    pub fn init(specs: &[LayerSpec], learning_rate: f64, l2: f64, rng: &mut impl Rng) -> Self {
        Self::init_with_injection(specs, 0, learning_rate, l2, rng)
    }

    /// As `init`, but the last `inject_width` input components bypass the
    /// first layer and join the second layer's input.
    pub fn init_with_injection(
        specs: &[LayerSpec],
        inject_width: usize,
        learning_rate: f64,
        l2: f64,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(!specs.is_empty());
        let last = specs.len() - 1;
        let layers: Vec<Layer> = specs
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let bound = if i == last {
                    3e-3
                } else {
                    1.0 / (spec.input_width as f64).sqrt()
                };
                let weights = (0..spec.input_width * spec.output_width)
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect();
                let biases = (0..spec.output_width)
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect();
                Layer {
                    spec: *spec,
                    weights,
                    biases,
                }
            })
            .collect();
        Self::from_layers(layers, inject_width, learning_rate, l2)
    }

    /// Wraps existing layers (e.g. loaded from a checkpoint) with fresh Adam
    /// state.
    pub fn from_layers(
        layers: Vec<Layer>,
        inject_width: usize,
        learning_rate: f64,
        l2: f64,
    ) -> Self {
        let primary_input = layers[0].spec.input_width;
        let moment1_w = layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let moment2_w = layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let moment1_b = layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        let moment2_b = layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        Self {
            layers,
            primary_input,
            inject_width,
            learning_rate,
            l2,
            moment1_w,
            moment2_w,
            moment1_b,
            moment2_b,
            adam_step_count: 0,
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.primary_input + self.inject_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().spec.output_width
    }

    pub fn inject_width(&self) -> usize {
        self.inject_width
    }

    pub fn adam_step_count(&self) -> u64 {
        self.adam_step_count
    }

    /// Applies `f` to every weight and bias, in a fixed order.
    pub fn visit_params_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            for w in &mut layer.weights {
                f(w);
            }
            for b in &mut layer.biases {
                f(b);
            }
        }
    }

    /// Soft update: every parameter moves to tau*live + (1-tau)*self.
    pub fn soft_update_from(&mut self, live: &MlpNetwork, tau: f64) {
        for (t, l) in self.layers.iter_mut().zip(&live.layers) {
            for (tw, lw) in t.weights.iter_mut().zip(&l.weights) {
                *tw = tau * lw + (1.0 - tau) * *tw;
            }
            for (tb, lb) in t.biases.iter_mut().zip(&l.biases) {
                *tb = tau * lb + (1.0 - tau) * *tb;
            }
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.input_width(),
                got: input.len(),
            });
        }
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = input[..self.primary_input].to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            if li == 1 && self.inject_width > 0 {
                current.extend_from_slice(&input[self.primary_input..]);
            }
            debug_assert_eq!(current.len(), layer.spec.input_width);
            let mut pre = Vec::with_capacity(layer.spec.output_width);
            for o in 0..layer.spec.output_width {
                let row = &layer.weights[o * layer.spec.input_width..(o + 1) * layer.spec.input_width];
                let mut z = layer.biases[o];
                for (w, x) in row.iter().zip(&current) {
                    z += w * x;
                }
                pre.push(z);
            }
            layer_inputs.push(std::mem::take(&mut current));
            current = pre.iter().map(|&z| layer.spec.activation.apply(z)).collect();
            pre_activations.push(pre);
        }
        Ok((
            current,
            ForwardCache {
                layer_inputs,
                pre_activations,
            },
        ))
    }

    /// Output of the network without keeping the cache.
    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Reverse-mode pass: gradients of `output . upstream` with respect to
    /// every parameter and to the full input vector.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
    ) -> Result<(NetGradients, Vec<f64>)> {
        if upstream.len() != self.output_width() {
            return Err(Error::ShapeMismatch {
                expected: self.output_width(),
                got: upstream.len(),
            });
        }
        let mut grads = NetGradients::zeros_like(self);
        let mut input_grad = vec![0.0; self.input_width()];
        let mut delta = upstream.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let pre = &self.pre_acts(cache, li);
            let inputs = &cache.layer_inputs[li];
            // through the activation
            for (d, z) in delta.iter_mut().zip(pre.iter()) {
                *d *= layer.spec.activation.derivative(*z);
            }
            let in_w = layer.spec.input_width;
            let gw = &mut grads.weights[li];
            for o in 0..layer.spec.output_width {
                let d = delta[o];
                grads.biases[li][o] = d;
                let row = &mut gw[o * in_w..(o + 1) * in_w];
                for (g, x) in row.iter_mut().zip(inputs) {
                    *g = d * x;
                }
            }
            // propagate to the layer input
            let mut prev = vec![0.0; in_w];
            for o in 0..layer.spec.output_width {
                let d = delta[o];
                let row = &layer.weights[o * in_w..(o + 1) * in_w];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            if li == 1 && self.inject_width > 0 {
                // split off the injected slice
                let base = in_w - self.inject_width;
                for k in 0..self.inject_width {
                    input_grad[self.primary_input + k] += prev[base + k];
                }
                prev.truncate(base);
            }
            if li == 0 {
                for (ig, p) in input_grad.iter_mut().zip(&prev) {
                    *ig += p;
                }
            }
            delta = prev;
        }
        Ok((grads, input_grad))
    }

    fn pre_acts<'a>(&self, cache: &'a ForwardCache, li: usize) -> &'a [f64] {
        &cache.pre_activations[li]
    }

    /// Parameter gradients only.
    pub fn backward_params(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<NetGradients> {
        self.backward(cache, upstream).map(|(g, _)| g)
    }

    /// Input gradient only. For networks with injection, the tail of the
    /// returned vector is the gradient with respect to the injected slice.
    pub fn backward_input(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Vec<f64>> {
        self.backward(cache, upstream).map(|(_, ig)| ig)
    }

    /// One Adam update with bias correction. L2 decay (if configured) is
    /// added to the weight gradients before the moment update; biases are
    /// never decayed.
    pub fn adam_step(&mut self, grads: &NetGradients) {
        self.adam_step_count += 1;
        let t = self.adam_step_count as i32;
        let bc1 = 1.0 - ADAM_BETA1.powi(t);
        let bc2 = 1.0 - ADAM_BETA2.powi(t);
        let lr = self.learning_rate;
        let l2 = self.l2;
        for (li, layer) in self.layers.iter_mut().enumerate() {
            for (i, w) in layer.weights.iter_mut().enumerate() {
                let g = grads.weights[li][i] + l2 * *w;
                let m = &mut self.moment1_w[li][i];
                let v = &mut self.moment2_w[li][i];
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
            }
            for (i, b) in layer.biases.iter_mut().enumerate() {
                let g = grads.biases[li][i];
                let m = &mut self.moment1_b[li][i];
                let v = &mut self.moment2_b[li][i];
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                *b -= lr * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Actor topology: state -> h1 relu -> h2 relu -> actions tanh.
pub fn actor_network(
    state_dim: usize,
    action_dim: usize,
    hidden: (usize, usize),
    learning_rate: f64,
    rng: &mut impl Rng,
) -> MlpNetwork {
    MlpNetwork::init(
        &[
            LayerSpec {
                input_width: state_dim,
                output_width: hidden.0,
                activation: Activation::Relu,
            },
            LayerSpec {
                input_width: hidden.0,
                output_width: hidden.1,
                activation: Activation::Relu,
            },
            LayerSpec {
                input_width: hidden.1,
                output_width: action_dim,
                activation: Activation::Tanh,
            },
        ],
        learning_rate,
        0.0,
        rng,
    )
}

/// Critic topology: the action joins at the second hidden layer.
/// state -> h1 relu; [h1, action] -> h2 relu -> scalar linear.
pub fn critic_network(
    state_dim: usize,
    action_dim: usize,
    hidden: (usize, usize),
    learning_rate: f64,
    l2: f64,
    rng: &mut impl Rng,
) -> MlpNetwork {
    MlpNetwork::init_with_injection(
        &[
            LayerSpec {
                input_width: state_dim,
                output_width: hidden.0,
                activation: Activation::Relu,
            },
            LayerSpec {
                input_width: hidden.0 + action_dim,
                output_width: hidden.1,
                activation: Activation::Relu,
            },
            LayerSpec {
                input_width: hidden.1,
                output_width: 1,
                activation: Activation::Linear,
            },
        ],
        action_dim,
        learning_rate,
        l2,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn relative_error(a: f64, n: f64) -> f64 {
        (a - n).abs() / a.abs().max(n.abs()).max(1e-2)
    }

    /// Central finite differences of `output . upstream` over every
    /// parameter and input component.
    fn fd_check(net: &mut MlpNetwork, input: &[f64], upstream: &[f64], tol: f64) {
        let h = 1e-6;
        let (_, cache) = net.forward(input).unwrap();
        let (grads, input_grad) = net.backward(&cache, upstream).unwrap();
        let scalar = |net: &MlpNetwork, input: &[f64]| -> f64 {
            net.output(input)
                .unwrap()
                .iter()
                .zip(upstream)
                .map(|(o, u)| o * u)
                .sum()
        };
        // parameters
        for li in 0..net.layers().len() {
            for i in 0..net.layers()[li].weights.len() {
                let orig = net.layers[li].weights[i];
                net.layers[li].weights[i] = orig + h;
                let plus = scalar(net, input);
                net.layers[li].weights[i] = orig - h;
                let minus = scalar(net, input);
                net.layers[li].weights[i] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                assert!(
                    relative_error(grads.weights[li][i], numeric) < tol,
                    "weight {li}/{i}: analytic {} vs fd {}",
                    grads.weights[li][i],
                    numeric
                );
            }
            for i in 0..net.layers()[li].biases.len() {
                let orig = net.layers[li].biases[i];
                net.layers[li].biases[i] = orig + h;
                let plus = scalar(net, input);
                net.layers[li].biases[i] = orig - h;
                let minus = scalar(net, input);
                net.layers[li].biases[i] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                assert!(
                    relative_error(grads.biases[li][i], numeric) < tol,
                    "bias {li}/{i}: analytic {} vs fd {}",
                    grads.biases[li][i],
                    numeric
                );
            }
        }
        // inputs
        let mut x = input.to_vec();
        for i in 0..x.len() {
            let orig = x[i];
            x[i] = orig + h;
            let plus = scalar(net, &x);
            x[i] = orig - h;
            let minus = scalar(net, &x);
            x[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            assert!(
                relative_error(input_grad[i], numeric) < tol,
                "input {i}: analytic {} vs fd {}",
                input_grad[i],
                numeric
            );
        }
    }

    #[test]
    fn init_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let net = actor_network(10, 2, (400, 300), 1e-4, &mut rng);
        let layers = net.layers();
        let f0 = 1.0 / (10f64).sqrt();
        assert!(layers[0].weights.iter().all(|w| w.abs() <= f0));
        let f1 = 1.0 / (400f64).sqrt();
        assert!((f1 - 0.05).abs() < 1e-15);
        assert!(layers[1].weights.iter().all(|w| w.abs() <= f1));
        assert!(layers[2].weights.iter().all(|w| w.abs() <= 3e-3));
        assert!(layers[2].biases.iter().all(|b| b.abs() <= 3e-3));
    }

    #[test]
    fn init_is_deterministic() {
        let a = actor_network(10, 2, (32, 16), 1e-4, &mut ChaCha8Rng::seed_from_u64(5));
        let b = actor_network(10, 2, (32, 16), 1e-4, &mut ChaCha8Rng::seed_from_u64(5));
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            assert_eq!(la.weights, lb.weights);
            assert_eq!(la.biases, lb.biases);
        }
    }

    #[test]
    fn forward_zero_net_tanh() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut net = actor_network(4, 2, (8, 8), 1e-4, &mut rng);
        net.visit_params_mut(|p| *p = 0.0);
        let out = net.output(&[0.3, -0.2, 0.9, 0.1]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn forward_identity_layer() {
        let layer = Layer {
            spec: LayerSpec {
                input_width: 3,
                output_width: 3,
                activation: Activation::Linear,
            },
            weights: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            biases: vec![0.0; 3],
        };
        let net = MlpNetwork::from_layers(vec![layer], 0, 1e-3, 0.0);
        let out = net.output(&[1.5, -2.0, 0.25]).unwrap();
        assert_eq!(out, vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn forward_matches_naive_oracle() {
        // Independent re-implementation of the affine chain for a critic net.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = critic_network(10, 2, (16, 12), 1e-3, 0.0, &mut rng);
        let input: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = net.output(&input).unwrap();

        let layers = net.layers();
        let mut x: Vec<f64> = input[..10].to_vec();
        for (li, layer) in layers.iter().enumerate() {
            if li == 1 {
                x.extend_from_slice(&input[10..]);
            }
            let mut y = Vec::new();
            for o in 0..layer.spec.output_width {
                let mut z = layer.biases[o];
                for i in 0..layer.spec.input_width {
                    z += layer.weights[o * layer.spec.input_width + i] * x[i];
                }
                y.push(match layer.spec.activation {
                    Activation::Relu => z.max(0.0),
                    Activation::Tanh => z.tanh(),
                    Activation::Linear => z,
                });
            }
            x = y;
        }
        assert!((got[0] - x[0]).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_width_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = actor_network(10, 2, (8, 8), 1e-4, &mut rng);
        assert!(matches!(
            net.output(&[0.0; 9]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn single_neuron_gradients() {
        // y = w*x + b with w=3, b=0.5, x=2, upstream 1 -> dw=2, db=1
        let layer = Layer {
            spec: LayerSpec {
                input_width: 1,
                output_width: 1,
                activation: Activation::Linear,
            },
            weights: vec![3.0],
            biases: vec![0.5],
        };
        let net = MlpNetwork::from_layers(vec![layer], 0, 1e-3, 0.0);
        let (_, cache) = net.forward(&[2.0]).unwrap();
        let grads = net.backward_params(&cache, &[1.0]).unwrap();
        assert_eq!(grads.weights[0][0], 2.0);
        assert_eq!(grads.biases[0][0], 1.0);
        // input gradient = W^T upstream
        let ig = net.backward_input(&cache, &[1.0]).unwrap();
        assert_eq!(ig, vec![3.0]);
    }

    #[test]
    fn zero_upstream_means_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = actor_network(5, 2, (8, 6), 1e-4, &mut rng);
        let input: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, cache) = net.forward(&input).unwrap();
        let grads = net.backward_params(&cache, &[0.0, 0.0]).unwrap();
        assert!(grads.weights.iter().flatten().all(|&g| g == 0.0));
        assert!(grads.biases.iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn dead_relu_blocks_input_gradient() {
        let layer0 = Layer {
            spec: LayerSpec {
                input_width: 2,
                output_width: 2,
                activation: Activation::Relu,
            },
            weights: vec![1.0, 0.0, 0.0, 1.0],
            biases: vec![-10.0, -10.0], // all pre-activations negative
        };
        let layer1 = Layer {
            spec: LayerSpec {
                input_width: 2,
                output_width: 1,
                activation: Activation::Linear,
            },
            weights: vec![1.0, 1.0],
            biases: vec![0.0],
        };
        let net = MlpNetwork::from_layers(vec![layer0, layer1], 0, 1e-3, 0.0);
        let (_, cache) = net.forward(&[0.5, 0.5]).unwrap();
        let ig = net.backward_input(&cache, &[1.0]).unwrap();
        assert_eq!(ig, vec![0.0, 0.0]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..10 {
            let h1 = rng.gen_range(3..=16);
            let h2 = rng.gen_range(3..=16);
            let mut net = if trial % 2 == 0 {
                actor_network(6, 2, (h1, h2), 1e-4, &mut rng)
            } else {
                critic_network(6, 2, (h1, h2), 1e-3, 0.0, &mut rng)
            };
            // spread the parameters so pre-activations are away from relu kinks
            net.visit_params_mut(|p| *p *= 3.0);
            let width = net.input_width();
            let input: Vec<f64> = (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let upstream: Vec<f64> = (0..net.output_width())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            fd_check(&mut net, &input, &upstream, 1e-4);
        }
    }

    #[test]
    fn critic_action_gradient_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = critic_network(10, 2, (12, 10), 1e-3, 0.0, &mut rng);
        let input: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, cache) = net.forward(&input).unwrap();
        let ig = net.backward_input(&cache, &[1.0]).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut x = input.clone();
            x[10 + k] += h;
            let plus = net.output(&x).unwrap()[0];
            x[10 + k] -= 2.0 * h;
            let minus = net.output(&x).unwrap()[0];
            let numeric = (plus - minus) / (2.0 * h);
            assert!(relative_error(ig[10 + k], numeric) < 1e-4);
        }
    }

    #[test]
    fn adam_first_step_magnitude() {
        let layer = Layer {
            spec: LayerSpec {
                input_width: 1,
                output_width: 1,
                activation: Activation::Linear,
            },
            weights: vec![0.0],
            biases: vec![0.0],
        };
        let mut net = MlpNetwork::from_layers(vec![layer], 0, 1e-3, 0.0);
        let grads = NetGradients {
            weights: vec![vec![1.0]],
            biases: vec![vec![0.0]],
        };
        net.adam_step(&grads);
        let change = net.layers()[0].weights[0];
        assert!((change - (-1e-3)).abs() < 1e-9);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut net = actor_network(4, 2, (6, 6), 1e-3, &mut rng);
        let before = net.clone();
        let grads = NetGradients::zeros_like(&net);
        net.adam_step(&grads);
        for (a, b) in net.layers().iter().zip(before.layers()) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn adam_first_step_with_decay() {
        // p=2, g=0, l2=0.01 -> effective gradient 0.02, first step ~ -lr
        let layer = Layer {
            spec: LayerSpec {
                input_width: 1,
                output_width: 1,
                activation: Activation::Linear,
            },
            weights: vec![2.0],
            biases: vec![0.0],
        };
        let mut net = MlpNetwork::from_layers(vec![layer], 0, 1e-3, 0.01);
        let grads = NetGradients {
            weights: vec![vec![0.0]],
            biases: vec![vec![0.0]],
        };
        net.adam_step(&grads);
        let change = net.layers()[0].weights[0] - 2.0;
        assert!((change - (-1e-3)).abs() < 1e-7, "change {change}");
    }

    #[test]
    fn actor_output_stays_inside_unit_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let net = actor_network(10, 2, (32, 24), 1e-4, &mut rng);
        for _ in 0..200 {
            let input: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let out = net.output(&input).unwrap();
            assert!(out.iter().all(|a| a.abs() < 1.0));
        }
    }
}
