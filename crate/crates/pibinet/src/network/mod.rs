//! Fully-connected tanh network and its differentiation engine.
//!
//! The boundary function is a small MLP with tanh hidden layers and a linear
//! output. Training needs more than plain backpropagation: the loss consumes
//! the network's *input gradient* (normal derivatives at integration points)
//! and, for the PINN baseline, its *input Laplacian*, so parameter gradients
//! flow through second- and third-order mixed derivatives. The engine in
//! [`engine`] propagates value, directional-derivative and second-order
//! channels forward and runs reverse mode over the combined structure; every
//! path is pinned by finite-difference suites in the tests.

mod engine;
mod loss;

pub use engine::Workspace;
pub use loss::{
    loss_value, param_gradient, HeadSeeds, HeadValues, LossGradient, LossSpec, Probe, ProbeKind,
};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and biases of the boundary-function network.
///
/// Parameters are stored in one flat buffer, per layer: the row-major
/// `out x in` weight matrix followed by the bias vector. Hidden layers apply
/// tanh; the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    sizes: Vec<usize>,
    data: Vec<f64>,
    w_off: Vec<usize>,
    b_off: Vec<usize>,
}

fn layout(sizes: &[usize]) -> (Vec<usize>, Vec<usize>, usize) {
    let mut w_off = Vec::with_capacity(sizes.len() - 1);
    let mut b_off = Vec::with_capacity(sizes.len() - 1);
    let mut off = 0;
    for l in 0..sizes.len() - 1 {
        w_off.push(off);
        off += sizes[l] * sizes[l + 1];
        b_off.push(off);
        off += sizes[l + 1];
    }
    (w_off, b_off, off)
}

impl MlpParams {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(
                "network needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidConfig("zero-width layer".into()));
        }
        let (w_off, b_off, len) = layout(layer_sizes);
        Ok(Self {
            sizes: layer_sizes.to_vec(),
            data: vec![0.0; len],
            w_off,
            b_off,
        })
    }

    /// Glorot-uniform weights, zero biases, reproducible from the seed.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut params = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..layer_sizes.len() - 1 {
            let bound = (6.0 / (layer_sizes[l] + layer_sizes[l + 1]) as f64).sqrt();
            let (lo, hi) = params.weight_range(l);
            for w in &mut params.data[lo..hi] {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(params)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    /// Number of weight layers.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.data.len()
    }

    fn weight_range(&self, l: usize) -> (usize, usize) {
        (self.w_off[l], self.w_off[l] + self.sizes[l] * self.sizes[l + 1])
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        let (lo, hi) = self.weight_range(l);
        &self.data[lo..hi]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.data[self.b_off[l]..self.b_off[l] + self.sizes[l + 1]]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let (lo, hi) = self.weight_range(l);
        &mut self.data[lo..hi]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let off = self.b_off[l];
        &mut self.data[off..off + self.sizes[l + 1]]
    }

    /// Flat view of all parameters (weights and biases interleaved per layer).
    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.sizes[0] {
            return Err(Error::DimensionMismatch {
                expected: self.sizes[0],
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Network output at `x`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(engine::forward_value(self, x))
    }

    /// Gradient of the output with respect to the input coordinates.
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(engine::input_gradient(self, x))
    }

    /// Sum of unmixed second derivatives of the output at `x`.
    pub fn input_laplacian(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(engine::input_laplacian(self, x))
    }

    /// Output value and directional derivative `dir . grad h(x)` in one pass.
    pub fn value_and_directional(&self, x: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        self.check_input(x)?;
        if dir.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: dir.len(),
            });
        }
        Ok(engine::value_and_directional(self, x, dir))
    }
}

/// Serialized form: per-layer row-major weight matrices and bias vectors.
#[derive(Serialize, Deserialize)]
struct MlpParamsRepr {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Serialize for MlpParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MlpParamsRepr {
            layer_sizes: self.sizes.clone(),
            weights: (0..self.depth()).map(|l| self.weights(l).to_vec()).collect(),
            biases: (0..self.depth()).map(|l| self.biases(l).to_vec()).collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MlpParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = MlpParamsRepr::deserialize(d)?;
        let mut params = MlpParams::zeros(&repr.layer_sizes).map_err(DeError::custom)?;
        if repr.weights.len() != params.depth() || repr.biases.len() != params.depth() {
            return Err(DeError::custom("layer count mismatch"));
        }
        for l in 0..params.depth() {
            if repr.weights[l].len() != params.weights(l).len()
                || repr.biases[l].len() != params.biases(l).len()
            {
                return Err(DeError::custom(format!("layer {l} shape mismatch")));
            }
            params.weights_mut(l).copy_from_slice(&repr.weights[l]);
            params.biases_mut(l).copy_from_slice(&repr.biases[l]);
        }
        if !params.data.iter().all(|v| v.is_finite()) {
            return Err(DeError::custom("non-finite parameter"));
        }
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Point;

    fn assert_rel(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1e-12);
        assert!((a - b).abs() / scale < tol, "{a} vs {b} (rel tol {tol})");
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = MlpParams::zeros(&[2, 8, 1]).unwrap();
        assert_eq!(net.forward(&[0.3, -0.7]).unwrap(), 0.0);
        assert_eq!(net.input_gradient(&[0.3, -0.7]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(net.input_laplacian(&[0.3, -0.7]).unwrap(), 0.0);
    }

    #[test]
    fn single_linear_layer_is_affine() {
        let mut net = MlpParams::zeros(&[2, 1]).unwrap();
        net.weights_mut(0).copy_from_slice(&[1.5, -2.0]);
        net.biases_mut(0)[0] = 0.25;
        let x = [0.4, 0.3];
        assert_rel(net.forward(&x).unwrap(), 1.5 * 0.4 - 2.0 * 0.3 + 0.25, 1e-15);
        assert_eq!(net.input_gradient(&x).unwrap(), vec![1.5, -2.0]);
        assert_eq!(net.input_laplacian(&x).unwrap(), 0.0);
    }

    #[test]
    fn forward_is_deterministic() {
        let a = MlpParams::init(&[2, 16, 1], 99).unwrap();
        let b = MlpParams::init(&[2, 16, 1], 99).unwrap();
        assert_eq!(a, b);
        let x = [0.1, 0.2];
        assert_eq!(a.forward(&x).unwrap(), b.forward(&x).unwrap());
    }

    #[test]
    fn init_counts_and_bounds() {
        // 2*64+64 + 64*64+64 + 64*64+64 + 64*1+1.
        let net = MlpParams::init(&[2, 64, 64, 64, 1], 0).unwrap();
        assert_eq!(net.param_count(), 8577);
        let bound = (6.0_f64 / 66.0).sqrt();
        for &w in net.weights(0) {
            assert!(w.abs() <= bound);
        }
        for l in 0..net.depth() {
            assert!(net.biases(l).iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net = MlpParams::init(&[2, 4, 1], 3).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut failures = 0;
        for seed in 0..20u64 {
            let net = MlpParams::init(&[2, 16, 1], seed).unwrap();
            let p = Point::new2(0.3, -0.7);
            let x = p.coords();
            let analytic = net.input_gradient(x).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                let mut hi = x.to_vec();
                let mut lo = x.to_vec();
                hi[k] += h;
                lo[k] -= h;
                let fd = (net.forward(&hi).unwrap() - net.forward(&lo).unwrap()) / (2.0 * h);
                let scale = analytic.iter().map(|v| v.abs()).fold(1e-12, f64::max);
                if (analytic[k] - fd).abs() / scale >= 1e-6 {
                    failures += 1;
                }
            }
        }
        assert_eq!(failures, 0);
    }

    #[test]
    fn input_laplacian_matches_finite_differences() {
        use rand::prelude::*;
        let net = MlpParams::init(&[2, 8, 1], 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let h = 1e-4;
        for _ in 0..20 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let analytic = net.input_laplacian(&x).unwrap();
            let f = |p: &[f64]| net.forward(p).unwrap();
            let fd = (f(&[x[0] + h, x[1]])
                + f(&[x[0] - h, x[1]])
                + f(&[x[0], x[1] + h])
                + f(&[x[0], x[1] - h])
                - 4.0 * f(&x))
                / (h * h);
            if analytic.abs() > 1e-6 {
                assert_rel(analytic, fd, 1e-4);
            }
        }
    }

    #[test]
    fn directional_pass_agrees_with_gradient() {
        let net = MlpParams::init(&[3, 12, 12, 1], 21).unwrap();
        let x = [0.2, -0.4, 0.9];
        let dir = [0.5, 1.25, -0.3];
        let (v, dv) = net.value_and_directional(&x, &dir).unwrap();
        assert_eq!(v, net.forward(&x).unwrap());
        let g = net.input_gradient(&x).unwrap();
        let expect: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert_rel(dv, expect, 1e-12);
    }

    #[test]
    fn last_layer_scaling_is_exactly_linear() {
        let base = MlpParams::init(&[2, 10, 10, 1], 8).unwrap();
        let mut doubled = base.clone();
        let last = doubled.depth() - 1;
        for w in doubled.weights_mut(last) {
            *w *= 2.0;
        }
        for b in doubled.biases_mut(last) {
            *b *= 2.0;
        }
        let x = [0.3, 0.6];
        assert_eq!(doubled.forward(&x).unwrap(), 2.0 * base.forward(&x).unwrap());
        let g1 = base.input_gradient(&x).unwrap();
        let g2 = doubled.input_gradient(&x).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(*b, 2.0 * *a);
        }
        assert_eq!(
            doubled.input_laplacian(&x).unwrap(),
            2.0 * base.input_laplacian(&x).unwrap()
        );
    }

    #[test]
    fn json_round_trip_preserves_bits() {
        let net = MlpParams::init(&[2, 7, 5, 1], 123).unwrap();
        let json = serde_json::to_string(&net).unwrap();
        let back: MlpParams = serde_json::from_str(&json).unwrap();
        assert_eq!(net, back);
    }
}
