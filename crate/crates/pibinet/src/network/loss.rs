//! Scalar losses over network heads at fixed probe points.
//!
//! The trainable quantities a loss may depend on are the network heads at a
//! fixed set of probes (values, directional derivatives, Laplacians) and a
//! flat vector of auxiliary scalars (point-source magnitudes and
//! coordinates). A [`LossSpec`] supplies its probes once and, given the
//! current head values, returns the loss together with the exact cotangent
//! of every head and the gradient with respect to the auxiliary vector. The
//! engine then back-propagates the cotangents through the network.

use super::{engine, MlpParams, Workspace};
use crate::error::{Error, Result};
use crate::kernels::Point;

/// Which heads a probe exposes.
#[derive(Debug, Clone)]
pub enum ProbeKind {
    /// Network value only.
    Value,
    /// Value plus the derivative along the stored direction (not
    /// necessarily unit length).
    Directional(Vec<f64>),
    /// Value plus the input Laplacian.
    Laplacian,
}

/// An evaluation request against the network.
#[derive(Debug, Clone)]
pub struct Probe {
    pub point: Point,
    pub kind: ProbeKind,
}

/// Head outputs at one probe; heads the probe does not expose are zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeadValues {
    pub value: f64,
    pub directional: f64,
    pub laplacian: f64,
}

/// Loss cotangents for one probe.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeadSeeds {
    pub value: f64,
    pub directional: f64,
    pub laplacian: f64,
}

/// A differentiable scalar loss over probe heads and auxiliary scalars.
pub trait LossSpec {
    fn probes(&self) -> &[Probe];

    /// Number of auxiliary trainable scalars.
    fn aux_len(&self) -> usize {
        0
    }

    /// Evaluate the loss at the given heads, filling the per-probe head
    /// cotangents and the auxiliary gradient. `seeds` and `aux_grad` arrive
    /// zeroed and sized to `probes().len()` and `aux_len()`.
    fn evaluate(
        &self,
        heads: &[HeadValues],
        aux: &[f64],
        seeds: &mut [HeadSeeds],
        aux_grad: &mut [f64],
    ) -> f64;
}

/// Loss value with its exact gradients.
#[derive(Debug, Clone)]
pub struct LossGradient {
    pub value: f64,
    /// Flat gradient congruent with [`MlpParams::flat`].
    pub network: Vec<f64>,
    pub aux: Vec<f64>,
}

/// Loss value only: forward passes plus the closed-form loss, no reverse
/// sweep. This is the path finite-difference oracles perturb.
pub fn loss_value(
    params: &MlpParams,
    spec: &dyn LossSpec,
    aux: &[f64],
    ws: &mut Workspace,
) -> Result<f64> {
    if aux.len() != spec.aux_len() {
        return Err(Error::InvalidConfig(format!(
            "aux length {} does not match the loss ({})",
            aux.len(),
            spec.aux_len()
        )));
    }
    let probes = spec.probes();
    let mut heads = vec![HeadValues::default(); probes.len()];
    for (idx, probe) in probes.iter().enumerate() {
        heads[idx] = engine::probe_forward(params, ws, idx, probe.point.coords(), &probe.kind);
    }
    let mut seeds = vec![HeadSeeds::default(); probes.len()];
    let mut aux_grad = vec![0.0; spec.aux_len()];
    Ok(spec.evaluate(&heads, aux, &mut seeds, &mut aux_grad))
}

/// Exact parameter gradient of `spec` at `params`/`aux`.
///
/// Runs one extended forward pass per probe, lets the loss compute its head
/// cotangents in closed form, then reverse-propagates each probe in a fixed
/// order so results are bit-reproducible.
pub fn param_gradient(
    params: &MlpParams,
    spec: &dyn LossSpec,
    aux: &[f64],
    ws: &mut Workspace,
) -> Result<LossGradient> {
    if aux.len() != spec.aux_len() {
        return Err(Error::InvalidConfig(format!(
            "aux length {} does not match the loss ({})",
            aux.len(),
            spec.aux_len()
        )));
    }
    let probes = spec.probes();
    let mut heads = vec![HeadValues::default(); probes.len()];
    for (idx, probe) in probes.iter().enumerate() {
        if probe.point.dim() != params.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: params.input_dim(),
                got: probe.point.dim(),
            });
        }
        heads[idx] = engine::probe_forward(params, ws, idx, probe.point.coords(), &probe.kind);
    }

    let mut seeds = vec![HeadSeeds::default(); probes.len()];
    let mut aux_grad = vec![0.0; spec.aux_len()];
    let value = spec.evaluate(&heads, aux, &mut seeds, &mut aux_grad);

    let mut network = vec![0.0; params.param_count()];
    for (idx, probe) in probes.iter().enumerate() {
        engine::probe_backward(params, ws, idx, &probe.kind, &seeds[idx], &mut network);
    }
    Ok(LossGradient {
        value,
        network,
        aux: aux_grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// L = sum_j value_j^2, the simplest smoke loss.
    struct SquaredValues {
        probes: Vec<Probe>,
    }

    impl LossSpec for SquaredValues {
        fn probes(&self) -> &[Probe] {
            &self.probes
        }
        fn evaluate(
            &self,
            heads: &[HeadValues],
            _aux: &[f64],
            seeds: &mut [HeadSeeds],
            _aux_grad: &mut [f64],
        ) -> f64 {
            let mut loss = 0.0;
            for (h, s) in heads.iter().zip(seeds.iter_mut()) {
                loss += h.value * h.value;
                s.value = 2.0 * h.value;
            }
            loss
        }
    }

    /// L = value at a single probe.
    struct PlainValue {
        probes: Vec<Probe>,
    }

    impl LossSpec for PlainValue {
        fn probes(&self) -> &[Probe] {
            &self.probes
        }
        fn evaluate(
            &self,
            heads: &[HeadValues],
            _aux: &[f64],
            seeds: &mut [HeadSeeds],
            _aux_grad: &mut [f64],
        ) -> f64 {
            seeds[0].value = 1.0;
            heads[0].value
        }
    }

    #[test]
    fn squared_loss_at_zero_network_has_zero_gradient() {
        let params = MlpParams::zeros(&[2, 8, 1]).unwrap();
        let spec = SquaredValues {
            probes: vec![Probe {
                point: Point::new2(0.4, -0.2),
                kind: ProbeKind::Value,
            }],
        };
        let mut ws = Workspace::new();
        let g = param_gradient(&params, &spec, &[], &mut ws).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(g.network.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn affine_value_loss_gradient_is_input_and_one() {
        let mut params = MlpParams::zeros(&[2, 1]).unwrap();
        params.weights_mut(0).copy_from_slice(&[0.7, -0.4]);
        params.biases_mut(0)[0] = 0.1;
        let x = Point::new2(0.3, 0.9);
        let spec = PlainValue {
            probes: vec![Probe {
                point: x.clone(),
                kind: ProbeKind::Value,
            }],
        };
        let mut ws = Workspace::new();
        let g = param_gradient(&params, &spec, &[], &mut ws).unwrap();
        // d(wx+b)/dw = x, d/db = 1.
        assert_eq!(&g.network[..2], x.coords());
        assert_eq!(g.network[2], 1.0);
    }

    /// Finite differences over every parameter; the defining oracle for the
    /// engine. `make_spec` rebuilds the loss so it stays independent of the
    /// parameters being perturbed.
    pub(crate) fn check_param_gradient<S: LossSpec>(
        params: &MlpParams,
        spec: &S,
        aux: &[f64],
        step: f64,
        tol: f64,
    ) {
        let mut ws = Workspace::new();
        let g = param_gradient(params, spec, aux, &mut ws).unwrap();
        let loss_at = |p: &MlpParams, a: &[f64]| {
            let mut ws = Workspace::new();
            loss_value(p, spec, a, &mut ws).unwrap()
        };
        let scale = g
            .network
            .iter()
            .chain(&g.aux)
            .map(|v| v.abs())
            .fold(1e-10, f64::max);
        for i in 0..params.param_count() {
            let mut hi = params.clone();
            hi.flat_mut()[i] += step;
            let mut lo = params.clone();
            lo.flat_mut()[i] -= step;
            let fd = (loss_at(&hi, aux) - loss_at(&lo, aux)) / (2.0 * step);
            assert!(
                (g.network[i] - fd).abs() / scale.max(fd.abs()) < tol,
                "param {i}: analytic {} vs fd {fd}",
                g.network[i]
            );
        }
        for i in 0..aux.len() {
            let mut hi = aux.to_vec();
            hi[i] += step;
            let mut lo = aux.to_vec();
            lo[i] -= step;
            let fd = (loss_at(params, &hi) - loss_at(params, &lo)) / (2.0 * step);
            assert!(
                (g.aux[i] - fd).abs() / scale.max(fd.abs()) < tol,
                "aux {i}: analytic {} vs fd {fd}",
                g.aux[i]
            );
        }
    }

    /// Mixed loss exercising all three head types at once:
    /// L = sum_j (a_j v_j + b_j (n_j . grad) + c_j lap_j)^2.
    struct MixedHeads {
        probes: Vec<Probe>,
        coeff: Vec<(f64, f64, f64)>,
    }

    impl LossSpec for MixedHeads {
        fn probes(&self) -> &[Probe] {
            &self.probes
        }
        fn evaluate(
            &self,
            heads: &[HeadValues],
            _aux: &[f64],
            seeds: &mut [HeadSeeds],
            _aux_grad: &mut [f64],
        ) -> f64 {
            let mut loss = 0.0;
            for ((h, s), &(a, b, c)) in heads.iter().zip(seeds.iter_mut()).zip(&self.coeff) {
                let term = a * h.value + b * h.directional + c * h.laplacian;
                loss += term * term;
                s.value = 2.0 * term * a;
                s.directional = 2.0 * term * b;
                s.laplacian = 2.0 * term * c;
            }
            loss
        }
    }

    #[test]
    fn mixed_head_gradient_matches_finite_differences() {
        let params = MlpParams::init(&[2, 6, 5, 1], 31).unwrap();
        let spec = MixedHeads {
            probes: vec![
                Probe {
                    point: Point::new2(0.3, -0.1),
                    kind: ProbeKind::Value,
                },
                Probe {
                    point: Point::new2(-0.6, 0.4),
                    kind: ProbeKind::Directional(vec![0.8, -0.6]),
                },
                Probe {
                    point: Point::new2(0.1, 0.7),
                    kind: ProbeKind::Laplacian,
                },
            ],
            coeff: vec![(1.3, 0.0, 0.0), (0.5, -2.0, 0.0), (0.25, 0.0, 1.5)],
        };
        check_param_gradient(&params, &spec, &[], 1e-5, 1e-4);
    }
}
