//! Loss assembly, Adam optimization and the seeded training loop.
//!
//! The loss is quadratic in the network's boundary heads, so its head
//! cotangents are closed-form; the engine handles the rest. Kernel blocks
//! between the fixed data points and the fixed integration points are
//! precomputed once per run. Everything is sequential and seeded, so a run
//! is a pure function of (model, data, config).

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SamplingMode;
use crate::kernels::{self, Point};
use crate::network::{
    self, HeadSeeds, HeadValues, LossSpec, MlpParams, Probe, ProbeKind, Workspace,
};
use crate::pibi::{PibiModel, PointSourceSet};

/// Derive an independent seed for a named sub-stream of a run seed.
pub fn subseed(base: u64, stream: u64) -> u64 {
    // splitmix64 over the combined word.
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed streams used by training and data generation.
pub mod seed_stream {
    pub const NETWORK_INIT: u64 = 1;
    pub const BOUNDARY: u64 = 2;
    pub const SOURCE_MAGNITUDE: u64 = 3;
    pub const SOURCE_LOCATION: u64 = 4;
    pub const COLLOCATION: u64 = 5;
    pub const DATA_POINTS: u64 = 6;
    pub const NOISE: u64 = 7;
    pub const SCENARIO_SOURCES: u64 = 8;
    pub const HOLDOUT_SPLIT: u64 = 9;
}

/// Sum-of-squares versus mean-of-squares loss reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossReduction {
    #[default]
    Mean,
    Sum,
}

impl LossReduction {
    fn scale(self, n: usize) -> f64 {
        match self {
            LossReduction::Mean => 1.0 / n as f64,
            LossReduction::Sum => 1.0,
        }
    }
}

/// Scattered observations, optionally with collocation points on the
/// integration boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub collocation: Vec<Point>,
}

impl Dataset {
    pub fn new(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(Error::InputData(format!(
                "{} points with {} values",
                points.len(),
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InputData("non-finite observation".into()));
        }
        Ok(Self {
            points,
            values,
            collocation: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Full training configuration. The paper-level defaults are 10000 Adam
/// iterations at learning rate 1e-3 with 200 equispaced integration points
/// on a boundary enlarged by 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub integration_points: usize,
    pub epsilon_enlarge: f64,
    pub sampling_mode: SamplingMode,
    pub hidden_layers: Vec<usize>,
    pub loss_reduction: LossReduction,
    /// When false, bias terms are frozen at zero.
    pub use_biases: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            learning_rate: 1e-3,
            lambda: 0.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            integration_points: 200,
            epsilon_enlarge: 0.1,
            sampling_mode: SamplingMode::Equispaced,
            hidden_layers: vec![64, 64, 64],
            loss_reduction: LossReduction::Mean,
            use_biases: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "negative boundary-loss weight {}",
                self.lambda
            )));
        }
        for (name, b) in [("beta1", self.adam_beta1), ("beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidConfig(format!("adam {name} {b} not in [0, 1)")));
            }
        }
        if self.adam_eps <= 0.0 {
            return Err(Error::InvalidConfig("adam eps must be positive".into()));
        }
        if self.epsilon_enlarge < 0.0 {
            return Err(Error::NegativeEpsilon(self.epsilon_enlarge));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, dim: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers.len() + 2);
        sizes.push(dim);
        sizes.extend_from_slice(&self.hidden_layers);
        sizes.push(1);
        sizes
    }
}

/// One row of the loss trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub observation: f64,
    pub boundary: f64,
    pub total: f64,
}

/// Run telemetry: the per-iteration loss trace, final loss components,
/// final source estimates, wall clock, and the seed/config echo.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub config: TrainConfig,
    pub trace: Vec<LossSample>,
    pub final_observation_loss: f64,
    pub final_boundary_loss: f64,
    pub final_total_loss: f64,
    pub final_sources: PointSourceSet,
    /// Elapsed time; the one report field that is not seed-deterministic.
    pub wall_clock_seconds: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Observation loss: reduction of squared interior-reconstruction residuals.
pub fn observation_loss(
    model: &PibiModel,
    data: &Dataset,
    reduction: LossReduction,
) -> Result<f64> {
    let heads = model.boundary_heads()?;
    let mut acc = 0.0;
    for (p, &u) in data.points.iter().zip(&data.values) {
        let r = model.interior_with_heads(&heads, p)? - u;
        acc += r * r;
    }
    Ok(acc * reduction.scale(data.len()))
}

/// Boundary loss: mean squared gap between the boundary-branch
/// reconstruction and the raw network on the collocation set. Empty set
/// gives zero.
pub fn boundary_loss(model: &PibiModel, collocation: &[Point]) -> Result<f64> {
    if collocation.is_empty() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for p in collocation {
        let gap = model.evaluate_boundary(p)? - model.params.forward(p.coords())?;
        acc += gap * gap;
    }
    Ok(acc / collocation.len() as f64)
}

/// `observation + lambda * boundary`; without collocation points the term
/// reduces to the observation loss alone.
pub fn total_loss(
    model: &PibiModel,
    data: &Dataset,
    lambda: f64,
    reduction: LossReduction,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "negative boundary-loss weight {lambda}"
        )));
    }
    let obs = observation_loss(model, data, reduction)?;
    if lambda == 0.0 || data.collocation.is_empty() {
        return Ok(obs);
    }
    Ok(obs + lambda * boundary_loss(model, &data.collocation)?)
}

/// Layout of the auxiliary (non-network) trainable scalars.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AuxLayout {
    pub(crate) magnitudes: usize,
    pub(crate) coords: usize,
    pub(crate) dim: usize,
}

impl AuxLayout {
    pub(crate) fn of(sources: &PointSourceSet, dim: usize) -> Self {
        Self {
            magnitudes: if sources.trainable_magnitudes {
                sources.len()
            } else {
                0
            },
            coords: if sources.trainable_locations {
                sources.len() * dim
            } else {
                0
            },
            dim,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.magnitudes + self.coords
    }

    pub(crate) fn pack(&self, sources: &PointSourceSet) -> Vec<f64> {
        let mut aux = Vec::with_capacity(self.len());
        if self.magnitudes > 0 {
            aux.extend_from_slice(&sources.magnitudes);
        }
        if self.coords > 0 {
            for loc in &sources.locations {
                aux.extend_from_slice(loc.coords());
            }
        }
        aux
    }

    pub(crate) fn unpack(&self, aux: &[f64], template: &PointSourceSet) -> PointSourceSet {
        let mut sources = template.clone();
        if self.magnitudes > 0 {
            sources.magnitudes.copy_from_slice(&aux[..self.magnitudes]);
        }
        if self.coords > 0 {
            let tail = &aux[self.magnitudes..];
            for (i, loc) in sources.locations.iter_mut().enumerate() {
                *loc = Point::new(tail[i * self.dim..(i + 1) * self.dim].to_vec())
                    .expect("finite source location");
            }
        }
        sources
    }
}

/// The training loss over network heads: quadratic in the boundary values
/// and normal derivatives, with closed-form source-parameter gradients.
struct PibiLoss {
    probes: Vec<Probe>,
    boundary_count: usize,
    data_points: Vec<Point>,
    data_values: Vec<f64>,
    coll_points: Vec<Point>,
    /// `w_j G(x_i, x_j)` and `w_j dG/dn(x_i, x_j)`, row-major N x I.
    data_single: Vec<f64>,
    data_double: Vec<f64>,
    coll_single: Vec<f64>,
    coll_double: Vec<f64>,
    lambda: f64,
    reduction: LossReduction,
    template: PointSourceSet,
    layout: AuxLayout,
    last_observation: Cell<f64>,
    last_boundary: Cell<f64>,
}

/// Source potential with the separation floored at the kernel guard, so the
/// loss stays finite even if a trainable source drifts onto a data point
/// mid-run. Away from the guard this is exactly [`source_potential`].
fn floored_source_potential(sources: &PointSourceSet, x: &Point) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    sources
        .locations
        .iter()
        .zip(&sources.magnitudes)
        .map(|(loc, &c)| {
            let r = x.distance(loc).max(kernels::R_MIN);
            c * match x.dim() {
                2 => -r.ln() / two_pi,
                _ => 1.0 / (2.0 * two_pi * r),
            }
        })
        .sum()
}

fn floored_source_grad(
    sources: &PointSourceSet,
    x: &Point,
    seed: f64,
    mag_grad: &mut [f64],
    loc_grad: &mut [f64],
) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = x.dim();
    for (i, (loc, &c)) in sources.locations.iter().zip(&sources.magnitudes).enumerate() {
        let r = x.distance(loc).max(kernels::R_MIN);
        if !mag_grad.is_empty() {
            mag_grad[i] += seed
                * match d {
                    2 => -r.ln() / two_pi,
                    _ => 1.0 / (2.0 * two_pi * r),
                };
        }
        if !loc_grad.is_empty() {
            let scale = match d {
                2 => 1.0 / (two_pi * r * r),
                _ => 1.0 / (2.0 * two_pi * r * r * r),
            };
            for k in 0..d {
                loc_grad[i * d + k] += seed * c * (x[k] - loc[k]) * scale;
            }
        }
    }
}

impl PibiLoss {
    fn build(model: &PibiModel, data: &Dataset, config: &TrainConfig) -> Result<Self> {
        let samples = model.boundary();
        let use_coll = config.lambda > 0.0 && !data.collocation.is_empty();
        let coll_points: Vec<Point> = if use_coll {
            data.collocation.clone()
        } else {
            Vec::new()
        };
        for p in &data.points {
            if !model.integration_domain().contains_strict(p) {
                return Err(Error::PointOutsideDomain(p.coords().to_vec()));
            }
        }
        for p in &coll_points {
            model.integration_domain().face_of(p, 1e-9)?;
        }

        let mut probes: Vec<Probe> = samples
            .iter()
            .map(|s| Probe {
                point: s.point.clone(),
                kind: ProbeKind::Directional(s.normal.clone()),
            })
            .collect();
        probes.extend(coll_points.iter().map(|p| Probe {
            point: p.clone(),
            kind: ProbeKind::Value,
        }));

        let kernel_block = |targets: &[Point]| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut single = Vec::with_capacity(targets.len() * samples.len());
            let mut double = Vec::with_capacity(targets.len() * samples.len());
            for t in targets {
                for s in samples {
                    single.push(s.weight * kernels::fundamental_solution(t, &s.point)?);
                    double.push(s.weight * kernels::normal_derivative_g(t, &s.point, &s.normal)?);
                }
            }
            Ok((single, double))
        };
        let (data_single, data_double) = kernel_block(&data.points)?;
        let (coll_single, coll_double) = kernel_block(&coll_points)?;

        let layout = AuxLayout::of(&model.sources, model.data_domain().dim());
        Ok(Self {
            probes,
            boundary_count: samples.len(),
            data_points: data.points.clone(),
            data_values: data.values.clone(),
            coll_points,
            data_single,
            data_double,
            coll_single,
            coll_double,
            lambda: config.lambda,
            reduction: config.loss_reduction,
            template: model.sources.clone(),
            layout,
            last_observation: Cell::new(0.0),
            last_boundary: Cell::new(0.0),
        })
    }

    fn sources_from_aux(&self, aux: &[f64]) -> PointSourceSet {
        self.layout.unpack(aux, &self.template)
    }
}

impl LossSpec for PibiLoss {
    fn probes(&self) -> &[Probe] {
        &self.probes
    }

    fn aux_len(&self) -> usize {
        self.layout.len()
    }

    fn evaluate(
        &self,
        heads: &[HeadValues],
        aux: &[f64],
        seeds: &mut [HeadSeeds],
        aux_grad: &mut [f64],
    ) -> f64 {
        let nb = self.boundary_count;
        let sources = self.sources_from_aux(aux);
        let (mag_grad, loc_grad) = aux_grad.split_at_mut(self.layout.magnitudes);

        let reconstruct = |row: usize, single: &[f64], double: &[f64]| -> f64 {
            let base = row * nb;
            let mut acc = 0.0;
            for j in 0..nb {
                acc += single[base + j] * heads[j].directional - double[base + j] * heads[j].value;
            }
            acc
        };

        // Observation term.
        let obs_scale = self.reduction.scale(self.data_points.len());
        let mut obs = 0.0;
        for (i, (p, &u)) in self.data_points.iter().zip(&self.data_values).enumerate() {
            let src = floored_source_potential(&sources, p);
            let residual = reconstruct(i, &self.data_single, &self.data_double) + src - u;
            obs += residual * residual;
            let rho = 2.0 * obs_scale * residual;
            let base = i * nb;
            for j in 0..nb {
                seeds[j].directional += rho * self.data_single[base + j];
                seeds[j].value -= rho * self.data_double[base + j];
            }
            floored_source_grad(&sources, p, rho, mag_grad, loc_grad);
        }
        obs *= obs_scale;
        self.last_observation.set(obs);

        // Boundary term.
        let mut bnd = 0.0;
        if !self.coll_points.is_empty() {
            let k_scale = 1.0 / self.coll_points.len() as f64;
            for (k, p) in self.coll_points.iter().enumerate() {
                let src = floored_source_potential(&sources, p);
                let h_val = heads[nb + k].value;
                let gap =
                    reconstruct(k, &self.coll_single, &self.coll_double) + src - 0.5 * h_val;
                bnd += gap * gap;
                let sigma = self.lambda * 2.0 * k_scale * gap;
                let base = k * nb;
                for j in 0..nb {
                    seeds[j].directional += sigma * self.coll_single[base + j];
                    seeds[j].value -= sigma * self.coll_double[base + j];
                }
                seeds[nb + k].value -= 0.5 * sigma;
                floored_source_grad(&sources, p, sigma, mag_grad, loc_grad);
            }
            bnd *= k_scale;
        }
        self.last_boundary.set(bnd);
        obs + self.lambda * bnd
    }
}

/// Adam optimizer state over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moments(&self) -> &[f64] {
        &self.m
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    config: &TrainConfig,
) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::DimensionMismatch {
            expected: state.m.len(),
            got: grads.len(),
        });
    }
    state.t += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    for k in 0..params.len() {
        let g = grads[k];
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g;
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        params[k] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
    }
    Ok(())
}

/// Randomly initialized sources for inverse runs without user guesses:
/// magnitudes uniform in (-0.5, 0.5) steered away from zero (a zero
/// magnitude kills the location gradient), locations uniform in the central
/// half of the domain.
pub fn init_sources(
    count: usize,
    domain: &crate::geometry::BoxDomain,
    trainable_locations: bool,
    trainable_magnitudes: bool,
    seed: u64,
) -> PointSourceSet {
    use rand::prelude::*;
    let mut mag_rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(subseed(seed, seed_stream::SOURCE_MAGNITUDE));
    let mut loc_rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(subseed(seed, seed_stream::SOURCE_LOCATION));
    let d = domain.dim();
    let mut magnitudes = Vec::with_capacity(count);
    let mut locations = Vec::with_capacity(count);
    for _ in 0..count {
        let mut c: f64 = mag_rng.random_range(-0.5..0.5);
        if c.abs() < 0.05 {
            c = 0.05 * if c >= 0.0 { 1.0 } else { -1.0 };
        }
        magnitudes.push(c);
        let coords: Vec<f64> = (0..d)
            .map(|i| {
                let center = 0.5 * (domain.lower()[i] + domain.upper()[i]);
                let q = 0.25 * domain.side(i);
                loc_rng.random_range(center - q..center + q)
            })
            .collect();
        locations.push(Point::new(coords).expect("finite source location"));
    }
    PointSourceSet {
        locations,
        magnitudes,
        trainable_locations,
        trainable_magnitudes,
    }
}

/// Clamp margin keeping sources strictly inside the data domain.
const CLAMP_MARGIN: f64 = 1e-6;

/// A loss that also reports its two components for the trace.
pub(crate) trait TracedLoss: LossSpec {
    fn components(&self) -> (f64, f64);
}

impl TracedLoss for PibiLoss {
    fn components(&self) -> (f64, f64) {
        (self.last_observation.get(), self.last_boundary.get())
    }
}

/// Shared full-batch Adam loop over network parameters plus auxiliary
/// scalars. `project` is applied to the aux vector after every step.
pub(crate) fn adam_loop(
    params: &mut MlpParams,
    aux: &mut [f64],
    spec: &dyn TracedLoss,
    config: &TrainConfig,
    project: &mut dyn FnMut(&mut [f64]),
) -> Result<(Vec<LossSample>, f64)> {
    let n_net = params.param_count();
    let n = n_net + aux.len();
    let mut state = AdamState::new(n);
    let mut ws = Workspace::new();
    let mut trace = Vec::with_capacity(config.iterations);
    let mut theta = vec![0.0; n];
    let mut theta_grad = vec![0.0; n];

    let bias_mask: Option<Vec<bool>> = if config.use_biases {
        None
    } else {
        let mut mask = vec![false; n];
        for l in 0..params.depth() {
            let start = bias_offset(params, l);
            let len = params.biases(l).len();
            for m in mask.iter_mut().skip(start).take(len) {
                *m = true;
            }
        }
        Some(mask)
    };

    for iteration in 0..config.iterations {
        let grad = network::param_gradient(params, spec, aux, &mut ws)?;
        let (primary, secondary) = spec.components();
        trace.push(LossSample {
            observation: primary,
            boundary: secondary,
            total: grad.value,
        });

        theta_grad[..n_net].copy_from_slice(&grad.network);
        theta_grad[n_net..].copy_from_slice(&grad.aux);
        if let Some(pos) = theta_grad.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient {
                iteration,
                index: pos,
            });
        }
        if let Some(mask) = &bias_mask {
            for (g, &frozen) in theta_grad.iter_mut().zip(mask) {
                if frozen {
                    *g = 0.0;
                }
            }
        }

        theta[..n_net].copy_from_slice(params.flat());
        theta[n_net..].copy_from_slice(aux);
        adam_step(&mut state, &mut theta, &theta_grad, config)?;
        params.flat_mut().copy_from_slice(&theta[..n_net]);
        aux.copy_from_slice(&theta[n_net..]);
        project(aux);
    }

    let mut ws_final = ws;
    let final_total = network::loss_value(params, spec, aux, &mut ws_final)?;
    Ok((trace, final_total))
}

/// Full-batch Adam training of the network and any trainable source
/// parameters. Boundary samples stay fixed; two runs with identical inputs
/// produce bit-identical trajectories.
pub fn train(
    mut model: PibiModel,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(PibiModel, TrainReport)> {
    config.validate()?;
    let start = std::time::Instant::now();
    let mut warnings = Vec::new();
    if config.lambda > 0.0 && data.collocation.is_empty() {
        warnings.push(
            "boundary-loss weight is positive but the collocation set is empty; \
             the boundary term is zero"
                .to_string(),
        );
    }
    let loss = PibiLoss::build(&model, data, config)?;
    let layout = loss.layout;
    let mut aux = layout.pack(&model.sources);
    let template = loss.template.clone();
    let domain = model.data_domain().clone();

    let mut project = |aux: &mut [f64]| {
        if layout.coords > 0 {
            let tail = &mut aux[layout.magnitudes..];
            for i in 0..template.len() {
                for k in 0..layout.dim {
                    let lo = domain.lower()[k] + CLAMP_MARGIN * domain.side(k);
                    let hi = domain.upper()[k] - CLAMP_MARGIN * domain.side(k);
                    tail[i * layout.dim + k] = tail[i * layout.dim + k].clamp(lo, hi);
                }
            }
        }
    };
    let (trace, final_total) =
        adam_loop(&mut model.params, &mut aux, &loss, config, &mut project)?;
    model.sources = layout.unpack(&aux, &template);

    let report = TrainReport {
        seed: config.seed,
        config: config.clone(),
        trace,
        final_observation_loss: loss.last_observation.get(),
        final_boundary_loss: loss.last_boundary.get(),
        final_total_loss: final_total,
        final_sources: model.sources.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        warnings,
    };
    Ok((model, report))
}

fn bias_offset(params: &MlpParams, layer: usize) -> usize {
    // Biases follow the weight block of each layer in the flat layout.
    let sizes = params.layer_sizes();
    let mut off = 0;
    for l in 0..layer {
        off += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    off + sizes[layer] * sizes[layer + 1]
}
