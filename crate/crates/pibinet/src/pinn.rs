//! Collocation-based PINN baseline.
//!
//! The network itself is the solution ansatz; the loss combines a data term
//! with a physics term penalizing `laplacian(u) - f` at interior collocation
//! points, where `f` superposes Gaussian bumps standing in for the point
//! sources. Shares the network module (and therefore the parameter budget)
//! with the boundary-integral model.

use std::cell::Cell;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{mae, FieldGrid, GridSpec};
use crate::geometry::BoxDomain;
use crate::kernels::Point;
use crate::network::{HeadSeeds, HeadValues, LossSpec, Probe, ProbeKind};
use crate::pibi::PointSourceSet;
use crate::training::{
    adam_loop, seed_stream, subseed, AuxLayout, Dataset, TracedLoss, TrainConfig, TrainReport,
};

/// PINN-specific knobs on top of the shared training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PinnConfig {
    #[serde(flatten)]
    pub train: TrainConfig,
    pub lambda_physics: f64,
    pub collocation_count: usize,
    pub lambda_grid: Vec<f64>,
    pub sigma_delta: f64,
}

impl Default for PinnConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            lambda_physics: 1e-4,
            collocation_count: 200,
            lambda_grid: (-8..=1).map(|k| 10f64.powi(k)).collect(),
            sigma_delta: 1e-3,
        }
    }
}

impl PinnConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.lambda_physics < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "negative physics weight {}",
                self.lambda_physics
            )));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidConfig(
                "lambda grid must be non-empty and positive".into(),
            ));
        }
        if self.sigma_delta <= 0.0 {
            return Err(Error::InvalidConfig("sigma_delta must be positive".into()));
        }
        Ok(())
    }
}

/// A trained PINN: the network is the solution, sources parameterize the
/// right-hand side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PinnModel {
    pub params: crate::network::MlpParams,
    pub sources: PointSourceSet,
    pub sigma_delta: f64,
}

impl PinnModel {
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.params.forward(x.coords())
    }

    pub fn evaluate_field(&self, spec: &GridSpec) -> Result<FieldGrid> {
        FieldGrid::from_fn(spec.clone(), |p| {
            self.params.forward(p.coords()).expect("grid point dimension")
        })
    }
}

/// Isotropic Gaussian density with d-dimensional normalization, the smooth
/// stand-in for a unit point source.
pub fn gaussian_delta(x: &Point, center: &Point, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gaussian width {sigma} must be positive"
        )));
    }
    if x.dim() != center.dim() {
        return Err(Error::DimensionMismatch {
            expected: center.dim(),
            got: x.dim(),
        });
    }
    let d = x.dim() as i32;
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm = (two_pi).powi(d).sqrt() * sigma.powi(d);
    let r2: f64 = x
        .coords()
        .iter()
        .zip(center.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((-0.5 * r2 / (sigma * sigma)).exp() / norm)
}

/// Right-hand side at `x`: superposition of Gaussian bumps.
pub fn source_term(sources: &PointSourceSet, x: &Point, sigma: f64) -> Result<f64> {
    let mut f = 0.0;
    for (loc, &c) in sources.locations.iter().zip(&sources.magnitudes) {
        f += c * gaussian_delta(x, loc, sigma)?;
    }
    Ok(f)
}

/// Direct evaluation of the PINN loss: mean squared data residual plus
/// `lambda_physics` times the mean squared PDE residual at the collocation
/// points.
pub fn pinn_loss(
    params: &crate::network::MlpParams,
    sources: &PointSourceSet,
    data: &Dataset,
    collocation: &[Point],
    lambda_physics: f64,
    sigma: f64,
) -> Result<f64> {
    let mut data_term = 0.0;
    for (p, &u) in data.points.iter().zip(&data.values) {
        let r = params.forward(p.coords())? - u;
        data_term += r * r;
    }
    data_term /= data.len() as f64;
    let mut physics = 0.0;
    if !collocation.is_empty() {
        for p in collocation {
            let r = params.input_laplacian(p.coords())? - source_term(sources, p, sigma)?;
            physics += r * r;
        }
        physics /= collocation.len() as f64;
    }
    Ok(data_term + lambda_physics * physics)
}

/// Uniform collocation points over the data domain, fixed per run.
pub fn draw_collocation(domain: &BoxDomain, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coords: Vec<f64> = (0..domain.dim())
                .map(|i| rng.random_range(domain.lower()[i]..domain.upper()[i]))
                .collect();
            Point::new(coords).expect("finite collocation point")
        })
        .collect()
}

struct PinnLoss {
    probes: Vec<Probe>,
    data_count: usize,
    data_values: Vec<f64>,
    coll_points: Vec<Point>,
    lambda_physics: f64,
    sigma: f64,
    template: PointSourceSet,
    layout: AuxLayout,
    last_data: Cell<f64>,
    last_physics: Cell<f64>,
}

impl PinnLoss {
    fn build(
        data: &Dataset,
        collocation: &[Point],
        sources: &PointSourceSet,
        dim: usize,
        lambda_physics: f64,
        sigma: f64,
    ) -> Self {
        let mut probes: Vec<Probe> = data
            .points
            .iter()
            .map(|p| Probe {
                point: p.clone(),
                kind: ProbeKind::Value,
            })
            .collect();
        probes.extend(collocation.iter().map(|p| Probe {
            point: p.clone(),
            kind: ProbeKind::Laplacian,
        }));
        Self {
            probes,
            data_count: data.len(),
            data_values: data.values.clone(),
            coll_points: collocation.to_vec(),
            lambda_physics,
            sigma,
            template: sources.clone(),
            layout: AuxLayout::of(sources, dim),
            last_data: Cell::new(0.0),
            last_physics: Cell::new(0.0),
        }
    }
}

impl LossSpec for PinnLoss {
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
        let nd = self.data_count;
        let sources = self.layout.unpack(aux, &self.template);
        let (mag_grad, loc_grad) = aux_grad.split_at_mut(self.layout.magnitudes);

        let scale = 1.0 / nd as f64;
        let mut data_term = 0.0;
        for (i, &u) in self.data_values.iter().enumerate() {
            let r = heads[i].value - u;
            data_term += r * r;
            seeds[i].value = 2.0 * scale * r;
        }
        data_term *= scale;
        self.last_data.set(data_term);

        let mut physics = 0.0;
        if !self.coll_points.is_empty() {
            let k_scale = 1.0 / self.coll_points.len() as f64;
            let sig2 = self.sigma * self.sigma;
            for (k, p) in self.coll_points.iter().enumerate() {
                let mut f = 0.0;
                // Bump values retained per source for the aux gradients.
                let bumps: Vec<f64> = sources
                    .locations
                    .iter()
                    .zip(&sources.magnitudes)
                    .map(|(loc, &c)| {
                        let b = gaussian_delta(p, loc, self.sigma)
                            .expect("validated sigma and dimensions");
                        f += c * b;
                        b
                    })
                    .collect();
                let r = heads[nd + k].laplacian - f;
                physics += r * r;
                let rho = self.lambda_physics * 2.0 * k_scale * r;
                seeds[nd + k].laplacian = rho;
                for (i, (loc, &c)) in sources
                    .locations
                    .iter()
                    .zip(&sources.magnitudes)
                    .enumerate()
                {
                    if !mag_grad.is_empty() {
                        mag_grad[i] -= rho * bumps[i];
                    }
                    if !loc_grad.is_empty() {
                        for a in 0..self.layout.dim {
                            let dbump = bumps[i] * (p[a] - loc[a]) / sig2;
                            loc_grad[i * self.layout.dim + a] -= rho * c * dbump;
                        }
                    }
                }
            }
            physics *= k_scale;
        }
        self.last_physics.set(physics);
        data_term + self.lambda_physics * physics
    }
}

impl TracedLoss for PinnLoss {
    fn components(&self) -> (f64, f64) {
        (self.last_data.get(), self.last_physics.get())
    }
}

/// Adam training of the direct network (and source parameters in the
/// inverse setting). Collocation points are drawn uniformly over the data
/// domain once per run from the seeded generator. In the report trace the
/// `boundary` column carries the physics-residual component.
pub fn pinn_train(
    data: &Dataset,
    domain: &BoxDomain,
    sources: PointSourceSet,
    config: &PinnConfig,
) -> Result<(PinnModel, TrainReport)> {
    config.validate()?;
    let start = std::time::Instant::now();
    let seed = config.train.seed;
    let mut params = crate::network::MlpParams::init(
        &config.train.layer_sizes(domain.dim()),
        subseed(seed, seed_stream::NETWORK_INIT),
    )?;
    let collocation = draw_collocation(
        domain,
        config.collocation_count,
        subseed(seed, seed_stream::COLLOCATION),
    );
    for p in &data.points {
        if !domain.contains_closed(p) {
            return Err(Error::PointOutsideDomain(p.coords().to_vec()));
        }
    }
    let loss = PinnLoss::build(
        data,
        &collocation,
        &sources,
        domain.dim(),
        config.lambda_physics,
        config.sigma_delta,
    );
    let layout = loss.layout;
    let mut aux = layout.pack(&sources);
    let template = sources.clone();
    let domain_cl = domain.clone();
    let mut project = |aux: &mut [f64]| {
        if layout.coords > 0 {
            let tail = &mut aux[layout.magnitudes..];
            for i in 0..template.len() {
                for k in 0..layout.dim {
                    let lo = domain_cl.lower()[k] + 1e-6 * domain_cl.side(k);
                    let hi = domain_cl.upper()[k] - 1e-6 * domain_cl.side(k);
                    tail[i * layout.dim + k] = tail[i * layout.dim + k].clamp(lo, hi);
                }
            }
        }
    };
    let (trace, final_total) = adam_loop(&mut params, &mut aux, &loss, &config.train, &mut project)?;
    let final_sources = layout.unpack(&aux, &template);

    let report = TrainReport {
        seed,
        config: config.train.clone(),
        trace,
        final_observation_loss: loss.last_data.get(),
        final_boundary_loss: loss.last_physics.get(),
        final_total_loss: final_total,
        final_sources: final_sources.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    };
    Ok((
        PinnModel {
            params,
            sources: final_sources,
            sigma_delta: config.sigma_delta,
        },
        report,
    ))
}

/// How cross-validation scores a trained model.
pub enum CvScoring<'a> {
    /// Mean absolute error against a reference field on the evaluation grid.
    TruthField {
        truth: &'a FieldGrid,
        region: BoxDomain,
        eval_spacing: f64,
    },
    /// Seeded 80/20 split of the dataset; score is the held-out mean squared
    /// error.
    Holdout { fraction: f64, seed: u64 },
}

/// One row of the per-lambda score table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaScore {
    pub lambda: f64,
    pub final_data_loss: f64,
    pub final_physics_loss: f64,
    pub score: f64,
}

/// Lowest-scoring lambda; ties resolve to the smallest lambda.
pub fn argmin_lambda(table: &[LambdaScore]) -> f64 {
    let mut best = &table[0];
    for row in &table[1..] {
        if row.score < best.score || (row.score == best.score && row.lambda < best.lambda) {
            best = row;
        }
    }
    best.lambda
}

/// Train one model per grid value and score each; returns the best lambda,
/// the full table, and the model/report trained at the best lambda. The
/// per-lambda runs are independent and execute concurrently.
pub fn lambda_cross_validate(
    data: &Dataset,
    domain: &BoxDomain,
    sources: &PointSourceSet,
    config: &PinnConfig,
    scoring: &CvScoring,
) -> Result<(f64, Vec<LambdaScore>, PinnModel, TrainReport)> {
    config.validate()?;
    let mut grid = config.lambda_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let (train_data, holdout): (Dataset, Option<(Vec<Point>, Vec<f64>)>) = match scoring {
        CvScoring::Holdout { fraction, seed } => {
            let mut idx: Vec<usize> = (0..data.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(*seed, seed_stream::HOLDOUT_SPLIT));
            idx.shuffle(&mut rng);
            let keep = ((data.len() as f64) * (1.0 - fraction)).round().max(1.0) as usize;
            let (train_idx, hold_idx) = idx.split_at(keep.min(data.len() - 1));
            let pick = |ids: &[usize]| {
                (
                    ids.iter().map(|&i| data.points[i].clone()).collect::<Vec<_>>(),
                    ids.iter().map(|&i| data.values[i]).collect::<Vec<_>>(),
                )
            };
            let (tp, tv) = pick(train_idx);
            let mut train = Dataset::new(tp, tv)?;
            train.collocation = data.collocation.clone();
            (train, Some(pick(hold_idx)))
        }
        CvScoring::TruthField { .. } => (data.clone(), None),
    };

    let rows: Vec<Result<(LambdaScore, PinnModel, TrainReport)>> = grid
        .par_iter()
        .map(|&lambda| {
            let mut cfg = config.clone();
            cfg.lambda_physics = lambda;
            let (model, report) = pinn_train(&train_data, domain, sources.clone(), &cfg)?;
            let score = match scoring {
                CvScoring::TruthField {
                    truth,
                    region,
                    eval_spacing,
                } => {
                    let spec = GridSpec::covering(region, *eval_spacing)?;
                    let field = model.evaluate_field(&spec)?;
                    let reference = FieldGrid::from_fn(spec, |p| {
                        truth.interpolate(p).unwrap().unwrap_or(f64::NAN)
                    })?;
                    mae(&field, &reference)?
                }
                CvScoring::Holdout { .. } => {
                    let (pts, vals) = holdout.as_ref().expect("holdout split");
                    let mut acc = 0.0;
                    for (p, &u) in pts.iter().zip(vals) {
                        let r = model.evaluate(p)? - u;
                        acc += r * r;
                    }
                    acc / pts.len() as f64
                }
            };
            Ok((
                LambdaScore {
                    lambda,
                    final_data_loss: report.final_observation_loss,
                    final_physics_loss: report.final_boundary_loss,
                    score,
                },
                model,
                report,
            ))
        })
        .collect();

    let mut table = Vec::with_capacity(grid.len());
    let mut models = Vec::with_capacity(grid.len());
    for row in rows {
        let (score, model, report) = row?;
        table.push(score);
        models.push((model, report));
    }
    let best = argmin_lambda(&table);
    let best_idx = table
        .iter()
        .position(|r| r.lambda == best)
        .expect("argmin lambda in table");
    let (model, report) = models.swap_remove(best_idx);
    Ok((best, table, model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{self, Workspace};

    #[test]
    fn gaussian_peak_and_tail() {
        let c = Point::new2(0.0, 0.0);
        let peak = gaussian_delta(&c, &c, 1.0).unwrap();
        assert!((peak - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);

        let far = gaussian_delta(&Point::new2(5.0, 0.0), &c, 1.0).unwrap();
        assert!(far < 1e-5 * peak);

        assert!(gaussian_delta(&c, &c, 0.0).is_err());
        assert!(gaussian_delta(&c, &c, -1.0).is_err());
    }

    #[test]
    fn gaussian_integrates_to_one() {
        let sigma = 0.1;
        let spec = GridSpec::covering(&BoxDomain::square(1.0), sigma / 5.0).unwrap();
        let c = Point::new2(0.0, 0.0);
        let mut mass = 0.0;
        let (n1, n2) = spec.shape;
        for i in 0..n1 {
            for j in 0..n2 {
                mass += gaussian_delta(&spec.node(i, j), &c, sigma).unwrap();
            }
        }
        mass *= spec.spacing * spec.spacing;
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    }

    #[test]
    fn affine_network_has_zero_physics_term() {
        let mut params = crate::network::MlpParams::zeros(&[2, 1]).unwrap();
        params.weights_mut(0).copy_from_slice(&[2.0, -1.0]);
        params.biases_mut(0)[0] = 0.5;
        let data = Dataset::new(vec![Point::new2(0.0, 0.0)], vec![-0.5]).unwrap();
        let coll = draw_collocation(&BoxDomain::square(1.0), 20, 3);
        // Data residual is 1, physics residual is identically zero.
        let loss = pinn_loss(&params, &PointSourceSet::empty(), &data, &coll, 10.0, 1e-3)
            .unwrap();
        assert!((loss - 1.0).abs() < 1e-12);
        let loss0 = pinn_loss(&params, &PointSourceSet::empty(), &data, &coll, 0.0, 1e-3)
            .unwrap();
        assert!((loss0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_spec_agrees_with_direct_evaluation() {
        let params = crate::network::MlpParams::init(&[2, 12, 1], 9).unwrap();
        let sources =
            PointSourceSet::new(vec![Point::new2(0.1, -0.2)], vec![1.3], true, true).unwrap();
        let data = Dataset::new(
            vec![Point::new2(0.4, 0.2), Point::new2(-0.6, 0.5)],
            vec![0.3, -0.8],
        )
        .unwrap();
        let coll = draw_collocation(&BoxDomain::square(1.0), 15, 4);
        let spec = PinnLoss::build(&data, &coll, &sources, 2, 0.25, 0.05);
        let aux = spec.layout.pack(&sources);
        let mut ws = Workspace::new();
        let via_spec = network::loss_value(&params, &spec, &aux, &mut ws).unwrap();
        let direct = pinn_loss(&params, &sources, &data, &coll, 0.25, 0.05).unwrap();
        assert!(
            (via_spec - direct).abs() < 1e-12 * direct.abs().max(1.0),
            "{via_spec} vs {direct}"
        );
    }

    /// Third-order path: parameter gradients through the Laplacian head,
    /// plus the Gaussian source-parameter gradients.
    #[test]
    fn physics_gradient_matches_finite_differences() {
        let params = crate::network::MlpParams::init(&[2, 8, 8, 1], 17).unwrap();
        let sources =
            PointSourceSet::new(vec![Point::new2(0.2, 0.3)], vec![0.9], true, true).unwrap();
        let data = Dataset::new(
            vec![Point::new2(0.5, -0.1), Point::new2(-0.3, 0.6)],
            vec![0.2, -0.4],
        )
        .unwrap();
        let coll = draw_collocation(&BoxDomain::square(1.0), 10, 8);
        let spec = PinnLoss::build(&data, &coll, &sources, 2, 0.5, 0.25);
        let aux = spec.layout.pack(&sources);

        let mut ws = Workspace::new();
        let g = network::param_gradient(&params, &spec, &aux, &mut ws).unwrap();
        let value_at = |p: &crate::network::MlpParams, a: &[f64]| {
            let mut ws = Workspace::new();
            network::loss_value(p, &spec, a, &mut ws).unwrap()
        };
        let scale = g
            .network
            .iter()
            .chain(&g.aux)
            .map(|v| v.abs())
            .fold(1e-10, f64::max);
        let step = 1e-4;
        for i in 0..params.param_count() {
            let mut hi = params.clone();
            hi.flat_mut()[i] += step;
            let mut lo = params.clone();
            lo.flat_mut()[i] -= step;
            let fd = (value_at(&hi, &aux) - value_at(&lo, &aux)) / (2.0 * step);
            assert!(
                (g.network[i] - fd).abs() / scale.max(fd.abs()) < 1e-4,
                "param {i}: {} vs {fd}",
                g.network[i]
            );
        }
        for i in 0..aux.len() {
            let mut hi = aux.clone();
            hi[i] += step;
            let mut lo = aux.clone();
            lo[i] -= step;
            let fd = (value_at(&params, &hi) - value_at(&params, &lo)) / (2.0 * step);
            assert!(
                (g.aux[i] - fd).abs() / scale.max(fd.abs()) < 1e-4,
                "aux {i}: {} vs {fd}",
                g.aux[i]
            );
        }
    }

    #[test]
    fn pinn_matches_affine_target() {
        // Noiseless data from u = x1 is representable with zero physics
        // residual; a small network fits it quickly.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points: Vec<Point> = (0..50)
            .map(|_| Point::new2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let values: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let data = Dataset::new(points, values).unwrap();
        let config = PinnConfig {
            train: TrainConfig {
                iterations: 3000,
                hidden_layers: vec![16],
                seed: 5,
                ..TrainConfig::default()
            },
            lambda_physics: 1e-6,
            collocation_count: 50,
            ..PinnConfig::default()
        };
        let (_, report) = pinn_train(
            &data,
            &BoxDomain::square(1.0),
            PointSourceSet::empty(),
            &config,
        )
        .unwrap();
        assert!(
            report.final_observation_loss < 1e-4,
            "final data loss {}",
            report.final_observation_loss
        );
    }

    #[test]
    fn pinn_train_is_deterministic() {
        let data = Dataset::new(
            vec![Point::new2(0.2, 0.3), Point::new2(-0.4, 0.5)],
            vec![1.0, -1.0],
        )
        .unwrap();
        let config = PinnConfig {
            train: TrainConfig {
                iterations: 30,
                hidden_layers: vec![8],
                seed: 123,
                ..TrainConfig::default()
            },
            collocation_count: 10,
            ..PinnConfig::default()
        };
        let domain = BoxDomain::square(1.0);
        let (m1, r1) = pinn_train(&data, &domain, PointSourceSet::empty(), &config).unwrap();
        let (m2, r2) = pinn_train(&data, &domain, PointSourceSet::empty(), &config).unwrap();
        assert_eq!(m1.params, m2.params);
        assert_eq!(r1.trace, r2.trace);
    }

    #[test]
    fn equal_parameter_budget_with_default_architecture() {
        let cfg = TrainConfig::default();
        let pibi_net = crate::network::MlpParams::init(&cfg.layer_sizes(2), 0).unwrap();
        let pinn_net = crate::network::MlpParams::init(&cfg.layer_sizes(2), 1).unwrap();
        assert_eq!(pibi_net.param_count(), pinn_net.param_count());
        assert_eq!(pibi_net.layer_sizes(), &[2, 64, 64, 64, 1]);
    }

    #[test]
    fn argmin_prefers_lowest_lambda_on_ties() {
        let table = vec![
            LambdaScore {
                lambda: 1e-4,
                final_data_loss: 0.0,
                final_physics_loss: 0.0,
                score: 0.5,
            },
            LambdaScore {
                lambda: 1e-3,
                final_data_loss: 0.0,
                final_physics_loss: 0.0,
                score: 0.5,
            },
            LambdaScore {
                lambda: 1e-2,
                final_data_loss: 0.0,
                final_physics_loss: 0.0,
                score: 0.7,
            },
        ];
        assert_eq!(argmin_lambda(&table), 1e-4);
    }

    #[test]
    fn single_value_grid_returns_that_value() {
        let data = Dataset::new(
            vec![Point::new2(0.1, 0.1), Point::new2(-0.2, 0.4), Point::new2(0.5, -0.5)],
            vec![0.3, 0.1, -0.2],
        )
        .unwrap();
        let config = PinnConfig {
            train: TrainConfig {
                iterations: 10,
                hidden_layers: vec![4],
                seed: 1,
                ..TrainConfig::default()
            },
            collocation_count: 5,
            lambda_grid: vec![0.25],
            ..PinnConfig::default()
        };
        let (best, table, _, _) = lambda_cross_validate(
            &data,
            &BoxDomain::square(1.0),
            &PointSourceSet::empty(),
            &config,
            &CvScoring::Holdout {
                fraction: 0.33,
                seed: 7,
            },
        )
        .unwrap();
        assert_eq!(best, 0.25);
        assert_eq!(table.len(), 1);
    }
}
