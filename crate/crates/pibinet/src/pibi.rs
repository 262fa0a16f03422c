//! The boundary-integral model: Monte Carlo single/double-layer evaluation
//! plus the closed-form point-source potential.
//!
//! The interior reconstruction is
//!
//! ```text
//! u(x) = V/I * sum_j [ G(x, x_j) dh/dn(x_j) - dG/dn(x, x_j) h(x_j) ]
//!        + sum_i c_i G(x, y_i)
//! ```
//!
//! with the V/I prefactor folded into the per-sample quadrature weights. On
//! the integration boundary itself the double-layer jump adds `+ h(x)/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldGrid, GridSpec};
use crate::geometry::{BoundarySample, BoxDomain};
use crate::kernels::{self, Point, R_MIN};
use crate::network::MlpParams;

/// Evaluation points closer than this to an integration point are rejected:
/// the quadrature is meaningless there.
pub const SAMPLE_EXCLUSION: f64 = R_MIN * 1e3;

/// Point-source locations and magnitudes, optionally trainable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSourceSet {
    pub locations: Vec<Point>,
    pub magnitudes: Vec<f64>,
    pub trainable_locations: bool,
    pub trainable_magnitudes: bool,
}

impl PointSourceSet {
    pub fn empty() -> Self {
        Self {
            locations: Vec::new(),
            magnitudes: Vec::new(),
            trainable_locations: false,
            trainable_magnitudes: false,
        }
    }

    pub fn new(
        locations: Vec<Point>,
        magnitudes: Vec<f64>,
        trainable_locations: bool,
        trainable_magnitudes: bool,
    ) -> Result<Self> {
        if locations.len() != magnitudes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} source locations but {} magnitudes",
                locations.len(),
                magnitudes.len()
            )));
        }
        if !magnitudes.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidConfig("non-finite source magnitude".into()));
        }
        Ok(Self {
            locations,
            magnitudes,
            trainable_locations,
            trainable_magnitudes,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// All locations must lie strictly inside `domain`.
    pub fn validate_inside(&self, domain: &BoxDomain) -> Result<()> {
        for loc in &self.locations {
            if !domain.contains_strict(loc) {
                return Err(Error::PointOutsideDomain(loc.coords().to_vec()));
            }
        }
        Ok(())
    }
}

/// `sum_i c_i G(x, y_i)`; zero when there are no sources.
pub fn source_potential(sources: &PointSourceSet, x: &Point) -> Result<f64> {
    let mut acc = 0.0;
    for (loc, &c) in sources.locations.iter().zip(&sources.magnitudes) {
        if x.distance(loc) < R_MIN {
            return Err(Error::EvaluationAtSource(loc.coords().to_vec()));
        }
        acc += c * kernels::fundamental_solution(x, loc)?;
    }
    Ok(acc)
}

/// Gradient of [`source_potential`] with respect to source magnitudes and
/// locations, scaled by `seed`. Accumulates `seed * dF/dc_i` into `mag_grad`
/// and `seed * dF/dy_i` into `loc_grad` (flattened per source).
pub fn source_potential_grad(
    sources: &PointSourceSet,
    x: &Point,
    seed: f64,
    mag_grad: &mut [f64],
    loc_grad: &mut [f64],
) -> Result<()> {
    let d = x.dim();
    let mut g = vec![0.0; d];
    for (i, (loc, &c)) in sources.locations.iter().zip(&sources.magnitudes).enumerate() {
        if !mag_grad.is_empty() {
            mag_grad[i] += seed * kernels::fundamental_solution(x, loc)?;
        }
        if !loc_grad.is_empty() {
            kernels::grad_y_fundamental_into(x, loc, &mut g)?;
            for k in 0..d {
                loc_grad[i * d + k] += seed * c * g[k];
            }
        }
    }
    Ok(())
}

/// Monte Carlo single-minus-double-layer sum with explicit head values.
///
/// `values[j]` and `normal_derivs[j]` stand for `h(x_j)` and `dh/dn(x_j)` at
/// sample `j`; the weights carry the `V/I` prefactor. Exact harmonic
/// surrogates plug in here directly, which is how the quadrature is tested
/// independently of any network.
pub fn layer_potential_sum(
    x: &Point,
    samples: &[BoundarySample],
    values: &[f64],
    normal_derivs: &[f64],
) -> Result<f64> {
    debug_assert_eq!(samples.len(), values.len());
    debug_assert_eq!(samples.len(), normal_derivs.len());
    let mut acc = 0.0;
    for ((s, &v), &g) in samples.iter().zip(values).zip(normal_derivs) {
        let dist = x.distance(&s.point);
        if dist < SAMPLE_EXCLUSION {
            return Err(Error::TooCloseToSample {
                point: x.coords().to_vec(),
                dist,
            });
        }
        let single = kernels::fundamental_solution(x, &s.point)?;
        let double = kernels::normal_derivative_g(x, &s.point, &s.normal)?;
        acc += s.weight * (single * g - double * v);
    }
    Ok(acc)
}

/// Network boundary heads at the integration points: values `h(x_j)` and
/// normal derivatives `dh/dn(x_j)`.
#[derive(Debug, Clone)]
pub struct BoundaryHeads {
    pub values: Vec<f64>,
    pub normal_derivs: Vec<f64>,
}

/// A trained (or in-training) boundary-integral model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PibiModel {
    pub params: MlpParams,
    pub sources: PointSourceSet,
    boundary: Vec<BoundarySample>,
    data_domain: BoxDomain,
    integration_domain: BoxDomain,
}

impl PibiModel {
    /// Fresh model for a training run: seeded network init, integration
    /// boundary enlarged by `epsilon` around the data domain, and a fixed
    /// set of boundary samples.
    pub fn assemble(
        data_domain: BoxDomain,
        sources: PointSourceSet,
        layer_sizes: &[usize],
        epsilon: f64,
        integration_points: usize,
        mode: crate::geometry::SamplingMode,
        init_seed: u64,
        boundary_seed: u64,
    ) -> Result<Self> {
        let integration_domain = crate::geometry::enlarge(&data_domain, epsilon)?;
        let boundary = crate::geometry::sample_boundary(
            &integration_domain,
            integration_points,
            mode,
            boundary_seed,
        )?;
        let params = MlpParams::init(layer_sizes, init_seed)?;
        Self::from_parts(params, sources, boundary, data_domain, integration_domain)
    }

    /// Assemble a model from existing parts, validating the geometry: every
    /// integration point must sit on the integration boundary and every
    /// source strictly inside the data domain.
    pub fn from_parts(
        params: MlpParams,
        sources: PointSourceSet,
        boundary: Vec<BoundarySample>,
        data_domain: BoxDomain,
        integration_domain: BoxDomain,
    ) -> Result<Self> {
        if params.input_dim() != data_domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: data_domain.dim(),
                got: params.input_dim(),
            });
        }
        for s in &boundary {
            integration_domain.face_of(&s.point, 1e-12)?;
        }
        sources.validate_inside(&data_domain)?;
        Ok(Self {
            params,
            sources,
            boundary,
            data_domain,
            integration_domain,
        })
    }

    pub fn boundary(&self) -> &[BoundarySample] {
        &self.boundary
    }

    pub fn data_domain(&self) -> &BoxDomain {
        &self.data_domain
    }

    pub fn integration_domain(&self) -> &BoxDomain {
        &self.integration_domain
    }

    /// Evaluate the network heads at every integration point.
    pub fn boundary_heads(&self) -> Result<BoundaryHeads> {
        let mut values = Vec::with_capacity(self.boundary.len());
        let mut derivs = Vec::with_capacity(self.boundary.len());
        for s in &self.boundary {
            let (v, g) = self.params.value_and_directional(s.point.coords(), &s.normal)?;
            values.push(v);
            derivs.push(g);
        }
        Ok(BoundaryHeads {
            values,
            normal_derivs: derivs,
        })
    }

    /// Interior reconstruction with precomputed boundary heads; the fast
    /// path when many points are evaluated against one parameter state.
    pub fn interior_with_heads(&self, heads: &BoundaryHeads, x: &Point) -> Result<f64> {
        let layer = layer_potential_sum(x, &self.boundary, &heads.values, &heads.normal_derivs)?;
        Ok(layer + source_potential(&self.sources, x)?)
    }

    fn interior_sum(&self, heads: &BoundaryHeads, x: &Point) -> Result<f64> {
        self.interior_with_heads(heads, x)
    }

    /// Reconstruction at a point strictly inside the integration boundary.
    pub fn evaluate_interior(&self, x: &Point) -> Result<f64> {
        if !self.integration_domain.contains_strict(x) {
            return Err(Error::PointOutsideDomain(x.coords().to_vec()));
        }
        let heads = self.boundary_heads()?;
        self.interior_sum(&heads, x)
    }

    /// Reconstruction at a point on the integration boundary; adds the
    /// double-layer jump term `+ h(x)/2`.
    pub fn evaluate_boundary(&self, x: &Point) -> Result<f64> {
        self.integration_domain.face_of(x, 1e-12)?;
        let heads = self.boundary_heads()?;
        let sum = self.interior_sum(&heads, x)?;
        Ok(sum + 0.5 * self.params.forward(x.coords())?)
    }

    /// Evaluate the reconstruction on a regular grid. Nodes coinciding with
    /// a source location are masked and carry the value of the nearest
    /// unmasked node.
    pub fn evaluate_field(&self, spec: &GridSpec) -> Result<FieldGrid> {
        let heads = self.boundary_heads()?;
        let (n1, n2) = spec.shape;
        for i in [0, n1 - 1] {
            for j in [0, n2 - 1] {
                let corner = spec.node(i, j);
                if !self.integration_domain.contains_strict(&corner) {
                    return Err(Error::PointOutsideDomain(corner.coords().to_vec()));
                }
            }
        }
        let rows: Vec<Result<Vec<(f64, bool)>>> = (0..n1)
            .into_par_iter()
            .map(|i| {
                (0..n2)
                    .map(|j| {
                        let p = spec.node(i, j);
                        let near_source = self
                            .sources
                            .locations
                            .iter()
                            .any(|loc| p.distance(loc) < SAMPLE_EXCLUSION);
                        if near_source {
                            Ok((f64::NAN, true))
                        } else {
                            Ok((self.interior_sum(&heads, &p)?, false))
                        }
                    })
                    .collect()
            })
            .collect();
        let mut values = Vec::with_capacity(spec.len());
        let mut mask = Vec::with_capacity(spec.len());
        for row in rows {
            for (v, m) in row? {
                values.push(v);
                mask.push(m);
            }
        }
        if mask.iter().any(|&m| m) {
            fill_masked_from_nearest(spec, &mut values, &mask);
            FieldGrid::new(spec.clone(), values, Some(mask))
        } else {
            FieldGrid::new(spec.clone(), values, None)
        }
    }

    /// Central-difference gradient of the evaluated field.
    pub fn gradient_field(&self, spec: &GridSpec) -> Result<(FieldGrid, FieldGrid)> {
        self.evaluate_field(spec)?.gradient()
    }
}

/// Replace each masked value with the value of the nearest unmasked node.
fn fill_masked_from_nearest(spec: &GridSpec, values: &mut [f64], mask: &[bool]) {
    let (n1, n2) = spec.shape;
    let masked: Vec<usize> = (0..values.len()).filter(|&k| mask[k]).collect();
    for k in masked {
        let (i, j) = (k / n2, k % n2);
        let mut best = f64::INFINITY;
        let mut val = 0.0;
        for a in 0..n1 {
            for b in 0..n2 {
                let kk = a * n2 + b;
                if mask[kk] {
                    continue;
                }
                let d2 = (a as f64 - i as f64).powi(2) + (b as f64 - j as f64).powi(2);
                if d2 < best {
                    best = d2;
                    val = values[kk];
                }
            }
        }
        values[k] = val;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_boundary, SamplingMode};

    /// Constant network: all-zero weights, output bias `c`. Its value is
    /// exactly `c` everywhere and its gradient is exactly zero.
    fn constant_network(c: f64) -> MlpParams {
        let mut params = MlpParams::zeros(&[2, 64, 64, 64, 1]).unwrap();
        let last = params.depth() - 1;
        params.biases_mut(last)[0] = c;
        params
    }

    fn model_on_square(
        params: MlpParams,
        sources: PointSourceSet,
        half_side: f64,
        count: usize,
    ) -> PibiModel {
        let boundary_box = BoxDomain::square(half_side);
        let samples =
            sample_boundary(&boundary_box, count, SamplingMode::Equispaced, 0).unwrap();
        PibiModel::from_parts(
            params,
            sources,
            samples,
            BoxDomain::square(half_side),
            boundary_box,
        )
        .unwrap()
    }

    #[test]
    fn zero_network_no_sources_is_zero() {
        let model = model_on_square(
            MlpParams::zeros(&[2, 8, 1]).unwrap(),
            PointSourceSet::empty(),
            1.0,
            40,
        );
        assert_eq!(model.evaluate_interior(&Point::new2(0.2, -0.3)).unwrap(), 0.0);
        assert_eq!(model.evaluate_boundary(&Point::new2(1.0, 0.33)).unwrap(), 0.0);
        // Points coinciding with an integration node are rejected.
        assert!(matches!(
            model.evaluate_boundary(&Point::new2(1.0, 0.3)),
            Err(Error::TooCloseToSample { .. })
        ));
    }

    #[test]
    fn gauss_integral_identity_interior() {
        // With h == 1 and dh/dn == 0 the interior branch reduces to minus
        // the double-layer Gauss integral, which is exactly 1 inside.
        let model = model_on_square(constant_network(1.0), PointSourceSet::empty(), 1.0, 2000);
        let u = model.evaluate_interior(&Point::new2(0.0, 0.0)).unwrap();
        assert!((u - 1.0).abs() < 1e-3, "interior Gauss integral: {u}");
    }

    #[test]
    fn gauss_integral_identity_boundary() {
        // On the boundary the principal-value integral is -1/2 and the jump
        // term contributes +1/2, so the reconstruction is again 1.
        let model = model_on_square(constant_network(1.0), PointSourceSet::empty(), 1.0, 2000);
        let u = model.evaluate_boundary(&Point::new2(1.0, 0.0)).unwrap();
        assert!((u - 1.0).abs() < 5e-2, "boundary Gauss integral: {u}");
    }

    #[test]
    fn boundary_jump_is_half_forward_exactly() {
        let params = MlpParams::init(&[2, 16, 1], 3).unwrap();
        let model = model_on_square(params, PointSourceSet::empty(), 1.0, 64);
        let x = Point::new2(1.0, 0.25);
        let heads = model.boundary_heads().unwrap();
        let sum = model.interior_sum(&heads, &x).unwrap();
        let b = model.evaluate_boundary(&x).unwrap();
        assert_eq!(b - sum, 0.5 * model.params.forward(x.coords()).unwrap());
    }

    /// Analytic harmonic surrogates: (h, grad h).
    fn surrogate_heads(
        samples: &[BoundarySample],
        h: impl Fn(&Point) -> f64,
        grad: impl Fn(&Point) -> [f64; 2],
    ) -> (Vec<f64>, Vec<f64>) {
        let values: Vec<f64> = samples.iter().map(|s| h(&s.point)).collect();
        let derivs: Vec<f64> = samples
            .iter()
            .map(|s| {
                let g = grad(&s.point);
                g[0] * s.normal[0] + g[1] * s.normal[1]
            })
            .collect();
        (values, derivs)
    }

    #[test]
    fn harmonic_surrogate_pointwise() {
        let boundary_box = BoxDomain::square(1.2);
        let samples = sample_boundary(&boundary_box, 4000, SamplingMode::Equispaced, 0).unwrap();
        let (values, derivs) =
            surrogate_heads(&samples, |p| p[0] * p[1], |p| [p[1], p[0]]);
        let x = Point::new2(0.3, -0.4);
        let u = layer_potential_sum(&x, &samples, &values, &derivs).unwrap();
        assert!((u - (-0.12)).abs() < 1e-3, "harmonic reconstruction: {u}");
    }

    #[test]
    fn harmonic_surrogates_on_interior_grid() {
        // Reconstruction error for exact harmonic data decays with the
        // sample count; at I = 4000 it is below 2e-3 at points at least 0.2
        // away from the boundary.
        type Surrogate = (fn(&Point) -> f64, fn(&Point) -> [f64; 2]);
        let cases: Vec<Surrogate> = vec![
            (|_| 1.0, |_| [0.0, 0.0]),
            (|p| p[0], |_| [1.0, 0.0]),
            (|p| p[1], |_| [0.0, 1.0]),
            (|p| p[0] * p[1], |p| [p[1], p[0]]),
            (|p| p[0] * p[0] - p[1] * p[1], |p| [2.0 * p[0], -2.0 * p[1]]),
        ];
        let boundary_box = BoxDomain::square(1.0);
        let samples = sample_boundary(&boundary_box, 4000, SamplingMode::Equispaced, 0).unwrap();
        for (h, grad) in cases {
            let (values, derivs) = surrogate_heads(&samples, h, grad);
            let mut worst = 0.0f64;
            let mut i1 = -0.8;
            while i1 <= 0.8 + 1e-12 {
                let mut i2 = -0.8;
                while i2 <= 0.8 + 1e-12 {
                    let x = Point::new2(i1, i2);
                    let u = layer_potential_sum(&x, &samples, &values, &derivs).unwrap();
                    worst = worst.max((u - h(&x)).abs());
                    i2 += 0.1;
                }
                i1 += 0.1;
            }
            assert!(worst < 2e-3, "max error {worst}");
        }
    }

    #[test]
    fn source_potential_examples() {
        let x = Point::new2(0.0, 0.0);
        assert_eq!(source_potential(&PointSourceSet::empty(), &x).unwrap(), 0.0);

        // One 3d source of magnitude 4*pi at distance 1 cancels the kernel
        // constant.
        let s = PointSourceSet::new(
            vec![Point::new3(1.0, 0.0, 0.0)],
            vec![4.0 * std::f64::consts::PI],
            false,
            false,
        )
        .unwrap();
        let v = source_potential(&s, &Point::new3(0.0, 0.0, 0.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // Opposite magnitudes equidistant from x cancel.
        let s = PointSourceSet::new(
            vec![Point::new2(0.5, 0.0), Point::new2(-0.5, 0.0)],
            vec![1.0, -1.0],
            false,
            false,
        )
        .unwrap();
        assert_eq!(source_potential(&s, &x).unwrap(), 0.0);

        // Evaluation at a source is an error.
        let s = PointSourceSet::new(vec![x.clone()], vec![1.0], false, false).unwrap();
        assert!(matches!(
            source_potential(&s, &x),
            Err(Error::EvaluationAtSource(_))
        ));
    }

    #[test]
    fn superposition_in_sources() {
        let params = MlpParams::init(&[2, 16, 1], 5).unwrap();
        let a = PointSourceSet::new(vec![Point::new2(0.2, 0.1)], vec![1.5], false, false).unwrap();
        let b = PointSourceSet::new(vec![Point::new2(-0.4, 0.3)], vec![-0.7], false, false)
            .unwrap();
        let both = PointSourceSet::new(
            vec![Point::new2(0.2, 0.1), Point::new2(-0.4, 0.3)],
            vec![1.5, -0.7],
            false,
            false,
        )
        .unwrap();
        let model_a = model_on_square(params.clone(), a, 1.0, 100);
        let model_ab = model_on_square(params, both, 1.0, 100);
        let x = Point::new2(0.6, -0.6);
        let lhs = model_ab.evaluate_interior(&x).unwrap();
        let rhs = model_a.evaluate_interior(&x).unwrap() + source_potential(&b, &x).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn translation_equivariance_of_quadrature() {
        let boundary_box = BoxDomain::square(1.0);
        let samples = sample_boundary(&boundary_box, 200, SamplingMode::Equispaced, 0).unwrap();
        let (values, derivs) = surrogate_heads(&samples, |p| p[0] * p[1], |p| [p[1], p[0]]);
        let x = Point::new2(0.25, -0.55);
        let u = layer_potential_sum(&x, &samples, &values, &derivs).unwrap();

        let shift = [3.0, -7.5];
        let moved: Vec<BoundarySample> = samples
            .iter()
            .map(|s| BoundarySample {
                point: s.point.translated(&shift).unwrap(),
                normal: s.normal.clone(),
                weight: s.weight,
            })
            .collect();
        let u_moved =
            layer_potential_sum(&x.translated(&shift).unwrap(), &moved, &values, &derivs).unwrap();
        assert!((u - u_moved).abs() < 1e-12);

        let src = PointSourceSet::new(vec![Point::new2(0.3, 0.3)], vec![2.0], false, false)
            .unwrap();
        let src_moved = PointSourceSet::new(
            vec![Point::new2(0.3 + shift[0], 0.3 + shift[1])],
            vec![2.0],
            false,
            false,
        )
        .unwrap();
        let p = source_potential(&src, &x).unwrap();
        let p_moved =
            source_potential(&src_moved, &x.translated(&shift).unwrap()).unwrap();
        assert!((p - p_moved).abs() < 1e-12);
    }

    #[test]
    fn field_matches_pointwise_evaluation() {
        let params = MlpParams::init(&[2, 8, 1], 11).unwrap();
        let model = model_on_square(params, PointSourceSet::empty(), 1.2, 200);
        let spec = GridSpec::new(Point::new2(-0.5, -0.5), 0.5, (3, 3)).unwrap();
        let field = model.evaluate_field(&spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let direct = model.evaluate_interior(&spec.node(i, j)).unwrap();
                assert_eq!(field.value(i, j), direct);
            }
        }
    }

    #[test]
    fn zero_model_field_is_zero() {
        let model = model_on_square(
            MlpParams::zeros(&[2, 4, 1]).unwrap(),
            PointSourceSet::empty(),
            1.0,
            16,
        );
        let spec = GridSpec::new(Point::new2(-0.2, -0.2), 0.4, (2, 2)).unwrap();
        let field = model.evaluate_field(&spec).unwrap();
        assert!(field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn source_coincident_nodes_are_masked() {
        let sources =
            PointSourceSet::new(vec![Point::new2(0.0, 0.0)], vec![3.0], false, false).unwrap();
        let model = model_on_square(constant_network(0.5), sources, 1.0, 64);
        let spec = GridSpec::new(Point::new2(-0.5, -0.5), 0.5, (3, 3)).unwrap();
        let field = model.evaluate_field(&spec).unwrap();
        assert!(field.is_masked(1, 1));
        assert_eq!(field.masked_count(), 1);
        // Masked node carries a finite copied value.
        assert!(field.value(1, 1).is_finite());
    }

    #[test]
    fn grid_outside_domain_is_rejected() {
        let model = model_on_square(
            MlpParams::zeros(&[2, 4, 1]).unwrap(),
            PointSourceSet::empty(),
            1.0,
            16,
        );
        let spec = GridSpec::new(Point::new2(-2.0, -2.0), 1.0, (5, 5)).unwrap();
        assert!(matches!(
            model.evaluate_field(&spec),
            Err(Error::PointOutsideDomain(_))
        ));
    }

    #[test]
    fn gradient_field_of_linear_surrogate() {
        // h = x1 reconstructs u = x1; its gradient field is (1, 0).
        let boundary_box = BoxDomain::square(1.2);
        let samples = sample_boundary(&boundary_box, 4000, SamplingMode::Equispaced, 0).unwrap();
        let (values, derivs) = surrogate_heads(&samples, |p| p[0], |_| [1.0, 0.0]);
        let spec = GridSpec::new(Point::new2(-0.8, -0.8), 0.2, (9, 9)).unwrap();
        let field = FieldGrid::from_fn(spec, |p| {
            layer_potential_sum(p, &samples, &values, &derivs).unwrap()
        })
        .unwrap();
        let (dx, dy) = field.gradient().unwrap();
        for i in 1..8 {
            for j in 1..8 {
                assert!((dx.value(i, j) - 1.0).abs() < 1e-2);
                assert!(dy.value(i, j).abs() < 1e-2);
            }
        }
    }
}
