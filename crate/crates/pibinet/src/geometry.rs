//! Axis-aligned box domains and uniform boundary sampling.
//!
//! The integration boundary carries quadrature nodes with outward unit
//! normals and a uniform weight `V/I`, where `V` is the boundary measure and
//! `I` the node count, so a plain sum over samples realises the Monte Carlo
//! surface integral.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Point;

/// Axis-aligned box `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Point,
    upper: Point,
}

/// How boundary nodes are placed on each face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Midpoint-rule positions per face; independent of the seed.
    Equispaced,
    /// Uniform draws within each face from the seeded generator.
    Random,
}

/// A quadrature node on the domain boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Point,
    pub normal: Vec<f64>,
    pub weight: f64,
}

impl BoxDomain {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        for i in 0..lower.dim() {
            if !(lower[i] < upper[i]) {
                return Err(Error::InvalidDomain(format!(
                    "lower[{i}] = {} must be strictly below upper[{i}] = {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The square `[-a, a]^2`.
    pub fn square(a: f64) -> Self {
        Self::new(Point::new2(-a, -a), Point::new2(a, a)).expect("valid square")
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn center(&self) -> Point {
        Point::new(
            (0..self.dim())
                .map(|i| 0.5 * (self.lower[i] + self.upper[i]))
                .collect(),
        )
        .expect("valid center")
    }

    pub fn contains_strict(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lower[i] < p[i] && p[i] < self.upper[i])
    }

    pub fn contains_closed(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= p[i] && p[i] <= self.upper[i])
    }

    /// Face index of a boundary point, ties broken by the lowest face index.
    ///
    /// Faces are ordered `2*axis + {0: lower, 1: upper}`. Returns an error if
    /// the point is not on the boundary within `tol`.
    pub fn face_of(&self, p: &Point, tol: f64) -> Result<usize> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        let inside = (0..self.dim())
            .all(|i| p[i] >= self.lower[i] - tol && p[i] <= self.upper[i] + tol);
        if inside {
            for face in 0..2 * self.dim() {
                let axis = face / 2;
                let plane = if face % 2 == 0 {
                    self.lower[axis]
                } else {
                    self.upper[axis]
                };
                if (p[axis] - plane).abs() <= tol {
                    return Ok(face);
                }
            }
        }
        Err(Error::NotOnBoundary(p.coords().to_vec()))
    }

    /// Outward unit normal of face `face`.
    pub fn face_normal(&self, face: usize) -> Vec<f64> {
        let mut n = vec![0.0; self.dim()];
        n[face / 2] = if face % 2 == 0 { -1.0 } else { 1.0 };
        n
    }

    /// Measure of face `face` (length in 2d, area in 3d).
    fn face_measure(&self, face: usize) -> f64 {
        let axis = face / 2;
        (0..self.dim())
            .filter(|&i| i != axis)
            .map(|i| self.side(i))
            .product()
    }
}

/// Total boundary measure: perimeter in 2d, total face area in 3d.
pub fn boundary_measure(domain: &BoxDomain) -> f64 {
    (0..2 * domain.dim()).map(|f| domain.face_measure(f)).sum()
}

/// Grow the box by `epsilon` on every side.
pub fn enlarge(domain: &BoxDomain, epsilon: f64) -> Result<BoxDomain> {
    if epsilon < 0.0 {
        return Err(Error::NegativeEpsilon(epsilon));
    }
    let d = domain.dim();
    let lower = Point::new((0..d).map(|i| domain.lower[i] - epsilon).collect())?;
    let upper = Point::new((0..d).map(|i| domain.upper[i] + epsilon).collect())?;
    BoxDomain::new(lower, upper)
}

/// Allocate `count` nodes over the faces proportionally to face measure,
/// rounding by largest remainder (ties to the lowest face index).
fn allocate_faces(domain: &BoxDomain, count: usize) -> Vec<usize> {
    let faces = 2 * domain.dim();
    let total = boundary_measure(domain);
    let quotas: Vec<f64> = (0..faces)
        .map(|f| count as f64 * domain.face_measure(f) / total)
        .collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..faces).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &f in order.iter().take(count - assigned) {
        alloc[f] += 1;
    }
    alloc
}

/// Divisor of `n` whose induced grid aspect is closest to `target` (in log
/// space). Used to lay out midpoint nodes on 3d faces.
fn best_divisor(n: usize, target: f64) -> usize {
    let mut best = 1;
    let mut best_err = f64::INFINITY;
    for a in 1..=n {
        if n % a != 0 {
            continue;
        }
        let aspect = a as f64 / (n / a) as f64;
        let err = (aspect.ln() - target.ln()).abs();
        if err < best_err {
            best_err = err;
            best = a;
        }
    }
    best
}

/// Draw `count` boundary samples with outward normals and weight `V/count`.
///
/// Face allocation is proportional to face measure with largest-remainder
/// rounding. Equispaced mode uses per-face midpoint-rule positions and
/// ignores the seed; random mode draws uniformly within each face.
pub fn sample_boundary(
    domain: &BoxDomain,
    count: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<Vec<BoundarySample>> {
    let d = domain.dim();
    if count < 2 * d {
        return Err(Error::CountTooSmall {
            got: count,
            min: 2 * d,
        });
    }
    let weight = boundary_measure(domain) / count as f64;
    let alloc = allocate_faces(domain, count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);

    for (face, &n_face) in alloc.iter().enumerate() {
        if n_face == 0 {
            continue;
        }
        let axis = face / 2;
        let plane = if face % 2 == 0 {
            domain.lower[axis]
        } else {
            domain.upper[axis]
        };
        let normal = domain.face_normal(face);
        let free: Vec<usize> = (0..d).filter(|&i| i != axis).collect();

        let push = |free_coords: &[f64], samples: &mut Vec<BoundarySample>| {
            let mut coords = vec![0.0; d];
            coords[axis] = plane;
            for (k, &i) in free.iter().enumerate() {
                coords[i] = free_coords[k];
            }
            samples.push(BoundarySample {
                point: Point::new(coords).expect("on-face point"),
                normal: normal.clone(),
                weight,
            });
        };

        match mode {
            SamplingMode::Equispaced => {
                if d == 2 {
                    let i = free[0];
                    for k in 0..n_face {
                        let t = domain.lower[i] + (k as f64 + 0.5) / n_face as f64 * domain.side(i);
                        push(&[t], &mut samples);
                    }
                } else {
                    let (ia, ib) = (free[0], free[1]);
                    let target = domain.side(ia) / domain.side(ib);
                    let na = best_divisor(n_face, target);
                    let nb = n_face / na;
                    for ka in 0..na {
                        let ta =
                            domain.lower[ia] + (ka as f64 + 0.5) / na as f64 * domain.side(ia);
                        for kb in 0..nb {
                            let tb = domain.lower[ib]
                                + (kb as f64 + 0.5) / nb as f64 * domain.side(ib);
                            push(&[ta, tb], &mut samples);
                        }
                    }
                }
            }
            SamplingMode::Random => {
                for _ in 0..n_face {
                    let coords: Vec<f64> = free
                        .iter()
                        .map(|&i| rng.random_range(domain.lower[i]..domain.upper[i]))
                        .collect();
                    push(&coords, &mut samples);
                }
            }
        }
    }
    debug_assert_eq!(samples.len(), count);
    Ok(samples)
}
