//! Fundamental solutions of the Laplacian and their derivatives.
//!
//! The free-space kernel `G` is `-log(r)/(2π)` in two dimensions and
//! `1/(4π r)` in three, with `r = |x - y|`. Its gradient with respect to the
//! second argument and the outward normal derivative are the building blocks
//! of the single- and double-layer boundary integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separation guard: kernel evaluations with `r` below this raise
/// [`Error::CoincidentPoints`] instead of returning huge values.
pub const R_MIN: f64 = 1e-12;

/// A location in R^d, d ∈ {2, 3}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() != 2 && coords.len() != 3 {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn new2(x1: f64, x2: f64) -> Self {
        Self::new(vec![x1, x2]).expect("finite 2d point")
    }

    pub fn new3(x1: f64, x2: f64, x3: f64) -> Self {
        Self::new(vec![x1, x2, x3]).expect("finite 3d point")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Component-wise translation. Used by the well-data rescaling path and
    /// the translation-equivariance tests.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        Point::new(
            self.coords
                .iter()
                .zip(shift)
                .map(|(c, s)| c + s)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

fn check_pair(x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let r = x.distance(y);
    if r < R_MIN {
        return Err(Error::CoincidentPoints { r, r_min: R_MIN });
    }
    Ok(r)
}

/// Free-space fundamental solution `G(x, y)` of the Laplacian.
///
/// `-log(r)/(2π)` for d = 2 and `1/(4π r)` for d = 3. Depends on the points
/// only through their distance, so it is symmetric in its arguments.
pub fn fundamental_solution(x: &Point, y: &Point) -> Result<f64> {
    let r = check_pair(x, y)?;
    Ok(match x.dim() {
        2 => -r.ln() / (2.0 * std::f64::consts::PI),
        _ => 1.0 / (4.0 * std::f64::consts::PI * r),
    })
}

/// Gradient of [`fundamental_solution`] with respect to its second argument.
///
/// `(x - y) / (2π r²)` for d = 2 and `(x - y) / (4π r³)` for d = 3; both
/// branches are the exact analytic derivative of the kernel and are pinned
/// down by the finite-difference suite.
pub fn grad_y_fundamental(x: &Point, y: &Point) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.dim().min(y.dim())];
    grad_y_fundamental_into(x, y, &mut out)?;
    Ok(out)
}

/// Allocation-free variant of [`grad_y_fundamental`] for hot loops.
pub fn grad_y_fundamental_into(x: &Point, y: &Point, out: &mut [f64]) -> Result<()> {
    let r = check_pair(x, y)?;
    debug_assert_eq!(out.len(), x.dim());
    let scale = match x.dim() {
        2 => 1.0 / (2.0 * std::f64::consts::PI * r * r),
        _ => 1.0 / (4.0 * std::f64::consts::PI * r * r * r),
    };
    for (o, (xi, yi)) in out.iter_mut().zip(x.coords().iter().zip(y.coords())) {
        *o = (xi - yi) * scale;
    }
    Ok(())
}

/// Normal derivative `∂G/∂n_y(x, y) = ∇_y G(x, y) · n_y`.
///
/// `n_y` must be a unit vector (within 1e-12).
pub fn normal_derivative_g(x: &Point, y: &Point, n_y: &[f64]) -> Result<f64> {
    let norm = n_y.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal { norm });
    }
    if n_y.len() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            got: n_y.len(),
        });
    }
    let r = check_pair(x, y)?;
    let scale = match x.dim() {
        2 => 1.0 / (2.0 * std::f64::consts::PI * r * r),
        _ => 1.0 / (4.0 * std::f64::consts::PI * r * r * r),
    };
    let dot: f64 = x
        .coords()
        .iter()
        .zip(y.coords())
        .zip(n_y)
        .map(|((xi, yi), ni)| (xi - yi) * ni)
        .sum();
    Ok(dot * scale)
}
