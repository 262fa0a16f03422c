//! Regular evaluation grids: the common currency for error metrics and
//! field exports.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxDomain;
use crate::kernels::Point;

/// Shape and placement of a regular grid, without values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point,
    pub spacing: f64,
    pub shape: (usize, usize),
}

impl GridSpec {
    pub fn new(origin: Point, spacing: f64, shape: (usize, usize)) -> Result<Self> {
        if origin.dim() != 2 {
            return Err(Error::UnsupportedDimension(origin.dim()));
        }
        if spacing <= 0.0 || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be > 0")));
        }
        if shape.0 < 2 || shape.1 < 2 {
            return Err(Error::InvalidGrid(format!(
                "shape {shape:?} must be at least 2 per axis"
            )));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
        })
    }

    /// Grid covering a 2d box with the given spacing. The spacing must tile
    /// both sides to within a relative 1e-9.
    pub fn covering(domain: &BoxDomain, spacing: f64) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::UnsupportedDimension(domain.dim()));
        }
        let mut shape = [0usize; 2];
        for axis in 0..2 {
            let steps = domain.side(axis) / spacing;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::NonConformingSpacing {
                    spacing,
                    side: domain.side(axis),
                });
            }
            shape[axis] = steps.round() as usize + 1;
        }
        Self::new(domain.lower().clone(), spacing, (shape[0], shape[1]))
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new2(
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
        )
    }

    pub fn len(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A regular 2d grid of solution values, row-major over the first axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub spec: GridSpec,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl FieldGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {:?} grid",
                values.len(),
                spec.shape
            )));
        }
        if let Some(m) = &mask {
            if m.len() != values.len() {
                return Err(Error::InvalidGrid("mask length mismatch".into()));
            }
        }
        for (k, v) in values.iter().enumerate() {
            let masked = mask.as_ref().map_or(false, |m| m[k]);
            if !masked && !v.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "non-finite value {v} at unmasked node {k}"
                )));
            }
        }
        Ok(Self { spec, values, mask })
    }

    /// Evaluate `f` at every node.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&Point) -> f64) -> Result<Self> {
        let (n1, n2) = spec.shape;
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..n1 {
            for j in 0..n2 {
                values.push(f(&spec.node(i, j)));
            }
        }
        Self::new(spec, values, None)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.spec.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.shape.1 + j]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask
            .as_ref()
            .map_or(false, |m| m[i * self.spec.shape.1 + j])
    }

    pub fn masked_count(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(0, |m| m.iter().filter(|&&b| b).count())
    }

    /// Bilinear interpolation. Returns `None` when any corner of the
    /// enclosing cell is masked.
    pub fn interpolate(&self, p: &Point) -> Result<Option<f64>> {
        let (n1, n2) = self.spec.shape;
        let h = self.spec.spacing;
        let tol = 1e-9 * h;
        let mut idx = [0usize; 2];
        let mut frac = [0.0; 2];
        for axis in 0..2 {
            let n = if axis == 0 { n1 } else { n2 };
            let t = (p[axis] - self.spec.origin[axis]) / h;
            if t < -tol || t > (n - 1) as f64 + tol {
                return Err(Error::PointOutsideDomain(p.coords().to_vec()));
            }
            let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
            idx[axis] = i;
            frac[axis] = (t - i as f64).clamp(0.0, 1.0);
        }
        let (i, j) = (idx[0], idx[1]);
        let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
        if corners.iter().any(|&(a, b)| self.is_masked(a, b)) {
            return Ok(None);
        }
        let (s, t) = (frac[0], frac[1]);
        let v = self.value(i, j) * (1.0 - s) * (1.0 - t)
            + self.value(i + 1, j) * s * (1.0 - t)
            + self.value(i, j + 1) * (1.0 - s) * t
            + self.value(i + 1, j + 1) * s * t;
        Ok(Some(v))
    }

    /// Central-difference gradient, one-sided at the grid edges. Nodes whose
    /// stencil touches a masked node are masked in the result.
    pub fn gradient(&self) -> Result<(FieldGrid, FieldGrid)> {
        let (n1, n2) = self.spec.shape;
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidGrid(
                "gradient needs at least two nodes per axis".into(),
            ));
        }
        let h = self.spec.spacing;
        let mut dx = vec![0.0; self.values.len()];
        let mut dy = vec![0.0; self.values.len()];
        let mut mask = vec![false; self.values.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                let k = i * n2 + j;
                let (ia, ib, wx) = if i == 0 {
                    (0, 1, 1.0)
                } else if i == n1 - 1 {
                    (n1 - 2, n1 - 1, 1.0)
                } else {
                    (i - 1, i + 1, 2.0)
                };
                let (ja, jb, wy) = if j == 0 {
                    (0, 1, 1.0)
                } else if j == n2 - 1 {
                    (n2 - 2, n2 - 1, 1.0)
                } else {
                    (j - 1, j + 1, 2.0)
                };
                mask[k] = self.is_masked(i, j)
                    || self.is_masked(ia, j)
                    || self.is_masked(ib, j)
                    || self.is_masked(i, ja)
                    || self.is_masked(i, jb);
                if !mask[k] {
                    dx[k] = (self.value(ib, j) - self.value(ia, j)) / (wx * h);
                    dy[k] = (self.value(i, jb) - self.value(i, ja)) / (wy * h);
                }
            }
        }
        let m = if mask.iter().any(|&b| b) {
            Some(mask)
        } else {
            None
        };
        Ok((
            FieldGrid::new(self.spec.clone(), dx, m.clone())?,
            FieldGrid::new(self.spec.clone(), dy, m)?,
        ))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x1,x2,value,masked")?;
        let (n1, n2) = self.spec.shape;
        for i in 0..n1 {
            for j in 0..n2 {
                let p = self.spec.node(i, j);
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{}",
                    p[0],
                    p[1],
                    self.value(i, j),
                    u8::from(self.is_masked(i, j))
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let name = path.display().to_string();
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: name.clone(),
            line,
            msg,
        };
        let file = std::fs::File::open(path)?;
        let mut rows: Vec<(f64, f64, f64, bool)> = Vec::new();
        for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if k == 0 {
                if line.trim() != "x1,x2,value,masked" {
                    return Err(parse_err(1, format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(parse_err(k + 1, format!("expected 4 fields, got {}", fields.len())));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(k + 1, format!("bad number {s:?}: {e}")))
            };
            rows.push((
                num(fields[0])?,
                num(fields[1])?,
                num(fields[2])?,
                fields[3].trim() == "1",
            ));
        }
        if rows.len() < 4 {
            return Err(Error::InputData(format!(
                "{name}: grid needs at least 4 nodes, got {}",
                rows.len()
            )));
        }
        // Row-major layout: x1 is constant over each run of n2 rows.
        let n2 = rows
            .iter()
            .position(|r| r.0 != rows[0].0)
            .ok_or_else(|| Error::InputData(format!("{name}: single-column grid")))?;
        if rows.len() % n2 != 0 {
            return Err(Error::InputData(format!(
                "{name}: {} rows do not form a rectangle of width {n2}",
                rows.len()
            )));
        }
        let n1 = rows.len() / n2;
        let spacing = rows[1].1 - rows[0].1;
        let spec = GridSpec::new(Point::new2(rows[0].0, rows[0].1), spacing, (n1, n2))?;
        for (k, row) in rows.iter().enumerate() {
            let p = spec.node(k / n2, k % n2);
            if (row.0 - p[0]).abs() > 1e-9 * spacing || (row.1 - p[1]).abs() > 1e-9 * spacing {
                return Err(Error::InputData(format!(
                    "{name}: node {k} at ({}, {}) is off the regular grid",
                    row.0, row.1
                )));
            }
        }
        let values = rows.iter().map(|r| r.2).collect();
        let mask = if rows.iter().any(|r| r.3) {
            Some(rows.iter().map(|r| r.3).collect())
        } else {
            None
        };
        FieldGrid::new(spec, values, mask)
    }
}

/// Mean absolute difference over nodes unmasked in both grids.
pub fn mae(a: &FieldGrid, b: &FieldGrid) -> Result<f64> {
    reduce_abs_diff(a, b).map(|(sum, count, _)| sum / count as f64)
}

/// Maximum absolute difference over nodes unmasked in both grids.
pub fn max_abs_error(a: &FieldGrid, b: &FieldGrid) -> Result<f64> {
    reduce_abs_diff(a, b).map(|(_, _, max)| max)
}

fn reduce_abs_diff(a: &FieldGrid, b: &FieldGrid) -> Result<(f64, usize, f64)> {
    if a.spec.shape != b.spec.shape {
        return Err(Error::GridShapeMismatch {
            a: a.spec.shape,
            b: b.spec.shape,
        });
    }
    let (n1, n2) = a.spec.shape;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut count = 0usize;
    for i in 0..n1 {
        for j in 0..n2 {
            if a.is_masked(i, j) || b.is_masked(i, j) {
                continue;
            }
            let d = (a.value(i, j) - b.value(i, j)).abs();
            sum += d;
            max = max.max(d);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::AllMasked);
    }
    Ok((sum, count, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_spec(n: usize, h: f64) -> GridSpec {
        GridSpec::new(Point::new2(0.0, 0.0), h, (n, n)).unwrap()
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linears() {
        let spec = unit_spec(5, 0.25);
        let g = FieldGrid::from_fn(spec.clone(), |p| p[0]).unwrap();
        assert_eq!(
            g.interpolate(&spec.node(2, 3)).unwrap().unwrap(),
            spec.node(2, 3)[0]
        );
        // Bilinear is exact on linear data everywhere.
        for &(x, y) in &[(0.1, 0.9), (0.333, 0.777), (1.0, 1.0), (0.0, 0.42)] {
            let v = g.interpolate(&Point::new2(x, y)).unwrap().unwrap();
            assert!((v - x).abs() < 1e-12);
        }
        assert!(g.interpolate(&Point::new2(1.5, 0.5)).is_err());
    }

    #[test]
    fn cell_midpoint_average() {
        let spec = GridSpec::new(Point::new2(0.0, 0.0), 1.0, (2, 2)).unwrap();
        let g = FieldGrid::new(spec, vec![0.0, 1.0, 2.0, 3.0], None).unwrap();
        let v = g.interpolate(&Point::new2(0.5, 0.5)).unwrap().unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn mae_examples() {
        let spec = unit_spec(2, 1.0);
        let a = FieldGrid::new(spec.clone(), vec![0.0, 1.0, 2.0, 3.0], None).unwrap();
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        let b = FieldGrid::new(spec.clone(), vec![0.5, 1.5, 2.5, 3.5], None).unwrap();
        assert!((mae(&a, &b).unwrap() - 0.5).abs() < 1e-15);

        let s2 = GridSpec::new(Point::new2(0.0, 0.0), 1.0, (2, 3)).unwrap();
        let c = FieldGrid::new(s2, vec![0.0; 6], None).unwrap();
        assert!(matches!(mae(&a, &c), Err(Error::GridShapeMismatch { .. })));
    }

    #[test]
    fn mae_skips_masked() {
        let spec = unit_spec(2, 1.0);
        let a = FieldGrid::new(
            spec.clone(),
            vec![0.0, 1.0, 2.0, 3.0],
            Some(vec![true, false, false, false]),
        )
        .unwrap();
        let b = FieldGrid::new(spec.clone(), vec![100.0, 2.0, 3.0, 4.0], None).unwrap();
        assert!((mae(&a, &b).unwrap() - 1.0).abs() < 1e-15);

        let all = FieldGrid::new(
            spec,
            vec![0.0; 4],
            Some(vec![true, true, true, true]),
        )
        .unwrap();
        assert!(matches!(mae(&all, &b), Err(Error::AllMasked)));
    }

    #[test]
    fn gradient_exact_on_linear_and_quadratic() {
        let spec = GridSpec::new(Point::new2(-1.0, -1.0), 0.02, (101, 101)).unwrap();
        let g = FieldGrid::from_fn(spec.clone(), |p| p[0]).unwrap();
        let (dx, dy) = g.gradient().unwrap();
        for v in dx.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for v in dy.values() {
            assert!(v.abs() < 1e-12);
        }

        let q = FieldGrid::from_fn(spec.clone(), |p| p[0] * p[0]).unwrap();
        let (dx, _) = q.gradient().unwrap();
        // Central differences are exact on quadratics at interior nodes.
        for i in 1..100 {
            for j in 0..101 {
                let x = spec.node(i, j)[0];
                assert!((dx.value(i, j) - 2.0 * x).abs() < 1e-12);
            }
        }

        let c = FieldGrid::from_fn(spec, |_| 3.25).unwrap();
        let (dx, dy) = c.gradient().unwrap();
        assert!(dx.values().iter().all(|v| v.abs() < 1e-12));
        assert!(dy.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn csv_round_trip() {
        let spec = GridSpec::new(Point::new2(-0.5, 0.25), 0.125, (3, 4)).unwrap();
        let mut vals = Vec::new();
        for k in 0..12 {
            vals.push((k as f64).sin() * 1e3 + 1.0 / 3.0);
        }
        let mut mask = vec![false; 12];
        mask[5] = true;
        let g = FieldGrid::new(spec, vals, Some(mask)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        g.write_csv(&path).unwrap();
        let back = FieldGrid::read_csv(&path).unwrap();
        assert_eq!(g, back);
    }
}
