//! CSV formats for measurements and well records.
//!
//! Decimals are written with 17 significant digits so parsing reproduces the
//! in-memory doubles exactly.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Point;
use crate::training::Dataset;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(path: &str, line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        path: path.to_string(),
        line,
        msg: format!("bad number {s:?}: {e}"),
    })
}

/// Write a measurement table: header `x1,x2,u`, one observation per row.
pub fn write_measurements(path: &Path, points: &[Point], values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x1,x2,u")?;
    for (p, v) in points.iter().zip(values) {
        writeln!(w, "{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a measurement table written by [`write_measurements`].
pub fn read_measurements(path: &Path) -> Result<Dataset> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::InputData(format!("{name}: {e}")))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "x1,x2,u" {
                return Err(Error::Parse {
                    path: name,
                    line: 1,
                    msg: format!("expected header \"x1,x2,u\", got {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: name,
                line: k + 1,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        points.push(Point::new2(
            parse_f64(&name, k + 1, fields[0])?,
            parse_f64(&name, k + 1, fields[1])?,
        ));
        values.push(parse_f64(&name, k + 1, fields[2])?);
    }
    Dataset::new(points, values)
}

/// One projected well observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellRecord {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub head: f64,
}

/// Read a well table: header `id,x,y,head`, unique ids, finite numbers.
pub fn read_wells(path: &Path) -> Result<Vec<WellRecord>> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::InputData(format!("{name}: {e}")))?;
    let mut records: Vec<WellRecord> = Vec::new();
    for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "id,x,y,head" {
                return Err(Error::Parse {
                    path: name,
                    line: 1,
                    msg: format!("expected header \"id,x,y,head\", got {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                path: name,
                line: k + 1,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let rec = WellRecord {
            id: fields[0].trim().to_string(),
            x: parse_f64(&name, k + 1, fields[1])?,
            y: parse_f64(&name, k + 1, fields[2])?,
            head: parse_f64(&name, k + 1, fields[3])?,
        };
        if !(rec.x.is_finite() && rec.y.is_finite() && rec.head.is_finite()) {
            return Err(Error::Parse {
                path: name,
                line: k + 1,
                msg: "non-finite well record".into(),
            });
        }
        if records.iter().any(|r| r.id == rec.id) {
            return Err(Error::Parse {
                path: name,
                line: k + 1,
                msg: format!("duplicate well id {:?}", rec.id),
            });
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn write_wells(path: &Path, records: &[WellRecord]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "id,x,y,head")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            r.id,
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.head)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write a loss trace: `iteration,obs_loss,boundary_loss,total`. The second
/// component column holds the physics term for PINN runs.
pub fn write_trace(path: &Path, trace: &[crate::training::LossSample]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "iteration,obs_loss,boundary_loss,total")?;
    for (k, row) in trace.iter().enumerate() {
        writeln!(
            w,
            "{k},{},{},{}",
            fmt_f64(row.observation),
            fmt_f64(row.boundary),
            fmt_f64(row.total)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write a per-lambda cross-validation table:
/// `lambda,final_data_loss,final_physics_loss,score`.
pub fn write_lambda_scores(path: &Path, table: &[crate::pinn::LambdaScore]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "lambda,final_data_loss,final_physics_loss,score")?;
    for row in table {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(row.lambda),
            fmt_f64(row.final_data_loss),
            fmt_f64(row.final_physics_loss),
            fmt_f64(row.score)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let points = vec![
            Point::new2(0.1 + 0.2, -1.0 / 3.0),
            Point::new2(1e-17, 2.0f64.sqrt()),
        ];
        let values = vec![std::f64::consts::PI, -0.0];
        write_measurements(&path, &points, &values).unwrap();
        let back = read_measurements(&path).unwrap();
        assert_eq!(back.points, points);
        assert_eq!(back.values, values);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2,u\n0.0,0.0,1.0\n0.1,oops,2.0\n").unwrap();
        match read_measurements(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wells_round_trip_and_duplicate_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wells.csv");
        let records = vec![
            WellRecord {
                id: "w1".into(),
                x: 350_000.0,
                y: 3_900_000.0,
                head: 70.5,
            },
            WellRecord {
                id: "w2".into(),
                x: 356_125.3,
                y: 3_902_400.8,
                head: 64.25,
            },
        ];
        write_wells(&path, &records).unwrap();
        assert_eq!(read_wells(&path).unwrap(), records);

        std::fs::write(&path, "id,x,y,head\na,0,0,1\na,1,1,2\n").unwrap();
        assert!(matches!(read_wells(&path), Err(Error::Parse { .. })));
    }
}
