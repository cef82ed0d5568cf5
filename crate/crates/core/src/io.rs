//! CSV snapshot format: header `x,u1,u2,u3` (spin) or `x,f` (scalar), one
//! row per node, 17 significant digits.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, SpinField, Vec3};

pub const SPIN_HEADER: &str = "x,u1,u2,u3";
pub const SCALAR_HEADER: &str = "x,f";

pub fn write_spin_csv(path: &Path, u: &SpinField) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{SPIN_HEADER}")?;
    for (x, v) in u.grid().nodes().zip(u.values()) {
        writeln!(w, "{x:.16e},{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scalar_csv(path: &Path, f: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{SCALAR_HEADER}")?;
    for (x, v) in f.grid().nodes().zip(f.values()) {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows(path: &Path, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != header {
                return Err(Error::Csv {
                    line: lineno,
                    msg: format!("expected header `{header}`, got `{line}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv {
                line: lineno,
                msg: e.to_string(),
            })?;
        if row.len() != width {
            return Err(Error::Csv {
                line: lineno,
                msg: format!("expected {width} columns, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Recovers the uniform grid from the node column.
fn grid_from_nodes(xs: &[f64]) -> Result<Grid> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Csv {
            line: 0,
            msg: "too few rows".into(),
        });
    }
    let half_width = 0.5 * (xs[n - 1] - xs[0]);
    let center = 0.5 * (xs[n - 1] + xs[0]);
    let grid = Grid::new(half_width, n)?.shifted(center);
    let h = grid.spacing();
    for (i, &x) in xs.iter().enumerate() {
        if (grid.node(i) - x).abs() > 1e-9 * (1.0 + h) {
            return Err(Error::Csv {
                line: i + 2,
                msg: format!("node {x} does not lie on a uniform grid"),
            });
        }
    }
    Ok(grid)
}

pub fn read_spin_csv(path: &Path) -> Result<SpinField> {
    let rows = read_rows(path, SPIN_HEADER, 4)?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = grid_from_nodes(&xs)?;
    SpinField::new(grid, rows.iter().map(|r| Vec3::new(r[1], r[2], r[3])).collect())
}

pub fn read_scalar_csv(path: &Path) -> Result<ScalarField> {
    let rows = read_rows(path, SCALAR_HEADER, 2)?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = grid_from_nodes(&xs)?;
    ScalarField::new(grid, rows.iter().map(|r| r[1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walls::wall_field;
    use proptest::prelude::*;

    #[test]
    fn spin_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(20.0, 257).unwrap();
        let u = wall_field(&g).rotated(0.3);
        let p = dir.path().join("u.csv");
        write_spin_csv(&p, &u).unwrap();
        let back = read_spin_csv(&p).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.grid().len(), 257);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("x,u1,u2,u3\n"));
    }

    #[test]
    fn rejects_bad_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "x,y\n0,1\n").unwrap();
        assert!(matches!(read_scalar_csv(&p), Err(Error::Csv { line: 1, .. })));
        fs::write(&p, "x,f\n0,1\n1,zz\n").unwrap();
        assert!(matches!(read_scalar_csv(&p), Err(Error::Csv { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn scalar_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 8..40), x in 0.5f64..50.0) {
            let dir = tempfile::tempdir().unwrap();
            let g = Grid::new(x, vals.len()).unwrap();
            let f = ScalarField::new(g, vals.clone()).unwrap();
            let p = dir.path().join("f.csv");
            write_scalar_csv(&p, &f).unwrap();
            let back = read_scalar_csv(&p).unwrap();
            prop_assert_eq!(back.values(), &vals[..]);
        }
    }
}
