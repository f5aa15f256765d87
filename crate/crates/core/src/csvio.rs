use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Write a CSV file with the given header and pre-formatted rows.
pub fn write_csv<I, S>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.as_ref())?;
    }
    w.flush()?;
    Ok(())
}

/// Export a trajectory as CSV with header `t,value`.
pub fn write_trajectory<F: Real>(path: &Path, points: &[(F, F)]) -> Result<()> {
    write_csv(path, "t,value", points.iter().map(|(t, v)| format!("{t},{v}")))
}

/// Read a two-column numeric CSV, tolerating a single header line.
pub fn read_two_column_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let x = fields.next().map(str::trim).unwrap_or("");
        let y = fields.next().map(str::trim).unwrap_or("");
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push((x, y)),
            // First line may be a header; anything else is malformed.
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Numerical(format!(
                    "line {}: expected two numeric columns, got {line:?}",
                    i + 1
                )))
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write_trajectory(&path, &[(0.0_f64, 1.0), (0.5, 2.25)]).unwrap();
        let back = read_two_column_csv(&path).unwrap();
        assert_eq!(back, vec![(0.0, 1.0), (0.5, 2.25)]);
    }

    #[test]
    fn rejects_garbage_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,value\n1.0,2.0\nnope,3.0\n").unwrap();
        assert!(matches!(read_two_column_csv(&path), Err(Error::Numerical(_))));
    }
}
