//! Plain CSV files for matrices, vectors and solver traces.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sensing::SensingMatrix;
use crate::solvers::{SolverTrace, TraceDetail};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn parse_rows<R: Read>(input: R, what: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidArgument(format!("{what}: {e}")))?;
        let row = rec
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("{what} line {}: malformed number '{f}'", i + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Reads a matrix with one comma-separated row per line.
pub fn read_matrix<R: Read>(input: R) -> Result<SensingMatrix> {
    let rows = parse_rows(input, "matrix")?;
    let m = rows.len();
    if m == 0 {
        return Err(Error::InvalidArgument("matrix: no rows".into()));
    }
    let n = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Dimension(format!(
            "matrix row {} has {} entries, expected {n}",
            i + 1,
            r.len()
        )));
    }
    SensingMatrix::from_row_major(m, n, rows.concat())
}

pub fn read_matrix_file(path: &Path) -> Result<SensingMatrix> {
    read_matrix(BufReader::new(File::open(path).map_err(|e| io_err(path, e))?))
}

/// Reads a vector written either one value per line or as a single row.
pub fn read_vector<R: Read>(input: R) -> Result<Vec<f64>> {
    let rows = parse_rows(input, "vector")?;
    match rows.len() {
        0 => Err(Error::InvalidArgument("vector: no values".into())),
        1 => Ok(rows.into_iter().next().unwrap()),
        _ if rows.iter().all(|r| r.len() == 1) => Ok(rows.concat()),
        _ => Err(Error::Dimension(
            "vector: expected one row or one value per line".into(),
        )),
    }
}

pub fn read_vector_file(path: &Path) -> Result<Vec<f64>> {
    read_vector(BufReader::new(File::open(path).map_err(|e| io_err(path, e))?))
}

pub fn write_matrix<W: Write>(out: W, a: &SensingMatrix) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for i in 0..a.rows() {
        w.write_record(a.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()
}

/// One value per line.
pub fn write_vector<W: Write>(mut out: W, v: &[f64]) -> std::io::Result<()> {
    for x in v {
        writeln!(out, "{x}")?;
    }
    Ok(())
}

/// One line per recorded state: `iteration,objective,residual_norm,support`
/// followed by the iterate entries `x0..x{N-1}`. The support is a
/// space-separated list of 0-based indices. In light traces only the final
/// state carries a support and iterate.
pub fn write_trace<W: Write>(out: W, trace: &SolverTrace) -> std::io::Result<()> {
    let n = trace.final_iterate().len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "iteration".to_string(),
        "objective".into(),
        "residual_norm".into(),
        "support".into(),
    ];
    header.extend((0..n).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    let states = trace.objectives.len();
    for k in 0..states {
        let state = match trace.detail {
            TraceDetail::Full => Some(k),
            TraceDetail::Light => (k + 1 == states).then_some(0),
        };
        let mut rec = vec![
            k.to_string(),
            trace.objectives[k].to_string(),
            trace.residual_norms[k].to_string(),
        ];
        match state {
            Some(i) => {
                rec.push(
                    trace.supports[i]
                        .indices()
                        .iter()
                        .map(|j| j.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                );
                rec.extend(trace.iterates[i].as_slice().iter().map(|v| v.to_string()));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), n + 1)),
        }
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{iht, SolverConfig};
    use crate::sparsity::MeasurementVector;

    #[test]
    fn matrix_round_trip() {
        let a = crate::sensing::gaussian_matrix(3, 4, 1, crate::sensing::MatrixScaling::Rip).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn vector_layouts() {
        assert_eq!(read_vector("1,2,3\n".as_bytes()).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(read_vector("1\n2\n# note\n3\n".as_bytes()).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(read_vector("1,2\n3,4\n".as_bytes()).is_err());
        assert!(read_vector("".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_vector(&mut buf, &[0.5, -1.0]).unwrap();
        assert_eq!(read_vector(buf.as_slice()).unwrap(), vec![0.5, -1.0]);
    }

    #[test]
    fn ragged_and_malformed_matrices() {
        assert!(matches!(read_matrix("1,2\n3\n".as_bytes()), Err(Error::Dimension(_))));
        let err = read_matrix("1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn trace_csv_shape() {
        let a = SensingMatrix::identity(3);
        let y = MeasurementVector::new(vec![5.0, 3.0, 1.0]).unwrap();
        let trace = iht(&a, &y, 1, &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,objective,residual_norm,support,x0,x1,x2");
        assert_eq!(lines.len(), 1 + trace.objectives.len());
        assert!(lines[2].starts_with("1,") && lines[2].ends_with(",0,5,0,0"), "{}", lines[2]);
    }
}
