//! CSV ingestion/emission for quadrature data and atomic file output.
//!
//! Format: a header line `quadrature` or `quadrature,phase`, then one
//! decimal value (or value, phase pair) per row. Lines starting with `#`
//! are comments. Phases are radians and are reduced modulo 2π on input.

use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::moments::QuadratureDataset;

pub fn read_csv<R: Read>(reader: R, vacuum_variance: f64) -> Result<QuadratureDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(csv_error)?.clone();
    let header_line = headers.position().map_or(1, |p| p.line());
    let tagged = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["quadrature"] => false,
        ["quadrature", "phase"] => true,
        [] | [""] => {
            return Err(Error::Parse { line: header_line, message: "missing header line".into() });
        }
        other => {
            return Err(Error::Parse {
                line: header_line,
                message: format!("expected header `quadrature` or `quadrature,phase`, found `{}`", other.join(",")),
            });
        }
    };

    let mut values = Vec::new();
    let mut phases = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |field: &str, what: &str| -> Result<f64> {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("{what} `{field}` is not a decimal number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse { line, message: format!("{what} `{field}` is not finite") })
            }
        };
        values.push(parse(&record[0], "quadrature")?);
        if tagged {
            phases.push(parse(&record[1], "phase")?.rem_euclid(TAU) % TAU);
        }
    }
    if values.is_empty() {
        return Err(Error::Parse { line: header_line, message: "no data rows".into() });
    }
    QuadratureDataset::with_convention(values, tagged.then_some(phases), vacuum_variance)
}

pub fn read_csv_file(path: &Path, vacuum_variance: f64) -> Result<QuadratureDataset> {
    read_csv(std::fs::File::open(path)?, vacuum_variance)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

/// Writes `# comment` lines, the header, and one row per sample. Values use
/// the shortest representation that reads back bit-exactly.
pub fn write_csv<W: Write>(mut out: W, data: &QuadratureDataset, comments: &[String]) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    match data.phases() {
        Some(ph) => {
            writeln!(out, "quadrature,phase")?;
            for (x, p) in data.values().iter().zip(ph) {
                writeln!(out, "{x},{p}")?;
            }
        }
        None => {
            writeln!(out, "quadrature")?;
            for x in data.values() {
                writeln!(out, "{x}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_and_tagged() {
        let d = read_csv("# hello\nquadrature\n0.5\n-1.25\n".as_bytes(), 0.5).unwrap();
        assert_eq!(d.values(), &[0.5, -1.25]);
        let t = read_csv("quadrature,phase\n0.5,0.1\n# mid\n1.0,7.0\n".as_bytes(), 0.5).unwrap();
        assert_eq!(t.values(), &[0.5, 1.0]);
        assert!((t.phases().unwrap()[1] - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn empty_input_is_parse_error() {
        assert!(matches!(read_csv("".as_bytes(), 0.5), Err(Error::Parse { .. })));
        assert!(matches!(read_csv("quadrature\n".as_bytes(), 0.5), Err(Error::Parse { .. })));
    }

    #[test]
    fn bad_row_reports_line() {
        match read_csv("quadrature\n0.1\n0.2\nabc\n".as_bytes(), 0.5) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match read_csv("# c\nquadrature\ninf\n".as_bytes(), 0.5) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(matches!(read_csv("x\n1\n".as_bytes(), 0.5), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(matches!(read_csv("quadrature,phase\n1,0.1\n2\n".as_bytes(), 0.5), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_read_is_exact() {
        let d = QuadratureDataset::tagged(vec![0.1 + 0.2, -3.5e-7], vec![1.0 / 3.0, 2.5]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &d, &["seed 1".to_string()]).unwrap();
        let back = read_csv(buf.as_slice(), 0.5).unwrap();
        assert_eq!(back, d);
    }
}
