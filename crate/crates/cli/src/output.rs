//! Atomic file output and the input readers for maps and traces.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use magnon_core::coupled::TransmissionMap;
use magnon_core::map_io;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `path` through a temporary file in the same directory, renamed
/// into place once complete.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(fail)?;
        w.flush().map_err(fail)?;
    }
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn is_binary_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

/// Reads a map in either format, detected from the magic bytes.
pub fn read_map(path: &Path) -> Result<TransmissionMap<f64>, CliError> {
    let fail = |e: std::io::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let mut file = File::open(path).map_err(fail)?;
    let mut magic = [0u8; 8];
    let n = file.read(&mut magic).map_err(fail)?;
    let file = File::open(path).map_err(fail)?;
    if n == 8 && &magic == map_io::BINARY_MAGIC {
        map_io::read_binary(BufReader::new(file)).map_err(fail)
    } else {
        map_io::read_csv(BufReader::new(file)).map_err(fail)
    }
}

pub const TRACE_HEADER: &str = "trace,f_hz,value";

/// Named traces from a CSV `trace,f_hz,value`, in order of first appearance.
pub fn parse_traces(text: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(CliError::Validation(format!("line 1: expected header `{TRACE_HEADER}`"))),
    }
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Validation(format!("line {}: {what}", n + 1));
        let mut cols = line.split(',');
        let (Some(name), Some(f), Some(y), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected 3 columns"));
        };
        let f: f64 = f.trim().parse().map_err(|_| bad("bad frequency"))?;
        let y: f64 = y.trim().parse().map_err(|_| bad("bad value"))?;
        let name = name.trim();
        match out.iter_mut().find(|(k, _)| k == name) {
            Some((_, pts)) => pts.push((f, y)),
            None => out.push((name.to_string(), vec![(f, y)])),
        }
    }
    Ok(out)
}

pub fn write_traces(w: &mut dyn Write, traces: &[(String, Vec<(f64, f64)>)]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for (name, pts) in traces {
        for (f, y) in pts {
            writeln!(w, "{name},{f:?},{y:?}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_round_trip() {
        let traces = vec![("a".to_string(), vec![(1.0, 0.1), (2.0, 0.2)]), ("b".to_string(), vec![(3.0, 1.0 / 3.0)])];
        let mut buf = Vec::new();
        write_traces(&mut buf, &traces).unwrap();
        assert_eq!(parse_traces(std::str::from_utf8(&buf).unwrap()).unwrap(), traces);
    }

    #[test]
    fn bad_trace_line_reports_line_number() {
        let err = parse_traces("trace,f_hz,value\na,1,2\na,x,3\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        std::fs::write(&p, "old").unwrap();
        write_atomic(&p, |w| w.write_all(b"new")).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
