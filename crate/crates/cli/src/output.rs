use anyhow::{Context, Result};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use vglab::report::{fmt_e12, VerificationReport};

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_e12(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn report_csv(rep: &VerificationReport) -> String {
    let rows = rep.checks.iter().map(|c| {
        let pass = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INCONCLUSIVE",
        };
        vec![Cell::Text(c.name.clone()), Cell::Num(c.lhs), Cell::Num(c.rhs), Cell::Num(c.slack), Cell::Text(pass.into())]
    });
    csv(&["name", "lhs", "rhs", "slack", "pass"], rows)
}

/// Provenance written next to every output file, kept out of the body so
/// bodies stay byte-identical across runs.
pub fn metadata(tol: f64) -> serde_json::Value {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or_default();
    json!({
        "tool": "vglab",
        "version": env!("CARGO_PKG_VERSION"),
        "args": std::env::args().collect::<Vec<_>>(),
        "unix_time": unix_time,
        "tolerance_scale": tol,
        "max_threads": std::env::var("VGLAB_MAX_THREADS").ok(),
    })
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `body` to `out` with a metadata sidecar, or to standard output.
pub fn emit(out: Option<&Path>, body: &str, tol: f64) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, body)?;
            let meta = serde_json::to_string_pretty(&metadata(tol))? + "\n";
            write_file(&sidecar_path(path), &meta)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).context("cannot write to standard output")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_only_when_needed() {
        let s = csv(&["a", "b"], [vec![Cell::Text("x,y".into()), Cell::Num(0.5)]]);
        assert_eq!(s, "a,b\n\"x,y\",5.000000000000e-01\n");
    }

    #[test]
    fn sidecar_sits_next_to_the_output() {
        assert_eq!(sidecar_path(Path::new("out/r.json")), Path::new("out/r.json.meta.json"));
    }
}
