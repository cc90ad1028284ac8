//! Table serialization: one `# {json}` metadata line followed by CSV.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::sweep::SweepResult;

pub fn write_table<W: Write>(result: &SweepResult, out: W) -> std::io::Result<()> {
    let mut out = out;
    let header = serde_json::to_string(&result.header).map_err(std::io::Error::other)?;
    writeln!(out, "# {header}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&result.columns)?;
    for row in &result.rows {
        w.write_record(row.iter().map(|v| v.render()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_table(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_table(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("table is utf-8")
}

/// Writes to `path`, or to stdout for `None` and `-`.
pub fn save(result: &SweepResult, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            let file = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
            write_table(result, std::io::BufWriter::new(file)).map_err(|e| CliError::io(p, e))
        }
        _ => write_table(result, std::io::stdout().lock()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Parses a table written by [`write_table`] into its metadata and records.
pub fn read_table(text: &str) -> Result<(serde_json::Value, Vec<String>, Vec<Vec<String>>)> {
    let bad = |m: String| CliError::Config(format!("malformed table: {m}"));
    let (first, rest) = text.split_once('\n').ok_or_else(|| bad("no header line".into()))?;
    let json = first.strip_prefix("# ").ok_or_else(|| bad("missing '# ' metadata prefix".into()))?;
    let meta = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let columns = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    Ok((meta, columns, rows))
}
