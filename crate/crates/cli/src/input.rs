//! Two-column CSV input.

use std::io::Read;
use std::path::Path;

use diknn_core::SeriesPair;

use crate::error::{CliError, Result};

/// Reads `x,y` pairs. A first row whose fields are not both numeric is
/// taken as a header. Blank lines are skipped.
pub fn read_pair(path: &Path) -> Result<SeriesPair> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_pair(file, &path.display().to_string())
}

pub fn parse_pair(reader: impl Read, name: &str) -> Result<SeriesPair> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = csv.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Format { path: name.to_string(), line, message: e.to_string() }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let format_error = |message: String| CliError::Format { path: name.to_string(), line, message };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(format_error(format!("expected 2 columns, found {}", record.len())));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(format_error("non-finite value".to_string()));
                }
                x.push(a);
                y.push(b);
            }
            _ if first => {}
            _ => {
                return Err(format_error(format!("cannot parse `{}` as numbers", record.iter().collect::<Vec<_>>().join(","))));
            }
        }
        first = false;
    }
    Ok(SeriesPair::new(x, y)?)
}
