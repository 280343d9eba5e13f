use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::CliResult;

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
