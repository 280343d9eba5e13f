use std::fmt::Write as _;

use dimsurgery_core::{bound_curves, case_select, RaiseCase};

use crate::error::{CliError, CliResult};

pub const CURVES_CSV_HEADER: &str = "s,t,naive,raise,lower,case";

fn grid_points(step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Usage(format!("grid step must be in (0, 1], got {step}")));
    }
    let k = (1.0 / step - 1e-9).ceil() as usize;
    // rounded so 0.1 steps print as 0.3, not 0.30000000000000004
    Ok((0..=k).map(|i| ((i as f64 * step * 1e12).round() / 1e12).min(1.0)).collect())
}

/// Rows for every grid pair `s <= t`. `case` is `identity` on the diagonal,
/// `randomize` at `t = 1` and otherwise the raise case.
pub fn run(step: f64) -> CliResult<String> {
    let pts = grid_points(step)?;
    let mut out = format!("{CURVES_CSV_HEADER}\n");
    for (i, &s) in pts.iter().enumerate() {
        for &t in &pts[i..] {
            let b = bound_curves(s, t)?;
            let case = if s == t {
                "identity"
            } else if t >= 1.0 {
                "randomize"
            } else {
                match case_select(s, t)? {
                    RaiseCase::Case1 => "case1",
                    RaiseCase::Case2 => "case2",
                }
            };
            let _ = writeln!(out, "{s},{t},{},{},{},{case}", b.naive, b.raise, b.lower);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends_at_one() {
        assert_eq!(grid_points(0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(*grid_points(0.3).unwrap().last().unwrap(), 1.0);
        assert!(grid_points(0.0).is_err());
    }
}
