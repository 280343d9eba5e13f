use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

/// Dimension surgery experiments on binary sequences.
///
/// Every command also reads `--config FILE`: flat `key=value` lines, one per
/// flag (`n=100000`, `estimator=block:8`). Flags on the command line win.
#[derive(Debug, Parser)]
#[command(name = "dimsurgery", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test sequence file.
    Gen(GenArgs),
    /// Bound curves over an (s, t) grid as CSV.
    Curves(CurvesArgs),
    /// Run one of the numerical checks; exit code 1 on any failure.
    Verify(VerifyArgs),
    /// Apply a surgery plan to a sequence file.
    Surgery(SurgeryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// i.i.d. bits with P(1) = p, or p = H^-1(s) when only --s is given.
    Bernoulli,
    /// Fair coin flips with every bit repeated once.
    JoinDup,
    /// Fair coin flips with all but every `stride`-th bit set to 0.
    ZeroPadded,
    Coin,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub stride: usize,
    /// Estimator for the reported dimension.
    #[arg(long, default_value = "bernoulli")]
    pub estimator: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 0.05)]
    pub grid: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    Harper,
    Corollary,
    Cover,
    Convexity,
    Concavity,
    Buffer,
    Duplication,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub which: VerifyKind,
    /// Word or sequence length; each check has its own default range.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Far-count radius for `corollary`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Shift for `convexity`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Covering radius for `cover`.
    #[arg(long)]
    pub r: Option<usize>,
    /// Flip fraction for `duplication`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Grid step for `convexity` and `concavity`.
    #[arg(long)]
    pub grid: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub c: f64,
    /// Sequence whose chunk estimates feed `buffer`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "bernoulli")]
    pub estimator: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurgeryArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// randomize, weak-srandom, raise (case picked from s and t),
    /// raise-case1, raise-case2 or lower.
    #[arg(long, default_value = "randomize")]
    pub strategy: String,
    /// Source dimension for raise (default: measured), target for lower.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub c: f64,
    #[arg(long, default_value = "bernoulli")]
    pub estimator: String,
    #[arg(long, default_value = "greedy")]
    pub searcher: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed list (`0..20` or `1,5,9`); prints one summary row per seed.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Exit 1 when the measured distance misses the bound by more than this.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// CSV report path (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the modified sequence.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

/// Parses `0..20`, `3` or `1,5,9`.
pub fn parse_seeds(spec: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Usage(format!("bad seed list {spec:?}"));
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a >= b {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    spec.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

/// Turns `key=value` lines into `--key value` arguments; blank lines and
/// `#` comments are skipped.
pub fn config_args(text: &str) -> CliResult<Vec<OsString>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", k + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", k + 1)));
        }
        out.push(format!("--{key}").into());
        out.push(value.trim().into());
    }
    Ok(out)
}

/// Removes `--config FILE` (or `--config=FILE`) from `argv` and splices the
/// file's flags in right after the subcommand, so later command-line flags
/// override them.
pub fn expand_config(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            path = Some(PathBuf::from(p));
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let injected = config_args(&text)?;
    // program name, subcommand, then the positional of gen/verify if present
    let mut at = rest.len().min(2);
    if rest.len() > at && !rest[at].to_string_lossy().starts_with('-') {
        let sub = rest[1].to_string_lossy();
        if sub == "gen" || sub == "verify" {
            at += 1;
        }
    }
    let tail = rest.split_off(at);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1, 5,9").unwrap(), vec![1, 5, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn config_lines() {
        let a = config_args("# c\nn = 10\n\nestimator=block:4\n").unwrap();
        assert_eq!(a, os(&["--n", "10", "--estimator", "block:4"]));
        assert!(config_args("oops").is_err());
    }

    #[test]
    fn command_line_overrides_config() {
        let dir = std::env::temp_dir().join(format!("dimsurgery-cfg-{}", std::process::id()));
        fs::write(&dir, "n=5\nseed=3\n").unwrap();
        let argv = os(&["dimsurgery", "verify", "harper", "--config", dir.to_str().unwrap(), "--n", "4"]);
        let expanded = expand_config(argv).unwrap();
        fs::remove_file(&dir).unwrap();
        let cli = Cli::try_parse_from(expanded).unwrap();
        let Command::Verify(v) = cli.command else { panic!() };
        assert_eq!((v.n, v.seed), (Some(4), 3));
    }
}
