use dimsurgery_core::proxy::sequence_dim;
use dimsurgery_core::{entropy_inv, BitSequence, DimEstimator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{GenArgs, GenKind};
use crate::error::{CliError, CliResult};

pub const GEN_CSV_HEADER: &str = "kind,n,seed,ones,dim,distance_to_source";

/// The generated sequence and, for derived kinds, the coin sequence it came
/// from.
pub fn generate(args: &GenArgs) -> CliResult<(BitSequence, Option<BitSequence>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let n = args.n;
    Ok(match args.kind {
        GenKind::Coin => (BitSequence::coin(n, &mut rng), None),
        GenKind::Bernoulli => {
            let p = match (args.p, args.s) {
                (Some(p), _) => p,
                (None, Some(s)) => entropy_inv(s)?,
                (None, None) => 0.5,
            };
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("p = {p} is not a probability")));
            }
            (BitSequence::bernoulli(n, p, &mut rng), None)
        }
        GenKind::JoinDup => {
            let z = BitSequence::coin(n.div_ceil(2), &mut rng);
            let y = BitSequence::from_bools(z.iter().flat_map(|b| [b, b]).take(n));
            (y, None)
        }
        GenKind::ZeroPadded => {
            if args.stride == 0 {
                return Err(CliError::Usage("stride must be at least 1".into()));
            }
            let src = BitSequence::coin(n, &mut rng);
            let y = BitSequence::from_bools(src.iter().enumerate().map(|(i, b)| b && i % args.stride == 0));
            (y, Some(src))
        }
    })
}

pub fn run(args: &GenArgs) -> CliResult<String> {
    let est: DimEstimator = args.estimator.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
    let (y, src) = generate(args)?;
    y.write_file(&args.out)?;
    let dim = if y.is_empty() { 0.0 } else { sequence_dim(&y, &est, None)?.final_value };
    let dist = match src {
        Some(s) if !y.is_empty() => (s.hamming(&y)? as f64 / y.len() as f64).to_string(),
        _ => String::new(),
    };
    let kind = match args.kind {
        GenKind::Bernoulli => "bernoulli",
        GenKind::JoinDup => "join_dup",
        GenKind::ZeroPadded => "zero_padded",
        GenKind::Coin => "coin",
    };
    Ok(format!("{GEN_CSV_HEADER}\n{kind},{},{},{},{dim},{dist}\n", y.len(), args.seed, y.count_ones()))
}
