use std::fmt::Write as _;

use dimsurgery_core::entropy::liminf_surrogate;
use dimsurgery_core::hamming::{delsarte_piret_bound, greedy_cover, harper_far_count, verify_harper};
use dimsurgery_core::proxy::chunk_dims;
use dimsurgery_core::surgery::{duplication_decode, duplication_encode, DuplicationDescription};
use dimsurgery_core::{
    buffer_schedule, entropy, entropy_inv, raise_profile, verify_concavity_lemma, verify_convexity_lemma,
    BitSequence, DimEstimator,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{VerifyArgs, VerifyKind};
use crate::error::{CliError, CliResult};

/// CSV body, number of failed rows and a one-line summary.
pub struct Outcome {
    pub csv: String,
    pub failures: usize,
    pub summary: String,
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ trial as u64
}

pub fn run(a: &VerifyArgs) -> CliResult<Outcome> {
    match a.which {
        VerifyKind::Harper => harper(a),
        VerifyKind::Corollary => corollary(a),
        VerifyKind::Cover => cover(a),
        VerifyKind::Convexity => convexity(a),
        VerifyKind::Concavity => concavity(a),
        VerifyKind::Buffer => buffer(a),
        VerifyKind::Duplication => duplication(a),
    }
}

fn harper(a: &VerifyArgs) -> CliResult<Outcome> {
    let ns: Vec<usize> = a.n.map_or_else(|| (1..=10).collect(), |n| vec![n]);
    let trials = a.trials.unwrap_or(10_000);
    let reps = ns
        .par_iter()
        .map(|&n| verify_harper(n, trials, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("n,checked,failures,tightest_distance,tightest_bound\n");
    let mut failures = 0;
    for r in &reps {
        failures += r.failures.len();
        let (d, b) = r.tightest.as_ref().map_or((String::new(), String::new()), |t| {
            (t.distance.to_string(), t.bound.to_string())
        });
        let _ = writeln!(csv, "{},{},{},{d},{b}", r.n, r.checked, r.failures.len());
    }
    let checked: usize = reps.iter().map(|r| r.checked).sum();
    Ok(Outcome {
        csv,
        failures,
        summary: format!("harper: {checked} set pairs, {failures} violations"),
    })
}

fn corollary(a: &VerifyArgs) -> CliResult<Outcome> {
    let ns: Vec<usize> = a.n.map_or_else(|| vec![10, 12, 14], |n| vec![n]);
    let epss: Vec<f64> = a.eps.map_or_else(|| vec![0.1, 0.2], |e| vec![e]);
    let trials = a.trials.unwrap_or(20);
    let mut jobs = Vec::new();
    for &n in &ns {
        for &eps in &epss {
            jobs.extend((0..trials).map(move |k| (n, eps, k)));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(n, eps, k)| -> CliResult<(usize, f64, usize, usize, u64, f64)> {
            if n > 24 {
                return Err(CliError::Usage(format!("corollary needs n <= 24, got {n}")));
            }
            let q = entropy(0.5 - eps / 2.0)?;
            let universe = 1usize << n;
            let size = ((n as f64 * q).exp2().ceil() as usize).min(universe);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(a.seed, k) ^ ((n as u64) << 40));
            let set: Vec<u64> = sample(&mut rng, universe, size).into_iter().map(|i| i as u64).collect();
            let far = harper_far_count(n, &set, eps)?;
            Ok((n, eps, k, size, far, (n as f64 * q + 2.0).exp2()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = String::from("n,eps,trial,size,far_count,limit,passed\n");
    let mut failures = 0;
    for (n, eps, k, size, far, limit) in rows {
        let ok = far as f64 <= limit;
        failures += usize::from(!ok);
        let _ = writeln!(csv, "{n},{eps},{k},{size},{far},{limit},{ok}");
    }
    Ok(Outcome {
        csv,
        failures,
        summary: format!("corollary: {} trials, {failures} above 2^(nq+2)", jobs.len()),
    })
}

fn cover(a: &VerifyArgs) -> CliResult<Outcome> {
    let ns: Vec<usize> = a.n.map_or_else(|| (1..=18).collect(), |n| vec![n]);
    let mut cases = Vec::new();
    for &n in &ns {
        match a.r {
            Some(r) => cases.push((n, r)),
            None => cases.extend([0.1, 0.2, 0.3, 0.4].map(|f: f64| (n, (f * n as f64).floor() as usize))),
        }
    }
    let rows = cases
        .par_iter()
        .map(|&(n, r)| -> CliResult<(usize, usize, usize, f64, bool)> {
            let c = greedy_cover(n, r)?;
            Ok((n, r, c.len(), delsarte_piret_bound(n, r), c.is_covering()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = String::from("n,r,size,bound,covering,passed\n");
    let mut failures = 0;
    for (n, r, size, bound, covering) in rows {
        let ok = covering && (size as f64) < bound;
        failures += usize::from(!ok);
        let _ = writeln!(csv, "{n},{r},{size},{bound},{covering},{ok}");
    }
    Ok(Outcome {
        csv,
        failures,
        summary: format!("cover: {} codes, {failures} failures", cases.len()),
    })
}

fn convexity(a: &VerifyArgs) -> CliResult<Outcome> {
    let deltas: Vec<f64> = a.delta.map_or_else(|| (1..=9).map(|k| k as f64 * 0.05).collect(), |d| vec![d]);
    let step = a.grid.unwrap_or(1e-3);
    let mut csv = String::from("delta,inflection,sign_changes,worst_violation,passed\n");
    let mut failures = 0;
    let mut zs = Vec::new();
    for d in deltas {
        let r = verify_convexity_lemma(d, step)?;
        let ok = r.sign_pattern_ok && r.sign_changes == 1 && r.failures.is_empty();
        failures += usize::from(!ok);
        let z = r.inflection.map(|z| z.to_string()).unwrap_or_default();
        zs.push(format!("{d}:{}", r.inflection.map_or("-".into(), |z| format!("{z:.4}"))));
        let _ = writeln!(csv, "{d},{z},{},{},{ok}", r.sign_changes, r.worst_violation);
    }
    Ok(Outcome {
        csv,
        failures,
        summary: format!("convexity: inflection z per delta {}; {failures} failures", zs.join(" ")),
    })
}

fn concavity(a: &VerifyArgs) -> CliResult<Outcome> {
    let step = a.grid.unwrap_or(0.002);
    let r = verify_concavity_lemma(step)?;
    let ok = r.sign_pattern_ok && r.failures.is_empty();
    let mut csv = String::from("grid_step,worst_violation,tolerance,passed\n");
    let _ = writeln!(csv, "{step},{},{},{ok}", r.worst_violation, r.tolerance);
    for f in &r.failures {
        eprintln!("concavity: {f}");
    }
    Ok(Outcome {
        csv,
        failures: usize::from(!ok),
        summary: format!("concavity: worst second difference {:e}", r.worst_violation),
    })
}

fn buffer(a: &VerifyArgs) -> CliResult<Outcome> {
    let families: Vec<(String, Vec<f64>)> = match &a.input {
        Some(path) => {
            let est: DimEstimator = a.estimator.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
            let x = BitSequence::read_file(path)?;
            vec![(path.display().to_string(), chunk_dims(&x, &est)?)]
        }
        None => {
            let h = a.n.unwrap_or(10_000);
            vec![
                ("constant".into(), vec![0.5; h]),
                ("alternating".into(), (0..h).map(|i| if i % 2 == 0 { 0.3 } else { 0.7 }).collect()),
                ("drifting".into(), (0..h).map(|i| 0.5 + 0.25 * ((i as f64 + 1.0).ln() / 2.0).sin()).collect()),
            ]
        }
    };
    let mut csv = String::from("family,horizon,s_liminf,b,eps_final,passed\n");
    let mut failures = 0;
    for (name, seq) in families {
        let horizon = a.n.unwrap_or(seq.len()).min(seq.len());
        let seq = &seq[..horizon];
        let sched = buffer_schedule(a.c, seq, horizon)?;
        let s = liminf_surrogate(seq);
        // direct recheck of the schedule's inequality
        let (mut sum, mut n_j) = (0.0, 0.0);
        let mut ok = true;
        for j in 1..=horizon {
            sum += raise_profile(seq[j - 1], sched.eps[j])? * (j * j) as f64;
            if j > 1 {
                n_j += ((j - 1) * (j - 1)) as f64;
            }
            ok &= sum - a.c * (j * j) as f64 > s * n_j - sched.b;
        }
        failures += usize::from(!ok);
        let _ = writeln!(csv, "{name},{horizon},{s},{},{},{ok}", sched.b, sched.eps[horizon]);
    }
    Ok(Outcome {
        csv,
        failures,
        summary: format!("buffer: c = {}, {failures} failing sequences", a.c),
    })
}

fn duplication(a: &VerifyArgs) -> CliResult<Outcome> {
    let n = a.n.unwrap_or(10_000);
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliError::Usage(format!("duplication needs an even n >= 2, got {n}")));
    }
    let trials = a.trials.unwrap_or(100);
    let frac = match a.p {
        Some(p) => p,
        None => entropy_inv(0.5)?,
    };
    if !(0.0..=1.0).contains(&frac) {
        return Err(CliError::Usage(format!("flip fraction {frac} outside [0, 1]")));
    }
    let flips = (frac * n as f64).floor() as usize;
    let nf = n as f64;
    let bound = nf + frac * nf + nf / 4.0 + 2.0 * nf.log2() + 16.0;
    let rows = (0..trials)
        .into_par_iter()
        .map(|k| -> CliResult<(usize, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(a.seed, k));
            let z = BitSequence::coin(n / 2, &mut rng);
            let y = BitSequence::from_bools(z.iter().flat_map(|b| [b, b]));
            let mut x = y.clone();
            for i in sample(&mut rng, n, flips) {
                x.flip(i);
            }
            let d = duplication_encode(&x, &y)?;
            let bits = d.to_bits();
            let parsed = DuplicationDescription::from_bits(&bits, n)?;
            let exact = duplication_decode(&d)? == y && duplication_decode(&parsed)? == y;
            Ok((d.total_length_bits, exact && bits.len() == d.total_length_bits))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = String::from("trial,n,flips,total_bits,bound,round_trip,passed\n");
    let mut failures = 0;
    for (k, (total, exact)) in rows.iter().enumerate() {
        let ok = *exact && *total as f64 <= bound;
        failures += usize::from(!ok);
        let _ = writeln!(csv, "{k},{n},{flips},{total},{bound},{exact},{ok}");
    }
    let longest = rows.iter().map(|r| r.0).max().unwrap_or(0);
    Ok(Outcome {
        csv,
        failures,
        summary: format!("duplication: {trials} instances, longest {longest} bits (bound {bound:.1}), {failures} failures"),
    })
}
