use std::fmt::Write as _;

use dimsurgery_core::entropy::liminf_surrogate;
use dimsurgery_core::proxy::chunk_dims;
use dimsurgery_core::surgery::{
    apply_plan, default_eps_seq, plan_identity, plan_lower, plan_randomize, plan_raise, plan_weak_srandom,
    Searcher, Strategy, SurgeryPlan, SurgeryReport,
};
use dimsurgery_core::{case_select, BitSequence, DimEstimator, RaiseCase};
use rayon::prelude::*;

use crate::args::{parse_seeds, SurgeryArgs};
use crate::error::{CliError, CliResult};

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

/// Builds the plan named by `strategy` for the chunk estimates `s_seq`.
pub fn build_plan(strategy: &str, s_seq: &[f64], s: Option<f64>, t: Option<f64>, c: f64) -> CliResult<SurgeryPlan> {
    let eps = default_eps_seq(s_seq.len());
    Ok(match strategy {
        "randomize" => plan_randomize(s_seq, &eps)?,
        "weak-srandom" => plan_weak_srandom(s_seq, c)?,
        "lower" => {
            let target = s.or(t).ok_or_else(|| usage("lower needs a target --s"))?;
            plan_lower(s_seq, target, &eps)?
        }
        "raise" | "raise-case1" | "raise-case2" => {
            let t = t.ok_or_else(|| usage("raise needs --t"))?;
            let s = s.unwrap_or_else(|| liminf_surrogate(s_seq));
            if (s - t).abs() <= 1e-12 {
                return Ok(plan_identity(s_seq, s)?);
            }
            if strategy != "raise" && s < t && t < 1.0 {
                let want = match case_select(s, t)? {
                    RaiseCase::Case1 => "raise-case1",
                    RaiseCase::Case2 => "raise-case2",
                };
                if want != strategy {
                    return Err(usage(format!("s = {s}, t = {t} selects {want}, not {strategy}")));
                }
            }
            plan_raise(s_seq, s, t, &eps)?
        }
        other => return Err(usage(format!("unknown strategy {other:?}"))),
    })
}

fn within_tolerance(rep: &SurgeryReport, tol: f64) -> bool {
    match rep.plan.strategy {
        Strategy::Lower | Strategy::WeakSRandom => rep.distance <= rep.bound + tol,
        _ => (rep.distance - rep.bound).abs() <= tol,
    }
}

pub fn run(a: &SurgeryArgs) -> CliResult<String> {
    let est: DimEstimator = a.estimator.parse().map_err(|e| usage(format!("{e}")))?;
    let searcher: Searcher = a.searcher.parse()?;
    let x = BitSequence::read_file(&a.input)?;
    let s_seq = chunk_dims(&x, &est)?;
    let base = build_plan(&a.strategy, &s_seq, a.s, a.t, a.c)?;
    let seeds = match &a.seeds {
        Some(spec) => parse_seeds(spec)?,
        None => vec![a.seed],
    };
    if seeds.len() > 1 && a.emit.is_some() {
        return Err(usage("--emit needs a single seed"));
    }
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let mut plan = base.clone();
            plan.seed = seed;
            apply_plan(&x, &plan, &est, searcher, None)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let out = if let [(y, rep)] = runs.as_slice() {
        if let Some(path) = &a.emit {
            y.write_file(path)?;
        }
        format!("{}\n{}", rep.chunk_csv(), rep.summary_csv())
    } else {
        let mut out = format!("seed,{}\n", SurgeryReport::SUMMARY_CSV_HEADER);
        for (seed, (_, rep)) in seeds.iter().zip(&runs) {
            let row = rep.summary_csv();
            let _ = writeln!(out, "{seed},{}", row.lines().nth(1).unwrap_or(""));
        }
        out
    };
    if let Some(tol) = a.tolerance {
        let missed: Vec<String> = seeds
            .iter()
            .zip(&runs)
            .filter(|(_, (_, rep))| !within_tolerance(rep, tol))
            .map(|(seed, (_, rep))| format!("seed {seed}: distance {} vs bound {}", rep.distance, rep.bound))
            .collect();
        if !missed.is_empty() {
            crate::output::emit(a.out.as_deref(), &out)?;
            return Err(CliError::Verify(missed.join("; ")));
        }
    }
    Ok(out)
}
