//! Python module `dimsurgery`: entropy calculus, Hamming checks, dimension
//! estimates and surgery runs. Bit sequences cross the boundary as strings of
//! `0` and `1`.

use dimsurgery_core::hamming::{greedy_cover as core_greedy_cover, verify_harper as core_verify_harper};
use dimsurgery_core::proxy::chunk_dims;
use dimsurgery_core::surgery::{
    apply_plan, default_eps_seq, duplication_decode, duplication_encode, plan_identity, plan_lower,
    plan_randomize, plan_raise, plan_weak_srandom, Searcher, SurgeryPlan, SurgeryReport,
};
use dimsurgery_core::{BitSequence, DimEstimator, Error, RaiseCase};
use num_bigint::BigUint;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_bits(text: &str) -> PyResult<BitSequence> {
    BitSequence::from_bit_str(text).map_err(to_py)
}

fn parse_estimator(spec: &str) -> PyResult<DimEstimator> {
    spec.parse().map_err(|e| PyValueError::new_err(format!("{e}")))
}

/// Plan for `strategy` given chunk estimates; `raise` picks its case.
pub fn build_plan(strategy: &str, s_seq: &[f64], s: Option<f64>, t: Option<f64>, c: f64) -> Result<SurgeryPlan, String> {
    let eps = default_eps_seq(s_seq.len());
    let plan = match strategy {
        "randomize" => plan_randomize(s_seq, &eps),
        "weak-srandom" => plan_weak_srandom(s_seq, c),
        "lower" => plan_lower(s_seq, s.ok_or("lower needs s")?, &eps),
        "raise" => {
            let t = t.ok_or("raise needs t")?;
            let s = s.unwrap_or_else(|| dimsurgery_core::entropy::liminf_surrogate(s_seq));
            if (s - t).abs() <= 1e-12 {
                plan_identity(s_seq, s)
            } else {
                plan_raise(s_seq, s, t, &eps)
            }
        }
        other => return Err(format!("unknown strategy {other:?}")),
    };
    plan.map_err(|e| e.to_string())
}

#[pyfunction]
fn entropy(p: f64) -> PyResult<f64> {
    dimsurgery_core::entropy(p).map_err(to_py)
}

#[pyfunction]
fn entropy_inv(y: f64) -> PyResult<f64> {
    dimsurgery_core::entropy_inv(y).map_err(to_py)
}

#[pyfunction]
fn raise_profile(s: f64, eps: f64) -> PyResult<f64> {
    dimsurgery_core::raise_profile(s, eps).map_err(to_py)
}

/// `(naive, raise, lower)` distance bounds for `s <= t`.
#[pyfunction]
fn bound_curves(s: f64, t: f64) -> PyResult<(f64, f64, f64)> {
    let b = dimsurgery_core::bound_curves(s, t).map_err(to_py)?;
    Ok((b.naive, b.raise, b.lower))
}

/// `"case1"` or `"case2"`.
#[pyfunction]
fn case_select(s: f64, t: f64) -> PyResult<&'static str> {
    Ok(match dimsurgery_core::case_select(s, t).map_err(to_py)? {
        RaiseCase::Case1 => "case1",
        RaiseCase::Case2 => "case2",
    })
}

#[pyfunction]
fn ball_volume(n: usize, r: usize) -> PyResult<BigUint> {
    dimsurgery_core::hamming::ball_volume(n, r).map_err(to_py)
}

#[pyfunction]
fn chunk_boundary(j: usize) -> usize {
    dimsurgery_core::chunk_boundary(j)
}

/// `(pairs checked, violations)`.
#[pyfunction]
#[pyo3(signature = (n, trials = 10_000, seed = 0))]
fn verify_harper(n: usize, trials: usize, seed: u64) -> PyResult<(usize, usize)> {
    let r = core_verify_harper(n, trials, seed).map_err(to_py)?;
    Ok((r.checked, r.failures.len()))
}

/// Codewords of the greedy radius-`r` cover of `{0,1}^n`.
#[pyfunction]
fn greedy_cover(n: usize, r: usize) -> PyResult<Vec<u64>> {
    Ok(core_greedy_cover(n, r).map_err(to_py)?.words)
}

/// Final value of the weighted chunk-average dimension estimate.
#[pyfunction]
#[pyo3(signature = (bits, estimator = "bernoulli"))]
fn sequence_dim(bits: &str, estimator: &str) -> PyResult<f64> {
    let x = parse_bits(bits)?;
    let est = parse_estimator(estimator)?;
    Ok(dimsurgery_core::sequence_dim(&x, &est, None).map_err(to_py)?.final_value)
}

/// Length in bits of the duplication description of `x` relative to `y`;
/// raises if decoding does not give back `y`.
#[pyfunction]
fn duplication_length(x: &str, y: &str) -> PyResult<usize> {
    let (x, y) = (parse_bits(x)?, parse_bits(y)?);
    let d = duplication_encode(&x, &y).map_err(to_py)?;
    if duplication_decode(&d).map_err(to_py)? != y {
        return Err(PyValueError::new_err("duplication round trip differs"));
    }
    Ok(d.total_length_bits)
}

/// Runs a surgery plan. Returns the new sequence and a dict with
/// `dim_before`, `dim_after`, `distance`, `bound` and `slack`.
#[pyfunction]
#[pyo3(signature = (bits, strategy = "randomize", s = None, t = None, estimator = "bernoulli", searcher = "greedy", seed = 0, c = 10.0))]
#[allow(clippy::too_many_arguments)]
fn surgery(
    bits: &str,
    strategy: &str,
    s: Option<f64>,
    t: Option<f64>,
    estimator: &str,
    searcher: &str,
    seed: u64,
    c: f64,
) -> PyResult<(String, Vec<(String, f64)>)> {
    let x = parse_bits(bits)?;
    let est = parse_estimator(estimator)?;
    let searcher: Searcher = searcher.parse().map_err(to_py)?;
    let s_seq = chunk_dims(&x, &est).map_err(to_py)?;
    let mut plan = build_plan(strategy, &s_seq, s, t, c).map_err(PyValueError::new_err)?;
    plan.seed = seed;
    let (y, rep) = apply_plan(&x, &plan, &est, searcher, None).map_err(to_py)?;
    Ok((y.to_bit_string(), summary(&rep)))
}

fn summary(rep: &SurgeryReport) -> Vec<(String, f64)> {
    vec![
        ("dim_before".into(), rep.dim_before),
        ("dim_after".into(), rep.dim_after),
        ("distance".into(), rep.distance),
        ("bound".into(), rep.bound),
        ("slack".into(), rep.slack()),
    ]
}

#[pymodule]
fn dimsurgery(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_inv, m)?)?;
    m.add_function(wrap_pyfunction!(raise_profile, m)?)?;
    m.add_function(wrap_pyfunction!(bound_curves, m)?)?;
    m.add_function(wrap_pyfunction!(case_select, m)?)?;
    m.add_function(wrap_pyfunction!(ball_volume, m)?)?;
    m.add_function(wrap_pyfunction!(chunk_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(verify_harper, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_cover, m)?)?;
    m.add_function(wrap_pyfunction!(sequence_dim, m)?)?;
    m.add_function(wrap_pyfunction!(duplication_length, m)?)?;
    m.add_function(wrap_pyfunction!(surgery, m)?)?;
    Ok(())
}
