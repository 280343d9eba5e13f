//! Binary-entropy calculus.
//!
//! `H(p) = -(p log2 p + (1-p) log2(1-p))` and its inverse branch onto
//! `[0, 1/2]`, the raise profile `M(s, eps) = H(min(1/2, H^-1(s) + eps))`,
//! the two line constructions used when raising dimension from `s` to `t`,
//! and grid-based numerical checks of the convexity facts those constructions
//! rely on.
//!
//! The public functions validate their arguments; the `pub(crate)` kernels
//! (`h`, `h_inv`, ...) skip validation and are used in hot loops.

use std::f64::consts::LN_2;

use crate::error::{check_unit, Error, Result};
use crate::proxy::chunk_boundary;

/// Width at which the inverse-entropy bisection stops, relative to the upper
/// end of the bracket.
const INV_REL_WIDTH: f64 = 1e-13;

/// Step of the central second differences used by the curvature checks.
pub const SECOND_DIFF_STEP: f64 = 1e-4;
/// Tolerance on raw (unscaled) second differences.
pub const SECOND_DIFF_TOL: f64 = 1e-6;
/// Tolerance on the closed-form `h''` used in the concavity check.
pub const H2_TOL: f64 = 1e-9;
/// Absolute tolerance under which the two case quantities count as tied.
pub const CASE_TIE_TOL: f64 = 1e-7;

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    pub fn new(value: f64) -> Result<Self> {
        check_unit("unit value", value).map(UnitValue)
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            UnitValue(0.0)
        } else {
            UnitValue(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        UnitValue::new(value)
    }
}

impl From<UnitValue> for f64 {
    fn from(v: UnitValue) -> f64 {
        v.0
    }
}

// ---------------------------------------------------------------------------
// kernels

#[inline]
pub(crate) fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    // (1-p) log(1-p) through ln_1p keeps precision for small p
    -(p * p.ln() + (1.0 - p) * (-p).ln_1p()) / LN_2
}

#[inline]
pub(crate) fn h_prime(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else if p >= 1.0 {
        f64::NEG_INFINITY
    } else {
        ((1.0 - p) / p).log2()
    }
}

pub(crate) fn h_inv(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= INV_REL_WIDTH * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `g'(x) = 1 / H'(g(x))`.
#[inline]
pub(crate) fn h_inv_prime(x: f64) -> f64 {
    let y = h_inv(x);
    let d = h_prime(y);
    if d.is_infinite() {
        0.0
    } else if d <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / d
    }
}

#[inline]
pub(crate) fn m_profile(s: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        return s;
    }
    m_profile_from_inv(s, h_inv(s), eps)
}

/// Raise profile when `g(s)` is already known.
#[inline]
pub(crate) fn m_profile_from_inv(s: f64, g_s: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        return s;
    }
    let y = g_s + eps;
    if y >= 0.5 {
        1.0
    } else {
        h(y).max(s)
    }
}

// ---------------------------------------------------------------------------
// public operations

/// Binary entropy in bits.
pub fn entropy(p: f64) -> Result<f64> {
    check_unit("entropy argument", p).map(h)
}

/// Inverse of [`entropy`] on the branch `[0, 1] -> [0, 1/2]`, by bisection.
pub fn entropy_inv(y: f64) -> Result<f64> {
    check_unit("entropy_inv argument", y).map(h_inv)
}

/// `H'(p) = log2((1-p)/p)`, defined on the open interval.
pub fn entropy_deriv(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(h_prime(p))
    } else {
        Err(Error::Domain {
            what: "entropy_deriv argument (open interval)",
            value: p,
        })
    }
}

/// `M(s, eps)`: the largest entropy reachable from `s` by moving `eps` along
/// the inverse branch. `M(s, 0) = s`, and `M >= s` always.
pub fn raise_profile(s: f64, eps: f64) -> Result<f64> {
    let s = check_unit("raise_profile s", s)?;
    let eps = check_unit("raise_profile eps", eps)?;
    Ok(m_profile(s, eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurves {
    /// `H^-1(t - s)`
    pub naive: f64,
    /// `H^-1(t) - H^-1(s)`
    pub raise: f64,
    /// `H^-1(1 - s)`
    pub lower: f64,
}

pub fn bound_curves(s: f64, t: f64) -> Result<BoundCurves> {
    let s = check_unit("bound_curves s", s)?;
    let t = check_unit("bound_curves t", t)?;
    if s > t {
        return Err(Error::Domain {
            what: "bound_curves requires s <= t; s",
            value: s,
        });
    }
    Ok(BoundCurves {
        naive: h_inv(t - s),
        raise: h_inv(t) - h_inv(s),
        lower: h_inv(1.0 - s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RaiseCase {
    /// Tangent-line strategy: every chunk moves the same distance.
    Case1,
    /// Chord strategy: keep the running point on the line through `(s,t)`, `(1,1)`.
    Case2,
}

/// `(1 - x) g'(x)`, the quantity compared by [`case_select`].
pub fn case_quantity(x: f64) -> f64 {
    let gp = h_inv_prime(x);
    if gp == 0.0 || x >= 1.0 {
        0.0
    } else {
        (1.0 - x) * gp
    }
}

/// Picks the raise strategy for `s < t < 1`. Near-ties (within
/// [`CASE_TIE_TOL`]) resolve to `Case1`.
pub fn case_select(s: f64, t: f64) -> Result<RaiseCase> {
    let s = check_unit("case_select s", s)?;
    let t = check_unit("case_select t", t)?;
    if s >= t {
        return Err(Error::Domain {
            what: "case_select requires s < t; s",
            value: s,
        });
    }
    if t >= 1.0 {
        return Err(Error::Domain {
            what: "case_select requires t < 1; t",
            value: t,
        });
    }
    let (qs, qt) = (case_quantity(s), case_quantity(t));
    Ok(if qs <= qt + CASE_TIE_TOL {
        RaiseCase::Case1
    } else {
        RaiseCase::Case2
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFn {
    pub slope: f64,
    pub intercept: f64,
}

impl LineFn {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Tangent to `r(x) = M(x, delta)` at `s`; slope `g'(s)/g'(M(s, delta))`.
pub fn tangent_line(s: f64, delta: f64) -> Result<LineFn> {
    let s = check_unit("tangent_line s", s)?;
    let delta = check_unit("tangent_line delta", delta)?;
    if delta == 0.0 {
        return Ok(LineFn {
            slope: 1.0,
            intercept: 0.0,
        });
    }
    let y = h_inv(s);
    if y + delta >= 0.5 {
        return Err(Error::Domain {
            what: "tangent_line: r is flat (g(s)+delta >= 1/2); delta",
            value: delta,
        });
    }
    let top = h_prime(y + delta);
    let bottom = h_prime(y);
    let slope = if bottom.is_infinite() { 0.0 } else { top / bottom };
    let t = m_profile_from_inv(s, y, delta);
    Ok(LineFn {
        slope,
        intercept: t - slope * s,
    })
}

/// The line through `(s, t)` and `(1, 1)`.
pub fn chord_line(s: f64, t: f64) -> Result<LineFn> {
    let s = check_unit("chord_line s", s)?;
    let t = check_unit("chord_line t", t)?;
    if s >= 1.0 {
        return Err(Error::Domain {
            what: "chord_line requires s < 1; s",
            value: s,
        });
    }
    Ok(LineFn {
        slope: (1.0 - t) / (1.0 - s),
        intercept: (t - s) / (1.0 - s),
    })
}

/// `p(x) = g(line(x)) - g(x)`.
pub fn drop_profile(x: f64, line: &LineFn) -> Result<f64> {
    let x = check_unit("drop_profile x", x)?;
    let v = line.eval(x);
    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
        return Err(Error::Domain {
            what: "drop_profile: line value",
            value: v,
        });
    }
    Ok(h_inv(v.clamp(0.0, 1.0)) - h_inv(x))
}

// ---------------------------------------------------------------------------
// curvature checks

/// `f(y) = y(1-y) log2(1/y - 1)`, with the limits `f(0) = f(1) = 0`.
pub fn witness_f(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        y * (1.0 - y) * (1.0 / y - 1.0).log2()
    }
}

/// `f''(y) = -(1-2y)/(ln2 (y - y^2)) - 2 log2(1/y - 1)` on `(0, 1)`.
pub fn witness_f_second(y: f64) -> f64 {
    -(1.0 - 2.0 * y) / (LN_2 * (y - y * y)) - 2.0 * (1.0 / y - 1.0).log2()
}

/// `w(y) = f(y + delta) - f(y)`; shares its sign with `r''` at `x = H(y)`.
pub fn inflection_witness(y: f64, delta: f64) -> f64 {
    witness_f(y + delta) - witness_f(y)
}

/// `h(y) = ln(2-2y) - y(2 - 3y + 2y^2) ln(1/y - 1)`.
pub fn concavity_h(y: f64) -> f64 {
    (2.0 - 2.0 * y).ln() - y * (2.0 - 3.0 * y + 2.0 * y * y) * (1.0 / y - 1.0).ln()
}

/// Second derivative of [`concavity_h`], derived symbolically:
/// `2 (y^2 + 3y(1-2y)(1-y)^2 ln((1-y)/y) - y(3-4y)(1-y) - 2y + 1) / (y (1-y)^2)`.
pub fn concavity_h_second(y: f64) -> f64 {
    let one_y = 1.0 - y;
    let num = y * y + 3.0 * y * (1.0 - 2.0 * y) * one_y * one_y * (one_y / y).ln()
        - y * (3.0 - 4.0 * y) * one_y
        - 2.0 * y
        + 1.0;
    2.0 * num / (y * one_y * one_y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    /// Inflection point `z` in x-coordinates, when one was located.
    pub inflection: Option<f64>,
    pub grid_step: f64,
    pub sign_pattern_ok: bool,
    /// Largest wrong-sign raw second difference seen.
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Number of strict sign changes of the witness along its grid.
    pub sign_changes: usize,
    /// Human-readable notes on failed auxiliary checks; empty on success.
    pub failures: Vec<String>,
}

fn check_grid_step(grid_step: f64) -> Result<()> {
    if grid_step > 0.0 && grid_step <= 0.25 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "grid_step must be in (0, 0.25], got {grid_step}"
        )))
    }
}

#[inline]
fn second_diff<F: Fn(f64) -> f64>(f: &F, x: f64, step: f64) -> f64 {
    f(x + step) - 2.0 * f(x) + f(x - step)
}

/// Numerically checks that `r(x) = M(x, delta)` is convex then concave with a
/// single inflection.
pub fn verify_convexity_lemma(delta: f64, grid_step: f64) -> Result<ConvexityReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain {
            what: "verify_convexity_lemma delta (needs 0 < delta < 1/2)",
            value: delta,
        });
    }
    check_grid_step(grid_step)?;
    let mut failures = Vec::new();

    // sign changes of w on [0, 1/2 - delta], endpoints taken as limits
    let y_end = 0.5 - delta;
    let ny = ((y_end / grid_step).ceil() as usize).max(2);
    let ys: Vec<f64> = (0..=ny).map(|k| y_end * k as f64 / ny as f64).collect();
    let ws: Vec<f64> = ys.iter().map(|&y| inflection_witness(y, delta)).collect();
    let mut sign_changes = 0;
    let mut bracket = None;
    let mut last: Option<(f64, f64)> = None;
    for (&y, &w) in ys.iter().zip(&ws) {
        if w == 0.0 {
            continue;
        }
        if let Some((py, pw)) = last {
            if (pw > 0.0) != (w > 0.0) {
                sign_changes += 1;
                bracket.get_or_insert((py, y));
            }
        }
        last = Some((y, w));
    }
    if ws[0] <= 0.0 {
        failures.push(format!("w(0+) = {} is not positive", ws[0]));
    }
    if ws[ny] >= 0.0 {
        failures.push(format!("w(1/2-delta) = {} is not negative", ws[ny]));
    }
    if sign_changes != 1 {
        failures.push(format!("w changes sign {sign_changes} times"));
    }
    let inflection = bracket.map(|(mut lo, mut hi)| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inflection_witness(mid, delta) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        h(0.5 * (lo + hi))
    });

    // f'' < 0 on the open interval (0, 1/2)
    let nf = ((0.5 / grid_step).ceil() as usize).max(2);
    for k in 1..nf {
        let y = 0.5 * k as f64 / nf as f64;
        let v = witness_f_second(y);
        if v >= 0.0 {
            failures.push(format!("f''({y}) = {v} is not negative"));
            break;
        }
    }

    // raw second differences of r on each side of z
    let step = SECOND_DIFF_STEP;
    let r = |x: f64| m_profile(x, delta);
    let mut worst: f64 = 0.0;
    if let Some(z) = inflection {
        let nx = (1.0 / grid_step).ceil() as usize;
        for k in 0..=nx {
            let x = (k as f64 / nx as f64).clamp(step, 1.0 - step);
            let d2 = second_diff(&r, x, step);
            if x + step < z {
                worst = worst.max(-d2);
            } else if x - step > z {
                worst = worst.max(d2);
            }
        }
    }
    let sign_pattern_ok = failures.is_empty() && inflection.is_some() && worst <= SECOND_DIFF_TOL;
    Ok(ConvexityReport {
        inflection,
        grid_step,
        sign_pattern_ok,
        worst_violation: worst,
        tolerance: SECOND_DIFF_TOL,
        sign_changes,
        failures,
    })
}

/// Numerically checks that `p(x) = g(ax + 1 - a) - g(x)` is concave for every
/// slope `a` in `(0, 1]`, together with the auxiliary facts `h'' >= 0`,
/// `h(1/2) = 0` and `h'(1/2) = 0`.
pub fn verify_concavity_lemma(grid_step: f64) -> Result<ConvexityReport> {
    check_grid_step(grid_step)?;
    let step = SECOND_DIFF_STEP;
    let n = (1.0 / grid_step).ceil() as usize;
    let xs: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
    let g_x: Vec<[f64; 3]> = xs
        .iter()
        .map(|&x| [h_inv(x - step), h_inv(x), h_inv(x + step)])
        .collect();
    let mut worst: f64 = 0.0;
    for ka in 1..=n {
        let a = ka as f64 / n as f64;
        for (x, gx) in xs.iter().zip(&g_x) {
            let p = |i: usize, xx: f64| h_inv((a * xx + 1.0 - a).min(1.0)) - gx[i];
            let d2 = p(2, x + step) - 2.0 * p(1, *x) + p(0, x - step);
            worst = worst.max(d2);
        }
    }

    let mut failures = Vec::new();
    let nh = (0.5 / grid_step).ceil() as usize;
    for k in 1..=nh {
        let y = 0.5 * k as f64 / nh as f64;
        let v = concavity_h_second(y);
        if v < -H2_TOL {
            failures.push(format!("h''({y}) = {v} < -{H2_TOL}"));
            break;
        }
    }
    let h_half = concavity_h(0.5);
    if h_half.abs() > 1e-12 {
        failures.push(format!("h(1/2) = {h_half}"));
    }
    let e = 1e-6;
    let h1 = (concavity_h(0.5 + e) - concavity_h(0.5 - e)) / (2.0 * e);
    if h1.abs() > 1e-8 {
        failures.push(format!("h'(1/2) ~ {h1}"));
    }
    Ok(ConvexityReport {
        inflection: None,
        grid_step,
        sign_pattern_ok: failures.is_empty() && worst <= SECOND_DIFF_TOL,
        worst_violation: worst,
        tolerance: SECOND_DIFF_TOL,
        sign_changes: 0,
        failures,
    })
}

// ---------------------------------------------------------------------------
// buffer schedule

fn uplift_ratio(x: f64, eps: f64) -> f64 {
    if x >= 1.0 {
        1.0
    } else {
        (m_profile(x, eps) - x) / (1.0 - x)
    }
}

/// Largest `d >= 0` with `M(x, eps) >= d + (1 - d) x` on `[0, 1]`: the grid
/// minimum of `(M(x, eps) - x)/(1 - x)`, refined by golden-section search
/// around the minimizing cell and shaved by `1e-12`.
pub fn uplift_gap(eps: f64, grid_step: f64) -> Result<f64> {
    let eps = check_unit("uplift_gap eps", eps)?;
    check_grid_step(grid_step)?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    if eps >= 0.5 {
        return Ok(1.0);
    }
    let n = (1.0 / grid_step).ceil() as usize;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..n {
        let v = uplift_ratio(k as f64 / n as f64, eps);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let mut lo = (best_k.saturating_sub(1)) as f64 / n as f64;
    let mut hi = ((best_k + 1) as f64 / n as f64).min(1.0 - 1e-15);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - inv_phi * (hi - lo);
        let b = lo + inv_phi * (hi - lo);
        let (fa, fb) = (uplift_ratio(a, eps), uplift_ratio(b, eps));
        best = best.min(fa).min(fb);
        if fa < fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok((best - 1e-12).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BufferSchedule {
    /// `eps[0] = 1`; `eps[j]` is used for chunk `j` (`1 <= j <= horizon`).
    pub eps: Vec<f64>,
    /// Additive constant absorbing the early chunks.
    pub b: f64,
    /// Liminf surrogate `s` of the weighted running averages.
    pub s_liminf: f64,
    /// `(eps, N_eps)` pairs that were computed while building the schedule.
    pub thresholds: Vec<(f64, usize)>,
}

/// Tail minimum of `A_j = (1/n_j) sum_{i<j} s_i i^2` over
/// `j in [max(10, (J+1)/2), J+1]`, `J = s_seq.len()` (all `j >= 2` when `J < 10`).
pub fn liminf_surrogate(s_seq: &[f64]) -> f64 {
    let big_j = s_seq.len();
    if big_j == 0 {
        return 0.0;
    }
    let start = if big_j < 10 { 2 } else { 10.max(big_j.div_ceil(2)) };
    let mut acc = 0.0;
    let mut best = f64::INFINITY;
    for j in 2..=big_j + 1 {
        let i = j - 1;
        acc += s_seq[i - 1] * (i * i) as f64;
        if j >= start {
            best = best.min(acc / chunk_boundary(j) as f64);
        }
    }
    best
}

/// Builds the halving `eps` schedule and constant `b` such that
/// `sum_{i<=j} M(s_i, eps_i) i^2 - c j^2 > s n_j - b` for every `j <= horizon`.
///
/// `s_seq[j-1]` is `s_j`. `N_eps` is found by scanning: the last `j` at which
/// `sum_{i<=j} M(s_i, eps) i^2 > (s + d') n_j > s n_j + c j^2` fails, with
/// `d' = d(1-s)/(2(2-d))` and `d = uplift_gap(eps)`.
pub fn buffer_schedule(c: f64, s_seq: &[f64], horizon: usize) -> Result<BufferSchedule> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be finite and >= 0, got {c}")));
    }
    if horizon == 0 || s_seq.len() < horizon {
        return Err(Error::InvalidArgument(format!(
            "need horizon >= 1 and at least horizon s-values (horizon {horizon}, got {})",
            s_seq.len()
        )));
    }
    let s_seq = &s_seq[..horizon];
    for &s in s_seq {
        check_unit("buffer_schedule s_i", s)?;
    }
    let s = liminf_surrogate(s_seq);
    if s >= 1.0 {
        return Err(Error::NoBufferHeadroom { liminf: s });
    }
    let g_seq: Vec<f64> = s_seq.iter().map(|&v| h_inv(v)).collect();

    let threshold = |eps: f64| -> Result<usize> {
        let d = uplift_gap(eps, 1e-3)?;
        let margin = d * (1.0 - s) / (2.0 * (2.0 - d));
        let mut sum = 0.0;
        let mut last_fail = 0;
        for j in 1..=horizon {
            sum += m_profile_from_inv(s_seq[j - 1], g_seq[j - 1], eps) * (j * j) as f64;
            let nj = chunk_boundary(j) as f64;
            let mid = (s + margin) * nj;
            if !(sum > mid && mid > s * nj + c * (j * j) as f64) {
                last_fail = j;
            }
        }
        Ok(last_fail)
    };

    let mut thresholds: Vec<(f64, usize)> = Vec::new();
    let lookup = |eps: f64, thresholds: &mut Vec<(f64, usize)>| -> Result<usize> {
        if let Some(&(_, n)) = thresholds.iter().find(|(e, _)| *e == eps) {
            return Ok(n);
        }
        let n = threshold(eps)?;
        thresholds.push((eps, n));
        Ok(n)
    };

    let mut eps = vec![1.0f64; horizon + 1];
    for j in 1..=horizon {
        let half = eps[j - 1] / 2.0;
        eps[j] = if j > lookup(half, &mut thresholds)? {
            half
        } else {
            eps[j - 1]
        };
    }
    let n_one = lookup(1.0, &mut thresholds)?;

    // b absorbs the deficit up to N_1
    let mut sum = 0.0;
    let mut deficit: f64 = 0.0;
    let mut lhs_minus_c = Vec::with_capacity(horizon);
    for j in 1..=horizon {
        sum += m_profile_from_inv(s_seq[j - 1], g_seq[j - 1], eps[j]) * (j * j) as f64;
        let l = sum - c * (j * j) as f64;
        let r = s * chunk_boundary(j) as f64;
        if j <= n_one {
            deficit = deficit.max(r - l);
        }
        lhs_minus_c.push((l, r));
    }
    let b = deficit.max(0.0) + 1.0;
    for (j, (l, r)) in lhs_minus_c.iter().enumerate() {
        if !(*l > *r - b) {
            return Err(Error::BufferCheck {
                j: j + 1,
                lhs: *l,
                rhs: *r - b,
            });
        }
    }
    Ok(BufferSchedule {
        eps,
        b,
        s_liminf: s,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        // -(0.11 log2 0.11 + 0.89 log2 0.89) = 0.499916...
        assert!((entropy(0.11).unwrap() - 0.4999).abs() < 1e-3);
        assert!(entropy(1.5).is_err());
        assert!(entropy(-0.1).is_err());
    }

    #[test]
    fn entropy_symmetry() {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            assert!((h(p) - h(1.0 - p)).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(entropy_inv(1.0).unwrap(), 0.5);
        assert_eq!(entropy_inv(0.0).unwrap(), 0.0);
        assert!((entropy_inv(0.5).unwrap() - 0.110).abs() < 1e-3);
        assert!(entropy_inv(1.01).is_err());
    }

    #[test]
    fn inverse_is_tight_near_zero() {
        for y in [1e-300, 1e-100, 1e-20, 1e-12, 3e-7, 1e-3] {
            let x = h_inv(y);
            assert!((h(x) - y).abs() <= 1e-12, "y={y} x={x}");
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(entropy_deriv(0.5).unwrap(), 0.0);
        assert!((entropy_deriv(0.25).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!((entropy_deriv(0.75).unwrap() + 3f64.log2()).abs() < 1e-15);
        assert!(entropy_deriv(0.0).is_err());
        assert!(entropy_deriv(1.0).is_err());
    }

    #[test]
    fn raise_profile_examples() {
        assert_eq!(raise_profile(1.0, 0.2).unwrap(), 1.0);
        assert_eq!(raise_profile(0.3, 0.0).unwrap(), 0.3);
        // g(0.5) = 0.1100..., H(0.2100...) = 0.7415...
        assert!((raise_profile(0.5, 0.1).unwrap() - 0.7415).abs() < 1e-3);
        assert!(raise_profile(0.5, 1.1).is_err());
    }

    #[test]
    fn raise_profile_saturates_past_half() {
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let eps = 0.5 - h_inv(s);
            assert_eq!(m_profile(s, eps + 1e-9), 1.0);
        }
    }

    #[test]
    fn bound_curve_examples() {
        let b = bound_curves(0.5, 1.0).unwrap();
        assert!((0.385..=0.395).contains(&b.raise));
        let b = bound_curves(0.5, 0.5).unwrap();
        assert_eq!((b.naive, b.raise), (0.0, 0.0));
        assert!((b.lower - 0.110).abs() < 1e-3);
        let b = bound_curves(0.0, 0.5).unwrap();
        assert_eq!(b.naive, b.raise);
        assert!((b.naive - 0.110).abs() < 1e-3);
        assert!(bound_curves(0.6, 0.5).is_err());
    }

    /// Independent route for `g'`: central differences of `h_inv`.
    fn g_prime_fd(x: f64) -> f64 {
        let e = 1e-6;
        (h_inv(x + e) - h_inv(x - e)) / (2.0 * e)
    }

    #[test]
    fn case_select_examples() {
        for k in 1..10 {
            let t = k as f64 / 10.0;
            assert_eq!(case_select(t - 1e-9, t).unwrap(), RaiseCase::Case1, "t={t}");
        }
        for (s, t) in [(0.1, 0.9), (0.05, 0.2)] {
            let lhs = (1.0 - s) * g_prime_fd(s);
            let rhs = (1.0 - t) * g_prime_fd(t);
            let expect = if lhs <= rhs { RaiseCase::Case1 } else { RaiseCase::Case2 };
            assert_eq!(case_select(s, t).unwrap(), expect, "({s},{t}) {lhs} {rhs}");
        }
        assert_eq!(case_select(0.0, 0.5).unwrap(), RaiseCase::Case1);
        assert!(case_select(0.5, 0.5).is_err());
        assert!(case_select(0.2, 1.0).is_err());
    }

    #[test]
    fn case_select_sees_both_cases() {
        assert_eq!(case_select(0.05, 0.2).unwrap(), RaiseCase::Case1);
        assert_eq!(case_select(0.1, 0.9).unwrap(), RaiseCase::Case2);
    }

    #[test]
    fn tangent_line_examples() {
        let l = tangent_line(0.4, 0.0).unwrap();
        assert_eq!((l.slope, l.intercept), (1.0, 0.0));
        let (s, d) = (0.3, 0.05);
        let l = tangent_line(s, d).unwrap();
        let t = m_profile(s, d);
        assert!((l.eval(s) - t).abs() < 1e-15);
        let fd = g_prime_fd(s) / g_prime_fd(t);
        assert!((l.slope - fd).abs() < 1e-5, "{} vs {fd}", l.slope);
        assert!(l.slope > 0.0);
        // slope against a finite difference of r itself
        let e = 1e-6;
        let r_fd = (m_profile(s + e, d) - m_profile(s - e, d)) / (2.0 * e);
        assert!((l.slope - r_fd).abs() < 1e-5);
        assert!(tangent_line(0.9, 0.3).is_err());
    }

    #[test]
    fn chord_line_examples() {
        let l = chord_line(0.3, 0.3).unwrap();
        assert!((l.slope - 1.0).abs() < 1e-15 && l.intercept.abs() < 1e-15);
        let l = chord_line(0.0, 0.5).unwrap();
        assert_eq!((l.slope, l.intercept), (0.5, 0.5));
        for (s, t) in [(0.1, 0.2), (0.3, 0.9), (0.0, 1.0)] {
            let l = chord_line(s, t).unwrap();
            assert!((l.eval(1.0) - 1.0).abs() < 1e-15);
            assert!((l.eval(s) - t).abs() < 1e-15);
        }
        assert!(chord_line(1.0, 1.0).is_err());
    }

    #[test]
    fn drop_profile_examples() {
        let (s, t) = (0.3, 0.7);
        let l = chord_line(s, t).unwrap();
        assert!(drop_profile(1.0, &l).unwrap().abs() < 1e-12);
        let at_s = drop_profile(s, &l).unwrap();
        assert!((at_s - (h_inv(t) - h_inv(s))).abs() < 1e-12);
        let l = chord_line(0.0, 0.5).unwrap();
        assert!((drop_profile(0.0, &l).unwrap() - 0.110).abs() < 1e-3);
        let steep = LineFn {
            slope: 3.0,
            intercept: 0.0,
        };
        assert!(drop_profile(0.5, &steep).is_err());
    }

    #[test]
    fn convexity_lemma_at_one_tenth() {
        let rep = verify_convexity_lemma(0.1, 1e-3).unwrap();
        assert!(rep.sign_pattern_ok, "{rep:?}");
        assert_eq!(rep.sign_changes, 1);
        let z = rep.inflection.unwrap();
        assert!(z > 0.0 && z < h(0.4));
    }

    #[test]
    fn witness_boundary_signs() {
        for delta in [0.05, 0.1, 0.25, 0.45] {
            assert!(inflection_witness(0.0, delta) > 0.0);
            assert_eq!(inflection_witness(0.0, delta), witness_f(delta));
            let y = 0.5 - delta;
            assert!((inflection_witness(y, delta) + witness_f(y)).abs() < 1e-15);
            assert!(inflection_witness(y, delta) < 0.0);
        }
        // f'' -> 0 from below at 1/2
        let near = witness_f_second(0.5 - 1e-6);
        assert!(near < 0.0 && near > -1e-4);
    }

    #[test]
    fn witness_sign_tracks_curvature_of_r() {
        let delta = 0.2;
        for k in 1..60 {
            let y = (0.5 - delta) * k as f64 / 60.0;
            let x = h(y);
            let d2 = second_diff(&|v| m_profile(v, delta), x, 1e-3);
            let w = inflection_witness(y, delta);
            if d2.abs() > 1e-7 && w.abs() > 1e-3 {
                assert_eq!(d2 > 0.0, w > 0.0, "y={y} d2={d2} w={w}");
            }
        }
    }

    #[test]
    fn h_second_matches_finite_differences() {
        for k in 1..50 {
            let y = 0.49 * k as f64 / 50.0 + 0.005;
            let e = 1e-4;
            let fd = (concavity_h(y + e) - 2.0 * concavity_h(y) + concavity_h(y - e)) / (e * e);
            let cf = concavity_h_second(y);
            assert!((fd - cf).abs() < 1e-4 * cf.abs().max(1.0), "y={y} fd={fd} cf={cf}");
        }
    }

    #[test]
    fn concavity_lemma_coarse() {
        let rep = verify_concavity_lemma(0.02).unwrap();
        assert!(rep.sign_pattern_ok, "{rep:?}");
        assert!(concavity_h(0.5).abs() < 1e-12);
    }

    #[test]
    fn drop_profile_with_unit_slope_is_flat() {
        // a = 1: p(x) = g(x) - g(x) = 0 identically
        let l = LineFn {
            slope: 1.0,
            intercept: 0.0,
        };
        for k in 0..=10 {
            assert_eq!(drop_profile(k as f64 / 10.0, &l).unwrap(), 0.0);
        }
    }

    #[test]
    fn concavity_at_half_slope_fine_grid() {
        let a = 0.5;
        let p = |x: f64| h_inv(a * x + 1.0 - a) - h_inv(x);
        for k in 1..1000 {
            let x = k as f64 / 1000.0;
            let x = x.clamp(SECOND_DIFF_STEP, 1.0 - SECOND_DIFF_STEP);
            assert!(second_diff(&p, x, SECOND_DIFF_STEP) <= 1e-9, "x={x}");
        }
    }

    #[test]
    fn uplift_gap_examples() {
        assert_eq!(uplift_gap(0.0, 1e-3).unwrap(), 0.0);
        let d = uplift_gap(0.05, 1e-3).unwrap();
        assert!(d > 0.0);
        for k in 0..=10_000 {
            let x = k as f64 / 10_000.0;
            assert!(m_profile(x, 0.05) >= d + (1.0 - d) * x - 1e-15, "x={x}");
        }
        let mut prev = 0.0;
        for k in 1..10 {
            let d = uplift_gap(0.05 * k as f64, 1e-3).unwrap();
            assert!(d >= prev - 1e-12);
            prev = d;
        }
    }

    fn check_buffer(c: f64, s_seq: &[f64], horizon: usize) -> BufferSchedule {
        let sch = buffer_schedule(c, s_seq, horizon).unwrap();
        let mut sum = 0.0;
        for j in 1..=horizon {
            sum += m_profile(s_seq[j - 1], sch.eps[j]) * (j * j) as f64;
            let lhs = sum - c * (j * j) as f64;
            assert!(lhs > sch.s_liminf * chunk_boundary(j) as f64 - sch.b, "j={j}");
        }
        assert_eq!(sch.eps[0], 1.0);
        for w in sch.eps.windows(2) {
            assert!(w[1] == w[0] || w[1] == w[0] / 2.0);
        }
        sch
    }

    #[test]
    fn buffer_constant_half() {
        let s = vec![0.5; 2000];
        let sch = check_buffer(1.0, &s, 2000);
        assert!((sch.s_liminf - 0.5).abs() < 1e-12);
        assert!(sch.eps[2000] < 1.0, "schedule never halved");
    }

    #[test]
    fn buffer_alternating() {
        let s: Vec<f64> = (1..=2000).map(|i| if i % 2 == 0 { 0.8 } else { 0.2 }).collect();
        check_buffer(1.0, &s, 2000);
    }

    #[test]
    fn buffer_rejects_random_input() {
        let s = vec![1.0; 100];
        assert!(matches!(
            buffer_schedule(1.0, &s, 100),
            Err(Error::NoBufferHeadroom { .. })
        ));
    }
}
