use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::entropy::{
    buffer_schedule, case_select, chord_line, h_inv, liminf_surrogate, m_profile, RaiseCase,
};
use crate::error::{check_unit, Error, Result};
use crate::proxy::{chunk_boundary, default_tail_start};

/// Floor of the default `eps` sequence.
pub const DEFAULT_EPS_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Randomize,
    WeakSRandom,
    RaiseCase1,
    RaiseCase2,
    Lower,
}

impl Strategy {
    pub fn is_raise(self) -> bool {
        !matches!(self, Strategy::Lower)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Randomize => "randomize",
            Strategy::WeakSRandom => "weak-srandom",
            Strategy::RaiseCase1 => "raise-case1",
            Strategy::RaiseCase2 => "raise-case2",
            Strategy::Lower => "lower",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "randomize" => Strategy::Randomize,
            "weak-srandom" => Strategy::WeakSRandom,
            "raise-case1" => Strategy::RaiseCase1,
            "raise-case2" => Strategy::RaiseCase2,
            "lower" => Strategy::Lower,
            other => return Err(Error::Parse(format!("unknown strategy {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub j: usize,
    /// Estimated dimension of the source chunk.
    pub s_j: f64,
    /// Target dimension.
    pub t_j: f64,
    /// Radius: largest allowed fraction of flipped bits.
    pub delta_j: f64,
    /// `NaN` when the plan was read back from text, which does not carry it.
    pub eps_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryPlan {
    pub strategy: Strategy,
    /// Source dimension the plan was built for.
    pub s: f64,
    /// Target dimension.
    pub t: f64,
    pub seed: u64,
    pub entries: Vec<PlanEntry>,
}

/// `max(DEFAULT_EPS_MIN, 1 / ceil(log2(j + 2)))`.
pub fn default_eps(j: usize) -> f64 {
    let l = ((j + 2) as f64).log2().ceil();
    DEFAULT_EPS_MIN.max(1.0 / l)
}

/// `default_eps(1..=chunks)`.
pub fn default_eps_seq(chunks: usize) -> Vec<f64> {
    (1..=chunks).map(default_eps).collect()
}

/// `ceil(x j) / j`, clamped to `[0, 1]`.
fn round_up(x: f64, j: usize) -> f64 {
    let jf = j as f64;
    // the 1e-9 keeps exact multiples of 1/j from being bumped by rounding noise
    ((x * jf - 1e-9).ceil() / jf).clamp(0.0, 1.0)
}

impl SurgeryPlan {
    pub fn chunks(&self) -> usize {
        self.entries.len()
    }

    /// Bits spanned by the planned chunks.
    pub fn span(&self) -> usize {
        chunk_boundary(self.entries.len() + 1)
    }

    /// Weighted running averages of the radii, `series[k]` ending at chunk
    /// `k + 1`.
    pub fn planned_distance_series(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.entries
            .iter()
            .map(|e| {
                acc += e.delta_j * (e.j * e.j) as f64;
                acc / chunk_boundary(e.j + 1) as f64
            })
            .collect()
    }

    pub fn planned_distance(&self) -> f64 {
        self.planned_distance_series().last().copied().unwrap_or(0.0)
    }

    pub fn max_eps(&self) -> f64 {
        self.entries.iter().map(|e| e.eps_j).filter(|e| !e.is_nan()).fold(0.0, f64::max)
    }

    /// Range checks, chunk numbering, `eps` monotonicity, and for Case 2 the
    /// chord constraint `t_j >= chord(s_j)`.
    pub fn validate(&self) -> Result<()> {
        let chord = match self.strategy {
            Strategy::RaiseCase2 => Some(chord_line(self.s, self.t)?),
            _ => None,
        };
        let mut prev_eps = f64::INFINITY;
        for (k, e) in self.entries.iter().enumerate() {
            if e.j != k + 1 {
                return Err(Error::PlanInvariant(format!("entry {k} has j={} (expected {})", e.j, k + 1)));
            }
            for (name, v) in [("s_j", e.s_j), ("t_j", e.t_j), ("delta_j", e.delta_j)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::PlanInvariant(format!("{name}={v} at j={} outside [0,1]", e.j)));
                }
            }
            if !e.eps_j.is_nan() {
                if e.eps_j > prev_eps {
                    return Err(Error::PlanInvariant(format!("eps increases at j={}", e.j)));
                }
                prev_eps = e.eps_j;
            }
            if let Some(line) = chord {
                let floor = line.eval(e.s_j).min(1.0);
                if e.t_j < floor - 1e-12 {
                    return Err(Error::PlanInvariant(format!(
                        "t_j={} below chord {floor} at j={}",
                        e.t_j, e.j
                    )));
                }
            }
        }
        Ok(())
    }

    /// Header `strategy s t seed`, then one `j s_j delta_j t_j` row per chunk.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.strategy, self.s, self.t, self.seed);
        for e in &self.entries {
            let _ = writeln!(out, "{} {} {} {}", e.j, e.s_j, e.delta_j, e.t_j);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty plan".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let [strategy, s, t, seed] = h[..] else {
            return Err(Error::Parse(format!("plan header needs `strategy s t seed`, got {header:?}")));
        };
        let num = |x: &str| -> Result<f64> { x.parse().map_err(|_| Error::Parse(format!("bad number {x:?}"))) };
        let mut plan = SurgeryPlan {
            strategy: strategy.parse()?,
            s: num(s)?,
            t: num(t)?,
            seed: seed.parse().map_err(|_| Error::Parse(format!("bad seed {seed:?}")))?,
            entries: Vec::new(),
        };
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let [j, s_j, delta_j, t_j] = f[..] else {
                return Err(Error::Parse(format!("plan row needs `j s_j delta_j t_j`, got {line:?}")));
            };
            plan.entries.push(PlanEntry {
                j: j.parse().map_err(|_| Error::Parse(format!("bad chunk index {j:?}")))?,
                s_j: num(s_j)?,
                delta_j: num(delta_j)?,
                t_j: num(t_j)?,
                eps_j: f64::NAN,
            });
        }
        plan.validate()?;
        Ok(plan)
    }
}

fn check_inputs(s_seq: &[f64], eps_seq: &[f64]) -> Result<()> {
    if s_seq.len() != eps_seq.len() {
        return Err(Error::LengthMismatch {
            left: s_seq.len(),
            right: eps_seq.len(),
        });
    }
    for &s in s_seq {
        check_unit("plan s_j", s)?;
    }
    for &e in eps_seq {
        check_unit("plan eps_j", e)?;
    }
    if eps_seq.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("eps sequence must be nonincreasing".into()));
    }
    Ok(())
}

/// Target 1 everywhere, radius `1/2 + eps_j - g(s_j) + 1/j`.
pub fn plan_randomize(s_seq: &[f64], eps_seq: &[f64]) -> Result<SurgeryPlan> {
    check_inputs(s_seq, eps_seq)?;
    let entries = s_seq
        .iter()
        .zip(eps_seq)
        .enumerate()
        .map(|(k, (&s_j, &eps_j))| {
            let j = k + 1;
            PlanEntry {
                j,
                s_j,
                t_j: 1.0,
                delta_j: (0.5 + eps_j - h_inv(s_j) + 1.0 / j as f64).clamp(0.0, 1.0),
                eps_j,
            }
        })
        .collect();
    let plan = SurgeryPlan {
        strategy: Strategy::Randomize,
        s: liminf_surrogate(s_seq),
        t: 1.0,
        seed: 0,
        entries,
    };
    plan.validate()?;
    Ok(plan)
}

/// Buffered plan keeping every prefix `c j^2` bits above `s n_j - b`.
pub fn plan_weak_srandom(s_seq: &[f64], c: f64) -> Result<SurgeryPlan> {
    let horizon = s_seq.len();
    let sched = buffer_schedule(c, s_seq, horizon)?;
    let entries: Vec<PlanEntry> = (1..=horizon)
        .map(|j| {
            let (s_j, eps_j) = (s_seq[j - 1], sched.eps[j]);
            PlanEntry {
                j,
                s_j,
                t_j: round_up(m_profile(s_j, eps_j), j),
                delta_j: (2.0 * eps_j).min(1.0),
                eps_j,
            }
        })
        .collect();
    let s = sched.s_liminf;
    let mut sum = 0.0;
    for e in &entries {
        let jj = (e.j * e.j) as f64;
        sum += e.t_j * jj;
        let rhs = s * chunk_boundary(e.j) as f64 - sched.b;
        if !(sum - c * jj > rhs) {
            return Err(Error::BufferCheck {
                j: e.j,
                lhs: sum - c * jj,
                rhs,
            });
        }
    }
    let plan = SurgeryPlan {
        strategy: Strategy::WeakSRandom,
        s,
        t: s,
        seed: 0,
        entries,
    };
    plan.validate()?;
    Ok(plan)
}

/// Raise from `s` to `t`. `t = 1` delegates to [`plan_randomize`]; otherwise
/// the strategy comes from [`case_select`].
pub fn plan_raise(s_seq: &[f64], s: f64, t: f64, eps_seq: &[f64]) -> Result<SurgeryPlan> {
    let s = check_unit("plan_raise s", s)?;
    let t = check_unit("plan_raise t", t)?;
    if s >= t {
        return Err(Error::Domain {
            what: "plan_raise requires s < t; s",
            value: s,
        });
    }
    if t >= 1.0 {
        let mut plan = plan_randomize(s_seq, eps_seq)?;
        plan.s = s;
        return Ok(plan);
    }
    check_inputs(s_seq, eps_seq)?;
    let case = case_select(s, t)?;
    let delta = h_inv(t) - h_inv(s);
    let chord = chord_line(s, t)?;
    let entries: Vec<PlanEntry> = s_seq
        .iter()
        .zip(eps_seq)
        .enumerate()
        .map(|(k, (&s_j, &eps_j))| {
            let j = k + 1;
            let (t_j, delta_j) = match case {
                RaiseCase::Case1 => (round_up(m_profile(s_j, delta), j), delta + eps_j),
                RaiseCase::Case2 => {
                    let target = chord.eval(s_j).clamp(0.0, 1.0);
                    // radius from the unrounded target; rounding is absorbed by eps_j
                    (round_up(target, j), h_inv(target) - h_inv(s_j) + eps_j)
                }
            };
            PlanEntry {
                j,
                s_j,
                t_j,
                delta_j: delta_j.clamp(0.0, 1.0),
                eps_j,
            }
        })
        .collect();
    let plan = SurgeryPlan {
        strategy: match case {
            RaiseCase::Case1 => Strategy::RaiseCase1,
            RaiseCase::Case2 => Strategy::RaiseCase2,
        },
        s,
        t,
        seed: 0,
        entries,
    };
    plan.validate()?;
    check_raise_budget(&plan)?;
    Ok(plan)
}

/// Weighted planned distance stays within `raise + max eps + 1/tail_start`
/// from the tail start on.
pub fn check_raise_budget(plan: &SurgeryPlan) -> Result<()> {
    let series = plan.planned_distance_series();
    if series.is_empty() {
        return Ok(());
    }
    let ts = default_tail_start(series.len()).max(2);
    let allowed = h_inv(plan.t) - h_inv(plan.s) + plan.max_eps() + 1.0 / ts as f64;
    for (k, &v) in series.iter().enumerate().skip(ts.saturating_sub(2)) {
        if v > allowed + 1e-12 {
            return Err(Error::PlanInvariant(format!(
                "planned distance {v} after chunk {} exceeds {allowed}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Radius `g(1 - s) + eps_j`, target `s`.
pub fn plan_lower(s_seq: &[f64], s: f64, eps_seq: &[f64]) -> Result<SurgeryPlan> {
    let s = check_unit("plan_lower s", s)?;
    check_inputs(s_seq, eps_seq)?;
    let base = h_inv(1.0 - s);
    let entries = s_seq
        .iter()
        .zip(eps_seq)
        .enumerate()
        .map(|(k, (&s_j, &eps_j))| PlanEntry {
            j: k + 1,
            s_j,
            t_j: s,
            delta_j: (base + eps_j).clamp(0.0, 1.0),
            eps_j,
        })
        .collect();
    let plan = SurgeryPlan {
        strategy: Strategy::Lower,
        s,
        t: s,
        seed: 0,
        entries,
    };
    plan.validate()?;
    Ok(plan)
}

/// Zero-radius plan: applying it returns the input unchanged.
pub fn plan_identity(s_seq: &[f64], s: f64) -> Result<SurgeryPlan> {
    let s = check_unit("plan_identity s", s)?;
    let entries = s_seq
        .iter()
        .enumerate()
        .map(|(k, &s_j)| PlanEntry {
            j: k + 1,
            s_j,
            t_j: s_j,
            delta_j: 0.0,
            eps_j: 0.0,
        })
        .collect();
    let plan = SurgeryPlan {
        strategy: Strategy::RaiseCase1,
        s,
        t: s,
        seed: 0,
        entries,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::drop_profile;

    #[test]
    fn eps_defaults() {
        assert_eq!(default_eps(1), 1.0 / 2.0);
        assert_eq!(default_eps(2), 1.0 / 2.0);
        assert_eq!(default_eps(3), 1.0 / 3.0);
        assert_eq!(default_eps(1 << 20), 1.0 / 21.0);
        let e = default_eps_seq(1000);
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn randomize_examples() {
        let p = plan_randomize(&[1.0, 0.0, 0.0], &[0.1, 0.1, 0.1]).unwrap();
        assert!((p.entries[0].delta_j - 1.0).abs() < 1e-12);
        assert!((p.entries[2].delta_j - (0.6 + 1.0 / 3.0)).abs() < 1e-12);
        let p = plan_randomize(&[1.0; 50], &[0.05; 50]).unwrap();
        assert!((p.entries[49].delta_j - (0.05 + 0.02)).abs() < 1e-12);
        assert!(p.entries.iter().all(|e| e.t_j == 1.0));
        assert!(plan_randomize(&[0.5], &[0.1, 0.1]).is_err());
        assert!(plan_randomize(&[0.5, 0.5], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn randomize_aggregate_is_near_the_bound() {
        let big_j = 400;
        let eps = default_eps_seq(big_j);
        let p = plan_randomize(&vec![0.5; big_j], &eps).unwrap();
        let bound = 0.5 - h_inv(0.5) + p.max_eps();
        // the 1/j terms average to about 1.5/J
        assert!(p.planned_distance() <= bound + 2.0 / big_j as f64);
    }

    #[test]
    fn weak_srandom_examples() {
        let p = plan_weak_srandom(&vec![0.5; 2000], 10.0).unwrap();
        assert!(p.entries.iter().all(|e| (e.delta_j - 2.0 * e.eps_j).abs() < 1e-15 || e.delta_j == 1.0));
        assert!(p.entries.iter().all(|e| e.t_j >= e.s_j && e.t_j <= 1.0));
        assert!(matches!(plan_weak_srandom(&[1.0; 50], 10.0), Err(Error::NoBufferHeadroom { .. })));
    }

    #[test]
    fn raise_case1_constant() {
        let (s, t) = (0.1, 0.3);
        assert_eq!(case_select(s, t).unwrap(), RaiseCase::Case1);
        let eps = default_eps_seq(300);
        let p = plan_raise(&[s; 300], s, t, &eps).unwrap();
        assert_eq!(p.strategy, Strategy::RaiseCase1);
        let delta = h_inv(t) - h_inv(s);
        for e in &p.entries {
            assert!(e.t_j + 1e-12 >= t);
            assert!((e.delta_j - (delta + e.eps_j)).abs() < 1e-12);
        }
    }

    #[test]
    fn raise_case2_alternating() {
        let (s, t) = (0.3, 0.7);
        assert_eq!(case_select(s, t).unwrap(), RaiseCase::Case2);
        let s_seq: Vec<f64> = (0..400).map(|k| if k % 2 == 0 { 0.1 } else { 0.5 }).collect();
        let eps = vec![0.02; 400];
        let p = plan_raise(&s_seq, s, t, &eps).unwrap();
        assert_eq!(p.strategy, Strategy::RaiseCase2);
        // the chord passes through (s, t), so the mean of the alternating
        // sequence lands on p(mean) by concavity
        let line = chord_line(s, t).unwrap();
        let mean = running_mean(&s_seq);
        let bound = drop_profile(mean, &line).unwrap() + 0.02;
        assert!(p.planned_distance() <= bound + 1e-9, "{} > {bound}", p.planned_distance());
    }

    fn running_mean(s_seq: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, v) in s_seq.iter().enumerate() {
            let w = ((k + 1) * (k + 1)) as f64;
            num += v * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn raise_case2_random_chunks_are_free() {
        let (s, t) = (0.3, 0.7);
        let p = plan_raise(&[1.0; 20], s, t, &[0.05; 20]).unwrap();
        assert!(p.entries.iter().all(|e| e.t_j == 1.0 && (e.delta_j - 0.05).abs() < 1e-12));
    }

    #[test]
    fn raise_edge_cases() {
        assert!(plan_raise(&[0.5], 0.6, 0.6, &[0.1]).is_err());
        let p = plan_raise(&[0.5; 5], 0.5, 1.0, &[0.1; 5]).unwrap();
        assert_eq!(p.strategy, Strategy::Randomize);
        assert_eq!(p.s, 0.5);
    }

    #[test]
    fn lower_and_identity() {
        let p = plan_lower(&[1.0; 4], 0.5, &[0.1; 4]).unwrap();
        assert!(p.entries.iter().all(|e| (e.delta_j - (h_inv(0.5) + 0.1)).abs() < 1e-12));
        let p = plan_identity(&[0.2, 0.4], 0.3).unwrap();
        assert!(p.entries.iter().all(|e| e.delta_j == 0.0));
    }

    #[test]
    fn text_round_trip() {
        let p = plan_raise(&[0.5, 0.25, 0.7], 0.5, 0.8, &[0.3, 0.2, 0.1]).unwrap();
        let text = p.to_text();
        assert!(text.starts_with(&format!("{} 0.5 0.8 0\n", p.strategy)));
        let q = SurgeryPlan::from_text(&text).unwrap();
        assert_eq!(q.strategy, p.strategy);
        for (a, b) in p.entries.iter().zip(&q.entries) {
            assert_eq!((a.j, a.s_j, a.delta_j, a.t_j), (b.j, b.s_j, b.delta_j, b.t_j));
            assert!(b.eps_j.is_nan());
        }
        assert!(SurgeryPlan::from_text("lower 0.5 0.5\n").is_err());
        assert!(SurgeryPlan::from_text("lower 0.5 0.5 1\n2 0.5 0.1 0.5\n").is_err());
        assert!(SurgeryPlan::from_text("sideways 0.5 0.5 1\n").is_err());
    }
}
