//! Steering parameter sequences `τ_k = c / (k + k0)^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of terms summed by the divergence heuristic.
pub const DIVERGENCE_TERMS: usize = 1_000_000;
/// Partial-sum threshold of the divergence heuristic.
pub const DIVERGENCE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringSchedule {
    pub c: f64,
    pub k0: f64,
    pub p: f64,
}

impl Default for SteeringSchedule {
    /// `τ_k = 1 / (k + 2)`: harmonic decay shifted so that `τ_0 = 1/2 < 1`.
    fn default() -> Self {
        SteeringSchedule {
            c: 1.0,
            k0: 2.0,
            p: 1.0,
        }
    }
}

impl SteeringSchedule {
    /// Accepts `c ∈ (0,1]`, `k0 >= 1`, `p ∈ (1/2, 1]` with `τ_0 < 1`.
    pub fn new(c: f64, k0: f64, p: f64) -> Result<Self> {
        let s = SteeringSchedule { c, k0, p };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if !(self.c > 0.0 && self.c <= 1.0) {
            return bad(format!("c = {} not in (0,1]", self.c));
        }
        if !(self.k0 >= 1.0 && self.k0.is_finite()) {
            return bad(format!("k0 = {} must be >= 1", self.k0));
        }
        if !(self.p > 0.5 && self.p <= 1.0) {
            return bad(format!("p = {} not in (1/2,1]", self.p));
        }
        if self.tau(0) >= 1.0 {
            return bad("tau_0 = 1; raise k0 or lower c".into());
        }
        Ok(())
    }

    #[inline]
    pub fn tau(&self, k: usize) -> f64 {
        self.c / (k as f64 + self.k0).powf(self.p)
    }

    /// Checks the steering axioms on a prefix. The divergence verdict uses
    /// the closed form for this family (`p <= 1` diverges).
    pub fn validate(&self, prefix: usize) -> ScheduleReport {
        let mut report = validate_schedule(|k| self.tau(k), prefix);
        let diverges = self.p <= 1.0 && self.c > 0.0;
        report.divergent = AxiomCheck {
            pass: diverges,
            detail: format!(
                "closed form: p = {} {} 1 (heuristic partial sum {:.4})",
                self.p,
                if diverges { "<=" } else { ">" },
                report.partial_sum
            ),
        };
        report
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    pub prefix: usize,
    pub in_range: AxiomCheck,
    pub nonincreasing: AxiomCheck,
    pub vanishing: AxiomCheck,
    pub divergent: AxiomCheck,
    /// `sum_{k<n} |τ_{k+1} - τ_k|` over the prefix
    pub total_variation: f64,
    /// `sum_{k<DIVERGENCE_TERMS} τ_k`
    pub partial_sum: f64,
}

impl ScheduleReport {
    pub fn all_pass(&self) -> bool {
        self.in_range.pass && self.nonincreasing.pass && self.vanishing.pass && self.divergent.pass
    }
}

/// Prefix diagnostics for an arbitrary sequence.
///
/// Vanishing is judged by the decay over the last decade of the prefix
/// (`τ_{n-1} <= 0.9 τ_{n/10}`); divergence by the partial sum over
/// [`DIVERGENCE_TERMS`] terms exceeding [`DIVERGENCE_THRESHOLD`]. Both are
/// heuristics: no finite prefix decides either property.
pub fn validate_schedule<F: Fn(usize) -> f64>(tau: F, prefix: usize) -> ScheduleReport {
    let n = prefix.max(1);
    let mut first_out = None;
    let mut first_rise = None;
    let mut total_variation = 0.0;
    let mut prev = tau(0);
    for k in 0..n {
        let t = if k == 0 { prev } else { tau(k) };
        if first_out.is_none() && !(t > 0.0 && t < 1.0) {
            first_out = Some((k, t));
        }
        if k > 0 {
            if first_rise.is_none() && t > prev {
                first_rise = Some(k);
            }
            total_variation += (t - prev).abs();
        }
        prev = t;
    }
    let tail = tau(n - 1);
    let decade = tau(n / 10);
    let vanishing = n >= 10 && tail <= 0.9 * decade;
    let partial_sum: f64 = (0..DIVERGENCE_TERMS).map(&tau).sum();

    ScheduleReport {
        prefix: n,
        in_range: AxiomCheck {
            pass: first_out.is_none(),
            detail: match first_out {
                None => "all tau_k in (0,1)".into(),
                Some((k, t)) => format!("tau_{k} = {t} outside (0,1)"),
            },
        },
        nonincreasing: AxiomCheck {
            pass: first_rise.is_none(),
            detail: match first_rise {
                None => "monotone nonincreasing".into(),
                Some(k) => format!("tau increases at k = {k}"),
            },
        },
        vanishing: AxiomCheck {
            pass: vanishing,
            detail: format!("tau_{} = {tail:e} vs tau_{} = {decade:e}", n - 1, n / 10),
        },
        divergent: AxiomCheck {
            pass: partial_sum > DIVERGENCE_THRESHOLD,
            detail: format!(
                "partial sum over {DIVERGENCE_TERMS} terms = {partial_sum:.4} (threshold {DIVERGENCE_THRESHOLD})"
            ),
        },
        total_variation,
        partial_sum,
    }
}
