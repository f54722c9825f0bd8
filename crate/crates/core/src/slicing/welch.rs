use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::SliceError;

/// Occurrence counts of one concept within one slice: `hits` of `n`
/// documents contain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceStats {
    pub hits: u64,
    pub n: u64,
}

impl OccurrenceStats {
    pub fn new(hits: u64, n: u64) -> Self {
        OccurrenceStats { hits, n }
    }

    pub fn rate(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.hits as f64 / self.n as f64
        }
    }

    /// Unbiased sample variance of the 0/1 occurrence indicators.
    fn sample_variance(&self) -> f64 {
        let p = self.rate();
        let n = self.n as f64;
        p * (1.0 - p) * n / (n - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub dof: f64,
    /// Two-sided.
    pub p_value: f64,
    pub mutated: bool,
}

/// Welch's two-sample t-test on Bernoulli occurrence indicators.
///
/// `significance` is the per-test level (already corrected for multiple
/// comparisons by the caller). When both samples have zero variance the
/// test degenerates: equal rates give `t = 0, p = 1`; different rates give
/// an infinite statistic with `p = 0`.
pub fn welch_t(
    a: OccurrenceStats,
    b: OccurrenceStats,
    significance: f64,
) -> Result<TTestResult, SliceError> {
    for s in [a, b] {
        if s.n < 2 {
            return Err(SliceError::TooFewDocuments { n: s.n });
        }
        if s.hits > s.n {
            return Err(SliceError::InvalidCounts { hits: s.hits, n: s.n });
        }
    }
    let (na, nb) = (a.n as f64, b.n as f64);
    let diff = a.rate() - b.rate();
    let va = a.sample_variance() / na;
    let vb = b.sample_variance() / nb;
    let se2 = va + vb;

    if se2 == 0.0 {
        let dof = na + nb - 2.0;
        return Ok(if diff == 0.0 {
            TTestResult { t_stat: 0.0, dof, p_value: 1.0, mutated: false }
        } else {
            TTestResult {
                t_stat: diff.signum() * f64::INFINITY,
                dof,
                p_value: 0.0,
                mutated: true,
            }
        });
    }

    let t_stat = diff / se2.sqrt();
    let dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    let p_value = (2.0 * dist.sf(t_stat.abs())).min(1.0);
    Ok(TTestResult {
        t_stat,
        dof,
        p_value,
        mutated: p_value < significance,
    })
}
