use super::DiagnosticsError;
use crate::solvers::Trace;

/// Burn-in before the ratio maximum is taken.
pub const DEFAULT_K_BAR: usize = 5000;

/// Gamma summands accumulated over the iterations ending at `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub k: usize,
    pub num: f64,
    pub den: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub gamma: f64,
    pub k_bar: usize,
    /// `(k, cumulative num / cumulative den)`; `None` where the denominator is nonpositive.
    pub ratio_series: Vec<(usize, Option<f64>)>,
    pub sign_violations: usize,
    /// Nonpositive denominators at `k >= k_bar`.
    pub sign_violations_after_k_bar: usize,
}

/// Rows of a trace that carry gamma summands, in trace order.
pub fn gamma_terms(trace: &Trace) -> Vec<GammaTerm> {
    trace
        .records
        .iter()
        .filter_map(|r| {
            Some(GammaTerm {
                k: r.k,
                num: r.gamma_num_term?,
                den: r.gamma_den_term?,
            })
        })
        .collect()
}

/// Term-wise mean over traces recorded on the same schedule. The ratio of
/// the averaged cumulative sums estimates the ratio of expectations.
pub fn mean_gamma_terms(traces: &[Trace]) -> Vec<GammaTerm> {
    let per_trace: Vec<Vec<GammaTerm>> = traces.iter().map(gamma_terms).collect();
    let Some(first) = per_trace.first() else {
        return Vec::new();
    };
    let count = per_trace.len() as f64;
    (0..first.len())
        .map(|i| {
            let (num, den) = per_trace
                .iter()
                .fold((0.0, 0.0), |(n, d), t| (n + t[i].num, d + t[i].den));
            GammaTerm {
                k: first[i].k,
                num: num / count,
                den: den / count,
            }
        })
        .collect()
}

/// Largest cumulative ratio over rows with `k >= k_bar`.
pub fn estimate_gamma(terms: &[GammaTerm], k_bar: usize) -> Result<GammaEstimate, DiagnosticsError> {
    let last = terms.last().ok_or(DiagnosticsError::MissingTerms)?.k;
    if last <= k_bar {
        return Err(DiagnosticsError::TraceTooShort { last, k_bar });
    }
    let (mut num, mut den) = (0.0, 0.0);
    let mut ratio_series = Vec::with_capacity(terms.len());
    let mut sign_violations = 0;
    let mut sign_violations_after_k_bar = 0;
    let mut gamma: Option<f64> = None;
    for t in terms {
        num += t.num;
        den += t.den;
        if den > 0.0 {
            let ratio = num / den;
            ratio_series.push((t.k, Some(ratio)));
            if t.k >= k_bar {
                gamma = Some(gamma.map_or(ratio, |g: f64| g.max(ratio)));
            }
        } else {
            ratio_series.push((t.k, None));
            sign_violations += 1;
            if t.k >= k_bar {
                sign_violations_after_k_bar += 1;
            }
        }
    }
    Ok(GammaEstimate {
        gamma: gamma.ok_or(DiagnosticsError::DegenerateDenominator { k_bar })?,
        k_bar,
        ratio_series,
        sign_violations,
        sign_violations_after_k_bar,
    })
}
