use std::io::{self, Write};

use crate::data::format_float;
use crate::diagnostics::{GammaEstimate, GammaTerm};
use crate::solvers::Trace;

pub const TRACE_HEADER: &str = "k,elapsed_s,f,gap,j1,j2,theta_or_a,gamma_num,gamma_den,energy";

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// One row per record; coordinates are written 1-based, absent values empty.
pub fn write_trace_csv<W: Write>(trace: &Trace, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            format_float(r.elapsed_seconds),
            format_float(r.f_value),
            opt_float(r.gap),
            r.j1.map(|j| (j + 1).to_string()).unwrap_or_default(),
            r.j2.map(|j| (j + 1).to_string()).unwrap_or_default(),
            opt_float(r.theta_or_a),
            opt_float(r.gamma_num_term),
            opt_float(r.gamma_den_term),
            opt_float(r.energy),
        )?;
    }
    out.flush()
}

/// Cumulative sums and ratio per recorded `k`.
pub fn write_ratio_csv<W: Write>(terms: &[GammaTerm], estimate: &GammaEstimate, mut out: W) -> io::Result<()> {
    writeln!(out, "k,num_cumulative,den_cumulative,ratio")?;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, (k, ratio)) in terms.iter().zip(&estimate.ratio_series) {
        num += t.num;
        den += t.den;
        writeln!(
            out,
            "{k},{},{},{}",
            format_float(num),
            format_float(den),
            opt_float(*ratio)
        )?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub k: usize,
    pub mean_gap: f64,
    pub median_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub mean_elapsed_s: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-row statistics across traces recorded on the same schedule.
/// Traces without gaps contribute nothing.
pub fn aggregate_gaps(traces: &[Trace]) -> Vec<AggregateRow> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    (0..first.records.len())
        .filter_map(|i| {
            let mut gaps: Vec<f64> = traces.iter().filter_map(|t| t.records.get(i)?.gap).collect();
            if gaps.is_empty() {
                return None;
            }
            gaps.sort_by(f64::total_cmp);
            let count = gaps.len() as f64;
            let elapsed: f64 = traces
                .iter()
                .filter_map(|t| t.records.get(i).map(|r| r.elapsed_seconds))
                .sum();
            Some(AggregateRow {
                k: first.records[i].k,
                mean_gap: gaps.iter().sum::<f64>() / count,
                median_gap: median(&gaps),
                min_gap: gaps[0],
                max_gap: gaps[gaps.len() - 1],
                mean_elapsed_s: elapsed / traces.len() as f64,
            })
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], mut out: W) -> io::Result<()> {
    writeln!(out, "k,mean_gap,median_gap,min_gap,max_gap,mean_elapsed_s")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            format_float(r.mean_gap),
            format_float(r.median_gap),
            format_float(r.min_gap),
            format_float(r.max_gap),
            format_float(r.mean_elapsed_s)
        )?;
    }
    out.flush()
}
