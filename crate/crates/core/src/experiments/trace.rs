use alloc::vec::Vec;

use crate::plant::ModeTag;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// One logged sample. Torques are those applied over the step that starts
/// at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TraceRow {
    pub t: f64,
    pub mode: ModeTag,
    pub theta_m: f64,
    pub omega_m: f64,
    pub theta_o: f64,
    pub omega_o: f64,
    pub tau_cmd: f64,
    pub tau_applied: f64,
    pub tau_spring: f64,
    pub i_q: f64,
}

/// Uniformly sampled time series.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Trace {
    /// Spacing between rows (s).
    pub interval: f64,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(interval: f64) -> Self {
        Trace {
            interval,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Rows with `start <= t < end`.
    pub fn window(&self, start: f64, end: f64) -> &[TraceRow] {
        let lo = self.rows.partition_point(|r| r.t < start);
        let hi = self.rows.partition_point(|r| r.t < end);
        &self.rows[lo..hi]
    }

    /// Every `k`-th row, starting with the first.
    pub fn decimated(&self, k: usize) -> Trace {
        let k = k.max(1);
        Trace {
            interval: self.interval * k as f64,
            rows: self.rows.iter().step_by(k).copied().collect(),
        }
    }

    /// Contiguous runs of equal mode tag as `(tag, start_index, end_index)`,
    /// end exclusive. The runs partition the trace.
    pub fn segments(&self) -> Vec<(ModeTag, usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || self.rows[i].mode != self.rows[start].mode {
                out.push((self.rows[start].mode, start, i));
                start = i;
            }
        }
        out
    }

    /// Time strictly increasing and spacing uniform within a relative
    /// tolerance.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let d = w[1].t - w[0].t;
            d > 0.0 && libm::fabs(d - self.interval) <= rel_tol * self.interval
        })
    }
}
