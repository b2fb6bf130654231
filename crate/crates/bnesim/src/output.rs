//! Run artifacts on disk: metrics CSV, final strategies CSV, a summary
//! document, an optional packet trace, and the byte-accounting check.

use bnesim_core::comm::BYTES_PER_ENTRY;
use bnesim_core::discretize::DiscreteTypeModel;
use bnesim_core::engine::PacketEvent;
use bnesim_core::network::NetworkSchedule;
use bnesim_core::{BlockStrategy, CoreError};
use serde::Serialize;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const METRICS_HEADER: &str =
    "tick,side1_consensus,side2_consensus,side1_surplus,side2_surplus,oracle_dist,gap_proxy,bytes_cum";

pub const STRATEGY_HEADER: &str = "side,type_index,theta_point,action_dim,value";

/// One sampled metrics row; `oracle_dist` and `gap_proxy` are NaN when the
/// run skipped the centralized reference solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub tick: u64,
    pub consensus: [f64; 2],
    pub surplus: [f64; 2],
    pub oracle_dist: f64,
    pub gap_proxy: f64,
    pub bytes_cum: u64,
}

impl MetricsRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.tick,
            self.consensus[0],
            self.consensus[1],
            self.surplus[0],
            self.surplus[1],
            self.oracle_dist,
            self.gap_proxy,
            self.bytes_cum
        )
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{METRICS_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.csv_line())?;
    }
    w.flush()
}

/// Writes one or two block strategies as plot-ready CSV.
pub fn write_strategies(
    path: &Path,
    model: &DiscreteTypeModel,
    strategies: &[&BlockStrategy],
) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{STRATEGY_HEADER}")?;
    for s in strategies {
        let l = s.side;
        for r in 0..s.n_blocks {
            let theta = model.points[l.idx()][r];
            for (k, v) in s.block(r).iter().enumerate() {
                writeln!(w, "{},{},{},{},{}", l.idx() + 1, r, theta, k, v)?;
            }
        }
    }
    w.flush()
}

/// Final state of a run, serialized as the summary document.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: String,
    pub config_digest: String,
    pub windows: u64,
    pub ticks: u64,
    pub r_window: usize,
    pub s_window: usize,
    pub d: [usize; 2],
    pub eta: f64,
    /// Spectral bound on `eta`; absent when the schedule cycle was too long
    /// to evaluate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_bound: Option<f64>,
    pub final_consensus: [f64; 2],
    pub final_surplus: [f64; 2],
    pub final_oracle_dist: f64,
    pub final_gap_proxy: f64,
    pub messages: u64,
    pub bytes: u64,
    pub avg_bytes_per_tick: f64,
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> io::Result<()> {
    let text = toml::to_string(summary).map_err(io::Error::other)?;
    fs::write(path, text)
}

/// A line-oriented packet trace writer: `t, side, sender, receiver, d,
/// first_index`.
pub struct PacketTrace {
    w: BufWriter<fs::File>,
    err: Option<io::Error>,
}

impl PacketTrace {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self {
            w: BufWriter::new(fs::File::create(path)?),
            err: None,
        })
    }

    pub fn record(&mut self, ev: PacketEvent) {
        if self.err.is_some() {
            return;
        }
        let side = ev.side.idx() + 1;
        if let Err(e) = writeln!(
            self.w,
            "{}, {}, {}, {}, {}, {}",
            ev.tick, side, ev.from, ev.to, ev.d, ev.first_index
        ) {
            self.err = Some(e);
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.w.flush()
    }
}

/// Byte-accounting report: message count, total bytes, and the identity
/// `bytes = 12 * d * messages` checked per packet class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ByteReport {
    pub messages: u64,
    pub bytes: u64,
    pub avg_bytes_per_tick: f64,
}

/// Replays the schedule's message census over `ticks` ticks and checks that
/// the observed `(packets, bytes)` totals match `12 * d * messages` exactly,
/// with within-side and cross messages counted at their sender's `d`.
pub fn account_bytes(
    schedule: &NetworkSchedule,
    d: [usize; 2],
    ticks: u64,
    observed: (u64, u64),
) -> Result<ByteReport, CoreError> {
    let mut messages = 0u64;
    let mut bytes = 0u64;
    for t in 0..ticks {
        let frame = schedule.frame(t);
        for l in 0..2 {
            let within: u64 = frame.within[l]
                .in_neighbors
                .iter()
                .map(|v| v.len() as u64)
                .sum();
            // Each within-side edge carries two packets per tick: the
            // sparsified strategy and the sparsified surplus.
            messages += 2 * within;
            bytes += 2 * within * BYTES_PER_ENTRY * d[l] as u64;
            let cross: u64 = frame.cross[1 - l].iter().map(|v| v.len() as u64).sum();
            messages += cross;
            bytes += cross * BYTES_PER_ENTRY * d[l] as u64;
        }
    }
    if (messages, bytes) != observed {
        return Err(CoreError::Protocol(format!(
            "byte accounting mismatch: schedule census gives {messages} messages / {bytes} bytes, run observed {} / {}",
            observed.0, observed.1
        )));
    }
    let avg = if ticks == 0 {
        0.0
    } else {
        bytes as f64 / ticks as f64
    };
    Ok(ByteReport {
        messages,
        bytes,
        avg_bytes_per_tick: avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bnesim_core::network::split_ring_schedule;

    #[test]
    fn zero_tick_run_accounts_to_zero() {
        let schedule = split_ring_schedule(3, 3, 1).unwrap();
        let report = account_bytes(&schedule, [2, 2], 0, (0, 0)).unwrap();
        assert_eq!(report.messages, 0);
        assert_eq!(report.bytes, 0);
    }

    #[test]
    fn mismatch_is_flagged() {
        let schedule = split_ring_schedule(3, 3, 1).unwrap();
        let err = account_bytes(&schedule, [2, 2], 4, (0, 0)).unwrap_err();
        assert!(matches!(err, CoreError::Protocol(_)));
    }

    #[test]
    fn metrics_line_layout() {
        let row = MetricsRow {
            tick: 8,
            consensus: [0.5, 0.25],
            surplus: [0.0, 0.125],
            oracle_dist: 1.5,
            gap_proxy: 0.75,
            bytes_cum: 96,
        };
        assert_eq!(row.csv_line(), "8,0.5,0.25,0,0.125,1.5,0.75,96");
    }
}
