//! Sparsified communication: deterministic entry selection, packet byte
//! accounting, and the per-entry mixing matrices.
//!
//! Every vector a sender transmits is reduced to `d` of its `dim` entries.
//! The selection is cyclic and shared by all agents of a side: during the
//! `q`-th window of `r0` ticks the selected entries are
//! `(q*d .. q*d + d) mod dim`, so every entry is broadcast at least once per
//! `r0 * ceil(dim / d)` ticks. Per entry, a tick either carries the full
//! frame graph (entry selected) or no edges at all, which is what the
//! per-entry connectivity checks below verify.

use crate::error::{CoreError, Result};
use crate::network::{Digraph, NetworkSchedule};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Bytes on the wire per transmitted entry: an 8-byte value plus a 4-byte
/// entry index.
pub const BYTES_PER_ENTRY: u64 = 12;

/// One sparsified vector on one directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePacket {
    /// 0-based entry indices, ascending in cyclic order of selection.
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparsePacket {
    pub fn payload_bytes(&self) -> u64 {
        BYTES_PER_ENTRY * self.indices.len() as u64
    }
}

/// Entries selected at 1-based tick `t` for a side with vector dimension
/// `dim` sending `d` entries per tick under window length `r0`.
pub fn selected_entries(t: u64, r0: usize, dim: usize, d: usize) -> Vec<usize> {
    debug_assert!(t >= 1 && d >= 1 && d <= dim);
    let q = (t - 1) / r0 as u64;
    let start = (q * d as u64 % dim as u64) as usize;
    (0..d).map(|j| (start + j) % dim).collect()
}

/// Sparsifies `x` according to the selection at tick `t`.
pub fn sparsify(x: &[f64], t: u64, r0: usize, d: usize) -> SparsePacket {
    let idx = selected_entries(t, r0, x.len(), d);
    SparsePacket {
        values: idx.iter().map(|&k| x[k]).collect(),
        indices: idx.into_iter().map(|k| k as u32).collect(),
    }
}

/// Effective windows of the sparsified schedule: `R` ticks for within-side
/// joint connectivity of every entry, `S` ticks for cross coverage.
pub fn effective_windows(r0: usize, s0: usize, dims: [usize; 2], d: [usize; 2]) -> (usize, usize) {
    let mut r = 0;
    let mut s = 0;
    for l in 0..2 {
        let cycles = dims[l].div_ceil(d[l]);
        r = r.max(r0 * cycles);
        s = s.max(s0 * r0 * cycles);
    }
    (r, s)
}

/// Dense row-major square matrix with a couple of stochasticity probes.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.data[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

/// Row-stochastic in-neighbor averaging matrix: row `i` puts equal weight
/// on `i` and its in-neighbors.
pub fn in_neighbor_mixing(g: &Digraph) -> Matrix {
    let mut a = Matrix::zeros(g.n);
    for i in 0..g.n {
        let ins = &g.in_neighbors[i];
        let w = 1.0 / (ins.len() + 1) as f64;
        a.set(i, i, w);
        for &j in ins {
            a.set(i, j, w);
        }
    }
    a
}

/// Surplus-pushing matrix.
///
/// The default (column-stochastic) form lets every sender split its surplus
/// evenly over itself and its out-neighbors, which keeps the stacked mixing
/// matrix column-stochastic and hence conserves the total surplus. The
/// `literal` form instead normalizes each receiver row by its sender count;
/// it mirrors the out-neighbor-set averaging formula but does not conserve
/// mass on asymmetric graphs.
pub fn surplus_mixing(g: &Digraph, literal: bool) -> Matrix {
    let out = g.out_neighbors();
    let mut b = Matrix::zeros(g.n);
    if literal {
        for i in 0..g.n {
            let senders = &out[i];
            let w = 1.0 / (senders.len() + 1) as f64;
            b.set(i, i, w);
            for &j in senders {
                b.set(i, j, w);
            }
        }
    } else {
        for j in 0..g.n {
            let w = 1.0 / (out[j].len() + 1) as f64;
            b.set(j, j, w);
            for &i in &out[j] {
                b.set(i, j, w);
            }
        }
    }
    b
}

/// Cross-layer averaging matrix: row `i` averages over agent `i`'s rival
/// in-neighbors, or stays all-zero when there are none (the receiver then
/// holds its previous estimate).
pub fn cross_mixing(cross: &[Vec<usize>], n_rival: usize) -> Matrix {
    let n = cross.len().max(n_rival);
    let mut c = Matrix::zeros(n);
    for (i, ins) in cross.iter().enumerate() {
        if !ins.is_empty() {
            let w = 1.0 / ins.len() as f64;
            for &j in ins {
                c.set(i, j, w);
            }
        }
    }
    c
}

/// Stacked mixing matrix `[[A, 0], [I - A, B]]` acting on the
/// strategy-plus-surplus vector of one entry.
pub fn stacked_mixing(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.n, b.n);
    let n = a.n;
    let mut m = Matrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, a.get(i, j));
            let delta = if i == j { 1.0 } else { 0.0 };
            m.set(n + i, j, delta - a.get(i, j));
            m.set(n + i, n + j, b.get(i, j));
        }
    }
    m
}

/// Per-entry mixing matrices of side `l` at 1-based tick `t`: the frame
/// matrices when the entry is selected, identity otherwise.
pub fn entry_mixing(
    schedule: &NetworkSchedule,
    l: usize,
    t: u64,
    dim: usize,
    d: usize,
    entry: usize,
    literal_b: bool,
) -> (Matrix, Matrix) {
    let selected = selected_entries(t, schedule.r0, dim, d).contains(&entry);
    let g = &schedule.frame(t - 1).within[l];
    if selected {
        (in_neighbor_mixing(g), surplus_mixing(g, literal_b))
    } else {
        (Matrix::identity(g.n), Matrix::identity(g.n))
    }
}

/// Verifies that the sparsified schedule still satisfies the per-entry
/// information-flow requirements with the effective windows `(R, S)`:
///
/// * for every side and entry, the union of the entry's within-side graphs
///   over any `R` consecutive ticks is strongly connected;
/// * every agent receives every rival entry within any `S` consecutive
///   ticks.
///
/// Returns the effective windows on success.
pub fn verify_entry_connectivity(
    schedule: &NetworkSchedule,
    dims: [usize; 2],
    d: [usize; 2],
) -> Result<(usize, usize)> {
    for l in 0..2 {
        if d[l] == 0 || d[l] > dims[l] {
            return Err(CoreError::Config(format!(
                "side {}: d = {} out of range for dimension {}",
                l + 1,
                d[l],
                dims[l]
            )));
        }
    }
    let (r, s) = effective_windows(schedule.r0, schedule.s0, dims, d);
    let period = schedule.period() as u64;
    for l in 0..2 {
        let dim = dims[l];
        // The schedule of per-entry graphs is periodic: frames repeat with
        // `period` and the selection repeats once `q*d` wraps around `dim`.
        let cyc = (schedule.r0 * (dim / gcd(dim, d[l]))) as u64;
        let full = lcm(period, cyc);
        for entry in 0..dim {
            for start in 0..full {
                let mut union = Digraph::empty(schedule.n(l));
                for k in 0..r as u64 {
                    let t = start + k + 1;
                    if selected_entries(t, schedule.r0, dim, d[l]).contains(&entry) {
                        union = union.union(&schedule.frame(t - 1).within[l]);
                    }
                }
                if !union.is_strongly_connected() {
                    return Err(CoreError::Config(format!(
                        "entry {entry} of side {} is not jointly connected over ticks {}..{}",
                        l + 1,
                        start + 1,
                        start + r as u64
                    )));
                }
            }
        }
        // Cross coverage: side `3-l` receivers of side `l`'s entries.
        let rl = 1 - l;
        for entry in 0..dim {
            for start in 0..full {
                for i in 0..schedule.n(rl) {
                    let covered = (0..s as u64).any(|k| {
                        let t = start + k + 1;
                        !schedule.frame(t - 1).cross[rl][i].is_empty()
                            && selected_entries(t, schedule.r0, dim, d[l]).contains(&entry)
                    });
                    if !covered {
                        return Err(CoreError::Config(format!(
                            "agent {i} of side {} misses entry {entry} of side {} over ticks {}..{}",
                            rl + 1,
                            l + 1,
                            start + 1,
                            start + s as u64
                        )));
                    }
                }
            }
        }
    }
    Ok((r, s))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a as usize, b as usize) as u64 * b
}
