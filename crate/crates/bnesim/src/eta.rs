//! Spectral upper bound for the surplus recovery gain.
//!
//! Convergence of the distributed runtime needs `eta` below
//! `min_l (1/(20 + 8 n_l))^{n_l} * (1 - |lambda_3|)^{n_l}`, where
//! `lambda_3` is the third-largest eigenvalue modulus of the per-entry
//! window mixing product at `eta = 0`. The bound is typically minuscule
//! and over-conservative, so callers treat a violation as a warning, not
//! an error.

use bnesim_core::comm::{effective_windows, entry_mixing, stacked_mixing, Matrix};
use bnesim_core::network::NetworkSchedule;
use bnesim_core::{CoreError, Result};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Third-largest eigenvalue modulus of a dense square matrix; zero when the
/// matrix is smaller than 3x3.
fn third_eigenvalue_modulus(m: &Matrix) -> Result<f64> {
    if m.n < 3 {
        return Ok(0.0);
    }
    let dm = DMatrix::from_row_slice(m.n, m.n, &m.data);
    let eig = dm.complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|c| c.norm()).collect();
    if moduli.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Config("eigenvalue computation failed".into()));
    }
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(moduli[2])
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Upper bound on the surplus gain `eta` for the given schedule and
/// sparsification, taking the worst `lambda_3` over all entries and all
/// distinct aligned windows of one full schedule cycle.
pub fn eta_upper_bound(
    schedule: &NetworkSchedule,
    dims: [usize; 2],
    d: [usize; 2],
    literal_b: bool,
) -> Result<f64> {
    let (r, _) = effective_windows(schedule.r0, schedule.s0, dims, d);
    let mut bound = f64::INFINITY;
    for l in 0..2 {
        let n = schedule.n(l);
        let dim = dims[l];
        let sel_cycle = schedule.r0 as u64 * (dim as u64 / gcd(dim as u64, d[l] as u64));
        let full = lcm(lcm(schedule.period() as u64, sel_cycle), r as u64);
        let windows = full / r as u64;
        let mut worst = 0.0_f64;
        // Entries whose selection pattern coincides share the same window
        // products; memoize on the pattern.
        let mut seen: HashMap<Vec<bool>, f64> = HashMap::new();
        for entry in 0..dim {
            let pattern: Vec<bool> = (1..=full)
                .map(|t| {
                    bnesim_core::comm::selected_entries(t, schedule.r0, dim, d[l])
                        .contains(&entry)
                })
                .collect();
            let lam = match seen.get(&pattern) {
                Some(&v) => v,
                None => {
                    let mut lam = 0.0_f64;
                    for w in 0..windows {
                        let mut product = Matrix::identity(2 * n);
                        for k in 0..r as u64 {
                            let t = w * r as u64 + k + 1;
                            let (a, b) = entry_mixing(schedule, l, t, dim, d[l], entry, literal_b);
                            product = stacked_mixing(&a, &b).matmul(&product);
                        }
                        lam = lam.max(third_eigenvalue_modulus(&product)?);
                    }
                    seen.insert(pattern, lam);
                    lam
                }
            };
            worst = worst.max(lam);
        }
        let base = 1.0 / (20.0 + 8.0 * n as f64);
        let side_bound = base.powi(n as i32) * (1.0 - worst).max(0.0).powi(n as i32);
        bound = bound.min(side_bound);
    }
    Ok(bound)
}
