//! Centralized equilibrium oracle for the discretized game.
//!
//! The discretized game is a finite-dimensional convex-concave saddle
//! problem: side 1 minimizes its expected cost block by block, side 2 does
//! the same, and the two costs sum to a constant. The oracle runs projected
//! extragradient iterations on the stacked strategy vector and certifies the
//! result with an exhaustive unilateral-deviation check.

use crate::discretize::{expected_cost_blocks, expected_grad_blocks, CostSelector, DiscreteTypeModel};
use crate::error::{CoreError, Result};
use crate::game::{GameSpec, Side};
use crate::math;
use crate::rng::SplitMix64;
use crate::strategy::BlockStrategy;
use alloc::vec;
use alloc::vec::Vec;

/// Default deviation-grid resolution per action axis in [`dbne_gap`].
pub const DEFAULT_GAP_GRID: usize = 101;

/// Candidate cap for the deviation grid; the per-axis resolution is reduced
/// until the product grid fits.
const GRID_CANDIDATE_CAP: usize = 1_000_000;

/// How often the (expensive) deviation check runs during the iteration.
const GAP_CHECK_EVERY: usize = 50;

/// Result of [`solve_dbne_oracle`]: the equilibrium strategies with the
/// certified deviation gap and the iterations spent.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub s1: BlockStrategy,
    pub s2: BlockStrategy,
    /// Largest unilateral improvement any type point can still achieve.
    pub gap: f64,
    pub iterations: usize,
}

/// Stacked gradient field of the saddle problem: own-cost gradients of both
/// sides, each side descending its own expected cost.
fn saddle_field(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    z1: &[f64],
    z2: &[f64],
    out1: &mut [f64],
    out2: &mut [f64],
) -> Result<()> {
    for l in Side::BOTH {
        let (own, rival, out) = match l {
            Side::One => (z1, z2, &mut *out1),
            Side::Two => (z2, z1, &mut *out2),
        };
        let m = game.m(l);
        let mut g = vec![0.0; m];
        for r in 0..model.n(l) {
            expected_grad_blocks(model, game, l, CostSelector::Average, own, rival, r, &mut g)?;
            out[r * m..(r + 1) * m].copy_from_slice(&g);
        }
    }
    Ok(())
}

/// Projects every block of a stacked strategy onto the side's action set.
fn project_blocks(game: &GameSpec, l: Side, x: &mut [f64]) {
    let m = game.m(l);
    let set = game.action_set(l);
    let mut buf = vec![0.0; m];
    for block in x.chunks_mut(m) {
        set.project(block, &mut buf);
        block.copy_from_slice(&buf);
    }
}

/// Estimates the Lipschitz constant of the saddle field from local
/// finite-difference probes at sampled points and at the action-box
/// corners, where rational costs concentrate their curvature.
fn estimate_lipschitz(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    seed: u64,
) -> Result<f64> {
    let (n1, n2) = (model.n(Side::One), model.n(Side::Two));
    let (m1, m2) = (game.m(Side::One), game.m(Side::Two));
    let (d1, d2) = (n1 * m1, n2 * m2);
    let mut rng = SplitMix64::new(seed);

    let mut probes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for _ in 0..20 {
        let mut z1 = vec![0.0; d1];
        let mut z2 = vec![0.0; d2];
        for block in z1.chunks_mut(m1) {
            game.sample_action(Side::One, &mut rng, block);
        }
        for block in z2.chunks_mut(m2) {
            game.sample_action(Side::Two, &mut rng, block);
        }
        probes.push((z1, z2));
    }
    // All-low/all-high corner combinations of the two bounding boxes.
    for lo1 in [true, false] {
        for lo2 in [true, false] {
            let corner = |l: Side, lo: bool, dim: usize| -> Vec<f64> {
                let b = game.action_set(l).bounds();
                let m = b.len();
                (0..dim)
                    .map(|k| if lo { b[k % m].lo } else { b[k % m].hi })
                    .collect()
            };
            probes.push((corner(Side::One, lo1, d1), corner(Side::Two, lo2, d2)));
        }
    }

    let scale = game
        .action_set(Side::One)
        .bounds()
        .iter()
        .chain(game.action_set(Side::Two).bounds())
        .map(|iv| iv.len())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let eps = 1e-5 * scale;
    let mut best = 0.0_f64;
    let mut fa1 = vec![0.0; d1];
    let mut fa2 = vec![0.0; d2];
    let mut fb1 = vec![0.0; d1];
    let mut fb2 = vec![0.0; d2];
    for (z1, z2) in &probes {
        saddle_field(model, game, z1, z2, &mut fa1, &mut fa2)?;
        for _ in 0..3 {
            // Random inward perturbation so corner probes stay in range of
            // finite costs.
            let mut p1 = z1.clone();
            let mut p2 = z2.clone();
            let mut den = 0.0;
            for (p, set, m) in [
                (&mut p1, game.action_set(Side::One), m1),
                (&mut p2, game.action_set(Side::Two), m2),
            ] {
                let bounds = set.bounds();
                for (k, v) in p.iter_mut().enumerate() {
                    let iv = bounds[k % m];
                    let mid = 0.5 * (iv.lo + iv.hi);
                    let inward = if *v > mid { -1.0 } else { 1.0 };
                    let delta = eps * rng.next_f64() * inward;
                    *v += delta;
                    den += delta * delta;
                }
            }
            saddle_field(model, game, &p1, &p2, &mut fb1, &mut fb2)?;
            let mut num = 0.0;
            for (x, y) in fa1.iter().zip(&fb1).chain(fa2.iter().zip(&fb2)) {
                num += (x - y) * (x - y);
            }
            if den > 1e-30 {
                best = best.max(math::sqrt(num / den));
            }
        }
    }
    Ok(best.max(1e-6))
}

/// Solves the discretized game by projected extragradient and certifies the
/// solution with [`dbne_gap`].
///
/// Returns a non-convergence error carrying the final gap when `max_iters`
/// runs out before the gap drops to `tol`.
pub fn solve_dbne_oracle(
    game: &GameSpec,
    model: &DiscreteTypeModel,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<OracleSolution> {
    let (n1, n2) = (model.n(Side::One), model.n(Side::Two));
    let (m1, m2) = (game.m(Side::One), game.m(Side::Two));
    let (d1, d2) = (n1 * m1, n2 * m2);

    let lip = estimate_lipschitz(model, game, seed)?;
    let mut step = 0.9 / lip;

    // Start at the midpoint of every action box, projected.
    let mut z1 = vec![0.0; d1];
    let mut z2 = vec![0.0; d2];
    for l in Side::BOTH {
        let (z, m) = match l {
            Side::One => (&mut z1, m1),
            Side::Two => (&mut z2, m2),
        };
        let mid: Vec<f64> = game
            .action_set(l)
            .bounds()
            .iter()
            .map(|iv| 0.5 * (iv.lo + iv.hi))
            .collect();
        for block in z.chunks_mut(m) {
            block.copy_from_slice(&mid);
        }
        project_blocks(game, l, z);
    }

    let mut f1 = vec![0.0; d1];
    let mut f2 = vec![0.0; d2];
    let mut h1 = vec![0.0; d1];
    let mut h2 = vec![0.0; d2];
    let mut gap = f64::INFINITY;
    for it in 1..=max_iters {
        // Leading half-step.
        saddle_field(model, game, &z1, &z2, &mut f1, &mut f2)?;
        let mut y1: Vec<f64> = z1.iter().zip(&f1).map(|(z, g)| z - step * g).collect();
        let mut y2: Vec<f64> = z2.iter().zip(&f2).map(|(z, g)| z - step * g).collect();
        project_blocks(game, Side::One, &mut y1);
        project_blocks(game, Side::Two, &mut y2);

        // Correction step with the field at the half point. If the field
        // changed faster than the step assumed, the curvature estimate was
        // too optimistic: shrink the step and redo the iteration.
        saddle_field(model, game, &y1, &y2, &mut h1, &mut h2)?;
        let mut field_delta = 0.0;
        let mut point_delta = 0.0;
        for ((f, h), (z, y)) in f1
            .iter()
            .zip(&h1)
            .chain(f2.iter().zip(&h2))
            .zip(z1.iter().zip(&y1).chain(z2.iter().zip(&y2)))
        {
            field_delta += (f - h) * (f - h);
            point_delta += (z - y) * (z - y);
        }
        if point_delta > 1e-30 {
            let local = math::sqrt(field_delta / point_delta);
            if local > 1e-12 && step > 0.9 / local {
                step = 0.9 / local;
                continue;
            }
        }
        let mut moved = 0.0_f64;
        for (z, g) in z1.iter_mut().zip(&h1) {
            let next = *z - step * g;
            moved = moved.max(math::abs(next - *z));
            *z = next;
        }
        for (z, g) in z2.iter_mut().zip(&h2) {
            let next = *z - step * g;
            moved = moved.max(math::abs(next - *z));
            *z = next;
        }
        project_blocks(game, Side::One, &mut z1);
        project_blocks(game, Side::Two, &mut z2);

        // The deviation check is expensive; run it once the iterate has
        // mostly settled, and periodically after that.
        if moved < step * tol || it % GAP_CHECK_EVERY == 0 || it == max_iters {
            let s1 = BlockStrategy::new(Side::One, n1, m1, z1.clone());
            let s2 = BlockStrategy::new(Side::Two, n2, m2, z2.clone());
            gap = dbne_gap(game, model, &s1, &s2, DEFAULT_GAP_GRID)?;
            if gap <= tol {
                return Ok(OracleSolution {
                    s1,
                    s2,
                    gap,
                    iterations: it,
                });
            }
        }
    }
    Err(CoreError::NonConvergence { final_gap: gap })
}

/// Largest unilateral improvement over all (side, type point) pairs.
///
/// A deviation at one type point changes only that point's expected cost, so
/// the best response decouples per type: each block is minimized over a
/// product grid on the action bounds (`grid` points per axis), then refined
/// with a few projected-gradient polish steps from the best candidate.
pub fn dbne_gap(
    game: &GameSpec,
    model: &DiscreteTypeModel,
    s1: &BlockStrategy,
    s2: &BlockStrategy,
    grid: usize,
) -> Result<f64> {
    if grid < 2 {
        return Err(CoreError::Config("deviation grid needs at least 2 points".into()));
    }
    let mut worst = 0.0_f64;
    for l in Side::BOTH {
        let (own, rival) = match l {
            Side::One => (&s1.values, &s2.values),
            Side::Two => (&s2.values, &s1.values),
        };
        let m = game.m(l);
        let set = game.action_set(l);
        let bounds = set.bounds();
        // Shrink the per-axis resolution until the product grid fits.
        let mut axis = grid;
        while axis > 2 && axis.pow(m as u32) > GRID_CANDIDATE_CAP {
            axis -= 1;
        }
        let mut trial = own.clone();
        let mut candidate = vec![0.0; m];
        let mut projected = vec![0.0; m];
        for r in 0..model.n(l) {
            let current =
                expected_cost_blocks(model, game, l, CostSelector::Average, own, rival, r)?;
            let mut best = current;
            let mut best_x = own[r * m..(r + 1) * m].to_vec();
            let eval = |x: &[f64], trial: &mut Vec<f64>| -> Result<f64> {
                trial[r * m..(r + 1) * m].copy_from_slice(x);
                expected_cost_blocks(model, game, l, CostSelector::Average, trial, rival, r)
            };
            // Product grid over the bounding box, projected onto the set.
            let total = axis.pow(m as u32);
            for flat in 0..total {
                let mut rem = flat;
                for k in 0..m {
                    let i = rem % axis;
                    rem /= axis;
                    candidate[k] =
                        bounds[k].lo + bounds[k].len() * i as f64 / (axis - 1) as f64;
                }
                set.project(&candidate, &mut projected);
                let v = eval(&projected, &mut trial)?;
                if v < best {
                    best = v;
                    best_x.copy_from_slice(&projected);
                }
            }
            // Gradient polish from the best grid point with a shrinking step.
            let mut g = vec![0.0; m];
            let scale = bounds.iter().map(|iv| iv.len()).fold(0.0_f64, f64::max);
            trial[r * m..(r + 1) * m].copy_from_slice(&best_x);
            for step_frac in [0.1, 0.01, 1e-3, 1e-4] {
                expected_grad_blocks(
                    model,
                    game,
                    l,
                    CostSelector::Average,
                    &trial,
                    rival,
                    r,
                    &mut g,
                )?;
                for k in 0..m {
                    candidate[k] = best_x[k] - step_frac * scale * g[k];
                }
                set.project(&candidate, &mut projected);
                let v = eval(&projected, &mut trial)?;
                if v < best {
                    best = v;
                    best_x.copy_from_slice(&projected);
                } else {
                    trial[r * m..(r + 1) * m].copy_from_slice(&best_x);
                }
            }
            trial[r * m..(r + 1) * m].copy_from_slice(&own[r * m..(r + 1) * m]);
            worst = worst.max(current - best);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::discretize_types;
    use crate::game::{builtin_rent_seeking, ActionSet, CostFn, GameSpec, Interval};
    use alloc::boxed::Box;
    use approx::assert_abs_diff_eq;

    /// Saddle game a/2 x^2 + b x y - c/2 y^2 with box [-1, 1] actions; the
    /// unconstrained saddle point is the origin.
    fn quadratic_saddle(a: f64, b: f64, c: f64) -> GameSpec {
        GameSpec::new(
            [
                ActionSet::Box(vec![Interval::new(-1.0, 1.0)]),
                ActionSet::Box(vec![Interval::new(-1.0, 1.0)]),
            ],
            [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
            Box::new(|_, _| 1.0),
            [
                vec![Box::new(move |x: &[f64], y: &[f64], _, _| {
                    0.5 * a * x[0] * x[0] + b * x[0] * y[0] - 0.5 * c * y[0] * y[0]
                }) as CostFn],
                vec![Box::new(move |x: &[f64], y: &[f64], _, _| {
                    -(0.5 * a * x[0] * x[0] + b * x[0] * y[0] - 0.5 * c * y[0] * y[0])
                }) as CostFn],
            ],
            [Vec::new(), Vec::new()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn quadratic_saddle_solution_at_origin() {
        let game = quadratic_saddle(0.8, 0.5, 0.6);
        let model = discretize_types(&game, 2, 2, 64).unwrap();
        let sol = solve_dbne_oracle(&game, &model, 2000, 1e-6, 1).unwrap();
        for v in sol.s1.values.iter().chain(&sol.s2.values) {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-4);
        }
        assert!(sol.gap <= 1e-6);
    }

    #[test]
    fn rent_seeking_single_point_equilibrium() {
        // With one type point per side both types sit at the top quantile,
        // so the stationarity condition 2/3 * 1.01 = 1/(12 x) gives the
        // symmetric interior equilibrium x = 1 / (8.08).
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 1, 1, 64).unwrap();
        let sol = solve_dbne_oracle(&game, &model, 5000, 1e-7, 2).unwrap();
        let expected = 1.0 / 8.08;
        assert_abs_diff_eq!(sol.s1.values[0], expected, epsilon = 1e-4);
        assert_abs_diff_eq!(sol.s2.values[0], expected, epsilon = 1e-4);
    }

    #[test]
    fn gap_is_zero_at_equilibrium_and_positive_away() {
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 3, 3, 64).unwrap();
        let sol = solve_dbne_oracle(&game, &model, 5000, 1e-6, 3).unwrap();
        assert!(sol.gap <= 1e-6);
        // Push side 1 to the top of the box: the gap must become visible.
        let bad = BlockStrategy::constant(Side::One, 3, &[1.0]);
        let gap = dbne_gap(&game, &model, &bad, &sol.s2, 101).unwrap();
        assert!(gap > 1e-3, "gap {gap}");
    }

    #[test]
    fn oracle_is_deterministic() {
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 2, 2, 64).unwrap();
        let a = solve_dbne_oracle(&game, &model, 2000, 1e-6, 7).unwrap();
        let b = solve_dbne_oracle(&game, &model, 2000, 1e-6, 7).unwrap();
        assert_eq!(a.s1.values, b.s1.values);
        assert_eq!(a.s2.values, b.s2.values);
    }

    #[test]
    fn nonconvergence_reports_gap() {
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 2, 2, 64).unwrap();
        let err = solve_dbne_oracle(&game, &model, 1, 1e-12, 1).unwrap_err();
        assert!(matches!(err, CoreError::NonConvergence { final_gap } if final_gap > 0.0));
    }
}
