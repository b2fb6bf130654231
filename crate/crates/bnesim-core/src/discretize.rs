//! Quantile discretization of the type space.
//!
//! Types of side `l` are collapsed to `N_l` points chosen so that every cell
//! `(theta^{i-1}, theta^i]` carries marginal mass `1/N_l`; the points are the
//! marginal quantiles, found by bisection on a numerically integrated CDF.
//! The joint, marginal, and conditional mass tables of the discretized game
//! are produced by per-cell product-trapezoid quadrature.

use crate::error::{CoreError, Result};
use crate::game::{GameSpec, Side};
use crate::math;
use crate::strategy::BlockStrategy;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Bisection tolerance (in theta) for quantile inversion.
const BISECT_TOL: f64 = 1e-10;

/// Discrete type points and mass tables of the discretized game.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTypeModel {
    /// Ascending type points per side; the last point is the upper end of
    /// the type interval.
    pub points: [Vec<f64>; 2],
    /// Cell boundaries per side (`N_l + 1` values, starting at the lower
    /// end of the type interval).
    pub cells: [Vec<f64>; 2],
    /// Joint mass table, row-major `N_1 x N_2`.
    pub joint_mass: Vec<f64>,
    /// Marginal mass per side.
    pub marginal_mass: [Vec<f64>; 2],
    /// Conditional mass of the rival's type given own type, row-major
    /// `N_l x N_{3-l}` per side.
    pub conditional: [Vec<f64>; 2],
}

/// Which cost enters a discrete expectation: the subnetwork average `f_l`
/// or a single agent's `f_{l,i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostSelector {
    Average,
    Agent(usize),
}

impl DiscreteTypeModel {
    #[inline]
    pub fn n(&self, l: Side) -> usize {
        self.points[l.idx()].len()
    }

    #[inline]
    pub fn joint(&self, i: usize, j: usize) -> f64 {
        self.joint_mass[i * self.points[1].len() + j]
    }

    /// `P(theta_{3-l} = point j | theta_l = point r)`.
    #[inline]
    pub fn cond(&self, l: Side, r: usize, j: usize) -> f64 {
        self.conditional[l.idx()][r * self.points[l.other().idx()].len() + j]
    }
}

/// Builds the discretized type model with `n_points` quantile points per
/// side and `quad_res` quadrature nodes per axis per cell.
pub fn discretize_types(
    game: &GameSpec,
    n1: usize,
    n2: usize,
    quad_res: usize,
) -> Result<DiscreteTypeModel> {
    if n1 == 0 || n2 == 0 {
        return Err(CoreError::Config("point counts must be positive".into()));
    }
    if quad_res < 2 {
        return Err(CoreError::Config("quad_res must be at least 2".into()));
    }
    let n = [n1, n2];
    let mut points: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut cells: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for l in Side::BOTH {
        let (p, c) = marginal_quantiles(game, l, n[l.idx()], quad_res)?;
        points[l.idx()] = p;
        cells[l.idx()] = c;
    }

    // Joint mass per cell by product trapezoid.
    let mut joint = vec![0.0; n1 * n2];
    for i in 0..n1 {
        let (a0, a1) = (cells[0][i], cells[0][i + 1]);
        for j in 0..n2 {
            let (b0, b1) = (cells[1][j], cells[1][j + 1]);
            joint[i * n2 + j] = trapezoid_2d(game, a0, a1, b0, b1, quad_res);
        }
    }
    let total: f64 = joint.iter().sum();
    if math::abs(total - 1.0) > 1e-8 {
        return Err(CoreError::QuadratureResolution(format!(
            "joint mass sums to {total}; raise quad_res"
        )));
    }

    let mut marginal: [Vec<f64>; 2] = [vec![0.0; n1], vec![0.0; n2]];
    for i in 0..n1 {
        for j in 0..n2 {
            marginal[0][i] += joint[i * n2 + j];
            marginal[1][j] += joint[i * n2 + j];
        }
    }
    for l in 0..2 {
        for (i, &mass) in marginal[l].iter().enumerate() {
            if math::abs(mass - 1.0 / n[l] as f64) > 1e-6 {
                return Err(CoreError::QuadratureResolution(format!(
                    "marginal mass of cell {i} on side {} is {mass}, expected {}",
                    l + 1,
                    1.0 / n[l] as f64
                )));
            }
        }
    }

    let mut conditional: [Vec<f64>; 2] = [vec![0.0; n1 * n2], vec![0.0; n2 * n1]];
    for i in 0..n1 {
        for j in 0..n2 {
            conditional[0][i * n2 + j] = joint[i * n2 + j] / marginal[0][i];
            conditional[1][j * n1 + i] = joint[i * n2 + j] / marginal[1][j];
        }
    }

    Ok(DiscreteTypeModel {
        points,
        cells,
        joint_mass: joint,
        marginal_mass: marginal,
        conditional,
    })
}

/// Quantile points of side `l`'s marginal: theta with CDF(theta) = i/N.
fn marginal_quantiles(
    game: &GameSpec,
    l: Side,
    n: usize,
    quad_res: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let iv = game.type_interval(l);
    // Fine grid for the marginal density; the CDF is integrated exactly
    // under the piecewise-linear interpolant, which keeps it monotone.
    let segments = 4096.max(8 * n);
    let rival_nodes = 4 * quad_res + 1;
    let h = iv.len() / segments as f64;
    let dens: Vec<f64> = (0..=segments)
        .map(|k| game.marginal_density(l, iv.lo + h * k as f64, rival_nodes))
        .collect();
    if let Some(k) = dens.iter().position(|&p| p <= 0.0) {
        return Err(CoreError::AssumptionViolation(format!(
            "marginal density of side {:?} is not positive at theta = {}",
            l,
            iv.lo + h * k as f64
        )));
    }
    let mut cum = vec![0.0; segments + 1];
    for k in 0..segments {
        cum[k + 1] = cum[k] + 0.5 * (dens[k] + dens[k + 1]) * h;
    }
    let total = cum[segments];

    let cdf = |theta: f64| -> f64 {
        let s = ((theta - iv.lo) / h).clamp(0.0, segments as f64 - 1e-12);
        let k = math::floor(s) as usize;
        let t = theta - (iv.lo + h * k as f64);
        let slope = (dens[k + 1] - dens[k]) / h;
        cum[k] + dens[k] * t + 0.5 * slope * t * t
    };

    let mut points = Vec::with_capacity(n);
    let mut lo = iv.lo;
    for i in 1..=n {
        if i == n {
            points.push(iv.hi);
            break;
        }
        let target = total * i as f64 / n as f64;
        let mut a = lo;
        let mut b = iv.hi;
        if cdf(a) > target || cdf(b) < target {
            return Err(CoreError::QuadratureResolution(format!(
                "quantile {i}/{n} not bracketed; raise quad_res"
            )));
        }
        while b - a > BISECT_TOL {
            let mid = 0.5 * (a + b);
            if cdf(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let p = 0.5 * (a + b);
        points.push(p);
        lo = p;
    }
    let mut cells = Vec::with_capacity(n + 1);
    cells.push(iv.lo);
    cells.extend_from_slice(&points);
    Ok((points, cells))
}

/// Product-trapezoid integral of the joint density over one cell.
fn trapezoid_2d(game: &GameSpec, a0: f64, a1: f64, b0: f64, b1: f64, nodes: usize) -> f64 {
    let h1 = (a1 - a0) / (nodes - 1) as f64;
    let h2 = (b1 - b0) / (nodes - 1) as f64;
    let mut total = 0.0;
    for i in 0..nodes {
        let w1 = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
        let t1 = a0 + h1 * i as f64;
        for j in 0..nodes {
            let w2 = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
            total += w1 * w2 * game.density(t1, b0 + h2 * j as f64);
        }
    }
    total * h1 * h2
}

/// Discrete expected cost of side `l` at its `r`-th type point, with both
/// strategies given as stacked block vectors.
///
/// `own` has side `l`'s layout, `rival` the other side's. The expectation
/// is the conditional-mass-weighted sum over the rival's type points.
pub fn expected_cost_blocks(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    l: Side,
    selector: CostSelector,
    own: &[f64],
    rival: &[f64],
    r: usize,
) -> Result<f64> {
    let (n_own, n_riv) = (model.n(l), model.n(l.other()));
    let (m_own, m_riv) = (game.m(l), game.m(l.other()));
    if r >= n_own || own.len() != n_own * m_own || rival.len() != n_riv * m_riv {
        return Err(CoreError::Domain(format!(
            "type index {r} or strategy dimensions out of range"
        )));
    }
    let own_block = &own[r * m_own..(r + 1) * m_own];
    let th_own = model.points[l.idx()][r];
    let mut total = 0.0;
    for j in 0..n_riv {
        let w = model.cond(l, r, j);
        let riv_block = &rival[j * m_riv..(j + 1) * m_riv];
        let th_riv = model.points[l.other().idx()][j];
        let (x1, x2, th1, th2) = match l {
            Side::One => (own_block, riv_block, th_own, th_riv),
            Side::Two => (riv_block, own_block, th_riv, th_own),
        };
        total += w * match selector {
            CostSelector::Average => game.subnetwork_cost(l, x1, x2, th1, th2)?,
            CostSelector::Agent(i) => game.agent_cost(l, i, x1, x2, th1, th2)?,
        };
    }
    Ok(total)
}

/// Gradient of [`expected_cost_blocks`] in the own action block `r`.
pub fn expected_grad_blocks(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    l: Side,
    selector: CostSelector,
    own: &[f64],
    rival: &[f64],
    r: usize,
    out: &mut [f64],
) -> Result<()> {
    let (n_own, n_riv) = (model.n(l), model.n(l.other()));
    let (m_own, m_riv) = (game.m(l), game.m(l.other()));
    if r >= n_own || own.len() != n_own * m_own || rival.len() != n_riv * m_riv {
        return Err(CoreError::Domain(format!(
            "type index {r} or strategy dimensions out of range"
        )));
    }
    let own_block = &own[r * m_own..(r + 1) * m_own];
    let th_own = model.points[l.idx()][r];
    out.fill(0.0);
    let mut g = vec![0.0; m_own];
    for j in 0..n_riv {
        let w = model.cond(l, r, j);
        let riv_block = &rival[j * m_riv..(j + 1) * m_riv];
        let th_riv = model.points[l.other().idx()][j];
        let (x1, x2, th1, th2) = match l {
            Side::One => (own_block, riv_block, th_own, th_riv),
            Side::Two => (riv_block, own_block, th_riv, th_own),
        };
        match selector {
            CostSelector::Average => game.subnetwork_grad(l, x1, x2, th1, th2, &mut g)?,
            CostSelector::Agent(i) => game.agent_grad(l, i, x1, x2, th1, th2, &mut g)?,
        }
        for (o, gi) in out.iter_mut().zip(&g) {
            *o += w * gi;
        }
    }
    Ok(())
}

/// Discrete expected cost with strategies as [`BlockStrategy`] values.
pub fn discrete_expected_cost(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    l: Side,
    selector: CostSelector,
    s1: &BlockStrategy,
    s2: &BlockStrategy,
    r: usize,
) -> Result<f64> {
    let (own, rival) = match l {
        Side::One => (&s1.values, &s2.values),
        Side::Two => (&s2.values, &s1.values),
    };
    expected_cost_blocks(model, game, l, selector, own, rival, r)
}

/// Game value from side 1's perspective: the joint-mass-weighted expectation
/// of `f_1` over all type pairs.
pub fn expected_game_value(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    s1: &BlockStrategy,
    s2: &BlockStrategy,
) -> Result<f64> {
    let (n1, n2) = (model.n(Side::One), model.n(Side::Two));
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            total += model.joint(i, j)
                * game.subnetwork_cost(
                    Side::One,
                    s1.block(i),
                    s2.block(j),
                    model.points[0][i],
                    model.points[1][j],
                )?;
        }
    }
    Ok(total)
}

/// Extends a discrete strategy to a continuous type: returns the block of
/// the cell `(theta^{i-1}, theta^i]` containing `theta`; the lower end of
/// the type interval maps to the first block.
pub fn extend_strategy<'a>(
    model: &DiscreteTypeModel,
    s: &'a BlockStrategy,
    theta: f64,
) -> Result<&'a [f64]> {
    let cells = &model.cells[s.side.idx()];
    let n = cells.len() - 1;
    if theta < cells[0] || theta > cells[n] {
        return Err(CoreError::Domain(format!(
            "theta = {theta} outside the type interval [{}, {}]",
            cells[0], cells[n]
        )));
    }
    // First cell whose right boundary is >= theta; left-open/right-closed
    // cells, with the lower endpoint assigned to cell 1.
    let idx = cells[1..n].partition_point(|&c| c < theta);
    Ok(s.block(idx))
}
