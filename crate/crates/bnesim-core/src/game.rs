//! Continuous-type game between two cooperating subnetworks.
//!
//! A [`GameSpec`] holds the action sets, type intervals, joint type density
//! and per-agent cost evaluators of both subnetworks. The two subnetworks
//! play a constant-sum game: the sum of the two subnetwork costs is the same
//! constant at every action/type profile (zero-sum after shifting).

use crate::error::{CoreError, Result};
use crate::math;
use crate::rng::SplitMix64;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// One of the two subnetworks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::One, Side::Two];

    /// Array index (side 1 -> 0, side 2 -> 1).
    #[inline]
    pub fn idx(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    /// The adversarial subnetwork.
    #[inline]
    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn from_idx(i: usize) -> Side {
        match i {
            0 => Side::One,
            1 => Side::Two,
            _ => panic!("side index out of range: {i}"),
        }
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }
}

/// Projection target for strategies: an axis-aligned box, or a general
/// convex set given by a user-supplied projection map plus a bounding box
/// (the bounding box is used for grid search and random sampling only).
pub enum ActionSet {
    Box(Vec<Interval>),
    Custom {
        bounds: Vec<Interval>,
        project: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    },
}

impl ActionSet {
    pub fn dim(&self) -> usize {
        match self {
            ActionSet::Box(b) => b.len(),
            ActionSet::Custom { bounds, .. } => bounds.len(),
        }
    }

    /// Bounding box of the set (the set itself for boxes).
    pub fn bounds(&self) -> &[Interval] {
        match self {
            ActionSet::Box(b) => b,
            ActionSet::Custom { bounds, .. } => bounds,
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64], out: &mut [f64]) {
        match self {
            ActionSet::Box(b) => {
                for (o, (xi, iv)) in out.iter_mut().zip(x.iter().zip(b)) {
                    *o = iv.clamp(*xi);
                }
            }
            ActionSet::Custom { project, .. } => project(x, out),
        }
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut proj = vec![0.0; x.len()];
        self.project(x, &mut proj);
        math::dist(x, &proj)
    }
}

impl core::fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ActionSet::Box(b) => f.debug_tuple("Box").field(b).finish(),
            ActionSet::Custom { bounds, .. } => {
                f.debug_struct("Custom").field("bounds", bounds).finish()
            }
        }
    }
}

/// Smoothness constants of the game, used only for bound reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzMeta {
    /// `L_{l,j}`: Lipschitz constant of agent costs in action block `j`,
    /// indexed `[side][block]`.
    pub l_action: [[f64; 2]; 2],
    /// Lipschitz constant of agent costs in either type.
    pub l_theta: f64,
    /// Lipschitz constant of the joint density in either type.
    pub l_density: f64,
    /// Strong convexity modulus of the subnetwork costs in their own block.
    pub mu: f64,
}

pub type DensityFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type CostFn = Box<dyn Fn(&[f64], &[f64], f64, f64) -> f64 + Send + Sync>;
pub type GradFn = Box<dyn Fn(&[f64], &[f64], f64, f64, &mut [f64]) + Send + Sync>;

/// Step for the central finite-difference gradient fallback.
const FD_STEP: f64 = 1e-6;

/// Report of [`GameSpec::validate_sum_structure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumStructureReport {
    /// `f_1 + f_2` at the first sampled profile.
    pub c_estimate: f64,
    /// Largest deviation of `f_1 + f_2` from `c_estimate` over all samples.
    pub max_deviation: f64,
}

impl SumStructureReport {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn pass(&self) -> bool {
        self.max_deviation <= Self::TOLERANCE
    }
}

/// The continuous-type two-subnetwork game.
///
/// Immutable after construction; evaluators must be pure, so a spec can be
/// shared by concurrent simulation runs.
pub struct GameSpec {
    n: [usize; 2],
    m: [usize; 2],
    action_set: [ActionSet; 2],
    type_interval: [Interval; 2],
    joint_density: DensityFn,
    costs: [Vec<CostFn>; 2],
    grads: [Vec<Option<GradFn>>; 2],
    lipschitz: Option<LipschitzMeta>,
}

impl core::fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GameSpec")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("action_set", &self.action_set)
            .field("type_interval", &self.type_interval)
            .finish()
    }
}

impl GameSpec {
    /// Builds and validates a game.
    ///
    /// `grads[l][i]` may be `None`; those agents fall back to central finite
    /// differences of their cost. The joint density is checked for
    /// nonnegativity, approximate normalization, and positive marginals on a
    /// coarse sample grid.
    pub fn new(
        action_set: [ActionSet; 2],
        type_interval: [Interval; 2],
        joint_density: DensityFn,
        costs: [Vec<CostFn>; 2],
        mut grads: [Vec<Option<GradFn>>; 2],
        lipschitz: Option<LipschitzMeta>,
    ) -> Result<Self> {
        let n = [costs[0].len(), costs[1].len()];
        let m = [action_set[0].dim(), action_set[1].dim()];
        for l in 0..2 {
            if n[l] == 0 {
                return Err(CoreError::Config(format!("subnetwork {} has no agents", l + 1)));
            }
            if m[l] == 0 {
                return Err(CoreError::Config(format!(
                    "subnetwork {} has zero action dimension",
                    l + 1
                )));
            }
            for iv in action_set[l].bounds() {
                if !iv.is_valid() {
                    return Err(CoreError::AssumptionViolation(format!(
                        "action box of subnetwork {} has an empty or unbounded interval",
                        l + 1
                    )));
                }
            }
            if !type_interval[l].is_valid() || type_interval[l].len() <= 0.0 {
                return Err(CoreError::AssumptionViolation(format!(
                    "type interval of subnetwork {} is empty or unbounded",
                    l + 1
                )));
            }
            if grads[l].is_empty() {
                grads[l] = (0..n[l]).map(|_| None).collect();
            }
            if grads[l].len() != n[l] {
                return Err(CoreError::Config(format!(
                    "subnetwork {}: {} gradients for {} agents",
                    l + 1,
                    grads[l].len(),
                    n[l]
                )));
            }
        }

        let game = Self {
            n,
            m,
            action_set,
            type_interval,
            joint_density,
            costs,
            grads,
            lipschitz,
        };
        game.check_density()?;
        Ok(game)
    }

    /// Coarse sanity check of the density: nonnegative, integrates to about
    /// one, positive marginals at sampled points.
    fn check_density(&self) -> Result<()> {
        const G: usize = 129;
        let total = self.density_integral(G);
        if !(total.is_finite() && math::abs(total - 1.0) < 1e-3) {
            return Err(CoreError::AssumptionViolation(format!(
                "joint density integrates to {total}, expected 1"
            )));
        }
        for l in 0..2 {
            let iv = self.type_interval[l];
            for i in 0..33 {
                let th = iv.lo + iv.len() * i as f64 / 32.0;
                if self.marginal_density(Side::from_idx(l), th, 129) <= 0.0 {
                    return Err(CoreError::AssumptionViolation(format!(
                        "marginal density of subnetwork {} is not positive at theta = {th}",
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Product-trapezoid integral of the joint density over the type
    /// rectangle with `nodes` nodes per axis.
    pub fn density_integral(&self, nodes: usize) -> f64 {
        let [t1, t2] = self.type_interval;
        let (h1, h2) = (
            t1.len() / (nodes - 1) as f64,
            t2.len() / (nodes - 1) as f64,
        );
        let mut total = 0.0;
        for i in 0..nodes {
            let w1 = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            let a = t1.lo + h1 * i as f64;
            for j in 0..nodes {
                let w2 = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
                let b = t2.lo + h2 * j as f64;
                let p = (self.joint_density)(a, b);
                if p < 0.0 {
                    return f64::NAN;
                }
                total += w1 * w2 * p;
            }
        }
        total * h1 * h2
    }

    #[inline]
    pub fn n(&self, l: Side) -> usize {
        self.n[l.idx()]
    }

    #[inline]
    pub fn m(&self, l: Side) -> usize {
        self.m[l.idx()]
    }

    pub fn action_set(&self, l: Side) -> &ActionSet {
        &self.action_set[l.idx()]
    }

    pub fn type_interval(&self, l: Side) -> Interval {
        self.type_interval[l.idx()]
    }

    pub fn density(&self, th1: f64, th2: f64) -> f64 {
        (self.joint_density)(th1, th2)
    }

    pub fn lipschitz(&self) -> Option<&LipschitzMeta> {
        self.lipschitz.as_ref()
    }

    /// Marginal density of side `l`, by trapezoid integration over the
    /// rival's type interval with `nodes` nodes.
    pub fn marginal_density(&self, l: Side, theta: f64, nodes: usize) -> f64 {
        let rival = self.type_interval[l.other().idx()];
        let h = rival.len() / (nodes - 1) as f64;
        let mut total = 0.0;
        for j in 0..nodes {
            let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
            let t = rival.lo + h * j as f64;
            total += w * match l {
                Side::One => (self.joint_density)(theta, t),
                Side::Two => (self.joint_density)(t, theta),
            };
        }
        total * h
    }

    /// Cost of agent `(l, i)` at the given action/type profile.
    pub fn agent_cost(&self, l: Side, i: usize, x1: &[f64], x2: &[f64], th1: f64, th2: f64) -> Result<f64> {
        let v = (self.costs[l.idx()][i])(x1, x2, th1, th2);
        if !v.is_finite() {
            return Err(CoreError::NonFiniteCost {
                side: l,
                agent: i,
                detail: format!("cost at theta=({th1}, {th2})"),
            });
        }
        Ok(v)
    }

    /// Gradient of agent `(l, i)`'s cost in its own action block.
    ///
    /// Uses the supplied analytic gradient when present, otherwise central
    /// finite differences with step `1e-6`.
    pub fn agent_grad(
        &self,
        l: Side,
        i: usize,
        x1: &[f64],
        x2: &[f64],
        th1: f64,
        th2: f64,
        out: &mut [f64],
    ) -> Result<()> {
        debug_assert_eq!(out.len(), self.m[l.idx()]);
        if let Some(g) = &self.grads[l.idx()][i] {
            g(x1, x2, th1, th2, out);
        } else {
            let own: Vec<f64> = match l {
                Side::One => x1.to_vec(),
                Side::Two => x2.to_vec(),
            };
            let mut lo = own.clone();
            let mut hi = own.clone();
            for k in 0..own.len() {
                lo[k] = own[k] - FD_STEP;
                hi[k] = own[k] + FD_STEP;
                let (a, b) = match l {
                    Side::One => (
                        (self.costs[0][i])(&hi, x2, th1, th2),
                        (self.costs[0][i])(&lo, x2, th1, th2),
                    ),
                    Side::Two => (
                        (self.costs[1][i])(x1, &hi, th1, th2),
                        (self.costs[1][i])(x1, &lo, th1, th2),
                    ),
                };
                out[k] = (a - b) / (2.0 * FD_STEP);
                lo[k] = own[k];
                hi[k] = own[k];
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteCost {
                side: l,
                agent: i,
                detail: format!("gradient at theta=({th1}, {th2})"),
            });
        }
        Ok(())
    }

    /// Subnetwork cost `f_l`: the arithmetic mean of side `l`'s agent costs.
    pub fn subnetwork_cost(&self, l: Side, x1: &[f64], x2: &[f64], th1: f64, th2: f64) -> Result<f64> {
        let n = self.n[l.idx()];
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.agent_cost(l, i, x1, x2, th1, th2)?;
        }
        Ok(sum / n as f64)
    }

    /// Gradient of `f_l` in side `l`'s own action block (mean of agent
    /// gradients).
    pub fn subnetwork_grad(&self, l: Side, x1: &[f64], x2: &[f64], th1: f64, th2: f64, out: &mut [f64]) -> Result<()> {
        let n = self.n[l.idx()];
        out.fill(0.0);
        let mut g = vec![0.0; out.len()];
        for i in 0..n {
            self.agent_grad(l, i, x1, x2, th1, th2, &mut g)?;
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += gi / n as f64;
            }
        }
        Ok(())
    }

    /// Sampled check that `f_1 + f_2` is constant across action/type
    /// profiles.
    ///
    /// A zero-sum game gives constant 0; any other constant is strategically
    /// equivalent after shifting, so both pass.
    pub fn validate_sum_structure(&self, sample_count: usize, seed: u64) -> Result<SumStructureReport> {
        if sample_count < 2 {
            return Err(CoreError::Config("sample_count must be at least 2".into()));
        }
        let mut rng = SplitMix64::new(seed);
        let mut c_estimate = 0.0;
        let mut max_deviation = 0.0_f64;
        let mut x1 = vec![0.0; self.m[0]];
        let mut x2 = vec![0.0; self.m[1]];
        for s in 0..sample_count {
            self.sample_action(Side::One, &mut rng, &mut x1);
            self.sample_action(Side::Two, &mut rng, &mut x2);
            let th1 = rng.uniform(self.type_interval[0].lo, self.type_interval[0].hi);
            let th2 = rng.uniform(self.type_interval[1].lo, self.type_interval[1].hi);
            let total = self.subnetwork_cost(Side::One, &x1, &x2, th1, th2)?
                + self.subnetwork_cost(Side::Two, &x1, &x2, th1, th2)?;
            if s == 0 {
                c_estimate = total;
            } else {
                max_deviation = max_deviation.max(math::abs(total - c_estimate));
            }
        }
        Ok(SumStructureReport {
            c_estimate,
            max_deviation,
        })
    }

    /// Uniform sample from the action set of side `l` (sampled in the
    /// bounding box, then projected).
    pub fn sample_action(&self, l: Side, rng: &mut SplitMix64, out: &mut [f64]) {
        let set = &self.action_set[l.idx()];
        let mut raw = vec![0.0; out.len()];
        for (r, iv) in raw.iter_mut().zip(set.bounds()) {
            *r = rng.uniform(iv.lo, iv.hi);
        }
        set.project(&raw, out);
    }
}

/// The symmetric rent-seeking example: three agents per subnetwork, scalar
/// actions in `[0.1, 1]`, independent uniform types on `[0.01, 1.01]`, and
/// the sum `f_1 + f_2` constant at `-1/3`.
pub fn builtin_rent_seeking() -> GameSpec {
    rent_seeking_game(
        [Interval::new(0.1, 1.0), Interval::new(0.1, 1.0)],
        [Interval::new(0.01, 1.01), Interval::new(0.01, 1.01)],
    )
    .expect("builtin game is well formed")
}

/// Rent-seeking cost family over caller-chosen scalar action intervals and
/// independent uniform types. The action interval must stay positive so the
/// prize-share denominators never vanish.
pub fn rent_seeking_game(actions: [Interval; 2], types: [Interval; 2]) -> Result<GameSpec> {
    fn own_rival(l: Side, x1: &[f64], x2: &[f64]) -> (f64, f64) {
        match l {
            Side::One => (x1[0], x2[0]),
            Side::Two => (x2[0], x1[0]),
        }
    }

    // Agents 1 and 2 carry the effort-difference term with prize shares 1/6
    // and 1/2; agent 3 only competes for a 1/3 share.
    fn cost(l: Side, share: f64, effort: bool, x1: &[f64], x2: &[f64], th1: f64, th2: f64) -> f64 {
        let (own, rival) = own_rival(l, x1, x2);
        let effort_term = if effort {
            (own - rival) * (th1 + th2) / 2.0
        } else {
            0.0
        };
        effort_term - own / (share * (own + rival))
    }

    fn grad(l: Side, share: f64, effort: bool, x1: &[f64], x2: &[f64], th1: f64, th2: f64) -> f64 {
        let (own, rival) = own_rival(l, x1, x2);
        let effort_term = if effort { (th1 + th2) / 2.0 } else { 0.0 };
        effort_term - rival / (share * (own + rival) * (own + rival))
    }

    let mut costs: [Vec<CostFn>; 2] = [Vec::new(), Vec::new()];
    let mut grads: [Vec<Option<GradFn>>; 2] = [Vec::new(), Vec::new()];
    for l in Side::BOTH {
        // (share divisor, has effort term) per agent
        for (share, effort) in [(6.0, true), (2.0, true), (3.0, false)] {
            costs[l.idx()].push(Box::new(move |x1: &[f64], x2: &[f64], t1, t2| {
                cost(l, share, effort, x1, x2, t1, t2)
            }));
            grads[l.idx()].push(Some(Box::new(
                move |x1: &[f64], x2: &[f64], t1, t2, out: &mut [f64]| {
                    out[0] = grad(l, share, effort, x1, x2, t1, t2);
                },
            )));
        }
    }

    for iv in actions {
        if iv.lo <= 0.0 {
            return Err(CoreError::Config(
                "rent-seeking actions must be strictly positive".into(),
            ));
        }
    }
    let area = types[0].len() * types[1].len();
    GameSpec::new(
        [
            ActionSet::Box(vec![actions[0]]),
            ActionSet::Box(vec![actions[1]]),
        ],
        types,
        // Quadrature only evaluates inside the rectangle, so the density is
        // simply the constant 1/area.
        Box::new(move |_t1, _t2| 1.0 / area),
        costs,
        grads,
        None,
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rent_seeking_cost_at_center() {
        let game = builtin_rent_seeking();
        let f1 = game
            .subnetwork_cost(Side::One, &[0.5], &[0.5], 0.5, 0.5)
            .unwrap();
        assert_abs_diff_eq!(f1, -1.0 / 6.0, epsilon = 1e-12);
        let f2 = game
            .subnetwork_cost(Side::Two, &[0.5], &[0.5], 0.5, 0.5)
            .unwrap();
        assert_abs_diff_eq!(f2, -1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn rent_seeking_is_constant_sum() {
        let game = builtin_rent_seeking();
        let report = game.validate_sum_structure(10_000, 11).unwrap();
        assert!(report.pass(), "deviation {}", report.max_deviation);
        assert_abs_diff_eq!(report.c_estimate, -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_costs_give_zero() {
        let game = constant_game(0.0);
        assert_eq!(
            game.subnetwork_cost(Side::One, &[0.3], &[0.4], 0.2, 0.8)
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn antisymmetric_pair_is_zero_sum() {
        let game = two_agent_game(
            Box::new(|x1: &[f64], x2: &[f64], _, _| x1[0] - x2[0]),
            Box::new(|x1: &[f64], x2: &[f64], _, _| x2[0] - x1[0]),
        );
        let report = game.validate_sum_structure(100, 3).unwrap();
        assert!(report.pass());
        assert_abs_diff_eq!(report.c_estimate, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn varying_sum_fails_validation() {
        let game = two_agent_game(
            Box::new(|x1: &[f64], _: &[f64], _, _| x1[0] * x1[0]),
            Box::new(|_: &[f64], _: &[f64], _, _| 0.0),
        );
        let report = game.validate_sum_structure(100, 3).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn builtin_gradient_example() {
        let game = builtin_rent_seeking();
        let mut g = [0.0];
        game.agent_grad(Side::One, 2, &[0.5], &[0.5], 0.3, 0.9, &mut g)
            .unwrap();
        assert_abs_diff_eq!(g[0], -1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn finite_difference_fallback_matches_analytic() {
        let game = builtin_rent_seeking();
        // Same game without analytic gradients.
        let fd_game = builtin_without_grads();
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let x1 = [rng.uniform(0.15, 0.95)];
            let x2 = [rng.uniform(0.15, 0.95)];
            let t1 = rng.uniform(0.01, 1.01);
            let t2 = rng.uniform(0.01, 1.01);
            for l in Side::BOTH {
                for i in 0..3 {
                    let mut ga = [0.0];
                    let mut gf = [0.0];
                    game.agent_grad(l, i, &x1, &x2, t1, t2, &mut ga).unwrap();
                    fd_game.agent_grad(l, i, &x1, &x2, t1, t2, &mut gf).unwrap();
                    assert_abs_diff_eq!(ga[0], gf[0], epsilon = 1e-5 * (1.0 + ga[0].abs()));
                }
            }
        }
    }

    #[test]
    fn non_finite_cost_is_reported() {
        let game = two_agent_game(
            Box::new(|x1: &[f64], x2: &[f64], _, _| x1[0] / (x2[0] - x2[0])),
            Box::new(|_: &[f64], _: &[f64], _, _| 0.0),
        );
        let err = game
            .subnetwork_cost(Side::One, &[0.5], &[0.5], 0.5, 0.5)
            .unwrap_err();
        assert!(matches!(err, CoreError::NonFiniteCost { side: Side::One, agent: 0, .. }));
    }

    #[test]
    fn unnormalized_density_rejected() {
        let result = GameSpec::new(
            [
                ActionSet::Box(vec![Interval::new(0.0, 1.0)]),
                ActionSet::Box(vec![Interval::new(0.0, 1.0)]),
            ],
            [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
            Box::new(|_, _| 2.0),
            [
                vec![Box::new(|_: &[f64], _: &[f64], _, _| 0.0) as CostFn],
                vec![Box::new(|_: &[f64], _: &[f64], _, _| 0.0) as CostFn],
            ],
            [Vec::new(), Vec::new()],
            None,
        );
        assert!(matches!(result, Err(CoreError::AssumptionViolation(_))));
    }

    pub(crate) fn two_agent_game(c1: CostFn, c2: CostFn) -> GameSpec {
        GameSpec::new(
            [
                ActionSet::Box(vec![Interval::new(0.0, 1.0)]),
                ActionSet::Box(vec![Interval::new(0.0, 1.0)]),
            ],
            [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
            Box::new(|_, _| 1.0),
            [vec![c1], vec![c2]],
            [Vec::new(), Vec::new()],
            None,
        )
        .unwrap()
    }

    pub(crate) fn constant_game(c: f64) -> GameSpec {
        two_agent_game(
            Box::new(move |_: &[f64], _: &[f64], _, _| c),
            Box::new(move |_: &[f64], _: &[f64], _, _| -c),
        )
    }

    fn builtin_without_grads() -> GameSpec {
        let reference = builtin_rent_seeking();
        let mut costs: [Vec<CostFn>; 2] = [Vec::new(), Vec::new()];
        for l in Side::BOTH {
            for (share, effort) in [(6.0f64, true), (2.0, true), (3.0, false)] {
                costs[l.idx()].push(Box::new(move |x1: &[f64], x2: &[f64], t1: f64, t2: f64| {
                    let (own, rival) = match l {
                        Side::One => (x1[0], x2[0]),
                        Side::Two => (x2[0], x1[0]),
                    };
                    let e = if effort { (own - rival) * (t1 + t2) / 2.0 } else { 0.0 };
                    e - own / (share * (own + rival))
                }));
            }
        }
        let theta = reference.type_interval(Side::One);
        let area = theta.len() * theta.len();
        GameSpec::new(
            [
                ActionSet::Box(vec![Interval::new(0.1, 1.0)]),
                ActionSet::Box(vec![Interval::new(0.1, 1.0)]),
            ],
            [theta, theta],
            Box::new(move |_, _| 1.0 / area),
            costs,
            [Vec::new(), Vec::new()],
            None,
        )
        .unwrap()
    }
}
