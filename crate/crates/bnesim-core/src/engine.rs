//! Distributed surplus-based subgradient runtime.
//!
//! Each agent holds a strategy estimate `sigma`, a surplus vector `s` of the
//! same dimension, and a hold-last estimate `zeta` of the rival subnetwork's
//! average strategy. Every tick the agents exchange sparsified vectors over
//! the current schedule frame and mix them; once per effective window the
//! surplus correction and a penalized subgradient step are applied, both
//! referencing the state snapshot taken at the window start.
//!
//! The penalty replaces projection: the action-set constraint enters the
//! cost as `E * dist(x, X)`, whose subgradient is the unit outward vector
//! scaled by `E`, so iterates are pulled back without ever projecting the
//! consensus dynamics.

use crate::comm::{selected_entries, BYTES_PER_ENTRY};
use crate::discretize::{expected_grad_blocks, CostSelector, DiscreteTypeModel};
use crate::error::{CoreError, Result};
use crate::game::{ActionSet, GameSpec, Side};
use crate::math;
use crate::network::NetworkSchedule;
use crate::strategy::BlockStrategy;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Stepsize sequence `alpha(q)` over window index `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizePolicy {
    /// `a0 / (q + q0)^p` with `p` in `(0.5, 1]`: square-summable but not
    /// summable, the convergent default (`a0 = 1`, `q0 = 1`, `p = 0.75`).
    PowerLaw { a0: f64, q0: f64, p: f64 },
    /// `a0 / sqrt(q + 1)`: the rate-analysis stepsize; not square-summable,
    /// used for convergence-rate probes.
    InverseSqrt { a0: f64 },
}

impl StepsizePolicy {
    pub fn alpha(&self, q: u64) -> f64 {
        match *self {
            StepsizePolicy::PowerLaw { a0, q0, p } => a0 / math::powf(q as f64 + q0, p),
            StepsizePolicy::InverseSqrt { a0 } => a0 / math::sqrt((q + 1) as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepsizePolicy::PowerLaw { a0, q0, p } => {
                a0 > 0.0 && q0 > 0.0 && p > 0.5 && p <= 1.0
            }
            StepsizePolicy::InverseSqrt { a0 } => a0 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(CoreError::Config(format!("invalid stepsize {self:?}")))
        }
    }
}

impl Default for StepsizePolicy {
    fn default() -> Self {
        StepsizePolicy::PowerLaw {
            a0: 1.0,
            q0: 1.0,
            p: 0.75,
        }
    }
}

/// How agent states start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPolicy {
    /// Strategies at the initial action, surpluses at zero.
    ZeroSurplus,
    /// Strategies and surpluses both at the initial action, matching the
    /// textbook initialization of surplus-based schemes.
    InitialSurplus,
}

/// Engine parameters.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Entries transmitted per packet, per side.
    pub d: [usize; 2],
    /// Surplus recovery gain; must lie in `(0, 1)`, and below the spectral
    /// bound of the window mixing product for guaranteed convergence.
    pub eta: f64,
    pub stepsize: StepsizePolicy,
    /// Penalty weight `E_l` per side; must exceed the own-block Lipschitz
    /// constant of the costs.
    pub penalty: [f64; 2],
    /// Use the literal receiver-normalized surplus matrix instead of the
    /// mass-conserving column-stochastic one.
    pub literal_b: bool,
    pub init: InitPolicy,
    /// Initial action per side; defaults to the action-box midpoint.
    pub init_action: [Option<Vec<f64>>; 2],
    /// Absolute state bound beyond which the run is declared divergent.
    pub divergence_limit: f64,
}

impl EngineConfig {
    pub fn new(d: [usize; 2], eta: f64, stepsize: StepsizePolicy, penalty: [f64; 2]) -> Self {
        Self {
            d,
            eta,
            stepsize,
            penalty,
            literal_b: false,
            init: InitPolicy::ZeroSurplus,
            init_action: [None, None],
            divergence_limit: 1e9,
        }
    }
}

/// One transmitted packet, reported through [`Engine::tick_traced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketEvent {
    /// 1-based tick index, matching the sparsifier schedule.
    pub tick: u64,
    /// Side of the sender.
    pub side: Side,
    pub from: usize,
    pub to: usize,
    /// Entries carried by the packet.
    pub d: usize,
    /// Index of the first selected entry.
    pub first_index: usize,
}

/// Per-window snapshot of metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub tick: u64,
    /// Largest distance of any agent's strategy estimate from the side's
    /// average state.
    pub consensus: [f64; 2],
    /// Largest surplus norm of any agent.
    pub surplus: [f64; 2],
    pub packets: u64,
    pub bytes: u64,
}

/// Distance penalty `E * dist(x, X)` enforcing the action set.
pub fn penalty(set: &ActionSet, e: f64, x: &[f64]) -> f64 {
    e * set.distance(x)
}

/// Subgradient of the distance penalty: the unit outward vector scaled by
/// `E`, or zero on and inside the set.
pub fn penalty_subgrad(set: &ActionSet, e: f64, x: &[f64], out: &mut [f64]) {
    let mut proj = vec![0.0; x.len()];
    set.project(x, &mut proj);
    let dist = math::dist(x, &proj);
    if dist == 0.0 {
        out.fill(0.0);
    } else {
        for (o, (xi, pi)) in out.iter_mut().zip(x.iter().zip(&proj)) {
            *o = e * (xi - pi) / dist;
        }
    }
}

/// Penalized subgradient of agent `(l, i)`'s expected cost at its own state,
/// with the rival strategy replaced by the agent's estimate `zeta`.
///
/// Block `r` of the result is `(w_r + h_r) / N_l`, where `w_r` is the own
/// gradient of the agent's expected cost at type point `r` and `h_r` the
/// penalty subgradient at that block.
pub fn agent_subgradient(
    model: &DiscreteTypeModel,
    game: &GameSpec,
    l: Side,
    agent: usize,
    sigma: &[f64],
    zeta: &[f64],
    penalty_weight: f64,
    out: &mut [f64],
) -> Result<()> {
    let n = model.n(l);
    let m = game.m(l);
    let set = game.action_set(l);
    let mut w = vec![0.0; m];
    let mut h = vec![0.0; m];
    for r in 0..n {
        expected_grad_blocks(
            model,
            game,
            l,
            CostSelector::Agent(agent),
            sigma,
            zeta,
            r,
            &mut w,
        )?;
        penalty_subgrad(set, penalty_weight, &sigma[r * m..(r + 1) * m], &mut h);
        for k in 0..m {
            out[r * m + k] = (w[k] + h[k]) / n as f64;
        }
    }
    Ok(())
}

/// The distributed runtime over one game, type model, and schedule.
pub struct Engine<'a> {
    game: &'a GameSpec,
    model: &'a DiscreteTypeModel,
    schedule: &'a NetworkSchedule,
    cfg: EngineConfig,
    dims: [usize; 2],
    n_agents: [usize; 2],
    r_window: usize,
    s_window: usize,
    /// Per side, per agent: strategy estimate, surplus, rival estimate.
    sigma: [Vec<Vec<f64>>; 2],
    surplus: [Vec<Vec<f64>>; 2],
    zeta: [Vec<Vec<f64>>; 2],
    sigma_hat: [Vec<Vec<f64>>; 2],
    snap_sigma: [Vec<Vec<f64>>; 2],
    snap_surplus: [Vec<Vec<f64>>; 2],
    snap_grad: [Vec<Vec<f64>>; 2],
    tick: u64,
    packets: u64,
    bytes: u64,
}

impl<'a> Engine<'a> {
    pub fn new(
        game: &'a GameSpec,
        model: &'a DiscreteTypeModel,
        schedule: &'a NetworkSchedule,
        cfg: EngineConfig,
    ) -> Result<Self> {
        let dims = [
            model.n(Side::One) * game.m(Side::One),
            model.n(Side::Two) * game.m(Side::Two),
        ];
        let n_agents = [schedule.n(0), schedule.n(1)];
        for l in 0..2 {
            if n_agents[l] != game.n(Side::from_idx(l)) {
                return Err(CoreError::Config(format!(
                    "schedule has {} agents on side {} but the game has {}",
                    n_agents[l],
                    l + 1,
                    game.n(Side::from_idx(l))
                )));
            }
            if cfg.d[l] == 0 || cfg.d[l] > dims[l] {
                return Err(CoreError::Config(format!(
                    "side {}: d = {} out of range for dimension {}",
                    l + 1,
                    cfg.d[l],
                    dims[l]
                )));
            }
            if cfg.penalty[l] <= 0.0 {
                return Err(CoreError::Config("penalty weights must be positive".into()));
            }
            if let Some(x0) = &cfg.init_action[l] {
                if x0.len() != game.m(Side::from_idx(l)) {
                    return Err(CoreError::Config(format!(
                        "initial action of side {} has wrong dimension",
                        l + 1
                    )));
                }
            }
        }
        if !(cfg.eta > 0.0 && cfg.eta < 1.0) {
            return Err(CoreError::Config(format!(
                "eta = {} outside (0, 1)",
                cfg.eta
            )));
        }
        cfg.stepsize.validate()?;
        if let Some(meta) = game.lipschitz() {
            for l in 0..2 {
                if cfg.penalty[l] <= meta.l_action[l][l] {
                    return Err(CoreError::Config(format!(
                        "penalty weight {} of side {} does not exceed the own-block cost Lipschitz constant {}",
                        cfg.penalty[l],
                        l + 1,
                        meta.l_action[l][l]
                    )));
                }
            }
        }
        let (r_window, s_window) =
            crate::comm::effective_windows(schedule.r0, schedule.s0, dims, cfg.d);

        let mut sigma: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        let mut surplus: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        let mut zeta: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for l in 0..2 {
            let side = Side::from_idx(l);
            let m = game.m(side);
            let x0: Vec<f64> = match &cfg.init_action[l] {
                Some(x) => x.clone(),
                None => game
                    .action_set(side)
                    .bounds()
                    .iter()
                    .map(|iv| 0.5 * (iv.lo + iv.hi))
                    .collect(),
            };
            let mut start = vec![0.0; dims[l]];
            for block in start.chunks_mut(m) {
                block.copy_from_slice(&x0);
            }
            let s0 = match cfg.init {
                InitPolicy::ZeroSurplus => vec![0.0; dims[l]],
                InitPolicy::InitialSurplus => start.clone(),
            };
            sigma[l] = vec![start.clone(); n_agents[l]];
            surplus[l] = vec![s0; n_agents[l]];
            // The rival estimate starts at the rival's initial strategy.
            zeta[1 - l] = Vec::new();
        }
        for l in 0..2 {
            let rival_start = sigma[1 - l][0].clone();
            zeta[l] = vec![rival_start; n_agents[l]];
        }

        let sigma_hat = sigma.clone();
        let snap_sigma = sigma.clone();
        let snap_surplus = surplus.clone();
        let snap_grad = [
            vec![vec![0.0; dims[0]]; n_agents[0]],
            vec![vec![0.0; dims[1]]; n_agents[1]],
        ];
        Ok(Self {
            game,
            model,
            schedule,
            cfg,
            dims,
            n_agents,
            r_window,
            s_window,
            sigma,
            surplus,
            zeta,
            sigma_hat,
            snap_sigma,
            snap_surplus,
            snap_grad,
            tick: 0,
            packets: 0,
            bytes: 0,
        })
    }

    /// Effective windows `(R, S)` in ticks.
    pub fn windows(&self) -> (usize, usize) {
        (self.r_window, self.s_window)
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn traffic(&self) -> (u64, u64) {
        (self.packets, self.bytes)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// One communication-and-update iteration.
    pub fn tick(&mut self) -> Result<()> {
        self.tick_traced(&mut |_| {})
    }

    /// One iteration with a callback invoked once per transmitted packet.
    pub fn tick_traced(&mut self, trace: &mut dyn FnMut(PacketEvent)) -> Result<()> {
        let t1 = self.tick + 1;
        let frame = self.schedule.frame(self.tick);
        let r = self.r_window as u64;
        let window_start = self.tick % r == 0;
        let window_final = self.tick % r == r - 1;
        let q = self.tick / r;
        let sel = [
            selected_entries(t1, self.schedule.r0, self.dims[0], self.cfg.d[0]),
            selected_entries(t1, self.schedule.r0, self.dims[1], self.cfg.d[1]),
        ];

        if window_start {
            for l in 0..2 {
                for i in 0..self.n_agents[l] {
                    self.snap_sigma[l][i].copy_from_slice(&self.sigma[l][i]);
                    self.snap_surplus[l][i].copy_from_slice(&self.surplus[l][i]);
                }
            }
        }

        // Within-side exchange: every edge carries the sparsified strategy
        // and surplus; receivers average the strategy entries with their own.
        for l in 0..2 {
            let g = &frame.within[l];
            for i in 0..self.n_agents[l] {
                self.sigma_hat[l][i].copy_from_slice(&self.sigma[l][i]);
                let ins = &g.in_neighbors[i];
                if ins.is_empty() {
                    continue;
                }
                let w = 1.0 / (ins.len() + 1) as f64;
                for &k in &sel[l] {
                    let mut sum = self.sigma[l][i][k];
                    for &j in ins {
                        sum += self.sigma[l][j][k];
                    }
                    self.sigma_hat[l][i][k] = w * sum;
                }
            }
            let edge_count = g
                .in_neighbors
                .iter()
                .map(|ins| ins.len() as u64)
                .sum::<u64>();
            self.packets += 2 * edge_count;
            self.bytes += 2 * edge_count * BYTES_PER_ENTRY * self.cfg.d[l] as u64;
            for (from, to) in g.edges() {
                let ev = PacketEvent {
                    tick: t1,
                    side: Side::from_idx(l),
                    from,
                    to,
                    d: self.cfg.d[l],
                    first_index: sel[l][0],
                };
                // One packet for the strategy entries, one for the surplus.
                trace(ev);
                trace(ev);
            }
        }

        // Cross-layer exchange: receivers average the rival estimates they
        // got this tick, entry by entry, and hold everything else.
        for l in 0..2 {
            let sender = 1 - l;
            for i in 0..self.n_agents[l] {
                let ins = &frame.cross[l][i];
                if ins.is_empty() {
                    continue;
                }
                let w = 1.0 / ins.len() as f64;
                for &k in &sel[sender] {
                    let mut sum = 0.0;
                    for &j in ins {
                        sum += self.sigma_hat[sender][j][k];
                    }
                    self.zeta[l][i][k] = w * sum;
                }
                self.packets += ins.len() as u64;
                self.bytes += ins.len() as u64 * BYTES_PER_ENTRY * self.cfg.d[sender] as u64;
                for &j in ins {
                    trace(PacketEvent {
                        tick: t1,
                        side: Side::from_idx(sender),
                        from: j,
                        to: i,
                        d: self.cfg.d[sender],
                        first_index: sel[sender][0],
                    });
                }
            }
        }

        // The window's subgradients use the window-start strategies and the
        // rival estimates available at the window-start tick.
        if window_start {
            for l in 0..2 {
                let side = Side::from_idx(l);
                for i in 0..self.n_agents[l] {
                    let (zeta_i, grad_i) = (&self.zeta[l][i], &mut self.snap_grad[l][i]);
                    agent_subgradient(
                        self.model,
                        self.game,
                        side,
                        i,
                        &self.snap_sigma[l][i],
                        zeta_i,
                        self.cfg.penalty[l],
                        grad_i,
                    )?;
                }
            }
        }

        // Mixing: the new strategy part is exactly the in-neighbor average;
        // the surplus picks up the consensus residual plus the pushed
        // surplus shares.
        let alpha = self.cfg.stepsize.alpha(q);
        for l in 0..2 {
            let g = &frame.within[l];
            let out = g.out_neighbors();
            let out_w: Vec<f64> = out.iter().map(|o| 1.0 / (o.len() + 1) as f64).collect();
            let mut next_surplus = Vec::with_capacity(self.n_agents[l]);
            for i in 0..self.n_agents[l] {
                let mut new_s = self.surplus[l][i].clone();
                for &k in &sel[l] {
                    let pushed = if self.cfg.literal_b {
                        let mut sum = self.surplus[l][i][k];
                        for &j in &out[i] {
                            sum += self.surplus[l][j][k];
                        }
                        sum * out_w[i]
                    } else {
                        let mut sum = self.surplus[l][i][k] * out_w[i];
                        for &j in &g.in_neighbors[i] {
                            sum += self.surplus[l][j][k] * out_w[j];
                        }
                        sum
                    };
                    new_s[k] = self.sigma[l][i][k] - self.sigma_hat[l][i][k] + pushed;
                }
                if window_final {
                    for k in 0..self.dims[l] {
                        let f = self.cfg.eta * self.snap_surplus[l][i][k];
                        self.sigma_hat[l][i][k] += f - alpha * self.snap_grad[l][i][k];
                        new_s[k] -= f;
                    }
                }
                next_surplus.push(new_s);
            }
            self.surplus[l] = next_surplus;
            for i in 0..self.n_agents[l] {
                self.sigma[l][i].copy_from_slice(&self.sigma_hat[l][i]);
            }
        }

        for l in 0..2 {
            for i in 0..self.n_agents[l] {
                for v in self.sigma[l][i].iter().chain(&self.surplus[l][i]) {
                    if !v.is_finite() || math::abs(*v) > self.cfg.divergence_limit {
                        return Err(CoreError::Divergence { tick: self.tick });
                    }
                }
            }
        }

        self.tick += 1;
        Ok(())
    }

    /// Runs one effective window of ticks.
    pub fn run_window(&mut self) -> Result<()> {
        for _ in 0..self.r_window {
            self.tick()?;
        }
        Ok(())
    }

    /// Average state of side `l`: mean of strategy plus surplus over agents.
    pub fn mean_state(&self, l: Side) -> Vec<f64> {
        let li = l.idx();
        let n = self.n_agents[li] as f64;
        let mut mean = vec![0.0; self.dims[li]];
        for i in 0..self.n_agents[li] {
            for k in 0..self.dims[li] {
                mean[k] += (self.sigma[li][i][k] + self.surplus[li][i][k]) / n;
            }
        }
        mean
    }

    /// Average state as a block strategy.
    pub fn mean_strategy(&self, l: Side) -> BlockStrategy {
        BlockStrategy::new(l, self.model.n(l), self.game.m(l), self.mean_state(l))
    }

    pub fn agent_strategy(&self, l: Side, i: usize) -> &[f64] {
        &self.sigma[l.idx()][i]
    }

    pub fn agent_surplus(&self, l: Side, i: usize) -> &[f64] {
        &self.surplus[l.idx()][i]
    }

    pub fn agent_rival_estimate(&self, l: Side, i: usize) -> &[f64] {
        &self.zeta[l.idx()][i]
    }

    pub fn metrics(&self) -> Metrics {
        let mut consensus = [0.0_f64; 2];
        let mut surplus = [0.0_f64; 2];
        for l in 0..2 {
            let mean = self.mean_state(Side::from_idx(l));
            for i in 0..self.n_agents[l] {
                consensus[l] = consensus[l].max(math::dist(&self.sigma[l][i], &mean));
                surplus[l] = surplus[l].max(math::norm(&self.surplus[l][i]));
            }
        }
        Metrics {
            tick: self.tick,
            consensus,
            surplus,
            packets: self.packets,
            bytes: self.bytes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::discretize_types;
    use crate::game::{builtin_rent_seeking, Interval};
    use crate::network::split_ring_schedule;
    use crate::rng::SplitMix64;
    use approx::assert_abs_diff_eq;

    fn small_setup() -> (GameSpec, DiscreteTypeModel, NetworkSchedule) {
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 4, 4, 64).unwrap();
        let schedule = split_ring_schedule(3, 3, 5).unwrap();
        (game, model, schedule)
    }

    fn default_cfg(d: usize) -> EngineConfig {
        EngineConfig::new(
            [d, d],
            0.01,
            StepsizePolicy::PowerLaw {
                a0: 2.0,
                q0: 1.0,
                p: 1.0,
            },
            [10.0, 10.0],
        )
    }

    #[test]
    fn penalty_properties_on_box() {
        let set = ActionSet::Box(vec![Interval::new(0.0, 1.0), Interval::new(-1.0, 1.0)]);
        assert_eq!(penalty(&set, 5.0, &[0.5, 0.0]), 0.0);
        assert_abs_diff_eq!(penalty(&set, 5.0, &[2.0, 0.0]), 5.0, epsilon = 1e-12);
        let mut g = [0.0; 2];
        penalty_subgrad(&set, 5.0, &[0.5, 0.0], &mut g);
        assert_eq!(g, [0.0, 0.0]);
        penalty_subgrad(&set, 5.0, &[2.0, 0.0], &mut g);
        assert_abs_diff_eq!(g[0], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
        // Subgradient norm equals the weight outside the set.
        penalty_subgrad(&set, 5.0, &[2.0, -3.0], &mut g);
        assert_abs_diff_eq!(math::norm(&g), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn penalty_convexity_sampled() {
        let set = ActionSet::Box(vec![Interval::new(0.0, 1.0)]);
        let mut rng = SplitMix64::new(9);
        for _ in 0..500 {
            let x = [rng.uniform(-3.0, 4.0)];
            let y = [rng.uniform(-3.0, 4.0)];
            let lam = rng.next_f64();
            let mid = [lam * x[0] + (1.0 - lam) * y[0]];
            let lhs = penalty(&set, 2.0, &mid);
            let rhs = lam * penalty(&set, 2.0, &x) + (1.0 - lam) * penalty(&set, 2.0, &y);
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn average_state_conserved_within_window() {
        let (game, model, schedule) = small_setup();
        let mut engine = Engine::new(&game, &model, &schedule, default_cfg(2)).unwrap();
        let (r, _) = engine.windows();
        let before = [engine.mean_state(Side::One), engine.mean_state(Side::Two)];
        // All ticks of a window except the last leave the average untouched.
        for _ in 0..r - 1 {
            engine.tick().unwrap();
            for l in Side::BOTH {
                let mean = engine.mean_state(l);
                for (a, b) in mean.iter().zip(&before[l.idx()]) {
                    assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_final_moves_average_by_subgradient_step() {
        let (game, model, schedule) = small_setup();
        let mut engine = Engine::new(&game, &model, &schedule, default_cfg(2)).unwrap();
        let (r, _) = engine.windows();
        let before = engine.mean_state(Side::One);
        for _ in 0..r {
            engine.tick().unwrap();
        }
        // The average moved by exactly -(alpha / n) * sum of subgradients.
        let alpha = engine.cfg.stepsize.alpha(0);
        let n = engine.n_agents[0] as f64;
        let mut expected = before.clone();
        for i in 0..engine.n_agents[0] {
            for k in 0..engine.dims[0] {
                expected[k] -= alpha * engine.snap_grad[0][i][k] / n;
            }
        }
        let after = engine.mean_state(Side::One);
        for (a, e) in after.iter().zip(&expected) {
            assert_abs_diff_eq!(*a, *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn literal_surplus_matrix_breaks_conservation() {
        let (game, model, schedule) = small_setup();
        let mut cfg = default_cfg(2);
        cfg.literal_b = true;
        let mut engine = Engine::new(&game, &model, &schedule, cfg).unwrap();
        let before = engine.mean_state(Side::One);
        // Put asymmetric surplus in so the literal matrix has mass to lose.
        for i in 0..engine.n_agents[0] {
            for v in engine.surplus[0][i].iter_mut() {
                *v = 0.1 * (i + 1) as f64;
            }
        }
        let with_mass = engine.mean_state(Side::One);
        assert_ne!(before, with_mass);
        let mut max_drift = 0.0_f64;
        for _ in 0..2 {
            engine.tick().unwrap();
            let mean = engine.mean_state(Side::One);
            for (a, b) in mean.iter().zip(&with_mass) {
                max_drift = max_drift.max((a - b).abs());
            }
        }
        assert!(max_drift > 1e-6, "drift {max_drift}");
    }

    #[test]
    fn consensus_decreases_over_windows() {
        let (game, model, schedule) = small_setup();
        let mut engine = Engine::new(&game, &model, &schedule, default_cfg(4)).unwrap();
        // Desynchronize the agents.
        for i in 0..engine.n_agents[0] {
            for v in engine.sigma[0][i].iter_mut() {
                *v += 0.05 * (i as f64 - 1.0);
            }
        }
        let start = engine.metrics().consensus[0];
        for _ in 0..200 {
            engine.run_window().unwrap();
        }
        let end = engine.metrics().consensus[0];
        assert!(start > 1e-3);
        assert!(end < start / 5.0, "consensus {start} -> {end}");
    }

    #[test]
    fn runs_are_deterministic() {
        let (game, model, schedule) = small_setup();
        let mut a = Engine::new(&game, &model, &schedule, default_cfg(2)).unwrap();
        let mut b = Engine::new(&game, &model, &schedule, default_cfg(2)).unwrap();
        for _ in 0..100 {
            a.tick().unwrap();
            b.tick().unwrap();
        }
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.surplus, b.surplus);
        assert_eq!(a.zeta, b.zeta);
        assert_eq!(a.traffic(), b.traffic());
    }

    #[test]
    fn byte_count_matches_edge_census() {
        let (game, model, schedule) = small_setup();
        let d = [3usize, 2usize];
        let mut cfg = default_cfg(1);
        cfg.d = d;
        let mut engine = Engine::new(&game, &model, &schedule, cfg).unwrap();
        let ticks = 50u64;
        for _ in 0..ticks {
            engine.tick().unwrap();
        }
        let mut packets = 0u64;
        let mut bytes = 0u64;
        for t in 0..ticks {
            let frame = schedule.frame(t);
            for l in 0..2 {
                let within = frame.within[l]
                    .in_neighbors
                    .iter()
                    .map(|v| v.len() as u64)
                    .sum::<u64>();
                packets += 2 * within;
                bytes += 2 * within * 12 * d[l] as u64;
                let cross = frame.cross[l].iter().map(|v| v.len() as u64).sum::<u64>();
                packets += cross;
                bytes += cross * 12 * d[1 - l] as u64;
            }
        }
        assert_eq!(engine.traffic(), (packets, bytes));
    }

    #[test]
    fn divergence_is_detected() {
        let (game, model, schedule) = small_setup();
        let mut cfg = default_cfg(2);
        cfg.divergence_limit = 0.4;
        // Initial strategies sit at 0.55 (box midpoint), above the limit.
        let mut engine = Engine::new(&game, &model, &schedule, cfg).unwrap();
        let err = engine.tick().unwrap_err();
        assert!(matches!(err, CoreError::Divergence { tick: 0 }));
    }

    #[test]
    fn rejects_mismatched_schedule() {
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 2, 2, 64).unwrap();
        let schedule = split_ring_schedule(4, 3, 1).unwrap();
        let err = Engine::new(&game, &model, &schedule, default_cfg(1)).err().unwrap();
        assert!(matches!(err, CoreError::Config(_)));
    }

    #[test]
    fn full_run_approaches_small_oracle() {
        // End-to-end smoke test at small scale; the acceptance suite runs
        // the large version.
        let game = builtin_rent_seeking();
        let model = discretize_types(&game, 4, 4, 64).unwrap();
        let schedule = split_ring_schedule(3, 3, 5).unwrap();
        let sol = crate::oracle::solve_dbne_oracle(&game, &model, 5000, 1e-6, 1).unwrap();
        let mut engine = Engine::new(&game, &model, &schedule, default_cfg(2)).unwrap();
        for _ in 0..20_000 {
            engine.run_window().unwrap();
        }
        let mean = engine.mean_strategy(Side::One);
        let dist = math::dist(&mean.values, &sol.s1.values);
        assert!(dist < 5e-2, "distance to oracle {dist}");
        let metrics = engine.metrics();
        assert!(metrics.consensus[0] < 1e-2, "consensus {}", metrics.consensus[0]);
        assert!(metrics.surplus[0] < 1e-2, "surplus {}", metrics.surplus[0]);
    }
}
