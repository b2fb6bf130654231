//! Experiment configuration: TOML parsing with strict schemas, validation,
//! and a canonical digest for reproducibility.

use bnesim_core::engine::{InitPolicy, StepsizePolicy};
use bnesim_core::game::{builtin_rent_seeking, rent_seeking_game, GameSpec};
use bnesim_core::network::{split_ring_schedule, Digraph, NetworkSchedule, ScheduleFrame};
use bnesim_core::{CoreError, Interval, Side};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// A full experiment description, as read from a TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameBlock,
    /// Type discretization points per side.
    #[serde(rename = "N")]
    pub n: [usize; 2],
    /// Compression ratios per side, in `(0, 1]`; `d = round(rho * N * m)`
    /// clamped to `[1, N * m]`.
    pub rho: [f64; 2],
    #[serde(default)]
    pub schedule: ScheduleBlock,
    pub engine: EngineBlock,
    #[serde(default)]
    pub outputs: OutputsBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameBlock {
    /// Named builtin game; currently `"rent_seeking"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Declarative alternative: a named builtin cost family over custom
    /// boxes and intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_box_1: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_box_2: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_interval_1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_interval_2: Option<[f64; 2]>,
    /// Quadrature nodes per axis per discretization cell.
    #[serde(default = "default_quad_res")]
    pub quad_res: usize,
}

fn default_quad_res() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleBlock {
    /// Seed of the built-in period-2 schedule generator; ignored when
    /// explicit frames are given.
    pub seed: u64,
    pub r0: usize,
    pub s0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<FrameBlock>>,
}

impl Default for ScheduleBlock {
    fn default() -> Self {
        Self {
            seed: 0,
            r0: 2,
            s0: 2,
            frames: None,
        }
    }
}

/// One explicit schedule frame: within-side edges as `(from, to)` pairs and
/// per-receiver cross in-neighbor lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBlock {
    pub within1: Vec<[usize; 2]>,
    pub within2: Vec<[usize; 2]>,
    pub cross1: Vec<Vec<usize>>,
    pub cross2: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineBlock {
    /// Run length in effective windows; the tick count is `T * R`.
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Penalty weights per side.
    #[serde(rename = "E", default = "default_penalty")]
    pub e: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub surplus_init: SurplusInit,
    #[serde(default)]
    pub stepsize: StepsizeBlock,
    /// Use the literal receiver-normalized surplus matrix (does not
    /// conserve mass; for comparison only).
    #[serde(default)]
    pub literal_b: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_action_1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_action_2: Option<Vec<f64>>,
}

fn default_eta() -> f64 {
    1e-2
}

fn default_penalty() -> [f64; 2] {
    [10.0, 10.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurplusInit {
    #[default]
    Zero,
    /// Surpluses start at the initial action, doubling the initial average
    /// state; kept for comparison with the textbook initialization.
    InitialStrategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsizeBlock {
    pub kind: StepsizeKind,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_q0")]
    pub q0: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_a() -> f64 {
    1.0
}
fn default_q0() -> f64 {
    1.0
}
fn default_p() -> f64 {
    0.75
}

impl Default for StepsizeBlock {
    fn default() -> Self {
        Self {
            kind: StepsizeKind::SquareSummable,
            a: default_a(),
            q0: default_q0(),
            p: default_p(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepsizeKind {
    /// `a / (q + q0)^p`, square-summable for `p` in `(0.5, 1]`.
    SquareSummable,
    /// `a / sqrt(q + 1)`, used for convergence-rate probes.
    RateProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsBlock {
    pub dir: PathBuf,
    /// Metrics are sampled every `stride` windows.
    pub stride: u64,
    pub packet_trace: bool,
    /// Solve the centralized reference equilibrium so the metrics include
    /// the oracle distance and gap proxy.
    pub oracle: bool,
    pub oracle_iters: usize,
    pub oracle_tol: f64,
    /// Optional wall-clock budget; exceeding it aborts the run with partial
    /// outputs on disk.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_limit_s: Option<f64>,
}

impl Default for OutputsBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stride: 1,
            packet_trace: false,
            oracle: true,
            oracle_iters: 200_000,
            oracle_tol: 1e-7,
            wall_clock_limit_s: None,
        }
    }
}

/// Parses and validates a TOML experiment document.
///
/// Unknown keys, duplicate keys, and out-of-range values are rejected with
/// a path-to-field diagnostic.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CoreError> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| CoreError::Config(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        for l in 0..2 {
            if self.n[l] == 0 {
                return Err(CoreError::Config(format!("N[{l}] must be positive")));
            }
            if !(self.rho[l] > 0.0 && self.rho[l] <= 1.0) {
                return Err(CoreError::Config(format!(
                    "rho[{l}] = {} outside (0, 1]",
                    self.rho[l]
                )));
            }
        }
        if self.game.name.is_none() == self.game.costs.is_none() {
            return Err(CoreError::Config(
                "game: give exactly one of `name` or a declarative `costs` block".into(),
            ));
        }
        if self.engine.t == 0 {
            return Err(CoreError::Config("engine.T must be positive".into()));
        }
        if self.outputs.stride == 0 {
            return Err(CoreError::Config("outputs.stride must be positive".into()));
        }
        if self.schedule.r0 == 0 || self.schedule.s0 == 0 {
            return Err(CoreError::Config(
                "schedule.r0 and schedule.s0 must be positive".into(),
            ));
        }
        let s = &self.engine.stepsize;
        if s.kind == StepsizeKind::SquareSummable && !(s.p > 0.5 && s.p <= 1.0) {
            return Err(CoreError::Config(format!(
                "engine.stepsize.p = {} outside (0.5, 1]",
                s.p
            )));
        }
        Ok(())
    }

    /// Builds the game described by the `game` block.
    pub fn build_game(&self) -> Result<GameSpec, CoreError> {
        let g = &self.game;
        if let Some(name) = &g.name {
            return match name.as_str() {
                "rent_seeking" => Ok(builtin_rent_seeking()),
                other => Err(CoreError::Config(format!("unknown game name {other:?}"))),
            };
        }
        match g.costs.as_deref() {
            Some("rent_seeking") => {}
            other => {
                return Err(CoreError::Config(format!(
                    "unsupported declarative cost family {other:?}"
                )))
            }
        }
        match g.density.as_deref() {
            Some("independent_uniform") | None => {}
            Some(other) => {
                return Err(CoreError::Config(format!("unsupported density {other:?}")))
            }
        }
        let boxes = [&g.action_box_1, &g.action_box_2];
        let types = [&g.type_interval_1, &g.type_interval_2];
        let mut actions = [Interval::new(0.1, 1.0); 2];
        let mut thetas = [Interval::new(0.01, 1.01); 2];
        for l in 0..2 {
            if let Some(b) = boxes[l] {
                if b.len() != 1 {
                    return Err(CoreError::Config(
                        "rent_seeking costs need a one-dimensional action box".into(),
                    ));
                }
                actions[l] = Interval::new(b[0][0], b[0][1]);
            }
            if let Some([lo, hi]) = types[l] {
                thetas[l] = Interval::new(*lo, *hi);
            }
        }
        rent_seeking_game(actions, thetas)
    }

    /// Entries per packet per side: `round(rho * N * m)` clamped to
    /// `[1, N * m]`.
    pub fn d(&self, game: &GameSpec) -> [usize; 2] {
        let mut d = [0usize; 2];
        for l in 0..2 {
            let dim = self.n[l] * game.m(Side::from_idx(l));
            d[l] = ((self.rho[l] * dim as f64).round() as usize).clamp(1, dim);
        }
        d
    }

    /// Builds the communication schedule for this config and game.
    pub fn build_schedule(&self, game: &GameSpec) -> Result<NetworkSchedule, CoreError> {
        let n = [game.n(Side::One), game.n(Side::Two)];
        match &self.schedule.frames {
            None => split_ring_schedule(n[0], n[1], self.schedule.seed),
            Some(blocks) => {
                let mut frames = Vec::with_capacity(blocks.len());
                for b in blocks {
                    let mut within = [Digraph::empty(n[0]), Digraph::empty(n[1])];
                    for (l, edges) in [&b.within1, &b.within2].into_iter().enumerate() {
                        for &[from, to] in edges {
                            if from >= n[l] || to >= n[l] {
                                return Err(CoreError::Config(format!(
                                    "schedule frame references agent out of range on side {}",
                                    l + 1
                                )));
                            }
                            within[l].add_edge(from, to);
                        }
                    }
                    frames.push(ScheduleFrame {
                        within,
                        cross: [b.cross1.clone(), b.cross2.clone()],
                    });
                }
                NetworkSchedule::new(frames, self.schedule.r0, self.schedule.s0)
            }
        }
    }

    /// The stepsize policy of the engine block.
    pub fn stepsize(&self) -> StepsizePolicy {
        let s = self.engine.stepsize;
        match s.kind {
            StepsizeKind::SquareSummable => StepsizePolicy::PowerLaw {
                a0: s.a,
                q0: s.q0,
                p: s.p,
            },
            StepsizeKind::RateProbe => StepsizePolicy::InverseSqrt { a0: s.a },
        }
    }

    pub fn init_policy(&self) -> InitPolicy {
        match self.engine.surplus_init {
            SurplusInit::Zero => InitPolicy::ZeroSurplus,
            SurplusInit::InitialStrategy => InitPolicy::InitialSurplus,
        }
    }

    /// Canonical serialized form; parsing it back yields an equal config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical form, recorded in run summaries.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        N = [200, 200]
        rho = [0.5, 0.5]
        [game]
        name = "rent_seeking"
        [engine]
        T = 100
    "#;

    #[test]
    fn minimal_document_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        let game = cfg.build_game().unwrap();
        assert_eq!(cfg.d(&game), [100, 100]);
        assert_eq!(cfg.engine.eta, 1e-2);
        assert_eq!(cfg.engine.stepsize, StepsizeBlock::default());
        assert_eq!(cfg.outputs.stride, 1);
    }

    #[test]
    fn rho_zero_rejected() {
        let text = MINIMAL.replace("rho = [0.5, 0.5]", "rho = [0.0, 0.5]");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}\n[outputs]\nbogus = 1\n");
        let err = parse_config(&text).unwrap_err();
        assert!(format!("{err}").contains("bogus"));
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = MINIMAL.replace(
            "name = \"rent_seeking\"",
            "name = \"rent_seeking\"\n        name = \"rent_seeking\"",
        );
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn round_trips_losslessly() {
        let cfg = parse_config(MINIMAL).unwrap();
        let again = parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.digest(), again.digest());
    }

    #[test]
    fn clamping_keeps_d_in_range() {
        let text = MINIMAL
            .replace("N = [200, 200]", "N = [1, 1]")
            .replace("rho = [0.5, 0.5]", "rho = [0.1, 1.0]");
        let cfg = parse_config(&text).unwrap();
        let game = cfg.build_game().unwrap();
        assert_eq!(cfg.d(&game), [1, 1]);
    }

    #[test]
    fn declarative_game_builds() {
        let text = r#"
            N = [4, 4]
            rho = [1.0, 1.0]
            [game]
            costs = "rent_seeking"
            density = "independent_uniform"
            action_box_1 = [[0.2, 2.0]]
            action_box_2 = [[0.2, 2.0]]
            type_interval_1 = [0.0, 1.0]
            type_interval_2 = [0.0, 1.0]
            [engine]
            T = 10
        "#;
        let cfg = parse_config(text).unwrap();
        let game = cfg.build_game().unwrap();
        assert_eq!(game.n(Side::One), 3);
        let report = game.validate_sum_structure(100, 7).unwrap();
        assert!(report.pass());
    }

    #[test]
    fn explicit_frames_build_a_schedule() {
        let text = r#"
            N = [2, 2]
            rho = [1.0, 1.0]
            [game]
            name = "rent_seeking"
            [engine]
            T = 10
            [schedule]
            r0 = 1
            s0 = 1
            [[schedule.frames]]
            within1 = [[0, 1], [1, 2], [2, 0]]
            within2 = [[0, 1], [1, 2], [2, 0]]
            cross1 = [[0], [1], [2]]
            cross2 = [[0], [1], [2]]
        "#;
        let cfg = parse_config(text).unwrap();
        let game = cfg.build_game().unwrap();
        let schedule = cfg.build_schedule(&game).unwrap();
        assert_eq!(schedule.period(), 1);
    }
}
