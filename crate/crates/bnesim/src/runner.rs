//! Experiment orchestration: building the pieces from a config, driving the
//! engine, sampling metrics, and persisting artifacts.

use crate::config::ExperimentConfig;
use crate::eta::eta_upper_bound;
use crate::output::{
    account_bytes, write_metrics, write_strategies, write_summary, ByteReport, MetricsRow,
    PacketTrace, RunSummary,
};
use bnesim_core::comm::effective_windows;
use bnesim_core::discretize::{discretize_types, expected_game_value, DiscreteTypeModel};
use bnesim_core::engine::{Engine, EngineConfig};
use bnesim_core::game::GameSpec;
use bnesim_core::network::NetworkSchedule;
use bnesim_core::oracle::{dbne_gap, solve_dbne_oracle, OracleSolution, DEFAULT_GAP_GRID};
use bnesim_core::{BlockStrategy, CoreError, Result, Side};
use std::fs;
use std::path::Path;
use std::time::Instant;

/// Skip the spectral eta bound when one schedule cycle spans more windows
/// than this; the eigenvalue sweep would dominate the run.
const ETA_BOUND_WINDOW_CAP: u64 = 512;

/// Everything a finished run produced, also persisted under the output
/// directory.
pub struct RunArtifacts {
    pub rows: Vec<MetricsRow>,
    pub strategies: [BlockStrategy; 2],
    pub oracle: Option<OracleSolution>,
    pub report: ByteReport,
    pub eta_bound: Option<f64>,
    pub r_window: usize,
    pub s_window: usize,
    pub summary: RunSummary,
}

/// The static pieces of an experiment, built once per run.
pub struct Experiment {
    pub game: GameSpec,
    pub model: DiscreteTypeModel,
    pub schedule: NetworkSchedule,
    pub d: [usize; 2],
    pub dims: [usize; 2],
}

pub fn build_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    let game = cfg.build_game()?;
    let model = discretize_types(&game, cfg.n[0], cfg.n[1], cfg.game.quad_res)?;
    let schedule = cfg.build_schedule(&game)?;
    let d = cfg.d(&game);
    let dims = [
        cfg.n[0] * game.m(Side::One),
        cfg.n[1] * game.m(Side::Two),
    ];
    Ok(Experiment {
        game,
        model,
        schedule,
        d,
        dims,
    })
}

fn engine_config(cfg: &ExperimentConfig, d: [usize; 2]) -> EngineConfig {
    let mut ec = EngineConfig::new(d, cfg.engine.eta, cfg.stepsize(), cfg.engine.e);
    ec.literal_b = cfg.engine.literal_b;
    ec.init = cfg.init_policy();
    ec.init_action = [
        cfg.engine.init_action_1.clone(),
        cfg.engine.init_action_2.clone(),
    ];
    ec
}

fn strategy_dist_inf(a: &BlockStrategy, b: &BlockStrategy) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn eta_bound_if_cheap(exp: &Experiment, literal_b: bool) -> Option<f64> {
    let (r, _) = effective_windows(exp.schedule.r0, exp.schedule.s0, exp.dims, exp.d);
    // Mirror the cycle arithmetic of the bound computation to predict cost.
    let mut windows = 1u64;
    for l in 0..2 {
        let dim = exp.dims[l] as u64;
        let dl = exp.d[l] as u64;
        let sel = exp.schedule.r0 as u64 * (dim / gcd(dim, dl));
        let full = lcm(lcm(exp.schedule.period() as u64, sel), r as u64);
        windows = windows.max(full / r as u64);
    }
    if windows > ETA_BOUND_WINDOW_CAP {
        return None;
    }
    eta_upper_bound(&exp.schedule, exp.dims, exp.d, literal_b).ok()
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

/// Runs the experiment and writes `metrics.csv`, `strategies.csv`,
/// `summary.toml`, and optionally `trace.txt` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let exp = build_experiment(cfg)?;
    let engine_cfg = engine_config(cfg, exp.d);

    let eta_bound = eta_bound_if_cheap(&exp, cfg.engine.literal_b);
    if let Some(bound) = eta_bound {
        if cfg.engine.eta >= bound {
            eprintln!(
                "warning: eta = {} is at or above the spectral bound {bound:.3e}; \
                 convergence is not guaranteed",
                cfg.engine.eta
            );
        }
    }

    let oracle = if cfg.outputs.oracle {
        Some(solve_dbne_oracle(
            &exp.game,
            &exp.model,
            cfg.outputs.oracle_iters,
            cfg.outputs.oracle_tol,
            cfg.engine.seed,
        )?)
    } else {
        None
    };

    let dir = &cfg.outputs.dir;
    fs::create_dir_all(dir).map_err(|e| CoreError::Config(format!("{}: {e}", dir.display())))?;
    let mut trace = if cfg.outputs.packet_trace {
        Some(
            PacketTrace::create(&dir.join("trace.txt"))
                .map_err(|e| CoreError::Config(format!("trace: {e}")))?,
        )
    } else {
        None
    };

    let mut engine = Engine::new(&exp.game, &exp.model, &exp.schedule, engine_cfg)?;
    let (r_window, s_window) = engine.windows();

    let sample = |engine: &Engine| -> Result<MetricsRow> {
        let m = engine.metrics();
        let (dist, gap) = match &oracle {
            Some(sol) => {
                let s1 = engine.mean_strategy(Side::One);
                let s2 = engine.mean_strategy(Side::Two);
                let dist = strategy_dist_inf(&s1, &sol.s1).max(strategy_dist_inf(&s2, &sol.s2));
                let gap = expected_game_value(&exp.model, &exp.game, &s1, &sol.s2)?
                    - expected_game_value(&exp.model, &exp.game, &sol.s1, &sol.s2)?;
                (dist, gap)
            }
            None => (f64::NAN, f64::NAN),
        };
        Ok(MetricsRow {
            tick: m.tick,
            consensus: m.consensus,
            surplus: m.surplus,
            oracle_dist: dist,
            gap_proxy: gap,
            bytes_cum: m.bytes,
        })
    };

    let started = Instant::now();
    let mut rows = vec![sample(&engine)?];
    let mut budget_hit = None;
    for q in 1..=cfg.engine.t {
        let res = match &mut trace {
            Some(t) => {
                let mut ok = Ok(());
                for _ in 0..r_window {
                    ok = engine.tick_traced(&mut |ev| t.record(ev));
                    if ok.is_err() {
                        break;
                    }
                }
                ok
            }
            None => engine.run_window(),
        };
        res?;
        if q % cfg.outputs.stride == 0 {
            rows.push(sample(&engine)?);
        }
        if let Some(limit) = cfg.outputs.wall_clock_limit_s {
            if started.elapsed().as_secs_f64() > limit {
                budget_hit = Some(q);
                break;
            }
        }
    }

    let strategies = [
        engine.mean_strategy(Side::One),
        engine.mean_strategy(Side::Two),
    ];
    let (packets, bytes) = engine.traffic();
    let report = account_bytes(&exp.schedule, exp.d, engine.tick_count(), (packets, bytes))?;

    let last = rows.last().expect("at least the initial row");
    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: cfg.digest(),
        windows: engine.tick_count() / r_window as u64,
        ticks: engine.tick_count(),
        r_window,
        s_window,
        d: exp.d,
        eta: cfg.engine.eta,
        eta_bound,
        final_consensus: last.consensus,
        final_surplus: last.surplus,
        final_oracle_dist: last.oracle_dist,
        final_gap_proxy: last.gap_proxy,
        messages: report.messages,
        bytes: report.bytes,
        avg_bytes_per_tick: report.avg_bytes_per_tick,
    };

    let io = |e: std::io::Error| CoreError::Config(format!("output: {e}"));
    write_metrics(&dir.join("metrics.csv"), &rows).map_err(io)?;
    write_strategies(
        &dir.join("strategies.csv"),
        &exp.model,
        &[&strategies[0], &strategies[1]],
    )
    .map_err(io)?;
    write_summary(&dir.join("summary.toml"), &summary).map_err(io)?;
    if let Some(t) = trace {
        t.finish().map_err(io)?;
    }

    if let Some(q) = budget_hit {
        return Err(CoreError::Protocol(format!(
            "wall-clock budget of {}s exceeded after {q} of {} windows; partial results written to {}",
            cfg.outputs.wall_clock_limit_s.unwrap_or_default(),
            cfg.engine.t,
            dir.display()
        )));
    }

    Ok(RunArtifacts {
        rows,
        strategies,
        oracle,
        report,
        eta_bound,
        r_window,
        s_window,
        summary,
    })
}

/// Solves the centralized reference equilibrium and writes its strategies
/// CSV; returns the solution.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<OracleSolution> {
    cfg.validate()?;
    let exp = build_experiment(cfg)?;
    let sol = solve_dbne_oracle(
        &exp.game,
        &exp.model,
        cfg.outputs.oracle_iters,
        cfg.outputs.oracle_tol,
        cfg.engine.seed,
    )?;
    let dir = &cfg.outputs.dir;
    fs::create_dir_all(dir).map_err(|e| CoreError::Config(format!("{}: {e}", dir.display())))?;
    write_strategies(&dir.join("oracle.csv"), &exp.model, &[&sol.s1, &sol.s2])
        .map_err(|e| CoreError::Config(format!("output: {e}")))?;
    Ok(sol)
}

/// Validation-only pass: game construction, constant-sum structure,
/// schedule connectivity, and per-entry information flow.
pub fn validate(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let exp = build_experiment(cfg)?;
    let report = exp.game.validate_sum_structure(10_000, cfg.engine.seed)?;
    if !report.pass() {
        return Err(CoreError::AssumptionViolation(format!(
            "game is not constant-sum: deviation {} about constant {}",
            report.max_deviation, report.c_estimate
        )));
    }
    exp.schedule.verify_joint_connectivity()?;
    exp.schedule.verify_cross_coverage()?;
    let (r, s) =
        bnesim_core::comm::verify_entry_connectivity(&exp.schedule, exp.dims, exp.d)?;
    Ok(format!(
        "ok: constant sum {:.6} (deviation {:.2e}); d = {:?}; effective windows R = {r}, S = {s}",
        report.c_estimate, report.max_deviation, exp.d
    ))
}

/// Equilibrium gap of the final average strategies of a finished run.
pub fn final_gap(cfg: &ExperimentConfig, artifacts: &RunArtifacts) -> Result<f64> {
    let exp = build_experiment(cfg)?;
    dbne_gap(
        &exp.game,
        &exp.model,
        &artifacts.strategies[0],
        &artifacts.strategies[1],
        DEFAULT_GAP_GRID,
    )
}

/// Parses a sweep axis list like `N=10,20,40;rho=0.5,1.0`.
pub fn parse_vary(spec: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut axes = Vec::new();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| CoreError::Config(format!("vary clause {part:?} lacks '='")))?;
        let key = key.trim().to_string();
        if key != "N" && key != "rho" {
            return Err(CoreError::Config(format!(
                "unknown sweep axis {key:?}; expected N or rho"
            )));
        }
        let values: std::result::Result<Vec<f64>, _> =
            values.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| CoreError::Config(format!("vary clause {part:?}: {e}")))?;
        if values.is_empty() {
            return Err(CoreError::Config(format!("vary clause {part:?} is empty")));
        }
        axes.push((key, values));
    }
    if axes.is_empty() {
        return Err(CoreError::Config("empty sweep specification".into()));
    }
    Ok(axes)
}

/// Runs the cartesian product of the sweep axes, each into its own
/// subdirectory of the configured output directory.
pub fn sweep(cfg: &ExperimentConfig, vary: &str) -> Result<Vec<(String, RunArtifacts)>> {
    let axes = parse_vary(vary)?;
    let mut combos: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for (key, values) in &axes {
        let mut next = Vec::new();
        for combo in &combos {
            for v in values {
                let mut c = combo.clone();
                c.push((key.clone(), *v));
                next.push(c);
            }
        }
        combos = next;
    }
    let base = cfg.outputs.dir.clone();
    let mut results = Vec::new();
    for combo in combos {
        let mut c = cfg.clone();
        let mut label = Vec::new();
        for (key, v) in &combo {
            match key.as_str() {
                "N" => {
                    let n = *v as usize;
                    if n == 0 || *v != n as f64 {
                        return Err(CoreError::Config(format!("N = {v} is not a positive integer")));
                    }
                    c.n = [n, n];
                    label.push(format!("N{n}"));
                }
                "rho" => {
                    c.rho = [*v, *v];
                    label.push(format!("rho{v}"));
                }
                _ => unreachable!(),
            }
        }
        let label = label.join("_");
        c.outputs.dir = base.join(&label);
        let artifacts = run(&c)?;
        results.push((label, artifacts));
    }
    Ok(results)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Config(format!("{}: {e}", path.display())))?;
    crate::config::parse_config(&text)
}
