//! Dual-path controlled inversion and LQR-steered generation.
//!
//! Restoration runs in two stages:
//!
//! 1. **Inversion.** The observation is carried from `t = 1` down to `t = 0`
//!    twice, once under the null condition (structural path) and once under
//!    the prompt (semantic path). Each step blends the marginal field with
//!    the straight-line field toward a shared Gaussian draw `z0`, weighted by
//!    `gamma`. Every node is stored.
//! 2. **Generation.** Starting from a noise-end latent, the flow is
//!    integrated back to `t = 1` while the LQR law pulls the state toward the
//!    midpoint of the two stored paths at the same node, scaled by the
//!    schedule `eta(t)`.
//!
//! The generation grid is the inversion grid reversed, so generation step
//! `k` reads inversion node `n_steps - k` with an identical time stamp.

use std::fmt;
use std::str::FromStr;

use crate::control::{blend_drift, lqr_control, ScheduleKind, SteeringSchedule};
use crate::degrade::{DegradationOperator, ImageGrid};
use crate::error::{check_dim, check_unit, PdlsError, Result};
use crate::flowfield::{
    clamp_data_time, clamp_noise_time, endpoint_conditional_velocity, Condition, Endpoint, FlowField,
    GaussianMixture, LatentState, DEFAULT_TIME_EPS,
};
use crate::integrate::{integrate, TimeGrid, Trajectory};
use crate::rng::latent_noise;

pub const DEFAULT_STEPS: usize = 28;
pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_ETA_MAX: f64 = 0.5;

/// Which noise-end latent seeds generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    #[default]
    Structural,
    Semantic,
    /// Average of both noise-end latents.
    Mixed,
}

/// Condition driving the base flow during generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseCondition {
    #[default]
    UsePrompt,
    UseNull,
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMode::Structural => "structural",
            InitMode::Semantic => "semantic",
            InitMode::Mixed => "mixed",
        })
    }
}

impl FromStr for InitMode {
    type Err = PdlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structural" => Ok(InitMode::Structural),
            "semantic" => Ok(InitMode::Semantic),
            "mixed" => Ok(InitMode::Mixed),
            other => Err(PdlsError::InvalidParameter {
                name: "init",
                reason: format!("`{other}` is not one of structural|semantic|mixed"),
            }),
        }
    }
}

impl fmt::Display for BaseCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseCondition::UsePrompt => "prompt",
            BaseCondition::UseNull => "null",
        })
    }
}

impl FromStr for BaseCondition {
    type Err = PdlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prompt" => Ok(BaseCondition::UsePrompt),
            "null" => Ok(BaseCondition::UseNull),
            other => Err(PdlsError::InvalidParameter {
                name: "base",
                reason: format!("`{other}` is not one of prompt|null"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdlsConfig {
    /// Inversion controller strength.
    pub gamma: f64,
    pub eta_max: f64,
    pub n_steps: usize,
    pub init_mode: InitMode,
    pub base_condition: BaseCondition,
    pub schedule: ScheduleKind,
    /// Drop the base flow during generation, leaving only `eta * control`.
    pub suppress_base: bool,
    pub time_eps: f64,
}

impl Default for PdlsConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            eta_max: DEFAULT_ETA_MAX,
            n_steps: DEFAULT_STEPS,
            init_mode: InitMode::default(),
            base_condition: BaseCondition::default(),
            schedule: ScheduleKind::default(),
            suppress_base: false,
            time_eps: DEFAULT_TIME_EPS,
        }
    }
}

impl PdlsConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("gamma", self.gamma)?;
        check_unit("eta_max", self.eta_max)?;
        if self.n_steps == 0 {
            return Err(PdlsError::InvalidParameter {
                name: "n_steps",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.time_eps > 0.0 && self.time_eps < 0.5) {
            return Err(PdlsError::InvalidParameter {
                name: "time_eps",
                reason: format!("{} must lie in (0, 0.5)", self.time_eps),
            });
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<SteeringSchedule> {
        SteeringSchedule::new(self.eta_max, self.schedule)
    }

    /// Inversion grid: `t` from 1 down to 0.
    pub fn inversion_grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.n_steps, 1.0, 0.0)
    }
}

/// Inversion output at the noise end of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEndLatent(pub Vec<f64>);

impl NoiseEndLatent {
    pub fn of(trajectory: &Trajectory) -> Self {
        Self(trajectory.terminal().to_vec())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

/// The two stored inversion paths, sharing one grid node for node.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPaths {
    pub structural: Trajectory,
    pub semantic: Trajectory,
    pub condition: Condition,
}

impl DualPaths {
    pub fn structural_latent(&self) -> NoiseEndLatent {
        NoiseEndLatent::of(&self.structural)
    }

    pub fn semantic_latent(&self) -> NoiseEndLatent {
        NoiseEndLatent::of(&self.semantic)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.structural.grid()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Controlled inversion along a given descending grid toward a fixed `z0`.
pub fn invert_with_noise(
    field: &FlowField<'_>,
    observed: &[f64],
    cond: &Condition,
    gamma: f64,
    grid: &TimeGrid,
    z0: &[f64],
) -> Result<Trajectory> {
    check_unit("gamma", gamma)?;
    check_dim(field.mixture().dim(), observed.len())?;
    check_dim(observed.len(), z0.len())?;
    let eps = field.time_eps();
    integrate(observed, grid, |state, _| {
        let toward_noise = || {
            endpoint_conditional_velocity(
                LatentState::new(state.x, clamp_noise_time(state.t, eps)),
                z0,
                Endpoint::Noise,
                eps,
            )
        };
        if gamma == 1.0 {
            return toward_noise();
        }
        let flow = field.clamped_velocity(state.x, state.t, cond)?;
        if gamma == 0.0 {
            return Ok(flow);
        }
        blend_drift(&flow, &toward_noise()?, gamma)
    })
}

/// Inversion from `t = 1` to `t = 0` with `z0` drawn from `noise_seed`.
pub fn invert_path(
    observed: &[f64],
    mixture: &GaussianMixture,
    cond: &Condition,
    gamma: f64,
    n_steps: usize,
    noise_seed: u64,
) -> Result<Trajectory> {
    let grid = TimeGrid::uniform(n_steps, 1.0, 0.0)?;
    let z0 = latent_noise(mixture.dim(), noise_seed);
    invert_with_noise(&FlowField::new(mixture), observed, cond, gamma, &grid, &z0)
}

/// Structural (null) and semantic (prompt) inversions sharing one `z0`.
///
/// A null prompt is accepted and yields two identical paths, which reduces
/// the pipeline to single-path inversion.
pub fn dual_invert(
    observed: &[f64],
    mixture: &GaussianMixture,
    prompt: &Condition,
    config: &PdlsConfig,
    noise_seed: u64,
) -> Result<DualPaths> {
    config.validate()?;
    mixture.select(prompt)?;
    let field = FlowField::new(mixture).with_time_eps(config.time_eps);
    let grid = config.inversion_grid()?;
    let z0 = latent_noise(mixture.dim(), noise_seed);
    let structural = invert_with_noise(&field, observed, &Condition::Null, config.gamma, &grid, &z0)?;
    let semantic = if prompt.is_null() {
        structural.clone()
    } else {
        invert_with_noise(&field, observed, prompt, config.gamma, &grid, &z0)?
    };
    Ok(DualPaths {
        structural,
        semantic,
        condition: prompt.clone(),
    })
}

/// Midpoint of the two stored states at inversion node `step_index`.
pub fn averaged_target(paths: &DualPaths, step_index: usize) -> Result<Vec<f64>> {
    let a = paths.structural.state(step_index)?;
    let b = paths.semantic.state(step_index)?;
    Ok(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
}

/// Per-step steering diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub eta: f64,
    /// `|X_k - ybar_k|` before the step.
    pub dist_to_target: f64,
    /// `|X_{k+1} - ybar_k|` after the step, against the same target.
    pub dist_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub trajectory: Trajectory,
    pub steps: Vec<StepRecord>,
}

fn initial_latent(paths: &DualPaths, mode: InitMode) -> Vec<f64> {
    let a = paths.structural.terminal();
    let b = paths.semantic.terminal();
    match mode {
        InitMode::Structural => a.to_vec(),
        InitMode::Semantic => b.to_vec(),
        InitMode::Mixed => a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
    }
}

/// Generation from the configured noise-end latent with
/// `drift = blend(v(x, t | base), lqr(x, ybar_t, t), eta(t))`.
pub fn steered_generate(paths: &DualPaths, mixture: &GaussianMixture, config: &PdlsConfig) -> Result<Generation> {
    config.validate()?;
    let inv_grid = paths.grid();
    if paths.semantic.grid() != inv_grid {
        return Err(PdlsError::InvalidParameter {
            name: "paths",
            reason: "structural and semantic paths use different grids".into(),
        });
    }
    let n = inv_grid.n_steps();
    if n != config.n_steps || inv_grid.is_ascending() {
        return Err(PdlsError::InvalidParameter {
            name: "paths",
            reason: format!("expected a descending {}-step inversion grid", config.n_steps),
        });
    }
    let grid = inv_grid.reversed();
    let schedule = config.schedule()?;
    let field = FlowField::new(mixture).with_time_eps(config.time_eps);
    let base_cond = match config.base_condition {
        BaseCondition::UsePrompt => paths.condition.clone(),
        BaseCondition::UseNull => Condition::Null,
    };
    let eps = config.time_eps;

    let mut records: Vec<(StepRecord, Vec<f64>)> = Vec::with_capacity(n);
    let init = initial_latent(paths, config.init_mode);
    let trajectory = integrate(&init, &grid, |state, k| {
        let node = n - k;
        if inv_grid.t(node) != state.t {
            return Err(PdlsError::InvalidParameter {
                name: "paths",
                reason: format!("step {k} at t = {} does not hit a stored node", state.t),
            });
        }
        let target = averaged_target(paths, node)?;
        let eta = schedule.eta(state.t)?;
        records.push((
            StepRecord {
                step: k,
                t: state.t,
                eta,
                dist_to_target: distance(state.x, &target),
                dist_after: f64::NAN,
            },
            target.clone(),
        ));
        let t_eval = clamp_data_time(state.t, eps);
        let control = || lqr_control(state.x, &target, t_eval, eps);
        if eta == 1.0 {
            return control();
        }
        let base = if config.suppress_base {
            vec![0.0; state.x.len()]
        } else {
            field.marginal_velocity(state.x, t_eval, &base_cond)?
        };
        if eta == 0.0 {
            return Ok(base);
        }
        blend_drift(&base, &control()?, eta)
    })?;

    let steps = records
        .into_iter()
        .enumerate()
        .map(|(k, (mut rec, target))| {
            rec.dist_after = distance(&trajectory.states()[k + 1], &target);
            rec
        })
        .collect();
    Ok(Generation { trajectory, steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreReport {
    pub structural_latent_norm: f64,
    pub semantic_latent_norm: f64,
    pub init_latent_norm: f64,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restoration {
    pub output: Vec<f64>,
    pub paths: DualPaths,
    pub generation: Generation,
    pub report: RestoreReport,
}

/// Dual inversion followed by steered generation. Pure in `(inputs, seed)`.
pub fn restore(
    observed: &[f64],
    mixture: &GaussianMixture,
    prompt: &Condition,
    config: &PdlsConfig,
    seed: u64,
) -> Result<Restoration> {
    let paths = dual_invert(observed, mixture, prompt, config, seed)?;
    let generation = steered_generate(&paths, mixture, config)?;
    let report = RestoreReport {
        structural_latent_norm: paths.structural_latent().norm(),
        semantic_latent_norm: paths.semantic_latent().norm(),
        init_latent_norm: norm(generation.trajectory.initial()),
        steps: generation.steps.clone(),
    };
    Ok(Restoration {
        output: generation.trajectory.terminal().to_vec(),
        paths,
        generation,
        report,
    })
}

/// Restores a degraded image: the observation is first placed back on the
/// source pixel grid (see [`DegradationOperator::lift`]).
pub fn restore_image(
    observed: &ImageGrid,
    operator: &DegradationOperator,
    mixture: &GaussianMixture,
    prompt: &Condition,
    config: &PdlsConfig,
    seed: u64,
) -> Result<(ImageGrid, Restoration)> {
    let lifted = operator.lift(observed)?;
    check_dim(mixture.dim(), lifted.pixels().len())?;
    let restoration = restore(lifted.pixels(), mixture, prompt, config, seed)?;
    let image = ImageGrid::new(lifted.width(), lifted.height(), restoration.output.clone())?;
    Ok((image, restoration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::Component;
    use approx::assert_relative_eq;

    fn toy() -> GaussianMixture {
        GaussianMixture::uniform(
            vec![vec![2.0, 0.0], vec![-2.0, 0.0]],
            0.05,
            vec!["A".into(), "B".into()],
        )
        .unwrap()
    }

    fn diracs() -> GaussianMixture {
        GaussianMixture::uniform(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            0.0,
            vec!["A".into(), "B".into()],
        )
        .unwrap()
    }

    #[test]
    fn full_gamma_inversion_lands_on_the_noise_draw() {
        let m = toy();
        for n in [7, 28, 100] {
            let traj = invert_path(&[1.7, 0.3], &m, &Condition::Null, 1.0, n, 9).unwrap();
            let z0 = latent_noise(2, 9);
            for (a, b) in traj.terminal().iter().zip(&z0) {
                assert_relative_eq!(a, b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn zero_gamma_inversion_of_a_dirac_follows_the_straight_line() {
        // A single exemplar's flow is the line x(t) = t d + (1 - t) x0, so
        // inverting from x(1) = d lands on x0 = d (Euler reproduces lines).
        let m = GaussianMixture::new(vec![Component::new(1.0, vec![0.5, -1.5], 0.0, None)]).unwrap();
        let traj = invert_path(&[0.5, -1.5], &m, &Condition::Null, 0.0, 200, 1).unwrap();
        for (a, b) in traj.terminal().iter().zip(&[0.5, -1.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_is_seed_deterministic() {
        let m = toy();
        let a = invert_path(&[1.0, 1.0], &m, &Condition::labels(["A"]), 0.5, 28, 4).unwrap();
        let b = invert_path(&[1.0, 1.0], &m, &Condition::labels(["A"]), 0.5, 28, 4).unwrap();
        assert_eq!(a, b);
        let c = invert_path(&[1.0, 1.0], &m, &Condition::labels(["A"]), 0.5, 28, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_prompt_equals_null_path() {
        let m = toy();
        let cfg = PdlsConfig::default();
        let paths = dual_invert(&[0.4, -0.2], &m, &Condition::labels(["A", "B"]), &cfg, 3).unwrap();
        assert_eq!(paths.structural, paths.semantic);
    }

    #[test]
    fn full_gamma_latents_coincide() {
        let m = toy();
        let cfg = PdlsConfig {
            gamma: 1.0,
            ..PdlsConfig::default()
        };
        let paths = dual_invert(&[0.4, -0.2], &m, &Condition::labels(["B"]), &cfg, 3).unwrap();
        assert_eq!(paths.structural_latent(), paths.semantic_latent());
    }

    #[test]
    fn semantic_path_posterior_is_pinned_to_the_prompt() {
        let m = diracs();
        let cfg = PdlsConfig::default();
        let observed = [0.2, 0.1];
        let paths = dual_invert(&observed, &m, &Condition::labels(["A"]), &cfg, 8).unwrap();
        let field = FlowField::new(&m);
        for (k, &t) in paths.grid().nodes().iter().enumerate() {
            let t = clamp_data_time(t, cfg.time_eps);
            let sem = field
                .posterior_endpoint_mean(paths.semantic.state(k).unwrap(), t, &Condition::labels(["A"]))
                .unwrap();
            assert_eq!(sem, vec![1.0, 0.0]);
        }
        let mid = cfg.n_steps / 2;
        let r = field
            .responsibilities(paths.structural.state(mid).unwrap(), 0.5, &Condition::Null)
            .unwrap();
        assert!(r.probabilities[1] > 1e-6);
    }

    #[test]
    fn averaged_target_midpoint() {
        let g = TimeGrid::uniform(1, 1.0, 0.0).unwrap();
        let paths = DualPaths {
            structural: Trajectory::new(g.clone(), vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap(),
            semantic: Trajectory::new(g, vec![vec![2.0, 4.0], vec![1.0, 1.0]]).unwrap(),
            condition: Condition::Null,
        };
        assert_eq!(averaged_target(&paths, 0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(averaged_target(&paths, 1).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(
            averaged_target(&paths, 2),
            Err(PdlsError::IndexOutOfRange { .. })
        ));
        for k in 0..2 {
            let y = averaged_target(&paths, k).unwrap();
            assert_eq!(
                distance(&y, paths.structural.state(k).unwrap()),
                distance(&y, paths.semantic.state(k).unwrap())
            );
        }
    }

    #[test]
    fn zero_eta_ignores_stored_paths() {
        let m = toy();
        let cfg = PdlsConfig {
            eta_max: 0.0,
            ..PdlsConfig::default()
        };
        let paths = dual_invert(&[1.0, 0.5], &m, &Condition::labels(["A"]), &cfg, 2).unwrap();
        let gen = steered_generate(&paths, &m, &cfg).unwrap();
        let field = FlowField::new(&m);
        let grid = paths.grid().reversed();
        let plain = integrate(paths.structural.terminal(), &grid, |s, _| {
            field.clamped_velocity(s.x, s.t, &Condition::labels(["A"]))
        })
        .unwrap();
        assert_eq!(gen.trajectory, plain);
    }

    #[test]
    fn pure_control_contracts_every_step() {
        let m = toy();
        let cfg = PdlsConfig {
            suppress_base: true,
            eta_max: 1.0,
            ..PdlsConfig::default()
        };
        let paths = dual_invert(&[1.5, -0.4], &m, &Condition::labels(["B"]), &cfg, 12).unwrap();
        let gen = steered_generate(&paths, &m, &cfg).unwrap();
        let dt = 1.0 / cfg.n_steps as f64;
        for rec in &gen.steps {
            let factor = 1.0 - rec.eta * dt / (1.0 - rec.t);
            assert!(factor >= -1e-12);
            assert!(rec.dist_after <= rec.dist_to_target + 1e-12);
            assert!((rec.dist_after - factor * rec.dist_to_target).abs() <= 1e-12 * (1.0 + rec.dist_to_target));
        }
    }

    #[test]
    fn mixed_init_is_the_latent_midpoint() {
        let m = toy();
        let cfg = PdlsConfig {
            init_mode: InitMode::Mixed,
            ..PdlsConfig::default()
        };
        let paths = dual_invert(&[0.3, 0.3], &m, &Condition::labels(["A"]), &cfg, 5).unwrap();
        let gen = steered_generate(&paths, &m, &cfg).unwrap();
        let expected: Vec<f64> = paths
            .structural
            .terminal()
            .iter()
            .zip(paths.semantic.terminal())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        assert_eq!(gen.trajectory.initial(), expected.as_slice());
    }

    #[test]
    fn mismatched_step_count_is_rejected() {
        let m = toy();
        let cfg = PdlsConfig::default();
        let paths = dual_invert(&[0.3, 0.3], &m, &Condition::Null, &cfg, 5).unwrap();
        let other = PdlsConfig {
            n_steps: 10,
            ..cfg
        };
        assert!(steered_generate(&paths, &m, &other).is_err());
    }

    #[test]
    fn restore_is_a_pure_function_of_seed() {
        let m = toy();
        let cfg = PdlsConfig::default();
        let a = restore(&[1.0, 0.2], &m, &Condition::labels(["A"]), &cfg, 77).unwrap();
        let b = restore(&[1.0, 0.2], &m, &Condition::labels(["A"]), &cfg, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report.steps.len(), cfg.n_steps);
        assert_eq!(a.report.init_latent_norm, a.report.structural_latent_norm);
    }

    #[test]
    fn config_parsing_and_validation() {
        assert_eq!("mixed".parse::<InitMode>().unwrap(), InitMode::Mixed);
        assert_eq!("null".parse::<BaseCondition>().unwrap(), BaseCondition::UseNull);
        assert!("other".parse::<InitMode>().is_err());
        assert!(PdlsConfig {
            gamma: 1.5,
            ..PdlsConfig::default()
        }
        .validate()
        .is_err());
        assert!(PdlsConfig {
            n_steps: 0,
            ..PdlsConfig::default()
        }
        .validate()
        .is_err());
    }
}
