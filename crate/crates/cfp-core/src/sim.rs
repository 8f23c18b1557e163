//! Fixed-step simulation of the point mass under the steering force,
//! disturbance injection, the reduced RS-plane integrator, an artificial
//! potential field baseline, and trajectory metrics.
//!
//! The integrator is pinned to explicit Euler with the velocity updated
//! first and the position advanced with the pre-update velocity; determinism
//! across runs requires fixing this ordering.

use crate::auxiliary::{adapt_kcf, aux_state, AuxState};
use crate::forces::{cf_force_total, steering_force, vlc_force, ForceBreakdown};
use crate::math::Vec3;
use crate::world::{nearest_obstacle_point, NearestPoint, Obstacle, PlannerParams, RobotState, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default distance below which a run terminates as a collision; a point
/// robot never exactly meets a point obstacle in floating point.
pub const DEFAULT_COLLISION_RADIUS: f64 = 1e-3;
/// Speed below which the robot counts as stalled.
pub const STALL_SPEED: f64 = 1e-6;
/// Number of consecutive stalled steps that terminate a run.
pub const STALL_STEPS: u32 = 100;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("non-finite steering force at t={t}")]
    NonFiniteForce { t: f64 },
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}

/// Seeded piecewise-constant disturbance: a fresh uniformly random direction
/// every step, fixed magnitude `z_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceProfile {
    pub z_max: f64,
    pub seed: u64,
}

/// Simulation mode: avoidance force only, the full planner, or avoidance
/// plus an injected bounded disturbance.
#[derive(Debug, Clone, PartialEq)]
pub enum SimMode {
    CfOnly,
    Full,
    Disturbed(DisturbanceProfile),
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub mode: SimMode,
    pub collision_radius: f64,
    /// Apply near-ray gain adaptation when within `d_min` in the critical
    /// quadrant. Defaults to on for the full planner and off otherwise so
    /// that the bare avoidance dynamics can be studied unmodified.
    pub adapt_gain: bool,
    /// Keep the per-point force contributions in every recorded sample.
    pub record_per_point: bool,
    /// Record every k-th step (the final step is always kept). Termination
    /// checks and run statistics still see every step.
    pub sample_stride: usize,
}

impl SimOptions {
    pub fn new(mode: SimMode) -> Self {
        let adapt_gain = matches!(mode, SimMode::Full);
        Self {
            mode,
            collision_radius: DEFAULT_COLLISION_RADIUS,
            adapt_gain,
            record_per_point: false,
            sample_stride: 1,
        }
    }

    pub fn with_stride(mode: SimMode, sample_stride: usize) -> Self {
        Self { sample_stride: sample_stride.max(1), ..Self::new(mode) }
    }
}

/// Full-resolution extreme values tracked over a run, independent of the
/// sample stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub speed_min: f64,
    pub speed_max: f64,
    pub min_nearest_distance: f64,
    pub max_total_force: f64,
    pub max_cf_force: f64,
    /// Minimum obstacle distance over steps spent in the critical quadrant
    /// (R < 0, S > 0 w.r.t. the nearest point).
    pub min_nearest_in_critical: f64,
    /// Minimum |eps| over steps spent in the critical quadrant.
    pub min_abs_eps_in_critical: f64,
}

impl RunStats {
    fn new() -> Self {
        RunStats {
            speed_min: f64::INFINITY,
            speed_max: 0.0,
            min_nearest_distance: f64::INFINITY,
            max_total_force: 0.0,
            max_cf_force: 0.0,
            min_nearest_in_critical: f64::INFINITY,
            min_abs_eps_in_critical: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Termination {
    Horizon,
    GoalReached,
    Collision,
    Stalled,
}

/// One recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub force: ForceBreakdown,
    /// Auxiliary state w.r.t. the nearest obstacle point, when defined.
    pub aux: Option<AuxState>,
    pub nearest: Option<NearestPoint>,
    /// Injected disturbance force at this step (zero outside disturbed mode).
    pub disturbance: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminated_by: Termination,
    pub stats: RunStats,
    /// Mean wall-clock compute time per step [s].
    pub mean_step_compute_seconds: f64,
}

impl Trajectory {
    pub fn min_nearest_distance(&self) -> f64 {
        self.stats.min_nearest_distance
    }

    /// Builds a trajectory from recorded samples, deriving the statistics
    /// from them (exact when every step was recorded).
    pub fn from_samples(samples: Vec<Sample>, terminated_by: Termination) -> Trajectory {
        let mut stats = RunStats::new();
        for s in &samples {
            let speed = s.velocity.norm();
            stats.speed_min = stats.speed_min.min(speed);
            stats.speed_max = stats.speed_max.max(speed);
            stats.max_total_force = stats.max_total_force.max(s.force.f_total.norm());
            stats.max_cf_force = stats.max_cf_force.max(s.force.f_cf.norm());
            if let Some(n) = s.nearest {
                stats.min_nearest_distance = stats.min_nearest_distance.min(n.distance);
            }
            if let (Some(a), Some(n)) = (&s.aux, s.nearest) {
                if a.r < 0.0 && a.s > 0.0 {
                    stats.min_nearest_in_critical = stats.min_nearest_in_critical.min(n.distance);
                    stats.min_abs_eps_in_critical =
                        stats.min_abs_eps_in_critical.min(a.eps.abs());
                }
            }
        }
        Trajectory { samples, terminated_by, stats, mean_step_compute_seconds: 0.0 }
    }
}

/// Explicit Euler step: velocity first, position advanced with the
/// pre-update velocity. The planar flag zeroes third components.
pub fn step_euler(state: &RobotState, force: Vec3, dt: f64, planar: bool) -> RobotState {
    let mut velocity = state.velocity + force * dt;
    let mut position = state.position + state.velocity * dt;
    if planar {
        velocity.z = 0.0;
        position.z = 0.0;
    }
    RobotState { position, velocity, time: state.time + dt }
}

enum ForceLaw<'a> {
    Planner,
    Apf(&'a ApfParams),
}

/// Runs a scenario under the given mode until the horizon, the goal ball,
/// a collision, or a stall. Deterministic given the scenario seed.
pub fn simulate(scenario: &Scenario, options: &SimOptions) -> Result<Trajectory, SimError> {
    run_loop(scenario, options, ForceLaw::Planner)
}

/// Same driver with the artificial-potential-field force law (comparison
/// baseline). The mode is ignored; the APF force is always fully applied.
pub fn simulate_apf(scenario: &Scenario, apf: &ApfParams) -> Result<Trajectory, SimError> {
    let options = SimOptions::new(SimMode::Full);
    run_loop(scenario, &options, ForceLaw::Apf(apf))
}

fn run_loop(
    scenario: &Scenario,
    options: &SimOptions,
    law: ForceLaw<'_>,
) -> Result<Trajectory, SimError> {
    scenario.validate()?;
    let dt = scenario.dt;
    let n_steps = (scenario.horizon / dt).round() as u64;
    let mut state = scenario.start;
    state.time = 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let stride = options.sample_stride.max(1) as u64;
    let mut samples = Vec::with_capacity((n_steps / stride) as usize + 2);
    let mut stall_run = 0u32;
    let mut terminated_by = Termination::Horizon;
    let mut stats = RunStats::new();

    let wall_start = std::time::Instant::now();
    let mut steps_taken: u64 = 0;
    for k in 0..=n_steps {
        steps_taken = k + 1;
        let t = k as f64 * dt;
        state.time = t;
        let nearest = nearest_obstacle_point(state.position, &scenario.obstacles);

        // Near-ray gain adaptation picks an effective gain for this step.
        let mut params = scenario.params;
        let mut aux = nearest.and_then(|n| {
            aux_state(state.position - n.point, state.velocity, field_of(scenario, n.obstacle_id), params.k_cf)
                .ok()
        });
        if options.adapt_gain {
            if let (Some(a), Some(n)) = (aux, nearest) {
                let adapted = adapt_kcf(&a, params.k_cf, params.eps_min, n.distance, params.d_min);
                if adapted != params.k_cf {
                    params.k_cf = adapted;
                    aux = aux_state(
                        state.position - n.point,
                        state.velocity,
                        field_of(scenario, n.obstacle_id),
                        adapted,
                    )
                    .ok();
                }
            }
        }

        // A force-law error means the robot sits exactly on an obstacle
        // point; the collision has already happened.
        let evaluated = match law {
            ForceLaw::Planner => match &options.mode {
                SimMode::Full => {
                    steering_force(&state, &scenario.obstacles, scenario.goal, &params).ok()
                }
                SimMode::CfOnly | SimMode::Disturbed(_) => {
                    cf_force_total(&state, &scenario.obstacles, &params).ok().map(|cf| {
                        ForceBreakdown {
                            f_total: cf.force,
                            f_cf: cf.force,
                            f_vlc: Vec3::ZERO,
                            gate: true,
                            per_point: cf.per_point,
                            stalled: cf.stalled,
                            k_cf_effective: params.k_cf,
                        }
                    })
                }
            },
            ForceLaw::Apf(apf) => {
                let f = apf_baseline(&state, &scenario.obstacles, scenario.goal, apf, &scenario.params);
                Some(ForceBreakdown {
                    f_total: f,
                    f_cf: Vec3::ZERO,
                    f_vlc: f,
                    gate: true,
                    per_point: Vec::new(),
                    stalled: false,
                    k_cf_effective: 0.0,
                })
            }
        };
        let mut force = match evaluated {
            Some(f) => f,
            None => {
                terminated_by = Termination::Collision;
                break;
            }
        };
        if !options.record_per_point {
            force.per_point.clear();
        }
        if !force.f_total.is_finite() {
            return Err(SimError::NonFiniteForce { t });
        }

        let disturbance = match &options.mode {
            SimMode::Disturbed(profile) if matches!(law, ForceLaw::Planner) => {
                random_direction(&mut rng, scenario.planar) * profile.z_max
            }
            _ => Vec3::ZERO,
        };

        let gate = force.gate;
        let f_total = force.f_total;

        let speed = state.speed();
        stats.speed_min = stats.speed_min.min(speed);
        stats.speed_max = stats.speed_max.max(speed);
        stats.max_total_force = stats.max_total_force.max(f_total.norm());
        stats.max_cf_force = stats.max_cf_force.max(force.f_cf.norm());
        if let Some(n) = nearest {
            stats.min_nearest_distance = stats.min_nearest_distance.min(n.distance);
        }
        if let (Some(a), Some(n)) = (&aux, nearest) {
            if a.r < 0.0 && a.s > 0.0 {
                stats.min_nearest_in_critical = stats.min_nearest_in_critical.min(n.distance);
                stats.min_abs_eps_in_critical = stats.min_abs_eps_in_critical.min(a.eps.abs());
            }
        }

        let mut done = k == n_steps;
        if let Some(n) = nearest {
            if n.distance < options.collision_radius {
                terminated_by = Termination::Collision;
                done = true;
            }
        }
        if !done && (scenario.goal - state.position).norm() <= scenario.params.xi {
            terminated_by = Termination::GoalReached;
            done = true;
        }
        if !done {
            if gate && speed < STALL_SPEED {
                stall_run += 1;
                if stall_run >= STALL_STEPS {
                    terminated_by = Termination::Stalled;
                    done = true;
                }
            } else {
                stall_run = 0;
            }
        }

        if done || k % stride == 0 {
            samples.push(Sample {
                t,
                position: state.position,
                velocity: state.velocity,
                force,
                aux,
                nearest,
                disturbance,
            });
        }
        if done {
            break;
        }

        state = step_euler(&state, f_total + disturbance, dt, scenario.planar);
    }
    let elapsed = wall_start.elapsed().as_secs_f64();
    let steps = steps_taken.max(1) as f64;
    Ok(Trajectory { samples, terminated_by, stats, mean_step_compute_seconds: elapsed / steps })
}

fn field_of(scenario: &Scenario, obstacle_id: usize) -> Vec3 {
    scenario
        .obstacles
        .iter()
        .find(|o| o.id == obstacle_id)
        .map(|o| o.b)
        .unwrap_or(Vec3::Z)
}

fn random_direction(rng: &mut ChaCha8Rng, planar: bool) -> Vec3 {
    if planar {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        Vec3::new(theta.cos(), theta.sin(), 0.0)
    } else {
        // uniform direction on the sphere
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-6 && n <= 1.0 {
                return v / n;
            }
        }
    }
}

/// Parameters of the classic inverse-distance repulsive field used by the
/// comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ApfParams {
    /// Repulsion gain.
    pub eta: f64,
    /// Repulsion influence radius [m].
    pub rho0: f64,
}

/// Attractive velocity-limited term plus per-point repulsion
/// `eta (1/rho - 1/rho0) / rho^2` along the distance gradient for every
/// point within `rho0`.
pub fn apf_baseline(
    state: &RobotState,
    obstacles: &[Obstacle],
    goal: Vec3,
    apf: &ApfParams,
    params: &PlannerParams,
) -> Vec3 {
    let mut force = vlc_force(state, goal, params.k_p, params.k_v, params.v_max);
    for obs in obstacles {
        for p in &obs.points {
            let d = state.position - *p;
            let rho = d.norm();
            if rho >= apf.rho0 || rho < crate::forces::AT_POINT_TOL {
                continue;
            }
            let magnitude = apf.eta * (1.0 / rho - 1.0 / apf.rho0) / (rho * rho);
            force += (d / rho) * magnitude;
        }
    }
    force
}

/// Headline evaluation numbers of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Total path length [m].
    pub path_length: f64,
    /// Elapsed simulated time [s].
    pub duration: f64,
    /// Smallest robot-to-obstacle-point distance over the run [m].
    pub min_obstacle_distance: f64,
    /// Mean wall-clock compute time per step [s].
    pub mean_step_compute_time: f64,
}

pub fn metrics(trajectory: &Trajectory, obstacles: &[Obstacle]) -> Metrics {
    let samples = &trajectory.samples;
    let path_length = samples
        .windows(2)
        .map(|w| (w[1].position - w[0].position).norm())
        .sum();
    let duration = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let min_obstacle_distance = samples
        .iter()
        .filter_map(|s| nearest_obstacle_point(s.position, obstacles).map(|n| n.distance))
        .fold(f64::INFINITY, f64::min);
    Metrics {
        path_length,
        duration,
        min_obstacle_distance,
        mean_step_compute_time: trajectory.mean_step_compute_seconds,
    }
}

/// Optional disturbance injection for the reduced RS integrator: per-step
/// random planar direction, magnitude `z_max`, scaled by the reconstructed
/// obstacle distance.
#[derive(Debug, Clone, PartialEq)]
pub struct RsDisturbance {
    pub z_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RsConfig {
    pub r0: f64,
    pub s0: f64,
    pub v_norm: f64,
    pub k_cf: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Radius around the RS origin flagged as a collision.
    pub origin_tol: f64,
    /// Stop once `R >= 0` with the radius back at its initial value; from
    /// there the barrier can only shrink, so no collision can follow.
    pub stop_when_safe: bool,
    pub disturbance: Option<RsDisturbance>,
}

impl RsConfig {
    pub fn new(r0: f64, s0: f64, v_norm: f64, k_cf: f64, dt: f64, horizon: f64) -> Self {
        Self {
            r0,
            s0,
            v_norm,
            k_cf,
            dt,
            horizon,
            origin_tol: DEFAULT_COLLISION_RADIUS * v_norm,
            stop_when_safe: false,
            disturbance: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RsTrace {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    /// Time at which the trace entered the origin ball, if it did.
    pub collided_at: Option<f64>,
}

impl RsTrace {
    /// First time R >= 0 or S <= 0, given a start inside the critical
    /// quadrant (R < 0, S > 0).
    pub fn quadrant_exit_time(&self) -> Option<f64> {
        self.t
            .iter()
            .zip(self.r.iter().zip(self.s.iter()))
            .find(|(_, (r, s))| **r >= 0.0 || **s <= 0.0)
            .map(|(t, _)| *t)
    }
}

/// Integrates the two-dimensional (R, S) system directly with the same
/// explicit Euler scheme as the full simulator. The speed is held constant
/// (with disturbances this is the fixed-speed abstraction of the plane; the
/// full simulator is the ground truth for speed drift).
pub fn simulate_rs(cfg: &RsConfig) -> RsTrace {
    let n_steps = (cfg.horizon / cfg.dt).round() as u64;
    let v2 = cfg.v_norm * cfg.v_norm;
    let mut rng = cfg
        .disturbance
        .as_ref()
        .map(|d| ChaCha8Rng::seed_from_u64(d.seed));
    let (mut r, mut s) = (cfg.r0, cfg.s0);
    let mut trace = RsTrace {
        t: Vec::with_capacity(n_steps as usize + 1),
        r: Vec::with_capacity(n_steps as usize + 1),
        s: Vec::with_capacity(n_steps as usize + 1),
        collided_at: None,
    };
    let rho0 = cfg.r0.hypot(cfg.s0);
    for k in 0..=n_steps {
        let t = k as f64 * cfg.dt;
        trace.t.push(t);
        trace.r.push(r);
        trace.s.push(s);
        let rho2 = r * r + s * s;
        if rho2.sqrt() < cfg.origin_tol {
            trace.collided_at = Some(t);
            break;
        }
        if cfg.stop_when_safe && r >= 0.0 && rho2 >= rho0 * rho0 {
            break;
        }
        if k == n_steps {
            break;
        }
        let mut r_dot = cfg.k_cf * r * s / rho2 + v2;
        let mut s_dot = -cfg.k_cf * r * r / rho2;
        if let (Some(rng), Some(d)) = (rng.as_mut(), cfg.disturbance.as_ref()) {
            // ||x|| = sqrt(R^2+S^2)/v; the two disturbance terms are the
            // in-plane components of x-scaled z.
            let x_norm = rho2.sqrt() / cfg.v_norm;
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            r_dot += x_norm * d.z_max * theta.cos();
            s_dot += x_norm * d.z_max * theta.sin();
        }
        r += cfg.dt * r_dot;
        s += cfg.dt * s_dot;
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use approx::assert_relative_eq;

    #[test]
    fn euler_step_order_is_pinned() {
        let state = RobotState::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
        let next = step_euler(&state, Vec3::new(0.0, 1.0, 0.0), 1e-3, true);
        // position advances with the old velocity
        assert_eq!(next.position, Vec3::new(1e-3, 0.0, 0.0));
        assert_eq!(next.velocity, Vec3::new(1.0, 1e-3, 0.0));
        assert_eq!(next.time, 1e-3);
    }

    #[test]
    fn euler_constant_force_matches_analytic_velocity() {
        let mut state = RobotState::new(Vec3::ZERO, Vec3::ZERO);
        let force = Vec3::new(0.0, 1.0, 0.0);
        let dt = 1e-3;
        let n = 1000;
        for _ in 0..n {
            state = step_euler(&state, force, dt, true);
        }
        assert_relative_eq!(state.velocity.y, n as f64 * dt, epsilon = 1e-12);
    }

    #[test]
    fn obstacle_free_full_mode_reaches_goal() {
        let scenario = scenarios::obstacle_free();
        let traj = simulate(&scenario, &SimOptions::new(SimMode::Full)).unwrap();
        assert_eq!(traj.terminated_by, Termination::GoalReached);
        let last = traj.samples.last().unwrap();
        assert!((scenario.goal - last.position).norm() <= scenario.params.xi);
    }

    #[test]
    fn horizon_run_has_expected_sample_count() {
        let mut scenario = scenarios::head_on(1.0);
        scenario.horizon = 0.5;
        scenario.dt = 1e-3;
        let traj = simulate(&scenario, &SimOptions::new(SimMode::CfOnly)).unwrap();
        assert_eq!(traj.terminated_by, Termination::Horizon);
        assert_eq!(traj.samples.len(), 501);
        // uniform spacing
        for w in traj.samples.windows(2) {
            assert_relative_eq!(w[1].t - w[0].t, 1e-3, epsilon = 1e-12);
        }
    }

    #[test]
    fn cf_only_speed_drift_shrinks_with_dt() {
        let drift_at = |dt: f64| {
            let mut scenario = scenarios::head_on(1.0);
            scenario.dt = dt;
            let traj = simulate(&scenario, &SimOptions::with_stride(SimMode::CfOnly, 100)).unwrap();
            let v0 = scenario.start.speed();
            ((traj.stats.speed_max - v0).abs()).max((v0 - traj.stats.speed_min).abs()) / v0
        };
        let coarse = drift_at(1e-3);
        let fine = drift_at(1e-4);
        assert!(coarse < 1e-2, "drift {coarse} at mcontrol rate");
        assert!(fine < coarse / 5.0, "first-order convergence: {coarse} -> {fine}");
    }

    #[test]
    fn metrics_straight_segment_and_arc() {
        let scenario = scenarios::obstacle_free();
        let traj = simulate(&scenario, &SimOptions::new(SimMode::Full)).unwrap();
        let m = metrics(&traj, &scenario.obstacles);
        assert!(m.min_obstacle_distance.is_infinite());
        assert!(m.path_length > 0.0);

        // synthetic straight 1 m segment at 1 m/s
        let mk = |t: f64| Sample {
            t,
            position: Vec3::new(t, 0.0, 0.0),
            velocity: Vec3::new(1.0, 0.0, 0.0),
            force: ForceBreakdown {
                f_cf: Vec3::ZERO,
                f_vlc: Vec3::ZERO,
                gate: true,
                f_total: Vec3::ZERO,
                per_point: Vec::new(),
                stalled: false,
                k_cf_effective: 1.0,
            },
            aux: None,
            nearest: None,
            disturbance: Vec3::ZERO,
        };
        let traj = Trajectory::from_samples(
            (0..=100).map(|k| mk(k as f64 * 0.01)).collect(),
            Termination::Horizon,
        );
        let m = metrics(&traj, &[]);
        assert_relative_eq!(m.path_length, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.duration, 1.0, epsilon = 1e-12);

        // circle arc sampled at dt: length within 0.1% of the analytic value
        let n = 10_000;
        let samples: Vec<Sample> = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::PI; // half circle
                Sample {
                    position: Vec3::new(t.cos(), t.sin(), 0.0),
                    ..mk(t)
                }
            })
            .collect();
        let traj = Trajectory::from_samples(samples, Termination::Horizon);
        let m = metrics(&traj, &[]);
        assert_relative_eq!(m.path_length, std::f64::consts::PI, max_relative = 1e-3);
    }

    #[test]
    fn rs_lower_half_s_never_increases() {
        let trace = simulate_rs(&RsConfig::new(0.0, -1.0, 1.0, 1.0, 1e-4, 5.0));
        for w in trace.s.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(trace.collided_at.is_none());
    }

    #[test]
    fn rs_ray_start_reaches_origin_at_predicted_time() {
        let s0 = std::f64::consts::SQRT_2 / 2.0;
        let cfg = RsConfig {
            origin_tol: 1e-4,
            ..RsConfig::new(-s0, s0, 1.0, 1.0, 1e-5, 3.0)
        };
        let trace = simulate_rs(&cfg);
        let t = trace.collided_at.expect("on-ray start must collide");
        let predicted = crate::auxiliary::collision_time_on_ray(s0, 1.0, 1.0).unwrap();
        assert_relative_eq!(t, predicted, max_relative = 1e-3);
    }

    #[test]
    fn disturbed_mode_is_seeded_and_reproducible() {
        let mut scenario = scenarios::head_on(1.0);
        scenario.horizon = 0.5;
        let opts = SimOptions::new(SimMode::Disturbed(DisturbanceProfile { z_max: 0.05, seed: 9 }));
        let a = simulate(&scenario, &opts).unwrap();
        let b = simulate(&scenario, &opts).unwrap();
        assert_eq!(a.samples.last().unwrap().position, b.samples.last().unwrap().position);
        assert!(a.samples[0].disturbance.norm() > 0.0);
        assert_relative_eq!(a.samples[0].disturbance.norm(), 0.05, epsilon = 1e-12);
    }

    #[test]
    fn apf_far_from_obstacles_is_pure_attraction() {
        let scenario = scenarios::head_on(1.0);
        let state = RobotState::new(Vec3::new(-30.0, 0.0, 0.0), Vec3::ZERO);
        let apf = ApfParams { eta: 1.0, rho0: 1.0 };
        let f = apf_baseline(&state, &scenario.obstacles, scenario.goal, &apf, &scenario.params);
        let attraction = vlc_force(
            &state,
            scenario.goal,
            scenario.params.k_p,
            scenario.params.k_v,
            scenario.params.v_max,
        );
        assert_eq!(f, attraction);
    }
}
