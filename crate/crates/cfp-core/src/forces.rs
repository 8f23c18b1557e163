//! Force laws: the per-point circular-field pipeline and its superposition,
//! the velocity-limited attractive controller, its gate, and the combined
//! steering force.
//!
//! All functions are pure; they may be called concurrently against a shared
//! read-only world.

use crate::math::Vec3;
use crate::world::{Obstacle, PlannerParams, RobotState};
use thiserror::Error;

/// Below this distance to an obstacle point the force laws are undefined;
/// a collision has already happened.
pub const AT_POINT_TOL: f64 = 1e-12;
/// Below this speed the circular field has no defined direction; the force is
/// zeroed and the evaluation is flagged as stalled.
pub const STALL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ForceError {
    #[error("robot at obstacle point (distance {distance:.3e})")]
    AtObstaclePoint { distance: f64 },
}

/// A field or force value plus the stalled-velocity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: Vec3,
    pub stalled: bool,
}

/// Artificial current at an obstacle point: `(d / ||d||) x b`, where `d` is
/// the robot-to-point distance vector. Orthogonal to both `d` and `b`.
pub fn artificial_current(d: Vec3, b: Vec3) -> Result<Vec3, ForceError> {
    let norm = d.norm();
    if norm < AT_POINT_TOL {
        return Err(ForceError::AtObstaclePoint { distance: norm });
    }
    Ok((d / norm).cross(b))
}

/// Artificial magnetic field of an obstacle point:
/// `(k_cf / ||d||) * c x (d_dot / ||d_dot||)` with `c` the artificial current.
/// A stalled relative velocity yields a zero field with the diagnostic set.
pub fn magnetic_field(d: Vec3, d_dot: Vec3, b: Vec3, k_cf: f64) -> Result<FieldEval, ForceError> {
    let current = artificial_current(d, b)?;
    let speed = d_dot.norm();
    if speed < STALL_TOL {
        return Ok(FieldEval { value: Vec3::ZERO, stalled: true });
    }
    let value = (k_cf / d.norm()) * current.cross(d_dot / speed);
    Ok(FieldEval { value, stalled: false })
}

/// Circular-field force of a single obstacle point:
/// `(d_dot / ||d_dot||) x B` inside the activation radius `d_max`, zero
/// outside (boundary inclusive).
pub fn cf_force_point(
    d: Vec3,
    d_dot: Vec3,
    b: Vec3,
    k_cf: f64,
    d_max: f64,
) -> Result<FieldEval, ForceError> {
    let norm = d.norm();
    if norm < AT_POINT_TOL {
        return Err(ForceError::AtObstaclePoint { distance: norm });
    }
    if norm > d_max {
        return Ok(FieldEval { value: Vec3::ZERO, stalled: false });
    }
    let field = magnetic_field(d, d_dot, b, k_cf)?;
    if field.stalled {
        return Ok(field);
    }
    let speed = d_dot.norm();
    Ok(FieldEval { value: (d_dot / speed).cross(field.value), stalled: false })
}

/// Contribution of one obstacle point to the total avoidance force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointContribution {
    pub obstacle_id: usize,
    pub point_index: usize,
    pub force: Vec3,
}

/// Summed circular-field force over all in-range points.
#[derive(Debug, Clone, PartialEq)]
pub struct CfForce {
    pub force: Vec3,
    /// In-range per-point contributions; points beyond `d_max` contribute
    /// zero and are omitted.
    pub per_point: Vec<PointContribution>,
    pub stalled: bool,
}

/// Superposition of the per-point forces over all obstacles. Obstacles are
/// static, so the relative velocity of every point equals the robot velocity.
pub fn cf_force_total(
    state: &RobotState,
    obstacles: &[Obstacle],
    params: &PlannerParams,
) -> Result<CfForce, ForceError> {
    let d_max2 = params.d_max * params.d_max;
    let mut total = Vec3::ZERO;
    let mut per_point = Vec::new();
    let mut stalled = false;
    for obs in obstacles {
        for (point_index, p) in obs.points.iter().enumerate() {
            let d = state.position - *p;
            if d.norm_squared() > d_max2 {
                continue;
            }
            let eval = cf_force_point(d, state.velocity, obs.b, params.k_cf, params.d_max)?;
            stalled |= eval.stalled;
            total += eval.value;
            per_point.push(PointContribution {
                obstacle_id: obs.id,
                point_index,
                force: eval.value,
            });
        }
    }
    Ok(CfForce { force: total, per_point, stalled })
}

/// Velocity-limited attractive force toward the goal:
/// `-k_v (x_dot - nu * v_d)` with desired velocity `v_d = (k_p/k_v)(x_g - x)`
/// and `nu = min(1, v_max/||v_d||)`; `nu = 1` at the goal so the force
/// reduces to pure damping there.
pub fn vlc_force(state: &RobotState, goal: Vec3, k_p: f64, k_v: f64, v_max: f64) -> Vec3 {
    let v_d = (goal - state.position) * (k_p / k_v);
    let v_d_norm = v_d.norm();
    let nu = if v_d_norm > 0.0 { (v_max / v_d_norm).min(1.0) } else { 1.0 };
    -k_v * (state.velocity - nu * v_d)
}

/// Gate on the attractive force: opens (returns `false`, meaning factor 0)
/// exactly when the attraction would brake the robot below `v_min` while the
/// goal is still farther than `xi`.
pub fn k_vlc_gate(state: &RobotState, goal: Vec3, f_vlc: Vec3, v_min: f64, xi: f64) -> bool {
    let braking = state.velocity.dot(f_vlc) <= 0.0;
    let slow = state.speed() <= v_min;
    let far = (goal - state.position).norm() > xi;
    !(braking && slow && far)
}

/// Full decomposition of the steering force at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceBreakdown {
    pub f_cf: Vec3,
    pub f_vlc: Vec3,
    /// Gate factor: `true` = 1, `false` = 0.
    pub gate: bool,
    /// `f_cf + k_vlc_scale * gate * f_vlc`.
    pub f_total: Vec3,
    pub per_point: Vec<PointContribution>,
    pub stalled: bool,
    /// Circular-field gain actually used (differs from `params.k_cf` when
    /// near-ray gain adaptation fired).
    pub k_cf_effective: f64,
}

impl ForceBreakdown {
    pub fn gate_factor(&self) -> f64 {
        if self.gate {
            1.0
        } else {
            0.0
        }
    }
}

/// Combined steering force: avoidance superposition plus the gated, scaled
/// attractive force.
pub fn steering_force(
    state: &RobotState,
    obstacles: &[Obstacle],
    goal: Vec3,
    params: &PlannerParams,
) -> Result<ForceBreakdown, ForceError> {
    let cf = cf_force_total(state, obstacles, params)?;
    let f_vlc = vlc_force(state, goal, params.k_p, params.k_v, params.v_max);
    let gate = k_vlc_gate(state, goal, f_vlc, params.v_min, params.xi);
    let gate_factor = if gate { 1.0 } else { 0.0 };
    Ok(ForceBreakdown {
        f_total: cf.force + params.k_vlc_scale * gate_factor * f_vlc,
        f_cf: cf.force,
        f_vlc,
        gate,
        per_point: cf.per_point,
        stalled: cf.stalled,
        k_cf_effective: params.k_cf,
    })
}
