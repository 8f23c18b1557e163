//! Domain types: robot state, point-cloud obstacles, planner parameters and
//! scenario descriptions, plus parameter validation and nearest-point queries.
//!
//! Everything here is immutable value data once constructed and safe to share
//! read-only across concurrent rollouts.

use crate::math::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two obstacle points closer than this are treated as duplicates at load.
pub const DUPLICATE_POINT_TOL: f64 = 1e-9;
/// A scenario may not start closer than this to any obstacle point.
pub const START_CLEARANCE: f64 = 1e-6;
/// Allowed deviation of a magnetic field vector from unit norm.
pub const FIELD_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("obstacle {id}: field vector norm {norm} is not 1 within {FIELD_NORM_TOL}")]
    FieldNotUnit { id: usize, norm: f64 },
    #[error("obstacle {0} has no points")]
    EmptyObstacle(usize),
    #[error("start position within {START_CLEARANCE} m of obstacle {id} point {index}")]
    StartInsideObstacle { id: usize, index: usize },
    #[error("planar scenario requires {0}")]
    NotPlanar(&'static str),
    #[error("invalid parameter: {0}")]
    BadParam(&'static str),
}

/// Point-mass robot state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Position [m].
    pub position: Vec3,
    /// Velocity [m/s].
    pub velocity: Vec3,
    /// Time [s].
    pub time: f64,
}

impl RobotState {
    pub fn new(position: Vec3, velocity: Vec3) -> Self {
        Self { position, velocity, time: 0.0 }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// A static obstacle: a cloud of points sharing one magnetic field vector,
/// so every point pushes the robot around the obstacle in the same sense.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: usize,
    pub points: Vec<Vec3>,
    /// Unit magnetic field vector shared by all points of this obstacle.
    pub b: Vec3,
}

impl Obstacle {
    /// Builds an obstacle, dropping duplicate points (pairwise closer than
    /// [`DUPLICATE_POINT_TOL`]); duplicates would double-count forces.
    pub fn new(id: usize, points: Vec<Vec3>, b: Vec3) -> Result<Self, WorldError> {
        if !b.is_finite() {
            return Err(WorldError::NonFinite("field vector"));
        }
        let norm = b.norm();
        if (norm - 1.0).abs() > FIELD_NORM_TOL {
            return Err(WorldError::FieldNotUnit { id, norm });
        }
        let mut deduped: Vec<Vec3> = Vec::with_capacity(points.len());
        for p in points {
            if !p.is_finite() {
                return Err(WorldError::NonFinite("obstacle point"));
            }
            if deduped.iter().all(|q| q.distance(p) > DUPLICATE_POINT_TOL) {
                deduped.push(p);
            }
        }
        if deduped.is_empty() {
            return Err(WorldError::EmptyObstacle(id));
        }
        Ok(Self { id, points: deduped, b })
    }

    /// Same obstacle with the field vector replaced (virtual agents pick
    /// their own avoidance direction per obstacle).
    pub fn with_field(&self, b: Vec3) -> Obstacle {
        Obstacle { id: self.id, points: self.points.clone(), b }
    }
}

/// Planner gains and ranges.
///
/// `v_min`/`v_max` bound the robot speed (enforced by the goal force and its
/// gate), `d_max` is the obstacle activation radius, `d_min` the near-obstacle
/// radius where gain adaptation may fire, `eps_min` the enforced distance to
/// the collision ray, `xi` the goal-ball radius and `k_vlc_scale` an extra
/// scale on the attractive force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerParams {
    pub k_cf: f64,
    pub k_p: f64,
    pub k_v: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub d_max: f64,
    pub d_min: f64,
    pub eps_min: f64,
    pub xi: f64,
    pub k_vlc_scale: f64,
}

impl PlannerParams {
    /// Hard invariants: everything finite, gains and radii positive,
    /// `v_min <= v_max`, `k_vlc_scale >= 0`. Conditions that only void the
    /// guarantees (the `c_max` bound, `d_min < d_max`, positive `eps_min`
    /// and `xi`) are advisory and reported by [`validate_params`] instead.
    pub fn check(&self) -> Result<(), WorldError> {
        let all = [
            self.k_cf, self.k_p, self.k_v, self.v_min, self.v_max, self.d_max, self.d_min,
            self.eps_min, self.xi, self.k_vlc_scale,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(WorldError::NonFinite("planner parameter"));
        }
        if self.k_cf <= 0.0 {
            return Err(WorldError::BadParam("k_cf must be > 0"));
        }
        if self.k_p <= 0.0 || self.k_v <= 0.0 {
            return Err(WorldError::BadParam("k_p and k_v must be > 0"));
        }
        if self.v_min <= 0.0 || self.v_max < self.v_min {
            return Err(WorldError::BadParam("need 0 < v_min <= v_max"));
        }
        if self.d_max <= 0.0 || self.d_min <= 0.0 {
            return Err(WorldError::BadParam("d_max and d_min must be > 0"));
        }
        if self.k_vlc_scale < 0.0 {
            return Err(WorldError::BadParam("k_vlc_scale must be >= 0"));
        }
        Ok(())
    }

    /// `c_min = k_cf / v_max^2`, the gain scale at top speed.
    pub fn c_min(&self) -> f64 {
        self.k_cf / (self.v_max * self.v_max)
    }

    /// `c_max = k_cf / v_min^2`, the gain scale at minimum speed.
    pub fn c_max(&self) -> f64 {
        self.k_cf / (self.v_min * self.v_min)
    }
}

/// One advisory constraint check.
#[derive(Debug, Clone, Serialize)]
pub struct ParamCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Advisory validation report. A failing report does not prevent simulation;
/// it flags that the collision-avoidance guarantees are void.
#[derive(Debug, Clone, Serialize)]
pub struct ParamReport {
    pub checks: Vec<ParamCheck>,
}

impl ParamReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Upper bound on `c_max` required for disturbance robustness in the critical
/// quadrant: `(c_min^2 + 1) / c_min` when `c_min >= 1`, else `2`.
pub fn c_max_admissible(c_min: f64) -> f64 {
    if c_min >= 1.0 {
        (c_min * c_min + 1.0) / c_min
    } else {
        2.0
    }
}

/// Checks the advisory planner-parameter constraints.
///
/// With `v_bounds_active` the speed window `[v_min, v_max]` is in force (goal
/// force engaged) and `c` ranges over `[c_min, c_max]`; without it the
/// avoidance force leaves the speed invariant, so `c_min = c_max` and the
/// `c_max` condition holds for any single value.
pub fn validate_params(params: &PlannerParams, v_bounds_active: bool) -> ParamReport {
    let (c_min, c_max) = if v_bounds_active {
        (params.c_min(), params.c_max())
    } else {
        (params.c_min(), params.c_min())
    };
    let limit = c_max_admissible(c_min);
    let checks = vec![
        ParamCheck {
            name: "c_max_condition",
            passed: c_max < limit,
            detail: format!("c_min={c_min:.6}, c_max={c_max:.6}, required c_max < {limit:.6}"),
        },
        ParamCheck {
            name: "d_min_lt_d_max",
            passed: params.d_min < params.d_max,
            detail: format!("d_min={}, d_max={}", params.d_min, params.d_max),
        },
        ParamCheck {
            name: "eps_min_positive",
            passed: params.eps_min > 0.0,
            detail: format!("eps_min={}", params.eps_min),
        },
        ParamCheck {
            name: "xi_positive",
            passed: params.xi > 0.0,
            detail: format!("xi={}", params.xi),
        },
    ];
    ParamReport { checks }
}

/// A complete simulation scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub start: RobotState,
    pub goal: Vec3,
    pub obstacles: Vec<Obstacle>,
    pub params: PlannerParams,
    /// Integration step [s].
    pub dt: f64,
    /// Maximum simulated time [s].
    pub horizon: f64,
    /// Constrain motion to the x1-x2 plane; requires b = (0,0,+-1).
    pub planar: bool,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), WorldError> {
        self.params.check()?;
        if !self.start.position.is_finite() || !self.start.velocity.is_finite() {
            return Err(WorldError::NonFinite("start state"));
        }
        if !self.goal.is_finite() {
            return Err(WorldError::NonFinite("goal"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(WorldError::BadParam("dt must be > 0"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(WorldError::BadParam("horizon must be > 0"));
        }
        for obs in &self.obstacles {
            for (index, p) in obs.points.iter().enumerate() {
                if self.start.position.distance(*p) < START_CLEARANCE {
                    return Err(WorldError::StartInsideObstacle { id: obs.id, index });
                }
            }
        }
        if self.planar {
            let z_ok = self.start.position.z == 0.0
                && self.start.velocity.z == 0.0
                && self.goal.z == 0.0
                && self.obstacles.iter().all(|o| o.points.iter().all(|p| p.z == 0.0));
            if !z_ok {
                return Err(WorldError::NotPlanar("all third components zero"));
            }
            let b_ok = self
                .obstacles
                .iter()
                .all(|o| o.b.x == 0.0 && o.b.y == 0.0 && (o.b.z == 1.0 || o.b.z == -1.0));
            if !b_ok {
                return Err(WorldError::NotPlanar("b = (0,0,+-1) for every obstacle"));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Scenario, ScenarioLoadError> {
        let file: ScenarioFile = serde_json::from_str(json)?;
        let scenario = Scenario::try_from(file)?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile::from(self);
        serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
    }
}

#[derive(Debug, Error)]
pub enum ScenarioLoadError {
    #[error("scenario schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("scenario invalid: {0}")]
    Invalid(#[from] WorldError),
}

/// On-disk scenario document. Unknown keys are rejected.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    start: StartState,
    goal: Vec3,
    obstacles: Vec<ObstacleEntry>,
    params: PlannerParams,
    dt: f64,
    horizon: f64,
    planar: bool,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StartState {
    position: Vec3,
    velocity: Vec3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleEntry {
    points: Vec<Vec3>,
    b: Vec3,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = WorldError;

    fn try_from(file: ScenarioFile) -> Result<Self, WorldError> {
        let obstacles = file
            .obstacles
            .into_iter()
            .enumerate()
            .map(|(id, entry)| Obstacle::new(id, entry.points, entry.b))
            .collect::<Result<Vec<_>, _>>()?;
        let scenario = Scenario {
            start: RobotState::new(file.start.position, file.start.velocity),
            goal: file.goal,
            obstacles,
            params: file.params,
            dt: file.dt,
            horizon: file.horizon,
            planar: file.planar,
            seed: file.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            start: StartState { position: s.start.position, velocity: s.start.velocity },
            goal: s.goal,
            obstacles: s
                .obstacles
                .iter()
                .map(|o| ObstacleEntry { points: o.points.clone(), b: o.b })
                .collect(),
            params: s.params,
            dt: s.dt,
            horizon: s.horizon,
            planar: s.planar,
            seed: s.seed,
        }
    }
}

/// Result of a nearest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub obstacle_id: usize,
    pub point_index: usize,
    pub distance: f64,
    pub point: Vec3,
}

/// Globally nearest obstacle point to `x`. Exhaustive scan; ties broken by
/// ascending (obstacle id, point index) so replays are deterministic.
/// Returns `None` for an empty world.
pub fn nearest_obstacle_point(x: Vec3, obstacles: &[Obstacle]) -> Option<NearestPoint> {
    let mut best: Option<NearestPoint> = None;
    for obs in obstacles {
        for (index, p) in obs.points.iter().enumerate() {
            let d2 = (x - *p).norm_squared();
            let better = match &best {
                None => true,
                Some(b) => d2 < b.distance * b.distance,
            };
            if better {
                best = Some(NearestPoint {
                    obstacle_id: obs.id,
                    point_index: index,
                    distance: d2.sqrt(),
                    point: *p,
                });
            }
        }
    }
    best
}
