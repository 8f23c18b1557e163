//! Reactive circular-field motion planning for a point-mass robot among
//! point-cloud obstacles.
//!
//! The avoidance force is built from an artificial magnetic field around
//! every obstacle point; it acts orthogonally to the velocity, so it steers
//! without braking. A velocity-limited attractive force drives the robot to
//! the goal, gated so it never drags the speed below a floor away from the
//! goal. Collision avoidance is analyzed through a two-dimensional auxiliary
//! system (`R = x . x_dot`, `S = (x cross x_dot) . b`) whose collision ray
//! `S + cR = 0` is the only way to hit a point obstacle; everything the
//! planner guarantees about that system is re-checked numerically by the
//! [`verify`] suite.
//!
//! Crate layout:
//! - [`math`], [`world`]: vectors, scenario and obstacle types, validation;
//! - [`forces`]: the avoidance pipeline, attractive controller and gate;
//! - [`auxiliary`]: the auxiliary system, classification, gain adaptation
//!   and the closed-form bounds;
//! - [`sim`]: fixed-step simulation, disturbance injection, the reduced
//!   RS-plane integrator, a potential-field baseline and metrics;
//! - [`agents`]: multi-hypothesis rollouts with per-obstacle avoidance
//!   directions;
//! - [`verify`]: the executable claim suite;
//! - [`scenarios`]: the constructed scene battery.

pub mod agents;
pub mod auxiliary;
pub mod forces;
pub mod math;
pub mod scenarios;
pub mod sim;
pub mod verify;
pub mod world;

pub use math::Vec3;
pub use world::{
    nearest_obstacle_point, validate_params, Obstacle, PlannerParams, RobotState, Scenario,
};
