//! The two-dimensional auxiliary system behind the collision-avoidance
//! analysis.
//!
//! With the obstacle point at the origin of the frame, `R = x . x_dot`
//! measures approach/retreat and `S = (x cross x_dot) . b` alignment with the
//! intended circulation. For planar motion with `b` orthogonal to the plane,
//! `R^2 + S^2 = ||x||^2 ||x_dot||^2`, the barrier `V_B = 1/||x||^2` stays
//! finite exactly when no collision occurs, and the signed distance to the
//! collision ray `eps = S + c R` (with `c = k_cf/||x_dot||^2`) is
//! non-decreasing in magnitude inside the critical quadrant. This module
//! exposes those quantities together with every closed-form bound used by the
//! verification suite.

use crate::math::Vec3;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AuxError {
    #[error("collision: auxiliary state undefined at the origin")]
    Collision,
    #[error("domain error: {0}")]
    Domain(&'static str),
}

/// Snapshot of the auxiliary system w.r.t. one obstacle point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxState {
    /// `x . x_dot` [m^2/s].
    pub r: f64,
    /// `(x cross x_dot) . b` [m^2/s].
    pub s: f64,
    /// `k_cf / ||x_dot||^2`, dimensionless gain scale.
    pub c: f64,
    /// Signed distance to the collision ray in the S direction: `s + c r`.
    pub eps: f64,
    /// Barrier value `1 / ||x||^2` [1/m^2].
    pub v_b: f64,
    /// Speed `||x_dot||` [m/s].
    pub v_norm: f64,
}

impl AuxState {
    /// Default tolerance for "exactly on the collision ray": the ray is a
    /// measure-zero set, so exact-zero tests are meaningless in floating
    /// point.
    pub fn ray_tol(&self) -> f64 {
        1e-9 * self.r.hypot(self.s)
    }
}

/// Initial-condition classes of the auxiliary system. The four classes
/// partition all (R, S, eps).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum IcClass {
    /// `R >= 0`: already departing; the barrier never grows.
    MovingAway,
    /// `S <= 0, R < 0`: velocity already follows the intended circulation.
    /// The `S = 0` edge belongs here: `S` is strictly decreasing there.
    FollowingField,
    /// `R < 0, S > 0` off the ray: the force must turn the robot around
    /// first, but the ray distance `|eps|` never shrinks.
    CriticalOffRay,
    /// `R < 0, S > 0` with `eps = 0`: inevitable collision.
    CollisionRay,
}

/// Auxiliary state of the robot relative to an obstacle point at the origin
/// of `x`'s frame (`x` is the robot-to-point distance vector).
pub fn aux_state(x: Vec3, x_dot: Vec3, b: Vec3, k_cf: f64) -> Result<AuxState, AuxError> {
    let x_norm2 = x.norm_squared();
    if x_norm2 <= 0.0 {
        return Err(AuxError::Collision);
    }
    let v2 = x_dot.norm_squared();
    if v2 <= 0.0 {
        return Err(AuxError::Domain("zero velocity"));
    }
    let r = x.dot(x_dot);
    let s = x.cross(x_dot).dot(b);
    let c = k_cf / v2;
    Ok(AuxState { r, s, c, eps: s + c * r, v_b: 1.0 / x_norm2, v_norm: v2.sqrt() })
}

/// Assigns the auxiliary state to its initial-condition class. `ray_tol`
/// widens the (measure-zero) collision ray to a numerically meaningful band.
pub fn classify(aux: &AuxState, ray_tol: f64) -> IcClass {
    if aux.r >= 0.0 {
        IcClass::MovingAway
    } else if aux.s <= 0.0 {
        IcClass::FollowingField
    } else if aux.eps.abs() <= ray_tol {
        IcClass::CollisionRay
    } else {
        IcClass::CriticalOffRay
    }
}

/// Time derivatives of (R, S).
///
/// Undisturbed: `R_dot = k_cf R S / (R^2+S^2) + ||x_dot||^2` and
/// `S_dot = -k_cf R^2 / (R^2+S^2)`. A disturbance force `z` adds `x . z` to
/// `R_dot` and `(x cross z) . b` to `S_dot`.
pub fn rs_derivatives(
    aux: &AuxState,
    v_norm: f64,
    k_cf: f64,
    disturbance: Option<(Vec3, Vec3, Vec3)>,
) -> Result<(f64, f64), AuxError> {
    let rho2 = aux.r * aux.r + aux.s * aux.s;
    if rho2 <= 0.0 {
        return Err(AuxError::Collision);
    }
    let mut r_dot = k_cf * aux.r * aux.s / rho2 + v_norm * v_norm;
    let mut s_dot = -k_cf * aux.r * aux.r / rho2;
    if let Some((x, z, b)) = disturbance {
        r_dot += x.dot(z);
        s_dot += x.cross(z).dot(b);
    }
    Ok((r_dot, s_dot))
}

/// Time until the origin is reached from an on-ray state with `S(0) = s0`:
/// `s0 (1 + c^2) / k_cf`. On the ray `S` decreases at the constant rate
/// `k_cf / (1 + c^2)`.
pub fn collision_time_on_ray(s0: f64, c: f64, k_cf: f64) -> Result<f64, AuxError> {
    if s0 <= 0.0 {
        return Err(AuxError::Domain("on-ray state requires S(0) > 0"));
    }
    Ok(s0 * (1.0 + c * c) / k_cf)
}

/// Near-ray gain adaptation. Active only in the critical quadrant within
/// `d_min` of the point; when `|eps| < eps_min` the gain is shifted so that
/// the recomputed ray distance equals exactly `eps_min * sgn(eps)`. The
/// result may be negative, which is the same as flipping the avoidance
/// direction `b`.
pub fn adapt_kcf(aux: &AuxState, k_cf: f64, eps_min: f64, distance: f64, d_min: f64) -> f64 {
    let active = aux.r < 0.0 && aux.s > 0.0 && distance <= d_min;
    if !active || aux.eps.abs() >= eps_min {
        return k_cf;
    }
    // sgn(0) treated as +1 so an exactly-on-ray state is pushed off the ray.
    let sgn = if aux.eps < 0.0 { -1.0 } else { 1.0 };
    let v2 = aux.v_norm * aux.v_norm;
    k_cf - sgn * (eps_min - aux.eps.abs()) * v2 / aux.r.abs()
}

/// Guaranteed lower bound on the robot-point distance over the critical
/// phase, from the initial ray distance. Zero on the ray.
pub fn min_distance_bound(aux0: &AuxState, disturbed: bool, v_max: f64, c_max: f64) -> f64 {
    if aux0.eps == 0.0 {
        return 0.0;
    }
    if disturbed {
        return aux0.eps.abs() / (2.0 * v_max * c_max.max(1.0));
    }
    if aux0.eps < 0.0 {
        aux0.eps.abs() / (aux0.c * aux0.v_norm)
    } else {
        aux0.eps.abs() / aux0.v_norm
    }
}

/// Lower bound on `R S / (R^2 + S^2)` over `R < 0, S > 0, c >= c_min,
/// S + cR > 0`: `-c_min / (c_min^2 + 1)` when `c_min >= 1`, else `-1/2`.
pub fn rs_ratio_lower_bound(c_min: f64) -> f64 {
    if c_min >= 1.0 {
        -c_min / (c_min * c_min + 1.0)
    } else {
        -0.5
    }
}

/// Inputs for the per-class disturbance budget.
#[derive(Debug, Clone, Copy)]
pub struct BudgetInputs {
    pub class: IcClass,
    /// Initial robot-point distance [m].
    pub x0_norm: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub k_cf: f64,
    pub s0: f64,
    pub r0: f64,
    pub eps0: f64,
    /// Largest distance considered by the analysis [m].
    pub x_max: f64,
}

/// Largest disturbance magnitude under which the class guarantee provably
/// survives. Zero on the collision ray.
pub fn disturbance_budget(inp: &BudgetInputs) -> f64 {
    let BudgetInputs { x0_norm, v_min, v_max, c_min, c_max, k_cf, s0, eps0, x_max, .. } = *inp;
    match inp.class {
        IcClass::MovingAway => v_min * v_min / x_max,
        IcClass::FollowingField => {
            let a = k_cf * v_min * v_min / (x0_norm * v_max * v_max);
            let b = v_min * v_min / (2.0 * x0_norm);
            let c = -v_min * s0 / (4.0 * x0_norm * x0_norm);
            a.min(b).min(c)
        }
        IcClass::CriticalOffRay => {
            let e = eps0.abs();
            if eps0 < 0.0 {
                let quad = k_cf / (2.0 * x0_norm * (1.0 + c_max * c_max));
                let dist = k_cf * e
                    / (4.0 * x0_norm * x0_norm * v_max * (1.0 + 3.0 * c_max) * (1.0 + c_max * c_max));
                quad.min(dist)
            } else if c_min >= 1.0 {
                let gain = c_min * c_min - c_min * c_max + 1.0;
                let quad = k_cf * gain / (2.0 * x0_norm * c_max * (c_min * c_min + 1.0));
                let dist = k_cf * e * gain
                    / (4.0
                        * x0_norm
                        * x0_norm
                        * v_max
                        * c_max
                        * (1.0 + c_min * c_min)
                        * (1.0 + 3.0 * c_max));
                quad.min(dist)
            } else {
                let quad = k_cf * (2.0 - c_max) / (4.0 * x0_norm * c_max);
                let dist = k_cf * e * (2.0 - c_max)
                    / (8.0 * x0_norm * x0_norm * v_max * c_max * (1.0 + 3.0 * c_max));
                quad.min(dist)
            }
        }
        IcClass::CollisionRay => 0.0,
    }
}

/// Uniform multiplicative barrier bound for initial conditions with
/// `|S(0)| >= c_tilde |R(0)|`: `V_B(t) <= V_B(0) * 8 v_max^2 / (v_min^2
/// max(1, c_tilde^2))`.
pub fn uniform_barrier_bound(v_b0: f64, v_min: f64, v_max: f64, c_tilde: f64) -> f64 {
    v_b0 * 8.0 * v_max * v_max / (v_min * v_min * (c_tilde * c_tilde).max(1.0))
}

/// Closed-form upper bounds on the time to leave a quadrant of the RS plane.
/// These are proof instruments used by the verification suite, not runtime
/// controls.
pub mod exit_bounds {
    /// Critical quadrant, `eps < 0`, undisturbed: exit through `S = 0` by
    /// `S(0)(1 + c^2)/k_cf`.
    pub fn critical_neg_eps(s0: f64, c: f64, k_cf: f64) -> f64 {
        s0 * (1.0 + c * c) / k_cf
    }

    /// Critical quadrant, `eps > 0`, `c >= 1`, undisturbed: exit through
    /// `R = 0` by `-R(0)(c + c^3)/k_cf`.
    pub fn critical_pos_eps_high_c(r0: f64, c: f64, k_cf: f64) -> f64 {
        -r0 * (c + c * c * c) / k_cf
    }

    /// Critical quadrant, `eps > 0`, `c < 1`, undisturbed: exit through
    /// `R = 0` by `-2 R(0)/k_cf`.
    pub fn critical_pos_eps_low_c(r0: f64, k_cf: f64) -> f64 {
        -2.0 * r0 / k_cf
    }

    /// Lower-left quadrant, disturbed, phase 1 (drive `R` up to
    /// `-||x(0)|| v_min`).
    pub fn following_field_phase1(x0_norm: f64, r0: f64, v_min: f64) -> f64 {
        -2.0 * x0_norm / v_min - 2.0 * r0 / (v_min * v_min)
    }

    /// Lower-left quadrant, disturbed, phase 2 (from `-||x(0)|| v_min` to
    /// `R = 0`).
    pub fn following_field_phase2(x0_norm: f64, v_min: f64) -> f64 {
        2.0 * x0_norm / v_min
    }

    /// Total lower-left-quadrant exit bound (phases 1 + 2 telescope).
    pub fn following_field_total(r0: f64, v_min: f64) -> f64 {
        -2.0 * r0 / (v_min * v_min)
    }

    /// Critical quadrant, `eps < 0`, disturbed at the admissible budget.
    pub fn critical_neg_eps_disturbed(s0: f64, c_max: f64, k_cf: f64) -> f64 {
        2.0 * s0 * (1.0 + c_max * c_max) / k_cf
    }

    /// Critical quadrant, `eps > 0`, `c_min >= 1`, disturbed.
    pub fn critical_pos_eps_high_c_disturbed(r0: f64, c_min: f64, c_max: f64, k_cf: f64) -> f64 {
        -2.0 * r0 * c_max * (c_min * c_min + 1.0)
            / (k_cf * (c_min * c_min - c_min * c_max + 1.0))
    }

    /// Critical quadrant, `eps > 0`, `c_min < 1`, disturbed.
    pub fn critical_pos_eps_low_c_disturbed(r0: f64, c_max: f64, k_cf: f64) -> f64 {
        -4.0 * r0 * c_max / (k_cf * (2.0 - c_max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn aux_state_axis_cases() {
        // circling: R = 0, S = 1
        let a = aux_state(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::Z, 1.0)
            .unwrap();
        assert_eq!((a.r, a.s), (0.0, 1.0));
        assert_eq!(a.v_b, 1.0);

        // head-on: R = -1, S = 0
        let a = aux_state(Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::Z, 1.0)
            .unwrap();
        assert_eq!((a.r, a.s), (-1.0, 0.0));
    }

    #[test]
    fn aux_state_on_ray() {
        // 135 degree heading at unit radius, c = 1: exactly on the ray
        let half_sqrt2 = std::f64::consts::SQRT_2 / 2.0;
        let a = aux_state(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-half_sqrt2, half_sqrt2, 0.0),
            Vec3::Z,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(a.r, -half_sqrt2, epsilon = 1e-15);
        assert_relative_eq!(a.s, half_sqrt2, epsilon = 1e-15);
        assert_relative_eq!(a.c, 1.0);
        assert!(a.eps.abs() <= a.ray_tol());
        assert_eq!(classify(&a, a.ray_tol()), IcClass::CollisionRay);
    }

    #[test]
    fn aux_state_collision_error() {
        assert_eq!(
            aux_state(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::Z, 1.0),
            Err(AuxError::Collision)
        );
    }

    #[test]
    fn classify_partitions() {
        let mk = |r: f64, s: f64, c: f64| AuxState {
            r,
            s,
            c,
            eps: s + c * r,
            v_b: 1.0,
            v_norm: 1.0,
        };
        assert_eq!(classify(&mk(1.0, -5.0, 1.0), 0.0), IcClass::MovingAway);
        // exemplary critical state with c != 1 so eps != 0
        assert_eq!(classify(&mk(-3.0, 3.0, 0.5), 1e-9), IcClass::CriticalOffRay);
        assert_eq!(classify(&mk(-1.0, 1.0, 1.0), 1e-9), IcClass::CollisionRay);
        // S = 0 with R < 0 is the safe side
        assert_eq!(classify(&mk(-1.0, 0.0, 1.0), 1e-9), IcClass::FollowingField);
    }

    #[test]
    fn rs_derivative_substitutions() {
        let mk = |r: f64, s: f64| AuxState { r, s, c: 1.0, eps: s + r, v_b: 1.0, v_norm: 1.0 };
        let (r_dot, s_dot) = rs_derivatives(&mk(0.0, 1.0), 1.0, 1.0, None).unwrap();
        assert_eq!((r_dot, s_dot), (1.0, 0.0));
        let (r_dot, s_dot) = rs_derivatives(&mk(-1.0, 0.0), 1.0, 1.0, None).unwrap();
        assert_eq!((r_dot, s_dot), (1.0, -1.0));
        assert_eq!(
            rs_derivatives(&mk(0.0, 0.0), 1.0, 1.0, None),
            Err(AuxError::Collision)
        );
    }

    #[test]
    fn rs_derivatives_disturbance_terms() {
        let x = Vec3::new(0.5, -0.25, 0.0);
        let z = Vec3::new(0.1, 0.2, 0.0);
        let aux = aux_state(x, Vec3::new(0.0, 1.0, 0.0), Vec3::Z, 1.0).unwrap();
        let (r0, s0) = rs_derivatives(&aux, 1.0, 1.0, None).unwrap();
        let (r1, s1) = rs_derivatives(&aux, 1.0, 1.0, Some((x, z, Vec3::Z))).unwrap();
        assert_relative_eq!(r1 - r0, x.dot(z), epsilon = 1e-15);
        assert_relative_eq!(s1 - s0, x.cross(z).dot(Vec3::Z), epsilon = 1e-15);
    }

    #[test]
    fn ray_collision_time() {
        // S0 = 1, c = 0: tau = 1/k
        assert_relative_eq!(collision_time_on_ray(1.0, 0.0, 2.0).unwrap(), 0.5);
        // limit S0 -> 0
        assert!(collision_time_on_ray(1e-12, 1.0, 1.0).unwrap() < 1e-11);
        assert!(collision_time_on_ray(-1.0, 1.0, 1.0).is_err());
        // sqrt(2)/2 at c = 1: tau = sqrt(2); cross-checked against the
        // integrated system in the verification suite
        assert_relative_eq!(
            collision_time_on_ray(std::f64::consts::SQRT_2 / 2.0, 1.0, 1.0).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn adaptation_examples() {
        // |eps| over threshold: unchanged
        let aux = AuxState { r: -1.0, s: 0.5, c: 1.0, eps: -0.5, v_b: 1.0, v_norm: 1.0 };
        assert_eq!(adapt_kcf(&aux, 1.0, 0.25, 0.05, 0.1), 1.0);
        // outside d_min: inactive
        assert_eq!(adapt_kcf(&aux, 1.0, 0.8, 0.2, 0.1), 1.0);

        // eps = -0.5, eps_min = 0.8: k becomes 1.3 and eps lands on -0.8
        let k = adapt_kcf(&aux, 1.0, 0.8, 0.05, 0.1);
        assert_relative_eq!(k, 1.3, epsilon = 1e-15);
        assert_relative_eq!(aux.s + k / 1.0 * aux.r, -0.8, epsilon = 1e-15);

        // sign flip: eps = 0.3, eps_min = 0.5 drives k to -1
        let aux = AuxState { r: -0.1, s: 0.4, c: 1.0, eps: 0.3, v_b: 1.0, v_norm: 1.0 };
        let k = adapt_kcf(&aux, 1.0, 0.5, 0.05, 0.1);
        assert_relative_eq!(k, -1.0, epsilon = 1e-14);
        assert_relative_eq!(aux.s + k * aux.r, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn distance_bounds() {
        let mk = |eps: f64, c: f64| AuxState {
            r: -1.0,
            s: eps + c,
            c,
            eps,
            v_b: 1.0,
            v_norm: 1.0,
        };
        assert_relative_eq!(min_distance_bound(&mk(-0.5, 1.0), false, 1.0, 1.0), 0.5);
        assert_relative_eq!(min_distance_bound(&mk(0.5, 1.0), false, 1.0, 1.0), 0.5);
        assert_relative_eq!(min_distance_bound(&mk(0.5, 1.0), true, 1.0, 1.0), 0.25);
        assert_eq!(min_distance_bound(&mk(0.0, 1.0), false, 1.0, 1.0), 0.0);
    }

    #[test]
    fn ratio_bound_values() {
        assert_relative_eq!(rs_ratio_lower_bound(1.0), -0.5);
        assert_relative_eq!(rs_ratio_lower_bound(2.0), -0.4);
        assert_relative_eq!(rs_ratio_lower_bound(0.3), -0.5);
    }

    #[test]
    fn budget_substitutions() {
        let base = BudgetInputs {
            class: IcClass::MovingAway,
            x0_norm: 1.0,
            v_min: 1.0,
            v_max: 1.0,
            c_min: 1.0,
            c_max: 1.0,
            k_cf: 1.0,
            s0: 0.0,
            r0: -1.0,
            eps0: 0.0,
            x_max: 2.0,
        };
        assert_relative_eq!(disturbance_budget(&base), 0.5);

        let ff = BudgetInputs { class: IcClass::FollowingField, s0: -1.0, ..base };
        assert_relative_eq!(disturbance_budget(&ff), 0.25);

        let crit = BudgetInputs { class: IcClass::CriticalOffRay, eps0: -0.5, ..base };
        assert_relative_eq!(disturbance_budget(&crit), 0.015625);

        let ray = BudgetInputs { class: IcClass::CollisionRay, ..base };
        assert_eq!(disturbance_budget(&ray), 0.0);
    }

    #[test]
    fn uniform_bound_substitutions() {
        assert_relative_eq!(uniform_barrier_bound(1.0, 1.0, 1.0, 1.0), 8.0);
        assert_relative_eq!(uniform_barrier_bound(1.0, 1.0, 1.0, 2.0), 2.0);
    }

    proptest! {
        /// Planar identity: R^2 + S^2 = ||x||^2 ||x_dot||^2.
        #[test]
        fn planar_identity(
            px in -3.0..3.0f64, py in -3.0..3.0f64,
            vx in -2.0..2.0f64, vy in -2.0..2.0f64,
        ) {
            let x = Vec3::new(px, py, 0.0);
            let v = Vec3::new(vx, vy, 0.0);
            prop_assume!(x.norm() > 1e-3 && v.norm() > 1e-3);
            let a = aux_state(x, v, Vec3::Z, 1.0).unwrap();
            let lhs = a.r * a.r + a.s * a.s;
            let rhs = x.norm_squared() * v.norm_squared();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }

        /// After adaptation fires, the recomputed ray distance equals
        /// eps_min * sgn(eps) exactly.
        #[test]
        fn adaptation_identity(
            r in -2.0..-0.01f64,
            s in 0.01..2.0f64,
            v in 0.3..2.0f64,
            k in 0.2..3.0f64,
            frac in 0.0..0.99f64,
        ) {
            let c = k / (v * v);
            let eps = s + c * r;
            let eps_min = eps.abs() / frac.max(1e-3) + 1e-6; // ensures |eps| < eps_min
            let aux = AuxState { r, s, c, eps, v_b: 1.0, v_norm: v };
            let k_new = adapt_kcf(&aux, k, eps_min, 0.01, 0.1);
            let eps_new = s + (k_new / (v * v)) * r;
            let sgn = if eps < 0.0 { -1.0 } else { 1.0 };
            prop_assert!((eps_new - sgn * eps_min).abs() <= 1e-12 * eps_min.max(1.0));
        }

        /// Scaling x by alpha > 0 scales R, S, eps by alpha and never changes
        /// the class.
        #[test]
        fn class_scale_invariance(
            px in -2.0..2.0f64, py in -2.0..2.0f64,
            vx in -2.0..2.0f64, vy in -2.0..2.0f64,
            alpha in 0.1..10.0f64,
        ) {
            let x = Vec3::new(px, py, 0.0);
            let v = Vec3::new(vx, vy, 0.0);
            prop_assume!(x.norm() > 1e-2 && v.norm() > 1e-2);
            let a = aux_state(x, v, Vec3::Z, 1.0).unwrap();
            let b = aux_state(x * alpha, v, Vec3::Z, 1.0).unwrap();
            prop_assert!((b.r - alpha * a.r).abs() <= 1e-9 * a.r.abs().max(1.0));
            prop_assert!((b.s - alpha * a.s).abs() <= 1e-9 * a.s.abs().max(1.0));
            prop_assert!((b.eps - alpha * a.eps).abs() <= 1e-9 * a.eps.abs().max(1.0));
            // class membership is scale-invariant away from the ray band
            prop_assume!(a.eps.abs() > 1e-6 * a.r.hypot(a.s));
            prop_assert_eq!(classify(&a, a.ray_tol()), classify(&b, b.ray_tol()));
        }

        /// Constrained samples respect the ratio lower bound strictly.
        #[test]
        fn ratio_bound_holds(
            r in -10.0..-1e-3f64,
            c_min in 0.2..3.0f64,
            c_extra in 0.0..2.0f64,
            s_frac in 1e-6..5.0f64,
        ) {
            let c = c_min + c_extra;
            let s = -c * r * (1.0 + s_frac); // S + cR > 0
            let ratio = r * s / (r * r + s * s);
            prop_assert!(ratio > rs_ratio_lower_bound(c_min));
        }
    }
}
