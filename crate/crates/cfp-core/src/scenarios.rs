//! Constructed scenario battery shared by tests, the verification suite and
//! the CLI examples.

use crate::math::Vec3;
use crate::world::{Obstacle, PlannerParams, RobotState, Scenario};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn default_params() -> PlannerParams {
    PlannerParams {
        k_cf: 0.25,
        k_p: 2.0,
        k_v: 2.5,
        v_min: 0.4,
        v_max: 1.0,
        d_max: 1.5,
        d_min: 0.1,
        eps_min: 0.01,
        xi: 0.05,
        k_vlc_scale: 1.0,
    }
}

/// Straight run to the goal with nothing in the way.
pub fn obstacle_free() -> Scenario {
    Scenario {
        start: RobotState::new(Vec3::new(-2.0, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)),
        goal: Vec3::new(2.0, 0.0, 0.0),
        obstacles: Vec::new(),
        params: default_params(),
        dt: 1e-3,
        horizon: 30.0,
        planar: true,
        seed: 0,
    }
}

/// Single point obstacle at the origin, robot approaching head-on from
/// `distance` away. The goal sits far beyond so avoidance-only studies are
/// not cut short.
pub fn head_on(distance: f64) -> Scenario {
    Scenario {
        start: RobotState::new(Vec3::new(-distance, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)),
        goal: Vec3::new(50.0, 0.0, 0.0),
        obstacles: vec![Obstacle::new(0, vec![Vec3::ZERO], Vec3::Z).unwrap()],
        params: PlannerParams { d_max: 5.0, ..default_params() },
        dt: 1e-3,
        horizon: 10.0,
        planar: true,
        seed: 0,
    }
}

/// Point obstacle at the origin, robot on a circle of `radius` with speed
/// `speed` and heading `theta` (measured from +x). Avoidance-only studies of
/// the auxiliary system start here.
pub fn ring_ic(theta: f64, radius: f64, speed: f64, k_cf: f64, dt: f64, horizon: f64) -> Scenario {
    Scenario {
        start: RobotState::new(
            Vec3::new(radius, 0.0, 0.0),
            Vec3::new(speed * theta.cos(), speed * theta.sin(), 0.0),
        ),
        goal: Vec3::new(1e3, 0.0, 0.0),
        obstacles: vec![Obstacle::new(0, vec![Vec3::ZERO], Vec3::Z).unwrap()],
        params: PlannerParams { k_cf, d_max: 1e3, v_min: speed, v_max: speed, ..default_params() },
        dt,
        horizon,
        planar: true,
        seed: 0,
    }
}

/// Arc of a circle as a point cloud (a "C" shape for most spans).
pub fn arc_cloud(
    center: Vec3,
    radius: f64,
    from_deg: f64,
    to_deg: f64,
    n_points: usize,
) -> Vec<Vec3> {
    (0..n_points)
        .map(|i| {
            let a = (from_deg + (to_deg - from_deg) * i as f64 / (n_points - 1) as f64).to_radians();
            center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect()
}

/// Straight segment of evenly spaced points.
pub fn segment_cloud(from: Vec3, to: Vec3, n_points: usize) -> Vec<Vec3> {
    (0..n_points)
        .map(|i| {
            let s = i as f64 / (n_points - 1) as f64;
            from + (to - from) * s
        })
        .collect()
}

/// Goal-convergence gauntlet: three nonconvex point-cloud obstacles (open
/// arcs, >= 50 points each) staggered across the corridor, openings turned
/// away from the weave. The robot dips under the first, climbs over the
/// second and dips under the third.
pub fn nonconvex_gauntlet() -> Scenario {
    let o1 = Obstacle::new(
        0,
        arc_cloud(Vec3::new(-1.7, 0.4, 0.0), 0.5, 120.0, 420.0, 55),
        -Vec3::Z,
    )
    .unwrap();
    let o2 = Obstacle::new(
        1,
        arc_cloud(Vec3::new(0.3, -0.5, 0.0), 0.5, 300.0, 600.0, 55),
        Vec3::Z,
    )
    .unwrap();
    let o3 = Obstacle::new(
        2,
        arc_cloud(Vec3::new(2.0, 0.45, 0.0), 0.5, 120.0, 420.0, 55),
        -Vec3::Z,
    )
    .unwrap();
    Scenario {
        obstacles: vec![o1, o2, o3],
        ..nonconvex_gauntlet_frame()
    }
}

/// One open arc between start and goal.
pub fn single_cloud() -> Scenario {
    let cloud = Obstacle::new(
        0,
        arc_cloud(Vec3::new(0.0, 0.25, 0.0), 0.5, 20.0, 320.0, 55),
        Vec3::Z,
    )
    .unwrap();
    Scenario {
        obstacles: vec![cloud],
        ..nonconvex_gauntlet_frame()
    }
}

fn nonconvex_gauntlet_frame() -> Scenario {
    Scenario {
        start: RobotState::new(Vec3::new(-3.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)),
        goal: Vec3::new(5.0, 0.0, 0.0),
        obstacles: Vec::new(),
        params: PlannerParams {
            k_cf: 0.3,
            k_p: 2.0,
            k_v: 2.5,
            v_min: 0.4,
            v_max: 1.0,
            d_max: 0.8,
            d_min: 0.1,
            eps_min: 0.01,
            xi: 0.05,
            k_vlc_scale: 1.0,
        },
        dt: 1e-3,
        horizon: 60.0,
        planar: true,
        seed: 1,
    }
}

/// U-shaped trap facing the robot with the goal behind it. A classic local
/// minimum for potential-field planners.
pub fn u_trap() -> Scenario {
    let mut points = segment_cloud(Vec3::new(0.5, -0.6, 0.0), Vec3::new(0.5, 0.6, 0.0), 25);
    points.extend(segment_cloud(Vec3::new(-0.5, 0.6, 0.0), Vec3::new(0.46, 0.6, 0.0), 20));
    points.extend(segment_cloud(Vec3::new(-0.5, -0.6, 0.0), Vec3::new(0.46, -0.6, 0.0), 20));
    let trap = Obstacle::new(0, points, Vec3::Z).unwrap();
    Scenario {
        start: RobotState::new(Vec3::new(-3.0, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)),
        goal: Vec3::new(3.0, 0.0, 0.0),
        obstacles: vec![trap],
        params: PlannerParams {
            k_cf: 0.3,
            k_p: 2.0,
            k_v: 2.5,
            v_min: 0.4,
            v_max: 1.0,
            d_max: 0.8,
            d_min: 0.1,
            eps_min: 0.01,
            xi: 0.05,
            k_vlc_scale: 1.0,
        },
        dt: 1e-3,
        horizon: 90.0,
        planar: true,
        seed: 2,
    }
}

/// Multi-obstacle full-planner scene used for the velocity-envelope checks.
pub fn multi_obstacle() -> Scenario {
    let o1 = Obstacle::new(0, arc_cloud(Vec3::new(-1.0, 0.5, 0.0), 0.4, 0.0, 359.0, 40), Vec3::Z)
        .unwrap();
    let o2 =
        Obstacle::new(1, arc_cloud(Vec3::new(0.8, -0.5, 0.0), 0.35, 0.0, 359.0, 35), -Vec3::Z)
            .unwrap();
    let o3 = Obstacle::new(2, vec![Vec3::new(2.0, 0.3, 0.0), Vec3::new(2.1, 0.1, 0.0)], Vec3::Z)
        .unwrap();
    Scenario {
        start: RobotState::new(Vec3::new(-3.0, 0.0, 0.0), Vec3::new(0.6, 0.0, 0.0)),
        goal: Vec3::new(3.5, 0.0, 0.0),
        obstacles: vec![o1, o2, o3],
        params: PlannerParams {
            k_cf: 0.15,
            k_p: 2.0,
            k_v: 2.5,
            v_min: 0.3,
            v_max: 1.0,
            d_max: 0.8,
            d_min: 0.1,
            eps_min: 0.01,
            xi: 0.05,
            k_vlc_scale: 1.0,
        },
        dt: 1e-3,
        horizon: 60.0,
        planar: true,
        seed: 3,
    }
}

/// Single point obstacle behind the start so that every launch heading is
/// eventually steered back toward the goal. Used for the all-headings agent
/// sweep.
pub fn agent_sweep(theta: f64) -> Scenario {
    Scenario {
        start: RobotState::new(Vec3::ZERO, Vec3::new(theta.cos(), theta.sin(), 0.0)),
        goal: Vec3::new(2.0, 0.0, 0.0),
        obstacles: vec![Obstacle::new(0, vec![Vec3::new(-0.7, 0.0, 0.0)], Vec3::Z).unwrap()],
        // A deliberately low speed floor: the launch sweep covers headings
        // pointing straight away from the goal, and a high floor would park
        // the gate before the field behind the start can turn the robot
        // around. Narrowing the floor trades the disturbance budgets (void
        // here) for convergence from every heading.
        params: PlannerParams {
            k_cf: 0.5,
            k_p: 1.0,
            k_v: 1.0,
            v_min: 0.05,
            v_max: 1.0,
            d_max: 1.5,
            d_min: 0.05,
            eps_min: 0.01,
            xi: 0.05,
            k_vlc_scale: 1.0,
        },
        dt: 1e-3,
        horizon: 60.0,
        planar: true,
        seed: 4,
    }
}

/// Chain of `n` staggered point obstacles toward the goal; each encounter
/// forks the running agents, breeding up to 2^n hypotheses.
pub fn split_chain(n: usize) -> Scenario {
    let obstacles: Vec<Obstacle> = (0..n)
        .map(|i| {
            let y = if i % 2 == 0 { 0.06 } else { -0.08 };
            Obstacle::new(i, vec![Vec3::new(0.9 + 0.8 * i as f64, y, 0.0)], Vec3::Z).unwrap()
        })
        .collect();
    let goal_x = 0.9 + 0.8 * n as f64 + 0.8;
    Scenario {
        start: RobotState::new(Vec3::ZERO, Vec3::new(0.8, 0.0, 0.0)),
        goal: Vec3::new(goal_x, 0.0, 0.0),
        obstacles,
        params: PlannerParams {
            k_cf: 0.3,
            k_p: 2.0,
            k_v: 2.5,
            v_min: 0.4,
            v_max: 1.0,
            d_max: 0.6,
            d_min: 0.05,
            eps_min: 0.01,
            xi: 0.05,
            k_vlc_scale: 1.0,
        },
        dt: 1e-3,
        horizon: 60.0,
        planar: true,
        seed: 5,
    }
}

/// Random gentle avoidance-only scene for speed-invariance sweeps: a few
/// small clusters offset from the launch line so passes stay shallow.
pub fn random_cf_scenario(rng: &mut ChaCha8Rng, dt: f64, horizon: f64) -> Scenario {
    let heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let speed = rng.gen_range(0.8..1.2);
    let dir = Vec3::new(heading.cos(), heading.sin(), 0.0);
    let side = Vec3::new(-heading.sin(), heading.cos(), 0.0);
    let n_clusters = rng.gen_range(1..=3);
    let mut obstacles = Vec::new();
    for id in 0..n_clusters {
        let along = rng.gen_range(1.0..3.5);
        let lateral = rng.gen_range(1.5..2.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let center = dir * along + side * lateral;
        let n_points = rng.gen_range(1..=3);
        let points: Vec<Vec3> = (0..n_points)
            .map(|_| {
                center
                    + Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), 0.0)
            })
            .collect();
        let b = if rng.gen_bool(0.5) { Vec3::Z } else { -Vec3::Z };
        obstacles.push(Obstacle::new(id, points, b).unwrap());
    }
    Scenario {
        start: RobotState::new(Vec3::ZERO, dir * speed),
        goal: dir * 100.0,
        obstacles,
        params: PlannerParams {
            k_cf: rng.gen_range(0.03..0.10),
            d_max: 3.0,
            v_min: 0.5,
            v_max: 1.5,
            ..default_params()
        },
        dt,
        horizon,
        planar: true,
        seed: rng.gen(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructed_scenarios_validate() {
        obstacle_free().validate().unwrap();
        head_on(1.0).validate().unwrap();
        ring_ic(2.0, 1.0, 1.0, 1.0, 1e-3, 3.0).validate().unwrap();
        nonconvex_gauntlet().validate().unwrap();
        u_trap().validate().unwrap();
        multi_obstacle().validate().unwrap();
        agent_sweep(3.1).validate().unwrap();
        split_chain(5).validate().unwrap();
    }

    #[test]
    fn gauntlet_obstacles_are_dense_nonconvex_clouds() {
        let s = nonconvex_gauntlet();
        assert_eq!(s.obstacles.len(), 3);
        for o in &s.obstacles {
            assert!(o.points.len() >= 50, "obstacle {} has {} points", o.id, o.points.len());
        }
    }
}
