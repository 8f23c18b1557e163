//! Cross-module integration checks: the full simulator against the reduced
//! RS-plane integrator, and baseline behaviors that span several modules.

use cfp_core::math::Vec3;
use cfp_core::scenarios;
use cfp_core::sim::{
    simulate, simulate_apf, simulate_rs, ApfParams, RsConfig, SimMode, SimOptions, Termination,
};
use cfp_core::world::{Obstacle, RobotState, Scenario};

/// While a single obstacle point is active, the auxiliary trace extracted
/// from the full simulation matches the directly integrated RS system to
/// first order in dt.
#[test]
fn simulate_and_simulate_rs_agree() {
    let sup_diff_at = |dt: f64| -> f64 {
        let mut scenario = scenarios::ring_ic(2.4, 1.0, 1.0, 1.0, dt, 1.5);
        scenario.horizon = 1.5;
        let traj = simulate(&scenario, &SimOptions::new(SimMode::CfOnly)).unwrap();
        let aux0 = traj.samples[0].aux.unwrap();
        let trace = simulate_rs(&RsConfig::new(aux0.r, aux0.s, 1.0, 1.0, dt, 1.5));
        traj.samples
            .iter()
            .zip(trace.r.iter().zip(trace.s.iter()))
            .filter_map(|(sample, (r, s))| {
                sample.aux.map(|a| (a.r - r).abs().max((a.s - s).abs()))
            })
            .fold(0.0, f64::max)
    };
    let coarse = sup_diff_at(1e-3);
    let fine = sup_diff_at(1e-4);
    assert!(coarse < 5e-3, "embedding vs reduced trace differ by {coarse}");
    assert!(
        fine < coarse / 4.0,
        "first-order agreement: {coarse} at dt=1e-3 vs {fine} at dt=1e-4"
    );
}

/// Near-head-on approach under the potential-field baseline: the robot
/// brakes, deflects to the side, and stays collision-free once the
/// repulsion is strong enough.
#[test]
fn apf_deflects_near_head_on() {
    let mut scenario = scenarios::head_on(1.5);
    // break the exact symmetry so the deflection has a side to pick
    scenario.obstacles =
        vec![Obstacle::new(0, vec![Vec3::new(0.0, 1e-3, 0.0)], Vec3::Z).unwrap()];
    scenario.goal = Vec3::new(3.0, 0.0, 0.0);
    scenario.horizon = 30.0;
    let mut last_min = 0.0;
    for eta in [0.02, 0.05, 0.1] {
        let traj = simulate_apf(&scenario, &ApfParams { eta, rho0: 0.8 }).unwrap();
        assert_ne!(traj.terminated_by, Termination::Collision, "eta {eta}");
        last_min = traj.stats.min_nearest_distance;
        // decelerates below the approach speed somewhere along the pass
        assert!(traj.stats.speed_min < scenario.start.speed());
    }
    assert!(last_min > 1e-2, "strong repulsion keeps clearance: {last_min}");
}

/// The stall detector catches a force equilibrium: the potential-field
/// baseline parks in front of the U-trap cavity.
#[test]
fn apf_stalls_in_u_trap() {
    let trap = scenarios::u_trap();
    let traj = simulate_apf(&trap, &ApfParams { eta: 0.05, rho0: 0.5 }).unwrap();
    assert_eq!(traj.terminated_by, Termination::Stalled);
    let last = traj.samples.last().unwrap();
    // parked inside the cavity mouth, essentially at rest
    assert!(last.position.x < 0.5, "stall position {:?}", last.position);
    assert!(last.velocity.norm() < 1e-5);
}

/// The closed-form (R, S) derivatives match finite differences of the
/// auxiliary state along a simulated avoidance trajectory.
#[test]
fn rs_derivatives_match_finite_differences() {
    let dt = 1e-6;
    let mut scenario = scenarios::head_on(1.0);
    scenario.dt = dt;
    scenario.horizon = 0.05;
    let traj = simulate(&scenario, &SimOptions::new(SimMode::CfOnly)).unwrap();
    let k = scenario.params.k_cf;
    for w in traj.samples.windows(2).step_by(97) {
        let (a, b) = (w[0].aux.unwrap(), w[1].aux.unwrap());
        let (r_dot, s_dot) =
            cfp_core::auxiliary::rs_derivatives(&a, w[0].velocity.norm(), k, None).unwrap();
        let scale = w[0].velocity.norm_squared().max(k);
        assert!(
            ((b.r - a.r) / dt - r_dot).abs() < 50.0 * dt * scale + 1e-9,
            "R rate off at t={}",
            w[0].t
        );
        assert!(
            ((b.s - a.s) / dt - s_dot).abs() < 50.0 * dt * scale + 1e-9,
            "S rate off at t={}",
            w[0].t
        );
    }
}

/// A coarser prediction step keeps the selected avoidance homotopy: the best
/// agents at 1 ms and 10 ms choose the same side of every obstacle.
#[test]
fn prediction_step_preserves_selected_homotopy() {
    use cfp_core::agents::{plan, AgentParams};
    let scenario = scenarios::nonconvex_gauntlet();
    let pick = |dt_pred: f64| {
        let params = AgentParams { dt_pred, ..AgentParams::new(&scenario) };
        let result = plan(&scenario, &params).unwrap();
        result.best_agent().expect("a finished agent").b_assignment.clone()
    };
    assert_eq!(pick(1e-3), pick(1e-2));
}

/// Sweeping the clearance weight traces a Pareto front: no selected agent is
/// dominated in (path length, clearance) by another finished agent.
#[test]
fn weight_sweep_selects_pareto_agents() {
    use cfp_core::agents::{plan, AgentParams, AgentStatus, CostWeights};
    use cfp_core::sim::metrics;
    let scenario = scenarios::nonconvex_gauntlet();
    let mut selected = Vec::new();
    for w_dist in [0.0, 1.0, 10.0, 100.0] {
        let params = AgentParams {
            dt_pred: 1e-2,
            weights: CostWeights { w_len: 1.0, w_dist, d_safe: 0.5 },
            ..AgentParams::new(&scenario)
        };
        let result = plan(&scenario, &params).unwrap();
        let finished: Vec<(f64, f64)> = result
            .agents
            .iter()
            .filter(|a| a.status == AgentStatus::Finished)
            .map(|a| {
                let m = metrics(&a.trajectory, &scenario.obstacles);
                (m.path_length, m.min_obstacle_distance)
            })
            .collect();
        assert!(finished.len() >= 2, "selection needs alternatives");
        let best = result.best_agent().unwrap();
        let m = metrics(&best.trajectory, &scenario.obstacles);
        // exhaustive re-evaluation: the selection minimizes the stated cost
        let best_cost = 1.0 * m.path_length + w_dist * (0.5 - m.min_obstacle_distance).max(0.0);
        for (len, dist) in &finished {
            let cost = 1.0 * len + w_dist * (0.5 - dist).max(0.0);
            assert!(best_cost <= cost + 1e-12, "not the argmin at w_dist={w_dist}");
        }
        selected.push((m.path_length, m.min_obstacle_distance));
    }
    // no selected point is dominated by another selected point
    for (i, a) in selected.iter().enumerate() {
        for (j, b) in selected.iter().enumerate() {
            if i != j {
                assert!(
                    !(b.0 < a.0 - 1e-12 && b.1 > a.1 + 1e-12),
                    "selected point {a:?} dominated by {b:?}"
                );
            }
        }
    }
}

/// Gain adaptation rescues an exactly-on-ray start that would otherwise
/// collide in the reduced system.
#[test]
fn adaptation_rescues_on_ray_start() {
    let d0 = 0.08;
    let theta = 135f64.to_radians();
    let scenario = Scenario {
        start: RobotState::new(
            Vec3::new(d0, 0.0, 0.0),
            Vec3::new(theta.cos(), theta.sin(), 0.0),
        ),
        goal: Vec3::new(1e3, 0.0, 0.0),
        obstacles: vec![Obstacle::new(0, vec![Vec3::ZERO], Vec3::Z).unwrap()],
        params: cfp_core::PlannerParams {
            k_cf: 1.0,
            d_min: 0.1,
            d_max: 1e3,
            eps_min: 0.01,
            v_min: 1.0,
            v_max: 1.0,
            ..scenarios::default_params()
        },
        dt: 1e-5,
        horizon: 1.0,
        planar: true,
        seed: 0,
    };
    // without adaptation the reduced system from this state hits the origin
    let aux0 = cfp_core::auxiliary::aux_state(
        scenario.start.position,
        scenario.start.velocity,
        Vec3::Z,
        1.0,
    )
    .unwrap();
    let trace = simulate_rs(&RsConfig {
        origin_tol: 1e-4,
        ..RsConfig::new(aux0.r, aux0.s, 1.0, 1.0, 1e-5, 1.0)
    });
    assert!(trace.collided_at.is_some(), "reduced on-ray start must collide");

    let mut opts = SimOptions::new(SimMode::CfOnly);
    opts.adapt_gain = true;
    let traj = simulate(&scenario, &opts).unwrap();
    assert_ne!(traj.terminated_by, Termination::Collision);
    assert!(traj.stats.min_abs_eps_in_critical >= scenario.params.eps_min * (1.0 - 1e-6));
}
