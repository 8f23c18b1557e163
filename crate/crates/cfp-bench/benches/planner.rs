//! Planner hot paths: per-tick steering-force evaluation against a dense
//! point cloud, nearest-point queries, and whole-trajectory rollouts.

use cfp_core::forces::steering_force;
use cfp_core::math::Vec3;
use cfp_core::scenarios;
use cfp_core::sim::{simulate, simulate_rs, RsConfig, SimMode, SimOptions};
use cfp_core::world::{nearest_obstacle_point, Obstacle, PlannerParams, RobotState};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn ring_cloud(n: usize) -> Vec<Obstacle> {
    let points: Vec<Vec3> = (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::TAU;
            let r = 0.3 + 0.5 * (i as f64 / n as f64);
            Vec3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect();
    vec![Obstacle::new(0, points, Vec3::Z).unwrap()]
}

fn bench_steering_force(c: &mut Criterion) {
    let obstacles = ring_cloud(1000);
    let params = PlannerParams { d_max: 2.0, ..scenarios::default_params() };
    let state = RobotState::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
    let goal = Vec3::new(5.0, 0.0, 0.0);
    c.bench_function("steering_force_1000_points", |b| {
        b.iter(|| {
            steering_force(
                black_box(&state),
                black_box(&obstacles),
                black_box(goal),
                black_box(&params),
            )
            .unwrap()
            .f_total
        })
    });
}

fn bench_nearest_point(c: &mut Criterion) {
    let obstacles = ring_cloud(1000);
    let x = Vec3::new(0.1, -0.2, 0.0);
    c.bench_function("nearest_point_1000", |b| {
        b.iter(|| nearest_obstacle_point(black_box(x), black_box(&obstacles)))
    });
}

fn bench_simulate(c: &mut Criterion) {
    let mut scenario = scenarios::head_on(1.0);
    scenario.horizon = 1.0;
    c.bench_function("simulate_head_on_1s", |b| {
        b.iter_batched(
            || SimOptions::with_stride(SimMode::CfOnly, 100),
            |opts| simulate(black_box(&scenario), &opts).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_simulate_rs(c: &mut Criterion) {
    c.bench_function("simulate_rs_100k_steps", |b| {
        b.iter(|| simulate_rs(black_box(&RsConfig::new(-1.0, 1.5, 1.0, 1.0, 1e-5, 1.0))))
    });
}

criterion_group!(
    benches,
    bench_steering_force,
    bench_nearest_point,
    bench_simulate,
    bench_simulate_rs
);
criterion_main!(benches);
