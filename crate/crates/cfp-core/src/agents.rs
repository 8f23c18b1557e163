//! Virtual-agent trajectory prediction: spawn forward-simulated planner
//! instances with different avoidance directions, fork them whenever a new
//! obstacle comes into reach, score the finished rollouts and pick the best.
//!
//! Rollouts are independent tasks over a read-only world snapshot. Results
//! are merged in agent-id order, so parallel and sequential execution select
//! the same agent.

use crate::forces::steering_force;
use crate::math::Vec3;
use crate::sim::{
    metrics, step_euler, Metrics, Sample, SimError, Termination, Trajectory, STALL_SPEED,
    STALL_STEPS,
};
use crate::world::{nearest_obstacle_point, Obstacle, RobotState, Scenario};
use crate::auxiliary::{adapt_kcf, aux_state};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Cost weights: path length plus a clearance shortfall penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub w_len: f64,
    pub w_dist: f64,
    /// Clearance below this distance is penalized.
    pub d_safe: f64,
}

#[derive(Debug, Clone)]
pub struct AgentParams {
    /// Prediction step; may be coarser than the control step.
    pub dt_pred: f64,
    pub weights: CostWeights,
    /// Hard cap on simultaneously running agents.
    pub max_agents: usize,
    /// Cycle length (in prediction steps) at which a closed-loop controller
    /// would re-run the planner; a one-shot plan is a single cycle.
    pub replan_cycle_steps: usize,
    pub seed: u64,
}

impl AgentParams {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            dt_pred: scenario.dt,
            weights: CostWeights { w_len: 1.0, w_dist: 1.0, d_safe: scenario.params.d_min },
            max_agents: 64,
            replan_cycle_steps: 100,
            seed: scenario.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AgentStatus {
    Running,
    Finished,
    Collided,
    /// Excluded from selection: evicted at the agent cap or terminated
    /// without reaching the goal (horizon or stall).
    Pruned,
}

/// One virtual agent: a planner instance with a fixed avoidance-direction
/// assignment per encountered obstacle.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: u64,
    pub parent: Option<u64>,
    /// Obstacle id -> magnetic field vector chosen by this agent.
    pub b_assignment: BTreeMap<usize, Vec3>,
    pub trajectory: Trajectory,
    pub cost: f64,
    pub status: AgentStatus,
    /// Wall-clock time spent predicting this agent's trajectory [s].
    pub prediction_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub agents: Vec<Agent>,
    /// Id of the selected agent, `None` when no agent finished.
    pub best: Option<u64>,
    /// Largest number of simultaneously running agents observed.
    pub max_concurrent: usize,
    /// Cap-eviction events (pruned agent ids).
    pub evictions: Vec<u64>,
}

impl PlanResult {
    pub fn best_agent(&self) -> Option<&Agent> {
        self.best.and_then(|id| self.agents.iter().find(|a| a.id == id))
    }
}

/// Rollout cost; infinite for anything that did not reach the goal.
pub fn cost(m: &Metrics, status: AgentStatus, weights: &CostWeights) -> f64 {
    if status != AgentStatus::Finished {
        return f64::INFINITY;
    }
    let clearance_shortfall = (weights.d_safe - m.min_obstacle_distance).max(0.0);
    weights.w_len * m.path_length + weights.w_dist * clearance_shortfall
}

/// Lowest-cost finished agent; ties broken by lowest id. `None` signals that
/// the caller should keep its current avoidance directions (reactivity does
/// not depend on the agents).
pub fn select_best(agents: &[Agent]) -> Option<&Agent> {
    agents
        .iter()
        .filter(|a| a.status == AgentStatus::Finished)
        .min_by(|a, b| {
            a.cost
                .partial_cmp(&b.cost)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.id.cmp(&b.id))
        })
}

/// The two planar avoidance directions.
const FIELD_CHOICES: [Vec3; 2] = [Vec3 { x: 0.0, y: 0.0, z: 1.0 }, Vec3 { x: 0.0, y: 0.0, z: -1.0 }];

/// Initial agents: one per field choice for the first in-range obstacle, or
/// a single unassigned agent when nothing is in reach yet.
pub fn spawn_initial(scenario: &Scenario) -> Vec<(u64, BTreeMap<usize, Vec3>)> {
    let nearest = nearest_obstacle_point(scenario.start.position, &scenario.obstacles)
        .filter(|n| n.distance <= scenario.params.d_max);
    match nearest {
        Some(n) => FIELD_CHOICES
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let mut assignment = BTreeMap::new();
                assignment.insert(n.obstacle_id, *b);
                (i as u64, assignment)
            })
            .collect(),
        None => vec![(0, BTreeMap::new())],
    }
}

enum SegmentEnd {
    Terminal(Termination),
    Split { obstacle_id: usize },
}

struct AgentRun {
    id: u64,
    parent: Option<u64>,
    assignment: BTreeMap<usize, Vec3>,
    state: RobotState,
    samples: Vec<Sample>,
    step: u64,
    stall_run: u32,
    prediction_seconds: f64,
    /// Obstacles with the agent's field choices substituted in.
    world: Vec<Obstacle>,
}

impl AgentRun {
    fn rebuild_world(&mut self, scenario: &Scenario) {
        self.world = scenario
            .obstacles
            .iter()
            .filter_map(|o| self.assignment.get(&o.id).map(|b| o.with_field(*b)))
            .collect();
    }

    /// Advance until the goal, a collision, a stall, the horizon, or an
    /// encounter with an obstacle missing from the assignment.
    fn advance(&mut self, scenario: &Scenario, params: &AgentParams) -> SegmentEnd {
        let wall = std::time::Instant::now();
        let dt = params.dt_pred;
        let n_steps = (scenario.horizon / dt).round() as u64;
        let end = loop {
            let t = self.step as f64 * dt;
            self.state.time = t;

            // Fork before an unassigned obstacle starts exerting force.
            if let Some(id) = self.unassigned_in_reach(scenario) {
                break SegmentEnd::Split { obstacle_id: id };
            }

            let nearest = nearest_obstacle_point(self.state.position, &self.world);
            let mut planner = scenario.params;
            let mut aux = nearest.and_then(|n| {
                let b = self.world.iter().find(|o| o.id == n.obstacle_id).map(|o| o.b)?;
                aux_state(self.state.position - n.point, self.state.velocity, b, planner.k_cf).ok()
            });
            if let (Some(a), Some(n)) = (aux, nearest) {
                let adapted = adapt_kcf(&a, planner.k_cf, planner.eps_min, n.distance, planner.d_min);
                if adapted != planner.k_cf {
                    planner.k_cf = adapted;
                    let b = self.world.iter().find(|o| o.id == n.obstacle_id).map(|o| o.b);
                    aux = b.and_then(|b| {
                        aux_state(self.state.position - n.point, self.state.velocity, b, adapted).ok()
                    });
                }
            }

            let force = match steering_force(&self.state, &self.world, scenario.goal, &planner) {
                Ok(mut f) => {
                    f.per_point.clear();
                    f
                }
                Err(_) => break SegmentEnd::Terminal(Termination::Collision),
            };
            let gate = force.gate;
            let f_total = force.f_total;
            self.samples.push(Sample {
                t,
                position: self.state.position,
                velocity: self.state.velocity,
                force,
                aux,
                nearest,
                disturbance: Vec3::ZERO,
            });

            if let Some(n) = nearest {
                if n.distance < crate::sim::DEFAULT_COLLISION_RADIUS {
                    break SegmentEnd::Terminal(Termination::Collision);
                }
            }
            if (scenario.goal - self.state.position).norm() <= scenario.params.xi {
                break SegmentEnd::Terminal(Termination::GoalReached);
            }
            if gate && self.state.speed() < STALL_SPEED {
                self.stall_run += 1;
                if self.stall_run >= STALL_STEPS {
                    break SegmentEnd::Terminal(Termination::Stalled);
                }
            } else {
                self.stall_run = 0;
            }
            if self.step == n_steps {
                break SegmentEnd::Terminal(Termination::Horizon);
            }

            self.state = step_euler(&self.state, f_total, dt, scenario.planar);
            self.step += 1;
        };
        self.prediction_seconds += wall.elapsed().as_secs_f64();
        end
    }

    fn unassigned_in_reach(&self, scenario: &Scenario) -> Option<usize> {
        scenario
            .obstacles
            .iter()
            .filter(|o| !self.assignment.contains_key(&o.id))
            .filter_map(|o| {
                o.points
                    .iter()
                    .map(|p| self.state.position.distance(*p))
                    .min_by(|a, b| a.partial_cmp(b).unwrap())
                    .filter(|d| *d <= scenario.params.d_max)
                    .map(|_| o.id)
            })
            .min()
    }

    fn partial_cost(&self, scenario: &Scenario, weights: &CostWeights) -> f64 {
        let length: f64 = self
            .samples
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .sum();
        let min_dist = self
            .samples
            .iter()
            .filter_map(|s| {
                nearest_obstacle_point(s.position, &scenario.obstacles).map(|n| n.distance)
            })
            .fold(f64::INFINITY, f64::min);
        weights.w_len * length + weights.w_dist * (weights.d_safe - min_dist).max(0.0)
    }
}

/// Runs the full prediction cycle: spawn, roll out, fork on encounters,
/// score, select. Deterministic for a fixed scenario, seed and weights
/// regardless of the number of worker threads.
pub fn plan(scenario: &Scenario, params: &AgentParams) -> Result<PlanResult, SimError> {
    scenario.validate()?;
    let mut next_id: u64 = 0;
    let mut running: Vec<AgentRun> = spawn_initial(scenario)
        .into_iter()
        .map(|(_, assignment)| {
            let id = next_id;
            next_id += 1;
            let mut run = AgentRun {
                id,
                parent: None,
                assignment,
                state: scenario.start,
                samples: Vec::new(),
                step: 0,
                stall_run: 0,
                prediction_seconds: 0.0,
                world: Vec::new(),
            };
            run.rebuild_world(scenario);
            run
        })
        .collect();

    let mut done: Vec<Agent> = Vec::new();
    let mut evictions: Vec<u64> = Vec::new();
    let mut max_concurrent = running.len();

    while !running.is_empty() {
        max_concurrent = max_concurrent.max(running.len());
        // Each running agent advances to its next event, in parallel; the
        // events are then applied in id order.
        let ends: Vec<SegmentEnd> = running
            .par_iter_mut()
            .map(|run| run.advance(scenario, params))
            .collect();

        let mut next_running: Vec<AgentRun> = Vec::new();
        for (mut run, end) in running.into_iter().zip(ends) {
            match end {
                SegmentEnd::Terminal(term) => {
                    let trajectory =
                        Trajectory::from_samples(std::mem::take(&mut run.samples), term);
                    let status = match term {
                        Termination::GoalReached => AgentStatus::Finished,
                        Termination::Collision => AgentStatus::Collided,
                        Termination::Horizon | Termination::Stalled => AgentStatus::Pruned,
                    };
                    let m = metrics(&trajectory, &scenario.obstacles);
                    done.push(Agent {
                        id: run.id,
                        parent: run.parent,
                        b_assignment: run.assignment,
                        cost: cost(&m, status, &params.weights),
                        status,
                        trajectory,
                        prediction_seconds: run.prediction_seconds,
                    });
                }
                SegmentEnd::Split { obstacle_id } => {
                    for (i, b) in FIELD_CHOICES.iter().enumerate() {
                        if i == 0 {
                            // The original agent continues with the first
                            // choice; the second spawns a sibling sharing the
                            // prefix bit-for-bit.
                            run.assignment.insert(obstacle_id, *b);
                            run.rebuild_world(scenario);
                        } else {
                            let id = next_id;
                            next_id += 1;
                            let mut child = AgentRun {
                                id,
                                parent: Some(run.id),
                                assignment: run.assignment.clone(),
                                state: run.state,
                                samples: run.samples.clone(),
                                step: run.step,
                                stall_run: run.stall_run,
                                prediction_seconds: 0.0,
                                world: Vec::new(),
                            };
                            child.assignment.insert(obstacle_id, *b);
                            child.rebuild_world(scenario);
                            next_running.push(child);
                        }
                    }
                    next_running.push(run);
                }
            }
        }
        next_running.sort_by_key(|r| r.id);

        // Enforce the agent cap: evict the worst partial cost (ties: newest).
        while next_running.len() > params.max_agents {
            let worst = next_running
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    let ca = a.partial_cost(scenario, &params.weights);
                    let cb = b.partial_cost(scenario, &params.weights);
                    ca.partial_cmp(&cb).unwrap().then(a.id.cmp(&b.id))
                })
                .map(|(i, _)| i)
                .expect("non-empty");
            let run = next_running.remove(worst);
            evictions.push(run.id);
            done.push(Agent {
                id: run.id,
                parent: run.parent,
                b_assignment: run.assignment,
                trajectory: Trajectory::from_samples(run.samples, Termination::Horizon),
                cost: f64::INFINITY,
                status: AgentStatus::Pruned,
                prediction_seconds: run.prediction_seconds,
            });
        }
        running = next_running;
    }

    done.sort_by_key(|a| a.id);
    let best = select_best(&done).map(|a| a.id);
    Ok(PlanResult { agents: done, best, max_concurrent, evictions })
}

/// Serializable tree dump (trajectories reduced to sample counts).
#[derive(Debug, Serialize)]
pub struct AgentTreeDump {
    pub dt_pred: f64,
    pub weights: CostWeights,
    pub max_concurrent: usize,
    pub best: Option<u64>,
    pub prediction_ms_best: Option<f64>,
    pub prediction_ms_avg: f64,
    pub agents: Vec<AgentNodeDump>,
}

#[derive(Debug, Serialize)]
pub struct AgentNodeDump {
    pub id: u64,
    pub parent: Option<u64>,
    pub status: AgentStatus,
    pub cost: f64,
    pub n_samples: usize,
    pub b_assignment: BTreeMap<usize, [f64; 3]>,
    pub prediction_ms: f64,
}

impl AgentTreeDump {
    pub fn new(result: &PlanResult, params: &AgentParams) -> Self {
        let avg = if result.agents.is_empty() {
            0.0
        } else {
            result.agents.iter().map(|a| a.prediction_seconds).sum::<f64>()
                / result.agents.len() as f64
        };
        AgentTreeDump {
            dt_pred: params.dt_pred,
            weights: params.weights,
            max_concurrent: result.max_concurrent,
            best: result.best,
            prediction_ms_best: result.best_agent().map(|a| a.prediction_seconds * 1e3),
            prediction_ms_avg: avg * 1e3,
            agents: result
                .agents
                .iter()
                .map(|a| AgentNodeDump {
                    id: a.id,
                    parent: a.parent,
                    status: a.status,
                    cost: a.cost,
                    n_samples: a.trajectory.samples.len(),
                    b_assignment: a
                        .b_assignment
                        .iter()
                        .map(|(k, v)| (*k, [v.x, v.y, v.z]))
                        .collect(),
                    prediction_ms: a.prediction_seconds * 1e3,
                })
                .collect(),
        }
    }
}
