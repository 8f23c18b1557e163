//! Command-line front end for the circular-field planner: run scenarios,
//! roll out virtual agents, execute the verification suite, sample the
//! RS-plane vector field, and compare against the potential-field baseline.

use cfp_core::agents::{plan, AgentParams, AgentTreeDump, CostWeights};
use cfp_core::sim::{
    metrics, simulate, simulate_apf, ApfParams, DisturbanceProfile, Metrics, SimMode, SimOptions,
    Termination, Trajectory,
};
use cfp_core::verify::{run_all, VerificationReport};
use cfp_core::world::{validate_params, Scenario, ScenarioLoadError};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_COLLISION: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "cfp", version, about = "Circular-field reactive motion planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trajectory.csv + metrics.json.
    Run(RunArgs),
    /// Roll out virtual agents; write the agent tree and the best trajectory.
    Agents(AgentsArgs),
    /// Run the numerical verification suite.
    Verify(VerifyArgs),
    /// Sample the (R, S) vector field on a grid, with the collision ray.
    Phase(PhaseArgs),
    /// Compare the planner against the potential-field baseline.
    CompareApf(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Force law: cf (avoidance only), full (planner), disturbed.
    #[arg(long, default_value = "full")]
    mode: String,
    /// Override the scenario integration step [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Override the scenario horizon [s].
    #[arg(long)]
    horizon: Option<f64>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Disturbance magnitude for --mode disturbed [force units].
    #[arg(long)]
    z_max: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AgentsArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Prediction step [s]; defaults to the scenario step.
    #[arg(long)]
    dt_pred: Option<f64>,
    /// Cost weights "w_len,w_dist".
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Only run checks whose name contains this substring.
    #[arg(long)]
    claims: Option<String>,
    /// Case count per check (0 = per-check default).
    #[arg(long, default_value_t = 0)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the machine-readable report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Grid specification "min,max,step" applied to both R and S.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Speed held constant in the reduced system.
    #[arg(long, default_value_t = 1.0)]
    v_norm: f64,
    #[arg(long, default_value_t = 1.0)]
    k_cf: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Repulsion gain of the baseline.
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    /// Repulsion influence radius of the baseline [m].
    #[arg(long, default_value_t = 0.5)]
    rho0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Agents(args) => cmd_agents(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Phase(args) => cmd_phase(args),
        Command::CompareApf(args) => cmd_compare(args),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Scenario(ScenarioLoadError),
    BadFlag(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Scenario(e) => write!(f, "{e}"),
            CliError::BadFlag(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(_) | CliError::BadFlag(_) => EXIT_VALIDATION,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let json = std::fs::read_to_string(path)?;
    let scenario = Scenario::from_json(&json).map_err(CliError::Scenario)?;
    let report = validate_params(&scenario.params, true);
    if !report.all_passed() {
        eprintln!("warning: guarantee conditions not met (simulation proceeds, guarantees void):");
        for check in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("  {}: {}", check.name, check.detail);
        }
    }
    Ok(scenario)
}

fn cmd_run(args: RunArgs) -> Result<u8, CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(dt) = args.dt {
        scenario.dt = dt;
    }
    if let Some(h) = args.horizon {
        scenario.horizon = h;
    }
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let mode = match args.mode.as_str() {
        "cf" => SimMode::CfOnly,
        "full" => SimMode::Full,
        "disturbed" => {
            let z_max = args.z_max.ok_or_else(|| {
                CliError::BadFlag("--mode disturbed requires --z-max".to_string())
            })?;
            SimMode::Disturbed(DisturbanceProfile { z_max, seed: scenario.seed })
        }
        other => return Err(CliError::BadFlag(format!("unknown mode {other}"))),
    };
    let traj = simulate(&scenario, &SimOptions::new(mode))
        .map_err(|e| CliError::BadFlag(e.to_string()))?;
    let m = metrics(&traj, &scenario.obstacles);

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("trajectory.csv"), trajectory_csv(&traj))?;
    std::fs::write(args.out.join("metrics.json"), metrics_json(&m))?;
    println!(
        "{:?}: {} samples, length {:.3} m, duration {:.3} s, min distance {:.4} m",
        traj.terminated_by,
        traj.samples.len(),
        m.path_length,
        m.duration,
        m.min_obstacle_distance
    );
    Ok(if traj.terminated_by == Termination::Collision { EXIT_COLLISION } else { 0 })
}

fn cmd_agents(args: AgentsArgs) -> Result<u8, CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let mut params = AgentParams::new(&scenario);
    if let Some(dt) = args.dt_pred {
        params.dt_pred = dt;
    }
    if let Some(w) = &args.weights {
        let parts: Vec<f64> = w
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::BadFlag(format!("bad --weights {w}, expected w_len,w_dist")))?;
        if parts.len() != 2 {
            return Err(CliError::BadFlag("expected --weights w_len,w_dist".to_string()));
        }
        params.weights = CostWeights { w_len: parts[0], w_dist: parts[1], ..params.weights };
    }
    let result = plan(&scenario, &params).map_err(|e| CliError::BadFlag(e.to_string()))?;

    std::fs::create_dir_all(&args.out)?;
    let dump = AgentTreeDump::new(&result, &params);
    std::fs::write(
        args.out.join("agent_tree.json"),
        serde_json::to_string_pretty(&dump).expect("tree serialization"),
    )?;
    match result.best_agent() {
        Some(best) => {
            std::fs::write(
                args.out.join("best_trajectory.csv"),
                trajectory_csv(&best.trajectory),
            )?;
            println!(
                "{} agents ({} concurrent max); best agent {} with cost {:.4}",
                result.agents.len(),
                result.max_concurrent,
                best.id,
                best.cost
            );
        }
        None => println!(
            "{} agents, none finished; the controller keeps its current field choices",
            result.agents.len()
        ),
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, CliError> {
    let results = run_all(args.claims.as_deref(), args.n, args.seed);
    if results.is_empty() {
        return Err(CliError::BadFlag(format!(
            "no checks match filter {:?}",
            args.claims.unwrap_or_default()
        )));
    }
    let report = VerificationReport::new(results, args.seed);
    print!("{}", report.render_table());
    if let Some(out) = args.out {
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(&out, report.to_json())?;
    }
    Ok(if report.all_passed { 0 } else { EXIT_VERIFICATION })
}

fn cmd_phase(args: PhaseArgs) -> Result<u8, CliError> {
    let parts: Vec<f64> = args
        .grid
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::BadFlag(format!("bad --grid {}, expected min,max,step", args.grid)))?;
    let [min, max, step] = parts[..] else {
        return Err(CliError::BadFlag("expected --grid min,max,step".to_string()));
    };
    if step <= 0.0 || max <= min {
        return Err(CliError::BadFlag("grid needs max > min and step > 0".to_string()));
    }
    let v2 = args.v_norm * args.v_norm;
    let c = args.k_cf / v2;
    let n = ((max - min) / step).round() as i64;

    let mut field = String::from("R,S,dR,dS\n");
    for i in 0..=n {
        for j in 0..=n {
            let r = min + i as f64 * step;
            let s = min + j as f64 * step;
            let rho2 = r * r + s * s;
            let (dr, ds) = if rho2 > 0.0 {
                (args.k_cf * r * s / rho2 + v2, -args.k_cf * r * r / rho2)
            } else {
                (f64::NAN, f64::NAN)
            };
            field.push_str(&format!("{},{},{},{}\n", fmt(r), fmt(s), fmt(dr), fmt(ds)));
        }
    }
    // the collision ray S = -cR over the critical quadrant part of the grid
    let mut ray = String::from("R,S\n");
    let mut r = min.min(0.0);
    while r < 0.0 {
        let s = -c * r;
        if s <= max {
            ray.push_str(&format!("{},{}\n", fmt(r), fmt(s)));
        }
        r += step / 4.0;
    }
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("phase.csv"), field)?;
    std::fs::write(args.out.join("collision_ray.csv"), ray)?;
    println!("sampled {} x {} grid (c = {:.6})", n + 1, n + 1, c);
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> Result<u8, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let cfp = simulate(&scenario, &SimOptions::new(SimMode::Full))
        .map_err(|e| CliError::BadFlag(e.to_string()))?;
    let apf = simulate_apf(&scenario, &ApfParams { eta: args.eta, rho0: args.rho0 })
        .map_err(|e| CliError::BadFlag(e.to_string()))?;
    let m_cfp = metrics(&cfp, &scenario.obstacles);
    let m_apf = metrics(&apf, &scenario.obstacles);

    println!(
        "{:<8} {:>12} {:>14} {:>16} {:>17}",
        "Planner", "Length [m]", "Duration [s]", "Min. Dist. [m]", "Comp. Time [us]"
    );
    for (name, t, m) in [("APF", &apf, &m_apf), ("CFP", &cfp, &m_cfp)] {
        let reached = t.terminated_by == Termination::GoalReached;
        println!(
            "{:<8} {:>12} {:>14} {:>16.2} {:>17.2}",
            name,
            if reached { format!("{:.2}", m.path_length) } else { "Failed".to_string() },
            if reached { format!("{:.1}", m.duration) } else { "Failed".to_string() },
            m.min_obstacle_distance,
            m.mean_step_compute_time * 1e6
        );
    }
    if let Some(out) = args.out {
        #[derive(serde::Serialize)]
        struct Comparison {
            cfp: Summary,
            apf: Summary,
        }
        #[derive(serde::Serialize)]
        struct Summary {
            terminated_by: Termination,
            length_m: f64,
            duration_s: f64,
            min_dist_m: f64,
            comp_time_us: f64,
        }
        let summarize = |t: &Trajectory, m: &Metrics| Summary {
            terminated_by: t.terminated_by,
            length_m: m.path_length,
            duration_s: m.duration,
            min_dist_m: m.min_obstacle_distance,
            comp_time_us: m.mean_step_compute_time * 1e6,
        };
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(
            &out,
            serde_json::to_string_pretty(&Comparison {
                cfp: summarize(&cfp, &m_cfp),
                apf: summarize(&apf, &m_apf),
            })
            .expect("comparison serialization"),
        )?;
    }
    Ok(0)
}

/// 17 significant digits: round-trips an f64 exactly.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(
        "t,x,y,z,vx,vy,vz,R,S,eps,Vb,fcf_x,fcf_y,fcf_z,fvlc_x,fvlc_y,fvlc_z,gate\n",
    );
    for s in &traj.samples {
        let (r, sv, eps, vb) = match &s.aux {
            Some(a) => (a.r, a.s, a.eps, a.v_b),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(s.t),
            fmt(s.position.x),
            fmt(s.position.y),
            fmt(s.position.z),
            fmt(s.velocity.x),
            fmt(s.velocity.y),
            fmt(s.velocity.z),
            fmt(r),
            fmt(sv),
            fmt(eps),
            fmt(vb),
            fmt(s.force.f_cf.x),
            fmt(s.force.f_cf.y),
            fmt(s.force.f_cf.z),
            fmt(s.force.f_vlc.x),
            fmt(s.force.f_vlc.y),
            fmt(s.force.f_vlc.z),
            s.force.gate as u8
        ));
    }
    out
}

fn metrics_json(m: &Metrics) -> String {
    #[derive(serde::Serialize)]
    struct MetricsFile {
        length_m: f64,
        duration_s: f64,
        min_dist_m: f64,
        comp_time_us: f64,
    }
    serde_json::to_string_pretty(&MetricsFile {
        length_m: m.path_length,
        duration_s: m.duration,
        min_dist_m: m.min_obstacle_distance,
        comp_time_us: m.mean_step_compute_time * 1e6,
    })
    .expect("metrics serialization")
}
