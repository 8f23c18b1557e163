//! Executable claim suite: every avoidance and convergence guarantee becomes
//! a seeded, tolerance-checked numerical experiment.
//!
//! Each runner produces a [`CheckResult`]; a claim manifest maps every
//! guarantee to the runner that exercises it, and a test fails if any claim
//! lacks a runner.

pub mod checks;
pub mod oracle;

pub use oracle::{oracle_integrate, OracleResult};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Passed,
    Failed,
    /// The reference integration did not converge; no verdict. Never a
    /// silent pass.
    Inconclusive,
}

/// Outcome of one runner.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub n_cases: u64,
    pub n_pass: u64,
    /// Smallest slack observed across all cases and subchecks; negative
    /// means a violation.
    pub worst_margin: f64,
    /// Headline tolerance of the check.
    pub tolerance: f64,
    pub seed: u64,
    pub status: CheckStatus,
    /// First failure context, empty when everything passed.
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Passed
    }
}

/// Margin accumulator shared by the runners.
#[derive(Debug, Clone)]
pub struct Tally {
    pub n_cases: u64,
    pub n_pass: u64,
    pub worst_margin: f64,
    pub detail: String,
    pub inconclusive: bool,
}

impl Tally {
    pub fn new() -> Self {
        Tally {
            n_cases: 0,
            n_pass: 0,
            worst_margin: f64::INFINITY,
            detail: String::new(),
            inconclusive: false,
        }
    }

    /// Records one case. `margin >= 0` counts as a pass.
    pub fn case(&mut self, margin: f64, label: &str) {
        self.n_cases += 1;
        if margin >= 0.0 {
            self.n_pass += 1;
        } else if self.detail.is_empty() {
            self.detail = format!("{label}: margin {margin:.3e}");
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
    }

    /// Records a strict-inequality case (`margin > 0` required).
    pub fn case_strict(&mut self, margin: f64, label: &str) {
        self.n_cases += 1;
        if margin > 0.0 {
            self.n_pass += 1;
        } else if self.detail.is_empty() {
            self.detail = format!("{label}: margin {margin:.3e} not strictly positive");
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
    }

    pub fn mark_inconclusive(&mut self, label: &str) {
        self.inconclusive = true;
        if self.detail.is_empty() {
            self.detail = format!("{label}: reference integration did not converge");
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.n_cases += other.n_cases;
        self.n_pass += other.n_pass;
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
        }
        if self.detail.is_empty() {
            self.detail = other.detail;
        }
        self.inconclusive |= other.inconclusive;
    }

    pub fn into_result(self, check: &'static str, tolerance: f64, seed: u64) -> CheckResult {
        let status = if self.inconclusive {
            CheckStatus::Inconclusive
        } else if self.n_pass == self.n_cases {
            CheckStatus::Passed
        } else {
            CheckStatus::Failed
        };
        CheckResult {
            check,
            n_cases: self.n_cases,
            n_pass: self.n_pass,
            worst_margin: self.worst_margin,
            tolerance,
            seed,
            status,
            detail: self.detail,
        }
    }
}

impl Default for Tally {
    fn default() -> Self {
        Self::new()
    }
}

/// Verified guarantees. Every variant must appear in [`MANIFEST`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Claim {
    /// The avoidance force leaves the speed invariant.
    SpeedInvariance,
    /// Departing states keep departing; the barrier never grows.
    MovingAwayBarrier,
    /// Aligned circulation keeps |S| from shrinking and bounds the barrier.
    FollowingFieldBarrier,
    /// Critical-quadrant states leave the quadrant without collision.
    CriticalQuadrantEscape,
    /// The collision ray is non-attractive: |eps| never decreases.
    RayNonAttractive,
    /// Quadrant exit happens before the closed-form time bounds.
    QuadrantExitTimes,
    /// Collision happens if and only if the start lies on the ray.
    PointCollisionIff,
    /// Departing states survive a budgeted disturbance.
    DisturbedMovingAway,
    /// Aligned states survive a budgeted disturbance.
    DisturbedFollowingField,
    /// Critical states survive a budgeted disturbance with |eps| >= |eps0|/2.
    DisturbedCritical,
    /// Disturbed (R, S) derivatives match their closed forms.
    DisturbedAuxDerivatives,
    /// d/dt ||x_dot||^2 = 2 x_dot . z under disturbance.
    SpeedDisturbanceCoupling,
    /// d/dt c = -2 c (x_dot . z)/||x_dot||^2 under disturbance.
    GainRateCoupling,
    /// The full planner never exceeds the speed cap.
    MaxSpeedBound,
    /// The gate keeps the speed above the floor away from the goal.
    MinSpeedBound,
    /// The recorded force decomposition and integration chain are exact.
    CombinedDynamics,
    /// The full planner reaches the goal with a non-increasing energy.
    GoalConvergence,
    /// Gain adaptation lands the ray distance exactly on eps_min.
    GainAdaptationIdentity,
    /// The RS/(R^2+S^2) lower bound holds strictly on its domain.
    RatioLowerBound,
    /// The uniform multiplicative barrier bound holds for |S0| >= c|R0|.
    UniformBarrierBound,
}

impl Claim {
    pub const ALL: [Claim; 20] = [
        Claim::SpeedInvariance,
        Claim::MovingAwayBarrier,
        Claim::FollowingFieldBarrier,
        Claim::CriticalQuadrantEscape,
        Claim::RayNonAttractive,
        Claim::QuadrantExitTimes,
        Claim::PointCollisionIff,
        Claim::DisturbedMovingAway,
        Claim::DisturbedFollowingField,
        Claim::DisturbedCritical,
        Claim::DisturbedAuxDerivatives,
        Claim::SpeedDisturbanceCoupling,
        Claim::GainRateCoupling,
        Claim::MaxSpeedBound,
        Claim::MinSpeedBound,
        Claim::CombinedDynamics,
        Claim::GoalConvergence,
        Claim::GainAdaptationIdentity,
        Claim::RatioLowerBound,
        Claim::UniformBarrierBound,
    ];
}

/// A check entry point: `(n, seed) -> result`.
pub type Runner = fn(u64, u64) -> CheckResult;

/// Runner registry: name, default case count, entry point.
pub const RUNNERS: &[(&str, u64, Runner)] = &[
    ("velocity_invariance", 100, checks::check_velocity_invariance),
    ("quadrant_guarantees", 500, checks::check_quadrant_guarantees),
    ("collision_ray", 3600, checks::check_collision_ray),
    ("disturbance_robustness", 500, checks::check_disturbance_robustness),
    ("velocity_bounds", 50, checks::check_velocity_bounds),
    ("goal_convergence", 3, checks::check_goal_convergence),
    ("gain_adaptation", 10_000, checks::check_gain_adaptation),
    ("ratio_bound", 100_000, checks::check_ratio_bound),
    ("uniform_barrier", 300, checks::check_uniform_barrier),
];

/// Claim -> runner exercising it.
pub const MANIFEST: &[(Claim, &str)] = &[
    (Claim::SpeedInvariance, "velocity_invariance"),
    (Claim::MovingAwayBarrier, "quadrant_guarantees"),
    (Claim::FollowingFieldBarrier, "quadrant_guarantees"),
    (Claim::CriticalQuadrantEscape, "quadrant_guarantees"),
    (Claim::RayNonAttractive, "quadrant_guarantees"),
    (Claim::QuadrantExitTimes, "quadrant_guarantees"),
    (Claim::PointCollisionIff, "collision_ray"),
    (Claim::DisturbedMovingAway, "disturbance_robustness"),
    (Claim::DisturbedFollowingField, "disturbance_robustness"),
    (Claim::DisturbedCritical, "disturbance_robustness"),
    (Claim::DisturbedAuxDerivatives, "disturbance_robustness"),
    (Claim::SpeedDisturbanceCoupling, "disturbance_robustness"),
    (Claim::GainRateCoupling, "disturbance_robustness"),
    (Claim::MaxSpeedBound, "velocity_bounds"),
    (Claim::MinSpeedBound, "velocity_bounds"),
    (Claim::CombinedDynamics, "velocity_bounds"),
    (Claim::GoalConvergence, "goal_convergence"),
    (Claim::GainAdaptationIdentity, "gain_adaptation"),
    (Claim::RatioLowerBound, "ratio_bound"),
    (Claim::UniformBarrierBound, "uniform_barrier"),
];

/// Runs the named check with `n = 0` meaning its default case count.
pub fn run_check(name: &str, n: u64, seed: u64) -> Option<CheckResult> {
    RUNNERS.iter().find(|(rn, _, _)| *rn == name).map(|(_, default_n, f)| {
        let n = if n == 0 { *default_n } else { n };
        f(n, seed)
    })
}

/// Runs every registered check whose name contains `filter` (all when empty
/// or `None`).
pub fn run_all(filter: Option<&str>, n: u64, seed: u64) -> Vec<CheckResult> {
    RUNNERS
        .iter()
        .filter(|(name, _, _)| filter.is_none_or(|f| f.is_empty() || name.contains(f)))
        .map(|(_, default_n, f)| f(if n == 0 { *default_n } else { n }, seed))
        .collect()
}

/// Machine-readable report plus a human summary table.
#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub results: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn new(results: Vec<CheckResult>, seed: u64) -> Self {
        let all_passed = results.iter().all(|r| r.passed());
        VerificationReport { seed, results, all_passed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<26} {:>9} {:>9} {:>13} {:>10}  {}\n",
            "check", "cases", "passed", "worst margin", "tol", "status"
        ));
        for r in &self.results {
            out.push_str(&format!(
                "{:<26} {:>9} {:>9} {:>13.3e} {:>10.1e}  {:?}{}{}\n",
                r.check,
                r.n_cases,
                r.n_pass,
                r.worst_margin,
                r.tolerance,
                r.status,
                if r.detail.is_empty() { "" } else { " — " },
                r.detail
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_covers_every_claim_with_an_existing_runner() {
        for claim in Claim::ALL {
            let entry = MANIFEST.iter().find(|(c, _)| *c == claim);
            let (_, runner) =
                entry.unwrap_or_else(|| panic!("claim {claim:?} missing from manifest"));
            assert!(
                RUNNERS.iter().any(|(name, _, _)| name == runner),
                "claim {claim:?} names unknown runner {runner}"
            );
        }
    }

    #[test]
    fn tally_aggregates() {
        let mut t = Tally::new();
        t.case(0.5, "a");
        t.case(-0.1, "b");
        t.case_strict(0.0, "c");
        assert_eq!(t.n_cases, 3);
        assert_eq!(t.n_pass, 1);
        assert_eq!(t.worst_margin, -0.1);
        let r = t.into_result("demo", 1e-3, 7);
        assert_eq!(r.status, CheckStatus::Failed);
        assert!(r.detail.contains("b"));
    }

    #[test]
    fn run_check_unknown_name_is_none() {
        assert!(run_check("nope", 0, 0).is_none());
    }
}
