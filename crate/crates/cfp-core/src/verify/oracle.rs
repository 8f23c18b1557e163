//! Independent reference integrator for the numerical checks: explicit Euler
//! with step halving and Richardson extrapolation, so every tolerance
//! statement is consistent with the scheme under test.

/// Result of a converged (or abandoned) reference integration.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Times of the retained coarse-grid samples.
    pub times: Vec<f64>,
    /// Richardson-extrapolated states on the coarse grid.
    pub states: Vec<Vec<f64>>,
    /// Extrapolated time at which the event function first crossed zero.
    pub event_time: Option<f64>,
    /// Number of halvings performed.
    pub halvings: u32,
    /// Sup-norm difference between the last two extrapolants.
    pub sup_diff: f64,
    /// Whether the halving loop met the tolerance.
    pub converged: bool,
}

const MAX_HALVINGS: u32 = 18;

/// Autonomous right-hand side `dy/dt = f(y)` written into the output slice.
pub type OracleSystem<'a> = dyn Fn(&[f64], &mut [f64]) + 'a;
/// Event function; the integration stops at its first zero crossing.
pub type EventFn<'a> = dyn Fn(&[f64]) -> f64 + 'a;

/// Integrates `dy/dt = deriv(y)` from `y0` to `t_end` with explicit Euler,
/// halving the step from `dt0` and Richardson-extrapolating consecutive
/// resolutions until two successive extrapolants agree to `sup_tol` in the
/// sup norm on the shared grid. An optional `event` function stops a run at
/// its first zero crossing (event when `event(y) <= 0`); the crossing time
/// is located by linear interpolation inside the step and extrapolated like
/// the states.
///
/// Non-convergence within the halving budget is reported, never silently
/// accepted.
pub fn oracle_integrate(
    deriv: &OracleSystem<'_>,
    y0: &[f64],
    t_end: f64,
    dt0: f64,
    sup_tol: f64,
    event: Option<&EventFn<'_>>,
) -> OracleResult {
    let mut coarse = euler_run(deriv, y0, t_end, dt0, 1, event);
    let mut fine = euler_run(deriv, y0, t_end, dt0, 2, event);
    let mut prev_extrap = extrapolate(&coarse, &fine);
    let mut halvings = 1;
    let mut sup_diff = f64::INFINITY;
    while halvings < MAX_HALVINGS {
        halvings += 1;
        coarse = fine;
        fine = euler_run(deriv, y0, t_end, dt0, 1u64 << halvings, event);
        let extrap = extrapolate(&coarse, &fine);
        sup_diff = sup_norm_diff(&prev_extrap, &extrap);
        let event_diff = match (prev_extrap.event_time, extrap.event_time) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        if sup_diff < sup_tol && event_diff < sup_tol.max(1e-12) {
            return OracleResult {
                times: extrap.times,
                states: extrap.states,
                event_time: extrap.event_time,
                halvings,
                sup_diff,
                converged: true,
            };
        }
        prev_extrap = extrap;
    }
    OracleResult {
        times: prev_extrap.times,
        states: prev_extrap.states,
        event_time: prev_extrap.event_time,
        halvings,
        sup_diff,
        converged: false,
    }
}

struct Trace {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    event_time: Option<f64>,
}

/// Euler run at step `dt0 / refine`, sampled on the `dt0` grid.
fn euler_run(
    deriv: &OracleSystem<'_>,
    y0: &[f64],
    t_end: f64,
    dt0: f64,
    refine: u64,
    event: Option<&EventFn<'_>>,
) -> Trace {
    let dt = dt0 / refine as f64;
    let n_coarse = (t_end / dt0).round() as u64;
    let mut y = y0.to_vec();
    let mut dy = vec![0.0; y.len()];
    let mut g_prev = event.map(|ev| ev(&y));
    let mut trace = Trace {
        times: Vec::with_capacity(n_coarse as usize + 1),
        states: Vec::with_capacity(n_coarse as usize + 1),
        event_time: None,
    };
    trace.times.push(0.0);
    trace.states.push(y.clone());
    if matches!(g_prev, Some(g) if g <= 0.0) {
        trace.event_time = Some(0.0);
        return trace;
    }
    'outer: for k in 0..n_coarse {
        for j in 0..refine {
            deriv(&y, &mut dy);
            for (yi, di) in y.iter_mut().zip(dy.iter()) {
                *yi += dt * di;
            }
            if let (Some(ev), Some(gp)) = (event, g_prev) {
                let g = ev(&y);
                if g <= 0.0 {
                    // linear interpolation of the crossing inside the step
                    let frac = if gp > g { gp / (gp - g) } else { 1.0 };
                    let t_step = k as f64 * dt0 + j as f64 * dt;
                    trace.event_time = Some(t_step + frac * dt);
                    break 'outer;
                }
                g_prev = Some(g);
            }
        }
        trace.times.push((k + 1) as f64 * dt0);
        trace.states.push(y.clone());
    }
    trace
}

/// First-order Richardson extrapolation of a coarse/fine resolution pair.
fn extrapolate(coarse: &Trace, fine: &Trace) -> Trace {
    let n = coarse.states.len().min(fine.states.len());
    let states = (0..n)
        .map(|i| {
            coarse.states[i]
                .iter()
                .zip(fine.states[i].iter())
                .map(|(c, f)| 2.0 * f - c)
                .collect()
        })
        .collect();
    let event_time = match (coarse.event_time, fine.event_time) {
        (Some(c), Some(f)) => Some(2.0 * f - c),
        _ => None,
    };
    Trace { times: fine.times[..n].to_vec(), states, event_time }
}

fn sup_norm_diff(a: &Trace, b: &Trace) -> f64 {
    let n = a.states.len().min(b.states.len());
    let mut sup: f64 = 0.0;
    for i in 0..n {
        for (x, y) in a.states[i].iter().zip(b.states[i].iter()) {
            // a blown-up integration must never look converged
            if !x.is_finite() || !y.is_finite() {
                return f64::INFINITY;
            }
            sup = sup.max((x - y).abs());
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_converges_to_analytic() {
        // dy/dt = -y, y(0) = 1; y(1) = e^-1
        let res = oracle_integrate(&|y, dy| dy[0] = -y[0], &[1.0], 1.0, 0.1, 1e-8, None);
        assert!(res.converged, "halvings {} sup {}", res.halvings, res.sup_diff);
        let y_end = res.states.last().unwrap()[0];
        assert_relative_eq!(y_end, (-1.0f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let deriv = |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let t_end = std::f64::consts::FRAC_PI_2;
        let res = oracle_integrate(&deriv, &[1.0, 0.0], t_end, t_end / 16.0, 1e-8, None);
        assert!(res.converged, "halvings {} sup {}", res.halvings, res.sup_diff);
        let y = res.states.last().unwrap();
        assert_relative_eq!(y[0], 0.0, epsilon = 1e-6);
        assert_relative_eq!(y[1], -1.0, epsilon = 1e-6);
    }

    #[test]
    fn stiff_system_reports_non_convergence() {
        // Euler is stable here only below dt = 2e-8, which the halving
        // budget from dt0 = 0.1 never reaches; the oracle must say so.
        let res = oracle_integrate(&|y, dy| dy[0] = -1e8 * y[0], &[1.0], 1.0, 0.1, 1e-9, None);
        assert!(!res.converged, "halvings {} sup {}", res.halvings, res.sup_diff);
    }

    #[test]
    fn event_time_of_linear_crossing() {
        // dy/dt = -1 from 1: crosses 0.25 at t = 0.75
        let res = oracle_integrate(
            &|_, dy| dy[0] = -1.0,
            &[1.0],
            2.0,
            0.1,
            1e-9,
            Some(&|y: &[f64]| y[0] - 0.25),
        );
        assert!(res.converged, "halvings {} sup {}", res.halvings, res.sup_diff);
        let t = res.event_time.unwrap();
        assert_relative_eq!(t, 0.75, epsilon = 1e-6);
    }
}
