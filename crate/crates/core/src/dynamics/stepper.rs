use super::{CoefficientFields, Dynamics, DynamicsError, Result, Tendencies};
use crate::field_state::FieldState;

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: FieldState,
    /// Stage states `Y1, Y2, Y3` at times `t, t + dt, t + dt/2`.
    pub stages: [FieldState; 3],
    pub dt: f64,
    /// Values clamped by the floors during this step.
    pub flooring_events: usize,
}

/// Butcher weights of the three stages.
pub const STAGE_WEIGHTS: [f64; 3] = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];

/// `a * x + b * (y + dt * k)`, with `time` assigned to the result.
fn combine(a: f64, x: &FieldState, b: f64, y: &FieldState, dt: f64, k: &Tendencies, time: f64) -> FieldState {
    let lin = |xs: &[f64], ys: &[f64], ks: &[f64]| -> Vec<f64> {
        xs.iter().zip(ys).zip(ks).map(|((x, y), k)| a * x + b * (y + dt * k)).collect()
    };
    FieldState {
        grid: x.grid.clone(),
        time,
        rho: lin(&x.rho, &y.rho, &k.d_rho),
        u: [0, 1, 2].map(|c| lin(&x.u[c], &y.u[c], &k.d_u[c])),
        theta: lin(&x.theta, &y.theta, &k.d_theta),
        h: [0, 1, 2].map(|c| lin(&x.h[c], &y.h[c], &k.d_h[c])),
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn check_growth(name: &'static str, old: &[f64], new: &[f64]) -> Result<()> {
    let (before, after) = (max_abs(old), max_abs(new));
    if !after.is_finite() || after > 10.0 * before.max(1.0) {
        return Err(DynamicsError::StepRejected { field: name, before, after });
    }
    Ok(())
}

/// `cfl * min(dx / speed, dx^2 / (2 d diffusivity))`; a zero speed or
/// diffusivity drops the corresponding bound.
pub fn stable_dt_bound(dx: f64, d: usize, max_speed: f64, max_diffusivity: f64, cfl: f64) -> f64 {
    let advective = if max_speed > 0.0 { dx / max_speed } else { f64::INFINITY };
    let diffusive = if max_diffusivity > 0.0 {
        dx * dx / (2.0 * d as f64 * max_diffusivity)
    } else {
        f64::INFINITY
    };
    cfl * advective.min(diffusive)
}

impl Dynamics {
    /// One SSP-RK3 step in Shu–Osher form.
    pub fn step(&self, state: &FieldState, dt: f64) -> Result<StepOutcome> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::Usage(format!("time step {dt} must be positive")));
        }
        let t = state.time;
        let y1 = state.clone();
        let k1 = self.rhs(&y1)?;
        let y2 = combine(0.0, state, 1.0, &y1, dt, &k1, t + dt);
        let k2 = self.rhs(&y2)?;
        let y3 = combine(0.75, state, 0.25, &y2, dt, &k2, t + 0.5 * dt);
        let k3 = self.rhs(&y3)?;
        let mut next = combine(1.0 / 3.0, state, 2.0 / 3.0, &y3, dt, &k3, t + dt);
        next.h = self.ops.project_div_free(&next.h)?;

        check_growth("rho", &state.rho, &next.rho)?;
        check_growth("theta", &state.theta, &next.theta)?;
        const U: [&str; 3] = ["u1", "u2", "u3"];
        const H: [&str; 3] = ["H1", "H2", "H3"];
        for c in 0..3 {
            check_growth(U[c], &state.u[c], &next.u[c])?;
            check_growth(H[c], &state.h[c], &next.h[c])?;
        }
        let flooring_events = next.apply_floors(&self.floors);
        Ok(StepOutcome { state: next, stages: [y1, y2, y3], dt, flooring_events })
    }

    /// Largest stable time step times `cfl`.
    pub fn stable_dt(&self, state: &FieldState, cfl: f64) -> Result<f64> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(DynamicsError::Usage(format!("cfl {cfl} must lie in (0, 1]")));
        }
        self.check_state(state)?;
        let coef = CoefficientFields::evaluate(state, &self.coeffs)?;
        let cv = self.coeffs.specific_heat;
        let mut speed: f64 = 0.0;
        let mut diffusivity: f64 = 0.0;
        for p in 0..state.rho.len() {
            let (r, th) = (state.rho[p], state.theta[p]);
            let h2 = state.h.iter().map(|c| c[p] * c[p]).sum::<f64>();
            let u = state.u.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt();
            let c2 = self.coeffs.fast_speed_squared(r, th, h2);
            if !c2.is_finite() || !u.is_finite() {
                return Err(DynamicsError::Numeric { term: "wave speed" });
            }
            speed = speed.max(u + c2.max(0.0).sqrt());
            let (mu, lam) = (coef.mu[p], coef.lambda[p]);
            let local = (mu / r)
                .max((3.0 * lam + 2.0 * mu) / r)
                .max(coef.kappa[p] / (cv * r))
                .max(coef.nu[p]);
            diffusivity = diffusivity.max(local);
        }
        if !diffusivity.is_finite() {
            return Err(DynamicsError::Numeric { term: "diffusivity" });
        }
        Ok(stable_dt_bound(state.grid.min_spacing(), state.grid.d(), speed, diffusivity, cfl))
    }
}

/// Totals accumulated by [`Dynamics::advance_to`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdvanceStats {
    pub steps: u64,
    pub flooring_events: u64,
}

impl Dynamics {
    /// Steps with `dt = min(cfl * stable, remaining)` until `target`, landing
    /// on `target` exactly.
    pub fn advance_to(&self, state: &FieldState, target: f64, cfl: f64) -> Result<(FieldState, AdvanceStats)> {
        let mut s = state.clone();
        let mut stats = AdvanceStats::default();
        let tol = 1e-12 * target.abs().max(1.0);
        while target - s.time > tol {
            let dt = self.stable_dt(&s, cfl)?.min(target - s.time);
            let out = self.step(&s, dt)?;
            stats.steps += 1;
            stats.flooring_events += out.flooring_events as u64;
            s = out.state;
        }
        s.time = target;
        Ok((s, stats))
    }
}
