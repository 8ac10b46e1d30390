//! Mollified sequences of initial data and numerical proxies for their
//! convergence: Cauchy distances between consecutive members and the time
//! and space moduli of the momentum.
//!
//! Every reported quantity is a proxy in a strong norm; the report headers
//! say so.

use crate::constitutive::CoefficientSet;
use crate::dynamics::{Dynamics, DynamicsError, Physics};
use crate::field_state::{
    lp_norm, lp_norm_scalar, magnitude, Backend, Field, FieldError, FieldState, Floors, Operators, Vector,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("sequence spec error: {0}")]
    Spec(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, ConvergenceError>;

/// Smooth cutoff: 1 on `[0, ½]`, 0 on `[1, ∞)`, C^∞ in between.
pub fn mollifier(x: f64) -> f64 {
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let s = (2.0 * x.abs() - 1.0).clamp(0.0, 1.0);
    let (a, b) = (bump(1.0 - s), bump(s));
    a / (a + b)
}

/// Applies the multiplier `ψ(|κ| ε)` to every field of `state`.
pub fn mollify(ops: &Operators, state: &FieldState, eps: f64) -> Result<FieldState> {
    let m = |k: [f64; 3]| mollifier((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt() * eps);
    let mut out = state.clone();
    out.rho = ops.apply_multiplier(&state.rho, m)?;
    out.theta = ops.apply_multiplier(&state.theta, m)?;
    for c in 0..3 {
        out.u[c] = ops.apply_multiplier(&state.u[c], m)?;
        out.h[c] = ops.apply_multiplier(&state.h[c], m)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    /// Closed-form base data sampled on the shared grid.
    pub base: FieldState,
    /// Member `n` is mollified at `eps0 / 2ⁿ`; modes with `|κ| ≥ 1/eps0`
    /// are removed from member 0.
    pub eps0: f64,
    pub members: usize,
    pub backend: Backend,
    pub coeffs: CoefficientSet,
    pub physics: Physics,
    pub floors: Floors,
    /// Time horizon; zero freezes the dynamics.
    pub t_final: f64,
    /// Number of output intervals on `[0, T]`.
    pub outputs: usize,
    pub cfl: f64,
    /// Largest fraction of density and temperature values that may be
    /// floored after mollification.
    pub max_floor_fraction: f64,
    /// Members whose `max|H|` exceeds this are flagged.
    pub h_bound: f64,
}

impl SequenceSpec {
    pub fn eps(&self, n: usize) -> f64 {
        self.eps0 / 2f64.powi(n as i32)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(ConvergenceError::Spec(msg.into()));
        self.base.check_shapes()?;
        if self.members < 2 {
            return bad("a sequence needs at least two members");
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return bad("eps0 must be positive");
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("time horizon must be nonnegative");
        }
        if self.t_final > 0.0 && self.outputs == 0 {
            return bad("a dynamic run needs at least one output interval");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.max_floor_fraction) {
            return bad("floor fraction must lie in [0, 1]");
        }
        if !(self.floors.rho > 0.0 && self.floors.theta > 0.0) {
            return bad("floors must be positive");
        }
        if !(self.h_bound > 0.0) {
            return bad("h_bound must be positive");
        }
        Ok(())
    }

    fn output_times(&self) -> Vec<f64> {
        if self.t_final == 0.0 {
            return vec![0.0];
        }
        (0..=self.outputs).map(|j| self.t_final * j as f64 / self.outputs as f64).collect()
    }
}

/// Mollifies, floors and projects one member.
fn build_member(spec: &SequenceSpec, ops: &Operators, eps: f64) -> Result<FieldState> {
    let mut s = mollify(ops, &spec.base, eps)?;
    let below = s.rho.iter().filter(|v| !(**v >= spec.floors.rho)).count()
        + s.theta.iter().filter(|v| !(**v >= spec.floors.theta)).count();
    let fraction = below as f64 / (2 * s.rho.len()) as f64;
    if fraction > spec.max_floor_fraction {
        return Err(ConvergenceError::Spec(format!(
            "mollification at eps = {eps:e} floors {:.3}% of values (allowed {:.3}%)",
            100.0 * fraction,
            100.0 * spec.max_floor_fraction
        )));
    }
    s.apply_floors(&spec.floors);
    s.h = ops.project_div_free(&s.h)?;
    s.time = 0.0;
    Ok(s)
}

pub fn make_sequence(spec: &SequenceSpec) -> Result<Vec<FieldState>> {
    spec.validate()?;
    let ops = Operators::new(&spec.base.grid, spec.backend);
    (0..spec.members).map(|n| build_member(spec, &ops, spec.eps(n))).collect()
}

/// Moduli of the momentum along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moduli {
    pub time_modulus: f64,
    pub space_modulus: f64,
}

/// Needs at least 8 states at strictly increasing times on one grid.
pub fn compactness_check(trajectory: &[FieldState], backend: Backend) -> Result<Moduli> {
    if trajectory.len() < 8 {
        return Err(ConvergenceError::Usage(format!(
            "compactness check needs at least 8 outputs, got {}",
            trajectory.len()
        )));
    }
    let grid = &trajectory[0].grid;
    for w in trajectory.windows(2) {
        if w[1].grid != *grid || !(w[1].time > w[0].time) {
            return Err(ConvergenceError::Usage("trajectory must share a grid and advance in time".into()));
        }
    }
    let ops = Operators::new(grid, backend);
    let momenta: Vec<Vector> = trajectory.iter().map(FieldState::momentum).collect();
    let mut time_modulus: f64 = 0.0;
    for (w, m) in trajectory.windows(2).zip(momenta.windows(2)) {
        let mut sq = 0.0;
        for c in 0..3 {
            let diff: Vec<f64> = m[1][c].iter().zip(&m[0][c]).map(|(a, b)| a - b).collect();
            sq += ops.hminus1_norm(&diff)?.powi(2);
        }
        time_modulus = time_modulus.max(sq.sqrt() / (w[1].time - w[0].time));
    }
    let mut space_modulus: f64 = 0.0;
    for m in &momenta {
        let jac = ops.jacobian(m)?;
        let frob: Vec<f64> = (0..m[0].len())
            .map(|p| jac.iter().flat_map(|row| row.iter()).map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .collect();
        space_modulus = space_modulus.max(lp_norm_scalar(grid, &frob, 1.0, None)?);
    }
    Ok(Moduli { time_modulus, space_modulus })
}

/// Distances between two trajectories sampled at the same output times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistances {
    /// `max_t ‖Δρ‖_{L²}`.
    pub d_rho: f64,
    /// RMS in time of `‖Δ(ρu)‖_{L^{3/2}}`.
    pub d_momentum: f64,
    /// RMS in time of `‖Δθ‖_{L³}`.
    pub d_theta: f64,
    /// RMS in time of `‖ΔH‖_{L²}`.
    pub d_h: f64,
}

impl PairDistances {
    fn missing() -> Self {
        Self { d_rho: f64::NAN, d_momentum: f64::NAN, d_theta: f64::NAN, d_h: f64::NAN }
    }

    fn values(&self) -> [f64; 4] {
        [self.d_rho, self.d_momentum, self.d_theta, self.d_h]
    }
}

/// `sqrt((1/T) ∫ v²)` by the trapezoidal rule; a single sample is returned
/// as is.
fn rms_in_time(times: &[f64], values: &[f64]) -> f64 {
    if values.len() == 1 {
        return values[0];
    }
    let span = times[times.len() - 1] - times[0];
    let mut acc = crate::field_state::summation::CompensatedSum::new();
    for (t, v) in times.windows(2).zip(values.windows(2)) {
        acc.add(0.5 * (t[1] - t[0]) * (v[0] * v[0] + v[1] * v[1]));
    }
    (acc.total() / span).max(0.0).sqrt()
}

pub fn trajectory_distances(a: &[FieldState], b: &[FieldState]) -> Result<PairDistances> {
    if a.is_empty() || a.len() != b.len() {
        return Err(ConvergenceError::Usage("trajectories must have the same nonzero length".into()));
    }
    let mut times = Vec::with_capacity(a.len());
    let mut rho = Vec::with_capacity(a.len());
    let (mut mom, mut theta, mut h) = (Vec::new(), Vec::new(), Vec::new());
    for (x, y) in a.iter().zip(b) {
        if x.grid != y.grid || x.time != y.time {
            return Err(ConvergenceError::Usage("trajectories must share grid and output times".into()));
        }
        let g = &x.grid;
        let sub = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| u - v).collect::<Vec<f64>>();
        let subv = |p: &Vector, q: &Vector| [0, 1, 2].map(|c| sub(&p[c], &q[c]));
        times.push(x.time);
        rho.push(lp_norm_scalar(g, &sub(&x.rho, &y.rho), 2.0, None)?);
        mom.push(lp_norm(g, &Field::Vector(subv(&x.momentum(), &y.momentum())), 1.5, None)?);
        theta.push(lp_norm_scalar(g, &sub(&x.theta, &y.theta), 3.0, None)?);
        h.push(lp_norm(g, &Field::Vector(subv(&x.h, &y.h)), 2.0, None)?);
    }
    Ok(PairDistances {
        d_rho: rho.iter().copied().fold(0.0, f64::max),
        d_momentum: rms_in_time(&times, &mom),
        d_theta: rms_in_time(&times, &theta),
        d_h: rms_in_time(&times, &h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Contracting,
    Stalled,
    /// A member failed, so some distances are missing.
    Incomplete,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Contracting => "contracting",
            Verdict::Stalled => "stalled",
            Verdict::Incomplete => "incomplete",
        }
    }

    /// Contracting when the last three pairs (or all, if fewer) decrease
    /// strictly, or when every distance is zero.
    pub fn from_distances(d: &[f64]) -> Self {
        let tail = &d[d.len().saturating_sub(3)..];
        if tail.iter().any(|v| v.is_nan()) {
            return Verdict::Incomplete;
        }
        if tail.iter().all(|v| *v == 0.0) {
            return Verdict::Contracting;
        }
        if tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]) {
            Verdict::Contracting
        } else {
            Verdict::Stalled
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSummary {
    pub eps: f64,
    pub moduli: Option<Moduli>,
    pub max_abs_h: f64,
    pub h_bound_exceeded: bool,
    pub steps: u64,
    pub flooring_events: u64,
    /// Failure cause when the member did not reach `T`.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub pairs: Vec<PairDistances>,
    pub members: Vec<MemberSummary>,
    /// Verdicts for density, momentum, temperature and magnetic field.
    pub verdicts: [Verdict; 4],
}

const FIELD_NAMES: [&str; 4] = ["rho", "momentum", "theta", "h"];

pub const CSV_COLUMNS: [&str; 12] = [
    "row",
    "index",
    "eps",
    "d_rho_proxy_sup_t_l2",
    "d_momentum_proxy_l2t_l3half",
    "d_theta_proxy_l2t_l3",
    "d_h_proxy_l2t_l2",
    "time_modulus_proxy_hminus1",
    "space_modulus_proxy_grad_l1",
    "max_abs_h",
    "h_bound_exceeded",
    "status",
];

impl ConvergenceReport {
    pub fn is_partial(&self) -> bool {
        self.members.iter().any(|m| m.failure.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let num = |v: f64| format!("{v:e}");
        let rows = self.pairs.iter().enumerate().map(|(n, p)| {
            let mut r = vec!["pair".to_string(), n.to_string(), String::new()];
            r.extend(p.values().map(num));
            r.extend([String::new(), String::new(), String::new(), String::new()]);
            r.push(if p.d_rho.is_nan() { "missing".into() } else { "ok".into() });
            r
        });
        let members = self.members.iter().enumerate().map(|(n, m)| {
            let mut r = vec!["member".to_string(), n.to_string(), num(m.eps)];
            r.extend([String::new(), String::new(), String::new(), String::new()]);
            match m.moduli {
                Some(md) => r.extend([num(md.time_modulus), num(md.space_modulus)]),
                None => r.extend([String::new(), String::new()]),
            }
            r.push(num(m.max_abs_h));
            r.push(m.h_bound_exceeded.to_string());
            r.push(match &m.failure {
                Some(cause) => format!("failed: {cause}"),
                None => "ok".into(),
            });
            r
        });
        w.write_record(CSV_COLUMNS).expect("in-memory writer");
        for r in rows.chain(members) {
            w.write_record(&r).expect("in-memory writer");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
    }

    pub fn verdict_block(&self) -> String {
        let mut s = String::new();
        s.push_str("# proxy norms (space, time)\n");
        s.push_str("#   rho       L2     max over outputs\n");
        s.push_str("#   momentum  L3/2   L2 in time (RMS)\n");
        s.push_str("#   theta     L3     L2 in time (RMS)\n");
        s.push_str("#   H         L2     L2 in time (RMS)\n");
        s.push_str("#   moduli    H^-1 difference quotient of rho u, L1 of grad(rho u)\n");
        for (name, v) in FIELD_NAMES.iter().zip(&self.verdicts) {
            let _ = writeln!(s, "verdict {name:<9} {}", v.as_str());
        }
        for (n, m) in self.members.iter().enumerate() {
            if let Some(cause) = &m.failure {
                let _ = writeln!(s, "FAILED member {n}: {cause}");
            }
            if m.h_bound_exceeded {
                let _ = writeln!(s, "flag member {n}: max|H| = {:e} exceeds bound", m.max_abs_h);
            }
        }
        s
    }
}

struct MemberRun {
    trajectory: Vec<FieldState>,
    steps: u64,
    flooring_events: u64,
    failure: Option<String>,
}

fn run_member(spec: &SequenceSpec, dynamics: &Dynamics, initial: FieldState) -> MemberRun {
    let times = spec.output_times();
    let mut run = MemberRun { trajectory: vec![initial], steps: 0, flooring_events: 0, failure: None };
    for &t in &times[1..] {
        let last = run.trajectory.last().expect("nonempty trajectory");
        match dynamics.advance_to(last, t, spec.cfl) {
            Ok((s, stats)) => {
                run.steps += stats.steps;
                run.flooring_events += stats.flooring_events;
                run.trajectory.push(s);
            }
            Err(e) => {
                run.failure = Some(format!("at t = {:e}: {e}", last.time));
                break;
            }
        }
    }
    run
}

/// Integrates every member to `T` and compares consecutive members. A
/// member that fails yields a partial report rather than an error.
pub fn run_sequence(spec: &SequenceSpec) -> Result<ConvergenceReport> {
    let initial = make_sequence(spec)?;
    let dynamics = Dynamics::new(&spec.base.grid, spec.backend, spec.coeffs, spec.physics, spec.floors);
    let runs: Vec<MemberRun> = initial.into_par_iter().map(|s| run_member(spec, &dynamics, s)).collect();

    let mut pairs = Vec::with_capacity(runs.len() - 1);
    for w in runs.windows(2) {
        if w[0].failure.is_some() || w[1].failure.is_some() {
            pairs.push(PairDistances::missing());
        } else {
            pairs.push(trajectory_distances(&w[0].trajectory, &w[1].trajectory)?);
        }
    }
    let mut members = Vec::with_capacity(runs.len());
    for (n, run) in runs.iter().enumerate() {
        let max_abs_h = run
            .trajectory
            .iter()
            .flat_map(|s| magnitude(&s.h))
            .fold(0.0, f64::max);
        let moduli = if run.failure.is_none() && run.trajectory.len() >= 8 {
            Some(compactness_check(&run.trajectory, spec.backend)?)
        } else {
            None
        };
        members.push(MemberSummary {
            eps: spec.eps(n),
            moduli,
            max_abs_h,
            h_bound_exceeded: max_abs_h > spec.h_bound,
            steps: run.steps,
            flooring_events: run.flooring_events,
            failure: run.failure.clone(),
        });
    }
    let column = |i: usize| pairs.iter().map(|p| p.values()[i]).collect::<Vec<_>>();
    let verdicts = [0, 1, 2, 3].map(|i| Verdict::from_distances(&column(i)));
    Ok(ConvergenceReport { pairs, members, verdicts })
}
