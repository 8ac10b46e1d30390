use super::*;
use crate::constitutive::{CoefficientSet, NuFamily, PressureFamily};
use crate::dynamics::Physics;
use crate::field_state::{Backend, Floors, Grid, PointValues};
use std::f64::consts::{PI, TAU};

fn dynamics(grid: &Grid, coeffs: CoefficientSet) -> Dynamics {
    Dynamics::new(grid, Backend::Spectral, coeffs, Physics::default(), Floors::default())
}

fn grid1(n: usize) -> Grid {
    Grid::periodic_cube(1, n).unwrap()
}

fn volume() -> f64 {
    TAU.powi(3)
}

fn manufactured(grid: &Grid) -> FieldState {
    FieldState::from_fn(grid, 0.0, |x| PointValues {
        rho: 1.5 + 0.3 * x[0].sin(),
        u: [0.2 * x[0].sin(), 0.1 * x[0].cos(), 0.0],
        theta: 1.0 + 0.2 * x[0].cos(),
        h: [0.4, 0.5 + 0.3 * x[0].sin(), 0.2 * x[0].cos()],
    })
}

#[test]
fn energy_of_constant_state() {
    let g = grid1(16);
    let c = CoefficientSet {
        specific_heat: 1.0,
        pe_family: PressureFamily::Power { coeff: 1.0, exponent: 1.4 },
        ..CoefficientSet::reference()
    };
    let s = FieldState::constant(&g, 1.0, [0.0; 3], 1.0, [0.0; 3]);
    let e = energy_report(&dynamics(&g, c), &s).unwrap();
    assert!((e.internal - volume()).abs() < 1e-10);
    assert!((e.total - volume()).abs() < 1e-10);
    assert_eq!(e.kinetic, 0.0);
}

#[test]
fn kinetic_and_magnetic_energy_closed_forms() {
    let g = grid1(32);
    let s = FieldState::from_fn(&g, 0.0, |x| PointValues {
        rho: 1.0,
        u: [x[0].sin(), 0.0, 0.0],
        theta: 1.0,
        h: [0.0, 0.7, 0.0],
    });
    let e = energy_report(&dynamics(&g, CoefficientSet::reference()), &s).unwrap();
    assert!((e.kinetic - volume() / 4.0).abs() < 1e-10);
    assert!((e.magnetic - 0.49 * volume() / 2.0).abs() < 1e-10);
}

#[test]
fn entropy_of_unit_state_and_quiet_production() {
    let g = grid1(16);
    let s = FieldState::constant(&g, 1.0, [0.0; 3], 1.0, [0.0; 3]);
    let r = entropy_report(&dynamics(&g, CoefficientSet::reference()), &s, None).unwrap();
    assert_eq!(r.entropy_total, 0.0);
    assert_eq!([r.production_visc, r.production_ohmic, r.production_fourier], [0.0; 3]);
    assert!(r.balance_residual_29.is_none());
}

#[test]
fn constant_state_residuals_vanish() {
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = FieldState::constant(&g, 1.3, [0.2, 0.1, -0.3], 0.8, [0.3, 0.2, 0.1]);
    let out = d.step(&s, 0.01).unwrap();
    let r = balance_residuals(&d, &StepWindow::new(&s, &out)).unwrap();
    assert!(r.max_abs() < 1e-10, "{r:?}");
}

#[test]
fn mismatched_window_is_rejected() {
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    let out = d.step(&s, 0.01).unwrap();
    let other = d.step(&out.state, 0.01).unwrap();
    let w = StepWindow::new(&s, &other);
    assert!(matches!(balance_residuals(&d, &w), Err(DiagnosticsError::Usage(_))));
}

#[test]
fn residuals_are_third_order_in_dt() {
    let g = grid1(32);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    let res = |dt: f64| {
        let out = d.step(&s, dt).unwrap();
        balance_residuals(&d, &StepWindow::new(&s, &out)).unwrap()
    };
    let (a, b) = (res(0.04), res(0.02));
    for (name, x, y) in [
        ("res22", a.res22, b.res22),
        ("res23", a.res23, b.res23),
        ("res13", a.res13, b.res13),
        ("res29", a.res29, b.res29),
        ("rho_log_rho", a.res_rho_log_rho, b.res_rho_log_rho),
    ] {
        let ratio = x.abs() / y.abs();
        assert!(ratio > 6.0, "{name}: {x:e} -> {y:e}");
    }
}

#[test]
fn resistive_decay_closes_energy_balance() {
    let g = grid1(32);
    let c = CoefficientSet { nu_family: NuFamily::Constant { value: 0.1 }, ..CoefficientSet::reference() };
    let d = Dynamics::new(&g, Backend::Spectral, c, Physics { freeze_velocity: true }, Floors::default());
    let s = FieldState::from_fn(&g, 0.0, |x| PointValues { rho: 1.0, u: [0.0; 3], theta: 1.0, h: [0.0, x[0].sin(), 0.0] });
    let out = d.step(&s, 0.01).unwrap();
    let r = balance_residuals(&d, &StepWindow::new(&s, &out)).unwrap();
    // Magnetic energy V/4 decays at rate 2 nu; the residual is the RK3 error.
    assert!(r.res22.abs() < 1e-8 * volume(), "{r:?}");
}

#[test]
fn apriori_of_constant_state() {
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = FieldState::constant(&g, 0.3, [0.0; 3], 2.0, [0.0; 3]);
    let n = apriori_norms(&d, &s, &default_alphas(&d)).unwrap();
    assert!((n.rho_theta - 0.6 * volume()).abs() < 1e-10);
    for v in [n.grad_mu_over_sqrt_rho, n.weighted_grad_u, n.grad_phi, n.grad_log_theta, n.low_density_gradient] {
        assert_eq!(v, 0.0);
    }
    assert!(n.grad_theta_alpha.iter().all(|(_, v)| *v == 0.0));
}

#[test]
fn apriori_sqrt_rho_u_closed_form() {
    let g = grid1(32);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = FieldState::from_fn(&g, 0.0, |x| PointValues { rho: 1.0, u: [x[0].sin(), 0.0, 0.0], theta: 1.0, h: [0.0; 3] });
    let n = apriori_norms(&d, &s, &[]).unwrap();
    assert!((n.sqrt_rho_u - (PI * TAU * TAU).sqrt()).abs() < 1e-10);
}

#[test]
fn apriori_rejects_large_alpha() {
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    assert!(apriori_norms(&d, &s, &[1.5]).is_err());
}

#[test]
fn apriori_is_sign_insensitive_in_u() {
    let g = grid1(32);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    let mut flipped = s.clone();
    flipped.scale_velocity(-1.0);
    let a = apriori_norms(&d, &s, &default_alphas(&d)).unwrap();
    let b = apriori_norms(&d, &flipped, &default_alphas(&d)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn monitors_of_constant_state() {
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = FieldState::constant(&g, 1.1, [0.0; 3], 1.0, [0.0; 3]);
    let m = inequality_monitors(&d, &s, None).unwrap();
    assert_eq!(m.pressure_work.lhs, 0.0);
    assert!(m.pressure_work.rhs >= 0.0);
    assert_eq!(m.pressure_work.slack, m.pressure_work.rhs);
    assert_eq!(m.lorentz_coupling.lhs, 0.0);
    assert!(m.lorentz_coupling.slack >= 0.0);
}

#[test]
fn sobolev_ratios_depend_on_density_only() {
    let g = grid1(32);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    let mut quiet = s.clone();
    quiet.scale_velocity(0.0);
    quiet.h = crate::field_state::zeros(32);
    let a = inequality_monitors(&d, &s, None).unwrap();
    let b = inequality_monitors(&d, &quiet, None).unwrap();
    assert_eq!(a.sobolev_high_ratio, b.sobolev_high_ratio);
    assert!(a.sobolev_high_ratio > 0.0);
    assert_eq!(a.sobolev_low_ratio, 0.0);
}

#[test]
fn electric_field_of_resistive_mode() {
    let g = grid1(32);
    let nu = 0.3;
    let c = CoefficientSet { nu_family: NuFamily::Constant { value: nu }, ..CoefficientSet::reference() };
    let d = dynamics(&g, c);
    let s = FieldState::from_fn(&g, 0.0, |x| PointValues { rho: 1.0, u: [0.0; 3], theta: 1.0, h: [0.0, x[0].sin(), 0.0] });
    let e = electric_field(&d, &s).unwrap();
    for p in 0..32 {
        assert!((e.e_field[2][p] - nu * g.point(p)[0].cos()).abs() < 1e-12);
        assert!(e.e_field[0][p].abs() < 1e-14);
    }
    assert!(e.induction_consistency <= 1e-10);
    let m = electric_field(&d, &manufactured(&g)).unwrap();
    assert!(m.induction_consistency <= 1e-10);
}

#[test]
fn record_columns_match_fields_and_carry_tags() {
    let cols = DiagnosticRecord::columns();
    assert_eq!(cols.len(), 47);
    for tag in ["bd_functional_eq23", "res22_eq22", "res29_eq29", "production_ohmic_eq210", "lemma35_slack"] {
        assert!(cols.iter().any(|c| c == tag), "missing {tag}");
    }
    let g = grid1(16);
    let d = dynamics(&g, CoefficientSet::reference());
    let s = manufactured(&g);
    let out = d.step(&s, 0.01).unwrap();
    let rec = DiagnosticRecord::compute(&d, &s, Some(&StepWindow::new(&s, &out)), &RecordOptions { floors: Floors::default() })
        .unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(&rec).unwrap();
    let bytes = w.into_inner().unwrap();
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, cols);
    let back: DiagnosticRecord = r.deserialize().next().unwrap().unwrap();
    assert_eq!(back, rec);
}
