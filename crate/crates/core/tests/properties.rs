#![allow(clippy::needless_range_loop)]

use mhde_core::constitutive::{
    derived_exponents, validate_hypotheses, CoefficientSet, Kappa0Family, MuFamily, NuFamily, PressureFamily, SampleSpec,
};
use mhde_core::diagnostics::{apriori_norms, default_alphas, inequality_monitors, DiagnosticRecord, RecordOptions, StepWindow};
use mhde_core::dynamics::{CoefficientFields, Dynamics, Physics};
use mhde_core::field_state::{Backend, Field, FieldState, Floors, Grid, Operators, PointValues, Vector};
use mhde_core::runner_io::parse_config;
use proptest::prelude::*;

fn log_samples(n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64)).collect()
}

fn families() -> Vec<CoefficientSet> {
    let r = CoefficientSet::reference();
    vec![
        r,
        CoefficientSet { mu_family: MuFamily::Power { coeff: 1.0, exponent: 0.8 }, ..r },
        CoefficientSet { mu_family: MuFamily::Power { coeff: 0.3, exponent: 2.0 }, ..r },
        CoefficientSet {
            kappa0_family: Kappa0Family::Modulated { base: 0.01, amplitude: 0.5 },
            nu_family: NuFamily::Constant { value: 0.1 },
            pe_family: PressureFamily::Power { coeff: 1.0, exponent: 1.4 },
            ..r
        },
    ]
}

/// Valid parameter sets: beta in (2/3, 1), m > 1, l above and k below
/// their bounds.
fn valid_coefficients() -> impl Strategy<Value = CoefficientSet> {
    (0.67f64..0.99, 1.05f64..4.0, 0.01f64..5.0, 0.0f64..1.0).prop_map(|(beta, m, dl, kf)| {
        let mut c = CoefficientSet { beta, m, ..CoefficientSet::reference() };
        c.cold_exponent = c.cold_exponent_bound() + dl;
        c.stiff_exponent = 1.0 + kf * (c.stiff_exponent_bound() - 1.0);
        c
    })
}

#[test]
fn lambda_identity_holds_for_every_family() {
    for c in families() {
        for s in log_samples(1000) {
            let lambda = c.lambda(s);
            let direct = 2.0 * (s * c.mu_prime(s) - c.mu(s));
            assert!((lambda - direct).abs() <= 1e-12 * lambda.abs().max(1.0), "{s}");
        }
    }
}

#[test]
fn viscosity_is_increasing_and_vanishes_at_vacuum() {
    for c in families() {
        assert!(log_samples(1000).into_iter().all(|s| c.mu_prime(s) > 0.0));
        assert!(c.mu(1e-12) < 1e-8);
    }
}

#[test]
fn phi_derivative_matches_mu_prime_over_s() {
    for c in families() {
        assert!(c.phi(c.density_scale).abs() < 1e-12);
        // d/dt phi(e^t) = mu'(e^t), by a five-point stencil in t.
        let h = 1e-3;
        for s in log_samples(60) {
            let g = |k: f64| c.phi(s * (k * h).exp());
            let fd = (g(-2.0) - 8.0 * g(-1.0) + 8.0 * g(1.0) - g(2.0)) / (12.0 * h);
            let exact = c.mu_prime(s);
            assert!((fd - exact).abs() <= 1e-7 * exact.abs() + 1e-12, "s = {s}: {fd} vs {exact}");
        }
    }
}

#[test]
fn lowering_beta_or_m_fails_with_witness() {
    let spec = SampleSpec::default();
    for c in [
        CoefficientSet { beta: 0.6, ..CoefficientSet::reference() },
        CoefficientSet { m: 0.9, ..CoefficientSet::reference() },
    ] {
        let report = validate_hypotheses(&c, &spec).unwrap();
        assert!(!report.all_pass());
        assert!(report.entries.iter().filter(|e| !e.pass).all(|e| e.witness.is_some()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_exponents_meet_their_bounds(c in valid_coefficients()) {
        prop_assume!(c.check_invariants().is_ok());
        let e = derived_exponents(&c);
        prop_assert!(e.q1 > 1.0 && e.q1 < 2.0);
        prop_assert!(e.q1 > 5.0 / 3.0);
        prop_assert!(e.q3 > 15.0 / 8.0);
        prop_assert!(e.s_exp > 1.0 && e.r_exp > 1.0);
    }
}

/// Random band-limited field: modes with `|k_a| ≤ 3` on the active axes.
fn band_limited(grid: &Grid, coeffs: &[f64]) -> Vec<f64> {
    let d = grid.d();
    (0..grid.n_points())
        .map(|p| {
            let x = grid.point(p);
            let mut v = 0.0;
            let mut i = 0;
            for k0 in 0..=3i32 {
                for k1 in if d > 1 { -3..=3 } else { 0..=0 } {
                    let phase = f64::from(k0) * x[0] + f64::from(k1) * x[1];
                    v += coeffs[i % coeffs.len()] * phase.cos() + coeffs[(i + 7) % coeffs.len()] * phase.sin();
                    i += 1;
                }
            }
            v
        })
        .collect()
}

fn l2(grid: &Grid, v: &Vector) -> f64 {
    mhde_core::field_state::lp_norm(grid, &Field::Vector(v.clone()), 2.0, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_identities(coeffs in prop::collection::vec(-1.0f64..1.0, 11)) {
        let grid = Grid::periodic_cube(2, 16).unwrap();
        let ops = Operators::new(&grid, Backend::Spectral);
        let shifted: Vec<f64> = coeffs.iter().rev().copied().collect();
        let v: Vector = [band_limited(&grid, &coeffs), band_limited(&grid, &shifted), band_limited(&grid, &coeffs[3..])];
        let norm = l2(&grid, &v).max(1e-300);

        let div_curl = ops.divergence(&ops.curl(&v).unwrap()).unwrap();
        prop_assert!(div_curl.iter().all(|x| x.abs() <= 1e-12 * norm));

        let p = ops.project_div_free(&v).unwrap();
        let pp = ops.project_div_free(&p).unwrap();
        let diff: Vector = [0, 1, 2].map(|c| p[c].iter().zip(&pp[c]).map(|(a, b)| a - b).collect());
        prop_assert!(l2(&grid, &diff) <= 1e-12 * norm);

        let f = band_limited(&grid, &shifted[2..]);
        let div = ops.divergence(&v).unwrap();
        let grad = ops.gradient(&f).unwrap();
        let ibp = grid.integrate((0..f.len()).map(|i| f[i] * div[i] + (0..3).map(|c| grad[c][i] * v[c][i]).sum::<f64>()));
        let fnorm = mhde_core::field_state::lp_norm_scalar(&grid, &f, 2.0, None).unwrap();
        prop_assert!(ibp.abs() <= 1e-10 * fnorm.max(1e-300) * norm);
    }

    #[test]
    fn spectral_derivative_of_band_limited_field_is_exact(coeffs in prop::collection::vec(-1.0f64..1.0, 4)) {
        let grid = Grid::periodic_cube(1, 32).unwrap();
        let ops = Operators::new(&grid, Backend::Spectral);
        let f: Vec<f64> = (0..32).map(|p| {
            let x = grid.point(p)[0];
            (1..=4).map(|k| coeffs[k - 1] * (k as f64 * x).sin()).sum::<f64>()
        }).collect();
        let df = ops.derivative(&f, 0).unwrap();
        for p in 0..32 {
            let x = grid.point(p)[0];
            let exact: f64 = (1..=4).map(|k| coeffs[k - 1] * k as f64 * (k as f64 * x).cos()).sum();
            prop_assert!((df[p] - exact).abs() < 1e-12);
        }
    }
}

fn random_state(grid: &Grid, a: &[f64]) -> FieldState {
    FieldState::from_fn(grid, 0.0, |x| {
        let (s, c) = (x[0] + a[0]).sin_cos();
        let s2 = (2.0 * x[0] + a[1]).sin();
        PointValues {
            rho: 1.2 + 0.4 * a[2] * s + 0.2 * a[3] * s2,
            u: [0.3 * a[4] * c, 0.2 * a[5] * s2, 0.1 * a[6] * s],
            theta: 1.0 + 0.3 * a[7] * c,
            h: [0.5 * a[8], 0.4 * a[9] * s + 0.2, 0.3 * a[10] * s2],
        }
    })
}

fn dynamics(grid: &Grid) -> Dynamics {
    Dynamics::new(grid, Backend::Spectral, CoefficientSet::reference(), Physics::default(), Floors::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn steps_conserve_mass_and_keep_h_solenoidal(a in prop::collection::vec(-1.0f64..1.0, 11)) {
        let grid = Grid::periodic_cube(1, 32).unwrap();
        let d = dynamics(&grid);
        let mut s = random_state(&grid, &a);
        s.h = d.ops.project_div_free(&s.h).unwrap();
        let m0 = s.mass();
        for _ in 0..5 {
            let dt = d.stable_dt(&s, 0.4).unwrap();
            let out = d.step(&s, dt).unwrap();
            s = out.state;
            prop_assert!((s.mass() - m0).abs() <= 1e-10 * m0);
            let div = d.ops.divergence(&s.h).unwrap();
            let hmax = s.h.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(div.iter().all(|v| v.abs() <= 1e-10 * hmax.max(1.0)));
        }
    }

    #[test]
    fn constant_states_are_exact_fixed_points(
        rho in 0.1f64..10.0, theta in 0.1f64..10.0,
        u in prop::array::uniform3(-1.0f64..1.0), h in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let grid = Grid::periodic_cube(2, 8).unwrap();
        let d = dynamics(&grid);
        let s = FieldState::constant(&grid, rho, u, theta, h);
        let t = d.rhs(&s).unwrap();
        prop_assert!(t.d_rho.iter().chain(&t.d_theta).all(|v| *v == 0.0));
        prop_assert!(t.d_u.iter().chain(&t.d_h).all(|c| c.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn entropy_production_integrands_are_nonnegative(a in prop::collection::vec(-1.0f64..1.0, 11)) {
        let grid = Grid::periodic_cube(1, 32).unwrap();
        let d = dynamics(&grid);
        let mut s = random_state(&grid, &a);
        s.h = d.ops.project_div_free(&s.h).unwrap();
        let coef = CoefficientFields::evaluate(&s, &d.coeffs).unwrap();
        let kin = d.kinematics(&s.u).unwrap();
        let psi = mhde_core::dynamics::stress_from(&kin, &coef);
        let j = d.ops.curl(&s.h).unwrap();
        let gt = d.ops.gradient(&s.theta).unwrap();
        for p in 0..s.rho.len() {
            let mut visc = 0.0;
            for i in 0..3 {
                for k in 0..3 {
                    visc += psi[i][k][p] * kin.grad_u[i][k][p];
                }
            }
            let theta = s.theta[p];
            let ohmic = coef.nu[p] * (0..3).map(|c| j[c][p] * j[c][p]).sum::<f64>() / theta;
            let fourier = coef.kappa[p] * (0..3).map(|c| gt[c][p] * gt[c][p]).sum::<f64>() / (theta * theta);
            let scale = psi.iter().flatten().map(|c| c[p].abs()).fold(1.0, f64::max);
            prop_assert!(visc / theta >= -1e-14 * scale);
            prop_assert!(ohmic >= 0.0 && fourier >= 0.0);
        }
    }

    #[test]
    fn monitors_and_norms_are_insensitive_to_flow_and_field_sign(a in prop::collection::vec(-1.0f64..1.0, 11)) {
        let grid = Grid::periodic_cube(1, 16).unwrap();
        let d = dynamics(&grid);
        let s = random_state(&grid, &a);
        let mut quiet = s.clone();
        quiet.scale_velocity(0.0);
        quiet.h = [vec![0.0; 16], vec![0.0; 16], vec![0.0; 16]];
        let m = inequality_monitors(&d, &s, None).unwrap();
        let q = inequality_monitors(&d, &quiet, None).unwrap();
        prop_assert_eq!(m.sobolev_high_ratio.to_bits(), q.sobolev_high_ratio.to_bits());
        prop_assert_eq!(m.sobolev_low_ratio.to_bits(), q.sobolev_low_ratio.to_bits());
        let mut flipped = s.clone();
        flipped.scale_velocity(-1.0);
        let alphas = default_alphas(&d);
        prop_assert_eq!(apriori_norms(&d, &s, &alphas).unwrap(), apriori_norms(&d, &flipped, &alphas).unwrap());
    }

    #[test]
    fn record_is_deterministic(a in prop::collection::vec(-1.0f64..1.0, 11)) {
        let grid = Grid::periodic_cube(1, 16).unwrap();
        let d = dynamics(&grid);
        let mut s = random_state(&grid, &a);
        s.h = d.ops.project_div_free(&s.h).unwrap();
        let out = d.step(&s, 1e-3).unwrap();
        let opts = RecordOptions { floors: Floors::default() };
        let x = DiagnosticRecord::compute(&d, &s, Some(&StepWindow::new(&s, &out)), &opts).unwrap();
        let y = DiagnosticRecord::compute(&d, &s, Some(&StepWindow::new(&s, &out)), &opts).unwrap();
        prop_assert_eq!(format!("{x:?}"), format!("{y:?}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_hash_follows_semantic_content(cfl in 0.05f64..1.0, n in 2u32..6, comment in "[a-z ]{0,12}") {
        let text = format!(
            "grid.d = 1\ngrid.dims = {}\ncoefficients.preset = reference\ninitial.profile = poisson\nrun.t_final = 1\nrun.cfl = {cfl}\n",
            1u32 << n
        );
        let base = parse_config(&text).unwrap();
        let commented = parse_config(&format!("# {comment}\n{text}output.dir = \"x{comment}\"\n")).unwrap();
        prop_assert_eq!(base.config_hash(), commented.config_hash());
        let canonical = parse_config(&base.to_text()).unwrap();
        prop_assert_eq!(&canonical, &base);
        let changed = parse_config(&text.replace("run.t_final = 1", "run.t_final = 2")).unwrap();
        prop_assert_ne!(base.config_hash(), changed.config_hash());
    }
}
