mod common;

use common::*;
use hypoco_core::lyapunov::{algorithm3, build_weight, decay_abscissa};
use hypoco_core::linalg::{c64, eigh, fro_norm, re, ComplexMatrix, ComplexVector, I, ZERO};
use hypoco_core::oseen::{self, ModeState};
use hypoco_core::simulate::{fit_decay, propagate_dae, propagate_ode, uniform_grid};
use hypoco_core::staircase::{dae_short_time_exponent, dynamic_part, staircase_transform};
use hypoco_core::hc_index::geometric_grid;
use hypoco_core::ToleranceConfig;
use rand::Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn stokes_unitary_congruence() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let k = [rng.random_range(-5i64..=5), rng.random_range(1i64..=5)];
        let b = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let t = oseen::build_isotropic_mode(k, b, 0.5).unwrap();
        let p = oseen::stokes_unitary(k).unwrap();
        let jc = &p * t.j() * p.adjoint();
        let nk = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let bk = b[0] * k[0] as f64 + b[1] * k[1] as f64;
        let mut want = ComplexMatrix::zeros(3, 3);
        want[(0, 0)] = c64(0.0, -bk);
        want[(1, 1)] = c64(0.0, -bk);
        want[(0, 2)] = re(-nk);
        want[(2, 0)] = re(nk);
        assert!(fro_norm(&(jc - want)) < 1e-13);
    }
}

#[test]
fn isotropic_dynamic_part() {
    let (k, b, nu) = ([2i64, -1], [0.3, 0.7], 0.4);
    let t = oseen::build_isotropic_mode(k, b, nu).unwrap();
    let s = staircase_transform(&t, &tol()).unwrap();
    let g = dynamic_part(&s).unwrap().generator().unwrap();
    let want = c64(-5.0 * nu, -(2.0 * 0.3 - 0.7));
    assert_eq!(g.shape(), (1, 1));
    assert!((g[(0, 0)] - want).norm() < 1e-13);

    let traj = propagate_ode(&g, &ComplexVector::from_vec(vec![re(1.0)]), &uniform_grid(0.0, 3.0, 31)).unwrap();
    for (t, n) in traj.times.iter().zip(&traj.norms) {
        let e = (-5.0 * nu * t).exp();
        assert!((n - e).abs() <= 1e-10 * e);
    }
}

#[test]
fn constant_drift_axis_mode_is_undamped() {
    let t = oseen::build_aniso_const_mode([3, 0], [0.5, 0.2], 1.0).unwrap();
    let s = staircase_transform(&t, &tol()).unwrap();
    let g = dynamic_part(&s).unwrap().generator().unwrap();
    assert!((g[(0, 0)].re).abs() < 1e-14);
    // off-axis modes are damped
    let t = oseen::build_aniso_const_mode([3, 1], [0.5, 0.2], 1.0).unwrap();
    let g = dynamic_part(&staircase_transform(&t, &tol()).unwrap()).unwrap().generator().unwrap();
    assert!(g[(0, 0)].re < -0.5);
}

#[test]
fn explicit_and_generic_staircase_agree() {
    for (k1, kt) in [(1i64, 4usize), (3, 6), (-2, 5)] {
        let t = oseen::build_aniso_sin_system(k1, 0.8, kt).unwrap();
        let s = staircase_transform(&t, &tol()).unwrap();
        let m = 2 * kt + 1;
        assert_eq!(s.dims.as_array(), [m, m, 0, m, 0]);
        let dp = dynamic_part(&s).unwrap();
        let exp = oseen::sin_staircase(k1, 0.8, kt).unwrap();
        // phase alignment between the two y2 bases
        let gen_rows = s.p.rows(s.dims.offsets()[1], m).into_owned();
        let w = &gen_rows * exp.y2_rows().adjoint();
        assert!(fro_norm(&(&w * w.adjoint() - ComplexMatrix::identity(m, m))) < 1e-10);
        let mapped = &w * exp.generator() * w.adjoint();
        assert!(fro_norm(&(mapped - dp.generator().unwrap())) < 1e-10);
        // the explicit transform realises the same congruence
        let jc = &exp.p * t.j() * exp.p.adjoint();
        let rc = &exp.p * t.r() * exp.p.adjoint();
        let rows: Vec<usize> = (0..m).map(|i| 3 * i + 1).collect();
        let pick = |a: &ComplexMatrix| ComplexMatrix::from_fn(m, m, |i, j| a[(rows[i], rows[j])]);
        assert!(fro_norm(&(pick(&jc) - &exp.j22)) < 1e-13);
        assert!(fro_norm(&(pick(&rc) - &exp.r22)) < 1e-13);
    }
}

#[test]
fn sin_toy_short_time_exponent() {
    let t = oseen::build_aniso_sin_system(1, 1.0, 2).unwrap();
    let fit = dae_short_time_exponent(&t, &geometric_grid(1e-3, 1e-2, 9), &tol()).unwrap();
    assert!((fit.a - 3.0).abs() <= 0.15, "a = {}", fit.a);
}

#[test]
fn q_matrix_is_lyapunov_restriction() {
    let mut rng = rng(22);
    for _ in 0..30 {
        let k1 = rng.random_range(1i64..=20) * if rng.random::<bool>() { 1 } else { -1 };
        let nu = rng.random_range(0.05..5.0);
        let alpha = rng.random_range(0.0..0.7) * (k1.abs() as f64).min(1.0);
        let kt = 8;
        let s = oseen::sin_staircase(k1, nu, kt).unwrap();
        let x = oseen::weight_x(k1, alpha, kt).unwrap();
        let a = s.generator();
        let full = -(a.adjoint() * &x + &x * &a);
        let sub = full.view((kt - 2, kt - 2), (5, 5)).into_owned();
        let q = oseen::q_matrix(k1, alpha, nu);
        assert!(fro_norm(&(sub - q)) < 1e-12 * (1.0 + nu));
    }
}

#[test]
fn algorithm3_weight_matches_explicit_weight() {
    for k1 in [1i64, 2, 5, -3] {
        let kt = 6;
        let s = oseen::sin_staircase(k1, 1.0, kt).unwrap();
        let tr = algorithm3(&s.j22, &s.r22, &tol()).unwrap();
        let alpha = 0.3;
        let x = build_weight(&tr, &[oseen::algorithm3_eps(k1, alpha)]).unwrap();
        let want = oseen::weight_x(k1, alpha, kt).unwrap();
        assert!(fro_norm(&(x - want)) < 1e-13, "k1 = {k1}");
    }
}

#[test]
fn lambda1_am_gm_chain() {
    let mut rng = rng(23);
    for _ in 0..200 {
        let k1 = rng.random_range(1i64..=32);
        let nu = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let am = oseen::alpha_min(nu, &(1..=64).collect::<Vec<_>>()).unwrap();
        let alpha = rng.random_range(0.01..1.0) * am;
        let q = oseen::q_matrix(k1, alpha, nu);
        let ev = eigh(&q).values;
        let tr: f64 = ev.iter().sum();
        let det: f64 = ev.iter().product();
        assert!(ev[0] >= 256.0 * det / tr.powi(4) * (1.0 - 1e-12));
        let minors = oseen::q_minors(k1, alpha, nu);
        assert!(minors.iter().all(|&d| d > 0.0), "{minors:?}");
    }
}

#[test]
fn weight_rejects_large_alpha() {
    assert!(oseen::weight_x(1, 0.8, 4).is_err());
    assert!(oseen::weight_x(2, 0.8, 4).is_ok());
}

#[test]
fn taylor_coefficients_do_not_depend_on_truncation() {
    let a = oseen::taylor_coefficients(0.7, 8).unwrap();
    let b = oseen::taylor_coefficients(0.7, 16).unwrap();
    assert!((a.d3 - b.d3).abs() < 1e-12);
    assert!(oseen::taylor_coefficients(0.7, 3).is_err());
}

#[test]
fn pressure_bounded_by_velocity() {
    let mut rng = rng(24);
    for _ in 0..50 {
        let k1 = rng.random_range(1i64..=6);
        let mut m = random_mode(&mut rng, k1, 10);
        m.p = oseen::pressure_poisson(&m).unwrap();
        let gp = oseen::grad_p_norm_sq(k1, &m.p);
        let u2: f64 = m.phi.iter().map(|v| v[1].norm_sqr()).sum::<f64>() * oseen::TORUS_AREA;
        assert!(gp <= u2 * (1.0 + 1e-12));
        // same pressure from the vorticity coordinates
        let y = oseen::vorticity_coordinates(&m).unwrap();
        let p2 = oseen::pressure_from_y2(&y, k1).unwrap();
        for (a, b) in m.p.iter().zip(&p2) {
            assert!((a - b).norm() <= 1e-14);
        }
    }
}

#[test]
fn vorticity_round_trip() {
    let mut rng = rng(25);
    let m = random_mode(&mut rng, 3, 7);
    let y = oseen::vorticity_coordinates(&m).unwrap();
    let back = oseen::velocity_from_vorticity(3, 7, &y).unwrap();
    for (a, b) in m.phi.iter().zip(&back.phi) {
        assert!((a[0] - b[0]).norm() < 1e-15 && (a[1] - b[1]).norm() < 1e-15);
    }
}

fn max_mode(s: &ModeState) -> f64 {
    s.phi.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn shear_drift_dae_trajectories() {
    let (k1, kt, nu) = (2i64, 8usize, 0.6);
    let t = oseen::build_aniso_sin_system(k1, nu, kt).unwrap();
    let mut rng = rng(26);
    let m0 = random_mode(&mut rng, k1, kt);
    let times = uniform_grid(0.0, 10.0, 51);
    let run = propagate_dae(&t, &m0.to_dae_vector(), &times, &tol()).unwrap();
    assert!(run.correction <= 1e-12);

    let exp = oseen::sin_staircase(k1, nu, kt).unwrap();
    let y0 = ComplexVector::from_vec(oseen::vorticity_coordinates(&m0).unwrap());
    let ode = propagate_ode(&exp.generator(), &y0, &times).unwrap();

    for (i, x) in run.trajectory.states.iter().enumerate() {
        let s = ModeState::from_dae_vector(k1, kt, x).unwrap();
        assert!(s.divergence_defect() <= 1e-10 * max_mode(&s).max(1e-300));
        // unitary invariance of the vorticity coordinates
        let w = run.trajectory.norms[i];
        assert!((w - ode.norms[i]).abs() <= 1e-10 * ode.norms[0]);
        // algebraic pressure equals -i y3
        let y = oseen::vorticity_coordinates(&s).unwrap();
        let p = oseen::pressure_from_y2(&y, k1).unwrap();
        let pn: f64 = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = p.iter().zip(&s.p).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-8 * pn.max(1e-300), "t = {}: {err:e}", times[i]);
        let yi = oseen::y3_from_y2(&y, k1).unwrap();
        assert!(yi.iter().zip(&s.p).all(|(a, b)| (-I * a - b).norm() <= 1e-8 * pn.max(1e-300)));
    }
    // monotone energy
    for w in run.trajectory.norms.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-10));
    }
}

#[test]
fn semigroup_property() {
    let s = oseen::sin_staircase(1, 1.0, 16).unwrap();
    let a = s.generator();
    let mut rng = rng(27);
    let y0 = ComplexVector::from_fn(33, |_, _| cnormal(&mut rng));
    let (t, u) = (0.7, 1.9);
    let at_t = propagate_ode(&a, &y0, &[t]).unwrap().states.remove(0);
    let then = propagate_ode(&a, &at_t, &[u]).unwrap().states.remove(0);
    let direct = propagate_ode(&a, &y0, &[t + u]).unwrap().states.remove(0);
    assert!((then - &direct).norm() <= 1e-9 * direct.norm());
}

#[test]
fn shear_drift_fitted_rate() {
    let nu = 1.0;
    let am = oseen::alpha_min(nu, &(1..=64).collect::<Vec<_>>()).unwrap();
    let lower = oseen::lambda1_min(0.5 * am, nu) / 4.0;
    let mut rates = Vec::new();
    for kt in [16usize, 32] {
        let s = oseen::sin_staircase(1, nu, kt).unwrap();
        let a = s.generator();
        let abscissa = decay_abscissa(&a).unwrap();
        let mut y0 = ComplexVector::zeros(2 * kt + 1);
        y0[kt] = re(1.0);
        y0[kt + 1] = c64(0.0, 0.5);
        let traj = propagate_ode(&a, &y0, &uniform_grid(0.0, 60.0, 121)).unwrap();
        let fit = fit_decay(&traj).unwrap();
        assert!(fit.mu_fit >= lower, "{} < {lower}", fit.mu_fit);
        assert!(fit.mu_fit <= abscissa * 1.01, "{} > abscissa {abscissa}", fit.mu_fit);
        rates.push(fit.mu_fit);
    }
    assert!((rates[0] - rates[1]).abs() <= 0.01 * rates[1]);
}

#[test]
fn quant_report_kappa_table() {
    let rep = oseen::quant_report(1.0, 16, 64).unwrap();
    assert_eq!(rep.kappa_trunc.len(), 16);
    assert!(rep.kappa_trunc.iter().all(|&(_, _, k)| k >= 0.01));
    assert!(rep.minors.iter().all(|(_, _, m)| m.iter().all(|&d| d > 0.0)));
    assert!(oseen::quant_report(1.0, 0, 8).is_err());
}

#[test]
fn zero_state_has_zero_pressure() {
    let s = ModeState::zeros(2, 4);
    assert!(oseen::pressure_poisson(&s).unwrap().iter().all(|&p| p == ZERO));
}
