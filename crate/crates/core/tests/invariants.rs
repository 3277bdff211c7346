mod common;

use common::*;
use hypoco_core::hc_index::{hc_index, hc_index_sum};
use hypoco_core::linalg::{eigenvalues, eigh, fro_norm, inverse, re, spectral_norm, ComplexMatrix, ComplexVector};
use hypoco_core::lyapunov::{algorithm3, check_trace, lmi_check, tune_certificate, verify_envelope};
use hypoco_core::simulate::uniform_grid;
use hypoco_core::staircase::{dynamic_part, staircase_transform, StaircaseForm};
use hypoco_core::types::{hermitian_part, numerical_rank, psd_sqrt};
use hypoco_core::{DaeTriple, ToleranceConfig};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn psd_sqrt_squares_back() {
    let mut rng = rng(11);
    for n in [1usize, 7, 50, 200] {
        let rank = rng.random_range(0..=n);
        let m = random_psd(&mut rng, n, rank);
        let s = psd_sqrt(&m, &tol()).unwrap();
        let err = fro_norm(&(&s * &s - &m)) / fro_norm(&m).max(1.0);
        assert!(err <= 1e-10, "n = {n}: {err:e}");
    }
}

#[test]
fn rank_is_unitarily_invariant() {
    let mut rng = rng(12);
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let rank = rng.random_range(0..=n);
        let m = random_psd(&mut rng, n, rank);
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        assert_eq!(numerical_rank(&m, &tol()), rank);
        assert_eq!(numerical_rank(&(&u * &m * &v), &tol()), rank);
    }
}

#[test]
fn algorithm3_length_matches_index() {
    let mut rng = rng(13);
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let (j, r) = random_pair(&mut rng, n);
        let idx = hc_index_sum(&j, &r, n, &tol()).unwrap().m_hc;
        match algorithm3(&j, &r, &tol()) {
            Ok(tr) => {
                assert_eq!(Some(tr.m_hc), idx);
                check_trace(&tr, 1e-10).unwrap();
            }
            Err(_) => assert_eq!(idx, None),
        }
    }
}

fn random_triple(rng: &mut impl Rng, n: usize) -> DaeTriple {
    let re_ = rng.random_range(0..=n);
    let rr = rng.random_range(0..=n);
    let u = random_unitary(rng, n);
    let e = random_psd(rng, n, re_);
    let j = random_skew(rng, n);
    let r = random_psd(rng, n, rr);
    DaeTriple::new(&u * e * u.adjoint(), j, r, &tol()).unwrap()
}

fn check_form(t: &DaeTriple, s: &StaircaseForm) {
    let n = t.dim();
    let scale = 1.0 + spectral_norm(t.e()).max(spectral_norm(t.j())).max(spectral_norm(t.r()));
    let id = ComplexMatrix::identity(n, n);
    assert!(fro_norm(&(&s.p * s.p.adjoint() - id)) <= 1e-8 * scale);
    let ph = s.p.adjoint();
    assert!(fro_norm(&(&s.p * t.e() * &ph - &s.e_check)) <= 1e-8 * scale);
    assert!(fro_norm(&(&s.p * t.j() * &ph - &s.j_check)) <= 1e-8 * scale);
    assert!(fro_norm(&(&s.p * t.r() * &ph - &s.r_check)) <= 1e-8 * scale);
    assert!(s.pattern_defect() <= 1e-8 * scale);
}

#[test]
fn staircase_invariants_on_random_triples() {
    let mut rng = rng(14);
    let mut checked = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let t = random_triple(&mut rng, n);
        let Ok(s) = staircase_transform(&t, &tol()) else {
            continue;
        };
        check_form(&t, &s);
        // dims survive a unitary pre-congruence
        let w = random_unitary(&mut rng, n);
        let s2 = staircase_transform(&t.congruence(&w), &tol()).unwrap();
        assert_eq!(s.dims, s2.dims);
        if let Ok(dp) = dynamic_part(&s) {
            if dp.present {
                let h = hermitian_part(&dp.a22_hat).unwrap();
                let top = eigh(&h).values.last().copied().unwrap();
                assert!(top <= 1e-9 * (1.0 + spectral_norm(&dp.a22_hat)));
            }
        }
        checked += 1;
    }
    assert!(checked >= 450, "only {checked} triples transformed");
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets.
fn multiset_distance(a: &[hypoco_core::C64], b: &[hypoco_core::C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm() / (1.0 + y.norm())))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn dynamic_spectrum_is_pencil_spectrum() {
    // E > 0: all generalized eigenvalues are finite and equal eig(E^{-1} A)
    let mut rng = rng(15);
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let e = random_psd(&mut rng, n, n) + ComplexMatrix::identity(n, n) * re(0.1);
        let j = random_skew(&mut rng, n);
        let rank = rng.random_range(0..=n);
        let r = random_psd(&mut rng, n, rank);
        let t = DaeTriple::new(e.clone(), j, r, &tol()).unwrap();
        let s = staircase_transform(&t, &tol()).unwrap();
        let dp = dynamic_part(&s).unwrap();
        let got = eigenvalues(&dp.generator().unwrap()).unwrap();
        let want = eigenvalues(&(inverse(&e).unwrap() * t.a())).unwrap();
        let d = multiset_distance(&got, &want);
        assert!(d <= 1e-8, "{got:?} vs {want:?}");
    }
}

#[test]
fn tuned_certificates_bound_trajectories() {
    let mut rng = rng(16);
    let mut certified = 0;
    for _ in 0..10 {
        let n = rng.random_range(2..=5);
        let (j, r) = random_pair(&mut rng, n);
        if hc_index(&j, &r, None, &tol()).unwrap().m_hc.is_none() {
            continue;
        }
        let a = &j - &r;
        let tr = algorithm3(&j, &r, &tol()).unwrap();
        let Ok(cert) = tune_certificate(&a, &tr, &tol()) else {
            continue;
        };
        assert!(lmi_check(&a, &cert.x, cert.mu, &tol()));
        let grid = uniform_grid(0.0, 5.0 / cert.mu.max(0.1), 25);
        for _ in 0..100 {
            let x0 = ComplexVector::from_fn(n, |_, _| cnormal(&mut rng));
            assert!(verify_envelope(&a, &cert, &x0, &grid));
        }
        // d/dt ||x||_X^2 <= -2 mu ||x||_X^2 by finite differences
        let h = 1e-4 / cert.mu;
        let x0 = ComplexVector::from_fn(n, |_, _| cnormal(&mut rng));
        let wn = |x: &ComplexVector| (x.adjoint() * &cert.x * x)[(0, 0)].re;
        let step = hypoco_core::linalg::expm(&(&a * re(h)));
        let mut x = x0;
        for _ in 0..20 {
            let next = &step * &x;
            let d = (wn(&next) - wn(&x)) / h;
            let bound = -2.0 * cert.mu * wn(&x);
            assert!(d <= bound + 1e-6 * bound.abs() + 1e-6 * cert.mu * wn(&x), "{d} > {bound}");
            x = next;
        }
        certified += 1;
    }
    assert!(certified >= 3, "only {certified} certified pairs");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_methods_agree(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng(seed);
        let (j, r) = random_pair(&mut rng, n);
        let rep = hc_index(&j, &r, None, &tol()).unwrap();
        prop_assert!(rep.method_agreement.all());
    }

    #[test]
    fn index_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng(seed);
        let (j, r) = random_pair(&mut rng, n);
        let u = random_unitary(&mut rng, n);
        let a = hc_index(&j, &r, None, &tol()).unwrap().m_hc;
        let b = hc_index(&(&u * &j * u.adjoint()), &(&u * &r * u.adjoint()), None, &tol()).unwrap().m_hc;
        prop_assert_eq!(a, b);
    }
}
