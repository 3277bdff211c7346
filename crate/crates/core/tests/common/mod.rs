#![allow(dead_code)]

use hypoco_core::linalg::{c64, ComplexMatrix, C64};
use hypoco_core::oseen::{velocity_from_vorticity, ModeState};
use hypoco_core::simulate::conjugate_partner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut impl Rng) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| cnormal(rng))
}

pub fn random_skew(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, n);
    (&g - g.adjoint()) * c64(0.5, 0.0)
}

/// `B B^H` with `B` of `rank` columns.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let b = gaussian(rng, n, rank);
    &b * b.adjoint()
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    gaussian(rng, n, n).qr().q()
}

/// Random semi-dissipative pair; some draws have a `J`-invariant subspace
/// inside `ker R` or a short chain, so that every outcome appears.
pub fn random_pair(rng: &mut impl Rng, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    match rng.random_range(0..4) {
        0 if n >= 2 => {
            // block diagonal, undamped second block
            let n1 = rng.random_range(1..n);
            let mut j = ComplexMatrix::zeros(n, n);
            let mut r = ComplexMatrix::zeros(n, n);
            j.view_mut((0, 0), (n1, n1)).copy_from(&random_skew(rng, n1));
            j.view_mut((n1, n1), (n - n1, n - n1)).copy_from(&random_skew(rng, n - n1));
            let rk = rng.random_range(0..=n1);
            r.view_mut((0, 0), (n1, n1)).copy_from(&random_psd(rng, n1, rk));
            let u = random_unitary(rng, n);
            (&u * j * u.adjoint(), &u * r * u.adjoint())
        }
        1 => {
            // skew shift chain damped at one end: index n - 1
            let mut j = ComplexMatrix::zeros(n, n);
            for i in 0..n.saturating_sub(1) {
                let w = 0.5 + rng.random::<f64>();
                j[(i + 1, i)] = c64(w, 0.0);
                j[(i, i + 1)] = c64(-w, 0.0);
            }
            let mut r = ComplexMatrix::zeros(n, n);
            r[(0, 0)] = c64(0.5 + rng.random::<f64>(), 0.0);
            let u = random_unitary(rng, n);
            (&u * j * u.adjoint(), &u * r * u.adjoint())
        }
        _ => {
            let rk = rng.random_range(0..=n);
            (random_skew(rng, n), random_psd(rng, n, rk))
        }
    }
}

/// Random divergence-free modes at `k1 > 0` with decaying vorticity spectrum.
pub fn random_mode(rng: &mut impl Rng, k1: i64, k_trunc: usize) -> ModeState {
    let y: Vec<C64> = (0..2 * k_trunc + 1)
        .map(|i| {
            let k2 = i as f64 - k_trunc as f64;
            cnormal(rng) / (1.0 + k2 * k2)
        })
        .collect();
    velocity_from_vorticity(k1, k_trunc, &y).unwrap()
}

/// Random real, mean-zero, divergence-free field with `|k1| <= k1_max`.
pub fn random_field(rng: &mut impl Rng, k1_max: i64, k_trunc: usize) -> Vec<ModeState> {
    let mut out = Vec::new();
    let mut zero = ModeState::zeros(0, k_trunc);
    for k2 in 1..=k_trunc as i64 {
        let a = cnormal(rng) / (1.0 + (k2 * k2) as f64);
        let i = zero.idx(k2).unwrap();
        let j = zero.idx(-k2).unwrap();
        zero.phi[i][0] = a;
        zero.phi[j][0] = a.conj();
    }
    out.push(zero);
    for k1 in 1..=k1_max {
        let m = random_mode(rng, k1, k_trunc);
        out.push(conjugate_partner(&m));
        out.push(m);
    }
    out
}
