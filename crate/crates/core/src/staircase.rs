//! Staircase form of a semi-dissipative triple `(E, J, R)`, pencil
//! classification, and the dynamic part of the DAE.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hc_index::{hc_index, short_time_exponent, HcIndexReport, MethodAgreement, ShortTimeFit};
use crate::linalg::{
    self, block, block_diag, c64, condition_number, eigh, fro_norm, hstack, null_space, orthonormal_complement,
    re, spectral_norm, ComplexMatrix, ComplexVector, C64,
};
use crate::types::{hermitian_part, numerical_rank, skew_part, DaeTriple, ToleranceConfig};

/// Block sizes `n1..n5` of the staircase form; `n4 == n1` always.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaircaseDims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n4: usize,
    pub n5: usize,
}

impl StaircaseDims {
    pub fn as_array(&self) -> [usize; 5] {
        [self.n1, self.n2, self.n3, self.n4, self.n5]
    }

    /// Start offsets of the five blocks, plus the total size.
    pub fn offsets(&self) -> [usize; 6] {
        let s = self.as_array();
        let mut o = [0; 6];
        for k in 0..5 {
            o[k + 1] = o[k] + s[k];
        }
        o
    }

    pub fn total(&self) -> usize {
        self.offsets()[5]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StaircaseWarning {
    /// A block that must be invertible has condition number above `1e8`.
    IllConditioned { block: &'static str, condition: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseForm {
    pub p: ComplexMatrix,
    pub dims: StaircaseDims,
    pub e_check: ComplexMatrix,
    pub j_check: ComplexMatrix,
    pub r_check: ComplexMatrix,
    pub warnings: Vec<StaircaseWarning>,
}

const ILL_CONDITIONED: f64 = 1e8;

fn pattern_tol(tol: &ToleranceConfig) -> f64 {
    (100.0 * tol.rank_rtol).max(1e-8)
}

fn columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Thin SVD split: (left range basis, right range basis) for singular values
/// above `threshold`.
fn svd_ranges(m: &ComplexMatrix, threshold: f64) -> (ComplexMatrix, ComplexMatrix) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (ComplexMatrix::zeros(r, 0), ComplexMatrix::zeros(c, 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    idx.retain(|&i| svd.singular_values[i] > threshold);
    (columns(&u, &idx), columns(&v, &idx))
}

/// Computes unitary `P` with `P E P^H`, `P J P^H`, `P R P^H` in staircase form.
pub fn staircase_transform(t: &DaeTriple, tol: &ToleranceConfig) -> Result<StaircaseForm> {
    let n = t.dim();
    let (e, j, r) = (t.e(), t.j(), t.r());
    let scale = spectral_norm(j).max(spectral_norm(r));
    let thr = tol.rank_rtol * scale;

    // Step 1: split E into positive and zero eigenspaces.
    let eig = eigh(e);
    let e_scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut pos: Vec<usize> = (0..n).filter(|&i| eig.values[i] > tol.rank_rtol * e_scale).collect();
    pos.reverse();
    let zero: Vec<usize> = (0..n).filter(|i| !pos.contains(i)).collect();
    let nt1 = pos.len();
    let z = n - nt1;
    let u1 = hstack(&[columns(&eig.vectors, &pos), columns(&eig.vectors, &zero)]);
    let p1 = u1.adjoint();

    // Step 2: split the trailing block of J - R into kernel and complement.
    let a1 = &p1 * t.a() * &u1;
    let m = block(&a1, nt1, z, nt1, z);
    let w_ker = null_space(&m, thr);
    let w_rng = orthonormal_complement(&w_ker);
    let nt2 = w_rng.ncols();
    let nt3 = z - nt2;
    let p2 = block_diag(&[ComplexMatrix::identity(nt1, nt1), hstack(&[w_rng, w_ker]).adjoint()]);
    let p21 = &p2 * &p1;

    // Step 3: SVD of the coupling J31 between the E-range and the kernel.
    let j2 = &p21 * j * p21.adjoint();
    let j31 = block(&j2, nt1 + nt2, nt3, 0, nt1);
    let (u_rng, v_rng) = svd_ranges(&j31, thr);
    let n1 = v_rng.ncols();
    let v_full = hstack(&[v_rng.clone(), orthonormal_complement(&v_rng)]);
    let u_full = hstack(&[u_rng.clone(), orthonormal_complement(&u_rng)]);
    let p3 = block_diag(&[v_full.adjoint(), ComplexMatrix::identity(nt2, nt2), u_full.adjoint()]);
    let p = &p3 * &p21;

    let dims = StaircaseDims {
        n1,
        n2: nt1 - n1,
        n3: nt2,
        n4: n1,
        n5: nt3 - n1,
    };
    let ph = p.adjoint();
    let form = StaircaseForm {
        e_check: &p * e * &ph,
        j_check: &p * j * &ph,
        r_check: &p * r * &ph,
        p,
        dims,
        warnings: Vec::new(),
    };
    form.verified(t, tol)
}

impl StaircaseForm {
    pub fn blk(m: &ComplexMatrix, dims: &StaircaseDims, bi: usize, bj: usize) -> ComplexMatrix {
        let o = dims.offsets();
        block(m, o[bi - 1], o[bi] - o[bi - 1], o[bj - 1], o[bj] - o[bj - 1])
    }

    fn e_blk(&self, bi: usize, bj: usize) -> ComplexMatrix {
        Self::blk(&self.e_check, &self.dims, bi, bj)
    }

    fn a_blk(&self, bi: usize, bj: usize) -> ComplexMatrix {
        Self::blk(&(&self.j_check - &self.r_check), &self.dims, bi, bj)
    }

    /// Largest entry that the staircase zero pattern requires to vanish.
    pub fn pattern_defect(&self) -> f64 {
        let o = self.dims.offsets();
        let block_of = |i: usize| (1..=5).find(|&b| i < o[b]).unwrap_or(5);
        let j_allowed = |bi: usize, bj: usize| match bi {
            1 => bj <= 4,
            2 | 3 => bj <= 3,
            4 => bj == 1,
            _ => false,
        };
        let n = self.dims.total();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                let (bi, bk) = (block_of(i), block_of(k));
                if bi >= 3 || bk >= 3 {
                    worst = worst.max(self.e_check[(i, k)].norm());
                }
                if bi >= 4 || bk >= 4 {
                    worst = worst.max(self.r_check[(i, k)].norm());
                }
                if !j_allowed(bi, bk) {
                    worst = worst.max(self.j_check[(i, k)].norm());
                }
            }
        }
        worst
    }

    fn verified(mut self, t: &DaeTriple, tol: &ToleranceConfig) -> Result<Self> {
        let n = t.dim();
        let scale = 1.0f64
            .max(spectral_norm(t.e()))
            .max(spectral_norm(t.j()))
            .max(spectral_norm(t.r()));
        let ptol = pattern_tol(tol);
        let unit = fro_norm(&(&self.p * self.p.adjoint() - ComplexMatrix::identity(n, n)));
        if unit > ptol {
            return Err(Error::Invariant(format!("staircase transform not unitary (defect {unit:e})")));
        }
        let defect = self.pattern_defect();
        if defect > ptol * scale {
            return Err(Error::Invariant(format!("staircase zero pattern violated (defect {defect:e})")));
        }
        let d = self.dims;
        let check = |m: ComplexMatrix, name: &'static str, warnings: &mut Vec<StaircaseWarning>| -> Result<()> {
            if m.nrows() == 0 {
                return Ok(());
            }
            if numerical_rank(&m, tol) < m.nrows() {
                return Err(Error::Invariant(format!("staircase block {name} is singular")));
            }
            let cond = condition_number(&m);
            if cond > ILL_CONDITIONED {
                warnings.push(StaircaseWarning::IllConditioned { block: name, condition: cond });
            }
            Ok(())
        };
        let mut warnings = Vec::new();
        let o = d.offsets();
        check(block(&self.e_check, 0, o[2], 0, o[2]), "E[1..2,1..2]", &mut warnings)?;
        check(self.a_blk(3, 3), "A33", &mut warnings)?;
        check(Self::blk(&self.j_check, &d, 4, 1), "J41", &mut warnings)?;
        self.warnings = warnings;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicPart {
    pub e22: ComplexMatrix,
    pub a22_hat: ComplexMatrix,
    pub present: bool,
}

impl DynamicPart {
    /// `E22^{-1} A22_hat`, the generator of `y2`.
    pub fn generator(&self) -> Result<ComplexMatrix> {
        linalg::solve(&self.e22, &self.a22_hat).ok_or(Error::Singular("E22"))
    }

    /// `E22^{-1/2} A22_hat E22^{-1/2}`, the generator in the `E22`-weighted norm.
    pub fn normalized(&self) -> Result<ComplexMatrix> {
        let w = inv_sqrt_pd(&self.e22)?;
        Ok(&w * &self.a22_hat * &w)
    }
}

fn inv_sqrt_pd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigh(m);
    let n = m.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if !(lam > 0.0) {
            return Err(Error::Singular("E22"));
        }
        let v = eig.vectors.column(k);
        out += v * v.adjoint() * re(1.0 / linalg::sqrt(lam));
    }
    Ok(out)
}

/// Dynamic part `E22 y2' = A22_hat y2` after eliminating the slaved blocks.
pub fn dynamic_part(s: &StaircaseForm) -> Result<DynamicPart> {
    let d = s.dims;
    if d.n5 > 0 {
        return Err(Error::IndexTooHigh(d.n5));
    }
    if d.n2 == 0 {
        return Ok(DynamicPart {
            e22: ComplexMatrix::zeros(0, 0),
            a22_hat: ComplexMatrix::zeros(0, 0),
            present: false,
        });
    }
    let a22 = s.a_blk(2, 2);
    let a22_hat = if d.n3 == 0 {
        a22
    } else {
        let x = linalg::solve(&s.a_blk(3, 3), &s.a_blk(3, 2)).ok_or(Error::Singular("A33"))?;
        a22 - s.a_blk(2, 3) * x
    };
    Ok(DynamicPart {
        e22: s.e_blk(2, 2),
        a22_hat,
        present: true,
    })
}

impl StaircaseForm {
    /// Completes `y2` to a consistent staircase-coordinate vector:
    /// `y1 = 0`, `y3 = -A33^{-1} A32 y2`, `y4` from the first block row.
    pub fn slaved(&self, dp: &DynamicPart, y2: &ComplexVector) -> Result<ComplexVector> {
        let d = self.dims;
        if d.n5 > 0 {
            return Err(Error::IndexTooHigh(d.n5));
        }
        if y2.len() != d.n2 {
            return Err(Error::DimensionMismatch(format!("y2 has length {}, expected {}", y2.len(), d.n2)));
        }
        let y2m = ComplexMatrix::from_column_slice(d.n2, 1, y2.as_slice());
        let y3 = if d.n3 == 0 {
            ComplexMatrix::zeros(0, 1)
        } else {
            -linalg::solve(&self.a_blk(3, 3), &(self.a_blk(3, 2) * &y2m)).ok_or(Error::Singular("A33"))?
        };
        let y4 = if d.n1 == 0 {
            ComplexMatrix::zeros(0, 1)
        } else {
            let y2dot = if d.n2 == 0 {
                ComplexMatrix::zeros(0, 1)
            } else {
                dp.generator()? * &y2m
            };
            let rhs = self.e_blk(1, 2) * y2dot - self.a_blk(1, 2) * &y2m - self.a_blk(1, 3) * &y3;
            linalg::solve(&self.a_blk(1, 4), &rhs).ok_or(Error::Singular("A14"))?
        };
        let o = d.offsets();
        let mut y = ComplexVector::zeros(d.total());
        y.rows_mut(o[1], d.n2).copy_from(&y2m.column(0));
        y.rows_mut(o[2], d.n3).copy_from(&y3.column(0));
        y.rows_mut(o[3], d.n4).copy_from(&y4.column(0));
        Ok(y)
    }

    /// Staircase coordinates `y = P x`.
    pub fn to_staircase(&self, x: &ComplexVector) -> ComplexVector {
        &self.p * x
    }

    /// Original coordinates `x = P^H y`.
    pub fn from_staircase(&self, y: &ComplexVector) -> ComplexVector {
        self.p.adjoint() * y
    }

    pub fn y2_of(&self, y: &ComplexVector) -> ComplexVector {
        let o = self.dims.offsets();
        y.rows(o[1], self.dims.n2).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PencilClassification {
    pub regular: bool,
    /// `Some(0..=2)` for index at most two, `None` otherwise.
    pub dae_index: Option<u8>,
    pub finite_eigenvalues: Vec<C64>,
    pub negative_hypocoercive: bool,
    pub dims: Option<StaircaseDims>,
    pub warnings: Vec<StaircaseWarning>,
}

/// Regularity, DAE index, finite spectrum and negative hypocoercivity of
/// the pencil `(E, J - R)`.
pub fn classify_pencil(t: &DaeTriple, tol: &ToleranceConfig) -> Result<PencilClassification> {
    let n = t.dim();
    let a = t.a();
    let ne = spectral_norm(t.e());
    let radius = 1.0 + spectral_norm(&a) / ne.max(1.0);
    let regular = n == 0
        || [0.7f64, 2.9, 4.6].iter().any(|&theta| {
            let lam = c64(radius * libm::cos(theta), radius * libm::sin(theta));
            numerical_rank(&(t.e() * lam - &a), tol) == n
        });
    let singular = PencilClassification {
        regular: false,
        dae_index: None,
        finite_eigenvalues: Vec::new(),
        negative_hypocoercive: false,
        dims: None,
        warnings: Vec::new(),
    };
    if !regular {
        return Ok(singular);
    }
    let s = staircase_transform(t, tol)?;
    let d = s.dims;
    if d.n5 > 0 {
        return Ok(PencilClassification {
            regular,
            dims: Some(d),
            warnings: s.warnings,
            ..singular
        });
    }
    let dae_index = if d.n2 + d.n1 == n {
        0
    } else if d.n1 == 0 {
        1
    } else {
        2
    };
    let dp = dynamic_part(&s)?;
    let finite_eigenvalues = if dp.present {
        linalg::eigenvalues(&dp.generator()?)?
    } else {
        Vec::new()
    };
    let threshold = tol.coercivity_threshold(spectral_norm(&a));
    let negative_hypocoercive = finite_eigenvalues.iter().all(|z| z.re < -threshold);
    Ok(PencilClassification {
        regular,
        dae_index: Some(dae_index),
        finite_eigenvalues,
        negative_hypocoercive,
        dims: Some(d),
        warnings: s.warnings,
    })
}

/// HC-index of the dynamic part in the `E22`-weighted coordinates.
pub fn dae_hc_index(s: &StaircaseForm, tol: &ToleranceConfig) -> Result<HcIndexReport> {
    let dp = dynamic_part(s)?;
    if !dp.present {
        return Ok(HcIndexReport {
            m_hc: Some(0),
            kappa: f64::INFINITY,
            method_agreement: MethodAgreement {
                sum: true,
                kalman: true,
                kernel: true,
            },
            m_max: 0,
        });
    }
    let (j, r) = split_generator(&dp.normalized()?)?;
    hc_index(&j, &r, None, tol)
}

/// Splits `A = J - R` into skew `J` and Hermitian `R`.
pub fn split_generator(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Ok((skew_part(a)?, -hermitian_part(a)?))
}

/// Short-time exponent of the `E`-weighted propagator on consistent data.
pub fn dae_short_time_exponent(t: &DaeTriple, t_grid: &[f64], tol: &ToleranceConfig) -> Result<ShortTimeFit> {
    let s = staircase_transform(t, tol)?;
    let dp = dynamic_part(&s)?;
    if !dp.present {
        return Err(Error::TrivialDynamics);
    }
    short_time_exponent(&(-dp.normalized()?), t_grid, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, from_real_rows, I};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rot() -> ComplexMatrix {
        from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
    }

    #[test]
    fn ode_case_has_only_dynamic_block() {
        let t = DaeTriple::ode(rot(), diag_real(&[1.0, 0.0]), &tol()).unwrap();
        let s = staircase_transform(&t, &tol()).unwrap();
        assert_eq!(s.dims.as_array(), [0, 2, 0, 0, 0]);
        let dp = dynamic_part(&s).unwrap();
        let back = s.p.adjoint() * &dp.a22_hat * &s.p;
        assert!(fro_norm(&(back - t.a())) < 1e-14);
        assert_eq!(dae_hc_index(&s, &tol()).unwrap().m_hc, Some(1));
    }

    #[test]
    fn purely_algebraic_pencil() {
        let j = rot();
        let t = DaeTriple::new(ComplexMatrix::zeros(2, 2), j, ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        let c = classify_pencil(&t, &tol()).unwrap();
        assert!(c.regular);
        assert!(c.finite_eigenvalues.is_empty());
        assert_eq!(c.dae_index, Some(1));
    }

    #[test]
    fn singular_pencil_is_reported() {
        let z = ComplexMatrix::zeros(2, 2);
        let t = DaeTriple::new(diag_real(&[1.0, 0.0]), z.clone(), z, &tol()).unwrap();
        let c = classify_pencil(&t, &tol()).unwrap();
        assert!(!c.regular);
        assert!(!c.negative_hypocoercive);
    }

    #[test]
    fn stokes_mode_along_axis() {
        // k = (1, 0), b = 0, nu = 1
        let e = diag_real(&[1.0, 1.0, 0.0]);
        let mut j = ComplexMatrix::zeros(3, 3);
        j[(0, 2)] = -I;
        j[(2, 0)] = -I;
        let r = diag_real(&[1.0, 1.0, 0.0]);
        let t = DaeTriple::new(e, j, r, &tol()).unwrap();
        let s = staircase_transform(&t, &tol()).unwrap();
        assert_eq!(s.dims.as_array(), [1, 1, 0, 1, 0]);
        let dp = dynamic_part(&s).unwrap();
        assert!((dp.a22_hat[(0, 0)] - re(-1.0)).norm() < 1e-14);
        let c = classify_pencil(&t, &tol()).unwrap();
        assert_eq!(c.dae_index, Some(2));
        assert!(c.negative_hypocoercive);
        assert_eq!(dae_hc_index(&s, &tol()).unwrap().m_hc, Some(0));
    }

    #[test]
    fn index_too_high_is_rejected() {
        // E = 0, J = 0, R = 0 with n5 > 0 is singular; build n5 > 0 via a zero block.
        let e = diag_real(&[1.0, 0.0]);
        let z = ComplexMatrix::zeros(2, 2);
        let t = DaeTriple::new(e, z.clone(), z, &tol()).unwrap();
        let s = staircase_transform(&t, &tol()).unwrap();
        assert_eq!(s.dims.n5, 1);
        assert_eq!(dynamic_part(&s), Err(Error::IndexTooHigh(1)));
    }
}
