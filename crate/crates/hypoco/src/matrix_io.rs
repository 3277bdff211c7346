//! JSON matrix format `{rows, cols, re, im}` (row-major) and triple files.

use std::fs;
use std::path::Path;

use hypoco_core::linalg::{c64, ComplexMatrix};
use hypoco_core::{DaeTriple, ToleranceConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonMatrix {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl JsonMatrix {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (r, c) = m.shape();
        let re = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect();
        Self { rows: r, cols: c, re, im: Some(im) }
    }

    pub fn to_matrix(&self) -> CliResult<ComplexMatrix> {
        let check = |part: &[Vec<f64>], name: &str| -> CliResult<()> {
            if part.len() != self.rows || part.iter().any(|row| row.len() != self.cols) {
                return Err(CliError::Input(format!(
                    "matrix part '{name}' does not have shape {}x{}",
                    self.rows, self.cols
                )));
            }
            if part.iter().flatten().any(|v| !v.is_finite()) {
                return Err(CliError::Input(format!("matrix part '{name}' has non-finite entries")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            c64(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct JsonTriple {
    pub E: JsonMatrix,
    pub J: JsonMatrix,
    pub R: JsonMatrix,
}

impl JsonTriple {
    pub fn from_triple(t: &DaeTriple) -> Self {
        Self {
            E: JsonMatrix::from_matrix(t.e()),
            J: JsonMatrix::from_matrix(t.j()),
            R: JsonMatrix::from_matrix(t.r()),
        }
    }

    pub fn to_triple(&self, tol: &ToleranceConfig) -> CliResult<DaeTriple> {
        Ok(DaeTriple::new(self.E.to_matrix()?, self.J.to_matrix()?, self.R.to_matrix()?, tol)?)
    }
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_matrix(bytes: &[u8], what: &Path) -> CliResult<ComplexMatrix> {
    let m: JsonMatrix =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{}: {e}", what.display())))?;
    m.to_matrix()
}

pub fn parse_triple(bytes: &[u8], what: &Path, tol: &ToleranceConfig) -> CliResult<DaeTriple> {
    let t: JsonTriple =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{}: {e}", what.display())))?;
    t.to_triple(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = ComplexMatrix::from_fn(3, 2, |i, j| c64(0.1 * i as f64 + 1e-17 * j as f64, -1.0 / 3.0 + i as f64));
        let s = serde_json::to_string(&JsonMatrix::from_matrix(&m)).unwrap();
        let back: JsonMatrix = serde_json::from_str(&s).unwrap();
        let b = back.to_matrix().unwrap();
        for (x, y) in m.iter().zip(b.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn missing_imaginary_part_is_zero() {
        let m: JsonMatrix = serde_json::from_str(r#"{"rows":1,"cols":2,"re":[[1,2]]}"#).unwrap();
        assert_eq!(m.to_matrix().unwrap()[(0, 1)], c64(2.0, 0.0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let m: JsonMatrix = serde_json::from_str(r#"{"rows":2,"cols":2,"re":[[1,2]]}"#).unwrap();
        assert!(m.to_matrix().is_err());
    }
}
