//! JSON encodings shared by the file formats: complex numbers are `[re, im]`
//! and matrices are row-major nested arrays of them.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: Complex) -> JsonComplex {
    [z.re, z.im]
}

pub fn complex_from_json(z: JsonComplex) -> Complex {
    Complex::new(z[0], z[1])
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()).collect()
}

/// Parses a square block of the given size.
pub fn matrix_from_json(rows: &JsonMatrix, size: usize) -> Result<CMatrix> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(Error::Invalid(format!("expected a {size}x{size} matrix")));
    }
    Ok(CMatrix::from_fn(size, size, |i, j| complex_from_json(rows[i][j])))
}
