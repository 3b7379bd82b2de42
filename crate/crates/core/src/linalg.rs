//! Small complex-matrix helpers shared by all modules.

use nalgebra::DMatrix;

pub type Complex = num_complex::Complex64;
pub type CMatrix = DMatrix<Complex>;

pub const I: Complex = Complex::new(0.0, 1.0);

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Block size 2l+1 for a doubled index.
pub const fn dim(two_l: u32) -> usize {
    two_l as usize + 1
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Entrywise sup norm ‖M‖_ℓ∞.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// ⟨k⟩ = (1 + k²)^{1/2}.
pub fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_diagonal() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(-3.0, 0.0),
            Complex::new(0.0, 2.0),
        ]));
        assert!((op_norm(&m) - 3.0).abs() < 1e-14);
        assert!((max_abs(&m) - 3.0).abs() < 1e-14);
        assert!((hs_norm(&m) - 13f64.sqrt()).abs() < 1e-14);
    }
}
