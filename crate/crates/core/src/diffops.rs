//! Left-invariant differential operators as Fourier multipliers.
//!
//! A left-invariant operator A acts on coefficients by (Af)ˆ(l) = σ_A(l)·f̂(l),
//! and products of operators map to products of multipliers in the same order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fourier::BandLimitedFunction;
use crate::group::GroupElement;
use crate::linalg::{dim, identity, zeros, CMatrix, Complex, I};
use crate::repr::wigner;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvariantField {
    D1,
    D2,
    D3,
    PartialPlus,
    PartialMinus,
    PartialZero,
    Laplacian,
}

impl InvariantField {
    pub const ALL: [InvariantField; 7] = [
        InvariantField::D1,
        InvariantField::D2,
        InvariantField::D3,
        InvariantField::PartialPlus,
        InvariantField::PartialMinus,
        InvariantField::PartialZero,
        InvariantField::Laplacian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InvariantField::D1 => "D1",
            InvariantField::D2 => "D2",
            InvariantField::D3 => "D3",
            InvariantField::PartialPlus => "partial_plus",
            InvariantField::PartialMinus => "partial_minus",
            InvariantField::PartialZero => "partial_zero",
            InvariantField::Laplacian => "laplacian",
        }
    }

    /// Differential order.
    pub fn order(self) -> u32 {
        if self == InvariantField::Laplacian {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for InvariantField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InvariantField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InvariantField::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown field {s:?}")))
    }
}

fn partial_plus(two_l: u32) -> CMatrix {
    let l = f64::from(two_l) / 2.0;
    let mut m = zeros(dim(two_l));
    // row n+1, column n
    for j in 0..two_l as usize {
        let n = j as f64 - l;
        m[(j + 1, j)] = Complex::new(-((l - n) * (l + n + 1.0)).sqrt(), 0.0);
    }
    m
}

fn partial_minus(two_l: u32) -> CMatrix {
    let l = f64::from(two_l) / 2.0;
    let mut m = zeros(dim(two_l));
    // row n−1, column n
    for j in 1..=two_l as usize {
        let n = j as f64 - l;
        m[(j - 1, j)] = Complex::new(-((l + n) * (l - n + 1.0)).sqrt(), 0.0);
    }
    m
}

fn partial_zero(two_l: u32) -> CMatrix {
    let l = f64::from(two_l) / 2.0;
    CMatrix::from_fn(dim(two_l), dim(two_l), |i, j| {
        if i == j {
            Complex::new(i as f64 - l, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    })
}

/// σ_Y(l) in the t^l basis (row m, column n).
pub fn multiplier(field: InvariantField, two_l: u32) -> CMatrix {
    let half = Complex::new(0.5, 0.0);
    match field {
        InvariantField::PartialPlus => partial_plus(two_l),
        InvariantField::PartialMinus => partial_minus(two_l),
        InvariantField::PartialZero => partial_zero(two_l),
        // D₁ = −i(∂₋+∂₊)/2, D₂ = (∂₋−∂₊)/2, D₃ = −i∂₀
        InvariantField::D1 => (partial_minus(two_l) + partial_plus(two_l)) * (-I * half),
        InvariantField::D2 => (partial_minus(two_l) - partial_plus(two_l)) * half,
        InvariantField::D3 => partial_zero(two_l) * (-I),
        InvariantField::Laplacian => {
            let l = f64::from(two_l) / 2.0;
            identity(dim(two_l)) * Complex::new(-l * (l + 1.0), 0.0)
        }
    }
}

/// Multiplier of ∂₀^{β1}∂₊^{β2}∂₋^{β3} (in that order).
pub fn ordered_multiplier(beta: [u32; 3], two_l: u32) -> CMatrix {
    let factors = [
        (InvariantField::PartialZero, beta[0]),
        (InvariantField::PartialPlus, beta[1]),
        (InvariantField::PartialMinus, beta[2]),
    ];
    let mut out = identity(dim(two_l));
    for (field, power) in factors {
        let m = multiplier(field, two_l);
        for _ in 0..power {
            out *= &m;
        }
    }
    out
}

/// (Yf)ˆ(l) = σ_Y(l)·f̂(l).
pub fn apply_field(field: InvariantField, f: &BandLimitedFunction) -> BandLimitedFunction {
    f.map_blocks(|t, c| multiplier(field, t) * c)
}

/// t^l(u)*·σ_{∂₀}(l)·t^l(u): Hermitian with spectrum {−l, …, l}.
pub fn rotated_multiplier(u: &GroupElement, two_l: u32) -> CMatrix {
    let t = wigner(u, two_l).entries;
    t.adjoint() * partial_zero(two_l) * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Axis;
    use crate::linalg::{commutator, max_abs, max_abs_diff};
    use crate::random::Rng;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn closed_forms() {
        let d0 = multiplier(InvariantField::PartialZero, 2);
        assert_eq!(d0, CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(0.0), c(1.0)])));
        assert_eq!(multiplier(InvariantField::Laplacian, 2), identity(3) * c(-2.0));
        let lap_half = multiplier(InvariantField::Laplacian, 1);
        assert!(max_abs_diff(&lap_half, &(identity(2) * c(-0.75))) < 1e-15);
        let dp = multiplier(InvariantField::PartialPlus, 1);
        assert_eq!(dp[(1, 0)], c(-1.0));
        assert_eq!(dp[(0, 0)] + dp[(0, 1)] + dp[(1, 1)], c(0.0));
        assert!(max_abs_diff(&multiplier(InvariantField::PartialMinus, 1), &dp.transpose()) < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for f in InvariantField::ALL {
            assert_eq!(f.name().parse::<InvariantField>().unwrap(), f);
        }
        assert!("curl".parse::<InvariantField>().is_err());
    }

    #[test]
    fn commutation_relations() {
        use InvariantField::*;
        for t in 0..=16 {
            let (p, m, z) = (multiplier(PartialPlus, t), multiplier(PartialMinus, t), multiplier(PartialZero, t));
            assert!(max_abs_diff(&commutator(&z, &p), &p) < 1e-12);
            assert!(max_abs_diff(&commutator(&m, &z), &m) < 1e-12);
            assert!(max_abs_diff(&commutator(&p, &m), &(&z * c(2.0))) < 1e-12);
            let lap = -(&z * &z) - (&p * &m + &m * &p) * c(0.5);
            assert!(max_abs_diff(&lap, &multiplier(Laplacian, t)) < 1e-12);
            let d1 = multiplier(D1, t);
            let d2 = multiplier(D2, t);
            let d3 = multiplier(D3, t);
            let sum = &d1 * &d1 + &d2 * &d2 + &d3 * &d3;
            assert!(max_abs_diff(&sum, &multiplier(Laplacian, t)) < 1e-12);
            // iD₃ is real diagonal
            let id3 = d3 * I;
            assert!(id3.iter().all(|z| z.im.abs() < 1e-15));
            assert!(max_abs(&(id3.clone() - CMatrix::from_diagonal(&id3.diagonal()))) < 1e-15);
        }
    }

    #[test]
    fn ordered_product() {
        let t = 4;
        let expected = multiplier(InvariantField::PartialZero, t)
            * multiplier(InvariantField::PartialPlus, t)
            * multiplier(InvariantField::PartialPlus, t)
            * multiplier(InvariantField::PartialMinus, t);
        assert!(max_abs_diff(&ordered_multiplier([1, 2, 1], t), &expected) < 1e-12);
        assert_eq!(ordered_multiplier([0, 0, 0], t), identity(5));
    }

    #[test]
    fn apply_on_matrix_elements() {
        let f = BandLimitedFunction::matrix_element(2, 1, 1, 2);
        let lf = apply_field(InvariantField::Laplacian, &f);
        assert!(lf.max_abs_diff(&f.scale(c(-2.0))) < 1e-14);
        // ∂₊ t_{−−} = −t_{−+}
        let tmm = BandLimitedFunction::matrix_element(1, 0, 0, 1);
        let tmp = BandLimitedFunction::matrix_element(1, 0, 1, 1);
        let r = apply_field(InvariantField::PartialPlus, &tmm);
        assert!(r.max_abs_diff(&tmp.scale(c(-1.0))) < 1e-14);
        let one = BandLimitedFunction::constant(c(3.0), 2);
        assert!(apply_field(InvariantField::PartialZero, &one).max_abs_diff(&BandLimitedFunction::zero(2)) == 0.0);
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = Rng::seeded(40);
        let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(4)).unwrap();
        let h = 1e-4;
        for (field, axis) in [
            (InvariantField::D1, Axis::One),
            (InvariantField::D2, Axis::Two),
            (InvariantField::D3, Axis::Three),
        ] {
            let df = apply_field(field, &f);
            for _ in 0..20 {
                let x = rng.group_element();
                let fd = (f.evaluate(&(x * GroupElement::omega(axis, h)))
                    - f.evaluate(&(x * GroupElement::omega(axis, -h))))
                    / (2.0 * h);
                let exact = df.evaluate(&x);
                assert!((fd - exact).norm() < 1e-5 * exact.norm().max(1.0), "{field}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn rotated_spectrum() {
        assert_eq!(rotated_multiplier(&GroupElement::IDENTITY, 3), partial_zero(3));
        let mut rng = Rng::seeded(41);
        let u = rng.group_element();
        let r = rotated_multiplier(&u, 4);
        assert!(max_abs_diff(&r, &r.adjoint()) < 1e-12);
        let mut eig: Vec<f64> = r.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for (e, n) in eig.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert!((e - n).abs() < 1e-10);
        }
    }

    #[test]
    fn weyl_links() {
        let w1 = GroupElement::weyl(Axis::One);
        let w2 = GroupElement::weyl(Axis::Two);
        for t in 1..=6 {
            let d3 = multiplier(InvariantField::D3, t);
            let (t1, t2) = (wigner(&w1, t).entries, wigner(&w2, t).entries);
            assert!(max_abs_diff(&(&t2 * &d3 * t2.adjoint()), &multiplier(InvariantField::D1, t)) < 1e-12);
            assert!(max_abs_diff(&(t1.adjoint() * &d3 * &t1), &multiplier(InvariantField::D2, t)) < 1e-12);
            // σ_{iD₁} through the rotated ∂₀ multiplier
            let rotated = rotated_multiplier(&w2.inverse(), t);
            assert!(max_abs_diff(&rotated, &(multiplier(InvariantField::D1, t) * I)) < 1e-12);
        }
    }
}
