//! Taylor monomials q_α = q₊^{α1}·q₋^{α2}·q₀^{α3} at the identity and the dual
//! operators ∂^{(α)} with ∂^{(β)}(q_α∘inv)(e) = α!·δ_{αβ}.
//!
//! Each ∂^{(α)} is stored as coefficients over the ordered products
//! D_β = ∂₀^{β1}∂₊^{β2}∂₋^{β3}, |β| ≤ N.

use nalgebra::DMatrix;

use crate::diffops::ordered_multiplier;
use crate::error::{Error, Result};
use crate::fourier::{analyze_fn, trace_product, BandLimitedFunction};
use crate::group::{GroupElement, QuadratureGrid};
use crate::linalg::{dim, zeros, CMatrix, Complex};

pub type MultiIndex = [u32; 3];

/// All α with |α| ≤ n, by degree and then lexicographically.
pub fn multi_indices(n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=n {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                out.push([a, b, deg - a - b]);
            }
        }
    }
    out
}

pub fn degree(alpha: MultiIndex) -> u32 {
    alpha.iter().sum()
}

pub fn factorial(alpha: MultiIndex) -> f64 {
    alpha.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product()
}

/// q₊ = t^{1/2}_{+−}, i.e. −x1 + i·x2; multiplying kernels by it gives Δ₊.
pub fn q_plus(x: &GroupElement) -> Complex {
    let [_, x1, x2, _] = x.quaternion();
    Complex::new(-x1, x2)
}

/// q₋ = t^{1/2}_{−+}, i.e. x1 + i·x2.
pub fn q_minus(x: &GroupElement) -> Complex {
    let [_, x1, x2, _] = x.quaternion();
    Complex::new(x1, x2)
}

/// q₀ = t^{1/2}_{−−} − t^{1/2}_{++}, i.e. 2i·x3.
pub fn q_zero(x: &GroupElement) -> Complex {
    Complex::new(0.0, 2.0 * x.quaternion()[3])
}

pub fn q_monomial(alpha: MultiIndex, x: &GroupElement) -> Complex {
    q_plus(x).powu(alpha[0]) * q_minus(x).powu(alpha[1]) * q_zero(x).powu(alpha[2])
}

#[derive(Clone, Debug)]
pub struct TaylorBasis {
    order: u32,
    indices: Vec<MultiIndex>,
    monomials: Vec<BandLimitedFunction>,
    /// Row α: coefficients of ∂^{(α)} over D_β, columns in `indices` order.
    dual: DMatrix<Complex>,
}

impl TaylorBasis {
    /// Needs a grid exact at two_l = 2N so the degree-N monomials transform exactly.
    pub fn new(order: u32, grid: &QuadratureGrid) -> Result<Self> {
        grid.require_exactness(2 * order)?;
        let indices = multi_indices(order);
        let monomials = indices
            .iter()
            .map(|&a| analyze_fn(|x| q_monomial(a, x), grid, degree(a)).map(|f| f.with_band(order)))
            .collect::<Result<Vec<_>>>()?;
        let size = indices.len();
        // M[β][γ] = D_β(q_γ∘inv)(e); each of q₊, q₋, q₀ is odd under inversion
        let inverted: Vec<BandLimitedFunction> = indices
            .iter()
            .zip(&monomials)
            .map(|(&g, q)| q.scale(Complex::new(if degree(g) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)))
            .collect();
        let mults: Vec<Vec<CMatrix>> =
            indices.iter().map(|&b| (0..=order).map(|t| ordered_multiplier(b, t)).collect()).collect();
        let system = DMatrix::from_fn(size, size, |b, g| at_identity(&mults[b], &inverted[g]));
        let inv = system.clone().try_inverse().ok_or(Error::SingularTaylorSystem { order })?;
        let check = &system * &inv - DMatrix::<Complex>::identity(size, size);
        if check.iter().any(|z| !z.norm().is_finite() || z.norm() > 1e-8) {
            return Err(Error::SingularTaylorSystem { order });
        }
        let dual = DMatrix::from_fn(size, size, |a, b| inv[(a, b)] * factorial(indices[a]));
        Ok(TaylorBasis { order, indices, monomials, dual })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    fn position(&self, alpha: MultiIndex) -> Result<usize> {
        self.indices
            .iter()
            .position(|&a| a == alpha)
            .ok_or_else(|| Error::Invalid(format!("multi-index {alpha:?} exceeds Taylor order {}", self.order)))
    }

    /// q_α as a band-limited function (band N).
    pub fn monomial(&self, alpha: MultiIndex) -> Result<&BandLimitedFunction> {
        Ok(&self.monomials[self.position(alpha)?])
    }

    /// Nonzero coefficients (β, c) with ∂^{(α)} = Σ c·∂₀^{β1}∂₊^{β2}∂₋^{β3}.
    pub fn dual_coeffs(&self, alpha: MultiIndex) -> Result<Vec<(MultiIndex, Complex)>> {
        let row = self.position(alpha)?;
        Ok(self
            .indices
            .iter()
            .enumerate()
            .map(|(col, &b)| (b, self.dual[(row, col)]))
            .filter(|(_, c)| c.norm() > 1e-13)
            .collect())
    }

    /// Fourier multiplier of ∂^{(α)} at two_l.
    pub fn dual_multiplier(&self, alpha: MultiIndex, two_l: u32) -> Result<CMatrix> {
        let mut out = zeros(dim(two_l));
        for (b, c) in self.dual_coeffs(alpha)? {
            out += ordered_multiplier(b, two_l) * c;
        }
        Ok(out)
    }

    /// ∂^{(α)} applied to a function.
    pub fn apply_dual(&self, alpha: MultiIndex, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        let mults = (0..=f.two_l_max()).map(|t| self.dual_multiplier(alpha, t)).collect::<Result<Vec<_>>>()?;
        Ok(f.map_blocks(|t, c| &mults[t as usize] * c))
    }

    /// P_N f(x) = Σ_{|α|≤N} (1/α!)·q_α(x⁻¹)·∂^{(α)}f(e).
    pub fn taylor_polynomial(&self, f: &BandLimitedFunction, x: &GroupElement) -> Result<Complex> {
        let xinv = x.inverse();
        let mut sum = Complex::new(0.0, 0.0);
        for &a in &self.indices {
            let d = self.apply_dual(a, f)?.evaluate(&GroupElement::IDENTITY);
            sum += q_monomial(a, &xinv) * d / factorial(a);
        }
        Ok(sum)
    }
}

/// (D f)(e) for a left-invariant D given by its multipliers.
fn at_identity(mults: &[CMatrix], f: &BandLimitedFunction) -> Complex {
    f.coeffs()
        .iter()
        .zip(mults)
        .enumerate()
        .map(|(t, (c, m))| trace_product(m, c) * (t as f64 + 1.0))
        .sum()
}
