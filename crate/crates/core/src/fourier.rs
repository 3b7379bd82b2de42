//! Noncommutative Fourier transform on SU(2).
//!
//! f̂(l) = ∫ f(x) t^l(x)* dx and f(x) = Σ_l (2l+1) Tr(t^l(x) f̂(l)).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, QuadratureGrid};
use crate::linalg::{dim, hs_norm, max_abs_diff, zeros, CMatrix, Complex};
use crate::repr::wigner_all;
use crate::serial::{matrix_from_json, matrix_to_json, JsonMatrix};

/// A function on SU(2) given by its coefficient blocks f̂(l), two_l ≤ `two_l_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandLimitedFunction {
    two_l_max: u32,
    coeffs: Vec<CMatrix>,
    /// Set when the coefficients came from a grid that is not exact for the
    /// requested band, so they are a quadrature approximation.
    pub approximate: bool,
}

impl BandLimitedFunction {
    pub fn zero(two_l_max: u32) -> Self {
        BandLimitedFunction {
            two_l_max,
            coeffs: (0..=two_l_max).map(|t| zeros(dim(t))).collect(),
            approximate: false,
        }
    }

    pub fn constant(c: Complex, two_l_max: u32) -> Self {
        let mut f = Self::zero(two_l_max);
        f.coeffs[0][(0, 0)] = c;
        f
    }

    /// Blocks must have sizes 1, 2, …, two_l_max + 1.
    pub fn from_coeffs(coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("coefficient stack is empty".into()));
        }
        for (t, c) in coeffs.iter().enumerate() {
            if c.shape() != (t + 1, t + 1) {
                return Err(Error::Invalid(format!("block two_l={t} has shape {:?}", c.shape())));
            }
        }
        Ok(BandLimitedFunction { two_l_max: coeffs.len() as u32 - 1, coeffs, approximate: false })
    }

    /// The matrix element x ↦ t^l_{mn}(x) (indices are block positions).
    pub fn matrix_element(two_l: u32, row: usize, col: usize, two_l_max: u32) -> Self {
        // ∫ t^l_{mn} conj(t^l_{ba}) = δ_{bm} δ_{an} / (2l+1)
        let mut f = Self::zero(two_l_max.max(two_l));
        f.coeffs[two_l as usize][(col, row)] = Complex::new(1.0 / (f64::from(two_l) + 1.0), 0.0);
        f
    }

    pub fn two_l_max(&self) -> u32 {
        self.two_l_max
    }

    pub fn coeff(&self, two_l: u32) -> &CMatrix {
        &self.coeffs[two_l as usize]
    }

    pub fn coeff_mut(&mut self, two_l: u32) -> &mut CMatrix {
        &mut self.coeffs[two_l as usize]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Pads with zero blocks or drops blocks above `two_l_max`.
    pub fn with_band(&self, two_l_max: u32) -> Self {
        let mut coeffs: Vec<CMatrix> = self.coeffs.iter().take(two_l_max as usize + 1).cloned().collect();
        while coeffs.len() < two_l_max as usize + 1 {
            let t = coeffs.len();
            coeffs.push(zeros(t + 1));
        }
        BandLimitedFunction { two_l_max, coeffs, approximate: self.approximate }
    }

    /// Applies `f` to every block.
    pub fn map_blocks(&self, f: impl Fn(u32, &CMatrix) -> CMatrix) -> Self {
        BandLimitedFunction {
            two_l_max: self.two_l_max,
            coeffs: self.coeffs.iter().enumerate().map(|(t, c)| f(t as u32, c)).collect(),
            approximate: self.approximate,
        }
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map_blocks(|_, c| c * s)
    }

    /// Sum with the larger band of the two.
    pub fn add(&self, other: &Self) -> Self {
        let band = self.two_l_max.max(other.two_l_max);
        let (a, b) = (self.with_band(band), other.with_band(band));
        let mut out = a.map_blocks(|t, c| c + b.coeff(t));
        out.approximate = self.approximate || other.approximate;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    /// Largest entrywise coefficient difference after padding to a common band.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let band = self.two_l_max.max(other.two_l_max);
        let (a, b) = (self.with_band(band), other.with_band(band));
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &GroupElement) -> Complex {
        inverse(self, x)
    }

    pub fn to_file(&self) -> FunctionFile {
        FunctionFile {
            two_l: self.two_l_max,
            coeffs: self.coeffs.iter().enumerate().map(|(t, c)| (t.to_string(), matrix_to_json(c))).collect(),
        }
    }

    pub fn from_file(file: &FunctionFile) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(file.two_l as usize + 1);
        for t in 0..=file.two_l {
            let block = file
                .coeffs
                .get(&t.to_string())
                .ok_or_else(|| Error::Invalid(format!("missing coefficient block for two_l={t}")))?;
            coeffs.push(matrix_from_json(block, dim(t))?);
        }
        if let Some(extra) = file.coeffs.keys().find(|k| k.parse::<u32>().map_or(true, |t| t > file.two_l)) {
            return Err(Error::Invalid(format!("unexpected coefficient key {extra:?}")));
        }
        Self::from_coeffs(coeffs)
    }
}

/// JSON form `{two_L, coeffs: {"0": [[[re,im]]], "1": ...}}` keyed by two_l.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    #[serde(rename = "two_L")]
    pub two_l: u32,
    pub coeffs: BTreeMap<String, JsonMatrix>,
}

/// Coefficients of node samples up to `two_l_max`.
///
/// Exact when `grid.exactness_two_l() ≥ 2·two_l_max` and the samples come from
/// a function band-limited at `two_l_max`; otherwise the result is a
/// quadrature projection and is flagged `approximate`.
pub fn forward(samples: &[Complex], grid: &QuadratureGrid, two_l_max: u32) -> Result<BandLimitedFunction> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), actual: samples.len() });
    }
    let table = grid.wigner_table(two_l_max);
    let weights = grid.weights();
    let coeffs: Vec<CMatrix> = (0..=two_l_max)
        .into_par_iter()
        .map(|t| {
            let mut acc = zeros(dim(t));
            for (k, (f, w)) in samples.iter().zip(weights).enumerate() {
                let fw = f * *w;
                let tl = table.at(k, t);
                // accumulate f·w·t^l(x)^*
                for i in 0..acc.nrows() {
                    for j in 0..acc.ncols() {
                        acc[(i, j)] += fw * tl[(j, i)].conj();
                    }
                }
            }
            acc
        })
        .collect();
    Ok(BandLimitedFunction {
        two_l_max,
        coeffs,
        approximate: grid.exactness_two_l() < 2 * two_l_max,
    })
}

/// Samples `f` at the grid nodes and transforms.
pub fn analyze_fn(
    f: impl Fn(&GroupElement) -> Complex + Sync,
    grid: &QuadratureGrid,
    two_l_max: u32,
) -> Result<BandLimitedFunction> {
    let samples: Vec<Complex> = grid.nodes().par_iter().map(&f).collect();
    forward(&samples, grid, two_l_max)
}

/// Σ_l (2l+1) Tr(t^l(x) f̂(l)).
pub fn inverse(f: &BandLimitedFunction, x: &GroupElement) -> Complex {
    let blocks = wigner_all(x, f.two_l_max);
    blocks.iter().zip(&f.coeffs).enumerate().map(|(t, (w, c))| trace_product(w, c) * (t as f64 + 1.0)).sum()
}

/// Values at every grid node, in node order.
pub fn synthesize(f: &BandLimitedFunction, grid: &QuadratureGrid) -> Vec<Complex> {
    let table = grid.wigner_table(f.two_l_max);
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            f.coeffs
                .iter()
                .enumerate()
                .map(|(t, c)| trace_product(table.at(k, t as u32), c) * (t as f64 + 1.0))
                .sum()
        })
        .collect()
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex {
    let mut s = Complex::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// (f ∗ g)ˆ(l) = ĝ(l)·f̂(l), with (f ∗ g)(x) = ∫ f(xy⁻¹) g(y) dy.
pub fn convolve(f: &BandLimitedFunction, g: &BandLimitedFunction) -> Result<BandLimitedFunction> {
    if f.two_l_max != g.two_l_max {
        return Err(Error::BandMismatch(f.two_l_max, g.two_l_max));
    }
    Ok(f.map_blocks(|t, c| g.coeff(t) * c))
}

/// (Σ_l (2l+1)‖f̂(l)‖²_HS)^{1/2}.
pub fn plancherel_norm(f: &BandLimitedFunction) -> f64 {
    f.coeffs.iter().enumerate().map(|(t, c)| (t as f64 + 1.0) * hs_norm(c).powi(2)).sum::<f64>().sqrt()
}

/// Pointwise product f·g, computed on a grid exact for the product band.
pub fn multiply(f: &BandLimitedFunction, g: &BandLimitedFunction, grid: &QuadratureGrid) -> Result<BandLimitedFunction> {
    let band = f.two_l_max + g.two_l_max;
    grid.require_exactness(2 * band)?;
    let (fs, gs) = (synthesize(f, grid), synthesize(g, grid));
    let prod: Vec<Complex> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    forward(&prod, grid, band)
}
