//! Quantization Op(σ), symbol extraction, composition/adjoint expansions and
//! L² boundedness estimates.
//!
//! Op(σ)f(x) = Σ_l (2l+1)·Tr(t^l(x)·σ(x, l)·f̂(l)). Blocks of f above the
//! symbol's band are treated as if σ vanished there.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffops::{apply_field, InvariantField};
use crate::error::{Error, Result};
use crate::fourier::{forward, multiply, synthesize, BandLimitedFunction};
use crate::group::taylor::{degree, factorial, q_minus, q_plus, q_zero};
use crate::group::{multi_indices, shared_grid, QuadratureGrid, TaylorBasis};
use crate::linalg::{dim, op_norm, CMatrix, Complex};
use crate::random::Rng;
use crate::symbols::{difference_multi, x_apply, x_derivative, Symbol};

/// A linear operator given only through its action on band-limited functions.
pub trait OperatorOracle: Sync {
    fn label(&self) -> String;

    /// Band of Af when f has band `input_two_l`.
    fn output_band(&self, input_two_l: u32) -> u32;

    /// Band of the x-dependence of the operator's symbol.
    fn x_band(&self) -> u32;

    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction>;

    /// Oracles that are not safe to call from several threads return false.
    fn is_concurrent(&self) -> bool {
        true
    }
}

pub struct IdentityOperator;

impl OperatorOracle for IdentityOperator {
    fn label(&self) -> String {
        "identity".into()
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l
    }
    fn x_band(&self) -> u32 {
        0
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        Ok(f.clone())
    }
}

pub struct FieldOperator(pub InvariantField);

impl OperatorOracle for FieldOperator {
    fn label(&self) -> String {
        self.0.name().into()
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l
    }
    fn x_band(&self) -> u32 {
        0
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        Ok(apply_field(self.0, f))
    }
}

/// f ↦ φ·f.
pub struct MultiplicationOperator {
    pub label: String,
    pub phi: BandLimitedFunction,
}

impl MultiplicationOperator {
    pub fn new(label: impl Into<String>, phi: BandLimitedFunction) -> Self {
        MultiplicationOperator { label: label.into(), phi }
    }
}

impl OperatorOracle for MultiplicationOperator {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l + self.phi.two_l_max()
    }
    fn x_band(&self) -> u32 {
        self.phi.two_l_max()
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        let grid = shared_grid(2 * self.output_band(f.two_l_max()));
        multiply(f, &self.phi, &grid)
    }
}

/// Op(σ) for a stored symbol.
pub struct SymbolOperator(pub Symbol);

impl OperatorOracle for SymbolOperator {
    fn label(&self) -> String {
        "Op(symbol)".into()
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l.min(self.0.two_l_max()) + self.0.x_two_l()
    }
    fn x_band(&self) -> u32 {
        self.0.x_two_l()
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        if let Some(blocks) = self.0.invariant_blocks() {
            // left-invariant: (Af)ˆ(l) = σ(l)·f̂(l)
            let band = f.two_l_max().min(self.0.two_l_max());
            return Ok(f.with_band(band).map_blocks(|t, c| &blocks[t as usize] * c));
        }
        let out = self.output_band(f.two_l_max());
        let exact = self.0.grid().map_or(0, |g| g.exactness_two_l()).max(2 * out);
        let grid = shared_grid(exact);
        let samples = op_apply(&self.0, f, &grid)?;
        forward(&samples, &grid, out)
    }
}

/// outer ∘ inner.
pub struct ComposedOperator {
    pub outer: Box<dyn OperatorOracle>,
    pub inner: Box<dyn OperatorOracle>,
}

impl OperatorOracle for ComposedOperator {
    fn label(&self) -> String {
        format!("{}*{}", self.outer.label(), self.inner.label())
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        self.outer.output_band(self.inner.output_band(input_two_l))
    }
    fn x_band(&self) -> u32 {
        self.outer.x_band() + self.inner.x_band()
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        self.outer.apply(&self.inner.apply(f)?)
    }
    fn is_concurrent(&self) -> bool {
        self.outer.is_concurrent() && self.inner.is_concurrent()
    }
}

/// The Hilbert adjoint of another oracle, assembled from its matrix entries
/// ⟨A e_j, e_i⟩ in the orthonormal basis √(2l+1)·t^l_{kn}.
pub struct AdjointOperator(pub Box<dyn OperatorOracle>);

impl OperatorOracle for AdjointOperator {
    fn label(&self) -> String {
        format!("adjoint({})", self.0.label())
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l + self.0.x_band()
    }
    fn x_band(&self) -> u32 {
        self.0.x_band()
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        let (fb, out) = (f.two_l_max(), self.output_band(f.two_l_max()));
        // columns: A applied to the basis up to `out`, read off up to `fb`
        let m = operator_matrix(self.0.as_ref(), out)?;
        let input = coordinates(f, fb);
        let rows = basis_len(fb);
        let mut result = vec![Complex::new(0.0, 0.0); m.ncols()];
        for (j, r) in result.iter_mut().enumerate() {
            for i in 0..rows {
                *r += m[(i, j)].conj() * input[i];
            }
        }
        from_coordinates(&result, out)
    }
    fn is_concurrent(&self) -> bool {
        self.0.is_concurrent()
    }
}

type ApplyFn = dyn Fn(&BandLimitedFunction) -> Result<BandLimitedFunction> + Sync + Send;

/// An oracle backed by a closure with declared bands.
pub struct FnOperator {
    pub label: String,
    pub band_growth: u32,
    pub concurrent: bool,
    pub f: Box<ApplyFn>,
}

impl OperatorOracle for FnOperator {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn output_band(&self, input_two_l: u32) -> u32 {
        input_two_l + self.band_growth
    }
    fn x_band(&self) -> u32 {
        self.band_growth
    }
    fn apply(&self, f: &BandLimitedFunction) -> Result<BandLimitedFunction> {
        (self.f)(f)
    }
    fn is_concurrent(&self) -> bool {
        self.concurrent
    }
}

/// Names understood by [`operator_from_spec`]; factors are joined with `*`.
pub const OPERATOR_NAMES: [&str; 11] = [
    "identity",
    "D1",
    "D2",
    "D3",
    "partial_plus",
    "partial_minus",
    "partial_zero",
    "laplacian",
    "q_plus",
    "q_minus",
    "q_zero",
];

/// Builds an oracle such as `partial_zero*q_zero` (rightmost factor acts first).
pub fn operator_from_spec(spec: &str) -> Result<Box<dyn OperatorOracle>> {
    let mut factors = spec.split('*').map(str::trim).rev();
    let first = factors.next().filter(|s| !s.is_empty()).ok_or_else(|| Error::Invalid("empty operator".into()))?;
    let mut op = single_operator(first)?;
    for name in factors {
        op = Box::new(ComposedOperator { outer: single_operator(name)?, inner: op });
    }
    Ok(op)
}

fn single_operator(name: &str) -> Result<Box<dyn OperatorOracle>> {
    let grid = shared_grid(2);
    Ok(match name {
        "identity" => Box::new(IdentityOperator),
        "q_plus" => Box::new(MultiplicationOperator::new(name, crate::fourier::analyze_fn(q_plus, &grid, 1)?)),
        "q_minus" => Box::new(MultiplicationOperator::new(name, crate::fourier::analyze_fn(q_minus, &grid, 1)?)),
        "q_zero" => Box::new(MultiplicationOperator::new(name, crate::fourier::analyze_fn(q_zero, &grid, 1)?)),
        _ => Box::new(FieldOperator(
            name.parse().map_err(|_| Error::Invalid(format!("unknown operator {name:?}")))?,
        )),
    })
}

/// Op(σ)f at the nodes of `grid`.
pub fn op_apply(sigma: &Symbol, f: &BandLimitedFunction, grid: &Arc<QuadratureGrid>) -> Result<Vec<Complex>> {
    let sigma = sigma.resample(Arc::clone(grid))?;
    let band = sigma.two_l_max().min(f.two_l_max());
    let table = grid.wigner_table(band);
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| {
            (0..=band)
                .map(|t| {
                    let m = sigma.block(k, t) * f.coeff(t);
                    crate::fourier::trace_product(table.at(k, t), &m) * (f64::from(t) + 1.0)
                })
                .sum()
        })
        .collect())
}

/// σ_A(x, l) = t^l(x)*·(A t^l)(x) on the nodes of `grid`, for two_l ≤ `two_l_max`.
///
/// The grid must resolve the operator's x-band (exactness ≥ 2·x_band). A
/// linearity spot check runs first.
pub fn extract_symbol(a: &dyn OperatorOracle, two_l_max: u32, grid: Arc<QuadratureGrid>) -> Result<Symbol> {
    grid.require_exactness(2 * a.x_band())?;
    linearity_check(a, two_l_max)?;
    let table = grid.wigner_table(two_l_max);
    let jobs: Vec<(u32, usize, usize)> =
        (0..=two_l_max).flat_map(|t| (0..dim(t)).flat_map(move |k| (0..dim(t)).map(move |n| (t, k, n)))).collect();
    let run = |&(t, k, n): &(u32, usize, usize)| -> Result<Vec<Complex>> {
        let out = a.apply(&BandLimitedFunction::matrix_element(t, k, n, t))?;
        Ok(synthesize(&out, &grid))
    };
    let values: Vec<Vec<Complex>> = if a.is_concurrent() {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let mut offset = 0;
    let mut blocks = Vec::with_capacity(two_l_max as usize + 1);
    for t in 0..=two_l_max {
        let size = dim(t);
        let vals = &values[offset..offset + size * size];
        offset += size * size;
        blocks.push(
            (0..grid.len())
                .map(|node| {
                    let v = CMatrix::from_fn(size, size, |k, n| vals[k * size + n][node]);
                    table.at(node, t).adjoint() * v
                })
                .collect(),
        );
    }
    Symbol::sampled(blocks, a.x_band(), grid)
}

fn linearity_check(a: &dyn OperatorOracle, two_l_max: u32) -> Result<()> {
    let mut rng = Rng::seeded(0x5eed);
    let band = two_l_max.min(2);
    let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(band))?;
    let g = BandLimitedFunction::from_coeffs(rng.coefficient_stack(band))?;
    let s = Complex::new(0.5, -1.5);
    let combined = a.apply(&f.add(&g.scale(s)))?;
    let separate = a.apply(&f)?.add(&a.apply(&g)?.scale(s));
    let scale = crate::fourier::plancherel_norm(&separate).max(1.0);
    let deviation = combined.max_abs_diff(&separate) / scale;
    if deviation > 1e-8 {
        return Err(Error::Nonlinear { deviation });
    }
    Ok(())
}

fn check_expansion(order: u32, band: u32, taylor: &TaylorBasis) -> Result<u32> {
    if order == 0 {
        return Err(Error::Invalid("expansion order N must be at least 1".into()));
    }
    if order - 1 > taylor.order() {
        return Err(Error::Invalid(format!(
            "expansion order {order} needs a Taylor basis of order {}, have {}",
            order - 1,
            taylor.order()
        )));
    }
    band.checked_sub(order - 1).ok_or_else(|| {
        Error::BandExhausted(format!("N = {order} needs two_L ≥ {}, symbol has {band}", order - 1))
    })
}

/// Σ_{|α|<N} (1/α!)·(Δ^α σ_A)·(∂^{(α)} σ_B), valid for two_l ≤ two_L_A − (N−1).
pub fn compose_expansion(sigma_a: &Symbol, sigma_b: &Symbol, n: u32, taylor: &TaylorBasis) -> Result<Symbol> {
    let out = check_expansion(n, sigma_a.two_l_max().min(sigma_b.two_l_max()), taylor)?;
    let mut sum: Option<Symbol> = None;
    for alpha in multi_indices(n - 1) {
        let da = difference_multi(alpha, sigma_a)?.truncate(out)?;
        let db = if degree(alpha) == 0 {
            sigma_b.truncate(out)?
        } else {
            let dual = (0..=sigma_b.x_two_l()).map(|t| taylor.dual_multiplier(alpha, t)).collect::<Result<Vec<_>>>()?;
            x_apply(&sigma_b.truncate(out)?, |t| dual[t as usize].clone())?
        };
        let term = da.mul(&db)?.scale(Complex::new(1.0 / factorial(alpha), 0.0));
        sum = Some(match sum {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    Ok(sum.expect("at least the α = 0 term"))
}

/// Σ_{|α|<N} (1/α!)·Δ^α ∂^{(α)} σ_A(x, l)*.
pub fn adjoint_expansion(sigma_a: &Symbol, n: u32, taylor: &TaylorBasis) -> Result<Symbol> {
    let out = check_expansion(n, sigma_a.two_l_max(), taylor)?;
    let star = sigma_a.adjoint();
    let mut sum: Option<Symbol> = None;
    for alpha in multi_indices(n - 1) {
        let dx = if degree(alpha) == 0 {
            star.clone()
        } else {
            let dual = (0..=star.x_two_l()).map(|t| taylor.dual_multiplier(alpha, t)).collect::<Result<Vec<_>>>()?;
            x_apply(&star, |t| dual[t as usize].clone())?
        };
        let term = difference_multi(alpha, &dx)?.truncate(out)?.scale(Complex::new(1.0 / factorial(alpha), 0.0));
        sum = Some(match sum {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    Ok(sum.expect("at least the α = 0 term"))
}

fn basis_len(two_l_max: u32) -> usize {
    (0..=two_l_max).map(|t| dim(t) * dim(t)).sum()
}

/// Coordinates of f in the orthonormal basis √(2l+1)·t^l_{kn}, ordered by
/// (two_l, k, n), up to `two_l_max`.
fn coordinates(f: &BandLimitedFunction, two_l_max: u32) -> Vec<Complex> {
    let f = f.with_band(two_l_max.max(f.two_l_max()));
    let mut out = Vec::with_capacity(basis_len(two_l_max));
    for t in 0..=two_l_max {
        let s = (f64::from(t) + 1.0).sqrt();
        let c = f.coeff(t);
        for k in 0..dim(t) {
            for n in 0..dim(t) {
                out.push(c[(n, k)] * s);
            }
        }
    }
    out
}

fn from_coordinates(v: &[Complex], two_l_max: u32) -> Result<BandLimitedFunction> {
    let mut f = BandLimitedFunction::zero(two_l_max);
    let mut idx = 0;
    for t in 0..=two_l_max {
        let s = (f64::from(t) + 1.0).sqrt();
        let c = f.coeff_mut(t);
        for k in 0..dim(t) {
            for n in 0..dim(t) {
                c[(n, k)] = v[idx] / s;
                idx += 1;
            }
        }
    }
    Ok(f)
}

/// Matrix of A restricted to inputs with two_l ≤ `two_l_max`, in the
/// orthonormal Peter–Weyl basis (rows cover the full output band).
pub fn operator_matrix(a: &dyn OperatorOracle, two_l_max: u32) -> Result<DMatrix<Complex>> {
    let out = a.output_band(two_l_max);
    let cols = basis_len(two_l_max);
    let jobs: Vec<(u32, usize, usize)> =
        (0..=two_l_max).flat_map(|t| (0..dim(t)).flat_map(move |k| (0..dim(t)).map(move |n| (t, k, n)))).collect();
    let run = |&(t, k, n): &(u32, usize, usize)| -> Result<Vec<Complex>> {
        let e = BandLimitedFunction::matrix_element(t, k, n, t).scale(Complex::new((f64::from(t) + 1.0).sqrt(), 0.0));
        Ok(coordinates(&a.apply(&e)?, out))
    };
    let columns: Vec<Vec<Complex>> = if a.is_concurrent() {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    Ok(DMatrix::from_fn(basis_len(out), cols, |i, j| columns[j][i]))
}

/// ‖A‖ on the span of inputs with two_l ≤ `two_l_max` (largest singular
/// value of the truncated matrix).
pub fn empirical_op_norm(a: &dyn OperatorOracle, two_l_max: u32) -> Result<f64> {
    Ok(op_norm(&operator_matrix(a, two_l_max)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Estimate {
    /// max over |β| ≤ 2, nodes and l of ‖∂_x^β σ(x, l)‖_op.
    pub certificate: f64,
    /// The same maximum at each two_l.
    pub per_l: Vec<f64>,
    /// Log-log slope of `per_l` against ⟨l⟩ over the upper half of the band.
    pub growth_exponent: f64,
    /// True when the growth exponent stays below 0.25, i.e. the finite data
    /// look bounded in l.
    pub certifiable: bool,
    /// Operator norm of the truncated Op(σ).
    pub empirical: f64,
}

const GROWTH_THRESHOLD: f64 = 0.25;

/// L² certificate with k = 2 x-derivatives (the smallest integer above 3/2).
///
/// The supremum over x is taken on an oversampled grid, so it approaches the
/// true supremum from below.
pub fn l2_bound_estimate(sigma: &Symbol) -> Result<L2Estimate> {
    let band = sigma.two_l_max();
    let sampled = match sigma.grid() {
        Some(g) => sigma.resample(shared_grid(g.exactness_two_l().max(4 * sigma.x_two_l() + 8)))?,
        None => sigma.clone(),
    };
    let sigma = &sampled;
    let mut per_l = vec![0.0f64; band as usize + 1];
    for beta in multi_indices(2) {
        let d = if degree(beta) == 0 { sigma.clone() } else { x_derivative(beta, sigma)? };
        for (t, slot) in per_l.iter_mut().enumerate() {
            let worst = (0..d.node_count())
                .into_par_iter()
                .map(|k| op_norm(d.block(k, t as u32)))
                .reduce(|| 0.0, f64::max);
            *slot = slot.max(worst);
        }
    }
    let certificate = per_l.iter().copied().fold(0.0, f64::max);
    let growth_exponent = growth_exponent(&per_l);
    let empirical = empirical_op_norm(&SymbolOperator(sigma.clone()), band)?;
    Ok(L2Estimate {
        certificate,
        per_l,
        growth_exponent,
        certifiable: growth_exponent <= GROWTH_THRESHOLD,
        empirical,
    })
}

/// Slope of log(values) against log⟨l⟩ between the middle and the top of the band.
pub fn growth_exponent(per_l: &[f64]) -> f64 {
    let top = per_l.len() - 1;
    let mid = top / 2;
    if top == mid || per_l[top] == 0.0 {
        return 0.0;
    }
    if per_l[mid] == 0.0 {
        return f64::INFINITY;
    }
    let bracket_l = |t: usize| {
        let l = t as f64 / 2.0;
        (1.0 + l * (l + 1.0)).sqrt()
    };
    (per_l[top] / per_l[mid]).ln() / (bracket_l(top) / bracket_l(mid)).ln()
}

/// σ(x, l)·⟨l⟩^{−μ} with ⟨l⟩ = (1 + l(l+1))^{1/2}.
pub fn sobolev_reweight(sigma: &Symbol, mu: f64) -> Symbol {
    sigma.map_blocks(|t, m| {
        let l = f64::from(t) / 2.0;
        m * Complex::new((1.0 + l * (l + 1.0)).powf(-mu / 2.0), 0.0)
    })
}
