//! Full symbols σ(x, l) and the difference calculus acting on l.
//!
//! A symbol is either x-invariant (one matrix per l) or sampled at the nodes
//! of a quadrature grid with band-limited x-dependence. Blocks are indexed as
//! everywhere else: row i ↔ m = i − l, column j ↔ n = j − l.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffops::{multiplier, ordered_multiplier, InvariantField};
use crate::error::{Error, Result};
use crate::fourier::{forward, synthesize, BandLimitedFunction};
use crate::group::{shared_grid, GroupElement, QuadratureGrid};
use crate::linalg::{dim, identity, max_abs_diff, zeros, CMatrix, Complex};
use crate::random::Rng;
use crate::repr::wigner;
use crate::serial::{matrix_from_json, matrix_to_json, JsonMatrix};

#[derive(Clone, Debug, PartialEq)]
enum SymbolData {
    Invariant(Vec<CMatrix>),
    /// Indexed `[two_l][node]`.
    Sampled(Vec<Vec<CMatrix>>),
}

#[derive(Clone, Debug)]
pub struct Symbol {
    two_l_max: u32,
    x_two_l: u32,
    grid: Option<Arc<QuadratureGrid>>,
    data: SymbolData,
}

fn check_blocks(blocks: &[CMatrix], two_l: usize) -> Result<()> {
    if blocks.iter().any(|b| b.shape() != (two_l + 1, two_l + 1)) {
        return Err(Error::Invalid(format!("symbol block for two_l={two_l} has the wrong shape")));
    }
    Ok(())
}

impl Symbol {
    /// An x-invariant symbol from its blocks for two_l = 0..=two_L.
    pub fn invariant(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Invalid("symbol has no blocks".into()));
        }
        for (t, b) in blocks.iter().enumerate() {
            check_blocks(std::slice::from_ref(b), t)?;
        }
        Ok(Symbol { two_l_max: blocks.len() as u32 - 1, x_two_l: 0, grid: None, data: SymbolData::Invariant(blocks) })
    }

    /// A symbol sampled at the grid nodes, `blocks[two_l][node]`. The grid must
    /// resolve the declared x-band exactly.
    pub fn sampled(blocks: Vec<Vec<CMatrix>>, x_two_l: u32, grid: Arc<QuadratureGrid>) -> Result<Self> {
        grid.require_exactness(2 * x_two_l)?;
        if blocks.is_empty() {
            return Err(Error::Invalid("symbol has no blocks".into()));
        }
        for (t, per_node) in blocks.iter().enumerate() {
            if per_node.len() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), actual: per_node.len() });
            }
            check_blocks(per_node, t)?;
        }
        Ok(Symbol {
            two_l_max: blocks.len() as u32 - 1,
            x_two_l,
            grid: Some(grid),
            data: SymbolData::Sampled(blocks),
        })
    }

    /// Samples `f(x, two_l)` at the grid nodes.
    pub fn from_fn(
        two_l_max: u32,
        x_two_l: u32,
        grid: Arc<QuadratureGrid>,
        f: impl Fn(&GroupElement, u32) -> CMatrix + Sync,
    ) -> Result<Self> {
        let blocks = (0..=two_l_max).map(|t| grid.nodes().par_iter().map(|x| f(x, t)).collect()).collect();
        Symbol::sampled(blocks, x_two_l, grid)
    }

    /// φ(x)·I, the symbol of multiplication by φ.
    pub fn scalar_function(phi: &BandLimitedFunction, two_l_max: u32, grid: Arc<QuadratureGrid>) -> Result<Self> {
        let values = synthesize(phi, &grid);
        let blocks = (0..=two_l_max).map(|t| values.iter().map(|v| identity(dim(t)) * *v).collect()).collect();
        Symbol::sampled(blocks, phi.two_l_max(), grid)
    }

    pub fn zero(two_l_max: u32) -> Self {
        Symbol::invariant((0..=two_l_max).map(|t| zeros(dim(t))).collect()).expect("valid shapes")
    }

    /// Random x-invariant symbol with Gaussian entries.
    pub fn random_invariant(rng: &mut Rng, two_l_max: u32) -> Self {
        Symbol::invariant(rng.coefficient_stack(two_l_max)).expect("valid shapes")
    }

    /// Random symbol whose entries are random functions of band `x_two_l`.
    pub fn random_sampled(rng: &mut Rng, two_l_max: u32, x_two_l: u32, grid: Arc<QuadratureGrid>) -> Result<Self> {
        let coeffs: Vec<Vec<BandLimitedFunction>> = (0..=two_l_max)
            .map(|t| {
                (0..dim(t) * dim(t))
                    .map(|_| BandLimitedFunction::from_coeffs(rng.coefficient_stack(x_two_l)).expect("valid shapes"))
                    .collect()
            })
            .collect();
        Symbol::from_x_coefficients(&coeffs, x_two_l, grid)
    }

    pub fn two_l_max(&self) -> u32 {
        self.two_l_max
    }

    pub fn x_two_l(&self) -> u32 {
        self.x_two_l
    }

    pub fn grid(&self) -> Option<&Arc<QuadratureGrid>> {
        self.grid.as_ref()
    }

    pub fn is_x_invariant(&self) -> bool {
        matches!(self.data, SymbolData::Invariant(_))
    }

    /// Number of stored x-samples (1 for invariant symbols).
    pub fn node_count(&self) -> usize {
        match &self.data {
            SymbolData::Invariant(_) => 1,
            SymbolData::Sampled(b) => b[0].len(),
        }
    }

    /// σ(x_node, l); the node is ignored for invariant symbols.
    pub fn block(&self, node: usize, two_l: u32) -> &CMatrix {
        match &self.data {
            SymbolData::Invariant(b) => &b[two_l as usize],
            SymbolData::Sampled(b) => &b[two_l as usize][node],
        }
    }

    /// The blocks of an x-invariant symbol.
    pub fn invariant_blocks(&self) -> Option<&[CMatrix]> {
        match &self.data {
            SymbolData::Invariant(b) => Some(b),
            SymbolData::Sampled(_) => None,
        }
    }

    /// All blocks at one node, two_l = 0..=two_L.
    pub fn stack_at(&self, node: usize) -> Vec<CMatrix> {
        (0..=self.two_l_max).map(|t| self.block(node, t).clone()).collect()
    }

    /// Largest deviation of any node block from the node-0 block.
    pub fn x_spread(&self) -> f64 {
        match &self.data {
            SymbolData::Invariant(_) => 0.0,
            SymbolData::Sampled(b) => b
                .iter()
                .flat_map(|per_node| per_node.iter().map(move |m| max_abs_diff(m, &per_node[0])))
                .fold(0.0, f64::max),
        }
    }

    /// Collapses to an x-invariant symbol when every node agrees within `tol`.
    pub fn to_invariant(&self, tol: f64) -> Result<Symbol> {
        let spread = self.x_spread();
        if spread > tol {
            return Err(Error::NotInvariant { spread });
        }
        Symbol::invariant(self.stack_at(0))
    }

    /// Applies `f` to every block.
    pub fn map_blocks(&self, f: impl Fn(u32, &CMatrix) -> CMatrix + Sync) -> Symbol {
        let data = match &self.data {
            SymbolData::Invariant(b) => {
                SymbolData::Invariant(b.iter().enumerate().map(|(t, m)| f(t as u32, m)).collect())
            }
            SymbolData::Sampled(b) => SymbolData::Sampled(
                b.iter().enumerate().map(|(t, per)| per.par_iter().map(|m| f(t as u32, m)).collect()).collect(),
            ),
        };
        Symbol { data, ..self.clone_shell() }
    }

    /// Replaces the l-stack at every node by `f(stack)`, which must return
    /// blocks for two_l = 0..=`out_two_l_max`.
    pub fn map_stacks(&self, out_two_l_max: u32, f: impl Fn(&[CMatrix]) -> Vec<CMatrix> + Sync) -> Symbol {
        let data = match &self.data {
            SymbolData::Invariant(b) => SymbolData::Invariant(f(b)),
            SymbolData::Sampled(_) => {
                let per_node: Vec<Vec<CMatrix>> =
                    (0..self.node_count()).into_par_iter().map(|k| f(&self.stack_at(k))).collect();
                SymbolData::Sampled(
                    (0..=out_two_l_max as usize).map(|t| per_node.iter().map(|s| s[t].clone()).collect()).collect(),
                )
            }
        };
        Symbol { two_l_max: out_two_l_max, data, ..self.clone_shell() }
    }

    fn clone_shell(&self) -> Symbol {
        Symbol {
            two_l_max: self.two_l_max,
            x_two_l: self.x_two_l,
            grid: self.grid.clone(),
            data: SymbolData::Invariant(Vec::new()),
        }
    }

    /// Keeps the blocks with two_l ≤ `two_l_max`.
    pub fn truncate(&self, two_l_max: u32) -> Result<Symbol> {
        if two_l_max > self.two_l_max {
            return Err(Error::BandExhausted(format!(
                "cannot extend a symbol of band {} to {two_l_max}",
                self.two_l_max
            )));
        }
        Ok(self.map_stacks(two_l_max, |s| s[..=two_l_max as usize].to_vec()))
    }

    pub fn scale(&self, s: Complex) -> Symbol {
        self.map_blocks(|_, m| m * s)
    }

    /// σ(x, l)* blockwise.
    pub fn adjoint(&self) -> Symbol {
        self.map_blocks(|_, m| m.adjoint())
    }

    /// Per-entry x-Fourier coefficients, `[two_l][row * size + col]`.
    pub fn x_coefficients(&self) -> Result<Vec<Vec<BandLimitedFunction>>> {
        match &self.data {
            SymbolData::Invariant(b) => Ok(b
                .iter()
                .map(|m| m.transpose().iter().map(|v| BandLimitedFunction::constant(*v, 0)).collect())
                .collect()),
            SymbolData::Sampled(b) => {
                let grid = self.grid.as_ref().expect("sampled symbols carry a grid");
                b.iter()
                    .enumerate()
                    .map(|(t, per_node)| {
                        let size = dim(t as u32);
                        (0..size * size)
                            .into_par_iter()
                            .map(|e| {
                                let samples: Vec<Complex> = per_node.iter().map(|m| m[(e / size, e % size)]).collect();
                                forward(&samples, grid, self.x_two_l)
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect()
            }
        }
    }

    /// Inverse of [`Symbol::x_coefficients`], sampling on `grid`.
    pub fn from_x_coefficients(
        coeffs: &[Vec<BandLimitedFunction>],
        x_two_l: u32,
        grid: Arc<QuadratureGrid>,
    ) -> Result<Symbol> {
        let blocks = coeffs
            .iter()
            .enumerate()
            .map(|(t, entries)| {
                let size = dim(t as u32);
                if entries.len() != size * size {
                    return Err(Error::Invalid(format!("expected {} entries for two_l={t}", size * size)));
                }
                let values: Vec<Vec<Complex>> = entries.par_iter().map(|f| synthesize(f, &grid)).collect();
                Ok((0..grid.len())
                    .map(|k| CMatrix::from_fn(size, size, |i, j| values[i * size + j][k]))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Symbol::sampled(blocks, x_two_l, grid)
    }

    /// Re-samples the x-dependence on another grid.
    pub fn resample(&self, grid: Arc<QuadratureGrid>) -> Result<Symbol> {
        match &self.grid {
            None => Ok(self.clone()),
            Some(g) if Arc::ptr_eq(g, &grid) || **g == *grid => Ok(self.clone()),
            Some(_) => Symbol::from_x_coefficients(&self.x_coefficients()?, self.x_two_l, grid),
        }
    }

    /// σ(x, l) at an arbitrary point.
    pub fn evaluate(&self, x: &GroupElement) -> Result<Vec<CMatrix>> {
        if self.is_x_invariant() {
            return Ok(self.stack_at(0));
        }
        let coeffs = self.x_coefficients()?;
        Ok(coeffs
            .iter()
            .enumerate()
            .map(|(t, entries)| {
                let size = dim(t as u32);
                CMatrix::from_fn(size, size, |i, j| entries[i * size + j].evaluate(x))
            })
            .collect())
    }

    /// Both symbols on one grid able to hold x-band `x_needed`.
    fn aligned(&self, other: &Symbol, x_needed: u32) -> Result<(Symbol, Symbol)> {
        let target = match (&self.grid, &other.grid) {
            (None, None) => return Ok((self.clone(), other.clone())),
            (Some(g), None) | (None, Some(g)) => {
                if g.exactness_two_l() >= 2 * x_needed {
                    Arc::clone(g)
                } else {
                    shared_grid(2 * x_needed)
                }
            }
            (Some(a), Some(b)) => {
                let same = Arc::ptr_eq(a, b) || **a == **b;
                if same && a.exactness_two_l() >= 2 * x_needed {
                    Arc::clone(a)
                } else {
                    shared_grid(a.exactness_two_l().max(b.exactness_two_l()).max(2 * x_needed))
                }
            }
        };
        Ok((self.resample(Arc::clone(&target))?, other.resample(target)?))
    }

    fn combine(
        &self,
        other: &Symbol,
        x_two_l: u32,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix + Sync,
    ) -> Result<Symbol> {
        let two_l_max = self.two_l_max.min(other.two_l_max);
        let (a, b) = self.aligned(other, x_two_l)?;
        match (&a.data, &b.data) {
            (SymbolData::Invariant(x), SymbolData::Invariant(y)) => {
                Symbol::invariant((0..=two_l_max as usize).map(|t| f(&x[t], &y[t])).collect())
            }
            _ => {
                let grid = a.grid.clone().or(b.grid.clone()).expect("one side is sampled");
                let blocks = (0..=two_l_max)
                    .map(|t| (0..grid.len()).into_par_iter().map(|k| f(a.block(k, t), b.block(k, t))).collect())
                    .collect();
                Symbol::sampled(blocks, x_two_l, grid)
            }
        }
    }

    /// Sum on the common band.
    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        self.combine(other, self.x_two_l.max(other.x_two_l), |a, b| a + b)
    }

    pub fn sub(&self, other: &Symbol) -> Result<Symbol> {
        self.combine(other, self.x_two_l.max(other.x_two_l), |a, b| a - b)
    }

    /// Pointwise product σ(x, l)·τ(x, l).
    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        self.combine(other, self.x_two_l + other.x_two_l, |a, b| a * b)
    }

    /// Largest entrywise difference on the common band.
    pub fn max_abs_diff(&self, other: &Symbol) -> Result<f64> {
        let d = self.sub(other)?;
        Ok((0..=d.two_l_max)
            .flat_map(|t| (0..d.node_count()).map(move |k| (t, k)))
            .map(|(t, k)| crate::linalg::max_abs(d.block(k, t)))
            .fold(0.0, f64::max))
    }

    pub fn to_file(&self) -> Result<SymbolFile> {
        let (grid_ref, sym) = match &self.grid {
            None => (None, self.clone()),
            Some(g) => {
                let canonical = shared_grid(g.exactness_two_l());
                (Some(canonical.exactness_two_l()), self.resample(canonical)?)
            }
        };
        let data = (0..=sym.two_l_max)
            .map(|t| (t.to_string(), (0..sym.node_count()).map(|k| matrix_to_json(sym.block(k, t))).collect()))
            .collect();
        Ok(SymbolFile {
            two_l: sym.two_l_max,
            x_two_l: sym.x_two_l,
            grid_ref,
            data,
            x_invariant: sym.is_x_invariant(),
        })
    }

    pub fn from_file(file: &SymbolFile) -> Result<Symbol> {
        let grid = match (file.x_invariant, file.grid_ref) {
            (true, _) => None,
            (false, Some(e)) => Some(shared_grid(e)),
            (false, None) => return Err(Error::Invalid("x-dependent symbol needs a grid_ref".into())),
        };
        let nodes = grid.as_ref().map_or(1, |g| g.len());
        let mut blocks = Vec::with_capacity(file.two_l as usize + 1);
        for t in 0..=file.two_l {
            let per_node = file
                .data
                .get(&t.to_string())
                .ok_or_else(|| Error::Invalid(format!("missing symbol data for two_l={t}")))?;
            if per_node.len() != nodes {
                return Err(Error::LengthMismatch { expected: nodes, actual: per_node.len() });
            }
            blocks.push(per_node.iter().map(|m| matrix_from_json(m, dim(t))).collect::<Result<Vec<_>>>()?);
        }
        match grid {
            None => Symbol::invariant(blocks.into_iter().map(|mut b| b.remove(0)).collect()),
            Some(g) => Symbol::sampled(blocks, file.x_two_l, g),
        }
    }
}

/// JSON form `{two_L, x_two_L, grid_ref, data: {"two_l": [node][row][col][re,im]}, x_invariant}`.
///
/// `grid_ref` is the exactness of the canonical grid the nodes belong to, or
/// null for x-invariant symbols (which store a single node).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolFile {
    #[serde(rename = "two_L")]
    pub two_l: u32,
    #[serde(rename = "x_two_L")]
    pub x_two_l: u32,
    pub grid_ref: Option<u32>,
    pub data: BTreeMap<String, Vec<JsonMatrix>>,
    pub x_invariant: bool,
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 8] =
    ["identity", "partial_plus", "partial_minus", "partial_zero", "laplacian", "D1", "D2", "D3"];

/// The x-invariant symbol of the identity or of a left-invariant field.
pub fn builtin(name: &str, two_l_max: u32) -> Result<Symbol> {
    if name == "identity" {
        return Symbol::invariant((0..=two_l_max).map(|t| identity(dim(t))).collect());
    }
    let field = InvariantField::from_str(name)?;
    Symbol::invariant((0..=two_l_max).map(|t| multiplier(field, t)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Plus,
    Minus,
    Zero,
    BarZero,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Plus, Direction::Minus, Direction::Zero, Direction::BarZero];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Plus => "plus",
            Direction::Minus => "minus",
            Direction::Zero => "zero",
            Direction::BarZero => "bar0",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Direction::Plus),
            "minus" => Ok(Direction::Minus),
            "zero" => Ok(Direction::Zero),
            "bar0" | "bar_zero" => Ok(Direction::BarZero),
            _ => Err(Error::Invalid(format!("unknown difference direction {s:?}"))),
        }
    }
}

/// a(two_l)_{n,m} with doubled labels; zero outside the stored range.
fn stencil_entry(a: &[CMatrix], two_l: i32, two_n: i32, two_m: i32) -> Complex {
    if two_l < 0 || two_l as usize >= a.len() || two_n.abs() > two_l || two_m.abs() > two_l {
        return Complex::new(0.0, 0.0);
    }
    a[two_l as usize][(((two_n + two_l) / 2) as usize, ((two_m + two_l) / 2) as usize)]
}

fn sqrt_pos(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// One difference applied to an l-stack; the result has blocks up to `out_two_l_max`.
pub fn difference_blocks(dir: Direction, a: &[CMatrix], out_two_l_max: u32) -> Vec<CMatrix> {
    (0..=out_two_l_max)
        .map(|t| {
            let tl = t as i32;
            let l = f64::from(t) / 2.0;
            let d = 2.0 * l + 1.0;
            CMatrix::from_fn(dim(t), dim(t), |i, j| {
                let (tn, tm) = (2 * i as i32 - tl, 2 * j as i32 - tl);
                let (n, m) = (f64::from(tn) / 2.0, f64::from(tm) / 2.0);
                let get = |dl: i32, dn: i32, dm: i32| stencil_entry(a, tl + dl, tn + dn, tm + dm);
                match dir {
                    Direction::Minus => {
                        get(-1, -1, 1) * (sqrt_pos((l - m) * (l + n)) / d)
                            - get(1, -1, 1) * (sqrt_pos((l + m + 1.0) * (l - n + 1.0)) / d)
                    }
                    Direction::Plus => {
                        get(-1, 1, -1) * (sqrt_pos((l + m) * (l - n)) / d)
                            - get(1, 1, -1) * (sqrt_pos((l - m + 1.0) * (l + n + 1.0)) / d)
                    }
                    Direction::Zero | Direction::BarZero => {
                        let up = get(-1, 1, 1) * (sqrt_pos((l - m) * (l - n)) / d)
                            + get(1, 1, 1) * (sqrt_pos((l + m + 1.0) * (l + n + 1.0)) / d);
                        let down = get(-1, -1, -1) * (sqrt_pos((l + m) * (l + n)) / d)
                            + get(1, -1, -1) * (sqrt_pos((l - m + 1.0) * (l - n + 1.0)) / d);
                        if dir == Direction::Zero {
                            up - down
                        } else {
                            (up + down) * 0.5
                        }
                    }
                }
            })
        })
        .collect()
}

fn exhausted(what: &str, band: u32, need: u32) -> Error {
    Error::BandExhausted(format!("{what} needs band two_L ≥ {need}, symbol has {band}"))
}

/// Δ_dir σ, pointwise in x. The stencils reach l + 1/2, so only blocks with
/// two_l ≤ two_L − 1 are exact; the result is truncated there.
pub fn difference(dir: Direction, sigma: &Symbol) -> Result<Symbol> {
    if sigma.two_l_max < 1 {
        return Err(exhausted("a difference", sigma.two_l_max, 1));
    }
    let out = sigma.two_l_max - 1;
    Ok(sigma.map_stacks(out, |s| difference_blocks(dir, s, out)))
}

/// Δ^α = Δ₊^{α1}Δ₋^{α2}Δ₀^{α3}.
pub fn difference_multi(alpha: [u32; 3], sigma: &Symbol) -> Result<Symbol> {
    let total: u32 = alpha.iter().sum();
    if sigma.two_l_max < total {
        return Err(exhausted("Δ^α", sigma.two_l_max, total));
    }
    let out = sigma.two_l_max - total;
    Ok(sigma.map_stacks(out, |s| difference_stack(alpha, s)))
}

fn difference_stack(alpha: [u32; 3], a: &[CMatrix]) -> Vec<CMatrix> {
    let mut cur = a.to_vec();
    for (dir, k) in [(Direction::Zero, alpha[2]), (Direction::Minus, alpha[1]), (Direction::Plus, alpha[0])] {
        for _ in 0..k {
            let top = cur.len() as u32 - 2;
            cur = difference_blocks(dir, &cur, top);
        }
    }
    cur
}

/// Δ_q σ = (q·s)ˆ with s the kernel whose coefficients are σ(x, ·), for each x.
///
/// The kernel product is analysed on `grid`, which must be exact at
/// 2·two_L. Only the blocks with two_l ≤ two_L − (band of q) are exact and
/// returned. q(e) = 0 is the intended use but is not required.
pub fn difference_by_function(q: &BandLimitedFunction, sigma: &Symbol, grid: &QuadratureGrid) -> Result<Symbol> {
    let qb = q.two_l_max();
    if sigma.two_l_max < qb {
        return Err(exhausted("Δ_q", sigma.two_l_max, qb));
    }
    grid.require_exactness(2 * sigma.two_l_max)?;
    let out = sigma.two_l_max - qb;
    let qs = synthesize(q, grid);
    let apply = |stack: &[CMatrix]| -> Result<Vec<CMatrix>> {
        let kernel = BandLimitedFunction::from_coeffs(stack.to_vec())?;
        let prod: Vec<Complex> = synthesize(&kernel, grid).iter().zip(&qs).map(|(s, q)| s * q).collect();
        Ok(forward(&prod, grid, out)?.coeffs().to_vec())
    };
    match &sigma.data {
        SymbolData::Invariant(b) => Symbol::invariant(apply(b)?),
        SymbolData::Sampled(_) => {
            let per_node =
                (0..sigma.node_count()).map(|k| apply(&sigma.stack_at(k))).collect::<Result<Vec<_>>>()?;
            let blocks =
                (0..=out as usize).map(|t| per_node.iter().map(|s| s[t].clone()).collect()).collect();
            Symbol::sampled(blocks, sigma.x_two_l, Arc::clone(sigma.grid.as_ref().expect("sampled")))
        }
    }
}

/// Applies the left-invariant operator with multipliers `mult(two_l)` to the
/// x-dependence of every entry.
pub fn x_apply(sigma: &Symbol, mult: impl Fn(u32) -> CMatrix) -> Result<Symbol> {
    let mults: Vec<CMatrix> = (0..=sigma.x_two_l).map(&mult).collect();
    match &sigma.data {
        // constants only see the l = 0 multiplier
        SymbolData::Invariant(_) => Ok(sigma.scale(mults[0][(0, 0)])),
        SymbolData::Sampled(_) => {
            let coeffs = sigma.x_coefficients()?;
            let applied: Vec<Vec<BandLimitedFunction>> = coeffs
                .iter()
                .map(|entries| {
                    entries.iter().map(|f| f.map_blocks(|t, c| &mults[t as usize] * c)).collect()
                })
                .collect();
            Symbol::from_x_coefficients(&applied, sigma.x_two_l, Arc::clone(sigma.grid.as_ref().expect("sampled")))
        }
    }
}

/// ∂_x^β σ with ∂^β = ∂₀^{β1}∂₊^{β2}∂₋^{β3}.
pub fn x_derivative(beta: [u32; 3], sigma: &Symbol) -> Result<Symbol> {
    x_apply(sigma, |t| ordered_multiplier(beta, t))
}

/// σ_{A_u}(x, l) = t^l(u)*·σ(x·u⁻¹, l)·t^l(u).
pub fn pushforward(sigma: &Symbol, u: &GroupElement) -> Result<Symbol> {
    let translated = match &sigma.data {
        SymbolData::Invariant(_) => sigma.clone(),
        SymbolData::Sampled(_) => {
            // f(x·u⁻¹) has coefficients t^l(u)*·f̂(l)
            let shift: Vec<CMatrix> = (0..=sigma.x_two_l).map(|t| wigner(u, t).entries.adjoint()).collect();
            let coeffs: Vec<Vec<BandLimitedFunction>> = sigma
                .x_coefficients()?
                .iter()
                .map(|entries| entries.iter().map(|f| f.map_blocks(|t, c| &shift[t as usize] * c)).collect())
                .collect();
            Symbol::from_x_coefficients(&coeffs, sigma.x_two_l, Arc::clone(sigma.grid.as_ref().expect("sampled")))?
        }
    };
    let tu: Vec<CMatrix> = (0..=sigma.two_l_max).map(|t| wigner(u, t).entries).collect();
    Ok(translated.map_blocks(|t, m| tu[t as usize].adjoint() * m * &tu[t as usize]))
}

/// Both sides of the discrete Leibniz formula for Δ^α(a·σ_{∂₀}):
/// LHS = Δ^α(a·σ_{∂₀}) and RHS = (Δ^α a)·W + α₃·Δ̄₀Δ^{α−e₃}a, where W scales
/// column m by m − α₁/2 + α₂/2.
pub fn leibniz_check_data(alpha: [u32; 3], a: &Symbol) -> Result<(Symbol, Symbol)> {
    let total: u32 = alpha.iter().sum();
    if a.two_l_max < total {
        return Err(exhausted("the Leibniz check", a.two_l_max, total));
    }
    let out = a.two_l_max - total;
    let d0 = builtin("partial_zero", a.two_l_max)?;
    let lhs = difference_multi(alpha, &a.mul(&d0)?)?;
    let shift = (f64::from(alpha[1]) - f64::from(alpha[0])) / 2.0;
    let weighted = difference_multi(alpha, a)?.map_blocks(|t, m| {
        let l = f64::from(t) / 2.0;
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (j as f64 - l + shift))
    });
    let rhs = if alpha[2] > 0 {
        let lower = difference_multi([alpha[0], alpha[1], alpha[2] - 1], a)?;
        let bar = difference(Direction::BarZero, &lower)?.scale(Complex::new(f64::from(alpha[2]), 0.0));
        weighted.add(&bar)?
    } else {
        weighted
    };
    Ok((lhs.truncate(out)?, rhs.truncate(out)?))
}
