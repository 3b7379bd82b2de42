//! Finite-band diagnostics for the symbol classes: growth in l, off-diagonal
//! decay, the operator-norm inequalities, and decay certificates for
//! infinite matrices truncated to finite size.
//!
//! Every report here is a necessity check. A finite band can falsify class
//! membership but never prove it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::group::{multi_indices, Axis, GroupElement, MultiIndex};
use crate::linalg::{bracket, max_abs, op_norm, CMatrix};
use crate::symbols::{difference_multi, pushforward, x_derivative, Symbol};

/// Allowed ratio between the upper-band and lower-band constants.
pub const DEFAULT_MARGIN: f64 = 1.5;
const NEGLIGIBLE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub u: usize,
    pub node: usize,
    pub two_l: u32,
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayCheck {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    #[serde(rename = "N")]
    pub n: u32,
    /// Largest normalized ratio over every sample.
    #[serde(rename = "C")]
    pub c: f64,
    /// The same maximum over the lower and upper halves of the band.
    pub c_low: f64,
    pub c_high: f64,
    pub witness: Option<Witness>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub margin: f64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub checks: Vec<DecayCheck>,
    pub summary: ReportSummary,
}

impl DecayReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn from_checks(checks: Vec<DecayCheck>, margin: f64) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        DecayReport {
            summary: ReportSummary {
                total: checks.len(),
                passed,
                failed: checks.len() - passed,
                margin,
                note: "finite-band necessity check: a pass means no growth beyond the declared order was \
                       observed on this band, not class membership"
                    .into(),
            },
            checks,
        }
    }
}

/// Running maxima for one (α, β, N) cell, split at the middle of the band.
#[derive(Clone, Copy, Default)]
struct Maxima {
    low: f64,
    high: f64,
    best: f64,
    witness: Option<Witness>,
}

impl Maxima {
    fn push(&mut self, value: f64, high: bool, w: Witness) {
        if high {
            self.high = self.high.max(value);
        } else {
            self.low = self.low.max(value);
        }
        if value > self.best || self.witness.is_none() {
            self.best = value.max(self.best);
            self.witness = Some(w);
        }
    }

    fn merge(mut self, other: Maxima) -> Maxima {
        self.low = self.low.max(other.low);
        self.high = self.high.max(other.high);
        if other.best > self.best || self.witness.is_none() {
            self.best = other.best;
            self.witness = other.witness;
        }
        self
    }

    fn passes(&self, margin: f64) -> bool {
        self.high <= NEGLIGIBLE || self.high <= margin * self.low
    }
}

/// 20 low-discrepancy points (Halton sequence in bases 2, 3, 5 mapped to the
/// sphere) followed by the Weyl elements w₁, w₂, w₃.
pub fn default_u_samples() -> Vec<GroupElement> {
    let mut out: Vec<GroupElement> = (1..=20)
        .map(|k| {
            let (u1, u2, u3) = (halton(k, 2), halton(k, 3), halton(k, 5));
            let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
            GroupElement::from_quaternion(
                b * (2.0 * PI * u3).cos(),
                a * (2.0 * PI * u2).sin(),
                a * (2.0 * PI * u2).cos(),
                b * (2.0 * PI * u3).sin(),
            )
            .expect("unit quaternion")
        })
        .collect();
    out.extend([Axis::One, Axis::Two, Axis::Three].map(GroupElement::weyl));
    out
}

fn halton(mut index: u32, base: u32) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while index > 0 {
        f /= f64::from(base);
        r += f * f64::from(index % base);
        index /= base;
    }
    r
}

/// Δ^α ∂_x^β σ for every requested (α, β).
fn derived(sigma: &Symbol, alpha_max: u32, beta_max: u32) -> Result<Vec<(MultiIndex, MultiIndex, Symbol)>> {
    let mut out = Vec::new();
    for beta in multi_indices(beta_max) {
        let db = if beta == [0, 0, 0] { sigma.clone() } else { x_derivative(beta, sigma)? };
        for alpha in multi_indices(alpha_max) {
            if alpha.iter().sum::<u32>() > db.two_l_max() {
                continue;
            }
            out.push((alpha, beta, difference_multi(alpha, &db)?));
        }
    }
    Ok(out)
}

/// |Δ^α∂^βσ_{A_u}(x, l)_{ij}|·⟨i−j⟩^N / (1+l)^{m−|α|} over u, x, l, i, j.
///
/// A cell passes when its maximum over the upper half of the band is at most
/// `DEFAULT_MARGIN` times the maximum over the lower half.
pub fn class_report(
    sigma: &Symbol,
    m: f64,
    alpha_max: u32,
    beta_max: u32,
    n_max: u32,
    u_samples: &[GroupElement],
) -> Result<DecayReport> {
    let pushed: Vec<Symbol> = u_samples.iter().map(|u| pushforward(sigma, u)).collect::<Result<_>>()?;
    let per_u: Vec<Vec<(MultiIndex, MultiIndex, Symbol)>> =
        pushed.iter().map(|s| derived(s, alpha_max, beta_max)).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (cell, (alpha, beta, _)) in per_u[0].iter().enumerate() {
        let order = m - f64::from(alpha.iter().sum::<u32>());
        for n in 0..=n_max {
            let maxima = per_u
                .par_iter()
                .enumerate()
                .map(|(u, cells)| {
                    let d = &cells[cell].2;
                    let half = d.two_l_max() / 2;
                    let mut acc = Maxima::default();
                    for t in 0..=d.two_l_max() {
                        let growth = (1.0 + f64::from(t) / 2.0).powf(order);
                        for node in 0..d.node_count() {
                            let b = d.block(node, t);
                            for i in 0..b.nrows() {
                                for j in 0..b.ncols() {
                                    let k = i as f64 - j as f64;
                                    let ratio = b[(i, j)].norm() * bracket(k).powi(n as i32) / growth;
                                    acc.push(ratio, t > half, Witness { u, node, two_l: t, i, j });
                                }
                            }
                        }
                    }
                    acc
                })
                .reduce(Maxima::default, Maxima::merge);
            checks.push(DecayCheck {
                alpha: *alpha,
                beta: *beta,
                n,
                c: maxima.best,
                c_low: maxima.low,
                c_high: maxima.high,
                witness: maxima.witness,
                pass: maxima.passes(DEFAULT_MARGIN),
            });
        }
    }
    Ok(DecayReport::from_checks(checks, DEFAULT_MARGIN))
}

/// ‖Δ^α∂^βσ(x, l)‖_op / ⟨l⟩^{m−|α|} with ⟨l⟩ = (1 + l(l+1))^{1/2}; the
/// witness records the node and two_l of the maximum.
pub fn sigma0_inequalities(sigma: &Symbol, m: f64, alpha_max: u32, beta_max: u32) -> Result<DecayReport> {
    let mut checks = Vec::new();
    for (alpha, beta, d) in derived(sigma, alpha_max, beta_max)? {
        let order = m - f64::from(alpha.iter().sum::<u32>());
        let half = d.two_l_max() / 2;
        let mut acc = Maxima::default();
        for t in 0..=d.two_l_max() {
            let l = f64::from(t) / 2.0;
            let weight = (1.0 + l * (l + 1.0)).sqrt().powf(order);
            for node in 0..d.node_count() {
                let ratio = op_norm(d.block(node, t)) / weight;
                acc.push(ratio, t > half, Witness { u: 0, node, two_l: t, i: 0, j: 0 });
            }
        }
        checks.push(DecayCheck {
            alpha,
            beta,
            n: 0,
            c: acc.best,
            c_low: acc.low,
            c_high: acc.high,
            witness: acc.witness,
            pass: acc.passes(DEFAULT_MARGIN),
        });
    }
    Ok(DecayReport::from_checks(checks, DEFAULT_MARGIN))
}

/// Upper bound for Σ_{k∈ℤ} ⟨k⟩^{−r}, r > 1: partial sum plus the integral tail.
pub fn bracket_sum_bound(r: f64) -> f64 {
    const K: i64 = 4096;
    let partial: f64 = 1.0 + 2.0 * (1..=K).map(|k| bracket(k as f64).powf(-r)).sum::<f64>();
    partial + 2.0 * (K as f64).powf(1.0 - r) / (r - 1.0)
}

/// Decay certificate |M_ij| ≤ c·⟨i−j⟩^{−r}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub c: f64,
    pub r: f64,
}

impl DecayCertificate {
    /// Whether `m` satisfies the certificate entrywise (relative slack 1e-12).
    pub fn holds_for(&self, m: &CMatrix) -> bool {
        fitted_constant(m, self.r) <= self.c * (1.0 + 1e-12) + 1e-300
    }
}

/// Smallest c with |M_ij| ≤ c·⟨i−j⟩^{−r} on this matrix.
pub fn fitted_constant(m: &CMatrix, r: f64) -> f64 {
    let mut c = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            c = c.max(m[(i, j)].norm() * bracket(i as f64 - j as f64).powf(r));
        }
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct NormComparison {
    pub op: f64,
    pub linf: f64,
    /// c·Σ⟨k⟩^{−r}, when a valid certificate was supplied.
    pub schur_bound: Option<f64>,
    /// ‖M‖_ℓ∞ ≤ ‖M‖_op, and ‖M‖_op ≤ bound when a bound is present.
    pub holds: bool,
}

/// (‖M‖_op, ‖M‖_ℓ∞) and, given a decay certificate with r > 1 that M
/// satisfies, the Schur-test bound ‖M‖_op ≤ c·Σ_k⟨k⟩^{−r}.
pub fn opnorm_vs_linf(m: &CMatrix, certificate: Option<DecayCertificate>) -> NormComparison {
    let op = op_norm(m);
    let linf = max_abs(m);
    let schur_bound = certificate
        .filter(|cert| cert.r > 1.0 && cert.holds_for(m))
        .map(|cert| cert.c * bracket_sum_bound(cert.r));
    let tol = 1e-12 * op.max(1.0);
    let holds = linf <= op + tol && schur_bound.map_or(true, |b| op <= b + tol);
    NormComparison { op, linf, schur_bound, holds }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductDecay {
    /// Certificate for AB from the Peetre-inequality bound, when r, s > 1.
    pub certificate: Option<DecayCertificate>,
    /// max |(AB)_ik|·⟨i−k⟩^{min(r,s)} on the finite product.
    pub empirical_constant: f64,
    /// The finite product satisfies the certificate.
    pub verified: bool,
}

/// Given |A_ij| ≤ c_A⟨i−j⟩^{−r} and |B_jk| ≤ c_B⟨j−k⟩^{−s} with r, s > 1,
/// |(AB)_ik| ≤ c_A·c_B·(2^r·S(s) + 2^s·S(r))·⟨i−k⟩^{−min(r,s)}, S(t) = Σ⟨k⟩^{−t}.
pub fn banded_product_decay(a: &CMatrix, ca: DecayCertificate, b: &CMatrix, cb: DecayCertificate) -> ProductDecay {
    let product = a * b;
    let exponent = ca.r.min(cb.r);
    let empirical_constant = fitted_constant(&product, exponent);
    let valid = ca.r > 1.0 && cb.r > 1.0 && ca.holds_for(a) && cb.holds_for(b);
    let certificate = valid.then(|| DecayCertificate {
        c: ca.c * cb.c * (2f64.powf(ca.r) * bracket_sum_bound(cb.r) + 2f64.powf(cb.r) * bracket_sum_bound(ca.r)),
        r: exponent,
    });
    let verified = certificate.map_or(false, |cert| cert.holds_for(&product));
    ProductDecay { certificate, empirical_constant, verified }
}
