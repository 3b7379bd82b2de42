//! The identity suite behind `su2q verify`.
//!
//! Cheap checks scale with the requested band; the composition and duality
//! checks run at a fixed small band because their cost grows like L⁶.

use std::sync::Arc;

use serde::Serialize;
use su2q::diagnostics::{
    banded_product_decay, class_report, default_u_samples, fitted_constant, opnorm_vs_linf, sigma0_inequalities,
    DecayCertificate,
};
use su2q::diffops::{apply_field, multiplier, InvariantField};
use su2q::fourier::{analyze_fn, convolve, forward, plancherel_norm, synthesize};
use su2q::group::taylor::{factorial, q_minus, q_monomial, q_plus, q_zero};
use su2q::group::{multi_indices, shared_grid, Axis};
use su2q::linalg::{bracket, commutator, identity, max_abs, max_abs_diff, op_norm, CMatrix};
use su2q::quantize::{
    adjoint_expansion, compose_expansion, empirical_op_norm, extract_symbol, l2_bound_estimate, op_apply,
    operator_from_spec, sobolev_reweight, AdjointOperator, SymbolOperator,
};
use su2q::random::Rng;
use su2q::repr::{character, half_product_terms, wigner, wigner_all, HalfEntry};
use su2q::symbols::{builtin, difference, difference_by_function, leibniz_check_data, Direction, BUILTIN_NAMES};
use su2q::{BandLimitedFunction, Complex, GroupElement, HalfInt, Symbol, TaylorBasis};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    #[serde(rename = "two_L")]
    pub two_l: u32,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

#[derive(Default)]
struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    fn within(&mut self, name: &str, tolerance: f64, check: impl FnOnce() -> su2q::Result<f64>) {
        let (max_error, note) = match check() {
            Ok(e) => (e, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        self.checks.push(CheckResult {
            name: name.into(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
            note,
        });
    }

    /// A yes/no property, recorded with error 0 or 1.
    fn holds(&mut self, name: &str, check: impl FnOnce() -> su2q::Result<bool>) {
        self.within(name, 0.0, || Ok(if check()? { 0.0 } else { 1.0 }));
    }
}

pub fn run_suite(two_l: u32) -> Manifest {
    let mut suite = Suite::default();
    let b = two_l.max(2);
    repr_checks(&mut suite, b);
    group_checks(&mut suite, b);
    fourier_checks(&mut suite, b);
    diffops_checks(&mut suite, b);
    symbol_checks(&mut suite, b);
    quantize_checks(&mut suite, b);
    diagnostics_checks(&mut suite, b);
    let failed = suite.checks.iter().filter(|c| !c.pass).count();
    Manifest {
        two_l,
        passed: suite.checks.len() - failed,
        failed,
        all_pass: failed == 0,
        checks: suite.checks,
    }
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn repr_checks(s: &mut Suite, b: u32) {
    let mut rng = Rng::seeded(1);
    s.within("repr.unitary", 1e-10, || {
        let mut err = 0.0f64;
        for _ in 0..100 {
            for (t, m) in wigner_all(&rng.group_element(), b).iter().enumerate() {
                err = err.max(max_abs_diff(&(m.adjoint() * m), &identity(t + 1)));
            }
        }
        Ok(err)
    });
    s.within("repr.homomorphism", 1e-10, || {
        let mut err = 0.0f64;
        for _ in 0..100 {
            let (g, h) = (rng.group_element(), rng.group_element());
            let (tg, th, tgh) = (wigner_all(&g, b), wigner_all(&h, b), wigner_all(&(g * h), b));
            for t in 0..=b as usize {
                err = err.max(max_abs_diff(&(&tg[t] * &th[t]), &tgh[t]));
            }
        }
        Ok(err)
    });
    s.within("repr.spin_half_is_defining", 1e-14, || {
        let mut err = 0.0f64;
        for _ in 0..100 {
            let g = rng.group_element();
            let (t, m) = (wigner(&g, 1).entries, g.to_matrix());
            for i in 0..2 {
                for j in 0..2 {
                    err = err.max((t[(i, j)] - m[(i, j)]).norm());
                }
            }
        }
        Ok(err)
    });
    s.within("repr.characters", 1e-10, || {
        let mut err = 0.0f64;
        for t in 0..=b {
            err = err.max((character(&GroupElement::IDENTITY, t) - c(f64::from(t) + 1.0)).norm());
            let (g, h) = (rng.group_element(), rng.group_element());
            err = err.max((character(&(h * g * h.inverse()), t) - character(&g, t)).norm());
        }
        Ok(err)
    });
    let top = b.min(10);
    s.within("repr.half_multiplication_formulas", 1e-10, || {
        let mut err = 0.0f64;
        for _ in 0..10 {
            let blocks = wigner_all(&rng.group_element(), top + 1);
            let lookup = |two_l: i32, m: HalfInt, n: HalfInt| -> Complex {
                if two_l < 0 {
                    return c(0.0);
                }
                let t = two_l as u32;
                match (m.index_in(t), n.index_in(t)) {
                    (Some(i), Some(j)) => blocks[t as usize][(i, j)],
                    _ => c(0.0),
                }
            };
            for two_l in 0..=top {
                for m in HalfInt::labels(two_l) {
                    for n in HalfInt::labels(two_l) {
                        for which in HalfEntry::ALL {
                            let (hi, hj) = which.index();
                            let lhs = lookup(two_l as i32, m, n) * blocks[1][(hi, hj)];
                            let rhs: Complex = half_product_terms(which, two_l, m, n)
                                .iter()
                                .map(|t| lookup(t.two_l, t.m, t.n) * t.coeff)
                                .sum();
                            err = err.max((lhs - rhs).norm());
                        }
                    }
                }
            }
        }
        Ok(err)
    });
}

fn group_checks(s: &mut Suite, b: u32) {
    s.within("group.quadrature_exactness", 1e-11, || {
        let grid = shared_grid(2 * b);
        let table = grid.wigner_table(2 * b);
        let mut err = 0.0f64;
        for t in 0..=2 * b {
            let size = t as usize + 1;
            for i in 0..size {
                for j in 0..size {
                    let values: Vec<Complex> = (0..grid.len()).map(|k| table.at(k, t)[(i, j)]).collect();
                    let expected = if t == 0 { 1.0 } else { 0.0 };
                    err = err.max((grid.integrate(&values)? - c(expected)).norm());
                }
            }
        }
        Ok(err)
    });
    s.within("group.taylor_biorthogonality", 1e-9, || {
        let order = 2;
        let grid = shared_grid(2 * order);
        let basis = TaylorBasis::new(order, &grid)?;
        let mut err = 0.0f64;
        for &a in basis.indices() {
            let inv = analyze_fn(|x| q_monomial(a, &x.inverse()), &grid, order)?;
            for &beta in basis.indices() {
                let v = basis.apply_dual(beta, &inv)?.evaluate(&GroupElement::IDENTITY);
                let expected = if a == beta { factorial(a) } else { 0.0 };
                err = err.max((v - c(expected)).norm());
            }
        }
        Ok(err)
    });
    s.within("group.q_odd_under_inversion", 1e-14, || {
        let mut rng = Rng::seeded(2);
        let mut err = 0.0f64;
        for _ in 0..20 {
            let x = rng.group_element();
            for q in [q_plus, q_minus, q_zero] {
                err = err.max((q(&x.inverse()) + q(&x)).norm());
            }
        }
        Ok(err)
    });
}

fn direct_convolution(f: &BandLimitedFunction, g: &BandLimitedFunction, x: &GroupElement, grid: &su2q::QuadratureGrid) -> Complex {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(|(y, w)| f.evaluate(&(*x * y.inverse())) * g.evaluate(y) * *w)
        .sum()
}

fn fourier_checks(s: &mut Suite, b: u32) {
    let mut rng = Rng::seeded(3);
    let grid = shared_grid(2 * b);
    let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(b)).expect("stack");
    s.within("fourier.round_trip", 1e-10, || {
        let samples = synthesize(&f, &grid);
        let back = forward(&samples, &grid, b)?;
        let resampled = synthesize(&back, &grid);
        let node_err = samples.iter().zip(&resampled).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        Ok(back.max_abs_diff(&f).max(node_err))
    });
    s.within("fourier.plancherel", 1e-9, || {
        let squares: Vec<Complex> = synthesize(&f, &grid).iter().map(|v| c(v.norm_sqr())).collect();
        let direct = grid.integrate(&squares)?.re.sqrt();
        Ok((plancherel_norm(&f) - direct).abs() / direct)
    });
    let bc = b.min(4);
    let cgrid = shared_grid(2 * bc);
    let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(bc)).expect("stack");
    let g = BandLimitedFunction::from_coeffs(rng.coefficient_stack(bc)).expect("stack");
    let points: Vec<GroupElement> = (0..5).map(|_| rng.group_element()).collect();
    s.within("fourier.convolution_theorem", 1e-8, || {
        let h = convolve(&f, &g)?;
        Ok(points
            .iter()
            .map(|x| (h.evaluate(x) - direct_convolution(&f, &g, x, &cgrid)).norm())
            .fold(0.0, f64::max))
    });
    s.holds("fourier.convolution_order_matters", || {
        let swapped = f.map_blocks(|t, fc| fc * g.coeff(t));
        let gap = points
            .iter()
            .map(|x| (swapped.evaluate(x) - direct_convolution(&f, &g, x, &cgrid)).norm())
            .fold(0.0, f64::max);
        Ok(gap > 1e-3)
    });
}

fn diffops_checks(s: &mut Suite, b: u32) {
    use InvariantField::*;
    s.within("diffops.commutators_and_laplacian", 1e-10, || {
        let mut err = 0.0f64;
        for t in 0..=b {
            let (p, m, z) = (multiplier(PartialPlus, t), multiplier(PartialMinus, t), multiplier(PartialZero, t));
            let lap = multiplier(Laplacian, t);
            err = err.max(max_abs_diff(&commutator(&z, &p), &p));
            err = err.max(max_abs_diff(&commutator(&m, &z), &m));
            err = err.max(max_abs_diff(&commutator(&p, &m), &(&z * c(2.0))));
            let from_ladder = -(&z * &z) - (&p * &m + &m * &p) * c(0.5);
            err = err.max(max_abs_diff(&from_ladder, &lap));
            let (d1, d2, d3) = (multiplier(D1, t), multiplier(D2, t), multiplier(D3, t));
            err = err.max(max_abs_diff(&(&d1 * &d1 + &d2 * &d2 + &d3 * &d3), &lap));
            let l = f64::from(t) / 2.0;
            err = err.max(max_abs_diff(&lap, &(identity(t as usize + 1) * c(-l * (l + 1.0)))));
        }
        Ok(err)
    });
    s.within("diffops.fields_are_derivatives", 1e-6, || {
        let mut rng = Rng::seeded(4);
        let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(b.min(6)))?;
        let h = 1e-4;
        let mut err = 0.0f64;
        for (field, axis) in [(D1, Axis::One), (D2, Axis::Two), (D3, Axis::Three)] {
            let df = apply_field(field, &f);
            for _ in 0..10 {
                let x = rng.group_element();
                let fd = (f.evaluate(&(x * GroupElement::omega(axis, h))) - f.evaluate(&(x * GroupElement::omega(axis, -h))))
                    / (2.0 * h);
                err = err.max((fd - df.evaluate(&x)).norm() / df.evaluate(&x).norm().max(1.0));
            }
        }
        Ok(err)
    });
}

fn symbol_diff(a: &Symbol, b: &Symbol) -> su2q::Result<f64> {
    a.max_abs_diff(b)
}

fn symbol_checks(s: &mut Suite, b: u32) {
    let sym = |name: &str, band: u32| builtin(name, band);
    s.within("symbols.first_order_differences", 1e-10, || {
        let band = b + 1;
        let id = sym("identity", band)?;
        let fields = [("partial_plus", Direction::Plus), ("partial_minus", Direction::Minus), ("partial_zero", Direction::Zero)];
        let mut err = 0.0f64;
        for (name, own) in fields {
            for (_, dir) in fields {
                let expected = if dir == own { id.truncate(b)? } else { Symbol::zero(b) };
                err = err.max(symbol_diff(&difference(dir, &sym(name, band)?)?, &expected)?);
            }
            err = err.max(symbol_diff(&difference(own, &id)?, &Symbol::zero(b))?);
        }
        Ok(err)
    });
    s.within("symbols.laplacian_differences", 1e-10, || {
        let band = b + 1;
        let lap = sym("laplacian", band)?;
        let mut err = 0.0f64;
        for (dir, name, k) in [
            (Direction::Plus, "partial_minus", -1.0),
            (Direction::Minus, "partial_plus", -1.0),
            (Direction::Zero, "partial_zero", -2.0),
        ] {
            err = err.max(symbol_diff(&difference(dir, &lap)?, &sym(name, b)?.scale(c(k)))?);
        }
        Ok(err)
    });
    s.within("symbols.leibniz_bar_zero", 1e-10, || {
        let band = b + 3;
        let mut rng = Rng::seeded(5);
        let mut symbols: Vec<Symbol> = BUILTIN_NAMES.iter().map(|n| sym(n, band)).collect::<su2q::Result<_>>()?;
        symbols.push(Symbol::random_invariant(&mut rng, band));
        let mut err = 0.0f64;
        for a in &symbols {
            for alpha in multi_indices(3) {
                let (lhs, rhs) = leibniz_check_data(alpha, a)?;
                err = err.max(symbol_diff(&lhs, &rhs)?);
            }
        }
        Ok(err)
    });
    s.within("symbols.differences_commute", 1e-10, || {
        let a = Symbol::random_invariant(&mut Rng::seeded(6), b + 2);
        let mut err = 0.0f64;
        for (x, y) in [
            (Direction::Zero, Direction::BarZero),
            (Direction::Zero, Direction::Plus),
            (Direction::Zero, Direction::Minus),
            (Direction::Plus, Direction::Minus),
        ] {
            let xy = difference(x, &difference(y, &a)?)?;
            let yx = difference(y, &difference(x, &a)?)?;
            err = err.max(symbol_diff(&xy, &yx)?);
        }
        Ok(err)
    });
    s.within("symbols.stencils_match_kernel_multiplication", 1e-10, || {
        let band = b.min(6);
        let grid = shared_grid(2 * band);
        let a = Symbol::random_invariant(&mut Rng::seeded(7), band);
        let mut err = 0.0f64;
        for (dir, q) in [
            (Direction::Plus, q_plus as fn(&GroupElement) -> Complex),
            (Direction::Minus, q_minus),
            (Direction::Zero, q_zero),
        ] {
            let qf = analyze_fn(q, &grid, 1)?;
            err = err.max(symbol_diff(&difference_by_function(&qf, &a, &grid)?, &difference(dir, &a)?)?);
        }
        Ok(err)
    });
}

fn q_symbol(name: &str, band: u32, grid: &Arc<su2q::QuadratureGrid>) -> su2q::Result<Symbol> {
    let q = match name {
        "q_plus" => q_plus,
        "q_minus" => q_minus,
        _ => q_zero,
    };
    Symbol::scalar_function(&analyze_fn(q, &shared_grid(2), 1)?, band, Arc::clone(grid))
}

fn symbol_of(name: &str, band: u32, grid: &Arc<su2q::QuadratureGrid>) -> su2q::Result<Symbol> {
    if name.starts_with("q_") {
        q_symbol(name, band, grid)
    } else {
        builtin(name, band)
    }
}

fn quantize_checks(s: &mut Suite, b: u32) {
    let grid4 = shared_grid(4);
    s.within("quantize.laplacian_eigenfunction", 1e-12, || {
        let grid = shared_grid(4);
        let t100 = BandLimitedFunction::matrix_element(2, 1, 1, 2);
        let applied = op_apply(&builtin("laplacian", 2)?, &t100, &grid)?;
        Ok(applied
            .iter()
            .zip(synthesize(&t100, &grid))
            .map(|(u, v)| (u + v * 2.0).norm())
            .fold(0.0, f64::max))
    });
    s.within("quantize.extract_inverts_quantize", 1e-9, || {
        let mut rng = Rng::seeded(8);
        let mut err = 0.0f64;
        for k in 0..10 {
            let sigma = if k % 2 == 0 {
                Symbol::random_invariant(&mut rng, b.min(4))
            } else {
                Symbol::random_sampled(&mut rng, b.min(3), 2, Arc::clone(&grid4))?
            };
            let back = extract_symbol(&SymbolOperator(sigma.clone()), sigma.two_l_max(), Arc::clone(&grid4))?;
            err = err.max(symbol_diff(&back, &sigma)?);
        }
        Ok(err)
    });
    s.within("quantize.composition_pairs", 1e-9, || {
        let taylor = &TaylorBasis::new(2, &grid4)?;
        let names = ["partial_zero", "partial_plus", "partial_minus", "q_plus", "q_zero"];
        let mut err = 0.0f64;
        for a in names {
            for bn in names {
                let expansion = compose_expansion(&symbol_of(a, 6, &grid4)?, &symbol_of(bn, 6, &grid4)?, 3, taylor)?;
                let oracle = extract_symbol(operator_from_spec(&format!("{a}*{bn}"))?.as_ref(), 4, Arc::clone(&grid4))?;
                err = err.max(symbol_diff(&oracle, &expansion)?);
            }
        }
        Ok(err)
    });
    s.within("quantize.adjoint_expansion", 1e-9, || {
        let taylor = &TaylorBasis::new(2, &grid4)?;
        let mut err = 0.0f64;
        for (name, image) in [("partial_plus", "partial_minus"), ("partial_minus", "partial_plus"), ("laplacian", "laplacian"), ("partial_zero", "partial_zero")] {
            let adj = adjoint_expansion(&builtin(name, 6)?, 3, taylor)?;
            err = err.max(symbol_diff(&adj, &builtin(image, 6)?)?);
        }
        let op = operator_from_spec("q_plus*partial_zero")?;
        let sigma = extract_symbol(op.as_ref(), 6, Arc::clone(&grid4))?;
        let expansion = adjoint_expansion(&sigma, 3, taylor)?;
        let oracle = extract_symbol(&AdjointOperator(op), 4, Arc::clone(&grid4))?;
        Ok(err.max(symbol_diff(&oracle, &expansion)?))
    });
    s.within("quantize.adjoint_inner_products", 1e-9, || {
        let mut rng = Rng::seeded(9);
        let band = b.min(6);
        let grid = shared_grid(2 * band);
        let f = BandLimitedFunction::from_coeffs(rng.coefficient_stack(band))?;
        let g = BandLimitedFunction::from_coeffs(rng.coefficient_stack(band))?;
        let inner = |u: &BandLimitedFunction, v: &BandLimitedFunction| -> su2q::Result<Complex> {
            let w: Vec<Complex> = synthesize(u, &grid).iter().zip(synthesize(v, &grid)).map(|(x, y)| x * y.conj()).collect();
            grid.integrate(&w)
        };
        let mut err = 0.0f64;
        for (a, a_star) in [
            (InvariantField::PartialPlus, InvariantField::PartialMinus),
            (InvariantField::Laplacian, InvariantField::Laplacian),
        ] {
            let lhs = inner(&apply_field(a, &f), &g)?;
            let rhs = inner(&f, &apply_field(a_star, &g))?;
            err = err.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
        Ok(err)
    });
    s.within("quantize.multiplier_norm_equality", 1e-8, || {
        let band = b.min(6);
        let a = Symbol::random_invariant(&mut Rng::seeded(10), band);
        let sup = (0..=band).map(|t| op_norm(a.block(0, t))).fold(0.0, f64::max);
        Ok((empirical_op_norm(&SymbolOperator(a), band)? - sup).abs() / sup)
    });
    s.holds("quantize.sobolev_certificates", || {
        let band = 2 * b;
        let lap = l2_bound_estimate(&sobolev_reweight(&builtin("laplacian", band)?, 2.0))?;
        let dp = l2_bound_estimate(&sobolev_reweight(&builtin("partial_plus", band)?, 1.0))?;
        let raw = l2_bound_estimate(&builtin("partial_plus", band)?)?;
        Ok(lap.certifiable && lap.certificate <= 1.0 && dp.certifiable && dp.certificate <= 1.0 && !raw.certifiable)
    });
}

fn builtin_order(name: &str) -> f64 {
    match name {
        "identity" => 0.0,
        "laplacian" => 2.0,
        _ => 1.0,
    }
}

fn decaying(n: usize, r: f64, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let z = rng.complex();
        z / z.norm() * rng.uniform(0.0, 1.0) * bracket(i as f64 - j as f64).powf(-r)
    })
}

fn diagnostics_checks(s: &mut Suite, b: u32) {
    let band = 2 * b;
    s.holds("diagnostics.builtins_in_class", || {
        let u = default_u_samples();
        for name in BUILTIN_NAMES {
            if !class_report(&builtin(name, band)?, builtin_order(name), 2, 0, 3, &u)?.all_pass() {
                return Ok(false);
            }
        }
        Ok(true)
    });
    s.holds("diagnostics.random_pushforwards_in_class", || {
        let mut rng = Rng::seeded(11);
        let u: Vec<GroupElement> = (0..20).map(|_| rng.group_element()).collect();
        for name in BUILTIN_NAMES {
            if !class_report(&builtin(name, band)?, builtin_order(name), 2, 0, 3, &u)?.all_pass() {
                return Ok(false);
            }
        }
        Ok(true)
    });
    s.holds("diagnostics.operator_norm_inequalities", || {
        for name in BUILTIN_NAMES {
            if !sigma0_inequalities(&builtin(name, band)?, builtin_order(name), 2, 0)?.all_pass() {
                return Ok(false);
            }
        }
        Ok(true)
    });
    s.holds("diagnostics.all_ones_fails_decay", || {
        let ones = Symbol::invariant(
            (0..=band).map(|t| CMatrix::from_element(t as usize + 1, t as usize + 1, c(1.0))).collect(),
        )?;
        let report = class_report(&ones, 0.0, 0, 0, 2, &[GroupElement::IDENTITY])?;
        Ok(report.checks.iter().any(|c| c.n == 2 && !c.pass))
    });
    s.holds("diagnostics.matrix_norm_inequalities", || {
        let mut rng = Rng::seeded(12);
        for k in 0..100 {
            let n = 1 + k % 40;
            let m = if k % 2 == 0 { rng.matrix(n, n) } else { decaying(n, 3.0, &mut rng) };
            let cert = (k % 2 == 1).then_some(DecayCertificate { c: 1.0, r: 3.0 });
            let r = opnorm_vs_linf(&m, cert);
            if !r.holds || (cert.is_some() && r.schur_bound.is_none()) {
                return Ok(false);
            }
        }
        Ok(true)
    });
    s.holds("diagnostics.decay_certificates_multiply", || {
        let mut rng = Rng::seeded(13);
        let cert = DecayCertificate { c: 1.0, r: 4.0 };
        let (a, bm) = (decaying(41, 4.0, &mut rng), decaying(41, 4.0, &mut rng));
        let product = banded_product_decay(&a, cert, &bm, cert);
        let peetre = product.certificate.map_or(0.0, |p| p.c);
        let id = banded_product_decay(&identity(41), cert, &a, cert);
        Ok(product.verified
            && fitted_constant(&(&a * &bm), 3.0) <= peetre
            && id.verified
            && cert.holds_for(&a.adjoint())
            && max_abs(&a) <= 1.0)
    });
}
