//! Irreducible unitary representations t^l of SU(2).
//!
//! Matrix elements follow the explicit finite sum over powers of the entries
//! (a, b, c, d) of the 2×2 matrix view. Row `i` of a block is the label
//! m = i − l, column `j` is n = j − l.

use std::sync::OnceLock;

use crate::group::GroupElement;
use crate::halfint::HalfInt;
use crate::linalg::{dim, CMatrix, Complex};

/// Direct factorial ratios are used up to this doubled index; beyond it the
/// coefficients are assembled in log space.
const DIRECT_FACTORIAL_LIMIT: u32 = 60;
const TABLE_LEN: usize = 171;

fn factorials() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; TABLE_LEN];
        for k in 1..TABLE_LEN {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

fn ln_factorial(k: usize) -> f64 {
    if k < TABLE_LEN {
        factorials()[k].ln()
    } else {
        factorials()[TABLE_LEN - 1].ln() + (TABLE_LEN..=k).map(|j| (j as f64).ln()).sum::<f64>()
    }
}

fn binomial(n: usize, k: usize, direct: bool) -> f64 {
    if direct {
        let f = factorials();
        f[n] / (f[k] * f[n - k])
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
    }
}

/// t^l(g) as a (2l+1)×(2l+1) matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ReprMatrix {
    pub two_l: u32,
    pub entries: CMatrix,
}

impl ReprMatrix {
    pub fn entry(&self, m: HalfInt, n: HalfInt) -> Option<Complex> {
        Some(self.entries[(m.index_in(self.two_l)?, n.index_in(self.two_l)?)])
    }
}

pub fn wigner(g: &GroupElement, two_l: u32) -> ReprMatrix {
    let [a, b, c, d] = g.abcd();
    ReprMatrix { two_l, entries: wigner_from_abcd(a, b, c, d, two_l) }
}

/// All blocks t^l(g) for two_l = 0..=two_l_max.
pub fn wigner_all(g: &GroupElement, two_l_max: u32) -> Vec<CMatrix> {
    let [a, b, c, d] = g.abcd();
    (0..=two_l_max).map(|t| wigner_from_abcd(a, b, c, d, t)).collect()
}

fn powers(z: Complex, n: usize) -> Vec<Complex> {
    let mut p = Vec::with_capacity(n + 1);
    let mut acc = Complex::new(1.0, 0.0);
    p.push(acc);
    for _ in 0..n {
        acc *= z;
        p.push(acc);
    }
    p
}

fn wigner_from_abcd(a: Complex, b: Complex, c: Complex, d: Complex, two_l: u32) -> CMatrix {
    let size = dim(two_l);
    let l2 = two_l as usize;
    let (pa, pb, pc, pd) = (powers(a, l2), powers(b, l2), powers(c, l2), powers(d, l2));
    let direct = two_l <= DIRECT_FACTORIAL_LIMIT;
    CMatrix::from_fn(size, size, |r, col| {
        // l − m = two_l − r, l + m = r, l − n = two_l − col, l + n = col
        let (lmm, lpm, lmn, lpn) = (l2 - r, r, l2 - col, col);
        // sqrt((l−n)!(l+n)!/((l−m)!(l+m)!)) times two binomials
        let ratio = (0.5 * (ln_factorial(lmn) + ln_factorial(lpn) - ln_factorial(lmm) - ln_factorial(lpm))).exp();
        let lo = l2.saturating_sub(r + col);
        let hi = lmn.min(lmm);
        let mut sum = Complex::new(0.0, 0.0);
        for i in lo..=hi {
            let e4 = r + col + i - l2;
            let coeff = binomial(lmm, i, direct) * binomial(lpm, lmn - i, direct);
            sum += pa[i] * pb[lmm - i] * pc[lmn - i] * pd[e4] * coeff;
        }
        sum * ratio
    })
}

/// χ_l(g) = Tr t^l(g).
pub fn character(g: &GroupElement, two_l: u32) -> Complex {
    wigner(g, two_l).entries.trace()
}

/// Entries of t^{1/2}, named by the signs of (m, n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfEntry {
    MinusMinus,
    MinusPlus,
    PlusMinus,
    PlusPlus,
}

impl HalfEntry {
    pub const ALL: [HalfEntry; 4] =
        [HalfEntry::MinusMinus, HalfEntry::MinusPlus, HalfEntry::PlusMinus, HalfEntry::PlusPlus];

    /// (row, column) inside the 2×2 block.
    pub fn index(self) -> (usize, usize) {
        match self {
            HalfEntry::MinusMinus => (0, 0),
            HalfEntry::MinusPlus => (0, 1),
            HalfEntry::PlusMinus => (1, 0),
            HalfEntry::PlusPlus => (1, 1),
        }
    }

    fn shifts(self) -> (i32, i32) {
        match self {
            HalfEntry::MinusMinus => (-1, -1),
            HalfEntry::MinusPlus => (-1, 1),
            HalfEntry::PlusMinus => (1, -1),
            HalfEntry::PlusPlus => (1, 1),
        }
    }
}

/// One term `coeff · t^{l'}_{m'n'}` of a product expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductTerm {
    pub coeff: f64,
    pub two_l: i32,
    pub m: HalfInt,
    pub n: HalfInt,
}

/// Expansion of t^l_{mn}·t_{±±} into t^{l+1/2} and t^{l−1/2} terms.
pub fn half_product_terms(which: HalfEntry, two_l: u32, m: HalfInt, n: HalfInt) -> [ProductTerm; 2] {
    let l = f64::from(two_l) / 2.0;
    let (mf, nf) = (m.as_f64(), n.as_f64());
    let (sm, sn) = which.shifts();
    let m2 = m + HalfInt::from_twice(sm);
    let n2 = n + HalfInt::from_twice(sn);
    let d = 2.0 * l + 1.0;
    let root = |x: f64| x.max(0.0).sqrt();
    // upper leg: (l ∓ m + 1)(l ∓ n + 1) with signs following the shifts
    let up = root((l + f64::from(sm) * mf + 1.0) * (l + f64::from(sn) * nf + 1.0)) / d;
    let down = root((l - f64::from(sm) * mf) * (l - f64::from(sn) * nf)) / d;
    let sign = if sm == sn { 1.0 } else { -1.0 };
    [
        ProductTerm { coeff: up, two_l: two_l as i32 + 1, m: m2, n: n2 },
        ProductTerm { coeff: sign * down, two_l: two_l as i32 - 1, m: m2, n: n2 },
    ]
}

/// Precomputed t^l(x) at every node of a grid, two_l ≤ `two_l_max`.
#[derive(Clone, Debug)]
pub struct WignerTable {
    pub two_l_max: u32,
    values: Vec<Vec<CMatrix>>,
}

impl WignerTable {
    pub fn build(nodes: &[GroupElement], two_l_max: u32) -> Self {
        use rayon::prelude::*;
        let values = nodes.par_iter().map(|g| wigner_all(g, two_l_max)).collect();
        WignerTable { two_l_max, values }
    }

    /// t^l(x_node).
    pub fn at(&self, node: usize, two_l: u32) -> &CMatrix {
        &self.values[node][two_l as usize]
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Axis;
    use crate::linalg::{hs_norm, identity, max_abs_diff};
    use crate::random::Rng;

    #[test]
    fn trivial_representation() {
        let mut rng = Rng::seeded(10);
        let g = rng.group_element();
        let t = wigner(&g, 0);
        assert_eq!(t.entries.shape(), (1, 1));
        assert!((t.entries[(0, 0)] - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spin_half_is_the_matrix_view() {
        let mut rng = Rng::seeded(11);
        for _ in 0..100 {
            let g = rng.group_element();
            let t = wigner(&g, 1).entries;
            let m = g.to_matrix();
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                assert!((t[(i, j)] - m[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn spin_one_symbolic_expansion() {
        // hand expansion of the finite sum at l = 1
        let mut rng = Rng::seeded(12);
        let g = rng.group_element();
        let [a, b, c, d] = g.abcd();
        let s2 = 2f64.sqrt();
        #[rustfmt::skip]
        let expected = CMatrix::from_row_slice(3, 3, &[
            a * a,           a * b * s2,      b * b,
            a * c * s2,      a * d + b * c,   b * d * s2,
            c * c,           c * d * s2,      d * d,
        ]);
        assert!(max_abs_diff(&wigner(&g, 2).entries, &expected) < 1e-14);
    }

    #[test]
    fn identity_maps_to_identity() {
        for two_l in 0..=16 {
            let t = wigner(&GroupElement::IDENTITY, two_l).entries;
            assert!(max_abs_diff(&t, &identity(dim(two_l))) < 1e-15);
        }
    }

    #[test]
    fn unitary_and_homomorphic() {
        let mut rng = Rng::seeded(13);
        for _ in 0..20 {
            let (g, h) = (rng.group_element(), rng.group_element());
            for two_l in 0..=16 {
                let tg = wigner(&g, two_l).entries;
                let th = wigner(&h, two_l).entries;
                let tgh = wigner(&(g * h), two_l).entries;
                let n = dim(two_l);
                assert!(max_abs_diff(&(tg.adjoint() * &tg), &identity(n)) < 1e-11);
                assert!(hs_norm(&(tgh - &tg * &th)) <= 1e-10 * n as f64);
            }
        }
    }

    #[test]
    fn log_space_branch_is_unitary() {
        let mut rng = Rng::seeded(14);
        let g = rng.group_element();
        let t = wigner(&g, 64).entries;
        // the alternating sum loses digits to cancellation at this size
        assert!(max_abs_diff(&(t.adjoint() * &t), &identity(65)) < 1e-6);
    }

    #[test]
    fn neutral_subgroup_is_diagonal() {
        // t^l(ω₃(t)) = diag(e^{−int}), consistent with ∂₀ t^l_{mn} = n t^l_{mn}
        let t = 0.7;
        let g = GroupElement::omega(Axis::Three, t);
        for two_l in 0..=6u32 {
            let w = wigner(&g, two_l).entries;
            for (i, n) in HalfInt::labels(two_l).enumerate() {
                for j in 0..dim(two_l) {
                    let expected = if i == j {
                        Complex::from_polar(1.0, -n.as_f64() * t)
                    } else {
                        Complex::new(0.0, 0.0)
                    };
                    assert!((w[(i, j)] - expected).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn characters() {
        let mut rng = Rng::seeded(15);
        for two_l in 0..6 {
            let chi = character(&GroupElement::IDENTITY, two_l);
            assert!((chi - Complex::new(f64::from(two_l) + 1.0, 0.0)).norm() < 1e-14);
        }
        let t = 1.3;
        let chi = character(&GroupElement::omega(Axis::Three, t), 2);
        assert!((chi - Complex::new(1.0 + 2.0 * t.cos(), 0.0)).norm() < 1e-14);
        for _ in 0..20 {
            let (g, h) = (rng.group_element(), rng.group_element());
            let conj = h * g * h.inverse();
            assert!((character(&conj, 2) - character(&g, 2)).norm() < 1e-11);
        }
    }

    #[test]
    fn multiplication_formulas() {
        let mut rng = Rng::seeded(16);
        for _ in 0..10 {
            let g = rng.group_element();
            let blocks = wigner_all(&g, 11);
            let lookup = |two_l: i32, m: HalfInt, n: HalfInt| -> Complex {
                if two_l < 0 {
                    return Complex::new(0.0, 0.0);
                }
                let t = two_l as u32;
                match (m.index_in(t), n.index_in(t)) {
                    (Some(i), Some(j)) => blocks[t as usize][(i, j)],
                    _ => Complex::new(0.0, 0.0),
                }
            };
            for two_l in 0..=10u32 {
                for m in HalfInt::labels(two_l) {
                    for n in HalfInt::labels(two_l) {
                        for which in HalfEntry::ALL {
                            let (hi, hj) = which.index();
                            let lhs = lookup(two_l as i32, m, n) * blocks[1][(hi, hj)];
                            let rhs: Complex = half_product_terms(which, two_l, m, n)
                                .iter()
                                .map(|t| lookup(t.two_l, t.m, t.n) * t.coeff)
                                .sum();
                            assert!((lhs - rhs).norm() < 1e-10, "{which:?} l={two_l}/2");
                        }
                    }
                }
            }
        }
    }
}
