use std::fmt;
use std::ops::Mul;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Complex;

const MIN_NORM: f64 = 1e-8;

/// A point of SU(2), stored as a unit quaternion (x0, x1, x2, x3).
///
/// The matrix view is
/// `[[x0 + i·x3, x1 + i·x2], [−x1 + i·x2, x0 − i·x3]]`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct GroupElement {
    q: [f64; 4],
}

/// Coordinate axis of the one-parameter subgroups ω₁, ω₂, ω₃.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    One,
    Two,
    Three,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { q: [1.0, 0.0, 0.0, 0.0] };

    pub fn from_quaternion(x0: f64, x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let norm = (x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        if !norm.is_finite() || norm <= MIN_NORM {
            return Err(Error::DegenerateQuaternion { norm });
        }
        Ok(GroupElement { q: [x0 / norm, x1 / norm, x2 / norm, x3 / norm] })
    }

    /// Builds an element from the pair (α, β) of `[[α, β], [−β̄, ᾱ]]`.
    fn from_pair(alpha: Complex, beta: Complex) -> Self {
        let q = [alpha.re, beta.re, beta.im, alpha.im];
        // renormalize so long products do not drift off the sphere
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        GroupElement { q: q.map(|v| v / n) }
    }

    fn pair(&self) -> (Complex, Complex) {
        let [x0, x1, x2, x3] = self.q;
        (Complex::new(x0, x3), Complex::new(x1, x2))
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn to_matrix(&self) -> Matrix2<Complex> {
        let (a, b) = self.pair();
        Matrix2::new(a, b, -b.conj(), a.conj())
    }

    /// Entries (a, b, c, d) of the matrix view `[[a, b], [c, d]]`.
    pub fn abcd(&self) -> [Complex; 4] {
        let (a, b) = self.pair();
        [a, b, -b.conj(), a.conj()]
    }

    pub fn multiply(&self, other: &GroupElement) -> GroupElement {
        let (a, b) = self.pair();
        let (c, d) = other.pair();
        GroupElement::from_pair(a * c - b * d.conj(), a * d + b * c.conj())
    }

    pub fn inverse(&self) -> GroupElement {
        let [x0, x1, x2, x3] = self.q;
        GroupElement { q: [x0, -x1, -x2, -x3] }
    }

    /// One-parameter subgroup ω_j(t).
    pub fn omega(axis: Axis, t: f64) -> GroupElement {
        let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
        let q = match axis {
            // [[cos, i sin], [i sin, cos]]
            Axis::One => [c, 0.0, s, 0.0],
            // [[cos, −sin], [sin, cos]]
            Axis::Two => [c, -s, 0.0, 0.0],
            // diag(e^{it/2}, e^{−it/2})
            Axis::Three => [c, 0.0, 0.0, s],
        };
        GroupElement { q }
    }

    /// Weyl element w_j = ω_j(π/2).
    pub fn weyl(axis: Axis) -> GroupElement {
        Self::omega(axis, std::f64::consts::FRAC_PI_2)
    }

    /// u = ω₃(φ)·ω₂(θ)·ω₃(ψ).
    pub fn from_euler(phi: f64, theta: f64, psi: f64) -> GroupElement {
        Self::omega(Axis::Three, phi)
            .multiply(&Self::omega(Axis::Two, theta))
            .multiply(&Self::omega(Axis::Three, psi))
    }

    /// Euclidean distance between quaternion coordinates.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        self.q.iter().zip(other.q.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        self.multiply(&rhs)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement{:?}", self.q)
    }
}

impl From<GroupElement> for [f64; 4] {
    fn from(g: GroupElement) -> [f64; 4] {
        g.q
    }
}

impl TryFrom<[f64; 4]> for GroupElement {
    type Error = Error;
    fn try_from(q: [f64; 4]) -> Result<Self> {
        GroupElement::from_quaternion(q[0], q[1], q[2], q[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;

    fn mat_close(a: &Matrix2<Complex>, b: &Matrix2<Complex>, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn identity_quaternion() {
        let e = GroupElement::from_quaternion(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(e, GroupElement::IDENTITY);
        assert!(mat_close(&e.to_matrix(), &Matrix2::identity(), 0.0));
    }

    #[test]
    fn k_is_omega3_pi() {
        let g = GroupElement::from_quaternion(0.0, 0.0, 0.0, 1.0).unwrap();
        let expected = Matrix2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        assert!(mat_close(&g.to_matrix(), &expected, 1e-15));
        let w = GroupElement::omega(Axis::Three, std::f64::consts::PI);
        assert!(mat_close(&w.to_matrix(), &expected, 1e-15));
    }

    #[test]
    fn normalization() {
        let g = GroupElement::from_quaternion(2.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(g.quaternion(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_zero() {
        assert!(matches!(
            GroupElement::from_quaternion(0.0, 1e-9, 0.0, 0.0),
            Err(Error::DegenerateQuaternion { .. })
        ));
        assert!(GroupElement::from_quaternion(f64::NAN, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn inverse_of_i() {
        let g = GroupElement::from_quaternion(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(g.inverse().quaternion(), [0.0, -1.0, -0.0, -0.0]);
    }

    #[test]
    fn matrix_view_is_special_unitary() {
        let mut rng = Rng::seeded(1);
        for _ in 0..50 {
            let g = rng.group_element();
            let m = g.to_matrix();
            assert!(mat_close(&(m.adjoint() * m), &Matrix2::identity(), 1e-12));
            assert!((m.determinant() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_matches_matrices() {
        let mut rng = Rng::seeded(2);
        for _ in 0..50 {
            let (g, h) = (rng.group_element(), rng.group_element());
            assert!(mat_close(&(g * h).to_matrix(), &(g.to_matrix() * h.to_matrix()), 1e-12));
            assert!((g * g.inverse()).distance(&GroupElement::IDENTITY) < 1e-12);
            assert!((GroupElement::IDENTITY * g).distance(&g) < 1e-15);
        }
    }

    #[test]
    fn associativity() {
        let mut rng = Rng::seeded(3);
        for _ in 0..100 {
            let (a, b, d) = (rng.group_element(), rng.group_element(), rng.group_element());
            assert!(((a * b) * d).distance(&(a * (b * d))) < 1e-12);
        }
    }

    #[test]
    fn omega_matrices() {
        let t = 0.83_f64;
        let (ch, sh) = ((t / 2.0).cos(), (t / 2.0).sin());
        let w1 = Matrix2::new(c(ch, 0.0), c(0.0, sh), c(0.0, sh), c(ch, 0.0));
        let w2 = Matrix2::new(c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0));
        let w3 = Matrix2::new(c(ch, sh), c(0.0, 0.0), c(0.0, 0.0), c(ch, -sh));
        assert!(mat_close(&GroupElement::omega(Axis::One, t).to_matrix(), &w1, 1e-15));
        assert!(mat_close(&GroupElement::omega(Axis::Two, t).to_matrix(), &w2, 1e-15));
        assert!(mat_close(&GroupElement::omega(Axis::Three, t).to_matrix(), &w3, 1e-15));
    }

    #[test]
    fn euler_special_cases() {
        let t = 1.1;
        assert!(GroupElement::from_euler(0.0, 0.0, 0.0).distance(&GroupElement::IDENTITY) < 1e-15);
        assert!(
            GroupElement::from_euler(0.0, t, 0.0).distance(&GroupElement::omega(Axis::Two, t)) < 1e-15
        );
        assert!(
            GroupElement::from_euler(t, 0.0, 0.0).distance(&GroupElement::omega(Axis::Three, t))
                < 1e-15
        );
        let (p, th, s) = (0.3, 2.0, -4.0);
        let direct = GroupElement::omega(Axis::Three, p).to_matrix()
            * GroupElement::omega(Axis::Two, th).to_matrix()
            * GroupElement::omega(Axis::Three, s).to_matrix();
        assert!(mat_close(&GroupElement::from_euler(p, th, s).to_matrix(), &direct, 1e-12));
    }

    #[test]
    fn one_parameter_subgroups() {
        let mut rng = Rng::seeded(4);
        for _ in 0..20 {
            let (s, t) = (rng.uniform(-7.0, 7.0), rng.uniform(-7.0, 7.0));
            for axis in [Axis::One, Axis::Two, Axis::Three] {
                let lhs = GroupElement::omega(axis, s) * GroupElement::omega(axis, t);
                assert!(lhs.distance(&GroupElement::omega(axis, s + t)) < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_conjugations() {
        let mut rng = Rng::seeded(5);
        let cases = [
            (Axis::One, Axis::Two, Axis::Three),
            (Axis::Two, Axis::Three, Axis::One),
            (Axis::Three, Axis::One, Axis::Two),
        ];
        for _ in 0..20 {
            let t = rng.uniform(-6.0, 6.0);
            for (w, from, to) in cases {
                let w = GroupElement::weyl(w);
                let lhs = w * GroupElement::omega(from, t) * w.inverse();
                assert!(lhs.distance(&GroupElement::omega(to, t)) < 1e-12);
            }
        }
    }

    #[test]
    fn serde_as_array() {
        let g = GroupElement::omega(Axis::Two, 0.4);
        let s = serde_json::to_string(&g).unwrap();
        let back: GroupElement = serde_json::from_str(&s).unwrap();
        assert!(back.distance(&g) < 1e-15);
        assert!(serde_json::from_str::<GroupElement>("[0,0,0,0]").is_err());
    }
}
