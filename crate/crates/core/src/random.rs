//! Seeded random inputs for property checks and the `verify` suite.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::group::GroupElement;
use crate::linalg::{dim, CMatrix, Complex};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn complex(&mut self) -> Complex {
        Complex::new(self.normal(), self.normal())
    }

    /// Haar-distributed element (normalized Gaussian quaternion).
    pub fn group_element(&mut self) -> GroupElement {
        loop {
            let q = [self.normal(), self.normal(), self.normal(), self.normal()];
            if let Ok(g) = GroupElement::from_quaternion(q[0], q[1], q[2], q[3]) {
                return g;
            }
        }
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex())
    }

    /// Coefficient blocks for l = 0, 1/2, …, two_l_max/2.
    pub fn coefficient_stack(&mut self, two_l_max: u32) -> Vec<CMatrix> {
        (0..=two_l_max).map(|t| self.matrix(dim(t), dim(t))).collect()
    }
}
