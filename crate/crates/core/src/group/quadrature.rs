use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::GroupElement;
use crate::error::{Error, Result};
use crate::linalg::Complex;
use crate::repr::WignerTable;

/// Product quadrature for Haar measure in Euler coordinates
/// u = ω₃(φ)·ω₂(θ)·ω₃(ψ), dμ = sin θ dφ dθ dψ / 16π².
///
/// φ is uniform on [0, 2π), ψ uniform on [0, 4π) and cos θ is Gauss–Legendre.
/// Every matrix entry of t^l with 2l ≤ `exactness_two_l` integrates exactly.
pub struct QuadratureGrid {
    exactness_two_l: u32,
    nodes: Vec<GroupElement>,
    weights: Vec<f64>,
    wigner_cache: Mutex<Option<Arc<WignerTable>>>,
}

/// JSON form `{two_l_max, nodes: [[x0,x1,x2,x3], ...], weights: [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridFile {
    pub two_l_max: u32,
    pub nodes: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

pub fn quadrature_grid(two_l_max: u32) -> QuadratureGrid {
    let n_phi = (two_l_max / 2 + 1) as usize;
    let n_psi = (two_l_max + 1) as usize;
    // degree 2n−1 in cos θ must reach two_l_max / 2
    let n_theta = ((two_l_max / 4 + 1) as usize).max(2);
    let gl = GaussLegendre::new(n_theta).expect("at least two Gauss-Legendre nodes");
    let theta_rule: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();

    let mut nodes = Vec::with_capacity(n_phi * n_theta * n_psi);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for i in 0..n_phi {
        let phi = 2.0 * PI * i as f64 / n_phi as f64;
        for &(x, w) in &theta_rule {
            let theta = x.clamp(-1.0, 1.0).acos();
            for k in 0..n_psi {
                let psi = 4.0 * PI * k as f64 / n_psi as f64;
                nodes.push(GroupElement::from_euler(phi, theta, psi));
                weights.push(w / 2.0 / n_phi as f64 / n_psi as f64);
            }
        }
    }
    QuadratureGrid::from_parts(two_l_max, nodes, weights)
}

/// The canonical grid of a given exactness, built once per process.
pub fn shared_grid(two_l_max: u32) -> Arc<QuadratureGrid> {
    static GRIDS: OnceLock<Mutex<HashMap<u32, Arc<QuadratureGrid>>>> = OnceLock::new();
    let mut grids = GRIDS.get_or_init(Default::default).lock().expect("grid cache poisoned");
    Arc::clone(grids.entry(two_l_max).or_insert_with(|| Arc::new(quadrature_grid(two_l_max))))
}

impl QuadratureGrid {
    fn from_parts(exactness_two_l: u32, nodes: Vec<GroupElement>, weights: Vec<f64>) -> Self {
        QuadratureGrid { exactness_two_l, nodes, weights, wigner_cache: Mutex::new(None) }
    }

    pub fn exactness_two_l(&self) -> u32 {
        self.exactness_two_l
    }

    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn require_exactness(&self, required: u32) -> Result<()> {
        if self.exactness_two_l < required {
            return Err(Error::InsufficientExactness { required, available: self.exactness_two_l });
        }
        Ok(())
    }

    /// t^l at every node for two_l ≤ `two_l_max`, computed once and shared.
    pub fn wigner_table(&self, two_l_max: u32) -> Arc<WignerTable> {
        let mut cache = self.wigner_cache.lock().expect("wigner cache poisoned");
        if let Some(table) = cache.as_ref() {
            if table.two_l_max >= two_l_max {
                return Arc::clone(table);
            }
        }
        let table = Arc::new(WignerTable::build(&self.nodes, two_l_max));
        *cache = Some(Arc::clone(&table));
        table
    }

    pub fn integrate(&self, values: &[Complex]) -> Result<Complex> {
        haar_integrate(values, self)
    }

    pub fn to_file(&self) -> GridFile {
        GridFile {
            two_l_max: self.exactness_two_l,
            nodes: self.nodes.iter().map(|g| g.quaternion()).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Accepts a grid from its JSON form; `two_l_max` is trusted as the
    /// declared exactness.
    pub fn from_file(file: GridFile) -> Result<Self> {
        if file.nodes.len() != file.weights.len() {
            return Err(Error::LengthMismatch { expected: file.nodes.len(), actual: file.weights.len() });
        }
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for q in &file.nodes {
            let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("grid node {q:?} is not a unit quaternion")));
            }
            nodes.push(GroupElement::try_from(*q)?);
        }
        if file.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Invalid("grid weights must be positive".into()));
        }
        let total: f64 = file.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("grid weights sum to {total}, not 1")));
        }
        Ok(QuadratureGrid::from_parts(file.two_l_max, nodes, file.weights))
    }
}

impl Clone for QuadratureGrid {
    fn clone(&self) -> Self {
        let cached = self.wigner_cache.lock().map(|c| c.clone()).unwrap_or(None);
        QuadratureGrid {
            exactness_two_l: self.exactness_two_l,
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            wigner_cache: Mutex::new(cached),
        }
    }
}

impl fmt::Debug for QuadratureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureGrid")
            .field("exactness_two_l", &self.exactness_two_l)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl PartialEq for QuadratureGrid {
    fn eq(&self, other: &Self) -> bool {
        self.exactness_two_l == other.exactness_two_l
            && self.nodes == other.nodes
            && self.weights == other.weights
    }
}

/// Weighted sum of node values, in node order.
pub fn haar_integrate(values: &[Complex], grid: &QuadratureGrid) -> Result<Complex> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
    }
    Ok(values.iter().zip(grid.weights()).map(|(v, w)| v * *w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dim;
    use crate::random::Rng;
    use crate::repr::{wigner, wigner_all};

    #[test]
    fn weights_form_probability_measure() {
        for e in [0, 1, 2, 5, 8, 16] {
            let g = quadrature_grid(e);
            let total: f64 = g.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(g.weights().iter().all(|w| *w > 0.0));
            let ones = vec![Complex::new(1.0, 0.0); g.len()];
            assert!((g.integrate(&ones).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_sizes_are_polynomial() {
        assert_eq!(quadrature_grid(16).len(), 9 * 5 * 17);
        assert_eq!(quadrature_grid(32).len(), 17 * 9 * 33);
    }

    #[test]
    fn exact_for_matrix_elements() {
        for e in [1u32, 2, 3, 4, 7, 10, 16] {
            let grid = quadrature_grid(e);
            for two_l in 1..=e {
                let mut acc = crate::linalg::zeros(dim(two_l));
                for (g, w) in grid.nodes().iter().zip(grid.weights()) {
                    acc += wigner(g, two_l).entries * Complex::new(*w, 0.0);
                }
                assert!(crate::linalg::max_abs(&acc) < 1e-10, "E={e} two_l={two_l}");
            }
        }
    }

    #[test]
    fn spin_one_zero_zero_integrates_to_zero() {
        let grid = quadrature_grid(2);
        let vals: Vec<Complex> = grid.nodes().iter().map(|g| wigner(g, 2).entries[(1, 1)]).collect();
        assert!(haar_integrate(&vals, &grid).unwrap().norm() < 1e-12);
    }

    #[test]
    fn peter_weyl_normalization() {
        let grid = quadrature_grid(2);
        let vals: Vec<Complex> =
            grid.nodes().iter().map(|g| Complex::new(wigner(g, 1).entries[(0, 0)].norm_sqr(), 0.0)).collect();
        assert!((haar_integrate(&vals, &grid).unwrap().re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn left_and_right_invariance() {
        let grid = quadrature_grid(8);
        let mut rng = Rng::seeded(20);
        let coeffs = rng.coefficient_stack(4);
        let f = |x: &GroupElement| -> Complex {
            wigner_all(x, 4)
                .iter()
                .zip(&coeffs)
                .enumerate()
                .map(|(t, (w, c))| (w * c).trace() * (t as f64 + 1.0))
                .sum()
        };
        let base: Vec<Complex> = grid.nodes().iter().map(f).collect();
        let reference = grid.integrate(&base).unwrap();
        for _ in 0..5 {
            let g = rng.group_element();
            let left: Vec<Complex> = grid.nodes().iter().map(|x| f(&(g * *x))).collect();
            let right: Vec<Complex> = grid.nodes().iter().map(|x| f(&(*x * g))).collect();
            assert!((grid.integrate(&left).unwrap() - reference).norm() < 1e-10);
            assert!((grid.integrate(&right).unwrap() - reference).norm() < 1e-10);
        }
    }

    #[test]
    fn length_mismatch() {
        let grid = quadrature_grid(2);
        assert!(matches!(
            haar_integrate(&[Complex::new(1.0, 0.0)], &grid),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let grid = quadrature_grid(4);
        let json = serde_json::to_string(&grid.to_file()).unwrap();
        let back = QuadratureGrid::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.exactness_two_l(), 4);
        assert_eq!(back.len(), grid.len());
        for (a, b) in back.nodes().iter().zip(grid.nodes()) {
            assert!(a.distance(b) < 1e-15);
        }
        let mut bad = grid.to_file();
        bad.weights[0] = -1.0;
        assert!(QuadratureGrid::from_file(bad).is_err());
    }
}
