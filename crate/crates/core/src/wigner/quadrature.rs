//! Gauss-Hermite rule for integrals of the form `int f(x) exp(-x^2) dx`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes and weights of the `n`-point rule, by Newton iteration on the
    /// orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Gauss-Hermite rule needs at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, pp) = orthonormal_with_derivative(n, z);
                deriv = pp;
                let dz = p / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, pp) = orthonormal_with_derivative(n, z);
            if pp.is_finite() {
                deriv = pp;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (deriv * deriv);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[half - 1] = 0.0;
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        Ok(GaussHermite { nodes, weights })
    }

    /// Shared rule for `n` nodes; each table is computed once per process.
    pub fn cached(n: usize) -> Result<Arc<GaussHermite>> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.read().expect("quadrature cache poisoned").get(&n) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(GaussHermite::new(n)?);
        let mut guard = cache.write().expect("quadrature cache poisoned");
        Ok(Arc::clone(guard.entry(n).or_insert(rule)))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `int f(x) exp(-x^2) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Orthonormal Hermite function value `p_n(z)` (without the Gaussian) and its
/// derivative.
fn orthonormal_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_moment(k: u32) -> f64 {
        // int x^k e^{-x^2} dx = Gamma((k+1)/2) for even k
        if k % 2 == 1 {
            return 0.0;
        }
        let mut v = PI.sqrt();
        let mut j = 1;
        while j < k {
            v *= j as f64 / 2.0;
            j += 2;
        }
        v
    }

    #[test]
    fn one_node() {
        let q = GaussHermite::new(1).unwrap();
        assert_eq!(q.nodes(), &[0.0]);
        assert!((q.weights()[0] - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        for n in [2usize, 3, 5, 8, 13, 20, 40] {
            let q = GaussHermite::new(n).unwrap();
            for k in 0..(2 * n as u32) {
                let got = q.integrate(|x| x.powi(k as i32));
                let want = gaussian_moment(k);
                // rounding scales with int |x|^k e^{-x^2}
                let scale = gaussian_moment(k + k % 2).max(1.0);
                assert!(
                    (got - want).abs() <= 1e-13 * scale,
                    "n={n} k={k} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn known_two_point_rule() {
        let q = GaussHermite::new(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((q.nodes()[0] + r).abs() < 1e-15);
        assert!((q.nodes()[1] - r).abs() < 1e-15);
        assert!((q.weights()[0] - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn large_rule_sums_to_sqrt_pi() {
        let q = GaussHermite::new(150).unwrap();
        let total: f64 = q.weights().iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-13);
        assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussHermite::new(0).is_err());
    }

    #[test]
    fn cache_returns_same_table() {
        let a = GaussHermite::cached(11).unwrap();
        let b = GaussHermite::cached(11).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
