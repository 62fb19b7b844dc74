//! Gauss rules on the reference triangle (collapsed tensor product) and on edges.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_TRIANGLE_DEGREE: usize = 10;
pub const MAX_EDGE_DEGREE: usize = 21;

/// Rule on the reference triangle; weights sum to its area 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T: Real> {
    /// Barycentric coordinates `(λ0, λ1, λ2)`; the reference point is `(λ1, λ2)`.
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub degree: usize,
}

/// Rule on the unit interval; weights sum to 1 so that `Σ w f(s)` is an edge mean.
#[derive(Debug, Clone)]
pub struct EdgeRule<T: Real> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
fn unit_interval_gauss(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Rule exact for polynomials of total degree `degree` on the reference triangle.
///
/// Built from the Duffy map `(s, t) -> (s, t (1 - s))`, whose Jacobian `1 - s` raises
/// the degree in `s` by one, then averaged over the six permutations of the
/// barycentric coordinates so that the rule does not depend on vertex order.
pub fn triangle_quadrature<T: Real>(degree: usize) -> Result<QuadratureRule<T>> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::UnsupportedQuadrature { degree, max: MAX_TRIANGLE_DEGREE });
    }
    let outer = unit_interval_gauss((degree + 2).div_ceil(2));
    let inner = unit_interval_gauss((degree + 1).div_ceil(2));
    const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];
    let n = 6 * outer.len() * inner.len();
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(s, ws) in &outer {
        for &(t, wt) in &inner {
            let x = s;
            let y = t * (1.0 - s);
            let lambda = [1.0 - x - y, x, y];
            for perm in PERMUTATIONS {
                points.push(perm.map(|k| T::lit(lambda[k])));
                weights.push(T::lit(ws * wt * (1.0 - s) / 6.0));
            }
        }
    }
    Ok(QuadratureRule { points, weights, degree })
}

/// Gauss rule exact to `degree` on an edge parametrized over `[0, 1]`.
pub fn edge_quadrature<T: Real>(degree: usize) -> Result<EdgeRule<T>> {
    if degree > MAX_EDGE_DEGREE {
        return Err(Error::UnsupportedQuadrature { degree, max: MAX_EDGE_DEGREE });
    }
    let (points, weights) = unit_interval_gauss(degree / 2 + 1)
        .into_iter()
        .map(|(s, w)| (T::lit(s), T::lit(w)))
        .unzip();
    Ok(EdgeRule { points, weights, degree })
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reference_points(&self) -> impl Iterator<Item = Point2<T>> + '_ {
        self.points.iter().map(|l| Point2::new(l[1], l[2]))
    }

    /// Integral over the reference triangle.
    pub fn integrate_reference<F: FnMut(Point2<T>) -> T>(&self, mut f: F) -> T {
        self.reference_points()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (p, &w)| acc + w * f(p))
    }
}

impl<T: Real> EdgeRule<T> {
    /// Mean of `f` over the segment `a -> b`.
    pub fn mean<F: FnMut(Point2<T>) -> T>(&self, a: &Point2<T>, b: &Point2<T>, mut f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&s, &w)| acc + w * f(a + (b - a) * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_ref x^a y^b = a! b! / (a + b + 2)!
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn weights_sum_to_half() {
        for d in 0..=MAX_TRIANGLE_DEGREE {
            let r = triangle_quadrature::<f64>(d).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 0.5).abs() < 4e-15, "degree {d}");
            for l in &r.points {
                assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-15);
                assert!(l.iter().all(|&c| c >= 0.0));
            }
        }
    }

    #[test]
    fn rule_is_invariant_under_vertex_relabelling() {
        let r = triangle_quadrature::<f64>(6).unwrap();
        let f = |l: &[f64; 3]| (3.0 * l[0]).exp() * (l[1] - 0.2 * l[2]).sin();
        let g = |l: &[f64; 3]| f(&[l[2], l[0], l[1]]);
        let h = |l: &[f64; 3]| f(&[l[1], l[0], l[2]]);
        let sum = |q: &dyn Fn(&[f64; 3]) -> f64| r.points.iter().zip(&r.weights).map(|(l, &w)| w * q(l)).sum::<f64>();
        assert!((sum(&f) - sum(&g)).abs() < 1e-15);
        assert!((sum(&f) - sum(&h)).abs() < 1e-15);
    }

    #[test]
    fn monomials_within_degree_are_exact() {
        for d in 0..=MAX_TRIANGLE_DEGREE {
            let r = triangle_quadrature::<f64>(d).unwrap();
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let got = r.integrate_reference(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    let exact = monomial_integral(a, b);
                    assert!(((got - exact) / exact).abs() < 1e-13, "deg {d}: x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn named_integrals() {
        let r = triangle_quadrature::<f64>(6).unwrap();
        assert!((r.integrate_reference(|_| 1.0) - 0.5).abs() < 1e-15);
        assert!((r.integrate_reference(|p| p.x * p.x * p.y * p.y) - 1.0 / 180.0).abs() < 1e-16);
        assert!((r.integrate_reference(|p| p.x.powi(5)) - 1.0 / 42.0).abs() < 1e-16);
    }

    #[test]
    fn unsupported_degrees() {
        assert!(matches!(triangle_quadrature::<f64>(11), Err(Error::UnsupportedQuadrature { degree: 11, .. })));
        assert!(edge_quadrature::<f64>(22).is_err());
    }

    #[test]
    fn edge_means() {
        let r = edge_quadrature::<f64>(7).unwrap();
        let (a, b) = (Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        assert!((r.mean(&a, &b, |_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.mean(&a, &b, |p| p.x) - 0.5).abs() < 1e-15);
        let exact = (1.0 - 5f64.cos()) / 5.0;
        assert!((exact - 0.143267).abs() < 1e-6);
        let high = edge_quadrature::<f64>(MAX_EDGE_DEGREE).unwrap();
        assert!((high.mean(&a, &b, |p| (5.0 * p.x).sin()) - exact).abs() < 1e-13);
        // four-point Gauss misses this mean by 1.12561e-4
        let gap = (r.mean(&a, &b, |p| (5.0 * p.x).sin()) - exact).abs();
        assert!((gap - 1.12561e-4).abs() < 1e-9);
    }

    #[test]
    fn edge_polynomials_exact() {
        for d in 0..=MAX_EDGE_DEGREE {
            let r = edge_quadrature::<f64>(d).unwrap();
            for k in 0..=d as i32 {
                let got: f64 = r.points.iter().zip(&r.weights).map(|(s, w)| w * s.powi(k)).sum();
                assert!((got - 1.0 / f64::from(k + 1)).abs() < 1e-14, "deg {d} power {k}");
            }
        }
    }
}
