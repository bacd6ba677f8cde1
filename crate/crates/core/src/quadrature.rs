//! Gauss rules on the reference segment `[0, 1]` and the reference triangle
//! `{x, y >= 0, x + y <= 1}`.
//!
//! Triangle rules are collapsed tensor products of Gauss-Legendre rules
//! (Duffy transform), so any exactness degree is available without tables.

use std::f64::consts::PI;

/// Points, positive weights and the certified polynomial exactness degree.
#[derive(Clone, Debug)]
pub struct QuadratureRule<const D: usize> {
    points: Vec<[f64; D]>,
    weights: Vec<f64>,
    exactness: usize,
}

pub type SegmentRule = QuadratureRule<1>;
pub type TriangleRule = QuadratureRule<2>;

impl<const D: usize> QuadratureRule<D> {
    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; D], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn([f64; D]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton
/// iteration on the three-term recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 1..n {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * z * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|&t| 0.5 * t).collect(),
    )
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of degree
/// `exactness`.
pub fn segment_rule(exactness: usize) -> SegmentRule {
    let n = (exactness + 2) / 2;
    let (x, w) = legendre_01(n.max(1));
    QuadratureRule {
        points: x.into_iter().map(|t| [t]).collect(),
        weights: w,
        exactness: 2 * n.max(1) - 1,
    }
}

/// Collapsed-tensor rule on the unit triangle exact for total degree
/// `exactness`.
///
/// The map `(u, v) -> (u, v (1 - u))` has Jacobian `1 - u`; a monomial
/// `x^a y^b` becomes degree `a + b + 1` in `u` and `b` in `v`.
pub fn triangle_rule(exactness: usize) -> TriangleRule {
    let nu = (exactness + 3) / 2;
    let nv = (exactness + 2) / 2;
    let (xu, wu) = legendre_01(nu);
    let (xv, wv) = legendre_01(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&u, &a) in xu.iter().zip(&wu) {
        for (&v, &b) in xv.iter().zip(&wv) {
            points.push([u, v * (1.0 - u)]);
            weights.push(a * b * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness: (2 * nu - 2).min(2 * nv - 1),
    }
}
