//! Closed-form metrics on the unit square: the graph-surface benchmark plus
//! flat and sphere-patch test metrics.

use std::f64::consts::PI;

use crate::mesh::{Point, Side};
use crate::metric::{self, angle, EdgeFrame, Mat2, MetricJet, Vec2};

/// A smooth metric on the closed unit square with its curvature data.
pub trait AnalyticMetric: Sync {
    fn name(&self) -> &'static str;

    /// Metric with analytic first and second derivatives.
    fn jet(&self, p: Point) -> MetricJet;

    fn gauss_curvature(&self, p: Point) -> f64 {
        metric::gauss_curvature(&self.jet(p))
    }

    fn gauss_curvature_gradient(&self, p: Point) -> Vec2;

    /// Geodesic curvature of the side through `p`, measured against the
    /// inward `g`-normal.
    fn boundary_geodesic_curvature(&self, p: Point, side: Side) -> f64 {
        let (tau, nu) = side_frame(side);
        let jet = self.jet(p);
        metric::geodesic_curvature(&jet, &EdgeFrame::new(jet.g, tau, nu))
    }

    /// `sqrt(det g)`.
    fn density(&self, p: Point) -> f64 {
        self.jet(p).det().sqrt()
    }
}

/// Euclidean unit tangent and inward unit normal of a side of the square.
pub fn side_frame(side: Side) -> (Vec2, Vec2) {
    match side {
        Side::Left => ([0.0, 1.0], [1.0, 0.0]),
        Side::Right => ([0.0, 1.0], [-1.0, 0.0]),
        Side::Bottom => ([1.0, 0.0], [0.0, 1.0]),
        Side::Top => ([1.0, 0.0], [0.0, -1.0]),
    }
}

/// Exterior angle `2 pi - interior` at a boundary vertex, with `t1`, `t2`
/// the boundary tangents leaving the vertex and the interior angle measured
/// by the metric at the vertex.
pub fn exterior_angle<M: AnalyticMetric + ?Sized>(metric: &M, vertex: Point, t1: Vec2, t2: Vec2) -> f64 {
    2.0 * PI - angle(metric.jet(vertex).g, t1, t2)
}

/// Euclidean metric.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlatMetric;

impl AnalyticMetric for FlatMetric {
    fn name(&self) -> &'static str {
        "flat"
    }

    fn jet(&self, _p: Point) -> MetricJet {
        MetricJet::identity()
    }

    fn gauss_curvature(&self, _p: Point) -> f64 {
        0.0
    }

    fn gauss_curvature_gradient(&self, _p: Point) -> Vec2 {
        [0.0, 0.0]
    }

    fn boundary_geodesic_curvature(&self, _p: Point, _side: Side) -> f64 {
        0.0
    }
}

/// Stereographic chart of the unit sphere, `4 / (1 + x^2 + y^2)^2 I`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SphereMetric;

impl AnalyticMetric for SphereMetric {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn jet(&self, p: Point) -> MetricJet {
        let s = 1.0 + p[0] * p[0] + p[1] * p[1];
        let phi = 4.0 / (s * s);
        let s3 = s * s * s;
        let s4 = s3 * s;
        let dphi = [-16.0 * p[0] / s3, -16.0 * p[1] / s3];
        let mut jet = MetricJet::constant(iso(phi));
        for k in 0..2 {
            jet.dg[k] = iso(dphi[k]);
            for l in 0..2 {
                let delta = if k == l { 1.0 } else { 0.0 };
                jet.d2g[l][k] = iso(-16.0 * delta / s3 + 96.0 * p[k] * p[l] / s4);
            }
        }
        jet
    }

    fn gauss_curvature(&self, _p: Point) -> f64 {
        1.0
    }

    fn gauss_curvature_gradient(&self, _p: Point) -> Vec2 {
        [0.0, 0.0]
    }
}

fn iso(c: f64) -> Mat2 {
    [[c, 0.0], [0.0, c]]
}

/// Metric induced on the graph of
/// `f(x, y) = (x^2 + y^2) / 2 - (x^4 + y^4) / 12`, i.e. `g = I + grad f grad f^T`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GraphMetric;

impl GraphMetric {
    // derivatives of the one-dimensional profile x^2/2 - x^4/12
    fn d1(x: f64) -> f64 {
        x - x * x * x / 3.0
    }

    fn d2(x: f64) -> f64 {
        1.0 - x * x
    }

    fn d3(x: f64) -> f64 {
        -2.0 * x
    }

    /// `9 + x^2 (x^2 - 3)^2 + y^2 (y^2 - 3)^2`, nine times `det g`.
    fn big_d(p: Point) -> f64 {
        let a = p[0] * (p[0] * p[0] - 3.0);
        let b = p[1] * (p[1] * p[1] - 3.0);
        9.0 + a * a + b * b
    }

    /// Closed-form geodesic curvature on the top side `y = 1` family, valid
    /// at any `(x, y)`; the left side has zero geodesic curvature.
    pub fn kappa_top(p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        let a = x * x * (x * x - 3.0).powi(2);
        let b = y * y * (y * y - 3.0).powi(2);
        -27.0 * (x * x - 1.0) * y * (y * y - 3.0) / ((a + 9.0).powf(1.5) * (a + b + 9.0).sqrt())
    }
}

impl AnalyticMetric for GraphMetric {
    fn name(&self) -> &'static str {
        "graph"
    }

    fn jet(&self, p: Point) -> MetricJet {
        let f1 = [Self::d1(p[0]), Self::d1(p[1])];
        // Hessian and third derivatives of f are diagonal
        let f2 = [Self::d2(p[0]), Self::d2(p[1])];
        let f3 = [Self::d3(p[0]), Self::d3(p[1])];
        let fij = |i: usize, j: usize| if i == j { f2[i] } else { 0.0 };
        let fijk = |i: usize, j: usize, k: usize| if i == j && j == k { f3[i] } else { 0.0 };
        let mut jet = MetricJet::default();
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                jet.g[i][j] = delta + f1[i] * f1[j];
                for k in 0..2 {
                    jet.dg[k][i][j] = fij(i, k) * f1[j] + f1[i] * fij(j, k);
                    for l in 0..2 {
                        jet.d2g[l][k][i][j] = fijk(i, k, l) * f1[j]
                            + fij(i, k) * fij(j, l)
                            + fij(i, l) * fij(j, k)
                            + f1[i] * fijk(j, k, l);
                    }
                }
            }
        }
        jet
    }

    fn gauss_curvature(&self, p: Point) -> f64 {
        let d = Self::big_d(p);
        81.0 * (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1]) / (d * d)
    }

    fn gauss_curvature_gradient(&self, p: Point) -> Vec2 {
        let d = Self::big_d(p);
        let d3 = d * d * d;
        // d/dx of x^2 (x^2 - 3)^2 = 6 x (x^2 - 3)(x^2 - 1)
        let dd = |s: f64| 6.0 * s * (s * s - 3.0) * (s * s - 1.0);
        let (x, y) = (p[0], p[1]);
        [
            81.0 * (1.0 - y * y) * (-2.0 * x * d - 2.0 * (1.0 - x * x) * dd(x)) / d3,
            81.0 * (1.0 - x * x) * (-2.0 * y * d - 2.0 * (1.0 - y * y) * dd(y)) / d3,
        ]
    }

    fn boundary_geodesic_curvature(&self, p: Point, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Top => Self::kappa_top(p),
            _ => {
                let (tau, nu) = side_frame(side);
                let jet = self.jet(p);
                metric::geodesic_curvature(&jet, &EdgeFrame::new(jet.g, tau, nu))
            }
        }
    }

    fn density(&self, p: Point) -> f64 {
        (Self::big_d(p) / 9.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jet_curvature<M: AnalyticMetric>(m: &M, side: Side, p: Point) -> f64 {
        let (tau, nu) = side_frame(side);
        let jet = m.jet(p);
        metric::geodesic_curvature(&jet, &EdgeFrame::new(jet.g, tau, nu))
    }

    #[test]
    fn benchmark_point_values() {
        let m = GraphMetric;
        assert!((m.gauss_curvature([0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(m.gauss_curvature([1.0, 1.0]), 0.0);
        let k = m.boundary_geodesic_curvature([0.0, 1.0], Side::Top);
        assert!((k + 2.0 / 13f64.sqrt()).abs() < 1e-15);
        assert!((m.density([0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_curvature_matches_jet() {
        let m = GraphMetric;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let k = m.gauss_curvature(p);
            let kj = metric::gauss_curvature(&m.jet(p));
            assert!((k - kj).abs() <= 1e-10 * (1.0 + k.abs()), "{p:?}: {k} vs {kj}");
            let sj = (m.jet(p).det()).sqrt();
            assert!((m.density(p) - sj).abs() < 1e-14);
        }
    }

    #[test]
    fn curvature_gradient_matches_finite_differences() {
        let m = GraphMetric;
        let h = 1e-6;
        for p in [[0.3, 0.7], [0.9, 0.1], [0.5, 0.5]] {
            let g = m.gauss_curvature_gradient(p);
            for a in 0..2 {
                let mut pp = p;
                let mut pm = p;
                pp[a] += h;
                pm[a] -= h;
                let fd = (m.gauss_curvature(pp) - m.gauss_curvature(pm)) / (2.0 * h);
                assert!((g[a] - fd).abs() < 1e-8, "{p:?} {a}: {} vs {fd}", g[a]);
            }
        }
    }

    #[test]
    fn boundary_curvature_matches_inward_frame() {
        let m = GraphMetric;
        for i in 0..50 {
            let x = (i as f64 + 0.5) / 50.0;
            let p = [x, 1.0];
            let closed = GraphMetric::kappa_top(p);
            let jet = jet_curvature(&m, Side::Top, p);
            assert!((closed - jet).abs() < 1e-10, "x={x}: {closed} vs {jet}");
            let left = jet_curvature(&m, Side::Left, [0.0, x]);
            assert!(left.abs() < 1e-15);
        }
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let h = 1e-5;
        for m in [&GraphMetric as &dyn AnalyticMetric, &SphereMetric] {
            let p = [0.37, 0.61];
            let jet = m.jet(p);
            for k in 0..2 {
                let mut pp = p;
                let mut pm = p;
                pp[k] += h;
                pm[k] -= h;
                let (jp, jm) = (m.jet(pp), m.jet(pm));
                for i in 0..2 {
                    for j in 0..2 {
                        let fd = (jp.g[i][j] - jm.g[i][j]) / (2.0 * h);
                        assert!((jet.dg[k][i][j] - fd).abs() < 1e-8);
                        for l in 0..2 {
                            let fd2 = (jp.dg[l][i][j] - jm.dg[l][i][j]) / (2.0 * h);
                            assert!((jet.d2g[k][l][i][j] - fd2).abs() < 1e-7);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_has_unit_curvature() {
        for p in [[0.0, 0.0], [0.4, 0.9], [1.0, 1.0], [0.2, 0.3]] {
            let k = metric::gauss_curvature(&SphereMetric.jet(p));
            assert!((k - 1.0).abs() < 1e-12, "{p:?}: {k}");
        }
    }

    #[test]
    fn exterior_angles() {
        let flat = FlatMetric;
        let straight = exterior_angle(&flat, [0.0, 0.5], [0.0, 1.0], [0.0, -1.0]);
        assert!((straight - PI).abs() < 1e-15);
        let corner = exterior_angle(&flat, [0.0, 1.0], [0.0, -1.0], [1.0, 0.0]);
        assert!((corner - 1.5 * PI).abs() < 1e-15);
        // g(0, 1) = diag(1, 13/9) keeps the coordinate corner a right angle
        let g = GraphMetric.jet([0.0, 1.0]).g;
        assert!((g[1][1] - 13.0 / 9.0).abs() < 1e-15 && g[0][1] == 0.0);
        let c = exterior_angle(&GraphMetric, [0.0, 1.0], [0.0, -1.0], [1.0, 0.0]);
        assert!((c - 1.5 * PI).abs() < 1e-15);
        assert!((c - (2.0 * PI - angle(g, [0.0, -1.0], [1.0, 0.0]))).abs() < 1e-15);
    }
}
