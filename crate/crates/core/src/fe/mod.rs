//! Lagrange and Regge finite element spaces on affine triangles.

mod lagrange;
mod regge;

pub use lagrange::{structured_dim, LagrangeField, LagrangeReference, LagrangeSpace};
pub use regge::{ReggeField, ReggeReference, ReggeSpace};

use crate::analytic::AnalyticMetric;
use crate::mesh::{Mesh, Point};
use crate::metric::{Mat2, MetricJet, ScalarJet};

/// A symmetric 2-tensor field that is smooth on each element.
pub trait TensorField: Sync {
    /// Jet at reference point `xi` of element `t`, in physical coordinates.
    fn jet(&self, t: usize, xi: Point) -> MetricJet;
}

/// A scalar field that is smooth on each element.
pub trait ScalarField: Sync {
    fn jet(&self, t: usize, xi: Point) -> ScalarJet;
}

/// An analytic metric sampled through the element maps of a mesh.
pub struct OnMesh<'a, M: ?Sized> {
    pub metric: &'a M,
    pub mesh: &'a Mesh,
}

impl<M: AnalyticMetric + ?Sized> TensorField for OnMesh<'_, M> {
    fn jet(&self, t: usize, xi: Point) -> MetricJet {
        self.metric.jet(self.mesh.element_map(t).map(xi))
    }
}

/// `a + s (b - a)`.
pub struct Interpolated<'a, A: ?Sized, B: ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
    pub s: f64,
}

impl<A: TensorField + ?Sized, B: TensorField + ?Sized> TensorField for Interpolated<'_, A, B> {
    fn jet(&self, t: usize, xi: Point) -> MetricJet {
        let ja = self.a.jet(t, xi);
        ja + self.s * (self.b.jet(t, xi) - ja)
    }
}

/// `a - b`.
pub struct Difference<'a, A: ?Sized, B: ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
}

impl<A: TensorField + ?Sized, B: TensorField + ?Sized> TensorField for Difference<'_, A, B> {
    fn jet(&self, t: usize, xi: Point) -> MetricJet {
        self.a.jet(t, xi) - self.b.jet(t, xi)
    }
}

/// Physical gradient from a reference gradient, `grad_x = F^-T grad_xi`.
pub(crate) fn physical_gradient(inv: &Mat2, g: [f64; 2]) -> [f64; 2] {
    [
        inv[0][0] * g[0] + inv[1][0] * g[1],
        inv[0][1] * g[0] + inv[1][1] * g[1],
    ]
}

/// `H_x = F^-T H_xi F^-1`.
pub(crate) fn physical_hessian(inv: &Mat2, h: Mat2) -> Mat2 {
    congruence(inv, h)
}

/// `G^T A G`.
pub(crate) fn congruence(g: &Mat2, a: Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    s += g[p][i] * a[p][q] * g[q][j];
                }
            }
            out[i][j] = s;
        }
    }
    out
}
