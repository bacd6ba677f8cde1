//! Error norms of lifted curvature fields and empirical convergence orders.

use std::sync::Arc;

use crate::analytic::AnalyticMetric;
use crate::curvature::{assemble_matrix, checked_jet};
use crate::error::{Error, Result};
use crate::fe::{LagrangeSpace, ScalarField, TensorField};
use crate::linalg::{SparseMatrix, SpdSolver, SOLVE_TOL};
use crate::mesh::{Mesh, Point};
use crate::metric::Vec2;
use crate::par;
use crate::quadrature::triangle_rule;

/// Default quadrature exactness for error norms.
pub const NORM_EXACTNESS: usize = 20;

fn squared_l2<F>(mesh: &Mesh, f: &F, exactness: usize) -> Result<f64>
where
    F: Fn(usize, Point) -> Result<f64> + Sync + ?Sized,
{
    let rule = triangle_rule(exactness);
    let parts = par::try_map_range(mesh.num_triangles(), |t| {
        let area = mesh.element_map(t).det.abs();
        let mut acc = 0.0;
        for (xi, w) in rule.iter() {
            let v = f(t, xi)?;
            acc += w * area * v * v;
        }
        Ok::<_, Error>(acc)
    })?;
    Ok(parts.into_iter().sum())
}

/// `||f||_{L2}` for `f(t, xi)` evaluated on element `t` at reference point `xi`.
pub fn l2_norm<F>(mesh: &Mesh, f: &F, exactness: usize) -> Result<f64>
where
    F: Fn(usize, Point) -> Result<f64> + Sync + ?Sized,
{
    Ok(squared_l2(mesh, f, exactness)?.sqrt())
}

/// Pointwise curvature error `K_h - K`, or with `densitize` the error of
/// the densities `K_h sqrt(det g_h) - K sqrt(det g)`.
pub fn curvature_error<'a, U, G, M>(
    mesh: &'a Mesh,
    lifted: &'a U,
    g_h: &'a G,
    exact: &'a M,
    densitize: bool,
) -> impl Fn(usize, Point) -> Result<f64> + Sync + 'a
where
    U: ScalarField + ?Sized,
    G: TensorField + ?Sized,
    M: AnalyticMetric + ?Sized,
{
    move |t, xi| {
        let kh = lifted.jet(t, xi).val;
        let p = mesh.element_map(t).map(xi);
        if densitize {
            let dh = checked_jet(g_h, t, xi)?.det().sqrt();
            Ok(kh * dh - exact.gauss_curvature(p) * exact.density(p))
        } else {
            Ok(kh - exact.gauss_curvature(p))
        }
    }
}

/// `||K_h - K||_{L2}` or, with `densitize`, `||K_h omega_h - K omega||_{L2}`
/// on the coefficient densities of `dx1 ^ dx2`.
pub fn l2_error<U, G, M>(
    mesh: &Mesh,
    lifted: &U,
    g_h: &G,
    exact: &M,
    densitize: bool,
    exactness: usize,
) -> Result<f64>
where
    U: ScalarField + ?Sized,
    G: TensorField + ?Sized,
    M: AnalyticMetric + ?Sized,
{
    l2_norm(mesh, &curvature_error(mesh, lifted, g_h, exact, densitize), exactness)
}

/// Broken `H1` norm of `field - reference`, L2 part included.
pub fn h1_elementwise_error<U, R, D>(
    mesh: &Mesh,
    field: &U,
    reference: R,
    gradient: D,
    exactness: usize,
) -> f64
where
    U: ScalarField + ?Sized,
    R: Fn(Point) -> f64 + Sync,
    D: Fn(Point) -> Vec2 + Sync,
{
    let rule = triangle_rule(exactness);
    let parts = par::map_range(mesh.num_triangles(), |t| {
        let map = mesh.element_map(t);
        let area = map.det.abs();
        let mut acc = 0.0;
        for (xi, w) in rule.iter() {
            let p = map.map(xi);
            let jet = field.jet(t, xi);
            let dr = gradient(p);
            let e = jet.val - reference(p);
            let (ex, ey) = (jet.grad[0] - dr[0], jet.grad[1] - dr[1]);
            acc += w * area * (e * e + ex * ex + ey * ey);
        }
        acc
    });
    parts.into_iter().sum::<f64>().sqrt()
}

/// Discrete dual norm: `||e||_{H-1} = ||w||_{H1}` with `w` solving the
/// Euclidean Poisson problem `-Laplace w = e`, `w = 0` on the whole boundary,
/// in Lagrange elements. Matrices are assembled and factored once per mesh.
pub struct HMinusOneNorm {
    space: LagrangeSpace,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    solver: SpdSolver,
    exactness: usize,
}

impl HMinusOneNorm {
    pub fn new(mesh: Arc<Mesh>, degree: usize, exactness: usize) -> Result<Self> {
        let space = LagrangeSpace::new(mesh, degree);
        let rule = triangle_rule(2 * degree);
        let table = space.reference().tabulate(&rule);
        let nb = space.reference().num_basis();
        let mass = assemble_matrix(&space, |t, m| {
            let area = space.element_map(t).det.abs();
            for ((_, w), (phi, _)) in rule.iter().zip(&table) {
                for i in 0..nb {
                    for j in 0..nb {
                        m[i * nb + j] += w * area * phi[i] * phi[j];
                    }
                }
            }
            Ok(())
        })?;
        let stiffness = assemble_matrix(&space, |t, m| {
            let map = space.element_map(t);
            let area = map.det.abs();
            for (xi, w) in rule.iter() {
                let (_, grads) = space.eval(t, xi);
                for i in 0..nb {
                    for j in 0..nb {
                        let d = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                        m[i * nb + j] += w * area * d;
                    }
                }
            }
            Ok(())
        })?;
        let solver = SpdSolver::new(&stiffness, space.boundary_mask())?;
        Ok(HMinusOneNorm {
            space,
            mass,
            stiffness,
            solver,
            exactness,
        })
    }

    pub fn space(&self) -> &LagrangeSpace {
        &self.space
    }

    /// Dual norm of `e(t, xi)`, given per element in reference coordinates.
    pub fn norm<F>(&self, e: &F) -> Result<f64>
    where
        F: Fn(usize, Point) -> Result<f64> + Sync + ?Sized,
    {
        let w = self.representer(e)?;
        Ok((self.mass.quad_form(&w) + self.stiffness.quad_form(&w)).max(0.0).sqrt())
    }

    /// Coefficients of the Poisson solution `w`.
    pub fn representer<F>(&self, e: &F) -> Result<Vec<f64>>
    where
        F: Fn(usize, Point) -> Result<f64> + Sync + ?Sized,
    {
        let rule = triangle_rule(self.exactness);
        let table = self.space.reference().tabulate(&rule);
        let mesh = self.space.mesh();
        let locals = par::try_map_range(mesh.num_triangles(), |t| {
            let area = self.space.element_map(t).det.abs();
            let mut b = vec![0.0; table.first().map_or(0, |(phi, _)| phi.len())];
            for ((xi, w), (phi, _)) in rule.iter().zip(&table) {
                let c = w * area * e(t, xi)?;
                for (bi, p) in b.iter_mut().zip(phi) {
                    *bi += c * p;
                }
            }
            Ok::<_, Error>(b)
        })?;
        let mut rhs = vec![0.0; self.space.dim()];
        for (t, b) in locals.iter().enumerate() {
            for (&d, v) in self.space.element_dofs(t).iter().zip(b) {
                rhs[d] += v;
            }
        }
        let zeros = vec![0.0; self.space.dim()];
        self.solver.solve(&rhs, &zeros, SOLVE_TOL)
    }
}

/// One-shot dual norm; see [`HMinusOneNorm`] to reuse the factorization.
pub fn hminus1_error<F>(mesh: Arc<Mesh>, degree: usize, e: &F, exactness: usize) -> Result<f64>
where
    F: Fn(usize, Point) -> Result<f64> + Sync + ?Sized,
{
    HMinusOneNorm::new(mesh, degree, exactness)?.norm(e)
}

/// Empirical orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Vec<f64> {
    assert_eq!(errors.len(), hs.len(), "errors and mesh sizes differ in length");
    errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::analytic::{FlatMetric, GraphMetric};
    use crate::curvature::lift_curvature;
    use crate::fe::{LagrangeField, ReggeSpace};

    fn square(level: u32) -> Arc<Mesh> {
        Arc::new(Mesh::structured_square(level))
    }

    #[test]
    fn eoc_examples() {
        let r = eoc(&[1.0, 0.25, 0.0625], &[1.0, 0.5, 0.25]);
        assert!(r.iter().all(|x| (x - 2.0).abs() < 1e-14));
        assert!((eoc(&[1.0, 0.125], &[1.0, 0.5])[0] - 3.0).abs() < 1e-14);
        assert_eq!(eoc(&[0.3, 0.3], &[1.0, 0.5]), vec![0.0]);
    }

    #[test]
    fn constant_error_has_unit_norm() {
        let mesh = square(2);
        let space = LagrangeSpace::new(mesh.clone(), 1);
        let zero = space.zero();
        let id = crate::fe::OnMesh {
            metric: &FlatMetric,
            mesh: &mesh,
        };
        struct One;
        impl AnalyticMetric for One {
            fn name(&self) -> &'static str {
                "one"
            }
            fn jet(&self, p: Point) -> crate::metric::MetricJet {
                FlatMetric.jet(p)
            }
            fn gauss_curvature(&self, _p: Point) -> f64 {
                1.0
            }
            fn gauss_curvature_gradient(&self, _p: Point) -> Vec2 {
                [0.0, 0.0]
            }
        }
        let e = l2_error(&mesh, &zero, &id, &One, false, NORM_EXACTNESS).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sine_eigenfunction_dual_norm() {
        let exact = (0.25 + PI * PI / 2.0).sqrt() / (2.0 * PI * PI);
        let mut gaps = Vec::new();
        for level in 2..=4 {
            let mesh = square(level);
            let h = HMinusOneNorm::new(mesh.clone(), 3, NORM_EXACTNESS).unwrap();
            let f = |t: usize, xi: Point| {
                let p = mesh.element_map(t).map(xi);
                Ok((PI * p[0]).sin() * (PI * p[1]).sin())
            };
            gaps.push((h.norm(&f).unwrap() - exact).abs());
        }
        assert!(gaps[2] < 1e-6, "{gaps:?}");
        assert!(gaps[2] < gaps[1] && gaps[1] < gaps[0]);
    }

    #[test]
    fn norms_are_homogeneous() {
        let mesh = square(2);
        let h = HMinusOneNorm::new(mesh.clone(), 2, NORM_EXACTNESS).unwrap();
        let base = |t: usize, xi: Point| {
            let p = mesh.element_map(t).map(xi);
            Ok(p[0] * p[0] - 0.3 * p[1] + (3.0 * p[0] * p[1]).cos())
        };
        let n1 = h.norm(&base).unwrap();
        let l1 = l2_norm(&mesh, &base, NORM_EXACTNESS).unwrap();
        for c in [-2.5, 0.0, 7.0] {
            let scaled = |t: usize, xi: Point| Ok(c * base(t, xi)?);
            let nc = h.norm(&scaled).unwrap();
            let lc = l2_norm(&mesh, &scaled, NORM_EXACTNESS).unwrap();
            assert!((nc - c.abs() * n1).abs() < 1e-12 * (1.0 + nc));
            assert!((lc - c.abs() * l1).abs() < 1e-12 * (1.0 + lc));
        }
        // ||w||_H1^2 = (e, w) and the discrete first eigenvalue is at least 2 pi^2
        assert!(n1 <= l1 / (1.0 + 2.0 * PI * PI).sqrt() + 1e-12);
    }

    #[test]
    fn zero_error_has_zero_dual_norm() {
        let mesh = square(1);
        let h = HMinusOneNorm::new(mesh, 3, NORM_EXACTNESS).unwrap();
        assert_eq!(h.norm(&|_, _| Ok(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn h1_error_of_coordinate_function() {
        let mesh = square(1);
        let space = LagrangeSpace::new(mesh.clone(), 1);
        let zero = space.zero();
        let e = h1_elementwise_error(&mesh, &zero, |p| p[0], |_| [1.0, 0.0], NORM_EXACTNESS);
        assert!((e - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let x = space.interpolate(|p| p[0]);
        assert!(h1_elementwise_error(&mesh, &x, |p| p[0], |_| [1.0, 0.0], NORM_EXACTNESS) < 1e-14);
    }

    #[test]
    fn flat_benchmark_has_zero_errors() {
        let mesh = square(2);
        let regge = ReggeSpace::new(mesh.clone(), 1).unwrap();
        let g = regge.interpolate(&FlatMetric);
        let space = LagrangeSpace::new(mesh.clone(), 1);
        let lifted = lift_curvature(&g, 1, &space, &FlatMetric, 8).unwrap();
        for densitize in [false, true] {
            let e = l2_error(&mesh, &lifted.field, &g, &FlatMetric, densitize, NORM_EXACTNESS).unwrap();
            assert!(e < 1e-10, "{e}");
        }
    }

    #[test]
    fn exact_reference_has_zero_error() {
        let mesh = square(2);
        let regge = ReggeSpace::new(mesh.clone(), 2).unwrap();
        let g = regge.interpolate(&GraphMetric);
        let space = LagrangeSpace::new(mesh.clone(), 2);
        let field = space.interpolate(|p| GraphMetric.gauss_curvature(p));
        let own = LagrangeField::new(&space, field.values().to_vec());
        let e = l2_error(&mesh, &own, &g, &GraphMetric, false, NORM_EXACTNESS).unwrap();
        // nodal interpolation error only
        assert!(e > 0.0 && e < 1e-2);
    }
}
