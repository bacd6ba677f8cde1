//! Distributional covariant incompatibility and rot rot pairings, and the
//! integral representation of the curvature error along a metric path.

use super::{assemble_gauss_functional, ccw_edges, checked_jet, REF_VERTICES};
use crate::analytic::AnalyticMetric;
use crate::error::Result;
use crate::fe::{Difference, Interpolated, LagrangeField, OnMesh, ScalarField, TensorField};
use crate::mesh::Mesh;
use crate::metric::{self, bilinear, contract, EdgeFrame};
use crate::par;
use crate::quadrature::{segment_rule, triangle_rule};

fn sum_in_order(parts: Vec<f64>) -> f64 {
    parts.into_iter().sum()
}

/// `sum_T [ int_T inc_g(sigma) u omega
///        - int_dT u (curl_g sigma + d sigma_nt)(tau) omega_E
///        + sum_V [[sigma_nt]]_V u(V) ]`
///
/// with the counterclockwise unit tangent, the inward normal, and
/// `d sigma_nt (tau) = (nabla_tau sigma)(n, tau) + (sigma_nn - sigma_tt) kappa_n`.
/// The vertex jump is the value of `sigma(n, tau)` at the end of the edge
/// entering `V` minus its value at the start of the edge leaving `V`, both
/// seen from inside `T`. Every term is element-local, so `g` and `sigma`
/// need not be tangential-tangential continuous.
pub fn distributional_inc<G, S, U>(
    mesh: &Mesh,
    g: &G,
    sigma: &S,
    u: &U,
    exactness: usize,
) -> Result<f64>
where
    G: TensorField + ?Sized,
    S: TensorField + ?Sized,
    U: ScalarField + ?Sized,
{
    let tri = triangle_rule(exactness);
    let seg = segment_rule(exactness);
    let parts = par::try_map_range(mesh.num_triangles(), |t| {
        let map = mesh.element_map(t);
        let area = map.det.abs();
        let mut acc = 0.0;
        for (xi, w) in tri.iter() {
            let jg = checked_jet(g, t, xi)?;
            let inc = metric::inc(&jg, &sigma.jet(t, xi));
            acc += w * area * inc * u.jet(t, xi).val * jg.det().sqrt();
        }
        let edges = ccw_edges(&map);
        for edge in &edges {
            for ([s], w) in seg.iter() {
                let xi = edge.reference_point(s);
                let jg = checked_jet(g, t, xi)?;
                let js = sigma.jet(t, xi);
                let f = EdgeFrame::new(jg.g, edge.tau, edge.nu);
                let curl = metric::curl_tensor(&jg, &js);
                let curl_t = curl[0] * f.tau_hat[0] + curl[1] * f.tau_hat[1];
                let kappa = metric::geodesic_curvature(&jg, &f);
                let d_snt = metric::covariant_derivative(&jg, &js, f.tau_hat, f.n_hat, f.tau_hat)
                    + (bilinear(js.g, f.n_hat, f.n_hat) - bilinear(js.g, f.tau_hat, f.tau_hat))
                        * kappa;
                let density = bilinear(jg.g, edge.d, edge.d).sqrt();
                acc -= w * u.jet(t, xi).val * (curl_t + d_snt) * density;
            }
        }
        for i in 0..3 {
            let xi = REF_VERTICES[i];
            let jg = checked_jet(g, t, xi)?;
            let js = sigma.jet(t, xi);
            let snt = |e: usize| {
                let f = EdgeFrame::new(jg.g, edges[e].tau, edges[e].nu);
                bilinear(js.g, f.n_hat, f.tau_hat)
            };
            // edge (i - 1 -> i) enters the vertex, edge (i -> i + 1) leaves it
            let jump = snt((i + 2) % 3) - snt(i);
            acc += jump * u.jet(t, xi).val;
        }
        Ok::<f64, crate::Error>(acc)
    })?;
    Ok(sum_in_order(parts))
}

/// `sum_T [ int_T rotrot_g(u) : sigma omega + int_dT sigma(tau, tau) du(n) omega_E ]`
/// with the `g`-unit tangent and inward `g`-unit normal.
pub fn distributional_rotrot<G, U, S>(
    mesh: &Mesh,
    g: &G,
    u: &U,
    sigma: &S,
    exactness: usize,
) -> Result<f64>
where
    G: TensorField + ?Sized,
    U: ScalarField + ?Sized,
    S: TensorField + ?Sized,
{
    let tri = triangle_rule(exactness);
    let seg = segment_rule(exactness);
    let parts = par::try_map_range(mesh.num_triangles(), |t| {
        let map = mesh.element_map(t);
        let area = map.det.abs();
        let mut acc = 0.0;
        for (xi, w) in tri.iter() {
            let jg = checked_jet(g, t, xi)?;
            let rr = metric::rotrot(&jg, &u.jet(t, xi));
            acc += w * area * contract(rr, sigma.jet(t, xi).g) * jg.det().sqrt();
        }
        for edge in ccw_edges(&map) {
            for ([s], w) in seg.iter() {
                let xi = edge.reference_point(s);
                let jg = checked_jet(g, t, xi)?;
                let f = EdgeFrame::new(jg.g, edge.tau, edge.nu);
                let stt = bilinear(sigma.jet(t, xi).g, f.tau_hat, f.tau_hat);
                let grad = u.jet(t, xi).grad;
                let dun = grad[0] * f.n_hat[0] + grad[1] * f.n_hat[1];
                acc += w * stt * dun * bilinear(jg.g, edge.d, edge.d).sqrt();
            }
        }
        Ok::<f64, crate::Error>(acc)
    })?;
    Ok(sum_in_order(parts))
}

/// Both sides of the integral representation of the curvature error,
///
/// `(K omega(g_h) - K omega(g))(u) = -1/2 int_0^1 inc_{g(t)}(g_h - g)(u) dt`,
///
/// with `g(t) = g + t (g_h - g)` and the `t` integral evaluated by a
/// `t_points` Gauss rule. The left side applies the distributional
/// functional to both metrics, so boundary terms match.
pub fn error_representation_check<M, G>(
    exact: &M,
    g_h: &G,
    u: &LagrangeField<'_>,
    t_points: usize,
    exactness: usize,
) -> Result<(f64, f64)>
where
    M: AnalyticMetric + ?Sized,
    G: TensorField + ?Sized,
{
    let space = u.space();
    let mesh = space.mesh();
    let ge = OnMesh { metric: exact, mesh };
    let fh = assemble_gauss_functional(g_h, space, exactness)?;
    let fe = assemble_gauss_functional(&ge, space, exactness)?;
    let lhs = (&fh - &fe).apply(u.values());

    let sigma = Difference { a: g_h, b: &ge };
    let rule = segment_rule(2 * t_points.max(1) - 1);
    let mut rhs = 0.0;
    for ([t], w) in rule.iter() {
        let gt = Interpolated {
            a: &ge,
            b: g_h,
            s: t,
        };
        rhs += w * distributional_inc(mesh, &gt, &sigma, u, exactness)?;
    }
    Ok((lhs, -0.5 * rhs))
}
