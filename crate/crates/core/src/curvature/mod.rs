//! Distributional densitized Gauss curvature and its lifting.
//!
//! All element terms are assembled element by element: each triangle
//! contributes its curvature integral, the geodesic curvature of its three
//! edges against its own inward normal, and minus its interior angles at
//! its vertices. Adding `2 pi` at every vertex dof then yields element
//! curvature, geodesic-curvature jumps on interior edges, one-sided
//! curvature on boundary edges and the angle deficit at every vertex.

mod pairing;

use std::f64::consts::PI;
use std::ops::{Index, Sub};

pub use pairing::{distributional_inc, distributional_rotrot, error_representation_check};

use crate::analytic::{exterior_angle, AnalyticMetric};
use crate::error::{Error, Result};
use crate::fe::{LagrangeField, LagrangeSpace, TensorField};
use crate::linalg::{SparseMatrix, SpdSolver, SOLVE_TOL};
use crate::mesh::{BoundaryLabel, ElementMap, Mesh, Point, LOCAL_EDGES};
use crate::metric::{self, angle, EdgeFrame, MetricJet, Vec2};
use crate::par;
use crate::quadrature::{segment_rule, triangle_rule};

pub(crate) const REF_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Quadrature exactness used for functional and matrix assembly with a
/// Regge metric of degree `k` and a Lagrange space of degree `r`.
pub fn assembly_exactness(k: usize, r: usize) -> usize {
    2 * k.max(r) + 6
}

/// A covector on a Lagrange space, one entry per global dof.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    values: Vec<f64>,
}

impl Functional {
    pub fn new(values: Vec<f64>) -> Self {
        Functional { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluation at the function with coefficient vector `u`.
    pub fn apply(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.values.len(), "coefficient vector length");
        self.values.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for Functional {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl Sub for &Functional {
    type Output = Functional;
    fn sub(self, o: &Functional) -> Functional {
        assert_eq!(self.len(), o.len(), "functional lengths");
        Functional::new(self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect())
    }
}

/// One edge of a triangle traversed counterclockwise, from local vertex
/// `i` to `i + 1`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CcwEdge {
    pub start: Point,
    pub end: Point,
    /// Physical edge vector.
    pub d: Vec2,
    /// Euclidean unit tangent along `d`.
    pub tau: Vec2,
    /// Euclidean unit normal pointing into the triangle.
    pub nu: Vec2,
}

impl CcwEdge {
    pub fn reference_point(&self, s: f64) -> Point {
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }
}

pub(crate) fn ccw_edges(map: &ElementMap) -> [CcwEdge; 3] {
    [0, 1, 2].map(|i| {
        let (a, b) = (REF_VERTICES[i], REF_VERTICES[(i + 1) % 3]);
        let d = map.push_vector([b[0] - a[0], b[1] - a[1]]);
        let len = d[0].hypot(d[1]);
        let tau = [d[0] / len, d[1] / len];
        CcwEdge {
            start: a,
            end: b,
            d,
            tau,
            nu: [-tau[1], tau[0]],
        }
    })
}

/// Metric jet with the positive-definiteness check.
pub(crate) fn checked_jet<G: TensorField + ?Sized>(g: &G, t: usize, xi: Point) -> Result<MetricJet> {
    let jet = g.jet(t, xi);
    if jet.is_positive_definite() {
        Ok(jet)
    } else {
        Err(Error::IndefiniteMetric {
            element: t,
            point: xi,
        })
    }
}

/// Interior angle of triangle `t` at local vertex `i` measured by `g`.
fn element_angle(map: &ElementMap, g: &MetricJet, i: usize) -> f64 {
    let a = REF_VERTICES[i];
    let b = REF_VERTICES[(i + 1) % 3];
    let c = REF_VERTICES[(i + 2) % 3];
    let t1 = map.push_vector([b[0] - a[0], b[1] - a[1]]);
    let t2 = map.push_vector([c[0] - a[0], c[1] - a[1]]);
    angle(g.g, t1, t2)
}

/// Element-local curvature sources of one triangle tested against the
/// local basis of `space`: `int_T K phi omega`, `int_dT kappa phi omega_E`
/// with the inward normal, and minus the interior angles at the vertices.
fn element_gauss_terms<G: TensorField + ?Sized>(
    space: &LagrangeSpace,
    g: &G,
    t: usize,
    exactness: usize,
) -> Result<Vec<f64>> {
    let map = space.element_map(t);
    let reference = space.reference();
    let mut local = vec![0.0; reference.num_basis()];
    let area = map.det.abs();
    for (xi, w) in triangle_rule(exactness).iter() {
        let jet = checked_jet(g, t, xi)?;
        let c = w * area * metric::gauss_curvature(&jet) * jet.det().sqrt();
        let (phi, _) = reference.eval(xi);
        for (l, p) in local.iter_mut().zip(&phi) {
            *l += c * p;
        }
    }
    let seg = segment_rule(exactness);
    for edge in ccw_edges(map) {
        for ([s], w) in seg.iter() {
            let xi = edge.reference_point(s);
            let jet = checked_jet(g, t, xi)?;
            let frame = EdgeFrame::new(jet.g, edge.tau, edge.nu);
            let kappa = metric::geodesic_curvature(&jet, &frame);
            let c = w * kappa * metric::bilinear(jet.g, edge.d, edge.d).sqrt();
            let (phi, _) = reference.eval(xi);
            for (l, p) in local.iter_mut().zip(&phi) {
                *l += c * p;
            }
        }
    }
    for i in 0..3 {
        let jet = checked_jet(g, t, REF_VERTICES[i])?;
        local[i] -= element_angle(map, &jet, i);
    }
    Ok(local)
}

/// Distributional densitized Gauss curvature of `g` as a functional on
/// `space`, including boundary edges and boundary vertices (angle deficit
/// `2 pi - sum of angles` at every vertex).
pub fn assemble_gauss_functional<G: TensorField + ?Sized>(
    g: &G,
    space: &LagrangeSpace,
    exactness: usize,
) -> Result<Functional> {
    let mesh = space.mesh();
    let locals = par::try_map_range(mesh.num_triangles(), |t| {
        element_gauss_terms(space, g, t, exactness)
    })?;
    let mut values = vec![0.0; space.dim()];
    for (t, local) in locals.into_iter().enumerate() {
        for (&d, v) in space.element_dofs(t).iter().zip(local) {
            values[d] += v;
        }
    }
    // vertex dofs are numbered first
    for v in values.iter_mut().take(mesh.num_vertices()) {
        *v += 2.0 * PI;
    }
    Ok(Functional::new(values))
}

/// Gauss-Bonnet budget of a piecewise smooth metric on the mesh:
/// element curvature, all edge terms, interior angle deficits and
/// `pi - sum of angles` at boundary vertices. Equals `2 pi` on a disk.
pub fn gauss_bonnet_total<G: TensorField + ?Sized>(
    g: &G,
    mesh: &std::sync::Arc<Mesh>,
    exactness: usize,
) -> Result<f64> {
    let space = LagrangeSpace::new(mesh.clone(), 1);
    let f = assemble_gauss_functional(g, &space, exactness)?;
    // the P1 basis sums to one, so the total is the sum of all entries
    let boundary = mesh.boundary_vertex_mask().iter().filter(|&&b| b).count();
    Ok(f.values().iter().sum::<f64>() - PI * boundary as f64)
}

/// Neumann data of the exact metric: `int_{Gamma_N} kappa phi omega_E`
/// against the inward normal, plus the exterior angle `2 pi - interior`
/// at every vertex on a Neumann edge.
pub fn assemble_neumann_functional<M: AnalyticMetric + ?Sized>(
    exact: &M,
    space: &LagrangeSpace,
    exactness: usize,
) -> Functional {
    let mesh = space.mesh();
    let mut values = vec![0.0; space.dim()];
    let seg = segment_rule(exactness);
    let reference = space.reference();
    let mut neumann_vertex = vec![false; mesh.num_vertices()];
    for (e, edge) in mesh.edges.iter().enumerate() {
        let Some(side) = edge.side else { continue };
        if side.label() != BoundaryLabel::Neumann {
            continue;
        }
        neumann_vertex[edge.vertices[0]] = true;
        neumann_vertex[edge.vertices[1]] = true;
        let t = edge.triangles[0].expect("boundary edge has a triangle");
        let le = (0..3)
            .find(|&i| mesh.triangle_edges[t][i] == e)
            .expect("edge belongs to its triangle");
        let [a, b] = LOCAL_EDGES[le];
        let (ra, rb) = (REF_VERTICES[a], REF_VERTICES[b]);
        let map = space.element_map(t);
        let d = map.push_vector([rb[0] - ra[0], rb[1] - ra[1]]);
        for ([s], w) in seg.iter() {
            let xi = [ra[0] + s * (rb[0] - ra[0]), ra[1] + s * (rb[1] - ra[1])];
            let x = map.map(xi);
            let g = exact.jet(x).g;
            let c = w * exact.boundary_geodesic_curvature(x, side) * metric::bilinear(g, d, d).sqrt();
            let (phi, _) = reference.eval(xi);
            for (&dof, p) in space.element_dofs(t).iter().zip(&phi) {
                values[dof] += c * p;
            }
        }
    }
    let mut neighbours = vec![Vec::new(); mesh.num_vertices()];
    for edge in mesh.edges.iter().filter(|e| e.is_boundary()) {
        let [p, q] = edge.vertices;
        neighbours[p].push(q);
        neighbours[q].push(p);
    }
    for v in (0..mesh.num_vertices()).filter(|&v| neumann_vertex[v]) {
        let x = mesh.vertices[v];
        let [t1, t2] = [neighbours[v][0], neighbours[v][1]].map(|n| {
            let y = mesh.vertices[n];
            [y[0] - x[0], y[1] - x[1]]
        });
        values[v] += exterior_angle(exact, x, t1, t2);
    }
    Functional::new(values)
}

/// Global matrix from per-element dense blocks, scattered in element order.
pub(crate) fn assemble_matrix(
    space: &LagrangeSpace,
    local: impl Fn(usize, &mut Vec<f64>) -> Result<()> + Sync,
) -> Result<SparseMatrix> {
    let nb = space.reference().num_basis();
    let blocks = par::try_map_range(space.mesh().num_triangles(), |t| {
        let mut m = vec![0.0; nb * nb];
        local(t, &mut m)?;
        Ok::<_, Error>(m)
    })?;
    let mut triplets = Vec::with_capacity(blocks.len() * nb * nb);
    for (t, m) in blocks.iter().enumerate() {
        let dofs = space.element_dofs(t);
        for i in 0..nb {
            for j in 0..nb {
                triplets.push((dofs[i], dofs[j], m[i * nb + j]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(space.dim(), triplets))
}

/// Mass matrix weighted by the volume density `sqrt(det g)`.
pub fn assemble_weighted_mass<G: TensorField + ?Sized>(
    space: &LagrangeSpace,
    g: &G,
    exactness: usize,
) -> Result<SparseMatrix> {
    let rule = triangle_rule(exactness);
    let table = space.reference().tabulate(&rule);
    let nb = space.reference().num_basis();
    assemble_matrix(space, |t, m| {
        let area = space.element_map(t).det.abs();
        for ((xi, w), (phi, _)) in rule.iter().zip(&table) {
            let jet = checked_jet(g, t, xi)?;
            let c = w * area * jet.det().sqrt();
            for i in 0..nb {
                for j in 0..nb {
                    m[i * nb + j] += c * phi[i] * phi[j];
                }
            }
        }
        Ok(())
    })
}

/// Lifted curvature: the Lagrange field solving the weighted mass problem.
#[derive(Clone, Debug)]
pub struct LiftedCurvature<'a> {
    pub field: LagrangeField<'a>,
    pub metric_degree: usize,
    pub lift_degree: usize,
}

/// Solves `int K_h u omega_h = K(g_h)(u) - kappa_N(u)` for all `u` vanishing
/// on the Dirichlet boundary, with `K_h` equal to the nodal interpolant of
/// the exact curvature at Dirichlet nodes.
pub fn lift_curvature<'a, G: TensorField + ?Sized, M: AnalyticMetric + ?Sized>(
    g_h: &G,
    metric_degree: usize,
    space: &'a LagrangeSpace,
    exact: &M,
    exactness: usize,
) -> Result<LiftedCurvature<'a>> {
    let gauss = assemble_gauss_functional(g_h, space, exactness)?;
    let neumann = assemble_neumann_functional(exact, space, exactness);
    let rhs = &gauss - &neumann;
    let mass = assemble_weighted_mass(space, g_h, exactness)?;
    let mask = space.dirichlet_mask();
    let values: Vec<f64> = space
        .node_points()
        .iter()
        .zip(mask)
        .map(|(&p, &d)| if d { exact.gauss_curvature(p) } else { 0.0 })
        .collect();
    let solver = SpdSolver::new(&mass, mask)?;
    let k = solver.solve(rhs.values(), &values, SOLVE_TOL)?;
    Ok(LiftedCurvature {
        field: LagrangeField::new(space, k),
        metric_degree,
        lift_degree: space.degree(),
    })
}
