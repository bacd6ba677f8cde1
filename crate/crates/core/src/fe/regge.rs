use std::sync::Arc;

use nalgebra::DMatrix;

use crate::analytic::AnalyticMetric;
use crate::error::{Error, Result};
use crate::mesh::{ElementMap, Mesh, Point, LOCAL_EDGES};
use crate::metric::{bilinear, Mat2, MetricJet};
use crate::par;
use crate::poly::{dim_p, lattice, lattice_basis, legendre};
use crate::quadrature::{segment_rule, triangle_rule};

use super::{congruence, TensorField};

const REF_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn sym(c: [f64; 3]) -> Mat2 {
    [[c[0], c[1]], [c[1], c[2]]]
}

/// Reference Regge element of degree `k`: symmetric matrix fields with
/// components in `P^k`, with the dual basis of the moment functionals
///
/// * `int_0^1 s(v_a + t e)(e, e) q_j(t) dt` with the orthonormal Legendre
///   polynomials `q_j`, `j = 0..=k`, for each local edge `e = v_b - v_a`,
/// * `int_T s_c q dxi` for the components `c in {11, 12, 22}` and an
///   orthonormal basis `q` of `P^{k-1}`.
///
/// Each component is expanded in the degree-`k` nodal basis, which keeps
/// the dual basis well conditioned.
#[derive(Clone, Debug)]
pub struct ReggeReference {
    degree: usize,
    alphas: Vec<[usize; 3]>,
    tests: Option<InteriorTests>,
    /// Row `c * nnodes + m` holds the coefficient of nodal function `m` in
    /// component `c` for each dual basis function (column).
    dual: DMatrix<f64>,
}

impl ReggeReference {
    pub fn new(degree: usize) -> Result<Self> {
        let k = degree;
        let alphas = lattice(k);
        let tests = InteriorTests::new(k)?;
        let nm = alphas.len();
        let n = 3 * nm;
        let mut moments = DMatrix::zeros(n, n);
        // primal basis: component c set to nodal function m
        for c in 0..3 {
            for m in 0..nm {
                let col = c * nm + m;
                let mut coef = [0.0; 3];
                coef[c] = 1.0;
                let dofs = reference_dofs(k, tests.as_ref(), |p| {
                    let v = lattice_basis(k, &alphas[m..=m], p)[0].val;
                    sym(coef.map(|x| x * v))
                });
                for (row, d) in dofs.into_iter().enumerate() {
                    moments[(row, col)] = d;
                }
            }
        }
        let mut dual = moments
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMomentSystem { degree })?;
        // one step of iterative refinement
        let residual = DMatrix::identity(n, n) - &moments * &dual;
        dual += &dual * residual;
        Ok(ReggeReference {
            degree,
            alphas,
            tests,
            dual,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        3 * self.alphas.len()
    }

    pub fn num_edge_dofs(&self) -> usize {
        self.degree + 1
    }

    pub fn num_interior(&self) -> usize {
        3 * self.degree * (self.degree + 1) / 2
    }

    /// Reference jets of every dual basis function at `xi`.
    pub fn eval(&self, xi: Point) -> Vec<MetricJet> {
        (0..self.num_basis())
            .map(|j| {
                let col: Vec<f64> = (0..self.num_basis()).map(|r| self.dual[(r, j)]).collect();
                poly_jet(self.degree, &self.alphas, &col, xi)
            })
            .collect()
    }

    fn local_poly(&self, local: &[f64]) -> Vec<f64> {
        let n = self.num_basis();
        (0..n)
            .map(|r| (0..n).map(|j| self.dual[(r, j)] * local[j]).sum())
            .collect()
    }
}

/// `sqrt(2j + 1) P_j(2t - 1)` for `j = 0..=k`, orthonormal on `[0, 1]`.
fn edge_tests(k: usize, t: f64) -> Vec<f64> {
    legendre(k, 2.0 * t - 1.0)
        .into_iter()
        .enumerate()
        .map(|(j, p)| (2.0 * j as f64 + 1.0).sqrt() * p)
        .collect()
}

/// `L^2`-orthonormal basis of `P^{k-1}` on the reference triangle, as a
/// Cholesky transform of the degree `k - 1` nodal basis.
#[derive(Clone, Debug)]
struct InteriorTests {
    degree: usize,
    alphas: Vec<[usize; 3]>,
    transform: DMatrix<f64>,
}

impl InteriorTests {
    fn new(k: usize) -> Result<Option<Self>> {
        if k == 0 {
            return Ok(None);
        }
        let degree = k - 1;
        let alphas = lattice(degree);
        let n = alphas.len();
        let rule = triangle_rule(2 * degree);
        let mut gram = DMatrix::zeros(n, n);
        for (p, w) in rule.iter() {
            let b = lattice_basis(degree, &alphas, p);
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * b[i].val * b[j].val;
                }
            }
        }
        let chol = gram
            .cholesky()
            .ok_or(Error::SingularMomentSystem { degree: k })?;
        let transform = chol
            .l()
            .try_inverse()
            .ok_or(Error::SingularMomentSystem { degree: k })?;
        Ok(Some(InteriorTests {
            degree,
            alphas,
            transform,
        }))
    }

    fn len(&self) -> usize {
        self.alphas.len()
    }

    fn values(&self, p: Point) -> Vec<f64> {
        let b = lattice_basis(self.degree, &self.alphas, p);
        (0..self.len())
            .map(|i| (0..=i).map(|j| self.transform[(i, j)] * b[j].val).sum())
            .collect()
    }
}

/// Moment functionals of a reference field, in dof order.
fn reference_dofs(
    k: usize,
    tests: Option<&InteriorTests>,
    field: impl Fn(Point) -> Mat2,
) -> Vec<f64> {
    let seg = segment_rule(2 * k + 2);
    let tri = triangle_rule(2 * k + 2);
    let mut out = Vec::with_capacity(3 * dim_p(k));
    for [a, b] in LOCAL_EDGES {
        let (pa, pb) = (REF_VERTICES[a], REF_VERTICES[b]);
        let e = [pb[0] - pa[0], pb[1] - pa[1]];
        let mut acc = vec![0.0; k + 1];
        for ([t], w) in seg.iter() {
            let s = field([pa[0] + t * e[0], pa[1] + t * e[1]]);
            let stt = bilinear(s, e, e);
            for (j, p) in edge_tests(k, t).into_iter().enumerate() {
                acc[j] += w * stt * p;
            }
        }
        out.extend(acc);
    }
    if let Some(tests) = tests {
        out.extend(interior_moments(tests, &tri, &field));
    }
    out
}

fn interior_moments(
    tests: &InteriorTests,
    tri: &crate::quadrature::TriangleRule,
    field: &impl Fn(Point) -> Mat2,
) -> Vec<f64> {
    let nm = tests.len();
    let mut acc = vec![0.0; 3 * nm];
    for (p, w) in tri.iter() {
        let s = field(p);
        let comps = [s[0][0], s[0][1], s[1][1]];
        let q = tests.values(p);
        for c in 0..3 {
            for m in 0..nm {
                acc[c * nm + m] += w * comps[c] * q[m];
            }
        }
    }
    acc
}

fn poly_jet(degree: usize, alphas: &[[usize; 3]], coeffs: &[f64], xi: Point) -> MetricJet {
    let nm = alphas.len();
    let basis = lattice_basis(degree, alphas, xi);
    let mut val = [0.0; 3];
    let mut d = [[0.0; 3]; 2];
    let mut dd = [[[0.0; 3]; 2]; 2];
    for c in 0..3 {
        for (m, b) in basis.iter().enumerate() {
            let a = coeffs[c * nm + m];
            val[c] += a * b.val;
            for p in 0..2 {
                d[p][c] += a * b.grad[p];
                for q in 0..2 {
                    dd[p][q][c] += a * b.hess[p][q];
                }
            }
        }
    }
    MetricJet {
        g: sym(val),
        dg: d.map(sym),
        d2g: dd.map(|r| r.map(sym)),
    }
}

/// Covariant pullback of a reference jet through an affine map:
/// `s = F^-T s_ref F^-1`, derivatives by the chain rule.
pub(crate) fn pull_back(map: &ElementMap, r: &MetricJet) -> MetricJet {
    let g = &map.inv;
    let val = congruence(g, r.g);
    let dref = [congruence(g, r.dg[0]), congruence(g, r.dg[1])];
    let ddref = [
        [congruence(g, r.d2g[0][0]), congruence(g, r.d2g[0][1])],
        [congruence(g, r.d2g[1][0]), congruence(g, r.d2g[1][1])],
    ];
    let mut out = MetricJet {
        g: val,
        ..Default::default()
    };
    for k in 0..2 {
        for m in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out.dg[k][i][j] += g[m][k] * dref[m][i][j];
                }
            }
        }
    }
    for k in 0..2 {
        for l in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let c = g[m][k] * g[n][l];
                    for i in 0..2 {
                        for j in 0..2 {
                            out.d2g[k][l][i][j] += c * ddref[m][n][i][j];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Regge space of degree `k`: `k + 1` shared tangential-tangential moments
/// per edge and `3 k (k + 1) / 2` interior moments per triangle.
///
/// Edge moments use Legendre polynomials in the parameter running along the
/// global edge orientation; an element whose local edge runs the other way
/// sees moment `j` with sign `(-1)^j`.
#[derive(Clone, Debug)]
pub struct ReggeSpace {
    mesh: Arc<Mesh>,
    reference: ReggeReference,
    element_dofs: Vec<Vec<(usize, f64)>>,
    maps: Vec<ElementMap>,
    dim: usize,
}

impl ReggeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        let reference = ReggeReference::new(degree)?;
        let ne = mesh.num_edges();
        let per_edge = reference.num_edge_dofs();
        let per_cell = reference.num_interior();
        let dim = ne * per_edge + mesh.num_triangles() * per_cell;
        let maps = (0..mesh.num_triangles()).map(|t| mesh.element_map(t)).collect();
        let element_dofs = mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(t, tri)| {
                let mut dofs = Vec::with_capacity(reference.num_basis());
                for (le, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                    let e = mesh.triangle_edges[t][le];
                    let forward = tri[*a] < tri[*b];
                    for j in 0..per_edge {
                        let sign = if forward || j % 2 == 0 { 1.0 } else { -1.0 };
                        dofs.push((e * per_edge + j, sign));
                    }
                }
                for i in 0..per_cell {
                    dofs.push((ne * per_edge + t * per_cell + i, 1.0));
                }
                dofs
            })
            .collect();
        Ok(ReggeSpace {
            mesh,
            reference,
            element_dofs,
            maps,
            dim,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    pub fn reference(&self) -> &ReggeReference {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Global dof and orientation sign of each local basis function.
    pub fn element_dofs(&self, t: usize) -> &[(usize, f64)] {
        &self.element_dofs[t]
    }

    pub fn element_map(&self, t: usize) -> &ElementMap {
        &self.maps[t]
    }

    /// Physical jets of the signed global basis functions on element `t`,
    /// paired with their global dof.
    pub fn eval_basis(&self, t: usize, xi: Point) -> Vec<(usize, MetricJet)> {
        let map = &self.maps[t];
        self.reference
            .eval(xi)
            .iter()
            .zip(&self.element_dofs[t])
            .map(|(r, &(d, sign))| (d, sign * pull_back(map, r)))
            .collect()
    }

    /// Canonical interpolant: edge moments of the tangential-tangential
    /// component and interior moments, evaluated with quadrature of
    /// exactness `2k + 6`.
    pub fn interpolate<M: AnalyticMetric + ?Sized>(&self, metric: &M) -> ReggeField<'_> {
        self.interpolate_with(|p| metric.jet(p).g, 2 * self.degree() + 6)
    }

    pub fn interpolate_with(
        &self,
        field: impl Fn(Point) -> Mat2 + Sync,
        exactness: usize,
    ) -> ReggeField<'_> {
        let values = self.global_moments(
            |_, p| field(p),
            |t, xi| field(self.maps[t].map(xi)),
            exactness,
        );
        ReggeField::new(self, values)
    }

    /// Largest absolute difference between the dof functionals of `field`
    /// and those of `exact`, both evaluated with quadrature of the given
    /// exactness.
    pub fn moment_residual(
        &self,
        field: &ReggeField<'_>,
        exact: impl Fn(Point) -> Mat2 + Sync,
        exactness: usize,
    ) -> f64 {
        let reference = self.global_moments(
            |_, p| exact(p),
            |t, xi| exact(self.maps[t].map(xi)),
            exactness,
        );
        let discrete = self.global_moments(
            |e, p| {
                let t = self.mesh.edges[e].triangles[0].expect("edge has a triangle");
                let map = &self.maps[t];
                let d = [p[0] - map.origin[0], p[1] - map.origin[1]];
                let xi = [
                    map.inv[0][0] * d[0] + map.inv[0][1] * d[1],
                    map.inv[1][0] * d[0] + map.inv[1][1] * d[1],
                ];
                field.jet(t, xi).g
            },
            |t, xi| field.jet(t, xi).g,
            exactness,
        );
        reference
            .iter()
            .zip(&discrete)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Global dof functionals of a field given on edges (physical points)
    /// and on elements (reference points).
    fn global_moments(
        &self,
        on_edge: impl Fn(usize, Point) -> Mat2 + Sync,
        on_cell: impl Fn(usize, Point) -> Mat2 + Sync,
        exactness: usize,
    ) -> Vec<f64> {
        let k = self.degree();
        let per_edge = self.reference.num_edge_dofs();
        let per_cell = self.reference.num_interior();
        let ne = self.mesh.num_edges();
        let seg = segment_rule(exactness);
        let tri = triangle_rule(exactness);

        let edge_vals = par::map_range(ne, |e| {
            let [p, q] = self.mesh.edges[e].vertices.map(|v| self.mesh.vertices[v]);
            let d = [q[0] - p[0], q[1] - p[1]];
            let mut acc = vec![0.0; per_edge];
            for ([t], w) in seg.iter() {
                let stt = bilinear(on_edge(e, [p[0] + t * d[0], p[1] + t * d[1]]), d, d);
                for (j, l) in edge_tests(k, t).into_iter().enumerate() {
                    acc[j] += w * stt * l;
                }
            }
            acc
        });
        let cell_vals = par::map_range(self.mesh.num_triangles(), |t| {
            let Some(tests) = self.reference.tests.as_ref() else {
                return Vec::new();
            };
            let jac = &self.maps[t].jac;
            // pulled-back field F^T s F
            let pulled = |xi: Point| congruence(jac, on_cell(t, xi));
            interior_moments(tests, &tri, &pulled)
        });

        let mut values = vec![0.0; self.dim];
        for (e, v) in edge_vals.into_iter().enumerate() {
            values[e * per_edge..(e + 1) * per_edge].copy_from_slice(&v);
        }
        for (t, v) in cell_vals.into_iter().enumerate() {
            let o = ne * per_edge + t * per_cell;
            values[o..o + per_cell].copy_from_slice(&v);
        }
        values
    }
}

/// A coefficient vector in a Regge space.
#[derive(Clone, Debug)]
pub struct ReggeField<'a> {
    space: &'a ReggeSpace,
    values: Vec<f64>,
    polys: Vec<Vec<f64>>,
}

impl<'a> ReggeField<'a> {
    pub fn new(space: &'a ReggeSpace, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.dim(), "coefficient vector length");
        let polys = (0..space.mesh.num_triangles())
            .map(|t| {
                let local: Vec<f64> = space.element_dofs[t]
                    .iter()
                    .map(|&(d, s)| s * values[d])
                    .collect();
                space.reference.local_poly(&local)
            })
            .collect();
        ReggeField {
            space,
            values,
            polys,
        }
    }

    pub fn space(&self) -> &'a ReggeSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TensorField for ReggeField<'_> {
    fn jet(&self, t: usize, xi: Point) -> MetricJet {
        let r = &self.space.reference;
        let r = poly_jet(r.degree, &r.alphas, &self.polys[t], xi);
        pull_back(&self.space.maps[t], &r)
    }
}
