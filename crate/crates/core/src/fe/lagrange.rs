use std::sync::Arc;

use crate::mesh::{BoundaryLabel, ElementMap, Mesh, Point, LOCAL_EDGES};
use crate::metric::ScalarJet;
use crate::poly::lattice_basis;
use crate::quadrature::TriangleRule;

use super::{physical_gradient, physical_hessian, ScalarField};

/// Nodal Lagrange element of degree `k` on the reference triangle.
///
/// Local node order: the three vertices, then `k - 1` nodes on each local
/// edge running from its lower to its higher local vertex, then interior
/// lattice nodes. Basis functions are evaluated in barycentric product form.
#[derive(Clone, Debug)]
pub struct LagrangeReference {
    degree: usize,
    nodes: Vec<Point>,
    /// Lattice multi-index of each node.
    alphas: Vec<[usize; 3]>,
}

impl LagrangeReference {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be at least 1");
        let k = degree;
        let kf = k as f64;
        let mut alphas: Vec<[usize; 3]> = vec![[k, 0, 0], [0, k, 0], [0, 0, k]];
        for [a, b] in LOCAL_EDGES {
            for s in 1..k {
                let mut al = [0; 3];
                al[a] = k - s;
                al[b] = s;
                alphas.push(al);
            }
        }
        for j in 1..k {
            for i in 1..k - j {
                alphas.push([k - i - j, i, j]);
            }
        }
        let nodes = alphas
            .iter()
            .map(|al| [al[1] as f64 / kf, al[2] as f64 / kf])
            .collect();
        LagrangeReference {
            degree,
            nodes,
            alphas,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn num_interior(&self) -> usize {
        if self.degree < 3 {
            0
        } else {
            (self.degree - 1) * (self.degree - 2) / 2
        }
    }

    /// Basis values and reference gradients.
    pub fn eval(&self, xi: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let jets = self.eval_jets(xi);
        (
            jets.iter().map(|j| j.val).collect(),
            jets.iter().map(|j| j.grad).collect(),
        )
    }

    /// Basis values, reference gradients and reference Hessians.
    pub fn eval_jets(&self, xi: Point) -> Vec<ScalarJet> {
        lattice_basis(self.degree, &self.alphas, xi)
    }

    /// Basis values and reference gradients at every point of `rule`.
    pub fn tabulate(&self, rule: &TriangleRule) -> Vec<(Vec<f64>, Vec<[f64; 2]>)> {
        rule.points().iter().map(|&p| self.eval(p)).collect()
    }
}

/// Continuous Lagrange space of degree `k` on a mesh.
///
/// Global numbering: vertices, then `k - 1` dofs per edge ordered along the
/// global edge orientation, then interior dofs element by element.
#[derive(Clone, Debug)]
pub struct LagrangeSpace {
    mesh: Arc<Mesh>,
    reference: LagrangeReference,
    element_dofs: Vec<Vec<usize>>,
    maps: Vec<ElementMap>,
    node_points: Vec<Point>,
    dirichlet: Vec<bool>,
    boundary: Vec<bool>,
}

impl LagrangeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Self {
        let reference = LagrangeReference::new(degree);
        let k = degree;
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let per_edge = k - 1;
        let per_cell = reference.num_interior();
        let ndofs = nv + ne * per_edge + mesh.num_triangles() * per_cell;
        let maps: Vec<_> = (0..mesh.num_triangles()).map(|t| mesh.element_map(t)).collect();

        let mut element_dofs = Vec::with_capacity(mesh.num_triangles());
        let mut node_points = vec![[0.0; 2]; ndofs];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut dofs = Vec::with_capacity(reference.num_basis());
            dofs.extend_from_slice(tri);
            for (le, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let e = mesh.triangle_edges[t][le];
                let forward = tri[*a] < tri[*b];
                for s in 1..k {
                    let pos = if forward { s } else { k - s };
                    dofs.push(nv + e * per_edge + pos - 1);
                }
            }
            for i in 0..per_cell {
                dofs.push(nv + ne * per_edge + t * per_cell + i);
            }
            for (local, &d) in dofs.iter().enumerate() {
                node_points[d] = maps[t].map(reference.nodes[local]);
            }
            element_dofs.push(dofs);
        }

        let mut dirichlet = vec![false; ndofs];
        let mut boundary = vec![false; ndofs];
        for (e, edge) in mesh.edges.iter().enumerate() {
            let Some(label) = edge.label() else { continue };
            let mut mark = |d: usize| {
                boundary[d] = true;
                if label == BoundaryLabel::Dirichlet {
                    dirichlet[d] = true;
                }
            };
            mark(edge.vertices[0]);
            mark(edge.vertices[1]);
            for s in 0..per_edge {
                mark(nv + e * per_edge + s);
            }
        }

        LagrangeSpace {
            mesh,
            reference,
            element_dofs,
            maps,
            node_points,
            dirichlet,
            boundary,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    pub fn reference(&self) -> &LagrangeReference {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.node_points.len()
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t]
    }

    pub fn element_map(&self, t: usize) -> &ElementMap {
        &self.maps[t]
    }

    /// Physical coordinates of each global nodal dof.
    pub fn node_points(&self) -> &[Point] {
        &self.node_points
    }

    /// Dofs on Dirichlet-labelled boundary edges, endpoints included.
    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    /// Dofs anywhere on the boundary.
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Basis values and physical gradients of element `t` at `xi`.
    pub fn eval(&self, t: usize, xi: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (val, grad) = self.reference.eval(xi);
        let inv = &self.maps[t].inv;
        (val, grad.into_iter().map(|g| physical_gradient(inv, g)).collect())
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> LagrangeField<'_> {
        let values = self.node_points.iter().map(|&p| f(p)).collect();
        LagrangeField::new(self, values)
    }

    pub fn zero(&self) -> LagrangeField<'_> {
        LagrangeField::new(self, vec![0.0; self.dim()])
    }
}

/// A coefficient vector in a Lagrange space.
#[derive(Clone, Debug)]
pub struct LagrangeField<'a> {
    space: &'a LagrangeSpace,
    values: Vec<f64>,
}

impl<'a> LagrangeField<'a> {
    pub fn new(space: &'a LagrangeSpace, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.dim(), "coefficient vector length");
        LagrangeField { space, values }
    }

    pub fn space(&self) -> &'a LagrangeSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, t: usize, xi: Point) -> f64 {
        self.reference_jet(t, xi).val
    }

    fn reference_jet(&self, t: usize, xi: Point) -> ScalarJet {
        let mut out = ScalarJet::default();
        let basis = self.space.reference.eval_jets(xi);
        for (b, &d) in basis.iter().zip(&self.space.element_dofs[t]) {
            let c = self.values[d];
            out.val += c * b.val;
            for a in 0..2 {
                out.grad[a] += c * b.grad[a];
                for e in 0..2 {
                    out.hess[a][e] += c * b.hess[a][e];
                }
            }
        }
        out
    }
}

impl ScalarField for LagrangeField<'_> {
    fn jet(&self, t: usize, xi: Point) -> ScalarJet {
        let r = self.reference_jet(t, xi);
        let inv = &self.space.maps[t].inv;
        ScalarJet {
            val: r.val,
            grad: physical_gradient(inv, r.grad),
            hess: physical_hessian(inv, r.hess),
        }
    }
}

/// `(k 2^l + 1)^2`, the dimension on the structured level-`l` mesh.
pub fn structured_dim(degree: usize, level: u32) -> usize {
    let n = degree * (1usize << level) + 1;
    n * n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_property() {
        for k in 1..=5 {
            let r = LagrangeReference::new(k);
            for (i, &p) in r.nodes().iter().enumerate() {
                let (v, _) = r.eval(p);
                for (j, &vj) in v.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((vj - expected).abs() < 1e-11, "k={k} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn linear_at_origin() {
        let (v, _) = LagrangeReference::new(1).eval([0.0, 0.0]);
        assert_eq!(v.len(), 3);
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn quadratic_edge_midpoint() {
        let r = LagrangeReference::new(2);
        // local node 3 sits on edge 0, between (1,0) and (0,1)
        let (v, _) = r.eval([0.5, 0.5]);
        for (j, &vj) in v.iter().enumerate() {
            let expected = if j == 3 { 1.0 } else { 0.0 };
            assert!((vj - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn partition_of_unity() {
        for k in 1..=6 {
            let r = LagrangeReference::new(k);
            for p in [[0.1, 0.2], [0.7, 0.05], [0.3, 0.3]] {
                let (v, g) = r.eval(p);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-11);
                let gs = g.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
                assert!(gs[0].abs() < 1e-9 && gs[1].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn structured_dimensions() {
        for k in 1..=3 {
            for level in 0..=4 {
                let mesh = Arc::new(Mesh::structured_square(level));
                let space = LagrangeSpace::new(mesh, k);
                assert_eq!(space.dim(), structured_dim(k, level));
            }
        }
    }

    #[test]
    fn continuity_across_edges() {
        let mesh = Arc::new(Mesh::structured_square(2).perturb_interior(3).unwrap());
        let space = LagrangeSpace::new(mesh.clone(), 3);
        let values: Vec<f64> = (0..space.dim()).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let u = LagrangeField::new(&space, values);
        for e in mesh.edges.iter().filter(|e| !e.is_boundary()) {
            let [p, q] = e.vertices.map(|v| mesh.vertices[v]);
            for s in [0.13, 0.5, 0.81] {
                let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                let vals: Vec<f64> = e
                    .incident()
                    .map(|t| {
                        let m = space.element_map(t);
                        let d = [x[0] - m.origin[0], x[1] - m.origin[1]];
                        let xi = [
                            m.inv[0][0] * d[0] + m.inv[0][1] * d[1],
                            m.inv[1][0] * d[0] + m.inv[1][1] * d[1],
                        ];
                        u.value(t, xi)
                    })
                    .collect();
                assert!((vals[0] - vals[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolates_linear_exactly() {
        let mesh = Arc::new(Mesh::structured_square(2).perturb_interior(1).unwrap());
        let space = LagrangeSpace::new(mesh, 1);
        let u = space.interpolate(|p| p[0]);
        for t in 0..space.mesh().num_triangles() {
            let m = space.element_map(t);
            let xi = [0.2, 0.3];
            let j = u.jet(t, xi);
            assert!((j.val - m.map(xi)[0]).abs() < 1e-14);
            assert!((j.grad[0] - 1.0).abs() < 1e-12 && j.grad[1].abs() < 1e-12);
        }
        let z = space.zero();
        let j = z.jet(0, [0.1, 0.1]);
        assert_eq!(j, ScalarJet::default());
    }

    #[test]
    fn dirichlet_and_boundary_masks() {
        let mesh = Arc::new(Mesh::structured_square(1));
        let space = LagrangeSpace::new(mesh, 2);
        let n_boundary = space.boundary_mask().iter().filter(|&&b| b).count();
        // 5 x 5 lattice: 16 boundary nodes; right and bottom sides: 9
        assert_eq!(n_boundary, 16);
        assert_eq!(space.dirichlet_mask().iter().filter(|&&b| b).count(), 9);
        for (d, p) in space.node_points().iter().enumerate() {
            let on_d = p[0] == 1.0 || p[1] == 0.0;
            assert_eq!(space.dirichlet_mask()[d], on_d, "node {p:?}");
        }
    }
}
