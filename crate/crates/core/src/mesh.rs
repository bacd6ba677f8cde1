//! Conforming triangle meshes of the unit square with labelled boundary.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Boundary condition carried by a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Dirichlet,
    Neumann,
}

/// Which side of the unit square a boundary edge lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    /// Right and bottom are Dirichlet, left and top are Neumann.
    pub fn label(self) -> BoundaryLabel {
        match self {
            Side::Right | Side::Bottom => BoundaryLabel::Dirichlet,
            Side::Left | Side::Top => BoundaryLabel::Neumann,
        }
    }
}

/// An edge with global orientation from `vertices[0]` to `vertices[1]`,
/// `vertices[0] < vertices[1]`.
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Incident triangles; the second is `None` on the boundary.
    pub triangles: [Option<usize>; 2],
    pub side: Option<Side>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }

    pub fn label(&self) -> Option<BoundaryLabel> {
        self.side.map(Side::label)
    }

    pub fn incident(&self) -> impl Iterator<Item = usize> + '_ {
        self.triangles.iter().flatten().copied()
    }
}

/// Affine map from the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Copy, Debug)]
pub struct ElementMap {
    pub origin: Point,
    /// Jacobian, `jac[i][j] = d x_i / d xi_j`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub inv: [[f64; 2]; 2],
}

impl ElementMap {
    pub fn from_vertices(p: [Point; 3]) -> Self {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        ElementMap {
            origin: p[0],
            jac,
            det,
            inv,
        }
    }

    pub fn map(&self, xi: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// Physical vector `F v` for a reference vector `v`.
    pub fn push_vector(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.jac[0][0] * v[0] + self.jac[0][1] * v[1],
            self.jac[1][0] * v[0] + self.jac[1][1] * v[1],
        ]
    }
}

/// Per-side Euclidean frame of an edge.
#[derive(Clone, Copy, Debug)]
pub struct SideFrame {
    pub triangle: usize,
    /// Unit tangent along the global edge orientation.
    pub tangent: [f64; 2],
    /// Unit normal pointing into `triangle`.
    pub normal: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Global edge index of the local edge opposite local vertex `i`.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Structured refinement level the mesh was built at.
    pub level: u32,
}

/// Local edges of a triangle as local vertex pairs, edge `i` opposite vertex `i`.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];

impl Mesh {
    /// Unit square split into a `2^level x 2^level` grid, each cell cut along
    /// its lower-left to upper-right diagonal.
    pub fn structured_square(level: u32) -> Mesh {
        let n = 1usize << level;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Mesh::from_triangles(vertices, triangles, level)
    }

    fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, level: u32) -> Mesh {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (le, pair) in LOCAL_EDGES.iter().enumerate() {
                let (a, b) = (tri[pair[0]], tri[pair[1]]);
                let key = [a.min(b), a.max(b)];
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        triangles: [None, None],
                        side: None,
                    });
                    edges.len() - 1
                });
                let slot = if edges[e].triangles[0].is_none() { 0 } else { 1 };
                edges[e].triangles[slot] = Some(t);
                te[le] = e;
            }
            triangle_edges.push(te);
        }
        for edge in edges.iter_mut().filter(|e| e.triangles[1].is_none()) {
            let [p, q] = edge.vertices.map(|v| vertices[v]);
            edge.side = Some(if p[0] == 0.0 && q[0] == 0.0 {
                Side::Left
            } else if p[0] == 1.0 && q[0] == 1.0 {
                Side::Right
            } else if p[1] == 0.0 && q[1] == 0.0 {
                Side::Bottom
            } else {
                Side::Top
            });
        }
        Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            level,
        }
    }

    /// Moves every interior vertex by an independent uniform sample in
    /// `[-h / 2^2.5, h / 2^2.5]` per coordinate.
    ///
    /// Samples come from ChaCha8 seeded with `seed` through
    /// `SeedableRng::seed_from_u64`, drawn x then y for each interior vertex
    /// in index order.
    pub fn perturb_interior(&self, seed: u64) -> Result<Mesh> {
        let amplitude = self.max_diameter() / 2f64.powf(2.5);
        let boundary = self.boundary_vertex_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for (v, p) in out.vertices.iter_mut().enumerate() {
            if boundary[v] {
                continue;
            }
            p[0] += rng.random_range(-amplitude..=amplitude);
            p[1] += rng.random_range(-amplitude..=amplitude);
        }
        out.check_orientation()?;
        Ok(out)
    }

    pub fn check_orientation(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let area = self.signed_area(t);
            if area <= 0.0 {
                return Err(Error::DegenerateElement { element: t, area });
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn element_map(&self, t: usize) -> ElementMap {
        ElementMap::from_vertices(self.triangle_points(t))
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        0.5 * self.element_map(t).det
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        LOCAL_EDGES
            .iter()
            .map(|&[a, b]| dist(p[a], p[b]))
            .fold(0.0, f64::max)
    }

    /// Largest element diameter; `sqrt(2) 2^-level` before perturbation.
    pub fn max_diameter(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vertices()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            mask[e.vertices[0]] = true;
            mask[e.vertices[1]] = true;
        }
        mask
    }

    /// Euclidean frames of `edge` seen from each incident triangle.
    pub fn edge_frames(&self, edge: usize) -> Vec<SideFrame> {
        let e = &self.edges[edge];
        let [p, q] = e.vertices.map(|v| self.vertices[v]);
        let len = dist(p, q);
        let tangent = [(q[0] - p[0]) / len, (q[1] - p[1]) / len];
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        e.incident()
            .map(|t| {
                let c = centroid(self.triangle_points(t));
                let mut normal = [-tangent[1], tangent[0]];
                if normal[0] * (c[0] - mid[0]) + normal[1] * (c[1] - mid[1]) < 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
                SideFrame {
                    triangle: t,
                    tangent,
                    normal,
                }
            })
            .collect()
    }

    /// Plain-text dump: `x y` per vertex, `i j k` per triangle, then
    /// `i j LABEL` per boundary edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# vertices {}", self.num_vertices());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(s, "# triangles {}", self.num_triangles());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let boundary: Vec<_> = self.edges.iter().filter(|e| e.is_boundary()).collect();
        let _ = writeln!(s, "# boundary {}", boundary.len());
        for e in boundary {
            let label = match e.label() {
                Some(BoundaryLabel::Dirichlet) => "DIRICHLET",
                _ => "NEUMANN",
            };
            let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], label);
        }
        s
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn dist(p: Point, q: Point) -> f64 {
    ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
}

fn centroid(p: [Point; 3]) -> Point {
    [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ]
}
