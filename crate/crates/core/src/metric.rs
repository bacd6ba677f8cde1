//! Pointwise Riemannian kernels in coordinates.
//!
//! Index conventions: `dg[k][i][j] = d_k g_ij`, `d2g[l][k][i][j] =
//! d_l d_k g_ij`, `gamma[i][j][k] = Gamma^i_jk`. The permutation symbol has
//! `eps[0][1] = +1`, matching the counterclockwise orientation of the
//! coordinate frame.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];
pub type Christoffel = [[[f64; 2]; 2]; 2];

pub const EPS: Mat2 = [[0.0, 1.0], [-1.0, 0.0]];

/// A symmetric 2-tensor field with first and second partial derivatives at
/// one point. Used both for metrics and for the tensors they act on.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricJet {
    pub g: Mat2,
    pub dg: [Mat2; 2],
    pub d2g: [[Mat2; 2]; 2],
}

/// Jet of a symmetric tensor that is not playing the role of a metric.
pub type TensorJet = MetricJet;

/// Scalar field with gradient and Hessian.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarJet {
    pub val: f64,
    pub grad: Vec2,
    pub hess: Mat2,
}

fn zip_mat(a: Mat2, b: Mat2, f: impl Fn(f64, f64) -> f64) -> Mat2 {
    [
        [f(a[0][0], b[0][0]), f(a[0][1], b[0][1])],
        [f(a[1][0], b[1][0]), f(a[1][1], b[1][1])],
    ]
}

impl MetricJet {
    pub fn constant(g: Mat2) -> Self {
        MetricJet {
            g,
            ..Default::default()
        }
    }

    pub fn identity() -> Self {
        Self::constant([[1.0, 0.0], [0.0, 1.0]])
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        MetricJet {
            g: zip_mat(self.g, o.g, f),
            dg: [0, 1].map(|k| zip_mat(self.dg[k], o.dg[k], f)),
            d2g: [0, 1].map(|l| [0, 1].map(|k| zip_mat(self.d2g[l][k], o.d2g[l][k], f))),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.zip(self, |a, _| c * a)
    }

    pub fn det(&self) -> f64 {
        det(self.g)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g[0][0] > 0.0 && self.det() > 0.0
    }
}

impl Add for MetricJet {
    type Output = MetricJet;
    fn add(self, o: Self) -> Self {
        self.zip(&o, |a, b| a + b)
    }
}

impl Sub for MetricJet {
    type Output = MetricJet;
    fn sub(self, o: Self) -> Self {
        self.zip(&o, |a, b| a - b)
    }
}

impl Mul<MetricJet> for f64 {
    type Output = MetricJet;
    fn mul(self, o: MetricJet) -> MetricJet {
        o.scale(self)
    }
}

impl Mul<ScalarJet> for f64 {
    type Output = ScalarJet;
    fn mul(self, o: ScalarJet) -> ScalarJet {
        ScalarJet {
            val: self * o.val,
            grad: o.grad.map(|v| self * v),
            hess: o.hess.map(|r| r.map(|v| self * v)),
        }
    }
}

pub fn det(m: Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inverse(m: Mat2) -> Mat2 {
    let d = det(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

/// `a^T M b`.
pub fn bilinear(m: Mat2, a: Vec2, b: Vec2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

pub fn mat_vec(m: Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `Gamma_{l,jk} = (d_j g_lk + d_k g_lj - d_l g_jk) / 2`.
fn christoffel_first_kind(jet: &MetricJet) -> Christoffel {
    let mut c = [[[0.0; 2]; 2]; 2];
    for l in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                c[l][j][k] = 0.5 * (jet.dg[j][l][k] + jet.dg[k][l][j] - jet.dg[l][j][k]);
            }
        }
    }
    c
}

/// Levi-Civita connection coefficients `Gamma^i_jk`.
pub fn christoffel(jet: &MetricJet) -> Christoffel {
    let ginv = inverse(jet.g);
    let first = christoffel_first_kind(jet);
    let mut c = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                c[i][j][k] = (0..2).map(|l| ginv[i][l] * first[l][j][k]).sum();
            }
        }
    }
    c
}

/// `dgamma[m][i][j][k] = d_m Gamma^i_jk`.
pub fn christoffel_derivative(jet: &MetricJet) -> [Christoffel; 2] {
    let ginv = inverse(jet.g);
    let first = christoffel_first_kind(jet);
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for m in 0..2 {
        // d_m g^{il} = -g^{ia} d_m g_ab g^{bl}
        let mut dginv = [[0.0; 2]; 2];
        for i in 0..2 {
            for l in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s -= ginv[i][a] * jet.dg[m][a][b] * ginv[b][l];
                    }
                }
                dginv[i][l] = s;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        let dfirst = 0.5
                            * (jet.d2g[m][j][l][k] + jet.d2g[m][k][l][j] - jet.d2g[m][l][j][k]);
                        s += dginv[i][l] * first[l][j][k] + ginv[i][l] * dfirst;
                    }
                    out[m][i][j][k] = s;
                }
            }
        }
    }
    out
}

/// Gauss curvature `R_1221 / det g` with
/// `R(d1, d2) d2 = (d1 G^l_22 - d2 G^l_12 + G^l_1m G^m_22 - G^l_2m G^m_12) d_l`.
pub fn gauss_curvature(jet: &MetricJet) -> f64 {
    let gam = christoffel(jet);
    let dgam = christoffel_derivative(jet);
    let mut r = 0.0;
    for l in 0..2 {
        let mut v = dgam[0][l][1][1] - dgam[1][l][0][1];
        for m in 0..2 {
            v += gam[l][0][m] * gam[m][1][1] - gam[l][1][m] * gam[m][0][1];
        }
        r += jet.g[l][0] * v;
    }
    r / jet.det()
}

/// Fully lowered Riemann tensor `R[a][b][c][d] = g(R(d_a, d_b) d_c, d_d)`.
pub fn riemann_lowered(jet: &MetricJet) -> [[[[f64; 2]; 2]; 2]; 2] {
    let gam = christoffel(jet);
    let dgam = christoffel_derivative(jet);
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let mut up = [0.0; 2];
                for (l, u) in up.iter_mut().enumerate() {
                    *u = dgam[a][l][b][c] - dgam[b][l][a][c];
                    for m in 0..2 {
                        *u += gam[l][a][m] * gam[m][b][c] - gam[l][b][m] * gam[m][a][c];
                    }
                }
                for d in 0..2 {
                    out[a][b][c][d] = (0..2).map(|l| jet.g[l][d] * up[l]).sum();
                }
            }
        }
    }
    out
}

/// `R(X, Y, Y, X) / (g(X,X) g(Y,Y) - g(X,Y)^2)` for independent `X`, `Y`.
pub fn sectional_curvature(jet: &MetricJet, x: Vec2, y: Vec2) -> f64 {
    let r = riemann_lowered(jet);
    let mut num = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    num += r[a][b][c][d] * x[a] * y[b] * y[c] * x[d];
                }
            }
        }
    }
    let (xx, yy, xy) = (bilinear(jet.g, x, x), bilinear(jet.g, y, y), bilinear(jet.g, x, y));
    num / (xx * yy - xy * xy)
}

/// Euclidean and metric-normalized frame along a straight edge.
#[derive(Clone, Copy, Debug)]
pub struct EdgeFrame {
    /// Euclidean unit tangent.
    pub tau: Vec2,
    /// Euclidean unit normal, taken as a covector.
    pub nu: Vec2,
    /// `tau / sqrt(g(tau, tau))`.
    pub tau_hat: Vec2,
    /// `g^{-1} nu / sqrt(g^{-1}(nu, nu))`.
    pub n_hat: Vec2,
}

impl EdgeFrame {
    pub fn new(g: Mat2, tau: Vec2, nu: Vec2) -> Self {
        let gtt = bilinear(g, tau, tau);
        let ginv = inverse(g);
        let gnn = bilinear(ginv, nu, nu);
        let up = mat_vec(ginv, nu);
        EdgeFrame {
            tau,
            nu,
            tau_hat: tau.map(|t| t / gtt.sqrt()),
            n_hat: up.map(|n| n / gnn.sqrt()),
        }
    }

    /// Same edge seen from the other side.
    pub fn flipped_normal(&self) -> Self {
        EdgeFrame {
            nu: self.nu.map(|v| -v),
            n_hat: self.n_hat.map(|v| -v),
            ..*self
        }
    }
}

/// Signed geodesic curvature `g(nabla_tau_hat tau_hat, n_hat)` of the
/// straight line through the jet point with tangent `frame.tau`.
pub fn geodesic_curvature(jet: &MetricJet, frame: &EdgeFrame) -> f64 {
    let gam = christoffel(jet);
    let tau = frame.tau;
    let th = frame.tau_hat;
    let gtt = bilinear(jet.g, tau, tau);
    // derivative of g_tt along tau
    let dgtt: f64 = (0..2).map(|k| tau[k] * bilinear(jet.dg[k], tau, tau)).sum();
    let mut acc = [0.0; 2];
    for (i, a) in acc.iter_mut().enumerate() {
        // tau_hat^j d_j tau_hat^i
        *a = -0.5 * tau[i] * dgtt / (gtt * gtt);
        for j in 0..2 {
            for k in 0..2 {
                *a += gam[i][j][k] * th[j] * th[k];
            }
        }
    }
    bilinear(jet.g, acc, frame.n_hat)
}

/// Angle between `t1` and `t2` measured by `g`, in `[0, pi]`.
pub fn angle(g: Mat2, t1: Vec2, t2: Vec2) -> f64 {
    let cross = det(g).sqrt() * (t1[0] * t2[1] - t1[1] * t2[0]);
    cross.abs().atan2(bilinear(g, t1, t2))
}

/// `(sqrt(det g), sqrt(g(tau, tau)))`.
pub fn volume_densities(jet: &MetricJet, tau: Vec2) -> (f64, f64) {
    (jet.det().sqrt(), bilinear(jet.g, tau, tau).sqrt())
}

/// `(nabla_X sigma)(Y, Z)`.
pub fn covariant_derivative(
    jet: &MetricJet,
    sigma: &TensorJet,
    x: Vec2,
    y: Vec2,
    z: Vec2,
) -> f64 {
    let gam = christoffel(jet);
    let mut s = 0.0;
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut v = sigma.dg[k][i][j];
                for m in 0..2 {
                    v -= gam[m][k][i] * sigma.g[m][j] + gam[m][k][j] * sigma.g[i][m];
                }
                s += x[k] * y[i] * z[j] * v;
            }
        }
    }
    s
}

/// `A[j][i][k] = d_j sigma_ik - Gamma^m_ji sigma_mk`.
fn curl_integrand(gam: &Christoffel, sigma: &TensorJet) -> [[[f64; 2]; 2]; 2] {
    let mut a = [[[0.0; 2]; 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            for k in 0..2 {
                let mut v = sigma.dg[j][i][k];
                for m in 0..2 {
                    v -= gam[m][j][i] * sigma.g[m][k];
                }
                a[j][i][k] = v;
            }
        }
    }
    a
}

/// Covariant curl of a symmetric 2-tensor, a 1-form with components
/// `eps_hat^{jk} (d_j sigma_ik - Gamma^m_ji sigma_mk)`.
pub fn curl_tensor(jet: &MetricJet, sigma: &TensorJet) -> Vec2 {
    let gam = christoffel(jet);
    let a = curl_integrand(&gam, sigma);
    let s = 1.0 / jet.det().sqrt();
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                *o += s * EPS[j][k] * a[j][i][k];
            }
        }
    }
    out
}

/// Covariant curl of a 1-form, `eps_hat^{ij} d_i alpha_j`, given the
/// Jacobian `dalpha[i][j] = d_i alpha_j`.
pub fn curl_covector(jet: &MetricJet, dalpha: Mat2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += EPS[i][j] * dalpha[i][j];
        }
    }
    s / jet.det().sqrt()
}

/// Covariant incompatibility `inc_g sigma = curl_g curl_g sigma`.
pub fn inc(jet: &MetricJet, sigma: &TensorJet) -> f64 {
    let gam = christoffel(jet);
    let dgam = christoffel_derivative(jet);
    let a = curl_integrand(&gam, sigma);
    let mut s = 0.0;
    for q in 0..2 {
        for i in 0..2 {
            if EPS[q][i] == 0.0 {
                continue;
            }
            let trace: f64 = (0..2).map(|l| gam[l][l][q]).sum();
            for j in 0..2 {
                for k in 0..2 {
                    if EPS[j][k] == 0.0 {
                        continue;
                    }
                    // d_q (Gamma^m_ji sigma_mk)
                    let mut d_gs = 0.0;
                    for m in 0..2 {
                        d_gs += dgam[q][m][j][i] * sigma.g[m][k] + gam[m][j][i] * sigma.dg[q][m][k];
                    }
                    let v = sigma.d2g[j][q][i][k] - d_gs - trace * a[j][i][k];
                    s += EPS[q][i] * EPS[j][k] * v;
                }
            }
        }
    }
    s / jet.det()
}

/// `rot_g u = eps_hat^{iq} d_q u d_i`, a vector.
pub fn rot(jet: &MetricJet, u: &ScalarJet) -> Vec2 {
    let s = 1.0 / jet.det().sqrt();
    [s * u.grad[1], -s * u.grad[0]]
}

/// `rotrot_g u`, a contravariant 2-tensor.
pub fn rotrot(jet: &MetricJet, u: &ScalarJet) -> Mat2 {
    let gam = christoffel(jet);
    // [rot u]^i = eps^{iq} d_q u
    let r = [u.grad[1], -u.grad[0]];
    let trace = [0, 1].map(|q| gam[0][0][q] + gam[1][1][q]);
    let d = jet.det();
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                for q in 0..2 {
                    // [rot rot u]^{ij} = eps^{jk} eps^{iq} d_k d_q u
                    v += EPS[j][k] * EPS[i][q] * u.hess[k][q];
                }
            }
            for q in 0..2 {
                v -= r[i] * EPS[j][q] * trace[q];
                for k in 0..2 {
                    v += EPS[j][q] * gam[i][q][k] * r[k];
                }
            }
            out[i][j] = v / d;
        }
    }
    out
}

/// Contraction `A^{ij} sigma_ij` of a contravariant with a covariant tensor.
pub fn contract(a: Mat2, sigma: Mat2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += a[i][j] * sigma[i][j];
        }
    }
    s
}

/// Interior angle of a polygon corner with the given outgoing tangents,
/// completed to the exterior angle `2 pi - interior`.
pub fn exterior_angle(g: Mat2, t1: Vec2, t2: Vec2) -> f64 {
    2.0 * PI - angle(g, t1, t2)
}
