//! Polynomial bases on the reference triangle and the segment.

use crate::metric::ScalarJet;

/// Exponents `(a, b)` of `x^a y^b` with `a + b <= degree`, ordered by total
/// degree and then by the power of `y`.
pub(crate) fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for total in 0..=degree {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

pub(crate) fn dim_p(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Multi-indices `(alpha_0, alpha_1, alpha_2)` of the degree-`k` lattice,
/// in the order of `monomial_exponents(k)`.
pub(crate) fn lattice(degree: usize) -> Vec<[usize; 3]> {
    monomial_exponents(degree)
        .into_iter()
        .map(|(a, b)| [degree - a - b, a, b])
        .collect()
}

/// `a * b` with the product rule up to second order.
pub(crate) fn jet_mul(a: &ScalarJet, b: &ScalarJet) -> ScalarJet {
    let mut out = ScalarJet {
        val: a.val * b.val,
        ..Default::default()
    };
    for i in 0..2 {
        out.grad[i] = a.val * b.grad[i] + b.val * a.grad[i];
        for j in 0..2 {
            out.hess[i][j] = a.val * b.hess[i][j]
                + b.val * a.hess[i][j]
                + a.grad[i] * b.grad[j]
                + a.grad[j] * b.grad[i];
        }
    }
    out
}

const BARY_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Nodal basis of degree `k` on the equispaced lattice of the reference
/// triangle in product form: the function for multi-index `alpha` is
/// `prod_i prod_{j < alpha_i} (k lambda_i - j) / (j + 1)` in the
/// barycentric coordinates `lambda`. Values, gradients and Hessians.
pub(crate) fn lattice_basis(degree: usize, alphas: &[[usize; 3]], xi: [f64; 2]) -> Vec<ScalarJet> {
    let lambda = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
    let kf = degree as f64;
    // factors[i][a] = jet of prod_{j < a} (k lambda_i - j) / (j + 1)
    let factors: Vec<Vec<ScalarJet>> = (0..3)
        .map(|i| {
            let gl = BARY_GRAD[i];
            let (mut v, mut d, mut dd) = (1.0, 0.0, 0.0);
            let mut out = Vec::with_capacity(degree + 1);
            for a in 0..=degree {
                out.push(ScalarJet {
                    val: v,
                    grad: [d * gl[0], d * gl[1]],
                    hess: [
                        [dd * gl[0] * gl[0], dd * gl[0] * gl[1]],
                        [dd * gl[1] * gl[0], dd * gl[1] * gl[1]],
                    ],
                });
                let c = 1.0 / (a as f64 + 1.0);
                let f = (kf * lambda[i] - a as f64) * c;
                let df = kf * c;
                dd = dd * f + 2.0 * d * df;
                d = d * f + v * df;
                v *= f;
            }
            out
        })
        .collect();
    alphas
        .iter()
        .map(|al| {
            let ab = jet_mul(&factors[0][al[0]], &factors[1][al[1]]);
            jet_mul(&ab, &factors[2][al[2]])
        })
        .collect()
}

/// Legendre polynomials `P_0..=P_n` at `s` in `[-1, 1]`.
pub(crate) fn legendre(n: usize, s: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(s);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * s * p[j] - jf * p[j - 1]) / (jf + 1.0);
        p.push(next);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_count_matches_dimension() {
        for k in 0..8 {
            assert_eq!(monomial_exponents(k).len(), dim_p(k));
        }
    }

    #[test]
    fn lattice_basis_is_nodal() {
        for k in 0..=6 {
            let al = lattice(k);
            assert_eq!(al.len(), dim_p(k));
            for (i, a) in al.iter().enumerate() {
                let kf = k.max(1) as f64;
                let node = [a[1] as f64 / kf, a[2] as f64 / kf];
                for (j, b) in lattice_basis(k, &al, node).iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((b.val - expected).abs() < 1e-13, "k={k} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn lattice_jets_match_finite_differences() {
        let al = lattice(4);
        let p = [0.21, 0.33];
        let h = 1e-5;
        let base = lattice_basis(4, &al, p);
        for d in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[d] += h;
            pm[d] -= h;
            let (bp, bm) = (lattice_basis(4, &al, pp), lattice_basis(4, &al, pm));
            for j in 0..al.len() {
                let fd = (bp[j].val - bm[j].val) / (2.0 * h);
                assert!((base[j].grad[d] - fd).abs() < 1e-8);
                for e in 0..2 {
                    let fd2 = (bp[j].grad[e] - bm[j].grad[e]) / (2.0 * h);
                    assert!((base[j].hess[d][e] - fd2).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn legendre_low_orders() {
        let p = legendre(3, 0.3);
        assert!((p[2] - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((p[3] - 0.5 * (5.0 * 0.027 - 0.9)).abs() < 1e-15);
    }
}
