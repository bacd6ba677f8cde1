//! Sparse symmetric matrices and constrained SPD solves.

use sprs::{CsMat, FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};

/// Default relative residual tolerance for the solves in this crate.
pub const SOLVE_TOL: f64 = 1e-12;

/// Square matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    /// Sums duplicate entries. Triplets are stably sorted by position and
    /// summed in their input order, so the result depends only on the
    /// order in which they were generated.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for dimension {n}");
            if last == Some((i, j)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        SparseMatrix {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Rows and columns with `map[i]` set, renumbered by `map`.
    fn restrict(&self, map: &[Option<usize>], m: usize) -> SparseMatrix {
        let mut indptr = Vec::with_capacity(m + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..self.n {
            if map[i].is_none() {
                continue;
            }
            for (j, v) in self.row(i) {
                if let Some(jj) = map[j] {
                    indices.push(jj);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            n: m,
            indptr,
            indices,
            data,
        }
    }

    fn to_csmat(&self) -> CsMat<f64> {
        CsMat::new(
            (self.n, self.n),
            self.indptr.clone(),
            self.indices.clone(),
            self.data.clone(),
        )
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Factorization of an SPD matrix restricted to its unconstrained dofs,
/// reusable across right-hand sides.
pub struct SpdSolver {
    a: SparseMatrix,
    map: Vec<Option<usize>>,
    free: Vec<usize>,
    reduced: SparseMatrix,
    factor: Option<Factor>,
}

enum Factor {
    Ldl(Box<LdlNumeric<f64, usize>>),
    // the sparse factorization rejects 1x1 systems
    Scalar(f64),
}

impl Factor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Factor::Ldl(f) => f.solve(b),
            Factor::Scalar(d) => vec![b[0] / d],
        }
    }
}

impl SpdSolver {
    /// Factors `A` on the dofs with `constrained[i] == false`.
    pub fn new(a: &SparseMatrix, constrained: &[bool]) -> Result<Self> {
        assert_eq!(constrained.len(), a.dim(), "constraint mask length");
        let mut map = vec![None; a.dim()];
        let mut free = Vec::new();
        for (i, &c) in constrained.iter().enumerate() {
            if !c {
                map[i] = Some(free.len());
                free.push(i);
            }
        }
        let reduced = a.restrict(&map, free.len());
        let factor = if free.is_empty() {
            None
        } else if free.len() == 1 {
            let d = reduced.get(0, 0);
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite { row: 0, pivot: d });
            }
            Some(Factor::Scalar(d))
        } else {
            let f = Ldl::new()
                .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
                .check_symmetry(SymmetryCheck::DontCheckSymmetry)
                .numeric(reduced.to_csmat().view())
                .map_err(|_| Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
            if let Some((row, &pivot)) = f.d().iter().enumerate().find(|(_, d)| d.is_nan() || **d <= 0.0) {
                return Err(Error::NotPositiveDefinite { row, pivot });
            }
            Some(Factor::Ldl(Box::new(f)))
        };
        Ok(SpdSolver {
            a: a.clone(),
            map,
            free,
            reduced,
            factor,
        })
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Solves `A x = b` on the free dofs with `x = values` on the
    /// constrained ones, to relative residual `tol` on the free rows.
    pub fn solve(&self, b: &[f64], values: &[f64], tol: f64) -> Result<Vec<f64>> {
        let n = self.a.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        assert_eq!(values.len(), n, "constraint value length");
        let mut x: Vec<f64> = (0..n)
            .map(|i| if self.map[i].is_none() { values[i] } else { 0.0 })
            .collect();
        let Some(ldl) = &self.factor else { return Ok(x) };

        // move known columns to the right-hand side
        let ax = self.a.mul_vec(&x);
        let rhs: Vec<f64> = self.free.iter().map(|&i| b[i] - ax[i]).collect();
        let bnorm = norm(&rhs);
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut y = ldl.solve(&rhs);
        let mut res = self.residual(&rhs, &y);
        for _ in 0..3 {
            if norm(&res) <= tol * bnorm {
                break;
            }
            let dy = ldl.solve(&res);
            for (a, d) in y.iter_mut().zip(&dy) {
                *a += d;
            }
            res = self.residual(&rhs, &y);
        }
        if norm(&res) > tol * bnorm {
            conjugate_gradient(&self.reduced, &rhs, &mut y, tol)?;
        }
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = y[k];
        }
        Ok(x)
    }

    fn residual(&self, rhs: &[f64], y: &[f64]) -> Vec<f64> {
        let ay = self.reduced.mul_vec(y);
        rhs.iter().zip(&ay).map(|(r, a)| r - a).collect()
    }
}

/// Conjugate gradients on `A y = rhs` from the given start, to relative
/// residual `tol`.
fn conjugate_gradient(a: &SparseMatrix, rhs: &[f64], y: &mut [f64], tol: f64) -> Result<()> {
    let mul = |v: &[f64]| a.mul_vec(v);
    let bnorm = norm(rhs);
    let ay = mul(y);
    let mut r: Vec<f64> = rhs.iter().zip(&ay).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let max_iter = 10 * rhs.len() + 100;
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return Ok(());
        }
        let ap = mul(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap.is_nan() || pap <= 0.0 {
            return Err(Error::NotPositiveDefinite { row: 0, pivot: pap });
        }
        let alpha = rr / pap;
        for i in 0..y.len() {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    let residual = rr.sqrt() / bnorm;
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::SolverDiverged { residual, tol })
    }
}

/// One-shot constrained SPD solve; see [`SpdSolver::solve`].
pub fn solve_spd(
    a: &SparseMatrix,
    b: &[f64],
    constrained: &[bool],
    values: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    SpdSolver::new(a, constrained)?.solve(b, values, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_are_summed() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![5.0, 0.0]);
    }

    #[test]
    fn identity_solve() {
        let b = vec![1.0, -2.0, 3.5];
        let x = solve_spd(&SparseMatrix::identity(3), &b, &[false; 3], &[0.0; 3], 1e-14).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn tridiagonal_solve() {
        let a = laplace_1d(4);
        assert_eq!(a.symmetry_defect(), 0.0);
        let x = solve_spd(&a, &[1.0; 4], &[false; 4], &[0.0; 4], 1e-14).unwrap();
        for (xi, e) in x.iter().zip([2.0, 3.0, 3.0, 2.0]) {
            assert!((xi - e).abs() < 1e-13);
        }
    }

    #[test]
    fn constraints_are_exact() {
        let a = laplace_1d(5);
        let mut values = vec![0.0; 5];
        values[4] = 5.0;
        let mask = [false, false, false, false, true];
        let x = solve_spd(&a, &[0.0; 5], &mask, &values, 1e-14).unwrap();
        assert_eq!(x[4], 5.0);
        // discrete harmonic: linear from the implicit zero ghost to 5
        for (i, xi) in x.iter().enumerate().take(4) {
            assert!((xi - (i + 1) as f64).abs() < 1e-12);
        }
        let r = a.mul_vec(&x);
        assert!(r[..4].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            SpdSolver::new(&a, &[false, false]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn conjugate_gradient_converges() {
        let a = laplace_1d(30);
        let map: Vec<_> = (0..30).map(Some).collect();
        let csr = a.restrict(&map, 30);
        let rhs = vec![1.0; 30];
        let mut y = vec![0.0; 30];
        conjugate_gradient(&csr, &rhs, &mut y, 1e-13).unwrap();
        let r: Vec<f64> = a.mul_vec(&y).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm(&r) < 1e-12 * norm(&rhs));
    }

    #[test]
    fn single_free_dof() {
        let a = laplace_1d(3);
        let x = solve_spd(&a, &[0.0, 4.0, 0.0], &[true, false, true], &[1.0, 0.0, 1.0], SOLVE_TOL).unwrap();
        assert!((x[1] - 3.0).abs() < 1e-15);
    }
}
