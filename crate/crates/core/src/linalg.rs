//! Small dense real matrices and their singular values.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::from_f64;
use crate::seq::RSeq;

pub const MAX_DIM: usize = 128;

/// Square `n × n` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n > MAX_DIM {
            return Err(Error::Size(format!("matrix dimension {n} exceeds {MAX_DIM}")));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("matrix must be square".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        Ok(Matrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).take(self.n).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

const MAX_SWEEPS: usize = 60;

/// Singular values, nonincreasing, by one-sided (Hestenes) Jacobi rotations on the columns.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let n = a.n;
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = c * u - s * v;
                    *y = s * u + c * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Exact rational image of [`singular_values`].
pub fn singular_values_rseq(a: &Matrix) -> RSeq {
    let vals = singular_values(a).into_iter().map(|v| from_f64(v).expect("finite singular value")).collect();
    RSeq::new(vals).expect("sorted nonnegative")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi, nonincreasing.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.n;
    let mut m = a.clone();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|ij| m[ij] * m[ij]).sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Singular values through the eigenvalues of `AᵀA`; an independent check on [`singular_values`].
pub fn gram_singular_values(a: &Matrix) -> Vec<f64> {
    sym_eigenvalues(&a.transpose().mul(a)).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Block-diagonal `A ⊕ … ⊕ A` with `m` copies.
pub fn op_direct_sum(a: &Matrix, m: usize) -> Result<Matrix> {
    let n = a.n;
    if m == 0 || m.checked_mul(n).map_or(true, |d| d > MAX_DIM) {
        return Err(Error::Size(format!("{m} copies of a {n}x{n} matrix exceed dimension {MAX_DIM}")));
    }
    let mut out = Matrix::zeros(m * n);
    for b in 0..m {
        for i in 0..n {
            for j in 0..n {
                out[(b * n + i, b * n + j)] = a[(i, j)];
            }
        }
    }
    Ok(out)
}

pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    Matrix { n, data: (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect() }
}

/// `GᵀG` with `G` iid uniform on `[0, 1)`.
pub fn random_psd<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let g = Matrix { n, data: (0..n * n).map(|_| rng.gen::<f64>()).collect() };
    g.transpose().mul(&g)
}

/// Orthogonal matrix from modified Gram-Schmidt on a random matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let g = random_matrix(n, rng);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj = dot(&cols[j], &cols[k]);
                let ck = cols[k].clone();
                for (x, y) in cols[j].iter_mut().zip(&ck) {
                    *x -= proj * y;
                }
            }
            let norm = dot(&cols[j], &cols[j]).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            let mut q = Matrix::zeros(n);
            for (j, c) in cols.iter().enumerate() {
                for (i, v) in c.iter().enumerate() {
                    q[(i, j)] = *v;
                }
            }
            return q;
        }
    }
}

/// `2σ_{1/2} v`: sums of consecutive pairs `v_{2k-1} + v_{2k}`.
pub fn pair_sums(v: &[f64]) -> Vec<f64> {
    v.chunks(2).map(|c| c.iter().sum()).collect()
}

/// Largest deviation of two sorted spectra, relative to the largest entry.
pub fn spectral_distance(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let n = a.len().max(b.len());
    (0..n).map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs()).fold(0.0, f64::max) / scale
}
