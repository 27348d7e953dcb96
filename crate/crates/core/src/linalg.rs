//! Small dense matrices and cyclic Jacobi eigensolvers.
//!
//! Real symmetric matrices get eigenvalues and eigenvectors; Hermitian
//! matrices only eigenvalues, which is all the entropy paths need. Both
//! stop once the off-diagonal Frobenius norm falls below `1e-12·‖m‖_F`, or
//! fail after [`MAX_SWEEPS`] sweeps.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::entropy::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{effective_tol, Real};

pub const MAX_SWEEPS: usize = 100;
pub const MAX_DIM: usize = 1024;
/// Relative off-diagonal norm at which a sweep sequence stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
/// Relative asymmetry accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone + Zero> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("matrix rows must all have length equal to the row count"));
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Principal submatrix on the given indices, in the order given.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |r, c| self[(idx[r], idx[c])].clone())
    }
}

impl<T> DenseMatrix<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other[(k, c)];
                }
            }
        }
        out
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.dim + c]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.dim + c]
    }
}

/// Eigen-decomposition `m = V·diag(values)·Vᵀ`, values ascending,
/// eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::input(format!(
            "matrix dimension {dim} exceeds {MAX_DIM}"
        )));
    }
    Ok(())
}

fn check_symmetric<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    check_dim(m.dim())?;
    let norm = m.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::NumericDomain("matrix has non-finite entries".into()));
    }
    let tol = effective_tol::<T>(SYMMETRY_TOL) * norm.max(T::one());
    for r in 0..m.dim() {
        for c in r + 1..m.dim() {
            if (m[(r, c)] - m[(c, r)]).abs() > tol {
                return Err(Error::input(format!(
                    "matrix not symmetric at ({r},{c}): {} vs {}",
                    m[(r, c)],
                    m[(c, r)]
                )));
            }
        }
    }
    Ok(norm)
}

/// Eigenvalues and eigenvectors of a real symmetric matrix.
pub fn sym_eigen<T: Real>(m: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    let n = m.dim();
    let mut v = DenseMatrix::identity(n);
    let a = jacobi_real(m, Some(&mut v))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues<T: Real>(m: &DenseMatrix<T>) -> Result<Spectrum<T>> {
    let a = jacobi_real(m, None)?;
    let mut values: Vec<T> = (0..m.dim()).map(|i| a[(i, i)]).collect();
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(Spectrum::new(values))
}

/// Runs cyclic sweeps until the off-diagonal part is negligible and
/// returns the (numerically) diagonal matrix. Rotations are accumulated
/// into `vectors` when given.
fn jacobi_real<T: Real>(
    m: &DenseMatrix<T>,
    mut vectors: Option<&mut DenseMatrix<T>>,
) -> Result<DenseMatrix<T>> {
    let norm = check_symmetric(m)?;
    let n = m.dim();
    // symmetrize so round-off in the input cannot bias the rotations
    let mut a = DenseMatrix::from_fn(n, |r, c| (m[(r, c)] + m[(c, r)]) * T::lit(0.5));
    let stop = effective_tol::<T>(OFF_DIAGONAL_TOL) * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= stop || n < 2 {
            return Ok(a);
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off.as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let (c, s, t) = rotation(a[(p, p)], a[(q, q)], apq);
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[(r, p)] = np;
                    a[(p, r)] = np;
                    a[(r, q)] = nq;
                    a[(q, r)] = nq;
                }
                if let Some(v) = vectors.as_deref_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &DenseMatrix<Complex<T>>) -> Result<Spectrum<T>> {
    let n = m.dim();
    check_dim(n)?;
    let norm = m.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NumericDomain("matrix has non-finite entries".into()));
    }
    let sym_tol = effective_tol::<T>(SYMMETRY_TOL) * norm.max(T::one());
    for r in 0..n {
        if m[(r, r)].im.abs() > sym_tol {
            return Err(Error::input(format!("diagonal entry {r} is not real")));
        }
        for c in r + 1..n {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > sym_tol {
                return Err(Error::input(format!("matrix not Hermitian at ({r},{c})")));
            }
        }
    }

    let half = T::lit(0.5);
    let mut h = DenseMatrix::from_fn(n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * half);
    let stop = effective_tol::<T>(OFF_DIAGONAL_TOL) * norm;
    let mut sweeps = 0;
    loop {
        let off = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| h[(r, c)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= stop || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off.as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let hpq = h[(p, q)];
                let mag = hpq.norm();
                if mag == T::zero() {
                    continue;
                }
                // Rephase site q so that h[p][q] becomes the real number |h_pq|.
                let phase = hpq / mag;
                let phase_conj = phase.conj();
                for k in 0..n {
                    h[(k, q)] = h[(k, q)] * phase_conj;
                }
                for k in 0..n {
                    h[(q, k)] = h[(q, k)] * phase;
                }
                let (c, s, t) = rotation(h[(p, p)].re, h[(q, q)].re, mag);
                let hpp = h[(p, p)].re - t * mag;
                let hqq = h[(q, q)].re + t * mag;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let hrp = h[(r, p)];
                    let hrq = h[(r, q)];
                    let np = hrp * c - hrq * s;
                    let nq = hrp * s + hrq * c;
                    h[(r, p)] = np;
                    h[(p, r)] = np.conj();
                    h[(r, q)] = nq;
                    h[(q, r)] = nq.conj();
                }
                h[(p, p)] = Complex::new(hpp, T::zero());
                h[(q, q)] = Complex::new(hqq, T::zero());
                h[(p, q)] = Complex::zero();
                h[(q, p)] = Complex::zero();
            }
        }
    }
    let mut values: Vec<T> = (0..n).map(|i| h[(i, i)].re).collect();
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(Spectrum::new(values))
}

/// Jacobi rotation `(cos, sin, tan)` zeroing the `(p, q)` entry of the
/// 2×2 block `[[app, apq], [apq, aqq]]`.
#[inline]
fn rotation<T: Real>(app: T, aqq: T, apq: T) -> (T, T, T) {
    let theta = (aqq - app) / (apq + apq);
    let t = if (theta * theta).is_infinite() {
        // apq negligible against the diagonal gap: tan φ ≈ 1/(2θ)
        T::one() / (theta + theta)
    } else {
        let sign = if theta < T::zero() { -T::one() } else { T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    (c, t * c, t)
}

fn off_diagonal_norm<T: Real>(a: &DenseMatrix<T>) -> T {
    let n = a.dim();
    let mut acc = T::zero();
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[(r, c)] * a[(r, c)];
            }
        }
    }
    acc.sqrt()
}

/// Minimum-norm least-squares solution of the normal equations
/// `G x = b` for a symmetric positive semi-definite `G`, via its
/// eigen-decomposition. Directions with eigenvalue below
/// `rcond · λ_max` are dropped.
pub fn solve_symmetric_psd<T: Real>(g: &DenseMatrix<T>, b: &[T], rcond: T) -> Result<Vec<T>> {
    if b.len() != g.dim() {
        return Err(Error::input("right-hand side length does not match matrix"));
    }
    let eig = sym_eigen(g)?;
    let lmax = eig.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let n = g.dim();
    let mut x = vec![T::zero(); n];
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= rcond * lmax {
            continue;
        }
        let proj: T = (0..n).map(|r| eig.vectors[(r, k)] * b[r]).sum();
        let coef = proj / lambda;
        for (r, xr) in x.iter_mut().enumerate() {
            *xr += coef * eig.vectors[(r, k)];
        }
    }
    Ok(x)
}
