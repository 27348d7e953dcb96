mod common;

use common::{bisection_eigenvalues, random_orthogonal, random_symmetric, real_embedding};
use ehl_core::linalg::{hermitian_eigenvalues, sym_eigen, sym_eigenvalues};
use ehl_core::{DenseMatrix, SplitMix64};
use num_complex::Complex64;

fn dense(m: &[Vec<f64>]) -> DenseMatrix<f64> {
    DenseMatrix::from_rows(m.to_vec()).unwrap()
}

#[test]
fn jacobi_matches_bisection_oracle() {
    let mut rng = SplitMix64::new(42);
    for _ in 0..20 {
        let m = random_symmetric(8, &mut rng);
        let fast = sym_eigenvalues(&dense(&m)).unwrap();
        let oracle = bisection_eigenvalues(&m);
        for (a, b) in fast.values().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn recovers_planted_spectrum() {
    let mut rng = SplitMix64::new(7);
    for n in [3, 6, 10, 16] {
        let q = random_orthogonal(n, &mut rng);
        let mut d: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 2.0).collect();
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| q[i][k] * d[k] * q[j][k]).sum()).collect())
            .collect();
        let got = sym_eigenvalues(&dense(&m)).unwrap();
        d.sort_by(f64::total_cmp);
        for (a, b) in got.values().iter().zip(&d) {
            assert!((a - b).abs() <= 1e-9, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvectors_diagonalize() {
    let mut rng = SplitMix64::new(3);
    let m = random_symmetric(9, &mut rng);
    let eig = sym_eigen(&dense(&m)).unwrap();
    for k in 0..9 {
        for i in 0..9 {
            let mv: f64 = (0..9).map(|j| m[i][j] * eig.vectors[(j, k)]).sum();
            assert!((mv - eig.values[k] * eig.vectors[(i, k)]).abs() <= 1e-10);
        }
    }
}

#[test]
fn hermitian_solver_matches_real_embedding() {
    let mut rng = SplitMix64::new(11);
    let d = 6;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        h[i][i] = Complex64::new(rng.uniform() - 0.5, 0.0);
        for j in i + 1..d {
            let z = Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5);
            h[i][j] = z;
            h[j][i] = z.conj();
        }
    }
    let got = hermitian_eigenvalues(&DenseMatrix::from_rows(h.clone()).unwrap()).unwrap();
    let doubled = bisection_eigenvalues(&real_embedding(&h));
    for (k, v) in got.values().iter().enumerate() {
        assert!((v - doubled[2 * k]).abs() <= 1e-9 && (v - doubled[2 * k + 1]).abs() <= 1e-9);
    }
}

#[test]
fn gram_spectra_are_nonnegative() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..10 {
        let a: Vec<Vec<f64>> = (0..7).map(|_| (0..3).map(|_| rng.uniform() - 0.5).collect()).collect();
        let g = DenseMatrix::from_fn(7, |i, j| (0..3).map(|k| a[i][k] * a[j][k]).sum::<f64>());
        let s = sym_eigenvalues(&g).unwrap();
        assert!(s.values().iter().all(|&v| v >= -1e-12));
        assert!(s.values()[..4].iter().all(|v| v.abs() <= 1e-12), "rank 3");
    }
}

#[test]
fn input_errors() {
    let m = DenseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    let e = sym_eigenvalues(&m).unwrap_err();
    assert!(e.is_input_error());
}
