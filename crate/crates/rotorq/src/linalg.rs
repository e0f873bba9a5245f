//! Small complex-matrix helpers shared across modules and tests.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

/// Largest entrywise modulus of the difference of two matrices.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of the difference of two 2x2 matrices.
pub fn max_abs_diff2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// max |U^dag U - I|: zero for an exactly unitary matrix.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - want).norm());
        }
    }
    worst
}

/// max |U^dag U - I| for a 2x2 matrix.
pub fn unitarity_defect2(u: &Matrix2<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - want).norm());
        }
    }
    worst
}

/// Top-left 2x2 block of a larger matrix.
pub fn qubit_block(u: &DMatrix<Complex64>) -> Matrix2<Complex64> {
    assert!(u.nrows() >= 2 && u.ncols() >= 2);
    Matrix2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)])
}
