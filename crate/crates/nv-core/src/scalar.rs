//! Scalar abstraction.
//!
//! The toolkit is generic over the working precision. [`Real`] collects the
//! float behavior the numerics need (IEEE ops, constants, FFT support) plus a
//! small LAPACK bridge for the dense complex kernels: LU factorization with
//! partial pivoting, triangular solves, a condition estimate, and Hermitian
//! eigenvalues. Matrices are flat column-major slices; nothing here knows
//! about grids.

use lax::layout::MatrixLayout;
use lax::{Lapack, NormType, Transpose, UPLO};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use rustfft::FftNum;
use std::fmt::{Debug, Display, LowerExp};

use crate::error::{Error, Result};

/// Euler-Mascheroni constant, used by the small-argument Hankel series.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub trait Real:
    Float
    + FloatConst
    + NumAssignOps
    + FromPrimitive
    + FftNum
    + Display
    + LowerExp
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// LU-factorize a dense `n x n` complex matrix in place (column-major).
    /// Returns the pivot vector for [`Real::lu_solve`].
    fn lu_factor(n: usize, a: &mut [Complex<Self>]) -> Result<Vec<i32>>;

    /// Solve `A x = b` in place using a factorization from [`Real::lu_factor`].
    fn lu_solve(n: usize, factored: &[Complex<Self>], piv: &[i32], b: &mut [Complex<Self>])
        -> Result<()>;

    /// Reciprocal condition number estimate in the 1-norm. `factored` is the
    /// output of [`Real::lu_factor`]; `anorm` the 1-norm of the matrix before
    /// factorization.
    fn rcond(n: usize, factored: &[Complex<Self>], anorm: Self) -> Result<Self>;

    /// 1-norm of a dense column-major `rows x cols` matrix.
    fn opnorm_one(rows: usize, cols: usize, a: &[Complex<Self>]) -> Self;

    /// Eigenvalues of a Hermitian `n x n` matrix, ascending. Destroys `a`.
    fn eigh(n: usize, a: &mut [Complex<Self>]) -> Result<Vec<Self>>;
}

fn square_layout(n: usize) -> MatrixLayout {
    MatrixLayout::F {
        col: n as i32,
        lda: n as i32,
    }
}

macro_rules! impl_real {
    ($real:ty) => {
        impl Real for $real {
            fn lu_factor(n: usize, a: &mut [Complex<Self>]) -> Result<Vec<i32>> {
                debug_assert_eq!(a.len(), n * n);
                <Complex<Self> as Lapack>::lu(square_layout(n), a)
                    .map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e}")))
            }

            fn lu_solve(
                n: usize,
                factored: &[Complex<Self>],
                piv: &[i32],
                b: &mut [Complex<Self>],
            ) -> Result<()> {
                debug_assert_eq!(factored.len(), n * n);
                debug_assert_eq!(b.len(), n);
                let piv = piv.to_vec();
                <Complex<Self> as Lapack>::solve(
                    square_layout(n),
                    Transpose::No,
                    factored,
                    &piv,
                    b,
                )
                .map_err(|e| Error::SingularSystem(format!("triangular solve failed: {e}")))
            }

            fn rcond(n: usize, factored: &[Complex<Self>], anorm: Self) -> Result<Self> {
                <Complex<Self> as Lapack>::rcond(square_layout(n), factored, anorm)
                    .map_err(|e| Error::SingularSystem(format!("condition estimate failed: {e}")))
            }

            fn opnorm_one(rows: usize, cols: usize, a: &[Complex<Self>]) -> Self {
                debug_assert_eq!(a.len(), rows * cols);
                let layout = MatrixLayout::F {
                    col: cols as i32,
                    lda: rows as i32,
                };
                <Complex<Self> as Lapack>::opnorm(NormType::One, layout, a)
            }

            fn eigh(n: usize, a: &mut [Complex<Self>]) -> Result<Vec<Self>> {
                debug_assert_eq!(a.len(), n * n);
                <Complex<Self> as Lapack>::eigh(false, square_layout(n), UPLO::Upper, a)
                    .map_err(|e| Error::SingularSystem(format!("eigenvalue solve failed: {e}")))
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Shorthand for pulling an `f64` literal into the working precision.
#[inline]
pub fn rl<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("finite f64 converts to any Real")
}

/// Complex literal in the working precision.
#[inline]
pub fn cl<S: Real>(re: f64, im: f64) -> Complex<S> {
    Complex::new(rl(re), rl(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_a_known_2x2_complex_system() {
        // A = [[1, i], [2, -1]], b = [1+i, 0]; solved by hand:
        // x2 = 2(1+i)/(1+2i), x1 = x2/2.
        let n = 2;
        let mut a = vec![
            Complex::new(1.0f64, 0.0),
            Complex::new(2.0, 0.0), // column 0
            Complex::new(0.0, 1.0),
            Complex::new(-1.0, 0.0), // column 1
        ];
        let anorm = <f64 as Real>::opnorm_one(n, n, &a);
        assert!((anorm - 3.0).abs() < 1e-15); // max column sum of |.|
        let piv = <f64 as Real>::lu_factor(n, &mut a).unwrap();
        let mut b = vec![Complex::new(1.0, 1.0), Complex::new(0.0, 0.0)];
        <f64 as Real>::lu_solve(n, &a, &piv, &mut b).unwrap();
        let x2 = Complex::new(2.0, 0.0) * Complex::new(1.0, 1.0) / Complex::new(1.0, 2.0);
        let x1 = x2 / 2.0;
        assert!((b[0] - x1).norm() < 1e-14);
        assert!((b[1] - x2).norm() < 1e-14);
        let rc = <f64 as Real>::rcond(n, &a, anorm).unwrap();
        assert!(rc > 1e-3 && rc <= 1.0);
    }

    #[test]
    fn eigh_returns_sorted_eigenvalues_of_a_hermitian_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let mut a = vec![
            Complex::new(2.0f64, 0.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::new(2.0, 0.0),
        ];
        let ev = <f64 as Real>::eigh(2, &mut a).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision_path_works_too() {
        let mut a = vec![
            Complex::new(3.0f32, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(4.0, 0.0),
        ];
        let piv = <f32 as Real>::lu_factor(2, &mut a).unwrap();
        let mut b = vec![Complex::new(6.0f32, 0.0), Complex::new(8.0, 0.0)];
        <f32 as Real>::lu_solve(2, &a, &piv, &mut b).unwrap();
        assert!((b[0].re - 2.0).abs() < 1e-6);
        assert!((b[1].re - 2.0).abs() < 1e-6);
    }
}
