//! Thin wrappers over the system BLAS/LAPACK (OpenBLAS).
//!
//! BLAS is pinned to a single thread; parallelism happens one level up, in
//! rayon, over independent tiles. That keeps results bit-identical for any
//! worker count: each tile is produced by one deterministic dgemm call.

use std::ffi::{c_char, c_int};
use std::sync::Once;

use crate::error::{Error, Result};

extern "C" {
    fn openblas_set_num_threads(n: c_int);

    fn dgemm_(
        transa: *const c_char,
        transb: *const c_char,
        m: *const c_int,
        n: *const c_int,
        k: *const c_int,
        alpha: *const f64,
        a: *const f64,
        lda: *const c_int,
        b: *const f64,
        ldb: *const c_int,
        beta: *const f64,
        c: *mut f64,
        ldc: *const c_int,
    );

    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        w: *mut f64,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        liwork: *const c_int,
        info: *mut c_int,
    );
}

static BLAS_INIT: Once = Once::new();

fn ensure_single_threaded_blas() {
    BLAS_INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

/// Row-major product against a transposed right factor:
/// `c[m x n] = a[m x k] * b[n x k]^T`, i.e. `c[i][j] = <a_i, b_j>`.
pub(crate) fn dgemm_nt(m: usize, n: usize, k: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), n * k);
    assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    ensure_single_threaded_blas();
    // Fortran view: C_f (n x m, col-major) = B_f^T (n x k) * A_f (k x m),
    // where A_f/B_f are our row-major slices reinterpreted column-major.
    let (mf, nf, kf) = (n as c_int, m as c_int, k as c_int);
    let (alpha, beta) = (1.0f64, 0.0f64);
    unsafe {
        dgemm_(
            &(b'T' as c_char),
            &(b'N' as c_char),
            &mf,
            &nf,
            &kf,
            &alpha,
            b.as_ptr(),
            &kf,
            a.as_ptr(),
            &kf,
            &beta,
            c.as_mut_ptr(),
            &mf,
        );
    }
}

/// Gram matrix of the columns: `g[d x d] = x^T x` for row-major `x[n x d]`.
pub(crate) fn gram_tn(x: &[f64], n: usize, d: usize) -> Vec<f64> {
    assert_eq!(x.len(), n * d);
    ensure_single_threaded_blas();
    let mut g = vec![0.0f64; d * d];
    if n == 0 || d == 0 {
        return g;
    }
    let (mf, nf, kf) = (d as c_int, d as c_int, n as c_int);
    let (alpha, beta) = (1.0f64, 0.0f64);
    unsafe {
        dgemm_(
            &(b'N' as c_char),
            &(b'T' as c_char),
            &mf,
            &nf,
            &kf,
            &alpha,
            x.as_ptr(),
            &mf,
            x.as_ptr(),
            &mf,
            &beta,
            g.as_mut_ptr(),
            &mf,
        );
    }
    g
}

/// Eigendecomposition of a symmetric `d x d` matrix, eigenvalues descending.
///
/// Returns `(values, vectors)` with eigenvector `i` stored contiguously at
/// `vectors[i*d..(i+1)*d]`.
pub(crate) fn sym_eigen_desc(mut a: Vec<f64>, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), d * d);
    if d == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    ensure_single_threaded_blas();
    let n = d as c_int;
    let mut w = vec![0.0f64; d];
    let mut info: c_int = 0;

    // Workspace query.
    let mut work_query = [0.0f64];
    let mut iwork_query = [0 as c_int];
    let neg1: c_int = -1;
    unsafe {
        dsyevd_(
            &(b'V' as c_char),
            &(b'L' as c_char),
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &neg1,
            iwork_query.as_mut_ptr(),
            &neg1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(info));
    }
    let lwork = work_query[0] as usize;
    let liwork = iwork_query[0] as usize;
    let mut work = vec![0.0f64; lwork.max(1)];
    let mut iwork = vec![0 as c_int; liwork.max(1)];
    let lwork_c = work.len() as c_int;
    let liwork_c = iwork.len() as c_int;
    unsafe {
        dsyevd_(
            &(b'V' as c_char),
            &(b'L' as c_char),
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork_c,
            iwork.as_mut_ptr(),
            &liwork_c,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(info));
    }

    // dsyevd returns ascending eigenvalues with eigenvectors in columns of
    // the column-major `a`; column j is contiguous. Reverse to descending.
    let mut values = Vec::with_capacity(d);
    let mut vectors = Vec::with_capacity(d * d);
    for j in (0..d).rev() {
        values.push(w[j]);
        vectors.extend_from_slice(&a[j * d..(j + 1) * d]);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dgemm_nt_matches_hand_product() {
        // a: 2x3, b: 2x3 -> c[i][j] = <a_i, b_j>
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0, 0.0, -1.0, 2.0, 1.0, 0.5];
        let mut c = [0.0; 4];
        dgemm_nt(2, 2, 3, &a, &b, &mut c);
        assert_relative_eq!(c[0], 1.0 - 3.0);
        assert_relative_eq!(c[1], 2.0 + 2.0 + 1.5);
        assert_relative_eq!(c[2], 4.0 - 6.0);
        assert_relative_eq!(c[3], 8.0 + 5.0 + 3.0);
    }

    #[test]
    fn gram_tn_matches_hand_product() {
        // x: 3 rows x 2 cols
        let x = [1.0, 2.0, 0.0, 1.0, -1.0, 1.0];
        let g = gram_tn(&x, 3, 2);
        assert_relative_eq!(g[0], 2.0); // col0 . col0
        assert_relative_eq!(g[1], 1.0); // col0 . col1 (symmetric layout)
        assert_relative_eq!(g[2], 1.0);
        assert_relative_eq!(g[3], 6.0);
    }

    #[test]
    fn eigen_of_diagonal_is_sorted_desc() {
        let a = vec![2.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 3.0];
        let (vals, vecs) = sym_eigen_desc(a, 3).unwrap();
        assert_relative_eq!(vals[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 2.0, epsilon = 1e-12);
        // Leading eigenvector is +-e1.
        assert_relative_eq!(vecs[1].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_reconstructs_symmetric_matrix() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, -0.25, 0.5, -0.25, 2.0];
        let (vals, vecs) = sym_eigen_desc(a.clone(), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for c in 0..3 {
                    s += vals[c] * vecs[c * 3 + i] * vecs[c * 3 + j];
                }
                assert_relative_eq!(s, a[i * 3 + j], epsilon = 1e-10);
            }
        }
    }
}
