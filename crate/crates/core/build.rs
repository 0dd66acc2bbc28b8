fn main() {
    // Dense pairwise kernels and the PCA eigensolver go through the system
    // BLAS/LAPACK (dgemm/dsyevd). Debian/Ubuntu: `libopenblas-dev`.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
