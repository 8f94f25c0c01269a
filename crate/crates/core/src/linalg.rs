//! Dense complex helpers built on nalgebra's Hermitian eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest element-wise deviation from Hermiticity, max |M - M†|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for c in 0..n {
        for r in 0..=c {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// (M + M†)/2.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// `a * b`, skipping the zero entries of `a`.
pub fn mul_sparse_left(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let nz: Vec<Vec<(usize, Complex64)>> = (0..a.ncols())
        .map(|k| (0..a.nrows()).filter(|&r| a[(r, k)] != ZERO).map(|r| (r, a[(r, k)])).collect())
        .collect();
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for (k, col) in nz.iter().enumerate() {
            let bkj = b[(k, j)];
            if bkj == ZERO {
                continue;
            }
            for &(r, v) in col {
                out[(r, j)] += v * bkj;
            }
        }
    }
    out
}

/// Fraction of non-zero entries.
pub fn fill(m: &CMatrix) -> f64 {
    m.iter().filter(|z| **z != ZERO).count() as f64 / m.len().max(1) as f64
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// V f(λ) V† for a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (c, &lambda) in vals.iter().enumerate() {
        let w = f(lambda);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= w;
        }
    }
    &scaled * vecs.adjoint()
}

/// exp(G) for anti-Hermitian G, computed as exp(-iH) with H = iG Hermitian.
pub fn expm_antihermitian(g: &CMatrix) -> CMatrix {
    let h = g.map(|z| z * I);
    hermitian_function(&h, |lambda| (-I * lambda).exp())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Re Tr(A B) without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            acc += (a[(r, c)] * b[(c, r)]).re;
        }
    }
    acc
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}
