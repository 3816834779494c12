//! Dense complex helpers shared by every module.
//!
//! Everything here works on `DMatrix<Complex64>`; the matrices involved are
//! small (total dimension well below 100), so clarity wins over blocking.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// `(M + M^dagger) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest entrywise modulus of `M - M^dagger`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Spectral decomposition of a Hermitian matrix with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMat,
}

impl HermEigen {
    /// Rebuild `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.vectors.nrows();
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (&v * v.adjoint()) * c(w, 0.0);
        }
        out
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn herm_eigen(m: &CMat) -> HermEigen {
    let n = m.nrows();
    if n == 1 {
        return HermEigen {
            values: vec![m[(0, 0)].re],
            vectors: identity(1),
        };
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEigen { values, vectors }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<f64> = SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Square root of a PSD matrix; negative eigenvalues are clipped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    herm_eigen(m).map(|x| if x > 0.0 { x.sqrt() } else { 0.0 })
}

/// `M^{-1/2}` on the support of `M`; eigenvalues at or below `cut` are treated
/// as kernel and mapped to zero.
pub fn pinv_sqrt(m: &CMat, cut: f64) -> CMat {
    herm_eigen(m).map(|x| if x > cut { 1.0 / x.sqrt() } else { 0.0 })
}

/// Projector onto the eigenvectors of `M` with eigenvalue above `cut`.
pub fn support_projector(m: &CMat, cut: f64) -> CMat {
    herm_eigen(m).map(|x| if x > cut { 1.0 } else { 0.0 })
}

/// `exp(i H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMat) -> CMat {
    let eig = herm_eigen(h);
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        out += (&v * v.adjoint()) * Complex64::from_polar(1.0, lam);
    }
    out
}

/// Hermitian `H` with `exp(i H) = U` for unitary `U`, via the complex Schur form
/// (diagonal for normal matrices). Returns `None` when the Schur iteration
/// fails or the input is too far from unitary to reconstruct.
pub fn unitary_log(u: &CMat) -> Option<CMat> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000)?;
    let (q, t) = schur.unpack();
    let mut h = CMat::zeros(n, n);
    for k in 0..n {
        let theta = t[(k, k)].arg();
        let v = q.column(k);
        h += (&v * v.adjoint()) * c(theta, 0.0);
    }
    let h = hermitize(&h);
    if max_abs_diff(&expi_hermitian(&h), u) > 1e-9 {
        return None;
    }
    Some(h)
}

/// Largest entrywise deviation of `U^dagger U` from the identity.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    max_abs_diff(&g, &identity(u.ncols()))
}

/// Polar factor `M (M^dagger M)^{-1/2}` of a full-column-rank `M`; `None` when
/// the smallest singular value falls below `min_sv`.
pub fn polar_isometry(m: &CMat, min_sv: f64) -> Option<CMat> {
    let gram = m.adjoint() * m;
    let eig = herm_eigen(&gram);
    if eig.values[0] <= min_sv * min_sv {
        return None;
    }
    Some(m * eig.map(|x| 1.0 / x.sqrt()))
}

/// Sum of squared off-diagonal moduli over a family of square matrices.
pub fn off_diagonal_mass(mats: &[CMat]) -> f64 {
    mats.iter()
        .map(|m| {
            let mut s = 0.0;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        s += m[(i, j)].norm_sqr();
                    }
                }
            }
            s
        })
        .sum()
}

/// Jacobi joint diagonalization of Hermitian matrices (complex Givens sweeps
/// maximizing the diagonal mass of the whole family).
///
/// Starts from the orthonormal basis `init` (columns) and returns the refined
/// basis. Sweeps stop once no rotation with `|sin| > threshold` remains.
pub fn joint_diagonalize(mats: &[CMat], init: CMat, threshold: f64, max_sweeps: usize) -> CMat {
    let n = init.ncols();
    let mut basis = init;
    if n < 2 || mats.is_empty() {
        return basis;
    }
    let mut work: Vec<CMat> = mats
        .iter()
        .map(|m| basis.adjoint() * m * &basis)
        .collect();
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut g = nalgebra::Matrix3::<f64>::zeros();
                for a in &work {
                    let h = [
                        (a[(p, p)] - a[(q, q)]).re,
                        (a[(p, q)] + a[(q, p)]).re,
                        (c(0.0, 1.0) * (a[(q, p)] - a[(p, q)])).re,
                    ];
                    for r in 0..3 {
                        for s in 0..3 {
                            g[(r, s)] += h[r] * h[s];
                        }
                    }
                }
                let eig = nalgebra::SymmetricEigen::new(g);
                let mut top = 0;
                for k in 1..3 {
                    if eig.eigenvalues[k] > eig.eigenvalues[top] {
                        top = k;
                    }
                }
                let mut ang = [
                    eig.eigenvectors[(0, top)],
                    eig.eigenvectors[(1, top)],
                    eig.eigenvectors[(2, top)],
                ];
                if ang[0] < 0.0 {
                    ang = [-ang[0], -ang[1], -ang[2]];
                }
                let cs = (0.5 + ang[0] / 2.0).sqrt();
                let sn = c(ang[1], -ang[2]) * (0.5 / cs);
                if sn.norm() <= threshold {
                    continue;
                }
                rotated = true;
                let mut rot = identity(n);
                rot[(p, p)] = c(cs, 0.0);
                rot[(q, q)] = c(cs, 0.0);
                rot[(p, q)] = -sn.conj();
                rot[(q, p)] = sn;
                basis = &basis * &rot;
                for a in work.iter_mut() {
                    *a = rot.adjoint() * &*a * &rot;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    basis
}

/// `I_{left} (x) op (x) I_{right}` where `op` acts on subsystem `position` of a
/// register with local dimensions `dims`.
pub fn embed_operator(op: &CMat, dims: &[usize], position: usize) -> CMat {
    let left: usize = dims[..position].iter().product();
    let right: usize = dims[position + 1..].iter().product();
    kron(&kron(&identity(left), op), &identity(right))
}

/// Column `k` of the identity as a column matrix.
pub fn ket(d: usize, k: usize) -> CMat {
    let mut v = CMat::zeros(d, 1);
    v[(k, 0)] = ONE;
    v
}

pub fn from_column(v: &DVector<Complex64>) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn outer(u: &CMat, v: &CMat) -> CMat {
    u * v.adjoint()
}

/// Pauli matrices, used by tests and corpus builders.
pub mod pauli {
    use super::{c, CMat};

    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }
    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }
}
