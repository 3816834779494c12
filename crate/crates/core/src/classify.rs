//! Detection of classical-classical and classical-quantum structure, plus
//! a partial-transpose label for test corpora.

use serde::{Deserialize, Serialize};

use crate::correlations::Side;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::state::{opt_matrix, permute_subsystems, DensityMatrix};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    /// Diagonal in a product of local orthonormal bases.
    CC,
    /// Classical on A: `sum_i p_i |i><i| (x) sigma_i`.
    CQ,
    /// Classical on B.
    QC,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalityVerdict {
    pub kind: Kind,
    /// Columns form the best classical basis found for A (when searched).
    #[serde(with = "opt_matrix", default)]
    pub basis_a: Option<CMat>,
    #[serde(with = "opt_matrix", default)]
    pub basis_b: Option<CMat>,
    /// Largest off-diagonal modulus in the claimed basis: of the full matrix
    /// for a two-sided verdict, of the off-diagonal blocks of the classical
    /// party for a one-sided one.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_b: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PptLabel {
    Ppt,
    Npt,
}

fn check_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidSubsystems(format!(
            "bipartite state required, found {} subsystems",
            rho.dims().len()
        )));
    }
    Ok(())
}

/// Hermitian basis of `d x d` matrices with unit Frobenius norm.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        let mut e = CMat::zeros(d, d);
        e[(k, k)] = linalg::ONE;
        out.push(e);
    }
    for k in 0..d {
        for l in k + 1..d {
            let mut re = CMat::zeros(d, d);
            re[(k, l)] = c(s, 0.0);
            re[(l, k)] = c(s, 0.0);
            out.push(re);
            let mut im = CMat::zeros(d, d);
            im[(k, l)] = c(0.0, -s);
            im[(l, k)] = c(0.0, s);
            out.push(im);
        }
    }
    out
}

/// `Tr_B((I (x) Y) rho)` for a Hermitian basis of `Y` on B.
fn marginal_family(rho: &DensityMatrix) -> Vec<CMat> {
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    hermitian_basis(db)
        .iter()
        .map(|y| {
            CMat::from_fn(da, da, |a, b| {
                let block = m.view((a * db, b * db), (db, db));
                let mut t = linalg::ZERO;
                for x in 0..db {
                    for z in 0..db {
                        t += y[(z, x)] * block[(x, z)];
                    }
                }
                t
            })
        })
        .map(|r| linalg::hermitize(&r))
        .collect()
}

/// Max modulus over the off-diagonal `d_B x d_B` blocks of `rho` in the A-basis
/// `u`.
fn block_residual(rho: &DensityMatrix, u: &CMat) -> f64 {
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let full = linalg::kron(u, &linalg::identity(db));
    let r = full.adjoint() * rho.matrix() * &full;
    let mut worst: f64 = 0.0;
    for a in 0..da {
        for b in 0..da {
            if a == b {
                continue;
            }
            for x in 0..db {
                for z in 0..db {
                    worst = worst.max(r[(a * db + x, b * db + z)].norm());
                }
            }
        }
    }
    worst
}

// fixed irrational weights for the generic combination
fn weight(k: usize) -> f64 {
    ((k as f64 + 1.0) * 0.618_033_988_749_895).fract() + 0.5
}

/// Basis of the first party in which the family `Tr_B((I (x) Y) rho)` is as
/// diagonal as possible: eigenbasis of the marginal, refined inside each
/// (near-)degenerate eigenspace by joint diagonalization.
fn classical_basis_first(rho: &DensityMatrix) -> CMat {
    let da = rho.dims()[0];
    let family = marginal_family(rho);
    let marginal = rho.reduce(&[0]).expect("bipartite");
    let eig = linalg::herm_eigen(marginal.matrix());
    let mut basis = eig.vectors.clone();
    let mut start = 0;
    while start < da {
        let mut end = start + 1;
        while end < da && eig.values[end] - eig.values[end - 1] < tol::DEGENERACY_GAP {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let p = eig.vectors.columns(start, size).into_owned();
            let compressed: Vec<CMat> = family.iter().map(|r| p.adjoint() * r * &p).collect();
            let mut generic = CMat::zeros(size, size);
            for (k, r) in compressed.iter().enumerate() {
                generic += r * c(weight(k), 0.0);
            }
            let init = linalg::herm_eigen(&generic).vectors;
            let local = linalg::joint_diagonalize(&compressed, init, 1e-14, 100);
            basis.columns_mut(start, size).copy_from(&(&p * local));
        }
        start = end;
    }
    basis
}

/// One-sided search: kind `CQ` (side A) or `QC` (side B) when the state is
/// block diagonal within `tol` in the returned basis of that party.
pub fn is_cq(rho: &DensityMatrix, tol: f64, side: Side) -> Result<ClassicalityVerdict> {
    check_bipartite(rho)?;
    let oriented = match side {
        Side::A => rho.clone(),
        Side::B => permute_subsystems(rho, &[1, 0])?,
    };
    let u = classical_basis_first(&oriented);
    let residual = block_residual(&oriented, &u);
    let classical = residual <= tol;
    let (kind, basis_a, basis_b) = match side {
        Side::A => (if classical { Kind::CQ } else { Kind::Neither }, Some(u), None),
        Side::B => (if classical { Kind::QC } else { Kind::Neither }, None, Some(u)),
    };
    Ok(ClassicalityVerdict {
        kind,
        basis_a,
        basis_b,
        residual,
        residual_a: (side == Side::A).then_some(residual),
        residual_b: (side == Side::B).then_some(residual),
        tol,
    })
}

/// Two-sided search: `CC` when the state is diagonal within `tol` in the
/// product of the bases found for each party; otherwise the one-sided kinds.
pub fn is_cc(rho: &DensityMatrix, tol: f64) -> Result<ClassicalityVerdict> {
    check_bipartite(rho)?;
    let a = is_cq(rho, tol, Side::A)?;
    let b = is_cq(rho, tol, Side::B)?;
    let (u, v) = (a.basis_a.expect("A basis"), b.basis_b.expect("B basis"));
    let w = linalg::kron(&u, &v);
    let r = w.adjoint() * rho.matrix() * &w;
    let mut residual: f64 = 0.0;
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            if i != j {
                residual = residual.max(r[(i, j)].norm());
            }
        }
    }
    let kind = if residual <= tol {
        Kind::CC
    } else if a.residual <= tol {
        Kind::CQ
    } else if b.residual <= tol {
        Kind::QC
    } else {
        Kind::Neither
    };
    Ok(ClassicalityVerdict {
        kind,
        basis_a: Some(u),
        basis_b: Some(v),
        residual,
        residual_a: Some(a.residual),
        residual_b: Some(b.residual),
        tol,
    })
}

/// Largest Frobenius norm of a pairwise commutator.
pub fn commute_residual(ops: &[CMat]) -> Result<f64> {
    let Some(first) = ops.first() else {
        return Ok(0.0);
    };
    let d = first.nrows();
    if let Some(bad) = ops.iter().find(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.nrows(),
        });
    }
    let mut worst: f64 = 0.0;
    for (i, x) in ops.iter().enumerate() {
        for y in &ops[i + 1..] {
            worst = worst.max(linalg::frobenius(&(x * y - y * x)));
        }
    }
    Ok(worst)
}

/// Transpose on the second party.
pub fn partial_transpose(rho: &DensityMatrix) -> Result<CMat> {
    check_bipartite(rho)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    Ok(CMat::from_fn(da * db, da * db, |r, s| {
        let (a, x) = (r / db, r % db);
        let (b, z) = (s / db, s % db);
        m[(a * db + z, b * db + x)]
    }))
}

pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    Ok(linalg::herm_eigenvalues(&partial_transpose(rho)?)[0])
}

/// `Ppt` when the partial transpose has no eigenvalue below `-PSD`.
pub fn ppt_label(rho: &DensityMatrix) -> Result<PptLabel> {
    Ok(if min_partial_transpose_eigenvalue(rho)? >= -tol::PSD {
        PptLabel::Ppt
    } else {
        PptLabel::Npt
    })
}
