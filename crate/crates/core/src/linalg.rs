//! Thin complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Thin SVD `m = u · diag(s) · v†` with the singular values sorted
/// descending. `u` has orthonormal columns (nrows × k), `v` likewise
/// (ncols × k), k = min(nrows, ncols).
///
/// The factorization is verified by reconstruction before returning:
/// nalgebra's implicit-QR SVD can mis-deflate rank-deficient complex
/// matrices at the tightest epsilon, so a ladder of tolerances is tried
/// until the product reproduces the input.
pub fn svd_desc(m: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let scale = m.norm().max(1.0);
    for (eps, max_iter) in [(1e-15, 400), (1e-13, 800), (f64::EPSILON, 0)] {
        let Some(svd) = m.clone().try_svd(true, true, eps, max_iter) else {
            continue;
        };
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let k = s.len();

        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).expect("singular values are finite"));

        let mut u_sorted = CMat::zeros(u.nrows(), k);
        let mut v_sorted = CMat::zeros(v_t.ncols(), k);
        let mut s_sorted = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            u_sorted.set_column(dst, &u.column(src));
            for r in 0..v_t.ncols() {
                v_sorted[(r, dst)] = v_t[(src, r)].conj();
            }
            s_sorted.push(s[src]);
        }

        let mut rebuilt = CMat::zeros(m.nrows(), m.ncols());
        for (idx, &sv) in s_sorted.iter().enumerate() {
            if sv == 0.0 {
                continue;
            }
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    rebuilt[(i, j)] += u_sorted[(i, idx)] * cr(sv) * v_sorted[(j, idx)].conj();
                }
            }
        }
        if (rebuilt - m).norm() <= 1e-11 * scale {
            return Ok((u_sorted, s_sorted, v_sorted));
        }
    }
    Err(Error::Linalg(
        "SVD did not produce a consistent factorization".into(),
    ))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Returns `(values, vectors)` with `m = vectors · diag(values) · vectors†`.
pub fn hermitian_eigen_desc(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vals[b]
            .partial_cmp(&vals[a])
            .expect("eigenvalues are finite")
    });
    let mut vecs = CMat::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        sorted.push(vals[src]);
    }
    (sorted, vecs)
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    match svd_desc(m) {
        Ok((_, s, _)) => s.first().copied().unwrap_or(0.0),
        Err(_) => m.norm(), // Frobenius upper bound as a fallback
    }
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let gram = m.adjoint() * m;
    max_abs_entry(&(gram - identity(m.nrows()))) <= tol
}

/// Complete `k` orthonormal columns to a full orthonormal basis of C^d by
/// Gram–Schmidt against the standard basis, in index order. Deterministic.
pub fn complete_orthonormal_basis(columns: &CMat) -> CMat {
    let d = columns.nrows();
    let k = columns.ncols();
    assert!(k <= d, "more columns than the space dimension");
    let mut basis = CMat::zeros(d, d);
    for j in 0..k {
        basis.set_column(j, &columns.column(j));
    }
    let mut have = k;
    for e in 0..d {
        if have == d {
            break;
        }
        let mut v = CVec::zeros(d);
        v[e] = cr(1.0);
        // Two passes of projection subtraction for numerical orthogonality.
        for _ in 0..2 {
            for j in 0..have {
                let col = basis.column(j);
                let overlap: Complex64 = col.iter().zip(v.iter()).map(|(b, x)| b.conj() * x).sum();
                for r in 0..d {
                    v[r] -= overlap * basis[(r, j)];
                }
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= cr(norm);
            basis.set_column(have, &v);
            have += 1;
        }
    }
    assert_eq!(have, d, "failed to complete orthonormal basis");
    basis
}

/// Hermitian PSD square root via eigendecomposition; small negative
/// eigenvalues from rounding are clipped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen_desc(m);
    let sqrt_diag = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| cr(x.max(0.0).sqrt())),
    ));
    &vecs * sqrt_diag * vecs.adjoint()
}

/// Uhlmann fidelity F(ρ, σ) = (Tr √(√ρ σ √ρ))² for PSD ρ, σ.
pub fn psd_fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let sr = psd_sqrt(rho);
    let inner = &sr * sigma * &sr;
    let (vals, _) = hermitian_eigen_desc(&inner);
    let tr: f64 = vals.iter().map(|&x| x.max(0.0).sqrt()).sum();
    tr * tr
}

/// Singular values of an arbitrary amplitude matrix, squared and sorted
/// descending: the unnormalized Schmidt weights of the state it encodes.
pub fn schmidt_weights_unnormalized(amplitudes: &CMat) -> Result<Vec<f64>> {
    let (_, s, _) = svd_desc(amplitudes)?;
    Ok(s.iter().map(|x| x * x).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_like(seed: u64, r: usize, cdim: usize) -> CMat {
        // Tiny deterministic LCG; good enough to exercise shapes.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(r, cdim, |_, _| c(next(), next()))
    }

    #[test]
    fn svd_reconstructs_and_sorts() {
        let m = random_like(7, 4, 3);
        let (u, s, v) = svd_desc(&m).unwrap();
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let mut rebuilt = CMat::zeros(4, 3);
        for k in 0..s.len() {
            for i in 0..4 {
                for j in 0..3 {
                    rebuilt[(i, j)] += u[(i, k)] * cr(s[k]) * v[(j, k)].conj();
                }
            }
        }
        assert!((rebuilt - m).norm() < 1e-12);
    }

    #[test]
    fn basis_completion_is_unitary() {
        let m = random_like(3, 5, 2);
        let (u, _, _) = svd_desc(&m).unwrap();
        let full = complete_orthonormal_basis(&u);
        assert!(is_unitary(&full, 1e-10));
        // The first columns are preserved.
        for j in 0..2 {
            for i in 0..5 {
                assert!((full[(i, j)] - u[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fidelity_of_orthogonal_supports_is_zero() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = cr(1.0);
        let mut b = CMat::zeros(2, 2);
        b[(1, 1)] = cr(1.0);
        assert!(psd_fidelity(&a, &b).abs() < 1e-12);
        assert!((psd_fidelity(&a, &a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let g = random_like(11, 3, 3);
        let rho = &g * g.adjoint();
        let s = psd_sqrt(&rho);
        assert!((&s * &s - rho).norm() < 1e-10);
    }
}
