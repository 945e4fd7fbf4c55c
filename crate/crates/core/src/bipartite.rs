//! Bipartite pure states and their exact linear-algebraic manipulation:
//! Schmidt decomposition, maximally entangled and precursor constructors,
//! partial trace, fidelity, entropy of entanglement.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::tol;

/// A normalized pure state of two parties, |Ψ⟩ = Σ_{i,j} C[i][j] |i⟩_A|j⟩_B.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    amplitudes: CMat,
}

impl BipartitePureState {
    /// Wrap an amplitude matrix; rejects non-normalized input.
    pub fn new(amplitudes: CMat) -> Result<Self> {
        Self::new_with_norm_tol(amplitudes, tol::NORM_TOL)
    }

    /// Like [`BipartitePureState::new`] with a caller-chosen normalization
    /// tolerance. Input inside the tolerance is rescaled to norm 1;
    /// deviations within a few ulps are left untouched.
    pub fn new_with_norm_tol(mut amplitudes: CMat, norm_tol: f64) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > norm_tol {
            return Err(Error::Normalization { norm });
        }
        if (norm - 1.0).abs() > 8.0 * f64::EPSILON && norm > 0.0 {
            amplitudes /= cr(norm.sqrt());
        }
        Ok(Self { amplitudes })
    }

    /// The canonical state Σ_i √λ_i |i⟩|i⟩ on an N×N space.
    pub fn from_schmidt(lambdas: &[f64]) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Parameter("empty Schmidt spectrum".into()));
        }
        if lambdas.iter().any(|&l| l < 0.0) {
            return Err(Error::Parameter("negative Schmidt coefficient".into()));
        }
        let n = lambdas.len();
        let mut amplitudes = CMat::zeros(n, n);
        for (i, &l) in lambdas.iter().enumerate() {
            amplitudes[(i, i)] = cr(l.sqrt());
        }
        Self::new(amplitudes)
    }

    pub fn dim_a(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn amplitudes(&self) -> &CMat {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Interchange the two parties (transpose of the amplitude matrix).
    pub fn swap_parties(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.transpose(),
        }
    }

    /// Embed into a larger space, padding amplitudes with zeros.
    pub fn embed(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < self.dim_a() || dim_b < self.dim_b() {
            return Err(Error::Dimension(format!(
                "cannot embed {}x{} state into {}x{}",
                self.dim_a(),
                self.dim_b(),
                dim_a,
                dim_b
            )));
        }
        let mut amplitudes = CMat::zeros(dim_a, dim_b);
        for i in 0..self.dim_a() {
            for j in 0..self.dim_b() {
                amplitudes[(i, j)] = self.amplitudes[(i, j)];
            }
        }
        Ok(Self { amplitudes })
    }

    /// Schmidt decomposition with the default rank threshold.
    pub fn schmidt(&self) -> Result<SchmidtDecomposition> {
        schmidt_decompose(self, tol::RANK_TOL)
    }
}

/// Ordered Schmidt decomposition |Ψ⟩ = Σ_i √λ_i |a_i⟩|b_i⟩ with
/// λ_1 ≥ λ_2 ≥ … and orthonormal local bases.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Squared Schmidt coefficients, sorted non-increasing, summing to 1.
    pub lambdas: Vec<f64>,
    /// dim_a × N matrix whose columns are the |a_i⟩.
    pub basis_a: CMat,
    /// dim_b × N matrix whose columns are the |b_i⟩.
    pub basis_b: CMat,
    /// Threshold used for rank counting (relative to λ_1).
    pub rank_tol: f64,
}

impl SchmidtDecomposition {
    /// Number of retained Schmidt terms.
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// Rebuild the amplitude matrix Σ_i √λ_i |a_i⟩⟨b_i*|.
    pub fn reconstruct(&self) -> CMat {
        let (da, db) = (self.basis_a.nrows(), self.basis_b.nrows());
        let mut m = CMat::zeros(da, db);
        for (k, &l) in self.lambdas.iter().enumerate() {
            let w = cr(l.sqrt());
            for i in 0..da {
                for j in 0..db {
                    m[(i, j)] += w * self.basis_a[(i, k)] * self.basis_b[(j, k)];
                }
            }
        }
        m
    }
}

/// Schmidt-decompose a normalized state.
///
/// The output is deterministic: the largest-magnitude entry of each |a_i⟩
/// is made real positive, and exact ties in λ are broken by lexicographic
/// order of the |a_i⟩ columns after phase fixing.
pub fn schmidt_decompose(
    state: &BipartitePureState,
    rank_tol: f64,
) -> Result<SchmidtDecomposition> {
    let norm = state.norm_sq();
    if (norm - 1.0).abs() > tol::NORM_TOL {
        return Err(Error::Normalization { norm });
    }
    let (u, s, v) = linalg::svd_desc(state.amplitudes())?;

    let lambdas_full: Vec<f64> = s.iter().map(|x| x * x).collect();
    let lead = lambdas_full.first().copied().unwrap_or(0.0);
    let rank = lambdas_full
        .iter()
        .take_while(|&&l| l > rank_tol * lead)
        .count()
        .max(1);

    let mut basis_a = CMat::zeros(u.nrows(), rank);
    let mut basis_b = CMat::zeros(v.nrows(), rank);
    let mut lambdas = Vec::with_capacity(rank);
    for k in 0..rank {
        basis_a.set_column(k, &u.column(k));
        // C = U·S·V†, so the B-side kets are the conjugated right
        // singular vectors: C[x][y] = Σ_k √λ_k a_k[x] b_k[y].
        for r in 0..v.nrows() {
            basis_b[(r, k)] = v[(r, k)].conj();
        }
        lambdas.push(lambdas_full[k]);
    }

    // Phase convention: rotate each pair (|a_k⟩, |b_k⟩) so the largest-
    // magnitude entry of |a_k⟩ is real positive; compensating phase on
    // |b_k⟩ keeps the reconstruction unchanged.
    for k in 0..rank {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for r in 0..basis_a.nrows() {
            let mag = basis_a[(r, k)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = r;
            }
        }
        if best_mag > 0.0 {
            let phase = basis_a[(best, k)] / cr(best_mag);
            for r in 0..basis_a.nrows() {
                basis_a[(r, k)] *= phase.conj();
            }
            for r in 0..basis_b.nrows() {
                basis_b[(r, k)] *= phase;
            }
        }
    }

    // Exact ties in λ: order the tied columns lexicographically by the
    // entries of |a_k⟩ so repeated runs yield identical bases.
    let mut k = 0;
    while k < rank {
        let mut end = k + 1;
        while end < rank && lambdas[end] == lambdas[k] {
            end += 1;
        }
        if end - k > 1 {
            let mut cols: Vec<usize> = (k..end).collect();
            cols.sort_by(|&a, &b| lex_cmp_columns(&basis_a, a, b));
            let a_copy = basis_a.clone();
            let b_copy = basis_b.clone();
            for (dst, &src) in (k..end).zip(cols.iter()) {
                basis_a.set_column(dst, &a_copy.column(src));
                basis_b.set_column(dst, &b_copy.column(src));
            }
        }
        k = end;
    }

    Ok(SchmidtDecomposition {
        lambdas,
        basis_a,
        basis_b,
        rank_tol,
    })
}

fn lex_cmp_columns(m: &CMat, a: usize, b: usize) -> std::cmp::Ordering {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, a)], m[(r, b)]);
        match x
            .re
            .partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
        {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// The m-dimensional maximally entangled state Φ_m = (1/√m) Σ_{i≤m} |i⟩|i⟩,
/// embedded into a dim_a × dim_b space.
pub fn make_me_state(m: usize, dim_a: usize, dim_b: usize) -> Result<BipartitePureState> {
    if m == 0 {
        return Err(Error::Parameter("m must be positive".into()));
    }
    if m > dim_a || m > dim_b {
        return Err(Error::Dimension(format!(
            "Φ_{m} does not fit in a {dim_a}x{dim_b} space"
        )));
    }
    let w = cr(1.0 / (m as f64).sqrt());
    let mut amplitudes = CMat::zeros(dim_a, dim_b);
    for i in 0..m {
        amplitudes[(i, i)] = w;
    }
    BipartitePureState::new(amplitudes)
}

/// The precursor state
/// |Ψ_pre^{m,p,q}⟩ = (1/√m)( Σ_{j≤m−p} |jj⟩ + Σ_{m−p<j≤m+q} √(p/(p+q)) |jj⟩ )
/// on an (m+q) × (m+q) space. The q = 0 case is exactly Φ_m.
pub fn make_precursor(m: usize, p: usize, q: usize) -> Result<BipartitePureState> {
    if p == 0 || p > m {
        return Err(Error::Parameter(format!(
            "precursor requires 0 < p ≤ m, got p={p}, m={m}"
        )));
    }
    let dim = m + q;
    let head = cr(1.0 / (m as f64).sqrt());
    let block = head * cr((p as f64 / (p + q) as f64).sqrt());
    let mut amplitudes = CMat::zeros(dim, dim);
    for j in 0..(m - p) {
        amplitudes[(j, j)] = head;
    }
    for j in (m - p)..(m + q) {
        amplitudes[(j, j)] = block;
    }
    BipartitePureState::new(amplitudes)
}

/// Hermitian positive-semidefinite snapshot of a subsystem. The trace may
/// be below 1 for unnormalized branch states.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMat,
}

impl DensityOperator {
    /// Wrap a matrix; rejects non-Hermitian input (entrywise, 1e-10).
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension("density operator must be square".into()));
        }
        let herm_dev = linalg::max_abs_entry(&(&matrix - matrix.adjoint()));
        if herm_dev > tol::PSD_TOL {
            return Err(Error::Parameter(format!(
                "matrix is not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen_desc(&self.matrix).0
    }

    /// Check positive semidefiniteness within the PSD tolerance.
    pub fn validate_psd(&self) -> Result<()> {
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol::PSD_TOL {
            return Err(Error::Parameter(format!(
                "negative eigenvalue {min:.3e} in density operator"
            )));
        }
        Ok(())
    }
}

/// Reduced state of party A: ρ_A = Tr_B |Ψ⟩⟨Ψ| = C·C†.
pub fn partial_trace_b(state: &BipartitePureState) -> DensityOperator {
    let c = state.amplitudes();
    DensityOperator {
        matrix: c * c.adjoint(),
    }
}

/// Reduced state of party B: ρ_B = Tr_A |Ψ⟩⟨Ψ| = (C†·C)ᵀ.
pub fn partial_trace_a(state: &BipartitePureState) -> DensityOperator {
    let c = state.amplitudes();
    DensityOperator {
        matrix: (c.adjoint() * c).transpose(),
    }
}

/// Von Neumann entropy of either reduced state, in bits:
/// E = −Σ_i λ_i log₂ λ_i with 0·log 0 = 0.
pub fn entropy_of_entanglement(sd: &SchmidtDecomposition) -> f64 {
    entropy_of_spectrum(&sd.lambdas)
}

pub fn entropy_of_spectrum(lambdas: &[f64]) -> f64 {
    -lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.log2())
        .sum::<f64>()
}

/// Squared overlap |⟨target|state⟩|², embedding into common dimensions.
pub fn fidelity_to(state: &BipartitePureState, target: &BipartitePureState) -> Result<f64> {
    let da = state.dim_a().max(target.dim_a());
    let db = state.dim_b().max(target.dim_b());
    let s = state.embed(da, db)?;
    let t = target.embed(da, db)?;
    let overlap: Complex64 = t
        .amplitudes()
        .iter()
        .zip(s.amplitudes().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(overlap.norm_sqr())
}

/// Whether two states have the same ordered Schmidt spectrum within
/// `tol`, the local-unitary-invariant notion of equivalence.
pub fn spectra_equal(a: &BipartitePureState, b: &BipartitePureState, tol: f64) -> Result<bool> {
    let mut sa = linalg::schmidt_weights_unnormalized(a.amplitudes())?;
    let mut sb = linalg::schmidt_weights_unnormalized(b.amplitudes())?;
    let len = sa.len().max(sb.len());
    sa.resize(len, 0.0);
    sb.resize(len, 0.0);
    Ok(sa.iter().zip(sb.iter()).all(|(x, y)| (x - y).abs() <= tol))
}
