//! The interchange symmetry made operational: any Bob-side measurement
//! operator can be replaced by an Alice-side one with the same matrix
//! elements in the Schmidt bases, up to local unitaries fixed by one round
//! of one-way communication. Also the communication-necessity demo built
//! on conservation of Bob's reduced density matrix.

use crate::bipartite::BipartitePureState;
use crate::bounds::bound_table;
use crate::error::{Error, Result};
use crate::linalg::{self, cr, identity, CMat};
use crate::strategy::{compile, Verdict};
use crate::tol;

/// An Alice-side replacement for a Bob-side operator:
/// (I ⊗ P_Bob)|Ψ⟩ = (u_a ⊗ u_b)(P_Alice ⊗ I)|Ψ⟩ within residual_error.
///
/// All matrices live on the common embedded dimension max(dim_a, dim_b).
#[derive(Debug, Clone)]
pub struct TransferResult {
    pub p_alice: CMat,
    pub u_a: CMat,
    pub u_b: CMat,
    /// Norm of (I⊗P_Bob)|Ψ⟩ − (u_a⊗u_b)(P_Alice⊗I)|Ψ⟩.
    pub residual_error: f64,
    /// Both sides annihilate the state; the identity holds trivially and
    /// the unitaries default to the identity.
    pub degenerate: bool,
}

/// Build the Alice-side counterpart of an arbitrary Bob-side operator.
///
/// `p_bob` may be any matrix on Bob's space (projector or not). The
/// construction writes it in the extended Schmidt basis, mirrors the
/// matrix elements onto Alice's side, and derives the two local unitaries
/// from the SVD that puts (P_Alice ⊗ I)|Ψ⟩ into Schmidt form.
pub fn transfer_bob_to_alice(state: &BipartitePureState, p_bob: &CMat) -> Result<TransferResult> {
    if p_bob.nrows() != state.dim_b() || p_bob.ncols() != state.dim_b() {
        return Err(Error::Dimension(format!(
            "Bob operator is {}x{}, state's B side has dimension {}",
            p_bob.nrows(),
            p_bob.ncols(),
            state.dim_b()
        )));
    }
    let d = state.dim_a().max(state.dim_b());
    let embedded = state.embed(d, d)?;
    let sd = embedded.schmidt()?;
    let rank = sd.rank();

    let basis_a = linalg::complete_orthonormal_basis(&sd.basis_a);
    let basis_b = linalg::complete_orthonormal_basis(&sd.basis_b);

    let mut p_emb = CMat::zeros(d, d);
    for i in 0..p_bob.nrows() {
        for j in 0..p_bob.ncols() {
            p_emb[(i, j)] = p_bob[(i, j)];
        }
    }

    // Matrix elements in the extended Schmidt basis; exact because the
    // basis is a full unitary.
    let m_elems = basis_b.adjoint() * &p_emb * &basis_b;
    let p_alice = &basis_a * &m_elems * basis_a.adjoint();

    // Index-space amplitudes of (P_Alice ⊗ I)|Ψ⟩ are M·diag(√λ); the
    // Bob-side counterpart is exactly the transpose.
    let mut index_amp = m_elems.clone();
    for k in 0..d {
        let w = if k < rank { sd.lambdas[k].sqrt() } else { 0.0 };
        for r in 0..d {
            index_amp[(r, k)] *= cr(w);
        }
    }

    let psi_b = embedded.amplitudes() * p_emb.transpose();
    let psi_a = &p_alice * embedded.amplitudes();

    if index_amp.norm() < 1e-14 {
        let residual_error = (&psi_b - &psi_a).norm();
        return Ok(TransferResult {
            p_alice,
            u_a: identity(d),
            u_b: identity(d),
            residual_error,
            degenerate: true,
        });
    }

    let (x, _, y) = linalg::svd_desc(&index_amp)?;
    // With A = X·Σ·Y†, the index-space rotations α = Ȳ·X† and β = X·Yᵀ
    // satisfy α·A·βᵀ = Aᵀ, which is the transfer identity in coordinates.
    let alpha = y.map(|z| z.conj()) * x.adjoint();
    let beta = &x * y.transpose();
    let u_a = &basis_a * alpha * basis_a.adjoint();
    let u_b = &basis_b * beta * basis_b.adjoint();

    let rotated = &u_a * &psi_a * u_b.transpose();
    let residual_error = (&psi_b - rotated).norm();

    Ok(TransferResult {
        p_alice,
        u_a,
        u_b,
        residual_error,
        degenerate: false,
    })
}

/// Aggregate of a random transfer corpus: the CLI-facing summary for the
/// symmetry check.
#[derive(Debug, Clone)]
pub struct TransferCorpusReport {
    pub trials: usize,
    /// Trials whose residual or spectrum deviation broke tolerance.
    pub failures: usize,
    pub max_residual: f64,
    pub max_spectrum_deviation: f64,
    /// Full transfer result of the first trial, as a concrete witness.
    pub example: TransferResult,
}

/// Run `trials` random (state, Bob-operator) transfers with local
/// dimensions up to `max_dim`, alternating rank-deficient projectors and
/// general complex matrices.
pub fn transfer_random_corpus(
    trials: usize,
    seed: u64,
    max_dim: usize,
) -> Result<TransferCorpusReport> {
    use crate::random::{complex_normal, random_state, random_unitary, rng_from_seed};
    use rand::Rng;

    if trials == 0 {
        return Err(Error::Parameter("trials must be ≥ 1".into()));
    }
    let max_dim = max_dim.clamp(2, 8);
    let mut rng = rng_from_seed(seed);
    let mut failures = 0;
    let mut max_residual = 0.0f64;
    let mut max_spectrum_deviation = 0.0f64;
    let mut example = None;

    for trial in 0..trials {
        let da = rng.random_range(2..=max_dim);
        let db = rng.random_range(2..=max_dim);
        let state = random_state(&mut rng, da, db);
        let p_bob = if trial % 2 == 0 {
            let u = random_unitary(&mut rng, db);
            let rank = rng.random_range(1..db);
            let mut p = CMat::zeros(db, db);
            for k in 0..rank {
                let col = u.column(k);
                for i in 0..db {
                    for j in 0..db {
                        p[(i, j)] += col[i] * col[j].conj();
                    }
                }
            }
            p
        } else {
            CMat::from_fn(db, db, |_, _| complex_normal(&mut rng) * 0.5)
        };

        let out = transfer_bob_to_alice(&state, &p_bob)?;
        max_residual = max_residual.max(out.residual_error);

        let d = da.max(db);
        let embedded = state.embed(d, d)?;
        let mut p_emb = CMat::zeros(d, d);
        for i in 0..db {
            for j in 0..db {
                p_emb[(i, j)] = p_bob[(i, j)];
            }
        }
        let wa = linalg::schmidt_weights_unnormalized(&(&out.p_alice * embedded.amplitudes()))?;
        let wb =
            linalg::schmidt_weights_unnormalized(&(embedded.amplitudes() * p_emb.transpose()))?;
        let spectrum_dev = wa
            .iter()
            .zip(wb.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_spectrum_deviation = max_spectrum_deviation.max(spectrum_dev);

        if out.residual_error > tol::TRANSFER_RESIDUAL_TOL || spectrum_dev > 1e-9 {
            failures += 1;
        }
        if example.is_none() {
            example = Some(out);
        }
    }

    Ok(TransferCorpusReport {
        trials,
        failures,
        max_residual,
        max_spectrum_deviation,
        example: example.expect("trials ≥ 1"),
    })
}

/// Report of the communication-necessity demonstration on the two-term
/// family √a²|11⟩ + √(1−a²)|22⟩ with 1/2 < a² < 1.
#[derive(Debug, Clone)]
pub struct NecessityReport {
    pub a2: f64,
    /// Frobenius norm of ρ_success + ρ_failure − ρ_initial on Bob's side.
    pub rho_sum_error: f64,
    /// Uhlmann fidelity of the normalized success/failure reduced states.
    pub support_fidelity: f64,
    /// support_fidelity > 1e-10: Bob cannot tell the verdicts apart
    /// locally, so Alice must send her outcome.
    pub support_overlap: bool,
    /// Trace of ρ_success; equals the optimal conversion probability.
    pub p_success: f64,
    /// Bound-table p_max = 2(1−a²) for cross-checking.
    pub p_max: f64,
}

fn bob_reduced(amplitudes: &CMat) -> CMat {
    (amplitudes.adjoint() * amplitudes).transpose()
}

/// Compile the optimal m = 2 strategy on √a²|11⟩ + √(1−a²)|22⟩ and verify
/// that Bob's density matrix is conserved while the success and failure
/// supports overlap.
pub fn communication_necessity_demo(a2: f64) -> Result<NecessityReport> {
    if !(a2 > 0.5 && a2 < 1.0) {
        return Err(Error::Precondition(format!(
            "need 1/2 < a² < 1 so that 0 < p₂ < 1, got a² = {a2}"
        )));
    }
    let lambdas = [a2, 1.0 - a2];
    let state = BipartitePureState::from_schmidt(&lambdas)?;
    let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL)?;

    let c = state.amplitudes();
    let mut rho_success = CMat::zeros(2, 2);
    let mut rho_failure = CMat::zeros(2, 2);
    for branch in &strategy.branches {
        let amp = branch.kraus_matrix() * c;
        let rho = bob_reduced(&amp);
        match branch.verdict {
            Verdict::Success => rho_success += rho,
            Verdict::Failure => rho_failure += rho,
        }
    }
    let rho_initial = bob_reduced(c);
    let rho_sum_error = (&rho_success + &rho_failure - rho_initial).norm();

    let p_success = (0..2).map(|i| rho_success[(i, i)].re).sum::<f64>();
    let p_failure = (0..2).map(|i| rho_failure[(i, i)].re).sum::<f64>();
    let support_fidelity = linalg::psd_fidelity(
        &(&rho_success / cr(p_success)),
        &(&rho_failure / cr(p_failure)),
    );

    Ok(NecessityReport {
        a2,
        rho_sum_error,
        support_fidelity,
        support_overlap: support_fidelity > 1e-10,
        p_success,
        p_max: bound_table(&lambdas, 2)?.p_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn two_term_state() -> BipartitePureState {
        BipartitePureState::from_schmidt(&[0.8, 0.2]).unwrap()
    }

    #[test]
    fn diagonal_projector_transfers_to_itself() {
        let state = two_term_state();
        let mut p_bob = CMat::zeros(2, 2);
        p_bob[(0, 0)] = cr(1.0);
        let out = transfer_bob_to_alice(&state, &p_bob).unwrap();
        assert!(out.residual_error < 1e-12);
        assert!(!out.degenerate);
        // The projector is diagonal in the Schmidt basis, so Alice's copy
        // is |1⟩⟨1| as well.
        assert!((out.p_alice[(0, 0)] - cr(1.0)).norm() < 1e-10);
        assert!(out.p_alice[(1, 1)].norm() < 1e-10);
    }

    #[test]
    fn plus_projector_gives_single_schmidt_weight_half() {
        let state = two_term_state();
        let half = cr(0.5);
        let p_bob = CMat::from_row_slice(2, 2, &[half, half, half, half]);
        let out = transfer_bob_to_alice(&state, &p_bob).unwrap();
        assert!(out.residual_error < 1e-9, "residual {}", out.residual_error);
        assert!(linalg::is_unitary(&out.u_a, 1e-10));
        assert!(linalg::is_unitary(&out.u_b, 1e-10));

        let psi_b = state.amplitudes() * p_bob.transpose();
        let weights = linalg::schmidt_weights_unnormalized(&psi_b).unwrap();
        assert!((weights[0] - 0.5).abs() < 1e-12);
        assert!(weights[1].abs() < 1e-12);
    }

    #[test]
    fn complex_operator_transfer_has_tiny_residual() {
        let state = BipartitePureState::from_schmidt(&[0.5, 0.3, 0.2]).unwrap();
        let p_bob = CMat::from_row_slice(
            3,
            3,
            &[
                c(0.3, 0.1),
                c(0.0, -0.4),
                cr(0.2),
                c(0.1, 0.1),
                cr(0.5),
                c(-0.2, 0.3),
                cr(0.0),
                c(0.2, -0.2),
                c(0.4, 0.0),
            ],
        );
        let out = transfer_bob_to_alice(&state, &p_bob).unwrap();
        assert!(
            out.residual_error < 1e-10,
            "residual {}",
            out.residual_error
        );

        // Both post-measurement states carry the same Schmidt weights.
        let psi_b = state.amplitudes() * p_bob.transpose();
        let psi_a = &out.p_alice * state.amplitudes();
        let wb = linalg::schmidt_weights_unnormalized(&psi_b).unwrap();
        let wa = linalg::schmidt_weights_unnormalized(&psi_a).unwrap();
        for (a, b) in wa.iter().zip(wb.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn annihilating_operator_is_flagged_degenerate() {
        // The state lives on indices {1, 2}; a projector onto index 3
        // annihilates it on both sides.
        let state = BipartitePureState::new({
            let mut m = CMat::zeros(3, 3);
            m[(0, 0)] = cr(0.8f64.sqrt());
            m[(1, 1)] = cr(0.2f64.sqrt());
            m
        })
        .unwrap();
        let mut p_bob = CMat::zeros(3, 3);
        p_bob[(2, 2)] = cr(1.0);
        let out = transfer_bob_to_alice(&state, &p_bob).unwrap();
        assert!(out.degenerate);
        assert!(out.residual_error < 1e-12);
    }

    #[test]
    fn necessity_demo_hand_case() {
        let report = communication_necessity_demo(0.8).unwrap();
        assert!(report.rho_sum_error < 1e-12);
        assert!(report.support_overlap);
        assert!((report.p_success - 0.4).abs() < 1e-12);
        assert!((report.p_max - 0.4).abs() < 1e-12);
        // ρ_success = 0.2·I has fidelity 1/2 against |1⟩⟨1|.
        assert!((report.support_fidelity - 0.5).abs() < 1e-9);
    }

    #[test]
    fn necessity_demo_near_boundary() {
        let report = communication_necessity_demo(0.51).unwrap();
        assert!(report.rho_sum_error < 1e-10);
        assert!(report.support_overlap);
        assert!((report.p_success - 0.98).abs() < 1e-12);
    }

    #[test]
    fn necessity_demo_rejects_certainty_regime() {
        assert!(matches!(
            communication_necessity_demo(0.5),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            communication_necessity_demo(0.3),
            Err(Error::Precondition(_))
        ));
    }
}
