//! Exact and sampled execution of compiled strategies on concrete states,
//! with per-branch verdict verification.

use rayon::prelude::*;

use crate::bipartite::BipartitePureState;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, CMat};
use crate::random::rng_from_seed;
use crate::strategy::{CompiledStrategy, Verdict};
use crate::tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one branch under exact execution.
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub label: String,
    pub probability: f64,
    /// Normalized Schmidt spectrum of the branch output (empty for
    /// near-null branches).
    pub output_spectrum: Vec<f64>,
    pub verdict: Verdict,
    pub verdict_verified: bool,
}

#[derive(Debug, Clone)]
pub struct ExecutionReport {
    pub branch_results: Vec<BranchResult>,
    pub total_success: f64,
    /// Operator-norm deviation of Σ K†K from the identity on the support.
    pub completeness_residual: f64,
}

fn spectrum_rank(spectrum: &[f64], rank_tol: f64) -> usize {
    let lead = spectrum.first().copied().unwrap_or(0.0);
    spectrum
        .iter()
        .take_while(|&&l| l > rank_tol * lead)
        .count()
}

/// Run every branch of a compiled strategy on a state with a matching
/// Schmidt spectrum: exact probabilities, exact output spectra, and a
/// verdict check (success ⇒ uniform 1/m spectrum; failure ⇒ rank < m).
pub fn execute_exact(
    strategy: &CompiledStrategy,
    state: &BipartitePureState,
) -> Result<ExecutionReport> {
    let sd = state.schmidt()?;
    if sd.rank() != strategy.input_spectrum.len() {
        return Err(Error::StateMismatch(format!(
            "state has Schmidt rank {}, strategy was compiled for rank {}",
            sd.rank(),
            strategy.input_spectrum.len()
        )));
    }
    for (i, (&a, &b)) in sd
        .lambdas
        .iter()
        .zip(strategy.input_spectrum.iter())
        .enumerate()
    {
        if (a - b).abs() > tol::SPECTRUM_MATCH_TOL {
            return Err(Error::StateMismatch(format!(
                "Schmidt coefficient {i}: state has {a}, strategy expects {b}"
            )));
        }
    }
    let lambdas = &sd.lambdas;
    let m = strategy.m;

    let branch_results: Vec<BranchResult> = strategy
        .branches
        .iter()
        .map(|branch| {
            // (K ⊗ I)|Ψ⟩ in the Schmidt bases has amplitude matrix
            // K·diag(√λ); for a monomial K its squared singular values are
            // just λ_j·|scale_j|².
            let mut weights: Vec<f64> = (0..lambdas.len())
                .filter_map(|j| {
                    branch
                        .kraus()
                        .column_entry(j)
                        .map(|(_, z)| lambdas[j] * z.norm_sqr())
                })
                .filter(|&w| w > 0.0)
                .collect();
            weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let probability: f64 = weights.iter().sum();

            let (output_spectrum, verdict_verified) = if probability < tol::NULL_BRANCH_TOL {
                (Vec::new(), true) // excluded from verification
            } else {
                let spectrum: Vec<f64> = weights.iter().map(|w| w / probability).collect();
                let rank = spectrum_rank(&spectrum, sd.rank_tol);
                let verified = match branch.verdict {
                    Verdict::Success => {
                        rank == m
                            && spectrum[..rank]
                                .iter()
                                .all(|&l| (l - 1.0 / m as f64).abs() <= tol::UNIFORM_SPECTRUM_TOL)
                    }
                    Verdict::Failure => rank < m,
                };
                (spectrum, verified)
            };

            BranchResult {
                label: branch.label.clone(),
                probability,
                output_spectrum,
                verdict: branch.verdict,
                verdict_verified,
            }
        })
        .collect();

    let total_success = branch_results
        .iter()
        .filter(|b| b.verdict == Verdict::Success)
        .map(|b| b.probability)
        .sum();

    Ok(ExecutionReport {
        branch_results,
        total_success,
        completeness_residual: strategy.completeness_residual(),
    })
}

/// Histogram of sampled branch labels, aligned with the strategy's branch
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<(String, u64)>,
    pub shots: u64,
}

/// Shots handled per RNG stream; sampling is deterministic for a given
/// seed regardless of worker count.
const SAMPLE_BATCH: u64 = 16_384;

/// Sample branch outcomes. Seeded and bit-reproducible: shots are split
/// into fixed batches, each drawing from its own ChaCha stream, and the
/// per-batch histograms merge associatively.
pub fn sample(
    strategy: &CompiledStrategy,
    state: &BipartitePureState,
    shots: u64,
    seed: u64,
) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be ≥ 1".into()));
    }
    let report = execute_exact(strategy, state)?;
    let total: f64 = report.branch_results.iter().map(|b| b.probability).sum();
    let mut cumulative = Vec::with_capacity(report.branch_results.len());
    let mut acc = 0.0;
    for b in &report.branch_results {
        acc += b.probability / total;
        cumulative.push(acc);
    }

    let batches = shots.div_ceil(SAMPLE_BATCH);
    let counts_per_batch: Vec<Vec<u64>> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch + 1);
            let in_batch = SAMPLE_BATCH.min(shots - batch * SAMPLE_BATCH);
            let mut counts = vec![0u64; cumulative.len()];
            for _ in 0..in_batch {
                let u: f64 = rng.random();
                let idx = cumulative.partition_point(|&c| c < u).min(counts.len() - 1);
                counts[idx] += 1;
            }
            counts
        })
        .collect();

    let mut merged = vec![0u64; cumulative.len()];
    for batch in counts_per_batch {
        for (dst, src) in merged.iter_mut().zip(batch) {
            *dst += src;
        }
    }
    Ok(Histogram {
        counts: report
            .branch_results
            .iter()
            .map(|b| b.label.clone())
            .zip(merged)
            .collect(),
        shots,
    })
}

/// Draw random two-outcome Alice-side measurements (M, √(I − M†M)) and
/// check that no outcome ever increases the Schmidt rank. Returns true iff
/// all trials pass.
pub fn random_local_measurement_check(
    state: &BipartitePureState,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let c = state.amplitudes();
    let base_rank = {
        let weights = linalg::schmidt_weights_unnormalized(c)?;
        spectrum_rank(&weights, tol::RANK_TOL)
    };
    let dim = state.dim_a();
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let g = CMat::from_fn(dim, dim, |_, _| crate::random::complex_normal(&mut rng));
        let scale = linalg::operator_norm(&g) * (1.0 + 1e-9);
        let m_op = g / crate::linalg::cr(scale);
        let complement = linalg::psd_sqrt(&(identity(dim) - m_op.adjoint() * &m_op));
        for outcome in [&m_op, &complement] {
            let amp = outcome * c;
            let weights = linalg::schmidt_weights_unnormalized(&amp)?;
            let rank = spectrum_rank(&weights, tol::RANK_TOL);
            if rank > base_rank {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{make_me_state, BipartitePureState};
    use crate::strategy::compile;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn execute_trim_strategy() {
        let lambdas = [0.8, 0.2];
        let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL).unwrap();
        let state = BipartitePureState::from_schmidt(&lambdas).unwrap();
        let report = execute_exact(&strategy, &state).unwrap();
        assert_close(report.total_success, 0.4, 1e-12);
        assert!(report.branch_results.iter().all(|b| b.verdict_verified));
        let sum: f64 = report.branch_results.iter().map(|b| b.probability).sum();
        assert_close(sum, 1.0, 1e-12);
        assert!(report.completeness_residual < 1e-12);
    }

    #[test]
    fn execute_downgrade_chain_phi4_to_phi2() {
        let strategy = compile(&[0.25; 4], 2, tol::DEGENERACY_TOL).unwrap();
        let state = make_me_state(4, 4, 4).unwrap();
        let report = execute_exact(&strategy, &state).unwrap();
        assert_close(report.total_success, 1.0, 1e-10);
        assert!(report.branch_results.iter().all(|b| b.verdict_verified));
    }

    #[test]
    fn execute_product_state_m2() {
        let strategy = compile(&[1.0], 2, tol::DEGENERACY_TOL).unwrap();
        let state = make_me_state(1, 1, 1).unwrap();
        let report = execute_exact(&strategy, &state).unwrap();
        assert_close(report.total_success, 0.0, 1e-15);
    }

    #[test]
    fn execute_on_embedded_lower_rank_state() {
        // Rank-2 state living in a 3×4 space: the strategy acts on the
        // 2-dimensional Schmidt index space regardless of ambient dims.
        let strategy = compile(&[0.8, 0.2], 2, tol::DEGENERACY_TOL).unwrap();
        let state = BipartitePureState::from_schmidt(&[0.8, 0.2])
            .unwrap()
            .embed(3, 4)
            .unwrap();
        let report = execute_exact(&strategy, &state).unwrap();
        assert_close(report.total_success, 0.4, 1e-12);
        assert!(report.branch_results.iter().all(|b| b.verdict_verified));
    }

    #[test]
    fn execute_rejects_mismatched_state() {
        let strategy = compile(&[0.8, 0.2], 2, tol::DEGENERACY_TOL).unwrap();
        let state = BipartitePureState::from_schmidt(&[0.7, 0.3]).unwrap();
        assert!(matches!(
            execute_exact(&strategy, &state),
            Err(Error::StateMismatch(_))
        ));
    }

    #[test]
    fn sampling_matches_exact_within_three_sigma() {
        let lambdas = [0.8, 0.2];
        let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL).unwrap();
        let state = BipartitePureState::from_schmidt(&lambdas).unwrap();
        let shots = 100_000u64;
        let hist = sample(&strategy, &state, shots, 42).unwrap();
        let success: u64 = hist
            .counts
            .iter()
            .filter(|(label, _)| label.starts_with("r-t1"))
            .map(|(_, c)| c)
            .sum();
        let freq = success as f64 / shots as f64;
        let sigma = (0.4 * 0.6 / shots as f64).sqrt();
        assert!(
            (freq - 0.4).abs() <= 3.0 * sigma,
            "sampled {freq} outside 0.4 ± {}",
            3.0 * sigma
        );
    }

    #[test]
    fn sampling_is_deterministic_and_single_shot_works() {
        let lambdas = [0.8, 0.2];
        let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL).unwrap();
        let state = BipartitePureState::from_schmidt(&lambdas).unwrap();
        let h1 = sample(&strategy, &state, 1000, 7).unwrap();
        let h2 = sample(&strategy, &state, 1000, 7).unwrap();
        assert_eq!(h1, h2);

        let single = sample(&strategy, &state, 1, 7).unwrap();
        let total: u64 = single.counts.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn rank_never_increases_under_random_measurements() {
        let state = BipartitePureState::from_schmidt(&[0.7, 0.3]).unwrap();
        assert!(random_local_measurement_check(&state, 200, 11).unwrap());

        let product = make_me_state(1, 3, 3).unwrap();
        assert!(random_local_measurement_check(&product, 50, 12).unwrap());

        let phi3 = make_me_state(3, 3, 3).unwrap();
        assert!(random_local_measurement_check(&phi3, 50, 13).unwrap());
    }

    #[test]
    fn execution_is_basis_independent() {
        // A locally rotated state has the same Schmidt spectrum, and the
        // strategy acts in its Schmidt bases: the report must match the
        // canonical-state one branch for branch.
        use crate::random::{random_unitary, rng_from_seed};

        let lambdas = [0.5, 0.3, 0.2];
        let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL).unwrap();
        let canonical = BipartitePureState::from_schmidt(&lambdas).unwrap();
        let baseline = execute_exact(&strategy, &canonical).unwrap();

        let mut rng = rng_from_seed(21);
        let u = random_unitary(&mut rng, 3);
        let v = random_unitary(&mut rng, 3);
        let rotated =
            BipartitePureState::new(u * canonical.amplitudes() * v.transpose()).unwrap();
        assert!((rotated.amplitudes() - canonical.amplitudes()).norm() > 1e-3);

        let report = execute_exact(&strategy, &rotated).unwrap();
        assert_eq!(report.branch_results.len(), baseline.branch_results.len());
        for (a, b) in report
            .branch_results
            .iter()
            .zip(baseline.branch_results.iter())
        {
            assert!((a.probability - b.probability).abs() < 1e-12);
            assert_eq!(a.verdict, b.verdict);
            assert!(a.verdict_verified);
        }
        assert!((report.total_success - baseline.total_success).abs() < 1e-12);
    }
}
