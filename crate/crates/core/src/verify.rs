//! The invariant suite behind `verify`: every structural promise of the
//! library checked over a seeded random corpus, one named result per
//! check.

use rand::Rng;

use crate::analysis::{
    all_me_distribution, cumulative_bound_check, extraction_residual, universality_gap,
};
use crate::bipartite::{partial_trace_b, spectra_equal, BipartitePureState};
use crate::bounds::{
    bound_table, certainty_criterion, check_bound_shape, pmax_runlength, tensor_power_spectrum,
};
use crate::error::Result;
use crate::executor::{execute_exact, random_local_measurement_check};
use crate::linalg::{self, identity, CMat};
use crate::random::{complex_normal, random_spectrum, random_state, random_unitary, rng_from_seed};
use crate::strategy::{compile, precursor_split};
use crate::symmetry::{communication_necessity_demo, transfer_bob_to_alice};
use crate::tol;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Number of random instances per check (scaled down for the heavier
    /// checks).
    pub corpus: usize,
    pub seed: u64,
    /// Largest local dimension used for random states and spectra.
    pub max_dim: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            corpus: 200,
            seed: 7,
            max_dim: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, mut body: impl FnMut() -> Result<(usize, usize)>) -> CheckResult {
    match body() {
        Ok((ok, total)) => CheckResult {
            name,
            passed: ok == total,
            detail: format!("{ok}/{total} instances"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Run every invariant check over a seeded random corpus.
pub fn run_invariant_suite(config: &VerifyConfig) -> Vec<CheckResult> {
    let mut results = Vec::new();
    let corpus = config.corpus.max(1);
    let max_dim = config.max_dim.clamp(2, 12);

    results.push(check("schmidt-decomposition", || {
        let mut rng = rng_from_seed(config.seed);
        let mut ok = 0;
        for _ in 0..corpus {
            let da = rng.random_range(1..=max_dim);
            let db = rng.random_range(1..=max_dim);
            let state = random_state(&mut rng, da, db);
            let sd = state.schmidt()?;
            let sorted = sd.lambdas.windows(2).all(|w| w[0] >= w[1]);
            let normalized = (sd.lambdas.iter().sum::<f64>() - 1.0).abs() < tol::NORM_TOL;
            let ortho_a =
                linalg::max_abs_entry(&(sd.basis_a.adjoint() * &sd.basis_a - identity(sd.rank())))
                    < tol::ORTHO_TOL;
            let ortho_b =
                linalg::max_abs_entry(&(sd.basis_b.adjoint() * &sd.basis_b - identity(sd.rank())))
                    < tol::ORTHO_TOL;
            let recon = linalg::max_abs_entry(&(sd.reconstruct() - state.amplitudes()))
                < tol::RECONSTRUCT_TOL;
            // Partial-trace eigenvalues reach the same spectrum through an
            // eigen-solve instead of the SVD.
            let eig = partial_trace_b(&state).eigenvalues();
            let eig_match = sd
                .lambdas
                .iter()
                .zip(eig.iter())
                .all(|(l, e)| (l - e).abs() < 1e-9);
            if sorted && normalized && ortho_a && ortho_b && recon && eig_match {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("swap-symmetry", || {
        let mut rng = rng_from_seed(config.seed ^ 0x51);
        let mut ok = 0;
        for _ in 0..corpus {
            let da = rng.random_range(1..=max_dim);
            let db = rng.random_range(1..=max_dim);
            let state = random_state(&mut rng, da, db);
            if spectra_equal(&state, &state.swap_parties(), 1e-9)? {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("bound-table-shape", || {
        let mut rng = rng_from_seed(config.seed ^ 0xB0);
        let mut ok = 0;
        let mut total = 0;
        for _ in 0..corpus {
            let n = rng.random_range(1..=max_dim);
            let lambdas = random_spectrum(&mut rng, n);
            for m in 1..=n {
                total += 1;
                let t = bound_table(&lambdas, m)?;
                let in_range = (0.0..=1.0).contains(&t.p_max);
                let shape = check_bound_shape(&t.b_values);
                let minimizer_shape = t.p_max >= 1.0 - 1e-9 || {
                    let head_ok = t.b_values[..t.r1].windows(2).all(|w| w[1] <= w[0] + 1e-12);
                    let tail_ok = t.b_values[t.r1 - 1..]
                        .windows(2)
                        .all(|w| w[1] > w[0] - 1e-12);
                    head_ok && tail_ok
                };
                let criterion = certainty_criterion(&lambdas, m) == (t.p_max >= 1.0 - 1e-9);
                if in_range && shape && minimizer_shape && criterion {
                    ok += 1;
                }
            }
        }
        Ok((ok, total))
    }));

    results.push(check("pmax-monotone-in-m", || {
        let mut rng = rng_from_seed(config.seed ^ 0xB1);
        let mut ok = 0;
        for _ in 0..corpus {
            let n = rng.random_range(2..=max_dim);
            let lambdas = random_spectrum(&mut rng, n);
            let mut prev = f64::INFINITY;
            let mut fine = true;
            for m in 1..=n {
                let p = bound_table(&lambdas, m)?.p_max;
                fine &= p <= prev + 1e-12;
                prev = p;
            }
            if fine {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("strategy-completeness-optimality", || {
        let mut rng = rng_from_seed(config.seed ^ 0x57);
        let mut ok = 0;
        let mut total = 0;
        for _ in 0..corpus.div_ceil(2) {
            let n = rng.random_range(1..=max_dim);
            let lambdas = random_spectrum(&mut rng, n);
            let state = BipartitePureState::from_schmidt(&lambdas)?;
            for m in 1..=n {
                total += 1;
                let strategy = compile(&lambdas, m, tol::DEGENERACY_TOL)?;
                let table = bound_table(&lambdas, m)?;
                let report = execute_exact(&strategy, &state)?;
                let complete = report.completeness_residual < tol::STRATEGY_COMPLETENESS_TOL;
                let optimal =
                    (strategy.success_probability - table.p_max).abs() < tol::OPTIMALITY_TOL;
                let executed = (report.total_success - table.p_max).abs() < tol::OPTIMALITY_TOL;
                let verdicts = report.branch_results.iter().all(|b| b.verdict_verified);
                let prob_sum: f64 = report.branch_results.iter().map(|b| b.probability).sum();
                if complete && optimal && executed && verdicts && (prob_sum - 1.0).abs() < 1e-8 {
                    ok += 1;
                }
            }
        }
        Ok((ok, total))
    }));

    results.push(check("certainty-iteration", || {
        let mut rng = rng_from_seed(config.seed ^ 0xCA);
        let mut ok = 0;
        let mut total = 0;
        'outer: for _ in 0..corpus {
            let n = rng.random_range(2..=max_dim);
            let m = rng.random_range(1..n.max(2)).max(1);
            let lambdas = random_spectrum(&mut rng, n);
            if !certainty_criterion(&lambdas, m) {
                continue;
            }
            total += 1;
            // Iterate the degeneracy-raising step; the residual must keep
            // λ'_1 ≤ 1/m and terminate within N steps.
            let mut current = lambdas;
            for _ in 0..=n {
                let rank = current.len();
                if current[0] - current[rank - 1] <= tol::DEGENERACY_TOL {
                    ok += 1;
                    continue 'outer;
                }
                let step = precursor_split(&current, m, tol::DEGENERACY_TOL)?;
                if step.residual.is_empty() {
                    ok += 1;
                    continue 'outer;
                }
                if step.residual[0] > 1.0 / m as f64 + 1e-10 {
                    continue 'outer; // invariant violated
                }
                current = step.residual;
            }
            // did not terminate within N iterations: count as failure
        }
        Ok((ok, total.max(1)))
    }));

    results.push(check("rank-monotone", || {
        let mut rng = rng_from_seed(config.seed ^ 0x11);
        let mut ok = 0;
        let trials = 5;
        let states = corpus.div_ceil(trials);
        for i in 0..states {
            let da = rng.random_range(1..=max_dim.min(6));
            let db = rng.random_range(1..=max_dim.min(6));
            let state = random_state(&mut rng, da, db);
            if random_local_measurement_check(&state, trials, config.seed ^ (i as u64) << 8)? {
                ok += 1;
            }
        }
        Ok((ok, states))
    }));

    results.push(check("measurement-transfer", || {
        let mut rng = rng_from_seed(config.seed ^ 0xA1);
        let mut ok = 0;
        for trial in 0..corpus {
            let da = rng.random_range(2..=max_dim.min(6));
            let db = rng.random_range(2..=max_dim.min(6));
            let state = random_state(&mut rng, da, db);
            let p_bob = if trial % 2 == 0 {
                // Rank-deficient projector from a Haar unitary.
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
            let residual_ok = out.residual_error < tol::TRANSFER_RESIDUAL_TOL;
            let unitary_ok =
                linalg::is_unitary(&out.u_a, 1e-10) && linalg::is_unitary(&out.u_b, 1e-10);
            let d = da.max(db);
            let emb = state.embed(d, d)?;
            let wa = linalg::schmidt_weights_unnormalized(&(&out.p_alice * emb.amplitudes()))?;
            let mut p_emb = CMat::zeros(d, d);
            for i in 0..db {
                for j in 0..db {
                    p_emb[(i, j)] = p_bob[(i, j)];
                }
            }
            let wb = linalg::schmidt_weights_unnormalized(&(emb.amplitudes() * p_emb.transpose()))?;
            let spectra_ok = wa.iter().zip(wb.iter()).all(|(a, b)| (a - b).abs() < 1e-9);
            if residual_ok && unitary_ok && spectra_ok {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("necessity-conservation", || {
        let mut ok = 0;
        let grid = [0.51, 0.6, 0.8, 0.95];
        for &a2 in &grid {
            let report = communication_necessity_demo(a2)?;
            if report.rho_sum_error < tol::CONSERVATION_TOL
                && report.support_overlap
                && (report.p_success - report.p_max).abs() < 1e-10
            {
                ok += 1;
            }
        }
        Ok((ok, grid.len()))
    }));

    results.push(check("equal-decrease", || {
        let mut rng = rng_from_seed(config.seed ^ 0x16);
        let mut ok = 0;
        for _ in 0..corpus {
            let lambdas = random_spectrum(&mut rng, 3);
            let extraction = compile(&lambdas, 3, tol::DEGENERACY_TOL)?;
            let out = extraction_residual(&lambdas, &extraction)?;
            if out.max_deviation < 1e-8 {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("cumulative-bound", || {
        let mut rng = rng_from_seed(config.seed ^ 0xC2);
        let mut ok = 0;
        for _ in 0..corpus {
            let n = rng.random_range(2..=max_dim.min(6));
            let lambdas = random_spectrum(&mut rng, n);
            let dist = all_me_distribution(&lambdas)?;
            let rows = cumulative_bound_check(&dist, &lambdas)?;
            let base_ok = rows.iter().all(|r| r.ok);
            // Downgrading ME mass to lower dimension must stay feasible.
            let top = *dist.probabilities().keys().max().unwrap();
            let downgraded_ok = if top >= 2 {
                let down = dist.downgrade(top, top - 1, 0.5)?;
                cumulative_bound_check(&down, &lambdas)?
                    .iter()
                    .all(|r| r.ok)
            } else {
                true
            };
            if base_ok && downgraded_ok {
                ok += 1;
            }
        }
        Ok((ok, corpus))
    }));

    results.push(check("runlength-oracle", || {
        let mut rng = rng_from_seed(config.seed ^ 0x8E);
        let mut ok = 0;
        let mut total = 0;
        for _ in 0..corpus.div_ceil(4) {
            let t = rng.random_range(2..=3usize);
            let base = random_spectrum(&mut rng, t);
            let n = rng.random_range(2..=6u32);
            let rls = tensor_power_spectrum(&base, n)?;
            let flat = rls.expand(1_000_000)?;
            for m_exp in [1u32, 2, n] {
                total += 1;
                let m = num_bigint::BigUint::from(2u32).pow(m_exp);
                let fast = pmax_runlength(&rls, &m);
                let slow = bound_table(&flat, 1 << m_exp)?.p_max;
                if (fast - slow).abs() < 1e-9 {
                    ok += 1;
                }
            }
        }
        Ok((ok, total))
    }));

    results.push(check("universality-gap", || {
        let mut rng = rng_from_seed(config.seed ^ 0x8A);
        let mut ok = 0;
        let mut total = 0;
        for _ in 0..corpus {
            let lambdas = random_spectrum(&mut rng, 3);
            if lambdas[1] + lambdas[2] < lambdas[0] || lambdas[0] <= lambdas[1] + 1e-9 {
                continue;
            }
            total += 1;
            let gap = universality_gap(&lambdas)?;
            if (gap.p2_initial - 1.0).abs() < 1e-9 && gap.p2_after_optimal_3 < 1.0 - 1e-9 {
                ok += 1;
            }
        }
        Ok((ok, total.max(1)))
    }));

    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_default_config() {
        let results = run_invariant_suite(&VerifyConfig {
            corpus: 40,
            seed: 7,
            max_dim: 6,
        });
        for r in &results {
            assert!(r.passed, "check {} failed: {}", r.name, r.detail);
        }
        assert!(results.len() >= 10);
    }
}
