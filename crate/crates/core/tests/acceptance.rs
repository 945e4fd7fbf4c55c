//! Acceptance suite: every exit criterion exercised at its stated
//! tolerance, one pass/fail line printed per criterion.
//!
//! Run with `cargo test -p schmidt-forge --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::Rng;
use schmidt_forge::analysis::{
    all_me_distribution, cumulative_bound_check, extraction_residual, many_pairs_sweep,
    target_dimension, universality_gap, MEDistribution,
};
use schmidt_forge::bipartite::BipartitePureState;
use schmidt_forge::bounds::{
    bound_table, certainty_criterion, pmax_runlength, tensor_power_spectrum,
};
use schmidt_forge::executor::{execute_exact, random_local_measurement_check};
use schmidt_forge::random::{random_spectrum, rng_from_seed};
use schmidt_forge::strategy::{compile, precursor_split, Verdict};
use schmidt_forge::symmetry::{communication_necessity_demo, transfer_random_corpus};
use schmidt_forge::tol;

fn report(number: usize, name: &str, failures: &[String]) {
    println!(
        "acceptance {number} ({name}): {}",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(
        failures.is_empty(),
        "criterion {number} ({name}) failed:\n{}",
        failures.join("\n")
    );
}

#[test]
fn criterion_01_optimal_probability_end_to_end() {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut failures = Vec::new();
    for i in 0..500 {
        let n = rng.random_range(1..=8);
        let lambdas = random_spectrum(&mut rng, n);
        let state = BipartitePureState::from_schmidt(&lambdas).unwrap();
        for m in 1..=n {
            let strategy = compile(&lambdas, m, tol::DEGENERACY_TOL).unwrap();
            let p_max = bound_table(&lambdas, m).unwrap().p_max;
            let report = execute_exact(&strategy, &state).unwrap();
            let gap = (report.total_success - p_max).abs();
            if gap >= 1e-8 {
                failures.push(format!(
                    "instance {i} m={m}: |executed − bound| = {gap:.3e} (λ = {lambdas:?})"
                ));
            }
            if (strategy.success_probability - p_max).abs() >= 1e-8 {
                failures.push(format!(
                    "instance {i} m={m}: |compiled − bound| = {:.3e}",
                    (strategy.success_probability - p_max).abs()
                ));
            }
            if report.completeness_residual >= 1e-8 {
                failures.push(format!(
                    "instance {i} m={m}: completeness residual {:.3e}",
                    report.completeness_residual
                ));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds the 60s target"));
    }
    println!("  500 spectra, all m ≤ N, in {elapsed:.1}s");
    report(1, "optimal probability end to end", &failures);
}

#[test]
fn criterion_02_certainty_regime() {
    let mut rng = rng_from_seed(202);
    let mut failures = Vec::new();
    let mut collected = 0;
    let mut attempts = 0;
    while collected < 100 && attempts < 100_000 {
        attempts += 1;
        let n = rng.random_range(2..=8);
        let lambdas = random_spectrum(&mut rng, n);
        let m = rng.random_range(2..=n.max(2));
        if !certainty_criterion(&lambdas, m) {
            continue;
        }
        collected += 1;
        let strategy = compile(&lambdas, m, tol::DEGENERACY_TOL).unwrap();
        if (strategy.success_probability - 1.0).abs() >= 1e-8 {
            failures.push(format!(
                "p_success = {} for λ = {lambdas:?}, m = {m}",
                strategy.success_probability
            ));
        }
        if let Some(bad) = strategy
            .branches
            .iter()
            .find(|b| b.verdict != Verdict::Success)
        {
            failures.push(format!(
                "non-success leaf {} for λ = {lambdas:?}, m = {m}",
                bad.label
            ));
        }
    }
    if collected < 100 {
        failures.push(format!("only {collected} certainty-regime instances found"));
    }
    report(2, "certainty regime", &failures);
}

#[test]
fn criterion_03_worked_trace() {
    fn close(failures: &mut Vec<String>, name: &str, got: f64, want: f64) {
        if (got - want).abs() >= 1e-9 {
            failures.push(format!("{name}: got {got}, want {want}"));
        }
    }
    let mut failures = Vec::new();

    let step1 = precursor_split(&[0.4, 0.35, 0.25], 2, tol::DEGENERACY_TOL).unwrap();
    close(&mut failures, "first a", step1.a, 0.2);
    if step1.precursor != (2, 1, 0) {
        failures.push(format!("first precursor params {:?}", step1.precursor));
    }
    close(&mut failures, "residual[0]", step1.residual[0], 0.375);
    close(&mut failures, "residual[1]", step1.residual[1], 0.3125);
    close(&mut failures, "residual[2]", step1.residual[2], 0.3125);

    let step2 = precursor_split(&step1.residual, 2, tol::DEGENERACY_TOL).unwrap();
    close(&mut failures, "second a", step2.a, 0.25);
    if step2.precursor != (2, 1, 1) {
        failures.push(format!("second precursor params {:?}", step2.precursor));
    }
    for (i, &l) in step2.residual.iter().enumerate() {
        close(&mut failures, &format!("Φ_3 residual[{i}]"), l, 1.0 / 3.0);
    }
    report(3, "worked two-iteration trace", &failures);
}

#[test]
fn criterion_04_rank_never_increases() {
    let mut rng = rng_from_seed(404);
    let mut failures = Vec::new();
    // 100 random states × 5 two-outcome measurements = 1000 outcomes.
    for i in 0..100 {
        let da = rng.random_range(1..=6);
        let db = rng.random_range(1..=6);
        let state = schmidt_forge::random::random_state(&mut rng, da, db);
        match random_local_measurement_check(&state, 5, 404 ^ (i as u64) << 16) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("rank increased for state {i} ({da}x{db})")),
            Err(e) => failures.push(format!("state {i}: {e}")),
        }
    }
    report(
        4,
        "rank never increases under local measurements",
        &failures,
    );
}

#[test]
fn criterion_05_measurement_transfer() {
    let mut failures = Vec::new();
    match transfer_random_corpus(300, 505, 6) {
        Ok(out) => {
            if out.failures > 0 {
                failures.push(format!(
                    "{} of {} trials broke tolerance",
                    out.failures, out.trials
                ));
            }
            if out.max_residual >= 1e-9 {
                failures.push(format!("max residual {:.3e} ≥ 1e-9", out.max_residual));
            }
            if out.max_spectrum_deviation >= 1e-9 {
                failures.push(format!(
                    "max spectrum deviation {:.3e} ≥ 1e-9",
                    out.max_spectrum_deviation
                ));
            }
        }
        Err(e) => failures.push(format!("corpus failed: {e}")),
    }
    report(5, "Bob-to-Alice measurement transfer", &failures);
}

#[test]
fn criterion_06_density_matrix_conservation() {
    let mut failures = Vec::new();
    for a2 in [0.51, 0.6, 0.8, 0.95] {
        match communication_necessity_demo(a2) {
            Ok(out) => {
                if out.rho_sum_error >= 1e-10 {
                    failures.push(format!(
                        "a²={a2}: conservation error {:.3e} ≥ 1e-10",
                        out.rho_sum_error
                    ));
                }
                if !out.support_overlap {
                    failures.push(format!("a²={a2}: supports do not overlap"));
                }
            }
            Err(e) => failures.push(format!("a²={a2}: {e}")),
        }
    }
    report(
        6,
        "Bob density matrix conserved, supports overlap",
        &failures,
    );
}

#[test]
fn criterion_07_equal_decrease_law() {
    let mut rng = rng_from_seed(707);
    let mut failures = Vec::new();
    for i in 0..200 {
        let lambdas = random_spectrum(&mut rng, 3);
        let extraction = compile(&lambdas, 3, tol::DEGENERACY_TOL).unwrap();
        let out = extraction_residual(&lambdas, &extraction).unwrap();
        if out.max_deviation >= 1e-8 {
            failures.push(format!(
                "instance {i}: deviation {:.3e} for λ = {lambdas:?}",
                out.max_deviation
            ));
        }
    }
    report(7, "equal decrease of residual eigenvalues", &failures);
}

#[test]
fn criterion_08_cumulative_probability_bound() {
    let mut rng = rng_from_seed(808);
    let mut failures = Vec::new();
    for i in 0..100 {
        let n = rng.random_range(2..=6);
        let lambdas = random_spectrum(&mut rng, n);
        let dist = all_me_distribution(&lambdas).unwrap();
        let rows = cumulative_bound_check(&dist, &lambdas).unwrap();
        if let Some(bad) = rows.iter().find(|r| !r.ok) {
            failures.push(format!(
                "instance {i}: p_{}^tot = {} > p_max = {}",
                bad.m, bad.p_tot, bad.p_max
            ));
        }
        // Downgrading preserves feasibility.
        let top = *dist.probabilities().keys().max().unwrap();
        if top >= 2 {
            let down = dist.downgrade(top, top - 1, 0.5).unwrap();
            if cumulative_bound_check(&down, &lambdas)
                .unwrap()
                .iter()
                .any(|r| !r.ok)
            {
                failures.push(format!("instance {i}: downgraded distribution infeasible"));
            }
        }
    }

    // The adversarial distribution must be flagged.
    let mut map = BTreeMap::new();
    map.insert(2u64, 1.0);
    let adversarial = MEDistribution::new(map).unwrap();
    let rows = cumulative_bound_check(&adversarial, &[0.8, 0.2]).unwrap();
    let flagged = rows.iter().any(|r| r.m == 2 && !r.ok);
    if !flagged {
        failures.push("adversarial {m=2: 1.0} on λ=(0.8,0.2) was not flagged".into());
    }
    report(8, "cumulative probability bound", &failures);
}

#[test]
fn criterion_09_many_pairs_sweep() {
    let start = Instant::now();
    let lambdas = [0.8, 0.2];
    let mut failures = Vec::new();

    // Monotone trends over the derived-example grid, ≤ one sub-1e-6
    // violation tolerated.
    let grid = [5u32, 10, 20, 30];
    let points = many_pairs_sweep(&lambdas, &grid, &[0.5, 0.95]).unwrap();
    let series = |k: f64| -> Vec<f64> {
        points
            .iter()
            .filter(|p| p.k == k)
            .map(|p| p.p_max)
            .collect()
    };
    let count_violations = |vals: &[f64], rising: bool| -> usize {
        vals.windows(2)
            .filter(|w| {
                if rising {
                    w[1] < w[0] - 1e-6
                } else {
                    w[1] > w[0] + 1e-6
                }
            })
            .count()
    };
    let low = series(0.5);
    let high = series(0.95);
    if count_violations(&low, true) > 1 {
        failures.push(format!("K=0.5 not monotone toward 1: {low:?}"));
    }
    if *low.last().unwrap() <= 0.9 {
        failures.push(format!("K=0.5 final value {} ≤ 0.9", low.last().unwrap()));
    }
    if count_violations(&high, false) > 1 {
        failures.push(format!("K=0.95 not monotone toward 0: {high:?}"));
    }
    if *high.last().unwrap() >= 0.1 {
        failures.push(format!("K=0.95 final value {} ≥ 0.1", high.last().unwrap()));
    }

    // Oracle equivalence against the expanded flat spectrum for n ≤ 12.
    let k_grid: Vec<f64> = (2..=20).map(|i| i as f64 * 0.05).collect();
    for n in 2..=12u32 {
        let rls = tensor_power_spectrum(&lambdas, n).unwrap();
        let flat = rls.expand(1 << 12).unwrap();
        for &k in &k_grid {
            let m = target_dimension(n, k);
            let fast = pmax_runlength(&rls, &m);
            let m_usize = m.to_usize().unwrap();
            let slow = if m_usize <= flat.len() {
                bound_table(&flat, m_usize).unwrap().p_max
            } else {
                0.0
            };
            if (fast - slow).abs() >= 1e-9 {
                failures.push(format!("n={n} K={k}: run-length {fast} vs expanded {slow}"));
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 120.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds the 120s target"));
    }
    println!("  sweep + oracle equivalence in {elapsed:.1}s");
    report(9, "many-pairs sweep and run-length oracle", &failures);
}

#[test]
fn criterion_10_non_universality_gap() {
    let mut failures = Vec::new();
    match universality_gap(&[0.5, 0.3, 0.2]) {
        Ok(out) => {
            if (out.p2_initial - 1.0).abs() >= 1e-9 {
                failures.push(format!("p2_initial = {}", out.p2_initial));
            }
            if (out.p2_after_optimal_3 - 0.5).abs() >= 1e-9 {
                failures.push(format!("p2 after optimal Φ_3 = {}", out.p2_after_optimal_3));
            }
        }
        Err(e) => failures.push(format!("{e}")),
    }
    report(10, "no universal strategy", &failures);
}
