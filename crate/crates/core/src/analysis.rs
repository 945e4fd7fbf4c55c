//! Desk-scale analyses on top of the bounds and the compiler: tensor-power
//! sweeps of the optimal probability, cumulative-probability bounds for
//! strategies whose every outcome is maximally entangled, the equal-decrease
//! law for three-term extractions, and the non-universality gap.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::bipartite::{entropy_of_spectrum, BipartitePureState};
use crate::bounds::{bound_table, pmax_runlength, tensor_power_spectrum};
use crate::error::{Error, Result};
use crate::executor::execute_exact;
use crate::linalg::{cr, CMat};
use crate::strategy::{compile, CompiledStrategy, Verdict};
use crate::tol;

/// One grid point of the many-pairs sweep: n identical pairs, target rate
/// K bits per pair, i.e. m = ⌈2^{nK}⌉.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub n: u32,
    pub k: f64,
    pub m: BigUint,
    pub p_max: f64,
    pub entropy: f64,
}

/// Smallest ME-state dimension carrying at least nK singlets' worth of
/// entanglement: ⌈2^{nK}⌉, with a relative guard so integer exponents are
/// not pushed up by fp noise.
pub fn target_dimension(n: u32, k: f64) -> BigUint {
    let exponent = n as f64 * k;
    if exponent < 53.0 {
        let x = 2f64.powf(exponent) * (1.0 - 1e-12);
        BigUint::from(x.ceil().max(1.0) as u64)
    } else {
        // Beyond 2^53 the unit gap is invisible in f64; fall back to the
        // power of two with the rounded-up exponent.
        BigUint::from(1u32) << (exponent - 1e-9).ceil() as u64
    }
}

/// Evaluate p^MAX_m on Ψ^⊗n with m = ⌈2^{nK}⌉ over an (n, K) grid. Points
/// are computed in parallel per n and reported in (n, K) grid order.
pub fn many_pairs_sweep(
    lambdas: &[f64],
    n_values: &[u32],
    k_values: &[f64],
) -> Result<Vec<SweepPoint>> {
    let entropy = entropy_of_spectrum(lambdas);
    let per_n: Vec<Result<Vec<SweepPoint>>> = n_values
        .par_iter()
        .map(|&n| {
            let rls = tensor_power_spectrum(lambdas, n)?;
            Ok(k_values
                .iter()
                .map(|&k| {
                    let m = target_dimension(n, k);
                    let p_max = pmax_runlength(&rls, &m);
                    SweepPoint {
                        n,
                        k,
                        m,
                        p_max,
                        entropy,
                    }
                })
                .collect())
        })
        .collect();
    let mut points = Vec::with_capacity(n_values.len() * k_values.len());
    for block in per_n {
        points.extend(block?);
    }
    Ok(points)
}

/// Outcome distribution of a strategy whose every outcome is some Φ_m;
/// product states count as dimension 0.
#[derive(Debug, Clone)]
pub struct MEDistribution {
    probabilities: BTreeMap<u64, f64>,
}

impl MEDistribution {
    pub fn new(probabilities: BTreeMap<u64, f64>) -> Result<Self> {
        if probabilities.values().any(|&p| p < -1e-12) {
            return Err(Error::Parameter("negative probability".into()));
        }
        let total: f64 = probabilities.values().sum();
        if (total - 1.0).abs() > tol::RUN_MASS_TOL {
            return Err(Error::Normalization { norm: total });
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &BTreeMap<u64, f64> {
        &self.probabilities
    }

    /// Cumulative probabilities p_m^tot = Σ_{k≥m} p_k, keyed by every
    /// dimension present (plus 0, which is always 1).
    pub fn cumulative(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        let mut acc = 0.0;
        for (&m, &p) in self.probabilities.iter().rev() {
            acc += p;
            out.insert(m, acc);
        }
        out.insert(0, acc);
        out
    }

    /// Convert a fraction of the Φ_from mass into Φ_to mass (to < from):
    /// the always-available downgrade of an ME state to lower dimension.
    pub fn downgrade(&self, from: u64, to: u64, fraction: f64) -> Result<Self> {
        if to >= from || !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Parameter(format!(
                "downgrade needs to < from and fraction in [0,1], got {to} < {from}, {fraction}"
            )));
        }
        let available = self.probabilities.get(&from).copied().unwrap_or(0.0);
        let moved = available * fraction;
        let mut map = self.probabilities.clone();
        *map.entry(from).or_insert(0.0) -= moved;
        *map.entry(to).or_insert(0.0) += moved;
        Self::new(map)
    }
}

/// One row of the cumulative-bound report.
#[derive(Debug, Clone)]
pub struct CumulativeCheck {
    pub m: u64,
    pub p_tot: f64,
    pub p_max: f64,
    pub ok: bool,
}

/// Check p_m^tot ≤ p_m^MAX + 1e-9 for every dimension m ≥ 1 carrying
/// cumulative mass, against the spectrum the strategy started from.
pub fn cumulative_bound_check(
    dist: &MEDistribution,
    lambdas: &[f64],
) -> Result<Vec<CumulativeCheck>> {
    let mut rows = Vec::new();
    for (&m, &p_tot) in dist.cumulative().iter() {
        if m == 0 {
            continue;
        }
        let p_max = bound_table(lambdas, m as usize)?.p_max;
        rows.push(CumulativeCheck {
            m,
            p_tot,
            p_max,
            ok: p_tot <= p_max + 1e-9,
        });
    }
    Ok(rows)
}

/// Run the repeated-extraction strategy: compile the optimal strategy for
/// m = rank, execute it, recurse on the failure residual. Every outcome is
/// an ME state; rank-1 leftovers count as Φ_0.
pub fn all_me_distribution(lambdas: &[f64]) -> Result<MEDistribution> {
    let mut buckets: BTreeMap<u64, f64> = BTreeMap::new();
    let mut spectrum: Vec<f64> = lambdas.to_vec();
    let mut mass = 1.0f64;
    while mass > 1e-14 {
        let rank = spectrum.len();
        if rank == 1 {
            *buckets.entry(0).or_insert(0.0) += mass;
            break;
        }
        let strategy = compile(&spectrum, rank, tol::DEGENERACY_TOL)?;
        let state = BipartitePureState::from_schmidt(&spectrum)?;
        let report = execute_exact(&strategy, &state)?;
        *buckets.entry(rank as u64).or_insert(0.0) += mass * report.total_success;

        let failure: Vec<_> = report
            .branch_results
            .iter()
            .filter(|b| b.verdict == Verdict::Failure && b.probability > 1e-14)
            .collect();
        match failure.as_slice() {
            [] => break,
            [residual] => {
                mass *= residual.probability;
                spectrum = residual.output_spectrum.clone();
            }
            _ => {
                return Err(Error::Precondition(
                    "optimal strategies have at most one failure branch".into(),
                ))
            }
        }
    }
    MEDistribution::new(buckets)
}

/// Equal-decrease law for three-term spectra.
#[derive(Debug, Clone)]
pub struct ExtractionResidual {
    /// Success probability of the extraction.
    pub p: f64,
    /// Eigenvalues of the summed unnormalized failure reduced states.
    pub residual_spectrum: [f64; 3],
    /// max_i |λ'_i − (λ_i − p/3)|.
    pub max_deviation: f64,
}

/// Sum the unnormalized reduced density matrices of the failure branches
/// of a Φ_3 extraction and compare against λ_i − p/3.
pub fn extraction_residual(
    lambdas: &[f64],
    extraction: &CompiledStrategy,
) -> Result<ExtractionResidual> {
    if lambdas.len() != 3 {
        return Err(Error::Precondition(format!(
            "the equal-decrease law is stated for N = 3, got N = {}",
            lambdas.len()
        )));
    }
    if extraction.m != 3 {
        return Err(Error::Precondition(format!(
            "extraction must target Φ_3, got m = {}",
            extraction.m
        )));
    }
    let mut l_sqrt = CMat::zeros(3, 3);
    for i in 0..3 {
        l_sqrt[(i, i)] = cr(lambdas[i].sqrt());
    }
    let mut rho = CMat::zeros(3, 3);
    for branch in extraction
        .branches
        .iter()
        .filter(|b| b.verdict == Verdict::Failure)
    {
        let amp = branch.kraus_matrix() * &l_sqrt;
        rho += &amp * amp.adjoint();
    }
    let eig = crate::linalg::hermitian_eigen_desc(&rho).0;
    let residual_spectrum = [eig[0], eig[1], eig[2]];

    let p = extraction.success_probability;
    let max_deviation = (0..3)
        .map(|i| (residual_spectrum[i] - (lambdas[i] - p / 3.0)).abs())
        .fold(0.0, f64::max);
    Ok(ExtractionResidual {
        p,
        residual_spectrum,
        max_deviation,
    })
}

/// The non-universality witness on a three-term spectrum.
#[derive(Debug, Clone)]
pub struct UniversalityGap {
    /// p₂^MAX of the initial state (1 by precondition).
    pub p2_initial: f64,
    /// p₂^MAX of the residual left by the optimal Φ_3 extraction; < 1,
    /// so no single strategy saturates both bounds.
    pub p2_after_optimal_3: f64,
    /// Normalized residual spectrum after the Φ_3 extraction.
    pub residual_normalized: Vec<f64>,
}

/// Extract Φ_3 optimally and show the residual can no longer reach Φ_2
/// with certainty.
pub fn universality_gap(lambdas: &[f64]) -> Result<UniversalityGap> {
    if lambdas.len() != 3 {
        return Err(Error::Precondition(format!(
            "need a three-term spectrum, got {} terms",
            lambdas.len()
        )));
    }
    if lambdas[1] + lambdas[2] < lambdas[0] - 1e-12 {
        return Err(Error::Precondition(
            "need λ₂ + λ₃ ≥ λ₁ so that p₂^MAX = 1".into(),
        ));
    }
    if lambdas[0] <= lambdas[1] + 1e-12 {
        return Err(Error::Precondition(
            "need λ₁ > λ₂ strictly; the gap closes when λ₁ = λ₂".into(),
        ));
    }
    let p2_initial = bound_table(lambdas, 2)?.p_max;

    let extraction = compile(lambdas, 3, tol::DEGENERACY_TOL)?;
    let residual = extraction_residual(lambdas, &extraction)?;
    let mass: f64 = residual.residual_spectrum.iter().sum();
    let residual_normalized: Vec<f64> = residual
        .residual_spectrum
        .iter()
        .filter(|&&l| l > 1e-13)
        .map(|&l| l / mass)
        .collect();
    let p2_after_optimal_3 = bound_table(&residual_normalized, 2)?.p_max;

    Ok(UniversalityGap {
        p2_initial,
        p2_after_optimal_3,
        residual_normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::scaled_extraction;
    use num_traits::ToPrimitive;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn sweep_below_entropy_rises_above_entropy_falls() {
        let n_values = [5, 10, 20, 30];
        let points = many_pairs_sweep(&[0.8, 0.2], &n_values, &[0.5, 0.95]).unwrap();
        let low: Vec<f64> = points
            .iter()
            .filter(|p| p.k == 0.5)
            .map(|p| p.p_max)
            .collect();
        let high: Vec<f64> = points
            .iter()
            .filter(|p| p.k == 0.95)
            .map(|p| p.p_max)
            .collect();
        assert!(
            low.windows(2).all(|w| w[1] >= w[0] - 1e-9),
            "low-rate not rising: {low:?}"
        );
        assert!(low.last().unwrap() > &0.9);
        assert!(
            high.windows(2).all(|w| w[1] <= w[0] + 1e-9),
            "high-rate not falling: {high:?}"
        );
        assert!(high.last().unwrap() < &0.1);
    }

    #[test]
    fn target_dimension_hits_exact_powers() {
        assert_eq!(target_dimension(10, 0.5).to_u64().unwrap(), 32);
        assert_eq!(target_dimension(20, 0.95).to_u64().unwrap(), 1 << 19);
        assert_eq!(target_dimension(5, 0.5).to_u64().unwrap(), 6); // ⌈2^2.5⌉
        assert_eq!(target_dimension(30, 0.5).to_u64().unwrap(), 1 << 15);
    }

    #[test]
    fn sweep_rate_above_one_bit_is_impossible() {
        // 2^⌈1.1·n⌉ > 2^n = N, so the bound is exactly zero.
        let points = many_pairs_sweep(&[0.8, 0.2], &[4, 8], &[1.1]).unwrap();
        for p in points {
            assert_close(p.p_max, 0.0, 1e-15);
        }
    }

    #[test]
    fn sweep_reports_entropy_and_m() {
        let points = many_pairs_sweep(&[0.8, 0.2], &[10], &[0.5]).unwrap();
        assert_eq!(points.len(), 1);
        assert_close(points[0].entropy, 0.7219280948873623, 1e-12);
        assert_eq!(points[0].m.to_u64().unwrap(), 32);
    }

    #[test]
    fn cumulative_of_optimal_two_term_strategy() {
        let lambdas = [0.8, 0.2];
        let dist = all_me_distribution(&lambdas).unwrap();
        assert_close(dist.probabilities()[&2], 0.4, 1e-12);
        assert_close(dist.probabilities()[&0], 0.6, 1e-12);
        let rows = cumulative_bound_check(&dist, &lambdas).unwrap();
        assert!(rows.iter().all(|r| r.ok));
        let row2 = rows.iter().find(|r| r.m == 2).unwrap();
        assert_close(row2.p_tot, 0.4, 1e-12);
        assert_close(row2.p_max, 0.4, 1e-12);
    }

    #[test]
    fn cumulative_explicit_distribution_three_term() {
        let lambdas = [0.5, 0.3, 0.2];
        let mut map = BTreeMap::new();
        map.insert(3u64, 0.6);
        map.insert(0u64, 0.4);
        let dist = MEDistribution::new(map).unwrap();
        let rows = cumulative_bound_check(&dist, &lambdas).unwrap();
        let row3 = rows.iter().find(|r| r.m == 3).unwrap();
        assert!(row3.ok);
        assert_close(row3.p_tot, 0.6, 1e-12);
        assert_close(row3.p_max, 0.6, 1e-12);
    }

    #[test]
    fn cumulative_flags_adversarial_distribution() {
        let mut map = BTreeMap::new();
        map.insert(2u64, 1.0);
        let dist = MEDistribution::new(map).unwrap();
        let rows = cumulative_bound_check(&dist, &[0.8, 0.2]).unwrap();
        let row2 = rows.iter().find(|r| r.m == 2).unwrap();
        assert!(!row2.ok, "1.0 > p₂^MAX = 0.4 must be flagged");
    }

    #[test]
    fn downgrades_keep_the_bound_satisfied() {
        let lambdas = [0.5, 0.3, 0.2];
        let dist = all_me_distribution(&lambdas).unwrap();
        let downgraded = dist.downgrade(3, 2, 0.5).unwrap();
        let rows = cumulative_bound_check(&downgraded, &lambdas).unwrap();
        assert!(rows.iter().all(|r| r.ok));
    }

    #[test]
    fn residual_of_the_optimal_extraction() {
        let lambdas = [0.5, 0.3, 0.2];
        let extraction = compile(&lambdas, 3, tol::DEGENERACY_TOL).unwrap();
        let out = extraction_residual(&lambdas, &extraction).unwrap();
        assert_close(out.p, 0.6, 1e-12);
        assert!(out.max_deviation < 1e-8, "deviation {}", out.max_deviation);
        assert_close(out.residual_spectrum[0], 0.3, 1e-10);
        assert_close(out.residual_spectrum[1], 0.1, 1e-10);
        assert_close(out.residual_spectrum[2], 0.0, 1e-10);
    }

    #[test]
    fn complete_extraction_leaves_nothing() {
        let third = 1.0 / 3.0;
        let lambdas = [third, third, third];
        let extraction = compile(&lambdas, 3, tol::DEGENERACY_TOL).unwrap();
        let out = extraction_residual(&lambdas, &extraction).unwrap();
        assert_close(out.p, 1.0, 1e-12);
        for v in out.residual_spectrum {
            assert_close(v, 0.0, 1e-10);
        }
    }

    #[test]
    fn partial_extraction_is_linear_in_p() {
        let lambdas = [0.5, 0.3, 0.2];
        let extraction = scaled_extraction(&lambdas, 3, 0.3).unwrap();
        let out = extraction_residual(&lambdas, &extraction).unwrap();
        assert_close(out.p, 0.3, 1e-12);
        assert!(out.max_deviation < 1e-10);
        assert_close(out.residual_spectrum[0], 0.4, 1e-10);
        assert_close(out.residual_spectrum[1], 0.2, 1e-10);
        assert_close(out.residual_spectrum[2], 0.1, 1e-10);
    }

    #[test]
    fn extraction_residual_rejects_wrong_rank() {
        let extraction = compile(&[0.5, 0.5], 2, tol::DEGENERACY_TOL).unwrap();
        assert!(matches!(
            extraction_residual(&[0.5, 0.5], &extraction),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn universality_gap_worked_example() {
        let out = universality_gap(&[0.5, 0.3, 0.2]).unwrap();
        assert_close(out.p2_initial, 1.0, 1e-12);
        assert_close(out.p2_after_optimal_3, 0.5, 1e-10);
        assert_close(out.residual_normalized[0], 0.75, 1e-10);
        assert_close(out.residual_normalized[1], 0.25, 1e-10);
    }

    #[test]
    fn universality_gap_second_example() {
        let out = universality_gap(&[0.45, 0.35, 0.2]).unwrap();
        assert_close(out.p2_after_optimal_3, 0.75, 1e-10);
        assert_close(out.residual_normalized[0], 0.625, 1e-10);
        assert_close(out.residual_normalized[1], 0.375, 1e-10);
    }

    #[test]
    fn universality_gap_needs_strict_top_gap() {
        assert!(matches!(
            universality_gap(&[0.4, 0.4, 0.2]),
            Err(Error::Precondition(_))
        ));
    }
}
