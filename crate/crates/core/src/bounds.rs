//! The bound family B^m_r = (m/r)·(λ_{m−r+1} + … + λ_N), its minimizer
//! structure, and run-length-encoded spectra for tensor powers of many
//! identical pairs.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::tol;

/// The bounds B^m_r for r = 1..m together with the last minimizer r₁,
/// the trimmed coefficient λ^max and the optimal probability p_max.
#[derive(Debug, Clone)]
pub struct BoundTable {
    pub m: usize,
    /// B^m_r for r = 1..m; index r−1.
    pub b_values: Vec<f64>,
    /// Largest r attaining min_r B^m_r (1-based).
    pub r1: usize,
    /// λ^max_{m−r₁} = B^m_{r₁} / m.
    pub lambda_max: f64,
    /// min_r B^m_r clamped to [0, 1].
    pub p_max: f64,
}

pub(crate) fn validate_spectrum(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Parameter("empty spectrum".into()));
    }
    if lambdas.windows(2).any(|w| w[1] > w[0] + 1e-9) {
        return Err(Error::Parameter(
            "spectrum is not sorted non-increasing".into(),
        ));
    }
    if lambdas.iter().any(|&l| l < -1e-12) {
        return Err(Error::Parameter("negative spectrum entry".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization { norm: sum });
    }
    Ok(())
}

/// Evaluate the bound table for a sorted, normalized spectrum.
///
/// Coefficients beyond the list are treated as zero, so m > N yields
/// B^m_1 = 0 and hence p_max = 0.
pub fn bound_table(lambdas: &[f64], m: usize) -> Result<BoundTable> {
    if m == 0 {
        return Err(Error::Parameter("m must be ≥ 1".into()));
    }
    validate_spectrum(lambdas)?;
    let n = lambdas.len();

    // suffix[i] = λ_{i+1} + … + λ_N (0-based i), accumulated right to left.
    let mut suffix = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + lambdas[i];
    }
    let tail = |first_index_1b: usize| -> f64 {
        if first_index_1b > n {
            0.0
        } else {
            suffix[first_index_1b - 1]
        }
    };

    let b_values: Vec<f64> = (1..=m)
        .map(|r| (m as f64 / r as f64) * tail(m - r + 1))
        .collect();

    let min = b_values.iter().copied().fold(f64::INFINITY, f64::min);
    let r1 = (1..=m)
        .rev()
        .find(|&r| b_values[r - 1] <= min + tol::BOUND_TIE_TOL)
        .expect("at least one minimizer");
    let p_max = b_values[r1 - 1].clamp(0.0, 1.0);

    Ok(BoundTable {
        m,
        b_values,
        r1,
        lambda_max: p_max / m as f64,
        p_max,
    })
}

/// Once B^m_r starts to increase in r it must keep increasing: check that
/// every strict increase is followed only by strict increases.
pub fn check_bound_shape(b_values: &[f64]) -> bool {
    let eps = 1e-12;
    let mut increasing = false;
    for w in b_values.windows(2) {
        if increasing {
            if w[1] <= w[0] - eps {
                return false;
            }
        } else if w[1] > w[0] + eps {
            increasing = true;
        }
    }
    true
}

/// The certainty criterion: min_r B^m_r = 1 ⇔ λ_1 ≤ 1/m.
pub fn certainty_criterion(lambdas: &[f64], m: usize) -> bool {
    lambdas
        .first()
        .is_some_and(|&l1| l1 <= 1.0 / m as f64 + 1e-12)
}

/// A Schmidt spectrum stored as (value, multiplicity) runs with strictly
/// decreasing positive values. Multiplicities are big integers so tensor
/// powers of many pairs stay exact.
#[derive(Debug, Clone)]
pub struct RunLengthSpectrum {
    /// (value, multiplicity), values strictly decreasing and positive.
    pub runs: Vec<(f64, BigUint)>,
    /// Σ value · multiplicity.
    pub total_mass: f64,
}

impl RunLengthSpectrum {
    /// Group a sorted flat spectrum into runs (values equal within a
    /// relative 1e-12 are merged).
    pub fn from_flat(lambdas: &[f64]) -> Result<Self> {
        validate_spectrum(lambdas)?;
        let mut runs: Vec<(f64, BigUint)> = Vec::new();
        for &l in lambdas {
            if l <= 0.0 {
                continue;
            }
            match runs.last_mut() {
                Some((v, mult)) if (*v - l).abs() <= 1e-12 * v.max(l) => {
                    *mult += BigUint::one();
                }
                _ => runs.push((l, BigUint::one())),
            }
        }
        Ok(Self::from_runs(runs))
    }

    fn from_runs(runs: Vec<(f64, BigUint)>) -> Self {
        let total_mass = runs
            .iter()
            .map(|(v, m)| v * m.to_f64().unwrap_or(f64::INFINITY))
            .sum();
        Self { runs, total_mass }
    }

    /// Total number of Schmidt terms.
    pub fn total_terms(&self) -> BigUint {
        self.runs.iter().map(|(_, m)| m).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.runs.windows(2) {
            if w[1].0 >= w[0].0 {
                return Err(Error::Parameter("run values must strictly decrease".into()));
            }
        }
        if self.runs.iter().any(|(v, _)| *v <= 0.0) {
            return Err(Error::Parameter("run values must be positive".into()));
        }
        let mass: f64 = self
            .runs
            .iter()
            .map(|(v, m)| v * m.to_f64().unwrap_or(f64::INFINITY))
            .sum();
        if (mass - self.total_mass).abs() > tol::RUN_MASS_TOL {
            return Err(Error::Normalization { norm: mass });
        }
        Ok(())
    }

    /// Expand into a flat sorted spectrum; fails above `cap` terms.
    pub fn expand(&self, cap: usize) -> Result<Vec<f64>> {
        let total = self.total_terms();
        if total > BigUint::from(cap) {
            return Err(Error::Capacity(format!(
                "expansion of {total} terms exceeds cap {cap}"
            )));
        }
        let mut out = Vec::new();
        for (v, mult) in &self.runs {
            let count = mult.to_usize().expect("bounded by cap");
            out.extend(std::iter::repeat_n(*v, count));
        }
        Ok(out)
    }
}

/// Enumeration limit for distinct n-fold products.
const TENSOR_POWER_CAP: usize = 2_000_000;

/// Run-length spectrum of Ψ^⊗n: all distinct products Π λ_{i_k} with exact
/// multinomial multiplicities.
pub fn tensor_power_spectrum(lambdas: &[f64], n: u32) -> Result<RunLengthSpectrum> {
    if n == 0 {
        return Err(Error::Parameter("n must be ≥ 1".into()));
    }
    let base = RunLengthSpectrum::from_flat(lambdas)?;
    let t = base.runs.len();

    // Number of weak compositions of n into t parts: C(n+t−1, t−1).
    let combos = binomial(n as u64 + t as u64 - 1, t as u64 - 1);
    if combos > BigUint::from(TENSOR_POWER_CAP) {
        return Err(Error::Capacity(format!(
            "{combos} compositions exceed the enumeration cap {TENSOR_POWER_CAP}"
        )));
    }

    let factorials = factorial_table(n as usize);
    let mut products: Vec<(f64, BigUint)> = Vec::new();
    let mut ks = vec![0u32; t];
    enumerate_compositions(n, 0, &mut ks, &mut |ks| {
        let mut value = 1.0f64;
        let mut mult = factorials[n as usize].clone();
        for (i, &k) in ks.iter().enumerate() {
            let (v, c) = &base.runs[i];
            value *= v.powi(k as i32);
            mult /= &factorials[k as usize];
            mult *= c.pow(k);
        }
        products.push((value, mult));
    });

    products.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite products"));
    let mut runs: Vec<(f64, BigUint)> = Vec::new();
    for (v, mult) in products {
        match runs.last_mut() {
            Some((rv, rm)) if (*rv - v).abs() <= 1e-12 * rv.max(v) => {
                *rm += mult;
            }
            _ => runs.push((v, mult)),
        }
    }
    Ok(RunLengthSpectrum::from_runs(runs))
}

fn enumerate_compositions(
    remaining: u32,
    idx: usize,
    ks: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    if idx == ks.len() - 1 {
        ks[idx] = remaining;
        f(ks);
        return;
    }
    for k in 0..=remaining {
        ks[idx] = k;
        enumerate_compositions(remaining - k, idx + 1, ks, f);
    }
}

fn factorial_table(n: usize) -> Vec<BigUint> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(BigUint::one());
    for i in 1..=n {
        let prev = t[i - 1].clone();
        t.push(prev * BigUint::from(i));
    }
    t
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 0..k {
        result *= BigUint::from(n - i);
        result /= BigUint::from(i + 1);
    }
    result
}

/// p_m^MAX evaluated on a run-length spectrum without expanding it.
///
/// B^m_r is monotone in r while m−r+1 stays inside one run, so the global
/// minimum is attained where m−r+1 crosses a run boundary (or at r = 1, m);
/// only those candidates are scanned.
pub fn pmax_runlength(rls: &RunLengthSpectrum, m: &BigUint) -> f64 {
    if m.is_zero() {
        return 1.0; // Φ_0 is a product state, always reachable
    }
    let total = rls.total_terms();
    if *m > total {
        return 0.0;
    }

    let k = rls.runs.len();
    // 1-based start index and suffix mass of each run.
    let mut starts: Vec<BigUint> = Vec::with_capacity(k);
    let mut acc = BigUint::one();
    for (_, mult) in &rls.runs {
        starts.push(acc.clone());
        acc += mult;
    }
    let mut suffix_mass = vec![0.0f64; k + 1];
    for j in (0..k).rev() {
        let (v, mult) = &rls.runs[j];
        suffix_mass[j] = suffix_mass[j + 1] + v * mult.to_f64().unwrap_or(f64::INFINITY);
    }

    // Tail sum λ_i + λ_{i+1} + … for a 1-based index i ≤ total.
    let tail = |i: &BigUint| -> f64 {
        let mut j = k - 1;
        for (jj, (start, (_, mult))) in starts.iter().zip(&rls.runs).enumerate() {
            if *i < start + mult {
                j = jj;
                break;
            }
        }
        let end_j = &starts[j] + &rls.runs[j].1; // one past the run end
        let count_in_run = (&end_j - i).to_f64().unwrap_or(f64::INFINITY);
        suffix_mass[j + 1] + count_in_run * rls.runs[j].0
    };

    let m_f = m.to_f64().unwrap_or(f64::INFINITY);
    let one = BigUint::one();
    let mut candidates: Vec<BigUint> = vec![one.clone(), m.clone()];
    for (s_j, (_, mult)) in starts.iter().zip(&rls.runs) {
        let e_j = s_j + mult - &one;
        for i in [s_j.clone(), e_j] {
            if i <= *m {
                // r = m − i + 1
                candidates.push(m - &i + &one);
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut best = f64::INFINITY;
    for r in &candidates {
        if r.is_zero() || r > m {
            continue;
        }
        let i = m - r + &one;
        let b = (m_f / r.to_f64().unwrap_or(f64::INFINITY)) * tail(&i);
        best = best.min(b);
    }
    best.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn bound_table_product_state_m2() {
        let t = bound_table(&[1.0], 2).unwrap();
        assert_close(t.p_max, 0.0, 1e-15);
        assert_close(t.b_values[0], 0.0, 1e-15);
        assert_close(t.b_values[1], 1.0, 1e-15);
    }

    #[test]
    fn bound_table_two_term() {
        let t = bound_table(&[0.8, 0.2], 2).unwrap();
        assert_close(t.b_values[0], 0.4, 1e-15);
        assert_close(t.b_values[1], 1.0, 1e-15);
        assert_eq!(t.r1, 1);
        assert_close(t.p_max, 0.4, 1e-15);
        assert_close(t.lambda_max, 0.2, 1e-15);
    }

    #[test]
    fn bound_table_three_term() {
        let t = bound_table(&[0.5, 0.3, 0.2], 3).unwrap();
        assert_close(t.b_values[0], 0.6, 1e-15);
        assert_close(t.b_values[1], 0.75, 1e-15);
        assert_close(t.b_values[2], 1.0, 1e-15);
        assert_eq!(t.r1, 1);
        assert_close(t.p_max, 0.6, 1e-15);
        assert_close(t.lambda_max, 0.2, 1e-15);
    }

    #[test]
    fn bound_table_already_me_state() {
        let m = 4;
        let lambdas = vec![0.25; 4];
        let t = bound_table(&lambdas, m).unwrap();
        assert_close(t.p_max, 1.0, 1e-12);
        assert_eq!(t.r1, m); // largest-r rule on ties
    }

    #[test]
    fn bound_table_rejects_bad_input() {
        assert!(matches!(
            bound_table(&[0.5, 0.5], 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            bound_table(&[0.2, 0.8], 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            bound_table(&[0.5, 0.4], 2),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn bound_shape_examples() {
        assert!(check_bound_shape(&[0.6, 0.75, 1.0]));
        assert!(check_bound_shape(&[1.0, 1.0]));
        assert!(check_bound_shape(&[0.9, 0.5, 0.7, 1.0]));
        assert!(!check_bound_shape(&[0.5, 0.7, 0.6]));
    }

    #[test]
    fn certainty_criterion_examples() {
        assert!(certainty_criterion(&[0.4, 0.35, 0.25], 2));
        assert!(!certainty_criterion(&[0.8, 0.2], 2));
        let third = 1.0 / 3.0;
        assert!(certainty_criterion(&[third, third, third], 3));
    }

    #[test]
    fn certainty_criterion_matches_bound_table() {
        let spectra: [&[f64]; 4] = [
            &[0.4, 0.35, 0.25],
            &[0.8, 0.2],
            &[0.5, 0.3, 0.2],
            &[0.25, 0.25, 0.25, 0.25],
        ];
        for lambdas in spectra {
            for m in 1..=lambdas.len() {
                let t = bound_table(lambdas, m).unwrap();
                assert_eq!(
                    certainty_criterion(lambdas, m),
                    t.p_max >= 1.0 - 1e-9,
                    "mismatch for {lambdas:?}, m={m}"
                );
            }
        }
    }

    #[test]
    fn tensor_power_binomial_case() {
        let rls = tensor_power_spectrum(&[0.8, 0.2], 2).unwrap();
        assert_eq!(rls.runs.len(), 3);
        assert_close(rls.runs[0].0, 0.64, 1e-15);
        assert_eq!(rls.runs[0].1, BigUint::from(1u32));
        assert_close(rls.runs[1].0, 0.16, 1e-15);
        assert_eq!(rls.runs[1].1, BigUint::from(2u32));
        assert_close(rls.runs[2].0, 0.04, 1e-15);
        assert_eq!(rls.runs[2].1, BigUint::from(1u32));
        assert_close(rls.total_mass, 1.0, 1e-12);
    }

    #[test]
    fn tensor_power_identity() {
        let rls = tensor_power_spectrum(&[0.5, 0.3, 0.2], 1).unwrap();
        let flat = rls.expand(16).unwrap();
        assert_eq!(flat.len(), 3);
        assert_close(flat[0], 0.5, 1e-15);
        assert_close(flat[1], 0.3, 1e-15);
        assert_close(flat[2], 0.2, 1e-15);
    }

    #[test]
    fn tensor_power_uniform_collapses_to_one_run() {
        let rls = tensor_power_spectrum(&[0.5, 0.5], 10).unwrap();
        assert_eq!(rls.runs.len(), 1);
        assert_close(rls.runs[0].0, 2f64.powi(-10), 1e-18);
        assert_eq!(rls.runs[0].1, BigUint::from(1024u32));
    }

    #[test]
    fn runlength_matches_flat_bound_table() {
        let rls = RunLengthSpectrum::from_flat(&[0.8, 0.2]).unwrap();
        let p = pmax_runlength(&rls, &BigUint::from(2u32));
        assert_close(p, 0.4, 1e-15);
    }

    #[test]
    fn runlength_four_copies_make_phi16() {
        let rls = tensor_power_spectrum(&[0.5, 0.5], 4).unwrap();
        assert_close(pmax_runlength(&rls, &BigUint::from(16u32)), 1.0, 1e-12);
    }

    #[test]
    fn runlength_ten_copies_reach_certainty() {
        let rls = tensor_power_spectrum(&[0.8, 0.2], 10).unwrap();
        assert_close(pmax_runlength(&rls, &BigUint::from(2u32)), 1.0, 1e-12);
    }

    #[test]
    fn runlength_m_beyond_terms_is_zero() {
        let rls = RunLengthSpectrum::from_flat(&[1.0]).unwrap();
        assert_close(pmax_runlength(&rls, &BigUint::from(2u32)), 0.0, 1e-15);
    }

    #[test]
    fn pmax_nonincreasing_in_m() {
        let lambdas = [0.4, 0.25, 0.2, 0.1, 0.05];
        let mut prev = f64::INFINITY;
        for m in 1..=5 {
            let p = bound_table(&lambdas, m).unwrap().p_max;
            assert!(p <= prev + 1e-12, "p_max must not increase in m");
            prev = p;
        }
    }
}
