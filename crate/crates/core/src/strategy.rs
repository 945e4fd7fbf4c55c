//! Compiles the optimal concentration protocol into a flat list of
//! Alice-side measurement branches with per-outcome local unitaries: the
//! degeneracy-raising step with parameter `a`, precursor reductions,
//! maximally-entangled downgrades, and the λ^max trim, all absorbed into
//! single Kraus operators per outcome path.

use num_complex::Complex64;

use crate::bounds::{self, bound_table, certainty_criterion};
use crate::error::{Error, Result};
use crate::linalg::{cr, CMat};

/// Hard limit on the number of flattened branches one compilation may emit.
const MAX_BRANCHES: usize = 5_000_000;

/// An operator with at most one nonzero entry per row and per column.
///
/// Every primitive in the compiled protocol (diagonal filters in the
/// Schmidt basis, index-relabeling permutations) has this shape, and the
/// shape is closed under products, so a full measurement path composes in
/// O(dim) instead of O(dim³).
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialOp {
    dim: usize,
    /// cols[j] = Some((i, z)) places entry z at row i of column j.
    cols: Vec<Option<(usize, Complex64)>>,
}

impl MonomialOp {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            cols: (0..dim).map(|j| Some((j, cr(1.0)))).collect(),
        }
    }

    /// Diagonal operator; entries with |z| = 0 become structural zeros.
    pub fn from_diagonal(entries: &[f64], dim: usize) -> Self {
        assert!(entries.len() <= dim);
        let mut cols: Vec<Option<(usize, Complex64)>> = vec![None; dim];
        for (j, &d) in entries.iter().enumerate() {
            if d != 0.0 {
                cols[j] = Some((j, cr(d)));
            }
        }
        Self { dim, cols }
    }

    /// Permutation sending column j to row perm[j].
    pub fn permutation(perm: &[usize]) -> Self {
        let dim = perm.len();
        let mut seen = vec![false; dim];
        for &p in perm {
            assert!(p < dim && !seen[p], "not a permutation");
            seen[p] = true;
        }
        Self {
            dim,
            cols: perm.iter().map(|&p| Some((p, cr(1.0)))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix product self · rhs.
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let cols = rhs
            .cols
            .iter()
            .map(|entry| entry.and_then(|(mid, z1)| self.cols[mid].map(|(row, z2)| (row, z2 * z1))))
            .collect();
        Self {
            dim: self.dim,
            cols,
        }
    }

    /// Pad to a larger dimension with structural zeros on the new columns.
    pub fn embed_zero(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut cols = self.cols.clone();
        cols.resize(dim, None);
        Self { dim, cols }
    }

    /// Diagonal of K†K: |z_j|² at column j.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|e| e.map_or(0.0, |(_, z)| z.norm_sqr()))
            .collect()
    }

    /// Scale and target row of column j, if nonzero.
    pub fn column_entry(&self, j: usize) -> Option<(usize, Complex64)> {
        self.cols[j]
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (j, entry) in self.cols.iter().enumerate() {
            if let Some((i, z)) = entry {
                m[(*i, j)] = *z;
            }
        }
        m
    }
}

/// One generalized measurement: a complete family of outcome operators.
#[derive(Debug, Clone)]
pub struct MeasurementStep {
    pub operators: Vec<MonomialOp>,
    pub labels: Vec<String>,
}

impl MeasurementStep {
    pub fn operator_matrices(&self) -> Vec<CMat> {
        self.operators.iter().map(MonomialOp::to_dense).collect()
    }

    /// Max deviation of Σ_k K_k†K_k from the identity over the first
    /// `support` indices.
    pub fn completeness_residual(&self, support: usize) -> f64 {
        let dim = self.operators.first().map_or(0, MonomialOp::dim);
        let mut total = vec![0.0f64; dim];
        for op in &self.operators {
            for (j, g) in op.gram_diagonal().into_iter().enumerate() {
                total[j] += g;
            }
        }
        total
            .iter()
            .take(support)
            .map(|&t| (t - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// The downgrade step Φ_k → Φ_{k−1}: k outcomes
/// K_i = (1/√(k−1)) Σ_{j≠i} |j⟩⟨j|, each occurring with probability 1/k
/// on Φ_k and leaving a (k−1)-dimensional maximally entangled state.
pub fn downgrade_step(k: usize) -> Result<MeasurementStep> {
    if k < 2 {
        return Err(Error::Parameter(format!(
            "downgrade step needs k ≥ 2, got {k}"
        )));
    }
    let w = 1.0 / ((k - 1) as f64).sqrt();
    let mut operators = Vec::with_capacity(k);
    let mut labels = Vec::with_capacity(k);
    for i in 0..k {
        let entries: Vec<f64> = (0..k).map(|j| if j == i { 0.0 } else { w }).collect();
        operators.push(MonomialOp::from_diagonal(&entries, k));
        labels.push(format!("d{}", i + 1));
    }
    Ok(MeasurementStep { operators, labels })
}

/// The precursor reduction step Ψ_pre^{m,p,q} → Ψ_pre^{m,p,q−1}: p+q
/// outcomes, each certain to land in a smaller precursor after relabeling.
pub fn precursor_reduction_step(m: usize, p: usize, q: usize) -> Result<MeasurementStep> {
    if p == 0 || p > m {
        return Err(Error::Parameter(format!(
            "precursor step requires 0 < p ≤ m, got p={p}, m={m}"
        )));
    }
    if q == 0 {
        return Err(Error::NoOp(
            "q = 0: the precursor is already an ME state".into(),
        ));
    }
    let dim = m + q;
    let head = 1.0 / ((p + q) as f64).sqrt();
    let block = 1.0 / ((p + q - 1) as f64).sqrt();
    let mut operators = Vec::with_capacity(p + q);
    let mut labels = Vec::with_capacity(p + q);
    for i in 1..=(p + q) {
        let entries: Vec<f64> = (0..dim)
            .map(|j0| {
                let j = j0 + 1;
                if j <= m - p {
                    head
                } else if j - (m - p) == i {
                    0.0
                } else {
                    block
                }
            })
            .collect();
        operators.push(MonomialOp::from_diagonal(&entries, dim));
        labels.push(format!("p{i}"));
    }
    Ok(MeasurementStep { operators, labels })
}

/// Result of one degeneracy-raising step in the certainty regime.
#[derive(Debug, Clone)]
pub struct PrecursorSplit {
    /// Two outcomes: "a1" (precursor) and "a0" (residual).
    pub step: MeasurementStep,
    /// (m, p, q) of the precursor produced by outcome "1".
    pub precursor: (usize, usize, usize),
    /// Probability of outcome "1" on the current (normalized) state.
    pub a: f64,
    /// Normalized residual spectrum after outcome "0", with the newly
    /// created degeneracy snapped exact. Empty when a = 1.
    pub residual: Vec<f64>,
}

fn degenerate_block(lambdas: &[f64], m: usize, dtol: f64) -> (usize, usize) {
    // 1-based [start, end] of the maximal run around index m in which
    // consecutive coefficients differ by at most dtol.
    let mut s = m;
    while s > 1 && (lambdas[s - 2] - lambdas[s - 1]).abs() <= dtol {
        s -= 1;
    }
    let mut e = m;
    while e < lambdas.len() && (lambdas[e - 1] - lambdas[e]).abs() <= dtol {
        e += 1;
    }
    (s, e)
}

fn snap_degeneracies(lambdas: &mut [f64], dtol: f64) {
    let n = lambdas.len();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (lambdas[j - 1] - lambdas[j]).abs() <= dtol {
            j += 1;
        }
        if j - i > 1 {
            let mean = lambdas[i..j].iter().sum::<f64>() / (j - i) as f64;
            lambdas[i..j].iter_mut().for_each(|l| *l = mean);
        }
        i = j;
    }
    let sum: f64 = lambdas.iter().sum();
    lambdas.iter_mut().for_each(|l| *l /= sum);
}

/// One iteration of the certainty-regime procedure: split the state into a
/// precursor (probability `a`) and a residual whose degeneracy number has
/// grown by at least one.
pub fn precursor_split(lambdas: &[f64], m: usize, dtol: f64) -> Result<PrecursorSplit> {
    let n = lambdas.len();
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "need 1 ≤ m ≤ N, got m={m}, N={n}"
        )));
    }
    if !certainty_criterion(lambdas, m) {
        return Err(Error::Precondition(format!(
            "λ_1 = {} exceeds 1/m = {}",
            lambdas[0],
            1.0 / m as f64
        )));
    }
    let (s, e) = degenerate_block(lambdas, m, dtol);
    if s == 1 && e == n {
        return Err(Error::Precondition(
            "spectrum is fully degenerate; no step needed".into(),
        ));
    }
    let p = m - s + 1;
    let q = e - m;
    let lam_after = if e < n { lambdas[e] } else { 0.0 };

    // a is the smallest value creating a new degeneracy in the residual;
    // a term is dropped when its merge target does not exist.
    let mut a = f64::INFINITY;
    if q >= 1 && s >= 2 {
        a = a.min((m * (p + q)) as f64 / q as f64 * (lambdas[s - 2] - lambdas[s - 1]));
    }
    a = a.min((m * (p + q)) as f64 / p as f64 * (lambdas[e - 1] - lam_after));
    debug_assert!(a.is_finite());
    let a = a.min(1.0);

    let head_take = a / m as f64;
    let block_take = head_take * p as f64 / (p + q) as f64;

    let mut d1 = vec![0.0f64; n];
    let mut d0 = vec![0.0f64; n];
    for i in 0..n {
        let idx = i + 1;
        let take = if idx <= m - p {
            head_take
        } else if idx <= e {
            block_take
        } else {
            0.0
        };
        let frac = (take / lambdas[i]).min(1.0);
        d1[i] = frac.sqrt();
        d0[i] = (1.0 - frac).max(0.0).sqrt();
    }

    let mut residual: Vec<f64> = (0..n)
        .map(|i| (lambdas[i] * d0[i] * d0[i]).max(0.0))
        .collect();
    let mass: f64 = residual.iter().sum();
    if mass <= 1e-12 {
        residual.clear();
    } else {
        residual.iter_mut().for_each(|l| *l /= mass);
        snap_degeneracies(&mut residual, dtol);
        if residual.iter().filter(|&&l| l > 1e-13).count() < m {
            return Err(Error::Tolerance(format!(
                "residual rank fell below m={m}; degeneracy tolerance {dtol} too tight for spectrum {lambdas:?}"
            )));
        }
    }

    Ok(PrecursorSplit {
        step: MeasurementStep {
            operators: vec![
                MonomialOp::from_diagonal(&d1, n),
                MonomialOp::from_diagonal(&d0, n),
            ],
            labels: vec!["a1".into(), "a0".into()],
        },
        precursor: (m, p, q),
        a,
        residual,
    })
}

/// The λ^max trim of the optimal-probability regime: outcome "1" lands in
/// the certainty regime with probability min_r B^m_r, outcome "0" has
/// fewer than m Schmidt terms and can never reach Φ_m.
pub fn lambda_max_trim(lambdas: &[f64], m: usize) -> Result<MeasurementStep> {
    if certainty_criterion(lambdas, m) {
        return Err(Error::Precondition(
            "trim is only defined when min_r B^m_r < 1".into(),
        ));
    }
    let table = bound_table(lambdas, m)?;
    let n = lambdas.len();
    let cut = m - table.r1; // indices 1..cut are trimmed down to λ^max
    let mut success = vec![0.0f64; n];
    let mut failure = vec![0.0f64; n];
    for i in 0..n {
        if i < cut {
            let frac = (table.lambda_max / lambdas[i]).min(1.0);
            success[i] = frac.sqrt();
            failure[i] = (1.0 - frac).max(0.0).sqrt();
        } else {
            success[i] = 1.0;
            failure[i] = 0.0;
        }
    }
    Ok(MeasurementStep {
        operators: vec![
            MonomialOp::from_diagonal(&success, n),
            MonomialOp::from_diagonal(&failure, n),
        ],
        labels: vec!["t1".into(), "t0".into()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Success,
    Failure,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::Failure => "failure",
        }
    }
}

/// One flattened outcome path of a compiled strategy.
#[derive(Debug, Clone)]
pub struct StrategyBranch {
    pub label: String,
    kraus: MonomialOp,
    u_a: MonomialOp,
    u_b: MonomialOp,
    pub verdict: Verdict,
    /// Exact probability of this path on the input spectrum.
    pub probability: f64,
}

impl StrategyBranch {
    pub fn kraus(&self) -> &MonomialOp {
        &self.kraus
    }

    pub fn u_a(&self) -> &MonomialOp {
        &self.u_a
    }

    pub fn u_b(&self) -> &MonomialOp {
        &self.u_b
    }

    pub fn kraus_matrix(&self) -> CMat {
        self.kraus.to_dense()
    }

    pub fn u_a_matrix(&self) -> CMat {
        self.u_a.to_dense()
    }

    pub fn u_b_matrix(&self) -> CMat {
        self.u_b.to_dense()
    }
}

/// The full compiled protocol: one Alice-side generalized measurement,
/// flattened to leaves, with Bob's per-outcome rotation recorded.
#[derive(Debug, Clone)]
pub struct CompiledStrategy {
    pub input_spectrum: Vec<f64>,
    pub m: usize,
    pub branches: Vec<StrategyBranch>,
    pub success_probability: f64,
    dim: usize,
}

impl CompiledStrategy {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Σ over all branches of the diagonal of K†K.
    pub fn completeness_diagonal(&self) -> Vec<f64> {
        let mut total = vec![0.0f64; self.dim];
        for b in &self.branches {
            for (j, g) in b.kraus.gram_diagonal().into_iter().enumerate() {
                total[j] += g;
            }
        }
        total
    }

    /// Operator-norm deviation of Σ K†K from the identity on the support.
    pub fn completeness_residual(&self) -> f64 {
        self.completeness_diagonal()
            .iter()
            .take(self.input_spectrum.len())
            .map(|&t| (t - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

struct PathState {
    kraus: MonomialOp,
    u_b: MonomialOp,
    label: String,
}

impl PathState {
    fn extended(&self, op: &MonomialOp, relabel: Option<&MonomialOp>, token: &str) -> PathState {
        let mut kraus = op.compose(&self.kraus);
        let mut u_b = self.u_b.clone();
        if let Some(r) = relabel {
            kraus = r.compose(&kraus);
            u_b = r.compose(&u_b);
        }
        PathState {
            kraus,
            u_b,
            label: format!("{}-{}", self.label, token),
        }
    }
}

struct Compiler<'a> {
    input: &'a [f64],
    m: usize,
    dim: usize,
    dtol: f64,
    branches: Vec<StrategyBranch>,
}

impl<'a> Compiler<'a> {
    fn branch_probability(&self, kraus: &MonomialOp) -> f64 {
        self.input
            .iter()
            .enumerate()
            .map(|(j, &l)| kraus.column_entry(j).map_or(0.0, |(_, z)| l * z.norm_sqr()))
            .sum()
    }

    fn emit(&mut self, path: PathState, verdict: Verdict) -> Result<()> {
        if self.branches.len() >= MAX_BRANCHES {
            return Err(Error::Capacity(format!(
                "compiled strategy exceeds {MAX_BRANCHES} branches"
            )));
        }
        let probability = self.branch_probability(&path.kraus);
        self.branches.push(StrategyBranch {
            label: path.label,
            kraus: path.kraus,
            u_a: MonomialOp::identity(self.dim),
            u_b: path.u_b,
            verdict,
            probability,
        });
        Ok(())
    }

    /// Permutation that deletes 0-based index `removed` from the occupied
    /// range 0..=top, shifting the tail down and parking `removed` at `top`.
    fn removal_perm(&self, removed: usize, top: usize) -> MonomialOp {
        let perm: Vec<usize> = (0..self.dim)
            .map(|j| {
                if j == removed {
                    top
                } else if j > removed && j <= top {
                    j - 1
                } else {
                    j
                }
            })
            .collect();
        MonomialOp::permutation(&perm)
    }

    /// Chain of downgrade steps Φ_k → Φ_{k−1} → … → Φ_m, every leaf a
    /// success with the state relabeled to the standard Φ_m.
    fn expand_downgrade_chain(&mut self, path: PathState, k: usize) -> Result<()> {
        if k == self.m {
            return self.emit(path, Verdict::Success);
        }
        let step = downgrade_step(k)?;
        for (i, op) in step.operators.iter().enumerate() {
            let op = op.embed_zero(self.dim);
            let relabel = self.removal_perm(i, k - 1);
            let next = path.extended(&op, Some(&relabel), &step.labels[i]);
            self.expand_downgrade_chain(next, k - 1)?;
        }
        Ok(())
    }

    /// Chain of precursor reductions Ψ_pre^{m,p,q} → … → Φ_m.
    fn expand_precursor_chain(&mut self, path: PathState, p: usize, q: usize) -> Result<()> {
        if q == 0 {
            return self.emit(path, Verdict::Success);
        }
        let step = precursor_reduction_step(self.m, p, q)?;
        for (i, op) in step.operators.iter().enumerate() {
            let op = op.embed_zero(self.dim);
            // Outcome i clears block index (m−p) + i; relabel it away.
            let relabel = self.removal_perm(self.m - p + i, self.m + q - 1);
            let next = path.extended(&op, Some(&relabel), &step.labels[i]);
            self.expand_precursor_chain(next, p, q - 1)?;
        }
        Ok(())
    }

    /// The certainty regime: iterate degeneracy-raising steps, peeling off
    /// precursors, until the residual is fully degenerate.
    fn expand_certainty_regime(
        &mut self,
        mut path: PathState,
        mut lambdas: Vec<f64>,
    ) -> Result<()> {
        for _ in 0..=(self.dim + 1) {
            let rank = lambdas.len();
            debug_assert!(rank >= self.m);
            let uniform = lambdas[0] - lambdas[rank - 1] <= self.dtol;
            if uniform {
                if rank == self.m {
                    return self.emit(
                        path.extended(&MonomialOp::identity(self.dim), None, "id"),
                        Verdict::Success,
                    );
                }
                return self.expand_downgrade_chain(
                    path.extended(&MonomialOp::identity(self.dim), None, "id"),
                    rank,
                );
            }

            let step = precursor_split(&lambdas, self.m, self.dtol)?;
            let (_, p, q) = step.precursor;
            let precursor_path = path.extended(&step.step.operators[0], None, &step.step.labels[0]);
            self.expand_precursor_chain(precursor_path, p, q)?;

            if step.residual.is_empty() {
                return Ok(()); // outcome "0" has zero amplitude
            }
            path = path.extended(&step.step.operators[1], None, &step.step.labels[1]);
            lambdas = step.residual;
        }
        Err(Error::Tolerance(format!(
            "degeneracy merging did not converge within {} iterations (tolerance {})",
            self.dim + 2,
            self.dtol
        )))
    }
}

/// Compile the optimal strategy converting a state with the given ordered
/// Schmidt spectrum into Φ_m. The compiled success probability equals
/// min_r B^m_r; all operators act on the Schmidt index space of the input.
pub fn compile(lambdas: &[f64], m: usize, degeneracy_tol: f64) -> Result<CompiledStrategy> {
    if m == 0 {
        return Err(Error::Parameter("m must be ≥ 1".into()));
    }
    bounds::validate_spectrum(lambdas)?;
    let lambdas: Vec<f64> = lambdas.iter().copied().filter(|&l| l > 0.0).collect();
    let n = lambdas.len();
    let dim = n;

    if m > n {
        // Nothing reaches Φ_m (the Schmidt term count never increases);
        // the strategy is a single do-nothing failure branch.
        let identity = MonomialOp::identity(dim.max(1));
        return Ok(CompiledStrategy {
            input_spectrum: lambdas,
            m,
            branches: vec![StrategyBranch {
                label: "f".into(),
                kraus: identity.clone(),
                u_a: identity.clone(),
                u_b: identity,
                verdict: Verdict::Failure,
                probability: 1.0,
            }],
            success_probability: 0.0,
            dim: dim.max(1),
        });
    }

    let mut compiler = Compiler {
        input: &lambdas,
        m,
        dim,
        dtol: degeneracy_tol,
        branches: Vec::new(),
    };

    let root = PathState {
        kraus: MonomialOp::identity(dim),
        u_b: MonomialOp::identity(dim),
        label: "r".into(),
    };

    if certainty_criterion(&lambdas, m) {
        let mut start = lambdas.clone();
        snap_degeneracies(&mut start, degeneracy_tol);
        compiler.expand_certainty_regime(root, start)?;
    } else {
        let trim = lambda_max_trim(&lambdas, m)?;
        let table = bound_table(&lambdas, m)?;

        // Trimmed spectrum: the first m−r₁ coefficients replaced by λ^max,
        // normalized by its own mass min_r B^m_r. Exactly in the certainty
        // regime by construction (λ'_1 = 1/m).
        let cut = m - table.r1;
        let mut trimmed: Vec<f64> = (0..n)
            .map(|i| {
                if i < cut {
                    table.lambda_max
                } else {
                    lambdas[i]
                }
            })
            .collect();
        let mass: f64 = trimmed.iter().sum();
        trimmed.iter_mut().for_each(|l| *l /= mass);
        snap_degeneracies(&mut trimmed, degeneracy_tol);

        let success_root = root.extended(&trim.operators[0], None, &trim.labels[0]);
        compiler.expand_certainty_regime(success_root, trimmed)?;

        let failure_path = root.extended(&trim.operators[1], None, &trim.labels[1]);
        compiler.emit(failure_path, Verdict::Failure)?;
    }

    let Compiler { branches, .. } = compiler;
    let success_probability = branches
        .iter()
        .filter(|b| b.verdict == Verdict::Success)
        .map(|b| b.probability)
        .sum();

    Ok(CompiledStrategy {
        input_spectrum: lambdas,
        m,
        branches,
        success_probability,
        dim,
    })
}

/// Two-branch strategy extracting Φ_m from the first m Schmidt terms with
/// a chosen probability p ≤ m·λ_m: the trim scaled down. The failure
/// branch keeps rank N in general, so this is not an optimal strategy;
/// it exists to study residual spectra of partial extractions.
pub fn scaled_extraction(lambdas: &[f64], m: usize, p: f64) -> Result<CompiledStrategy> {
    bounds::validate_spectrum(lambdas)?;
    let n = lambdas.len();
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "need 1 ≤ m ≤ N, got m={m}, N={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) || p > m as f64 * lambdas[m - 1] + 1e-12 {
        return Err(Error::Precondition(format!(
            "extraction probability {p} exceeds m·λ_m = {}",
            m as f64 * lambdas[m - 1]
        )));
    }
    let share = p / m as f64;
    let mut d_s = vec![0.0f64; n];
    let mut d_f = vec![0.0f64; n];
    for i in 0..n {
        if i < m {
            let frac = (share / lambdas[i]).min(1.0);
            d_s[i] = frac.sqrt();
            d_f[i] = (1.0 - frac).max(0.0).sqrt();
        } else {
            d_f[i] = 1.0;
        }
    }
    let success = MonomialOp::from_diagonal(&d_s, n);
    let failure = MonomialOp::from_diagonal(&d_f, n);
    let p_success: f64 = lambdas
        .iter()
        .zip(success.gram_diagonal())
        .map(|(&l, g)| l * g)
        .sum();
    Ok(CompiledStrategy {
        input_spectrum: lambdas.to_vec(),
        m,
        branches: vec![
            StrategyBranch {
                label: "r-s".into(),
                kraus: success,
                u_a: MonomialOp::identity(n),
                u_b: MonomialOp::identity(n),
                verdict: Verdict::Success,
                probability: p_success,
            },
            StrategyBranch {
                label: "r-f".into(),
                kraus: failure.clone(),
                u_a: MonomialOp::identity(n),
                u_b: MonomialOp::identity(n),
                verdict: Verdict::Failure,
                probability: lambdas
                    .iter()
                    .zip(failure.gram_diagonal())
                    .map(|(&l, g)| l * g)
                    .sum(),
            },
        ],
        success_probability: p_success,
        dim: n,
    })
}
