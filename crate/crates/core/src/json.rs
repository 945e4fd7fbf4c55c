//! File formats: state JSON (with the Schmidt shortcut form), strategy and
//! report JSON, distribution JSON, and the CSV emitters. Serialization is
//! deterministic so identical configs diff clean in golden-file tests.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::analysis::{CumulativeCheck, MEDistribution, SweepPoint, UniversalityGap};
use crate::bipartite::BipartitePureState;
use crate::error::{Error, Result};
use crate::executor::{ExecutionReport, Histogram};
use crate::linalg::CMat;
use crate::strategy::CompiledStrategy;
use crate::symmetry::{NecessityReport, TransferResult};

type MatrixDto = Vec<Vec<[f64; 2]>>;

fn matrix_dto(m: &CMat) -> MatrixDto {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

// ── state ──────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct StateDto {
    dim_a: usize,
    dim_b: usize,
    amplitudes: MatrixDto,
}

pub fn state_to_json(state: &BipartitePureState) -> String {
    pretty(&StateDto {
        dim_a: state.dim_a(),
        dim_b: state.dim_b(),
        amplitudes: matrix_dto(state.amplitudes()),
    })
}

fn field_u64(obj: &serde_json::Map<String, Value>, name: &str) -> Result<u64> {
    obj.get(name)
        .ok_or_else(|| Error::InvalidInput(format!("{name}: missing field")))?
        .as_u64()
        .ok_or_else(|| Error::InvalidInput(format!("{name}: expected a positive integer")))
}

/// Parse a state from either the full amplitude form
/// `{"dim_a":…, "dim_b":…, "amplitudes":[[[re,im],…],…]}`
/// or the shortcut `{"schmidt":[λ_1,…,λ_N]}` which builds Σ√λ_i|ii⟩.
pub fn parse_state(text: &str) -> Result<BipartitePureState> {
    parse_state_with_tol(text, crate::tol::NORM_TOL)
}

/// [`parse_state`] with a caller-chosen normalization tolerance; states
/// inside the tolerance are rescaled to exact norm 1.
pub fn parse_state_with_tol(text: &str, norm_tol: f64) -> Result<BipartitePureState> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("state JSON does not parse: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidInput("state: expected a JSON object".into()))?;

    if let Some(schmidt) = obj.get("schmidt") {
        let arr = schmidt
            .as_array()
            .ok_or_else(|| Error::InvalidInput("schmidt: expected an array of numbers".into()))?;
        let mut lambdas = Vec::with_capacity(arr.len());
        for (i, v) in arr.iter().enumerate() {
            let x = v
                .as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("schmidt[{i}]: expected a number")))?;
            if x < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "schmidt[{i}]: coefficients must be nonnegative, got {x}"
                )));
            }
            lambdas.push(x);
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > norm_tol {
            return Err(Error::InvalidInput(format!(
                "schmidt: coefficients must sum to 1, got {total}"
            )));
        }
        if (total - 1.0).abs() > 8.0 * f64::EPSILON {
            lambdas.iter_mut().for_each(|l| *l /= total);
        }
        return BipartitePureState::from_schmidt(&lambdas);
    }

    let dim_a = field_u64(obj, "dim_a")? as usize;
    let dim_b = field_u64(obj, "dim_b")? as usize;
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidInput("dim_a/dim_b: must be ≥ 1".into()));
    }
    let rows = obj
        .get("amplitudes")
        .ok_or_else(|| Error::InvalidInput("amplitudes: missing field".into()))?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("amplitudes: expected an array of rows".into()))?;
    if rows.len() != dim_a {
        return Err(Error::InvalidInput(format!(
            "amplitudes: expected {dim_a} rows, got {}",
            rows.len()
        )));
    }
    let mut amplitudes = CMat::zeros(dim_a, dim_b);
    for (i, row) in rows.iter().enumerate() {
        let cols = row.as_array().ok_or_else(|| {
            Error::InvalidInput(format!(
                "amplitudes[{i}]: expected an array of [re, im] pairs"
            ))
        })?;
        if cols.len() != dim_b {
            return Err(Error::InvalidInput(format!(
                "amplitudes[{i}]: expected {dim_b} entries, got {}",
                cols.len()
            )));
        }
        for (j, entry) in cols.iter().enumerate() {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::InvalidInput(format!("amplitudes[{i}][{j}]: expected a [re, im] pair"))
            })?;
            let re = pair[0].as_f64().ok_or_else(|| {
                Error::InvalidInput(format!("amplitudes[{i}][{j}][0]: expected a number"))
            })?;
            let im = pair[1].as_f64().ok_or_else(|| {
                Error::InvalidInput(format!("amplitudes[{i}][{j}][1]: expected a number"))
            })?;
            amplitudes[(i, j)] = Complex64::new(re, im);
        }
    }
    BipartitePureState::new_with_norm_tol(amplitudes, norm_tol).map_err(|e| match e {
        Error::Normalization { norm } => Error::InvalidInput(format!(
            "amplitudes: squared entries must sum to 1, got {norm}"
        )),
        other => other,
    })
}

// ── strategy ───────────────────────────────────────────────────────────

#[derive(Serialize)]
struct BranchDto {
    verdict: &'static str,
    probability: f64,
    kraus: MatrixDto,
    u_a: MatrixDto,
    u_b: MatrixDto,
}

#[derive(Serialize)]
struct StrategyDto {
    m: usize,
    p_success: f64,
    branches: Vec<BranchDto>,
}

pub fn strategy_to_json(strategy: &CompiledStrategy) -> String {
    pretty(&StrategyDto {
        m: strategy.m,
        p_success: strategy.success_probability,
        branches: strategy
            .branches
            .iter()
            .map(|b| BranchDto {
                verdict: b.verdict.as_str(),
                probability: b.probability,
                kraus: matrix_dto(&b.kraus_matrix()),
                u_a: matrix_dto(&b.u_a_matrix()),
                u_b: matrix_dto(&b.u_b_matrix()),
            })
            .collect(),
    })
}

// ── execution report ───────────────────────────────────────────────────

#[derive(Serialize)]
struct BranchResultDto {
    label: String,
    probability: f64,
    output_spectrum: Vec<f64>,
    verdict: &'static str,
    verdict_verified: bool,
}

#[derive(Serialize)]
struct ReportDto {
    total_success: f64,
    completeness_residual: f64,
    branch_results: Vec<BranchResultDto>,
}

pub fn report_to_json(report: &ExecutionReport) -> String {
    pretty(&ReportDto {
        total_success: report.total_success,
        completeness_residual: report.completeness_residual,
        branch_results: report
            .branch_results
            .iter()
            .map(|b| BranchResultDto {
                label: b.label.clone(),
                probability: b.probability,
                output_spectrum: b.output_spectrum.clone(),
                verdict: b.verdict.as_str(),
                verdict_verified: b.verdict_verified,
            })
            .collect(),
    })
}

pub fn histogram_to_csv(histogram: &Histogram) -> String {
    let mut out = String::from("label,count\n");
    for (label, count) in &histogram.counts {
        out.push_str(&format!("{label},{count}\n"));
    }
    out
}

// ── analysis artifacts ────────────────────────────────────────────────

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("n,K,m,p_max,entropy\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.n, p.k, p.m, p.p_max, p.entropy
        ));
    }
    out
}

pub fn distribution_to_json(dist: &MEDistribution) -> String {
    #[derive(Serialize)]
    struct DistDto {
        p: std::collections::BTreeMap<String, f64>,
    }
    pretty(&DistDto {
        p: dist
            .probabilities()
            .iter()
            .map(|(&m, &p)| (m.to_string(), p))
            .collect(),
    })
}

pub fn cumulative_checks_to_json(rows: &[CumulativeCheck]) -> String {
    #[derive(Serialize)]
    struct RowDto {
        m: u64,
        p_tot: f64,
        p_max: f64,
        ok: bool,
    }
    let rows: Vec<RowDto> = rows
        .iter()
        .map(|r| RowDto {
            m: r.m,
            p_tot: r.p_tot,
            p_max: r.p_max,
            ok: r.ok,
        })
        .collect();
    pretty(&rows)
}

// ── symmetry artifacts ────────────────────────────────────────────────

pub fn transfer_to_json(result: &TransferResult) -> String {
    #[derive(Serialize)]
    struct TransferDto {
        p_alice: MatrixDto,
        u_a: MatrixDto,
        u_b: MatrixDto,
        residual_error: f64,
        degenerate: bool,
    }
    pretty(&TransferDto {
        p_alice: matrix_dto(&result.p_alice),
        u_a: matrix_dto(&result.u_a),
        u_b: matrix_dto(&result.u_b),
        residual_error: result.residual_error,
        degenerate: result.degenerate,
    })
}

pub fn transfer_corpus_to_json(report: &crate::symmetry::TransferCorpusReport) -> String {
    #[derive(Serialize)]
    struct ExampleDto {
        p_alice: MatrixDto,
        u_a: MatrixDto,
        u_b: MatrixDto,
        residual_error: f64,
        degenerate: bool,
    }
    #[derive(Serialize)]
    struct CorpusDto {
        trials: usize,
        failures: usize,
        max_residual: f64,
        max_spectrum_deviation: f64,
        example: ExampleDto,
    }
    pretty(&CorpusDto {
        trials: report.trials,
        failures: report.failures,
        max_residual: report.max_residual,
        max_spectrum_deviation: report.max_spectrum_deviation,
        example: ExampleDto {
            p_alice: matrix_dto(&report.example.p_alice),
            u_a: matrix_dto(&report.example.u_a),
            u_b: matrix_dto(&report.example.u_b),
            residual_error: report.example.residual_error,
            degenerate: report.example.degenerate,
        },
    })
}

pub fn necessity_to_json(report: &NecessityReport) -> String {
    #[derive(Serialize)]
    struct NecessityDto {
        a2: f64,
        rho_sum_error: f64,
        support_fidelity: f64,
        support_overlap: bool,
        p_success: f64,
        p_max: f64,
    }
    pretty(&NecessityDto {
        a2: report.a2,
        rho_sum_error: report.rho_sum_error,
        support_fidelity: report.support_fidelity,
        support_overlap: report.support_overlap,
        p_success: report.p_success,
        p_max: report.p_max,
    })
}

pub fn universality_to_json(gap: &UniversalityGap) -> String {
    #[derive(Serialize)]
    struct GapDto {
        p2_initial: f64,
        p2_after_optimal_3: f64,
        residual_normalized: Vec<f64>,
    }
    pretty(&GapDto {
        p2_initial: gap.p2_initial,
        p2_after_optimal_3: gap.p2_after_optimal_3,
        residual_normalized: gap.residual_normalized.clone(),
    })
}
