//! Command-line front end: Schmidt analysis, bound tables, strategy
//! compilation, exact and sampled execution, the invariant suite, the
//! many-pairs sweep, and the symmetry/necessity/universality reports.
//!
//! Exit codes: 0 = all checks passed, 1 = a check failed, 2 = usage or
//! input error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schmidt_forge::analysis::{many_pairs_sweep, universality_gap};
use schmidt_forge::bipartite::{entropy_of_entanglement, BipartitePureState};
use schmidt_forge::bounds::bound_table;
use schmidt_forge::executor::{execute_exact, sample};
use schmidt_forge::json;
use schmidt_forge::strategy::compile;
use schmidt_forge::symmetry::{communication_necessity_demo, transfer_random_corpus};
use schmidt_forge::verify::{run_invariant_suite, VerifyConfig};
use schmidt_forge::{tol, Error};

const SEED_ENV: &str = "SCHMIDT_FORGE_SEED";

#[derive(Parser)]
#[command(
    name = "schmidt-forge",
    version,
    about = "Optimal entanglement concentration: bounds, compiled strategies, exact verification"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StateArg {
    /// State as inline JSON ({"schmidt":[...]} or the amplitude form) or a
    /// path to a JSON file.
    #[arg(long)]
    state: String,
    /// Accepted deviation of the state norm from 1 (input is rescaled).
    #[arg(long, default_value_t = tol::NORM_TOL)]
    norm_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ordered Schmidt spectrum and the entropy of entanglement.
    Schmidt {
        #[command(flatten)]
        state: StateArg,
        /// Coefficients below rank-tol·λ₁ count as zero.
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
    },
    /// Print the bound table B^m_r, the minimizer r₁ and p_max.
    Pmax {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
    },
    /// Compile the optimal strategy into a branch list and write it as JSON.
    Compile {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        m: usize,
        /// Coefficients within this absolute gap merge into one block.
        #[arg(long, default_value_t = tol::DEGENERACY_TOL)]
        degen_tol: f64,
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile and execute exactly; write the execution report, optionally
    /// sampling a histogram.
    Run {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = tol::DEGENERACY_TOL)]
        degen_tol: f64,
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: PathBuf,
        /// Number of sampling shots (writes the histogram CSV to --hist).
        #[arg(long, requires = "hist")]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Run the invariant suite over a random corpus; exit 1 on any failure.
    Verify {
        /// Corpus kind; only "random" is defined.
        #[arg(long, default_value = "random")]
        corpus: String,
        /// Instances per check.
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest local dimension for random instances.
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
    },
    /// Many-pairs sweep: p_max of extracting ⌈2^{nK}⌉-dimensional states
    /// from n identical pairs, written as CSV.
    Sweep {
        #[command(flatten)]
        state: StateArg,
        /// Comma-separated copy counts.
        #[arg(long, default_value = "5,10,15,20,25,30")]
        n_values: String,
        /// Comma-separated rates, or start:end:step.
        #[arg(long, default_value = "0.1:1.0:0.05")]
        k_values: String,
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random Bob→Alice measurement transfers; write the residual report.
    Prop1 {
        /// Number of random (state, operator) pairs.
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest local dimension for random states.
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Conservation of Bob's density matrix and verdict-support overlap on
    /// √a²|11⟩ + √(1−a²)|22⟩.
    Necessity {
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The non-universality gap on a three-term state.
    Universality {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value_t = tol::RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
    })
    .unwrap_or(0)
}

fn load_state(arg: &StateArg) -> Result<BipartitePureState, Error> {
    let text = if arg.state.trim_start().starts_with('{') {
        arg.state.clone()
    } else {
        fs::read_to_string(&arg.state)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", arg.state)))?
    };
    json::parse_state_with_tol(&text, arg.norm_tol)
}

fn spectrum_of(state: &BipartitePureState, rank_tol: f64) -> Result<Vec<f64>, Error> {
    Ok(schmidt_forge::bipartite::schmidt_decompose(state, rank_tol)?.lambdas)
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Error> {
    fs::write(path, contents)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

/// 1 = a verification failed, 2 = bad usage/input.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::Parameter(_)
        | Error::Dimension(_)
        | Error::Normalization { .. }
        | Error::Precondition(_)
        | Error::NoOp(_)
        | Error::Capacity(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `... | head`)
    // instead of panicking on the next print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(command: Command) -> Result<bool, Error> {
    match command {
        Command::Schmidt { state, rank_tol } => {
            let state = load_state(&state)?;
            let sd = schmidt_forge::bipartite::schmidt_decompose(&state, rank_tol)?;
            println!("rank {}", sd.rank());
            for (i, l) in sd.lambdas.iter().enumerate() {
                println!("lambda[{}] {}", i + 1, l);
            }
            println!("entropy_bits {}", entropy_of_entanglement(&sd));
            Ok(true)
        }

        Command::Pmax { state, m, rank_tol } => {
            let state = load_state(&state)?;
            let lambdas = spectrum_of(&state, rank_tol)?;
            let table = bound_table(&lambdas, m)?;
            for (i, b) in table.b_values.iter().enumerate() {
                println!("B[{}] {}", i + 1, b);
            }
            println!("r1 {}", table.r1);
            println!("lambda_max {}", table.lambda_max);
            println!("p_max {}", table.p_max);
            Ok(true)
        }

        Command::Compile {
            state,
            m,
            degen_tol,
            rank_tol,
            out,
        } => {
            let state = load_state(&state)?;
            let lambdas = spectrum_of(&state, rank_tol)?;
            let strategy = compile(&lambdas, m, degen_tol)?;
            write_file(&out, &json::strategy_to_json(&strategy))?;
            println!(
                "branches {} p_success {} -> {}",
                strategy.branches.len(),
                strategy.success_probability,
                out.display()
            );
            Ok(true)
        }

        Command::Run {
            state,
            m,
            degen_tol,
            rank_tol,
            out,
            shots,
            seed,
            hist,
        } => {
            let state = load_state(&state)?;
            let lambdas = spectrum_of(&state, rank_tol)?;
            let strategy = compile(&lambdas, m, degen_tol)?;
            let table = bound_table(&lambdas, m)?;
            let report = execute_exact(&strategy, &state)?;
            write_file(&out, &json::report_to_json(&report))?;

            let verdicts_ok = report.branch_results.iter().all(|b| b.verdict_verified);
            let optimal = (report.total_success - table.p_max).abs() <= tol::OPTIMALITY_TOL;
            let complete = report.completeness_residual <= tol::STRATEGY_COMPLETENESS_TOL;
            println!(
                "total_success {} (bound {}) completeness_residual {:.3e}",
                report.total_success, table.p_max, report.completeness_residual
            );
            println!("verdicts_verified {verdicts_ok}");

            if let (Some(shots), Some(hist_path)) = (shots, hist) {
                let seed = resolve_seed(seed);
                let histogram = sample(&strategy, &state, shots, seed)?;
                write_file(&hist_path, &json::histogram_to_csv(&histogram))?;
                println!(
                    "sampled {shots} shots (seed {seed}) -> {}",
                    hist_path.display()
                );
            }
            Ok(verdicts_ok && optimal && complete)
        }

        Command::Verify {
            corpus,
            n,
            seed,
            max_dim,
        } => {
            if corpus != "random" {
                return Err(Error::InvalidInput(format!(
                    "corpus: unknown kind {corpus:?}, only \"random\" is defined"
                )));
            }
            let config = VerifyConfig {
                corpus: n,
                seed: resolve_seed(seed),
                max_dim,
            };
            let results = run_invariant_suite(&config);
            let mut all = true;
            for r in &results {
                println!(
                    "{} {} ({})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                all &= r.passed;
            }
            Ok(all)
        }

        Command::Sweep {
            state,
            n_values,
            k_values,
            rank_tol,
            out,
        } => {
            let state = load_state(&state)?;
            let lambdas = spectrum_of(&state, rank_tol)?;
            let n_values = parse_n_list(&n_values)?;
            let k_values = parse_k_list(&k_values)?;
            let points = many_pairs_sweep(&lambdas, &n_values, &k_values)?;
            write_file(&out, &json::sweep_to_csv(&points))?;
            println!("wrote {} sweep points -> {}", points.len(), out.display());
            Ok(true)
        }

        Command::Prop1 {
            trials,
            seed,
            max_dim,
            out,
        } => {
            let report = transfer_random_corpus(trials, resolve_seed(seed), max_dim)?;
            write_file(&out, &json::transfer_corpus_to_json(&report))?;
            println!(
                "trials {} failures {} max_residual {:.3e} max_spectrum_deviation {:.3e}",
                report.trials, report.failures, report.max_residual, report.max_spectrum_deviation
            );
            Ok(report.failures == 0)
        }

        Command::Necessity { a2, out } => {
            let report = communication_necessity_demo(a2)?;
            write_file(&out, &json::necessity_to_json(&report))?;
            println!(
                "rho_sum_error {:.3e} support_overlap {} p_success {}",
                report.rho_sum_error, report.support_overlap, report.p_success
            );
            let ok = report.rho_sum_error < tol::CONSERVATION_TOL && report.support_overlap;
            Ok(ok)
        }

        Command::Universality {
            state,
            rank_tol,
            out,
        } => {
            let state = load_state(&state)?;
            let lambdas = spectrum_of(&state, rank_tol)?;
            let gap = universality_gap(&lambdas)?;
            write_file(&out, &json::universality_to_json(&gap))?;
            println!(
                "p2_initial {} p2_after_optimal_3 {}",
                gap.p2_initial, gap.p2_after_optimal_3
            );
            Ok(gap.p2_after_optimal_3 < 1.0 - 1e-9)
        }
    }
}

fn parse_n_list(text: &str) -> Result<Vec<u32>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidInput(format!("n-values: {t:?} is not an integer")))
        })
        .collect()
}

fn parse_k_list(text: &str) -> Result<Vec<f64>, Error> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(
                "k-values: range form is start:end:step".into(),
            ));
        }
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("k-values: {t:?} is not a number")))
        };
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 || end < start {
            return Err(Error::InvalidInput(
                "k-values: need step > 0 and end ≥ start".into(),
            ));
        }
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let k = start + step * i as f64;
            if k > end + 1e-12 {
                break;
            }
            out.push((k * 1e12).round() / 1e12);
            i += 1;
        }
        Ok(out)
    } else {
        text.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("k-values: {t:?} is not a number")))
            })
            .collect()
    }
}
