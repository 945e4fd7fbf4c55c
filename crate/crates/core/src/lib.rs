//! Optimal single-copy entanglement concentration at desk scale.
//!
//! Two parties share a bipartite pure state. This crate computes the best
//! probability of converting it into a maximally entangled state of any
//! target dimension, compiles the measurement protocol that attains that
//! probability into concrete operators, executes strategies exactly and by
//! seeded sampling, and verifies the surrounding structure: the A↔B
//! measurement-transfer symmetry, conservation of the passive party's
//! density matrix, cumulative-probability bounds, large-deviation sweeps
//! over many identical pairs, and the impossibility of a universal
//! strategy.
//!
//! ```
//! use schmidt_forge::bipartite::BipartitePureState;
//! use schmidt_forge::bounds::bound_table;
//! use schmidt_forge::executor::execute_exact;
//! use schmidt_forge::strategy::compile;
//! use schmidt_forge::tol;
//!
//! let lambdas = [0.8, 0.2];
//! let table = bound_table(&lambdas, 2)?;
//! assert!((table.p_max - 0.4).abs() < 1e-12);
//!
//! // The compiled strategy attains the bound exactly.
//! let strategy = compile(&lambdas, 2, tol::DEGENERACY_TOL)?;
//! let state = BipartitePureState::from_schmidt(&lambdas)?;
//! let report = execute_exact(&strategy, &state)?;
//! assert!((report.total_success - table.p_max).abs() < 1e-12);
//! # Ok::<(), schmidt_forge::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod analysis;
pub mod bipartite;
pub mod bounds;
pub mod error;
pub mod executor;
pub mod json;
pub mod linalg;
pub mod random;
pub mod strategy;
pub mod symmetry;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
