//! Seeded random generation of spectra, states and unitaries.
//!
//! Everything runs off an explicit 64-bit seed through ChaCha8, so corpus
//! runs are bit-reproducible across platforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipartite::BipartitePureState;
use crate::linalg::{cr, CMat};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex normal via Box–Muller.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

/// Sorted random spectrum of n positive weights summing to 1 (flat
/// Dirichlet via normalized exponentials).
pub fn random_spectrum(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let mut weights: Vec<f64> = (0..n)
        .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
        .collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    weights
}

/// Haar-like random pure state: i.i.d. Gaussian amplitudes, normalized.
pub fn random_state(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize) -> BipartitePureState {
    let mut amp = CMat::from_fn(dim_a, dim_b, |_, _| complex_normal(rng));
    let norm = amp.norm();
    amp /= cr(norm);
    BipartitePureState::new(amp).expect("normalized by construction")
}

/// Haar random unitary: QR of a Gaussian matrix with the R diagonal made
/// real positive.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / cr(d.norm());
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}
