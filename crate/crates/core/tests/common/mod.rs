#![allow(dead_code)]

use ffgate::gaussian::{Matrix, Vector};
use ffgate::{GaussianChannel, GaussianState};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Thermal (or pure) state pushed through random squeezers, rotations and a beam
/// splitter, plus a random displacement.
pub fn random_state(rng: &mut ChaCha8Rng) -> GaussianState {
    let mut cov = Matrix::zeros(4, 4);
    for m in 0..2 {
        // half the modes pure so the bound is actually approached
        let nu = if rng.random_bool(0.5) { 0.5 } else { 0.5 + rng.random_range(0.0..2.0) };
        cov[(2 * m, 2 * m)] = nu;
        cov[(2 * m + 1, 2 * m + 1)] = nu;
    }
    let mean = Vector::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
    let thermal = GaussianState::from_parts(mean, cov).unwrap();
    let unitary = [
        GaussianChannel::ideal_opa(2, rng.random_range(1.0..20.0), 0).unwrap(),
        GaussianChannel::phase_rotation(2, rng.random_range(0.0..6.3), 1).unwrap(),
        GaussianChannel::ideal_opa(2, rng.random_range(1.0..20.0), 1).unwrap(),
        GaussianChannel::beam_splitter(2, rng.random_range(0.0..=1.0), 0, 1).unwrap(),
        GaussianChannel::phase_rotation(2, rng.random_range(0.0..6.3), 0).unwrap(),
    ];
    GaussianChannel::chain(&unitary).unwrap().apply(&thermal).unwrap()
}

/// One beam splitter, one amplifier (G in [1, 1e3]), one loss and one
/// rotation, in random order on random modes.
pub fn random_composition(rng: &mut ChaCha8Rng) -> GaussianChannel {
    let mut parts = vec![
        GaussianChannel::beam_splitter(2, rng.random_range(0.0..=1.0), 0, 1).unwrap(),
        GaussianChannel::ideal_opa(2, 10f64.powf(rng.random_range(0.0..=3.0)), rng.random_range(0..2)).unwrap(),
        GaussianChannel::loss(2, rng.random_range(0.0..=1.0), rng.random_range(0..2)).unwrap(),
        GaussianChannel::phase_rotation(2, rng.random_range(-6.3..6.3), rng.random_range(0..2)).unwrap(),
    ];
    parts.shuffle(rng);
    GaussianChannel::chain(&parts).unwrap()
}
