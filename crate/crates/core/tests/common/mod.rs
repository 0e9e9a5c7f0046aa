#![allow(dead_code)]

use gaussify::{GammaMatrix, PureState2, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Unit-norm state with independent uniform complex amplitudes.
pub fn random_state(rng: &mut impl Rng, cutoff: usize) -> PureState2 {
    PureState2::from_fn(cutoff, |_, _| random_c64(rng)).normalized().unwrap()
}

/// Random complex symmetric Γ rescaled to spectral norm `norm`.
pub fn random_gamma(rng: &mut impl Rng, norm: f64) -> GammaMatrix {
    let g = GammaMatrix::new(random_c64(rng), random_c64(rng), random_c64(rng));
    g.scaled(norm / gaussify::fixed_point::spectral_norm(&g))
}

pub fn max_abs_diff(a: &PureState2, b: &PureState2) -> f64 {
    let c = a.cutoff().max(b.cutoff());
    let (a, b) = (a.padded(c), b.padded(c));
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
