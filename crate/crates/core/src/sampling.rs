//! Seeded random fields for property checks. `FILICYL_SEED` overrides the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::AffineVectorField3;
use crate::system::DoubleDiscontinuitySystem;

pub const DEFAULT_SEED: u64 = 0x5EED_F11C;
pub const SEED_VAR: &str = "FILICYL_SEED";

pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env())
}

pub fn rng_with_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeff<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    rng.random_range(-scale..scale)
}

/// Constant field with `d2 ≠ 0`, entries in `(−scale, scale)`.
pub fn constant_field<R: Rng>(rng: &mut R, scale: f64) -> AffineVectorField3 {
    loop {
        let d = [coeff(rng, scale), coeff(rng, scale), coeff(rng, scale)];
        if d[1].abs() > 1e-3 * scale {
            return AffineVectorField3::constant(d);
        }
    }
}

/// Field depending on `x` only, with `|γ| > min_gamma`.
pub fn axial_field<R: Rng>(rng: &mut R, scale: f64, min_gamma: f64) -> AffineVectorField3 {
    loop {
        let ax = [coeff(rng, scale), coeff(rng, scale), coeff(rng, scale)];
        let d = [coeff(rng, scale), coeff(rng, scale), coeff(rng, scale)];
        let f = AffineVectorField3::axial(ax, d);
        if f.gamma().abs() > min_gamma {
            return f;
        }
    }
}

/// Fully affine field (all nine matrix entries random), `|γ| > min_gamma`.
pub fn affine_field<R: Rng>(rng: &mut R, scale: f64, min_gamma: f64) -> AffineVectorField3 {
    loop {
        let a = std::array::from_fn(|_| std::array::from_fn(|_| coeff(rng, scale)));
        let d = std::array::from_fn(|_| coeff(rng, scale));
        let f = AffineVectorField3::new(a, d);
        if f.gamma().abs() > min_gamma {
            return f;
        }
    }
}

pub fn affine_system<R: Rng>(rng: &mut R, scale: f64) -> DoubleDiscontinuitySystem {
    DoubleDiscontinuitySystem::new(std::array::from_fn(|_| affine_field(rng, scale, 1e-6)))
}
