//! Random densities shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use renyi_epi::GridDensity;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixture of one to three Gaussian bumps on `[-5, 5]`.
pub fn random_bumpy<R: Rng>(rng: &mut R, h: f64) -> GridDensity {
    let k = rng.gen_range(1..=3);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(0.2..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.3..1.0),
            )
        })
        .collect();
    let n = (10.0 / h).round() as usize;
    GridDensity::from_fn(-5.0, 10.0 / n as f64, n, |x| {
        bumps
            .iter()
            .map(|&(w, m, s)| w * (-(x - m).powi(2) / (2.0 * s * s)).exp() / s)
            .sum()
    })
    .unwrap()
}

/// Even, non-increasing away from zero, with `2m` cells of step `h`.
pub fn random_sym_unimodal<R: Rng>(rng: &mut R, h: f64) -> GridDensity {
    let m = rng.gen_range(5..60);
    let mut half = Vec::with_capacity(m);
    let mut level = 1.0;
    for _ in 0..m {
        half.push(level);
        // occasional flat stretches
        if rng.gen_bool(0.7) {
            level *= rng.gen_range(0.5..1.0);
        }
    }
    let values: Vec<f64> = half.iter().rev().chain(half.iter()).copied().collect();
    GridDensity::normalized(-(m as f64) * h, h, values).unwrap()
}

/// Positive density on `[-2, 2]` that is concave, bumpy, or a power of a
/// concave shape, chosen at random.
pub fn random_shape<R: Rng>(rng: &mut R) -> GridDensity {
    let h = 0.025;
    match rng.gen_range(0..3) {
        0 => renyi_epi::sconcave::random_s_concave(rng.gen_range(0.8..3.0), h, rng).unwrap(),
        1 => renyi_epi::sconcave::random_s_concave(rng.gen_range(-0.5..0.5), h, rng).unwrap(),
        _ => {
            let f = random_bumpy(rng, 0.05);
            let v = f.values()[30..170].to_vec();
            GridDensity::normalized(-3.5, 0.05, v).unwrap()
        }
    }
}
