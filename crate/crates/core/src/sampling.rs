//! Seeded random smooth test data: compatible triples and boundary data.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{BoundaryTriple, End, Grid, Periodic, ScalarField, TripleField};

/// Deterministic generator used by probes, certificates and tests.
#[derive(Clone, Debug)]
pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }
}

/// Highest y-wavenumber and x-polynomial degree used by the samplers.
const MAX_MODE: usize = 2;
const MAX_DEGREE: usize = 3;

fn random_smooth(grid: &Grid, rng: &mut SampleRng) -> ScalarField {
    let mut coeffs = Vec::new();
    for p in 0..=MAX_DEGREE {
        for k in 0..=MAX_MODE {
            let decay = 1.0 / ((1 + p) * (1 + k * k)) as f64;
            coeffs.push((p, k, decay * rng.uniform(-1.0, 1.0), decay * rng.uniform(-1.0, 1.0)));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        let t = 2.0 * x - 1.0;
        coeffs
            .iter()
            .map(|&(p, k, a, b)| {
                // Chebyshev T_p(t)
                let tp = (p as f64 * t.clamp(-1.0, 1.0).acos()).cos();
                let arg = 2.0 * PI * k as f64 * y;
                tp * (a * arg.cos() + b * arg.sin())
            })
            .sum()
    })
}

/// Random smooth triple with `u1 + u2 + u3 = 0` on `{0} x S^1`, scaled so that
/// its norm proxy equals `proxy`.
pub fn random_compatible_triple(grid: &Grid, rng: &mut SampleRng, proxy: f64, alpha: f64) -> TripleField {
    let raw = [0, 1, 2].map(|_| random_smooth(grid, rng));
    let u = TripleField::new(raw[0].clone(), raw[1].clone(), raw[2].clone()).expect("shared grid");
    let traces = u.traces(End::Inner);
    let ny = grid.ny();
    let mean: Vec<f64> = (0..ny)
        .map(|m| (traces[0].values()[m] + traces[1].values()[m] + traces[2].values()[m]) / 3.0)
        .collect();
    let correction = ScalarField::from_rows(
        grid,
        &grid
            .x()
            .iter()
            .map(|&x| mean.iter().map(|&c| (1.0 - x) * c).collect())
            .collect::<Vec<_>>(),
    );
    let u = u.map(|c| c - &correction);
    let p = u.norm_proxy(alpha);
    u.scale(proxy / p)
}

/// Random boundary data with modes `k <= 2`, scaled to the given `C^{2,alpha}` proxy.
pub fn random_boundary(ny: usize, rng: &mut SampleRng, proxy: f64, alpha: f64) -> BoundaryTriple {
    let comps = [0, 1, 2].map(|_| {
        let modes: Vec<(usize, f64, f64)> = (0..=MAX_MODE)
            .map(|k| {
                let decay = 1.0 / (1 + k * k) as f64;
                (k, decay * rng.uniform(-1.0, 1.0), decay * rng.uniform(-1.0, 1.0))
            })
            .collect();
        Periodic::from_modes(ny, &modes).expect("low modes")
    });
    let [a, b, c] = comps;
    let phi = BoundaryTriple::new(a, b, c).expect("same length");
    let fourier = crate::fourier::Fourier::new(ny);
    let p = phi.norm_proxy(&fourier, alpha);
    phi.scale(proxy / p)
}

/// Random smooth periodic map with modes `k <= 2` and unit-order amplitude.
pub fn random_periodic(ny: usize, rng: &mut SampleRng) -> Periodic {
    let modes: Vec<(usize, f64, f64)> = (0..=MAX_MODE)
        .map(|k| (k, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
        .collect();
    Periodic::from_modes(ny, &modes).expect("low modes")
}

/// Random smooth field with unit-order amplitude.
pub fn random_field(grid: &Grid, rng: &mut SampleRng) -> ScalarField {
    random_smooth(grid, rng)
}
