//! Counter-keyed random streams.
//!
//! Every parallel unit of work (a Monte-Carlo batch, a trial, an optimizer
//! restart) draws from its own ChaCha stream keyed by `(seed, index)`, so
//! results do not depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Independent generator for stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, used when one seeded routine calls another.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, tag);
    rng.random()
}

/// Uniform point on the unit sphere in `out.len()` dimensions.
pub fn fill_unit_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm2 += *v * *v;
        }
        if norm2 > 1e-24 {
            let inv = norm2.sqrt().recip();
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Uniform point in the ball `B(center, radius)`.
pub fn fill_uniform_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64, out: &mut [f64]) {
    let n = center.len();
    if n == 2 {
        loop {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                out[0] = center[0] + radius * x;
                out[1] = center[1] + radius * y;
                return;
            }
        }
    }
    fill_unit_sphere(rng, out);
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / n as f64);
    for (o, c) in out.iter_mut().zip(center) {
        *o = c + scale * *o;
    }
}

/// Uniform point in the axis-aligned box `[lo, hi]`.
pub fn fill_uniform_box<R: Rng + ?Sized>(rng: &mut R, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
        let u: f64 = rng.random();
        *o = a + (b - a) * u;
    }
}
