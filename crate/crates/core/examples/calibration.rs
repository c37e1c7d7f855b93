//! Smooth ECE for a calibrated and an overconfident scorer.

use fcuq::evaluation::smooth_ece;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let calibrated: Vec<(f64, bool)> = (0..10_000)
        .map(|_| {
            let p: f64 = rng.random();
            (p, rng.random_bool(p))
        })
        .collect();
    // Same outcomes, confidence pushed towards 1.
    let overconfident: Vec<(f64, bool)> = calibrated.iter().map(|&(p, y)| (p.sqrt().sqrt(), y)).collect();

    println!("calibrated     smECE = {:.4}", smooth_ece(&calibrated).unwrap());
    println!("overconfident  smECE = {:.4}", smooth_ece(&overconfident).unwrap());
}
