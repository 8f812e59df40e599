//! Built-in partner selectors.

use rand::seq::index::sample;
use rand::Rng;

use crate::rng::StreamRng;

/// Name of the selector used when a label gives none.
pub const DEFAULT_SELECTOR: &str = "rand";

fn key(f: Option<f64>) -> f64 {
    f.unwrap_or(f64::NEG_INFINITY)
}

/// `k` distinct indices, uniformly at random. `k` is capped at the
/// population size.
pub fn uniform(fitness: &[Option<f64>], k: usize, rng: &mut StreamRng) -> Vec<usize> {
    sample(rng, fitness.len(), k.min(fitness.len())).into_vec()
}

/// The `k` fittest, best first. Missing fitness ranks last; ties go to the
/// lower index.
pub fn best(fitness: &[Option<f64>], k: usize, _rng: &mut StreamRng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| key(fitness[b]).total_cmp(&key(fitness[a])).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// `k` independent binary tournaments (with replacement).
pub fn tournament2(fitness: &[Option<f64>], k: usize, rng: &mut StreamRng) -> Vec<usize> {
    if fitness.is_empty() {
        return Vec::new();
    }
    (0..k)
        .map(|_| {
            let a = rng.random_range(0..fitness.len());
            let b = rng.random_range(0..fitness.len());
            let (a, b) = (a.min(b), a.max(b));
            if key(fitness[b]) > key(fitness[a]) {
                b
            } else {
                a
            }
        })
        .collect()
}
