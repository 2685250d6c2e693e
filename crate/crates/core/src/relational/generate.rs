//! Seeded synthetic data.

use alloc::format;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Database, Relation};
use crate::Error;

const MAX_WEIGHT: f64 = 10_000.0;

/// `n` binary tuples with both columns uniform on `[1, domain]` and weights
/// uniform on `[0, 10000]`.
pub fn uniform(name: &str, n: usize, domain: u64, seed: u64) -> Relation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = domain.max(1);
    let mut rel = Relation::new(name, 2);
    for _ in 0..n {
        let a = rng.random_range(1..=domain);
        let b = rng.random_range(1..=domain);
        rel.push(&[a, b], rng.random_range(0.0..=MAX_WEIGHT));
    }
    rel
}

/// `{(0, i)} ∪ {(i, 0)}` for `i` in `1..=n/2`.  Every cycle query over
/// copies of this relation has an output of size `Θ(n^(ℓ/2))`.
pub fn worst_case_cycle(name: &str, n: usize, seed: u64) -> Result<Relation, Error> {
    if !n.is_multiple_of(2) {
        return Err(Error::Config(format!("worst-case cycle data needs an even size, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rel = Relation::new(name, 2);
    let half = (n / 2) as u64;
    for i in 1..=half {
        rel.push(&[0, i], rng.random_range(0.0..=MAX_WEIGHT));
    }
    for i in 1..=half {
        rel.push(&[i, 0], rng.random_range(0.0..=MAX_WEIGHT));
    }
    Ok(rel)
}

/// The 4-cycle instance on which binary join plans are quadratic while
/// the output is `2n²`: relations `R(A,B)`, `S(B,C)`, `T(C,D)`, `W(D,A)`,
/// each `{(vᵢ, u₀)} ∪ {(v₀, uᵢ)}` for `i` in `1..=n`, with value 0 standing
/// for the distinguished constant of each attribute.
pub fn nprr_adversarial(n: usize, seed: u64) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = Database::new();
    for name in ["R", "S", "T", "W"] {
        let mut rel = Relation::new(name, 2);
        for i in 1..=n as u64 {
            rel.push(&[i, 0], rng.random_range(0.0..=MAX_WEIGHT));
        }
        for i in 1..=n as u64 {
            rel.push(&[0, i], rng.random_range(0.0..=MAX_WEIGHT));
        }
        db.insert(rel).expect("distinct names");
    }
    db
}
