//! Shared fixtures for the counting benchmarks.

use num_bigint::BigInt;

use igusa_core::{MultiPoly, Prime};

pub fn prime(p: u64) -> Prime {
    Prime::new(p).expect("benchmark primes are prime")
}

/// x1*x2, the hyperbolic plane.
pub fn hyperbolic_plane() -> MultiPoly {
    MultiPoly::from_terms(2, [(vec![1, 1], BigInt::from(1))]).expect("valid terms")
}

/// x1*x2 + x3^2, the attaining example in odd dimension.
pub fn odd_quadric() -> MultiPoly {
    MultiPoly::from_terms(3, [(vec![1, 1, 0], BigInt::from(1)), (vec![0, 0, 2], BigInt::from(1))])
        .expect("valid terms")
}

/// A singular cubic that forces deep lifting recursion.
pub fn singular_cubic() -> MultiPoly {
    // (x1 + x2)^3
    let linear = MultiPoly::from_terms(
        2,
        [(vec![1, 0], BigInt::from(1)), (vec![0, 1], BigInt::from(1))],
    )
    .expect("valid terms");
    linear.pow(3)
}
