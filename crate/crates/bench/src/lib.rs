//! Fixed inputs shared by the kernel benchmarks.

use facet_core::{generate, GeneratorKind, GeneratorSpec, StandardFormLP};

/// Seeded instance of the given shape; panics on bad arguments.
pub fn instance(kind: GeneratorKind, m: usize, n: usize, r: usize) -> StandardFormLP {
    generate(&GeneratorSpec::new(kind, m, n, r, 7)).expect("bench instance").lp
}
