//! Three 2x5 textbook systems with known vertex structure, all with `b = (1, 1)`
//! and a zero objective.

use crate::lp::StandardFormLP;

fn build(a: [f64; 10]) -> StandardFormLP {
    StandardFormLP::from_rows(2, 5, &a, &[1.0, 1.0], &[0.0; 5]).expect("golden data is well formed")
}

/// No strictly feasible point. Exposed by `y = (1, -1)`, `A^T y = (1, 0, 1, 7, 0)`.
/// Six feasible bases, two vertices `(0,1,0,0,0)` and `(0,0,0,0,1/2)`, all degenerate.
pub fn no_slater() -> StandardFormLP {
    build([1., 1., 3., 5., 2., 0., 1., 2., -2., 2.])
}

/// Strictly feasible (witness `(0.4, 0.1, 0.1, 0.4, 0.1)`), four feasible bases,
/// basis `{1,5}` (1-based) gives the nondegenerate vertex `(5,0,0,0,1)`.
pub fn slater_nondegenerate() -> StandardFormLP {
    build([1., 0., -2., 3., -4., 0., -1., -2., 3., 1.])
}

/// Strictly feasible (witness `(0.1, 0.1, 0.55, 0.3, 0.1)`) yet all four
/// feasible bases are degenerate.
pub fn slater_all_degenerate() -> StandardFormLP {
    build([1., 0., 2., 0., -2., 1., -3., 2., 1., -2.])
}
