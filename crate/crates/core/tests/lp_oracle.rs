//! Random programs checked against exhaustive vertex enumeration.

mod common;

use common::{random_bounded_lp, vertex_enumeration_max};
use persuade_core::lp::{LinearProgram, LpStatus, SolveMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn five_by_four_programs_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (c, a, b) = random_bounded_lp(&mut rng, 5, 4);
        let expected = vertex_enumeration_max(&c, &a, &b);
        let mut lp = LinearProgram::maximize(c.clone());
        for (row, &rhs) in a.iter().zip(&b) {
            lp.add_le(row.clone(), rhs);
        }
        for mode in [SolveMode::Primal, SolveMode::Dual] {
            let sol = lp.solve_with(mode).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!((sol.objective - expected).abs() <= 1e-8, "{mode:?}: {} vs {expected}", sol.objective);
            assert!((lp.dual_objective(&sol) - sol.objective).abs() <= 1e-7);
            assert!(sol.primal_residual <= 1e-8);
            assert!(sol.complementarity_residual <= 1e-7);
        }
    }
}

#[test]
fn scaling_the_objective_keeps_the_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (c, a, b) = random_bounded_lp(&mut rng, 5, 4);
        let build = |scale: f64| {
            let mut lp = LinearProgram::maximize(c.iter().map(|v| v * scale).collect());
            for (row, &rhs) in a.iter().zip(&b) {
                lp.add_le(row.clone(), rhs);
            }
            lp.solve_with(SolveMode::Primal).unwrap()
        };
        let base = build(1.0);
        for scale in [0.5, 3.0, 10.0] {
            assert_eq!(build(scale).basis, base.basis);
        }
    }
}
