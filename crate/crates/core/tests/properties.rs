//! Randomized invariants of the solvers.

use std::sync::Arc;

use persuade_core::belief::{condition_single_receiver, posterior_from_signals, unconditional};
use persuade_core::builtins::Morale;
use persuade_core::feasibility::{check_family, check_single_receiver};
use persuade_core::grid::GridSpec;
use persuade_core::one_state::{evaluate_candidate, realize_family, OneStateInstance};
use persuade_core::transport::{assortative, kantorovich_gap, solve_mk, TransportInstance};
use persuade_core::{Belief, BeliefProfile, Distribution, InformationStructure, PersuasionProblem, Prior};
use proptest::prelude::*;

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / s).collect()
    })
}

fn marginal() -> impl Strategy<Value = Distribution<f64>> {
    (1usize..=4).prop_flat_map(|n| {
        (prop::collection::vec(0.0f64..1.0, n), weights(n))
            .prop_map(|(xs, ws)| Distribution::new(xs.into_iter().zip(ws).collect()).unwrap())
    })
}

fn binary_lambda() -> impl Strategy<Value = (Distribution<Belief>, f64)> {
    (2usize..=4).prop_flat_map(|n| {
        (prop::collection::vec(0.0f64..1.0, n), weights(n)).prop_map(|(xs, ws)| {
            let mean: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum();
            let atoms = xs.into_iter().map(Belief::binary).zip(ws).collect();
            (Distribution::new(atoms).unwrap(), mean)
        })
    })
}

fn two_receiver_structure() -> impl Strategy<Value = (InformationStructure, f64)> {
    (weights(4), weights(4), 0.1f64..0.9).prop_map(|(low, high, p)| {
        let profiles = [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let kernel = [low, high]
            .into_iter()
            .map(|ws| Distribution::new(profiles.iter().cloned().zip(ws).collect()).unwrap())
            .collect();
        let signals = vec![vec!["a".to_string(), "b".to_string()]; 2];
        (InformationStructure::new(signals, kernel).unwrap(), p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_plans_keep_their_marginals(ms in prop::collection::vec(marginal(), 2..=3)) {
        let inst = TransportInstance::new(ms, Arc::new(|z: &[f64]| z.iter().product::<f64>() - z[0].powi(2))).unwrap();
        let lp = solve_mk(&inst).unwrap();
        prop_assert!(lp.coupling.marginal_error(inst.marginals()).unwrap() <= 1e-9);
        let plan = assortative(inst.marginals()).unwrap();
        prop_assert!(plan.marginal_error(inst.marginals()).unwrap() <= 1e-9);
        // The LP dual bounds every feasible plan, including the optimal one.
        let gap = kantorovich_gap(&inst, &plan, &lp.dual, 1e-9).unwrap();
        prop_assert!(gap >= -1e-9);
        prop_assert!(kantorovich_gap(&inst, &lp.coupling, &lp.dual, 1e-9).unwrap().abs() <= 1e-7);
    }

    #[test]
    fn conditioning_a_martingale_distribution_is_feasible((lambda, mean) in binary_lambda()) {
        prop_assume!(mean > 1e-3 && mean < 1.0 - 1e-3);
        let prior = Prior::binary(mean).unwrap();
        let per_state = condition_single_receiver(&lambda, &prior).unwrap();
        prop_assert!(check_single_receiver(&per_state, &prior, 1e-9).unwrap().feasible);
    }

    #[test]
    fn signal_posteriors_mix_back_to_the_prior((info, p) in two_receiver_structure()) {
        let prior = Prior::binary(p).unwrap();
        let family = posterior_from_signals(&info, &prior).unwrap();
        prop_assert!(check_family(&family, &prior, 1e-9).unwrap().feasible);
        let mixed = unconditional(&family, &prior).unwrap();
        for i in 0..2 {
            let mean: f64 = mixed.atoms().iter().map(|(a, w)| w * a.get(i).low()).sum();
            prop_assert!((mean - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolation_weights_form_a_partition_of_unity(m in 1usize..30, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let grid = GridSpec::new(3, m, usize::MAX).unwrap();
        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        let x = [a, b, 1.0 - a - b];
        let weights = grid.interpolation(&x);
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let mut back = [0.0; 3];
        for (j, w) in weights {
            for (s, c) in grid.coords(j).into_iter().enumerate() {
                back[s] += w * c;
            }
        }
        prop_assert!(back.iter().zip(&x).all(|(p, q)| (p - q).abs() <= 1e-12));
    }

    #[test]
    fn feasible_one_state_candidates_complete_to_feasible_families(
        t in 0.2f64..1.0,
        u in 0.2f64..1.0,
        w in 0.0f64..1.0,
    ) {
        let inst = OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Morale)).unwrap(), 0).unwrap();
        let pi = Distribution::new(vec![
            (BeliefProfile::binary(&[1.0, t]), w),
            (BeliefProfile::binary(&[u, 1.0]), 1.0 - w),
        ])
        .unwrap();
        let (value, report) = evaluate_candidate(&pi, &inst).unwrap();
        prop_assert!((0.0..=0.5).contains(&value));
        if report.feasible {
            let family = realize_family(&pi, &inst).unwrap();
            prop_assert!(check_family(&family, &inst.problem.prior, 1e-9).unwrap().feasible);
        } else {
            prop_assert!(realize_family(&pi, &inst).is_err());
        }
    }
}
