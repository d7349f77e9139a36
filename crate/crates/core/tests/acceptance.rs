//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use persuade_core::builtins::{Discord, Duopoly, Morale, Polarization, Retailer};
use persuade_core::certificates::{
    alpha_to_phi, beta_max_search, check_fullinfo_partialinfo, polarization_alpha, retailer_alpha, verify_certificate,
    VerificationOptions,
};
use persuade_core::feasibility::{build_information_structure, check_family};
use persuade_core::grid::{solve_dual_grid, solve_primal_grid, GridSpec};
use persuade_core::lp::LinearProgram;
use persuade_core::one_state::{realize_family, realize_one_state, solve_one_state, OneStateInstance, OneStateOptions};
use persuade_core::reductions::{public_signal_value, supermodular_reduce, SupermodularProblem, DEFAULT_SAMPLES};
use persuade_core::transport::{assortative, is_supermodular, solve_mk, TransportInstance, SUPERMODULAR_TOL};
use persuade_core::{
    Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, InformationStructure, PersuasionProblem, Prior,
    Result, StateSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MORALE_VALUE_TOL: f64 = 1e-4;
const MORALE_SUPPORT_TOL: f64 = 1e-3;
const MORALE_SINGLE_TOL: f64 = 1e-6;
const DUOPOLY_T_TOL: f64 = 1e-3;
const DUOPOLY_SPLIT_TOL: f64 = 1e-2;
/// The figure reports this weight to two decimals.
const DUOPOLY_JOINT_TOL: f64 = 5e-3;
const GRID_VALUE_TOL: f64 = 1e-6;
const CERT_VIOLATION_TOL: f64 = 1e-9;
const BETA_MAX: f64 = 2.2575;
const BETA_TOL: f64 = 1e-3;
const BETA_PRECISION: f64 = 1e-4;
const DISCORD_TOL: f64 = 1e-6;
const REDUCE_TOL: f64 = 1e-12;
const PUBLIC_GRID_TOL: f64 = 2e-3;
const ROUNDTRIP_TOL: f64 = 1e-9;
const LP_GAP_TOL: f64 = 1e-7;
const ASSORTATIVE_TOL: f64 = 1e-8;
const MONOTONE_TOL: f64 = 1e-9;
const WEAK_DUALITY_TOL: f64 = 1e-6;
const DISAGREEMENT_TOL: f64 = 1e-9;

struct Suite {
    failures: usize,
    /// `(case, certified bound)` and `(case, computed primal value)`.
    bounds: Vec<(String, f64)>,
    primals: Vec<(String, f64)>,
}

impl Suite {
    fn report(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn run(&mut self, id: &str, f: impl FnOnce(&mut Suite) -> Result<(bool, String)>) {
        match f(self) {
            Ok((pass, detail)) => self.report(id, pass, detail),
            Err(e) => self.report(id, false, format!("error: {e}")),
        }
    }
}

fn within(budget: Duration, start: Instant) -> (bool, String) {
    let took = start.elapsed();
    (took <= budget, format!("{:.2}s (budget {}s)", took.as_secs_f64(), budget.as_secs()))
}

fn morale(s: &mut Suite) {
    let inst = OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Morale)).unwrap(), 0).unwrap();
    let start = Instant::now();
    let sol = solve_one_state(&inst, &OneStateOptions::default());
    let (fast, timing) = within(Duration::from_secs(30), start);
    s.run("1a morale value", |_| {
        let sol = sol.clone()?;
        let v = sol.value;
        Ok(((v - 1.0 / 3.0).abs() <= MORALE_VALUE_TOL && fast, format!("value {v:.10} want 1/3, {timing}")))
    });
    s.run("1a morale support", |_| {
        let sol = sol?;
        let t = 1.0 / 3.0;
        let targets = [(1.0, t), (t, 1.0)];
        let ok = sol.pi.len() == 2
            && sol.pi.atoms().iter().all(|(a, w)| {
                let (x1, x2) = (a.get(0).low(), a.get(1).low());
                (w - 0.5).abs() <= MORALE_SUPPORT_TOL
                    && targets
                        .iter()
                        .any(|&(y1, y2)| (x1 - y1).abs() <= MORALE_SUPPORT_TOL && (x2 - y2).abs() <= MORALE_SUPPORT_TOL)
            });
        let atoms: Vec<String> = sol
            .pi
            .atoms()
            .iter()
            .map(|(a, w)| format!("({:.6}, {:.6}):{w:.6}", a.get(0).low(), a.get(1).low()))
            .collect();
        Ok((ok, atoms.join(" ")))
    });
    s.run("1b morale single atom", |_| {
        let start = Instant::now();
        let sol = solve_one_state(
            &inst,
            &OneStateOptions {
                budget: Some(1),
                ..OneStateOptions::default()
            },
        )?;
        let (fast, timing) = within(Duration::from_secs(30), start);
        let want = 1.0 - 0.5f64.sqrt();
        let (a, _) = &sol.pi.atoms()[0];
        let at = (a.get(0).low(), a.get(1).low());
        let ok = (sol.value - want).abs() <= MORALE_SINGLE_TOL
            && (at.0 - want).abs() <= MORALE_SINGLE_TOL
            && (at.1 - 0.5).abs() <= MORALE_SINGLE_TOL;
        Ok((
            ok && fast,
            format!(
                "value {:.10} at ({:.6}, {:.6}), want {want:.10} at ({want:.6}, 0.5); a single atom must have both coordinates at least 1/2, {timing}",
                sol.value, at.0, at.1
            ),
        ))
    });
}

/// Dense scan then golden section of `t/(1-t)·(exp(4(1-t)) - 1)` on `(0, 1/2]`.
fn duopoly_oracle() -> f64 {
    let f = |t: f64| t / (1.0 - t) * ((4.0 * (1.0 - t)).exp() - 1.0);
    let n = 100_000;
    let best = (1..=n).map(|k| 0.5 * k as f64 / n as f64).fold(0.0, |b, t| if f(t) > f(b) { t } else { b });
    let (mut lo, mut hi) = (best - 1e-5, best + 1e-5);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

fn duopoly(s: &mut Suite) {
    let inst = OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Duopoly::default())).unwrap(), 0).unwrap();
    let start = Instant::now();
    let sol = solve_one_state(&inst, &OneStateOptions::default());
    let (fast, timing) = within(Duration::from_secs(30), start);
    let t_of = |pi: &Distribution<BeliefProfile>| pi.atoms().iter().map(|(a, _)| a.get(1).low()).fold(f64::INFINITY, f64::min);
    s.run("2 duopoly threshold", |_| {
        let sol = sol.clone()?;
        let t = t_of(&sol.pi);
        Ok(((t - 0.3608).abs() <= DUOPOLY_T_TOL && fast, format!("t* {t:.6} want 0.3608, {timing}")))
    });
    s.run("2 duopoly scalar oracle", |_| {
        let t = t_of(&sol.clone()?.pi);
        let oracle = duopoly_oracle();
        Ok(((t - oracle).abs() <= DUOPOLY_T_TOL, format!("solver {t:.6} oracle {oracle:.6}")))
    });
    s.run("2 duopoly sure atom weight", |_| {
        let family = realize_family(&sol.clone()?.pi, &inst)?;
        let sure: f64 = family.per_state()[0]
            .atoms()
            .iter()
            .filter(|(a, _)| a.get(1).low() >= 1.0 - 1e-9)
            .map(|(_, w)| w)
            .sum();
        let joint = 0.5 * sure;
        Ok(((joint - 0.22).abs() <= DUOPOLY_JOINT_TOL, format!("joint weight {joint:.6} of x2=1 in the low state, want 0.22")))
    });
    s.run("2 duopoly firm 2 split", |_| {
        let sol = sol?;
        let info = realize_one_state(&sol.pi, &inst)?;
        let mut split = info.signal_marginal(1)[0].clone();
        split.sort_by(f64::total_cmp);
        let other = info.signal_marginal(1)[1].iter().cloned().fold(0.0, f64::max);
        let ok = split.len() == 2
            && (split[0] - 0.436).abs() <= DUOPOLY_SPLIT_TOL
            && (split[1] - 0.564).abs() <= DUOPOLY_SPLIT_TOL;
        Ok((
            ok,
            format!("split {split:.4?} in the low state, largest signal weight {other:.4} in the high state"),
        ))
    });
}

fn retailer(s: &mut Suite) {
    for p in [0.3, 0.5] {
        let start = Instant::now();
        let problem = PersuasionProblem::binary(p, 2, Arc::new(Retailer)).unwrap();
        let want = 2.0 * p * (1.0 - p);
        let grid = GridSpec::binary(50).unwrap();
        s.run(&format!("3 retailer p={p} grid primal"), |s| {
            let v = solve_primal_grid(&problem, &grid)?.value;
            s.primals.push((format!("retailer p={p}"), v));
            Ok(((v - want).abs() <= GRID_VALUE_TOL, format!("{v:.12} want {want}")))
        });
        s.run(&format!("3 retailer p={p} grid dual"), |_| {
            let v = solve_dual_grid(&problem, &grid)?.value;
            Ok(((v - want).abs() <= GRID_VALUE_TOL, format!("{v:.12} want {want}")))
        });
        s.run(&format!("3 retailer p={p} certificate"), |s| {
            let cert = alpha_to_phi(&retailer_alpha(p)?);
            let ver = verify_certificate(&problem, &cert, &VerificationOptions::default())?;
            s.bounds.push((format!("retailer p={p}"), ver.bound));
            let (fast, timing) = within(Duration::from_secs(60), start);
            Ok((
                ver.feasible && ver.max_violation <= CERT_VIOLATION_TOL && fast,
                format!("max violation {:e}, bound {:.12}, {timing}", ver.max_violation, ver.bound),
            ))
        });
    }
}

fn polarization(s: &mut Suite) {
    let grid = GridSpec::binary(50).unwrap();
    for beta in [1.0, 2.0] {
        s.run(&format!("4 polarization beta={beta} grid primal"), |s| {
            let problem = PersuasionProblem::binary(0.5, 2, Arc::new(Polarization { beta })).unwrap();
            let v = solve_primal_grid(&problem, &grid)?.value;
            s.primals.push((format!("polarization beta={beta}"), v));
            let want = 2f64.powf(-beta);
            Ok(((v - want).abs() <= GRID_VALUE_TOL, format!("{v:.12} want {want}")))
        });
    }
    s.run("4 polarization beta_max", |_| {
        let start = Instant::now();
        let r = beta_max_search(BETA_PRECISION, &VerificationOptions::default())?;
        let (fast, timing) = within(Duration::from_secs(300), start);
        Ok(((r.beta - BETA_MAX).abs() <= BETA_TOL && fast, format!("beta {:.6} in [{:.6}, {:.6}], {timing}", r.beta, r.lower, r.upper)))
    });
    for (beta, expect) in [(1.0, true), (2.0, true), (3.0, false)] {
        s.run(&format!("4 polarization beta={beta} certificate"), |s| {
            let problem = PersuasionProblem::binary(0.5, 2, Arc::new(Polarization { beta })).unwrap();
            let ver = verify_certificate(&problem, &alpha_to_phi(&polarization_alpha(beta)?), &VerificationOptions::default())?;
            if ver.feasible {
                s.bounds.push((format!("polarization beta={beta}"), ver.bound));
            }
            Ok((
                ver.feasible == expect,
                format!("feasible {} want {expect}, max violation {:e}", ver.feasible, ver.max_violation),
            ))
        });
    }
}

fn discord(s: &mut Suite) {
    s.run("5 discord partial information", |s| {
        let start = Instant::now();
        let problem = PersuasionProblem::binary(0.5, 2, Arc::new(Discord)).unwrap();
        let r = check_fullinfo_partialinfo(&problem, &VerificationOptions::default())?;
        let (fast, timing) = within(Duration::from_secs(60), start);
        let want = (3.0 - 3f64.sqrt()) / 6.0;
        if r.optimal {
            s.bounds.push(("discord".into(), r.verification.bound));
        }
        let ok = r.optimal
            && (r.b - want).abs() <= DISCORD_TOL
            && (r.c - (1.0 - r.b)).abs() <= DISCORD_TOL
            && r.verification.max_violation <= CERT_VIOLATION_TOL;
        Ok((
            ok && fast,
            format!(
                "optimal {}, b {:.9} want {want:.9}, c {:.9}, max violation {:e}, {timing}",
                r.optimal, r.b, r.c, r.verification.max_violation
            ),
        ))
    });
    s.run("5 discord grid primal", |s| {
        let problem = PersuasionProblem::binary(0.5, 2, Arc::new(Discord)).unwrap();
        let v = solve_primal_grid(&problem, &GridSpec::binary(50)?)?.value;
        s.primals.push(("discord".into(), v));
        Ok((true, format!("{v:.12} recorded for the weak-duality check")))
    });
}

fn public_option(s: &mut Suite) {
    let alpha = 1.0;
    s.run("6 public option reduction", |_| {
        let sp = SupermodularProblem::public_option(alpha, 0.5)?;
        let pts: Vec<Belief> = (0..DEFAULT_SAMPLES).map(|k| Belief::binary(k as f64 / (DEFAULT_SAMPLES - 1) as f64)).collect();
        let table = supermodular_reduce(&sp, &pts)?;
        let worst = pts
            .iter()
            .zip(&table.values)
            .map(|(b, v)| {
                let x = b.low();
                (v - (2.0 * alpha * (1.0 - x) - (1.0 - 2.0 * x / 3.0) * (2.0 - 2.0 * x).sqrt())).abs()
            })
            .fold(0.0, f64::max);
        Ok((worst <= REDUCE_TOL, format!("max deviation {worst:e} over {} points", pts.len())))
    });
    for p in [0.1, 0.3, 0.5, 0.6, 0.8, 0.95] {
        s.run(&format!("6 public option splitting p={p}"), |_| {
            let sp = SupermodularProblem::public_option(alpha, p)?;
            let r = public_signal_value(&sp, DEFAULT_SAMPLES)?;
            let xs: Vec<f64> = r.splitting.atoms().iter().map(|(b, _)| b.low()).collect();
            let ok = if p <= 0.5 {
                xs.len() == 1 && (xs[0] - p).abs() <= 1e-9
            } else {
                xs.len() == 2 && (xs[0] - 0.5).abs() <= 1e-9 && (xs[1] - 1.0).abs() <= 1e-9
            };
            Ok((ok, format!("support {xs:?}")))
        });
    }
    for p in [0.3, 0.8] {
        s.run(&format!("6 public option grid agreement p={p}"), |s| {
            let sp = SupermodularProblem::public_option(alpha, p)?;
            let public = public_signal_value(&sp, DEFAULT_SAMPLES)?.value;
            let grid = solve_primal_grid(&sp.to_problem()?, &GridSpec::binary(40)?)?.value;
            s.primals.push((format!("public option p={p}"), grid));
            Ok(((public - grid).abs() <= PUBLIC_GRID_TOL, format!("public {public:.9} grid {grid:.9}")))
        });
    }
}

fn random_structure(rng: &mut ChaCha8Rng) -> (InformationStructure, Prior) {
    let k = rng.gen_range(2..=3);
    let n = rng.gen_range(2..=3);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let total: usize = sizes.iter().product();
    let kernel = (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..total).map(|_| rng.gen_range(0.0..1.0f64).powi(2)).collect();
            let sum: f64 = raw.iter().sum();
            let atoms = raw
                .iter()
                .enumerate()
                .map(|(mut flat, w)| {
                    let mut profile = vec![0; n];
                    for (slot, size) in profile.iter_mut().zip(&sizes).rev() {
                        *slot = flat % size;
                        flat /= size;
                    }
                    (profile, w / sum)
                })
                .collect();
            Distribution::new(atoms).unwrap()
        })
        .collect();
    let signals = sizes.iter().map(|&m| (0..m).map(|j| format!("s{j}")).collect()).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let prior = Prior::new(raw.iter().map(|w| w / sum).collect()).unwrap();
    (InformationStructure::new(signals, kernel).unwrap(), prior)
}

fn roundtrip(s: &mut Suite) {
    s.run("7a structure roundtrip", |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst_case = None;
        for case in 0..200 {
            let (info, prior) = random_structure(&mut rng);
            let family = persuade_core::belief::posterior_from_signals(&info, &prior)?;
            let feasible = check_family(&family, &prior, ROUNDTRIP_TOL)?.feasible;
            let rebuilt = build_information_structure(&family, &prior)?;
            let again = persuade_core::belief::posterior_from_signals(&rebuilt, &prior)?;
            if !feasible || !again.approx_eq(&family, ROUNDTRIP_TOL) {
                worst_case.get_or_insert(case);
            }
        }
        Ok(match worst_case {
            None => (true, "200 random families".into()),
            Some(c) => (false, format!("first mismatch at case {c}")),
        })
    });
}

fn lp_duality(s: &mut Suite) {
    s.run("7b lp strong duality", |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(2..=4);
            let (c, a, b) = common::random_bounded_lp(&mut rng, n, m);
            let oracle = common::vertex_enumeration_max(&c, &a, &b);
            let mut lp = LinearProgram::maximize(c);
            for (row, rhs) in a.into_iter().zip(b) {
                lp.add_le(row, rhs);
            }
            let sol = lp.solve()?;
            worst = worst
                .max((sol.objective - oracle).abs())
                .max((lp.dual_objective(&sol) - sol.objective).abs());
        }
        Ok((worst <= LP_GAP_TOL, format!("largest gap {worst:e} over 100 programs")))
    });
}

fn assortative_suite(s: &mut Suite) {
    s.run("7c assortative equals transport lp", |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut worst: f64 = 0.0;
        let mut not_flagged = 0;
        for _ in 0..100 {
            let n = rng.gen_range(2..=3);
            let marginals: Vec<Distribution<f64>> = (0..n)
                .map(|_| {
                    let atoms = rng.gen_range(1..=5);
                    let raw: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let sum: f64 = raw.iter().sum();
                    Distribution::new(raw.iter().map(|w| (rng.gen_range(0.0..1.0), w / sum)).collect()).unwrap()
                })
                .collect();
            let sep: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cross: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let convex = rng.gen_range(0.0..1.0);
            let g = Arc::new(move |z: &[f64]| {
                let mut v: f64 = z.iter().zip(&sep).map(|(x, c)| c * x.sin()).sum();
                for i in 0..z.len() {
                    for j in i + 1..z.len() {
                        v += cross[i * z.len() + j] * z[i] * z[j];
                    }
                }
                v + convex * z.iter().sum::<f64>().powi(2)
            });
            let inst = TransportInstance::new(marginals, g.clone())?;
            if !is_supermodular(&inst, SUPERMODULAR_TOL) {
                not_flagged += 1;
            }
            let lp = solve_mk(&inst)?.value;
            let plan = assortative(inst.marginals())?;
            worst = worst.max((plan.value(&*g) - lp).abs());
        }
        Ok((
            worst <= ASSORTATIVE_TOL && not_flagged == 0,
            format!("largest difference {worst:e}, {not_flagged} instances not recognized as supermodular"),
        ))
    });
}

fn monotonicity(s: &mut Suite) {
    s.run("7d grid refinement monotone", |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut worst = f64::NEG_INFINITY;
        for case in 0..20 {
            let k = if case % 4 == 3 { 3 } else { 2 };
            let coeffs: Vec<f64> = (0..k * 9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let utility = persuade_core::belief::FnUtility::new("random quadratic", move |w, flat: &[f64]| {
                let (x1, x2) = (flat[0], flat[k]);
                let c = &coeffs[w * 9..w * 9 + 9];
                (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| c[3 * a + b] * x1.powi(a as i32) * x2.powi(b as i32)).sum()
            });
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let states = StateSpace::new((0..k).map(|w| format!("w{w}")))?;
            let prior = Prior::new(raw.iter().map(|w| w / sum).collect())?;
            let problem = PersuasionProblem::new(states, prior, 2, Arc::new(utility))?;
            let m = if k == 2 { 5 } else { 3 };
            let coarse = solve_primal_grid(&problem, &GridSpec::new(k, m, usize::MAX)?)?.value;
            let fine = solve_primal_grid(&problem, &GridSpec::new(k, 2 * m, usize::MAX)?)?.value;
            worst = worst.max(coarse - fine);
        }
        Ok((worst <= MONOTONE_TOL, format!("largest primal(m) - primal(2m) = {worst:e} over 20 problems")))
    });
}

fn weak_duality(s: &mut Suite) {
    s.run("7e weak duality across cases", |s| {
        let mut worst = f64::NEG_INFINITY;
        let mut pairs = 0;
        for (case, bound) in &s.bounds {
            for (other, primal) in &s.primals {
                if case == other {
                    worst = worst.max(primal - bound);
                    pairs += 1;
                }
            }
        }
        Ok((
            pairs > 0 && worst <= WEAK_DUALITY_TOL,
            format!("largest primal - bound = {worst:e} over {pairs} pairs"),
        ))
    });
}

/// Largest unconditional weight on `(r, 1-r)` over families whose per-state
/// marginals put weight `r` on the state-matching belief.
fn disagreement_cap(r: f64) -> Result<(f64, ConditionalBeliefFamily)> {
    let xs = [r, 1.0 - r];
    let cells: Vec<(usize, usize)> = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).collect();
    // Variables: state ℓ cells then state h cells.
    let mut objective = vec![0.0; 8];
    objective[1] = 0.5;
    objective[5] = 0.5;
    let mut lp = LinearProgram::maximize(objective);
    for (state, offset) in [(0usize, 0usize), (1, 4)] {
        for receiver in 0..2 {
            for a in 0..2 {
                let mut row = vec![0.0; 8];
                for (c, &(i, j)) in cells.iter().enumerate() {
                    if [i, j][receiver] == a {
                        row[offset + c] = 1.0;
                    }
                }
                let matches = (state == 0) == (a == 0);
                lp.add_eq(row, if matches { r } else { 1.0 - r });
            }
        }
    }
    let sol = lp.solve()?;
    let per_state = (0..2)
        .map(|state| {
            Distribution::from_weights(
                cells
                    .iter()
                    .enumerate()
                    .map(|(c, &(i, j))| (BeliefProfile::binary(&[xs[i], xs[j]]), sol.x[4 * state + c]))
                    .collect(),
            )
            .canonicalize(1e-12)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sol.objective, ConditionalBeliefFamily::new(per_state)?))
}

fn disagreement(s: &mut Suite) {
    for r in [0.6, 0.75, 0.9] {
        s.run(&format!("7f disagreement cap r={r}"), |_| {
            let (cap, family) = disagreement_cap(r)?;
            let feasible = check_family(&family, &Prior::binary(0.5)?, DISAGREEMENT_TOL)?.feasible;
            Ok((
                (cap - (1.0 - r)).abs() <= DISAGREEMENT_TOL && feasible,
                format!("cap {cap:.12} want {}, optimal family feasible {feasible}", 1.0 - r),
            ))
        });
    }
}

fn main() -> ExitCode {
    let mut suite = Suite {
        failures: 0,
        bounds: Vec::new(),
        primals: Vec::new(),
    };
    morale(&mut suite);
    duopoly(&mut suite);
    retailer(&mut suite);
    polarization(&mut suite);
    discord(&mut suite);
    public_option(&mut suite);
    roundtrip(&mut suite);
    lp_duality(&mut suite);
    assortative_suite(&mut suite);
    monotonicity(&mut suite);
    weak_duality(&mut suite);
    disagreement(&mut suite);
    println!("{} criteria failed", suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
