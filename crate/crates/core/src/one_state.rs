//! One-state persuasion: the sender's utility is nonzero in a single state
//! `ω0`, and the problem reduces to a finite-support optimization over
//! distributions of belief profiles whose marginals satisfy the one-state
//! likelihood-ratio constraints.

use rayon::prelude::*;

use crate::belief::{
    Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, InformationStructure, PersuasionProblem, MERGE_TOL,
};
use crate::error::{Error, Result};
use crate::feasibility::{
    build_information_structure, check_one_state_receiver, complete_one_state_marginal, one_state_integrals,
    FeasibilityReport,
};
use crate::grid::{lattice_size, GridSpec};
use crate::lp::LinearProgram;

/// Slack below which a likelihood-ratio constraint is flagged as binding.
pub const BINDING_TOL: f64 = 1e-7;
const FEAS_TOL: f64 = 1e-9;
const SEED_PROFILE_BUDGET: usize = 20_000;
const MAX_SUBSETS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct OneStateInstance {
    pub problem: PersuasionProblem,
    pub omega0: usize,
}

impl OneStateInstance {
    /// Checks on a coarse lattice that the utility vanishes off `omega0`.
    pub fn new(problem: PersuasionProblem, omega0: usize) -> Result<Self> {
        let k = problem.num_states();
        if omega0 >= k {
            return Err(Error::IndexOutOfRange { index: omega0, len: k });
        }
        let grid = GridSpec::new(k, 3, usize::MAX)?;
        let pts = grid.points();
        let n = problem.receivers;
        let total = pts.len().pow(n as u32).min(10_000);
        for idx in 0..total {
            let profile = profile_at(&pts, n, idx);
            for w in (0..k).filter(|&w| w != omega0) {
                let v = problem.evaluate(w, &profile);
                if v != 0.0 {
                    return Err(Error::Precondition(format!("utility is {v} in state {w}; expected 0 off ω0")));
                }
            }
        }
        Ok(OneStateInstance { problem, omega0 })
    }

    pub fn value_at(&self, profile: &BeliefProfile) -> f64 {
        self.problem.evaluate(self.omega0, profile)
    }

    fn p0(&self) -> f64 {
        self.problem.prior.weights()[self.omega0]
    }

    /// `|N|(|Ω| - 1) + 1`.
    pub fn support_bound(&self) -> usize {
        self.problem.receivers * (self.problem.num_states() - 1) + 1
    }
}

fn profile_at(pts: &[Belief], n: usize, mut idx: usize) -> BeliefProfile {
    let mut slots = vec![0; n];
    for s in slots.iter_mut().rev() {
        *s = idx % pts.len();
        idx /= pts.len();
    }
    BeliefProfile::new(slots.into_iter().map(|j| pts[j].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneStateOptions {
    /// Maximal support size; `None` means the support bound `|N|(|Ω|-1)+1`.
    pub budget: Option<usize>,
    /// Lattice resolution of the seed; chosen automatically when `None`.
    pub seed_resolution: Option<usize>,
    /// Stop refining when a pass improves the value by less than this.
    pub refine_tol: f64,
    /// Smallest perturbation step tried during refinement.
    pub min_step: f64,
}

impl Default for OneStateOptions {
    fn default() -> Self {
        OneStateOptions {
            budget: None,
            seed_resolution: None,
            refine_tol: 1e-8,
            min_step: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OneStateSolution {
    pub value: f64,
    pub pi: Distribution<BeliefProfile>,
    /// `binding[i][ω]`: receiver `i`'s constraint for state `ω` holds with equality.
    pub binding: Vec<Vec<bool>>,
    pub report: FeasibilityReport,
    pub lp_solves: usize,
}

/// The weight LP over a fixed candidate set.
struct WeightLp<'a> {
    inst: &'a OneStateInstance,
}

struct Weighted {
    objective: f64,
    atoms: Vec<(BeliefProfile, f64)>,
}

impl WeightLp<'_> {
    /// Ratio coefficients `x_i(ω)/x_i(ω0)`; `None` if some `x_i(ω0) = 0`.
    fn ratios(&self, profile: &BeliefProfile) -> Option<Vec<f64>> {
        let w0 = self.inst.omega0;
        let k = self.inst.problem.num_states();
        let mut out = Vec::with_capacity(profile.receivers() * (k - 1));
        for b in profile.beliefs() {
            let d = b.get(w0);
            if d <= 0.0 {
                return None;
            }
            out.extend((0..k).filter(|&w| w != w0).map(|w| b.get(w) / d));
        }
        Some(out)
    }

    fn bounds(&self) -> Vec<f64> {
        let p = self.inst.problem.prior.weights();
        let w0 = self.inst.omega0;
        let per: Vec<f64> = (0..p.len()).filter(|&w| w != w0).map(|w| p[w] / p[w0]).collect();
        per.repeat(self.inst.problem.receivers)
    }

    fn solve(&self, cands: &[BeliefProfile]) -> Result<Option<Weighted>> {
        let usable: Vec<(&BeliefProfile, Vec<f64>)> =
            cands.iter().filter_map(|c| self.ratios(c).map(|r| (c, r))).collect();
        if usable.is_empty() {
            return Ok(None);
        }
        let values: Vec<f64> = usable.iter().map(|(c, _)| self.inst.value_at(c)).collect();
        let mut lp = LinearProgram::maximize(values);
        lp.add_eq(vec![1.0; usable.len()], 1.0);
        for (row, bound) in self.bounds().into_iter().enumerate() {
            lp.add_le(usable.iter().map(|(_, r)| r[row]).collect(), bound);
        }
        let sol = lp.solve()?;
        if !sol.is_optimal() {
            return Ok(None);
        }
        let atoms = usable
            .iter()
            .zip(&sol.x)
            .filter(|(_, w)| **w > 1e-12)
            .map(|((c, _), w)| ((*c).clone(), *w))
            .collect();
        Ok(Some(Weighted {
            objective: sol.objective,
            atoms,
        }))
    }
}

fn seed_candidates(inst: &OneStateInstance, opts: &OneStateOptions) -> Result<Vec<BeliefProfile>> {
    let k = inst.problem.num_states();
    let n = inst.problem.receivers;
    let m = match opts.seed_resolution {
        Some(m) => m,
        None => {
            let mut m = 2;
            while (lattice_size(k, m + 1) as f64).powi(n as i32) <= SEED_PROFILE_BUDGET as f64 && m < 200 {
                m += 1;
            }
            m
        }
    };
    let grid = GridSpec::new(k, m, usize::MAX)?;
    let pts: Vec<Belief> = grid.points().into_iter().filter(|b| b.get(inst.omega0) > 0.0).collect();
    let total = pts
        .len()
        .checked_pow(n as u32)
        .filter(|t| *t <= 10 * SEED_PROFILE_BUDGET)
        .ok_or(Error::SizeCap {
            what: "one-state seed profiles",
            needed: usize::MAX,
            cap: 10 * SEED_PROFILE_BUDGET,
        })?;
    Ok((0..total).map(|idx| profile_at(&pts, n, idx)).collect())
}

/// Single-receiver moves `δ(e_a - e_c)` and, for two receivers, joint moves.
fn perturbations(profile: &BeliefProfile, step: f64) -> Vec<BeliefProfile> {
    let n = profile.receivers();
    let moves = |b: &Belief| -> Vec<Belief> {
        let k = b.num_states();
        let mut out = Vec::new();
        for a in 0..k {
            for c in 0..k {
                if a == c {
                    continue;
                }
                let mut w = b.weights().to_vec();
                let d = step.min(w[c]);
                if d <= 0.0 {
                    continue;
                }
                w[a] += d;
                w[c] -= d;
                if let Ok(nb) = Belief::normalized(w) {
                    out.push(nb);
                }
            }
        }
        out
    };
    let per: Vec<Vec<Belief>> = profile.beliefs().iter().map(moves).collect();
    let mut out = Vec::new();
    for i in 0..n {
        for nb in &per[i] {
            let mut beliefs = profile.beliefs().to_vec();
            beliefs[i] = nb.clone();
            out.push(BeliefProfile::new(beliefs));
        }
    }
    if n == 2 {
        for a in &per[0] {
            for b in &per[1] {
                out.push(BeliefProfile::new(vec![a.clone(), b.clone()]));
            }
        }
    }
    out
}

/// Best distribution found by seeding and local refinement.
pub fn solve_one_state(inst: &OneStateInstance, opts: &OneStateOptions) -> Result<OneStateSolution> {
    let bound = inst.support_bound();
    let budget = opts.budget.unwrap_or(bound);
    if budget == 0 {
        return Err(Error::Validation("support budget must be positive".into()));
    }
    let lp = WeightLp { inst };
    let seeds = seed_candidates(inst, opts)?;
    let m_seed = opts.seed_resolution.unwrap_or(0);
    let start_step = if m_seed > 0 { 1.0 / m_seed as f64 } else { 0.05 };
    let mut solves = 0;

    let mut best = if budget >= bound {
        solves += 1;
        lp.solve(&seeds)?
            .ok_or_else(|| Error::Internal("seed weight LP infeasible".into()))?
    } else {
        best_subset(inst, &lp, &seeds, budget, &mut solves)?
    };

    let mut step = start_step;
    while step >= opts.min_step {
        let improved = if budget >= bound {
            let mut cands: Vec<BeliefProfile> = best.atoms.iter().map(|(a, _)| a.clone()).collect();
            for (a, _) in &best.atoms {
                cands.extend(perturbations(a, step));
            }
            solves += 1;
            match lp.solve(&cands)? {
                Some(next) if next.objective > best.objective + opts.refine_tol * 1e-5 => {
                    best = next;
                    true
                }
                _ => false,
            }
        } else {
            replace_step(&lp, &mut best, step, opts.refine_tol * 1e-5, &mut solves)?
        };
        if !improved {
            step *= 0.25;
        }
    }
    finish(inst, best, solves)
}

/// Try replacing each atom by each of its perturbations, keeping the support size.
fn replace_step(lp: &WeightLp, best: &mut Weighted, step: f64, gain: f64, solves: &mut usize) -> Result<bool> {
    let current: Vec<BeliefProfile> = best.atoms.iter().map(|(a, _)| a.clone()).collect();
    let mut trials = Vec::new();
    for (j, atom) in current.iter().enumerate() {
        for alt in perturbations(atom, step) {
            let mut set = current.clone();
            set[j] = alt;
            trials.push(set);
        }
    }
    *solves += trials.len();
    let results: Vec<Option<Weighted>> = trials
        .par_iter()
        .map(|set| lp.solve(set))
        .collect::<Result<Vec<_>>>()?;
    let top = results
        .into_iter()
        .flatten()
        .fold(None::<Weighted>, |acc, r| match acc {
            Some(a) if a.objective >= r.objective => Some(a),
            _ => Some(r),
        });
    match top {
        Some(t) if t.objective > best.objective + gain => {
            *best = t;
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// Exhaustive search over small subsets of a candidate pool.
fn best_subset(
    inst: &OneStateInstance,
    lp: &WeightLp,
    seeds: &[BeliefProfile],
    budget: usize,
    solves: &mut usize,
) -> Result<Weighted> {
    let bounds = lp.bounds();
    let alone: Vec<(usize, f64)> = seeds
        .iter()
        .enumerate()
        .filter_map(|(j, c)| {
            let r = lp.ratios(c)?;
            r.iter().zip(&bounds).all(|(a, b)| *a <= b + FEAS_TOL).then(|| (j, inst.value_at(c)))
        })
        .collect();
    if budget == 1 {
        let (j, v) = alone
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |acc, (j, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((j, v)),
            })
            .ok_or_else(|| Error::Internal("no feasible single atom on the seed lattice".into()))?;
        return Ok(Weighted {
            objective: v,
            atoms: vec![(seeds[j].clone(), 1.0)],
        });
    }
    // Pool: support of the unrestricted seed optimum, then the best
    // self-feasible atoms, then the highest-utility atoms.
    let mut pool: Vec<usize> = Vec::new();
    if let Some(full) = lp.solve(seeds)? {
        for (a, _) in &full.atoms {
            if let Some(j) = seeds.iter().position(|s| s == a) {
                pool.push(j);
            }
        }
    }
    let mut by_alone = alone.clone();
    by_alone.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut by_value: Vec<(usize, f64)> = seeds.iter().enumerate().map(|(j, c)| (j, inst.value_at(c))).collect();
    by_value.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut pool_size = 60;
    while pool_size > budget && binomial(pool_size, budget) > MAX_SUBSETS {
        pool_size -= 1;
    }
    for (j, _) in by_alone.iter().chain(by_value.iter()) {
        if pool.len() >= pool_size {
            break;
        }
        if !pool.contains(j) {
            pool.push(*j);
        }
    }
    let subsets = combinations(pool.len(), budget);
    *solves += subsets.len();
    let results: Vec<Option<Weighted>> = subsets
        .par_iter()
        .map(|idx| {
            let set: Vec<BeliefProfile> = idx.iter().map(|&i| seeds[pool[i]].clone()).collect();
            lp.solve(&set)
        })
        .collect::<Result<Vec<_>>>()?;
    results
        .into_iter()
        .flatten()
        .fold(None::<Weighted>, |acc, r| match acc {
            Some(a) if a.objective >= r.objective => Some(a),
            _ => Some(r),
        })
        .ok_or_else(|| Error::Internal("no feasible subset".into()))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k.min(n), &mut cur, &mut out);
    out
}

/// Merge atoms closer than this after refinement.
const CLUSTER_TOL: f64 = 1e-4;

/// Replace each cluster of nearby atoms by one atom whose likelihood ratios
/// `x_i(ω)/x_i(ω0)` are the weighted mean of the cluster's. The constraints
/// are linear in those ratios, so the merged weights stay feasible.
fn merge_clusters(inst: &OneStateInstance, atoms: Vec<(BeliefProfile, f64)>) -> Vec<(BeliefProfile, f64)> {
    let w0 = inst.omega0;
    let mut clusters: Vec<Vec<(BeliefProfile, f64)>> = Vec::new();
    for (a, w) in atoms {
        let near = clusters.iter_mut().find(|c| {
            let head = c[0].0.flat();
            head.iter().zip(a.flat()).all(|(x, y)| (x - y).abs() <= CLUSTER_TOL)
        });
        match near {
            Some(c) => c.push((a, w)),
            None => clusters.push(vec![(a, w)]),
        }
    }
    clusters
        .into_iter()
        .map(|c| {
            if c.len() == 1 {
                return c.into_iter().next().expect("nonempty cluster");
            }
            let total: f64 = c.iter().map(|(_, w)| w).sum();
            let beliefs = (0..c[0].0.receivers())
                .map(|i| {
                    let k = c[0].0.get(i).num_states();
                    let ratios: Vec<f64> = (0..k)
                        .map(|s| c.iter().map(|(a, w)| w * a.get(i).get(s) / a.get(i).get(w0)).sum::<f64>() / total)
                        .collect();
                    Belief::normalized(ratios).expect("ratios are positive at ω0")
                })
                .collect();
            (BeliefProfile::new(beliefs), total)
        })
        .collect()
}

fn finish(inst: &OneStateInstance, best: Weighted, lp_solves: usize) -> Result<OneStateSolution> {
    let merged = merge_clusters(inst, best.atoms);
    let support: Vec<BeliefProfile> = merged.iter().map(|(a, _)| a.clone()).collect();
    let atoms = match (WeightLp { inst }).solve(&support)? {
        Some(w) => w.atoms,
        None => merged,
    };
    let pi = Distribution::from_weights(atoms).canonicalize(MERGE_TOL)?;
    let (value, report) = evaluate_candidate(&pi, inst)?;
    let binding = binding_flags(&pi, inst)?;
    Ok(OneStateSolution {
        value,
        pi,
        binding,
        report,
        lp_solves,
    })
}

fn receiver_marginal(pi: &Distribution<BeliefProfile>, i: usize) -> Result<Distribution<Belief>> {
    pi.map(|p| p.get(i).clone()).canonicalize(MERGE_TOL)
}

pub fn binding_flags(pi: &Distribution<BeliefProfile>, inst: &OneStateInstance) -> Result<Vec<Vec<bool>>> {
    let k = inst.problem.num_states();
    (0..inst.problem.receivers)
        .map(|i| {
            let m = receiver_marginal(pi, i)?;
            let mut flags = vec![false; k];
            for (w, integral, bound) in one_state_integrals(&m, &inst.problem.prior, inst.omega0) {
                flags[w] = (integral - bound).abs() <= BINDING_TOL;
            }
            Ok(flags)
        })
        .collect()
}

/// `p(ω0) ∫ v dπ` and the one-state feasibility of every receiver marginal.
pub fn evaluate_candidate(pi: &Distribution<BeliefProfile>, inst: &OneStateInstance) -> Result<(f64, FeasibilityReport)> {
    let value = inst.p0() * pi.atoms().iter().map(|(a, w)| w * inst.value_at(a)).sum::<f64>();
    let mut reports = Vec::new();
    for i in 0..inst.problem.receivers {
        let m = receiver_marginal(pi, i)?;
        reports.push(check_one_state_receiver(&m, &inst.problem.prior, inst.omega0, FEAS_TOL, i)?);
    }
    let max_violation = reports.iter().map(|r| r.max_violation).fold(0.0, f64::max);
    Ok((
        value,
        FeasibilityReport {
            feasible: max_violation <= FEAS_TOL,
            max_violation,
            tol: FEAS_TOL,
            violated_constraints: reports.into_iter().flat_map(|r| r.violated_constraints).collect(),
        },
    ))
}

/// Complete each receiver's marginal to all states, couple the completions
/// independently off `ω0`, and realize the resulting family.
pub fn realize_one_state(pi: &Distribution<BeliefProfile>, inst: &OneStateInstance) -> Result<InformationStructure> {
    realize_family(pi, inst).and_then(|fam| build_information_structure(&fam, &inst.problem.prior))
}

/// The feasible family used by [`realize_one_state`].
pub fn realize_family(pi: &Distribution<BeliefProfile>, inst: &OneStateInstance) -> Result<ConditionalBeliefFamily> {
    let (_, report) = evaluate_candidate(pi, inst)?;
    if !report.feasible {
        return Err(Error::Infeasible(format!(
            "π violates the one-state constraints by {:e}",
            report.max_violation
        )));
    }
    let n = inst.problem.receivers;
    let k = inst.problem.num_states();
    let completed = (0..n)
        .map(|i| complete_one_state_marginal(&receiver_marginal(pi, i)?, &inst.problem.prior, inst.omega0))
        .collect::<Result<Vec<_>>>()?;
    let per_state = (0..k)
        .map(|w| {
            if w == inst.omega0 {
                return pi.canonicalize(MERGE_TOL);
            }
            let mut atoms: Vec<(Vec<Belief>, f64)> = vec![(Vec::new(), 1.0)];
            for c in &completed {
                atoms = atoms
                    .into_iter()
                    .flat_map(|(bs, wt)| {
                        c[w].atoms().iter().map(move |(b, v)| {
                            let mut next = bs.clone();
                            next.push(b.clone());
                            (next, wt * v)
                        })
                    })
                    .collect();
            }
            Distribution::from_weights(atoms.into_iter().map(|(bs, wt)| (BeliefProfile::new(bs), wt)).collect())
                .canonicalize(MERGE_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    ConditionalBeliefFamily::new(per_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{Duopoly, Morale, Polarization};
    use std::sync::Arc;

    fn morale() -> OneStateInstance {
        OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Morale)).unwrap(), 0).unwrap()
    }

    fn dist(atoms: &[(f64, f64, f64)]) -> Distribution<BeliefProfile> {
        Distribution::new(atoms.iter().map(|&(a, b, w)| (BeliefProfile::binary(&[a, b]), w)).collect()).unwrap()
    }

    #[test]
    fn rejects_utilities_living_in_two_states() {
        let p = PersuasionProblem::binary(0.5, 2, Arc::new(Polarization { beta: 1.0 })).unwrap();
        assert!(OneStateInstance::new(p, 0).is_err());
    }

    #[test]
    fn candidate_evaluation() {
        let inst = morale();
        let (v, r) = evaluate_candidate(&dist(&[(0.5, 0.5, 1.0)]), &inst).unwrap();
        assert!(r.feasible);
        assert!((v - 0.25).abs() < 1e-15);

        let t = 1.0 / 3.0;
        let opt = dist(&[(1.0, t, 0.5), (t, 1.0, 0.5)]);
        let (v, r) = evaluate_candidate(&opt, &inst).unwrap();
        assert!(r.feasible);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(binding_flags(&opt, &inst).unwrap(), vec![vec![false, true], vec![false, true]]);

        let (v, r) = evaluate_candidate(&dist(&[(1.0, 1.0, 1.0)]), &inst).unwrap();
        assert!(r.feasible && v == 0.0);
    }

    #[test]
    fn morale_optimum() {
        let inst = morale();
        let s = solve_one_state(&inst, &OneStateOptions::default()).unwrap();
        assert!((s.value - 1.0 / 3.0).abs() < 1e-6, "{}", s.value);
        assert!(s.pi.len() <= inst.support_bound());
        assert!(s.report.feasible);
    }

    #[test]
    fn morale_single_atom_respects_the_one_state_constraint() {
        let s = solve_one_state(
            &morale(),
            &OneStateOptions {
                budget: Some(1),
                ..OneStateOptions::default()
            },
        )
        .unwrap();
        // One atom needs x_i >= 1/2 for both receivers, so v <= 1/2.
        assert!((s.value - 0.25).abs() < 1e-9, "{}", s.value);
        assert_eq!(s.pi.len(), 1);
    }

    #[test]
    fn duopoly_optimum() {
        let inst = OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Duopoly::default())).unwrap(), 0).unwrap();
        let s = solve_one_state(&inst, &OneStateOptions::default()).unwrap();
        let t = s
            .pi
            .atoms()
            .iter()
            .map(|(a, _)| a.get(1).low())
            .fold(f64::INFINITY, f64::min);
        assert!((t - 0.3608).abs() < 1e-3, "{t} {:?}", s.pi);
    }

    #[test]
    fn realized_structures() {
        let inst = morale();
        let t = 1.0 / 3.0;
        let info = realize_one_state(&dist(&[(1.0, t, 0.5), (t, 1.0, 0.5)]), &inst).unwrap();
        assert!(info.signal_sets().iter().all(|s| s.len() == 2));
        let info = realize_one_state(&dist(&[(0.5, 0.5, 1.0)]), &inst).unwrap();
        assert!(info.signal_sets().iter().all(|s| s.len() == 1));
        assert!(realize_one_state(&dist(&[(0.2, 0.5, 1.0)]), &inst).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(binomial(60, 3), 34_220);
    }
}
