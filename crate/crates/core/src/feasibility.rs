//! Feasibility of conditional belief families, one-state marginal checks, and
//! the revelation-principle construction of information structures.

use crate::belief::{
    condition_single_receiver, mix, Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, InformationStructure, Prior,
    MERGE_TOL,
};
use crate::error::{Error, Result};
use crate::lp::LinearProgram;

/// Tolerance used when a family is turned into an information structure.
pub const BUILD_TOL: f64 = 1e-7;
/// Slack coefficients below this are dropped by the completion construction.
const SLACK_DROP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub receiver: usize,
    pub state: usize,
    pub description: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_violation: f64,
    pub tol: f64,
    pub violated_constraints: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(all: Vec<Violation>, tol: f64) -> Self {
        let max_violation = all.iter().map(|v| v.amount).fold(0.0, f64::max);
        let violated_constraints: Vec<Violation> = all.into_iter().filter(|v| v.amount > tol).collect();
        FeasibilityReport {
            feasible: max_violation <= tol,
            max_violation,
            tol,
            violated_constraints,
        }
    }

    fn merge(reports: impl IntoIterator<Item = FeasibilityReport>, tol: f64) -> Self {
        let mut max_violation: f64 = 0.0;
        let mut violated_constraints = Vec::new();
        for r in reports {
            max_violation = max_violation.max(r.max_violation);
            violated_constraints.extend(r.violated_constraints);
        }
        FeasibilityReport {
            feasible: max_violation <= tol,
            max_violation,
            tol,
            violated_constraints,
        }
    }
}

/// Per-state projection of the family to receiver `receiver`.
pub fn marginal(family: &ConditionalBeliefFamily, receiver: usize) -> Result<Vec<Distribution<Belief>>> {
    if receiver >= family.receivers() {
        return Err(Error::IndexOutOfRange {
            index: receiver,
            len: family.receivers(),
        });
    }
    family
        .per_state()
        .iter()
        .map(|d| d.map(|p| p.get(receiver).clone()).canonicalize(MERGE_TOL))
        .collect()
}

/// Observation 1: `λ^ω(x) = x(ω)/p(ω) · λ(x)` on the union support.
pub fn check_single_receiver(per_state: &[Distribution<Belief>], prior: &Prior, tol: f64) -> Result<FeasibilityReport> {
    check_receiver(per_state, prior, tol, 0)
}

fn check_receiver(per_state: &[Distribution<Belief>], prior: &Prior, tol: f64, receiver: usize) -> Result<FeasibilityReport> {
    if per_state.len() != prior.len() {
        return Err(Error::Validation(format!(
            "{} conditional distributions for {} states",
            per_state.len(),
            prior.len()
        )));
    }
    let conditionals = per_state
        .iter()
        .map(|d| {
            if d.atoms().iter().any(|(b, _)| b.num_states() != prior.len()) {
                return Err(Error::Validation("belief dimension differs from prior".into()));
            }
            d.canonicalize(MERGE_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda = mix(&conditionals, prior)?;
    let p = prior.weights();
    let mut all = Vec::new();
    for (x, l) in lambda.atoms() {
        for (w, cond) in conditionals.iter().enumerate() {
            let actual = cond.weight_near(x, MERGE_TOL);
            let predicted = x.get(w) / p[w] * l;
            all.push(Violation {
                receiver,
                state: w,
                description: format!("atom {:?}: weight {actual:e}, Bayes-consistent {predicted:e}", x.weights()),
                amount: (actual - predicted).abs(),
            });
        }
    }
    Ok(FeasibilityReport::from_violations(all, tol))
}

/// A family is feasible iff every one-receiver marginal is.
pub fn check_family(family: &ConditionalBeliefFamily, prior: &Prior, tol: f64) -> Result<FeasibilityReport> {
    if family.num_states() != prior.len() {
        return Err(Error::Validation("family and prior disagree on the state count".into()));
    }
    let reports = (0..family.receivers())
        .map(|i| check_receiver(&marginal(family, i)?, prior, tol, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeasibilityReport::merge(reports, tol))
}

/// `∫ x(ω)/x(ω0) dλ0` for each `ω ≠ ω0`, paired with its bound `p(ω)/p(ω0)`.
/// Atoms with `x(ω0) = 0 < x(ω)` make the integral infinite.
pub fn one_state_integrals(lambda0: &Distribution<Belief>, prior: &Prior, omega0: usize) -> Vec<(usize, f64, f64)> {
    let p = prior.weights();
    (0..p.len())
        .filter(|&w| w != omega0)
        .map(|w| {
            let integral = lambda0
                .atoms()
                .iter()
                .filter(|(_, l)| *l > 0.0)
                .map(|(x, l)| {
                    let (num, den) = (x.get(w), x.get(omega0));
                    if den > 0.0 {
                        l * num / den
                    } else if num > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .sum();
            (w, integral, p[w] / p[omega0])
        })
        .collect()
}

/// Likelihood-ratio check for a single receiver's marginal at `omega0`.
pub fn check_one_state_marginal(
    lambda0: &Distribution<Belief>,
    prior: &Prior,
    omega0: usize,
    tol: f64,
) -> Result<FeasibilityReport> {
    check_one_state_receiver(lambda0, prior, omega0, tol, 0)
}

pub(crate) fn check_one_state_receiver(
    lambda0: &Distribution<Belief>,
    prior: &Prior,
    omega0: usize,
    tol: f64,
    receiver: usize,
) -> Result<FeasibilityReport> {
    if omega0 >= prior.len() {
        return Err(Error::IndexOutOfRange {
            index: omega0,
            len: prior.len(),
        });
    }
    let all = one_state_integrals(lambda0, prior, omega0)
        .into_iter()
        .map(|(w, integral, bound)| Violation {
            receiver,
            state: w,
            description: format!("likelihood-ratio integral {integral:e} against bound {bound:e}"),
            amount: (integral - bound).max(0.0),
        })
        .collect();
    Ok(FeasibilityReport::from_violations(all, tol))
}

/// Completion of a one-state marginal: rescale to `λ̃`, top up
/// the missing mass with vertex atoms, then condition on every state.
pub fn complete_one_state_marginal(
    lambda0: &Distribution<Belief>,
    prior: &Prior,
    omega0: usize,
) -> Result<Vec<Distribution<Belief>>> {
    let report = check_one_state_marginal(lambda0, prior, omega0, 1e-9)?;
    if !report.feasible {
        return Err(Error::Precondition(format!(
            "marginal violates the one-state constraint by {:e}",
            report.max_violation
        )));
    }
    let p = prior.weights();
    let k = p.len();
    let mut atoms: Vec<(Belief, f64)> = lambda0
        .atoms()
        .iter()
        .filter(|(x, l)| *l > 0.0 && x.get(omega0) > 0.0)
        .map(|(x, l)| (x.clone(), p[omega0] / x.get(omega0) * l))
        .collect();
    for w in (0..k).filter(|&w| w != omega0) {
        let covered: f64 = atoms.iter().map(|(x, l)| x.get(w) * l).sum();
        let slack = p[w] - covered;
        if slack > SLACK_DROP {
            atoms.push((Belief::vertex(k, w), slack));
        }
    }
    let lambda = Distribution::from_weights(atoms).canonicalize(MERGE_TOL)?;
    condition_single_receiver(&lambda, prior)
}

/// Revelation-principle structure: each receiver's signals are the beliefs
/// in the support of her unconditional marginal, and `π(·|ω) = μ^ω`.
pub fn build_information_structure(family: &ConditionalBeliefFamily, prior: &Prior) -> Result<InformationStructure> {
    build_information_structure_with_tol(family, prior, BUILD_TOL)
}

pub fn build_information_structure_with_tol(
    family: &ConditionalBeliefFamily,
    prior: &Prior,
    tol: f64,
) -> Result<InformationStructure> {
    let report = check_family(family, prior, tol)?;
    if !report.feasible {
        return Err(Error::Infeasible(format!(
            "family violates Bayes consistency by {:e}",
            report.max_violation
        )));
    }
    let n = family.receivers();
    let supports = (0..n)
        .map(|i| Ok(mix(&marginal(family, i)?, prior)?.into_atoms().into_iter().map(|(b, _)| b).collect()))
        .collect::<Result<Vec<Vec<Belief>>>>()?;
    let signal_sets = supports
        .iter()
        .map(|s| (0..s.len()).map(|j| format!("s{j}")).collect())
        .collect();
    let kernel = family
        .per_state()
        .iter()
        .map(|d| {
            let atoms = d
                .atoms()
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(profile, w)| {
                    let signals = profile
                        .beliefs()
                        .iter()
                        .zip(&supports)
                        .map(|(b, support)| nearest(support, b))
                        .collect();
                    (signals, *w)
                })
                .collect();
            Distribution::from_weights(atoms).canonicalize(0.5)
        })
        .collect::<Result<Vec<_>>>()?;
    InformationStructure::new(signal_sets, kernel)
}

fn nearest(support: &[Belief], b: &Belief) -> usize {
    support
        .iter()
        .enumerate()
        .min_by(|a, c| a.1.distance(b).total_cmp(&c.1.distance(b)))
        .map(|(j, _)| j)
        .unwrap_or(0)
}

/// Largest unconditional weight on the disagreement profile `(r, 1-r)` over
/// two-receiver binary families at prior 1/2 whose per-state marginals put
/// weight `r` on the belief `r` in state ℓ and on `1-r` in state h, together
/// with a family attaining it.
pub fn disagreement_cap(r: f64) -> Result<(f64, ConditionalBeliefFamily)> {
    if !(r > 0.5 && r < 1.0) {
        return Err(Error::Validation(format!("signal accuracy {r} outside (1/2, 1)")));
    }
    let xs = [r, 1.0 - r];
    let cells = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let mut objective = vec![0.0; 8];
    objective[1] = 0.5;
    objective[5] = 0.5;
    let mut lp = LinearProgram::maximize(objective);
    for state in 0..2 {
        for receiver in 0..2 {
            // One marginal row per receiver suffices; the other is implied.
            let mut row = vec![0.0; 8];
            for (c, &(i, j)) in cells.iter().enumerate() {
                if [i, j][receiver] == 0 {
                    row[4 * state + c] = 1.0;
                }
            }
            lp.add_eq(row, if state == 0 { r } else { 1.0 - r });
        }
        let mut total = vec![0.0; 8];
        total[4 * state..4 * state + 4].iter_mut().for_each(|t| *t = 1.0);
        lp.add_eq(total, 1.0);
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("disagreement LP ended with status {:?}", sol.status)));
    }
    let per_state = (0..2)
        .map(|state| {
            Distribution::from_weights(
                cells
                    .iter()
                    .enumerate()
                    .map(|(c, &(i, j))| (BeliefProfile::binary(&[xs[i], xs[j]]), sol.x[4 * state + c].max(0.0)))
                    .collect(),
            )
            .canonicalize(MERGE_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sol.objective, ConditionalBeliefFamily::new(per_state)?))
}
