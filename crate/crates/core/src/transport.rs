//! Multi-marginal Monge-Kantorovich problems over finitely supported real
//! marginals, and the assortative (quantile) coupling.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::belief::{Distribution, MERGE_TOL};
use crate::error::{Error, Result};
use crate::lp::LinearProgram;

pub const DEFAULT_CAP: usize = 200_000;
/// Mixed second differences above `-SUPERMODULAR_TOL` count as nonnegative.
pub const SUPERMODULAR_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-9;

pub type TupleFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct TransportInstance {
    marginals: Vec<Distribution<f64>>,
    utility: TupleFn,
}

impl fmt::Debug for TransportInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportInstance").field("marginals", &self.marginals).finish_non_exhaustive()
    }
}

impl TransportInstance {
    /// Marginals are canonicalized, so atoms come out sorted and distinct.
    pub fn new(marginals: Vec<Distribution<f64>>, utility: TupleFn) -> Result<Self> {
        if marginals.len() < 2 {
            return Err(Error::Validation("transport needs at least two marginals".into()));
        }
        let marginals = marginals
            .into_iter()
            .map(|m| {
                let total = m.total_weight();
                if (total - 1.0).abs() > MARGINAL_TOL {
                    return Err(Error::Validation(format!("marginal has mass {total}")));
                }
                m.canonicalize(MERGE_TOL)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransportInstance { marginals, utility })
    }

    pub fn marginals(&self) -> &[Distribution<f64>] {
        &self.marginals
    }

    pub fn evaluate(&self, tuple: &[f64]) -> f64 {
        (self.utility)(tuple)
    }

    pub fn product_size(&self) -> Option<usize> {
        self.marginals.iter().try_fold(1usize, |acc, m| acc.checked_mul(m.len()))
    }

    fn dims(&self) -> Vec<usize> {
        self.marginals.iter().map(Distribution::len).collect()
    }

    fn tuple(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.marginals).map(|(&a, m)| m.atoms()[a].0).collect()
    }

    /// Utility at every product index, receiver 0 most significant.
    fn tabulate(&self) -> Vec<f64> {
        let dims = self.dims();
        let total = dims.iter().product();
        (0..total)
            .into_par_iter()
            .map(|flat| self.evaluate(&self.tuple(&unflatten(flat, &dims))))
            .collect()
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, d) in idx.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    idx
}

fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (i, d)| acc * d + i)
}

/// A joint distribution over atom tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub plan: Distribution<Vec<f64>>,
}

impl Coupling {
    pub fn projection(&self, i: usize) -> Result<Distribution<f64>> {
        self.plan.map(|t| t[i]).canonicalize(MERGE_TOL)
    }

    /// Largest weight discrepancy between a projection and its marginal.
    pub fn marginal_error(&self, marginals: &[Distribution<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, m) in marginals.iter().enumerate() {
            let proj = self.projection(i)?;
            for (x, w) in m.atoms() {
                worst = worst.max((proj.weight_near(x, MERGE_TOL) - w).abs());
            }
            for (x, w) in proj.atoms() {
                worst = worst.max((m.weight_near(x, MERGE_TOL) - w).abs());
            }
        }
        Ok(worst)
    }

    pub fn value(&self, g: &dyn Fn(&[f64]) -> f64) -> f64 {
        self.plan.atoms().iter().map(|(t, w)| w * g(t)).sum()
    }
}

/// `(V, φ_i)` with `v ≤ V + Σ φ_i(x_i)` and `∫ φ_i dλ_i = 0`; `phi[i][a]`
/// is indexed by the atoms of marginal `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KantorovichDual {
    pub v: f64,
    pub phi: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MkSolution {
    pub value: f64,
    pub coupling: Coupling,
    pub dual: KantorovichDual,
    pub lp_iterations: usize,
}

pub fn solve_mk(inst: &TransportInstance) -> Result<MkSolution> {
    solve_mk_with_cap(inst, DEFAULT_CAP)
}

/// Exact LP over the product support.
pub fn solve_mk_with_cap(inst: &TransportInstance, cap: usize) -> Result<MkSolution> {
    let size = inst.product_size().unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::SizeCap {
            what: "transport product support",
            needed: size,
            cap,
        });
    }
    let dims = inst.dims();
    let table = inst.tabulate();
    let mut lp = LinearProgram::maximize(table.clone());
    // Row (i, a); the last atom row of each marginal after the first is implied.
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for (i, m) in inst.marginals.iter().enumerate() {
        let kept = if i == 0 { m.len() } else { m.len() - 1 };
        for a in 0..kept {
            let mut row = vec![0.0; size];
            for (flat, slot) in row.iter_mut().enumerate() {
                if unflatten(flat, &dims)[i] == a {
                    *slot = 1.0;
                }
            }
            lp.add_eq(row, m.atoms()[a].1);
            rows.push((i, a));
        }
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("transport LP ended with status {:?}", sol.status)));
    }
    let plan = Distribution::from_weights(
        sol.x
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 1e-15)
            .map(|(flat, w)| (inst.tuple(&unflatten(flat, &dims)), *w))
            .collect(),
    );
    let mut y: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    for ((i, a), d) in rows.iter().zip(&sol.eq_duals) {
        y[*i][*a] = *d;
    }
    Ok(MkSolution {
        value: sol.objective,
        coupling: Coupling { plan },
        dual: center_dual(&inst.marginals, y),
        lp_iterations: sol.iterations,
    })
}

/// Shift potentials to mean zero, collecting the means into `V`.
fn center_dual(marginals: &[Distribution<f64>], mut y: Vec<Vec<f64>>) -> KantorovichDual {
    let mut v = 0.0;
    for (m, yi) in marginals.iter().zip(y.iter_mut()) {
        let mean: f64 = m.atoms().iter().zip(yi.iter()).map(|((_, w), p)| w * p).sum();
        yi.iter_mut().for_each(|p| *p -= mean);
        v += mean;
    }
    KantorovichDual { v, phi: y }
}

/// Quantile coupling. Blocks are the half-open intervals `[t_k, t_{k+1})`
/// between consecutive cumulative weights of all marginals.
pub fn assortative(marginals: &[Distribution<f64>]) -> Result<Coupling> {
    let sorted = marginals
        .iter()
        .map(|m| m.canonicalize(MERGE_TOL))
        .collect::<Result<Vec<_>>>()?;
    let cumulative: Vec<Vec<f64>> = sorted
        .iter()
        .map(|m| {
            m.atoms()
                .iter()
                .scan(0.0, |acc, (_, w)| {
                    *acc += w;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut breaks: Vec<f64> = cumulative.iter().flatten().copied().chain([0.0]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= MARGINAL_TOL);
    let atoms = breaks
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let tuple = sorted
                .iter()
                .zip(&cumulative)
                .map(|(m, cdf)| {
                    let j = cdf.iter().position(|&c| c > mid).unwrap_or(cdf.len() - 1);
                    m.atoms()[j].0
                })
                .collect();
            (tuple, w[1] - w[0])
        })
        .collect();
    Ok(Coupling {
        plan: Distribution::from_weights(atoms).canonicalize(0.0)?,
    })
}

/// `V - value(plan)` after checking that the dual is feasible.
pub fn kantorovich_gap(inst: &TransportInstance, plan: &Coupling, dual: &KantorovichDual, tol: f64) -> Result<f64> {
    let dims = inst.dims();
    if dual.phi.len() != dims.len() || dual.phi.iter().zip(&dims).any(|(p, d)| p.len() != *d) {
        return Err(Error::Dimension("potentials do not match the marginal supports".into()));
    }
    for (i, (m, p)) in inst.marginals.iter().zip(&dual.phi).enumerate() {
        let mean: f64 = m.atoms().iter().zip(p).map(|((_, w), v)| w * v).sum();
        if mean.abs() > tol {
            return Err(Error::InfeasibleDual {
                location: format!("mean of potential {i}"),
                violation: mean.abs(),
            });
        }
    }
    let table = inst.tabulate();
    let worst = table
        .par_iter()
        .enumerate()
        .map(|(flat, g)| {
            let idx = unflatten(flat, &dims);
            let bound = dual.v + idx.iter().enumerate().map(|(i, &a)| dual.phi[i][a]).sum::<f64>();
            (g - bound, flat)
        })
        .reduce(|| (f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    if worst.0 > tol {
        return Err(Error::InfeasibleDual {
            location: format!("{:?}", inst.tuple(&unflatten(worst.1, &dims))),
            violation: worst.0,
        });
    }
    Ok(dual.v - plan.value(&*inst.utility))
}

/// All adjacent mixed second differences on the product support are `≥ -tol`.
pub fn is_supermodular(inst: &TransportInstance, tol: f64) -> bool {
    let dims = inst.dims();
    let table = inst.tabulate();
    let n = dims.len();
    (0..table.len()).into_par_iter().all(|flat| {
        let idx = unflatten(flat, &dims);
        for i in 0..n {
            for j in i + 1..n {
                if idx[i] + 1 >= dims[i] || idx[j] + 1 >= dims[j] {
                    continue;
                }
                let at = |di: usize, dj: usize| {
                    let mut k = idx.clone();
                    k[i] += di;
                    k[j] += dj;
                    table[flatten(&k, &dims)]
                };
                if at(1, 1) - at(1, 0) - at(0, 1) + at(0, 0) < -tol {
                    return false;
                }
            }
        }
        true
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMethod {
    Assortative,
    Lp,
}

/// Assortative coupling when the utility is supermodular on the support, LP otherwise.
pub fn solve_transport(inst: &TransportInstance) -> Result<(f64, Coupling, TransportMethod)> {
    if is_supermodular(inst, SUPERMODULAR_TOL) {
        let plan = assortative(&inst.marginals)?;
        Ok((plan.value(&*inst.utility), plan, TransportMethod::Assortative))
    } else {
        let s = solve_mk(inst)?;
        Ok((s.value, s.coupling, TransportMethod::Lp))
    }
}
