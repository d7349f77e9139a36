//! Simplex-lattice discretization and the grid-restricted primal and dual
//! persuasion LPs.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::belief::{
    Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, PersuasionProblem, StateSpace, Utility, MERGE_TOL,
};
use crate::certificates::AlphaFunction;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution};

/// Cap on grid points and on LP variables.
pub const DEFAULT_CAP: usize = 200_000;
pub const DEFAULT_RESOLUTION: usize = 50;
/// LP weights below this are not reported as atoms.
const ATOM_FLOOR: f64 = 1e-12;

/// All beliefs whose coordinates are multiples of `1/m`, in lexicographic
/// order of their count vectors.
#[derive(Debug, Clone)]
pub struct GridSpec {
    m: usize,
    num_states: usize,
    counts: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.num_states == other.num_states
    }
}

/// `C(m + k - 1, k - 1)`, saturating.
pub fn lattice_size(num_states: usize, m: usize) -> usize {
    let mut c: u128 = 1;
    for j in 1..num_states as u128 {
        c = c * (m as u128 + j) / j;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

pub fn make_grid(states: &StateSpace, m: usize) -> Result<GridSpec> {
    GridSpec::new(states.size(), m, DEFAULT_CAP)
}

impl GridSpec {
    pub fn new(num_states: usize, m: usize, cap: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("grid resolution must be at least 1".into()));
        }
        if num_states < 2 {
            return Err(Error::Validation("grid needs at least two states".into()));
        }
        let needed = lattice_size(num_states, m);
        if needed > cap {
            return Err(Error::SizeCap {
                what: "grid points",
                needed,
                cap,
            });
        }
        let mut counts = Vec::with_capacity(needed);
        let mut cur = vec![0u32; num_states];
        enumerate(&mut cur, 0, m as u32, &mut counts);
        let index = counts.iter().enumerate().map(|(j, c)| (c.clone(), j)).collect();
        Ok(GridSpec {
            m,
            num_states,
            counts,
            index,
        })
    }

    pub fn binary(m: usize) -> Result<Self> {
        Self::new(2, m, DEFAULT_CAP)
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self, j: usize) -> &[u32] {
        &self.counts[j]
    }

    pub fn coords(&self, j: usize) -> Vec<f64> {
        self.counts[j].iter().map(|&c| c as f64 / self.m as f64).collect()
    }

    pub fn point(&self, j: usize) -> Belief {
        Belief::normalized(self.coords(j)).expect("lattice point is a belief")
    }

    pub fn points(&self) -> Vec<Belief> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Index of the lattice point equal to `x` within `tol`, if any.
    pub fn locate(&self, x: &[f64], tol: f64) -> Option<usize> {
        let c: Vec<u32> = x.iter().map(|v| (v * self.m as f64).round().max(0.0) as u32).collect();
        let j = *self.index.get(&c)?;
        let close = self.coords(j).iter().zip(x).all(|(a, b)| (a - b).abs() <= tol);
        close.then_some(j)
    }

    /// Piecewise-linear interpolation weights on the Freudenthal
    /// triangulation of the lattice: at most `k` points with weights summing
    /// to one whose weighted mean is `x`.
    pub fn interpolation(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let k = self.num_states;
        let m = self.m as f64;
        // Decreasing tail sums z_j = m·Σ_{l≥j} x_l for j = 1..k-1.
        let mut z = vec![0.0; k - 1];
        let mut tail = 0.0;
        for j in (1..k).rev() {
            tail += x[j];
            z[j - 1] = (m * tail).clamp(0.0, m);
        }
        let base: Vec<f64> = z.iter().map(|v| v.floor().min(m - 1.0).max(0.0)).collect();
        let frac: Vec<f64> = z.iter().zip(&base).map(|(v, b)| v - b).collect();
        let mut order: Vec<usize> = (0..k - 1).collect();
        order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        let mut vertex = base.clone();
        let mut out = Vec::with_capacity(k);
        let mut prev = 1.0;
        let to_counts = |zz: &[f64]| {
            let mut c = vec![0u32; k];
            c[0] = (m - zz[0]).round() as u32;
            for j in 1..k {
                let next = if j < k - 1 { zz[j] } else { 0.0 };
                c[j] = (zz[j - 1] - next).round() as u32;
            }
            c
        };
        for &d in &order {
            let w = prev - frac[d];
            if w > 0.0 {
                out.push((self.index[&to_counts(&vertex)], w));
            }
            vertex[d] += 1.0;
            prev = frac[d];
        }
        if prev > 0.0 {
            out.push((self.index[&to_counts(&vertex)], prev));
        }
        out
    }

    /// Linear interpolation of grid values at `x`.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        self.interpolation(x).iter().map(|&(j, w)| w * values[j]).sum()
    }
}

fn enumerate(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos == cur.len() - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for c in 0..=left {
        cur[pos] = c;
        enumerate(cur, pos + 1, left - c, out);
    }
}

/// Profiles of grid points, receiver 0 most significant.
#[derive(Debug, Clone, Copy)]
struct ProfileIndexer {
    points: usize,
    receivers: usize,
}

impl ProfileIndexer {
    fn count(&self) -> Result<usize> {
        let mut total: usize = 1;
        for _ in 0..self.receivers {
            total = total.checked_mul(self.points).ok_or(Error::SizeCap {
                what: "grid profiles",
                needed: usize::MAX,
                cap: DEFAULT_CAP,
            })?;
        }
        Ok(total)
    }

    fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = idx % self.points;
            idx /= self.points;
        }
    }
}

/// Utility values `v^ω` at every grid profile, `[state][profile]`.
pub fn tabulate(problem: &PersuasionProblem, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let n = problem.receivers;
    let ix = ProfileIndexer {
        points: grid.len(),
        receivers: n,
    };
    let total = ix.count()?;
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|j| grid.coords(j)).collect();
    let utility = problem.utility.as_ref();
    (0..problem.num_states())
        .map(|w| {
            let row: Vec<f64> = (0..total)
                .into_par_iter()
                .map(|p| {
                    let mut slots = vec![0usize; n];
                    ix.decode(p, &mut slots);
                    let flat: Vec<f64> = slots.iter().flat_map(|&j| coords[j].iter().copied()).collect();
                    utility.value(w, &flat)
                })
                .collect();
            if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("utility not finite at grid profile {bad} in state {w}")));
            }
            Ok(row)
        })
        .collect()
}

/// Sender utility given by values on a grid of profiles, interpolated
/// piecewise linearly in each receiver's belief and multilinearly across
/// receivers.
#[derive(Debug, Clone)]
pub struct GridTable {
    grid: GridSpec,
    receivers: usize,
    values: Vec<Vec<f64>>,
}

impl GridTable {
    /// `values[state][profile]` with profiles ordered as in [`tabulate`].
    pub fn new(grid: GridSpec, receivers: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        let ix = ProfileIndexer {
            points: grid.len(),
            receivers,
        };
        let total = ix.count()?;
        if values.len() != grid.num_states() || values.iter().any(|r| r.len() != total) {
            return Err(Error::Dimension(format!(
                "table needs {} states × {total} profiles",
                grid.num_states()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("table values must be finite".into()));
        }
        Ok(GridTable {
            grid,
            receivers,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

impl Utility for GridTable {
    fn value(&self, state: usize, profile: &[f64]) -> f64 {
        let k = self.grid.num_states();
        let per: Vec<Vec<(usize, f64)>> = (0..self.receivers)
            .map(|i| self.grid.interpolation(&profile[i * k..(i + 1) * k]))
            .collect();
        let mut total = 0.0;
        let mut pick = vec![0usize; self.receivers];
        loop {
            let mut idx = 0;
            let mut w = 1.0;
            for (i, &c) in pick.iter().enumerate() {
                idx = idx * self.grid.len() + per[i][c].0;
                w *= per[i][c].1;
            }
            total += w * self.values[state][idx];
            let mut i = self.receivers;
            loop {
                if i == 0 {
                    return total;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < per[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        }
    }

    fn describe(&self) -> String {
        format!("table(m={}, receivers={})", self.grid.resolution(), self.receivers)
    }
}

/// How a certificate represents `φ_i^ω`.
#[derive(Debug, Clone)]
pub enum PhiRepr {
    /// `φ ≡ 0`.
    Zero,
    /// Values `[receiver][state][point]` on a grid, interpolated between points.
    Grid { grid: GridSpec, values: Vec<Vec<Vec<f64>>> },
    /// Two-state `α_i` form: `φ^ℓ = (1 - x)α`, `φ^h = -xα`.
    Alpha(Vec<AlphaFunction>),
}

/// Constants `V^ω` and functions `φ_i^ω` bounding the sender utility.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub v: Vec<f64>,
    pub receivers: usize,
    pub phi: PhiRepr,
}

impl DualCertificate {
    pub fn zero(num_states: usize, receivers: usize) -> Self {
        DualCertificate {
            v: vec![0.0; num_states],
            receivers,
            phi: PhiRepr::Zero,
        }
    }

    pub fn num_states(&self) -> usize {
        self.v.len()
    }

    pub fn representation(&self) -> &'static str {
        match self.phi {
            PhiRepr::Zero => "zero",
            PhiRepr::Grid { .. } => "grid-interpolated",
            PhiRepr::Alpha(_) => "alpha",
        }
    }

    /// `φ_i^ω(x)`.
    pub fn phi(&self, receiver: usize, state: usize, x: &[f64]) -> f64 {
        match &self.phi {
            PhiRepr::Zero => 0.0,
            PhiRepr::Grid { grid, values } => grid.interpolate(&values[receiver][state], x),
            PhiRepr::Alpha(alphas) => {
                let a = alphas[receiver].eval(x[0]);
                if state == 0 {
                    (1.0 - x[0]) * a
                } else {
                    -x[0] * a
                }
            }
        }
    }

    /// `Σ_ω p(ω) V^ω`.
    pub fn bound(&self, prior: &[f64]) -> f64 {
        self.v.iter().zip(prior).map(|(v, p)| v * p).sum()
    }

    /// `v^ω(x) - V^ω - Σ_i φ_i^ω(x_i)` at a flattened profile.
    pub fn slack(&self, utility: &dyn Utility, state: usize, profile: &[f64]) -> f64 {
        let k = self.num_states();
        let phis: f64 = (0..self.receivers)
            .map(|i| self.phi(i, state, &profile[i * k..(i + 1) * k]))
            .sum();
        utility.value(state, profile) - self.v[state] - phis
    }

    /// Largest `|Σ_ω x(ω) φ_i^ω(x)|` over the points where φ is represented
    /// (grid points, or 1001 samples of `[0,1]` for closed forms).
    pub fn orthogonality_residual(&self) -> f64 {
        let k = self.num_states();
        let points: Vec<Vec<f64>> = match &self.phi {
            PhiRepr::Zero => return 0.0,
            PhiRepr::Grid { grid, .. } => (0..grid.len()).map(|j| grid.coords(j)).collect(),
            PhiRepr::Alpha(_) => (0..=1000).map(|s| {
                let x = s as f64 / 1000.0;
                vec![x, 1.0 - x]
            }).collect(),
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.receivers {
            for x in &points {
                let r: f64 = (0..k).map(|w| x[w] * self.phi(i, w, x)).sum();
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMethod {
    Primal,
    Dual,
    DualBinary,
}

impl GridMethod {
    pub fn name(self) -> &'static str {
        match self {
            GridMethod::Primal => "primal",
            GridMethod::Dual => "dual",
            GridMethod::DualBinary => "dual-binary",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSolveReport {
    /// Always "grid value": the optimum of the discretized problem.
    pub label: &'static str,
    pub method: GridMethod,
    pub value: f64,
    pub grid: GridSpec,
    pub family: Option<ConditionalBeliefFamily>,
    pub certificate: Option<DualCertificate>,
    /// Primal objective minus dual objective reported by the LP.
    pub gap: f64,
    pub lp_iterations: usize,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct DualOptions {
    /// Impose the a priori bounds on `V^ω` and `φ_i^ω` that leave the
    /// continuum value unchanged.
    pub regularity_box: bool,
}


fn lp_checked(lp: &LinearProgram, what: &str) -> Result<LpSolution> {
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("{what}: status {:?}", sol.status)));
    }
    Ok(sol)
}

fn check_dims(problem: &PersuasionProblem, grid: &GridSpec) -> Result<ProfileIndexer> {
    if grid.num_states() != problem.num_states() {
        return Err(Error::Dimension(format!(
            "grid over {} states for a {}-state problem",
            grid.num_states(),
            problem.num_states()
        )));
    }
    let ix = ProfileIndexer {
        points: grid.len(),
        receivers: problem.receivers,
    };
    let vars = ix.count()?.saturating_mul(problem.num_states());
    if vars > DEFAULT_CAP {
        return Err(Error::SizeCap {
            what: "grid LP variables",
            needed: vars,
            cap: DEFAULT_CAP,
        });
    }
    Ok(ix)
}

/// Grid-restricted primal: the best feasible family supported on grid profiles.
pub fn solve_primal_grid(problem: &PersuasionProblem, grid: &GridSpec) -> Result<GridSolveReport> {
    let ix = check_dims(problem, grid)?;
    let n = problem.receivers;
    let k = problem.num_states();
    let pts = grid.len();
    let profiles = ix.count()?;
    let p = problem.prior.weights();
    let table = tabulate(problem, grid)?;
    let var = |w: usize, prof: usize| w * profiles + prof;

    let mut obj = vec![0.0; k * profiles];
    for w in 0..k {
        for prof in 0..profiles {
            obj[var(w, prof)] = p[w] * table[w][prof];
        }
    }
    let mut lp = LinearProgram::maximize(obj);
    for w in 0..k {
        let terms: Vec<(usize, f64)> = (0..profiles).map(|prof| (var(w, prof), 1.0)).collect();
        lp.add_eq_sparse(&terms, 1.0);
    }
    // members[i][j]: profiles whose receiver-i coordinate is grid point j.
    let mut members = vec![vec![Vec::new(); pts]; n];
    let mut slots = vec![0usize; n];
    for prof in 0..profiles {
        ix.decode(prof, &mut slots);
        for (i, &j) in slots.iter().enumerate() {
            members[i][j].push(prof);
        }
    }
    // The state-summed linking rows vanish identically, so the last state is skipped.
    for per_point in &members {
        for (j, profs) in per_point.iter().enumerate() {
            let x = grid.coords(j);
            for w in 0..k - 1 {
                let mut terms = Vec::with_capacity(k * profs.len());
                for w2 in 0..k {
                    let coef = if w2 == w { p[w] } else { 0.0 } - x[w] * p[w2];
                    if coef != 0.0 {
                        terms.extend(profs.iter().map(|&prof| (var(w2, prof), coef)));
                    }
                }
                lp.add_eq_sparse(&terms, 0.0);
            }
        }
    }
    let sol = lp_checked(&lp, "grid primal")?;

    let per_state = (0..k)
        .map(|w| {
            let atoms = (0..profiles)
                .filter(|&prof| sol.x[var(w, prof)] > ATOM_FLOOR)
                .map(|prof| {
                    ix.decode(prof, &mut slots);
                    let beliefs = slots.iter().map(|&j| grid.point(j)).collect();
                    (BeliefProfile::new(beliefs), sol.x[var(w, prof)])
                })
                .collect();
            Distribution::from_weights(atoms).canonicalize(MERGE_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = ConditionalBeliefFamily::new(per_state)?;
    Ok(GridSolveReport {
        label: "grid value",
        method: GridMethod::Primal,
        value: sol.objective,
        grid: grid.clone(),
        family: Some(family),
        certificate: None,
        gap: sol.objective - lp.dual_objective(&sol),
        lp_iterations: sol.iterations,
        variables: lp.num_vars(),
        constraints: lp.num_eq() + lp.num_ub(),
    })
}

fn sup_norm(table: &[Vec<f64>]) -> f64 {
    table.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Grid-restricted dual: minimize `Σ p(ω)V^ω` over `V` and grid values of
/// `φ`, with the pointwise bound at every grid profile and orthogonality at
/// every grid point.
pub fn solve_dual_grid(problem: &PersuasionProblem, grid: &GridSpec) -> Result<GridSolveReport> {
    solve_dual_grid_with(problem, grid, DualOptions::default())
}

pub fn solve_dual_grid_with(problem: &PersuasionProblem, grid: &GridSpec, opts: DualOptions) -> Result<GridSolveReport> {
    let ix = check_dims(problem, grid)?;
    let n = problem.receivers;
    let k = problem.num_states();
    let pts = grid.len();
    let profiles = ix.count()?;
    let p = problem.prior.weights();
    let table = tabulate(problem, grid)?;
    let phi = |i: usize, w: usize, j: usize| k + (i * pts + j) * k + w;
    let nvars = k + n * pts * k;

    let mut obj = vec![0.0; nvars];
    obj[..k].copy_from_slice(p);
    let mut lp = LinearProgram::minimize(obj);
    for var in 0..nvars {
        lp.set_free(var);
    }
    if opts.regularity_box {
        let norm = sup_norm(&table);
        for w in 0..k {
            lp.set_bounds(w, -norm, (2.0 - p[w]) / p[w] * norm);
            for i in 0..n {
                for j in 0..pts {
                    lp.set_bounds(phi(i, w, j), -2.0 * n as f64 / p[w] * norm, 2.0 / p[w] * norm);
                }
            }
        }
    }
    let mut slots = vec![0usize; n];
    for w in 0..k {
        for prof in 0..profiles {
            ix.decode(prof, &mut slots);
            let mut terms = Vec::with_capacity(n + 1);
            terms.push((w, 1.0));
            terms.extend(slots.iter().enumerate().map(|(i, &j)| (phi(i, w, j), 1.0)));
            lp.add_ge_sparse(&terms, table[w][prof]);
        }
    }
    for i in 0..n {
        for j in 0..pts {
            let x = grid.coords(j);
            let terms: Vec<(usize, f64)> = (0..k).filter(|&w| x[w] != 0.0).map(|w| (phi(i, w, j), x[w])).collect();
            lp.add_eq_sparse(&terms, 0.0);
        }
    }
    let sol = lp_checked(&lp, "grid dual")?;
    // `minimize` reports the negated objective.
    let value = -sol.objective;
    let values = (0..n)
        .map(|i| (0..k).map(|w| (0..pts).map(|j| sol.x[phi(i, w, j)]).collect()).collect())
        .collect();
    let certificate = DualCertificate {
        v: sol.x[..k].to_vec(),
        receivers: n,
        phi: PhiRepr::Grid {
            grid: grid.clone(),
            values,
        },
    };
    Ok(GridSolveReport {
        label: "grid value",
        method: GridMethod::Dual,
        value,
        grid: grid.clone(),
        family: None,
        certificate: Some(certificate),
        gap: sol.objective - lp.dual_objective(&sol),
        lp_iterations: sol.iterations,
        variables: lp.num_vars(),
        constraints: lp.num_eq() + lp.num_ub(),
    })
}

/// Two-state, two-receiver dual in the `α` parametrization, where
/// orthogonality holds by construction.
pub fn solve_dual_grid_binary(problem: &PersuasionProblem, grid: &GridSpec) -> Result<GridSolveReport> {
    if problem.num_states() != 2 || problem.receivers != 2 {
        return Err(Error::Dimension("the α-form dual needs two states and two receivers".into()));
    }
    let ix = check_dims(problem, grid)?;
    let pts = grid.len();
    let p = problem.prior.weights();
    let table = tabulate(problem, grid)?;
    let alpha = |i: usize, j: usize| 2 + i * pts + j;
    let nvars = 2 + 2 * pts;
    let mut lp = LinearProgram::minimize({
        let mut c = vec![0.0; nvars];
        c[..2].copy_from_slice(p);
        c
    });
    for var in 0..nvars {
        lp.set_free(var);
    }
    let xs: Vec<f64> = (0..pts).map(|j| grid.coords(j)[0]).collect();
    let mut slots = [0usize; 2];
    for w in 0..2 {
        for prof in 0..ix.count()? {
            ix.decode(prof, &mut slots);
            let mut terms = vec![(w, 1.0)];
            for (i, &j) in slots.iter().enumerate() {
                let coef = if w == 0 { 1.0 - xs[j] } else { -xs[j] };
                if coef != 0.0 {
                    terms.push((alpha(i, j), coef));
                }
            }
            lp.add_ge_sparse(&terms, table[w][prof]);
        }
    }
    let sol = lp_checked(&lp, "grid α dual")?;
    let alphas = (0..2)
        .map(|i| AlphaFunction::Sampled {
            xs: xs.clone(),
            ys: (0..pts).map(|j| sol.x[alpha(i, j)]).collect(),
        })
        .collect();
    Ok(GridSolveReport {
        label: "grid value",
        method: GridMethod::DualBinary,
        value: -sol.objective,
        grid: grid.clone(),
        family: None,
        certificate: Some(DualCertificate {
            v: sol.x[..2].to_vec(),
            receivers: 2,
            phi: PhiRepr::Alpha(alphas),
        }),
        gap: sol.objective - lp.dual_objective(&sol),
        lp_iterations: sol.iterations,
        variables: lp.num_vars(),
        constraints: lp.num_eq() + lp.num_ub(),
    })
}

pub fn solve_grid(problem: &PersuasionProblem, grid: &GridSpec, method: GridMethod) -> Result<GridSolveReport> {
    match method {
        GridMethod::Primal => solve_primal_grid(problem, grid),
        GridMethod::Dual => solve_dual_grid(problem, grid),
        GridMethod::DualBinary => solve_dual_grid_binary(problem, grid),
    }
}

/// Grid values at `m` and `2m`, the only convergence evidence available.
pub fn refinement_sequence(problem: &PersuasionProblem, m: usize, method: GridMethod) -> Result<Vec<(usize, f64)>> {
    [m, 2 * m]
        .into_iter()
        .map(|r| {
            let grid = GridSpec::new(problem.num_states(), r, DEFAULT_CAP)?;
            Ok((r, solve_grid(problem, &grid, method)?.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{Constant, Polarization, Retailer};
    use crate::feasibility::check_family;
    use std::sync::Arc;

    fn binary(p: f64, u: Arc<dyn Utility>) -> PersuasionProblem {
        PersuasionProblem::binary(p, 2, u).unwrap()
    }

    #[test]
    fn lattice_sizes_and_order() {
        let g = GridSpec::binary(2).unwrap();
        let firsts: Vec<f64> = (0..g.len()).map(|j| g.coords(j)[0]).collect();
        assert_eq!(firsts, vec![0.0, 0.5, 1.0]);
        assert_eq!(GridSpec::new(3, 2, DEFAULT_CAP).unwrap().len(), 6);
        assert_eq!(GridSpec::binary(100).unwrap().len(), 101);
        assert_eq!(lattice_size(4, 10), 286);
        assert!(matches!(GridSpec::new(6, 200, DEFAULT_CAP), Err(Error::SizeCap { .. })));
        assert!(GridSpec::binary(0).is_err());
    }

    #[test]
    fn interpolation_reproduces_points_and_means() {
        let g = GridSpec::new(3, 4, DEFAULT_CAP).unwrap();
        for j in 0..g.len() {
            let w = g.interpolation(&g.coords(j));
            assert_eq!(w.len(), 1);
            assert_eq!(w[0].0, j);
        }
        let x = [0.13, 0.52, 0.35];
        let w = g.interpolation(&x);
        assert!(w.len() <= 3);
        let total: f64 = w.iter().map(|t| t.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for s in 0..3 {
            let mean: f64 = w.iter().map(|&(j, wt)| wt * g.coords(j)[s]).sum();
            assert!((mean - x[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_utility_value() {
        let prob = binary(0.3, Arc::new(Constant(0.7)));
        let g = GridSpec::binary(4).unwrap();
        assert!((solve_primal_grid(&prob, &g).unwrap().value - 0.7).abs() < 1e-9);
        assert!((solve_dual_grid(&prob, &g).unwrap().value - 0.7).abs() < 1e-9);
    }

    #[test]
    fn retailer_small_grid_primal_and_duals_agree() {
        let prob = binary(0.5, Arc::new(Retailer));
        let g = GridSpec::binary(10).unwrap();
        let primal = solve_primal_grid(&prob, &g).unwrap();
        let dual = solve_dual_grid(&prob, &g).unwrap();
        let alpha = solve_dual_grid_binary(&prob, &g).unwrap();
        assert!((primal.value - 0.5).abs() < 1e-9, "{}", primal.value);
        assert!((dual.value - primal.value).abs() < 1e-8);
        assert!((alpha.value - dual.value).abs() < 1e-8);
        let fam = primal.family.unwrap();
        assert!(check_family(&fam, &prob.prior, 1e-7).unwrap().feasible);
        assert!(dual.certificate.unwrap().orthogonality_residual() < 1e-9);
    }

    #[test]
    fn three_state_polarization_duality() {
        let prob = PersuasionProblem::new(
            StateSpace::new(["a", "b", "c"]).unwrap(),
            crate::belief::Prior::new(vec![0.25, 0.25, 0.5]).unwrap(),
            2,
            Arc::new(crate::belief::FnUtility::new("spread", |_w, f: &[f64]| {
                (f[0] - f[3]).abs() + (f[1] - f[4]).powi(2)
            })),
        )
        .unwrap();
        let g = GridSpec::new(3, 4, DEFAULT_CAP).unwrap();
        let primal = solve_primal_grid(&prob, &g).unwrap();
        let dual = solve_dual_grid(&prob, &g).unwrap();
        assert!((primal.value - dual.value).abs() < 1e-7, "{} {}", primal.value, dual.value);
        assert!(check_family(&primal.family.unwrap(), &prob.prior, 1e-7).unwrap().feasible);
    }

    #[test]
    fn table_utility_interpolates_multilinearly() {
        let g = GridSpec::binary(2).unwrap();
        let prob = binary(0.5, Arc::new(Polarization { beta: 1.0 }));
        let values = tabulate(&prob, &g).unwrap();
        let t = GridTable::new(g, 2, values).unwrap();
        assert!((t.value(0, &[1.0, 0.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        // Between (1/2, 0) = 1/2 and (1, 0) = 1 along receiver 1.
        assert!((t.value(0, &[0.75, 0.25, 0.0, 1.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn box_constraints_keep_the_value() {
        let prob = binary(0.3, Arc::new(Retailer));
        let g = GridSpec::binary(10).unwrap();
        let free = solve_dual_grid(&prob, &g).unwrap().value;
        let boxed = solve_dual_grid_with(&prob, &g, DualOptions { regularity_box: true }).unwrap().value;
        assert!((free - boxed).abs() < 1e-8, "{free} {boxed}");
    }
}
