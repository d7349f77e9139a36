//! Dense revised simplex solver.
//!
//! Programs are stated as
//!
//! ```text
//! maximize    c·x
//! subject to  A_eq x  = b_eq
//!             A_ub x <= b_ub
//!             lower <= x <= upper
//! ```
//!
//! The solver works on a canonical form where every variable is either
//! nonnegative or free, runs a two-phase revised simplex with an explicit
//! basis inverse, and reports primal values together with the dual
//! multipliers of every constraint. Dantzig pricing is used until a run of
//! degenerate pivots is detected, after which Bland's rule takes over until
//! the objective moves again.
//!
//! When a program has many more constraints than variables (the grid dual
//! LP is the typical case) the engine solves the explicit LP dual instead and
//! reads the primal solution off its multipliers, which keeps the basis small.

use crate::error::{Error, Result};

/// Pivot elements smaller than this are never used.
pub const PIVOT_TOL: f64 = 1e-10;
/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
const OPT_TOL: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit hit or the basis became numerically singular.
    Failed,
}

/// Which formulation the engine pivots on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Dualize when rows exceed twice the column count.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ub_rows: Vec<Vec<f64>>,
    ub_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values (empty unless optimal).
    pub x: Vec<f64>,
    /// Multipliers of the equality rows (free sign).
    pub eq_duals: Vec<f64>,
    /// Multipliers of the `<=` rows (nonnegative for a maximization).
    pub ub_duals: Vec<f64>,
    /// `c_j - a_j·y`, per original variable.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Original variables that ended basic, ascending.
    pub basis: Vec<usize>,
    pub iterations: usize,
    /// Largest constraint or bound violation of `x`.
    pub primal_residual: f64,
    /// Largest |multiplier × slack| over rows and bounds.
    pub complementarity_residual: f64,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            eq_duals: Vec::new(),
            ub_duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            basis: Vec::new(),
            iterations,
            primal_residual: f64::NAN,
            complementarity_residual: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    /// A maximization over `objective.len()` variables, each defaulting to `x >= 0`.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// Minimization is stated as maximization of the negated objective; the
    /// reported objective and multipliers refer to that maximization.
    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn num_ub(&self) -> usize {
        self.ub_rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars(), "row length");
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars(), "row length");
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_le(row.into_iter().map(|a| -a).collect(), -rhs);
    }

    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.densify(terms);
        self.add_eq(row, rhs);
    }

    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.densify(terms);
        self.add_le(row, rhs);
    }

    pub fn add_ge_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.densify(terms);
        self.add_ge(row, rhs);
    }

    fn densify(&self, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        row
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        assert!(lower <= upper, "empty bound interval for variable {var}");
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn set_free(&mut self, var: usize) {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY);
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|a| a.is_finite());
        if !finite(&self.objective)
            || !self.eq_rows.iter().all(|r| finite(r))
            || !self.ub_rows.iter().all(|r| finite(r))
            || !finite(&self.eq_rhs)
            || !finite(&self.ub_rhs)
        {
            return Err(Error::Validation("non-finite LP coefficient".into()));
        }
        if self.lower.contains(&f64::INFINITY)
            || self.upper.contains(&f64::NEG_INFINITY)
        {
            return Err(Error::Validation("unsatisfiable variable bound".into()));
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with(SolveMode::Auto)
    }

    pub fn solve_with(&self, mode: SolveMode) -> Result<LpSolution> {
        self.validate()?;
        let canon = Canonical::from_program(self);
        let rows = canon.eq.len() + canon.ub.len();
        let cols = canon.num_vars();
        let dualize = match mode {
            SolveMode::Auto => rows > 2 * cols.max(1),
            SolveMode::Primal => false,
            SolveMode::Dual => true,
        };
        let raw = if dualize {
            match canon.solve_via_dual()? {
                Some(raw) => raw,
                None => canon.solve_direct()?,
            }
        } else {
            canon.solve_direct()?
        };
        Ok(self.finish(&canon, raw))
    }

    /// Map a canonical solution back to the original variables and compute
    /// residuals.
    fn finish(&self, canon: &Canonical, raw: RawSolution) -> LpSolution {
        if raw.status != LpStatus::Optimal {
            return LpSolution::failed(raw.status, raw.iterations);
        }
        let n = self.num_vars();
        let x = canon.recover_x(&raw.x);
        let eq_duals = raw.eq_duals.clone();
        let ub_duals: Vec<f64> = raw.ub_duals[..self.ub_rows.len()].to_vec();

        let mut reduced_costs = self.objective.clone();
        for (row, &y) in self.eq_rows.iter().zip(&eq_duals) {
            for (j, &a) in row.iter().enumerate() {
                reduced_costs[j] -= a * y;
            }
        }
        for (row, &w) in self.ub_rows.iter().zip(&ub_duals) {
            for (j, &a) in row.iter().enumerate() {
                reduced_costs[j] -= a * w;
            }
        }

        let objective = dot(&self.objective, &x);
        let mut primal_residual: f64 = 0.0;
        let mut complementarity_residual: f64 = 0.0;
        for (row, &b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            primal_residual = primal_residual.max((dot(row, &x) - b).abs());
        }
        for ((row, &b), &w) in self.ub_rows.iter().zip(&self.ub_rhs).zip(&ub_duals) {
            let slack = b - dot(row, &x);
            primal_residual = primal_residual.max(-slack);
            complementarity_residual = complementarity_residual.max((w * slack).abs());
        }
        for j in 0..n {
            primal_residual = primal_residual.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
            let gap_lo = x[j] - self.lower[j];
            let gap_hi = self.upper[j] - x[j];
            let gap = gap_lo.min(gap_hi);
            if gap.is_finite() {
                complementarity_residual = complementarity_residual.max((reduced_costs[j] * gap).abs());
            } else if !(gap_lo.is_finite() || gap_hi.is_finite()) {
                complementarity_residual = complementarity_residual.max(reduced_costs[j].abs());
            }
        }

        let mut basis = canon.basic_original(&raw.basic_canonical);
        basis.sort_unstable();
        basis.dedup();

        LpSolution {
            status: LpStatus::Optimal,
            x,
            eq_duals,
            ub_duals,
            reduced_costs,
            objective,
            basis,
            iterations: raw.iterations,
            primal_residual: primal_residual.max(0.0),
            complementarity_residual,
        }
    }

    /// Objective of the dual program implied by a solution's multipliers:
    /// `b·y + Σ_j r_j x_j` (the second sum collects bound terms).
    pub fn dual_objective(&self, sol: &LpSolution) -> f64 {
        let mut obj = dot(&self.eq_rhs, &sol.eq_duals) + dot(&self.ub_rhs, &sol.ub_duals);
        for j in 0..self.num_vars() {
            let r = sol.reduced_costs[j];
            if r != 0.0 {
                let bound = if r < 0.0 { self.lower[j] } else { self.upper[j] };
                if bound.is_finite() {
                    obj += r * bound;
                }
            }
        }
        obj
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How an original variable maps onto canonical columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + x'
    Shift { col: usize, offset: f64 },
    /// x = offset - x'
    Mirror { col: usize, offset: f64 },
    Free { col: usize },
}

/// `max c·x + c0` with `E x = e`, `U x <= u`, `x_j >= 0` unless `free[j]`.
#[derive(Debug, Clone)]
struct Canonical {
    cost: Vec<f64>,
    free: Vec<bool>,
    eq: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ub: Vec<Vec<f64>>,
    ub_rhs: Vec<f64>,
    map: Vec<VarMap>,
}

#[derive(Debug, Clone)]
struct RawSolution {
    status: LpStatus,
    x: Vec<f64>,
    eq_duals: Vec<f64>,
    ub_duals: Vec<f64>,
    basic_canonical: Vec<usize>,
    iterations: usize,
}

impl RawSolution {
    fn status_only(status: LpStatus, iterations: usize) -> Self {
        RawSolution {
            status,
            x: Vec::new(),
            eq_duals: Vec::new(),
            ub_duals: Vec::new(),
            basic_canonical: Vec::new(),
            iterations,
        }
    }
}

impl Canonical {
    fn num_vars(&self) -> usize {
        self.cost.len()
    }

    fn from_program(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut map = Vec::with_capacity(n);
        let mut free = Vec::with_capacity(n);
        // Per-column transform: x = offset + sign * x'.
        let mut sign = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n);
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            if l.is_finite() {
                map.push(VarMap::Shift { col: j, offset: l });
                free.push(false);
                sign.push(1.0);
                offset.push(l);
                if u.is_finite() {
                    bound_rows.push((j, u - l));
                }
            } else if u.is_finite() {
                map.push(VarMap::Mirror { col: j, offset: u });
                free.push(false);
                sign.push(-1.0);
                offset.push(u);
            } else {
                map.push(VarMap::Free { col: j });
                free.push(true);
                sign.push(1.0);
                offset.push(0.0);
            }
        }
        let transform = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
            let shift: f64 = row.iter().zip(&offset).map(|(a, o)| a * o).sum();
            (row.iter().zip(&sign).map(|(a, s)| a * s).collect(), rhs - shift)
        };
        let mut eq = Vec::new();
        let mut eq_rhs = Vec::new();
        for (row, &b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
            let (r, b) = transform(row, b);
            eq.push(r);
            eq_rhs.push(b);
        }
        let mut ub = Vec::new();
        let mut ub_rhs = Vec::new();
        for (row, &b) in lp.ub_rows.iter().zip(&lp.ub_rhs) {
            let (r, b) = transform(row, b);
            ub.push(r);
            ub_rhs.push(b);
        }
        for (j, width) in bound_rows {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            ub.push(r);
            ub_rhs.push(width);
        }
        let cost = lp.objective.iter().zip(&sign).map(|(c, s)| c * s).collect();
        Canonical {
            cost,
            free,
            eq,
            eq_rhs,
            ub,
            ub_rhs,
            map,
        }
    }

    fn recover_x(&self, xc: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => offset + xc[col],
                VarMap::Mirror { col, offset } => offset - xc[col],
                VarMap::Free { col } => xc[col],
            })
            .collect()
    }

    fn basic_original(&self, basic: &[usize]) -> Vec<usize> {
        // Canonical columns coincide with original indices.
        basic.iter().copied().filter(|&j| j < self.map.len()).collect()
    }

    /// Standard-form two-phase simplex on this canonical program.
    fn solve_direct(&self) -> Result<RawSolution> {
        let n = self.num_vars();
        let m_eq = self.eq.len();
        let m_ub = self.ub.len();
        let m = m_eq + m_ub;

        // Column layout: canonical vars, negative parts of free vars, ub slacks, artificials.
        let free_idx: Vec<usize> = (0..n).filter(|&j| self.free[j]).collect();
        let n_struct = n + free_idx.len();
        let slack_base = n_struct;
        let art_base = slack_base + m_ub;

        let mut row_sign = vec![1.0; m];
        let mut b = Vec::with_capacity(m);
        for i in 0..m {
            let rhs = if i < m_eq { self.eq_rhs[i] } else { self.ub_rhs[i - m_eq] };
            if rhs < 0.0 {
                row_sign[i] = -1.0;
            }
            b.push(rhs * row_sign[i]);
        }
        let row = |i: usize| -> &Vec<f64> {
            if i < m_eq {
                &self.eq[i]
            } else {
                &self.ub[i - m_eq]
            }
        };

        let mut cols: Vec<SparseCol> = Vec::with_capacity(art_base + m);
        for j in 0..n {
            let mut c = SparseCol::default();
            for i in 0..m {
                let a = row(i)[j];
                if a != 0.0 {
                    c.push(i, a * row_sign[i]);
                }
            }
            cols.push(c);
        }
        for &j in &free_idx {
            let mut c = cols[j].clone();
            c.negate();
            cols.push(c);
        }
        for k in 0..m_ub {
            let i = m_eq + k;
            let mut c = SparseCol::default();
            c.push(i, row_sign[i]);
            cols.push(c);
        }
        // Artificial only where no slack can start basic.
        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        for i in 0..m {
            if i >= m_eq && row_sign[i] > 0.0 {
                basis.push(slack_base + (i - m_eq));
            } else {
                let col = cols.len();
                let mut c = SparseCol::default();
                c.push(i, 1.0);
                cols.push(c);
                basis.push(col);
                artificials.push(col);
            }
        }
        let total = cols.len();
        let is_artificial = {
            let mut v = vec![false; total];
            for &a in &artificials {
                v[a] = true;
            }
            v
        };

        let mut engine = Simplex::new(m, cols, b, basis)?;
        let mut iterations = 0;

        if !artificials.is_empty() {
            let mut phase1 = vec![0.0; total];
            for &a in &artificials {
                phase1[a] = -1.0;
            }
            let status = engine.run(&phase1, &|_| true, &mut iterations)?;
            if status != LpStatus::Optimal {
                return Ok(RawSolution::status_only(LpStatus::Failed, iterations));
            }
            let infeas: f64 = engine
                .basis
                .iter()
                .zip(&engine.xb)
                .filter(|(j, _)| is_artificial[**j])
                .map(|(_, v)| *v)
                .sum();
            let scale = 1.0 + engine.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if infeas > FEAS_TOL * scale * 10.0 {
                return Ok(RawSolution::status_only(LpStatus::Infeasible, iterations));
            }
            engine.drive_out(&is_artificial)?;
        }

        let mut cost = vec![0.0; total];
        cost[..n].copy_from_slice(&self.cost);
        for (k, &j) in free_idx.iter().enumerate() {
            cost[n + k] = -self.cost[j];
        }
        let allowed = |j: usize| !is_artificial[j];
        let status = engine.run(&cost, &allowed, &mut iterations)?;
        if status != LpStatus::Optimal {
            return Ok(RawSolution::status_only(status, iterations));
        }

        let values = engine.values(total);
        let mut x: Vec<f64> = values[..n].to_vec();
        for (k, &j) in free_idx.iter().enumerate() {
            x[j] -= values[n + k];
        }
        for (j, v) in x.iter_mut().enumerate() {
            if !self.free[j] && *v < 0.0 {
                *v = 0.0;
            }
        }
        let y = engine.duals(&cost);
        let duals: Vec<f64> = y.iter().zip(&row_sign).map(|(a, s)| a * s).collect();
        let basic_canonical = engine
            .basis
            .iter()
            .map(|&j| if j >= n && j < n_struct { free_idx[j - n] } else { j })
            .filter(|&j| j < n)
            .collect();
        Ok(RawSolution {
            status: LpStatus::Optimal,
            x,
            eq_duals: duals[..m_eq].to_vec(),
            ub_duals: duals[m_eq..].iter().map(|w| w.max(0.0)).collect(),
            basic_canonical,
            iterations,
        })
    }

    /// Solve the explicit dual and read the primal off its multipliers.
    /// Returns `None` when the dual is infeasible (primal unbounded or
    /// infeasible), so the caller can settle the status directly.
    fn solve_via_dual(&self) -> Result<Option<RawSolution>> {
        let n = self.num_vars();
        let m_eq = self.eq.len();
        let m_ub = self.ub.len();
        let nd = m_eq + m_ub;
        // Dual variables: y (free) for eq rows, w >= 0 for ub rows.
        let mut cost = Vec::with_capacity(nd);
        cost.extend(self.eq_rhs.iter().map(|b| -b));
        cost.extend(self.ub_rhs.iter().map(|b| -b));
        let mut free = vec![true; m_eq];
        free.extend(std::iter::repeat_n(false, m_ub));

        let column = |j: usize| -> Vec<f64> {
            let mut c = Vec::with_capacity(nd);
            c.extend(self.eq.iter().map(|r| r[j]));
            c.extend(self.ub.iter().map(|r| r[j]));
            c
        };
        let mut d_eq = Vec::new();
        let mut d_eq_rhs = Vec::new();
        let mut d_ub = Vec::new();
        let mut d_ub_rhs = Vec::new();
        let mut eq_of_var = Vec::new();
        let mut ub_of_var = Vec::new();
        for j in 0..n {
            if self.free[j] {
                eq_of_var.push(j);
                d_eq.push(column(j));
                d_eq_rhs.push(self.cost[j]);
            } else {
                ub_of_var.push(j);
                d_ub.push(column(j).into_iter().map(|a| -a).collect());
                d_ub_rhs.push(-self.cost[j]);
            }
        }
        let dual = Canonical {
            cost,
            map: (0..nd).map(|col| if free[col] { VarMap::Free { col } } else { VarMap::Shift { col, offset: 0.0 } }).collect(),
            free,
            eq: d_eq,
            eq_rhs: d_eq_rhs,
            ub: d_ub,
            ub_rhs: d_ub_rhs,
        };
        let raw = dual.solve_direct()?;
        match raw.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => {
                return Ok(Some(RawSolution::status_only(LpStatus::Infeasible, raw.iterations)))
            }
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Failed => return Ok(Some(RawSolution::status_only(LpStatus::Failed, raw.iterations))),
        }
        let mut x = vec![0.0; n];
        for (k, &j) in eq_of_var.iter().enumerate() {
            x[j] = -raw.eq_duals[k];
        }
        for (k, &j) in ub_of_var.iter().enumerate() {
            x[j] = raw.ub_duals[k];
        }
        // Original variables whose dual row is tight, a stand-in for the basis.
        let mut basic_canonical = Vec::new();
        for j in 0..n {
            if self.free[j] || x[j] > FEAS_TOL {
                basic_canonical.push(j);
            }
        }
        Ok(Some(RawSolution {
            status: LpStatus::Optimal,
            x,
            eq_duals: raw.x[..m_eq].to_vec(),
            ub_duals: raw.x[m_eq..].iter().map(|w| w.max(0.0)).collect(),
            basic_canonical,
            iterations: raw.iterations,
        }))
    }
}

#[derive(Debug, Clone, Default)]
struct SparseCol {
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl SparseCol {
    fn push(&mut self, i: usize, v: f64) {
        self.idx.push(i);
        self.val.push(v);
    }

    fn negate(&mut self) {
        self.val.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Revised simplex state on `A x = b, x >= 0` with an explicit basis inverse.
struct Simplex {
    m: usize,
    cols: Vec<SparseCol>,
    b: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major m×m.
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    max_iter: usize,
}

impl Simplex {
    fn new(m: usize, cols: Vec<SparseCol>, b: Vec<f64>, basis: Vec<usize>) -> Result<Self> {
        let mut is_basic = vec![false; cols.len()];
        for &j in &basis {
            is_basic[j] = true;
        }
        let max_iter = 50 * (m + cols.len()) + 1000;
        let mut s = Simplex {
            m,
            cols,
            b,
            basis,
            is_basic,
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            since_refactor: 0,
            max_iter,
        };
        s.refactor()?;
        Ok(s)
    }

    /// Recompute the basis inverse by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            let c = &self.cols[j];
            for (&i, &v) in c.idx.iter().zip(&c.val) {
                a[i * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-13 {
                return Err(Error::Lp("singular basis during refactorization".into()));
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v = dot(row, &self.b);
            self.xb[i] = if v < 0.0 && v > -FEAS_TOL { 0.0 } else { v };
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += cb * row[k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        let c = &self.cols[j];
        cost[j] - c.idx.iter().zip(&c.val).map(|(&i, &v)| y[i] * v).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let c = &self.cols[j];
        let mut alpha = vec![0.0; m];
        for (&k, &v) in c.idx.iter().zip(&c.val) {
            for i in 0..m {
                alpha[i] += self.binv[i * m + k] * v;
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, entering: usize, alpha: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / alpha[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -FEAS_TOL {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let piv = alpha[r];
        let prow: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / piv).collect();
        for (i, row) in self.binv.chunks_mut(m).enumerate() {
            if i == r {
                row.copy_from_slice(&prow);
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                for (a, p) in row.iter_mut().zip(&prow) {
                    *a -= f * p;
                }
            }
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basis[r] = entering;
        self.since_refactor += 1;
    }

    fn run(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool, iterations: &mut usize) -> Result<LpStatus> {
        let mut bland = false;
        let mut degenerate_run = 0usize;
        loop {
            if *iterations >= self.max_iter {
                return Ok(LpStatus::Failed);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals(cost);
            let mut entering = None;
            let mut best = OPT_TOL;
            for j in 0..self.cols.len() {
                if self.is_basic[j] || !allowed(j) {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                if d > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(j) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.ftran(j);
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                if alpha[i] <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / alpha[i];
                let take = match leave {
                    None => true,
                    Some(_) if ratio < best_ratio - 1e-12 => true,
                    Some(r) if ratio <= best_ratio + 1e-12 => {
                        if bland {
                            self.basis[i] < self.basis[r]
                        } else {
                            alpha[i] > alpha[r]
                        }
                    }
                    Some(_) => false,
                };
                if take {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return Ok(LpStatus::Unbounded);
            };
            if best_ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(r, j, &alpha);
            *iterations += 1;
        }
    }

    /// Pivot basic artificials out where possible; rows where no structural
    /// column has a nonzero entry are redundant and keep their artificial at 0.
    fn drive_out(&mut self, is_artificial: &[bool]) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            if !is_artificial[self.basis[r]] {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                if self.is_basic[j] || is_artificial[j] {
                    continue;
                }
                let c = &self.cols[j];
                let v: f64 = c.idx.iter().zip(&c.val).map(|(&i, &a)| row[i] * a).sum();
                if v.abs() > 1e-9 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let alpha = self.ftran(j);
                self.xb[r] = 0.0;
                self.pivot(r, j, &alpha);
            } else {
                self.xb[r] = 0.0;
            }
        }
        self.refactor()
    }

    fn values(&self, total: usize) -> Vec<f64> {
        let mut v = vec![0.0; total];
        for (i, &j) in self.basis.iter().enumerate() {
            v[j] = self.xb[i];
        }
        v
    }
}
