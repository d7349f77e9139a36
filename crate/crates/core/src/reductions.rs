//! Agent-symmetric supermodular problems, their single-receiver reduction,
//! and concavification of tabulated functions.

use std::fmt;
use std::sync::Arc;

use crate::belief::{
    Belief, Distribution, FnUtility, InformationStructure, PersuasionProblem, Prior, StateSpace, MERGE_TOL,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lp::LinearProgram;

/// Default sample count on `[0,1]` (spacing 1/1000).
pub const DEFAULT_SAMPLES: usize = 1001;
const SUPERMODULAR_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

pub type Aggregator = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;
pub type ActionMap = Arc<dyn Fn(usize, &Belief) -> f64 + Send + Sync>;

/// `v^ω(x_1..x_n) = G^ω(a^ω(x_1), …, a^ω(x_n))` with the same action map for
/// every receiver.
#[derive(Clone)]
pub struct SupermodularProblem {
    pub states: StateSpace,
    pub prior: Prior,
    pub receivers: usize,
    pub aggregator: Aggregator,
    pub action: ActionMap,
    /// Turn failed supermodularity spot checks into errors.
    pub strict: bool,
}

impl fmt::Debug for SupermodularProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupermodularProblem")
            .field("states", &self.states)
            .field("prior", &self.prior)
            .field("receivers", &self.receivers)
            .finish_non_exhaustive()
    }
}

impl SupermodularProblem {
    pub fn new(states: StateSpace, prior: Prior, receivers: usize, aggregator: Aggregator, action: ActionMap) -> Result<Self> {
        if prior.len() != states.size() {
            return Err(Error::Dimension("prior and state space differ in size".into()));
        }
        Ok(SupermodularProblem {
            states,
            prior,
            receivers,
            aggregator,
            action,
            strict: false,
        })
    }

    /// Two states, participation `1 - x`, and
    /// `G^ω(z) = α Σz - c^ω √Σz` with `c^h = 1`, `c^ℓ = 1/3`.
    pub fn public_option(alpha: f64, p: f64) -> Result<Self> {
        let u = crate::builtins::PublicOption { alpha };
        Self::new(
            StateSpace::binary(),
            Prior::binary(p)?,
            2,
            Arc::new(move |w, z: &[f64]| u.aggregate(w, z)),
            Arc::new(|_, x: &Belief| crate::builtins::PublicOption::action(x.low())),
        )
    }

    /// Effort in teams: `G(a_1, a_2) = a_1 a_2` with `a(x) = 1 - x(ℓ)`.
    pub fn teams(p: f64) -> Result<Self> {
        Self::new(
            StateSpace::binary(),
            Prior::binary(p)?,
            2,
            Arc::new(|_, z: &[f64]| z.iter().product()),
            Arc::new(|_, x: &Belief| 1.0 - x.low()),
        )
    }

    pub fn to_problem(&self) -> Result<PersuasionProblem> {
        let g = self.aggregator.clone();
        let a = self.action.clone();
        let k = self.states.size();
        let utility = FnUtility::new("supermodular", move |w, flat: &[f64]| {
            let z: Vec<f64> = flat
                .chunks(k)
                .map(|c| a(w, &Belief::normalized(c.to_vec()).expect("profile entry is a belief")))
                .collect();
            g(w, &z)
        });
        PersuasionProblem::new(self.states.clone(), self.prior.clone(), self.receivers, Arc::new(utility))
    }

    /// Spot-check symmetry of `G` under argument permutation and
    /// nonnegativity of mixed second differences on a lattice of actions.
    /// Returns the worst supermodularity violation found.
    pub fn spot_check(&self) -> Result<f64> {
        let samples: Vec<f64> = (0..=4).map(|s| s as f64 / 4.0).collect();
        let n = self.receivers;
        let mut worst: f64 = 0.0;
        for w in 0..self.states.size() {
            // Action range: the images of lattice beliefs.
            let grid = GridSpec::new(self.states.size(), 4, usize::MAX)?;
            let actions: Vec<f64> = grid.points().iter().map(|b| (self.action)(w, b)).collect();
            let lo = actions.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = actions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pts: Vec<f64> = samples.iter().map(|t| lo + t * (hi - lo)).collect();
            let mut z = vec![pts[0]; n];
            for (s, &u) in pts.iter().enumerate() {
                z[0] = u;
                if n > 1 {
                    z[1] = pts[(s + 2) % pts.len()];
                    let mut swapped = z.clone();
                    swapped.swap(0, 1);
                    let d = ((self.aggregator)(w, &z) - (self.aggregator)(w, &swapped)).abs();
                    if d > SYMMETRY_TOL * (1.0 + (self.aggregator)(w, &z).abs()) {
                        return Err(Error::Precondition(format!("aggregator not symmetric in state {w}: gap {d:e}")));
                    }
                }
            }
            if n >= 2 {
                for a in 0..pts.len() - 1 {
                    for b in 0..pts.len() - 1 {
                        let at = |u: f64, v: f64| {
                            let mut zz = vec![pts[0]; n];
                            zz[0] = u;
                            zz[1] = v;
                            (self.aggregator)(w, &zz)
                        };
                        let d = at(pts[a + 1], pts[b + 1]) - at(pts[a + 1], pts[b]) - at(pts[a], pts[b + 1])
                            + at(pts[a], pts[b]);
                        worst = worst.max(-d);
                    }
                }
            }
        }
        if worst > SUPERMODULAR_TOL {
            if self.strict {
                return Err(Error::Precondition(format!("aggregator not supermodular: mixed difference {:e}", -worst)));
            }
            log::warn!("aggregator fails the supermodularity spot check by {worst:e}");
        }
        Ok(worst)
    }
}

/// Function values at sample beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunctionTable {
    pub points: Vec<Belief>,
    pub values: Vec<f64>,
}

impl ScalarFunctionTable {
    pub fn new(points: Vec<Belief>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Dimension("points and values differ in length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("table values must be finite".into()));
        }
        Ok(ScalarFunctionTable { points, values })
    }

    /// `f` at `samples` equally spaced low-state probabilities, plus `extra`.
    pub fn on_interval(f: impl Fn(f64) -> f64, samples: usize, extra: &[f64]) -> Result<Self> {
        let mut xs: Vec<f64> = (0..samples.max(2)).map(|s| s as f64 / (samples.max(2) - 1) as f64).collect();
        xs.extend(extra.iter().copied().filter(|x| (0.0..=1.0).contains(x)));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs.into_iter().map(Belief::binary).collect(), values)
    }

    pub fn on_grid(f: impl Fn(&Belief) -> f64, grid: &GridSpec) -> Result<Self> {
        let points = grid.points();
        let values = points.iter().map(&f).collect();
        Self::new(points, values)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// `v̄(x) = Σ_ω x(ω) G^ω(a^ω(x), …, a^ω(x))` at each point.
pub fn supermodular_reduce(sp: &SupermodularProblem, points: &[Belief]) -> Result<ScalarFunctionTable> {
    sp.spot_check()?;
    let values = points.iter().map(|x| reduced_value(sp, x)).collect();
    ScalarFunctionTable::new(points.to_vec(), values)
}

pub fn reduced_value(sp: &SupermodularProblem, x: &Belief) -> f64 {
    (0..sp.states.size())
        .filter(|&w| x.get(w) > 0.0)
        .map(|w| {
            let z = vec![(sp.action)(w, x); sp.receivers];
            x.get(w) * (sp.aggregator)(w, &z)
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct CavResult {
    pub value: f64,
    pub splitting: Distribution<Belief>,
    /// Upper-hull vertices `(x, f(x))` for one-dimensional tables.
    pub hull: Vec<(f64, f64)>,
}

/// Vertices of the upper concave envelope of `(x, y)` samples (monotone
/// chain; collinear points are dropped).
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|a, b| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Position of `p` on the hull: a vertex index, or the edge `(i, i + 1)`
/// strictly containing it.
pub(crate) enum HullLocation {
    Vertex(usize),
    Edge(usize),
}

pub(crate) fn locate_on_hull(hull: &[(f64, f64)], p: f64) -> Result<HullLocation> {
    if let Some(i) = hull.iter().position(|h| (h.0 - p).abs() <= 1e-12) {
        return Ok(HullLocation::Vertex(i));
    }
    hull.windows(2)
        .position(|w| w[0].0 < p && p < w[1].0)
        .map(HullLocation::Edge)
        .ok_or_else(|| Error::Precondition(format!("{p} outside the sampled range")))
}

/// Concave envelope of a two-state table at low-state probability `p`.
pub fn cav_1d(table: &ScalarFunctionTable, p: f64) -> Result<CavResult> {
    if table.is_empty() {
        return Err(Error::Validation("empty table".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("prior {p} outside [0,1]")));
    }
    if table.points.iter().any(|b| b.num_states() != 2) {
        return Err(Error::Dimension("cav_1d needs a two-state table".into()));
    }
    let pts: Vec<(f64, f64)> = table.points.iter().map(|b| b.low()).zip(table.values.iter().copied()).collect();
    let hull = upper_hull(&pts);
    let (value, atoms) = match locate_on_hull(&hull, p)? {
        HullLocation::Vertex(i) => (hull[i].1, vec![(Belief::binary(hull[i].0), 1.0)]),
        HullLocation::Edge(i) => {
            let (a, b) = (hull[i], hull[i + 1]);
            let t = (p - a.0) / (b.0 - a.0);
            (
                (1.0 - t) * a.1 + t * b.1,
                vec![(Belief::binary(a.0), 1.0 - t), (Belief::binary(b.0), t)],
            )
        }
    };
    Ok(CavResult {
        value,
        splitting: Distribution::new(atoms)?,
        hull,
    })
}

/// Concave envelope at `prior` over arbitrary sample beliefs, by LP.
pub fn cav_simplex(table: &ScalarFunctionTable, prior: &Prior) -> Result<CavResult> {
    if table.is_empty() {
        return Err(Error::Validation("empty table".into()));
    }
    let k = prior.len();
    if table.points.iter().any(|b| b.num_states() != k) {
        return Err(Error::Dimension("table beliefs and prior differ in dimension".into()));
    }
    let mut lp = LinearProgram::maximize(table.values.clone());
    lp.add_eq(vec![1.0; table.len()], 1.0);
    for w in 0..k - 1 {
        lp.add_eq(table.points.iter().map(|b| b.get(w)).collect(), prior.weights()[w]);
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("concavification LP: {:?}", sol.status)));
    }
    let atoms: Vec<(Belief, f64)> = table
        .points
        .iter()
        .zip(&sol.x)
        .filter(|(_, w)| **w > 1e-12)
        .map(|(b, w)| (b.clone(), *w))
        .collect();
    Ok(CavResult {
        value: sol.objective,
        splitting: Distribution::from_weights(atoms).canonicalize(MERGE_TOL)?,
        hull: Vec::new(),
    })
}

#[derive(Debug, Clone)]
pub struct PublicSignalReport {
    pub value: f64,
    pub splitting: Distribution<Belief>,
    pub structure: InformationStructure,
}

/// Value of the reduced single-receiver problem and the public structure
/// sending every receiver the same signal.
pub fn public_signal_value(sp: &SupermodularProblem, samples: usize) -> Result<PublicSignalReport> {
    let k = sp.states.size();
    let cav = if k == 2 {
        let p = sp.prior.weights()[0];
        let table = ScalarFunctionTable::on_interval(|x| reduced_value(sp, &Belief::binary(x)), samples, &[p])?;
        sp.spot_check()?;
        cav_1d(&table, p)?
    } else {
        let grid = GridSpec::new(k, samples.saturating_sub(1).max(1), crate::grid::DEFAULT_CAP)?;
        let table = supermodular_reduce(sp, &grid.points())?;
        cav_simplex(&table, &sp.prior)?
    };
    let structure = public_structure(&cav.splitting, &sp.prior, sp.receivers)?;
    Ok(PublicSignalReport {
        value: cav.value,
        splitting: cav.splitting,
        structure,
    })
}

/// Public signal `j` drawn with `π(j | ω) = w_j x_j(ω) / p(ω)`.
pub fn public_structure(splitting: &Distribution<Belief>, prior: &Prior, receivers: usize) -> Result<InformationStructure> {
    let labels: Vec<String> = (0..splitting.len()).map(|j| format!("s{j}")).collect();
    let kernel = (0..prior.len())
        .map(|w| {
            let atoms = splitting
                .atoms()
                .iter()
                .enumerate()
                .map(|(j, (x, wt))| (vec![j; receivers], wt * x.get(w) / prior.weights()[w]))
                .collect();
            Distribution::from_weights(atoms).canonicalize(0.5)
        })
        .collect::<Result<Vec<_>>>()?;
    InformationStructure::new(vec![labels; receivers], kernel)
}
