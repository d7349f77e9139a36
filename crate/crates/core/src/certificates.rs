//! Closed-form dual certificates for two-state, two-receiver problems and
//! their numerical verification.
//!
//! A certificate `(V^ℓ, V^h, α)` bounds the value by `p V^ℓ + (1-p) V^h`
//! whenever, for every profile `(x1, x2)`,
//!
//! ```text
//! v^ℓ(x1, x2) <= V^ℓ + (1 - x1) α(x1) + (1 - x2) α(x2)
//! v^h(x1, x2) <= V^h - x1 α(x1) - x2 α(x2)
//! ```
//!
//! Verification replaces exact global maximization with dense sampling plus
//! local refinement around the largest samples.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::belief::{PersuasionProblem, Utility};
use crate::error::{Error, Result};
use crate::grid::{lattice_size, DualCertificate, GridSpec, PhiRepr};
use crate::reductions::{locate_on_hull, upper_hull, HullLocation};

/// `α` for one receiver.
#[derive(Clone)]
pub enum AlphaFunction {
    Zero,
    /// Full-information/no-information `α` for `h(t) = t^β` at prior 1/2.
    Polarization { beta: f64 },
    /// Retailer (1-polarization) `α` at prior `p`.
    Retailer { p: f64 },
    /// Full-information/no-information `α` for a general `h` at prior 1/2.
    NoInfo { h: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    /// Three-branch `α_p` built from the boundary values of `v`.
    Partial {
        utility: Arc<dyn Utility>,
        v_low: f64,
        v_high: f64,
        b: f64,
        c: f64,
    },
    /// Piecewise-linear through `(xs, ys)`, `xs` ascending.
    Sampled { xs: Vec<f64>, ys: Vec<f64> },
}

impl fmt::Debug for AlphaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaFunction::Zero => write!(f, "Zero"),
            AlphaFunction::Polarization { beta } => write!(f, "Polarization {{ beta: {beta} }}"),
            AlphaFunction::Retailer { p } => write!(f, "Retailer {{ p: {p} }}"),
            AlphaFunction::NoInfo { .. } => write!(f, "NoInfo"),
            AlphaFunction::Partial { v_low, v_high, b, c, .. } => {
                write!(f, "Partial {{ v_low: {v_low}, v_high: {v_high}, b: {b}, c: {c} }}")
            }
            AlphaFunction::Sampled { xs, .. } => write!(f, "Sampled({} points)", xs.len()),
        }
    }
}

fn boundary_low(u: &dyn Utility, x: f64) -> f64 {
    u.value(0, &[x, 1.0 - x, 1.0, 0.0])
}

fn boundary_high(u: &dyn Utility, x: f64) -> f64 {
    u.value(1, &[x, 1.0 - x, 0.0, 1.0])
}

impl AlphaFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            AlphaFunction::Zero => 0.0,
            AlphaFunction::Polarization { beta } => {
                let h = |t: f64| t.abs().powf(*beta);
                no_info_alpha(&h, x)
            }
            AlphaFunction::NoInfo { h } => no_info_alpha(h.as_ref(), x),
            AlphaFunction::Retailer { p } => {
                if x <= *p {
                    1.0 - 2.0 * (1.0 - p).powi(2) / (1.0 - x)
                } else {
                    2.0 * p * p / x - 1.0
                }
            }
            AlphaFunction::Partial {
                utility,
                v_low,
                v_high,
                b,
                c,
            } => {
                let u = utility.as_ref();
                if x < *b {
                    (boundary_low(u, x) - v_low) / (1.0 - x)
                } else if x <= *c {
                    boundary_low(u, x) - v_low + v_high - boundary_high(u, x)
                } else {
                    (v_high - boundary_high(u, x)) / x
                }
            }
            AlphaFunction::Sampled { xs, ys } => piecewise_linear(xs, ys, x),
        }
    }
}

fn no_info_alpha(h: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    if x <= 0.5 {
        (h(1.0 - x) - h(0.5)) / (1.0 - x)
    } else {
        (h(0.5) - h(x)) / x
    }
}

fn piecewise_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.iter().position(|&t| t >= x) {
        None => *ys.last().unwrap_or(&0.0),
        Some(0) => ys[0],
        Some(i) => {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            (1.0 - t) * ys[i - 1] + t * ys[i]
        }
    }
}

/// `(V^ℓ, V^h)` and one `α` per receiver.
#[derive(Debug, Clone)]
pub struct AlphaCertificate {
    pub alphas: Vec<AlphaFunction>,
    pub v_low: f64,
    pub v_high: f64,
}

impl AlphaCertificate {
    pub fn symmetric(alpha: AlphaFunction, v_low: f64, v_high: f64) -> Self {
        AlphaCertificate {
            alphas: vec![alpha.clone(), alpha],
            v_low,
            v_high,
        }
    }

    pub fn bound(&self, p: f64) -> f64 {
        p * self.v_low + (1.0 - p) * self.v_high
    }
}

pub fn alpha_to_phi(cert: &AlphaCertificate) -> DualCertificate {
    DualCertificate {
        v: vec![cert.v_low, cert.v_high],
        receivers: cert.alphas.len(),
        phi: PhiRepr::Alpha(cert.alphas.clone()),
    }
}

/// Certificate for `|x1 - x2|^β` at prior 1/2 with `V^ℓ = V^h = 2^{-β}`.
pub fn polarization_alpha(beta: f64) -> Result<AlphaCertificate> {
    if !(beta > 0.0) {
        return Err(Error::Validation(format!("beta must be positive, got {beta}")));
    }
    let v = 0.5f64.powf(beta);
    Ok(AlphaCertificate::symmetric(AlphaFunction::Polarization { beta }, v, v))
}

/// Certificate for `|x1 - x2|` at prior `p` with bound `2p(1-p)`.
pub fn retailer_alpha(p: f64) -> Result<AlphaCertificate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Validation(format!("prior {p} outside (0,1)")));
    }
    Ok(AlphaCertificate::symmetric(
        AlphaFunction::Retailer { p },
        2.0 * (1.0 - p).powi(2),
        2.0 * p * p,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationOptions {
    /// Samples per axis, at least 101.
    pub samples: usize,
    pub refine_rounds: usize,
    /// Number of best samples refined locally.
    pub refine_top: usize,
    /// Lipschitz constant of the checked slack; adds a between-sample margin.
    pub lipschitz_bound: Option<f64>,
    pub tol: f64,
}

impl Default for VerificationOptions {
    fn default() -> Self {
        VerificationOptions {
            samples: 2001,
            refine_rounds: 3,
            refine_top: 100,
            lipschitz_bound: None,
            tol: 1e-9,
        }
    }
}

impl VerificationOptions {
    fn validate(&self) -> Result<()> {
        if self.samples < 101 {
            return Err(Error::Validation(format!("at least 101 samples per axis required, got {}", self.samples)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Validation("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Whether feasibility was only checked at samples or extends to the whole
/// box through a Lipschitz margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qualifier {
    Sampled,
    Interval,
}

impl Qualifier {
    pub fn name(self) -> &'static str {
        match self {
            Qualifier::Sampled => "sampled",
            Qualifier::Interval => "interval",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub feasible: bool,
    pub max_violation: f64,
    /// State and flattened profile where the largest violation was found.
    pub worst_state: usize,
    pub worst_profile: Vec<f64>,
    pub bound: f64,
    pub qualifier: Qualifier,
    pub margin: f64,
}

/// Largest value of `g(x, y) + a(x) + b(y)` over a box, by dense sampling
/// followed by shrinking local grids around the best samples.
pub(crate) fn maximize_box<G, A, B>(
    g: G,
    a: A,
    b: B,
    xr: (f64, f64),
    yr: (f64, f64),
    opts: &VerificationOptions,
) -> (f64, (f64, f64))
where
    G: Fn(f64, f64) -> f64 + Sync,
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
{
    let n = opts.samples;
    let axis = |r: (f64, f64)| -> Vec<f64> { (0..n).map(|s| r.0 + (r.1 - r.0) * s as f64 / (n - 1) as f64).collect() };
    let xs = axis(xr);
    let ys = axis(yr);
    let ax: Vec<f64> = xs.iter().map(|&x| a(x)).collect();
    let by: Vec<f64> = ys.iter().map(|&y| b(y)).collect();
    // Best point of every row; rows are independent.
    let mut rows: Vec<(f64, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, i, 0);
            for j in 0..n {
                let v = g(xs[i], ys[j]) + ax[i] + by[j];
                if v > best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .collect();
    rows.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
    rows.truncate(opts.refine_top.max(1));
    let f = |x: f64, y: f64| g(x, y) + a(x) + b(y);
    let hx = (xr.1 - xr.0) / (n - 1) as f64;
    let hy = (yr.1 - yr.0) / (n - 1) as f64;
    let refined: Vec<(f64, (f64, f64))> = rows
        .par_iter()
        .map(|&(v, i, j)| {
            let mut best = (v, (xs[i], ys[j]));
            let (mut wx, mut wy) = (hx, hy);
            for _ in 0..opts.refine_rounds {
                let (cx, cy) = best.1;
                for s in 0..=20 {
                    let x = (cx - wx + wx * s as f64 / 10.0).clamp(xr.0, xr.1);
                    for t in 0..=20 {
                        let y = (cy - wy + wy * t as f64 / 10.0).clamp(yr.0, yr.1);
                        let val = f(x, y);
                        if val > best.0 {
                            best = (val, (x, y));
                        }
                    }
                }
                wx /= 10.0;
                wy /= 10.0;
            }
            best
        })
        .collect();
    refined
        .into_iter()
        .fold((f64::NEG_INFINITY, (xr.0, yr.0)), |acc, r| if r.0 > acc.0 { r } else { acc })
}

/// Check `v^ω <= V^ω + Σ φ_i^ω` over all profiles. Two-state two-receiver
/// problems are sampled on a square with local refinement; other shapes are
/// sampled on a simplex lattice of comparable size.
pub fn verify_certificate(problem: &PersuasionProblem, cert: &DualCertificate, opts: &VerificationOptions) -> Result<Verification> {
    opts.validate()?;
    let k = problem.num_states();
    if cert.num_states() != k || cert.receivers != problem.receivers {
        return Err(Error::Dimension(format!(
            "certificate for {} states and {} receivers, problem has {} and {}",
            cert.num_states(),
            cert.receivers,
            k,
            problem.receivers
        )));
    }
    if matches!(cert.phi, PhiRepr::Alpha(_)) && k != 2 {
        return Err(Error::Dimension("α certificates need two states".into()));
    }
    let utility = problem.utility.as_ref();
    let mut worst = (f64::NEG_INFINITY, 0usize, Vec::new());
    let step;
    if k == 2 && problem.receivers == 2 {
        step = 1.0 / (opts.samples - 1) as f64;
        for w in 0..2 {
            let (val, (x1, x2)) = maximize_box(
                |x1, x2| utility.value(w, &[x1, 1.0 - x1, x2, 1.0 - x2]) - cert.v[w],
                |x1| -cert.phi(0, w, &[x1, 1.0 - x1]),
                |x2| -cert.phi(1, w, &[x2, 1.0 - x2]),
                (0.0, 1.0),
                (0.0, 1.0),
                opts,
            );
            if val > worst.0 {
                worst = (val, w, vec![x1, 1.0 - x1, x2, 1.0 - x2]);
            }
        }
    } else {
        let budget = (opts.samples * opts.samples) as f64;
        let mut m = 1;
        while (lattice_size(k, m + 1) as f64).powi(problem.receivers as i32) <= budget {
            m += 1;
        }
        step = 1.0 / m as f64;
        let grid = GridSpec::new(k, m, usize::MAX)?;
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|j| grid.coords(j)).collect();
        let n = problem.receivers;
        let total = pts.len().pow(n as u32);
        for w in 0..k {
            let best = (0..total)
                .into_par_iter()
                .map(|mut idx| {
                    let mut flat = Vec::with_capacity(n * k);
                    let mut slots = vec![0; n];
                    for s in slots.iter_mut().rev() {
                        *s = idx % pts.len();
                        idx /= pts.len();
                    }
                    for &s in &slots {
                        flat.extend_from_slice(&pts[s]);
                    }
                    (cert.slack(utility, w, &flat), flat)
                })
                .reduce(|| (f64::NEG_INFINITY, Vec::new()), |p, q| if q.0 > p.0 { q } else { p });
            if best.0 > worst.0 {
                worst = (best.0, w, best.1);
            }
        }
    }
    let (qualifier, margin) = match opts.lipschitz_bound {
        Some(l) => (Qualifier::Interval, l * step),
        None => (Qualifier::Sampled, 0.0),
    };
    let max_violation = worst.0;
    Ok(Verification {
        feasible: max_violation + margin <= opts.tol,
        max_violation,
        worst_state: worst.1,
        worst_profile: worst.2,
        bound: cert.bound(problem.prior.weights()),
        qualifier,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoInfoCheck {
    pub optimal: bool,
    pub value: f64,
    /// Largest excess in the mixed region `x1 <= 1/2 <= x2`.
    pub mixed_violation: f64,
    /// Largest excess in the region `x1, x2 <= 1/2`.
    pub low_violation: f64,
}

/// Sufficient condition for the full-information/no-information policy under
/// `v = h(|x1 - x2|)` at prior 1/2.
pub fn check_fullinfo_noinfo(h: &(dyn Fn(f64) -> f64 + Sync), opts: &VerificationOptions) -> Result<NoInfoCheck> {
    opts.validate()?;
    let half = h(0.5);
    let (mixed, _) = maximize_box(
        |x, y| h((x - y).abs()) - h(1.0 - x) - (1.0 - y) / y * (half - h(y)),
        |_| 0.0,
        |_| 0.0,
        (0.0, 0.5),
        (0.5, 1.0),
        opts,
    );
    let (low, _) = maximize_box(
        |x, y| h((x - y).abs()) - half,
        |x| x / (1.0 - x) * (h(1.0 - x) - half),
        |y| y / (1.0 - y) * (h(1.0 - y) - half),
        (0.0, 0.5),
        (0.0, 0.5),
        opts,
    );
    Ok(NoInfoCheck {
        optimal: mixed <= opts.tol && low <= opts.tol,
        value: half,
        mixed_violation: mixed,
        low_violation: low,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSearch {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub steps: usize,
}

/// Largest `β` for which [`check_fullinfo_noinfo`] certifies `h(t) = t^β`,
/// by bisection on `[0, 100]`.
pub fn beta_max_search(precision: f64, opts: &VerificationOptions) -> Result<BetaSearch> {
    if !(precision >= 1e-8) {
        return Err(Error::Validation(format!("precision must be at least 1e-8, got {precision}")));
    }
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    let mut steps = 0;
    while hi - lo > precision {
        let beta = 0.5 * (lo + hi);
        let h = move |t: f64| t.abs().powf(beta);
        if check_fullinfo_noinfo(&h, opts)?.optimal {
            lo = beta;
        } else {
            hi = beta;
        }
        steps += 1;
    }
    Ok(BetaSearch {
        beta: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        steps,
    })
}

#[derive(Debug, Clone)]
pub struct PartialInfoCheck {
    pub optimal: bool,
    pub b: f64,
    pub c: f64,
    pub value: f64,
    pub certificate: AlphaCertificate,
    pub verification: Verification,
}

/// Sufficient condition for a full-information/partial-information policy
/// in a symmetric two-state, two-receiver problem.
pub fn check_fullinfo_partialinfo(problem: &PersuasionProblem, opts: &VerificationOptions) -> Result<PartialInfoCheck> {
    check_fullinfo_partialinfo_with(problem, opts, crate::reductions::DEFAULT_SAMPLES)
}

pub fn check_fullinfo_partialinfo_with(
    problem: &PersuasionProblem,
    opts: &VerificationOptions,
    cav_samples: usize,
) -> Result<PartialInfoCheck> {
    if problem.num_states() != 2 || problem.receivers != 2 {
        return Err(Error::Dimension("needs two states and two receivers".into()));
    }
    let u = problem.utility.clone();
    for s in 0..=10 {
        for t in 0..=10 {
            let (x1, x2) = (s as f64 / 10.0, t as f64 / 13.0);
            for w in 0..2 {
                let d = u.value(w, &[x1, 1.0 - x1, x2, 1.0 - x2]) - u.value(w, &[x2, 1.0 - x2, x1, 1.0 - x1]);
                if d.abs() > 1e-12 {
                    return Err(Error::Precondition(format!("utility not symmetric at ({x1}, {x2})")));
                }
            }
        }
    }
    let p = problem.prior.weights()[0];
    let vbar = |x: f64| x * boundary_low(u.as_ref(), x) + (1.0 - x) * boundary_high(u.as_ref(), x);
    let mut pts: Vec<(f64, f64)> = (0..cav_samples.max(2))
        .map(|s| {
            let x = s as f64 / (cav_samples.max(2) - 1) as f64;
            (x, vbar(x))
        })
        .collect();
    pts.push((p, vbar(p)));
    let hull = upper_hull(&pts);

    let (b, c, slope) = match locate_on_hull(&hull, p)? {
        HullLocation::Vertex(i) => {
            // Tangent at a touch point: finite-difference slope kept inside
            // the supergradient interval of the sampled hull.
            let eps = 1e-6;
            let lo_x = (p - eps).max(0.0);
            let hi_x = (p + eps).min(1.0);
            let mut d = (vbar(hi_x) - vbar(lo_x)) / (hi_x - lo_x);
            if i + 1 < hull.len() {
                d = d.max((hull[i + 1].1 - hull[i].1) / (hull[i + 1].0 - hull[i].0));
            }
            if i > 0 {
                d = d.min((hull[i].1 - hull[i - 1].1) / (hull[i].0 - hull[i - 1].0));
            }
            (p, p, d)
        }
        HullLocation::Edge(i) => {
            let (b, c) = refine_touch_points(&vbar, p, hull[i].0, hull[i + 1].0);
            (b, c, (vbar(c) - vbar(b)) / (c - b))
        }
    };
    let anchor = if b == c { p } else { b };
    let value_at = |x: f64| vbar(anchor) + slope * (x - anchor);
    let (v_low, v_high) = (value_at(1.0), value_at(0.0));
    let alpha = if is_identically_zero(u.as_ref()) {
        AlphaFunction::Zero
    } else {
        AlphaFunction::Partial {
            utility: u.clone(),
            v_low,
            v_high,
            b,
            c,
        }
    };
    let certificate = AlphaCertificate::symmetric(alpha, v_low, v_high);
    let verification = verify_certificate(problem, &alpha_to_phi(&certificate), opts)?;
    Ok(PartialInfoCheck {
        optimal: verification.feasible,
        b,
        c,
        value: value_at(p),
        certificate,
        verification,
    })
}

fn is_identically_zero(u: &dyn Utility) -> bool {
    (0..=20).all(|s| {
        (0..=20).all(|t| {
            let (x1, x2) = (s as f64 / 20.0, t as f64 / 20.0);
            (0..2).all(|w| u.value(w, &[x1, 1.0 - x1, x2, 1.0 - x2]) == 0.0)
        })
    })
}

/// Maximize the chord value at `p` over `b <= p <= c`, alternating between
/// the endpoints with shrinking local grids.
fn refine_touch_points(f: &dyn Fn(f64) -> f64, p: f64, b0: f64, c0: f64) -> (f64, f64) {
    let chord = |b: f64, c: f64| {
        if c - b <= 0.0 {
            f(p)
        } else {
            f(b) * (c - p) / (c - b) + f(c) * (p - b) / (c - b)
        }
    };
    let (mut b, mut c) = (b0, c0);
    let start = (c0 - b0).max(1e-3);
    for _ in 0..6 {
        let mut w = start;
        while w > 1e-13 {
            for s in -20..=20 {
                let cand = (b + w * s as f64 / 20.0).clamp(0.0, p);
                if chord(cand, c) > chord(b, c) {
                    b = cand;
                }
            }
            for s in -20..=20 {
                let cand = (c + w * s as f64 / 20.0).clamp(p, 1.0);
                if chord(b, cand) > chord(b, c) {
                    c = cand;
                }
            }
            w *= 0.25;
        }
    }
    (b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{Discord, Polarization, Retailer};

    fn quick() -> VerificationOptions {
        VerificationOptions {
            samples: 401,
            ..VerificationOptions::default()
        }
    }

    #[test]
    fn alpha_formula_values() {
        let a = AlphaFunction::Polarization { beta: 1.0 };
        assert!((a.eval(0.25) - 1.0 / 3.0).abs() < 1e-15);
        for beta in [0.5, 1.0, 2.0, 3.0] {
            assert!(AlphaFunction::Polarization { beta }.eval(0.5).abs() < 1e-15);
            assert!(AlphaFunction::Polarization { beta }.eval(0.5 + 1e-12).abs() < 1e-10);
        }
        for p in [0.2, 0.3, 0.5, 0.7] {
            let r = AlphaFunction::Retailer { p };
            assert!((r.eval(p) - (2.0 * p - 1.0)).abs() < 1e-15);
            assert!((r.eval(p + 1e-12) - (2.0 * p - 1.0)).abs() < 1e-10);
        }
        let phi = alpha_to_phi(&retailer_alpha(0.5).unwrap());
        assert!((phi.phi(0, 0, &[0.25, 0.75]) - 0.25).abs() < 1e-15);
        assert!(phi.orthogonality_residual() < 1e-12);
        assert!(polarization_alpha(0.0).is_err());
        assert!(retailer_alpha(1.0).is_err());
    }

    #[test]
    fn zero_certificate_for_zero_utility() {
        let prob = PersuasionProblem::binary(0.5, 2, Arc::new(crate::builtins::Constant(0.0))).unwrap();
        let cert = DualCertificate::zero(2, 2);
        let v = verify_certificate(&prob, &cert, &quick()).unwrap();
        assert!(v.feasible && v.bound == 0.0 && v.max_violation <= 0.0);
    }

    #[test]
    fn polarization_certificates() {
        let prob = |beta| PersuasionProblem::binary(0.5, 2, Arc::new(Polarization { beta })).unwrap();
        let v = verify_certificate(&prob(2.0), &alpha_to_phi(&polarization_alpha(2.0).unwrap()), &quick()).unwrap();
        assert!(v.feasible, "{v:?}");
        assert!((v.bound - 0.25).abs() < 1e-15);
        let v = verify_certificate(&prob(3.0), &alpha_to_phi(&polarization_alpha(3.0).unwrap()), &quick()).unwrap();
        assert!(!v.feasible);
    }

    #[test]
    fn retailer_certificate_bound() {
        let prob = PersuasionProblem::binary(0.3, 2, Arc::new(Retailer)).unwrap();
        let v = verify_certificate(&prob, &alpha_to_phi(&retailer_alpha(0.3).unwrap()), &quick()).unwrap();
        assert!(v.feasible, "{v:?}");
        assert!((v.bound - 0.42).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_margin_changes_the_qualifier() {
        let prob = PersuasionProblem::binary(0.5, 2, Arc::new(Retailer)).unwrap();
        let opts = VerificationOptions {
            lipschitz_bound: Some(4.0),
            ..quick()
        };
        let v = verify_certificate(&prob, &alpha_to_phi(&retailer_alpha(0.5).unwrap()), &opts).unwrap();
        assert_eq!(v.qualifier, Qualifier::Interval);
        assert!((v.margin - 0.01).abs() < 1e-15);
        assert!(!v.feasible);
    }

    #[test]
    fn no_info_checks() {
        assert!(check_fullinfo_noinfo(&|t: f64| t * t, &quick()).unwrap().optimal);
        assert!(!check_fullinfo_noinfo(&|t: f64| t.powi(3), &quick()).unwrap().optimal);
        let c = check_fullinfo_noinfo(&|_| 0.7, &quick()).unwrap();
        assert!(c.optimal && c.value == 0.7);
        assert!(VerificationOptions { samples: 100, ..quick() }.validate().is_err());
    }

    #[test]
    fn discord_touch_points() {
        let prob = PersuasionProblem::binary(0.5, 2, Arc::new(Discord)).unwrap();
        let r = check_fullinfo_partialinfo(&prob, &quick()).unwrap();
        let b = (3.0 - 3f64.sqrt()) / 6.0;
        assert!((r.b - b).abs() < 1e-6, "{}", r.b);
        assert!((r.c - (1.0 - b)).abs() < 1e-6);
        assert!(r.optimal, "{:?}", r.verification);
        // Seam continuity of α_p.
        let a = &r.certificate.alphas[0];
        assert!((a.eval(r.b - 1e-12) - a.eval(r.b)).abs() < 1e-8);
        assert!((a.eval(r.c) - a.eval(r.c + 1e-12)).abs() < 1e-8);
    }

    #[test]
    fn retailer_is_degenerate_partial_info() {
        let prob = PersuasionProblem::binary(1.0 / 3.0, 2, Arc::new(Retailer)).unwrap();
        let r = check_fullinfo_partialinfo(&prob, &quick()).unwrap();
        assert_eq!(r.b, r.c);
        assert!((r.b - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.certificate.v_low - 8.0 / 9.0).abs() < 1e-6);
        assert!((r.value - 4.0 / 9.0).abs() < 1e-12);
        assert!(r.optimal, "{:?}", r.verification);
    }

    #[test]
    fn zero_utility_partial_info() {
        let prob = PersuasionProblem::binary(0.5, 2, Arc::new(crate::builtins::Constant(0.0))).unwrap();
        let r = check_fullinfo_partialinfo(&prob, &quick()).unwrap();
        assert!(r.optimal && r.value == 0.0);
        assert!(matches!(r.certificate.alphas[0], AlphaFunction::Zero));
    }
}
