//! Beliefs, finitely supported distributions, information structures and
//! persuasion problems, together with the Bayes-rule conversions between them.
//!
//! States are indexed `0..k`. For binary problems state `0` is the low state
//! `ℓ` and a belief is identified with its low-state coordinate `x = x(ℓ)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default max-norm distance under which atoms are considered equal.
pub const MERGE_TOL: f64 = 1e-9;
const PROB_SUM_TOL: f64 = 1e-12;
const DIST_SUM_TOL: f64 = 1e-10;
const MARTINGALE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::Validation("a state space needs at least two states".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Validation(format!("duplicate state label `{a}`")));
            }
        }
        Ok(StateSpace { labels })
    }

    /// The two-state space `{low, high}`.
    pub fn binary() -> Self {
        StateSpace {
            labels: vec!["low".into(), "high".into()],
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn check_probability_vector(w: &[f64], what: &str) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
        return Err(Error::Validation(format!("{what} has entries outside [0,1]: {w:?}")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Validation(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

/// Common prior with full support.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior(Vec<f64>);

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_probability_vector(&weights, "prior")?;
        if weights.len() < 2 {
            return Err(Error::Validation("prior needs at least two states".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Validation(format!("prior must have full support: {weights:?}")));
        }
        Ok(Prior(weights))
    }

    /// Binary prior with probability `p` on the low state.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_belief(&self) -> Belief {
        Belief(self.0.clone())
    }
}

/// A point of the probability simplex over states.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_probability_vector(&weights, "belief")?;
        Ok(Belief(weights))
    }

    /// Binary belief with low-state probability `x`.
    pub fn binary(x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x), "binary belief {x} outside [0,1]");
        Belief(vec![x, 1.0 - x])
    }

    /// Clamp tiny negatives and rescale so the entries sum to one.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w > -1e-12 {
                *w = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Validation(format!("cannot normalize {weights:?}")));
        }
        Ok(Belief(weights.into_iter().map(|w| w / s).collect()))
    }

    /// Point mass on state `state` among `k` states.
    pub fn vertex(k: usize, state: usize) -> Self {
        let mut w = vec![0.0; k];
        w[state] = 1.0;
        Belief(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    /// Low-state coordinate of a binary belief.
    pub fn low(&self) -> f64 {
        self.0[0]
    }

    pub fn num_states(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &Belief) -> f64 {
        max_norm(&self.0, &other.0)
    }
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One belief per receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefProfile(Vec<Belief>);

impl BeliefProfile {
    pub fn new(beliefs: Vec<Belief>) -> Self {
        BeliefProfile(beliefs)
    }

    /// Binary profile from low-state coordinates.
    pub fn binary(xs: &[f64]) -> Self {
        BeliefProfile(xs.iter().map(|&x| Belief::binary(x)).collect())
    }

    pub fn beliefs(&self) -> &[Belief] {
        &self.0
    }

    pub fn receivers(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, receiver: usize) -> &Belief {
        &self.0[receiver]
    }

    /// Receivers' beliefs back to back, the layout [`Utility::value`] expects.
    pub fn flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|b| b.0.iter().copied()).collect()
    }
}

/// Anything that can sit in a [`Distribution`]: atoms are compared through
/// their coordinates in max-norm.
pub trait Atom: Clone + fmt::Debug {
    fn coords(&self) -> Vec<f64>;
}

impl Atom for f64 {
    fn coords(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl Atom for Vec<f64> {
    fn coords(&self) -> Vec<f64> {
        self.clone()
    }
}

impl Atom for Vec<usize> {
    fn coords(&self) -> Vec<f64> {
        self.iter().map(|&s| s as f64).collect()
    }
}

impl Atom for Belief {
    fn coords(&self) -> Vec<f64> {
        self.0.clone()
    }
}

impl Atom for BeliefProfile {
    fn coords(&self) -> Vec<f64> {
        self.flat()
    }
}

/// Weighted list of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<A> {
    atoms: Vec<(A, f64)>,
}

impl<A: Atom> Distribution<A> {
    /// Weights must be nonnegative and sum to one within 1e-10.
    pub fn new(atoms: Vec<(A, f64)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::Validation("distribution weights must be finite and nonnegative".into()));
        }
        let s: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (s - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::Validation(format!("distribution weights sum to {s}, not 1")));
        }
        Ok(Distribution { atoms })
    }

    /// Accepts any nonnegative weights; callers canonicalize before use.
    pub fn from_weights(atoms: Vec<(A, f64)>) -> Self {
        Distribution { atoms }
    }

    pub fn point(atom: A) -> Self {
        Distribution { atoms: vec![(atom, 1.0)] }
    }

    pub fn atoms(&self) -> &[(A, f64)] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<(A, f64)> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Weight of atoms within `tol` of `atom`.
    pub fn weight_near(&self, atom: &A, tol: f64) -> f64 {
        let c = atom.coords();
        self.atoms
            .iter()
            .filter(|(a, _)| max_norm(&a.coords(), &c) <= tol)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn map<B: Atom>(&self, f: impl Fn(&A) -> B) -> Distribution<B> {
        Distribution {
            atoms: self.atoms.iter().map(|(a, w)| (f(a), *w)).collect(),
        }
    }

    pub fn canonicalize(&self, merge_tol: f64) -> Result<Self> {
        canonicalize(self, merge_tol)
    }

    /// Max-norm closeness of canonical forms: same atom count and matching
    /// atoms and weights within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let (Ok(a), Ok(b)) = (self.canonicalize(MERGE_TOL), other.canonicalize(MERGE_TOL)) else {
            return false;
        };
        a.atoms.len() == b.atoms.len()
            && a.atoms.iter().all(|(atom, w)| {
                b.atoms
                    .iter()
                    .any(|(o, v)| max_norm(&atom.coords(), &o.coords()) <= tol && (w - v).abs() <= tol)
            })
    }
}

impl Distribution<Belief> {
    pub fn mean(&self) -> Vec<f64> {
        let k = self.atoms.first().map_or(0, |(b, _)| b.num_states());
        let mut m = vec![0.0; k];
        for (b, w) in &self.atoms {
            for (mi, bi) in m.iter_mut().zip(&b.0) {
                *mi += w * bi;
            }
        }
        m
    }
}

/// Merge atoms closer than `merge_tol` in max-norm, drop zero weights,
/// renormalize, and sort atoms lexicographically by coordinates.
pub fn canonicalize<A: Atom>(dist: &Distribution<A>, merge_tol: f64) -> Result<Distribution<A>> {
    if dist.atoms.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
        return Err(Error::Validation("negative or non-finite weight".into()));
    }
    let mut items: Vec<(Vec<f64>, &A, f64)> = dist
        .atoms
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(a, w)| (a.coords(), a, *w))
        .collect();
    let total: f64 = items.iter().map(|t| t.2).sum();
    if !(total > 0.0) {
        return Err(Error::Validation("distribution has zero total weight".into()));
    }
    items.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    // Representatives stay sorted by first coordinate, so only a window of
    // them can be within tolerance of the next atom.
    let mut reps: Vec<(Vec<f64>, A, f64)> = Vec::new();
    for (c, a, w) in items {
        let first = c.first().copied().unwrap_or(0.0);
        let hit = reps
            .iter()
            .rev()
            .take_while(|r| r.0.first().copied().unwrap_or(0.0) >= first - merge_tol)
            .position(|r| max_norm(&r.0, &c) <= merge_tol);
        match hit {
            Some(back) => {
                let idx = reps.len() - 1 - back;
                reps[idx].2 += w;
            }
            None => reps.push((c, a.clone(), w)),
        }
    }
    Ok(Distribution {
        atoms: reps.into_iter().map(|(_, a, w)| (a, w / total)).collect(),
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Per-state distributions of belief profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalBeliefFamily {
    receivers: usize,
    per_state: Vec<Distribution<BeliefProfile>>,
}

impl ConditionalBeliefFamily {
    pub fn new(per_state: Vec<Distribution<BeliefProfile>>) -> Result<Self> {
        let receivers = per_state
            .first()
            .and_then(|d| d.atoms().first())
            .map(|(p, _)| p.receivers())
            .ok_or_else(|| Error::Validation("empty family".into()))?;
        let k = per_state.len();
        for d in &per_state {
            for (p, _) in d.atoms() {
                if p.receivers() != receivers {
                    return Err(Error::Validation("profiles disagree on receiver count".into()));
                }
                if p.beliefs().iter().any(|b| b.num_states() != k) {
                    return Err(Error::Validation("belief dimension differs from state count".into()));
                }
            }
        }
        Ok(ConditionalBeliefFamily { receivers, per_state })
    }

    /// The same profile with probability one in every state.
    pub fn constant(profile: BeliefProfile, num_states: usize) -> Result<Self> {
        Self::new(vec![Distribution::point(profile); num_states])
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn num_states(&self) -> usize {
        self.per_state.len()
    }

    pub fn state(&self, state: usize) -> &Distribution<BeliefProfile> {
        &self.per_state[state]
    }

    pub fn per_state(&self) -> &[Distribution<BeliefProfile>] {
        &self.per_state
    }

    pub fn canonicalize(&self, merge_tol: f64) -> Result<Self> {
        Ok(ConditionalBeliefFamily {
            receivers: self.receivers,
            per_state: self
                .per_state
                .iter()
                .map(|d| d.canonicalize(merge_tol))
                .collect::<Result<_>>()?,
        })
    }

    /// State-by-state comparison of canonical forms.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.receivers == other.receivers
            && self.per_state.len() == other.per_state.len()
            && self.per_state.iter().zip(&other.per_state).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// A signal profile: one signal index per receiver.
pub type SignalProfile = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct InformationStructure {
    signal_sets: Vec<Vec<String>>,
    kernel: Vec<Distribution<SignalProfile>>,
}

impl InformationStructure {
    pub fn new(signal_sets: Vec<Vec<String>>, kernel: Vec<Distribution<SignalProfile>>) -> Result<Self> {
        for (state, d) in kernel.iter().enumerate() {
            let s = d.total_weight();
            if (s - 1.0).abs() > DIST_SUM_TOL {
                return Err(Error::Validation(format!("kernel weights in state {state} sum to {s}")));
            }
            for (profile, w) in d.atoms() {
                if *w < 0.0 {
                    return Err(Error::Validation("negative kernel weight".into()));
                }
                if profile.len() != signal_sets.len() {
                    return Err(Error::Validation("signal profile length differs from receiver count".into()));
                }
                for (i, &s) in profile.iter().enumerate() {
                    if s >= signal_sets[i].len() {
                        return Err(Error::Validation(format!("signal {s} out of range for receiver {i}")));
                    }
                }
            }
        }
        Ok(InformationStructure { signal_sets, kernel })
    }

    pub fn receivers(&self) -> usize {
        self.signal_sets.len()
    }

    pub fn num_states(&self) -> usize {
        self.kernel.len()
    }

    pub fn signal_sets(&self) -> &[Vec<String>] {
        &self.signal_sets
    }

    pub fn kernel(&self, state: usize) -> &Distribution<SignalProfile> {
        &self.kernel[state]
    }

    /// `π_i(s | ω)` for every state and signal of `receiver`.
    pub fn signal_marginal(&self, receiver: usize) -> Vec<Vec<f64>> {
        self.kernel
            .iter()
            .map(|d| {
                let mut m = vec![0.0; self.signal_sets[receiver].len()];
                for (profile, w) in d.atoms() {
                    m[profile[receiver]] += w;
                }
                m
            })
            .collect()
    }
}

/// Sender utility `v^ω` over belief profiles.
///
/// `profile` holds the receivers' beliefs back to back, `num_states` entries
/// each. Implementations must be deterministic and bounded.
pub trait Utility: Send + Sync + fmt::Debug {
    fn value(&self, state: usize, profile: &[f64]) -> f64;

    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

/// Closure-backed utility.
pub struct FnUtility<F> {
    name: String,
    f: F,
}

impl<F> FnUtility<F>
where
    F: Fn(usize, &[f64]) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnUtility { name: name.into(), f }
    }
}

impl<F> fmt::Debug for FnUtility<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnUtility({})", self.name)
    }
}

impl<F> Utility for FnUtility<F>
where
    F: Fn(usize, &[f64]) -> f64 + Send + Sync,
{
    fn value(&self, state: usize, profile: &[f64]) -> f64 {
        (self.f)(state, profile)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug, Clone)]
pub struct PersuasionProblem {
    pub states: StateSpace,
    pub prior: Prior,
    pub receivers: usize,
    pub utility: Arc<dyn Utility>,
}

impl PersuasionProblem {
    pub fn new(states: StateSpace, prior: Prior, receivers: usize, utility: Arc<dyn Utility>) -> Result<Self> {
        if prior.len() != states.size() {
            return Err(Error::Dimension(format!(
                "prior has {} entries for {} states",
                prior.len(),
                states.size()
            )));
        }
        if receivers == 0 {
            return Err(Error::Validation("at least one receiver required".into()));
        }
        Ok(PersuasionProblem {
            states,
            prior,
            receivers,
            utility,
        })
    }

    /// Two-state problem with prior `p` on the low state.
    pub fn binary(p: f64, receivers: usize, utility: Arc<dyn Utility>) -> Result<Self> {
        Self::new(StateSpace::binary(), Prior::binary(p)?, receivers, utility)
    }

    pub fn num_states(&self) -> usize {
        self.states.size()
    }

    pub fn evaluate(&self, state: usize, profile: &BeliefProfile) -> f64 {
        self.utility.value(state, &profile.flat())
    }

    /// Expected utility `Σ_ω p(ω) ∫ v^ω dμ^ω`.
    pub fn expected_value(&self, family: &ConditionalBeliefFamily) -> f64 {
        family
            .per_state()
            .iter()
            .enumerate()
            .map(|(state, d)| {
                self.prior.weights()[state]
                    * d.atoms().iter().map(|(p, w)| w * self.evaluate(state, p)).sum::<f64>()
            })
            .sum()
    }
}

/// Belief profiles induced by an information structure, one distribution per
/// state. Signal profiles with zero weight are skipped.
pub fn posterior_from_signals(info: &InformationStructure, prior: &Prior) -> Result<ConditionalBeliefFamily> {
    posterior_from_signals_counted(info, prior).map(|(f, _)| f)
}

/// As [`posterior_from_signals`], also returning how many zero-weight signal
/// profiles were dropped.
pub fn posterior_from_signals_counted(
    info: &InformationStructure,
    prior: &Prior,
) -> Result<(ConditionalBeliefFamily, usize)> {
    let k = prior.len();
    if info.num_states() != k {
        return Err(Error::Dimension(format!(
            "structure has {} states, prior {}",
            info.num_states(),
            k
        )));
    }
    let p = prior.weights();
    // posteriors[i][s] = belief of receiver i after signal s
    let mut posteriors: Vec<Vec<Option<Belief>>> = Vec::with_capacity(info.receivers());
    for i in 0..info.receivers() {
        let marg = info.signal_marginal(i);
        let mut beliefs = Vec::with_capacity(info.signal_sets()[i].len());
        for s in 0..info.signal_sets()[i].len() {
            let joint: Vec<f64> = (0..k).map(|w| p[w] * marg[w][s]).collect();
            let total: f64 = joint.iter().sum();
            beliefs.push(if total > 0.0 {
                Some(Belief::normalized(joint)?)
            } else {
                None
            });
        }
        posteriors.push(beliefs);
    }
    let mut dropped = 0;
    let mut per_state = Vec::with_capacity(k);
    for w in 0..k {
        let mut atoms = Vec::new();
        for (profile, weight) in info.kernel(w).atoms() {
            if *weight <= 0.0 {
                dropped += 1;
                continue;
            }
            let beliefs = profile
                .iter()
                .enumerate()
                .map(|(i, &s)| posteriors[i][s].clone().ok_or_else(|| Error::Internal("posterior undefined".into())))
                .collect::<Result<Vec<_>>>()?;
            atoms.push((BeliefProfile(beliefs), *weight));
        }
        per_state.push(Distribution::from_weights(atoms).canonicalize(MERGE_TOL)?);
    }
    Ok((ConditionalBeliefFamily::new(per_state)?, dropped))
}

/// `Σ_ω p(ω) μ^ω`, canonicalized.
pub fn unconditional(family: &ConditionalBeliefFamily, prior: &Prior) -> Result<Distribution<BeliefProfile>> {
    mix(family.per_state(), prior)
}

pub(crate) fn mix<A: Atom>(per_state: &[Distribution<A>], prior: &Prior) -> Result<Distribution<A>> {
    if per_state.len() != prior.len() {
        return Err(Error::Dimension("state count mismatch".into()));
    }
    let atoms = per_state
        .iter()
        .zip(prior.weights())
        .flat_map(|(d, &pw)| d.atoms().iter().map(move |(a, w)| (a.clone(), pw * w)))
        .collect();
    Distribution::from_weights(atoms).canonicalize(MERGE_TOL)
}

/// Split an unconditional single-receiver belief distribution into its
/// per-state conditionals `λ^ω(x) = x(ω)/p(ω) · λ(x)`.
pub fn condition_single_receiver(lambda: &Distribution<Belief>, prior: &Prior) -> Result<Vec<Distribution<Belief>>> {
    let p = prior.weights();
    let mean = lambda.mean();
    if mean.len() != p.len() {
        return Err(Error::Dimension("belief dimension differs from prior".into()));
    }
    let gap = max_norm(&mean, p);
    if gap > MARTINGALE_TOL {
        return Err(Error::Precondition(format!("mean of λ differs from the prior by {gap:e}")));
    }
    (0..p.len())
        .map(|w| {
            let atoms = lambda
                .atoms()
                .iter()
                .map(|(x, l)| (x.clone(), x.get(w) / p[w] * l))
                .collect();
            Distribution::from_weights(atoms).canonicalize(MERGE_TOL)
        })
        .collect()
}
