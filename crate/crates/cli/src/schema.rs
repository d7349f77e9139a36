//! Input file formats and their conversion into core types.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use persuade_core::builtins::{Builtin, Duopoly, Polarization, PublicOption};
use persuade_core::certificates::{alpha_to_phi, polarization_alpha, retailer_alpha, AlphaCertificate, AlphaFunction};
use persuade_core::grid::{DualCertificate, GridSpec, GridTable, PhiRepr};
use persuade_core::transport::{TransportInstance, TupleFn};
use persuade_core::{
    Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, PersuasionProblem, Prior, StateSpace, Utility,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{input, CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn read<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn check_version(v: u32) -> CliResult<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(input(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")))
    }
}

fn default_receivers() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    /// State labels; two states `l`, `h` when omitted.
    #[serde(default)]
    pub states: Option<Vec<String>>,
    pub prior: Vec<f64>,
    #[serde(default = "default_receivers")]
    pub receivers: usize,
    pub utility: UtilitySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilitySpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    /// `values[state][profile]` on the lattice of the given resolution,
    /// profiles in mixed-radix order with receiver 0 most significant.
    Table { resolution: usize, values: Vec<Vec<f64>> },
}

pub struct LoadedProblem {
    pub problem: PersuasionProblem,
    pub builtin: Option<Builtin>,
}

fn take_params(name: &str, params: &BTreeMap<String, f64>, allowed: &[&str]) -> CliResult<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(input(format!("unknown parameter {k:?} for builtin {name:?}"))),
        None => Ok(()),
    }
}

fn required(name: &str, params: &BTreeMap<String, f64>, key: &str) -> CliResult<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| input(format!("builtin {name:?} needs parameter {key:?}")))
}

pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> CliResult<Builtin> {
    let b = match name {
        "polarization" => {
            take_params(name, params, &["beta"])?;
            let beta = required(name, params, "beta")?;
            if !(beta > 0.0) {
                return Err(input(format!("beta must be positive, got {beta}")));
            }
            Builtin::Polarization(Polarization { beta })
        }
        "retailer" | "retailer_profit" | "morale" | "discord" => {
            take_params(name, params, &[])?;
            match name {
                "retailer" => Builtin::Retailer,
                "retailer_profit" => Builtin::RetailerProfit,
                "morale" => Builtin::Morale,
                _ => Builtin::Discord,
            }
        }
        "duopoly" => {
            let keys = ["a", "b", "c1", "c2", "d1", "d2", "gamma1", "gamma2", "costScale"];
            take_params(name, params, &keys)?;
            let d = Duopoly::default();
            let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
            Builtin::Duopoly(Duopoly {
                a: get("a", d.a),
                b: get("b", d.b),
                c1: get("c1", d.c1),
                c2: get("c2", d.c2),
                d1: get("d1", d.d1),
                d2: get("d2", d.d2),
                gamma1: get("gamma1", d.gamma1),
                gamma2: get("gamma2", d.gamma2),
                cost_scale: get("costScale", d.cost_scale),
            })
        }
        "public_option" => {
            take_params(name, params, &["alpha"])?;
            Builtin::PublicOption(PublicOption {
                alpha: params.get("alpha").copied().unwrap_or(1.0),
            })
        }
        "constant" => {
            take_params(name, params, &["value"])?;
            Builtin::Constant(required(name, params, "value")?)
        }
        other => return Err(input(format!("unknown builtin {other:?}"))),
    };
    Ok(b)
}

fn two_state_builtin(b: &Builtin) -> bool {
    !matches!(b, Builtin::Constant(_))
}

impl ProblemFile {
    pub fn load(&self) -> CliResult<LoadedProblem> {
        check_version(self.schema_version)?;
        let states = match &self.states {
            Some(labels) => StateSpace::new(labels.iter().cloned())?,
            None => StateSpace::binary(),
        };
        let prior = Prior::new(self.prior.clone())?;
        let (utility, builtin): (Arc<dyn Utility>, _) = match &self.utility {
            UtilitySpec::Builtin { name, params } => {
                let b = builtin(name, params)?;
                if two_state_builtin(&b) && (states.size() != 2 || self.receivers != 2) {
                    return Err(input(format!("builtin {name:?} needs two states and two receivers")));
                }
                (b.utility(), Some(b))
            }
            UtilitySpec::Table { resolution, values } => {
                let grid = GridSpec::new(states.size(), *resolution, persuade_core::grid::DEFAULT_CAP)?;
                (Arc::new(GridTable::new(grid, self.receivers, values.clone())?), None)
            }
        };
        let problem = PersuasionProblem::new(states, prior, self.receivers, utility)?;
        Ok(LoadedProblem { problem, builtin })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub beliefs: Vec<Vec<f64>>,
    pub weight: f64,
}

impl AtomSpec {
    pub fn from_profile(profile: &BeliefProfile, weight: f64) -> Self {
        AtomSpec {
            beliefs: profile.beliefs().iter().map(|b| b.weights().to_vec()).collect(),
            weight,
        }
    }

    fn profile(&self) -> CliResult<BeliefProfile> {
        let beliefs = self
            .beliefs
            .iter()
            .map(|b| Belief::new(b.clone()))
            .collect::<persuade_core::Result<Vec<_>>>()?;
        Ok(BeliefProfile::new(beliefs))
    }
}

pub fn atoms_of(d: &Distribution<BeliefProfile>) -> Vec<AtomSpec> {
    d.atoms().iter().map(|(p, w)| AtomSpec::from_profile(p, *w)).collect()
}

pub fn family_atoms(family: &ConditionalBeliefFamily) -> Vec<Vec<AtomSpec>> {
    family.per_state().iter().map(atoms_of).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub schema_version: u32,
    pub prior: Vec<f64>,
    /// `family[state]` lists the atoms of `μ^state`.
    pub family: Vec<Vec<AtomSpec>>,
}

impl FamilyFile {
    pub fn load(&self) -> CliResult<(ConditionalBeliefFamily, Prior)> {
        check_version(self.schema_version)?;
        let prior = Prior::new(self.prior.clone())?;
        let per_state = self
            .family
            .iter()
            .map(|atoms| {
                let atoms = atoms
                    .iter()
                    .map(|a| Ok((a.profile()?, a.weight)))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(Distribution::new(atoms)?)
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok((ConditionalBeliefFamily::new(per_state)?, prior))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema_version: u32,
    pub certificate: CertificateSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateSpec {
    /// Closed form attached to the problem's builtin utility.
    Builtin,
    /// `φ ≡ 0` with constants `V^ω`.
    Zero { v: Vec<f64> },
    /// Two-state form `φ^ℓ = (1 - x)α`, `φ^h = -xα`, same `α` for all receivers.
    Alpha { alpha: AlphaSpec, v_low: f64, v_high: f64 },
    /// `phi[receiver][state][point]` on the lattice of the given resolution.
    Grid {
        resolution: usize,
        v: Vec<f64>,
        phi: Vec<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AlphaSpec {
    Zero,
    Polarization { beta: f64 },
    Retailer { p: f64 },
    Sampled { xs: Vec<f64>, ys: Vec<f64> },
}

impl AlphaSpec {
    fn function(&self) -> CliResult<AlphaFunction> {
        Ok(match self {
            AlphaSpec::Zero => AlphaFunction::Zero,
            AlphaSpec::Polarization { beta } => AlphaFunction::Polarization { beta: *beta },
            AlphaSpec::Retailer { p } => AlphaFunction::Retailer { p: *p },
            AlphaSpec::Sampled { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 || xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(input("sampled alpha needs matching, strictly increasing xs"));
                }
                AlphaFunction::Sampled {
                    xs: xs.clone(),
                    ys: ys.clone(),
                }
            }
        })
    }
}

/// The closed-form certificate of a builtin, when one exists.
pub fn builtin_certificate(b: &Builtin, problem: &PersuasionProblem) -> CliResult<Option<AlphaCertificate>> {
    let p = problem.prior.weights()[0];
    Ok(match b {
        Builtin::Polarization(u) if (p - 0.5).abs() < 1e-15 => Some(polarization_alpha(u.beta)?),
        Builtin::Retailer => Some(retailer_alpha(p)?),
        _ => None,
    })
}

impl CertificateSpec {
    pub fn certificate(&self, loaded: &LoadedProblem) -> CliResult<DualCertificate> {
        let problem = &loaded.problem;
        let k = problem.num_states();
        let n = problem.receivers;
        let cert = match self {
            CertificateSpec::Builtin => {
                let b = loaded
                    .builtin
                    .as_ref()
                    .ok_or_else(|| input("a builtin certificate needs a builtin utility"))?;
                if let Builtin::Constant(c) = b {
                    DualCertificate {
                        v: vec![*c; k],
                        receivers: n,
                        phi: PhiRepr::Zero,
                    }
                } else {
                    let alpha = builtin_certificate(b, problem)?
                        .ok_or_else(|| input(format!("no closed-form certificate for {b:?} at this prior")))?;
                    alpha_to_phi(&alpha)
                }
            }
            CertificateSpec::Zero { v } => DualCertificate {
                v: v.clone(),
                receivers: n,
                phi: PhiRepr::Zero,
            },
            CertificateSpec::Alpha { alpha, v_low, v_high } => {
                if k != 2 {
                    return Err(input("alpha certificates need two states"));
                }
                let f = alpha.function()?;
                alpha_to_phi(&AlphaCertificate {
                    alphas: vec![f; n],
                    v_low: *v_low,
                    v_high: *v_high,
                })
            }
            CertificateSpec::Grid { resolution, v, phi } => {
                let grid = GridSpec::new(k, *resolution, persuade_core::grid::DEFAULT_CAP)?;
                let shape_ok = phi.len() == n && phi.iter().all(|r| r.len() == k && r.iter().all(|s| s.len() == grid.len()));
                if !shape_ok {
                    return Err(input(format!("grid certificate needs phi[{n}][{k}][{}]", grid.len())));
                }
                DualCertificate {
                    v: v.clone(),
                    receivers: n,
                    phi: PhiRepr::Grid {
                        grid,
                        values: phi.clone(),
                    },
                }
            }
        };
        if cert.v.len() != k {
            return Err(input(format!("certificate has {} constants for {k} states", cert.v.len())));
        }
        Ok(cert)
    }

    pub fn from_certificate(cert: &DualCertificate) -> Option<Self> {
        match &cert.phi {
            PhiRepr::Zero => Some(CertificateSpec::Zero { v: cert.v.clone() }),
            PhiRepr::Grid { grid, values } => Some(CertificateSpec::Grid {
                resolution: grid.resolution(),
                v: cert.v.clone(),
                phi: values.clone(),
            }),
            PhiRepr::Alpha(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSpec {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportFile {
    pub schema_version: u32,
    pub marginals: Vec<MarginalSpec>,
    pub utility: TupleUtilitySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TupleUtilitySpec {
    /// `Π z_i`.
    Product,
    /// `(Σ z_i)²`.
    SumSquared,
    /// `|z_1 - z_2|^β`, two marginals only.
    AbsDiff { beta: f64 },
    /// `Π z_i` with the sign flipped.
    NegProduct,
    /// Values over the product of the marginal supports in the order the
    /// atoms are listed, marginal 0 most significant.
    Table { values: Vec<f64> },
}

impl TransportFile {
    pub fn load(&self) -> CliResult<TransportInstance> {
        check_version(self.schema_version)?;
        let marginals = self
            .marginals
            .iter()
            .map(|m| {
                if m.atoms.len() != m.weights.len() {
                    return Err(input("marginal atoms and weights differ in length"));
                }
                Ok(Distribution::new(m.atoms.iter().copied().zip(m.weights.iter().copied()).collect())?)
            })
            .collect::<CliResult<Vec<_>>>()?;
        let n = marginals.len();
        let utility: TupleFn = match &self.utility {
            TupleUtilitySpec::Product => Arc::new(|z: &[f64]| z.iter().product()),
            TupleUtilitySpec::NegProduct => Arc::new(|z: &[f64]| -z.iter().product::<f64>()),
            TupleUtilitySpec::SumSquared => Arc::new(|z: &[f64]| z.iter().sum::<f64>().powi(2)),
            TupleUtilitySpec::AbsDiff { beta } => {
                if n != 2 {
                    return Err(input("abs_diff needs exactly two marginals"));
                }
                let beta = *beta;
                Arc::new(move |z: &[f64]| (z[0] - z[1]).abs().powf(beta))
            }
            TupleUtilitySpec::Table { values } => {
                let lists: Vec<Vec<f64>> = self.marginals.iter().map(|m| m.atoms.clone()).collect();
                let size: usize = lists.iter().map(Vec::len).product();
                if values.len() != size {
                    return Err(input(format!("table needs {size} values, got {}", values.len())));
                }
                let values = values.clone();
                Arc::new(move |z: &[f64]| {
                    let flat = z.iter().zip(&lists).fold(0, |acc, (x, atoms)| {
                        let j = atoms.iter().position(|a| (a - x).abs() <= 1e-9).expect("tuple atom in support");
                        acc * atoms.len() + j
                    });
                    values[flat]
                })
            }
        };
        Ok(TransportInstance::new(marginals, utility)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(json: &str) -> CliResult<LoadedProblem> {
        serde_json::from_str::<ProblemFile>(json).map_err(|e| input(e.to_string()))?.load()
    }

    #[test]
    fn loads_builtins() {
        let p = problem(r#"{"schema_version":1,"prior":[0.5,0.5],"utility":{"kind":"builtin","name":"polarization","params":{"beta":2}}}"#)
            .unwrap();
        assert_eq!(p.problem.evaluate(0, &BeliefProfile::binary(&[0.0, 0.5])), 0.25);
        assert!(problem(r#"{"schema_version":1,"prior":[0.5,0.5],"utility":{"kind":"builtin","name":"nope"}}"#).is_err());
        assert!(problem(r#"{"schema_version":1,"prior":[0.5,0.5],"utility":{"kind":"builtin","name":"morale","params":{"x":1}}}"#).is_err());
        assert!(problem(r#"{"schema_version":2,"prior":[0.5,0.5],"utility":{"kind":"builtin","name":"morale"}}"#).is_err());
    }

    #[test]
    fn loader_matches_closed_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        type Closed = Box<dyn Fn(f64, f64) -> [f64; 2]>;
        let cases: Vec<(&str, Closed)> = vec![
            (
                r#"{"kind":"builtin","name":"polarization","params":{"beta":1.5}}"#,
                Box::new(|a: f64, b: f64| [(a - b).abs().powf(1.5); 2]),
            ),
            (r#"{"kind":"builtin","name":"retailer"}"#, Box::new(|a: f64, b: f64| [(a - b).abs(); 2])),
            (r#"{"kind":"builtin","name":"morale"}"#, Box::new(|a: f64, b: f64| [1.0 - a.min(b), 0.0])),
            (
                r#"{"kind":"builtin","name":"duopoly"}"#,
                Box::new(|a: f64, b: f64| [-(1.0 - (-2.0 * (1.0 - a + 2.0 * b)).exp()), 0.0]),
            ),
            (
                r#"{"kind":"builtin","name":"discord"}"#,
                Box::new(|a: f64, b: f64| [(a - b).abs() * (a - 0.5).abs() * (b - 0.5).abs(); 2]),
            ),
            (
                r#"{"kind":"builtin","name":"public_option","params":{"alpha":0.7}}"#,
                Box::new(|a: f64, b: f64| {
                    let q = 2.0 - a - b;
                    [0.7 * q - q.sqrt() / 3.0, 0.7 * q - q.sqrt()]
                }),
            ),
        ];
        for (spec, closed) in cases {
            let p = problem(&format!(r#"{{"schema_version":1,"prior":[0.4,0.6],"utility":{spec}}}"#)).unwrap();
            for _ in 0..1000 {
                let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                let want = closed(a, b);
                for (w, want) in want.into_iter().enumerate() {
                    let got = p.problem.evaluate(w, &BeliefProfile::binary(&[a, b]));
                    assert!((got - want).abs() <= 1e-12, "{spec} at ({a}, {b}) state {w}: {got} vs {want}");
                }
            }
        }
    }
}
