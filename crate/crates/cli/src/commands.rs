use std::collections::BTreeMap;
use std::path::Path;

use persuade_core::builtins::Builtin;
use persuade_core::certificates::{beta_max_search, verify_certificate, VerificationOptions};
use persuade_core::feasibility::check_family;
use persuade_core::grid::{solve_grid, GridMethod, GridSpec};
use persuade_core::one_state::{solve_one_state, OneStateInstance, OneStateOptions};
use persuade_core::reductions::{public_signal_value, SupermodularProblem, DEFAULT_SAMPLES};
use persuade_core::transport::{
    assortative, is_supermodular, kantorovich_gap, solve_mk, TransportMethod, SUPERMODULAR_TOL,
};
use serde::Serialize;

use crate::error::{input, CliResult, EXIT_NEGATIVE, EXIT_OK};
use crate::output::emit;
use crate::schema::{
    atoms_of, family_atoms, read, AtomSpec, CertificateFile, CertificateSpec, FamilyFile, LoadedProblem, ProblemFile,
    TransportFile, SCHEMA_VERSION,
};

/// Print the human summary where it does not mix with the JSON report.
fn summary(out: Option<&Path>, lines: &[String]) {
    for l in lines {
        if out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Primal,
    Dual,
    DualBinary,
    OneState,
    Supermodular,
}

impl SolveMethod {
    pub fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "primal" => SolveMethod::Primal,
            "dual" => SolveMethod::Dual,
            "dual-binary" => SolveMethod::DualBinary,
            "one-state" => SolveMethod::OneState,
            "supermodular" => SolveMethod::Supermodular,
            other => {
                return Err(input(format!(
                    "unknown method {other:?}; expected primal, dual, dual-binary, one-state or supermodular"
                )))
            }
        })
    }

    fn name(self) -> &'static str {
        match self {
            SolveMethod::Primal => "primal",
            SolveMethod::Dual => "dual",
            SolveMethod::DualBinary => "dual-binary",
            SolveMethod::OneState => "one-state",
            SolveMethod::Supermodular => "supermodular",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SplitAtom {
    pub belief: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct OneStateSection {
    pub state: usize,
    pub pi: Vec<AtomSpec>,
    /// `binding[receiver][state]`.
    pub binding: Vec<Vec<bool>>,
    pub max_violation: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub utility: String,
    pub method: &'static str,
    pub label: &'static str,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<Vec<AtomSpec>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_state: Option<OneStateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<Vec<SplitAtom>>,
    pub diagnostics: BTreeMap<&'static str, f64>,
}

fn one_state_of(loaded: &LoadedProblem) -> CliResult<OneStateInstance> {
    if let Some(w) = loaded.builtin.as_ref().and_then(Builtin::one_state) {
        return Ok(OneStateInstance::new(loaded.problem.clone(), w)?);
    }
    (0..loaded.problem.num_states())
        .find_map(|w| OneStateInstance::new(loaded.problem.clone(), w).ok())
        .ok_or_else(|| input("method one-state needs a utility that vanishes in all but one state"))
}

pub fn solve_report(loaded: &LoadedProblem, method: SolveMethod, m: usize) -> CliResult<SolveReport> {
    let problem = &loaded.problem;
    let mut report = SolveReport {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        utility: problem.utility.describe(),
        method: method.name(),
        label: "value",
        value: f64::NAN,
        grid: None,
        family: None,
        certificate: None,
        one_state: None,
        splitting: None,
        diagnostics: BTreeMap::new(),
    };
    match method {
        SolveMethod::Primal | SolveMethod::Dual | SolveMethod::DualBinary => {
            let gm = match method {
                SolveMethod::Primal => GridMethod::Primal,
                SolveMethod::Dual => GridMethod::Dual,
                _ => GridMethod::DualBinary,
            };
            let grid = GridSpec::new(problem.num_states(), m, persuade_core::grid::DEFAULT_CAP)?;
            let r = solve_grid(problem, &grid, gm)?;
            report.label = r.label;
            report.value = r.value;
            report.grid = Some(m);
            report.family = r.family.as_ref().map(family_atoms);
            report.certificate = r.certificate.as_ref().and_then(CertificateSpec::from_certificate);
            report.diagnostics.insert("lp_gap", r.gap);
            report.diagnostics.insert("lp_iterations", r.lp_iterations as f64);
            report.diagnostics.insert("variables", r.variables as f64);
            report.diagnostics.insert("constraints", r.constraints as f64);
        }
        SolveMethod::OneState => {
            let inst = one_state_of(loaded)?;
            let s = solve_one_state(&inst, &OneStateOptions::default())?;
            report.value = s.value;
            report.one_state = Some(OneStateSection {
                state: inst.omega0,
                pi: atoms_of(&s.pi),
                binding: s.binding,
                max_violation: s.report.max_violation,
            });
            report.diagnostics.insert("lp_solves", s.lp_solves as f64);
        }
        SolveMethod::Supermodular => {
            let alpha = match &loaded.builtin {
                Some(Builtin::PublicOption(u)) => u.alpha,
                _ => return Err(input("method supermodular is available for the public_option builtin")),
            };
            let sp = SupermodularProblem::public_option(alpha, problem.prior.weights()[0])?;
            let r = public_signal_value(&sp, DEFAULT_SAMPLES)?;
            report.value = r.value;
            report.splitting = Some(
                r.splitting
                    .atoms()
                    .iter()
                    .map(|(b, w)| SplitAtom {
                        belief: b.weights().to_vec(),
                        weight: *w,
                    })
                    .collect(),
            );
            report.diagnostics.insert("samples", DEFAULT_SAMPLES as f64);
        }
    }
    Ok(report)
}

pub fn solve(problem: &Path, method: SolveMethod, m: usize, out: Option<&Path>) -> CliResult<u8> {
    let loaded = read::<ProblemFile>(problem)?.load()?;
    let report = solve_report(&loaded, method, m)?;
    emit(&report, out)?;
    summary(
        out,
        &[format!("{} {} ({}): {:.12}", report.utility, report.method, report.label, report.value)],
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct ViolationRow {
    pub receiver: usize,
    pub state: usize,
    pub description: String,
    pub amount: f64,
}

#[derive(Debug, Serialize)]
pub struct FeasibleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub feasible: bool,
    pub max_violation: f64,
    pub tol: f64,
    pub violations: Vec<ViolationRow>,
}

pub fn feasible(family: &Path, tol: f64, out: Option<&Path>) -> CliResult<u8> {
    let (fam, prior) = read::<FamilyFile>(family)?.load()?;
    let r = check_family(&fam, &prior, tol)?;
    let report = FeasibleReport {
        schema_version: SCHEMA_VERSION,
        command: "feasible",
        feasible: r.feasible,
        max_violation: r.max_violation,
        tol,
        violations: r
            .violated_constraints
            .iter()
            .map(|v| ViolationRow {
                receiver: v.receiver,
                state: v.state,
                description: v.description.clone(),
                amount: v.amount,
            })
            .collect(),
    };
    emit(&report, out)?;
    summary(
        out,
        &[format!(
            "{}: max violation {:e} (tol {tol:e})",
            if r.feasible { "feasible" } else { "infeasible" },
            r.max_violation
        )],
    );
    Ok(if r.feasible { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub utility: String,
    pub representation: &'static str,
    pub feasible: bool,
    pub max_violation: f64,
    pub worst_state: usize,
    pub worst_profile: Vec<f64>,
    pub bound: f64,
    pub qualifier: &'static str,
    pub margin: f64,
    pub samples: usize,
    pub tol: f64,
}

pub fn certify(
    problem: &Path,
    certificate: Option<&Path>,
    samples: usize,
    tol: f64,
    out: Option<&Path>,
) -> CliResult<u8> {
    let loaded = read::<ProblemFile>(problem)?.load()?;
    let spec = match certificate {
        Some(path) => {
            let file = read::<CertificateFile>(path)?;
            if file.schema_version != SCHEMA_VERSION {
                return Err(input(format!("unsupported schema_version {}", file.schema_version)));
            }
            file.certificate
        }
        None => CertificateSpec::Builtin,
    };
    let cert = spec.certificate(&loaded)?;
    let opts = VerificationOptions {
        samples,
        tol,
        ..VerificationOptions::default()
    };
    let v = verify_certificate(&loaded.problem, &cert, &opts)?;
    let report = CertifyReport {
        schema_version: SCHEMA_VERSION,
        command: "certify",
        utility: loaded.problem.utility.describe(),
        representation: cert.representation(),
        feasible: v.feasible,
        max_violation: v.max_violation,
        worst_state: v.worst_state,
        worst_profile: v.worst_profile.clone(),
        bound: v.bound,
        qualifier: v.qualifier.name(),
        margin: v.margin,
        samples,
        tol,
    };
    emit(&report, out)?;
    summary(
        out,
        &[format!(
            "{}: max violation {:e}, bound {:.12} ({})",
            if v.feasible { "feasible" } else { "infeasible" },
            v.max_violation,
            v.bound,
            v.qualifier.name()
        )],
    );
    Ok(if v.feasible { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Debug, Serialize)]
pub struct PlanAtom {
    pub tuple: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct DualSection {
    pub v: f64,
    pub phi: Vec<Vec<f64>>,
    pub gap: f64,
}

#[derive(Debug, Serialize)]
pub struct TransportReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub method: &'static str,
    pub supermodular: bool,
    pub value: f64,
    pub plan: Vec<PlanAtom>,
    pub marginal_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSection>,
}

pub fn transport(file: &Path, method: &str, out: Option<&Path>) -> CliResult<u8> {
    let inst = read::<TransportFile>(file)?.load()?;
    let supermodular = is_supermodular(&inst, SUPERMODULAR_TOL);
    let chosen = match method {
        "lp" => TransportMethod::Lp,
        "assortative" => TransportMethod::Assortative,
        "auto" if supermodular => TransportMethod::Assortative,
        "auto" => TransportMethod::Lp,
        other => return Err(input(format!("unknown transport method {other:?}; expected lp, assortative or auto"))),
    };
    let (value, coupling, dual) = match chosen {
        TransportMethod::Lp => {
            let s = solve_mk(&inst)?;
            let gap = kantorovich_gap(&inst, &s.coupling, &s.dual, 1e-7)?;
            let dual = DualSection {
                v: s.dual.v,
                phi: s.dual.phi.clone(),
                gap,
            };
            (s.value, s.coupling, Some(dual))
        }
        TransportMethod::Assortative => {
            let plan = assortative(inst.marginals())?;
            (plan.value(&|t: &[f64]| inst.evaluate(t)), plan, None)
        }
    };
    let report = TransportReport {
        schema_version: SCHEMA_VERSION,
        command: "transport",
        method: match chosen {
            TransportMethod::Lp => "lp",
            TransportMethod::Assortative => "assortative",
        },
        supermodular,
        value,
        marginal_error: coupling.marginal_error(inst.marginals())?,
        plan: coupling
            .plan
            .atoms()
            .iter()
            .map(|(t, w)| PlanAtom {
                tuple: t.clone(),
                weight: *w,
            })
            .collect(),
        dual,
    };
    emit(&report, out)?;
    summary(out, &[format!("transport {}: {:.12}", report.method, value)]);
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct BetaReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub steps: usize,
    pub precision: f64,
    pub samples: usize,
    pub tol: f64,
}

pub fn beta_max(precision: f64, samples: usize, tol: f64, out: Option<&Path>) -> CliResult<u8> {
    let opts = VerificationOptions {
        samples,
        tol,
        ..VerificationOptions::default()
    };
    let r = beta_max_search(precision, &opts)?;
    let report = BetaReport {
        schema_version: SCHEMA_VERSION,
        command: "beta-max",
        beta: r.beta,
        lower: r.lower,
        upper: r.upper,
        steps: r.steps,
        precision,
        samples,
        tol,
    };
    emit(&report, out)?;
    summary(out, &[format!("beta_max {:.6} in [{:.6}, {:.6}]", r.beta, r.lower, r.upper)]);
    Ok(EXIT_OK)
}
