//! Problem-file ingestion: JSON schema, validation, and round-trip
//! serialization.
//!
//! A problem file has five sections: `problem` (expression strings),
//! `lipschitz` (declared constants plus kernel bound expressions),
//! `domain`, optional `solver`, and optional `stability`. Unknown keys are
//! rejected.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::certify::LipschitzData;
use crate::cubature::KernelSpec;
use crate::error::{Error, Result};
use crate::expr::{Expression, VarSet};
use crate::grid::Domain;
use crate::operator::ProblemInstance;
use crate::report::Json;
use crate::solver::{SolveOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::stability::{PerturbationSpec, PhiMode};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    problem: ProblemSection,
    lipschitz: LipschitzSection,
    domain: DomainSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    stability: Option<StabilitySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    g: String,
    h: String,
    f1: String,
    f2: String,
    #[serde(rename = "K")]
    k: String,
    #[serde(rename = "F")]
    f: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LipschitzSection {
    l_g: f64,
    l_h: f64,
    #[serde(rename = "N")]
    n: f64,
    l_f1: f64,
    l_f2: f64,
    l_1: f64,
    l_2: f64,
    alpha: f64,
    m: f64,
    #[serde(rename = "l_K")]
    l_k: String,
    #[serde(rename = "l_F")]
    l_f: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainSection {
    #[serde(rename = "L")]
    edge: f64,
    n: usize,
    #[serde(rename = "R")]
    radius: f64,
    m_nodes: usize,
    tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilitySection {
    shape: String,
    epsilon: f64,
    #[serde(default)]
    phi: Option<String>,
    #[serde(default)]
    tol_disc: Option<f64>,
}

/// Stability settings carried alongside an instance.
#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub spec: PerturbationSpec,
    /// Verdict slack; when absent the caller derives it from the solver
    /// tolerance and a quadrature error estimate.
    pub tol_disc: Option<f64>,
}

/// A fully validated problem file.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub instance: ProblemInstance,
    pub solver: SolveOptions,
    pub stability: Option<StabilityConfig>,
}

fn parse_expr(text: &str, allowed: VarSet, field: &str) -> Result<Expression> {
    Expression::parse(text, allowed).map_err(|e| e.in_field(field))
}

pub fn load_problem_str(text: &str) -> Result<LoadedProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Schema {
        msg: e.to_string(),
    })?;

    let d = &file.domain;
    let domain = Domain::new(d.edge, d.n, d.radius, d.m_nodes, d.tau)
        .map_err(|e| e.in_field("domain"))?;

    let p = &file.problem;
    let g = parse_expr(&p.g, VarSet::XYZV, "problem.g")?;
    let h = parse_expr(&p.h, VarSet::XYZV, "problem.h")?;
    let f1 = parse_expr(&p.f1, VarSet::XYZV, "problem.f1")?;
    let f2 = parse_expr(&p.f2, VarSet::XYZV, "problem.f2")?;
    let k = parse_expr(&p.k, VarSet::ALL, "problem.K")?;
    let f = parse_expr(&p.f, VarSet::ALL, "problem.F")?;

    let l = &file.lipschitz;
    let l_k = parse_expr(&l.l_k, VarSet::XYZRST, "lipschitz.l_K")?;
    let l_f = parse_expr(&l.l_f, VarSet::XYZRST, "lipschitz.l_F")?;
    let lip = LipschitzData::new(
        l.l_g, l.l_h, l.n, l.l_f1, l.l_f2, l.l_1, l.l_2, l.alpha, l.m, l_k, l_f,
    )
    .map_err(|e| e.in_field("lipschitz"))?;

    let volterra = KernelSpec::new(k, f1).map_err(|e| e.in_field("problem.f1"))?;
    let fredholm = KernelSpec::new(f, f2).map_err(|e| e.in_field("problem.f2"))?;
    let instance = ProblemInstance::new(g, h, volterra, fredholm, lip, domain)?;

    let s = &file.solver;
    if !(s.tol.is_finite() && s.tol > 0.0) {
        return Err(Error::Schema {
            msg: format!("solver.tol must be positive (got {})", s.tol),
        });
    }
    if s.max_iter == 0 {
        return Err(Error::Schema {
            msg: "solver.max_iter must be >= 1".into(),
        });
    }
    let solver = SolveOptions {
        tol: s.tol,
        max_iter: s.max_iter,
    };

    let stability = match &file.stability {
        None => None,
        Some(st) => {
            let shape = parse_expr(&st.shape, VarSet::XYZ, "stability.shape")?;
            let phi = match &st.phi {
                None => PhiMode::Derived,
                Some(text) => {
                    PhiMode::Given(parse_expr(text, VarSet::XYZ, "stability.phi")?)
                }
            };
            if let Some(td) = st.tol_disc {
                if !(td.is_finite() && td >= 0.0) {
                    return Err(Error::Schema {
                        msg: format!("stability.tol_disc must be >= 0 (got {td})"),
                    });
                }
            }
            let spec = PerturbationSpec::new(shape, st.epsilon, phi)
                .map_err(|e| e.in_field("stability"))?;
            Some(StabilityConfig {
                spec,
                tol_disc: st.tol_disc,
            })
        }
    };

    Ok(LoadedProblem {
        instance,
        solver,
        stability,
    })
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = fs::read_to_string(path)?;
    load_problem_str(&text)
}

/// Serialize back to the problem-file schema; expressions are written in
/// canonical form, so reloading evaluates identically.
pub fn problem_to_json(lp: &LoadedProblem) -> Json {
    let p = &lp.instance;
    let lip = &p.lip;
    let d = p.domain();

    let mut doc = Json::obj().field(
        "problem",
        Json::obj()
            .field("g", Json::str(&p.g().canonical()))
            .field("h", Json::str(&p.h_map().canonical()))
            .field("f1", Json::str(&p.volterra().inner_map().canonical()))
            .field("f2", Json::str(&p.fredholm().inner_map().canonical()))
            .field("K", Json::str(&p.volterra().expr().canonical()))
            .field("F", Json::str(&p.fredholm().expr().canonical())),
    );
    doc = doc.field(
        "lipschitz",
        Json::obj()
            .field("l_g", Json::num(lip.l_g))
            .field("l_h", Json::num(lip.l_h))
            .field("N", Json::num(lip.n_pointwise))
            .field("l_f1", Json::num(lip.l_f1))
            .field("l_f2", Json::num(lip.l_f2))
            .field("l_1", Json::num(lip.l_1))
            .field("l_2", Json::num(lip.l_2))
            .field("alpha", Json::num(lip.alpha))
            .field("m", Json::num(lip.mass))
            .field("l_K", Json::str(&lip.l_k_bound.canonical()))
            .field("l_F", Json::str(&lip.l_f_bound.canonical())),
    );
    doc = doc.field(
        "domain",
        Json::obj()
            .field("L", Json::num(d.edge()))
            .field("n", Json::Int(d.grid_nodes() as i64))
            .field("R", Json::num(d.fredholm_radius()))
            .field("m_nodes", Json::Int(d.fredholm_nodes() as i64))
            .field("tau", Json::num(d.tau())),
    );
    doc = doc.field(
        "solver",
        Json::obj()
            .field("tol", Json::num(lp.solver.tol))
            .field("max_iter", Json::Int(lp.solver.max_iter as i64)),
    );
    if let Some(st) = &lp.stability {
        let mut sec = Json::obj()
            .field("shape", Json::str(&st.spec.shape.canonical()))
            .field("epsilon", Json::num(st.spec.epsilon));
        if let PhiMode::Given(e) = &st.spec.phi {
            sec = sec.field("phi", Json::str(&e.canonical()));
        }
        if let Some(td) = st.tol_disc {
            sec = sec.field("tol_disc", Json::num(td));
        }
        doc = doc.field("stability", sec);
    }
    doc
}

pub fn write_problem_string(lp: &LoadedProblem) -> String {
    problem_to_json(lp).render()
}
