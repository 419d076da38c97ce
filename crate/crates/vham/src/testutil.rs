//! Ready-made problem instances and random fields, shared by the unit,
//! integration, and acceptance test suites.

use rand::Rng;

use crate::certify::LipschitzData;
use crate::cubature::KernelSpec;
use crate::expr::{Expression, VarSet};
use crate::grid::{Domain, Field3D};
use crate::operator::ProblemInstance;

fn parse_all(text: &str) -> Expression {
    Expression::parse(text, VarSet::ALL).expect("fixture expression")
}

/// Instance with inert Lipschitz data, for operator-level tests.
pub fn instance_from_exprs(g: &str, h: &str, k: &str, f: &str, domain: Domain) -> ProblemInstance {
    let lip = LipschitzData::new(
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        parse_all("0"),
        parse_all("0"),
    )
    .unwrap();
    instance_with_lip(g, h, k, f, lip, domain)
}

pub fn instance_with_lip(
    g: &str,
    h: &str,
    k: &str,
    f: &str,
    lip: LipschitzData,
    domain: Domain,
) -> ProblemInstance {
    ProblemInstance::new(
        Expression::parse(g, VarSet::XYZV).unwrap(),
        Expression::parse(h, VarSet::XYZV).unwrap(),
        KernelSpec::pointwise(parse_all(k)),
        KernelSpec::pointwise(parse_all(f)),
        lip,
        domain,
    )
    .unwrap()
}

/// Affine prefix-kernel instance: u = 1 + lambda * prefix-integral of u on
/// [0,1]^3 with tau = 1. Its fixed point has the closed series form used
/// as the solver oracle.
pub fn lin_instance(lambda: f64, n: usize) -> ProblemInstance {
    let domain = Domain::new(1.0, n, 10.0, 17, 1.0).unwrap();
    let lip = LipschitzData::new(
        0.0,
        1.0,
        1.0,
        1.0,
        1.0,
        lambda,
        0.0,
        1.0,
        lambda.max(1e-6),
        Expression::constant(lambda),
        parse_all("0"),
    )
    .unwrap();
    instance_with_lip(
        "1",
        "v",
        &format!("{lambda}*v"),
        "0",
        lip,
        domain,
    )
}

/// Instance dominated by the truncated improper term, with an
/// exponentially decaying kernel.
pub fn fred_instance(n: usize, m_nodes: usize) -> ProblemInstance {
    let domain = Domain::new(1.0, n, 10.0, m_nodes, 1.0).unwrap();
    let lip = LipschitzData::new(
        0.0,
        1.0,
        1.0,
        1.0,
        1.0,
        0.0,
        0.5,
        1.0,
        0.3,
        parse_all("0"),
        parse_all("0.4*exp(-2*(r+s+t))"),
    )
    .unwrap();
    instance_with_lip(
        "1",
        "v",
        "0",
        "0.4*exp(-2*(r+s+t))*v",
        lip,
        domain,
    )
}

/// Instance exercising all three terms, with a contracting value map.
pub fn mixed_instance(n: usize, m_nodes: usize) -> ProblemInstance {
    let domain = Domain::new(1.0, n, 10.0, m_nodes, 1.0).unwrap();
    let lip = LipschitzData::new(
        0.25,
        1.0,
        1.0,
        1.0,
        1.0,
        0.3,
        0.2,
        1.0,
        0.8,
        Expression::constant(0.3),
        parse_all("0.15*exp(-2*(r+s+t))"),
    )
    .unwrap();
    instance_with_lip(
        "1 + 0.25*v",
        "v",
        "0.3*v",
        "0.15*exp(-2*(r+s+t))*v",
        lip,
        domain,
    )
}

/// The three instances whose certificates pass every check.
pub fn certified_instances(n: usize, m_nodes: usize) -> Vec<ProblemInstance> {
    vec![
        lin_instance(0.5, n),
        fred_instance(n, m_nodes),
        mixed_instance(n, m_nodes),
    ]
}

/// Field with independent uniform values in [-scale, scale].
pub fn random_field<R: Rng>(domain: Domain, rng: &mut R, scale: f64) -> Field3D {
    let mut f = Field3D::zeros(domain);
    for v in f.values_mut() {
        *v = rng.gen_range(-scale..=scale);
    }
    f
}
