//! Stability harness: manufacture perturbed approximate solutions, derive
//! an admissible increasing tolerance function phi, and verify the
//! Hyers-Ulam-Rassias bound |u - u*| <= C * phi pointwise.
//!
//! The harness also checks the scalar integral-inequality step the bound
//! rests on: a field dominated by phi/(1-l_g N) plus a kernel-mass multiple
//! of its own sup stays below (phi/(1-l_g N)) * exp(m/(1-l_g N)).

use crate::certify::ContractionCertificate;
use crate::error::{Error, Result};
use crate::expr::{Expression, VarSet};
use crate::grid::{axpy, same_domain, Field3D};
use crate::operator::{abs_diff, ProblemInstance};

/// How the tolerance function phi is chosen for a stability check.
#[derive(Debug, Clone)]
pub enum PhiMode {
    /// Smallest coordinate-wise nondecreasing majorant of the measured
    /// residual; the strictest admissible choice.
    Derived,
    /// User-supplied expression over {x,y,z}; must be nonnegative and
    /// nondecreasing in each variable on the grid.
    Given(Expression),
}

/// An additive perturbation u = u* + epsilon * shape plus the phi policy.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub shape: Expression,
    pub epsilon: f64,
    pub phi: PhiMode,
}

impl PerturbationSpec {
    pub fn new(shape: Expression, epsilon: f64, phi: PhiMode) -> Result<Self> {
        let free = shape.free_vars();
        if !free.is_subset_of(VarSet::XYZ) {
            return Err(Error::ExprVariables {
                context: "a perturbation shape".into(),
                allowed: VarSet::XYZ.names(),
                found: free.names(),
            });
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite (got {epsilon})"
            )));
        }
        if let PhiMode::Given(e) = &phi {
            let free = e.free_vars();
            if !free.is_subset_of(VarSet::XYZ) {
                return Err(Error::ExprVariables {
                    context: "phi".into(),
                    allowed: VarSet::XYZ.names(),
                    found: free.names(),
                });
            }
        }
        Ok(PerturbationSpec {
            shape,
            epsilon,
            phi,
        })
    }
}

/// Verdict of one stability check.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub residual: Field3D,
    pub phi: Field3D,
    /// C * phi.
    pub bound: Field3D,
    /// |u - u*|.
    pub diff: Field3D,
    /// min over nodes of bound - diff.
    pub min_slack: f64,
    /// max over nodes of diff / phi where phi > 0: the smallest constant
    /// that would have sufficed, reported as a diagnostic.
    pub observed_ratio: f64,
    /// residual <= phi everywhere, i.e. u really is an approximate
    /// solution at tolerance phi.
    pub admissible: bool,
    pub hur_holds: bool,
    pub hur_constant: f64,
    pub tol_disc: f64,
}

/// u = u* + epsilon * shape on u*'s grid.
pub fn make_perturbed(u_star: &Field3D, spec: &PerturbationSpec) -> Result<Field3D> {
    let shape = Field3D::sample(&spec.shape, *u_star.domain())?;
    axpy(spec.epsilon, &shape, u_star)
}

/// Smallest coordinate-wise nondecreasing majorant of a nonnegative field,
/// via a running max along each axis in turn.
pub fn derive_phi(residual: &Field3D) -> Field3D {
    let mut phi = residual.clone();
    let n = phi.domain().grid_nodes();
    for i in 1..n {
        for j in 0..n {
            for k in 0..n {
                let m = phi.get(i - 1, j, k).max(phi.get(i, j, k));
                phi.set(i, j, k, m);
            }
        }
    }
    for j in 1..n {
        for i in 0..n {
            for k in 0..n {
                let m = phi.get(i, j - 1, k).max(phi.get(i, j, k));
                phi.set(i, j, k, m);
            }
        }
    }
    for k in 1..n {
        for i in 0..n {
            for j in 0..n {
                let m = phi.get(i, j, k - 1).max(phi.get(i, j, k));
                phi.set(i, j, k, m);
            }
        }
    }
    phi
}

fn is_monotone_nondecreasing(f: &Field3D) -> bool {
    let n = f.domain().grid_nodes();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = f.get(i, j, k);
                if i > 0 && f.get(i - 1, j, k) > v {
                    return false;
                }
                if j > 0 && f.get(i, j - 1, k) > v {
                    return false;
                }
                if k > 0 && f.get(i, j, k - 1) > v {
                    return false;
                }
            }
        }
    }
    true
}

/// Verify the stability bound for one perturbed field `u` against the
/// solved `u_star`, with verdict slack `tol_disc` absorbing the
/// discretization of both sides.
pub fn check_hur(
    p: &ProblemInstance,
    u: &Field3D,
    u_star: &Field3D,
    cert: &ContractionCertificate,
    spec: &PerturbationSpec,
    tol_disc: f64,
) -> Result<StabilityReport> {
    let hur_constant = cert.hur_constant.ok_or(Error::CertificateIncomplete)?;
    same_domain(u, u_star)?;

    let residual = p.residual(u)?;
    let phi = match &spec.phi {
        PhiMode::Derived => derive_phi(&residual),
        PhiMode::Given(e) => {
            let phi = Field3D::sample(e, *u.domain())?;
            if phi.min_value() < 0.0 {
                return Err(Error::InvalidPhi("phi must be nonnegative".into()));
            }
            if !is_monotone_nondecreasing(&phi) {
                return Err(Error::InvalidPhi(
                    "phi must be nondecreasing in each variable".into(),
                ));
            }
            phi
        }
    };

    let diff = abs_diff(u, u_star)?;
    let mut bound = phi.clone();
    for b in bound.values_mut() {
        *b *= hur_constant;
    }

    let mut min_slack = f64::INFINITY;
    let mut observed_ratio = 0.0f64;
    let mut admissible = true;
    for ((b, d), (r, ph)) in bound
        .values()
        .iter()
        .zip(diff.values())
        .zip(residual.values().iter().zip(phi.values()))
    {
        min_slack = min_slack.min(b - d);
        if *ph > 0.0 {
            observed_ratio = observed_ratio.max(d / ph);
        }
        if *r > *ph {
            admissible = false;
        }
    }
    let hur_holds = admissible && min_slack >= -tol_disc;

    Ok(StabilityReport {
        residual,
        phi,
        bound,
        diff,
        min_slack,
        observed_ratio,
        admissible,
        hur_holds,
        hur_constant,
        tol_disc,
    })
}

/// Scalar-kernel integral-inequality check: with lambda = 1 - l_g N,
/// premise is `psi <= phi/lambda + (weight_integral/lambda) * sup(psi)`
/// pointwise, conclusion is `psi <= (phi/lambda) * exp(m/lambda)`
/// pointwise. Returns (premise_holds, conclusion_holds).
pub fn gronwall_check(
    psi: &Field3D,
    phi: &Field3D,
    weight_integral: f64,
    lg_n: f64,
    m: f64,
) -> Result<(bool, bool)> {
    if !(0.0..1.0).contains(&lg_n) {
        return Err(Error::LgNOutOfRange(lg_n));
    }
    same_domain(psi, phi)?;
    let lambda = 1.0 - lg_n;
    let sup_psi = psi.values().iter().fold(0.0f64, |a, b| a.max(*b));
    let feedback = weight_integral * sup_psi / lambda;
    let amplification = (m / lambda).exp();

    let mut premise = true;
    let mut conclusion = true;
    for (p, ph) in psi.values().iter().zip(phi.values()) {
        if *p > ph / lambda + feedback {
            premise = false;
        }
        if *p > (ph / lambda) * amplification {
            conclusion = false;
        }
    }
    Ok((premise, conclusion))
}
