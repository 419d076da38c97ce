//! The fixed-point operator of the integral equation: a value term g(x,y,z,
//! h(u)(x,y,z)) plus the prefix integral of K against f1(u) plus the
//! truncated improper integral of F against f2(u).

use crate::certify::LipschitzData;
use crate::cubature::{fredholm_field, volterra_prefix, KernelSpec};
use crate::error::{Error, Result};
use crate::expr::{Bindings, Expression, VarSet};
use crate::grid::{same_domain, Domain, Field3D};

/// One concrete equation: the data (g, h, K∘f1, F∘f2), the declared
/// Lipschitz constants, and the computational box.
///
/// The maps h, f1, f2 act pointwise: each is an expression H(x, y, z, v)
/// applied to the value of u at the point in question.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    g: Expression,
    h_map: Expression,
    volterra: KernelSpec,
    fredholm: KernelSpec,
    pub lip: LipschitzData,
    domain: Domain,
}

impl ProblemInstance {
    pub fn new(
        g: Expression,
        h_map: Expression,
        volterra: KernelSpec,
        fredholm: KernelSpec,
        lip: LipschitzData,
        domain: Domain,
    ) -> Result<Self> {
        for (context, e) in [("the value map g", &g), ("the pointwise map h", &h_map)] {
            let free = e.free_vars();
            if !free.is_subset_of(VarSet::XYZV) {
                return Err(Error::ExprVariables {
                    context: context.into(),
                    allowed: VarSet::XYZV.names(),
                    found: free.names(),
                });
            }
        }
        Ok(ProblemInstance {
            g,
            h_map,
            volterra,
            fredholm,
            lip,
            domain,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn g(&self) -> &Expression {
        &self.g
    }

    pub fn h_map(&self) -> &Expression {
        &self.h_map
    }

    pub fn volterra(&self) -> &KernelSpec {
        &self.volterra
    }

    pub fn fredholm(&self) -> &KernelSpec {
        &self.fredholm
    }

    /// The value term g(x, y, z, h(u)(x, y, z)) on the grid.
    pub fn value_term(&self, u: &Field3D) -> Result<Field3D> {
        let n = self.domain.grid_nodes();
        let mut out = Field3D::zeros(self.domain);
        for i in 0..n {
            let x = self.domain.coord(i);
            for j in 0..n {
                let y = self.domain.coord(j);
                for k in 0..n {
                    let z = self.domain.coord(k);
                    let hv = self
                        .h_map
                        .eval(&Bindings::xyzv(x, y, z, u.get(i, j, k)))
                        .map_err(|e| e.at_node(i, j, k))?;
                    let gv = self
                        .g
                        .eval(&Bindings::xyzv(x, y, z, hv))
                        .map_err(|e| e.at_node(i, j, k))?;
                    out.set(i, j, k, gv);
                }
            }
        }
        Ok(out)
    }

    /// Apply the operator: value term + prefix integral + truncated
    /// improper integral, summed left to right at each node.
    pub fn apply(&self, u: &Field3D) -> Result<Field3D> {
        if *u.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let mut out = self.value_term(u)?;
        let vol = volterra_prefix(&self.volterra, u)?;
        let fre = fredholm_field(&self.fredholm, u)?;
        for ((o, v), f) in out
            .values_mut()
            .iter_mut()
            .zip(vol.values())
            .zip(fre.values())
        {
            *o = *o + *v + *f;
        }
        Ok(out)
    }

    /// Pointwise |u - A(u)|; vanishes at a fixed point.
    pub fn residual(&self, u: &Field3D) -> Result<Field3D> {
        let applied = self.apply(u)?;
        let mut out = applied;
        for (o, uv) in out.values_mut().iter_mut().zip(u.values()) {
            *o = (uv - *o).abs();
        }
        Ok(out)
    }
}

impl ProblemInstance {
    /// The same equation on a different box discretization.
    pub fn with_domain(&self, domain: Domain) -> ProblemInstance {
        ProblemInstance {
            g: self.g.clone(),
            h_map: self.h_map.clone(),
            volterra: self.volterra.clone(),
            fredholm: self.fredholm.clone(),
            lip: self.lip.clone(),
            domain,
        }
    }
}

/// Richardson-style estimate of the quadrature error in A(u): apply the
/// operator on the full grids and on grids with roughly half the nodes per
/// axis, and take the largest disagreement at the shared (coarse) nodes.
/// Feeds the default verdict slack of the stability checks.
pub fn quadrature_error_estimate(p: &ProblemInstance, u: &Field3D) -> Result<f64> {
    let d = *p.domain();
    let coarse_n = d.grid_nodes().div_ceil(2).max(3);
    let coarse_m = d.fredholm_nodes().div_ceil(2).max(3);
    let coarse_domain = d.with_resolution(coarse_n, coarse_m)?;
    let coarse_p = p.with_domain(coarse_domain);

    let mut coarse_u = Field3D::zeros(coarse_domain);
    for i in 0..coarse_n {
        let x = coarse_domain.coord(i);
        for j in 0..coarse_n {
            let y = coarse_domain.coord(j);
            for k in 0..coarse_n {
                let z = coarse_domain.coord(k);
                coarse_u.set(i, j, k, u.interp_clamped(x, y, z));
            }
        }
    }

    let fine = p.apply(u)?;
    let coarse = coarse_p.apply(&coarse_u)?;
    let mut worst = 0.0f64;
    for i in 0..coarse_n {
        let x = coarse_domain.coord(i);
        for j in 0..coarse_n {
            let y = coarse_domain.coord(j);
            for k in 0..coarse_n {
                let z = coarse_domain.coord(k);
                let diff = (fine.interp_clamped(x, y, z) - coarse.get(i, j, k)).abs();
                worst = worst.max(diff);
            }
        }
    }
    Ok(worst)
}

/// Pointwise |u - v|.
pub fn abs_diff(u: &Field3D, v: &Field3D) -> Result<Field3D> {
    same_domain(u, v)?;
    let mut out = u.clone();
    for (o, b) in out.values_mut().iter_mut().zip(v.values()) {
        *o = (*o - b).abs();
    }
    Ok(out)
}
