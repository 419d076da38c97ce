//! Tensor-product trapezoid cubature for the two integral terms: the
//! prefix (Volterra) triple integral over [0,x]x[0,y]x[0,z] and the
//! truncated improper (Fredholm) integral over [0,R]^3.
//!
//! Composite trapezoid is used throughout because prefix integrals must be
//! available at every grid node and trapezoid prefix sums are well defined
//! for every prefix length. Accepted cost: convergence order 2.
//!
//! Summation order per node is fixed (ascending per axis, innermost axis
//! fastest), so results are bit-for-bit independent of how outer nodes are
//! scheduled; the outer loops of the general paths run on rayon.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expression, Var, VarSet};
use crate::grid::{Domain, Field3D};

/// A kernel under an integral sign: the integrand expression over
/// {x,y,z,r,s,t,v} plus the pointwise map over {x,y,z,v} applied to u
/// before the kernel sees it (`v` defaults to the identity map).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    expr: Expression,
    inner_map: Expression,
}

impl KernelSpec {
    pub fn new(expr: Expression, inner_map: Expression) -> Result<Self> {
        let free = expr.free_vars();
        if !free.is_subset_of(VarSet::ALL) {
            unreachable!("VarSet::ALL covers the vocabulary");
        }
        let map_free = inner_map.free_vars();
        if !map_free.is_subset_of(VarSet::XYZV) {
            return Err(Error::ExprVariables {
                context: "a pointwise map".into(),
                allowed: VarSet::XYZV.names(),
                found: map_free.names(),
            });
        }
        Ok(KernelSpec { expr, inner_map })
    }

    /// Kernel applied directly to u, i.e. with the identity map.
    pub fn pointwise(expr: Expression) -> Self {
        KernelSpec {
            expr,
            inner_map: Expression::var(Var::V),
        }
    }

    pub fn expr(&self) -> &Expression {
        &self.expr
    }

    pub fn inner_map(&self) -> &Expression {
        &self.inner_map
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// Whether the integrand depends on the outer point (x, y, z). If not,
    /// prefix integrals reduce to cumulative sums and the truncated
    /// improper integral to a single quadrature.
    pub fn references_outer(&self) -> bool {
        self.expr.references_any(VarSet::XYZ)
    }

    /// Apply the pointwise map at an inner point.
    fn map_value(&self, r: f64, s: f64, t: f64, u_val: f64) -> Result<f64> {
        if self.inner_map.is_identity_v() {
            return Ok(u_val);
        }
        self.inner_map.eval(&Bindings::xyzv(r, s, t, u_val))
    }
}

fn prefix_weight(index: usize, last: usize, h: f64) -> f64 {
    if index == 0 || index == last {
        0.5 * h
    } else {
        h
    }
}

/// Prefix integral of the kernel over [0, x_i] x [0, y_j] x [0, z_k] for
/// every grid node, by composite tensor-product trapezoid on u's grid.
/// The output vanishes on the three coordinate planes i=0, j=0, k=0.
pub fn volterra_prefix(ks: &KernelSpec, u: &Field3D) -> Result<Field3D> {
    let domain = *u.domain();
    if ks.is_zero() {
        return Ok(Field3D::zeros(domain));
    }
    let n = domain.grid_nodes();
    let h = domain.spacing();

    // pointwise map of u at the inner grid nodes
    let mut mapped = vec![0.0; n * n * n];
    for i in 0..n {
        let r = domain.coord(i);
        for j in 0..n {
            let s = domain.coord(j);
            for k in 0..n {
                let t = domain.coord(k);
                mapped[(i * n + j) * n + k] = ks
                    .map_value(r, s, t, u.get(i, j, k))
                    .map_err(|e| e.at_node(i, j, k))?;
            }
        }
    }

    if !ks.references_outer() {
        // O(n^3) path: evaluate the integrand once per node, then take
        // cumulative trapezoid sums along each axis in turn.
        let mut acc = vec![0.0; n * n * n];
        for i in 0..n {
            let r = domain.coord(i);
            for j in 0..n {
                let s = domain.coord(j);
                for k in 0..n {
                    let t = domain.coord(k);
                    let b = Bindings::new()
                        .set(Var::R, r)
                        .set(Var::S, s)
                        .set(Var::T, t)
                        .set(Var::V, mapped[(i * n + j) * n + k]);
                    acc[(i * n + j) * n + k] =
                        ks.expr.eval(&b).map_err(|e| e.at_node(i, j, k))?;
                }
            }
        }
        cumulative_trapezoid(&mut acc, n, h);
        let mut out = Field3D::zeros(domain);
        out.values_mut().copy_from_slice(&acc);
        return Ok(out);
    }

    // general path: the kernel sees the outer point, so each outer node
    // needs its own weighted sum over its prefix box
    let coords: Vec<f64> = (0..n).map(|i| domain.coord(i)).collect();
    let outer: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
        .collect();
    let sums: Vec<Result<f64>> = outer
        .par_iter()
        .map(|&(i, j, k)| {
            if i == 0 || j == 0 || k == 0 {
                return Ok(0.0);
            }
            let base = Bindings::xyz(coords[i], coords[j], coords[k]);
            let mut sum = 0.0;
            for a in 0..=i {
                let wa = prefix_weight(a, i, h);
                for b in 0..=j {
                    let wb = prefix_weight(b, j, h);
                    for c in 0..=k {
                        let wc = prefix_weight(c, k, h);
                        let bind = base
                            .set(Var::R, coords[a])
                            .set(Var::S, coords[b])
                            .set(Var::T, coords[c])
                            .set(Var::V, mapped[(a * n + b) * n + c]);
                        let val =
                            ks.expr.eval(&bind).map_err(|e| e.at_node(a, b, c))?;
                        sum += wa * wb * wc * val;
                    }
                }
            }
            Ok(sum)
        })
        .collect();

    let mut out = Field3D::zeros(domain);
    for (slot, value) in out.values_mut().iter_mut().zip(sums) {
        *slot = value?;
    }
    Ok(out)
}

/// In-place prefix trapezoid along each axis of an n^3 array.
fn cumulative_trapezoid(values: &mut [f64], n: usize, h: f64) {
    let stride = |axis: usize| -> usize {
        match axis {
            0 => n * n,
            1 => n,
            _ => 1,
        }
    };
    for axis in 0..3 {
        let st = stride(axis);
        // iterate over all lines along `axis`
        let (outer1, outer2, st1, st2) = match axis {
            0 => (n, n, n, 1),
            1 => (n, n, n * n, 1),
            _ => (n, n, n * n, n),
        };
        for a in 0..outer1 {
            for b in 0..outer2 {
                let start = a * st1 + b * st2;
                let mut prev = values[start];
                values[start] = 0.0;
                for idx in 1..n {
                    let cur = values[start + idx * st];
                    values[start + idx * st] =
                        values[start + (idx - 1) * st] + 0.5 * h * (prev + cur);
                    prev = cur;
                }
            }
        }
    }
}

/// Values of the mapped integrand argument at the quadrature nodes of
/// [0, R]^3; u is sampled by clamped trilinear interpolation.
fn fredholm_mapped_values(ks: &KernelSpec, u: &Field3D) -> Result<Vec<f64>> {
    let domain = u.domain();
    let m = domain.fredholm_nodes();
    let mut mapped = vec![0.0; m * m * m];
    for a in 0..m {
        let r = domain.fredholm_coord(a);
        for b in 0..m {
            let s = domain.fredholm_coord(b);
            for c in 0..m {
                let t = domain.fredholm_coord(c);
                let u_val = u.interp_clamped(r, s, t);
                mapped[(a * m + b) * m + c] = ks
                    .map_value(r, s, t, u_val)
                    .map_err(|e| e.at_node(a, b, c))?;
            }
        }
    }
    Ok(mapped)
}

fn fredholm_weight(index: usize, m: usize, h: f64) -> f64 {
    if index == 0 || index == m - 1 {
        0.5 * h
    } else {
        h
    }
}

fn fredholm_sum(
    ks: &KernelSpec,
    domain: &Domain,
    mapped: &[f64],
    outer: Option<(f64, f64, f64)>,
) -> Result<f64> {
    let m = domain.fredholm_nodes();
    let hq = domain.fredholm_spacing();
    let base = match outer {
        Some((x, y, z)) => Bindings::xyz(x, y, z),
        None => Bindings::new(),
    };
    let mut sum = 0.0;
    for a in 0..m {
        let wa = fredholm_weight(a, m, hq);
        let r = domain.fredholm_coord(a);
        for b in 0..m {
            let wb = fredholm_weight(b, m, hq);
            let s = domain.fredholm_coord(b);
            for c in 0..m {
                let wc = fredholm_weight(c, m, hq);
                let bind = base
                    .set(Var::R, r)
                    .set(Var::S, s)
                    .set(Var::T, domain.fredholm_coord(c))
                    .set(Var::V, mapped[(a * m + b) * m + c]);
                let val = ks.expr.eval(&bind).map_err(|e| e.at_node(a, b, c))?;
                sum += wa * wb * wc * val;
            }
        }
    }
    Ok(sum)
}

/// Trapezoid estimate of the improper integral truncated to [0, R]^3, for
/// one fixed outer grid node.
pub fn fredholm_truncated(
    ks: &KernelSpec,
    u: &Field3D,
    outer: (usize, usize, usize),
) -> Result<f64> {
    if ks.is_zero() {
        return Ok(0.0);
    }
    let domain = u.domain();
    let mapped = fredholm_mapped_values(ks, u)?;
    let (i, j, k) = outer;
    let point = (domain.coord(i), domain.coord(j), domain.coord(k));
    fredholm_sum(ks, domain, &mapped, Some(point))
}

/// The truncated improper integral evaluated at every outer grid node.
pub fn fredholm_field(ks: &KernelSpec, u: &Field3D) -> Result<Field3D> {
    let domain = *u.domain();
    if ks.is_zero() {
        return Ok(Field3D::zeros(domain));
    }
    let mapped = fredholm_mapped_values(ks, u)?;
    let n = domain.grid_nodes();

    if !ks.references_outer() {
        // the integral is the same at every outer node
        let value = fredholm_sum(ks, &domain, &mapped, None)?;
        let mut out = Field3D::zeros(domain);
        out.values_mut().fill(value);
        return Ok(out);
    }

    let outer: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
        .collect();
    let sums: Vec<Result<f64>> = outer
        .par_iter()
        .map(|&(i, j, k)| {
            let point = (domain.coord(i), domain.coord(j), domain.coord(k));
            fredholm_sum(ks, &domain, &mapped, Some(point))
        })
        .collect();
    let mut out = Field3D::zeros(domain);
    for (slot, value) in out.values_mut().iter_mut().zip(sums) {
        *slot = value?;
    }
    Ok(out)
}

/// Crude truncation-tail indicator: the contribution of the outer shell
/// [0,R]^3 \ [0,R/2]^3, measured at the far-corner outer node with the
/// same node count on each range.
pub fn fredholm_tail_indicator(ks: &KernelSpec, u: &Field3D) -> Result<f64> {
    if ks.is_zero() {
        return Ok(0.0);
    }
    let domain = u.domain();
    let last = domain.grid_nodes() - 1;
    let full = fredholm_truncated(ks, u, (last, last, last))?;

    let half = {
        let m = domain.fredholm_nodes();
        let hq = 0.5 * domain.fredholm_radius() / (m - 1) as f64;
        let outer = (domain.coord(last), domain.coord(last), domain.coord(last));
        let mut sum = 0.0;
        for a in 0..m {
            let wa = fredholm_weight(a, m, hq);
            let r = a as f64 * hq;
            for b in 0..m {
                let wb = fredholm_weight(b, m, hq);
                let s = b as f64 * hq;
                for c in 0..m {
                    let wc = fredholm_weight(c, m, hq);
                    let t = c as f64 * hq;
                    let u_val = u.interp_clamped(r, s, t);
                    let v = ks.map_value(r, s, t, u_val).map_err(|e| e.at_node(a, b, c))?;
                    let bind = Bindings::xyz(outer.0, outer.1, outer.2)
                        .set(Var::R, r)
                        .set(Var::S, s)
                        .set(Var::T, t)
                        .set(Var::V, v);
                    sum += wa * wb * wc * ks.expr.eval(&bind).map_err(|e| e.at_node(a, b, c))?;
                }
            }
        }
        sum
    };
    Ok((full - half).abs())
}

/// Which quadrature a refinement study targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineOp {
    /// Prefix integral at the far corner of [0, L]^3; refines the solution
    /// grid (n, 2n-1, 4n-3, ...).
    Volterra,
    /// Truncated improper integral at the far-corner outer node; refines
    /// the quadrature grid on [0, R].
    Fredholm,
}

/// Repeat a quadrature at doubled resolutions and return (h, value) pairs
/// for order estimation. `u_expr` is resampled per level so the sampled
/// field is consistent with each grid.
pub fn refine_estimate(
    op: RefineOp,
    ks: &KernelSpec,
    u_expr: &Expression,
    base: &Domain,
    levels: usize,
) -> Result<Vec<(f64, f64)>> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "refinement needs at least 2 levels (got {levels})"
        )));
    }
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let scale = 1usize << level;
        match op {
            RefineOp::Volterra => {
                let n = (base.grid_nodes() - 1) * scale + 1;
                let domain = base.with_resolution(n, base.fredholm_nodes())?;
                let u = Field3D::sample(u_expr, domain)?;
                let field = volterra_prefix(ks, &u)?;
                out.push((domain.spacing(), field.get(n - 1, n - 1, n - 1)));
            }
            RefineOp::Fredholm => {
                let m = (base.fredholm_nodes() - 1) * scale + 1;
                let domain = base.with_resolution(base.grid_nodes(), m)?;
                let u = Field3D::sample(u_expr, domain)?;
                let last = domain.grid_nodes() - 1;
                let value = fredholm_truncated(ks, &u, (last, last, last))?;
                out.push((domain.fredholm_spacing(), value));
            }
        }
    }
    Ok(out)
}

/// Observed convergence orders log2(|e_h| / |e_{h/2}|) against a known
/// exact value; one entry per adjacent level pair.
pub fn observed_orders(estimates: &[(f64, f64)], exact: f64) -> Vec<f64> {
    estimates
        .windows(2)
        .map(|pair| {
            let e0 = (pair[0].1 - exact).abs();
            let e1 = (pair[1].1 - exact).abs();
            (e0 / e1).log2()
        })
        .collect()
}
