//! Truncated computational box, grid-sampled fields, and the weighted
//! (Bielecki) sup norm.
//!
//! Everything downstream works on a uniform tensor grid over [0, L]^3. The
//! improper integral term keeps a separate, larger truncation radius R with
//! its own node count, so truncation accuracy is decoupled from solution
//! resolution.

use std::io;

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expression, VarSet};
use crate::report::fmt_f64;

/// The computational box [0, L]^3 with its grids and exponential weight.
///
/// `grid_nodes` points per axis discretize [0, L]; `fredholm_nodes` points
/// per axis discretize [0, R] for the truncated improper integral. `tau` is
/// the weight exponent of the norm `sup |u| e^{-tau (x+y+z)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    edge: f64,
    grid_nodes: usize,
    fredholm_radius: f64,
    fredholm_nodes: usize,
    tau: f64,
}

impl Domain {
    pub fn new(
        edge: f64,
        grid_nodes: usize,
        fredholm_radius: f64,
        fredholm_nodes: usize,
        tau: f64,
    ) -> Result<Self> {
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "edge length L must be positive and finite (got {edge})"
            )));
        }
        if grid_nodes < 3 {
            return Err(Error::InvalidDomain(format!(
                "nodes per axis must be >= 3 (got {grid_nodes})"
            )));
        }
        if !(fredholm_radius.is_finite() && fredholm_radius >= edge) {
            return Err(Error::InvalidDomain(format!(
                "truncation radius R must be finite and >= L (got {fredholm_radius})"
            )));
        }
        if fredholm_nodes < 3 {
            return Err(Error::InvalidDomain(format!(
                "m_nodes must be >= 3 (got {fredholm_nodes})"
            )));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidDomain(format!(
                "tau must be >= 0 and finite (got {tau})"
            )));
        }
        Ok(Domain {
            edge,
            grid_nodes,
            fredholm_radius,
            fredholm_nodes,
            tau,
        })
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn grid_nodes(&self) -> usize {
        self.grid_nodes
    }

    pub fn fredholm_radius(&self) -> f64 {
        self.fredholm_radius
    }

    pub fn fredholm_nodes(&self) -> usize {
        self.fredholm_nodes
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Grid spacing h = L / (n - 1).
    pub fn spacing(&self) -> f64 {
        self.edge / (self.grid_nodes - 1) as f64
    }

    pub fn fredholm_spacing(&self) -> f64 {
        self.fredholm_radius / (self.fredholm_nodes - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn fredholm_coord(&self, a: usize) -> f64 {
        a as f64 * self.fredholm_spacing()
    }

    /// The norm weight e^{-tau (x+y+z)}.
    pub fn weight(&self, x: f64, y: f64, z: f64) -> f64 {
        (-self.tau * (x + y + z)).exp()
    }

    /// Same box with different node counts; used by refinement studies.
    pub fn with_resolution(&self, grid_nodes: usize, fredholm_nodes: usize) -> Result<Domain> {
        Domain::new(
            self.edge,
            grid_nodes,
            self.fredholm_radius,
            fredholm_nodes,
            self.tau,
        )
    }
}

/// A real-valued function sampled on the tensor grid.
///
/// `values[(i * n + j) * n + k] = u(x_i, y_j, z_k)`; index order is fixed
/// as (x, y, z) and all values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3D {
    domain: Domain,
    values: Vec<f64>,
}

impl Field3D {
    pub fn zeros(domain: Domain) -> Self {
        let n = domain.grid_nodes();
        Field3D {
            domain,
            values: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(domain: Domain, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let n = domain.grid_nodes();
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            let x = domain.coord(i);
            for j in 0..n {
                let y = domain.coord(j);
                for k in 0..n {
                    values.push(f(x, y, domain.coord(k)));
                }
            }
        }
        Field3D { domain, values }
    }

    /// Sample an expression over {x, y, z} at every grid node.
    pub fn sample(e: &Expression, domain: Domain) -> Result<Self> {
        let free = e.free_vars();
        if !free.is_subset_of(VarSet::XYZ) {
            return Err(Error::ExprVariables {
                context: "a sampled field".into(),
                allowed: VarSet::XYZ.names(),
                found: free.names(),
            });
        }
        let n = domain.grid_nodes();
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            let x = domain.coord(i);
            for j in 0..n {
                let y = domain.coord(j);
                for k in 0..n {
                    let z = domain.coord(k);
                    let value = e
                        .eval(&Bindings::xyz(x, y, z))
                        .map_err(|err| err.at_node(i, j, k))?;
                    values.push(value);
                }
            }
        }
        Ok(Field3D { domain, values })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.domain.grid_nodes();
        (i * n + j) * n + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.idx(i, j, k);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// max over grid nodes of |u| e^{-tau (x+y+z)}; zero iff u vanishes on
    /// the grid.
    pub fn bielecki_norm(&self) -> f64 {
        let n = self.domain.grid_nodes();
        let mut best = 0.0f64;
        for i in 0..n {
            let x = self.domain.coord(i);
            for j in 0..n {
                let y = self.domain.coord(j);
                for k in 0..n {
                    let w = self.domain.weight(x, y, self.domain.coord(k));
                    best = best.max(self.get(i, j, k).abs() * w);
                }
            }
        }
        best
    }

    /// Unweighted max of |u| over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Trilinear interpolation with coordinates clamped to [0, L]; this is
    /// how the improper integral samples u beyond the solution box.
    pub fn interp_clamped(&self, r: f64, s: f64, t: f64) -> f64 {
        let n = self.domain.grid_nodes();
        let h = self.domain.spacing();
        let edge = self.domain.edge();
        let locate = |p: f64| -> (usize, f64) {
            let p = p.clamp(0.0, edge);
            let q = p / h;
            let cell = (q.floor() as usize).min(n - 2);
            ((cell), (q - cell as f64).clamp(0.0, 1.0))
        };
        let (i, fx) = locate(r);
        let (j, fy) = locate(s);
        let (k, fz) = locate(t);
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                    acc += wx * wy * wz * self.get(i + di, j + dj, k + dk);
                }
            }
        }
        acc
    }

    /// CSV dump with header `x,y,z,value`, row-major in (i, j, k).
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,z,value")?;
        let n = self.domain.grid_nodes();
        for i in 0..n {
            let x = self.domain.coord(i);
            for j in 0..n {
                let y = self.domain.coord(j);
                for k in 0..n {
                    let z = self.domain.coord(k);
                    writeln!(
                        w,
                        "{},{},{},{}",
                        fmt_f64(x),
                        fmt_f64(y),
                        fmt_f64(z),
                        fmt_f64(self.get(i, j, k))
                    )?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn same_domain(u: &Field3D, v: &Field3D) -> Result<()> {
    if u.domain == v.domain {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// Pointwise `alpha * u + v`.
pub fn axpy(alpha: f64, u: &Field3D, v: &Field3D) -> Result<Field3D> {
    same_domain(u, v)?;
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| alpha * a + b)
        .collect();
    Ok(Field3D {
        domain: u.domain,
        values,
    })
}

/// Unweighted max of |u - v|.
pub fn sup_diff(u: &Field3D, v: &Field3D) -> Result<f64> {
    same_domain(u, v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}
