//! Numerical laboratory for a nonlinear integral equation in three
//! variables combining a value term, a prefix (Volterra) integral, and a
//! truncated improper (Fredholm) integral:
//!
//! ```text
//! u(x,y,z) = g(x,y,z, h(u)(x,y,z))
//!          + prefix integral over [0,x]x[0,y]x[0,z] of K(x,y,z,r,s,t, f1(u)(r,s,t))
//!          + integral over [0,R]^3            of F(x,y,z,r,s,t, f2(u)(r,s,t))
//! ```
//!
//! The crate solves such equations by successive approximation in an
//! exponentially weighted sup norm, numerically certifies the contraction
//! and growth hypotheses behind existence/uniqueness, and verifies the
//! Hyers-Ulam-Rassias stability bound `|u - u*| <= C * phi` for
//! manufactured approximate solutions.
//!
//! Equations are data: every function of a problem instance is an
//! expression string (see [`expr`]), and instances are loaded from JSON
//! problem files (see [`problem`]).

pub mod certify;
pub mod cubature;
pub mod error;
pub mod expr;
pub mod grid;
pub mod operator;
pub mod problem;
pub mod report;
pub mod solver;
pub mod stability;
pub mod testutil;

pub use certify::{certify, certify_with, CertifyOptions, ContractionCertificate, LipschitzData};
pub use cubature::{
    fredholm_field, fredholm_tail_indicator, fredholm_truncated, observed_orders,
    refine_estimate, volterra_prefix, KernelSpec, RefineOp,
};
pub use error::{Error, Result};
pub use expr::{Bindings, Expression, Var, VarSet};
pub use grid::{axpy, sup_diff, Domain, Field3D};
pub use operator::{abs_diff, quadrature_error_estimate, ProblemInstance};
pub use problem::{load_problem, LoadedProblem};
pub use solver::{a_priori_bound, solve, SolveOptions, SolveReport};
pub use stability::{check_hur, derive_phi, gronwall_check, make_perturbed, PerturbationSpec, PhiMode, StabilityReport};
