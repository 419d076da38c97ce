//! Hypothesis certification: numeric validation of the declared Lipschitz
//! data and the derived constants.
//!
//! Sampling can only lower-bound a Lipschitz constant, so the constants are
//! declared in the problem file and validated here: the certificate fails
//! when a numeric estimate exceeds its declaration. The weighted kernel
//! bounds and the growth/mass integrals are evaluated with the same
//! quadrature the operator uses.
//!
//! Derived constants: the contraction factor `q = l_g l_h + l_1 + l_2`, the
//! fixed-point sensitivity `c = 1 / (1 - q)` (defined for q < 1), and the
//! stability constant `C = 1/(1 - l_g N) * exp(m / (1 - l_g N))` (defined
//! for l_g N < 1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubature::{fredholm_field, volterra_prefix, KernelSpec};
use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Bindings, Expression, UnaryOp, Var, VarSet};
use crate::grid::{Domain, Field3D};
use crate::operator::ProblemInstance;

/// Declared Lipschitz data for one problem instance. Scalars are declared
/// upper bounds; `l_k_bound` / `l_f_bound` are the pointwise Lipschitz
/// bound functions of the two kernels, as expressions over {x,y,z,r,s,t}.
#[derive(Debug, Clone)]
pub struct LipschitzData {
    pub l_g: f64,
    pub l_h: f64,
    /// Pointwise Lipschitz constant of the h map (N).
    pub n_pointwise: f64,
    pub l_f1: f64,
    pub l_f2: f64,
    /// Declared bound on the weighted prefix-kernel integral.
    pub l_1: f64,
    /// Declared bound on the weighted improper-kernel integral.
    pub l_2: f64,
    /// Declared bound on the weighted size of the operator at u = 0.
    pub alpha: f64,
    /// Declared bound on the total kernel-mass integral (m).
    pub mass: f64,
    pub l_k_bound: Expression,
    pub l_f_bound: Expression,
}

impl LipschitzData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        l_g: f64,
        l_h: f64,
        n_pointwise: f64,
        l_f1: f64,
        l_f2: f64,
        l_1: f64,
        l_2: f64,
        alpha: f64,
        mass: f64,
        l_k_bound: Expression,
        l_f_bound: Expression,
    ) -> Result<Self> {
        for (name, value) in [
            ("l_g", l_g),
            ("l_h", l_h),
            ("N", n_pointwise),
            ("l_f1", l_f1),
            ("l_f2", l_f2),
            ("l_1", l_1),
            ("l_2", l_2),
            ("alpha", alpha),
            ("m", mass),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "declared constant {name} must be nonnegative and finite (got {value})"
                )));
            }
        }
        for (context, e) in [
            ("the kernel bound l_K", &l_k_bound),
            ("the kernel bound l_F", &l_f_bound),
        ] {
            let free = e.free_vars();
            if !free.is_subset_of(VarSet::XYZRST) {
                return Err(Error::ExprVariables {
                    context: context.into(),
                    allowed: VarSet::XYZRST.names(),
                    found: free.names(),
                });
            }
        }
        Ok(LipschitzData {
            l_g,
            l_h,
            n_pointwise,
            l_f1,
            l_f2,
            l_1,
            l_2,
            alpha,
            mass,
            l_k_bound,
            l_f_bound,
        })
    }
}

/// Pass/fail verdicts for the certified hypotheses.
#[derive(Debug, Clone, Copy)]
pub struct ConditionFlags {
    /// Numeric weighted kernel integrals stay within the declared l_1, l_2.
    pub kernel_bounds_ok: bool,
    /// Contraction: q = l_g l_h + l_1 + l_2 < 1.
    pub contraction_ok: bool,
    /// Numeric weighted operator size at u = 0 stays within alpha.
    pub growth_ok: bool,
    /// Numeric kernel-mass integral stays within m.
    pub mass_ok: bool,
    /// Stability applicability: l_g N < 1.
    pub stability_condition_ok: bool,
}

/// One estimated-vs-declared entry of the validation report.
#[derive(Debug, Clone)]
pub struct ConstantCheck {
    pub name: String,
    pub estimated: f64,
    pub declared: f64,
    pub ok: bool,
}

/// The certificate: derived constants, numeric validations, verdicts.
#[derive(Debug, Clone)]
pub struct ContractionCertificate {
    pub q: f64,
    /// 1 / (1 - q); defined only when q < 1.
    pub c: Option<f64>,
    /// Stability constant; defined only when l_g N < 1.
    pub hur_constant: Option<f64>,
    pub l1_num: f64,
    pub l2_num: f64,
    pub alpha_num: f64,
    pub mass_num: f64,
    pub flags: ConditionFlags,
    pub validation: Vec<ConstantCheck>,
}

impl ContractionCertificate {
    /// All condition flags and all validation entries pass.
    pub fn all_ok(&self) -> bool {
        let f = &self.flags;
        f.kernel_bounds_ok
            && f.contraction_ok
            && f.growth_ok
            && f.mass_ok
            && f.stability_condition_ok
            && self.validation.iter().all(|v| v.ok)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub seed: u64,
    pub samples: usize,
    /// Sampling range for the scalar argument of pointwise maps.
    pub v_range: (f64, f64),
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            seed: 42,
            samples: 1000,
            v_range: (-2.0, 2.0),
        }
    }
}

/// Sampled lower bound on the Lipschitz constant of `e` with respect to
/// `wrt` over the given per-variable ranges. Deterministic given the seed.
pub fn estimate_lipschitz(
    e: &Expression,
    wrt: Var,
    ranges: &[(Var, f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "lipschitz estimation needs at least 100 samples (got {samples})"
        )));
    }
    let wrt_range = ranges
        .iter()
        .find(|(v, _, _)| *v == wrt)
        .copied()
        .ok_or_else(|| {
            Error::InvalidParameter(format!("no sampling range given for `{}`", wrt.name()))
        })?;
    let covered = ranges.iter().fold(VarSet::EMPTY, |s, (v, _, _)| s.with(*v));
    if !e.free_vars().is_subset_of(covered) {
        return Err(Error::InvalidParameter(
            "sampling ranges do not cover the expression's variables".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let mut bindings = Bindings::new();
        for (v, lo, hi) in ranges {
            bindings = bindings.set(*v, rng.gen_range(*lo..=*hi));
        }
        let a = rng.gen_range(wrt_range.1..=wrt_range.2);
        let b = rng.gen_range(wrt_range.1..=wrt_range.2);
        if (a - b).abs() < 1e-12 {
            continue;
        }
        let fa = e.eval(&bindings.set(wrt, a))?;
        let fb = e.eval(&bindings.set(wrt, b))?;
        best = best.max(((fa - fb) / (a - b)).abs());
    }
    Ok(best)
}

/// Sampled check that the kernel's slope in v never exceeds its declared
/// pointwise bound function: returns the largest observed slope / bound
/// ratio (infinite when the bound vanishes under a nonzero slope).
fn kernel_bound_ratio(
    kernel: &Expression,
    bound: &Expression,
    space: &[(Var, f64, f64)],
    v_range: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut bindings = Bindings::new();
        for (v, lo, hi) in space {
            bindings = bindings.set(*v, rng.gen_range(*lo..=*hi));
        }
        let a = rng.gen_range(v_range.0..=v_range.1);
        let b = rng.gen_range(v_range.0..=v_range.1);
        if (a - b).abs() < 1e-12 {
            continue;
        }
        let fa = kernel.eval(&bindings.set(Var::V, a))?;
        let fb = kernel.eval(&bindings.set(Var::V, b))?;
        let slope = ((fa - fb) / (a - b)).abs();
        let limit = bound.eval(&bindings)?;
        if limit > 0.0 {
            worst = worst.max(slope / limit);
        } else if slope > 1e-12 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(worst)
}

fn weighted_max(field: &Field3D) -> f64 {
    let d = field.domain();
    let n = d.grid_nodes();
    let mut best = 0.0f64;
    for i in 0..n {
        let x = d.coord(i);
        for j in 0..n {
            let y = d.coord(j);
            for k in 0..n {
                let w = d.weight(x, y, d.coord(k));
                best = best.max(field.get(i, j, k) * w);
            }
        }
    }
    best
}

/// exp(tau * (r + s + t)) as an expression.
fn weight_growth_expr(tau: f64) -> Expression {
    let sum = Expression::binary(
        BinaryOp::Add,
        Expression::binary(
            BinaryOp::Add,
            Expression::var(Var::R),
            Expression::var(Var::S),
        ),
        Expression::var(Var::T),
    );
    Expression::unary(
        UnaryOp::Exp,
        Expression::binary(BinaryOp::Mul, Expression::constant(tau), sum),
    )
}

fn scaled(bound: &Expression, factor: f64) -> Expression {
    Expression::binary(BinaryOp::Mul, Expression::constant(factor), bound.clone())
}

/// Numeric counterparts of the declared weighted kernel bounds l_1, l_2:
/// the weighted max over outer nodes of the prefix integral (respectively
/// the truncated improper integral) of l_f * l_kernel * e^{tau(r+s+t)}.
pub fn validate_kernel_bounds(lip: &LipschitzData, domain: Domain) -> Result<(f64, f64)> {
    let zero = Field3D::zeros(domain);
    let growth = weight_growth_expr(domain.tau());

    let volterra_integrand = Expression::binary(
        BinaryOp::Mul,
        scaled(&lip.l_k_bound, lip.l_f1),
        growth.clone(),
    );
    let l1_field = volterra_prefix(&KernelSpec::pointwise(volterra_integrand), &zero)?;
    let l1_num = weighted_max(&l1_field);

    let fredholm_integrand =
        Expression::binary(BinaryOp::Mul, scaled(&lip.l_f_bound, lip.l_f2), growth);
    let l2_field = fredholm_field(&KernelSpec::pointwise(fredholm_integrand), &zero)?;
    let l2_num = weighted_max(&l2_field);

    Ok((l1_num, l2_num))
}

/// Numeric counterparts of the declared alpha and m: the weighted size of
/// the operator applied with u = 0 (value term plus absolute integral
/// terms), and the kernel-mass integral (prefix part over [0,L]^3, improper
/// part over [0,R]^3), both maximized over outer grid nodes.
pub fn validate_growth_and_mass(p: &ProblemInstance) -> Result<(f64, f64)> {
    let domain = *p.domain();
    let zero = Field3D::zeros(domain);

    // |g(x,y,z,h(0))| + prefix |K(.., f1(0))| + improper |F(.., f2(0))|
    let mut size = p.value_term(&zero)?;
    for v in size.values_mut() {
        *v = v.abs();
    }
    let abs_k = KernelSpec::new(
        Expression::unary(UnaryOp::Abs, p.volterra().expr().clone()),
        p.volterra().inner_map().clone(),
    )?;
    let abs_f = KernelSpec::new(
        Expression::unary(UnaryOp::Abs, p.fredholm().expr().clone()),
        p.fredholm().inner_map().clone(),
    )?;
    let vol = volterra_prefix(&abs_k, &zero)?;
    let fre = fredholm_field(&abs_f, &zero)?;
    for ((s, v), f) in size
        .values_mut()
        .iter_mut()
        .zip(vol.values())
        .zip(fre.values())
    {
        *s = *s + *v + *f;
    }
    let alpha_num = weighted_max(&size);

    // kernel mass: l_f1 l_K over the full solution box plus l_f2 l_F over
    // the truncation box, per outer node
    let lip = &p.lip;
    let k_mass = box_integral_per_outer(
        &scaled(&lip.l_k_bound, lip.l_f1),
        domain,
        domain.edge(),
        domain.grid_nodes(),
    )?;
    let f_mass = box_integral_per_outer(
        &scaled(&lip.l_f_bound, lip.l_f2),
        domain,
        domain.fredholm_radius(),
        domain.fredholm_nodes(),
    )?;
    let mut mass_num = 0.0f64;
    for (a, b) in k_mass.iter().zip(&f_mass) {
        mass_num = mass_num.max(a + b);
    }
    Ok((alpha_num, mass_num))
}

/// Trapezoid integral of an expression over {x,y,z,r,s,t} across
/// [0, edge]^3 in (r,s,t), evaluated for every outer grid node. Returns
/// one value per outer node (a single broadcast value when the integrand
/// ignores the outer point).
fn box_integral_per_outer(
    integrand: &Expression,
    domain: Domain,
    edge: f64,
    nodes: usize,
) -> Result<Vec<f64>> {
    let n = domain.grid_nodes();
    let outer_count = n * n * n;
    if integrand.is_zero() {
        return Ok(vec![0.0; outer_count]);
    }
    let h = edge / (nodes - 1) as f64;
    let weight = |idx: usize| if idx == 0 || idx == nodes - 1 { 0.5 * h } else { h };

    let sum_for = |base: Bindings| -> Result<f64> {
        let mut sum = 0.0;
        for a in 0..nodes {
            let wa = weight(a);
            let r = a as f64 * h;
            for b in 0..nodes {
                let wb = weight(b);
                let s = b as f64 * h;
                for c in 0..nodes {
                    let wc = weight(c);
                    let bind = base
                        .set(Var::R, r)
                        .set(Var::S, s)
                        .set(Var::T, c as f64 * h);
                    sum += wa * wb * wc * integrand.eval(&bind)?;
                }
            }
        }
        Ok(sum)
    };

    if !integrand.references_any(VarSet::XYZ) {
        let value = sum_for(Bindings::new())?;
        return Ok(vec![value; outer_count]);
    }
    let mut out = Vec::with_capacity(outer_count);
    for i in 0..n {
        let x = domain.coord(i);
        for j in 0..n {
            let y = domain.coord(j);
            for k in 0..n {
                let z = domain.coord(k);
                out.push(sum_for(Bindings::xyz(x, y, z))?);
            }
        }
    }
    Ok(out)
}

/// Certify with default sampling options.
pub fn certify(p: &ProblemInstance) -> ContractionCertificate {
    certify_with(p, &CertifyOptions::default())
}

/// Check every hypothesis and compute the derived constants. Failures are
/// reported as flags and failed validation entries, never as errors.
pub fn certify_with(p: &ProblemInstance, opts: &CertifyOptions) -> ContractionCertificate {
    let lip = &p.lip;
    let domain = *p.domain();

    let q = lip.l_g * lip.l_h + lip.l_1 + lip.l_2;
    let c = (q < 1.0).then(|| 1.0 / (1.0 - q));
    let lg_n = lip.l_g * lip.n_pointwise;
    let hur_constant = (lg_n < 1.0).then(|| (lip.mass / (1.0 - lg_n)).exp() / (1.0 - lg_n));

    let (l1_num, l2_num, kernel_err) = match validate_kernel_bounds(lip, domain) {
        Ok((a, b)) => (a, b, false),
        Err(_) => (f64::NAN, f64::NAN, true),
    };
    let (alpha_num, mass_num, growth_err) = match validate_growth_and_mass(p) {
        Ok((a, b)) => (a, b, false),
        Err(_) => (f64::NAN, f64::NAN, true),
    };

    let mut validation = Vec::new();
    let mut check = |name: &str, estimated: Result<f64>, declared: f64| {
        let estimated = estimated.unwrap_or(f64::NAN);
        let ok = estimated <= declared + 1e-12 * declared.abs().max(1.0);
        validation.push(ConstantCheck {
            name: name.to_string(),
            estimated,
            declared,
            ok,
        });
        ok
    };

    let edge = domain.edge();
    let radius = domain.fredholm_radius();
    let spot = |e: &Expression, seed: u64| {
        estimate_lipschitz(
            e,
            Var::V,
            &[
                (Var::X, 0.0, edge),
                (Var::Y, 0.0, edge),
                (Var::Z, 0.0, edge),
                (Var::V, opts.v_range.0, opts.v_range.1),
            ],
            opts.samples,
            seed,
        )
    };

    check("l_g", spot(p.g(), opts.seed), lip.l_g);
    // the same pointwise estimate validates both declared constants for h
    let h_est = spot(p.h_map(), opts.seed.wrapping_add(1));
    let h_val = match &h_est {
        Ok(v) => Ok(*v),
        Err(_) => Err(Error::InvalidParameter("estimation failed".into())),
    };
    check("l_h", h_est, lip.l_h);
    check("N", h_val, lip.n_pointwise);
    check(
        "l_f1",
        spot(p.volterra().inner_map(), opts.seed.wrapping_add(2)),
        lip.l_f1,
    );
    check(
        "l_f2",
        spot(p.fredholm().inner_map(), opts.seed.wrapping_add(3)),
        lip.l_f2,
    );
    check(
        "l_K ratio",
        kernel_bound_ratio(
            p.volterra().expr(),
            &lip.l_k_bound,
            &[
                (Var::X, 0.0, edge),
                (Var::Y, 0.0, edge),
                (Var::Z, 0.0, edge),
                (Var::R, 0.0, edge),
                (Var::S, 0.0, edge),
                (Var::T, 0.0, edge),
            ],
            opts.v_range,
            opts.samples,
            opts.seed.wrapping_add(4),
        ),
        1.0,
    );
    check(
        "l_F ratio",
        kernel_bound_ratio(
            p.fredholm().expr(),
            &lip.l_f_bound,
            &[
                (Var::X, 0.0, edge),
                (Var::Y, 0.0, edge),
                (Var::Z, 0.0, edge),
                (Var::R, 0.0, radius),
                (Var::S, 0.0, radius),
                (Var::T, 0.0, radius),
            ],
            opts.v_range,
            opts.samples,
            opts.seed.wrapping_add(5),
        ),
        1.0,
    );

    let l1_ok = check("l_1", Ok(l1_num), lip.l_1) && !kernel_err;
    let l2_ok = check("l_2", Ok(l2_num), lip.l_2) && !kernel_err;
    let alpha_ok = check("alpha", Ok(alpha_num), lip.alpha) && !growth_err;
    let mass_ok = check("m", Ok(mass_num), lip.mass) && !growth_err;

    ContractionCertificate {
        q,
        c,
        hur_constant,
        l1_num,
        l2_num,
        alpha_num,
        mass_num,
        flags: ConditionFlags {
            kernel_bounds_ok: l1_ok && l2_ok,
            contraction_ok: q < 1.0,
            growth_ok: alpha_ok,
            mass_ok,
            stability_condition_ok: lg_n < 1.0,
        },
        validation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VarSet;
    use crate::testutil::{fred_instance, lin_instance};

    fn expr(text: &str) -> Expression {
        Expression::parse(text, VarSet::ALL).unwrap()
    }

    #[test]
    fn lipschitz_estimates() {
        let v_only = [(Var::V, 0.0, 1.0)];
        let affine = estimate_lipschitz(&expr("2*v"), Var::V, &v_only, 200, 1).unwrap();
        assert_eq!(affine, 2.0);

        let sin_range = [(Var::V, 0.0, std::f64::consts::TAU)];
        let sine = estimate_lipschitz(&expr("sin(v)"), Var::V, &sin_range, 2000, 1).unwrap();
        assert!((0.95..=1.0).contains(&sine), "sine estimate {sine}");

        let square = estimate_lipschitz(&expr("v*v"), Var::V, &v_only, 2000, 1).unwrap();
        assert!((1.8..=2.0).contains(&square), "square estimate {square}");

        assert!(estimate_lipschitz(&expr("v"), Var::V, &v_only, 10, 1).is_err());
        assert!(estimate_lipschitz(&expr("x"), Var::V, &v_only, 200, 1).is_err());
    }

    #[test]
    fn weighted_kernel_bounds() {
        // zero kernel: both bounds vanish
        let zero = lin_instance(0.0, 5);
        let (l1, _) = validate_kernel_bounds(&zero.lip, *zero.domain()).unwrap();
        assert_eq!(l1, 0.0);

        // constant kernel bound lambda with tau = 1: the weighted prefix
        // integral is lambda * prod(1 - e^{-x_i}), below lambda / tau^3
        let lin = lin_instance(0.5, 9);
        let (l1, l2) = validate_kernel_bounds(&lin.lip, *lin.domain()).unwrap();
        let analytic = 0.5 * (1.0 - (-1.0f64).exp()).powi(3);
        assert!((l1 - analytic).abs() < 0.01 * analytic, "l1 {l1}");
        assert!(l1 <= 0.5 * 1.0001);
        assert_eq!(l2, 0.0);
    }

    #[test]
    fn weighted_improper_bound_matches_double_resolution_oracle() {
        // l_F = e^{-2(r+s+t)}, l_f2 = 1, tau = 1: per axis the weighted
        // integrand is e^{-r}, so the bound is (1 - e^{-R})^3 at the origin
        let d = Domain::new(1.0, 5, 4.0, 33, 1.0).unwrap();
        let lip = LipschitzData::new(
            0.0,
            1.0,
            1.0,
            1.0,
            1.0,
            0.0,
            1.0,
            1.0,
            1.0,
            expr("0"),
            expr("exp(-2*(r+s+t))"),
        )
        .unwrap();
        let (_, l2) = validate_kernel_bounds(&lip, d).unwrap();
        let analytic = (1.0 - (-4.0f64).exp()).powi(3);
        assert!((l2 - analytic).abs() < 0.01, "l2 {l2} vs analytic {analytic}");
        // the true improper-integral value, 1 per axis, dominates
        assert!(l2 <= 1.0);

        // brute-force oracle: the same integral at double resolution
        let d2 = Domain::new(1.0, 5, 4.0, 65, 1.0).unwrap();
        let (_, oracle) = validate_kernel_bounds(&lip, d2).unwrap();
        assert!((l2 - oracle).abs() <= 0.05 * oracle);
        assert!(l2 <= oracle * 1.01 + 1e-12, "coarse {l2} vs oracle {oracle}");
    }

    #[test]
    fn growth_and_mass_numbers() {
        // all terms vanish for the zero instance
        let d = Domain::new(1.0, 5, 10.0, 5, 0.0).unwrap();
        let zero = crate::testutil::instance_from_exprs("0", "v", "0", "0", d);
        let (alpha, mass) = validate_growth_and_mass(&zero).unwrap();
        assert_eq!(alpha, 0.0);
        assert_eq!(mass, 0.0);

        // constant kernel bound: mass over the unit box is exactly lambda
        let lin = lin_instance(0.5, 9);
        let (alpha, mass) = validate_growth_and_mass(&lin).unwrap();
        assert!((mass - 0.5).abs() < 1e-12, "mass {mass}");
        assert!((alpha - 1.0).abs() < 1e-12, "alpha {alpha}");

        // g = 1 with zero kernels and tau = 0: alpha is 1 everywhere
        let d = Domain::new(1.0, 5, 10.0, 5, 0.0).unwrap();
        let constant = crate::testutil::instance_from_exprs("1", "v", "0", "0", d);
        let (alpha, _) = validate_growth_and_mass(&constant).unwrap();
        assert_eq!(alpha, 1.0);
    }

    #[test]
    fn certificate_arithmetic() {
        let d = Domain::new(1.0, 5, 10.0, 5, 1.0).unwrap();
        let lip = LipschitzData::new(
            0.5, 0.4, 1.0, 1.0, 1.0, 0.2, 0.1, 10.0, 0.5, expr("0.2"), expr("0"),
        )
        .unwrap();
        let p = crate::testutil::instance_with_lip("1", "v", "0.2*v", "0", lip, d);
        let cert = certify(&p);
        assert_eq!(cert.q, 0.5);
        assert_eq!(cert.c, Some(2.0));
        assert!(cert.flags.contraction_ok);

        // c stays above 1 for 0 < q < 1 and tends to 1 as q -> 0
        for q in [1e-6, 0.1, 0.5, 0.9, 0.999] {
            let c = 1.0 / (1.0 - q);
            assert!(c > 1.0);
        }
        assert!((1.0f64 / (1.0 - 1e-9) - 1.0).abs() < 1e-8);

        // stability constant at l_g N = 0.5, m = 0.5 is 2 e
        let lip = LipschitzData::new(
            0.5, 0.4, 1.0, 1.0, 1.0, 0.2, 0.1, 10.0, 0.5, expr("0.2"), expr("0"),
        )
        .unwrap();
        let p = crate::testutil::instance_with_lip("1", "v", "0.2*v", "0", lip, d);
        let cert = certify(&p);
        let expected = 2.0 * std::f64::consts::E;
        assert!((cert.hur_constant.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn contraction_boundary_is_rejected() {
        let d = Domain::new(1.0, 5, 10.0, 5, 1.0).unwrap();
        let lip = LipschitzData::new(
            1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 10.0, 0.5, expr("0"), expr("0"),
        )
        .unwrap();
        let p = crate::testutil::instance_with_lip("v", "v", "0", "0", lip, d);
        let cert = certify(&p);
        assert!(cert.q >= 1.0);
        assert!(!cert.flags.contraction_ok);
        assert!(cert.c.is_none());
        assert!(!cert.all_ok());
        // l_g N = 1 also disables the stability constant
        assert!(cert.hur_constant.is_none());
        assert!(!cert.flags.stability_condition_ok);
    }

    #[test]
    fn certified_fixtures_pass_all_checks() {
        for p in crate::testutil::certified_instances(9, 17) {
            let cert = certify(&p);
            assert!(cert.all_ok(), "certificate failed: {cert:?}");
            assert!(cert.q < 1.0);
            assert!(cert.c.unwrap() > 1.0);
        }
    }

    #[test]
    fn declared_constants_dominate_estimates_on_fixtures() {
        // sampled estimates are lower bounds: they must never exceed an
        // analytically correct declaration
        let p = fred_instance(5, 17);
        let cert = certify(&p);
        for entry in &cert.validation {
            assert!(
                entry.ok,
                "estimate {} = {} exceeds declared {}",
                entry.name, entry.estimated, entry.declared
            );
        }
    }

    #[test]
    fn stability_constant_is_monotone() {
        let value = |lg_n: f64, mass: f64| (mass / (1.0 - lg_n)).exp() / (1.0 - lg_n);
        let mut prev = 0.0;
        for step in 0..20 {
            let mass = 0.05 * step as f64;
            let v = value(0.3, mass);
            assert!(v > prev);
            prev = v;
        }
        let mut prev = 0.0;
        for step in 0..20 {
            let lg_n = 0.045 * step as f64;
            let v = value(lg_n, 0.5);
            assert!(v > prev);
            prev = v;
        }
    }
}
