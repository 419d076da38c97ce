//! Command-line surface: solve, certify, stability, sweep, eval-expr.
//!
//! Exit codes: 0 success / verdict passed, 1 usage or IO error, 2 the
//! machine-checkable verdict failed (certificate or stability bound).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vham::report::{certificate_json, fmt_f64, solve_report_json, stability_json};
use vham::{
    certify_with, check_hur, fredholm_tail_indicator, gronwall_check, load_problem,
    make_perturbed, quadrature_error_estimate, solve, Bindings, CertifyOptions, Expression,
    Field3D, LoadedProblem, PerturbationSpec, PhiMode, Var, VarSet,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VERDICT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "vham",
    version,
    about = "Volterra-Hammerstein integral-equation lab: solve by Picard iteration in a weighted norm, certify the contraction hypotheses, and verify Hyers-Ulam-Rassias stability bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON)
    #[arg(short = 'p', long = "problem")]
    problem: PathBuf,
    /// Output directory for reports
    #[arg(short = 'o', long = "out", default_value = "out")]
    out: PathBuf,
    /// Seed for sampled validations
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (0 = rayon default)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the equation by successive approximation and write solve.json
    Solve {
        #[command(flatten)]
        common: Common,
        /// Skip the contraction precheck on the declared constants
        #[arg(long)]
        skip_certify: bool,
        /// Also dump the solution field as u_star.csv
        #[arg(long)]
        dump_field: bool,
    },
    /// Check every hypothesis and write certificate.json
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Solve, perturb, and verify the stability bound; write stability.json
    Stability {
        #[command(flatten)]
        common: Common,
        /// Perturbation amplitude (overrides the problem file)
        #[arg(long)]
        epsilon: Option<f64>,
        /// Perturbation shape over x,y,z (overrides the problem file)
        #[arg(long)]
        shape: Option<String>,
        /// Also dump residual/phi/diff/bound fields as CSV
        #[arg(long)]
        dump_fields: bool,
    },
    /// Map the feasibility region over declared constants; write sweep.csv
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axis spec `name=from:to:steps`; repeatable, product over axes.
        /// Names: l_g, l_h, N, l_f1, l_f2, l_1, l_2, alpha, m
        #[arg(long = "param", value_name = "NAME=FROM:TO:STEPS")]
        params: Vec<String>,
    },
    /// Parse and evaluate one expression
    #[command(name = "eval-expr")]
    EvalExpr {
        /// Expression text, e.g. "exp(-(x+y))*2"
        expr: String,
        /// Variable binding `name=value`; repeatable
        #[arg(long = "bind", value_name = "VAR=VALUE")]
        binds: Vec<String>,
        /// Print the fully parenthesized canonical form instead of a value
        #[arg(long)]
        canonical: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> vham::Result<u8> {
    match cli.cmd {
        Cmd::Solve {
            common,
            skip_certify,
            dump_field,
        } => cmd_solve(&common, skip_certify, dump_field),
        Cmd::Certify { common } => cmd_certify(&common),
        Cmd::Stability {
            common,
            epsilon,
            shape,
            dump_fields,
        } => cmd_stability(&common, epsilon, shape.as_deref(), dump_fields),
        Cmd::Sweep { common, params } => cmd_sweep(&common, &params),
        Cmd::EvalExpr {
            expr,
            binds,
            canonical,
        } => cmd_eval_expr(&expr, &binds, canonical),
    }
}

fn setup(common: &Common) -> vham::Result<LoadedProblem> {
    if common.threads > 0 {
        // ignore the error if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
    let lp = load_problem(&common.problem)?;
    fs::create_dir_all(&common.out)?;
    Ok(lp)
}

fn write_text(dir: &Path, name: &str, text: &str) -> vham::Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_field_csv(dir: &Path, name: &str, field: &Field3D) -> vham::Result<()> {
    let file = fs::File::create(dir.join(name))?;
    let mut w = std::io::BufWriter::new(file);
    field.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_solve(common: &Common, skip_certify: bool, dump_field: bool) -> vham::Result<u8> {
    let lp = setup(common)?;
    let lip = &lp.instance.lip;

    if !skip_certify {
        let q = lip.l_g * lip.l_h + lip.l_1 + lip.l_2;
        if q >= 1.0 {
            eprintln!(
                "declared constants give q = {q} >= 1: not a contraction \
                 (run `certify` for details, or pass --skip-certify)"
            );
            return Ok(EXIT_VERDICT);
        }
    }

    let u0 = Field3D::zeros(*lp.instance.domain());
    let report = solve(&lp.instance, u0, &lp.solver)?;
    let tail = if lp.instance.fredholm().is_zero() {
        None
    } else {
        Some(fredholm_tail_indicator(lp.instance.fredholm(), &report.u_star)?)
    };

    write_text(
        &common.out,
        "solve.json",
        &solve_report_json(&report, tail).render(),
    )?;
    if dump_field {
        write_field_csv(&common.out, "u_star.csv", &report.u_star)?;
    }

    if report.converged {
        println!(
            "converged in {} iterations (final step {})",
            report.iterations,
            fmt_f64(*report.residual_history.last().unwrap_or(&0.0))
        );
        Ok(EXIT_OK)
    } else {
        eprintln!("did not converge within {} iterations", report.iterations);
        Ok(EXIT_VERDICT)
    }
}

fn cmd_certify(common: &Common) -> vham::Result<u8> {
    let lp = setup(common)?;
    let opts = CertifyOptions {
        seed: common.seed,
        ..CertifyOptions::default()
    };
    let cert = certify_with(&lp.instance, &opts);
    write_text(
        &common.out,
        "certificate.json",
        &certificate_json(&cert, opts.seed, opts.samples).render(),
    )?;
    if cert.all_ok() {
        println!("certificate passed: q = {}", fmt_f64(cert.q));
        Ok(EXIT_OK)
    } else {
        eprintln!("certificate failed (see certificate.json)");
        Ok(EXIT_VERDICT)
    }
}

fn cmd_stability(
    common: &Common,
    epsilon: Option<f64>,
    shape: Option<&str>,
    dump_fields: bool,
) -> vham::Result<u8> {
    let lp = setup(common)?;

    // file section, overridable per flag; flags alone are also enough
    let spec = {
        let base = lp.stability.as_ref();
        let eps = epsilon
            .or(base.map(|s| s.spec.epsilon))
            .ok_or_else(|| vham::Error::InvalidParameter(
                "no stability section in the problem file; pass --epsilon (and --shape)".into(),
            ))?;
        let shape_expr = match shape {
            Some(text) => Expression::parse(text, VarSet::XYZ)?,
            None => base
                .map(|s| s.spec.shape.clone())
                .ok_or_else(|| vham::Error::InvalidParameter(
                    "no stability section in the problem file; pass --shape".into(),
                ))?,
        };
        let phi = base.map(|s| s.spec.phi.clone()).unwrap_or(PhiMode::Derived);
        PerturbationSpec::new(shape_expr, eps, phi)?
    };

    let opts = CertifyOptions {
        seed: common.seed,
        ..CertifyOptions::default()
    };
    let cert = certify_with(&lp.instance, &opts);
    if cert.hur_constant.is_none() {
        eprintln!("certificate has no stability constant (l_g * N >= 1)");
        return Ok(EXIT_VERDICT);
    }

    let report = solve(&lp.instance, Field3D::zeros(*lp.instance.domain()), &lp.solver)?;
    if !report.converged {
        eprintln!("solver did not converge; no reference solution");
        return Ok(EXIT_VERDICT);
    }

    let u = make_perturbed(&report.u_star, &spec)?;
    let tol_disc = match lp.stability.as_ref().and_then(|s| s.tol_disc) {
        Some(td) => td,
        None => {
            let quad = quadrature_error_estimate(&lp.instance, &report.u_star)?;
            2.0 * (lp.solver.tol + quad)
        }
    };

    let stab = check_hur(&lp.instance, &u, &report.u_star, &cert, &spec, tol_disc)?;
    let lip = &lp.instance.lip;
    let gronwall = gronwall_check(
        &stab.diff,
        &stab.phi,
        cert.mass_num,
        lip.l_g * lip.n_pointwise,
        lip.mass,
    )?;

    write_text(
        &common.out,
        "stability.json",
        &stability_json(&stab, spec.epsilon, &spec.shape.canonical(), Some(gronwall)).render(),
    )?;
    if dump_fields {
        write_field_csv(&common.out, "residual.csv", &stab.residual)?;
        write_field_csv(&common.out, "phi.csv", &stab.phi)?;
        write_field_csv(&common.out, "diff.csv", &stab.diff)?;
        write_field_csv(&common.out, "bound.csv", &stab.bound)?;
    }

    if stab.hur_holds {
        println!(
            "stability bound holds: min slack {} (observed ratio {})",
            fmt_f64(stab.min_slack),
            fmt_f64(stab.observed_ratio)
        );
        Ok(EXIT_OK)
    } else {
        eprintln!("stability bound FAILED (see stability.json)");
        Ok(EXIT_VERDICT)
    }
}

#[derive(Debug, Clone)]
struct SweepAxis {
    name: String,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> vham::Result<SweepAxis> {
    let usage = || {
        vham::Error::InvalidParameter(format!(
            "sweep axis `{spec}` is not of the form name=from:to:steps"
        ))
    };
    let (name, rest) = spec.split_once('=').ok_or_else(usage)?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(usage());
    }
    let from: f64 = parts[0].parse().map_err(|_| usage())?;
    let to: f64 = parts[1].parse().map_err(|_| usage())?;
    let steps: usize = parts[2].parse().map_err(|_| usage())?;
    if steps < 1 {
        return Err(usage());
    }
    const NAMES: &[&str] = &["l_g", "l_h", "N", "l_f1", "l_f2", "l_1", "l_2", "alpha", "m"];
    if !NAMES.contains(&name) {
        return Err(vham::Error::InvalidParameter(format!(
            "unknown sweep parameter `{name}` (expected one of {})",
            NAMES.join(", ")
        )));
    }
    let values = if steps == 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    Ok(SweepAxis {
        name: name.to_string(),
        values,
    })
}

fn cmd_sweep(common: &Common, params: &[String]) -> vham::Result<u8> {
    let lp = setup(common)?;
    if params.is_empty() {
        return Err(vham::Error::InvalidParameter(
            "sweep needs at least one --param axis".into(),
        ));
    }
    let axes: Vec<SweepAxis> = params
        .iter()
        .map(|s| parse_axis(s))
        .collect::<vham::Result<_>>()?;

    let mut rows = Vec::new();
    let mut point = vec![0usize; axes.len()];
    loop {
        let mut lip = lp.instance.lip.clone();
        let mut coords = Vec::with_capacity(axes.len());
        for (axis, &idx) in axes.iter().zip(&point) {
            let value = axis.values[idx];
            coords.push(value);
            match axis.name.as_str() {
                "l_g" => lip.l_g = value,
                "l_h" => lip.l_h = value,
                "N" => lip.n_pointwise = value,
                "l_f1" => lip.l_f1 = value,
                "l_f2" => lip.l_f2 = value,
                "l_1" => lip.l_1 = value,
                "l_2" => lip.l_2 = value,
                "alpha" => lip.alpha = value,
                "m" => lip.mass = value,
                _ => unreachable!(),
            }
        }
        let q = lip.l_g * lip.l_h + lip.l_1 + lip.l_2;
        let lg_n = lip.l_g * lip.n_pointwise;
        let c_hur = (lg_n < 1.0).then(|| (lip.mass / (1.0 - lg_n)).exp() / (1.0 - lg_n));
        rows.push((coords, q, q < 1.0, lg_n < 1.0, c_hur));

        // advance the mixed-radix counter
        let mut carry = true;
        for (slot, axis) in point.iter_mut().zip(&axes).rev() {
            if !carry {
                break;
            }
            *slot += 1;
            if *slot == axis.values.len() {
                *slot = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }

    let mut csv = String::new();
    for axis in &axes {
        csv.push_str(&axis.name);
        csv.push(',');
    }
    csv.push_str("q,q_lt_1,lgn_lt_1,c_hur\n");
    for (coords, q, c8, ii, c_hur) in &rows {
        for v in coords {
            csv.push_str(&fmt_f64(*v));
            csv.push(',');
        }
        csv.push_str(&fmt_f64(*q));
        csv.push(',');
        csv.push_str(if *c8 { "true" } else { "false" });
        csv.push(',');
        csv.push_str(if *ii { "true" } else { "false" });
        csv.push(',');
        if let Some(c) = c_hur {
            csv.push_str(&fmt_f64(*c));
        }
        csv.push('\n');
    }
    write_text(&common.out, "sweep.csv", &csv)?;
    println!("swept {} points over {} axes", rows.len(), axes.len());
    Ok(EXIT_OK)
}

fn cmd_eval_expr(text: &str, binds: &[String], canonical: bool) -> vham::Result<u8> {
    let expr = Expression::parse(text, VarSet::ALL)?;
    if canonical {
        println!("{}", expr.canonical());
        return Ok(EXIT_OK);
    }
    let mut bindings = Bindings::new();
    for bind in binds {
        let (name, value) = bind.split_once('=').ok_or_else(|| {
            vham::Error::InvalidParameter(format!("binding `{bind}` is not of the form var=value"))
        })?;
        let var = Var::from_name(name).ok_or_else(|| {
            vham::Error::InvalidParameter(format!("unknown variable `{name}` in binding"))
        })?;
        let value: f64 = value.parse().map_err(|_| {
            vham::Error::InvalidParameter(format!("binding value `{value}` is not a number"))
        })?;
        bindings = bindings.set(var, value);
    }
    let value = expr.eval(&bindings)?;
    println!("{value}");
    Ok(EXIT_OK)
}
