//! Deterministic report emission: fixed key order, fixed float formatting.
//!
//! Reports are written through a tiny JSON value type instead of a generic
//! serializer so that identical inputs produce byte-identical files: keys
//! appear in insertion order and every float is printed with 17 significant
//! digits, which round-trips f64 losslessly.

use std::fmt::Write as _;

use crate::certify::ContractionCertificate;
use crate::solver::SolveReport;
use crate::stability::StabilityReport;

/// 17-significant-digit float formatting shared by JSON and CSV output.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// A JSON value with ordered object keys.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn field(mut self, key: &str, value: Json) -> Json {
        if let Json::Obj(entries) = &mut self {
            entries.push((key.to_string(), value));
        }
        self
    }

    pub fn num(x: f64) -> Json {
        Json::Num(x)
    }

    pub fn str(s: &str) -> Json {
        Json::Str(s.to_string())
    }

    pub fn opt_num(x: Option<f64>) -> Json {
        match x {
            Some(v) => Json::Num(v),
            None => Json::Null,
        }
    }

    pub fn nums(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|v| Json::Num(*v)).collect())
    }

    /// Render with two-space indentation and a trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => {
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    // JSON has no representation for non-finite numbers
                    out.push_str("null");
                }
            }
            Json::Str(s) => write_escaped(s, out),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (idx, item) in items.iter().enumerate() {
                    if idx > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
            Json::Obj(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (idx, (key, value)) in entries.iter().enumerate() {
                    if idx > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    write_escaped(key, out);
                    out.push_str(": ");
                    value.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn push_indent(out: &mut String, levels: usize) {
    for _ in 0..levels {
        out.push_str("  ");
    }
}

fn write_escaped(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Solve outcome as a report document. `fredholm_tail` is the crude
/// truncation indicator for the improper term, when one was computed.
pub fn solve_report_json(r: &SolveReport, fredholm_tail: Option<f64>) -> Json {
    let final_step = r.residual_history.last().copied().unwrap_or(0.0);
    Json::obj()
        .field("converged", Json::Bool(r.converged))
        .field("iterations", Json::Int(r.iterations as i64))
        .field("tol", Json::num(r.tol))
        .field("final_step", Json::num(final_step))
        .field("u_star_norm", Json::num(r.u_star.bielecki_norm()))
        .field("fredholm_tail", Json::opt_num(fredholm_tail))
        .field("residual_history", Json::nums(&r.residual_history))
        .field("observed_ratios", Json::nums(&r.observed_ratios))
}

/// Certificate with every constant, flag, and estimated-vs-declared pair.
pub fn certificate_json(cert: &ContractionCertificate, seed: u64, samples: usize) -> Json {
    let f = &cert.flags;
    let validation = cert
        .validation
        .iter()
        .map(|v| {
            Json::obj()
                .field("name", Json::str(&v.name))
                .field("estimated", Json::num(v.estimated))
                .field("declared", Json::num(v.declared))
                .field("ok", Json::Bool(v.ok))
        })
        .collect();
    Json::obj()
        .field("q", Json::num(cert.q))
        .field("c", Json::opt_num(cert.c))
        .field("c_hur", Json::opt_num(cert.hur_constant))
        .field("l1_num", Json::num(cert.l1_num))
        .field("l2_num", Json::num(cert.l2_num))
        .field("alpha_num", Json::num(cert.alpha_num))
        .field("m_num", Json::num(cert.mass_num))
        .field(
            "flags",
            Json::obj()
                .field("kernel_bounds_ok", Json::Bool(f.kernel_bounds_ok))
                .field("contraction_ok", Json::Bool(f.contraction_ok))
                .field("growth_ok", Json::Bool(f.growth_ok))
                .field("mass_ok", Json::Bool(f.mass_ok))
                .field("stability_condition_ok", Json::Bool(f.stability_condition_ok))
                .field("all_ok", Json::Bool(cert.all_ok())),
        )
        .field("validation", Json::Arr(validation))
        .field(
            "sampling",
            Json::obj()
                .field("seed", Json::Int(seed as i64))
                .field("samples", Json::Int(samples as i64)),
        )
}

/// Stability verdict; field data goes to CSV, this carries the scalars.
pub fn stability_json(
    rep: &StabilityReport,
    epsilon: f64,
    shape: &str,
    gronwall: Option<(bool, bool)>,
) -> Json {
    let mut doc = Json::obj()
        .field("epsilon", Json::num(epsilon))
        .field("shape", Json::str(shape))
        .field("hur_constant", Json::num(rep.hur_constant))
        .field("tol_disc", Json::num(rep.tol_disc))
        .field("admissible", Json::Bool(rep.admissible))
        .field("hur_holds", Json::Bool(rep.hur_holds))
        .field("min_slack", Json::num(rep.min_slack))
        .field("observed_ratio", Json::num(rep.observed_ratio))
        .field("max_residual", Json::num(rep.residual.sup_norm()))
        .field("max_phi", Json::num(rep.phi.sup_norm()))
        .field("max_diff", Json::num(rep.diff.sup_norm()));
    doc = match gronwall {
        Some((premise, conclusion)) => doc.field(
            "gronwall",
            Json::obj()
                .field("premise_holds", Json::Bool(premise))
                .field("conclusion_holds", Json::Bool(conclusion)),
        ),
        None => doc.field("gronwall", Json::Null),
    };
    doc
}
