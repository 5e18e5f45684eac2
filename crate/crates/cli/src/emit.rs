//! Report output: full JSON, or a flat CSV per task for plotting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::{Report, TaskResult};
use crate::spec::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// `1.5-0.25i`.
pub fn format_complex(z: &Complex) -> String {
    let sign = if z[1].is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z[0], sign, z[1].abs())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

pub fn to_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Numerical(format!("csv: {e}"));
    match &report.result {
        TaskResult::Axioms(a) => {
            w.write_record(["p", "property", "max_violation", "passed"]).map_err(err)?;
            for c in &a.checks {
                w.write_record([c.p.clone(), c.property.clone(), c.max_violation.to_string(), c.passed.to_string()])
                    .map_err(err)?;
            }
        }
        TaskResult::Certify(c) => {
            w.write_record(["direction_index", "ratio"]).map_err(err)?;
            for (i, r) in c.ratio_profile.iter().enumerate() {
                w.write_record([i.to_string(), r.to_string()]).map_err(err)?;
            }
        }
        TaskResult::Reconstruct(r) => {
            w.write_record(["trial", "residual"]).map_err(err)?;
            for (i, v) in r.residuals.iter().enumerate() {
                w.write_record([i.to_string(), v.to_string()]).map_err(err)?;
            }
        }
        TaskResult::Perturb(p) => {
            w.write_record(["trial", "lower_ratio", "upper_ratio"]).map_err(err)?;
            if let Some(c) = &p.conclusion {
                for (i, (lo, hi)) in c.sandwich_trials.iter().enumerate() {
                    w.write_record([i.to_string(), lo.to_string(), hi.to_string()]).map_err(err)?;
                }
            }
        }
        TaskResult::Sample(s) => {
            w.write_record(["point", "true_value", "reconstructed", "abs_error"]).map_err(err)?;
            for p in &s.points {
                w.write_record([
                    p.point.clone(),
                    format_complex(&p.true_value),
                    format_complex(&p.reconstructed),
                    p.abs_error.to_string(),
                ])
                .map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(format!("csv: {e}")))
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

/// Writes the rendered report in one call.
pub fn emit<W: Write>(report: &Report, format: Format, out: &mut W) -> Result<(), CliError> {
    let text = render(report, format)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Numerical(format!("write failed: {e}")))
}

/// Short human summary of the verdicts, for stderr.
pub fn summary(report: &Report) -> String {
    match &report.result {
        TaskResult::Axioms(a) => format!(
            "axioms: {} checks, {}",
            a.checks.len(),
            if a.all_passed { "all passed" } else { "FAILURES" }
        ),
        TaskResult::Certify(c) => {
            let mut s = format!("frame: {:?} (A {}, B {})", c.frame.verdict, opt(c.frame.a_est), opt(c.frame.b_est));
            if let Some(k) = &c.k_frame {
                s.push_str(&format!("; K-frame: {:?} (A {}, B {})", k.verdict, opt(k.a_est), opt(k.b_est)));
            }
            s
        }
        TaskResult::Reconstruct(r) => format!("reconstruct: max residual {:e}, passed {}", r.max_residual, r.passed),
        TaskResult::Perturb(p) => format!(
            "perturb: premise {}, smallness {}, conclusion {}",
            p.premise.holds,
            p.smallness,
            p.conclusion.as_ref().map_or("not checked".to_string(), |c| c.passed.to_string())
        ),
        TaskResult::Sample(s) => format!(
            "sample: {:?}, residual {}",
            s.certification.verdict,
            s.residual.map_or("n/a".to_string(), |r| format!("{r:e}"))
        ),
    }
}
