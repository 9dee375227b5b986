use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::estimation::FitResult;
use crate::inference::classify::CaseReport;
use crate::inference::fits::Fits;
use crate::inference::hypothesis::{HypothesisKind, TestOutcome};
use crate::inference::quantile::normal_critical;
use crate::inference::region::{RegionGrid, RegionKind};
use crate::model::spec::{ModelSpec, PredictorRole};

fn wald_bounds(fit: &FitResult, z: f64) -> Vec<Option<(f64, f64)>> {
    let est = fit.flat();
    match fit.standard_errors() {
        Ok(se) => est
            .iter()
            .zip(se)
            .map(|(e, s)| Some((e - z * s, e + z * s)))
            .collect(),
        Err(_) => vec![None; est.len()],
    }
}

/// Flags per flat coordinate: whether its monotonicity inequality is active in `fit`.
fn active_by_coordinate(spec: &ModelSpec, fit: &FitResult) -> Vec<bool> {
    let layout = spec.layout();
    let mut out = vec![false; layout.p];
    for (range, flags) in layout.ordinal.iter().zip(&fit.active) {
        for (i, f) in range.clone().zip(flags) {
            out[i] = *f;
        }
    }
    out
}

fn describe_model(spec: &ModelSpec) -> String {
    let terms: Vec<String> = spec
        .predictors
        .iter()
        .map(|p| match &p.role {
            PredictorRole::Ordinal { constraint, .. } => {
                format!("{} (ordinal, {constraint:?})", p.name).to_lowercase()
            }
            PredictorRole::Nominal { .. } => format!("{} (nominal)", p.name),
            PredictorRole::Numeric => format!("{} (numeric)", p.name),
        })
        .collect();
    format!("{} ~ {}", spec.response.name, terms.join(" + "))
}

/// Side-by-side UMLE/CMLE report with 5 decimals.
pub fn fit_report(fits: &Fits, level: f64) -> String {
    let spec = fits.spec;
    let names = spec.coefficient_names();
    let z = normal_critical(level).unwrap_or(f64::NAN);
    let (u, c) = (fits.umle.flat(), fits.cmle.flat());
    let (uci, cci) = (wald_bounds(&fits.umle, z), wald_bounds(&fits.cmle, z));
    let active = active_by_coordinate(spec, &fits.cmle);
    let width = names.iter().map(String::len).max().unwrap_or(10).max(11);
    let ci =
        |b: Option<(f64, f64)>| b.map_or("NA".to_string(), |(l, h)| format!("[{l:.5}, {h:.5}]"));

    let mut out = String::new();
    let _ = writeln!(out, "model: {}", describe_model(spec));
    let _ = writeln!(out, "observations: {}", fits.data.n());
    let _ = writeln!(out);
    let pct = format!("{:.0}%", 100.0 * level);
    let _ = writeln!(
        out,
        "{:<width$} {:>12} {:>12} {:>6}  {:<28} {:<28}",
        "coefficient",
        "UMLE",
        "CMLE",
        "active",
        format!("{pct} Wald CI (UMLE)"),
        format!("{pct} Wald CI (CMLE)"),
    );
    for i in 0..names.len() {
        let _ = writeln!(
            out,
            "{:<width$} {:>12.5} {:>12.5} {:>6}  {:<28} {:<28}",
            names[i],
            u[i],
            c[i],
            if active[i] { "yes" } else { "" },
            ci(uci[i]),
            ci(cci[i]),
        );
    }
    let _ = writeln!(out);
    for (label, fit) in [("UMLE", &fits.umle), ("CMLE", &fits.cmle)] {
        let _ =
            writeln!(
            out,
            "{label}: log-likelihood {:.5}, converged {}, iterations {}, max |score| {:.3e}{}{}",
            fit.log_likelihood,
            fit.converged,
            fit.iterations,
            fit.score_norm,
            if fit.quasi_separated { ", quasi-separated" } else { "" },
            if fit.tie { ", tie between direction assignments" } else { "" },
        );
        if fit.fisher.singular {
            let _ = writeln!(
                out,
                "{label}: information matrix is near singular (condition {:.3e})",
                fit.fisher.condition
            );
        }
    }
    if let Some(d) = &fits.cmle.directions {
        let labels: Vec<String> = spec
            .ordinals()
            .zip(&d.0)
            .map(|(p, d)| {
                format!(
                    "{}={}",
                    p.name,
                    d.map_or("-".to_string(), |d| d.to_string())
                )
            })
            .collect();
        let _ = writeln!(out, "CMLE directions: {}", labels.join(", "));
    }
    let _ = writeln!(out, "UMLE = CMLE: {}", fits.same_mle());
    out
}

/// Estimates CSV: coefficient, estimates, standard errors, Wald bounds and active flags.
pub fn write_estimates<W: Write>(fits: &Fits, level: f64, writer: W) -> Result<()> {
    let spec = fits.spec;
    let z = normal_critical(level)?;
    let names = spec.coefficient_names();
    let (u, c) = (fits.umle.flat(), fits.cmle.flat());
    let use_ = fits.umle.standard_errors().ok();
    let cse = fits.cmle.standard_errors().ok();
    let active = active_by_coordinate(spec, &fits.cmle);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "coefficient",
        "umle",
        "umle_se",
        "umle_lower",
        "umle_upper",
        "cmle",
        "cmle_se",
        "cmle_lower",
        "cmle_upper",
        "cmle_active",
    ])?;
    let f = |v: f64| format!("{v:.5}");
    let na = || "NA".to_string();
    for i in 0..names.len() {
        let us = use_.as_ref().map(|s| s[i]);
        let cs = cse.as_ref().map(|s| s[i]);
        w.write_record([
            names[i].clone(),
            f(u[i]),
            us.map_or_else(na, f),
            us.map_or_else(na, |s| f(u[i] - z * s)),
            us.map_or_else(na, |s| f(u[i] + z * s)),
            f(c[i]),
            cs.map_or_else(na, f),
            cs.map_or_else(na, |s| f(c[i] - z * s)),
            cs.map_or_else(na, |s| f(c[i] + z * s)),
            (active[i] as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn region_summary(grid: &RegionGrid, case: Option<&CaseReport>) -> String {
    let s = grid.summary();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "grid points: {} (level {}, df {}, threshold {:.5})",
        s.points, grid.level, grid.df, grid.threshold
    );
    for (k, v) in [
        (RegionKind::Ucr, s.ucr),
        (RegionKind::Uccr, s.uccr),
        (RegionKind::Ccr, s.ccr),
        (RegionKind::Acr, s.acr),
    ] {
        let _ = writeln!(out, "{k}: {v}");
    }
    let _ = writeln!(out, "CCR outside UCCR: {}", s.ccr_not_uccr);
    let _ = writeln!(out, "indeterminate: {}", s.indeterminate);
    if let Some(c) = case {
        let _ = writeln!(
            out,
            "case: {}{} (UMLE block {}, UCR members iso {} anti {} zero {} non-monotone {})",
            c.case,
            if c.low_confidence {
                " (low confidence)"
            } else {
                ""
            },
            c.umle_class.label(),
            c.member_classes[0],
            c.member_classes[1],
            c.member_classes[2],
            c.member_classes[3],
        );
    }
    out
}

pub fn test_report(variable: &str, t: &TestOutcome) -> String {
    let mut out = String::new();
    let decision = if t.indeterminate {
        "INDETERMINATE"
    } else if t.reject {
        "REJECT"
    } else {
        "FAIL TO REJECT"
    };
    let hyp = match t.hypothesis {
        HypothesisKind::Direction(d) => format!("{variable} is {d}"),
        HypothesisKind::NoEffect => format!("{variable} has no effect"),
        HypothesisKind::Monotone => format!("{variable} is monotone"),
        HypothesisKind::NonMonotone => format!("{variable} is not monotone"),
    };
    let _ = writeln!(out, "H0: {hyp}");
    let _ = writeln!(out, "decision: {decision}");
    let _ = writeln!(out, "statistic: {:.5}", t.statistic);
    let _ = writeln!(out, "threshold: {:.5}", t.threshold);
    let _ = writeln!(out, "df: {}", t.df);
    let _ = writeln!(out, "level: {}", t.level);
    let _ = writeln!(out, "region: {}", t.region);
    let block: Vec<String> = t.block.iter().map(|v| format!("{v:.5}")).collect();
    let _ = writeln!(
        out,
        "checked block ({}): [{}]",
        t.estimator,
        block.join(", ")
    );
    let _ = writeln!(out, "p-value: {}", t.p_value_label());
    out
}
