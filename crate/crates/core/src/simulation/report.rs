use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::inference::region::RegionKind;
use crate::simulation::experiment::{ExperimentConfig, ExperimentKind};
use crate::simulation::truth::TruthSpec;

/// Partition of replicates by whether UMLE and CMLE coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Total,
    SameMle,
    DifferentMle,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Total => "total",
            Split::SameMle => "same_mle",
            Split::DifferentMle => "different_mle",
        }
    }
}

/// One cell: a percentage of `cases` replicates with the event of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    /// Empty for coverage rows.
    pub predictor: String,
    /// Empty for coverage rows.
    pub hypothesis: String,
    pub kind: RegionKind,
    pub split: Split,
    pub cases: usize,
    /// Covered (coverage) or rejected (rejection) replicates.
    pub hits: usize,
    pub indeterminate: usize,
}

impl ReportRow {
    pub fn percent(&self) -> Option<f64> {
        (self.cases > 0).then(|| 100.0 * self.hits as f64 / self.cases as f64)
    }

    /// Binomial Monte Carlo standard error in percentage points.
    pub fn mc_se(&self) -> Option<f64> {
        self.percent().map(|p| {
            let q = p / 100.0;
            100.0 * (q * (1.0 - q) / self.cases as f64).sqrt()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeDiagnostics {
    pub n: usize,
    pub used: usize,
    /// Replicates dropped because a fit failed or did not converge.
    pub excluded: usize,
    pub quasi_separated: usize,
    pub same_mle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub name: String,
    pub seed: u64,
    pub config: String,
    pub truth: String,
    pub rows: Vec<ReportRow>,
    pub diagnostics: Vec<SizeDiagnostics>,
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or("NA".to_string(), |p| format!("{p:.1}"))
}

impl ExperimentReport {
    pub(crate) fn new(
        kind: ExperimentKind,
        cfg: &ExperimentConfig,
        truth: &TruthSpec,
        rows: Vec<ReportRow>,
        diagnostics: Vec<SizeDiagnostics>,
    ) -> Self {
        ExperimentReport {
            kind,
            name: cfg.label(),
            seed: cfg.seed,
            config: cfg.to_toml(),
            truth: truth.describe(),
            rows,
            diagnostics,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Rejection => "rejection",
        }
    }

    pub fn row(
        &self,
        n: usize,
        predictor: &str,
        hypothesis: &str,
        kind: RegionKind,
        split: Split,
    ) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.n == n
                && r.predictor == predictor
                && r.hypothesis == hypothesis
                && r.kind == kind
                && r.split == split
        })
    }

    /// Total coverage percentage of `kind` at sample size `n`.
    pub fn coverage(&self, n: usize, kind: RegionKind) -> Option<f64> {
        self.row(n, "", "", kind, Split::Total)
            .and_then(ReportRow::percent)
    }

    /// Total rejection percentage for a predictor, hypothesis label and region kind.
    pub fn rejection(
        &self,
        n: usize,
        predictor: &str,
        hypothesis: &str,
        kind: RegionKind,
    ) -> Option<f64> {
        self.row(n, predictor, hypothesis, kind, Split::Total)
            .and_then(ReportRow::percent)
    }

    /// Machine-readable rows: one per sample size × kind × split (× predictor × hypothesis).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "experiment",
            "n",
            "predictor",
            "hypothesis",
            "kind",
            "split",
            "cases",
            "hits",
            "percent",
            "mc_se",
            "indeterminate",
        ])?;
        for r in &self.rows {
            w.write_record([
                self.kind_label().to_string(),
                r.n.to_string(),
                r.predictor.clone(),
                r.hypothesis.clone(),
                r.kind.to_string(),
                r.split.label().to_string(),
                r.cases.to_string(),
                r.hits.to_string(),
                r.percent().map_or("NA".into(), |p| format!("{p:.4}")),
                r.mc_se().map_or("NA".into(), |p| format!("{p:.4}")),
                r.indeterminate.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn sizes(&self) -> Vec<usize> {
        self.diagnostics.iter().map(|d| d.n).collect()
    }

    fn kinds(&self) -> Vec<RegionKind> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.kind) {
                out.push(r.kind);
            }
        }
        out
    }

    /// Human-readable table: sample sizes × region kinds as columns.
    pub fn text_table(&self) -> String {
        let sizes = self.sizes();
        let kinds = self.kinds();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} ({}), seed {}",
            self.name,
            self.kind_label(),
            self.seed
        );
        let _ = writeln!(out);
        let mut header = format!("{:<28}", "n");
        for n in &sizes {
            for (i, _) in kinds.iter().enumerate() {
                header.push_str(&format!(
                    "{:>14}",
                    if i == 0 { n.to_string() } else { String::new() }
                ));
            }
        }
        let _ = writeln!(out, "{header}");
        let mut header = format!("{:<28}", "");
        for _ in &sizes {
            for k in &kinds {
                header.push_str(&format!("{:>14}", k.to_string()));
            }
        }
        let _ = writeln!(out, "{header}");
        let mut labels: Vec<(String, String, Split)> = Vec::new();
        for r in &self.rows {
            let key = (r.predictor.clone(), r.hypothesis.clone(), r.split);
            if !labels.contains(&key) {
                labels.push(key);
            }
        }
        for (pred, hyp, split) in labels {
            if self.kind == ExperimentKind::Rejection && split != Split::Total {
                continue;
            }
            let label = match self.kind {
                ExperimentKind::Coverage => match split {
                    Split::Total => "Total".to_string(),
                    Split::SameMle => "Same MLE".to_string(),
                    Split::DifferentMle => "Different MLE".to_string(),
                },
                ExperimentKind::Rejection => format!("{pred} {hyp}"),
            };
            let mut line = format!("{label:<28}");
            for &n in &sizes {
                for &k in &kinds {
                    let r = self.row(n, &pred, &hyp, k, split);
                    let cell = match (r, split) {
                        (Some(r), Split::Total) => fmt_pct(r.percent()),
                        (Some(r), _) => format!("{} ({})", fmt_pct(r.percent()), r.cases),
                        (None, _) => "-".into(),
                    };
                    line.push_str(&format!("{cell:>14}"));
                }
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out);
        for d in &self.diagnostics {
            let _ = writeln!(
                out,
                "n = {}: {} replicates used, {} excluded ({} quasi-separated), UMLE = CMLE in {}",
                d.n, d.used, d.excluded, d.quasi_separated, d.same_mle
            );
        }
        out
    }

    /// Config, truth and table, for the report file.
    pub fn full_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "## configuration\n{}", self.config);
        let _ = writeln!(out, "## truth\n{}", self.truth);
        out.push_str(&self.text_table());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentages_and_errors() {
        let r = ReportRow {
            n: 10,
            predictor: String::new(),
            hypothesis: String::new(),
            kind: RegionKind::Ccr,
            split: Split::Total,
            cases: 200,
            hits: 190,
            indeterminate: 0,
        };
        assert_eq!(r.percent(), Some(95.0));
        assert!((r.mc_se().unwrap() - 100.0 * (0.95f64 * 0.05 / 200.0).sqrt()).abs() < 1e-12);
        let empty = ReportRow {
            cases: 0,
            hits: 0,
            ..r
        };
        assert_eq!(empty.percent(), None);
    }
}
