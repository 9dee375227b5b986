use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::spec::{ModelSpec, PredictorRole};

/// Untyped table of string cells, as read from a CSV file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(columns: Vec<String>) -> Self {
        RawTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            rows.push(record?.iter().map(str::to_string).collect());
        }
        Ok(RawTable { columns, rows })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.columns)?;
        for row in &self.rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Dummy-coded observations.
///
/// `x` is row-major with `n_cols` columns, ordered like the β part of the
/// parameter vector. Responses are stored as zero-based category indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignData {
    k: usize,
    n_cols: usize,
    responses: Vec<usize>,
    x: Vec<f64>,
}

impl DesignData {
    /// Builds a design directly from zero-based responses and a row-major matrix.
    pub fn from_parts(k: usize, n_cols: usize, responses: Vec<usize>, x: Vec<f64>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if k < 2 {
            return Err(Error::InvalidSpec("k must be at least 2".into()));
        }
        if x.len() != responses.len() * n_cols {
            return Err(Error::DimensionMismatch {
                expected: responses.len() * n_cols,
                got: x.len(),
            });
        }
        if let Some(bad) = responses.iter().find(|&&z| z >= k) {
            return Err(Error::InvalidArgument(format!(
                "response index {bad} outside 0..{k}"
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite covariate {v}")));
        }
        Ok(DesignData {
            k,
            n_cols,
            responses,
            x,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Zero-based response category of observation `i`.
    pub fn response(&self, i: usize) -> usize {
        self.responses[i]
    }

    pub fn responses(&self) -> &[usize] {
        &self.responses
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Indicator `y_ij = 1(z_i = j)` with one-based `j`, as in the model's notation.
    pub fn indicator(&self, i: usize, j: usize) -> f64 {
        if self.responses[i] + 1 == j {
            1.0
        } else {
            0.0
        }
    }

    /// Observations per response category.
    pub fn category_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &z in &self.responses {
            counts[z] += 1;
        }
        counts
    }

    /// Index of the first response category without observations.
    pub fn empty_category(&self) -> Option<usize> {
        self.category_counts().iter().position(|&c| c == 0)
    }

    /// Copy with observations in the given order.
    pub fn permuted(&self, order: &[usize]) -> DesignData {
        let mut responses = Vec::with_capacity(order.len());
        let mut x = Vec::with_capacity(order.len() * self.n_cols);
        for &i in order {
            responses.push(self.responses[i]);
            x.extend_from_slice(self.row(i));
        }
        DesignData {
            k: self.k,
            n_cols: self.n_cols,
            responses,
            x,
        }
    }
}

/// Dummy-codes a raw table under `spec`.
///
/// Column order follows the parameter layout: ordinal blocks, then nominal
/// blocks, then numeric columns. Baseline categories map to all-zero dummies.
pub fn encode_design(raw: &RawTable, spec: &ModelSpec) -> Result<DesignData> {
    spec.validate()?;
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let layout = spec.layout();
    let n_cols = layout.n_beta();
    let offset = layout.n_alpha();

    let response_col = raw
        .column(&spec.response.name)
        .ok_or_else(|| Error::UnknownColumn(spec.response.name.clone()))?;
    let response_lookup: HashMap<&str, usize> = spec
        .response
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    struct Encoder<'a> {
        col: usize,
        name: &'a str,
        start: usize,
        lookup: Option<HashMap<&'a str, usize>>,
    }
    let mut encoders = Vec::with_capacity(spec.predictors.len());
    for (pred, range) in spec.predictors.iter().zip(&layout.by_predictor) {
        let col = raw
            .column(&pred.name)
            .ok_or_else(|| Error::UnknownColumn(pred.name.clone()))?;
        let lookup = match &pred.role {
            PredictorRole::Ordinal { levels, .. } | PredictorRole::Nominal { levels } => Some(
                levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i))
                    .collect(),
            ),
            PredictorRole::Numeric => None,
        };
        encoders.push(Encoder {
            col,
            name: &pred.name,
            start: range.start - offset,
            lookup,
        });
    }

    let n = raw.len();
    let mut responses = Vec::with_capacity(n);
    let mut x = vec![0.0; n * n_cols];
    for (i, row) in raw.rows.iter().enumerate() {
        let cell = |c: usize| row.get(c).map(String::as_str).unwrap_or("");
        let z = cell(response_col);
        let zi = *response_lookup.get(z).ok_or_else(|| Error::UnknownLevel {
            row: i + 1,
            column: spec.response.name.clone(),
            value: z.to_string(),
        })?;
        responses.push(zi);
        let xrow = &mut x[i * n_cols..(i + 1) * n_cols];
        for enc in &encoders {
            let value = cell(enc.col);
            match &enc.lookup {
                Some(lookup) => {
                    let level = *lookup.get(value).ok_or_else(|| Error::UnknownLevel {
                        row: i + 1,
                        column: enc.name.to_string(),
                        value: value.to_string(),
                    })?;
                    if level > 0 {
                        xrow[enc.start + level - 1] = 1.0;
                    }
                }
                None => {
                    let v: f64 = value
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| Error::InvalidNumber {
                            row: i + 1,
                            column: enc.name.to_string(),
                            value: value.to_string(),
                        })?;
                    xrow[enc.start] = v;
                }
            }
        }
    }
    DesignData::from_parts(spec.k(), n_cols, responses, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::{Constraint, PredictorSpec};

    fn table(rows: &[[&str; 3]]) -> RawTable {
        RawTable {
            columns: vec!["y".into(), "op".into(), "num".into()],
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    fn spec(k: usize) -> ModelSpec {
        ModelSpec::with_numbered_response(
            "y",
            k,
            vec![
                PredictorSpec::numeric("num"),
                PredictorSpec::ordinal_numbered("op", 3, Constraint::Either),
            ],
        )
        .unwrap()
    }

    #[test]
    fn baseline_row_has_zero_dummies() {
        let d = encode_design(&table(&[["1", "1", "0.5"]]), &spec(2)).unwrap();
        assert_eq!(d.row(0), &[0.0, 0.0, 0.5]);
        assert_eq!(d.indicator(0, 1), 1.0);
        assert_eq!(d.indicator(0, 2), 0.0);
    }

    #[test]
    fn top_level_sets_last_dummy() {
        let d = encode_design(&table(&[["2", "3", "-1"]]), &spec(2)).unwrap();
        assert_eq!(&d.row(0)[..2], &[0.0, 1.0]);
        assert_eq!(d.response(0), 1);
    }

    #[test]
    fn indicators_sum_to_one() {
        let d = encode_design(
            &table(&[["1", "2", "0"], ["3", "1", "1"], ["2", "3", "2"]]),
            &spec(3),
        )
        .unwrap();
        for i in 0..d.n() {
            let total: f64 = (1..=3).map(|j| d.indicator(i, j)).sum();
            assert_eq!(total, 1.0);
            assert!(d.row(i)[..2].iter().sum::<f64>() <= 1.0);
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            encode_design(&table(&[]), &spec(2)),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            encode_design(&table(&[["3", "1", "0"]]), &spec(2)),
            Err(Error::UnknownLevel { .. })
        ));
        assert!(matches!(
            encode_design(&table(&[["1", "4", "0"]]), &spec(2)),
            Err(Error::UnknownLevel { .. })
        ));
        assert!(matches!(
            encode_design(&table(&[["1", "1", "abc"]]), &spec(2)),
            Err(Error::InvalidNumber { .. })
        ));
        let mut t = table(&[["1", "1", "0"]]);
        t.columns[2] = "other".into();
        assert!(matches!(
            encode_design(&t, &spec(2)),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = table(&[["1", "2", "0.25"], ["2", "1", "3"]]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(RawTable::from_reader(buf.as_slice()).unwrap(), t);
    }
}
