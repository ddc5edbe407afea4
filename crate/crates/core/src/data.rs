//! Right-censored survival data with fixed covariates.
//!
//! A [`SurvivalSample`] holds the observed times `X_i = min(T_i, C_i)`, the
//! event indicators `δ_i`, the `n × p` covariate matrix and the study horizon
//! `τ`. All downstream estimators read risk sets from it with the convention
//! that subject `i` is at risk at `t` iff `X_i ≥ t`.

use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Quantile level used for the default study horizon.
pub const DEFAULT_TAU_QUANTILE: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct SurvivalSample {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Array2<f64>,
    tau: f64,
    names: Vec<String>,
    risk: RiskSetIndex,
}

impl SurvivalSample {
    /// Builds a sample with `tau` set to the 90% empirical quantile of `times`.
    pub fn new(times: Vec<f64>, events: Vec<bool>, covariates: Array2<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSample("sample must contain at least one subject".into()));
        }
        let tau = quantile_linear(&times, DEFAULT_TAU_QUANTILE);
        Self::with_tau(times, events, covariates, tau)
    }

    pub fn with_tau(
        times: Vec<f64>,
        events: Vec<bool>,
        covariates: Array2<f64>,
        tau: f64,
    ) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::InvalidSample("sample must contain at least one subject".into()));
        }
        if events.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: events.len() });
        }
        if covariates.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: covariates.nrows() });
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidSample(format!(
                "time of subject {i} is {} (must be finite and non-negative)",
                times[i]
            )));
        }
        if covariates.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidSample("covariates must be finite".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidSample(format!("tau must be positive, got {tau}")));
        }
        let names = (0..covariates.ncols()).map(|j| format!("z{}", j + 1)).collect();
        let risk = RiskSetIndex::new(&times);
        Ok(Self { times, events, covariates, tau, names, risk })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), got: names.len() });
        }
        self.names = names;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.names
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn risk_index(&self) -> &RiskSetIndex {
        &self.risk
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&d| d).count()
    }

    /// Events that fall inside the analysis window `[0, τ]`.
    pub fn n_events_in_window(&self) -> usize {
        self.times
            .iter()
            .zip(&self.events)
            .filter(|(&x, &d)| d && x <= self.tau)
            .count()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.covariates.row(i)
    }

    /// Linear predictor `β·Z_i` for every subject.
    pub fn linear_predictor(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        Ok(self
            .covariates
            .rows()
            .into_iter()
            .map(|z| z.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub(crate) fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), got: beta.len() });
        }
        Ok(())
    }

    /// Restricts the sample to the given subjects, keeping `tau`.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let times = rows.iter().map(|&i| self.times[i]).collect();
        let events = rows.iter().map(|&i| self.events[i]).collect();
        let covariates = self.covariates.select(ndarray::Axis(0), rows);
        Self::with_tau(times, events, covariates, self.tau)?.with_names(self.names.clone())
    }

    /// Keeps only the listed covariate columns.
    pub fn select_covariates(&self, cols: &[usize]) -> Result<Self> {
        let covariates = self.covariates.select(ndarray::Axis(1), cols);
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        Self::with_tau(self.times.clone(), self.events.clone(), covariates, self.tau)?
            .with_names(names)
    }

    pub fn set_tau(&mut self, tau: f64) -> Result<()> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidSample(format!("tau must be positive, got {tau}")));
        }
        self.tau = tau;
        Ok(())
    }
}

/// Subjects sorted by observed time, with at-risk counts per distinct time.
#[derive(Debug, Clone)]
pub struct RiskSetIndex {
    order: Vec<usize>,
    sorted_times: Vec<f64>,
    distinct_times: Vec<f64>,
    at_risk_counts: Vec<usize>,
}

impl RiskSetIndex {
    pub fn new(times: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
        let sorted_times: Vec<f64> = order.iter().map(|&i| times[i]).collect();
        let n = times.len();
        let mut distinct_times = Vec::new();
        let mut at_risk_counts = Vec::new();
        for (k, &t) in sorted_times.iter().enumerate() {
            if distinct_times.last() != Some(&t) {
                distinct_times.push(t);
                at_risk_counts.push(n - k);
            }
        }
        Self { order, sorted_times, distinct_times, at_risk_counts }
    }

    /// Permutation sorting subjects by ascending time (ties by index).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted_times(&self) -> &[f64] {
        &self.sorted_times
    }

    pub fn distinct_times(&self) -> &[f64] {
        &self.distinct_times
    }

    pub fn at_risk_counts(&self) -> &[usize] {
        &self.at_risk_counts
    }

    /// Position in `order` of the first subject with `X ≥ t`.
    pub fn first_at_risk(&self, t: f64) -> usize {
        self.sorted_times.partition_point(|&x| x < t)
    }

    /// `#{j : X_j ≥ t}`.
    pub fn count_at_risk(&self, t: f64) -> usize {
        self.sorted_times.len() - self.first_at_risk(t)
    }
}

/// `S_n(β, t) = (1/n) Σ_i exp(β·Z_i) 1{X_i ≥ t}`.
pub fn s_n(sample: &SurvivalSample, beta: &[f64], t: f64) -> Result<f64> {
    let eta = sample.linear_predictor(beta)?;
    let total: f64 = sample
        .times()
        .iter()
        .zip(&eta)
        .filter(|(&x, _)| x >= t)
        .map(|(_, e)| e.exp())
        .sum();
    Ok(total / sample.n() as f64)
}

/// Normalized at-risk proportion `Ȳ(t) = (1/n) Σ_i 1{X_i ≥ t}`.
pub fn bar_y(sample: &SurvivalSample, t: f64) -> f64 {
    sample.risk_index().count_at_risk(t) as f64 / sample.n() as f64
}

/// Unnormalized at-risk count `Σ_i 1{X_i ≥ t}`.
pub fn at_risk_count(sample: &SurvivalSample, t: f64) -> usize {
    sample.risk_index().count_at_risk(t)
}

/// Empirical quantile with linear interpolation between order statistics
/// (`x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])` with `h = (n − 1)q`).
pub fn quantile_linear(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub time: String,
    pub status: String,
    /// Covariate columns; `None` takes every other column in file order.
    pub covariates: Option<Vec<String>>,
    /// Overrides the default 90% quantile horizon.
    pub tau: Option<f64>,
    /// Skip rows with missing values instead of rejecting the file.
    pub drop_incomplete: bool,
}

impl CsvSchema {
    pub fn new(time: impl Into<String>, status: impl Into<String>) -> Self {
        Self {
            time: time.into(),
            status: status.into(),
            covariates: None,
            tau: None,
            drop_incomplete: false,
        }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field.trim(), "" | "NA" | "na" | "NaN" | "nan" | "." | "null")
}

/// Reads a header-first CSV file into a validated sample.
///
/// Row numbers in diagnostics are 1-based data rows (the header is row 0).
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<SurvivalSample> {
    let path = path.as_ref();
    let schema_err = |message: String| Error::Schema { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema_err(format!("column `{name}` not found")))
    };
    let time_col = column(&schema.time)?;
    let status_col = column(&schema.status)?;
    let cov_names: Vec<String> = match &schema.covariates {
        Some(names) => names.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != time_col && *k != status_col)
            .map(|(_, h)| h.to_string())
            .collect(),
    };
    if cov_names.is_empty() {
        return Err(schema_err("at least one covariate column is required".into()));
    }
    let cov_cols = cov_names.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;

    let p = cov_cols.len();
    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut flat = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let row_err = |message: String| Error::Row { path: path.to_path_buf(), row, message };
        let record = record.map_err(|e| row_err(e.to_string()))?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let used = std::iter::once(time_col).chain(std::iter::once(status_col)).chain(cov_cols.iter().copied());
        if let Some(col) = used.clone().find(|&c| is_missing(field(c))) {
            if schema.drop_incomplete {
                continue;
            }
            return Err(row_err(format!("missing value in column `{}`", &headers[col])));
        }
        let number = |col: usize| -> Result<f64> {
            let raw = field(col);
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| row_err(format!("column `{}`: cannot parse `{raw}` as a number", &headers[col])))?;
            if !v.is_finite() {
                return Err(row_err(format!("column `{}`: non-finite value", &headers[col])));
            }
            Ok(v)
        };
        let t = number(time_col)?;
        if t < 0.0 {
            return Err(row_err(format!("negative time {t}")));
        }
        let status = number(status_col)?;
        let event = if status == 0.0 {
            false
        } else if status == 1.0 {
            true
        } else {
            return Err(row_err(format!("status must be 0 or 1, got {}", field(status_col))));
        };
        times.push(t);
        events.push(event);
        for &c in &cov_cols {
            flat.push(number(c)?);
        }
    }
    if times.is_empty() {
        return Err(schema_err("no data rows".into()));
    }
    let n = times.len();
    let covariates = Array2::from_shape_vec((n, p), flat).expect("row-major buffer of n*p values");
    let tau = schema.tau.unwrap_or_else(|| quantile_linear(&times, DEFAULT_TAU_QUANTILE));
    SurvivalSample::with_tau(times, events, covariates, tau)?.with_names(cov_names)
}

/// Writes `time,status,<covariates...>` with shortest round-trip float formatting.
pub fn write_csv(sample: &SurvivalSample, path: impl AsRef<Path>, time: &str, status: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![time.to_string(), status.to_string()];
    header.extend(sample.covariate_names().iter().cloned());
    writer.write_record(&header)?;
    for i in 0..sample.n() {
        let mut record = vec![sample.times()[i].to_string(), u8::from(sample.events()[i]).to_string()];
        record.extend(sample.row(i).iter().map(|z| z.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn three() -> SurvivalSample {
        SurvivalSample::new(vec![1.0, 2.0, 3.0], vec![true; 3], Array2::zeros((3, 1))).unwrap()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn s_n_counts_risk_set() {
        let s = three();
        assert!((s_n(&s, &[0.0], 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s_n(&s, &[0.0], 3.5).unwrap(), 0.0);
    }

    #[test]
    fn s_n_weights_by_exp_linear_predictor() {
        let s = SurvivalSample::new(vec![1.0, 2.0], vec![true, true], array![[1.0], [-1.0]]).unwrap();
        let v = s_n(&s, &[2f64.ln()], 0.0).unwrap();
        assert!((v - 1.25).abs() < 1e-15);
    }

    #[test]
    fn s_n_rejects_wrong_beta_length() {
        assert!(matches!(s_n(&three(), &[0.0, 1.0], 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bar_y_examples() {
        let s = three();
        assert_eq!(bar_y(&s, 1.0), 1.0);
        assert!((bar_y(&s, 2.5) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(bar_y(&s, 0.0), 1.0);
    }

    #[test]
    fn risk_index_counts() {
        let idx = RiskSetIndex::new(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(idx.order(), &[1, 2, 3, 0]);
        assert_eq!(idx.distinct_times(), &[1.0, 2.0, 3.0]);
        assert_eq!(idx.at_risk_counts(), &[4, 3, 1]);
        assert_eq!(idx.count_at_risk(2.0), 3);
    }

    #[test]
    fn quantile_on_one_to_ten() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((quantile_linear(&v, 0.9) - 9.1).abs() < 1e-12);
    }

    #[test]
    fn load_three_rows() {
        let f = write_tmp("time,status,age\n1,1,0.5\n2,1,0.1\n3,1,-2\n");
        let s = load_csv(f.path(), &CsvSchema::new("time", "status")).unwrap();
        assert_eq!((s.n(), s.p()), (3, 1));
        assert_eq!(s.covariate_names(), &["age".to_string()]);
    }

    #[test]
    fn load_default_tau_is_linear_quantile() {
        let mut body = String::from("t,d,z\n");
        for k in 1..=10 {
            body.push_str(&format!("{k},1,0\n"));
        }
        let f = write_tmp(&body);
        let s = load_csv(f.path(), &CsvSchema::new("t", "d")).unwrap();
        assert!((s.tau() - 9.1).abs() < 1e-12);
    }

    #[test]
    fn load_rejects_bad_status_with_row() {
        let f = write_tmp("time,status,z\n1,1,0\n2,2,0\n");
        let err = load_csv(f.path(), &CsvSchema::new("time", "status")).unwrap_err();
        match err {
            Error::Row { row, message, .. } => {
                assert_eq!(row, 2);
                assert!(message.contains("status"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn load_rejects_negative_time_and_missing() {
        let f = write_tmp("time,status,z\n-1,1,0\n");
        assert!(matches!(load_csv(f.path(), &CsvSchema::new("time", "status")), Err(Error::Row { row: 1, .. })));
        let f = write_tmp("time,status,z\n1,1,0\n2,0,NA\n");
        assert!(matches!(load_csv(f.path(), &CsvSchema::new("time", "status")), Err(Error::Row { row: 2, .. })));
    }

    #[test]
    fn load_can_drop_incomplete_rows() {
        let f = write_tmp("time,status,z\n1,1,0\n2,0,\n3,1,1\n");
        let mut schema = CsvSchema::new("time", "status");
        schema.drop_incomplete = true;
        let s = load_csv(f.path(), &schema).unwrap();
        assert_eq!(s.times(), &[1.0, 3.0]);
    }

    #[test]
    fn load_rejects_unknown_column() {
        let f = write_tmp("time,status,z\n1,1,0\n");
        let mut schema = CsvSchema::new("time", "status");
        schema.covariates = Some(vec!["w".into()]);
        assert!(matches!(load_csv(f.path(), &schema), Err(Error::Schema { .. })));
    }

    #[test]
    fn constructor_validates() {
        assert!(SurvivalSample::new(vec![], vec![], Array2::zeros((0, 1))).is_err());
        assert!(SurvivalSample::new(vec![1.0], vec![true, false], Array2::zeros((1, 1))).is_err());
        assert!(SurvivalSample::with_tau(vec![1.0], vec![true], Array2::zeros((1, 1)), 0.0).is_err());
    }
}
