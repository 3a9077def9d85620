//! In-memory training data.
//!
//! A [`Dataset`] stores its feature matrix with one row per *feature* and one
//! column per *sample* (an `m x n` matrix), so every per-feature statistic
//! reads a contiguous slice.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// Maps `+1` to [`Label::Positive`] and `-1` to [`Label::Negative`].
    pub fn from_sign(sign: i32) -> Option<Label> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("positive"),
            Label::Negative => f.write_str("negative"),
        }
    }
}

/// Ascending sample indices of each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

/// Labeled samples stored features-by-samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_features: usize,
    labels: Vec<Label>,
    feature_names: Option<Vec<String>>,
    n_pos: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major `m x n` buffer, where row `i` holds
    /// feature `i` for all `n = labels.len()` samples.
    pub fn from_feature_major(values: Vec<f64>, n_features: usize, labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n_features * n {
            return Err(Error::DimensionMismatch {
                expected: n_features * n,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                feature: pos / n.max(1),
                sample: pos % n.max(1),
            });
        }
        let n_pos = labels.iter().filter(|&&l| l == Label::Positive).count();
        if n_pos == 0 {
            return Err(Error::EmptyClass(Label::Positive));
        }
        if n_pos == n {
            return Err(Error::EmptyClass(Label::Negative));
        }
        Ok(Dataset {
            values,
            n_features,
            labels,
            feature_names: None,
            n_pos,
        })
    }

    /// Builds a dataset from a list of feature rows (each of length `n`).
    pub fn from_feature_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_feature_major(values, rows.len(), labels)
    }

    /// Builds a dataset from sample vectors (each of length `m`), transposing
    /// them into the features-by-samples layout.
    pub fn from_samples(samples: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: samples.len(),
            });
        }
        let m = samples.first().map_or(0, Vec::len);
        let n = samples.len();
        let mut values = vec![0.0; m * n];
        for (j, sample) in samples.iter().enumerate() {
            if sample.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: sample.len(),
                });
            }
            for (i, &v) in sample.iter().enumerate() {
                values[i * n + j] = v;
            }
        }
        Self::from_feature_major(values, m, labels)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positive(&self) -> usize {
        self.n_pos
    }

    pub fn n_negative(&self) -> usize {
        self.labels.len() - self.n_pos
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Name of feature `i`, falling back to `x{i}` when the dataset is unnamed.
    pub fn feature_name(&self, i: usize) -> String {
        match &self.feature_names {
            Some(names) => names[i].clone(),
            None => format!("x{i}"),
        }
    }

    /// Values of feature `i` across all samples.
    pub fn feature(&self, i: usize) -> &[f64] {
        let n = self.n_samples();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let n = self.n_samples().max(1);
        self.values.chunks_exact(n).take(self.n_features)
    }

    /// Sample `j` as a length-`m` vector.
    pub fn sample(&self, j: usize) -> Vec<f64> {
        self.features().map(|row| row[j]).collect()
    }

    pub fn partition(&self) -> Partition {
        let mut positive = Vec::with_capacity(self.n_pos);
        let mut negative = Vec::with_capacity(self.n_negative());
        for (j, label) in self.labels.iter().enumerate() {
            match label {
                Label::Positive => positive.push(j),
                Label::Negative => negative.push(j),
            }
        }
        Partition { positive, negative }
    }

    /// Restricts the dataset to the given samples, in the given order.
    pub fn select_samples(&self, indices: &[usize]) -> Result<Dataset> {
        let n = self.n_samples();
        if let Some(&bad) = indices.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidArgument(format!(
                "sample index {bad} out of range for {n} samples"
            )));
        }
        let mut values = Vec::with_capacity(self.n_features * indices.len());
        for row in self.features() {
            values.extend(indices.iter().map(|&j| row[j]));
        }
        let labels = indices.iter().map(|&j| self.labels[j]).collect();
        let mut out = Dataset::from_feature_major(values, self.n_features, labels)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Applies `f(feature_index, row)` to every feature row, returning a new dataset.
    pub(crate) fn map_features(&self, mut f: impl FnMut(usize, &[f64], &mut Vec<f64>)) -> Result<Dataset> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, row) in self.features().enumerate() {
            f(i, row, &mut values);
        }
        let mut out = Dataset::from_feature_major(values, self.n_features, self.labels.clone())?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }
}

/// How features are rescaled before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    #[default]
    None,
    /// Divide by the sample standard deviation.
    Sd,
    /// Divide by the sample variance.
    Variance,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ScaleMode::None),
            "sd" => Ok(ScaleMode::Sd),
            "variance" => Ok(ScaleMode::Variance),
            other => Err(Error::InvalidArgument(format!(
                "unknown scale mode {other:?} (expected none, sd or variance)"
            ))),
        }
    }
}

/// Per-feature divisors; a transformed feature is `x_i / sigma_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale {
    sigma: Vec<f64>,
}

impl FeatureScale {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if let Some(i) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "scale for feature {i} must be positive and finite, got {}",
                sigma[i]
            )));
        }
        Ok(FeatureScale { sigma })
    }

    pub fn identity(m: usize) -> Self {
        FeatureScale { sigma: vec![1.0; m] }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Maps a raw sample into scaled coordinates.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.sigma).map(|(v, s)| v / s).collect()
    }

    /// Maps a scaled sample back to raw coordinates.
    pub fn unapply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.sigma).map(|(v, s)| v * s).collect()
    }

    /// Applies the inverse transform to every feature row of `d`.
    pub fn unscale(&self, d: &Dataset) -> Result<Dataset> {
        if self.len() != d.n_features() {
            return Err(Error::DimensionMismatch {
                expected: d.n_features(),
                found: self.len(),
            });
        }
        d.map_features(|i, row, out| out.extend(row.iter().map(|v| v * self.sigma[i])))
    }
}

/// Rescales each feature row, with sample statistics using `ddof = 1`.
pub fn standardize(d: &Dataset, mode: ScaleMode) -> Result<(Dataset, FeatureScale)> {
    standardize_with_ddof(d, mode, 1)
}

/// Rescales each feature row by its standard deviation or variance computed
/// with denominator `n - ddof`. Constant features keep a scale of 1.
pub fn standardize_with_ddof(d: &Dataset, mode: ScaleMode, ddof: usize) -> Result<(Dataset, FeatureScale)> {
    let n = d.n_samples();
    if mode != ScaleMode::None && ddof >= n {
        return Err(Error::InvalidArgument(format!(
            "ddof = {ddof} leaves no degrees of freedom with {n} samples"
        )));
    }
    let sigma: Vec<f64> = d
        .features()
        .enumerate()
        .map(|(i, row)| {
            let s = match mode {
                ScaleMode::None => return 1.0,
                ScaleMode::Sd => variance(row, ddof).sqrt(),
                ScaleMode::Variance => variance(row, ddof),
            };
            if s > 0.0 && s.is_finite() {
                s
            } else {
                warn!("feature {} is constant; leaving it unscaled", d.feature_name(i));
                1.0
            }
        })
        .collect();
    let scale = FeatureScale { sigma };
    let scaled = d.map_features(|i, row, out| out.extend(row.iter().map(|v| v / scale.sigma[i])))?;
    Ok((scaled, scale))
}

fn variance(row: &[f64], ddof: usize) -> f64 {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - ddof as f64)
}

/// Which raw label strings denote each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for LabelMapping {
    fn default() -> Self {
        LabelMapping {
            positive: vec!["1".into(), "+1".into()],
            negative: vec!["-1".into()],
        }
    }
}

impl LabelMapping {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Self {
        LabelMapping {
            positive: vec![positive.into()],
            negative: vec![negative.into()],
        }
    }

    fn resolve(&self, raw: &str) -> Option<Label> {
        if self.positive.iter().any(|p| p == raw) {
            Some(Label::Positive)
        } else if self.negative.iter().any(|p| p == raw) {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: String,
    pub labels: LabelMapping,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: "label".into(),
            labels: LabelMapping::default(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

/// Parses a header-first CSV with one sample per row.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let table = read_table(reader, Some(&opts.label_column))?;
    let label_raw = table.label_values.expect("label column requested");
    let labels = label_raw
        .iter()
        .map(|(line, raw)| {
            opts.labels.resolve(raw).ok_or_else(|| Error::UnknownLabel {
                row: *line,
                value: raw.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_samples_checked(&table.rows, labels, table.names.len())?.with_feature_names(table.names)
}

impl Dataset {
    fn from_samples_checked(samples: &[Vec<f64>], labels: Vec<Label>, m: usize) -> Result<Dataset> {
        if samples.is_empty() {
            return Err(Error::EmptyClass(Label::Positive));
        }
        let n = samples.len();
        let mut values = vec![0.0; m * n];
        for (j, sample) in samples.iter().enumerate() {
            for (i, &v) in sample.iter().enumerate() {
                values[i * n + j] = v;
            }
        }
        Dataset::from_feature_major(values, m, labels)
    }
}

/// Unlabeled (or label-stripped) numeric rows read from a CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads feature rows, dropping `label_column` if the header contains it.
pub fn load_feature_table(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    std::io::BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(FeatureTable {
            names: Vec::new(),
            rows: Vec::new(),
        });
    }
    let has_label = {
        let mut rdr = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
        let headers = rdr.headers()?;
        label_column.is_some_and(|c| headers.iter().any(|h| h.trim() == c))
    };
    let table = read_table(bytes.as_slice(), if has_label { label_column } else { None })?;
    Ok(FeatureTable {
        names: table.names,
        rows: table.rows,
    })
}

struct RawTable {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    label_values: Option<Vec<(usize, String)>>,
}

fn read_table<R: Read>(reader: R, label_column: Option<&str>) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let label_idx = match label_column {
        Some(col) => {
            let hits: Vec<usize> = headers
                .iter()
                .enumerate()
                .filter(|(_, h)| *h == col)
                .map(|(i, _)| i)
                .collect();
            match hits.as_slice() {
                [] => return Err(Error::MissingLabelColumn(col.to_string())),
                [i] => Some(*i),
                _ => return Err(Error::DuplicateLabelColumn(col.to_string())),
            }
        }
        None => None,
    };

    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut label_values = label_idx.map(|_| Vec::new());
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: line,
                expected: headers.len(),
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(names.len());
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if Some(i) == label_idx {
                if let Some(labels) = label_values.as_mut() {
                    labels.push((line, cell.to_string()));
                }
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(Error::ParseCell {
                        row: line,
                        column: headers[i].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        rows.push(row);
    }
    Ok(RawTable {
        names,
        rows,
        label_values,
    })
}

/// Writes `d` as CSV: feature columns in order, then the label column. Reals
/// use the shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(d: &Dataset, writer: W, label_column: &str, positive: &str, negative: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..d.n_features()).map(|i| d.feature_name(i)).collect();
    header.push(label_column.to_string());
    wtr.write_record(&header)?;
    for j in 0..d.n_samples() {
        let mut record: Vec<String> = d.features().map(|row| format!("{:?}", row[j])).collect();
        record.push(match d.labels()[j] {
            Label::Positive => positive.to_string(),
            Label::Negative => negative.to_string(),
        });
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn opts(pos: &str, neg: &str) -> CsvOptions {
        CsvOptions {
            label_column: "y".into(),
            labels: LabelMapping::new(pos, neg),
        }
    }

    #[test]
    fn loads_and_transposes() {
        let csv = "a,y,b\n1,pos,2\n3,neg,4\n5,pos,6e0\n-7.5,neg,1e-3\n";
        let d = read_csv(csv.as_bytes(), &opts("pos", "neg")).unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_samples(), 4);
        assert_eq!(d.feature(0), &[1.0, 3.0, 5.0, -7.5]);
        assert_eq!(d.feature(1), &[2.0, 4.0, 6.0, 1e-3]);
        assert_eq!(d.labels(), &[P, N, P, N]);
        assert_eq!(d.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn unknown_label_names_row() {
        let csv = "a,y\n1,pos\n2,maybe\n3,neg\n";
        let err = read_csv(csv.as_bytes(), &opts("pos", "neg")).unwrap_err();
        match err {
            Error::UnknownLabel { row, value } => {
                assert_eq!(row, 3);
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn all_positive_is_rejected() {
        let csv = "a,y\n1,pos\n2,pos\n";
        let err = read_csv(csv.as_bytes(), &opts("pos", "neg")).unwrap_err();
        assert_eq!(err.to_string(), "class empty: negative");
    }

    #[test]
    fn header_problems() {
        let err = read_csv("a,b\n1,2\n".as_bytes(), &opts("1", "2")).unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
        let err = read_csv("y,a,y\n1,2,1\n".as_bytes(), &opts("1", "2")).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabelColumn(_)));
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = read_csv(
            "a,b,y\n1,2,1\n3,oops,-1\n".as_bytes(),
            &CsvOptions {
                label_column: "y".into(),
                labels: LabelMapping::default(),
            },
        )
        .unwrap_err();
        match err {
            Error::ParseCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (3, "b", "oops"));
            }
            other => panic!("unexpected error {other}"),
        }
        let err = read_csv(
            "a,y\n1,1\nNaN,-1\n".as_bytes(),
            &CsvOptions {
                label_column: "y".into(),
                labels: LabelMapping::default(),
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::ParseCell { .. }));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/nonexistent/data.csv", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn partition_examples() {
        let d = Dataset::from_feature_rows(&[vec![0.0, 0.0, 0.0]], vec![P, N, P]).unwrap();
        let p = d.partition();
        assert_eq!((p.positive, p.negative), (vec![0, 2], vec![1]));

        let d = Dataset::from_feature_rows(&[vec![0.0, 0.0, 0.0]], vec![N, N, P]).unwrap();
        let p = d.partition();
        assert_eq!((p.positive, p.negative), (vec![2], vec![0, 1]));

        let err = Dataset::from_feature_rows(&[vec![0.0, 0.0]], vec![P, P]).unwrap_err();
        assert!(matches!(err, Error::EmptyClass(Label::Negative)));
    }

    #[test]
    fn rejects_non_finite() {
        let err = Dataset::from_feature_rows(&[vec![0.0, f64::INFINITY]], vec![P, N]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { feature: 0, sample: 1 }));
    }

    #[test]
    fn standardize_population_sd_one_is_identity() {
        let d = Dataset::from_feature_rows(&[vec![2.0, 4.0]], vec![P, N]).unwrap();
        let (s, scale) = standardize_with_ddof(&d, ScaleMode::Sd, 0).unwrap();
        assert_eq!(scale.sigma(), &[1.0]);
        assert_eq!(s.feature(0), &[2.0, 4.0]);
    }

    #[test]
    fn standardize_sample_sd() {
        let d = Dataset::from_feature_rows(&[vec![0.0, 2.0, 4.0]], vec![P, N, P]).unwrap();
        let (s, scale) = standardize(&d, ScaleMode::Sd).unwrap();
        // mean 2, squared deviations 4 + 0 + 4 over n - 1 = 2
        assert_eq!(scale.sigma(), &[2.0]);
        assert_eq!(s.feature(0), &[0.0, 1.0, 2.0]);

        let (s, scale) = standardize(&d, ScaleMode::Variance).unwrap();
        assert_eq!(scale.sigma(), &[4.0]);
        assert_eq!(s.feature(0), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_feature_keeps_unit_scale() {
        let d = Dataset::from_feature_rows(&[vec![5.0, 5.0, 5.0], vec![1.0, 2.0, 3.0]], vec![P, N, P]).unwrap();
        let (s, scale) = standardize(&d, ScaleMode::Sd).unwrap();
        assert_eq!(scale.sigma()[0], 1.0);
        assert_eq!(s.feature(0), &[5.0, 5.0, 5.0]);
        let (_, scale) = standardize(&d, ScaleMode::Variance).unwrap();
        assert_eq!(scale.sigma()[0], 1.0);
    }

    #[test]
    fn scale_none_is_identity() {
        let d = Dataset::from_feature_rows(&[vec![0.5, 2.0]], vec![P, N]).unwrap();
        let (s, scale) = standardize(&d, ScaleMode::None).unwrap();
        assert_eq!(s, d);
        assert_eq!(scale, FeatureScale::identity(1));
    }

    #[test]
    fn feature_scale_validation() {
        assert!(FeatureScale::new(vec![1.0, 0.0]).is_err());
        assert!(FeatureScale::new(vec![1.0, f64::NAN]).is_err());
        assert!(FeatureScale::new(vec![2.0]).is_ok());
    }
}
