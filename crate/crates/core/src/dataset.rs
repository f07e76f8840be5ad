//! CSV ingestion, min-max normalization and stratified splitting.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IRIS_DATA: &str = include_str!("../data/iris.data");
const WISCONSIN_DATA: &str = include_str!("../data/breast-cancer-wisconsin.data");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<Sample>,
    pub num_classes: usize,
    pub num_features: usize,
    /// Raw label text for each class index.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    fn with_samples(&self, samples: Vec<Sample>) -> Dataset {
        Dataset {
            name: self.name.clone(),
            samples,
            num_classes: self.num_classes,
            num_features: self.num_features,
            class_names: self.class_names.clone(),
        }
    }

    /// Fisher's Iris, as distributed by UCI (150 rows, 3 classes).
    pub fn iris() -> Dataset {
        parse_csv(IRIS_DATA.as_bytes(), "iris", &CsvSchema::iris())
            .expect("bundled iris data is well formed")
    }

    /// Original Wisconsin breast-cancer data with incomplete rows dropped.
    pub fn wisconsin() -> Dataset {
        parse_csv(
            WISCONSIN_DATA.as_bytes(),
            "wisconsin",
            &CsvSchema::wisconsin(),
        )
        .expect("bundled wisconsin data is well formed")
    }
}

/// A column selected by 0-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.trim().to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_col: Column,
    pub feature_cols: Vec<Column>,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default = "default_missing_marker")]
    pub missing_marker: String,
}

fn default_missing_marker() -> String {
    "?".into()
}

impl CsvSchema {
    pub fn iris() -> Self {
        Self {
            label_col: Column::Index(4),
            feature_cols: (0..4).map(Column::Index).collect(),
            has_header: false,
            missing_marker: "?".into(),
        }
    }

    pub fn wisconsin() -> Self {
        Self {
            label_col: Column::Index(10),
            feature_cols: (1..10).map(Column::Index).collect(),
            has_header: false,
            missing_marker: "?".into(),
        }
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_csv(file, &name, schema)
}

/// Parse delimited text into a dataset. Rows containing the missing marker or
/// an empty cell in any used column are dropped; class indices follow first
/// appearance of each label.
pub fn parse_csv<R: Read>(reader: R, name: &str, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = if schema.has_header {
        Some(rdr.headers()?.clone())
    } else {
        None
    };
    let resolve = |col: &Column| -> Result<usize> {
        match col {
            Column::Index(i) => Ok(*i),
            Column::Name(n) => headers
                .as_ref()
                .and_then(|h| h.iter().position(|x| x == n))
                .ok_or_else(|| Error::MissingColumn(n.clone())),
        }
    };
    let label_idx = resolve(&schema.label_col)?;
    let feature_idx = schema
        .feature_cols
        .iter()
        .map(resolve)
        .collect::<Result<Vec<_>>>()?;
    if feature_idx.is_empty() {
        return Err(Error::InvalidConfig("no feature columns given".into()));
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut class_of: HashMap<String, usize> = HashMap::new();
    let mut samples = Vec::new();
    let mut saw_label_col = false;

    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = row_no + 1 + usize::from(schema.has_header);
        let Some(label) = record.get(label_idx) else {
            continue;
        };
        saw_label_col = true;
        let missing = |v: &str| v.is_empty() || v == schema.missing_marker;
        if missing(label) {
            continue;
        }
        let mut features = Vec::with_capacity(feature_idx.len());
        let mut complete = true;
        for &i in &feature_idx {
            match record.get(i) {
                Some(v) if !missing(v) => {
                    let x: f64 = v.parse().map_err(|_| Error::Parse {
                        line,
                        value: v.to_string(),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::Parse {
                            line,
                            value: v.to_string(),
                        });
                    }
                    features.push(x);
                }
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let next = class_names.len();
        let label = *class_of.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            next
        });
        samples.push(Sample { features, label });
    }

    if samples.is_empty() {
        if !saw_label_col && headers.is_some() {
            return Err(Error::MissingColumn(format!("{:?}", schema.label_col)));
        }
        return Err(Error::NoUsableRows);
    }
    Ok(Dataset {
        name: name.to_string(),
        num_classes: class_names.len(),
        num_features: feature_idx.len(),
        class_names,
        samples,
    })
}

/// Min-max scale every feature to `[0, 1]`; constant features map to 0.5.
pub fn normalize(d: &Dataset) -> Dataset {
    let f = d.num_features;
    let mut lo = vec![f64::INFINITY; f];
    let mut hi = vec![f64::NEG_INFINITY; f];
    for s in &d.samples {
        for (j, &x) in s.features.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let samples = d
        .samples
        .iter()
        .map(|s| Sample {
            features: s
                .features
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        ((x - lo[j]) / span).clamp(0.0, 1.0)
                    } else {
                        0.5
                    }
                })
                .collect(),
            label: s.label,
        })
        .collect();
    d.with_samples(samples)
}

/// Stratified split. Each class contributes `round(count * train_fraction)`
/// samples to the training side; original order is kept within each side.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; d.len()];
    for class in 0..d.num_classes {
        let mut idx: Vec<usize> = (0..d.len())
            .filter(|&i| d.samples[i].label == class)
            .collect();
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::EmptyClassPartition { class });
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = d
        .samples
        .iter()
        .zip(&in_train)
        .partition(|(_, &t)| t);
    let unzip = |v: Vec<(&Sample, &bool)>| v.into_iter().map(|(s, _)| s.clone()).collect();
    Ok((d.with_samples(unzip(train)), d.with_samples(unzip(test))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_dataset(values: &[f64]) -> Dataset {
        Dataset {
            name: "t".into(),
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &x)| Sample {
                    features: vec![x],
                    label: i % 2,
                })
                .collect(),
            num_classes: 2,
            num_features: 1,
            class_names: vec!["a".into(), "b".into()],
        }
    }

    fn first_feature(d: &Dataset) -> Vec<f64> {
        d.samples.iter().map(|s| s.features[0]).collect()
    }

    #[test]
    fn bundled_iris_counts() {
        let d = Dataset::iris();
        assert_eq!(d.len(), 150);
        assert_eq!(d.num_classes, 3);
        assert_eq!(d.num_features, 4);
        assert_eq!(d.class_counts(), vec![50, 50, 50]);
    }

    #[test]
    fn bundled_wisconsin_counts() {
        let d = Dataset::wisconsin();
        assert_eq!(d.len(), 683);
        assert_eq!(d.num_classes, 2);
        assert_eq!(d.num_features, 9);
    }

    #[test]
    fn empty_input_has_no_rows() {
        let err = parse_csv("".as_bytes(), "e", &CsvSchema::iris()).unwrap_err();
        assert_eq!(err.to_string(), "zero usable rows");
    }

    #[test]
    fn missing_label_column_by_name() {
        let schema = CsvSchema {
            label_col: Column::Name("species".into()),
            feature_cols: vec![Column::Name("x".into())],
            has_header: true,
            missing_marker: "?".into(),
        };
        let err = parse_csv("x,y\n1,a\n".as_bytes(), "h", &schema).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
    }

    #[test]
    fn header_names_and_missing_rows() {
        let schema = CsvSchema {
            label_col: Column::Name("cls".into()),
            feature_cols: vec![Column::Name("a".into()), Column::Name("b".into())],
            has_header: true,
            missing_marker: "NA".into(),
        };
        let text = "a,b,cls\n1,2,x\nNA,3,y\n4,,y\n5,6,y\n";
        let d = parse_csv(text.as_bytes(), "h", &schema).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.class_names, vec!["x", "y"]);
        assert_eq!(d.samples[1].features, vec![5.0, 6.0]);
    }

    #[test]
    fn bad_number_is_an_error() {
        let err = parse_csv("1,2,3,oops,a\n".as_bytes(), "b", &CsvSchema::iris()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn normalize_examples() {
        let d = normalize(&column_dataset(&[2.0, 4.0, 6.0]));
        assert_eq!(first_feature(&d), vec![0.0, 0.5, 1.0]);
        let d = normalize(&column_dataset(&[5.0, 5.0, 5.0]));
        assert_eq!(first_feature(&d), vec![0.5, 0.5, 0.5]);
        let d = normalize(&column_dataset(&[0.0, 0.25, 1.0]));
        assert_eq!(first_feature(&d), vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn normalize_idempotent_on_iris() {
        let once = normalize(&Dataset::iris());
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn iris_half_split() {
        let d = Dataset::iris();
        let (train, test) = split(&d, 0.5, 7).unwrap();
        assert_eq!((train.len(), test.len()), (75, 75));
        assert_eq!(train.class_counts(), vec![25, 25, 25]);
        assert_eq!(test.class_counts(), vec![25, 25, 25]);
        let again = split(&d, 0.5, 7).unwrap();
        assert_eq!(again.0, train);
        assert_eq!(again.1, test);
    }

    #[test]
    fn split_rejects_emptied_class() {
        let d = Dataset {
            name: "tiny".into(),
            samples: (0..9)
                .map(|i| Sample {
                    features: vec![i as f64],
                    label: i / 3,
                })
                .collect(),
            num_classes: 3,
            num_features: 1,
            class_names: vec!["a".into(), "b".into(), "c".into()],
        };
        assert!(matches!(
            split(&d, 0.999, 1),
            Err(Error::EmptyClassPartition { .. })
        ));
    }
}
