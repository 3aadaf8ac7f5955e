//! Adult census ingestion, one-hot encoding and semi-supervised splits.
//!
//! The pipeline keeps twelve of the fourteen Adult attributes (`fnlwgt` and
//! `education-num` are dropped), removes every record with a missing value,
//! one-hot encodes the eight categorical columns plus an eleven-bucket age
//! encoding, and keeps the three remaining numeric columns as z-scores.
//! Over the official train and test files this yields 45,222 rows and 112
//! columns.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Number of fields in a raw Adult row.
const RAW_FIELDS: usize = 15;

/// Left-closed age bucket boundaries.
pub const AGE_BOUNDARIES: [u32; 10] = [18, 25, 30, 35, 40, 45, 50, 55, 60, 65];
pub const AGE_BUCKETS: usize = AGE_BOUNDARIES.len() + 1;

pub const CATEGORICAL_COLUMNS: [&str; 8] = [
    "workclass",
    "education",
    "marital_status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "native_country",
];

pub const CONTINUOUS_COLUMNS: [&str; 3] = ["capital_gain", "capital_loss", "hours_per_week"];

/// Encoded width of the Adult pipeline.
pub const ADULT_FEATURES: usize = 112;
/// Retained record count over the official train and test files.
pub const ADULT_SAMPLES: usize = 45_222;

/// Protected-group value of the `sex` column.
const PROTECTED_SEX: &str = "Female";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub age: u32,
    pub workclass: String,
    pub education: String,
    pub marital_status: String,
    pub occupation: String,
    pub relationship: String,
    pub race: String,
    pub sex: String,
    pub capital_gain: u64,
    pub capital_loss: u64,
    pub hours_per_week: u32,
    pub native_country: String,
    pub income_label: u8,
}

impl RawRecord {
    /// Categorical values in [`CATEGORICAL_COLUMNS`] order.
    pub fn categorical(&self) -> [&str; 8] {
        [
            &self.workclass,
            &self.education,
            &self.marital_status,
            &self.occupation,
            &self.relationship,
            &self.race,
            &self.sex,
            &self.native_country,
        ]
    }

    fn continuous(&self) -> [f64; 3] {
        [
            self.capital_gain as f64,
            self.capital_loss as f64,
            f64::from(self.hours_per_week),
        ]
    }
}

/// Sample label: ground truth or unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Zero,
    One,
    Unknown,
}

impl Label {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Label::Zero
        } else {
            Label::One
        }
    }

    /// The binary value, if known.
    pub fn value(self) -> Option<u8> {
        match self {
            Label::Zero => Some(0),
            Label::One => Some(1),
            Label::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != Label::Unknown
    }

    fn symbol(self) -> &'static str {
        match self {
            Label::Zero => "0",
            Label::One => "1",
            Label::Unknown => "u",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "0" => Some(Label::Zero),
            "1" => Some(Label::One),
            "u" => Some(Label::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Protected-attribute group: `p` (protected) or `n` (unprotected).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Protected,
    Unprotected,
}

impl Group {
    fn symbol(self) -> &'static str {
        match self {
            Group::Protected => "p",
            Group::Unprotected => "n",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "p" => Some(Group::Protected),
            "n" => Some(Group::Unprotected),
            _ => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<Label>,
    pub protected: Vec<Group>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<Label>,
        protected: Vec<Group>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (rows, cols) = features.dim();
        if labels.len() != rows || protected.len() != rows {
            return Err(Error::Shape(format!(
                "{rows} feature rows but {} labels and {} group tags",
                labels.len(),
                protected.len()
            )));
        }
        if feature_names.len() != cols {
            return Err(Error::Shape(format!(
                "{cols} feature columns but {} names",
                feature_names.len()
            )));
        }
        Ok(Self {
            features,
            labels,
            protected,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_known()).count()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            protected: indices.iter().map(|&i| self.protected[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Removes every sample whose label is unknown.
    pub fn drop_unlabeled(&self) -> Dataset {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i].is_known()).collect();
        self.select(&keep)
    }
}

/// Converts an age in years to its bucket index in `0..AGE_BUCKETS`.
pub fn bucketize_age(age: u32) -> usize {
    AGE_BOUNDARIES.iter().take_while(|&&b| age >= b).count()
}

fn age_bucket_name(bucket: usize) -> String {
    match bucket {
        0 => format!("age=lt{}", AGE_BOUNDARIES[0]),
        b if b == AGE_BOUNDARIES.len() => format!("age=ge{}", AGE_BOUNDARIES[b - 1]),
        b => format!("age={}-{}", AGE_BOUNDARIES[b - 1], AGE_BOUNDARIES[b] - 1),
    }
}

fn parse_income(s: &str) -> Option<u8> {
    match s.trim_end_matches('.') {
        ">50K" => Some(1),
        "<=50K" => Some(0),
        _ => None,
    }
}

fn is_data_line(record: &csv::StringRecord) -> bool {
    match record.get(0) {
        None => false,
        Some(first) => !(record.len() == 1 && (first.is_empty() || first.starts_with('|'))),
    }
}

/// Reads one Adult file, returning only complete records.
///
/// Blank lines and `|`-prefixed banner lines are skipped. Rows with a `?`
/// in any retained column are dropped.
pub fn load_raw(path: &Path) -> Result<Vec<RawRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut row).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        if !is_data_line(&row) {
            continue;
        }
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if row.len() != RAW_FIELDS {
            return Err(parse_err(format!(
                "expected {RAW_FIELDS} columns, found {}",
                row.len()
            )));
        }
        // fnlwgt (2) and education-num (4) are not retained.
        let retained = [0, 1, 3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];
        if retained.iter().any(|&c| &row[c] == "?") {
            continue;
        }
        let int = |c: usize| -> Result<u64> {
            row[c]
                .parse::<u64>()
                .map_err(|_| parse_err(format!("column {c}: not an integer: {:?}", &row[c])))
        };
        let income_label = parse_income(&row[14])
            .ok_or_else(|| parse_err(format!("unrecognized income label {:?}", &row[14])))?;
        records.push(RawRecord {
            age: int(0)? as u32,
            workclass: row[1].to_string(),
            education: row[3].to_string(),
            marital_status: row[5].to_string(),
            occupation: row[6].to_string(),
            relationship: row[7].to_string(),
            race: row[8].to_string(),
            sex: row[9].to_string(),
            capital_gain: int(10)?,
            capital_loss: int(11)?,
            hours_per_week: int(12)? as u32,
            native_country: row[13].to_string(),
            income_label,
        });
    }
    Ok(records)
}

/// Loads and concatenates several Adult files in order.
pub fn load_raw_files<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<RawRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(load_raw(p.as_ref())?);
    }
    Ok(all)
}

/// Sorted category lists for each categorical column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub categories: [Vec<String>; 8],
}

impl Vocabulary {
    pub fn fit(records: &[RawRecord]) -> Self {
        let mut sets: [BTreeSet<&str>; 8] = Default::default();
        for r in records {
            for (set, value) in sets.iter_mut().zip(r.categorical()) {
                set.insert(value);
            }
        }
        Self {
            categories: sets.map(|s| s.into_iter().map(str::to_string).collect()),
        }
    }

    /// Encoded width: every category column, the age buckets, and the
    /// continuous columns.
    pub fn width(&self) -> usize {
        self.categories.iter().map(Vec::len).sum::<usize>() + AGE_BUCKETS + CONTINUOUS_COLUMNS.len()
    }

    /// `(name, width)` of every column block, in layout order.
    pub fn blocks(&self) -> Vec<(&'static str, usize)> {
        let mut blocks: Vec<(&'static str, usize)> = CATEGORICAL_COLUMNS
            .iter()
            .zip(&self.categories)
            .map(|(&name, cats)| (name, cats.len()))
            .collect();
        blocks.push(("age", AGE_BUCKETS));
        blocks.push(("continuous", CONTINUOUS_COLUMNS.len()));
        blocks
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for (column, cats) in CATEGORICAL_COLUMNS.iter().zip(&self.categories) {
            names.extend(cats.iter().map(|c| format!("{column}={c}")));
        }
        names.extend((0..AGE_BUCKETS).map(age_bucket_name));
        names.extend(CONTINUOUS_COLUMNS.iter().map(|c| c.to_string()));
        names
    }
}

/// One-hot encodes `records` against a fixed vocabulary. Continuous columns
/// are left in their raw units.
pub fn encode_with(vocab: &Vocabulary, records: &[RawRecord]) -> Result<Dataset> {
    let width = vocab.width();
    let mut features = Array2::<f64>::zeros((records.len(), width));
    let mut labels = Vec::with_capacity(records.len());
    let mut protected = Vec::with_capacity(records.len());

    for (i, r) in records.iter().enumerate() {
        let mut row = features.row_mut(i);
        let mut offset = 0;
        for ((column, cats), value) in CATEGORICAL_COLUMNS
            .iter()
            .zip(&vocab.categories)
            .zip(r.categorical())
        {
            let k = cats
                .binary_search_by(|c| c.as_str().cmp(value))
                .map_err(|_| Error::UnknownCategory {
                    column,
                    value: value.to_string(),
                })?;
            row[offset + k] = 1.0;
            offset += cats.len();
        }
        row[offset + bucketize_age(r.age)] = 1.0;
        offset += AGE_BUCKETS;
        for (j, v) in r.continuous().into_iter().enumerate() {
            row[offset + j] = v;
        }
        labels.push(Label::from_bit(r.income_label));
        protected.push(if r.sex == PROTECTED_SEX {
            Group::Protected
        } else {
            Group::Unprotected
        });
    }
    Dataset::new(features, labels, protected, vocab.feature_names())
}

/// Builds the vocabulary from `records`, encodes them, and z-scores the
/// continuous columns over the same records.
pub fn encode(records: &[RawRecord]) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::Data("cannot encode an empty record list".into()));
    }
    let vocab = Vocabulary::fit(records);
    let mut ds = encode_with(&vocab, records)?;
    Standardizer::fit_continuous(&ds)?.apply(&mut ds);
    Ok(ds)
}

/// Per-column z-score transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    columns: Vec<usize>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation of each column. Constant
    /// columns get a unit scale.
    pub fn fit(ds: &Dataset, columns: &[usize]) -> Self {
        let n = ds.len().max(1) as f64;
        let mut mean = Vec::with_capacity(columns.len());
        let mut std = Vec::with_capacity(columns.len());
        for &c in columns {
            let col = ds.features.column(c);
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean.push(m);
            std.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Self {
            columns: columns.to_vec(),
            mean,
            std,
        }
    }

    /// Fits on the named continuous columns of `ds`.
    pub fn fit_continuous(ds: &Dataset) -> Result<Self> {
        let cols = CONTINUOUS_COLUMNS
            .iter()
            .map(|name| {
                ds.column(name)
                    .ok_or_else(|| Error::Data(format!("missing continuous column {name}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::fit(ds, &cols))
    }

    pub fn apply(&self, ds: &mut Dataset) {
        for ((&c, &m), &s) in self.columns.iter().zip(&self.mean).zip(&self.std) {
            ds.features.column_mut(c).mapv_inplace(|v| (v - m) / s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub n_labeled: usize,
    pub seed: u64,
}

impl SplitSpec {
    /// Splits, masks the training labels, and re-standardizes the continuous
    /// columns of both parts with training-split statistics.
    pub fn apply(&self, dataset: &Dataset) -> Result<(Dataset, Dataset)> {
        let (mut train, mut test) = split(dataset, self)?;
        train = mask_labels(&train, self.n_labeled, seed::derive_seed(self.seed, "mask", 0))?;
        if dataset.column(CONTINUOUS_COLUMNS[0]).is_some() {
            let scaler = Standardizer::fit_continuous(&train)?;
            scaler.apply(&mut train);
            scaler.apply(&mut test);
        }
        Ok((train, test))
    }
}

/// Uniformly random train/test partition with `floor(train_fraction * N)`
/// training rows.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1], got {}",
            spec.train_fraction
        )));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(spec.seed));
    let n_train = ((spec.train_fraction * n as f64).floor() as usize).min(n);
    let (train_idx, test_idx) = order.split_at(n_train);
    Ok((dataset.select(train_idx), dataset.select(test_idx)))
}

/// Keeps the labels of exactly `n_labeled` uniformly chosen samples and marks
/// every other sample unknown.
pub fn mask_labels(train: &Dataset, n_labeled: usize, seed: u64) -> Result<Dataset> {
    if n_labeled > train.len() {
        return Err(Error::Config(format!(
            "cannot keep {n_labeled} labels in a training set of {}",
            train.len()
        )));
    }
    let keep = rand::seq::index::sample(&mut seed::rng(seed), train.len(), n_labeled);
    let mut labels = vec![Label::Unknown; train.len()];
    for i in keep.iter() {
        labels[i] = train.labels[i];
    }
    Ok(Dataset {
        labels,
        ..train.clone()
    })
}

/// Keeps every labeled sample plus `count` unlabeled ones (all of them when
/// `count` is `None`). For a fixed seed, smaller counts keep a subset of the
/// samples kept by larger counts.
pub fn keep_unlabeled(ds: &Dataset, count: Option<usize>, seed: u64) -> Result<Dataset> {
    let mut unlabeled: Vec<usize> = (0..ds.len()).filter(|&i| !ds.labels[i].is_known()).collect();
    let count = count.unwrap_or(unlabeled.len());
    if count > unlabeled.len() {
        return Err(Error::Config(format!(
            "requested {count} unlabeled samples but only {} are available",
            unlabeled.len()
        )));
    }
    unlabeled.shuffle(&mut seed::rng(seed));
    let mut keep: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i].is_known()).collect();
    keep.extend_from_slice(&unlabeled[..count]);
    keep.sort_unstable();
    Ok(ds.select(&keep))
}

const LABEL_COLUMN: &str = "label";
const GROUP_COLUMN: &str = "protected";

/// Writes `ds` as CSV: a header of feature names followed by `label` and
/// `protected`, then one row per sample. Values use the shortest decimal
/// form that round-trips, so output is byte-stable.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let header: Vec<&str> = ds
        .feature_names
        .iter()
        .map(String::as_str)
        .chain([LABEL_COLUMN, GROUP_COLUMN])
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let mut line = String::new();
    for ((row, label), group) in ds.features.rows().into_iter().zip(&ds.labels).zip(&ds.protected) {
        line.clear();
        for v in row {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(label.symbol());
        line.push(',');
        line.push_str(group.symbol());
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let csv_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    let n = header.len();
    if n < 3 || &header[n - 2] != LABEL_COLUMN || &header[n - 1] != GROUP_COLUMN {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header must end with {LABEL_COLUMN},{GROUP_COLUMN}"),
        });
    }
    let names: Vec<String> = header.iter().take(n - 2).map(str::to_string).collect();
    let d = names.len();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut protected = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        for field in row.iter().take(d) {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|_| bad(format!("not a number: {field:?}")))?,
            );
        }
        labels.push(Label::parse(&row[d]).ok_or_else(|| bad(format!("bad label {:?}", &row[d])))?);
        protected.push(
            Group::parse(&row[d + 1]).ok_or_else(|| bad(format!("bad group {:?}", &row[d + 1])))?,
        );
    }
    let features = Array2::from_shape_vec((labels.len(), d), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Dataset::new(features, labels, protected, names)
}
