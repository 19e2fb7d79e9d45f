//! Labeled tabular data: CSV ingestion, the two synthetic generators and
//! seeded train/test splitting.
//!
//! CSV layout: one header row, numeric cells only, target in the last
//! column. Classification targets are stored internally as `-1.0`/`+1.0`
//! and accepted on disk as either `{0, 1}` or `{-1, +1}`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

/// Feature matrix (one example per row) and matching targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    targets: DVector<f64>,
    task: Task,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, targets: DVector<f64>, task: Task) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(Error::domain(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::domain("dataset needs at least one feature column"));
        }
        if task == Task::Classification {
            if let Some(bad) = targets.iter().find(|&&y| y != 1.0 && y != -1.0) {
                return Err(Error::domain(format!(
                    "classification target {bad} is not in {{-1, +1}}"
                )));
            }
        }
        Ok(Self {
            features,
            targets,
            task,
        })
    }

    /// Zero rows of dimension `d`; enough for losses that ignore the data.
    pub fn empty(d: usize, task: Task) -> Result<Self> {
        Self::new(DMatrix::zeros(0, d), DVector::zeros(0), task)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(rows),
            targets: self.targets.select_rows(rows),
            task: self.task,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
}

impl SplitDataset {
    /// Z-score every feature column using mean and standard deviation
    /// measured on the training part only. Constant columns are centered
    /// but not scaled.
    pub fn standardized(&self) -> SplitDataset {
        let n = self.train.len() as f64;
        let d = self.train.dim();
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let col = self.train.features.column(j);
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[j] = m;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        let apply = |data: &Dataset| {
            let mut features = data.features.clone();
            for j in 0..d {
                for v in features.column_mut(j).iter_mut() {
                    *v = (*v - mean[j]) / scale[j];
                }
            }
            Dataset {
                features,
                targets: data.targets.clone(),
                task: data.task,
            }
        };
        SplitDataset {
            train: apply(&self.train),
            test: apply(&self.test),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, task: Task) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, task)
}

pub fn read_csv<R: Read>(reader: R, task: Task) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header_len = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .len();
    if header_len < 2 {
        return Err(Error::MalformedInput {
            row: 1,
            column: header_len,
            message: "need at least one feature column and a target column".into(),
        });
    }
    let d = header_len - 1;
    let mut cells = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record.map_err(|e| csv_error(e, row))?;
        if record.len() != header_len {
            return Err(Error::MalformedInput {
                row,
                column: record.len(),
                message: format!("expected {header_len} cells, found {}", record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::MalformedInput {
                row,
                column: col + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::MalformedInput {
                    row,
                    column: col + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            if col < d {
                cells.push(value);
            } else {
                targets.push(match task {
                    Task::Regression => value,
                    Task::Classification => class_label(value).ok_or_else(|| {
                        Error::domain(format!(
                            "row {row}: classification target {value} is not one of 0, 1, -1, +1"
                        ))
                    })?,
                });
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::MalformedInput {
            row: 2,
            column: 1,
            message: "no data rows after the header".into(),
        });
    }
    let features = DMatrix::from_row_slice(targets.len(), d, &cells);
    Dataset::new(features, DVector::from_vec(targets), task)
}

fn class_label(value: f64) -> Option<f64> {
    if value == 1.0 {
        Some(1.0)
    } else if value == 0.0 || value == -1.0 {
        Some(-1.0)
    } else {
        None
    }
}

fn csv_error(err: csv::Error, fallback_row: usize) -> Error {
    let row = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_row);
    Error::MalformedInput {
        row,
        column: 0,
        message: err.to_string(),
    }
}

/// Writes `x1..xd,y` with a header. Classification labels go out as `{0, 1}`.
pub fn write_csv<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let d = data.dim();
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    wtr.write_record(&header).map_err(std::io::Error::from)?;
    let mut record = Vec::with_capacity(d + 1);
    for i in 0..data.len() {
        record.clear();
        for j in 0..d {
            record.push(data.features[(i, j)].to_string());
        }
        let y = data.targets[i];
        record.push(match data.task {
            Task::Regression => y.to_string(),
            Task::Classification => if y > 0.0 { "1" } else { "0" }.to_string(),
        });
        wtr.write_record(&record).map_err(std::io::Error::from)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), data)
}

/// The hidden hyperplane used by both generators for a given `(d, seed)`.
/// It is the first `d` standard-normal draws of the seeded stream.
pub fn hidden_hyperplane(d: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_normals(&mut rng, d)
}

fn draw_normals(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draws the hyperplane then an `n x d` standard-normal feature matrix,
/// row by row, from one stream.
fn gaussian_design(n: usize, d: usize, seed: u64) -> Result<(ChaCha8Rng, DVector<f64>, DMatrix<f64>)> {
    if n == 0 || d == 0 {
        return Err(Error::domain(format!(
            "generator needs n >= 1 and d >= 1 (got n = {n}, d = {d})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hyperplane = draw_normals(&mut rng, d);
    let cells: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    Ok((rng, hyperplane, DMatrix::from_row_slice(n, d, &cells)))
}

/// Regression data with `y = w_true . x` exactly.
pub fn gen_simulated1(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let (_, hyperplane, features) = gaussian_design(n, d, seed)?;
    let targets = &features * &hyperplane;
    Dataset::new(features, targets, Task::Regression)
}

/// Probability of label `+1` for a point strictly above the hidden hyperplane.
pub const SIMULATED2_AGREEMENT: f64 = 0.95;

/// Classification data: label `+1` with probability 0.95 above the hidden
/// hyperplane and 0.05 below it.
pub fn gen_simulated2(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let (mut rng, hyperplane, features) = gaussian_design(n, d, seed)?;
    let scores = &features * &hyperplane;
    let targets = scores.map(|s| {
        let p_pos = if s > 0.0 {
            SIMULATED2_AGREEMENT
        } else {
            1.0 - SIMULATED2_AGREEMENT
        };
        if rng.gen::<f64>() < p_pos {
            1.0
        } else {
            -1.0
        }
    });
    Dataset::new(features, targets, Task::Classification)
}

/// Seeded random partition; the train part gets `round(n * train_fraction)` rows.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::domain(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = data.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::domain(format!(
            "splitting {n} rows at fraction {train_fraction} leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_rows, test_rows) = order.split_at(n_train);
    Ok(SplitDataset {
        train: data.select_rows(train_rows),
        test: data.select_rows(test_rows),
    })
}
