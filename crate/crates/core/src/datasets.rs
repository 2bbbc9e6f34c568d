//! Labeled CSV datasets, split index files and graph6 collections.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphCollection, MolecularGraph};
use crate::labels::{LabelError, LabelMatrix};
use crate::smiles::{parse_smiles, SmilesError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: invalid SMILES {smiles:?}: {source}")]
    Smiles {
        row: usize,
        smiles: String,
        #[source]
        source: SmilesError,
    },
    #[error("row {row}, column {column:?}: label {value:?} is not 0 or 1")]
    NonBinaryLabel { row: usize, column: String, value: String },
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("split file for {0:?} not found in {1}")]
    MissingSplitFile(&'static str, PathBuf),
    #[error("{path}:{line}: cannot parse index {text:?}")]
    BadIndex { path: PathBuf, line: usize, text: String },
    #[error("index {index} appears in both {first} and {second}")]
    Overlap {
        index: usize,
        first: &'static str,
        second: &'static str,
    },
    #[error("split index {index} out of range for {n} rows")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("graph6 line {line}: invalid byte {byte}")]
    InvalidByte { line: usize, byte: u8 },
    #[error("graph6 line {line}: truncated adjacency data")]
    Truncated { line: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Opens a file, decompressing transparently when it starts with the gzip
/// magic bytes.
pub fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>, DatasetError> {
    let mut file = File::open(path).map_err(io_err(path))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(io_err(path))?;
    let file = File::open(path).map_err(io_err(path))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ingestion {
    /// Any unparseable SMILES aborts loading.
    #[default]
    Strict,
    /// Unparseable rows are skipped and listed in the manifest.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// Zero-based data row in the source file (header excluded).
    pub row: usize,
    pub smiles: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub graphs: GraphCollection,
    pub smiles: Vec<String>,
    pub labels: LabelMatrix,
    pub task_names: Vec<String>,
    /// Source data row of every kept molecule.
    pub source_rows: Vec<usize>,
    pub skipped: Vec<SkippedRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Writes SMILES and labels back as CSV, missing labels as empty cells.
    pub fn write_csv<W: Write>(&self, smiles_column: &str, w: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![smiles_column.to_string()];
        header.extend(self.task_names.iter().cloned());
        wtr.write_record(&header)?;
        for (i, s) in self.smiles.iter().enumerate() {
            let mut rec = vec![s.clone()];
            for t in 0..self.labels.n_tasks {
                rec.push(if self.labels.is_missing(i, t) {
                    String::new()
                } else {
                    format!("{}", self.labels.value(i, t))
                });
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| DatasetError::Csv(e.into()))?;
        Ok(())
    }
}

fn parse_label(cell: &str) -> Option<Option<f64>> {
    let t = cell.trim();
    if t.is_empty() {
        return Some(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v == 0.0 || v == 1.0 => Some(Some(v)),
        _ => None,
    }
}

/// Reads a labeled dataset. With an empty `task_columns`, every column other
/// than the SMILES column is a task.
pub fn read_csv_dataset<R: Read>(
    reader: R,
    smiles_column: &str,
    task_columns: &[String],
    mode: Ingestion,
) -> Result<LabeledDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let smiles_idx = find(smiles_column)?;
    let task_names: Vec<String> = if task_columns.is_empty() {
        header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != smiles_idx)
            .map(|(_, h)| h.clone())
            .collect()
    } else {
        task_columns.to_vec()
    };
    let task_idx: Vec<usize> = task_names.iter().map(|t| find(t)).collect::<Result<_, _>>()?;

    let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    let parsed: Vec<Result<MolecularGraph, SmilesError>> = records
        .par_iter()
        .map(|r| parse_smiles(r.get(smiles_idx).unwrap_or("").trim()))
        .collect();

    let t = task_names.len();
    let mut graphs = Vec::with_capacity(records.len());
    let mut smiles = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len() * t);
    let mut missing = Vec::with_capacity(records.len() * t);
    let mut source_rows = Vec::with_capacity(records.len());
    let mut skipped = Vec::new();

    for (row, (rec, graph)) in records.iter().zip(parsed).enumerate() {
        let s = rec.get(smiles_idx).unwrap_or("").trim().to_string();
        let graph = match graph {
            Ok(g) => g,
            Err(source) => match mode {
                Ingestion::Strict => return Err(DatasetError::Smiles { row, smiles: s, source }),
                Ingestion::Lenient => {
                    warn!("skipping row {row}: {source}");
                    skipped.push(SkippedRow {
                        row,
                        smiles: s,
                        reason: source.to_string(),
                    });
                    continue;
                }
            },
        };
        for (&c, name) in task_idx.iter().zip(&task_names) {
            let cell = rec.get(c).unwrap_or("");
            match parse_label(cell) {
                Some(Some(v)) => {
                    values.push(v);
                    missing.push(false);
                }
                Some(None) => {
                    values.push(0.0);
                    missing.push(true);
                }
                None => {
                    return Err(DatasetError::NonBinaryLabel {
                        row,
                        column: name.clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        graphs.push(graph);
        smiles.push(s);
        source_rows.push(row);
    }

    let labels = LabelMatrix::new(graphs.len(), t, values, missing)?;
    Ok(LabeledDataset {
        graphs,
        smiles,
        labels,
        task_names,
        source_rows,
        skipped,
    })
}

pub fn load_csv_dataset(
    path: &Path,
    smiles_column: &str,
    task_columns: &[String],
    mode: Ingestion,
) -> Result<LabeledDataset, DatasetError> {
    read_csv_dataset(open_maybe_gzip(path)?, smiles_column, task_columns, mode)
}

/// Train / valid / test row indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitSpec {
    pub fn new(train: Vec<usize>, valid: Vec<usize>, test: Vec<usize>) -> Result<Self, DatasetError> {
        let spec = Self { train, valid, test };
        spec.check_disjoint()?;
        Ok(spec)
    }

    fn parts(&self) -> [(&'static str, &[usize]); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }

    fn check_disjoint(&self) -> Result<(), DatasetError> {
        let mut owner: HashMap<usize, &'static str> = HashMap::new();
        for (name, idx) in self.parts() {
            for &i in idx {
                if let Some(first) = owner.insert(i, name) {
                    return Err(DatasetError::Overlap {
                        index: i,
                        first,
                        second: name,
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks every index against a dataset of `n` rows.
    pub fn bind(&self, n: usize) -> Result<(), DatasetError> {
        for (_, idx) in self.parts() {
            if let Some(&index) = idx.iter().find(|&&i| i >= n) {
                return Err(DatasetError::IndexOutOfRange { index, n });
            }
        }
        Ok(())
    }

    /// Translates source-row indices into positions of a dataset that kept
    /// only `source_rows`. Rows that were skipped at ingestion are dropped.
    pub fn remap(&self, source_rows: &[usize]) -> Self {
        let pos: HashMap<usize, usize> = source_rows.iter().enumerate().map(|(p, &r)| (r, p)).collect();
        let map = |v: &[usize]| v.iter().filter_map(|i| pos.get(i).copied()).collect();
        Self {
            train: map(&self.train),
            valid: map(&self.valid),
            test: map(&self.test),
        }
    }
}

fn find_split_file(dir: &Path, name: &'static str) -> Result<PathBuf, DatasetError> {
    for ext in ["", ".csv", ".txt"] {
        for gz in ["", ".gz"] {
            let p = dir.join(format!("{name}{ext}{gz}"));
            if p.is_file() {
                return Ok(p);
            }
        }
    }
    Err(DatasetError::MissingSplitFile(name, dir.to_path_buf()))
}

fn read_indices(path: &Path) -> Result<Vec<usize>, DatasetError> {
    let reader = open_maybe_gzip(path)?;
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let idx = text.parse::<usize>().map_err(|_| DatasetError::BadIndex {
            path: path.to_path_buf(),
            line: n + 1,
            text: text.to_string(),
        })?;
        out.push(idx);
    }
    Ok(out)
}

/// Reads `train`, `valid` and `test` index files from `dir`. Each may carry a
/// `.csv` or `.txt` extension and may be gzip-compressed.
pub fn load_split(dir: &Path) -> Result<SplitSpec, DatasetError> {
    let train = read_indices(&find_split_file(dir, "train")?)?;
    let valid = read_indices(&find_split_file(dir, "valid")?)?;
    let test = read_indices(&find_split_file(dir, "test")?)?;
    SplitSpec::new(train, valid, test)
}

/// Decodes one graph6 line into an unlabeled graph.
pub fn parse_graph6(line: &str, line_no: usize) -> Result<MolecularGraph, DatasetError> {
    let line = line.strip_prefix(">>graph6<<").unwrap_or(line);
    let bytes = line.as_bytes();
    if let Some(&byte) = bytes.iter().find(|&&b| !(63..=126).contains(&b)) {
        return Err(DatasetError::InvalidByte { line: line_no, byte });
    }
    let vals: Vec<usize> = bytes.iter().map(|&b| (b - 63) as usize).collect();
    let (n, rest) = match vals.as_slice() {
        [] => return Err(DatasetError::Truncated { line: line_no }),
        [63, 63, ..] => {
            if vals.len() < 8 {
                return Err(DatasetError::Truncated { line: line_no });
            }
            (vals[2..8].iter().fold(0, |acc, &v| (acc << 6) | v), &vals[8..])
        }
        [63, ..] => {
            if vals.len() < 4 {
                return Err(DatasetError::Truncated { line: line_no });
            }
            (vals[1..4].iter().fold(0, |acc, &v| (acc << 6) | v), &vals[4..])
        }
        [n, rest @ ..] => (*n, rest),
    };
    let bits = n * n.saturating_sub(1) / 2;
    if rest.len() * 6 < bits {
        return Err(DatasetError::Truncated { line: line_no });
    }
    let mut edges = Vec::new();
    let mut k = 0;
    for v in 1..n {
        for u in 0..v {
            if (rest[k / 6] >> (5 - k % 6)) & 1 == 1 {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    MolecularGraph::from_topology(n, &edges).map_err(|_| DatasetError::Truncated { line: line_no })
}

pub fn read_graph6<R: BufRead>(reader: R, path: &Path) -> Result<GraphCollection, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        out.push(parse_graph6(line, i + 1)?);
    }
    Ok(out)
}

pub fn load_graph6(path: &Path) -> Result<GraphCollection, DatasetError> {
    read_graph6(open_maybe_gzip(path)?, path)
}
