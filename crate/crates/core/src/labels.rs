//! Row-major label and score matrices shared by training and evaluation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabelError {
    #[error("expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("label at row {row}, task {task} is {value}, expected 0 or 1")]
    NonBinary { row: usize, task: usize, value: f64 },
}

/// Binary labels with a missing-value mask. Masked slots hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    pub n_rows: usize,
    pub n_tasks: usize,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl LabelMatrix {
    pub fn new(n_rows: usize, n_tasks: usize, values: Vec<f64>, missing: Vec<bool>) -> Result<Self, LabelError> {
        let expected = n_rows * n_tasks;
        for len in [values.len(), missing.len()] {
            if len != expected {
                return Err(LabelError::Shape { expected, got: len });
            }
        }
        let mut values = values;
        for (i, (v, &m)) in values.iter_mut().zip(&missing).enumerate() {
            if m {
                *v = 0.0;
            } else if *v != 0.0 && *v != 1.0 {
                return Err(LabelError::NonBinary {
                    row: i / n_tasks.max(1),
                    task: i % n_tasks.max(1),
                    value: *v,
                });
            }
        }
        Ok(Self {
            n_rows,
            n_tasks,
            values,
            missing,
        })
    }

    /// Fully observed single-task labels.
    pub fn single_task(labels: &[f64]) -> Result<Self, LabelError> {
        Self::new(labels.len(), 1, labels.to_vec(), vec![false; labels.len()])
    }

    pub fn value(&self, row: usize, task: usize) -> f64 {
        self.values[row * self.n_tasks + task]
    }

    pub fn is_missing(&self, row: usize, task: usize) -> bool {
        self.missing[row * self.n_tasks + task]
    }

    /// Labels with missing slots read as 0.
    pub fn zero_filled(&self) -> &[f64] {
        &self.values
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let t = self.n_tasks;
        let mut values = Vec::with_capacity(indices.len() * t);
        let mut missing = Vec::with_capacity(indices.len() * t);
        for &i in indices {
            values.extend_from_slice(&self.values[i * t..(i + 1) * t]);
            missing.extend_from_slice(&self.missing[i * t..(i + 1) * t]);
        }
        Self {
            n_rows: indices.len(),
            n_tasks: t,
            values,
            missing,
        }
    }
}

/// Per-row, per-task predicted probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub n_rows: usize,
    pub n_tasks: usize,
    pub values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn get(&self, row: usize, task: usize) -> f64 {
        self.values[row * self.n_tasks + task]
    }

    pub fn task_column(&self, task: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, task)).collect()
    }
}
