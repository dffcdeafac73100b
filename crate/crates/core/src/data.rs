//! Labeled/unlabeled data and the K-fold cross-fitting plan.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{DataSide, Error, Result};
use crate::sampling::RngStream;

/// Smallest test fold allowed; keeps both t components at `df >= 2`.
pub const MIN_FOLD_SIZE: usize = 3;

#[derive(Clone, Debug)]
pub struct Dataset {
    labeled_outcomes: DVector<f64>,
    labeled_features: DMatrix<f64>,
    unlabeled_features: DMatrix<f64>,
}

impl Dataset {
    /// Builds a dataset from outcome vector and feature matrices, checking
    /// every invariant.
    pub fn new(
        outcomes: DVector<f64>,
        labeled_features: DMatrix<f64>,
        unlabeled_features: DMatrix<f64>,
    ) -> Result<Self> {
        if outcomes.len() != labeled_features.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcomes but {} labeled feature rows",
                outcomes.len(),
                labeled_features.nrows()
            )));
        }
        if labeled_features.ncols() != unlabeled_features.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "labeled rows have {} features, unlabeled rows have {}",
                labeled_features.ncols(),
                unlabeled_features.ncols()
            )));
        }
        if outcomes.is_empty() {
            return Err(Error::InsufficientData {
                side: DataSide::Labeled,
                detail: "no rows".into(),
            });
        }
        if unlabeled_features.nrows() == 0 {
            return Err(Error::InsufficientData {
                side: DataSide::Unlabeled,
                detail: "no rows".into(),
            });
        }
        for i in 0..outcomes.len() {
            if !outcomes[i].is_finite() {
                return Err(non_finite(DataSide::Labeled, i, 0, outcomes[i]));
            }
            for j in 0..labeled_features.ncols() {
                let v = labeled_features[(i, j)];
                if !v.is_finite() {
                    return Err(non_finite(DataSide::Labeled, i, j + 1, v));
                }
            }
        }
        for i in 0..unlabeled_features.nrows() {
            for j in 0..unlabeled_features.ncols() {
                let v = unlabeled_features[(i, j)];
                if !v.is_finite() {
                    return Err(non_finite(DataSide::Unlabeled, i, j, v));
                }
            }
        }
        Ok(Dataset {
            labeled_outcomes: outcomes,
            labeled_features,
            unlabeled_features,
        })
    }

    pub fn n(&self) -> usize {
        self.labeled_outcomes.len()
    }

    pub fn big_n(&self) -> usize {
        self.unlabeled_features.nrows()
    }

    pub fn p(&self) -> usize {
        self.labeled_features.ncols()
    }

    pub fn outcomes(&self) -> &DVector<f64> {
        &self.labeled_outcomes
    }

    pub fn labeled_features(&self) -> &DMatrix<f64> {
        &self.labeled_features
    }

    pub fn unlabeled_features(&self) -> &DMatrix<f64> {
        &self.unlabeled_features
    }

    pub fn labeled_subset(&self, rows: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
        let x = self.labeled_features.select_rows(rows.iter());
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.labeled_outcomes[i]));
        (x, y)
    }

    pub fn unlabeled_subset(&self, rows: &[usize]) -> DMatrix<f64> {
        self.unlabeled_features.select_rows(rows.iter())
    }

    /// True when the unlabeled sample is not larger than the labeled one,
    /// outside the usual semi-supervised regime.
    pub fn unlabeled_not_larger(&self) -> bool {
        self.big_n() <= self.n()
    }
}

fn non_finite(side: DataSide, row: usize, column: usize, value: f64) -> Error {
    Error::Validation {
        side,
        row: row + 1,
        column: column + 1,
        detail: format!("non-finite value {value}"),
    }
}

/// Validates raw row-major input: each labeled row is `[y, x_1, .., x_p]`,
/// each unlabeled row `[x_1, .., x_p]`. Rows and columns in errors are 1-based.
pub fn validate_dataset(labeled: &[Vec<f64>], unlabeled: &[Vec<f64>]) -> Result<Dataset> {
    if labeled.is_empty() {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: "no rows".into(),
        });
    }
    if unlabeled.is_empty() {
        return Err(Error::InsufficientData {
            side: DataSide::Unlabeled,
            detail: "no rows".into(),
        });
    }
    let width = labeled[0].len();
    if width < 2 {
        return Err(Error::DimensionMismatch(
            "labeled rows need an outcome and at least one feature".into(),
        ));
    }
    let p = width - 1;
    for (i, row) in labeled.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Validation {
                side: DataSide::Labeled,
                row: i + 1,
                column: row.len().min(width) + 1,
                detail: format!("expected {width} values, found {}", row.len()),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(non_finite(DataSide::Labeled, i, j, row[j]));
        }
    }
    for (i, row) in unlabeled.iter().enumerate() {
        if row.len() != p {
            if i == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "unlabeled width {} vs labeled feature width {p}",
                    row.len()
                )));
            }
            return Err(Error::Validation {
                side: DataSide::Unlabeled,
                row: i + 1,
                column: row.len().min(p) + 1,
                detail: format!("expected {p} values, found {}", row.len()),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(non_finite(DataSide::Unlabeled, i, j, row[j]));
        }
    }
    let n = labeled.len();
    let y = DVector::from_iterator(n, labeled.iter().map(|r| r[0]));
    let x = DMatrix::from_fn(n, p, |i, j| labeled[i][j + 1]);
    let u = DMatrix::from_fn(unlabeled.len(), p, |i, j| unlabeled[i][j]);
    Dataset::new(y, x, u)
}

/// Disjoint K-way partitions of labeled and unlabeled indices, with each
/// fold's training complement. Indices inside every set are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    labeled_folds: Vec<Vec<usize>>,
    unlabeled_folds: Vec<Vec<usize>>,
    train_sets: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.labeled_folds.len()
    }

    pub fn labeled_fold(&self, k: usize) -> &[usize] {
        &self.labeled_folds[k]
    }

    pub fn unlabeled_fold(&self, k: usize) -> &[usize] {
        &self.unlabeled_folds[k]
    }

    pub fn train_set(&self, k: usize) -> &[usize] {
        &self.train_sets[k]
    }

    pub fn labeled_folds(&self) -> &[Vec<usize>] {
        &self.labeled_folds
    }

    pub fn unlabeled_folds(&self) -> &[Vec<usize>] {
        &self.unlabeled_folds
    }
}

fn partition(len: usize, k: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(rng);
    let base = len / k;
    let rem = len % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < rem);
        let mut fold = idx[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    folds
}

/// Uniformly random K-fold plan. Remainders go one each to the lowest
/// numbered folds, so fold sizes differ by at most one.
pub fn make_fold_plan(n: usize, big_n: usize, k: usize, rng: &mut RngStream) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K must be at least 2, got {k}")));
    }
    if n / k < MIN_FOLD_SIZE {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: format!("n = {n} gives folds smaller than {MIN_FOLD_SIZE} with K = {k}"),
        });
    }
    if big_n / k < MIN_FOLD_SIZE {
        return Err(Error::InsufficientData {
            side: DataSide::Unlabeled,
            detail: format!("N = {big_n} gives folds smaller than {MIN_FOLD_SIZE} with K = {k}"),
        });
    }
    let labeled_folds = partition(n, k, rng);
    let unlabeled_folds = partition(big_n, k, rng);
    let train_sets = labeled_folds
        .iter()
        .map(|fold| {
            let mut in_fold = vec![false; n];
            for &i in fold {
                in_fold[i] = true;
            }
            (0..n).filter(|&i| !in_fold[i]).collect()
        })
        .collect();
    Ok(FoldPlan {
        labeled_folds,
        unlabeled_folds,
        train_sets,
    })
}
