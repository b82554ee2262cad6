//! Supervised prediction of a binary trait from node features: feature
//! assembly, PCA, L2-regularized logistic regression and repeated stratified
//! cross-validation with paired model comparisons.

mod cv;
mod features;
mod logreg;
mod pca;

pub use cv::{
    compare_models, cross_validate, external_baseline, load_predictions, metrics, random_guess,
    stratified_partition, Baseline, ConfusionCounts, CvConfig, CvReport, Metric, Metrics, ModelInput,
    Partition, PairwiseMatrix,
};
pub use features::{
    assemble_features, compute_all_features, compute_features, raw_sms, FeatureConfig, FeatureKind, FeatureMatrix, FeatureTag,
};
pub use logreg::{logistic_objective, train_logreg, LogRegConfig, LogRegModel};
pub use pca::{pca, Pca};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix shape");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// The given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}
