use nalgebra::{DMatrix, SymmetricEigen};

use super::{FeatureKind, FeatureMatrix, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Principal axes fitted on a set of rows. The eigen-decomposition runs in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca<T> {
    pub mean: Vec<T>,
    /// Retained unit axes, one per row, in order of decreasing variance.
    pub components: Matrix<T>,
    /// Explained-variance ratio of every axis, retained or not (non-increasing).
    pub explained_ratio: Vec<T>,
}

impl<T: Real> Pca<T> {
    /// Keeps the fewest leading axes whose cumulative explained variance reaches
    /// `variance_fraction`; a fraction of 1 keeps every axis. An all-constant
    /// input yields a single all-zero axis.
    pub fn fit(x: &Matrix<T>, variance_fraction: f64) -> Result<Self> {
        let (n, d) = (x.rows(), x.cols());
        if n < 2 {
            return Err(Error::invalid("PCA needs at least 2 rows"));
        }
        if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
            return Err(Error::invalid(format!("variance fraction {variance_fraction} outside (0, 1]")));
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| (0..n).map(|i| x.get(i, j).f64()).sum::<f64>() / n as f64)
            .collect();
        let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j).f64() - mean[j]);
        let cov = centered.transpose() * &centered / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let total: f64 = values.iter().sum();

        let mean_t = mean.iter().map(|&m| T::of(m)).collect();
        if total <= f64::EPSILON * d as f64 {
            log::warn!("PCA input has no variance; emitting a single zero component");
            return Ok(Pca {
                mean: mean_t,
                components: Matrix::from_vec(1, d, vec![T::zero(); d]),
                explained_ratio: vec![T::zero(); d],
            });
        }
        let keep = if variance_fraction >= 1.0 {
            d
        } else {
            let mut acc = 0.0;
            values
                .iter()
                .position(|&v| {
                    acc += v;
                    acc / total >= variance_fraction
                })
                .map_or(d, |p| p + 1)
        };
        let mut data = Vec::with_capacity(keep * d);
        for &i in &order[..keep] {
            let axis = eig.eigenvectors.column(i);
            // sign convention: largest-magnitude entry positive
            let pivot = (0..d).fold(0, |b, j| if axis[j].abs() > axis[b].abs() { j } else { b });
            let sign = if axis[pivot] < 0.0 { -1.0 } else { 1.0 };
            data.extend((0..d).map(|j| T::of(sign * axis[j])));
        }
        Ok(Pca {
            mean: mean_t,
            components: Matrix::from_vec(keep, d, data),
            explained_ratio: values.iter().map(|&v| T::of(v / total)).collect(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn transform(&self, x: &Matrix<T>) -> Matrix<T> {
        let k = self.n_components();
        let mut out = Vec::with_capacity(x.rows() * k);
        for i in 0..x.rows() {
            let row = x.row(i);
            for c in 0..k {
                let axis = self.components.row(c);
                out.push(
                    row.iter()
                        .zip(&self.mean)
                        .zip(axis)
                        .map(|((&v, &m), &a)| (v - m) * a)
                        .sum(),
                );
            }
        }
        Matrix::from_vec(x.rows(), k, out)
    }

    pub fn inverse_transform(&self, z: &Matrix<T>) -> Matrix<T> {
        let d = self.mean.len();
        let mut out = Vec::with_capacity(z.rows() * d);
        for i in 0..z.rows() {
            for j in 0..d {
                let mut v = self.mean[j];
                for c in 0..self.n_components() {
                    v += z.get(i, c) * self.components.get(c, j);
                }
                out.push(v);
            }
        }
        Matrix::from_vec(z.rows(), d, out)
    }
}

/// Fits PCA on all rows of `x` and projects them (`pc0`, `pc1`, ...).
pub fn pca<T: Real>(x: &FeatureMatrix<T>, variance_fraction: f64) -> Result<FeatureMatrix<T>> {
    let p = Pca::fit(&x.values, variance_fraction)?;
    Ok(FeatureMatrix {
        kind: FeatureKind { tag: x.kind.tag, pca: true },
        ids: x.ids.clone(),
        columns: (0..p.n_components()).map(|c| format!("pc{c}")).collect(),
        values: p.transform(&x.values),
    })
}
