use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{train_logreg, FeatureKind, LogRegConfig, Matrix, Pca};
use crate::error::{Error, Result};
use crate::netmodel::NodeId;
use crate::scalar::{mean, sample_sd, Real};
use crate::stats::{bh_fdr, wilcoxon_signed_rank, TestResult};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Precision,
    Recall,
    F1,
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::F1, Metric::Accuracy];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
        }
    }

    pub fn of<T: Copy>(self, m: &Metrics<T>) -> T {
        match self {
            Metric::Precision => m.precision,
            Metric::Recall => m.recall,
            Metric::F1 => m.f1,
            Metric::Accuracy => m.accuracy,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub accuracy: T,
}

/// Precision, recall, F1 and accuracy; a zero denominator gives 0.
pub fn metrics<T: Real>(c: &ConfusionCounts) -> Metrics<T> {
    let ratio = |a: u64, b: u64| if b == 0 { T::zero() } else { T::of(a as f64) / T::of(b as f64) };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == T::zero() {
        T::zero()
    } else {
        T::of(2.0) * precision * recall / (precision + recall)
    };
    Metrics {
        precision,
        recall,
        f1,
        accuracy: ratio(c.tp + c.tn, c.total()),
    }
}

/// Fold of every row for each repeat, plus a hash identifying the whole partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub folds: usize,
    pub assignment: Vec<Vec<usize>>,
    pub fingerprint: String,
}

impl Partition {
    pub fn repeats(&self) -> usize {
        self.assignment.len()
    }

    /// `(train, test)` row indices of one fold.
    pub fn split(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment[repeat].len()).partition(|&i| self.assignment[repeat][i] != fold)
    }
}

/// Stratified folds: within each class rows are shuffled and dealt round-robin,
/// negatives continuing where positives stopped, so per-fold class counts and
/// fold sizes each differ by at most one.
pub fn stratified_partition(y: &[bool], repeats: usize, folds: usize, seed: u64) -> Result<Partition> {
    if folds < 2 || repeats == 0 {
        return Err(Error::invalid(format!("need at least 2 folds and 1 repeat, got {folds} x {repeats}")));
    }
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.len() < folds || neg.len() < folds {
        return Err(Error::invalid(format!(
            "each class needs at least {folds} rows for {folds}-fold cross-validation ({} positive, {} negative)",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hasher = Sha256::new();
    hasher.update(format!("{}:{}:", y.len(), folds).as_bytes());
    let assignment: Vec<Vec<usize>> = (0..repeats)
        .map(|_| {
            let mut a = vec![0; y.len()];
            let (mut p, mut n) = (pos.clone(), neg.clone());
            p.shuffle(&mut rng);
            n.shuffle(&mut rng);
            for (k, &i) in p.iter().chain(&n).enumerate() {
                a[i] = k % folds;
            }
            let bytes: Vec<u8> = a.iter().map(|&f| f as u8).collect();
            hasher.update(&bytes);
            a
        })
        .collect();
    let fingerprint = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(Partition {
        folds,
        assignment,
        fingerprint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    pub variance_fraction: f64,
    pub logreg: LogRegConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            repeats: 5,
            folds: 5,
            seed: 0,
            variance_fraction: 0.9,
            logreg: LogRegConfig::default(),
        }
    }
}

/// Cross-validated performance of one model or baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport<T> {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<FeatureKind>,
    pub fingerprint: String,
    /// `[repeat][fold]` confusion counts on the test rows.
    pub confusion: Vec<Vec<ConfusionCounts>>,
    /// Metrics of the fold-pooled counts of each repeat.
    pub per_repeat: Vec<Metrics<T>>,
    pub mean: Metrics<T>,
    pub sd: Metrics<T>,
}

impl<T: Real> CvReport<T> {
    pub fn from_confusion(
        model: impl Into<String>,
        kind: Option<FeatureKind>,
        fingerprint: &str,
        confusion: Vec<Vec<ConfusionCounts>>,
    ) -> Self {
        let per_repeat: Vec<Metrics<T>> = confusion
            .iter()
            .map(|folds| metrics(&folds.iter().copied().fold(ConfusionCounts::default(), |a, b| a + b)))
            .collect();
        let summary = |f: fn(&[T]) -> T| {
            let col = |m: Metric| f(&per_repeat.iter().map(|r| m.of(r)).collect::<Vec<_>>());
            Metrics {
                precision: col(Metric::Precision),
                recall: col(Metric::Recall),
                f1: col(Metric::F1),
                accuracy: col(Metric::Accuracy),
            }
        };
        CvReport {
            model: model.into(),
            kind,
            fingerprint: fingerprint.to_string(),
            mean: summary(mean),
            sd: summary(sample_sd),
            confusion,
            per_repeat,
        }
    }

    pub fn values(&self, metric: Metric) -> Vec<T> {
        self.per_repeat.iter().map(|m| metric.of(m)).collect()
    }
}

/// A native model: feature family (with PCA flag) and its cohort-ordered matrix.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a, T> {
    pub kind: FeatureKind,
    pub features: &'a Matrix<T>,
}

fn fit_and_score<T: Real>(
    m: &ModelInput<'_, T>,
    y: &[bool],
    train: &[usize],
    test: &[usize],
    cfg: &CvConfig,
) -> Result<ConfusionCounts> {
    let mut x_train = m.features.select_rows(train);
    let mut x_test = m.features.select_rows(test);
    if m.kind.pca {
        let p = Pca::fit(&x_train, cfg.variance_fraction)?;
        x_train = p.transform(&x_train);
        x_test = p.transform(&x_test);
    }
    let y_train: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let y_test: Vec<bool> = test.iter().map(|&i| y[i]).collect();
    let model = train_logreg(&x_train, &y_train, &cfg.logreg)?;
    Ok(ConfusionCounts::from_predictions(&y_test, &model.predict(&x_test)))
}

/// Trains and evaluates every model on every (repeat, fold) of the shared partition.
/// PCA and standardization are fitted on training rows only.
pub fn cross_validate<T: Real>(
    models: &[ModelInput<'_, T>],
    y: &[bool],
    partition: &Partition,
    cfg: &CvConfig,
) -> Result<Vec<CvReport<T>>> {
    for m in models {
        if m.features.rows() != y.len() {
            return Err(Error::invalid(format!(
                "{}: {} feature rows for {} labels",
                m.kind,
                m.features.rows(),
                y.len()
            )));
        }
    }
    let (r, f) = (partition.repeats(), partition.folds);
    let splits: Vec<(Vec<usize>, Vec<usize>)> =
        (0..r * f).map(|i| partition.split(i / f, i % f)).collect();
    let cells: Vec<ConfusionCounts> = (0..models.len() * r * f)
        .into_par_iter()
        .map(|i| {
            let (train, test) = &splits[i % (r * f)];
            fit_and_score(&models[i / (r * f)], y, train, test, cfg)
        })
        .collect::<Result<_>>()?;
    Ok(models
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let confusion = (0..r)
                .map(|rep| cells[(mi * r + rep) * f..(mi * r + rep + 1) * f].to_vec())
                .collect();
            CvReport::from_confusion(m.kind.label(), Some(m.kind), &partition.fingerprint, confusion)
        })
        .collect())
}

/// Exactly `n_positive` rows chosen uniformly at random are predicted positive.
pub fn random_guess(len: usize, n_positive: usize, seed: u64) -> Result<Vec<bool>> {
    if n_positive > len {
        return Err(Error::invalid(format!("cannot predict {n_positive} positives among {len} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![false; len];
    for i in rand::seq::index::sample(&mut rng, len, n_positive) {
        out[i] = true;
    }
    Ok(out)
}

/// Predictions that do not come from a native model.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// A fresh random guess over the whole cohort in every repeat, predicting
    /// as many positives as the cohort has.
    RandomGuess,
    /// Fixed externally produced predictions in cohort order.
    External(Vec<bool>),
}

impl Baseline {
    /// Scores the predictions on each test fold of the partition.
    pub fn evaluate<T: Real>(
        &self,
        name: &str,
        y: &[bool],
        partition: &Partition,
        seed: u64,
    ) -> Result<CvReport<T>> {
        let positives = y.iter().filter(|&&v| v).count();
        let confusion = (0..partition.repeats())
            .map(|rep| {
                let predicted = match self {
                    Baseline::RandomGuess => random_guess(y.len(), positives, seed.wrapping_add(1 + rep as u64))?,
                    Baseline::External(p) => {
                        if p.len() != y.len() {
                            return Err(Error::invalid(format!("{} predictions for {} rows", p.len(), y.len())));
                        }
                        p.clone()
                    }
                };
                Ok((0..partition.folds)
                    .map(|f| {
                        let (_, test) = partition.split(rep, f);
                        let t: Vec<bool> = test.iter().map(|&i| y[i]).collect();
                        let p: Vec<bool> = test.iter().map(|&i| predicted[i]).collect();
                        ConfusionCounts::from_predictions(&t, &p)
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CvReport::from_confusion(name, None, &partition.fingerprint, confusion))
    }
}

/// Reads a `node_id,prediction` file (prediction `0` or `1`).
pub fn load_predictions(path: impl AsRef<Path>) -> Result<BTreeMap<NodeId, bool>> {
    let path = path.as_ref();
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(0, format!("{other:?}")),
        })?;
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["node_id", "prediction"] {
        return Err(parse_err(1, "expected header `node_id,prediction`".into()));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = NodeId::new(&rec[0]).map_err(|e| parse_err(line, e.to_string()))?;
        let p = match &rec[1] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line, format!("prediction must be 0 or 1, found `{other}`"))),
        };
        if out.insert(id.clone(), p).is_some() {
            return Err(parse_err(line, format!("duplicate node {id}")));
        }
    }
    Ok(out)
}

/// External predictions aligned to `ids`; every id must be present.
pub fn external_baseline(path: impl AsRef<Path>, ids: &[NodeId]) -> Result<Vec<bool>> {
    let preds = load_predictions(path)?;
    let missing: Vec<String> = ids.iter().filter(|id| !preds.contains_key(*id)).map(|id| id.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "baseline predictions missing for cohort node(s): {}",
            missing.join(", ")
        )));
    }
    Ok(ids.iter().map(|id| preds[id]).collect())
}

/// Signed-rank test on the paired per-repeat values of one metric.
pub fn compare_models<T: Real>(a: &CvReport<T>, b: &CvReport<T>, metric: Metric) -> Result<TestResult<T>> {
    if a.fingerprint != b.fingerprint || a.per_repeat.len() != b.per_repeat.len() {
        return Err(Error::invalid(format!(
            "reports {} and {} were not evaluated on the same partitions",
            a.model, b.model
        )));
    }
    wilcoxon_signed_rank(&a.values(metric), &b.values(metric))
}

/// Two-sided p-values of every model pair for one metric, BH-adjusted across all pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix<T> {
    pub metric: Metric,
    pub models: Vec<String>,
    pub p_value: Vec<Vec<T>>,
    pub adjusted_p: Vec<Vec<T>>,
}

impl<T: Real> PairwiseMatrix<T> {
    pub fn compute(reports: &[CvReport<T>], metric: Metric) -> Result<Self> {
        let m = reports.len();
        let mut pairs = Vec::new();
        let mut ps = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                ps.push(compare_models(&reports[i], &reports[j], metric)?.p_value);
                pairs.push((i, j));
            }
        }
        let qs = bh_fdr(&ps)?;
        let mut p_value = vec![vec![T::one(); m]; m];
        let mut adjusted_p = vec![vec![T::one(); m]; m];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            p_value[i][j] = ps[k];
            p_value[j][i] = ps[k];
            adjusted_p[i][j] = qs[k];
            adjusted_p[j][i] = qs[k];
        }
        Ok(PairwiseMatrix {
            metric,
            models: reports.iter().map(|r| r.model.clone()).collect(),
            p_value,
            adjusted_p,
        })
    }

    pub fn adjusted(&self, a: &str, b: &str) -> Option<T> {
        let i = self.models.iter().position(|m| m == a)?;
        let j = self.models.iter().position(|m| m == b)?;
        Some(self.adjusted_p[i][j])
    }
}
