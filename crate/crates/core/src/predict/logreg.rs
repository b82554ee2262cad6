use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub l2_strength: f64,
    pub max_iter: usize,
    /// Stop once every gradient component is below this in magnitude.
    pub tolerance: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2_strength: 1.0,
            max_iter: 10_000,
            tolerance: 1e-8,
        }
    }
}

/// L2-regularized logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub l2_strength: T,
    /// Per-feature mean and sd of the training rows (sd 0 replaced by 1).
    pub mean: Vec<T>,
    pub sd: Vec<T>,
    pub iterations: usize,
    /// Objective after every accepted step, starting at the zero model.
    pub loss_history: Vec<T>,
}

#[inline]
fn softplus<T: Real>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

fn margins<T: Real>(x: &Matrix<T>, w: &[T], b: T) -> Vec<T> {
    (0..x.rows())
        .map(|i| x.row(i).iter().zip(w).map(|(&a, &c)| a * c).sum::<T>() + b)
        .collect()
}

fn loss_at<T: Real>(z: &[T], y: &[bool], w: &[T], l2: T) -> T {
    let n = T::of_usize(z.len());
    let nll = z
        .iter()
        .zip(y)
        .map(|(&z, &yi)| if yi { softplus(z) - z } else { softplus(z) })
        .sum::<T>()
        / n;
    nll + l2 / T::of(2.0) * w.iter().map(|&v| v * v).sum::<T>()
}

fn gradient_at<T: Real>(x: &Matrix<T>, z: &[T], y: &[bool], w: &[T], l2: T) -> (Vec<T>, T) {
    let n = T::of_usize(z.len());
    let mut gw: Vec<T> = vec![T::zero(); w.len()];
    let mut gb = T::zero();
    for (i, (&zi, &yi)) in z.iter().zip(y).enumerate() {
        let r = sigmoid(zi) - if yi { T::one() } else { T::zero() };
        gb += r;
        for (g, &a) in gw.iter_mut().zip(x.row(i)) {
            *g += r * a;
        }
    }
    for (g, &v) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * v;
    }
    (gw, gb / n)
}

/// Mean negative log-likelihood plus `l2 / 2 * |w|^2` (bias unpenalized) and
/// its gradient `(d/dw, d/db)`, on already-standardized rows.
pub fn logistic_objective<T: Real>(x: &Matrix<T>, y: &[bool], w: &[T], b: T, l2: T) -> (T, Vec<T>, T) {
    let z = margins(x, w, b);
    let (gw, gb) = gradient_at(x, &z, y, w, l2);
    (loss_at(&z, y, w, l2), gw, gb)
}

/// Full-batch gradient descent with Armijo backtracking.
pub fn train_logreg<T: Real>(x: &Matrix<T>, y: &[bool], cfg: &LogRegConfig) -> Result<LogRegModel<T>> {
    let (n, d) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::invalid(format!("{} labels for {n} rows", y.len())));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == n {
        return Err(Error::invalid("logistic regression needs both classes in the training data"));
    }
    let nt = T::of_usize(n);
    let mean: Vec<T> = (0..d).map(|j| (0..n).map(|i| x.get(i, j)).sum::<T>() / nt).collect();
    let sd: Vec<T> = (0..d)
        .map(|j| {
            let var = (0..n).map(|i| (x.get(i, j) - mean[j]).powi(2)).sum::<T>() / nt;
            let s = var.sqrt();
            if s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    let xs = standardize(x, &mean, &sd);

    let l2 = T::of(cfg.l2_strength);
    let tol = T::of(cfg.tolerance);
    let armijo = T::of(1e-4);
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut z = margins(&xs, &w, b);
    let mut loss = loss_at(&z, y, &w, l2);
    let mut history = vec![loss];
    let mut step = T::one();
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let (gw, gb) = gradient_at(&xs, &z, y, &w, l2);
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < tol {
            break;
        }
        let gnorm2 = gw.iter().map(|&g| g * g).sum::<T>() + gb * gb;
        step *= T::of(2.0);
        let accepted = loop {
            let cw: Vec<T> = w.iter().zip(&gw).map(|(&a, &g)| a - step * g).collect();
            let cb = b - step * gb;
            let cz = margins(&xs, &cw, cb);
            let closs = loss_at(&cz, y, &cw, l2);
            if closs <= loss - armijo * step * gnorm2 {
                break Some((cw, cb, cz, closs));
            }
            step /= T::of(2.0);
            if step < T::epsilon() * T::epsilon() {
                break None;
            }
        };
        let Some((cw, cb, cz, closs)) = accepted else {
            // no descent representable at this precision
            break;
        };
        w = cw;
        b = cb;
        z = cz;
        loss = closs;
        history.push(loss);
        iterations += 1;
    }
    Ok(LogRegModel {
        weights: w,
        bias: b,
        l2_strength: l2,
        mean,
        sd,
        iterations,
        loss_history: history,
    })
}

fn standardize<T: Real>(x: &Matrix<T>, mean: &[T], sd: &[T]) -> Matrix<T> {
    let data = (0..x.rows())
        .flat_map(|i| {
            x.row(i)
                .iter()
                .zip(mean)
                .zip(sd)
                .map(|((&v, &m), &s)| (v - m) / s)
                .collect::<Vec<_>>()
        })
        .collect();
    Matrix::from_vec(x.rows(), x.cols(), data)
}

impl<T: Real> LogRegModel<T> {
    pub fn predict_proba(&self, x: &Matrix<T>) -> Vec<T> {
        let xs = standardize(x, &self.mean, &self.sd);
        margins(&xs, &self.weights, self.bias).into_iter().map(sigmoid).collect()
    }

    /// Positive when the predicted probability is at least 0.5.
    pub fn predict(&self, x: &Matrix<T>) -> Vec<bool> {
        self.predict_proba(x).into_iter().map(|p| p >= T::of(0.5)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_toy_set() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.5],
            vec![0.5, 1.0],
            vec![3.0, 3.0],
            vec![4.0, 3.5],
            vec![3.5, 4.0],
        ];
        let y = [false, false, false, true, true, true];
        let x = Matrix::from_rows(&rows);
        let cfg = LogRegConfig {
            l2_strength: 1e-6,
            ..Default::default()
        };
        let m: LogRegModel<f64> = train_logreg(&x, &y, &cfg).unwrap();
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[vec![1.0f64], vec![2.0]]);
        assert!(train_logreg(&x, &[true, true], &LogRegConfig::default()).is_err());
    }

    #[test]
    fn converges_and_loss_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..6).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.5 * r[1] + rng.random_range(-1.0..1.0) > 0.0).collect();
        let x = Matrix::from_rows(&rows);
        let m = train_logreg(&x, &y, &LogRegConfig::default()).unwrap();
        assert!(m.iterations < 10_000);
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
        let f32_rows: Vec<Vec<f32>> = rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
        let m32 = train_logreg(&Matrix::from_rows(&f32_rows), &y, &LogRegConfig::default()).unwrap();
        for (a, b) in m.weights.iter().zip(&m32.weights) {
            assert!((a - *b as f64).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..1_000_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, d) = (rng.random_range(3..20), rng.random_range(1..6));
            let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect());
            let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = rng.random_range(-1.0..1.0);
            let l2 = rng.random_range(0.0..2.0);
            let (_, gw, gb) = logistic_objective(&x, &y, &w, b, l2);
            let h = 1e-5;
            for j in 0..=d {
                let shift = |s: f64| {
                    let mut w2 = w.clone();
                    let mut b2 = b;
                    if j < d { w2[j] += s } else { b2 += s }
                    logistic_objective(&x, &y, &w2, b2, l2).0
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                let an = if j < d { gw[j] } else { gb };
                prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
            }
        }
    }
}
