//! L2-penalized logistic regression, one-vs-rest.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{logsigmoid, sigmoid, Tensor};

/// Gradient-norm tolerance of the Newton solver.
pub const GRAD_TOL: f64 = 1e-6;
const MAX_NEWTON: usize = 100;

/// A binary model `σ(w·x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLogit {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl BinaryLogit {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}

/// One-vs-rest classifier; `models[c]` scores class `c` against the rest.
/// With two classes a single model scores class 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProbe {
    pub n_classes: usize,
    pub models: Vec<BinaryLogit>,
}

impl LogisticProbe {
    pub fn predict_row(&self, x: &[f64]) -> usize {
        if self.n_classes == 2 {
            return usize::from(self.models[0].decision(x) >= 0.0);
        }
        let mut best = (0, f64::NEG_INFINITY);
        for (c, m) in self.models.iter().enumerate() {
            let s = m.decision(x);
            if s > best.1 {
                best = (c, s);
            }
        }
        best.0
    }

    pub fn predict(&self, x: &Tensor) -> Vec<usize> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn accuracy(&self, x: &Tensor, y: &[usize]) -> f64 {
        accuracy(&self.predict(x), y)
    }
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    predicted.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

fn design(x: &Tensor) -> DMatrix<f64> {
    let (n, d) = x.shape();
    DMatrix::from_fn(n, d + 1, |i, j| if j < d { x.get(i, j) } else { 1.0 })
}

/// Regularized negative log-likelihood; `theta` ends with the intercept,
/// which is not penalized.
fn objective(xd: &DMatrix<f64>, signs: &[f64], theta: &DVector<f64>, lambda: f64) -> f64 {
    let z = xd * theta;
    let d = theta.len() - 1;
    let nll: f64 = z.iter().zip(signs).map(|(z, s)| -logsigmoid(s * z)).sum();
    nll + 0.5 * lambda * theta.rows(0, d).norm_squared()
}

/// Newton's method with backtracking on the binary problem `targets ∈ {0,1}`.
pub fn fit_binary(x: &Tensor, targets: &[bool], reg_strength: f64) -> Result<BinaryLogit> {
    if x.rows() != targets.len() {
        return Err(Error::ShapeMismatch("one label per row required".into()));
    }
    if !(reg_strength.is_finite() && reg_strength >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "reg strength {reg_strength}"
        )));
    }
    let xd = design(x);
    let (n, p) = xd.shape();
    let d = p - 1;
    let signs: Vec<f64> = targets
        .iter()
        .map(|&t| if t { 1.0 } else { -1.0 })
        .collect();
    let mut theta = DVector::<f64>::zeros(p);
    let mut f = objective(&xd, &signs, &theta, reg_strength);
    for _ in 0..MAX_NEWTON {
        let z = &xd * &theta;
        let prob: Vec<f64> = z.iter().map(|&z| sigmoid(z)).collect();
        let resid = DVector::from_fn(n, |i, _| prob[i] - f64::from(u8::from(targets[i])));
        let mut grad = xd.tr_mul(&resid);
        for j in 0..d {
            grad[j] += reg_strength * theta[j];
        }
        if grad.norm() <= GRAD_TOL {
            break;
        }
        let weighted = DMatrix::from_fn(n, p, |i, j| xd[(i, j)] * prob[i] * (1.0 - prob[i]));
        let mut hess = xd.tr_mul(&weighted);
        for j in 0..d {
            hess[(j, j)] += reg_strength;
        }
        let mut jitter = 0.0;
        let direction = loop {
            let mut h = hess.clone();
            for j in 0..p {
                h[(j, j)] += jitter;
            }
            match h.cholesky() {
                Some(c) => break c.solve(&grad),
                None if jitter < 1e6 => jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 },
                None => {
                    return Err(Error::NumericFault(
                        "probe Hessian is not positive definite".into(),
                    ))
                }
            }
        };
        let slope = grad.dot(&direction);
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-12 {
            let candidate = &theta - &direction * step;
            let fc = objective(&xd, &signs, &candidate, reg_strength);
            if fc <= f - 1e-4 * step * slope {
                theta = candidate;
                f = fc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // at the floating-point floor of the objective
            break;
        }
    }
    if !theta.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericFault("probe weights diverged".into()));
    }
    Ok(BinaryLogit {
        weights: theta.rows(0, d).iter().copied().collect(),
        intercept: theta[d],
    })
}

/// Fits the one-vs-rest probe. Labels must be `0..n_classes` with at least
/// two distinct classes present.
pub fn fit_logreg_l2(x: &Tensor, y: &[usize], reg_strength: f64) -> Result<LogisticProbe> {
    if x.rows() != y.len() {
        return Err(Error::ShapeMismatch("one label per row required".into()));
    }
    let n_classes = y.iter().max().map_or(0, |&m| m + 1);
    let mut present = alloc::vec![false; n_classes];
    y.iter().for_each(|&c| present[c] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let models = if n_classes == 2 {
        let t: Vec<bool> = y.iter().map(|&c| c == 1).collect();
        alloc::vec![fit_binary(x, &t, reg_strength)?]
    } else {
        (0..n_classes)
            .map(|c| {
                let t: Vec<bool> = y.iter().map(|&k| k == c).collect();
                fit_binary(x, &t, reg_strength)
            })
            .collect::<Result<_>>()?
    };
    Ok(LogisticProbe { n_classes, models })
}
