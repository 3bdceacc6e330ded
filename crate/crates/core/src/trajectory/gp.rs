//! Exact GP regression with a squared-exponential kernel and zero prior mean.
//! Several output channels share one set of inputs, so one factorization
//! serves all of them.

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAX_JITTER: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    /// Kernel length-scale, seconds. Larger values smooth more.
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpParams {
    pub fn new(length_scale: f64, noise_variance: f64) -> Self {
        GpParams {
            length_scale,
            signal_variance: 1.0,
            noise_variance,
        }
    }

    pub fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = (a - b) / self.length_scale;
        self.signal_variance * (-0.5 * d * d).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0 && self.length_scale.is_finite()) {
            return Err(Error::invalid(format!("length scale must be positive, got {}", self.length_scale)));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::invalid("signal variance must be positive"));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::invalid("noise variance must be non-negative"));
        }
        Ok(())
    }
}

pub struct GpModel {
    params: GpParams,
    times: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    /// `(K + noise I)^-1 y`, one column per channel.
    weights: DMatrix<f64>,
    jitter: f64,
}

impl std::fmt::Debug for GpModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GpModel")
            .field("params", &self.params)
            .field("points", &self.times.len())
            .field("channels", &self.weights.ncols())
            .field("jitter", &self.jitter)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpPrediction {
    /// `mean[channel][query]`.
    pub mean: Vec<Vec<f64>>,
    /// Posterior variance per query, shared by all channels.
    pub variance: Vec<f64>,
    /// Queries outside the training time span.
    pub extrapolated: Vec<bool>,
}

/// Fits `channels` (each a series over `times`). Times must be strictly
/// increasing. If the kernel matrix is numerically not positive definite, a
/// growing diagonal jitter is added and recorded on the model.
pub fn fit_gp(times: &[f64], channels: &[Vec<f64>], params: GpParams) -> Result<GpModel> {
    params.validate()?;
    let n = times.len();
    if n < 2 {
        return Err(Error::invalid("GP fit needs at least two points"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("GP inputs must be finite"));
    }
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "GP inputs must be strictly increasing (duplicate or out of order at index {})",
            i + 1
        )));
    }
    if channels.is_empty() {
        return Err(Error::invalid("GP fit needs at least one channel"));
    }
    if let Some(c) = channels.iter().position(|c| c.len() != n) {
        return Err(Error::invalid(format!("channel {c} length differs from the input count {n}")));
    }

    let gram = DMatrix::from_fn(n, n, |i, j| params.kernel(times[i], times[j]));
    let mut jitter = 0.0;
    let chol = loop {
        let mut k = gram.clone();
        for i in 0..n {
            k[(i, i)] += params.noise_variance + jitter;
        }
        if let Some(chol) = Cholesky::new(k) {
            break chol;
        }
        jitter = if jitter == 0.0 { 1e-12 * params.signal_variance } else { jitter * 10.0 };
        if jitter > MAX_JITTER * params.signal_variance {
            return Err(Error::invalid("kernel matrix is not positive definite even with jitter"));
        }
    };

    let targets = DMatrix::from_fn(n, channels.len(), |i, c| channels[c][i]);
    let weights = chol.solve(&targets);
    Ok(GpModel {
        params,
        times: times.to_vec(),
        chol,
        weights,
        jitter,
    })
}

impl GpModel {
    pub fn params(&self) -> &GpParams {
        &self.params
    }

    /// Diagonal jitter added on top of the noise variance, zero if none.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn channels(&self) -> usize {
        self.weights.ncols()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn cross(&self, query: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(query.len(), self.times.len(), |q, i| self.params.kernel(query[q], self.times[i]))
    }

    /// Posterior means only; `mean[channel][query]`.
    pub fn predict_mean(&self, query: &[f64]) -> Vec<Vec<f64>> {
        let means = self.cross(query) * &self.weights;
        (0..self.channels())
            .map(|c| means.column(c).iter().copied().collect())
            .collect()
    }
}

/// Posterior mean and variance at each query time.
pub fn gp_predict(model: &GpModel, query: &[f64]) -> GpPrediction {
    let cross = model.cross(query);
    let means = &cross * &model.weights;
    let v = model
        .chol
        .l_dirty()
        .solve_lower_triangular(&cross.transpose())
        .expect("cholesky factor has a positive diagonal");
    let (lo, hi) = model.span();
    GpPrediction {
        mean: (0..model.channels())
            .map(|c| means.column(c).iter().copied().collect())
            .collect(),
        variance: (0..query.len())
            .map(|q| (model.params.signal_variance - v.column(q).norm_squared()).max(0.0))
            .collect(),
        extrapolated: query.iter().map(|&t| t < lo || t > hi).collect(),
    }
}
