//! End-to-end channel, Monte-Carlo achievable rate and its closed-form
//! upper bound.

use num_complex::Complex64;

use super::covariance::TransmitCovariance;
use super::field::{rx_field_matrix, tx_field_matrix};
use super::scenario::{sample_path_response, PathResponse, ScenarioSample};
use super::selection::PortSelection;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{identity, log2_det_hpd, trace_re, CMatrix};
use crate::parallel::{map_indexed, Execution};
use crate::seeds::{derive, rng_from, tag};

/// Number of independent random streams a Monte-Carlo estimate is split into.
/// Fixed so that estimates do not depend on the worker count.
pub const MC_LANES: usize = 8;

/// `G = Bᴴ O A` from precomputed field responses.
pub fn channel_from_fields(b: &CMatrix, o: &PathResponse, a: &CMatrix) -> Result<CMatrix> {
    let o = o.matrix();
    if b.nrows() != o.nrows() || o.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "B is {:?}, O is {:?}, A is {:?}",
            b.shape(),
            o.shape(),
            a.shape()
        )));
    }
    Ok(b.adjoint() * o * a)
}

/// End-to-end channel matrix `G(r)` (`m_a × N`).
pub fn channel(
    r: &PortSelection,
    o: &PathResponse,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<CMatrix> {
    let b = rx_field_matrix(r, scenario, cfg)?;
    let a = tx_field_matrix(scenario, cfg)?;
    channel_from_fields(&b, o, &a)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl RateEstimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize) -> Self {
        let mean = sum / n as f64;
        let var = if n > 1 {
            ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            samples: n,
        }
    }

    /// Estimate of `scale · X`.
    pub fn scaled(self, scale: f64) -> Self {
        Self {
            mean: self.mean * scale,
            std_error: self.std_error * scale.abs(),
            samples: self.samples,
        }
    }
}

fn lane_sizes(n: usize) -> impl Iterator<Item = usize> {
    (0..MC_LANES).map(move |lane| n / MC_LANES + usize::from(lane < n % MC_LANES))
}

/// Monte-Carlo estimate of `E_O log2 det(I + G Q Gᴴ / σ²)`.
///
/// Samples are split over [`MC_LANES`] streams seeded from `seed`, so the
/// result is bitwise identical for sequential and parallel execution.
pub fn mc_rate(
    r: &PortSelection,
    q: &TransmitCovariance,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<RateEstimate> {
    if n_samples == 0 {
        return Err(Error::Config("Monte-Carlo sample count must be at least 1".into()));
    }
    let q = TransmitCovariance::new(q.matrix().clone(), f64::INFINITY)?;
    if q.dim() != cfg.n_tx {
        return Err(Error::DimensionMismatch(format!("Q is {}x{}, N = {}", q.dim(), q.dim(), cfg.n_tx)));
    }
    let b = rx_field_matrix(r, scenario, cfg)?;
    let a = tx_field_matrix(scenario, cfg)?;
    let bh = b.adjoint();
    // G Q Gᴴ = Bᴴ O (A Q Aᴴ) Oᴴ B
    let aqa = &a * q.matrix() * a.adjoint();
    let inv_noise = Complex64::from(1.0 / cfg.noise_power);
    let eye = identity(r.len());

    let sizes: Vec<usize> = lane_sizes(n_samples).collect();
    let moments = map_indexed(MC_LANES, exec, |lane| {
        let mut rng = rng_from(derive(seed, &[tag::MONTE_CARLO, lane as u64]));
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..sizes[lane] {
            let o = sample_path_response(cfg, &mut rng);
            let bo = &bh * o.matrix();
            let cov = &bo * &aqa * bo.adjoint();
            let rate = log2_det_hpd(&(&eye + cov * inv_noise));
            sum += rate;
            sum_sq += rate * rate;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = moments
        .into_iter()
        .fold((0.0, 0.0), |(s, s2), (a, b)| (s + a, s2 + b));
    Ok(RateEstimate::from_moments(sum, sum_sq, n_samples))
}

/// `(1/ρ) log2 det(I + γ Bᴴ B)`, the bound as a function of the effective
/// gain `γ = (α²/σ²) tr(A Q Aᴴ)`.
pub fn equivalent_rate_bound(gamma: f64, b: &CMatrix, rho: f64) -> f64 {
    let gram = b.adjoint() * b;
    let m = identity(b.ncols()) + gram * Complex64::from(gamma);
    log2_det_hpd(&m) / rho
}

/// `(α²/σ²) tr(A Q Aᴴ)`.
pub fn effective_gain(a: &CMatrix, q: &TransmitCovariance, cfg: &SystemConfig) -> f64 {
    cfg.gamma0() * trace_re(&(a * q.matrix() * a.adjoint())).max(0.0)
}

/// Upper bound on the equivalent rate obtained by moving the expectation
/// inside the log-determinant.
pub fn rate_upper_bound(
    r: &PortSelection,
    q: &TransmitCovariance,
    rho: f64,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::RhoOutOfRange(rho));
    }
    let b = rx_field_matrix(r, scenario, cfg)?;
    let a = tx_field_matrix(scenario, cfg)?;
    Ok(equivalent_rate_bound(effective_gain(&a, q, cfg), &b, rho))
}
