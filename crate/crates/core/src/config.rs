//! Physical and algorithmic parameters of the downlink system.

use crate::error::{Error, Result};

/// Which path-difference formula drives the field responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathDiffMode {
    /// Square-root distance difference.
    Exact,
    /// Second-order polynomial `-y sinθ - y² sin²θ / (2v)`.
    #[default]
    Taylor,
}

/// Distribution of the path-response coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathGainModel {
    /// Real Gaussian `N(0, α²)`.
    #[default]
    Real,
    /// Circularly-symmetric complex Gaussian with total variance `α²`.
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of transmit antennas `N`.
    pub n_tx: usize,
    /// Number of fluid-antenna ports `M`.
    pub m_ports: usize,
    /// Number of simultaneously activated ports.
    pub m_active: usize,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Transmit antenna spacing in meters.
    pub d_bs: f64,
    /// Port spacing in meters.
    pub d_u: f64,
    pub v_tx_paths: usize,
    pub v_rx_paths: usize,
    /// Noise power in milliwatts.
    pub noise_power: f64,
    /// Variance of each path-response coefficient.
    pub path_gain_var: f64,
    /// Total power budget in milliwatts.
    pub p_max: f64,
    /// Computation power coefficient.
    pub p0: f64,
    /// Dinkelbach stopping tolerance.
    pub eps1: f64,
    /// Alternation stopping tolerance.
    pub eps2: f64,
    pub mc_samples: usize,
    /// Scatterer distance range `[lo, hi]` in meters.
    pub scatterer_dist_range: (f64, f64),
    pub rng_seed: u64,
    pub path_diff_mode: PathDiffMode,
    pub path_gain_model: PathGainModel,
}

/// Converts dBm to linear milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

impl Default for SystemConfig {
    fn default() -> Self {
        let noise_power = dbm_to_mw(3.0);
        Self {
            n_tx: 20,
            m_ports: 35,
            m_active: 5,
            wavelength: 0.004,
            d_bs: 0.002,
            d_u: 0.002,
            v_tx_paths: 3,
            v_rx_paths: 3,
            noise_power,
            path_gain_var: 1.0 / 3.0,
            p_max: noise_power * 10f64.powf(1.5),
            p0: 1.0,
            eps1: 1e-5,
            eps2: 1e-5,
            mc_samples: 1000,
            scatterer_dist_range: (0.1, 1.0),
            rng_seed: 7,
            path_diff_mode: PathDiffMode::Taylor,
            path_gain_model: PathGainModel::Real,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_tx < 1 {
            return fail("n_tx must be at least 1".into());
        }
        if self.m_ports < 1 {
            return fail("m_ports must be at least 1".into());
        }
        if self.m_active < 1 || self.m_active > self.m_ports {
            return fail(format!(
                "m_active = {} must satisfy 1 <= m_active <= m_ports = {}",
                self.m_active, self.m_ports
            ));
        }
        if self.v_tx_paths < 1 || self.v_rx_paths < 1 {
            return fail("path counts must be at least 1".into());
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("d_bs", self.d_bs),
            ("d_u", self.d_u),
            ("noise_power", self.noise_power),
            ("p_max", self.p_max),
            ("p0", self.p0),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.path_gain_var.is_finite() && self.path_gain_var >= 0.0) {
            return fail(format!("path_gain_var must be nonnegative, got {}", self.path_gain_var));
        }
        if self.mc_samples < 1 {
            return fail("mc_samples must be at least 1".into());
        }
        let (lo, hi) = self.scatterer_dist_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return fail(format!("scatterer_dist_range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"));
        }
        Ok(())
    }

    /// Signal-to-noise ratio `P_max / σ²` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.p_max / self.noise_power).log10()
    }

    /// Copy of this configuration with `P_max = σ² · 10^(snr/10)`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        Self {
            p_max: self.noise_power * 10f64.powf(snr_db / 10.0),
            ..self.clone()
        }
    }

    /// `α² / σ²`.
    pub fn gamma0(&self) -> f64 {
        self.path_gain_var / self.noise_power
    }
}
