//! Random scenario draws: path geometry and path-response coefficients.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{PathGainModel, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// One propagation path as seen from an array origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Elevation angle in radians, `[-π/2, π/2]`.
    pub theta: f64,
    /// Azimuth angle in radians, `[0, 2π]`. Carried but unused by the
    /// one-dimensional array geometry.
    pub phi: f64,
    /// Scatterer distance in meters.
    pub dist: f64,
}

impl Path {
    pub fn broadside(dist: f64) -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
            dist,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    pub tx_paths: Vec<Path>,
    pub rx_paths: Vec<Path>,
}

impl ScenarioSample {
    /// Draws angles uniformly over their ranges and distances uniformly over
    /// the configured scatterer range.
    pub fn sample<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Self {
        let (lo, hi) = cfg.scatterer_dist_range;
        let draw = |rng: &mut R| Path {
            theta: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
            phi: rng.random_range(0.0..=2.0 * PI),
            dist: if lo < hi { rng.random_range(lo..=hi) } else { lo },
        };
        let tx_paths = (0..cfg.v_tx_paths).map(|_| draw(rng)).collect();
        let rx_paths = (0..cfg.v_rx_paths).map(|_| draw(rng)).collect();
        Self { tx_paths, rx_paths }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.tx_paths.len() != cfg.v_tx_paths || self.rx_paths.len() != cfg.v_rx_paths {
            return Err(Error::DimensionMismatch(format!(
                "scenario has {}x{} paths, config expects {}x{}",
                self.tx_paths.len(),
                self.rx_paths.len(),
                cfg.v_tx_paths,
                cfg.v_rx_paths
            )));
        }
        for p in self.tx_paths.iter().chain(&self.rx_paths) {
            if !(p.dist > 0.0) {
                return Err(Error::NonPositiveDistance(p.dist));
            }
        }
        Ok(())
    }
}

/// Path-response matrix `O` of size `V_r × V_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResponse(pub CMatrix);

impl PathResponse {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Draws i.i.d. path-response coefficients with variance `α²`.
pub fn sample_path_response<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> PathResponse {
    let (rows, cols) = (cfg.v_rx_paths, cfg.v_tx_paths);
    let var = cfg.path_gain_var;
    let o = match cfg.path_gain_model {
        PathGainModel::Real => {
            let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
            CMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal.sample(rng), 0.0))
        }
        PathGainModel::Complex => {
            let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
            CMatrix::from_fn(rows, cols, |_, _| {
                let re = normal.sample(rng);
                Complex64::new(re, normal.sample(rng))
            })
        }
    };
    PathResponse(o)
}
