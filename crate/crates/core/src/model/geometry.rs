//! Antenna and port coordinates along the array axis, and per-path
//! propagation differences relative to the array center.

use crate::config::{PathDiffMode, SystemConfig};
use crate::error::{Error, Result};

fn centered_offset(index: usize, count: usize, spacing: f64) -> f64 {
    (2.0 * (index as f64 - 1.0) - count as f64 + 1.0) / 2.0 * spacing
}

/// Coordinate (m) of the `n`-th transmit antenna, 1-based.
pub fn bs_antenna_y(n: usize, cfg: &SystemConfig) -> Result<f64> {
    if n < 1 || n > cfg.n_tx {
        return Err(Error::IndexOutOfRange {
            what: "antenna",
            index: n,
            max: cfg.n_tx,
        });
    }
    Ok(centered_offset(n, cfg.n_tx, cfg.d_bs))
}

/// Coordinate (m) of fluid-antenna port `port`, 1-based.
pub fn port_y(port: usize, cfg: &SystemConfig) -> Result<f64> {
    if port < 1 || port > cfg.m_ports {
        return Err(Error::IndexOutOfRange {
            what: "port",
            index: port,
            max: cfg.m_ports,
        });
    }
    Ok(centered_offset(port, cfg.m_ports, cfg.d_u))
}

/// Path difference between a point at `y` and the origin, for a scatterer at
/// elevation `theta` and distance `dist`.
pub fn path_diff(theta: f64, dist: f64, y: f64, mode: PathDiffMode) -> Result<f64> {
    if !(dist > 0.0) {
        return Err(Error::NonPositiveDistance(dist));
    }
    let s = theta.sin();
    Ok(match mode {
        PathDiffMode::Exact => (dist * dist + y * y - 2.0 * dist * y * s).sqrt() - dist,
        PathDiffMode::Taylor => -y * s - y * y * s * s / (2.0 * dist),
    })
}

/// Transmit-side path difference `d_t^p(n)`.
pub fn path_diff_tx(theta_t: f64, v_t: f64, y: f64, mode: PathDiffMode) -> Result<f64> {
    path_diff(theta_t, v_t, y, mode)
}

/// Receive-side path difference `d_r^q(r_m)`.
pub fn path_diff_rx(theta_r: f64, v_r: f64, y: f64, mode: PathDiffMode) -> Result<f64> {
    path_diff(theta_r, v_r, y, mode)
}
