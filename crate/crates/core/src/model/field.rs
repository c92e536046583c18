//! Field-response matrices of the transmit array and the activated ports.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::geometry::{bs_antenna_y, path_diff, port_y};
use super::scenario::ScenarioSample;
use super::selection::PortSelection;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::linalg::{CMatrix, CVector};

fn phase_factor(d: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * d / wavelength)
}

/// Transmit field-response matrix `A` (`V_t × N`).
pub fn tx_field_matrix(scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<CMatrix> {
    let mut a = CMatrix::zeros(scenario.tx_paths.len(), cfg.n_tx);
    for n in 0..cfg.n_tx {
        let y = bs_antenna_y(n + 1, cfg)?;
        for (p, path) in scenario.tx_paths.iter().enumerate() {
            let d = path_diff(path.theta, path.dist, y, cfg.path_diff_mode)?;
            a[(p, n)] = phase_factor(d, cfg.wavelength);
        }
    }
    Ok(a)
}

/// Receive field-response vector `b(port)` (`V_r`).
pub fn rx_field_column(port: usize, scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<CVector> {
    let y = port_y(port, cfg)?;
    let entries = scenario
        .rx_paths
        .iter()
        .map(|path| path_diff(path.theta, path.dist, y, cfg.path_diff_mode).map(|d| phase_factor(d, cfg.wavelength)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CVector::from_vec(entries))
}

/// Receive field-response matrix `B(r)` (`V_r × m_a`).
pub fn rx_field_matrix(r: &PortSelection, scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<CMatrix> {
    let cols = r
        .ports()
        .iter()
        .map(|&port| rx_field_column(port, scenario, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_columns(&cols))
}

/// Field responses of every port, indexed by `port - 1`.
pub fn all_port_columns(scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<Vec<CVector>> {
    (1..=cfg.m_ports).map(|port| rx_field_column(port, scenario, cfg)).collect()
}
