//! Near-field channel model: geometry, field responses, random draws and
//! rate evaluation.

pub mod covariance;
pub mod field;
pub mod geometry;
pub mod rate;
pub mod scenario;
pub mod selection;

pub use covariance::TransmitCovariance;
pub use field::{all_port_columns, rx_field_column, rx_field_matrix, tx_field_matrix};
pub use geometry::{bs_antenna_y, path_diff_rx, path_diff_tx, port_y};
pub use rate::{
    channel, channel_from_fields, effective_gain, equivalent_rate_bound, mc_rate, rate_upper_bound, RateEstimate,
};
pub use scenario::{sample_path_response, Path, PathResponse, ScenarioSample};
pub use selection::PortSelection;
