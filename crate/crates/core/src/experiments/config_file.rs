//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments run to end of line
//! n_tx = 20
//! scatterer_dist_range = 0.1, 1.0
//! load_model = (-0.5, 0.5, 0.7), (-1.0, 0.85, 0.4), (-2.0, 1.25, 0.2)
//! schemes = proposed, conventional
//! snr_db_list = 0, 3, 6
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{SchemeId, DEFAULT_SNR_DB};
use crate::config::{PathDiffMode, PathGainModel, SystemConfig};
use crate::error::{Error, Result};
use crate::semantic::{LoadModel, LoadSegment};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub load_model: LoadModel,
    pub schemes: Vec<SchemeId>,
    pub snr_db_list: Vec<f64>,
    pub n_trials: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            load_model: LoadModel::default(),
            schemes: SchemeId::ALL.to_vec(),
            snr_db_list: DEFAULT_SNR_DB.to_vec(),
            n_trials: 50,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{key}`: cannot parse `{}`", value.trim()),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(line, key, s))
        .collect()
}

fn parse_triples(line: usize, value: &str) -> Result<Vec<LoadSegment>> {
    let bad = |msg: String| Error::Parse { line, msg };
    let mut segments = Vec::new();
    let mut rest = value.trim().trim_start_matches('[').trim_end_matches(']').trim();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(|c: char| c == ',' || c.is_whitespace());
        if rest.is_empty() {
            break;
        }
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| bad(format!("`load_model`: expected `(` at `{rest}`")))?;
        let close = body
            .find(')')
            .ok_or_else(|| bad("`load_model`: unclosed `(`".into()))?;
        let nums: Vec<f64> = parse_list(line, "load_model", &body[..close])?;
        if nums.len() != 3 {
            return Err(bad(format!("`load_model`: expected (A, B, D) triples, got {} values", nums.len())));
        }
        segments.push(LoadSegment::new(nums[0], nums[1], nums[2]));
        rest = &body[close + 1..];
    }
    Ok(segments)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut segments: Option<Vec<LoadSegment>> = None;
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            let sys = &mut cfg.system;
            match key {
                "n_tx" => sys.n_tx = parse_num(line, key, value)?,
                "m_ports" => sys.m_ports = parse_num(line, key, value)?,
                "m_active" => sys.m_active = parse_num(line, key, value)?,
                "wavelength" => sys.wavelength = parse_num(line, key, value)?,
                "d_bs" => sys.d_bs = parse_num(line, key, value)?,
                "d_u" => sys.d_u = parse_num(line, key, value)?,
                "v_tx_paths" => sys.v_tx_paths = parse_num(line, key, value)?,
                "v_rx_paths" => sys.v_rx_paths = parse_num(line, key, value)?,
                "noise_power" => sys.noise_power = parse_num(line, key, value)?,
                "path_gain_var" => sys.path_gain_var = parse_num(line, key, value)?,
                "p_max" => sys.p_max = parse_num(line, key, value)?,
                "p0" => sys.p0 = parse_num(line, key, value)?,
                "eps1" => sys.eps1 = parse_num(line, key, value)?,
                "eps2" => sys.eps2 = parse_num(line, key, value)?,
                "mc_samples" => sys.mc_samples = parse_num(line, key, value)?,
                "rng_seed" => sys.rng_seed = parse_num(line, key, value)?,
                "scatterer_dist_range" => {
                    let v: Vec<f64> = parse_list(line, key, value)?;
                    if v.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "`scatterer_dist_range` takes two values `lo, hi`".into(),
                        });
                    }
                    sys.scatterer_dist_range = (v[0], v[1]);
                }
                "path_diff_mode" => {
                    sys.path_diff_mode = match value {
                        "taylor" => PathDiffMode::Taylor,
                        "exact" => PathDiffMode::Exact,
                        other => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("`path_diff_mode` must be `taylor` or `exact`, got `{other}`"),
                            })
                        }
                    }
                }
                "path_gain_model" => {
                    sys.path_gain_model = match value {
                        "real" => PathGainModel::Real,
                        "complex" => PathGainModel::Complex,
                        other => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("`path_gain_model` must be `real` or `complex`, got `{other}`"),
                            })
                        }
                    }
                }
                "load_model" => segments = Some(parse_triples(line, value)?),
                "schemes" => {
                    cfg.schemes = value
                        .trim_start_matches('[')
                        .trim_end_matches(']')
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(SchemeId::from_str)
                        .collect::<Result<_>>()?
                }
                "snr_db_list" => cfg.snr_db_list = parse_list(line, key, value)?,
                "n_trials" => cfg.n_trials = parse_num(line, key, value)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        if let Some(segments) = segments {
            cfg.load_model = LoadModel::new(segments)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must not be empty".into()));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db_list must be a nonempty list of finite values".into()));
        }
        if self.n_trials < 1 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        Ok(())
    }
}
