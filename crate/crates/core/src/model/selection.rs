use rand::Rng;
use rand::seq::index;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Strictly increasing 1-based indices of the activated ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortSelection(Vec<usize>);

impl PortSelection {
    pub fn new(ports: Vec<usize>, m_ports: usize) -> Result<Self> {
        if ports.is_empty() {
            return Err(Error::InvalidPorts("selection is empty".into()));
        }
        if let Some(&bad) = ports.iter().find(|&&p| p < 1 || p > m_ports) {
            return Err(Error::IndexOutOfRange {
                what: "port",
                index: bad,
                max: m_ports,
            });
        }
        if ports.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPorts(format!("{ports:?} is not strictly increasing")));
        }
        Ok(Self(ports))
    }

    /// Sorts and validates an unordered set of ports.
    pub fn from_unsorted(mut ports: Vec<usize>, m_ports: usize) -> Result<Self> {
        ports.sort_unstable();
        Self::new(ports, m_ports)
    }

    /// `m_active` indices spread evenly over `1..=m_ports`, both ends included.
    pub fn evenly_spaced(cfg: &SystemConfig) -> Self {
        let (m, k) = (cfg.m_ports, cfg.m_active);
        let ports = if k == 1 {
            vec![m.div_ceil(2)]
        } else {
            (0..k)
                .map(|i| 1 + ((i * (m - 1)) as f64 / (k - 1) as f64).round() as usize)
                .collect()
        };
        Self::new(ports, m).expect("evenly spaced ports are valid when m_active <= m_ports")
    }

    /// Uniformly random selection of `m_active` distinct ports.
    pub fn random<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Self {
        let picked = index::sample(rng, cfg.m_ports, cfg.m_active).into_iter().map(|i| i + 1).collect();
        Self::from_unsorted(picked, cfg.m_ports).expect("distinct in-range sample")
    }

    pub fn ports(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, port: usize) -> bool {
        self.0.binary_search(&port).is_ok()
    }
}

impl std::fmt::Display for PortSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let joined: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", joined.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from;

    #[test]
    fn validation() {
        assert!(PortSelection::new(vec![1, 3, 5], 5).is_ok());
        assert!(PortSelection::new(vec![3, 1], 5).is_err());
        assert!(PortSelection::new(vec![1, 1], 5).is_err());
        assert!(PortSelection::new(vec![0, 1], 5).is_err());
        assert!(PortSelection::new(vec![6], 5).is_err());
        assert!(PortSelection::new(vec![], 5).is_err());
        assert_eq!(PortSelection::from_unsorted(vec![4, 2], 5).unwrap().ports(), &[2, 4]);
    }

    #[test]
    fn evenly_spaced_defaults() {
        let cfg = SystemConfig::default();
        assert_eq!(PortSelection::evenly_spaced(&cfg).ports(), &[1, 10, 18, 27, 35]);
        let single = SystemConfig {
            m_active: 1,
            ..cfg.clone()
        };
        assert_eq!(PortSelection::evenly_spaced(&single).ports(), &[18]);
        let full = SystemConfig {
            m_ports: 4,
            m_active: 4,
            ..cfg
        };
        assert_eq!(PortSelection::evenly_spaced(&full).ports(), &[1, 2, 3, 4]);
    }

    #[test]
    fn random_is_valid_and_seeded() {
        let cfg = SystemConfig::default();
        let a = PortSelection::random(&cfg, &mut rng_from(5));
        let b = PortSelection::random(&cfg, &mut rng_from(5));
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        PortSelection::new(a.ports().to_vec(), cfg.m_ports).unwrap();
    }
}
