//! Activated-port selection for a fixed `(Q, ρ)`.
//!
//! With `γ = (α²/σ²) tr(AQAᴴ)` the bound is
//! `log2 det(I + γ Σ_m b(r_m) b(r_m)ᴴ) / ρ`. Holding every port but the
//! `m`-th fixed, the determinant lemma splits it into a term independent of
//! `r_m` plus `log2(1 + γ · b(r_m)ᴴ (I + γ B̄ B̄ᴴ)⁻¹ b(r_m))`, so each
//! coordinate is optimized exactly by scanning the quadratic-form score.

use itertools::Itertools;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{hpd_inverse, identity, CMatrix, CVector};
use crate::model::{
    all_port_columns, effective_gain, equivalent_rate_bound, rx_field_column, tx_field_matrix, PortSelection,
    ScenarioSample, TransmitCovariance,
};

/// Cap on repeated coordinate passes.
pub const MAX_PASSES: usize = 50;

/// Largest number of selections [`exhaustive_best`] will enumerate.
pub const EXHAUSTIVE_GUARD: u128 = 1_000_000;

/// Relative margin a challenger must clear to displace the current best.
const TIE_TOL: f64 = 1e-12;

/// Everything needed to score candidates for one coordinate.
#[derive(Debug, Clone)]
pub struct PortScoreContext {
    pub gamma: f64,
    /// Retained columns, `V_r × (m_a − 1)`.
    pub b_bar: CMatrix,
    /// `(I + γ B̄ B̄ᴴ)⁻¹`.
    pub inverse_core: CMatrix,
    retained: Vec<usize>,
}

impl PortScoreContext {
    /// Context for re-choosing the port at position `m` (0-based) of `ports`.
    pub fn new(gamma: f64, columns: &[CVector], ports: &[usize], m: usize) -> Result<Self> {
        let v_r = columns.first().map(|c| c.len()).unwrap_or(0);
        let retained: Vec<usize> = ports
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .map(|(_, &p)| p)
            .collect();
        let cols: Vec<CVector> = retained.iter().map(|&p| columns[p - 1].clone()).collect();
        let b_bar = if cols.is_empty() {
            CMatrix::zeros(v_r, 0)
        } else {
            CMatrix::from_columns(&cols)
        };
        let core = identity(v_r) + &b_bar * b_bar.adjoint() * Complex64::from(gamma);
        let inverse_core = hpd_inverse(&core)
            .ok_or_else(|| Error::DimensionMismatch("I + γ B̄B̄ᴴ is not positive definite".into()))?;
        Ok(Self {
            gamma,
            b_bar,
            inverse_core,
            retained,
        })
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// `bᴴ (I + γ B̄ B̄ᴴ)⁻¹ b`.
    pub fn score_column(&self, b: &CVector) -> f64 {
        (b.adjoint() * &self.inverse_core * b)[(0, 0)].re
    }
}

/// Quadratic-form score of port `candidate` under `ctx`.
pub fn per_port_score(
    candidate: usize,
    ctx: &PortScoreContext,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<f64> {
    if ctx.retained.contains(&candidate) {
        return Err(Error::PortCollision(candidate));
    }
    let b = rx_field_column(candidate, scenario, cfg)?;
    Ok(ctx.score_column(&b))
}

/// Port-selection subproblem for one scenario and fixed `(Q, ρ)`.
#[derive(Debug, Clone)]
pub struct PortSearch {
    columns: Vec<CVector>,
    gamma: f64,
    rho: f64,
    m_ports: usize,
}

/// Outcome of repeated coordinate passes.
#[derive(Debug, Clone, PartialEq)]
pub struct PortAscent {
    pub selection: PortSelection,
    pub objective: f64,
    pub passes: usize,
    pub converged: bool,
}

impl PortSearch {
    pub fn new(q: &TransmitCovariance, rho: f64, scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::RhoOutOfRange(rho));
        }
        let a = tx_field_matrix(scenario, cfg)?;
        Ok(Self::from_gain(effective_gain(&a, q, cfg), rho, all_port_columns(scenario, cfg)?))
    }

    pub fn from_gain(gamma: f64, rho: f64, columns: Vec<CVector>) -> Self {
        let m_ports = columns.len();
        Self {
            columns,
            gamma,
            rho,
            m_ports,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn columns(&self) -> &[CVector] {
        &self.columns
    }

    fn field_matrix(&self, ports: &[usize]) -> CMatrix {
        let cols: Vec<CVector> = ports.iter().map(|&p| self.columns[p - 1].clone()).collect();
        CMatrix::from_columns(&cols)
    }

    /// Equivalent-rate bound of a selection.
    pub fn objective(&self, r: &PortSelection) -> f64 {
        equivalent_rate_bound(self.gamma, &self.field_matrix(r.ports()), self.rho)
    }

    /// One sweep over all coordinates, each replaced by its best admissible port.
    pub fn coordinate_pass(&self, r: &PortSelection) -> Result<PortSelection> {
        let mut ports = r.ports().to_vec();
        for m in 0..ports.len() {
            let ctx = PortScoreContext::new(self.gamma, &self.columns, &ports, m)?;
            let incumbent = ports[m];
            let mut best = (incumbent, ctx.score_column(&self.columns[incumbent - 1]));
            for candidate in 1..=self.m_ports {
                if candidate == incumbent || ctx.retained.contains(&candidate) {
                    continue;
                }
                let score = ctx.score_column(&self.columns[candidate - 1]);
                if score > best.1 + TIE_TOL * best.1.abs().max(1.0) {
                    best = (candidate, score);
                }
            }
            ports[m] = best.0;
        }
        PortSelection::from_unsorted(ports, self.m_ports)
    }

    /// Repeats coordinate passes until the selection stops changing or the
    /// gain drops below `eps`.
    pub fn ascend(&self, start: &PortSelection, eps: f64) -> Result<PortAscent> {
        let mut current = start.clone();
        let mut objective = self.objective(&current);
        for pass in 1..=MAX_PASSES {
            let next = self.coordinate_pass(&current)?;
            if next == current {
                return Ok(PortAscent {
                    selection: current,
                    objective,
                    passes: pass,
                    converged: true,
                });
            }
            let next_obj = self.objective(&next);
            if next_obj < objective {
                // Only reachable through rounding in near-ties.
                return Ok(PortAscent {
                    selection: current,
                    objective,
                    passes: pass,
                    converged: true,
                });
            }
            let gain = next_obj - objective;
            current = next;
            objective = next_obj;
            if gain < eps {
                return Ok(PortAscent {
                    selection: current,
                    objective,
                    passes: pass,
                    converged: true,
                });
            }
        }
        Ok(PortAscent {
            selection: current,
            objective,
            passes: MAX_PASSES,
            converged: false,
        })
    }

    /// Best selection by full enumeration; lexicographically smallest on ties.
    pub fn exhaustive(&self, m_active: usize) -> Result<(PortSelection, f64)> {
        let count = binomial(self.m_ports as u128, m_active as u128);
        if count > EXHAUSTIVE_GUARD {
            return Err(Error::CombinatorialGuard(count));
        }
        let mut best: Option<(Vec<usize>, f64)> = None;
        for combo in (1..=self.m_ports).combinations(m_active) {
            let value = equivalent_rate_bound(self.gamma, &self.field_matrix(&combo), self.rho);
            if best.as_ref().is_none_or(|b| value > b.1) {
                best = Some((combo, value));
            }
        }
        let (ports, value) = best.ok_or_else(|| Error::InvalidPorts("no selection to enumerate".into()))?;
        Ok((PortSelection::new(ports, self.m_ports)?, value))
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// One coordinate-ascent pass over `r` for fixed `(Q, ρ)`.
pub fn coordinate_pass(
    r: &PortSelection,
    q: &TransmitCovariance,
    rho: f64,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<PortSelection> {
    PortSearch::new(q, rho, scenario, cfg)?.coordinate_pass(r)
}

/// Exhaustive search over every valid selection of `m_active` ports.
pub fn exhaustive_best(
    q: &TransmitCovariance,
    rho: f64,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<(PortSelection, f64)> {
    PortSearch::new(q, rho, scenario, cfg)?.exhaustive(cfg.m_active)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::TxGram;
    use crate::linalg::log2_det_hpd;
    use crate::seeds::rng_from;

    fn setup(seed: u64, cfg: &SystemConfig) -> (ScenarioSample, TransmitCovariance, PortSelection) {
        let mut rng = rng_from(seed);
        let s = ScenarioSample::sample(cfg, &mut rng);
        let r = PortSelection::random(cfg, &mut rng);
        let a = tx_field_matrix(&s, cfg).unwrap();
        let tx = TxGram::from_field(&a);
        (s, TransmitCovariance::rank_one(cfg.p_max, &tx.v), r)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(35, 5), 324_632);
        assert_eq!(binomial(3, 5), 0);
        assert!(binomial(200, 100) > EXHAUSTIVE_GUARD);
    }

    #[test]
    fn single_port_scores_are_path_count() {
        let cfg = SystemConfig {
            m_active: 1,
            ..SystemConfig::default()
        };
        let (s, q, r) = setup(1, &cfg);
        let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
        let ctx = PortScoreContext::new(search.gamma(), search.columns(), r.ports(), 0).unwrap();
        assert!((ctx.inverse_core.clone() - identity(3)).norm() < 1e-15);
        for port in 1..=cfg.m_ports {
            assert!((per_port_score(port, &ctx, &s, &cfg).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gain_scores_are_path_count() {
        let cfg = SystemConfig::default();
        let (s, _, r) = setup(2, &cfg);
        let q = TransmitCovariance::zero(cfg.n_tx);
        let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
        assert_eq!(search.gamma(), 0.0);
        let ctx = PortScoreContext::new(0.0, search.columns(), r.ports(), 2).unwrap();
        let free = (1..=cfg.m_ports).find(|p| !ctx.retained().contains(p)).unwrap();
        assert!((per_port_score(free, &ctx, &s, &cfg).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collision_rejected() {
        let cfg = SystemConfig::default();
        let (s, q, r) = setup(3, &cfg);
        let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
        let ctx = PortScoreContext::new(search.gamma(), search.columns(), r.ports(), 0).unwrap();
        let kept = r.ports()[1];
        assert!(matches!(per_port_score(kept, &ctx, &s, &cfg), Err(Error::PortCollision(p)) if p == kept));
    }

    #[test]
    fn inverse_core_is_an_inverse() {
        let cfg = SystemConfig::default();
        let (s, q, r) = setup(4, &cfg);
        let search = PortSearch::new(&q, 0.5, &s, &cfg).unwrap();
        for m in 0..r.len() {
            let ctx = PortScoreContext::new(search.gamma(), search.columns(), r.ports(), m).unwrap();
            let core = identity(3) + &ctx.b_bar * ctx.b_bar.adjoint() * Complex64::from(ctx.gamma);
            assert!((&ctx.inverse_core * core - identity(3)).norm() < 1e-8);
            assert!(crate::linalg::hermitian_deviation(&ctx.inverse_core) < 1e-10);
        }
    }

    /// `log2(1 + γ·score)` equals the log-det increase from adding the column.
    #[test]
    fn score_matches_determinant_lemma() {
        let cfg = SystemConfig::default();
        for seed in 0..10 {
            let (s, q, r) = setup(seed, &cfg);
            let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
            let ctx = PortScoreContext::new(search.gamma(), search.columns(), r.ports(), 1).unwrap();
            let candidate = (1..=cfg.m_ports).find(|p| !r.contains(*p)).unwrap();
            let score = per_port_score(candidate, &ctx, &s, &cfg).unwrap();

            let g = Complex64::from(search.gamma());
            let base = identity(3) + &ctx.b_bar * ctx.b_bar.adjoint() * g;
            let b = &search.columns()[candidate - 1];
            let grown = &base + b * b.adjoint() * g;
            let delta = log2_det_hpd(&grown) - log2_det_hpd(&base);
            assert!(((1.0 + search.gamma() * score).log2() - delta).abs() < 1e-8);
        }
    }

    #[test]
    fn pass_never_decreases_objective() {
        let cfg = SystemConfig::default();
        for seed in 0..10 {
            let (s, q, r) = setup(seed, &cfg);
            let search = PortSearch::new(&q, 0.8, &s, &cfg).unwrap();
            let next = search.coordinate_pass(&r).unwrap();
            assert_eq!(next.len(), cfg.m_active);
            assert!(search.objective(&next) >= search.objective(&r) - 1e-12);
        }
    }

    #[test]
    fn full_selection_is_fixed() {
        let cfg = SystemConfig {
            m_ports: 5,
            m_active: 5,
            ..SystemConfig::default()
        };
        let (s, q, r) = setup(5, &cfg);
        assert_eq!(coordinate_pass(&r, &q, 1.0, &s, &cfg).unwrap(), r);
        let (best, _) = exhaustive_best(&q, 1.0, &s, &cfg).unwrap();
        assert_eq!(best.ports(), &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn single_port_pass_keeps_incumbent() {
        let cfg = SystemConfig {
            m_active: 1,
            ..SystemConfig::default()
        };
        let (s, q, r) = setup(6, &cfg);
        let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
        assert_eq!(search.coordinate_pass(&r).unwrap(), r);
        let (best, value) = search.exhaustive(1).unwrap();
        assert!((search.objective(&r) - value).abs() < 1e-12);
        assert_eq!(best.ports(), &[1]);
    }

    #[test]
    fn guard_trips() {
        let cfg = SystemConfig {
            m_ports: 60,
            m_active: 10,
            ..SystemConfig::default()
        };
        let (s, q, _) = setup(7, &cfg);
        assert!(matches!(exhaustive_best(&q, 1.0, &s, &cfg), Err(Error::CombinatorialGuard(_))));
    }

    #[test]
    fn ascent_bounded_by_exhaustive() {
        let cfg = SystemConfig {
            n_tx: 4,
            m_ports: 8,
            m_active: 2,
            ..SystemConfig::default()
        };
        for seed in 0..20 {
            let (s, q, r) = setup(seed, &cfg);
            let search = PortSearch::new(&q, 1.0, &s, &cfg).unwrap();
            let out = search.ascend(&r, cfg.eps2).unwrap();
            let (_, best) = search.exhaustive(2).unwrap();
            assert!(out.objective <= best + 1e-12);
            assert!(out.objective >= search.objective(&r));
        }
    }
}
