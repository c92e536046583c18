//! Independent reference computations used by `oracle-check` and the
//! acceptance tests.
//!
//! Nothing here goes through the solver's reductions: eigenvalues come from
//! power iteration, log-determinants from LU, and optima from dense grids,
//! random covariances and full enumeration.

use itertools::Itertools;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemConfig;
use crate::error::Result;
use crate::experiments::{alternate, trial_scenario};
use crate::fractional::{reduce_inner, solve_inner, solve_q_rho};
use crate::linalg::{CMatrix, CVector};
use crate::model::{
    mc_rate, rate_upper_bound, rx_field_column, rx_field_matrix, sample_path_response, tx_field_matrix,
    PortSelection, ScenarioSample, TransmitCovariance,
};
use crate::parallel::{try_map_indexed, Execution};
use crate::ports::PortSearch;
use crate::seeds::{derive, rng_from};
use crate::semantic::{segment_trace_bounds, LoadModel, SegmentIndicator};

/// Dominant eigenpair of a Hermitian PSD matrix by power iteration.
pub fn power_iteration(m: &CMatrix, iterations: usize) -> (f64, CVector) {
    let n = m.nrows();
    let mut x = CVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64));
    x /= Complex64::from(x.norm());
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let y = m * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return (0.0, x);
        }
        lambda = (x.adjoint() * &y)[(0, 0)].re;
        x = y / Complex64::from(norm);
    }
    (lambda, x)
}

/// `log2 |det(m)|` through LU factorization.
pub fn log2_det_lu(m: &CMatrix) -> f64 {
    m.clone().determinant().norm().log2()
}

/// `log2 det(I + γ0 tr(A Q Aᴴ) BᴴB)` evaluated directly.
fn bound_numerator_direct(gamma0: f64, a: &CMatrix, q: &CMatrix, b: &CMatrix) -> f64 {
    let t = (a * q * a.adjoint()).trace().re;
    let m = CMatrix::identity(b.ncols(), b.ncols()) + b.adjoint() * b * Complex64::from(gamma0 * t);
    log2_det_lu(&m)
}

fn random_psd<R: Rng + ?Sized>(n: usize, trace: f64, rng: &mut R) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let w = CMatrix::from_fn(n, rank, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let q = &w * w.adjoint();
    let tr = q.trace().re;
    q * Complex64::from(trace / tr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOracleReport {
    pub instances: usize,
    /// Largest `|solver value − oracle value|`.
    pub max_value_gap: f64,
    /// Largest amount by which a random PSD covariance beat the rank-one
    /// covariance of equal trace.
    pub max_psd_excess: f64,
}

/// Compares the scalar inner solve against a dense power grid plus random
/// PSD covariances on random small instances (`N = 4`).
pub fn inner_solver_oracle(
    instances: usize,
    grid_points: usize,
    psd_draws: usize,
    seed: u64,
    model: &LoadModel,
) -> Result<InnerOracleReport> {
    let mut report = InnerOracleReport {
        instances,
        max_value_gap: 0.0,
        max_psd_excess: f64::NEG_INFINITY,
    };
    for k in 0..instances {
        let mut rng = rng_from(derive(seed, &[k as u64]));
        let snr = rng.random_range(0.0..=15.0);
        let cfg = SystemConfig {
            n_tx: 4,
            ..SystemConfig::default()
        }
        .with_snr_db(snr);
        let scenario = ScenarioSample::sample(&cfg, &mut rng);
        let r = PortSelection::random(&cfg, &mut rng);
        let a = tx_field_matrix(&scenario, &cfg)?;
        let b = rx_field_matrix(&r, &scenario, &cfg)?;

        let feasible: Vec<SegmentIndicator> = model
            .indicators()
            .filter(|&s| !segment_trace_bounds(s, model, cfg.p_max, cfg.p0).intersect(0.0, cfg.p_max).is_empty())
            .collect();
        let s = feasible[rng.random_range(0..feasible.len())];
        let seg = model.segment(s);
        let iv = segment_trace_bounds(s, model, cfg.p_max, cfg.p0).intersect(0.0, cfg.p_max);
        let g = |p: f64| ((cfg.p_max - p) / cfg.p0 - seg.intercept) / seg.slope;

        let (_, u) = power_iteration(&(a.adjoint() * &a), 20_000);
        let rank_one = |p: f64| &u * u.adjoint() * Complex64::from(p);
        let f_max = bound_numerator_direct(cfg.gamma0(), &a, &rank_one(cfg.p_max), &b);
        let tau = rng.random_range(0.0..=2.0 * f_max / model.min_ratio());

        let ip = reduce_inner(&b, &a, &cfg, model, s, tau)?;
        let (_, solver_value) = solve_inner(&ip, model, cfg.p0, cfg.p_max)?;

        let mut oracle = f64::NEG_INFINITY;
        for i in 0..grid_points {
            let p = if grid_points > 1 {
                iv.lo + (iv.hi - iv.lo) * i as f64 / (grid_points - 1) as f64
            } else {
                iv.lo
            };
            let v = bound_numerator_direct(cfg.gamma0(), &a, &rank_one(p), &b) - tau * g(p);
            oracle = oracle.max(v);
        }
        for _ in 0..psd_draws {
            let p = if iv.hi > iv.lo { rng.random_range(iv.lo..=iv.hi) } else { iv.lo };
            let q = random_psd(cfg.n_tx, p, &mut rng);
            let v_psd = bound_numerator_direct(cfg.gamma0(), &a, &q, &b) - tau * g(p);
            let v_r1 = bound_numerator_direct(cfg.gamma0(), &a, &rank_one(p), &b) - tau * g(p);
            report.max_psd_excess = report.max_psd_excess.max(v_psd - v_r1);
            oracle = oracle.max(v_psd);
        }
        report.max_value_gap = report.max_value_gap.max((solver_value - oracle).abs());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortOracleReport {
    pub seeds: usize,
    /// Seeds where coordinate ascent reached the enumerated optimum.
    pub matches: usize,
    /// Seeds where coordinate ascent reported more than the optimum.
    pub exceeded: usize,
}

/// Best selection by enumerating every subset, with LU log-determinants.
pub fn brute_force_ports(
    gamma: f64,
    rho: f64,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
) -> Result<(Vec<usize>, f64)> {
    let cols: Vec<CVector> = (1..=cfg.m_ports)
        .map(|p| rx_field_column(p, scenario, cfg))
        .collect::<Result<_>>()?;
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for combo in (1..=cfg.m_ports).combinations(cfg.m_active) {
        let b = CMatrix::from_columns(&combo.iter().map(|&p| cols[p - 1].clone()).collect::<Vec<_>>());
        let m = CMatrix::identity(combo.len(), combo.len()) + b.adjoint() * &b * Complex64::from(gamma);
        let v = log2_det_lu(&m) / rho;
        if v > best.1 {
            best = (combo, v);
        }
    }
    Ok(best)
}

/// Coordinate ascent from the evenly spaced start versus enumeration, with
/// `(Q, ρ)` taken from the joint solver at that start.
pub fn port_oracle(cfg: &SystemConfig, model: &LoadModel, seeds: usize, seed: u64) -> Result<PortOracleReport> {
    let mut report = PortOracleReport {
        seeds,
        matches: 0,
        exceeded: 0,
    };
    for k in 0..seeds {
        let mut rng = rng_from(derive(seed, &[k as u64]));
        let scenario = ScenarioSample::sample(cfg, &mut rng);
        let start = PortSelection::evenly_spaced(cfg);
        let sol = solve_q_rho(&start, &scenario, cfg, model)?;
        let search = PortSearch::new(&sol.q, sol.rho, &scenario, cfg)?;
        let ascent = search.ascend(&start, cfg.eps2)?;
        let (_, best) = brute_force_ports(search.gamma(), sol.rho, &scenario, cfg)?;
        let tol = 1e-9 * best.abs().max(1.0);
        if ascent.objective > best + tol {
            report.exceeded += 1;
        }
        if (ascent.objective - best).abs() <= tol {
            report.matches += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport {
    pub samples: usize,
    /// Largest relative error of a diagonal entry against `tr(M) α²`.
    pub max_diag_rel_err: f64,
    /// Largest off-diagonal magnitude relative to `tr(M) α²`.
    pub max_offdiag_ratio: f64,
}

/// Monte-Carlo mean of `O M Oᴴ` with `M = A Q Aᴴ` against `tr(M) α² I`.
pub fn expectation_identity(cfg: &SystemConfig, samples: usize, seed: u64) -> Result<ExpectationReport> {
    let mut rng = rng_from(seed);
    let scenario = ScenarioSample::sample(cfg, &mut rng);
    let a = tx_field_matrix(&scenario, cfg)?;
    let q = CMatrix::identity(cfg.n_tx, cfg.n_tx) * Complex64::from(cfg.p_max / cfg.n_tx as f64);
    let m = &a * q * a.adjoint();
    let mut acc = CMatrix::zeros(cfg.v_rx_paths, cfg.v_rx_paths);
    for _ in 0..samples {
        let o = sample_path_response(cfg, &mut rng);
        acc += o.matrix() * &m * o.matrix().adjoint();
    }
    acc /= Complex64::from(samples as f64);
    let target = m.trace().re * cfg.path_gain_var;
    let mut report = ExpectationReport {
        samples,
        max_diag_rel_err: 0.0,
        max_offdiag_ratio: 0.0,
    };
    for i in 0..acc.nrows() {
        for j in 0..acc.ncols() {
            if i == j {
                report.max_diag_rel_err = report.max_diag_rel_err.max((acc[(i, i)].re - target).abs() / target);
            } else {
                report.max_offdiag_ratio = report.max_offdiag_ratio.max(acc[(i, j)].norm() / target);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCase {
    pub mc_mean: f64,
    pub mc_std_error: f64,
    pub upper_bound: f64,
}

impl JensenCase {
    pub fn holds(&self) -> bool {
        self.mc_mean <= self.upper_bound + 3.0 * self.mc_std_error
    }
}

/// Monte-Carlo equivalent rate of the proposed solution against its
/// closed-form bound on `scenarios` seeded scenarios.
pub fn jensen_check(
    cfg: &SystemConfig,
    model: &LoadModel,
    scenarios: usize,
    exec: Execution,
) -> Result<Vec<JensenCase>> {
    try_map_indexed(scenarios, exec, |k| {
        let scenario = trial_scenario(cfg, 0, k);
        let out = alternate(&scenario, cfg, model)?;
        let (r, q, rho) = (&out.record.ports, &out.solution.q, out.solution.rho);
        let q = TransmitCovariance::new(q.matrix().clone(), cfg.p_max)?;
        let est = mc_rate(
            r,
            &q,
            &scenario,
            cfg,
            cfg.mc_samples,
            derive(cfg.rng_seed, &[0x4a45, k as u64]),
            Execution::Sequential,
        )?
        .scaled(1.0 / rho);
        Ok(JensenCase {
            mc_mean: est.mean,
            mc_std_error: est.std_error,
            upper_bound: rate_upper_bound(r, &q, rho, &scenario, cfg)?,
        })
    })
}
