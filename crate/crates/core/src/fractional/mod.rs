//! Joint transmit-covariance and compression-ratio optimization for a fixed
//! port selection.
//!
//! The bound `(1/ρ) log2 det(I + γ0 tr(AQAᴴ) BᴴB)` depends on `Q` only through
//! `tr(AQAᴴ)` and `tr(Q)`. For a transmit power `p = tr(Q)` the first is
//! maximized by `Q = p·v vᴴ` with `v` the top eigenvector of `AᴴA`, so every
//! segment of the load model reduces to a scalar concave-over-affine ratio
//! in `p`, which Dinkelbach's method solves with a golden-section inner step.

pub mod golden;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, top_eigenpair, CMatrix, CVector};
use crate::model::{rx_field_matrix, tx_field_matrix, PortSelection, ScenarioSample, TransmitCovariance};
use crate::semantic::{rho_from_power, segment_trace_bounds, LoadModel, PowerInterval, SegmentIndicator};

/// Iteration cap of the Dinkelbach loop.
pub const DINKELBACH_CAP: usize = 100;

/// Relative argument tolerance of the inner golden-section search.
const INNER_XTOL: f64 = 1e-9;

/// Top eigenpair of `AᴴA`; depends on the scenario only.
#[derive(Debug, Clone, PartialEq)]
pub struct TxGram {
    pub lambda_max: f64,
    pub v: CVector,
}

impl TxGram {
    pub fn from_field(a: &CMatrix) -> Self {
        let (lambda_max, v) = top_eigenpair(&(a.adjoint() * a));
        Self {
            lambda_max: lambda_max.max(0.0),
            v,
        }
    }
}

/// Eigenvalues `μ_i` of `BᴴB`, clamped at zero.
pub fn rx_gram_eigenvalues(b: &CMatrix) -> Vec<f64> {
    hermitian_eigenvalues(&(b.adjoint() * b))
        .into_iter()
        .map(|mu| mu.max(0.0))
        .collect()
}

/// `Σ_i log2(1 + γ0 · p · λ_max · μ_i)`.
pub fn rate_numerator(p: f64, gamma0: f64, lambda_max: f64, b_gram_eigs: &[f64]) -> f64 {
    let scale = gamma0 * p * lambda_max;
    b_gram_eigs.iter().map(|&mu| (scale * mu).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Compression ratio implied by transmit power `p` on segment `s`, without
/// range checks.
pub fn ratio_of_power(p: f64, s: SegmentIndicator, model: &LoadModel, p0: f64, p_max: f64) -> f64 {
    let seg = model.segment(s);
    ((p_max - p) / p0 - seg.intercept) / seg.slope
}

/// Scalar subproblem for one segment at a fixed Dinkelbach parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProblem {
    pub gamma0: f64,
    pub b_gram_eigs: Vec<f64>,
    pub lambda_max: f64,
    pub v: CVector,
    pub segment: SegmentIndicator,
    pub trace_interval: PowerInterval,
    pub tau: f64,
}

impl InnerProblem {
    fn build(
        b_gram_eigs: Vec<f64>,
        tx: &TxGram,
        cfg: &SystemConfig,
        model: &LoadModel,
        s: SegmentIndicator,
        tau: f64,
    ) -> Result<Self> {
        let trace_interval = segment_trace_bounds(s, model, cfg.p_max, cfg.p0).intersect(0.0, cfg.p_max);
        if trace_interval.is_empty() {
            return Err(Error::InfeasibleSegment(s.index()));
        }
        Ok(Self {
            gamma0: cfg.gamma0(),
            b_gram_eigs,
            lambda_max: tx.lambda_max,
            v: tx.v.clone(),
            segment: s,
            trace_interval,
            tau,
        })
    }

    /// `f(p)`.
    pub fn numerator(&self, p: f64) -> f64 {
        rate_numerator(p, self.gamma0, self.lambda_max, &self.b_gram_eigs)
    }

    /// `g(p)`, the compression ratio.
    pub fn denominator(&self, p: f64, model: &LoadModel, p0: f64, p_max: f64) -> f64 {
        ratio_of_power(p, self.segment, model, p0, p_max)
    }

    fn unchecked_objective(&self, p: f64, model: &LoadModel, p0: f64, p_max: f64) -> f64 {
        self.numerator(p) - self.tau * self.denominator(p, model, p0, p_max)
    }
}

/// Collapses the segment-`s` subproblem onto the scalar transmit power.
pub fn reduce_inner(
    b: &CMatrix,
    a: &CMatrix,
    cfg: &SystemConfig,
    model: &LoadModel,
    s: SegmentIndicator,
    tau: f64,
) -> Result<InnerProblem> {
    if a.ncols() != cfg.n_tx {
        return Err(Error::DimensionMismatch(format!("A has {} columns, N = {}", a.ncols(), cfg.n_tx)));
    }
    if b.nrows() != cfg.v_rx_paths || a.nrows() != cfg.v_tx_paths {
        return Err(Error::DimensionMismatch(format!(
            "B is {:?}, A is {:?} for V_r = {}, V_t = {}",
            b.shape(),
            a.shape(),
            cfg.v_rx_paths,
            cfg.v_tx_paths
        )));
    }
    InnerProblem::build(rx_gram_eigenvalues(b), &TxGram::from_field(a), cfg, model, s, tau)
}

/// `f(p) − τ g(p)` on the admissible interval.
pub fn inner_objective(p: f64, ip: &InnerProblem, model: &LoadModel, p0: f64, p_max: f64) -> Result<f64> {
    let slack = 1e-12 * p_max.max(1.0);
    let iv = ip.trace_interval;
    if !(p >= iv.lo - slack && p <= iv.hi + slack) {
        return Err(Error::PowerOutOfInterval { p, lo: iv.lo, hi: iv.hi });
    }
    Ok(ip.unchecked_objective(p, model, p0, p_max))
}

/// Maximizes [`inner_objective`] over the admissible interval.
pub fn solve_inner(ip: &InnerProblem, model: &LoadModel, p0: f64, p_max: f64) -> Result<(f64, f64)> {
    let iv = ip.trace_interval;
    if iv.is_empty() {
        return Err(Error::InfeasibleSegment(ip.segment.index()));
    }
    Ok(golden::maximize(
        |p| ip.unchecked_objective(p, model, p0, p_max),
        iv.lo,
        iv.hi,
        INNER_XTOL * p_max,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachStep {
    pub tau: f64,
    /// `f(p) − τ_prev g(p)` at the step's power; zero for the initial point.
    pub objective_value: f64,
    pub trace_q: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DinkelbachTrace {
    pub iterations: Vec<DinkelbachStep>,
    pub converged: bool,
}

impl DinkelbachTrace {
    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterations.iter().map(|s| s.tau)
    }

    /// Residual `|F|` of the last step.
    pub fn final_residual(&self) -> f64 {
        self.iterations.last().map(|s| s.objective_value.abs()).unwrap_or(0.0)
    }
}

/// Which part of the feasible set a solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Segment(SegmentIndicator),
    /// `ρ = 1` with no compression power spent.
    Uncompressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QRhoSolution {
    pub q: TransmitCovariance,
    pub rho: f64,
    pub branch: Branch,
    /// `tr(Q)` in milliwatts.
    pub transmit_power: f64,
    /// `P_c` in milliwatts.
    pub compression_power: f64,
    /// Equivalent-rate upper bound achieved by `(Q, ρ)`.
    pub upper_bound_rate: f64,
    pub trace: DinkelbachTrace,
}

impl QRhoSolution {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }
}

fn run_dinkelbach(ip: &mut InnerProblem, cfg: &SystemConfig, model: &LoadModel) -> Result<QRhoSolution> {
    let (p0, p_max) = (cfg.p0, cfg.p_max);
    let ratio = |ip: &InnerProblem, p: f64| -> Result<f64> {
        let g = ip.denominator(p, model, p0, p_max);
        if g <= 0.0 {
            return Err(Error::NonPositiveDenominator(g));
        }
        Ok(ip.numerator(p) / g)
    };

    let mut p = ip.trace_interval.midpoint();
    let mut tau = ratio(ip, p)?;
    let mut trace = DinkelbachTrace {
        iterations: vec![DinkelbachStep {
            tau,
            objective_value: 0.0,
            trace_q: p,
        }],
        converged: false,
    };
    for _ in 0..DINKELBACH_CAP {
        ip.tau = tau;
        let (mut p_next, mut value) = solve_inner(ip, model, p0, p_max)?;
        // The incumbent scores exactly f − τg = 0; never step below it.
        let incumbent = ip.unchecked_objective(p, model, p0, p_max);
        if value < incumbent {
            p_next = p;
            value = incumbent;
        }
        let tau_next = ratio(ip, p_next)?;
        trace.iterations.push(DinkelbachStep {
            tau: tau_next,
            objective_value: value,
            trace_q: p_next,
        });
        p = p_next;
        tau = tau_next.max(tau);
        if value.abs() <= cfg.eps1 {
            trace.converged = true;
            break;
        }
    }

    let s = ip.segment;
    let p_c = (p_max - p).max(0.0);
    let rho = rho_from_power(p_c, s, model, p0)?;
    let q = TransmitCovariance::rank_one(p, &ip.v);
    Ok(QRhoSolution {
        upper_bound_rate: ip.numerator(p) / rho,
        q,
        rho,
        branch: Branch::Segment(s),
        transmit_power: p,
        compression_power: p_c,
        trace,
    })
}

/// Dinkelbach iteration restricted to load segment `segment`.
pub fn dinkelbach(
    segment: SegmentIndicator,
    b: &CMatrix,
    a: &CMatrix,
    cfg: &SystemConfig,
    model: &LoadModel,
) -> Result<QRhoSolution> {
    let mut ip = reduce_inner(b, a, cfg, model, segment, 0.0)?;
    run_dinkelbach(&mut ip, cfg, model)
}

/// All power to transmission, no compression.
pub fn uncompressed_solution(b_gram_eigs: &[f64], tx: &TxGram, cfg: &SystemConfig) -> QRhoSolution {
    let p = cfg.p_max;
    QRhoSolution {
        q: TransmitCovariance::rank_one(p, &tx.v),
        rho: 1.0,
        branch: Branch::Uncompressed,
        transmit_power: p,
        compression_power: 0.0,
        upper_bound_rate: rate_numerator(p, cfg.gamma0(), tx.lambda_max, b_gram_eigs),
        trace: DinkelbachTrace {
            iterations: Vec::new(),
            converged: true,
        },
    }
}

/// Best `(Q, ρ)` over every load segment and the uncompressed branch, from
/// precomputed field responses.
pub fn solve_q_rho_fields(b: &CMatrix, tx: &TxGram, cfg: &SystemConfig, model: &LoadModel) -> Result<QRhoSolution> {
    let eigs = rx_gram_eigenvalues(b);
    let mut best: Option<QRhoSolution> = None;
    for s in model.indicators() {
        let mut ip = match InnerProblem::build(eigs.clone(), tx, cfg, model, s, 0.0) {
            Ok(ip) => ip,
            Err(Error::InfeasibleSegment(_)) => continue,
            Err(e) => return Err(e),
        };
        let sol = run_dinkelbach(&mut ip, cfg, model)?;
        if best.as_ref().is_none_or(|b| sol.upper_bound_rate > b.upper_bound_rate) {
            best = Some(sol);
        }
    }
    let flat = uncompressed_solution(&eigs, tx, cfg);
    Ok(match best {
        Some(b) if b.upper_bound_rate >= flat.upper_bound_rate => b,
        _ => flat,
    })
}

/// Best `(Q, ρ)` for port selection `r`.
pub fn solve_q_rho(
    r: &PortSelection,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
    model: &LoadModel,
) -> Result<QRhoSolution> {
    let b = rx_field_matrix(r, scenario, cfg)?;
    let a = tx_field_matrix(scenario, cfg)?;
    solve_q_rho_fields(&b, &TxGram::from_field(&a), cfg, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rate::rate_upper_bound;
    use crate::model::scenario::Path;
    use crate::semantic::{compression_power, LoadSegment};
    use crate::seeds::rng_from;
    use num_complex::Complex64;

    fn random_setup(seed: u64, cfg: &SystemConfig) -> (ScenarioSample, PortSelection, CMatrix, CMatrix) {
        let mut rng = rng_from(seed);
        let s = ScenarioSample::sample(cfg, &mut rng);
        let r = PortSelection::random(cfg, &mut rng);
        let b = rx_field_matrix(&r, &s, cfg).unwrap();
        let a = tx_field_matrix(&s, cfg).unwrap();
        (s, r, b, a)
    }

    fn seg(model: &LoadModel, s: usize) -> SegmentIndicator {
        SegmentIndicator::new(s, model).unwrap()
    }

    #[test]
    fn broadside_gram_is_rank_one_uniform() {
        let cfg = SystemConfig::default();
        let a = CMatrix::from_element(cfg.v_tx_paths, cfg.n_tx, Complex64::new(1.0, 0.0));
        let tx = TxGram::from_field(&a);
        assert!((tx.lambda_max - 60.0).abs() < 1e-10);
        let uniform = 1.0 / (cfg.n_tx as f64).sqrt();
        assert!(tx.v.iter().all(|z| (z.norm() - uniform).abs() < 1e-10));
    }

    #[test]
    fn single_port_gram_eigenvalue() {
        let cfg = SystemConfig {
            m_active: 1,
            ..SystemConfig::default()
        };
        let (_, _, b, _) = random_setup(4, &cfg);
        let eigs = rx_gram_eigenvalues(&b);
        assert_eq!(eigs.len(), 1);
        assert!((eigs[0] - 3.0).abs() < 1e-12);
    }

    /// Top eigenvalue cross-checked against plain power iteration.
    #[test]
    fn lambda_max_matches_power_iteration() {
        let cfg = SystemConfig::default();
        for seed in 0..5 {
            let (_, _, _, a) = random_setup(seed, &cfg);
            let gram = a.adjoint() * &a;
            let mut x = CVector::from_element(cfg.n_tx, Complex64::new(1.0, 0.5));
            let mut lambda = 0.0;
            for _ in 0..5000 {
                let y = &gram * &x;
                lambda = y.norm() / x.norm();
                x = &y / Complex64::from(y.norm());
            }
            let tx = TxGram::from_field(&a);
            assert!((tx.lambda_max - lambda).abs() < 1e-8, "{} vs {lambda}", tx.lambda_max);
        }
    }

    #[test]
    fn objective_at_zero_power_and_zero_tau() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        let (_, _, b, a) = random_setup(2, &cfg);
        // Segment 3 admits p = 0 only when p_max <= c(0.2) = 0.85.
        let small = SystemConfig { p_max: 0.8, ..cfg.clone() };
        let ip = reduce_inner(&b, &a, &small, &model, seg(&model, 3), 0.7).unwrap();
        assert_eq!(ip.trace_interval.lo, 0.0);
        let v = inner_objective(0.0, &ip, &model, 1.0, 0.8).unwrap();
        let expected = -0.7 * ((0.8 / 1.0) - 1.25) / -2.0;
        assert!((v - expected).abs() < 1e-15);

        let ip = reduce_inner(&b, &a, &cfg, &model, seg(&model, 1), 0.0).unwrap();
        let (p_star, _) = solve_inner(&ip, &model, cfg.p0, cfg.p_max).unwrap();
        assert_eq!(p_star, ip.trace_interval.hi);
        assert!(inner_objective(cfg.p_max * 2.0, &ip, &model, cfg.p0, cfg.p_max).is_err());
    }

    #[test]
    fn objective_term_by_term() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        let (_, _, b, a) = random_setup(21, &cfg);
        let ip = reduce_inner(&b, &a, &cfg, &model, seg(&model, 2), 1.3).unwrap();
        let p = ip.trace_interval.midpoint();
        let mut f = 0.0;
        for mu in &ip.b_gram_eigs {
            f += (1.0 + cfg.gamma0() * p * ip.lambda_max * mu).log2();
        }
        let g = ((cfg.p_max - p) / cfg.p0 - 0.85) / -1.0;
        let got = inner_objective(p, &ip, &model, cfg.p0, cfg.p_max).unwrap();
        assert!((got - (f - 1.3 * g)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval_returns_endpoint() {
        let cfg = SystemConfig::default();
        let model = LoadModel::new(vec![LoadSegment::new(-0.5, 0.5, 1.0)]).unwrap();
        let (_, _, b, a) = random_setup(5, &cfg);
        let ip = reduce_inner(&b, &a, &cfg, &model, seg(&model, 1), 2.0).unwrap();
        let (p, _) = solve_inner(&ip, &model, cfg.p0, cfg.p_max).unwrap();
        assert_eq!(p, cfg.p_max);

        let sol = dinkelbach(seg(&model, 1), &b, &a, &cfg, &model).unwrap();
        assert_eq!(sol.rho, 1.0);
        assert_eq!(sol.transmit_power, cfg.p_max);
        let f = rate_numerator(cfg.p_max, cfg.gamma0(), TxGram::from_field(&a).lambda_max, &rx_gram_eigenvalues(&b));
        assert!((sol.upper_bound_rate - f).abs() < 1e-12);
    }

    #[test]
    fn infeasible_segment_reported() {
        let cfg = SystemConfig {
            p_max: 0.3,
            ..SystemConfig::default()
        };
        let model = LoadModel::default();
        let (_, _, b, a) = random_setup(6, &cfg);
        assert!(matches!(
            dinkelbach(seg(&model, 3), &b, &a, &cfg, &model),
            Err(Error::InfeasibleSegment(3))
        ));
    }

    #[test]
    fn dinkelbach_trace_properties() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        for seed in 0..10 {
            let (_, _, b, a) = random_setup(seed, &cfg);
            for s in model.indicators() {
                let sol = dinkelbach(s, &b, &a, &cfg, &model).unwrap();
                assert!(sol.converged());
                assert!(sol.trace.final_residual() <= 1e-5);
                let taus: Vec<f64> = sol.trace.taus().collect();
                assert!(taus.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{taus:?}");
                let spent = sol.q.trace() + compression_power(sol.rho, &model, cfg.p0).unwrap();
                assert!((spent - cfg.p_max).abs() < 1e-6);
            }
        }
    }

    /// `f(p) = log2(1 + p)` against a linear denominator, checked by a dense grid.
    #[test]
    fn contrived_ratio_matches_grid() {
        let cfg = SystemConfig {
            n_tx: 1,
            m_ports: 1,
            m_active: 1,
            v_tx_paths: 1,
            v_rx_paths: 1,
            noise_power: 1.0,
            path_gain_var: 1.0,
            p_max: 4.0,
            ..SystemConfig::default()
        };
        let model = LoadModel::new(vec![LoadSegment::new(-2.0, 2.0, 0.1)]).unwrap();
        let one = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let sol = dinkelbach(seg(&model, 1), &one, &one, &cfg, &model).unwrap();

        let iv = segment_trace_bounds(seg(&model, 1), &model, 4.0, 1.0).intersect(0.0, 4.0);
        let n = 100_000;
        let best = (0..=n)
            .map(|i| iv.lo + (iv.hi - iv.lo) * i as f64 / n as f64)
            .map(|p| (1.0 + p).log2() / (((4.0 - p) - 2.0) / -2.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((sol.upper_bound_rate - best).abs() < 1e-5, "{} vs {best}", sol.upper_bound_rate);
    }

    #[test]
    fn solve_q_rho_prefers_uncompressed_when_nothing_fits() {
        let model = LoadModel::new(vec![LoadSegment::new(-1.0, 1.5, 0.5)]).unwrap();
        let cfg = SystemConfig {
            p_max: 0.4,
            ..SystemConfig::default()
        };
        let (s, r, _, _) = random_setup(7, &cfg);
        let sol = solve_q_rho(&r, &s, &cfg, &model).unwrap();
        assert_eq!(sol.branch, Branch::Uncompressed);
        assert_eq!(sol.rho, 1.0);
        assert!((sol.q.trace() - cfg.p_max).abs() < 1e-12);
    }

    #[test]
    fn solve_q_rho_beats_uncompressed_and_matches_bound() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        for seed in 0..5 {
            let (s, r, b, a) = random_setup(seed, &cfg);
            let sol = solve_q_rho(&r, &s, &cfg, &model).unwrap();
            let flat = uncompressed_solution(&rx_gram_eigenvalues(&b), &TxGram::from_field(&a), &cfg);
            assert!(sol.upper_bound_rate >= flat.upper_bound_rate);
            let re = rate_upper_bound(&r, &sol.q, sol.rho, &s, &cfg).unwrap();
            assert!((re - sol.upper_bound_rate).abs() < 1e-9 * re.max(1.0));
            TransmitCovariance::new(sol.q.matrix().clone(), cfg.p_max).unwrap();
        }
    }

    #[test]
    fn single_segment_model_equals_branch_maximum() {
        let cfg = SystemConfig::default();
        let model = LoadModel::new(vec![LoadSegment::new(-1.0, 1.0, 0.3)]).unwrap();
        let (s, r, b, a) = random_setup(9, &cfg);
        let sol = solve_q_rho(&r, &s, &cfg, &model).unwrap();
        let seg_sol = dinkelbach(seg(&model, 1), &b, &a, &cfg, &model).unwrap();
        let flat = uncompressed_solution(&rx_gram_eigenvalues(&b), &TxGram::from_field(&a), &cfg);
        assert_eq!(sol.upper_bound_rate, seg_sol.upper_bound_rate.max(flat.upper_bound_rate));
    }

    #[test]
    fn zero_gain_channel_still_terminates() {
        let cfg = SystemConfig {
            path_gain_var: 0.0,
            ..SystemConfig::default()
        };
        let model = LoadModel::default();
        let s = ScenarioSample {
            tx_paths: vec![Path::broadside(0.5); 3],
            rx_paths: vec![Path::broadside(0.5); 3],
        };
        let r = PortSelection::evenly_spaced(&cfg);
        let sol = solve_q_rho(&r, &s, &cfg, &model).unwrap();
        assert_eq!(sol.upper_bound_rate, 0.0);
        assert!(sol.converged());
    }
}
