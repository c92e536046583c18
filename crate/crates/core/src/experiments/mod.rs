//! Alternating optimization, baseline schemes and SNR sweeps.

pub mod config_file;
pub mod output;
pub mod plot;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::fractional::{solve_q_rho_fields, QRhoSolution, TxGram};
use crate::linalg::{CMatrix, CVector};
use crate::model::{
    all_port_columns, effective_gain, equivalent_rate_bound, tx_field_matrix, PortSelection, ScenarioSample,
    TransmitCovariance,
};
use crate::parallel::{try_map_indexed, Execution};
use crate::ports::PortSearch;
use crate::seeds::{derive, rng_from, tag};
use crate::semantic::LoadModel;

pub use config_file::ExperimentConfig;

/// Cap on outer alternation rounds.
pub const OUTER_CAP: usize = 30;

/// Default SNR grid in dB.
pub const DEFAULT_SNR_DB: [f64; 6] = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Proposed,
    RandomFasSemantic,
    FasNonSemantic,
    Conventional,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::Proposed,
        SchemeId::RandomFasSemantic,
        SchemeId::FasNonSemantic,
        SchemeId::Conventional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::RandomFasSemantic => "random_fas_semantic",
            SchemeId::FasNonSemantic => "fas_non_semantic",
            SchemeId::Conventional => "conventional",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub trial: usize,
    /// Equivalent-rate bound in bits/s/Hz.
    pub rate: f64,
    pub rho: f64,
    /// `tr(Q)` in milliwatts.
    pub trace_q: f64,
    pub ports: PortSelection,
    pub outer_iterations: usize,
    /// False when any inner loop hit its iteration cap.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub outer_iteration: usize,
    pub objective: f64,
}

/// Per-scenario quantities shared by every scheme.
struct ScenarioFields {
    a: CMatrix,
    tx: TxGram,
    columns: Vec<CVector>,
}

impl ScenarioFields {
    fn new(scenario: &ScenarioSample, cfg: &SystemConfig) -> Result<Self> {
        scenario.validate(cfg)?;
        let a = tx_field_matrix(scenario, cfg)?;
        let tx = TxGram::from_field(&a);
        Ok(Self {
            a,
            tx,
            columns: all_port_columns(scenario, cfg)?,
        })
    }

    fn field_matrix(&self, r: &PortSelection) -> CMatrix {
        let cols: Vec<CVector> = r.ports().iter().map(|&p| self.columns[p - 1].clone()).collect();
        CMatrix::from_columns(&cols)
    }

    fn search(&self, q: &TransmitCovariance, rho: f64, cfg: &SystemConfig) -> PortSearch {
        PortSearch::from_gain(effective_gain(&self.a, q, cfg), rho, self.columns.clone())
    }

    fn bound(&self, r: &PortSelection, q: &TransmitCovariance, rho: f64, cfg: &SystemConfig) -> f64 {
        equivalent_rate_bound(effective_gain(&self.a, q, cfg), &self.field_matrix(r), rho)
    }
}

/// Full outcome of the alternating optimization.
#[derive(Debug, Clone)]
pub struct Alternation {
    pub record: RunRecord,
    pub trace: Vec<ConvergencePoint>,
    pub solution: QRhoSolution,
}

/// Alternates the `(Q, ρ)` solver with coordinate-ascent port selection.
///
/// The trace starts at iteration 0 with the bound after the first `(Q, ρ)`
/// solve on the initial ports; iteration `i ≥ 1` records the bound after the
/// `i`-th port update.
pub fn alternate(scenario: &ScenarioSample, cfg: &SystemConfig, model: &LoadModel) -> Result<Alternation> {
    let fields = ScenarioFields::new(scenario, cfg)?;
    let mut r = PortSelection::evenly_spaced(cfg);
    let mut sol = solve_q_rho_fields(&fields.field_matrix(&r), &fields.tx, cfg, model)?;
    let mut converged = sol.converged();
    let mut eta_prev = sol.upper_bound_rate;
    let mut trace = vec![ConvergencePoint {
        outer_iteration: 0,
        objective: eta_prev,
    }];
    let mut outer_converged = false;
    let mut iterations = 0;

    for i in 1..=OUTER_CAP {
        iterations = i;
        if i > 1 {
            let next = solve_q_rho_fields(&fields.field_matrix(&r), &fields.tx, cfg, model)?;
            converged &= next.converged();
            // The incumbent (Q, ρ) is still feasible; keep it unless beaten.
            if next.upper_bound_rate >= fields.bound(&r, &sol.q, sol.rho, cfg) {
                sol = next;
            }
        }
        let ascent = fields.search(&sol.q, sol.rho, cfg).ascend(&r, cfg.eps2)?;
        converged &= ascent.converged;
        r = ascent.selection;
        let eta = ascent.objective;
        trace.push(ConvergencePoint {
            outer_iteration: i,
            objective: eta,
        });
        let done = (eta - eta_prev).abs() <= cfg.eps2;
        eta_prev = eta;
        if done {
            outer_converged = true;
            break;
        }
    }

    let record = RunRecord {
        scheme: SchemeId::Proposed,
        snr_db: cfg.snr_db(),
        trial: 0,
        rate: eta_prev,
        rho: sol.rho,
        trace_q: sol.transmit_power,
        ports: r,
        outer_iterations: iterations,
        converged: converged && outer_converged,
    };
    Ok(Alternation {
        record,
        trace,
        solution: sol,
    })
}

/// The proposed scheme: returns its record and convergence trace.
pub fn alternate_optimize(
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
    model: &LoadModel,
) -> Result<(RunRecord, Vec<ConvergencePoint>)> {
    let out = alternate(scenario, cfg, model)?;
    Ok((out.record, out.trace))
}

fn random_fas_semantic<R: Rng + ?Sized>(
    fields: &ScenarioFields,
    cfg: &SystemConfig,
    model: &LoadModel,
    rng: &mut R,
) -> Result<RunRecord> {
    let r = PortSelection::random(cfg, rng);
    let sol = solve_q_rho_fields(&fields.field_matrix(&r), &fields.tx, cfg, model)?;
    Ok(RunRecord {
        scheme: SchemeId::RandomFasSemantic,
        snr_db: cfg.snr_db(),
        trial: 0,
        rate: sol.upper_bound_rate,
        rho: sol.rho,
        trace_q: sol.transmit_power,
        ports: r,
        outer_iterations: 1,
        converged: sol.converged(),
    })
}

/// No compression: full power on the dominant transmit direction, ports by
/// coordinate ascent. The covariance step does not depend on the ports, so
/// a single alternation round is already a fixed point.
fn fas_non_semantic(fields: &ScenarioFields, cfg: &SystemConfig) -> Result<RunRecord> {
    let q = TransmitCovariance::rank_one(cfg.p_max, &fields.tx.v);
    let ascent = fields
        .search(&q, 1.0, cfg)
        .ascend(&PortSelection::evenly_spaced(cfg), cfg.eps2)?;
    Ok(RunRecord {
        scheme: SchemeId::FasNonSemantic,
        snr_db: cfg.snr_db(),
        trial: 0,
        rate: ascent.objective,
        rho: 1.0,
        trace_q: cfg.p_max,
        ports: ascent.selection,
        outer_iterations: 1,
        converged: ascent.converged,
    })
}

/// Two fixed receive elements at the ends of the fluid-antenna aperture
/// (the positions of ports 1 and M), no compression, full power.
fn conventional(fields: &ScenarioFields, cfg: &SystemConfig) -> Result<RunRecord> {
    if cfg.m_ports < 2 {
        return Err(Error::Config(
            "conventional baseline needs two distinct receive positions (m_ports >= 2)".into(),
        ));
    }
    let ports = PortSelection::new(vec![1, cfg.m_ports], cfg.m_ports)?;
    let q = TransmitCovariance::rank_one(cfg.p_max, &fields.tx.v);
    Ok(RunRecord {
        scheme: SchemeId::Conventional,
        snr_db: cfg.snr_db(),
        trial: 0,
        rate: fields.bound(&ports, &q, 1.0, cfg),
        rho: 1.0,
        trace_q: cfg.p_max,
        ports,
        outer_iterations: 1,
        converged: true,
    })
}

/// Runs one scheme on one scenario. `rng` is only consumed by the random
/// port baseline.
pub fn run_baseline<R: Rng + ?Sized>(
    scheme: SchemeId,
    scenario: &ScenarioSample,
    cfg: &SystemConfig,
    model: &LoadModel,
    rng: &mut R,
) -> Result<RunRecord> {
    let fields = ScenarioFields::new(scenario, cfg)?;
    match scheme {
        SchemeId::Proposed => alternate(scenario, cfg, model).map(|a| a.record),
        SchemeId::RandomFasSemantic => random_fas_semantic(&fields, cfg, model, rng),
        SchemeId::FasNonSemantic => fas_non_semantic(&fields, cfg),
        SchemeId::Conventional => conventional(&fields, cfg),
    }
}

/// Seed of trial `trial` at SNR index `snr_index`.
pub fn trial_seed(master: u64, snr_index: usize, trial: usize) -> u64 {
    derive(master, &[snr_index as u64, trial as u64])
}

/// Scenario drawn for one `(SNR index, trial)` cell.
pub fn trial_scenario(cfg: &SystemConfig, snr_index: usize, trial: usize) -> ScenarioSample {
    let seed = trial_seed(cfg.rng_seed, snr_index, trial);
    ScenarioSample::sample(cfg, &mut rng_from(derive(seed, &[tag::SCENARIO])))
}

/// Runs `schemes` on one `(SNR index, trial)` cell, all on the same scenario.
pub fn run_trial(
    schemes: &[SchemeId],
    snr_index: usize,
    snr_db: f64,
    trial: usize,
    cfg: &SystemConfig,
    model: &LoadModel,
) -> Result<(Vec<RunRecord>, Option<Vec<ConvergencePoint>>)> {
    let cfg = cfg.with_snr_db(snr_db);
    let scenario = trial_scenario(&cfg, snr_index, trial);
    let seed = trial_seed(cfg.rng_seed, snr_index, trial);
    let mut rng = rng_from(derive(seed, &[tag::RANDOM_PORTS]));
    let mut records = Vec::with_capacity(schemes.len());
    let mut trace = None;
    for &scheme in schemes {
        let mut rec = if scheme == SchemeId::Proposed {
            let out = alternate(&scenario, &cfg, model)?;
            trace = Some(out.trace);
            out.record
        } else {
            run_baseline(scheme, &scenario, &cfg, model, &mut rng)?
        };
        rec.snr_db = snr_db;
        rec.trial = trial;
        records.push(rec);
    }
    Ok((records, trace))
}

/// Convergence trace of the proposed scheme for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub snr_db: f64,
    pub trial: usize,
    pub points: Vec<ConvergencePoint>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    /// Ordered by SNR, then trial, then scheme as requested.
    pub records: Vec<RunRecord>,
    pub traces: Vec<TrialTrace>,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

/// Runs every scheme on `n_trials` scenarios at each SNR.
pub fn sweep_snr(
    snr_list: &[f64],
    n_trials: usize,
    schemes: &[SchemeId],
    cfg: &SystemConfig,
    model: &LoadModel,
    exec: Execution,
) -> Result<SweepResult> {
    if snr_list.is_empty() {
        return Err(Error::Config("snr_db_list must not be empty".into()));
    }
    if n_trials < 1 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    let cells = try_map_indexed(snr_list.len() * n_trials, exec, |cell| {
        let (snr_index, trial) = (cell / n_trials, cell % n_trials);
        run_trial(schemes, snr_index, snr_list[snr_index], trial, cfg, model)
    })?;
    let mut out = SweepResult::default();
    for (cell, (records, trace)) in cells.into_iter().enumerate() {
        let (snr_index, trial) = (cell / n_trials, cell % n_trials);
        out.records.extend(records);
        if let Some(points) = trace {
            out.traces.push(TrialTrace {
                snr_db: snr_list[snr_index],
                trial,
                points,
            });
        }
    }
    Ok(out)
}

/// Proposed-scheme convergence traces only.
pub fn convergence_runs(
    snr_list: &[f64],
    n_trials: usize,
    cfg: &SystemConfig,
    model: &LoadModel,
    exec: Execution,
) -> Result<SweepResult> {
    sweep_snr(snr_list, n_trials, &[SchemeId::Proposed], cfg, model, exec)
}

/// Mean and sample standard deviation of one `(scheme, SNR)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub mean_rate: f64,
    pub std_rate: f64,
    pub n_trials: usize,
}

/// Aggregates records per `(scheme, SNR)`; schemes in first-seen order, SNR
/// values in first-seen order within each scheme.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(SchemeId, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(s, snr)| s == r.scheme && snr == r.snr_db) {
            keys.push((r.scheme, r.snr_db));
        }
    }
    keys.sort_by_key(|&(s, _)| records.iter().position(|r| r.scheme == s));
    keys.into_iter()
        .map(|(scheme, snr_db)| {
            let rates: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == scheme && r.snr_db == snr_db)
                .map(|r| r.rate)
                .collect();
            let n = rates.len();
            let mean = rates.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (rates.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                scheme,
                snr_db,
                mean_rate: mean,
                std_rate: std,
                n_trials: n,
            }
        })
        .collect()
}

/// Trial-averaged convergence curve per SNR. Traces that stopped early are
/// held at their final value.
pub fn mean_convergence(traces: &[TrialTrace]) -> Vec<(f64, Vec<ConvergencePoint>)> {
    let mut snrs: Vec<f64> = Vec::new();
    for t in traces {
        if !snrs.contains(&t.snr_db) {
            snrs.push(t.snr_db);
        }
    }
    snrs.into_iter()
        .map(|snr| {
            let group: Vec<&TrialTrace> = traces.iter().filter(|t| t.snr_db == snr).collect();
            let len = group.iter().map(|t| t.points.len()).max().unwrap_or(0);
            let curve = (0..len)
                .map(|i| {
                    let sum: f64 = group
                        .iter()
                        .map(|t| t.points.get(i).or(t.points.last()).map_or(0.0, |p| p.objective))
                        .sum();
                    ConvergencePoint {
                        outer_iteration: i,
                        objective: sum / group.len() as f64,
                    }
                })
                .collect();
            (snr, curve)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{solve_q_rho, TxGram};
    use crate::model::rate::rate_upper_bound;
    use crate::model::scenario::Path;

    fn small_cfg() -> SystemConfig {
        SystemConfig {
            n_tx: 4,
            m_ports: 6,
            m_active: 2,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn scheme_names_roundtrip() {
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>().unwrap(), id);
        }
        assert!("bogus".parse::<SchemeId>().is_err());
    }

    #[test]
    fn all_ports_forced_reduces_to_q_rho_solve() {
        let cfg = SystemConfig {
            m_ports: 5,
            m_active: 5,
            ..SystemConfig::default()
        };
        let model = LoadModel::default();
        let s = trial_scenario(&cfg, 0, 3);
        let (rec, trace) = alternate_optimize(&s, &cfg, &model).unwrap();
        let r = PortSelection::new(vec![1, 2, 3, 4, 5], 5).unwrap();
        let direct = solve_q_rho(&r, &s, &cfg, &model).unwrap();
        assert_eq!(rec.ports, r);
        assert!((rec.rate - direct.upper_bound_rate).abs() < 1e-9);
        assert_eq!(rec.outer_iterations, 1);
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn rate_rederives_from_record() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        for trial in 0..5 {
            let s = trial_scenario(&cfg, 0, trial);
            let out = alternate(&s, &cfg, &model).unwrap();
            let a = tx_field_matrix(&s, &cfg).unwrap();
            let q = TransmitCovariance::rank_one(out.record.trace_q, &TxGram::from_field(&a).v);
            let re = rate_upper_bound(&out.record.ports, &q, out.record.rho, &s, &cfg).unwrap();
            assert!((re - out.record.rate).abs() < 1e-6);
            assert!(out.trace.windows(2).all(|w| w[1].objective >= w[0].objective - 1e-9));
        }
    }

    #[test]
    fn conventional_broadside_closed_form() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        let s = ScenarioSample {
            tx_paths: vec![Path::broadside(0.5); 3],
            rx_paths: vec![Path::broadside(0.5); 3],
        };
        let rec = run_baseline(SchemeId::Conventional, &s, &cfg, &model, &mut rng_from(0)).unwrap();
        // BᴴB = [[3,3],[3,3]] has eigenvalues {6, 0}; λ_max(AᴴA) = V_t·N = 60.
        let gamma = cfg.gamma0() * cfg.p_max * 60.0;
        let expected = (1.0 + 6.0 * gamma).log2();
        assert!((rec.rate - expected).abs() < 1e-9, "{} vs {expected}", rec.rate);
        assert_eq!(rec.ports.ports(), &[1, 35]);
        assert_eq!(rec.rho, 1.0);
    }

    #[test]
    fn conventional_needs_two_ports() {
        let cfg = SystemConfig {
            m_ports: 1,
            m_active: 1,
            ..SystemConfig::default()
        };
        let s = trial_scenario(&cfg, 0, 0);
        let err = run_baseline(SchemeId::Conventional, &s, &cfg, &LoadModel::default(), &mut rng_from(0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_semantic_never_beats_proposed() {
        let cfg = SystemConfig::default();
        let model = LoadModel::default();
        for trial in 0..5 {
            let (recs, _) = run_trial(&SchemeId::ALL, 0, 3.0, trial, &cfg, &model).unwrap();
            assert!(recs[0].rate >= recs[2].rate);
        }
    }

    #[test]
    fn forced_coincidence_with_random_ports() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        let s = trial_scenario(&cfg, 0, 1);
        let proposed = alternate(&s, &cfg, &model).unwrap().record;
        let seed = (0..10_000u64)
            .find(|&seed| PortSelection::random(&cfg, &mut rng_from(seed)) == proposed.ports)
            .expect("15 possible selections");
        let random = run_baseline(SchemeId::RandomFasSemantic, &s, &cfg, &model, &mut rng_from(seed)).unwrap();
        assert_eq!(random.ports, proposed.ports);
        assert!((random.rate - proposed.rate).abs() < 1e-4);
    }

    #[test]
    fn sweep_single_cell_matches_direct_calls() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        let res = sweep_snr(&[6.0], 1, &SchemeId::ALL, &cfg, &model, Execution::Sequential).unwrap();
        assert_eq!(res.records.len(), 4);
        let snr_cfg = cfg.with_snr_db(6.0);
        let s = trial_scenario(&snr_cfg, 0, 0);
        let (direct, trace) = alternate_optimize(&s, &snr_cfg, &model).unwrap();
        assert_eq!(res.records[0].rate, direct.rate);
        assert_eq!(res.traces[0].points, trace);
        let mut rng = rng_from(derive(trial_seed(cfg.rng_seed, 0, 0), &[tag::RANDOM_PORTS]));
        for (i, &scheme) in SchemeId::ALL.iter().enumerate().skip(1) {
            let rec = run_baseline(scheme, &s, &snr_cfg, &model, &mut rng).unwrap();
            assert_eq!(res.records[i].rate, rec.rate, "{scheme}");
        }
        let summary = summarize(&res.records);
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|r| r.n_trials == 1 && r.std_rate == 0.0));
    }

    #[test]
    fn sweep_is_execution_independent() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        let a = sweep_snr(&[0.0, 9.0], 3, &SchemeId::ALL, &cfg, &model, Execution::Sequential).unwrap();
        let b = sweep_snr(&[0.0, 9.0], 3, &SchemeId::ALL, &cfg, &model, Execution::Parallel).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.traces, b.traces);
    }

    #[test]
    fn adding_snr_points_keeps_existing_trials() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        let a = sweep_snr(&[0.0], 2, &SchemeId::ALL, &cfg, &model, Execution::Sequential).unwrap();
        let b = sweep_snr(&[0.0, 3.0], 2, &SchemeId::ALL, &cfg, &model, Execution::Sequential).unwrap();
        assert_eq!(a.records[..], b.records[..a.records.len()]);
    }

    #[test]
    fn mean_convergence_pads_short_traces() {
        let p = |i, v| ConvergencePoint {
            outer_iteration: i,
            objective: v,
        };
        let traces = vec![
            TrialTrace {
                snr_db: 0.0,
                trial: 0,
                points: vec![p(0, 1.0), p(1, 2.0)],
            },
            TrialTrace {
                snr_db: 0.0,
                trial: 1,
                points: vec![p(0, 3.0), p(1, 3.0), p(2, 5.0)],
            },
        ];
        let curves = mean_convergence(&traces);
        assert_eq!(curves.len(), 1);
        let objs: Vec<f64> = curves[0].1.iter().map(|c| c.objective).collect();
        assert_eq!(objs, vec![2.0, 2.5, 3.5]);
    }

    #[test]
    fn empty_inputs_rejected() {
        let cfg = small_cfg();
        let model = LoadModel::default();
        assert!(sweep_snr(&[], 1, &SchemeId::ALL, &cfg, &model, Execution::Sequential).is_err());
        assert!(sweep_snr(&[0.0], 0, &SchemeId::ALL, &cfg, &model, Execution::Sequential).is_err());
    }
}
