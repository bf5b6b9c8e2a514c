//! End-to-end runs: build the initial state, evolve it with every selected
//! engine, and compare.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit_file::{parse_circuit, read_matrix};
use super::config::{EpsilonSource, ExperimentConfig, FrameChoice, InitialState};
use crate::bell::{
    leggett_garg, scan_max_chsh, BellReport, CorrelatorSource, TemporalSetting,
};
use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::lrhv::{
    init_ensemble, run_quasicontinuous, Ensemble, Estimate, Recording, TemporalProbe, Trajectory,
    UpdateMode, UpdateSchedule,
};
use crate::measurement::MeasurementSpec;
use crate::nmr::{epsilon_pseudopure, eta, thresholds, NmrParams, Regime, Thresholds};
use crate::oracle::{
    apply_unitary, correlation_trace, pseudopure_state, Circuit, DensityOperator,
    MAX_ORACLE_QUBITS,
};
use crate::pauli::bloch_operator;
use crate::quasi::{
    apply_gate, correlation_quasi, quasi_from_density, single_qubit_state, QuasiState,
    TransitionMatrix,
};

/// Hidden-variable estimates further than this many standard errors from
/// the reference fail the run.
pub const Z_LIMIT: f64 = 5.0;
/// Largest accepted difference between the exact engines.
pub const EXACT_AGREEMENT: f64 = 1e-8;

/// One spec at one time point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Number of gates applied so far.
    pub time_index: usize,
    /// Schedule time at the end of the last applied gate.
    pub time: f64,
    pub spec: String,
    pub oracle: Option<f64>,
    pub quasi: Option<f64>,
    pub lrhv_mean: Option<f64>,
    pub lrhv_std_error: Option<f64>,
    /// `|lrhv − reference| / std_error`, the reference being the oracle
    /// when present and the quasidistribution value otherwise.
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub num_qubits: usize,
    pub frame: String,
    pub initial: InitialState,
    pub alpha: f64,
    /// `αN/2^N`, reported whatever mixing parameter the run used.
    pub physical_epsilon: f64,
    pub physical_regime: Regime,
    pub thresholds: Thresholds,
    pub circuit: Vec<String>,
    pub engines: Vec<String>,
    pub molecules: Option<usize>,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_z: Option<f64>,
    pub max_exact_discrepancy: Option<f64>,
    pub bell: Vec<BellReport>,
    pub passed: bool,
}

impl ComparisonReport {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// One CSV row per spec and time point; absent engines leave their
    /// columns empty.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Fixed-width table for terminals.
    pub fn write_table(&self, mut out: impl Write) -> Result<()> {
        let t = &self.thresholds;
        writeln!(
            out,
            "N = {}  frame = {}  epsilon = {:.6e}  eta = {:.6e}  eta' = {:.6e}  regime = {}",
            self.num_qubits, self.frame, t.epsilon, t.eta, t.eta_prime, t.regime
        )?;
        writeln!(
            out,
            "physical epsilon (alpha = {:e}) = {:.6e}  regime = {}",
            self.alpha, self.physical_epsilon, self.physical_regime
        )?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.6}"));
        writeln!(
            out,
            "{:>4} {:>8} {:<14} {:>10} {:>10} {:>10} {:>9} {:>7}",
            "t", "time", "spec", "oracle", "quasi", "lrhv", "stderr", "|z|"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{:>4} {:>8.3} {:<14} {:>10} {:>10} {:>10} {:>9} {:>7}",
                r.time_index,
                r.time,
                r.spec,
                fmt(r.oracle),
                fmt(r.quasi),
                fmt(r.lrhv_mean),
                r.lrhv_std_error.map_or_else(|| "-".to_owned(), |x| format!("{x:.2e}")),
                r.z_score.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}")),
            )?;
        }
        if let Some(z) = self.max_abs_z {
            writeln!(out, "max |z| = {z:.3}")?;
        }
        if let Some(d) = self.max_exact_discrepancy {
            writeln!(out, "max |oracle - quasi| = {d:.3e}")?;
        }
        for b in &self.bell {
            writeln!(
                out,
                "{}: {:.6} +- {:.2e} (bound {}) {}",
                b.setting,
                b.value,
                b.std_error,
                b.bound,
                if b.violated { "VIOLATED" } else { "ok" }
            )?;
        }
        writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" })?;
        Ok(())
    }
}

pub fn load_frame(choice: &FrameChoice) -> Result<Frame> {
    match choice {
        FrameChoice::Tetrahedron => Ok(Frame::tetrahedron()),
        FrameChoice::Cardinal6 => Ok(Frame::cardinal6()),
        FrameChoice::File(p) => Frame::from_file(p),
    }
}

pub fn resolve_epsilon(cfg: &ExperimentConfig) -> Result<f64> {
    Ok(match cfg.epsilon {
        EpsilonSource::Value(e) => e,
        EpsilonSource::Eta => eta(cfg.num_qubits),
        EpsilonSource::FromAlpha => epsilon_pseudopure(&NmrParams::new(cfg.alpha, cfg.num_qubits)?),
    })
}

fn projector(bit: usize) -> Matrix2<Complex64> {
    let z = if bit == 0 { 1.0 } else { -1.0 };
    bloch_operator(0.5, &Vector3::new(0.0, 0.0, 0.5 * z))
}

fn ket_bra(row: usize, col: usize) -> Matrix2<Complex64> {
    let mut m = Matrix2::zeros();
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}

fn singlet_amplitudes() -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    [z, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), z]
}

/// Quasidistribution of the pure target state `ρ₁`, built factor by factor
/// so that no `2^N × 2^N` matrix is formed for the named states.
pub fn target_quasi(cfg: &ExperimentConfig, frame: Arc<Frame>) -> Result<QuasiState> {
    let n = cfg.num_qubits;
    match &cfg.initial {
        InitialState::Zero => {
            let one = single_qubit_state(frame, Vector3::z())?;
            QuasiState::tensor_product(&vec![one; n])
        }
        InitialState::Ghz => {
            let half = Complex64::new(0.5, 0.0);
            let terms: Vec<_> = [(0, 0), (1, 1), (0, 1), (1, 0)]
                .iter()
                .map(|&(r, c)| {
                    let f = if r == c { projector(r) } else { ket_bra(r, c) };
                    (half, vec![f; n])
                })
                .collect();
            QuasiState::from_product_terms(frame, n, &terms)
        }
        InitialState::SingletPairs => {
            let pair = quasi_from_density(&DensityOperator::pure(&singlet_amplitudes())?, frame.clone())?;
            let mut parts = vec![pair; n / 2];
            if n % 2 == 1 {
                parts.push(single_qubit_state(frame, Vector3::z())?);
            }
            QuasiState::tensor_product(&parts)
        }
        InitialState::Raw(_) => quasi_from_density(&target_density(cfg)?, frame),
    }
}

/// The pure target state `ρ₁` as a density operator.
pub fn target_density(cfg: &ExperimentConfig) -> Result<DensityOperator> {
    let n = cfg.num_qubits;
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::Config(format!(
            "density operators limited to {MAX_ORACLE_QUBITS} qubits"
        )));
    }
    let dim = 1usize << n;
    let zero = Complex64::new(0.0, 0.0);
    match &cfg.initial {
        InitialState::Zero => Ok(DensityOperator::basis(n, 0)),
        InitialState::Ghz => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut amps = vec![zero; dim];
            amps[0] = h;
            amps[dim - 1] = h;
            DensityOperator::pure(&amps)
        }
        InitialState::SingletPairs => {
            let singlet = DensityOperator::pure(&singlet_amplitudes())?;
            let mut rho: Option<DensityOperator> = None;
            for _ in 0..n / 2 {
                rho = Some(match rho {
                    Some(r) => r.tensor(&singlet),
                    None => singlet.clone(),
                });
            }
            if n % 2 == 1 {
                let z = DensityOperator::basis(1, 0);
                rho = Some(match rho {
                    Some(r) => r.tensor(&z),
                    None => z,
                });
            }
            Ok(rho.expect("at least one qubit"))
        }
        InitialState::Raw(path) => {
            let m = read_matrix(path)?;
            if m.nrows() != dim {
                return Err(Error::Shape(format!(
                    "initial matrix is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            DensityOperator::new(m)
        }
    }
}

fn domain_error(err: Error, t: &Thresholds) -> Error {
    match err {
        Error::NegativeQuasiWeight { .. } => Error::OutsideModelDomain {
            epsilon: t.epsilon,
            eta: t.eta,
            regime: t.regime,
            source: Box::new(err),
        },
        other => other,
    }
}

fn build_schedule(cfg: &ExperimentConfig, num_gates: usize) -> UpdateSchedule {
    let s = &cfg.schedule;
    match s.mode {
        UpdateMode::Discrete => {
            let mut sched = UpdateSchedule::discrete(num_gates);
            for (i, p) in sched.pulse_intervals.iter_mut().enumerate() {
                p.start = i as f64 * s.pulse_duration;
                p.end = (i + 1) as f64 * s.pulse_duration;
            }
            sched.total_time = num_gates as f64 * s.pulse_duration;
            sched
        }
        UpdateMode::Quasicontinuous => {
            UpdateSchedule::back_to_back(num_gates, s.pulse_duration, s.gamma, s.dt)
        }
    }
}

struct LrhvRun {
    trajectory: Trajectory,
    final_ensemble: Ensemble,
    /// Snapshot index for each time point.
    snapshot_at: Vec<usize>,
}

fn run_lrhv_engine(
    cfg: &ExperimentConfig,
    w0: &QuasiState,
    circuit: &Circuit,
    specs: &[MeasurementSpec],
    t: &Thresholds,
) -> Result<LrhvRun> {
    let mut e = init_ensemble(w0, cfg.molecules, cfg.seed).map_err(|err| domain_error(err, t))?;
    let schedule = build_schedule(cfg, circuit.len());
    let recording = Recording {
        specs: specs.to_vec(),
        probes: cfg
            .bell
            .leggett_garg
            .iter()
            .map(|lg| TemporalProbe {
                qubit: lg.qubit,
                axis: lg.axis,
            })
            .collect(),
        keep_ensembles: false,
    };
    let trajectory = run_quasicontinuous(&mut e, &schedule, circuit, &recording)
        .map_err(|err| domain_error(err, t))?;
    let mut snapshot_at = vec![0];
    snapshot_at.extend(
        trajectory
            .snapshots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.interval_end.is_some())
            .map(|(i, _)| i),
    );
    Ok(LrhvRun {
        trajectory,
        final_ensemble: e,
        snapshot_at,
    })
}

/// Runs every selected engine on the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let n = cfg.num_qubits;
    let frame = Arc::new(load_frame(&cfg.frame)?);
    let epsilon = resolve_epsilon(cfg)?;
    let t = thresholds(epsilon, n)?;
    let physical_epsilon = epsilon_pseudopure(&NmrParams::new(cfg.alpha, n)?);
    let physical = thresholds(physical_epsilon, n)?;
    let circuit = match &cfg.circuit {
        Some(p) => parse_circuit(p, n)?,
        None => Circuit::new(n),
    };
    let specs = cfg.spec_list();
    let times: Vec<f64> = (0..=circuit.len())
        .map(|i| i as f64 * cfg.schedule.pulse_duration)
        .collect();

    let run_oracle = cfg.engines.oracle() && n <= MAX_ORACLE_QUBITS;
    let run_quasi = cfg.engines.quasi();
    let run_lrhv = cfg.engines.lrhv();

    let mut oracle_values: Vec<Vec<f64>> = Vec::new();
    let mut final_rho = None;
    if run_oracle {
        let mut rho = pseudopure_state(&target_density(cfg)?, epsilon)?;
        for i in 0..=circuit.len() {
            if i > 0 {
                let op = &circuit.ops()[i - 1];
                apply_unitary(&mut rho, &op.gate.matrix(), &op.targets)?;
            }
            oracle_values.push(
                specs
                    .iter()
                    .map(|s| correlation_trace(&rho, s))
                    .collect::<Result<_>>()?,
            );
        }
        final_rho = Some(rho);
    }

    let mut quasi_values: Vec<Vec<f64>> = Vec::new();
    let mut w0 = None;
    let mut final_w = None;
    if run_quasi || run_lrhv {
        let w = target_quasi(cfg, frame.clone())?.pseudopure(epsilon)?;
        w0 = Some(w.clone());
        if run_quasi {
            let mut w = w;
            for i in 0..=circuit.len() {
                if i > 0 {
                    let op = &circuit.ops()[i - 1];
                    let tm = TransitionMatrix::for_gate(&op.gate, frame.clone(), &op.targets)?;
                    w = apply_gate(&w, &tm)?;
                }
                quasi_values.push(
                    specs
                        .iter()
                        .map(|s| correlation_quasi(&w, s))
                        .collect::<Result<_>>()?,
                );
            }
            final_w = Some(w);
        }
    }

    let lrhv = match (&w0, run_lrhv) {
        (Some(w0), true) => Some(run_lrhv_engine(cfg, w0, &circuit, &specs, &t)?),
        _ => None,
    };

    let mut rows = Vec::with_capacity(times.len() * specs.len());
    let mut max_abs_z: Option<f64> = None;
    let mut max_exact: Option<f64> = None;
    for (ti, &time) in times.iter().enumerate() {
        for (si, spec) in specs.iter().enumerate() {
            let oracle = oracle_values.get(ti).map(|v| v[si]);
            let quasi = quasi_values.get(ti).map(|v| v[si]);
            let est: Option<Estimate> = lrhv
                .as_ref()
                .map(|run| run.trajectory.snapshots[run.snapshot_at[ti]].correlators[si]);
            let reference = oracle.or(quasi);
            let z_score = match (est, reference) {
                (Some(e), Some(r)) => Some(e.z_score(r)),
                _ => None,
            };
            if let Some(z) = z_score {
                max_abs_z = Some(max_abs_z.map_or(z, |m| m.max(z)));
            }
            if let (Some(o), Some(q)) = (oracle, quasi) {
                let d = (o - q).abs();
                max_exact = Some(max_exact.map_or(d, |m| m.max(d)));
            }
            rows.push(ComparisonRow {
                time_index: ti,
                time,
                spec: spec.to_string(),
                oracle,
                quasi,
                lrhv_mean: est.map(|e| e.mean),
                lrhv_std_error: est.map(|e| e.std_error),
                z_score,
            });
        }
    }

    let mut bell = Vec::new();
    if cfg.bell.chsh {
        let source = match (&lrhv, &final_w, &final_rho) {
            (Some(run), _, _) => CorrelatorSource::Lrhv(&run.final_ensemble),
            (None, Some(w), _) => CorrelatorSource::Quasi(w),
            (None, None, Some(rho)) => CorrelatorSource::Oracle(rho),
            _ => return Err(Error::Config("no engine available for the CHSH scan".into())),
        };
        let scan = scan_max_chsh(source, cfg.bell.pair, cfg.bell.resolution, cfg.bell.domain)?;
        bell.push(BellReport::chsh(&scan));
    }
    if let (Some(lg), Some(run)) = (&cfg.bell.leggett_garg, &lrhv) {
        let setting = TemporalSetting::new(lg.times, lg.qubit, lg.axis)?;
        let k3 = leggett_garg(&run.trajectory, &setting)?;
        bell.push(BellReport::leggett_garg(&setting, &k3));
    }

    let passed = max_abs_z.is_none_or(|z| z <= Z_LIMIT)
        && max_exact.is_none_or(|d| d <= EXACT_AGREEMENT)
        && bell.iter().all(|b| !b.violated);
    let mut engines = Vec::new();
    if run_oracle {
        engines.push("oracle".to_owned());
    }
    if run_quasi {
        engines.push("quasi".to_owned());
    }
    if run_lrhv {
        engines.push("lrhv".to_owned());
    }

    Ok(ComparisonReport {
        num_qubits: n,
        frame: frame.label().to_owned(),
        initial: cfg.initial.clone(),
        alpha: cfg.alpha,
        physical_epsilon,
        physical_regime: physical.regime,
        thresholds: t,
        circuit: circuit.ops().iter().map(|op| op.to_string()).collect(),
        engines,
        molecules: run_lrhv.then_some(cfg.molecules),
        seed: cfg.seed,
        rows,
        max_abs_z,
        max_exact_discrepancy: max_exact,
        bell,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::EngineSelection;
    use crate::quasi::density_from_quasi;

    #[test]
    fn named_states_match_density_route() {
        for initial in [InitialState::Zero, InitialState::Ghz, InitialState::SingletPairs] {
            for n in 1..=3 {
                let mut cfg = ExperimentConfig::new(n);
                cfg.initial = initial.clone();
                for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
                    let frame = Arc::new(frame);
                    let fast = target_quasi(&cfg, frame.clone()).unwrap();
                    let slow = quasi_from_density(&target_density(&cfg).unwrap(), frame).unwrap();
                    assert!(fast.max_abs_diff(&slow) < 1e-14, "{initial:?} n={n}");
                    assert!((density_from_quasi(&fast).purity() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_engines_agree() {
        let dir = tempfile::tempdir().unwrap();
        let circ = dir.path().join("bell.circ");
        std::fs::write(&circ, "H 0\nCNOT 0 1\n").unwrap();
        let mut cfg = ExperimentConfig::new(2);
        cfg.circuit = Some(circ);
        cfg.engines = EngineSelection::All;
        cfg.molecules = 20_000;
        cfg.seed = 3;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3 * 16);
        assert!(report.max_exact_discrepancy.unwrap() < 1e-12);
        let zz = report.rows.iter().find(|r| r.time_index == 2 && r.spec == "zz").unwrap();
        assert!((zz.oracle.unwrap() - eta(2)).abs() < 1e-12);
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("time_index,time,spec,oracle,quasi,lrhv_mean,lrhv_std_error,z_score"));
    }

    #[test]
    fn negative_weights_name_the_regime() {
        let dir = tempfile::tempdir().unwrap();
        let circ = dir.path().join("bell.circ");
        std::fs::write(&circ, "H 0\nCNOT 0 1\n").unwrap();
        let mut cfg = ExperimentConfig::new(2);
        cfg.circuit = Some(circ);
        cfg.epsilon = EpsilonSource::Value(0.5);
        cfg.molecules = 100;
        let err = run_experiment(&cfg).unwrap_err();
        match &err {
            Error::OutsideModelDomain { epsilon, eta, regime, .. } => {
                assert_eq!(*epsilon, 0.5);
                assert!((eta - 1.0 / 9.0).abs() < 1e-15);
                assert_eq!(*regime, Regime::EntangledStatesExist);
            }
            other => panic!("{other}"),
        }
        assert!(err.to_string().contains("tuple"), "{err}");
    }

    #[test]
    fn oracle_column_absent_beyond_cap() {
        let mut cfg = ExperimentConfig::new(11);
        cfg.specs = Some(vec!["zzzzzzzzzzz".parse().unwrap()]);
        cfg.molecules = 1000;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].oracle.is_none());
        assert!(report.rows[0].quasi.is_some());
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let line = String::from_utf8(csv).unwrap().lines().nth(1).unwrap().to_owned();
        assert!(line.starts_with("0,0.0,zzzzzzzzzzz,,"), "{line}");
    }
}
