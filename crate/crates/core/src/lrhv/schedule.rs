//! Time-stepped hidden-variable dynamics.
//!
//! Pulses occupy intervals on a time axis discretized in steps of `dt`. At
//! the first step of an interval the hidden vector advances by the pulse's
//! transition matrix. During every step each molecule independently
//! updates with probability `γ·dt`. At the last step of an interval every
//! molecule that has not updated since the interval began is forced to
//! update once, so the whole ensemble reflects the completed unitary before
//! the next pulse.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Ensemble, Estimate};
use crate::error::{Error, Result};
use crate::measurement::{Axis, MeasurementSpec};
use crate::oracle::Circuit;
use crate::quasi::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Discrete,
    Quasicontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseInterval {
    pub start: f64,
    pub end: f64,
    /// Index of the circuit gate this pulse implements.
    pub gate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateSchedule {
    pub mode: UpdateMode,
    pub gamma: f64,
    pub dt: f64,
    pub pulse_intervals: Vec<PulseInterval>,
    /// Run until at least this time even after the last pulse.
    pub total_time: f64,
}

impl UpdateSchedule {
    /// One update of every molecule per gate.
    pub fn discrete(num_gates: usize) -> Self {
        UpdateSchedule {
            mode: UpdateMode::Discrete,
            gamma: 1.0,
            dt: 1.0,
            pulse_intervals: (0..num_gates)
                .map(|g| PulseInterval {
                    start: g as f64,
                    end: g as f64 + 1.0,
                    gate: g,
                })
                .collect(),
            total_time: num_gates as f64,
        }
    }

    /// Gates played back to back, each lasting `pulse_duration`.
    pub fn back_to_back(num_gates: usize, pulse_duration: f64, gamma: f64, dt: f64) -> Self {
        UpdateSchedule {
            mode: UpdateMode::Quasicontinuous,
            gamma,
            dt,
            pulse_intervals: (0..num_gates)
                .map(|g| PulseInterval {
                    start: g as f64 * pulse_duration,
                    end: (g + 1) as f64 * pulse_duration,
                    gate: g,
                })
                .collect(),
            total_time: num_gates as f64 * pulse_duration,
        }
    }

    /// No pulses; molecules keep refreshing from a static hidden vector.
    pub fn idle(total_time: f64, gamma: f64, dt: f64) -> Self {
        UpdateSchedule {
            mode: UpdateMode::Quasicontinuous,
            gamma,
            dt,
            pulse_intervals: Vec::new(),
            total_time,
        }
    }

    pub fn update_probability(&self) -> f64 {
        self.gamma * self.dt
    }

    fn validate(&self, circuit: &Circuit) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.mode == UpdateMode::Quasicontinuous {
            let p = self.update_probability();
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("per-step update probability gamma*dt = {p} outside (0, 1]"));
            }
        }
        if self.pulse_intervals.len() != circuit.len() {
            return bad(format!(
                "{} pulse intervals for {} gates",
                self.pulse_intervals.len(),
                circuit.len()
            ));
        }
        let mut prev_end = 0.0;
        for (i, p) in self.pulse_intervals.iter().enumerate() {
            if p.gate != i {
                return bad(format!("pulse {i} implements gate {}, expected {i}", p.gate));
            }
            if !(p.start >= prev_end && p.end > p.start) {
                return bad(format!("pulse {i} interval [{}, {}] overlaps or is empty", p.start, p.end));
            }
            if self.mode == UpdateMode::Quasicontinuous && p.end - p.start < self.dt * (1.0 - 1e-9) {
                return bad(format!("pulse {i} shorter than one time step"));
            }
            prev_end = p.end;
        }
        Ok(())
    }
}

/// Single-qubit observable whose per-molecule outcomes are logged at every
/// snapshot, for two-time correlators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalProbe {
    pub qubit: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// Set when this snapshot closes a pulse interval.
    pub interval_end: Option<usize>,
    /// One estimate per registered spec.
    pub correlators: Vec<Estimate>,
    /// One outcome vector per registered probe.
    pub outcome_logs: Vec<Vec<i8>>,
    pub ensemble: Option<Ensemble>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalStats {
    pub gate: usize,
    pub steps: usize,
    pub duration: f64,
    /// Total stochastic updates across all molecules.
    pub stochastic_updates: u64,
    /// Molecules forced to update at the interval end.
    pub forced_updates: u64,
    pub molecules: usize,
}

impl IntervalStats {
    pub fn mean_stochastic_updates(&self) -> f64 {
        self.stochastic_updates as f64 / self.molecules as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub schedule: UpdateSchedule,
    pub specs: Vec<MeasurementSpec>,
    pub probes: Vec<TemporalProbe>,
    pub snapshots: Vec<Snapshot>,
    pub intervals: Vec<IntervalStats>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    time: f64,
    spec_id: &'a str,
    mean: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    seed: u64,
    schedule: &'a UpdateSchedule,
    specs: Vec<String>,
    probes: &'a [TemporalProbe],
}

impl Trajectory {
    pub fn probe_index(&self, qubit: usize, axis: &Axis) -> Option<usize> {
        self.probes
            .iter()
            .position(|p| p.qubit == qubit && p.axis == *axis)
    }

    /// CSV with columns `time, spec_id, mean, std_error`, one row per
    /// snapshot and spec.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ids: Vec<String> = self.specs.iter().map(|s| s.to_string()).collect();
        for snap in &self.snapshots {
            for (id, est) in ids.iter().zip(&snap.correlators) {
                w.serialize(CsvRow {
                    time: snap.time,
                    spec_id: id,
                    mean: est.mean,
                    std_error: est.std_error,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON description of the schedule, seed, specs and probes.
    pub fn write_sidecar(&self, out: impl Write) -> Result<()> {
        let sidecar = Sidecar {
            seed: self.seed,
            schedule: &self.schedule,
            specs: self.specs.iter().map(|s| s.to_string()).collect(),
            probes: &self.probes,
        };
        serde_json::to_writer_pretty(out, &sidecar)?;
        Ok(())
    }
}

/// What to record along a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recording {
    pub specs: Vec<MeasurementSpec>,
    pub probes: Vec<TemporalProbe>,
    /// Keep a full clone of the ensemble at every snapshot.
    pub keep_ensembles: bool,
}

fn take_snapshot(
    e: &Ensemble,
    rec: &Recording,
    step: usize,
    time: f64,
    interval_end: Option<usize>,
) -> Result<Snapshot> {
    Ok(Snapshot {
        step,
        time,
        interval_end,
        correlators: rec
            .specs
            .iter()
            .map(|s| e.estimate(s))
            .collect::<Result<_>>()?,
        outcome_logs: rec
            .probes
            .iter()
            .map(|p| e.outcomes(p.qubit, &p.axis))
            .collect::<Result<_>>()?,
        ensemble: rec.keep_ensembles.then(|| e.clone()),
    })
}

/// Runs `circuit` on the ensemble under `schedule`, returning a snapshot
/// after every step (after every pulse in discrete mode), preceded by one
/// at time zero.
pub fn run_quasicontinuous(
    e: &mut Ensemble,
    schedule: &UpdateSchedule,
    circuit: &Circuit,
    recording: &Recording,
) -> Result<Trajectory> {
    schedule.validate(circuit)?;
    if circuit.num_qubits() != e.num_qubits() {
        return Err(Error::Shape(format!(
            "circuit on {} qubits for a {}-qubit ensemble",
            circuit.num_qubits(),
            e.num_qubits()
        )));
    }
    for spec in &recording.specs {
        spec.check_len(e.num_qubits())?;
    }
    let frame = Arc::clone(e.hidden_vector().frame());
    let transitions = circuit
        .ops()
        .iter()
        .map(|op| TransitionMatrix::for_gate(&op.gate, frame.clone(), &op.targets))
        .collect::<Result<Vec<_>>>()?;

    let mut traj = Trajectory {
        seed: e.seed(),
        schedule: schedule.clone(),
        specs: recording.specs.clone(),
        probes: recording.probes.clone(),
        snapshots: vec![take_snapshot(e, recording, 0, 0.0, None)?],
        intervals: Vec::new(),
    };

    if schedule.mode == UpdateMode::Discrete {
        for (i, (pulse, t)) in schedule.pulse_intervals.iter().zip(&transitions).enumerate() {
            e.update_discrete(t)?;
            traj.intervals.push(IntervalStats {
                gate: i,
                steps: 1,
                duration: pulse.end - pulse.start,
                stochastic_updates: e.len() as u64,
                forced_updates: 0,
                molecules: e.len(),
            });
            traj.snapshots
                .push(take_snapshot(e, recording, i + 1, pulse.end, Some(i))?);
        }
        return Ok(traj);
    }

    let dt = schedule.dt;
    let end_time = schedule
        .pulse_intervals
        .last()
        .map_or(0.0, |p| p.end)
        .max(schedule.total_time);
    let steps = (end_time / dt).round() as usize;
    let p = schedule.update_probability();
    let interval_of = |step: usize| {
        let mid = (step as f64 + 0.5) * dt;
        schedule
            .pulse_intervals
            .iter()
            .position(|iv| iv.start <= mid && mid < iv.end)
    };

    let mut updated = vec![false; e.len()];
    let mut current: Option<(usize, IntervalStats)> = None;
    for step in 0..steps {
        let interval = interval_of(step);
        if let Some(i) = interval {
            if current.as_ref().map(|(c, _)| *c) != Some(i) {
                e.advance_hidden(&transitions[i])?;
                updated.iter_mut().for_each(|f| *f = false);
                let iv = &schedule.pulse_intervals[i];
                current = Some((
                    i,
                    IntervalStats {
                        gate: i,
                        steps: 0,
                        duration: iv.end - iv.start,
                        stochastic_updates: 0,
                        forced_updates: 0,
                        molecules: e.len(),
                    },
                ));
            }
        }
        let n_updates = e.stochastic_step(p, &mut updated);
        if let Some((_, stats)) = current.as_mut() {
            stats.steps += 1;
            stats.stochastic_updates += n_updates;
        }

        let closes = match (interval, current.as_ref()) {
            (Some(i), Some((c, _))) if i == *c => interval_of(step + 1) != Some(i),
            _ => false,
        };
        let mut interval_end = None;
        if closes {
            let (i, mut stats) = current.take().expect("open interval");
            stats.forced_updates = e.force_stale(&updated);
            traj.intervals.push(stats);
            interval_end = Some(i);
        }
        traj.snapshots.push(take_snapshot(
            e,
            recording,
            step + 1,
            (step + 1) as f64 * dt,
            interval_end,
        )?);
    }
    Ok(traj)
}
