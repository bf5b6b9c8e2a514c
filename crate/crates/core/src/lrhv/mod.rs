//! Local realistic hidden-variable engine.
//!
//! Each molecule carries hidden spin directions `ñ` (one frame index per
//! qubit) and thresholds `Λ̃ ∈ [−1, 1]^N`; all molecules share the hidden
//! weight vector `w̄`. A spin-component measurement along `a` on qubit `r`
//! yields `+1` iff `Λ_r ≥ −a·m_r`, which depends on nothing but that
//! qubit's own hidden variables and axis. Averaging over uniform `Λ`
//! reproduces `a·m_r`, so ensemble correlations converge to the
//! quasidistribution correlators.
//!
//! Under a unitary the hidden vector advances deterministically by its
//! transition matrix and every molecule re-spins the roulette wheel and
//! redraws its thresholds.

mod rng;
mod schedule;
mod wheel;

pub use rng::molecule_rng;
pub use schedule::{
    run_quasicontinuous, IntervalStats, PulseInterval, Recording, Snapshot, TemporalProbe,
    Trajectory, UpdateMode, UpdateSchedule,
};
pub use wheel::{spin_wheel, RouletteWheel};

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{Axis, MeasurementSpec};
use crate::nmr::clamp_admissible;
use crate::quasi::{apply_gate, QuasiState, TransitionMatrix};

/// Default molecule count.
pub const DEFAULT_MOLECULES: usize = 1_000_000;

const CHUNK: usize = 1 << 13;

/// Hidden variables of one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub directions: Vec<usize>,
    pub lambdas: Vec<f64>,
}

/// Sample mean of ±1 products with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// From the sum of `count` values in `{−1, +1}`; exact in integers.
    pub(crate) fn from_pm1_sum(sum: i64, count: usize) -> Self {
        let m = count as f64;
        let mean = sum as f64 / m;
        let std_error = if count > 1 {
            let var = (m / (m - 1.0)) * (1.0 - mean * mean).max(0.0);
            (var / m).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error }
    }

    /// From per-sample values via their sum and sum of squares.
    pub(crate) fn from_sums(sum: f64, sum_sq: f64, count: usize) -> Self {
        let m = count as f64;
        let mean = sum / m;
        let std_error = if count > 1 {
            let var = ((sum_sq - sum * mean) / (m - 1.0)).max(0.0);
            (var / m).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error }
    }

    /// `|mean − reference| / std_error`; zero when both the difference and
    /// the error vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if diff <= 1e-12 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        }
    }
}

#[inline]
fn outcome(lambda: f64, a_dot_m: f64) -> i8 {
    if lambda >= -a_dot_m {
        1
    } else {
        -1
    }
}

/// `+1` if `Λ ≥ −a·m`, else `−1`; `a·m` is `a·n` for a spatial axis and 1
/// for the zero direction.
pub fn measure_component(axis: &Axis, lambda: f64, n: &Vector3<f64>) -> i8 {
    outcome(lambda, axis.dot_m(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    hidden: QuasiState,
    wheel: RouletteWheel,
    codes: Vec<u64>,
    /// Direction index per molecule and qubit, decoded from `codes`.
    digits: Vec<u8>,
    lambdas: Vec<f64>,
    seed: u64,
    epoch: u64,
    num_qubits: usize,
}

/// Draws `molecules` molecules from the admissible hidden vector `w`.
pub fn init_ensemble(w: &QuasiState, molecules: usize, seed: u64) -> Result<Ensemble> {
    if molecules == 0 {
        return Err(Error::Config("ensemble needs at least one molecule".into()));
    }
    if w.frame().size() > u8::MAX as usize + 1 {
        return Err(Error::Config(format!(
            "frames of more than {} directions are not supported by the ensemble",
            u8::MAX as usize + 1
        )));
    }
    let hidden = clamp_admissible(w)?;
    let wheel = RouletteWheel::new(&hidden)?;
    let num_qubits = hidden.num_qubits();
    let mut e = Ensemble {
        hidden,
        wheel,
        codes: vec![0; molecules],
        digits: vec![0; molecules * num_qubits],
        lambdas: vec![0.0; molecules * num_qubits],
        seed,
        epoch: 0,
        num_qubits,
    };
    e.resample(|_| true);
    Ok(e)
}

pub fn estimate_correlation(e: &Ensemble, spec: &MeasurementSpec) -> Result<Estimate> {
    e.estimate(spec)
}

impl Ensemble {
    pub fn hidden_vector(&self) -> &QuasiState {
        &self.hidden
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of ensemble-wide random events so far.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn tuple_codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn molecule(&self, index: usize) -> Molecule {
        let frame = self.hidden.frame();
        debug_assert_eq!(
            frame.decode_tuple(self.codes[index] as usize, self.num_qubits),
            self.digits[index * self.num_qubits..(index + 1) * self.num_qubits]
                .iter()
                .map(|&d| d as usize)
                .collect::<Vec<_>>()
        );
        Molecule {
            directions: frame.decode_tuple(self.codes[index] as usize, self.num_qubits),
            lambdas: self.lambdas[index * self.num_qubits..(index + 1) * self.num_qubits].to_vec(),
        }
    }

    fn next_epoch(&mut self) -> u64 {
        let e = self.epoch;
        self.epoch += 1;
        e
    }

    /// Re-spins the wheel and redraws `Λ̃` for every molecule selected by
    /// `pick`, which sees the molecule index. Returns how many were drawn.
    fn resample(&mut self, pick: impl Fn(usize) -> bool + Sync) -> u64 {
        let epoch = self.next_epoch();
        let seed = self.seed;
        let n = self.num_qubits;
        let size = self.hidden.frame().size() as u64;
        let wheel = &self.wheel;
        self.codes
            .par_iter_mut()
            .zip(self.digits.par_chunks_mut(n))
            .zip(self.lambdas.par_chunks_mut(n))
            .enumerate()
            .map(|(m, ((code, digits), lambdas))| {
                if !pick(m) {
                    return 0;
                }
                let mut rng = molecule_rng(seed, epoch, m as u64);
                redraw(wheel, &mut rng, size, code, digits, lambdas);
                1
            })
            .sum()
    }

    /// Per-qubit table of `a_r·m_r` indexed by frame direction, `None` for
    /// zero-direction axes.
    fn dot_tables(&self, spec: &MeasurementSpec) -> Vec<Option<Vec<f64>>> {
        let frame = self.hidden.frame();
        spec.axes
            .iter()
            .map(|axis| {
                (!axis.is_zero())
                    .then(|| frame.vectors().iter().map(|n| axis.dot_m(n)).collect())
            })
            .collect()
    }

    /// Product of the measurement outcomes of molecule `m`.
    #[inline]
    fn joint_outcome(&self, m: usize, tables: &[Option<Vec<f64>>]) -> i8 {
        let n = self.num_qubits;
        let digits = &self.digits[m * n..(m + 1) * n];
        let lambdas = &self.lambdas[m * n..(m + 1) * n];
        let mut product = 1i8;
        for (r, table) in tables.iter().enumerate() {
            if let Some(table) = table {
                product *= outcome(lambdas[r], table[digits[r] as usize]);
            }
        }
        product
    }

    /// Ensemble average of `Π_r A_r(a_r, Λ_r, n_r)`. Read-only: measuring
    /// never disturbs the hidden variables.
    pub fn estimate(&self, spec: &MeasurementSpec) -> Result<Estimate> {
        spec.check_len(self.num_qubits)?;
        let tables = self.dot_tables(spec);
        let len = self.len();
        let sum: i64 = (0..len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(len))
                    .map(|m| self.joint_outcome(m, &tables) as i64)
                    .sum::<i64>()
            })
            .sum();
        Ok(Estimate::from_pm1_sum(sum, len))
    }

    /// Joint outcome of every molecule for `spec`.
    pub fn joint_outcomes(&self, spec: &MeasurementSpec) -> Result<Vec<i8>> {
        spec.check_len(self.num_qubits)?;
        let tables = self.dot_tables(spec);
        Ok((0..self.len())
            .into_par_iter()
            .map(|m| self.joint_outcome(m, &tables))
            .collect())
    }

    /// Outcome of every molecule for a single-qubit measurement.
    pub fn outcomes(&self, qubit: usize, axis: &Axis) -> Result<Vec<i8>> {
        let mut axes = vec![Axis::Zero; self.num_qubits];
        *axes.get_mut(qubit).ok_or(Error::BadTargets {
            targets: vec![qubit],
            num_qubits: self.num_qubits,
        })? = *axis;
        self.joint_outcomes(&MeasurementSpec { axes })
    }

    /// Advances `w̄` by `T` and has every molecule redraw `ñ` and `Λ̃`.
    /// Leaves the ensemble untouched if the new hidden vector has a weight
    /// below `−1e-12`.
    pub fn update_discrete(&mut self, t: &TransitionMatrix) -> Result<()> {
        self.advance_hidden(t)?;
        self.resample(|_| true);
        Ok(())
    }

    /// Replaces `w̄` by `T w̄` and rebuilds the wheel without touching the
    /// molecules.
    pub(crate) fn advance_hidden(&mut self, t: &TransitionMatrix) -> Result<()> {
        let next = clamp_admissible(&apply_gate(&self.hidden, t)?)?;
        self.wheel = RouletteWheel::new(&next)?;
        self.hidden = next;
        Ok(())
    }

    /// Every molecule independently redraws with probability `p`, using one
    /// uniform variate for the decision. Marks redrawn molecules in
    /// `updated`, returns the count.
    pub(crate) fn stochastic_step(&mut self, p: f64, updated: &mut [bool]) -> u64 {
        let epoch = self.next_epoch();
        let seed = self.seed;
        let n = self.num_qubits;
        let size = self.hidden.frame().size() as u64;
        let wheel = &self.wheel;
        self.codes
            .par_iter_mut()
            .zip(self.digits.par_chunks_mut(n))
            .zip(self.lambdas.par_chunks_mut(n))
            .zip(updated.par_iter_mut())
            .enumerate()
            .map(|(m, (((code, digits), lambdas), flag))| {
                let mut rng = molecule_rng(seed, epoch, m as u64);
                if rng.random::<f64>() < p {
                    redraw(wheel, &mut rng, size, code, digits, lambdas);
                    *flag = true;
                    1
                } else {
                    0
                }
            })
            .sum()
    }

    /// Redraws exactly the molecules not yet marked in `updated`.
    pub(crate) fn force_stale(&mut self, updated: &[bool]) -> u64 {
        self.resample(|m| !updated[m])
    }
}

fn redraw(
    wheel: &RouletteWheel,
    rng: &mut impl Rng,
    size: u64,
    code: &mut u64,
    digits: &mut [u8],
    lambdas: &mut [f64],
) {
    *code = wheel.spin(rng) as u64;
    let mut rest = *code;
    for d in digits.iter_mut().rev() {
        *d = (rest % size) as u8;
        rest /= size;
    }
    for l in lambdas.iter_mut() {
        *l = 2.0 * rng.random::<f64>() - 1.0;
    }
}
