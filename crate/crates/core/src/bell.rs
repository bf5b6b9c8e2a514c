//! Bell-type quantities: spatial CHSH from single-time correlators and the
//! three-time Leggett-Garg combination from hidden-variable trajectories.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lrhv::{Ensemble, Estimate, Trajectory};
use crate::measurement::{Axis, MeasurementSpec};
use crate::oracle::{correlation_trace, DensityOperator};
use crate::quasi::{correlation_quasi, QuasiState};

/// Classical bound on `|S|`.
pub const CHSH_BOUND: f64 = 2.0;
/// Classical bound on `K₃`.
pub const LEGGETT_GARG_BOUND: f64 = 1.0;
/// A value counts as a violation once it exceeds its bound by this many
/// standard errors.
pub const VIOLATION_SIGMAS: f64 = 5.0;
/// Minimum points per angle in a scan.
pub const MIN_SCAN_RESOLUTION: usize = 8;

const AXIS_TOLERANCE: f64 = 1e-12;

fn check_spatial(axis: &Axis) -> Result<()> {
    match axis.vector() {
        Some(v) if (v.norm() - 1.0).abs() <= AXIS_TOLERANCE => Ok(()),
        _ => Err(Error::Config(format!("Bell axis {axis} is not a spatial unit vector"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting {
    pub qubits: (usize, usize),
    pub a: Axis,
    pub a_prime: Axis,
    pub b: Axis,
    pub b_prime: Axis,
}

impl ChshSetting {
    pub fn new(qubits: (usize, usize), a: Axis, a_prime: Axis, b: Axis, b_prime: Axis) -> Result<Self> {
        if qubits.0 == qubits.1 {
            return Err(Error::BadTargets {
                targets: vec![qubits.0, qubits.1],
                num_qubits: qubits.0.max(qubits.1) + 1,
            });
        }
        for axis in [&a, &a_prime, &b, &b_prime] {
            check_spatial(axis)?;
        }
        Ok(ChshSetting {
            qubits,
            a,
            a_prime,
            b,
            b_prime,
        })
    }

    /// Axes `(sin θ, 0, cos θ)` for the four angles `(a, a′, b, b′)`.
    pub fn from_xz_angles(qubits: (usize, usize), angles: [f64; 4]) -> Result<Self> {
        let [a, ap, b, bp] = angles.map(Axis::xz);
        Self::new(qubits, a, ap, b, bp)
    }

    /// `a = z`, `a′ = x`, `b = −(z+x)/√2`, `b′ = (x−z)/√2`: maximal `S = 2√2`
    /// for the singlet.
    pub fn singlet_optimal(qubits: (usize, usize)) -> Self {
        Self::from_xz_angles(qubits, [0.0, PI / 2.0, 5.0 * PI / 4.0, 3.0 * PI / 4.0])
            .expect("valid angles")
    }

    /// The four correlator specs in the order `(a,b), (a,b′), (a′,b), (a′,b′)`.
    pub fn specs(&self, num_qubits: usize) -> Result<[MeasurementSpec; 4]> {
        let spec = |x: Axis, y: Axis| pair_spec(num_qubits, self.qubits, x, y);
        Ok([
            spec(self.a, self.b)?,
            spec(self.a, self.b_prime)?,
            spec(self.a_prime, self.b)?,
            spec(self.a_prime, self.b_prime)?,
        ])
    }
}

impl fmt::Display for ChshSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |a: &Axis| {
            let v = a.vector().unwrap_or_else(Vector3::zeros);
            format!("({:.4},{:.4},{:.4})", v.x, v.y, v.z)
        };
        write!(
            f,
            "CHSH q{}q{} a={} a'={} b={} b'={}",
            self.qubits.0,
            self.qubits.1,
            v(&self.a),
            v(&self.a_prime),
            v(&self.b),
            v(&self.b_prime)
        )
    }
}

fn pair_spec(num_qubits: usize, qubits: (usize, usize), x: Axis, y: Axis) -> Result<MeasurementSpec> {
    let (r, s) = qubits;
    if r >= num_qubits || s >= num_qubits || r == s {
        return Err(Error::BadTargets {
            targets: vec![r, s],
            num_qubits,
        });
    }
    let mut axes = vec![Axis::Zero; num_qubits];
    axes[r] = x;
    axes[s] = y;
    Ok(MeasurementSpec { axes })
}

/// `S = C(a,b) + C(a,b′) + C(a′,b) − C(a′,b′)` with `correlator(x, y)`
/// giving the two-qubit correlation for axis `x` on the first qubit of the
/// pair and `y` on the second.
pub fn chsh_value(mut correlator: impl FnMut(&Axis, &Axis) -> f64, s: &ChshSetting) -> f64 {
    correlator(&s.a, &s.b) + correlator(&s.a, &s.b_prime) + correlator(&s.a_prime, &s.b)
        - correlator(&s.a_prime, &s.b_prime)
}

/// Where single-time correlators come from.
#[derive(Debug, Clone, Copy)]
pub enum CorrelatorSource<'a> {
    Oracle(&'a DensityOperator),
    Quasi(&'a QuasiState),
    Lrhv(&'a Ensemble),
}

impl CorrelatorSource<'_> {
    pub fn num_qubits(&self) -> usize {
        match self {
            CorrelatorSource::Oracle(rho) => rho.num_qubits(),
            CorrelatorSource::Quasi(w) => w.num_qubits(),
            CorrelatorSource::Lrhv(e) => e.num_qubits(),
        }
    }

    /// Correlator with its standard error; exact sources report zero error.
    pub fn correlate(&self, spec: &MeasurementSpec) -> Result<Estimate> {
        let exact = |mean| Estimate { mean, std_error: 0.0 };
        match self {
            CorrelatorSource::Oracle(rho) => correlation_trace(rho, spec).map(exact),
            CorrelatorSource::Quasi(w) => correlation_quasi(w, spec).map(exact),
            CorrelatorSource::Lrhv(e) => e.estimate(spec),
        }
    }
}

/// `S` with the standard errors of its four correlators added in
/// quadrature.
pub fn chsh_estimate(source: CorrelatorSource<'_>, setting: &ChshSetting) -> Result<Estimate> {
    let specs = setting.specs(source.num_qubits())?;
    let mut c = [Estimate { mean: 0.0, std_error: 0.0 }; 4];
    for (slot, spec) in c.iter_mut().zip(&specs) {
        *slot = source.correlate(spec)?;
    }
    Ok(Estimate {
        mean: c[0].mean + c[1].mean + c[2].mean - c[3].mean,
        std_error: c.iter().map(|e| e.std_error * e.std_error).sum::<f64>().sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDomain {
    /// Axes `(sin θ, 0, cos θ)` at `resolution` equally spaced angles.
    XzPlane,
    /// `resolution` Fibonacci-lattice points on the unit sphere.
    Sphere,
}

fn scan_axes(domain: ScanDomain, resolution: usize) -> Vec<Axis> {
    match domain {
        ScanDomain::XzPlane => (0..resolution)
            .map(|k| Axis::xz(2.0 * PI * k as f64 / resolution as f64))
            .collect(),
        ScanDomain::Sphere => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..resolution)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / resolution as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    Axis::Spatial([r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshScan {
    /// Largest `|S|` over the grid.
    pub max_s: f64,
    /// Aggregate standard error of the maximizing `S`.
    pub std_error: f64,
    /// Setting attaining the maximum, with its sign folded into the axes
    /// so that `S` evaluates positive.
    pub setting: ChshSetting,
}

/// Maximizes `|S|` over all axis quadruples drawn from the scan grid, for
/// the qubit pair `qubits`.
pub fn scan_max_chsh(
    source: CorrelatorSource<'_>,
    qubits: (usize, usize),
    resolution: usize,
    domain: ScanDomain,
) -> Result<ChshScan> {
    if resolution < MIN_SCAN_RESOLUTION {
        return Err(Error::Config(format!(
            "scan resolution {resolution} below {MIN_SCAN_RESOLUTION}"
        )));
    }
    let n = source.num_qubits();
    let axes = scan_axes(domain, resolution);
    let g = axes.len();
    let mut table = vec![Estimate { mean: 0.0, std_error: 0.0 }; g * g];
    for (i, x) in axes.iter().enumerate() {
        for (j, y) in axes.iter().enumerate() {
            table[i * g + j] = source.correlate(&pair_spec(n, qubits, *x, *y)?)?;
        }
    }
    let c = |i: usize, j: usize| table[i * g + j].mean;
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for i in 0..g {
        for ip in 0..g {
            for j in 0..g {
                let partial = c(i, j) + c(ip, j);
                for jp in 0..g {
                    let s = (partial + c(i, jp) - c(ip, jp)).abs();
                    if s > best.0 {
                        best = (s, [i, ip, j, jp]);
                    }
                }
            }
        }
    }
    let [i, ip, j, jp] = best.1;
    let s = c(i, j) + c(i, jp) + c(ip, j) - c(ip, jp);
    let se = |i: usize, j: usize| table[i * g + j].std_error.powi(2);
    let std_error = (se(i, j) + se(i, jp) + se(ip, j) + se(ip, jp)).sqrt();
    // Flipping a on qubit r flips the sign of S.
    let flip = |a: Axis| match (s < 0.0, a) {
        (true, Axis::Spatial(v)) => Axis::Spatial(v.map(|x| -x)),
        _ => a,
    };
    Ok(ChshScan {
        max_s: best.0,
        std_error,
        setting: ChshSetting::new(qubits, flip(axes[i]), flip(axes[ip]), axes[j], axes[jp])?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalSetting {
    /// Snapshot indices `t₁ < t₂ < t₃`.
    pub times: (usize, usize, usize),
    pub qubit: usize,
    pub axis: Axis,
}

impl TemporalSetting {
    pub fn new(times: (usize, usize, usize), qubit: usize, axis: Axis) -> Result<Self> {
        if !(times.0 < times.1 && times.1 < times.2) {
            return Err(Error::BadTrajectory(format!(
                "snapshot times {times:?} not strictly increasing"
            )));
        }
        check_spatial(&axis)?;
        Ok(TemporalSetting { times, qubit, axis })
    }
}

impl fmt::Display for TemporalSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (t1, t2, t3) = self.times;
        write!(f, "K3 q{} axis {} t=({t1},{t2},{t3})", self.qubit, self.axis)
    }
}

fn outcomes_at(traj: &Trajectory, time: usize, qubit: usize, axis: &Axis) -> Result<Vec<i8>> {
    let snap = traj.snapshots.get(time).ok_or_else(|| {
        Error::BadTrajectory(format!(
            "snapshot {time} missing, trajectory has {}",
            traj.snapshots.len()
        ))
    })?;
    if let Some(p) = traj.probe_index(qubit, axis) {
        return Ok(snap.outcome_logs[p].clone());
    }
    match &snap.ensemble {
        Some(e) => e.outcomes(qubit, axis),
        None => Err(Error::BadTrajectory(format!(
            "no outcome record for qubit {qubit} axis {axis} at snapshot {time}"
        ))),
    }
}

/// `K₃ = C(t₁,t₂) + C(t₂,t₃) − C(t₁,t₃)` from per-molecule outcomes. Each
/// molecule contributes `+1` or `−3`, so the estimate carries its own
/// sample standard error.
pub fn leggett_garg(traj: &Trajectory, setting: &TemporalSetting) -> Result<Estimate> {
    let (t1, t2, t3) = setting.times;
    let o1 = outcomes_at(traj, t1, setting.qubit, &setting.axis)?;
    let o2 = outcomes_at(traj, t2, setting.qubit, &setting.axis)?;
    let o3 = outcomes_at(traj, t3, setting.qubit, &setting.axis)?;
    let (mut sum, mut sum_sq) = (0i64, 0i64);
    for ((a, b), c) in o1.iter().zip(&o2).zip(&o3) {
        let k = (a * b + b * c - a * c) as i64;
        sum += k;
        sum_sq += k * k;
    }
    Ok(Estimate::from_sums(sum as f64, sum_sq as f64, o1.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub setting: String,
    pub value: f64,
    pub std_error: f64,
    pub bound: f64,
    pub violated: bool,
}

impl BellReport {
    fn new(setting: String, value: f64, std_error: f64, bound: f64) -> Self {
        BellReport {
            setting,
            value,
            std_error,
            bound,
            violated: value > bound + VIOLATION_SIGMAS * std_error,
        }
    }

    pub fn chsh(scan: &ChshScan) -> Self {
        Self::new(scan.setting.to_string(), scan.max_s, scan.std_error, CHSH_BOUND)
    }

    pub fn leggett_garg(setting: &TemporalSetting, k3: &Estimate) -> Self {
        Self::new(setting.to_string(), k3.mean, k3.std_error, LEGGETT_GARG_BOUND)
    }
}
