//! Bulk-ensemble NMR parameters: mixing-parameter scaling and the
//! unentangleability thresholds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasi::QuasiState;

/// Weights in `[-ADMISSIBLE_TOLERANCE, 0)` are rounding noise and clamp to 0.
pub const ADMISSIBLE_TOLERANCE: f64 = 1e-12;

/// Room-temperature polarization of a ~300 MHz spectrometer.
pub const ROOM_TEMPERATURE_ALPHA: f64 = 2e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmrParams {
    pub alpha: f64,
    pub num_qubits: usize,
}

impl NmrParams {
    pub fn new(alpha: f64, num_qubits: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("polarization {alpha} outside (0, 1)")));
        }
        if num_qubits == 0 {
            return Err(Error::Config("need at least one qubit".into()));
        }
        Ok(NmrParams { alpha, num_qubits })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `ε ≤ η`: every quasidistribution reachable by unitaries is nonnegative.
    Unentangleable,
    /// `η < ε ≤ η′`: whether entangled states exist is not known.
    OpenRegion,
    /// `ε > η′`: entangled states of pseudopure form exist.
    EntangledStatesExist,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Unentangleable => "UNENTANGLEABLE",
            Regime::OpenRegion => "OPEN_REGION",
            Regime::EntangledStatesExist => "ENTANGLED_STATES_EXIST",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub epsilon: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub regime: Regime,
}

/// `ε = αN/2^N` after pseudopure synthesis.
pub fn epsilon_pseudopure(p: &NmrParams) -> f64 {
    p.alpha * p.num_qubits as f64 / 2f64.powi(p.num_qubits as i32)
}

/// `η = 1/(1 + 2^{2N−1})`.
pub fn eta(num_qubits: usize) -> f64 {
    1.0 / (1.0 + 2f64.powi(2 * num_qubits as i32 - 1))
}

/// `η′ = 1/(1 + 2^{N−1})`.
pub fn eta_prime(num_qubits: usize) -> f64 {
    1.0 / (1.0 + 2f64.powi(num_qubits as i32 - 1))
}

pub fn thresholds(epsilon: f64, num_qubits: usize) -> Result<Thresholds> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let eta = eta(num_qubits);
    let eta_prime = eta_prime(num_qubits);
    let regime = if epsilon <= eta {
        Regime::Unentangleable
    } else if epsilon <= eta_prime {
        Regime::OpenRegion
    } else {
        Regime::EntangledStatesExist
    };
    Ok(Thresholds {
        epsilon,
        eta,
        eta_prime,
        regime,
    })
}

/// Largest `N ≤ max_qubits` whose synthesized `ε = αN/2^N` is at or below
/// `η(N)`, scanning upward from one qubit until the first failure.
pub fn max_unentangleable_qubits(alpha: f64, max_qubits: usize) -> Option<usize> {
    (1..=max_qubits)
        .take_while(|&n| epsilon_pseudopure(&NmrParams { alpha, num_qubits: n }) <= eta(n))
        .last()
}

/// Checks that every weight is a usable probability. Values in
/// `[-1e-12, 0)` pass; callers clamp them with [`clamp_admissible`].
pub fn assert_lrhv_admissible(w: &QuasiState) -> Result<()> {
    let (index, value) = w.min_weight();
    if value < -ADMISSIBLE_TOLERANCE || value.is_nan() {
        return Err(Error::NegativeQuasiWeight {
            index,
            tuple: w.frame().decode_tuple(index, w.num_qubits()),
            value,
        });
    }
    Ok(())
}

/// Admissibility check followed by clamping of rounding-level negatives to
/// zero and renormalization.
pub fn clamp_admissible(w: &QuasiState) -> Result<QuasiState> {
    assert_lrhv_admissible(w)?;
    let clamped: Vec<f64> = w.weights().iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    QuasiState::new(
        clamped.into_iter().map(|x| x / total).collect(),
        w.frame().clone(),
        w.num_qubits(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Frame;
    use crate::oracle::{pseudopure_state, DensityOperator};
    use crate::quasi::quasi_from_density;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn epsilon_scaling() {
        let eps = |n| epsilon_pseudopure(&NmrParams::new(2e-5, n).unwrap());
        assert_relative_eq!(eps(2), 1e-5, max_relative = 1e-15);
        assert_relative_eq!(eps(7), 1.09375e-6, max_relative = 1e-15);
        assert_relative_eq!(eps(12), 5.859375e-8, max_relative = 1e-15);
        assert!(NmrParams::new(0.0, 2).is_err());
        assert!(NmrParams::new(1.0, 2).is_err());
    }

    #[test]
    fn two_qubit_thresholds() {
        let t = thresholds(0.2, 2).unwrap();
        assert_relative_eq!(t.eta, 1.0 / 9.0);
        assert_relative_eq!(t.eta_prime, 1.0 / 3.0);
        assert_eq!(t.regime, Regime::OpenRegion);
        assert_eq!(thresholds(1.0 / 9.0, 2).unwrap().regime, Regime::Unentangleable);
        assert_eq!(thresholds(0.5, 2).unwrap().regime, Regime::EntangledStatesExist);
        assert!(thresholds(-0.1, 2).is_err());
    }

    #[test]
    fn room_temperature_scan_stops_at_twelve() {
        assert_eq!(max_unentangleable_qubits(ROOM_TEMPERATURE_ALPHA, 64), Some(12));
        let e13 = epsilon_pseudopure(&NmrParams::new(2e-5, 13).unwrap());
        assert!(e13 > eta(13));
    }

    #[test]
    fn thresholds_decrease() {
        for n in 2..30 {
            assert!(eta(n) < eta_prime(n));
            assert!(eta(n + 1) < eta(n));
            assert!(eta_prime(n + 1) < eta_prime(n));
        }
        assert!(eta(40) / eta_prime(40) < 1e-11);
    }

    #[test]
    fn admissibility() {
        let f = Arc::new(Frame::tetrahedron());
        assert!(assert_lrhv_admissible(&QuasiState::uniform(f.clone(), 2)).is_ok());

        let pure = quasi_from_density(&DensityOperator::basis(1, 0), f.clone()).unwrap();
        match assert_lrhv_admissible(&pure) {
            Err(Error::NegativeQuasiWeight { value, tuple, .. }) => {
                assert!((value - (1.0 - 3f64.sqrt()) / 4.0).abs() < 1e-15);
                assert_eq!(tuple.len(), 1);
            }
            other => panic!("expected rejection, got {other:?}"),
        }

        let anti = -f.vectors()[0] * 0.5;
        let rho1 = DensityOperator::new(crate::pauli::to_dmatrix(&crate::pauli::bloch_operator(
            0.5, &anti,
        )))
        .unwrap();
        let w = quasi_from_density(&pseudopure_state(&rho1, 1.0 / 3.0).unwrap(), f).unwrap();
        let clamped = clamp_admissible(&w).unwrap();
        assert_eq!(clamped.weights()[0], 0.0);
    }
}
