#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use nmr_lrhv::frames::Frame;
use nmr_lrhv::measurement::{Axis, MeasurementSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn frames() -> [Arc<Frame>; 2] {
    [Arc::new(Frame::tetrahedron()), Arc::new(Frame::cardinal6())]
}

pub fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > 1e-6 {
            return v.normalize();
        }
    }
}

pub fn random_axis(rng: &mut ChaCha8Rng) -> Axis {
    Axis::spatial(unit_vector(rng)).unwrap()
}

/// Each qubit gets the zero direction with probability 1/4, else a random
/// spatial axis.
pub fn random_spec(num_qubits: usize, rng: &mut ChaCha8Rng) -> MeasurementSpec {
    let axes = (0..num_qubits)
        .map(|_| {
            if rng.random::<f64>() < 0.25 {
                Axis::Zero
            } else {
                random_axis(rng)
            }
        })
        .collect();
    MeasurementSpec::new(axes).unwrap()
}

/// Proper rotation from the QR decomposition of a Gaussian matrix.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let g = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    if q.determinant() < 0.0 {
        -q
    } else {
        q
    }
}

/// Distinct random qubit indices.
pub fn random_targets(k: usize, num_qubits: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..num_qubits).collect();
    (0..k)
        .map(|_| pool.remove(rng.random_range(0..pool.len())))
        .collect()
}
