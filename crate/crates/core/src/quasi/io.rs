//! Flat binary weight files.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `QLRW`                    |
//! | 4     | format version (u32)            |
//! | 4     | qubit count `N` (u32)           |
//! | 4     | frame size `𝒩` (u32)            |
//! | 4     | frame label length `L` (u32)    |
//! | L     | frame label, UTF-8              |
//! | 8·𝒩^N | weights as f64, radix-𝒩 order   |

use std::io::{Read, Write};
use std::sync::Arc;

use super::QuasiState;
use crate::error::{Error, Result};
use crate::frames::Frame;

pub const WEIGHT_FILE_MAGIC: [u8; 4] = *b"QLRW";
pub const WEIGHT_FILE_VERSION: u32 = 1;

/// Decoded contents of a weight file, before binding to a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub num_qubits: usize,
    pub frame_size: usize,
    pub frame_label: String,
    pub weights: Vec<f64>,
}

impl WeightFile {
    /// Binds the weights to `frame`, which must match the recorded size and
    /// label.
    pub fn into_state(self, frame: Arc<Frame>) -> Result<QuasiState> {
        if frame.size() != self.frame_size || frame.label() != self.frame_label {
            return Err(Error::BadWeightFile(format!(
                "file was written for frame {:?} ({} directions), not {:?} ({})",
                self.frame_label,
                self.frame_size,
                frame.label(),
                frame.size()
            )));
        }
        QuasiState::new(self.weights, frame, self.num_qubits)
    }
}

pub fn write_weights(w: &QuasiState, mut out: impl Write) -> Result<()> {
    let label = w.frame().label().as_bytes();
    out.write_all(&WEIGHT_FILE_MAGIC)?;
    for v in [
        WEIGHT_FILE_VERSION,
        w.num_qubits() as u32,
        w.frame().size() as u32,
        label.len() as u32,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(label)?;
    let mut buf = Vec::with_capacity(8 * w.len());
    for x in w.weights() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_weights(mut input: impl Read) -> Result<WeightFile> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != WEIGHT_FILE_MAGIC {
        return Err(Error::BadWeightFile(format!("bad magic {magic:?}")));
    }
    let mut read_u32 = || -> Result<u32> {
        let mut b = [0u8; 4];
        input.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    };
    let version = read_u32()?;
    if version != WEIGHT_FILE_VERSION {
        return Err(Error::BadWeightFile(format!("unsupported version {version}")));
    }
    let num_qubits = read_u32()? as usize;
    let frame_size = read_u32()? as usize;
    let label_len = read_u32()? as usize;
    if num_qubits == 0 || frame_size < 4 {
        return Err(Error::BadWeightFile(format!(
            "{num_qubits} qubits over {frame_size} directions"
        )));
    }
    let count = frame_size
        .checked_pow(num_qubits as u32)
        .filter(|c| c.checked_mul(8).is_some())
        .ok_or_else(|| Error::BadWeightFile("weight count overflows".into()))?;

    let mut label = vec![0u8; label_len];
    input.read_exact(&mut label)?;
    let frame_label = String::from_utf8(label)
        .map_err(|e| Error::BadWeightFile(format!("frame label is not UTF-8: {e}")))?;

    let mut raw = vec![0u8; 8 * count];
    input.read_exact(&mut raw)?;
    let weights = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(WeightFile {
        num_qubits,
        frame_size,
        frame_label,
        weights,
    })
}
