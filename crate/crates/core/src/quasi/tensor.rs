//! Mode-wise linear maps on dense row-major tensors.

use std::ops::{Add, Mul};

/// Applies `matrix` (`out_dim × shape[axis]`, row-major) along one axis of a
/// row-major tensor of the given shape, returning the new data. `shape` is
/// updated in place.
pub(crate) fn apply_along_axis<T>(
    data: &[T],
    shape: &mut [usize],
    axis: usize,
    matrix: &[T],
    out_dim: usize,
) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    let in_dim = shape[axis];
    debug_assert_eq!(matrix.len(), out_dim * in_dim);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    debug_assert_eq!(data.len(), outer * in_dim * inner);

    let mut out = vec![T::default(); outer * out_dim * inner];
    for o in 0..outer {
        let src = &data[o * in_dim * inner..(o + 1) * in_dim * inner];
        let dst = &mut out[o * out_dim * inner..(o + 1) * out_dim * inner];
        for (row, coeffs) in matrix.chunks_exact(in_dim).enumerate() {
            let drow = &mut dst[row * inner..(row + 1) * inner];
            for (p, &c) in coeffs.iter().enumerate() {
                let srow = &src[p * inner..(p + 1) * inner];
                for (d, &s) in drow.iter_mut().zip(srow) {
                    *d = *d + c * s;
                }
            }
        }
    }
    shape[axis] = out_dim;
    out
}

/// Applies the same per-axis map to every axis.
pub(crate) fn apply_to_all_axes<T>(
    mut data: Vec<T>,
    shape: &mut [usize],
    matrix: &[T],
    out_dim: usize,
) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    for axis in 0..shape.len() {
        data = apply_along_axis(&data, shape, axis, matrix, out_dim);
    }
    data
}

/// Kronecker product of vectors, first factor most significant.
pub(crate) fn kron_vectors<T>(factors: &[Vec<T>]) -> Vec<T>
where
    T: Copy + Mul<Output = T>,
{
    let mut iter = factors.iter();
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    iter.fold(first.clone(), |acc, f| {
        let mut out = Vec::with_capacity(acc.len() * f.len());
        for &a in &acc {
            out.extend(f.iter().map(|&b| a * b));
        }
        out
    })
}
