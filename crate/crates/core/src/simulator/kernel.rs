//! In-place gate application on little-endian amplitude arrays.

use crate::linalg::{ComplexMatrix, C64};

pub type Mat2 = [C64; 4];
pub type Mat4 = [C64; 16];

pub fn mat2(m: &ComplexMatrix) -> Mat2 {
    debug_assert_eq!((m.rows(), m.cols()), (2, 2));
    let e = m.entries();
    [e[0], e[1], e[2], e[3]]
}

pub fn mat4(m: &ComplexMatrix) -> Mat4 {
    debug_assert_eq!((m.rows(), m.cols()), (4, 4));
    let mut out = [C64::new(0.0, 0.0); 16];
    out.copy_from_slice(m.entries());
    out
}

/// `a · b` for 2×2 matrices.
#[inline]
pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn apply_1q(amps: &mut [C64], q: usize, m: &Mat2) {
    let stride = 1usize << q;
    let n = amps.len();
    let mut base = 0;
    while base < n {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i + stride] = m[2] * a0 + m[3] * a1;
        }
        base += stride << 1;
    }
}

/// Applies a 4×4 matrix whose local index is `2·b(first) + b(second)`.
pub fn apply_2q(amps: &mut [C64], first: usize, second: usize, m: &Mat4) {
    let (bf, bs) = (1usize << first, 1usize << second);
    let offsets = [0, bs, bf, bf | bs];
    let mask = bf | bs;
    let mut local = [C64::new(0.0, 0.0); 4];
    for i in 0..amps.len() {
        if i & mask != 0 {
            continue;
        }
        for (k, off) in offsets.iter().enumerate() {
            local[k] = amps[i | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let row = &m[4 * r..4 * r + 4];
            amps[i | off] =
                row[0] * local[0] + row[1] * local[1] + row[2] * local[2] + row[3] * local[3];
        }
    }
}
