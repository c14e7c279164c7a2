//! Minimal power-of-two FFT used for angular sweeps on polar grids.

use num_complex::Complex64;

/// In-place transform with positive-sign twiddles:
/// `out[j] = sum_k buf[k] exp(+2 pi i j k / M)`, `M` a power of two.
///
/// With the coefficients of a polynomial folded modulo `M` into `buf`, the
/// output is the polynomial evaluated on the `M` uniform points of the unit
/// circle.
pub fn fft_pow2_positive(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "length must be a power of two");
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = 2.0 * std::f64::consts::PI / len as f64;
        let w_len = Complex64::from_polar(1.0, angle);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}
