//! Dense complex linear algebra on small matrices, generic over the scalar.
//!
//! Row-major storage in flat slices. Everything here is sized for the
//! matrices this crate actually builds: Sylvester blocks (order <= 24),
//! jet covariances (order <= a few dozen) and 2x2 Newton systems.

use super::Real;
use crate::error::{CoreError, Result};
use num_complex::Complex;

#[inline]
fn nsqr<R: Real>(z: Complex<R>) -> R {
    z.re * z.re + z.im * z.im
}

/// In-place LU factorization with partial pivoting.
///
/// Returns the permutation parity and the magnitudes of the largest and
/// smallest pivots, which callers use as a cheap condition estimate.
/// A hard-zero pivot reports the matrix as singular.
pub fn lu_in_place<R: Real>(a: &mut [Complex<R>], n: usize) -> Result<LuInfo<R>> {
    assert_eq!(a.len(), n * n);
    let mut parity = false;
    let mut max_piv = R::zero();
    let mut min_piv = R::zero();
    for k in 0..n {
        // pivot search on |.|^2
        let mut best = k;
        let mut best_mag = nsqr(a[k * n + k]);
        for i in (k + 1)..n {
            let mag = nsqr(a[i * n + k]);
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag == R::zero() {
            return Err(CoreError::Degenerate("singular matrix in LU".into()));
        }
        if best != k {
            parity = !parity;
            for j in 0..n {
                a.swap(k * n + j, best * n + j);
            }
        }
        let piv_mag = best_mag.sqrt();
        if k == 0 {
            max_piv = piv_mag;
            min_piv = piv_mag;
        } else {
            max_piv = max_piv.max_val(piv_mag);
            min_piv = min_piv.min_val(piv_mag);
        }
        let piv = a[k * n + k];
        for i in (k + 1)..n {
            let factor = a[i * n + k] / piv;
            a[i * n + k] = factor;
            for j in (k + 1)..n {
                let sub = factor * a[k * n + j];
                a[i * n + j] = a[i * n + j] - sub;
            }
        }
    }
    Ok(LuInfo {
        parity,
        max_pivot: max_piv,
        min_pivot: min_piv,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct LuInfo<R: Real> {
    pub parity: bool,
    pub max_pivot: R,
    pub min_pivot: R,
}

impl<R: Real> LuInfo<R> {
    /// max/min pivot ratio; a crude but monotone conditioning proxy.
    pub fn condition_estimate(&self) -> R {
        self.max_pivot / self.min_pivot
    }
}

/// Determinant via LU. Returns zero (not an error) for singular input.
pub fn det<R: Real>(mut a: Vec<Complex<R>>, n: usize) -> (Complex<R>, Option<LuInfo<R>>) {
    match lu_in_place(&mut a, n) {
        Ok(info) => {
            let mut d = Complex::new(R::one(), R::zero());
            for k in 0..n {
                d = d * a[k * n + k];
            }
            if info.parity {
                d = -d;
            }
            (d, Some(info))
        }
        Err(_) => (Complex::new(R::zero(), R::zero()), None),
    }
}

/// Solves `a x = b` for a single right-hand side, destroying both.
pub fn solve_in_place<R: Real>(
    a: &mut [Complex<R>],
    b: &mut [Complex<R>],
    n: usize,
) -> Result<()> {
    assert_eq!(b.len(), n);
    // LU with the permutation applied to b as we go
    let mut perm: Vec<usize> = (0..n).collect();
    let info = lu_in_place_perm(a, n, &mut perm)?;
    let _ = info;
    let bb: Vec<Complex<R>> = perm.iter().map(|&p| b[p]).collect();
    b.copy_from_slice(&bb);
    // forward substitution (unit lower)
    for i in 1..n {
        for j in 0..i {
            let sub = a[i * n + j] * b[j];
            b[i] = b[i] - sub;
        }
    }
    // back substitution
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let sub = a[i * n + j] * b[j];
            b[i] = b[i] - sub;
        }
        b[i] = b[i] / a[i * n + i];
    }
    Ok(())
}

fn lu_in_place_perm<R: Real>(
    a: &mut [Complex<R>],
    n: usize,
    perm: &mut [usize],
) -> Result<LuInfo<R>> {
    let mut parity = false;
    let mut max_piv = R::zero();
    let mut min_piv = R::zero();
    for k in 0..n {
        let mut best = k;
        let mut best_mag = nsqr(a[k * n + k]);
        for i in (k + 1)..n {
            let mag = nsqr(a[i * n + k]);
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag == R::zero() {
            return Err(CoreError::Degenerate("singular matrix in solve".into()));
        }
        if best != k {
            parity = !parity;
            perm.swap(k, best);
            for j in 0..n {
                a.swap(k * n + j, best * n + j);
            }
        }
        let piv_mag = best_mag.sqrt();
        if k == 0 {
            max_piv = piv_mag;
            min_piv = piv_mag;
        } else {
            max_piv = max_piv.max_val(piv_mag);
            min_piv = min_piv.min_val(piv_mag);
        }
        let piv = a[k * n + k];
        for i in (k + 1)..n {
            let factor = a[i * n + k] / piv;
            a[i * n + k] = factor;
            for j in (k + 1)..n {
                let sub = factor * a[k * n + j];
                a[i * n + j] = a[i * n + j] - sub;
            }
        }
    }
    Ok(LuInfo {
        parity,
        max_pivot: max_piv,
        min_pivot: min_piv,
    })
}

/// Lower Cholesky factor of a Hermitian positive semidefinite matrix.
///
/// Diagonal entries may dip slightly negative from rounding; anything above
/// `-tol * max_diag` is clamped to zero, anything below is rejected. This
/// doubles as the PSD test used by the covariance invariants.
pub fn cholesky<R: Real>(a: &[Complex<R>], n: usize, tol: R) -> Result<Vec<Complex<R>>> {
    assert_eq!(a.len(), n * n);
    let mut max_diag = R::zero();
    for i in 0..n {
        max_diag = max_diag.max_val(a[i * n + i].re.abs());
    }
    if max_diag == R::zero() {
        max_diag = R::one();
    }
    let mut l = vec![Complex::new(R::zero(), R::zero()); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                let sub = l[i * n + k] * l[j * n + k].conj();
                s = s - sub;
            }
            if i == j {
                let d = s.re;
                if d < -tol * max_diag {
                    return Err(CoreError::Conditioning(format!(
                        "matrix not PSD: diagonal pivot {:e} below -tol*scale",
                        d.to_f64()
                    )));
                }
                let d = if d < R::zero() { R::zero() } else { d };
                l[i * n + i] = Complex::new(d.sqrt(), R::zero());
            } else {
                let d = l[j * n + j].re;
                if d == R::zero() {
                    // zero pivot: column must be zero for consistency
                    if nsqr(s) > tol * tol * max_diag * max_diag {
                        return Err(CoreError::Conditioning(
                            "matrix not PSD: rank deficiency is inconsistent".into(),
                        ));
                    }
                    l[i * n + j] = Complex::new(R::zero(), R::zero());
                } else {
                    l[i * n + j] = s / Complex::new(d, R::zero());
                }
            }
        }
    }
    Ok(l)
}

/// Hermitian deviation `max |a - a^H|` over all entries.
pub fn hermitian_defect<R: Real>(a: &[Complex<R>], n: usize) -> R {
    let mut worst = R::zero();
    for i in 0..n {
        for j in 0..n {
            let d = a[i * n + j] - a[j * n + i].conj();
            worst = worst.max_val(nsqr(d).sqrt());
        }
    }
    worst
}
