//! Reproducing kernels of the polynomial spaces and their derived objects:
//! rescaled scaling limits, expected zero densities via the log-kernel
//! Laplacian, and Gaussian jet covariances.
//!
//! The full-space kernel has the closed form
//! `binom(N+m, m) (1 + <z, w>)^N`; every closed-form path here is tested
//! against direct term-by-term summation over the monomial basis.

use crate::ensembles::EnsembleSpec;
use crate::error::{CoreError, Result};
use crate::numeric::{KahanSum, KahanSumC};
use crate::polytopes::LatticePolytope;
use crate::C64;

/// Kernel evaluation in mantissa/log-scale form: the represented value is
/// `value * exp(log_scale)`. For moderate arguments `log_scale` is zero;
/// the split keeps deep-forbidden-region and high-degree diagonals
/// representable where a bare `f64` would over- or underflow.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub value: C64,
    pub log_scale: f64,
    pub n: u32,
    pub m: usize,
}

impl KernelValue {
    /// Collapses to a plain complex number (may overflow to infinity for
    /// extreme arguments; callers that care use `log_abs`).
    pub fn to_complex(&self) -> C64 {
        self.value * self.log_scale.exp()
    }

    /// `ln |K|`, or `-inf` for an exact zero.
    pub fn log_abs(&self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }
}

/// `binom(n + m, m)` for the small dimensions supported here; exact in f64.
fn dimension_count(n: u32, m: usize) -> f64 {
    let nf = n as f64;
    match m {
        1 => nf + 1.0,
        2 => (nf + 1.0) * (nf + 2.0) / 2.0,
        3 => (nf + 1.0) * (nf + 2.0) * (nf + 3.0) / 6.0,
        _ => unreachable!("dimension checked by callers"),
    }
}

fn dot_conj(z: &[C64], w: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in z.iter().zip(w) {
        acc += a * b.conj();
    }
    acc
}

/// Full-space kernel `sum_alpha z^alpha conj(w)^alpha / ||z^alpha||^2`
/// over every monomial of degree at most `n`, in closed form.
pub fn kernel_full(m: usize, n: u32, z: &[C64], w: &[C64]) -> KernelValue {
    assert!((1..=3).contains(&m), "m must be 1..=3");
    assert_eq!(z.len(), m);
    assert_eq!(w.len(), m);
    let base = C64::new(1.0, 0.0) + dot_conj(z, w);
    // log-scaled when the power would leave the representable range
    let log_mag = n as f64 * base.norm().ln();
    if log_mag.abs() < 600.0 {
        KernelValue {
            value: dimension_count(n, m) * base.powu(n),
            log_scale: 0.0,
            n,
            m,
        }
    } else {
        let phase = n as f64 * base.arg();
        KernelValue {
            value: dimension_count(n, m) * C64::from_polar(1.0, phase),
            log_scale: log_mag,
            n,
            m,
        }
    }
}

/// Kernel of an arbitrary monomial-spanned subspace, summed term by term in
/// max-rescaled form so high degrees stay finite.
pub fn kernel_for_spec(spec: &EnsembleSpec, z: &[C64], w: &[C64]) -> KernelValue {
    let m = spec.dim();
    assert_eq!(z.len(), m);
    assert_eq!(w.len(), m);
    // per-term log magnitude and phase
    let log_z: Vec<Option<(f64, f64)>> = z
        .iter()
        .map(|&c| {
            if c.norm_sqr() == 0.0 {
                None
            } else {
                Some((c.norm().ln(), c.arg()))
            }
        })
        .collect();
    let log_w: Vec<Option<(f64, f64)>> = w
        .iter()
        .map(|&c| {
            if c.norm_sqr() == 0.0 {
                None
            } else {
                Some((c.norm().ln(), c.arg()))
            }
        })
        .collect();
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(spec.basis_len());
    let mut max_log = f64::NEG_INFINITY;
    'alpha: for (i, a) in spec.basis().iter().enumerate() {
        let mut log_mag = -spec.log_norm_sq()[i];
        let mut phase = 0.0f64;
        for (j, &aj) in a.alpha().iter().enumerate() {
            if aj == 0 {
                continue;
            }
            match (log_z[j], log_w[j]) {
                (Some((lz, pz)), Some((lw, pw))) => {
                    log_mag += aj as f64 * (lz + lw);
                    phase += aj as f64 * (pz - pw);
                }
                // a vanishing coordinate kills every monomial using it
                _ => continue 'alpha,
            }
        }
        if log_mag > max_log {
            max_log = log_mag;
        }
        terms.push((log_mag, phase));
    }
    if terms.is_empty() || max_log == f64::NEG_INFINITY {
        return KernelValue {
            value: C64::new(0.0, 0.0),
            log_scale: 0.0,
            n: spec.degree(),
            m,
        };
    }
    let mut acc = KahanSumC::<f64>::new();
    for (log_mag, phase) in terms {
        acc.add(C64::from_polar((log_mag - max_log).exp(), phase));
    }
    KernelValue {
        value: acc.value(),
        log_scale: max_log,
        n: spec.degree(),
        m,
    }
}

/// Kernel of the subspace spanned by monomials with exponents in the
/// `n`-fold dilation of `poly`, with norms taken at the ambient degree
/// `n * poly.degree()` (the smallest simplex containing the dilation).
pub fn kernel_conditional(
    poly: &LatticePolytope,
    n: u32,
    z: &[C64],
    w: &[C64],
) -> Result<KernelValue> {
    let ambient = (n as i64 * poly.degree()) as u32;
    if ambient == 0 {
        return Err(CoreError::EmptyBasis(
            "dilated polytope has degree zero".into(),
        ));
    }
    let spec = EnsembleSpec::constrained(poly.dim(), ambient, poly.dilate(n))?;
    Ok(kernel_for_spec(&spec, z, w))
}

/// Kernel of the limiting translation-invariant Gaussian field:
/// `exp(<u, v> - (|u|^2 + |v|^2)/2)`.
pub fn heisenberg_kernel(u: &[C64], v: &[C64]) -> C64 {
    let nu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    (dot_conj(u, v) - 0.5 * (nu + nv)).exp()
}

/// Deviation of the rescaled weighted kernel from its limit:
/// `| (m!/N^m) K_N^w(u/sqrt(N), v/sqrt(N)) - heisenberg(u, v) |`.
///
/// `K^w` is the kernel in the hermitian gauge,
/// `K (1+|z|^2)^{-N/2} (1+|w|^2)^{-N/2}`, at the base point `z0 = 0` of the
/// standard chart; the `m!/N^m` prefactor makes the limit exact under the
/// unit-mass normalization of the sphere measure used throughout.
pub fn scaled_kernel_error(m: usize, n: u32, u: &[C64], v: &[C64]) -> f64 {
    assert!((1..=3).contains(&m));
    let nf = n as f64;
    let root_n = nf.sqrt();
    let zu: Vec<C64> = u.iter().map(|&c| c / root_n).collect();
    let zv: Vec<C64> = v.iter().map(|&c| c / root_n).collect();
    let base = C64::new(1.0, 0.0) + dot_conj(&zu, &zv);
    let wu: f64 = 1.0 + zu.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let wv: f64 = 1.0 + zv.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let factorial_m = [1.0, 1.0, 2.0, 6.0][m];
    let prefactor = factorial_m / nf.powi(m as i32) * dimension_count(n, m);
    let scaled = prefactor * base.powu(n) * (wu * wv).powf(-(nf) / 2.0);
    (scaled - heisenberg_kernel(u, v)).norm()
}

/// Log of the unweighted kernel diagonal `ln K(z, z)`; `-inf` becomes an
/// error with a diagnostic.
pub fn log_kernel_diag(spec: &EnsembleSpec, z: &[C64]) -> Result<f64> {
    let k = kernel_for_spec(spec, z, z);
    let log = k.log_abs();
    if !log.is_finite() {
        return Err(CoreError::NonFinite(format!(
            "kernel diagonal vanished or overflowed at z = {z:?} (log = {log})"
        )));
    }
    Ok(log)
}

/// Expected zero density of the ensemble against chart Lebesgue measure,
/// via a 5-point second-difference Laplacian of the log-kernel diagonal per
/// complex coordinate with one Richardson extrapolation (steps `h`, `h/2`).
///
/// For `m = 1` this is the scalar density of the expected zero measure; for
/// `m >= 2` it is the trace density of the expected zero current of one
/// section.
pub fn expected_density(spec: &EnsembleSpec, z: &[C64], h: f64) -> Result<f64> {
    assert_eq!(z.len(), spec.dim());
    if !(1e-5..=1e-2).contains(&h) {
        return Err(CoreError::Unsupported(format!(
            "step h = {h} outside [1e-5, 1e-2]"
        )));
    }
    let lap = |step: f64| -> Result<f64> {
        let center = log_kernel_diag(spec, z)?;
        let mut total = KahanSum::<f64>::new();
        for j in 0..spec.dim() {
            for delta in [
                C64::new(step, 0.0),
                C64::new(-step, 0.0),
                C64::new(0.0, step),
                C64::new(0.0, -step),
            ] {
                let mut zz = z.to_vec();
                zz[j] += delta;
                total.add(log_kernel_diag(spec, &zz)?);
            }
            total.add(-4.0 * center);
        }
        Ok(total.value() / (step * step))
    };
    let d_h = lap(h)?;
    let d_h2 = lap(0.5 * h)?;
    let laplacian = (4.0 * d_h2 - d_h) / 3.0;
    Ok(laplacian / (4.0 * std::f64::consts::PI))
}

/// Density of the unit-mass volume form on the chart: for `m = 1`,
/// `(1/pi) (1 + |z|^2)^{-2}` against Lebesgue measure.
pub fn fubini_study_density(m: usize, z: &[C64]) -> f64 {
    let norm_sq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let factorial_m = [1.0, 1.0, 2.0, 6.0][m];
    factorial_m / std::f64::consts::PI.powi(m as i32) * (1.0 + norm_sq).powi(-(m as i32) - 1)
}

/// Covariance of values and chart gradients of the Gaussian section at a
/// tuple of points. Block order is point-major: for point `i`, row
/// `i (1 + m)` is the value and rows `i (1 + m) + 1 ..` the `m` partials.
#[derive(Clone, Debug)]
pub struct JetCovariance {
    pub points: Vec<Vec<C64>>,
    /// Hermitian PSD matrix of size `n_points * (1 + m)`, row-major.
    pub matrix: Vec<C64>,
    pub size: usize,
    /// Set when two evaluation points nearly coincide and the value block
    /// is close to singular.
    pub near_singular: bool,
}

pub fn jet_covariance(spec: &EnsembleSpec, points: &[Vec<C64>]) -> Result<JetCovariance> {
    let m = spec.dim();
    let np = points.len();
    if np == 0 {
        return Err(CoreError::Unsupported("no evaluation points".into()));
    }
    for p in points {
        if p.len() != m {
            return Err(CoreError::Unsupported(
                "evaluation point dimension mismatch".into(),
            ));
        }
    }
    let mut near_singular = false;
    for i in 0..np {
        for j in (i + 1)..np {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if d < 1e-6 {
                near_singular = true;
            }
        }
    }
    let q = np * (1 + m);
    let mut acc = vec![KahanSumC::<f64>::new(); q * q];
    let mut jet = vec![C64::new(0.0, 0.0); q];
    for (idx, a) in spec.basis().iter().enumerate() {
        let norm = spec.norms()[idx];
        for (pi, z) in points.iter().enumerate() {
            // e_alpha(z) and its m partial derivatives
            let mut val = C64::new(1.0, 0.0);
            for (j, &aj) in a.alpha().iter().enumerate() {
                val *= z[j].powu(aj);
            }
            val /= norm;
            jet[pi * (1 + m)] = val;
            for j in 0..m {
                let aj = a.alpha()[j];
                let d = if aj == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    let mut t = aj as f64 * z[j].powu(aj - 1);
                    for (k, &ak) in a.alpha().iter().enumerate() {
                        if k != j {
                            t *= z[k].powu(ak);
                        }
                    }
                    t / norm
                };
                jet[pi * (1 + m) + 1 + j] = d;
            }
        }
        for r in 0..q {
            for c in r..q {
                acc[r * q + c].add(jet[r] * jet[c].conj());
            }
        }
    }
    let mut matrix = vec![C64::new(0.0, 0.0); q * q];
    for r in 0..q {
        for c in r..q {
            let v = acc[r * q + c].value();
            matrix[r * q + c] = v;
            if c != r {
                matrix[c * q + r] = v.conj();
            } else {
                matrix[r * q + r] = C64::new(v.re, 0.0);
            }
        }
    }
    Ok(JetCovariance {
        points: points.to_vec(),
        matrix,
        size: q,
        near_singular,
    })
}
