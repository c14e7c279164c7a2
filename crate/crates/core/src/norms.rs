//! `L^p` and sup norms of random sections on the projective line, and their
//! growth in the degree.
//!
//! Norms use the pointwise hermitian magnitude `|s|_h(z) = |s(z)| (1 +
//! |z|^2)^{-N/2}` — the section norm, which stays bounded at infinity —
//! integrated against the unit-mass invariant volume form. In the
//! coordinates `(t, theta)` with `t = r^2/(1+r^2)` that form is uniform on
//! `[0, 1] x [0, 2pi)`, so a Gauss-Legendre radial rule crossed with a
//! uniform angular grid integrates trigonometric content exactly.

use crate::ensembles::SectionSample;
use crate::error::{CoreError, Result};
use crate::numeric::quad::GaussLegendre;
use crate::rng::trial_rng;
use crate::C64;
use rayon::prelude::*;

/// Norm exponent: finite `p >= 2` or the sup norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn validate(&self) -> Result<()> {
        match self {
            LpExponent::Finite(p) if *p >= 2.0 => Ok(()),
            LpExponent::Finite(p) => Err(CoreError::Unsupported(format!(
                "exponent p = {p} below 2"
            ))),
            LpExponent::Infinity => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LpExponent::Finite(p) => format!("{p}"),
            LpExponent::Infinity => "inf".into(),
        }
    }
}

/// Product quadrature resolution in the `(t, theta)` coordinates.
#[derive(Clone, Copy, Debug)]
pub struct PolarQuadrature {
    pub radial: usize,
    pub angular: usize,
}

impl PolarQuadrature {
    /// Resolution matched to the `1/sqrt(N)` feature scale of degree-`N`
    /// sections, with a floor for low degrees. Angular counts are powers of
    /// two (the sweep runs through an FFT).
    pub fn auto(n: u32) -> Self {
        let side = ((n as f64).sqrt() * 8.0).ceil() as usize;
        PolarQuadrature {
            radial: side.max(48),
            angular: side.max(64).next_power_of_two(),
        }
    }

    fn doubled(&self) -> Self {
        PolarQuadrature {
            radial: self.radial * 2,
            angular: self.angular * 2,
        }
    }
}

/// Hermitian magnitudes of the chart polynomial on the full angular grid at
/// one radius: the weighted coefficients `c_a (r w0)^a w0^{N-a}` are folded
/// modulo the grid size and transformed, costing `O(N + M log M)` instead of
/// `O(N M)`.
fn hermitian_magnitudes_at_radius(
    coeffs: &[C64],
    n: u32,
    t: f64,
    angular: usize,
    out: &mut Vec<f64>,
) {
    let m = angular.next_power_of_two();
    let t = t.clamp(0.0, 1.0 - 1e-15);
    // f_a = (sqrt t)^a (sqrt(1-t))^{N-a}; both factor tables stay in [0, 1]
    let th = t.sqrt();
    let wh = (1.0 - t).sqrt();
    let mut folded = vec![C64::new(0.0, 0.0); m];
    let mut t_pow = 1.0f64;
    let nn = n as usize;
    let mut w_pows = vec![0.0f64; nn + 1];
    w_pows[0] = 1.0;
    for k in 1..=nn {
        w_pows[k] = w_pows[k - 1] * wh;
    }
    for a in 0..=nn {
        folded[a & (m - 1)] += coeffs[a] * (t_pow * w_pows[nn - a]);
        t_pow *= th;
    }
    crate::numeric::fft::fft_pow2_positive(&mut folded);
    out.clear();
    out.extend(folded.iter().map(|v| v.norm()));
}

/// `(integral of |s|_h^p dV)` over the band `t in [t_lo, t_hi]` on the given
/// grid, unnormalized.
fn integrate_power(
    coeffs: &[C64],
    n: u32,
    p: f64,
    quad: &PolarQuadrature,
    band: (f64, f64),
) -> f64 {
    let gl = GaussLegendre::new(quad.radial);
    let mut mags = Vec::with_capacity(quad.angular);
    let mut total = 0.0f64;
    for (t, wt) in gl.mapped(band.0, band.1) {
        hermitian_magnitudes_at_radius(coeffs, n, t, quad.angular, &mut mags);
        let mean_theta: f64 =
            mags.iter().map(|m| m.powf(p)).sum::<f64>() / mags.len() as f64;
        total += wt * mean_theta;
    }
    total
}

fn l2_norm_on(coeffs: &[C64], n: u32, quad: &PolarQuadrature) -> f64 {
    integrate_power(coeffs, n, 2.0, quad, (0.0, 1.0)).sqrt()
}

/// `L^p` norm of the `L^2`-normalized section; for `p = infinity` the sup of
/// the normalized hermitian magnitude located by a grid scan plus local
/// ascent.
///
/// Every quadrature-backed value is recomputed on a doubled grid; a relative
/// change above `1e-3` raises a resolution error instead of returning a
/// suspect number.
pub fn lp_norm(sample: &SectionSample, p: LpExponent, quad: &PolarQuadrature) -> Result<f64> {
    p.validate()?;
    if sample.spec().dim() != 1 {
        return Err(CoreError::Unsupported("norms implemented for m = 1".into()));
    }
    let n = sample.spec().degree();
    let coeffs = sample.chart_coeffs_univariate();
    let l2 = l2_norm_on(&coeffs, n, quad);
    if !(l2 > 0.0) {
        return Err(CoreError::Degenerate("zero section has no norms".into()));
    }
    match p {
        LpExponent::Finite(p) => {
            let coarse = integrate_power(&coeffs, n, p, quad, (0.0, 1.0)).powf(1.0 / p);
            let fine_quad = quad.doubled();
            let l2_fine = l2_norm_on(&coeffs, n, &fine_quad);
            let fine = integrate_power(&coeffs, n, p, &fine_quad, (0.0, 1.0)).powf(1.0 / p);
            let coarse_val = coarse / l2;
            let fine_val = fine / l2_fine;
            if (coarse_val - fine_val).abs() > 1e-3 * fine_val {
                return Err(CoreError::Resolution(format!(
                    "L^{p} norm moved from {coarse_val} to {fine_val} on grid doubling"
                )));
            }
            Ok(fine_val)
        }
        LpExponent::Infinity => {
            let sup = sup_hermitian_magnitude(&coeffs, n);
            Ok(sup / l2)
        }
    }
}

/// `L^p` norm restricted to the spherical band `t in [t_lo, t_hi]` of the
/// `L^2`-normalized section (used by the rotation-invariance checks).
pub fn lp_norm_on_band(
    sample: &SectionSample,
    p: f64,
    quad: &PolarQuadrature,
    band: (f64, f64),
) -> Result<f64> {
    if sample.spec().dim() != 1 {
        return Err(CoreError::Unsupported("norms implemented for m = 1".into()));
    }
    let n = sample.spec().degree();
    let coeffs = sample.chart_coeffs_univariate();
    let l2 = l2_norm_on(&coeffs, n, quad);
    Ok(integrate_power(&coeffs, n, p, quad, band).powf(1.0 / p) / l2)
}

/// Grid scan for the peak of `|s|_h`, then gradient ascent from the best
/// cells. The grid side scales as `max(512, 8 sqrt(N))`: random peaks have
/// width `~1/sqrt(N)`.
fn sup_hermitian_magnitude(coeffs: &[C64], n: u32) -> f64 {
    let side = (8.0 * (n as f64).sqrt()).ceil().max(512.0) as usize;
    let mut best: Vec<(f64, C64)> = Vec::new(); // (magnitude, z)
    let mut mags = Vec::with_capacity(side.next_power_of_two());
    for ti in 0..side {
        let t = (ti as f64 + 0.5) / side as f64;
        hermitian_magnitudes_at_radius(coeffs, n, t, side, &mut mags);
        let r = (t / (1.0 - t)).sqrt();
        let m_count = mags.len();
        for (k, &m) in mags.iter().enumerate() {
            if best.len() < 10 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m_count as f64;
                best.push((m, C64::from_polar(r, theta)));
                best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            } else if m > best[9].0 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m_count as f64;
                best[9] = (m, C64::from_polar(r, theta));
                best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            }
        }
    }
    let deriv: Vec<C64> = (1..coeffs.len()).map(|k| coeffs[k] * k as f64).collect();
    let mut sup = best.first().map(|b| b.0).unwrap_or(0.0);
    for &(m0, z0) in &best {
        let refined = ascend_log_magnitude(coeffs, &deriv, n, z0, m0);
        if refined > sup {
            sup = refined;
        }
    }
    sup
}

/// Backtracking gradient ascent on `log |s|_h^2`; the complex gradient is
/// `s'/s - N conj(z) / (1 + |z|^2)`.
fn ascend_log_magnitude(coeffs: &[C64], deriv: &[C64], n: u32, mut z: C64, mut val: f64) -> f64 {
    // pointwise |s|_h by the same two-scale recurrence the grids use
    let eval = |z: C64| -> f64 {
        let w0 = 1.0 / (1.0 + z.norm_sqr()).sqrt();
        let tc = z * w0;
        let mut acc = coeffs[n as usize];
        let mut f = 1.0f64;
        for a in (0..n as usize).rev() {
            f *= w0;
            acc = acc * tc + coeffs[a] * f;
        }
        acc.norm()
    };
    let mut step = 0.25 / (n as f64);
    for _ in 0..60 {
        let p = horner(coeffs, z);
        if p.norm_sqr() == 0.0 {
            break;
        }
        let dp = horner(deriv, z);
        let g = dp / p - (n as f64) * z.conj() / (1.0 + z.norm_sqr());
        if g.norm() * step < 1e-14 * (1.0 + z.norm()) {
            break;
        }
        let z_try = z + step * g.conj();
        let v_try = eval(z_try);
        if v_try > val {
            z = z_try;
            val = v_try;
            step *= 1.3;
        } else {
            step *= 0.4;
        }
    }
    val
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Mean norm against degree with standard errors.
#[derive(Clone, Debug)]
pub struct NormSeries {
    pub degrees: Vec<u32>,
    pub p: LpExponent,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub trials: u64,
}

impl NormSeries {
    /// CSV: `N,p,mean,stderr,trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,p,mean,stderr,trials\n");
        for (i, &n) in self.degrees.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                n,
                self.p.label(),
                self.means[i],
                self.stderrs[i],
                self.trials
            ));
        }
        out
    }
}

/// Mean `L^p` norm of the normalized ensemble per degree. Degrees must be
/// increasing within `[16, 1024]`; deterministic per master seed.
pub fn growth_series(
    degrees: &[u32],
    trials: u64,
    p: LpExponent,
    master_seed: u64,
) -> Result<NormSeries> {
    p.validate()?;
    if degrees.is_empty() || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Unsupported(
            "degrees must be strictly increasing".into(),
        ));
    }
    if degrees[0] < 16 || *degrees.last().unwrap() > 1024 {
        return Err(CoreError::Unsupported(
            "degrees must lie in [16, 1024]".into(),
        ));
    }
    let mut means = Vec::with_capacity(degrees.len());
    let mut stderrs = Vec::with_capacity(degrees.len());
    for (di, &n) in degrees.iter().enumerate() {
        let spec = crate::ensembles::EnsembleSpec::full(1, n)?;
        let quad = PolarQuadrature::auto(n);
        let values: Result<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                // separate stream per (degree, trial)
                let mut rng = trial_rng(master_seed ^ ((di as u64 + 1) << 32), t);
                let s = spec.sample(&mut rng);
                lp_norm(&s, p, &quad)
            })
            .collect();
        let values = values?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (values.len().max(2) - 1) as f64;
        means.push(mean);
        stderrs.push((var / values.len() as f64).sqrt());
    }
    Ok(NormSeries {
        degrees: degrees.to_vec(),
        p,
        means,
        stderrs,
        trials,
    })
}
