//! The universal rescaled two-point function of simultaneous zeros, computed
//! from the limiting Gaussian field: condition the field and its gradients
//! on vanishing at two points, then average the squared Jacobian
//! determinants under the conditional law.
//!
//! For one complex dimension the conditional fourth moment collapses to a
//! closed form by the complex Wick identity; in dimensions two and three the
//! conditional expectation is sampled by Monte Carlo.

use crate::error::{CoreError, Result};
use crate::numeric::linalg::{cholesky, solve_in_place};
use crate::rng::{complex_standard_gaussian, trial_rng};
use crate::C64;

/// Two-point estimate with its Monte Carlo standard error (zero for the
/// closed-form path).
#[derive(Clone, Copy, Debug)]
pub struct KappaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub mc_samples: usize,
}

/// Small-distance power law of the two-point function:
/// `((m + 1) / 4) r^{4 - 2m}`.
pub fn kappa_asymptote(m: usize, r: f64) -> f64 {
    assert!((1..=3).contains(&m));
    assert!(r > 0.0);
    0.25 * (m as f64 + 1.0) * r.powi(4 - 2 * m as i32)
}

/// Covariance kernel of the limiting field in unweighted form `e^{<u, v>}`
/// (its zeros agree with the gauge-normalized field).
fn field_cov(u: &[C64], v: &[C64]) -> C64 {
    let mut dot = C64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b.conj();
    }
    dot.exp()
}

/// Gradient-of-kernel blocks for the limiting field:
/// `d/du_j C = conj(v_j) C`, `d/du_j d/dconj(v_k) C = (delta_jk + u_k conj(v_j)) C`.
fn field_cov_grad_value(u: &[C64], v: &[C64], j: usize) -> C64 {
    v[j].conj() * field_cov(u, v)
}

fn field_cov_grad_grad(u: &[C64], v: &[C64], j: usize, k: usize) -> C64 {
    let delta = if j == k { 1.0 } else { 0.0 };
    (delta + u[k] * v[j].conj()) * field_cov(u, v)
}

/// Conditional covariance of the gradients at `points` given that the field
/// vanishes at every point: the Schur complement `G - B A^{-1} B^H` of the
/// value block. Also returns `det A` (real positive for distinct points).
pub fn heisenberg_conditional_gradient_covariance(
    points: &[Vec<C64>],
) -> Result<(Vec<C64>, f64)> {
    let n = points.len();
    let m = points[0].len();
    let q = n * m;
    // value covariance A
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = field_cov(&points[i], &points[j]);
        }
    }
    // det A via the same LU used for the solves
    let (det_a, _) = crate::numeric::linalg::det(a.clone(), n);
    if det_a.re <= 0.0 || det_a.norm() < 1e-300 {
        return Err(CoreError::Conditioning(
            "value covariance numerically singular".into(),
        ));
    }
    // B[(p, j), b] = E[d_j f(z^p) conj(f(z^b))]
    let mut b = vec![C64::new(0.0, 0.0); q * n];
    for p in 0..n {
        for j in 0..m {
            for col in 0..n {
                b[(p * m + j) * n + col] = field_cov_grad_value(&points[p], &points[col], j);
            }
        }
    }
    // G[(p, j), (s, k)]
    let mut g = vec![C64::new(0.0, 0.0); q * q];
    for p in 0..n {
        for j in 0..m {
            for s in 0..n {
                for k in 0..m {
                    g[(p * m + j) * q + (s * m + k)] =
                        field_cov_grad_grad(&points[p], &points[s], j, k);
                }
            }
        }
    }
    // Schur complement: for each row r of B solve A x = B[r]^H, i.e.
    // lambda = G - B A^{-1} B^H computed columnwise
    let mut lambda = g;
    for r in 0..q {
        // solve A y = conj(B[s][.]) for each s lazily: instead compute
        // w = A^{-1} b_r where b_r is the r-th row of B as a column
        let mut a_copy = a.clone();
        let mut rhs: Vec<C64> = (0..n).map(|col| b[r * n + col]).collect();
        solve_in_place(&mut a_copy, &mut rhs, n)?;
        // lambda[r][s] -= sum_col rhs[col] * conj(B[s][col])
        for s in 0..q {
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..n {
                acc += rhs[col] * b[s * n + col].conj();
            }
            lambda[r * q + s] -= acc;
        }
    }
    // exact hermitization against rounding
    for r in 0..q {
        for s in (r + 1)..q {
            let avg = 0.5 * (lambda[r * q + s] + lambda[s * q + r].conj());
            lambda[r * q + s] = avg;
            lambda[s * q + r] = avg.conj();
        }
        lambda[r * q + r] = C64::new(lambda[r * q + r].re, 0.0);
    }
    Ok((lambda, det_a.re))
}

fn det_small(m: usize, a: &[C64]) -> C64 {
    match m {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => unreachable!(),
    }
}

/// Universal two-point function `kappa_mm(r)` of the rescaled zero process.
///
/// Closed form for `m = 1`; conditional-Gaussian Monte Carlo with
/// `mc_samples` draws for `m = 2, 3`. Distances below `1e-3` are refused:
/// the value block becomes numerically singular there and a regularized
/// answer would fabricate the small-distance behavior.
pub fn kappa_kacrice(m: usize, r: f64, mc_samples: usize, seed: u64) -> Result<KappaEstimate> {
    if !(1..=3).contains(&m) {
        return Err(CoreError::Unsupported(format!("m = {m} outside 1..=3")));
    }
    if r < 1e-3 {
        return Err(CoreError::Conditioning(format!(
            "separation r = {r} below the conditioning floor 1e-3"
        )));
    }
    let points = vec![
        vec![C64::new(0.0, 0.0); m],
        {
            let mut p = vec![C64::new(0.0, 0.0); m];
            p[0] = C64::new(r, 0.0);
            p
        },
    ];
    let (lambda, det_a) = heisenberg_conditional_gradient_covariance(&points)?;
    let q = 2 * m;
    let factorial_m = [1.0f64, 1.0, 2.0, 6.0][m];
    let norm = det_a.powi(m as i32) * factorial_m * factorial_m;

    if m == 1 {
        // complex Wick identity: E|x|^2|y|^2 = L11 L22 + |L12|^2
        let l11 = lambda[0].re;
        let l22 = lambda[3].re;
        let l12 = lambda[1];
        let fourth = l11 * l22 + l12.norm_sqr();
        return Ok(KappaEstimate {
            value: fourth / norm,
            stderr: 0.0,
            mc_samples: 0,
        });
    }

    kappa_monte_carlo(m, &lambda, q, norm, mc_samples, seed)
}

/// Monte Carlo over the conditional Gaussian; exposed separately so the
/// `m = 1` sampling route can be validated against the closed form.
pub(crate) fn kappa_monte_carlo(
    m: usize,
    lambda: &[C64],
    q: usize,
    norm: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<KappaEstimate> {
    if mc_samples == 0 {
        return Err(CoreError::Unsupported(
            "Monte Carlo route needs mc_samples > 0".into(),
        ));
    }
    let chol = cholesky(lambda, q, 1e-9)?;
    let mut rng = trial_rng(seed, 0);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut gauss = vec![C64::new(0.0, 0.0); q];
    let mut xi = vec![C64::new(0.0, 0.0); q];
    let mut m1 = vec![C64::new(0.0, 0.0); m * m];
    let mut m2 = vec![C64::new(0.0, 0.0); m * m];
    for _ in 0..mc_samples {
        // the m field copies are independent with the same covariance
        for field in 0..m {
            for g in gauss.iter_mut() {
                *g = complex_standard_gaussian(&mut rng);
            }
            for row in 0..q {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..=row {
                    acc += chol[row * q + k] * gauss[k];
                }
                xi[row] = acc;
            }
            for j in 0..m {
                m1[field * m + j] = xi[j];
                m2[field * m + j] = xi[m + j];
            }
        }
        let d1 = det_small(m, &m1);
        let d2 = det_small(m, &m2);
        let v = d1.norm_sqr() * d2.norm_sqr();
        sum += v;
        sum_sq += v * v;
    }
    let nn = mc_samples as f64;
    let mean = sum / nn;
    let var = (sum_sq / nn - mean * mean).max(0.0) / nn;
    Ok(KappaEstimate {
        value: mean / norm,
        stderr: var.sqrt() / norm,
        mc_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymptote_values() {
        assert!((kappa_asymptote(1, 0.2) - 0.02).abs() < 1e-15);
        for r in [0.01, 0.5, 2.0] {
            assert!((kappa_asymptote(2, r) - 0.75).abs() < 1e-15);
        }
        assert!((kappa_asymptote(3, 0.1) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_tiny_separation() {
        assert!(matches!(
            kappa_kacrice(1, 5e-4, 0, 0),
            Err(CoreError::Conditioning(_))
        ));
    }

    #[test]
    fn closed_form_small_r_matches_asymptote() {
        for r in [0.02f64, 0.05] {
            let k = kappa_kacrice(1, r, 0, 0).unwrap();
            let a = kappa_asymptote(1, r);
            assert!(
                (k.value / a - 1.0).abs() < 0.01,
                "r = {r}: kappa = {}, asymptote = {a}",
                k.value
            );
        }
    }

    #[test]
    fn closed_form_large_r_decorrelates() {
        let k3 = kappa_kacrice(1, 3.0, 0, 0).unwrap();
        assert!((k3.value - 1.0).abs() < 0.02, "kappa(3) = {}", k3.value);
        let k4 = kappa_kacrice(1, 4.0, 0, 0).unwrap();
        assert!((k4.value - 1.0).abs() < 1e-4, "kappa(4) = {}", k4.value);
        // repulsion regime below one
        let k_small = kappa_kacrice(1, 0.1, 0, 0).unwrap();
        assert!(k_small.value < 1.0);
    }

    #[test]
    fn monte_carlo_route_agrees_with_closed_form_m1() {
        // the sampling machinery run at m = 1 against the exact answer
        for r in [0.3f64, 1.0, 2.5] {
            let exact = kappa_kacrice(1, r, 0, 0).unwrap().value;
            let points = vec![
                vec![C64::new(0.0, 0.0)],
                vec![C64::new(r, 0.0)],
            ];
            let (lambda, det_a) = heisenberg_conditional_gradient_covariance(&points).unwrap();
            let mc = kappa_monte_carlo(1, &lambda, 2, det_a, 400_000, 42).unwrap();
            let dev = (mc.value - exact).abs();
            assert!(
                dev < 4.0 * mc.stderr.max(1e-4),
                "r = {r}: mc = {} +- {}, exact = {exact}",
                mc.value,
                mc.stderr
            );
        }
    }

    #[test]
    fn neutral_plateau_in_dimension_two() {
        let k = kappa_kacrice(2, 0.05, 200_000, 7).unwrap();
        assert!(
            (k.value - 0.75).abs() < 4.0 * k.stderr.max(0.01),
            "kappa_22(0.05) = {} +- {}",
            k.value,
            k.stderr
        );
        let k4 = kappa_kacrice(2, 4.0, 100_000, 8).unwrap();
        assert!((k4.value - 1.0).abs() < 4.0 * k4.stderr.max(0.01));
    }

    #[test]
    fn attraction_in_dimension_three() {
        let k = kappa_kacrice(3, 0.1, 100_000, 9).unwrap();
        assert!(k.value > 10.0, "kappa_33(0.1) = {}", k.value);
        // inverse-square growth: halving r quadruples kappa
        let k2 = kappa_kacrice(3, 0.05, 100_000, 10).unwrap();
        let ratio = k2.value / k.value;
        assert!(
            (ratio / 4.0 - 1.0).abs() < 0.25,
            "ratio {ratio} not near 4"
        );
    }

    #[test]
    fn decorrelation_at_distance_four_in_every_dimension() {
        let k1 = kappa_kacrice(1, 4.0, 0, 0).unwrap();
        assert!((k1.value - 1.0).abs() < 1e-4);
        for (m, seed) in [(2usize, 21u64), (3, 22)] {
            let k = kappa_kacrice(m, 4.0, 150_000, seed).unwrap();
            assert!(
                (k.value - 1.0).abs() < 3.0 * k.stderr.max(0.01),
                "m = {m}: kappa(4) = {} +- {}",
                k.value,
                k.stderr
            );
        }
    }

    #[test]
    fn one_point_intensity_is_translation_invariant() {
        // K1 computed from the same machinery at two base points
        let k1_at = |u: C64| {
            let points = vec![vec![u]];
            let (lambda, det_a) =
                heisenberg_conditional_gradient_covariance(&points).unwrap();
            // m = 1: E|det|^2 = lambda
            lambda[0].re / (std::f64::consts::PI * det_a)
        };
        let a = k1_at(C64::new(0.0, 0.0));
        let b = k1_at(C64::new(1.3, -0.4));
        assert!((a - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((a - b).abs() < 1e-9);
    }
}
