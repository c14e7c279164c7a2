//! Aberth-Ehrlich simultaneous iteration: the independent all-roots pass
//! used to cross-check the companion-matrix route.

use crate::error::{CoreError, Result};
use crate::C64;

/// All roots of `c_0 + c_1 z + ... + c_d z^d` by simultaneous third-order
/// iteration. Requires nonzero leading and constant coefficients (strip
/// exact zeros first); independent of the QR solver by construction.
pub fn aberth_roots(coeffs: &[C64], max_iters: usize) -> Result<Vec<C64>> {
    let d = coeffs.len() - 1;
    assert!(d >= 1);
    let lead = coeffs[d];
    assert!(lead.norm_sqr() > 0.0);
    assert!(coeffs[0].norm_sqr() > 0.0, "strip zero roots first");

    // geometric-mean radius of the roots, with golden-angle spacing and a
    // slight spiral so no initial guess hits a symmetry axis
    let radius = (coeffs[0].norm() / lead.norm()).powf(1.0 / d as f64);
    let golden = 2.0 * std::f64::consts::PI * 0.381966011250105;
    let mut z: Vec<C64> = (0..d)
        .map(|i| {
            let angle = golden * i as f64 + 0.31;
            let r = radius * (1.0 + 0.05 * ((i % 7) as f64 - 3.0) / 7.0);
            C64::from_polar(r.max(1e-6), angle)
        })
        .collect();

    let deriv: Vec<C64> = (1..=d).map(|k| coeffs[k] * k as f64).collect();
    for _ in 0..max_iters {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let zi = z[i];
            let (p, scale) = super::eval_with_scale(coeffs, zi);
            if p.norm() <= 1e-16 * scale {
                continue;
            }
            let Some(newton) = super::newton_ratio(coeffs, &deriv, zi) else {
                // nudge off the critical point deterministically
                z[i] += C64::new(1e-8 * (1.0 + zi.norm()), 1e-8);
                max_step = f64::INFINITY;
                continue;
            };
            let mut sum = C64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let diff = zi - zj;
                    if diff.norm_sqr() == 0.0 {
                        continue;
                    }
                    sum += 1.0 / diff;
                }
            }
            let denom = C64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm_sqr() > 0.0 {
                newton / denom
            } else {
                newton
            };
            z[i] = zi - step;
            let rel = step.norm() / (1.0 + z[i].norm());
            if rel > max_step {
                max_step = rel;
            }
        }
        if max_step < 1e-13 {
            return Ok(z);
        }
    }
    Err(CoreError::SolverFailure(format!(
        "Aberth iteration did not converge within {max_iters} sweeps"
    )))
}
