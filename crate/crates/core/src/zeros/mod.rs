//! Certified zero sets of random sections.
//!
//! The univariate solver finds all `N` zeros of a degree-`N` section on the
//! projective line: companion-matrix eigenvalues, Newton polish, residual
//! certification, and exact bookkeeping of zeros at the origin and at
//! infinity so the total always matches the degree. The bivariate solver
//! eliminates one variable through a Sylvester resultant and refines the
//! reconstructed points with a joint Newton iteration.

pub mod aberth;
pub mod bivariate;
pub mod companion;

pub use aberth::aberth_roots;
pub use bivariate::{solve_system_2d, SolveOpts};

use crate::ensembles::SectionSample;
use crate::error::{CoreError, Result};
use crate::C64;

/// Relative residual threshold for a zero to count as certified.
pub const CERTIFY_TOL: f64 = 1e-8;

/// Cluster radius below which nearby roots merge into one with multiplicity.
pub const CLUSTER_TOL: f64 = 1e-9;

/// One certified zero in the affine chart.
#[derive(Clone, Debug)]
pub struct ChartZero {
    pub point: Vec<C64>,
    /// Certified relative residual of the section at the point.
    pub residual: f64,
    pub multiplicity: u32,
}

/// The full zero set of one sample: certified chart zeros plus the count on
/// the hyperplane at infinity.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub chart_zeros: Vec<ChartZero>,
    pub at_infinity: u32,
    /// Expected total with multiplicity; for the projective line this is the
    /// bundle degree `N`, for affine bivariate systems the number of
    /// certified affine zeros found.
    pub target_count: u32,
}

impl ZeroSet {
    /// Chart zeros counted with multiplicity.
    pub fn chart_multiplicity(&self) -> u32 {
        self.chart_zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Zeros (with multiplicity) whose points satisfy `predicate`.
    pub fn count_in<F: Fn(&[C64]) -> bool>(&self, predicate: F) -> u32 {
        self.chart_zeros
            .iter()
            .filter(|z| predicate(&z.point))
            .map(|z| z.multiplicity)
            .sum()
    }

    /// Zeros with every coordinate away from zero (the torus tally used by
    /// polytope counting; points on coordinate axes are excluded).
    pub fn count_in_torus(&self) -> u32 {
        self.count_in(|p| p.iter().all(|c| c.norm() > 1e-10))
    }

    /// CSV lines `re,im,residual,multiplicity` (first coordinate for
    /// multivariate points is followed by the remaining ones).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,residual,multiplicity\n");
        for z in &self.chart_zeros {
            for (i, c) in z.point.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                out.push_str(&format!("{:e},{:e}", c.re, c.im));
            }
            out.push_str(&format!(",{:e},{}\n", z.residual, z.multiplicity));
        }
        out
    }
}

/// Polynomial value together with the scale `sum_j |c_j| |z|^j`, both
/// computed through the reversed polynomial when `|z| > 1` so the relative
/// residual never overflows.
pub fn eval_with_scale(coeffs: &[C64], z: C64) -> (C64, f64) {
    let r = z.norm();
    if r <= 1.0 {
        let mut p = C64::new(0.0, 0.0);
        let mut s = 0.0f64;
        for &c in coeffs.iter().rev() {
            p = p * z + c;
            s = s * r + c.norm();
        }
        (p, s.max(f64::MIN_POSITIVE))
    } else {
        // p(z) = z^d q(1/z) with q the reversed polynomial; the common
        // factor |z|^d cancels in the relative residual, so scale it out
        let w = 1.0 / z;
        let rw = w.norm();
        let mut q = C64::new(0.0, 0.0);
        let mut s = 0.0f64;
        for &c in coeffs.iter() {
            q = q * w + c;
            s = s * rw + c.norm();
        }
        (q, s.max(f64::MIN_POSITIVE))
    }
}

/// Stable Newton ratio `p(z)/p'(z)`, using the reversed polynomial and the
/// logarithmic-derivative identity `p'/p = d/z - w^2 q'(w)/q(w)` (with
/// `w = 1/z`) outside the unit disk so nothing overflows. An exact root
/// yields a zero step; `None` marks a critical point where Newton stalls.
pub(crate) fn newton_ratio(coeffs: &[C64], deriv: &[C64], z: C64) -> Option<C64> {
    if z.norm() <= 1.0 {
        let p = horner(coeffs, z);
        if p.norm_sqr() == 0.0 {
            return Some(C64::new(0.0, 0.0));
        }
        let dp = horner(deriv, z);
        if dp.norm_sqr() == 0.0 {
            return None;
        }
        Some(p / dp)
    } else {
        let d = (coeffs.len() - 1) as f64;
        let w = 1.0 / z;
        let (q, dq) = horner_pair_reversed(coeffs, w);
        if q.norm_sqr() == 0.0 {
            return Some(C64::new(0.0, 0.0));
        }
        let ratio = d / z - dq / q * w * w;
        if ratio.norm_sqr() == 0.0 {
            return None;
        }
        Some(1.0 / ratio)
    }
}

/// Newton refinement of a simple root; returns the polished point.
pub(crate) fn newton_polish(coeffs: &[C64], deriv: &[C64], mut z: C64) -> C64 {
    for _ in 0..12 {
        let Some(step) = newton_ratio(coeffs, deriv, z) else {
            break;
        };
        let z_next = z - step;
        if (z_next - z).norm() <= 1e-16 * (1.0 + z.norm()) {
            return z_next;
        }
        z = z_next;
    }
    z
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Value and derivative of the reversed polynomial `q(w) = sum c_{d-k} w^k`.
fn horner_pair_reversed(coeffs: &[C64], w: C64) -> (C64, C64) {
    let mut q = C64::new(0.0, 0.0);
    let mut dq = C64::new(0.0, 0.0);
    for &c in coeffs.iter() {
        dq = dq * w + q;
        q = q * w + c;
    }
    (q, dq)
}

/// Merges points closer than [`CLUSTER_TOL`] into multiplicity clusters.
fn cluster_univariate(mut roots: Vec<(C64, f64)>) -> Vec<ChartZero> {
    roots.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    let mut out: Vec<ChartZero> = Vec::with_capacity(roots.len());
    'next: for (z, res) in roots {
        for existing in out.iter_mut() {
            if (existing.point[0] - z).norm() < CLUSTER_TOL * (1.0 + z.norm()) {
                existing.multiplicity += 1;
                existing.residual = existing.residual.max(res);
                continue 'next;
            }
        }
        out.push(ChartZero {
            point: vec![z],
            residual: res,
            multiplicity: 1,
        });
    }
    out
}

/// All zeros of a univariate section on the projective line.
///
/// Exact bookkeeping: coefficients that are exactly zero at the top of the
/// degree range become zeros at infinity, an exactly-zero tail becomes a
/// zero at the origin with multiplicity, and the remaining roots come from
/// the companion matrix followed by Newton polish. Every finite root must
/// certify `|p(z)| <= CERTIFY_TOL * sum |c_j||z|^j`, otherwise the solve
/// fails as a whole — roots are never dropped silently.
pub fn roots_cp1(sample: &SectionSample) -> Result<ZeroSet> {
    if sample.spec().dim() != 1 {
        return Err(CoreError::Unsupported("univariate solver needs m = 1".into()));
    }
    let n = sample.spec().degree();
    let coeffs = sample.chart_coeffs_univariate();
    roots_from_chart_coeffs(&coeffs, n)
}

/// Solver entry on raw chart coefficients (degree `n` bundle).
pub fn roots_from_chart_coeffs(coeffs: &[C64], n: u32) -> Result<ZeroSet> {
    assert_eq!(coeffs.len(), n as usize + 1);
    let top = coeffs.iter().rposition(|c| c.norm_sqr() != 0.0);
    let Some(top) = top else {
        return Err(CoreError::Degenerate("identically zero section".into()));
    };
    let at_infinity = n - top as u32;
    let bottom = coeffs.iter().position(|c| c.norm_sqr() != 0.0).unwrap();
    let mut chart: Vec<ChartZero> = Vec::new();
    if bottom > 0 {
        chart.push(ChartZero {
            point: vec![C64::new(0.0, 0.0)],
            residual: 0.0,
            multiplicity: bottom as u32,
        });
    }
    let reduced_degree = top - bottom;
    if reduced_degree > 0 {
        // scale to unit max coefficient for conditioning
        let max_mag = coeffs[bottom..=top]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        let reduced: Vec<C64> = coeffs[bottom..=top].iter().map(|c| c / max_mag).collect();
        let deriv: Vec<C64> = (1..reduced.len())
            .map(|k| reduced[k] * k as f64)
            .collect();
        let raw = companion::companion_roots(&reduced)?;
        let mut polished = Vec::with_capacity(raw.len());
        for z in raw {
            let z = newton_polish(&reduced, &deriv, z);
            let (p, scale) = eval_with_scale(&reduced, z);
            let rel = p.norm() / scale;
            if !(rel <= CERTIFY_TOL) || !z.is_finite() {
                return Err(CoreError::SolverFailure(format!(
                    "root at {z} failed certification: relative residual {rel:e}"
                )));
            }
            polished.push((z, rel));
        }
        chart.extend(cluster_univariate(polished));
    }
    let total: u32 = chart.iter().map(|z| z.multiplicity).sum::<u32>() + at_infinity;
    debug_assert_eq!(total, n);
    Ok(ZeroSet {
        chart_zeros: chart,
        at_infinity,
        target_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleSpec;
    use crate::polytopes::LatticePolytope;
    use crate::rng::trial_rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Sample whose chart polynomial has the given dense coefficients.
    fn sample_with_chart_coeffs(n: u32, chart: &[(usize, C64)]) -> SectionSample {
        let spec = EnsembleSpec::full(1, n).unwrap();
        let mut coeffs = vec![c(0.0, 0.0); n as usize + 1];
        for &(k, v) in chart {
            coeffs[k] = v * spec.norms()[k];
        }
        spec.sample_from_coeffs(coeffs).unwrap()
    }

    #[test]
    fn eighth_roots_of_unity() {
        let s = sample_with_chart_coeffs(8, &[(0, c(-1.0, 0.0)), (8, c(1.0, 0.0))]);
        let zs = roots_cp1(&s).unwrap();
        assert_eq!(zs.at_infinity, 0);
        assert_eq!(zs.chart_multiplicity(), 8);
        for z in &zs.chart_zeros {
            assert!((z.point[0].norm() - 1.0).abs() < 1e-10);
            assert!(z.residual < CERTIFY_TOL);
        }
        // all in the annulus 0.9 < |z| < 1.1
        let in_annulus = zs.count_in(|p| {
            let r = p[0].norm();
            r > 0.9 && r < 1.1
        });
        assert_eq!(in_annulus, 8);
        // whole chart
        assert_eq!(zs.count_in(|_| true), 8);
    }

    #[test]
    fn missing_top_coefficient_moves_zero_to_infinity() {
        // degree-5 bundle, polynomial of effective degree 3
        let s = sample_with_chart_coeffs(
            5,
            &[(0, c(1.0, 0.0)), (1, c(0.5, -1.0)), (3, c(0.25, 0.0))],
        );
        let zs = roots_cp1(&s).unwrap();
        assert_eq!(zs.at_infinity, 2);
        assert_eq!(zs.chart_multiplicity(), 3);
    }

    #[test]
    fn zero_constant_tail_is_exact_origin_zero() {
        // z^2 (z - 3) in a degree-4 bundle: 2 zeros at origin, one at 3,
        // one at infinity
        let s = sample_with_chart_coeffs(4, &[(2, c(-3.0, 0.0)), (3, c(1.0, 0.0))]);
        let zs = roots_cp1(&s).unwrap();
        assert_eq!(zs.at_infinity, 1);
        let origin = zs
            .chart_zeros
            .iter()
            .find(|z| z.point[0].norm() == 0.0)
            .unwrap();
        assert_eq!(origin.multiplicity, 2);
        assert_eq!(origin.residual, 0.0);
        assert_eq!(zs.count_in_torus(), 1);
    }

    #[test]
    fn identically_zero_sample_errors() {
        let spec = EnsembleSpec::full(1, 3).unwrap();
        let s = spec
            .sample_from_coeffs(vec![c(0.0, 0.0); 4])
            .unwrap();
        assert!(matches!(roots_cp1(&s), Err(CoreError::Degenerate(_))));
    }

    #[test]
    fn empty_zero_set_counts_zero() {
        let zs = ZeroSet {
            chart_zeros: vec![],
            at_infinity: 0,
            target_count: 0,
        };
        assert_eq!(zs.count_in(|_| true), 0);
    }

    #[test]
    fn random_degree_50_roots_all_certified_and_cross_checked() {
        let spec = EnsembleSpec::full(1, 50).unwrap();
        let s = spec.sample(&mut trial_rng(606, 0));
        let zs = roots_cp1(&s).unwrap();
        assert_eq!(zs.chart_multiplicity() + zs.at_infinity, 50);
        assert_eq!(zs.at_infinity, 0);
        let coeffs_for_scale = s.chart_coeffs_univariate();
        for z in &zs.chart_zeros {
            assert!(z.residual < CERTIFY_TOL);
            // residual of the actual section evaluation is consistent with
            // the certified relative residual
            let v = s.evaluate(&z.point);
            let r = z.point[0].norm();
            let scale: f64 = coeffs_for_scale
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * r + c.norm());
            assert!(v.norm() <= 10.0 * CERTIFY_TOL * scale);
        }
        // independent iterative pass agrees root-for-root
        let coeffs = s.chart_coeffs_univariate();
        let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let scaled: Vec<C64> = coeffs.iter().map(|c| c / max_mag).collect();
        let other = aberth_roots(&scaled, 500).unwrap();
        let mut used = vec![false; other.len()];
        for z in &zs.chart_zeros {
            let mut best = f64::INFINITY;
            let mut best_j = 0;
            for (j, w) in other.iter().enumerate() {
                if !used[j] {
                    let d = (z.point[0] - w).norm();
                    if d < best {
                        best = d;
                        best_j = j;
                    }
                }
            }
            used[best_j] = true;
            assert!(
                best < 1e-6 * (1.0 + z.point[0].norm()),
                "solver mismatch {best}"
            );
        }
    }

    #[test]
    fn fundamental_count_holds_across_degrees() {
        for (i, n) in [10u32, 55, 130, 400].iter().enumerate() {
            let spec = EnsembleSpec::full(1, *n).unwrap();
            let s = spec.sample(&mut trial_rng(707, i as u64));
            let zs = roots_cp1(&s).unwrap();
            assert_eq!(zs.chart_multiplicity() + zs.at_infinity, *n);
        }
    }

    #[test]
    fn constrained_sample_keeps_exact_origin_and_infinity_counts() {
        // exponents 2..6 in a degree-8 bundle: 2 origin zeros, 2 at infinity
        let poly = LatticePolytope::interval(2, 6).unwrap();
        let spec = EnsembleSpec::constrained(1, 8, poly).unwrap();
        let s = spec.sample(&mut trial_rng(808, 0));
        let zs = roots_cp1(&s).unwrap();
        assert_eq!(zs.at_infinity, 2);
        let origin = zs
            .chart_zeros
            .iter()
            .find(|z| z.point[0].norm() == 0.0)
            .unwrap();
        assert_eq!(origin.multiplicity, 2);
        assert_eq!(zs.chart_multiplicity() + zs.at_infinity, 8);
    }

    #[test]
    fn near_double_root_is_certified_with_exact_total() {
        // (z - 1)(z - 1 - 1e-10)(z + 1): a pair below solver resolution.
        // Whether it comes back merged or as two points split at the
        // sqrt(eps) scale, the total count must stay three, everything must
        // certify, and the cluster must sit within 1e-6 of the true pair.
        let root_set = [c(1.0, 0.0), c(1.0 + 1e-10, 0.0), c(-1.0, 0.0)];
        let mut poly = vec![c(1.0, 0.0)];
        for r in root_set {
            let mut next = vec![c(0.0, 0.0); poly.len() + 1];
            for (i, &pc) in poly.iter().enumerate() {
                next[i + 1] += pc;
                next[i] -= pc * r;
            }
            poly = next;
        }
        let zs = roots_from_chart_coeffs(&poly, 3).unwrap();
        assert_eq!(zs.chart_multiplicity(), 3);
        let near_one: u32 = zs
            .chart_zeros
            .iter()
            .filter(|z| (z.point[0] - c(1.0, 0.0)).norm() < 1e-6)
            .map(|z| z.multiplicity)
            .sum();
        assert_eq!(near_one, 2, "the close pair lost multiplicity");
        for z in &zs.chart_zeros {
            assert!(z.residual <= CERTIFY_TOL);
        }
    }

    #[test]
    fn newton_polish_restores_relative_accuracy_across_scales() {
        // (z - 1e-6)(z - 1)(z - 1e6) in a degree-3 bundle
        let r1 = 1e-6;
        let r3 = 1e6;
        let coeffs = [
            c(-r1 * r3, 0.0),
            c(r1 * r3 + r1 + r3, 0.0),
            c(-(1.0 + r1 + r3), 0.0),
            c(1.0, 0.0),
        ];
        let zs = roots_from_chart_coeffs(&coeffs, 3).unwrap();
        let mut pts: Vec<f64> = zs.chart_zeros.iter().map(|z| z.point[0].re).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((pts[0] - r1).abs() / r1 < 1e-10, "tiny root {:e}", pts[0]);
        assert!((pts[1] - 1.0).abs() < 1e-12);
        assert!((pts[2] - r3).abs() / r3 < 1e-12);
    }

    #[test]
    fn perturbation_stability_for_well_conditioned_roots() {
        // z^8 - 1 with coefficients perturbed by 1e-10
        let mut coeffs = vec![c(0.0, 0.0); 9];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[8] = c(1.0, 0.0);
        let base = roots_from_chart_coeffs(&coeffs, 8).unwrap();
        let mut perturbed = coeffs.clone();
        for (k, p) in perturbed.iter_mut().enumerate() {
            *p += c(1e-10 * (k as f64 - 3.0) / 8.0, 1e-10 * 0.4);
        }
        let moved = roots_from_chart_coeffs(&perturbed, 8).unwrap();
        for z in &base.chart_zeros {
            let nearest = moved
                .chart_zeros
                .iter()
                .map(|w| (w.point[0] - z.point[0]).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-6, "root moved by {nearest}");
        }
    }

    #[test]
    fn csv_shape() {
        let s = sample_with_chart_coeffs(2, &[(0, c(-1.0, 0.0)), (2, c(1.0, 0.0))]);
        let zs = roots_cp1(&s).unwrap();
        let csv = zs.to_csv();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines[0], "re,im,residual,multiplicity");
        assert_eq!(lines.len(), 1 + zs.chart_zeros.len());
    }
}
