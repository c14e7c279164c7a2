//! Simultaneous zeros of a pair of bivariate polynomials by resultant
//! elimination: evaluate the Sylvester determinant at roots of unity,
//! interpolate the eliminant, solve it, back-substitute, then certify each
//! reconstructed point with a joint Newton refinement on the pair.
//!
//! Ill-conditioned Sylvester systems (pivot-ratio estimate above the
//! configured threshold) are recomputed in double-double precision.

use super::{companion, ChartZero, ZeroSet, CERTIFY_TOL};
use crate::ensembles::SectionSample;
use crate::error::{CoreError, Result};
use crate::numeric::linalg::lu_in_place;
use crate::numeric::{Dd, Real};
use crate::C64;
use num_complex::Complex;

#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    /// Cap on the total effective degree of each input polynomial.
    pub max_degree: u32,
    /// Relative residual required of each certified zero.
    pub residual_tol: f64,
    /// Pivot-ratio estimate above which the Sylvester determinants are
    /// recomputed in extended precision.
    pub cond_threshold: f64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            max_degree: 12,
            residual_tol: CERTIFY_TOL,
            cond_threshold: 1e10,
        }
    }
}

/// Dense bivariate coefficient grid: `grid[i][j]` multiplies `z1^i z2^j`.
type Grid = Vec<Vec<C64>>;

fn total_effective_degree(grid: &Grid) -> u32 {
    let mut deg = 0u32;
    for (i, row) in grid.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if c.norm_sqr() != 0.0 {
                deg = deg.max((i + j) as u32);
            }
        }
    }
    deg
}

fn degree_z2(grid: &Grid) -> usize {
    let mut d = 0usize;
    for row in grid {
        for (j, c) in row.iter().enumerate() {
            if c.norm_sqr() != 0.0 {
                d = d.max(j);
            }
        }
    }
    d
}

fn degree_z1(grid: &Grid) -> usize {
    let mut d = 0usize;
    for (i, row) in grid.iter().enumerate() {
        if row.iter().any(|c| c.norm_sqr() != 0.0) {
            d = d.max(i);
        }
    }
    d
}

/// Value and both partial derivatives by nested Horner.
fn eval_grid(grid: &Grid, z1: C64, z2: C64) -> (C64, C64, C64) {
    // inner polynomials in z2 per z1-power, combined by Horner in z1
    let mut v = C64::new(0.0, 0.0);
    let mut d1 = C64::new(0.0, 0.0);
    let mut d2 = C64::new(0.0, 0.0);
    for row in grid.iter().rev() {
        // evaluate row polynomial in z2 and its derivative
        let mut rv = C64::new(0.0, 0.0);
        let mut rd = C64::new(0.0, 0.0);
        for &c in row.iter().rev() {
            rd = rd * z2 + rv;
            rv = rv * z2 + c;
        }
        d1 = d1 * z1 + v;
        v = v * z1 + rv;
        d2 = d2 * z1 + rd;
    }
    (v, d1, d2)
}

/// `sum |c_ij| |z1|^i |z2|^j`, the local scale for relative residuals.
fn scale_grid(grid: &Grid, z1: C64, z2: C64) -> f64 {
    let r1 = z1.norm();
    let r2 = z2.norm();
    let mut s = 0.0f64;
    for row in grid.iter().rev() {
        let mut rs = 0.0f64;
        for c in row.iter().rev() {
            rs = rs * r2 + c.norm();
        }
        s = s * r1 + rs;
    }
    s.max(f64::MIN_POSITIVE)
}

/// Coefficients (in `z2`) of the polynomial at fixed `z1 = x`, generic in
/// the scalar for the extended-precision route.
fn z2_coeffs_at<R: Real>(grid: &Grid, x: Complex<R>, d2: usize) -> Vec<Complex<R>> {
    let mut out = vec![Complex::new(R::zero(), R::zero()); d2 + 1];
    for j in 0..=d2 {
        let mut acc = Complex::new(R::zero(), R::zero());
        for row in grid.iter().rev() {
            let c = row.get(j).copied().unwrap_or_else(|| C64::new(0.0, 0.0));
            acc = acc * x + Complex::new(R::from_f64(c.re), R::from_f64(c.im));
        }
        out[j] = acc;
    }
    out
}

/// Sylvester determinant of the two `z2`-polynomials, plus a pivot-ratio
/// condition estimate and the Hadamard row bound for degeneracy detection.
fn sylvester_det<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> (Complex<R>, R, R) {
    let da = a.len() - 1;
    let db = b.len() - 1;
    let s = da + db;
    if s == 0 {
        return (Complex::new(R::one(), R::zero()), R::one(), R::one());
    }
    let zero = Complex::new(R::zero(), R::zero());
    let mut m = vec![zero; s * s];
    for i in 0..db {
        for (k, &c) in a.iter().enumerate() {
            m[i * s + (i + (da - k))] = c;
        }
    }
    for i in 0..da {
        for (k, &c) in b.iter().enumerate() {
            m[(db + i) * s + (i + (db - k))] = c;
        }
    }
    // Hadamard bound: product of row 2-norms
    let mut hadamard = R::one();
    for i in 0..s {
        let mut row = R::zero();
        for j in 0..s {
            let e = m[i * s + j];
            row = row + e.re * e.re + e.im * e.im;
        }
        hadamard = hadamard * row.sqrt();
    }
    match lu_in_place(&mut m, s) {
        Ok(info) => {
            let mut det = Complex::new(R::one(), R::zero());
            for k in 0..s {
                det = det * m[k * s + k];
            }
            if info.parity {
                det = -det;
            }
            (det, info.condition_estimate(), hadamard)
        }
        Err(_) => (zero, R::one() / R::eps(), hadamard),
    }
}

/// Coefficients of the resultant `Res_{z2}(f, g)` as a polynomial in `z1`,
/// by evaluation at roots of unity and inverse discrete Fourier transform.
fn resultant_coeffs(f: &Grid, g: &Grid, opts: &SolveOpts) -> Result<Vec<C64>> {
    let d2f = degree_z2(f);
    let d2g = degree_z2(g);
    if d2f == 0 && d2g == 0 {
        return Err(CoreError::Degenerate(
            "neither polynomial involves the second variable".into(),
        ));
    }
    let d1f = degree_z1(f);
    let d1g = degree_z1(g);
    let bound = d1f * d2g + d1g * d2f;
    let nodes = bound + 1;
    let mut values = vec![C64::new(0.0, 0.0); nodes];
    let mut worst_cond = 0.0f64;
    let mut max_ratio = 0.0f64; // |det| / hadamard, for degeneracy detection
    for (t, value) in values.iter_mut().enumerate() {
        let x = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / nodes as f64);
        let a = z2_coeffs_at::<f64>(f, x, d2f);
        let b = z2_coeffs_at::<f64>(g, x, d2g);
        let (det, cond, hadamard) = sylvester_det(&a, &b);
        *value = det;
        worst_cond = worst_cond.max(cond);
        if hadamard > 0.0 {
            max_ratio = max_ratio.max(det.norm() / hadamard);
        }
    }
    if max_ratio < 1e-13 {
        return Err(CoreError::Degenerate(
            "resultant vanishes identically: the pair shares a component".into(),
        ));
    }
    if worst_cond > opts.cond_threshold {
        // ill-conditioned elimination: redo every determinant in
        // double-double precision
        for (t, value) in values.iter_mut().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * t as f64 / nodes as f64;
            let x = Complex::new(Dd::from_f64(theta.cos()), Dd::from_f64(theta.sin()));
            let a = z2_coeffs_at::<Dd>(f, x, d2f);
            let b = z2_coeffs_at::<Dd>(g, x, d2g);
            let (det, _, _) = sylvester_det(&a, &b);
            *value = C64::new(det.re.to_f64(), det.im.to_f64());
        }
    }
    // inverse DFT
    let mut coeffs = vec![C64::new(0.0, 0.0); nodes];
    for (k, coeff) in coeffs.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (t, v) in values.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (k * t % nodes) as f64 / nodes as f64;
            acc += v * C64::from_polar(1.0, angle);
        }
        *coeff = acc / nodes as f64;
    }
    Ok(coeffs)
}

/// Joint Newton refinement of `(f, g)` from the seed; returns the refined
/// point and its worst relative residual.
fn newton_joint(f: &Grid, g: &Grid, mut z1: C64, mut z2: C64) -> (C64, C64, f64) {
    let mut best = f64::INFINITY;
    for _ in 0..25 {
        let (fv, f1, f2) = eval_grid(f, z1, z2);
        let (gv, g1, g2) = eval_grid(g, z1, z2);
        let rf = fv.norm() / scale_grid(f, z1, z2);
        let rg = gv.norm() / scale_grid(g, z1, z2);
        best = best.min(rf.max(rg));
        let det = f1 * g2 - f2 * g1;
        if det.norm_sqr() == 0.0 {
            break;
        }
        let dz1 = (fv * g2 - f2 * gv) / det;
        let dz2 = (f1 * gv - fv * g1) / det;
        z1 -= dz1;
        z2 -= dz2;
        if dz1.norm() + dz2.norm() <= 1e-15 * (1.0 + z1.norm() + z2.norm()) {
            break;
        }
    }
    let (fv, _, _) = eval_grid(f, z1, z2);
    let (gv, _, _) = eval_grid(g, z1, z2);
    let rel = (fv.norm() / scale_grid(f, z1, z2)).max(gv.norm() / scale_grid(g, z1, z2));
    (z1, z2, rel.min(best))
}

/// All isolated common zeros of the pair in the affine chart.
///
/// Zeros on the coordinate axes stay in the returned set (the torus tally
/// excludes them via [`ZeroSet::count_in_torus`]); zeros at infinity are not
/// computed, so `target_count` equals the certified affine count.
pub fn solve_system_2d(
    f: &SectionSample,
    g: &SectionSample,
    opts: &SolveOpts,
) -> Result<ZeroSet> {
    if f.spec().dim() != 2 || g.spec().dim() != 2 {
        return Err(CoreError::Unsupported("bivariate solver needs m = 2".into()));
    }
    let fg = f.chart_coeffs_bivariate();
    let gg = g.chart_coeffs_bivariate();
    solve_grids(&fg, &gg, opts)
}

pub(crate) fn solve_grids(fg: &Grid, gg: &Grid, opts: &SolveOpts) -> Result<ZeroSet> {
    for (name, grid) in [("f", fg), ("g", gg)] {
        let d = total_effective_degree(grid);
        if d > opts.max_degree {
            return Err(CoreError::DegreeCap(format!(
                "{name} has effective degree {d} above the cap {}",
                opts.max_degree
            )));
        }
        if d == 0 {
            return Err(CoreError::Degenerate(format!("{name} is constant")));
        }
    }
    let res = resultant_coeffs(fg, gg, opts)?;
    // trim numerically void leading coefficients before root finding
    let max_mag = res.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let top = res
        .iter()
        .rposition(|c| c.norm() > 1e-12 * max_mag)
        .ok_or_else(|| CoreError::Degenerate("resultant vanishes identically".into()))?;
    if top == 0 {
        // constant nonzero resultant: no common zeros at all
        return Ok(ZeroSet {
            chart_zeros: vec![],
            at_infinity: 0,
            target_count: 0,
        });
    }
    let reduced: Vec<C64> = res[..=top].iter().map(|c| c / max_mag).collect();
    let xs = companion::companion_roots(&reduced)?;

    let d2f = degree_z2(fg);
    let d2g = degree_z2(gg);
    let mut found: Vec<(C64, C64, f64)> = Vec::new();
    for x in xs {
        if !x.is_finite() {
            return Err(CoreError::SolverFailure(
                "non-finite eliminant root".into(),
            ));
        }
        let a = z2_coeffs_at::<f64>(fg, x, d2f);
        let b = z2_coeffs_at::<f64>(gg, x, d2g);
        // candidate second coordinates from both input polynomials
        let mut candidates: Vec<C64> = Vec::new();
        for coeffs in [&a, &b] {
            let mmax = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            if mmax == 0.0 {
                continue;
            }
            let top = coeffs.iter().rposition(|c| c.norm() > 1e-12 * mmax);
            if let Some(t) = top {
                if t >= 1 {
                    let scaled: Vec<C64> = coeffs[..=t].iter().map(|c| c / mmax).collect();
                    if let Ok(roots) = companion::companion_roots(&scaled) {
                        candidates.extend(roots.into_iter().filter(|z| z.is_finite()));
                    }
                }
            }
        }
        let mut certified_here = false;
        for y in candidates {
            let (z1, z2, rel) = newton_joint(fg, gg, x, y);
            if rel <= opts.residual_tol && z1.is_finite() && z2.is_finite() {
                certified_here = true;
                found.push((z1, z2, rel));
            }
        }
        if !certified_here {
            // a spurious eliminant root is expected exactly when a leading
            // z2-coefficient vanishes at x; anything else is a real miss
            let lead_f = a.last().map(|c| c.norm()).unwrap_or(0.0);
            let lead_g = b.last().map(|c| c.norm()).unwrap_or(0.0);
            let scale_f = a.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let scale_g = b.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let f_dropped = scale_f == 0.0 || lead_f < 1e-6 * scale_f;
            let g_dropped = scale_g == 0.0 || lead_g < 1e-6 * scale_g;
            if !(f_dropped || g_dropped) {
                return Err(CoreError::SolverFailure(format!(
                    "no certified zero above eliminant root {x} with healthy leading coefficients"
                )));
            }
        }
    }
    // deduplicate into multiplicity clusters
    found.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
            .then(a.1.re.partial_cmp(&b.1.re).unwrap())
            .then(a.1.im.partial_cmp(&b.1.im).unwrap())
    });
    // points refined from different seeds scatter at the conditioning scale
    // of the zero, which for near-tangent pairs is well above the univariate
    // cluster radius; anything closer than this is one zero seen twice
    const DEDUPE_TOL: f64 = 1e-7;
    let mut zeros: Vec<ChartZero> = Vec::new();
    'next: for (z1, z2, rel) in found {
        for existing in zeros.iter_mut() {
            let d = (existing.point[0] - z1).norm() + (existing.point[1] - z2).norm();
            if d < DEDUPE_TOL * (1.0 + z1.norm() + z2.norm()) {
                // same zero rediscovered through another candidate; keep one
                existing.residual = existing.residual.min(rel);
                continue 'next;
            }
        }
        zeros.push(ChartZero {
            point: vec![z1, z2],
            residual: rel,
            multiplicity: 1,
        });
    }
    let count = zeros.iter().map(|z| z.multiplicity).sum::<u32>();
    Ok(ZeroSet {
        chart_zeros: zeros,
        at_infinity: 0,
        target_count: count,
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

    fn grid_from(entries: &[(usize, usize, C64)]) -> Grid {
        let d1 = entries.iter().map(|e| e.0).max().unwrap();
        let d2 = entries.iter().map(|e| e.1).max().unwrap();
        let mut g = vec![vec![c(0.0, 0.0); d2 + 1]; d1 + 1];
        for &(i, j, v) in entries {
            g[i][j] = v;
        }
        g
    }

    #[test]
    fn decoupled_quadratics_give_four_corners() {
        // f = z1^2 - 1, g = z2^2 - 1
        let f = grid_from(&[(2, 0, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        let g = grid_from(&[(0, 2, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        let zs = solve_grids(&f, &g, &SolveOpts::default()).unwrap();
        assert_eq!(zs.chart_multiplicity(), 4);
        for z in &zs.chart_zeros {
            assert!((z.point[0].norm() - 1.0).abs() < 1e-10);
            assert!((z.point[1].norm() - 1.0).abs() < 1e-10);
            assert!(z.point[0].im.abs() < 1e-10 && z.point[1].im.abs() < 1e-10);
        }
        assert_eq!(zs.count_in_torus(), 4);
    }

    #[test]
    fn shared_component_is_degenerate() {
        // f = g = z1 z2 - 1
        let f = grid_from(&[(1, 1, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        let zs = solve_grids(&f, &f.clone(), &SolveOpts::default());
        assert!(matches!(zs, Err(CoreError::Degenerate(_))));
    }

    #[test]
    fn no_z2_dependence_is_degenerate() {
        let f = grid_from(&[(2, 0, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        let g = grid_from(&[(1, 0, c(1.0, 0.0)), (0, 0, c(3.0, 0.0))]);
        assert!(matches!(
            solve_grids(&f, &g, &SolveOpts::default()),
            Err(CoreError::Degenerate(_))
        ));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let f = grid_from(&[(13, 0, c(1.0, 0.0)), (0, 1, c(1.0, 0.0))]);
        let g = grid_from(&[(0, 1, c(1.0, 0.0)), (0, 0, c(1.0, 0.0))]);
        assert!(matches!(
            solve_grids(&f, &g, &SolveOpts::default()),
            Err(CoreError::DegreeCap(_))
        ));
    }

    #[test]
    fn mixed_system_with_known_solutions() {
        // f = z1 z2 - 1, g = z1 + z2 - 2: common zeros z1 = z2 = 1 (double)
        // and... z1 z2 = 1 with z1 + z2 = 2 forces z1 = z2 = 1 (tangent pair)
        let f = grid_from(&[(1, 1, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        let g = grid_from(&[
            (1, 0, c(1.0, 0.0)),
            (0, 1, c(1.0, 0.0)),
            (0, 0, c(-2.0, 0.0)),
        ]);
        let zs = solve_grids(&f, &g, &SolveOpts::default()).unwrap();
        for z in &zs.chart_zeros {
            assert!((z.point[0] - c(1.0, 0.0)).norm() < 1e-5);
            assert!((z.point[1] - c(1.0, 0.0)).norm() < 1e-5);
        }
        assert!(zs.chart_multiplicity() >= 1);
    }

    #[test]
    fn random_triangle_pairs_have_nine_torus_zeros() {
        // full cubic basis: both the square-free count and the torus count
        // are 9 for generic draws
        let spec = EnsembleSpec::full(2, 3).unwrap();
        for t in 0..5 {
            let f = spec.sample(&mut trial_rng(900, 2 * t));
            let g = spec.sample(&mut trial_rng(900, 2 * t + 1));
            let zs = solve_system_2d(&f, &g, &SolveOpts::default()).unwrap();
            assert_eq!(zs.count_in_torus(), 9, "trial {t}");
            for z in &zs.chart_zeros {
                assert!(z.residual <= CERTIFY_TOL);
            }
        }
    }

    #[test]
    fn unit_square_support_gives_eight_torus_zeros() {
        let square = LatticePolytope::polygon(vec![[0, 0], [2, 0], [2, 2], [0, 2]]).unwrap();
        let spec = EnsembleSpec::constrained(2, 4, square).unwrap();
        for t in 0..5 {
            let f = spec.sample(&mut trial_rng(901, 2 * t));
            let g = spec.sample(&mut trial_rng(901, 2 * t + 1));
            let zs = solve_system_2d(&f, &g, &SolveOpts::default()).unwrap();
            assert_eq!(zs.count_in_torus(), 8, "trial {t}");
        }
    }

    #[test]
    fn bezout_count_holds_for_most_random_quartic_pairs() {
        let spec = EnsembleSpec::full(2, 4).unwrap();
        let trials = 200u64;
        let mut exact = 0u32;
        for t in 0..trials {
            let f = spec.sample(&mut trial_rng(902, 2 * t));
            let g = spec.sample(&mut trial_rng(902, 2 * t + 1));
            match solve_system_2d(&f, &g, &SolveOpts::default()) {
                Ok(zs) => {
                    let count = zs.chart_multiplicity();
                    // a wrong count must never be returned silently: any
                    // deviation from the generic 16 must have been an error
                    assert_eq!(count, 16, "trial {t} returned {count} without error");
                    exact += 1;
                }
                Err(CoreError::SolverFailure(_)) | Err(CoreError::Degenerate(_)) => {}
                Err(e) => panic!("unexpected error class: {e}"),
            }
        }
        assert!(
            exact as f64 >= 0.95 * trials as f64,
            "only {exact}/{trials} certified the full count"
        );
    }

    #[test]
    fn extended_precision_fallback_engages_for_skewed_scales() {
        // widely scaled coefficients push the pivot-ratio estimate up; the
        // solve must still certify both zeros of this simple system
        let eps = 1e-7;
        let f = grid_from(&[
            (2, 0, c(eps, 0.0)),
            (0, 1, c(1.0, 0.0)),
            (0, 0, c(-1.0, 0.0)),
        ]); // eps z1^2 + z2 - 1
        let g = grid_from(&[
            (1, 1, c(1.0, 0.0)),
            (0, 0, c(-1e6, 0.0)),
        ]); // z1 z2 - 1e6
        let opts = SolveOpts {
            cond_threshold: 1e2, // force the double-double route
            ..SolveOpts::default()
        };
        let zs = solve_grids(&f, &g, &opts).unwrap();
        assert!(!zs.chart_zeros.is_empty());
        for z in &zs.chart_zeros {
            let (fv, _, _) = eval_grid(&f, z.point[0], z.point[1]);
            let (gv, _, _) = eval_grid(&g, z.point[0], z.point[1]);
            assert!(fv.norm() / scale_grid(&f, z.point[0], z.point[1]) < 1e-8);
            assert!(gv.norm() / scale_grid(&g, z.point[0], z.point[1]) < 1e-8);
        }
    }
}
