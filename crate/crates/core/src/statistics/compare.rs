//! Deterministic comparison of an empirical curve against an analytic one.

use super::PairCorrelationCurve;
use crate::error::{CoreError, Result};

/// Per-bin comparison report over a distance band.
#[derive(Clone, Debug)]
pub struct CurveComparison {
    pub band: (f64, f64),
    /// Indices of the curve bins that fell inside the band.
    pub bins_used: Vec<usize>,
    pub max_rel_deviation: f64,
    /// `(r, z)` per used bin, `z` in combined standard errors.
    pub z_scores: Vec<(f64, f64)>,
    /// Bins beyond three combined standard errors.
    pub flagged: Vec<usize>,
}

/// Compares curve bins whose mean pair distance falls in `band` against the
/// analytic values `reference(r) -> (value, stderr)`.
pub fn compare_curves<F: Fn(f64) -> (f64, f64)>(
    curve: &PairCorrelationCurve,
    reference: F,
    band: (f64, f64),
) -> Result<CurveComparison> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(CoreError::Unsupported("empty comparison band".into()));
    }
    let mut bins_used = Vec::new();
    let mut max_rel: f64 = 0.0;
    let mut z_scores = Vec::new();
    let mut flagged = Vec::new();
    for i in 0..curve.bins() {
        let r = curve.r_mean[i];
        if r < lo || r > hi || !curve.kappa_hat[i].is_finite() {
            continue;
        }
        let (ref_val, ref_err) = reference(r);
        if ref_val == 0.0 {
            return Err(CoreError::Unsupported(format!(
                "reference vanishes at r = {r}; relative deviation undefined"
            )));
        }
        let rel = (curve.kappa_hat[i] - ref_val).abs() / ref_val.abs();
        max_rel = max_rel.max(rel);
        let combined = (curve.stderr[i].powi(2) + ref_err.powi(2)).sqrt();
        let z = if combined > 0.0 {
            (curve.kappa_hat[i] - ref_val) / combined
        } else if curve.kappa_hat[i] == ref_val {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > 3.0 {
            flagged.push(i);
        }
        z_scores.push((r, z));
        bins_used.push(i);
    }
    if bins_used.is_empty() {
        return Err(CoreError::Unsupported(
            "no curve bins overlap the comparison band".into(),
        ));
    }
    Ok(CurveComparison {
        band,
        bins_used,
        max_rel_deviation: max_rel,
        z_scores,
        flagged,
    })
}
