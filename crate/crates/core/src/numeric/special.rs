//! Log-factorials and the error function.

use super::Dd;
use num_traits::Zero;
use std::sync::OnceLock;

const LN_FACT_TABLE_LEN: usize = 4200;

/// `ln(n!)`, exact to a few units in the last place.
///
/// The table is accumulated in double-double so the rounding error does not
/// grow with `n`; several verification tests compare kernel sums at the
/// `1e-12` relative level and lean on this.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(LN_FACT_TABLE_LEN);
        let mut acc = Dd::zero();
        v.push(0.0);
        for k in 1..LN_FACT_TABLE_LEN {
            acc = acc + Dd::from_f64((k as f64).ln());
            v.push(acc.to_f64());
        }
        v
    });
    assert!(
        n < table.len(),
        "ln_factorial table too small for n = {n}"
    );
    table[n]
}

/// `ln binom(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Error function, fractional error below `1.2e-7` (Chebyshev fit to erfc).
pub fn erf(x: f64) -> f64 {
    1.0 - erfc(x)
}

pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_factorial_large_value_against_stirling_series() {
        // Stirling with three corrections is good to ~1e-15 relative at n=400
        let n = 400.0f64;
        let stirling = n * n.ln() - n
            + 0.5 * (2.0 * std::f64::consts::PI * n).ln()
            + 1.0 / (12.0 * n)
            - 1.0 / (360.0 * n.powi(3));
        let rel = (ln_factorial(400) - stirling).abs() / stirling;
        assert!(rel < 1e-14, "rel={rel:e}");
    }

    #[test]
    fn binomial_identity() {
        // binom(10, 3) = 120
        assert!((ln_binomial(10, 3).exp() - 120.0).abs() < 1e-10);
    }

    #[test]
    fn erf_reference_points() {
        // the fit is documented to 1.2e-7 fractional error
        assert!(erf(0.0).abs() < 2e-7);
        assert!((erf(1.0) - 0.8427007929497149).abs() < 2e-7);
        assert!((erf(-1.0) + 0.8427007929497149).abs() < 2e-7);
        assert!((erf(3.0) - 0.9999779095030014).abs() < 2e-7);
    }

    #[test]
    fn normal_cdf_symmetry() {
        for x in [0.3, 1.1, 2.7] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-12);
        }
        assert!((normal_cdf(0.0) - 0.5).abs() < 2e-7);
    }
}
