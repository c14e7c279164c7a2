//! Gaussian ensembles of random polynomials on projective space.
//!
//! A degree-`N` polynomial in `m` variables is identified with a holomorphic
//! section of the `N`-th power of the hyperplane bundle. The monomials
//! `z^alpha` are orthogonal for the inner product induced by normalized Haar
//! measure on the unit sphere `S^{2m+1}` (applied to degree-`N`
//! homogenizations), and the ensemble draws independent standard complex
//! Gaussian coefficients against the orthonormalized monomial basis.
//!
//! An optional lattice-polytope constraint restricts the basis to the
//! monomials whose exponents lie in the polytope; the Gaussian measure on
//! the remaining coefficients is unchanged.

use crate::error::{CoreError, Result};
use crate::numeric::special::ln_factorial;
use crate::numeric::{KahanSumC, Real};
use crate::polytopes::{parse_polytope, polytope_to_json, LatticePolytope};
use crate::C64;
use num_complex::Complex;
use rand::Rng;
use serde_json::json;
use std::cmp::Ordering;
use std::sync::Arc;

/// Exponent vector of a monomial `z_1^{a_1} ... z_m^{a_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialIndex {
    alpha: Vec<u32>,
}

impl MonomialIndex {
    pub fn new(alpha: Vec<u32>) -> Self {
        MonomialIndex { alpha }
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Total degree `|alpha|`.
    pub fn total(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

impl Ord for MonomialIndex {
    /// Graded lexicographic: degree first, then lexicographic on entries.
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.alpha.cmp(&other.alpha))
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `ln ||z^alpha||^2` for the degree-`n` homogenization against normalized
/// Haar measure on the sphere: `m! * prod(alpha_j!) * (n - |alpha|)! / (n + m)!`.
pub fn log_monomial_norm_sq(m: usize, n: u32, alpha: &MonomialIndex) -> Result<f64> {
    if alpha.dim() != m {
        return Err(CoreError::InvalidIndex(format!(
            "exponent vector has dimension {}, expected {}",
            alpha.dim(),
            m
        )));
    }
    let total = alpha.total();
    if total > n {
        return Err(CoreError::InvalidIndex(format!(
            "|alpha| = {total} exceeds degree {n}"
        )));
    }
    // summing the exponent factorials in sorted order keeps the result
    // bit-identical under permutations of alpha
    let mut parts: Vec<f64> = alpha
        .alpha()
        .iter()
        .map(|&a| ln_factorial(a as usize))
        .collect();
    parts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ln = ln_factorial(m) + ln_factorial((n - total) as usize) - ln_factorial(n as usize + m);
    for p in parts {
        ln += p;
    }
    Ok(ln)
}

/// Fubini-Study norm `||z^alpha||` of the degree-`n` homogenization.
pub fn monomial_norm(m: usize, n: u32, alpha: &MonomialIndex) -> Result<f64> {
    Ok((0.5 * log_monomial_norm_sq(m, n, alpha)?).exp())
}

/// A Gaussian ensemble: dimension, degree, optional support constraint, and
/// the orthonormalized monomial basis with its norms.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    m: usize,
    n: u32,
    constraint: Option<LatticePolytope>,
    basis: Vec<MonomialIndex>,
    norms: Vec<f64>,
    log_norm_sq: Vec<f64>,
}

impl EnsembleSpec {
    /// Full ensemble: every monomial of total degree at most `n`.
    pub fn full(m: usize, n: u32) -> Result<Arc<Self>> {
        Self::with_constraint(m, n, None)
    }

    /// Ensemble with basis restricted to the lattice points of `constraint`
    /// (intersected with the degree-`n` simplex).
    pub fn constrained(m: usize, n: u32, constraint: LatticePolytope) -> Result<Arc<Self>> {
        Self::with_constraint(m, n, Some(constraint))
    }

    fn with_constraint(
        m: usize,
        n: u32,
        constraint: Option<LatticePolytope>,
    ) -> Result<Arc<Self>> {
        if !(1..=3).contains(&m) {
            return Err(CoreError::Unsupported(format!(
                "dimension m = {m} outside supported range 1..=3"
            )));
        }
        if n == 0 {
            return Err(CoreError::Unsupported("degree must be positive".into()));
        }
        if let Some(p) = &constraint {
            if p.dim() != m {
                return Err(CoreError::InvalidPolytope(format!(
                    "constraint dimension {} does not match m = {m}",
                    p.dim()
                )));
            }
        }
        let basis = match &constraint {
            None => simplex_points(m, n),
            Some(p) => p
                .lattice_points()
                .into_iter()
                .filter(|a| a.total() <= n)
                .collect(),
        };
        if basis.is_empty() {
            return Err(CoreError::EmptyBasis(format!(
                "constraint has no lattice points inside the degree-{n} simplex"
            )));
        }
        let mut norms = Vec::with_capacity(basis.len());
        let mut log_norm_sq = Vec::with_capacity(basis.len());
        for a in &basis {
            let l = log_monomial_norm_sq(m, n, a)?;
            log_norm_sq.push(l);
            norms.push((0.5 * l).exp());
        }
        Ok(Arc::new(EnsembleSpec {
            m,
            n,
            constraint,
            basis,
            norms,
            log_norm_sq,
        }))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Bundle degree `N`: the degree of the homogenization, and for `m = 1`
    /// the total number of zeros on the projective line.
    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn constraint(&self) -> Option<&LatticePolytope> {
        self.constraint.as_ref()
    }

    /// Basis exponents in graded lexicographic order.
    pub fn basis(&self) -> &[MonomialIndex] {
        &self.basis
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn log_norm_sq(&self) -> &[f64] {
        &self.log_norm_sq
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// One draw: independent standard complex Gaussian coefficients against
    /// the orthonormalized basis.
    pub fn sample<R: Rng + ?Sized>(self: &Arc<Self>, rng: &mut R) -> SectionSample {
        let coeffs = (0..self.basis.len())
            .map(|_| crate::rng::complex_standard_gaussian(rng))
            .collect();
        SectionSample {
            spec: Arc::clone(self),
            coeffs,
        }
    }

    /// Builds a sample from explicit coefficients (tests, deserialization).
    pub fn sample_from_coeffs(self: &Arc<Self>, coeffs: Vec<C64>) -> Result<SectionSample> {
        if coeffs.len() != self.basis.len() {
            return Err(CoreError::InvalidIndex(format!(
                "coefficient count {} does not match basis size {}",
                coeffs.len(),
                self.basis.len()
            )));
        }
        Ok(SectionSample {
            spec: Arc::clone(self),
            coeffs,
        })
    }
}

/// All exponents with `|alpha| <= n` in graded lexicographic order.
fn simplex_points(m: usize, n: u32) -> Vec<MonomialIndex> {
    let mut out = Vec::new();
    match m {
        1 => {
            for a in 0..=n {
                out.push(MonomialIndex::new(vec![a]));
            }
        }
        2 => {
            for total in 0..=n {
                for a0 in 0..=total {
                    out.push(MonomialIndex::new(vec![a0, total - a0]));
                }
            }
        }
        3 => {
            for total in 0..=n {
                for a0 in 0..=total {
                    for a1 in 0..=(total - a0) {
                        out.push(MonomialIndex::new(vec![a0, a1, total - a0 - a1]));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out.sort();
    out
}

/// One draw from an ensemble: coefficients aligned with `spec.basis()`.
#[derive(Clone, Debug)]
pub struct SectionSample {
    spec: Arc<EnsembleSpec>,
    coeffs: Vec<C64>,
}

impl SectionSample {
    pub fn spec(&self) -> &Arc<EnsembleSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Chart value `sum_alpha lambda_alpha z^alpha / ||z^alpha||`.
    ///
    /// For large `|z|` the sum is evaluated through homogeneous coordinates
    /// on the unit sphere with the scale factor applied in log space, since
    /// degree-`N` monomials overflow doubles near `|z| ~ 10^{300/N}`.
    pub fn evaluate(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.spec.m);
        let norm_sq: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let log_weight = 0.5 * self.spec.n as f64 * norm_sq.ln_1p();
        if log_weight < 600.0 {
            self.evaluate_direct(z)
        } else {
            let (v, _) = self.evaluate_unit_sphere(z);
            v * log_weight.exp()
        }
    }

    fn evaluate_direct(&self, z: &[C64]) -> C64 {
        let pow_tables = power_tables(z, self.spec.n);
        let mut acc = KahanSumC::<f64>::new();
        for (i, a) in self.spec.basis.iter().enumerate() {
            let mut term = self.coeffs[i];
            for (j, &aj) in a.alpha().iter().enumerate() {
                term *= pow_tables[j][aj as usize];
            }
            acc.add(term / self.spec.norms[i]);
        }
        acc.value()
    }

    /// Value of the homogeneous representative at the unit-sphere lift of
    /// `z`, together with the log of the omitted scale `(1+|z|^2)^{N/2}`.
    /// The returned value is bounded by `~sqrt(dim)` times the coefficient
    /// norm, so it never overflows.
    pub fn evaluate_unit_sphere(&self, z: &[C64]) -> (C64, f64) {
        assert_eq!(z.len(), self.spec.m);
        let norm_sq: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let w0 = 1.0 / (1.0 + norm_sq).sqrt();
        let w: Vec<C64> = z.iter().map(|&zj| zj * w0).collect();
        let pow_tables = power_tables(&w, self.spec.n);
        let mut w0_pows = vec![0.0f64; self.spec.n as usize + 1];
        w0_pows[0] = 1.0;
        for k in 1..w0_pows.len() {
            w0_pows[k] = w0_pows[k - 1] * w0;
        }
        let mut acc = KahanSumC::<f64>::new();
        for (i, a) in self.spec.basis.iter().enumerate() {
            let mut term = self.coeffs[i];
            for (j, &aj) in a.alpha().iter().enumerate() {
                term *= pow_tables[j][aj as usize];
            }
            term *= w0_pows[(self.spec.n - a.total()) as usize];
            acc.add(term / self.spec.norms[i]);
        }
        let log_scale = 0.5 * self.spec.n as f64 * norm_sq.ln_1p();
        (acc.value(), log_scale)
    }

    /// Pointwise hermitian magnitude `|s|_h(z) = |s(z)| (1+|z|^2)^{-N/2}`,
    /// computed without overflow.
    pub fn hermitian_magnitude(&self, z: &[C64]) -> f64 {
        self.evaluate_unit_sphere(z).0.norm()
    }

    /// Chart gradient `(d s / d z_j)_j` under the same normalization as
    /// [`SectionSample::evaluate`].
    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        assert_eq!(z.len(), self.spec.m);
        let pow_tables = power_tables(z, self.spec.n);
        let mut acc: Vec<KahanSumC<f64>> = vec![KahanSumC::new(); self.spec.m];
        for (i, a) in self.spec.basis.iter().enumerate() {
            let base = self.coeffs[i] / self.spec.norms[i];
            for j in 0..self.spec.m {
                let aj = a.alpha()[j];
                if aj == 0 {
                    continue;
                }
                let mut term = base * aj as f64 * pow_tables[j][(aj - 1) as usize];
                for (k, &ak) in a.alpha().iter().enumerate() {
                    if k != j {
                        term *= pow_tables[k][ak as usize];
                    }
                }
                acc[j].add(term);
            }
        }
        acc.into_iter().map(|k| k.value()).collect()
    }

    /// Dense chart coefficients for `m = 1`: entry `a` is
    /// `lambda_a / ||z^a||`, zero off the basis. Length `N + 1`.
    pub fn chart_coeffs_univariate(&self) -> Vec<C64> {
        assert_eq!(self.spec.m, 1, "univariate coefficients need m = 1");
        let mut out = vec![C64::new(0.0, 0.0); self.spec.n as usize + 1];
        for (i, a) in self.spec.basis.iter().enumerate() {
            out[a.alpha()[0] as usize] = self.coeffs[i] / self.spec.norms[i];
        }
        out
    }

    /// Coefficient grid for `m = 2`: `grid[i][j]` multiplies `z_1^i z_2^j`.
    pub fn chart_coeffs_bivariate(&self) -> Vec<Vec<C64>> {
        assert_eq!(self.spec.m, 2, "bivariate coefficients need m = 2");
        let d1 = self
            .spec
            .basis
            .iter()
            .map(|a| a.alpha()[0])
            .max()
            .unwrap_or(0) as usize;
        let d2 = self
            .spec
            .basis
            .iter()
            .map(|a| a.alpha()[1])
            .max()
            .unwrap_or(0) as usize;
        let mut grid = vec![vec![C64::new(0.0, 0.0); d2 + 1]; d1 + 1];
        for (i, a) in self.spec.basis.iter().enumerate() {
            grid[a.alpha()[0] as usize][a.alpha()[1] as usize] =
                self.coeffs[i] / self.spec.norms[i];
        }
        grid
    }

    /// Coefficient-wise sum with another sample over the same spec.
    pub fn add(&self, other: &SectionSample) -> Result<SectionSample> {
        if !Arc::ptr_eq(&self.spec, &other.spec) && self.spec.basis != other.spec.basis {
            return Err(CoreError::InvalidIndex(
                "samples drawn from different bases".into(),
            ));
        }
        Ok(SectionSample {
            spec: Arc::clone(&self.spec),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Pullback along the projective rotation with matrix
    /// `[[a, b], [-conj(b), conj(a)]]` (requires `|a|^2 + |b|^2 = 1`),
    /// `m = 1` and an unconstrained basis. The coefficient distribution of
    /// the full ensemble is invariant under this action.
    pub fn su2_pullback(&self, a: C64, b: C64) -> Result<SectionSample> {
        if self.spec.m != 1 {
            return Err(CoreError::Unsupported("rotation pullback needs m = 1".into()));
        }
        if self.spec.constraint.is_some() {
            return Err(CoreError::Unsupported(
                "rotation pullback needs the full basis".into(),
            ));
        }
        let unit_defect = (a.norm_sqr() + b.norm_sqr() - 1.0).abs();
        if unit_defect > 1e-12 {
            return Err(CoreError::Unsupported(format!(
                "matrix not unitary: |a|^2+|b|^2 deviates by {unit_defect:e}"
            )));
        }
        let n = self.spec.n as usize;
        // unnormalized homogeneous coefficients of Z0^{n-k} Z1^k
        let c: Vec<C64> = (0..=n)
            .map(|k| self.coeffs[k] / self.spec.norms[k])
            .collect();
        // substitute (Z0, Z1) -> (conj(a) Z0 - b Z1, conj(b) Z0 + a Z1),
        // the inverse rotation, and re-expand
        let (r00, r01) = (a.conj(), -b);
        let (r10, r11) = (b.conj(), a);
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (k, ck) in c.iter().enumerate() {
            // (r00 + r01 t)^{n-k} (r10 + r11 t)^k as a polynomial in t = Z1/Z0
            let p = binomial_power(r00, r01, n - k);
            let q = binomial_power(r10, r11, k);
            for (i, pi) in p.iter().enumerate() {
                for (j, qj) in q.iter().enumerate() {
                    out[i + j] += ck * pi * qj;
                }
            }
        }
        let coeffs = (0..=n).map(|k| out[k] * self.spec.norms[k]).collect();
        Ok(SectionSample {
            spec: Arc::clone(&self.spec),
            coeffs,
        })
    }

    /// Serialized form: `{m, N, constraint?, coeffs: [[[alpha...], re, im], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .spec
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| json!([a.alpha(), c.re, c.im]))
            .collect();
        let mut obj = json!({
            "m": self.spec.m,
            "N": self.spec.n,
            "coeffs": coeffs,
        });
        if let Some(p) = &self.spec.constraint {
            obj["constraint"] = polytope_to_json(p);
        }
        obj
    }

    /// Inverse of [`SectionSample::to_json`]; norms are recomputed, and the
    /// serialized key set must equal the ensemble's basis exactly.
    pub fn from_json(value: &serde_json::Value) -> Result<SectionSample> {
        let m = value["m"]
            .as_u64()
            .ok_or_else(|| CoreError::Serialization("missing field m".into()))? as usize;
        let n = value["N"]
            .as_u64()
            .ok_or_else(|| CoreError::Serialization("missing field N".into()))? as u32;
        let constraint = match value.get("constraint") {
            None | Some(serde_json::Value::Null) => None,
            Some(v) => Some(parse_polytope(v)?),
        };
        let spec = EnsembleSpec::with_constraint(m, n, constraint)?;
        let arr = value["coeffs"]
            .as_array()
            .ok_or_else(|| CoreError::Serialization("missing coeffs array".into()))?;
        if arr.len() != spec.basis.len() {
            return Err(CoreError::Serialization(format!(
                "coefficient count {} does not match basis size {}",
                arr.len(),
                spec.basis.len()
            )));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); spec.basis.len()];
        let mut seen = vec![false; spec.basis.len()];
        for entry in arr {
            let triple = entry
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| CoreError::Serialization("coeff entry must be [alpha, re, im]".into()))?;
            let alpha: Vec<u32> = triple[0]
                .as_array()
                .ok_or_else(|| CoreError::Serialization("alpha must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|v| v as u32)
                        .ok_or_else(|| CoreError::Serialization("alpha entry not an integer".into()))
                })
                .collect::<Result<_>>()?;
            let idx = MonomialIndex::new(alpha);
            let pos = spec
                .basis
                .binary_search(&idx)
                .map_err(|_| CoreError::Serialization(format!("index {:?} not in basis", idx)))?;
            if seen[pos] {
                return Err(CoreError::Serialization(format!(
                    "duplicate index {:?}",
                    idx
                )));
            }
            seen[pos] = true;
            let re = triple[1]
                .as_f64()
                .ok_or_else(|| CoreError::Serialization("re not a number".into()))?;
            let im = triple[2]
                .as_f64()
                .ok_or_else(|| CoreError::Serialization("im not a number".into()))?;
            coeffs[pos] = C64::new(re, im);
        }
        Ok(SectionSample { spec, coeffs })
    }
}

/// `(r0 + r1 t)^k` expanded in `t`.
fn binomial_power(r0: C64, r1: C64, k: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..k {
        let mut next = vec![C64::new(0.0, 0.0); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i] += c * r0;
            next[i + 1] += c * r1;
        }
        out = next;
    }
    out
}

/// Per-coordinate power tables `z_j^0 .. z_j^n`.
fn power_tables(z: &[C64], n: u32) -> Vec<Vec<C64>> {
    z.iter()
        .map(|&zj| {
            let mut t = Vec::with_capacity(n as usize + 1);
            t.push(C64::new(1.0, 0.0));
            for k in 1..=n as usize {
                let prev = t[k - 1];
                t.push(prev * zj);
            }
            t
        })
        .collect()
}

/// Term-by-term evaluation in an arbitrary scalar, used as the independent
/// re-evaluation oracle (instantiate with [`crate::numeric::Dd`] for the
/// extended-precision route).
pub fn evaluate_naive<R: Real>(
    basis: &[MonomialIndex],
    norms: &[f64],
    coeffs: &[C64],
    z: &[Complex<R>],
) -> Complex<R> {
    let mut acc = Complex::new(R::zero(), R::zero());
    for (i, a) in basis.iter().enumerate() {
        let mut term = Complex::new(R::from_f64(coeffs[i].re), R::from_f64(coeffs[i].im));
        for (j, &aj) in a.alpha().iter().enumerate() {
            for _ in 0..aj {
                term = term * z[j];
            }
        }
        let nrm = Complex::new(R::from_f64(norms[i]), R::zero());
        acc = acc + term / nrm;
    }
    acc
}
