//! Lattice polytopes in the positive orthant, the moment map of projective
//! space, and the allowed/forbidden region classifier.
//!
//! Everything combinatorial here (dilation, volume, lattice-point
//! enumeration) runs in exact integer or rational arithmetic; the counts and
//! volumes feed exact assertions downstream.

use crate::ensembles::MonomialIndex;
use crate::error::{CoreError, Result};
use crate::numeric::Real;
use num_complex::Complex;
use num_rational::Ratio;

/// Integral convex polytope in the non-negative orthant of dimension 1 or 2.
///
/// For `m = 1` the vertices are the two endpoints `a <= b` (a point when
/// `a == b`). For `m = 2` vertices are stored in counterclockwise order and
/// must be strictly convex (no repeated or collinear vertices); single
/// points and segments are accepted as degenerate cases with zero area.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    m: usize,
    vertices: Vec<Vec<i64>>,
}

impl LatticePolytope {
    /// Interval `[a, b]` in dimension 1.
    pub fn interval(a: i64, b: i64) -> Result<Self> {
        if a < 0 || b < 0 {
            return Err(CoreError::InvalidPolytope(
                "interval endpoints must be non-negative".into(),
            ));
        }
        if a > b {
            return Err(CoreError::InvalidPolytope(format!(
                "interval endpoints out of order: [{a}, {b}]"
            )));
        }
        Ok(LatticePolytope {
            m: 1,
            vertices: vec![vec![a], vec![b]],
        })
    }

    /// Convex polygon from counterclockwise vertices in dimension 2.
    pub fn polygon(vertices: Vec<[i64; 2]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(CoreError::InvalidPolytope("no vertices".into()));
        }
        for v in &vertices {
            if v[0] < 0 || v[1] < 0 {
                return Err(CoreError::InvalidPolytope(format!(
                    "vertex ({}, {}) outside the non-negative orthant",
                    v[0], v[1]
                )));
            }
        }
        let n = vertices.len();
        if n == 2 && vertices[0] == vertices[1] {
            return Err(CoreError::InvalidPolytope("repeated vertex".into()));
        }
        if n >= 3 {
            // strict convexity and counterclockwise order in one pass
            for i in 0..n {
                let p = vertices[i];
                let q = vertices[(i + 1) % n];
                let r = vertices[(i + 2) % n];
                let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
                if cross <= 0 {
                    return Err(CoreError::InvalidPolytope(format!(
                        "vertices not in strictly convex counterclockwise position at index {}",
                        (i + 1) % n
                    )));
                }
            }
        }
        Ok(LatticePolytope {
            m: 2,
            vertices: vertices.into_iter().map(|v| v.to_vec()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    /// Endpoints for `m = 1`.
    pub fn endpoints(&self) -> (i64, i64) {
        assert_eq!(self.m, 1);
        (self.vertices[0][0], self.vertices[1][0])
    }

    /// Largest coordinate sum over the vertices: the smallest total degree
    /// whose simplex contains the polytope.
    pub fn degree(&self) -> i64 {
        self.vertices
            .iter()
            .map(|v| v.iter().sum::<i64>())
            .max()
            .unwrap_or(0)
    }

    /// Scales every vertex by `n`; exact.
    pub fn dilate(&self, n: u32) -> LatticePolytope {
        LatticePolytope {
            m: self.m,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|&c| c * n as i64).collect())
                .collect(),
        }
    }

    /// Euclidean volume (length for `m = 1`, shoelace area for `m = 2`),
    /// exact rational. Degenerate polytopes report zero.
    pub fn volume(&self) -> Ratio<i64> {
        match self.m {
            1 => {
                let (a, b) = self.endpoints();
                Ratio::from_integer(b - a)
            }
            2 => {
                let n = self.vertices.len();
                if n < 3 {
                    return Ratio::from_integer(0);
                }
                let mut twice: i64 = 0;
                for i in 0..n {
                    let p = &self.vertices[i];
                    let q = &self.vertices[(i + 1) % n];
                    twice += p[0] * q[1] - q[0] * p[1];
                }
                Ratio::new(twice.abs(), 2)
            }
            _ => unreachable!("dimension checked at construction"),
        }
    }

    /// All integer points of the polytope in graded lexicographic order.
    pub fn lattice_points(&self) -> Vec<MonomialIndex> {
        let mut pts = match self.m {
            1 => {
                let (a, b) = self.endpoints();
                (a..=b).map(|x| MonomialIndex::new(vec![x as u32])).collect()
            }
            2 => self.lattice_points_2d(),
            _ => unreachable!(),
        };
        pts.sort();
        pts
    }

    fn lattice_points_2d(&self) -> Vec<MonomialIndex> {
        let ymin = self.vertices.iter().map(|v| v[1]).min().unwrap();
        let ymax = self.vertices.iter().map(|v| v[1]).max().unwrap();
        let n = self.vertices.len();
        let mut out = Vec::new();
        for y in ymin..=ymax {
            // exact rational x-range of the scanline
            let mut lo: Option<Ratio<i64>> = None;
            let mut hi: Option<Ratio<i64>> = None;
            let mut push = |x: Ratio<i64>| {
                lo = Some(match lo {
                    Some(l) if l <= x => l,
                    _ => x,
                });
                hi = Some(match hi {
                    Some(h) if h >= x => h,
                    _ => x,
                });
            };
            for i in 0..n {
                let p = &self.vertices[i];
                let q = &self.vertices[(i + 1) % n.max(1)];
                let (p, q) = if p[1] <= q[1] { (p, q) } else { (q, p) };
                if y < p[1] || y > q[1] {
                    continue;
                }
                if p[1] == q[1] {
                    push(Ratio::from_integer(p[0]));
                    push(Ratio::from_integer(q[0]));
                } else {
                    let num = p[0] * (q[1] - p[1]) + (q[0] - p[0]) * (y - p[1]);
                    push(Ratio::new(num, q[1] - p[1]));
                }
            }
            if let (Some(lo), Some(hi)) = (lo, hi) {
                let xl = lo.ceil().to_integer();
                let xr = hi.floor().to_integer();
                for x in xl..=xr {
                    out.push(MonomialIndex::new(vec![x as u32, y as u32]));
                }
            }
        }
        out
    }

    /// Whether the polytope is simple: every vertex lies on exactly `m`
    /// facets. Intervals always are; a strictly convex polygon is, while
    /// degenerate (point/segment) polygons in dimension 2 are not.
    pub fn is_simple(&self) -> bool {
        match self.m {
            1 => true,
            2 => self.vertices.len() >= 3,
            _ => unreachable!(),
        }
    }

    /// Signed distance (in simplex coordinates) from `x` to the polytope
    /// scaled by `1/p`: positive inside, negative outside.
    pub fn scaled_margin(&self, p: f64, x: &[f64]) -> f64 {
        assert!(p > 0.0);
        match self.m {
            1 => {
                let (a, b) = self.endpoints();
                let lo = a as f64 / p;
                let hi = b as f64 / p;
                (x[0] - lo).min(hi - x[0])
            }
            2 => {
                let n = self.vertices.len();
                if n < 3 {
                    // degenerate: distance to the point/segment, always outside
                    return -self.distance_to_degenerate(p, x);
                }
                let mut margin = f64::INFINITY;
                for i in 0..n {
                    let v = &self.vertices[i];
                    let w = &self.vertices[(i + 1) % n];
                    let (vx, vy) = (v[0] as f64 / p, v[1] as f64 / p);
                    let (wx, wy) = (w[0] as f64 / p, w[1] as f64 / p);
                    // inward normal of a counterclockwise edge
                    let (nx, ny) = (-(wy - vy), wx - vx);
                    let len = (nx * nx + ny * ny).sqrt();
                    let d = ((x[0] - vx) * nx + (x[1] - vy) * ny) / len;
                    margin = margin.min(d);
                }
                margin
            }
            _ => unreachable!(),
        }
    }

    fn distance_to_degenerate(&self, p: f64, x: &[f64]) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .map(|v| (v[0] as f64 / p, v[1] as f64 / p))
            .collect();
        if pts.len() == 1 {
            return ((x[0] - pts[0].0).powi(2) + (x[1] - pts[0].1).powi(2)).sqrt();
        }
        // segment
        let (ax, ay) = pts[0];
        let (bx, by) = pts[1];
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = (((x[0] - ax) * dx + (x[1] - ay) * dy) / len2).clamp(0.0, 1.0);
        let (cx, cy) = (ax + t * dx, ay + t * dy);
        ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)).sqrt()
    }
}

/// Classification of a chart point relative to the allowed region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Allowed,
    Forbidden,
    Boundary,
}

#[derive(Clone, Copy, Debug)]
pub struct RegionLabel {
    pub kind: RegionKind,
    /// Signed distance of the moment-map image to the scaled polytope,
    /// positive inside.
    pub margin: f64,
}

/// Default width of the boundary band in simplex coordinates.
pub const DEFAULT_BOUNDARY_EPS: f64 = 1e-3;

/// Moment map of projective `m`-space restricted to the standard chart:
/// `z -> (|z_j|^2 / (1 + |z|^2))_j`, landing in the closed unit simplex.
pub fn moment_map<R: Real>(z: &[Complex<R>]) -> Vec<R> {
    let mut denom = R::one();
    for zj in z {
        denom = denom + (zj.re * zj.re + zj.im * zj.im);
    }
    z.iter()
        .map(|zj| (zj.re * zj.re + zj.im * zj.im) / denom)
        .collect()
}

/// Labels `z` as allowed/forbidden for the polytope `P` at degree scale `p`,
/// with an `eps`-wide boundary band where the call refuses to take sides.
pub fn classify_region(
    poly: &LatticePolytope,
    p: f64,
    z: &[Complex<f64>],
    eps: f64,
) -> RegionLabel {
    assert_eq!(z.len(), poly.dim(), "chart point dimension mismatch");
    let x = moment_map(z);
    let margin = poly.scaled_margin(p, &x);
    let kind = if margin >= eps {
        RegionKind::Allowed
    } else if margin <= -eps {
        RegionKind::Forbidden
    } else {
        RegionKind::Boundary
    };
    RegionLabel { kind, margin }
}

/// Parses the config-file literal: `[a, b]` for an interval, `[[x, y], ...]`
/// for a polygon.
pub fn parse_polytope(value: &serde_json::Value) -> Result<LatticePolytope> {
    let arr = value
        .as_array()
        .ok_or_else(|| CoreError::Serialization("polytope literal must be an array".into()))?;
    if arr.is_empty() {
        return Err(CoreError::InvalidPolytope("empty polytope literal".into()));
    }
    if arr[0].is_array() {
        let mut verts = Vec::with_capacity(arr.len());
        for v in arr {
            let pair = v
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| {
                    CoreError::Serialization("polygon vertex must be a pair [x, y]".into())
                })?;
            let x = pair[0]
                .as_i64()
                .ok_or_else(|| CoreError::Serialization("vertex coordinate not an integer".into()))?;
            let y = pair[1]
                .as_i64()
                .ok_or_else(|| CoreError::Serialization("vertex coordinate not an integer".into()))?;
            verts.push([x, y]);
        }
        LatticePolytope::polygon(verts)
    } else {
        if arr.len() != 2 {
            return Err(CoreError::Serialization(
                "interval literal must be [a, b]".into(),
            ));
        }
        let a = arr[0]
            .as_i64()
            .ok_or_else(|| CoreError::Serialization("interval endpoint not an integer".into()))?;
        let b = arr[1]
            .as_i64()
            .ok_or_else(|| CoreError::Serialization("interval endpoint not an integer".into()))?;
        LatticePolytope::interval(a, b)
    }
}

/// Emits the same literal form `parse_polytope` accepts.
pub fn polytope_to_json(poly: &LatticePolytope) -> serde_json::Value {
    use serde_json::json;
    match poly.dim() {
        1 => {
            let (a, b) = poly.endpoints();
            json!([a, b])
        }
        _ => {
            let verts: Vec<serde_json::Value> =
                poly.vertices().iter().map(|v| json!([v[0], v[1]])).collect();
            serde_json::Value::Array(verts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn unit_square() -> LatticePolytope {
        LatticePolytope::polygon(vec![[0, 0], [1, 0], [1, 1], [0, 1]]).unwrap()
    }

    fn triangle(legs: i64) -> LatticePolytope {
        LatticePolytope::polygon(vec![[0, 0], [legs, 0], [0, legs]]).unwrap()
    }

    #[test]
    fn dilate_interval_and_square() {
        let p = LatticePolytope::interval(1, 3).unwrap();
        let d = p.dilate(2);
        assert_eq!(d.endpoints(), (2, 6));

        let sq = unit_square().dilate(3);
        assert_eq!(sq.vertices()[2], vec![3, 3]);

        let t = triangle(1).dilate(5);
        assert_eq!(t.vertices(), &[vec![0, 0], vec![5, 0], vec![0, 5]]);
    }

    #[test]
    fn lattice_points_interval() {
        let p = LatticePolytope::interval(2, 6).unwrap();
        let pts: Vec<u32> = p.lattice_points().iter().map(|a| a.alpha()[0]).collect();
        assert_eq!(pts, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn lattice_points_unit_square() {
        let pts = unit_square().lattice_points();
        let expect: Vec<Vec<u32>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let got: Vec<Vec<u32>> = pts.iter().map(|a| a.alpha().to_vec()).collect();
        // graded lex: (0,0) then degree-1 (0,1),(1,0) then (1,1)
        assert_eq!(got, expect);
    }

    #[test]
    fn lattice_points_triangle_count() {
        assert_eq!(triangle(3).lattice_points().len(), 10);
    }

    #[test]
    fn volumes() {
        assert_eq!(
            LatticePolytope::interval(1, 3).unwrap().volume(),
            Ratio::from_integer(2)
        );
        let sq3 = LatticePolytope::polygon(vec![[0, 0], [3, 0], [3, 3], [0, 3]]).unwrap();
        assert_eq!(sq3.volume(), Ratio::from_integer(9));
        assert_eq!(triangle(5).volume(), Ratio::new(25, 2));
        // degenerate cases are legal with zero volume
        assert_eq!(
            LatticePolytope::interval(4, 4).unwrap().volume(),
            Ratio::from_integer(0)
        );
        let seg = LatticePolytope::polygon(vec![[0, 0], [2, 1]]).unwrap();
        assert_eq!(seg.volume(), Ratio::from_integer(0));
    }

    #[test]
    fn segment_lattice_points_walk_the_gcd() {
        let seg = LatticePolytope::polygon(vec![[0, 0], [4, 2]]).unwrap();
        let got: Vec<Vec<u32>> = seg
            .lattice_points()
            .iter()
            .map(|a| a.alpha().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 0], vec![2, 1], vec![4, 2]]);
    }

    #[test]
    fn moment_map_values() {
        let z0 = [Complex64::new(0.0, 0.0)];
        assert_eq!(moment_map(&z0)[0], 0.0);
        let z1 = [Complex64::new(0.0, 1.0)];
        assert!((moment_map(&z1)[0] - 0.5).abs() < 1e-15);
        let z2 = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let mu = moment_map(&z2);
        assert!((mu[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((mu[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn classify_interval_examples() {
        let p = LatticePolytope::interval(1, 3).unwrap();
        // |z|^2/(1+|z|^2) = 1/2 at |z| = 1: inside (1/4, 3/4)
        let allowed = classify_region(&p, 4.0, &[Complex64::new(1.0, 0.0)], 1e-3);
        assert_eq!(allowed.kind, RegionKind::Allowed);
        let forbidden = classify_region(&p, 4.0, &[Complex64::new(0.0, 0.0)], 1e-3);
        assert_eq!(forbidden.kind, RegionKind::Forbidden);

        let full = LatticePolytope::interval(0, 4).unwrap();
        for z in [0.5, 1.0, 2.0] {
            let lbl = classify_region(&full, 4.0, &[Complex64::new(z, 0.0)], 1e-3);
            assert_eq!(lbl.kind, RegionKind::Allowed, "z = {z}");
        }
    }

    #[test]
    fn classify_boundary_band() {
        let p = LatticePolytope::interval(1, 3).unwrap();
        // moment map exactly at 1/4 for |z|^2 = 1/3
        let z = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
        let lbl = classify_region(&p, 4.0, &[z], 1e-3);
        assert_eq!(lbl.kind, RegionKind::Boundary);
        assert!(lbl.margin.abs() < 1e-12);
    }

    #[test]
    fn square_margins_match_geometry() {
        let sq = unit_square();
        // center of (1/2)[0,1]^2 is (1/4, 1/4); margin = 1/4
        let m = sq.scaled_margin(2.0, &[0.25, 0.25]);
        assert!((m - 0.25).abs() < 1e-15);
        let outside = sq.scaled_margin(2.0, &[0.75, 0.25]);
        assert!(outside < 0.0);
    }

    #[test]
    fn ehrhart_leading_term() {
        // count(NP)/N^m -> Vol(P), within 5% at N = 50
        let p1 = LatticePolytope::interval(1, 3).unwrap();
        let c1 = p1.dilate(50).lattice_points().len() as f64;
        let v1 = 2.0;
        assert!((c1 / 50.0 - v1).abs() / v1 < 0.05);

        let p2 = triangle(2);
        let c2 = p2.dilate(50).lattice_points().len() as f64;
        let v2 = 2.0;
        assert!((c2 / 2500.0 - v2).abs() / v2 < 0.05);
    }

    #[test]
    fn simplicity_flags() {
        assert!(LatticePolytope::interval(0, 5).unwrap().is_simple());
        assert!(unit_square().is_simple());
        assert!(!LatticePolytope::polygon(vec![[1, 1]]).unwrap().is_simple());
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(LatticePolytope::polygon(vec![[0, 0], [1, 0], [2, 0]]).is_err(),);
        assert!(LatticePolytope::polygon(vec![[0, 0], [0, 1], [1, 0]]).is_err()); // clockwise
        assert!(LatticePolytope::interval(3, 1).is_err());
        assert!(LatticePolytope::polygon(vec![[-1, 0], [1, 0], [0, 1]]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        for p in [
            LatticePolytope::interval(1, 3).unwrap(),
            unit_square(),
            triangle(3),
        ] {
            let v = polytope_to_json(&p);
            let q = parse_polytope(&v).unwrap();
            assert_eq!(p, q);
        }
        assert!(parse_polytope(&serde_json::json!([[0, 0], [1, 0], [2, 0]])).is_err());
    }

    proptest! {
        #[test]
        fn dilation_composes(a in 0i64..6, len in 0i64..5, s in 1u32..5, t in 1u32..5) {
            let p = LatticePolytope::interval(a, a + len).unwrap();
            prop_assert_eq!(p.dilate(s).dilate(t), p.dilate(s * t));
        }

        #[test]
        fn moment_map_stays_in_simplex(re1 in -3.0f64..3.0, im1 in -3.0f64..3.0,
                                       re2 in -3.0f64..3.0, im2 in -3.0f64..3.0) {
            let z = [Complex64::new(re1, im1), Complex64::new(re2, im2)];
            let mu = moment_map(&z);
            let total: f64 = mu.iter().sum();
            prop_assert!(total < 1.0);
            for c in mu {
                prop_assert!((0.0..1.0).contains(&c));
            }
        }

        #[test]
        fn classification_is_rotation_invariant(r in 0.01f64..4.0, theta in 0.0f64..6.28) {
            let p = LatticePolytope::interval(1, 3).unwrap();
            let z0 = [Complex64::new(r, 0.0)];
            let z1 = [Complex64::from_polar(r, theta)];
            let l0 = classify_region(&p, 4.0, &z0, 1e-3);
            let l1 = classify_region(&p, 4.0, &z1, 1e-3);
            prop_assert_eq!(l0.kind, l1.kind);
            prop_assert!((l0.margin - l1.margin).abs() < 1e-12);
        }
    }
}
