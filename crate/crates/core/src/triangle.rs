//! Quadrature over ideal and compact geodesic triangles.
//!
//! An ideal triangle is pulled back to the upper half-plane triangle
//! `(-1, 1, ∞)`, which splits into three cusp regions cut off by the
//! pairwise tangent horocycles through the side midpoints, plus a compact
//! core. In the cusp at `∞` the coordinates `(x, u = 1/y)` carry the
//! hyperbolic area form as plain `dx du`, so the cell touching `u = 0`
//! is bounded by `sup|density| × area`.

use crate::geom::{orientation_of_angles, signed_diff, IdealTriangle, Isometry, CompactTriangle, C64};
use crate::quad::{adaptive_2d, Quad, Rect};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_EVALS: usize = 4_000_000;

/// Möbius map from the upper half-plane onto the disk.
#[derive(Debug, Clone, Copy)]
struct HalfPlaneChart {
    a: C64,
    b: C64,
    c: C64,
    d: C64,
}

impl HalfPlaneChart {
    /// Sends `-1 -> p`, `1 -> q`, `∞ -> r`.
    fn new(p: C64, q: C64, r: C64) -> Self {
        // S maps p, q, r to 0, 1, ∞; the chart is S⁻¹((z + 1) / 2).
        let sa = q - r;
        let sb = -p * (q - r);
        let sc = q - p;
        let sd = -r * (q - p);
        Self { a: sd, b: sd - sb * 2.0, c: -sc, d: sa * 2.0 - sc }
    }

    fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Image of `z = x + i/u`, evaluated through `w = 1/z` so that `u → 0` stays exact.
    fn apply_cusp(&self, x: f64, u: f64) -> C64 {
        let w = C64::new(u, 0.0) / C64::new(u * x, 1.0);
        (self.a + self.b * w) / (self.c + self.d * w)
    }
}

/// Orders a nondegenerate triple counter-clockwise starting from its smallest angle.
/// Any permutation of the same three angles yields the same canonical triple.
pub(crate) fn canonical(angles: [f64; 3]) -> Option<([f64; 3], f64)> {
    let [a, b, c] = angles;
    let sign = orientation_of_angles(a, b, c);
    if sign == 0 {
        return None;
    }
    let pos = if sign > 0 { [a, b, c] } else { [a, c, b] };
    let k = (0..3).min_by(|&i, &j| pos[i].total_cmp(&pos[j])).unwrap();
    Some(([pos[k], pos[(k + 1) % 3], pos[(k + 2) % 3]], sign as f64))
}

/// Incentre of the ideal triangle with vertices `p, q, r` on the circle.
pub fn ideal_incenter(p: C64, q: C64, r: C64) -> C64 {
    HalfPlaneChart::new(p, q, r).apply(C64::new(0.0, 3f64.sqrt()))
}

/// Signed integral of `density · dVol` over the ideal triangle, with error estimate.
///
/// `tail_bound` must dominate `|density|`; degenerate triples integrate to exactly `0`.
pub fn ideal_triangle_quadrature<F>(t: &IdealTriangle, density: F, tail_bound: f64, tol: f64) -> Quad
where
    F: FnMut(C64) -> f64,
{
    ideal_quadrature_angles(t.angles(), density, tail_bound, tol)
}

pub fn ideal_quadrature_angles<F>(angles: [f64; 3], mut density: F, tail_bound: f64, tol: f64) -> Quad
where
    F: FnMut(C64) -> f64,
{
    let Some((v, sign)) = canonical(angles) else {
        return Quad::zero();
    };
    let pts = v.map(|t| C64::from_polar(1.0, t));
    let charts = [
        HalfPlaneChart::new(pts[0], pts[1], pts[2]),
        HalfPlaneChart::new(pts[1], pts[2], pts[0]),
        HalfPlaneChart::new(pts[2], pts[0], pts[1]),
    ];
    // tags 0..3: cusps; 3, 4: core halves x ≥ 0 and x ≤ 0 in (v, s) with x = ±v².
    let mut rects = Vec::with_capacity(16);
    for k in 0..3 {
        rects.push(Rect::new(-1.0, 1.0, 0.0, 0.5, k));
    }
    rects.extend(Rect::new(0.0, 1.0, 0.0, 1.0, 3).grid(2, 1));
    rects.extend(Rect::new(0.0, 1.0, 0.0, 1.0, 4).grid(2, 1));
    let bound = tail_bound.abs();
    let floor = |r: &Rect| if r.tag < 3 && r.y0 == 0.0 { bound * r.area() } else { 0.0 };
    let integrand = |x: f64, y: f64, tag: usize| -> f64 {
        if tag < 3 {
            density(charts[tag].apply_cusp(x, y))
        } else {
            let v = x;
            let xs = if tag == 3 { v * v } else { -v * v };
            let h = 1.0 + v * (2.0 - v * v).sqrt();
            let yy = h + y * (2.0 - h);
            let jac = 2.0 * v * (2.0 - h) / (yy * yy);
            if jac == 0.0 {
                return 0.0;
            }
            density(charts[0].apply(C64::new(xs, yy))) * jac
        }
    };
    adaptive_2d(integrand, &rects, tol, floor, MAX_EVALS).scaled(sign)
}

/// Signed integral of `density · dVol` over a compact geodesic triangle.
pub fn compact_triangle_quadrature<F>(t: &CompactTriangle, mut density: F, tol: f64) -> Quad
where
    F: FnMut(C64) -> f64,
{
    let [p0, p1, p2] = t.vertices;
    let to_origin = Isometry::moving_origin_to(p0).inverse();
    let back = to_origin.inverse();
    let q1 = to_origin.apply(p1);
    let q2 = to_origin.apply(p2);
    if q1.norm() < 1e-14 || q2.norm() < 1e-14 || (q1 - q2).norm() < 1e-14 {
        return Quad::zero();
    }
    let phi1 = q1.arg();
    let dphi = signed_diff(phi1, q2.arg());
    if dphi.abs() < 1e-14 || (std::f64::consts::PI - dphi.abs()) < 1e-14 {
        return Quad::zero();
    }
    let k1 = crate::geom::klein(q1);
    let dk = crate::geom::klein(q2) - k1;
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let ck = cross(k1, dk);
    let integrand = |t: f64, s: f64, _tag: usize| -> f64 {
        let phi = phi1 + t * dphi;
        let e = C64::from_polar(1.0, phi);
        let rk = (ck / cross(e, dk)).clamp(0.0, 1.0 - 1e-16);
        let rho_edge = rk.atanh();
        let rho = s * rho_edge;
        let z = back.apply(e * (rho / 2.0).tanh());
        density(z) * rho_edge * rho.sinh()
    };
    let rects = [Rect::new(0.0, 1.0, 0.0, 1.0, 0)];
    adaptive_2d(integrand, &rects, tol, |_| 0.0, MAX_EVALS).scaled(dphi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{distance, IdealTriangle};
    use std::f64::consts::PI;

    /// Hyperbolic area by the angle defect, from the hyperbolic law of cosines.
    fn defect_area(p: [C64; 3]) -> f64 {
        let a = distance(p[1], p[2]);
        let b = distance(p[0], p[2]);
        let c = distance(p[0], p[1]);
        let angle = |opp: f64, s1: f64, s2: f64| ((s1.cosh() * s2.cosh() - opp.cosh()) / (s1.sinh() * s2.sinh())).clamp(-1.0, 1.0).acos();
        PI - angle(a, b, c) - angle(b, a, c) - angle(c, a, b)
    }

    #[test]
    fn unit_density_gives_pi() {
        for angles in [[0.0, 2.0, 4.0], [0.1, 0.1015, 3.0], [5.0, 1.0, 3.0], [0.0, 6.2, 6.27]] {
            let t = IdealTriangle::from_angles(angles);
            let sign = crate::geom::orientation(&t).unwrap() as f64;
            let q = ideal_triangle_quadrature(&t, |_| 1.0, 1.0, DEFAULT_TOL);
            assert!((q.value - sign * PI).abs() < 1e-9, "{angles:?} {q:?}");
        }
    }

    #[test]
    fn degenerate_is_zero() {
        let q = ideal_quadrature_angles([1.0, 1.0, 2.0], |_| 1.0, 1.0, DEFAULT_TOL);
        assert_eq!(q.value, 0.0);
        let p = C64::new(0.2, 0.1);
        let q = compact_triangle_quadrature(&CompactTriangle::new(p, p, C64::new(0.0, 0.5)), |_| 1.0, DEFAULT_TOL);
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn exact_antisymmetry() {
        let f = |z: C64| (3.0 * z.re).sin() + z.im * z.im;
        let a = ideal_quadrature_angles([0.3, 2.0, 4.4], f, 2.0, 1e-6).value;
        let b = ideal_quadrature_angles([2.0, 0.3, 4.4], f, 2.0, 1e-6).value;
        let c = ideal_quadrature_angles([4.4, 0.3, 2.0], f, 2.0, 1e-6).value;
        assert_eq!(a, -b);
        assert_eq!(a, c);
    }

    #[test]
    fn core_region_area() {
        // each half of the compact core has area (π - 3) / 2
        let rects = Rect::new(0.0, 1.0, 0.0, 1.0, 0).grid(2, 1);
        let half = adaptive_2d(
            |v: f64, s: f64, _| {
                let h = 1.0 + v * (2.0 - v * v).sqrt();
                let y = h + s * (2.0 - h);
                2.0 * v * (2.0 - h) / (y * y)
            },
            &rects,
            1e-12,
            |_| 0.0,
            1_000_000,
        );
        assert!((2.0 * half.value - (PI - 3.0)).abs() < 1e-10);
    }

    #[test]
    fn compact_area_matches_defect() {
        let r = 0.6;
        let eq = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].map(|t| C64::from_polar(r, t));
        let q = compact_triangle_quadrature(&CompactTriangle::new(eq[0], eq[1], eq[2]), |_| 1.0, 1e-10);
        assert!((q.value - defect_area(eq)).abs() < 1e-9, "{} {}", q.value, defect_area(eq));
        let pts = [C64::new(0.3, -0.2), C64::new(-0.7, 0.5), C64::new(0.85, 0.4)];
        let q = compact_triangle_quadrature(&CompactTriangle::new(pts[0], pts[1], pts[2]), |_| 1.0, 1e-10);
        assert!((q.value.abs() - defect_area(pts)).abs() < 1e-9);
        assert!(q.value.abs() < PI);
    }
}
