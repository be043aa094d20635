//! Poincaré disk geometry: isometries, boundary points, geodesics and triangles.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Threshold on `|Re α| - 1` (half the trace excess) used by [`Isometry::kind`].
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Angular tolerance for coincidence of boundary points.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("isometry is not hyperbolic (half trace {0})")]
    NotHyperbolic(f64),
    #[error("degenerate triple: two vertices coincide")]
    DegenerateTriple,
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("singular matrix cannot be normalized")]
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Orientation-preserving isometry `z -> (αz + β) / (conj(β) z + conj(α))`
/// with `|α|² - |β|² = 1` and the sign fixed by `Re α ≥ 0`.
#[derive(Clone, Copy, PartialEq)]
pub struct Isometry {
    alpha: C64,
    beta: C64,
    kind: Kind,
}

impl fmt::Debug for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry(α={}, β={}, {:?})", self.alpha, self.beta, self.kind)
    }
}

fn classify(alpha: C64, beta: C64) -> Kind {
    let excess = alpha.re.abs() - 1.0;
    if excess > CLASSIFY_TOL {
        Kind::Hyperbolic
    } else if excess >= -CLASSIFY_TOL && beta.norm() > CLASSIFY_TOL {
        Kind::Parabolic
    } else {
        Kind::Elliptic
    }
}

impl Isometry {
    /// Normalizes `(α, β)` to unit determinant and canonical sign.
    pub fn new(alpha: C64, beta: C64) -> Result<Self, GeomError> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(GeomError::Singular);
        }
        let s = det.sqrt().recip();
        Ok(Self::from_normalized(alpha * s, beta * s))
    }

    /// Builds from coefficients already of unit determinant (only the sign is fixed).
    pub fn from_normalized(mut alpha: C64, mut beta: C64) -> Self {
        if alpha.re < 0.0 || (alpha.re == 0.0 && alpha.im < 0.0) {
            alpha = -alpha;
            beta = -beta;
        }
        Self { alpha, beta, kind: classify(alpha, beta) }
    }

    pub fn identity() -> Self {
        Self::from_normalized(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Rotation `z -> e^{iφ} z`.
    pub fn rotation(phi: f64) -> Self {
        Self::from_normalized(C64::from_polar(1.0, phi / 2.0), C64::new(0.0, 0.0))
    }

    /// Translation by hyperbolic distance `t` along the real diameter, towards `+1`.
    pub fn translation(t: f64) -> Self {
        let h = t / 2.0;
        Self::from_normalized(C64::new(h.cosh(), 0.0), C64::new(h.sinh(), 0.0))
    }

    /// The isometry sending `0` to `p` along the diameter through `p`.
    pub fn moving_origin_to(p: C64) -> Self {
        let s = (1.0 - p.norm_sqr()).sqrt().recip();
        Self::from_normalized(C64::new(s, 0.0), p * s)
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Trace of the canonical matrix representative (non-negative).
    pub fn trace(&self) -> f64 {
        2.0 * self.alpha.re
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.alpha * z + self.beta) / (self.beta.conj() * z + self.alpha.conj())
    }

    /// Image of the origin.
    pub fn apply_origin(&self) -> C64 {
        self.beta / self.alpha.conj()
    }

    /// Action on boundary angles; the result lies in `[0, 2π)`.
    pub fn apply_angle(&self, theta: f64) -> f64 {
        let w = self.alpha * C64::from_polar(1.0, theta) + self.beta;
        wrap(2.0 * w.arg() - theta)
    }

    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::new(self.apply_angle(p.angle()))
    }

    /// Complex derivative at `z`.
    pub fn derivative(&self, z: C64) -> C64 {
        let d = self.beta.conj() * z + self.alpha.conj();
        (d * d).inv()
    }

    /// `|g'(θ)|` for the induced circle map.
    pub fn boundary_derivative(&self, theta: f64) -> f64 {
        let d = self.beta.conj() * C64::from_polar(1.0, theta) + self.alpha.conj();
        d.norm_sqr().recip()
    }

    pub fn inverse(&self) -> Self {
        Self::from_normalized(self.alpha.conj(), -self.beta)
    }

    pub fn compose(&self, other: &Self) -> Self {
        let a = self.alpha * other.alpha + self.beta * other.beta.conj();
        let b = self.alpha * other.beta + self.beta * other.alpha.conj();
        let det = a.norm_sqr() - b.norm_sqr();
        // keep unit determinant from drifting; cancellation in `det` grows with the entries
        if (det - 1.0).abs() > 1e-12 * (a.norm_sqr() + b.norm_sqr()) {
            let s = det.sqrt().recip();
            Self::from_normalized(a * s, b * s)
        } else {
            Self::from_normalized(a, b)
        }
    }

    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.compose(self).compose(&g.inverse())
    }

    /// Entrywise distance between the projective classes of two isometries.
    pub fn distance(&self, other: &Self) -> f64 {
        let plus = (self.alpha - other.alpha).norm().max((self.beta - other.beta).norm());
        let minus = (self.alpha + other.alpha).norm().max((self.beta + other.beta).norm());
        plus.min(minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.distance(&Self::identity()) <= tol
    }

    pub fn determinant(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    /// Repelling and attracting fixed points.
    pub fn fixed_points(&self) -> Result<(BoundaryPoint, BoundaryPoint), GeomError> {
        if self.kind != Kind::Hyperbolic {
            return Err(GeomError::NotHyperbolic(self.alpha.re));
        }
        let root = (self.alpha.re * self.alpha.re - 1.0).sqrt();
        let bc = self.beta.conj();
        let plus = C64::new(root, self.alpha.im) / bc;
        let minus = C64::new(-root, self.alpha.im) / bc;
        Ok((BoundaryPoint::new(minus.arg()), BoundaryPoint::new(plus.arg())))
    }

    /// Axis oriented from the repelling to the attracting fixed point.
    pub fn axis(&self) -> Result<Geodesic, GeomError> {
        let (rep, att) = self.fixed_points()?;
        Geodesic::new(rep, att)
    }

    pub fn translation_length(&self) -> Result<f64, GeomError> {
        if self.kind != Kind::Hyperbolic {
            return Err(GeomError::NotHyperbolic(self.alpha.re));
        }
        Ok(2.0 * self.alpha.re.acosh())
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, rhs: Isometry) -> Isometry {
        self.compose(&rhs)
    }
}

impl Mul for &Isometry {
    type Output = Isometry;

    fn mul(self, rhs: &Isometry) -> Isometry {
        self.compose(rhs)
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Counter-clockwise angular distance from `a` to `b`, in `[0, 2π)`.
pub fn ccw(a: f64, b: f64) -> f64 {
    wrap(b - a)
}

/// Shortest angular distance between two angles.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = ccw(a, b);
    d.min(TAU - d)
}

/// Signed difference `b - a` reduced to `(-π, π]`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = ccw(a, b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Point of the boundary circle, stored as an angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BoundaryPoint(f64);

impl BoundaryPoint {
    pub fn new(theta: f64) -> Self {
        Self(wrap(theta))
    }

    pub fn angle(&self) -> f64 {
        self.0
    }

    pub fn point(&self) -> C64 {
        C64::from_polar(1.0, self.0)
    }

    pub fn coincides(&self, other: &Self) -> bool {
        circ_dist(self.0, other.0) < ANGLE_TOL
    }
}

/// Oriented geodesic from `start` (at -∞) to `end` (at +∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub start: BoundaryPoint,
    pub end: BoundaryPoint,
}

impl Geodesic {
    pub fn new(start: BoundaryPoint, end: BoundaryPoint) -> Result<Self, GeomError> {
        if start.coincides(&end) {
            return Err(GeomError::DegenerateGeodesic);
        }
        Ok(Self { start, end })
    }

    /// The geodesic through two distinct interior points, oriented from `p` to `q`.
    pub fn through(p: C64, q: C64) -> Result<Self, GeomError> {
        let m = Isometry::moving_origin_to(p);
        let w = m.inverse().apply(q);
        if w.norm() < 1e-300 {
            return Err(GeomError::DegenerateGeodesic);
        }
        let dir = w.arg();
        Self::new(m.apply_boundary(BoundaryPoint::new(dir + PI)), m.apply_boundary(BoundaryPoint::new(dir)))
    }

    pub fn reversed(&self) -> Self {
        Self { start: self.end, end: self.start }
    }

    /// Isometry carrying the real diameter (oriented towards `+1`) onto this geodesic,
    /// with `0` sent to the point closest to the origin.
    pub fn frame(&self) -> Isometry {
        let (alpha, beta) = frame_coefficients(self.start.point(), self.end.point());
        Isometry::new(alpha, beta).expect("frame of a nondegenerate geodesic")
    }

    /// Point at signed arc length `s` from the foot of the perpendicular from `0`.
    pub fn point_at(&self, s: f64) -> C64 {
        self.frame().apply(C64::new((s / 2.0).tanh(), 0.0))
    }

    /// Arc-length parameter of a point lying on the geodesic.
    pub fn parameter_of(&self, z: C64) -> f64 {
        let x = self.frame().inverse().apply(z).re;
        2.0 * x.clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh()
    }

    /// Hyperbolic distance from the origin.
    pub fn distance_from_origin(&self) -> f64 {
        let half = circ_dist(self.start.angle(), self.end.angle()) / 2.0;
        (1.0 / half.sin()).acosh()
    }

    pub fn apply(&self, g: &Isometry) -> Self {
        Self { start: g.apply_boundary(self.start), end: g.apply_boundary(self.end) }
    }
}

/// Coefficients of the SU(1,1) map sending `-1 -> u`, `1 -> v` and `0` to the foot point.
pub fn frame_coefficients(u: C64, v: C64) -> (C64, C64) {
    let ev = unit_sqrt(v);
    let mut eq = unit_sqrt(-u);
    if (ev * eq.conj()).re < 0.0 {
        eq = -eq;
    }
    let r = (ev * eq.conj()).re.sqrt().recip();
    let p = ev * r;
    let q = eq * r;
    ((p + q) * 0.5, (p - q) * 0.5)
}

fn unit_sqrt(w: C64) -> C64 {
    let n = w.norm();
    let t = ((n + w.re.abs()) / 2.0).sqrt();
    if w.re >= 0.0 {
        C64::new(t, w.im / (2.0 * t))
    } else {
        C64::new(w.im.abs() / (2.0 * t), t.copysign(w.im))
    }
}

/// Ordered triple of boundary points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealTriangle {
    pub vertices: [BoundaryPoint; 3],
}

impl IdealTriangle {
    pub fn new(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint) -> Self {
        Self { vertices: [a, b, c] }
    }

    pub fn from_angles(angles: [f64; 3]) -> Self {
        Self::new(BoundaryPoint::new(angles[0]), BoundaryPoint::new(angles[1]), BoundaryPoint::new(angles[2]))
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.vertices[0].angle(), self.vertices[1].angle(), self.vertices[2].angle()]
    }

    pub fn is_degenerate(&self) -> bool {
        let [a, b, c] = self.vertices;
        a.coincides(&b) || b.coincides(&c) || a.coincides(&c)
    }

    pub fn apply(&self, g: &Isometry) -> Self {
        let [a, b, c] = self.vertices;
        Self::new(g.apply_boundary(a), g.apply_boundary(b), g.apply_boundary(c))
    }
}

/// Ordered triple of interior points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactTriangle {
    pub vertices: [C64; 3],
}

impl CompactTriangle {
    pub fn new(a: C64, b: C64, c: C64) -> Self {
        Self { vertices: [a, b, c] }
    }
}

/// Cyclic-order sign of three angles; `0` when two of them coincide.
pub fn orientation_of_angles(a: f64, b: f64, c: f64) -> i8 {
    if circ_dist(a, b) < ANGLE_TOL || circ_dist(b, c) < ANGLE_TOL || circ_dist(a, c) < ANGLE_TOL {
        return 0;
    }
    if ccw(a, b) < ccw(a, c) {
        1
    } else {
        -1
    }
}

/// `+1` for counter-clockwise triples, `-1` for clockwise ones.
pub fn orientation(t: &IdealTriangle) -> Result<i8, GeomError> {
    let [a, b, c] = t.angles();
    match orientation_of_angles(a, b, c) {
        0 => Err(GeomError::DegenerateTriple),
        s => Ok(s),
    }
}

/// Hyperbolic distance in the disk.
pub fn distance(z: C64, w: C64) -> f64 {
    let num = (z - w).norm();
    let den = (C64::new(1.0, 0.0) - w.conj() * z).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// Hyperbolic distance from the origin.
pub fn distance_from_origin(z: C64) -> f64 {
    2.0 * z.norm().min(1.0).atanh()
}

/// Klein-model image of a disk point.
pub fn klein(z: C64) -> C64 {
    z * (2.0 / (1.0 + z.norm_sqr()))
}

/// Conformal factor λ with `ds = λ |dz|`.
pub fn conformal_factor(z: C64) -> f64 {
    2.0 / (1.0 - z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Isometry::identity().kind(), Kind::Elliptic);
        assert_eq!(Isometry::rotation(PI / 4.0).kind(), Kind::Elliptic);
        assert_eq!(Isometry::translation(0.7).kind(), Kind::Hyperbolic);
        let parabolic = Isometry::new(C64::new(1.0, 0.5), C64::new(0.0, 0.5)).unwrap();
        assert_eq!(parabolic.kind(), Kind::Parabolic);
    }

    #[test]
    fn trace_three_length() {
        // half trace 1.5 with a rotation mixed in so the axis is not a diameter
        let m = Isometry::translation(2.0 * 1.5f64.acosh()).conjugate_by(&Isometry::new(C64::new(1.2, 0.3), C64::new(0.4, -0.5)).unwrap());
        assert!(close(m.trace(), 3.0, 1e-12));
        let ell = m.translation_length().unwrap();
        let axis = m.axis().unwrap();
        for s in [-1.0, 0.0, 0.8] {
            let z = axis.point_at(s);
            assert!(close(distance(z, m.apply(z)), ell, 1e-9));
        }
        assert!(close(ell, 1.924847300238565, 1e-12));
    }

    #[test]
    fn inverse_swaps_axis() {
        let m = Isometry::new(C64::new(2.0, 0.4), C64::new(1.1, 1.3)).unwrap();
        let (r, a) = m.fixed_points().unwrap();
        let (ri, ai) = m.inverse().fixed_points().unwrap();
        assert!(r.coincides(&ai) && a.coincides(&ri));
    }

    #[test]
    fn orientation_examples() {
        let deg = |d: f64| d.to_radians();
        let t = IdealTriangle::from_angles([deg(0.0), deg(120.0), deg(240.0)]);
        assert_eq!(orientation(&t), Ok(1));
        let t = IdealTriangle::from_angles([deg(0.0), deg(240.0), deg(120.0)]);
        assert_eq!(orientation(&t), Ok(-1));
        let t = IdealTriangle::from_angles([deg(10.0), deg(10.0), deg(50.0)]);
        assert_eq!(orientation(&t), Err(GeomError::DegenerateTriple));
    }

    #[test]
    fn frame_maps_real_diameter() {
        let g = Geodesic::new(BoundaryPoint::new(0.3), BoundaryPoint::new(2.1)).unwrap();
        let f = g.frame();
        assert!((f.apply(C64::new(-1.0, 0.0)) - g.start.point()).norm() < 1e-12);
        assert!((f.apply(C64::new(1.0, 0.0)) - g.end.point()).norm() < 1e-12);
        let foot = f.apply_origin();
        assert!(close(distance_from_origin(foot), g.distance_from_origin(), 1e-12));
        let s = g.parameter_of(g.point_at(1.25));
        assert!(close(s, 1.25, 1e-10));
    }

    #[test]
    fn through_two_points() {
        let p = C64::new(0.2, -0.3);
        let q = C64::new(-0.5, 0.1);
        let g = Geodesic::through(p, q).unwrap();
        let sp = g.parameter_of(p);
        let sq = g.parameter_of(q);
        assert!(sq > sp);
        assert!(close(sq - sp, distance(p, q), 1e-10));
        assert!((g.point_at(sp) - p).norm() < 1e-10);
    }
}
