//! Double-double isometries for points far from the origin.
//!
//! Points at hyperbolic distance `d` from the origin sit within `e^{-d}` of the
//! unit circle, so plain `f64` loses all accuracy beyond `d ≈ 30`. Long
//! geodesic arcs are handled by carrying the frame in double-double precision
//! and pulling each panel back near the origin before switching to `f64`.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::geom::{Isometry, C64};

pub type Dd = TwoFloat;
pub type Cdd = Complex<TwoFloat>;

pub fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

pub fn cdd(z: C64) -> Cdd {
    Cdd::new(dd(z.re), dd(z.im))
}

pub fn to_c64(z: Cdd) -> C64 {
    C64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// `1 / b` by one Newton step from the `f64` reciprocal. `TwoFloat`'s own
/// `TwoFloat / TwoFloat` skips the fused residual and is only `f64`-accurate.
pub fn recip(b: Dd) -> Dd {
    let th = dd(b.hi().recip());
    let e = dd(1.0) - b * th;
    th + th * e
}

/// `a / b` by long division in three `f64` digits.
pub fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * dd(q1);
    let q2 = r.hi() / b.hi();
    let r = r - b * dd(q2);
    let q3 = r.hi() / b.hi();
    dd(q1) + dd(q2) + dd(q3)
}

/// Complex division `z / w`.
pub fn cdiv(z: Cdd, w: Cdd) -> Cdd {
    let n = norm_sqr(w);
    let num = z * w.conj();
    Cdd::new(div(num.re, n), div(num.im, n))
}

fn cdiv_real(z: Cdd, r: Dd) -> Cdd {
    Cdd::new(div(z.re, r), div(z.im, r))
}

const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// `e^x` to double-double accuracy: `x = k ln 2 + r`, Taylor series on `r / 32`, then squaring.
pub fn exp_dd(x: Dd) -> Dd {
    let k = (x.hi() / LN2_HI).round();
    let r = x - dd(k) * dd(LN2_HI) - dd(k) * dd(LN2_LO);
    let r = r / 32.0;
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for n in 1..=18 {
        term = term * r / n as f64;
        sum += term;
    }
    for _ in 0..5 {
        sum = sum * sum;
    }
    sum * dd(2f64.powi(k as i32))
}

/// Natural logarithm by one Newton step on `e^y = x` from the `f64` value.
pub fn ln_dd(x: Dd) -> Dd {
    let y = dd(x.hi().ln());
    let y = y + x * exp_dd(-y) - dd(1.0);
    y + x * exp_dd(-y) - dd(1.0)
}

fn norm_sqr(z: Cdd) -> Dd {
    z.re * z.re + z.im * z.im
}

/// Double-double version of [`Isometry`].
#[derive(Debug, Clone, Copy)]
pub struct DdIsometry {
    pub alpha: Cdd,
    pub beta: Cdd,
}

impl DdIsometry {
    pub fn identity() -> Self {
        Self { alpha: cdd(C64::new(1.0, 0.0)), beta: cdd(C64::new(0.0, 0.0)) }
    }

    pub fn from_f64(g: &Isometry) -> Self {
        Self { alpha: cdd(g.alpha()), beta: cdd(g.beta()) }
    }

    pub fn normalized(alpha: Cdd, beta: Cdd) -> Self {
        let scale = norm_sqr(alpha) + norm_sqr(beta);
        let det = norm_sqr(alpha) - norm_sqr(beta);
        // `det` carries a cancellation error proportional to the entries
        let mut out = if (det - dd(1.0)).abs().hi() > 1e-28 * scale.hi() {
            let s = recip(det.sqrt());
            Self { alpha: alpha * s, beta: beta * s }
        } else {
            Self { alpha, beta }
        };
        if out.alpha.re.hi() < 0.0 {
            out.alpha = -out.alpha;
            out.beta = -out.beta;
        }
        out
    }

    /// Translation by `t` along the real diameter.
    pub fn translation(t: f64) -> Self {
        let e = exp_dd(dd(t / 2.0));
        let ei = recip(e);
        let half = dd(0.5);
        Self { alpha: Cdd::new((e + ei) * half, dd(0.0)), beta: Cdd::new((e - ei) * half, dd(0.0)) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self { alpha: self.alpha.conj(), beta: -self.beta }
    }

    pub fn apply(&self, z: Cdd) -> Cdd {
        cdiv(self.alpha * z + self.beta, self.beta.conj() * z + self.alpha.conj())
    }

    pub fn apply_origin(&self) -> Cdd {
        cdiv(self.beta, self.alpha.conj())
    }

    pub fn to_f64(&self) -> Isometry {
        let n = Self::normalized(self.alpha, self.beta);
        Isometry::from_normalized(to_c64(n.alpha), to_c64(n.beta))
    }

    /// Half trace of the canonical representative.
    pub fn half_trace(&self) -> Dd {
        let n = Self::normalized(self.alpha, self.beta);
        n.alpha.re
    }

    /// Translation length for a hyperbolic element.
    pub fn translation_length(&self) -> f64 {
        let a = self.half_trace();
        let v = dd(2.0) * ln_dd(a + (a * a - dd(1.0)).sqrt());
        v.hi() + v.lo()
    }

    /// Repelling and attracting fixed points on the unit circle.
    pub fn fixed_points(&self) -> (Cdd, Cdd) {
        let n = Self::normalized(self.alpha, self.beta);
        let root = (n.alpha.re * n.alpha.re - dd(1.0)).sqrt();
        let bc = n.beta.conj();
        let plus = cdiv(Cdd::new(root, n.alpha.im), bc);
        let minus = cdiv(Cdd::new(-root, n.alpha.im), bc);
        (unitize(minus), unitize(plus))
    }

    /// Frame of the axis: carries the real diameter onto the axis, oriented
    /// from the repelling to the attracting fixed point.
    pub fn axis_frame(&self) -> Self {
        let (u, v) = self.fixed_points();
        frame(u, v)
    }
}

fn unitize(z: Cdd) -> Cdd {
    cdiv_real(z, norm_sqr(z).sqrt())
}

fn unit_sqrt(w: Cdd) -> Cdd {
    let n = norm_sqr(w).sqrt();
    let t = ((n + w.re.abs()) / 2.0).sqrt();
    if w.re.hi() >= 0.0 {
        Cdd::new(t, div(w.im, dd(2.0) * t))
    } else {
        let re = div(w.im.abs(), dd(2.0) * t);
        let im = if w.im.hi() < 0.0 { -t } else { t };
        Cdd::new(re, im)
    }
}

/// Double-double version of [`crate::geom::frame_coefficients`].
pub fn frame(u: Cdd, v: Cdd) -> DdIsometry {
    let ev = unit_sqrt(v);
    let mut eq = unit_sqrt(-u);
    if (ev * eq.conj()).re.hi() < 0.0 {
        eq = -eq;
    }
    let r = recip((ev * eq.conj()).re.sqrt());
    let p = ev * r;
    let q = eq * r;
    let half = dd(0.5);
    DdIsometry { alpha: (p + q) * half, beta: (p - q) * half }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{BoundaryPoint, Geodesic};

    #[test]
    fn division_is_double_double() {
        for (a, b) in [(1.0, 3.0), (2.0, 7.0), (-5.5, 1e-7), (1e12, 3.3)] {
            let q = div(dd(a), dd(b));
            let r = q * dd(b) - dd(a);
            assert!(r.abs().hi() < 1e-31 * a.abs(), "{a}/{b}: {r:?}");
            let t = recip(dd(b)) * dd(b) - dd(1.0);
            assert!(t.abs().hi() < 1e-31, "1/{b}: {t:?}");
        }
        let z = Cdd::new(dd(0.3), dd(-1.7));
        let w = Cdd::new(dd(2.0) / 3.0, dd(1.1));
        let back = cdiv(z, w) * w - z;
        assert!(norm_sqr(back).sqrt().hi() < 1e-31);
    }

    #[test]
    fn exp_and_ln_reach_double_double_accuracy() {
        // e to 32 digits
        let e = dd(std::f64::consts::E) + dd(1.445_646_891_729_250_2e-16);
        assert!((exp_dd(dd(1.0)) - e).abs().hi() < 1e-30);
        for x in [-40.0, -3.5, -0.01, 0.0, 1e-9, 0.7, 17.5, 35.2] {
            let p = exp_dd(dd(x)) * exp_dd(dd(-x)) - dd(1.0);
            assert!(p.abs().hi() < 1e-30, "{x}: {p:?}");
            let back = ln_dd(exp_dd(dd(x))) - dd(x);
            assert!(back.abs().hi() < 1e-29 * x.abs().max(1.0), "{x}: {back:?}");
        }
        let t = DdIsometry::translation(70.0);
        let det = norm_sqr(t.alpha) - norm_sqr(t.beta) - dd(1.0);
        assert!(det.abs().hi() < 1e-30 * norm_sqr(t.alpha).hi());
        assert!((t.translation_length() - 70.0).abs() < 1e-13);
    }

    #[test]
    fn frame_matches_f64() {
        let g = Geodesic::new(BoundaryPoint::new(4.0), BoundaryPoint::new(1.0)).unwrap();
        let f = g.frame();
        let d = frame(cdd(g.start.point()), cdd(g.end.point())).to_f64();
        assert!(f.distance(&d) < 1e-14);
    }

    #[test]
    fn far_point_keeps_precision() {
        // 0 translated by 40 along the diameter and back
        let t = DdIsometry::translation(40.0);
        let back = DdIsometry::translation(-40.0).compose(&t);
        assert!(to_c64(back.apply_origin()).norm() < 1e-14);
    }

    #[test]
    fn fixed_points_agree() {
        let g = Isometry::new(C64::new(3.0, 0.7), C64::new(1.5, -2.2)).unwrap();
        let (r, a) = g.fixed_points().unwrap();
        let (rd, ad) = DdIsometry::from_f64(&g).fixed_points();
        assert!((to_c64(rd) - r.point()).norm() < 1e-13);
        assert!((to_c64(ad) - a.point()).norm() < 1e-13);
        assert!((DdIsometry::from_f64(&g).translation_length() - g.translation_length().unwrap()).abs() < 1e-12);
    }
}
