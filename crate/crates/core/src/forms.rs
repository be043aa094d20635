//! Smooth 1- and 2-forms on the surface, stored on the fundamental octagon
//! and extended to the disk by domain reduction.
//!
//! Building blocks are radial bumps `φ(z) = A·P(s)` with
//! `s = (cosh d(z, c) - 1) / (cosh R - 1)` and `P(s) = exp(1 - 1/(1 - s))`
//! for `s < 1`, `0` otherwise. A 1-form term is `φ dx`, `φ dy` or `dφ`.

use std::cell::Cell;
use std::f64::consts::{E, PI};

use thiserror::Error;

use crate::dd::DdIsometry;
use crate::fuchsian::{octagon, FuchsianError};
use crate::geom::{distance, CompactTriangle, Geodesic, IdealTriangle, Isometry, C64};
use crate::quad::{adaptive_1d, Quad};
use crate::triangle::compact_triangle_quadrature;

pub const DEFAULT_TOL: f64 = 1e-8;
/// Default clearance between a bump's support and the octagon sides.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// `∫₀¹ P(s) ds = 1 - e·E₁(1)`.
pub const PROFILE_MASS: f64 = 1.0 - E * 0.219_383_934_395_520_27;
const LINE_MAX_EVALS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("bump radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("bump center {0} is outside the octagon")]
    CenterOutside(C64),
    #[error("bump support reaches within {clearance:.4} of side {side} (margin {margin})")]
    SupportTooLarge { side: usize, clearance: f64, margin: f64 },
    #[error("lift sums need a form made of area bumps and the volume form")]
    NotRadial,
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
}

/// Compactly supported radial bump inside the octagon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    center: C64,
    radius: f64,
    amplitude: f64,
    k: f64,
    /// Distance from the support to the nearest side.
    clearance: f64,
}

impl Bump {
    pub fn new(center: C64, radius: f64, amplitude: f64) -> Result<Self, FormError> {
        Self::with_margin(center, radius, amplitude, DEFAULT_MARGIN)
    }

    pub fn with_margin(center: C64, radius: f64, amplitude: f64, margin: f64) -> Result<Self, FormError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FormError::InvalidRadius(radius));
        }
        let oct = octagon();
        if !(center.norm() < 1.0) || !oct.contains(center) {
            return Err(FormError::CenterOutside(center));
        }
        let mut clearance = f64::INFINITY;
        for side in 0..8 {
            let c = oct.side_distance(center, side) - radius;
            if c < margin {
                return Err(FormError::SupportTooLarge { side, clearance: c, margin });
            }
            clearance = clearance.min(c);
        }
        let k = 2.0 / ((1.0 - center.norm_sqr()) * (radius.cosh() - 1.0));
        Ok(Self { center, radius, amplitude, k, clearance })
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { amplitude: self.amplitude * s, ..*self }
    }

    fn s(&self, z: C64) -> f64 {
        self.k * (z - self.center).norm_sqr() / (1.0 - z.norm_sqr())
    }

    pub fn value(&self, z: C64) -> f64 {
        let s = self.s(z);
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    /// `(φ, ∂φ/∂x, ∂φ/∂y)`.
    pub fn jet(&self, z: C64) -> (f64, f64, f64) {
        let n = 1.0 - z.norm_sqr();
        let dz = z - self.center;
        let d2 = dz.norm_sqr();
        let s = self.k * d2 / n;
        if s >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let t = 1.0 / (1.0 - s);
        let v = self.amplitude * (1.0 - t).exp();
        let dv_ds = -v * t * t;
        let scale = 2.0 * self.k / (n * n);
        let sx = scale * (dz.re * n + d2 * z.re);
        let sy = scale * (dz.im * n + d2 * z.im);
        (v, dv_ds * sx, dv_ds * sy)
    }

    /// Hyperbolic integral of the bump, in closed form.
    pub fn mass(&self) -> f64 {
        self.amplitude * 2.0 * PI * (self.radius.cosh() - 1.0) * PROFILE_MASS
    }

    fn may_touch(&self, p: C64, reach: f64) -> bool {
        distance(p, self.center) <= self.radius + reach
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneFormKind {
    /// `φ dx`
    X,
    /// `φ dy`
    Y,
    /// `dφ`
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneTerm {
    pub bump: Bump,
    pub kind: OneFormKind,
}

impl OneTerm {
    /// Components `(P, Q)` of `P dx + Q dy`, packed as `P + iQ`.
    fn components(&self, z: C64) -> C64 {
        match self.kind {
            OneFormKind::X => C64::new(self.bump.value(z), 0.0),
            OneFormKind::Y => C64::new(0.0, self.bump.value(z)),
            OneFormKind::Exact => {
                let (_, dx, dy) = self.bump.jet(z);
                C64::new(dx, dy)
            }
        }
    }

    /// `dα / dVol`.
    fn curl_density(&self, z: C64) -> f64 {
        let w = (1.0 - z.norm_sqr()).powi(2) / 4.0;
        match self.kind {
            OneFormKind::X => -self.bump.jet(z).2 * w,
            OneFormKind::Y => self.bump.jet(z).1 * w,
            OneFormKind::Exact => 0.0,
        }
    }
}

fn reduce_pullback(z: C64) -> Result<(C64, C64), FuchsianError> {
    let oct = octagon();
    if oct.contains(z) {
        return Ok((z, C64::new(1.0, 0.0)));
    }
    let (w, g) = oct.reduce_point(z)?;
    Ok((w, g.derivative(z)))
}

/// Sup of `|f|` over the support disks of the bumps, sampled on a polar grid.
fn grid_sup(bumps: impl Iterator<Item = Bump>, f: impl Fn(C64) -> f64) -> f64 {
    const NR: usize = 160;
    const NT: usize = 256;
    let mut sup: f64 = 0.0;
    for b in bumps {
        let to_center = Isometry::moving_origin_to(b.center);
        for i in 0..=NR {
            let rho = b.radius * i as f64 / NR as f64;
            let r = (rho / 2.0).tanh();
            for j in 0..NT {
                let z = to_center.apply(C64::from_polar(r, 2.0 * PI * j as f64 / NT as f64));
                sup = sup.max(f(z).abs());
            }
        }
    }
    sup * (1.0 + 1e-3)
}

/// A smooth 1-form, a finite sum of bump terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OneForm {
    terms: Vec<OneTerm>,
}

impl OneForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<OneTerm>) -> Self {
        Self { terms }
    }

    pub fn term(bump: Bump, kind: OneFormKind) -> Self {
        Self { terms: vec![OneTerm { bump, kind }] }
    }

    pub fn terms(&self) -> &[OneTerm] {
        &self.terms
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| t.kind == OneFormKind::Exact)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { terms: self.terms.iter().chain(&other.terms).copied().collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| OneTerm { bump: t.bump.scaled(s), kind: t.kind }).collect() }
    }

    /// Components on the octagon, packed as `P + iQ`.
    pub fn components(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.components(z)).sum()
    }

    /// `α(v)` at a point of the octagon.
    pub fn eval(&self, z: C64, v: C64) -> f64 {
        let c = self.components(z);
        c.re * v.re + c.im * v.im
    }

    /// The lift `α̃_z(v)`.
    pub fn eval_lift(&self, z: C64, v: C64) -> Result<f64, FormError> {
        let (w, d) = reduce_pullback(z)?;
        Ok(self.eval(w, d * v))
    }

    /// Exterior derivative.
    pub fn d(&self) -> TwoForm {
        let curls: Vec<OneTerm> = self.terms.iter().copied().filter(|t| t.kind != OneFormKind::Exact).collect();
        let sup = grid_sup(curls.iter().map(|t| t.bump), |z| curls.iter().map(|t| t.curl_density(z)).sum());
        TwoForm { volume: 0.0, bumps: Vec::new(), curls, sup }
    }

    fn min_radius(&self) -> f64 {
        self.terms.iter().map(|t| t.bump.radius).fold(f64::INFINITY, f64::min)
    }

    fn min_clearance(&self) -> f64 {
        self.terms.iter().map(|t| t.bump.clearance).fold(f64::INFINITY, f64::min)
    }

    /// `∫ α̃` along `s -> frame(tanh(s/2))` for `s ∈ [s0, s1]`.
    ///
    /// The frame is carried in double-double precision; each panel is pulled
    /// back near the octagon before switching to `f64`.
    pub fn integrate_frame(&self, frame: &DdIsometry, s0: f64, s1: f64, tol: f64) -> Result<Quad, FormError> {
        if self.terms.is_empty() || s0 == s1 {
            return Ok(Quad::zero());
        }
        if s1 < s0 {
            return Ok(self.integrate_frame(frame, s1, s0, tol)?.scaled(-1.0));
        }
        let len = s1 - s0;
        let h_max = 0.5f64.min(self.min_radius() / 2.0);
        let n = (len / h_max).ceil().max(1.0) as usize;
        let h = len / n as f64;
        let can_skip = h / 2.0 < self.min_clearance();
        // walk outwards from the frame origin so the accumulated pull-back only grows
        let mids: Vec<f64> = (0..n).map(|i| s0 + (i as f64 + 0.5) * h).collect();
        let split = mids.partition_point(|&m| m < 0.0);
        let mut total = Quad::zero();
        for run in [mids[..split].iter().rev().copied().collect::<Vec<_>>(), mids[split..].to_vec()] {
            total = total + self.integrate_panels(frame, &run, h, len, can_skip, tol)?;
        }
        Ok(total)
    }

    fn integrate_panels(&self, frame: &DdIsometry, mids: &[f64], h: f64, len: f64, can_skip: bool, tol: f64) -> Result<Quad, FormError> {
        let oct = octagon();
        let mut pull = DdIsometry::identity();
        let mut total = Quad::zero();
        let failure: Cell<Option<FuchsianError>> = Cell::new(None);
        for &mid in mids {
            let m = pull.compose(&frame.compose(&DdIsometry::translation(mid)));
            let (step, reduced) = oct.reduce_dd(&m)?;
            pull = step.compose(&pull);
            let local = reduced.to_f64();
            if can_skip {
                let p = local.apply_origin();
                if !self.terms.iter().any(|t| t.bump.may_touch(p, h / 2.0)) {
                    continue;
                }
            }
            let f = |r: f64| {
                let x = C64::new((r / 2.0).tanh(), 0.0);
                let z = local.apply(x);
                let v = local.derivative(x) * ((1.0 - x.re * x.re) / 2.0);
                match self.eval_lift(z, v) {
                    Ok(val) => val,
                    Err(FormError::Fuchsian(e)) => {
                        failure.set(Some(e));
                        0.0
                    }
                    Err(_) => 0.0,
                }
            };
            total = total + adaptive_1d(f, -h / 2.0, h / 2.0, tol * h / len, 1, LINE_MAX_EVALS);
            if let Some(e) = failure.take() {
                return Err(e.into());
            }
        }
        Ok(total)
    }

    /// `∫ α̃` along the geodesic segment from `p` to `q`.
    pub fn segment_integral(&self, p: C64, q: C64, tol: f64) -> Result<Quad, FormError> {
        if p == q {
            return Ok(Quad::zero());
        }
        let g = Geodesic::through(p, q).map_err(FuchsianError::from)?;
        let frame = DdIsometry::from_f64(&g.frame());
        Ok(self.integrate_frame(&frame, g.parameter_of(p), g.parameter_of(q), tol)?)
    }

    /// `∫ α̃` along a geodesic between arc-length parameters.
    pub fn line_integral(&self, g: &Geodesic, s0: f64, s1: f64, tol: f64) -> Result<Quad, FormError> {
        self.integrate_frame(&DdIsometry::from_f64(&g.frame()), s0, s1, tol)
    }
}

/// A 2-form given by its density against hyperbolic area.
///
/// The density is `volume + Σ bumps + Σ curls` where each curl is `dα/dVol`
/// for a 1-form term.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoForm {
    volume: f64,
    bumps: Vec<Bump>,
    curls: Vec<OneTerm>,
    sup: f64,
}

impl TwoForm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The hyperbolic area form.
    pub fn volume() -> Self {
        Self { volume: 1.0, bumps: Vec::new(), curls: Vec::new(), sup: 1.0 }
    }

    pub fn bumps(bumps: Vec<Bump>) -> Self {
        let sup = grid_sup(bumps.iter().copied(), |z| bumps.iter().map(|b| b.value(z)).sum());
        Self { volume: 0.0, bumps, curls: Vec::new(), sup }
    }

    pub fn bump(b: Bump) -> Self {
        // a single bump attains its amplitude at the center
        Self { volume: 0.0, bumps: vec![b], curls: Vec::new(), sup: b.amplitude.abs() }
    }

    pub fn volume_coefficient(&self) -> f64 {
        self.volume
    }

    pub fn bump_terms(&self) -> &[Bump] {
        &self.bumps
    }

    /// True when the density is a sum of radial bumps plus a constant.
    pub fn is_radial(&self) -> bool {
        self.curls.is_empty()
    }

    pub fn is_volume_only(&self) -> bool {
        self.bumps.is_empty() && self.curls.is_empty()
    }

    /// Declared bound on `|ω / dVol|`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            volume: self.volume + other.volume,
            bumps: self.bumps.iter().chain(&other.bumps).copied().collect(),
            curls: self.curls.iter().chain(&other.curls).copied().collect(),
            sup: self.sup + other.sup,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            volume: self.volume * s,
            bumps: self.bumps.iter().map(|b| b.scaled(s)).collect(),
            curls: self.curls.iter().map(|t| OneTerm { bump: t.bump.scaled(s), kind: t.kind }).collect(),
            sup: self.sup * s.abs(),
        }
    }

    /// Density on the octagon.
    pub fn density(&self, z: C64) -> f64 {
        self.volume + self.bumps.iter().map(|b| b.value(z)).sum::<f64>() + self.curls.iter().map(|t| t.curl_density(z)).sum::<f64>()
    }

    /// Density of the lift `ω̃` at any point of the disk.
    pub fn lift(&self, z: C64) -> Result<f64, FormError> {
        if self.is_volume_only() {
            return Ok(self.volume);
        }
        let oct = octagon();
        if oct.contains(z) {
            return Ok(self.density(z));
        }
        let (w, _) = oct.reduce_point(z)?;
        Ok(self.density(w))
    }

    fn lifted_density<'a>(&'a self, failure: &'a Cell<Option<FuchsianError>>) -> impl Fn(C64) -> f64 + 'a {
        move |z| match self.lift(z) {
            Ok(v) => v,
            Err(FormError::Fuchsian(e)) => {
                failure.set(Some(e));
                0.0
            }
            Err(_) => 0.0,
        }
    }

    /// Signed integral of `ω̃` over an ideal triangle.
    pub fn ideal_integral(&self, t: &IdealTriangle, tol: f64) -> Result<Quad, FormError> {
        self.ideal_integral_angles(t.angles(), tol)
    }

    pub fn ideal_integral_angles(&self, angles: [f64; 3], tol: f64) -> Result<Quad, FormError> {
        let failure = Cell::new(None);
        let bound = self.sup.max(self.volume.abs());
        let q = crate::triangle::ideal_quadrature_angles(angles, self.lifted_density(&failure), bound, tol);
        match failure.take() {
            Some(e) => Err(e.into()),
            None => Ok(q),
        }
    }

    /// Signed integral of `ω̃` over a compact geodesic triangle.
    pub fn compact_integral(&self, t: &CompactTriangle, tol: f64) -> Result<Quad, FormError> {
        let failure = Cell::new(None);
        let q = compact_triangle_quadrature(t, self.lifted_density(&failure), tol);
        match failure.take() {
            Some(e) => Err(e.into()),
            None => Ok(q),
        }
    }

    /// `∫_Σ ω`, integrating the density over the octagon.
    pub fn total_mass(&self, tol: f64) -> Quad {
        let v = octagon().vertices();
        let origin = C64::new(0.0, 0.0);
        (0..8)
            .map(|k| {
                let t = CompactTriangle::new(origin, v[k], v[(k + 1) % 8]);
                compact_triangle_quadrature(&t, |z| self.density(z), tol / 8.0)
            })
            .fold(Quad::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::octagon;
    use crate::word::GroupWord;

    fn bump() -> Bump {
        Bump::new(C64::new(0.2, -0.1), 0.6, 1.3).unwrap()
    }

    #[test]
    fn profile_mass_by_radial_quadrature() {
        // independent 1D radial integral of the bump
        let b = bump();
        let to_center = Isometry::moving_origin_to(b.center());
        let radial = adaptive_1d(
            |rho: f64| b.value(to_center.apply(C64::new((rho / 2.0).tanh(), 0.0))) * rho.sinh() * 2.0 * PI,
            0.0,
            b.radius(),
            1e-13,
            8,
            1_000_000,
        );
        assert!((radial.value - b.mass()).abs() < 1e-10, "{} {}", radial.value, b.mass());
        let m = TwoForm::bump(b).total_mass(1e-10);
        assert!((m.value - b.mass()).abs() < 1e-8, "{} {}", m.value, b.mass());
    }

    #[test]
    fn volume_mass_is_four_pi() {
        let m = TwoForm::volume().total_mass(1e-10);
        assert!((m.value - 4.0 * PI).abs() < 1e-8, "{}", m.value);
    }

    #[test]
    fn support_validation() {
        assert!(matches!(Bump::new(C64::new(0.0, 0.0), 1.5, 1.0), Err(FormError::SupportTooLarge { .. })));
        assert!(matches!(Bump::new(C64::new(0.0, 0.0), -1.0, 1.0), Err(FormError::InvalidRadius(_))));
        assert!(matches!(Bump::new(C64::new(0.95, 0.0), 0.1, 1.0), Err(FormError::CenterOutside(_))));
    }

    #[test]
    fn jet_matches_finite_differences() {
        let b = bump();
        let z = C64::new(0.35, 0.05);
        let h = 1e-6;
        let (_, dx, dy) = b.jet(z);
        let fx = (b.value(z + C64::new(h, 0.0)) - b.value(z - C64::new(h, 0.0))) / (2.0 * h);
        let fy = (b.value(z + C64::new(0.0, h)) - b.value(z - C64::new(0.0, h))) / (2.0 * h);
        assert!((dx - fx).abs() < 1e-6 && (dy - fy).abs() < 1e-6);
    }

    #[test]
    fn lifts_are_invariant() {
        let omega = TwoForm::bump(bump());
        let alpha = OneForm::term(bump(), OneFormKind::X);
        let o = octagon();
        let z = C64::new(0.3, -0.05);
        let v = C64::new(0.6, 0.8);
        for e in o.ball(3).iter().step_by(7) {
            let gz = e.iso.apply(z);
            assert!((omega.lift(gz).unwrap() - omega.density(z)).abs() < 1e-8);
            let gv = e.iso.derivative(z) * v;
            assert!((alpha.eval_lift(gz, gv).unwrap() - alpha.eval(z, v)).abs() < 1e-8);
        }
    }

    #[test]
    fn stokes_on_compact_triangle() {
        let alpha = OneForm::term(bump(), OneFormKind::Y).add(&OneForm::term(Bump::new(C64::new(-0.3, 0.3), 0.4, -0.7).unwrap(), OneFormKind::X));
        let p = [C64::new(0.1, -0.5), C64::new(0.6, 0.2), C64::new(-0.5, 0.4)];
        let area = alpha.d().compact_integral(&CompactTriangle::new(p[0], p[1], p[2]), 1e-10).unwrap().value;
        let boundary: f64 = (0..3).map(|i| alpha.segment_integral(p[i], p[(i + 1) % 3], 1e-10).unwrap().value).sum();
        assert!(area.abs() > 1e-3);
        assert!((area - boundary).abs() < 1e-7, "{area} {boundary}");
    }

    #[test]
    fn exact_form_has_zero_period() {
        let alpha = OneForm::term(bump(), OneFormKind::Exact);
        let o = octagon();
        for w in ["a", "ab", "aCd"] {
            let g = o.evaluate_dd(&GroupWord::parse(w).unwrap());
            let len = g.translation_length();
            let q = alpha.integrate_frame(&g.axis_frame(), -0.3, len - 0.3, 1e-10).unwrap();
            assert!(q.value.abs() < 1e-8, "{w} {q:?}");
        }
    }

    #[test]
    fn reversal_negates() {
        let alpha = OneForm::term(bump(), OneFormKind::X);
        let p = C64::new(-0.4, -0.2);
        let q = C64::new(0.5, 0.1);
        let f = alpha.segment_integral(p, q, 1e-10).unwrap().value;
        let b = alpha.segment_integral(q, p, 1e-10).unwrap().value;
        assert!(f.abs() > 1e-3);
        assert!((f + b).abs() < 1e-9);
    }
}
