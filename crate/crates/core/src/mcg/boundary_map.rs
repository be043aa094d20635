//! Circle maps induced on the boundary by lifts of surface homeomorphisms.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cocycle::BoundaryCocycle;
use crate::fuchsian::octagon;
use crate::geom::{ccw, wrap, Isometry};
use crate::mcg::twist::TwistAutomorphism;
use crate::word::{GroupWord, Letter};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("separating chain has depth {depth}, more than the limit {limit}")]
    DepthExceeded { depth: usize, limit: usize },
    #[error("sampled images are not in circular order (winding {winding:.6})")]
    MonotonicityViolation { winding: f64 },
    #[error("fixed-point map needs word length at least 3, got {0}")]
    SampleTooShort(usize),
    #[error("lifts {0} and {1} cross")]
    LiftsCross(usize, usize),
    #[error("basepoint is not inside the central plate")]
    BasepointOnLift,
}

/// An orientation-preserving circle map on angles.
pub trait CircleMap: fmt::Debug + Send + Sync {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError>;
}

const REFINE_LENGTH: usize = 2;

/// Monotone piecewise-linear interpolation of `∂h̃` through attracting fixed points.
#[derive(Debug, Clone)]
pub struct FixedPointMap {
    /// Increasing sample angles in `[0, 2π)`.
    sources: Vec<f64>,
    /// Unwrapped images: increasing, spanning less than `2π` beyond `targets[0]`.
    targets: Vec<f64>,
    accuracy: f64,
    word_length: usize,
    /// `(γ⁻¹, φ(γ))` for short `γ`, used to refine brackets by equivariance.
    refiners: Vec<(Isometry, Isometry)>,
}

impl FixedPointMap {
    /// Samples `γ⁺ ↦ φ(γ)⁺` for `γ ∈ ball(L)`.
    pub fn new(phi: &TwistAutomorphism, length: usize) -> Result<Self, MapError> {
        if length < 3 {
            return Err(MapError::SampleTooShort(length));
        }
        let oct = octagon();
        let ball = oct.ball(length);
        let index: HashMap<&GroupWord, usize> = ball.iter().enumerate().map(|(i, e)| (&e.word, i)).collect();
        let letter_images: Vec<Isometry> = Letter::ALL.iter().map(|&l| oct.evaluate(&phi.image_of(l))).collect();
        let mut images = vec![Isometry::identity(); ball.len()];
        let mut pairs = Vec::with_capacity(ball.len());
        for (i, e) in ball.iter().enumerate().skip(1) {
            let letters = e.word.letters();
            let (last, prefix) = letters.split_last().expect("nonempty word");
            let p = index[&GroupWord::new(prefix.iter().copied())];
            images[i] = images[p].compose(&letter_images[last.code()]);
            let (Ok((_, src)), Ok((_, dst))) = (e.iso.fixed_points(), images[i].fixed_points()) else {
                continue;
            };
            pairs.push((src.angle(), dst.angle()));
        }
        let mut map = Self::from_pairs(pairs, length)?;
        let short = ball.iter().take_while(|e| e.word.len() <= REFINE_LENGTH);
        map.refiners = short.enumerate().map(|(i, e)| (e.iso.inverse(), images[i])).collect();
        Ok(map)
    }

    /// Builds from `(source, image)` angle pairs.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>, word_length: usize) -> Result<Self, MapError> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-12);
        if pairs.len() > 1 && TAU - pairs[pairs.len() - 1].0 + pairs[0].0 < 1e-12 {
            pairs.pop();
        }
        let n = pairs.len();
        let mut targets = Vec::with_capacity(n);
        let mut winding = 0.0;
        let mut t = pairs[0].1;
        for i in 0..n {
            if i > 0 {
                let step = ccw(pairs[i - 1].1, pairs[i].1);
                t += step;
            }
            targets.push(t);
            let step = ccw(pairs[i].1, pairs[(i + 1) % n].1);
            if step == 0.0 || step > TAU - 1e-15 {
                return Err(MapError::MonotonicityViolation { winding: f64::NAN });
            }
            winding += step;
        }
        if (winding - TAU).abs() > 1e-6 {
            return Err(MapError::MonotonicityViolation { winding: winding / TAU });
        }
        let sources: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut accuracy: f64 = 0.0;
        for i in 0..n {
            let gap = if i + 1 < n { targets[i + 1] - targets[i] } else { targets[0] + TAU - targets[n - 1] };
            accuracy = accuracy.max(gap);
        }
        Ok(Self { sources, targets, accuracy, word_length, refiners: Vec::new() })
    }

    /// Largest image gap between consecutive samples; a bound on the interpolation error.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// Largest gap between consecutive sample angles.
    pub fn source_gap(&self) -> f64 {
        let n = self.sources.len();
        let mut g: f64 = TAU - self.sources[n - 1] + self.sources[0];
        for w in self.sources.windows(2) {
            g = g.max(w[1] - w[0]);
        }
        g
    }

    pub fn samples(&self) -> usize {
        self.sources.len()
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    /// Image and the narrowest bracket found through `∂h̃(ξ) = φ(γ)·∂h̃(γ⁻¹ξ)`
    /// over short `γ`. Falls back to [`FixedPointMap::bracket_raw`] without refiners.
    pub fn bracket(&self, theta: f64) -> (f64, f64) {
        let mut best = self.bracket_raw(theta);
        for (g_inv, image) in &self.refiners {
            let (lo, hi) = self.interval(g_inv.apply_angle(theta));
            let (a, b) = (image.apply_angle(lo.1), image.apply_angle(hi.1));
            let width = ccw(a, b);
            if width < best.1 {
                let f = if hi.0 > lo.0 { ccw(lo.0, g_inv.apply_angle(theta)) / (hi.0 - lo.0) } else { 0.0 };
                best = (image.apply_angle(lo.1 + f * (hi.1 - lo.1)), width);
            }
        }
        best
    }

    /// Bracketing samples `((s0, t0), (s1, t1))` around `x`, unwrapped so `s0 <= x < s1`.
    fn interval(&self, theta: f64) -> ((f64, f64), (f64, f64)) {
        let n = self.sources.len();
        let x = wrap(theta);
        let i = self.sources.partition_point(|&s| s <= x);
        if i == 0 {
            ((self.sources[n - 1] - TAU, self.targets[n - 1] - TAU), (self.sources[0], self.targets[0]))
        } else if i == n {
            ((self.sources[n - 1], self.targets[n - 1]), (self.sources[0] + TAU, self.targets[0] + TAU))
        } else {
            ((self.sources[i - 1], self.targets[i - 1]), (self.sources[i], self.targets[i]))
        }
    }

    /// Plain interpolated image and the width of the bracketing image interval.
    pub fn bracket_raw(&self, theta: f64) -> (f64, f64) {
        let x = wrap(theta);
        let ((s0, t0), (s1, t1)) = self.interval(x);
        let f = if s1 > s0 { (x - s0) / (s1 - s0) } else { 0.0 };
        (wrap(t0 + f * (t1 - t0)), t1 - t0)
    }

    /// The inverse circle map, interpolating the same samples.
    pub fn inverse(&self) -> Self {
        let pairs = self.sources.iter().zip(&self.targets).map(|(s, t)| (wrap(*t), *s)).collect();
        let mut inv = Self::from_pairs(pairs, self.word_length).expect("inverse of a monotone map is monotone");
        inv.refiners = self.refiners.iter().map(|(g_inv, image)| (image.inverse(), g_inv.inverse())).collect();
        inv
    }
}

impl CircleMap for FixedPointMap {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.bracket(theta).0)
    }
}

/// An isometry acting on the boundary.
#[derive(Debug, Clone, Copy)]
pub struct IsometryMap(pub Isometry);

impl CircleMap for IsometryMap {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.0.apply_angle(theta))
    }
}

/// `g ∘ m`.
#[derive(Debug, Clone)]
pub struct Composed {
    pub outer: Isometry,
    pub inner: Arc<dyn CircleMap>,
}

impl CircleMap for Composed {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.outer.apply_angle(self.inner.map_angle(theta)?))
    }
}

/// `φ·f = f ∘ (m⁻¹ × m⁻¹ × m⁻¹)` given the inverse boundary map.
pub fn act_on_cocycle(inverse_map: Arc<dyn CircleMap>, f: &BoundaryCocycle) -> BoundaryCocycle {
    f.clone().transported(inverse_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::circ_dist;
    use crate::word::Gen;

    #[test]
    fn identity_automorphism_gives_identity() {
        let m = FixedPointMap::new(&TwistAutomorphism::identity(), 3).unwrap();
        for k in 0..50 {
            let x = k as f64 * 0.1257;
            assert!(circ_dist(m.map_angle(x).unwrap(), x) < 1e-12);
        }
        assert!(matches!(FixedPointMap::new(&TwistAutomorphism::identity(), 2), Err(MapError::SampleTooShort(2))));
    }

    #[test]
    fn twist_map_sends_axis_endpoint() {
        let t = TwistAutomorphism::twist(Gen::B).unwrap();
        let m = FixedPointMap::new(&t, 4).unwrap();
        let oct = octagon();
        let a = GroupWord::parse("a").unwrap();
        let (_, src) = oct.evaluate(&a).fixed_points().unwrap();
        let (_, dst) = oct.evaluate(&t.apply(&a)).fixed_points().unwrap();
        assert!(circ_dist(m.map_angle(src.angle()).unwrap(), dst.angle()) < 1e-12);
        let inv = m.inverse();
        for k in 0..40 {
            let x = 0.3 + k as f64 * 0.15;
            let raw = inv.bracket_raw(m.bracket_raw(x).0).0;
            assert!(circ_dist(raw, x) < 1e-12);
            let back = inv.map_angle(m.map_angle(x).unwrap()).unwrap();
            assert!(circ_dist(back, x) <= inv.accuracy() + m.source_gap());
        }
    }

    #[test]
    fn non_monotone_samples_are_rejected() {
        let pairs = vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0), (3.0, 3.0)];
        assert!(matches!(FixedPointMap::from_pairs(pairs, 3), Err(MapError::MonotonicityViolation { .. })));
    }
}
