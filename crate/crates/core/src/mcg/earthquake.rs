//! The earthquake along the lifts of a simple closed geodesic: identity on the
//! central plate around `0`, and translation by the curve length across each lift.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::fuchsian::octagon;
use crate::geom::{ccw, circ_dist, wrap, Geodesic, Isometry, C64};
use crate::mcg::boundary_map::{CircleMap, MapError};
use crate::word::{Gen, GroupWord, Letter};

pub const DEFAULT_RADIUS: f64 = 13.0;
pub const DEFAULT_DEPTH: usize = 8;
const ENDPOINT_TOL: f64 = 1e-14;

/// A lift of the curve with the boundary arc it cuts off from the basepoint.
#[derive(Debug, Clone)]
pub struct Lift {
    pub geodesic: Geodesic,
    /// Counter-clockwise start of the arc away from `0`.
    pub arc_start: f64,
    pub arc_width: f64,
    /// Translation along the lift by the curve length, attracting towards the arc's counter-clockwise end.
    pub shift: Isometry,
    pub shift_inv: Isometry,
    pub distance: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

impl Lift {
    /// Repelling endpoint (counter-clockwise start of the arc).
    pub fn repelling(&self) -> f64 {
        self.arc_start
    }

    /// Attracting endpoint (counter-clockwise end of the arc).
    pub fn attracting(&self) -> f64 {
        wrap(self.arc_start + self.arc_width)
    }

    /// Whether `theta` is strictly inside the arc.
    pub fn contains(&self, theta: f64) -> bool {
        let x = ccw(self.arc_start, theta);
        x > 0.0 && x < self.arc_width
    }
}

/// An affected region adjacent to the central plate.
pub type AffectedRegion = Lift;

/// Image of `ξ` with a bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthquakeImage {
    pub value: f64,
    pub bound: f64,
    /// Number of enumerated lifts separating `ξ` from the basepoint.
    pub chain: usize,
}

#[derive(Debug, Clone)]
pub struct Earthquake {
    curve: Gen,
    length: f64,
    lifts: Vec<Lift>,
    roots: Vec<usize>,
    /// Cut point of the circle not inside any arc.
    cut: f64,
    /// Every lift not enumerated has arc width below `2 · half_width_max`.
    half_width_max: f64,
    depth: usize,
}

fn orbit_points(radius: f64) -> Vec<Isometry> {
    let oct = octagon();
    let cell = 1e-9;
    let key = |z: C64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut seen: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut out = vec![Isometry::identity()];
    seen.entry(key(C64::new(0.0, 0.0))).or_default().push(0);
    let gens: Vec<Isometry> = Letter::ALL.iter().map(|&l| oct.letter(l)).collect();
    let max_norm = (radius / 2.0).tanh();
    let mut frontier = vec![0];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &i in &frontier {
            for g in &gens {
                let h = out[i].compose(g);
                let p = h.apply_origin();
                if p.norm() > max_norm {
                    continue;
                }
                let (kx, ky) = key(p);
                let dup = (-1..=1).any(|dx| {
                    (-1..=1).any(|dy| seen.get(&(kx + dx, ky + dy)).is_some_and(|v| v.iter().any(|&j| (out[j].apply_origin() - p).norm() < 1e-10)))
                });
                if dup {
                    continue;
                }
                seen.entry((kx, ky)).or_default().push(out.len());
                next.push(out.len());
                out.push(h);
            }
        }
        frontier = next;
    }
    out
}

impl Earthquake {
    pub fn new(curve: Gen) -> Result<Self, MapError> {
        Self::with_radius(curve, DEFAULT_RADIUS, DEFAULT_DEPTH)
    }

    /// Enumerates the lifts `h·axis` for all orbit points `h·0` within `radius`.
    pub fn with_radius(curve: Gen, radius: f64, depth: usize) -> Result<Self, MapError> {
        let oct = octagon();
        let sigma = oct.evaluate(&GroupWord::gen(curve));
        let axis = sigma.axis().expect("generators are hyperbolic");
        let length = sigma.translation_length().expect("generators are hyperbolic");
        // every lift within this distance of 0 meets an orbit point within `radius`
        let certified = radius - length / 2.0 - axis.distance_from_origin();
        let half_width_max = (1.0 / certified.cosh()).asin();

        let cell = 1e-9;
        let ncell = (TAU / cell) as i64 + 1;
        let key = |t: f64| (wrap(t) / cell).floor() as i64;
        let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut lifts: Vec<Lift> = Vec::new();
        for h in orbit_points(radius) {
            let p = h.apply_angle(axis.start.angle());
            let q = h.apply_angle(axis.end.angle());
            let half = circ_dist(p, q) / 2.0;
            if half < half_width_max {
                continue;
            }
            let (kp, kq) = (key(p), key(q));
            let dup = (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    index.get(&((kp + dx).rem_euclid(ncell), (kq + dy).rem_euclid(ncell))).is_some_and(|v| {
                        v.iter().any(|&j| {
                            let g = &lifts[j].geodesic;
                            circ_dist(g.start.angle(), p) < 1e-9 && circ_dist(g.end.angle(), q) < 1e-9
                        })
                    })
                })
            });
            if dup {
                continue;
            }
            let geodesic = axis.apply(&h);
            let distance = (1.0 / half.sin()).acosh();
            if distance < 1e-9 {
                return Err(MapError::BasepointOnLift);
            }
            let (arc_start, arc_width) = if ccw(p, q) < PI { (p, ccw(p, q)) } else { (q, ccw(q, p)) };
            let conj = sigma.conjugate_by(&h);
            let shift = if circ_dist(q, wrap(arc_start + arc_width)) < circ_dist(p, wrap(arc_start + arc_width)) { conj } else { conj.inverse() };
            index.entry((kp, kq)).or_default().push(lifts.len());
            lifts.push(Lift {
                geodesic,
                arc_start,
                arc_width,
                shift,
                shift_inv: shift.inverse(),
                distance,
                parent: None,
                children: Vec::new(),
                depth: 0,
            });
        }
        let widest = (0..lifts.len()).max_by(|&i, &j| lifts[i].arc_width.total_cmp(&lifts[j].arc_width)).expect("at least one lift");
        let cut = lifts[widest].attracting();
        let mut eq = Self { curve, length, lifts, roots: Vec::new(), cut, half_width_max, depth };
        eq.build_tree()?;
        Ok(eq)
    }

    fn local(&self, theta: f64) -> f64 {
        ccw(self.cut, theta)
    }

    fn build_tree(&mut self) -> Result<(), MapError> {
        let mut order: Vec<usize> = (0..self.lifts.len()).collect();
        let starts: Vec<f64> = self.lifts.iter().map(|l| self.local(l.arc_start)).collect();
        order.sort_by(|&i, &j| starts[i].total_cmp(&starts[j]).then(self.lifts[j].arc_width.total_cmp(&self.lifts[i].arc_width)));
        let mut stack: Vec<usize> = Vec::new();
        for &i in &order {
            let s = starts[i];
            let e = s + self.lifts[i].arc_width;
            while let Some(&top) = stack.last() {
                if starts[top] + self.lifts[top].arc_width <= s {
                    stack.pop();
                } else {
                    break;
                }
            }
            if let Some(&top) = stack.last() {
                if starts[top] + self.lifts[top].arc_width < e {
                    return Err(MapError::LiftsCross(top, i));
                }
                self.lifts[i].parent = Some(top);
                self.lifts[i].depth = self.lifts[top].depth + 1;
                self.lifts[top].children.push(i);
            } else {
                self.lifts[i].depth = 1;
                self.roots.push(i);
            }
            stack.push(i);
        }
        Ok(())
    }

    pub fn curve(&self) -> Gen {
        self.curve
    }

    /// Translation length of the curve.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn lifts(&self) -> &[Lift] {
        &self.lifts
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    /// Unenumerated lifts have arcs narrower than twice this.
    pub fn half_width_max(&self) -> f64 {
        self.half_width_max
    }

    /// Affected regions adjacent to the central plate, widest first.
    pub fn regions(&self) -> Vec<&AffectedRegion> {
        let mut r: Vec<&Lift> = self.roots.iter().map(|&i| &self.lifts[i]).collect();
        r.sort_by(|a, b| b.arc_width.total_cmp(&a.arc_width).then(a.arc_start.total_cmp(&b.arc_start)));
        r
    }

    fn child_containing(&self, list: &[usize], theta: f64) -> Option<usize> {
        let x = self.local(theta);
        let k = list.partition_point(|&i| self.local(self.lifts[i].arc_start) < x);
        if k == 0 {
            return None;
        }
        let i = list[k - 1];
        let s = self.local(self.lifts[i].arc_start);
        let l = &self.lifts[i];
        // endpoints of a lift are fixed by its shift; keep them exact
        let on_end = circ_dist(theta, l.arc_start) < ENDPOINT_TOL || circ_dist(theta, l.attracting()) < ENDPOINT_TOL;
        (x > s && x < s + l.arc_width && !on_end).then_some(i)
    }

    /// Enumerated lifts separating `ξ` from the basepoint, outermost first.
    pub fn chain(&self, theta: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut list = &self.roots;
        while let Some(i) = self.child_containing(list, theta) {
            out.push(i);
            list = &self.lifts[i].children;
        }
        out
    }

    fn apply_chain(&self, chain: &[usize], theta: f64) -> f64 {
        chain.iter().rev().fold(theta, |x, &i| self.lifts[i].shift.apply_angle(x))
    }

    /// Image truncated at `depth` crossings, with an error bound.
    pub fn map_with_bound(&self, theta: f64, depth: usize) -> EarthquakeImage {
        let theta = wrap(theta);
        let chain = self.chain(theta);
        let k = chain.len();
        if k == 0 {
            return EarthquakeImage { value: theta, bound: 4.0 * self.half_width_max, chain: 0 };
        }
        if k >= depth && depth > 0 {
            let used = &chain[..depth];
            let value = self.apply_chain(used, theta);
            let last = &self.lifts[used[depth - 1]];
            let a = self.apply_chain(&used[..depth - 1], last.arc_start);
            let b = self.apply_chain(&used[..depth - 1], last.attracting());
            return EarthquakeImage { value, bound: ccw(a, b), chain: k };
        }
        let value = self.apply_chain(&chain, theta);
        // a missed lift around ξ is narrower than `w` and sits inside the deepest enumerated arc
        let w = 2.0 * self.half_width_max;
        let last = &self.lifts[chain[k - 1]];
        let x = ccw(last.arc_start, theta);
        let a = self.apply_chain(&chain, last.arc_start + (x - w).max(0.0));
        let b = self.apply_chain(&chain, last.arc_start + (x + w).min(last.arc_width));
        EarthquakeImage { value, bound: ccw(a, b), chain: k }
    }

    /// Image using this earthquake's default depth.
    pub fn map(&self, theta: f64) -> EarthquakeImage {
        self.map_with_bound(theta, self.depth)
    }

    /// Image, failing when more than `depth` lifts separate `ξ` from the basepoint.
    pub fn map_strict(&self, theta: f64, depth: usize) -> Result<f64, MapError> {
        let chain = self.chain(wrap(theta));
        if chain.len() > depth {
            return Err(MapError::DepthExceeded { depth: chain.len(), limit: depth });
        }
        Ok(self.apply_chain(&chain, wrap(theta)))
    }

    /// Inverse map, descending through at most `depth` arcs.
    pub fn inverse_map(&self, theta: f64, depth: usize) -> f64 {
        let mut x = wrap(theta);
        let mut list = &self.roots;
        for _ in 0..depth {
            let Some(i) = self.child_containing(list, x) else { break };
            x = self.lifts[i].shift_inv.apply_angle(x);
            list = &self.lifts[i].children;
        }
        x
    }

    /// `n`-th iterate of the map.
    pub fn iterate(&self, theta: f64, n: usize) -> f64 {
        (0..n).fold(theta, |x, _| self.map(x).value)
    }

    pub fn inverse(&self) -> EarthquakeInverse<'_> {
        EarthquakeInverse(self)
    }
}

impl CircleMap for Earthquake {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.map(theta).value)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EarthquakeInverse<'a>(pub &'a Earthquake);

impl CircleMap for EarthquakeInverse<'_> {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.0.inverse_map(theta, self.0.depth))
    }
}

/// Owned inverse, for use inside cocycles.
#[derive(Debug, Clone)]
pub struct OwnedEarthquakeInverse(pub std::sync::Arc<Earthquake>);

impl CircleMap for OwnedEarthquakeInverse {
    fn map_angle(&self, theta: f64) -> Result<f64, MapError> {
        Ok(self.0.inverse_map(theta, self.0.depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn quake() -> &'static Earthquake {
        static Q: OnceLock<Earthquake> = OnceLock::new();
        Q.get_or_init(|| Earthquake::with_radius(Gen::A, 9.0, 8).unwrap())
    }

    #[test]
    fn laminar_and_fixed_endpoints() {
        let q = quake();
        assert!(q.regions().len() >= 3);
        for r in q.regions() {
            assert_eq!(q.map(r.arc_start).value, r.arc_start);
            assert_eq!(q.map(r.attracting()).value, r.attracting());
        }
    }

    #[test]
    fn single_crossing() {
        let q = quake();
        let r = q.regions()[0];
        // a point inside the region but outside its children
        let mut x = r.arc_start + 0.5 * r.arc_width;
        for k in 1..200 {
            if q.chain(x).len() == 1 {
                break;
            }
            x = r.arc_start + r.arc_width * (k as f64 / 200.0);
        }
        assert_eq!(q.chain(x).len(), 1);
        assert!(circ_dist(q.map(x).value, r.shift.apply_angle(x)) < 1e-15);
    }

    #[test]
    fn iterates_converge_to_attracting_end() {
        let q = quake();
        let r = q.regions()[0];
        let target = r.attracting();
        let mut x = r.arc_start + 0.3 * r.arc_width;
        let mut prev = circ_dist(x, target);
        for _ in 0..10 {
            x = q.map(x).value;
            let d = circ_dist(x, target);
            assert!(d < prev, "{d} {prev}");
            prev = d;
        }
    }

    #[test]
    fn inverse_round_trip() {
        let q = quake();
        for k in 0..100 {
            let x = 0.013 + k as f64 * TAU / 100.0;
            let y = q.map(x).value;
            assert!(circ_dist(q.inverse_map(y, q.depth()), wrap(x)) < 1e-10);
        }
    }

    #[test]
    fn strict_depth() {
        let q = quake();
        let deep = q.lifts().iter().find(|l| l.depth >= 3).expect("nested lifts");
        let x = deep.arc_start + deep.arc_width / 2.0;
        assert!(matches!(q.map_strict(x, 1), Err(MapError::DepthExceeded { .. })));
    }
}
