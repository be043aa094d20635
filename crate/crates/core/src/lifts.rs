//! Ideal-triangle integrals of bump 2-forms as sums over the lifts of each bump.
//!
//! In Klein coordinates centred at a lift, the support is the disk of radius
//! `tanh R` and each side of the triangle is a chord. A lift therefore
//! contributes its full mass when its centre lies inside the triangle, minus
//! the mass beyond every side it sees from the inside, plus the mass beyond
//! every side it sees from the outside. The mass beyond a chord at distance
//! `p` is tabulated once per radius.
//!
//! Lifts are found by walking tiles outward from the one holding the
//! triangle's incentre, up to a radius `ρ` around it. What is left lies in the
//! three cusps beyond horocycles at height `Y` of the standard triangle
//! `(-1, 1, ∞)`, of total area `6 / Y`.

use std::collections::HashMap;
use std::f64::consts::{E, PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use rustc_hash::FxHashMap;

use crate::forms::{FormError, TwoForm, PROFILE_MASS};
use crate::fuchsian::{octagon, FuchsianError};
use crate::geom::{distance, distance_from_origin, Isometry, C64};
use crate::quad::{adaptive_1d, Quad};
use crate::triangle::{canonical, ideal_incenter};
use crate::word::Letter;

const PIECES: usize = 64;
const NODES: usize = 16;
const MAX_TILES: usize = 1_000_000;
const BAND: f64 = 0.5;
const COSH_ONE: f64 = 1.543_080_634_815_243_7;

/// `E_n(x)` for `x ≥ 1`, by Lentz's continued fraction.
pub fn expint(n: u32, x: f64) -> f64 {
    let nm1 = f64::from(n) - 1.0;
    let mut b = x + f64::from(n);
    let mut c = 1e300;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let i = f64::from(i);
        let an = -i * (nm1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= 4.0 * f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}

/// `∫ₛ¹ P(σ) dσ` for the bump profile `P(σ) = exp(1 - 1/(1 - σ))`.
pub fn profile_tail(s: f64) -> f64 {
    if s >= 1.0 {
        return 0.0;
    }
    let w = 1.0 / (1.0 - s.max(0.0));
    E * expint(2, w) / w
}

/// Mass of a unit-amplitude bump of radius `radius` beyond a geodesic passing at
/// Klein distance `p` (that is, hyperbolic distance `atanh p`) from its centre.
pub fn mass_beyond(radius: f64, p: f64) -> f64 {
    let kappa = radius.tanh();
    if p >= kappa {
        return 0.0;
    }
    let scale = radius.cosh() - 1.0;
    let u0 = (p / kappa).acos();
    let tail = |u: f64| {
        let k = p / u.cos();
        if k >= kappa {
            return 0.0;
        }
        let root = (1.0 - k * k).sqrt();
        profile_tail(k * k / (root * (1.0 + root)) / scale)
    };
    2.0 * scale * adaptive_1d(tail, 0.0, u0, 1e-15, 4, 1_000_000).value
}

/// Piecewise Chebyshev table of [`mass_beyond`] on `[0, tanh R]`.
#[derive(Debug)]
struct Profile {
    radius: f64,
    kappa: f64,
    /// Unit-amplitude mass.
    mass: f64,
    pieces: Vec<[f64; NODES]>,
}

impl Profile {
    fn new(radius: f64) -> Self {
        let kappa = radius.tanh();
        let width = kappa / PIECES as f64;
        let nodes: [f64; NODES] = std::array::from_fn(|j| (PI * (j as f64 + 0.5) / NODES as f64).cos());
        let pieces = (0..PIECES)
            .map(|i| {
                let mid = width * (i as f64 + 0.5);
                let values = nodes.map(|x| mass_beyond(radius, mid + 0.5 * width * x));
                std::array::from_fn(|m| {
                    let sum: f64 = (0..NODES)
                        .map(|j| values[j] * (PI * m as f64 * (j as f64 + 0.5) / NODES as f64).cos())
                        .sum();
                    sum * if m == 0 { 1.0 } else { 2.0 } / NODES as f64
                })
            })
            .collect();
        let mass = TAU * (radius.cosh() - 1.0) * PROFILE_MASS;
        Self { radius, kappa, mass, pieces }
    }

    fn beyond(&self, p: f64) -> f64 {
        if p >= self.kappa {
            return 0.0;
        }
        let width = self.kappa / PIECES as f64;
        let i = ((p / width) as usize).min(PIECES - 1);
        let x = (p - width * (i as f64 + 0.5)) / (0.5 * width);
        let c = &self.pieces[i];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c[1..].iter().rev() {
            (b1, b2) = (2.0 * x * b1 - b2 + ck, b1);
        }
        x * b1 - b2 + c[0]
    }
}

fn profile(radius: f64) -> Arc<Profile> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Profile>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&radius.to_bits()) {
        return p.clone();
    }
    let p = Arc::new(Profile::new(radius));
    cache.lock().unwrap().insert(radius.to_bits(), p.clone());
    p
}

/// Tile centres seen so far, hashed by distance band and angle.
#[derive(Default)]
struct TileIndex {
    cells: FxHashMap<(i64, i64), Vec<C64>>,
    density: Vec<f64>,
}

impl TileIndex {
    /// Angular cells per radian in `band`, so that cells are about `BAND` wide.
    fn density(&mut self, band: i64) -> f64 {
        let b = band as usize;
        while self.density.len() <= b {
            self.density.push(((self.density.len() as f64 + 1.0) * BAND).sinh() / BAND);
        }
        self.density[b]
    }

    /// Inserts `z` unless a centre within distance 1 is already present.
    fn insert(&mut self, z: C64) -> bool {
        let band = (distance_from_origin(z) / BAND).floor() as i64;
        let theta = z.arg().rem_euclid(TAU);
        let zz = 1.0 - z.norm_sqr();
        let mut home = (band, 0);
        for b in (band - 1).max(0)..=band + 1 {
            let w = self.density(b);
            let n = ((TAU * w).ceil() as i64).max(1);
            let t = ((theta * w).floor() as i64).rem_euclid(n);
            if b == band {
                home = (b, t);
            }
            for dt in -1..=1 {
                if let Some(v) = self.cells.get(&(b, (t + dt).rem_euclid(n))) {
                    // cosh d(z, w) < cosh 1
                    if v.iter().any(|&w| 2.0 * (z - w).norm_sqr() < (COSH_ONE - 1.0) * zz * (1.0 - w.norm_sqr())) {
                        return false;
                    }
                }
            }
        }
        self.cells.entry(home).or_default().push(z);
        true
    }
}

/// Klein distance from `z` to each side, and whether `z` is on the inner side.
/// `verts` are counter-clockwise.
fn sides(z: C64, verts: &[C64; 3]) -> [(f64, bool); 3] {
    let one = C64::new(1.0, 0.0);
    let m = verts.map(|a| {
        let w = (a - z) * (one - z.conj() * a).conj();
        w / w.norm_sqr().sqrt()
    });
    std::array::from_fn(|i| {
        let (a, b) = (m[i], m[(i + 1) % 3]);
        ((a + b).norm_sqr().sqrt() / 2.0, a.re * b.im - a.im * b.re > 0.0)
    })
}

/// Horocycle height `Y` beyond which the three cusps of an ideal triangle hold
/// area at most `area`, and the distance from the incentre that covers the rest.
fn cusp_cut(area: f64) -> (f64, f64) {
    let y = (6.0 / area).max(2.0);
    let s3 = 3f64.sqrt();
    let rho = (1.0 + (1.0 + (y - s3).powi(2)) / (2.0 * s3 * y)).acosh();
    (y, rho)
}

/// Signed `∫ ω̃` over the ideal triangle with the given vertex angles.
///
/// The returned error bounds the cusp tails plus a rounding term for lifts far
/// from the origin.
pub fn ideal_integral_by_lifts(form: &TwoForm, angles: [f64; 3], tol: f64) -> Result<Quad, FormError> {
    if !form.is_radial() {
        return Err(FormError::NotRadial);
    }
    let Some((v, sign)) = canonical(angles) else {
        return Ok(Quad::zero());
    };
    let volume = form.volume_coefficient() * PI;
    let bumps = form.bump_terms();
    if bumps.is_empty() {
        return Ok(Quad { value: sign * volume, error: 0.0, evals: 0 });
    }
    let oct = octagon();
    let pts = v.map(|t| C64::from_polar(1.0, t));
    let (center, g) = oct.reduce_point(ideal_incenter(pts[0], pts[1], pts[2]))?;
    let verts = v.map(|t| C64::from_polar(1.0, g.apply_angle(t)));

    let sup = form.sup().max(f64::MIN_POSITIVE);
    let tail = 0.5 * tol;
    let (_, rho) = cusp_cut(tail / sup);
    let profiles: Vec<Arc<Profile>> = bumps.iter().map(|b| profile(b.radius())).collect();
    let r_max = bumps.iter().map(|b| b.radius()).fold(0.0, f64::max);
    let offset = bumps.iter().map(|b| distance_from_origin(b.center())).fold(0.0, f64::max);
    // a tile meeting the region of interest has its centre within a circumradius of it
    let near = r_max + offset + oct.circumradius();
    let reach = rho + near;

    let gens: Vec<Isometry> = Letter::ALL.iter().map(|&l| oct.letter(l)).collect();
    let mut index = TileIndex::default();
    index.insert(C64::new(0.0, 0.0));
    // each tile remembers the generator leading back to its parent
    let mut stack = vec![(Isometry::identity(), usize::MAX)];
    let mut total = 0.0;
    let mut rounding = 0.0;
    let mut lifts = 0;
    let mut tiles = 0;
    while let Some((h, back)) = stack.pop() {
        tiles += 1;
        if tiles > MAX_TILES {
            return Err(FuchsianError::ReductionStalled(MAX_TILES).into());
        }
        for (b, prof) in bumps.iter().zip(&profiles) {
            let q = h.apply(b.center());
            if distance(q, center) > rho + prof.radius {
                continue;
            }
            let s = sides(q, &verts);
            let inside = s.iter().all(|e| e.1);
            let mut c = if inside { prof.mass } else { 0.0 };
            let mut cut = false;
            for &(p, inner) in &s {
                if p < prof.kappa {
                    let mu = prof.beyond(p);
                    c += if inner { -mu } else { mu };
                    cut = true;
                }
            }
            if cut {
                let cond = verts.iter().map(|&a| 1.0 / (C64::new(1.0, 0.0) - q.conj() * a).norm()).fold(0.0, f64::max);
                rounding += b.amplitude().abs() * TAU * prof.radius.sinh() * 1e-15 * cond;
            }
            if c != 0.0 {
                lifts += 1;
                total += b.amplitude() * c;
            }
        }
        for (k, gen) in gens.iter().enumerate() {
            if k == back {
                continue;
            }
            let n = h.compose(gen);
            let z = n.apply_origin();
            if distance(z, center) > reach {
                continue;
            }
            let out = sides(z, &verts).iter().map(|&(p, inner)| if inner { -p.atanh() } else { p.atanh() }).fold(f64::NEG_INFINITY, f64::max);
            if out > near || !index.insert(z) {
                continue;
            }
            stack.push((n, (k + 4) % 8));
        }
    }
    Ok(Quad { value: sign * (volume + total), error: tail + rounding, evals: lifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Bump;
    use crate::quad::adaptive_2d;
    use crate::quad::Rect;

    #[test]
    fn profile_tail_matches_quadrature() {
        assert!((profile_tail(0.0) - PROFILE_MASS).abs() < 1e-14);
        for s in [0.1, 0.5, 0.9, 0.99] {
            let direct = adaptive_1d(|x| (1.0 - 1.0 / (1.0 - x)).exp(), s, 1.0, 1e-15, 8, 1_000_000).value;
            assert!((profile_tail(s) - direct).abs() < 1e-13, "{s}: {} vs {direct}", profile_tail(s));
        }
    }

    /// Mass beyond a geodesic in Fermi coordinates `(t, σ)` about it.
    fn beyond_fermi(radius: f64, d: f64) -> f64 {
        let scale = radius.cosh() - 1.0;
        let f = |t: f64, sigma: f64, _: usize| {
            let ch = d.cosh() * sigma.cosh() * t.cosh() + d.sinh() * sigma.sinh();
            let s = (ch - 1.0) / scale;
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - s)).exp() * sigma.cosh()
            }
        };
        let along = (radius.cosh() / d.cosh()).acosh();
        adaptive_2d(f, &[Rect::new(-along, along, 0.0, radius - d, 0)], 1e-12, |_| 0.0, 10_000_000).value
    }

    #[test]
    fn mass_beyond_a_line() {
        let r: f64 = 0.8;
        let full = TAU * (r.cosh() - 1.0) * PROFILE_MASS;
        assert!((mass_beyond(r, 0.0) - full / 2.0).abs() < 1e-12);
        assert_eq!(mass_beyond(r, r.tanh()), 0.0);
        for d in [0.05f64, 0.2, 0.5, 0.7] {
            let a = mass_beyond(r, d.tanh());
            let b = beyond_fermi(r, d);
            assert!((a - b).abs() < 1e-9, "d = {d}: {a} vs {b}");
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let p = Profile::new(0.6);
        for i in 0..=200 {
            let x = p.kappa * i as f64 / 200.0;
            assert!((p.beyond(x) - mass_beyond(0.6, x)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn agrees_with_quadrature() {
        let form = TwoForm::bumps(vec![
            Bump::new(C64::new(-0.3, 0.15), 0.5, 2.0).unwrap(),
            Bump::new(C64::new(0.1, -0.35), 0.6, -1.5).unwrap(),
        ])
        .add(&TwoForm::volume().scaled(0.25));
        for i in 0..8 {
            let t: [f64; 3] = crate::cocycle::sample_angles(5, i);
            let a = ideal_integral_by_lifts(&form, t, 1e-9).unwrap();
            let b = form.ideal_integral_angles(t, 1e-9).unwrap();
            let diff = (a.value - b.value).abs();
            assert!(diff < 1e-7, "{t:?}: {} vs {}", a.value, b.value);
            assert!(diff <= a.error + b.error);
            let c = ideal_integral_by_lifts(&form, t, 1e-6).unwrap();
            assert!(c.error < 1e-6 && (c.value - b.value).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_and_volume_only() {
        let form = TwoForm::bump(Bump::new(C64::new(0.2, 0.1), 0.8, 1.0).unwrap());
        assert_eq!(ideal_integral_by_lifts(&form, [1.0, 1.0, 2.0], 1e-6).unwrap().value, 0.0);
        let vol = TwoForm::volume();
        assert_eq!(ideal_integral_by_lifts(&vol, [0.0, 2.0, 4.0], 1e-6).unwrap().value, PI);
        assert_eq!(ideal_integral_by_lifts(&vol, [0.0, 4.0, 2.0], 1e-6).unwrap().value, -PI);
    }
}
