//! The genus-2 surface group as the side-pairing group of the regular
//! hyperbolic octagon with vertex angle `π/4`, centered at the origin.
//!
//! Side `k` faces direction `θ_k = kπ/4`. Adjacent sides are paired
//! (`0↔2`, `1↔3`, `4↔6`, `5↔7`) and the pairing of side `k` is
//! `g_k = R(θ_k) · T · R(π - θ_j)` where `j` is the partner side and `T`
//! translates by twice the inradius. With the letters
//! `a = g₀, b = g₃, c = g₄, d = g₇` the relator is `[a,b][c,d]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::Deref;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::dd::{dd, Cdd, Dd, DdIsometry};
use crate::geom::{klein, GeomError, Geodesic, Isometry, C64};
use crate::word::{relator, GroupWord, Letter};

pub const DEFAULT_REDUCTION_CAP: usize = 10_000;
/// Matrix-proximity tolerance for identifying group elements.
pub const DEDUP_TOL: f64 = 1e-7;
/// Slack on the side test so that points on a side count as inside.
const SIDE_SLACK: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuchsianError {
    #[error("domain reduction did not terminate within {0} steps")]
    ReductionStalled(usize),
    #[error("the empty word has no closed geodesic")]
    TrivialWord,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Partner side under the side pairing.
pub fn partner(k: usize) -> usize {
    [2, 3, 0, 1, 6, 7, 4, 5][k]
}

/// Letter attached to side `k` (the element carrying the octagon across side `k`).
pub fn side_letter(k: usize) -> Letter {
    const CHARS: [char; 8] = ['a', 'B', 'A', 'b', 'c', 'D', 'C', 'd'];
    Letter::from_char(CHARS[k]).expect("static letter")
}

/// Side whose pairing is the given letter.
pub fn letter_side(l: Letter) -> usize {
    (0..8).find(|&k| side_letter(k) == l).expect("every letter labels a side")
}

/// Ball element: shortlex-least word and its isometry.
#[derive(Debug, Clone)]
pub struct BallElement {
    pub word: GroupWord,
    pub iso: Isometry,
}

#[derive(Debug)]
struct BallTable {
    elements: Vec<BallElement>,
    /// `offsets[n]` = number of elements of length ≤ n.
    offsets: Vec<usize>,
}

/// Shared view of `ball(n)`.
#[derive(Debug, Clone)]
pub struct Ball {
    table: Arc<BallTable>,
    len: usize,
}

impl Deref for Ball {
    type Target = [BallElement];

    fn deref(&self) -> &[BallElement] {
        &self.table.elements[..self.len]
    }
}

/// The octagon presentation of the surface group.
#[derive(Debug)]
pub struct Octagon {
    sides: [Isometry; 8],
    sides_dd: [DdIsometry; 8],
    inradius: f64,
    tanh_inradius: f64,
    tanh_inradius_dd: Dd,
    circumradius: f64,
    ball: Mutex<Option<Arc<BallTable>>>,
}

static OCTAGON: OnceLock<Octagon> = OnceLock::new();

/// The shared octagon presentation.
pub fn octagon() -> &'static Octagon {
    OCTAGON.get_or_init(Octagon::new)
}

fn zeta_powers() -> [Cdd; 32] {
    // e^{ikπ/16} for k = 0..32, built from exact half-angle values
    let half = dd(0.5);
    let s2 = dd(2.0).sqrt();
    let c8 = (dd(2.0) + s2).sqrt() * half;
    let c16 = ((dd(1.0) + c8) * half).sqrt();
    let s16 = ((dd(1.0) - c8) * half).sqrt();
    let z = Cdd::new(c16, s16);
    let mut out = [Cdd::new(dd(1.0), dd(0.0)); 32];
    for k in 1..32 {
        out[k] = out[k - 1] * z;
    }
    out
}

impl Octagon {
    fn new() -> Self {
        let s2 = dd(2.0).sqrt();
        let c = dd(1.0) + s2;
        let s = (c * c - dd(1.0)).sqrt();
        let zeta = zeta_powers();
        // e^{iφ/2} for φ = jπ/8 is zeta[j] (indices taken mod 32)
        let half_turn = |j: i64| zeta[j.rem_euclid(32) as usize];
        let mut sides_dd = [DdIsometry::identity(); 8];
        for (k, slot) in sides_dd.iter_mut().enumerate() {
            let j = partner(k) as i64;
            let k = k as i64;
            // φ1 = kπ/4, φ2 = π - jπ/4, both as multiples of π/8 doubled
            let p1 = 2 * k;
            let p2 = 8 - 2 * j;
            let alpha = half_turn(p1 + p2) * c;
            let beta = half_turn(p1 - p2) * s;
            *slot = DdIsometry::normalized(alpha, beta);
        }
        let sides = sides_dd.map(|g| g.to_f64());
        let cot = (PI / 8.0).tan().recip();
        let inradius = cot.acosh();
        let tanh_dd = crate::dd::div((c * c - dd(1.0)).sqrt(), c);
        Self {
            sides,
            sides_dd,
            inradius,
            tanh_inradius: inradius.tanh(),
            tanh_inradius_dd: tanh_dd,
            circumradius: (cot * cot).acosh(),
            ball: Mutex::new(None),
        }
    }

    /// Hyperbolic distance from the center to each side.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Hyperbolic distance from the center to each vertex.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Side pairing `g_k`.
    pub fn side(&self, k: usize) -> Isometry {
        self.sides[k]
    }

    pub fn side_dd(&self, k: usize) -> DdIsometry {
        self.sides_dd[k]
    }

    pub fn letter(&self, l: Letter) -> Isometry {
        self.sides[letter_side(l)]
    }

    pub fn letter_dd(&self, l: Letter) -> DdIsometry {
        self.sides_dd[letter_side(l)]
    }

    /// Octagon vertices, counter-clockwise, vertex `k` between sides `k` and `k+1`.
    pub fn vertices(&self) -> [C64; 8] {
        let r = (self.circumradius / 2.0).tanh();
        std::array::from_fn(|k| C64::from_polar(r, k as f64 * PI / 4.0 + PI / 8.0))
    }

    /// The eight sides as oriented geodesics.
    pub fn side_geodesics(&self) -> [Geodesic; 8] {
        let v = self.vertices();
        std::array::from_fn(|k| Geodesic::through(v[(k + 7) % 8], v[k]).expect("distinct vertices"))
    }

    /// Signed Klein-model offset of `z` beyond side `k` (positive outside).
    fn beyond(&self, z: C64, k: usize) -> f64 {
        let kz = klein(z) * C64::from_polar(1.0, -(k as f64) * PI / 4.0);
        kz.re - self.tanh_inradius
    }

    /// Whether `z` lies in the closed octagon.
    pub fn contains(&self, z: C64) -> bool {
        (0..8).all(|k| self.beyond(z, k) <= SIDE_SLACK)
    }

    /// Hyperbolic distance from `z` to the full geodesic through side `k`.
    pub fn side_distance(&self, z: C64, k: usize) -> f64 {
        let w = Isometry::translation(-self.inradius).apply(z * C64::from_polar(1.0, -(k as f64) * PI / 4.0));
        (2.0 * w.re.abs() / (1.0 - w.norm_sqr())).asinh()
    }

    pub fn evaluate(&self, w: &GroupWord) -> Isometry {
        w.letters().iter().fold(Isometry::identity(), |acc, &l| acc.compose(&self.letter(l)))
    }

    pub fn evaluate_dd(&self, w: &GroupWord) -> DdIsometry {
        w.letters().iter().fold(DdIsometry::identity(), |acc, &l| acc.compose(&self.letter_dd(l)))
    }

    /// Greedy reduction into the octagon: returns `(z', g, word)` with `g·z = z'`
    /// and `g = evaluate(word)`.
    pub fn reduce_with_isometry(&self, z: C64, cap: usize) -> Result<(C64, Isometry, GroupWord), FuchsianError> {
        let mut z = z;
        let mut g = Isometry::identity();
        let mut letters: Vec<Letter> = Vec::new();
        for _ in 0..cap {
            let mut best: Option<(usize, C64)> = None;
            for k in 0..8 {
                if self.beyond(z, k) > SIDE_SLACK {
                    let step = self.sides[partner(k)];
                    let cand = step.apply(z);
                    if best.is_none_or(|(_, b)| cand.norm_sqr() < b.norm_sqr()) {
                        best = Some((k, cand));
                    }
                }
            }
            let Some((k, next)) = best else {
                letters.reverse();
                return Ok((z, g, GroupWord::new(letters)));
            };
            z = next;
            g = self.sides[partner(k)].compose(&g);
            letters.push(side_letter(partner(k)));
        }
        Err(FuchsianError::ReductionStalled(cap))
    }

    /// Reduces `z` into the octagon: `evaluate(word)·z = z'`.
    pub fn reduce_to_domain(&self, z: C64) -> Result<(C64, GroupWord), FuchsianError> {
        let (zr, _, w) = self.reduce_with_isometry(z, DEFAULT_REDUCTION_CAP)?;
        Ok((zr, w))
    }

    /// Reduced point together with the reducing isometry only.
    pub fn reduce_point(&self, z: C64) -> Result<(C64, Isometry), FuchsianError> {
        let mut z = z;
        let mut g = Isometry::identity();
        for _ in 0..DEFAULT_REDUCTION_CAP {
            let mut best: Option<(usize, C64)> = None;
            for k in 0..8 {
                if self.beyond(z, k) > SIDE_SLACK {
                    let cand = self.sides[partner(k)].apply(z);
                    if best.is_none_or(|(_, b)| cand.norm_sqr() < b.norm_sqr()) {
                        best = Some((k, cand));
                    }
                }
            }
            let Some((k, next)) = best else {
                return Ok((z, g));
            };
            z = next;
            g = self.sides[partner(k)].compose(&g);
        }
        Err(FuchsianError::ReductionStalled(DEFAULT_REDUCTION_CAP))
    }

    /// Pulls a double-double isometry back so that its image of `0` lies in the
    /// octagon: returns `h` with `h·m·0` in the octagon.
    pub fn reduce_dd(&self, m: &DdIsometry) -> Result<(DdIsometry, DdIsometry), FuchsianError> {
        let mut cur = *m;
        let mut h = DdIsometry::identity();
        let one = dd(1.0);
        let two = dd(2.0);
        for _ in 0..DEFAULT_REDUCTION_CAP {
            let p = cur.apply_origin();
            let n2 = p.re * p.re + p.im * p.im;
            let kp = p * crate::dd::div(two, one + n2);
            let mut best: Option<(usize, DdIsometry, Dd)> = None;
            for k in 0..8 {
                let rot = zeta_dir(k);
                let proj = kp.re * rot.re + kp.im * rot.im;
                if (proj - self.tanh_inradius_dd).hi() > SIDE_SLACK {
                    let step = self.sides_dd[partner(k)];
                    let cand = step.compose(&cur);
                    let q = cand.apply_origin();
                    let qn = q.re * q.re + q.im * q.im;
                    if best.as_ref().is_none_or(|(_, _, b)| qn < *b) {
                        best = Some((k, cand, qn));
                    }
                }
            }
            let Some((k, next, _)) = best else {
                return Ok((h, cur));
            };
            cur = next;
            h = self.sides_dd[partner(k)].compose(&h);
        }
        Err(FuchsianError::ReductionStalled(DEFAULT_REDUCTION_CAP))
    }

    /// Axis and translation length of `evaluate(w)`.
    pub fn closed_geodesic(&self, w: &GroupWord) -> Result<(Geodesic, f64), FuchsianError> {
        if w.is_empty() {
            return Err(FuchsianError::TrivialWord);
        }
        let g = self.evaluate(w);
        let axis = g.axis()?;
        let len = self.evaluate_dd(w).translation_length();
        Ok((axis, len))
    }

    /// Residual of the surface relator.
    pub fn relator_residual(&self) -> f64 {
        self.evaluate(&relator()).distance(&Isometry::identity())
    }

    /// All group elements of word length ≤ `n`, one per element, shortlex-least words,
    /// in shortlex order.
    pub fn ball(&self, n: usize) -> Ball {
        let mut guard = self.ball.lock().expect("ball memo poisoned");
        if let Some(t) = guard.as_ref() {
            if t.offsets.len() > n {
                return Ball { table: t.clone(), len: t.offsets[n] };
            }
        }
        let table = Arc::new(self.build_ball(n));
        *guard = Some(table.clone());
        Ball { len: table.offsets[n], table }
    }

    fn build_ball(&self, n: usize) -> BallTable {
        let cell = 1e-9;
        let key = |z: C64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
        let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut elements = vec![BallElement { word: GroupWord::identity(), iso: Isometry::identity() }];
        index.entry(key(C64::new(0.0, 0.0))).or_default().push(0);
        let mut offsets = vec![1];
        let mut level = 0..1;
        for _ in 0..n {
            let start = elements.len();
            for i in level.clone() {
                let last = elements[i].word.letters().last().copied();
                for l in Letter::ALL {
                    if last == Some(l.inv()) {
                        continue;
                    }
                    let iso = elements[i].iso.compose(&self.letter(l));
                    let p = iso.apply_origin();
                    let (kx, ky) = key(p);
                    let dup = (-1..=1).any(|dx| {
                        (-1..=1).any(|dy| {
                            index.get(&(kx + dx, ky + dy)).is_some_and(|v| {
                                v.iter().any(|&j| elements[j].iso.distance(&iso) < DEDUP_TOL)
                            })
                        })
                    });
                    if dup {
                        continue;
                    }
                    let mut letters = elements[i].word.letters().to_vec();
                    letters.push(l);
                    index.entry((kx, ky)).or_default().push(elements.len());
                    elements.push(BallElement { word: GroupWord::new(letters), iso });
                }
            }
            level = start..elements.len();
            offsets.push(elements.len());
        }
        BallTable { elements, offsets }
    }
}

/// Unit vector in direction `kπ/4` in double-double.
fn zeta_dir(k: usize) -> Cdd {
    let s = dd(0.5).sqrt();
    let (c, si) = match k % 8 {
        0 => (dd(1.0), dd(0.0)),
        1 => (s, s),
        2 => (dd(0.0), dd(1.0)),
        3 => (-s, s),
        4 => (dd(-1.0), dd(0.0)),
        5 => (-s, -s),
        6 => (dd(0.0), dd(-1.0)),
        _ => (s, -s),
    };
    Cdd::new(c, si)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{distance, Kind};

    #[test]
    fn relator_is_identity() {
        assert!(octagon().relator_residual() < 1e-12);
        for g in crate::word::Gen::ALL {
            assert_eq!(octagon().letter(g.letter()).kind(), Kind::Hyperbolic);
        }
    }

    #[test]
    fn pairing_inverses() {
        let o = octagon();
        for k in 0..8 {
            assert!(o.side(k).compose(&o.side(partner(k))).is_identity(1e-13));
            assert_eq!(side_letter(partner(k)), side_letter(k).inv());
        }
    }

    #[test]
    fn generator_length_matches_trigonometry() {
        // adjacent-side pairing: cosh(ℓ/2) = cot(π/8) cos(π/4)
        let expected = 2.0 * ((PI / 8.0).tan().recip() * (PI / 4.0).cos()).acosh();
        let (axis, len) = octagon().closed_geodesic(&GroupWord::parse("a").unwrap()).unwrap();
        assert!((len - expected).abs() < 1e-12, "{len} {expected}");
        let z = axis.point_at(0.3);
        assert!((distance(z, octagon().evaluate(&GroupWord::parse("a").unwrap()).apply(z)) - expected).abs() < 1e-9);
    }

    #[test]
    fn side_pairing_maps_to_neighbour() {
        let o = octagon();
        for k in 0..8 {
            let p = o.side(k).apply_origin();
            let dir = C64::from_polar(1.0, k as f64 * PI / 4.0);
            assert!((p / p.norm() - dir).norm() < 1e-12);
            assert!((distance(C64::new(0.0, 0.0), p) - 2.0 * o.inradius()).abs() < 1e-12);
        }
    }

    #[test]
    fn reduce_orbit_of_center() {
        let o = octagon();
        let a = GroupWord::parse("a").unwrap();
        let (z, w) = o.reduce_to_domain(o.evaluate(&a).apply_origin()).unwrap();
        assert!(z.norm() < 1e-12);
        assert_eq!(w.to_string(), "A");
        let (z, w) = o.reduce_to_domain(C64::new(0.1, 0.2)).unwrap();
        assert_eq!(z, C64::new(0.1, 0.2));
        assert!(w.is_empty());
    }

    #[test]
    fn vertices_on_sides() {
        let o = octagon();
        for (k, v) in o.vertices().iter().enumerate() {
            assert!(o.side_distance(*v, k) < 1e-9);
            assert!(o.side_distance(*v, (k + 1) % 8) < 1e-9);
        }
    }

    #[test]
    fn ball_sizes() {
        let b = octagon().ball(3);
        let sizes: Vec<usize> = (0..=3).map(|n| octagon().ball(n).len()).collect();
        assert_eq!(sizes, vec![1, 9, 65, 457]);
        assert_eq!(b[1].word.to_string(), "a");
        assert_eq!(b[8].word.to_string(), "D");
    }

    #[test]
    fn dd_reduction_far_out() {
        let o = octagon();
        let w = GroupWord::parse("abcdabcdacbdCA").unwrap();
        let m = o.evaluate_dd(&w);
        let (h, r) = o.reduce_dd(&m).unwrap();
        let p = crate::dd::to_c64(r.apply_origin());
        assert!(o.contains(p));
        assert!(p.norm() < 1e-10, "{p}");
        assert!(h.compose(&m).to_f64().distance(&r.to_f64()) < 1e-9);
    }
}
