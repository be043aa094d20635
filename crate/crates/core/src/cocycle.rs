//! Alternating bounded cocycles on triples of boundary points, and the
//! property harness that checks them.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::{FormError, TwoForm};
use crate::lifts::ideal_integral_by_lifts;
use crate::geom::{circ_dist, orientation_of_angles, CompactTriangle, Isometry};
use crate::mcg::boundary_map::{CircleMap, MapError};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A bounded alternating function on `(S¹)³`, evaluated on angle triples.
#[derive(Clone)]
pub enum BoundaryCocycle {
    /// `∫` of a 2-form over the ideal triangle.
    Integral { form: TwoForm, tol: f64 },
    /// The same integral for an area-bump form, summed over the lifts of each bump.
    LiftSum { form: TwoForm, tol: f64 },
    /// `+1` on counter-clockwise triples, `-1` on clockwise ones.
    Orientation,
    Scalar(f64, Box<BoundaryCocycle>),
    Sum(Box<BoundaryCocycle>, Box<BoundaryCocycle>),
    /// `f(m ξ₀, m ξ₁, m ξ₂)`.
    Transported { map: Arc<dyn CircleMap>, inner: Box<BoundaryCocycle> },
}

impl fmt::Debug for BoundaryCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integral { form, tol } => write!(f, "Integral(sup={}, tol={tol})", form.sup()),
            Self::LiftSum { form, tol } => write!(f, "LiftSum(sup={}, tol={tol})", form.sup()),
            Self::Orientation => write!(f, "Orientation"),
            Self::Scalar(c, inner) => write!(f, "{c}·{inner:?}"),
            Self::Sum(a, b) => write!(f, "({a:?} + {b:?})"),
            Self::Transported { inner, .. } => write!(f, "Transported({inner:?})"),
        }
    }
}

impl BoundaryCocycle {
    pub fn integral(form: TwoForm) -> Self {
        Self::Integral { form, tol: DEFAULT_TOL }
    }

    pub fn integral_with_tol(form: TwoForm, tol: f64) -> Self {
        Self::Integral { form, tol }
    }

    /// Lift-sum evaluation; the form must be built from area bumps and the volume form.
    pub fn integral_by_lifts(form: TwoForm, tol: f64) -> Result<Self, CocycleError> {
        if !form.is_radial() {
            return Err(FormError::NotRadial.into());
        }
        Ok(Self::LiftSum { form, tol })
    }

    pub fn euler() -> Self {
        Self::Scalar(PI, Box::new(Self::Orientation))
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::Scalar(c, Box::new(self))
    }

    pub fn plus(self, other: Self) -> Self {
        Self::Sum(Box::new(self), Box::new(other))
    }

    pub fn transported(self, map: Arc<dyn CircleMap>) -> Self {
        Self::Transported { map, inner: Box::new(self) }
    }

    /// Declared bound on `|f|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Integral { form, .. } | Self::LiftSum { form, .. } => PI * form.sup(),
            Self::Orientation => 1.0,
            Self::Scalar(c, inner) => c.abs() * inner.sup_norm(),
            Self::Sum(a, b) => a.sup_norm() + b.sup_norm(),
            Self::Transported { inner, .. } => inner.sup_norm(),
        }
    }

    /// Value on a triple of angles; `0` on the multidiagonal.
    pub fn eval(&self, t: [f64; 3]) -> Result<f64, CocycleError> {
        match self {
            Self::Integral { form, tol } => Ok(form.ideal_integral_angles(t, *tol)?.value),
            Self::LiftSum { form, tol } => Ok(ideal_integral_by_lifts(form, t, *tol)?.value),
            Self::Orientation => Ok(orientation_of_angles(t[0], t[1], t[2]) as f64),
            Self::Scalar(c, inner) => Ok(c * inner.eval(t)?),
            Self::Sum(a, b) => Ok(a.eval(t)? + b.eval(t)?),
            Self::Transported { map, inner } => {
                let m = [map.map_angle(t[0])?, map.map_angle(t[1])?, map.map_angle(t[2])?];
                inner.eval(m)
            }
        }
    }

    /// `δf(ξ₀, ξ₁, ξ₂, ξ₃)`.
    pub fn coboundary(&self, q: [f64; 4]) -> Result<f64, CocycleError> {
        let [a, b, c, d] = q;
        Ok(self.eval([b, c, d])? - self.eval([a, c, d])? + self.eval([a, b, d])? - self.eval([a, b, c])?)
    }
}

/// Max of `|δf|` over the sampled quadruples.
pub fn check_cocycle(f: &BoundaryCocycle, quadruples: &[[f64; 4]]) -> Result<f64, CocycleError> {
    quadruples.iter().try_fold(0.0f64, |m, q| Ok(m.max(f.coboundary(*q)?.abs())))
}

/// Max of `|f(gξ) - f(ξ)|` over the sampled triples.
pub fn check_invariance(f: &BoundaryCocycle, g: &Isometry, triples: &[[f64; 3]]) -> Result<f64, CocycleError> {
    triples.iter().try_fold(0.0f64, |m, t| {
        let moved = t.map(|x| g.apply_angle(x));
        Ok(m.max((f.eval(moved)? - f.eval(*t)?).abs()))
    })
}

/// Max over triples of the worst deviation from `sign(σ)·f` under the six permutations.
pub fn check_alternation(f: &BoundaryCocycle, triples: &[[f64; 3]]) -> Result<f64, CocycleError> {
    const PERMS: [([usize; 3], f64); 6] =
        [([0, 1, 2], 1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([1, 0, 2], -1.0), ([0, 2, 1], -1.0), ([2, 1, 0], -1.0)];
    let mut worst: f64 = 0.0;
    for t in triples {
        let base = f.eval(*t)?;
        for (p, s) in PERMS {
            let v = f.eval([t[p[0]], t[p[1]], t[p[2]]])?;
            worst = worst.max((v - s * base).abs());
        }
    }
    Ok(worst)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Uniform angles for sample `i` of a stream; independent of how many samples
/// are drawn before it.
pub fn sample_angles<const N: usize>(seed: u64, i: usize) -> [f64; N] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * N as u128 * i as u128);
    std::array::from_fn(|_| TAU * rng.random::<f64>())
}

fn mean_estimate(n: usize, mut f: impl FnMut(usize) -> Result<f64, CocycleError>) -> Result<Estimate, CocycleError> {
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for i in 0..n {
        let v = f(i)?;
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / n as f64;
    let var = ((sum2 / n as f64) - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
    Ok(Estimate { value: mean, stderr: (var / n as f64).sqrt(), samples: n })
}

/// `ψ(f)(γ₀, γ₁, γ₂) = ∫ f(γ₀x₀, γ₁x₁, γ₂x₂) dx`, by Monte Carlo.
pub fn psi(f: &BoundaryCocycle, g: [&Isometry; 3], samples: usize, seed: u64) -> Result<Estimate, CocycleError> {
    if samples < MIN_MC_SAMPLES {
        return Err(CocycleError::TooFewSamples(samples));
    }
    mean_estimate(samples, |i| {
        let x: [f64; 3] = sample_angles(seed, i);
        f.eval([g[0].apply_angle(x[0]), g[1].apply_angle(x[1]), g[2].apply_angle(x[2])])
    })
}

/// The bounded alternating function `b(x, y) = sin(y - x)` on pairs.
pub fn probe_one_cochain(x: f64, y: f64) -> f64 {
    (y - x).sin()
}

/// `ψ(b)(γ₀, γ₁)` in closed form: by the mean value property the average of
/// `γ(e^{ix})` is `γ(0)`, and the two arguments are independent.
pub fn psi_probe_exact(g0: &Isometry, g1: &Isometry) -> f64 {
    let p = g0.apply_origin();
    let q = g1.apply_origin();
    (q * p.conj()).im
}

/// Chain-map probe: Monte Carlo `ψ(δb)` against `δψ(b)` from the closed form.
pub fn chain_probe(g: [&Isometry; 3], samples: usize, seed: u64) -> Result<(Estimate, f64), CocycleError> {
    if samples < MIN_MC_SAMPLES {
        return Err(CocycleError::TooFewSamples(samples));
    }
    let est = mean_estimate(samples, |i| {
        let x: [f64; 3] = sample_angles(seed, i);
        let y = [g[0].apply_angle(x[0]), g[1].apply_angle(x[1]), g[2].apply_angle(x[2])];
        Ok(probe_one_cochain(y[1], y[2]) - probe_one_cochain(y[0], y[2]) + probe_one_cochain(y[0], y[1]))
    })?;
    let exact = psi_probe_exact(g[1], g[2]) - psi_probe_exact(g[0], g[2]) + psi_probe_exact(g[0], g[1]);
    Ok((est, exact))
}

/// `θ(c_ω)(γ₀, γ₁, γ₂)`: `ω` over the geodesic triangle on `γᵢ·0`.
pub fn theta_cochain(form: &TwoForm, g: [&Isometry; 3], tol: f64) -> Result<f64, CocycleError> {
    let t = CompactTriangle::new(g[0].apply_origin(), g[1].apply_origin(), g[2].apply_origin());
    Ok(form.compact_integral(&t, tol)?.value)
}

fn separated(points: &[f64], sep: f64) -> bool {
    points.iter().enumerate().all(|(i, a)| points[i + 1..].iter().all(|b| circ_dist(*a, *b) >= sep))
}

/// Uniform boundary `N`-tuples with pairwise separation at least `sep`.
pub fn sample_tuples<const N: usize>(count: usize, sep: f64, seed: u64) -> Vec<[f64; N]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t: [f64; N] = std::array::from_fn(|_| TAU * rng.random::<f64>());
        if separated(&t, sep) {
            out.push(t);
        }
    }
    out
}
