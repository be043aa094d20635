//! Experiments on the boundary action: three-region sampling, orbit
//! convergence, equivariance and cross-validation of the two boundary maps.

use thiserror::Error;

use crate::cocycle::{BoundaryCocycle, CocycleError};
use crate::fuchsian::BallElement;
use crate::geom::{circ_dist, Isometry};
use crate::mcg::boundary_map::FixedPointMap;
use crate::mcg::earthquake::Earthquake;
use crate::mcg::twist::TwistAutomorphism;
use crate::fuchsian::octagon;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("region index {index} out of range (only {available} regions)")]
    RegionIndex { index: usize, available: usize },
    #[error("regions must be pairwise distinct")]
    NotDistinct,
    #[error("grid must have at least one point per region")]
    EmptyGrid,
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeRegionReport {
    pub regions: [usize; 3],
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// `f` at the triple of attracting endpoints.
    pub limit: f64,
    /// `max |f(Eⁿξ) - limit|` over the diagonal grid triples, for `n = 1..`.
    pub orbit_residuals: Vec<f64>,
    /// Residuals never increase by more than `noise`.
    pub decreasing: bool,
}

/// Interior sample points of an arc.
fn arc_grid(start: f64, width: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| start + width * (j as f64 + 0.5) / n as f64).collect()
}

/// Samples `f` on the product of three affected-region arcs and follows
/// orbits of the earthquake towards the attracting endpoints.
pub fn three_region_experiment(
    f: &BoundaryCocycle,
    quake: &Earthquake,
    regions: [usize; 3],
    grid: usize,
    iterations: usize,
    noise: f64,
) -> Result<ThreeRegionReport, ExperimentError> {
    if grid == 0 {
        return Err(ExperimentError::EmptyGrid);
    }
    let all = quake.regions();
    for &r in &regions {
        if r >= all.len() {
            return Err(ExperimentError::RegionIndex { index: r, available: all.len() });
        }
    }
    if regions[0] == regions[1] || regions[1] == regions[2] || regions[0] == regions[2] {
        return Err(ExperimentError::NotDistinct);
    }
    let r = regions.map(|i| all[i]);
    let pts = r.map(|l| arc_grid(l.arc_start, l.arc_width, grid));
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for x in &pts[0] {
        for y in &pts[1] {
            for z in &pts[2] {
                let v = f.eval([*x, *y, *z])?;
                min = min.min(v);
                max = max.max(v);
            }
        }
    }
    let limit = f.eval(r.map(|l| l.attracting()))?;
    let mut orbit: Vec<[f64; 3]> = (0..grid).map(|j| [pts[0][j], pts[1][j], pts[2][j]]).collect();
    let mut orbit_residuals = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut worst: f64 = 0.0;
        for t in orbit.iter_mut() {
            *t = t.map(|x| quake.map(x).value);
            worst = worst.max((f.eval(*t)? - limit).abs());
        }
        orbit_residuals.push(worst);
    }
    let decreasing = orbit_residuals.windows(2).all(|w| w[1] <= w[0] + noise);
    Ok(ThreeRegionReport { regions, samples: grid * grid * grid, min, max, spread: max - min, limit, orbit_residuals, decreasing })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub max_residual: f64,
    /// Largest ratio of residual to its propagated accuracy.
    pub worst_ratio: f64,
    pub samples: usize,
}

/// `∂h̃(γξ)` against `φ(γ)·∂h̃(ξ)`, each residual compared with the bracket
/// widths propagated through the two evaluation paths. Uses the unrefined
/// interpolation, since refinement itself relies on equivariance.
pub fn equivariance(map: &FixedPointMap, phi: &TwistAutomorphism, gammas: &[BallElement], points: &[f64]) -> EquivarianceReport {
    let oct = octagon();
    let mut max_residual: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut samples = 0;
    for g in gammas {
        let image = oct.evaluate(&phi.apply(&g.word));
        for &x in points {
            let (lhs, gap_l) = map.bracket_raw(g.iso.apply_angle(x));
            let (fx, gap_x) = map.bracket_raw(x);
            let rhs = image.apply_angle(fx);
            let allowed = gap_l + image.boundary_derivative(fx) * gap_x;
            let res = circ_dist(lhs, rhs);
            max_residual = max_residual.max(res);
            worst_ratio = worst_ratio.max(res / allowed.max(1e-300));
            samples += 1;
        }
    }
    EquivarianceReport { max_residual, worst_ratio, samples }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub index: usize,
    pub word: String,
    pub isometry: Isometry,
    pub max_residual: f64,
    /// Largest interpolation gap, pushed through `g`.
    pub max_gap: f64,
    pub max_truncation: f64,
    pub samples: usize,
}

impl Normalization {
    pub fn bound(&self) -> f64 {
        self.max_gap.max(self.max_truncation)
    }
}

/// Finds `g` among the candidates minimizing `max |E(ξ) - g·F(ξ)|` over the points.
pub fn normalize(quake: &Earthquake, map: &FixedPointMap, candidates: &[BallElement], points: &[f64]) -> Normalization {
    let quake_images: Vec<_> = points.iter().map(|&x| quake.map(x)).collect();
    let brackets: Vec<(f64, f64)> = points.iter().map(|&x| map.bracket(x)).collect();
    let mut best: Option<Normalization> = None;
    for (index, c) in candidates.iter().enumerate() {
        let mut max_residual: f64 = 0.0;
        let mut max_gap: f64 = 0.0;
        for (q, (fx, gap)) in quake_images.iter().zip(&brackets) {
            max_residual = max_residual.max(circ_dist(q.value, c.iso.apply_angle(*fx)));
            max_gap = max_gap.max(gap * c.iso.boundary_derivative(*fx));
            if best.as_ref().is_some_and(|b| max_residual >= b.max_residual) {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| max_residual < b.max_residual) {
            let max_truncation = quake_images.iter().map(|q| q.bound).fold(0.0, f64::max);
            best = Some(Normalization {
                index,
                word: c.word.to_string(),
                isometry: c.iso,
                max_residual,
                max_gap,
                max_truncation,
                samples: points.len(),
            });
        }
    }
    best.expect("at least one candidate")
}
