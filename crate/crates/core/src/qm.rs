//! De Rham quasimorphisms: `q_α(γ)` is the integral of `α` over the closed
//! geodesic freely homotopic to `γ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use thiserror::Error;

use crate::dd::to_c64;
use crate::forms::{FormError, OneForm};
use crate::fuchsian::octagon;
use crate::geom::klein;
use crate::word::GroupWord;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmError {
    #[error("word {0} does not evaluate to a hyperbolic element")]
    NotHyperbolic(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// `q_α` for a fixed 1-form and the octagon metric.
#[derive(Debug)]
pub struct DeRhamQM {
    alpha: OneForm,
    tol: f64,
    sup_curl: f64,
    cache: RwLock<HashMap<GroupWord, f64>>,
}

impl DeRhamQM {
    pub fn new(alpha: OneForm) -> Self {
        Self::with_tolerance(alpha, DEFAULT_TOL)
    }

    pub fn with_tolerance(alpha: OneForm, tol: f64) -> Self {
        let sup_curl = alpha.d().sup();
        Self { alpha, tol, sup_curl, cache: RwLock::new(HashMap::new()) }
    }

    pub fn form(&self) -> &OneForm {
        &self.alpha
    }

    /// Bound on `|dα / dVol|`.
    pub fn curl_sup(&self) -> f64 {
        self.sup_curl
    }

    pub fn eval(&self, w: &GroupWord) -> Result<f64, QmError> {
        if w.is_empty() {
            return Ok(0.0);
        }
        if let Some(v) = self.cache.read().expect("cache poisoned").get(w) {
            return Ok(*v);
        }
        let v = self.compute(w)?;
        self.cache.write().expect("cache poisoned").insert(w.clone(), v);
        Ok(v)
    }

    fn compute(&self, w: &GroupWord) -> Result<f64, QmError> {
        let g = octagon().evaluate_dd(w);
        let half = g.half_trace();
        if (half.hi() - 1.0) <= 1e-9 {
            if g.to_f64().is_identity(1e-8) {
                return Ok(0.0);
            }
            return Err(QmError::NotHyperbolic(w.to_string()));
        }
        let len = g.translation_length();
        let frame = g.axis_frame();
        // the foot of the origin on the axis has Klein coordinate tanh(s)
        let u = to_c64(frame.inverse().apply_origin());
        let center = klein(u).re.clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh();
        let q = self.alpha.integrate_frame(&frame, center - len / 2.0, center + len / 2.0, self.tol)?;
        Ok(q.value)
    }

    /// `|q(wⁿ) - n·q(w)|`.
    pub fn homogeneity_residual(&self, w: &GroupWord, n: i32) -> Result<f64, QmError> {
        let qn = self.eval(&w.pow(n))?;
        let q = self.eval(w)?;
        Ok((qn - n as f64 * q).abs())
    }

    /// Largest `|q(g) + q(h) - q(gh)|` over the sample.
    pub fn defect_estimate(&self, pairs: &[(GroupWord, GroupWord)]) -> Result<DefectReport, QmError> {
        let mut report = DefectReport {
            max: 0.0,
            witness: None,
            pairs: pairs.len(),
            bound: PI * self.sup_curl,
            homogeneous_bound: 2.0 * PI * self.sup_curl,
        };
        for (g, h) in pairs {
            let d = (self.eval(g)? + self.eval(h)? - self.eval(&g.concat(h))?).abs();
            if d > report.max || report.witness.is_none() {
                report.max = report.max.max(d);
                report.witness = Some((g.clone(), h.clone()));
            }
        }
        Ok(report)
    }

    /// Sample-level evidence on whether `q` is a homomorphism.
    pub fn is_trivial(&self, words: &[GroupWord], pairs: &[(GroupWord, GroupWord)], threshold: f64) -> Result<TrivialityReport, QmError> {
        let defect = self.defect_estimate(pairs)?.max;
        let gens: Vec<f64> = ["a", "b", "c", "d"]
            .iter()
            .map(|s| self.eval(&GroupWord::parse(s).expect("generator")))
            .collect::<Result<_, _>>()?;
        let mut abel: f64 = 0.0;
        for w in words {
            let predicted: f64 = w.abelianize().iter().zip(&gens).map(|(&k, &q)| k as f64 * q).sum();
            abel = abel.max((self.eval(w)? - predicted).abs());
        }
        let zero = words.iter().map(|w| self.eval(w).map(f64::abs)).try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
        Ok(TrivialityReport {
            defect,
            abelianization_residual: abel,
            max_abs: zero,
            threshold,
            homomorphism_like: defect < threshold && abel < threshold,
            vanishes: zero < threshold,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub max: f64,
    pub witness: Option<(GroupWord, GroupWord)>,
    pub pairs: usize,
    /// `π · sup|dα/dVol|`.
    pub bound: f64,
    /// `2π · sup|dα/dVol|`, which also covers the homogenized values.
    pub homogeneous_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrivialityReport {
    pub defect: f64,
    pub abelianization_residual: f64,
    pub max_abs: f64,
    pub threshold: f64,
    pub homomorphism_like: bool,
    pub vanishes: bool,
}

/// Deterministic subsample of `ball × ball` word pairs.
pub fn sample_pairs(words: &[GroupWord], budget: usize, seed: u64) -> Vec<(GroupWord, GroupWord)> {
    use rand::{Rng, SeedableRng};
    let n = words.len();
    if n * n <= budget {
        return words.iter().flat_map(|g| words.iter().map(move |h| (g.clone(), h.clone()))).collect();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| (words[rng.random_range(0..n)].clone(), words[rng.random_range(0..n)].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Bump, OneFormKind};
    use crate::geom::C64;

    fn q() -> DeRhamQM {
        let b = Bump::new(C64::new(0.25, 0.1), 0.7, 1.0).unwrap();
        DeRhamQM::new(OneForm::term(b, OneFormKind::X))
    }

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    #[test]
    fn basic_laws() {
        let q = q();
        assert_eq!(q.eval(&GroupWord::identity()).unwrap(), 0.0);
        assert_eq!(q.eval(&crate::word::relator()).unwrap(), 0.0);
        for s in ["a", "ab", "cDa"] {
            let v = q.eval(&w(s)).unwrap();
            assert!((v + q.eval(&w(s).inverse()).unwrap()).abs() < 1e-8);
            let conj = w(s).conjugate_by(&w("bC"));
            assert!((v - q.eval(&conj).unwrap()).abs() < 1e-8);
        }
        assert_eq!(q.homogeneity_residual(&w("ab"), 1).unwrap(), 0.0);
        assert!(q.homogeneity_residual(&w("a"), 3).unwrap() < 3e-6);
        assert!(q.homogeneity_residual(&w("ab"), -2).unwrap() < 2e-6);
    }

    #[test]
    fn long_powers_stay_homogeneous() {
        let q = q();
        let base = w("BCd");
        let one = q.eval(&base).unwrap();
        for n in [6, 8, -8] {
            assert!(q.homogeneity_residual(&base, n).unwrap() < 1e-8, "n = {n}, q = {one}");
        }
    }

    #[test]
    fn some_period_is_nonzero() {
        let q = q();
        let m = ["a", "b", "c", "d", "ab", "aD"].iter().map(|s| q.eval(&w(s)).unwrap().abs()).fold(0.0, f64::max);
        assert!(m > 1e-3, "{m}");
    }

    #[test]
    fn exact_form_vanishes() {
        let b = Bump::new(C64::new(-0.2, 0.3), 0.6, 2.0).unwrap();
        let q = DeRhamQM::new(OneForm::term(b, OneFormKind::Exact));
        for s in ["a", "bcD", "abAB"] {
            assert!(q.eval(&w(s)).unwrap().abs() < 1e-8);
        }
    }
}
