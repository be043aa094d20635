//! Experiment configuration, read from a TOML file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use hypcoh::forms::{Bump, OneForm, OneFormKind, TwoForm};
use hypcoh::geom::C64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    /// Area density, for 2-forms.
    Area,
    /// `φ dx`-type 1-form term with non-zero curl.
    X,
    /// `φ dy`-type 1-form term with non-zero curl.
    Y,
    /// `dφ`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub name: String,
    pub kind: BumpKind,
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

/// A named form: a sum of bumps, plus a multiple of the volume form for 2-forms.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub name: String,
    #[serde(default)]
    pub bumps: Vec<String>,
    #[serde(default)]
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: f64,
    pub line: f64,
    /// Per-sample quadrature tolerance inside Monte Carlo estimates.
    pub monte_carlo: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: 1e-8, line: 1e-9, monte_carlo: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub euler: f64,
    pub cocycle: f64,
    pub invariance: f64,
    pub homogeneity: f64,
    pub conjugacy: f64,
    pub exact: f64,
    pub defect_slack: f64,
    pub endpoint: f64,
    pub orbit_noise: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            euler: 1e-5,
            cocycle: 4e-6,
            invariance: 1e-6,
            homogeneity: 1e-6,
            conjugacy: 1e-8,
            exact: 1e-5,
            defect_slack: 1e-4,
            endpoint: 1e-10,
            orbit_noise: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub triples: usize,
    pub quadruples: usize,
    pub pairs: usize,
    pub max_word_length: usize,
    pub max_power: i32,
    pub boundary_points: usize,
    pub grid: usize,
    pub iterations: usize,
    pub fixed_point_length: usize,
    pub earthquake_radius: f64,
    pub depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            triples: 200,
            quadruples: 200,
            pairs: 2000,
            max_word_length: 3,
            max_power: 8,
            boundary_points: 200,
            grid: 4,
            iterations: 8,
            fixed_point_length: 6,
            earthquake_radius: 13.0,
            depth: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// 1-form used by `qm`.
    pub qm_form: Option<String>,
    /// 2-forms checked by `cocycle-check`.
    pub cocycle_forms: Vec<String>,
    /// 2-form used by `three-region` when none is given on the command line.
    pub three_region_form: Option<String>,
    pub words: Vec<String>,
    pub tolerances: Tolerances,
    pub thresholds: Thresholds,
    pub budgets: Budgets,
    pub bumps: Vec<BumpSpec>,
    pub forms: Vec<FormSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            qm_form: Some("alpha".into()),
            cocycle_forms: vec!["vol".into(), "omega".into()],
            three_region_form: Some("omega".into()),
            words: Vec::new(),
            tolerances: Tolerances::default(),
            thresholds: Thresholds::default(),
            budgets: Budgets::default(),
            bumps: vec![
                BumpSpec { name: "ax".into(), kind: BumpKind::X, center: [0.15, 0.2], radius: 0.9, amplitude: 1.0 },
                BumpSpec { name: "ay".into(), kind: BumpKind::Y, center: [-0.25, -0.1], radius: 0.6, amplitude: 0.7 },
                BumpSpec { name: "w1".into(), kind: BumpKind::Area, center: [0.2, 0.1], radius: 0.8, amplitude: 1.0 },
            ],
            forms: vec![
                FormSpec { name: "alpha".into(), bumps: vec!["ax".into(), "ay".into()], volume: 0.0 },
                FormSpec { name: "vol".into(), bumps: Vec::new(), volume: 1.0 },
                FormSpec { name: "omega".into(), bumps: vec!["w1".into()], volume: 0.0 },
            ],
        }
    }
}

/// A resolved form.
#[derive(Debug, Clone)]
pub enum Form {
    One(OneForm),
    Two(TwoForm),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [("quadrature", t.quadrature), ("line", t.line), ("monte_carlo", t.monte_carlo)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        let h = &self.thresholds;
        for (name, v) in [
            ("euler", h.euler),
            ("cocycle", h.cocycle),
            ("invariance", h.invariance),
            ("homogeneity", h.homogeneity),
            ("conjugacy", h.conjugacy),
            ("exact", h.exact),
            ("defect_slack", h.defect_slack),
            ("endpoint", h.endpoint),
            ("orbit_noise", h.orbit_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("threshold {name} must be non-negative, got {v}")));
            }
        }
        let mut names = BTreeMap::new();
        for b in &self.bumps {
            if names.insert(b.name.as_str(), ()).is_some() {
                return Err(CliError::Config(format!("duplicate bump name {}", b.name)));
            }
        }
        for f in &self.forms {
            self.form(&f.name)?;
        }
        for name in self.qm_form.iter().chain(&self.cocycle_forms).chain(&self.three_region_form) {
            self.form(name)?;
        }
        Ok(())
    }

    pub fn with_tolerance_scale(mut self, scale: f64) -> Result<Self, CliError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CliError::Config(format!("--tolerance-scale must be positive, got {scale}")));
        }
        self.tolerances.quadrature *= scale;
        self.tolerances.line *= scale;
        self.tolerances.monte_carlo *= scale;
        Ok(self)
    }

    fn bump(&self, name: &str) -> Result<(&BumpSpec, Bump), CliError> {
        let spec = self.bumps.iter().find(|b| b.name == name).ok_or_else(|| CliError::Config(format!("unknown bump {name}")))?;
        let bump = Bump::new(C64::new(spec.center[0], spec.center[1]), spec.radius, spec.amplitude)
            .map_err(|e| CliError::Config(format!("bump {name}: {e}")))?;
        Ok((spec, bump))
    }

    /// Resolves a named form.
    pub fn form(&self, name: &str) -> Result<Form, CliError> {
        let spec = self.forms.iter().find(|f| f.name == name).ok_or_else(|| CliError::Config(format!("unknown form {name}")))?;
        let mut one: Vec<OneForm> = Vec::new();
        let mut area: Vec<Bump> = Vec::new();
        for b in &spec.bumps {
            let (s, bump) = self.bump(b)?;
            match s.kind {
                BumpKind::Area => area.push(bump),
                BumpKind::X => one.push(OneForm::term(bump, OneFormKind::X)),
                BumpKind::Y => one.push(OneForm::term(bump, OneFormKind::Y)),
                BumpKind::Exact => one.push(OneForm::term(bump, OneFormKind::Exact)),
            }
        }
        match (one.is_empty(), area.is_empty() && spec.volume == 0.0) {
            (false, true) => Ok(Form::One(one.iter().fold(OneForm::zero(), |acc, t| acc.add(t)))),
            (true, _) => Ok(Form::Two(TwoForm::bumps(area).add(&TwoForm::volume().scaled(spec.volume)))),
            (false, false) => Err(CliError::Config(format!("form {name} mixes 1-form and 2-form terms"))),
        }
    }

    pub fn one_form(&self, name: &str) -> Result<OneForm, CliError> {
        match self.form(name)? {
            Form::One(f) => Ok(f),
            Form::Two(_) => Err(CliError::Config(format!("form {name} is a 2-form, expected a 1-form"))),
        }
    }

    pub fn two_form(&self, name: &str) -> Result<TwoForm, CliError> {
        match self.form(name)? {
            Form::Two(f) => Ok(f),
            Form::One(_) => Err(CliError::Config(format!("form {name} is a 1-form, expected a 2-form"))),
        }
    }
}
