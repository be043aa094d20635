//! The subcommands. Each returns its property rows; files go to the output directory.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use hypcoh::cocycle::{check_alternation, check_cocycle, check_invariance, sample_tuples, BoundaryCocycle};
use hypcoh::fuchsian::octagon;
use hypcoh::geom::{circ_dist, orientation_of_angles};
use hypcoh::mcg::boundary_map::{CircleMap, FixedPointMap};
use hypcoh::mcg::earthquake::Earthquake;
use hypcoh::mcg::experiment::{normalize, three_region_experiment, ExperimentError};
use hypcoh::mcg::svg::DiskPlot;
use hypcoh::mcg::twist::{is_symplectic, mat_mul, transvection, TwistAutomorphism};
use hypcoh::qm::{sample_pairs, DeRhamQM};
use hypcoh::word::{Gen, GroupWord};

use crate::config::ExperimentConfig;
use crate::report::{write_csv, write_properties, write_svg, PropertyRow, TWIST_CONVENTION};
use crate::CliError;

fn lib<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Library(e.to_string())
}

fn display_word(w: &GroupWord) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.to_string()
    }
}

/// Words from the command line, the config, or the whole ball.
pub fn resolve_words(cfg: &ExperimentConfig, cli: Option<&[String]>) -> Result<Vec<GroupWord>, CliError> {
    let given: &[String] = cli.unwrap_or(&cfg.words);
    if given.is_empty() {
        return Ok(octagon().ball(cfg.budgets.max_word_length).iter().map(|e| e.word.clone()).collect());
    }
    given.iter().map(|s| GroupWord::parse(s.trim()).map_err(|e| CliError::Usage(format!("word {s:?}: {e}")))).collect()
}

#[derive(Serialize)]
struct QmRow {
    word: String,
    length: usize,
    q: f64,
}

#[derive(Serialize)]
struct DefectRow {
    g: String,
    h: String,
    q_g: f64,
    q_h: f64,
    q_gh: f64,
    defect: f64,
}

pub fn qm(cfg: &ExperimentConfig, words: &[GroupWord], out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let name = cfg.qm_form.as_deref().ok_or_else(|| CliError::Config("qm_form is not set".into()))?;
    let alpha = cfg.one_form(name)?;
    let exact = alpha.is_exact();
    let q = DeRhamQM::with_tolerance(alpha, cfg.tolerances.line);
    let th = &cfg.thresholds;

    let mut values = Vec::with_capacity(words.len() + 1);
    let mut listed = words.to_vec();
    if !listed.iter().any(GroupWord::is_empty) {
        listed.insert(0, GroupWord::identity());
    }
    for w in &listed {
        values.push(QmRow { word: display_word(w), length: w.len(), q: q.eval(w).map_err(lib)? });
    }
    write_csv(out, "qm-values.csv", &[], &values)?;

    let nontrivial: Vec<&GroupWord> = listed.iter().filter(|w| !w.is_empty()).collect();
    let mut rows = vec![PropertyRow::at_most("q(1) = 0", 1, q.eval(&GroupWord::identity()).map_err(lib)?.abs(), 0.0)];

    let mut antisym: f64 = 0.0;
    for w in &nontrivial {
        antisym = antisym.max((q.eval(w).map_err(lib)? + q.eval(&w.inverse()).map_err(lib)?).abs());
    }
    rows.push(PropertyRow::at_most("q(w^-1) = -q(w)", nontrivial.len(), antisym, th.conjugacy));

    let probe: Vec<&GroupWord> = nontrivial.iter().copied().take(20).collect();
    let mut homogeneity: f64 = 0.0;
    let mut count = 0;
    for w in &probe {
        for n in (-cfg.budgets.max_power..=cfg.budgets.max_power).filter(|&n| n != 0) {
            let r = q.homogeneity_residual(w, n).map_err(lib)? / n.unsigned_abs() as f64;
            homogeneity = homogeneity.max(r);
            count += 1;
        }
    }
    rows.push(PropertyRow::at_most("homogeneity |q(w^n) - n q(w)| / |n|", count, homogeneity, th.homogeneity));

    let conjugators = octagon().ball(1);
    let mut conj: f64 = 0.0;
    for w in &probe {
        let base = q.eval(w).map_err(lib)?;
        for u in conjugators.iter().skip(1) {
            conj = conj.max((q.eval(&w.conjugate_by(&u.word)).map_err(lib)? - base).abs());
        }
    }
    rows.push(PropertyRow::at_most("conjugacy invariance", probe.len() * 8, conj, th.conjugacy));

    if exact {
        let m = nontrivial.iter().map(|w| q.eval(w).map(f64::abs)).try_fold(0.0f64, |m, v| v.map(|v| m.max(v))).map_err(lib)?;
        rows.push(PropertyRow::at_most("exact form vanishes", nontrivial.len(), m, th.exact));
    }

    let pairs = sample_pairs(&listed, cfg.budgets.pairs, cfg.seed);
    let mut defects = Vec::with_capacity(pairs.len());
    for (g, h) in &pairs {
        let (a, b, c) = (q.eval(g).map_err(lib)?, q.eval(h).map_err(lib)?, q.eval(&g.concat(h)).map_err(lib)?);
        defects.push(DefectRow { g: display_word(g), h: display_word(h), q_g: a, q_h: b, q_gh: c, defect: (a + b - c).abs() });
    }
    write_csv(out, "qm-defect.csv", &[], &defects)?;
    let report = q.defect_estimate(&pairs).map_err(lib)?;
    let mut row = PropertyRow::at_most("defect <= pi sup|d alpha| + slack", report.pairs, report.max, report.bound + th.defect_slack);
    row.name = format!("{} (2 pi sup = {:.6})", row.name, report.homogeneous_bound);
    rows.push(row);
    write_properties(out, "qm", &[], &rows)?;
    Ok(rows)
}

pub fn cocycle_check(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let b = &cfg.budgets;
    let th = &cfg.thresholds;
    let quads = sample_tuples::<4>(b.quadruples, 1e-3, cfg.seed);
    let triples = sample_tuples::<3>(b.triples, 1e-3, cfg.seed.wrapping_add(1));
    let ball = octagon().ball(3);
    let invariance = |f: &BoundaryCocycle| -> Result<f64, CliError> {
        let mut worst: f64 = 0.0;
        for (i, t) in triples.iter().enumerate() {
            worst = worst.max(check_invariance(f, &ball[i % ball.len()].iso, std::slice::from_ref(t)).map_err(lib)?);
        }
        Ok(worst)
    };

    let or = BoundaryCocycle::Orientation;
    let mut rows = vec![
        PropertyRow::at_most("Or: cocycle", quads.len(), check_cocycle(&or, &quads).map_err(lib)?, 0.0),
        PropertyRow::at_most("Or: alternating", triples.len(), check_alternation(&or, &triples).map_err(lib)?, 0.0),
        PropertyRow::at_most("Or: invariant", triples.len(), invariance(&or)?, 0.0),
    ];
    for name in &cfg.cocycle_forms {
        let form = cfg.two_form(name)?;
        let volume_only = form.is_volume_only();
        let c = form.volume_coefficient();
        let f = BoundaryCocycle::integral_with_tol(form, cfg.tolerances.quadrature);
        if volume_only {
            let mut worst: f64 = 0.0;
            for t in &triples {
                worst = worst.max((f.eval(*t).map_err(lib)? - c * PI * or.eval(*t).map_err(lib)?).abs());
            }
            rows.push(PropertyRow::at_most(format!("{name}: equals {c} pi Or"), triples.len(), worst, th.euler));
        }
        rows.push(PropertyRow::at_most(format!("{name}: cocycle"), quads.len(), check_cocycle(&f, &quads).map_err(lib)?, th.cocycle));
        rows.push(PropertyRow::at_most(format!("{name}: invariant"), triples.len(), invariance(&f)?, th.invariance));
        let few = &triples[..triples.len().min(50)];
        rows.push(PropertyRow::at_most(format!("{name}: alternating"), few.len(), check_alternation(&f, few).map_err(lib)?, th.cocycle));
    }
    write_properties(out, "cocycle-check", &[], &rows)?;
    Ok(rows)
}

fn quake(cfg: &ExperimentConfig, curve: Gen) -> Result<Earthquake, CliError> {
    Earthquake::with_radius(curve, cfg.budgets.earthquake_radius, cfg.budgets.depth).map_err(lib)
}

#[derive(Serialize)]
struct SampleRow {
    theta: f64,
    earthquake: f64,
    truncation_bound: f64,
    chain: usize,
    fixed_point: f64,
    bracket: f64,
    normalized_residual: f64,
}

#[derive(Serialize)]
struct OrbitRow {
    region: usize,
    start: f64,
    n: usize,
    value: f64,
    residual: f64,
}

pub fn twist(cfg: &ExperimentConfig, curve: Gen, iterations: usize, out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let th = &cfg.thresholds;
    let eq = quake(cfg, curve)?;
    let phi = TwistAutomorphism::twist(curve).map_err(lib)?;
    let fixed = FixedPointMap::new(&phi, cfg.budgets.fixed_point_length).map_err(lib)?;

    let n = cfg.budgets.boundary_points.max(1);
    let points: Vec<f64> = (0..n).map(|k| 2.0 * PI * (k as f64 + 0.37) / n as f64).collect();
    let norm = normalize(&eq, &fixed, &octagon().ball(3), &points);
    let mut samples = Vec::with_capacity(n);
    for &x in &points {
        let e = eq.map(x);
        let (fx, gap) = fixed.bracket(x);
        samples.push(SampleRow {
            theta: x,
            earthquake: e.value,
            truncation_bound: e.bound,
            chain: e.chain,
            fixed_point: fx,
            bracket: gap,
            normalized_residual: circ_dist(e.value, norm.isometry.apply_angle(fx)),
        });
    }
    let header = [TWIST_CONVENTION, &format!("normalization g = {}", if norm.word.is_empty() { "1" } else { &norm.word })];
    write_csv(out, "twist-samples.csv", &header, &samples)?;

    let regions = eq.regions();
    let mut endpoint: f64 = 0.0;
    for r in &regions {
        for x in [r.repelling(), r.attracting()] {
            endpoint = endpoint.max(circ_dist(eq.map(x).value, x));
        }
    }
    let mut orbits = Vec::new();
    let mut strict = true;
    for (ri, r) in regions.iter().enumerate().take(4) {
        for j in 1..4 {
            let start = r.arc_start + r.arc_width * j as f64 / 4.0;
            let mut x = start;
            let mut prev = f64::INFINITY;
            for k in 1..=iterations {
                x = eq.map(x).value;
                let residual = circ_dist(x, r.attracting());
                strict &= residual < prev;
                prev = residual;
                orbits.push(OrbitRow { region: ri, start, n: k, value: x, residual });
            }
        }
    }
    write_csv(out, "twist-orbits.csv", &[TWIST_CONVENTION], &orbits)?;

    let triples = sample_tuples::<3>(cfg.budgets.triples, 1e-3, cfg.seed);
    let order = triples.iter().all(|t| {
        let o = orientation_of_angles(t[0], t[1], t[2]);
        let e = t.map(|x| eq.map(x).value);
        let f = t.map(|x| fixed.map_angle(x).unwrap_or(f64::NAN));
        orientation_of_angles(e[0], e[1], e[2]) == o && orientation_of_angles(f[0], f[1], f[2]) == o
    });

    let mut plot = DiskPlot::new(300.0);
    plot.earthquake(&eq, 2e-3);
    plot.label(&format!("T{} earthquake, {} lifts", curve.letter().to_char(), eq.lifts().len()));
    write_svg(out, "twist", &plot.finish())?;

    let rows = vec![
        PropertyRow::at_most("region endpoints fixed", regions.len() * 2, endpoint, th.endpoint),
        PropertyRow::holds("orbit residual strictly decreasing", orbits.len(), strict),
        PropertyRow::holds("cyclic order preserved", triples.len(), order),
        PropertyRow::at_most("earthquake vs fixed-point map within bound", points.len(), norm.max_residual, norm.bound()),
    ];
    write_properties(out, "twist", &[TWIST_CONVENTION], &rows)?;
    Ok(rows)
}

#[derive(Serialize)]
struct RegionRow {
    cocycle: String,
    regions: String,
    samples: usize,
    min: f64,
    max: f64,
    spread: f64,
    limit: f64,
}

#[derive(Serialize)]
struct RegionOrbitRow {
    cocycle: String,
    n: usize,
    residual: f64,
}

pub fn three_region(cfg: &ExperimentConfig, form: &str, regions: [usize; 3], curve: Gen, out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let eq = quake(cfg, curve)?;
    let f = BoundaryCocycle::integral_with_tol(cfg.two_form(form)?, cfg.tolerances.quadrature);
    let euler = BoundaryCocycle::Orientation.scaled(PI);
    let b = &cfg.budgets;
    let usage = |e: ExperimentError| match e {
        ExperimentError::RegionIndex { .. } | ExperimentError::NotDistinct | ExperimentError::EmptyGrid => CliError::Usage(e.to_string()),
        other => lib(other),
    };
    let e = three_region_experiment(&euler, &eq, regions, b.grid, b.iterations, cfg.thresholds.orbit_noise).map_err(usage)?;
    let r = three_region_experiment(&f, &eq, regions, b.grid, b.iterations, cfg.thresholds.orbit_noise).map_err(usage)?;
    let label = format!("{} {} {}", regions[0], regions[1], regions[2]);
    let table = [("pi Or", &e), (form, &r)].map(|(name, rep)| RegionRow {
        cocycle: name.to_string(),
        regions: label.clone(),
        samples: rep.samples,
        min: rep.min,
        max: rep.max,
        spread: rep.spread,
        limit: rep.limit,
    });
    write_csv(out, "three-region-report.csv", &[], &table)?;
    let orbits: Vec<RegionOrbitRow> = [("pi Or", &e), (form, &r)]
        .iter()
        .flat_map(|(name, rep)| rep.orbit_residuals.iter().enumerate().map(move |(k, &res)| RegionOrbitRow { cocycle: name.to_string(), n: k + 1, residual: res }))
        .collect();
    write_csv(out, "three-region-orbits.csv", &[], &orbits)?;
    let rows = vec![
        PropertyRow::at_most("pi Or constant on region product", e.samples, e.spread, 0.0),
        PropertyRow::holds(format!("{form}: orbit residuals decrease"), r.orbit_residuals.len(), r.decreasing),
    ];
    write_properties(out, "three-region", &[], &rows)?;
    Ok(rows)
}

#[derive(Serialize)]
struct MatrixRow {
    row: usize,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

pub fn h1(word: &str, out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let t = TwistAutomorphism::from_twist_word(word).map_err(|e| CliError::Usage(format!("twist word {word:?}: {e}")))?;
    let m = t.h1_matrix().map_err(lib)?;
    let rows: Vec<MatrixRow> = m.iter().enumerate().map(|(i, r)| MatrixRow { row: i, a: r[0], b: r[1], c: r[2], d: r[3] }).collect();
    for r in &m {
        println!("{:>4} {:>4} {:>4} {:>4}", r[0], r[1], r[2], r[3]);
    }
    write_csv(out, "h1-matrix.csv", &[TWIST_CONVENTION, &format!("twist word {word:?}")], &rows)?;
    let basis = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
    let mut expected = transvection([0; 4]);
    for c in word.chars() {
        let g = Gen::ALL[(c.to_ascii_lowercase() as u8 - b'a') as usize];
        let mut s = transvection(basis[g.index()]);
        if c.is_ascii_uppercase() {
            // x - <x,v>v = 2x - (x + <x,v>v)
            for (i, row) in s.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 2 } else { 0 } - *v;
                }
            }
        }
        expected = mat_mul(&expected, &s);
    }
    let props = vec![
        PropertyRow::holds("M^T J M = J", 1, is_symplectic(&m)),
        PropertyRow::holds("M equals product of transvections", 1, m == expected),
    ];
    write_properties(out, "h1", &[TWIST_CONVENTION], &props)?;
    Ok(props)
}

pub fn plot(cfg: &ExperimentConfig, curve: Gen, out: &Path) -> Result<Vec<PropertyRow>, CliError> {
    let eq = quake(cfg, curve)?;
    let mut plot = DiskPlot::new(300.0);
    plot.earthquake(&eq, 1e-3);
    plot.label(&format!("lifts of {} and affected regions", curve.letter().to_char()));
    let path = write_svg(out, "plot", &plot.finish())?;
    println!("wrote {}", path.display());
    Ok(Vec::new())
}
