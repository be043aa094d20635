//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypcoh::cocycle::{check_cocycle, check_invariance, psi, sample_angles, sample_tuples, BoundaryCocycle};
use hypcoh::forms::{Bump, OneForm, OneFormKind, TwoForm};
use hypcoh::fuchsian::octagon;
use hypcoh::geom::{circ_dist, orientation_of_angles, C64};
use hypcoh::mcg::boundary_map::{act_on_cocycle, CircleMap, FixedPointMap};
use hypcoh::mcg::earthquake::{Earthquake, OwnedEarthquakeInverse};
use hypcoh::mcg::experiment::{equivariance, normalize, three_region_experiment};
use hypcoh::mcg::twist::{abelianization_rank, is_symplectic, mat_mul, TwistAutomorphism};
use hypcoh::qm::{sample_pairs, DeRhamQM};
use hypcoh::word::{Gen, GroupWord};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(id: usize, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = o.pass && in_time;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "criterion {id:>2} {:<4} {name}: {} [{:.1}s of {}s]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = out.flush();
    pass
}

fn word(s: &str) -> GroupWord {
    GroupWord::parse(s).unwrap()
}

fn bump_form_one() -> TwoForm {
    TwoForm::bump(Bump::new(C64::new(0.2, 0.1), 0.8, 1.0).unwrap())
}

fn bump_form_two() -> TwoForm {
    TwoForm::bumps(vec![
        Bump::new(C64::new(-0.3, 0.15), 0.5, 2.0).unwrap(),
        Bump::new(C64::new(0.1, -0.35), 0.6, -1.5).unwrap(),
    ])
}

fn representation() -> Outcome {
    let oct = octagon();
    let relator = oct.relator_residual();
    let ball = oct.ball(4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = &ball[rng.random_range(0..ball.len())];
        let v = &ball[rng.random_range(0..ball.len())];
        let direct = oct.evaluate(&u.word.concat(&v.word));
        worst = worst.max(direct.distance(&u.iso.compose(&v.iso)));
    }
    outcome(relator <= 1e-9 && worst < 1e-8, format!("relator {relator:.2e}, homomorphism {worst:.2e} over 1000 pairs"))
}

fn euler_identity() -> Outcome {
    let f = BoundaryCocycle::integral(TwoForm::volume());
    let or = BoundaryCocycle::Orientation;
    let mut worst: f64 = 0.0;
    for t in sample_tuples::<3>(500, 1e-3, 21) {
        worst = worst.max((f.eval(t).unwrap() - PI * or.eval(t).unwrap()).abs());
    }
    outcome(worst < 1e-5, format!("max |f_vol - pi Or| = {worst:.2e} over 500 triples"))
}

fn cocycle_and_invariance() -> Outcome {
    let quads = sample_tuples::<4>(1000, 1e-3, 31);
    let triples = sample_tuples::<3>(1000, 1e-3, 32);
    let ball = octagon().ball(3);
    let invariance = |f: &BoundaryCocycle| {
        triples
            .iter()
            .enumerate()
            .map(|(i, t)| check_invariance(f, &ball[i % ball.len()].iso, std::slice::from_ref(t)).unwrap())
            .fold(0.0, f64::max)
    };
    let or = BoundaryCocycle::Orientation;
    let or_delta = check_cocycle(&or, &quads).unwrap();
    let or_inv = invariance(&or);
    let mut pass = or_delta == 0.0 && or_inv == 0.0;
    let mut detail = format!("Or delta {or_delta:e} inv {or_inv:e}");
    for (name, form) in [("bump1", bump_form_one()), ("bump2", bump_form_two())] {
        let f = BoundaryCocycle::integral(form);
        let delta = check_cocycle(&f, &quads).unwrap();
        let inv = invariance(&f);
        pass &= delta < 4e-6 && inv < 1e-6;
        detail.push_str(&format!("; {name} delta {delta:.2e} inv {inv:.2e}"));
    }
    outcome(pass, detail)
}

fn quasimorphism() -> Outcome {
    let alpha = OneForm::term(Bump::new(C64::new(0.15, 0.2), 0.9, 1.0).unwrap(), OneFormKind::X)
        .add(&OneForm::term(Bump::new(C64::new(-0.25, -0.1), 0.6, 0.7).unwrap(), OneFormKind::Y));
    let q = DeRhamQM::new(alpha);
    let ball3 = octagon().ball(3);
    let words: Vec<GroupWord> = ball3.iter().map(|e| e.word.clone()).collect();

    let q_one = q.eval(&GroupWord::identity()).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut homogeneity: f64 = 0.0;
    let hom_words: Vec<&GroupWord> = (0..40).map(|_| &words[rng.random_range(1..words.len())]).collect();
    for w in &hom_words {
        for n in (-8..=8).filter(|&n| n != 0) {
            let r = q.homogeneity_residual(w, n).unwrap();
            homogeneity = homogeneity.max(r / n.unsigned_abs() as f64);
        }
    }

    let ball2 = octagon().ball(2);
    let mut conjugacy: f64 = 0.0;
    for w in hom_words.iter().take(20) {
        let base = q.eval(w).unwrap();
        for u in ball2.iter().skip(1) {
            conjugacy = conjugacy.max((q.eval(&w.conjugate_by(&u.word)).unwrap() - base).abs());
        }
    }

    let exact = DeRhamQM::new(OneForm::term(Bump::new(C64::new(0.1, -0.2), 1.0, 3.0).unwrap(), OneFormKind::Exact));
    let exact_max = words.iter().map(|w| exact.eval(w).unwrap().abs()).fold(0.0, f64::max);

    let pairs = sample_pairs(&words, 10_000, 42);
    let defect = q.defect_estimate(&pairs).unwrap();

    let pass = q_one == 0.0 && homogeneity <= 1e-6 && conjugacy < 1e-8 && exact_max < 1e-5 && defect.max <= defect.bound + 1e-4;
    outcome(
        pass,
        format!(
            "q(1) = {q_one}, homogeneity/|n| {homogeneity:.2e}, conjugacy {conjugacy:.2e}, exact {exact_max:.2e}, defect {:.4} <= {:.4} over {} pairs",
            defect.max, defect.bound, defect.pairs
        ),
    )
}

fn boundary_dynamics(quake: &Earthquake, fixed: &FixedPointMap) -> Outcome {
    let mut endpoint: f64 = 0.0;
    for r in quake.regions() {
        for x in [r.repelling(), r.attracting()] {
            endpoint = endpoint.max(circ_dist(quake.map(x).value, x));
        }
    }

    let regions = quake.regions();
    let mut strict = true;
    let mut last_residual = f64::NAN;
    for r in regions.iter().take(4) {
        for j in 1..8 {
            let mut x = r.arc_start + r.arc_width * j as f64 / 8.0;
            let mut prev = f64::INFINITY;
            for _ in 1..=10 {
                x = quake.map(x).value;
                let res = circ_dist(x, r.attracting());
                strict &= res < prev && r.contains(x);
                prev = res;
            }
            last_residual = prev;
        }
    }

    let triples = sample_tuples::<3>(1000, 1e-3, 51);
    let mut order_ok = true;
    for t in &triples {
        let o = orientation_of_angles(t[0], t[1], t[2]);
        let e = t.map(|x| quake.map(x).value);
        let f = t.map(|x| fixed.map_angle(x).unwrap());
        order_ok &= orientation_of_angles(e[0], e[1], e[2]) == o && orientation_of_angles(f[0], f[1], f[2]) == o;
    }
    outcome(
        endpoint <= 1e-10 && strict && order_ok,
        format!(
            "{} regions, endpoint drift {endpoint:.1e}, strict convergence {strict} (residual at n=10 {last_residual:.1e}), cyclic order kept {order_ok}",
            regions.len()
        ),
    )
}

fn two_algorithms(quake: &Earthquake, fixed: &FixedPointMap) -> Outcome {
    let ball3 = octagon().ball(3);
    let points: Vec<f64> = (0..200).map(|k| 2.0 * PI * (k as f64 + 0.37) / 200.0).collect();
    let n = normalize(quake, fixed, &ball3, &points);
    let bound = n.bound();
    outcome(
        n.max_residual <= bound && bound < 1e-2,
        format!(
            "g = {}, residual {:.2e} <= bound {:.2e} (gap {:.2e}, truncation {:.2e}) on {} points",
            if n.word.is_empty() { "1" } else { &n.word },
            n.max_residual,
            bound,
            n.max_gap,
            n.max_truncation,
            n.samples
        ),
    )
}

fn mcg_action(quake: &Arc<Earthquake>, fixed: &FixedPointMap, phi: &TwistAutomorphism) -> Outcome {
    let triples = sample_tuples::<3>(500, 1e-3, 71);
    let or = BoundaryCocycle::Orientation;
    let via_quake = act_on_cocycle(Arc::new(OwnedEarthquakeInverse(quake.clone())), &or);
    let via_fixed = act_on_cocycle(Arc::new(fixed.inverse()), &or);
    let mut or_exact = true;
    for t in &triples {
        let v = or.eval(*t).unwrap();
        or_exact &= via_quake.eval(*t).unwrap() == v && via_fixed.eval(*t).unwrap() == v;
    }

    let ball2 = octagon().ball(2);
    let points: Vec<f64> = (0..100).map(|k| 2.0 * PI * (k as f64 + 0.5) / 100.0).collect();
    let eq = equivariance(fixed, phi, &ball2, &points);

    let f = BoundaryCocycle::integral(bump_form_one());
    let moved = act_on_cocycle(Arc::new(OwnedEarthquakeInverse(quake.clone())), &f);
    let mut sup_moved: f64 = 0.0;
    let mut sup_f: f64 = 0.0;
    for t in triples.iter().take(200) {
        sup_moved = sup_moved.max(moved.eval(*t).unwrap().abs());
        sup_f = sup_f.max(f.eval(*t).unwrap().abs());
    }
    let norm = f.sup_norm();
    outcome(
        or_exact && eq.worst_ratio <= 1.0 && sup_moved <= norm,
        format!(
            "phi.Or = Or {or_exact}; equivariance {:.2e} at ratio {:.3} of accuracy over {} samples; sup phi.f {sup_moved:.4} <= ||f|| {norm:.4} (sampled f {sup_f:.4})",
            eq.max_residual, eq.worst_ratio, eq.samples
        ),
    )
}

fn three_regions(quake: &Earthquake) -> Outcome {
    let or = BoundaryCocycle::Orientation.scaled(PI);
    let mut spread: f64 = 0.0;
    let choices = [[0, 1, 2], [2, 0, 1], [0, 2, 4], [5, 3, 1], [1, 4, 7]];
    for regions in choices {
        let r = three_region_experiment(&or, quake, regions, 6, 1, 0.0).unwrap();
        spread = spread.max(r.spread);
    }
    let f = BoundaryCocycle::integral(bump_form_one());
    let noise = 1e-7;
    let r = three_region_experiment(&f, quake, [0, 1, 2], 4, 8, noise).unwrap();
    let g = BoundaryCocycle::integral(bump_form_two());
    let s = three_region_experiment(&g, quake, [0, 2, 4], 4, 8, noise).unwrap();
    outcome(
        spread == 0.0 && r.decreasing && s.decreasing,
        format!(
            "pi Or spread {spread:e} over {} grids; bump orbit residuals {:.1e} -> {:.1e} and {:.1e} -> {:.1e}",
            choices.len(),
            r.orbit_residuals[0],
            r.orbit_residuals[7],
            s.orbit_residuals[0],
            s.orbit_residuals[7]
        ),
    )
}

fn symplectic() -> Outcome {
    let letters = ['a', 'b', 'c', 'd', 'A', 'B', 'C', 'D'];
    let mut words: Vec<String> = letters.iter().map(|c| c.to_string()).collect();
    for x in letters {
        for y in letters {
            words.push(format!("{x}{y}"));
            for z in letters {
                words.push(format!("{x}{y}{z}"));
            }
        }
    }
    let mut ok = true;
    for w in &words {
        let t = TwistAutomorphism::from_twist_word(w).unwrap();
        let m = t.h1_matrix().unwrap();
        let product = w.chars().fold(TwistAutomorphism::identity().h1_matrix().unwrap(), |acc, c| {
            let g = Gen::from_index(c.to_ascii_lowercase() as usize - 'a' as usize);
            let mut s = TwistAutomorphism::twist(g).unwrap();
            if c.is_ascii_uppercase() {
                s = s.inverse();
            }
            mat_mul(&acc, &s.h1_matrix().unwrap())
        });
        ok &= is_symplectic(&m) && m == product;
    }
    let rank = abelianization_rank();
    outcome(ok && rank == 4, format!("{} twist products symplectic {ok}, abelianization rank {rank}", words.len()))
}

fn psi_probe() -> Outcome {
    let oct = octagon();
    let g = oct.evaluate(&word("aBc"));
    let seed = 97;
    let or = BoundaryCocycle::Orientation;
    let e1 = psi(&or, [&g, &g, &g], 100_000, seed).unwrap();
    let e2 = psi(&or, [&g, &g, &g], 100_000, seed).unwrap();
    let bump = BoundaryCocycle::integral_by_lifts(bump_form_one(), 1e-7).unwrap();
    let b1 = psi(&bump, [&g, &g, &g], 100_000, seed).unwrap();
    let b2 = psi(&bump, [&g, &g, &g], 20_000, seed).unwrap();
    let b2_again = psi(&bump, [&g, &g, &g], 20_000, seed).unwrap();
    // lift sums against quadrature on the first sampled triples
    let quad = BoundaryCocycle::integral_with_tol(bump_form_one(), 1e-9);
    let mut route_gap: f64 = 0.0;
    for i in 0..200 {
        let x: [f64; 3] = sample_angles(seed, i);
        let y = x.map(|t| g.apply_angle(t));
        route_gap = route_gap.max((bump.eval(y).unwrap() - quad.eval(y).unwrap()).abs());
    }
    let deterministic = e1.value.to_bits() == e2.value.to_bits()
        && e1.stderr.to_bits() == e2.stderr.to_bits()
        && b2.value.to_bits() == b2_again.value.to_bits();
    let pass = e1.value.abs() <= 3.0 * e1.stderr && b1.value.abs() <= 3.0 * b1.stderr && deterministic && route_gap < 1e-6;
    outcome(
        pass,
        format!(
            "Or {:.2e} (stderr {:.2e}), bump {:.2e} (stderr {:.2e}) at 1e5 samples; lift sums vs quadrature {route_gap:.1e} on 200 triples; byte-exact rerun {deterministic}",
            e1.value, e1.stderr, b1.value, b1.stderr
        ),
    )
}

#[test]
fn acceptance() {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let mut results = Vec::new();
    results.push(report(1, "representation", Duration::from_secs(10), representation));
    results.push(report(2, "euler identity", mins(2), euler_identity));
    results.push(report(3, "cocycle and invariance", mins(10), cocycle_and_invariance));
    results.push(report(4, "quasimorphism laws", mins(15), quasimorphism));

    let phi = TwistAutomorphism::twist(Gen::A).unwrap();
    let start = Instant::now();
    let quake = Arc::new(Earthquake::new(Gen::A).unwrap());
    let fixed = FixedPointMap::new(&phi, 6).unwrap();
    let setup = start.elapsed();
    {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(
            out,
            "setup: {} lifts, {} fixed-point samples, accuracy {:.2e} [{:.1}s]",
            quake.lifts().len(),
            fixed.samples(),
            fixed.accuracy(),
            setup.as_secs_f64()
        );
    }
    results.push(report(5, "boundary dynamics", mins(5), || boundary_dynamics(&quake, &fixed)));
    results.push(report(6, "two-algorithm agreement", mins(10), || two_algorithms(&quake, &fixed)));
    results.push(report(7, "mcg action", mins(5), || mcg_action(&quake, &fixed, &phi)));
    results.push(report(8, "three-region mechanism", mins(10), || three_regions(&quake)));
    results.push(report(9, "symplectic H1", Duration::from_secs(1), symplectic));
    results.push(report(10, "psi probe", mins(2), psi_probe));

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
