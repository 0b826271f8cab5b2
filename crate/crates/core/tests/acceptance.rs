//! Acceptance gate: eleven criteria, one pass/fail line each.

use std::io::Write;
use std::time::{Duration, Instant};

use borno::algebra::{AlgebraElement, BoundedSet, CMatrix, Grid, NormKind, C64};
use borno::approx_mult::{
    curvature_radius, fejer_family, linear_homotopy_certificate, scalar_ball, scalar_multiple, sigma_approximation_check, tower_compression_family,
    trig_fejer_fixture, HomotopyOptions,
};
use borno::finrank::{sampling_soundness, uniform_convergence_on_set, CompactSetModel, NormKind as Gauge, OperatorFamily, OperatorModel, TargetGauge};
use borno::isoradial::{certify_fixture, fixture_catalog, identity_homomorphism, SamplerConfig};
use borno::jsr::{check_specrad_identities, jsr_estimate_with, jsr_grid_max, Interval, JsrOptions, INTERVAL_SLACK};
use borno::maps::LinearMap;
use borno::seqspace::{cauchy_check, completeness_check, convergence_check, ClosedForm, Completion, DiskSpec, ModelSpace, NullSeq, SequenceModel, Term, Vector};
use borno::Verdict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

struct Outcome {
    pass: bool,
    /// Everything the criterion computed, minus timings.
    report: String,
    detail: String,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let m = CMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), 0.0));
    AlgebraElement::from_matrix(NormKind::Op2, m).unwrap()
}

fn random_set(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> BoundedSet {
    BoundedSet::new((0..count).map(|_| random_matrix(dim, rng)).collect()).unwrap()
}

/// Interval over all words of length ≤ depth, by plain enumeration.
fn enumerate(gens: &[AlgebraElement], depth: usize) -> (f64, f64) {
    let mut layer = gens.to_vec();
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for l in 1..=depth {
        if l > 1 {
            layer = layer.iter().flat_map(|p| gens.iter().map(move |g| p.multiply(g).unwrap())).collect();
        }
        let e = 1.0 / l as f64;
        lo = layer.iter().map(|p| p.spectral_radius().unwrap().powf(e)).fold(lo, f64::max);
        hi = hi.min(layer.iter().map(|p| p.norm().unwrap().powf(e)).fold(0.0, f64::max));
    }
    (lo, hi)
}

fn c1_brute_force() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut report = String::new();
    let mut mismatches = 0;
    for i in 0..20 {
        let count = 1 + i % 2;
        let dim = 1 + (i / 2) % 3;
        let s = random_set(count, dim, &mut rng);
        let e = jsr_estimate_with(&s, &JsrOptions::new(8, 1e-12).without_singleton_shortcut()).unwrap();
        let brute = enumerate(s.generators(), e.depth);
        if (e.lower, e.upper) != brute {
            mismatches += 1;
        }
        report += &format!("{i}:{:?}:{:?}:{};", e.lower, e.upper, e.depth);
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: mismatches == 0 && elapsed < Duration::from_secs(5),
        report,
        detail: format!("{mismatches} mismatches over 20 sets, {:.2} s", elapsed.as_secs_f64()),
    }
}

fn c2_golden_pair() -> Outcome {
    let start = Instant::now();
    let m = |rows: &[&[f64]]| AlgebraElement::real_matrix(NormKind::Op2, rows).unwrap();
    let s = BoundedSet::new(vec![m(&[&[1.0, 1.0], &[0.0, 1.0]]), m(&[&[1.0, 0.0], &[1.0, 1.0]])]).unwrap();
    let e = jsr_estimate_with(&s, &JsrOptions::new(12, 1e-3)).unwrap();
    let elapsed = start.elapsed();
    let exhaustive = enumerate(s.generators(), 12);
    let pass = e.lower >= 1.6180339
        && e.upper <= 1.6190
        && e.gap() < 1e-3
        && exhaustive.0 >= 1.6180339
        && exhaustive.1 <= 1.6190
        && elapsed < Duration::from_secs(10);
    Outcome {
        pass,
        report: format!("{:?}:{:?}:{:?}", e.lower, e.upper, e.witness_word),
        detail: format!("[{:.10}, {:.10}], depth-12 enumeration [{:.10}, {:.10}], {:.2} s", e.lower, e.upper, exhaustive.0, exhaustive.1, elapsed.as_secs_f64()),
    }
}

fn c3_specrad_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = JsrOptions::new(6, 1e-3);
    let mut violations = 0;
    let mut report = String::new();
    for i in 0..50 {
        let s = random_set(1 + i % 2, 2 + i % 2, &mut rng);
        let c = C64::new(gaussian(&mut rng), gaussian(&mut rng));
        let n = 2;
        let r = check_specrad_identities(&s, c, n, &opts).unwrap();
        let base = r.rho_s.interval();
        let ok = r.rho_cs.interval().intersects(&base.scale(c.norm()), INTERVAL_SLACK)
            && r.rho_sn.interval().intersects(&base.powi(n as i32), INTERVAL_SLACK)
            && r.rho_hull.interval().intersects(&base, INTERVAL_SLACK);
        violations += usize::from(!ok);
        report += &format!("{:?}{:?}{:?}{:?};", base, r.rho_cs.interval(), r.rho_sn.interval(), r.rho_hull.interval());
    }
    Outcome { pass: violations == 0, report, detail: format!("{violations} violations over 50 instances") }
}

fn c4_pointwise_max() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut report = String::new();
    for i in 0..20 {
        let points: Vec<f64> = (0..2 + i % 3).map(|k| k as f64).collect();
        let grid = Grid::on_line(points.clone()).unwrap();
        let gens: Vec<AlgebraElement> = (0..1 + i % 2)
            .map(|_| {
                let fibers: Vec<AlgebraElement> = points.iter().map(|_| random_matrix(2, &mut rng)).collect();
                AlgebraElement::grid_function(grid.clone(), &fibers).unwrap()
            })
            .collect();
        let r = jsr_grid_max(&BoundedSet::new(gens).unwrap(), &JsrOptions::new(6, 1e-3)).unwrap();
        let lo = r.profile.iter().map(|p| p.lower).fold(0.0, f64::max);
        let hi = r.profile.iter().map(|p| p.upper).fold(0.0, f64::max);
        if !r.global.interval().intersects(&Interval::new(lo, hi), INTERVAL_SLACK) {
            violations += 1;
        }
        report += &format!("{:?}{:?};", r.global.interval(), Interval::new(lo, hi));
    }
    Outcome { pass: violations == 0, report, detail: format!("{violations} violations over 20 grid functions") }
}

fn c5_isoradial_fixtures() -> Outcome {
    let cfg = SamplerConfig::default();
    let opts = JsrOptions::new(6, 1e-3);
    let mut pass = true;
    let mut detail = Vec::new();
    let mut report = String::new();
    for fx in fixture_catalog().unwrap() {
        let r = certify_fixture(&fx, &cfg, &opts, 1e-2).unwrap();
        let ok = if fx.name == "interval-restriction" {
            r.verdict == Verdict::Fail && r.worst_ratio >= 1.9
        } else {
            r.verdict == Verdict::Pass && (1.0 - 1e-2..=1.0 + 1e-2).contains(&r.worst_ratio)
        };
        pass &= ok;
        detail.push(format!("{} {} ratio {:.6}", fx.name, r.verdict.as_str(), r.worst_ratio));
        report += &format!("{}:{:?}:{:?}:{:?};", fx.name, r.verdict, r.worst_ratio, r.samples.iter().map(|s| s.certified_ratio).collect::<Vec<_>>());
    }
    Outcome { pass, report, detail: detail.join(", ") }
}

fn c6_curvature() -> Outcome {
    let opts = JsrOptions::new(8, 1e-9);
    let mut pass = true;
    let mut report = String::new();
    for fx in fixture_catalog().unwrap() {
        let e = curvature_radius(fx.map.map(), &BoundedSet::new(fx.templates.clone()).unwrap(), &opts).unwrap();
        pass &= (e.lower, e.upper) == (0.0, 0.0);
        report += &format!("{:?};", e.interval());
    }
    let mut worst_scalar = 0.0_f64;
    for eps in [0.1, 0.5, -0.3, 1e-3, 2.0] {
        let e = curvature_radius(&scalar_multiple(1.0 + eps).unwrap(), &scalar_ball(1.0).unwrap(), &opts).unwrap();
        let want = (eps * (1.0 + eps)).abs();
        worst_scalar = worst_scalar.max((e.lower - want).abs()).max((e.upper - want).abs());
        report += &format!("{:?};", e.interval());
    }
    pass &= worst_scalar <= 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let desc = std::sync::Arc::new(borno::algebra::AlgebraDescriptor::matrix(2, NormKind::Op2));
    let mut scaling_violations = 0;
    for _ in 0..20 {
        let action = CMatrix::from_fn(4, 4, |_, _| C64::new(gaussian(&mut rng), 0.0));
        let g = LinearMap::from_action(desc.clone(), desc.clone(), None, action).unwrap();
        let s = random_set(2, 2, &mut rng).scaled_real(0.5);
        let t: f64 = Uniform::new(0.2, 3.0).unwrap().sample(&mut rng);
        let base = curvature_radius(&g, &s, &opts).unwrap();
        let scaled = curvature_radius(&g, &s.scaled_real(t), &opts).unwrap();
        let want = base.interval().scale(t * t);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300);
        let ok = if base.depth == scaled.depth { close(scaled.lower, want.lo) && close(scaled.upper, want.hi) } else { scaled.interval().intersects(&want, 1e-9) };
        scaling_violations += usize::from(!ok);
        report += &format!("{:?}{:?};", base.interval(), scaled.interval());
    }
    pass &= scaling_violations == 0;
    Outcome { pass, report, detail: format!("homomorphisms [0,0], scalar error {worst_scalar:.1e}, {scaling_violations} scaling violations") }
}

/// `sup_t |q(1 − q)|·r²` with `q = 1 + t(c − 1)`.
fn scalar_homotopy_max(c: f64, r: f64) -> f64 {
    let f = |q: f64| (q * (1.0 - q)).abs();
    let mut m = f(1.0).max(f(c));
    if (c.min(1.0)..=c.max(1.0)).contains(&0.5) {
        m = m.max(0.25);
    }
    m * r * r
}

fn c7_homotopy() -> Outcome {
    let cases = [(0.0, 1.0), (0.0, 3.0), (0.99, 1.0), (0.5, 1.0), (0.25, 1.5), (-0.5, 1.0), (1.5, 1.0), (2.0, 0.5), (0.8, 2.0), (1.0, 1.0)];
    let id = scalar_multiple(1.0).unwrap();
    let mut worst = 0.0_f64;
    let mut verdicts_ok = true;
    let mut report = String::new();
    for (c, r) in cases {
        let cert = linear_homotopy_certificate(&id, &scalar_multiple(c).unwrap(), &scalar_ball(r).unwrap(), &HomotopyOptions::default()).unwrap();
        let closed = scalar_homotopy_max(c, r);
        worst = worst.max((cert.certified_sup - closed).abs());
        verdicts_ok &= cert.verdict == Verdict::from(closed < 1.0);
        report += &format!("{:?}:{:?};", cert.certified_sup, cert.verdict);
    }
    Outcome { pass: worst <= 1e-6 && verdicts_ok, report, detail: format!("worst deviation {worst:.1e} over 10 cases") }
}

fn c8_sigma() -> Outcome {
    let fx = trig_fejer_fixture().unwrap();
    let fam = fejer_family().unwrap();
    let r = sigma_approximation_check(fx.map.map(), &fam, 1e-2).unwrap();
    let at64 = r.ns.iter().position(|&n| n == 64).map(|i| r.epsilons[i]);
    let fejer_ok = r.nonincreasing && r.within_bounds && at64.is_some_and(|e| e < 1e-2);

    let id = identity_homomorphism(8).unwrap();
    let mut rows = vec![vec![0.0; 8]; 8];
    for (i, row) in rows.iter_mut().enumerate().take(4) {
        for (j, v) in row.iter_mut().enumerate().take(4) {
            *v = (1 + i + 2 * j) as f64 / 10.0;
        }
    }
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let s = BoundedSet::new(vec![AlgebraElement::real_matrix(NormKind::Op2, &refs).unwrap()]).unwrap();
    let tower = sigma_approximation_check(id.map(), &tower_compression_family(8, 4, s).unwrap(), 0.0).unwrap();
    let tower_ok = tower.ns.iter().zip(&tower.epsilons).all(|(n, e)| *n < 4 || *e == 0.0);
    Outcome {
        pass: fejer_ok && tower_ok,
        report: format!("{:?}{:?}", r.epsilons, tower.epsilons),
        detail: format!("Fejér ε_64 = {:.3e}, nonincreasing {}, tower zero past support {}", at64.unwrap_or(f64::NAN), r.nonincreasing, tower_ok),
    }
}

fn c9_sequences() -> Outcome {
    let fin = ModelSpace::l1_finite_support();
    let l1 = ModelSpace::l1_with_tails();
    let sup = ModelSpace::new(vec![DiskSpec::unit_sup()], true).unwrap();
    let half = Vector::closed(ClosedForm::geometric(1.0, 0.5));
    let quarter = Vector::closed(ClosedForm::geometric(1.0, 0.25));
    let geo = |c: f64| NullSeq::geometric(c, 0.5);
    let harmonic = ClosedForm::power(1.0, 1.0, -1.0, 1.0);
    let e0 = Vector::unit(0);
    // (space, sequence, limit, ε, expected verdict); hand-derived gauges in comments.
    let cases: Vec<(&ModelSpace, SequenceModel, Option<Vector>, NullSeq, Verdict)> = vec![
        // Σ_{k>m} 2^{-k} = 2^{-m}.
        (&fin, SequenceModel::partial_sums(half.clone()), None, geo(1.0), Verdict::Pass),
        (&fin, SequenceModel::partial_sums(half.clone()), None, geo(0.5), Verdict::Fail),
        (&l1, SequenceModel::partial_sums(half.clone()), Some(half.clone()), geo(1.0), Verdict::Pass),
        (&l1, SequenceModel::partial_sums(half.clone()), Some(quarter), geo(1.0), Verdict::Fail),
        // sup_{n>m} |2^{-n} − 2^{-m}| = 2^{-m}.
        (&fin, SequenceModel::scalar_times(ClosedForm::geometric(1.0, 0.5), e0.clone()), None, geo(1.0), Verdict::Pass),
        (&fin, SequenceModel::scalar_times(ClosedForm::geometric(1.0, 0.5), e0.clone()), None, geo(0.5), Verdict::Fail),
        // sup_{n>m} |1/(n+1) − 1/(m+1)| = 1/(m+1).
        (&fin, SequenceModel::scalar_times(harmonic.clone(), e0.clone()), None, NullSeq::inverse_power(1.0, 1.0), Verdict::Pass),
        (&fin, SequenceModel::scalar_times(ClosedForm::power(1.0, 0.0, 1.0, 1.0), e0.clone()), None, geo(1.0), Verdict::Fail),
        // ‖P_n u − P_m u‖_∞ = (m+2)^{-2} for u_k = (k+1)^{-2}.
        (
            &sup,
            SequenceModel { prefix: Vec::new(), terms: vec![Term::Truncation { vector: Vector::closed(ClosedForm::power(1.0, 1.0, -2.0, 1.0)), a: 1, shift: 0 }] },
            None,
            NullSeq::inverse_power(1.0, 2.0),
            Verdict::Pass,
        ),
        (&fin, SequenceModel::scalar_times(ClosedForm::geometric(1.0, 0.5), e0), Some(Vector::zero()), geo(1.0), Verdict::Pass),
    ];
    let mut agree = 0;
    let mut disagree = Vec::new();
    let mut report = String::new();
    for (k, (space, x, limit, eps, want)) in cases.iter().enumerate() {
        let r = match limit {
            Some(l) => convergence_check(space, x, l, 0, eps).unwrap(),
            None => cauchy_check(space, x, 0, eps).unwrap(),
        };
        agree += usize::from(r.verdict == *want);
        if r.verdict != *want {
            disagree.push(format!("case {k} gave {}", r.verdict.as_str()));
        }
        report += &format!("{:?}:{:?}:{:?};", r.verdict, r.worst_ratio, r.witness.as_ref().map(|w| (w.m, w.n)));
    }
    let models = [
        (l1.clone(), Verdict::Pass),
        (fin.clone(), Verdict::Fail),
        (sup.clone(), Verdict::Pass),
        (ModelSpace::finite(3, vec![DiskSpec::unit_l1(), DiskSpec::unit_sup()]).unwrap(), Verdict::Pass),
        (ModelSpace::new(vec![DiskSpec::unit_sup()], false).unwrap(), Verdict::Fail),
    ];
    let mut complete_ok = true;
    for (space, want) in &models {
        let r = completeness_check(space).unwrap();
        complete_ok &= r.consistent && r.verdict == *want;
        report += &format!("{:?}:{};", r.verdict, r.consistent);
    }
    let c = Completion::new(&l1).unwrap();
    let v = Vector::finite(vec![1.0, -2.5, 0.0, 4.0]);
    let e = c.embed(&v, 0).unwrap();
    let again = c.embed_limit(&e.limit, 0).unwrap();
    let twice = c.embed_limit(&again.limit, 0).unwrap();
    let idempotent = c.equal(&e, &again).equal && again.limit == twice.limit;
    let gauge_ok = c.gauge_in_quotient(&e, 0).unwrap() == l1.gauge(0, &v).unwrap();
    let x = c.embed_limit(&half, 0).unwrap();
    let quotient_ok = c.gauge_in_quotient(&x, 0).unwrap().contains(2.0, 1e-12);
    report += &format!("{idempotent}{gauge_ok}{quotient_ok}");
    Outcome {
        pass: agree == cases.len() && complete_ok && idempotent && gauge_ok && quotient_ok,
        report,
        detail: format!("{agree}/{} deciders agree {disagree:?}, completeness consistent {complete_ok}, idempotent {idempotent}, quotient gauges {}", cases.len(), gauge_ok && quotient_ok),
    }
}

fn c10_finite_rank() -> Outcome {
    let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
    let t = TargetGauge::unit(Gauge::L2);
    let r = uniform_convergence_on_set(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &t, None).unwrap();
    let exact = 0.0625 / 3f64.sqrt();
    let e4 = r.rates[4];
    let rate_ok = (e4.lo - exact).abs() <= 1e-12 && (e4.hi - exact).abs() <= 1e-12;
    let sound = sampling_soundness(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &t, &r.rates, 1000, 10);
    Outcome {
        pass: rate_ok && sound.violations == 0 && r.verdict == Verdict::Pass,
        report: format!("{:?}{:?}{:?}", r.rates, sound.worst_ratio, sound.violations),
        detail: format!("ε_4 ∈ [{:.15}, {:.15}] vs {exact:.15}, {} violations in {} samples", e4.lo, e4.hi, sound.violations, sound.samples),
    }
}

const CRITERIA: [(&str, fn() -> Outcome); 10] = [
    ("jsr kernel vs brute force", c1_brute_force),
    ("golden pair", c2_golden_pair),
    ("spectral radius identities", c3_specrad_identities),
    ("pointwise maximum over grids", c4_pointwise_max),
    ("isoradial fixtures", c5_isoradial_fixtures),
    ("curvature", c6_curvature),
    ("homotopy certificate", c7_homotopy),
    ("sigma approximation", c8_sigma),
    ("sequence machinery", c9_sequences),
    ("finite-rank rates", c10_finite_rank),
];

fn line(id: usize, name: &str, pass: bool, detail: &str) -> String {
    format!("criterion {id:>2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" })
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut all = true;
    let mut baseline = Vec::new();
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        lines.push(line(i + 1, name, o.pass, &format!("{} [{:.1} s]", o.detail, start.elapsed().as_secs_f64())));
        baseline.push(o.report);
    }
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut diverged = Vec::new();
    let mut counts = vec![1, 4, max];
    counts.sort_unstable();
    counts.dedup();
    for &threads in &counts {
        for (i, (_, run)) in CRITERIA.iter().enumerate() {
            if in_pool(threads, run).report != baseline[i] {
                diverged.push(format!("{} at {threads} threads", i + 1));
            }
        }
    }
    let det = diverged.is_empty();
    all &= det;
    let detail = if det { format!("identical reports at {counts:?} threads") } else { format!("diverged: {}", diverged.join(", ")) };
    lines.push(line(11, "determinism", det, &detail));
    let mut err = std::io::stderr();
    for l in &lines {
        writeln!(err, "{l}").unwrap();
    }
    assert!(all, "{}", lines.join("\n"));
}
