//! Curvature of linear maps, approximate multiplicativity, σ-approximation
//! rates and certified linear homotopies.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{check_same, AlgebraDescriptor, AlgebraElement, BoundedSet, Disk, NormKind, C64};
use crate::error::{Error, Result};
use crate::isoradial::{circle_algebra, certify_fixture, fourier_element, Fixture, IsoradialReport, SamplerConfig};
use crate::jsr::{jsr_estimate_with, JsrOptions, RadiusEstimate};
use crate::maps::{corner_compression, corner_embedding, Homomorphism, LinearMap};
use crate::Verdict;

/// `ω_g(x, y)` for every ordered pair of generators, in row-major pair order.
#[derive(Clone, Debug)]
pub struct CurvatureSet {
    pub pairs: Vec<(usize, usize)>,
    pub set: BoundedSet,
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
}

fn check_source(g: &LinearMap, s: &BoundedSet) -> Result<()> {
    check_same(g.source(), s.descriptor())
}

/// `ω_g(x, y) = g(xy) − g(x)g(y)` over all generator pairs of `s`.
pub fn curvature(g: &LinearMap, s: &BoundedSet) -> Result<CurvatureSet> {
    check_source(g, s)?;
    let gens = s.generators();
    let images = gens.iter().map(|x| g.apply(x)).collect::<Result<Vec<_>>>()?;
    let pairs = ordered_pairs(gens.len());
    let omegas = pairs
        .par_iter()
        .map(|&(i, j)| {
            let xy = gens[i].multiply(&gens[j])?;
            g.apply(&xy)?.sub(&images[i].multiply(&images[j])?)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = BoundedSet::with_interpretation(omegas, s.interpretation())?;
    Ok(CurvatureSet { pairs, set })
}

/// `|g|_ω = ρ(ω_g(S, S))`.
pub fn curvature_radius(g: &LinearMap, s: &BoundedSet, opts: &JsrOptions) -> Result<RadiusEstimate> {
    jsr_estimate_with(&curvature(g, s)?.set, opts)
}

/// Pass when the certified upper bound is below 1, fail when the lower bound
/// reaches 1.
pub fn is_approximately_multiplicative(g: &LinearMap, s: &BoundedSet, opts: &JsrOptions) -> Result<(Verdict, RadiusEstimate)> {
    let est = curvature_radius(g, s, opts)?;
    let v = if est.upper < 1.0 {
        Verdict::Pass
    } else if est.lower >= 1.0 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok((v, est))
}

/// A sequence of maps `σ_n` from the target of `f` back to its source,
/// with the bounded set and disk the rates are measured against.
#[derive(Clone, Debug)]
pub struct SigmaFamily {
    pub ns: Vec<usize>,
    pub sigmas: Vec<LinearMap>,
    pub set: BoundedSet,
    pub disk: Disk,
    /// Optional a-priori bound per `n`, checked against the computed rate.
    pub bounds: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct SigmaReport {
    pub ns: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub bounds: Option<Vec<f64>>,
    pub nonincreasing: bool,
    pub within_bounds: bool,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// `ε_n = max_s gauge_T(f(σ_n(s)) − s)`. Passes when the rates never
/// increase, stay under any declared bounds and end at or below `threshold`.
pub fn sigma_approximation_check(f: &LinearMap, family: &SigmaFamily, threshold: f64) -> Result<SigmaReport> {
    if family.ns.len() != family.sigmas.len() || family.ns.is_empty() {
        return Err(Error::invalid("need one σ per index and at least one index"));
    }
    if let Some(b) = &family.bounds {
        if b.len() != family.ns.len() {
            return Err(Error::invalid("need one bound per index"));
        }
    }
    check_same(f.target(), family.set.descriptor())?;
    let epsilons = family
        .sigmas
        .par_iter()
        .map(|sigma| {
            check_same(sigma.source(), f.target())?;
            check_same(sigma.target(), f.source())?;
            family.set.generators().iter().try_fold(0.0_f64, |acc, s| {
                let back = f.apply(&sigma.apply(s)?)?;
                Ok(acc.max(family.disk.gauge(&back.sub(s)?)?))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let nonincreasing = epsilons.windows(2).all(|w| w[1] <= w[0]);
    let within_bounds = match &family.bounds {
        Some(b) => epsilons.iter().zip(b).all(|(e, b)| e <= b),
        None => true,
    };
    let last = *epsilons.last().expect("non-empty");
    let verdict = Verdict::from(nonincreasing && within_bounds && last <= threshold);
    Ok(SigmaReport { ns: family.ns.clone(), epsilons, bounds: family.bounds.clone(), nonincreasing, within_bounds, threshold, verdict })
}

/// Fejér mean of order `n` on the `m`-point circle: the Fourier coefficient
/// of mode `k` is multiplied by `1 − |k|/(n+1)` for `|k| ≤ n`.
pub fn fejer_sigma(m: usize, n: usize) -> Result<LinearMap> {
    if 2 * n + 1 > m {
        return Err(Error::invalid(format!("Fejér order {n} aliases on {m} points")));
    }
    let desc = circle_algebra(m)?;
    let weights: Vec<(i64, f64)> = (-(n as i64)..=n as i64).map(|k| (k, 1.0 - k.unsigned_abs() as f64 / (n + 1) as f64)).collect();
    let images = (0..m)
        .map(|l| {
            let th_l = TAU * l as f64 / m as f64;
            let coords: Vec<C64> = (0..m)
                .map(|j| {
                    let th_j = TAU * j as f64 / m as f64;
                    let mut acc = C64::new(0.0, 0.0);
                    for &(k, w) in &weights {
                        // Coefficient of δ_l on mode k, times the mode's value at θ_j.
                        let coef = C64::from_polar(w / m as f64, -(k as f64) * th_l);
                        acc += coef * C64::from_polar(1.0, k as f64 * th_j);
                    }
                    acc
                })
                .collect();
            AlgebraElement::from_coords(desc.clone(), &coords)
        })
        .collect::<Result<Vec<_>>>()?;
    LinearMap::from_action(desc.clone(), desc, None, columns(&images))
}

fn columns(images: &[AlgebraElement]) -> crate::algebra::CMatrix {
    let cols: Vec<Vec<C64>> = images.iter().map(|e| e.coords()).collect();
    let rows = cols.first().map_or(0, |c| c.len());
    crate::algebra::CMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Grid size of the Fejér fixture: room for every order up to 64.
pub const FEJER_GRID: usize = 129;
/// Lipschitz constant declared for the Fejér test family.
pub const FEJER_LIPSCHITZ: f64 = 0.25;

/// Lipschitz family `0.25·cos(θ − φ)` and `0.125·cos(2θ − φ)` for four phases.
pub fn fejer_test_family(m: usize) -> Result<BoundedSet> {
    let desc = circle_algebra(m)?;
    let mut gens = Vec::new();
    for (freq, amp) in [(1.0, 0.25), (2.0, 0.125)] {
        for p in 0..4 {
            let phi = TAU * p as f64 / 4.0 + 0.3;
            let c: Vec<C64> = (0..m).map(|j| C64::new(amp * (freq * TAU * j as f64 / m as f64 - phi).cos(), 0.0)).collect();
            gens.push(AlgebraElement::from_coords(desc.clone(), &c)?);
        }
    }
    BoundedSet::new(gens)
}

/// Modulus-of-continuity bound for Fejér means of an `L`-Lipschitz
/// function: `L·π(1 + 2 ln(n+1))/(n+1)`.
pub fn fejer_rate_bound(lipschitz: f64, n: usize) -> f64 {
    let n1 = (n + 1) as f64;
    lipschitz * PI * (1.0 + 2.0 * n1.ln()) / n1
}

/// Fejér means of orders `1, 2, 4, …, 64` against the declared-modulus family.
pub fn fejer_family() -> Result<SigmaFamily> {
    let ns: Vec<usize> = (0..=6).map(|e| 1 << e).collect();
    let sigmas = ns.iter().map(|&n| fejer_sigma(FEJER_GRID, n)).collect::<Result<Vec<_>>>()?;
    let bounds = ns.iter().map(|&n| fejer_rate_bound(FEJER_LIPSCHITZ, n)).collect();
    Ok(SigmaFamily { ns, sigmas, set: fejer_test_family(FEJER_GRID)?, disk: Disk::norm_ball(1.0)?, bounds: Some(bounds) })
}

/// Trigonometric fixture on the Fejér grid.
pub fn trig_fejer_fixture() -> Result<Fixture> {
    let mut fx = crate::isoradial::trig_circle(3, FEJER_GRID)?;
    fx.name = "trig-fejer".into();
    Ok(fx)
}

/// `X ↦ P_n X P_n` inside `M_total`.
pub fn corner_projection(total: usize, n: usize, norm: NormKind) -> Result<LinearMap> {
    corner_embedding(n, total, norm)?.compose(&corner_compression(total, n, norm)?)
}

/// Compressions of `M_total` to its corners `1..=total`, tested on a set
/// supported in the top-left `support × support` corner.
pub fn tower_compression_family(total: usize, support: usize, set: BoundedSet) -> Result<SigmaFamily> {
    if support > total {
        return Err(Error::invalid("support exceeds the matrix size"));
    }
    let ns: Vec<usize> = (1..=total).collect();
    let sigmas = ns.iter().map(|&n| corner_projection(total, n, NormKind::Op2)).collect::<Result<Vec<_>>>()?;
    Ok(SigmaFamily { ns, sigmas, set, disk: Disk::norm_ball(1.0)?, bounds: None })
}

/// Options for the linear homotopy certificate.
#[derive(Clone, Debug)]
pub struct HomotopyOptions {
    pub t_points: usize,
    pub jsr: JsrOptions,
    /// Bisect a segment while its bound exceeds the best grid value by more
    /// than this.
    pub refine_tol: f64,
    pub max_evaluations: usize,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self { t_points: 65, jsr: JsrOptions::new(8, 1e-6), refine_tol: 2e-7, max_evaluations: 1 << 16 }
    }
}

/// Chebyshev–Lobatto points on `[0, 1]`, endpoints exact.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    match n {
        0 | 1 => vec![0.0, 1.0],
        _ => {
            let mut t: Vec<f64> = (0..n).map(|i| (1.0 - (PI * i as f64 / (n - 1) as f64).cos()) / 2.0).collect();
            t[0] = 0.0;
            t[n - 1] = 1.0;
            t
        }
    }
}

/// One evaluated parameter value.
#[derive(Clone, Debug)]
pub struct HomotopySample {
    pub t: f64,
    pub estimate: RadiusEstimate,
    /// Largest norm among the curvature generators at `t`.
    pub max_norm: f64,
}

/// Bound on `[a, b]` from the samples at both ends.
#[derive(Clone, Debug)]
pub struct SegmentBound {
    pub a: f64,
    pub b: f64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct HomotopyCertificate {
    pub h0: LinearMap,
    pub h1: LinearMap,
    /// Every evaluated parameter, sorted; the initial grid plus refinements.
    pub samples: Vec<HomotopySample>,
    pub segments: Vec<SegmentBound>,
    pub c1: f64,
    pub c2: f64,
    pub certified_sup: f64,
    pub max_lower: f64,
    pub evaluations: usize,
    pub verdict: Verdict,
}

struct Coefficients {
    w0: Vec<AlgebraElement>,
    w1: Vec<AlgebraElement>,
    w2: Vec<AlgebraElement>,
    interpretation: crate::algebra::Interpretation,
}

impl Coefficients {
    // ω_{h_t} = W0 + t·W1 + t²·W2 with D = h1 − h0:
    // W0 = ω_{h0}, W1 = D(xy) − h0(x)D(y) − D(x)h0(y), W2 = −D(x)D(y).
    fn new(h0: &LinearMap, h1: &LinearMap, s: &BoundedSet) -> Result<Self> {
        let gens = s.generators();
        let a0 = gens.iter().map(|x| h0.apply(x)).collect::<Result<Vec<_>>>()?;
        let d = gens.iter().zip(&a0).map(|(x, a)| h1.apply(x)?.sub(a)).collect::<Result<Vec<_>>>()?;
        let terms = ordered_pairs(gens.len())
            .par_iter()
            .map(|&(i, j)| {
                let xy = gens[i].multiply(&gens[j])?;
                let h0xy = h0.apply(&xy)?;
                let dxy = h1.apply(&xy)?.sub(&h0xy)?;
                let w0 = h0xy.sub(&a0[i].multiply(&a0[j])?)?;
                let w1 = dxy.sub(&a0[i].multiply(&d[j])?)?.sub(&d[i].multiply(&a0[j])?)?;
                let w2 = d[i].multiply(&d[j])?.scale_real(-1.0);
                Ok((w0, w1, w2))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut c = Coefficients { w0: Vec::new(), w1: Vec::new(), w2: Vec::new(), interpretation: s.interpretation() };
        for (a, b, e) in terms {
            c.w0.push(a);
            c.w1.push(b);
            c.w2.push(e);
        }
        Ok(c)
    }

    fn at(&self, t: f64) -> Result<BoundedSet> {
        let gens = (0..self.w0.len())
            .map(|k| self.w0[k].add(&self.w1[k].scale_real(t))?.add(&self.w2[k].scale_real(t * t)))
            .collect::<Result<Vec<_>>>()?;
        BoundedSet::with_interpretation(gens, self.interpretation)
    }

    fn max_norm(v: &[AlgebraElement]) -> Result<f64> {
        v.iter().try_fold(0.0_f64, |acc, x| Ok(acc.max(x.norm()?)))
    }
}

fn sample_at(t: f64, set: &BoundedSet, opts: &JsrOptions) -> Result<HomotopySample> {
    let estimate = jsr_estimate_with(set, opts)?;
    let max_norm = set.generators().iter().try_fold(0.0_f64, |acc, x| Ok::<_, Error>(acc.max(x.norm()?)))?;
    Ok(HomotopySample { t, estimate, max_norm })
}

/// Bound on ρ of a set whose generators move by at most `delta` in norm.
/// Every product of length ℓ moves by at most `(M+δ)^ℓ − M^ℓ`.
fn perturbed_bound(s: &HomotopySample, delta: f64) -> f64 {
    let m = s.max_norm;
    let mut best = m + delta;
    if let (Some(l), true) = (s.estimate.upper_level, s.estimate.upper.is_finite()) {
        let l = l as i32;
        let lifted = s.estimate.upper.powi(l) + (m + delta).powi(l) - m.powi(l);
        best = best.min(lifted.powf(1.0 / l as f64));
    }
    best
}

fn segment_bound(left: &HomotopySample, right: &HomotopySample, c1: f64, c2: f64) -> f64 {
    let (a, b) = (left.t, right.t);
    let mid = 0.5 * (a + b);
    // ‖ω_t − ω_s‖ ≤ |t − s|·C1 + |t² − s²|·C2.
    let da = (mid - a) * c1 + (mid * mid - a * a) * c2;
    let db = (b - mid) * c1 + (b * b - mid * mid) * c2;
    perturbed_bound(left, da).max(perturbed_bound(right, db))
}

/// Certificate for `h_t = h0 + t(h1 − h0)` over all of `[0, 1]`.
pub fn linear_homotopy_certificate(h0: &LinearMap, h1: &LinearMap, s: &BoundedSet, opts: &HomotopyOptions) -> Result<HomotopyCertificate> {
    check_same(h0.source(), h1.source())?;
    check_same(h0.target(), h1.target())?;
    check_source(h0, s)?;
    let coef = Coefficients::new(h0, h1, s)?;
    let c1 = Coefficients::max_norm(&coef.w1)?;
    let c2 = Coefficients::max_norm(&coef.w2)?;
    let grid = chebyshev_points(opts.t_points);
    let end0 = curvature(h0, s)?.set;
    let end1 = curvature(h1, s)?.set;
    let last = grid.len() - 1;
    let mut samples = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| match i {
            0 => sample_at(t, &end0, &opts.jsr),
            _ if i == last => sample_at(t, &end1, &opts.jsr),
            _ => sample_at(t, &coef.at(t)?, &opts.jsr),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = samples.len();
    let mut segments: Vec<SegmentBound>;
    loop {
        let grid_max = samples.iter().map(|s| s.estimate.upper).fold(0.0, f64::max);
        segments = samples
            .windows(2)
            .map(|w| SegmentBound { a: w[0].t, b: w[1].t, bound: segment_bound(&w[0], &w[1], c1, c2) })
            .collect();
        let split: Vec<f64> = segments
            .iter()
            .filter(|g| g.bound > grid_max + opts.refine_tol && g.b - g.a > f64::EPSILON)
            .map(|g| 0.5 * (g.a + g.b))
            .collect();
        if split.is_empty() || evaluations + split.len() > opts.max_evaluations {
            break;
        }
        evaluations += split.len();
        let fresh = split.par_iter().map(|&t| sample_at(t, &coef.at(t)?, &opts.jsr)).collect::<Result<Vec<_>>>()?;
        samples.extend(fresh);
        samples.sort_by(|x, y| x.t.total_cmp(&y.t));
    }
    let grid_max = samples.iter().map(|s| s.estimate.upper).fold(0.0, f64::max);
    let certified_sup = segments.iter().map(|g| g.bound).fold(grid_max, f64::max);
    let max_lower = samples.iter().map(|s| s.estimate.lower).fold(0.0, f64::max);
    let verdict = if certified_sup < 1.0 {
        Verdict::Pass
    } else if max_lower >= 1.0 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(HomotopyCertificate {
        h0: h0.clone(),
        h1: h1.clone(),
        samples,
        segments,
        c1,
        c2,
        certified_sup,
        max_lower,
        evaluations,
        verdict,
    })
}

#[derive(Clone, Debug)]
pub struct AppleConfig {
    pub sampler: SamplerConfig,
    pub jsr: JsrOptions,
    pub tol: f64,
    pub sigma_threshold: f64,
    pub homotopy: HomotopyOptions,
}

impl Default for AppleConfig {
    fn default() -> Self {
        let homotopy = HomotopyOptions { max_evaluations: 1024, ..HomotopyOptions::default() };
        Self { sampler: SamplerConfig::default(), jsr: JsrOptions::new(6, 1e-3), tol: 1e-2, sigma_threshold: 1e-2, homotopy }
    }
}

#[derive(Clone, Debug)]
pub struct AppleReport {
    pub fixture: String,
    pub isoradial: IsoradialReport,
    pub sigma: SigmaReport,
    /// Index `n` of the σ used for the homotopy.
    pub sigma_index: Option<usize>,
    pub homotopy: Option<HomotopyCertificate>,
    /// Desk-scale check of the hypotheses; not the infinitary conclusion.
    pub verdict: Verdict,
}

/// Isoradiality, σ-rates and, when both pass, the homotopy from `h` to
/// `f∘σ_n∘h` for the last `σ_n`.
pub fn apple_certificate(fx: &Fixture, family: &SigmaFamily, h: &LinearMap, h_set: &BoundedSet, cfg: &AppleConfig) -> Result<AppleReport> {
    let f = fx.map.map();
    check_same(h.target(), f.target())?;
    let isoradial = certify_fixture(fx, &cfg.sampler, &cfg.jsr, cfg.tol)?;
    let sigma = sigma_approximation_check(f, family, cfg.sigma_threshold)?;
    let mut verdict = isoradial.verdict.combine(sigma.verdict);
    let (mut homotopy, mut sigma_index) = (None, None);
    if verdict == Verdict::Pass {
        let k = family.sigmas.len() - 1;
        let h1 = f.compose(&family.sigmas[k])?.compose(h)?;
        let cert = linear_homotopy_certificate(h, &h1, h_set, &cfg.homotopy)?;
        verdict = cert.verdict;
        homotopy = Some(cert);
        sigma_index = Some(family.ns[k]);
    }
    Ok(AppleReport { fixture: fx.name.clone(), isoradial, sigma, sigma_index, homotopy, verdict })
}

/// The evaluation embedding `h = f` on the Fejér fixture, tested on half the
/// templates.
pub fn evaluation_embedding(fx: &Fixture) -> Result<(LinearMap, BoundedSet)> {
    let set = BoundedSet::new(fx.templates.iter().map(|t| t.scale_real(0.5)).collect())?;
    Ok((fx.map.map().clone(), set))
}

/// `σ_n = id` for every `n` on the source of a homomorphism onto itself.
pub fn identity_family(f: &Homomorphism, set: BoundedSet, count: usize) -> Result<SigmaFamily> {
    let id = LinearMap::identity(f.target().clone())?;
    Ok(SigmaFamily {
        ns: (1..=count).collect(),
        sigmas: vec![id; count],
        set,
        disk: Disk::norm_ball(1.0)?,
        bounds: None,
    })
}

/// Scalar map `z ↦ c·z` on ℂ.
pub fn scalar_multiple(c: f64) -> Result<LinearMap> {
    Ok(LinearMap::identity(Arc::new(AlgebraDescriptor::scalars()))?.scale_real(c))
}

/// The bounded set `{r}` in ℂ; its disked hull is the ball of radius `r`.
pub fn scalar_ball(r: f64) -> Result<BoundedSet> {
    BoundedSet::new(vec![AlgebraElement::scalar(C64::new(r, 0.0))?])
}

/// Mode `k` on the Fejér grid.
pub fn fejer_mode(k: i64) -> Result<AlgebraElement> {
    fourier_element(&circle_algebra(FEJER_GRID)?, k, FEJER_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoradial::{identity_homomorphism, interval_restriction, matrix_tower};
    use crate::jsr::Status;

    fn opts() -> JsrOptions {
        JsrOptions::new(8, 1e-9)
    }

    #[test]
    fn homomorphisms_have_zero_curvature() {
        for fx in crate::isoradial::fixture_catalog().unwrap() {
            let s = BoundedSet::new(fx.templates.clone()).unwrap();
            let e = curvature_radius(fx.map.map(), &s, &opts()).unwrap();
            assert_eq!((e.lower, e.upper), (0.0, 0.0), "{}", fx.name);
        }
        let zero = scalar_multiple(0.0).unwrap();
        assert!(curvature(&zero, &scalar_ball(1.0).unwrap()).unwrap().set.generators()[0].is_zero());
    }

    #[test]
    fn scalar_curvature_closed_form() {
        for eps in [0.1, 0.5, -0.3] {
            let e = curvature_radius(&scalar_multiple(1.0 + eps).unwrap(), &scalar_ball(1.0).unwrap(), &opts()).unwrap();
            let want = (eps * (1.0 + eps)).abs();
            assert!((e.lower - want).abs() < 1e-12 && (e.upper - want).abs() < 1e-12);
        }
        let (v, e) = is_approximately_multiplicative(&scalar_multiple(2.0).unwrap(), &scalar_ball(1.0).unwrap(), &opts()).unwrap();
        assert_eq!(v, Verdict::Fail);
        assert!((e.lower - 2.0).abs() < 1e-12);
    }

    #[test]
    fn borderline_is_inconclusive() {
        // Two non-commuting curvature generators near radius 1 at depth 1.
        let g = scalar_multiple(1.0).unwrap();
        let s = scalar_ball(1.0).unwrap();
        let (v, _) = is_approximately_multiplicative(&g, &s, &opts()).unwrap();
        assert_eq!(v, Verdict::Pass);
        let a = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let b = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        let set = BoundedSet::new(vec![a.scale_real(1.0 / 1.6), b.scale_real(1.0 / 1.6)]).unwrap();
        let e = jsr_estimate_with(&set, &JsrOptions::new(1, 1e-9)).unwrap();
        assert!(e.lower < 1.0 && e.upper >= 1.0);
    }

    #[test]
    fn perturbed_corner_embedding_is_curved() {
        let f = corner_embedding(2, 3, NormKind::Op2).unwrap();
        let e11 = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]).unwrap();
        let mut images: Vec<AlgebraElement> = (0..f.basis().len()).map(|j| f.image(j)).collect();
        images[0] = images[0].add(&e11.scale_real(0.01)).unwrap();
        let g = LinearMap::new(f.basis().to_vec(), images).unwrap();
        let unit = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let e = curvature_radius(&g, &BoundedSet::new(vec![unit]).unwrap(), &opts()).unwrap();
        // ω(E11, E11) = 1.01 E11 − 1.0201 E11 = −0.0101 E11.
        assert!((e.lower - 0.0101).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn curvature_scales_quadratically() {
        let g = scalar_multiple(1.3).unwrap();
        let s = BoundedSet::new(vec![AlgebraElement::scalar(C64::new(0.4, 0.2)).unwrap(), AlgebraElement::scalar(C64::new(-0.1, 0.5)).unwrap()]).unwrap();
        let base = curvature_radius(&g, &s, &opts()).unwrap();
        let scaled = curvature_radius(&g, &s.scaled_real(3.0), &opts()).unwrap();
        assert!((scaled.upper - 9.0 * base.upper).abs() < 1e-12 * scaled.upper);
    }

    /// Time-domain Fejér smoothing: convolution with
    /// `F_n(t) = (1/(n+1))·(sin((n+1)t/2)/sin(t/2))²` on the grid.
    fn fejer_oracle(values: &[f64], n: usize) -> Vec<f64> {
        let m = values.len();
        let kernel = |t: f64| {
            let half = (t / 2.0).sin();
            if half.abs() < 1e-14 {
                (n + 1) as f64
            } else {
                ((((n + 1) as f64) * t / 2.0).sin() / half).powi(2) / (n + 1) as f64
            }
        };
        (0..m)
            .map(|j| (0..m).map(|l| kernel(TAU * (j as f64 - l as f64) / m as f64) * values[l]).sum::<f64>() / m as f64)
            .collect()
    }

    #[test]
    fn fejer_sigma_matches_kernel_oracle() {
        let m = 33;
        let desc = circle_algebra(m).unwrap();
        let vals: Vec<f64> = (0..m).map(|j| ((j * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let x = AlgebraElement::from_coords(desc, &vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>()).unwrap();
        for n in [0, 3, 16] {
            let got = fejer_sigma(m, n).unwrap().apply(&x).unwrap().coords();
            for (g, w) in got.iter().zip(fejer_oracle(&vals, n)) {
                assert!((g.re - w).abs() < 1e-12 && g.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fejer_rates_decrease_below_threshold() {
        let fx = trig_fejer_fixture().unwrap();
        let fam = fejer_family().unwrap();
        let r = sigma_approximation_check(fx.map.map(), &fam, 1e-2).unwrap();
        assert!(r.nonincreasing && r.within_bounds, "{:?}", r.epsilons);
        assert_eq!(r.verdict, Verdict::Pass);
        // Each family member is a single mode, damped by |k|/(n+1).
        for (n, e) in r.ns.iter().zip(&r.epsilons) {
            let exact = 0.25 / (*n + 1) as f64;
            assert!(*e <= exact + 1e-12 && *e >= exact * (1.0 - 1e-3), "n={n} e={e}");
        }
    }

    #[test]
    fn tower_compressions_vanish_past_support() {
        let id = identity_homomorphism(8).unwrap();
        let mut rows = vec![vec![0.0; 8]; 8];
        for (i, row) in rows.iter_mut().enumerate().take(4) {
            for (j, v) in row.iter_mut().enumerate().take(4) {
                *v = (i + 2 * j) as f64 / 10.0;
            }
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let s = BoundedSet::new(vec![AlgebraElement::real_matrix(NormKind::Op2, &refs).unwrap()]).unwrap();
        let fam = tower_compression_family(8, 4, s).unwrap();
        let r = sigma_approximation_check(id.map(), &fam, 0.0).unwrap();
        for (n, e) in r.ns.iter().zip(&r.epsilons) {
            assert_eq!(*e == 0.0, *n >= 4, "n={n} e={e}");
        }
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn scalar_homotopies_match_closed_form() {
        let id = scalar_multiple(1.0).unwrap();
        let cases = [(0.99, 1.0), (0.0, 1.0), (0.0, 3.0)];
        for (c, r) in cases {
            let cert = linear_homotopy_certificate(&id, &scalar_multiple(c).unwrap(), &scalar_ball(r).unwrap(), &HomotopyOptions::default()).unwrap();
            let closed = (0..=100_000)
                .map(|i| {
                    let q = 1.0 - (1.0 - c) * i as f64 / 100_000.0;
                    (q * (1.0 - q)).abs() * r * r
                })
                .fold(0.0, f64::max);
            assert!((cert.certified_sup - closed).abs() < 1e-6, "c={c} r={r} sup={} closed={closed}", cert.certified_sup);
            assert_eq!(cert.verdict, if closed < 1.0 { Verdict::Pass } else { Verdict::Fail });
        }
    }

    #[test]
    fn homotopy_endpoints_are_bit_exact() {
        let h0 = scalar_multiple(1.2).unwrap();
        let h1 = scalar_multiple(0.7).unwrap();
        let s = scalar_ball(0.8).unwrap();
        let cert = linear_homotopy_certificate(&h0, &h1, &s, &HomotopyOptions::default()).unwrap();
        let e0 = curvature_radius(&h0, &s, &HomotopyOptions::default().jsr).unwrap();
        let e1 = curvature_radius(&h1, &s, &HomotopyOptions::default().jsr).unwrap();
        assert_eq!(cert.samples.first().unwrap().estimate, e0);
        assert_eq!(cert.samples.last().unwrap().estimate, e1);
    }

    #[test]
    fn constant_homomorphism_homotopy() {
        let fx = matrix_tower(2, 4).unwrap();
        let s = BoundedSet::new(fx.templates.clone()).unwrap();
        let cert = linear_homotopy_certificate(fx.map.map(), fx.map.map(), &s, &HomotopyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert!(cert.samples.iter().all(|x| x.estimate.lower == 0.0 && x.estimate.upper == 0.0));
        assert_eq!(cert.certified_sup, 0.0);
    }

    #[test]
    fn apple_on_fejer_fixture() {
        let fx = trig_fejer_fixture().unwrap();
        let (h, set) = evaluation_embedding(&fx).unwrap();
        let cfg = AppleConfig { sampler: SamplerConfig { per_size: 4, ..SamplerConfig::default() }, ..AppleConfig::default() };
        let r = apple_certificate(&fx, &fejer_family().unwrap(), &h, &set, &cfg).unwrap();
        assert_eq!(r.isoradial.verdict, Verdict::Pass);
        assert_eq!(r.sigma.verdict, Verdict::Pass);
        let cert = r.homotopy.as_ref().unwrap();
        assert!(cert.certified_sup < 1.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn apple_negative_control_fails_early() {
        let fx = interval_restriction().unwrap();
        let f = fx.map.map();
        // Section of the restriction: extend by zero at the dropped points.
        let action = crate::algebra::CMatrix::from_fn(5, 3, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let sigma = LinearMap::from_action(f.target().clone(), f.source().clone(), None, action).unwrap();
        let set = BoundedSet::new(vec![f.apply(&fx.templates[0]).unwrap()]).unwrap();
        let fam = SigmaFamily { ns: vec![1], sigmas: vec![sigma], set, disk: Disk::norm_ball(1.0).unwrap(), bounds: None };
        let hs = BoundedSet::new(fx.templates.clone()).unwrap();
        let r = apple_certificate(&fx, &fam, f, &hs, &AppleConfig::default()).unwrap();
        assert_eq!(r.isoradial.verdict, Verdict::Fail);
        assert_eq!(r.sigma.verdict, Verdict::Pass);
        assert!(r.homotopy.is_none());
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn apple_identity_is_trivial() {
        let id = identity_homomorphism(3).unwrap();
        let fx = Fixture { name: "identity".into(), map: id.clone(), templates: matrix_tower(3, 3).unwrap().templates, extra_sets: Vec::new() };
        let s = BoundedSet::new(fx.templates.clone()).unwrap();
        let fam = identity_family(&id, s.clone(), 2).unwrap();
        let r = apple_certificate(&fx, &fam, id.map(), &s.scaled_real(0.5), &AppleConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.homotopy.unwrap().certified_sup, 0.0);
    }

    #[test]
    fn chebyshev_grid_has_exact_endpoints() {
        let t = chebyshev_points(65);
        assert_eq!((t[0], t[64], t.len()), (0.0, 1.0, 65));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!((t[32] - 0.5).abs() < 1e-15);
        let _ = Status::Certified;
    }
}
