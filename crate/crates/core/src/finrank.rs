//! Finite-rank approximation of coordinate operators uniformly on compact
//! coordinate boxes, with certified rates.
//!
//! A compact set is a box `{x : |x_k| ≤ a_k}` with a closed-form envelope
//! `a`. Operators are banded: `(Fx)_{k+o} = Σ_o b_o(k)·x_k`. When `F − f` has
//! a single band the supremum of a weighted gauge over the box is attained
//! at `x = a` and is computed in closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::Interval;
use crate::seqspace::closed::{tail_norm, ClosedForm, TailKind};
use crate::seqspace::{DiskSpec, GaugeKind, Vector};
use crate::Verdict;

/// Rates computed when the family length is not fixed.
pub const DEFAULT_RATES: usize = 64;
/// Coordinates with independently sampled signs.
const SAMPLE_HEAD: usize = 64;
/// Largest truncation index searched for a rank.
const MAX_INDEX: i64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Sup,
    L1,
    L2,
}

/// `sup_k w(k)|x_k|`, `Σ_k w(k)|x_k|` or `(Σ_k (w(k)x_k)²)^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetGauge {
    pub kind: NormKind,
    #[serde(default = "unit_weight")]
    pub weight: ClosedForm,
}

fn unit_weight() -> ClosedForm {
    ClosedForm::constant(1.0)
}

impl TargetGauge {
    pub fn new(kind: NormKind, weight: ClosedForm) -> Result<Self> {
        DiskSpec::new(GaugeKind::L1, weight.clone())?;
        Ok(Self { kind, weight })
    }

    pub fn unit(kind: NormKind) -> Self {
        Self { kind, weight: unit_weight() }
    }

    pub fn gauge(&self, v: &Vector) -> Interval {
        match self.kind {
            NormKind::Sup => DiskSpec { kind: GaugeKind::Sup, weight: self.weight.clone() }.gauge(v, None),
            NormKind::L1 => DiskSpec { kind: GaugeKind::L1, weight: self.weight.clone() }.gauge(v, None),
            NormKind::L2 => {
                let h = v.head.len();
                let head: f64 = v.head.iter().enumerate().map(|(k, x)| (self.weight.eval(k as u64) * x).powi(2)).sum();
                let g: Vec<ClosedForm> = v.tail_forms().iter().map(|f| f.mul(&self.weight)).collect();
                let squares: Vec<ClosedForm> = g.iter().flat_map(|a| g.iter().map(move |b| a.mul(b))).collect();
                let tail = tail_norm(&squares, h as u64, TailKind::Sum);
                Interval::new((head + tail.lo).sqrt(), (head + tail.hi).sqrt())
            }
        }
    }

    /// Whether the gauge of the tail beyond `n` tends to zero.
    fn tail_vanishes(&self, v: &Vector) -> bool {
        match self.kind {
            NormKind::Sup => v.tail_forms().iter().all(|f| f.mul(&self.weight).is_null()),
            _ => self.gauge(v).hi.is_finite(),
        }
    }
}

/// The box `{x : |x_k| ≤ a_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSetModel {
    pub envelope: Vector,
}

impl CompactSetModel {
    pub fn new(envelope: Vector) -> Result<Self> {
        envelope.validate()?;
        if envelope.head.iter().any(|x| *x < 0.0) || envelope.tail.iter().any(|f| f.c < 0.0 || f.beta < 0.0) {
            return Err(Error::invalid("envelopes are nonnegative"));
        }
        Ok(Self { envelope })
    }

    /// `a_k = c·βᵏ`.
    pub fn geometric(c: f64, beta: f64) -> Result<Self> {
        Self::new(Vector::closed(ClosedForm::geometric(c, beta)))
    }

    /// `a_k = c·(k + 1)^{-p}`.
    pub fn inverse_power(c: f64, p: f64) -> Result<Self> {
        Self::new(Vector::closed(ClosedForm::power(c, 1.0, -p, 1.0)))
    }

    pub fn zero() -> Self {
        Self { envelope: Vector::zero() }
    }

    /// Summable (or null, for sup gauges) under the ambient gauge.
    pub fn is_precompact_in(&self, t: &TargetGauge) -> bool {
        let finite = t.gauge(&self.envelope).hi.is_finite();
        match t.kind {
            NormKind::Sup => finite && self.envelope.tail_forms().iter().all(|f| f.is_null()),
            _ => finite,
        }
    }

    /// A point of the box: independent factors in `[-1, 1]` on the first
    /// coordinates, a common factor on the closed-form tail.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let v = self.envelope.extended(SAMPLE_HEAD);
        let head = v.head.iter().map(|a| a * u.sample(rng)).collect();
        let s: f64 = u.sample(rng);
        Vector { head, tail: v.tail.iter().map(|f| f.scale(s)).collect() }
    }

    /// An extreme point with the given head signs and a tail sign that is
    /// constant or alternating.
    pub fn extreme_point(&self, signs: &[bool], alternate_tail: bool) -> Vector {
        let v = self.envelope.extended(signs.len());
        let head = v.head.iter().zip(signs.iter().chain(std::iter::repeat(&true))).map(|(a, s)| if *s { *a } else { -a }).collect();
        let tail = v
            .tail
            .iter()
            .map(|f| if alternate_tail { ClosedForm { beta: -f.beta, ..f.clone() } } else { f.clone() })
            .collect();
        Vector { head, tail }
    }
}

/// `(Fx)_{k+offset} += coeffs_k·x_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    #[serde(default)]
    pub offset: i64,
    pub coeffs: Vector,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorModel {
    pub bands: Vec<Band>,
}

fn hadamard(u: &Vector, v: &Vector) -> Vector {
    let len = u.head.len().max(v.head.len());
    let (a, b) = (u.extended(len), v.extended(len));
    let head = a.head.iter().zip(&b.head).map(|(x, y)| x * y).collect();
    let ta = a.tail_forms();
    let tb = b.tail_forms();
    let tail = ta.iter().flat_map(|f| tb.iter().map(move |g| f.mul(g))).collect::<Vec<_>>();
    Vector { head, tail: crate::seqspace::closed::merge(&tail) }
}

/// Moves coordinate `k` to `k + o`, dropping what falls below zero.
fn shift(v: &Vector, o: i64) -> Vector {
    if o >= 0 {
        let mut head = vec![0.0; o as usize];
        head.extend(&v.head);
        Vector { head, tail: v.tail.iter().map(|f| f.shift(-o)).collect() }
    } else {
        let d = o.unsigned_abs() as usize;
        let w = v.extended(d);
        Vector { head: w.head[d..].to_vec(), tail: w.tail.iter().map(|f| f.shift(-o)).collect() }
    }
}

impl OperatorModel {
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        for b in &bands {
            b.coeffs.validate()?;
        }
        Ok(Self { bands }.normalized())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::diagonal(ClosedForm::constant(1.0))
    }

    pub fn diagonal(d: ClosedForm) -> Self {
        Self { bands: vec![Band { offset: 0, coeffs: Vector::closed(d) }] }.normalized()
    }

    /// `P_n`: keeps coordinates `k ≤ n`, rank `n + 1`.
    pub fn truncation(n: i64) -> Self {
        Self { bands: vec![Band { offset: 0, coeffs: Vector::finite(vec![1.0; (n + 1).max(0) as usize]) }] }.normalized()
    }

    /// `e_k ↦ e_{k+1}`.
    pub fn shift() -> Self {
        Self { bands: vec![Band { offset: 1, coeffs: Vector::closed(ClosedForm::constant(1.0)) }] }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { bands: self.bands.iter().map(|b| Band { offset: b.offset, coeffs: b.coeffs.scale(c) }).collect() }.normalized()
    }

    pub fn compose_truncation(&self, n: i64) -> Self {
        Self {
            bands: self.bands.iter().map(|b| Band { offset: b.offset, coeffs: b.coeffs.truncate(n) }).collect(),
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let mut out: Vec<Band> = Vec::new();
        self.bands.sort_by_key(|b| b.offset);
        for b in self.bands {
            match out.last_mut() {
                Some(last) if last.offset == b.offset => last.coeffs = last.coeffs.add(&b.coeffs),
                _ => out.push(b),
            }
        }
        out.retain(|b| !b.coeffs.is_zero());
        Self { bands: out }
    }

    pub fn sub(&self, other: &OperatorModel) -> Self {
        let mut bands = self.bands.clone();
        bands.extend(other.bands.iter().map(|b| Band { offset: b.offset, coeffs: b.coeffs.scale(-1.0) }));
        Self { bands }.normalized()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.bands.iter().fold(Vector::zero(), |acc, b| acc.add(&shift(&hadamard(&b.coeffs, x), b.offset)))
    }

    pub fn is_zero(&self) -> bool {
        self.bands.is_empty()
    }

    /// Upper bound on the operator norm for `t`, as a sum of band norms.
    pub fn bound(&self, t: &TargetGauge) -> f64 {
        self.bands.iter().map(|b| band_norm(b, &t.weight)).sum()
    }

    /// Checks `gauge(F e_k) ≤ bound·gauge(e_k)` on the first coordinates.
    pub fn verify_bound(&self, t: &TargetGauge, bound: f64, coords: usize) -> Result<()> {
        for k in 0..coords {
            let e = Vector::unit(k);
            let lhs = t.gauge(&self.apply(&e)).lo;
            if lhs > bound * t.gauge(&e).hi * (1.0 + 1e-12) {
                return Err(Error::InvariantViolation(format!("operator exceeds bound {bound} at e_{k}")));
            }
        }
        Ok(())
    }
}

/// `sup_k |b(k)|·w(k + o)/w(k)` over coordinates that stay nonnegative.
fn band_norm(b: &Band, w: &ClosedForm) -> f64 {
    let o = b.offset;
    let h = b.coeffs.head.len().max((-o).max(0) as usize);
    let c = b.coeffs.extended(h);
    let mut best = 0.0_f64;
    for (k, x) in c.head.iter().enumerate() {
        let j = k as i64 + o;
        if j >= 0 {
            best = best.max(x.abs() * w.eval(j as u64) / w.eval(k as u64));
        }
    }
    let Ok(inv) = w.recip() else {
        return f64::INFINITY;
    };
    let ratio = w.shift(o).mul(&inv);
    let forms: Vec<ClosedForm> = c.tail_forms().iter().map(|f| f.mul(&ratio)).collect();
    best.max(tail_norm(&forms, h as u64, TailKind::Sup).hi)
}

/// A sequence of operators `F_0, F_1, …` with a closed-form limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OperatorFamily {
    /// `F_n = P_n`.
    Truncations,
    /// `F_n = op`.
    Constant { op: OperatorModel },
    /// `F_n = scale(n)·op`.
    Scaled { op: OperatorModel, scale: ClosedForm },
    /// `F_n = ops[min(n, len − 1)]`.
    List { ops: Vec<OperatorModel> },
}

impl OperatorFamily {
    pub fn member(&self, n: usize) -> OperatorModel {
        match self {
            OperatorFamily::Truncations => OperatorModel::truncation(n as i64),
            OperatorFamily::Constant { op } => op.clone(),
            OperatorFamily::Scaled { op, scale } => op.scale(scale.eval(n as u64)),
            OperatorFamily::List { ops } => ops.get(n).or(ops.last()).cloned().unwrap_or_default(),
        }
    }

    fn default_len(&self) -> usize {
        match self {
            OperatorFamily::List { ops } => ops.len(),
            _ => DEFAULT_RATES,
        }
    }

    /// Uniform bound over the whole family, `∞` if there is none.
    pub fn equibound(&self, t: &TargetGauge) -> f64 {
        match self {
            OperatorFamily::Truncations => 1.0,
            OperatorFamily::Constant { op } => op.bound(t),
            OperatorFamily::Scaled { op, scale } => {
                let b = op.bound(t);
                if b == 0.0 {
                    0.0
                } else {
                    tail_norm(std::slice::from_ref(scale), 0, TailKind::Sup).hi * b
                }
            }
            OperatorFamily::List { ops } => ops.iter().map(|o| o.bound(t)).fold(0.0, f64::max),
        }
    }

    /// Whether `F_n v → f v` in the gauge of `t`, decided on closed forms.
    fn converges_at(&self, f: &OperatorModel, v: &Vector, t: &TargetGauge) -> bool {
        match self {
            OperatorFamily::Truncations => OperatorModel::identity().sub(f).apply(v).is_zero() && t.tail_vanishes(v),
            OperatorFamily::Constant { op } => op.sub(f).apply(v).is_zero(),
            OperatorFamily::List { ops } => ops.last().cloned().unwrap_or_default().sub(f).apply(v).is_zero(),
            OperatorFamily::Scaled { op, scale } => {
                let limit = if scale.is_constant() {
                    op.scale(scale.c)
                } else if scale.is_null() || op.apply(v).is_zero() {
                    OperatorModel::zero()
                } else {
                    return false;
                };
                limit.sub(f).apply(v).is_zero()
            }
        }
    }
}

/// `sup_{x ∈ S} gauge_T(D x)` for a single-band `D`.
pub fn box_sup(d: &OperatorModel, s: &CompactSetModel, t: &TargetGauge) -> Result<Interval> {
    match d.bands.as_slice() {
        [] => Ok(Interval::point(0.0)),
        [_] => Ok(t.gauge(&d.apply(&s.envelope))),
        _ => Err(Error::UnsupportedOperator("supremum over a box of a multi-band difference".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformReport {
    /// Certified `ε_n = sup_{x∈S} gauge_T((F_n − f)x)`.
    pub rates: Vec<Interval>,
    pub verdict: Verdict,
}

/// Certified rates of `F_n → f` uniformly on `S` and whether they tend to 0.
pub fn uniform_convergence_on_set(
    family: &OperatorFamily,
    f: &OperatorModel,
    s: &CompactSetModel,
    t: &TargetGauge,
    count: Option<usize>,
) -> Result<UniformReport> {
    let count = count.unwrap_or_else(|| family.default_len());
    let rates = (0..count).into_par_iter().map(|n| box_sup(&family.member(n).sub(f), s, t)).collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::from(family.converges_at(f, &s.envelope, t));
    Ok(UniformReport { rates, verdict })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub equibound: f64,
    pub uniform: Verdict,
    pub pointwise: Verdict,
    pub points: usize,
}

/// Checks that pointwise convergence on sampled extreme points agrees with
/// uniform convergence on `S` for an equibounded family.
pub fn pointwise_vs_uniform_check(
    family: &OperatorFamily,
    f: &OperatorModel,
    s: &CompactSetModel,
    t: &TargetGauge,
    declared_bound: Option<f64>,
    seed: u64,
) -> Result<EquivalenceReport> {
    let computed = family.equibound(t);
    let equibound = declared_bound.unwrap_or(computed);
    if !computed.is_finite() || computed > equibound * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("family is not equibounded (bound {computed}, declared {equibound})")));
    }
    for n in 0..family.default_len().min(DEFAULT_RATES) {
        family.member(n).verify_bound(t, equibound, SAMPLE_HEAD)?;
    }
    let uniform = uniform_convergence_on_set(family, f, s, t, Some(1))?.verdict;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coin = Uniform::new(0u8, 2).expect("valid range");
    let mut pointwise = Verdict::Pass;
    let mut points = 0;
    for p in 0..16 {
        let signs: Vec<bool> = (0..SAMPLE_HEAD).map(|_| p == 0 || coin.sample(&mut rng) == 1).collect();
        for alt in [false, true] {
            points += 1;
            let x = s.extreme_point(&signs, alt);
            pointwise = pointwise.combine(Verdict::from(family.converges_at(f, &x, t)));
        }
    }
    if pointwise != uniform {
        return Err(Error::InvariantViolation(format!("pointwise {pointwise:?} but uniform {uniform:?} for an equibounded family")));
    }
    Ok(EquivalenceReport { equibound, uniform, pointwise, points })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalApproxReport {
    /// `T = scale·(unit ball of the ambient gauge)` contains `S`.
    pub scale: f64,
    /// Truncation index `n` of the witness `P_n`, `-1` for the zero map.
    pub index: i64,
    /// Rank of `P_n`.
    pub rank: usize,
    /// Certified `ε_m` for `m = 0, …, index`.
    pub rates: Vec<Interval>,
    /// Local approximation and regular coordinates give the global property.
    pub global_via_regularity: bool,
}

fn truncation_rate(s: &CompactSetModel, t: &TargetGauge, n: i64) -> Interval {
    t.gauge(&s.envelope.drop_through(n))
}

/// Finds the smallest truncation `P_n` with `sup_S gauge((1 − P_n)x) ≤ tol`.
pub fn local_approx_property_check(s: &CompactSetModel, t: &TargetGauge, tol: f64, rank_budget: usize) -> Result<LocalApproxReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if !s.is_precompact_in(t) {
        return Err(Error::Precondition("envelope is not summable under the ambient gauge".into()));
    }
    let ok = |n: i64| truncation_rate(s, t, n).hi <= tol;
    let index = if ok(-1) {
        -1
    } else {
        let mut hi = 0_i64;
        while !ok(hi) {
            if hi >= MAX_INDEX {
                return Err(Error::NumericalFailure { message: "no truncation reaches the tolerance".into(), lower: 0.0, upper: hi as f64 });
            }
            hi = (hi * 2).max(1);
        }
        let mut lo = hi / 2 - 1;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let rank = (index + 1) as usize;
    if rank > rank_budget {
        return Err(Error::RankBudget { budget: rank_budget, required: rank });
    }
    let rates = (0..=index).into_par_iter().map(|n| truncation_rate(s, t, n)).collect();
    Ok(LocalApproxReport { scale: t.gauge(&s.envelope).hi, index, rank, rates, global_via_regularity: true })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    pub samples: usize,
    /// Largest measured gauge over certified rate.
    pub worst_ratio: f64,
    pub violations: usize,
}

/// Samples points of `S` and compares `gauge((F_n − f)x)` with `ε_n`.
pub fn sampling_soundness(
    family: &OperatorFamily,
    f: &OperatorModel,
    s: &CompactSetModel,
    t: &TargetGauge,
    rates: &[Interval],
    samples: usize,
    seed: u64,
) -> SoundnessReport {
    let diffs: Vec<OperatorModel> = (0..rates.len()).map(|n| family.member(n).sub(f)).collect();
    let per_sample: Vec<(f64, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let x = s.sample(&mut rng);
            let mut worst = 0.0_f64;
            let mut bad = 0;
            for (d, eps) in diffs.iter().zip(rates) {
                let g = t.gauge(&d.apply(&x)).lo;
                if g > eps.hi {
                    bad += 1;
                }
                if eps.hi > 0.0 {
                    worst = worst.max(g / eps.hi);
                }
            }
            (worst, bad)
        })
        .collect();
    SoundnessReport {
        samples,
        worst_ratio: per_sample.iter().map(|p| p.0).fold(0.0, f64::max),
        violations: per_sample.iter().map(|p| p.1).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> TargetGauge {
        TargetGauge::unit(NormKind::L2)
    }

    #[test]
    fn truncation_rate_on_geometric_box() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let r = uniform_convergence_on_set(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &l2(), Some(8)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let exact = 0.0625 / 3f64.sqrt();
        assert!(r.rates[4].contains(exact, 0.0) && r.rates[4].width() < 1e-12, "{:?}", r.rates[4]);
        assert!((r.rates[4].hi - 0.03608).abs() < 1e-5);
        assert!(r.rates.windows(2).all(|w| w[1].hi <= w[0].hi));
    }

    #[test]
    fn constant_families() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let same = uniform_convergence_on_set(&OperatorFamily::Constant { op: OperatorModel::shift() }, &OperatorModel::shift(), &s, &l2(), None).unwrap();
        assert!(same.rates.iter().all(|r| r.hi == 0.0) && same.verdict == Verdict::Pass);
        let unit = CompactSetModel::new(Vector::closed(ClosedForm::constant(1.0))).unwrap();
        let sup = TargetGauge::unit(NormKind::Sup);
        let id = uniform_convergence_on_set(&OperatorFamily::Constant { op: OperatorModel::identity() }, &OperatorModel::zero(), &unit, &sup, Some(4)).unwrap();
        assert_eq!(id.verdict, Verdict::Fail);
        assert!(id.rates.iter().all(|r| r.contains(1.0, 0.0) && r.lo > 0.99));
    }

    #[test]
    fn multi_band_differences_are_unsupported() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let d = OperatorModel::identity().sub(&OperatorModel::shift());
        assert!(matches!(box_sup(&d, &s, &l2()), Err(Error::UnsupportedOperator(_))));
    }

    #[test]
    fn equivalence_and_gate() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let r = pointwise_vs_uniform_check(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &l2(), None, 7).unwrap();
        assert_eq!((r.uniform, r.pointwise), (Verdict::Pass, Verdict::Pass));
        let growing = OperatorFamily::Scaled { op: OperatorModel::truncation(1), scale: ClosedForm::power(1.0, 0.0, 1.0, 1.0) };
        let gate = pointwise_vs_uniform_check(&growing, &OperatorModel::zero(), &s, &l2(), None, 7);
        assert!(matches!(gate, Err(Error::Precondition(_))));
        let zero = OperatorFamily::Constant { op: OperatorModel::zero() };
        let z = pointwise_vs_uniform_check(&zero, &OperatorModel::zero(), &s, &l2(), None, 7).unwrap();
        assert_eq!((z.uniform, z.pointwise), (Verdict::Pass, Verdict::Pass));
    }

    #[test]
    fn ranks_for_tolerances() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let r = local_approx_property_check(&s, &l2(), 1e-3, 64).unwrap();
        assert_eq!((r.index, r.rank), (10, 11));
        assert!(r.rates[9].hi > 1e-3 && r.rates[10].hi <= 1e-3);
        assert_eq!(local_approx_property_check(&CompactSetModel::zero(), &l2(), 1e-3, 0).unwrap().rank, 0);
        let p = CompactSetModel::inverse_power(1.0, 2.0).unwrap();
        let r = local_approx_property_check(&p, &TargetGauge::unit(NormKind::L1), 1e-2, 1000).unwrap();
        assert!(r.rank <= 101, "{}", r.rank);
        assert!(matches!(local_approx_property_check(&s, &l2(), 1e-3, 5), Err(Error::RankBudget { budget: 5, required: 11 })));
    }

    #[test]
    fn sampled_points_respect_rates() {
        let s = CompactSetModel::geometric(1.0, 0.5).unwrap();
        let r = uniform_convergence_on_set(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &l2(), Some(16)).unwrap();
        let sound = sampling_soundness(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &l2(), &r.rates, 200, 3);
        assert_eq!(sound.violations, 0);
        assert!(sound.worst_ratio <= 1.0);
    }
}
