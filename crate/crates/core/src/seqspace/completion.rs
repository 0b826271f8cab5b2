//! Completeness of model spaces and the completion of a finitely supported
//! model as Cauchy sequences modulo null sequences.

use rayon::prelude::*;

use super::closed::{tail_norm, ClosedForm, NullSeq, TailKind};
use super::decide::{cauchy_check, convergence_check, tail_gauge, DecisionReport};
use super::sequence::{SequenceModel, Term};
use super::space::{DiskSpec, GaugeKind, ModelSpace, Vector};
use crate::error::{Error, Result};
use crate::jsr::Interval;
use crate::Verdict;

/// Indices scanned explicitly when fitting a rate to a tail envelope.
const RATE_SCAN: u64 = 256;

/// A rate `ε` with `gauge_S(P_n u − P_m u) ≤ ε_m` for all `n ≥ m`, built
/// from the closed-form envelope of the tail of `u` and a finite scan.
pub fn partial_sum_rate(disk: &DiskSpec, u: &Vector) -> Result<NullSeq> {
    let forms: Vec<ClosedForm> = u.tail_forms().iter().map(|f| f.mul(&disk.weight)).collect();
    let h = u.head.len() as u64;
    let mut env = Vec::new();
    for f in &forms {
        let e = f
            .tail_envelope(1, 1, 1, disk.kind.tail())
            .filter(|e| e.is_null() && e.c > 0.0)
            .ok_or_else(|| Error::NotCauchy("partial sums of a vector outside the disk's span".into()))?;
        env.push(e);
    }
    let base = if env.is_empty() { NullSeq::geometric(1.0, 0.5) } else { NullSeq(env) };
    let mut c = 1.0_f64;
    for m in 0..=h.max(RATE_SCAN) {
        let t = tail_gauge(disk, u, m as i64 + 1).hi;
        if !t.is_finite() {
            return Err(Error::NotCauchy("tail gauge is infinite".into()));
        }
        c = c.max(t / base.eval(m));
    }
    Ok(base.scale(c * (1.0 + 1e-9)))
}

/// A Cauchy sequence whose limit escapes the model.
#[derive(Clone, Debug)]
pub struct IncompletenessWitness {
    pub sequence: SequenceModel,
    pub eps: NullSeq,
    pub cauchy: DecisionReport,
    pub limit: Vector,
}

#[derive(Clone, Debug)]
pub struct DiskCompleteness {
    pub disk: usize,
    /// S-Cauchy sequences are S-convergent, decided on the weight descriptors.
    pub cauchy_converges: Verdict,
    /// Every probe Cauchy sequence converges to an element of the model.
    pub probes_converge: Verdict,
    pub witness: Option<IncompletenessWitness>,
}

#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub verdict: Verdict,
    pub per_disk: Vec<DiskCompleteness>,
    /// Both conditions agree on every disk.
    pub consistent: bool,
}

/// `u_k = γ^k` with `γ` small enough that every weighted gauge of `u` is
/// finite; truncated to the model's dimension.
fn probe_vector(space: &ModelSpace, disk: &DiskSpec, gamma_scale: f64) -> Vector {
    let gamma = gamma_scale / (2.0 * disk.weight.beta.max(1.0));
    match space.dim {
        Some(d) => Vector::finite((0..d).map(|k| gamma.powi(k as i32)).collect()),
        None => Vector::closed(ClosedForm::geometric(1.0, gamma)),
    }
}

fn probes(space: &ModelSpace, disk: &DiskSpec) -> Vec<SequenceModel> {
    let mut out: Vec<SequenceModel> = [1.0, 0.5].iter().map(|&s| SequenceModel::partial_sums(probe_vector(space, disk, s))).collect();
    let u = probe_vector(space, disk, 1.0);
    out.push(SequenceModel { prefix: Vec::new(), terms: vec![Term::Truncation { vector: u, a: 2, shift: 1 }] });
    out
}

fn probe_rate(disk: &DiskSpec, x: &SequenceModel) -> Result<NullSeq> {
    match x.terms.as_slice() {
        [Term::Truncation { vector, a, shift }] => {
            let r = partial_sum_rate(disk, vector)?;
            Ok(if *a == 1 && *shift == 0 { r } else { r.subsequence(*a, (*shift).max(0) as u64) })
        }
        _ => Err(Error::invalid("probe sequences are truncations")),
    }
}

fn check_disk(space: &ModelSpace, k: usize) -> Result<DiskCompleteness> {
    let disk = space.disk(k)?;
    let closed_under_limits = space.dim.is_some() || space.tails;
    let mut witness = None;
    let cauchy_converges = if closed_under_limits {
        Verdict::Pass
    } else {
        let sequence = SequenceModel::partial_sums(probe_vector(space, disk, 1.0));
        let eps = probe_rate(disk, &sequence)?;
        let cauchy = cauchy_check(space, &sequence, k, &eps)?;
        let limit = sequence.limit().expect("partial sums converge coordinatewise");
        if cauchy.verdict == Verdict::Pass && !space.contains(&limit) {
            witness = Some(IncompletenessWitness { sequence, eps, cauchy, limit });
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    };
    let mut probes_converge = Verdict::Pass;
    for x in probes(space, disk) {
        let eps = probe_rate(disk, &x)?;
        if cauchy_check(space, &x, k, &eps)?.verdict != Verdict::Pass {
            probes_converge = probes_converge.combine(Verdict::Inconclusive);
            continue;
        }
        let limit = x.limit().expect("probes converge coordinatewise");
        if !space.contains(&limit) {
            probes_converge = Verdict::Fail;
            continue;
        }
        let v = convergence_check(space, &x, &limit, k, &eps)?.verdict;
        probes_converge = probes_converge.combine(v);
    }
    Ok(DiskCompleteness { disk: k, cauchy_converges, probes_converge, witness })
}

/// Decides, for each disk, whether Cauchy sequences of the closed-form
/// model converge inside the model.
pub fn completeness_check(space: &ModelSpace) -> Result<CompletenessReport> {
    space.validate()?;
    let per_disk = (0..space.disks.len()).into_par_iter().map(|k| check_disk(space, k)).collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::all(per_disk.iter().map(|d| d.cauchy_converges));
    let consistent = per_disk.iter().all(|d| d.cauchy_converges == d.probes_converge);
    Ok(CompletenessReport { verdict, per_disk, consistent })
}

/// A class of Cauchy sequences of finitely supported vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionElement {
    pub repr: SequenceModel,
    pub disk: usize,
    pub eps: NullSeq,
    /// Coordinatewise limit, which determines the class.
    pub limit: Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub equal: bool,
    /// Gauge of the difference of limits when the classes differ.
    pub separation: Option<Interval>,
}

/// The completion of the finitely supported part of a model space.
#[derive(Clone, Debug)]
pub struct Completion {
    pub space: ModelSpace,
}

impl Completion {
    pub fn new(space: &ModelSpace) -> Result<Self> {
        space.validate()?;
        Ok(Self { space: ModelSpace { tails: false, ..space.clone() } })
    }

    /// Wraps a representative after certifying it is `(S, ε)`-Cauchy.
    pub fn element(&self, repr: SequenceModel, disk: usize, eps: NullSeq) -> Result<CompletionElement> {
        repr.validate()?;
        if repr.prefix.iter().any(|v| !v.is_finite() || !self.space.contains(v)) {
            return Err(Error::invalid("representatives must be finitely supported model vectors"));
        }
        let report = cauchy_check(&self.space, &repr, disk, &eps)?;
        if report.verdict != Verdict::Pass {
            return Err(Error::NotCauchy(format!("verdict {:?} at disk {disk}", report.verdict)));
        }
        let limit = repr.limit().ok_or_else(|| Error::NotCauchy("no coordinatewise limit".into()))?;
        Ok(CompletionElement { repr, disk, eps, limit })
    }

    /// Class of the constant sequence at `v`.
    pub fn embed(&self, v: &Vector, disk: usize) -> Result<CompletionElement> {
        if !v.is_finite() || !self.space.contains(v) {
            return Err(Error::invalid("embed takes finitely supported model vectors"));
        }
        self.element(SequenceModel::constant(v.clone()), disk, NullSeq::geometric(1.0, 0.5))
    }

    /// Class of the partial sums of a closed-form vector.
    pub fn embed_limit(&self, v: &Vector, disk: usize) -> Result<CompletionElement> {
        let eps = partial_sum_rate(self.space.disk(disk)?, v)?;
        self.element(SequenceModel::partial_sums(v.clone()), disk, eps)
    }

    pub fn add(&self, a: &CompletionElement, b: &CompletionElement) -> Result<CompletionElement> {
        if a.disk != b.disk {
            return Err(Error::invalid("summands certified on different disks"));
        }
        Ok(CompletionElement { repr: a.repr.add(&b.repr), disk: a.disk, eps: a.eps.add(&b.eps), limit: a.limit.add(&b.limit) })
    }

    pub fn scale(&self, a: &CompletionElement, c: f64) -> CompletionElement {
        let eps = if c == 0.0 { a.eps.clone() } else { a.eps.scale(c.abs()) };
        CompletionElement { repr: a.repr.scale(c), disk: a.disk, eps, limit: a.limit.scale(c) }
    }

    /// Exact: the difference is null iff its limit is the zero vector.
    pub fn equal(&self, a: &CompletionElement, b: &CompletionElement) -> Equality {
        let d = a.limit.sub(&b.limit);
        if d.is_zero() {
            return Equality { equal: true, separation: None };
        }
        let g = self.space.disks[a.disk].gauge(&d, self.space.dim);
        Equality { equal: false, separation: Some(g) }
    }

    /// Infimum over representatives, attained by the limit.
    pub fn gauge_in_quotient(&self, a: &CompletionElement, disk: usize) -> Result<Interval> {
        self.space.gauge(disk, &a.limit)
    }
}

/// Bounded coordinate maps on a model space.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordMap {
    /// `e_k ↦ e_{k+1}`.
    Shift,
    /// `x_k ↦ d(k)·x_k`.
    Diagonal(ClosedForm),
    /// The functional `x ↦ Σ_k x_k`.
    Sum,
}

impl CoordMap {
    fn map_vector(&self, v: &Vector) -> Vector {
        match self {
            CoordMap::Shift => {
                let mut head = vec![0.0];
                head.extend(&v.head);
                Vector { head, tail: v.tail.iter().map(|f| f.shift(-1)).collect() }
            }
            CoordMap::Diagonal(d) => Vector {
                head: v.head.iter().enumerate().map(|(k, x)| d.eval(k as u64) * x).collect(),
                tail: v.tail.iter().map(|f| f.mul(d)).collect(),
            },
            CoordMap::Sum => Vector::finite(vec![v.coordinate_sum().hi]),
        }
    }

    /// Gauge-to-gauge bound on `disk`, or `None` if the map is unbounded.
    fn bound(&self, disk: &DiskSpec) -> Option<f64> {
        let w = &disk.weight;
        let b = match self {
            CoordMap::Shift => {
                let growth: f64 = w.factors.iter().filter(|f| f.p > 0.0).map(|f| ((f.a + f.b) / f.b).powf(f.p)).product();
                w.beta * growth
            }
            CoordMap::Diagonal(d) => tail_norm(std::slice::from_ref(d), 0, TailKind::Sup).hi,
            CoordMap::Sum => {
                let inv = w.recip().ok()?;
                let kind = match disk.kind {
                    GaugeKind::L1 => TailKind::Sup,
                    GaugeKind::Sup => TailKind::Sum,
                };
                tail_norm(&[inv], 0, kind).hi
            }
        };
        b.is_finite().then_some(b)
    }
}

/// The unique bounded extension of a coordinate map to the completion.
#[derive(Clone, Debug)]
pub struct ExtendedMap {
    pub map: CoordMap,
    pub disk: usize,
    pub bound: f64,
}

/// Checks the declared bound on coordinate vectors and returns the
/// extension, which acts termwise on representatives.
pub fn extend_map_to_completion(map: &CoordMap, completion: &Completion, disk: usize) -> Result<ExtendedMap> {
    let d = completion.space.disk(disk)?;
    let bound = map.bound(d).ok_or_else(|| Error::Unbounded(format!("{map:?} on disk {disk}")))?;
    let limit = completion.space.dim.unwrap_or(completion.space.horizon);
    for k in 0..limit {
        let e = Vector::unit(k);
        let image = map.map_vector(&e);
        let lhs = match map {
            CoordMap::Sum => image.head[0].abs(),
            _ => d.gauge(&image, None).hi,
        };
        if lhs > bound * d.gauge(&e, None).hi * (1.0 + 1e-12) {
            return Err(Error::InvariantViolation(format!("{map:?} exceeds its bound {bound} at e_{k}")));
        }
    }
    Ok(ExtendedMap { map: map.clone(), disk, bound })
}

impl ExtendedMap {
    /// Image class of a vector-valued map.
    pub fn apply(&self, x: &CompletionElement) -> Result<CompletionElement> {
        let shift = match self.map {
            CoordMap::Shift => 1,
            CoordMap::Diagonal(_) => 0,
            CoordMap::Sum => return Err(Error::Precondition("the summation functional is scalar valued; use value".into())),
        };
        let f = |v: &Vector| self.map.map_vector(v);
        let repr = x.repr.map_vectors(&f, shift);
        let eps = if self.bound > 0.0 { x.eps.scale(self.bound) } else { x.eps.clone() };
        Ok(CompletionElement { repr, disk: x.disk, eps, limit: f(&x.limit) })
    }

    /// Value of the summation functional on a class.
    pub fn value(&self, x: &CompletionElement) -> Result<Interval> {
        match self.map {
            CoordMap::Sum => Ok(x.limit.coordinate_sum()),
            _ => Err(Error::Precondition("value is defined for the summation functional".into())),
        }
    }
}
