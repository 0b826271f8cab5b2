//! Deciders for `(S, ε)`-Cauchy and `(S, ε)`-convergent sequences.
//!
//! Every index below a cut-off `K` is checked against an explicit upper
//! bound. Beyond `K` the bound is a finite sum of closed forms whose ratio
//! to `ε` is nonincreasing, so checking `m = K` covers the rest. Negative
//! answers come with an explicit violating pair.

use rayon::prelude::*;

use super::closed::{tail_norm, ClosedForm, NullSeq, TailKind};
use super::sequence::{SequenceModel, Term};
use super::space::{DiskSpec, ModelSpace, Vector};
use crate::error::Result;
use crate::jsr::Interval;
use crate::Verdict;

/// Largest cut-off tried for the closed-form argument.
pub const MAX_CUTOFF: u64 = 1 << 16;
/// Indices probed for a violating pair.
const MAX_CANDIDATES: usize = 32;
const PAIR_WINDOW: u64 = 64;
const PAIR_DOUBLINGS: u32 = 16;
/// Relative slack for ties `bound = ε`, which rounding would otherwise break.
pub const TIE_SLACK: f64 = 1e-12;

/// A violating index: `gauge(x_n − x_m) > ε_m` for Cauchy checks, or
/// `gauge(x_m − x_∞) > ε_m` for convergence checks (`n = None`). A Cauchy
/// witness with `n = None` comes from the limit: by lower semicontinuity
/// some finite `n` violates as well.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub m: u64,
    pub n: Option<u64>,
    pub gauge: Interval,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub disk: usize,
    pub witness: Option<Witness>,
    /// Cut-off beyond which the closed-form argument took over.
    pub certified_from: Option<u64>,
    /// Indices checked explicitly.
    pub checked: u64,
    /// Largest `bound/ε` among explicitly checked indices.
    pub worst_ratio: f64,
    /// First index whose upper bound exceeded `ε`, if any.
    pub first_excess: Option<u64>,
}

/// Gauge of the coordinates `k ≥ from` of `u`.
pub fn tail_gauge(disk: &DiskSpec, u: &Vector, from: i64) -> Interval {
    let from = from.max(0) as usize;
    let h = u.head.len();
    let mut acc = 0.0_f64;
    for k in from.min(h)..h {
        let t = disk.weight.eval(k as u64) * u.head[k].abs();
        acc = match disk.kind {
            super::space::GaugeKind::Sup => acc.max(t),
            super::space::GaugeKind::L1 => acc + t,
        };
    }
    let forms: Vec<ClosedForm> = u.tail_forms().iter().map(|t| t.mul(&disk.weight)).collect();
    let tail = tail_norm(&forms, from.max(h) as u64, disk.kind.tail());
    match disk.kind {
        super::space::GaugeKind::Sup => Interval::new(acc.max(tail.lo), acc.max(tail.hi)),
        super::space::GaugeKind::L1 => Interval::new(acc + tail.lo, acc + tail.hi),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Cauchy,
    Convergence,
}

struct Problem<'a> {
    space: &'a ModelSpace,
    disk_index: usize,
    disk: &'a DiskSpec,
    x: &'a SequenceModel,
    eps: &'a NullSeq,
    mode: Mode,
    /// `x_∞ − limit` for convergence checks.
    offset: Option<Vector>,
    limit: Option<Vector>,
}

impl Problem<'_> {
    fn gauge(&self, v: &Vector) -> Interval {
        self.disk.gauge(v, self.space.dim)
    }

    fn start(&self) -> u64 {
        self.x.start()
    }

    /// Upper bound on `sup_{n ≥ m} |f(n) − f(m)|` (Cauchy) or `|f(m)|`.
    fn phi(&self, f: &ClosedForm, m: u64) -> f64 {
        let here = f.eval(m).abs();
        if self.mode == Mode::Convergence {
            return here;
        }
        if f.is_constant() {
            return 0.0;
        }
        let later = tail_norm(std::slice::from_ref(f), m + 1, TailKind::Sup).hi;
        // Terms of one sign: the difference is at most the larger of the two.
        if f.beta > 0.0 {
            here.max(later)
        } else {
            here + later
        }
    }

    /// Upper bound at an index in the closed-form region.
    fn tail_bound(&self, m: u64) -> f64 {
        let mut total = match (&self.mode, &self.offset) {
            (Mode::Convergence, Some(d)) => {
                let finite = self.x.terms.iter().fold(d.clone(), |acc, t| match t {
                    Term::Geometric { form, vector } if !form.is_constant() => acc.add(&vector.scale(form.eval(m))),
                    _ => acc,
                });
                self.gauge(&finite).hi
            }
            _ => 0.0,
        };
        for t in &self.x.terms {
            total += match t {
                Term::Geometric { form, vector } => {
                    if self.mode == Mode::Convergence {
                        continue;
                    }
                    let gv = self.gauge(vector).hi;
                    if gv == 0.0 {
                        0.0
                    } else {
                        gv * self.phi(form, m)
                    }
                }
                Term::Truncation { vector, a, shift } => tail_gauge(self.disk, vector, (a * m) as i64 + shift + 1).hi,
            };
        }
        total
    }

    /// Explicit upper bound at index `m`.
    fn bound(&self, m: u64) -> f64 {
        let n0 = self.start();
        match self.mode {
            Mode::Convergence => {
                if m < n0 || self.offset.is_none() {
                    let lim = self.limit.as_ref().expect("limit present in convergence mode");
                    self.gauge(&self.x.eval(m).sub(lim)).hi
                } else {
                    self.tail_bound(m)
                }
            }
            Mode::Cauchy => {
                if m >= n0 {
                    return self.tail_bound(m);
                }
                let xm = self.x.eval(m);
                let mut worst = (m + 1..n0).map(|n| self.gauge(&self.x.eval(n).sub(&xm)).hi).fold(0.0, f64::max);
                worst = worst.max(self.tail_bound(n0) + self.gauge(&self.x.eval(n0).sub(&xm)).hi);
                worst
            }
        }
    }

    /// Closed forms whose sum bounds the explicit bound for all `m ≥ k`,
    /// each with a ratio no larger than `ε`'s.
    fn envelope(&self, k: u64) -> Option<Vec<ClosedForm>> {
        if k < self.start() {
            return None;
        }
        let eps_ratio = self.eps.ratio_lower(k);
        let mut out = Vec::new();
        if self.mode == Mode::Convergence {
            let d = self.offset.as_ref()?;
            if !d.is_zero() {
                return None;
            }
        }
        for t in &self.x.terms {
            match t {
                Term::Geometric { form, vector } => {
                    let gv = self.gauge(vector).hi;
                    if gv == 0.0 || form.is_constant() {
                        continue;
                    }
                    if !form.is_null() || form.ratio_upper(k) > 1.0 {
                        return None;
                    }
                    let mult = if self.mode == Mode::Cauchy && form.beta < 0.0 { 2.0 } else { 1.0 };
                    out.push(form.abs().scale(gv * mult));
                }
                Term::Truncation { vector, a, shift } => {
                    let first = (a * k) as i64 + shift + 1;
                    if first < vector.head.len() as i64 {
                        return None;
                    }
                    for f in vector.tail_forms() {
                        let w = f.mul(&self.disk.weight);
                        out.push(w.tail_envelope(*a, shift + 1, k, self.disk.kind.tail())?);
                    }
                }
            }
        }
        // With a single ε form, bound f/ε's ratio directly.
        let eps_recip = match self.eps.0.as_slice() {
            [e] => e.recip().ok(),
            _ => None,
        };
        let nonincreasing = |f: &ClosedForm| match &eps_recip {
            Some(r) => f.mul(r).ratio_upper(k) <= 1.0,
            None => f.ratio_upper(k) <= eps_ratio,
        };
        if out.iter().all(nonincreasing) {
            Some(out)
        } else {
            None
        }
    }

    /// A violating pair at `m`, if one is found. The first pass only tries
    /// `n = m + 1`.
    fn find_witness(&self, m: u64, first_pass: bool) -> Option<Witness> {
        let eps = self.eps.eval(m);
        match self.mode {
            Mode::Convergence => {
                let lim = self.limit.as_ref()?;
                let g = self.gauge(&self.x.eval(m).sub(lim));
                (g.lo > eps * (1.0 + TIE_SLACK)).then_some(Witness { m, n: None, gauge: g, eps })
            }
            Mode::Cauchy => {
                let xm = self.x.eval(m);
                let ns = (m + 1 + u64::from(!first_pass)..=m + PAIR_WINDOW).chain((7..=PAIR_DOUBLINGS).map(|j| m + (1u64 << j)));
                let ns: Vec<u64> = if first_pass { vec![m + 1] } else { ns.collect() };
                for n in ns {
                    let g = self.gauge(&self.x.eval(n).sub(&xm));
                    if g.lo > eps * (1.0 + TIE_SLACK) {
                        return Some(Witness { m, n: Some(n), gauge: g, eps });
                    }
                }
                if first_pass {
                    return None;
                }
                let lim = self.limit.as_ref()?;
                let g = self.gauge(&lim.sub(&xm));
                (g.lo > eps * (1.0 + TIE_SLACK)).then_some(Witness { m, n: None, gauge: g, eps })
            }
        }
    }

    fn run(&self) -> DecisionReport {
        let mut report = DecisionReport {
            verdict: Verdict::Inconclusive,
            disk: self.disk_index,
            witness: None,
            certified_from: None,
            checked: 0,
            worst_ratio: 0.0,
            first_excess: None,
        };
        let mut excess: Vec<u64> = Vec::new();
        let mut k = (self.space.horizon as u64).max(self.start()).max(2);
        let mut done = 0u64;
        loop {
            let ratios: Vec<f64> = (done..k).into_par_iter().map(|m| self.bound(m) / self.eps.eval(m)).collect();
            for (i, r) in ratios.iter().enumerate() {
                let m = done + i as u64;
                report.worst_ratio = report.worst_ratio.max(*r);
                if !(*r <= 1.0 + TIE_SLACK) && excess.len() < MAX_CANDIDATES {
                    excess.push(m);
                }
            }
            report.checked = k;
            done = k;
            if !excess.is_empty() {
                break;
            }
            if let Some(env) = self.envelope(k) {
                let at_k: f64 = env.iter().map(|f| f.eval(k)).sum();
                if at_k <= self.eps.eval(k) * (1.0 + TIE_SLACK) {
                    report.verdict = Verdict::Pass;
                    report.certified_from = Some(k);
                    return report;
                }
            }
            if k >= MAX_CUTOFF {
                break;
            }
            k *= 2;
        }
        report.first_excess = excess.first().copied();
        let mut candidates = excess;
        candidates.extend((0..4).map(|j| MAX_CUTOFF << j));
        // Consecutive pairs first, then wider gaps and the limit.
        for first_pass in [true, false] {
            for &m in &candidates {
                if let Some(w) = self.find_witness(m, first_pass) {
                    report.verdict = Verdict::Fail;
                    report.witness = Some(w);
                    return report;
                }
            }
        }
        report
    }
}

/// Decides `gauge_S(x_n − x_m) ≤ ε_m` for all `n ≥ m`.
pub fn cauchy_check(space: &ModelSpace, x: &SequenceModel, disk: usize, eps: &NullSeq) -> Result<DecisionReport> {
    x.validate()?;
    eps.validate()?;
    let p = Problem { space, disk_index: disk, disk: space.disk(disk)?, x, eps, mode: Mode::Cauchy, offset: None, limit: x.limit() };
    Ok(p.run())
}

/// Decides `gauge_S(x_n − limit) ≤ ε_n` for all `n`.
pub fn convergence_check(space: &ModelSpace, x: &SequenceModel, limit: &Vector, disk: usize, eps: &NullSeq) -> Result<DecisionReport> {
    x.validate()?;
    eps.validate()?;
    limit.validate()?;
    let offset = x.limit().map(|l| l.sub(limit));
    let p = Problem {
        space,
        disk_index: disk,
        disk: space.disk(disk)?,
        x,
        eps,
        mode: Mode::Convergence,
        offset,
        limit: Some(limit.clone()),
    };
    Ok(p.run())
}
