//! Certified intervals for the joint spectral radius of finite sets.
//!
//! The search walks product words level by level. Level `ℓ` contributes
//! `max ρ(P_w)^{1/ℓ}` to the lower bound and `max ‖P_w‖^{1/ℓ}` to the
//! upper bound. A word is dropped once no extension of it can beat the
//! current lower bound, using submultiplicativity against the level maxima
//! already known; the dropped subtree still contributes a norm cap to later
//! levels so the upper bound stays valid.

use std::f64::consts::LN_2;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::algebra::{AlgebraElement, BoundedSet, Interpretation, C64};
use crate::error::{Error, Result};

/// Norms beyond this are treated as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Relative margin protecting prune decisions from rounding.
const PRUNE_MARGIN: f64 = 1e-9;
/// Relative slack used when intersecting intervals.
pub const INTERVAL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Certified,
    DepthLimited,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::DepthLimited => "depth-limited",
        }
    }
}

/// A closed interval of nonnegative extended reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { lo: self.lo * c, hi: self.hi * c }
    }

    pub fn powi(&self, n: i32) -> Self {
        Self { lo: self.lo.powi(n), hi: self.hi.powi(n) }
    }

    /// Intersection test with a relative slack on both ends.
    pub fn intersects(&self, other: &Interval, rel: f64) -> bool {
        let grow = |v: f64| v * (1.0 + rel) + rel * f64::MIN_POSITIVE.sqrt();
        self.lo <= grow(other.hi) && other.lo <= grow(self.hi)
    }

    pub fn contains(&self, v: f64, rel: f64) -> bool {
        self.intersects(&Interval::point(v), rel)
    }
}

/// Certified interval for a spectral radius.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Generator indices of the product achieving `lower`.
    pub witness_word: Vec<usize>,
    /// Longest product length explored.
    pub depth: usize,
    /// Level at which `upper` was attained.
    pub upper_level: Option<usize>,
    pub status: Status,
}

impl RadiusEstimate {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Search parameters.
#[derive(Clone, Debug)]
pub struct JsrOptions {
    pub depth: usize,
    pub gap_target: f64,
    /// Additive slack in the prune test. Zero keeps the interval identical
    /// to exhaustive enumeration; `gap_target / 2` is the aggressive setting.
    pub prune_slack: f64,
    /// Answer singletons `{a}` directly with `ρ(a)`.
    pub singleton_shortcut: bool,
}

impl JsrOptions {
    pub fn new(depth: usize, gap_target: f64) -> Self {
        Self { depth, gap_target, prune_slack: 0.0, singleton_shortcut: true }
    }

    pub fn aggressive(mut self) -> Self {
        self.prune_slack = self.gap_target / 2.0;
        self
    }

    pub fn without_singleton_shortcut(mut self) -> Self {
        self.singleton_shortcut = false;
        self
    }
}

impl Default for JsrOptions {
    fn default() -> Self {
        Self::new(10, 1e-3)
    }
}

/// `value^{1/len}` for a number stored as `value · 2^exp2`.
pub fn scaled_root(value: f64, exp2: i32, len: usize) -> f64 {
    if value == 0.0 {
        0.0
    } else if exp2 == 0 {
        value.powf(1.0 / len as f64)
    } else {
        ((value.ln() + exp2 as f64 * LN_2) / len as f64).exp()
    }
}

fn scaled_ln(value: f64, exp2: i32) -> f64 {
    value.ln() + exp2 as f64 * LN_2
}

/// Max-only cell shared by concurrent workers. Nonnegative floats order
/// like their bit patterns, so an integer max is a float max.
struct MonotoneMax(AtomicU64);

impl MonotoneMax {
    fn new(v: f64) -> Self {
        Self(AtomicU64::new(v.to_bits()))
    }

    fn raise(&self, v: f64) {
        self.0.fetch_max(v.to_bits(), Ordering::Relaxed);
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

struct Node {
    word: Vec<usize>,
    product: AlgebraElement,
    exp2: i32,
    norm: f64,
    rho: f64,
}

const RESCALE_HI: f64 = 3.273_390_607_896_142e150; // 2^500
const RESCALE_LO: f64 = 3.054_936_363_499_605e-151; // 2^-500

fn rescale(p: AlgebraElement, exp2: i32) -> (AlgebraElement, i32) {
    let m = p.max_abs();
    if m == 0.0 || (RESCALE_LO..=RESCALE_HI).contains(&m) {
        return (p, exp2);
    }
    let shift = m.log2().floor() as i32;
    (p.scale(C64::new(2f64.powi(-shift), 0.0)), exp2 + shift)
}

fn evaluate(word: Vec<usize>, product: AlgebraElement, exp2: i32) -> Result<Node> {
    let (product, exp2) = rescale(product, exp2);
    let norm = product.norm()?;
    let rho = product.spectral_radius()?;
    Ok(Node { word, product, exp2, norm, rho })
}

fn better_witness(value: f64, word: &[usize], best: f64, best_word: &[usize]) -> bool {
    value > best || (value == best && (word.len(), word) < (best_word.len(), best_word))
}

/// `jsr_estimate` with default pruning.
pub fn jsr_estimate(s: &BoundedSet, depth: usize, gap_target: f64) -> Result<RadiusEstimate> {
    jsr_estimate_with(s, &JsrOptions::new(depth, gap_target))
}

pub fn jsr_estimate_with(s: &BoundedSet, opts: &JsrOptions) -> Result<RadiusEstimate> {
    if opts.depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    if !(opts.gap_target.is_finite() && opts.gap_target > 0.0) {
        return Err(Error::invalid("gap target must be positive"));
    }
    let (gens, index_map) = match s.interpretation() {
        Interpretation::Finite => (s.generators().to_vec(), (0..s.len()).collect::<Vec<_>>()),
        Interpretation::Hull => {
            let idx = s.extreme_generators()?;
            (idx.iter().map(|&i| s.generators()[i].clone()).collect(), idx)
        }
    };
    let mut est = if gens.len() == 1 && opts.singleton_shortcut {
        let rho = gens[0].spectral_radius()?;
        RadiusEstimate {
            lower: rho,
            upper: rho,
            witness_word: vec![0],
            depth: 1,
            upper_level: None,
            status: Status::Certified,
        }
    } else {
        search(&gens, opts)?
    };
    est.witness_word = est.witness_word.iter().map(|&i| index_map[i]).collect();
    Ok(est)
}

fn search(gens: &[AlgebraElement], opts: &JsrOptions) -> Result<RadiusEstimate> {
    let depth = opts.depth;
    let best = MonotoneMax::new(0.0);
    let mut witness: Vec<usize> = vec![0];
    let mut witness_value = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut upper_level = None;
    // ln of a sound bound on max ‖P_u‖ over words of each length (index = length).
    let mut level_ln: Vec<f64> = vec![f64::NEG_INFINITY; depth + 1];
    // ln of norm caps inherited from pruned subtrees.
    let mut cap_ln: Vec<f64> = vec![f64::NEG_INFINITY; depth + 1];
    let mut frontier: Vec<Node> = Vec::new();
    let mut reached = 0;

    for level in 1..=depth {
        reached = level;
        let children: Vec<Node> = if level == 1 {
            gens.par_iter()
                .enumerate()
                .map(|(i, g)| evaluate(vec![i], g.clone(), 0))
                .collect::<Result<_>>()?
        } else {
            frontier
                .par_iter()
                .flat_map_iter(|p| {
                    gens.iter().enumerate().map(move |(i, g)| {
                        let mut w = p.word.clone();
                        w.push(i);
                        p.product.multiply(g).and_then(|prod| evaluate(w, prod, p.exp2))
                    })
                })
                .collect::<Result<_>>()?
        };

        children.par_iter().for_each(|n| best.raise(scaled_root(n.rho, n.exp2, level)));
        for n in &children {
            let v = scaled_root(n.rho, n.exp2, level);
            if better_witness(v, &n.word, witness_value, &witness) {
                witness_value = v;
                witness = n.word.clone();
            }
        }
        let lower = best.get();

        let explored_ln = children.iter().map(|n| scaled_ln(n.norm, n.exp2)).fold(f64::NEG_INFINITY, f64::max);
        if explored_ln > OVERFLOW_LIMIT.ln() {
            return Ok(RadiusEstimate {
                lower,
                upper: f64::INFINITY,
                witness_word: witness,
                depth: level,
                upper_level: None,
                status: Status::DepthLimited,
            });
        }
        let explored_root = children.iter().map(|n| scaled_root(n.norm, n.exp2, level)).fold(0.0, f64::max);
        let cap_root = if cap_ln[level] == f64::NEG_INFINITY { 0.0 } else { (cap_ln[level] / level as f64).exp() };
        let level_upper = explored_root.max(cap_root);
        level_ln[level] = explored_ln.max(cap_ln[level]);
        if level_upper < upper {
            upper = level_upper;
            upper_level = Some(level);
        }
        if upper - lower <= opts.gap_target || level == depth {
            let status = if upper - lower <= opts.gap_target { Status::Certified } else { Status::DepthLimited };
            return Ok(RadiusEstimate {
                lower,
                upper,
                witness_word: witness,
                depth: level,
                upper_level,
                status,
            });
        }

        // Bounds for every remaining length from the completed levels.
        let horizon = depth - level;
        let mut bound_ln = vec![f64::INFINITY; horizon + 1];
        for m in 1..=horizon {
            let mut b = if m <= level { level_ln[m] } else { f64::INFINITY };
            for a in 1..m {
                b = b.min(bound_ln[a] + bound_ln[m - a]);
            }
            bound_ln[m] = b;
        }
        let threshold = lower * (1.0 - PRUNE_MARGIN) + opts.prune_slack;
        let threshold_ln = if threshold > 0.0 { threshold.ln() } else { f64::NEG_INFINITY };

        let mut survivors = Vec::with_capacity(children.len());
        for n in children {
            if n.norm == 0.0 {
                continue;
            }
            let w_ln = scaled_ln(n.norm, n.exp2);
            let prunable = threshold_ln > f64::NEG_INFINITY
                && (1..=horizon).all(|m| (w_ln + bound_ln[m]) / ((level + m) as f64) < threshold_ln);
            if prunable {
                for m in 1..=horizon {
                    let c = &mut cap_ln[level + m];
                    *c = c.max(w_ln + bound_ln[m]);
                }
            } else {
                survivors.push(n);
            }
        }
        frontier = survivors;
    }
    unreachable!("loop returns at the final level (depth {reached})")
}

/// Intervals for `ρ(S)`, `ρ(cS)`, `ρ(Sⁿ)` and the hull reading of `S`.
#[derive(Clone, Debug)]
pub struct SpecradReport {
    pub rho_s: RadiusEstimate,
    pub rho_cs: RadiusEstimate,
    pub rho_sn: RadiusEstimate,
    pub rho_hull: RadiusEstimate,
    pub c_abs: f64,
    pub n: usize,
}

pub fn check_specrad_identities(s: &BoundedSet, c: C64, n: usize, opts: &JsrOptions) -> Result<SpecradReport> {
    if !(n == 2 || n == 3) {
        return Err(Error::invalid("power n must be 2 or 3"));
    }
    let base = s.as_finite();
    let rho_s = jsr_estimate_with(&base, opts)?;
    let rho_cs = jsr_estimate_with(&base.scaled(c), opts)?;
    let mut opts_n = opts.clone();
    opts_n.depth = (opts.depth / n).max(1);
    let rho_sn = jsr_estimate_with(&base.power(n)?, &opts_n)?;
    let rho_hull = jsr_estimate_with(&base.as_hull(), opts)?;
    let c_abs = c.norm();
    let iv = rho_s.interval();
    if !iv.scale(c_abs).intersects(&rho_cs.interval(), INTERVAL_SLACK) {
        return Err(Error::InvariantViolation(format!(
            "|c|·ρ(S) = {:?} misses ρ(cS) = {:?}",
            iv.scale(c_abs),
            rho_cs.interval()
        )));
    }
    if !iv.powi(n as i32).intersects(&rho_sn.interval(), INTERVAL_SLACK) {
        return Err(Error::InvariantViolation(format!(
            "ρ(S)^{n} = {:?} misses ρ(S^{n}) = {:?}",
            iv.powi(n as i32),
            rho_sn.interval()
        )));
    }
    if !iv.intersects(&rho_hull.interval(), INTERVAL_SLACK) {
        return Err(Error::InvariantViolation(format!(
            "finite reading {:?} misses hull reading {:?}",
            iv,
            rho_hull.interval()
        )));
    }
    Ok(SpecradReport { rho_s, rho_cs, rho_sn, rho_hull, c_abs, n })
}

/// Witness that `r⁻¹S` generates a bounded multiplicative hull.
#[derive(Clone, Debug)]
pub struct HullCertificate {
    pub hull: crate::algebra::Disk,
    pub scale: f64,
    pub closure_defect: f64,
    /// Largest product norm (of `r⁻¹S`) seen at each length.
    pub decay_profile: Vec<f64>,
}

impl HullCertificate {
    pub fn generators(&self) -> &[AlgebraElement] {
        match &self.hull {
            crate::algebra::Disk::FiniteHull(h) => h.generators(),
            _ => unreachable!("hull certificates always carry a finite hull"),
        }
    }
}

/// Products below this norm are treated as decayed.
pub const DECAY_FLOOR: f64 = 1e-12;

pub fn submultiplicative_hull(s: &BoundedSet, r: f64, max_products: usize) -> Result<HullCertificate> {
    use crate::algebra::{Disk, HullGauge};
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("hull scale r must be positive"));
    }
    let scaled: Vec<AlgebraElement> = s.generators().iter().map(|g| g.scale_real(1.0 / r)).collect();
    let mut kept: Vec<AlgebraElement> = scaled.clone();
    let mut profile = vec![scaled.iter().map(|g| g.norm()).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max)];
    let mut frontier = Vec::new();
    for g in &scaled {
        if g.norm()? >= DECAY_FLOOR {
            frontier.push(g.clone());
        }
    }
    while !frontier.is_empty() {
        if kept.len() > max_products {
            return Err(Error::CapExceeded { cap: max_products, decay_profile: profile });
        }
        let gauge = HullGauge::new(kept.clone())?;
        let products: Vec<AlgebraElement> = frontier
            .iter()
            .flat_map(|p| scaled.iter().map(move |g| p.multiply(g)))
            .collect::<Result<_>>()?;
        let evaluated: Vec<(f64, f64)> = products
            .par_iter()
            .map(|p| {
                let nrm = p.norm()?;
                let g = if nrm < DECAY_FLOOR { 0.0 } else { gauge.gauge(p)? };
                Ok((nrm, g))
            })
            .collect::<Result<_>>()?;
        profile.push(evaluated.iter().map(|e| e.0).fold(0.0, f64::max));
        let mut next = Vec::new();
        for (p, (nrm, g)) in products.into_iter().zip(evaluated) {
            if nrm >= DECAY_FLOOR && g > 1.0 {
                next.push(p);
            }
        }
        kept.extend(next.iter().cloned());
        frontier = next;
    }
    let gauge = HullGauge::new(kept.clone())?;
    let pairs: Vec<(usize, usize)> = (0..kept.len()).flat_map(|i| (0..kept.len()).map(move |j| (i, j))).collect();
    let closure_defect = pairs
        .par_iter()
        .map(|&(i, j)| Ok((gauge.gauge(&kept[i].multiply(&kept[j])?)? - 1.0).max(0.0)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(HullCertificate { hull: Disk::FiniteHull(std::sync::Arc::new(gauge)), scale: r, closure_defect, decay_profile: profile })
}

/// Global estimate of a grid-function set together with its fiber profile.
#[derive(Clone, Debug)]
pub struct GridMaxReport {
    pub global: RadiusEstimate,
    pub profile: Vec<RadiusEstimate>,
    pub profile_envelope: Interval,
}

pub fn jsr_grid_max(s: &BoundedSet, opts: &JsrOptions) -> Result<GridMaxReport> {
    let points = match &**s.descriptor() {
        crate::algebra::AlgebraDescriptor::Grid { grid, .. } => grid.len(),
        other => return Err(Error::invalid(format!("{other} is not a grid function algebra"))),
    };
    let global = jsr_estimate_with(s, opts)?;
    let profile = (0..points)
        .into_par_iter()
        .map(|x| {
            let fibers = s.generators().iter().map(|g| g.fiber(x)).collect::<Result<Vec<_>>>()?;
            jsr_estimate_with(&BoundedSet::with_interpretation(fibers, s.interpretation())?, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let envelope = Interval::new(
        profile.iter().map(|e| e.lower).fold(0.0, f64::max),
        profile.iter().map(|e| e.upper).fold(0.0, f64::max),
    );
    if !global.interval().intersects(&envelope, INTERVAL_SLACK) {
        return Err(Error::InvariantViolation(format!(
            "global interval {:?} misses the fiber envelope {:?}",
            global.interval(),
            envelope
        )));
    }
    Ok(GridMaxReport { global, profile, profile_envelope: envelope })
}

#[derive(Clone, Debug)]
pub struct KroneckerReport {
    pub left: RadiusEstimate,
    pub right: RadiusEstimate,
    pub product: RadiusEstimate,
    /// `upper(S_A)·upper(S_B)`.
    pub bound: f64,
}

pub fn kronecker_bound_check(a: &BoundedSet, b: &BoundedSet, opts: &JsrOptions) -> Result<KroneckerReport> {
    let mut gens = Vec::with_capacity(a.len() * b.len());
    for x in a.generators() {
        for y in b.generators() {
            gens.push(x.kronecker(y)?);
        }
    }
    let left = jsr_estimate_with(a, opts)?;
    let right = jsr_estimate_with(b, opts)?;
    let product = jsr_estimate_with(&BoundedSet::new(gens)?, opts)?;
    let bound = left.upper * right.upper;
    if product.lower > bound * (1.0 + INTERVAL_SLACK) + 1e-300 {
        return Err(Error::InvariantViolation(format!(
            "ρ(S_A⊗S_B) ≥ {} exceeds ρ(S_A)·ρ(S_B) ≤ {bound}",
            product.lower
        )));
    }
    Ok(KroneckerReport { left, right, product, bound })
}

#[derive(Clone, Debug)]
pub struct DirectUnionReport {
    pub dims: Vec<usize>,
    pub stages: Vec<RadiusEstimate>,
    /// Intersection of all stage intervals.
    pub combined: Interval,
    pub consistent: bool,
}

/// Spectral radius of a matrix set along a chain of corner embeddings.
pub fn direct_union_liminf(chain: &[usize], s: &BoundedSet, opts: &JsrOptions) -> Result<DirectUnionReport> {
    if chain.is_empty() {
        return Err(Error::invalid("chain must have at least one stage"));
    }
    if chain.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("chain dimensions must be nondecreasing"));
    }
    let stages = chain
        .iter()
        .map(|&n| {
            let padded = s.generators().iter().map(|g| g.pad_to(n)).collect::<Result<Vec<_>>>()?;
            jsr_estimate_with(&BoundedSet::with_interpretation(padded, s.interpretation())?, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let combined = Interval::new(
        stages.iter().map(|e| e.lower).fold(0.0, f64::max),
        stages.iter().map(|e| e.upper).fold(f64::INFINITY, f64::min),
    );
    let consistent = stages
        .iter()
        .all(|a| stages.iter().all(|b| a.interval().intersects(&b.interval(), INTERVAL_SLACK)));
    Ok(DirectUnionReport { dims: chain.to_vec(), stages, combined, consistent })
}
