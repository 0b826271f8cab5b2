//! Instances, payloads and dispatch to the computational modules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::codec::{ElementJson, MapJson, SetJson};
use crate::algebra::BoundedSet;
use crate::approx_mult::{apple_certificate, evaluation_embedding, fejer_rate_bound, fejer_sigma, fejer_test_family, AppleConfig, SigmaFamily, FEJER_GRID, FEJER_LIPSCHITZ};
use crate::error::{Error, Result};
use crate::finrank::{local_approx_property_check, sampling_soundness, uniform_convergence_on_set, CompactSetModel, OperatorFamily, OperatorModel, TargetGauge};
use crate::isoradial::{certify_fixture, fixture_by_name, Fixture, SamplerConfig, DEFAULT_SEED};
use crate::jsr::{jsr_estimate_with, submultiplicative_hull, Interval, JsrOptions};
use crate::maps::{standard_basis, Homomorphism};
use crate::seqspace::{cauchy_check, completeness_check, convergence_check, Completion, ModelSpace, NullSeq, SequenceModel, Vector};
use crate::Verdict;

pub const SCHEMA: &str = "borno/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Jsr,
    Hull,
    Isoradial,
    Apple,
    Cauchy,
    Complete,
    Approx,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Jsr => "jsr",
            Command::Hull => "hull",
            Command::Isoradial => "isoradial",
            Command::Apple => "apple",
            Command::Cauchy => "cauchy",
            Command::Complete => "complete",
            Command::Approx => "approx",
        }
    }
}

/// Overrides shared by every command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Samples per set size (isoradial, apple) or sampled points (approx).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Initial homotopy grid (apple).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgrid: Option<usize>,
}

impl Config {
    /// Fields of `other` that are set win.
    pub fn merged(&self, other: &Config) -> Config {
        Config {
            depth: other.depth.or(self.depth),
            gap: other.gap.or(self.gap),
            tol: other.tol.or(self.tol),
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
            tgrid: other.tgrid.or(self.tgrid),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub schema: String,
    pub command: Command,
    pub payload: Value,
    #[serde(default)]
    pub config: Config,
}

impl Instance {
    pub fn new(command: Command, payload: Value, config: Config) -> Self {
        Self { schema: SCHEMA.into(), command, payload, config }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::invalid(format!("schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        if let Some(d) = self.config.depth {
            if d == 0 {
                return Err(Error::invalid("depth must be positive"));
            }
        }
        for (name, v) in [("gap", self.config.gap), ("tol", self.config.tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(format!("{name} must be positive")));
                }
            }
        }
        Ok(())
    }
}

/// What a command produced: a verdict, a result object and optional rows
/// for tabular output.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub result: Value,
    pub rows: Vec<BTreeMap<String, Value>>,
}

/// Finite numbers as JSON numbers, the rest as `"inf"`, `"-inf"`, `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn interval(i: Interval) -> Value {
    json!({ "lo": num(i.lo), "hi": num(i.hi) })
}

pub fn verdict_str(v: Verdict) -> &'static str {
    v.as_str()
}

fn payload<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::invalid(format!("payload: {e}")))
}

fn row(pairs: Vec<(&str, Value)>) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn execute(inst: &Instance) -> Result<Outcome> {
    inst.validate()?;
    let cfg = &inst.config;
    match inst.command {
        Command::Jsr => run_jsr(&payload(&inst.payload)?, cfg),
        Command::Hull => run_hull(&payload(&inst.payload)?),
        Command::Isoradial => run_isoradial(&payload(&inst.payload)?, cfg),
        Command::Apple => run_apple(&payload(&inst.payload)?, cfg),
        Command::Cauchy => run_cauchy(&payload(&inst.payload)?),
        Command::Complete => run_complete(&payload(&inst.payload)?),
        Command::Approx => run_approx(&payload(&inst.payload)?, cfg),
    }
}

fn jsr_options(cfg: &Config, depth: usize) -> JsrOptions {
    JsrOptions::new(cfg.depth.unwrap_or(depth), cfg.gap.unwrap_or(1e-3))
}

fn run_jsr(p: &SetJson, cfg: &Config) -> Result<Outcome> {
    let set = p.decode()?;
    let opts = jsr_options(cfg, 10);
    let e = jsr_estimate_with(&set, &opts)?;
    let verdict = if e.gap() <= opts.gap_target { Verdict::Pass } else { Verdict::Inconclusive };
    let result = json!({
        "lower": num(e.lower),
        "upper": num(e.upper),
        "witness_word": e.witness_word,
        "depth": e.depth,
        "upper_level": e.upper_level,
        "status": e.status.as_str(),
        "gap_target": num(opts.gap_target),
    });
    Ok(Outcome { verdict, result, rows: Vec::new() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullPayload {
    pub set: SetJson,
    pub r: f64,
    #[serde(default = "default_max_products")]
    pub max_products: usize,
}

fn default_max_products() -> usize {
    4096
}

fn run_hull(p: &HullPayload) -> Result<Outcome> {
    let set = p.set.decode()?;
    let h = submultiplicative_hull(&set, p.r, p.max_products)?;
    let rows = h.decay_profile.iter().enumerate().map(|(l, m)| row(vec![("length", json!(l + 1)), ("max_norm", num(*m))])).collect();
    let result = json!({
        "scale": num(h.scale),
        "generators": h.generators().len(),
        "closure_defect": num(h.closure_defect),
        "decay_profile": h.decay_profile.iter().map(|x| num(*x)).collect::<Vec<_>>(),
        "hull": h.generators().iter().map(ElementJson::encode).collect::<Vec<_>>(),
    });
    Ok(Outcome { verdict: Verdict::Pass, result, rows })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoradialPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapJson>,
    /// Source elements combined by the sampler; the standard basis if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<Vec<ElementJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

fn sampler(cfg: &Config, sizes: Option<&Vec<usize>>) -> SamplerConfig {
    let d = SamplerConfig::default();
    SamplerConfig {
        sizes: sizes.cloned().unwrap_or(d.sizes),
        per_size: cfg.samples.unwrap_or(d.per_size),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        delta: d.delta,
    }
}

fn load_fixture(p: &IsoradialPayload) -> Result<Fixture> {
    match (&p.fixture, &p.map) {
        (Some(name), None) => fixture_by_name(name),
        (None, Some(m)) => {
            let map = Homomorphism::new(m.decode()?)?;
            let src = map.map().source().clone();
            let templates = match &p.templates {
                Some(t) => t.iter().map(|e| e.decode(&src)).collect::<Result<Vec<_>>>()?,
                None => standard_basis(&src),
            };
            Ok(Fixture { name: "input".into(), map, templates, extra_sets: Vec::new() })
        }
        _ => Err(Error::invalid("isoradial payload needs exactly one of fixture and map")),
    }
}

fn run_isoradial(p: &IsoradialPayload, cfg: &Config) -> Result<Outcome> {
    let fx = load_fixture(p)?;
    let rep = certify_fixture(&fx, &sampler(cfg, p.sizes.as_ref()), &jsr_options(cfg, 6), cfg.tol.unwrap_or(1e-2))?;
    let rows = rep
        .samples
        .iter()
        .map(|s| {
            row(vec![
                ("size", json!(s.size)),
                ("scale", num(s.scale)),
                ("source_lower", num(s.source.lower)),
                ("source_upper", num(s.source.upper)),
                ("target_lower", num(s.target.lower)),
                ("target_upper", num(s.target.upper)),
                ("ratio", num(s.ratio)),
                ("certified_ratio", num(s.certified_ratio)),
                ("verdict", json!(verdict_str(s.verdict))),
            ])
        })
        .collect();
    let result = json!({
        "fixture": fx.name,
        "samples": rep.samples.len(),
        "worst_ratio": num(rep.worst_ratio),
        "worst_certified_ratio": num(rep.worst_certified_ratio),
        "mult_defect": num(rep.mult_defect),
    });
    Ok(Outcome { verdict: rep.verdict, result, rows })
}

/// Fejér orders for the σ-family.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    pub orders: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplePayload {
    pub fixture: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<SigmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MapJson>,
}

fn fejer_orders(orders: &[usize]) -> Result<SigmaFamily> {
    if orders.is_empty() {
        return Err(Error::invalid("sigma family needs at least one order"));
    }
    let sigmas = orders.iter().map(|&n| fejer_sigma(FEJER_GRID, n)).collect::<Result<Vec<_>>>()?;
    let bounds = orders.iter().map(|&n| fejer_rate_bound(FEJER_LIPSCHITZ, n)).collect();
    Ok(SigmaFamily {
        ns: orders.to_vec(),
        sigmas,
        set: fejer_test_family(FEJER_GRID)?,
        disk: crate::algebra::Disk::norm_ball(1.0)?,
        bounds: Some(bounds),
    })
}

fn run_apple(p: &ApplePayload, cfg: &Config) -> Result<Outcome> {
    if p.fixture != "trig-fejer" {
        return Err(Error::invalid(format!("no σ-family is declared for fixture {:?}", p.fixture)));
    }
    let fx = crate::approx_mult::trig_fejer_fixture()?;
    let orders: Vec<usize> = match &p.sigmas {
        Some(s) => s.orders.clone(),
        None => (0..=6).map(|e| 1 << e).collect(),
    };
    let family = fejer_orders(&orders)?;
    let (h, h_set) = match &p.h {
        Some(m) => {
            let h = m.decode()?;
            let set = BoundedSet::new(standard_basis(h.source()).iter().map(|b| b.scale_real(0.5)).collect())?;
            (h, set)
        }
        None => evaluation_embedding(&fx)?,
    };
    let mut ac = AppleConfig { sampler: sampler(cfg, None), ..AppleConfig::default() };
    if cfg.samples.is_none() {
        ac.sampler.per_size = 8;
    }
    ac.jsr = jsr_options(cfg, ac.jsr.depth);
    ac.tol = cfg.tol.unwrap_or(ac.tol);
    if let Some(t) = cfg.tgrid {
        ac.homotopy.t_points = t.max(2);
    }
    let r = apple_certificate(&fx, &family, &h, &h_set, &ac)?;
    let rows = r
        .sigma
        .ns
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let bound = r.sigma.bounds.as_ref().map_or(Value::Null, |b| num(b[i]));
            row(vec![("n", json!(n)), ("epsilon", num(r.sigma.epsilons[i])), ("bound", bound)])
        })
        .collect();
    let homotopy = r.homotopy.as_ref().map(|c| {
        json!({
            "certified_sup": num(c.certified_sup),
            "max_lower": num(c.max_lower),
            "c1": num(c.c1),
            "c2": num(c.c2),
            "evaluations": c.evaluations,
            "segments": c.segments.len(),
            "verdict": verdict_str(c.verdict),
        })
    });
    let result = json!({
        "fixture": r.fixture,
        "isoradial": {
            "worst_ratio": num(r.isoradial.worst_ratio),
            "samples": r.isoradial.samples.len(),
            "verdict": verdict_str(r.isoradial.verdict),
        },
        "sigma": {
            "ns": r.sigma.ns,
            "epsilons": r.sigma.epsilons.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "nonincreasing": r.sigma.nonincreasing,
            "within_bounds": r.sigma.within_bounds,
            "verdict": verdict_str(r.sigma.verdict),
        },
        "sigma_index": r.sigma_index,
        "homotopy": homotopy,
    });
    Ok(Outcome { verdict: r.verdict, result, rows })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyPayload {
    pub space: ModelSpace,
    pub sequence: SequenceModel,
    #[serde(default)]
    pub disk: usize,
    pub eps: NullSeq,
    /// Checks convergence to this vector instead of the Cauchy property.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vector>,
}

fn run_cauchy(p: &CauchyPayload) -> Result<Outcome> {
    p.space.validate()?;
    let r = match &p.limit {
        Some(l) => convergence_check(&p.space, &p.sequence, l, p.disk, &p.eps)?,
        None => cauchy_check(&p.space, &p.sequence, p.disk, &p.eps)?,
    };
    let witness = r.witness.as_ref().map(|w| json!({ "m": w.m, "n": w.n, "gauge": interval(w.gauge), "eps": num(w.eps) }));
    let result = json!({
        "mode": if p.limit.is_some() { "convergence" } else { "cauchy" },
        "disk": r.disk,
        "checked": r.checked,
        "certified_from": r.certified_from,
        "worst_ratio": num(r.worst_ratio),
        "first_excess": r.first_excess,
        "witness": witness,
    });
    Ok(Outcome { verdict: r.verdict, result, rows: Vec::new() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub sequence: SequenceModel,
    #[serde(default)]
    pub disk: usize,
    pub eps: NullSeq,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletePayload {
    pub space: ModelSpace,
    /// Representatives of completion elements to compare.
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
}

fn run_complete(p: &CompletePayload) -> Result<Outcome> {
    let rep = completeness_check(&p.space)?;
    let per_disk: Vec<Value> = rep
        .per_disk
        .iter()
        .map(|d| {
            let witness = d.witness.as_ref().map(|w| {
                json!({
                    "sequence": w.sequence,
                    "eps": w.eps,
                    "cauchy": verdict_str(w.cauchy.verdict),
                    "limit_finitely_supported": w.limit.is_finite(),
                })
            });
            json!({
                "disk": d.disk,
                "cauchy_converges": verdict_str(d.cauchy_converges),
                "probes_converge": verdict_str(d.probes_converge),
                "witness": witness,
            })
        })
        .collect();
    let mut result = Map::new();
    result.insert("complete".into(), json!(verdict_str(rep.verdict)));
    result.insert("consistent".into(), json!(rep.consistent));
    result.insert("per_disk".into(), Value::Array(per_disk));
    let mut rows = Vec::new();
    if !p.elements.is_empty() {
        let c = Completion::new(&p.space)?;
        let elems = p.elements.iter().map(|e| c.element(e.sequence.clone(), e.disk, e.eps.clone())).collect::<Result<Vec<_>>>()?;
        let mut gauges = Vec::new();
        for (i, e) in elems.iter().enumerate() {
            let g = c.gauge_in_quotient(e, e.disk)?;
            gauges.push(interval(g));
            for (j, f) in elems.iter().enumerate().skip(i + 1) {
                let eq = c.equal(e, f);
                rows.push(row(vec![
                    ("left", json!(i)),
                    ("right", json!(j)),
                    ("equal", json!(eq.equal)),
                    ("separation_lo", eq.separation.map_or(Value::Null, |s| num(s.lo))),
                ]));
            }
        }
        result.insert("quotient_gauges".into(), Value::Array(gauges));
        result.insert("equalities".into(), serde_json::to_value(&rows).map_err(|e| Error::invalid(e.to_string()))?);
    }
    // The command certifies a decision; "incomplete" is a decided answer.
    let decided = rep.consistent && rep.verdict != Verdict::Inconclusive;
    let verdict = if decided { Verdict::Pass } else { Verdict::Inconclusive };
    Ok(Outcome { verdict, result: Value::Object(result), rows })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxPayload {
    pub gauge: TargetGauge,
    pub set: CompactSetModel,
    pub family: OperatorFamily,
    /// The limit operator; the identity if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<OperatorModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<usize>,
    #[serde(default = "default_rank_budget")]
    pub rank_budget: usize,
}

fn default_rank_budget() -> usize {
    1 << 20
}

fn run_approx(p: &ApproxPayload, cfg: &Config) -> Result<Outcome> {
    let limit = p.limit.clone().unwrap_or_else(OperatorModel::identity);
    let uni = uniform_convergence_on_set(&p.family, &limit, &p.set, &p.gauge, p.rates)?;
    let samples = cfg.samples.unwrap_or(1000);
    let sound = sampling_soundness(&p.family, &limit, &p.set, &p.gauge, &uni.rates, samples, cfg.seed.unwrap_or(DEFAULT_SEED));
    let mut verdict = uni.verdict.combine(Verdict::from(sound.violations == 0));
    let mut result = Map::new();
    result.insert("rates".into(), Value::Array(uni.rates.iter().map(|r| interval(*r)).collect()));
    result.insert("converges".into(), json!(verdict_str(uni.verdict)));
    result.insert("soundness".into(), json!({ "samples": sound.samples, "worst_ratio": num(sound.worst_ratio), "violations": sound.violations }));
    if let (Some(tol), OperatorFamily::Truncations, true) = (cfg.tol, &p.family, is_identity(&limit)) {
        let r = local_approx_property_check(&p.set, &p.gauge, tol, p.rank_budget)?;
        result.insert(
            "local_approximation".into(),
            json!({
                "tol": num(tol),
                "index": r.index,
                "rank": r.rank,
                "scale": num(r.scale),
                "global_via_regularity": r.global_via_regularity,
            }),
        );
    } else if cfg.tol.is_some() {
        verdict = verdict.combine(Verdict::Inconclusive);
    }
    let rows = uni.rates.iter().enumerate().map(|(n, r)| row(vec![("n", json!(n)), ("lo", num(r.lo)), ("hi", num(r.hi))])).collect();
    Ok(Outcome { verdict, result: Value::Object(result), rows })
}

fn is_identity(op: &OperatorModel) -> bool {
    op.sub(&OperatorModel::identity()).is_zero()
}

