//! Closed-form scalar sequences `c·Π(a·n + b)^p·βⁿ` and certified bounds
//! on their tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::Interval;

/// Explicit coordinates inspected before a tail bound takes over.
pub const TAIL_WINDOW: u64 = 64;
/// Largest explicit window tried before a tail is declared unbounded.
pub const MAX_WINDOW: u64 = 1 << 22;

/// One polynomial factor `(a·n + b)^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

fn default_beta() -> f64 {
    1.0
}

/// `c · Π (a·n + b)^p · βⁿ` for `n = 0, 1, 2, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedForm {
    pub c: f64,
    #[serde(default)]
    pub factors: Vec<Factor>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

/// Sup or sum over the tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    Sup,
    Sum,
}

impl ClosedForm {
    pub fn constant(c: f64) -> Self {
        Self { c, factors: Vec::new(), beta: 1.0 }
    }

    pub fn geometric(c: f64, beta: f64) -> Self {
        Self { c, factors: Vec::new(), beta }
    }

    /// `c·(n + b)^p·βⁿ`.
    pub fn power(c: f64, b: f64, p: f64, beta: f64) -> Self {
        Self { c, factors: vec![Factor { a: 1.0, b, p }], beta }.canonical()
    }

    /// Drops trivial factors and folds constant ones into `c`.
    pub fn canonical(mut self) -> Self {
        let mut kept = Vec::new();
        for f in self.factors.drain(..) {
            if f.p == 0.0 {
                continue;
            }
            if f.a == 0.0 {
                self.c *= f.b.powf(f.p);
                continue;
            }
            kept.push(f);
        }
        kept.sort_by(|x, y| (x.a, x.b, x.p).partial_cmp(&(y.a, y.b, y.p)).unwrap_or(std::cmp::Ordering::Equal));
        // Same base: add the exponents.
        let mut merged: Vec<Factor> = Vec::with_capacity(kept.len());
        for f in kept {
            match merged.last_mut() {
                Some(last) if last.a == f.a && last.b == f.b => last.p += f.p,
                _ => merged.push(f),
            }
        }
        merged.retain(|f| f.p != 0.0);
        self.factors = merged;
        self
    }

    /// Checks that every factor base is nonnegative from `n0` on, and
    /// positive where the exponent is negative.
    pub fn validate_from(&self, n0: u64) -> Result<()> {
        let finite = self.c.is_finite() && self.beta.is_finite() && self.factors.iter().all(|f| f.a.is_finite() && f.b.is_finite() && f.p.is_finite());
        if !finite {
            return Err(Error::invalid("closed form has non-finite parameters"));
        }
        for f in &self.factors {
            let base = f.a * n0 as f64 + f.b;
            if f.a < 0.0 || base < 0.0 || (f.p < 0.0 && base <= 0.0) {
                return Err(Error::invalid(format!("factor ({}·n + {})^{} is not defined for n ≥ {n0}", f.a, f.b, f.p)));
            }
        }
        Ok(())
    }

    fn beta_pow(&self, n: u64) -> f64 {
        let m = self.beta.abs().powf(n as f64);
        if self.beta < 0.0 && n % 2 == 1 {
            -m
        } else {
            m
        }
    }

    pub fn eval(&self, n: u64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let poly: f64 = self.factors.iter().map(|f| (f.a * n as f64 + f.b).powf(f.p)).product();
        self.c * poly * self.beta_pow(n)
    }

    pub fn abs(&self) -> Self {
        Self { c: self.c.abs(), factors: self.factors.clone(), beta: self.beta.abs() }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { c: self.c * k, ..self.clone() }
    }

    pub fn mul(&self, other: &ClosedForm) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { c: self.c * other.c, factors, beta: self.beta * other.beta }.canonical()
    }

    /// `n ↦ 1 / self(n)`.
    pub fn recip(&self) -> Result<Self> {
        if self.c == 0.0 || self.beta == 0.0 {
            return Err(Error::invalid("reciprocal of a vanishing closed form"));
        }
        let factors = self.factors.iter().map(|f| Factor { p: -f.p, ..f.clone() }).collect();
        Ok(Self { c: 1.0 / self.c, factors, beta: 1.0 / self.beta })
    }

    /// `n ↦ self(a·n + b)`.
    pub fn subsequence(&self, a: u64, b: u64) -> Self {
        let factors = self
            .factors
            .iter()
            .map(|f| Factor { a: f.a * a as f64, b: f.a * b as f64 + f.b, p: f.p })
            .collect();
        Self { c: self.c * self.beta_pow(b), factors, beta: self.beta_pow(a) }.canonical()
    }

    /// `n ↦ self(n + d)`.
    pub fn shift(&self, d: i64) -> Self {
        let factors = self.factors.iter().map(|f| Factor { b: f.b + f.a * d as f64, ..f.clone() }).collect();
        let c = if d >= 0 { self.c * self.beta_pow(d as u64) } else { self.c / self.beta_pow(d.unsigned_abs()) };
        Self { c, factors, beta: self.beta }.canonical()
    }

    /// `n ↦ √self(n)` for nonnegative forms.
    pub fn sqrt(&self) -> Result<Self> {
        if self.c < 0.0 || self.beta < 0.0 {
            return Err(Error::invalid("square root of a form that changes sign"));
        }
        let factors = self.factors.iter().map(|f| Factor { p: f.p / 2.0, ..f.clone() }).collect();
        Ok(Self { c: self.c.sqrt(), factors, beta: self.beta.sqrt() })
    }

    pub fn degree(&self) -> f64 {
        self.factors.iter().map(|f| f.p).sum()
    }

    pub fn rho(&self) -> f64 {
        self.beta.abs()
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0 || self.beta == 0.0
    }

    /// Constant in `n` (after canonicalisation).
    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.beta == 1.0 && self.factors.is_empty())
    }

    /// Tends to zero.
    pub fn is_null(&self) -> bool {
        self.is_zero() || self.rho() < 1.0 || (self.rho() == 1.0 && self.degree() < 0.0)
    }

    /// Bounded for large `n`.
    pub fn is_bounded(&self) -> bool {
        self.is_zero() || self.rho() < 1.0 || (self.rho() == 1.0 && self.degree() <= 0.0)
    }

    /// Upper bound on `|self(n+1)| / |self(n)|` for every `n ≥ k0`.
    pub fn ratio_upper(&self, k0: u64) -> f64 {
        let poly: f64 = self
            .factors
            .iter()
            .filter(|f| f.p > 0.0)
            .map(|f| ((f.a * (k0 + 1) as f64 + f.b) / (f.a * k0 as f64 + f.b)).powf(f.p))
            .product();
        self.rho() * poly
    }

    /// Lower bound on `|self(n+1)| / |self(n)|` for every `n ≥ k0`.
    pub fn ratio_lower(&self, k0: u64) -> f64 {
        let poly: f64 = self
            .factors
            .iter()
            .filter(|f| f.p < 0.0)
            .map(|f| ((f.a * (k0 + 1) as f64 + f.b) / (f.a * k0 as f64 + f.b)).powf(f.p))
            .product();
        self.rho() * poly
    }

    /// Constant `C` with `Π (a·k + b)^p ≤ C·k^{degree}` for `k ≥ k0 ≥ 1`.
    fn power_envelope(&self, k0: u64) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let drift = (1.0 + f.b / (f.a * k0 as f64)).powf(f.p).max(1.0);
                f.a.powf(f.p) * drift
            })
            .product()
    }

    /// Bound on `sup_{k ≥ k0} |self(k)|` or `Σ_{k ≥ k0} |self(k)|`, or
    /// `None` when `k0` is still before the terms start decreasing.
    pub fn tail_bound(&self, k0: u64, kind: TailKind) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        let rho = self.rho();
        let deg = self.degree();
        if rho > 1.0 {
            return Some(f64::INFINITY);
        }
        if rho == 1.0 {
            return match kind {
                TailKind::Sup if deg > 0.0 => Some(f64::INFINITY),
                TailKind::Sup => Some(self.c.abs() * self.power_envelope(k0.max(1)) * (k0.max(1) as f64).powf(deg)),
                TailKind::Sum if deg >= -1.0 => Some(f64::INFINITY),
                TailKind::Sum => {
                    let k = k0.max(2);
                    let head: f64 = (k0..k).map(|i| self.eval(i).abs()).sum();
                    let rest = self.c.abs() * self.power_envelope(k) * ((k - 1) as f64).powf(deg + 1.0) / (-deg - 1.0);
                    Some(head + rest)
                }
            };
        }
        let q = self.ratio_upper(k0);
        if q >= 1.0 {
            return None;
        }
        let first = self.eval(k0).abs();
        Some(match kind {
            TailKind::Sup => first,
            TailKind::Sum => first / (1.0 - q),
        })
    }
}

impl ClosedForm {
    /// Closed form `E(m)` bounding the tail of `|self|` that starts at
    /// coordinate `a·m + s`, valid for every `m ≥ m0`. `None` when the tail
    /// is unbounded or not yet decreasing at `m0`.
    pub fn tail_envelope(&self, a: u64, s: i64, m0: u64, kind: TailKind) -> Option<ClosedForm> {
        if self.is_zero() {
            return Some(ClosedForm::constant(0.0));
        }
        let k_min = a as i64 * m0 as i64 + s;
        if k_min < 2 {
            return None;
        }
        let k_min = k_min as u64;
        let start = |f: &ClosedForm| f.abs().shift(s).subsequence(a, 0);
        let rho = self.rho();
        let deg = self.degree();
        if rho < 1.0 {
            let q = self.ratio_upper(k_min);
            if q >= 1.0 {
                return None;
            }
            let f = start(self);
            return Some(match kind {
                TailKind::Sup => f,
                TailKind::Sum => f.scale(1.0 / (1.0 - q)),
            });
        }
        if rho > 1.0 {
            return None;
        }
        let c = self.c.abs() * self.power_envelope(k_min);
        match kind {
            TailKind::Sup if deg <= 0.0 => Some(ClosedForm { c, factors: vec![Factor { a: a as f64, b: s as f64, p: deg }], beta: 1.0 }.canonical()),
            TailKind::Sum if deg < -1.0 => Some(
                ClosedForm { c: c / (-deg - 1.0), factors: vec![Factor { a: a as f64, b: (s - 1) as f64, p: deg + 1.0 }], beta: 1.0 }.canonical(),
            ),
            _ => None,
        }
    }
}

/// Merges forms with identical parameters.
pub fn merge(forms: &[ClosedForm]) -> Vec<ClosedForm> {
    let mut out: Vec<ClosedForm> = Vec::new();
    for f in forms.iter().map(|f| f.clone().canonical()) {
        if f.is_zero() {
            continue;
        }
        match out.iter_mut().find(|g| g.factors == f.factors && g.beta == f.beta) {
            Some(g) => g.c += f.c,
            None => out.push(f),
        }
    }
    out.retain(|f| !f.is_zero());
    out
}

fn combine(acc: f64, v: f64, kind: TailKind) -> f64 {
    match kind {
        TailKind::Sup => acc.max(v),
        TailKind::Sum => acc + v,
    }
}

/// Divergence that no other term can cancel: a unique fastest-growing term.
fn certainly_divergent(forms: &[ClosedForm], kind: TailKind) -> bool {
    let diverges = |f: &ClosedForm| f.tail_bound(u64::MAX / 4, kind).is_some_and(|b| b.is_infinite());
    let divergent: Vec<&ClosedForm> = forms.iter().filter(|f| diverges(f)).collect();
    let key = |f: &ClosedForm| (f.rho(), f.degree());
    let Some(top) = divergent.iter().map(|f| key(f)).max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)) else {
        return false;
    };
    forms.iter().filter(|f| key(f) == top).count() == 1
}

/// Relative size of the bounded remainder at which the explicit window
/// stops growing.
const REMAINDER_TARGET: f64 = 1e-15;
/// Window length beyond which a convergent remainder is accepted as is.
const SOFT_WINDOW: u64 = 1 << 14;

/// Explicit window `[from, k0)` and a bound on the rest, per term.
fn split_tail(forms: &[ClosedForm], from: u64, kind: TailKind) -> (u64, f64) {
    let mut k0 = from + TAIL_WINDOW;
    loop {
        let bounds: Option<Vec<f64>> = forms.iter().map(|f| f.tail_bound(k0, kind)).collect();
        match bounds {
            Some(b) => {
                let rest: f64 = b.iter().sum();
                let scale = forms.iter().map(|f| f.eval(from).abs()).fold(f64::MIN_POSITIVE, f64::max);
                if rest <= REMAINDER_TARGET * scale || rest.is_infinite() || k0 - from >= SOFT_WINDOW {
                    return (k0, rest);
                }
            }
            None if k0 - from >= MAX_WINDOW => return (k0, f64::INFINITY),
            None => {}
        }
        k0 = from + 2 * (k0 - from);
    }
}

/// Rounding allowance for `count` accumulated terms of total size `mass`.
fn rounding(count: u64, mass: f64) -> f64 {
    2.0 * (count as f64 + forms_cost()) * f64::EPSILON * mass
}

fn forms_cost() -> f64 {
    8.0
}

/// Certified `sup_{k ≥ from} |Σ_i f_i(k)|` or `Σ_{k ≥ from} |Σ_i f_i(k)|`.
pub fn tail_norm(forms: &[ClosedForm], from: u64, kind: TailKind) -> Interval {
    let forms = merge(forms);
    if forms.is_empty() {
        return Interval::point(0.0);
    }
    let (k0, rest) = split_tail(&forms, from, kind);
    let value = (from..k0).fold(0.0, |acc, k| combine(acc, forms.iter().map(|f| f.eval(k)).sum::<f64>().abs(), kind));
    let pad = match kind {
        TailKind::Sum => rounding(k0 - from, value),
        TailKind::Sup => rounding(forms.len() as u64, value),
    };
    let hi = combine(value + pad, rest, kind);
    if hi.is_infinite() && certainly_divergent(&forms, kind) {
        return Interval::point(f64::INFINITY);
    }
    Interval::new((value - pad).max(0.0), hi)
}

/// Certified value of the signed series `Σ_{k ≥ from} Σ_i f_i(k)`.
pub fn series_value(forms: &[ClosedForm], from: u64) -> Interval {
    let forms = merge(forms);
    if forms.is_empty() {
        return Interval::point(0.0);
    }
    let (k0, rest) = split_tail(&forms, from, TailKind::Sum);
    let (head, mass) = (from..k0).fold((0.0, 0.0), |(h, m), k| {
        let v: f64 = forms.iter().map(|f| f.eval(k)).sum();
        (h + v, m + v.abs())
    });
    let pad = rest + rounding(k0 - from, mass);
    Interval::new(head - pad, head + pad)
}

/// A positive sequence given as a finite sum of closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NullSeq(pub Vec<ClosedForm>);

impl NullSeq {
    pub fn single(f: ClosedForm) -> Self {
        Self(vec![f])
    }

    /// `c·βᵐ`.
    pub fn geometric(c: f64, beta: f64) -> Self {
        Self::single(ClosedForm::geometric(c, beta))
    }

    /// `c·(m + 1)^{-p}`.
    pub fn inverse_power(c: f64, p: f64) -> Self {
        Self::single(ClosedForm::power(c, 1.0, -p, 1.0))
    }

    /// Positive at every index and tending to zero.
    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::invalid("null sequence needs at least one term"));
        }
        for f in &self.0 {
            f.validate_from(0)?;
            if !(f.c > 0.0 && f.beta > 0.0) {
                return Err(Error::invalid("null sequence terms must be positive"));
            }
            if !f.is_null() {
                return Err(Error::invalid("null sequence terms must tend to zero"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, m: u64) -> f64 {
        self.0.iter().map(|f| f.eval(m)).sum()
    }

    /// Lower bound on `ε_{m+1}/ε_m` for every `m ≥ k0`.
    pub fn ratio_lower(&self, k0: u64) -> f64 {
        self.0.iter().map(|f| f.ratio_lower(k0)).fold(f64::INFINITY, f64::min)
    }

    pub fn subsequence(&self, a: u64, b: u64) -> Self {
        Self(self.0.iter().map(|f| f.subsequence(a, b)).collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0.iter().map(|f| f.scale(k)).collect())
    }

    pub fn add(&self, other: &NullSeq) -> Self {
        Self(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// Termwise square root, which dominates `√ε` by subadditivity.
    pub fn sqrt(&self) -> Result<Self> {
        Ok(Self(self.0.iter().map(|f| f.sqrt()).collect::<Result<_>>()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_tail_sum() {
        // Σ_{k ≥ 3} 2^{-k} = 2^{-2}.
        let t = tail_norm(&[ClosedForm::geometric(1.0, 0.5)], 3, TailKind::Sum);
        assert!(t.lo <= 0.25 && 0.25 <= t.hi && t.width() < 1e-13, "{t:?}");
    }

    #[test]
    fn polynomial_times_geometric_peak() {
        // k·0.9^k peaks near k = 9.5.
        let f = ClosedForm::power(1.0, 0.0, 1.0, 0.9);
        let t = tail_norm(std::slice::from_ref(&f), 0, TailKind::Sup);
        let brute = (0..2000).map(|k| f.eval(k)).fold(0.0, f64::max);
        assert!(t.lo <= brute && t.hi >= brute && t.width() < 1e-12);
        let s = tail_norm(std::slice::from_ref(&f), 0, TailKind::Sum);
        // Σ k·x^k = x/(1−x)² = 90.
        assert!(s.lo <= 90.0 + 1e-9 && s.hi >= 90.0 - 1e-9 && s.width() < 1e-9, "{s:?}");
    }

    #[test]
    fn divergence_is_detected() {
        assert_eq!(tail_norm(&[ClosedForm::geometric(1.0, 2.0)], 0, TailKind::Sup), Interval::point(f64::INFINITY));
        assert_eq!(tail_norm(&[ClosedForm::power(1.0, 1.0, -1.0, 1.0)], 0, TailKind::Sum), Interval::point(f64::INFINITY));
        let conv = tail_norm(&[ClosedForm::power(1.0, 1.0, -2.0, 1.0)], 0, TailKind::Sum);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(conv.lo <= zeta2 && zeta2 <= conv.hi && conv.width() < 0.02, "{conv:?}");
    }

    #[test]
    fn cancelling_terms_merge() {
        let f = ClosedForm::geometric(1.0, 0.5);
        assert_eq!(tail_norm(&[f.clone(), f.scale(-1.0)], 0, TailKind::Sum), Interval::point(0.0));
    }

    #[test]
    fn tail_envelopes_dominate() {
        let forms = [
            ClosedForm::power(2.0, 1.0, 1.0, 0.8),
            ClosedForm::power(1.0, 1.0, -3.0, 1.0),
            ClosedForm::power(1.0, 2.0, -0.5, 1.0),
        ];
        for f in &forms {
            for kind in [TailKind::Sup, TailKind::Sum] {
                let Some(e) = f.tail_envelope(2, 1, 40, kind) else {
                    assert!(kind == TailKind::Sum && f.degree() >= -1.0);
                    continue;
                };
                for m in 40..80 {
                    let t = tail_norm(std::slice::from_ref(f), 2 * m + 1, kind);
                    assert!(t.lo <= e.eval(m) * (1.0 + 1e-12), "{f:?} {kind:?} m={m}");
                }
            }
        }
    }

    #[test]
    fn signed_series_value() {
        let v = series_value(&[ClosedForm::geometric(1.0, -0.5)], 0);
        assert!(v.lo <= 2.0 / 3.0 && 2.0 / 3.0 <= v.hi && v.width() < 1e-12, "{v:?}");
    }

    #[test]
    fn subsequence_and_shift_agree_with_eval() {
        let f = ClosedForm { c: 1.5, factors: vec![Factor { a: 2.0, b: 1.0, p: -1.5 }], beta: -0.7 };
        let g = f.subsequence(3, 2);
        let h = f.shift(4);
        for n in 0..20 {
            assert!((g.eval(n) - f.eval(3 * n + 2)).abs() <= 1e-14 * f.eval(3 * n + 2).abs());
            assert!((h.eval(n) - f.eval(n + 4)).abs() <= 1e-14 * f.eval(n + 4).abs());
        }
    }
}
