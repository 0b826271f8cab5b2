//! Weighted sequence spaces and vectors with closed-form tails.

use serde::{Deserialize, Serialize};

use super::closed::{merge, series_value, tail_norm, ClosedForm, TailKind};
use crate::error::{Error, Result};
use crate::jsr::Interval;

/// Default number of explicit coordinates and indices inspected.
pub const DEFAULT_HORIZON: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    /// `sup_k w(k)·|x_k|`
    Sup,
    /// `Σ_k w(k)·|x_k|`
    L1,
}

impl GaugeKind {
    pub fn tail(self) -> TailKind {
        match self {
            GaugeKind::Sup => TailKind::Sup,
            GaugeKind::L1 => TailKind::Sum,
        }
    }
}

/// A weighted gauge; the disk is its closed unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub kind: GaugeKind,
    /// Weight `w(k)` at coordinate `k`, positive for every `k ≥ 0`.
    pub weight: ClosedForm,
}

impl DiskSpec {
    pub fn new(kind: GaugeKind, weight: ClosedForm) -> Result<Self> {
        weight.validate_from(0)?;
        if !(weight.c > 0.0 && weight.beta > 0.0) || weight.factors.iter().any(|f| f.b <= 0.0) {
            return Err(Error::invalid("disk weights must be positive at every coordinate"));
        }
        Ok(Self { kind, weight })
    }

    pub fn l1(weight: ClosedForm) -> Result<Self> {
        Self::new(GaugeKind::L1, weight)
    }

    pub fn sup(weight: ClosedForm) -> Result<Self> {
        Self::new(GaugeKind::Sup, weight)
    }

    pub fn unit_l1() -> Self {
        Self { kind: GaugeKind::L1, weight: ClosedForm::constant(1.0) }
    }

    pub fn unit_sup() -> Self {
        Self { kind: GaugeKind::Sup, weight: ClosedForm::constant(1.0) }
    }

    /// Certified gauge of a vector, restricted to coordinates below `dim`.
    pub fn gauge(&self, v: &Vector, dim: Option<usize>) -> Interval {
        let h = v.head.len();
        let stop = dim.map_or(h, |d| d.min(h));
        let mut acc = 0.0_f64;
        for (k, x) in v.head[..stop].iter().enumerate() {
            let t = self.weight.eval(k as u64) * x.abs();
            acc = match self.kind {
                GaugeKind::Sup => acc.max(t),
                GaugeKind::L1 => acc + t,
            };
        }
        if v.tail.is_empty() || dim.is_some_and(|d| d <= h) {
            return Interval::point(acc);
        }
        let forms: Vec<ClosedForm> = v.tail.iter().map(|t| t.mul(&self.weight)).collect();
        let tail = match dim {
            Some(d) => {
                let part = (h..d).fold(0.0_f64, |a, k| {
                    let t = forms.iter().map(|f| f.eval(k as u64)).sum::<f64>().abs();
                    match self.kind {
                        GaugeKind::Sup => a.max(t),
                        GaugeKind::L1 => a + t,
                    }
                });
                Interval::point(part)
            }
            None => tail_norm(&forms, h as u64, self.kind.tail()),
        };
        match self.kind {
            GaugeKind::Sup => Interval::new(acc.max(tail.lo), acc.max(tail.hi)),
            GaugeKind::L1 => Interval::new(acc + tail.lo, acc + tail.hi),
        }
    }
}

/// A countable family of weighted disks on sequences indexed by `ℕ`, or
/// by `0..dim` for finite-dimensional models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpace {
    #[serde(default)]
    pub dim: Option<usize>,
    /// Whether vectors with closed-form infinite tails belong to the space.
    #[serde(default)]
    pub tails: bool,
    pub disks: Vec<DiskSpec>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

impl ModelSpace {
    pub fn new(disks: Vec<DiskSpec>, tails: bool) -> Result<Self> {
        let s = Self { dim: None, tails, disks, horizon: DEFAULT_HORIZON };
        s.validate()?;
        Ok(s)
    }

    pub fn finite(dim: usize, disks: Vec<DiskSpec>) -> Result<Self> {
        let s = Self { dim: Some(dim), tails: false, disks, horizon: DEFAULT_HORIZON };
        s.validate()?;
        Ok(s)
    }

    /// Weighted ℓ¹ with constant weight 1, closed-form tails admitted.
    pub fn l1_with_tails() -> Self {
        Self { dim: None, tails: true, disks: vec![DiskSpec::unit_l1()], horizon: DEFAULT_HORIZON }
    }

    /// Finitely supported sequences with the unit ℓ¹ gauge.
    pub fn l1_finite_support() -> Self {
        Self { dim: None, tails: false, disks: vec![DiskSpec::unit_l1()], horizon: DEFAULT_HORIZON }
    }

    pub fn validate(&self) -> Result<()> {
        if self.disks.is_empty() {
            return Err(Error::invalid("a model space needs at least one disk"));
        }
        for d in &self.disks {
            DiskSpec::new(d.kind, d.weight.clone())?;
        }
        Ok(())
    }

    pub fn disk(&self, k: usize) -> Result<&DiskSpec> {
        self.disks.get(k).ok_or_else(|| Error::invalid(format!("disk index {k} out of range")))
    }

    pub fn gauge(&self, disk: usize, v: &Vector) -> Result<Interval> {
        Ok(self.disk(disk)?.gauge(v, self.dim))
    }

    /// Whether `v` is an element of the model.
    pub fn contains(&self, v: &Vector) -> bool {
        match self.dim {
            Some(d) => v.head.iter().skip(d).all(|x| *x == 0.0) && (v.tail_forms().is_empty() || v.head.len() >= d),
            None => self.tails || v.tail_forms().is_empty(),
        }
    }
}

/// Coordinates `head[k]` for `k < head.len()` and `Σ tail(k)` beyond.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vector {
    #[serde(default)]
    pub head: Vec<f64>,
    #[serde(default)]
    pub tail: Vec<ClosedForm>,
}

impl Vector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn finite(head: Vec<f64>) -> Self {
        Self { head, tail: Vec::new() }
    }

    /// The unit vector `e_k`.
    pub fn unit(k: usize) -> Self {
        let mut head = vec![0.0; k + 1];
        head[k] = 1.0;
        Self::finite(head)
    }

    /// Coordinates given by `f(k)` for every `k ≥ 0`.
    pub fn closed(f: ClosedForm) -> Self {
        Self { head: Vec::new(), tail: vec![f] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.head.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("vector coordinates must be finite"));
        }
        for t in &self.tail {
            t.validate_from(self.head.len() as u64)?;
        }
        Ok(())
    }

    /// Nonzero tail terms after merging.
    pub fn tail_forms(&self) -> Vec<ClosedForm> {
        merge(&self.tail)
    }

    pub fn is_finite(&self) -> bool {
        self.tail_forms().is_empty()
    }

    pub fn coord(&self, k: usize) -> f64 {
        match self.head.get(k) {
            Some(x) => *x,
            None => self.tail.iter().map(|t| t.eval(k as u64)).sum(),
        }
    }

    /// Same vector with the head materialised to at least `len` coordinates.
    pub fn extended(&self, len: usize) -> Self {
        if len <= self.head.len() {
            return self.clone();
        }
        let mut head = self.head.clone();
        head.extend((self.head.len()..len).map(|k| self.coord(k)));
        Self { head, tail: self.tail.clone() }
    }

    pub fn add(&self, other: &Vector) -> Self {
        let len = self.head.len().max(other.head.len());
        let (a, b) = (self.extended(len), other.extended(len));
        let head = a.head.iter().zip(&b.head).map(|(x, y)| x + y).collect();
        let mut tail = a.tail;
        tail.extend(b.tail);
        Self { head, tail: merge(&tail) }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { head: self.head.iter().map(|x| c * x).collect(), tail: merge(&self.tail.iter().map(|t| t.scale(c)).collect::<Vec<_>>()) }
    }

    pub fn sub(&self, other: &Vector) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `P_n`: keeps coordinates `k ≤ n`; empty for negative `n`.
    pub fn truncate(&self, n: i64) -> Self {
        if n < 0 {
            return Self::zero();
        }
        let len = n as usize + 1;
        let mut head = self.extended(len).head;
        head.truncate(len);
        Self::finite(head)
    }

    /// Zeroes coordinates `k ≤ n`.
    pub fn drop_through(&self, n: i64) -> Self {
        if n < 0 {
            return self.clone();
        }
        let len = n as usize + 1;
        let mut v = self.extended(len);
        for x in &mut v.head[..len] {
            *x = 0.0;
        }
        v
    }

    /// Exact zero test on the canonical representation.
    pub fn is_zero(&self) -> bool {
        self.head.iter().all(|x| *x == 0.0) && self.tail_forms().is_empty()
    }

    /// `Σ_k x_k`, certified.
    pub fn coordinate_sum(&self) -> Interval {
        let head: f64 = self.head.iter().sum();
        let tail = series_value(&self.tail_forms(), self.head.len() as u64);
        Interval::new(head + tail.lo, head + tail.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauges_of_closed_vectors() {
        let v = Vector::closed(ClosedForm::geometric(1.0, 0.5));
        let g = ModelSpace::l1_with_tails().gauge(0, &v).unwrap();
        assert!(g.lo <= 2.0 && 2.0 <= g.hi && g.width() < 1e-12, "{g:?}");
        let s = DiskSpec::unit_sup().gauge(&v, None);
        assert!(s.contains(1.0, 0.0) && s.width() < 1e-14, "{s:?}");
        // Geometric weight 4^k beats the tail 2^{-k}.
        let d = DiskSpec::l1(ClosedForm::geometric(1.0, 4.0)).unwrap();
        assert_eq!(d.gauge(&v, None).hi, f64::INFINITY);
    }

    #[test]
    fn truncation_and_drop_partition() {
        let v = Vector { head: vec![3.0, -1.0], tail: vec![ClosedForm::geometric(1.0, 0.5)] };
        let w = v.truncate(5).add(&v.drop_through(5));
        assert!(w.sub(&v).is_zero());
        assert_eq!(v.truncate(-1), Vector::zero());
        assert_eq!(v.truncate(3).head, vec![3.0, -1.0, 0.25, 0.125]);
    }

    #[test]
    fn finite_dimensional_gauge_ignores_far_coordinates() {
        let s = ModelSpace::finite(2, vec![DiskSpec::unit_l1()]).unwrap();
        let v = Vector::finite(vec![1.0, -2.0]);
        assert_eq!(s.gauge(0, &v).unwrap(), Interval::point(3.0));
        assert!(s.contains(&v) && !s.contains(&Vector::unit(3)));
    }
}
