//! Metrizability scalars for countable disk families and the strengthened
//! series bound used for complete metrizable models.

use super::closed::{tail_norm, ClosedForm, TailKind};
use super::space::{DiskSpec, GaugeKind, ModelSpace};
use crate::error::{Error, Result};
use crate::jsr::Interval;
use crate::Verdict;

/// Smallest `λ` with `S_from ⊆ λ·S_into`, or `∞`.
pub fn containment(from: &DiskSpec, into: &DiskSpec) -> Result<f64> {
    let ratio = into.weight.mul(&from.weight.recip()?);
    let kind = match (from.kind, into.kind) {
        (GaugeKind::Sup, GaugeKind::L1) => TailKind::Sum,
        _ => TailKind::Sup,
    };
    // Nonincreasing ratios attain their supremum at the first coordinate.
    if kind == TailKind::Sup && ratio.factors.is_empty() && ratio.beta <= 1.0 {
        return Ok(ratio.c.abs());
    }
    Ok(tail_norm(&[ratio], 0, kind).hi)
}

#[derive(Clone, Debug)]
pub struct MetrizabilityReport {
    pub verdict: Verdict,
    /// Index of the absorbing disk `S_M`.
    pub absorbing: Option<usize>,
    /// `λ_n` with `S_n ⊆ λ_n·S_M`.
    pub containment: Vec<f64>,
    /// `ε_n = 2^{-n}/λ_n` for `n = 1, 2, …`.
    pub eps: Vec<f64>,
    /// All partial sums `Σ_{n≤N} ε_n S_n` lie in `bound·S_M`.
    pub bound: f64,
}

/// Scalars `ε_n` making `Σ_{n≤N} ε_n S_n` bounded uniformly in `N`. The first
/// family disk absorbing every listed disk serves as `S_M`.
pub fn metrizability_scalars(space: &ModelSpace, disks: &[usize]) -> Result<MetrizabilityReport> {
    space.validate()?;
    let listed = disks.iter().map(|&k| space.disk(k)).collect::<Result<Vec<_>>>()?;
    for (m, target) in space.disks.iter().enumerate() {
        let lambdas = listed.iter().map(|d| containment(d, target)).collect::<Result<Vec<f64>>>()?;
        if lambdas.iter().all(|l| l.is_finite()) {
            let eps: Vec<f64> = lambdas
                .iter()
                .enumerate()
                .map(|(i, l)| 0.5_f64.powi(i as i32 + 1) / l.max(f64::MIN_POSITIVE))
                .collect();
            let bound = 1.0 - 0.5_f64.powi(disks.len() as i32);
            return Ok(MetrizabilityReport { verdict: Verdict::Pass, absorbing: Some(m), containment: lambdas, eps, bound });
        }
    }
    Ok(MetrizabilityReport { verdict: Verdict::Inconclusive, absorbing: None, containment: Vec::new(), eps: Vec::new(), bound: f64::INFINITY })
}

#[derive(Clone, Debug)]
pub struct SeriesReport {
    pub verdict: Verdict,
    pub absorbing: usize,
    /// `Σ_{n≥1} |λ_n| S_n ⊆ bound·S_M` for all `|λ_n| ≤ ε_n`.
    pub bound: Interval,
}

/// Bounds the infinite sums `Σ_{n≥1} λ_n x_n` with `x_n ∈ scale(n)·S_base`
/// and `|λ_n| ≤ ε_n` in a multiple of `S_into`.
pub fn strengthened_series_check(space: &ModelSpace, base: usize, into: usize, scale: &ClosedForm, eps: &ClosedForm) -> Result<SeriesReport> {
    space.validate()?;
    scale.validate_from(1)?;
    eps.validate_from(1)?;
    if eps.c < 0.0 || eps.beta < 0.0 || scale.beta < 0.0 {
        return Err(Error::invalid("series scalars must be nonnegative"));
    }
    let lambda = containment(space.disk(base)?, space.disk(into)?)?;
    let terms = eps.mul(&scale.abs());
    let sum = if terms.is_zero() { Interval::point(0.0) } else { tail_norm(&[terms], 1, TailKind::Sum) };
    let sum = Interval::new(sum.lo.max(0.0), sum.hi);
    let bound = if lambda.is_infinite() { Interval::point(f64::INFINITY) } else { sum.scale(lambda) };
    let verdict = if bound.hi.is_finite() {
        Verdict::Pass
    } else if bound.lo.is_infinite() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(SeriesReport { verdict, absorbing: into, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled_l1(n: f64) -> DiskSpec {
        DiskSpec::l1(ClosedForm::constant(1.0 / n)).unwrap()
    }

    #[test]
    fn growing_balls_get_shrinking_scalars() {
        let space = ModelSpace::new((1..=5).map(|n| scaled_l1(n as f64)).collect(), true).unwrap();
        let r = metrizability_scalars(&space, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.absorbing, Some(0));
        for (i, e) in r.eps.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((e - 0.5_f64.powi(i as i32 + 1) / n).abs() < 1e-15);
        }
        assert!(r.bound <= 1.0);
    }

    #[test]
    fn repeated_disk_uses_geometric_scalars() {
        let r = metrizability_scalars(&ModelSpace::l1_with_tails(), &[0, 0, 0]).unwrap();
        assert_eq!(r.eps, vec![0.5, 0.25, 0.125]);
        assert_eq!(r.bound, 0.875);
    }

    #[test]
    fn incomparable_family_is_inconclusive() {
        let sup = DiskSpec::unit_sup();
        let l1 = DiskSpec::l1(ClosedForm::power(1.0, 1.0, -1.0, 1.0)).unwrap();
        let space = ModelSpace::new(vec![sup, l1], true).unwrap();
        assert_eq!(metrizability_scalars(&space, &[0, 1]).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn series_bounds() {
        let l1 = ModelSpace::l1_with_tails();
        let one = ClosedForm::constant(1.0);
        let r = strengthened_series_check(&l1, 0, 0, &one, &ClosedForm::geometric(1.0, 0.25)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.bound.contains(1.0 / 3.0, 0.0) && r.bound.width() < 1e-12);
        let zero = strengthened_series_check(&l1, 0, 0, &ClosedForm::constant(0.0), &one).unwrap();
        assert_eq!(zero.bound, Interval::point(0.0));
        let sup = ModelSpace::new(vec![DiskSpec::unit_sup()], true).unwrap();
        let growing = ClosedForm::power(1.0, 0.0, 1.0, 1.0);
        assert_eq!(strengthened_series_check(&sup, 0, 0, &growing, &one).unwrap().verdict, Verdict::Fail);
    }
}
