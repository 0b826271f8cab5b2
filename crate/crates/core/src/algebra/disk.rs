//! Disks, their gauges, and finitely generated bounded sets.

use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use super::{check_same, AlgebraDescriptor, AlgebraElement, C64, LP_TOLERANCE, RANK_TOLERANCE};
use crate::error::{Error, Result};

/// Prepared gauge of the real absolutely convex hull of finitely many
/// generators. The span is factored once; each gauge evaluation is one
/// rank test and one small linear program.
#[derive(Debug)]
pub struct HullGauge {
    descriptor: Arc<AlgebraDescriptor>,
    generators: Vec<AlgebraElement>,
    /// Orthonormal basis of the real span, one column per direction.
    basis: DMatrix<f64>,
    /// Generators expressed in `basis`.
    reduced: DMatrix<f64>,
    max_generator_len: f64,
}

impl HullGauge {
    pub fn new(generators: Vec<AlgebraElement>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::invalid("hull needs at least one generator"))?;
        let descriptor = first.descriptor().clone();
        for g in &generators {
            check_same(&descriptor, g.descriptor())?;
        }
        let cols: Vec<Vec<f64>> = generators.iter().map(|g| g.real_coords()).collect();
        let n = cols[0].len();
        let k = cols.len();
        let g = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
        let max_generator_len = cols
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let (basis, reduced) = if max_generator_len == 0.0 {
            (DMatrix::zeros(n, 0), DMatrix::zeros(0, k))
        } else {
            let svd = g.clone().svd(true, false);
            let u = svd.u.ok_or_else(|| Error::NumericalFailure {
                message: "hull span factorization failed".into(),
                lower: 0.0,
                upper: f64::INFINITY,
            })?;
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > RANK_TOLERANCE * smax)
                .collect();
            let basis = DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
            let reduced = basis.transpose() * &g;
            (basis, reduced)
        };
        Ok(Self { descriptor, generators, basis, reduced, max_generator_len })
    }

    pub fn generators(&self) -> &[AlgebraElement] {
        &self.generators
    }

    pub fn descriptor(&self) -> &Arc<AlgebraDescriptor> {
        &self.descriptor
    }

    /// Dimension of the real span of the generators.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `min Σ|λᵢ|` over real `λ` with `Σ λᵢ gᵢ = x`; `+∞` off the span.
    pub fn gauge(&self, x: &AlgebraElement) -> Result<f64> {
        check_same(&self.descriptor, x.descriptor())?;
        let xv = DVector::from_vec(x.real_coords());
        let xlen = xv.norm();
        if xlen == 0.0 {
            return Ok(0.0);
        }
        if self.rank() == 0 {
            return Ok(f64::INFINITY);
        }
        let coords = self.basis.transpose() * &xv;
        let residual = (&xv - &self.basis * &coords).norm();
        if residual > RANK_TOLERANCE * xlen {
            return Ok(f64::INFINITY);
        }
        self.solve(&coords, xlen)
    }

    fn solve(&self, rhs: &DVector<f64>, xlen: f64) -> Result<f64> {
        let k = self.generators.len();
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let plus: Vec<_> = (0..k).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
        let minus: Vec<_> = (0..k).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
        for row in 0..self.reduced.nrows() {
            let mut terms = Vec::with_capacity(2 * k);
            for j in 0..k {
                let c = self.reduced[(row, j)];
                if c != 0.0 {
                    terms.push((plus[j], c));
                    terms.push((minus[j], -c));
                }
            }
            problem.add_constraint(&terms[..], ComparisonOp::Eq, rhs[row]);
        }
        let lower = xlen / self.max_generator_len;
        let solution = problem.solve().map_err(|e| Error::NumericalFailure {
            message: format!("hull gauge LP failed: {e}"),
            lower,
            upper: f64::INFINITY,
        })?;
        // Re-check feasibility of the returned coefficients.
        let lambda = DVector::from_fn(k, |j, _| solution[plus[j]] - solution[minus[j]]);
        let miss = (&self.reduced * &lambda - rhs).norm();
        if miss > LP_TOLERANCE.max(1e-7 * rhs.norm()) * (1.0 + rhs.norm()) {
            return Err(Error::NumericalFailure {
                message: format!("hull gauge LP returned an infeasible point (miss {miss:e})"),
                lower,
                upper: f64::INFINITY,
            });
        }
        Ok(lambda.iter().map(|v| v.abs()).sum::<f64>().max(0.0))
    }
}

/// A bounded absolutely convex set with a computable gauge.
#[derive(Clone, Debug)]
pub enum Disk {
    NormBall { radius: f64 },
    FiniteHull(Arc<HullGauge>),
    Scaled { factor: f64, inner: Box<Disk> },
    /// Minkowski sum; `resolved` is the equivalent ball or hull used for
    /// gauge evaluation.
    Sum { left: Box<Disk>, right: Box<Disk>, resolved: Box<Disk> },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Disk {
    pub fn norm_ball(radius: f64) -> Result<Self> {
        Ok(Disk::NormBall { radius: positive("radius", radius)? })
    }

    pub fn hull(generators: Vec<AlgebraElement>) -> Result<Self> {
        Ok(Disk::FiniteHull(Arc::new(HullGauge::new(generators)?)))
    }

    pub fn scaled(factor: f64, inner: Disk) -> Result<Self> {
        Ok(Disk::Scaled { factor: positive("scale factor", factor)?, inner: Box::new(inner) })
    }

    /// Minkowski sum. Sums of two balls and sums of two hulls have exact
    /// gauges; a ball plus a hull is rejected.
    pub fn sum(left: Disk, right: Disk) -> Result<Self> {
        let resolved = match (left.flatten()?, right.flatten()?) {
            (Flat::Ball(a), Flat::Ball(b)) => Disk::NormBall { radius: a + b },
            (Flat::Hull(g), Flat::Hull(h)) => {
                let mut gens = Vec::with_capacity(2 * g.len() * h.len());
                for a in &g {
                    for b in &h {
                        gens.push(a.add(b)?);
                        gens.push(a.sub(b)?);
                    }
                }
                Disk::hull(gens)?
            }
            _ => {
                return Err(Error::invalid(
                    "the sum of a norm ball and a finite hull has no exact gauge formula",
                ))
            }
        };
        Ok(Disk::Sum { left: Box::new(left), right: Box::new(right), resolved: Box::new(resolved) })
    }

    fn flatten(&self) -> Result<Flat> {
        Ok(match self {
            Disk::NormBall { radius } => Flat::Ball(*radius),
            Disk::FiniteHull(h) => Flat::Hull(h.generators.clone()),
            Disk::Scaled { factor, inner } => match inner.flatten()? {
                Flat::Ball(r) => Flat::Ball(r * factor),
                Flat::Hull(g) => Flat::Hull(g.iter().map(|x| x.scale_real(*factor)).collect()),
            },
            Disk::Sum { resolved, .. } => resolved.flatten()?,
        })
    }

    pub fn gauge(&self, x: &AlgebraElement) -> Result<f64> {
        match self {
            Disk::NormBall { radius } => Ok(x.norm()? / radius),
            Disk::FiniteHull(h) => h.gauge(x),
            Disk::Scaled { factor, inner } => Ok(inner.gauge(x)? / factor),
            Disk::Sum { resolved, .. } => resolved.gauge(x),
        }
    }

    pub fn contains(&self, x: &AlgebraElement) -> Result<bool> {
        Ok(self.gauge(x)? <= 1.0 + LP_TOLERANCE)
    }

    pub fn label(&self) -> String {
        match self {
            Disk::NormBall { radius } => format!("ball({radius})"),
            Disk::FiniteHull(h) => format!("hull({} generators)", h.generators.len()),
            Disk::Scaled { factor, inner } => format!("{factor}·{}", inner.label()),
            Disk::Sum { left, right, .. } => format!("{} + {}", left.label(), right.label()),
        }
    }
}

enum Flat {
    Ball(f64),
    Hull(Vec<AlgebraElement>),
}

/// How a finite generator list is read as a bounded set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpretation {
    Finite,
    Hull,
}

/// A bounded set given by finitely many generators in one algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedSet {
    generators: Vec<AlgebraElement>,
    interpretation: Interpretation,
}

impl BoundedSet {
    pub fn new(generators: Vec<AlgebraElement>) -> Result<Self> {
        Self::with_interpretation(generators, Interpretation::Finite)
    }

    pub fn with_interpretation(generators: Vec<AlgebraElement>, interpretation: Interpretation) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::invalid("bounded set needs a generator"))?;
        let d = first.descriptor().clone();
        for g in &generators {
            check_same(&d, g.descriptor())?;
        }
        Ok(Self { generators, interpretation })
    }

    pub fn generators(&self) -> &[AlgebraElement] {
        &self.generators
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn as_hull(&self) -> Self {
        Self { generators: self.generators.clone(), interpretation: Interpretation::Hull }
    }

    pub fn as_finite(&self) -> Self {
        Self { generators: self.generators.clone(), interpretation: Interpretation::Finite }
    }

    pub fn descriptor(&self) -> &Arc<AlgebraDescriptor> {
        self.generators[0].descriptor()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `c·S`.
    pub fn scaled(&self, c: C64) -> Self {
        Self {
            generators: self.generators.iter().map(|g| g.scale(c)).collect(),
            interpretation: self.interpretation,
        }
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        self.scaled(C64::new(c, 0.0))
    }

    /// All products of length `n`, in lexicographic word order.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("power must be at least 1"));
        }
        let mut layer = self.generators.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(layer.len() * self.generators.len());
            for p in &layer {
                for g in &self.generators {
                    next.push(p.multiply(g)?);
                }
            }
            layer = next;
        }
        Self::with_interpretation(layer, self.interpretation)
    }

    /// The union of two sets in the same algebra.
    pub fn union(&self, other: &BoundedSet) -> Result<Self> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Self::with_interpretation(g, self.interpretation)
    }

    /// Generators that are extreme for the real absolutely convex hull.
    /// Each generator lying in the hull of the ones still kept is dropped in
    /// index order, so the hull never changes. The spectral radius of a
    /// hull equals that of its extreme generators.
    pub fn extreme_generators(&self) -> Result<Vec<usize>> {
        let mut kept: Vec<usize> = (0..self.generators.len()).collect();
        let mut i = 0;
        while i < kept.len() && kept.len() > 1 {
            let idx = kept[i];
            let others: Vec<AlgebraElement> =
                kept.iter().filter(|&&j| j != idx).map(|&j| self.generators[j].clone()).collect();
            let g = HullGauge::new(others)?.gauge(&self.generators[idx])?;
            if g <= 1.0 {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(kept)
    }

    /// The generators actually used for spectral radius computations.
    pub fn effective_generators(&self) -> Result<Vec<AlgebraElement>> {
        match self.interpretation {
            Interpretation::Finite => Ok(self.generators.clone()),
            Interpretation::Hull => {
                Ok(self.extreme_generators()?.into_iter().map(|i| self.generators[i].clone()).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraDescriptor, CMatrix, NormKind};

    fn m(rows: &[&[f64]]) -> AlgebraElement {
        AlgebraElement::real_matrix(NormKind::Op2, rows).unwrap()
    }

    fn diag2(a: f64, b: f64) -> AlgebraElement {
        let d = Arc::new(AlgebraDescriptor::direct_sum(vec![AlgebraDescriptor::scalars(), AlgebraDescriptor::scalars()]));
        AlgebraElement::from_blocks(
            d,
            vec![CMatrix::from_element(1, 1, C64::new(a, 0.0)), CMatrix::from_element(1, 1, C64::new(b, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn ball_gauge() {
        let d = Disk::norm_ball(2.0).unwrap();
        assert_eq!(d.gauge(&m(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(), 0.5);
    }

    #[test]
    fn single_generator_hull() {
        let i2 = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let d = Disk::hull(vec![i2.clone()]).unwrap();
        assert!((d.gauge(&i2.scale_real(3.0)).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(d.gauge(&m(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap(), f64::INFINITY);
    }

    /// Independent oracle: with two linearly independent generators the
    /// coefficients are unique, so the gauge is |λ₁| + |λ₂| from a 2×2 solve.
    #[test]
    fn two_generator_hull_matches_direct_solve() {
        let d = Disk::hull(vec![diag2(1.0, 0.0), diag2(0.0, 1.0)]).unwrap();
        assert!((d.gauge(&diag2(1.0, 1.0)).unwrap() - 2.0).abs() < 1e-9);
        let d = Disk::hull(vec![diag2(1.0, 1.0), diag2(1.0, -1.0)]).unwrap();
        // (3, 1) = 2·(1,1) + 1·(1,-1)
        assert!((d.gauge(&diag2(3.0, 1.0)).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_generators_use_the_cheapest_combination() {
        let d = Disk::hull(vec![diag2(1.0, 0.0), diag2(0.0, 1.0), diag2(1.0, 1.0)]).unwrap();
        assert!((d.gauge(&diag2(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_and_sum() {
        let x = m(&[&[0.0, 4.0], &[0.0, 0.0]]);
        let s = Disk::scaled(2.0, Disk::norm_ball(1.0).unwrap()).unwrap();
        assert_eq!(s.gauge(&x).unwrap(), 2.0);
        let sum = Disk::sum(Disk::norm_ball(1.0).unwrap(), Disk::norm_ball(3.0).unwrap()).unwrap();
        assert_eq!(sum.gauge(&x).unwrap(), 1.0);
        let h = Disk::sum(Disk::hull(vec![diag2(1.0, 0.0)]).unwrap(), Disk::hull(vec![diag2(0.0, 1.0)]).unwrap()).unwrap();
        // {±e₁ ± e₂} hull: gauge(e₁+e₂)=1, gauge(e₁)=1.
        assert!((h.gauge(&diag2(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-9);
        assert!((h.gauge(&diag2(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-9);
        assert!(Disk::sum(Disk::norm_ball(1.0).unwrap(), Disk::hull(vec![diag2(1.0, 0.0)]).unwrap()).is_err());
    }

    #[test]
    fn extreme_generators_drop_interior_points() {
        let s = BoundedSet::new(vec![diag2(1.0, 0.0), diag2(0.5, 0.0), diag2(0.0, 1.0), diag2(0.0, 0.0)]).unwrap();
        assert_eq!(s.extreme_generators().unwrap(), vec![0, 2]);
        let dup = BoundedSet::new(vec![diag2(1.0, 2.0), diag2(1.0, 2.0)]).unwrap();
        assert_eq!(dup.extreme_generators().unwrap(), vec![1]);
    }

    #[test]
    fn power_is_lexicographic() {
        let a = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let b = m(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let s = BoundedSet::new(vec![a.clone(), b.clone()]).unwrap().power(2).unwrap();
        assert_eq!(s.generators()[1], a.multiply(&b).unwrap());
        assert_eq!(s.generators()[2], b.multiply(&a).unwrap());
    }
}
