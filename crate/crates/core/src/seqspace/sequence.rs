//! Eventually closed-form sequences of vectors.

use serde::{Deserialize, Serialize};

use super::closed::ClosedForm;
use super::space::Vector;
use crate::error::{Error, Result};

/// One summand of the closed-form tail of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    /// `form(n) · vector` with a finitely supported vector.
    Geometric { form: ClosedForm, vector: Vector },
    /// `P_{a·n + shift}(vector)`: the coordinates `k ≤ a·n + shift`.
    Truncation {
        vector: Vector,
        #[serde(default = "one")]
        a: u64,
        #[serde(default)]
        shift: i64,
    },
}

fn one() -> u64 {
    1
}

impl Term {
    pub fn eval(&self, n: u64) -> Vector {
        match self {
            Term::Geometric { form, vector } => vector.scale(form.eval(n)),
            Term::Truncation { vector, a, shift } => vector.truncate((a * n) as i64 + shift),
        }
    }

    fn negate(&self) -> Term {
        match self {
            Term::Geometric { form, vector } => Term::Geometric { form: form.scale(-1.0), vector: vector.clone() },
            Term::Truncation { vector, a, shift } => Term::Truncation { vector: vector.scale(-1.0), a: *a, shift: *shift },
        }
    }

    fn scale(&self, c: f64) -> Term {
        match self {
            Term::Geometric { form, vector } => Term::Geometric { form: form.scale(c), vector: vector.clone() },
            Term::Truncation { vector, a, shift } => Term::Truncation { vector: vector.scale(c), a: *a, shift: *shift },
        }
    }

    fn subsequence(&self, a2: u64, b2: u64) -> Term {
        match self {
            Term::Geometric { form, vector } => Term::Geometric { form: form.subsequence(a2, b2), vector: vector.clone() },
            Term::Truncation { vector, a, shift } => Term::Truncation { vector: vector.clone(), a: a * a2, shift: shift + (a * b2) as i64 },
        }
    }
}

/// `x_n = prefix[n]` for `n < prefix.len()`, then `x_n = Σ terms(n)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceModel {
    #[serde(default)]
    pub prefix: Vec<Vector>,
    #[serde(default)]
    pub terms: Vec<Term>,
}

impl SequenceModel {
    pub fn new(prefix: Vec<Vector>, terms: Vec<Term>) -> Result<Self> {
        let s = Self { prefix, terms };
        s.validate()?;
        Ok(s)
    }

    /// The constant sequence `v, v, v, …`.
    pub fn constant(v: Vector) -> Self {
        Self { prefix: Vec::new(), terms: vec![Term::Geometric { form: ClosedForm::constant(1.0), vector: v }] }
    }

    /// `x_n = form(n)·v`.
    pub fn scalar_times(form: ClosedForm, v: Vector) -> Self {
        Self { prefix: Vec::new(), terms: vec![Term::Geometric { form, vector: v }] }
    }

    /// Partial sums `x_n = P_n(u)`.
    pub fn partial_sums(u: Vector) -> Self {
        Self { prefix: Vec::new(), terms: vec![Term::Truncation { vector: u, a: 1, shift: 0 }] }
    }

    pub fn start(&self) -> u64 {
        self.prefix.len() as u64
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.prefix {
            v.validate()?;
        }
        for t in &self.terms {
            match t {
                Term::Geometric { form, vector } => {
                    form.validate_from(self.start())?;
                    vector.validate()?;
                    if !vector.is_finite() {
                        return Err(Error::invalid("geometric terms need finitely supported vectors"));
                    }
                }
                Term::Truncation { vector, a, .. } => {
                    vector.validate()?;
                    if *a == 0 {
                        return Err(Error::invalid("truncation index must grow with n"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, n: u64) -> Vector {
        if let Some(v) = self.prefix.get(n as usize) {
            return v.clone();
        }
        self.terms.iter().fold(Vector::zero(), |acc, t| acc.add(&t.eval(n)))
    }

    /// Coordinatewise limit when every term converges.
    pub fn limit(&self) -> Option<Vector> {
        let mut acc = Vector::zero();
        for t in &self.terms {
            match t {
                Term::Geometric { form, vector } => {
                    if form.is_constant() {
                        acc = acc.add(&vector.scale(form.eval(self.start())));
                    } else if !form.is_null() && !vector.is_zero() {
                        return None;
                    }
                }
                Term::Truncation { vector, .. } => acc = acc.add(vector),
            }
        }
        Some(acc)
    }

    pub fn neg(&self) -> Self {
        Self { prefix: self.prefix.iter().map(|v| v.scale(-1.0)).collect(), terms: self.terms.iter().map(Term::negate).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { prefix: self.prefix.iter().map(|v| v.scale(c)).collect(), terms: self.terms.iter().map(|t| t.scale(c)).collect() }
    }

    pub fn add(&self, other: &SequenceModel) -> Self {
        let n = self.prefix.len().max(other.prefix.len());
        let prefix = (0..n as u64).map(|i| self.eval(i).add(&other.eval(i))).collect();
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { prefix, terms }
    }

    pub fn sub(&self, other: &SequenceModel) -> Self {
        self.add(&other.neg())
    }

    /// `n ↦ x_{a·n + b}`.
    pub fn subsequence(&self, a: u64, b: u64) -> Result<Self> {
        if a == 0 {
            return Err(Error::invalid("subsequence index must grow"));
        }
        let start = self.start();
        let mut prefix = Vec::new();
        let mut n = 0;
        while a * n + b < start {
            prefix.push(self.eval(a * n + b));
            n += 1;
        }
        let terms = self.terms.iter().map(|t| t.subsequence(a, b)).collect();
        Ok(Self { prefix, terms })
    }

    /// Applies a coordinate map to every vector of the representation.
    pub fn map_vectors(&self, f: &dyn Fn(&Vector) -> Vector, shift_truncations: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Geometric { form, vector } => Term::Geometric { form: form.clone(), vector: f(vector) },
                Term::Truncation { vector, a, shift } => Term::Truncation { vector: f(vector), a: *a, shift: shift + shift_truncations },
            })
            .collect();
        Self { prefix: self.prefix.iter().map(f).collect(), terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sums_converge_to_the_vector() {
        let u = Vector::closed(ClosedForm::geometric(1.0, 0.5));
        let x = SequenceModel::partial_sums(u.clone());
        assert_eq!(x.eval(2).head, vec![1.0, 0.5, 0.25]);
        assert!(x.limit().unwrap().sub(&u).is_zero());
    }

    #[test]
    fn subsequence_matches_evaluation() {
        let x = SequenceModel {
            prefix: vec![Vector::unit(0), Vector::unit(1), Vector::unit(2)],
            terms: vec![
                Term::Geometric { form: ClosedForm::geometric(1.0, 0.5), vector: Vector::unit(0) },
                Term::Truncation { vector: Vector::closed(ClosedForm::geometric(1.0, 0.25)), a: 1, shift: -1 },
            ],
        };
        let y = x.subsequence(2, 1).unwrap();
        for n in 0..10 {
            assert_eq!(y.eval(n), x.eval(2 * n + 1), "n={n}");
        }
    }

    #[test]
    fn divergent_terms_have_no_limit() {
        let x = SequenceModel::scalar_times(ClosedForm::power(1.0, 0.0, 1.0, 1.0), Vector::unit(0));
        assert!(x.limit().is_none());
        let c = SequenceModel::constant(Vector::unit(1));
        assert_eq!(c.limit().unwrap(), Vector::unit(1));
    }
}
