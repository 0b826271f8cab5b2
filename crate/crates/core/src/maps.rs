//! Linear maps between model algebras, given by their action on a declared
//! basis of the source, and homomorphisms as linear maps with a vanishing
//! multiplicativity defect.

use std::ops::Deref;
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::algebra::{check_same, AlgebraDescriptor, AlgebraElement, CMatrix, NormKind, C64, RANK_TOLERANCE};
use crate::error::{Error, Result};

/// Largest multiplicativity defect tolerated for a homomorphism.
pub const HOMOMORPHISM_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
struct SourceBasis {
    elements: Vec<AlgebraElement>,
    matrix: CMatrix,
    pinv: CMatrix,
    standard: bool,
}

impl PartialEq for SourceBasis {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

/// The standard basis of an algebra: one matrix unit per coordinate.
pub fn standard_basis(desc: &Arc<AlgebraDescriptor>) -> Vec<AlgebraElement> {
    let n = desc.coord_dim();
    (0..n)
        .map(|i| {
            let mut c = vec![C64::new(0.0, 0.0); n];
            c[i] = C64::new(1.0, 0.0);
            AlgebraElement::from_coords(desc.clone(), &c).expect("standard basis coordinates")
        })
        .collect()
}

fn coords_vector(x: &AlgebraElement) -> DVector<C64> {
    DVector::from_vec(x.coords())
}

impl SourceBasis {
    fn new(elements: Vec<AlgebraElement>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::invalid("a source basis needs at least one element"))?;
        let desc = first.descriptor().clone();
        for e in &elements {
            check_same(&desc, e.descriptor())?;
        }
        let n = desc.coord_dim();
        let k = elements.len();
        let cols: Vec<Vec<C64>> = elements.iter().map(|e| e.coords()).collect();
        let matrix = CMatrix::from_fn(n, k, |i, j| cols[j][i]);
        let standard = k == n && matrix == CMatrix::identity(n, n);
        let pinv = if standard {
            CMatrix::identity(n, n)
        } else {
            let svd = matrix.clone().svd(true, true);
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
            if k > n || smax == 0.0 || smin <= RANK_TOLERANCE * smax {
                return Err(Error::invalid("source basis is not linearly independent"));
            }
            svd.pseudo_inverse(0.0).map_err(|e| Error::invalid(e.to_string()))?
        };
        Ok(Self { elements, matrix, pinv, standard })
    }

    fn descriptor(&self) -> &Arc<AlgebraDescriptor> {
        self.elements[0].descriptor()
    }

    fn coordinates(&self, x: &AlgebraElement) -> Result<DVector<C64>> {
        check_same(self.descriptor(), x.descriptor())?;
        let xv = coords_vector(x);
        if self.standard {
            return Ok(xv);
        }
        let c = &self.pinv * &xv;
        let xn = xv.norm();
        if xn > 0.0 {
            let residual = (&self.matrix * &c - &xv).norm() / xn;
            if residual > RANK_TOLERANCE {
                return Err(Error::OutsideDomain { residual });
            }
        }
        Ok(c)
    }
}

/// A linear map `source → target`; column `j` of `action` holds the
/// standard target coordinates of the image of basis element `j`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    basis: Arc<SourceBasis>,
    target: Arc<AlgebraDescriptor>,
    action: CMatrix,
}

impl LinearMap {
    /// The map sending `basis[j]` to `images[j]`.
    pub fn new(basis: Vec<AlgebraElement>, images: Vec<AlgebraElement>) -> Result<Self> {
        if basis.len() != images.len() {
            return Err(Error::invalid("one image per basis element is required"));
        }
        let first = images.first().ok_or_else(|| Error::invalid("empty map"))?;
        let target = first.descriptor().clone();
        for y in &images {
            check_same(&target, y.descriptor())?;
        }
        let basis = Arc::new(SourceBasis::new(basis)?);
        let cols: Vec<Vec<C64>> = images.iter().map(|y| y.coords()).collect();
        let action = CMatrix::from_fn(target.coord_dim(), cols.len(), |i, j| cols[j][i]);
        Ok(Self { basis, target, action })
    }

    /// The map with the given action matrix on `basis` (the standard basis
    /// of `source` when `None`).
    pub fn from_action(
        source: Arc<AlgebraDescriptor>,
        target: Arc<AlgebraDescriptor>,
        basis: Option<Vec<AlgebraElement>>,
        action: CMatrix,
    ) -> Result<Self> {
        source.validate()?;
        target.validate()?;
        let basis = basis.unwrap_or_else(|| standard_basis(&source));
        if let Some(b) = basis.first() {
            check_same(&source, b.descriptor())?;
        }
        if action.nrows() != target.coord_dim() || action.ncols() != basis.len() {
            return Err(Error::invalid(format!(
                "action is {}x{}, expected {}x{}",
                action.nrows(),
                action.ncols(),
                target.coord_dim(),
                basis.len()
            )));
        }
        if action.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("action entries must be finite"));
        }
        Ok(Self { basis: Arc::new(SourceBasis::new(basis)?), target, action })
    }

    pub fn identity(desc: Arc<AlgebraDescriptor>) -> Result<Self> {
        let n = desc.coord_dim();
        Self::from_action(desc.clone(), desc, None, CMatrix::identity(n, n))
    }

    pub fn source(&self) -> &Arc<AlgebraDescriptor> {
        self.basis.descriptor()
    }

    pub fn target(&self) -> &Arc<AlgebraDescriptor> {
        &self.target
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis.elements
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    /// Image of basis element `j`.
    pub fn image(&self, j: usize) -> AlgebraElement {
        let col: Vec<C64> = self.action.column(j).iter().copied().collect();
        AlgebraElement::from_coords(self.target.clone(), &col).expect("action column matches target")
    }

    /// Coordinates of `x` in the declared basis.
    pub fn coordinates(&self, x: &AlgebraElement) -> Result<DVector<C64>> {
        self.basis.coordinates(x)
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let c = self.coordinates(x)?;
        let y = &self.action * c;
        AlgebraElement::from_coords(self.target.clone(), y.as_slice())
    }

    /// `self ∘ inner`, declared on the basis of `inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        check_same(self.source(), &inner.target)?;
        let images = (0..inner.basis().len())
            .map(|j| self.apply(&inner.image(j)))
            .collect::<Result<Vec<_>>>()?;
        let cols: Vec<Vec<C64>> = images.iter().map(|y| y.coords()).collect();
        let action = CMatrix::from_fn(self.target.coord_dim(), cols.len(), |i, j| cols[j][i]);
        Ok(LinearMap { basis: inner.basis.clone(), target: self.target.clone(), action })
    }

    fn check_compatible(&self, other: &LinearMap) -> Result<()> {
        check_same(&self.target, &other.target)?;
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::invalid("maps are declared on different source bases"))
        }
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        self.check_compatible(other)?;
        Ok(LinearMap { basis: self.basis.clone(), target: self.target.clone(), action: &self.action + &other.action })
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap> {
        self.check_compatible(other)?;
        Ok(LinearMap { basis: self.basis.clone(), target: self.target.clone(), action: &self.action - &other.action })
    }

    pub fn scale(&self, c: C64) -> LinearMap {
        LinearMap { basis: self.basis.clone(), target: self.target.clone(), action: &self.action * c }
    }

    pub fn scale_real(&self, c: f64) -> LinearMap {
        self.scale(C64::new(c, 0.0))
    }

    /// Largest basis-image norm.
    pub fn basis_image_norm(&self) -> Result<f64> {
        (0..self.basis().len()).try_fold(0.0_f64, |m, j| Ok(m.max(self.image(j).norm()?)))
    }
}

/// Outcome of recomputing the multiplicativity defect.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativityReport {
    /// `max ‖f(eᵢeⱼ) − f(eᵢ)f(eⱼ)‖` over basis pairs; `+∞` when some
    /// product of basis elements leaves the declared span.
    pub defect: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub flagged: bool,
}

pub fn check_multiplicative(f: &LinearMap) -> Result<MultiplicativityReport> {
    let k = f.basis().len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let images: Vec<AlgebraElement> = (0..k).map(|j| f.image(j)).collect();
    let defects = pairs
        .par_iter()
        .map(|&(i, j)| {
            let prod = f.basis()[i].multiply(&f.basis()[j])?;
            let lhs = match f.apply(&prod) {
                Ok(v) => v,
                Err(Error::OutsideDomain { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            };
            lhs.sub(&images[i].multiply(&images[j])?)?.norm()
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut defect = 0.0;
    let mut worst_pair = None;
    for (p, d) in pairs.iter().zip(defects) {
        if d > defect {
            defect = d;
            worst_pair = Some(*p);
        }
    }
    Ok(MultiplicativityReport { defect, worst_pair, flagged: defect > HOMOMORPHISM_TOLERANCE })
}

/// A linear map whose multiplicativity defect is at most 1e-9.
#[derive(Clone, Debug)]
pub struct Homomorphism {
    map: LinearMap,
    mult_defect: f64,
}

impl Homomorphism {
    pub fn new(map: LinearMap) -> Result<Self> {
        let report = check_multiplicative(&map)?;
        if report.flagged {
            return Err(Error::Precondition(format!(
                "multiplicativity defect {:e} at basis pair {:?}",
                report.defect, report.worst_pair
            )));
        }
        Ok(Self { map, mult_defect: report.defect })
    }

    pub fn mult_defect(&self) -> f64 {
        self.mult_defect
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn into_map(self) -> LinearMap {
        self.map
    }
}

impl Deref for Homomorphism {
    type Target = LinearMap;

    fn deref(&self) -> &LinearMap {
        &self.map
    }
}

/// Top-left corner embedding `M_k → M_n`.
pub fn corner_embedding(k: usize, n: usize, norm: NormKind) -> Result<LinearMap> {
    if k == 0 || n < k {
        return Err(Error::invalid(format!("no corner embedding M{k} → M{n}")));
    }
    let source = Arc::new(AlgebraDescriptor::matrix(k, norm));
    let basis = standard_basis(&source);
    let images = basis.iter().map(|b| b.pad_to(n)).collect::<Result<Vec<_>>>()?;
    LinearMap::new(basis, images)
}

/// Transpose on `M_n`, an anti-homomorphism.
pub fn transpose_map(n: usize, norm: NormKind) -> Result<LinearMap> {
    let source = Arc::new(AlgebraDescriptor::matrix(n, norm));
    let basis = standard_basis(&source);
    let images = basis
        .iter()
        .map(|b| AlgebraElement::from_matrix(norm, b.blocks()[0].transpose()))
        .collect::<Result<Vec<_>>>()?;
    LinearMap::new(basis, images)
}

/// Compression `X ↦ P_k X P_k` of `M_n` onto the top-left `M_k`, as a map
/// into `M_k`.
pub fn corner_compression(n: usize, k: usize, norm: NormKind) -> Result<LinearMap> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("no compression M{n} → M{k}")));
    }
    let source = Arc::new(AlgebraDescriptor::matrix(n, norm));
    let basis = standard_basis(&source);
    let images = basis
        .iter()
        .map(|b| AlgebraElement::from_matrix(norm, b.blocks()[0].view((0, 0), (k, k)).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    LinearMap::new(basis, images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_corner_are_multiplicative() {
        let d = Arc::new(AlgebraDescriptor::matrix(2, NormKind::Op2));
        assert_eq!(check_multiplicative(&LinearMap::identity(d).unwrap()).unwrap().defect, 0.0);
        let c = corner_embedding(2, 3, NormKind::Op2).unwrap();
        assert_eq!(check_multiplicative(&c).unwrap().defect, 0.0);
        assert!(Homomorphism::new(c).is_ok());
    }

    /// (E₁₂E₂₁)ᵀ = E₁₁ while E₁₂ᵀE₂₁ᵀ = E₂₁E₁₂ = E₂₂, so the defect is
    /// ‖E₁₁ − E₂₂‖ = 1.
    #[test]
    fn transpose_is_not_multiplicative() {
        let t = transpose_map(2, NormKind::Op2).unwrap();
        let r = check_multiplicative(&t).unwrap();
        assert!(r.flagged);
        assert!((r.defect - 1.0).abs() < 1e-12);
        assert!(matches!(Homomorphism::new(t), Err(Error::Precondition(_))));
    }

    #[test]
    fn non_standard_basis_and_domain_errors() {
        let d = Arc::new(AlgebraDescriptor::matrix(2, NormKind::Op2));
        let i = AlgebraElement::identity(d.clone());
        let e11 = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let f = LinearMap::new(vec![i.clone(), e11.clone()], vec![i.scale_real(2.0), e11.clone()]).unwrap();
        let x = AlgebraElement::real_matrix(NormKind::Op2, &[&[3.0, 0.0], &[0.0, 1.0]]).unwrap();
        // x = I + 2·E₁₁ ↦ 2I + 2E₁₁
        let y = f.apply(&x).unwrap();
        assert!(y.sub(&AlgebraElement::real_matrix(NormKind::Op2, &[&[4.0, 0.0], &[0.0, 2.0]]).unwrap()).unwrap().norm().unwrap() < 1e-12);
        let off = AlgebraElement::real_matrix(NormKind::Op2, &[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(f.apply(&off), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn composition_and_compression() {
        let emb = corner_embedding(2, 4, NormKind::Op2).unwrap();
        let comp = corner_compression(4, 2, NormKind::Op2).unwrap();
        let round = comp.compose(&emb).unwrap();
        let x = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(round.apply(&x).unwrap(), x);
    }
}
