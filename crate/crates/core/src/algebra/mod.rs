//! Finite-dimensional normed algebras: matrix algebras, direct sums and
//! grid-sampled function algebras.
//!
//! Every element is stored as a flat list of square complex blocks. A
//! direct sum concatenates the blocks of its summands and a grid function
//! algebra concatenates the blocks of its fibers point by point, so
//! multiplication is always blockwise and every norm is a max over blocks.

mod disk;
mod linalg;

pub use disk::{BoundedSet, Disk, HullGauge, Interpretation};
pub use linalg::{block_norm, block_spectral_radius, OP2_MAX_ITER, OP2_TOLERANCE};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Complex scalar.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance for norms and eigenvalues.
pub const RADIUS_TOLERANCE: f64 = 1e-9;
/// Tolerance of the rank test used to detect points outside a span.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Feasibility tolerance for the hull-gauge linear program.
pub const LP_TOLERANCE: f64 = 1e-9;

/// Builds a complex scalar, rejecting NaN and infinities.
pub fn scalar(re: f64, im: f64) -> Result<C64> {
    if re.is_finite() && im.is_finite() {
        Ok(C64::new(re, im))
    } else {
        Err(Error::invalid(format!("non-finite scalar ({re}, {im})")))
    }
}

/// Which norm a matrix algebra carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// Largest singular value.
    Op2,
    /// Maximum absolute row sum.
    MaxRow,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Op2 => "op2",
            NormKind::MaxRow => "maxrow",
        }
    }
}

/// A finite metric space given by explicit points and a distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    distances: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(points: Vec<f64>, distances: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::invalid("grid must be nonempty"));
        }
        if distances.len() != n || distances.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("distance table must be square and match the points"));
        }
        for i in 0..n {
            if !points[i].is_finite() {
                return Err(Error::invalid("grid points must be finite"));
            }
            for j in 0..n {
                let d = distances[i][j];
                if !d.is_finite() || d < 0.0 || (i == j && d != 0.0) || d != distances[j][i] {
                    return Err(Error::invalid("distance table is not a metric table"));
                }
            }
        }
        Ok(Self { points, distances })
    }

    /// Points on the real line with the absolute-value metric.
    pub fn on_line(points: Vec<f64>) -> Result<Self> {
        let distances = points
            .iter()
            .map(|x| points.iter().map(|y| (x - y).abs()).collect())
            .collect();
        Self::new(points, distances)
    }

    /// `m` equally spaced angles `2πj/m` on the circle with arc-length metric.
    pub fn circle(m: usize) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        let points: Vec<f64> = (0..m).map(|j| tau * j as f64 / m as f64).collect();
        let distances = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let k = i.abs_diff(j).min(m - i.abs_diff(j));
                        tau * k as f64 / m as f64
                    })
                    .collect()
            })
            .collect();
        Self::new(points, distances)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }
}

/// Shape and norm of a model algebra. Equality is structural.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraDescriptor {
    Matrix { dim: usize, norm: NormKind },
    DirectSum(Vec<AlgebraDescriptor>),
    Grid { grid: Grid, fiber: Box<AlgebraDescriptor> },
}

impl AlgebraDescriptor {
    pub fn matrix(dim: usize, norm: NormKind) -> Self {
        AlgebraDescriptor::Matrix { dim, norm }
    }

    /// The complex numbers as the 1×1 matrix algebra.
    pub fn scalars() -> Self {
        Self::matrix(1, NormKind::Op2)
    }

    pub fn direct_sum(parts: Vec<AlgebraDescriptor>) -> Self {
        AlgebraDescriptor::DirectSum(parts)
    }

    pub fn grid(grid: Grid, fiber: AlgebraDescriptor) -> Self {
        AlgebraDescriptor::Grid { grid, fiber: Box::new(fiber) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgebraDescriptor::Matrix { dim, .. } => {
                if *dim == 0 {
                    return Err(Error::invalid("matrix algebra dimension must be at least 1"));
                }
                Ok(())
            }
            AlgebraDescriptor::DirectSum(parts) => {
                if parts.is_empty() {
                    return Err(Error::invalid("direct sum must have at least one summand"));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
            AlgebraDescriptor::Grid { grid, fiber } => {
                if grid.is_empty() {
                    return Err(Error::invalid("grid must be nonempty"));
                }
                fiber.validate()
            }
        }
    }

    /// Flattened list of `(dim, norm)` for every block.
    pub fn leaves(&self) -> Vec<(usize, NormKind)> {
        let mut out = Vec::new();
        self.push_leaves(&mut out);
        out
    }

    fn push_leaves(&self, out: &mut Vec<(usize, NormKind)>) {
        match self {
            AlgebraDescriptor::Matrix { dim, norm } => out.push((*dim, *norm)),
            AlgebraDescriptor::DirectSum(parts) => parts.iter().for_each(|p| p.push_leaves(out)),
            AlgebraDescriptor::Grid { grid, fiber } => {
                for _ in 0..grid.len() {
                    fiber.push_leaves(out);
                }
            }
        }
    }

    pub fn block_count(&self) -> usize {
        match self {
            AlgebraDescriptor::Matrix { .. } => 1,
            AlgebraDescriptor::DirectSum(parts) => parts.iter().map(|p| p.block_count()).sum(),
            AlgebraDescriptor::Grid { grid, fiber } => grid.len() * fiber.block_count(),
        }
    }

    /// Complex dimension of the algebra as a vector space.
    pub fn coord_dim(&self) -> usize {
        self.leaves().iter().map(|(d, _)| d * d).sum()
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraDescriptor::Matrix { dim, norm } => write!(f, "M{dim}[{}]", norm.as_str()),
            AlgebraDescriptor::DirectSum(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊕ ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            AlgebraDescriptor::Grid { grid, fiber } => write!(f, "C(grid{}, {fiber})", grid.len()),
        }
    }
}

fn same_descriptor(a: &Arc<AlgebraDescriptor>, b: &Arc<AlgebraDescriptor>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn check_same(a: &Arc<AlgebraDescriptor>, b: &Arc<AlgebraDescriptor>) -> Result<()> {
    if same_descriptor(a, b) {
        Ok(())
    } else {
        Err(Error::DescriptorMismatch { left: a.to_string(), right: b.to_string() })
    }
}

/// An element of a model algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    descriptor: Arc<AlgebraDescriptor>,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn from_blocks(descriptor: Arc<AlgebraDescriptor>, blocks: Vec<CMatrix>) -> Result<Self> {
        descriptor.validate()?;
        let leaves = descriptor.leaves();
        if leaves.len() != blocks.len() {
            return Err(Error::invalid(format!(
                "{} blocks given, descriptor {} needs {}",
                blocks.len(),
                descriptor,
                leaves.len()
            )));
        }
        for ((dim, _), block) in leaves.iter().zip(&blocks) {
            if block.nrows() != *dim || block.ncols() != *dim {
                return Err(Error::invalid(format!(
                    "block of shape {}x{} where {dim}x{dim} expected",
                    block.nrows(),
                    block.ncols()
                )));
            }
            if block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid("algebra elements must have finite entries"));
            }
        }
        Ok(Self { descriptor, blocks })
    }

    /// Element of a matrix algebra from real row-major entries.
    pub fn real_matrix(norm: NormKind, rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square"));
        }
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::from_blocks(Arc::new(AlgebraDescriptor::matrix(n, norm)), vec![m])
    }

    /// Element of a matrix algebra from a dense complex matrix.
    pub fn from_matrix(norm: NormKind, m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid("matrix must be square"));
        }
        Self::from_blocks(Arc::new(AlgebraDescriptor::matrix(m.nrows(), norm)), vec![m])
    }

    /// A complex number as an element of the 1×1 algebra.
    pub fn scalar(z: C64) -> Result<Self> {
        Self::from_blocks(Arc::new(AlgebraDescriptor::scalars()), vec![CMatrix::from_element(1, 1, z)])
    }

    pub fn zeros(descriptor: Arc<AlgebraDescriptor>) -> Self {
        let blocks = descriptor.leaves().iter().map(|(d, _)| CMatrix::zeros(*d, *d)).collect();
        Self { descriptor, blocks }
    }

    pub fn identity(descriptor: Arc<AlgebraDescriptor>) -> Self {
        let blocks = descriptor.leaves().iter().map(|(d, _)| CMatrix::identity(*d, *d)).collect();
        Self { descriptor, blocks }
    }

    /// Builds an element from its standard complex coordinates (block by
    /// block, row-major inside each block).
    pub fn from_coords(descriptor: Arc<AlgebraDescriptor>, coords: &[C64]) -> Result<Self> {
        let leaves = descriptor.leaves();
        let total: usize = leaves.iter().map(|(d, _)| d * d).sum();
        if coords.len() != total {
            return Err(Error::invalid(format!("{} coordinates given, {total} expected", coords.len())));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(leaves.len());
        for (d, _) in leaves {
            blocks.push(CMatrix::from_fn(d, d, |i, j| coords[offset + i * d + j]));
            offset += d * d;
        }
        Self::from_blocks(descriptor, blocks)
    }

    pub fn coords(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.descriptor.coord_dim());
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out.push(b[(i, j)]);
                }
            }
        }
        out
    }

    /// Real coordinates `[re, im, re, im, ...]` of the standard coordinates.
    pub fn real_coords(&self) -> Vec<f64> {
        self.coords().iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// Direct sum of elements.
    pub fn direct_sum(parts: &[AlgebraElement]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("direct sum of no elements"));
        }
        let desc = AlgebraDescriptor::direct_sum(parts.iter().map(|p| (*p.descriptor).clone()).collect());
        let blocks = parts.iter().flat_map(|p| p.blocks.iter().cloned()).collect();
        Self::from_blocks(Arc::new(desc), blocks)
    }

    /// Grid function whose value at point `i` is `fibers[i]`.
    pub fn grid_function(grid: Grid, fibers: &[AlgebraElement]) -> Result<Self> {
        if fibers.len() != grid.len() {
            return Err(Error::invalid("one fiber value per grid point is required"));
        }
        let fiber_desc = fibers[0].descriptor.clone();
        for f in fibers {
            check_same(&fiber_desc, &f.descriptor)?;
        }
        let desc = Arc::new(AlgebraDescriptor::grid(grid, (*fiber_desc).clone()));
        Self::from_blocks(desc, fibers.iter().flat_map(|f| f.blocks.iter().cloned()).collect())
    }

    /// Value at grid point `point`, as an element of the fiber algebra.
    pub fn fiber(&self, point: usize) -> Result<AlgebraElement> {
        match &*self.descriptor {
            AlgebraDescriptor::Grid { grid, fiber } => {
                if point >= grid.len() {
                    return Err(Error::invalid(format!("grid point {point} out of range")));
                }
                let per = fiber.block_count();
                let blocks = self.blocks[point * per..(point + 1) * per].to_vec();
                Ok(AlgebraElement { descriptor: Arc::new((**fiber).clone()), blocks })
            }
            other => Err(Error::invalid(format!("{other} is not a grid function algebra"))),
        }
    }

    pub fn descriptor(&self) -> &Arc<AlgebraDescriptor> {
        &self.descriptor
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn multiply(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        check_same(&self.descriptor, &other.descriptor)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        Ok(AlgebraElement { descriptor: self.descriptor.clone(), blocks })
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        check_same(&self.descriptor, &other.descriptor)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Ok(AlgebraElement { descriptor: self.descriptor.clone(), blocks })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        check_same(&self.descriptor, &other.descriptor)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(AlgebraElement { descriptor: self.descriptor.clone(), blocks })
    }

    pub fn scale(&self, c: C64) -> AlgebraElement {
        AlgebraElement {
            descriptor: self.descriptor.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> AlgebraElement {
        self.scale(C64::new(c, 0.0))
    }

    /// Embeds a matrix-algebra element into the top-left corner of `M_n`.
    pub fn pad_to(&self, n: usize) -> Result<AlgebraElement> {
        match &*self.descriptor {
            AlgebraDescriptor::Matrix { dim, norm } => {
                if n < *dim {
                    return Err(Error::invalid(format!("cannot pad M{dim} into M{n}")));
                }
                let mut m = CMatrix::zeros(n, n);
                m.view_mut((0, 0), (*dim, *dim)).copy_from(&self.blocks[0]);
                Self::from_matrix(*norm, m)
            }
            other => Err(Error::invalid(format!("padding needs a matrix algebra, got {other}"))),
        }
    }

    /// Kronecker product of two matrix-algebra elements. The result carries
    /// the norm kind of `self`.
    pub fn kronecker(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        match (&*self.descriptor, &*other.descriptor) {
            (AlgebraDescriptor::Matrix { norm, .. }, AlgebraDescriptor::Matrix { .. }) => {
                Self::from_matrix(*norm, self.blocks[0].kronecker(&other.blocks[0]))
            }
            _ => Err(Error::invalid("Kronecker products need matrix-algebra elements")),
        }
    }

    pub fn norm(&self) -> Result<f64> {
        let leaves = self.descriptor.leaves();
        let mut best = 0.0_f64;
        for ((_, kind), block) in leaves.iter().zip(&self.blocks) {
            best = best.max(block_norm(block, *kind)?);
        }
        Ok(best)
    }

    /// Largest eigenvalue modulus, maximized over blocks.
    pub fn spectral_radius(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for block in &self.blocks {
            best = best.max(block_spectral_radius(block)?);
        }
        Ok(best)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }

    /// Largest entry modulus, used for overflow guards.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `multiply` as a free function.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.multiply(b)
}

/// `norm` as a free function.
pub fn norm(a: &AlgebraElement) -> Result<f64> {
    a.norm()
}

/// Spectral radius of a single element.
pub fn spectral_radius_single(a: &AlgebraElement) -> Result<f64> {
    a.spectral_radius()
}
