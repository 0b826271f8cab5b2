//! JSON encodings of descriptors, elements and linear maps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, BoundedSet, CMatrix, Grid, Interpretation, NormKind, C64};
use crate::error::{Error, Result};
use crate::maps::LinearMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormJson {
    Op2,
    Maxrow,
}

fn op2() -> NormJson {
    NormJson::Op2
}

impl From<NormJson> for NormKind {
    fn from(n: NormJson) -> Self {
        match n {
            NormJson::Op2 => NormKind::Op2,
            NormJson::Maxrow => NormKind::MaxRow,
        }
    }
}

impl From<NormKind> for NormJson {
    fn from(n: NormKind) -> Self {
        match n {
            NormKind::Op2 => NormJson::Op2,
            NormKind::MaxRow => NormJson::Maxrow,
        }
    }
}

/// `{"kind": "matrix", "dim": n, "norm": "op2"}` and friends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DescriptorJson {
    Matrix {
        dim: usize,
        #[serde(default = "op2")]
        norm: NormJson,
    },
    Sum {
        parts: Vec<DescriptorJson>,
    },
    /// Distances default to the metric of the real line.
    Grid {
        points: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<Vec<f64>>>,
        fiber: Box<DescriptorJson>,
    },
}

impl DescriptorJson {
    pub fn decode(&self) -> Result<AlgebraDescriptor> {
        let d = match self {
            DescriptorJson::Matrix { dim, norm } => AlgebraDescriptor::matrix(*dim, (*norm).into()),
            DescriptorJson::Sum { parts } => AlgebraDescriptor::direct_sum(parts.iter().map(|p| p.decode()).collect::<Result<_>>()?),
            DescriptorJson::Grid { points, distances, fiber } => {
                let grid = match distances {
                    Some(d) => Grid::new(points.clone(), d.clone())?,
                    None => Grid::on_line(points.clone())?,
                };
                AlgebraDescriptor::grid(grid, fiber.decode()?)
            }
        };
        d.validate()?;
        Ok(d)
    }

    pub fn encode(d: &AlgebraDescriptor) -> Self {
        match d {
            AlgebraDescriptor::Matrix { dim, norm } => DescriptorJson::Matrix { dim: *dim, norm: (*norm).into() },
            AlgebraDescriptor::DirectSum(parts) => DescriptorJson::Sum { parts: parts.iter().map(Self::encode).collect() },
            AlgebraDescriptor::Grid { grid, fiber } => DescriptorJson::Grid {
                points: grid.points().to_vec(),
                distances: Some(grid.distances().to_vec()),
                fiber: Box::new(Self::encode(fiber)),
            },
        }
    }
}

/// A real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

impl EntryJson {
    fn value(self) -> C64 {
        match self {
            EntryJson::Real(x) => C64::new(x, 0.0),
            EntryJson::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Row-major rows of entries.
pub type MatrixJson = Vec<Vec<EntryJson>>;

pub fn decode_matrix(m: &MatrixJson) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| m[i][j].value()))
}

pub fn encode_matrix(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| EntryJson::Complex([m[(i, j)].re, m[(i, j)].im])).collect()).collect()
}

/// A single matrix for matrix algebras, or one matrix per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementJson {
    Matrix(MatrixJson),
    Blocks { blocks: Vec<MatrixJson> },
}

impl ElementJson {
    pub fn decode(&self, desc: &Arc<AlgebraDescriptor>) -> Result<AlgebraElement> {
        let blocks = match self {
            ElementJson::Matrix(m) => vec![decode_matrix(m)?],
            ElementJson::Blocks { blocks } => blocks.iter().map(decode_matrix).collect::<Result<_>>()?,
        };
        AlgebraElement::from_blocks(desc.clone(), blocks)
    }

    pub fn encode(x: &AlgebraElement) -> Self {
        match x.blocks() {
            [m] => ElementJson::Matrix(encode_matrix(m)),
            blocks => ElementJson::Blocks { blocks: blocks.iter().map(encode_matrix).collect() },
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            ElementJson::Matrix(m) => Some(m.len()),
            ElementJson::Blocks { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationJson {
    #[default]
    Finite,
    Hull,
}

/// Generators in one algebra; the descriptor defaults to `M_n` with the
/// operator 2-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<DescriptorJson>,
    pub generators: Vec<ElementJson>,
    #[serde(default)]
    pub interpretation: InterpretationJson,
}

impl SetJson {
    pub fn decode(&self) -> Result<BoundedSet> {
        let desc = match &self.descriptor {
            Some(d) => d.decode()?,
            None => {
                let dim = self.generators.first().and_then(ElementJson::dim).ok_or_else(|| Error::invalid("a descriptor is needed for block elements"))?;
                AlgebraDescriptor::matrix(dim, NormKind::Op2)
            }
        };
        let desc = Arc::new(desc);
        let gens = self.generators.iter().map(|g| g.decode(&desc)).collect::<Result<Vec<_>>>()?;
        let interp = match self.interpretation {
            InterpretationJson::Finite => Interpretation::Finite,
            InterpretationJson::Hull => Interpretation::Hull,
        };
        BoundedSet::with_interpretation(gens, interp)
    }

    pub fn encode(s: &BoundedSet) -> Self {
        Self {
            descriptor: Some(DescriptorJson::encode(s.descriptor())),
            generators: s.generators().iter().map(ElementJson::encode).collect(),
            interpretation: match s.interpretation() {
                Interpretation::Finite => InterpretationJson::Finite,
                Interpretation::Hull => InterpretationJson::Hull,
            },
        }
    }
}

/// `{"source", "target", "basis_action"}`: column `j` holds the target
/// coordinates of the image of the `j`-th standard basis element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub source: DescriptorJson,
    pub target: DescriptorJson,
    pub basis_action: MatrixJson,
}

impl MapJson {
    pub fn decode(&self) -> Result<LinearMap> {
        LinearMap::from_action(Arc::new(self.source.decode()?), Arc::new(self.target.decode()?), None, decode_matrix(&self.basis_action)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_pair_decodes_with_default_descriptor() {
        let s: SetJson = serde_json::from_str(r#"{"generators": [[[1,1],[0,1]], [[1,0],[1,1]]]}"#).unwrap();
        let set = s.decode().unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(**set.descriptor(), AlgebraDescriptor::matrix(2, NormKind::Op2));
        let back = SetJson::encode(&set).decode().unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn unknown_descriptor_fields_are_rejected() {
        let bad = serde_json::from_str::<DescriptorJson>(r#"{"kind": "matrix", "dim": 2, "colour": 1}"#);
        assert!(bad.is_err());
        let ok: DescriptorJson = serde_json::from_str(r#"{"kind": "sum", "parts": [{"kind": "matrix", "dim": 1}, {"kind": "matrix", "dim": 2, "norm": "maxrow"}]}"#).unwrap();
        assert_eq!(ok.decode().unwrap().coord_dim(), 5);
    }

    #[test]
    fn complex_entries() {
        let e: ElementJson = serde_json::from_str("[[[0, 1]]]").unwrap();
        let x = e.decode(&Arc::new(AlgebraDescriptor::matrix(1, NormKind::Op2))).unwrap();
        assert_eq!(x.blocks()[0][(0, 0)], C64::new(0.0, 1.0));
    }
}
