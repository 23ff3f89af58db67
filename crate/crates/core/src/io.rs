//! JSON documents for POVMs, states and bipartite models.
//!
//! Complex entries are `[re, im]` pairs, matrices are row-major with explicit
//! dimensions. Floats are written in shortest round-trip form, so a document
//! read back yields bit-identical values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::povm::{PovmElement, PovmSet};
use crate::qfi::StatePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: self.entries.len(),
            });
        }
        check_finite(&self.entries)?;
        Ok(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.entries.iter().map(|&[a, b]| c(a, b)),
        ))
    }

    pub fn to_square(&self, dim: usize) -> Result<CMatrix> {
        if self.rows != dim || self.cols != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.rows.max(self.cols),
            });
        }
        self.to_matrix()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl VectorDoc {
    pub fn from_vector(v: &CVector) -> Self {
        Self {
            dim: v.len(),
            entries: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if self.entries.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.entries.len(),
            });
        }
        check_finite(&self.entries)?;
        Ok(CVector::from_iterator(
            self.dim,
            self.entries.iter().map(|&[a, b]| c(a, b)),
        ))
    }
}

fn check_finite(entries: &[[f64; 2]]) -> Result<()> {
    if entries.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite matrix entry".into()))
    }
}

/// A state and its derivative at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub x: f64,
    pub psi: VectorDoc,
    pub dpsi: VectorDoc,
}

impl StateDoc {
    pub fn from_point(point: &StatePoint) -> Self {
        Self {
            x: point.x,
            psi: VectorDoc::from_vector(&point.psi),
            dpsi: VectorDoc::from_vector(&point.dpsi),
        }
    }

    pub fn to_point(&self) -> Result<StatePoint> {
        StatePoint::from_vectors(self.x, self.psi.to_vector()?, self.dpsi.to_vector()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub label: String,
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmDocument {
    pub dim: usize,
    pub elements: Vec<ElementDoc>,
    pub retained: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateDoc>,
}

impl PovmDocument {
    pub fn new(povm: &PovmSet, state: Option<&StatePoint>) -> Self {
        Self {
            dim: povm.dim(),
            elements: povm
                .elements()
                .iter()
                .map(|e| ElementDoc {
                    label: e.label.clone(),
                    matrix: MatrixDoc::from_matrix(&e.operator),
                })
                .collect(),
            retained: povm.retained_labels().iter().cloned().collect(),
            state: state.map(StateDoc::from_point),
        }
    }

    pub fn povm(&self) -> Result<PovmSet> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                Ok(PovmElement {
                    label: e.label.clone(),
                    operator: e.matrix.to_square(self.dim)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PovmSet::new(elements, &self.retained)
    }

    pub fn point(&self) -> Result<Option<StatePoint>> {
        self.state.as_ref().map(StateDoc::to_point).transpose()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
