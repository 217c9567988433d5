use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::skewed_frame_matrix;
use crate::qla::{self, Operator, StateVector};

/// Coordinate frame the column coefficients are written in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Computational,
    /// Product frame `|0,0⟩, |0,1⟩, |1,φ⟩, |1,φ⊥⟩` with `|φ⟩ = cos τ|0⟩ + sin τ|1⟩`.
    Skewed { tau: f64 },
}

/// An ordered orthonormal basis of `C^{d_A} ⊗ C^{d_B}`, stored as the
/// columns of a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    matrix: Operator,
    frame: Frame,
    dims: (usize, usize),
}

impl Basis {
    /// Two-qubit basis in the given frame.
    pub fn new(matrix: Operator, frame: Frame) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: matrix.dim(),
            });
        }
        Ok(Self {
            matrix,
            frame,
            dims: (2, 2),
        })
    }

    pub fn computational(matrix: Operator) -> Result<Self> {
        Self::new(matrix, Frame::Computational)
    }

    /// Basis of `C^{d_A} ⊗ C^{d_B}` in the computational frame.
    pub fn bipartite(matrix: Operator, dims: (usize, usize)) -> Result<Self> {
        if matrix.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                got: matrix.dim(),
            });
        }
        Ok(Self {
            matrix,
            frame: Frame::Computational,
            dims,
        })
    }

    pub(crate) fn from_parts(matrix: Operator, frame: Frame) -> Self {
        Self {
            matrix,
            frame,
            dims: (2, 2),
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, k: usize) -> StateVector {
        self.matrix.column(k)
    }

    pub fn columns(&self) -> Vec<StateVector> {
        self.matrix.columns()
    }

    /// Same basis with coefficients in the computational frame.
    pub fn to_computational(&self) -> Basis {
        match self.frame {
            Frame::Computational => self.clone(),
            Frame::Skewed { tau } => Basis {
                matrix: skewed_frame_matrix(tau).mul(&self.matrix),
                frame: Frame::Computational,
                dims: self.dims,
            },
        }
    }

    /// `(U_A ⊗ U_B)·B` (computational frame).
    pub fn apply_local(&self, ua: &Operator, ub: &Operator) -> Basis {
        let b = self.to_computational();
        Basis {
            matrix: qla::kron(ua, ub).mul(&b.matrix),
            frame: Frame::Computational,
            dims: self.dims,
        }
    }

    /// Exchanges the two subsystems (computational frame).
    pub fn swapped(&self) -> Basis {
        let b = self.to_computational();
        Basis {
            matrix: Operator::swap(self.dims.0).mul(&b.matrix),
            frame: Frame::Computational,
            dims: (self.dims.1, self.dims.0),
        }
    }

    /// Column `k` of the result is column `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Basis {
        let cols: Vec<StateVector> = perm.iter().map(|&k| self.column(k)).collect();
        Basis {
            matrix: Operator::from_columns(&cols).expect("permutation keeps shape"),
            frame: self.frame,
            dims: self.dims,
        }
    }

    /// Tangle of each column, evaluated in the computational frame.
    pub fn tangles(&self) -> Result<Vec<f64>> {
        let b = self.to_computational();
        b.columns().iter().map(qla::tangle).collect()
    }
}

/// `max |(B†B − I)_{ij}|` over the column set.
pub fn orthonormality_residual(b: &Basis) -> f64 {
    b.matrix().unitarity_residual()
}
