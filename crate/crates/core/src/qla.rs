//! Dense complex linear algebra and pure-state entanglement primitives.
//!
//! Tensor products follow one convention everywhere in the crate: the
//! leftmost factor is the most significant index, so the amplitude of
//! `|i⟩⊗|j⟩` in a `d_A × d_B` system sits at position `i·d_B + j`.
//! [`reshape_bipartite`] is the single routine that implements this.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances used for assertions throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Physical statements (normalization, iso-entanglement, positivity).
    pub physical: f64,
    /// Algebraic identities (orthonormality of closed-form matrices).
    pub algebraic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            physical: 1e-10,
            algebraic: 1e-12,
        }
    }
}

/// Complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(entries: DVector<C64>) -> Self {
        Self(entries)
    }

    pub fn from_slice(entries: &[C64]) -> Self {
        Self(DVector::from_column_slice(entries))
    }

    pub fn from_reals(entries: &[f64]) -> Self {
        Self(DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    /// Computational basis vector `|k⟩` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::from_element(dim, ZERO);
        v[k] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        Self(self.0.normalize())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(&self.0 * self.0.adjoint())
    }
}

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Shape(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_matrix(entries: DMatrix<C64>) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self(entries)
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, rows: &[C64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, rows)))
    }

    pub fn from_columns(columns: &[StateVector]) -> Result<Self> {
        let dim = columns.len();
        if let Some(bad) = columns.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        let cols: Vec<DVector<C64>> = columns.iter().map(|c| c.0.clone()).collect();
        Ok(Self(DMatrix::from_columns(&cols)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn column(&self, k: usize) -> StateVector {
        StateVector(self.0.column(k).into_owned())
    }

    pub fn columns(&self) -> Vec<StateVector> {
        (0..self.dim()).map(|k| self.column(k)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector(&self.0 * &v.0)
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.0.adjoint() * &self.0;
        max_abs_deviation_from_identity(&g)
    }

    pub fn pauli_x() -> Self {
        Self(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    pub fn pauli_y() -> Self {
        Self(DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]))
    }

    pub fn pauli_z() -> Self {
        Self(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
    }

    /// Swap of the two tensor factors of `C^d ⊗ C^d`.
    pub fn swap(d: usize) -> Self {
        let mut m = DMatrix::from_element(d * d, d * d, ZERO);
        for i in 0..d {
            for j in 0..d {
                m[(j * d + i, i * d + j)] = ONE;
            }
        }
        Self(m)
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs_deviation_from_identity(g: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Kronecker product with the leftmost factor as the most significant index.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for Operator {
    fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

impl Kron for StateVector {
    fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

pub fn kron<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// Coefficient matrix `M[i][j] = ψ[i·d_B + j]` of a bipartite vector.
pub fn reshape_bipartite(entries: &[C64], d_a: usize, d_b: usize) -> Result<DMatrix<C64>> {
    if entries.len() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            got: entries.len(),
        });
    }
    Ok(DMatrix::from_row_slice(d_a, d_b, entries))
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates hermiticity and unit trace (1e-12) and positivity (−1e-10).
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidDensity("not square".into()));
        }
        let herm = max_abs(&(&entries - entries.adjoint()));
        if herm > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = entries.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let rho = Self(entries);
        let min_eig = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    /// `(I + xσx + yσy + zσz)/2`.
    pub fn from_bloch(v: BlochVector) -> Self {
        let half = 0.5;
        Self(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(half * (1.0 + v.z), 0.0),
                C64::new(half * v.x, -half * v.y),
                C64::new(half * v.x, half * v.y),
                C64::new(half * (1.0 - v.z), 0.0),
            ],
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ |ρ_ij|² for Hermitian ρ
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(self.0.kronecker(&other.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced density matrix of a bipartite `d_A × d_B` state.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if rho.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            got: rho.dim(),
        });
    }
    let m = &rho.0;
    let out = match keep {
        Subsystem::A => DMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
        Subsystem::B => DMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
    };
    Ok(DensityMatrix(out))
}

/// Reduced state of a pure bipartite vector without forming `|ψ⟩⟨ψ|`.
pub fn reduced_state(psi: &StateVector, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let m = reshape_bipartite(psi.0.as_slice(), dims.0, dims.1)?;
    let r = match keep {
        Subsystem::A => &m * m.adjoint(),
        Subsystem::B => m.transpose() * m.map(|z| z.conj()),
    };
    Ok(DensityMatrix(r))
}

fn check_normalized(psi: &StateVector, tol: f64) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > tol {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(())
}

/// Tangle `ξ = 2(1 − Tr ρ_A²)` of a normalized two-qubit pure state.
pub fn tangle(psi: &StateVector) -> Result<f64> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: psi.dim(),
        });
    }
    check_normalized(psi, 1e-10)?;
    let rho_a = reduced_state(psi, (2, 2), Subsystem::A)?;
    Ok((2.0 * (1.0 - rho_a.purity())).clamp(0.0, 1.0))
}

/// Linear entropy `2(1 − Tr ρ_A²)` for a normalized `d × d` pure state.
pub fn linear_entropy(psi: &StateVector, d: usize) -> Result<f64> {
    check_normalized(psi, 1e-10)?;
    let rho_a = reduced_state(psi, (d, d), Subsystem::A)?;
    Ok((2.0 * (1.0 - rho_a.purity())).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Pauli expectations of a qubit density matrix.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let m = &rho.0;
    let off = m[(0, 1)] + m[(1, 0)].conj();
    Ok(BlochVector {
        x: off.re,
        y: -off.im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

/// Descending Schmidt coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum(pub Vec<f64>);

impl SchmidtSpectrum {
    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    /// `2(1 − Σ λ⁴)`; equals the tangle for two qubits.
    pub fn linear_entropy(&self) -> f64 {
        2.0 * (1.0 - self.0.iter().map(|l| l.powi(4)).sum::<f64>())
    }
}

/// Singular values of the `d × d` coefficient matrix, descending.
pub fn schmidt_spectrum(psi: &StateVector, dims: (usize, usize)) -> Result<SchmidtSpectrum> {
    if dims.0 != dims.1 {
        return Err(Error::Shape(format!(
            "Schmidt spectrum needs a square bipartition, got {}x{}",
            dims.0, dims.1
        )));
    }
    check_normalized(psi, 1e-10)?;
    let m = reshape_bipartite(psi.0.as_slice(), dims.0, dims.1)?;
    let sv = m.svd(false, false).singular_values;
    let mut indexed: Vec<(usize, f64)> = sv.iter().copied().enumerate().collect();
    // stable: equal values keep their original order
    indexed.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(SchmidtSpectrum(indexed.into_iter().map(|(_, s)| s).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_phi() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_reals(&[s, 0.0, 0.0, s])
    }

    #[test]
    fn kron_basis_and_identity() {
        let k0 = StateVector::basis(2, 0);
        assert_eq!(kron(&k0, &k0), StateVector::basis(4, 0));
        assert_eq!(kron(&Operator::identity(2), &Operator::identity(2)), Operator::identity(4));
        assert_eq!(kron(&bell_phi(), &bell_phi()).dim(), 16);
    }

    #[test]
    fn kron_ordering_left_factor_most_significant() {
        let v = kron(&StateVector::basis(2, 1), &StateVector::basis(3, 2));
        assert_eq!(v, StateVector::basis(6, 5));
    }

    #[test]
    fn partial_trace_examples() {
        let p00 = StateVector::basis(4, 0).projector();
        let ra = partial_trace(&p00, (2, 2), Subsystem::A).unwrap();
        assert_eq!(ra, StateVector::basis(2, 0).projector());

        let ra = partial_trace(&bell_phi().projector(), (2, 2), Subsystem::A).unwrap();
        assert!(max_abs(&(ra.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);

        let t: f64 = 0.37;
        let psi = StateVector::from_reals(&[t.cos(), 0.0, 0.0, t.sin()]);
        let ra = partial_trace(&psi.projector(), (2, 2), Subsystem::A).unwrap();
        assert_abs_diff_eq!(ra.matrix()[(0, 0)].re, t.cos().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(ra.matrix()[(1, 1)].re, t.sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(ra.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_dim_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            partial_trace(&rho, (2, 2), Subsystem::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_product_state_keeps_factors() {
        let a = StateVector::from_slice(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let b = StateVector::from_reals(&[0.28, 0.96]);
        let rho = kron(&a, &b).projector();
        let ra = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        let rb = partial_trace(&rho, (2, 2), Subsystem::B).unwrap();
        assert!(max_abs(&(ra.matrix() - a.projector().matrix())) < 1e-14);
        assert!(max_abs(&(rb.matrix() - b.projector().matrix())) < 1e-14);
    }

    #[test]
    fn tangle_examples() {
        assert_abs_diff_eq!(tangle(&StateVector::basis(4, 0)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tangle(&bell_phi()).unwrap(), 1.0, epsilon = 1e-15);
        for t in [0.1_f64, 0.4, 1.2] {
            let psi = StateVector::from_reals(&[t.cos(), 0.0, 0.0, t.sin()]);
            assert_abs_diff_eq!(tangle(&psi).unwrap(), (2.0 * t).sin().powi(2), epsilon = 1e-14);
        }
    }

    #[test]
    fn tangle_rejects_unnormalized() {
        let psi = StateVector::from_reals(&[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(tangle(&psi), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn bloch_examples() {
        let v = bloch_vector(&StateVector::basis(2, 0).projector()).unwrap();
        assert_eq!(v, BlochVector::new(0.0, 0.0, 1.0));
        let v = bloch_vector(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(v, BlochVector::new(0.0, 0.0, 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = bloch_vector(&StateVector::from_reals(&[s, s]).projector()).unwrap();
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-15);
        assert!(bloch_vector(&DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn bloch_y_sign() {
        // |+i⟩ = (|0⟩ + i|1⟩)/√2 has Bloch vector (0, 1, 0)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = StateVector::from_slice(&[C64::new(s, 0.0), C64::new(0.0, s)]);
        let b = bloch_vector(&v.projector()).unwrap();
        assert_abs_diff_eq!(b.y, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt_spectrum(&bell_phi(), (2, 2)).unwrap();
        assert_abs_diff_eq!(s.0[0], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.0[1], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        let s = schmidt_spectrum(&StateVector::basis(4, 1), (2, 2)).unwrap();
        assert_abs_diff_eq!(s.0[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.0[1], 0.0, epsilon = 1e-15);
        assert!(schmidt_spectrum(&StateVector::basis(6, 0), (2, 3)).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(DMatrix::from_element(2, 2, ONE)).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[C64::new(1.5, 0.0), ZERO, ZERO, C64::new(-0.5, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        assert!(DensityMatrix::new(bell_phi().projector().into_inner()).is_ok());
    }

    #[test]
    fn swap_operator_exchanges_factors() {
        let a = StateVector::from_reals(&[0.6, 0.8]);
        let b = StateVector::from_reals(&[1.0, 0.0]);
        let sw = Operator::swap(2).apply(&kron(&a, &b));
        assert_eq!(sw, kron(&b, &a));
    }
}
