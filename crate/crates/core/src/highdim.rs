//! Shift-and-multiply bases in local dimension `d`.
//!
//! From a Latin square `λ` and matrices `M⁰ … M^{d−1}`, the operators
//! `X^{ij}|k⟩ = √d (M^j)_{ik} |λ(j,k)⟩` are monomial. Their vectorizations
//! `|X⟩ = d^{-1/2} Σ X_{nm}|n,m⟩` are orthonormal whenever every `M^j` is
//! unitary, and each has the Schmidt coefficients `|(M^j)_{ik}|` over `k`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::qla::{Operator, StateVector, C64};
use crate::rng;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatinMethod {
    Cyclic,
    Seeded,
}

/// `d × d` table whose rows and columns are permutations of `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinSquare {
    d: usize,
    lambda: Vec<Vec<usize>>,
}

impl LatinSquare {
    pub fn new(lambda: Vec<Vec<usize>>) -> Result<Self> {
        let d = lambda.len();
        if d < 2 {
            return Err(Error::InvalidParameter(format!("Latin square needs d ≥ 2, got {d}")));
        }
        let is_perm = |vals: Vec<usize>| {
            let mut seen = vec![false; d];
            vals.into_iter().all(|v| v < d && !std::mem::replace(&mut seen[v], true))
        };
        for row in &lambda {
            if row.len() != d {
                return Err(Error::Shape(format!("row of length {} in a {d}x{d} square", row.len())));
            }
            if !is_perm(row.clone()) {
                return Err(Error::InvalidParameter(format!("row {row:?} is not a permutation")));
            }
        }
        for k in 0..d {
            if !is_perm(lambda.iter().map(|r| r[k]).collect()) {
                return Err(Error::InvalidParameter(format!("column {k} is not a permutation")));
            }
        }
        Ok(Self { d, lambda })
    }

    /// `λ(j, k) = (j + k) mod d`.
    pub fn cyclic(d: usize) -> Result<Self> {
        Self::new((0..d).map(|j| (0..d).map(|k| (j + k) % d).collect()).collect())
    }

    /// Cyclic square with seeded shuffles of rows, columns and symbols.
    pub fn seeded(d: usize, seed: u64) -> Result<Self> {
        let base = Self::cyclic(d)?;
        let mut r = rng::seeded(seed);
        let mut rows: Vec<usize> = (0..d).collect();
        let mut cols: Vec<usize> = (0..d).collect();
        let mut syms: Vec<usize> = (0..d).collect();
        rows.shuffle(&mut r);
        cols.shuffle(&mut r);
        syms.shuffle(&mut r);
        Self::new(
            rows.iter()
                .map(|&j| cols.iter().map(|&k| syms[base.lambda[j][k]]).collect())
                .collect(),
        )
    }

    pub fn generate(d: usize, method: LatinMethod, seed: u64) -> Result<Self> {
        match method {
            LatinMethod::Cyclic => Self::cyclic(d),
            LatinMethod::Seeded => Self::seeded(d, seed),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, j: usize, k: usize) -> usize {
        self.lambda[j][k]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.lambda
    }
}

fn check_unitary(m: &Operator) -> Result<()> {
    let r = m.unitarity_residual();
    if r > UNITARY_TOL {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

/// Unitary `d × d` matrix whose squared entry moduli are `a` on the diagonal
/// and `b` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustHadamard {
    pub d: usize,
    pub matrix: Operator,
    pub a: f64,
    pub b: f64,
}

/// `F · diag(1, e^{iχ}, …, e^{iχ}) · F†` with `F` the discrete Fourier matrix.
///
/// Entries are `(1 + (d−1)e^{iχ})/d` on the diagonal and `(1 − e^{iχ})/d`
/// elsewhere. The flat point `a = b = 1/d` needs `cos χ = (2−d)/2`, which
/// exists only for `d ≤ 4`.
pub fn robust_hadamard(d: usize, chi: f64) -> Result<RobustHadamard> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be ≥ 2, got {d}")));
    }
    let e = C64::from_polar(1.0, chi);
    let one = C64::new(1.0, 0.0);
    let diag = (one + e * (d as f64 - 1.0)) / d as f64;
    let off = (one - e) / d as f64;
    let m = DMatrix::from_fn(d, d, |i, j| if i == j { diag } else { off });
    Ok(RobustHadamard {
        d,
        matrix: Operator::new(m)?,
        a: diag.norm_sqr(),
        b: off.norm_sqr(),
    })
}

/// Fourier matrix `ω^{jk}/√d`, entries of modulus `1/√d`.
pub fn fourier(d: usize) -> Operator {
    let s = 1.0 / (d as f64).sqrt();
    let m = DMatrix::from_fn(d, d, |j, k| {
        C64::from_polar(s, std::f64::consts::TAU * (j * k % d) as f64 / d as f64)
    });
    Operator::new(m).expect("square")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMultiplyBasis {
    pub d: usize,
    /// `X^{ij}` stored at `i·d + j`.
    pub operators: Vec<Operator>,
    /// Every `M^j` has flat moduli `1/√d`, making every `X^{ij}` unitary.
    pub unitary: bool,
}

impl ShiftMultiplyBasis {
    pub fn operator(&self, i: usize, j: usize) -> &Operator {
        &self.operators[i * self.d + j]
    }

    /// Vectorizations in the order of `operators`, as a basis of `C^d ⊗ C^d`.
    pub fn vectorized(&self) -> Result<Basis> {
        let cols: Vec<StateVector> = self.operators.iter().map(vectorize).collect();
        Basis::bipartite(Operator::from_columns(&cols)?, (self.d, self.d))
    }
}

pub fn shift_multiply(ls: &LatinSquare, mats: &[Operator]) -> Result<ShiftMultiplyBasis> {
    let d = ls.d();
    if mats.len() != d {
        return Err(Error::Shape(format!("need {d} matrices, got {}", mats.len())));
    }
    for m in mats {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
        check_unitary(m)?;
    }
    let flat = 1.0 / (d as f64).sqrt();
    let unitary = mats
        .iter()
        .all(|m| m.matrix().iter().all(|z| (z.norm() - flat).abs() <= UNITARY_TOL));
    let sd = (d as f64).sqrt();
    let mut operators = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mj = mats[j].matrix();
            let mut x = DMatrix::<C64>::zeros(d, d);
            for k in 0..d {
                x[(ls.get(j, k), k)] = mj[(i, k)] * sd;
            }
            operators.push(Operator::new(x)?);
        }
    }
    Ok(ShiftMultiplyBasis { d, operators, unitary })
}

/// `|X⟩ = d^{-1/2} Σ_{nm} X_{nm} |n, m⟩`.
pub fn vectorize(x: &Operator) -> StateVector {
    let d = x.dim();
    let m = x.matrix();
    let s = 1.0 / (d as f64).sqrt();
    let entries: Vec<C64> = (0..d * d).map(|idx| m[(idx / d, idx % d)] * s).collect();
    StateVector::from_slice(&entries)
}

/// Columns `|i⟩ ⊗ u_i|j⟩` at index `i·d + j`.
pub fn conditional_product_basis(us: &[Operator]) -> Result<Basis> {
    let d = us.len();
    if d < 2 {
        return Err(Error::InvalidParameter(format!("need d ≥ 2 unitaries, got {d}")));
    }
    let mut m = DMatrix::<C64>::zeros(d * d, d * d);
    for (i, u) in us.iter().enumerate() {
        if u.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.dim(),
            });
        }
        check_unitary(u)?;
        m.view_mut((i * d, i * d), (d, d)).copy_from(u.matrix());
    }
    Basis::bipartite(Operator::new(m)?, (d, d))
}

/// `max |tr(X^{ij†} X^{i'j'}) − d·δ_{ii'}δ_{jj'}|` over all pairs.
pub fn trace_orthogonality_residual(b: &ShiftMultiplyBasis) -> f64 {
    let d = b.d as f64;
    let n = b.operators.len();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            let t = (b.operators[p].matrix().adjoint() * b.operators[q].matrix()).trace();
            let want = if p == q { d } else { 0.0 };
            worst = worst.max((t - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::orthonormality_residual;
    use crate::qla::schmidt_spectrum;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn latin_squares() {
        assert_eq!(LatinSquare::cyclic(2).unwrap().rows(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(
            LatinSquare::cyclic(3).unwrap().rows(),
            &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]
        );
        for seed in 0..20 {
            let s = LatinSquare::seeded(5, seed).unwrap();
            assert!(LatinSquare::new(s.rows().to_vec()).is_ok());
        }
        assert_eq!(LatinSquare::seeded(4, 9).unwrap(), LatinSquare::seeded(4, 9).unwrap());
        assert!(LatinSquare::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(LatinSquare::new(vec![vec![0]]).is_err());
    }

    #[test]
    fn robust_hadamard_amplitudes() {
        let r = robust_hadamard(4, 0.0).unwrap();
        assert!((r.a - 1.0).abs() < 1e-15 && r.b.abs() < 1e-15);
        let r = robust_hadamard(2, FRAC_PI_2).unwrap();
        assert!((r.a - 0.5).abs() < 1e-15 && (r.b - 0.5).abs() < 1e-15);
        let r = robust_hadamard(3, 2.0 * PI / 3.0).unwrap();
        assert!((r.a - 1.0 / 3.0).abs() < 1e-15 && (r.b - 1.0 / 3.0).abs() < 1e-15);
        for d in 2..7 {
            let r = robust_hadamard(d, 0.9).unwrap();
            assert!(r.matrix.unitarity_residual() < 1e-14);
            assert!((r.a + (d as f64 - 1.0) * r.b - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hadamard_shift_multiply_is_trace_orthogonal() {
        for d in 2..=6 {
            for ls in [LatinSquare::cyclic(d).unwrap(), LatinSquare::seeded(d, 3).unwrap()] {
                let f = fourier(d);
                let b = shift_multiply(&ls, &vec![f; d]).unwrap();
                assert!(b.unitary);
                assert!(trace_orthogonality_residual(&b) < 1e-10);
                assert!(b.operators.iter().all(|u| u.unitarity_residual() < 1e-12));
            }
        }
    }

    #[test]
    fn robust_shift_multiply_is_iso_schmidt() {
        for (d, chi) in [(2, 0.7), (3, 1.0), (4, 2.2), (5, 0.4)] {
            let r = robust_hadamard(d, chi).unwrap();
            let b = shift_multiply(&LatinSquare::cyclic(d).unwrap(), &vec![r.matrix.clone(); d]).unwrap();
            let v = b.vectorized().unwrap();
            assert!(orthonormality_residual(&v) < 1e-10);
            let mut want = vec![r.a.sqrt()];
            want.extend(std::iter::repeat_n(r.b.sqrt(), d - 1));
            want.sort_by(|x, y| y.total_cmp(x));
            for col in v.columns() {
                let s = schmidt_spectrum(&col, (d, d)).unwrap();
                for (g, w) in s.coefficients().iter().zip(&want) {
                    assert!((g - w).abs() < 1e-10);
                }
            }
            if d == 2 {
                let mu = r.a.sqrt().acos();
                let s = schmidt_spectrum(&v.column(0), (2, 2)).unwrap();
                assert!((s.linear_entropy() - (2.0 * mu).sin().powi(2)).abs() < 1e-10);
                assert!((crate::qla::tangle(&v.column(0)).unwrap() - s.linear_entropy()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn vectorize_examples() {
        for d in 2..5 {
            let s = schmidt_spectrum(&vectorize(&Operator::identity(d)), (d, d)).unwrap();
            assert!(s.coefficients().iter().all(|x| (x - 1.0 / (d as f64).sqrt()).abs() < 1e-14));
            let mut m = DMatrix::<C64>::zeros(d, d);
            m[(0, 0)] = C64::new((d as f64).sqrt(), 0.0);
            let s = schmidt_spectrum(&vectorize(&Operator::new(m).unwrap()), (d, d)).unwrap();
            assert!((s.coefficients()[0] - 1.0).abs() < 1e-14);
            assert!(s.coefficients()[1..].iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn conditional_product_bases() {
        let id = conditional_product_basis(&[Operator::identity(3), Operator::identity(3), Operator::identity(3)]).unwrap();
        assert_eq!(id.matrix(), &Operator::identity(9));
        let mut r = rng::seeded(4);
        let us: Vec<Operator> = (0..3).map(|_| rng::haar_unitary(&mut r, 3)).collect();
        let b = conditional_product_basis(&us).unwrap();
        assert!(orthonormality_residual(&b) < 1e-12);
        for col in b.columns() {
            let s = schmidt_spectrum(&col, (3, 3)).unwrap();
            assert!((s.coefficients()[0] - 1.0).abs() < 1e-12);
        }
        let b2 = conditional_product_basis(&[Operator::identity(2), fourier(2)]).unwrap();
        assert!(b2.tangles().unwrap().iter().all(|t| t.abs() < 1e-14));
        assert!(matches!(
            conditional_product_basis(&[Operator::identity(2), Operator::pauli_x().mul(&Operator::identity(2)).mul(&Operator::new(DMatrix::from_element(2, 2, C64::new(1.0, 0.0))).unwrap())]),
            Err(Error::NotUnitary(_))
        ));
    }
}
