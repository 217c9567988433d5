//! Triangle network: three parties, each pair sharing a two-qubit state, each
//! party measuring its two qubits in a joint basis.
//!
//! Qubits are ordered edge by edge as `[A_ab, B_ab, A_ac, C_ac, B_bc, C_bc]`;
//! a wiring permutation regroups them party by party before measurement.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::families::{gen_family, gen_general, FamilyParams, GeneralOrthParams};
use crate::qla::{DensityMatrix, Operator, StateVector, C64};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(1−ε)ρ + ε·I/4`.
pub fn depolarize(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let d = rho.dim();
    let m = rho.matrix() * C64::new(1.0 - eps, 0.0)
        + DMatrix::<C64>::identity(d, d) * C64::new(eps / d as f64, 0.0);
    DensityMatrix::new(m)
}

/// Shared state on every edge, with the first qubit held by the
/// alphabetically earlier party.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeState {
    /// `(|00⟩ + |11⟩)/√2`.
    PhiPlus,
    /// `(|01⟩ + |10⟩)/√2`.
    PsiPlus,
    Custom(DensityMatrix),
}

impl EdgeState {
    pub fn density(&self) -> DensityMatrix {
        let h = FRAC_1_SQRT_2;
        match self {
            EdgeState::PhiPlus => StateVector::from_reals(&[h, 0.0, 0.0, h]).projector(),
            EdgeState::PsiPlus => StateVector::from_reals(&[0.0, h, h, 0.0]).projector(),
            EdgeState::Custom(rho) => rho.clone(),
        }
    }
}

/// Which edge qubits each party holds, first qubit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wiring {
    /// `A = (AB, AC)`, `B = (BC, AB)`, `C = (AC, BC)`: every party's first qubit
    /// is the one shared with its successor in the cycle A → B → C → A.
    Cyclic,
    /// `A = (AB, AC)`, `B = (AB, BC)`, `C = (AC, BC)`.
    Lexicographic,
    /// Position `k` of the measured register holds edge qubit `perm[k]`.
    Custom([usize; 6]),
}

impl Wiring {
    pub fn permutation(&self) -> [usize; 6] {
        match *self {
            Wiring::Cyclic => [0, 2, 4, 1, 3, 5],
            Wiring::Lexicographic => [0, 2, 1, 4, 3, 5],
            Wiring::Custom(p) => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 6];
        for &k in &self.permutation() {
            if k >= 6 || seen[k] {
                return Err(Error::InvalidParameter(format!(
                    "wiring {:?} is not a permutation of 0..6",
                    self.permutation()
                )));
            }
            seen[k] = true;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TriangleConfig {
    pub bases: [Basis; 3],
    pub edge_state: EdgeState,
    pub epsilon: f64,
    pub wiring: Wiring,
}

impl TriangleConfig {
    /// The same basis at every party, noiseless `Φ⁺` edges, cyclic wiring.
    pub fn symmetric(basis: Basis) -> Self {
        Self {
            bases: [basis.clone(), basis.clone(), basis],
            edge_state: EdgeState::PhiPlus,
            epsilon: 0.0,
            wiring: Wiring::Cyclic,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// `p[16a + 4b + c]` for outcomes `a, b, c ∈ 0..4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleDistribution {
    pub p: Vec<f64>,
}

impl TriangleDistribution {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.p[16 * a + 4 * b + c]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Single-party marginals `[p_A, p_B, p_C]`.
    pub fn marginals(&self) -> [[f64; 4]; 3] {
        let mut m = [[0.0; 4]; 3];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let v = self.get(a, b, c);
                    m[0][a] += v;
                    m[1][b] += v;
                    m[2][c] += v;
                }
            }
        }
        m
    }
}

/// Regroups six qubits: new position `k` holds old qubit `perm[k]`.
fn permute_qubits(rho: &DMatrix<C64>, perm: &[usize; 6]) -> DMatrix<C64> {
    let old_index = |new: usize| -> usize {
        let mut old = 0;
        for (k, &src) in perm.iter().enumerate() {
            let bit = (new >> (5 - k)) & 1;
            old |= bit << (5 - src);
        }
        old
    };
    let map: Vec<usize> = (0..64).map(old_index).collect();
    DMatrix::from_fn(64, 64, |i, j| rho[(map[i], map[j])])
}

pub fn triangle_distribution(cfg: &TriangleConfig) -> Result<TriangleDistribution> {
    cfg.wiring.validate()?;
    let edge = cfg.edge_state.density();
    if edge.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: edge.dim(),
        });
    }
    for b in &cfg.bases {
        if b.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: b.len(),
            });
        }
    }
    let edge = depolarize(&edge, cfg.epsilon)?;
    let rho = edge.kron(&edge).kron(&edge);
    let rho = permute_qubits(rho.matrix(), &cfg.wiring.permutation());

    let m: Vec<DMatrix<C64>> = cfg
        .bases
        .iter()
        .map(|b| b.to_computational().matrix().matrix().clone())
        .collect();
    let meas = m[0].kronecker(&m[1]).kronecker(&m[2]);
    // p_k = (M† ρ M)_kk
    let rm = &rho * &meas;
    let p: Vec<f64> = (0..64)
        .map(|k| {
            let col = meas.column(k);
            col.iter()
                .zip(rm.column(k).iter())
                .map(|(u, v)| (u.conj() * v).re)
                .sum()
        })
        .collect();
    Ok(TriangleDistribution { p })
}

/// Orbit averages of an output-permutation invariant distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpiSummary {
    /// All three outputs equal (4 triples).
    pub p1: f64,
    /// Exactly two equal (36 triples).
    pub p2: f64,
    /// All distinct (24 triples).
    pub p3: f64,
    /// Largest spread `max − min` within any orbit.
    pub max_deviation: f64,
}

pub fn opi_summary(d: &TriangleDistribution) -> OpiSummary {
    let mut orbits: [Vec<f64>; 3] = Default::default();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let distinct = 1 + usize::from(b != a) + usize::from(c != a && c != b);
                orbits[distinct - 1].push(d.get(a, b, c));
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64]| {
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    OpiSummary {
        p1: mean(&orbits[0]),
        p2: mean(&orbits[1]),
        p3: mean(&orbits[2]),
        max_deviation: orbits.iter().map(|o| spread(o)).fold(0.0, f64::max),
    }
}

/// `min_{abc} √(p_A(a) p_B(b) p_C(c)) − p(a,b,c)`; nonnegative iff the Finner
/// inequality holds.
pub fn finner_margin(d: &TriangleDistribution) -> f64 {
    let m = d.marginals();
    let mut margin = f64::INFINITY;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let bound = (m[0][a].max(0.0) * m[1][b].max(0.0) * m[2][c].max(0.0)).sqrt();
                margin = margin.min(bound - d.get(a, b, c));
            }
        }
    }
    margin
}

/// Member of the Elegant family with `β = γ + π/2`, `γ = ½ arccos(−sin 2θ)`.
pub fn gen_elegant_opi(theta: f64) -> Basis {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let gamma = 0.5 * (-(2.0 * theta).sin()).clamp(-1.0, 1.0).acos();
    gen_general(&GeneralOrthParams {
        alpha: FRAC_PI_4,
        delta: FRAC_PI_4,
        theta,
        gamma,
        beta: gamma + FRAC_PI_2,
        tau: 0.0,
    })
    .to_computational()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Curve {
    /// EJM at every party, noise `ε ∈ [0, 1]` on every edge.
    EjmNoise,
    /// `gen_elegant_opi(θ)` at every party, `θ ∈ [0, π/2]`, no noise.
    #[serde(alias = "elegant-opi-subfamily")]
    ElegantOpi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub param: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub finner_margin: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    pub grid: usize,
    pub wiring: Wiring,
    pub edge_state: EdgeKind,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid: 21,
            wiring: Wiring::Cyclic,
            edge_state: EdgeKind::PhiPlus,
        }
    }
}

/// Serializable subset of [`EdgeState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    PhiPlus,
    PsiPlus,
}

impl From<EdgeKind> for EdgeState {
    fn from(k: EdgeKind) -> Self {
        match k {
            EdgeKind::PhiPlus => EdgeState::PhiPlus,
            EdgeKind::PsiPlus => EdgeState::PsiPlus,
        }
    }
}

pub fn scan_p1p3(curve: Curve, opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    if opts.grid < 2 {
        return Err(Error::InvalidParameter(format!("grid must be ≥ 2, got {}", opts.grid)));
    }
    let ejm = gen_family(&FamilyParams::ejm())?;
    let last = (opts.grid - 1) as f64;
    (0..opts.grid)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 / last;
            let (param, basis, eps) = match curve {
                Curve::EjmNoise => (t, ejm.clone(), t),
                Curve::ElegantOpi => {
                    let theta = t * std::f64::consts::FRAC_PI_2;
                    (theta, gen_elegant_opi(theta), 0.0)
                }
            };
            let cfg = TriangleConfig {
                bases: [basis.clone(), basis.clone(), basis],
                edge_state: opts.edge_state.into(),
                epsilon: eps,
                wiring: opts.wiring,
            };
            let d = triangle_distribution(&cfg)?;
            let s = opi_summary(&d);
            Ok(ScanRow {
                param,
                p1: s.p1,
                p2: s.p2,
                p3: s.p3,
                finner_margin: finner_margin(&d),
                max_deviation: s.max_deviation,
            })
        })
        .collect()
}

/// Operator form of the three measurements, `M_A ⊗ M_B ⊗ M_C`.
pub fn measurement_operator(cfg: &TriangleConfig) -> Operator {
    let m: Vec<Operator> = cfg.bases.iter().map(|b| b.to_computational().matrix().clone()).collect();
    crate::qla::kron(&crate::qla::kron(&m[0], &m[1]), &m[2])
}
