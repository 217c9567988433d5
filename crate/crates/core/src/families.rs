//! Closed-form generators for the iso-entangled two-qubit families.
//!
//! Families that are naturally written in the skewed product frame (the
//! general orthonormal parametrization and the General family) come back
//! with [`Frame::Skewed`]; call [`Basis::to_computational`] before doing
//! anything that depends on the tensor structure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Frame};
use crate::error::{Error, LimitFamily, Result};
use crate::qla::{Operator, StateVector, C64, ONE, ZERO};

/// Below this, `sin 2δ · cos β` is treated as zero.
pub const SINGULAR_EPS: f64 = 1e-9;

fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn mat4(rows: [[C64; 4]; 4]) -> Operator {
    let flat: Vec<C64> = rows.iter().flatten().copied().collect();
    Operator::from_rows(4, &flat).expect("4x4")
}

pub(crate) fn canonical_angle(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// Change of frame from the skewed product frame to the computational one.
///
/// Columns are `|0,0⟩, |0,1⟩, |1,φ⟩, |1,φ⊥⟩` with `|φ⟩ = cos τ|0⟩ + sin τ|1⟩`
/// and `|φ⊥⟩ = cos τ|1⟩ − sin τ|0⟩`.
pub fn skewed_frame_matrix(tau: f64) -> Operator {
    let (s, c) = tau.sin_cos();
    mat4([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, re(c), re(-s)],
        [ZERO, ZERO, re(s), re(c)],
    ])
}

/// Six angles of the general orthonormal two-qubit parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralOrthParams {
    pub alpha: f64,
    pub delta: f64,
    pub theta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub tau: f64,
}

impl GeneralOrthParams {
    pub fn canonical(self) -> Self {
        Self {
            alpha: canonical_angle(self.alpha),
            delta: canonical_angle(self.delta),
            theta: canonical_angle(self.theta),
            gamma: canonical_angle(self.gamma),
            beta: canonical_angle(self.beta),
            tau: canonical_angle(self.tau),
        }
    }
}

/// General orthonormal basis, coefficients in the skewed frame `τ`.
pub fn gen_general(p: &GeneralOrthParams) -> Basis {
    let (sa, ca) = p.alpha.sin_cos();
    let (sd, cd) = p.delta.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let eg = cis(p.gamma);
    let eb = cis(p.beta);
    let m = mat4([
        [ZERO, ZERO, -eg * ca, eg * sa],
        [re(sd * ct), re(cd * ct), re(-sa * st), re(-ca * st)],
        [re(sd * st), re(cd * st), re(sa * ct), re(ca * ct)],
        [-eb * cd, eb * sd, ZERO, ZERO],
    ]);
    Basis::from_parts(m, Frame::Skewed { tau: p.tau })
}

/// Branch selector `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Parameter record selecting one family and its angles (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyParams {
    /// Family 1: product bases, tangle 0.
    #[serde(rename = "skewed", alias = "skewed-product")]
    SkewedProduct { tau: f64 },
    /// Family 2, contains the EJM at `θ = π/4, ζ = π/2`.
    Elegant { theta: f64, zeta: f64 },
    /// Family 3, contains the BSM at `δ = π/4, τ = π/2`.
    Bell { delta: f64, zeta: f64, tau: f64 },
    /// Family 4; `τ` follows from the iso-entanglement constraint.
    General {
        delta: f64,
        theta: f64,
        beta: f64,
        #[serde(default)]
        sign: Sign,
    },
    /// Canonical form of the Bell family built from two local qubit frames.
    BellCanonical {
        x: f64,
        y: f64,
        z: f64,
        #[serde(default)]
        phase_sign: Sign,
    },
    /// One-parameter family interpolating between EJM (`φ = 0`) and BSM (`φ = π/2`).
    I5 { phi: f64 },
}

impl FamilyParams {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyParams::SkewedProduct { .. } => "skewed",
            FamilyParams::Elegant { .. } => "elegant",
            FamilyParams::Bell { .. } => "bell",
            FamilyParams::General { .. } => "general",
            FamilyParams::BellCanonical { .. } => "bell-canonical",
            FamilyParams::I5 { .. } => "i5",
        }
    }

    /// Angles reduced into `[0, 2π)`.
    pub fn canonical(self) -> Self {
        use FamilyParams::*;
        let c = canonical_angle;
        match self {
            SkewedProduct { tau } => SkewedProduct { tau: c(tau) },
            Elegant { theta, zeta } => Elegant {
                theta: c(theta),
                zeta: c(zeta),
            },
            Bell { delta, zeta, tau } => Bell {
                delta: c(delta),
                zeta: c(zeta),
                tau: c(tau),
            },
            General {
                delta,
                theta,
                beta,
                sign,
            } => General {
                delta: c(delta),
                theta: c(theta),
                beta: c(beta),
                sign,
            },
            BellCanonical { x, y, z, phase_sign } => BellCanonical {
                x: c(x),
                y: c(y),
                z: c(z),
                phase_sign,
            },
            I5 { phi } => I5 { phi: c(phi) },
        }
    }

    pub fn ejm() -> Self {
        FamilyParams::Elegant {
            theta: FRAC_PI_4,
            zeta: FRAC_PI_2,
        }
    }

    pub fn bsm() -> Self {
        FamilyParams::Bell {
            delta: FRAC_PI_4,
            zeta: 0.0,
            tau: FRAC_PI_2,
        }
    }

    fn check_finite(&self) -> Result<()> {
        use FamilyParams::*;
        let finite = match *self {
            SkewedProduct { tau } => tau.is_finite(),
            Elegant { theta, zeta } => theta.is_finite() && zeta.is_finite(),
            Bell { delta, zeta, tau } => [delta, zeta, tau].iter().all(|x| x.is_finite()),
            General {
                delta, theta, beta, ..
            } => [delta, theta, beta].iter().all(|x| x.is_finite()),
            BellCanonical { x, y, z, .. } => [x, y, z].iter().all(|v| v.is_finite()),
            I5 { phi } => phi.is_finite(),
        };
        if !finite {
            return Err(Error::InvalidParameter("family angles must be finite".into()));
        }
        Ok(())
    }
}

/// `τ = atan2(cos 2δ · sin θ, sin 2δ · cos β)`.
pub fn general_constraint_tau(delta: f64, theta: f64, beta: f64) -> Result<f64> {
    constraint_tau(delta, theta, beta, SINGULAR_EPS)
}

fn constraint_tau(delta: f64, theta: f64, beta: f64, eps: f64) -> Result<f64> {
    let denom = (2.0 * delta).sin() * beta.cos();
    if denom.abs() <= eps {
        let limit = if beta.cos().abs() <= eps {
            LimitFamily::Bell
        } else {
            LimitFamily::SkewedProduct
        };
        return Err(Error::SingularConstraint { limit });
    }
    Ok(((2.0 * delta).cos() * theta.sin()).atan2(denom))
}

fn skewed_product(tau: f64) -> Basis {
    let (s, c) = tau.sin_cos();
    Basis::from_parts(
        mat4([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, re(c), re(-s)],
            [ZERO, ZERO, re(s), re(c)],
        ]),
        Frame::Computational,
    )
}

fn elegant(theta: f64, zeta: f64) -> Basis {
    let (s, c) = theta.sin_cos();
    let e = cis(zeta);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = mat4([
        [ZERO, ZERO, -e * h, e * h],
        [re(c * h), re(c * h), re(-s * h), re(-s * h)],
        [re(s * h), re(s * h), re(c * h), re(c * h)],
        [re(h), re(-h), ZERO, ZERO],
    ]);
    Basis::from_parts(m, Frame::Computational)
}

fn bell(delta: f64, zeta: f64, tau: f64) -> Basis {
    let (sd, cd) = delta.sin_cos();
    let (st, ct) = tau.sin_cos();
    let e = cis(zeta);
    let m = mat4([
        [ZERO, ZERO, -e * cd, e * sd],
        [re(sd), re(cd), ZERO, ZERO],
        [re(st * cd), re(-st * sd), re(ct * sd), re(ct * cd)],
        [re(-ct * cd), re(ct * sd), re(st * sd), re(st * cd)],
    ]);
    Basis::from_parts(m, Frame::Computational)
}

fn general(delta: f64, theta: f64, beta: f64, sign: Sign) -> Result<Basis> {
    general_member(delta, theta, beta, sign, SINGULAR_EPS)
}

/// General member with a caller-chosen singularity guard; `eps = 0` admits
/// every point where the constraint denominator is nonzero.
pub(crate) fn general_member(delta: f64, theta: f64, beta: f64, sign: Sign, eps: f64) -> Result<Basis> {
    let tau = constraint_tau(delta, theta, beta, eps)?;
    let (sd, cd) = delta.sin_cos();
    let (st, ct) = theta.sin_cos();
    let top = cis(sign.value() * beta);
    let eb = cis(beta);
    let m = mat4([
        [ZERO, ZERO, top * cd, -top * sd],
        [re(sd * ct), re(cd * ct), re(-sd * st), re(-cd * st)],
        [re(sd * st), re(cd * st), re(sd * ct), re(cd * ct)],
        [-eb * cd, eb * sd, ZERO, ZERO],
    ]);
    Ok(Basis::from_parts(m, Frame::Skewed { tau }))
}

/// `cos φ₁` of the canonical Bell form, `−tan 2x · tan 2y / sin 2z`.
pub fn bell_canonical_cos_phase(x: f64, y: f64, z: f64) -> f64 {
    -(2.0 * x).tan() * (2.0 * y).tan() / (2.0 * z).sin()
}

fn bell_canonical(x: f64, y: f64, z: f64, phase_sign: Sign) -> Result<Basis> {
    let cos_phi = bell_canonical_cos_phase(x, y, z);
    if !cos_phi.is_finite() || cos_phi.abs() > 1.0 + 1e-12 {
        return Err(Error::PhaseInfeasible { cos_phi });
    }
    let phi1 = phase_sign.value() * cos_phi.clamp(-1.0, 1.0).acos();
    let phases = [phi1, -phi1, -phi1, phi1];

    let qubit = |c: f64, s: f64| StateVector::from_reals(&[c, s]);
    // |v⊥⟩ = (−v₁*, v₀*): second entry carries no phase
    let perp = |v: &StateVector| {
        let e = v.entries();
        StateVector::from_slice(&[-e[1].conj(), e[0].conj()])
    };
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    let (a1, a2) = (qubit(cx, sx), qubit(cx, -sx));
    let (b1, b2) = (qubit(cy, sy), qubit(cy, -sy));
    let (a1p, a2p, b1p, b2p) = (perp(&a1), perp(&a2), perp(&b1), perp(&b2));
    let (sz, cz) = z.sin_cos();

    let term = |a: &StateVector, b: &StateVector, ap: &StateVector, bp: &StateVector, ph: f64| {
        let first = a.entries().kronecker(b.entries()) * re(cz);
        let second = ap.entries().kronecker(bp.entries()) * (cis(ph) * sz);
        StateVector::new(first + second)
    };
    let cols = [
        term(&a1, &b1, &a1p, &b1p, phases[0]),
        term(&a1p, &b2, &a1, &b2p, phases[1]),
        term(&a2, &b1p, &a2p, &b1, phases[2]),
        term(&a2p, &b2p, &a2, &b2, phases[3]),
    ];
    Ok(Basis::from_parts(
        Operator::from_columns(&cols)?,
        Frame::Computational,
    ))
}

fn i5(phi: f64) -> Basis {
    let e = cis(phi);
    let i = C64::new(0.0, 1.0);
    let one = ONE;
    let m = mat4([
        [one + i, one - i, one - i, one + i],
        [-i * e - i, i * e - i, i - i * e, i * e + i],
        [i * e - i, -i * e - i, i * e + i, i - i * e],
        [one - i, one + i, one + i, one - i],
    ]);
    let k = re(1.0 / (2.0 * std::f64::consts::SQRT_2));
    Basis::from_parts(Operator::from_matrix(m.into_inner() * k), Frame::Computational)
}

/// Builds the basis of the selected family.
pub fn gen_family(p: &FamilyParams) -> Result<Basis> {
    p.check_finite()?;
    match p.canonical() {
        FamilyParams::SkewedProduct { tau } => Ok(skewed_product(tau)),
        FamilyParams::Elegant { theta, zeta } => Ok(elegant(theta, zeta)),
        FamilyParams::Bell { delta, zeta, tau } => Ok(bell(delta, zeta, tau)),
        FamilyParams::General {
            delta,
            theta,
            beta,
            sign,
        } => general(delta, theta, beta, sign),
        FamilyParams::BellCanonical { x, y, z, phase_sign } => bell_canonical(x, y, z, phase_sign),
        FamilyParams::I5 { phi } => Ok(i5(phi)),
    }
}

/// Closed-form tangle shared by every column of the family member.
pub fn closed_form_tangle(p: &FamilyParams) -> Result<f64> {
    p.check_finite()?;
    let sq = |x: f64| x * x;
    Ok(match *p {
        FamilyParams::SkewedProduct { .. } => 0.0,
        FamilyParams::Elegant { theta, .. } => sq((2.0 * theta).sin()) / 4.0,
        FamilyParams::Bell { delta, tau, .. } => sq((2.0 * delta).sin()) * sq(tau.sin()),
        FamilyParams::General {
            delta, theta, beta, ..
        } => {
            general_constraint_tau(delta, theta, beta)?;
            let s2d = sq((2.0 * delta).sin());
            let c2d = sq((2.0 * delta).cos());
            let cb2 = sq(beta.cos());
            sq((2.0 * theta).sin()) * s2d / 4.0 * (s2d * cb2 + c2d)
                / (s2d * cb2 + c2d * sq(theta.sin()))
        }
        FamilyParams::BellCanonical { x, y, z, .. } => {
            let c = bell_canonical_cos_phase(x, y, z);
            if !c.is_finite() || c.abs() > 1.0 + 1e-12 {
                return Err(Error::PhaseInfeasible { cos_phi: c });
            }
            sq((2.0 * z).sin())
        }
        FamilyParams::I5 { phi } => (1.0 + 3.0 * sq(phi.sin())) / 4.0,
    })
}

/// Pairwise tangle differences `ξ₁−ξ₂`, `ξ₃−ξ₄`, `ξ₁−ξ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoResiduals {
    pub r12: f64,
    pub r34: f64,
    pub r13: f64,
}

impl IsoResiduals {
    pub fn max_abs(&self) -> f64 {
        self.r12.abs().max(self.r34.abs()).max(self.r13.abs())
    }

    pub fn is_iso(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

pub fn iso_residuals(b: &Basis) -> Result<IsoResiduals> {
    if b.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: b.len(),
        });
    }
    let t = b.tangles()?;
    Ok(IsoResiduals {
        r12: t[0] - t[1],
        r34: t[2] - t[3],
        r13: t[0] - t[2],
    })
}

/// Singular limits of the General family and the tangle they approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Family4Limit {
    /// `β → π/2`: the Bell subfamily with `ξ → cos²θ · sin²2δ`.
    BetaToHalfPi { theta: f64, delta: f64 },
    /// `δ → π/4`: the Elegant family, `ξ → sin²2θ / 4`.
    DeltaToQuarterPi { theta: f64 },
    /// `(θ, δ) → 0`: skewed product family from any direction.
    ThetaDeltaToZero,
    /// `(β, δ) → (π/2, π/4)` along `π/2 − β = r cos φ`, `π/4 − δ = r sin φ`.
    /// Interpolates between the Elegant value (`φ = 0`) and the Bell value
    /// `cos²θ` (`φ = π/2`).
    BetaDeltaCorner { theta: f64, phi: f64 },
    /// `(β, θ) → (π/2, 0)` along `θ = r cos φ`, `π/2 − β = r sin φ`. Returns the
    /// bound `(1 + tan|φ|)⁻²` on the limiting tangle over all `δ`.
    BetaThetaCorner { phi: f64 },
}

pub fn family4_limit(case: &Family4Limit) -> Result<f64> {
    let sq = |x: f64| x * x;
    Ok(match *case {
        Family4Limit::BetaToHalfPi { theta, delta } => sq(theta.cos()) * sq((2.0 * delta).sin()),
        Family4Limit::DeltaToQuarterPi { theta } => sq((2.0 * theta).sin()) / 4.0,
        Family4Limit::ThetaDeltaToZero => 0.0,
        Family4Limit::BetaDeltaCorner { theta, phi } => {
            let (sp, cp) = phi.sin_cos();
            sq((2.0 * theta).sin()) / 4.0 * (sq(cp) + 4.0 * sq(sp))
                / (sq(cp) + 4.0 * sq(sp) * sq(theta.sin()))
        }
        Family4Limit::BetaThetaCorner { phi } => {
            if !(phi.abs() < FRAC_PI_2) {
                return Err(Error::InvalidParameter(format!(
                    "approach angle {phi} outside (-π/2, π/2)"
                )));
            }
            1.0 / sq(1.0 + phi.abs().tan())
        }
    })
}

/// Limiting tangle at fixed `δ` for the `(β, θ) → (π/2, 0)` corner.
pub fn beta_theta_corner_value(phi: f64, delta: f64) -> f64 {
    let s = (2.0 * delta).sin().powi(2);
    let c = 1.0 - s;
    let t = 1.0 / phi.tan().powi(2);
    if !t.is_finite() {
        return s;
    }
    s * c * t / (s + c * t)
}
