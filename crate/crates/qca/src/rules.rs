//! The classified rule families as parameter records and local unitaries.
//!
//! Every qubit QCA with a von Neumann neighbourhood is, up to the
//! classification, either a shift or a layer of controlled phases, each
//! preceded by a site-wise Euler rotation
//! `V(θ) = R_z(θ₁) R_y(θ₂) R_z(θ₃)`. In the Heisenberg picture the local rule
//! reads `α₀(O) = U† (V† O V ⊗ I) U` with `U = M(φ)` (product of the `2s`
//! controlled phases touching the origin) or `U` = swap of the origin with
//! the shift target.
//!
//! The local rule is stored as the Schrödinger unitary `W = (V ⊗ I) U` on
//! the `2s + 1` neighbourhood qubits, so that `α₀(O) = W† (O ⊗ I) W`.

use crate::lattice::{self, von_neumann_neighborhood, Coord};
use crate::ops::{embed, is_unitary, pauli, CMat, LocalOp, C64, ONE};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

/// Absolute tolerance for angle comparisons after reduction mod 2π.
pub const ANGLE_TOL: f64 = 1e-12;
/// Commutator tolerance for the well-posedness check.
pub const COMMUTATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("cphase rule needs {s} angles, got {got}")]
    PhiLength { s: usize, got: usize },
    #[error("shift rule needs a shift vector")]
    MissingShift,
    #[error("shift {0:?} is not in the von Neumann neighbourhood")]
    ShiftOutsideNeighborhood(Coord),
    #[error("shift vector has {got} components, expected {s}")]
    ShiftDimension { s: usize, got: usize },
    #[error("dimension s must be at least 1")]
    ZeroDimension,
    #[error("local rule matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("local rule matrix has dimension {got}, expected {expected}")]
    MatrixDimension { expected: usize, got: usize },
    #[error("non-finite angle in rule parameters")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Cphase,
    Shift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    pub s: usize,
    pub kind: RuleKind,
    #[serde(default)]
    pub phi: Vec<f64>,
    pub theta: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<i64>>,
}

pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `a` is within `tol` of an integer multiple of `step` (mod 2π).
pub fn near_multiple(a: f64, step: f64, tol: f64) -> bool {
    let r = reduce_angle(a);
    let k = (r / step).round();
    (r - k * step).abs() <= tol
}

/// Integer `k` with `a ≈ k·π/2 (mod 2π)`, if any.
pub fn quarter_turns(a: f64) -> Option<u8> {
    let r = reduce_angle(a);
    let k = (r / FRAC_PI_2).round();
    ((r - k * FRAC_PI_2).abs() <= ANGLE_TOL).then_some((k as i64).rem_euclid(4) as u8)
}

impl RuleParams {
    pub fn cphase(phi: Vec<f64>, theta: [f64; 3]) -> Self {
        Self {
            s: phi.len(),
            kind: RuleKind::Cphase,
            phi,
            theta,
            shift: None,
        }
    }

    pub fn shift(y: Coord, theta: [f64; 3]) -> Self {
        Self {
            s: y.len(),
            kind: RuleKind::Shift,
            phi: vec![0.0; y.len()],
            theta,
            shift: Some(y),
        }
    }

    pub fn identity(s: usize) -> Self {
        Self::cphase(vec![0.0; s], [0.0; 3])
    }

    /// Uniformly random controlled-phase rule with every `φ_i` bounded away
    /// from zero, so all entanglers are active.
    pub fn random_cphase<R: Rng>(s: usize, rng: &mut R) -> Self {
        let phi = (0..s).map(|_| rng.gen_range(0.05..TAU - 0.05)).collect();
        let theta = [
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
        ];
        Self::cphase(phi, theta)
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        if self.s == 0 {
            return Err(RuleError::ZeroDimension);
        }
        if !self.theta.iter().chain(&self.phi).all(|a| a.is_finite()) {
            return Err(RuleError::NonFinite);
        }
        match self.kind {
            RuleKind::Cphase => {
                if self.phi.len() != self.s {
                    return Err(RuleError::PhiLength {
                        s: self.s,
                        got: self.phi.len(),
                    });
                }
            }
            RuleKind::Shift => {
                let y = self.shift.as_ref().ok_or(RuleError::MissingShift)?;
                if y.len() != self.s {
                    return Err(RuleError::ShiftDimension {
                        s: self.s,
                        got: y.len(),
                    });
                }
                if lattice::l1(y) > 1 {
                    return Err(RuleError::ShiftOutsideNeighborhood(y.clone()));
                }
            }
        }
        Ok(())
    }

    /// Copy with every angle reduced into `[0, 2π)`.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.phi.iter_mut().for_each(|a| *a = reduce_angle(*a));
        out.theta.iter_mut().for_each(|a| *a = reduce_angle(*a));
        out
    }

    /// Controlled-phase angles actually in effect (all zero for shifts).
    pub fn active_phi(&self) -> Vec<f64> {
        match self.kind {
            RuleKind::Cphase => self.phi.clone(),
            RuleKind::Shift => vec![0.0; self.s],
        }
    }

    /// Shift vector, `0` for controlled-phase rules.
    pub fn shift_vector(&self) -> Coord {
        match self.kind {
            RuleKind::Shift => self.shift.clone().unwrap_or_else(|| vec![0; self.s]),
            RuleKind::Cphase => vec![0; self.s],
        }
    }

    /// A shift by a nonzero vector.
    pub fn is_nontrivial_shift(&self) -> bool {
        self.kind == RuleKind::Shift && lattice::l1(&self.shift_vector()) != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputStateParams {
    pub delta: [f64; 3],
}

impl InputStateParams {
    pub fn new(delta: [f64; 3]) -> Self {
        Self { delta }
    }

    pub fn normalized(&self) -> Self {
        Self {
            delta: self.delta.map(reduce_angle),
        }
    }

    /// Single-site amplitudes of `V(δ)|0⟩`.
    pub fn amplitudes(&self) -> [C64; 2] {
        let v = rotation2(self.delta);
        [v[0], v[2]]
    }
}

/// `V(θ)` as a row-major array `[v00, v01, v10, v11]`.
pub fn rotation2(theta: [f64; 3]) -> [C64; 4] {
    let rz = |l: f64| [C64::from_polar(1.0, -l / 2.0), C64::from_polar(1.0, l / 2.0)];
    let (a, b) = (rz(theta[0]), rz(theta[2]));
    let (c, s) = ((theta[1] / 2.0).cos(), (theta[1] / 2.0).sin());
    // Rz(θ1) · [[c, -s], [s, c]] · Rz(θ3)
    [
        a[0] * c * b[0],
        -a[0] * s * b[1],
        a[1] * s * b[0],
        a[1] * c * b[1],
    ]
}

/// `V(θ) = R_z(θ₁) R_y(θ₂) R_z(θ₃)` with `R_j(λ) = exp(-iλσ^j/2)`.
pub fn rotation_matrix(theta: [f64; 3]) -> CMat {
    CMat::from_row_slice(2, 2, &rotation2(theta))
}

/// `C(φ) = diag(1, 1, 1, e^{iφ})`.
pub fn cphase_matrix(phi: f64) -> CMat {
    let mut m = CMat::identity(4, 4);
    m[(3, 3)] = C64::from_polar(1.0, phi);
    m
}

pub fn swap_matrix() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(a, b)] = ONE;
    }
    m
}

/// Local rule `W` on the von Neumann neighbourhood, qubit `k` = `sites[k]`.
#[derive(Debug, Clone)]
pub struct LocalRule {
    pub s: usize,
    pub sites: Vec<Coord>,
    pub w: CMat,
}

impl LocalRule {
    /// Wrap an arbitrary neighbourhood unitary (used for negative tests).
    pub fn from_matrix(s: usize, w: CMat) -> Result<Self, RuleError> {
        let expected = 1usize << (2 * s + 1);
        if w.nrows() != expected || !w.is_square() {
            return Err(RuleError::MatrixDimension {
                expected,
                got: w.nrows(),
            });
        }
        let dev = (w.adjoint() * &w - CMat::identity(expected, expected)).norm();
        if dev > 1e-10 {
            return Err(RuleError::NotUnitary(dev));
        }
        Ok(Self {
            s,
            sites: von_neumann_neighborhood(s),
            w,
        })
    }

    /// `α₀(O) = W† (O ⊗ I) W` for a single-site operator `O`.
    pub fn alpha0(&self, o: &CMat) -> LocalOp {
        let lifted = embed(o, &self.sites[..1], &self.sites);
        LocalOp::new(self.sites.clone(), self.w.adjoint() * lifted * &self.w)
    }

    /// Images of `σ¹`, `σ²` at the origin, which generate `α(𝒜₀)`.
    pub fn generator_images(&self) -> [LocalOp; 2] {
        [self.alpha0(&pauli(1)), self.alpha0(&pauli(2))]
    }
}

/// Build the local rule `W = (V ⊗ I) U` for a parameter record.
pub fn local_rule_matrix(params: &RuleParams) -> Result<LocalRule, RuleError> {
    params.validate()?;
    let s = params.s;
    let sites = von_neumann_neighborhood(s);
    let n = sites.len();
    let dim = 1usize << n;
    let u = match params.kind {
        RuleKind::Cphase => {
            let mut u = CMat::zeros(dim, dim);
            for idx in 0..dim {
                let mut phase = 0.0;
                if idx & 1 == 1 {
                    for (i, phi) in params.phi.iter().enumerate() {
                        let up = (idx >> (2 * i + 1)) & 1;
                        let down = (idx >> (2 * i + 2)) & 1;
                        phase += phi * (up + down) as f64;
                    }
                }
                u[(idx, idx)] = C64::from_polar(1.0, phase);
            }
            u
        }
        RuleKind::Shift => {
            let y = params.shift_vector();
            let k = sites.iter().position(|c| *c == y).expect("validated shift");
            if k == 0 {
                CMat::identity(dim, dim)
            } else {
                embed(&swap_matrix(), &[sites[0].clone(), sites[k].clone()], &sites)
            }
        }
    };
    let v = embed(&rotation_matrix(params.theta), &sites[..1], &sites);
    let w = v * u;
    debug_assert!(is_unitary(&w, 1e-10));
    Ok(LocalRule { s, sites, w })
}

/// Offsets `x ≠ 0` whose neighbourhood overlaps the origin's:
/// `±e_i`, `±2e_i`, `±e_i ± e_j`.
pub fn overlap_offsets(s: usize) -> Vec<Coord> {
    let mut out = Vec::new();
    for i in 0..s {
        for sign in [1, -1] {
            out.push(lattice::unit(s, i, sign));
            out.push(lattice::unit(s, i, 2 * sign));
        }
        for j in i + 1..s {
            for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = vec![0; s];
                v[i] = a;
                v[j] = b;
                out.push(v);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Coord,
    pub a: usize,
    pub b: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub max_norm: f64,
}

/// Well-posedness: `[α₀(σ^a), τ^x α₀(σ^b)] = 0` for `a, b ∈ {1, 2}` and all
/// overlapping offsets `x`.
pub fn verify_local_rule(rule: &LocalRule) -> Verdict {
    let imgs = rule.generator_images();
    let mut violations = Vec::new();
    let mut max_norm: f64 = 0.0;
    for x in overlap_offsets(rule.s) {
        for (a, ia) in imgs.iter().enumerate() {
            for (b, ib) in imgs.iter().enumerate() {
                let norm = ia.commutator_norm(&ib.translate(&x));
                max_norm = max_norm.max(norm);
                if norm > COMMUTATOR_TOL {
                    violations.push(Violation {
                        x: x.clone(),
                        a: a + 1,
                        b: b + 1,
                        norm,
                    });
                }
            }
        }
    }
    Verdict {
        pass: violations.is_empty(),
        violations,
        max_norm,
    }
}

/// Controlled-NOT from the origin onto `+e_1`, identity elsewhere. Not a
/// valid local rule.
pub fn cnot_rule(s: usize) -> LocalRule {
    let sites = von_neumann_neighborhood(s);
    let mut cx = CMat::zeros(4, 4);
    // bit 0 = control (origin), bit 1 = target (+e_1)
    for (a, b) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        cx[(a, b)] = ONE;
    }
    let w = embed(&cx, &sites[..2], &sites);
    LocalRule::from_matrix(s, w).expect("CNOT is unitary")
}

/// Clifford subclass: `φ_i ∈ {0, π}` and `θ_j ∈ (π/2)·Z`, both mod 2π.
pub fn is_clifford(params: &RuleParams) -> bool {
    let phi_ok = params
        .active_phi()
        .iter()
        .all(|&p| near_multiple(p, PI, ANGLE_TOL));
    phi_ok && params.theta.iter().all(|&t| quarter_turns(t).is_some())
}

pub fn rule_to_json(params: &RuleParams) -> String {
    serde_json::to_string_pretty(params).expect("rule params serialize")
}

pub fn rule_from_json(text: &str) -> Result<RuleParams, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_closed_forms() {
        let ry = rotation_matrix([0.0, PI, 0.0]);
        assert!((ry[(0, 1)] + ONE).norm() < 1e-15);
        assert!((ry[(1, 0)] - ONE).norm() < 1e-15);
        let rz = rotation_matrix([PI, 0.0, 0.0]);
        assert!((rz[(0, 0)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((rz[(1, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn overlap_offset_counts() {
        assert_eq!(overlap_offsets(1).len(), 4);
        assert_eq!(overlap_offsets(2).len(), 8 + 4);
        assert_eq!(overlap_offsets(3).len(), 12 + 12);
    }
}
