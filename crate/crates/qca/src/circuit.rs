//! Finite-depth circuits for the rule families on periodic lattices.
//!
//! Layer order is Schrödinger order: layer 0 acts first. One QCA step of a
//! controlled-phase rule is the product of all controlled phases followed by
//! the site-wise rotation layer, `G = V^{⊗} · Π C(φ)`, which is the global
//! unitary whose Heisenberg action restricts to `α₀(O) = U†(V†OV ⊗ I)U`.
//!
//! The controlled phases commute, so they are tiled into `2s` non-overlapping
//! sublayers indexed by `(axis, parity of the lower endpoint)`, giving depth
//! `2s + 1 ≤ 2^s + 1`.

use crate::lattice::{self, Coord, LatticeError, LatticeSpec};
use crate::ops::{embed, CMat, C64};
use crate::rules::{cphase_matrix, rotation_matrix, RuleError, RuleKind, RuleParams};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("compile_step needs a controlled-phase rule")]
    NotCphase,
    #[error("rule dimension {rule} does not match lattice dimension {lattice}")]
    DimensionMismatch { rule: usize, lattice: usize },
    #[error("layer {layer} touches site {site} more than once")]
    Overlap { layer: usize, site: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rotation { site: usize, theta: [f64; 3] },
    Cphase { a: usize, b: usize, phi: f64 },
    Swap { a: usize, b: usize },
    /// Arbitrary unitary on a block; bit `k` of the matrix index is `sites[k]`.
    Block { sites: Vec<usize>, matrix: CMat },
}

impl Gate {
    pub fn sites(&self) -> Vec<usize> {
        match self {
            Gate::Rotation { site, .. } => vec![*site],
            Gate::Cphase { a, b, .. } | Gate::Swap { a, b } => vec![*a, *b],
            Gate::Block { sites, .. } => sites.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Rotation { .. } => "rotation",
            Gate::Cphase { .. } => "cphase",
            Gate::Swap { .. } => "swap",
            Gate::Block { .. } => "block",
        }
    }

    /// Dense unitary in the gate's own site order.
    pub fn matrix(&self) -> CMat {
        match self {
            Gate::Rotation { theta, .. } => rotation_matrix(*theta),
            Gate::Cphase { phi, .. } => cphase_matrix(*phi),
            Gate::Swap { .. } => crate::rules::swap_matrix(),
            Gate::Block { matrix, .. } => matrix.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        let angles: Vec<f64> = match self {
            Gate::Rotation { theta, .. } => theta.to_vec(),
            Gate::Cphase { phi, .. } => vec![*phi],
            _ => vec![],
        };
        let mut v = json!({ "kind": self.kind(), "sites": self.sites(), "angles": angles });
        if let Gate::Block { matrix, .. } = self {
            let rows: Vec<Vec<[f64; 2]>> = (0..matrix.nrows())
                .map(|i| {
                    (0..matrix.ncols())
                        .map(|j| [matrix[(i, j)].re, matrix[(i, j)].im])
                        .collect()
                })
                .collect();
            v["matrix"] = json!(rows);
        }
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Largest number of sites touched by a single gate.
    pub fn block_bound(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .map(|g| g.sites().len())
            .max()
            .unwrap_or(0)
    }

    /// Every layer acts on pairwise disjoint site sets.
    pub fn check_disjoint(&self) -> Result<(), CircuitError> {
        for (layer, gates) in self.layers.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for g in gates {
                for site in g.sites() {
                    if !seen.insert(site) {
                        return Err(CircuitError::Overlap { layer, site });
                    }
                }
            }
        }
        Ok(())
    }

    /// `other` after `self`.
    pub fn then(mut self, other: Circuit) -> Circuit {
        self.layers.extend(other.layers);
        self
    }

    pub fn repeat(&self, times: usize) -> Circuit {
        let mut out = Circuit::default();
        for _ in 0..times {
            out.layers.extend(self.layers.iter().cloned());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.layers
                .iter()
                .map(|l| Value::Array(l.iter().map(Gate::to_json).collect()))
                .collect(),
        )
    }
}

fn check_dims(params: &RuleParams, spec: &LatticeSpec) -> Result<(), CircuitError> {
    params.validate()?;
    if params.s != spec.s() {
        return Err(CircuitError::DimensionMismatch {
            rule: params.s,
            lattice: spec.s(),
        });
    }
    Ok(())
}

/// Controlled-phase sublayers: one per `(axis, parity)`, lexicographic.
pub fn cphase_sublayers(phi: &[f64], spec: &LatticeSpec) -> Vec<Vec<Gate>> {
    let mut layers = Vec::with_capacity(2 * spec.s());
    for (axis, &p) in phi.iter().enumerate() {
        for parity in 0..2i64 {
            let layer = spec
                .bonds()
                .into_iter()
                .filter(|&(lo, _, ax)| ax == axis && spec.unflatten(lo)[axis] % 2 == parity)
                .map(|(a, b, _)| Gate::Cphase { a, b, phi: p })
                .collect();
            layers.push(layer);
        }
    }
    layers
}

pub fn rotation_layer(theta: [f64; 3], spec: &LatticeSpec) -> Vec<Gate> {
    (0..spec.site_count())
        .map(|site| Gate::Rotation { site, theta })
        .collect()
}

/// One step of a controlled-phase rule: `2s` controlled-phase sublayers
/// followed by the rotation layer (kept even when `θ = 0`).
pub fn compile_step(params: &RuleParams, spec: &LatticeSpec) -> Result<Circuit, CircuitError> {
    check_dims(params, spec)?;
    if params.kind != RuleKind::Cphase {
        return Err(CircuitError::NotCphase);
    }
    spec.require_even()?;
    let mut layers = cphase_sublayers(&params.phi, spec);
    layers.push(rotation_layer(params.theta, spec));
    Ok(Circuit { layers })
}

/// Swap-chain realisation of the translation automorphism `O_x ↦ O_{x+y}`
/// for `y = ±e_i`: every ring along axis `i` gets a chain of `N − 1`
/// sequential swaps, rings in parallel. A basis excitation at `z` ends up at
/// `z − y`.
pub fn compile_shift(y: &[i64], spec: &LatticeSpec) -> Result<Circuit, CircuitError> {
    spec.check_dim(y)?;
    let (axis, sign) = lattice::as_unit(y).ok_or_else(|| LatticeError::NotUnitVector(y.to_vec()))?;
    let n = spec.extents()[axis] as i64;
    let ring_starts: Vec<Coord> = spec.sites().filter(|c| c[axis] == 0).collect();
    let steps: Vec<i64> = if sign > 0 {
        (0..n - 1).collect()
    } else {
        (0..n - 1).rev().collect()
    };
    let layers = steps
        .into_iter()
        .map(|p| {
            ring_starts
                .iter()
                .map(|base| {
                    let mut lo = base.clone();
                    lo[axis] = p;
                    let mut hi = base.clone();
                    hi[axis] = p + 1;
                    Gate::Swap {
                        a: spec.flatten(&lo),
                        b: spec.flatten(&hi),
                    }
                })
                .collect()
        })
        .collect();
    Ok(Circuit { layers })
}

/// Circuit for one step of any rule in the classified families: shifts are
/// swap chains followed by rotations.
pub fn compile_rule(params: &RuleParams, spec: &LatticeSpec) -> Result<Circuit, CircuitError> {
    check_dims(params, spec)?;
    match params.kind {
        RuleKind::Cphase => compile_step(params, spec),
        RuleKind::Shift => {
            let y = params.shift_vector();
            let mut c = if lattice::l1(&y) == 0 {
                Circuit::default()
            } else {
                compile_shift(&y, spec)?
            };
            c.layers.push(rotation_layer(params.theta, spec));
            Ok(c)
        }
    }
}

fn block_unitary(block: &[usize], gates: &[Gate]) -> CMat {
    let dim = 1usize << block.len();
    let labels: Vec<Coord> = block.iter().map(|&s| vec![s as i64]).collect();
    let mut u = CMat::identity(dim, dim);
    for g in gates {
        let sites: Vec<Coord> = g.sites().iter().map(|&s| vec![s as i64]).collect();
        u = embed(&g.matrix(), &sites, &labels) * u;
    }
    u
}

/// Depth-2 Margolus circuit for a controlled-phase rule.
///
/// Every bond lies either inside a super-cell block `𝔠 + 2j` (lower endpoint
/// even along the bond axis) or inside a quadrant block `𝔮(q) + 2j` (odd).
/// Since all controlled phases commute, layer 1 applies the even bonds
/// blockwise and layer 2 is the step unitary with layer 1 divided out: the
/// odd bonds followed by the rotations.
pub fn compile_margolus(
    params: &RuleParams,
    spec: &LatticeSpec,
    q: &[i64],
) -> Result<Circuit, CircuitError> {
    check_dims(params, spec)?;
    if params.kind != RuleKind::Cphase {
        return Err(CircuitError::NotCphase);
    }
    let (first, second) = lattice::margolus_partitions(spec, q)?;
    let bonds = spec.bonds();
    let inside = |block: &[usize], want_parity: i64| -> Vec<Gate> {
        bonds
            .iter()
            .filter(|&&(lo, hi, axis)| {
                spec.unflatten(lo)[axis].rem_euclid(2) == want_parity
                    && block.contains(&lo)
                    && block.contains(&hi)
            })
            .map(|&(a, b, axis)| Gate::Cphase {
                a,
                b,
                phi: params.phi[axis],
            })
            .collect()
    };
    let layer1 = first
        .iter()
        .map(|block| Gate::Block {
            sites: block.clone(),
            matrix: block_unitary(block, &inside(block, 0)),
        })
        .collect();
    let layer2 = second
        .iter()
        .map(|block| {
            let mut gates = inside(block, 1);
            gates.extend(block.iter().map(|&site| Gate::Rotation {
                site,
                theta: params.theta,
            }));
            Gate::Block {
                sites: block.clone(),
                matrix: block_unitary(block, &gates),
            }
        })
        .collect();
    Ok(Circuit {
        layers: vec![layer1, layer2],
    })
}

/// Global phase `e^{iγ}` maximising overlap, i.e. `⟨a|b⟩/|⟨a|b⟩|`.
pub fn relative_phase(a: &[C64], b: &[C64]) -> C64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    if ov.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        ov / ov.norm()
    }
}
