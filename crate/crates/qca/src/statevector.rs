//! Dense statevector simulation.
//!
//! Qubit `k` is bit `k` of the amplitude index. A state carries the list of
//! lattice sites it holds (qubit `k` ↔ `sites[k]`), so circuits compiled on a
//! lattice can be applied to any subset of that lattice, in particular to a
//! causal cone.

use crate::circuit::{Circuit, Gate};
use crate::ops::{CMat, C64, ONE, ZERO};
use crate::rules::{rotation2, InputStateParams};
use std::collections::HashMap;
use thiserror::Error;

/// Largest qubit count the dense simulator accepts.
pub const MAX_QUBITS: usize = 28;
/// Tolerance on eigenvalues leaving `[0, 1]` before the entropy log.
pub const EIG_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{n} qubits exceed the dense simulation cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("gate touches site {0}, which is not part of the state")]
    SiteNotInState(usize),
    #[error("reduced state is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigenvalue {0:.3e} outside [0, 1] beyond tolerance")]
    EigenvalueOutOfRange(f64),
    #[error("amplitude vector has length {got}, expected a power of two")]
    BadLength { got: usize },
}

pub fn check_cap(n: usize) -> Result<(), SimError> {
    if n > MAX_QUBITS {
        Err(SimError::TooManyQubits { n, cap: MAX_QUBITS })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StateVector {
    sites: Vec<usize>,
    qubit_of: HashMap<usize, usize>,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(sites: Vec<usize>, amps: Vec<C64>) -> Result<Self, SimError> {
        check_cap(sites.len())?;
        if amps.len() != 1usize << sites.len() {
            return Err(SimError::BadLength { got: amps.len() });
        }
        let qubit_of = sites.iter().enumerate().map(|(q, &s)| (s, q)).collect();
        Ok(Self {
            sites,
            qubit_of,
            amps,
        })
    }

    /// Every site in the single-qubit state `a[0]|0⟩ + a[1]|1⟩`.
    pub fn product(sites: Vec<usize>, a: [C64; 2]) -> Result<Self, SimError> {
        check_cap(sites.len())?;
        let mut amps = Vec::with_capacity(1 << sites.len());
        amps.push(ONE);
        for _ in 0..sites.len() {
            let len = amps.len();
            amps.extend_from_within(..len);
            for (i, v) in amps.iter_mut().enumerate() {
                *v *= a[(i >= len) as usize];
            }
        }
        Self::from_amplitudes(sites, amps)
    }

    pub fn basis(sites: Vec<usize>, index: usize) -> Result<Self, SimError> {
        check_cap(sites.len())?;
        let mut amps = vec![ZERO; 1 << sites.len()];
        amps[index] = ONE;
        Self::from_amplitudes(sites, amps)
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn qubit(&self, site: usize) -> Result<usize, SimError> {
        self.qubit_of
            .get(&site)
            .copied()
            .ok_or(SimError::SiteNotInState(site))
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        match gate {
            Gate::Rotation { site, theta } => {
                let q = self.qubit(*site)?;
                apply_1q(&mut self.amps, q, rotation2(*theta));
            }
            Gate::Cphase { a, b, phi } => {
                let (qa, qb) = (self.qubit(*a)?, self.qubit(*b)?);
                apply_cphase(&mut self.amps, qa, qb, C64::from_polar(1.0, *phi));
            }
            Gate::Swap { a, b } => {
                let (qa, qb) = (self.qubit(*a)?, self.qubit(*b)?);
                apply_swap(&mut self.amps, qa, qb);
            }
            Gate::Block { sites, matrix } => {
                let qs = sites
                    .iter()
                    .map(|&s| self.qubit(s))
                    .collect::<Result<Vec<_>, _>>()?;
                apply_matrix(&mut self.amps, &qs, matrix);
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        for gate in circuit.layers.iter().flatten() {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// Like [`apply_circuit`](Self::apply_circuit) but silently skips gates
    /// touching sites outside the state (light-cone truncation).
    pub fn apply_circuit_restricted(&mut self, circuit: &Circuit) {
        for gate in circuit.layers.iter().flatten() {
            if gate.sites().iter().all(|s| self.qubit_of.contains_key(s)) {
                self.apply_gate(gate).expect("sites checked");
            }
        }
    }

    pub fn reduced_density(&self, site: usize) -> Result<DensityMatrix2, SimError> {
        let q = self.qubit(site)?;
        Ok(DensityMatrix2::from_raw(reduce_qubit(&self.amps, q)))
    }
}

/// `V(δ)|0⟩` on every site.
pub fn init_product_state(
    delta: &InputStateParams,
    sites: Vec<usize>,
) -> Result<StateVector, SimError> {
    StateVector::product(sites, delta.amplitudes())
}

#[inline]
fn insert_zero_bit(i: usize, q: usize) -> usize {
    let low = i & ((1 << q) - 1);
    ((i >> q) << (q + 1)) | low
}

/// Single-qubit gate `m` (row-major) on qubit `q`.
pub fn apply_1q(amps: &mut [C64], q: usize, m: [C64; 4]) {
    let stride = 1usize << q;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0] * x + m[1] * y;
            *b = m[2] * x + m[3] * y;
        }
    }
}

/// Multiply amplitudes with both bits `qa`, `qb` set by `phase`.
pub fn apply_cphase(amps: &mut [C64], qa: usize, qb: usize, phase: C64) {
    let mask = (1usize << qa) | (1usize << qb);
    let (lo, hi) = if qa < qb { (qa, qb) } else { (qb, qa) };
    let quarter = amps.len() >> 2;
    for i in 0..quarter {
        let idx = insert_zero_bit(insert_zero_bit(i, lo), hi) | mask;
        amps[idx] *= phase;
    }
}

pub fn apply_swap(amps: &mut [C64], qa: usize, qb: usize) {
    if qa == qb {
        return;
    }
    let (lo, hi) = if qa < qb { (qa, qb) } else { (qb, qa) };
    let quarter = amps.len() >> 2;
    for i in 0..quarter {
        let base = insert_zero_bit(insert_zero_bit(i, lo), hi);
        amps.swap(base | (1 << lo), base | (1 << hi));
    }
}

/// General `k`-qubit gate; bit `j` of the matrix index is qubit `qubits[j]`.
pub fn apply_matrix(amps: &mut [C64], qubits: &[usize], m: &CMat) {
    let k = qubits.len();
    let dim = 1usize << k;
    assert_eq!(m.nrows(), dim);
    let mut sorted = qubits.to_vec();
    sorted.sort_unstable();
    let offsets: Vec<usize> = (0..dim)
        .map(|v| crate::ops::deposit(v, qubits))
        .collect();
    let mut buf = vec![ZERO; dim];
    for i in 0..amps.len() >> k {
        let base = sorted.iter().fold(i, |acc, &q| insert_zero_bit(acc, q));
        for (slot, &o) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, &x) in buf.iter().enumerate() {
                acc += m[(r, c)] * x;
            }
            amps[base | o] = acc;
        }
    }
}

/// Raw `[ρ00, ρ01, ρ11]` of qubit `q` (ρ10 = conj ρ01).
pub fn reduce_qubit(amps: &[C64], q: usize) -> [C64; 3] {
    let stride = 1usize << q;
    let (mut r00, mut r11) = (0.0, 0.0);
    let mut r01 = ZERO;
    for chunk in amps.chunks_exact(2 * stride) {
        let (lo, hi) = chunk.split_at(stride);
        for (a, b) in lo.iter().zip(hi) {
            r00 += a.norm_sqr();
            r11 += b.norm_sqr();
            r01 += a * b.conj();
        }
    }
    [C64::from(r00), r01, C64::from(r11)]
}

/// Single-qubit reduced state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub m: [[C64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self, SimError> {
        let dev = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if dev > 1e-12 {
            return Err(SimError::NotHermitian(dev));
        }
        Ok(Self { m })
    }

    fn from_raw(r: [C64; 3]) -> Self {
        Self {
            m: [[r[0], r[1]], [r[1].conj(), r[2]]],
        }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// Closed-form eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let gap = ((a - d) * (a - d) + 4.0 * self.m[0][1].norm_sqr()).sqrt();
        [(a + d - gap) / 2.0, (a + d + gap) / 2.0]
    }

    /// `Tr[ρ σ^j]` for `j = 1, 2, 3`.
    pub fn bloch(&self) -> [f64; 3] {
        [
            2.0 * self.m[0][1].re,
            -2.0 * self.m[0][1].im,
            self.m[0][0].re - self.m[1][1].re,
        ]
    }
}

/// `−Σ p log₂ p` with `0 log 0 = 0`, after clamping eigenvalues to `[0, 1]`.
pub fn entropy_of(eigs: &[f64]) -> Result<f64, SimError> {
    let mut s = 0.0;
    for &p in eigs {
        if !(-EIG_CLAMP_TOL..=1.0 + EIG_CLAMP_TOL).contains(&p) || p.is_nan() {
            return Err(SimError::EigenvalueOutOfRange(p));
        }
        let p = p.clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

pub fn entropy(rho: &DensityMatrix2) -> Result<f64, SimError> {
    entropy_of(&rho.eigenvalues())
}

/// Dense unitary of a circuit on the given sites (small systems only).
pub fn circuit_unitary(circuit: &Circuit, sites: &[usize]) -> Result<CMat, SimError> {
    let dim = 1usize << sites.len();
    let mut u = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut sv = StateVector::basis(sites.to_vec(), col)?;
        sv.apply_circuit(circuit)?;
        for (row, a) in sv.amps.iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
