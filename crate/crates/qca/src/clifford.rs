//! Stabilizer fast path for the Clifford subclass (`φ_i ∈ {0, π}`, rotations
//! by multiples of `π/2`).
//!
//! Paulis are stored as `i^p · X^x Z^z` per site. Single-qubit conjugation
//! tables are classified once from the 2×2 matrix, so no floating point
//! enters the update loops.

use crate::circuit::{compile_step, Circuit, CircuitError, Gate};
use crate::lattice::{Coord, LatticeSpec};
use crate::ops::{CMat, C64, I, ONE, ZERO};
use crate::rules::{
    is_clifford, near_multiple, rotation2, RuleError, RuleKind, RuleParams, ANGLE_TOL,
};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("rule parameters are outside the Clifford subclass")]
    NonCliffordRule,
    #[error("{kind} gate on sites {sites:?} is not Clifford")]
    NonCliffordGate { kind: &'static str, sites: Vec<usize> },
    #[error("site {site} outside a tableau of {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Single-site Pauli `X^x Z^z` without phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pauli {
    pub x: bool,
    pub z: bool,
}

impl Pauli {
    pub const I: Pauli = Pauli { x: false, z: false };
    pub const X: Pauli = Pauli { x: true, z: false };
    pub const Z: Pauli = Pauli { x: false, z: true };
    /// `XZ = -iY`.
    pub const XZ: Pauli = Pauli { x: true, z: true };

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }

    /// `σ^j = i^phase · pauli`.
    pub fn sigma(j: usize) -> (u8, Pauli) {
        match j {
            0 => (0, Pauli::I),
            1 => (0, Pauli::X),
            2 => (1, Pauli::XZ),
            3 => (0, Pauli::Z),
            _ => panic!("pauli index {j} out of range"),
        }
    }

    fn matrix(self) -> [C64; 4] {
        match (self.x, self.z) {
            (false, false) => [ONE, ZERO, ZERO, ONE],
            (true, false) => [ZERO, ONE, ONE, ZERO],
            (false, true) => [ONE, ZERO, ZERO, -ONE],
            (true, true) => [ZERO, -ONE, ONE, ZERO],
        }
    }
}

/// `(i^a P)(i^b Q)` for single-site factors.
#[inline]
fn mul1(a: (u8, Pauli), b: (u8, Pauli)) -> (u8, Pauli) {
    let sign = 2 * (a.1.z & b.1.x) as u8;
    (
        (a.0 + b.0 + sign) % 4,
        Pauli {
            x: a.1.x ^ b.1.x,
            z: a.1.z ^ b.1.z,
        },
    )
}

/// Images `m X m†` and `m Z m†`, or `None` when `m` is not Clifford.
pub fn conjugation_table(m: [C64; 4]) -> Option<[(u8, Pauli); 2]> {
    let mul = |a: [C64; 4], b: [C64; 4]| {
        [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ]
    };
    let dag = [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()];
    let classify = |p: Pauli| -> Option<(u8, Pauli)> {
        let img = mul(mul(m, p.matrix()), dag);
        let phases = [ONE, I, -ONE, -I];
        for q in [Pauli::X, Pauli::Z, Pauli::XZ] {
            for (k, ph) in phases.iter().enumerate() {
                let cand = q.matrix().map(|e| e * ph);
                if cand.iter().zip(&img).all(|(a, b)| (a - b).norm() < 1e-9) {
                    return Some((k as u8, q));
                }
            }
        }
        None
    };
    Some([classify(Pauli::X)?, classify(Pauli::Z)?])
}

fn apply_table(table: &[(u8, Pauli); 2], p: Pauli) -> (u8, Pauli) {
    let mut out = (0, Pauli::I);
    if p.x {
        out = mul1(out, table[0]);
    }
    if p.z {
        out = mul1(out, table[1]);
    }
    out
}

/// `i^phase · ⊗_x P_x` with finite support on the infinite lattice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliString {
    pub phase: u8,
    /// Non-identity factors only.
    pub ops: BTreeMap<Coord, Pauli>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// `σ^j` at `site`.
    pub fn single(site: Coord, j: usize) -> Self {
        let (phase, p) = Pauli::sigma(j);
        let mut ops = BTreeMap::new();
        if !p.is_identity() {
            ops.insert(site, p);
        }
        Self { phase, ops }
    }

    /// Product of `σ^{j_k}` at the given sites (distinct sites).
    pub fn from_sigmas(factors: &[(Coord, usize)]) -> Self {
        factors
            .iter()
            .fold(Self::identity(), |acc, (c, j)| acc.mul(&Self::single(c.clone(), *j)))
    }

    pub fn support(&self) -> Vec<Coord> {
        self.ops.keys().cloned().collect()
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    /// `σ^j` index at `site` together with the phase carried there, i.e.
    /// the factor is `i^k σ^j`; mainly for display.
    pub fn sigma_at(&self, site: &[i64]) -> usize {
        match self.ops.get(site).copied().unwrap_or_default() {
            Pauli { x: false, z: false } => 0,
            Pauli { x: true, z: false } => 1,
            Pauli { x: true, z: true } => 2,
            Pauli { x: false, z: true } => 3,
        }
    }

    /// Overall phase once every `XZ` factor is rewritten as `-iY`, so the
    /// string equals `i^k ⊗ σ^{j_x}`.
    pub fn sigma_phase(&self) -> u8 {
        let ys = self.ops.values().filter(|p| p.x && p.z).count() as u8;
        (self.phase + 3 * (ys % 4)) % 4
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut phase = self.phase + other.phase;
        let mut ops = self.ops.clone();
        for (site, &q) in &other.ops {
            let p = ops.get(site).copied().unwrap_or_default();
            let (ph, r) = mul1((0, p), (0, q));
            phase += ph;
            if r.is_identity() {
                ops.remove(site);
            } else {
                ops.insert(site.clone(), r);
            }
        }
        PauliString {
            phase: phase % 4,
            ops,
        }
    }

    pub fn translate(&self, v: &[i64]) -> PauliString {
        PauliString {
            phase: self.phase,
            ops: self
                .ops
                .iter()
                .map(|(c, &p)| (crate::lattice::add(c, v), p))
                .collect(),
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .ops
            .iter()
            .filter(|(c, p)| {
                other
                    .ops
                    .get(*c)
                    .is_some_and(|q| (p.x & q.z) ^ (p.z & q.x))
            })
            .count();
        anti % 2 == 0
    }

    fn conjugate_cz(&mut self, a: &[i64], b: &[i64]) {
        let pa = self.ops.get(a).copied().unwrap_or_default();
        let pb = self.ops.get(b).copied().unwrap_or_default();
        self.phase = (self.phase + 2 * (pa.x & pb.x) as u8) % 4;
        let na = Pauli {
            x: pa.x,
            z: pa.z ^ pb.x,
        };
        let nb = Pauli {
            x: pb.x,
            z: pb.z ^ pa.x,
        };
        for (c, p) in [(a, na), (b, nb)] {
            if p.is_identity() {
                self.ops.remove(c);
            } else {
                self.ops.insert(c.to_vec(), p);
            }
        }
    }

    /// Dense matrix on `sites` (bit `k` = `sites[k]`).
    pub fn to_matrix(&self, sites: &[Coord]) -> CMat {
        let phase = [ONE, I, -ONE, -I][self.phase as usize];
        let mut m = CMat::from_element(1, 1, phase);
        for site in sites.iter().rev() {
            let p = self.ops.get(site).copied().unwrap_or_default();
            m = m.kronecker(&CMat::from_row_slice(2, 2, &p.matrix()));
        }
        m
    }
}

/// Heisenberg images `α₀(X)`, `α₀(Z)` of a Clifford rule.
pub fn clifford_images(params: &RuleParams) -> Result<[PauliString; 2], CliffordError> {
    params.validate()?;
    if !is_clifford(params) {
        return Err(CliffordError::NonCliffordRule);
    }
    let s = params.s;
    let v = rotation2(params.theta);
    let vdag = [v[0].conj(), v[2].conj(), v[1].conj(), v[3].conj()];
    let table = conjugation_table(vdag).ok_or(CliffordError::NonCliffordRule)?;
    let origin = vec![0i64; s];
    let mut out = [Pauli::X, Pauli::Z].map(|p| {
        let (phase, q) = apply_table(&table, p);
        let mut ops = BTreeMap::new();
        ops.insert(origin.clone(), q);
        PauliString { phase, ops }
    });
    for img in out.iter_mut() {
        match params.kind {
            RuleKind::Cphase => {
                for (axis, &phi) in params.phi.iter().enumerate() {
                    if near_multiple(phi, 2.0 * PI, ANGLE_TOL) {
                        continue;
                    }
                    for sign in [1, -1] {
                        img.conjugate_cz(&origin, &crate::lattice::unit(s, axis, sign));
                    }
                }
            }
            RuleKind::Shift => {
                let y = params.shift_vector();
                if let Some(p) = img.ops.remove(&origin) {
                    img.ops.insert(y, p);
                }
            }
        }
    }
    Ok(out)
}

/// `α^t(p)` on the infinite lattice.
pub fn propagate_pauli(
    params: &RuleParams,
    p: &PauliString,
    t: usize,
) -> Result<PauliString, CliffordError> {
    let [img_x, img_z] = clifford_images(params)?;
    let mut cur = p.clone();
    for _ in 0..t {
        let mut next = PauliString {
            phase: cur.phase,
            ops: BTreeMap::new(),
        };
        for (site, q) in &cur.ops {
            if q.x {
                next = next.mul(&img_x.translate(site));
            }
            if q.z {
                next = next.mul(&img_z.translate(site));
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Stabilizer generators of an `n`-qubit state, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
    phase: Vec<u8>,
}

#[inline]
fn get(row: &[u64], q: usize) -> bool {
    (row[q / 64] >> (q % 64)) & 1 == 1
}

#[inline]
fn put(row: &mut [u64], q: usize, v: bool) {
    let mask = 1u64 << (q % 64);
    if v {
        row[q / 64] |= mask;
    } else {
        row[q / 64] &= !mask;
    }
}

impl StabilizerTableau {
    /// `|0…0⟩`, stabilized by every `Z_k`.
    pub fn zero_state(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut z = vec![vec![0u64; words]; n];
        for (k, row) in z.iter_mut().enumerate() {
            put(row, k, true);
        }
        Self {
            n,
            x: vec![vec![0u64; words]; n],
            z,
            phase: vec![0; n],
        }
    }

    /// Parse generators such as `["+XZ", "-ZX", "IY"]`; character `k` is
    /// qubit `k`.
    pub fn from_strings(gens: &[&str]) -> Result<Self, CliffordError> {
        let n = gens.len();
        let mut tab = Self::zero_state(n);
        for (r, g) in gens.iter().enumerate() {
            let (mut phase, body) = match g.as_bytes().first() {
                Some(b'+') => (0u8, &g[1..]),
                Some(b'-') => (2u8, &g[1..]),
                _ => (0u8, &g[..]),
            };
            if body.chars().count() != n {
                return Err(CliffordError::Parse(g.to_string()));
            }
            put(&mut tab.z[r], r, false);
            for (q, ch) in body.chars().enumerate() {
                let (ph, p) = match ch {
                    'I' => Pauli::sigma(0),
                    'X' => Pauli::sigma(1),
                    'Y' => Pauli::sigma(2),
                    'Z' => Pauli::sigma(3),
                    _ => return Err(CliffordError::Parse(g.to_string())),
                };
                phase += ph;
                put(&mut tab.x[r], q, p.x);
                put(&mut tab.z[r], q, p.z);
            }
            tab.phase[r] = phase % 4;
        }
        Ok(tab)
    }

    /// Generators in the `from_strings` format.
    pub fn to_strings(&self) -> Vec<String> {
        (0..self.n)
            .map(|r| {
                let mut ys = 0u8;
                let body: String = (0..self.n)
                    .map(|q| match (get(&self.x[r], q), get(&self.z[r], q)) {
                        (false, false) => 'I',
                        (true, false) => 'X',
                        (false, true) => 'Z',
                        (true, true) => {
                            ys += 1;
                            'Y'
                        }
                    })
                    .collect();
                // X^1 Z^1 = -iY
                let ph = (self.phase[r] + 3 * (ys % 4)) % 4;
                let sign = match ph {
                    0 => "+",
                    2 => "-",
                    1 => "+i",
                    _ => "-i",
                };
                format!("{sign}{body}")
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<(), CliffordError> {
        if q >= self.n {
            return Err(CliffordError::SiteOutOfRange { site: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<(), CliffordError> {
        self.check(a)?;
        self.check(b)?;
        for r in 0..self.n {
            let (xa, xb) = (get(&self.x[r], a), get(&self.x[r], b));
            if xa & xb {
                self.phase[r] = (self.phase[r] + 2) % 4;
            }
            if xb {
                let za = get(&self.z[r], a);
                put(&mut self.z[r], a, !za);
            }
            if xa {
                let zb = get(&self.z[r], b);
                put(&mut self.z[r], b, !zb);
            }
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<(), CliffordError> {
        self.check(a)?;
        self.check(b)?;
        for r in 0..self.n {
            for row in [&mut self.x[r], &mut self.z[r]] {
                let (va, vb) = (get(row, a), get(row, b));
                put(row, a, vb);
                put(row, b, va);
            }
        }
        Ok(())
    }

    /// Conjugate qubit `q` by a single-qubit Clifford given by its table.
    pub fn apply_single(&mut self, q: usize, table: &[(u8, Pauli); 2]) -> Result<(), CliffordError> {
        self.check(q)?;
        for r in 0..self.n {
            let p = Pauli {
                x: get(&self.x[r], q),
                z: get(&self.z[r], q),
            };
            let (ph, img) = apply_table(table, p);
            self.phase[r] = (self.phase[r] + ph) % 4;
            put(&mut self.x[r], q, img.x);
            put(&mut self.z[r], q, img.z);
        }
        Ok(())
    }

    /// Generators pairwise commute and are independent over GF(2).
    pub fn is_valid(&self) -> bool {
        for a in 0..self.n {
            for b in a + 1..self.n {
                let sym: u32 = (0..self.x[a].len())
                    .map(|w| {
                        ((self.x[a][w] & self.z[b][w]) ^ (self.z[a][w] & self.x[b][w])).count_ones()
                    })
                    .sum();
                if sym % 2 == 1 {
                    return false;
                }
            }
        }
        let rows: Vec<Vec<u64>> = (0..self.n)
            .map(|r| self.x[r].iter().chain(&self.z[r]).copied().collect())
            .collect();
        gf2_rank(rows) == self.n
    }
}

/// Rank over GF(2) of bit-packed rows.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let width = rows.first().map_or(0, Vec::len) * 64;
    let mut rank = 0;
    for col in 0..width {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Schrödinger evolution `S ↦ G S G†` through every gate of `circuit`.
pub fn evolve_tableau(
    mut tab: StabilizerTableau,
    circuit: &Circuit,
) -> Result<StabilizerTableau, CliffordError> {
    // classify each distinct rotation once
    let mut tables: HashMap<[u64; 3], [(u8, Pauli); 2]> = HashMap::new();
    for gate in circuit.layers.iter().flatten() {
        let bad = || CliffordError::NonCliffordGate {
            kind: gate.kind(),
            sites: gate.sites(),
        };
        match gate {
            Gate::Rotation { site, theta } => {
                let key = theta.map(f64::to_bits);
                let table = match tables.get(&key) {
                    Some(t) => *t,
                    None => {
                        let t = conjugation_table(rotation2(*theta)).ok_or_else(bad)?;
                        tables.insert(key, t);
                        t
                    }
                };
                tab.apply_single(*site, &table)?;
            }
            Gate::Cphase { a, b, phi } => {
                if near_multiple(*phi, 2.0 * PI, ANGLE_TOL) {
                    tab.check(*a)?;
                    tab.check(*b)?;
                } else if near_multiple(*phi, PI, ANGLE_TOL) {
                    tab.apply_cz(*a, *b)?;
                } else {
                    return Err(bad());
                }
            }
            Gate::Swap { a, b } => tab.apply_swap(*a, *b)?,
            Gate::Block { .. } => return Err(bad()),
        }
    }
    Ok(tab)
}

/// Entanglement entropy (bits) of `region` for a pure stabilizer state:
/// `S = |region| − log₂|G_region|`, evaluated as `rank(G|_region) − |region|`
/// where `G|_region` is the generator matrix restricted to the region.
pub fn stabilizer_entropy(tab: &StabilizerTableau, region: &[usize]) -> usize {
    let k = region.len();
    if k == 0 {
        return 0;
    }
    let words = (2 * k).div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..tab.n)
        .map(|r| {
            let mut row = vec![0u64; words];
            for (j, &q) in region.iter().enumerate() {
                assert!(q < tab.n, "region site {q} outside tableau");
                put(&mut row, 2 * j, get(&tab.x[r], q));
                put(&mut row, 2 * j + 1, get(&tab.z[r], q));
            }
            row
        })
        .collect();
    gf2_rank(rows) - k
}

/// Origin entropy after `t` steps from `V(δ)|0⟩^{⊗}`, on the periodic
/// lattice of extent `2t + 2` (large enough that the cone never wraps).
pub fn clifford_site_entropy(
    params: &RuleParams,
    delta: [f64; 3],
    t: usize,
) -> Result<usize, CliffordError> {
    if !is_clifford(params) {
        return Err(CliffordError::NonCliffordRule);
    }
    let spec = LatticeSpec::cubic(params.s, 2 * t + 2).map_err(CircuitError::from)?;
    let n = spec.site_count();
    let prep = Circuit {
        layers: vec![crate::circuit::rotation_layer(delta, &spec)],
    };
    let step = compile_step(params, &spec)?;
    let tab = evolve_tableau(StabilizerTableau::zero_state(n), &prep.then(step.repeat(t)))?;
    Ok(stabilizer_entropy(&tab, &[0]))
}
