//! Dense operators on small ordered site lists.
//!
//! A [`LocalOp`] stores a `2^k × 2^k` matrix together with the `k` lattice
//! offsets it acts on; bit `j` of a matrix index is the qubit of `sites[j]`.
//! This is the currency of the local-rule and support-algebra code, where
//! everything lives on a handful of sites around the origin.

use crate::lattice::Coord;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix `σ^j`, `j ∈ {0,1,2,3}` with `σ^0 = I`.
pub fn pauli(j: usize) -> CMat {
    let m = match j {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("pauli index {j} out of range"),
    };
    CMat::from_row_slice(2, 2, &m)
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    m.is_square() && (m.adjoint() * m - CMat::identity(m.nrows(), m.ncols())).norm() <= tol
}

/// Extract the bits of `idx` at `positions` into a compact integer.
#[inline]
pub fn gather(idx: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((idx >> p) & 1) << k))
}

/// Inverse of [`gather`]: spread the low bits of `val` onto `positions`.
#[inline]
pub fn deposit(val: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((val >> k) & 1) << p))
}

fn positions_in(sites: &[Coord], target: &[Coord]) -> Vec<usize> {
    sites
        .iter()
        .map(|s| {
            target
                .iter()
                .position(|t| t == s)
                .unwrap_or_else(|| panic!("site {s:?} missing from target {target:?}"))
        })
        .collect()
}

/// Embed `mat` (acting on `sites`) into the space of `target ⊇ sites`.
pub fn embed(mat: &CMat, sites: &[Coord], target: &[Coord]) -> CMat {
    let pos = positions_in(sites, target);
    let rest: Vec<usize> = (0..target.len()).filter(|p| !pos.contains(p)).collect();
    let k = 1usize << sites.len();
    let dim = 1usize << target.len();
    let mut out = CMat::zeros(dim, dim);
    for r in 0..1usize << rest.len() {
        let base = deposit(r, &rest);
        for i in 0..k {
            let row = base | deposit(i, &pos);
            for j in 0..k {
                let v = mat[(i, j)];
                if v != ZERO {
                    out[(row, base | deposit(j, &pos))] = v;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LocalOp {
    pub sites: Vec<Coord>,
    pub mat: CMat,
}

impl LocalOp {
    pub fn new(sites: Vec<Coord>, mat: CMat) -> Self {
        assert_eq!(mat.nrows(), 1 << sites.len(), "matrix/site count mismatch");
        assert!(mat.is_square());
        Self { sites, mat }
    }

    pub fn single(site: Coord, m: CMat) -> Self {
        Self::new(vec![site], m)
    }

    pub fn translate(&self, v: &[i64]) -> Self {
        Self {
            sites: self
                .sites
                .iter()
                .map(|s| s.iter().zip(v).map(|(a, b)| a + b).collect())
                .collect(),
            mat: self.mat.clone(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            sites: self.sites.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn embed(&self, target: &[Coord]) -> CMat {
        embed(&self.mat, &self.sites, target)
    }

    /// Product on the union of both site lists (own sites first).
    pub fn mul(&self, other: &LocalOp) -> LocalOp {
        let mut union = self.sites.clone();
        for s in &other.sites {
            if !union.contains(s) {
                union.push(s.clone());
            }
        }
        let m = self.embed(&union) * other.embed(&union);
        LocalOp::new(union, m)
    }

    /// Normalised partial trace `Tr_rest(A) / 2^{|rest|}` onto the sites of
    /// `keep` that the operator acts on.
    pub fn reduce_to(&self, keep: &[Coord]) -> LocalOp {
        let inner: Vec<Coord> = self
            .sites
            .iter()
            .filter(|s| keep.contains(s))
            .cloned()
            .collect();
        let pos_in = positions_in(&inner, &self.sites);
        let pos_out: Vec<usize> = (0..self.sites.len())
            .filter(|p| !pos_in.contains(p))
            .collect();
        let di = 1usize << pos_in.len();
        let dout = 1usize << pos_out.len();
        let mut m = CMat::zeros(di, di);
        for a in 0..di {
            for b in 0..di {
                let (ra, rb) = (deposit(a, &pos_in), deposit(b, &pos_in));
                let mut acc = ZERO;
                for c in 0..dout {
                    let rc = deposit(c, &pos_out);
                    acc += self.mat[(ra | rc, rb | rc)];
                }
                m[(a, b)] = acc / dout as f64;
            }
        }
        LocalOp::new(inner, m)
    }

    /// Drop the sites on which the operator acts as the identity.
    pub fn trimmed(&self, tol: f64) -> LocalOp {
        let mut cur = self.clone();
        let scale = self.mat.norm().max(1e-300);
        for site in &self.sites {
            let rest: Vec<Coord> = cur.sites.iter().filter(|s| *s != site).cloned().collect();
            let b = cur.reduce_to(&rest);
            if (b.embed(&cur.sites) - &cur.mat).norm() <= tol * scale {
                cur = b;
            }
        }
        cur
    }

    /// Rows indexed by matrix units on `subset ∩ sites`, columns by matrix
    /// units on the remaining sites.
    fn reshape(&self, subset: &[Coord]) -> (Vec<Coord>, CMat) {
        let inner: Vec<Coord> = self
            .sites
            .iter()
            .filter(|s| subset.contains(s))
            .cloned()
            .collect();
        let pos_in = positions_in(&inner, &self.sites);
        let pos_out: Vec<usize> = (0..self.sites.len())
            .filter(|p| !pos_in.contains(p))
            .collect();
        let di = 1usize << pos_in.len();
        let dout = 1usize << pos_out.len();
        let mut m = CMat::zeros(di * di, dout * dout);
        for a in 0..di {
            for b in 0..di {
                for c in 0..dout {
                    for d in 0..dout {
                        let row = deposit(a, &pos_in) | deposit(c, &pos_out);
                        let col = deposit(b, &pos_in) | deposit(d, &pos_out);
                        m[(a + di * b, c + dout * d)] = self.mat[(row, col)];
                    }
                }
            }
        }
        (inner, m)
    }

    /// Operator-Schmidt factors on `subset`: operators `f_m` (acting on
    /// `subset ∩ sites`, in that order) with `A = Σ f_m ⊗ g_m` exactly and
    /// the `g_m` Hilbert–Schmidt orthonormal. Directions whose residual falls
    /// below `tol · ‖A‖` are dropped.
    ///
    /// The `g_m` are an orthonormal basis of the row space of the reshaped
    /// matrix, built by Gram–Schmidt with re-orthogonalisation; this keeps
    /// the decomposition exact without relying on a complex SVD.
    pub fn schmidt_factors(&self, subset: &[Coord], tol: f64) -> (Vec<Coord>, Vec<CMat>) {
        let (inner, m) = self.reshape(subset);
        let di = 1usize << inner.len();
        let cut = tol.max(1e-13) * m.norm();
        let mut ws: Vec<DVector<C64>> = Vec::new();
        for r in 0..m.nrows() {
            let mut v: DVector<C64> = m.row(r).adjoint();
            for _ in 0..2 {
                for w in &ws {
                    let c = w.dotc(&v);
                    v -= w * c;
                }
            }
            let n = v.norm();
            if n > cut {
                ws.push(v / C64::from(n));
            }
        }
        let factors = ws
            .iter()
            .map(|w| {
                let col = &m * w;
                CMat::from_column_slice(di, di, col.as_slice())
            })
            .collect();
        (inner, factors)
    }

    /// Frobenius norm of `[A, B]` computed through the overlap of the two
    /// supports, without forming operators on the union.
    pub fn commutator_norm(&self, other: &LocalOp) -> f64 {
        let overlap: Vec<Coord> = self
            .sites
            .iter()
            .filter(|s| other.sites.contains(s))
            .cloned()
            .collect();
        if overlap.is_empty() {
            return 0.0;
        }
        let (ia, fa) = self.schmidt_factors(&overlap, 0.0);
        let (ib, fb) = other.schmidt_factors(&overlap, 0.0);
        let fb: Vec<CMat> = fb.iter().map(|f| embed(f, &ib, &ia)).collect();
        let mut acc = 0.0;
        for a in &fa {
            for b in &fb {
                acc += (a * b - b * a).norm_squared();
            }
        }
        acc.sqrt()
    }
}
