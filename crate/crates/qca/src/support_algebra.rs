//! Support algebras, the local configuration of a rule, quadrant supports
//! and the per-axis index.
//!
//! All algebras are finite-dimensional `*`-subalgebras of `ℳ_{2^k}` stored
//! as Hilbert–Schmidt orthonormal bases. Operators live on explicit lattice
//! offsets (no periodic wrap), so every support is computed as on the
//! infinite lattice.
//!
//! An algebra only records the sites of the requested region that the
//! generating images actually touch; on the remaining sites it is the
//! identity, which changes neither its dimension nor its center.

use crate::lattice::{self, super_cell, Coord};
use crate::ops::{embed, pauli, CMat, LocalOp, C64};
use crate::rules::{verify_local_rule, LocalRule};
use nalgebra::DVector;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Rank threshold for span and null-space decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Relative singular-value cut for operator-Schmidt factors.
pub const SCHMIDT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SupportError {
    #[error("local rule fails the well-posedness check (max commutator {0:.3e})")]
    Unverified(f64),
    #[error("closure on {sites} sites exceeded dimension {limit}")]
    ClosureOverflow { sites: usize, limit: usize },
    #[error("support on quadrant {q:?} has center of dimension {center}: direct sum / nonprime ambiguity")]
    DirectSum { q: Coord, center: usize },
    #[error("support dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("quadrant dimensions multiply to {got}, expected {expected}")]
    DimensionProduct { got: u64, expected: u64 },
    #[error("quadrant exponents {0:?} do not share a parity")]
    Parity(Vec<u32>),
    #[error("quadrant supports do not commute (max commutator {0:.3e})")]
    NonCommuting(f64),
    #[error("index component {axis} is not rational (exponent {num}/{den})")]
    NonIntegralIndex { axis: usize, num: i64, den: i64 },
}

#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    /// Sites the algebra acts on (bit `k` = `region[k]`).
    pub region: Vec<Coord>,
    /// Hilbert–Schmidt orthonormal basis.
    pub basis: Vec<CMat>,
    pub center_dim: usize,
}

fn try_add(basis: &mut Vec<CMat>, cand: CMat) -> bool {
    let n0 = cand.norm();
    if n0 <= RANK_TOL {
        return false;
    }
    let mut v = cand / C64::from(n0);
    // two Gram–Schmidt passes keep the basis orthonormal to rounding
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dotc(&v);
            v -= b * c;
        }
    }
    let r = v.norm();
    if r <= RANK_TOL {
        return false;
    }
    basis.push(v / C64::from(r));
    true
}

fn identity_on(k: usize) -> CMat {
    let d = 1usize << k;
    CMat::identity(d, d) / C64::from((d as f64).sqrt())
}

impl MatrixAlgebra {
    /// The `*`-algebra generated by `gens` (acting on `region`) and the
    /// identity.
    pub fn generated(region: Vec<Coord>, gens: &[CMat]) -> Result<Self, SupportError> {
        let k = region.len();
        let d = 1usize << k;
        let mut g: Vec<CMat> = Vec::with_capacity(2 * gens.len());
        for m in gens {
            let n = m.norm();
            if n <= RANK_TOL {
                continue;
            }
            let m = m / C64::from(n);
            g.push(m.adjoint());
            g.push(m);
        }
        let mut basis = vec![identity_on(k)];
        let mut i = 0;
        while i < basis.len() {
            for h in &g {
                let c = h * &basis[i];
                try_add(&mut basis, c);
            }
            if basis.len() > d * d {
                return Err(SupportError::ClosureOverflow {
                    sites: k,
                    limit: d * d,
                });
            }
            i += 1;
        }
        let center_dim = center_dim(&basis, &g);
        Ok(Self {
            region,
            basis,
            center_dim,
        })
    }

    pub fn trivial() -> Self {
        Self {
            region: vec![],
            basis: vec![identity_on(0)],
            center_dim: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `d` with `dim = d²` when the center is trivial (the algebra is a
    /// full matrix algebra).
    pub fn sqrt_dim(&self) -> Option<usize> {
        if self.center_dim != 1 {
            return None;
        }
        let d = (self.dim() as f64).sqrt().round() as usize;
        (d * d == self.dim()).then_some(d)
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 1
    }

    pub fn is_abelian(&self) -> bool {
        self.center_dim == self.dim()
    }

    /// Bloch axis `n` of a two-dimensional abelian algebra on a single site
    /// (`𝒟(n) = span{I, n·σ}`), with the first nonzero component positive.
    pub fn bloch_axis(&self) -> Option<[f64; 3]> {
        if self.region.len() != 1 || self.dim() != 2 || !self.is_abelian() {
            return None;
        }
        // the basis element orthogonal to the identity is ∝ n·σ
        let b = &self.basis[1];
        let comps: Vec<C64> = (1..4).map(|j| (pauli(j) * b).trace() / 2.0).collect();
        let big = comps
            .iter()
            .cloned()
            .fold(C64::new(0.0, 0.0), |a, c| if c.norm() > a.norm() { c } else { a });
        let phase = big / big.norm();
        let mut n: Vec<f64> = comps.iter().map(|c| (c / phase).re).collect();
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        n.iter_mut().for_each(|x| *x /= len);
        if let Some(first) = n.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                n.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Some([n[0], n[1], n[2]])
    }

    pub fn translate(&self, v: &[i64]) -> Self {
        Self {
            region: self.region.iter().map(|c| lattice::add(c, v)).collect(),
            basis: self.basis.clone(),
            center_dim: self.center_dim,
        }
    }

    /// Basis embedded into `target ⊇ region`.
    pub fn embedded_basis(&self, target: &[Coord]) -> Vec<CMat> {
        self.basis
            .iter()
            .map(|b| embed(b, &self.region, target))
            .collect()
    }

    /// Largest distance of a unit element of `other` from `self`.
    pub fn containment_defect(&self, other: &MatrixAlgebra) -> f64 {
        let target = union(&[&self.region, &other.region]);
        let mine = orthonormal(self.embedded_basis(&target));
        other
            .embedded_basis(&target)
            .into_iter()
            .map(|v| {
                let v = &v / C64::from(v.norm());
                let mut r = v.clone();
                for b in &mine {
                    r -= b * b.dotc(&v);
                }
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, other: &MatrixAlgebra) -> bool {
        self.containment_defect(other) <= 1e-8
    }

    /// Largest Frobenius norm (on the union of both regions) of `[a, b]`
    /// over basis elements, evaluated through the overlap.
    pub fn commutator_norm(&self, other: &MatrixAlgebra) -> f64 {
        if !self.region.iter().any(|c| other.region.contains(c)) {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for x in &self.basis {
            let a = LocalOp::new(self.region.clone(), x.clone());
            for y in &other.basis {
                let b = LocalOp::new(other.region.clone(), y.clone());
                worst = worst.max(a.commutator_norm(&b));
            }
        }
        worst
    }

    /// Smallest algebra containing all of `parts`.
    pub fn join(parts: &[&MatrixAlgebra]) -> Result<Self, SupportError> {
        let regions: Vec<&[Coord]> = parts.iter().map(|p| p.region.as_slice()).collect();
        let target = union(&regions);
        let gens: Vec<CMat> = parts
            .iter()
            .flat_map(|p| p.embedded_basis(&target))
            .collect();
        Self::generated(target, &gens)
    }

    /// Tensor product of algebras on pairwise disjoint regions.
    pub fn tensor(parts: &[&MatrixAlgebra]) -> Self {
        let mut region: Vec<Coord> = Vec::new();
        let mut basis = vec![CMat::from_element(1, 1, C64::from(1.0))];
        for p in parts {
            // new sites take the higher bits: kron(new, old)
            basis = p
                .basis
                .iter()
                .flat_map(|b| basis.iter().map(move |a| b.kronecker(a)))
                .collect();
            region.extend(p.region.iter().cloned());
        }
        // Z(A ⊗ B) = Z(A) ⊗ Z(B); the Kronecker basis is already orthonormal
        let center_dim = parts.iter().map(|p| p.center_dim).product();
        Self {
            region,
            basis,
            center_dim,
        }
    }
}

fn union(regions: &[&[Coord]]) -> Vec<Coord> {
    let mut out: Vec<Coord> = Vec::new();
    for r in regions {
        for c in r.iter() {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
    }
    out
}

fn orthonormal(vs: Vec<CMat>) -> Vec<CMat> {
    let mut basis = Vec::new();
    for v in vs {
        try_add(&mut basis, v);
    }
    basis
}

/// Dimension of `{c ∈ span(basis) : [c, g] = 0 ∀ g}`.
fn center_dim(basis: &[CMat], gens: &[CMat]) -> usize {
    if gens.is_empty() || basis.len() == 1 {
        return basis.len();
    }
    // column k = vec([b_k, g]) stacked over g; the nullity is the answer
    let cols: Vec<DVector<C64>> = basis
        .iter()
        .map(|b| {
            let parts: Vec<C64> = gens
                .iter()
                .flat_map(|g| (b * g - g * b).iter().copied().collect::<Vec<_>>())
                .collect();
            DVector::from_vec(parts)
        })
        .collect();
    let scale = cols.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    for mut v in cols {
        for _ in 0..2 {
            for w in &ortho {
                let c = w.dotc(&v);
                v -= w * c;
            }
        }
        let n = v.norm();
        if n > RANK_TOL * scale {
            ortho.push(v / C64::from(n));
        }
    }
    basis.len() - ortho.len()
}

/// Support algebra of the algebra generated by `images` on `subregion`:
/// operator-Schmidt factors of every image on the subregion, closed under
/// products and adjoints.
pub fn support_on(images: &[LocalOp], subregion: &[Coord]) -> Result<MatrixAlgebra, SupportError> {
    let images: Vec<LocalOp> = images.iter().map(|op| op.trimmed(SCHMIDT_TOL)).collect();
    let touched: Vec<Coord> = subregion
        .iter()
        .filter(|c| images.iter().any(|op| op.sites.contains(c)))
        .cloned()
        .collect();
    if touched.is_empty() {
        return Ok(MatrixAlgebra::trivial());
    }
    let mut gens = Vec::new();
    for op in &images {
        let (inner, factors) = op.schmidt_factors(&touched, SCHMIDT_TOL);
        if inner.is_empty() {
            continue;
        }
        gens.extend(factors.iter().map(|f| embed(f, &inner, &touched)));
    }
    MatrixAlgebra::generated(touched, &gens)
}

/// Images `α(σ¹_x)`, `α(σ²_x)` for `x ∈ lambda`; they generate `α(𝒜_Λ)`.
pub fn generator_images(rule: &LocalRule, lambda: &[Coord]) -> Vec<LocalOp> {
    let base = rule.generator_images();
    lambda
        .iter()
        .flat_map(|x| base.iter().map(move |op| op.translate(x)))
        .collect()
}

/// Images of every nontrivial Pauli product on `lambda`, built by
/// multiplying single-site images.
pub fn pauli_product_images(rule: &LocalRule, lambda: &[Coord]) -> Vec<LocalOp> {
    let singles: Vec<Vec<LocalOp>> = lambda
        .iter()
        .map(|x| (1..4).map(|j| rule.alpha0(&pauli(j)).translate(x)).collect())
        .collect();
    let total = 4usize.pow(lambda.len() as u32);
    (1..total)
        .map(|code| {
            let mut acc: Option<LocalOp> = None;
            for (k, imgs) in singles.iter().enumerate() {
                let j = (code / 4usize.pow(k as u32)) % 4;
                if j == 0 {
                    continue;
                }
                let img = &imgs[j - 1];
                acc = Some(match acc {
                    None => img.clone(),
                    Some(a) => a.mul(img),
                });
            }
            acc.expect("code is nonzero")
        })
        .collect()
}

/// All set partitions of `items`.
pub fn set_partitions(items: &[Coord]) -> Vec<Vec<Vec<Coord>>> {
    let Some((first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for p in set_partitions(rest) {
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k].insert(0, first.clone());
            out.push(q);
        }
        let mut q = p;
        q.insert(0, vec![first.clone()]);
        out.push(q);
    }
    out
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AxisSupport {
    pub axis: usize,
    /// Dimension of each of the two supports on `∓e_axis`.
    pub dim: usize,
    /// Bloch axes on `-e_axis` and `+e_axis` when the pair is abelian.
    pub n: Option<[[f64; 3]; 2]>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "case")]
pub enum Configuration {
    /// `α(𝒜₀) ⊆ 𝒜_x ⊗ ℐ`: a shift by `x` (or a site-wise rotation for `x = 0`).
    #[serde(rename = "CASE_I")]
    CaseI { x: Coord },
    /// `α(𝒜₀) ⊆ 𝒜₀ ⊗ ⊗_i (𝒟(n_i) ⊗ 𝒟(n_i))`.
    #[serde(rename = "CASE_II")]
    CaseII { axes: Vec<AxisSupport> },
    #[serde(rename = "UNCLASSIFIED")]
    Unclassified,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub config: Configuration,
    /// `dim 𝒮⁰_x` for every `x ∈ 𝒩`, in neighbourhood order.
    pub dims: Vec<(Coord, usize)>,
}

/// Single-site supports of `α(𝒜₀)` on the neighbourhood, matched against
/// the two admissible configurations.
pub fn classify_configuration(rule: &LocalRule) -> Result<Classification, SupportError> {
    let verdict = verify_local_rule(rule);
    if !verdict.pass {
        return Err(SupportError::Unverified(verdict.max_norm));
    }
    let images = rule.generator_images();
    let algebras = rule
        .sites
        .iter()
        .map(|x| support_on(&images, std::slice::from_ref(x)))
        .collect::<Result<Vec<_>, _>>()?;
    let dims: Vec<(Coord, usize)> = rule
        .sites
        .iter()
        .zip(&algebras)
        .map(|(x, a)| (x.clone(), a.dim()))
        .collect();
    let full: Vec<usize> = (0..dims.len()).filter(|&k| dims[k].1 == 4).collect();
    let config = if full.len() == 1 && dims.iter().all(|(_, d)| *d == 4 || *d == 1) {
        Configuration::CaseI {
            x: dims[full[0]].0.clone(),
        }
    } else if dims[0].1 == 4 {
        // neighbourhood order: [0, +e1, -e1, +e2, -e2, ...]
        let mut axes = Vec::new();
        let mut ok = true;
        for axis in 0..rule.s {
            let (up, down) = (&algebras[2 * axis + 1], &algebras[2 * axis + 2]);
            match (down.dim(), up.dim()) {
                (1, 1) => axes.push(AxisSupport {
                    axis,
                    dim: 1,
                    n: None,
                }),
                (2, 2) => match (down.bloch_axis(), up.bloch_axis()) {
                    (Some(a), Some(b))
                        if (a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>().abs() - 1.0)
                            .abs()
                            < 1e-8 =>
                    {
                        axes.push(AxisSupport {
                            axis,
                            dim: 2,
                            n: Some([a, b]),
                        })
                    }
                    _ => ok = false,
                },
                _ => ok = false,
            }
        }
        if ok {
            Configuration::CaseII { axes }
        } else {
            Configuration::Unclassified
        }
    } else {
        Configuration::Unclassified
    };
    Ok(Classification { config, dims })
}

#[derive(Debug, Clone)]
pub struct QuadrantSupport {
    pub q: Coord,
    pub algebra: MatrixAlgebra,
    /// `d(𝔮(q)) = 2^n`.
    pub d: usize,
    pub n: u32,
}

/// Supports `𝒮^𝔠_{𝔮(q)}` of `α(𝒜_𝔠)` on all `2^s` quadrants, with the
/// dimension identity `Π d = 2^{2^s}` and the common-parity constraint
/// checked.
pub fn quadrant_supports(rule: &LocalRule) -> Result<Vec<QuadrantSupport>, SupportError> {
    let verdict = verify_local_rule(rule);
    if !verdict.pass {
        return Err(SupportError::Unverified(verdict.max_norm));
    }
    let s = rule.s;
    let images = generator_images(rule, &super_cell(s));
    let mut out = Vec::new();
    for (q, sites) in lattice::quadrants(s) {
        let algebra = support_on(&images, &sites)?;
        let d = algebra.sqrt_dim().ok_or_else(|| SupportError::DirectSum {
            q: q.clone(),
            center: algebra.center_dim,
        })?;
        if !d.is_power_of_two() {
            return Err(SupportError::NotPowerOfTwo(d));
        }
        out.push(QuadrantSupport {
            q,
            algebra,
            d,
            n: d.trailing_zeros(),
        });
    }
    let got: u64 = out.iter().map(|e| e.d as u64).product();
    let expected = 1u64 << (1u32 << s);
    if got != expected {
        return Err(SupportError::DimensionProduct { got, expected });
    }
    let ns: Vec<u32> = out.iter().map(|e| e.n).collect();
    if ns.iter().any(|n| n % 2 != ns[0] % 2) {
        return Err(SupportError::Parity(ns));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutationVerdict {
    pub pass: bool,
    pub max_norm: f64,
}

/// `[τ^{-q} 𝒮_{𝔮(q)}, τ^{-p} 𝒮_{𝔮(p)}] = 0` for all `q ≠ p`.
pub fn check_quadrant_commutation(supports: &[QuadrantSupport]) -> CommutationVerdict {
    let moved: Vec<MatrixAlgebra> = supports
        .iter()
        .map(|e| {
            let back: Coord = e.q.iter().map(|x| -x).collect();
            e.algebra.translate(&back)
        })
        .collect();
    let mut max_norm: f64 = 0.0;
    for a in 0..moved.len() {
        for b in a + 1..moved.len() {
            max_norm = max_norm.max(moved[a].commutator_norm(&moved[b]));
        }
    }
    CommutationVerdict {
        pass: max_norm <= RANK_TOL,
        max_norm,
    }
}

/// Positive rational `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Ratio {
    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    fn power_of_two(e: i64) -> Self {
        if e >= 0 {
            Ratio {
                num: 1 << e,
                den: 1,
            }
        } else {
            Ratio {
                num: 1,
                den: 1 << (-e),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexVector {
    pub components: Vec<Ratio>,
}

impl IndexVector {
    pub fn is_trivial(&self) -> bool {
        self.components.iter().all(Ratio::is_one)
    }

    /// Components as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.components.iter().map(|r| r.to_string()).collect()
    }
}

/// Integers print bare, other ratios as `p/q`; components comma-separated.
impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|r| {
                if r.den == 1 {
                    r.num.to_string()
                } else {
                    r.to_string()
                }
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `ι_i = (Π_{q ∈ R_i} d(𝔮(q)) / 2^{2^{s-1}})^{1/2^{s-1}}` from quadrant
/// supports.
pub fn index_from_supports(s: usize, supports: &[QuadrantSupport]) -> Result<IndexVector, SupportError> {
    let half = 1i64 << (s - 1);
    let mut components = Vec::with_capacity(s);
    for axis in 0..s {
        let total: i64 = supports
            .iter()
            .filter(|e| e.q[axis] == -1)
            .map(|e| e.n as i64)
            .sum();
        let num = total - half;
        if num % half != 0 {
            return Err(SupportError::NonIntegralIndex {
                axis,
                num,
                den: half,
            });
        }
        components.push(Ratio::power_of_two(num / half));
    }
    Ok(IndexVector { components })
}

/// Full index pipeline: quadrant supports, commutation hypothesis, index.
pub fn index_vector(rule: &LocalRule) -> Result<IndexVector, SupportError> {
    let supports = quadrant_supports(rule)?;
    let verdict = check_quadrant_commutation(&supports);
    if !verdict.pass {
        return Err(SupportError::NonCommuting(verdict.max_norm));
    }
    index_from_supports(rule.s, &supports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_single_site_algebra() {
        let a = MatrixAlgebra::generated(vec![vec![0]], &[pauli(1), pauli(3)]).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.sqrt_dim(), Some(2));
    }

    #[test]
    fn diagonal_algebra_is_abelian() {
        let a = MatrixAlgebra::generated(vec![vec![0]], &[pauli(3)]).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.is_abelian());
        assert_eq!(a.sqrt_dim(), None);
        let n = a.bloch_axis().unwrap();
        assert!((n[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partitions_count_bell_numbers() {
        let items: Vec<Coord> = (0..5).map(|k| vec![k]).collect();
        assert_eq!(set_partitions(&items).len(), 52);
        assert_eq!(set_partitions(&items[..3]).len(), 5);
    }
}
