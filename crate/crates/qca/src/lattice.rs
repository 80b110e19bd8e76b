//! Finite periodic hypercubic lattices.
//!
//! Sites are addressed either by integer coordinates (wrapped into
//! `[0, extent)`) or by a flat index. Flattening is row-major with the last
//! axis varying fastest; the flat index doubles as the qubit index in every
//! simulator of this crate.
//!
//! Besides raw geometry the module provides the combinatorial sets that the
//! classification machinery keeps coming back to: the von Neumann
//! neighbourhood, future causal cones, the super-cell `{0,1}^s`, its
//! quadrants and the two Margolus partitions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer lattice coordinate (unwrapped unless stated otherwise).
pub type Coord = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice dimension must be at least 1")]
    ZeroDimension,
    #[error("extent along axis {axis} must be positive")]
    ZeroExtent { axis: usize },
    #[error("extent {extent} along axis {axis} is odd; Margolus partitions need even extents")]
    OddExtent { axis: usize, extent: usize },
    #[error("cone of radius {t} wraps around axis {axis}: extent {extent} < {needed}")]
    ConeWraps {
        axis: usize,
        extent: usize,
        t: usize,
        needed: usize,
    },
    #[error("coordinate has {got} components but the lattice dimension is {s}")]
    DimensionMismatch { s: usize, got: usize },
    #[error("{0:?} is not a unit vector")]
    NotUnitVector(Coord),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    extents: Vec<usize>,
}

impl LatticeSpec {
    pub fn new(extents: Vec<usize>) -> Result<Self> {
        if extents.is_empty() {
            return Err(LatticeError::ZeroDimension);
        }
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(LatticeError::ZeroExtent { axis });
        }
        Ok(Self { extents })
    }

    /// `s`-dimensional lattice with the same extent on every axis.
    pub fn cubic(s: usize, extent: usize) -> Result<Self> {
        Self::new(vec![extent; s])
    }

    pub fn s(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn site_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn check_dim(&self, c: &[i64]) -> Result<()> {
        if c.len() != self.s() {
            return Err(LatticeError::DimensionMismatch {
                s: self.s(),
                got: c.len(),
            });
        }
        Ok(())
    }

    pub fn wrap(&self, c: &[i64]) -> Coord {
        c.iter()
            .zip(&self.extents)
            .map(|(&x, &e)| x.rem_euclid(e as i64))
            .collect()
    }

    /// Row-major flat index of a (possibly unwrapped) coordinate.
    pub fn flatten(&self, c: &[i64]) -> usize {
        debug_assert_eq!(c.len(), self.s());
        c.iter().zip(&self.extents).fold(0usize, |acc, (&x, &e)| {
            acc * e + x.rem_euclid(e as i64) as usize
        })
    }

    pub fn unflatten(&self, mut idx: usize) -> Coord {
        let mut out = vec![0i64; self.s()];
        for (slot, &e) in out.iter_mut().zip(&self.extents).rev() {
            *slot = (idx % e) as i64;
            idx /= e;
        }
        out
    }

    pub fn translate(&self, idx: usize, v: &[i64]) -> usize {
        let c = self.unflatten(idx);
        let moved: Coord = c.iter().zip(v).map(|(a, b)| a + b).collect();
        self.flatten(&moved)
    }

    pub fn sites(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.site_count()).map(move |i| self.unflatten(i))
    }

    /// Every nearest-neighbour bond once, as `(lower, upper, axis)` with
    /// `upper = lower + e_axis` (wrapped).
    pub fn bonds(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.site_count() * self.s());
        for idx in 0..self.site_count() {
            for axis in 0..self.s() {
                out.push((idx, self.translate(idx, &unit(self.s(), axis, 1)), axis));
            }
        }
        out
    }

    pub fn require_even(&self) -> Result<()> {
        for (axis, &extent) in self.extents.iter().enumerate() {
            if extent % 2 != 0 {
                return Err(LatticeError::OddExtent { axis, extent });
            }
        }
        Ok(())
    }
}

/// `sign * e_axis` in `s` dimensions.
pub fn unit(s: usize, axis: usize, sign: i64) -> Coord {
    let mut v = vec![0; s];
    v[axis] = sign;
    v
}

pub fn l1(c: &[i64]) -> i64 {
    c.iter().map(|x| x.abs()).sum()
}

pub fn add(a: &[i64], b: &[i64]) -> Coord {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Coord {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Returns `(axis, sign)` when `v` is `±e_axis`.
pub fn as_unit(v: &[i64]) -> Option<(usize, i64)> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0).collect();
    match nz.as_slice() {
        [i] if v[*i].abs() == 1 => Some((*i, v[*i])),
        _ => None,
    }
}

/// `{0} ∪ {±e_i}` ordered as `0, +e_1, -e_1, +e_2, -e_2, ...`.
pub fn von_neumann_neighborhood(s: usize) -> Vec<Coord> {
    let mut out = vec![vec![0; s]];
    for axis in 0..s {
        out.push(unit(s, axis, 1));
        out.push(unit(s, axis, -1));
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form size of the L1 ball of radius `t` in `Z^s`:
/// `Σ_{k=0}^{min(s,t)} C(s,k) C(t,k) 2^k`.
pub fn cone_size(s: usize, t: usize) -> u64 {
    (0..=s.min(t) as u64)
        .map(|k| binomial(s as u64, k) * binomial(t as u64, k) * (1u64 << k))
        .sum()
}

/// All offsets with L1 norm at most `t`, sorted by norm and then
/// lexicographically. Shells are therefore contiguous.
pub fn l1_ball(s: usize, t: usize) -> Vec<Coord> {
    let r = t as i64;
    let mut out = Vec::new();
    let mut cur = vec![-r; s];
    loop {
        if l1(&cur) <= r {
            out.push(cur.clone());
        }
        let mut axis = s;
        loop {
            if axis == 0 {
                out.sort_by(|a, b| l1(a).cmp(&l1(b)).then_with(|| a.cmp(b)));
                return out;
            }
            axis -= 1;
            if cur[axis] < r {
                cur[axis] += 1;
                break;
            }
            cur[axis] = -r;
        }
    }
}

/// Sites reachable from `origin` in at most `t` neighbourhood expansions.
///
/// Fails when the cone would wrap onto itself, i.e. when some extent is
/// smaller than `2t + 1`.
pub fn future_cone(origin: &[i64], t: usize, spec: &LatticeSpec) -> Result<Vec<usize>> {
    spec.check_dim(origin)?;
    let needed = 2 * t + 1;
    for (axis, &extent) in spec.extents().iter().enumerate() {
        if extent < needed {
            return Err(LatticeError::ConeWraps {
                axis,
                extent,
                t,
                needed,
            });
        }
    }
    Ok(l1_ball(spec.s(), t)
        .iter()
        .map(|d| spec.flatten(&add(origin, d)))
        .collect())
}

/// The super-cell `{0,1}^s`, last axis fastest.
pub fn super_cell(s: usize) -> Vec<Coord> {
    (0..1usize << s)
        .map(|m| (0..s).map(|i| ((m >> (s - 1 - i)) & 1) as i64).collect())
        .collect()
}

/// All `q ∈ {±1}^s`, lexicographic with `-1 < +1`.
pub fn sign_vectors(s: usize) -> Vec<Coord> {
    super_cell(s)
        .into_iter()
        .map(|c| c.into_iter().map(|b| 2 * b - 1).collect())
        .collect()
}

/// Quadrant `𝔮(q) = 𝔠 + q`.
pub fn quadrant(q: &[i64]) -> Vec<Coord> {
    super_cell(q.len()).iter().map(|c| add(c, q)).collect()
}

pub fn quadrants(s: usize) -> Vec<(Coord, Vec<Coord>)> {
    sign_vectors(s)
        .into_iter()
        .map(|q| {
            let sites = quadrant(&q);
            (q, sites)
        })
        .collect()
}

/// `R_i`: the sign vectors with `q_i = -1`.
pub fn r_set(s: usize, axis: usize) -> Vec<Coord> {
    sign_vectors(s)
        .into_iter()
        .filter(|q| q[axis] == -1)
        .collect()
}

/// The two Margolus partitions `{𝔠 + 2j}` and `{𝔮(q) + 2j}` as lists of
/// blocks of flat site indices.
pub fn margolus_partitions(
    spec: &LatticeSpec,
    q: &[i64],
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    spec.check_dim(q)?;
    spec.require_even()?;
    let half = LatticeSpec::new(spec.extents().iter().map(|e| e / 2).collect())?;
    let cell = super_cell(spec.s());
    let block = |base: &Coord| -> Vec<usize> {
        cell.iter().map(|c| spec.flatten(&add(base, c))).collect()
    };
    let mut first = Vec::new();
    let mut second = Vec::new();
    for j in half.sites() {
        let base: Coord = j.iter().map(|x| 2 * x).collect();
        first.push(block(&base));
        second.push(block(&add(&base, q)));
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_is_row_major() {
        let spec = LatticeSpec::new(vec![3, 4]).unwrap();
        assert_eq!(spec.flatten(&[1, 2]), 6);
        assert_eq!(spec.unflatten(6), vec![1, 2]);
        assert_eq!(spec.flatten(&[-1, 4]), spec.flatten(&[2, 0]));
    }

    #[test]
    fn ball_shells_are_contiguous() {
        let b = l1_ball(2, 2);
        let norms: Vec<i64> = b.iter().map(|c| l1(c)).collect();
        assert!(norms.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(b[0], vec![0, 0]);
    }

    #[test]
    fn super_cell_order() {
        assert_eq!(
            super_cell(2),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }
}
