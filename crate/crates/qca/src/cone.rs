//! Exact light-cone evaluation of the origin's reduced state.
//!
//! After `t` steps of a controlled-phase rule the origin depends only on the
//! L1 ball `B_t`. Inside the cone three exact reductions make the 25-qubit
//! cases cheap:
//!
//! * only gates in the backward cone are applied (step `j` needs rotations on
//!   `B_{t-j}` and the bonds touching it; the last rotation at the origin
//!   does not change the spectrum and is dropped);
//! * the outer shell `S_t` only ever meets diagonal gates, so it is
//!   summed classically: each configuration `h` of `S_t` contributes the
//!   pure state of `B_{t-1}` whose single-site phases are shifted by
//!   `Σ φ_axis` over set outer neighbours, weighted by `Π |⟨h_b|v⟩|²`;
//! * configurations inducing the same phase pattern are merged, and patterns
//!   related by a point-group symmetry of the rule (axis reflections, and
//!   permutations of axes with equal `φ`) are merged as well.
//!
//! The result agrees with brute-force simulation of the cone (and of any
//! cone-safe periodic lattice) to rounding.

use crate::lattice::{cone_size, l1, l1_ball, Coord};
use crate::ops::{C64, ONE};
use crate::rules::rotation2;
use crate::statevector::{apply_1q, check_cap, entropy, DensityMatrix2, SimError};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug)]
struct Class {
    /// Outer-neighbour counts per axis class, `sig[y * s + class]`.
    sig: Vec<u8>,
    /// Number of outer configurations with each popcount.
    counts: Vec<u64>,
}

#[derive(Debug)]
pub struct ConeSim {
    s: usize,
    t: usize,
    sites: Vec<Coord>,
    n_low: usize,
    /// `shell_end[r]` = |B_r|.
    shell_end: Vec<usize>,
    /// Low-low bonds `(qa, qb, axis)` applied at step `j` (index `j - 1`).
    step_bonds: Vec<Vec<(usize, usize, usize)>>,
    /// For each outer site, the `(low qubit, axis)` bonds into the cone.
    outer_links: Vec<Vec<(usize, usize)>>,
    /// |B_{t-2}| when `t ≥ 2`: sites of `S_{t-1}` above this index get
    /// their first rotation applied in closed form.
    n_in: usize,
    /// For each site of `S_{t-1}`, its `(inner qubit, axis)` bonds.
    mid_links: Vec<Vec<(usize, usize)>>,
    class_cache: Mutex<HashMap<Vec<usize>, Arc<Vec<Class>>>>,
}

/// Signed axis permutation `x ↦ g(x)` with `g(x)[perm[i]] = sign[i]·x[i]`.
#[derive(Debug, Clone)]
struct PointOp {
    perm: Vec<usize>,
    sign: Vec<i64>,
}

impl PointOp {
    fn apply(&self, x: &[i64]) -> Coord {
        let mut out = vec![0; x.len()];
        for i in 0..x.len() {
            out[self.perm[i]] = self.sign[i] * x[i];
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Axis classes: `key[i]` is the smallest axis with the same `φ` as axis `i`.
fn phi_classes(phi: &[f64]) -> Vec<usize> {
    (0..phi.len())
        .map(|i| {
            (0..=i)
                .find(|&j| phi[j].to_bits() == phi[i].to_bits())
                .unwrap()
        })
        .collect()
}

impl ConeSim {
    pub fn new(s: usize, t: usize) -> Result<Self, SimError> {
        check_cap(cone_size(s, t) as usize)?;
        let sites = l1_ball(s, t);
        let shell_end: Vec<usize> = (0..=t)
            .map(|r| sites.iter().filter(|c| l1(c) <= r as i64).count())
            .collect();
        let n_low = if t == 0 { 1 } else { shell_end[t - 1] };
        let index: HashMap<Coord, usize> =
            sites.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
        // every bond inside the cone, lower endpoint first along +e_axis
        let mut bonds = Vec::new();
        for (a, c) in sites.iter().enumerate() {
            for axis in 0..s {
                let mut d = c.clone();
                d[axis] += 1;
                if let Some(&b) = index.get(&d) {
                    bonds.push((a, b, axis));
                }
            }
        }
        let radius = |k: usize| l1(&sites[k]) as usize;
        let mut step_bonds = Vec::with_capacity(t);
        for j in 1..=t {
            let reach = t - j;
            step_bonds.push(
                bonds
                    .iter()
                    .filter(|&&(a, b, _)| {
                        a < n_low && b < n_low && (radius(a) <= reach || radius(b) <= reach)
                    })
                    .copied()
                    .collect(),
            );
        }
        let mut outer_links = vec![Vec::new(); sites.len() - n_low];
        if t > 0 {
            for &(a, b, axis) in &bonds {
                let (inner, outer) = if a < n_low && b >= n_low {
                    (a, b)
                } else if b < n_low && a >= n_low {
                    (b, a)
                } else {
                    continue;
                };
                outer_links[outer - n_low].push((inner, axis));
            }
        }
        let n_in = if t >= 2 { shell_end[t - 2] } else { n_low };
        let mut mid_links = vec![Vec::new(); n_low - n_in];
        for &(a, b, axis) in &bonds {
            if a < n_in && (n_in..n_low).contains(&b) {
                mid_links[b - n_in].push((a, axis));
            } else if b < n_in && (n_in..n_low).contains(&a) {
                mid_links[a - n_in].push((b, axis));
            }
        }
        Ok(Self {
            s,
            t,
            sites,
            n_low,
            shell_end,
            step_bonds,
            outer_links,
            n_in,
            mid_links,
            class_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn cone_sites(&self) -> usize {
        self.sites.len()
    }

    /// Number of merged outer-shell classes for the given `φ`.
    pub fn class_count(&self, phi: &[f64]) -> usize {
        self.classes(phi).len()
    }

    fn symmetry_ops(&self, key: &[usize]) -> Vec<PointOp> {
        let mut ops = Vec::new();
        for perm in permutations(self.s) {
            if (0..self.s).any(|i| key[perm[i]] != key[i]) {
                continue;
            }
            for mask in 0..1usize << self.s {
                let sign = (0..self.s)
                    .map(|i| if (mask >> i) & 1 == 1 { -1 } else { 1 })
                    .collect();
                ops.push(PointOp {
                    perm: perm.clone(),
                    sign,
                });
            }
        }
        ops
    }

    fn classes(&self, phi: &[f64]) -> Arc<Vec<Class>> {
        let key = phi_classes(phi);
        if let Some(c) = self.class_cache.lock().unwrap().get(&key) {
            return c.clone();
        }
        let built = Arc::new(self.build_classes(&key));
        self.class_cache
            .lock()
            .unwrap()
            .insert(key, built.clone());
        built
    }

    fn build_classes(&self, key: &[usize]) -> Vec<Class> {
        let s = self.s;
        let n_out = self.outer_links.len();
        // Axes sharing a φ value are indistinguishable in the induced phase,
        // so the signature only counts per axis class (indexed by `key`).
        let mut raw: HashMap<Vec<u8>, Vec<u64>> = HashMap::new();
        for h in 0..1usize << n_out {
            let mut sig = vec![0u8; self.n_low * s];
            for (b, links) in self.outer_links.iter().enumerate() {
                if (h >> b) & 1 == 1 {
                    for &(y, axis) in links {
                        sig[y * s + key[axis]] += 1;
                    }
                }
            }
            raw.entry(sig).or_insert_with(|| vec![0; n_out + 1])[h.count_ones() as usize] += 1;
        }
        // merge symmetry images; allowed permutations preserve `key`
        let index: HashMap<&Coord, usize> =
            self.sites.iter().enumerate().map(|(k, c)| (c, k)).collect();
        let ops = self.symmetry_ops(key);
        let site_maps: Vec<Vec<usize>> = ops
            .iter()
            .map(|g| {
                (0..self.n_low)
                    .map(|y| index[&g.apply(&self.sites[y])])
                    .collect()
            })
            .collect();
        let mut merged: HashMap<Vec<u8>, Vec<u64>> = HashMap::new();
        for (sig, counts) in raw {
            let canon = site_maps
                .iter()
                .map(|map| {
                    let mut img = vec![0u8; sig.len()];
                    for y in 0..self.n_low {
                        let (src, dst) = (y * s, map[y] * s);
                        img[dst..dst + s].copy_from_slice(&sig[src..src + s]);
                    }
                    img
                })
                .min()
                .unwrap();
            let e = merged.entry(canon).or_insert_with(|| vec![0; n_out + 1]);
            for (a, c) in e.iter_mut().zip(&counts) {
                *a += c;
            }
        }
        let mut classes: Vec<Class> = merged
            .into_iter()
            .map(|(sig, counts)| Class { sig, counts })
            .collect();
        // fixed order keeps the floating-point sum deterministic
        classes.sort_by(|a, b| a.sig.cmp(&b.sig));
        classes
    }

    /// Reduced state of the origin after `t` steps, up to the final
    /// rotation at the origin (which leaves the spectrum unchanged).
    pub fn reduced(
        &self,
        phi: &[f64],
        theta: [f64; 3],
        delta: [f64; 3],
    ) -> Result<DensityMatrix2, SimError> {
        assert_eq!(phi.len(), self.s, "phi length must equal s");
        let v = {
            let m = rotation2(delta);
            [m[0], m[2]]
        };
        if self.t == 0 {
            return DensityMatrix2::new([
                [v[0] * v[0].conj(), v[0] * v[1].conj()],
                [v[1] * v[0].conj(), v[1] * v[1].conj()],
            ]);
        }
        let rot = rotation2(theta);
        let dim = 1usize << self.n_low;
        let n_in = self.n_in;
        let dim_in = 1usize << n_in;
        let tables: Vec<Vec<C64>> = self
            .step_bonds
            .iter()
            .map(|bonds| phase_table(dim, bonds, phi))
            .collect();
        // Step 1 restricted to B_{t-2}: in-in bonds and the product state there.
        let in_bonds: Vec<_> = self.step_bonds[0]
            .iter()
            .filter(|&&(a, b, _)| a < n_in && b < n_in)
            .copied()
            .collect();
        let mut inner = phase_table(dim_in, &in_bonds, phi);
        for (l, z) in inner.iter_mut().enumerate() {
            for q in 0..n_in {
                *z *= v[(l >> q) & 1];
            }
        }
        // Bond phases from B_{t-2} into each S_{t-1} site, per inner config.
        let mid_phase: Vec<Vec<C64>> = self
            .mid_links
            .iter()
            .map(|links| {
                (0..dim_in)
                    .map(|l| {
                        let a: f64 = links
                            .iter()
                            .filter(|&&(x, _)| (l >> x) & 1 == 1)
                            .map(|&(_, axis)| phi[axis])
                            .sum();
                        C64::from_polar(1.0, a)
                    })
                    .collect()
            })
            .collect();
        let split = self.t >= 2;
        let (p0, p1) = (v[0].norm_sqr(), v[1].norm_sqr());
        let n_out = self.outer_links.len();
        let classes = self.classes(phi);
        let mut acc = [0.0f64, 0.0f64];
        let mut off = C64::new(0.0, 0.0);
        let mut chi = vec![ONE; dim];
        let mut g = [vec![ONE; dim_in], vec![ONE; dim_in]];
        for class in classes.iter() {
            let w: f64 = class
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| c as f64 * p0.powi((n_out - k) as i32) * p1.powi(k as i32))
                .sum();
            if w == 0.0 {
                continue;
            }
            let outer = |y: usize| -> C64 {
                let a: f64 = (0..self.s)
                    .map(|c| phi[c] * class.sig[y * self.s + c] as f64)
                    .sum();
                v[1] * C64::from_polar(1.0, a)
            };
            if split {
                // A site y of S_{t-1} only meets diagonal gates before its
                // first rotation, so given the inner bits its state is a
                // product factor; rotate it in closed form:
                // g_z(l) = R_{z0}·v0 + R_{z1}·v1·e^{i(a_y + Σ φ l_x)}.
                chi.clear();
                chi.extend_from_slice(&inner);
                for y in n_in..self.n_low {
                    let one = outer(y);
                    for (l, m) in mid_phase[y - n_in].iter().enumerate() {
                        let e = one * m;
                        g[0][l] = rot[0] * v[0] + rot[1] * e;
                        g[1][l] = rot[2] * v[0] + rot[3] * e;
                    }
                    let len = chi.len();
                    chi.extend_from_within(..len);
                    let (lo, hi) = chi.split_at_mut(len);
                    for (k, z) in lo.iter_mut().enumerate() {
                        *z *= g[0][k & (dim_in - 1)];
                    }
                    for (k, z) in hi.iter_mut().enumerate() {
                        *z *= g[1][k & (dim_in - 1)];
                    }
                }
                for q in 0..n_in {
                    apply_1q(&mut chi, q, rot);
                }
            } else {
                chi.truncate(1);
                chi[0] = ONE;
                for y in 0..self.n_low {
                    let one = outer(y);
                    let len = chi.len();
                    chi.extend_from_within(..len);
                    let (lo, hi) = chi.split_at_mut(len);
                    lo.iter_mut().for_each(|z| *z *= v[0]);
                    hi.iter_mut().for_each(|z| *z *= one);
                }
                for (z, p) in chi.iter_mut().zip(&tables[0]) {
                    *z *= p;
                }
            }
            for j in 2..=self.t {
                for (z, p) in chi.iter_mut().zip(&tables[j - 1]) {
                    *z *= p;
                }
                if j < self.t {
                    for q in 0..self.shell_end[self.t - j] {
                        apply_1q(&mut chi, q, rot);
                    }
                }
            }
            let r = crate::statevector::reduce_qubit(&chi, 0);
            acc[0] += w * r[0].re;
            acc[1] += w * r[2].re;
            off += r[1] * w;
        }
        let norm = acc[0] + acc[1];
        let (r00, r11, r01) = (acc[0] / norm, acc[1] / norm, off / norm);
        DensityMatrix2::new([
            [C64::from(r00), r01],
            [r01.conj(), C64::from(r11)],
        ])
    }

    pub fn entropy(&self, phi: &[f64], theta: [f64; 3], delta: [f64; 3]) -> Result<f64, SimError> {
        // without entanglers every step is a product of site-wise unitaries
        if phi.iter().all(|&p| p == 0.0) {
            return Ok(0.0);
        }
        entropy(&self.reduced(phi, theta, delta)?)
    }
}

fn phase_table(dim: usize, bonds: &[(usize, usize, usize)], phi: &[f64]) -> Vec<C64> {
    (0..dim)
        .map(|l| {
            let a: f64 = bonds
                .iter()
                .filter(|&&(x, y, _)| (l >> x) & 1 == 1 && (l >> y) & 1 == 1)
                .map(|&(_, _, axis)| phi[axis])
                .sum();
            C64::from_polar(1.0, a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_shapes() {
        let sim = ConeSim::new(2, 3).unwrap();
        assert_eq!(sim.cone_sites(), 25);
        assert_eq!(sim.n_low, 13);
        assert_eq!(sim.outer_links.len(), 12);
        assert!(ConeSim::new(2, 4).is_err());
    }

    #[test]
    fn zero_phi_gives_pure_origin() {
        let sim = ConeSim::new(2, 2).unwrap();
        let s = sim.entropy(&[0.0, 0.0], [0.3, 1.1, 0.2], [0.5, 1.0, 0.0]).unwrap();
        assert!(s.abs() < 1e-12);
    }
}
