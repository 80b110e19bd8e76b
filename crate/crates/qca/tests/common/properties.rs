//! Support-algebra property checks, each returning the worst defect found.

use qca::lattice::{add, sub, unit, von_neumann_neighborhood, Coord};
use qca::ops::LocalOp;
use qca::rules::{overlap_offsets, LocalRule};
use qca::support_algebra::*;
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::HashMap;

/// Mutual containment defect, or infinity on a dimension mismatch.
pub fn algebra_distance(a: &MatrixAlgebra, b: &MatrixAlgebra) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    a.containment_defect(b).max(b.containment_defect(a))
}

fn is_refinement(fine: &[Vec<Coord>], coarse: &[Vec<Coord>]) -> bool {
    fine.iter()
        .all(|f| coarse.iter().any(|c| f.iter().all(|x| c.contains(x))))
}

/// Coarse tensor supports sit inside refined ones (all pairs for `s = 1`;
/// against the extreme partitions for larger `s`).
pub fn refinement_defect(r: &LocalRule) -> f64 {
    let images = generator_images(r, &[vec![0; r.s]]);
    let region = von_neumann_neighborhood(r.s);
    let parts = set_partitions(&region);
    let mut cache: HashMap<Vec<Coord>, MatrixAlgebra> = HashMap::new();
    let tensors: Vec<MatrixAlgebra> = parts
        .iter()
        .map(|p| {
            let algs: Vec<MatrixAlgebra> = p
                .iter()
                .map(|block| {
                    cache
                        .entry(block.clone())
                        .or_insert_with(|| support_on(&images, block).unwrap())
                        .clone()
                })
                .collect();
            MatrixAlgebra::tensor(&algs.iter().collect::<Vec<_>>())
        })
        .collect();
    let finest = parts.iter().position(|p| p.len() == region.len()).unwrap();
    let mut worst: f64 = 0.0;
    for (i, coarse) in parts.iter().enumerate() {
        for (j, fine) in parts.iter().enumerate() {
            let wanted = r.s == 1 || j == finest || coarse.len() == 1;
            if i != j && wanted && is_refinement(fine, coarse) {
                if tensors[i].dim() > tensors[j].dim() {
                    return f64::INFINITY;
                }
                worst = worst.max(tensors[j].containment_defect(&tensors[i]));
            }
        }
    }
    worst
}

/// Supports of `α(𝒜₀)` and `α(𝒜_x)` on the overlap of their neighbourhoods
/// commute.
pub fn overlap_commutator(r: &LocalRule) -> f64 {
    let nb = von_neumann_neighborhood(r.s);
    let a = generator_images(r, &[vec![0; r.s]]);
    overlap_offsets(r.s)
        .into_iter()
        .map(|x| {
            let omega: Vec<Coord> = nb.iter().filter(|c| nb.contains(&sub(c, &x))).cloned().collect();
            let b = generator_images(r, &[x]);
            support_on(&a, &omega)
                .unwrap()
                .commutator_norm(&support_on(&b, &omega).unwrap())
        })
        .fold(0.0, f64::max)
}

/// `𝒮^{x}_Ω` equals the translate of `𝒮^{0}_{Ω−x}` for one random `x`
/// and all one- and two-site `Ω`.
pub fn translation_defect(r: &LocalRule, rng: &mut StdRng) -> f64 {
    let nb = von_neumann_neighborhood(r.s);
    let x = add(&nb[rng.gen_range(0..nb.len())], &unit(r.s, rng.gen_range(0..r.s), 1));
    let base = generator_images(r, &[vec![0; r.s]]);
    let moved = generator_images(r, &[x.clone()]);
    let mut worst: f64 = 0.0;
    for mask in 1u32..1 << nb.len() {
        if mask.count_ones() > 2 {
            continue;
        }
        let back: Vec<Coord> = (0..nb.len()).filter(|k| mask >> k & 1 == 1).map(|k| nb[k].clone()).collect();
        let omega: Vec<Coord> = back.iter().map(|c| add(c, &x)).collect();
        let a = support_on(&moved, &omega).unwrap();
        let b = support_on(&base, &back).unwrap().translate(&x);
        worst = worst.max(algebra_distance(&a, &b));
    }
    worst
}

/// `𝒮^Λ_Ω` for `Λ = {0, e_s}` equals the join of the single-site supports.
pub fn join_defect(r: &LocalRule) -> f64 {
    let s = r.s;
    let lambda = vec![vec![0; s], unit(s, s - 1, 1)];
    let mut region: Vec<Coord> = Vec::new();
    for x in &lambda {
        for y in von_neumann_neighborhood(s) {
            let c = add(x, &y);
            if !region.contains(&c) {
                region.push(c);
            }
        }
    }
    let joint = generator_images(r, &lambda);
    let singles: Vec<Vec<LocalOp>> = lambda.iter().map(|x| generator_images(r, &[x.clone()])).collect();
    let mut omegas: Vec<Vec<Coord>> = region.iter().map(|c| vec![c.clone()]).collect();
    omegas.push(lambda.clone());
    omegas
        .into_iter()
        .map(|omega| {
            let whole = support_on(&joint, &omega).unwrap();
            let parts: Vec<MatrixAlgebra> = singles.iter().map(|im| support_on(im, &omega).unwrap()).collect();
            let join = MatrixAlgebra::join(&parts.iter().collect::<Vec<_>>()).unwrap();
            algebra_distance(&whole, &join)
        })
        .fold(0.0, f64::max)
}
