mod common;

use common::properties;
use qca::circuit::{compile_margolus, compile_step};
use qca::lattice::{quadrants, von_neumann_neighborhood, Coord, LatticeSpec};
use qca::ops::{pauli, CMat, LocalOp};
use qca::rules::{cnot_rule, local_rule_matrix, LocalRule, RuleParams};
use qca::support_algebra::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::collections::HashMap;
use std::f64::consts::PI;

const TOL: f64 = 1e-10;

fn rule(p: &RuleParams) -> LocalRule {
    local_rule_matrix(p).unwrap()
}

fn random_rules(n: usize, seed: u64) -> Vec<LocalRule> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|k| rule(&RuleParams::random_cphase(1 + k % 2, &mut rng)))
        .collect()
}

#[test]
fn support_on_examples() {
    let ident = LocalOp::new(vec![vec![0]], CMat::identity(2, 2));
    let a = support_on(&[ident], &[vec![0]]).unwrap();
    assert_eq!(a.dim(), 1);
    assert!(a.is_trivial());

    let id_rule = rule(&RuleParams::identity(1));
    let full = support_on(&id_rule.generator_images(), &[vec![0]]).unwrap();
    assert_eq!((full.dim(), full.sqrt_dim()), (4, Some(2)));

    let cz = rule(&RuleParams::cphase(vec![PI], [0.0; 3]));
    let d = support_on(&cz.generator_images(), &[vec![1]]).unwrap();
    assert_eq!(d.dim(), 2);
    assert!(d.is_abelian());
    let n = d.bloch_axis().unwrap();
    assert!((n[2].abs() - 1.0).abs() < 1e-8);
}

#[test]
fn classification_examples() {
    let shift = rule(&RuleParams::shift(vec![1], [0.0; 3]));
    let c = classify_configuration(&shift).unwrap();
    assert_eq!(c.config, Configuration::CaseI { x: vec![1] });

    let rot = rule(&RuleParams::cphase(vec![0.0, 0.0], [0.4, 1.2, 2.0]));
    let c = classify_configuration(&rot).unwrap();
    assert_eq!(c.config, Configuration::CaseI { x: vec![0, 0] });

    let mut rng = StdRng::seed_from_u64(41);
    for s in 1..=3 {
        let p = RuleParams::random_cphase(s, &mut rng);
        let c = classify_configuration(&rule(&p)).unwrap();
        match c.config {
            Configuration::CaseII { axes } => {
                assert_eq!(axes.len(), s);
                for ax in axes {
                    assert_eq!(ax.dim, 2);
                    let [a, b] = ax.n.unwrap();
                    // θ-rotated z axes, identical on both sides
                    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                    assert!((dot.abs() - 1.0).abs() < 1e-8);
                }
            }
            other => panic!("expected CASE_II, got {other:?}"),
        }
        assert_eq!(c.dims[0].1, 4);
    }

    // one trivial axis
    let c = classify_configuration(&rule(&RuleParams::cphase(vec![1.0, 2.0 * PI], [0.0; 3]))).unwrap();
    let Configuration::CaseII { axes } = c.config else { panic!() };
    assert_eq!((axes[0].dim, axes[1].dim), (2, 1));

    assert!(matches!(
        classify_configuration(&cnot_rule(1)),
        Err(SupportError::Unverified(_))
    ));
}

#[test]
fn quadrant_supports_and_commutation() {
    let id = rule(&RuleParams::identity(2));
    let qs = quadrant_supports(&id).unwrap();
    assert_eq!(qs.len(), 4);
    assert!(qs.iter().all(|e| e.d == 2 && e.n == 1));
    assert!(check_quadrant_commutation(&qs).pass);

    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..3 {
        let qs = quadrant_supports(&rule(&RuleParams::random_cphase(2, &mut rng))).unwrap();
        assert!(qs.iter().all(|e| e.d == 2));
        let v = check_quadrant_commutation(&qs);
        assert!(v.pass && v.max_norm < TOL);
    }

    let right = rule(&RuleParams::shift(vec![-1, 0], [0.0; 3]));
    let qs = quadrant_supports(&right).unwrap();
    let ns: HashMap<Coord, u32> = qs.iter().map(|e| (e.q.clone(), e.n)).collect();
    assert_eq!(ns[&vec![-1, -1]] + ns[&vec![-1, 1]], 4);
    assert_eq!(ns[&vec![1, -1]] + ns[&vec![1, 1]], 0);
}

#[test]
fn index_values() {
    for s in 1..=3 {
        let iv = index_vector(&rule(&RuleParams::identity(s))).unwrap();
        assert!(iv.is_trivial());
        assert_eq!(iv.components.len(), s);
    }
    let iv = index_vector(&rule(&RuleParams::shift(vec![-1, 0], [0.0; 3]))).unwrap();
    assert_eq!(iv.to_string(), "2,1");
    assert_eq!(iv.to_strings(), ["2/1", "1/1"]);
    let iv = index_vector(&rule(&RuleParams::shift(vec![1], [0.0; 3]))).unwrap();
    assert_eq!(iv.to_string(), "1/2");
    let iv = index_vector(&rule(&RuleParams::shift(vec![0, 1], [0.3, 0.1, 0.0]))).unwrap();
    assert_eq!(iv.to_string(), "1,1/2");
    let iv = index_vector(&rule(&RuleParams::shift(vec![0, 0, -1], [0.0; 3]))).unwrap();
    assert_eq!(iv.to_string(), "1,1,2");
}

/// Every cphase rule has trivial index and a depth-2 block circuit; every
/// nontrivial shift has nontrivial index.
#[test]
fn fdqc_iff_trivial_index_on_rule_families() {
    let mut rng = StdRng::seed_from_u64(43);
    for s in 1..=2 {
        let spec = LatticeSpec::cubic(s, 4).unwrap();
        for _ in 0..5 {
            let p = RuleParams::random_cphase(s, &mut rng);
            assert!(index_vector(&rule(&p)).unwrap().is_trivial());
            let m = compile_margolus(&p, &spec, &vec![1; s]).unwrap();
            assert_eq!(m.depth(), 2);
            assert!(compile_step(&p, &spec).is_ok());
        }
        for y in von_neumann_neighborhood(s).into_iter().skip(1) {
            let iv = index_vector(&rule(&RuleParams::shift(y.clone(), [0.0; 3]))).unwrap();
            assert!(!iv.is_trivial(), "shift {y:?}");
        }
    }
}

/// Two qubits per site, the upper layer shifted right and the lower left:
/// a QCA outside the qubit class whose quadrant supports still commute and
/// whose index is trivial (it is a product of commuting shifts with zero net
/// flow).
#[test]
fn stacked_opposite_shifts_at_local_dimension_four() {
    let layer = |x: i64, l: i64| -> Coord { vec![x, l] };
    let image = |x: i64, l: i64, j: usize| -> LocalOp {
        let dx = if l == 0 { 1 } else { -1 };
        LocalOp::new(vec![layer(x + dx, l)], pauli(j))
    };
    let cell = [0i64, 1];
    let images: Vec<LocalOp> = cell
        .iter()
        .flat_map(|&x| [(x, 0, 1), (x, 0, 3), (x, 1, 1), (x, 1, 3)])
        .map(|(x, l, j)| image(x, l, j))
        .collect();
    let mut moved = Vec::new();
    let mut ns = Vec::new();
    for (q, sites) in quadrants(1) {
        let region: Vec<Coord> = sites.iter().flat_map(|c| [layer(c[0], 0), layer(c[0], 1)]).collect();
        let alg = support_on(&images, &region).unwrap();
        let d = alg.sqrt_dim().unwrap();
        ns.push((q.clone(), d));
        moved.push(alg.translate(&[-q[0], 0]));
    }
    // d(𝔮(−1)) = d(𝔮(+1)) = 4 = d(𝔠)^{1/2}
    assert_eq!(ns, vec![(vec![-1], 4), (vec![1], 4)]);
    assert!(moved[0].commutator_norm(&moved[1]) < TOL);
    let index = ns[0].1 as f64 / 4.0;
    assert_eq!(index, 1.0);
}

#[test]
fn support_refinement_monotonicity() {
    for r in random_rules(20, 50) {
        assert!(properties::refinement_defect(&r) <= TOL);
    }
}

#[test]
fn support_disjoint_images_commute_on_overlap() {
    for r in random_rules(20, 51) {
        assert!(properties::overlap_commutator(&r) <= TOL);
    }
}

#[test]
fn support_translation_covariance() {
    let mut rng = StdRng::seed_from_u64(52);
    for r in random_rules(20, 53) {
        assert!(properties::translation_defect(&r, &mut rng) <= TOL);
    }
}

#[test]
fn support_support_of_union_is_generated_by_single_site_supports() {
    for r in random_rules(20, 54) {
        assert!(properties::join_defect(&r) <= TOL);
    }
}
