mod common;

use common::{phase_distance, random_state};
use qca::circuit::*;
use qca::lattice::LatticeSpec;
use qca::ops::{embed, pauli, C64};
use qca::rules::{local_rule_matrix, RuleParams};
use qca::statevector::{apply_matrix, circuit_unitary, StateVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, PI};

#[test]
fn step_depths() {
    let spec = LatticeSpec::cubic(1, 4).unwrap();
    let c = compile_step(&RuleParams::cphase(vec![PI], [0.0; 3]), &spec).unwrap();
    assert_eq!(c.depth(), 3);
    assert!(c.layers[0].iter().all(|g| g.kind() == "cphase"));
    assert!(c.layers[2].iter().all(|g| g.kind() == "rotation"));
    for s in 1..=3 {
        let spec = LatticeSpec::cubic(s, 4).unwrap();
        let c = compile_step(&RuleParams::cphase(vec![1.0; s], [0.1, 0.2, 0.3]), &spec).unwrap();
        assert!(c.depth() <= (1 << s) + 1, "s={s} depth {}", c.depth());
        c.check_disjoint().unwrap();
        assert_eq!(c.block_bound(), 2);
        // every bond appears exactly once
        let n_cphase = c.layers.iter().flatten().filter(|g| g.kind() == "cphase").count();
        assert_eq!(n_cphase, s * spec.site_count());
    }
}

#[test]
fn odd_extent_is_rejected() {
    let spec = LatticeSpec::new(vec![3, 4]).unwrap();
    assert!(compile_step(&RuleParams::cphase(vec![1.0, 1.0], [0.0; 3]), &spec).is_err());
}

#[test]
fn trivial_step_acts_as_identity() {
    let mut rng = StdRng::seed_from_u64(1);
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    let c = compile_step(&RuleParams::identity(2), &spec).unwrap();
    for _ in 0..3 {
        let psi = random_state(16, &mut rng);
        let mut out = psi.clone();
        out.apply_circuit(&c).unwrap();
        let d: f64 = psi.amps.iter().zip(&out.amps).map(|(a, b)| (a - b).norm()).sum();
        assert!(d < 1e-12);
    }
}

#[test]
fn shift_chains_have_depth_n_minus_one_and_translate() {
    for n in 2..=8usize {
        let spec = LatticeSpec::new(vec![n]).unwrap();
        for sign in [1i64, -1] {
            let c = compile_shift(&[sign], &spec).unwrap();
            assert_eq!(c.depth(), n - 1);
            assert!(c.layers.iter().all(|l| l.len() == 1 && l[0].kind() == "swap"));
            for idx in 0..1usize << n {
                let mut sv = StateVector::basis((0..n).collect(), idx).unwrap();
                sv.apply_circuit(&c).unwrap();
                // excitation at z moves to z − y
                let want = (0..n).fold(0, |acc, z| {
                    let dst = (z as i64 - sign).rem_euclid(n as i64) as usize;
                    acc | (((idx >> z) & 1) << dst)
                });
                assert!((sv.amps[want] - C64::from(1.0)).norm() < 1e-15, "n={n} idx={idx}");
            }
        }
    }
}

#[test]
fn two_dimensional_shift_runs_rows_in_parallel() {
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    let c = compile_shift(&[1, 0], &spec).unwrap();
    assert_eq!(c.depth(), 3);
    assert!(c.layers.iter().all(|l| l.len() == 4));
    c.check_disjoint().unwrap();
    assert!(compile_shift(&[1, 1], &spec).is_err());
}

#[test]
fn margolus_matches_step_on_all_basis_states_1d() {
    let spec = LatticeSpec::cubic(1, 4).unwrap();
    let params = RuleParams::cphase(vec![PI], [0.0, FRAC_PI_2, 0.0]);
    let sites: Vec<usize> = (0..4).collect();
    let step = circuit_unitary(&compile_step(&params, &spec).unwrap(), &sites).unwrap();
    for q in [[1i64], [-1]] {
        let m = compile_margolus(&params, &spec, &q).unwrap();
        assert_eq!(m.depth(), 2);
        m.check_disjoint().unwrap();
        let mu = circuit_unitary(&m, &sites).unwrap();
        let a: Vec<C64> = step.iter().copied().collect();
        let b: Vec<C64> = mu.iter().copied().collect();
        assert!(phase_distance(&a, &b) < 1e-10);
    }
}

#[test]
fn margolus_matches_step_on_random_states_2d() {
    let mut rng = StdRng::seed_from_u64(2);
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    for _ in 0..2 {
        let params = RuleParams::random_cphase(2, &mut rng);
        let step = compile_step(&params, &spec).unwrap();
        let q = vec![if rng.gen() { 1 } else { -1 }, if rng.gen() { 1 } else { -1 }];
        let m = compile_margolus(&params, &spec, &q).unwrap();
        assert_eq!(m.depth(), 2);
        assert_eq!(m.block_bound(), 4);
        for _ in 0..5 {
            let psi = random_state(16, &mut rng);
            let (mut a, mut b) = (psi.clone(), psi);
            a.apply_circuit(&step).unwrap();
            b.apply_circuit(&m).unwrap();
            assert!(phase_distance(&a.amps, &b.amps) < 1e-10);
        }
    }
}

#[test]
fn margolus_of_identity_is_trivial() {
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    let m = compile_margolus(&RuleParams::identity(2), &spec, &[1, 1]).unwrap();
    for g in m.layers.iter().flatten() {
        let u = g.matrix();
        assert!((u.clone() - qca::ops::CMat::identity(u.nrows(), u.ncols())).norm() < 1e-14);
    }
}

#[test]
fn permuting_cphase_sublayers_is_harmless() {
    let mut rng = StdRng::seed_from_u64(4);
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    let params = RuleParams::random_cphase(2, &mut rng);
    let c = compile_step(&params, &spec).unwrap();
    let mut shuffled = c.clone();
    let n = shuffled.layers.len() - 1;
    shuffled.layers[..n].reverse();
    shuffled.layers[..n].rotate_left(1);
    let psi = random_state(16, &mut rng);
    let (mut a, mut b) = (psi.clone(), psi);
    a.apply_circuit(&c).unwrap();
    b.apply_circuit(&shuffled).unwrap();
    let d: f64 = a.amps.iter().zip(&b.amps).map(|(x, y)| (x - y).norm_sqr()).sum();
    assert!(d.sqrt() < 1e-12);
}

/// `⟨Gψ|O₀|Gψ⟩ = ⟨ψ|α₀(O)|ψ⟩` with the local rule placed around site 0.
#[test]
fn step_reproduces_local_rule_conjugation() {
    let mut rng = StdRng::seed_from_u64(6);
    for (s, extent) in [(1usize, 6usize), (2, 4)] {
        let spec = LatticeSpec::cubic(s, extent).unwrap();
        let params = RuleParams::random_cphase(s, &mut rng);
        let rule = local_rule_matrix(&params).unwrap();
        let step = compile_step(&params, &spec).unwrap();
        let qubits: Vec<usize> = rule.sites.iter().map(|x| spec.flatten(x)).collect();
        let n = spec.site_count();
        for j in 1..=3 {
            let img = rule.alpha0(&pauli(j));
            let psi = random_state(n, &mut rng);
            let mut evolved = psi.clone();
            evolved.apply_circuit(&step).unwrap();
            let mut o_evolved = evolved.amps.clone();
            apply_matrix(&mut o_evolved, &[0], &pauli(j));
            let lhs: C64 = evolved.amps.iter().zip(&o_evolved).map(|(a, b)| a.conj() * b).sum();
            let mut a_psi = psi.amps.clone();
            apply_matrix(&mut a_psi, &qubits, &img.mat);
            let rhs: C64 = psi.amps.iter().zip(&a_psi).map(|(a, b)| a.conj() * b).sum();
            assert!((lhs - rhs).norm() < 1e-10, "s={s} j={j}: {lhs} vs {rhs}");
        }
        // on the small ring compare full operators too
        if s == 1 {
            let sites: Vec<usize> = (0..n).collect();
            let g = circuit_unitary(&step, &sites).unwrap();
            let coords: Vec<Vec<i64>> = sites.iter().map(|&i| vec![i as i64]).collect();
            let x0 = embed(&pauli(1), &coords[..1], &coords);
            let lhs = g.adjoint() * x0 * &g;
            let local: Vec<Vec<i64>> = qubits.iter().map(|&q| vec![q as i64]).collect();
            let rhs = embed(&rule.alpha0(&pauli(1)).mat, &local, &coords);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}

#[test]
fn circuit_json_lists_layers_and_gates() {
    let spec = LatticeSpec::cubic(1, 4).unwrap();
    let c = compile_step(&RuleParams::cphase(vec![PI], [0.0, 1.0, 0.0]), &spec).unwrap();
    let v = c.to_json();
    let layers = v.as_array().unwrap();
    assert_eq!(layers.len(), 3);
    assert_eq!(layers[0][0]["kind"], "cphase");
    assert_eq!(layers[2][0]["angles"][1], 1.0);
    let m = compile_margolus(&RuleParams::cphase(vec![PI], [0.0; 3]), &spec, &[1]).unwrap();
    assert!(m.to_json()[0][0]["matrix"].is_array());
}

#[test]
fn compile_rule_handles_shifts_and_rotations() {
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    let c = compile_rule(&RuleParams::shift(vec![0, -1], [0.3, 0.0, 0.0]), &spec).unwrap();
    assert_eq!(c.depth(), 4);
    let r = compile_rule(&RuleParams::shift(vec![0, 0], [0.3, 0.0, 0.0]), &spec).unwrap();
    assert_eq!(r.depth(), 1);
}
