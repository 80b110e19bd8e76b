#![allow(dead_code)]

pub mod properties;

use qca::circuit::{compile_step, relative_phase};
use qca::lattice::{future_cone, LatticeSpec};
use qca::ops::C64;
use qca::rules::{InputStateParams, RuleParams};
use qca::statevector::{entropy, init_product_state, StateVector};
use rand::rngs::StdRng;
use rand::Rng;

pub fn random_state(n: usize, rng: &mut StdRng) -> StateVector {
    let mut amps: Vec<C64> = (0..1usize << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes((0..n).collect(), amps).unwrap()
}

/// `min_γ ‖a − e^{iγ} b‖`.
pub fn phase_distance(a: &[C64], b: &[C64]) -> f64 {
    let g = relative_phase(b, a);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - g * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Origin entropy by dense simulation of the whole periodic lattice.
pub fn full_lattice_entropy(
    params: &RuleParams,
    spec: &LatticeSpec,
    delta: [f64; 3],
    t: usize,
) -> f64 {
    let sites: Vec<usize> = (0..spec.site_count()).collect();
    let mut sv = init_product_state(&InputStateParams::new(delta), sites).unwrap();
    let step = compile_step(params, spec).unwrap();
    for _ in 0..t {
        sv.apply_circuit(&step).unwrap();
    }
    entropy(&sv.reduced_density(0).unwrap()).unwrap()
}

/// Origin entropy from a dense state on the future cone only, dropping
/// gates that leave it.
pub fn cone_restricted_entropy(params: &RuleParams, delta: [f64; 3], t: usize) -> f64 {
    let s = params.s;
    let spec = LatticeSpec::cubic(s, 2 * t + 2).unwrap();
    let cone = future_cone(&vec![0; s], t, &spec).unwrap();
    let mut sv = init_product_state(&InputStateParams::new(delta), cone.clone()).unwrap();
    let step = compile_step(params, &spec).unwrap();
    for _ in 0..t {
        sv.apply_circuit_restricted(&step);
    }
    entropy(&sv.reduced_density(cone[0]).unwrap()).unwrap()
}

pub fn random_angles(rng: &mut StdRng) -> [f64; 3] {
    [0; 3].map(|_: i32| rng.gen_range(0.0..std::f64::consts::TAU))
}
