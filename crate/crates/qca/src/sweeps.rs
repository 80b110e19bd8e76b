//! Entanglement sweeps: single-site entropy of the evolved product state
//! as a function of the rule parameters, maximised over input states.
//!
//! Every grid point is an independent optimisation problem:
//!
//! 1. candidate stage — the free rotation angles on a periodic grid of
//!    `angle_points` values, combined with `delta_samples` seeded
//!    low-discrepancy input states (`δ₃ = 0`);
//! 2. refinement — Nelder–Mead over the free angles and `(δ₁, δ₂)` from
//!    the best candidate, with a fixed evaluation budget;
//! 3. minimum — the same two stages over `δ` alone at the maximising angles,
//!    giving `S_min` and `ΔS = S_max − S_min`.
//!
//! `θ₃` and `δ₃` never matter and are pinned to zero; `θ₁` is only free
//! for `t ≥ 3` (for fewer steps it can be absorbed into the input state).

use crate::cone::ConeSim;
use crate::rules::{RuleKind, RuleParams};
use crate::statevector::SimError;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

pub const CSV_HEADER: &str = "axis1,axis2,s_max,s_min,delta_s,theta1_star,evals";

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot resume: {0}")]
    Resume(String),
}

/// Which two parameters span the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// `(φ, θ₂)` with all `φ_i` equal.
    PhiTheta,
    /// `(φ₁, φ₂)` with `φ_i = φ₂` for `i ≥ 2`.
    PhiPhi,
}

/// How the candidate stage combines angle grid and input samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Full product of the angle grid with all input samples.
    Product,
    /// Input samples at zero angles, then one grid scan per free angle.
    Staged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub s: usize,
    pub t: usize,
    pub mode: SweepMode,
    /// Points per grid axis over `[lo, hi]`, endpoints included.
    pub resolution: usize,
    pub lo: f64,
    pub hi: f64,
    pub delta_samples: usize,
    /// Grid points per free rotation angle over `[0, 2π)`.
    pub angle_points: usize,
    pub strategy: Strategy,
    pub refine: bool,
    pub refine_evals: usize,
    pub seed: u64,
    /// Compute one representative per orbit of the exact grid symmetries
    /// and mirror the rest.
    #[serde(default)]
    pub symmetry: bool,
    /// Restrict to these `(i, j)` grid indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<(usize, usize)>>,
}

impl SweepSpec {
    pub fn new(s: usize, t: usize, mode: SweepMode) -> Self {
        Self {
            s,
            t,
            mode,
            resolution: 25,
            lo: 0.0,
            hi: TAU,
            delta_samples: 50,
            angle_points: 13,
            strategy: Strategy::Product,
            refine: true,
            refine_evals: 200,
            seed: 0,
            symmetry: false,
            only: None,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::Spec(m.into()));
        if self.s == 0 || self.t == 0 {
            return bad("s and t must be at least 1");
        }
        if self.mode == SweepMode::PhiPhi && self.s < 2 {
            return bad("phi-phi sweeps need s >= 2");
        }
        if self.resolution < 2 {
            return bad("grid resolution must be at least 2");
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return bad("grid range must satisfy lo < hi");
        }
        if self.delta_samples == 0 || self.angle_points == 0 {
            return bad("sample counts must be positive");
        }
        if let Some(only) = &self.only {
            if only.iter().any(|&(i, j)| i >= self.resolution || j >= self.resolution) {
                return bad("grid index out of range");
            }
        }
        crate::statevector::check_cap(crate::lattice::cone_size(self.s, self.t) as usize)?;
        Ok(())
    }

    pub fn axis_value(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.resolution - 1) as f64
    }

    fn theta1_free(&self) -> bool {
        self.t >= 3
    }

    fn free_angles(&self) -> usize {
        self.theta1_free() as usize + (self.mode == SweepMode::PhiPhi) as usize
    }

    /// Grid indices in row-major order (`i` over axis 1, `j` over axis 2).
    pub fn indices(&self) -> Vec<(usize, usize)> {
        match &self.only {
            Some(only) => {
                let mut v = only.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            None => (0..self.resolution)
                .flat_map(|i| (0..self.resolution).map(move |j| (i, j)))
                .collect(),
        }
    }

    fn symmetric_grid(&self) -> bool {
        // Mirror symmetry maps i ↦ N−1−i only if the grid is centred on a
        // multiple of π.
        let c = 0.5 * (self.lo + self.hi);
        let k = (c / PI).round();
        (c - k * PI).abs() < 1e-12
    }

    /// Representative of the symmetry orbit of `(i, j)` and the map taking
    /// the representative's `θ₁*` to this point's.
    fn representative(&self, (i, j): (usize, usize)) -> ((usize, usize), Mirror) {
        if !self.symmetry || !self.symmetric_grid() {
            return ((i, j), Mirror::None);
        }
        let n = self.resolution - 1;
        match self.mode {
            SweepMode::PhiTheta => {
                // φ ↦ −φ (complex conjugation, θ₁ ↦ −θ₁) and
                // θ₂ ↦ −θ₂ (conjugation by Z, θ₁ ↦ θ₁ + π).
                let (fi, ri) = if i > n - i { (true, n - i) } else { (false, i) };
                let (fj, rj) = if j > n - j { (true, n - j) } else { (false, j) };
                let m = if fi || fj {
                    Mirror::Flags { phi: fi, theta: fj }
                } else {
                    Mirror::None
                };
                ((ri, rj), m)
            }
            SweepMode::PhiPhi => {
                // Both φ flip together under complex conjugation.
                if (i, j) > (n - i, n - j) {
                    ((n - i, n - j), Mirror::Flags { phi: true, theta: false })
                } else {
                    ((i, j), Mirror::None)
                }
            }
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serialises");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mirror {
    None,
    Flags { phi: bool, theta: bool },
}

impl Mirror {
    fn apply(self, theta1: f64, theta1_free: bool) -> f64 {
        match self {
            Mirror::None => theta1,
            Mirror::Flags { phi, theta } => {
                if !theta1_free {
                    return theta1;
                }
                let mut a = theta1;
                if phi {
                    a = -a;
                }
                if theta {
                    a += PI;
                }
                crate::rules::reduce_angle(a)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub i: usize,
    pub j: usize,
    pub axis1: f64,
    pub axis2: f64,
    pub s_max: f64,
    pub s_min: f64,
    pub delta_s: f64,
    pub theta1_star: f64,
    /// Rotation angles and input state at the maximum (`None` for mirrored
    /// rows, whose arguments follow from the representative's).
    pub theta_star: Option<[f64; 3]>,
    pub delta_star: Option<[f64; 3]>,
    /// Entropy evaluations spent on this row (0 for mirrored rows).
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn grid_max(&self) -> f64 {
        self.rows.iter().map(|r| r.s_max).fold(0.0, f64::max)
    }

    pub fn row(&self, i: usize, j: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.i == i && r.j == j)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [r.axis1, r.axis2, r.s_max, r.s_min, r.delta_s, r.theta1_star];
            for f in fields {
                out.push_str(&fmt_g9(f));
                out.push(',');
            }
            let _ = writeln!(out, "{}", r.evals);
        }
        out
    }
}

/// `printf("%.9g")`.
pub fn fmt_g9(v: f64) -> String {
    fmt_g(v, 9)
}

fn fmt_g(v: f64, p: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let e = format!("{:.*e}", p - 1, v);
    let (mant, exp) = e.split_once('e').expect("exponent");
    let x: i32 = exp.parse().expect("exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if x < -4 || x >= p as i32 {
        let sign = if x < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip(mant), sign, x.abs())
    } else {
        strip(&format!("{:.*}", (p as i32 - 1 - x) as usize, v))
    }
}

/// `n` input-state angles `(δ₁, δ₂, 0)` from the additive `R₂` sequence
/// with a seeded random offset, scaled to `[0, 2π)²`.
pub fn delta_samples(n: usize, seed: u64) -> Vec<[f64; 3]> {
    // plastic number: g³ = g + 1
    const G: f64 = 1.324_717_957_244_746;
    let alpha = [1.0 / G, 1.0 / (G * G)];
    let mut rng = StdRng::seed_from_u64(seed);
    let offset: [f64; 2] = [rng.gen(), rng.gen()];
    (0..n)
        .map(|k| {
            let u = |d: usize| (offset[d] + alpha[d] * k as f64).fract();
            [TAU * u(0), TAU * u(1), 0.0]
        })
        .collect()
}

fn cone_sim(s: usize, t: usize) -> Result<Arc<ConeSim>, SimError> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ConeSim>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(sim) = cache.lock().unwrap().get(&(s, t)) {
        return Ok(sim.clone());
    }
    let sim = Arc::new(ConeSim::new(s, t)?);
    Ok(cache.lock().unwrap().entry((s, t)).or_insert(sim).clone())
}

/// Entropy (bits) of the origin after `t` steps of `params` applied to the
/// translation-invariant product state `⊗ V(δ)|0⟩`.
///
/// Shift rules map product states to product states and give 0.
pub fn entropy_at(params: &RuleParams, delta: [f64; 3], t: usize) -> Result<f64, SimError> {
    if params.kind == RuleKind::Shift {
        crate::statevector::check_cap(crate::lattice::cone_size(params.s, t) as usize)?;
        return Ok(0.0);
    }
    let sim = cone_sim(params.s, t)?;
    Ok(sim.entropy(&params.active_phi(), params.theta, delta)?.max(0.0))
}

/// Derivative-free Nelder–Mead minimisation. Returns the best point, its
/// value and the number of evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    f0: f64,
    step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for k in 0..n {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[k] += step;
        let fx = f(&x);
        evals += 1;
        simplex.push((x, fx));
    }
    if simplex.len() < n + 1 {
        let best = simplex
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        return (best.0, best.1, evals);
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() < 1e-13 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p.0[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |c: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + c * (simplex[n].0[d] - centroid[d]))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            if evals >= max_evals {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if evals >= max_evals {
                break;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink towards the best vertex
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        break;
                    }
                    p.0 = (0..n).map(|d| best[d] + 0.5 * (p.0[d] - best[d])).collect();
                    p.1 = f(&p.0);
                    evals += 1;
                }
            }
        }
    }
    let best = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    (best.0, best.1, evals)
}

/// One grid point: rule parameters as a function of the free angles.
struct Point<'a> {
    spec: &'a SweepSpec,
    sim: &'a ConeSim,
    phi: Vec<f64>,
    /// `θ₂` when it is a grid axis.
    theta2: Option<f64>,
    evals: u64,
}

impl Point<'_> {
    /// `free = [θ₁ if t ≥ 3][θ₂ if phi-phi]`.
    fn theta(&self, free: &[f64]) -> [f64; 3] {
        let mut it = free.iter().copied();
        let t1 = if self.spec.theta1_free() { it.next().unwrap() } else { 0.0 };
        let t2 = match self.theta2 {
            Some(v) => v,
            None => it.next().unwrap(),
        };
        [t1, t2, 0.0]
    }

    fn eval(&mut self, free: &[f64], d: [f64; 2]) -> Result<f64, SimError> {
        self.evals += 1;
        let theta = self.theta(free);
        Ok(self.sim.entropy(&self.phi, theta, [d[0], d[1], 0.0])?.max(0.0))
    }
}

fn angle_grid(p: usize) -> Vec<f64> {
    (0..p).map(|k| TAU * k as f64 / p as f64).collect()
}

fn cartesian(values: &[f64], dims: usize) -> Vec<Vec<f64>> {
    (0..dims).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|v| {
                values.iter().map(move |&a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect()
    })
}

fn solve_point(
    spec: &SweepSpec,
    sim: &ConeSim,
    samples: &[[f64; 3]],
    (i, j): (usize, usize),
) -> Result<SweepRow, SimError> {
    let (a1, a2) = (spec.axis_value(i), spec.axis_value(j));
    let (phi, theta2) = match spec.mode {
        SweepMode::PhiTheta => (vec![a1; spec.s], Some(a2)),
        SweepMode::PhiPhi => {
            let mut phi = vec![a2; spec.s];
            phi[0] = a1;
            (phi, None)
        }
    };
    let mut pt = Point {
        spec,
        sim,
        phi,
        theta2,
        evals: 0,
    };
    let nf = spec.free_angles();
    let grid = angle_grid(spec.angle_points);

    // candidate stage; strict improvement keeps the first best
    let mut best_free = vec![0.0; nf];
    let mut best_d = [samples[0][0], samples[0][1]];
    let mut best = f64::NEG_INFINITY;
    match spec.strategy {
        Strategy::Product => {
            for free in cartesian(&grid, nf) {
                for d in samples {
                    let v = pt.eval(&free, [d[0], d[1]])?;
                    if v > best {
                        (best, best_free, best_d) = (v, free.clone(), [d[0], d[1]]);
                    }
                }
            }
        }
        Strategy::Staged => {
            for d in samples {
                let v = pt.eval(&best_free.clone(), [d[0], d[1]])?;
                if v > best {
                    (best, best_d) = (v, [d[0], d[1]]);
                }
            }
            for k in 0..nf {
                for &a in &grid {
                    let mut free = best_free.clone();
                    free[k] = a;
                    let v = pt.eval(&free, best_d)?;
                    if v > best {
                        (best, best_free) = (v, free);
                    }
                }
            }
        }
    }

    let mut err = None;
    if spec.refine && spec.refine_evals > 0 {
        let x0: Vec<f64> = best_free.iter().copied().chain(best_d).collect();
        let (x, fx, _) = nelder_mead(
            |x| match pt.eval(&x[..nf], [x[nf], x[nf + 1]]) {
                Ok(v) => -v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            },
            &x0,
            -best,
            0.5,
            spec.refine_evals,
        );
        if let Some(e) = err.take() {
            return Err(e);
        }
        if -fx > best {
            best = -fx;
            best_free = x[..nf].to_vec();
            best_d = [x[nf], x[nf + 1]];
        }
    }
    let s_max = best;

    // minimum over inputs at the maximising angles
    let mut s_min = s_max;
    let mut min_d = best_d;
    for d in samples {
        let v = pt.eval(&best_free, [d[0], d[1]])?;
        if v < s_min {
            (s_min, min_d) = (v, [d[0], d[1]]);
        }
    }
    if spec.refine && spec.refine_evals > 0 && s_min > 0.0 {
        let (_, fx, _) = nelder_mead(
            |x| match pt.eval(&best_free, [x[0], x[1]]) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            },
            &min_d,
            s_min,
            0.5,
            spec.refine_evals,
        );
        if let Some(e) = err {
            return Err(e);
        }
        s_min = s_min.min(fx);
    }

    let theta = pt.theta(&best_free).map(crate::rules::reduce_angle);
    Ok(SweepRow {
        i,
        j,
        axis1: a1,
        axis2: a2,
        s_max,
        s_min,
        delta_s: s_max - s_min,
        theta1_star: theta[0],
        theta_star: Some(theta),
        delta_star: Some([best_d[0], best_d[1], 0.0].map(crate::rules::reduce_angle)),
        evals: pt.evals,
    })
}

fn mirrored(spec: &SweepSpec, rep: &SweepRow, (i, j): (usize, usize), m: Mirror) -> SweepRow {
    SweepRow {
        i,
        j,
        axis1: spec.axis_value(i),
        axis2: spec.axis_value(j),
        theta1_star: m.apply(rep.theta1_star, spec.theta1_free()),
        theta_star: None,
        delta_star: None,
        evals: 0,
        ..rep.clone()
    }
}

/// Run a sweep, invoking `on_batch` with all rows finished so far after
/// each batch of grid points (one batch per value of the first axis).
/// Rows already present in `done` are kept and not recomputed.
pub fn run_sweep_with(
    spec: &SweepSpec,
    mut done: BTreeMap<(usize, usize), SweepRow>,
    mut on_batch: impl FnMut(&BTreeMap<(usize, usize), SweepRow>) -> Result<(), SweepError>,
) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let sim = cone_sim(spec.s, spec.t)?;
    let samples = delta_samples(spec.delta_samples, spec.seed);
    let indices = spec.indices();

    // representatives first, in grid order, batched by first index
    let mut reps: Vec<(usize, usize)> = indices
        .iter()
        .map(|&ij| spec.representative(ij).0)
        .filter(|ij| !done.contains_key(ij))
        .collect();
    reps.sort_unstable();
    reps.dedup();
    let mut computed: BTreeMap<(usize, usize), SweepRow> = done
        .iter()
        .filter(|(ij, _)| spec.representative(**ij).1 == Mirror::None)
        .map(|(k, v)| (*k, v.clone()))
        .collect();

    let mut start = 0;
    while start < reps.len() {
        let first = reps[start].0;
        let end = reps[start..]
            .iter()
            .position(|ij| ij.0 != first)
            .map_or(reps.len(), |p| start + p);
        let rows: Vec<SweepRow> = reps[start..end]
            .par_iter()
            .map(|&ij| solve_point(spec, &sim, &samples, ij))
            .collect::<Result<_, _>>()?;
        for r in rows {
            computed.insert((r.i, r.j), r);
        }
        for &ij in &indices {
            if done.contains_key(&ij) {
                continue;
            }
            let (rep, m) = spec.representative(ij);
            if let Some(r) = computed.get(&rep) {
                let row = if m == Mirror::None || rep == ij {
                    r.clone()
                } else {
                    mirrored(spec, r, ij, m)
                };
                done.insert(ij, row);
            }
        }
        on_batch(&done)?;
        start = end;
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows: indices.iter().filter_map(|ij| done.get(ij).cloned()).collect(),
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    run_sweep_with(spec, BTreeMap::new(), |_| Ok(()))
}

/// `S_max(φ, θ₂) = max_{θ₁, δ} S` with all `φ_i = φ`; the rows also carry
/// `S_min` and `ΔS` at the maximising `θ̃₁`.
pub fn smax_phi_theta(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    let spec = SweepSpec {
        mode: SweepMode::PhiTheta,
        ..spec.clone()
    };
    run_sweep(&spec)
}

/// `ΔS(φ, θ₂) = S_max − min_δ S(θ̃₁)`, where `θ̃₁` is the maximiser found for
/// `S_max`. Any maximiser gives the same picture up to optimiser noise.
pub fn delta_s(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    smax_phi_theta(spec)
}

/// `S_max(φ₁, φ₂) = max_{θ, δ} S` with `φ_i = φ₂` for `i ≥ 2` and `θ₃ = 0`.
pub fn smax_phi_phi(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    let spec = SweepSpec {
        mode: SweepMode::PhiPhi,
        ..spec.clone()
    };
    run_sweep(&spec)
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    spec: SweepSpec,
    fingerprint: String,
    rows: Vec<SweepRow>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn write_atomic(path: &Path, data: &str) -> Result<(), SweepError> {
    let io = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, data).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn write_outputs(
    spec: &SweepSpec,
    csv: &Path,
    done: &BTreeMap<(usize, usize), SweepRow>,
) -> Result<(), SweepError> {
    let result = SweepResult {
        spec: spec.clone(),
        rows: done.values().cloned().collect(),
    };
    let side = Sidecar {
        spec: spec.clone(),
        fingerprint: spec.fingerprint(),
        rows: result.rows.clone(),
    };
    write_atomic(csv, &result.to_csv())?;
    let json = serde_json::to_string_pretty(&side).expect("sidecar serialises");
    write_atomic(&sidecar_path(csv), &(json + "\n"))
}

/// Run a sweep writing `csv` and its JSON sidecar after every batch. With
/// `resume`, rows recorded in an existing sidecar for the same spec are
/// kept and only the missing grid points are computed.
pub fn run_sweep_to_file(
    spec: &SweepSpec,
    csv: &Path,
    resume: bool,
) -> Result<SweepResult, SweepError> {
    let mut done = BTreeMap::new();
    let side_path = sidecar_path(csv);
    if resume && side_path.exists() {
        let text = std::fs::read_to_string(&side_path).map_err(|source| SweepError::Io {
            path: side_path.clone(),
            source,
        })?;
        let side: Sidecar = serde_json::from_str(&text)
            .map_err(|e| SweepError::Resume(format!("unreadable sidecar: {e}")))?;
        if side.fingerprint != spec.fingerprint() || side.spec != *spec {
            return Err(SweepError::Resume(
                "existing output was produced by a different spec".into(),
            ));
        }
        for r in side.rows {
            done.insert((r.i, r.j), r);
        }
    }
    run_sweep_with(spec, done, |d| write_outputs(spec, csv, d))
}

/// One Clifford grid point with both the dense and the stabilizer entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordRow {
    pub phi: Vec<f64>,
    pub theta: [f64; 3],
    pub delta: [f64; 3],
    pub s_dense: f64,
    pub s_clifford: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliffordSweepError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Clifford(#[from] crate::clifford::CliffordError),
}

/// Every Clifford point: `φ_i ∈ {0, π}`, `θ_k` and `δ₁, δ₂` multiples of
/// `π/2` (`δ₃ = 0`), evaluated densely and with the stabilizer tableau.
pub fn clifford_sweep(s: usize, t: usize) -> Result<Vec<CliffordRow>, CliffordSweepError> {
    let quarter = |k: usize| k as f64 * std::f64::consts::FRAC_PI_2;
    let mut points = Vec::new();
    for pm in 0..1usize << s {
        let phi: Vec<f64> = (0..s).map(|i| PI * ((pm >> i) & 1) as f64).collect();
        for th in 0..64 {
            let theta = [quarter(th & 3), quarter((th >> 2) & 3), quarter(th >> 4)];
            for dl in 0..16 {
                let delta = [quarter(dl & 3), quarter(dl >> 2), 0.0];
                points.push((phi.clone(), theta, delta));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(phi, theta, delta)| {
            let params = RuleParams::cphase(phi.clone(), theta);
            let s_dense = entropy_at(&params, delta, t)?;
            let s_clifford = crate::clifford::clifford_site_entropy(&params, delta, t)?;
            Ok(CliffordRow {
                phi,
                theta,
                delta,
                s_dense,
                s_clifford,
            })
        })
        .collect()
}

pub fn clifford_csv(rows: &[CliffordRow]) -> String {
    let s = rows.first().map_or(0, |r| r.phi.len());
    let mut out: Vec<String> = (1..=s).map(|i| format!("phi{i}")).collect();
    out.extend(
        ["theta1", "theta2", "theta3", "delta1", "delta2", "s_dense", "s_clifford"].map(String::from),
    );
    let mut text = out.join(",") + "\n";
    for r in rows {
        let mut fields: Vec<String> = r.phi.iter().map(|&v| fmt_g9(v)).collect();
        fields.extend(r.theta.iter().chain(&r.delta[..2]).map(|&v| fmt_g9(v)));
        fields.push(fmt_g9(r.s_dense));
        fields.push(r.s_clifford.to_string());
        text += &(fields.join(",") + "\n");
    }
    text
}

/// Aggregate Clifford points onto the sweep grid of `mode` (axis values in
/// `{0, π}` or multiples of `π/2`, `θ₃ = 0`): the dense-sweep CSV schema
/// followed by the stabilizer maximum `s_clifford`.
pub fn clifford_grid_csv(rows: &[CliffordRow], mode: SweepMode) -> String {
    let key = |a: f64| (a / std::f64::consts::FRAC_PI_2).round() as i64;
    // (axis1, axis2) -> points on that grid cell
    let mut cells: BTreeMap<(i64, i64), Vec<&CliffordRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.theta[2] == 0.0) {
        let cell = match mode {
            SweepMode::PhiTheta if r.phi.iter().all(|&p| p == r.phi[0]) => {
                (key(r.phi[0]), key(r.theta[1]))
            }
            SweepMode::PhiPhi if r.phi.len() >= 2 && r.phi[2..].iter().all(|&p| p == r.phi[1]) => {
                (key(r.phi[0]), key(r.phi[1]))
            }
            _ => continue,
        };
        cells.entry(cell).or_default().push(r);
    }
    let mut out = format!("{CSV_HEADER},s_clifford\n");
    for ((k1, k2), pts) in cells {
        // θ₁ ranges over the cell's points; the maximiser fixes θ̃₁ (and θ₂
        // in phi-phi mode) for the minimum.
        let best = pts
            .iter()
            .copied()
            .reduce(|a, b| if b.s_dense > a.s_dense { b } else { a })
            .expect("non-empty cell");
        let s_min = pts
            .iter()
            .filter(|r| r.theta == best.theta)
            .map(|r| r.s_dense)
            .fold(best.s_dense, f64::min);
        let s_cliff = pts.iter().map(|r| r.s_clifford).max().unwrap_or(0);
        let q = std::f64::consts::FRAC_PI_2;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_g9(k1 as f64 * q),
            fmt_g9(k2 as f64 * q),
            fmt_g9(best.s_dense),
            fmt_g9(s_min),
            fmt_g9(best.s_dense - s_min),
            fmt_g9(best.theta[0]),
            pts.len(),
            s_cliff
        );
    }
    out
}
