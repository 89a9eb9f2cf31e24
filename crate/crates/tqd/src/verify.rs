//! Randomized closed-form versus generic-construction checks.

use std::f64::consts::PI;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tqd_core::analytic::{
    tls_cd_field, tls_hamiltonian, two_spin_cd_coefficient, two_spin_cd_term, two_spin_hamiltonian, two_spin_rate,
    FieldVector3, TwoSpinParams,
};
use tqd_core::engine::cd_term_matrix_elements;
use tqd_core::lmg::{
    lmg_bogoliubov, lmg_boson_driver, lmg_boson_hamiltonian, lmg_boson_rate, lmg_h1_coupling, lmg_hamiltonian,
    lmg_rate, lmg_xy_hat_operators, LmgParams,
};
use tqd_core::operator::{commutator, eigh_sorted, pauli_string, Axis, ComplexMatrix, HermitianOperator, C64};
use tqd_core::xy::{
    even_parity_indices, xy_block, xy_block_cd, xy_block_rate, xy_even_parity_spectrum, xy_hamiltonian,
    xy_j1_lowlying,
};

const MIN_GAP: f64 = 1e-3;

pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.worst < self.tolerance
    }
}

type Check = fn(&mut ChaCha8Rng, usize) -> f64;

const CHECKS: [(&str, f64, Check); 10] = [
    ("two-level driver vs engine", 1e-8, two_level),
    ("two-spin driver vs engine", 1e-8, two_spin),
    ("xy block driver vs engine", 1e-8, xy_blocks),
    ("xy fermion spectrum vs spins", 1e-9, xy_spectrum),
    ("lmg boson driver vs engine", 1e-6, lmg_boson),
    ("lmg coupling vs angle rate", 1e-6, lmg_angle_rate),
    ("lmg commutator decomposition", 1e-9, lmg_commutator),
    ("lmg sector vs full space", 1e-10, lmg_sector),
    ("two-spin fixed-point null", 1e-10, two_spin_null),
    ("xy fixed-point null", 1e-10, xy_null),
];

pub fn run_checks(seed: u64, samples: usize) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(k, &(name, tolerance, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            CheckResult { name, samples, worst: check(&mut rng, samples), tolerance }
        })
        .collect()
}

pub fn report(seed: u64, samples: usize, results: &[CheckResult]) -> String {
    let mut s = String::new();
    writeln!(s, "seed {seed}, {samples} samples per check").unwrap();
    writeln!(s, "{:<32} {:>8} {:>12} {:>10}  result", "check", "samples", "worst", "tolerance").unwrap();
    for r in results {
        writeln!(
            s,
            "{:<32} {:>8} {:>12.3e} {:>10.0e}  {}",
            r.name,
            r.samples,
            r.worst,
            r.tolerance,
            if r.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    writeln!(s, "{} of {} checks passed", results.len() - failed, results.len()).unwrap();
    s
}

fn uniform6(rng: &mut ChaCha8Rng, r: f64) -> [f64; 6] {
    std::array::from_fn(|_| rng.gen_range(-r..r))
}

fn gapped(h: &HermitianOperator) -> bool {
    eigh_sorted(h).is_ok_and(|f| f.eigenvalues.windows(2).all(|w| w[1] - w[0] > MIN_GAP))
}

/// Repeats `f` until it has produced `samples` values, keeping the largest.
fn worst_of(samples: usize, mut f: impl FnMut() -> Option<f64>) -> f64 {
    let (mut worst, mut done) = (0.0f64, 0);
    while done < samples {
        if let Some(v) = f() {
            worst = worst.max(if v.is_nan() { f64::INFINITY } else { v });
            done += 1;
        }
    }
    worst
}

fn two_level(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    worst_of(samples, || {
        let v = uniform6(rng, 2.0);
        let (f, df) = (FieldVector3::new(v[0], v[1], v[2]), FieldVector3::new(v[3], v[4], v[5]));
        let h0 = tls_hamiltonian(f);
        if !gapped(&h0) {
            return None;
        }
        let engine = cd_term_matrix_elements(&h0, &tls_hamiltonian(df)).ok()?;
        Some((engine.matrix() - tls_hamiltonian(tls_cd_field(f, df).ok()?).matrix()).norm())
    })
}

fn two_spin(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    worst_of(samples, || {
        let v = uniform6(rng, 2.0);
        let p = TwoSpinParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        let h0 = two_spin_hamiltonian(&p);
        if !gapped(&h0) {
            return None;
        }
        let engine = cd_term_matrix_elements(&h0, &two_spin_rate(&p)).ok()?;
        Some((engine.matrix() - two_spin_cd_term(&p).ok()?.matrix()).norm())
    })
}

fn xy_blocks(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    worst_of(samples, || {
        let v = uniform6(rng, 2.0);
        let p = TwoSpinParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        let q = rng.gen_range(0.01..PI - 0.01);
        let block = xy_block(q, &p).ok()?.h_block;
        if !gapped(&block) {
            return None;
        }
        let engine = cd_term_matrix_elements(&block, &xy_block_rate(q, &p).ok()?).ok()?;
        Some((engine.matrix() - xy_block_cd(q, &p).ok()?.matrix()).norm())
    })
}

fn xy_spectrum(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let mut k = 0;
    worst_of(samples, || {
        let n = [2, 4, 6, 8][k % 4];
        k += 1;
        let v = uniform6(rng, 2.0);
        let p = TwoSpinParams::new(v[0], v[1], v[2], 0.0, 0.0, 0.0);
        let full = xy_hamiltonian(&p, n).ok()?;
        let idx = even_parity_indices(n);
        let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |a, b| full.matrix()[(idx[a], idx[b])]);
        let brute = eigh_sorted(&HermitianOperator::new(sub).ok()?).ok()?.eigenvalues;
        let blocks = xy_even_parity_spectrum(&p, n).ok()?;
        if brute.len() != blocks.len() {
            return Some(f64::INFINITY);
        }
        Some(brute.iter().zip(&blocks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })
}

fn symmetric_params(rng: &mut ChaCha8Rng) -> Option<LmgParams> {
    let jx: f64 = rng.gen_range(0.0..4.0);
    let jy: f64 = rng.gen_range(0.0..4.0);
    let h = jx.max(jy) + rng.gen_range(0.5..4.0);
    let p = LmgParams::new(1, jx, jy, h, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    (((jx - jy) / (2.0 * h - jx - jy)).abs() <= 0.8).then_some(p)
}

fn lmg_boson(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let (cutoff, levels) = (120, 6);
    worst_of(samples, || {
        let p = symmetric_params(rng)?;
        let h0 = lmg_boson_hamiltonian(&p, cutoff).ok()?;
        let frame = eigh_sorted(&h0).ok()?;
        let engine = cd_term_matrix_elements(&h0, &lmg_boson_rate(&p, cutoff).ok()?).ok()?;
        let exact = lmg_boson_driver(&p, cutoff).ok()?;
        let v = frame.eigenvectors.columns(0, levels);
        Some((v.adjoint() * (engine.matrix() - exact.matrix()) * v).norm())
    })
}

fn lmg_angle_rate(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let e = 1e-6;
    worst_of(samples, || {
        let p = symmetric_params(rng)?;
        let at = |s: f64| {
            let q = LmgParams::new(1, p.jx + s * p.djx, p.jy + s * p.djy, p.h + s * p.dh, 0.0, 0.0, 0.0);
            lmg_bogoliubov(&q).map(|r| r.0)
        };
        let rate = (at(e).ok()? - at(-e).ok()?) / (2.0 * e);
        Some((lmg_h1_coupling(&p).ok()? - rate).abs())
    })
}

fn lmg_commutator(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let n = 6;
    let (x, y) = lmg_xy_hat_operators(n).expect("n = 6");
    worst_of(samples, || {
        let v = uniform6(rng, 3.0);
        let p = LmgParams::new(n, v[0], v[1], v[2], v[3], v[4], v[5]);
        let c = commutator(&lmg_hamiltonian(&p).ok()?, &lmg_rate(&p).ok()?).ok()?;
        let a = 2.0 * (p.jx * p.djy - p.jy * p.djx);
        let b = -2.0 * ((p.jx - p.jy) * p.dh - (p.djx - p.djy) * p.h);
        let want = &x * C64::new(a, 0.0) + &y * C64::new(b, 0.0);
        Some((c - want).iter().map(|z| z.norm()).fold(0.0, f64::max))
    })
}

fn lmg_sector(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let n = 4;
    let dim = 1usize << n;
    let mut dicke = ComplexMatrix::zeros(dim, n + 1);
    for k in 0..=n {
        let members: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == k).collect();
        let w = 1.0 / (members.len() as f64).sqrt();
        for i in members {
            dicke[(i, k)] = C64::new(w, 0.0);
        }
    }
    let pair = |i: usize, j: usize, axis| {
        if i == j {
            HermitianOperator::identity(dim)
        } else {
            pauli_string(&[(i, axis), (j, axis)], n).expect("valid sites")
        }
    };
    worst_of(samples, || {
        let (jx, jy, h) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let mut full = HermitianOperator::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                full.add_scaled(-0.5 * jx / n as f64, &pair(i, j, Axis::X)).ok()?;
                full.add_scaled(-0.5 * jy / n as f64, &pair(i, j, Axis::Y)).ok()?;
            }
            full.add_scaled(-h, &pauli_string(&[(i, Axis::Z)], n).ok()?).ok()?;
        }
        let projected = dicke.adjoint() * full.matrix() * &dicke;
        let sector = lmg_hamiltonian(&LmgParams::new(n, jx, jy, h, 0.0, 0.0, 0.0)).ok()?;
        Some((projected - sector.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
    })
}

fn two_spin_null(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    worst_of(samples, || {
        let c = rng.gen_range(-3.0..3.0);
        let (jx, jy, djx, djy) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = TwoSpinParams::new(jx, jy, c * (jx - jy), djx, djy, c * (djx - djy));
        two_spin_cd_coefficient(&p).ok().map(f64::abs)
    })
}

fn xy_null(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    worst_of(samples, || {
        let c: f64 = rng.gen_range(-3.0..3.0);
        let (jx, jy, djx, djy) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if (c * (jx - jy)).abs() < 0.05 {
            return None;
        }
        let p = TwoSpinParams::new(jx, jy, jx + jy + c * (jx - jy), djx, djy, djx + djy + c * (djx - djy));
        xy_j1_lowlying(&p).ok().map(f64::abs)
    })
}
