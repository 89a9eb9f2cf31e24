//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tqd_core::analytic::{
    tls_cd_field, tls_hamiltonian, two_spin_cd_coefficient, two_spin_cd_term, two_spin_hamiltonian, two_spin_rate,
    FieldVector3, OscillatingField, TwoSpinParams,
};
use tqd_core::dynamics::{
    evolve, fidelity, run_fidelity_trace, AdiabaticTracker, DriverMode, FidelityTrace, IntegratorConfig, Model,
    System, TraceConfig,
};
use tqd_core::engine::{cd_term_matrix_elements, FnHamiltonian};
use tqd_core::lmg::{
    lmg_boson_driver, lmg_boson_hamiltonian, lmg_boson_rate, lmg_h1_coupling, lmg_h1_coupling_any_phase,
    lmg_hamiltonian, lmg_rate, lmg_xy_hat_operators, LmgParams,
};
use tqd_core::operator::{
    commutator, eigh_at, eigh_sorted, pauli, pauli_string, Axis, ComplexMatrix, HermitianOperator, StateVector, C64,
};
use tqd_core::schedule::{
    fp_family_generic, lmg_fp_broken, lmg_fp_symmetric, matched_comparison_schedule, ComparisonKind,
    FixedPointFamily, Profile, Schedule, FieldRule,
};
use tqd_core::xy::{even_parity_indices, xy_block, xy_block_cd, xy_block_rate, xy_even_parity_spectrum, xy_hamiltonian, xy_j1_lowlying};

const EQUIVALENCE_TOL: f64 = 1e-6;
const EQUIVALENCE_POINTS: usize = 100;
const EQUIVALENCE_MIN_GAP: f64 = 1e-3;
const TRANSITIONLESS_TOL: f64 = 1e-5;
const STATIC_FIELD_TOL: f64 = 1e-10;
const STATIC_FIDELITY_TOL: f64 = 1e-6;
const FIXED_POINT_COUPLING_TOL: f64 = 1e-10;
const FIXED_POINT_FIDELITY: f64 = 0.999;
const COMMUTATOR_TOL: f64 = 1e-9;
const COMMUTATOR_POINTS: usize = 50;
const SIZE_SWEEP: [usize; 4] = [20, 50, 100, 200];
const SWEEP_FINAL_FIDELITY: f64 = 0.99;
const SWEEP_MARGIN: f64 = 0.001;
const SPECTRUM_TOL: f64 = 1e-9;
const SECTOR_TOL: f64 = 1e-10;
const DRIFT_TOL: f64 = 1e-6;
const BERRY_TOL: f64 = 1e-4;
const ORDER_TOL: f64 = 0.2;

static MAX_DRIFT: AtomicU64 = AtomicU64::new(0);

fn record_drift(d: f64) {
    // Non-negative doubles order like their bit patterns.
    MAX_DRIFT.fetch_max(d.to_bits(), Ordering::Relaxed);
}

struct Outcome {
    pass: bool,
    detail: String,
    limit: Option<Duration>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, limit: None }
    }
    fn within(mut self, limit: Duration) -> Self {
        self.limit = Some(limit);
        self
    }
}

fn trace(sys: &System, mode: DriverMode, cfg: &TraceConfig) -> FidelityTrace {
    let tr = run_fidelity_trace(sys, mode, cfg).expect("trace");
    record_drift(tr.max_norm_drift());
    tr
}

fn default_trace(sys: &System, mode: DriverMode) -> FidelityTrace {
    trace(sys, mode, &TraceConfig::for_duration(sys.duration()))
}

fn min_adjacent_gap(h: &HermitianOperator) -> f64 {
    let e = eigh_sorted(h).unwrap().eigenvalues;
    e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn frob(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

fn paper_symmetric() -> (Schedule, Schedule) {
    let fp = lmg_fp_symmetric(0.5).unwrap();
    let cmp = matched_comparison_schedule(ComparisonKind::Gaussian, fp.value(0.0).h, fp.value(1.0).h).unwrap();
    (fp, cmp)
}

fn paper_broken() -> (Schedule, Schedule) {
    let fp = lmg_fp_broken();
    let cmp = matched_comparison_schedule(ComparisonKind::QuarticExp, fp.value(0.0).h, fp.value(1.0).h).unwrap();
    (fp, cmp)
}

fn lmg(n: usize, schedule: Schedule) -> System {
    System::new(Model::Lmg { n, schedule }).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    let mut count = [0usize; 4];
    while count[0] < EQUIVALENCE_POINTS {
        let f = FieldVector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let df = FieldVector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let h0 = tls_hamiltonian(f);
        if min_adjacent_gap(&h0) <= EQUIVALENCE_MIN_GAP {
            continue;
        }
        let engine = cd_term_matrix_elements(&h0, &tls_hamiltonian(df)).unwrap();
        let closed = tls_hamiltonian(tls_cd_field(f, df).unwrap());
        worst[0] = worst[0].max(frob(engine.matrix(), closed.matrix()));
        count[0] += 1;
    }
    while count[1] < EQUIVALENCE_POINTS {
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = TwoSpinParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        let h0 = two_spin_hamiltonian(&p);
        if min_adjacent_gap(&h0) <= EQUIVALENCE_MIN_GAP {
            continue;
        }
        let engine = cd_term_matrix_elements(&h0, &two_spin_rate(&p)).unwrap();
        worst[1] = worst[1].max(frob(engine.matrix(), two_spin_cd_term(&p).unwrap().matrix()));
        count[1] += 1;
    }
    while count[2] < EQUIVALENCE_POINTS {
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = TwoSpinParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        let q = rng.gen_range(0.01..PI - 0.01);
        let block = xy_block(q, &p).unwrap().h_block;
        if min_adjacent_gap(&block) <= EQUIVALENCE_MIN_GAP {
            continue;
        }
        let engine = cd_term_matrix_elements(&block, &xy_block_rate(q, &p).unwrap()).unwrap();
        worst[2] = worst[2].max(frob(engine.matrix(), xy_block_cd(q, &p).unwrap().matrix()));
        count[2] += 1;
    }
    // Collective driver in its quadratic boson form, compared on the lowest
    // levels of a truncated Fock space.
    let (cutoff, levels) = (160, 8);
    while count[3] < EQUIVALENCE_POINTS {
        let jx: f64 = rng.gen_range(0.0..4.0);
        let jy = rng.gen_range(0.0..4.0);
        let h = jx.max(jy) + rng.gen_range(0.5..4.0);
        let p = LmgParams::new(1, jx, jy, h, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if ((jx - jy) / (2.0 * h - jx - jy)).abs() > 0.8 {
            continue;
        }
        let h0 = lmg_boson_hamiltonian(&p, cutoff).unwrap();
        let frame = eigh_sorted(&h0).unwrap();
        if frame.eigenvalues.windows(2).take(levels).any(|w| w[1] - w[0] <= EQUIVALENCE_MIN_GAP) {
            continue;
        }
        let engine = cd_term_matrix_elements(&h0, &lmg_boson_rate(&p, cutoff).unwrap()).unwrap();
        let closed = lmg_boson_driver(&p, cutoff).unwrap();
        let v = frame.eigenvectors.columns(0, levels);
        let diff = v.adjoint() * (engine.matrix() - closed.matrix()) * v;
        worst[3] = worst[3].max(diff.norm());
        count[3] += 1;
    }
    let pass = worst.iter().all(|&w| w < EQUIVALENCE_TOL);
    Outcome::new(
        pass,
        format!(
            "worst Frobenius: two-level {:.2e}, two-spin {:.2e}, xy block {:.2e}, lmg {:.2e} (tol {EQUIVALENCE_TOL:.0e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
    .within(Duration::from_secs(60))
}

fn criterion_2() -> Outcome {
    let mut worst: Vec<(String, f64)> = Vec::new();
    for omega in [0.5, 5.0, 50.0] {
        let field = OscillatingField::new(1.0, 0.5, omega).unwrap();
        let sys = System::new(Model::TwoLevel { field, duration: 4.0 * PI / omega }).unwrap();
        for mode in [DriverMode::AnalyticCd, DriverMode::EngineCd] {
            worst.push((format!("two-level w={omega} {mode:?}"), default_trace(&sys, mode).min_fidelity()));
        }
    }
    let generic = Schedule::new(
        1.0,
        Profile::Linear { start: 1.0, slope: 0.5 },
        Profile::Linear { start: 0.3, slope: 0.4 },
        FieldRule::Profile(Profile::Gaussian { a: 0.2, b: 1.0 }),
    )
    .unwrap();
    let sys = System::new(Model::TwoSpin { schedule: generic }).unwrap();
    for mode in [DriverMode::AnalyticCd, DriverMode::EngineCd] {
        worst.push((format!("two-spin {mode:?}"), default_trace(&sys, mode).min_fidelity()));
    }
    let xy = matched_comparison_schedule(ComparisonKind::Gaussian, 20.0, 12.0).unwrap();
    let sys = System::new(Model::Xy { sites: 8, schedule: xy }).unwrap();
    let mut cfg = TraceConfig::for_duration(1.0);
    cfg.integrator.step = 1e-3;
    worst.push(("xy N=8 EngineCd".into(), trace(&sys, DriverMode::EngineCd, &cfg).min_fidelity()));
    let (_, gaussian) = paper_symmetric();
    for n in [20, 100] {
        let sys = lmg(n, gaussian);
        worst.push((format!("lmg N={n} EngineCd"), default_trace(&sys, DriverMode::EngineCd).min_fidelity()));
    }
    let (label, min) = worst.iter().fold((String::new(), f64::INFINITY), |a, (l, f)| if *f < a.1 { (l.clone(), *f) } else { a });
    Outcome::new(
        min >= 1.0 - TRANSITIONLESS_TOL,
        format!("{} runs, lowest fidelity {min:.10} ({label}), need >= 1-{TRANSITIONLESS_TOL:.0e}", worst.len()),
    )
    .within(Duration::from_secs(300))
}

fn criterion_3() -> Outcome {
    let (h0, h3) = (1.0, 0.5);
    let field = OscillatingField::static_driver(h0, h3).unwrap();
    let omega = field.omega;
    assert!((2.0 * (h0 * h0 + h3 * h3) - omega * h3).abs() < 1e-14);
    let target = FieldVector3::new(0.0, 0.0, 0.5 * omega);
    let period = 2.0 * PI / omega;
    let field_err = (0..20)
        .map(|k| {
            let t = 2.0 * period * k as f64 / 19.0;
            let f = field.total_field(t);
            (f.hx - target.hx).abs().max((f.hy - target.hy).abs()).max((f.hz - target.hz).abs())
        })
        .fold(0.0, f64::max);
    let duration = 2.0 * period;
    let sys = System::new(Model::TwoLevel { field, duration }).unwrap();
    let driven = FnHamiltonian::new(2, move |_| Ok(tls_hamiltonian(target)));
    let mut tracker = AdiabaticTracker::start(&eigh_at(&sys.h0(0.0), 0.0).unwrap(), 0, None).unwrap();
    let mut psi = StateVector::new(tracker.transported().clone()).unwrap();
    let cfg = IntegratorConfig::for_duration(duration);
    let mut min_f = 1.0f64;
    let points = 200;
    for k in 1..points {
        let (a, b) = (duration * (k - 1) as f64 / (points - 1) as f64, duration * k as f64 / (points - 1) as f64);
        psi = evolve(&driven, &psi, a, b, &cfg).unwrap();
        record_drift((psi.norm() - 1.0).abs());
        tracker.advance(&eigh_at(&sys.h0(b), b).unwrap()).unwrap();
        min_f = min_f.min(fidelity(&tracker.reference(), &psi).unwrap());
    }
    Outcome::new(
        field_err < STATIC_FIELD_TOL && min_f >= 1.0 - STATIC_FIDELITY_TOL,
        format!("total field deviation {field_err:.2e} (tol {STATIC_FIELD_TOL:.0e}), static-drive fidelity {min_f:.12}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 4];
    for _ in 0..20 {
        let jx = Profile::Linear { start: rng.gen_range(2.0..4.0), slope: rng.gen_range(-1.0..1.0) };
        let jy = Profile::Linear { start: rng.gen_range(-1.0..1.0), slope: rng.gen_range(-0.5..0.5) };
        let c = rng.gen_range(-3.0..3.0);
        let two = fp_family_generic(FixedPointFamily::TwoSpin { c }, jx, jy, 1.0).unwrap();
        let c_xy = if c.abs() < 0.1 { 0.5 } else { c };
        let xy = fp_family_generic(FixedPointFamily::XyChain { c: c_xy }, jx, jy, 1.0).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            worst[0] = worst[0].max(two_spin_cd_coefficient(&TwoSpinParams::from_sample(&two.sample(t))).unwrap().abs());
            worst[1] = worst[1].max(xy_j1_lowlying(&TwoSpinParams::from_sample(&xy.sample(t))).unwrap().abs());
        }
    }
    let (sym, _) = paper_symmetric();
    let (brk, _) = paper_broken();
    // Open interval: both protocols end on the critical point and the broken
    // one starts with an infinite field rate.
    for k in 1..100 {
        let t = k as f64 / 100.0;
        worst[2] = worst[2].max(lmg_h1_coupling(&LmgParams::from_sample(100, &sym.sample(t))).unwrap().abs());
        worst[3] = worst[3].max(lmg_h1_coupling_any_phase(&LmgParams::from_sample(100, &brk.sample(t))).unwrap().abs());
    }
    worst[2] = worst[2].max(lmg_h1_coupling(&LmgParams::from_sample(100, &sym.sample(0.0))).unwrap().abs());
    let (a, b) = tqd_core::schedule::lmg_fpa_constants(0.5).unwrap();
    let mut finals = Vec::new();
    for duration in [1.0, 0.1] {
        let s = fp_family_generic(
            FixedPointFamily::LmgFpa { a, b },
            Profile::Linear { start: 10.0, slope: -4.0 },
            Profile::Linear { start: 0.0, slope: 4.0 },
            duration,
        )
        .unwrap();
        finals.push(default_trace(&lmg(100, s), DriverMode::Bare).final_fidelity());
    }
    let pass = worst.iter().all(|&w| w < FIXED_POINT_COUPLING_TOL) && finals.iter().all(|&f| f >= FIXED_POINT_FIDELITY);
    Outcome::new(
        pass,
        format!(
            "max coupling two-spin {:.1e}, xy {:.1e}, lmg sym {:.1e}, lmg broken {:.1e}; bare N=100 final fidelity {:.6} / {:.6} (duration 1 / 0.1)",
            worst[0], worst[1], worst[2], worst[3], finals[0], finals[1]
        ),
    )
}

fn criterion_5() -> Outcome {
    let n = 6;
    let (x, y) = lmg_xy_hat_operators(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let entry_max = |m: &ComplexMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (mut generic, mut family) = (0.0f64, 0.0f64);
    for _ in 0..COMMUTATOR_POINTS {
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let p = LmgParams::new(n, v[0], v[1], v[2], v[3], v[4], v[5]);
        let c = commutator(&lmg_hamiltonian(&p).unwrap(), &lmg_rate(&p).unwrap()).unwrap();
        let ca = 2.0 * (p.jx * p.djy - p.jy * p.djx);
        let cb = -2.0 * ((p.jx - p.jy) * p.dh - (p.djx - p.djy) * p.h);
        let want = &x * C64::new(ca, 0.0) + &y * C64::new(cb, 0.0);
        generic = generic.max(entry_max(&(c - want)));

        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let h = 0.5 * (a + b) * p.jx + 0.5 * (a - b) * p.jy;
        let dh = 0.5 * (a + b) * p.djx + 0.5 * (a - b) * p.djy;
        let q = LmgParams::new(n, p.jx, p.jy, h, p.djx, p.djy, dh);
        let c = commutator(&lmg_hamiltonian(&q).unwrap(), &lmg_rate(&q).unwrap()).unwrap();
        let want = (&x - &y * C64::new(a, 0.0)) * C64::new(2.0 * (q.jx * q.djy - q.jy * q.djx), 0.0);
        family = family.max(entry_max(&(c - want)));
    }
    Outcome::new(
        generic < COMMUTATOR_TOL && family < COMMUTATOR_TOL,
        format!("max entry deviation: decomposition {generic:.2e}, constant-ratio family {family:.2e} (tol {COMMUTATOR_TOL:.0e})"),
    )
}

fn criterion_6() -> Outcome {
    let n = 50;
    let (sym_fp, sym_cmp) = paper_symmetric();
    let (brk_fp, brk_cmp) = paper_broken();
    let f = |s: Schedule| default_trace(&lmg(n, s), DriverMode::Bare).final_fidelity();
    let (sf, sc, bf, bc) = (f(sym_fp), f(sym_cmp), f(brk_fp), f(brk_cmp));
    let pass = sf > sc && bf > bc && (1.0 - bf) > (1.0 - sf);
    Outcome::new(
        pass,
        format!(
            "N={n} final fidelity: symmetric fixed point {sf:.6} vs gaussian {sc:.6}; broken fixed point {bf:.6} vs quartic-exp {bc:.6}"
        ),
    )
    .within(Duration::from_secs(300))
}

fn criterion_7() -> Outcome {
    let (sym_fp, sym_cmp) = paper_symmetric();
    let (brk_fp, brk_cmp) = paper_broken();
    let run = |s: &Schedule| -> Vec<f64> {
        SIZE_SWEEP.iter().map(|&n| default_trace(&lmg(n, *s), DriverMode::Bare).final_fidelity()).collect()
    };
    let (sf, sc, bf, bc) = (run(&sym_fp), run(&sym_cmp), run(&brk_fp), run(&brk_cmp));
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let last = SIZE_SWEEP.len() - 1;
    let mut pass = true;
    for (fp, cmp) in [(&sf, &sc), (&bf, &bc)] {
        pass &= increasing(fp) && fp[last] > SWEEP_FINAL_FIDELITY && fp[last] - cmp[last] > SWEEP_MARGIN;
    }
    let fmt = |v: &[f64]| v.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>().join(" ");
    Outcome::new(
        pass,
        format!(
            "N={SIZE_SWEEP:?}: symmetric fp [{}] gaussian [{}]; broken fp [{}] quartic-exp [{}]",
            fmt(&sf),
            fmt(&sc),
            fmt(&bf),
            fmt(&bc)
        ),
    )
    .within(Duration::from_secs(600))
}

fn dicke_isometry(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut v = ComplexMatrix::zeros(dim, n + 1);
    for k in 0..=n {
        let members: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == k).collect();
        let w = 1.0 / (members.len() as f64).sqrt();
        for i in members {
            v[(i, k)] = C64::new(w, 0.0);
        }
    }
    v
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_xy = 0.0f64;
    for n in [2, 4, 6, 8] {
        for _ in 0..5 {
            let p = TwoSpinParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0, 0.0, 0.0);
            let full = xy_hamiltonian(&p, n).unwrap();
            let idx = even_parity_indices(n);
            let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |a, b| full.matrix()[(idx[a], idx[b])]);
            let brute = eigh_sorted(&HermitianOperator::new(sub).unwrap()).unwrap().eigenvalues;
            let blocks = xy_even_parity_spectrum(&p, n).unwrap();
            assert_eq!(brute.len(), blocks.len());
            let d = brute.iter().zip(&blocks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst_xy = worst_xy.max(d);
        }
    }
    // Full 2^4 space from Pauli strings, projected on the symmetric sector.
    let n = 4;
    let (jx, jy, h) = (1.0, 0.3, 5.0);
    let mut full = HermitianOperator::zeros(1 << n);
    for i in 0..n {
        for j in 0..n {
            for (axis, c) in [(Axis::X, jx), (Axis::Y, jy)] {
                let op = if i == j {
                    HermitianOperator::identity(1 << n)
                } else {
                    pauli_string(&[(i, axis), (j, axis)], n).unwrap()
                };
                full.add_scaled(-2.0 * c / n as f64 * 0.25, &op).unwrap();
            }
        }
        full.add_scaled(-h, &pauli_string(&[(i, Axis::Z)], n).unwrap()).unwrap();
    }
    let v = dicke_isometry(n);
    let projected = v.adjoint() * full.matrix() * &v;
    let sector = lmg_hamiltonian(&LmgParams::new(n, jx, jy, h, 0.0, 0.0, 0.0)).unwrap();
    let worst_lmg = (projected - sector.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Outcome::new(
        worst_xy < SPECTRUM_TOL && worst_lmg < SECTOR_TOL,
        format!("xy even-parity set distance {worst_xy:.2e} (tol {SPECTRUM_TOL:.0e}), lmg N=4 sector deviation {worst_lmg:.2e} (tol {SECTOR_TOL:.0e})"),
    )
}

fn criterion_9() -> Outcome {
    let mut h = pauli(Axis::X).scaled(0.7);
    h.add_scaled(-0.4, &pauli(Axis::Z)).unwrap();
    let frame = eigh_sorted(&h).unwrap();
    let hs = h.clone();
    let sys = FnHamiltonian::new(2, move |_| Ok(hs.clone()));
    let psi0 = StateVector::basis(2, 0).unwrap();
    let t1 = 3.0;
    let exact = {
        let c = frame.eigenvectors.adjoint() * psi0.amplitudes();
        let phased = DVector::from_iterator(2, c.iter().zip(&frame.eigenvalues).map(|(a, e)| a * C64::from_polar(1.0, -e * t1)));
        &frame.eigenvectors * phased
    };
    let err = |step: f64| {
        let cfg = IntegratorConfig { step, renormalize_every: 0, ..IntegratorConfig::for_duration(t1) };
        let cfg = IntegratorConfig { frame: tqd_core::dynamics::Frame::Lab, ..cfg };
        (evolve(&sys, &psi0, 0.0, t1, &cfg).unwrap().amplitudes() - &exact).norm()
    };
    let order = (err(0.02) / err(0.01)).log2();

    let osc = OscillatingField::new(1.0, 0.6, 1.0).unwrap();
    let omega_solid = 2.0 * PI * (1.0 - osc.h3 / (osc.h0 * osc.h0 + osc.h3 * osc.h3).sqrt());
    let steps = 4000;
    let at = |t: f64| eigh_at(&tls_hamiltonian(osc.field(t)), t).unwrap();
    let mut tracker = AdiabaticTracker::start(&at(0.0), 1, None).unwrap();
    for k in 1..=steps {
        tracker.advance(&at(2.0 * PI * k as f64 / steps as f64)).unwrap();
    }
    let mut berry = tracker.geometric_phase() + 0.5 * omega_solid;
    berry -= 2.0 * PI * (berry / (2.0 * PI)).round();

    let drift = f64::from_bits(MAX_DRIFT.load(Ordering::Relaxed));
    Outcome::new(
        (order - 4.0).abs() < ORDER_TOL && drift < DRIFT_TOL && berry.abs() < BERRY_TOL,
        format!("convergence order {order:.3}, max norm drift {drift:.2e} (tol {DRIFT_TOL:.0e}), Berry phase error {:.2e}", berry.abs()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("analytic-engine equivalence", criterion_1),
        ("transitionless evolution", criterion_2),
        ("static driver", criterion_3),
        ("fixed-point nulls", criterion_4),
        ("commutator identity", criterion_5),
        ("time-dependence ordering", criterion_6),
        ("size-dependence trend", criterion_7),
        ("xy and lmg cross-validation", criterion_8),
        ("numerical hygiene", criterion_9),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => {
                let late = o.limit.is_some_and(|l| elapsed > l);
                let detail = if late { format!("{} [over time limit {:?}]", o.detail, o.limit.unwrap()) } else { o.detail };
                (o.pass && !late, detail)
            }
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        if !pass {
            failed += 1;
        }
        writeln!(
            out,
            "criterion {} {:<28} {}  {} ({:.1}s)",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            elapsed.as_secs_f64()
        )
        .unwrap();
        out.flush().unwrap();
    }
    writeln!(out, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
