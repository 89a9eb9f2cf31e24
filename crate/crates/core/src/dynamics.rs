//! Schrödinger integration, adiabatic reference states and the fidelity
//! experiment runners.

use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use libm::{atan2, ceil};
use nalgebra::DVector;

use crate::analytic::{tls_cd_field, tls_hamiltonian, xy_plus_yx, OscillatingField, TwoSpinParams};
use crate::engine::{
    adiabaticity_metric_in_frame, cd_term_for_state_in_frame, cd_term_matrix_elements, min_gap,
    HamiltonianFunction,
};
use crate::error::{argument, Error, Result};
use crate::lmg::{lmg_h1_coupling, LmgOperators, LmgParams};
use crate::operator::{
    eigh_at, pauli, pauli_string, Axis, HermitianOperator, SpectralFrame, StateVector, C64, I,
};
use crate::schedule::Schedule;
use crate::xy::xy_j1_lowlying;

/// Drift of `‖ψ‖` beyond which integration is aborted.
pub const DRIFT_LIMIT: f64 = 1e-4;
/// Largest accepted `|λ_max|·step` of `H - σ` for RK4.
pub const STABILITY_FACTOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

/// Reference energy subtracted during each step. `CoRotating` removes
/// `σ = Re⟨ψ|H(t_n)|ψ⟩` and restores it as an exact phase; the physical
/// state is unchanged but large energy offsets no longer limit accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    CoRotating,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    /// Renormalize every this many steps; 0 never.
    pub renormalize_every: usize,
    pub method: Method,
    pub frame: Frame,
}

impl IntegratorConfig {
    /// Step `1e-4·duration`, no renormalization, co-rotating frame.
    pub fn for_duration(duration: f64) -> Self {
        Self { step: 1e-4 * duration, renormalize_every: 0, method: Method::Rk4, frame: Frame::CoRotating }
    }

    pub fn validate(&self, duration: f64) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(argument("integration step must be positive"));
        }
        if self.step > duration / 100.0 * (1.0 + 1e-12) {
            return Err(argument("integration step must not exceed duration/100"));
        }
        Ok(())
    }
}

fn gershgorin(h: &HermitianOperator, shift: f64) -> f64 {
    let m = h.matrix();
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let z = if i == j { m[(i, j)] - C64::new(shift, 0.0) } else { m[(i, j)] };
            row += z.norm();
        }
        worst = worst.max(row);
    }
    worst
}

fn apply(h: &HermitianOperator, psi: &DVector<C64>, shift: f64) -> DVector<C64> {
    let mut out = h.matrix() * psi;
    if shift != 0.0 {
        out.axpy(C64::new(-shift, 0.0), psi, C64::new(1.0, 0.0));
    }
    out * (-I)
}

/// Integrates `i dψ/dt = H(t) ψ` from `t0` to `t1` with fixed-step RK4.
///
/// The step is `cfg.step`, shortened so the interval is covered evenly and
/// so that `step·‖H(t0) - σ‖ ≤ 1` (Gershgorin bound). Fails when the norm
/// drifts by more than 1e-4.
pub fn evolve<H: HamiltonianFunction + ?Sized>(
    h: &H,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { left: psi0.dim(), right: h.dim() });
    }
    if !(t1 > t0) {
        return Err(argument("evolve needs t1 > t0"));
    }
    if !(cfg.step > 0.0) {
        return Err(argument("integration step must be positive"));
    }
    let mut psi = psi0.amplitudes().clone();
    let mut h_start = h.evaluate(t0)?;
    let sigma0 = match cfg.frame {
        Frame::Lab => 0.0,
        Frame::CoRotating => h_start.matrix_element(&psi, &psi).re,
    };
    let bound = gershgorin(&h_start, sigma0);
    let step = if bound > 0.0 { cfg.step.min(STABILITY_FACTOR / bound) } else { cfg.step };
    let n_steps = (ceil((t1 - t0) / step) as usize).max(1);
    let dt = (t1 - t0) / n_steps as f64;
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        let sigma = match cfg.frame {
            Frame::Lab => 0.0,
            Frame::CoRotating => h_start.matrix_element(&psi, &psi).re / psi.norm_squared(),
        };
        let h_mid = h.evaluate(t + 0.5 * dt)?;
        let h_end = h.evaluate(if k + 1 == n_steps { t1 } else { t + dt })?;
        let half = C64::new(0.5 * dt, 0.0);
        let k1 = apply(&h_start, &psi, sigma);
        let k2 = apply(&h_mid, &(&psi + &k1 * half), sigma);
        let k3 = apply(&h_mid, &(&psi + &k2 * half), sigma);
        let k4 = apply(&h_end, &(&psi + &k3 * C64::new(dt, 0.0)), sigma);
        let incr = (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
        psi += incr;
        if sigma != 0.0 {
            psi *= C64::from_polar(1.0, -sigma * dt);
        }
        if cfg.renormalize_every > 0 && (k + 1) % cfg.renormalize_every == 0 {
            let n = psi.norm();
            psi /= C64::new(n, 0.0);
        }
        if !psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        h_start = h_end;
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift > DRIFT_LIMIT {
        return Err(Error::Integration { drift, limit: DRIFT_LIMIT });
    }
    Ok(StateVector::from_raw(psi))
}

/// `|⟨reference|ψ⟩|²`, normalized by both norms.
pub fn fidelity(reference: &StateVector, psi: &StateVector) -> Result<f64> {
    let ov = reference.inner(psi)?;
    Ok(ov.norm_sqr() / (reference.norm() * reference.norm() * psi.norm() * psi.norm()))
}

/// Follows one adiabatic level across a sequence of frames.
///
/// At each frame the level with the largest overlap with the transported
/// vector is taken; inside a degenerate block the vector is projected onto
/// the block. The transported vector is parallel (`⟨n_k|n_{k+1}⟩ > 0`), so
/// it carries the geometric phase; the dynamical phase is accumulated by the
/// trapezoid rule.
#[derive(Clone, Debug)]
pub struct AdiabaticTracker {
    level: usize,
    time: f64,
    energy: f64,
    dynamical_phase: f64,
    vector: DVector<C64>,
    canonical: DVector<C64>,
}

impl AdiabaticTracker {
    /// Starts on level `n` of `frame`. When `n` lies in a degenerate block,
    /// `probe` (a frame slightly later) selects the member that continues
    /// smoothly.
    pub fn start(frame: &SpectralFrame, n: usize, probe: Option<&SpectralFrame>) -> Result<Self> {
        if n >= frame.dim() {
            return Err(argument("level index out of range"));
        }
        let block = frame.block_of(n);
        let vector = match probe {
            Some(p) if block.len() > 1 => {
                let target = p.eigenvectors.column(n);
                let vb = frame.eigenvectors.columns(block.start, block.len());
                let proj = vb * (vb.adjoint() * target);
                let norm = proj.norm();
                if norm < 0.1 {
                    return Err(Error::TrackingLoss { level: n, overlap: norm });
                }
                proj / C64::new(norm, 0.0)
            }
            _ => frame.eigenvectors.column(n).into_owned(),
        };
        Ok(Self {
            level: n,
            time: frame.time,
            energy: frame.eigenvalues[n],
            dynamical_phase: 0.0,
            canonical: frame.eigenvectors.column(n).into_owned(),
            vector,
        })
    }

    pub fn advance(&mut self, frame: &SpectralFrame) -> Result<()> {
        let c = frame.eigenvectors.adjoint() * &self.vector;
        let (j, _) = c.iter().enumerate().fold((0, -1.0), |acc, (k, z)| if z.norm() > acc.1 { (k, z.norm()) } else { acc });
        let block = frame.block_of(j);
        let next = if block.len() > 1 {
            let vb = frame.eigenvectors.columns(block.start, block.len());
            vb * c.rows(block.start, block.len())
        } else {
            frame.eigenvectors.column(j) * c[j]
        };
        let overlap = next.norm();
        if overlap < 0.1 {
            return Err(Error::TrackingLoss { level: self.level, overlap });
        }
        let e = frame.eigenvalues[j];
        self.dynamical_phase += 0.5 * (frame.time - self.time) * (self.energy + e);
        self.vector = next / C64::new(overlap, 0.0);
        self.canonical = frame.eigenvectors.column(j).into_owned();
        self.level = j;
        self.energy = e;
        self.time = frame.time;
        Ok(())
    }

    /// Current index of the tracked level in ascending order.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dynamical_phase(&self) -> f64 {
        self.dynamical_phase
    }

    /// Phase of the transported vector relative to the single-frame gauge of
    /// the current frame; a gauge-invariant Berry phase after a closed loop.
    pub fn geometric_phase(&self) -> f64 {
        let z = self.canonical.dotc(&self.vector);
        atan2(z.im, z.re)
    }

    /// Parallel-transported eigenvector without the dynamical phase.
    pub fn transported(&self) -> &DVector<C64> {
        &self.vector
    }

    /// `e^{-i∫E dt} |n(t)⟩` with the transported (Berry-phase carrying)
    /// vector.
    pub fn reference(&self) -> StateVector {
        StateVector::from_raw(&self.vector * C64::from_polar(1.0, -self.dynamical_phase))
    }
}

/// Adiabatic state of level `n` at time `t`, tracked over the points of
/// `grid` that lie before `t` (the first grid point is the start time).
pub fn adiabatic_reference<H: HamiltonianFunction + ?Sized>(
    h: &H,
    n: usize,
    t: f64,
    grid: &[f64],
) -> Result<StateVector> {
    let Some(&t0) = grid.first() else {
        return Err(argument("reference grid is empty"));
    };
    if grid.windows(2).any(|w| !(w[1] > w[0])) || t < t0 {
        return Err(argument("reference grid must be increasing and start before t"));
    }
    let first = eigh_at(&h.evaluate(t0)?, t0)?;
    let probe_t = t0 + 1e-6 * (t - t0).max(1e-3);
    let probe = eigh_at(&h.evaluate(probe_t)?, probe_t)?;
    let mut tracker = AdiabaticTracker::start(&first, n, Some(&probe))?;
    for &s in grid.iter().skip(1).filter(|&&s| s < t) {
        tracker.advance(&eigh_at(&h.evaluate(s)?, s)?)?;
    }
    if t > tracker.time() {
        tracker.advance(&eigh_at(&h.evaluate(t)?, t)?)?;
    }
    Ok(tracker.reference())
}

/// Model family together with its protocol.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    /// Precessing field over `[0, duration]`.
    TwoLevel { field: OscillatingField, duration: f64 },
    TwoSpin { schedule: Schedule },
    Xy { sites: usize, schedule: Schedule },
    Lmg { n: usize, schedule: Schedule },
}

impl Model {
    pub fn duration(&self) -> f64 {
        match self {
            Model::TwoLevel { duration, .. } => *duration,
            Model::TwoSpin { schedule } | Model::Xy { schedule, .. } | Model::Lmg { schedule, .. } => {
                schedule.duration
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Model::TwoLevel { .. } => 1,
            Model::TwoSpin { .. } => 2,
            Model::Xy { sites, .. } => *sites,
            Model::Lmg { n, .. } => *n,
        }
    }
}

/// A model with its operator basis precomputed: `H0(t) = Σ_k c_k(t) A_k`.
#[derive(Clone, Debug)]
pub struct System {
    model: Model,
    terms: [HermitianOperator; 3],
    /// `Σ_j (σxσy + σyσx)` for XY, `SxSy + SySx` for LMG.
    pair: Option<HermitianOperator>,
}

impl System {
    pub fn new(model: Model) -> Result<Self> {
        let (terms, pair) = match &model {
            Model::TwoLevel { duration, .. } => {
                if !(*duration > 0.0) {
                    return Err(argument("duration must be positive"));
                }
                ([pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z)], None)
            }
            Model::TwoSpin { .. } => {
                let mut z = pauli_string(&[(0, Axis::Z)], 2)?;
                z.add_scaled(1.0, &pauli_string(&[(1, Axis::Z)], 2)?)?;
                (
                    [
                        pauli_string(&[(0, Axis::X), (1, Axis::X)], 2)?,
                        pauli_string(&[(0, Axis::Y), (1, Axis::Y)], 2)?,
                        z,
                    ],
                    None,
                )
            }
            Model::Xy { sites, .. } => {
                let n = *sites;
                if n < 2 || n % 2 != 0 {
                    return Err(argument("XY chain needs an even number of sites >= 2"));
                }
                let d = 1usize << n.min(crate::operator::MAX_SITES + 1);
                let (mut xx, mut yy, mut z, mut pair) = (
                    HermitianOperator::zeros(d),
                    HermitianOperator::zeros(d),
                    HermitianOperator::zeros(d),
                    HermitianOperator::zeros(d),
                );
                for j in 0..n {
                    let k = (j + 1) % n;
                    xx.add_scaled(-1.0, &pauli_string(&[(j, Axis::X), (k, Axis::X)], n)?)?;
                    yy.add_scaled(-1.0, &pauli_string(&[(j, Axis::Y), (k, Axis::Y)], n)?)?;
                    z.add_scaled(1.0, &pauli_string(&[(j, Axis::Z)], n)?)?;
                    pair.add_scaled(1.0, &xy_plus_yx(n, j, k)?)?;
                }
                ([xx, yy, z], Some(pair))
            }
            Model::Lmg { n, .. } => {
                let ops = LmgOperators::new(*n)?;
                let unit = |jx, jy, h| ops.hamiltonian(&LmgParams::new(*n, jx, jy, h, 0.0, 0.0, 0.0));
                ([unit(1.0, 0.0, 0.0), unit(0.0, 1.0, 0.0), unit(0.0, 0.0, 1.0)], Some(ops.sxy().clone()))
            }
        };
        Ok(Self { model, terms, pair })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn duration(&self) -> f64 {
        self.model.duration()
    }

    /// Coefficients of the three basis terms and their time derivatives.
    pub fn coefficients(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        match &self.model {
            Model::TwoLevel { field, .. } => {
                let (f, r) = (field.field(t), field.rate(t));
                ([f.hx, f.hy, f.hz], [r.hx, r.hy, r.hz])
            }
            Model::TwoSpin { schedule } | Model::Xy { schedule, .. } | Model::Lmg { schedule, .. } => {
                let s = schedule.sample(t);
                ([s.value.jx, s.value.jy, s.value.h], [s.rate.jx, s.rate.jy, s.rate.h])
            }
        }
    }

    fn combine(&self, c: [f64; 3]) -> HermitianOperator {
        let mut out = self.terms[0].scaled(c[0]);
        for k in 1..3 {
            if c[k] != 0.0 {
                out.add_scaled(c[k], &self.terms[k]).expect("terms share a dimension");
            }
        }
        out
    }

    pub fn h0(&self, t: f64) -> HermitianOperator {
        self.combine(self.coefficients(t).0)
    }

    pub fn dh0(&self, t: f64) -> HermitianOperator {
        self.combine(self.coefficients(t).1)
    }

    /// Closed-form driver: exact for the two-level and two-spin models, the
    /// low-momentum driver for XY, the collective driver for LMG.
    pub fn analytic_cd(&self, t: f64) -> Result<HermitianOperator> {
        let (c, r) = self.coefficients(t);
        match &self.model {
            Model::TwoLevel { field, .. } => {
                let _ = field;
                Ok(tls_hamiltonian(tls_cd_field(
                    crate::analytic::FieldVector3::new(c[0], c[1], c[2]),
                    crate::analytic::FieldVector3::new(r[0], r[1], r[2]),
                )?))
            }
            Model::TwoSpin { .. } => {
                crate::analytic::two_spin_cd_term(&TwoSpinParams::new(c[0], c[1], c[2], r[0], r[1], r[2]))
            }
            Model::Xy { .. } => {
                let j1 = xy_j1_lowlying(&TwoSpinParams::new(c[0], c[1], c[2], r[0], r[1], r[2]))?;
                Ok(self.pair.as_ref().expect("XY pair term").scaled(j1 / 8.0))
            }
            Model::Lmg { n, .. } => {
                let p = LmgParams::new(*n, c[0], c[1], c[2], r[0], r[1], r[2]);
                if !p.is_symmetric_phase() {
                    return Err(Error::Unsupported("collective driver is defined in the symmetric phase"));
                }
                let h1 = lmg_h1_coupling(&p)?;
                Ok(self.pair.as_ref().expect("LMG pair term").scaled(h1 / (2.0 * *n as f64)))
            }
        }
    }
}

impl HamiltonianFunction for System {
    fn dim(&self) -> usize {
        self.terms[0].dim()
    }
    fn evaluate(&self, t: f64) -> Result<HermitianOperator> {
        Ok(self.h0(t))
    }
    fn derivative(&self, t: f64) -> Result<HermitianOperator> {
        Ok(self.dh0(t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriverMode {
    Bare,
    AnalyticCd,
    EngineCd,
    StateCd,
}

/// What to do when the driver diverges at some time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergencePolicy {
    Fail,
    /// Drop the driver at that instant and count the event.
    ClampToZero,
}

/// `H0 + H1` for a driver mode.
pub struct Driven<'a> {
    system: &'a System,
    mode: DriverMode,
    level: usize,
    policy: DivergencePolicy,
    divergences: Cell<usize>,
    hint: RefCell<Option<DVector<C64>>>,
}

impl<'a> Driven<'a> {
    pub fn new(system: &'a System, mode: DriverMode, level: usize, policy: DivergencePolicy) -> Self {
        Self { system, mode, level, policy, divergences: Cell::new(0), hint: RefCell::new(None) }
    }

    pub fn divergences(&self) -> usize {
        self.divergences.get()
    }

    /// Vector used by the state-specific driver to pick its level.
    pub fn set_hint(&self, v: &DVector<C64>) {
        *self.hint.borrow_mut() = Some(v.clone());
    }

    pub fn driver(&self, t: f64) -> Result<Option<HermitianOperator>> {
        let s = self.system;
        let out = match self.mode {
            DriverMode::Bare => return Ok(None),
            DriverMode::AnalyticCd => s.analytic_cd(t),
            DriverMode::EngineCd => cd_term_matrix_elements(&s.h0(t), &s.dh0(t)),
            DriverMode::StateCd => {
                let frame = eigh_at(&s.h0(t), t)?;
                let level = match self.hint.borrow().as_ref() {
                    Some(v) => {
                        let c = frame.eigenvectors.adjoint() * v;
                        c.iter().enumerate().fold((0, -1.0), |a, (k, z)| if z.norm() > a.1 { (k, z.norm()) } else { a }).0
                    }
                    None => self.level,
                };
                cd_term_for_state_in_frame(&frame, &s.dh0(t), level)
            }
        };
        match out {
            Ok(h1) => Ok(Some(h1)),
            Err(e @ (Error::Divergence { .. } | Error::Singular { .. } | Error::Degenerate { .. })) => {
                match self.policy {
                    DivergencePolicy::Fail => Err(e),
                    DivergencePolicy::ClampToZero => {
                        self.divergences.set(self.divergences.get() + 1);
                        Ok(None)
                    }
                }
            }
            Err(e) => Err(e),
        }
    }
}

impl HamiltonianFunction for Driven<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }
    fn evaluate(&self, t: f64) -> Result<HermitianOperator> {
        let h0 = self.system.h0(t);
        Ok(match self.driver(t)? {
            Some(h1) => &h0 + &h1,
            None => h0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceConfig {
    /// Initial level (ascending order at `t = 0`).
    pub level: usize,
    /// Output grid points including both ends.
    pub output_points: usize,
    /// Tracking frames per output interval.
    pub tracking_substeps: usize,
    pub integrator: IntegratorConfig,
    pub policy: DivergencePolicy,
}

impl TraceConfig {
    pub fn for_duration(duration: f64) -> Self {
        Self {
            level: 0,
            output_points: 200,
            tracking_substeps: 2,
            integrator: IntegratorConfig::for_duration(duration),
            policy: DivergencePolicy::Fail,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub fidelity: f64,
    pub min_gap: f64,
    pub adiabaticity: f64,
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityTrace {
    pub records: Vec<TraceRecord>,
    /// Instants at which the driver diverged and was clamped to zero.
    pub divergence_events: usize,
}

impl FidelityTrace {
    pub fn final_fidelity(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.fidelity)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.records.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.records.iter().map(|r| r.norm_drift).fold(0.0, f64::max)
    }
}

fn diagnostics(system: &System, frame: &SpectralFrame, level: usize) -> (f64, f64) {
    let gap = if frame.dim() > 1 { min_gap(frame, level) } else { f64::INFINITY };
    let (_, rate) = system.coefficients(frame.time);
    let metric = if rate.iter().all(|r| r.is_finite()) {
        adiabaticity_metric_in_frame(frame, &system.dh0(frame.time), level).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    (gap, metric)
}

/// Evolves the initial eigenstate `cfg.level` under `H0 + H1(mode)` and
/// records fidelity against the tracked adiabatic state on a uniform grid.
pub fn run_fidelity_trace(system: &System, mode: DriverMode, cfg: &TraceConfig) -> Result<FidelityTrace> {
    let duration = system.duration();
    cfg.integrator.validate(duration)?;
    if cfg.output_points < 2 {
        return Err(argument("need at least two output points"));
    }
    let subs = cfg.tracking_substeps.max(1);
    let driven = Driven::new(system, mode, cfg.level, cfg.policy);
    let first = eigh_at(&system.h0(0.0), 0.0)?;
    let probe_t = 1e-6 * duration;
    let probe = eigh_at(&system.h0(probe_t), probe_t)?;
    let mut tracker = AdiabaticTracker::start(&first, cfg.level, Some(&probe))?;
    let mut psi = StateVector::from_raw(tracker.transported().clone());
    let (gap, metric) = diagnostics(system, &first, tracker.level());
    let mut records = Vec::with_capacity(cfg.output_points);
    records.push(TraceRecord { t: 0.0, fidelity: 1.0, min_gap: gap, adiabaticity: metric, norm_drift: 0.0 });
    let segments = (cfg.output_points - 1) * subs;
    let mut t_prev = 0.0;
    for k in 1..=segments {
        let t = duration * k as f64 / segments as f64;
        driven.set_hint(tracker.transported());
        psi = evolve(&driven, &psi, t_prev, t, &cfg.integrator)?;
        let frame = eigh_at(&system.h0(t), t)?;
        tracker.advance(&frame)?;
        if k % subs == 0 {
            let (gap, metric) = diagnostics(system, &frame, tracker.level());
            records.push(TraceRecord {
                t,
                fidelity: fidelity(&tracker.reference(), &psi)?,
                min_gap: gap,
                adiabaticity: metric,
                norm_drift: (psi.norm() - 1.0).abs(),
            });
        }
        t_prev = t;
    }
    Ok(FidelityTrace { records, divergence_events: driven.divergences() })
}

/// Final fidelity per size; per-size failures are returned, not raised.
pub fn run_size_sweep(
    build: impl Fn(usize) -> Result<System>,
    sizes: &[usize],
    mode: DriverMode,
    cfg: &TraceConfig,
) -> Result<Vec<(usize, Result<f64>)>> {
    if sizes.is_empty() {
        return Err(argument("size list is empty"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(argument("sizes must be strictly ascending"));
    }
    Ok(sizes
        .iter()
        .map(|&n| (n, build(n).and_then(|s| run_fidelity_trace(&s, mode, cfg)).map(|t| t.final_fidelity())))
        .collect())
}
