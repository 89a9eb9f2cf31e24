//! Generic construction of the counterdiabatic term `H1(t)` for an arbitrary
//! time-dependent Hamiltonian, plus gauge tracking and spectral monitors.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::linalg::SVD;
use nalgebra::{DMatrix, DVector};

use crate::error::{argument, Error, Result};
use crate::operator::{
    block_partition, commutator, eigen_blocks, eigh_at, eigh_sorted, same_dim, BlockVectors,
    ComplexMatrix, HermitianOperator, SpectralFrame, C64, I,
};

/// Default step of the central finite differences used for `dH/dt`.
pub const FD_STEP: f64 = 1e-5;
/// Relative gap below which a coupled pair makes `H1` diverge.
pub const GAP_FLOOR_RTOL: f64 = 1e-8;
/// Couplings below this (times `max(1, ‖dH‖_F)`) are treated as zero.
pub const COUPLING_TOL: f64 = 1e-10;
/// Smallest acceptable overlap between tracked eigenvectors of adjacent frames.
pub const TRACKING_MIN_OVERLAP: f64 = 0.1;

/// A Hamiltonian `H(t)` with its time derivative.
pub trait HamiltonianFunction {
    fn dim(&self) -> usize;

    fn evaluate(&self, t: f64) -> Result<HermitianOperator>;

    /// `dH/dt`; central finite difference unless the model overrides it.
    fn derivative(&self, t: f64) -> Result<HermitianOperator> {
        central_difference(self, t, FD_STEP)
    }
}

impl<T: HamiltonianFunction + ?Sized> HamiltonianFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, t: f64) -> Result<HermitianOperator> {
        (**self).evaluate(t)
    }
    fn derivative(&self, t: f64) -> Result<HermitianOperator> {
        (**self).derivative(t)
    }
}

pub fn central_difference<H: HamiltonianFunction + ?Sized>(
    h: &H,
    t: f64,
    step: f64,
) -> Result<HermitianOperator> {
    let plus = h.evaluate(t + step)?;
    let minus = h.evaluate(t - step)?;
    Ok((&plus - &minus).scaled(0.5 / step))
}

type OpFn = Box<dyn Fn(f64) -> Result<HermitianOperator>>;

/// Hamiltonian defined by closures.
pub struct FnHamiltonian {
    dim: usize,
    value: OpFn,
    rate: Option<OpFn>,
}

impl FnHamiltonian {
    pub fn new(dim: usize, value: impl Fn(f64) -> Result<HermitianOperator> + 'static) -> Self {
        Self { dim, value: Box::new(value), rate: None }
    }

    pub fn with_derivative(
        mut self,
        rate: impl Fn(f64) -> Result<HermitianOperator> + 'static,
    ) -> Self {
        self.rate = Some(Box::new(rate));
        self
    }
}

impl HamiltonianFunction for FnHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&self, t: f64) -> Result<HermitianOperator> {
        (self.value)(t)
    }
    fn derivative(&self, t: f64) -> Result<HermitianOperator> {
        match &self.rate {
            Some(r) => r(t),
            None => central_difference(self, t, FD_STEP),
        }
    }
}

/// Which levels a gauge alignment checks for tracking loss and crossings.
#[derive(Clone, Copy, Debug)]
enum Checked<'a> {
    All,
    Levels(&'a [usize]),
}

impl Checked<'_> {
    fn block_is_checked(&self, block: &Range<usize>) -> bool {
        match self {
            Checked::All => true,
            Checked::Levels(ls) => ls.iter().any(|l| block.contains(l)),
        }
    }
}

/// Re-phases (and, inside degenerate blocks, rotates) the eigenvectors of
/// `current` so each overlaps its predecessor in `prev` with a real positive
/// value.
///
/// Degenerate blocks of `current` are aligned by the unitary Procrustes
/// rotation maximizing `Re tr(prev_B† cur_B U)`. Fails when a level's overlap
/// drops below 0.1 or when a level overlaps a different level of `prev` more
/// strongly than its own index.
pub fn gauge_align(prev: &SpectralFrame, current: &SpectralFrame) -> Result<SpectralFrame> {
    align_frames(prev, current, Checked::All)
}

/// As `gauge_align`, but only the degenerate blocks holding `levels` are
/// checked; other levels are re-phased on a best-effort basis.
pub fn gauge_align_levels(
    prev: &SpectralFrame,
    current: &SpectralFrame,
    levels: &[usize],
) -> Result<SpectralFrame> {
    align_frames(prev, current, Checked::Levels(levels))
}

fn align_frames(prev: &SpectralFrame, cur: &SpectralFrame, checked: Checked) -> Result<SpectralFrame> {
    same_dim(prev.dim(), cur.dim())?;
    let n = cur.dim();
    let mut out = cur.clone();
    let prev_blocks = prev.degenerate_blocks();
    let prev_block_of = |k: usize| prev_blocks.iter().position(|b| b.contains(&k));
    for block in cur.degenerate_blocks() {
        let check = checked.block_is_checked(&block);
        if block.len() == 1 {
            let k = block.start;
            let cur_k = cur.eigenvectors.column(k);
            if check {
                let col = prev.eigenvectors.adjoint() * cur_k;
                let (best, best_abs) = col
                    .iter()
                    .enumerate()
                    .fold((k, 0.0f64), |acc, (j, z)| if z.norm() > acc.1 { (j, z.norm()) } else { acc });
                let own = col[k];
                if best != k && best_abs > own.norm() && prev_block_of(best) != prev_block_of(k) {
                    return Err(Error::LevelCrossing { level: k, partner: best });
                }
                if own.norm() < TRACKING_MIN_OVERLAP {
                    return Err(Error::TrackingLoss { level: k, overlap: own.norm() });
                }
                let phase = own.conj() / own.norm();
                out.eigenvectors.column_mut(k).scale_mut_complex(phase);
            } else {
                let own = prev.eigenvectors.column(k).dotc(&cur_k);
                if own.norm() > 0.0 {
                    let phase = own.conj() / own.norm();
                    out.eigenvectors.column_mut(k).scale_mut_complex(phase);
                }
            }
        } else {
            let cur_b = cur.eigenvectors.columns(block.start, block.len()).into_owned();
            let prev_b = prev.eigenvectors.columns(block.start, block.len()).into_owned();
            let m = prev_b.adjoint() * &cur_b;
            let svd = SVD::new(m, true, true);
            let smallest = svd.singular_values.iter().fold(f64::INFINITY, |a, s| a.min(*s));
            if check && smallest < TRACKING_MIN_OVERLAP {
                return Err(Error::TrackingLoss { level: block.start, overlap: smallest });
            }
            let (Some(w), Some(zt)) = (svd.u, svd.v_t) else {
                return Err(Error::EigenNonConvergence { dim: n, norm: 0.0, asymmetry: 0.0 });
            };
            // M = W Σ Z†, rotation U = Z W†.
            let rot = zt.adjoint() * w.adjoint();
            let aligned = cur_b * rot;
            out.eigenvectors.columns_mut(block.start, block.len()).copy_from(&aligned);
        }
    }
    Ok(out)
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// Sequential gauge tracker for one sweep: each pushed frame is aligned to
/// the previously returned one.
#[derive(Clone, Debug, Default)]
pub struct GaugeTrack {
    previous: Option<SpectralFrame>,
    levels: Option<Vec<usize>>,
}

impl GaugeTrack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tracks only `levels`; other levels are not checked for crossings.
    pub fn for_levels(levels: &[usize]) -> Self {
        Self { previous: None, levels: Some(levels.to_vec()) }
    }

    pub fn previous(&self) -> Option<&SpectralFrame> {
        self.previous.as_ref()
    }

    pub fn push(&mut self, frame: SpectralFrame) -> Result<&SpectralFrame> {
        let aligned = match (&self.previous, &self.levels) {
            (None, _) => frame,
            (Some(p), None) => gauge_align(p, &frame)?,
            (Some(p), Some(ls)) => gauge_align_levels(p, &frame, ls)?,
        };
        Ok(self.previous.insert(aligned))
    }
}

struct Stencil {
    center: SpectralFrame,
    rate: ComplexMatrix,
}

fn stencil<H: HamiltonianFunction + ?Sized>(h: &H, t: f64, dt: f64) -> Result<Stencil> {
    if !(dt > 0.0) {
        return Err(argument("finite-difference step must be positive"));
    }
    let center = eigh_at(&h.evaluate(t)?, t)?;
    let minus = eigh_at(&h.evaluate(t - dt)?, t - dt)?;
    let plus = eigh_at(&h.evaluate(t + dt)?, t + dt)?;
    let (cb, mb, pb) = (center.degenerate_blocks(), minus.degenerate_blocks(), plus.degenerate_blocks());
    if cb != mb || cb != pb {
        let level = cb
            .iter()
            .zip(mb.iter().chain(pb.iter()))
            .find(|(a, b)| a != b)
            .map(|(a, _)| a.start)
            .unwrap_or(0);
        return Err(Error::LevelCrossing { level, partner: level });
    }
    let minus = gauge_align(&center, &minus)?;
    let plus = gauge_align(&center, &plus)?;
    let rate = (plus.eigenvectors - minus.eigenvectors) * C64::new(0.5 / dt, 0.0);
    Ok(Stencil { center, rate })
}

/// `H1 = i A V†` where `A` holds the components of `d|m⟩/dt` orthogonal to
/// the degenerate block of `m`.
fn assemble_from_rates(center: &SpectralFrame, mut rate: ComplexMatrix) -> Result<HermitianOperator> {
    let v = &center.eigenvectors;
    for block in center.degenerate_blocks() {
        let vb = v.columns(block.start, block.len());
        let proj = vb.adjoint() * rate.columns(block.start, block.len());
        let inside = vb * proj;
        let mut cols = rate.columns_mut(block.start, block.len());
        cols -= inside;
    }
    let h1 = rate * v.adjoint() * I;
    HermitianOperator::hermitize(h1)
}

/// Counterdiabatic term from finite differences of gauge-aligned
/// eigenvectors: `H1 = Σ_m (1 - |m⟩⟨m|) i |ṁ⟩⟨m|`.
pub fn cd_term_spectral<H: HamiltonianFunction + ?Sized>(
    h: &H,
    t: f64,
    dt: f64,
) -> Result<HermitianOperator> {
    let s = stencil(h, t, dt)?;
    if let Some(b) = s.center.degenerate_blocks().into_iter().find(|b| b.len() > 1) {
        let spread = s.center.eigenvalues[b.end - 1] - s.center.eigenvalues[b.start];
        return Err(Error::Degenerate { first: b.start, last: b.end - 1, spread });
    }
    assemble_from_rates(&s.center, s.rate)
}

/// Counterdiabatic term for spectra with degeneracies that persist across the
/// stencil: `H1 = Σ_{n,μ} (1 - Σ_ν |n,ν⟩⟨n,ν|) i |ṅ,μ⟩⟨n,μ|`. Within-block
/// gauge transport uses Procrustes alignment of the neighbouring frames.
pub fn cd_term_degenerate<H: HamiltonianFunction + ?Sized>(
    h: &H,
    t: f64,
    dt: f64,
) -> Result<HermitianOperator> {
    let s = stencil(h, t, dt)?;
    assemble_from_rates(&s.center, s.rate)
}

fn coupling_tolerance(dh0: &HermitianOperator) -> f64 {
    COUPLING_TOL * dh0.frobenius_norm().max(1.0)
}

/// Counterdiabatic term from matrix elements of `dH/dt` in the instantaneous
/// eigenbasis: `H1 = i Σ_{l≠m} |l⟩ ⟨l|Ḣ|m⟩/(E_m - E_l) ⟨m|`.
///
/// Pairs closer than `1e-8 ‖H0‖` contribute nothing when their coupling
/// vanishes and raise `Error::Divergence` otherwise. The computation runs
/// independently on each connected block of the joint nonzero pattern of
/// `h0` and `dh0`, using real arithmetic for real blocks.
pub fn cd_term_matrix_elements(h0: &HermitianOperator, dh0: &HermitianOperator) -> Result<HermitianOperator> {
    same_dim(h0.dim(), dh0.dim())?;
    let n = h0.dim();
    let (hm, dm) = (h0.matrix(), dh0.matrix());
    let blocks = eigen_blocks(hm, block_partition(&[hm, dm]))?;
    let scale = blocks
        .iter()
        .flat_map(|b| b.values.iter())
        .fold(0.0f64, |a, e| a.max(e.abs()));
    let floor = GAP_FLOOR_RTOL * scale;
    let ctol = coupling_tolerance(dh0);
    let mut out = ComplexMatrix::zeros(n, n);
    for b in &blocks {
        let idx = &b.indices;
        let k = idx.len();
        if k == 1 {
            continue;
        }
        let guard = |l: usize, m: usize, coupling: f64| -> Result<Option<f64>> {
            let gap = b.values[m] - b.values[l];
            if gap.abs() <= floor {
                if coupling > ctol {
                    return Err(Error::Divergence { l: idx[l], m: idx[m], gap: gap.abs(), coupling });
                }
                return Ok(None);
            }
            Ok(Some(1.0 / gap))
        };
        match &b.vectors {
            BlockVectors::Real(v) if dm_is_real_on(dm, idx) => {
                let d_sub = DMatrix::from_fn(k, k, |i, j| dm[(idx[i], idx[j])].re);
                let d = v.transpose() * d_sub * v;
                let mut r = DMatrix::<f64>::zeros(k, k);
                for m in 0..k {
                    for l in 0..k {
                        if l != m {
                            if let Some(inv) = guard(l, m, d[(l, m)].abs())? {
                                r[(l, m)] = d[(l, m)] * inv;
                            }
                        }
                    }
                }
                let x = v * r * v.transpose();
                for j in 0..k {
                    for i in 0..k {
                        // i·X with X antisymmetric is Hermitian.
                        out[(idx[i], idx[j])] = C64::new(0.0, 0.5 * (x[(i, j)] - x[(j, i)]));
                    }
                }
            }
            vectors => {
                let v = match vectors {
                    BlockVectors::Real(v) => v.map(|x| C64::new(x, 0.0)),
                    BlockVectors::Complex(v) => v.clone(),
                };
                let d_sub = ComplexMatrix::from_fn(k, k, |i, j| dm[(idx[i], idx[j])]);
                let d = v.adjoint() * d_sub * &v;
                let mut mm = ComplexMatrix::zeros(k, k);
                for m in 0..k {
                    for l in 0..k {
                        if l != m {
                            if let Some(inv) = guard(l, m, d[(l, m)].norm())? {
                                mm[(l, m)] = I * d[(l, m)] * inv;
                            }
                        }
                    }
                }
                let x = &v * mm * v.adjoint();
                for j in 0..k {
                    for i in 0..k {
                        out[(idx[i], idx[j])] = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
                    }
                }
            }
        }
    }
    HermitianOperator::hermitize(out)
}

fn dm_is_real_on(dm: &ComplexMatrix, idx: &[usize]) -> bool {
    idx.iter().all(|&i| idx.iter().all(|&j| dm[(i, j)].im == 0.0))
}

/// `⟨l|Ḣ|n⟩` for all `l`, in the frame's eigenbasis.
fn coupling_column(frame: &SpectralFrame, dh0: &HermitianOperator, n: usize) -> DVector<C64> {
    let vn = frame.eigenvectors.column(n);
    let hv = dh0.matrix() * vn;
    frame.eigenvectors.adjoint() * hv
}

fn check_level(frame: &SpectralFrame, n: usize) -> Result<()> {
    if n >= frame.dim() {
        return Err(argument("level index out of range"));
    }
    let b = frame.block_of(n);
    if b.len() > 1 {
        let spread = frame.eigenvalues[b.end - 1] - frame.eigenvalues[b.start];
        return Err(Error::Degenerate { first: b.start, last: b.end - 1, spread });
    }
    Ok(())
}

/// Driver that only transports level `n`:
/// `H1^(n) = (1 - |n⟩⟨n|) i |ṅ⟩⟨n| + h.c.`.
pub fn cd_term_for_state(h0: &HermitianOperator, dh0: &HermitianOperator, n: usize) -> Result<HermitianOperator> {
    same_dim(h0.dim(), dh0.dim())?;
    let frame = eigh_sorted(h0)?;
    cd_term_for_state_in_frame(&frame, dh0, n)
}

/// As `cd_term_for_state`, for an already diagonalized `H0`.
pub fn cd_term_for_state_in_frame(
    frame: &SpectralFrame,
    dh0: &HermitianOperator,
    n: usize,
) -> Result<HermitianOperator> {
    same_dim(frame.dim(), dh0.dim())?;
    check_level(frame, n)?;
    let floor = GAP_FLOOR_RTOL * frame.energy_scale();
    let ctol = coupling_tolerance(dh0);
    let d = coupling_column(frame, dh0, n);
    let mut c = DVector::<C64>::zeros(frame.dim());
    for l in 0..frame.dim() {
        if l == n {
            continue;
        }
        let gap = frame.eigenvalues[n] - frame.eigenvalues[l];
        if gap.abs() <= floor {
            if d[l].norm() > ctol {
                return Err(Error::Divergence { l, m: n, gap: gap.abs(), coupling: d[l].norm() });
            }
            continue;
        }
        c[l] = I * d[l] / gap;
    }
    let w = &frame.eigenvectors * c;
    let vn = frame.eigenvectors.column(n);
    let op = &w * vn.adjoint() + vn * w.adjoint();
    HermitianOperator::hermitize(op)
}

/// `max_{m≠n} |⟨m|Ḣ|n⟩| / (E_m - E_n)^2`; `+inf` when a coupled level is
/// degenerate with `n`.
pub fn adiabaticity_metric(h0: &HermitianOperator, dh0: &HermitianOperator, n: usize) -> Result<f64> {
    same_dim(h0.dim(), dh0.dim())?;
    let frame = eigh_sorted(h0)?;
    adiabaticity_metric_in_frame(&frame, dh0, n)
}

pub fn adiabaticity_metric_in_frame(frame: &SpectralFrame, dh0: &HermitianOperator, n: usize) -> Result<f64> {
    if n >= frame.dim() {
        return Err(argument("level index out of range"));
    }
    let floor = GAP_FLOOR_RTOL * frame.energy_scale();
    let ctol = coupling_tolerance(dh0);
    let d = coupling_column(frame, dh0, n);
    let mut worst = 0.0f64;
    for m in 0..frame.dim() {
        if m == n {
            continue;
        }
        let gap = frame.eigenvalues[m] - frame.eigenvalues[n];
        let coupling = d[m].norm();
        if gap.abs() <= floor {
            if coupling > ctol {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        worst = worst.max(coupling / (gap * gap));
    }
    Ok(worst)
}

/// Frobenius norm of `[H0, dH0/dt]`; zero exactly on fixed-point protocols.
pub fn fixed_point_residual(h0: &HermitianOperator, dh0: &HermitianOperator) -> Result<f64> {
    Ok(commutator(h0, dh0)?.norm())
}

/// Smallest distance from `E_n` to any other level.
pub fn min_gap(frame: &SpectralFrame, n: usize) -> f64 {
    let en = frame.eigenvalues[n];
    frame
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != n)
        .map(|(_, e)| (e - en).abs())
        .fold(f64::INFINITY, f64::min)
}
