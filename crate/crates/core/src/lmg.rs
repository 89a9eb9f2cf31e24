//! Lipkin-Meshkov-Glick model
//! `H0 = -(2Jx/N) Sx² - (2Jy/N) Sy² - 2h Sz` in the `S = N/2` sector.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{acos, atanh, cos, sin, sqrt};

use crate::error::{argument, Error, Result};
use crate::operator::{
    collective_spin, eigh_sorted, Axis, ComplexMatrix, HermitianOperator, C64, I,
};
use crate::schedule::ScheduleSample;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LmgParams {
    pub n: usize,
    pub jx: f64,
    pub jy: f64,
    pub h: f64,
    pub djx: f64,
    pub djy: f64,
    pub dh: f64,
}

impl LmgParams {
    pub fn new(n: usize, jx: f64, jy: f64, h: f64, djx: f64, djy: f64, dh: f64) -> Self {
        Self { n, jx, jy, h, djx, djy, dh }
    }

    pub fn from_sample(n: usize, s: &ScheduleSample) -> Self {
        Self::new(n, s.value.jx, s.value.jy, s.value.h, s.rate.jx, s.rate.jy, s.rate.h)
    }

    pub fn is_symmetric_phase(&self) -> bool {
        self.h >= self.jx.max(self.jy)
    }
}

/// `Sx²`, `Sy²`, `Sz` and `SxSy + SySx` of one sector, built once and
/// recombined for every parameter set.
#[derive(Clone, Debug)]
pub struct LmgOperators {
    n: usize,
    sx2: HermitianOperator,
    sy2: HermitianOperator,
    sz: HermitianOperator,
    sxy: HermitianOperator,
}

impl LmgOperators {
    pub fn new(n: usize) -> Result<Self> {
        let sx = collective_spin(Axis::X, n)?;
        let sy = collective_spin(Axis::Y, n)?;
        let sz = collective_spin(Axis::Z, n)?;
        let sx2 = HermitianOperator::hermitize(sx.product(&sx)?)?;
        let sy2 = HermitianOperator::hermitize(sy.product(&sy)?)?;
        let sxy = sx.symmetrized_product(&sy)?.scaled(2.0);
        Ok(Self { n, sx2, sy2, sz, sxy })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    fn combine(&self, jx: f64, jy: f64, h: f64) -> HermitianOperator {
        let nf = self.n as f64;
        let mut out = self.sx2.scaled(-2.0 * jx / nf);
        out.add_scaled(-2.0 * jy / nf, &self.sy2).expect("same sector");
        out.add_scaled(-2.0 * h, &self.sz).expect("same sector");
        out
    }

    pub fn hamiltonian(&self, p: &LmgParams) -> HermitianOperator {
        self.combine(p.jx, p.jy, p.h)
    }

    pub fn rate(&self, p: &LmgParams) -> HermitianOperator {
        self.combine(p.djx, p.djy, p.dh)
    }

    /// `SxSy + SySx`.
    pub fn sxy(&self) -> &HermitianOperator {
        &self.sxy
    }

    /// `(h1/(2N)) (SxSy + SySx)`; symmetric phase only.
    pub fn collective_driver(&self, p: &LmgParams) -> Result<HermitianOperator> {
        if !p.is_symmetric_phase() {
            return Err(Error::Unsupported("collective driver is defined in the symmetric phase"));
        }
        let h1 = lmg_h1_coupling(p)?;
        Ok(self.sxy.scaled(h1 / (2.0 * self.n as f64)))
    }
}

fn check_n(p: &LmgParams) -> Result<()> {
    if p.n == 0 {
        return Err(argument("LMG needs N >= 1"));
    }
    Ok(())
}

pub fn lmg_hamiltonian(p: &LmgParams) -> Result<HermitianOperator> {
    check_n(p)?;
    Ok(LmgOperators::new(p.n)?.hamiltonian(p))
}

pub fn lmg_rate(p: &LmgParams) -> Result<HermitianOperator> {
    check_n(p)?;
    Ok(LmgOperators::new(p.n)?.rate(p))
}

/// Collective counterdiabatic operator `(h1/(2N)) (SxSy + SySx)`.
pub fn lmg_collective_driver(p: &LmgParams) -> Result<HermitianOperator> {
    check_n(p)?;
    LmgOperators::new(p.n)?.collective_driver(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalAngles {
    pub theta: f64,
    pub phi: f64,
}

/// Energy of the spin coherent state pointing along `(θ, φ)`, leading order
/// in `N`.
pub fn lmg_classical_energy(p: &LmgParams, theta: f64, phi: f64) -> f64 {
    let nf = p.n as f64;
    let (st, ct) = (sin(theta), cos(theta));
    let (sp, cp) = (sin(phi), cos(phi));
    -0.5 * nf * st * st * (p.jx * cp * cp + p.jy * sp * sp) - nf * p.h * ct
}

/// Minimum of the classical energy. Ties `h = max(Jx, Jy)` resolve to
/// `θ = 0`; `Jx = Jy > h` resolves to `φ = 0`.
pub fn lmg_semiclassical_angles(p: &LmgParams) -> SemiclassicalAngles {
    if p.is_symmetric_phase() {
        SemiclassicalAngles { theta: 0.0, phi: 0.0 }
    } else if p.jx >= p.jy {
        SemiclassicalAngles { theta: acos(p.h / p.jx), phi: 0.0 }
    } else {
        SemiclassicalAngles { theta: acos(p.h / p.jy), phi: FRAC_PI_2 }
    }
}

/// `-N h` in the symmetric phase, `-N (J² + h²)/(2J)` with `J = max(Jx, Jy)`
/// in the broken phase.
pub fn lmg_semiclassical_energy(p: &LmgParams) -> f64 {
    let nf = p.n as f64;
    if p.is_symmetric_phase() {
        -nf * p.h
    } else {
        let j = p.jx.max(p.jy);
        -nf * (j * j + p.h * p.h) / (2.0 * j)
    }
}

/// Bogoliubov angle `Θ = atanh((Jx - Jy)/(2h - Jx - Jy))` and gap
/// `Ω = 2√((h - Jx)(h - Jy))`. `Θ` is infinite on the transition line.
pub fn lmg_bogoliubov(p: &LmgParams) -> Result<(f64, f64)> {
    if !p.is_symmetric_phase() {
        return Err(Error::Unsupported("broken phase: apply lmg_broken_phase_replacements first"));
    }
    let den = 2.0 * p.h - p.jx - p.jy;
    if den == 0.0 {
        return Err(Error::Singular { what: "Bogoliubov angle undefined at Jx = Jy = h" });
    }
    let theta = atanh((p.jx - p.jy) / den);
    let omega = 2.0 * sqrt(((p.h - p.jx) * (p.h - p.jy)).max(0.0));
    Ok((theta, omega))
}

/// `h1 = [(h - Jx)(ḣ - J̇y) - (h - Jy)(ḣ - J̇x)] / (2(h - Jx)(h - Jy))`,
/// evaluated on the given couplings as they stand.
pub fn lmg_h1_coupling(p: &LmgParams) -> Result<f64> {
    let (a, b) = (p.h - p.jx, p.h - p.jy);
    let num = a * (p.dh - p.djy) - b * (p.dh - p.djx);
    let den = 2.0 * a * b;
    let scale = p.jx.abs().max(p.jy.abs()).max(p.h.abs()).max(1.0);
    if den.abs() <= 1e-16 * scale * scale {
        return Err(Error::Divergence { l: 0, m: 1, gap: 2.0 * sqrt((a * b).abs()), coupling: num.abs() });
    }
    Ok(num / den)
}

/// `h1` in whichever phase `p` lies: broken-phase input goes through
/// `lmg_broken_phase_replacements` first.
pub fn lmg_h1_coupling_any_phase(p: &LmgParams) -> Result<f64> {
    if p.is_symmetric_phase() {
        lmg_h1_coupling(p)
    } else {
        lmg_h1_coupling(&lmg_broken_phase_replacements(p)?)
    }
}

/// Broken-phase replacements `J̃x = h²/Jx`, `h̃ = √(Jx² - h²) + h²/Jx`
/// (with rates by the chain rule); `Jy` is unchanged. For `Jy > Jx` the
/// axes are relabelled first, so the result is in the frame where the
/// ordered axis is x.
pub fn lmg_broken_phase_replacements(p: &LmgParams) -> Result<LmgParams> {
    if p.is_symmetric_phase() {
        return Err(argument("replacements apply to the broken phase h < max(Jx, Jy)"));
    }
    let q = if p.jx >= p.jy { *p } else { LmgParams::new(p.n, p.jy, p.jx, p.h, p.djy, p.djx, p.dh) };
    let (j, dj, h, dh) = (q.jx, q.djx, q.h, q.dh);
    let jt = h * h / j;
    let djt = 2.0 * h * dh / j - h * h * dj / (j * j);
    let r = sqrt(j * j - h * h);
    let ht = r + jt;
    let dht = (j * dj - h * dh) / r + djt;
    Ok(LmgParams::new(q.n, jt, q.jy, ht, djt, q.djy, dht))
}

/// `Ẽ0 = -N (J² + h²)/(2J)`, `J = max(Jx, Jy)`.
pub fn lmg_broken_phase_energy(p: &LmgParams) -> Result<f64> {
    if p.is_symmetric_phase() {
        return Err(argument("broken-phase energy needs h < max(Jx, Jy)"));
    }
    Ok(lmg_semiclassical_energy(p))
}

/// `X̂ = (4/N²)(i(SxSy + SySx)Sz + Sx² - Sy²)` and `Ŷ = (2i/N)(SxSy + SySx)`.
/// Both are anti-Hermitian, so they are returned as plain matrices.
pub fn lmg_xy_hat_operators(n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if n == 0 {
        return Err(argument("LMG needs N >= 1"));
    }
    let ops = LmgOperators::new(n)?;
    let nf = n as f64;
    let sxy = ops.sxy.matrix();
    let x = (sxy * ops.sz.matrix() * I + ops.sx2.matrix() - ops.sy2.matrix()) * C64::new(4.0 / (nf * nf), 0.0);
    let y = sxy * C64::new(0.0, 2.0 / nf);
    Ok((x, y))
}

/// `exp(-iθ S·n0)` with `n0 = (-sin φ, cos φ, 0)`: rotates `ẑ` onto the
/// semiclassical direction `(θ, φ)`.
pub fn lmg_spin_rotation(n: usize, theta: f64, phi: f64) -> Result<ComplexMatrix> {
    let sx = collective_spin(Axis::X, n)?;
    let sy = collective_spin(Axis::Y, n)?;
    let mut g = sx.scaled(-sin(phi));
    g.add_scaled(cos(phi), &sy)?;
    let f = eigh_sorted(&g)?;
    let d: Vec<C64> = f.eigenvalues.iter().map(|e| C64::from_polar(1.0, -theta * e)).collect();
    let phases = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
    Ok(&f.eigenvectors * phases * f.eigenvectors.adjoint())
}

/// Quadratic Holstein-Primakoff expansion in a Fock space of `cutoff`
/// levels, up to the constant `-Nh - (Jx + Jy)/2`:
/// `(2h - Jx - Jy) b†b - ((Jx - Jy)/2)(b² + b†²)`.
pub fn lmg_boson_hamiltonian(p: &LmgParams, cutoff: usize) -> Result<HermitianOperator> {
    boson_quadratic(p.jx, p.jy, p.h, cutoff)
}

pub fn lmg_boson_rate(p: &LmgParams, cutoff: usize) -> Result<HermitianOperator> {
    boson_quadratic(p.djx, p.djy, p.dh, cutoff)
}

fn boson_quadratic(jx: f64, jy: f64, h: f64, cutoff: usize) -> Result<HermitianOperator> {
    if cutoff < 3 {
        return Err(argument("boson cutoff must be at least 3"));
    }
    let mut m = ComplexMatrix::zeros(cutoff, cutoff);
    let a = 2.0 * h - jx - jy;
    let b = -0.5 * (jx - jy);
    for k in 0..cutoff {
        m[(k, k)] = C64::new(a * k as f64, 0.0);
        if k + 2 < cutoff {
            // ⟨k|b²|k+2⟩ = √((k+1)(k+2))
            let v = C64::new(b * sqrt(((k + 1) * (k + 2)) as f64), 0.0);
            m[(k, k + 2)] = v;
            m[(k + 2, k)] = v;
        }
    }
    HermitianOperator::new(m)
}

/// Squeezing driver `-i(h1/4)(b² - b†²)` in the same Fock space.
pub fn lmg_boson_driver(p: &LmgParams, cutoff: usize) -> Result<HermitianOperator> {
    if cutoff < 3 {
        return Err(argument("boson cutoff must be at least 3"));
    }
    let h1 = lmg_h1_coupling(p)?;
    let mut m = ComplexMatrix::zeros(cutoff, cutoff);
    for k in 0..cutoff.saturating_sub(2) {
        let v = sqrt(((k + 1) * (k + 2)) as f64) * 0.25 * h1;
        m[(k, k + 2)] = C64::new(0.0, -v);
        m[(k + 2, k)] = C64::new(0.0, v);
    }
    HermitianOperator::new(m)
}
