//! Closed-form two-level and two-spin models.

use libm::{atan, cos, sin, sqrt};

use crate::error::{argument, Error, Result};
use crate::operator::{pauli, pauli_string, Axis, HermitianOperator};
use crate::schedule::ScheduleSample;

/// A magnetic field `h` coupling as `h·σ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldVector3 {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl FieldVector3 {
    pub const fn new(hx: f64, hy: f64, hz: f64) -> Self {
        Self { hx, hy, hz }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.hx * o.hx + self.hy * o.hy + self.hz * o.hz
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.hy * o.hz - self.hz * o.hy,
            self.hz * o.hx - self.hx * o.hz,
            self.hx * o.hy - self.hy * o.hx,
        )
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.dot(self))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.hx * s, self.hy * s, self.hz * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.hx + o.hx, self.hy + o.hy, self.hz + o.hz)
    }

    pub fn is_finite(&self) -> bool {
        self.hx.is_finite() && self.hy.is_finite() && self.hz.is_finite()
    }
}

/// `h·σ`.
pub fn tls_hamiltonian(f: FieldVector3) -> HermitianOperator {
    let mut h = pauli(Axis::X).scaled(f.hx);
    h = &h + &pauli(Axis::Y).scaled(f.hy);
    &h + &pauli(Axis::Z).scaled(f.hz)
}

/// Counterdiabatic field `(h × ḣ) / (2|h|²)`.
pub fn tls_cd_field(f: FieldVector3, df: FieldVector3) -> Result<FieldVector3> {
    let n2 = f.dot(&f);
    if n2 == 0.0 {
        return Err(Error::Singular { what: "two-level field vanishes" });
    }
    Ok(f.cross(&df).scaled(0.5 / n2))
}

/// Returns the static total field `(0, 0, ω/2)` when `2(h0² + h3²) = ω·h3`
/// holds to 1e-9 relative.
pub fn tls_static_driver_check(h0: f64, h3: f64, omega: f64) -> Option<FieldVector3> {
    let lhs = 2.0 * (h0 * h0 + h3 * h3);
    let rhs = omega * h3;
    let scale = lhs.abs().max(rhs.abs());
    ((lhs - rhs).abs() <= 1e-9 * scale).then(|| FieldVector3::new(0.0, 0.0, 0.5 * omega))
}

/// Field `(h0 cos ωt, h0 sin ωt, h3)` precessing about z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatingField {
    pub h0: f64,
    pub h3: f64,
    pub omega: f64,
}

impl OscillatingField {
    pub fn new(h0: f64, h3: f64, omega: f64) -> Result<Self> {
        if !(h0.is_finite() && h3.is_finite() && omega.is_finite()) {
            return Err(Error::NonFinite);
        }
        if h0 == 0.0 && h3 == 0.0 {
            return Err(argument("oscillating field needs h0 or h3 nonzero"));
        }
        Ok(Self { h0, h3, omega })
    }

    /// The member of the family whose driven field is static:
    /// `ω = 2(h0² + h3²)/h3`.
    pub fn static_driver(h0: f64, h3: f64) -> Result<Self> {
        if h3 == 0.0 {
            return Err(argument("static driver needs h3 != 0"));
        }
        Self::new(h0, h3, 2.0 * (h0 * h0 + h3 * h3) / h3)
    }

    pub fn field(&self, t: f64) -> FieldVector3 {
        let a = self.omega * t;
        FieldVector3::new(self.h0 * cos(a), self.h0 * sin(a), self.h3)
    }

    pub fn rate(&self, t: f64) -> FieldVector3 {
        let a = self.omega * t;
        FieldVector3::new(-self.h0 * self.omega * sin(a), self.h0 * self.omega * cos(a), 0.0)
    }

    pub fn cd_field(&self, t: f64) -> FieldVector3 {
        let f = self.field(t);
        f.cross(&self.rate(t)).scaled(0.5 / f.dot(&f))
    }

    /// Field of `H0 + H1`.
    pub fn total_field(&self, t: f64) -> FieldVector3 {
        self.field(t).add(&self.cd_field(t))
    }

    /// `(h̃0, h̃3)`: the driven field is `(h̃0 cos ωt, h̃0 sin ωt, h̃3)`.
    pub fn tilde_components(&self) -> (f64, f64) {
        let n2 = self.h0 * self.h0 + self.h3 * self.h3;
        (
            self.h0 * (1.0 - self.omega * self.h3 / (2.0 * n2)),
            self.h3 + self.omega * self.h0 * self.h0 / (2.0 * n2),
        )
    }
}

/// Couplings of `Jx σxσx + Jy σyσy + h(σz + σz)` and their rates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoSpinParams {
    pub jx: f64,
    pub jy: f64,
    pub h: f64,
    pub djx: f64,
    pub djy: f64,
    pub dh: f64,
}

impl TwoSpinParams {
    pub const fn new(jx: f64, jy: f64, h: f64, djx: f64, djy: f64, dh: f64) -> Self {
        Self { jx, jy, h, djx, djy, dh }
    }

    pub fn from_sample(s: &ScheduleSample) -> Self {
        Self::new(s.value.jx, s.value.jy, s.value.h, s.rate.jx, s.rate.jy, s.rate.h)
    }
}

/// Paper ordering `|++⟩, |--⟩, |+-⟩, |-+⟩` as indices of the computational
/// basis `|++⟩, |+-⟩, |-+⟩, |--⟩`.
pub const TWO_SPIN_BLOCK_ORDER: [usize; 4] = [0, 3, 1, 2];

fn xx_yy_zz(jx: f64, jy: f64, h: f64) -> Result<HermitianOperator> {
    let mut out = pauli_string(&[(0, Axis::X), (1, Axis::X)], 2)?.scaled(jx);
    out.add_scaled(jy, &pauli_string(&[(0, Axis::Y), (1, Axis::Y)], 2)?)?;
    out.add_scaled(h, &pauli_string(&[(0, Axis::Z)], 2)?)?;
    out.add_scaled(h, &pauli_string(&[(1, Axis::Z)], 2)?)?;
    Ok(out)
}

/// The two-spin XY Hamiltonian in the computational basis.
pub fn two_spin_hamiltonian(p: &TwoSpinParams) -> HermitianOperator {
    xx_yy_zz(p.jx, p.jy, p.h).expect("two sites fit")
}

/// `dH0/dt` of the two-spin model.
pub fn two_spin_rate(p: &TwoSpinParams) -> HermitianOperator {
    xx_yy_zz(p.djx, p.djy, p.dh).expect("two sites fit")
}

/// `σ1xσ2y + σ1yσ2x`.
pub fn xy_plus_yx(n_sites: usize, a: usize, b: usize) -> Result<HermitianOperator> {
    let mut out = pauli_string(&[(a, Axis::X), (b, Axis::Y)], n_sites)?;
    out.add_scaled(1.0, &pauli_string(&[(a, Axis::Y), (b, Axis::X)], n_sites)?)?;
    Ok(out)
}

/// Coefficient `½[h(J̇x - J̇y) - ḣ(Jx - Jy)] / (4h² + (Jx - Jy)²)` of
/// `σ1xσ2y + σ1yσ2x` in the two-spin driver.
pub fn two_spin_cd_coefficient(p: &TwoSpinParams) -> Result<f64> {
    let d = p.jx - p.jy;
    let den = 4.0 * p.h * p.h + d * d;
    if den == 0.0 {
        return Err(Error::Singular { what: "two-spin gap closes (h = 0 and Jx = Jy)" });
    }
    Ok(0.5 * (p.h * (p.djx - p.djy) - p.dh * d) / den)
}

pub fn two_spin_cd_term(p: &TwoSpinParams) -> Result<HermitianOperator> {
    let k = two_spin_cd_coefficient(p)?;
    Ok(xy_plus_yx(2, 0, 1)?.scaled(k))
}

/// Principal-branch frame angle `θ ∈ (-π/4, π/4)` solving
/// `tan 2θ = [ḣ(Jx - Jy) - h(J̇x - J̇y)] / ((Jx - Jy)(4h² + (Jx - Jy)²))`.
pub fn two_spin_frame_angle(p: &TwoSpinParams) -> Result<f64> {
    let (n, m) = frame_ratio_parts(p)?;
    Ok(0.5 * atan(n / m))
}

fn frame_ratio_parts(p: &TwoSpinParams) -> Result<(f64, f64)> {
    let d = p.jx - p.jy;
    let m = d * (4.0 * p.h * p.h + d * d);
    if m == 0.0 {
        return Err(Error::Singular { what: "frame angle undefined for Jx = Jy" });
    }
    Ok((p.dh * d - p.h * (p.djx - p.djy), m))
}

/// `dθ/dt` of the principal-branch frame angle; needs the second derivatives
/// `(J̈x, J̈y, ḧ)`.
pub fn two_spin_frame_angle_rate(p: &TwoSpinParams, ddjx: f64, ddjy: f64, ddh: f64) -> Result<f64> {
    let (n, m) = frame_ratio_parts(p)?;
    let d = p.jx - p.jy;
    let dd = p.djx - p.djy;
    let ddd = ddjx - ddjy;
    let dn = ddh * d - p.h * ddd;
    let dm = 8.0 * p.h * p.dh * d + 4.0 * p.h * p.h * dd + 3.0 * d * d * dd;
    let r = n / m;
    let dr = (dn * m - n * dm) / (m * m);
    Ok(0.5 * dr / (1.0 + r * r))
}

/// Couplings of the Hamiltonian that evolves `U(t)|ψ(t)⟩` with
/// `U = exp(-iθ(σ1z + σ2z)/2)`: `J̃x + J̃y = Jx + Jy`,
/// `(J̃x - J̃y) cos 2θ = Jx - Jy`, `h̃ = h + θ̇/2`. Rate fields of the result
/// are zero.
pub fn two_spin_rotating_frame(p: &TwoSpinParams, theta: f64, dtheta: f64) -> Result<TwoSpinParams> {
    let c2 = cos(2.0 * theta);
    if c2.abs() < 1e-12 {
        return Err(Error::Singular { what: "rotating frame with cos 2θ = 0" });
    }
    let s = p.jx + p.jy;
    let d = (p.jx - p.jy) / c2;
    Ok(TwoSpinParams::new(0.5 * (s + d), 0.5 * (s - d), p.h + 0.5 * dtheta, 0.0, 0.0, 0.0))
}

/// `exp(-iθ(σ1z + σ2z)/2)` as a diagonal matrix in the computational basis.
pub fn two_spin_frame_unitary(theta: f64) -> crate::operator::ComplexMatrix {
    use crate::operator::C64;
    // σ1z + σ2z eigenvalues 2, 0, 0, -2.
    let d = [2.0, 0.0, 0.0, -2.0].map(|m| C64::from_polar(1.0, -0.5 * theta * m));
    crate::operator::ComplexMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d))
}
