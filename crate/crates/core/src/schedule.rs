//! Protocols `(Jx(t), Jy(t), h(t))` with analytic first and second
//! derivatives.
//!
//! Profiles are written in the reduced time `u = t / duration`, so rescaling
//! the duration changes the sweep rate without changing the path.

use libm::{exp, sqrt};

use crate::error::{argument, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParamTriple {
    pub jx: f64,
    pub jy: f64,
    pub h: f64,
}

impl ParamTriple {
    pub const fn new(jx: f64, jy: f64, h: f64) -> Self {
        Self { jx, jy, h }
    }

    pub fn is_finite(&self) -> bool {
        self.jx.is_finite() && self.jy.is_finite() && self.h.is_finite()
    }

    fn scaled(self, s: f64) -> Self {
        Self::new(self.jx * s, self.jy * s, self.h * s)
    }
}

/// Value, first and second time derivative of the couplings at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScheduleSample {
    pub value: ParamTriple,
    pub rate: ParamTriple,
    pub accel: ParamTriple,
}

/// A scalar function of reduced time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `start + slope·u`
    Linear { start: f64, slope: f64 },
    /// `a + b·exp(-u²/2)`
    Gaussian { a: f64, b: f64 },
    /// `a + b·exp(u⁴)`
    QuarticExp { a: f64, b: f64 },
}

impl Profile {
    /// `(f, f', f'')` in reduced time.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Constant(c) => (c, 0.0, 0.0),
            Profile::Linear { start, slope } => (start + slope * u, slope, 0.0),
            Profile::Gaussian { a, b } => {
                let g = exp(-0.5 * u * u);
                (a + b * g, -b * u * g, b * (u * u - 1.0) * g)
            }
            Profile::QuarticExp { a, b } => {
                let g = exp(u * u * u * u);
                let d = 4.0 * u * u * u;
                (a + b * g, b * d * g, b * (12.0 * u * u + d * d) * g)
            }
        }
    }
}

/// How `h(t)` is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldRule {
    Profile(Profile),
    /// `h = jx·Jx + jy·Jy + offset`
    Combination { jx: f64, jy: f64, offset: f64 },
    /// `h = √(Jx·Jy)`
    GeometricMean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonKind {
    Gaussian,
    QuarticExp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub duration: f64,
    pub jx: Profile,
    pub jy: Profile,
    pub h: FieldRule,
}

pub const PAPER_JX: Profile = Profile::Linear { start: 10.0, slope: -5.0 };
pub const PAPER_JY: Profile = Profile::Linear { start: 0.0, slope: 5.0 };

impl Schedule {
    pub fn new(duration: f64, jx: Profile, jy: Profile, h: FieldRule) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(argument("schedule duration must be positive and finite"));
        }
        Ok(Self { duration, jx, jy, h })
    }

    /// Same path traversed over `duration·factor`.
    pub fn time_scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.duration * factor, self.jx, self.jy, self.h)
    }

    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        Self::new(duration, self.jx, self.jy, self.h)
    }

    pub fn sample(&self, t: f64) -> ScheduleSample {
        let u = t / self.duration;
        let (x, dx, ddx) = self.jx.eval(u);
        let (y, dy, ddy) = self.jy.eval(u);
        let (h, dh, ddh) = match self.h {
            FieldRule::Profile(p) => p.eval(u),
            FieldRule::Combination { jx, jy, offset } => {
                (jx * x + jy * y + offset, jx * dx + jy * dy, jx * ddx + jy * ddy)
            }
            FieldRule::GeometricMean => {
                let p = (x * y).max(0.0);
                let dp = dx * y + x * dy;
                let ddp = ddx * y + 2.0 * dx * dy + x * ddy;
                let h = sqrt(p);
                if h == 0.0 {
                    let inf = if dp == 0.0 { 0.0 } else { f64::INFINITY.copysign(dp) };
                    (0.0, inf, -f64::INFINITY)
                } else {
                    let dh = 0.5 * dp / h;
                    (h, dh, (0.5 * ddp - dh * dh) / h)
                }
            }
        };
        let inv = 1.0 / self.duration;
        ScheduleSample {
            value: ParamTriple::new(x, y, h),
            rate: ParamTriple::new(dx, dy, dh).scaled(inv),
            accel: ParamTriple::new(ddx, ddy, ddh).scaled(inv * inv),
        }
    }

    pub fn value(&self, t: f64) -> ParamTriple {
        self.sample(t).value
    }

    pub fn derivative(&self, t: f64) -> ParamTriple {
        self.sample(t).rate
    }

    pub fn second_derivative(&self, t: f64) -> ParamTriple {
        self.sample(t).accel
    }
}

/// `Jx = 10 - 5t`, `Jy = 5t` over unit duration with `h = 0`.
pub fn linear_paper_schedule() -> Schedule {
    Schedule { duration: 1.0, jx: PAPER_JX, jy: PAPER_JY, h: FieldRule::Profile(Profile::Constant(0.0)) }
}

/// Symmetric-phase LMG fixed point `h = (Jx - c·Jy)/(1 - c)` on the linear
/// couplings.
pub fn lmg_fp_symmetric(c: f64) -> Result<Schedule> {
    if !(0.0..1.0).contains(&c) {
        return Err(argument("symmetric fixed point needs 0 <= c < 1"));
    }
    let s = 1.0 / (1.0 - c);
    Ok(Schedule { h: FieldRule::Combination { jx: s, jy: -c * s, offset: 0.0 }, ..linear_paper_schedule() })
}

/// Broken-phase LMG fixed point `h = √(Jx·Jy)` on the linear couplings.
/// The field derivative is `+inf` at `t = 0`.
pub fn lmg_fp_broken() -> Schedule {
    Schedule { h: FieldRule::GeometricMean, ..linear_paper_schedule() }
}

/// Comparison field `a + b·g(t)` on the linear couplings, with `(a, b)`
/// fixed by `h(0) = h_start`, `h(1) = h_end`.
pub fn matched_comparison_schedule(kind: ComparisonKind, h_start: f64, h_end: f64) -> Result<Schedule> {
    let g = |u: f64| match kind {
        ComparisonKind::Gaussian => exp(-0.5 * u * u),
        ComparisonKind::QuarticExp => exp(u * u * u * u),
    };
    let (g0, g1) = (g(0.0), g(1.0));
    let det = g1 - g0;
    if det.abs() < 1e-14 || !h_start.is_finite() || !h_end.is_finite() {
        return Err(argument("singular endpoint system for comparison schedule"));
    }
    let b = (h_end - h_start) / det;
    let a = h_start - b * g0;
    let profile = match kind {
        ComparisonKind::Gaussian => Profile::Gaussian { a, b },
        ComparisonKind::QuarticExp => Profile::QuarticExp { a, b },
    };
    Ok(Schedule { h: FieldRule::Profile(profile), ..linear_paper_schedule() })
}

/// Fixed-point protocol families over arbitrary `Jx(t)`, `Jy(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedPointFamily {
    /// `h = c(Jx - Jy)`
    TwoSpin { c: f64 },
    /// `h = Jx + Jy + c(Jx - Jy)`
    XyChain { c: f64 },
    /// `h = (A + B)/2·Jx + (A - B)/2·Jy`
    LmgFpa { a: f64, b: f64 },
}

pub fn fp_family_generic(family: FixedPointFamily, jx: Profile, jy: Profile, duration: f64) -> Result<Schedule> {
    let rule = match family {
        FixedPointFamily::TwoSpin { c } if c.is_finite() => FieldRule::Combination { jx: c, jy: -c, offset: 0.0 },
        FixedPointFamily::XyChain { c } if c.is_finite() => {
            FieldRule::Combination { jx: 1.0 + c, jy: 1.0 - c, offset: 0.0 }
        }
        FixedPointFamily::LmgFpa { a, b } if a.is_finite() && b.is_finite() => {
            FieldRule::Combination { jx: 0.5 * (a + b), jy: 0.5 * (a - b), offset: 0.0 }
        }
        _ => return Err(argument("fixed-point constants must be finite")),
    };
    Schedule::new(duration, jx, jy, rule)
}

/// Constants `(A, B)` of the LMG family that reproduce `h = (Jx - cJy)/(1 - c)`.
pub fn lmg_fpa_constants(c: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&c) {
        return Err(argument("symmetric fixed point needs 0 <= c < 1"));
    }
    Ok((1.0, (1.0 + c) / (1.0 - c)))
}
