//! JSON experiment configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use tqd_core::analytic::OscillatingField;
use tqd_core::dynamics::{DivergencePolicy, DriverMode, Frame, IntegratorConfig, Method, Model, TraceConfig};
use tqd_core::schedule::{
    fp_family_generic, lmg_fp_broken, lmg_fp_symmetric, matched_comparison_schedule, ComparisonKind, FieldRule,
    FixedPointFamily, Profile, Schedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLevel,
    TwoSpin,
    XyChain,
    Lmg,
}

impl ModelKind {
    /// System size for models without a size parameter.
    fn fixed_size(self) -> Option<usize> {
        match self {
            ModelKind::TwoLevel => Some(1),
            ModelKind::TwoSpin => Some(2),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Bare,
    AnalyticCd,
    EngineCd,
    StateCd,
}

impl ModeName {
    pub fn mode(self) -> DriverMode {
        match self {
            ModeName::Bare => DriverMode::Bare,
            ModeName::AnalyticCd => DriverMode::AnalyticCd,
            ModeName::EngineCd => DriverMode::EngineCd,
            ModeName::StateCd => DriverMode::StateCd,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::Bare => "bare",
            ModeName::AnalyticCd => "analytic_cd",
            ModeName::EngineCd => "engine_cd",
            ModeName::StateCd => "state_cd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSpec {
    Constant(f64),
    Linear { start: f64, slope: f64 },
    Gaussian { a: f64, b: f64 },
    QuarticExp { a: f64, b: f64 },
}

impl ProfileSpec {
    fn profile(self) -> Profile {
        match self {
            ProfileSpec::Constant(v) => Profile::Constant(v),
            ProfileSpec::Linear { start, slope } => Profile::Linear { start, slope },
            ProfileSpec::Gaussian { a, b } => Profile::Gaussian { a, b },
            ProfileSpec::QuarticExp { a, b } => Profile::QuarticExp { a, b },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonName {
    Gaussian,
    QuarticExp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    TwoSpin { c: f64 },
    XyChain { c: f64 },
    LmgFpa { a: f64, b: f64 },
}

/// Named protocol. Coupling schedules run over `u = t/duration ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScheduleSpec {
    /// `Jx = 10 - 5u`, `Jy = 5u`, `h = (Jx - c·Jy)/(1 - c)`.
    LmgFpSymmetric { c: f64 },
    /// `Jx = 10 - 5u`, `Jy = 5u`, `h = √(Jx·Jy)`.
    LmgFpBroken,
    /// Same couplings with `h = a + b·g(u)`, endpoints matched.
    MatchedComparison { kind: ComparisonName, h_start: f64, h_end: f64 },
    FixedPoint { family: FamilySpec, jx: ProfileSpec, jy: ProfileSpec },
    Couplings { jx: ProfileSpec, jy: ProfileSpec, h: ProfileSpec },
    /// Two-level field `(h0 cos ωt, h0 sin ωt, h3)`.
    OscillatingField { h0: f64, h3: f64, omega: f64 },
    /// Oscillating field with `ω = 2(h0² + h3²)/h3`.
    StaticDriver { h0: f64, h3: f64 },
}

impl ScheduleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleSpec::LmgFpSymmetric { .. } => "lmg_fp_symmetric",
            ScheduleSpec::LmgFpBroken => "lmg_fp_broken",
            ScheduleSpec::MatchedComparison { .. } => "matched_comparison",
            ScheduleSpec::FixedPoint { .. } => "fixed_point",
            ScheduleSpec::Couplings { .. } => "couplings",
            ScheduleSpec::OscillatingField { .. } => "oscillating_field",
            ScheduleSpec::StaticDriver { .. } => "static_driver",
        }
    }

    fn is_field(&self) -> bool {
        matches!(self, ScheduleSpec::OscillatingField { .. } | ScheduleSpec::StaticDriver { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    /// Value of the `protocol` CSV column; defaults to the schedule name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Defaults to 1 for coupling schedules and one period for fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(flatten)]
    pub schedule: ScheduleSpec,
}

impl ProtocolSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.schedule.name().to_string())
    }

    pub fn duration(&self) -> anyhow::Result<f64> {
        let d = match (self.duration, &self.schedule) {
            (Some(d), _) => d,
            (None, ScheduleSpec::OscillatingField { omega, .. }) => 2.0 * std::f64::consts::PI / omega.abs(),
            (None, ScheduleSpec::StaticDriver { h0, h3 }) => {
                std::f64::consts::PI * h3.abs() / (h0 * h0 + h3 * h3)
            }
            (None, _) => 1.0,
        };
        if !(d > 0.0 && d.is_finite()) {
            bail!("protocol `{}`: duration must be positive and finite", self.label());
        }
        Ok(d)
    }

    fn couplings(&self) -> anyhow::Result<Schedule> {
        let d = self.duration()?;
        let s = match &self.schedule {
            ScheduleSpec::LmgFpSymmetric { c } => lmg_fp_symmetric(*c)?,
            ScheduleSpec::LmgFpBroken => lmg_fp_broken(),
            ScheduleSpec::MatchedComparison { kind, h_start, h_end } => {
                let kind = match kind {
                    ComparisonName::Gaussian => ComparisonKind::Gaussian,
                    ComparisonName::QuarticExp => ComparisonKind::QuarticExp,
                };
                matched_comparison_schedule(kind, *h_start, *h_end)?
            }
            ScheduleSpec::FixedPoint { family, jx, jy } => {
                let family = match *family {
                    FamilySpec::TwoSpin { c } => FixedPointFamily::TwoSpin { c },
                    FamilySpec::XyChain { c } => FixedPointFamily::XyChain { c },
                    FamilySpec::LmgFpa { a, b } => FixedPointFamily::LmgFpa { a, b },
                };
                return Ok(fp_family_generic(family, jx.profile(), jy.profile(), d)?);
            }
            ScheduleSpec::Couplings { jx, jy, h } => {
                return Ok(Schedule::new(d, jx.profile(), jy.profile(), FieldRule::Profile(h.profile()))?);
            }
            ScheduleSpec::OscillatingField { .. } | ScheduleSpec::StaticDriver { .. } => {
                bail!("protocol `{}` is a two-level field, not a coupling schedule", self.label())
            }
        };
        Ok(s.with_duration(d)?)
    }

    /// Model instance of size `n`.
    pub fn model(&self, kind: ModelKind, n: usize) -> anyhow::Result<Model> {
        Ok(match kind {
            ModelKind::TwoLevel => {
                let field = match self.schedule {
                    ScheduleSpec::OscillatingField { h0, h3, omega } => OscillatingField::new(h0, h3, omega)?,
                    ScheduleSpec::StaticDriver { h0, h3 } => OscillatingField::static_driver(h0, h3)?,
                    _ => bail!("two_level needs an oscillating_field or static_driver schedule"),
                };
                Model::TwoLevel { field, duration: self.duration()? }
            }
            ModelKind::TwoSpin => Model::TwoSpin { schedule: self.couplings()? },
            ModelKind::XyChain => Model::Xy { sites: n, schedule: self.couplings()? },
            ModelKind::Lmg => Model::Lmg { n, schedule: self.couplings()? },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameName {
    Lab,
    CoRotating,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Absolute step; defaults to `1e-4·duration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default)]
    pub renormalize_every: usize,
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default = "default_frame")]
    pub frame: FrameName,
}

fn default_method() -> MethodName {
    MethodName::Rk4
}

fn default_frame() -> FrameName {
    FrameName::CoRotating
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { step: None, renormalize_every: 0, method: MethodName::Rk4, frame: FrameName::CoRotating }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnDivergence {
    Fail,
    /// Drop the driver where it diverges and exit with status 2.
    Continue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub schedules: Vec<ProtocolSpec>,
    pub driver_mode: ModeName,
    /// Spin counts (XY sites, LMG spins). Optional for the fixed-size models.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default = "default_points")]
    pub output_points: usize,
    #[serde(default)]
    pub level: usize,
    #[serde(default = "default_on_divergence")]
    pub on_divergence: OnDivergence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_points() -> usize {
    200
}

fn default_on_divergence() -> OnDivergence {
    OnDivergence::Continue
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sizes to run: the configured list, or the fixed size of the model.
    pub fn run_sizes(&self) -> Vec<usize> {
        match self.model.fixed_size() {
            Some(n) if self.sizes.is_empty() => vec![n],
            _ => self.sizes.clone(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schedules.is_empty() {
            bail!("field `schedules`: at least one protocol is required");
        }
        let mut labels = BTreeSet::new();
        for p in &self.schedules {
            if !labels.insert(p.label()) {
                bail!("field `schedules`: duplicate protocol label `{}`", p.label());
            }
            let field = p.schedule.is_field();
            if field != (self.model == ModelKind::TwoLevel) {
                bail!("field `schedules`: `{}` cannot drive model {:?}", p.schedule.name(), self.model);
            }
            if matches!(p.schedule, ScheduleSpec::LmgFpSymmetric { .. } | ScheduleSpec::LmgFpBroken)
                && self.model != ModelKind::Lmg
            {
                bail!("field `schedules`: `{}` is an lmg protocol", p.schedule.name());
            }
            p.duration()?;
        }
        let sizes = self.run_sizes();
        if sizes.is_empty() {
            bail!("field `sizes`: must not be empty for model {:?}", self.model);
        }
        if sizes.windows(2).any(|w| w[1] == w[0]) || sizes.iter().collect::<BTreeSet<_>>().len() != sizes.len() {
            bail!("field `sizes`: duplicate sizes");
        }
        if sizes.windows(2).any(|w| w[1] < w[0]) {
            bail!("field `sizes`: must be ascending");
        }
        if let Some(n) = self.model.fixed_size() {
            if sizes != [n] {
                bail!("field `sizes`: model {:?} has fixed size {n}", self.model);
            }
        }
        for &n in &sizes {
            match self.model {
                ModelKind::XyChain if n < 2 || n % 2 == 1 || n > 14 => {
                    bail!("field `sizes`: xy_chain needs an even site count in 2..=14, got {n}")
                }
                ModelKind::Lmg if n == 0 => bail!("field `sizes`: lmg needs at least one spin"),
                _ => {}
            }
        }
        if self.output_points < 2 {
            bail!("field `output_points`: need at least 2");
        }
        if let Some(step) = self.integrator.step {
            if !(step > 0.0 && step.is_finite()) {
                bail!("field `integrator.step`: must be positive");
            }
        }
        Ok(())
    }

    pub fn trace_config(&self, duration: f64) -> TraceConfig {
        let mut cfg = TraceConfig::for_duration(duration);
        cfg.level = self.level;
        cfg.output_points = self.output_points;
        cfg.integrator = IntegratorConfig {
            step: self.integrator.step.unwrap_or(cfg.integrator.step),
            renormalize_every: self.integrator.renormalize_every,
            method: match self.integrator.method {
                MethodName::Rk4 => Method::Rk4,
            },
            frame: match self.integrator.frame {
                FrameName::Lab => Frame::Lab,
                FrameName::CoRotating => Frame::CoRotating,
            },
        };
        cfg.policy = match self.on_divergence {
            OnDivergence::Fail => DivergencePolicy::Fail,
            OnDivergence::Continue => DivergencePolicy::ClampToZero,
        };
        cfg
    }
}
