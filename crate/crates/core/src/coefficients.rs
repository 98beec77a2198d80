//! Coefficient fields `a`, `b`, `c`, the source `h` and the initial data.
//!
//! All fields are radial: they are functions of `r = |x|` only, and the
//! spatial dimension enters through the discrete divergence operator. Every
//! field carries the power-law envelope it claims to satisfy,
//!
//! ```text
//! a0 (1+r)^-alpha <= a(r) <= a1 (1+r)^-alpha
//! b0 (1+r)^beta   <= b(r) <= b1 (1+r)^beta
//! c0 (1+r)^-gamma <= c(r) <= c1 (1+r)^-gamma
//! ```
//!
//! and construction fails when a supplied evaluator leaves it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A radial scalar function `r -> f(r)`.
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `(order, r, t) -> d^order h / dt^order (r, t)`.
pub type SourceFn = Arc<dyn Fn(usize, f64, f64) -> f64 + Send + Sync>;

/// Relative slack granted to envelope comparisons for rounding.
const ENVELOPE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawEnvelope {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub c0: f64,
    pub c1: f64,
}

impl PowerLawEnvelope {
    /// Envelope with the given exponents and all constants equal to one.
    pub fn with_exponents(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            a0: 1.0,
            a1: 1.0,
            b0: 1.0,
            b1: 1.0,
            c0: 1.0,
            c1: 1.0,
        }
    }

    /// `a = b = c = 1`.
    pub fn unit() -> Self {
        Self::with_exponents(0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let exps = [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)];
        for (name, v) in exps {
            if !v.is_finite() {
                return Err(Error::InvalidEnvelope(format!("{name} is not finite")));
            }
        }
        let pairs = [
            ("a", self.a0, self.a1),
            ("b", self.b0, self.b1),
            ("c", self.c0, self.c1),
        ];
        for (name, lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi <= 0.0 {
                return Err(Error::InvalidEnvelope(format!(
                    "{name}0 and {name}1 must be positive and finite (got {lo}, {hi})"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidEnvelope(format!(
                    "{name}0 = {lo} exceeds {name}1 = {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn bounds(&self, which: Coefficient, r: f64) -> (f64, f64) {
        let (lo, hi, e) = self.constants(which);
        let s = (1.0 + r).powf(e);
        (lo * s, hi * s)
    }

    /// `(lower constant, upper constant, exponent of (1+r))` for one field.
    pub fn constants(&self, which: Coefficient) -> (f64, f64, f64) {
        match which {
            Coefficient::A => (self.a0, self.a1, -self.alpha),
            Coefficient::B => (self.b0, self.b1, self.beta),
            Coefficient::C => (self.c0, self.c1, -self.gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    A,
    B,
    C,
}

impl Coefficient {
    pub const ALL: [Coefficient; 3] = [Coefficient::A, Coefficient::B, Coefficient::C];

    pub fn symbol(self) -> char {
        match self {
            Coefficient::A => 'a',
            Coefficient::B => 'b',
            Coefficient::C => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `a(r) = a0 (1+r)^-alpha`, and likewise for `b` and `c`.
    PurePower,
    /// `a(r) = K (1+r^2)^(-alpha/2)`: smooth at the origin, with `K` picked
    /// so the profile stays inside the envelope.
    SmoothedPower,
}

/// Named radial profiles usable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinProfile {
    Constant { value: f64 },
    /// `coeff * (1+r)^exponent`
    Power { coeff: f64, exponent: f64 },
    /// `coeff * (1+r^2)^(exponent/2)`
    SmoothedPower { coeff: f64, exponent: f64 },
}

impl BuiltinProfile {
    pub fn to_fn(self) -> RadialFn {
        match self {
            BuiltinProfile::Constant { value } => Arc::new(move |_| value),
            BuiltinProfile::Power { coeff, exponent } => {
                Arc::new(move |r: f64| coeff * (1.0 + r).powf(exponent))
            }
            BuiltinProfile::SmoothedPower { coeff, exponent } => {
                Arc::new(move |r: f64| coeff * (1.0 + r * r).powf(0.5 * exponent))
            }
        }
    }
}

/// Evaluator choice handed to [`make_power_law`].
#[derive(Clone)]
pub enum Profile {
    PurePower,
    SmoothedPower,
    Custom { a: RadialFn, b: RadialFn, c: RadialFn },
}

impl From<ProfileKind> for Profile {
    fn from(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::PurePower => Profile::PurePower,
            ProfileKind::SmoothedPower => Profile::SmoothedPower,
        }
    }
}

#[derive(Clone)]
pub struct CoefficientField {
    pub envelope: PowerLawEnvelope,
    a: RadialFn,
    b: RadialFn,
    c: RadialFn,
    /// Declared C^2 regularity (smoothed and constant profiles).
    pub smooth: bool,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("envelope", &self.envelope)
            .field("smooth", &self.smooth)
            .finish_non_exhaustive()
    }
}

impl CoefficientField {
    #[inline]
    pub fn a(&self, r: f64) -> f64 {
        (self.a)(r)
    }

    #[inline]
    pub fn b(&self, r: f64) -> f64 {
        (self.b)(r)
    }

    #[inline]
    pub fn c(&self, r: f64) -> f64 {
        (self.c)(r)
    }

    pub fn eval(&self, which: Coefficient, r: f64) -> f64 {
        match which {
            Coefficient::A => self.a(r),
            Coefficient::B => self.b(r),
            Coefficient::C => self.c(r),
        }
    }

    pub fn evaluator(&self, which: Coefficient) -> RadialFn {
        match which {
            Coefficient::A => self.a.clone(),
            Coefficient::B => self.b.clone(),
            Coefficient::C => self.c.clone(),
        }
    }

    /// `a = b = c = 1`.
    pub fn unit() -> Self {
        make_power_law(PowerLawEnvelope::unit(), Profile::PurePower)
            .expect("unit envelope is valid")
    }

    /// Same `b` and `c` with `a = 0`. This leaves the envelope class and is
    /// only meant for conservation checks of the undamped equation.
    pub fn undamped(&self) -> Self {
        Self {
            a: Arc::new(|_| 0.0),
            ..self.clone()
        }
    }
}

/// Radii at which custom evaluators are validated: the origin plus a
/// geometric sweep over eight decades.
pub fn validation_samples() -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend((0..=240).map(|j| 10f64.powf(-3.0 + 8.0 * j as f64 / 240.0)));
    out
}

pub fn make_power_law(envelope: PowerLawEnvelope, profile: Profile) -> Result<CoefficientField> {
    envelope.validate()?;
    let field = match profile {
        Profile::PurePower => {
            let mk = |which| {
                let (lo, _, e) = envelope.constants(which);
                BuiltinProfile::Power {
                    coeff: lo,
                    exponent: e,
                }
                .to_fn()
            };
            CoefficientField {
                envelope,
                a: mk(Coefficient::A),
                b: mk(Coefficient::B),
                c: mk(Coefficient::C),
                smooth: envelope.alpha == 0.0 && envelope.beta == 0.0 && envelope.gamma == 0.0,
            }
        }
        Profile::SmoothedPower => {
            let mk = |which| -> Result<RadialFn> {
                let (lo, hi, e) = envelope.constants(which);
                // sqrt(1+r^2)/(1+r) ranges over [1/sqrt 2, 1], so the
                // smoothed profile deviates from the pure power by a factor
                // in [min(1, 2^(-e/2)), max(1, 2^(-e/2))].
                let edge = 2f64.powf(-0.5 * e);
                let (m_lo, m_hi) = (edge.min(1.0), edge.max(1.0));
                let coeff = lo / m_lo;
                if coeff * m_hi > hi * (1.0 + ENVELOPE_RTOL) {
                    return Err(Error::InvalidEnvelope(format!(
                        "smoothed_power for {} needs upper/lower constant ratio >= {:.6}, got {:.6}",
                        which.symbol(),
                        m_hi / m_lo,
                        hi / lo
                    )));
                }
                Ok(BuiltinProfile::SmoothedPower { coeff, exponent: e }.to_fn())
            };
            CoefficientField {
                envelope,
                a: mk(Coefficient::A)?,
                b: mk(Coefficient::B)?,
                c: mk(Coefficient::C)?,
                smooth: true,
            }
        }
        Profile::Custom { a, b, c } => {
            let field = CoefficientField {
                envelope,
                a,
                b,
                c,
                smooth: false,
            };
            let violations = sample_envelope_violation(&field, &validation_samples())?;
            if let Some(v) = violations.first() {
                return Err(Error::EnvelopeViolation {
                    field: v.coefficient.symbol(),
                    r: v.r,
                    bound: v.kind.to_string(),
                });
            }
            field
        }
    };
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Lower,
    Upper,
    NonFinite,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Lower => "lower bound",
            ViolationKind::Upper => "upper bound",
            ViolationKind::NonFinite => "non-finite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub r: f64,
    pub coefficient: Coefficient,
    pub kind: ViolationKind,
    pub value: f64,
}

/// Every `(r, coefficient, bound)` at which the field leaves its envelope.
pub fn sample_envelope_violation(field: &CoefficientField, r_samples: &[f64]) -> Result<Vec<Violation>> {
    if r_samples.is_empty() {
        return Err(Error::InvalidArgument("r_samples is empty".into()));
    }
    if let Some(r) = r_samples.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::InvalidArgument(format!("bad sample radius {r}")));
    }
    let mut out = Vec::new();
    for &r in r_samples {
        for which in Coefficient::ALL {
            let value = field.eval(which, r);
            let (lo, hi) = field.envelope.bounds(which, r);
            let kind = if !value.is_finite() {
                Some(ViolationKind::NonFinite)
            } else if value < lo * (1.0 - ENVELOPE_RTOL) {
                Some(ViolationKind::Lower)
            } else if value > hi * (1.0 + ENVELOPE_RTOL) {
                Some(ViolationKind::Upper)
            } else {
                None
            };
            if let Some(kind) = kind {
                out.push(Violation {
                    r,
                    coefficient: which,
                    kind,
                    value,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityMode {
    /// Growth conditions for the general equation with variable `c`.
    General,
    /// `c = 1`, `h = 0`: the conditions under which explicit decay rates hold.
    HomogeneousC1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    /// Informational checks are reported but do not affect the verdict.
    pub enforced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub mode: AdmissibilityMode,
    pub checks: Vec<InequalityCheck>,
    pub pass: bool,
}

impl AdmissibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| c.enforced && !c.pass)
    }
}

pub fn check_admissibility(env: &PowerLawEnvelope, mode: AdmissibilityMode) -> AdmissibilityReport {
    let (alpha, beta, gamma) = (env.alpha, env.beta, env.gamma);
    let check = |name: &str, value: f64, pass: bool, enforced: bool| InequalityCheck {
        name: name.to_string(),
        value,
        pass,
        enforced,
    };
    let mut checks = Vec::new();
    match mode {
        AdmissibilityMode::General => {
            // Printed as "2 - beta - gamma < 2", i.e. beta + gamma > 0. It
            // conflicts with the cone requirement below, so it is only
            // reported.
            let printed = 2.0 - beta - gamma;
            checks.push(check("2-beta-gamma<2 (as printed)", printed, printed < 2.0, false));
            let s = 2.0 * alpha + beta - gamma;
            checks.push(check("2alpha+beta-gamma<2", s, s < 2.0, true));
        }
        AdmissibilityMode::HomogeneousC1 => {
            checks.push(check("alpha<1", alpha, alpha < 1.0, true));
            checks.push(check("0<=beta<2", beta, (0.0..2.0).contains(&beta), true));
            let s = 2.0 * alpha + beta;
            checks.push(check("2alpha+beta<=2", s, s <= 2.0, true));
        }
    }
    let cone = beta + gamma;
    checks.push(check("0<=beta+gamma<2", cone, (0.0..2.0).contains(&cone), true));
    let pass = checks.iter().all(|c| !c.enforced || c.pass);
    AdmissibilityReport { mode, checks, pass }
}

/// Source term `h(r, t)` together with analytically supplied time
/// derivatives up to `time_derivative_order`.
#[derive(Clone)]
pub struct SourceField {
    eval: Option<SourceFn>,
    pub time_derivative_order: usize,
}

impl fmt::Debug for SourceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceField")
            .field("zero", &self.is_zero())
            .field("time_derivative_order", &self.time_derivative_order)
            .finish()
    }
}

impl SourceField {
    /// `h = 0`; derivatives of every order are available.
    pub fn zero() -> Self {
        Self {
            eval: None,
            time_derivative_order: usize::MAX,
        }
    }

    pub fn new(time_derivative_order: usize, eval: SourceFn) -> Self {
        Self {
            eval: Some(eval),
            time_derivative_order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eval.is_none()
    }

    #[inline]
    pub fn value(&self, r: f64, t: f64) -> f64 {
        match &self.eval {
            None => 0.0,
            Some(f) => f(0, r, t),
        }
    }

    pub fn derivative(&self, order: usize, r: f64, t: f64) -> Result<f64> {
        if order > self.time_derivative_order {
            return Err(Error::MissingDerivative {
                requested: order,
                available: self.time_derivative_order,
            });
        }
        Ok(match &self.eval {
            None => 0.0,
            Some(f) => f(order, r, t),
        })
    }

    /// The source `d^order h / dt^order` seen by the cascade run for `d^order u / dt^order`.
    pub fn shifted(&self, order: usize) -> Result<SourceField> {
        if order > self.time_derivative_order {
            return Err(Error::MissingDerivative {
                requested: order,
                available: self.time_derivative_order,
            });
        }
        Ok(match &self.eval {
            None => SourceField::zero(),
            Some(f) => {
                let f = f.clone();
                SourceField {
                    eval: Some(Arc::new(move |k, r, t| f(k + order, r, t))),
                    time_derivative_order: self.time_derivative_order - order,
                }
            }
        })
    }

    /// `h(r, t) = amplitude * bump(r / radius) * exp(-rate t)`, supported in
    /// `r <= radius` for all times, with derivatives supplied up to `order`.
    pub fn decaying_pulse(amplitude: f64, radius: f64, rate: f64, order: usize) -> Self {
        SourceField::new(
            order,
            Arc::new(move |k, r, t| {
                amplitude * bump(r / radius) * (-rate).powi(k as i32) * (-rate * t).exp()
            }),
        )
    }
}

/// `exp(1 - 1/(1-s^2))` on `|s| < 1`, zero outside; equals one at `s = 0`.
pub fn bump(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialShape {
    /// Smooth compactly supported bump peaking at the origin.
    GaussianBump,
    /// `max(0, 1 - r/R)`.
    Hat,
    /// Smooth bump centred on `r = R/2`, vanishing at the origin.
    Ring,
}

impl InitialShape {
    pub fn profile(self, amplitude: f64, radius: f64) -> RadialFn {
        match self {
            InitialShape::GaussianBump => Arc::new(move |r: f64| amplitude * bump(r / radius)),
            InitialShape::Hat => Arc::new(move |r: f64| amplitude * (1.0 - r / radius).max(0.0)),
            InitialShape::Ring => {
                Arc::new(move |r: f64| amplitude * bump((r - 0.5 * radius) / (0.5 * radius)))
            }
        }
    }
}

#[derive(Clone)]
pub struct InitialData {
    pub u0: RadialFn,
    pub u1: RadialFn,
    /// Radius outside which both profiles vanish.
    pub radius: f64,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData").field("radius", &self.radius).finish_non_exhaustive()
    }
}

impl InitialData {
    /// Checks the support claim on a sweep of radii beyond `radius`.
    pub fn new(u0: RadialFn, u1: RadialFn, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("support radius {radius} must be positive")));
        }
        for j in 1..=400 {
            let r = radius * (1.0 + 1e-9) + radius * 0.01 * j as f64;
            if u0(r) != 0.0 || u1(r) != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "initial data nonzero at r = {r} beyond declared support {radius}"
                )));
            }
        }
        Ok(Self { u0, u1, radius })
    }

    /// `u0 = amplitude * shape`, `u1 = velocity_amplitude * shape`.
    pub fn named(shape: InitialShape, amplitude: f64, radius: f64, velocity_amplitude: f64) -> Result<Self> {
        Self::new(
            shape.profile(amplitude, radius),
            shape.profile(velocity_amplitude, radius),
            radius,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_exponents_give_constant_fields() {
        let f = make_power_law(PowerLawEnvelope::unit(), Profile::PurePower).unwrap();
        for r in [0.0, 0.5, 3.0, 1e4] {
            assert_eq!((f.a(r), f.b(r), f.c(r)), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn pure_power_direct_evaluation() {
        let f = make_power_law(PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0), Profile::PurePower).unwrap();
        assert!((f.a(2.0) - 3f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn custom_outside_envelope_rejected() {
        let env = PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0);
        let one: RadialFn = Arc::new(|_| 1.0);
        let err = make_power_law(
            env,
            Profile::Custom {
                a: Arc::new(|r: f64| 2.0 * (1.0 + r).powf(-0.5)),
                b: one.clone(),
                c: one,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::EnvelopeViolation { field: 'a', .. }), "{err}");
    }

    #[test]
    fn nonpositive_constants_rejected() {
        let mut env = PowerLawEnvelope::unit();
        env.b0 = 0.0;
        assert!(make_power_law(env, Profile::PurePower).is_err());
        let mut env = PowerLawEnvelope::unit();
        env.c0 = 2.0;
        assert!(make_power_law(env, Profile::PurePower).is_err());
    }

    #[test]
    fn smoothed_power_stays_inside_envelope() {
        let mut env = PowerLawEnvelope::with_exponents(0.5, 0.8, 0.3);
        env.a1 = 2.0;
        env.b1 = 2.0;
        env.c1 = 2.0;
        let f = make_power_law(env, Profile::SmoothedPower).unwrap();
        assert!(sample_envelope_violation(&f, &validation_samples()).unwrap().is_empty());
        // too tight an envelope cannot host the smoothed profile
        let tight = PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0);
        assert!(make_power_law(tight, Profile::SmoothedPower).is_err());
    }

    #[test]
    fn violation_listing() {
        let unit = CoefficientField::unit();
        assert!(sample_envelope_violation(&unit, &[0.0, 1.0, 50.0]).unwrap().is_empty());

        // a = (1+r)^-0.4 declared with alpha = 0.5 leaves the upper bound at r = 10
        let field = CoefficientField {
            envelope: PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0),
            a: Arc::new(|r: f64| (1.0 + r).powf(-0.4)),
            b: Arc::new(|_| 1.0),
            c: Arc::new(|_| 1.0),
            smooth: false,
        };
        let v = sample_envelope_violation(&field, &[10.0]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].r, v[0].coefficient, v[0].kind), (10.0, Coefficient::A, ViolationKind::Upper));
        assert!(11f64.powf(-0.4) > 11f64.powf(-0.5));

        let nan = CoefficientField {
            a: Arc::new(|r: f64| if r == 1.0 { f64::NAN } else { 1.0 }),
            ..CoefficientField::unit()
        };
        let v = sample_envelope_violation(&nan, &[0.5, 1.0]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NonFinite);
        assert_eq!(v[0].kind.to_string(), "non-finite");

        assert!(sample_envelope_violation(&unit, &[]).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let rep = check_admissibility(&PowerLawEnvelope::unit(), AdmissibilityMode::HomogeneousC1);
        assert!(rep.pass);

        let rep = check_admissibility(
            &PowerLawEnvelope::with_exponents(0.0, 2.0, 0.0),
            AdmissibilityMode::HomogeneousC1,
        );
        assert!(!rep.pass);
        assert!(rep.failures().any(|c| c.name == "0<=beta<2"));

        let rep = check_admissibility(
            &PowerLawEnvelope::with_exponents(0.9, 0.5, 0.0),
            AdmissibilityMode::HomogeneousC1,
        );
        let failed: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["2alpha+beta<=2"]);
        let c = rep.checks.iter().find(|c| c.name == "2alpha+beta<=2").unwrap();
        assert!((c.value - 2.3).abs() < 1e-12);
    }

    #[test]
    fn printed_abg_condition_is_informational() {
        // beta + gamma = 0 violates the printed form but not the enforced one
        let rep = check_admissibility(&PowerLawEnvelope::unit(), AdmissibilityMode::General);
        assert!(rep.pass);
        let printed = rep.checks.iter().find(|c| !c.enforced).unwrap();
        assert!(!printed.pass);
        let rep = check_admissibility(
            &PowerLawEnvelope::with_exponents(0.0, 1.5, 0.6),
            AdmissibilityMode::General,
        );
        assert!(!rep.pass);
    }

    #[test]
    fn source_support_and_derivatives() {
        let h = SourceField::decaying_pulse(2.0, 1.5, 0.5, 3);
        assert_eq!(h.value(1.6, 0.0), 0.0);
        let d1 = h.derivative(1, 0.3, 2.0).unwrap();
        assert!((d1 + 0.5 * h.value(0.3, 2.0)).abs() < 1e-15);
        assert!(matches!(
            h.derivative(4, 0.0, 0.0),
            Err(Error::MissingDerivative { requested: 4, available: 3 })
        ));
        let s = h.shifted(2).unwrap();
        assert_eq!(s.time_derivative_order, 1);
        assert!((s.value(0.2, 1.0) - h.derivative(2, 0.2, 1.0).unwrap()).abs() < 1e-15);
        assert!(SourceField::zero().shifted(40).unwrap().is_zero());
    }

    #[test]
    fn named_initial_data_respect_support() {
        for shape in [InitialShape::GaussianBump, InitialShape::Hat, InitialShape::Ring] {
            let d = InitialData::named(shape, 1.0, 2.0, 0.5).unwrap();
            assert_eq!((d.u0)(2.0), 0.0);
            assert_eq!((d.u1)(2.5), 0.0);
        }
        let wide: RadialFn = Arc::new(|r: f64| bump(r / 3.0));
        assert!(InitialData::new(wide, Arc::new(|_| 0.0), 2.0).is_err());
        let g = InitialShape::GaussianBump.profile(1.7, 1.0);
        assert_eq!(g(0.0), 1.7);
    }
}
