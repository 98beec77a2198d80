//! Sampled certificates for the structural hypotheses behind the decay
//! estimates: the weight exponent window and weight inequalities, the growth
//! exponents of the mass ratio `c/a`, the radial subsolution `A` with its
//! decay exponent `mu`, and the matrix condition on `b` used for L-infinity
//! bounds.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientField, PowerLawEnvelope};
use crate::decay::least_squares;
use crate::error::{Error, Result};
use crate::support::SupportSpec;

/// Default slack exponent.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Open interval `(max{0, 2(alpha-gamma)/(2-beta-gamma)}, 1)` of admissible
/// weight exponents, or `None` when it is empty.
pub fn omega_window(env: &PowerLawEnvelope) -> Result<Option<(f64, f64)>> {
    let s = env.beta + env.gamma;
    if !(s < 2.0) {
        return Err(Error::Window(format!("beta + gamma = {s} must be below 2")));
    }
    let lower = (2.0 * (env.alpha - env.gamma) / (2.0 - s)).max(0.0);
    Ok(if lower < 1.0 { Some((lower, 1.0)) } else { None })
}

/// Midpoint of the window.
pub fn auto_omega(env: &PowerLawEnvelope) -> Result<f64> {
    match omega_window(env)? {
        Some((lo, hi)) => Ok(0.5 * (lo + hi)),
        None => Err(Error::Window("the omega window is empty".into())),
    }
}

/// `W(t) = w0 (1+t)^-omega` with its exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub omega: f64,
    pub w0: f64,
    pub nu: f64,
    /// `nu - omega`.
    pub theta: f64,
    pub c0: f64,
    /// Start time from which every inequality was verified.
    pub t0: Option<f64>,
}

impl WeightSpec {
    pub fn w(&self, t: f64) -> f64 {
        self.w0 * (1.0 + t).powf(-self.omega)
    }

    pub fn w_t(&self, t: f64) -> f64 {
        -self.omega * self.w(t) / (1.0 + t)
    }

    pub fn w_tt(&self, t: f64) -> f64 {
        self.omega * (self.omega + 1.0) * self.w(t) / ((1.0 + t) * (1.0 + t))
    }
}

pub fn build_weight(env: &PowerLawEnvelope, omega: f64, w0: f64, nu: f64, c0: f64) -> Result<WeightSpec> {
    let (lo, hi) = omega_window(env)?
        .ok_or_else(|| Error::Window("the omega window is empty".into()))?;
    if !(omega > lo) {
        return Err(Error::Window(format!("omega = {omega} below {lo}")));
    }
    if !(omega < hi) {
        return Err(Error::Window(format!("omega = {omega} not below {hi}")));
    }
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(Error::InvalidArgument(format!("w0 = {w0} must be positive")));
    }
    if !(4.0 * c0 - 2.0 > 0.0) {
        return Err(Error::InvalidArgument(format!("4C0-2 <= 0 for C0 = {c0}")));
    }
    if !(nu >= omega) {
        return Err(Error::InvalidArgument(format!("nu = {nu} must be at least omega = {omega}")));
    }
    Ok(WeightSpec {
        omega,
        w0,
        nu,
        theta: nu - omega,
        c0,
        t0: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Times on a geometric grid in `1 + t` from 0 to `t_max`.
    pub t_points: usize,
    /// Radii per time, uniform on `[0, predicted_radius(t)]`.
    pub x_points: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            t_points: 400,
            x_points: 64,
        }
    }
}

impl SamplingPlan {
    pub fn times(&self, t_max: f64) -> Vec<f64> {
        let n = self.t_points.max(2);
        (0..n)
            .map(|k| (1.0 + t_max).powf(k as f64 / (n - 1) as f64) - 1.0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub name: String,
    /// Smallest normalised margin over the verified samples; negative on failure.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub worst_r: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub t0: f64,
    pub t_max: f64,
    pub samples: usize,
    pub checks: Vec<WeightCheck>,
    pub pass: bool,
}

/// Names of the verified weight inequalities.
pub const WEIGHT_CHECKS: [&str; 6] = [
    "weight_below_a_over_c",
    "weight_convexity",
    "lower_form",
    "lower_form_envelope",
    "upper_form",
    "weight_dominates_nu",
];

/// Normalised margins of every weight inequality at `(t, r)`; each is
/// non-negative exactly when its inequality holds (the last one strictly).
fn weight_margins(spec: &WeightSpec, env: &PowerLawEnvelope, field: &CoefficientField, t: f64, r: f64) -> [f64; 6] {
    let (a, c) = (field.a(r), field.c(r));
    let (w, wt, wtt) = (spec.w(t), spec.w_t(t), spec.w_tt(t));
    let ratio = a / c;
    let below = (ratio - w) / ratio;
    let convex = (wtt * c - wt * a) / (wtt * c + wt.abs() * a);
    let lower = (2.0 * w * a - 2.0 * wt * c - w * w * c) / (2.0 * w * a - 2.0 * wt * c);
    let (w0, om) = (spec.w0, spec.omega);
    let pos = 2.0 * w0 * env.a0 * (1.0 + r).powf(env.gamma - env.alpha) + 2.0 * w0 * om * env.c0 / (1.0 + t);
    let lower_env = (pos - w0 * w0 * env.c1 * (1.0 + t).powf(-om)) / pos;
    let k = 4.0 * spec.c0 - 2.0;
    let upper = (k * w * a + 2.0 * wt * c - w * w * c) / (k * w * a);
    let nu = if spec.nu > 0.0 {
        (w0 * (1.0 + t).powf(1.0 - om) - 2.0 * spec.nu) / (2.0 * spec.nu)
    } else {
        1.0
    };
    [below, convex, lower, lower_env, upper, nu]
}

fn holds(index: usize, margin: f64) -> bool {
    if index == 5 { margin > 0.0 } else { margin >= 0.0 }
}

/// Scans the sampling plan for the smallest `T0` from which all weight
/// inequalities hold at every sampled `(t, r)` with `t <= t_max` and `r`
/// inside the predicted support at time `t`.
pub fn verify_weight(
    spec: &WeightSpec,
    env: &PowerLawEnvelope,
    field: &CoefficientField,
    support: &SupportSpec,
    t_max: f64,
    plan: &SamplingPlan,
) -> Result<(WeightSpec, WeightReport)> {
    let times = plan.times(t_max);
    let xs = plan.x_points.max(1);
    // per time: worst margin and its radius for each inequality
    let rows: Vec<[(f64, f64); 6]> = times
        .iter()
        .map(|&t| {
            let rho = support.predicted_radius(t);
            let mut worst = [(f64::INFINITY, 0.0); 6];
            for j in 0..=xs {
                let r = rho * j as f64 / xs as f64;
                for (k, m) in weight_margins(spec, env, field, t, r).into_iter().enumerate() {
                    if m < worst[k].0 || m.is_nan() {
                        worst[k] = (m, r);
                    }
                }
            }
            worst
        })
        .collect();
    let ok = |row: &[(f64, f64); 6]| row.iter().enumerate().all(|(k, (m, _))| holds(k, *m));
    let mut start = times.len();
    while start > 0 && ok(&rows[start - 1]) {
        start -= 1;
    }
    if start == times.len() {
        let last = rows.last().expect("at least two sample times");
        let (k, (m, r)) = last
            .iter()
            .enumerate()
            .filter(|(k, (m, _))| !holds(*k, *m))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("some inequality fails");
        return Err(Error::WeightFailure(format!(
            "{} fails through t_max = {t_max}: margin {m:.3e} at t = {t_max}, r = {r:.4}",
            WEIGHT_CHECKS[k]
        )));
    }
    let t0 = times[start];
    let checks = (0..6)
        .map(|k| {
            let (mut worst, mut wt, mut wr) = (f64::INFINITY, t0, 0.0);
            for (row, &t) in rows[start..].iter().zip(&times[start..]) {
                if row[k].0 < worst {
                    worst = row[k].0;
                    wt = t;
                    wr = row[k].1;
                }
            }
            WeightCheck {
                name: WEIGHT_CHECKS[k].to_string(),
                worst_margin: worst,
                worst_t: wt,
                worst_r: wr,
                pass: true,
            }
        })
        .collect();
    let verified = WeightSpec { t0: Some(t0), ..*spec };
    Ok((
        verified,
        WeightReport {
            t0,
            t_max,
            samples: (times.len() - start) * (xs + 1),
            checks,
            pass: true,
        },
    ))
}

/// Minimum relative margin of `W <= a/c` required at `T0` when picking `w0`.
pub const W0_MARGIN: f64 = 0.1;

/// Builds and verifies a weight starting from `w0 = 1`, halving `w0` until
/// `W(T0) <= a/c` holds with a margin of at least [`W0_MARGIN`] over the
/// support at `T0`.
#[allow(clippy::too_many_arguments)]
pub fn certify_weight(
    env: &PowerLawEnvelope,
    field: &CoefficientField,
    support: &SupportSpec,
    omega: f64,
    nu: f64,
    c0: f64,
    t_max: f64,
    plan: &SamplingPlan,
) -> Result<(WeightSpec, WeightReport)> {
    let mut w0 = 1.0;
    let mut last_err = None;
    for _ in 0..40 {
        let spec = build_weight(env, omega, w0, nu, c0)?;
        match verify_weight(&spec, env, field, support, t_max, plan) {
            Ok((v, rep)) => {
                let t0 = rep.t0;
                let rho = support.predicted_radius(t0);
                let xs = plan.x_points.max(1);
                let margin = (0..=xs)
                    .map(|j| {
                        let r = rho * j as f64 / xs as f64;
                        let ratio = field.a(r) / field.c(r);
                        (ratio - v.w(t0)) / ratio
                    })
                    .fold(f64::INFINITY, f64::min);
                if margin >= W0_MARGIN {
                    return Ok((v, rep));
                }
            }
            Err(e) => last_err = Some(e),
        }
        w0 *= 0.5;
    }
    Err(last_err.unwrap_or_else(|| Error::WeightFailure("no w0 reaches the required margin".into())))
}

/// `(A(r), A'(r))`.
pub type SubsolutionFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Radial subsolution `A` with its decay exponent.
#[derive(Clone)]
pub struct SubsolutionSpec {
    pub n: usize,
    pub delta: f64,
    /// Minimum of `a A / (b A'^2)` over the outer quarter of `[0, r_max]`.
    pub mu_numeric: f64,
    pub mu_radius: f64,
    /// `(2 - alpha)/(2 - alpha - beta)`.
    pub mu_formula: f64,
    pub r_max: f64,
    eval: SubsolutionFn,
}

impl fmt::Debug for SubsolutionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubsolutionSpec")
            .field("n", &self.n)
            .field("mu_numeric", &self.mu_numeric)
            .field("mu_formula", &self.mu_formula)
            .finish_non_exhaustive()
    }
}

pub fn mu_formula(env: &PowerLawEnvelope) -> Result<f64> {
    let d = 2.0 - env.alpha - env.beta;
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("2 - alpha - beta = {d} must be positive")));
    }
    Ok((2.0 - env.alpha) / d)
}

/// `a A / (b A'^2)`.
fn mu_ratio(field: &CoefficientField, r: f64, a_val: f64, a_prime: f64) -> f64 {
    field.a(r) * a_val / (field.b(r) * a_prime * a_prime)
}

impl SubsolutionSpec {
    /// Wraps a closed-form `A`.
    pub fn closed_form(eval: SubsolutionFn, field: &CoefficientField, n: usize, delta: f64, r_max: f64) -> Result<Self> {
        let mut spec = Self {
            n,
            delta,
            mu_numeric: f64::NAN,
            mu_radius: f64::NAN,
            mu_formula: mu_formula(&field.envelope)?,
            r_max,
            eval,
        };
        spec.locate_mu(field);
        Ok(spec)
    }

    fn locate_mu(&mut self, field: &CoefficientField) {
        let samples = 512;
        let (mut best, mut at) = (f64::INFINITY, f64::NAN);
        for j in 0..=samples {
            let r = self.r_max * (0.75 + 0.25 * j as f64 / samples as f64);
            let (v, d) = (self.eval)(r);
            let m = mu_ratio(field, r, v, d);
            if m < best {
                best = m;
                at = r;
            }
        }
        self.mu_numeric = best;
        self.mu_radius = at;
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.eval)(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        (self.eval)(r).1
    }

    pub fn summary(&self) -> SubsolutionSummary {
        SubsolutionSummary {
            n: self.n,
            delta: self.delta,
            mu_numeric: self.mu_numeric,
            mu_radius: self.mu_radius,
            mu_formula: self.mu_formula,
            r_max: self.r_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSummary {
    pub n: usize,
    pub delta: f64,
    pub mu_numeric: f64,
    pub mu_radius: f64,
    pub mu_formula: f64,
    pub r_max: f64,
}

/// Panels used to tabulate the constructed subsolution.
const SUBSOLUTION_PANELS: usize = 2048;
const GL_DEGREE: usize = 10;

struct Tabulated {
    n: usize,
    h: f64,
    flux: Vec<f64>,
    value: Vec<f64>,
    field: CoefficientField,
    gl: GaussLegendre,
}

impl Tabulated {
    fn density(&self, s: f64) -> f64 {
        s.powi(self.n as i32 - 1) * self.field.a(s)
    }

    fn panel(&self, r: f64) -> usize {
        ((r / self.h) as usize).min(self.flux.len() - 2)
    }

    /// `F(r) = int_0^r s^(n-1) a(s) ds`.
    fn flux_at(&self, r: f64) -> f64 {
        let k = self.panel(r);
        let lo = k as f64 * self.h;
        self.flux[k] + self.gl.integrate(lo, r, |s| self.density(s))
    }

    fn slope_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.flux_at(r) / (r.powi(self.n as i32 - 1) * self.field.b(r))
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let k = self.panel(r);
        let lo = k as f64 * self.h;
        let v = self.value[k] + self.gl.integrate(lo, r, |s| self.slope_at(s));
        (v, self.slope_at(r))
    }
}

/// Solves `(r^(n-1) b A')' = r^(n-1) a` with `A(0) = A'(0) = 0` by nested
/// Gauss-Legendre quadrature on uniform panels over `[0, r_max]`.
pub fn construct_radial_subsolution(field: &CoefficientField, n: usize, delta: f64, r_max: f64) -> Result<SubsolutionSpec> {
    let mu_f = mu_formula(&field.envelope)?;
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("r_max = {r_max} must be positive")));
    }
    let h = r_max / SUBSOLUTION_PANELS as f64;
    let mut tab = Tabulated {
        n,
        h,
        flux: vec![0.0; SUBSOLUTION_PANELS + 1],
        value: vec![0.0; SUBSOLUTION_PANELS + 1],
        field: field.clone(),
        gl: GaussLegendre::new(NonZeroUsize::new(GL_DEGREE).unwrap()),
    };
    for k in 0..SUBSOLUTION_PANELS {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        tab.flux[k + 1] = tab.flux[k] + tab.gl.integrate(lo, hi, |s| tab.density(s));
    }
    for k in 0..SUBSOLUTION_PANELS {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        tab.value[k + 1] = tab.value[k] + tab.gl.integrate(lo, hi, |s| tab.slope_at(s));
    }
    if let Some(k) = tab.value.iter().chain(&tab.flux).position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-integrable coefficients near table entry {k}")));
    }
    let tab = Arc::new(tab);
    let mut spec = SubsolutionSpec {
        n,
        delta,
        mu_numeric: f64::NAN,
        mu_radius: f64::NAN,
        mu_formula: mu_f,
        r_max,
        eval: Arc::new(move |r| tab.eval(r)),
    };
    spec.locate_mu(field);
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub value: f64,
    pub at_r: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `min A` over the samples.
    pub nonnegative: HypothesisCheck,
    /// Log-log slope of `A / r^(2-alpha-beta)` over the outer quarter.
    pub growth: HypothesisCheck,
    /// Smallest `(div(b grad A) - a)/a` over positive samples.
    pub subsolution: HypothesisCheck,
    /// Largest `|div(b grad A) - a| / a`.
    pub residual: f64,
    pub mu_numeric: f64,
    pub mu_radius: f64,
    pub mu_formula: f64,
    pub pass: bool,
}

/// Relative tolerance of the subsolution inequality.
pub const SUBSOLUTION_RTOL: f64 = 1e-8;
/// Largest outer-quarter slope accepted as bounded growth.
pub const GROWTH_SLOPE: f64 = 0.05;

/// Fourth-order central difference through the even extension.
fn fd1(f: &dyn Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    let g = |x: f64| f(x.abs());
    (-g(r + 2.0 * h) + 8.0 * g(r + h) - 8.0 * g(r - h) + g(r - 2.0 * h)) / (12.0 * h)
}

fn fd2(f: &dyn Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    let g = |x: f64| f(x.abs());
    (-g(r + 2.0 * h) + 16.0 * g(r + h) - 30.0 * g(r) + 16.0 * g(r - h) - g(r - 2.0 * h)) / (12.0 * h * h)
}

fn fd_step(r: f64) -> f64 {
    let h = 1e-3 * (1.0 + r);
    if r > 0.0 { h.min(0.25 * r) } else { h }
}

/// Checks nonnegativity, growth and the subsolution inequality of `A` at the
/// given radii, and recomputes `mu` over their outer quarter.
pub fn check_hypothesis_a(spec: &SubsolutionSpec, field: &CoefficientField, r_samples: &[f64]) -> HypothesisReport {
    let n = spec.n as i32;
    let p = 2.0 - field.envelope.alpha - field.envelope.beta;
    let (mut min_a, mut min_at) = (f64::INFINITY, 0.0);
    let (mut min_rel, mut rel_at, mut residual) = (f64::INFINITY, 0.0, 0.0f64);
    for &r in r_samples {
        let a_val = spec.value(r);
        if a_val < min_a {
            min_a = a_val;
            min_at = r;
        }
        if r <= 0.0 {
            continue;
        }
        let flux = |s: f64| s.powi(n - 1) * field.b(s) * spec.derivative(s);
        let div = fd1(&flux, r, fd_step(r)) / r.powi(n - 1);
        let a = field.a(r);
        let rel = (div - a) / a;
        residual = residual.max(rel.abs());
        if rel < min_rel {
            min_rel = rel;
            rel_at = r;
        }
    }
    let (lo, hi) = r_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(*r), h.max(*r)));
    let cut = lo + 0.75 * (hi - lo);
    let outer: Vec<f64> = r_samples.iter().copied().filter(|r| *r >= cut && *r > 0.0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = outer
        .iter()
        .map(|&r| (r.ln(), (spec.value(r).abs() / r.powf(p)).ln()))
        .filter(|(_, y)| y.is_finite())
        .unzip();
    let growth_slope = least_squares(&xs, &ys).map(|f| f.0).unwrap_or(f64::NAN);
    let (mut mu, mut mu_at) = (f64::INFINITY, f64::NAN);
    for &r in &outer {
        let m = mu_ratio(field, r, spec.value(r), spec.derivative(r));
        if m < mu {
            mu = m;
            mu_at = r;
        }
    }
    let nonnegative = HypothesisCheck {
        name: "nonnegative".into(),
        value: min_a,
        at_r: min_at,
        pass: min_a >= 0.0,
    };
    let growth = HypothesisCheck {
        name: "growth".into(),
        value: growth_slope,
        at_r: hi,
        pass: growth_slope <= GROWTH_SLOPE,
    };
    let subsolution = HypothesisCheck {
        name: "subsolution".into(),
        value: min_rel,
        at_r: rel_at,
        pass: min_rel >= -SUBSOLUTION_RTOL,
    };
    let pass = nonnegative.pass && growth.pass && subsolution.pass && mu > 0.0;
    HypothesisReport {
        nonnegative,
        growth,
        subsolution,
        residual,
        mu_numeric: mu,
        mu_radius: mu_at,
        mu_formula: spec.mu_formula,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSample {
    pub t: f64,
    pub radius: f64,
    pub sup1: f64,
    pub sup2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MConditions {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Constants with `sup <= K (1+t)^lambda` at every sample.
    pub k1: f64,
    pub k2: f64,
    /// Unclamped fitted slopes.
    pub slope1: f64,
    pub slope2: f64,
    pub fitted_from: String,
    pub samples: Vec<MSample>,
    pub warnings: Vec<String>,
}

/// Nodes per time used for the support suprema.
pub const M_NODES: usize = 2048;

/// `div(b grad g)` for radial `b`, `g` in dimension `n`, by finite differences.
fn radial_div(b: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, n: usize, r: f64) -> f64 {
    let h = fd_step(r);
    let (bv, g2) = (b(r), fd2(g, r, h));
    if r <= 0.0 {
        return n as f64 * bv * g2;
    }
    bv * g2 + (fd1(b, r, h) + (n as f64 - 1.0) * bv / r) * fd1(g, r, h)
}

/// The two bracketed quantities for the mass ratio `g = c/a` at `r`:
/// `g + (b/a) |g'|^2` and `[(1/a) div(b grad g)]^2`.
pub fn mass_ratio_terms(field: &CoefficientField, n: usize, r: f64) -> (f64, f64) {
    let g = |s: f64| field.c(s) / field.a(s);
    let b = |s: f64| field.b(s);
    let a = field.a(r);
    let d = fd1(&g, r, fd_step(r));
    let first = g(r) + field.b(r) / a * d * d;
    let second = (radial_div(&b, &g, n, r) / a).powi(2);
    (first, second)
}

fn fit_lambda(ts: &[f64], sups: &[f64], label: &str, warnings: &mut Vec<String>) -> (f64, f64, f64) {
    let peak = sups.iter().fold(0.0f64, |m, v| m.max(*v));
    if peak == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let floor = sups.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = ts.iter().map(|t| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|v| v.max(floor).ln()).collect();
    let slope = least_squares(&xs, &ys).map(|f| f.0).unwrap_or(0.0);
    let lambda = slope.clamp(0.0, 1.0);
    if slope > 1.0 || slope < 0.0 {
        warnings.push(format!("{label}: fitted exponent {slope:.4} clamped to {lambda}"));
    }
    let k = ts
        .iter()
        .zip(sups)
        .map(|(t, v)| v / (1.0 + t).powf(lambda))
        .fold(0.0f64, f64::max);
    (lambda, k, slope)
}

/// Fits the growth exponents of the suprema over the predicted support of
/// both mass-ratio quantities. Pure-power profiles are not twice
/// differentiable at the origin, so for fields not declared smooth the
/// suprema are taken over `1 <= r <= predicted_radius(t)`.
pub fn lambda_exponents(field: &CoefficientField, support: &SupportSpec, n: usize, t_samples: &[f64]) -> Result<MConditions> {
    if t_samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: t_samples.len(),
        });
    }
    let mut samples = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let rho = support.predicted_radius(t);
        let lo = if field.smooth { 0.0 } else { 1.0f64.min(0.5 * rho) };
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for j in 0..M_NODES {
            let r = lo + (rho - lo) * j as f64 / (M_NODES - 1) as f64;
            if field.a(r) <= 0.0 {
                return Err(Error::InvalidArgument(format!("a vanishes at r = {r}")));
            }
            let (q1, q2) = mass_ratio_terms(field, n, r);
            s1 = s1.max(q1);
            s2 = s2.max(q2);
        }
        samples.push(MSample {
            t,
            radius: rho,
            sup1: s1,
            sup2: s2,
        });
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let mut warnings = Vec::new();
    let (lambda1, k1, slope1) = fit_lambda(&ts, &samples.iter().map(|s| s.sup1).collect::<Vec<_>>(), "lambda1", &mut warnings);
    let (lambda2, k2, slope2) = fit_lambda(&ts, &samples.iter().map(|s| s.sup2).collect::<Vec<_>>(), "lambda2", &mut warnings);
    Ok(MConditions {
        lambda1,
        lambda2,
        k1,
        k2,
        slope1,
        slope2,
        fitted_from: format!(
            "max over {M_NODES} radii in the predicted support at {} times in [{}, {}]",
            ts.len(),
            ts[0],
            ts[ts.len() - 1]
        ),
        samples,
        warnings,
    })
}

/// Times `2^j`, `j = 0, 1, ...`, up to `t_max`.
pub fn dyadic_times(t_max: f64) -> Vec<f64> {
    (0..64).map(|j| 2f64.powi(j)).take_while(|t| *t <= t_max).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMatrixReport {
    /// Smallest eigenvalue of `(delta_ij/2) lap b - b_ij` over the samples.
    pub min_eigenvalue: f64,
    pub worst_r: f64,
    pub nonnegative_definite: bool,
    /// Outer-quarter log-log slopes of `a` and `b` in `1 + r`.
    pub a_slope: f64,
    pub b_slope: f64,
    pub bounded: bool,
    /// Outer-quarter slope of `(1+r)(|(a^1/2 / b)'| + |b'|/b)`.
    pub decay_slope: f64,
    pub decay_max: f64,
    pub decays: bool,
    pub pass: bool,
}

fn outer_slope(r_samples: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = r_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(*r), h.max(*r)));
    let cut = lo + 0.75 * (hi - lo);
    let (xs, ys): (Vec<f64>, Vec<f64>) = r_samples
        .iter()
        .filter(|r| **r >= cut)
        .map(|&r| ((1.0 + r).ln(), f(r).ln()))
        .filter(|(_, y)| y.is_finite())
        .unzip();
    least_squares(&xs, &ys).map(|f| f.0).unwrap_or(0.0)
}

/// Sampled check of the conditions on `a` and `b` that give the
/// L-infinity interpolation bound in three dimensions.
pub fn check_b_matrix_condition(field: &CoefficientField, n: usize, r_samples: &[f64]) -> BMatrixReport {
    check_b_matrix_condition_fns(&|r| field.a(r), &|r| field.b(r), n, r_samples)
}

/// As [`check_b_matrix_condition`] for bare radial functions. For radial `b`
/// the matrix has eigenvalue `lap b / 2 - b''` in the radial direction and
/// `lap b / 2 - b'/r` (multiplicity `n - 1`) tangentially.
pub fn check_b_matrix_condition_fns(
    a: &dyn Fn(f64) -> f64,
    b: &dyn Fn(f64) -> f64,
    n: usize,
    r_samples: &[f64],
) -> BMatrixReport {
    let (mut min_eig, mut worst_r, mut scale) = (f64::INFINITY, 0.0, 0.0f64);
    for &r in r_samples.iter().filter(|r| **r > 0.0) {
        let h = fd_step(r);
        let (d1, d2) = (fd1(b, r, h), fd2(b, r, h));
        let lap = d2 + (n as f64 - 1.0) * d1 / r;
        let radial = 0.5 * lap - d2;
        let eig = if n >= 2 { radial.min(0.5 * lap - d1 / r) } else { radial };
        scale = scale.max(d2.abs()).max((d1 / r).abs());
        if eig < min_eig {
            min_eig = eig;
            worst_r = r;
        }
    }
    let nonnegative_definite = min_eig >= -1e-8 * scale.max(f64::MIN_POSITIVE);
    let a_slope = outer_slope(r_samples, a);
    let b_slope = outer_slope(r_samples, b);
    let bounded = a_slope <= GROWTH_SLOPE && b_slope >= -GROWTH_SLOPE;
    let decay = |r: f64| {
        let h = fd_step(r);
        let q = |s: f64| a(s).sqrt() / b(s);
        (1.0 + r) * (fd1(&q, r, h).abs() + fd1(b, r, h).abs() / b(r))
    };
    let decay_max = r_samples.iter().map(|&r| decay(r)).fold(0.0f64, f64::max);
    let decay_slope = if decay_max == 0.0 { 0.0 } else { outer_slope(r_samples, decay) };
    let decays = decay_slope <= GROWTH_SLOPE;
    BMatrixReport {
        min_eigenvalue: min_eig,
        worst_r,
        nonnegative_definite,
        a_slope,
        b_slope,
        bounded,
        decay_slope,
        decay_max,
        decays,
        pass: nonnegative_definite && bounded && decays,
    }
}

/// Positive decay exponents implied by a subsolution exponent `mu` and slack
/// `delta`: quantities are expected to decay like `t^-exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponents {
    pub k: usize,
    /// `int a u^2`.
    pub l2_u: f64,
    /// `E(t; d^k u/dt^k)`.
    pub energy_k: f64,
    /// `int a u_t^2`.
    pub damping: f64,
    /// `||u||_inf^2`, from `||a^1/2 M u|| ||b^1/2 grad u||` with `M u ~ u_t`:
    /// half the damping rate plus half the first energy rate.
    pub linf_sq: f64,
}

pub fn predicted_exponents(mu: f64, delta: f64, k: usize) -> PredictedExponents {
    PredictedExponents {
        k,
        l2_u: mu - delta,
        energy_k: mu + 1.0 + 2.0 * k as f64 - delta,
        damping: mu + 2.0 - delta,
        linf_sq: mu + 1.5 - delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_power_law, Profile};
    use crate::support::build_q;

    fn unit_field() -> CoefficientField {
        CoefficientField::unit()
    }

    #[test]
    fn window_examples() {
        assert_eq!(omega_window(&PowerLawEnvelope::unit()).unwrap(), Some((0.0, 1.0)));
        let w = omega_window(&PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0)).unwrap().unwrap();
        assert!((w.0 - 0.5).abs() < 1e-15);
        assert_eq!(omega_window(&PowerLawEnvelope::with_exponents(1.2, 0.0, 0.0)).unwrap(), None);
        assert!(omega_window(&PowerLawEnvelope::with_exponents(0.0, 1.5, 0.5)).is_err());
    }

    #[test]
    fn weight_builder() {
        let w = build_weight(&PowerLawEnvelope::unit(), 0.5, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(w.theta, 1.5);
        let err = build_weight(&PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0), 0.3, 1.0, 2.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("below 0.5"), "{err}");
        let err = build_weight(&PowerLawEnvelope::unit(), 0.5, 1.0, 2.0, 0.4).unwrap_err();
        assert!(err.to_string().contains("4C0-2 <= 0"), "{err}");
    }

    #[test]
    fn constant_weight_is_limited_by_nu() {
        let env = PowerLawEnvelope::unit();
        let field = unit_field();
        let support = build_q(&env, 3.0).unwrap();
        let spec = build_weight(&env, 0.5, 1.0, 1.5, 1.0).unwrap();
        let (v, rep) = verify_weight(&spec, &env, &field, &support, 1000.0, &SamplingPlan::default()).unwrap();
        // (1+t)^(1/2) > 3 first holds past t = 8
        assert!(rep.t0 > 8.0 && rep.t0 < 8.5, "{}", rep.t0);
        assert_eq!(v.t0, Some(rep.t0));
        let below = rep.checks.iter().find(|c| c.name == "weight_below_a_over_c").unwrap();
        assert!(below.worst_margin > 0.0);
    }

    #[test]
    fn window_edge_fails_with_short_horizon() {
        let env = PowerLawEnvelope::with_exponents(0.6, 0.0, 0.0);
        let field = make_power_law(env, Profile::PurePower).unwrap();
        let support = build_q(&env, 3.0).unwrap();
        let ok = build_weight(&env, 0.7, 1.0, 1.7, 1.0).unwrap();
        let (_, rep) = verify_weight(&ok, &env, &field, &support, 1e6, &SamplingPlan::default()).unwrap();
        assert!(rep.t0.is_finite());
        let edge = build_weight(&env, 0.6001, 1.0, 1.6001, 1.0).unwrap();
        let err = verify_weight(&edge, &env, &field, &support, 50.0, &SamplingPlan::default()).unwrap_err();
        assert!(matches!(err, Error::WeightFailure(_)), "{err}");
    }

    #[test]
    fn unit_subsolution() {
        let field = unit_field();
        let spec = construct_radial_subsolution(&field, 3, 0.1, 100.0).unwrap();
        for r in [0.0, 0.3, 1.0, 17.2, 99.0] {
            let exact = r * r / 6.0;
            assert!((spec.value(r) - exact).abs() <= 1e-12 * exact.max(1.0), "{r}");
            assert!((spec.derivative(r) - r / 3.0).abs() <= 1e-12 * r.max(1.0));
        }
        assert!((spec.mu_numeric - 1.5).abs() < 1e-9);
        assert_eq!(spec.mu_formula, 1.0);
        let samples: Vec<f64> = (0..=400).map(|i| i as f64 * 0.25).collect();
        let rep = check_hypothesis_a(&spec, &field, &samples);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.residual < 1e-8, "{}", rep.residual);
    }

    #[test]
    fn closed_form_counterexamples() {
        let field = unit_field();
        let samples: Vec<f64> = (1..=400).map(|i| i as f64 * 0.25).collect();
        let neg = SubsolutionSpec::closed_form(Arc::new(|r| (-r * r, -2.0 * r)), &field, 3, 0.1, 100.0).unwrap();
        let rep = check_hypothesis_a(&neg, &field, &samples);
        assert!(!rep.nonnegative.pass);
        let half = SubsolutionSpec::closed_form(Arc::new(|r| (r * r / 12.0, r / 6.0)), &field, 3, 0.1, 100.0).unwrap();
        let rep = check_hypothesis_a(&half, &field, &samples);
        assert!(rep.nonnegative.pass && rep.growth.pass);
        assert!(!rep.subsolution.pass);
        assert!((rep.subsolution.value + 0.5).abs() < 1e-8);
    }

    #[test]
    fn power_law_subsolution_residual() {
        let env = PowerLawEnvelope::with_exponents(0.4, 0.5, 0.0);
        let field = make_power_law(env, Profile::PurePower).unwrap();
        let spec = construct_radial_subsolution(&field, 3, 0.1, 400.0).unwrap();
        let samples: Vec<f64> = (1..=800).map(|i| i as f64 * 0.5).collect();
        let rep = check_hypothesis_a(&spec, &field, &samples);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.residual < 1e-8, "{}", rep.residual);
        assert!((spec.mu_formula - 1.6 / 1.1).abs() < 1e-12);
        assert!(construct_radial_subsolution(
            &make_power_law(PowerLawEnvelope::with_exponents(0.5, 1.5, 0.0), Profile::PurePower).unwrap(),
            3,
            0.1,
            10.0
        )
        .is_err());
    }

    #[test]
    fn lambda_examples() {
        let env = PowerLawEnvelope::unit();
        let support = build_q(&env, 1.0).unwrap();
        let ts = dyadic_times(256.0);
        let mc = lambda_exponents(&unit_field(), &support, 3, &ts).unwrap();
        assert_eq!((mc.lambda1, mc.lambda2), (0.0, 0.0));
        assert!(lambda_exponents(&unit_field(), &support, 3, &[1.0]).is_err());

        let env = PowerLawEnvelope::with_exponents(0.5, 0.0, 0.0);
        let field = make_power_law(env, Profile::PurePower).unwrap();
        let support = build_q(&env, 1.0).unwrap();
        let mc = lambda_exponents(&field, &support, 3, &ts).unwrap();
        // sup grows like (3+t)^(1/2), slightly slower than (1+t)^(1/2) at early times
        assert!(mc.lambda1 > 0.35 && mc.lambda1 <= 0.5, "{}", mc.lambda1);
        assert!(mc.lambda2 <= 0.05, "{}", mc.lambda2);
        for s in &mc.samples {
            assert!(s.sup1 <= mc.k1 * (1.0 + s.t).powf(mc.lambda1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn b_matrix_examples() {
        let samples: Vec<f64> = (1..=400).map(|i| i as f64 * 0.5).collect();
        let one = |_: f64| 1.0;
        let rep = check_b_matrix_condition_fns(&one, &one, 3, &samples);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.min_eigenvalue, 0.0);
        let sq = |r: f64| r * r;
        let rep = check_b_matrix_condition_fns(&one, &sq, 3, &samples);
        assert!(rep.nonnegative_definite);
        assert!((rep.min_eigenvalue - 1.0).abs() < 1e-6, "{}", rep.min_eigenvalue);
        let inv = |r: f64| 1.0 / (1.0 + r);
        let rep = check_b_matrix_condition_fns(&one, &inv, 3, &samples);
        assert!(!rep.bounded);
        assert!(!rep.pass);
    }

    #[test]
    fn exponent_arithmetic() {
        let p0 = predicted_exponents(1.0, 0.1, 0);
        let p1 = predicted_exponents(1.0, 0.1, 1);
        assert!((p0.energy_k - 1.9).abs() < 1e-15);
        assert!((p1.energy_k - 3.9).abs() < 1e-15);
        assert_eq!(p1.energy_k - p0.energy_k, 2.0);
        assert!((p0.damping - 2.9).abs() < 1e-15);
        assert!((p0.l2_u - 0.9).abs() < 1e-15);
    }
}
