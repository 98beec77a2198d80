//! Leapfrog evolution of `c u_tt - div(b grad u) + a u_t = h` on radial
//! (dimension-parametric) and 1-D Cartesian grids.
//!
//! The spatial operator is in conservative flux form over dual cells:
//!
//! ```text
//! (L u)_i = ( F_{i+1/2} - F_{i-1/2} ) / w_i,   F_f = s_f b_f (u_{i+1} - u_i) / dx^2
//! ```
//!
//! where `w_i` is the measure of the dual cell around node `i` and `s_f` the
//! measure of face `f` times `dx`. No flux crosses `r = 0`; the outer node is
//! homogeneous Dirichlet. With these weights `sum_i w_i v_i (L u)_i` equals
//! `-sum_f s_f b_f (dv)(du) / dx^2`, so the discrete energy built from the
//! same weights obeys an exact semi-discrete energy identity.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientField, InitialData, SourceField};
use crate::error::{Error, Result};
use crate::support::{support_radius, SupportSpec, SUPPORT_EPSILON};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Nodes `r_i = i dx` on `[0, r_max]`, symmetric at the origin.
    Radial,
    /// Nodes `x_i = i dx` on `[0, r_max]`, Dirichlet at both ends.
    Cartesian1d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: GridKind,
    /// Spatial dimension (1 for Cartesian grids).
    pub n: usize,
    pub r_max: f64,
    pub m: usize,
    pub dx: f64,
}

impl Grid {
    pub fn radial(n: usize, r_max: f64, m: usize) -> Result<Grid> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Self::build(GridKind::Radial, n, r_max, m)
    }

    pub fn cartesian1d(r_max: f64, m: usize) -> Result<Grid> {
        Self::build(GridKind::Cartesian1d, 1, r_max, m)
    }

    fn build(kind: GridKind, n: usize, r_max: f64, m: usize) -> Result<Grid> {
        if m < MIN_NODES {
            return Err(Error::InvalidArgument(format!("need at least {MIN_NODES} nodes, got {m}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!("domain radius {r_max} must be positive")));
        }
        Ok(Grid {
            kind,
            n,
            r_max,
            m,
            dx: r_max / (m - 1) as f64,
        })
    }

    /// Radial grid whose radius is `1.1` times the predicted cone radius at `t_end`.
    pub fn sized_for(n: usize, support: &SupportSpec, t_end: f64, m: usize) -> Result<Grid> {
        Self::radial(n, support.grid_radius(t_end), m)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Position of the face between nodes `i` and `i + 1`.
    #[inline]
    pub fn face(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    /// Nodes updated by the scheme; the rest are held at zero.
    pub fn active(&self) -> Range<usize> {
        match self.kind {
            GridKind::Radial => 0..self.m - 1,
            GridKind::Cartesian1d => 1..self.m - 1,
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let active = self.active();
        (0..self.m)
            .map(|i| if active.contains(&i) { f(self.node(i)) } else { 0.0 })
            .collect()
    }
}

/// Area of the unit sphere in `R^n` (2 for `n = 1`).
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// Grid plus coefficient samples and quadrature weights.
#[derive(Clone)]
pub struct Discretization {
    pub grid: Grid,
    /// Dual-cell measure around each node.
    pub node_weight: Vec<f64>,
    /// Face measure times `dx`, one per face `i + 1/2`.
    pub face_weight: Vec<f64>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub b_face: Vec<f64>,
    flux: Vec<f64>,
    field: CoefficientField,
}

impl fmt::Debug for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Discretization").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl Discretization {
    pub fn new(grid: &Grid, field: &CoefficientField) -> Result<Self> {
        let m = grid.m;
        let dx = grid.dx;
        let (node_weight, face_weight): (Vec<f64>, Vec<f64>) = match grid.kind {
            GridKind::Cartesian1d => (vec![dx; m], vec![dx; m - 1]),
            GridKind::Radial => {
                let n = grid.n;
                let area = sphere_area(n);
                let w = (0..m)
                    .map(|i| {
                        let lo = (grid.node(i) - 0.5 * dx).max(0.0);
                        let hi = grid.node(i) + 0.5 * dx;
                        area / n as f64 * (hi.powi(n as i32) - lo.powi(n as i32))
                    })
                    .collect();
                let s = (0..m - 1)
                    .map(|i| area * grid.face(i).powi(n as i32 - 1) * dx)
                    .collect();
                (w, s)
            }
        };
        let a = grid.nodes().iter().map(|&r| field.a(r)).collect::<Vec<_>>();
        let c = grid.nodes().iter().map(|&r| field.c(r)).collect::<Vec<_>>();
        let b_face = (0..m - 1).map(|i| field.b(grid.face(i))).collect::<Vec<_>>();
        for (i, (&ai, &ci)) in a.iter().zip(&c).enumerate() {
            if !(ai.is_finite() && ai >= 0.0 && ci.is_finite() && ci > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "need a >= 0 and c > 0 at r = {} (a = {ai}, c = {ci})",
                    grid.node(i)
                )));
            }
        }
        if let Some(i) = b_face.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidArgument(format!("need b > 0 at r = {}", grid.face(i))));
        }
        let flux = face_weight
            .iter()
            .zip(&b_face)
            .map(|(s, b)| s * b / (dx * dx))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            node_weight,
            face_weight,
            a,
            c,
            b_face,
            flux,
            field: field.clone(),
        })
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.grid.m
    }

    pub fn is_empty(&self) -> bool {
        self.grid.m == 0
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid != &self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.m,
                got: grid.m,
            });
        }
        Ok(())
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.m {
            return Err(Error::GridMismatch {
                expected: self.grid.m,
                got: len,
            });
        }
        Ok(())
    }

    /// `out = L u` on active nodes, zero elsewhere.
    pub fn apply_l_into(&self, u: &[f64], out: &mut [f64]) {
        let m = self.grid.m;
        debug_assert_eq!(u.len(), m);
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in self.grid.active() {
            let right = self.flux[i] * (u[i + 1] - u[i]);
            let left = if i > 0 { self.flux[i - 1] * (u[i] - u[i - 1]) } else { 0.0 };
            out[i] = (right - left) / self.node_weight[i];
        }
    }

    pub fn apply_l(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_l_into(u, &mut out);
        out
    }

    /// Gershgorin bound on the spectrum of `c^-1 L` at each active node.
    fn row_bound(&self, i: usize) -> f64 {
        let left = if i > 0 { self.flux[i - 1] } else { 0.0 };
        2.0 * (left + self.flux[i]) / (self.node_weight[i] * self.c[i])
    }

    /// Hash of the sampled coefficients, recorded with every trajectory.
    pub fn coefficient_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.grid.m.hash(&mut h);
        self.grid.n.hash(&mut h);
        self.grid.dx.to_bits().hash(&mut h);
        for v in self.a.iter().chain(&self.c).chain(&self.b_face) {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Largest stable leapfrog step scaled by `cfl`.
///
/// Uses `2 / sqrt(G_i)` with `G_i` the Gershgorin row bound of `c^-1 L`, which
/// reduces to `dx sqrt(c/b)` for interior nodes and also covers the origin
/// cell of radial grids.
pub fn stable_dt(op: &Discretization, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidArgument(format!("cfl = {cfl} must lie in (0, 1]")));
    }
    let min = op
        .grid
        .active()
        .map(|i| 2.0 / op.row_bound(i).sqrt())
        .fold(f64::INFINITY, f64::min);
    Ok(cfl * min)
}

/// Two-level leapfrog state.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
}

impl State {
    /// State at `t = 0` with the Taylor start
    /// `u(-dt) = u0 - dt u1 + dt^2/2 u_tt(0)`, `c u_tt(0) = L u0 - a u1 + h(0)`.
    pub fn initial(u0: &[f64], u1: &[f64], op: &Discretization, source: &SourceField, dt: f64) -> Result<State> {
        op.check_len(u0.len())?;
        op.check_len(u1.len())?;
        let lu = op.apply_l(u0);
        let grid = &op.grid;
        let mut u_prev = vec![0.0; grid.m];
        let mut u = vec![0.0; grid.m];
        for i in grid.active() {
            let h = source.value(grid.node(i), 0.0);
            let utt = (lu[i] - op.a[i] * u1[i] + h) / op.c[i];
            u[i] = u0[i];
            u_prev[i] = u0[i] - dt * u1[i] + 0.5 * dt * dt * utt;
        }
        Ok(State { t: 0.0, u, u_prev })
    }
}

/// Per-node factors of the leapfrog update with time-centred damping.
struct Stepper<'a> {
    op: &'a Discretization,
    source: &'a SourceField,
    dt: f64,
    mass: Vec<f64>,
    drag: Vec<f64>,
    inv_den: Vec<f64>,
    lu: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a Discretization, source: &'a SourceField, dt: f64) -> Self {
        let mass: Vec<f64> = op.c.iter().map(|c| c / (dt * dt)).collect();
        let drag: Vec<f64> = op.a.iter().map(|a| a / (2.0 * dt)).collect();
        let inv_den = mass.iter().zip(&drag).map(|(m, d)| 1.0 / (m + d)).collect();
        Self {
            op,
            source,
            dt,
            mass,
            drag,
            inv_den,
            lu: vec![0.0; op.grid.m],
        }
    }

    /// Writes `u(t + dt)` into `next` given `u(t)` and `u(t - dt)`.
    fn advance(&mut self, u: &[f64], u_prev: &[f64], t: f64, next: &mut [f64]) -> Result<()> {
        let grid = &self.op.grid;
        self.op.apply_l_into(u, &mut self.lu);
        let zero_source = self.source.is_zero();
        for i in grid.active() {
            let h = if zero_source { 0.0 } else { self.source.value(grid.node(i), t) };
            let rhs = self.mass[i] * (2.0 * u[i] - u_prev[i]) + self.drag[i] * u_prev[i] + self.lu[i] + h;
            let v = rhs * self.inv_den[i];
            if !v.is_finite() {
                return Err(Error::Instability {
                    node: i,
                    r: grid.node(i),
                    t: t + self.dt,
                });
            }
            next[i] = v;
        }
        Ok(())
    }
}

/// One leapfrog step:
/// `c (u+ - 2u + u-)/dt^2 + a (u+ - u-)/(2dt) = L u + h(t)`, solved nodewise.
pub fn step(state: &State, op: &Discretization, source: &SourceField, dt: f64) -> Result<State> {
    op.check_len(state.u.len())?;
    let mut next = vec![0.0; op.grid.m];
    Stepper::new(op, source, dt).advance(&state.u, &state.u_prev, state.t, &mut next)?;
    Ok(State {
        t: state.t + dt,
        u: next,
        u_prev: state.u.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Cadence {
    EveryStep,
    Uniform { interval: f64 },
    /// Geometric spacing: `per_decade` snapshots per factor of ten in time,
    /// starting from `t_min`.
    PerDecade { per_decade: usize, t_min: f64 },
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::PerDecade {
            per_decade: 64,
            t_min: 0.1,
        }
    }
}

impl Cadence {
    /// Sorted, de-duplicated step indices in `0..=steps`, always containing
    /// the first and last step.
    pub fn steps(&self, steps: usize, dt: f64) -> Vec<usize> {
        let mut out = vec![0, steps];
        let t_end = steps as f64 * dt;
        match *self {
            Cadence::EveryStep => out.extend(0..=steps),
            Cadence::Uniform { interval } => {
                if interval > 0.0 {
                    let count = (t_end / interval + 1e-9).floor() as usize;
                    out.extend((0..=count).map(|k| ((k as f64 * interval) / dt).round() as usize));
                }
            }
            Cadence::PerDecade { per_decade, t_min } => {
                if per_decade > 0 && t_min > 0.0 {
                    let mut j = 0;
                    loop {
                        let t = t_min * 10f64.powf(j as f64 / per_decade as f64);
                        if t > t_end * (1.0 + 1e-12) {
                            break;
                        }
                        out.push(((t / dt).round() as usize).max(1));
                        j += 1;
                    }
                }
            }
        }
        out.retain(|&s| s <= steps);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub cadence: Cadence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    /// Centred difference `(u(t+dt) - u(t-dt)) / 2dt`; exactly `u1` at `t = 0`.
    pub ut: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    /// Which time derivative of the solution this run evolves.
    pub order: usize,
    pub dt: f64,
    pub cfl: f64,
    pub coefficient_hash: u64,
    pub snapshots: Vec<Snapshot>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Evolves nodal data `(u0, u1)`; `order` labels the cascade level.
pub fn run_nodal(
    u0: &[f64],
    u1: &[f64],
    op: &Discretization,
    source: &SourceField,
    cfg: &RunConfig,
    order: usize,
) -> Result<Trajectory> {
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end = {} must be finite and >= 0", cfg.t_end)));
    }
    let dt_max = stable_dt(op, cfg.cfl)?;
    let steps = (cfg.t_end / dt_max - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { dt_max } else { cfg.t_end / steps as f64 };
    let grid = &op.grid;
    let mut traj = Trajectory {
        grid: grid.clone(),
        order,
        dt,
        cfl: cfg.cfl,
        coefficient_hash: op.coefficient_hash(),
        snapshots: Vec::new(),
        warnings: Vec::new(),
    };
    let snap_steps = cfg.cadence.steps(steps, dt);
    let init = State::initial(u0, u1, op, source, dt)?;
    traj.snapshots.push(Snapshot {
        t: 0.0,
        u: init.u.clone(),
        ut: grid.active().fold(vec![0.0; grid.m], |mut v, i| {
            v[i] = u1[i];
            v
        }),
    });
    if steps == 0 {
        return Ok(traj);
    }
    let mut stepper = Stepper::new(op, source, dt);
    let (mut prev, mut cur) = (init.u_prev, init.u);
    let mut next = vec![0.0; grid.m];
    let mut pending = snap_steps.iter().copied().filter(|&s| s > 0).peekable();
    let mut overflow_warned = false;
    for s in 0..=steps {
        if pending.peek().is_none() {
            break;
        }
        let t = s as f64 * dt;
        stepper.advance(&cur, &prev, t, &mut next)?;
        if pending.peek() == Some(&s) {
            pending.next();
            let ut = next.iter().zip(&prev).map(|(p, m)| (p - m) / (2.0 * dt)).collect();
            let radius = support_radius(&cur, grid.dx, SUPPORT_EPSILON);
            if !overflow_warned && radius >= 0.95 * grid.r_max {
                overflow_warned = true;
                traj.warnings.push(format!(
                    "cone overflow: support radius {radius:.4} reached 95% of r_max = {:.4} at t = {t:.4}",
                    grid.r_max
                ));
            }
            traj.snapshots.push(Snapshot { t, u: cur.clone(), ut });
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(traj)
}

pub fn run(data: &InitialData, op: &Discretization, source: &SourceField, cfg: &RunConfig) -> Result<Trajectory> {
    let u0 = op.grid.sample(|r| (data.u0)(r));
    let u1 = op.grid.sample(|r| (data.u1)(r));
    run_nodal(&u0, &u1, op, source, cfg, 0)
}

/// Nodal initial data `(w_j, w_{j+1})`, `j = 0..=k`, of the evolutions for
/// `d^j u / dt^j`, from `w_{j+2} = c^-1 (L w_j - a w_{j+1} + d^j h/dt^j (0))`.
pub fn cascade_initial_data(
    data: &InitialData,
    op: &Discretization,
    source: &SourceField,
    k: usize,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if k > source.time_derivative_order {
        return Err(Error::MissingDerivative {
            requested: k,
            available: source.time_derivative_order,
        });
    }
    let grid = &op.grid;
    let mut w = vec![
        grid.sample(|r| (data.u0)(r)),
        grid.sample(|r| (data.u1)(r)),
    ];
    for j in 0..k {
        let lw = op.apply_l(&w[j]);
        let mut next = vec![0.0; grid.m];
        for i in grid.active() {
            let h = source.derivative(j, grid.node(i), 0.0)?;
            next[i] = (lw[i] - op.a[i] * w[j + 1][i] + h) / op.c[i];
        }
        w.push(next);
    }
    Ok((0..=k).map(|j| (w[j].clone(), w[j + 1].clone())).collect())
}

/// Runs the evolutions for `u, u_t, ..., d^k u/dt^k` one after another.
pub fn run_cascade(
    data: &InitialData,
    op: &Discretization,
    source: &SourceField,
    cfg: &RunConfig,
    k: usize,
) -> Result<Vec<Trajectory>> {
    cascade_initial_data(data, op, source, k)?
        .iter()
        .enumerate()
        .map(|(j, (v0, v1))| run_nodal(v0, v1, op, &source.shifted(j)?, cfg, j))
        .collect()
}

/// Radial profile with closed-form first and second derivatives.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

/// `(1 - (r/radius)^2)^power` inside `radius`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialBump {
    pub radius: f64,
    pub power: i32,
}

impl RadialProfile for PolynomialBump {
    fn value(&self, r: f64) -> f64 {
        let q = 1.0 - (r / self.radius).powi(2);
        if q <= 0.0 { 0.0 } else { q.powi(self.power) }
    }

    fn d1(&self, r: f64) -> f64 {
        let q = 1.0 - (r / self.radius).powi(2);
        if q <= 0.0 {
            return 0.0;
        }
        let p = self.power as f64;
        p * q.powi(self.power - 1) * (-2.0 * r / (self.radius * self.radius))
    }

    fn d2(&self, r: f64) -> f64 {
        let q = 1.0 - (r / self.radius).powi(2);
        if q <= 0.0 {
            return 0.0;
        }
        let p = self.power as f64;
        let r2 = self.radius * self.radius;
        p * (p - 1.0) * q.powi(self.power - 2) * (4.0 * r * r / (r2 * r2))
            + p * q.powi(self.power - 1) * (-2.0 / r2)
    }
}

/// Spatially constant profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl RadialProfile for ConstantProfile {
    fn value(&self, _: f64) -> f64 {
        self.0
    }
    fn d1(&self, _: f64) -> f64 {
        0.0
    }
    fn d2(&self, _: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    Cos { omega: f64 },
    Exp { rate: f64 },
    Constant,
}

impl TimeFactor {
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        match *self {
            TimeFactor::Cos { omega } => {
                omega.powi(k as i32) * (omega * t + k as f64 * std::f64::consts::FRAC_PI_2).cos()
            }
            TimeFactor::Exp { rate } => rate.powi(k as i32) * (rate * t).exp(),
            TimeFactor::Constant => {
                if k == 0 { 1.0 } else { 0.0 }
            }
        }
    }
}

/// Separable manufactured solution `u*(r, t) = phi(r) T(t)`.
#[derive(Clone)]
pub struct Manufactured {
    pub spatial: Arc<dyn RadialProfile>,
    pub time: TimeFactor,
}

impl Manufactured {
    pub fn value(&self, r: f64, t: f64) -> f64 {
        self.spatial.value(r) * self.time.derivative(0, t)
    }

    pub fn time_derivative(&self, k: usize, r: f64, t: f64) -> f64 {
        self.spatial.value(r) * self.time.derivative(k, t)
    }
}

/// Fourth-order central difference of a radial function, evaluated through
/// its even extension.
pub fn radial_derivative(f: &dyn Fn(f64) -> f64, r: f64) -> f64 {
    let h = 1e-4 * (1.0 + r);
    let g = |x: f64| f(x.abs());
    (-g(r + 2.0 * h) + 8.0 * g(r + h) - 8.0 * g(r - h) + g(r - 2.0 * h)) / (12.0 * h)
}

/// `div(b grad phi)` for a radial `phi` in dimension `n`.
fn radial_divergence(profile: &dyn RadialProfile, field: &CoefficientField, n: usize, r: f64) -> f64 {
    let b = field.b(r);
    let d2 = profile.d2(r);
    if r < 1e-12 {
        // phi'(0) = 0 for an even profile, and (n-1) phi'/r -> (n-1) phi''(0)
        return b * d2 * n as f64;
    }
    let db = radial_derivative(&|x| field.b(x), r);
    b * d2 + (db + (n as f64 - 1.0) * b / r) * profile.d1(r)
}

/// `h = c d_tt u* - div(b grad u*) + a d_t u*`, with every time derivative
/// available in closed form.
pub fn manufactured_source(u_star: &Manufactured, field: &CoefficientField, n: usize) -> SourceField {
    let u_star = u_star.clone();
    let field = field.clone();
    SourceField::new(
        usize::MAX,
        Arc::new(move |k, r, t| {
            let phi = u_star.spatial.value(r);
            let time = &u_star.time;
            field.c(r) * phi * time.derivative(k + 2, t)
                - radial_divergence(u_star.spatial.as_ref(), &field, n, r) * time.derivative(k, t)
                + field.a(r) * phi * time.derivative(k + 1, t)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_power_law, PowerLawEnvelope, Profile};

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::radial(3, 10.0, 15).is_err());
        assert!(Grid::radial(0, 10.0, 64).is_err());
        assert!(Grid::cartesian1d(-1.0, 64).is_err());
        let g = Grid::radial(3, 10.0, 101).unwrap();
        assert!((g.dx - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unit_speed_dt_on_cartesian_grid() {
        let grid = Grid::cartesian1d(10.0, 1001).unwrap();
        let op = Discretization::new(&grid, &CoefficientField::unit()).unwrap();
        let dt = stable_dt(&op, 0.8).unwrap();
        assert!((dt - 0.008).abs() < 1e-12, "{dt}");
        assert!(stable_dt(&op, 0.0).is_err());
        assert!(stable_dt(&op, 1.5).is_err());
    }

    #[test]
    fn fastest_node_sets_dt() {
        let env = PowerLawEnvelope::with_exponents(0.0, 1.0, 0.0);
        let field = make_power_law(env, Profile::PurePower).unwrap();
        let grid = Grid::cartesian1d(99.0, 9901).unwrap();
        let op = Discretization::new(&grid, &field).unwrap();
        let dt = stable_dt(&op, 1.0).unwrap();
        // speed sqrt(b) = 10 at r = r_max
        let expected = grid.dx / 10.0;
        assert!((dt / expected - 1.0).abs() < 1e-3, "{dt} vs {expected}");
    }

    #[test]
    fn radial_laplacian_of_quadratic() {
        for n in 1..=4 {
            let grid = Grid::radial(n, 5.0, 101).unwrap();
            let op = Discretization::new(&grid, &CoefficientField::unit()).unwrap();
            let u: Vec<f64> = grid.nodes().iter().map(|r| r * r).collect();
            let lu = op.apply_l(&u);
            for i in 0..grid.m - 1 {
                let want = 2.0 * n as f64;
                // the dual-cell volume carries an O(dx^2) correction away from 0
                assert!((lu[i] - want).abs() < 0.05 * want * (grid.dx / grid.node(i).max(grid.dx)), "n={n} i={i} {}", lu[i]);
            }
        }
    }

    #[test]
    fn zero_preservation() {
        let grid = Grid::radial(3, 5.0, 64).unwrap();
        let op = Discretization::new(&grid, &CoefficientField::unit()).unwrap();
        let state = State {
            t: 0.0,
            u: vec![0.0; 64],
            u_prev: vec![0.0; 64],
        };
        let next = step(&state, &op, &SourceField::zero(), 0.01).unwrap();
        assert!(next.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn instability_is_reported() {
        let grid = Grid::cartesian1d(1.0, 32).unwrap();
        let op = Discretization::new(&grid, &CoefficientField::unit()).unwrap();
        let mut u = vec![0.0; 32];
        u[10] = f64::MAX;
        u[11] = -f64::MAX;
        let state = State {
            t: 0.5,
            u,
            u_prev: vec![0.0; 32],
        };
        let err = step(&state, &op, &SourceField::zero(), 0.01).unwrap_err();
        assert!(matches!(err, Error::Instability { .. }), "{err}");
    }

    #[test]
    fn cadence_steps() {
        assert_eq!(Cadence::EveryStep.steps(3, 0.1), vec![0, 1, 2, 3]);
        assert_eq!(Cadence::Uniform { interval: 0.5 }.steps(10, 0.1), vec![0, 5, 10]);
        let s = Cadence::PerDecade { per_decade: 4, t_min: 1.0 }.steps(1000, 0.1);
        assert_eq!(s.first(), Some(&0));
        assert_eq!(s.last(), Some(&1000));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn t_end_zero_gives_single_snapshot() {
        let grid = Grid::radial(3, 5.0, 64).unwrap();
        let op = Discretization::new(&grid, &CoefficientField::unit()).unwrap();
        let data = InitialData::named(crate::coefficients::InitialShape::GaussianBump, 1.0, 1.0, 0.3).unwrap();
        let cfg = RunConfig {
            cfl: 0.5,
            t_end: 0.0,
            cadence: Cadence::default(),
        };
        let traj = run(&data, &op, &SourceField::zero(), &cfg).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        let s = &traj.snapshots[0];
        for i in 0..grid.m - 1 {
            assert_eq!(s.u[i], (data.u0)(grid.node(i)));
            assert_eq!(s.ut[i], (data.u1)(grid.node(i)));
        }
    }

    #[test]
    fn cascade_identity_and_first_level() {
        let grid = Grid::radial(3, 5.0, 128).unwrap();
        let field = CoefficientField::unit();
        let op = Discretization::new(&grid, &field).unwrap();
        let data = InitialData::named(crate::coefficients::InitialShape::GaussianBump, 1.0, 2.0, 0.0).unwrap();
        let src = SourceField::zero();
        let c0 = cascade_initial_data(&data, &op, &src, 0).unwrap();
        assert_eq!(c0.len(), 1);
        assert_eq!(c0[0].0, grid.sample(|r| (data.u0)(r)));
        let c1 = cascade_initial_data(&data, &op, &src, 1).unwrap();
        let lu0 = op.apply_l(&c1[0].0);
        assert_eq!(c1[1].0, c1[0].1);
        for i in grid.active() {
            assert!((c1[1].1[i] - lu0[i]).abs() < 1e-14);
        }
        let limited = SourceField::decaying_pulse(1.0, 1.0, 1.0, 2);
        assert!(matches!(
            cascade_initial_data(&data, &op, &limited, 3),
            Err(Error::MissingDerivative { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn manufactured_sources() {
        let field = CoefficientField::unit();
        let zero = Manufactured {
            spatial: Arc::new(ConstantProfile(0.0)),
            time: TimeFactor::Cos { omega: 1.0 },
        };
        let h = manufactured_source(&zero, &field, 3);
        assert_eq!(h.value(0.7, 1.3), 0.0);

        let env = PowerLawEnvelope::with_exponents(0.0, 0.8, 0.0);
        let bfield = make_power_law(env, Profile::PurePower).unwrap();
        let decay = Manufactured {
            spatial: Arc::new(ConstantProfile(1.0)),
            time: TimeFactor::Exp { rate: -1.0 },
        };
        let h = manufactured_source(&decay, &bfield, 3);
        for (r, t) in [(0.0, 0.0), (2.0, 1.0), (10.0, 3.0)] {
            assert!(h.value(r, t).abs() < 1e-14);
        }

        // a = b = c = 1: h = -phi cos t - lap(phi) cos t - phi sin t
        let phi = PolynomialBump { radius: 1.0, power: 4 };
        let ms = Manufactured {
            spatial: Arc::new(phi),
            time: TimeFactor::Cos { omega: 1.0 },
        };
        let h = manufactured_source(&ms, &field, 3);
        for (r, t) in [(0.0f64, 0.4f64), (0.3, 1.0), (0.8, 2.5), (1.2, 0.1)] {
            let lap = if r == 0.0 { 3.0 * phi.d2(0.0) } else { phi.d2(r) + 2.0 / r * phi.d1(r) };
            let want = -phi.value(r) * t.cos() - lap * t.cos() - phi.value(r) * t.sin();
            assert!((h.value(r, t) - want).abs() < 1e-12, "r={r} t={t}");
        }
    }

    #[test]
    fn polynomial_bump_derivatives() {
        let p = PolynomialBump { radius: 1.3, power: 4 };
        for r in [0.1, 0.5, 1.0] {
            let fd1 = radial_derivative(&|x| p.value(x), r);
            let fd2 = radial_derivative(&|x| p.d1(x.abs()) * x.signum(), r);
            assert!((p.d1(r) - fd1).abs() < 1e-9);
            assert!((p.d2(r) - fd2).abs() < 1e-8);
        }
    }
}
