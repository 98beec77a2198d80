//! Finite speed of propagation: the radial speed function `q`, the cone it
//! predicts for compactly supported data, and checks of that cone on
//! computed trajectories.

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientField, PowerLawEnvelope};
use crate::energetics::energy_density;
use crate::error::{Error, Result};
use crate::solver::{Discretization, Trajectory};

/// Default relative amplitude threshold for [`support_radius`].
pub const SUPPORT_EPSILON: f64 = 1e-8;
/// Default relative energy tolerance for [`verify_cone`].
pub const CONE_TOLERANCE: f64 = 1e-6;

/// `q(r) = scale * (1+r)^power` with `power = 1 - (beta+gamma)/2` and
/// `scale = sqrt(c0/b1) * 2/(2-beta-gamma)`, so that
/// `q'(r) = sqrt(c0/b1) (1+r)^(-(beta+gamma)/2) <= sqrt(c/b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    pub q0: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Support radius of the initial data.
    pub radius: f64,
    pub scale: f64,
    pub power: f64,
}

pub fn build_q(envelope: &PowerLawEnvelope, radius: f64) -> Result<SupportSpec> {
    let s = envelope.beta + envelope.gamma;
    if !(s < 2.0) {
        return Err(Error::InvalidArgument(format!("beta + gamma = {s} must be below 2")));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad data radius {radius}")));
    }
    let power = 1.0 - 0.5 * s;
    let scale = (envelope.c0 / envelope.b1).sqrt() * 2.0 / (2.0 - s);
    // (1+r)^p / r^p decreases to 1, so scale * r^p <= q(r) for every r and no
    // larger constant works uniformly.
    Ok(SupportSpec {
        q0: scale,
        beta: envelope.beta,
        gamma: envelope.gamma,
        radius,
        scale,
        power,
    })
}

impl SupportSpec {
    pub fn q(&self, r: f64) -> f64 {
        self.scale * (1.0 + r).powf(self.power)
    }

    pub fn q_prime(&self, r: f64) -> f64 {
        self.scale * self.power * (1.0 + r).powf(self.power - 1.0)
    }

    pub fn q_of_radius(&self) -> f64 {
        self.q(self.radius)
    }

    /// Radius beyond which the solution vanishes at time `t`.
    pub fn predicted_radius(&self, t: f64) -> f64 {
        ((t + self.q_of_radius()) / self.q0).powf(1.0 / self.power)
    }

    /// Smallest ratio `sqrt(c/b) / q'` over the samples; at least one when the
    /// speed condition holds.
    pub fn speed_margin(&self, field: &CoefficientField, r_samples: &[f64]) -> f64 {
        r_samples
            .iter()
            .map(|&r| (field.c(r) / field.b(r)).sqrt() / self.q_prime(r))
            .fold(f64::INFINITY, f64::min)
    }

    /// `r_max = 1.1 * predicted_radius(t_end)`.
    pub fn grid_radius(&self, t_end: f64) -> f64 {
        1.1 * self.predicted_radius(t_end)
    }
}

pub fn predicted_radius(spec: &SupportSpec, t: f64) -> f64 {
    spec.predicted_radius(t)
}

/// Largest node radius with `|u| >= epsilon * max|u|`; zero for a zero profile.
pub fn support_radius(u: &[f64], dx: f64, epsilon: f64) -> f64 {
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let cut = epsilon * peak;
    u.iter()
        .rposition(|v| v.abs() >= cut)
        .map(|i| i as f64 * dx)
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeEntry {
    pub snapshot_t: f64,
    pub predicted_radius: f64,
    pub measured_radius: f64,
    pub outside_fraction: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub tolerance: f64,
    pub entries: Vec<ConeEntry>,
    pub verdict: ConeVerdict,
}

impl ConeReport {
    pub fn worst_fraction(&self) -> f64 {
        self.entries.iter().map(|e| e.outside_fraction).fold(0.0, f64::max)
    }
}

/// Fraction of each snapshot's energy lying outside the predicted cone.
pub fn verify_cone(traj: &Trajectory, op: &Discretization, spec: &SupportSpec, tolerance: f64) -> Result<ConeReport> {
    op.check_grid(&traj.grid)?;
    let grid = &traj.grid;
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    let mut overflow = false;
    for snap in &traj.snapshots {
        let rho = spec.predicted_radius(snap.t);
        if rho >= grid.r_max {
            overflow = true;
        }
        let (node_e, face_e) = energy_density(&snap.u, &snap.ut, op);
        let total: f64 = node_e.iter().sum::<f64>() + face_e.iter().sum::<f64>();
        let outside: f64 = node_e
            .iter()
            .enumerate()
            .filter(|(i, _)| grid.node(*i) > rho)
            .map(|(_, e)| e)
            .sum::<f64>()
            + face_e
                .iter()
                .enumerate()
                .filter(|(i, _)| grid.face(*i) > rho)
                .map(|(_, e)| e)
                .sum::<f64>();
        let outside_fraction = if total > 0.0 { outside / total } else { 0.0 };
        entries.push(ConeEntry {
            snapshot_t: snap.t,
            predicted_radius: rho,
            measured_radius: support_radius(&snap.u, grid.dx, SUPPORT_EPSILON),
            outside_fraction,
            pass: outside_fraction <= tolerance,
        });
    }
    let verdict = if overflow {
        ConeVerdict::Inconclusive
    } else if entries.iter().all(|e| e.pass) {
        ConeVerdict::Pass
    } else {
        ConeVerdict::Fail
    };
    Ok(ConeReport {
        tolerance,
        entries,
        verdict,
    })
}
