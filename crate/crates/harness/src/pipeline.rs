//! admissibility -> weight -> subsolution -> cascades -> energetics ->
//! support -> fits -> verdicts, each stage named in its errors.

use std::fmt;
use std::thread;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use dampwave::certificates::{
    auto_omega, certify_weight, check_b_matrix_condition, check_hypothesis_a, construct_radial_subsolution,
    dyadic_times, lambda_exponents, omega_window, predicted_exponents, BMatrixReport, HypothesisReport, MConditions,
    PredictedExponents, SamplingPlan, SubsolutionSpec, SubsolutionSummary, WeightReport, WeightSpec,
};
use dampwave::coefficients::{bump, check_admissibility, AdmissibilityReport};
use dampwave::decay::{compare_exponent, compare_to_theory, fit_decay_rate, ComparisonVerdict, DecayFit, Direction};
use dampwave::energetics::{
    audit_inequalities, check_nodal_m_bound, energy_records, hardy_ratio, AuditContext, AuditReport, EnergyRecord, NodalCheck,
};
use dampwave::solver::{run_nodal, GridKind};
use dampwave::support::{build_q, verify_cone, ConeReport, SupportSpec, CONE_TOLERANCE};
use dampwave::{
    make_power_law, Cadence, CoefficientField, Discretization, Grid, InitialData, RunConfig, SourceField, Trajectory,
};

use crate::scenario::{OmegaChoice, Scenario};

/// Margin of the two-sided check on the exponent gain between successive energies.
pub const GAIN_MARGIN: f64 = 0.5;
/// Expected gain per extra time derivative.
pub const GAIN: f64 = 2.0;
/// Radii used by the subsolution and b-matrix checks.
const R_SAMPLES: usize = 512;
/// Sharp constant of the three-dimensional Hardy inequality.
pub const HARDY_CONSTANT: f64 = 4.0;
/// Slack over [`HARDY_CONSTANT`] allowed for quadrature error.
pub const HARDY_SLACK: f64 = 0.05;
pub const HARDY_PROFILES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Admissibility,
    Weight,
    Subsolution,
    MassRatio,
    Grid,
    Cascade,
    Energetics,
    Support,
    Audit,
    Fit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        write!(f, "{}", s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

fn at<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> StageError {
    move |e| StageError {
        stage,
        message: e.to_string(),
    }
}

/// Everything derived from the envelope before any evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub scenario: Scenario,
    pub admissibility: AdmissibilityReport,
    pub omega_window: (f64, f64),
    pub weight: WeightSpec,
    pub weight_report: WeightReport,
    pub support: SupportSpec,
    pub subsolution: SubsolutionSummary,
    pub hypothesis: HypothesisReport,
    pub mass_ratio: MConditions,
    pub b_matrix: BMatrixReport,
    /// `mu` used for the predictions.
    pub mu: f64,
    pub predictions: Vec<PredictedExponents>,
    pub grid: GridInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub n: usize,
    pub m: usize,
    pub r_max: f64,
    pub dx: f64,
}

/// Built objects that later stages reuse.
pub struct Certified {
    pub certificate: Certificate,
    pub field: CoefficientField,
    pub source: SourceField,
    pub data: InitialData,
    pub grid: Grid,
    pub subsolution: SubsolutionSpec,
}

pub fn build_source(s: &Scenario) -> SourceField {
    match s.source {
        None => SourceField::zero(),
        Some(src) => SourceField::decaying_pulse(src.amplitude, src.radius, src.rate, src.order),
    }
}

fn r_samples(r_max: f64) -> Vec<f64> {
    (0..=R_SAMPLES).map(|j| r_max * j as f64 / R_SAMPLES as f64).collect()
}

/// The certificate stages only.
pub fn certify(s: &Scenario) -> Result<Certified, StageError> {
    let env = s.envelope;
    let admissibility = check_admissibility(&env, s.admissibility);
    if !admissibility.pass {
        let failed: Vec<&str> = admissibility.failures().map(|c| c.name.as_str()).collect();
        return Err(StageError {
            stage: Stage::Admissibility,
            message: format!("envelope violates {}", failed.join(", ")),
        });
    }
    let field = make_power_law(env, s.profile.into()).map_err(at(Stage::Admissibility))?;
    let source = build_source(s);
    let data = InitialData::named(s.initial.shape, s.initial.amplitude, s.initial.radius, s.initial.velocity)
        .map_err(at(Stage::Admissibility))?;
    let support = build_q(&env, data.radius).map_err(at(Stage::Admissibility))?;

    let window = omega_window(&env).map_err(at(Stage::Weight))?.ok_or(StageError {
        stage: Stage::Weight,
        message: "the omega window is empty".into(),
    })?;
    let omega = match s.omega {
        OmegaChoice::Auto(_) => auto_omega(&env).map_err(at(Stage::Weight))?,
        OmegaChoice::Value(w) => w,
    };
    let (weight, weight_report) = certify_weight(
        &env,
        &field,
        &support,
        omega,
        omega + 1.0,
        1.0,
        s.t_end,
        &SamplingPlan::default(),
    )
    .map_err(at(Stage::Weight))?;

    let grid = Grid::sized_for(s.n, &support, s.t_end, s.grid).map_err(at(Stage::Grid))?;
    let subsolution =
        construct_radial_subsolution(&field, s.n, s.delta, grid.r_max).map_err(at(Stage::Subsolution))?;
    let rs = r_samples(grid.r_max);
    let hypothesis = check_hypothesis_a(&subsolution, &field, &rs);
    let b_matrix = check_b_matrix_condition(&field, s.n, &rs);
    let mass_ratio =
        lambda_exponents(&field, &support, s.n, &dyadic_times(s.t_end)).map_err(at(Stage::MassRatio))?;

    let mu = subsolution.mu_formula;
    let certificate = Certificate {
        scenario: s.clone(),
        admissibility,
        omega_window: window,
        weight,
        weight_report,
        support,
        subsolution: subsolution.summary(),
        hypothesis,
        mass_ratio,
        b_matrix,
        mu,
        predictions: (0..=s.k_max).map(|k| predicted_exponents(mu, s.delta, k)).collect(),
        grid: GridInfo {
            n: grid.n,
            m: grid.m,
            r_max: grid.r_max,
            dx: grid.dx,
        },
    };
    Ok(Certified {
        certificate,
        field,
        source,
        data,
        grid,
        subsolution,
    })
}

/// Evolves `u, u_t, ..., d^k u/dt^k` concurrently on one discretization.
pub fn run_cascade_parallel(
    data: &InitialData,
    op: &Discretization,
    source: &SourceField,
    cfg: &RunConfig,
    k: usize,
) -> Result<Vec<Trajectory>, StageError> {
    let init = dampwave::solver::cascade_initial_data(data, op, source, k).map_err(at(Stage::Cascade))?;
    let sources = (0..=k)
        .map(|j| source.shifted(j))
        .collect::<dampwave::Result<Vec<_>>>()
        .map_err(at(Stage::Cascade))?;
    thread::scope(|scope| {
        let handles: Vec<_> = init
            .iter()
            .zip(&sources)
            .enumerate()
            .map(|(j, ((v0, v1), src))| scope.spawn(move || run_nodal(v0, v1, op, src, cfg, j)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("cascade thread panicked").map_err(at(Stage::Cascade)))
            .collect()
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdicts {
    pub scenario: String,
    pub window: (f64, f64),
    /// How the window was chosen.
    pub window_rule: String,
    pub mu: f64,
    pub delta: f64,
    pub margin: f64,
    pub fits: Vec<NamedFit>,
    pub verdicts: Vec<ComparisonVerdict>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedFit {
    pub quantity: String,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Audit {
    pub scenario: String,
    pub inequalities: AuditReport,
    pub nodal: Option<NodalCheck>,
    pub cone: ConeReport,
    /// Only on three-dimensional radial grids.
    pub hardy: Option<HardySweep>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardySweep {
    pub seed: u64,
    pub profiles: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Random smooth profiles supported in `[0, r_max/2]`: sums of one to three
/// bumps with random centres, widths and signed amplitudes, sampled on `grid`.
pub fn random_profiles(grid: &Grid, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 * grid.r_max;
    (0..count)
        .map(|_| {
            let terms = rng.random_range(1..=3usize);
            let bumps: Vec<(f64, f64, f64)> = (0..terms)
                .map(|_| {
                    let width = half * rng.random_range(0.05..0.5);
                    let centre = rng.random_range(0.0..(half - width));
                    let amp = rng.random_range(-1.0..1.0);
                    (centre, width, amp)
                })
                .collect();
            grid.sample(|r| bumps.iter().map(|(c, w, a)| a * bump((r - c) / w)).sum())
        })
        .collect()
}

/// Hardy ratios of [`random_profiles`] on a radial grid in three dimensions.
pub fn hardy_sweep(grid: &Grid, seed: u64, count: usize) -> dampwave::Result<HardySweep> {
    let mut max_ratio = 0.0f64;
    for f in random_profiles(grid, seed, count) {
        max_ratio = max_ratio.max(hardy_ratio(&f, grid)?);
    }
    let bound = HARDY_CONSTANT + HARDY_SLACK;
    Ok(HardySweep {
        seed,
        profiles: count,
        max_ratio,
        bound,
        pass: max_ratio <= bound,
    })
}

/// Time series read back from, or written to, the energy CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub names: Vec<String>,
    pub t: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl Series {
    pub fn from_records(records: &[EnergyRecord], k_max: usize) -> Series {
        let mut names: Vec<String> = (0..=k_max).map(|k| format!("E{k}")).collect();
        names.extend(["damping", "linf_sq", "m_norm", "m2_norm", "support_radius"].map(String::from));
        let mut columns = vec![Vec::with_capacity(records.len()); names.len()];
        for r in records {
            let row = r
                .energies
                .iter()
                .copied()
                .chain([r.damping, r.linf * r.linf, r.m_norm, r.m2_norm, r.support_radius]);
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Series {
            names,
            t: records.iter().map(|r| r.t).collect(),
            columns,
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    pub fn pairs(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        self.column(name).map(|c| self.t.iter().copied().zip(c.iter().copied()).collect())
    }

    /// Number of energy columns `E0, E1, ...`.
    pub fn energy_levels(&self) -> usize {
        self.names.iter().take_while(|n| n.starts_with('E')).count()
    }
}

/// `[max(20, 2 T0), 0.9 t_end]` unless the scenario fixes one.
pub fn fit_window(s: &Scenario, t0: f64) -> ((f64, f64), String) {
    match s.fit_window {
        Some(w) => (w, "scenario".into()),
        None => (
            (20f64.max(2.0 * t0), 0.9 * s.t_end),
            format!("default [max(20, 2 T0), 0.9 t_end] with T0 = {t0}"),
        ),
    }
}

/// Fits every decay series and compares with the predictions.
pub fn verdicts(series: &Series, s: &Scenario, mu: f64, t0: f64) -> Result<Verdicts, StageError> {
    let (window, window_rule) = fit_window(s, t0);
    let mut fits = Vec::new();
    let mut out = Vec::new();
    let levels = series.energy_levels();
    let mut fit = |name: &str| -> Result<DecayFit, StageError> {
        let pairs = series.pairs(name).ok_or(StageError {
            stage: Stage::Fit,
            message: format!("no column {name}"),
        })?;
        let f = fit_decay_rate(&pairs, window).map_err(|e| StageError {
            stage: Stage::Fit,
            message: format!("{name}: {e}"),
        })?;
        fits.push(NamedFit {
            quantity: name.to_string(),
            fit: f,
        });
        Ok(f)
    };
    let mut energy_fits = Vec::new();
    for k in 0..levels {
        let p = predicted_exponents(mu, s.delta, k);
        let f = fit(&format!("E{k}"))?;
        out.push(compare_to_theory(&format!("energy_k{k}"), &f, p.energy_k, Direction::AtLeastAsFast, s.margin));
        energy_fits.push(f);
    }
    let p = predicted_exponents(mu, s.delta, 0);
    let f = fit("damping")?;
    out.push(compare_to_theory("damping", &f, p.damping, Direction::AtLeastAsFast, s.margin));
    let f = fit("linf_sq")?;
    out.push(compare_to_theory("linf_sq", &f, p.linf_sq, Direction::AtLeastAsFast, s.margin));
    for k in 0..levels.saturating_sub(1) {
        let gain = energy_fits[k + 1].exponent() - energy_fits[k].exponent();
        out.push(compare_exponent(&format!("gain_k{k}"), gain, GAIN, Direction::TwoSided, GAIN_MARGIN));
    }
    let pass = out.iter().all(|v| v.pass);
    Ok(Verdicts {
        scenario: s.name.clone(),
        window,
        window_rule,
        mu,
        delta: s.delta,
        margin: s.margin,
        fits,
        verdicts: out,
        pass,
    })
}

/// All artifacts of one scenario.
pub struct Bundle {
    pub certificate: Certificate,
    pub series: Series,
    pub audit: Audit,
    pub verdicts: Verdicts,
}

pub fn run_config(s: &Scenario) -> RunConfig {
    RunConfig {
        cfl: s.cfl,
        t_end: s.t_end,
        cadence: Cadence::PerDecade {
            per_decade: s.per_decade,
            t_min: 0.1,
        },
    }
}

/// Certified inputs together with the cascade runs.
pub struct Simulation {
    pub certified: Certified,
    pub op: Discretization,
    /// `trajectories[k]` evolves `d^k u/dt^k`.
    pub trajectories: Vec<Trajectory>,
}

/// Certificate and evolution stages; `on_certificate` sees the certificate
/// as soon as it exists so that callers can keep partial output.
pub fn simulate(s: &Scenario, on_certificate: impl FnOnce(&Certificate)) -> Result<Simulation, StageError> {
    let certified = certify(s)?;
    on_certificate(&certified.certificate);
    let op = Discretization::new(&certified.grid, &certified.field).map_err(at(Stage::Grid))?;
    let trajectories = run_cascade_parallel(&certified.data, &op, &certified.source, &run_config(s), s.k_max)?;
    Ok(Simulation {
        certified,
        op,
        trajectories,
    })
}

/// Energetics, support, audit, fit and verdict stages.
pub fn analyse(s: &Scenario, sim: &Simulation) -> Result<Bundle, StageError> {
    let (c, op, trajs) = (&sim.certified, &sim.op, &sim.trajectories);
    let records = energy_records(trajs, op).map_err(at(Stage::Energetics))?;
    let series = Series::from_records(&records, s.k_max);
    let cone = verify_cone(&trajs[0], op, &c.certificate.support, CONE_TOLERANCE).map_err(at(Stage::Support))?;

    let t0 = c.certificate.weight_report.t0;
    let inequalities = audit_inequalities(&AuditContext {
        trajectories: trajs,
        op,
        source: &c.source,
        weight: &c.certificate.weight,
        mconditions: Some(&c.certificate.mass_ratio),
        subsolution: Some(&c.subsolution),
        delta: s.delta,
        window: (t0, s.t_end),
    })
    .map_err(at(Stage::Audit))?;
    let nodal = if trajs.len() > 1 {
        Some(check_nodal_m_bound(&trajs[0], &trajs[1], op, &c.source).map_err(at(Stage::Audit))?)
    } else {
        None
    };
    let hardy = if c.grid.kind == GridKind::Radial && c.grid.n == 3 {
        Some(hardy_sweep(&c.grid, s.seed, HARDY_PROFILES).map_err(at(Stage::Audit))?)
    } else {
        None
    };
    let mut warnings: Vec<String> = trajs.iter().flat_map(|t| t.warnings.iter().cloned()).collect();
    warnings.extend(c.certificate.mass_ratio.warnings.iter().cloned());
    let verdicts = verdicts(&series, s, c.certificate.mu, t0)?;
    Ok(Bundle {
        audit: Audit {
            scenario: s.name.clone(),
            inequalities,
            nodal,
            cone,
            hardy,
            warnings,
        },
        certificate: c.certificate.clone(),
        series,
        verdicts,
    })
}

/// Every stage in order.
pub fn run_scenario(s: &Scenario, on_certificate: impl FnOnce(&Certificate)) -> Result<Bundle, StageError> {
    analyse(s, &simulate(s, on_certificate)?)
}
