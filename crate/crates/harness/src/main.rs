use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand};

use dampwave_harness::pipeline::{self, Certificate, Series, Verdicts};
use dampwave_harness::report::{self, CERTIFICATE, ENERGY};
use dampwave_harness::{plot, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "dampwave", version, about = "Decay experiments for the damped wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the certificates only.
    Certify(Common),
    /// Full pipeline: certificates, evolution, audits, fits, verdicts, plots.
    Run(Common),
    /// Re-fit an existing energy.csv and rewrite verdicts.json.
    Fit(Common),
    /// Redraw plots from an existing energy.csv.
    Plot(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file; repeat for several.
    #[arg(long = "scenario")]
    scenarios: Vec<PathBuf>,
    /// Output directory; each scenario writes into `<out>/<name>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    k_max: Option<usize>,
    /// Number of grid nodes.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            k_max: self.k_max,
            grid: self.grid,
            cfl: self.cfl,
            t_end: self.t_end,
            delta: self.delta,
            margin: self.margin,
            seed: self.seed,
        }
    }
}

/// Per-scenario result: verdicts passed, verdicts failed, or a stage or
/// configuration error.
enum Outcome {
    Pass,
    Fail,
    Error,
}

fn load_scenarios(c: &Common) -> Result<Vec<Scenario>, String> {
    if c.scenarios.is_empty() {
        return Err("no --scenario given".into());
    }
    let mut out = Vec::new();
    for p in &c.scenarios {
        let mut s = Scenario::load(p).map_err(|e| e.to_string())?;
        s.apply(&c.overrides()).map_err(|e| e.to_string())?;
        if out.iter().any(|o: &Scenario| o.name == s.name) {
            return Err(format!("scenario name {} used twice", s.name));
        }
        out.push(s);
    }
    Ok(out)
}

fn certify_one(s: &Scenario, out: &Path) -> Outcome {
    match pipeline::certify(s) {
        Ok(c) => {
            if let Err(e) = report::write_certificate(out, &c.certificate) {
                eprintln!("{}: {e}", s.name);
                return Outcome::Error;
            }
            let c = &c.certificate;
            println!(
                "{}: T0 = {:.4}, omega = {}, w0 = {}, mu = {} (numeric {:.4}), subsolution {}",
                s.name,
                c.weight_report.t0,
                c.weight.omega,
                c.weight.w0,
                c.mu,
                c.subsolution.mu_numeric,
                if c.hypothesis.pass { "ok" } else { "FAILED" }
            );
            if c.weight_report.pass && c.hypothesis.pass {
                Outcome::Pass
            } else {
                Outcome::Fail
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", s.name);
            Outcome::Error
        }
    }
}

fn print_verdicts(v: &Verdicts) {
    for c in &v.verdicts {
        println!(
            "{}: {:<12} fitted {:>8.4}  predicted {:>8.4}  {:?} +-{}  {}",
            v.scenario,
            c.quantity,
            c.fitted_exponent,
            c.predicted_exponent,
            c.direction,
            c.margin,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
}

fn plots_for(dir: &Path, series: &Series, cert: &Certificate, anchor: f64) -> Result<(), report::ReportError> {
    let mu = cert.mu;
    let delta = cert.scenario.delta;
    let warnings = plot::emit_plots(&dir.join("plots"), series, anchor, |name| {
        let p = dampwave::certificates::predicted_exponents(mu, delta, 0);
        match name {
            "damping" => Some(p.damping),
            "linf_sq" => Some(p.linf_sq),
            _ => name
                .strip_prefix('E')
                .and_then(|k| k.parse::<usize>().ok())
                .map(|k| dampwave::certificates::predicted_exponents(mu, delta, k).energy_k),
        }
    })?;
    for w in warnings {
        eprintln!("{}: {w}", cert.scenario.name);
    }
    Ok(())
}

fn run_one(s: &Scenario, out: &Path) -> Outcome {
    let bundle = pipeline::run_scenario(s, |c| {
        // keep the certificate even if a later stage fails
        if let Err(e) = report::write_certificate(out, c) {
            eprintln!("{}: {e}", s.name);
        }
    });
    let b = match bundle {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{}: {e}", s.name);
            return Outcome::Error;
        }
    };
    let written = report::write_bundle(out, &b)
        .and_then(|_| plots_for(out, &b.series, &b.certificate, b.verdicts.window.0));
    if let Err(e) = written {
        eprintln!("{}: {e}", s.name);
        return Outcome::Error;
    }
    for w in &b.audit.warnings {
        eprintln!("{}: warning: {w}", s.name);
    }
    print_verdicts(&b.verdicts);
    if b.verdicts.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// Directories holding an `energy.csv`: `<out>/<name>` for each given
/// scenario, otherwise `out` itself or its subdirectories.
fn result_dirs(c: &Common) -> Result<Vec<PathBuf>, String> {
    if !c.scenarios.is_empty() {
        return Ok(load_scenarios(c)?.iter().map(|s| c.out.join(&s.name)).collect());
    }
    if c.out.join(ENERGY).exists() {
        return Ok(vec![c.out.clone()]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&c.out)
        .map_err(|e| format!("{}: {e}", c.out.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(ENERGY).exists())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(format!("no {ENERGY} under {}", c.out.display()));
    }
    Ok(dirs)
}

fn load_results(dir: &Path, c: &Common) -> Result<(Certificate, Series), String> {
    let mut cert: Certificate = report::read_json(&dir.join(CERTIFICATE)).map_err(|e| e.to_string())?;
    let series = report::read_csv(&dir.join(ENERGY)).map_err(|e| e.to_string())?;
    let mut o = c.overrides();
    // only the fitting parameters can change after the run
    o.k_max = None;
    o.grid = None;
    o.cfl = None;
    o.t_end = None;
    cert.scenario.apply(&o).map_err(|e| e.to_string())?;
    Ok((cert, series))
}

fn fit_one(dir: &Path, c: &Common) -> Outcome {
    let (cert, series) = match load_results(dir, c) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return Outcome::Error;
        }
    };
    let v = match pipeline::verdicts(&series, &cert.scenario, cert.mu, cert.weight_report.t0) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{}: {e}", cert.scenario.name);
            return Outcome::Error;
        }
    };
    if let Err(e) = report::write_verdicts(dir, &v) {
        eprintln!("{e}");
        return Outcome::Error;
    }
    print_verdicts(&v);
    if v.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn plot_one(dir: &Path, c: &Common) -> Outcome {
    let result = load_results(dir, c).and_then(|(cert, series)| {
        let (window, _) = pipeline::fit_window(&cert.scenario, cert.weight_report.t0);
        plots_for(dir, &series, &cert, window.0).map_err(|e| e.to_string())
    });
    match result {
        Ok(()) => Outcome::Pass,
        Err(e) => {
            eprintln!("{e}");
            Outcome::Error
        }
    }
}

fn exit_code(outcomes: &[Outcome]) -> ExitCode {
    if outcomes.iter().any(|o| matches!(o, Outcome::Error)) {
        ExitCode::from(2)
    } else if outcomes.iter().any(|o| matches!(o, Outcome::Fail)) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcomes: Vec<Outcome> = match &cli.command {
        Command::Certify(c) | Command::Run(c) => {
            let scenarios = match load_scenarios(c) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let run = matches!(cli.command, Command::Run(_));
            thread::scope(|scope| {
                let handles: Vec<_> = scenarios
                    .iter()
                    .map(|s| {
                        let dir = c.out.join(&s.name);
                        scope.spawn(move || if run { run_one(s, &dir) } else { certify_one(s, &dir) })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap_or(Outcome::Error)).collect()
            })
        }
        Command::Fit(c) | Command::Plot(c) => {
            let dirs = match result_dirs(c) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let fit = matches!(cli.command, Command::Fit(_));
            dirs.iter().map(|d| if fit { fit_one(d, c) } else { plot_one(d, c) }).collect()
        }
    };
    exit_code(&outcomes)
}
