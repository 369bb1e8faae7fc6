//! One function per mode. Each returns the rendered artifact together with
//! anything that should change the exit code.

use anyhow::Result;
use delaylab::analysis::{
    check_alternation_deviations, check_max_semicycle_length, decompose_deviations, detect_period, envelope,
    estimate_rate_deviations, two_cycle_analysis, ConvergenceRateReport, EnvelopeReport, PeriodReport,
    SemiCycle, TwoCycleReport,
};
use delaylab::linearization::{classify_stability, StabilityReport};
use delaylab::recurrence::{simulate, simulate_deviations, simulate_x_form, InitialConditions, TrajectoryStatus};
use delaylab::sweep::{stability_sweep, SweepCell};
use delaylab::{Equilibrium, Error, NormalizedParameters, Parameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, Mode, ModelForm, RunConfig};
use crate::output::{self, json_report};

pub struct Artifact {
    pub body: String,
    /// Guard trip or similar: the run finished but the numbers are partial.
    pub numerical: Option<String>,
    /// Broken theorem invariants.
    pub violations: Vec<String>,
}

impl Artifact {
    fn clean(body: String) -> Self {
        Self { body, numerical: None, violations: Vec::new() }
    }
}

pub fn run_mode(cfg: &RunConfig) -> Result<Artifact> {
    match cfg.mode {
        Mode::Simulate => run_simulate(cfg),
        Mode::Analyze => run_analyze(cfg),
        Mode::Roots => run_roots(cfg),
        Mode::Envelope => run_envelope(cfg),
        Mode::Sweep | Mode::Conjecture => run_sweep(cfg),
    }
}

struct Model {
    form: ModelForm,
    params: NormalizedParameters,
    /// A when given, so initial values can be read as x.
    scale: Option<f64>,
}

fn model(cfg: &RunConfig) -> Result<Model> {
    let (form, m) = cfg.model.expect("resolved for this mode");
    Ok(match form {
        ModelForm::Unnormalized { a, b } => {
            Model { form, params: Parameters::new(a, b, m)?.normalize(), scale: Some(a) }
        }
        ModelForm::Normalized { p } => Model { form, params: NormalizedParameters::new(p, m)?, scale: None },
    })
}

/// Initial segment in the units the user gave (x when A, B are set).
fn raw_init(cfg: &RunConfig, m: usize) -> Result<InitialConditions> {
    let values = match (&cfg.echo.init, cfg.echo.init_seed) {
        (Some(v), _) => v.clone(),
        (None, Some(seed)) => {
            let (lo, hi) = (cfg.echo.init_low.unwrap(), cfg.echo.init_high.unwrap());
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidInitialConditions(format!("need 0 < init_low < init_high, got {lo}, {hi}")).into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..=m).map(|_| rng.gen_range(lo..hi)).collect()
        }
        (None, None) => unreachable!("resolve requires initial conditions"),
    };
    Ok(InitialConditions::new(values, m)?)
}

fn y_init(cfg: &RunConfig, model: &Model) -> Result<InitialConditions> {
    let raw = raw_init(cfg, model.params.m())?;
    Ok(match model.scale {
        Some(a) => InitialConditions::new(raw.values().iter().map(|x| x / a).collect(), model.params.m())?,
        None => raw,
    })
}

fn guard_note(status: TrajectoryStatus) -> Option<String> {
    status.is_guard_trip().then(|| format!("iteration stopped early: {status:?}"))
}

fn ab(form: ModelForm) -> (Option<f64>, Option<f64>) {
    match form {
        ModelForm::Unnormalized { a, b } => (Some(a), Some(b)),
        ModelForm::Normalized { .. } => (None, None),
    }
}

#[derive(Serialize)]
struct SimulateResult<'a> {
    a: Option<f64>,
    b: Option<f64>,
    p: f64,
    m: usize,
    equilibrium: Equilibrium,
    status: TrajectoryStatus,
    /// Initial segment in input units.
    initial: &'a [f64],
    /// x values in the x form, y values otherwise.
    values: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    y_values: Option<&'a [f64]>,
}

fn run_simulate(cfg: &RunConfig) -> Result<Artifact> {
    let model = model(cfg)?;
    let (a, b) = ab(model.form);
    let p = model.params.p();
    let m = model.params.m();
    let init = raw_init(cfg, m)?;
    let (body, status) = match model.form {
        ModelForm::Unnormalized { .. } => {
            let xt = simulate_x_form(Parameters::new(a.unwrap(), b.unwrap(), m)?, &init, cfg.guard)?;
            let yt = xt.to_normalized()?;
            let body = match cfg.format {
                Format::Csv => output::x_trajectory_csv(&xt, &yt),
                Format::Json => json_report(
                    &cfg.echo,
                    SimulateResult {
                        a,
                        b,
                        p,
                        m,
                        equilibrium: delaylab::model::equilibrium_x(&xt.params),
                        status: xt.status,
                        initial: xt.initial.values(),
                        values: &xt.values,
                        y_values: Some(&yt.values),
                    },
                )?,
            };
            (body, xt.status)
        }
        ModelForm::Normalized { .. } => {
            let traj = simulate(model.params, &init, cfg.guard)?;
            let body = match cfg.format {
                Format::Csv => output::trajectory_csv(&traj),
                Format::Json => json_report(
                    &cfg.echo,
                    SimulateResult {
                        a,
                        b,
                        p,
                        m,
                        equilibrium: model.params.equilibrium(),
                        status: traj.status,
                        initial: traj.initial.values(),
                        values: &traj.values,
                        y_values: None,
                    },
                )?,
            };
            (body, traj.status)
        }
    };
    Ok(Artifact { body, numerical: guard_note(status), violations: Vec::new() })
}

#[derive(Serialize)]
struct SemiCycleSummary {
    count: usize,
    max_length: usize,
    has_initial_partial: bool,
    bound: usize,
    holds: bool,
    offending: Vec<SemiCycle>,
}

#[derive(Serialize)]
struct AnalyzeResult {
    a: Option<f64>,
    b: Option<f64>,
    p: f64,
    m: usize,
    equilibrium: Equilibrium,
    /// Initial segment in y units.
    initial: Vec<f64>,
    status: TrajectoryStatus,
    steps_completed: usize,
    last_value: Option<f64>,
    /// Last deviation from equilibrium, tracked without cancellation.
    last_deviation: Option<f64>,
    min_value: Option<f64>,
    stability: StabilityReport,
    semicycles: SemiCycleSummary,
    /// Odd delay only; `None` when the initial segment is not alternating.
    alternation: Option<bool>,
    period: Option<PeriodReport>,
    rate: Option<ConvergenceRateReport>,
    two_cycles: Option<TwoCycleReport>,
    violations: Vec<String>,
}

fn run_analyze(cfg: &RunConfig) -> Result<Artifact> {
    let model = model(cfg)?;
    let (a, b) = ab(model.form);
    let params = model.params;
    let (p, m) = (params.p(), params.m());
    let init = y_init(cfg, &model)?;
    let traj = simulate(params, &init, cfg.guard)?;
    let orbit = simulate_deviations(params, &init, cfg.guard)?;
    let stability = classify_stability(p, m)?;
    let mut violations = Vec::new();

    let min_value = traj.values.iter().copied().reduce(f64::min);
    if let Some(k) = traj.values.iter().position(|y| !(*y >= 1.0)) {
        violations.push(format!("y[{}] = {} is below 1", k + 1, traj.values[k]));
    }

    let dec = decompose_deviations(&orbit);
    let bound = check_max_semicycle_length(&dec, m);
    for c in &bound.offending {
        violations.push(format!("semi-cycle at n = {} has length {} > m = {m}", c.start_index, c.length));
    }

    let alternation = if m % 2 == 1 {
        match check_alternation_deviations(&orbit) {
            Ok(true) => Some(true),
            Ok(false) => {
                violations.push("alternating initial segment did not give length-one semi-cycles".into());
                Some(false)
            }
            Err(Error::PatternMismatch { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let period = if traj.is_completed() && traj.len() >= 4 * cfg.max_period {
        Some(detect_period(&traj, cfg.max_period, cfg.period_tol)?)
    } else {
        None
    };

    let two_cycles = if m % 2 == 0 {
        let report = two_cycle_analysis(p)?;
        if report.asymmetric_found {
            violations.push("two-cycle with distinct values found for even m".into());
        }
        if period.as_ref().and_then(|r| r.period) == Some(2) {
            violations.push("orbit settled on a period-2 cycle for even m".into());
        }
        Some(report)
    } else {
        None
    };

    let rate = if stability.spectral_radius < 1.0 {
        estimate_rate_deviations(&orbit, &stability.roots).ok()
    } else {
        None
    };

    let result = AnalyzeResult {
        a,
        b,
        p,
        m,
        equilibrium: params.equilibrium(),
        initial: init.values().to_vec(),
        status: traj.status,
        steps_completed: traj.len(),
        last_value: traj.last(),
        last_deviation: orbit.values.last().copied(),
        min_value,
        stability,
        semicycles: SemiCycleSummary {
            count: dec.cycles.len(),
            max_length: dec.max_length(),
            has_initial_partial: dec.has_initial_partial,
            bound: bound.bound,
            holds: bound.holds,
            offending: bound.offending.clone(),
        },
        alternation,
        period,
        rate,
        two_cycles,
        violations: violations.clone(),
    };
    Ok(Artifact {
        body: json_report(&cfg.echo, result)?,
        numerical: guard_note(traj.status),
        violations,
    })
}

#[derive(Serialize)]
struct RootsResult {
    a: Option<f64>,
    b: Option<f64>,
    #[serde(flatten)]
    report: StabilityReport,
}

fn run_roots(cfg: &RunConfig) -> Result<Artifact> {
    let model = model(cfg)?;
    let (a, b) = ab(model.form);
    let report = classify_stability(model.params.p(), model.params.m())?;
    let body = match cfg.format {
        Format::Csv => output::roots_csv(&report),
        Format::Json => json_report(&cfg.echo, RootsResult { a, b, report })?,
    };
    Ok(Artifact::clean(body))
}

#[derive(Serialize)]
struct EnvelopeResult<'a> {
    initial: &'a [f64],
    y_values: &'a [f64],
    #[serde(flatten)]
    report: &'a EnvelopeReport,
}

fn run_envelope(cfg: &RunConfig) -> Result<Artifact> {
    let model = model(cfg)?;
    let init = y_init(cfg, &model)?;
    let traj = simulate(model.params, &init, cfg.guard)?;
    let report = envelope(&traj)?;
    let violations = report
        .violations
        .iter()
        .map(|v| format!("envelope violated at n = {}: y = {}, u = {:?} ({:?})", v.index, v.y, v.u, v.kind))
        .collect();
    let body = match cfg.format {
        Format::Csv => output::envelope_csv(&traj, &report),
        Format::Json => json_report(
            &cfg.echo,
            EnvelopeResult { initial: traj.initial.values(), y_values: &traj.values, report: &report },
        )?,
    };
    Ok(Artifact { body, numerical: None, violations })
}

#[derive(Serialize)]
struct SweepResult<'a> {
    cells: &'a [SweepCell],
}

fn run_sweep(cfg: &RunConfig) -> Result<Artifact> {
    let sweep = cfg.sweep.as_ref().expect("resolved for this mode");
    let cells = stability_sweep(sweep)?;
    // bounded orbits are guaranteed below 1/2, so a guard trip there is a regression
    let violations = if cfg.mode == Mode::Sweep {
        cells
            .iter()
            .filter(|c| c.p < 0.5 && c.n_diverged > 0)
            .map(|c| format!("{} trials diverged at p = {}, m = {}", c.n_diverged, c.p, c.m))
            .collect()
    } else {
        Vec::new()
    };
    let body = match cfg.format {
        Format::Csv => output::sweep_csv(&cells),
        Format::Json => json_report(&cfg.echo, SweepResult { cells: &cells })?,
    };
    Ok(Artifact { body, numerical: None, violations })
}
