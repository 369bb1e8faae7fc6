//! Run configuration: flags, the JSON config file, and the resolved form
//! echoed back into every JSON report.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use delaylab::recurrence::IterationGuard;
use delaylab::sweep::SweepConfig;
use serde::{Deserialize, Deserializer, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Iterate the recurrence and dump the orbit
    Simulate,
    /// Orbit diagnostics: semi-cycles, period, rate, invariants
    Analyze,
    /// Characteristic roots and stability at the equilibrium
    Roots,
    /// Orbit against the linear comparison envelope
    Envelope,
    /// Random-initial-condition stability sweep over a (p, m) grid
    Sweep,
    /// Sweep preset for 1/2 <= p < 3/4
    Conjecture,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analyze => "analyze",
            Mode::Roots => "roots",
            Mode::Envelope => "envelope",
            Mode::Sweep => "sweep",
            Mode::Conjecture => "conjecture",
        }
    }

    fn needs_model(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Analyze | Mode::Roots | Mode::Envelope)
    }

    fn needs_orbit(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Analyze | Mode::Envelope)
    }

    fn is_sweep(self) -> bool {
        matches!(self, Mode::Sweep | Mode::Conjecture)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Every knob, all optional. The same struct is read from flags and from
/// the config file; after [`resolve`] it holds exactly the values used.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,

    /// Constant term A of x[n+1] = A + B x[n-m] / x[n]^2 (with --b)
    #[arg(long, help_heading = "Model")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Coefficient B (with --a)
    #[arg(long, help_heading = "Model")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Normalized parameter p = B / A^2 (instead of --a/--b)
    #[arg(long, help_heading = "Model")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Delay m; a comma-separated list for sweeps
    #[arg(long, value_delimiter = ',', help_heading = "Model")]
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,

    /// Initial segment y[-m],...,y[0] (x values when --a/--b are given)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, help_heading = "Initial conditions")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    /// Draw the initial segment uniformly from [init-low, init-high) with this seed
    #[arg(long, help_heading = "Initial conditions")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_seed: Option<u64>,
    /// Lower end of the random initial range (default 0.5)
    #[arg(long, help_heading = "Initial conditions")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_low: Option<f64>,
    /// Upper end of the random initial range (default 5)
    #[arg(long, help_heading = "Initial conditions")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_high: Option<f64>,

    /// Number of steps to iterate
    #[arg(long, help_heading = "Guard")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Stop with status overflowed once a value exceeds this
    #[arg(long, help_heading = "Guard")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overflow_bound: Option<f64>,
    /// Stop with status underflowed once a value drops below this
    #[arg(long, help_heading = "Guard")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub underflow_bound: Option<f64>,

    /// Largest period tried by analyze
    #[arg(long, help_heading = "Analysis")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
    /// Tolerance for period detection
    #[arg(long, help_heading = "Analysis")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_tol: Option<f64>,

    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    /// Number of grid points, both ends included
    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_steps: Option<usize>,
    /// Random initial segments per cell
    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Master seed; required, there is no implicit default
    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// A trial counts as converged when |y[N] - y_bar| <= tol
    #[arg(long, help_heading = "Sweep")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Output path, `-` for stdout
    #[arg(long, help_heading = "Output")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[arg(long, value_enum, help_heading = "Output")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<usize>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(m) => vec![m],
        OneOrMany::Many(ms) => ms,
    }))
}

pub fn load_file(path: &Path) -> anyhow::Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let settings: Settings =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match settings.schema {
        Some(SCHEMA) => Ok(settings),
        Some(other) => bail!("{}: unsupported schema {other}, expected {SCHEMA}", path.display()),
        None => bail!("{}: missing `schema` field (expected {SCHEMA})", path.display()),
    }
}

impl Settings {
    /// Overlay `flags` on `self`. Parameter forms and initial-condition
    /// forms are replaced as a group so a flag never combines with a
    /// conflicting file entry.
    pub fn overlay(mut self, flags: Settings) -> Settings {
        if flags.a.is_some() || flags.b.is_some() || flags.p.is_some() {
            self.a = flags.a;
            self.b = flags.b;
            self.p = flags.p;
        }
        if flags.init.is_some() || flags.init_seed.is_some() {
            self.init = flags.init;
            self.init_seed = flags.init_seed;
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if flags.$field.is_some() { self.$field = flags.$field; } )* };
        }
        take!(
            mode, m, init_low, init_high, steps, overflow_bound, underflow_bound, max_period, period_tol, p_min,
            p_max, p_steps, trials, seed, tol, out, format
        );
        self
    }
}

/// Parameters in whichever form was given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelForm {
    Unnormalized { a: f64, b: f64 },
    Normalized { p: f64 },
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: Option<(ModelForm, usize)>,
    pub guard: IterationGuard,
    pub sweep: Option<SweepConfig>,
    pub max_period: usize,
    pub period_tol: f64,
    pub out: String,
    pub format: Format,
    /// The resolved settings, echoed into JSON reports.
    pub echo: Settings,
}

/// Validate and fill defaults. Only the fields the mode reads are kept in
/// the echo.
pub fn resolve(s: Settings) -> anyhow::Result<RunConfig> {
    let mode = s.mode.ok_or_else(|| anyhow!("no mode given (simulate, analyze, roots, envelope, sweep, conjecture)"))?;
    let mut echo = Settings { schema: Some(SCHEMA), mode: Some(mode), ..Default::default() };

    let format = s.format.unwrap_or(match mode {
        Mode::Analyze | Mode::Roots => Format::Json,
        _ => Format::Csv,
    });
    if mode == Mode::Analyze && format == Format::Csv {
        bail!("analyze only writes JSON");
    }
    echo.format = Some(format);
    echo.out = Some(s.out.clone().unwrap_or_else(|| "-".into()));

    let model = if mode.needs_model() {
        let m = match s.m.as_deref() {
            Some([m]) => *m,
            Some(_) => bail!("{} takes a single delay, got {:?}", mode.name(), s.m.as_ref().unwrap()),
            None => bail!("--m is required"),
        };
        let form = match (s.a, s.b, s.p) {
            (Some(a), Some(b), None) => ModelForm::Unnormalized { a, b },
            (None, None, Some(p)) => ModelForm::Normalized { p },
            (None, None, None) => bail!("give either --p or both --a and --b"),
            _ => bail!("give exactly one of --p or the pair --a/--b"),
        };
        match form {
            ModelForm::Unnormalized { a, b } => {
                delaylab::Parameters::new(a, b, m)?;
                echo.a = Some(a);
                echo.b = Some(b);
            }
            ModelForm::Normalized { p } => {
                delaylab::NormalizedParameters::new(p, m)?;
                echo.p = Some(p);
            }
        }
        echo.m = Some(vec![m]);
        Some((form, m))
    } else {
        None
    };

    let mut guard = IterationGuard::default();
    if mode.needs_orbit() {
        match (&s.init, s.init_seed) {
            (Some(values), None) => echo.init = Some(values.clone()),
            (None, Some(seed)) => {
                echo.init_seed = Some(seed);
                echo.init_low = Some(s.init_low.unwrap_or(0.5));
                echo.init_high = Some(s.init_high.unwrap_or(5.0));
            }
            (Some(_), Some(_)) => bail!("give either --init or --init-seed, not both"),
            (None, None) => bail!("initial conditions required: --init v0,v1,... or --init-seed N"),
        }
        guard.max_steps = s.steps.unwrap_or(guard.max_steps);
        guard.overflow_bound = s.overflow_bound.unwrap_or(guard.overflow_bound);
        guard.underflow_bound = s.underflow_bound.unwrap_or(guard.underflow_bound);
        guard.validate()?;
        echo.steps = Some(guard.max_steps);
        echo.overflow_bound = Some(guard.overflow_bound);
        echo.underflow_bound = Some(guard.underflow_bound);
    }

    let max_period = s.max_period.unwrap_or(delaylab::analysis::DEFAULT_MAX_PERIOD);
    let period_tol = s.period_tol.unwrap_or(delaylab::analysis::DEFAULT_PERIOD_TOLERANCE);
    if mode == Mode::Analyze {
        if max_period == 0 || !(period_tol > 0.0) {
            bail!("--max-period must be positive and --period-tol > 0");
        }
        echo.max_period = Some(max_period);
        echo.period_tol = Some(period_tol);
    }

    let sweep = if mode.is_sweep() {
        let seed = s.seed.ok_or_else(|| anyhow!("--seed is required for {}", mode.name()))?;
        let base = if mode == Mode::Conjecture { SweepConfig::conjecture(seed) } else { SweepConfig { seed, ..Default::default() } };
        let cfg = SweepConfig {
            p_min: s.p_min.unwrap_or(base.p_min),
            p_max: s.p_max.unwrap_or(base.p_max),
            p_steps: s.p_steps.unwrap_or(base.p_steps),
            m_values: s.m.clone().unwrap_or(base.m_values),
            trials: s.trials.unwrap_or(base.trials),
            init_low: s.init_low.unwrap_or(base.init_low),
            init_high: s.init_high.unwrap_or(base.init_high),
            seed,
            steps: s.steps.unwrap_or(base.steps),
            tol: s.tol.unwrap_or(base.tol),
        };
        cfg.validate()?;
        echo.p_min = Some(cfg.p_min);
        echo.p_max = Some(cfg.p_max);
        echo.p_steps = Some(cfg.p_steps);
        echo.m = Some(cfg.m_values.clone());
        echo.trials = Some(cfg.trials);
        echo.init_low = Some(cfg.init_low);
        echo.init_high = Some(cfg.init_high);
        echo.seed = Some(cfg.seed);
        echo.steps = Some(cfg.steps);
        echo.tol = Some(cfg.tol);
        Some(cfg)
    } else {
        None
    };

    Ok(RunConfig {
        mode,
        model,
        guard,
        sweep,
        max_period,
        period_tol,
        out: echo.out.clone().unwrap(),
        format,
        echo,
    })
}
