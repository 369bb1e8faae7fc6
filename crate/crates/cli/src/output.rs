//! CSV/JSON writers. Numbers go out with 17 significant digits in C `%g`
//! style, which round-trips every f64 and never depends on locale.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Context;
use delaylab::analysis::EnvelopeReport;
use delaylab::linearization::StabilityReport;
use delaylab::recurrence::{Trajectory, XTrajectory};
use delaylab::sweep::SweepCell;
use serde::Serialize;

use crate::config::Settings;

const DIGITS: i32 = 17;

/// `printf("%.17g", x)`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // exponent after rounding to DIGITS significant digits
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

/// `n,y` including the initial segment at non-positive indices.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let m = traj.params.m() as i64;
    let mut s = String::from("n,y\n");
    for n in -m..=traj.len() as i64 {
        writeln!(s, "{n},{}", g17(traj.y(n).expect("index in range"))).unwrap();
    }
    s
}

/// `n,x,y` with `y = x / A`.
pub fn x_trajectory_csv(xt: &XTrajectory, yt: &Trajectory) -> String {
    let m = xt.params.m();
    let mut s = String::from("n,x,y\n");
    let xs = xt.initial.values().iter().chain(&xt.values);
    let ys = yt.initial.values().iter().chain(&yt.values);
    for (k, (x, y)) in xs.zip(ys).enumerate() {
        writeln!(s, "{},{},{}", k as i64 - m as i64, g17(*x), g17(*y)).unwrap();
    }
    s
}

/// `n,y,u`; `u` is empty before the matching window.
pub fn envelope_csv(traj: &Trajectory, report: &EnvelopeReport) -> String {
    let m = traj.params.m() as i64;
    let mut s = String::from("n,y,u\n");
    for n in -m..=traj.len() as i64 {
        writeln!(s, "{n},{},{}", g17(traj.y(n).unwrap()), opt(report.u(n))).unwrap();
    }
    s
}

/// `re,im,modulus,residual`, largest modulus first.
pub fn roots_csv(report: &StabilityReport) -> String {
    let mut s = String::from("re,im,modulus,residual\n");
    for (z, r) in report.roots.roots.iter().zip(&report.roots.residuals) {
        writeln!(s, "{},{},{},{}", g17(z.re), g17(z.im), g17(z.norm()), g17(*r)).unwrap();
    }
    s
}

pub const SWEEP_HEADER: &str = "p,m,n_converged,n_diverged,n_undetermined,median_err,median_rate";

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for c in cells {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            g17(c.p),
            c.m,
            c.n_converged,
            c.n_diverged,
            c.n_undetermined,
            opt(c.median_err),
            opt(c.median_rate)
        )
        .unwrap();
    }
    s
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a Settings,
    result: T,
}

/// `{"config": ..., "result": ...}`, pretty-printed.
pub fn json_report<T: Serialize>(config: &Settings, result: T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { config, result })?;
    s.push('\n');
    Ok(s)
}

pub fn write_out(path: &str, body: &str) -> anyhow::Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(body.as_bytes())?;
        out.flush()?;
        Ok(())
    } else {
        std::fs::write(path, body).with_context(|| format!("writing {path}"))
    }
}
