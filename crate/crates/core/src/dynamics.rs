//! Time series of the two-sided measure for a damped pair of qubits and for
//! the two environment qubits that absorb the damping.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{environment_state, gamma_of_t, system_state};
use crate::error::{DispatchError, DynamicsError};
use crate::measures::{two_sided_measure, Branch, MeasureResult, Method};
use crate::state::{canonicalize_x_state, XStateParams};
use crate::xstate::{solve_x_state, CandidateSet};

/// Candidates closer than this to the maximum do not trigger a branch switch.
pub const TIE_TOL: f64 = 1e-12;
/// Bisection stops at this fraction of t_max.
pub const BISECTION_REL_TOL: f64 = 1e-6;
/// Kink fallback: flag a second difference above this multiple of the local median.
pub const KINK_FACTOR: f64 = 10.0;
/// Relative tolerance on the fitted decay slope.
pub const RATE_REL_TOL: f64 = 0.02;
/// Minimum number of samples after the last critical time for a rate fit.
pub const MIN_RATE_SAMPLES: usize = 10;

pub const DEFAULT_STEPS: usize = 2000;

/// Default horizon 10 / kappa.
pub fn default_t_max(kappa: f64) -> f64 {
    10.0 / kappa
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    System,
    Environment,
}

/// Initial state and decay rate that generated a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceModel {
    pub initial: XStateParams,
    pub kappa: f64,
}

/// Measure of one curve at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub g: f64,
    pub branch: Branch,
    pub candidates: Option<CandidateSet>,
}

impl SourceModel {
    /// Evaluate the measure of the system or environment pair at time `t`.
    ///
    /// Identical-purity X states use the closed form; anything else (for
    /// example x3 = -y3 initial data, whose purities drift apart) falls back
    /// to the general two-sided measure.
    pub fn evaluate(&self, curve: Curve, t: f64) -> Result<CurvePoint, DynamicsError> {
        let gamma = gamma_of_t(self.kappa, t)?;
        let rho0 = self.initial.to_density();
        let rho = match curve {
            Curve::System => system_state(&rho0, gamma)?,
            Curve::Environment => environment_state(&rho0, gamma)?,
        };
        let canon = canonicalize_x_state(&rho).map_err(DispatchError::from)?;
        let p = canon.params;
        if p.identical_purity() {
            let sol = solve_x_state(&p);
            let g = MeasureResult::new(
                0.25 * (p.to_r_matrix().total_weight() - sol.lambda),
                None,
                None,
                Method::AnalyticSpecial,
                sol.branch,
            );
            Ok(CurvePoint {
                g: g.value,
                branch: sol.branch,
                candidates: sol.candidates,
            })
        } else {
            let g = two_sided_measure(&p.to_r_matrix());
            Ok(CurvePoint {
                g: g.value,
                branch: Branch::Numeric,
                candidates: None,
            })
        }
    }
}

/// Sampled G(t) for the system and environment pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub g_sys: Vec<f64>,
    pub g_env: Vec<f64>,
    /// Empty when the series carries no branch information.
    pub branch_sys: Vec<Branch>,
    pub branch_env: Vec<Branch>,
    pub critical_sys: Vec<f64>,
    pub critical_env: Vec<f64>,
    pub source: Option<SourceModel>,
}

impl CorrelationSeries {
    /// A bare series without branch labels or source model.
    pub fn from_values(times: Vec<f64>, g_sys: Vec<f64>, g_env: Vec<f64>) -> Self {
        assert_eq!(times.len(), g_sys.len());
        assert_eq!(times.len(), g_env.len());
        Self {
            times,
            g_sys,
            g_env,
            branch_sys: Vec::new(),
            branch_env: Vec::new(),
            critical_sys: Vec::new(),
            critical_env: Vec::new(),
            source: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    fn values(&self, curve: Curve) -> &[f64] {
        match curve {
            Curve::System => &self.g_sys,
            Curve::Environment => &self.g_env,
        }
    }

    fn labels(&self, curve: Curve) -> &[Branch] {
        match curve {
            Curve::System => &self.branch_sys,
            Curve::Environment => &self.branch_env,
        }
    }

    /// G of a curve at time `t`: exact when the source model is known,
    /// otherwise linear interpolation of the samples.
    pub fn value_at(&self, curve: Curve, t: f64) -> f64 {
        if let Some(src) = &self.source {
            if let Ok(p) = src.evaluate(curve, t) {
                return p.g;
            }
        }
        interpolate(&self.times, self.values(curve), t)
    }

    /// CSV with header `t,g_sys,g_env,branch_sys,branch_env`, 12 significant
    /// digits. With `trailer` set the critical times follow as a `# {json}` line.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, trailer: bool) -> io::Result<()> {
        writeln!(w, "t,g_sys,g_env,branch_sys,branch_env")?;
        for i in 0..self.len() {
            let bs = self.branch_sys.get(i).map(|b| b.to_string()).unwrap_or_default();
            let be = self.branch_env.get(i).map(|b| b.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{bs},{be}",
                self.times[i], self.g_sys[i], self.g_env[i]
            )?;
        }
        if trailer {
            writeln!(w, "# {}", self.critical_json())?;
        }
        Ok(())
    }

    /// `{"critical_sys":[...],"critical_env":[...]}`.
    pub fn critical_json(&self) -> String {
        #[derive(Serialize)]
        struct Critical<'a> {
            critical_sys: &'a [f64],
            critical_env: &'a [f64],
        }
        serde_json::to_string(&Critical {
            critical_sys: &self.critical_sys,
            critical_env: &self.critical_env,
        })
        .expect("plain float lists serialize")
    }
}

fn interpolate(times: &[f64], vals: &[f64], t: f64) -> f64 {
    match times.iter().position(|&ti| ti >= t) {
        None => *vals.last().unwrap_or(&0.0),
        Some(0) => vals[0],
        Some(i) => {
            let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            vals[i - 1] * (1.0 - w) + vals[i] * w
        }
    }
}

/// Whether `label` is still (within [`TIE_TOL`]) a maximizing candidate at `point`.
fn still_active(point: &CurvePoint, label: Branch) -> bool {
    let (Branch::Candidate(l), Some(set)) = (label, &point.candidates) else {
        return point.branch == label;
    };
    let best = set.best().value;
    set.get(l).is_some_and(|c| c.admissible && c.value >= best - TIE_TOL)
}

/// Branch labels with ties resolved in favour of the previous label.
fn sticky_labels(points: &[CurvePoint]) -> Vec<Branch> {
    let mut out: Vec<Branch> = Vec::with_capacity(points.len());
    for p in points {
        let label = match out.last() {
            Some(&prev) if still_active(p, prev) => prev,
            _ => p.branch,
        };
        out.push(label);
    }
    out
}

/// Evolve `initial` under identical amplitude damping on both qubits and
/// record G for system and environment on `n_steps` uniform times in [0, t_max].
pub fn sample_dynamics(
    initial: &XStateParams,
    kappa: f64,
    t_max: f64,
    n_steps: usize,
) -> Result<CorrelationSeries, DynamicsError> {
    for (name, value) in [("kappa", kappa), ("t_max", t_max)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(DynamicsError::NonPositive { name, value });
        }
    }
    if n_steps < 2 {
        return Err(DynamicsError::TooFewSteps(n_steps));
    }
    if !initial.identical_purity() {
        return Err(DispatchError::PurityMismatch {
            x3: initial.x3,
            y3: initial.y3,
        }
        .into());
    }
    let source = SourceModel {
        initial: *initial,
        kappa,
    };
    let times: Vec<f64> = (0..n_steps)
        .map(|i| t_max * i as f64 / (n_steps - 1) as f64)
        .collect();
    let points: Vec<(CurvePoint, CurvePoint)> = times
        .par_iter()
        .map(|&t| Ok((source.evaluate(Curve::System, t)?, source.evaluate(Curve::Environment, t)?)))
        .collect::<Result<_, DynamicsError>>()?;
    let (sys, env): (Vec<CurvePoint>, Vec<CurvePoint>) = points.into_iter().unzip();

    let mut series = CorrelationSeries {
        g_sys: sys.iter().map(|p| p.g).collect(),
        g_env: env.iter().map(|p| p.g).collect(),
        branch_sys: sticky_labels(&sys),
        branch_env: sticky_labels(&env),
        times,
        critical_sys: Vec::new(),
        critical_env: Vec::new(),
        source: Some(source),
    };
    let (cs, ce) = detect_sudden_changes(&series);
    series.critical_sys = cs;
    series.critical_env = ce;
    Ok(series)
}

/// Critical times of the system and environment curves.
///
/// With branch labels, a critical time is a switch between two closed-form
/// candidates, located by bisection when the source model is available and
/// at the grid midpoint otherwise. Curves without any closed-form label use
/// the second-difference kink detector.
pub fn detect_sudden_changes(series: &CorrelationSeries) -> (Vec<f64>, Vec<f64>) {
    (
        detect_curve(series, Curve::System),
        detect_curve(series, Curve::Environment),
    )
}

fn detect_curve(series: &CorrelationSeries, curve: Curve) -> Vec<f64> {
    let labels = series.labels(curve);
    let analytic = labels.iter().any(|b| matches!(b, Branch::Candidate(_)));
    if !analytic {
        return detect_kinks(&series.times, series.values(curve));
    }
    let tol = BISECTION_REL_TOL * series.t_max();
    let mut out = Vec::new();
    for i in 1..labels.len() {
        let (a, b) = (labels[i - 1], labels[i]);
        if a == b || !matches!(a, Branch::Candidate(_)) || !matches!(b, Branch::Candidate(_)) {
            continue;
        }
        let (mut lo, mut hi) = (series.times[i - 1], series.times[i]);
        if let Some(src) = &series.source {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                match src.evaluate(curve, mid) {
                    Ok(p) if still_active(&p, a) => lo = mid,
                    Ok(_) => hi = mid,
                    Err(_) => break,
                }
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Kink detector for unlabelled data: flag interior points whose second
/// difference exceeds [`KINK_FACTOR`] times the median magnitude in a local
/// window; adjacent flags merge and report their strongest point.
pub fn detect_kinks(times: &[f64], g: &[f64]) -> Vec<f64> {
    const HALF_WINDOW: usize = 10;
    let n = g.len();
    if n < 5 {
        return Vec::new();
    }
    let d2: Vec<f64> = (1..n - 1).map(|i| (g[i + 1] - 2.0 * g[i] + g[i - 1]).abs()).collect();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * scale + f64::MIN_POSITIVE;

    let mut flags = vec![false; d2.len()];
    for (i, flag) in flags.iter_mut().enumerate() {
        let lo = i.saturating_sub(HALF_WINDOW);
        let hi = (i + HALF_WINDOW + 1).min(d2.len());
        let mut local: Vec<f64> = (lo..hi)
            .filter(|&j| j.abs_diff(i) > 2)
            .map(|j| d2[j])
            .collect();
        if local.is_empty() {
            continue;
        }
        local.sort_by(f64::total_cmp);
        let median = local[local.len() / 2];
        *flag = d2[i] > KINK_FACTOR * median && d2[i] > floor;
    }

    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < flags.len() && flags[i] {
            i += 1;
        }
        let peak = (start..i).max_by(|&a, &b| d2[a].total_cmp(&d2[b]).then(b.cmp(&a))).unwrap();
        out.push(times[peak + 1]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub status: CheckStatus,
    pub tol: f64,
    pub checks: Vec<Check>,
}

/// Compare the system curve with the environment curve:
/// G(0) = G'(t_max), G(t_max) = G'(0), and, when both curves have exactly two
/// critical times, G(t1) = G'(t'2) and G(t2) = G'(t'1).
pub fn verify_correspondence(series: &CorrelationSeries, tol: f64) -> CorrespondenceReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64| {
        let residual = (lhs - rhs).abs();
        checks.push(Check {
            name: name.to_string(),
            lhs,
            rhs,
            residual,
            passed: residual <= tol,
        });
    };
    let (Some(&s0), Some(&s_end), Some(&e0), Some(&e_end)) = (
        series.g_sys.first(),
        series.g_sys.last(),
        series.g_env.first(),
        series.g_env.last(),
    ) else {
        return CorrespondenceReport {
            status: CheckStatus::Inconclusive,
            tol,
            checks,
        };
    };
    push("G(0) = G'(t_max)", s0, e_end);
    push("G(t_max) = G'(0)", s_end, e0);
    if let ([t1, t2], [u1, u2]) = (series.critical_sys.as_slice(), series.critical_env.as_slice()) {
        push(
            "G(t1) = G'(t'2)",
            series.value_at(Curve::System, *t1),
            series.value_at(Curve::Environment, *u2),
        );
        push(
            "G(t2) = G'(t'1)",
            series.value_at(Curve::System, *t2),
            series.value_at(Curve::Environment, *u1),
        );
    }
    let status = if s_end >= tol {
        CheckStatus::Inconclusive
    } else if checks.iter().all(|c| c.passed) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    CorrespondenceReport { status, tol, checks }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub status: CheckStatus,
    pub expected_slope: f64,
    pub slope: Option<f64>,
    pub relative_error: Option<f64>,
    /// Largest |g e^{kappa t} / mean - 1| over the fit window.
    pub max_relative_deviation: Option<f64>,
    pub window_start: Option<f64>,
    pub samples: usize,
    pub note: String,
}

/// Least-squares slope of log g_sys(t) after the last system critical time,
/// compared with -kappa.
pub fn asymptotic_rate(series: &CorrelationSeries, kappa: f64) -> RateReport {
    let expected = -kappa;
    let inconclusive = |samples, window_start, note: &str| RateReport {
        status: CheckStatus::Inconclusive,
        expected_slope: expected,
        slope: None,
        relative_error: None,
        max_relative_deviation: None,
        window_start,
        samples,
        note: note.to_string(),
    };
    let Some(&start) = series.critical_sys.last() else {
        return inconclusive(0, None, "no critical time on the system curve");
    };
    let window: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.g_sys)
        .filter(|(t, g)| **t > start && **g > 0.0)
        .map(|(t, g)| (*t, *g))
        .collect();
    if window.len() < MIN_RATE_SAMPLES {
        return inconclusive(window.len(), Some(start), "too few samples after the last critical time");
    }
    let (slope, _) = fit_line(window.iter().map(|(t, g)| (*t, g.ln())));
    let scaled: Vec<f64> = window.iter().map(|(t, g)| g * (kappa * t).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let max_dev = scaled.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    let rel = (slope - expected).abs() / kappa;
    RateReport {
        status: if rel <= RATE_REL_TOL {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        expected_slope: expected,
        slope: Some(slope),
        relative_error: Some(rel),
        max_relative_deviation: Some(max_dev),
        window_start: Some(start),
        samples: window.len(),
        note: String::new(),
    }
}

/// Ordinary least squares y = a x + b; returns (a, b).
pub fn fit_line(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}
