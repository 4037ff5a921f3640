//! Closed-form lambda_M maximum for X states with identical local purity.
//!
//! In the canonical frame x = (0,0,x3), y = (0,0,y3), T = diag(t1,t2,t3) and
//! |x3| = |y3| = r. With s = l3^2,
//!
//! lambda_M(l) = r^2 s + [r^2 + l'^2 + sqrt(F)] / 2,  F = (r^2 - l'^2)^2 + 4 r^2 t3^2 s,
//!
//! where l'^2 = |T l|^2. The maximum is one of ten candidates: interior
//! stationary points along the l1 = 0 or l2 = 0 meridians and the endpoints
//! s = 0 and s = 1.

use std::fmt;

use nalgebra::Vector3;
use serde::{Serialize, Serializer};

use crate::error::DispatchError;
use crate::measures::{best_k_for, maximize_lambda_m, Branch, MeasureResult, Method};
use crate::sphere::GridSpec;
use crate::state::{XStateParams, PURITY_TOL};

/// |t1 - t2| at or below this selects the equal-t candidate list.
pub const EQUAL_T_TOL: f64 = 1e-10;
/// Any |t_i| at or below this sends the state to the numeric optimizer.
pub const ZERO_T_TOL: f64 = 1e-12;
/// Slack for the interior solution's s = l3^2 to leave [0, 1], and for r^2
/// to leave its (inclusive) interval.
pub const S_RANGE_TOL: f64 = 1e-12;
/// Minimum |t_i -+ t3| for an interior solution to exist.
const GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CandidateLabel {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    L7,
    L8,
    L9,
    L10,
}

impl CandidateLabel {
    pub fn index(&self) -> usize {
        *self as usize + 1
    }
}

impl fmt::Display for CandidateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "λ{}", self.index())
    }
}

impl Serialize for CandidateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub label: CandidateLabel,
    pub value: f64,
    pub l_direction: Vector3<f64>,
    pub admissible: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Largest admissible candidate; ties go to the earlier label.
    pub fn best(&self) -> &Candidate {
        let mut best: Option<&Candidate> = None;
        for c in self.candidates.iter().filter(|c| c.admissible) {
            if best.is_none_or(|b| c.value > b.value) {
                best = Some(c);
            }
        }
        best.expect("endpoint candidates are always admissible")
    }

    pub fn get(&self, label: CandidateLabel) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.label == label)
    }

    pub fn admissible(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.admissible)
    }
}

/// F(s) = (r^2 - l'^2)^2 + 4 r^2 t3^2 s with the in-plane part of l along x,
/// so l'^2 = t1^2 (1 - s) + t3^2 s.
///
/// For t1 != t2 the in-plane split of 1 - s matters; use [`f_function_at`].
pub fn f_function(params: &XStateParams, l3sq: f64) -> f64 {
    let l_in = (1.0 - l3sq).max(0.0).sqrt();
    f_function_at(params, &Vector3::new(l_in, 0.0, l3sq.max(0.0).sqrt()))
}

/// F at an explicit direction l.
pub fn f_function_at(params: &XStateParams, l: &Vector3<f64>) -> f64 {
    let r2 = params.r().powi(2);
    let lp2 = (params.t1 * l.x).powi(2) + (params.t2 * l.y).powi(2) + (params.t3 * l.z).powi(2);
    (r2 - lp2).powi(2) + 4.0 * r2 * params.t3.powi(2) * l.z.powi(2)
}

fn check_purity(p: &XStateParams) -> Result<(), DispatchError> {
    if !p.identical_purity() {
        return Err(DispatchError::PurityMismatch { x3: p.x3, y3: p.y3 });
    }
    Ok(())
}

fn check_nonzero(p: &XStateParams) -> Result<(), DispatchError> {
    if p.t().iter().any(|t| t.abs() <= ZERO_T_TOL) {
        return Err(DispatchError::ZeroCorrelation(p.t1, p.t2, p.t3));
    }
    Ok(())
}

/// Interior stationary point along a meridian whose in-plane correlation is `ta`.
///
/// `sign` is +1 for the branch built on ta - t3 and -1 for ta + t3.
fn interior(
    label: CandidateLabel,
    r2: f64,
    ta: f64,
    t3: f64,
    sign: f64,
    axis: usize,
) -> Candidate {
    let d = ta - sign * t3;
    let sign_ok = if sign > 0.0 { ta * t3 > 0.0 } else { ta * t3 < 0.0 };
    let (lo, hi) = {
        let a = sign * t3 * d;
        let b = ta * d;
        (a.min(b), a.max(b))
    };
    let pm = if sign > 0.0 { '-' } else { '+' };
    if d.abs() <= GAP_TOL {
        return Candidate {
            label,
            value: f64::NAN,
            l_direction: Vector3::z(),
            admissible: false,
            note: format!("t{} {pm} t3 vanishes", axis + 1),
        };
    }
    let s = (ta * d - r2) / (d * d);
    let value = r2 * (2.0 * ta * d - r2) / (d * d);
    let in_interval = (lo - S_RANGE_TOL..=hi + S_RANGE_TOL).contains(&r2);
    let s_ok = (-S_RANGE_TOL..=1.0 + S_RANGE_TOL).contains(&s);
    let sc = s.clamp(0.0, 1.0);
    let mut l = Vector3::zeros();
    l[axis] = (1.0 - sc).sqrt();
    l[2] = sc.sqrt();
    let admissible = sign_ok && in_interval && s_ok;
    let mut note = format!(
        "t{n}t3 {cmp} 0: {ok}; r^2 in [{lo:.6}, {hi:.6}]: {in_interval}; l3^2 = {s:.6}",
        n = axis + 1,
        cmp = if sign > 0.0 { ">" } else { "<" },
        ok = sign_ok,
    );
    if in_interval && !s_ok {
        note.push_str(" (outside [0,1])");
    }
    Candidate {
        label,
        value,
        l_direction: l,
        admissible,
        note,
    }
}

fn endpoint(label: CandidateLabel, value: f64, l: Vector3<f64>, note: &str) -> Candidate {
    Candidate {
        label,
        value,
        l_direction: l,
        admissible: true,
        note: note.to_string(),
    }
}

/// Candidates for t1 = t2.
pub fn candidates_equal_t(params: &XStateParams) -> Result<CandidateSet, DispatchError> {
    check_purity(params)?;
    let XStateParams { t1, t2, t3, .. } = *params;
    if (t1 - t2).abs() > EQUAL_T_TOL {
        return Err(DispatchError::ExpectedEqualT { t1, t2 });
    }
    check_nonzero(params)?;
    let r2 = params.r().powi(2);
    Ok(CandidateSet {
        candidates: vec![
            interior(CandidateLabel::L1, r2, t1, t3, 1.0, 0),
            interior(CandidateLabel::L2, r2, t1, t3, -1.0, 0),
            endpoint(CandidateLabel::L3, r2.max(t1 * t1), Vector3::x(), "l3 = 0"),
            endpoint(CandidateLabel::L4, 2.0 * r2 + t3 * t3, Vector3::z(), "l3 = 1"),
        ],
    })
}

/// Candidates for t1 != t2.
pub fn candidates_unequal_t(params: &XStateParams) -> Result<CandidateSet, DispatchError> {
    check_purity(params)?;
    let XStateParams { t1, t2, t3, .. } = *params;
    if (t1 - t2).abs() <= EQUAL_T_TOL {
        return Err(DispatchError::ExpectedUnequalT { t1, t2 });
    }
    check_nonzero(params)?;
    let r2 = params.r().powi(2);
    let in_plane = if t1 * t1 >= t2 * t2 { Vector3::x() } else { Vector3::y() };
    Ok(CandidateSet {
        candidates: vec![
            interior(CandidateLabel::L5, r2, t2, t3, 1.0, 1),
            interior(CandidateLabel::L6, r2, t2, t3, -1.0, 1),
            interior(CandidateLabel::L7, r2, t1, t3, 1.0, 0),
            interior(CandidateLabel::L8, r2, t1, t3, -1.0, 0),
            endpoint(
                CandidateLabel::L9,
                r2.max(t1 * t1).max(t2 * t2),
                in_plane,
                "l3 = 0",
            ),
            endpoint(CandidateLabel::L10, 2.0 * r2 + t3 * t3, Vector3::z(), "l3 = 1"),
        ],
    })
}

/// Candidate list matching the parameters (equal or unequal t1, t2).
pub fn candidates(params: &XStateParams) -> Result<CandidateSet, DispatchError> {
    if (params.t1 - params.t2).abs() <= EQUAL_T_TOL {
        candidates_equal_t(params)
    } else {
        candidates_unequal_t(params)
    }
}

/// Full outcome of the X-state maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct XSolution {
    pub lambda: f64,
    pub l_opt: Vector3<f64>,
    pub branch: Branch,
    /// Present unless the state went to the numeric optimizer.
    pub candidates: Option<CandidateSet>,
}

/// Maximize lambda_M for canonical parameters. Identical purity is assumed;
/// states with a vanishing t_i use the numeric optimizer.
pub fn solve_x_state(params: &XStateParams) -> XSolution {
    match candidates(params) {
        Ok(set) => {
            let best = set.best().clone();
            XSolution {
                lambda: best.value,
                l_opt: best.l_direction,
                branch: Branch::Candidate(best.label),
                candidates: Some(set),
            }
        }
        Err(_) => {
            let (lambda, l) = maximize_lambda_m(&params.to_r_matrix(), &GridSpec::default());
            XSolution {
                lambda,
                l_opt: l,
                branch: Branch::Numeric,
                candidates: None,
            }
        }
    }
}

/// (lambda_max, l_opt, branch) for an identical-purity X state.
pub fn lambda_max_x_state(params: &XStateParams) -> Result<(f64, Vector3<f64>, Branch), DispatchError> {
    check_purity(params)?;
    let sol = solve_x_state(params);
    Ok((sol.lambda, sol.l_opt, sol.branch))
}

/// Two-sided measure of an identical-purity X state.
pub fn g_x_state(params: &XStateParams) -> Result<MeasureResult, DispatchError> {
    check_purity(params)?;
    debug_assert!((params.x3.abs() - params.y3.abs()).abs() <= PURITY_TOL);
    let sol = solve_x_state(params);
    let r = params.to_r_matrix();
    let method = if sol.branch == Branch::Numeric {
        Method::ReducedNumeric
    } else {
        Method::AnalyticSpecial
    };
    Ok(MeasureResult::new(
        0.25 * (r.total_weight() - sol.lambda),
        Some(best_k_for(&r, &sol.l_opt)),
        Some(sol.l_opt),
        method,
        sol.branch,
    ))
}
