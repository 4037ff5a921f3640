//! Hilbert-Schmidt distances to measurement-induced classical states and the
//! geometric correlation measures built on them.

pub mod oracle;

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Serialize, Serializer};

use crate::eigen::{canonical_sign, top_eigen};
use crate::sphere::{same_axis, GridSpec, TangentChart};
use crate::state::{canonicalize_x_r, MeasurementDirections, RMatrix, PURITY_TOL};
use crate::xstate::{solve_x_state, CandidateLabel};

pub use oracle::{brute_force_g, brute_force_lambda_max, grid_minimum_g};

/// Negative values at least this close to zero are reported as zero.
pub const CLAMP_TOL: f64 = 1e-12;
/// Bloch vectors shorter than this count as maximally mixed marginals.
pub const MIXED_MARGINAL_TOL: f64 = 1e-12;
/// Stop refining once a full sweep improves the objective by less than this.
pub const REFINE_TOL: f64 = 1e-12;

/// How a measure value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticSpecial,
    ReducedNumeric,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::AnalyticSpecial => "analytic-special",
            Method::ReducedNumeric => "reduced-numeric",
            Method::BruteForce => "brute-force",
        })
    }
}

/// Which formula produced the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Both marginals maximally mixed: largest squared singular value of T.
    MixedMarginals,
    /// A maximally mixed: top eigenvalue of Y + T^T T.
    MixedMarginalA,
    /// B maximally mixed: top eigenvalue of X + T T^T.
    MixedMarginalB,
    /// Identical-purity X state, closed-form candidate.
    Candidate(CandidateLabel),
    /// Grid scan plus local refinement of lambda_M.
    Numeric,
    /// One-sided measure, top eigenvector of a single 3x3 matrix.
    TopEigenvector,
    /// Brute-force oracle.
    Grid,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::MixedMarginals => f.write_str("mixed-marginals"),
            Branch::MixedMarginalA => f.write_str("mixed-marginal-a"),
            Branch::MixedMarginalB => f.write_str("mixed-marginal-b"),
            Branch::Candidate(label) => write!(f, "{label}"),
            Branch::Numeric => f.write_str("numeric"),
            Branch::TopEigenvector => f.write_str("top-eigenvector"),
            Branch::Grid => f.write_str("grid"),
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A correlation measure together with the optimal measurement directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub k_opt: Option<Vector3<f64>>,
    pub l_opt: Option<Vector3<f64>>,
    pub method: Method,
    pub branch: Branch,
}

impl MeasureResult {
    pub(crate) fn new(
        value: f64,
        k_opt: Option<Vector3<f64>>,
        l_opt: Option<Vector3<f64>>,
        method: Method,
        branch: Branch,
    ) -> Self {
        Self {
            value: clamp_small_negative(value),
            k_opt,
            l_opt,
            method,
            branch,
        }
    }

    /// Recover lambda_max = x^2 + y^2 + ||T||^2 - 4G for state `r`.
    pub fn lambda_max(&self, r: &RMatrix) -> f64 {
        r.total_weight() - 4.0 * self.value
    }
}

fn clamp_small_negative(v: f64) -> f64 {
    if (-CLAMP_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// Squared Hilbert-Schmidt distance between two states in Bloch form.
pub fn hs_distance_sq(a: &RMatrix, b: &RMatrix) -> f64 {
    0.25 * ((a.x - b.x).norm_squared() + (a.y - b.y).norm_squared() + (a.t - b.t).norm_squared())
}

/// Classical-classical state produced by measuring along `k` on A and `l` on B.
pub fn micc_project(r: &RMatrix, m: &MeasurementDirections) -> RMatrix {
    let k = m.k_projector();
    let l = m.l_projector();
    RMatrix::new(k * r.x, l * r.y, k * r.t * l)
}

/// Squared distance from `r` to its measurement-induced CC state.
pub fn d2_to_micc(r: &RMatrix, m: &MeasurementDirections) -> f64 {
    let xk = r.x.dot(&m.k);
    let yl = r.y.dot(&m.l);
    let ktl = m.k.dot(&(r.t * m.l));
    0.25 * (r.total_weight() - xk * xk - yl * yl - ktl * ktl)
}

/// Classical-quantum state produced by measuring A along `k`.
pub fn cq_project(r: &RMatrix, k: &Vector3<f64>) -> RMatrix {
    let kk = k * k.transpose();
    RMatrix::new(kk * r.x, r.y, kk * r.t)
}

/// One-sided measure with the measurement on A.
pub fn one_sided_measure_a(r: &RMatrix) -> MeasureResult {
    let m = r.x * r.x.transpose() + r.t * r.t.transpose();
    one_sided_from(&m, true)
}

/// One-sided measure with the measurement on B.
pub fn one_sided_measure_b(r: &RMatrix) -> MeasureResult {
    let m = r.y * r.y.transpose() + r.t.transpose() * r.t;
    one_sided_from(&m, false)
}

fn one_sided_from(m: &Matrix3<f64>, on_a: bool) -> MeasureResult {
    let (top, v) = top_eigen(m);
    let (k, l) = if on_a { (Some(v), None) } else { (None, Some(v)) };
    MeasureResult::new(
        0.25 * (m.trace() - top),
        k,
        l,
        Method::AnalyticSpecial,
        Branch::TopEigenvector,
    )
}

/// Largest eigenvalue of `a a^T + b b^T`.
pub fn pair_top_value(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let (a2, b2, ab) = (a.norm_squared(), b.norm_squared(), a.dot(b));
    0.5 * (a2 + b2 + ((a2 - b2).powi(2) + 4.0 * ab * ab).sqrt())
}

/// Largest eigenvalue of `a a^T + b b^T` and a unit eigenvector.
///
/// The eigenvector is `None` only when both inputs vanish.
pub fn pair_top_eigen(a: &Vector3<f64>, b: &Vector3<f64>) -> (f64, Option<Vector3<f64>>) {
    let (a2, b2, ab) = (a.norm_squared(), b.norm_squared(), a.dot(b));
    let root = ((a2 - b2).powi(2) + 4.0 * ab * ab).sqrt();
    let lambda = 0.5 * (a2 + b2 + root);
    if a2 + b2 == 0.0 {
        return (0.0, None);
    }

    // Closed-form vector and its mirror image under a <-> b; both are
    // eigenvectors, the longer one is the better conditioned.
    let v = a * (a2 - b2 + root) + b * (2.0 * ab);
    let w = b * (b2 - a2 + root) + a * (2.0 * ab);
    let best = if v.norm_squared() >= w.norm_squared() { v } else { w };
    let scale = (a2 + b2).powf(1.5);
    if best.norm() > 1e-10 * scale {
        return (lambda, Some(canonical_sign(best.normalize())));
    }
    // Degenerate top eigenspace (orthogonal vectors of equal length).
    let m = a * a.transpose() + b * b.transpose();
    let (_, v) = top_eigen(&m);
    (lambda, Some(v))
}

/// lambda_M(l): largest eigenvalue of X + T L T^T + <l|Y|l> I.
pub fn lambda_m(r: &RMatrix, l: &Vector3<f64>) -> f64 {
    let yl = r.y.dot(l);
    yl * yl + pair_top_value(&r.x, &(r.t * l))
}

/// lambda_N(k): largest eigenvalue of Y + T^T K T + <k|X|k> I.
pub fn lambda_n(r: &RMatrix, k: &Vector3<f64>) -> f64 {
    let xk = r.x.dot(k);
    xk * xk + pair_top_value(&r.y, &(r.t.transpose() * k))
}

/// Optimal A direction for a given B direction: top eigenvector of M(l).
pub fn best_k_for(r: &RMatrix, l: &Vector3<f64>) -> Vector3<f64> {
    pair_top_eigen(&r.x, &(r.t * l)).1.unwrap_or_else(Vector3::z)
}

/// Optimal B direction for a given A direction: top eigenvector of N(k).
pub fn best_l_for(r: &RMatrix, k: &Vector3<f64>) -> Vector3<f64> {
    pair_top_eigen(&r.y, &(r.t.transpose() * k)).1.unwrap_or_else(Vector3::z)
}

/// Two-sided geometric measure G.
pub fn two_sided_measure(r: &RMatrix) -> MeasureResult {
    let weight = r.total_weight();
    let x_mixed = r.x.norm() <= MIXED_MARGINAL_TOL;
    let y_mixed = r.y.norm() <= MIXED_MARGINAL_TOL;

    let finish = |lambda: f64, l: Vector3<f64>, method, branch| {
        let k = best_k_for(r, &l);
        MeasureResult::new(0.25 * (weight - lambda), Some(k), Some(l), method, branch)
    };

    if x_mixed && y_mixed {
        let svd = r.t.svd(false, true);
        let (i, smax) = svd.singular_values.argmax();
        let l = svd.v_t.map(|vt| vt.row(i).transpose()).unwrap_or_else(Vector3::z);
        return finish(smax * smax, canonical_sign(l), Method::AnalyticSpecial, Branch::MixedMarginals);
    }
    if x_mixed {
        let (lambda, l) = top_eigen(&(r.y * r.y.transpose() + r.t.transpose() * r.t));
        return finish(lambda, l, Method::AnalyticSpecial, Branch::MixedMarginalA);
    }
    if y_mixed {
        let (lambda, k) = top_eigen(&(r.x * r.x.transpose() + r.t * r.t.transpose()));
        let l = best_l_for(r, &k);
        return MeasureResult::new(
            0.25 * (weight - lambda),
            Some(k),
            Some(l),
            Method::AnalyticSpecial,
            Branch::MixedMarginalB,
        );
    }
    if let Ok(canon) = canonicalize_x_r(r) {
        let p = canon.params;
        if (p.x3.abs() - p.y3.abs()).abs() <= PURITY_TOL {
            let sol = solve_x_state(&p);
            let method = match sol.branch {
                Branch::Numeric => Method::ReducedNumeric,
                _ => Method::AnalyticSpecial,
            };
            let l = canon.direction_b_to_input(&sol.l_opt);
            return finish(sol.lambda, l, method, sol.branch);
        }
    }
    let (lambda, l) = maximize_lambda_m(r, &GridSpec::default());
    finish(lambda, l, Method::ReducedNumeric, Branch::Numeric)
}

/// Maximize lambda_M over the sphere: half-sphere grid scan, then coordinate
/// parabolic refinement from the best few well-separated grid points.
pub fn maximize_lambda_m(r: &RMatrix, grid: &GridSpec) -> (f64, Vector3<f64>) {
    let pts = grid.points();
    let vals: Vec<f64> = pts.iter().map(|l| lambda_m(r, l)).collect();
    let seeds = diverse_top(&pts, &vals, 6, (3.0 * grid.spacing()).cos());

    let f = |l: &Vector3<f64>| lambda_m(r, l);
    let mut best = (f64::NEG_INFINITY, Vector3::z());
    for &i in &seeds {
        let (v, l) = refine_parabolic(&f, pts[i], grid.spacing());
        if v > best.0 {
            best = (v, l);
        }
    }
    (best.0, canonical_sign(best.1))
}

/// Indices of up to `count` largest values whose directions are pairwise
/// separated (as axes) by more than `cos_sep`. Ties keep scan order.
pub(crate) fn diverse_top(pts: &[Vector3<f64>], vals: &[f64], count: usize, cos_sep: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for i in order {
        if chosen.iter().all(|&j| !same_axis(&pts[i], &pts[j], cos_sep)) {
            chosen.push(i);
            if chosen.len() == count {
                break;
            }
        }
    }
    chosen
}

/// Successive parabolic steps along the two tangent coordinates, re-centred
/// after every move, until a sweep gains less than [`REFINE_TOL`] at the
/// smallest step.
fn refine_parabolic<F: Fn(&Vector3<f64>) -> f64>(f: &F, start: Vector3<f64>, h0: f64) -> (f64, Vector3<f64>) {
    let mut c = start;
    let mut fc = f(&c);
    let mut h = h0;
    for _ in 0..2000 {
        let before = fc;
        let mut max_step: f64 = 0.0;
        for axis in 0..2 {
            let chart = TangentChart::new(c);
            let pt = |s: f64| if axis == 0 { chart.at(s, 0.0) } else { chart.at(0.0, s) };
            let (fp, fm) = (f(&pt(h)), f(&pt(-h)));
            let mut best = (fc, 0.0);
            if fp > best.0 {
                best = (fp, h);
            }
            if fm > best.0 {
                best = (fm, -h);
            }
            let curv = fp - 2.0 * fc + fm;
            if curv < 0.0 {
                let s = (h * (fm - fp) / (2.0 * curv)).clamp(-4.0 * h, 4.0 * h);
                let fs = f(&pt(s));
                if fs > best.0 {
                    best = (fs, s);
                }
            }
            if best.1 != 0.0 {
                c = pt(best.1);
                fc = best.0;
                max_step = max_step.max(best.1.abs());
            }
        }
        if fc - before < REFINE_TOL {
            if h < 1e-9 {
                break;
            }
            h *= 0.1;
        } else {
            h = (2.0 * max_step).clamp(1e-9, h0);
        }
    }
    (fc, c)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // 0.3926 is a state parameter
mod tests {
    use super::*;
    use crate::random::{ginibre_state, random_rotation, random_unit_vector, seeded};
    use crate::state::{swap_parties, to_r_matrix, XStateParams};
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn bell() -> RMatrix {
        RMatrix::bell_phi_plus()
    }

    fn dirs(k: Vector3<f64>, l: Vector3<f64>) -> MeasurementDirections {
        MeasurementDirections::new(k, l).unwrap()
    }

    fn random_r(seed: u64) -> RMatrix {
        to_r_matrix(&ginibre_state(&mut seeded(seed))).unwrap()
    }

    #[test]
    fn hs_distance_examples() {
        assert_eq!(hs_distance_sq(&bell(), &bell()), 0.0);
        assert!((hs_distance_sq(&bell(), &RMatrix::maximally_mixed()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn hs_distance_matches_trace_formula() {
        for seed in 0..100 {
            let (a, b) = (random_r(2 * seed), random_r(2 * seed + 1));
            let diff = a.to_density().0 - b.to_density().0;
            let direct = (diff * diff.adjoint()).trace().re;
            assert!((hs_distance_sq(&a, &b) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn micc_examples() {
        let z = Vector3::z();
        let p = micc_project(&bell(), &dirs(z, z));
        assert!(p.max_abs_diff(&RMatrix::new(Vector3::zeros(), Vector3::zeros(), Matrix3::from_diagonal(&z))) < 1e-15);

        let ground = RMatrix::product(z, z);
        assert!(micc_project(&ground, &dirs(z, z)).max_abs_diff(&ground) < 1e-15);

        let r = random_r(7);
        let p = micc_project(&r, &dirs(Vector3::x(), Vector3::y()));
        assert_eq!(p.x, Vector3::new(r.x[0], 0.0, 0.0));
        assert_eq!(p.y, Vector3::new(0.0, r.y[1], 0.0));
        let mut t = Matrix3::zeros();
        t[(0, 1)] = r.t[(0, 1)];
        assert_eq!(p.t, t);
    }

    #[test]
    fn d2_examples() {
        let z = Vector3::z();
        assert!((d2_to_micc(&bell(), &dirs(z, z)) - 0.5).abs() < 1e-15);
        let cc = RMatrix::product(Vector3::new(0.0, 0.0, 0.4), Vector3::new(0.0, 0.0, -0.3));
        assert!(d2_to_micc(&cc, &dirs(z, z)).abs() < 1e-15);
    }

    #[test]
    fn d2_cross_formulas() {
        let mut rng = seeded(11);
        for seed in 0..100 {
            let r = random_r(seed);
            let m = dirs(random_unit_vector(&mut rng), random_unit_vector(&mut rng));
            let (kk, ll) = (m.k_projector(), m.l_projector());
            let xx = r.x * r.x.transpose();
            let yy = r.y * r.y.transpose();
            let tt = r.t * r.t.transpose();
            let trace_form = 0.25 * ((xx + yy + tt).trace() - (xx * kk + yy * ll + r.t * ll * r.t.transpose() * kk).trace());
            let d = d2_to_micc(&r, &m);
            assert!((d - trace_form).abs() < 1e-12);
            assert!((d - hs_distance_sq(&r, &micc_project(&r, &m))).abs() < 1e-12);
        }
    }

    #[test]
    fn micc_projection_is_idempotent_and_classical() {
        let mut rng = seeded(3);
        for seed in 0..20 {
            let r = random_r(seed);
            let m = dirs(random_unit_vector(&mut rng), random_unit_vector(&mut rng));
            let p = micc_project(&r, &m);
            assert!(micc_project(&p, &m).max_abs_diff(&p) < 1e-14);
            assert!(p.to_density().validate().passed);
        }
    }

    #[test]
    fn cq_examples() {
        let z = Vector3::z();
        let p = cq_project(&bell(), &z);
        assert!(p.max_abs_diff(&RMatrix::new(Vector3::zeros(), Vector3::zeros(), Matrix3::from_diagonal(&z))) < 1e-15);
        let k = Vector3::new(1.0, 1.0, 0.0).normalize();
        let prod = RMatrix::product(k * 0.6, Vector3::new(0.1, 0.2, 0.3));
        assert!(cq_project(&prod, &k).max_abs_diff(&prod) < 1e-15);

        let mut rng = seeded(5);
        for seed in 0..100 {
            let r = random_r(seed);
            let k = random_unit_vector(&mut rng);
            let kk = k * k.transpose();
            let xx = r.x * r.x.transpose();
            let formula = 0.25 * ((xx + r.t.transpose() * r.t).trace() - (xx * kk + r.t * r.t.transpose() * kk).trace());
            assert!((hs_distance_sq(&r, &cq_project(&r, &k)) - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_examples() {
        assert!((one_sided_measure_a(&bell()).value - 0.5).abs() < 1e-14);
        assert!((one_sided_measure_b(&bell()).value - 0.5).abs() < 1e-14);
        let prod = RMatrix::product(Vector3::new(0.1, -0.5, 0.3), Vector3::new(0.0, 0.7, 0.1));
        assert!(one_sided_measure_a(&prod).value.abs() < 1e-14);
        assert!(one_sided_measure_b(&prod).value.abs() < 1e-14);
        let werner = RMatrix::new(
            Vector3::zeros(),
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(0.5, -0.5, 0.5)),
        );
        assert!((one_sided_measure_a(&werner).value - 0.125).abs() < 1e-14);
    }

    #[test]
    fn one_sided_b_is_swapped_a() {
        for seed in 0..50 {
            let r = random_r(seed);
            let b = one_sided_measure_b(&r).value;
            let a = one_sided_measure_a(&swap_parties(&r)).value;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_top_examples() {
        let (lam, v) = pair_top_eigen(&Vector3::x(), &Vector3::y());
        assert!((lam - 1.0).abs() < 1e-15);
        assert_eq!(v.unwrap(), Vector3::x());
        let (lam, v) = pair_top_eigen(&Vector3::x(), &Vector3::x());
        assert!((lam - 2.0).abs() < 1e-15);
        assert!((v.unwrap() - Vector3::x()).norm() < 1e-15);
        assert_eq!(pair_top_eigen(&Vector3::zeros(), &Vector3::zeros()), (0.0, None));
        let (lam, v) = pair_top_eigen(&Vector3::zeros(), &Vector3::new(0.0, -2.0, 0.0));
        assert!((lam - 4.0).abs() < 1e-15);
        assert!((v.unwrap() - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn pair_top_matches_eigensolver() {
        let mut rng = seeded(17);
        for i in 0..1000 {
            let scale = if i % 10 == 0 { 1e-3 } else { 1.0 };
            let a = random_unit_vector(&mut rng) * (0.1 + (i % 7) as f64 * 0.2);
            let b = random_unit_vector(&mut rng) * scale;
            let m = a * a.transpose() + b * b.transpose();
            let direct = SymmetricEigen::new(m).eigenvalues.max();
            let (lam, v) = pair_top_eigen(&a, &b);
            assert!((lam - direct).abs() < 1e-10);
            let v = v.unwrap();
            assert!((m * v - v * lam).norm() < 1e-10, "residual at {i}");
        }
    }

    #[test]
    fn lambda_m_examples() {
        assert!((lambda_m(&bell(), &Vector3::z()) - 1.0).abs() < 1e-15);
        assert!((lambda_n(&bell(), &Vector3::z()) - 1.0).abs() < 1e-15);
        let t = Vector3::new(0.2, 0.5, 0.9);
        let r = RMatrix::new(Vector3::zeros(), Vector3::zeros(), Matrix3::from_diagonal(&t));
        for i in 0..3 {
            let e = Vector3::ith(i, 1.0);
            assert!((lambda_m(&r, &e) - t[i] * t[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_m_matches_eigensolver() {
        let mut rng = seeded(23);
        for seed in 0..1000 {
            let r = random_r(seed);
            let l = random_unit_vector(&mut rng);
            let ll = l * l.transpose();
            let yl = r.y.dot(&l);
            let m = r.x * r.x.transpose() + r.t * ll * r.t.transpose() + Matrix3::identity() * (yl * yl);
            let direct = SymmetricEigen::new(m).eigenvalues.max();
            assert!((lambda_m(&r, &l) - direct).abs() < 1e-10);
            assert!((lambda_n(&r, &l) - lambda_m(&swap_parties(&r), &l)).abs() < 1e-14);
        }
    }

    #[test]
    fn two_sided_special_values() {
        let g = two_sided_measure(&bell());
        assert!((g.value - 0.5).abs() < 1e-14);
        assert_eq!(g.branch, Branch::MixedMarginals);
        let prod = RMatrix::product(Vector3::new(0.3, 0.1, -0.2), Vector3::new(0.0, 0.5, 0.5));
        assert!(two_sided_measure(&prod).value.abs() < 1e-10);
    }

    #[test]
    fn reference_states() {
        let rho_i = XStateParams::new(0.7949, 0.7949, 0.4705, -0.5277, 0.8947).to_r_matrix();
        let g = two_sided_measure(&rho_i);
        assert!((g.lambda_max(&rho_i) - 2.06422).abs() < 1e-5);
        assert!((g.value - 0.124959385).abs() < 1e-8);
        assert_eq!(g.branch.to_string(), "λ10");

        let rho_ii = XStateParams::new(0.6479, 0.6479, 0.3926, -0.0772, 0.0360).to_r_matrix();
        let g = two_sided_measure(&rho_ii);
        assert!((g.lambda_max(&rho_ii) - 0.84084).abs() < 1e-5);
        assert!((g.value - 0.04002365).abs() < 1e-7);
    }

    #[test]
    fn mixed_marginal_branches_agree_with_numeric() {
        let mut rng = seeded(31);
        for _ in 0..30 {
            let t = Matrix3::from_fn(|_, _| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)) * 0.2;
            let y = random_unit_vector(&mut rng) * 0.3;
            let ra = RMatrix::new(Vector3::zeros(), y, t);
            let rb = swap_parties(&ra);
            let (num_a, _) = maximize_lambda_m(&ra, &GridSpec::default());
            let (num_b, _) = maximize_lambda_m(&rb, &GridSpec::default());
            let ga = two_sided_measure(&ra);
            let gb = two_sided_measure(&rb);
            assert_eq!(ga.branch, Branch::MixedMarginalA);
            assert_eq!(gb.branch, Branch::MixedMarginalB);
            assert!((ga.lambda_max(&ra) - num_a).abs() < 1e-9);
            assert!((gb.lambda_max(&rb) - num_b).abs() < 1e-9);
        }
    }

    #[test]
    fn reported_directions_reproduce_value() {
        for seed in 0..40 {
            let r = random_r(seed);
            let g = two_sided_measure(&r);
            let m = dirs(g.k_opt.unwrap(), g.l_opt.unwrap());
            assert!((d2_to_micc(&r, &m) - g.value).abs() < 1e-9);
        }
    }

    #[test]
    fn rotated_x_state_uses_closed_form() {
        let p = XStateParams::new(0.3, -0.3, 0.4, -0.2, 0.25);
        let r = p.to_r_matrix().rotated(&crate::state::rz(0.7), &crate::state::rz(-1.1));
        let g = two_sided_measure(&r);
        assert!(matches!(g.branch, Branch::Candidate(_)));
        let canonical = two_sided_measure(&p.to_r_matrix());
        assert!((g.value - canonical.value).abs() < 1e-12);
        let m = dirs(g.k_opt.unwrap(), g.l_opt.unwrap());
        assert!((d2_to_micc(&r, &m) - g.value).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn g_is_nonnegative_and_swap_symmetric(seed in any::<u64>()) {
            let r = random_r(seed);
            let g = two_sided_measure(&r).value;
            prop_assert!(g >= -1e-12);
            prop_assert!((g - two_sided_measure(&swap_parties(&r)).value).abs() < 1e-9);
        }

        #[test]
        fn g_is_local_unitary_invariant(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let r = random_r(seed ^ 0x5555);
            let (oa, ob) = (random_rotation(&mut rng), random_rotation(&mut rng));
            let g = two_sided_measure(&r).value;
            let h = two_sided_measure(&r.rotated(&oa, &ob)).value;
            prop_assert!((g - h).abs() < 1e-8);
        }

        #[test]
        fn two_sided_dominates_one_sided(seed in any::<u64>()) {
            let r = random_r(seed);
            let g = two_sided_measure(&r).value;
            let one = one_sided_measure_a(&r).value.max(one_sided_measure_b(&r).value);
            prop_assert!(g >= one - 1e-9);
        }

        #[test]
        fn g_is_minimal_over_sampled_directions(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let r = random_r(seed.rotate_left(7));
            let g = two_sided_measure(&r).value;
            for _ in 0..50 {
                let m = dirs(random_unit_vector(&mut rng), random_unit_vector(&mut rng));
                prop_assert!(d2_to_micc(&r, &m) >= g - 1e-10);
            }
        }
    }
}
