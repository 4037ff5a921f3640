//! Brute-force reference for the two-sided measure.
//!
//! Scans d2 over a product of two half-sphere grids, one for each party, and
//! polishes the best grid points with a compass search in four tangent
//! coordinates. Nothing here uses the eigenvalue reduction of the analytic
//! path, so agreement between the two is a genuine cross-check.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::eigen::canonical_sign;
use crate::measures::{d2_to_micc, lambda_m, Branch, MeasureResult, Method};
use crate::sphere::{same_axis, GridSpec, TangentChart};
use crate::state::{MeasurementDirections, RMatrix};

/// Smallest compass step before the search stops.
pub const COMPASS_MIN_STEP: f64 = 1e-9;
const SEEDS: usize = 8;
const MAX_COMPASS_ITERS: usize = 20_000;

/// Best l for each grid k: (largest captured weight, index of l).
fn scan(r: &RMatrix, pts: &[Vector3<f64>]) -> Vec<(f64, usize)> {
    let yl2: Vec<f64> = pts.iter().map(|l| r.y.dot(l).powi(2)).collect();
    pts.par_iter()
        .map(|k| {
            let xk2 = r.x.dot(k).powi(2);
            let tk = r.t.transpose() * k;
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, l) in pts.iter().enumerate() {
                let captured = xk2 + yl2[j] + tk.dot(l).powi(2);
                if captured > best.0 {
                    best = (captured, j);
                }
            }
            best
        })
        .collect()
}

/// Minimum of d2 over the grid alone, without refinement.
///
/// Grids related by doubling are nested, so this is non-increasing under
/// [`GridSpec::doubled`].
pub fn grid_minimum_g(r: &RMatrix, grid: &GridSpec) -> f64 {
    let pts = grid.points();
    let best = scan(r, &pts)
        .into_iter()
        .map(|(c, _)| c)
        .fold(f64::NEG_INFINITY, f64::max);
    0.25 * (r.total_weight() - best)
}

/// Two-sided measure by exhaustive grid scan and compass refinement.
pub fn brute_force_g(r: &RMatrix, grid: &GridSpec) -> MeasureResult {
    let pts = grid.points();
    let per_k = scan(r, &pts);

    let mut order: Vec<usize> = (0..per_k.len()).collect();
    order.sort_by(|&a, &b| per_k[b].0.total_cmp(&per_k[a].0).then(a.cmp(&b)));
    let cos_sep = (3.0 * grid.spacing()).cos();
    let mut seeds: Vec<(Vector3<f64>, Vector3<f64>)> = Vec::with_capacity(SEEDS);
    for i in order {
        let (k, l) = (pts[i], pts[per_k[i].1]);
        let distinct = seeds
            .iter()
            .all(|(sk, sl)| !(same_axis(&k, sk, cos_sep) && same_axis(&l, sl, cos_sep)));
        if distinct {
            seeds.push((k, l));
            if seeds.len() == SEEDS {
                break;
            }
        }
    }

    let f = |k: &Vector3<f64>, l: &Vector3<f64>| d2_to_micc(r, &MeasurementDirections { k: *k, l: *l });
    let refined: Vec<(f64, Vector3<f64>, Vector3<f64>)> = seeds
        .par_iter()
        .map(|(k, l)| compass_min(&f, *k, *l, grid.spacing()))
        .collect();
    let (value, k, l) = refined
        .into_iter()
        .fold((f64::INFINITY, Vector3::z(), Vector3::z()), |acc, cand| {
            if cand.0 < acc.0 {
                cand
            } else {
                acc
            }
        });
    MeasureResult::new(
        value,
        Some(canonical_sign(k)),
        Some(canonical_sign(l)),
        Method::BruteForce,
        Branch::Grid,
    )
}

/// Compass search on (k, l) in tangent coordinates; charts are re-centred after every move.
fn compass_min<F>(f: &F, k0: Vector3<f64>, l0: Vector3<f64>, step0: f64) -> (f64, Vector3<f64>, Vector3<f64>)
where
    F: Fn(&Vector3<f64>, &Vector3<f64>) -> f64,
{
    let (mut k, mut l) = (k0, l0);
    let mut fc = f(&k, &l);
    let mut step = step0;
    for _ in 0..MAX_COMPASS_ITERS {
        if step < COMPASS_MIN_STEP {
            break;
        }
        let (ck, cl) = (TangentChart::new(k), TangentChart::new(l));
        let mut best = (fc, k, l);
        for dir in 0..8 {
            let s = if dir % 2 == 0 { step } else { -step };
            let (nk, nl) = match dir / 2 {
                0 => (ck.at(s, 0.0), l),
                1 => (ck.at(0.0, s), l),
                2 => (k, cl.at(s, 0.0)),
                _ => (k, cl.at(0.0, s)),
            };
            let v = f(&nk, &nl);
            if v < best.0 {
                best = (v, nk, nl);
            }
        }
        if best.0 < fc {
            (fc, k, l) = best;
        } else {
            step *= 0.5;
        }
    }
    (fc, k, l)
}

/// Maximum of lambda_M over the sphere by grid scan and compass refinement.
pub fn brute_force_lambda_max(r: &RMatrix, grid: &GridSpec) -> f64 {
    let pts = grid.points();
    let vals: Vec<f64> = pts.par_iter().map(|l| lambda_m(r, l)).collect();
    let seeds = crate::measures::diverse_top(&pts, &vals, SEEDS, (3.0 * grid.spacing()).cos());
    seeds
        .par_iter()
        .map(|&i| compass_max_2d(r, pts[i], grid.spacing()))
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn compass_max_2d(r: &RMatrix, l0: Vector3<f64>, step0: f64) -> f64 {
    let mut l = l0;
    let mut fc = lambda_m(r, &l);
    let mut step = step0;
    for _ in 0..MAX_COMPASS_ITERS {
        if step < COMPASS_MIN_STEP {
            break;
        }
        let chart = TangentChart::new(l);
        let mut best = (fc, l);
        for (u, v) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let cand = chart.at(u, v);
            let val = lambda_m(r, &cand);
            if val > best.0 {
                best = (val, cand);
            }
        }
        if best.0 > fc {
            (fc, l) = best;
        } else {
            step *= 0.5;
        }
    }
    fc
}
