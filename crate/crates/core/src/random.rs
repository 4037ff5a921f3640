//! Seeded random states for property tests and sweeps.

use nalgebra::{Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::state::{DensityMatrix4, RMatrix, XStateParams};

pub type StateRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// rho = G G^dag / Tr(G G^dag) with G a 4x4 complex Ginibre matrix.
pub fn ginibre_state<R: Rng>(rng: &mut R) -> DensityMatrix4 {
    let g = Matrix4::from_fn(|_, _| Complex64::new(normal(rng), normal(rng)));
    let m = g * g.adjoint();
    let tr = m.trace();
    DensityMatrix4(m / tr)
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(normal(rng), normal(rng), normal(rng));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Haar-random rotation from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// Positivity of the X state with the given parameters.
pub fn x_state_is_positive(p: &XStateParams) -> bool {
    let d11 = (1.0 + p.x3 + p.y3 + p.t3) / 4.0;
    let d44 = (1.0 - p.x3 - p.y3 + p.t3) / 4.0;
    let d22 = (1.0 + p.x3 - p.y3 - p.t3) / 4.0;
    let d33 = (1.0 - p.x3 + p.y3 - p.t3) / 4.0;
    let outer = ((p.t1 - p.t2) / 4.0).powi(2);
    let inner = ((p.t1 + p.t2) / 4.0).powi(2);
    d11 >= 0.0 && d44 >= 0.0 && d22 >= 0.0 && d33 >= 0.0 && d11 * d44 >= outer && d22 * d33 >= inner
}

fn random_x_with<R: Rng>(rng: &mut R, y3_of: impl Fn(f64, &mut R) -> f64) -> XStateParams {
    loop {
        let x3 = rng.random_range(-1.0..1.0);
        let y3 = y3_of(x3, rng);
        let p = XStateParams::new(
            x3,
            y3,
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if p.t().iter().all(|t| t.abs() > 1e-6) && x_state_is_positive(&p) {
            return p;
        }
    }
}

/// Physical X state with |x3| = |y3| and every |t_i| > 1e-6; both sign patterns occur.
pub fn random_identical_purity_x<R: Rng>(rng: &mut R) -> XStateParams {
    random_x_with(rng, |x3, rng| if rng.random_bool(0.5) { x3 } else { -x3 })
}

/// Physical X state with x3 = y3.
pub fn random_symmetric_x<R: Rng>(rng: &mut R) -> XStateParams {
    random_x_with(rng, |x3, _| x3)
}

/// Physical X state with independent x3 and y3.
pub fn random_general_x<R: Rng>(rng: &mut R) -> XStateParams {
    random_x_with(rng, |_, rng| rng.random_range(-1.0..1.0))
}

/// Mixture of product states over random local bases.
pub fn cc_state<R: Rng>(rng: &mut R) -> RMatrix {
    let (k, l) = (random_unit_vector(rng), random_unit_vector(rng));
    let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut r = RMatrix::new(Vector3::zeros(), Vector3::zeros(), Matrix3::zeros());
    for (i, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
        let p = RMatrix::product(k * sa, l * sb);
        let weight = w[i] / total;
        r.x += p.x * weight;
        r.y += p.y * weight;
        r.t += p.t * weight;
    }
    r
}

/// Product state with random Bloch vectors inside the ball.
pub fn product_state<R: Rng>(rng: &mut R) -> RMatrix {
    let a = random_unit_vector(rng) * rng.random_range(0.0..1.0);
    let b = random_unit_vector(rng) * rng.random_range(0.0..1.0);
    RMatrix::product(a, b)
}

/// State with a maximally mixed A marginal.
pub fn mixed_marginal_a_state<R: Rng>(rng: &mut R) -> RMatrix {
    loop {
        let t = Matrix3::from_fn(|_, _| normal(rng)) * 0.3;
        let y = random_unit_vector(rng) * rng.random_range(0.0..0.6);
        let r = RMatrix::new(Vector3::zeros(), y, t);
        if r.to_density().validate().passed {
            return r;
        }
    }
}

/// Kinds of state mixed into randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Ginibre,
    IdenticalPurityX,
    RotatedX,
    GeneralX,
    MixedMarginalA,
    MixedMarginalB,
    Product,
}

impl StateKind {
    pub const ALL: [StateKind; 7] = [
        StateKind::Ginibre,
        StateKind::IdenticalPurityX,
        StateKind::RotatedX,
        StateKind::GeneralX,
        StateKind::MixedMarginalA,
        StateKind::MixedMarginalB,
        StateKind::Product,
    ];

    /// Cycles through all kinds, weighting Ginibre states double.
    pub fn for_index(i: usize) -> StateKind {
        match i % 8 {
            7 => StateKind::Ginibre,
            j => Self::ALL[j],
        }
    }
}

/// A random physical state of the requested kind in Bloch form.
pub fn random_state<R: Rng>(rng: &mut R, kind: StateKind) -> RMatrix {
    match kind {
        StateKind::Ginibre => ginibre_state(rng).r_matrix_unchecked(),
        StateKind::IdenticalPurityX => random_identical_purity_x(rng).to_r_matrix(),
        StateKind::RotatedX => {
            let p = random_identical_purity_x(rng).to_r_matrix();
            let (a, b) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
            p.rotated(&crate::state::rz(a), &crate::state::rz(b))
        }
        StateKind::GeneralX => random_general_x(rng).to_r_matrix(),
        StateKind::MixedMarginalA => mixed_marginal_a_state(rng),
        StateKind::MixedMarginalB => crate::state::swap_parties(&mixed_marginal_a_state(rng)),
        StateKind::Product => product_state(rng),
    }
}
