//! Two-qubit state representations.
//!
//! Basis order is |00>, |01>, |10>, |11> with party A as the left factor.
//! Pauli matrices follow the usual convention, sigma_z |0> = +|0>.
//!
//! The Bloch/correlation form stores `x_i = Tr[rho (sigma_i x 1)]`,
//! `y_j = Tr[rho (1 x sigma_j)]` and `t_ij = Tr[rho (sigma_i x sigma_j)]`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DispatchError, StateError};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Magnitude below which an off-X entry counts as zero.
pub const X_STRUCTURE_TOL: f64 = 1e-12;
/// Allowed gap between |x3| and |y3| for identical local purity.
pub const PURITY_TOL: f64 = 1e-10;
pub const UNIT_TOL: f64 = 1e-12;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// sigma_0 .. sigma_3.
pub fn pauli(mu: usize) -> Matrix2<Complex64> {
    match mu {
        0 => Matrix2::new(C1, C0, C0, C1),
        1 => Matrix2::new(C0, C1, C1, C0),
        2 => Matrix2::new(C0, -CI, CI, C0),
        3 => Matrix2::new(C1, C0, C0, -C1),
        _ => panic!("Pauli index {mu} out of range"),
    }
}

/// Kronecker product of two single-qubit operators, left factor on party A.
pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// A 4x4 two-qubit density matrix.
///
/// Construction does not enforce the physical invariants; call
/// [`DensityMatrix4::validate`] (or [`to_r_matrix`]) to check them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(pub Matrix4<Complex64>);

/// Outcome of checking the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

impl ValidationReport {
    /// The first violated invariant, if any.
    pub fn violation(&self) -> Option<StateError> {
        if self.hermiticity_defect > HERMITICITY_TOL {
            Some(StateError::NotHermitian(self.hermiticity_defect))
        } else if self.trace_defect > TRACE_TOL {
            Some(StateError::Trace(self.trace_defect))
        } else if self.min_eigenvalue < POSITIVITY_TOL {
            Some(StateError::NotPositive(self.min_eigenvalue))
        } else {
            None
        }
    }
}

impl DensityMatrix4 {
    pub fn new(m: Matrix4<Complex64>) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * Complex64::new(0.25, 0.0))
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(amplitudes: [Complex64; 4]) -> Self {
        let v = nalgebra::Vector4::from(amplitudes);
        let v = v / Complex64::new(v.norm(), 0.0);
        Self(v * v.adjoint())
    }

    /// Real diagonal density matrix.
    pub fn diagonal(p: [f64; 4]) -> Self {
        Self(Matrix4::from_diagonal(&nalgebra::Vector4::from(p).map(|v| Complex64::new(v, 0.0))))
    }

    /// (|00> + |11>)/sqrt 2.
    pub fn bell_phi_plus() -> Self {
        Self::pure([C1, C0, C0, C1])
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Tr[rho^2].
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn validate(&self) -> ValidationReport {
        let m = &self.0;
        let hermiticity_defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let trace_defect = (m.trace() - C1).norm();
        let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = SymmetricEigen::new(herm).eigenvalues.min();
        let mut report = ValidationReport {
            hermiticity_defect,
            trace_defect,
            min_eigenvalue,
            passed: false,
        };
        report.passed = report.violation().is_none();
        report
    }

    /// Bloch/correlation form without checking the density-matrix invariants.
    pub fn r_matrix_unchecked(&self) -> RMatrix {
        let expect = |mu: usize, nu: usize| -> f64 {
            let op = kron2(&pauli(mu), &pauli(nu));
            (self.0 * op).trace().re
        };
        RMatrix {
            x: Vector3::from_fn(|i, _| expect(i + 1, 0)),
            y: Vector3::from_fn(|j, _| expect(0, j + 1)),
            t: Matrix3::from_fn(|i, j| expect(i + 1, j + 1)),
        }
    }

    /// Sorted (ascending) eigenvalues of the Hermitian part.
    pub fn spectrum(&self) -> [f64; 4] {
        let herm = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut vals: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        [vals[0], vals[1], vals[2], vals[3]]
    }

    /// Positions outside the diagonal and skew diagonal whose magnitude exceeds the X tolerance.
    pub fn off_x_entries(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 && self.0[(i, j)].norm() > X_STRUCTURE_TOL {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix4) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Validated conversion to Bloch/correlation form.
pub fn to_r_matrix(rho: &DensityMatrix4) -> Result<RMatrix, StateError> {
    if let Some(err) = rho.validate().violation() {
        return Err(err);
    }
    Ok(rho.r_matrix_unchecked())
}

/// rho = 1/4 sum R_{mu nu} sigma_mu x sigma_nu. Positivity is not checked.
pub fn from_r_matrix(r: &RMatrix) -> DensityMatrix4 {
    let mut m = kron2(&pauli(0), &pauli(0));
    for i in 0..3 {
        m += kron2(&pauli(i + 1), &pauli(0)) * Complex64::new(r.x[i], 0.0);
        m += kron2(&pauli(0), &pauli(i + 1)) * Complex64::new(r.y[i], 0.0);
        for j in 0..3 {
            m += kron2(&pauli(i + 1), &pauli(j + 1)) * Complex64::new(r.t[(i, j)], 0.0);
        }
    }
    DensityMatrix4(m * Complex64::new(0.25, 0.0))
}

/// Two-qubit state in Bloch/correlation form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RMatrix {
    /// Bloch vector of party A.
    pub x: Vector3<f64>,
    /// Bloch vector of party B.
    pub y: Vector3<f64>,
    /// Correlation matrix, rows indexed by A.
    pub t: Matrix3<f64>,
}

impl RMatrix {
    pub fn new(x: Vector3<f64>, y: Vector3<f64>, t: Matrix3<f64>) -> Self {
        Self { x, y, t }
    }

    pub fn maximally_mixed() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros(), Matrix3::zeros())
    }

    /// Product state with the given local Bloch vectors.
    pub fn product(x: Vector3<f64>, y: Vector3<f64>) -> Self {
        Self::new(x, y, x * y.transpose())
    }

    pub fn bell_phi_plus() -> Self {
        Self::new(
            Vector3::zeros(),
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)),
        )
    }

    pub fn to_density(&self) -> DensityMatrix4 {
        from_r_matrix(self)
    }

    /// x^2 + y^2 + ||T||^2.
    pub fn total_weight(&self) -> f64 {
        self.x.norm_squared() + self.y.norm_squared() + self.t.norm_squared()
    }

    /// Whether the Bloch vectors and correlation entries lie in the unit range.
    pub fn within_bounds(&self) -> bool {
        let eps = 1e-12;
        self.x.norm() <= 1.0 + eps
            && self.y.norm() <= 1.0 + eps
            && self.t.iter().all(|v| v.abs() <= 1.0 + eps)
    }

    pub fn max_abs_diff(&self, other: &RMatrix) -> f64 {
        let dx = (self.x - other.x).amax();
        let dy = (self.y - other.y).amax();
        let dt = (self.t - other.t).amax();
        dx.max(dy).max(dt)
    }

    /// Apply local rotations: x -> O_A x, y -> O_B y, T -> O_A T O_B^T.
    pub fn rotated(&self, o_a: &Matrix3<f64>, o_b: &Matrix3<f64>) -> Self {
        Self::new(o_a * self.x, o_b * self.y, o_a * self.t * o_b.transpose())
    }

    /// Conjugation by sigma_x on both qubits: flips the z (and y) axes of each party.
    ///
    /// Useful for states quoted in a frame whose +z axis points at the excited
    /// level rather than at |0>.
    pub fn flip_z(&self) -> Self {
        let f = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        self.rotated(&f, &f)
    }
}

/// x <-> y, T <-> T^T.
pub fn swap_parties(r: &RMatrix) -> RMatrix {
    RMatrix::new(r.y, r.x, r.t.transpose())
}

/// Canonical X-state parameters: x = (0,0,x3), y = (0,0,y3), T = diag(t1,t2,t3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XStateParams {
    pub x3: f64,
    pub y3: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl XStateParams {
    pub fn new(x3: f64, y3: f64, t1: f64, t2: f64, t3: f64) -> Self {
        Self { x3, y3, t1, t2, t3 }
    }

    /// |x3| = |y3| within [`PURITY_TOL`].
    pub fn identical_purity(&self) -> bool {
        (self.x3.abs() - self.y3.abs()).abs() <= PURITY_TOL
    }

    /// Shared local Bloch length r = |x3| (= |y3| for identical purity).
    pub fn r(&self) -> f64 {
        0.5 * (self.x3.abs() + self.y3.abs())
    }

    pub fn t(&self) -> [f64; 3] {
        [self.t1, self.t2, self.t3]
    }

    pub fn to_r_matrix(&self) -> RMatrix {
        RMatrix::new(
            Vector3::new(0.0, 0.0, self.x3),
            Vector3::new(0.0, 0.0, self.y3),
            Matrix3::from_diagonal(&Vector3::new(self.t1, self.t2, self.t3)),
        )
    }

    pub fn to_density(&self) -> DensityMatrix4 {
        from_r_matrix(&self.to_r_matrix())
    }

    /// See [`RMatrix::flip_z`].
    pub fn flip_z(&self) -> Self {
        Self::new(-self.x3, -self.y3, self.t1, self.t2, self.t3)
    }
}

/// Canonical X-state parameters together with the local z rotations used.
///
/// The frame angles `theta_a`, `theta_b` define `O = R_z(-theta)` on each
/// party; applying `(O_A, O_B)` to the input Bloch form yields `params`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalXState {
    pub params: XStateParams,
    pub theta_a: f64,
    pub theta_b: f64,
}

impl CanonicalXState {
    pub fn rotation_a(&self) -> Matrix3<f64> {
        rz(-self.theta_a)
    }

    pub fn rotation_b(&self) -> Matrix3<f64> {
        rz(-self.theta_b)
    }

    /// Map a B-side direction from the canonical frame back to the input frame.
    pub fn direction_b_to_input(&self, l: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_b().transpose() * l
    }

    pub fn direction_a_to_input(&self, k: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_a().transpose() * k
    }
}

/// Rotation by `angle` about the z axis.
pub fn rz(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Canonicalize an X-state density matrix.
pub fn canonicalize_x_state(rho: &DensityMatrix4) -> Result<CanonicalXState, StateError> {
    let bad = rho.off_x_entries();
    if !bad.is_empty() {
        return Err(StateError::NotXState(bad));
    }
    canonicalize_x_r(&rho.r_matrix_unchecked()).map_err(|e| match e {
        DispatchError::State(s) => s,
        other => unreachable!("unexpected canonicalization error {other}"),
    })
}

/// Canonicalize an X state given in Bloch form.
///
/// The input must have x and y along z and T with no coupling between the z
/// axis and the xy plane. The xy block of T is brought to diagonal form by z
/// rotations on each party.
pub fn canonicalize_x_r(r: &RMatrix) -> Result<CanonicalXState, DispatchError> {
    let mut bad = Vec::new();
    let eps = X_STRUCTURE_TOL;
    for i in 0..2 {
        if r.x[i].abs() > eps || r.y[i].abs() > eps {
            bad.push((i, 3));
        }
        if r.t[(i, 2)].abs() > eps || r.t[(2, i)].abs() > eps {
            bad.push((i, 2));
        }
    }
    if !bad.is_empty() {
        return Err(StateError::NotXState(bad).into());
    }

    let (theta_a, theta_b) = xy_block_frame(r.t[(0, 0)], r.t[(0, 1)], r.t[(1, 0)], r.t[(1, 1)]);
    let canon = r.rotated(&rz(-theta_a), &rz(-theta_b));
    Ok(CanonicalXState {
        params: XStateParams::new(
            canon.x[2],
            canon.y[2],
            canon.t[(0, 0)],
            canon.t[(1, 1)],
            canon.t[(2, 2)],
        ),
        theta_a,
        theta_b,
    })
}

/// Frame angles diagonalizing the 2x2 block [[a, b], [c, d]].
///
/// The block splits into a rotation part rho1 R(phi1) and a reflection part
/// rho2 F(phi2). Under R(-ta) M R(tb) they become R(phi1 - ta + tb) and
/// F(phi2 - ta - tb), so diagonal form needs ta - tb = phi1 and
/// ta + tb = phi2 (mod pi). theta_a is taken in [0, pi/2) and theta_b in
/// [0, pi); when a part vanishes the free angle goes to zero, or to a
/// common rotation for a pure reflection (symmetric block).
fn xy_block_frame(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let eps = X_STRUCTURE_TOL;
    let (e, f) = (0.5 * (a + d), 0.5 * (a - d));
    let (g, h) = (0.5 * (c - b), 0.5 * (b + c));
    let (rho1, phi1) = (e.hypot(g), g.atan2(e));
    let (rho2, phi2) = (f.hypot(h), h.atan2(f));

    let wrap = |angle: f64, period: f64| {
        let w = angle.rem_euclid(period);
        if period - w < 1e-12 {
            0.0
        } else {
            w
        }
    };
    match (rho1 > eps, rho2 > eps) {
        (true, true) => {
            let ta = wrap(0.5 * (phi1 + phi2), FRAC_PI_2);
            (ta, wrap(phi2 - ta, PI))
        }
        (false, true) => {
            let ta = wrap(0.5 * phi2, FRAC_PI_2);
            (ta, ta)
        }
        (true, false) => (0.0, wrap(-phi1, PI)),
        (false, false) => (0.0, 0.0),
    }
}

/// A pair of measurement directions, `k` on A and `l` on B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementDirections {
    pub k: Vector3<f64>,
    pub l: Vector3<f64>,
}

impl MeasurementDirections {
    pub fn new(k: Vector3<f64>, l: Vector3<f64>) -> Result<Self, StateError> {
        for v in [&k, &l] {
            let n = v.norm();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(StateError::NotUnit(n));
            }
        }
        Ok(Self { k, l })
    }

    /// Normalizes both inputs.
    pub fn normalized(k: Vector3<f64>, l: Vector3<f64>) -> Self {
        Self {
            k: k.normalize(),
            l: l.normalize(),
        }
    }

    /// K = k k^T.
    pub fn k_projector(&self) -> Matrix3<f64> {
        self.k * self.k.transpose()
    }

    /// L = l l^T.
    pub fn l_projector(&self) -> Matrix3<f64> {
        self.l * self.l.transpose()
    }
}

/// Unit vector with polar angle `theta` from +z and azimuth `phi`.
pub fn unit_from_angles(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}
